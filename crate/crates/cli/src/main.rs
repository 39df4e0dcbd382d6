use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(sunc_cli::run(std::env::args_os()) as u8)
}
