use crate::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use sunc::verify::CoefficientLaw;

#[derive(Parser, Debug)]
#[command(name = "sunc", version, about = "Sign-uncertainty bounds, Fourier L1/L2 checks and LP certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    /// Closed-form lower bounds, one row per dimension.
    Bounds,
    /// Random-expansion checks of the L1/L2 inequality and its chain.
    Verify,
    /// Search for large ratios ‖f‖₂²/(‖f‖₁‖f̂‖₁).
    Optimize,
    /// Minimal LP radius and certificate per dimension.
    Lp,
    /// Combined table: bounds, LP densities and optimizer ratios.
    Table,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Every flag is optional here so a config file can fill the gaps.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// Dimensions: `5`, `1..16` (inclusive), `1..=16` or `1,2,8`.
    #[arg(long, global = true)]
    pub dims: Option<String>,
    /// Expansion degree N (verify, optimize, lp; optimizer degree in table).
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Ascent iterations per restart, 1..=100000.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Optimizer restarts, 1..=4096.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// RNG seed; required by verify, optimize and table.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Bisection width for the LP radius, in (0, 1).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Gauss–Laguerre order for sampled transforms, 16..=2048.
    #[arg(long = "quad-order", global = true)]
    pub quad_order: Option<usize>,
    /// Output format (default csv).
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads, 1..=1024.
    #[arg(long, env = "SUNC_THREADS", global = true)]
    pub threads: Option<usize>,
    /// key=value file preloading any of these flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random functions per dimension and law (verify), 1..=10000000.
    #[arg(long, global = true)]
    pub count: Option<u64>,
    /// Coefficient law: normal, decaying, sparse or all.
    #[arg(long, global = true)]
    pub law: Option<String>,
    /// Comma-separated LP degrees for the table.
    #[arg(long = "lp-degrees", global = true)]
    pub lp_degrees: Option<String>,
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub dims: Vec<usize>,
    pub degree: usize,
    pub budget: u64,
    pub restarts: usize,
    pub seed: Option<u64>,
    pub tol: f64,
    pub quad_order: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub count: u64,
    pub laws: Vec<CoefficientLaw>,
    pub lp_degrees: Vec<usize>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `5`, `a..b`, `a..=b` (both inclusive) or a comma list.
pub fn parse_dims(s: &str) -> Result<Vec<usize>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| usage(format!("bad dimension '{x}'")));
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().map_err(|_| usage(format!("bad {what} '{x}'"))))
        .collect()
}

fn parse_laws(s: &str) -> Result<Vec<CoefficientLaw>, CliError> {
    if s.trim() == "all" {
        return Ok(CoefficientLaw::ALL.to_vec());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| usage(format!("unknown law '{x}'"))))
        .collect()
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let k = k.trim().replace('_', "-");
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

const KEYS: [&str; 13] = [
    "dims", "degree", "budget", "restarts", "seed", "tol", "quad-order", "format", "out", "threads", "count", "law",
    "lp-degrees",
];

/// Fills unset flags from the config file.
fn overlay(mut f: Flags, file: &HashMap<String, String>) -> Result<Flags, CliError> {
    for k in file.keys() {
        if !KEYS.contains(&k.as_str()) {
            return Err(usage(format!("unknown config key '{k}'")));
        }
    }
    fn num<T: std::str::FromStr>(file: &HashMap<String, String>, k: &str) -> Result<Option<T>, CliError> {
        file.get(k)
            .map(|v| v.parse().map_err(|_| usage(format!("bad value '{v}' for {k}"))))
            .transpose()
    }
    f.dims = f.dims.or_else(|| file.get("dims").cloned());
    f.degree = f.degree.or(num(file, "degree")?);
    f.budget = f.budget.or(num(file, "budget")?);
    f.restarts = f.restarts.or(num(file, "restarts")?);
    f.seed = f.seed.or(num(file, "seed")?);
    f.tol = f.tol.or(num(file, "tol")?);
    f.quad_order = f.quad_order.or(num(file, "quad-order")?);
    if f.format.is_none() {
        if let Some(v) = file.get("format") {
            f.format = Some(Format::from_str(v, true).map_err(|_| usage(format!("bad format '{v}'")))?);
        }
    }
    f.out = f.out.or_else(|| file.get("out").map(PathBuf::from));
    f.threads = f.threads.or(num(file, "threads")?);
    f.count = f.count.or(num(file, "count")?);
    f.law = f.law.or_else(|| file.get("law").cloned());
    f.lp_degrees = f.lp_degrees.or_else(|| file.get("lp-degrees").cloned());
    Ok(f)
}

fn check_range<T: PartialOrd + std::fmt::Display>(name: &str, v: T, lo: T, hi: T) -> Result<T, CliError> {
    if v < lo || v > hi {
        return Err(usage(format!("{name} = {v} outside {lo}..={hi}")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn resolve(command: CommandKind, flags: Flags) -> Result<Self, CliError> {
        let flags = match &flags.config {
            Some(p) => overlay(flags.clone(), &read_config_file(p)?)?,
            None => flags,
        };
        let dims = parse_dims(flags.dims.as_deref().unwrap_or(match command {
            CommandKind::Bounds => "1..16",
            _ => "1..8",
        }))?;
        let max_dim = match command {
            CommandKind::Bounds => 4096,
            CommandKind::Verify | CommandKind::Optimize => 64,
            CommandKind::Lp | CommandKind::Table => 16,
        };
        for &d in &dims {
            check_range("dimension", d, 1, max_dim)?;
        }
        let degree = flags.degree.unwrap_or(match command {
            CommandKind::Verify => 8,
            CommandKind::Lp => 16,
            _ => sunc::optimize::DEFAULT_DEGREE,
        });
        let min_degree = if command == CommandKind::Lp { 2 } else { 0 };
        check_range("degree", degree, min_degree, 64)?;
        let lp_degrees = parse_list(flags.lp_degrees.as_deref().unwrap_or("8,16"), "LP degree")?;
        for &n in &lp_degrees {
            check_range("LP degree", n, 2, 64)?;
        }
        let default_budget = if command == CommandKind::Table { 50 } else { 200 };
        let budget = check_range("budget", flags.budget.unwrap_or(default_budget), 1, 100_000)?;
        let default_restarts = if command == CommandKind::Table { 8 } else { sunc::optimize::DEFAULT_RESTARTS };
        let restarts = check_range("restarts", flags.restarts.unwrap_or(default_restarts), 1, 4096)?;
        let tol = flags.tol.unwrap_or(1e-4);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(usage(format!("tol = {tol} outside (0, 1)")));
        }
        let quad_order = check_range("quad-order", flags.quad_order.unwrap_or(sunc::radial::DEFAULT_ORDER), 16, 2048)?;
        let count = check_range("count", flags.count.unwrap_or(100), 1, 10_000_000)?;
        let default_threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        let threads = check_range("threads", flags.threads.unwrap_or(default_threads), 1, 1024)?;
        let laws = parse_laws(flags.law.as_deref().unwrap_or("all"))?;
        let needs_seed = matches!(command, CommandKind::Verify | CommandKind::Optimize | CommandKind::Table);
        if needs_seed && flags.seed.is_none() {
            return Err(usage("this command is stochastic; pass --seed"));
        }
        Ok(Self {
            command,
            dims,
            degree,
            budget,
            restarts,
            seed: flags.seed,
            tol,
            quad_order,
            format: flags.format.unwrap_or(Format::Csv),
            out: flags.out,
            threads,
            count,
            laws,
            lp_degrees,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_syntax() {
        assert_eq!(parse_dims("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_dims("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_dims("8").unwrap(), vec![8]);
        assert_eq!(parse_dims("1, 5,8").unwrap(), vec![1, 5, 8]);
        assert!(parse_dims("5..4").unwrap().is_empty());
        assert!(parse_dims("").unwrap().is_empty());
        assert!(parse_dims("x..3").is_err());
    }

    #[test]
    fn seed_required_for_stochastic_commands() {
        let f = Flags::default();
        assert!(matches!(RunConfig::resolve(CommandKind::Verify, f.clone()), Err(CliError::Usage(_))));
        assert!(RunConfig::resolve(CommandKind::Bounds, f).is_ok());
    }

    #[test]
    fn ranges_enforced() {
        let f = Flags { dims: Some("0..2".into()), ..Flags::default() };
        assert!(RunConfig::resolve(CommandKind::Bounds, f).is_err());
        let f = Flags { degree: Some(1), ..Flags::default() };
        assert!(RunConfig::resolve(CommandKind::Lp, f).is_err());
        let f = Flags { tol: Some(0.0), ..Flags::default() };
        assert!(RunConfig::resolve(CommandKind::Lp, f).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("sunc-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.cfg");
        std::fs::write(&p, "# run\nseed = 7\ndims=3..4\nquad_order = 128\n").unwrap();
        let f = Flags { config: Some(p.clone()), dims: Some("2".into()), ..Flags::default() };
        let cfg = RunConfig::resolve(CommandKind::Verify, f).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.dims, vec![2]);
        assert_eq!(cfg.quad_order, 128);
        std::fs::write(&p, "colour = blue\n").unwrap();
        let f = Flags { config: Some(p), ..Flags::default() };
        assert!(RunConfig::resolve(CommandKind::Bounds, f).is_err());
        std::fs::remove_dir_all(dir).ok();
    }
}
