use crate::config::Format;
use crate::CliError;
use rayon::prelude::*;
use serde::Serialize;
use sunc::bounds::{self, BoundsReport};
use sunc::lp::{self, audit, minimal_r, AuditReport, LpCertificate, LpOptions, Status, SummaryRow};
use sunc::optimize::{maximize_ratio, OptimizeResult};
use sunc::radial::{eigen_to_profile, radial_fourier, rule_for};
use sunc::verify::{self, verify_batch, BatchRecord, CoefficientLaw, THETA_GRID};
use sunc::EigenExpansion;

/// Text produced by a command plus the serialized offenders, if any.
#[derive(Debug, Default)]
pub struct Report {
    pub body: String,
    pub failures: Vec<String>,
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(sunc::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_array<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(rows).map_err(sunc::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn json_line<T: Serialize>(v: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string(v).map_err(sunc::Error::from)?)
}

pub fn cmd_bounds(dims: &[usize], format: Format) -> Result<Report, CliError> {
    let rows: Vec<BoundsReport> = dims.iter().map(|&d| BoundsReport::new(d)).collect::<sunc::Result<_>>()?;
    let body = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            bounds::write_csv(&rows, &mut buf)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        Format::Json => json_array(&rows)?,
    };
    Ok(Report { body, failures: Vec::new() })
}

/// Summary of one `(d, law)` batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    pub dim: usize,
    pub law: CoefficientLaw,
    pub degree: usize,
    pub count: u64,
    pub failures: u64,
    pub max_ratio: f64,
    pub bound: f64,
    pub min_slack: f64,
    pub max_link_residual: f64,
    /// Largest relative L² gap between the sampled transform and the
    /// coefficient sign flip.
    pub transform_residual: f64,
}

const TRANSFORM_TOL: f64 = 1e-6;

fn transform_residual(f: &EigenExpansion, order: usize) -> sunc::Result<f64> {
    let rule = rule_for(f.dim, order)?;
    let sampled = radial_fourier(&eigen_to_profile(f, &rule)?)?;
    let exact = eigen_to_profile(&f.fourier(), &rule)?;
    let diff = sampled.combine(1.0, &exact, -1.0)?;
    Ok((diff.norm_l2_sq() / exact.norm_l2_sq()).sqrt())
}

fn batch_seed(seed: u64, d: usize, law: CoefficientLaw) -> u64 {
    let k = CoefficientLaw::ALL.iter().position(|&l| l == law).unwrap_or(0) as u64;
    seed ^ ((d as u64) << 40) ^ (k << 56)
}

pub fn cmd_verify(
    seed: u64,
    dims: &[usize],
    degree: usize,
    count: u64,
    laws: &[CoefficientLaw],
    quad_order: usize,
    format: Format,
) -> Result<Report, CliError> {
    let mut rows = Vec::new();
    let mut records: Vec<BatchRecord> = Vec::new();
    let mut failures = Vec::new();
    for &d in dims {
        for &law in laws {
            let (recs, s) = verify_batch(batch_seed(seed, d, law), d, degree, count, law, &THETA_GRID)?;
            let residuals: Vec<f64> = recs
                .par_iter()
                .map(|r| transform_residual(&r.function, quad_order))
                .collect::<sunc::Result<_>>()?;
            let worst = residuals.iter().copied().fold(0.0, f64::max);
            for (r, &res) in recs.iter().zip(&residuals) {
                if !r.ok || res > TRANSFORM_TOL {
                    failures.push(json_line(r)?);
                }
            }
            rows.push(VerifyRow {
                dim: s.dim,
                law: s.law,
                degree: s.degree,
                count: s.count,
                failures: s.failures + residuals.iter().zip(&recs).filter(|(x, r)| **x > TRANSFORM_TOL && r.ok).count() as u64,
                max_ratio: s.max_ratio,
                bound: s.bound,
                min_slack: s.min_slack,
                max_link_residual: s.max_link_residual,
                transform_residual: worst,
            });
            if format == Format::Json {
                records.extend(recs);
            }
        }
    }
    let body = match format {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => {
            let mut buf = Vec::new();
            verify::write_json_lines(&records, &mut buf)?;
            String::from_utf8(buf).expect("json output is utf-8")
        }
    };
    Ok(Report { body, failures })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeRow {
    pub dim: usize,
    pub degree: usize,
    pub ratio: f64,
    pub gaussian_ratio: f64,
    pub bound: f64,
    pub restarts: usize,
    pub iterations: u64,
    pub seed: u64,
    pub best_restart: usize,
}

pub fn run_optimize(dims: &[usize], degree: usize, budget: u64, restarts: usize, seed: u64) -> Result<Vec<OptimizeResult>, CliError> {
    Ok(dims
        .iter()
        .map(|&d| maximize_ratio(d, degree, budget, restarts, seed))
        .collect::<sunc::Result<_>>()?)
}

pub fn cmd_optimize(
    dims: &[usize],
    degree: usize,
    budget: u64,
    restarts: usize,
    seed: u64,
    format: Format,
) -> Result<Report, CliError> {
    let results = run_optimize(dims, degree, budget, restarts, seed)?;
    let body = match format {
        Format::Json => json_array(&results)?,
        Format::Csv => {
            let rows: Vec<OptimizeRow> = results
                .iter()
                .map(|r| OptimizeRow {
                    dim: r.dim,
                    degree,
                    ratio: r.ratio,
                    gaussian_ratio: r.gaussian_ratio,
                    bound: r.bound,
                    restarts: r.restarts,
                    iterations: r.iterations,
                    seed: r.seed,
                    best_restart: r.best_restart,
                })
                .collect();
            csv_rows(&rows)?
        }
    };
    Ok(Report { body, failures: Vec::new() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpRecord {
    pub certificate: LpCertificate,
    pub audit: AuditReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct LpRow {
    dim: usize,
    degree: usize,
    r_star: f64,
    density_bound: f64,
    floor: f64,
    slack: f64,
    status: Status,
    audit_ok: bool,
}

pub fn run_lp(dims: &[usize], degree: usize, tol: f64) -> Result<Vec<LpRecord>, CliError> {
    let opts = LpOptions::default();
    Ok(dims
        .par_iter()
        .map(|&d| {
            let certificate = minimal_r(d, degree, tol, &opts)?;
            let audit = audit(&certificate, opts.refinement)?;
            Ok(LpRecord { certificate, audit })
        })
        .collect::<sunc::Result<_>>()?)
}

pub fn cmd_lp(dims: &[usize], degree: usize, tol: f64, format: Format) -> Result<Report, CliError> {
    let recs = run_lp(dims, degree, tol)?;
    let mut failures = Vec::new();
    for r in &recs {
        if !r.audit.ok {
            failures.push(json_line(r)?);
        }
    }
    let body = match format {
        Format::Json => json_array(&recs)?,
        Format::Csv => {
            let rows: Vec<LpRow> = recs
                .iter()
                .map(|r| {
                    let s = SummaryRow::from(&r.certificate);
                    LpRow {
                        dim: s.dim,
                        degree: s.degree,
                        r_star: s.r_star,
                        density_bound: s.density_bound,
                        floor: s.floor,
                        slack: s.slack,
                        status: s.status,
                        audit_ok: r.audit.ok,
                    }
                })
                .collect();
            csv_rows(&rows)?
        }
    };
    Ok(Report { body, failures })
}

/// One row of the combined table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub dim: usize,
    pub a_lower: f64,
    pub a_lower_over_sqrt_d: f64,
    pub threshold_ok: bool,
    pub delta_lp_lower: f64,
    pub lp_degree: usize,
    pub lp_r_star: f64,
    pub lp_density_bound: f64,
    pub lp_status: Status,
    pub lp_audit_ok: bool,
    pub gaussian_ratio: f64,
    pub optimizer_ratio: f64,
    pub ratio_bound: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn table_rows(
    dims: &[usize],
    lp_degrees: &[usize],
    degree: usize,
    budget: u64,
    restarts: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<TableRow>, CliError> {
    let opts = LpOptions::default();
    let per_dim: Vec<Vec<TableRow>> = dims
        .iter()
        .map(|&d| {
            let b = BoundsReport::new(d)?;
            let opt = maximize_ratio(d, degree, budget, restarts, seed)?;
            let certs: Vec<(LpCertificate, AuditReport)> = lp_degrees
                .par_iter()
                .map(|&n| {
                    let c = lp::minimal_r(d, n, tol, &opts)?;
                    let a = audit(&c, opts.refinement)?;
                    Ok((c, a))
                })
                .collect::<sunc::Result<_>>()?;
            Ok(certs
                .into_iter()
                .map(|(c, a)| TableRow {
                    dim: d,
                    a_lower: b.a_lower,
                    a_lower_over_sqrt_d: b.a_lower_over_sqrt_d,
                    threshold_ok: b.threshold_ok,
                    delta_lp_lower: b.log_delta_lp_lower.exp(),
                    lp_degree: c.degree,
                    lp_r_star: c.r_star,
                    lp_density_bound: c.density_bound,
                    lp_status: c.status,
                    lp_audit_ok: a.ok,
                    gaussian_ratio: opt.gaussian_ratio,
                    optimizer_ratio: opt.ratio,
                    ratio_bound: opt.bound,
                })
                .collect())
        })
        .collect::<Result<_, CliError>>()?;
    Ok(per_dim.into_iter().flatten().collect())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_table(
    dims: &[usize],
    lp_degrees: &[usize],
    degree: usize,
    budget: u64,
    restarts: usize,
    seed: u64,
    tol: f64,
    format: Format,
) -> Result<Report, CliError> {
    let rows = table_rows(dims, lp_degrees, degree, budget, restarts, seed, tol)?;
    let mut failures = Vec::new();
    for r in &rows {
        if !r.lp_audit_ok || r.lp_density_bound < r.delta_lp_lower * (1.0 - 1e-9) {
            failures.push(json_line(r)?);
        }
    }
    let body = match format {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => json_array(&rows)?,
    };
    Ok(Report { body, failures })
}
