//! Checks of the main inequality and of every link of its proof on concrete
//! functions, plus seeded random test functions.

use crate::bounds::{c_theta, hy_constant, log_chain_bound, p_theta, theorem2_constant};
use crate::radial::{EigenExpansion, Prepared};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative tolerance for every inequality check.
pub const CHECK_TOL: f64 = 1e-9;

/// Interpolation parameters used for the link checks.
pub const THETA_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientLaw {
    /// `a_k ~ N(0, 1)`.
    Normal,
    /// `a_k ~ N(0, 4^{−k})`.
    Decaying,
    /// About a third of the `a_k` drawn from `N(0, 1)`, the rest zero.
    Sparse,
}

impl CoefficientLaw {
    pub const ALL: [CoefficientLaw; 3] = [Self::Normal, Self::Decaying, Self::Sparse];

    pub fn name(self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::Decaying => "decaying",
            Self::Sparse => "sparse",
        }
    }
}

impl std::str::FromStr for CoefficientLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Self::Normal),
            "decaying" => Ok(Self::Decaying),
            "sparse" => Ok(Self::Sparse),
            _ => Err(Error::Domain(format!("unknown coefficient law {s:?}"))),
        }
    }
}

/// Draws a nonzero expansion of degree at most `n` from `law`.
pub fn random_expansion(seed: u64, d: usize, n: usize, law: CoefficientLaw) -> Result<EigenExpansion> {
    random_expansion_stream(seed, 0, d, n, law)
}

/// As [`random_expansion`], on an independent stream of the same seed.
pub fn random_expansion_stream(seed: u64, stream: u64, d: usize, n: usize, law: CoefficientLaw) -> Result<EigenExpansion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    sample_expansion(&mut rng, d, n, law)
}

pub fn sample_expansion<R: Rng>(rng: &mut R, d: usize, n: usize, law: CoefficientLaw) -> Result<EigenExpansion> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    loop {
        let coeffs: Vec<f64> = (0..=n)
            .map(|k| {
                let z: f64 = rng.sample(StandardNormal);
                match law {
                    CoefficientLaw::Normal => z,
                    CoefficientLaw::Decaying => z * 0.5f64.powi(k as i32),
                    CoefficientLaw::Sparse => {
                        if rng.random::<f64>() < 1.0 / 3.0 {
                            z
                        } else {
                            0.0
                        }
                    }
                }
            })
            .collect();
        if coeffs.iter().any(|&c| c != 0.0) {
            return EigenExpansion::new(d, coeffs);
        }
    }
}

/// Relative height the final positive lobe of a witness must reach, so that
/// its eventual sign survives sampling.
pub const WITNESS_LOBE_FLOOR: f64 = 1e-9;

/// Draws `−1` eigenfunctions (odd indices only) that vanish at the origin,
/// rejecting until one is eventually nonnegative with a resolvable last lobe.
pub fn random_minus_witness<R: Rng>(rng: &mut R, d: usize, n: usize) -> Result<EigenExpansion> {
    if n < 3 {
        return Err(Error::Domain("a witness vanishing at 0 needs degree at least 3".into()));
    }
    let alpha = d as f64 / 2.0 - 1.0;
    for _ in 0..10_000 {
        let mut coeffs = vec![0.0; n + 1];
        for k in (3..=n).step_by(2) {
            coeffs[k] = rng.sample(StandardNormal);
        }
        // fix a₁ so that g(0) = Σ a_k L_k(0) = 0
        let rest: f64 = (3..=n)
            .step_by(2)
            .map(|k| coeffs[k] * crate::numerics::laguerre::laguerre_at_zero(k, alpha))
            .sum();
        coeffs[1] = -rest / (1.0 + alpha);
        let g = EigenExpansion::new(d, coeffs)?.trimmed();
        if g.is_zero() {
            continue;
        }
        let rep = crate::sign::last_sign_change(&g)?;
        if rep.eventually_nonneg && lobe_resolvable(&g, rep.a_radius) {
            return Ok(g);
        }
    }
    Err(Error::Convergence {
        what: "witness sampling",
        detail: "no eventually nonnegative draw in 10000 tries".into(),
    })
}

/// Whether `g` past its last sign change rises above `WITNESS_LOBE_FLOOR`
/// of its peak.
fn lobe_resolvable(g: &EigenExpansion, a: f64) -> bool {
    const SAMPLES: usize = 4000;
    let t0 = crate::radial::t_of_r(a);
    let t_end = t0 + 4.0 * g.degree() as f64 + 2.0 * g.alpha() + 40.0;
    let (mut peak, mut lobe) = (0.0f64, 0.0f64);
    for j in 0..=SAMPLES {
        let t = t_end * j as f64 / SAMPLES as f64;
        let v = g.eval_t(t);
        peak = peak.max(v.abs());
        if t > t0 {
            lobe = lobe.max(v);
        }
    }
    lobe > WITNESS_LOBE_FLOOR * peak
}

/// All norms of `f` and `f̂` that the chain needs.
struct Norms {
    dim: usize,
    f: Prepared,
    h: Prepared,
    l2_sq: f64,
    f_l1: f64,
    h_l1: f64,
}

impl Norms {
    fn new(f: &EigenExpansion) -> Result<Self> {
        f.validate()?;
        if f.trimmed().is_zero() {
            return Err(Error::ZeroFunction);
        }
        let pf = Prepared::new(f);
        let ph = Prepared::new(&f.fourier());
        let l2_sq = pf.norm_l2_sq();
        let f_l1 = pf.norm(1.0);
        let h_l1 = ph.norm(1.0);
        Ok(Self { dim: f.dim, f: pf, h: ph, l2_sq, f_l1, h_l1 })
    }

    fn ratio(&self) -> f64 {
        self.l2_sq / (self.f_l1 * self.h_l1)
    }
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

fn rel(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs) / scale
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [1, 2]")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, 1]")));
    }
    Ok(())
}

fn holder(n: &Norms, p: f64) -> f64 {
    if p == 2.0 {
        return 0.0;
    }
    rel(n.l2_sq, n.f.norm(p) * n.f.norm(conjugate(p)))
}

fn hausdorff_young(n: &Norms, p: f64) -> Result<f64> {
    if p == 2.0 {
        return Ok(rel(n.h.norm_l2_sq(), n.l2_sq));
    }
    let c = hy_constant(p, n.dim)?;
    let q = conjugate(p);
    let forward = rel(n.h.norm(q), c * n.f.norm(p));
    let backward = rel(n.f.norm(q), c * n.h.norm(p));
    Ok(forward.max(backward))
}

fn logconvexity(n: &Norms, theta: f64) -> f64 {
    let p = p_theta(theta);
    let l2 = n.l2_sq.sqrt();
    let one = |g: &Prepared, l1: f64| {
        if theta == 0.0 {
            return 0.0;
        }
        if theta == 1.0 {
            return 0.0;
        }
        rel(g.norm(p), l1.powf(1.0 - theta) * l2.powf(theta))
    };
    one(&n.f, n.f_l1).max(one(&n.h, n.h_l1))
}

fn combined(n: &Norms, theta: f64) -> Result<f64> {
    if theta == 0.0 {
        return Ok(rel(n.f_l1 * n.h_l1, n.f_l1 * n.h_l1));
    }
    let p = p_theta(theta);
    let c = c_theta(theta)?.powi(n.dim as i32);
    let (fp, hp) = if theta == 1.0 {
        (n.l2_sq.sqrt(), n.l2_sq.sqrt())
    } else {
        (n.f.norm(p), n.h.norm(p))
    };
    Ok(rel(fp * hp, c * n.f_l1 * n.h_l1))
}

/// Outcome of checking the main inequality and the proof chain at one `θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub dim: usize,
    pub ratio: f64,
    pub bound: f64,
    pub slack: f64,
    pub theta: f64,
    pub holder_residual: f64,
    pub holder_ok: bool,
    pub hy_residual: f64,
    pub hy_ok: bool,
    pub logconvex_residual: f64,
    pub logconvex_ok: bool,
    pub combined_residual: f64,
    pub combined_ok: bool,
    /// Ratio measured against the bound re-derived from the links at `θ`.
    pub chain_residual: f64,
}

impl ChainReport {
    pub fn main_ok(&self) -> bool {
        self.ratio <= self.bound * (1.0 + CHECK_TOL)
    }

    pub fn all_ok(&self) -> bool {
        self.main_ok()
            && self.holder_ok
            && self.hy_ok
            && self.logconvex_ok
            && self.combined_ok
            && self.chain_residual <= CHECK_TOL
    }

    fn main_only(n: &Norms) -> Result<Self> {
        let ratio = n.ratio();
        let bound = theorem2_constant(n.dim)?.exp();
        Ok(Self {
            dim: n.dim,
            ratio,
            bound,
            slack: bound - ratio,
            theta: 1.0,
            holder_residual: 0.0,
            holder_ok: true,
            hy_residual: 0.0,
            hy_ok: true,
            logconvex_residual: 0.0,
            logconvex_ok: true,
            combined_residual: 0.0,
            combined_ok: ratio <= bound * (1.0 + CHECK_TOL),
            chain_residual: rel(ratio, bound),
        })
    }
}

/// Ratio `‖f‖₂²/(‖f‖₁‖f̂‖₁)` against `(2/e)^{d/2}`.
pub fn verify_main(f: &EigenExpansion) -> Result<ChainReport> {
    ChainReport::main_only(&Norms::new(f)?)
}

/// `‖f‖₂² − ‖f‖_p‖f‖_{p*}`, relative.
pub fn verify_holder(f: &EigenExpansion, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(holder(&Norms::new(f)?, p))
}

/// `‖f̂‖_{p*} − C_p^d ‖f‖_p` (and the same with `f`, `f̂` swapped), relative.
pub fn verify_hausdorff_young(f: &EigenExpansion, p: f64) -> Result<f64> {
    check_p(p)?;
    hausdorff_young(&Norms::new(f)?, p)
}

/// `‖g‖_{p_θ} − ‖g‖₁^{1−θ}‖g‖₂^θ` for `g ∈ {f, f̂}`, relative.
pub fn verify_logconvexity(f: &EigenExpansion, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(logconvexity(&Norms::new(f)?, theta))
}

/// `‖f‖_{p_θ}‖f̂‖_{p_θ} − C(θ)^d ‖f‖₁‖f̂‖₁`, relative.
pub fn verify_combined(f: &EigenExpansion, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    combined(&Norms::new(f)?, theta)
}

/// Main inequality plus every link at each `θ` in `thetas`.
pub fn verify_chain(f: &EigenExpansion, thetas: &[f64]) -> Result<Vec<ChainReport>> {
    let n = Norms::new(f)?;
    let base = ChainReport::main_only(&n)?;
    let mut out = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        check_theta(theta)?;
        if theta >= 1.0 {
            out.push(base.clone());
            continue;
        }
        let p = p_theta(theta);
        let h = holder(&n, p);
        let y = hausdorff_young(&n, p)?;
        let l = logconvexity(&n, theta);
        let c = combined(&n, theta)?;
        let chain = rel(base.ratio, log_chain_bound(theta, n.dim)?.exp());
        out.push(ChainReport {
            theta,
            holder_residual: h,
            holder_ok: h <= CHECK_TOL,
            hy_residual: y,
            hy_ok: y <= CHECK_TOL,
            logconvex_residual: l,
            logconvex_ok: l <= CHECK_TOL,
            combined_residual: c,
            combined_ok: c <= CHECK_TOL && base.main_ok(),
            chain_residual: chain,
            ..base.clone()
        });
    }
    Ok(out)
}

/// Worst-case view of a chain over several `θ`.
pub fn worst_of(reports: &[ChainReport]) -> Option<ChainReport> {
    let mut it = reports.iter();
    let mut w = it.next()?.clone();
    for r in it {
        if r.holder_residual > w.holder_residual {
            w.holder_residual = r.holder_residual;
        }
        if r.hy_residual > w.hy_residual {
            w.hy_residual = r.hy_residual;
        }
        if r.logconvex_residual > w.logconvex_residual {
            w.logconvex_residual = r.logconvex_residual;
        }
        if r.combined_residual > w.combined_residual {
            w.combined_residual = r.combined_residual;
        }
        if r.chain_residual > w.chain_residual {
            w.chain_residual = r.chain_residual;
        }
        w.holder_ok &= r.holder_ok;
        w.hy_ok &= r.hy_ok;
        w.logconvex_ok &= r.logconvex_ok;
        w.combined_ok &= r.combined_ok;
    }
    Some(w)
}

/// Best ratio seen per dimension.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioLedger {
    pub best: BTreeMap<usize, LedgerEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub ratio: f64,
    pub count: u64,
    pub function: EigenExpansion,
}

impl RatioLedger {
    pub fn record(&mut self, f: &EigenExpansion, ratio: f64) {
        let e = self.best.entry(f.dim).or_insert_with(|| LedgerEntry {
            ratio,
            count: 0,
            function: f.clone(),
        });
        e.count += 1;
        if ratio > e.ratio {
            e.ratio = ratio;
            e.function = f.clone();
        }
    }

    /// Combines two ledgers; on equal ratios the receiver's function is kept.
    pub fn merge(&mut self, other: &RatioLedger) {
        for (d, o) in &other.best {
            match self.best.get_mut(d) {
                None => {
                    self.best.insert(*d, o.clone());
                }
                Some(e) => {
                    e.count += o.count;
                    if o.ratio > e.ratio {
                        e.ratio = o.ratio;
                        e.function = o.function.clone();
                    }
                }
            }
        }
    }
}

/// One verified function of a batch, written as a JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub index: u64,
    pub seed: u64,
    pub law: CoefficientLaw,
    pub function: EigenExpansion,
    pub report: ChainReport,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub dim: usize,
    pub law: CoefficientLaw,
    pub degree: usize,
    pub count: u64,
    pub failures: u64,
    pub max_ratio: f64,
    pub bound: f64,
    pub min_slack: f64,
    pub max_link_residual: f64,
}

/// Verifies `count` random functions; item `i` uses stream `i` of `seed`.
pub fn verify_batch(
    seed: u64,
    d: usize,
    degree: usize,
    count: u64,
    law: CoefficientLaw,
    thetas: &[f64],
) -> Result<(Vec<BatchRecord>, BatchSummary)> {
    let records: Vec<BatchRecord> = (0..count)
        .into_par_iter()
        .map(|i| {
            let f = random_expansion_stream(seed, i, d, degree, law)?;
            let chain = verify_chain(&f, thetas)?;
            let report = match worst_of(&chain) {
                Some(r) => r,
                None => verify_main(&f)?,
            };
            let ok = report.all_ok();
            Ok(BatchRecord { index: i, seed, law, function: f, report, ok })
        })
        .collect::<Result<_>>()?;
    let bound = theorem2_constant(d)?.exp();
    let summary = BatchSummary {
        dim: d,
        law,
        degree,
        count,
        failures: records.iter().filter(|r| !r.ok).count() as u64,
        max_ratio: records.iter().map(|r| r.report.ratio).fold(0.0, f64::max),
        bound,
        min_slack: records.iter().map(|r| r.report.slack).fold(f64::INFINITY, f64::min),
        max_link_residual: records
            .iter()
            .map(|r| {
                r.report
                    .holder_residual
                    .max(r.report.hy_residual)
                    .max(r.report.logconvex_residual)
                    .max(r.report.combined_residual)
            })
            .fold(f64::NEG_INFINITY, f64::max),
    };
    Ok((records, summary))
}

pub fn write_json_lines<W: std::io::Write>(records: &[BatchRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_summary_csv<W: std::io::Write>(rows: &[BatchSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
