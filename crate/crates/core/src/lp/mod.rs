//! Desk-scale Cohn–Elkies linear program over the truncated eigenbasis.
//!
//! With orthonormal coefficients `b` the conditions at a radius `r₀` read
//! `f(0) = 1`, `f(0) = f̂(0)`, `f(t) ≤ 0` for `t ≥ t₀` and `f̂(t) ≥ 0`, where
//! `t = 2πr²`. Every inequality row is scaled to unit norm and relaxed by a
//! common slack `s`; the program minimizes `s` and is feasible when the
//! optimum is not positive. It is solved through its dual, whose columns are
//! the constraint rows, so cutting planes become warm-started column additions.

pub mod simplex;

use crate::bounds::{a_lower, delta_lp_lower, log_density};
use crate::numerics::laguerre::{normalized_row, norm_factors, orthonormal_series, orthonormal_values};
use crate::radial::{r_of_t, rule_for, t_of_r, EigenExpansion};
use crate::sign::last_sign_change;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use simplex::Simplex;

/// Tuning knobs of the program.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpOptions {
    /// Chebyshev radii on `[0, R_max]`.
    pub grid_density: usize,
    /// Cutting-plane rounds after the first solve.
    pub max_rounds: usize,
    /// Largest optimal slack still counted as feasible.
    pub feasibility_tol: f64,
    /// Relative tolerance of the certificate checks, in units of `f(0)`.
    pub validation_tol: f64,
    /// Density factor of the independent validation grid.
    pub refinement: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            grid_density: 600,
            max_rounds: 60,
            feasibility_tol: 1e-12,
            validation_tol: 1e-9,
            refinement: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    FeasibleOnly,
}

/// Worst violation of each constraint class, relative to `f(0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `|f(0) − f̂(0)| / f(0)`.
    pub origin: f64,
    /// `max f(r)/f(0)` over check radii `r ≥ r*`, clipped at zero.
    pub tail: f64,
    /// `max −f̂(r)/f(0)` over all check radii, clipped at zero.
    pub transform: f64,
    /// Optimal slack of the final program, in row-normalized units.
    pub lp_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpCertificate {
    pub dim: usize,
    pub degree: usize,
    pub r_star: f64,
    /// `a₀..a_N` of `f = Σ a_k ψ_k`, scaled so that `f(0) = 1`.
    pub coeffs: Vec<f64>,
    pub density_bound: f64,
    pub log_density_bound: f64,
    /// Radii carrying constraints in the final program.
    pub grid: Vec<f64>,
    pub residuals: Residuals,
    pub status: Status,
}

impl LpCertificate {
    pub fn expansion(&self) -> EigenExpansion {
        EigenExpansion { dim: self.dim, coeffs: self.coeffs.clone(), resolution: 0.0 }
    }

    /// The `−1` eigenfunction `g = f̂ − f`.
    pub fn minus_eigenfunction(&self) -> EigenExpansion {
        let f = self.expansion();
        f.fourier().add_scaled(-1.0, &f).expect("same dimension")
    }

    pub fn log_floor(&self) -> f64 {
        delta_lp_lower(self.dim).unwrap_or(f64::NEG_INFINITY)
    }
}

/// `t` beyond which every basis function of degree `< n` is past its
/// oscillatory region.
fn oscillation_end(n: usize, alpha: f64) -> f64 {
    let n = n as f64;
    4.0 * n + 2.0 * alpha + 2.0 + 8.0 * n.sqrt() + 20.0
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    /// `f(t) ≤ s`.
    Tail,
    /// `−f̂(t) ≤ s`.
    Transform,
    /// `−b_M ≤ s`.
    Leading,
}

struct Program {
    dim: usize,
    alpha: f64,
    /// Number of free coefficients; the top one has odd index.
    nb: usize,
    t0: f64,
    rows: Vec<(Kind, f64)>,
    eq: [Vec<f64>; 2],
    eq_rhs: [f64; 2],
}

fn sigma(k: usize) -> f64 {
    if k % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

impl Program {
    fn new(dim: usize, degree: usize, r0: f64, opts: &LpOptions) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if degree < 2 {
            return Err(Error::Domain("the program needs degree at least 2".into()));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Domain(format!("radius {r0} must be positive")));
        }
        let alpha = dim as f64 / 2.0 - 1.0;
        // at even degree the tail and transform sign conditions force b_N = 0
        let top = if degree % 2 == 1 { degree } else { degree - 1 };
        let nb = top + 1;
        let t0 = t_of_r(r0);
        let mut q0 = vec![0.0; nb];
        orthonormal_values(alpha, 0.0, &mut q0);
        let e1 = q0.clone();
        let e2: Vec<f64> = q0.iter().enumerate().map(|(k, q)| (1.0 - sigma(k)) * q).collect();
        let n1 = e1.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n2 = e2.iter().map(|x| x * x).sum::<f64>().sqrt();
        let eq = [e1.iter().map(|x| x / n1).collect(), e2.iter().map(|x| x / n2).collect()];
        let eq_rhs = [1.0 / n1, 0.0];

        let t_max = oscillation_end(nb, alpha);
        let r_max = r_of_t(t_max);
        let k = opts.grid_density.max(8);
        let mut ts: Vec<f64> = (0..k)
            .map(|j| {
                let r = 0.5 * r_max * (1.0 - (std::f64::consts::PI * j as f64 / (k - 1) as f64).cos());
                t_of_r(r)
            })
            .collect();
        let rule = rule_for(dim, 2 * nb)?;
        ts.extend(rule.nodes().iter().copied().filter(|&t| t <= 2.0 * t_max));
        ts.push(t0);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut rows: Vec<(Kind, f64)> = Vec::with_capacity(2 * ts.len() + 1);
        rows.extend(ts.iter().filter(|&&t| t >= t0).map(|&t| (Kind::Tail, t)));
        rows.extend(ts.iter().map(|&t| (Kind::Transform, t)));
        rows.push((Kind::Leading, f64::INFINITY));
        Ok(Self { dim, alpha, nb, t0, rows, eq, eq_rhs })
    }

    fn row(&self, kind: Kind, t: f64) -> Vec<f64> {
        match kind {
            Kind::Leading => {
                let mut r = vec![0.0; self.nb];
                r[self.nb - 1] = -1.0;
                r
            }
            Kind::Tail => normalized_row(self.alpha, t, self.nb).0,
            Kind::Transform => {
                let (mut r, _) = normalized_row(self.alpha, t, self.nb);
                for (k, x) in r.iter_mut().enumerate() {
                    *x *= -sigma(k);
                }
                r
            }
        }
    }

    /// Dual column of an inequality row: `(g_i, 1)`.
    fn column(&self, kind: Kind, t: f64) -> Vec<f64> {
        let mut c = self.row(kind, t);
        c.push(1.0);
        c
    }

    fn simplex(&self) -> Result<Simplex> {
        let mut cols = Vec::with_capacity(self.rows.len() + 4);
        let mut cost = Vec::with_capacity(self.rows.len() + 4);
        for &(kind, t) in &self.rows {
            cols.push(self.column(kind, t));
            cost.push(0.0);
        }
        for j in 0..2 {
            let mut plus: Vec<f64> = self.eq[j].iter().map(|x| -x).collect();
            plus.push(0.0);
            let mut minus = self.eq[j].clone();
            minus.push(0.0);
            cols.push(plus);
            cost.push(self.eq_rhs[j]);
            cols.push(minus);
            cost.push(-self.eq_rhs[j]);
        }
        let mut rhs = vec![0.0; self.nb + 1];
        rhs[self.nb] = 1.0;
        Simplex::new(cols, cost, rhs)
    }

    /// Primal point from the dual multipliers.
    fn primal(&self, duals: &[f64]) -> Vec<f64> {
        duals[..self.nb].iter().map(|x| -x).collect()
    }

    fn slack_of(&self, b: &[f64], kind: Kind, t: f64) -> f64 {
        self.row(kind, t).iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn max_slack(&self, b: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|&(k, t)| self.slack_of(b, k, t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Points where a continuum constraint is violated beyond `level`.
    fn violations(&self, b: &[f64], level: f64) -> Vec<(Kind, f64)> {
        let t_scan = 2.0 * oscillation_end(self.nb, self.alpha).max(self.t0);
        let u_max = t_scan.sqrt();
        let samples = 6000;
        let h = u_max / samples as f64;
        let mut out = Vec::new();
        for kind in [Kind::Tail, Kind::Transform] {
            let u_lo = if kind == Kind::Tail { self.t0.sqrt() } else { 0.0 };
            let v = |u: f64| self.slack_of(b, kind, u * u);
            let us: Vec<f64> = std::iter::once(u_lo)
                .chain((0..=samples).map(|i| i as f64 * h).filter(|&u| u > u_lo))
                .collect();
            let vals: Vec<f64> = us.iter().map(|&u| v(u)).collect();
            for i in 0..us.len() {
                let left = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
                let right = vals.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
                // near-tangential dips hide between samples, so refine every local max
                if vals[i] >= left && vals[i] >= right {
                    let a = if i > 0 { us[i - 1] } else { us[i] };
                    let c = us.get(i + 1).copied().unwrap_or(us[i]);
                    let u = golden_argmax(&v, a, c);
                    let u = if v(u) >= vals[i] { u } else { us[i] };
                    out.push((kind, u * u));
                }
            }
        }
        // worst point of every wrong-signed interval between exact sign changes
        let a = self.coefficients(b);
        for (kind, series) in [
            (Kind::Tail, EigenExpansion { dim: self.dim, coeffs: a.clone(), resolution: 0.0 }),
            (Kind::Transform, EigenExpansion { dim: self.dim, coeffs: a, resolution: 0.0 }.fourier()),
        ] {
            let from = if kind == Kind::Tail { self.t0 } else { 0.0 };
            let (roots, tail) = series.polynomial().sign_changes_with_tail();
            let mut cuts: Vec<f64> = std::iter::once(from).chain(roots.into_iter().filter(|&t| t > from)).collect();
            cuts.push(2.0 * tail.max(from).max(t_scan) + 50.0);
            let v = |u: f64| self.slack_of(b, kind, u * u);
            for w in cuts.windows(2) {
                let (lo, hi) = (w[0].sqrt(), w[1].sqrt());
                let mid = 0.5 * (lo + hi);
                if v(mid) > 0.0 {
                    out.push((kind, golden_argmax(&v, lo, hi).powi(2)));
                    out.push((kind, mid * mid));
                }
            }
        }
        out.retain(|&(k, t)| self.slack_of(b, k, t) > level);
        out
    }

    /// `a_k = b_k / h_k`, padded to the requested degree later.
    fn coefficients(&self, b: &[f64]) -> Vec<f64> {
        let h = norm_factors(self.nb, self.alpha);
        b.iter().zip(&h).map(|(x, h)| x / h).collect()
    }
}

fn golden_argmax<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.618_033_988_749_894_8;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if b - a <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        c
    } else {
        d
    }
}

/// A feasible dual objective above this proves the slack positive.
const INFEASIBLE_CUTOFF: f64 = 1e-9;

struct Solved {
    b: Vec<f64>,
    slack: f64,
}

fn solve_program(p: &mut Program, opts: &LpOptions) -> Result<Solved> {
    let mut lp = p.simplex()?;
    lp.set_cutoff(opts.feasibility_tol.max(INFEASIBLE_CUTOFF));
    let mut round = 0;
    loop {
        let sol = lp.solve()?;
        if sol.cut_off {
            return Ok(Solved { b: p.primal(&sol.duals), slack: sol.objective });
        }
        let b = p.primal(&sol.duals);
        let slack = p.max_slack(&b);
        let level = slack.max(0.0) + 1e-13;
        if round >= opts.max_rounds || slack > 1e-6 {
            return Ok(Solved { b, slack });
        }
        let cuts = p.violations(&b, level);
        if cuts.is_empty() {
            return Ok(Solved { b, slack });
        }
        let cols: Vec<Vec<f64>> = cuts.iter().map(|&(k, t)| p.column(k, t)).collect();
        let n = cols.len();
        lp.add_columns(cols, vec![0.0; n])?;
        p.rows.extend(cuts);
        round += 1;
    }
}

/// Values of `f` and `f̂` at `t` from orthonormal coefficients.
fn f_and_hat(b: &[f64], alpha: f64, t: f64) -> (f64, f64) {
    let bh: Vec<f64> = b.iter().enumerate().map(|(k, x)| sigma(k) * x).collect();
    (orthonormal_series(b, alpha, t), orthonormal_series(&bh, alpha, t))
}

fn residuals_on(b: &[f64], alpha: f64, t0: f64, ts: &[f64], lp_slack: f64) -> Residuals {
    let (f0, h0) = f_and_hat(b, alpha, 0.0);
    let mut tail = 0.0f64;
    let mut transform = 0.0f64;
    for &t in ts {
        let (f, h) = f_and_hat(b, alpha, t);
        if t >= t0 {
            tail = tail.max(f / f0);
        }
        transform = transform.max(-h / f0);
    }
    Residuals { origin: ((f0 - h0) / f0).abs(), tail, transform, lp_slack }
}

/// Uniform radii on `[0, r_hi]`, independent of the solve grid.
fn validation_grid(r_hi: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| t_of_r(r_hi * i as f64 / count as f64)).collect()
}

/// Solves the program at `r0`; `None` when it is infeasible.
pub fn feasible_at(r0: f64, d: usize, n: usize, opts: &LpOptions) -> Result<Option<LpCertificate>> {
    let mut p = Program::new(d, n, r0, opts)?;
    let solved = solve_program(&mut p, opts)?;
    if !(solved.slack <= opts.feasibility_tol) {
        return Ok(None);
    }
    let b = solved.b;
    let (f0, _) = f_and_hat(&b, p.alpha, 0.0);
    if !(f0 > 0.0) {
        return Err(Error::Solver(format!("recovered f(0) = {f0} is not positive")));
    }
    let b: Vec<f64> = b.iter().map(|x| x / f0).collect();
    let mut coeffs = p.coefficients(&b);
    coeffs.resize(n + 1, 0.0);

    let mut grid_t: Vec<f64> = p.rows.iter().filter(|r| r.0 != Kind::Leading).map(|r| r.1).collect();
    grid_t.sort_by(f64::total_cmp);
    grid_t.dedup();
    let r_hi = 1.5 * r_of_t(*grid_t.last().unwrap_or(&1.0));
    let check = validation_grid(r_hi, opts.refinement.max(1) * grid_t.len());
    let residuals = residuals_on(&b, p.alpha, p.t0, &check, solved.slack);
    let log_density_bound = log_density(d, r0)?;
    let tol = opts.validation_tol;
    let valid = residuals.origin <= tol
        && residuals.tail <= tol
        && residuals.transform <= tol
        && log_density_bound >= delta_lp_lower(d)? - 1e-9;
    Ok(Some(LpCertificate {
        dim: d,
        degree: n,
        r_star: r0,
        coeffs,
        density_bound: log_density_bound.exp(),
        log_density_bound,
        grid: grid_t.iter().map(|&t| r_of_t(t)).collect(),
        residuals,
        status: if valid { Status::Optimal } else { Status::FeasibleOnly },
    }))
}

/// Bisection on `r₀` between `a_lower(d)/2` and `2√d` down to a bracket of
/// width `tol`; returns the certificate at the feasible end.
pub fn minimal_r(d: usize, n: usize, tol: f64, opts: &LpOptions) -> Result<LpCertificate> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let mut lo = a_lower(d)? / 2.0;
    let mut hi = 2.0 * (d as f64).sqrt();
    let mut cert = None;
    for _ in 0..4 {
        cert = feasible_at(hi, d, n, opts)?;
        if cert.is_some() {
            break;
        }
        hi *= 2.0;
    }
    let Some(mut best) = cert else {
        return Err(Error::Bracket { lower: lo, lower_feasible: false, upper: hi, upper_feasible: false });
    };
    if feasible_at(lo, d, n, opts)?.is_some() {
        return Err(Error::Bracket { lower: lo, lower_feasible: true, upper: hi, upper_feasible: true });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match feasible_at(mid, d, n, opts)? {
            Some(c) => {
                hi = mid;
                best = c;
            }
            None => lo = mid,
        }
    }
    Ok(best)
}

/// Independent re-check of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub refinement: usize,
    /// Residuals on a grid `refinement` times denser than the certificate's.
    pub grid: Residuals,
    /// Largest `f/f(0)` beyond `r*` located through the sign changes of `f`.
    pub exact_tail: f64,
    /// Largest `−f̂/f(0)` located through the sign changes of `f̂`.
    pub exact_transform: f64,
    pub f_eventually_nonpositive: bool,
    pub transform_eventually_nonnegative: bool,
    /// `A(f̂ − f)`, infinite if that function is not eventually nonnegative.
    #[serde(with = "crate::lp::opt_inf")]
    pub g_a_radius: f64,
    pub floor_ok: bool,
    pub ok: bool,
}

pub(crate) mod opt_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(a: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if a.is_finite() {
            s.serialize_some(a)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Largest value of `sign·F` on the pieces of `[from, ∞)` cut at the sign
/// changes of `F`.
fn exact_excess(e: &EigenExpansion, from_t: f64, sign: f64) -> f64 {
    let p = e.polynomial();
    let b = e.orthonormal_coeffs();
    let alpha = e.alpha();
    let (roots, tail) = p.sign_changes_with_tail();
    let mut cuts: Vec<f64> = std::iter::once(from_t)
        .chain(roots.into_iter().filter(|&t| t > from_t))
        .collect();
    cuts.push(tail.max(from_t) * 2.0 + 50.0);
    let v = |u: f64| sign * orthonormal_series(&b, alpha, u * u);
    let mut worst = 0.0f64;
    for w in cuts.windows(2) {
        let (a, c) = (w[0].sqrt(), w[1].sqrt());
        let k = 64;
        let mut best_u = a;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=k {
            let u = a + (c - a) * i as f64 / k as f64;
            let x = v(u);
            if x > best {
                best = x;
                best_u = u;
            }
        }
        let step = (c - a) / k as f64;
        let u = golden_argmax(&v, (best_u - step).max(a), (best_u + step).min(c));
        worst = worst.max(best.max(v(u)));
    }
    worst
}

pub fn audit(cert: &LpCertificate, refinement: usize) -> Result<AuditReport> {
    let f = cert.expansion();
    f.validate()?;
    let alpha = f.alpha();
    let b = f.orthonormal_coeffs();
    let t_star = t_of_r(cert.r_star);
    let r_hi = 1.5 * cert.grid.iter().fold(cert.r_star, |m, &r| m.max(r));
    let check = validation_grid(r_hi, refinement.max(1) * cert.grid.len().max(1));
    let grid = residuals_on(&b, alpha, t_star, &check, cert.residuals.lp_slack);
    let f0 = f.value_at_zero();
    let exact_tail = exact_excess(&f, t_star, 1.0) / f0;
    let exact_transform = exact_excess(&f.fourier(), 0.0, -1.0) / f0;
    let f_eventually_nonpositive = f.trimmed().polynomial().sign_at_infinity() <= 0.0;
    let transform_eventually_nonnegative = f.fourier().trimmed().polynomial().sign_at_infinity() >= 0.0;
    let g = cert.minus_eigenfunction();
    let g_a_radius = last_sign_change(&g)?.a_radius;
    let floor_ok = cert.log_density_bound >= delta_lp_lower(cert.dim)? - 1e-9;
    let tol = 1e-9;
    let ok = grid.origin <= tol
        && grid.tail <= tol
        && grid.transform <= tol
        && exact_tail <= tol
        && exact_transform <= tol
        && f_eventually_nonpositive
        && transform_eventually_nonnegative
        && g_a_radius <= cert.r_star + 1e-9
        && floor_ok;
    Ok(AuditReport {
        refinement,
        grid,
        exact_tail,
        exact_transform,
        f_eventually_nonpositive,
        transform_eventually_nonnegative,
        g_a_radius,
        floor_ok,
        ok,
    })
}

/// Summary row `(d, N, r*, density, floor, slack)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dim: usize,
    pub degree: usize,
    pub r_star: f64,
    pub density_bound: f64,
    pub floor: f64,
    pub slack: f64,
    pub status: Status,
}

impl From<&LpCertificate> for SummaryRow {
    fn from(c: &LpCertificate) -> Self {
        let floor = c.log_floor().exp();
        Self {
            dim: c.dim,
            degree: c.degree,
            r_star: c.r_star,
            density_bound: c.density_bound,
            floor,
            slack: c.density_bound - floor,
            status: c.status,
        }
    }
}

pub fn write_summary_csv<W: std::io::Write>(certs: &[LpCertificate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in certs {
        w.serialize(SummaryRow::from(c))?;
    }
    w.flush()?;
    Ok(())
}
