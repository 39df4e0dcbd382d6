//! Dense revised simplex for `max cᵀz` subject to `Mz = r`, `z ≥ 0`.
//!
//! The basis inverse is kept explicitly and refactorized periodically.
//! Pricing is Dantzig's rule, falling back to Bland's rule for the rest of
//! the solve after a run of pivots that do not improve the objective.
//! Columns can be added after a solve and the problem re-optimized from the
//! previous basis. An optional cutoff stops phase II once the objective of
//! the current feasible basis exceeds it.

use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN: usize = 40;
/// Objective gain below which a pivot counts as stalled.
const STALL_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone)]
pub struct Solution {
    pub objective: f64,
    /// Primal values of the original columns.
    pub z: Vec<f64>,
    /// Simplex multipliers `c_Bᵀ B⁻¹` in the original row orientation.
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// Stopped at the cutoff; `objective` is then only a lower bound.
    pub cut_off: bool,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    m: usize,
    /// Columns after row flips; artificials are the last `m` entries of
    /// `artificial` and are never priced in phase II.
    cols: Vec<Vec<f64>>,
    cost: Vec<f64>,
    artificial: Vec<bool>,
    rhs: Vec<f64>,
    flip: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    solved: bool,
    cutoff: Option<f64>,
    cut_off: bool,
}

impl Simplex {
    /// `columns[j]` is column `j` of `M`, of length `rhs.len()`.
    pub fn new(columns: Vec<Vec<f64>>, cost: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let m = rhs.len();
        if columns.len() != cost.len() {
            return Err(Error::Mismatch("one cost per column required".into()));
        }
        if columns.iter().any(|c| c.len() != m) {
            return Err(Error::Mismatch("column length differs from the row count".into()));
        }
        let flip: Vec<f64> = rhs.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let mut s = Self {
            m,
            cols: Vec::with_capacity(columns.len() + m),
            cost: Vec::with_capacity(columns.len() + m),
            artificial: Vec::with_capacity(columns.len() + m),
            rhs: rhs.iter().zip(&flip).map(|(v, f)| v * f).collect(),
            flip,
            basis: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            iterations: 0,
            cutoff: None,
            cut_off: false,
            solved: false,
        };
        for (c, w) in columns.into_iter().zip(cost) {
            s.push_column(c, w, false);
        }
        Ok(s)
    }

    fn push_column(&mut self, mut c: Vec<f64>, w: f64, artificial: bool) {
        for (x, f) in c.iter_mut().zip(&self.flip) {
            *x *= f;
        }
        self.cols.push(c);
        self.cost.push(w);
        self.artificial.push(artificial);
    }

    /// Appends columns; a later [`Simplex::solve`] warm-starts.
    pub fn add_columns(&mut self, columns: Vec<Vec<f64>>, cost: Vec<f64>) -> Result<()> {
        if columns.len() != cost.len() || columns.iter().any(|c| c.len() != self.m) {
            return Err(Error::Mismatch("malformed column block".into()));
        }
        for (c, w) in columns.into_iter().zip(cost) {
            self.push_column(c, w, false);
        }
        Ok(())
    }

    /// Stops phase II as soon as the objective exceeds `c`.
    pub fn set_cutoff(&mut self, c: f64) {
        self.cutoff = Some(c);
    }

    pub fn solve(&mut self) -> Result<Solution> {
        if !self.solved {
            self.phase_one()?;
            self.solved = true;
        }
        let cost = self.cost.clone();
        self.cut_off = false;
        self.optimize(&cost, false)?;
        Ok(self.solution())
    }

    fn phase_one(&mut self) -> Result<()> {
        let m = self.m;
        let first_art = self.cols.len();
        for i in 0..m {
            let mut e = vec![0.0; m];
            e[i] = self.flip[i];
            self.push_column(e, 0.0, true);
        }
        self.basis = (first_art..first_art + m).collect();
        self.refactor()?;
        let cost: Vec<f64> = self.artificial.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        self.optimize(&cost, true)?;
        let infeas: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&j, _)| self.artificial[j])
            .map(|(_, &x)| x)
            .sum();
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if infeas > 1e-9 * scale {
            return Err(Error::Solver(format!("no feasible point: phase one residual {infeas:e}")));
        }
        self.drive_out_artificials()
    }

    /// Pivots zero-level artificials out of the basis where a real column
    /// allows it; the rest sit on redundant rows.
    fn drive_out_artificials(&mut self) -> Result<()> {
        for r in 0..self.m {
            if !self.artificial[self.basis[r]] {
                continue;
            }
            let row = &self.binv[r * self.m..(r + 1) * self.m];
            let mut best: Option<(usize, f64)> = None;
            for (j, c) in self.cols.iter().enumerate() {
                if self.artificial[j] || self.basis.contains(&j) {
                    continue;
                }
                let v: f64 = row.iter().zip(c).map(|(a, b)| a * b).sum();
                if v.abs() > best.map_or(1e-9, |b| b.1.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                let w = self.ftran(j);
                self.pivot(r, j, &w);
            }
        }
        Ok(())
    }

    fn optimize(&mut self, cost: &[f64], phase_one: bool) -> Result<()> {
        let m = self.m;
        let mut degenerate = 0usize;
        let mut best_obj = f64::NEG_INFINITY;
        let mut since_refactor = 0usize;
        let mut in_basis = vec![false; self.cols.len()];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(Error::Solver(format!("iteration limit {MAX_ITERATIONS} reached")));
            }
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
            if !phase_one && self.cutoff.is_some_and(|c| self.objective(cost) > c) {
                self.cut_off = true;
                return Ok(());
            }
            let mut pi = vec![0.0; m];
            for (i, &j) in self.basis.iter().enumerate() {
                let cb = cost[j];
                if cb != 0.0 {
                    let row = &self.binv[i * m..(i + 1) * m];
                    for (p, b) in pi.iter_mut().zip(row) {
                        *p += cb * b;
                    }
                }
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering: Option<(usize, f64)> = None;
            for (j, c) in self.cols.iter().enumerate() {
                if in_basis[j] || (!phase_one && self.artificial[j]) {
                    continue;
                }
                let scale = 1.0 + c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let d = cost[j] - pi.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
                if d <= COST_TOL * scale {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.map_or(true, |(_, best)| d / scale > best) {
                    entering = Some((j, d / scale));
                }
            }
            let Some((j, _)) = entering else {
                return Ok(());
            };
            let w = self.ftran(j);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if w[i] > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / w[i];
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            if ratio < best - 1e-12 * (1.0 + best) {
                                true
                            } else if ratio <= best + 1e-12 * (1.0 + best) {
                                if bland {
                                    self.basis[i] < self.basis[l]
                                } else {
                                    w[i] > w[l]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, step)) = leave else {
                return Err(Error::Solver("objective unbounded".into()));
            };
            in_basis[self.basis[r]] = false;
            in_basis[j] = true;
            self.pivot(r, j, &w);
            let obj = self.objective(cost);
            if step > 1e-14 && obj > best_obj + STALL_TOL * (1.0 + obj.abs()) {
                best_obj = obj;
                if !bland {
                    degenerate = 0;
                }
            } else {
                degenerate += 1;
            }
            self.iterations += 1;
            since_refactor += 1;
        }
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis.iter().zip(&self.xb).map(|(&b, x)| cost[b] * x).sum()
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let c = &self.cols[j];
        (0..m)
            .map(|i| self.binv[i * m..(i + 1) * m].iter().zip(c).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn pivot(&mut self, r: usize, j: usize, w: &[f64]) {
        let m = self.m;
        let wr = w[r];
        for k in 0..m {
            self.binv[r * m + k] /= wr;
        }
        self.xb[r] /= wr;
        for i in 0..m {
            if i == r || w[i] == 0.0 {
                continue;
            }
            let f = w[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[r * m + k];
            }
            self.xb[i] -= f * self.xb[r];
        }
        self.basis[r] = j;
    }

    /// Recomputes `B⁻¹` and `x_B` from scratch by Gauss–Jordan elimination.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                a[i * m + k] = self.cols[j][i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let p = (col..m)
                .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
                .expect("nonempty");
            if a[p * m + col].abs() < 1e-14 {
                return Err(Error::Solver("singular basis".into()));
            }
            if p != col {
                for k in 0..m {
                    a.swap(p * m + k, col * m + k);
                    inv.swap(p * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = a[i * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[i * m + k] -= f * a[col * m + k];
                    inv[i * m + k] -= f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;
        self.xb = (0..m)
            .map(|i| {
                self.binv[i * m..(i + 1) * m]
                    .iter()
                    .zip(&self.rhs)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect();
        Ok(())
    }

    fn solution(&mut self) -> Solution {
        let _ = self.refactor();
        let m = self.m;
        let n_real = self.artificial.iter().filter(|&&a| !a).count();
        let mut z = vec![0.0; n_real];
        // real columns keep their original indices: artificials are appended
        // after the first solve's columns, later columns after them
        let mut real_index = Vec::with_capacity(self.cols.len());
        let mut k = 0;
        for &a in &self.artificial {
            if a {
                real_index.push(usize::MAX);
            } else {
                real_index.push(k);
                k += 1;
            }
        }
        for (i, &j) in self.basis.iter().enumerate() {
            if !self.artificial[j] {
                z[real_index[j]] = self.xb[i].max(0.0);
            }
        }
        let mut duals = vec![0.0; m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = self.cost[j];
            if cb != 0.0 {
                for (p, b) in duals.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *p += cb * b;
                }
            }
        }
        for (p, f) in duals.iter_mut().zip(&self.flip) {
            *p *= f;
        }
        let objective = self
            .basis
            .iter()
            .zip(&self.xb)
            .map(|(&j, &x)| self.cost[j] * x)
            .sum();
        Solution { objective, z, duals, iterations: self.iterations, cut_off: self.cut_off }
    }
}
