//! Two-phase dense tableau simplex on `min c^T x, A x (<=,=,>=) b, x >= 0`.
//!
//! Entering variables follow Dantzig's rule (most negative reduced cost,
//! lowest index on ties) until the objective stalls for `STALL_LIMIT`
//! consecutive pivots; from then on Bland's rule is used for the rest of the
//! phase. The ratio test breaks ties by the lowest basic variable index.
//! On termination the basis is refactored with a fresh LU and primal values
//! and row duals are recomputed from it; if that exposes drift the tableau is
//! rebuilt from the basis and iteration resumes.

use super::lu::Lu;
use super::RowKind;

const STALL_LIMIT: usize = 50;
const MAX_PIVOTS: usize = 200_000;
const MAX_REFACTORS: usize = 6;
const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-11;
const POLISH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CoreStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    Singular,
}

pub(crate) struct CoreResult {
    pub status: CoreStatus,
    /// Structural variable values.
    pub x: Vec<f64>,
    /// Row duals: `c - A^T z` are the reduced costs.
    pub z: Vec<f64>,
    pub pivots: usize,
}

/// Internal standard-form problem. `a` is row-major `m x k`.
pub(crate) struct StdForm {
    pub m: usize,
    pub k: usize,
    pub a: Vec<f64>,
    pub kinds: Vec<RowKind>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    /// Number of columns excluding the right-hand side.
    ncols: usize,
    /// Row-major `m x (ncols + 1)`; the last column is the right-hand side.
    t: Vec<f64>,
    /// Reduced costs, with `-objective` in the last slot.
    obj: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Augmented original columns (after row flips), row-major `m x ncols`.
    aug: Vec<f64>,
    rhs: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn w(&self) -> usize {
        self.ncols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.w() + j]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.w();
        let p = self.t[r * w + e];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        self.t[r * w + e] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[e];
            if f != 0.0 {
                for (x, &pv) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * pv;
                }
                row[e] = 0.0;
            }
        }
        let f = self.obj[e];
        if f != 0.0 {
            for (x, &pv) in self.obj.iter_mut().zip(prow.iter()) {
                *x -= f * pv;
            }
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
        self.pivots += 1;
    }

    /// Sets the objective row for cost vector `cost` over all columns.
    fn price(&mut self, cost: &[f64]) {
        let w = self.w();
        let mut obj = vec![0.0; w];
        obj[..self.ncols].copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    obj[j] -= cb * self.t[i * w + j];
                }
            }
        }
        for &bj in &self.basis {
            obj[bj] = 0.0;
        }
        self.obj = obj;
    }

    fn objective(&self) -> f64 {
        -self.obj[self.ncols]
    }

    /// Runs pivots until optimal for the current objective row. Columns for
    /// which `allowed` is false never enter.
    fn iterate(&mut self, allowed: &dyn Fn(usize) -> bool) -> CoreStatus {
        let mut bland = false;
        let mut stall = 0usize;
        let mut last = self.objective();
        loop {
            if self.pivots > MAX_PIVOTS {
                return CoreStatus::IterationLimit;
            }
            let entering = if bland {
                (0..self.ncols).find(|&j| allowed(j) && self.obj[j] < -OPT_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.ncols {
                    let r = self.obj[j];
                    if r < -OPT_TOL && allowed(j) && best.is_none_or(|(_, b)| r < b) {
                        best = Some((j, r));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(e) = entering else {
                return CoreStatus::Optimal;
            };
            let w = self.w();
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i * w + e];
                if a > PIVOT_TOL {
                    let ratio = self.t[i * w + self.ncols].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return CoreStatus::Unbounded;
            };
            self.pivot(r, e);
            let now = self.objective();
            if now < last - 1e-12 * (1.0 + last.abs()) {
                stall = 0;
                last = now;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }
        }
    }

    fn basis_matrix(&self) -> Vec<f64> {
        let m = self.m;
        let mut bm = vec![0.0; m * m];
        for (col, &bj) in self.basis.iter().enumerate() {
            for i in 0..m {
                bm[i * m + col] = self.aug[i * self.ncols + bj];
            }
        }
        bm
    }

    /// Recomputes the tableau from the original columns and the current
    /// basis. Returns `false` if the basis is numerically singular.
    fn refactor(&mut self, cost: &[f64]) -> bool {
        let m = self.m;
        let Some(lu) = Lu::factor(self.basis_matrix(), m, 1e-13) else {
            return false;
        };
        let w = self.w();
        let mut col = vec![0.0; m];
        for j in 0..self.ncols {
            for i in 0..m {
                col[i] = self.aug[i * self.ncols + j];
            }
            let s = lu.solve(&col);
            for i in 0..m {
                self.t[i * w + j] = s[i];
            }
        }
        let s = lu.solve(&self.rhs);
        for i in 0..m {
            self.t[i * w + self.ncols] = s[i];
        }
        for (i, &bj) in self.basis.clone().iter().enumerate() {
            for r in 0..m {
                self.t[r * w + bj] = if r == i { 1.0 } else { 0.0 };
            }
        }
        self.price(cost);
        true
    }

    /// Fresh primal basic values and duals `B^{-T} c_B`.
    fn polish(&self, cost: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let lu = Lu::factor(self.basis_matrix(), self.m, 1e-13)?;
        let xb = lu.solve(&self.rhs);
        let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        let z = lu.solve_transpose(&cb);
        Some((xb, z))
    }
}

pub(crate) fn solve_std(p: &StdForm) -> CoreResult {
    let (m, k) = (p.m, p.k);
    // Flip rows so that b >= 0.
    let mut kinds = p.kinds.clone();
    let mut flip = vec![false; m];
    for i in 0..m {
        if p.b[i] < 0.0 {
            flip[i] = true;
            kinds[i] = match kinds[i] {
                RowKind::Le => RowKind::Ge,
                RowKind::Ge => RowKind::Le,
                RowKind::Eq => RowKind::Eq,
            };
        }
    }
    let n_slack = kinds.iter().filter(|k| **k != RowKind::Eq).count();
    let n_art = kinds.iter().filter(|k| **k != RowKind::Le).count();
    let ncols = k + n_slack + n_art;
    let mut col_kinds = vec![ColKind::Structural; k];
    col_kinds.extend(std::iter::repeat_n(ColKind::Slack, n_slack));
    col_kinds.extend(std::iter::repeat_n(ColKind::Artificial, n_art));

    let mut aug = vec![0.0; m * ncols];
    let mut rhs = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let (mut si, mut ai) = (k, k + n_slack);
    for i in 0..m {
        let s = if flip[i] { -1.0 } else { 1.0 };
        for j in 0..k {
            aug[i * ncols + j] = s * p.a[i * k + j];
        }
        rhs[i] = s * p.b[i];
        match kinds[i] {
            RowKind::Le => {
                aug[i * ncols + si] = 1.0;
                basis[i] = si;
                si += 1;
            }
            RowKind::Ge => {
                aug[i * ncols + si] = -1.0;
                si += 1;
                aug[i * ncols + ai] = 1.0;
                basis[i] = ai;
                ai += 1;
            }
            RowKind::Eq => {
                aug[i * ncols + ai] = 1.0;
                basis[i] = ai;
                ai += 1;
            }
        }
    }
    let w = ncols + 1;
    let mut t = vec![0.0; m * w];
    for i in 0..m {
        t[i * w..i * w + ncols].copy_from_slice(&aug[i * ncols..(i + 1) * ncols]);
        t[i * w + ncols] = rhs[i];
    }
    let mut tab = Tableau {
        m,
        ncols,
        t,
        obj: vec![0.0; w],
        basis,
        kinds: col_kinds,
        aug,
        rhs,
        pivots: 0,
    };

    let fail = |status, pivots| CoreResult {
        status,
        x: Vec::new(),
        z: Vec::new(),
        pivots,
    };

    if n_art > 0 {
        let phase1: Vec<f64> = tab
            .kinds
            .iter()
            .map(|&c| if c == ColKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        tab.price(&phase1);
        match tab.iterate(&|_| true) {
            CoreStatus::Optimal => {}
            CoreStatus::Unbounded => unreachable!("phase one is bounded below by zero"),
            s => return fail(s, tab.pivots),
        }
        let scale = 1.0 + tab.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if tab.objective() > 1e-9 * scale {
            return fail(CoreStatus::Infeasible, tab.pivots);
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if tab.kinds[tab.basis[i]] != ColKind::Artificial {
                continue;
            }
            let e = (0..ncols)
                .filter(|&j| tab.kinds[j] != ColKind::Artificial)
                .max_by(|&a, &b| {
                    tab.at(i, a)
                        .abs()
                        .total_cmp(&tab.at(i, b).abs())
                        .then(b.cmp(&a))
                });
            if let Some(e) = e.filter(|&e| tab.at(i, e).abs() > PIVOT_TOL) {
                tab.pivot(i, e);
            }
        }
    }

    let mut cost = vec![0.0; ncols];
    cost[..k].copy_from_slice(&p.c);
    tab.price(&cost);
    let kinds_snapshot = tab.kinds.clone();
    let allowed = move |j: usize| kinds_snapshot[j] != ColKind::Artificial;

    for _ in 0..MAX_REFACTORS {
        match tab.iterate(&allowed) {
            CoreStatus::Optimal => {}
            s => return fail(s, tab.pivots),
        }
        let Some((xb, z)) = tab.polish(&cost) else {
            if !tab.refactor(&cost) {
                return fail(CoreStatus::Singular, tab.pivots);
            }
            continue;
        };
        let primal_ok = tab
            .basis
            .iter()
            .zip(&xb)
            .all(|(&j, &v)| match tab.kinds[j] {
                ColKind::Artificial => v.abs() <= POLISH_TOL,
                _ => v >= -POLISH_TOL,
            });
        let dual_ok = (0..ncols).all(|j| {
            if tab.kinds[j] == ColKind::Artificial {
                return true;
            }
            let rc = cost[j] - (0..m).map(|i| tab.aug[i * ncols + j] * z[i]).sum::<f64>();
            rc >= -POLISH_TOL
        });
        if primal_ok && dual_ok {
            let mut x = vec![0.0; k];
            for (&j, &v) in tab.basis.iter().zip(&xb) {
                if j < k {
                    x[j] = v.max(0.0);
                }
            }
            let z = z
                .iter()
                .zip(&flip)
                .map(|(&v, &f)| if f { -v } else { v })
                .collect();
            return CoreResult {
                status: CoreStatus::Optimal,
                x,
                z,
                pivots: tab.pivots,
            };
        }
        if !tab.refactor(&cost) {
            return fail(CoreStatus::Singular, tab.pivots);
        }
    }
    fail(CoreStatus::IterationLimit, tab.pivots)
}
