//! Dense linear programming with duality certificates.
//!
//! Problems are stated with sparse rows, per-variable bounds and a sense.
//! They are reduced to `min c^T x, A x (<=,=,>=) b, x >= 0` and handed to a
//! two-phase tableau simplex. When the reduced problem has more rows than
//! columns the solver works on its LP dual instead (the tableau is then
//! `columns x rows` rather than `rows x columns`) and reads the primal
//! solution off the dual's multipliers. Either way, every optimal answer is
//! re-checked against the original problem by [`LpProblem::certify`], which
//! recomputes feasibility residuals, reduced costs, the dual objective and
//! the duality gap from scratch.

mod lu;
mod simplex;
mod vertices;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tol::tau_lp;
use simplex::{solve_std, CoreStatus, StdForm};

pub use vertices::polytope_vertices;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Le,
    Eq,
    Ge,
}

/// One constraint `sum coeffs (kind) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

/// Which problem the simplex tableau is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Pick the smaller tableau.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("row {row} references variable {var} but the problem has {n} variables")]
    DimensionMismatch { row: usize, var: usize, n: usize },
    #[error("NaN in problem data ({0})")]
    NotANumber(&'static str),
    #[error("simplex exceeded its pivot budget")]
    IterationLimit,
    #[error("basis became numerically singular")]
    Singular,
    #[error("certificate check failed: gap {gap:e}, primal residual {primal_residual:e}, dual residual {dual_residual:e}")]
    CertificateFailed {
        gap: f64,
        primal_residual: f64,
        dual_residual: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Residuals of a primal/dual pair, recomputed against the original problem.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Certificate {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub complementarity: f64,
}

impl Certificate {
    /// Whether the pair proves optimality at tolerance `tau`.
    pub fn holds(&self, tau: f64) -> bool {
        self.primal_residual <= tau
            && self.dual_residual <= tau
            && self.gap <= tau * (1.0 + self.primal_objective.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value (in the problem's own sense). NaN unless optimal.
    pub objective: f64,
    pub primal: Vec<f64>,
    /// One multiplier per row; `c - A^T y` are the reduced costs.
    pub dual: Vec<f64>,
    pub certificate: Certificate,
    pub pivots: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, pivots: usize) -> Self {
        Self {
            status,
            objective: f64::NAN,
            primal: Vec::new(),
            dual: Vec::new(),
            certificate: Certificate::default(),
            pivots,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = l + x'`
    Shift {
        col: usize,
        l: f64,
    },
    /// `x = u - x'`
    Neg {
        col: usize,
        u: f64,
    },
    /// `x = x+ - x-`
    Split {
        pos: usize,
        neg: usize,
    },
    Fixed(f64),
}

impl LpProblem {
    /// A problem over `objective.len()` variables, all with bounds `[0, inf)`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            rows: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    /// Makes every variable free.
    pub fn all_free(mut self) -> Self {
        self.lower.fill(f64::NEG_INFINITY);
        self.upper.fill(f64::INFINITY);
        self
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, kind: RowKind, rhs: f64) -> &mut Self {
        self.rows.push(Row { coeffs, kind, rhs });
        self
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::DimensionMismatch {
                row: usize::MAX,
                var: self.lower.len(),
                n,
            });
        }
        if self.objective.iter().any(|v| v.is_nan()) {
            return Err(LpError::NotANumber("objective"));
        }
        if self.lower.iter().chain(&self.upper).any(|v| v.is_nan()) {
            return Err(LpError::NotANumber("bounds"));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.rhs.is_nan() || row.coeffs.iter().any(|(_, a)| a.is_nan()) {
                return Err(LpError::NotANumber("constraint"));
            }
            if let Some(&(var, _)) = row.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(LpError::DimensionMismatch { row: r, var, n });
            }
        }
        Ok(())
    }

    /// Solves with automatic orientation.
    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.solve_with(Orientation::Auto)
    }

    pub fn solve_with(&self, orientation: Orientation) -> Result<LpSolution, LpError> {
        self.check()?;
        let n = self.num_vars();
        if (0..n).any(|j| self.lower[j] > self.upper[j]) {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, 0));
        }
        let (std, map) = self.standard_form();
        let prefer_dual = match orientation {
            Orientation::Auto => std.m > std.k,
            Orientation::Primal => false,
            Orientation::Dual => true,
        };
        let tau = tau_lp();
        let first = self.run(&std, &map, prefer_dual)?;
        match &first {
            Some(sol) if sol.status != LpStatus::Optimal || sol.certificate.holds(tau) => {
                return Ok(sol.clone());
            }
            _ => {}
        }
        if orientation != Orientation::Auto {
            if let Some(first) = first {
                return Err(certificate_error(&first.certificate));
            }
        }
        // Ambiguous dual status or failed certificate: try the other side.
        let second = self.run(&std, &map, !prefer_dual)?;
        match second {
            Some(sol) if sol.status != LpStatus::Optimal || sol.certificate.holds(tau) => Ok(sol),
            Some(sol) => Err(certificate_error(&sol.certificate)),
            None => Err(LpError::IterationLimit),
        }
    }

    /// Returns `None` when the dual orientation cannot tell infeasible from
    /// unbounded.
    fn run(
        &self,
        std: &StdForm,
        map: &[VarMap],
        dual: bool,
    ) -> Result<Option<LpSolution>, LpError> {
        let (status, x_int, z_int, pivots) = if dual {
            let (d, cols) = dualize(std);
            let r = solve_std(&d);
            match r.status {
                CoreStatus::Optimal => {
                    let x: Vec<f64> = r.z.iter().map(|v| (-v).max(0.0)).collect();
                    let mut z = vec![0.0; std.m];
                    for (c, &(row, sign)) in cols.iter().enumerate() {
                        z[row] += sign * r.x[c];
                    }
                    (CoreStatus::Optimal, x, z, r.pivots)
                }
                CoreStatus::Unbounded => (CoreStatus::Infeasible, vec![], vec![], r.pivots),
                CoreStatus::Infeasible => return Ok(None),
                s => (s, vec![], vec![], r.pivots),
            }
        } else {
            let r = solve_std(std);
            (r.status, r.x, r.z, r.pivots)
        };
        let status = match status {
            CoreStatus::Optimal => LpStatus::Optimal,
            CoreStatus::Infeasible => {
                return Ok(Some(LpSolution::non_optimal(LpStatus::Infeasible, pivots)))
            }
            CoreStatus::Unbounded => {
                return Ok(Some(LpSolution::non_optimal(LpStatus::Unbounded, pivots)))
            }
            CoreStatus::IterationLimit => return Err(LpError::IterationLimit),
            CoreStatus::Singular => return Err(LpError::Singular),
        };
        let primal: Vec<f64> = map
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, l } => l + x_int[col],
                VarMap::Neg { col, u } => u - x_int[col],
                VarMap::Split { pos, neg } => x_int[pos] - x_int[neg],
                VarMap::Fixed(v) => v,
            })
            .collect();
        let s = self.sign();
        let dual: Vec<f64> = z_int[..self.rows.len()].iter().map(|v| s * v).collect();
        let certificate = self.certify(&primal, &dual);
        Ok(Some(LpSolution {
            status,
            objective: certificate.primal_objective,
            primal,
            dual,
            certificate,
            pivots,
        }))
    }

    fn sign(&self) -> f64 {
        match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }

    fn standard_form(&self) -> (StdForm, Vec<VarMap>) {
        let n = self.num_vars();
        let s = self.sign();
        let mut map = Vec::with_capacity(n);
        let mut k = 0;
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            let m = if l == u {
                VarMap::Fixed(l)
            } else if l.is_finite() {
                k += 1;
                VarMap::Shift { col: k - 1, l }
            } else if u.is_finite() {
                k += 1;
                VarMap::Neg { col: k - 1, u }
            } else {
                k += 2;
                VarMap::Split {
                    pos: k - 2,
                    neg: k - 1,
                }
            };
            map.push(m);
        }
        let mut c = vec![0.0; k];
        let mut a_rows: Vec<Vec<f64>> = Vec::new();
        let mut kinds = Vec::new();
        let mut b = Vec::new();
        for (j, m) in map.iter().enumerate() {
            let cj = s * self.objective[j];
            match *m {
                VarMap::Shift { col, .. } => c[col] += cj,
                VarMap::Neg { col, .. } => c[col] -= cj,
                VarMap::Split { pos, neg } => {
                    c[pos] += cj;
                    c[neg] -= cj;
                }
                VarMap::Fixed(_) => {}
            }
        }
        for row in &self.rows {
            let mut dense = vec![0.0; k];
            let mut rhs = row.rhs;
            for &(j, a) in &row.coeffs {
                match map[j] {
                    VarMap::Shift { col, l } => {
                        dense[col] += a;
                        rhs -= a * l;
                    }
                    VarMap::Neg { col, u } => {
                        dense[col] -= a;
                        rhs -= a * u;
                    }
                    VarMap::Split { pos, neg } => {
                        dense[pos] += a;
                        dense[neg] -= a;
                    }
                    VarMap::Fixed(v) => rhs -= a * v,
                }
            }
            a_rows.push(dense);
            kinds.push(row.kind);
            b.push(rhs);
        }
        for (j, m) in map.iter().enumerate() {
            if let VarMap::Shift { col, l } = *m {
                if self.upper[j].is_finite() {
                    let mut dense = vec![0.0; k];
                    dense[col] = 1.0;
                    a_rows.push(dense);
                    kinds.push(RowKind::Le);
                    b.push(self.upper[j] - l);
                }
            }
        }
        let m = a_rows.len();
        let a = a_rows.into_iter().flatten().collect();
        (
            StdForm {
                m,
                k,
                a,
                kinds,
                b,
                c,
            },
            map,
        )
    }

    /// Recomputes residuals, reduced costs, the dual objective and the gap
    /// for a candidate primal/dual pair. Dual signs follow the problem's own
    /// sense: for a maximization, `y >= 0` on `<=` rows.
    pub fn certify(&self, primal: &[f64], dual: &[f64]) -> Certificate {
        let s = self.sign();
        let n = self.num_vars();
        let mut primal_residual = 0.0f64;
        let mut complementarity = 0.0f64;
        let mut dual_residual = 0.0f64;
        let mut reduced: Vec<f64> = self.objective.iter().map(|c| s * c).collect();
        let mut dual_obj = 0.0;
        for (row, &y) in self.rows.iter().zip(dual) {
            let y = s * y;
            let ax: f64 = row.coeffs.iter().map(|&(j, a)| a * primal[j]).sum();
            let slack = ax - row.rhs;
            match row.kind {
                RowKind::Le => {
                    primal_residual = primal_residual.max(slack);
                    dual_residual = dual_residual.max(y);
                    complementarity = complementarity.max((y * slack).abs());
                }
                RowKind::Ge => {
                    primal_residual = primal_residual.max(-slack);
                    dual_residual = dual_residual.max(-y);
                    complementarity = complementarity.max((y * slack).abs());
                }
                RowKind::Eq => primal_residual = primal_residual.max(slack.abs()),
            }
            dual_obj += row.rhs * y;
            for &(j, a) in &row.coeffs {
                reduced[j] -= a * y;
            }
        }
        let mut primal_obj = 0.0;
        for j in 0..n {
            let (l, u, x, d) = (self.lower[j], self.upper[j], primal[j], reduced[j]);
            primal_obj += s * self.objective[j] * x;
            primal_residual = primal_residual.max(l - x).max(x - u);
            if d > 0.0 {
                if l.is_finite() {
                    dual_obj += l * d;
                    complementarity = complementarity.max(d * (x - l));
                } else {
                    dual_residual = dual_residual.max(d);
                }
            } else if d < 0.0 {
                if u.is_finite() {
                    dual_obj += u * d;
                    complementarity = complementarity.max(-d * (u - x));
                } else {
                    dual_residual = dual_residual.max(-d);
                }
            }
        }
        Certificate {
            primal_objective: s * primal_obj,
            dual_objective: s * dual_obj,
            gap: (primal_obj - dual_obj).abs(),
            primal_residual: primal_residual.max(0.0),
            dual_residual: dual_residual.max(0.0),
            complementarity,
        }
    }
}

fn certificate_error(c: &Certificate) -> LpError {
    LpError::CertificateFailed {
        gap: c.gap,
        primal_residual: c.primal_residual,
        dual_residual: c.dual_residual,
    }
}

/// Dual of `min c^T x, A x (kinds) b, x >= 0` written as
/// `min -b^T y, A^T y <= c` over sign-normalized copies of `y`. Each dual
/// column remembers its primal row and the sign mapping it back to `y`.
fn dualize(p: &StdForm) -> (StdForm, Vec<(usize, f64)>) {
    let mut cols: Vec<(usize, f64)> = Vec::new();
    for i in 0..p.m {
        match p.kinds[i] {
            RowKind::Ge => cols.push((i, 1.0)),
            RowKind::Le => cols.push((i, -1.0)),
            RowKind::Eq => {
                cols.push((i, 1.0));
                cols.push((i, -1.0));
            }
        }
    }
    let kd = cols.len();
    let mut a = vec![0.0; p.k * kd];
    for (c, &(i, sign)) in cols.iter().enumerate() {
        for j in 0..p.k {
            a[j * kd + c] = sign * p.a[i * p.k + j];
        }
    }
    let c = cols.iter().map(|&(i, sign)| -sign * p.b[i]).collect();
    let d = StdForm {
        m: p.k,
        k: kd,
        a,
        kinds: vec![RowKind::Le; p.k],
        b: p.c.clone(),
        c,
    };
    (d, cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn single_variable_max() {
        let mut lp = LpProblem::new(Sense::Maximize, vec![1.0]);
        lp.add_row(vec![(0, 1.0)], RowKind::Le, 3.0);
        for o in [Orientation::Primal, Orientation::Dual, Orientation::Auto] {
            let s = lp.solve_with(o).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert_close(s.objective, 3.0);
            assert_close(s.dual[0], 1.0);
        }
    }

    #[test]
    fn single_route_transport() {
        // ship one unit a -> b at cost 2; flows w_ab, w_ba
        let mut lp = LpProblem::new(Sense::Minimize, vec![2.0, 2.0]);
        lp.add_row(vec![(0, 1.0), (1, -1.0)], RowKind::Eq, 1.0);
        let s = lp.solve().unwrap();
        assert_close(s.objective, 2.0);
        assert_close(s.primal[0], 1.0);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LpProblem::new(Sense::Maximize, vec![1.0]);
        lp.add_row(vec![(0, 1.0)], RowKind::Le, 1.0);
        lp.add_row(vec![(0, 1.0)], RowKind::Ge, 2.0);
        for o in [Orientation::Primal, Orientation::Dual, Orientation::Auto] {
            assert_eq!(lp.solve_with(o).unwrap().status, LpStatus::Infeasible);
        }
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LpProblem::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_row(vec![(0, 1.0), (1, -1.0)], RowKind::Le, 1.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_boxed_variables() {
        // min x - y with x in [-2, 5], y free, y <= x + 1, y >= -3
        let mut lp = LpProblem::new(Sense::Minimize, vec![1.0, -1.0]);
        lp.set_bounds(0, -2.0, 5.0)
            .set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row(vec![(1, 1.0), (0, -1.0)], RowKind::Le, 1.0);
        lp.add_row(vec![(1, 1.0)], RowKind::Ge, -3.0);
        for o in [Orientation::Primal, Orientation::Dual] {
            let s = lp.solve_with(o).unwrap();
            assert_close(s.objective, -1.0);
            assert!(s.certificate.holds(1e-9));
        }
        // upper bound active: max x + y, x <= 5 (bound), y <= x + 1
        let mut lp = LpProblem::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.set_bounds(0, -2.0, 5.0)
            .set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row(vec![(1, 1.0), (0, -1.0)], RowKind::Le, 1.0);
        let s = lp.solve().unwrap();
        assert_close(s.objective, 11.0);
    }

    #[test]
    fn bad_input_is_rejected() {
        let mut lp = LpProblem::new(Sense::Minimize, vec![1.0]);
        lp.add_row(vec![(3, 1.0)], RowKind::Le, 1.0);
        assert!(matches!(
            lp.solve(),
            Err(LpError::DimensionMismatch { var: 3, .. })
        ));
        let mut lp = LpProblem::new(Sense::Minimize, vec![f64::NAN]);
        lp.add_row(vec![(0, 1.0)], RowKind::Le, 1.0);
        assert!(matches!(lp.solve(), Err(LpError::NotANumber(_))));
    }

    #[test]
    fn degenerate_assignment_terminates() {
        // 6x6 assignment with all costs equal: massively degenerate
        let n = 6;
        let mut lp = LpProblem::new(Sense::Minimize, vec![1.0; n * n]);
        for i in 0..n {
            lp.add_row((0..n).map(|j| (i * n + j, 1.0)).collect(), RowKind::Eq, 1.0);
            lp.add_row((0..n).map(|j| (j * n + i, 1.0)).collect(), RowKind::Eq, 1.0);
        }
        let s = lp.solve().unwrap();
        assert_close(s.objective, n as f64);
        assert!(s.certificate.holds(1e-9));
    }

    #[test]
    fn certify_flags_a_wrong_dual() {
        let mut lp = LpProblem::new(Sense::Maximize, vec![1.0]);
        lp.add_row(vec![(0, 1.0)], RowKind::Le, 3.0);
        let c = lp.certify(&[3.0], &[0.5]);
        assert!(c.dual_residual > 0.4);
        assert!(!c.holds(1e-9));
    }
}
