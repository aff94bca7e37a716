//! Finitely supported elements of the free space and their norms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lip::{same_space, LipError, LipFunction};
use crate::lp::{Certificate, LpError, LpProblem, LpStatus, Orientation, Row, RowKind, Sense};
use crate::metric::{MetricError, PointedMetricSpace, BASE};
use crate::tol::tau_lp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FreeError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("objects live on different spaces")]
    SpaceMismatch,
    #[error("expected {expected} masses, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite mass or coefficient")]
    NonFinite,
    #[error("coefficient {0} must be positive")]
    NonPositiveWeight(f64),
    #[error("the zero element has no norming functional or dual face")]
    ZeroElement,
    #[error("{0} LP ended with status {1:?}")]
    LpStatus(&'static str, LpStatus),
    #[error("flow optimum {flow} and Lipschitz optimum {lip} disagree")]
    DualityMismatch { flow: f64, lip: f64 },
    #[error("representation weight {weight} exceeds the norm {norm}")]
    NotOptimal { weight: f64, norm: f64 },
}

/// `sum_p masses[p] delta(p)` with total mass zero; the base absorbs any
/// imbalance.
#[derive(Debug, Clone)]
pub struct FreeElement {
    space: Arc<PointedMetricSpace>,
    masses: Vec<f64>,
}

impl PartialEq for FreeElement {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.masses == other.masses
    }
}

impl FreeElement {
    pub fn from_masses(
        space: Arc<PointedMetricSpace>,
        mut masses: Vec<f64>,
    ) -> Result<Self, FreeError> {
        if masses.len() != space.len() {
            return Err(FreeError::LengthMismatch {
                expected: space.len(),
                got: masses.len(),
            });
        }
        if masses.iter().any(|m| !m.is_finite()) {
            return Err(FreeError::NonFinite);
        }
        masses[BASE] = -masses[1..].iter().sum::<f64>();
        Ok(Self { space, masses })
    }

    pub fn zero(space: Arc<PointedMetricSpace>) -> Self {
        let n = space.len();
        Self {
            space,
            masses: vec![0.0; n],
        }
    }

    pub fn delta(space: Arc<PointedMetricSpace>, p: usize) -> Result<Self, FreeError> {
        space.check_index(p)?;
        let mut masses = vec![0.0; space.len()];
        masses[p] += 1.0;
        Self::from_masses(space, masses)
    }

    /// `(delta(x) - delta(y)) / d(x, y)`.
    pub fn molecule(space: Arc<PointedMetricSpace>, x: usize, y: usize) -> Result<Self, FreeError> {
        space.check_pair(x, y)?;
        let d = space.d(x, y);
        let mut masses = vec![0.0; space.len()];
        masses[x] += 1.0 / d;
        masses[y] -= 1.0 / d;
        Self::from_masses(space, masses)
    }

    pub fn space(&self) -> &Arc<PointedMetricSpace> {
        &self.space
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn is_zero(&self) -> bool {
        self.masses.iter().all(|&m| m == 0.0)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &FreeElement, b: f64) -> Result<FreeElement, FreeError> {
        if !same_space(&self.space, &other.space) {
            return Err(FreeError::SpaceMismatch);
        }
        let masses = self
            .masses
            .iter()
            .zip(&other.masses)
            .map(|(u, v)| a * u + b * v)
            .collect();
        FreeElement::from_masses(self.space.clone(), masses)
    }

    pub fn scale(&self, a: f64) -> FreeElement {
        let masses = self.masses.iter().map(|m| a * m).collect();
        FreeElement {
            space: self.space.clone(),
            masses,
        }
    }

    /// The same masses over another metric on the same point set.
    pub fn on_space(&self, space: Arc<PointedMetricSpace>) -> Result<FreeElement, FreeError> {
        FreeElement::from_masses(space, self.masses.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Molecule {
    pub lambda: f64,
    pub x: usize,
    pub y: usize,
}

/// `sum lambda_i m_{x_i, y_i}` with positive weights.
#[derive(Debug, Clone)]
pub struct MoleculeCombination {
    space: Arc<PointedMetricSpace>,
    terms: Vec<Molecule>,
}

impl MoleculeCombination {
    pub fn new(space: Arc<PointedMetricSpace>, terms: Vec<Molecule>) -> Result<Self, FreeError> {
        for t in &terms {
            space.check_pair(t.x, t.y)?;
            if !t.lambda.is_finite() {
                return Err(FreeError::NonFinite);
            }
            if t.lambda <= 0.0 {
                return Err(FreeError::NonPositiveWeight(t.lambda));
            }
        }
        Ok(Self { space, terms })
    }

    pub fn space(&self) -> &Arc<PointedMetricSpace> {
        &self.space
    }

    pub fn terms(&self) -> &[Molecule] {
        &self.terms
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.lambda).sum()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.terms.iter().map(|t| (t.x, t.y)).collect()
    }

    pub fn to_element(&self) -> FreeElement {
        self.to_element_on(self.space.clone())
    }

    /// The element with the same weights and pairs, molecules normalized by
    /// the distances of `space`.
    pub fn to_element_on(&self, space: Arc<PointedMetricSpace>) -> FreeElement {
        let mut masses = vec![0.0; space.len()];
        for t in &self.terms {
            let d = space.d(t.x, t.y);
            masses[t.x] += t.lambda / d;
            masses[t.y] -= t.lambda / d;
        }
        FreeElement::from_masses(space, masses).expect("finite masses")
    }

    /// Same weights and pairs over another metric on the same point set.
    pub fn on_space(&self, space: Arc<PointedMetricSpace>) -> Result<Self, FreeError> {
        Self::new(space, self.terms.clone())
    }
}

/// `<f, mu> = sum_p mu_p f(p)`.
pub fn pairing(f: &LipFunction, mu: &FreeElement) -> Result<f64, FreeError> {
    if !same_space(f.space(), &mu.space) {
        return Err(FreeError::SpaceMismatch);
    }
    Ok(f.values().iter().zip(&mu.masses).map(|(v, m)| v * m).sum())
}

/// Constraints `v(p) - v(q) <= l d(p, q)` over all ordered pairs, where
/// `col(p)` gives the LP column of `v(p)` or `None` if `v(p) = 0`.
pub(crate) fn lipschitz_rows(
    space: &PointedMetricSpace,
    points: &[usize],
    col: &dyn Fn(usize) -> Option<usize>,
    l: f64,
) -> Vec<Row> {
    let mut rows = Vec::with_capacity(points.len() * points.len());
    for &p in points {
        for &q in points {
            if p == q {
                continue;
            }
            let mut coeffs = Vec::with_capacity(2);
            if let Some(c) = col(p) {
                coeffs.push((c, 1.0));
            }
            if let Some(c) = col(q) {
                coeffs.push((c, -1.0));
            }
            if !coeffs.is_empty() {
                rows.push(Row {
                    coeffs,
                    kind: RowKind::Le,
                    rhs: l * space.d(p, q),
                });
            }
        }
    }
    rows
}

/// Column of `f(p)` when the variables are `f(1), ..., f(n-1)`.
pub(crate) fn value_col(p: usize) -> Option<usize> {
    (p != BASE).then(|| p - 1)
}

pub(crate) fn values_from_cols(n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|p| value_col(p).map_or(0.0, |c| x[c])).collect()
}

/// Result of [`free_norm`]: both optima and both optimizers.
#[derive(Debug, Clone)]
pub struct NormReport {
    /// Average of the two optima.
    pub value: f64,
    pub flow_value: f64,
    pub lip_value: f64,
    /// Positive arcs `(p, q, w_pq)` of the optimal flow.
    pub flow: Vec<(usize, usize, f64)>,
    /// Optimal Lipschitz potential: a norming functional when the element
    /// is nonzero.
    pub functional: LipFunction,
    pub flow_certificate: Certificate,
    pub lip_certificate: Certificate,
}

/// Minimum-cost flow: `min sum w_pq d(p,q)` with `w >= 0` and net outflow
/// `mu_p` at every non-base point, over all ordered pairs.
fn flow_lp(mu: &FreeElement) -> (LpProblem, Vec<(usize, usize)>) {
    let space = &mu.space;
    let n = space.len();
    let arcs: Vec<(usize, usize)> = (0..n)
        .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
        .collect();
    let cost = arcs.iter().map(|&(p, q)| space.d(p, q)).collect();
    let mut lp = LpProblem::new(Sense::Minimize, cost);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (a, &(p, q)) in arcs.iter().enumerate() {
        rows[p].push((a, 1.0));
        rows[q].push((a, -1.0));
    }
    for (p, coeffs) in rows.into_iter().enumerate().skip(1) {
        lp.add_row(coeffs, RowKind::Eq, mu.masses[p]);
    }
    (lp, arcs)
}

/// `max <f, mu>` over 1-Lipschitz `f` with `f(0) = 0`.
fn lipschitz_lp(mu: &FreeElement) -> LpProblem {
    let space = &mu.space;
    let n = space.len();
    let mut lp = LpProblem::new(Sense::Maximize, mu.masses[1..].to_vec()).all_free();
    let points: Vec<usize> = (0..n).collect();
    lp.rows = lipschitz_rows(space, &points, &value_col, 1.0);
    lp
}

/// The free-space norm, computed by the flow LP and independently by the
/// Lipschitz LP (solved on its own tableau rather than through the flow
/// problem's duals).
pub fn free_norm(mu: &FreeElement) -> Result<NormReport, FreeError> {
    let n = mu.space.len();
    if n == 1 {
        let functional = LipFunction::zero(mu.space.clone());
        return Ok(NormReport {
            value: 0.0,
            flow_value: 0.0,
            lip_value: 0.0,
            flow: Vec::new(),
            functional,
            flow_certificate: Certificate::default(),
            lip_certificate: Certificate::default(),
        });
    }
    let (flp, arcs) = flow_lp(mu);
    let fsol = flp.solve_with(Orientation::Primal)?;
    if fsol.status != LpStatus::Optimal {
        return Err(FreeError::LpStatus("flow", fsol.status));
    }
    let lsol = lipschitz_lp(mu).solve_with(Orientation::Primal)?;
    if lsol.status != LpStatus::Optimal {
        return Err(FreeError::LpStatus("Lipschitz", lsol.status));
    }
    let (fv, lv) = (fsol.objective, lsol.objective);
    if (fv - lv).abs() > tau_lp() * (1.0 + fv.abs()) {
        return Err(FreeError::DualityMismatch { flow: fv, lip: lv });
    }
    let flow = arcs
        .iter()
        .zip(&fsol.primal)
        .filter(|(_, &w)| w > 1e-12)
        .map(|(&(p, q), &w)| (p, q, w))
        .collect();
    let functional = LipFunction::new(mu.space.clone(), values_from_cols(n, &lsol.primal))?;
    Ok(NormReport {
        value: 0.5 * (fv + lv),
        flow_value: fv,
        lip_value: lv,
        flow,
        functional,
        flow_certificate: fsol.certificate,
        lip_certificate: lsol.certificate,
    })
}

/// A 1-Lipschitz `f` with `f(0) = 0` attaining `<f, mu> = ||mu||`.
pub fn norming_functional(mu: &FreeElement) -> Result<LipFunction, FreeError> {
    if mu.is_zero() {
        return Err(FreeError::ZeroElement);
    }
    Ok(free_norm(mu)?.functional)
}

/// `D(mu)`: 1-Lipschitz functions vanishing at the base with `<f, mu> = ||mu||`.
#[derive(Debug, Clone)]
pub struct DualFace {
    pub element: FreeElement,
    pub norm: f64,
}

pub fn dual_face(mu: &FreeElement) -> Result<DualFace, FreeError> {
    if mu.is_zero() {
        return Err(FreeError::ZeroElement);
    }
    let norm = free_norm(mu)?.value;
    Ok(DualFace {
        element: mu.clone(),
        norm,
    })
}

impl DualFace {
    /// Slack allowed on the norming equation; the LP norm carries rounding
    /// of order `tau_lp`.
    pub(crate) fn slack(&self) -> f64 {
        tau_lp() * (1.0 + self.norm)
    }

    /// The face as an LP over `f(1), ..., f(n-1)` (free) with the given
    /// objective.
    pub fn lp(&self, sense: Sense, objective: Vec<f64>) -> LpProblem {
        let space = self.element.space();
        let n = space.len();
        let mut lp = LpProblem::new(sense, objective).all_free();
        let points: Vec<usize> = (0..n).collect();
        lp.rows = lipschitz_rows(space, &points, &value_col, 1.0);
        lp.add_row(self.pairing_row(), RowKind::Ge, self.norm - self.slack());
        lp
    }

    pub(crate) fn pairing_row(&self) -> Vec<(usize, f64)> {
        let m = self.element.masses();
        (1..m.len())
            .filter(|&p| m[p] != 0.0)
            .map(|p| (p - 1, m[p]))
            .collect()
    }

    /// `[min f(p), max f(p)]` over the face for every point (the base gives
    /// `[0, 0]`).
    pub fn coordinate_ranges(&self) -> Result<Vec<(f64, f64)>, FreeError> {
        let n = self.element.space().len();
        let solve = |p: usize| -> Result<(f64, f64), FreeError> {
            if p == BASE {
                return Ok((0.0, 0.0));
            }
            let mut c = vec![0.0; n - 1];
            c[p - 1] = 1.0;
            let mut out = [0.0; 2];
            for (k, sense) in [Sense::Minimize, Sense::Maximize].into_iter().enumerate() {
                let sol = self.lp(sense, c.clone()).solve()?;
                if sol.status != LpStatus::Optimal {
                    return Err(FreeError::LpStatus("face range", sol.status));
                }
                out[k] = sol.objective;
            }
            Ok((out[0], out[1]))
        };
        crate::par::try_map(n, solve)
    }
}

pub fn face_coordinate_ranges(face: &DualFace) -> Result<Vec<(f64, f64)>, FreeError> {
    face.coordinate_ranges()
}

/// Whether `D(mu)` is a single function: every coordinate range has width at
/// most `tol`.
pub fn is_gateaux(mu: &FreeElement, tol: f64) -> Result<bool, FreeError> {
    let ranges = dual_face(mu)?.coordinate_ranges()?;
    Ok(ranges.iter().all(|(lo, hi)| hi - lo <= tol))
}

/// An optimal representation read off the optimal flow:
/// `lambda = w_pq d(p, q)` for each positive arc.
pub fn optimal_representation(mu: &FreeElement) -> Result<MoleculeCombination, FreeError> {
    if mu.is_zero() {
        return Err(FreeError::ZeroElement);
    }
    let report = free_norm(mu)?;
    let space = mu.space.clone();
    let terms = report
        .flow
        .iter()
        .map(|&(p, q, w)| Molecule {
            lambda: w * space.d(p, q),
            x: p,
            y: q,
        })
        .collect();
    let combo = MoleculeCombination::new(space, terms)?;
    let weight = combo.total_weight();
    if (weight - report.value).abs() > tau_lp() * (1.0 + report.value) {
        return Err(FreeError::NotOptimal {
            weight,
            norm: report.value,
        });
    }
    Ok(combo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{branching_tree, equilateral, line};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn half_half(m: &Arc<PointedMetricSpace>) -> FreeElement {
        MoleculeCombination::new(
            m.clone(),
            vec![
                Molecule {
                    lambda: 0.5,
                    x: 1,
                    y: 0,
                },
                Molecule {
                    lambda: 0.5,
                    x: 3,
                    y: 2,
                },
            ],
        )
        .unwrap()
        .to_element()
    }

    #[test]
    fn base_absorbs_mass() {
        let m = Arc::new(line(3, 1.0).unwrap());
        let mu = FreeElement::from_masses(m, vec![7.0, 1.0, 2.0]).unwrap();
        assert_eq!(mu.masses(), &[-3.0, 1.0, 2.0]);
    }

    #[test]
    fn pairings() {
        let m = Arc::new(line(4, 1.0).unwrap());
        let id = LipFunction::new(m.clone(), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let g = LipFunction::new(m.clone(), vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let mol = FreeElement::molecule(m.clone(), 1, 0).unwrap();
        close(pairing(&id, &mol).unwrap(), 1.0, 1e-15);
        close(pairing(&g, &half_half(&m)).unwrap(), 1.0, 1e-15);
        assert_eq!(pairing(&g, &FreeElement::zero(m)).unwrap(), 0.0);
    }

    #[test]
    fn norm_examples() {
        let tree = Arc::new(branching_tree(3).unwrap());
        let mu = FreeElement::from_masses(tree.clone(), vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        let r = free_norm(&mu).unwrap();
        close(r.value, 2.0, 1e-9);
        close(r.flow_value, r.lip_value, 1e-9);
        let m = Arc::new(line(4, 1.0).unwrap());
        close(free_norm(&half_half(&m)).unwrap().value, 1.0, 1e-9);
        let eq = Arc::new(equilateral(4, 1.0).unwrap());
        close(
            free_norm(&FreeElement::molecule(eq, 2, 3).unwrap())
                .unwrap()
                .value,
            1.0,
            1e-9,
        );
    }

    #[test]
    fn norming_functional_attains() {
        let m = Arc::new(line(4, 1.0).unwrap());
        let mu = half_half(&m);
        let f = norming_functional(&mu).unwrap();
        assert!(f.lip_norm() <= 1.0 + 1e-9);
        close(pairing(&f, &mu).unwrap(), 1.0, 1e-9);
        assert!(matches!(
            norming_functional(&FreeElement::zero(m)),
            Err(FreeError::ZeroElement)
        ));
    }

    #[test]
    fn face_ranges_on_the_line() {
        let m = Arc::new(line(4, 1.0).unwrap());
        let ranges = dual_face(&half_half(&m))
            .unwrap()
            .coordinate_ranges()
            .unwrap();
        close(ranges[2].0, 0.0, 1e-7);
        close(ranges[2].1, 2.0, 1e-7);
        close(ranges[1].0, 1.0, 1e-7);
        close(ranges[1].1, 1.0, 1e-7);
    }

    #[test]
    fn gateaux_examples() {
        let m = Arc::new(line(4, 1.0).unwrap());
        let third = 1.0 / 3.0;
        let cons = MoleculeCombination::new(
            m.clone(),
            vec![
                Molecule {
                    lambda: third,
                    x: 1,
                    y: 0,
                },
                Molecule {
                    lambda: third,
                    x: 2,
                    y: 1,
                },
                Molecule {
                    lambda: third,
                    x: 3,
                    y: 2,
                },
            ],
        )
        .unwrap()
        .to_element();
        assert!(is_gateaux(&cons, 1e-7).unwrap());
        assert!(!is_gateaux(&half_half(&m), 1e-7).unwrap());
        let eq = Arc::new(equilateral(3, 1.0).unwrap());
        assert!(!is_gateaux(&FreeElement::molecule(eq, 1, 2).unwrap(), 1e-7).unwrap());
    }

    #[test]
    fn representations() {
        let m = Arc::new(line(4, 1.0).unwrap());
        let rep = optimal_representation(&FreeElement::delta(m.clone(), 3).unwrap()).unwrap();
        close(rep.total_weight(), 3.0, 1e-9);
        let back = rep.to_element();
        for (a, b) in back
            .masses()
            .iter()
            .zip(FreeElement::delta(m.clone(), 3).unwrap().masses())
        {
            close(*a, *b, 1e-9);
        }
        let mol = optimal_representation(&FreeElement::molecule(m, 2, 1).unwrap()).unwrap();
        assert_eq!(mol.terms().len(), 1);
        assert_eq!((mol.terms()[0].x, mol.terms()[0].y), (2, 1));
        close(mol.terms()[0].lambda, 1.0, 1e-9);
    }
}
