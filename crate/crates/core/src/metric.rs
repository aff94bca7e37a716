//! Finite pointed metric spaces.
//!
//! Points are indexed `0..n` and the base point is always index 0. Distances
//! are stored as a dense row-major `f64` matrix. Gallery items built from
//! rational data also carry an exact copy of the matrix so that Gromov
//! products and ratios of them can be reported without rounding.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tol::TAU_METRIC;

/// Exact rational distance entry.
pub type Exact = Ratio<i64>;

/// Index of the distinguished point.
pub const BASE: usize = 0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("distance matrix is empty")]
    Empty,
    #[error("non-finite distance at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("not a metric: {0}")]
    NotMetric(ValidationReport),
    #[error("transformed matrix rejected: {0}")]
    Rejected(ValidationReport),
    #[error("gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("point index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("points must be distinct, got {0} twice")]
    SamePoint(usize),
    #[error("{0}")]
    Degenerate(&'static str),
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
}

/// A single failed axiom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `d(i,i) != 0`.
    Diagonal { i: usize, value: f64 },
    /// `d(i,j) != d(j,i)` beyond tolerance.
    Asymmetric { i: usize, j: usize },
    /// `d(i,j) <= 0` for `i != j`.
    NonPositive { i: usize, j: usize, value: f64 },
    /// `d(i,j) > d(i,k) + d(k,j)`; `excess` is the left side minus the right side.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
}

/// Outcome of checking the metric axioms on a matrix.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// Violating triangle triples `(i, j, k)`.
    pub fn triangle_triples(&self) -> Vec<(usize, usize, usize)> {
        self.violations
            .iter()
            .filter_map(|v| match *v {
                Violation::Triangle { i, j, k, .. } => Some((i, j, k)),
                _ => None,
            })
            .collect()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        if let Some(v) = self.violations.first() {
            write!(f, ", first: {v:?}")?;
        }
        Ok(())
    }
}

fn check_shape(dist: &[Vec<f64>]) -> Result<usize, MetricError> {
    let n = dist.len();
    if n == 0 {
        return Err(MetricError::Empty);
    }
    for (row, r) in dist.iter().enumerate() {
        if r.len() != n {
            return Err(MetricError::NotSquare {
                row,
                len: r.len(),
                n,
            });
        }
        for (j, v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(MetricError::NonFinite { i: row, j });
            }
        }
    }
    Ok(n)
}

/// Checks the metric axioms on a raw square matrix.
///
/// Symmetry is compared with relative tolerance [`TAU_METRIC`]; the triangle
/// inequality `d(i,j) <= (d(i,k) + d(k,j))(1 + TAU_METRIC)` is checked for
/// every unordered pair `{i, j}` and every third point `k`. Fails only on a
/// malformed matrix; axiom failures are reported, not raised.
pub fn validate_matrix(dist: &[Vec<f64>]) -> Result<ValidationReport, MetricError> {
    let n = check_shape(dist)?;
    let mut violations = Vec::new();
    for (i, row) in dist.iter().enumerate() {
        if row[i] != 0.0 {
            violations.push(Violation::Diagonal { i, value: row[i] });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let a = dist[i][j];
            let b = dist[j][i];
            if (a - b).abs() > TAU_METRIC * a.abs().max(b.abs()) {
                violations.push(Violation::Asymmetric { i, j });
            }
            if a <= 0.0 {
                violations.push(Violation::NonPositive { i, j, value: a });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = dist[i][j];
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let rhs = dist[i][k] + dist[k][j];
                if dij > rhs * (1.0 + TAU_METRIC) {
                    violations.push(Violation::Triangle {
                        i,
                        j,
                        k,
                        excess: dij - rhs,
                    });
                }
            }
        }
    }
    Ok(ValidationReport {
        ok: violations.is_empty(),
        violations,
    })
}

/// A validated finite pointed metric space with base point 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PointedMetricSpace {
    n: usize,
    dist: Vec<f64>,
    labels: Option<Vec<String>>,
    exact: Option<Vec<Exact>>,
}

/// A subspace together with the original index of each retained point.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    pub space: PointedMetricSpace,
    /// `original[i]` is the index in the parent space of the new point `i`.
    pub original: Vec<usize>,
}

impl PointedMetricSpace {
    /// Builds a space from a full matrix, rejecting anything that is not a
    /// metric. The upper triangle is mirrored into the lower one.
    pub fn new(dist: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let report = validate_matrix(&dist)?;
        if !report.ok {
            return Err(MetricError::NotMetric(report));
        }
        Ok(Self::from_valid(&dist))
    }

    /// Builds a space from exact rational distances. The `f64` matrix is the
    /// nearest-float image of the exact one.
    pub fn from_exact(dist: Vec<Vec<Exact>>) -> Result<Self, MetricError> {
        let float: Vec<Vec<f64>> = dist
            .iter()
            .map(|r| r.iter().map(ratio_to_f64).collect())
            .collect();
        let report = validate_matrix(&float)?;
        if !report.ok {
            return Err(MetricError::NotMetric(report));
        }
        let n = dist.len();
        let mut exact = vec![Exact::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                exact[i * n + j] = dist[i][j];
                exact[j * n + i] = dist[i][j];
            }
        }
        let mut space = Self::from_valid(&float);
        space.exact = Some(exact);
        Ok(space)
    }

    fn from_valid(dist: &[Vec<f64>]) -> Self {
        let n = dist.len();
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                flat[i * n + j] = dist[i][j];
                flat[j * n + i] = dist[i][j];
            }
        }
        Self {
            n,
            dist: flat,
            labels: None,
            exact: None,
        }
    }

    /// Attaches one label per point.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, MetricError> {
        if labels.len() != self.n {
            return Err(MetricError::LabelCount {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Exact distance when the space was built from rationals.
    pub fn exact_d(&self, i: usize, j: usize) -> Option<Exact> {
        self.exact.as_ref().map(|e| e[i * self.n + j])
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of point `i`, falling back to its index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    /// Resolves a label, or a plain index, to a point index.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        if let Some(labels) = &self.labels {
            if let Some(i) = labels.iter().position(|l| l == name) {
                return Some(i);
            }
        }
        name.parse::<usize>().ok().filter(|&i| i < self.n)
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.dist[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn check_index(&self, index: usize) -> Result<(), MetricError> {
        if index < self.n {
            Ok(())
        } else {
            Err(MetricError::IndexOutOfRange { index, n: self.n })
        }
    }

    pub fn check_pair(&self, x: usize, y: usize) -> Result<(), MetricError> {
        self.check_index(x)?;
        self.check_index(y)?;
        if x == y {
            return Err(MetricError::SamePoint(x));
        }
        Ok(())
    }

    /// Re-runs the axiom checks on the stored matrix.
    pub fn validate(&self) -> ValidationReport {
        validate_matrix(&self.matrix()).expect("stored matrix is square and finite")
    }

    /// `d(x,z) + d(z,y) - d(x,y)`, without argument checks.
    #[inline]
    pub(crate) fn gromov_raw(&self, z: usize, x: usize, y: usize) -> f64 {
        self.d(x, z) + self.d(z, y) - self.d(x, y)
    }

    pub(crate) fn gromov_exact_raw(&self, z: usize, x: usize, y: usize) -> Option<Exact> {
        let e = self.exact.as_ref()?;
        let n = self.n;
        Some(e[x * n + z] + e[z * n + y] - e[x * n + y])
    }

    /// `d_gamma`: every off-diagonal distance increased by `gamma`.
    pub fn gamma_fatten(&self, gamma: f64) -> Result<Self, MetricError> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(MetricError::NonPositiveGamma(gamma));
        }
        let mut out = self.shifted(gamma);
        if let (Some(exact), Some(g)) = (&self.exact, Exact::approximate_float(gamma)) {
            if ratio_to_f64(&g) == gamma {
                out.exact = Some(shift_exact(exact, self.n, g));
            }
        }
        Ok(out)
    }

    /// `d_{-gamma}`: every off-diagonal distance decreased by `gamma`, kept
    /// only if the result is still a metric.
    pub fn gamma_thin(&self, gamma: f64) -> Result<Self, MetricError> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(MetricError::NonPositiveGamma(gamma));
        }
        let out = self.shifted(-gamma);
        let report = out.validate();
        if !report.ok {
            return Err(MetricError::Rejected(report));
        }
        Ok(out)
    }

    fn shifted(&self, delta: f64) -> Self {
        let n = self.n;
        let mut dist = self.dist.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dist[i * n + j] += delta;
                }
            }
        }
        Self {
            n,
            dist,
            labels: self.labels.clone(),
            exact: None,
        }
    }

    /// Restriction to `indices`. The retained points are sorted and the new
    /// base is the smallest retained index.
    pub fn subspace(&self, indices: &[usize]) -> Result<Subspace, MetricError> {
        let mut keep: Vec<usize> = indices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(MetricError::Empty);
        }
        for &i in &keep {
            self.check_index(i)?;
        }
        let m = keep.len();
        let mut dist = vec![0.0; m * m];
        let mut exact = self.exact.as_ref().map(|_| vec![Exact::zero(); m * m]);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                dist[a * m + b] = self.d(i, j);
                if let Some(e) = exact.as_mut() {
                    e[a * m + b] = self.exact_d(i, j).expect("exact present");
                }
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| keep.iter().map(|&i| l[i].clone()).collect());
        Ok(Subspace {
            space: Self {
                n: m,
                dist,
                labels,
                exact,
            },
            original: keep,
        })
    }

    /// The metric segment `[x, y] = {z : d(x,z) + d(z,y) = d(x,y)}`, with
    /// equality tested up to relative tolerance [`TAU_METRIC`].
    pub fn metric_segment(&self, x: usize, y: usize) -> Result<Vec<usize>, MetricError> {
        self.check_pair(x, y)?;
        let dxy = self.d(x, y);
        Ok((0..self.n)
            .filter(|&z| {
                if z == x || z == y {
                    return true;
                }
                match self.gromov_exact_raw(z, x, y) {
                    Some(g) => g.is_zero(),
                    None => self.gromov_raw(z, x, y) <= TAU_METRIC * dxy,
                }
            })
            .collect())
    }

    /// Smallest off-diagonal distance.
    pub fn uniform_discreteness_constant(&self) -> Result<f64, MetricError> {
        if self.n < 2 {
            return Err(MetricError::Degenerate(
                "a single point has no off-diagonal distance",
            ));
        }
        let mut theta = f64::INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                theta = theta.min(self.d(i, j));
            }
        }
        Ok(theta)
    }

    /// `max { d(0, q) : q in subset }`.
    pub fn radius_beta(&self, subset: &[usize]) -> Result<f64, MetricError> {
        if subset.is_empty() {
            return Err(MetricError::Empty);
        }
        let mut beta = 0.0f64;
        for &q in subset {
            self.check_index(q)?;
            beta = beta.max(self.d(BASE, q));
        }
        Ok(beta)
    }

    /// Largest distance between two points.
    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }
}

fn shift_exact(exact: &[Exact], n: usize, g: Exact) -> Vec<Exact> {
    let mut out = exact.to_vec();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i * n + j] += g;
            }
        }
    }
    out
}

pub(crate) fn ratio_to_f64(r: &Exact) -> f64 {
    // Both parts fit in 2^53 for every gallery item, so this is the
    // correctly rounded quotient.
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> PointedMetricSpace {
        let dist = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        PointedMetricSpace::new(dist).unwrap()
    }

    fn equilateral(n: usize) -> PointedMetricSpace {
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        PointedMetricSpace::new(dist).unwrap()
    }

    fn tree_matrix(n: usize, leg: f64, cross: f64) -> Vec<Vec<f64>> {
        (0..=n)
            .map(|i| {
                (0..=n)
                    .map(|j| match (i, j) {
                        _ if i == j => 0.0,
                        (0, _) | (_, 0) => leg,
                        _ => cross,
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn collinear_points_validate() {
        assert!(line(3).validate().ok);
        assert!(equilateral(4).validate().ok);
    }

    #[test]
    fn thinned_tree_reports_violation() {
        let report = validate_matrix(&tree_matrix(3, 0.5, 1.5)).unwrap();
        assert!(!report.ok);
        let triples = report.triangle_triples();
        assert!(triples.contains(&(1, 2, 0)));
        assert_eq!(triples.len(), 3);
    }

    #[test]
    fn malformed_matrix_is_an_error() {
        let err = validate_matrix(&[vec![0.0, 1.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, MetricError::NotSquare { row: 1, .. }));
        assert!(matches!(validate_matrix(&[]), Err(MetricError::Empty)));
    }

    #[test]
    fn structural_violations_are_listed() {
        let report = validate_matrix(&[vec![0.0, 1.0], vec![2.0, 0.5]]).unwrap();
        assert!(report
            .violations
            .contains(&Violation::Diagonal { i: 1, value: 0.5 }));
        assert!(report
            .violations
            .contains(&Violation::Asymmetric { i: 0, j: 1 }));
        let report = validate_matrix(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            report.violations[0],
            Violation::NonPositive { .. }
        ));
    }

    #[test]
    fn fatten_adds_gamma_off_diagonal() {
        let f = line(4).gamma_fatten(1.0).unwrap();
        assert_eq!(f.d(0, 3), 4.0);
        assert_eq!(f.d(1, 2), 2.0);
        assert_eq!(f.d(2, 2), 0.0);
        let t = PointedMetricSpace::new(tree_matrix(3, 1.0, 2.0)).unwrap();
        let tf = t.gamma_fatten(0.5).unwrap();
        assert_eq!(tf.d(0, 1), 1.5);
        assert_eq!(tf.d(1, 2), 2.5);
        assert!(line(3).gamma_fatten(0.0).is_err());
        assert!(line(3).gamma_fatten(-1.0).is_err());
    }

    #[test]
    fn thin_accepts_and_rejects() {
        let t = equilateral(3).gamma_thin(0.4).unwrap();
        assert!((t.d(0, 1) - 0.6).abs() < 1e-15);
        let tree = PointedMetricSpace::new(tree_matrix(3, 1.0, 2.0)).unwrap();
        match tree.gamma_thin(0.5) {
            Err(MetricError::Rejected(r)) => assert!(!r.triangle_triples().is_empty()),
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(matches!(
            equilateral(3).gamma_thin(1.0),
            Err(MetricError::Rejected(_))
        ));
        assert!(matches!(
            equilateral(3).gamma_thin(0.0),
            Err(MetricError::NonPositiveGamma(_))
        ));
    }

    #[test]
    fn segments() {
        assert_eq!(line(4).metric_segment(0, 3).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(equilateral(3).metric_segment(1, 2).unwrap(), vec![1, 2]);
        assert!(line(4).metric_segment(1, 1).is_err());
    }

    #[test]
    fn subspace_reroots_to_smallest_index() {
        let sub = line(4).subspace(&[3, 1, 2]).unwrap();
        assert_eq!(sub.original, vec![1, 2, 3]);
        assert_eq!(sub.space.len(), 3);
        assert_eq!(sub.space.d(0, 2), 2.0);
        assert!(line(4).subspace(&[]).is_err());
        assert!(line(4).subspace(&[7]).is_err());
    }

    #[test]
    fn discreteness_and_radius() {
        let tree = PointedMetricSpace::new(tree_matrix(3, 1.0, 2.0)).unwrap();
        assert_eq!(tree.uniform_discreteness_constant().unwrap(), 1.0);
        assert_eq!(line(4).radius_beta(&[0, 1]).unwrap(), 1.0);
        let single = PointedMetricSpace::new(vec![vec![0.0]]).unwrap();
        assert!(single.uniform_discreteness_constant().is_err());
        assert!(line(4).radius_beta(&[]).is_err());
    }

    #[test]
    fn exact_spaces_keep_rationals() {
        let half = Exact::new(1, 2);
        let one = Exact::from_integer(1);
        let z = Exact::zero();
        let s = PointedMetricSpace::from_exact(vec![
            vec![z, half, half],
            vec![half, z, one],
            vec![half, one, z],
        ])
        .unwrap();
        assert_eq!(s.gromov_exact_raw(0, 1, 2), Some(z));
        assert_eq!(s.metric_segment(1, 2).unwrap(), vec![0, 1, 2]);
        let f = s.gamma_fatten(0.25).unwrap();
        assert_eq!(f.exact_d(1, 2), Some(Exact::new(5, 4)));
    }
}
