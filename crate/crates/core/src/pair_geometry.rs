//! Gromov-product analytics of pairs, spaces and families.

use std::fmt::Write as _;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gallery::MetricFamily;
use crate::metric::{ratio_to_f64, Exact, MetricError, PointedMetricSpace};
use crate::tol::TAU_METRIC;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("family {name} failed at index {index}: {source}")]
    Family {
        name: String,
        index: usize,
        source: MetricError,
    },
}

/// `G_z(x, y) = d(x, z) + d(z, y) - d(x, y)`.
pub fn gromov_product(
    space: &PointedMetricSpace,
    z: usize,
    x: usize,
    y: usize,
) -> Result<f64, MetricError> {
    space.check_pair(x, y)?;
    space.check_index(z)?;
    Ok(space.gromov_raw(z, x, y))
}

/// Exact Gromov product when the space carries rational distances.
pub fn gromov_product_exact(
    space: &PointedMetricSpace,
    z: usize,
    x: usize,
    y: usize,
) -> Result<Option<Exact>, MetricError> {
    space.check_pair(x, y)?;
    space.check_index(z)?;
    Ok(space.gromov_exact_raw(z, x, y))
}

/// Breakpoint of the concavity profile: the smallest `G_z` over the points
/// with `min(d(x,z), d(y,z)) >= epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileStep {
    pub epsilon: f64,
    pub min_gromov: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFlags {
    pub has_g: bool,
    pub is_rotund: bool,
    pub is_concave: bool,
    pub extreme_molecule: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairGeometryReport {
    pub pair: (usize, usize),
    pub distance: f64,
    /// `min_z G_z(x, y)` over `z` outside `{x, y}`; `None` when there is no
    /// such `z` (read as `+inf`).
    pub eta: Option<f64>,
    pub eta_witness: Option<usize>,
    /// `min_z G_z / min(d(x,z), d(y,z))`; `None` means `+inf`.
    pub delta_rotund: Option<f64>,
    pub concavity_profile: Vec<ProfileStep>,
    /// Rational forms of `eta` and `delta_rotund` when the space is exact.
    pub eta_exact: Option<String>,
    pub delta_rotund_exact: Option<String>,
    pub flags: PairFlags,
}

impl PairGeometryReport {
    pub fn eta_or_inf(&self) -> f64 {
        self.eta.unwrap_or(f64::INFINITY)
    }

    pub fn delta_or_inf(&self) -> f64 {
        self.delta_rotund.unwrap_or(f64::INFINITY)
    }
}

fn min_exact(values: impl Iterator<Item = Exact>) -> Option<Exact> {
    values.reduce(|a, b| if b < a { b } else { a })
}

/// Computes every pair statistic by enumeration. On exact spaces `eta` and
/// `delta_rotund` come from rational arithmetic and are rounded once.
pub fn analyze_pair(
    space: &PointedMetricSpace,
    x: usize,
    y: usize,
) -> Result<PairGeometryReport, MetricError> {
    space.check_pair(x, y)?;
    let others: Vec<usize> = (0..space.len()).filter(|&z| z != x && z != y).collect();
    let g = |z: usize| space.gromov_raw(z, x, y);
    let near = |z: usize| space.d(x, z).min(space.d(y, z));

    let mut eta = None;
    let mut eta_witness = None;
    let mut delta = None;
    for &z in &others {
        let gz = g(z);
        if eta.is_none_or(|e| gz < e) {
            eta = Some(gz);
            eta_witness = Some(z);
        }
        let r = gz / near(z);
        delta = Some(delta.map_or(r, |d: f64| d.min(r)));
    }

    let (mut eta_exact, mut delta_rotund_exact) = (None, None);
    if space.has_exact() && !others.is_empty() {
        let ge = |z: usize| space.gromov_exact_raw(z, x, y).expect("exact space");
        let ne = |z: usize| {
            let (a, b) = (space.exact_d(x, z).unwrap(), space.exact_d(y, z).unwrap());
            if a < b {
                a
            } else {
                b
            }
        };
        let e = min_exact(others.iter().map(|&z| ge(z))).unwrap();
        let dr = min_exact(others.iter().map(|&z| ge(z) / ne(z))).unwrap();
        eta = Some(ratio_to_f64(&e));
        delta = Some(ratio_to_f64(&dr));
        eta_exact = Some(e.to_string());
        delta_rotund_exact = Some(if dr.is_zero() {
            "0".into()
        } else {
            dr.to_string()
        });
    }

    let mut breakpoints: Vec<f64> = others.iter().map(|&z| near(z)).collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let concavity_profile: Vec<ProfileStep> = breakpoints
        .iter()
        .map(|&eps| ProfileStep {
            epsilon: eps,
            min_gromov: others
                .iter()
                .filter(|&&z| near(z) >= eps)
                .map(|&z| g(z))
                .fold(f64::INFINITY, f64::min),
        })
        .collect();

    let tol = TAU_METRIC * (1.0 + space.d(x, y));
    let has_g = eta.is_none_or(|e| e > tol);
    let is_rotund = delta.is_none_or(|d| d > TAU_METRIC);
    let is_concave = concavity_profile.iter().all(|s| s.min_gromov > tol);
    let flags = PairFlags {
        has_g,
        is_rotund,
        is_concave,
        extreme_molecule: has_g,
    };
    debug_assert!(
        has_g == is_rotund && is_rotund == is_concave,
        "finite-space collapse"
    );

    Ok(PairGeometryReport {
        pair: (x, y),
        distance: space.d(x, y),
        eta,
        eta_witness,
        delta_rotund: delta,
        concavity_profile,
        eta_exact,
        delta_rotund_exact,
        flags,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceClassification {
    pub luna: bool,
    /// `None` for a two-point space (read as `+inf`).
    pub min_eta: Option<f64>,
    pub witness: (usize, usize),
}

/// Whether every pair has property (G), with the worst pair.
pub fn classify_space(space: &PointedMetricSpace) -> Result<SpaceClassification, MetricError> {
    let n = space.len();
    if n < 2 {
        return Err(MetricError::Degenerate(
            "classification needs at least two points",
        ));
    }
    let mut min_eta: Option<f64> = None;
    let mut witness = (0, 1);
    for x in 0..n {
        for y in x + 1..n {
            if let Some(e) = analyze_pair(space, x, y)?.eta {
                if min_eta.is_none_or(|m| e < m) {
                    min_eta = Some(e);
                    witness = (x, y);
                }
            }
        }
    }
    let luna = min_eta.is_none_or(|m| m > TAU_METRIC * (1.0 + space.diameter()));
    Ok(SpaceClassification {
        luna,
        min_eta,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub index: usize,
    pub pair: (usize, usize),
    pub eta: Option<f64>,
    pub delta_rotund: Option<f64>,
}

/// Pair statistics of the distinguished pair along a family.
pub fn family_trend(
    family: &MetricFamily,
    indices: &[usize],
) -> Result<Vec<TrendRow>, GeometryError> {
    indices
        .iter()
        .map(|&index| {
            let member = family
                .generate(index)
                .map_err(|source| GeometryError::Family {
                    name: family.name.clone(),
                    index,
                    source,
                })?;
            let (x, y) = member.pair;
            let r = analyze_pair(&member.space, x, y)?;
            Ok(TrendRow {
                index,
                pair: member.pair,
                eta: r.eta,
                delta_rotund: r.delta_rotund,
            })
        })
        .collect()
}

fn csv_num(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "inf".into(),
    }
}

/// `index,eta,delta_rotund` with a header line.
pub fn trend_csv(rows: &[TrendRow]) -> String {
    let mut out = String::from("index,eta,delta_rotund\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.index,
            csv_num(r.eta),
            csv_num(r.delta_rotund)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{branching_tree, equilateral, line, three_point_aligned};

    #[test]
    fn gromov_examples() {
        let a = three_point_aligned();
        assert_eq!(gromov_product(&a, 0, 1, 2).unwrap(), 0.0);
        let e = equilateral(3, 1.0).unwrap();
        assert_eq!(gromov_product(&e, 0, 1, 2).unwrap(), 1.0);
        assert!(gromov_product(&e, 0, 1, 1).is_err());
    }

    #[test]
    fn equilateral_pair() {
        let r = analyze_pair(&equilateral(4, 1.0).unwrap(), 1, 3).unwrap();
        assert_eq!(r.eta, Some(1.0));
        assert_eq!(r.delta_rotund, Some(1.0));
        assert!(
            r.flags.has_g && r.flags.is_rotund && r.flags.is_concave && r.flags.extreme_molecule
        );
    }

    #[test]
    fn aligned_pair_fails() {
        let r = analyze_pair(&three_point_aligned(), 1, 2).unwrap();
        assert_eq!(r.eta, Some(0.0));
        assert!(!r.flags.extreme_molecule && !r.flags.has_g);
    }

    #[test]
    fn two_points_are_infinite() {
        let r = analyze_pair(&line(2, 1.0).unwrap(), 0, 1).unwrap();
        assert_eq!(r.eta, None);
        assert!(r.flags.has_g);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"eta\":null"));
    }

    #[test]
    fn profile_is_nondecreasing() {
        let r = analyze_pair(&branching_tree(5).unwrap(), 1, 2).unwrap();
        for w in r.concavity_profile.windows(2) {
            assert!(w[0].min_gromov <= w[1].min_gromov);
        }
    }

    #[test]
    fn classification() {
        let line4 = line(4, 1.0).unwrap();
        assert!(!classify_space(&line4).unwrap().luna);
        let c = classify_space(&equilateral(5, 1.0).unwrap()).unwrap();
        assert!(c.luna);
        assert_eq!(c.min_eta, Some(1.0));
        let fat = classify_space(&line4.gamma_fatten(0.3).unwrap()).unwrap();
        assert!(fat.luna && fat.min_eta.unwrap() >= 0.3 - 1e-12);
    }

    #[test]
    fn trends() {
        let rows = family_trend(&MetricFamily::rotund_not_g(), &[1, 2, 3]).unwrap();
        for r in &rows {
            assert_eq!(r.delta_rotund, Some(0.5));
            assert_eq!(r.eta, Some(1.0 / (4.0 * r.index as f64)));
        }
        let csv = trend_csv(&rows);
        assert!(csv.starts_with("index,eta,delta_rotund\n1,0.25,0.5\n"));
    }
}
