//! The shifted norming function that lets a combination on `d_{2 gamma}`
//! be fed to the pipeline over `(M, d_gamma)`.

use std::sync::Arc;

use serde::Serialize;

use super::SsdError;
use crate::checks::{worst_by_name, Check};
use crate::free_space::{free_norm, MoleculeCombination};
use crate::lip::{mcshane_upper, LipFunction};
use crate::metric::PointedMetricSpace;
use crate::tol::tau_lp;

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryWitness {
    /// `(M, d_gamma)`, the space the pipeline runs on.
    #[serde(skip)]
    pub tilde_space: Arc<PointedMetricSpace>,
    /// Common norming function on `(M, d_gamma)` for every pair.
    pub f_tilde: LipFunction,
    /// The norming function on `(M, d_{2 gamma})` it was built from.
    pub f: LipFunction,
    pub checks: Vec<Check>,
}

/// Given a norm-one combination that is an optimal representation in
/// `d_{2 gamma}`, builds `f~ = f - gamma` on the `x_i` and `f~ = f` on the
/// `y_i` from a common norming `f`, extends it to `(M, d_gamma)` and checks
/// that it norms every pair there.
pub fn corollary_main_witness(
    original: &Arc<PointedMetricSpace>,
    gamma: f64,
    combination: &MoleculeCombination,
) -> Result<CorollaryWitness, SsdError> {
    let tau = tau_lp();
    let tilde = Arc::new(original.gamma_fatten(gamma)?);
    let double = Arc::new(tilde.gamma_fatten(gamma)?);
    if combination.space().len() != original.len() {
        return Err(SsdError::pre(
            "input",
            "combination lives on a different point set",
        ));
    }
    let combo = combination.on_space(double.clone())?;
    let weight = combo.total_weight();
    let report = free_norm(&combo.to_element())?;
    if (weight - report.value).abs() > tau * (1.0 + weight) {
        return Err(SsdError::pre(
            "optimality",
            format!("weights sum to {weight} but the norm is {}", report.value),
        ));
    }
    let f = report.functional;
    let pairs = combo.pairs();
    for &(x, y) in &pairs {
        if (f.slope(x, y) - 1.0).abs() > tau {
            return Err(SsdError::pre(
                "common_norming",
                format!("pair ({x}, {y}) is not normed"),
            ));
        }
    }
    for &(x, _) in &pairs {
        if pairs.iter().any(|&(_, y)| y == x) {
            return Err(SsdError::pre(
                "disjointness",
                format!("point {x} is both an x_i and a y_j"),
            ));
        }
    }

    let mut n_set: Vec<usize> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    n_set.sort_unstable();
    n_set.dedup();
    let is_x = |p: usize| pairs.iter().any(|&(x, _)| x == p);
    let ft = |p: usize| {
        if is_x(p) {
            f.value(p) - gamma
        } else {
            f.value(p)
        }
    };
    let mut checks = Vec::new();
    for &(xi, _) in &pairs {
        for &(xj, yj) in &pairs {
            let diff = ft(xi) - ft(yj);
            let d = tilde.d(xi, yj);
            if diff >= 0.0 {
                checks.push(Check::le("case_nonnegative", diff, d, tau));
            } else {
                let chain = -tilde.d(yj, xj) + tilde.d(xj, xi) + gamma;
                checks.push(Check::le("case_negative", -diff, chain, tau));
                checks.push(Check::le("case_negative_star", chain, d, tau));
            }
        }
    }
    for (a, &p) in n_set.iter().enumerate() {
        for &q in &n_set[a + 1..] {
            checks.push(Check::le(
                "lipschitz_on_n",
                (ft(p) - ft(q)).abs(),
                tilde.d(p, q),
                tau,
            ));
        }
    }
    let values: Vec<f64> = n_set.iter().map(|&p| ft(p)).collect();
    let f_tilde = LipFunction::new(tilde.clone(), mcshane_upper(&tilde, &n_set, &values, 1.0))?;
    checks.push(Check::le("extension_norm", f_tilde.lip_norm(), 1.0, tau));
    for &(x, y) in &pairs {
        checks.push(Check::eq("pairs_normed", f_tilde.slope(x, y), 1.0, tau));
    }
    let checks = worst_by_name(checks);
    if let Some(bad) = checks.iter().find(|c| !c.ok) {
        return Err(SsdError::pre(
            "tilde_f",
            format!("check {} failed with margin {:e}", bad.name, bad.margin),
        ));
    }
    Ok(CorollaryWitness {
        tilde_space: tilde,
        f_tilde,
        f,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_space::Molecule;
    use crate::gallery::branching_tree;

    #[test]
    fn tree_single_molecule() {
        let m = Arc::new(branching_tree(3).unwrap());
        let combo = MoleculeCombination::new(
            m.clone(),
            vec![Molecule {
                lambda: 1.0,
                x: 1,
                y: 2,
            }],
        )
        .unwrap();
        let w = corollary_main_witness(&m, 0.5, &combo).unwrap();
        assert!(w.checks.iter().all(|c| c.ok));
        assert!((w.f_tilde.slope(1, 2) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_optimal_combination_is_rejected() {
        let m = Arc::new(branching_tree(3).unwrap());
        // through the root instead of the direct edge: weight 4/3 > norm 1
        let combo = MoleculeCombination::new(
            m.clone(),
            vec![
                Molecule {
                    lambda: 2.0 / 3.0,
                    x: 1,
                    y: 0,
                },
                Molecule {
                    lambda: 2.0 / 3.0,
                    x: 0,
                    y: 2,
                },
            ],
        )
        .unwrap();
        let err = corollary_main_witness(&m, 0.5, &combo).unwrap_err();
        assert!(matches!(
            err,
            SsdError::Precondition {
                step: "optimality",
                ..
            }
        ));
    }
}
