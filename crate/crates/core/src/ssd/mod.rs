//! Exposedness probing and the constructive SSD certificates.

mod corollary;
mod main1;
mod petr;
mod probe;
mod ssd1;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::free_space::{lipschitz_rows, value_col, values_from_cols, DualFace, FreeError};
use crate::lip::{LipError, LipFunction};
use crate::lp::{LpError, LpProblem, LpStatus, RowKind, Sense};
use crate::metric::{MetricError, PointedMetricSpace, BASE};

pub use corollary::{corollary_main_witness, CorollaryWitness};
pub use main1::{
    find_common_norming, main1_pipeline, Main1Constants, Main1Setup, PerturbationResult,
    PerturbationStatus,
};
pub use petr::{petr_certificate, petr_gamma_cut, petr_n0, GammaCut, PetrCertificate};
pub use probe::{exposedness_probe, modulus_csv, slab_point, ModulusCurve, ModulusPoint};
pub use ssd1::{ssd1_gamma_eps, ssd1_perturb, Ssd1Result};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsdError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error(transparent)]
    Free(#[from] FreeError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{step}: {detail}")]
    Precondition { step: &'static str, detail: String },
    #[error("{0} LP ended with status {1:?}")]
    LpStatus(&'static str, LpStatus),
}

impl SsdError {
    pub(crate) fn pre(step: &'static str, detail: impl Into<String>) -> Self {
        SsdError::Precondition {
            step,
            detail: detail.into(),
        }
    }

    /// Whether the failure is a violated input condition rather than a
    /// numerical or structural error.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            SsdError::Precondition { .. } | SsdError::Free(FreeError::ZeroElement)
        )
    }
}

/// `(1 + gamma / theta)`: the Lipschitz constant of the identity
/// `(M, d) -> (M, d_gamma)`; its inverse is 1-Lipschitz.
pub fn bilipschitz_distortion(space: &PointedMetricSpace, gamma: f64) -> Result<f64, MetricError> {
    if !(gamma > 0.0) {
        return Err(MetricError::NonPositiveGamma(gamma));
    }
    let theta = space.uniform_discreteness_constant()?;
    Ok(1.0 + gamma / theta)
}

/// The closest point of a face, measured by the Lipschitz norm of the
/// difference on a subset.
pub(crate) struct Projection {
    pub t: f64,
    /// Values indexed like the full space; zero off the subset.
    pub values: Vec<f64>,
}

/// `min t` over `phi` on `points` (which must contain the base) with
/// `lip(phi) <= lip_bound`, `<phi, masses> >= target - slack` and
/// `lip(phi - h) <= t`, all measured in `space` restricted to `points`.
pub(crate) fn project_onto_face(
    space: &PointedMetricSpace,
    points: &[usize],
    masses: &[f64],
    lip_bound: f64,
    target: f64,
    h: &[f64],
) -> Result<Projection, SsdError> {
    debug_assert!(points.contains(&BASE));
    let n = space.len();
    let mut col_of = vec![None; n];
    let mut k = 0;
    for &p in points {
        if p != BASE {
            col_of[p] = Some(k);
            k += 1;
        }
    }
    let t_col = k;
    let mut obj = vec![0.0; k + 1];
    obj[t_col] = 1.0;
    let mut lp = LpProblem::new(Sense::Minimize, obj).all_free();
    lp.set_bounds(t_col, 0.0, f64::INFINITY);
    let col = |p: usize| col_of[p];
    lp.rows = lipschitz_rows(space, points, &col, lip_bound);
    let pairing: Vec<(usize, f64)> = points
        .iter()
        .filter_map(|&p| {
            col_of[p]
                .filter(|_| masses[p] != 0.0)
                .map(|c| (c, masses[p]))
        })
        .collect();
    lp.add_row(pairing, RowKind::Ge, target - 1e-10 * (1.0 + target.abs()));
    for &p in points {
        for &q in points {
            if p == q {
                continue;
            }
            let mut coeffs = vec![(t_col, -space.d(p, q))];
            if let Some(c) = col_of[p] {
                coeffs.push((c, -1.0));
            }
            if let Some(c) = col_of[q] {
                coeffs.push((c, 1.0));
            }
            lp.add_row(coeffs, RowKind::Le, h[q] - h[p]);
        }
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(SsdError::LpStatus("face projection", sol.status));
    }
    let mut values = vec![0.0; n];
    for &p in points {
        if let Some(c) = col_of[p] {
            values[p] = sol.primal[c];
        }
    }
    Ok(Projection {
        t: sol.primal[t_col],
        values,
    })
}

/// Lipschitz distance from `f` to the face `D(mu)`, with the nearest face
/// point.
pub fn distance_to_face(face: &DualFace, f: &LipFunction) -> Result<(f64, LipFunction), SsdError> {
    let space = face.element.space();
    let points: Vec<usize> = (0..space.len()).collect();
    let p = project_onto_face(
        space,
        &points,
        face.element.masses(),
        1.0,
        face.norm,
        f.values(),
    )?;
    Ok((p.t, LipFunction::new(space.clone(), p.values)?))
}

/// `max c . f` over `{lip(f) <= 1, <f, mu> (kind) ||mu|| (1 - eta)}`.
pub(crate) fn slab_lp(face: &DualFace, eta: f64, kind: RowKind, objective: Vec<f64>) -> LpProblem {
    let space = face.element.space();
    let points: Vec<usize> = (0..space.len()).collect();
    let mut lp = LpProblem::new(Sense::Maximize, objective).all_free();
    lp.rows = lipschitz_rows(space, &points, &value_col, 1.0);
    lp.add_row(face.pairing_row(), kind, face.norm * (1.0 - eta));
    lp
}

pub(crate) fn solve_slab(
    face: &DualFace,
    eta: f64,
    kind: RowKind,
    objective: Vec<f64>,
) -> Result<LipFunction, SsdError> {
    let sol = slab_lp(face, eta, kind, objective).solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(SsdError::LpStatus("slab", sol.status));
    }
    let space = face.element.space();
    Ok(LipFunction::new(
        space.clone(),
        values_from_cols(space.len(), &sol.primal),
    )?)
}

/// Seeded objective in `[-1, 1]^dim`; `stream` separates independent draws.
pub(crate) fn random_objective(dim: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Largest `|slope|` of `f` over pairs with at least one point outside `inside`.
pub(crate) fn sup_slope_off(f: &LipFunction, inside: &[bool]) -> f64 {
    let n = inside.len();
    let mut s = 0.0f64;
    for p in 0..n {
        for q in p + 1..n {
            if !(inside[p] && inside[q]) {
                s = s.max(f.slope(p, q).abs());
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{branching_tree, equilateral};

    #[test]
    fn distortion_formula() {
        assert_eq!(
            bilipschitz_distortion(&branching_tree(3).unwrap(), 0.5).unwrap(),
            1.5
        );
        let e = equilateral(3, 2.0).unwrap();
        assert_eq!(bilipschitz_distortion(&e, 0.2).unwrap(), 1.1);
        assert!(bilipschitz_distortion(&e, 0.0).is_err());
    }
}
