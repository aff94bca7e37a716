//! Sampling lower bound for the exposedness modulus of `D(mu)`.

use std::fmt::Write as _;

use serde::Serialize;

use super::{distance_to_face, random_objective, solve_slab, SsdError};
use crate::free_space::{dual_face, pairing, FreeElement};
use crate::lip::LipFunction;
use crate::lp::RowKind;
use crate::tol::tau_lp;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusPoint {
    pub eta: f64,
    /// Monotone envelope: the largest raw value at any depth `<= eta`.
    pub worst_dist: f64,
    /// Largest distance observed among the samples at this depth.
    pub raw_worst: f64,
    pub samples: usize,
}

/// Observed worst distance from slab points to the face, per slab depth.
/// Every value is a lower bound for the true modulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusCurve {
    pub norm: f64,
    pub seed: u64,
    /// Sorted by increasing `eta`.
    pub points: Vec<ModulusPoint>,
}

/// For each `eta`, maximizes `samples` seeded random linear objectives over
/// the slab `{lip(f) <= 1, <f, mu> >= ||mu|| (1 - eta)}` and records the
/// largest Lipschitz distance from the resulting vertices to `D(mu)`.
pub fn exposedness_probe(
    mu: &FreeElement,
    eta_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ModulusCurve, SsdError> {
    if samples == 0 {
        return Err(SsdError::pre(
            "exposedness_probe",
            "need at least one sample",
        ));
    }
    if let Some(e) = eta_grid.iter().find(|e| !(0.0..1.0).contains(*e)) {
        return Err(SsdError::pre(
            "exposedness_probe",
            format!("slab depth {e} outside [0, 1)"),
        ));
    }
    let face = dual_face(mu)?;
    let dim = mu.space().len() - 1;
    let tau = tau_lp();
    let mut grid: Vec<f64> = eta_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut points = Vec::with_capacity(grid.len());
    let mut envelope = 0.0f64;
    for (ei, &eta) in grid.iter().enumerate() {
        let dists = crate::par::try_map(samples, |s| -> Result<f64, SsdError> {
            let c = random_objective(dim, seed, ((ei as u64) << 32) | s as u64);
            let f = solve_slab(&face, eta, RowKind::Ge, c)?;
            let pf = pairing(&f, mu)?;
            if f.lip_norm() > 1.0 + tau || pf < face.norm * (1.0 - eta) - tau * (1.0 + face.norm) {
                return Err(SsdError::pre(
                    "exposedness_probe",
                    "slab vertex violates its constraints",
                ));
            }
            Ok(distance_to_face(&face, &f)?.0.max(0.0))
        })?;
        let raw = dists.into_iter().fold(0.0, f64::max);
        envelope = envelope.max(raw);
        points.push(ModulusPoint {
            eta,
            worst_dist: envelope,
            raw_worst: raw,
            samples,
        });
    }
    Ok(ModulusCurve {
        norm: face.norm,
        seed,
        points,
    })
}

/// A seeded point of the slab boundary `{lip(f) <= 1, <f, mu> = ||mu|| (1 - eta)}`
/// obtained as an LP vertex. For three or more points the vertex has
/// Lipschitz norm 1.
pub fn slab_point(mu: &FreeElement, eta: f64, seed: u64) -> Result<LipFunction, SsdError> {
    let face = dual_face(mu)?;
    let c = random_objective(mu.space().len() - 1, seed, u64::MAX);
    solve_slab(&face, eta, RowKind::Eq, c)
}

/// `eta,worst_dist,raw_worst,samples` with a header line.
pub fn modulus_csv(curve: &ModulusCurve) -> String {
    let mut out = String::from("eta,worst_dist,raw_worst,samples\n");
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.eta, p.worst_dist, p.raw_worst, p.samples
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_space::MoleculeCombination;
    use crate::gallery::{equilateral, line};
    use crate::Molecule;
    use std::sync::Arc;

    #[test]
    fn zero_depth_gives_zero() {
        let m = Arc::new(equilateral(3, 1.0).unwrap());
        let mu = FreeElement::molecule(m, 1, 2).unwrap();
        let c = exposedness_probe(&mu, &[0.0], 8, 1).unwrap();
        assert!(c.points[0].worst_dist < 1e-9);
    }

    #[test]
    fn trend_on_the_line() {
        let m = Arc::new(line(4, 1.0).unwrap());
        let mu = MoleculeCombination::new(
            m,
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
        .to_element();
        let c = exposedness_probe(&mu, &[0.1, 0.01, 0.001], 32, 7).unwrap();
        assert!(c.points[0].worst_dist <= c.points[1].worst_dist);
        assert!(c.points[1].worst_dist <= c.points[2].worst_dist);
        assert!(c.points[0].worst_dist < 0.01);
        let again = exposedness_probe(&mu, &[0.1, 0.01, 0.001], 32, 7).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn slab_points_have_norm_one() {
        let m = Arc::new(equilateral(4, 1.0).unwrap());
        let mu = FreeElement::molecule(m, 1, 2).unwrap();
        let g = slab_point(&mu, 0.05, 3).unwrap();
        assert!((g.lip_norm() - 1.0).abs() < 1e-9);
        assert!((pairing(&g, &mu).unwrap() - 0.95).abs() < 1e-9);
    }
}
