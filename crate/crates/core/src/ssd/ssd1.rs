//! Perturbation of a near-norming function towards a peaking function.

use serde::Serialize;

use super::SsdError;
use crate::checks::Check;
use crate::free_space::{pairing, FreeElement};
use crate::lip::LipFunction;
use crate::tol::tau_lp;

#[derive(Debug, Clone, Serialize)]
pub struct Ssd1Result {
    pub h_hat: LipFunction,
    pub gamma_eps: f64,
    /// `1 - (1 - eps/4)(1 - gamma_eps) + eps/4`.
    pub bound: f64,
    /// `lip(h_hat - g)`.
    pub distance: f64,
    pub checks: Vec<Check>,
}

/// Half of the admissible window `eps (1 - gamma) / (4 - eps)`.
pub fn ssd1_gamma_eps(epsilon: f64, gamma_peak: f64) -> f64 {
    0.5 * epsilon * (1.0 - gamma_peak) / (4.0 - epsilon)
}

/// Blends `g` with the peaking function, `h = (1 - eps/4) g + (eps/4) f`,
/// and normalizes. Requires `<g, m_xy> > 1 - gamma_eps`.
pub fn ssd1_perturb(
    x: usize,
    y: usize,
    f_peaking: &LipFunction,
    gamma_peak: f64,
    g: &LipFunction,
    epsilon: f64,
) -> Result<Ssd1Result, SsdError> {
    let tau = tau_lp();
    if !(epsilon > 0.0 && epsilon < 4.0) {
        return Err(SsdError::pre(
            "ssd1",
            format!("epsilon {epsilon} outside (0, 4)"),
        ));
    }
    if !(0.0..1.0).contains(&gamma_peak) {
        return Err(SsdError::pre(
            "ssd1",
            format!("peaking constant {gamma_peak} outside [0, 1)"),
        ));
    }
    match f_peaking.peaking_check(x, y)? {
        Some(gp) if gp <= gamma_peak + tau => {}
        Some(gp) => {
            return Err(SsdError::pre(
                "ssd1",
                format!("f peaks with constant {gp}, not {gamma_peak}"),
            ));
        }
        None => return Err(SsdError::pre("ssd1", "f does not peak at (x, y)")),
    }
    if (g.lip_norm() - 1.0).abs() > tau {
        return Err(SsdError::pre(
            "ssd1",
            format!("g has Lipschitz norm {}", g.lip_norm()),
        ));
    }
    let m = FreeElement::molecule(g.space().clone(), x, y)?;
    let gamma_eps = ssd1_gamma_eps(epsilon, gamma_peak);
    let gm = pairing(g, &m)?;
    if gm <= 1.0 - gamma_eps {
        return Err(SsdError::pre(
            "ssd1",
            format!(
                "<g, m_xy> = {gm} is not above 1 - gamma_eps = {}",
                1.0 - gamma_eps
            ),
        ));
    }
    let q = epsilon / 4.0;
    let h = g.combine(1.0 - q, f_peaking, q)?;
    let hn = h.lip_norm();
    let h_hat = h.scale(1.0 / hn);
    let distance = h_hat.distance(g)?;
    let bound = 1.0 - (1.0 - q) * (1.0 - gamma_eps) + q;
    let checks = vec![
        Check::eq("h_attains_at_m_xy", hn, h.slope(x, y), tau),
        Check::lt("h_norm_lower", (1.0 - q) * (1.0 - gamma_eps) + q, hn, -tau),
        Check::le("distance_bound", distance, bound, tau),
    ];
    if let Some(c) = checks.iter().find(|c| !c.ok) {
        return Err(SsdError::pre(
            "ssd1",
            format!("check {} failed with margin {:e}", c.name, c.margin),
        ));
    }
    Ok(Ssd1Result {
        h_hat,
        gamma_eps,
        bound,
        distance,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::equilateral;
    use crate::lip::aux_f_xy;
    use std::sync::Arc;

    #[test]
    fn fixed_point() {
        let m = Arc::new(equilateral(3, 1.0).unwrap());
        let f = aux_f_xy(&m, 1, 2).unwrap();
        let r = ssd1_perturb(1, 2, &f, 0.5, &f, 0.1).unwrap();
        assert!(r.distance < 1e-12);
    }

    #[test]
    fn far_g_is_rejected() {
        let m = Arc::new(equilateral(3, 1.0).unwrap());
        let f = aux_f_xy(&m, 1, 2).unwrap();
        let g = LipFunction::new(m, vec![0.0, 0.0, 1.0]).unwrap();
        assert!(ssd1_perturb(1, 2, &f, 0.5, &g, 0.1)
            .unwrap_err()
            .is_precondition());
    }
}
