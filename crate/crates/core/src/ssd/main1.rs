//! The perturbation pipeline on a fattened space: from a near-norming `g`
//! to a norm-attaining `psi` close to it, with every estimate recorded.

use std::sync::Arc;

use serde::Serialize;

use super::{project_onto_face, sup_slope_off, SsdError};
use crate::checks::{worst_by_name, Check};
use crate::free_space::{free_norm, pairing, FreeElement, MoleculeCombination};
use crate::lip::{
    f_gamma_construct, g_gamma_construct, mcshane_extend, same_space, Cutoff, FGamma, LipFunction,
};
use crate::metric::{PointedMetricSpace, BASE};
use crate::tol::tau_lp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationStatus {
    Certified,
    RhoTooLarge,
    PreconditionFailed,
}

/// Every constant of the construction. Entries not reached before a
/// failure are NaN (serialized as `null`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Main1Constants {
    pub gamma: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub t: f64,
    pub t0: f64,
    /// Measured supremum of `|<G_gamma, m_pq>|` over pairs leaving `N`.
    pub s: f64,
    /// Target ratio `(K + gamma/2) / (K + gamma)`.
    pub c: f64,
    pub k: f64,
    pub rho: f64,
    /// `max(eps, beta eps / gamma) + 2 sqrt(eps)`.
    pub bound: f64,
    /// Optimal value of the finite-face projection on `N`.
    pub projection: f64,
}

impl Main1Constants {
    fn new(gamma: f64, epsilon: f64) -> Self {
        Self {
            gamma,
            epsilon,
            beta: f64::NAN,
            t: f64::NAN,
            t0: f64::NAN,
            s: f64::NAN,
            c: f64::NAN,
            k: f64::NAN,
            rho: f64::NAN,
            bound: f64::NAN,
            projection: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationResult {
    pub status: PerturbationStatus,
    pub message: Option<String>,
    pub constants: Main1Constants,
    pub g: LipFunction,
    pub psi: Option<LipFunction>,
    /// `lip(psi - g)`.
    pub distance: Option<f64>,
    /// `|<psi, mu> - lip(psi)|`.
    pub attainment_gap: Option<f64>,
    pub verified: Vec<Check>,
}

/// Everything that depends only on the space, the combination and `eps`.
#[derive(Debug, Clone)]
pub struct Main1Setup {
    pub original: Arc<PointedMetricSpace>,
    pub fattened: Arc<PointedMetricSpace>,
    pub combination: MoleculeCombination,
    /// The combination as an element of the fattened free space.
    pub mu: FreeElement,
    /// Clipped extension of the norming function from `N`.
    pub f: LipFunction,
    pub f_gamma: FGamma,
    pub xi: Cutoff,
    pub g_gamma: LipFunction,
    pub in_n: Vec<bool>,
    pub constants: Main1Constants,
    pub checks: Vec<Check>,
}

/// `bigT` left-hand side.
fn big_t_lhs(beta: f64, gamma: f64, t: f64, t0: f64) -> f64 {
    (2.0 * beta + 1.5 * gamma) / (t0 + gamma) + (beta + 0.5 * gamma) / (t - beta)
}

impl Main1Setup {
    /// Runs the `g`-independent part of the construction. `combination` is
    /// read with its pairs and weights in the fattened metric; `f` is a
    /// common norming function on the original space.
    pub fn prepare(
        original: &Arc<PointedMetricSpace>,
        gamma: f64,
        combination: &MoleculeCombination,
        f: &LipFunction,
        epsilon: f64,
    ) -> Result<Self, SsdError> {
        let tau = tau_lp();
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(SsdError::pre(
                "input",
                format!("epsilon {epsilon} outside (0, 1)"),
            ));
        }
        let fattened = Arc::new(original.gamma_fatten(gamma)?);
        if combination.space().len() != original.len() {
            return Err(SsdError::pre(
                "input",
                "combination lives on a different point set",
            ));
        }
        if !same_space(f.space(), original) {
            return Err(SsdError::pre("input", "f must live on the original space"));
        }
        let combination = combination.on_space(fattened.clone())?;
        let mu = combination.to_element();
        let mut constants = Main1Constants::new(gamma, epsilon);
        let mut checks = Vec::new();

        let weight = combination.total_weight();
        if (weight - 1.0).abs() > tau {
            return Err(SsdError::pre(
                "input",
                format!("weights sum to {weight}, expected 1"),
            ));
        }
        let pairs = combination.pairs();
        // the x_i and the y_j are disjoint
        for &(x, _) in &pairs {
            if let Some(&(_, y)) = pairs.iter().find(|&&(_, y)| y == x) {
                return Err(SsdError::pre(
                    "disjointness",
                    format!("point {x} is both an x_i and a y_j (pair ending at {y})"),
                ));
            }
        }
        if f.lip_norm() > 1.0 + tau {
            return Err(SsdError::pre(
                "input",
                format!("f has Lipschitz norm {}", f.lip_norm()),
            ));
        }
        for (i, &(x, y)) in pairs.iter().enumerate() {
            let slope = f.slope(x, y);
            if (slope - 1.0).abs() > tau {
                return Err(SsdError::pre(
                    "input",
                    format!("f has slope {slope} on pair {i}, expected 1"),
                ));
            }
        }

        // N, beta and the clipped extension
        let n = original.len();
        let mut in_n = vec![false; n];
        in_n[BASE] = true;
        for &(x, y) in &pairs {
            in_n[x] = true;
            in_n[y] = true;
        }
        let n_set: Vec<usize> = (0..n).filter(|&p| in_n[p]).collect();
        let beta = original.radius_beta(&n_set)?;
        constants.beta = beta;
        let on_n: Vec<f64> = n_set.iter().map(|&p| f.value(p)).collect();
        let f_clipped = mcshane_extend(original, &n_set, &on_n, 1.0, Some((-beta, beta)))?;

        // f_gamma
        let f_gamma = f_gamma_construct(&fattened, gamma, &pairs, &f_clipped)?;
        checks.extend(f_gamma.checks.iter().cloned());
        checks.push(Check::eq(
            "f_gamma_pairing",
            pairing(&f_gamma.function, &mu)?,
            1.0,
            tau,
        ));

        // T, T0 and G_gamma
        let (mut t, mut t0) = (f64::NAN, f64::NAN);
        for k in 0..64 {
            let cand = beta + 2f64.powi(k);
            let cand0 = 0.25 * gamma * (cand - beta) / (beta + 0.5 * gamma);
            if big_t_lhs(beta, gamma, cand, cand0) < 0.75 {
                t = cand;
                t0 = cand0;
                break;
            }
        }
        if t.is_nan() {
            return Err(SsdError::pre(
                "bigT",
                "no T of the form beta + 2^k below 2^64",
            ));
        }
        constants.t = t;
        constants.t0 = t0;
        checks.push(Check::lt("bigT", big_t_lhs(beta, gamma, t, t0), 0.75, 0.0));
        let xi = Cutoff::new(beta, t)?;
        let g_gamma = g_gamma_construct(&f_gamma, &xi, original)?;
        checks.push(Check::eq(
            "G_gamma_pairing",
            pairing(&g_gamma, &mu)?,
            1.0,
            tau,
        ));

        // slopes of G_gamma off N, then K
        let s = sup_slope_off(&g_gamma, &in_n);
        constants.s = s;
        if s >= 1.0 {
            return Err(SsdError::pre(
                "outer_slopes",
                format!("off-N supremum {s} is not below 1"),
            ));
        }
        let c = (s.max(0.5 + 10.0 * tau) + 1.0) / 2.0;
        let k = gamma * (c - 0.5) / (1.0 - c);
        constants.c = c;
        constants.k = k;
        checks.push(Check::lt(
            "outer_slopes",
            s,
            (k + 0.5 * gamma) / (k + gamma),
            10.0 * tau,
        ));
        let inner = (2.0 * beta + 0.5 * gamma) / (2.0 * beta + gamma);
        let near_far = (t0 + 0.75 * gamma) / (t0 + gamma);
        for p in 0..n {
            for q in p + 1..n {
                if in_n[p] && in_n[q] {
                    continue;
                }
                let slope = g_gamma.slope(p, q).abs();
                let (rp, rq) = (original.d(BASE, p), original.d(BASE, q));
                if rp <= beta && rq <= beta {
                    checks.push(Check::le("outer_slopes_inside_radius", slope, inner, tau));
                } else if original.d(p, q) < t0 {
                    checks.push(Check::le("outer_slopes_close_pairs", slope, near_far, tau));
                } else {
                    checks.push(Check::le("outer_slopes_far_pairs", slope, 0.75, tau));
                }
            }
        }

        // rho, half of the admissible window
        let se = epsilon.sqrt();
        let rho = 0.5 * (se * gamma / (2.0 * (k + gamma)) - beta * epsilon / gamma) / (1.0 - se);
        constants.rho = rho;
        constants.bound = epsilon.max(beta * epsilon / gamma) + 2.0 * se;
        if !(rho > 0.0) {
            return Err(SsdError::pre(
                "rho",
                format!(
                    "epsilon too large for (beta, gamma, K) = ({beta}, {gamma}, {k}): rho = {rho}"
                ),
            ));
        }
        let lhs = (1.0 - se) + se * c + beta * epsilon / gamma;
        checks.push(Check::lt(
            "parameter1",
            lhs,
            (1.0 - se) * (1.0 - rho) + se,
            0.0,
        ));

        let checks = worst_by_name(checks);
        if let Some(bad) = checks.iter().find(|c| !c.ok) {
            return Err(SsdError::pre(
                "setup",
                format!("check {} failed with margin {:e}", bad.name, bad.margin),
            ));
        }
        Ok(Self {
            original: original.clone(),
            fattened,
            combination,
            mu,
            f: f_clipped,
            f_gamma,
            xi,
            g_gamma,
            in_n,
            constants,
            checks,
        })
    }

    pub fn rho(&self) -> f64 {
        self.constants.rho
    }

    fn failed(
        &self,
        status: PerturbationStatus,
        g: &LipFunction,
        message: String,
        verified: Vec<Check>,
    ) -> PerturbationResult {
        PerturbationResult {
            status,
            message: Some(message),
            constants: self.constants,
            g: g.clone(),
            psi: None,
            distance: None,
            attainment_gap: None,
            verified,
        }
    }

    /// Runs the `g`-dependent steps for a 1-Lipschitz `g` on the fattened
    /// space with `<g, mu> > 1 - rho`.
    pub fn run(&self, g: &LipFunction) -> Result<PerturbationResult, SsdError> {
        let tau = tau_lp();
        let mut constants = self.constants;
        let mut verified = self.checks.clone();
        let precondition = PerturbationStatus::PreconditionFailed;
        if !same_space(g.space(), &self.fattened) {
            return Ok(self.failed(
                precondition,
                g,
                "g must live on the fattened space".into(),
                verified,
            ));
        }
        if (g.lip_norm() - 1.0).abs() > tau {
            let msg = format!("g has Lipschitz norm {}, expected 1", g.lip_norm());
            return Ok(self.failed(precondition, g, msg, verified));
        }
        let (eps, gamma, rho, c) = (
            constants.epsilon,
            constants.gamma,
            constants.rho,
            constants.c,
        );
        let gm = pairing(g, &self.mu)?;
        if gm <= 1.0 - rho {
            let msg = format!("<g, mu> = {gm} is not above 1 - rho = {}", 1.0 - rho);
            return Ok(self.failed(precondition, g, msg, verified));
        }

        // h
        let se = eps.sqrt();
        let h = g.combine(1.0 - se, &self.g_gamma, se)?;
        let h_mu = pairing(&h, &self.mu)?;
        let h_off = sup_slope_off(&h, &self.in_n);
        let h_norm = h.lip_norm();
        verified.push(Check::lt(
            "h_pairing_lower",
            (1.0 - se) * (1.0 - rho) + se,
            h_mu,
            -tau,
        ));
        verified.push(Check::le("h_off_n", h_off, (1.0 - se) + se * c, tau));
        verified.push(Check::lt("h_attains_on_n", h_off, h_mu, 0.0));
        let n = self.in_n.len();
        let h_on_n = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .filter(|&(p, q)| self.in_n[p] && self.in_n[q])
            .map(|(p, q)| h.slope(p, q).abs())
            .fold(0.0, f64::max);
        verified.push(Check::eq("h_norm_on_n", h_on_n, h_norm, tau));

        // phi: projection of h|_N onto the face of norm ||h|| on (N, d_gamma)
        let n_set: Vec<usize> = (0..n).filter(|&p| self.in_n[p]).collect();
        let proj = project_onto_face(
            &self.fattened,
            &n_set,
            self.mu.masses(),
            h_norm,
            h_norm,
            h.values(),
        )?;
        constants.projection = proj.t;
        if proj.t >= eps {
            let msg = format!(
                "projection distance {} is not below epsilon; a closer g is needed",
                proj.t
            );
            let mut r = self.failed(PerturbationStatus::RhoTooLarge, g, msg, verified);
            r.constants = constants;
            return Ok(r);
        }

        // psi
        let psi_values: Vec<f64> = (0..n)
            .map(|p| {
                if self.in_n[p] {
                    proj.values[p]
                } else {
                    h.value(p)
                }
            })
            .collect();
        let psi = LipFunction::new(self.fattened.clone(), psi_values)?;
        let psi_mu = pairing(&psi, &self.mu)?;
        let psi_norm = psi.lip_norm();
        let attainment_gap = (psi_mu - psi_norm).abs();
        let fat = &self.fattened;
        let t = proj.t;
        let radius = fat.radius_beta(&n_set)?;
        for p in 0..n {
            for q in p + 1..n {
                let slope = psi.slope(p, q).abs();
                let name = match (self.in_n[p], self.in_n[q]) {
                    (true, true) => "attain_both_in_n",
                    (false, false) => "attain_both_off_n",
                    _ => "attain_mixed",
                };
                verified.push(Check::le(name, slope, psi_mu, tau));
                if self.in_n[p] != self.in_n[q] {
                    let inside = if self.in_n[p] { p } else { q };
                    let chain = (psi.value(inside) - h.value(inside)).abs() / (fat.d(p, q));
                    verified.push(Check::le("mixed_chain", chain, t * radius / gamma, tau));
                }
            }
        }
        verified.push(Check::le(
            "mixed_estimate",
            t * radius / gamma + h_off,
            psi_mu,
            tau,
        ));
        verified.push(Check::eq("norm_attainment", psi_mu, psi_norm, 1e-8));
        let psi_h = psi.distance(&h)?;
        verified.push(Check::le(
            "psi_minus_h",
            psi_h,
            t.max(t * radius / gamma),
            tau,
        ));
        verified.push(Check::le("h_minus_g", h.distance(g)?, 2.0 * se, tau));
        let distance = psi.distance(g)?;
        verified.push(Check::le("final_bound", distance, constants.bound, tau));
        let verified = worst_by_name(verified);
        let failed = verified.iter().find(|c| !c.ok).map(|c| c.name.clone());
        let (status, message) = match failed {
            None => (PerturbationStatus::Certified, None),
            Some(name) => (
                PerturbationStatus::PreconditionFailed,
                Some(format!("check {name} failed")),
            ),
        };
        Ok(PerturbationResult {
            status,
            message,
            constants,
            g: g.clone(),
            psi: Some(psi),
            distance: Some(distance),
            attainment_gap: Some(attainment_gap),
            verified,
        })
    }
}

/// Full pipeline; violated input conditions become a
/// `precondition_failed` result rather than an error.
pub fn main1_pipeline(
    original: &Arc<PointedMetricSpace>,
    gamma: f64,
    combination: &MoleculeCombination,
    f: &LipFunction,
    g: &LipFunction,
    epsilon: f64,
) -> Result<PerturbationResult, SsdError> {
    match Main1Setup::prepare(original, gamma, combination, f, epsilon) {
        Ok(setup) => setup.run(g),
        Err(e) if e.is_precondition() => Ok(PerturbationResult {
            status: PerturbationStatus::PreconditionFailed,
            message: Some(e.to_string()),
            constants: Main1Constants::new(gamma, epsilon),
            g: g.clone(),
            psi: None,
            distance: None,
            attainment_gap: None,
            verified: Vec::new(),
        }),
        Err(e) => Err(e),
    }
}

/// A 1-Lipschitz `f` on `original` with `f(x_i) - f(y_i) = d(x_i, y_i)` for
/// every term, found as a norming functional of the combination read in the
/// original metric.
pub fn find_common_norming(
    original: &Arc<PointedMetricSpace>,
    combination: &MoleculeCombination,
) -> Result<LipFunction, SsdError> {
    let element = combination.to_element_on(original.clone());
    let weight = combination.total_weight();
    let report = free_norm(&element)?;
    if (report.value - weight).abs() > tau_lp() * (1.0 + weight) {
        return Err(SsdError::pre(
            "common_norming",
            format!(
                "norm {} in the original metric is below the weight {weight}",
                report.value
            ),
        ));
    }
    let f = report.functional;
    for &(x, y) in &combination.pairs() {
        if (f.slope(x, y) - 1.0).abs() > tau_lp() {
            return Err(SsdError::pre(
                "common_norming",
                format!("pair ({x}, {y}) is not normed"),
            ));
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_space::{norming_functional, Molecule};
    use crate::gallery::line;

    fn setup_line() -> (Arc<PointedMetricSpace>, MoleculeCombination, LipFunction) {
        let m = Arc::new(line(4, 1.0).unwrap());
        let combo = MoleculeCombination::new(
            m.clone(),
            vec![Molecule {
                lambda: 1.0,
                x: 1,
                y: 0,
            }],
        )
        .unwrap();
        let f = LipFunction::new(m.clone(), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        (m, combo, f)
    }

    #[test]
    fn line_constants() {
        let (m, combo, f) = setup_line();
        let s = Main1Setup::prepare(&m, 1.0, &combo, &f, 0.04).unwrap();
        assert_eq!(s.constants.beta, 1.0);
        assert_eq!(s.constants.t, 33.0);
        assert!((s.constants.bound - 0.44).abs() < 1e-12);
        assert!(s.constants.rho > 0.0);
    }

    #[test]
    fn line_certified_with_norming_g() {
        let (m, combo, f) = setup_line();
        let s = Main1Setup::prepare(&m, 1.0, &combo, &f, 0.04).unwrap();
        let g = norming_functional(&s.mu).unwrap();
        let r = s.run(&g).unwrap();
        assert_eq!(r.status, PerturbationStatus::Certified, "{:?}", r.verified);
        assert!(r.distance.unwrap() <= 0.44);
    }

    #[test]
    fn overlapping_pairs_fail_disjointness() {
        let m = Arc::new(line(4, 1.0).unwrap());
        let combo = MoleculeCombination::new(
            m.clone(),
            vec![
                Molecule {
                    lambda: 0.5,
                    x: 2,
                    y: 1,
                },
                Molecule {
                    lambda: 0.5,
                    x: 1,
                    y: 0,
                },
            ],
        )
        .unwrap();
        let f = LipFunction::new(m.clone(), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let g = LipFunction::new(
            Arc::new(m.gamma_fatten(1.0).unwrap()),
            vec![0.0, 2.0, 4.0, 6.0],
        )
        .unwrap();
        let r = main1_pipeline(&m, 1.0, &combo, &f, &g, 0.04).unwrap();
        assert_eq!(r.status, PerturbationStatus::PreconditionFailed);
        assert!(r.message.unwrap().contains("disjointness"));
    }
}
