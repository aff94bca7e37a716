//! The `4 eps` certificate for the molecule `m_xy` of a Petr truncation.

use std::sync::Arc;

use serde::Serialize;

use super::{distance_to_face, exposedness_probe, project_onto_face, SsdError};
use crate::checks::{worst_by_name, Check};
use crate::free_space::{dual_face, lipschitz_rows, pairing, value_col, FreeElement};
use crate::gallery::{FamilyKind, MetricFamily};
use crate::lip::{mcshane_extend, LipFunction};
use crate::lp::polytope_vertices;
use crate::metric::PointedMetricSpace;
use crate::tol::tau_lp;

const X: usize = 0;
const Y: usize = 1;
const MAX_SUBSETS: usize = 2_000_000;

/// Point index of `z_n` in a truncation.
fn z(n: usize) -> usize {
    n + 1
}

fn epsilon_seq(family: &MetricFamily) -> Result<impl Fn(usize) -> f64 + '_, SsdError> {
    match family.kind {
        FamilyKind::Petr { ratio } if ratio > 0.0 && ratio < 1.0 => {
            Ok(move |n: usize| ratio.powi(n as i32))
        }
        _ => Err(SsdError::pre(
            "petr",
            format!("{} is not a Petr family with ratio in (0, 1)", family.name),
        )),
    }
}

/// First index with `eps_n < eps`; every later index satisfies it too.
pub fn petr_n0(family: &MetricFamily, epsilon: f64) -> Result<usize, SsdError> {
    let e = epsilon_seq(family)?;
    if !(epsilon > 0.0) {
        return Err(SsdError::pre("petr", "epsilon must be positive"));
    }
    (1..10_000)
        .find(|&n| e(n) < epsilon)
        .ok_or_else(|| SsdError::pre("petr", "epsilon too small"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaCut {
    pub gamma: f64,
    /// `vertex_enumeration` (exact worst case over the slab) or `probe`
    /// (sampled lower bound, used when the slab has too many candidate
    /// vertices).
    pub method: String,
    /// Worst distance from the slab to the face on `M_0` at `gamma`.
    pub worst_dist: f64,
    pub vertices: usize,
}

/// Largest `gamma = eps 2^-k` (`k >= 1`) such that every 1-Lipschitz `g` on
/// `M_0` with `<g, m_xy> >= 1 - gamma` lies within `eps / 2` of `D(m_xy)`.
pub fn petr_gamma_cut(
    family: &MetricFamily,
    n0: usize,
    epsilon: f64,
) -> Result<GammaCut, SsdError> {
    let _ = epsilon_seq(family)?;
    let m0 = Arc::new(family.generate(n0)?.space);
    let mu = FreeElement::molecule(m0.clone(), X, Y)?;
    let face = dual_face(&mu)?;
    let n = m0.len();
    let dim = n - 1;
    let points: Vec<usize> = (0..n).collect();
    let rows = lipschitz_rows(&m0, &points, &value_col, 1.0);
    let mut gamma = epsilon;
    for _ in 0..40 {
        gamma *= 0.5;
        let mut a = Vec::with_capacity((rows.len() + 1) * dim);
        let mut b = Vec::with_capacity(rows.len() + 1);
        for r in &rows {
            let mut dense = vec![0.0; dim];
            for &(c, v) in &r.coeffs {
                dense[c] += v;
            }
            a.extend(dense);
            b.push(r.rhs);
        }
        // <g, m_xy> = -g(y) / d(x, y) >= 1 - gamma
        let mut slab = vec![0.0; dim];
        slab[Y - 1] = 1.0 / m0.d(X, Y);
        a.extend(slab);
        b.push(-(1.0 - gamma));
        let (worst, method, count) = match polytope_vertices(&a, &b, dim, 1e-10, MAX_SUBSETS) {
            Some(verts) => {
                let mut worst = 0.0f64;
                for v in &verts {
                    let mut vals = vec![0.0];
                    vals.extend_from_slice(v);
                    let g = LipFunction::new(m0.clone(), vals)?;
                    worst = worst.max(distance_to_face(&face, &g)?.0);
                }
                (worst, "vertex_enumeration", verts.len())
            }
            None => {
                let curve = exposedness_probe(&mu, &[gamma], 256, 0x5eed)?;
                (curve.points[0].worst_dist, "probe", 0)
            }
        };
        if worst <= epsilon / 2.0 {
            return Ok(GammaCut {
                gamma,
                method: method.into(),
                worst_dist: worst,
                vertices: count,
            });
        }
    }
    Err(SsdError::pre("petr", "no admissible gamma found"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case3Row {
    pub n: usize,
    pub x_z: f64,
    pub x_z_bound: f64,
    pub z_y: f64,
    pub z_y_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PetrCertificate {
    pub epsilon: f64,
    pub index: usize,
    pub n0: usize,
    pub gamma_cut: GammaCut,
    pub h: LipFunction,
    /// `lip(h|_{M_0} - f~)`, the projection distance on `M_0`.
    pub projection: f64,
    /// `lip(h - f)`.
    pub distance: f64,
    pub case3: Vec<Case3Row>,
    pub checks: Vec<Check>,
    pub certified: bool,
}

/// Builds `h` with `h(m_xy) = 1` from `f` with `<f, m_xy> > 1 - gamma_cut`
/// on the Petr truncation at `index`, and checks `lip(h - f) <= 4 eps`
/// together with every intermediate estimate.
pub fn petr_certificate(
    family: &MetricFamily,
    index: usize,
    epsilon: f64,
    f: &LipFunction,
) -> Result<PetrCertificate, SsdError> {
    let eps_n = epsilon_seq(family)?;
    let tau = tau_lp();
    let space = Arc::new(family.generate(index)?.space);
    if **f.space() != *space {
        return Err(SsdError::pre(
            "petr",
            "f does not live on the requested truncation",
        ));
    }
    let n0 = petr_n0(family, epsilon)?.min(index);
    let gc = petr_gamma_cut(family, n0, epsilon)?;
    let gamma = gc.gamma;
    if f.lip_norm() > 1.0 + tau {
        return Err(SsdError::pre(
            "petr",
            format!("f has Lipschitz norm {}", f.lip_norm()),
        ));
    }
    let fm = f.slope(X, Y);
    if fm <= 1.0 - gamma {
        return Err(SsdError::pre(
            "petr",
            format!("<f, m_xy> = {fm} is not above 1 - gamma = {}", 1.0 - gamma),
        ));
    }

    // project the normalized restriction onto D(m_xy) on M_0
    let m0: Vec<usize> = (0..z(n0) + 1).collect();
    let m0_space: Arc<PointedMetricSpace> = Arc::new(family.generate(n0)?.space);
    let f0 = LipFunction::new(m0_space.clone(), f.values()[..m0.len()].to_vec())?;
    let f0_norm = f0.lip_norm();
    let f_tilde = f0.scale(1.0 / f0_norm);
    let m_xy = FreeElement::molecule(m0_space.clone(), X, Y)?;
    let proj = project_onto_face(&m0_space, &m0, m_xy.masses(), 1.0, 1.0, f_tilde.values())?;
    let h0: Vec<f64> = m0.iter().map(|&p| proj.values[p]).collect();
    let h = mcshane_extend(&space, &m0, &h0, 1.0, None)?;

    let mut checks = vec![
        Check::eq("slope_xy", h.slope(X, Y), 1.0, tau),
        Check::le("h_norm", h.lip_norm(), 1.0, tau),
        Check::lt("m0_projection", proj.t, epsilon, 0.0),
        Check::eq(
            "pairing_m_xy",
            pairing(&h, &FreeElement::molecule(space.clone(), X, Y)?)?,
            1.0,
            tau,
        ),
    ];
    let d = |a: usize, b: usize| h.slope(a, b) - f.slope(a, b);
    checks.push(Check::lt("case1", d(X, Y).abs(), gamma, 0.0));
    let mut case3 = Vec::new();
    for n in 1..=index {
        let e = eps_n(n);
        let zn = z(n);
        let b_xz = 2.0 * e + 2.0 * gamma;
        let b_zy = b_xz / (1.0 + 2.0 * e);
        checks.push(Check::le("xzn2_x_z", 1.0 - b_xz, f.slope(X, zn), tau));
        checks.push(Check::le("xzn2_z_y", 1.0 - b_zy, f.slope(zn, Y), tau));
        checks.push(Check::le("xzn3_x_z", 1.0 - 2.0 * e, h.slope(X, zn), tau));
        checks.push(Check::le(
            "xzn3_z_y",
            1.0 - 2.0 * e / (1.0 + 2.0 * e),
            h.slope(zn, Y),
            tau,
        ));
        let (vx, vy) = (d(X, zn).abs(), d(zn, Y).abs());
        if n <= n0 {
            let chain = proj.t + (1.0 - f0_norm);
            checks.push(Check::le("case2_chain_x_z", vx, chain, tau));
            checks.push(Check::le("case2_chain_z_y", vy, chain, tau));
            checks.push(Check::lt("case2_x_z", vx, 2.0 * epsilon, 0.0));
            checks.push(Check::lt("case2_z_y", vy, 2.0 * epsilon, 0.0));
        } else {
            checks.push(Check::le("case3_x_z", vx, b_xz, tau));
            checks.push(Check::le("case3_z_y", vy, b_zy, tau));
            checks.push(Check::lt("case3_bound", b_xz, 4.0 * epsilon, 0.0));
            case3.push(Case3Row {
                n,
                x_z: vx,
                x_z_bound: b_xz,
                z_y: vy,
                z_y_bound: b_zy,
            });
        }
    }
    for i in 1..=index {
        for j in i + 1..=index {
            let v = d(z(i), z(j)).abs();
            let (name, bound) = match (i <= n0, j <= n0) {
                (true, true) => ("case4_inner", 2.0 * epsilon),
                (true, false) => ("case4_mixed", 3.0 * epsilon),
                _ => ("case4_outer", 4.0 * epsilon),
            };
            checks.push(Check::lt(name, v, bound, 0.0));
        }
    }
    let distance = h.distance(f)?;
    checks.push(Check::le("final_4eps", distance, 4.0 * epsilon, tau));
    let checks = worst_by_name(checks);
    let certified = checks.iter().all(|c| c.ok);
    Ok(PetrCertificate {
        epsilon,
        index,
        n0,
        gamma_cut: gc,
        h,
        projection: proj.t,
        distance,
        case3,
        checks,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_space::norming_functional;

    #[test]
    fn n0_for_tenth() {
        assert_eq!(petr_n0(&MetricFamily::petr(), 0.1).unwrap(), 4);
    }

    #[test]
    fn exact_norming_input() {
        let fam = MetricFamily::petr();
        let space = Arc::new(fam.generate(8).unwrap().space);
        let f = norming_functional(&FreeElement::molecule(space, X, Y).unwrap()).unwrap();
        let cert = petr_certificate(&fam, 8, 0.1, &f).unwrap();
        assert!(cert.certified, "{:?}", cert.checks);
        assert!(cert.distance <= 0.1 + 1e-9);
    }
}
