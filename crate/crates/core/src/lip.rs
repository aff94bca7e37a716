//! Lipschitz functions vanishing at the base point.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::{worst_by_name, Check};
use crate::metric::{MetricError, PointedMetricSpace, BASE};
use crate::tol::tau_lp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LipError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at point {0}")]
    NonFinite(usize),
    #[error("functions live on different spaces")]
    SpaceMismatch,
    #[error("slope {slope} on pair ({p}, {q}) exceeds the bound {bound}")]
    NotLipschitz {
        p: usize,
        q: usize,
        slope: f64,
        bound: f64,
    },
    #[error("the base point must belong to the extension set")]
    BaseNotInSubset,
    #[error("value {value} at point {point} lies outside the clip range [{lo}, {hi}]")]
    OutsideClip {
        point: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("{step}: {detail}")]
    Precondition { step: &'static str, detail: String },
}

/// Real values on the points of a space, shifted to vanish at the base.
#[derive(Debug, Clone)]
pub struct LipFunction {
    space: Arc<PointedMetricSpace>,
    values: Vec<f64>,
    lip: f64,
}

/// Whether two handles describe the same space.
pub(crate) fn same_space(a: &Arc<PointedMetricSpace>, b: &Arc<PointedMetricSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn lip_of(space: &PointedMetricSpace, values: &[f64]) -> f64 {
    let n = values.len();
    let mut best = 0.0f64;
    for p in 0..n {
        for q in p + 1..n {
            best = best.max((values[p] - values[q]).abs() / space.d(p, q));
        }
    }
    best
}

impl LipFunction {
    /// Wraps `values`, subtracting `values[0]` from every entry.
    pub fn new(space: Arc<PointedMetricSpace>, mut values: Vec<f64>) -> Result<Self, LipError> {
        if values.len() != space.len() {
            return Err(LipError::LengthMismatch {
                expected: space.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LipError::NonFinite(i));
        }
        let shift = values[BASE];
        if shift != 0.0 {
            values.iter_mut().for_each(|v| *v -= shift);
        }
        let lip = lip_of(&space, &values);
        Ok(Self { space, values, lip })
    }

    pub fn zero(space: Arc<PointedMetricSpace>) -> Self {
        let n = space.len();
        Self {
            space,
            values: vec![0.0; n],
            lip: 0.0,
        }
    }

    pub fn space(&self) -> &Arc<PointedMetricSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, p: usize) -> f64 {
        self.values[p]
    }

    pub fn lip_norm(&self) -> f64 {
        self.lip
    }

    /// `(f(p) - f(q)) / d(p, q)`.
    pub fn pair_slope(&self, p: usize, q: usize) -> Result<f64, LipError> {
        self.space.check_pair(p, q)?;
        Ok(self.slope(p, q))
    }

    pub(crate) fn slope(&self, p: usize, q: usize) -> f64 {
        (self.values[p] - self.values[q]) / self.space.d(p, q)
    }

    /// Full matrix of signed slopes; the diagonal is zero.
    pub fn slope_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.values.len();
        (0..n)
            .map(|p| {
                (0..n)
                    .map(|q| if p == q { 0.0 } else { self.slope(p, q) })
                    .collect()
            })
            .collect()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &LipFunction, b: f64) -> Result<LipFunction, LipError> {
        if !same_space(&self.space, &other.space) {
            return Err(LipError::SpaceMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        LipFunction::new(self.space.clone(), values)
    }

    pub fn scale(&self, a: f64) -> LipFunction {
        let values = self.values.iter().map(|v| a * v).collect();
        LipFunction {
            space: self.space.clone(),
            values,
            lip: self.lip * a.abs(),
        }
    }

    /// `lip_norm(self - other)`.
    pub fn distance(&self, other: &LipFunction) -> Result<f64, LipError> {
        Ok(self.combine(1.0, other, -1.0)?.lip_norm())
    }

    /// The same values read in another metric on the same point set.
    pub fn on_space(&self, space: Arc<PointedMetricSpace>) -> Result<LipFunction, LipError> {
        LipFunction::new(space, self.values.clone())
    }

    /// Returns the minimal peaking constant: the largest `|slope|` over
    /// unordered pairs other than `{x, y}`, provided the slope on `(x, y)`
    /// is 1 and that maximum stays below `1 - tau_lp`.
    pub fn peaking_check(&self, x: usize, y: usize) -> Result<Option<f64>, LipError> {
        self.space.check_pair(x, y)?;
        let tau = tau_lp();
        if (self.slope(x, y) - 1.0).abs() > tau {
            return Ok(None);
        }
        let n = self.values.len();
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                if (p == x && q == y) || (p == y && q == x) {
                    continue;
                }
                worst = worst.max(self.slope(p, q).abs());
            }
        }
        Ok((worst < 1.0 - tau).then_some(worst))
    }
}

impl Serialize for LipFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("LipFunction", 2)?;
        st.serialize_field("values", &self.values)?;
        st.serialize_field("lip_norm", &self.lip)?;
        st.end()
    }
}

impl PartialEq for LipFunction {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.values == other.values
    }
}

/// `z -> (d(x,y)/2) (d(z,y) - d(z,x)) / (d(z,y) + d(z,x))`, shifted to vanish
/// at the base. Fails if the result is not 1-Lipschitz within `tau_lp`.
pub fn aux_f_xy(
    space: &Arc<PointedMetricSpace>,
    x: usize,
    y: usize,
) -> Result<LipFunction, LipError> {
    space.check_pair(x, y)?;
    let half = space.d(x, y) / 2.0;
    let values = (0..space.len())
        .map(|z| {
            let (a, b) = (space.d(z, y), space.d(z, x));
            half * (a - b) / (a + b)
        })
        .collect();
    let f = LipFunction::new(space.clone(), values)?;
    if f.lip_norm() > 1.0 + tau_lp() {
        let (p, q) = argmax_slope(&f);
        return Err(LipError::NotLipschitz {
            p,
            q,
            slope: f.slope(p, q).abs(),
            bound: 1.0,
        });
    }
    Ok(f)
}

fn argmax_slope(f: &LipFunction) -> (usize, usize) {
    let n = f.values.len();
    let mut best = (0, 1, -1.0);
    for p in 0..n {
        for q in p + 1..n {
            let s = f.slope(p, q).abs();
            if s > best.2 {
                best = (p, q, s);
            }
        }
    }
    (best.0, best.1)
}

/// Upper McShane formula `z -> min_{p in N} (f_N(p) + L d(z, p))` with no
/// anchoring at the base.
pub fn mcshane_upper(
    space: &PointedMetricSpace,
    subset: &[usize],
    values: &[f64],
    l: f64,
) -> Vec<f64> {
    (0..space.len())
        .map(|z| {
            subset
                .iter()
                .zip(values)
                .map(|(&p, &v)| v + l * space.d(z, p))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn check_lipschitz_on(
    space: &PointedMetricSpace,
    subset: &[usize],
    values: &[f64],
    l: f64,
) -> Result<(), LipError> {
    let tau = tau_lp();
    for a in 0..subset.len() {
        for b in a + 1..subset.len() {
            let (p, q) = (subset[a], subset[b]);
            if p == q {
                continue;
            }
            let slope = (values[a] - values[b]).abs() / space.d(p, q);
            if slope > l * (1.0 + tau) + tau {
                return Err(LipError::NotLipschitz {
                    p,
                    q,
                    slope,
                    bound: l,
                });
            }
        }
    }
    Ok(())
}

/// Extends `values` given on `subset` to the whole space by the upper
/// McShane formula with constant `l`, optionally clamped to `[lo, hi]`.
/// The base must belong to `subset` with value 0.
pub fn mcshane_extend(
    space: &Arc<PointedMetricSpace>,
    subset: &[usize],
    values: &[f64],
    l: f64,
    clip: Option<(f64, f64)>,
) -> Result<LipFunction, LipError> {
    if subset.len() != values.len() {
        return Err(LipError::LengthMismatch {
            expected: subset.len(),
            got: values.len(),
        });
    }
    for &p in subset {
        space.check_index(p)?;
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(LipError::NonFinite(subset[i]));
    }
    let base_at = subset
        .iter()
        .position(|&p| p == BASE)
        .ok_or(LipError::BaseNotInSubset)?;
    if values[base_at].abs() > tau_lp() {
        return Err(LipError::Precondition {
            step: "mcshane_extend",
            detail: format!("value at the base is {}, expected 0", values[base_at]),
        });
    }
    check_lipschitz_on(space, subset, values, l)?;
    if let Some((lo, hi)) = clip {
        if let Some(i) = values
            .iter()
            .position(|&v| v < lo - tau_lp() || v > hi + tau_lp())
        {
            return Err(LipError::OutsideClip {
                point: subset[i],
                value: values[i],
                lo,
                hi,
            });
        }
    }
    let mut out = mcshane_upper(space, subset, values, l);
    if let Some((lo, hi)) = clip {
        out.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
    }
    for (&p, &v) in subset.iter().zip(values) {
        out[p] = v;
    }
    out[BASE] = 0.0;
    LipFunction::new(space.clone(), out)
}

/// The cut-off `xi`: 1 on `[0, beta]`, affine down to 0 at `t`, 0 beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub beta: f64,
    pub t: f64,
}

impl Cutoff {
    pub fn new(beta: f64, t: f64) -> Result<Self, LipError> {
        if !(beta > 0.0 && t > beta && t.is_finite()) {
            return Err(LipError::Precondition {
                step: "cutoff",
                detail: format!("need T > beta > 0, got beta = {beta}, T = {t}"),
            });
        }
        Ok(Self { beta, t })
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.beta {
            1.0
        } else if s >= self.t {
            0.0
        } else {
            (self.t - s) / (self.t - self.beta)
        }
    }
}

/// Output of [`f_gamma_construct`].
#[derive(Debug, Clone)]
pub struct FGamma {
    /// `f_gamma` on the fattened space, vanishing at the base.
    pub function: LipFunction,
    /// Constant subtracted from the raw piecewise values to reach the base
    /// normalization (nonzero only when the base is one of the `x_i`).
    pub offset: f64,
    /// The set `{0} ∪ {x_i} ∪ {y_i}`, sorted.
    pub n_set: Vec<usize>,
    pub beta: f64,
    /// Worst margin of each case bound over all pairs.
    pub checks: Vec<Check>,
}

impl FGamma {
    /// The raw piecewise value at `p` before the base normalization.
    pub fn raw(&self, p: usize) -> f64 {
        self.function.value(p) + self.offset
    }
}

/// Builds `f_gamma` on `gamma_fatten(space, gamma)` from a norming `f` on
/// `space`: `f(x_i) + gamma` at each `x_i`, `f(y_i)` at each `y_i`, 0 at the
/// base unless it is an `x_i`, and `f(z) + gamma/2` off
/// `N = {0} ∪ {x_i} ∪ {y_i}`.
pub fn f_gamma_construct(
    fattened: &Arc<PointedMetricSpace>,
    gamma: f64,
    pairs: &[(usize, usize)],
    f: &LipFunction,
) -> Result<FGamma, LipError> {
    let space = f.space();
    let n = space.len();
    if fattened.len() != n {
        return Err(LipError::LengthMismatch {
            expected: n,
            got: fattened.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(MetricError::NonPositiveGamma(gamma).into());
    }
    let tau = tau_lp();
    let precondition = |detail: String| LipError::Precondition {
        step: "f_gamma_construct",
        detail,
    };
    if pairs.is_empty() {
        return Err(precondition("no pairs given".into()));
    }
    let mut is_x = vec![false; n];
    let mut is_y = vec![false; n];
    for (i, &(x, y)) in pairs.iter().enumerate() {
        space.check_pair(x, y)?;
        is_x[x] = true;
        is_y[y] = true;
        let gap = f.value(x) - f.value(y) - space.d(x, y);
        if gap.abs() > tau * (1.0 + space.d(x, y)) {
            return Err(precondition(format!(
                "pair {i}: f(x) - f(y) - d(x, y) = {gap:e}"
            )));
        }
    }
    if let Some(p) = (0..n).find(|&p| is_x[p] && is_y[p]) {
        return Err(precondition(format!("point {p} is both an x_i and a y_j")));
    }
    if f.lip_norm() > 1.0 + tau {
        return Err(precondition(format!(
            "f has Lipschitz norm {}",
            f.lip_norm()
        )));
    }
    let in_n: Vec<bool> = (0..n).map(|p| p == BASE || is_x[p] || is_y[p]).collect();
    let n_set: Vec<usize> = (0..n).filter(|&p| in_n[p]).collect();
    let beta = space.radius_beta(&n_set)?;
    if let Some(p) = (0..n).find(|&p| f.value(p).abs() > beta * (1.0 + tau) + tau) {
        return Err(precondition(format!(
            "|f({p})| = {} exceeds beta = {beta}",
            f.value(p).abs()
        )));
    }
    let raw: Vec<f64> = (0..n)
        .map(|p| {
            if is_x[p] {
                f.value(p) + gamma
            } else if is_y[p] || p == BASE {
                f.value(p)
            } else {
                f.value(p) + gamma / 2.0
            }
        })
        .collect();
    let offset = raw[BASE];
    let function = LipFunction::new(fattened.clone(), raw.clone())?;

    let mut checks = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if p == q || !(is_x[p]) {
                continue;
            }
            let lhs = (raw[p] - raw[q]).abs();
            let d = space.d(p, q);
            if is_y[q] {
                checks.push(Check::le("case1_x_y", lhs, d + gamma, tau));
            } else if !in_n[q] {
                checks.push(Check::le("case2_x_off", lhs, d + gamma / 2.0, tau));
            }
        }
        if is_y[p] {
            for q in (0..n).filter(|&q| !in_n[q]) {
                let lhs = (raw[p] - raw[q]).abs();
                checks.push(Check::le(
                    "case3_y_off",
                    lhs,
                    space.d(p, q) + gamma / 2.0,
                    tau,
                ));
            }
        }
    }
    for &(x, y) in pairs {
        checks.push(Check::eq("slope_on_pairs", function.slope(x, y), 1.0, tau));
    }
    for p in (0..n).filter(|&p| !in_n[p]) {
        checks.push(Check::le(
            "offN_bound",
            raw[p].abs(),
            beta + gamma / 2.0,
            tau,
        ));
    }
    checks.push(Check::eq("lip_norm", function.lip_norm(), 1.0, tau));
    let checks = worst_by_name(checks);
    if let Some(c) = checks.iter().find(|c| !c.ok) {
        return Err(precondition(format!(
            "check {} failed with margin {:e}",
            c.name, c.margin
        )));
    }
    Ok(FGamma {
        function,
        offset,
        n_set,
        beta,
        checks,
    })
}

/// `G_gamma(z) = f_gamma(z) xi(d(0, z))` with the raw (unshifted) `f_gamma`
/// and the original metric, shifted afterwards to vanish at the base.
pub fn g_gamma_construct(
    fg: &FGamma,
    xi: &Cutoff,
    original: &PointedMetricSpace,
) -> Result<LipFunction, LipError> {
    let n = original.len();
    let values = (0..n)
        .map(|z| fg.raw(z) * xi.eval(original.d(BASE, z)))
        .collect();
    LipFunction::new(fg.function.space().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{equilateral, line};

    fn arc(s: PointedMetricSpace) -> Arc<PointedMetricSpace> {
        Arc::new(s)
    }

    #[test]
    fn norms_on_the_line() {
        let m = arc(line(4, 1.0).unwrap());
        let f = LipFunction::new(m.clone(), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.lip_norm(), 1.0);
        let g = LipFunction::new(m.clone(), vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(g.lip_norm(), 1.0);
        assert_eq!(LipFunction::zero(m.clone()).lip_norm(), 0.0);
        assert_eq!(g.pair_slope(1, 2).unwrap(), -g.pair_slope(2, 1).unwrap());
        assert!(g.pair_slope(2, 2).is_err());
    }

    #[test]
    fn construction_shifts_to_base() {
        let m = arc(line(3, 1.0).unwrap());
        let f = LipFunction::new(m, vec![5.0, 6.0, 4.0]).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, -1.0]);
    }

    #[test]
    fn aux_function_values() {
        let m = arc(equilateral(3, 1.0).unwrap());
        let f = aux_f_xy(&m, 1, 2).unwrap();
        assert_eq!(f.value(0), 0.0);
        assert!((f.value(1) - 0.5).abs() < 1e-15);
        assert!((f.value(2) + 0.5).abs() < 1e-15);
        assert!((f.pair_slope(1, 2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(f.peaking_check(1, 2).unwrap(), Some(0.5));
    }

    #[test]
    fn identity_on_line_does_not_peak() {
        let m = arc(line(4, 1.0).unwrap());
        let f = LipFunction::new(m, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.peaking_check(1, 0).unwrap(), None);
    }

    #[test]
    fn mcshane_examples() {
        let m = arc(line(4, 1.0).unwrap());
        let e = mcshane_extend(&m, &[0, 1], &[0.0, 1.0], 1.0, None).unwrap();
        assert_eq!(e.values(), &[0.0, 1.0, 2.0, 3.0]);
        let c = mcshane_extend(&m, &[0, 1], &[0.0, 1.0], 1.0, Some((-1.0, 1.0))).unwrap();
        assert_eq!(c.values(), &[0.0, 1.0, 1.0, 1.0]);
        let all = mcshane_extend(&m, &[0, 1, 2, 3], &[0.0, 1.0, 0.0, 1.0], 1.0, None).unwrap();
        assert_eq!(all.values(), &[0.0, 1.0, 0.0, 1.0]);
        let eq = arc(equilateral(3, 1.0).unwrap());
        let e = mcshane_extend(&eq, &[0, 1], &[0.0, 1.0], 1.0, None).unwrap();
        assert_eq!(e.value(2), 1.0);
    }

    #[test]
    fn mcshane_rejects_bad_input() {
        let m = arc(line(4, 1.0).unwrap());
        assert!(matches!(
            mcshane_extend(&m, &[0, 1], &[0.0, 2.0], 1.0, None),
            Err(LipError::NotLipschitz { .. })
        ));
        assert!(matches!(
            mcshane_extend(&m, &[1, 2], &[0.0, 1.0], 1.0, None),
            Err(LipError::BaseNotInSubset)
        ));
    }

    #[test]
    fn cutoff_shape() {
        let xi = Cutoff::new(1.0, 3.0).unwrap();
        assert_eq!(xi.eval(1.0), 1.0);
        assert_eq!(xi.eval(3.0), 0.0);
        assert_eq!(xi.eval(2.0), 0.5);
        assert!(Cutoff::new(1.0, 1.0).is_err());
    }

    #[test]
    fn f_gamma_on_the_line() {
        let m = arc(line(4, 1.0).unwrap());
        let fat = arc(m.gamma_fatten(1.0).unwrap());
        let f = mcshane_extend(&m, &[0, 1], &[0.0, 1.0], 1.0, Some((-1.0, 1.0))).unwrap();
        let fg = f_gamma_construct(&fat, 1.0, &[(1, 0)], &f).unwrap();
        assert_eq!(fg.function.values(), &[0.0, 2.0, 1.5, 1.5]);
        assert_eq!(fg.beta, 1.0);
        assert_eq!(fg.function.pair_slope(1, 0).unwrap(), 1.0);
        assert!(fg.checks.iter().all(|c| c.ok));
    }

    #[test]
    fn f_gamma_rejects_overlap() {
        let m = arc(line(4, 1.0).unwrap());
        let fat = arc(m.gamma_fatten(1.0).unwrap());
        let f = LipFunction::new(m, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let err = f_gamma_construct(&fat, 1.0, &[(2, 1), (1, 0)], &f).unwrap_err();
        assert!(matches!(err, LipError::Precondition { .. }));
    }
}
