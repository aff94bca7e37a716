//! Named example spaces and parametric families.
//!
//! | name                  | params                    | kind   |
//! |-----------------------|---------------------------|--------|
//! | `line`                | `n` (4), `spacing` (1)    | space  |
//! | `equilateral`         | `n` (3), `side` (1)       | space  |
//! | `branching_tree`      | `n` leaves (3)            | space  |
//! | `three_point_aligned` | none                      | space  |
//! | `cantor`              | `level` (2)               | space  |
//! | `petr`                | `ratio` (1/2), `index`    | family |
//! | `rotund_not_g`        | `index`                   | family |
//! | `c0_luna`             | `index`                   | family |
//! | `tree_family`         | `index`                   | family |
//! | `random_euclidean`    | `n`, `dim` (2), `scale` (1), `seed` | space |
//! | `random_graph`        | `n`, `max_weight` (4), `scale` (1), `seed` | space |
//!
//! Families return a [`MetricFamily`] unless an `index` parameter is given,
//! in which case the truncated space at that index is returned.
//!
//! The two-point-plus-sequence families (`petr`, `rotund_not_g`) use base
//! point `x`, then `y`, then `z_1, z_2, ...`; their distinguished pair is
//! `(x, y) = (0, 1)`.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{Exact, MetricError, PointedMetricSpace};

/// Numeric parameters keyed by name.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalleryError {
    #[error("unknown gallery item `{0}`")]
    UnknownName(String),
    #[error("parameter `{name}` = {value} is invalid: {reason}")]
    InvalidParam {
        name: String,
        value: f64,
        reason: &'static str,
    },
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// What a gallery lookup produces.
#[derive(Debug, Clone)]
pub enum GalleryItem {
    Space(PointedMetricSpace),
    Family(MetricFamily),
}

impl GalleryItem {
    pub fn into_space(self) -> Option<PointedMetricSpace> {
        match self {
            GalleryItem::Space(s) => Some(s),
            GalleryItem::Family(_) => None,
        }
    }
}

/// Names accepted by [`gallery`].
pub const GALLERY_NAMES: &[&str] = &[
    "line",
    "equilateral",
    "branching_tree",
    "three_point_aligned",
    "cantor",
    "petr",
    "rotund_not_g",
    "c0_luna",
    "tree_family",
    "random_euclidean",
    "random_graph",
];

struct ParamReader<'a> {
    params: &'a Params,
    used: Vec<&'static str>,
}

impl<'a> ParamReader<'a> {
    fn new(params: &'a Params) -> Self {
        Self {
            params,
            used: Vec::new(),
        }
    }

    fn real(&mut self, name: &'static str, default: f64) -> f64 {
        self.used.push(name);
        self.params.get(name).copied().unwrap_or(default)
    }

    fn positive(&mut self, name: &'static str, default: f64) -> Result<f64, GalleryError> {
        let v = self.real(name, default);
        if !(v > 0.0) || !v.is_finite() {
            return Err(GalleryError::InvalidParam {
                name: name.into(),
                value: v,
                reason: "must be positive",
            });
        }
        Ok(v)
    }

    fn count(
        &mut self,
        name: &'static str,
        default: usize,
        min: usize,
    ) -> Result<usize, GalleryError> {
        let v = self.real(name, default as f64);
        if v.fract() != 0.0 || v < min as f64 || v > 1e6 {
            return Err(GalleryError::InvalidParam {
                name: name.into(),
                value: v,
                reason: "must be an integer within range",
            });
        }
        Ok(v as usize)
    }

    fn optional_count(
        &mut self,
        name: &'static str,
        min: usize,
    ) -> Result<Option<usize>, GalleryError> {
        if self.params.contains_key(name) {
            self.count(name, min, min).map(Some)
        } else {
            self.used.push(name);
            Ok(None)
        }
    }

    fn finish(self) -> Result<(), GalleryError> {
        for key in self.params.keys() {
            if !self.used.contains(&key.as_str()) {
                return Err(GalleryError::UnknownParam(key.clone()));
            }
        }
        Ok(())
    }
}

/// Looks up a named space or family.
pub fn gallery(name: &str, params: &Params) -> Result<GalleryItem, GalleryError> {
    let mut p = ParamReader::new(params);
    let item = match name {
        "line" => {
            let n = p.count("n", 4, 1)?;
            let spacing = p.positive("spacing", 1.0)?;
            GalleryItem::Space(line(n, spacing)?)
        }
        "equilateral" => {
            let n = p.count("n", 3, 1)?;
            let side = p.positive("side", 1.0)?;
            GalleryItem::Space(equilateral(n, side)?)
        }
        "branching_tree" => GalleryItem::Space(branching_tree(p.count("n", 3, 1)?)?),
        "three_point_aligned" => GalleryItem::Space(three_point_aligned()),
        "cantor" => GalleryItem::Space(cantor(p.count("level", 2, 0)?)?),
        "petr" | "rotund_not_g" | "c0_luna" | "tree_family" => {
            let kind = match name {
                "petr" => {
                    let ratio = p.real("ratio", 0.5);
                    if !(ratio > 0.0 && ratio < 1.0) {
                        return Err(GalleryError::InvalidParam {
                            name: "ratio".into(),
                            value: ratio,
                            reason: "must lie in (0, 1)",
                        });
                    }
                    FamilyKind::Petr { ratio }
                }
                "rotund_not_g" => FamilyKind::RotundNotG,
                "c0_luna" => FamilyKind::C0Luna,
                _ => FamilyKind::BranchingTree,
            };
            let family = MetricFamily::new(kind);
            match p.optional_count("index", 1)? {
                Some(index) => GalleryItem::Space(family.generate(index)?.space),
                None => GalleryItem::Family(family),
            }
        }
        "random_euclidean" => {
            let n = p.count("n", 6, 1)?;
            let dim = p.count("dim", 2, 1)?;
            let scale = p.positive("scale", 1.0)?;
            let seed = p.count("seed", 0, 0)? as u64;
            GalleryItem::Space(random_euclidean(n, dim, scale, seed)?)
        }
        "random_graph" => {
            let n = p.count("n", 6, 1)?;
            let w = p.count("max_weight", 4, 1)?;
            let scale = p.positive("scale", 1.0)?;
            let seed = p.count("seed", 0, 0)? as u64;
            GalleryItem::Space(random_graph(n, w as i64, scale, seed)?)
        }
        other => return Err(GalleryError::UnknownName(other.to_string())),
    };
    p.finish()?;
    Ok(item)
}

fn labels<I: IntoIterator<Item = String>>(it: I) -> Vec<String> {
    it.into_iter().collect()
}

fn exact_matrix(n: usize, f: impl Fn(usize, usize) -> Exact) -> Vec<Vec<Exact>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Exact::zero() } else { f(i, j) })
                .collect()
        })
        .collect()
}

fn float_matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i, j) }).collect())
        .collect()
}

/// Points `0, s, 2s, ..., (n-1)s` of the real line, base at 0.
pub fn line(n: usize, spacing: f64) -> Result<PointedMetricSpace, MetricError> {
    let space = match Exact::approximate_float(spacing)
        .filter(|r| crate::metric::ratio_to_f64(r) == spacing)
    {
        Some(s) => PointedMetricSpace::from_exact(exact_matrix(n, |i, j| {
            s * Exact::from_integer((i as i64 - j as i64).abs())
        }))?,
        None => PointedMetricSpace::new(float_matrix(n, |i, j| {
            spacing * (i as f64 - j as f64).abs()
        }))?,
    };
    space.with_labels(labels((0..n).map(|i| i.to_string())))
}

/// Any finite set of reals, as a subspace of the line. The first position
/// is the base point.
pub fn line_points(positions: &[Exact]) -> Result<PointedMetricSpace, MetricError> {
    let n = positions.len();
    PointedMetricSpace::from_exact(exact_matrix(n, |i, j| {
        let d = positions[i] - positions[j];
        if d < Exact::zero() {
            -d
        } else {
            d
        }
    }))
}

/// `n` points at mutual distance `side`.
pub fn equilateral(n: usize, side: f64) -> Result<PointedMetricSpace, MetricError> {
    match Exact::approximate_float(side).filter(|r| crate::metric::ratio_to_f64(r) == side) {
        Some(s) => PointedMetricSpace::from_exact(exact_matrix(n, |_, _| s)),
        None => PointedMetricSpace::new(float_matrix(n, |_, _| side)),
    }
}

/// Height-one tree with `n` leaves: `d(0,k) = 1`, `d(k,l) = 2`.
pub fn branching_tree(n: usize) -> Result<PointedMetricSpace, MetricError> {
    let one = Exact::from_integer(1);
    let two = Exact::from_integer(2);
    PointedMetricSpace::from_exact(exact_matrix(n + 1, |i, j| {
        if i == 0 || j == 0 {
            one
        } else {
            two
        }
    }))?
    .with_labels(labels((0..=n).map(|i| i.to_string())))
}

/// `{0, -1, 1}` on the line, base 0; the pair `(-1, 1) = (1, 2)` is aligned
/// through the base.
pub fn three_point_aligned() -> PointedMetricSpace {
    let pos = [
        Exact::zero(),
        Exact::from_integer(-1),
        Exact::from_integer(1),
    ];
    line_points(&pos)
        .and_then(|s| s.with_labels(labels(["0", "-1", "1"].map(String::from))))
        .expect("static data")
}

/// Endpoints of the intervals left after `level` middle-third removals,
/// with the line metric. Base point is 0.
pub fn cantor(level: usize) -> Result<PointedMetricSpace, MetricError> {
    if level > 20 {
        return Err(MetricError::Degenerate(
            "cantor level above 20 is not supported",
        ));
    }
    let mut intervals = vec![(Exact::zero(), Exact::from_integer(1))];
    for _ in 0..level {
        let third = Exact::new(1, 3);
        intervals = intervals
            .into_iter()
            .flat_map(|(a, b)| {
                let w = (b - a) * third;
                [(a, a + w), (b - w, b)]
            })
            .collect();
    }
    let mut points: Vec<Exact> = intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
    points.dedup();
    let names = points.iter().map(|p| p.to_string()).collect();
    line_points(&points)?.with_labels(names)
}

/// Parametric family of finite truncations with a distinguished pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFamily {
    pub name: String,
    pub kind: FamilyKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `d(x,y) = d(z_n,z_m) = 1`, `d(x,z_n) = 1/2`, `d(y,z_n) = 1/2 + ratio^n`.
    Petr { ratio: f64 },
    /// `d(x,y) = 1`, `d(x,z_n) = 1/(2n)`, `d(y,z_n) = 1 - 1/(4n)`,
    /// `d(z_n,z_m) = 1/(2n) + 1/(2m)`.
    RotundNotG,
    /// `{0} ∪ {e_1 + e_n / n : n >= 2}` in `c_0`: locally uniformly
    /// non-aligned but not uniformly discrete as the index grows.
    C0Luna,
    /// Branching tree with `index` leaves; distinguished pair `(1, 2)`.
    BranchingTree,
}

/// A truncation together with its distinguished pair.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub index: usize,
    pub space: PointedMetricSpace,
    pub pair: (usize, usize),
}

impl MetricFamily {
    pub fn new(kind: FamilyKind) -> Self {
        let name = match kind {
            FamilyKind::Petr { .. } => "petr",
            FamilyKind::RotundNotG => "rotund_not_g",
            FamilyKind::C0Luna => "c0_luna",
            FamilyKind::BranchingTree => "tree_family",
        };
        Self {
            name: name.to_string(),
            kind,
        }
    }

    /// Default Petr family with `epsilon_n = 2^-n`.
    pub fn petr() -> Self {
        Self::new(FamilyKind::Petr { ratio: 0.5 })
    }

    pub fn rotund_not_g() -> Self {
        Self::new(FamilyKind::RotundNotG)
    }

    /// `epsilon_n` of the Petr family (`None` for other kinds).
    pub fn petr_epsilon(&self, n: usize) -> Option<f64> {
        match self.kind {
            FamilyKind::Petr { ratio } => Some(ratio.powi(n as i32)),
            _ => None,
        }
    }

    /// Smallest valid index.
    pub fn min_index(&self) -> usize {
        1
    }

    /// Truncation at `index`.
    pub fn generate(&self, index: usize) -> Result<FamilyMember, MetricError> {
        if index < self.min_index() {
            return Err(MetricError::Degenerate("family index must be at least 1"));
        }
        let seq_labels = |k: usize| {
            let mut l = vec!["x".to_string(), "y".to_string()];
            l.extend((1..=k).map(|i| format!("z{i}")));
            l
        };
        let member = match self.kind {
            FamilyKind::Petr { ratio } => {
                let space = petr_space(index, ratio)?.with_labels(seq_labels(index))?;
                FamilyMember {
                    index,
                    space,
                    pair: (0, 1),
                }
            }
            FamilyKind::RotundNotG => {
                let half = |k: usize| Exact::new(1, 2 * k as i64);
                let z = |i: usize| i - 1; // point index i >= 2 is z_{i-1}
                let m = exact_matrix(index + 2, |i, j| {
                    let (a, b) = (i.min(j), i.max(j));
                    match (a, b) {
                        (0, 1) => Exact::from_integer(1),
                        (0, b) => half(z(b)),
                        (1, b) => Exact::from_integer(1) - Exact::new(1, 4 * z(b) as i64),
                        (a, b) => half(z(a)) + half(z(b)),
                    }
                });
                let space = PointedMetricSpace::from_exact(m)?.with_labels(seq_labels(index))?;
                FamilyMember {
                    index,
                    space,
                    pair: (0, 1),
                }
            }
            FamilyKind::C0Luna => {
                // point k >= 1 is e_1 + e_{k+1}/(k+1)
                // sup-norm distance: 1 to the origin, max(1/(a+1), 1/(b+1)) between points
                let m = exact_matrix(index + 1, |i, j| match i.min(j) {
                    0 => Exact::from_integer(1),
                    a => Exact::new(1, a as i64 + 1),
                });
                let mut l = vec!["0".to_string()];
                l.extend((1..=index).map(|k| format!("p{}", k + 1)));
                let space = PointedMetricSpace::from_exact(m)?.with_labels(l)?;
                let pair = if index >= 2 { (1, 2) } else { (0, 1) };
                FamilyMember { index, space, pair }
            }
            FamilyKind::BranchingTree => {
                let pair = if index >= 2 { (1, 2) } else { (1, 0) };
                FamilyMember {
                    index,
                    space: branching_tree(index)?,
                    pair,
                }
            }
        };
        Ok(member)
    }
}

fn petr_space(k: usize, ratio: f64) -> Result<PointedMetricSpace, MetricError> {
    let inv = 1.0 / ratio;
    let exact_ratio = inv.fract() == 0.0 && inv.powi(k as i32) < 2f64.powi(52);
    if exact_ratio {
        let q = inv as i64;
        let eps = |i: usize| Exact::new(1, q.pow(i as u32));
        let half = Exact::new(1, 2);
        PointedMetricSpace::from_exact(exact_matrix(k + 2, |i, j| {
            let (a, b) = (i.min(j), i.max(j));
            match (a, b) {
                (0, 1) => Exact::from_integer(1),
                (0, _) => half,
                (1, b) => half + eps(b - 1),
                _ => Exact::from_integer(1),
            }
        }))
    } else {
        PointedMetricSpace::new(float_matrix(k + 2, |i, j| {
            let (a, b) = (i.min(j), i.max(j));
            match (a, b) {
                (0, 1) => 1.0,
                (0, _) => 0.5,
                (1, b) => 0.5 + ratio.powi((b - 1) as i32),
                _ => 1.0,
            }
        }))
    }
}

/// `n` uniform random points of `[0, scale]^dim` with the Euclidean metric.
pub fn random_euclidean(
    n: usize,
    dim: usize,
    scale: f64,
    seed: u64,
) -> Result<PointedMetricSpace, MetricError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>() * scale).collect())
        .collect();
    PointedMetricSpace::new(float_matrix(n, |i, j| {
        pts[i]
            .iter()
            .zip(&pts[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }))
}

/// Shortest-path metric of a complete graph with random integer weights in
/// `1..=max_weight`, scaled by `scale / max_weight`. Integer weights make
/// exact alignments (zero Gromov products) common.
pub fn random_graph(
    n: usize,
    max_weight: i64,
    scale: f64,
    seed: u64,
) -> Result<PointedMetricSpace, MetricError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(1..=max_weight);
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if w[i][k] + w[k][j] < w[i][j] {
                    w[i][j] = w[i][k] + w[k][j];
                }
            }
        }
    }
    match Exact::approximate_float(scale).filter(|r| crate::metric::ratio_to_f64(r) == scale) {
        Some(s) => PointedMetricSpace::from_exact(exact_matrix(n, |i, j| {
            s * Exact::new(w[i][j], max_weight)
        })),
        None => PointedMetricSpace::new(float_matrix(n, |i, j| {
            scale * w[i][j] as f64 / max_weight as f64
        })),
    }
}
