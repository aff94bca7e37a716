//! Named numeric inequalities with margins, as recorded by the certificate
//! constructions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when the inequality holds with room to spare.
    pub margin: f64,
    pub ok: bool,
}

impl Check {
    /// `lhs <= rhs`, accepted when violated by at most `tol`.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            ok: margin >= -tol,
        }
    }

    /// `lhs < rhs` with a required margin of at least `min_margin`.
    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64, min_margin: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            ok: margin >= min_margin,
        }
    }

    /// `|lhs - rhs| <= tol`; the margin is `tol - |lhs - rhs|`.
    pub fn eq(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = tol - (lhs - rhs).abs();
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            ok: margin >= 0.0,
        }
    }
}

/// Keeps, for each check name, the entry with the smallest margin.
pub(crate) fn worst_by_name(checks: impl IntoIterator<Item = Check>) -> Vec<Check> {
    let mut out: Vec<Check> = Vec::new();
    for c in checks {
        match out.iter_mut().find(|o| o.name == c.name) {
            Some(o) if c.margin < o.margin => *o = c,
            Some(_) => {}
            None => out.push(c),
        }
    }
    out
}
