//! JSON formats for spaces, elements and functions, plus CSV export.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::free_space::{FreeElement, FreeError, Molecule, MoleculeCombination};
use crate::gallery::{gallery, GalleryError, GalleryItem, Params};
use crate::lip::{LipError, LipFunction};
use crate::metric::{MetricError, PointedMetricSpace};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error(transparent)]
    Free(#[from] FreeError),
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error("`n` is {n} but the matrix has {rows} rows")]
    SizeMismatch { n: usize, rows: usize },
    #[error("`{0}` names a family; add an `index` to pick a truncation")]
    FamilyWithoutIndex(String),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
}

/// An explicit matrix or a reference to a gallery item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    Explicit {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        dist: Vec<Vec<f64>>,
    },
    Family {
        family: String,
        #[serde(default)]
        params: Params,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<usize>,
    },
}

impl SpaceSpec {
    pub fn from_space(space: &PointedMetricSpace) -> Self {
        let n = space.len();
        SpaceSpec::Explicit {
            n,
            labels: space.labels().map(<[String]>::to_vec),
            dist: (0..n)
                .map(|i| (0..n).map(|j| space.d(i, j)).collect())
                .collect(),
        }
    }

    pub fn resolve(&self) -> Result<PointedMetricSpace, IoError> {
        match self {
            SpaceSpec::Explicit { n, labels, dist } => {
                if dist.len() != *n {
                    return Err(IoError::SizeMismatch {
                        n: *n,
                        rows: dist.len(),
                    });
                }
                let space = PointedMetricSpace::new(dist.clone())?;
                Ok(match labels {
                    Some(l) => space.with_labels(l.clone())?,
                    None => space,
                })
            }
            SpaceSpec::Family {
                family,
                params,
                index,
            } => {
                let mut params = params.clone();
                if let Some(i) = index {
                    params.insert("index".into(), *i as f64);
                }
                match gallery(family, &params)? {
                    GalleryItem::Space(s) => Ok(s),
                    GalleryItem::Family(_) => Err(IoError::FamilyWithoutIndex(family.clone())),
                }
            }
        }
    }
}

pub fn parse_space(json: &str) -> Result<PointedMetricSpace, IoError> {
    serde_json::from_str::<SpaceSpec>(json)?.resolve()
}

pub fn space_to_json(space: &PointedMetricSpace) -> String {
    serde_json::to_string(&SpaceSpec::from_space(space)).expect("plain data serializes")
}

/// A point given by index or by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Index(usize),
    Label(String),
}

impl PointRef {
    pub fn resolve(&self, space: &PointedMetricSpace) -> Result<usize, IoError> {
        match self {
            PointRef::Index(i) if *i < space.len() => Ok(*i),
            PointRef::Index(i) => Err(IoError::UnknownPoint(i.to_string())),
            PointRef::Label(l) => space
                .index_of(l)
                .ok_or_else(|| IoError::UnknownPoint(l.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementSpec {
    Masses {
        masses: Vec<f64>,
    },
    Molecules {
        molecules: Vec<(f64, PointRef, PointRef)>,
    },
}

/// A parsed element. Molecule input keeps its representation.
#[derive(Debug, Clone)]
pub enum ElementInput {
    Masses(FreeElement),
    Molecules(MoleculeCombination),
}

impl ElementInput {
    pub fn element(&self) -> FreeElement {
        match self {
            ElementInput::Masses(e) => e.clone(),
            ElementInput::Molecules(c) => c.to_element(),
        }
    }

    pub fn combination(&self) -> Option<&MoleculeCombination> {
        match self {
            ElementInput::Masses(_) => None,
            ElementInput::Molecules(c) => Some(c),
        }
    }
}

impl ElementSpec {
    pub fn resolve(&self, space: &Arc<PointedMetricSpace>) -> Result<ElementInput, IoError> {
        match self {
            ElementSpec::Masses { masses } => Ok(ElementInput::Masses(FreeElement::from_masses(
                space.clone(),
                masses.clone(),
            )?)),
            ElementSpec::Molecules { molecules } => {
                let terms = molecules
                    .iter()
                    .map(|(lambda, x, y)| {
                        Ok(Molecule {
                            lambda: *lambda,
                            x: x.resolve(space)?,
                            y: y.resolve(space)?,
                        })
                    })
                    .collect::<Result<Vec<_>, IoError>>()?;
                Ok(ElementInput::Molecules(MoleculeCombination::new(
                    space.clone(),
                    terms,
                )?))
            }
        }
    }
}

pub fn parse_element(json: &str, space: &Arc<PointedMetricSpace>) -> Result<ElementInput, IoError> {
    serde_json::from_str::<ElementSpec>(json)?.resolve(space)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub values: Vec<f64>,
}

pub fn parse_function(json: &str, space: &Arc<PointedMetricSpace>) -> Result<LipFunction, IoError> {
    let spec: FunctionSpec = serde_json::from_str(json)?;
    Ok(LipFunction::new(space.clone(), spec.values)?)
}

/// Slope matrix with a header row of point labels; the diagonal is empty.
pub fn slope_matrix_csv(f: &LipFunction) -> String {
    let space = f.space();
    let n = space.len();
    let m = f.slope_matrix();
    let mut out = String::from("point");
    for j in 0..n {
        let _ = write!(out, ",{}", space.label(j));
    }
    out.push('\n');
    for (i, row) in m.iter().enumerate() {
        out.push_str(&space.label(i));
        for (j, v) in row.iter().enumerate() {
            if i == j {
                out.push(',');
            } else {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_round_trip_is_exact() {
        let json = r#"{"n":3,"labels":["a","b","c"],"dist":[[0,0.1,0.3],[0.1,0,0.2],[0.3,0.2,0]]}"#;
        let s = parse_space(json).unwrap();
        let again = parse_space(&space_to_json(&s)).unwrap();
        assert_eq!(s, again);
        assert_eq!(again.d(0, 1), 0.1);
        assert_eq!(again.index_of("c"), Some(2));
    }

    #[test]
    fn family_reference() {
        let s = parse_space(r#"{"family":"petr","params":{},"index":3}"#).unwrap();
        assert_eq!(s.len(), 5);
        let err = parse_space(r#"{"family":"petr"}"#).unwrap_err();
        assert!(matches!(err, IoError::FamilyWithoutIndex(_)));
        let line = parse_space(r#"{"family":"line","params":{"n":5}}"#).unwrap();
        assert_eq!(line.d(0, 4), 4.0);
    }

    #[test]
    fn size_mismatch_is_reported() {
        let err = parse_space(r#"{"n":3,"dist":[[0,1],[1,0]]}"#).unwrap_err();
        assert!(matches!(err, IoError::SizeMismatch { n: 3, rows: 2 }));
    }

    #[test]
    fn elements_by_mass_and_molecule() {
        let s = Arc::new(parse_space(r#"{"family":"petr","index":2}"#).unwrap());
        let e = parse_element(r#"{"molecules":[[1.0,"x","y"]]}"#, &s).unwrap();
        assert_eq!(e.combination().unwrap().pairs(), vec![(0, 1)]);
        let m = parse_element(r#"{"masses":[0,1,-1,0]}"#, &s).unwrap();
        assert_eq!(m.element().masses(), &[0.0, 1.0, -1.0, 0.0]);
        assert!(parse_element(r#"{"molecules":[[1.0,"x","w"]]}"#, &s).is_err());
    }

    #[test]
    fn slope_csv_shape() {
        let s = Arc::new(crate::gallery::line(3, 1.0).unwrap());
        let f = LipFunction::new(s, vec![0.0, 1.0, 1.0]).unwrap();
        let csv = slope_matrix_csv(&f);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "point,0,1,2");
        assert_eq!(lines[1], "0,,-1,-0.5");
    }
}
