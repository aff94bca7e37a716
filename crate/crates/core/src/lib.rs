//! Computable geometry of Lipschitz-free spaces over finite pointed metric
//! spaces.
//!
//! * [`metric`] and [`gallery`]: validated spaces, `d_gamma` transforms and
//!   the example spaces and families.
//! * [`lp`]: a small dense two-phase simplex solver with duality
//!   certificates. Every norm, distance and projection goes through it.
//! * [`lip`]: Lipschitz functions, McShane extension, peaking functions and
//!   the cut-off constructions used by the perturbation pipeline.
//! * [`free_space`]: free-space elements, norms by flow and Lipschitz LPs,
//!   dual faces and Gâteaux tests.
//! * [`pair_geometry`]: Gromov-product analytics of pairs and spaces.
//! * [`ssd`]: exposedness probing and the constructive SSD certificates.
//! * [`io`]: JSON and CSV formats.
// Dense matrix code reads best with explicit indices.
#![allow(clippy::needless_range_loop)]
// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod free_space;
pub mod gallery;
pub mod io;
pub mod lip;
pub mod lp;
pub mod metric;
pub mod pair_geometry;
mod par;
pub mod ssd;
pub mod tol;

pub use free_space::{FreeElement, Molecule, MoleculeCombination};
pub use lip::LipFunction;
pub use metric::{PointedMetricSpace, BASE};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
