//! Hybrid character sums over plane curves restricted to rectangles, their
//! moments and limiting distribution, and complete-sum bounds.

pub mod algebra;
pub mod bounds;
pub mod characters;
pub mod config;
pub mod field;
pub mod geometry;
#[cfg(any(test, feature = "verify"))]
pub mod oracle;
pub mod polyparse;
pub mod stats;
pub mod sums;
#[cfg(feature = "verify")]
pub mod verify;

pub use algebra::{BivarPoly, RationalMap};
pub use characters::{AddChar, MultChar};
pub use field::PrimeField;
pub use geometry::{PointTable, Rectangle, ShiftedCurve};
pub use stats::GaussianModel;
pub use sums::{ExperimentConfig, SumSeries};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
