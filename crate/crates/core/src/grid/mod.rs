//! Truncated product domains, sampled fields and rectangle families.

mod exponents;
mod family;
mod field;
mod layout;
mod sums;

pub use exponents::{ExponentConfig, Factor};
pub use family::{factor_family, rectangle_family, Cube, FamilyMode, Rect, RectFamily, ALL_FAMILY_LIMIT};
pub use field::{Field, Slice};
pub use layout::{make_grid, Coords, FactorGrid, Grid, MAX_DIM};
pub use sums::RectSums;
