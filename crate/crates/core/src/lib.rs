//! Weighted approximate monotone local search.
//!
//! The crate evaluates the running-time bases `brute(α)` and `amls(α, c, β)`,
//! builds covering and extension families over weighted universes by
//! geometric weight rounding, and drives membership- and extension-oracle
//! approximation algorithms for weighted vertex cover, d-hitting set and
//! feedback vertex set.

pub mod bounds;
pub mod cost;
pub mod driver;
pub mod error;
pub mod families;
pub mod limits;
pub mod oracles;
pub mod par;
pub mod problems;
pub mod subset;
pub mod suites;
pub mod table;
pub mod weighted;

pub use error::{Error, Result};
pub use subset::Subset;
