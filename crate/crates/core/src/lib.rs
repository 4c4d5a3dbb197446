//! Exact computation with invariant differential operators on the space of
//! positive definite symmetric matrices `Pos_n` and its determinant-one slice
//! `SPos_n`.
//!
//! Operators are represented by their symbols ([`symbols`]). Their action on
//! polynomial test functions goes through truncated power series in chart
//! coordinates ([`jet`], [`action`]). All arithmetic is over ℚ.
//!
//! ```
//! use invdiff::symbols::{project_symbol, Family, ProjectionMode};
//!
//! let delta1 = Family::MaassSelberg.symbol(3, 1)?;
//! assert!(project_symbol(&delta1, ProjectionMode::Restrict)?.is_zero());
//! # Ok::<(), invdiff::Error>(())
//! ```

pub mod action;
pub mod error;
pub mod jet;
pub mod linalg;
pub mod matrix;
pub mod poly;
pub mod rational;
pub mod report;
pub mod suites;
pub mod symbols;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/symbols.md")]
    mod symbols {}
    #[doc = include_str!("../../../book/src/radial-parts.md")]
    mod radial_parts {}
    #[doc = include_str!("../../../book/src/jets.md")]
    mod jets {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
