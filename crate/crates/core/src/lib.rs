//! Exact computations in the spherical Hecke algebra of `GL2 x GL2` over
//! `Q_p`: double-coset canonical forms, the maps from Schwartz and level
//! data to compactly induced functions, local zeta-integral oracles, and
//! certificates for the local integral norm relations.

pub mod coset;
pub mod error;
pub mod hecke;
pub mod norm;
pub mod padic;
pub mod qsqrt;
pub mod report;
pub mod schwartz;
pub mod whittaker;

pub use error::{Error, Result};
