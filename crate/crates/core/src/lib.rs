//! Exact genus-zero open Gromov-Witten invariants of the Chiang Lagrangian
//! `L_△ ⊂ CP^3`, together with the closed invariants of `CP^3` they depend
//! on, the small relative quantum cohomology ring, and the arithmetic
//! analyses run over the resulting tables.

pub mod analysis;
pub mod cli_io;
pub mod closed_gw;
pub mod error;
pub mod exact_arith;
pub mod linsolve;
pub mod open_gw;
pub mod rqc;

pub use error::{GwError, Result};
pub use exact_arith::{ExactRational, NovikovSeries};
