//! Exact arithmetic: rationals, finite Novikov series in `q^{1/4}`, and
//! denominator factorization.

mod factor;
mod novikov;
mod rational;

pub use factor::{
    denominator_factorization, factorize, is_power_of_four_denominator,
    is_power_of_two_denominator, is_probable_prime, Factorization,
};
pub use novikov::NovikovSeries;
pub use rational::ExactRational;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational {0:?}")]
    Parse(String),
}
