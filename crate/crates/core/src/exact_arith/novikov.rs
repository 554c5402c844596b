use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::ExactRational;

/// Finite series in the Novikov variable `q^{1/4}`: exponent `m` stands for
/// `q^{m/4}`. Zero coefficients are never stored and exponents are
/// nonnegative.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct NovikovSeries {
    terms: BTreeMap<u32, ExactRational>,
}

impl NovikovSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, ExactRational::one())
    }

    /// `coeff * q^{m/4}`.
    pub fn monomial(m: u32, coeff: ExactRational) -> Self {
        let mut s = Self::zero();
        s.add_term(m, coeff);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: u32) -> ExactRational {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &ExactRational)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: u32, coeff: ExactRational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_default();
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: &ExactRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        NovikovSeries {
            terms: self.terms.iter().map(|(&m, v)| (m, v * c)).collect(),
        }
    }

    /// Multiplies by `q^{shift/4}`.
    pub fn shift(&self, shift: u32) -> Self {
        NovikovSeries {
            terms: self
                .terms
                .iter()
                .map(|(&m, v)| (m + shift, v.clone()))
                .collect(),
        }
    }
}

impl Add for &NovikovSeries {
    type Output = NovikovSeries;
    fn add(self, rhs: &NovikovSeries) -> NovikovSeries {
        let mut out = self.clone();
        for (&m, c) in &rhs.terms {
            out.add_term(m, c.clone());
        }
        out
    }
}

impl Sub for &NovikovSeries {
    type Output = NovikovSeries;
    fn sub(self, rhs: &NovikovSeries) -> NovikovSeries {
        let mut out = self.clone();
        for (&m, c) in &rhs.terms {
            out.add_term(m, -c);
        }
        out
    }
}

impl Mul for &NovikovSeries {
    type Output = NovikovSeries;
    fn mul(self, rhs: &NovikovSeries) -> NovikovSeries {
        let mut out = NovikovSeries::zero();
        for (&a, x) in &self.terms {
            for (&b, y) in &rhs.terms {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

impl Neg for &NovikovSeries {
    type Output = NovikovSeries;
    fn neg(self) -> NovikovSeries {
        self.scale(&-ExactRational::one())
    }
}

impl fmt::Display for NovikovSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if *m == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c} · q^{m}/4")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for NovikovSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_drops_terms() {
        let a = NovikovSeries::monomial(2, ExactRational::frac(5, 4));
        let b = NovikovSeries::monomial(2, ExactRational::frac(5, 4));
        assert!((&a - &b).is_zero());
        assert_eq!((&a + &b).coeff(2), ExactRational::frac(5, 2));
        assert_eq!((&a + &b).len(), 1);
    }

    #[test]
    fn product_of_binomials() {
        // (1 + q^{1/4}) (1 - q^{1/4}) = 1 - q^{1/2}
        let mut a = NovikovSeries::one();
        a.add_term(1, ExactRational::one());
        let mut b = NovikovSeries::one();
        b.add_term(1, -ExactRational::one());
        let p = &a * &b;
        assert_eq!(p.coeff(0), ExactRational::one());
        assert_eq!(p.coeff(1), ExactRational::zero());
        assert_eq!(p.coeff(2), -ExactRational::one());
        assert_eq!(p.len(), 2);
    }
}
