use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::ExactRational;

const TRIAL_LIMIT: u32 = 1_000_000;

/// Prime factorization of a positive integer.
///
/// `cofactor` is set only when a composite remains after trial division and
/// could not be split; in that case `primes` times `cofactor` is the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub primes: BTreeMap<BigUint, u32>,
    pub cofactor: Option<BigUint>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_none()
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.primes.get(&BigUint::from(p)).copied().unwrap_or(0)
    }

    /// Multiplies everything back together.
    pub fn reconstruct(&self) -> BigUint {
        let mut acc = self.cofactor.clone().unwrap_or_else(BigUint::one);
        for (p, &e) in &self.primes {
            acc *= p.pow(e);
        }
        acc
    }

    /// Primes other than 2 (including an unfactored cofactor, if any).
    pub fn odd_part_present(&self) -> bool {
        self.cofactor.is_some() || self.primes.keys().any(|p| *p != BigUint::from(2u32))
    }

    /// Compact text like `2^6 * 7`.
    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self
            .primes
            .iter()
            .map(|(p, &e)| {
                if e == 1 {
                    p.to_string()
                } else {
                    format!("{p}^{e}")
                }
            })
            .collect();
        if let Some(c) = &self.cofactor {
            parts.push(format!("[{c}]"));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" * ")
        }
    }
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        sieve
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| p.then_some(i as u32))
            .collect()
    })
}

/// Factors `n > 0`: trial division by primes up to 10^6, then a
/// Miller-Rabin test on what is left.
pub fn factorize(n: &BigUint) -> Factorization {
    assert!(!n.is_zero(), "cannot factor zero");
    let mut primes = BTreeMap::new();
    let mut rest = n.clone();

    // Powers of two dominate in practice.
    let twos = rest.trailing_zeros().unwrap_or(0);
    if twos > 0 {
        primes.insert(BigUint::from(2u32), twos as u32);
        rest >>= twos;
    }

    if let Some(mut small) = rest.to_u64() {
        for &p in &small_primes()[1..] {
            let p = p as u64;
            if p * p > small {
                break;
            }
            let mut e = 0;
            while small % p == 0 {
                small /= p;
                e += 1;
            }
            if e > 0 {
                primes.insert(BigUint::from(p), e);
            }
        }
        rest = BigUint::from(small);
    } else {
        for &p in &small_primes()[1..] {
            let bp = BigUint::from(p);
            if &bp * &bp > rest {
                break;
            }
            let mut e = 0;
            loop {
                let (q, r) = rest.div_rem(&bp);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            if e > 0 {
                primes.insert(bp, e);
            }
        }
    }

    let mut cofactor = None;
    if !rest.is_one() {
        let limit = BigUint::from(TRIAL_LIMIT);
        // Below limit^2, anything left after trial division is prime.
        if rest < &limit * &limit || is_probable_prime(&rest) {
            *primes.entry(rest).or_insert(0) += 1;
        } else {
            cofactor = Some(rest);
        }
    }
    Factorization { primes, cofactor }
}

/// Factorization of the (positive) denominator of `r`.
pub fn denominator_factorization(r: &ExactRational) -> Factorization {
    factorize(&r.denom_magnitude())
}

pub fn is_power_of_two_denominator(r: &ExactRational) -> bool {
    let d = r.denom_magnitude();
    d.count_ones() == 1
}

pub fn is_power_of_four_denominator(r: &ExactRational) -> bool {
    let d = r.denom_magnitude();
    d.count_ones() == 1 && d.trailing_zeros().unwrap_or(0).is_multiple_of(2)
}

const WITNESSES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin with the first twelve prime bases; deterministic below
/// 3.3e24 and probabilistic beyond.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &w in &WITNESSES {
        let w = BigUint::from(w);
        if *n == w {
            return true;
        }
        if (n % &w).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &w in &WITNESSES {
        let mut x = BigUint::from(w).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fact(r: &str) -> Vec<(u64, u32)> {
        let f = denominator_factorization(&r.parse().unwrap());
        assert!(f.is_complete());
        f.primes
            .iter()
            .map(|(p, &e)| (p.to_u64().unwrap(), e))
            .collect()
    }

    #[test]
    fn denominator_examples() {
        assert_eq!(fact("-35/64"), vec![(2, 6)]);
        assert_eq!(fact("3"), vec![]);
        assert_eq!(fact("1/12"), vec![(2, 2), (3, 1)]);
        assert_eq!(fact("5/1000000007"), vec![(1_000_000_007, 1)]);
    }

    #[test]
    fn power_of_two_and_four() {
        let q = |s: &str| s.parse::<ExactRational>().unwrap();
        assert!(is_power_of_two_denominator(&q("-7/16")));
        assert!(is_power_of_four_denominator(&q("-7/16")));
        assert!(is_power_of_two_denominator(&q("1/2")));
        assert!(!is_power_of_four_denominator(&q("1/2")));
        assert!(!is_power_of_two_denominator(&q("1/7")));
        assert!(!is_power_of_four_denominator(&q("1/7")));
        assert!(is_power_of_four_denominator(&q("5")));
    }

    #[test]
    fn large_semiprime_is_left_as_cofactor() {
        // (10^6 + 3) * (10^6 + 33) * 2^40, both factors prime.
        let p = BigUint::from(1_000_003u64);
        let q = BigUint::from(1_000_033u64);
        let n = &p * &q * (BigUint::one() << 40);
        let f = factorize(&n);
        assert_eq!(f.exponent_of(2), 40);
        assert_eq!(f.cofactor, Some(&p * &q));
        assert_eq!(f.reconstruct(), n);
        assert_eq!(f.render(), format!("2^40 * [{}]", &p * &q));
    }

    #[test]
    fn primality() {
        let primes = [2u64, 3, 97, 1_000_003, 2_305_843_009_213_693_951];
        for p in primes {
            assert!(is_probable_prime(&BigUint::from(p)), "{p}");
        }
        for c in [1u64, 4, 561, 1_000_003 * 1_000_033, 3_215_031_751] {
            assert!(!is_probable_prime(&BigUint::from(c)), "{c}");
        }
    }
}
