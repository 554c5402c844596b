//! Field laws for exact rationals, factorization round trips and Novikov
//! series arithmetic against dense polynomial arithmetic.

use chiang_ogw::exact_arith::{factorize, is_probable_prime, ExactRational, NovikovSeries};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn rational() -> impl Strategy<Value = ExactRational> {
    (-10_000i64..10_000, 1i64..10_000).prop_map(|(n, d)| ExactRational::frac(n, d))
}

fn check_factorization(n: u64) {
    let f = factorize(&BigUint::from(n));
    assert_eq!(f.reconstruct(), BigUint::from(n), "{n}");
    for p in f.primes.keys() {
        assert!(is_probable_prime(p), "{p} in factorization of {n}");
    }
    // Trial division runs to 10^6, so a leftover cofactor is a composite
    // with no prime factor below that bound.
    if let Some(c) = &f.cofactor {
        assert!(!is_probable_prime(c), "{n}");
        assert!(*c > BigUint::from(1_000_000_000_000u64), "{n}");
    }
}

/// Dense coefficients of `q^{m/4}`, `m = 0..`.
fn dense(s: &NovikovSeries, len: usize) -> Vec<ExactRational> {
    (0..len as u32).map(|m| s.coeff(m)).collect()
}

fn series() -> impl Strategy<Value = (NovikovSeries, Vec<ExactRational>)> {
    proptest::collection::vec(-20i64..20, 0..6).prop_map(|coeffs| {
        let mut s = NovikovSeries::zero();
        let dense: Vec<ExactRational> = coeffs.iter().map(|&c| ExactRational::frac(c, 3)).collect();
        for (m, c) in dense.iter().enumerate() {
            s.add_term(m as u32, c.clone());
        }
        (s, dense)
    })
}

fn pad(v: &[ExactRational], len: usize) -> Vec<ExactRational> {
    let mut out = v.to_vec();
    out.resize(len, ExactRational::zero());
    out
}

proptest! {
    #[test]
    fn field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, ExactRational::zero());
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.recip().unwrap(), ExactRational::one());
        }
    }

    #[test]
    fn canonical_text_round_trip(a in rational()) {
        let text = a.to_string();
        prop_assert_eq!(text.parse::<ExactRational>().unwrap(), a);
        prop_assert!(!text.ends_with("/1"));
    }

    #[test]
    fn factorization_reconstructs(n in 1u64..u64::MAX) {
        check_factorization(n);
    }

    #[test]
    fn novikov_matches_dense_polynomials((s, ds) in series(), (t, dt) in series()) {
        let len = ds.len() + dt.len() + 1;
        let sum: Vec<ExactRational> = pad(&ds, len).iter().zip(pad(&dt, len)).map(|(a, b)| a + b).collect();
        prop_assert_eq!(dense(&(&s + &t), len), sum);
        let mut prod = vec![ExactRational::zero(); len];
        for (i, a) in ds.iter().enumerate() {
            for (j, b) in dt.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        prop_assert_eq!(dense(&(&s * &t), len), prod);
        prop_assert!((&s - &s).is_zero());
    }
}

/// The long sample run; `cargo test -- --ignored` to include it.
#[test]
#[ignore]
fn factorization_reconstructs_a_million_samples() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    for _ in 0..1_000_000 {
        check_factorization(rng.gen_range(1..u64::MAX));
    }
}
