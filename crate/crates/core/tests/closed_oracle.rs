//! An independent reconstruction of the CP^3 curve counts from the WDVV
//! equations of the genus-zero potential, solved by plain Gauss-Jordan over
//! `BigRational`. It shares no code with the library's closed engine.

use std::collections::BTreeMap;

use chiang_ogw::closed_gw::ClosedGw;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

type Q = BigRational;

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn factorials(n: u32) -> Vec<Q> {
    let mut out = vec![Q::one()];
    for i in 1..=n as i64 {
        let next = out.last().unwrap() * q(i);
        out.push(next);
    }
    out
}

/// `N_d(a, b)`: degree-`d` rational curves through `a` lines and `b` points.
type Counts = BTreeMap<(u32, u32, u32), Q>;

/// `c + Σ coeffs[i] x_i` over the unknowns `N_D(4D - 2b, b)`, `b = 0..=2D`.
#[derive(Clone)]
struct Lin {
    c: Q,
    x: Vec<Q>,
}

impl Lin {
    fn constant(c: Q, n: usize) -> Self {
        Lin {
            c,
            x: vec![Q::zero(); n],
        }
    }
}

struct Ctx<'a> {
    known: &'a Counts,
    top: u32,
    fact: Vec<Q>,
}

/// Coefficient of `q^d t2^a t3^b` in `∂_i ∂_j ∂_k Φ` at `t0 = t1 = 0`;
/// `None` when it vanishes identically.
fn phi3(idx: [usize; 3], d: u32, a: u32, b: u32, ctx: &Ctx) -> Option<Lin> {
    let (known, top) = (ctx.known, ctx.top);
    let n = 2 * top as usize + 1;
    if d == 0 {
        let classical = a == 0 && b == 0 && idx.iter().sum::<usize>() == 3;
        return classical.then(|| Lin::constant(Q::one(), n));
    }
    if idx.contains(&0) {
        return None;
    }
    let ones = idx.iter().filter(|&&i| i == 1).count() as u32;
    let twos = idx.iter().filter(|&&i| i == 2).count() as u32;
    let threes = idx.iter().filter(|&&i| i == 3).count() as u32;
    let (na, nb) = (a + twos, b + threes);
    if na + 2 * nb != 4 * d {
        return None;
    }
    let weight = q((d as i64).pow(ones)) / (&ctx.fact[a as usize] * &ctx.fact[b as usize]);
    if d == top {
        let mut l = Lin::constant(Q::zero(), n);
        l.x[nb as usize] = weight;
        Some(l)
    } else {
        Some(Lin::constant(weight * &known[&(d, na, nb)], n))
    }
}

fn product(f: &Lin, g: &Lin) -> Lin {
    let f_lin = f.x.iter().any(|v| !v.is_zero());
    let g_lin = g.x.iter().any(|v| !v.is_zero());
    assert!(!(f_lin && g_lin), "quadratic term in the top degree");
    let x =
        f.x.iter()
            .zip(&g.x)
            .map(|(a, b)| a * &g.c + b * &f.c)
            .collect();
    Lin { c: &f.c * &g.c, x }
}

fn add(acc: &mut Lin, t: &Lin, negate: bool) {
    if negate {
        acc.c -= &t.c;
        for (a, b) in acc.x.iter_mut().zip(&t.x) {
            *a -= b;
        }
    } else {
        acc.c += &t.c;
        for (a, b) in acc.x.iter_mut().zip(&t.x) {
            *a += b;
        }
    }
}

/// All WDVV equations at degree `top`. A term of `∂_{ijν}Φ · ∂_{ν'kl}Φ` can
/// only be nonzero when the insertion degrees add up, which fixes `A` from
/// `B` and `a1` from `(d1, b1, ν)`.
fn equations(top: u32, known: &Counts) -> Vec<Lin> {
    let n = 2 * top as usize + 1;
    let ctx = Ctx {
        known,
        top,
        fact: factorials(4 * top + 4),
    };
    let mut rows = Vec::new();
    for i in 1..4usize {
        for j in 1..4usize {
            for k in 1..4usize {
                for l in 1..4usize {
                    for big_b in 0..=2 * top + 1 {
                        let big_a = 4 * top as i64 + 3 - (i + j + k + l) as i64 - 2 * big_b as i64;
                        if big_a < 0 {
                            continue;
                        }
                        let big_a = big_a as u32;
                        let mut acc = Lin::constant(Q::zero(), n);
                        for d1 in 0..=top {
                            for b1 in 0..=big_b {
                                for nu in 0..4usize {
                                    let mut side =
                                        |x: usize, y: usize, z: usize, w: usize, negate: bool| {
                                            let a1 = 4 * d1 as i64 + 3
                                                - (x + y + nu) as i64
                                                - 2 * b1 as i64;
                                            if a1 < 0 || a1 > big_a as i64 {
                                                return;
                                            }
                                            let a1 = a1 as u32;
                                            let Some(f) = phi3([x, y, nu], d1, a1, b1, &ctx) else {
                                                return;
                                            };
                                            let Some(g) = phi3(
                                                [3 - nu, z, w],
                                                top - d1,
                                                big_a - a1,
                                                big_b - b1,
                                                &ctx,
                                            ) else {
                                                return;
                                            };
                                            add(&mut acc, &product(&f, &g), negate);
                                        };
                                    side(i, j, k, l, false);
                                    side(i, k, j, l, true);
                                }
                            }
                        }
                        if !acc.c.is_zero() || acc.x.iter().any(|v| !v.is_zero()) {
                            rows.push(acc);
                        }
                    }
                }
            }
        }
    }
    rows
}

/// Reduced row echelon form of `[A | -c]`; returns the unique solution.
fn gauss_jordan(rows: Vec<Lin>, n: usize) -> Vec<Q> {
    let mut m: Vec<Vec<Q>> = rows
        .into_iter()
        .map(|r| {
            let mut row = r.x;
            row.push(-r.c);
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..n {
        let Some(p) = (pivot_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            panic!("unknown {col} is not determined");
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].recip();
        for v in m[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m.len() {
            if r != pivot_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot = m[pivot_row].clone();
                for (v, p) in m[r].iter_mut().zip(pivot) {
                    *v -= &f * p;
                }
            }
        }
        pivot_row += 1;
    }
    for row in &m[pivot_row..] {
        assert!(row[n].is_zero(), "inconsistent WDVV system");
    }
    (0..n).map(|c| m[c][n].clone()).collect()
}

fn oracle(max_d: u32) -> Counts {
    let mut known = Counts::new();
    for d in 1..=max_d {
        let n = 2 * d as usize + 1;
        let mut rows = equations(d, &known);
        if d == 1 {
            // one line through two points
            let mut seed = Lin::constant(q(-1), n);
            seed.x[2] = Q::one();
            rows.push(seed);
        }
        for (b, v) in gauss_jordan(rows, n).into_iter().enumerate() {
            known.insert((d, 4 * d - 2 * b as u32, b as u32), v);
        }
    }
    known
}

#[test]
fn oracle_reproduces_classical_counts() {
    let counts = oracle(2);
    assert_eq!(counts[&(1, 4, 0)], q(2));
    assert_eq!(counts[&(1, 2, 1)], q(1));
    assert_eq!(counts[&(2, 8, 0)], q(92));
    assert_eq!(counts[&(2, 0, 4)], q(0));
}

#[test]
fn engine_matches_oracle_through_degree_three() {
    let counts = oracle(3);
    let engine = ClosedGw::new();
    for (&(d, a, b), v) in &counts {
        let got = engine.closed_gw_counts(d, [0, 0, a, b]).unwrap();
        assert_eq!(got.as_big_rational(), v, "N_{d}({a},{b})");
    }
}
