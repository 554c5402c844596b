//! Genus-zero closed Gromov-Witten invariants of CP^3.
//!
//! Insertions are drawn from `Δ_j = [ω^j]`, `j = 0..=3`, with `∫_{CP^1} ω = 1`
//! (so `∫_{CP^3} ω^3 = 1`). Axioms reduce every invariant to
//! `N_d(a, b) = GW_d(Δ2^a, Δ3^b)` with `a + 2b = 4d`. Those are obtained one
//! degree at a time by extracting coefficients of the WDVV identity for all
//! index quadruples in `{1,2,3}^4` and solving the resulting linear system,
//! seeded by `N_1(0, 2) = 1` (one line through two points).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::RwLock;

use serde::Serialize;

use crate::error::{GwError, Result};
use crate::exact_arith::ExactRational;
use crate::linsolve::{self, Solution};

/// Insertion counts `[#Δ0, #Δ1, #Δ2, #Δ3]`.
pub type ClosedCounts = [u32; 4];

/// Index of a reduced closed invariant `N_d(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ClosedKey {
    pub d: u32,
    pub a: u32,
    pub b: u32,
}

impl ClosedKey {
    /// Checks `d >= 1` and the degree balance `a + 2b = 4d`.
    pub fn new(d: u32, a: u32, b: u32) -> Option<Self> {
        (d >= 1 && a + 2 * b == 4 * d).then_some(ClosedKey { d, a, b })
    }
}

impl fmt::Display for ClosedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N_{}({}, {})", self.d, self.a, self.b)
    }
}

/// Result of applying the closed axioms to a query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosedNormal {
    Zero,
    /// Fully determined by the degree-zero axiom.
    Value(ExactRational),
    /// `coeff * N_key`.
    Reduced {
        coeff: ExactRational,
        key: ClosedKey,
    },
}

/// `∫ Δi ∪ Δj ∪ Δk`.
pub fn closed_zero(i: usize, j: usize, k: usize) -> Result<ExactRational> {
    for idx in [i, j, k] {
        if idx > 3 {
            return Err(GwError::IndexOutOfRange(idx));
        }
    }
    Ok(if i + j + k == 3 {
        ExactRational::one()
    } else {
        ExactRational::zero()
    })
}

/// Inverse Poincaré pairing `g^{ij} = δ_{i,3-j}`.
pub fn inverse_metric(i: usize, j: usize) -> ExactRational {
    if i + j == 3 {
        ExactRational::one()
    } else {
        ExactRational::zero()
    }
}

/// Applies zero, fundamental-class, divisor and degree axioms.
pub fn normalize_closed(d: u32, counts: ClosedCounts) -> ClosedNormal {
    let [c0, c1, c2, c3] = counts;
    if d == 0 {
        if c0 + c1 + c2 + c3 != 3 {
            return ClosedNormal::Zero;
        }
        let total = c1 + 2 * c2 + 3 * c3;
        return if total == 3 {
            ClosedNormal::Value(ExactRational::one())
        } else {
            ClosedNormal::Zero
        };
    }
    if c0 > 0 {
        return ClosedNormal::Zero;
    }
    let Some(key) = ClosedKey::new(d, c2, c3) else {
        return ClosedNormal::Zero;
    };
    let coeff = ExactRational::from_integer(d)
        .pow(c1 as i32)
        .expect("nonnegative power");
    ClosedNormal::Reduced { coeff, key }
}

/// Affine expression `constant + Σ coeffs[b] * N_D(4D - 2b, b)` in the
/// unknowns of one degree `D`.
#[derive(Clone, Debug)]
struct Affine {
    constant: ExactRational,
    coeffs: Vec<ExactRational>,
}

impl Affine {
    fn zero(n: usize) -> Self {
        Affine {
            constant: ExactRational::zero(),
            coeffs: vec![ExactRational::zero(); n],
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(ExactRational::is_zero)
    }

    fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.is_constant()
    }

    /// `self += w * x * y`; at most one factor may carry unknowns.
    fn add_product(&mut self, w: &ExactRational, x: &Affine, y: &Affine) {
        let (lin, c) = if x.is_constant() {
            (y, &x.constant)
        } else {
            (x, &y.constant)
        };
        debug_assert!(
            x.is_constant() || y.is_constant(),
            "quadratic term in WDVV system"
        );
        let f = w * c;
        if f.is_zero() {
            return;
        }
        self.constant += &lin.constant * &f;
        for (acc, v) in self.coeffs.iter_mut().zip(&lin.coeffs) {
            if !v.is_zero() {
                *acc += v * &f;
            }
        }
    }
}

/// Memoized closed invariants of CP^3.
#[derive(Default)]
pub struct ClosedGw {
    cache: RwLock<HashMap<ClosedKey, ExactRational>>,
}

impl ClosedGw {
    pub fn new() -> Self {
        Self::default()
    }

    /// `GW_d` of the given insertion indices (each in `0..=3`).
    pub fn closed_gw(&self, d: u32, insertions: &[usize]) -> Result<ExactRational> {
        let mut counts = [0u32; 4];
        for &i in insertions {
            *counts.get_mut(i).ok_or(GwError::IndexOutOfRange(i))? += 1;
        }
        self.closed_gw_counts(d, counts)
    }

    pub fn closed_gw_counts(&self, d: u32, counts: ClosedCounts) -> Result<ExactRational> {
        match normalize_closed(d, counts) {
            ClosedNormal::Zero => Ok(ExactRational::zero()),
            ClosedNormal::Value(v) => Ok(v),
            ClosedNormal::Reduced { coeff, key } => Ok(coeff * self.closed_reduced(key)?),
        }
    }

    /// `N_d(a, b)`; solves degree `d` (and, on demand, everything below it)
    /// the first time it is needed.
    pub fn closed_reduced(&self, key: ClosedKey) -> Result<ExactRational> {
        self.reduced_in(key, &mut Vec::new())
    }

    fn reduced_in(&self, key: ClosedKey, in_progress: &mut Vec<u32>) -> Result<ExactRational> {
        if let Some(v) = self.cache.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        if in_progress.contains(&key.d) {
            return Err(GwError::CyclicDependency(format!(
                "closed degree {}",
                key.d
            )));
        }
        in_progress.push(key.d);
        let solved = self.solve_degree(key.d, in_progress);
        in_progress.pop();
        let values = solved?;
        let mut cache = self.cache.write().unwrap();
        for (b, v) in values.into_iter().enumerate() {
            let k = ClosedKey {
                d: key.d,
                a: 4 * key.d - 2 * b as u32,
                b: b as u32,
            };
            cache.entry(k).or_insert(v);
        }
        Ok(cache[&key].clone())
    }

    /// F_{ijν}(d; a, b) := GW_d(Δi, Δj, Δν, Δ2^a, Δ3^b) as an affine form in
    /// the degree-`unknown` unknowns (none when `unknown` is `None`).
    fn third_derivative(
        &self,
        idx: [usize; 3],
        d: u32,
        a: u32,
        b: u32,
        unknown: Option<u32>,
        in_progress: &mut Vec<u32>,
    ) -> Result<Affine> {
        let n = unknown.map_or(0, |u| 2 * u as usize + 1);
        let mut counts = [0, 0, a, b];
        for i in idx {
            counts[i] += 1;
        }
        let mut out = Affine::zero(n);
        match normalize_closed(d, counts) {
            ClosedNormal::Zero => {}
            ClosedNormal::Value(v) => out.constant = v,
            ClosedNormal::Reduced { coeff, key } => {
                if Some(key.d) == unknown {
                    out.coeffs[key.b as usize] = coeff;
                } else {
                    out.constant = coeff * self.reduced_in(key, in_progress)?;
                }
            }
        }
        Ok(out)
    }

    /// Coefficient of `q^D t2^A t3^B / (A! B!)` in LHS - RHS of the WDVV
    /// equation for `(i, j, k, l)`.
    fn wdvv_affine(
        &self,
        [i, j, k, l]: [usize; 4],
        big_d: u32,
        big_a: u32,
        big_b: u32,
        unknown: Option<u32>,
        in_progress: &mut Vec<u32>,
    ) -> Result<Affine> {
        let n = unknown.map_or(0, |u| 2 * u as usize + 1);
        let mut acc = Affine::zero(n);
        let neg_one = -ExactRational::one();
        for d1 in 0..=big_d {
            let d2 = big_d - d1;
            for b1 in 0..=big_b {
                for a1 in 0..=big_a {
                    let (a2, b2) = (big_a - a1, big_b - b1);
                    let w = binomial(big_a, a1) * binomial(big_b, b1);
                    for nu in 0..4 {
                        let mu = 3 - nu;
                        for (sign, left, right) in [
                            (&ExactRational::one(), [i, j, nu], [mu, k, l]),
                            (&neg_one, [j, k, nu], [mu, i, l]),
                        ] {
                            if !degree_ok(left, d1, a1, b1) || !degree_ok(right, d2, a2, b2) {
                                continue;
                            }
                            let x =
                                self.third_derivative(left, d1, a1, b1, unknown, in_progress)?;
                            if x.is_zero() {
                                continue;
                            }
                            let y =
                                self.third_derivative(right, d2, a2, b2, unknown, in_progress)?;
                            acc.add_product(&(&w * sign), &x, &y);
                        }
                    }
                }
            }
        }
        Ok(acc)
    }

    /// LHS - RHS of the closed WDVV equation for `(i, j, k, l)` at the
    /// coefficient of `q^d t2^a t3^b / (a! b!)`, using computed invariants.
    /// Vanishes identically.
    pub fn wdvv_residual(&self, quad: [usize; 4], d: u32, a: u32, b: u32) -> Result<ExactRational> {
        if let Some(&bad) = quad.iter().find(|&&x| x > 3) {
            return Err(GwError::IndexOutOfRange(bad));
        }
        Ok(self
            .wdvv_affine(quad, d, a, b, None, &mut Vec::new())?
            .constant)
    }

    fn solve_degree(&self, d: u32, in_progress: &mut Vec<u32>) -> Result<Vec<ExactRational>> {
        let n = 2 * d as usize + 1;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        if d == 1 {
            // N_1(0, 2) = 1
            let mut seed = vec![ExactRational::zero(); n];
            seed[2] = ExactRational::one();
            rows.push(seed);
            rhs.push(ExactRational::one());
        }
        for quad in quadruples() {
            let idx_sum: u32 = quad.iter().map(|&x| x as u32).sum();
            // The degree-d unknowns only enter monomials with
            // A + 2B = 4d + 3 - (i + j + k + l).
            let Some(total) = (4 * d + 3).checked_sub(idx_sum) else {
                continue;
            };
            for big_b in 0..=total / 2 {
                let big_a = total - 2 * big_b;
                let eq = self.wdvv_affine(quad, d, big_a, big_b, Some(d), in_progress)?;
                if eq.is_constant() {
                    if !eq.constant.is_zero() {
                        return Err(GwError::Reconstruction {
                            degree: d,
                            reason: format!("constant residual {} for {quad:?}", eq.constant),
                        });
                    }
                    continue;
                }
                rows.push(eq.coeffs);
                rhs.push(-eq.constant);
            }
        }
        match linsolve::solve(&rows, &rhs) {
            Solution::Unique(x) => Ok(x),
            Solution::Underdetermined { rank } => Err(GwError::Reconstruction {
                degree: d,
                reason: format!("rank {rank} < {n} unknowns"),
            }),
            Solution::Inconsistent => Err(GwError::Reconstruction {
                degree: d,
                reason: "inconsistent system".into(),
            }),
        }
    }

    pub fn snapshot(&self) -> BTreeMap<ClosedKey, ExactRational> {
        self.cache
            .read()
            .unwrap()
            .iter()
            .map(|(k, v)| (*k, v.clone()))
            .collect()
    }

    /// Inserts precomputed values; existing entries are kept.
    pub fn load(&self, values: impl IntoIterator<Item = (ClosedKey, ExactRational)>) {
        let mut cache = self.cache.write().unwrap();
        for (k, v) in values {
            cache.entry(k).or_insert(v);
        }
    }

    pub fn clear(&self) {
        self.cache.write().unwrap().clear();
    }

    pub fn len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn quadruples() -> impl Iterator<Item = [usize; 4]> {
    (0..81).map(|n| [1 + n / 27, 1 + (n / 9) % 3, 1 + (n / 3) % 3, 1 + n % 3])
}

/// GW_d(Δ_idx, Δ2^a, Δ3^b) can only be nonzero if Σ(index - 1) = 4d.
fn degree_ok(idx: [usize; 3], d: u32, a: u32, b: u32) -> bool {
    let s: u32 = idx.iter().map(|&x| x as u32).sum::<u32>() + a + 2 * b;
    s == 4 * d + 3
}

pub(crate) fn binomial(n: u32, k: u32) -> ExactRational {
    if k > n {
        return ExactRational::zero();
    }
    let k = k.min(n - k);
    let mut acc = num_bigint::BigInt::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    ExactRational::from_integer(acc)
}
