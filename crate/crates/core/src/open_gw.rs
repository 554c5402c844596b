//! Open Gromov-Witten invariants `OGW_{β,k}` of `(CP^3, L_△)`.
//!
//! A query is first reduced by the axioms (wall-crossing, unit, zero,
//! divisor, degree) to a canonical [`OpenKey`] carrying only `Γ2` and `Γ3`
//! interior constraints. Keys are then evaluated by the three open WDVV
//! recursions with memoization, starting from the three basic invariants.
//!
//! Conventions: `H_2(CP^3, L_△; Z) ≅ Z` with generator of Maslov index 2, the
//! closed line class maps to `4` in it, and `∫_β Γ1 = β/4`. The left inverse
//! `P_R` has kernel spanned by `Γ0..Γ3`, so `P_R(Γ_⋄) = 1` and `P_R` vanishes
//! on every other basis class.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::closed_gw::{binomial, ClosedGw};
use crate::error::{GwError, Result};
use crate::exact_arith::ExactRational;

pub const DEFAULT_BETA_MAX: u32 = 64;

const EVAL_STACK_BYTES: usize = 1 << 30;

/// Interior constraint counts. All classes have even degree, so order never
/// affects the value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Constraints {
    pub g0: u32,
    pub g1: u32,
    pub g2: u32,
    pub g3: u32,
    pub diamond: u32,
}

impl Constraints {
    pub fn new(g0: u32, g1: u32, g2: u32, g3: u32, diamond: u32) -> Self {
        Constraints {
            g0,
            g1,
            g2,
            g3,
            diamond,
        }
    }

    pub fn only(g2: u32, g3: u32) -> Self {
        Constraints {
            g2,
            g3,
            ..Default::default()
        }
    }

    /// Counts from basis indices `0..=3`; index 4 is the zero class and
    /// makes the whole insertion list vanish (`None`).
    pub fn from_indices(indices: &[usize]) -> Option<Self> {
        let mut c = Constraints::default();
        for &i in indices {
            c.push(i)?;
        }
        Some(c)
    }

    /// Adds `Γ_i`; `None` for the zero class `i >= 4`.
    fn push(&mut self, i: usize) -> Option<()> {
        match i {
            0 => self.g0 += 1,
            1 => self.g1 += 1,
            2 => self.g2 += 1,
            3 => self.g3 += 1,
            _ => return None,
        }
        Some(())
    }

    fn with(mut self, indices: &[usize]) -> Option<Self> {
        for &i in indices {
            self.push(i)?;
        }
        Some(self)
    }

    pub fn len(&self) -> u32 {
        self.g0 + self.g1 + self.g2 + self.g3 + self.diamond
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The only `β` at which `OGW_{β,k}(raw)` can be nonzero, by the degree
/// axiom with `n = 3` and `μ(β) = 2β`: `β = k + Σ(|A|/2 - 1)`.
pub fn degree_support(k: u32, raw: &Constraints) -> i64 {
    k as i64 - raw.g0 as i64 + raw.g2 as i64 + 2 * raw.g3 as i64 + raw.diamond as i64
}

/// Canonical memo key: `OGW_{β,k}(Γ2^{l2}, Γ3^{l3})` with
/// `β = k + l2 + 2 l3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OpenKey {
    pub beta: u32,
    pub k: u32,
    pub l2: u32,
    pub l3: u32,
}

impl OpenKey {
    pub fn new(beta: u32, k: u32, l2: u32, l3: u32) -> Option<Self> {
        (beta == k + l2 + 2 * l3).then_some(OpenKey { beta, k, l2, l3 })
    }

    pub fn boundary(beta: u32) -> Self {
        OpenKey {
            beta,
            k: beta,
            l2: 0,
            l3: 0,
        }
    }

    pub fn constraints(&self) -> Constraints {
        Constraints::only(self.l2, self.l3)
    }

    pub fn l(&self) -> u32 {
        self.l2 + self.l3
    }
}

impl fmt::Display for OpenKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "OGW_{{{},{}}}(Γ2^{}, Γ3^{})",
            self.beta, self.k, self.l2, self.l3
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalized {
    Zero,
    /// Closed-form value from the unit or zero axiom.
    Value(ExactRational),
    /// `coeff * OGW(key)`.
    Key {
        coeff: ExactRational,
        key: OpenKey,
    },
}

impl Normalized {
    pub fn is_zero(&self) -> bool {
        match self {
            Normalized::Zero => true,
            Normalized::Value(v) => v.is_zero(),
            Normalized::Key { coeff, .. } => coeff.is_zero(),
        }
    }
}

/// `P_R` on the basis: nonzero only on `Γ_⋄`.
fn p_r(c: &Constraints) -> ExactRational {
    if c.diamond == 1 && c.len() == 1 {
        ExactRational::one()
    } else {
        ExactRational::zero()
    }
}

/// Reduces `OGW_{β,k}(raw)` by the axioms: wall-crossing for each `Γ_⋄`,
/// unit, zero (`β = 0`), divisor for each `Γ1` and the degree filter.
pub fn normalize(beta: u32, k: u32, raw: Constraints) -> Normalized {
    let mut coeff = ExactRational::one();
    // OGW_{β,k+1}(η) = -OGW_{β,k}(Γ_⋄, η)
    let k = k + raw.diamond;
    if raw.diamond % 2 == 1 {
        coeff = -coeff;
    }
    let c = Constraints { diamond: 0, ..raw };

    if c.g0 > 0 {
        let l = c.len();
        if beta == 0 && k == 1 && l == 1 {
            return Normalized::Value(-coeff);
        }
        if beta == 0 && k == 0 && l == 2 {
            let other = Constraints { g0: c.g0 - 1, ..c };
            return Normalized::Value(coeff * p_r(&other));
        }
        return Normalized::Zero;
    }

    if beta == 0 {
        // Only (k, l) = (0, 2) survives, with value P_R(Γa ∪ Γb). Products
        // of Γ1..Γ3 are Γ_{a+b} or zero, all in ker P_R.
        return Normalized::Zero;
    }

    if c.g1 > 0 {
        let per = ExactRational::frac(beta as i64, 4);
        coeff = coeff * per.pow(c.g1 as i32).expect("nonzero base");
    }

    match OpenKey::new(beta, k, c.g2, c.g3) {
        Some(key) => Normalized::Key { coeff, key },
        None => Normalized::Zero,
    }
}

/// The three basic invariants seeding the recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasicInvariants {
    /// `OGW_{1,1}`
    pub v11: ExactRational,
    /// `OGW_{1,0}(Γ2)`
    pub v102: ExactRational,
    /// `OGW_{2,0}(Γ3)`
    pub v203: ExactRational,
}

impl Default for BasicInvariants {
    fn default() -> Self {
        BasicInvariants {
            v11: ExactRational::from_integer(3),
            v102: ExactRational::frac(1, 4),
            v203: ExactRational::from_integer(-1),
        }
    }
}

/// `((a2, a3), (b2, b3), weight)`: counts of `Γ2`, `Γ3` on each side.
pub type Split = ((u32, u32), (u32, u32), ExactRational);

/// `(I1, I2, weight)` over all ways of splitting `l2` copies of `Γ2` and
/// `l3` copies of `Γ3` into two labelled parts; the weight counts the
/// underlying subsets.
pub fn multiset_splits(l2: u32, l3: u32) -> Vec<Split> {
    let mut out = Vec::with_capacity(((l2 + 1) * (l3 + 1)) as usize);
    for a2 in 0..=l2 {
        for a3 in 0..=l3 {
            let w = binomial(l2, a2) * binomial(l3, a3);
            out.push(((a2, a3), (l2 - a2, l3 - a3), w));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Recursion {
    A,
    B,
    C,
}

/// How many keys each recursion evaluated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DispatchStats {
    pub base: u64,
    pub recursion_a: u64,
    pub recursion_b: u64,
    pub recursion_c: u64,
    /// Keys routed to recursion (a) that do not have the shape `k = 1`,
    /// `l = 1`.
    pub recursion_a_other_shapes: u64,
}

#[derive(Default)]
struct Counters {
    base: AtomicU64,
    a: AtomicU64,
    b: AtomicU64,
    c: AtomicU64,
    a_other: AtomicU64,
}

#[derive(Clone, Debug)]
pub struct OpenConfig {
    pub basics: BasicInvariants,
    pub beta_max: u32,
    /// Enumerate every class split instead of solving for the one allowed
    /// by the degree axiom, and reject any nonvanishing term that refers to
    /// a degree above the key being evaluated.
    pub exhaustive: bool,
}

impl Default for OpenConfig {
    fn default() -> Self {
        OpenConfig {
            basics: BasicInvariants::default(),
            beta_max: DEFAULT_BETA_MAX,
            exhaustive: false,
        }
    }
}

/// Per-evaluation stack of keys in progress.
#[derive(Default)]
struct EvalStack {
    keys: Vec<OpenKey>,
    set: HashSet<OpenKey>,
}

/// One factor `OGW_{β,k}(raw)` of a recursion term; `raw = None` is the
/// zero class.
#[derive(Clone, Copy)]
struct Factor {
    beta: i64,
    k: u32,
    raw: Option<Constraints>,
}

impl Factor {
    fn new(beta: i64, k: u32, raw: Option<Constraints>) -> Self {
        Factor { beta, k, raw }
    }

    fn normalized(&self) -> Normalized {
        match self.raw {
            Some(raw) if self.beta >= 0 => normalize(self.beta as u32, self.k, raw),
            _ => Normalized::Zero,
        }
    }
}

/// Memoized evaluator for open invariants.
pub struct OpenGw {
    config: OpenConfig,
    closed: Arc<ClosedGw>,
    cache: RwLock<HashMap<OpenKey, ExactRational>>,
    counters: Counters,
}

impl Default for OpenGw {
    fn default() -> Self {
        Self::new(OpenConfig::default(), Arc::new(ClosedGw::new()))
    }
}

impl OpenGw {
    pub fn new(config: OpenConfig, closed: Arc<ClosedGw>) -> Self {
        OpenGw {
            config,
            closed,
            cache: RwLock::new(HashMap::new()),
            counters: Counters::default(),
        }
    }

    pub fn with_basics(basics: BasicInvariants) -> Self {
        Self::new(
            OpenConfig {
                basics,
                ..Default::default()
            },
            Arc::new(ClosedGw::new()),
        )
    }

    pub fn config(&self) -> &OpenConfig {
        &self.config
    }

    pub fn basics(&self) -> &BasicInvariants {
        &self.config.basics
    }

    pub fn closed(&self) -> &Arc<ClosedGw> {
        &self.closed
    }

    /// `OGW_{β,k}` of an arbitrary constraint list.
    pub fn evaluate(&self, beta: u32, k: u32, raw: Constraints) -> Result<ExactRational> {
        match normalize(beta, k, raw) {
            Normalized::Zero => Ok(ExactRational::zero()),
            Normalized::Value(v) => Ok(v),
            Normalized::Key { coeff, key } => Ok(coeff * self.open_invariant(key)?),
        }
    }

    pub fn cached(&self, key: &OpenKey) -> Option<ExactRational> {
        self.cache.read().unwrap().get(key).cloned()
    }

    /// Memoized value of a canonical key.
    pub fn open_invariant(&self, key: OpenKey) -> Result<ExactRational> {
        if let Some(v) = self.cached(&key) {
            return Ok(v);
        }
        self.on_big_stack(|| self.eval(key, &mut EvalStack::default()))
    }

    /// Evaluates one recursion directly on `key` (sub-terms still go
    /// through the memo). Used to compare recursions on keys where more
    /// than one applies.
    pub fn evaluate_with(&self, key: OpenKey, rec: Recursion) -> Result<ExactRational> {
        self.on_big_stack(|| {
            let mut stack = EvalStack::default();
            stack.keys.push(key);
            stack.set.insert(key);
            match rec {
                Recursion::A => self.recursion_a(key, &mut stack),
                Recursion::B => self.recursion_b(key, &mut stack),
                Recursion::C => self.recursion_c(key, &mut stack),
            }
        })
    }

    fn on_big_stack<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        std::thread::scope(|s| {
            std::thread::Builder::new()
                .stack_size(EVAL_STACK_BYTES)
                .spawn_scoped(s, f)
                .expect("spawn evaluation thread")
                .join()
                .unwrap_or_else(|e| std::panic::resume_unwind(e))
        })
    }

    fn eval(&self, key: OpenKey, stack: &mut EvalStack) -> Result<ExactRational> {
        if let Some(v) = self.cached(&key) {
            return Ok(v);
        }
        if key.beta > self.config.beta_max {
            return Err(GwError::BetaCap {
                beta: key.beta,
                cap: self.config.beta_max,
            });
        }
        if !stack.set.insert(key) {
            let path: Vec<String> = stack.keys.iter().map(ToString::to_string).collect();
            return Err(GwError::CyclicDependency(format!(
                "{key} via {}",
                path.join(" -> ")
            )));
        }
        stack.keys.push(key);
        let result = self.dispatch(key, stack);
        stack.keys.pop();
        stack.set.remove(&key);
        let value = result?;
        self.cache
            .write()
            .unwrap()
            .entry(key)
            .or_insert_with(|| value.clone());
        Ok(value)
    }

    fn dispatch(&self, key: OpenKey, stack: &mut EvalStack) -> Result<ExactRational> {
        let basics = &self.config.basics;
        let base = match (key.beta, key.k, key.l2, key.l3) {
            (1, 1, 0, 0) => Some(&basics.v11),
            (1, 0, 1, 0) => Some(&basics.v102),
            (2, 0, 0, 1) => Some(&basics.v203),
            _ => None,
        };
        if let Some(v) = base {
            self.counters.base.fetch_add(1, Ordering::Relaxed);
            return Ok(v.clone());
        }
        if key.l() >= 2 {
            self.counters.c.fetch_add(1, Ordering::Relaxed);
            self.recursion_c(key, stack)
        } else if key.k >= 2 {
            self.counters.b.fetch_add(1, Ordering::Relaxed);
            self.recursion_b(key, stack)
        } else if key.k >= 1 && key.l() >= 1 {
            self.counters.a.fetch_add(1, Ordering::Relaxed);
            if !(key.k == 1 && key.l() == 1) {
                self.counters.a_other.fetch_add(1, Ordering::Relaxed);
            }
            self.recursion_a(key, stack)
        } else {
            // k + l <= 1 and not a basic key: the degree axiom leaves no room.
            unreachable!("no recursion applies to {key}")
        }
    }

    /// Value of one factor, through normalize and the memo.
    fn factor_value(&self, f: &Normalized, stack: &mut EvalStack) -> Result<ExactRational> {
        match f {
            Normalized::Zero => Ok(ExactRational::zero()),
            Normalized::Value(v) => Ok(v.clone()),
            Normalized::Key { coeff, key } => Ok(coeff * self.eval(*key, stack)?),
        }
    }

    /// `w * x * y`, skipping the evaluation entirely when either factor
    /// vanishes structurally.
    fn product(
        &self,
        current: OpenKey,
        w: &ExactRational,
        x: Factor,
        y: Factor,
        stack: &mut EvalStack,
    ) -> Result<ExactRational> {
        let (nx, ny) = (x.normalized(), y.normalized());
        if nx.is_zero() || ny.is_zero() {
            return Ok(ExactRational::zero());
        }
        for n in [&nx, &ny] {
            if let Normalized::Key { key, .. } = n {
                if key.beta > current.beta {
                    return Err(GwError::CyclicDependency(format!(
                        "{current} refers upward to {key} through a nonvanishing term"
                    )));
                }
            }
        }
        let vx = self.factor_value(&nx, stack)?;
        let vy = self.factor_value(&ny, stack)?;
        Ok(w * vx * vy)
    }

    /// Candidate first-factor degrees in `0..=total`.
    fn beta_choices(&self, total: i64, k: u32, raw: Option<Constraints>) -> Vec<i64> {
        if self.config.exhaustive {
            return (0..=total.max(-1)).collect();
        }
        match raw {
            Some(r) => {
                let s = degree_support(k, &r);
                if (0..=total).contains(&s) {
                    vec![s]
                } else {
                    vec![]
                }
            }
            None => vec![],
        }
    }

    /// Candidate closed degrees `d` in `min_d..=max_d` for insertions `counts`.
    fn closed_degree_choices(&self, counts: [u32; 4], min_d: i64, max_d: i64) -> Vec<u32> {
        if self.config.exhaustive {
            return (min_d.max(0)..=max_d).map(|d| d as u32).collect();
        }
        let s = counts[1] as i64 + 2 * counts[2] as i64 + 3 * counts[3] as i64
            - counts.iter().sum::<u32>() as i64;
        if s >= 0 && s % 4 == 0 && (min_d..=max_d).contains(&(s / 4)) {
            vec![(s / 4) as u32]
        } else {
            vec![]
        }
    }

    /// Recursion (a), for `k >= 1`, `l >= 1`, with `j1` the smallest index.
    fn recursion_a(&self, key: OpenKey, stack: &mut EvalStack) -> Result<ExactRational> {
        let beta = key.beta as i64;
        let (j1, rest) = split_smallest(key);
        let mut total = ExactRational::zero();

        // -Σ GW_d(Δ_{j1-1}, Δ1, Δ_{I1}, Δi) OGW_{β-4d,k}(Γ_{3-i}, Γ_{I2})
        for ((a2, a3), (b2, b3), w) in multiset_splits(rest.g2, rest.g3) {
            for i in 0..4 {
                let mut closed = [0, 1, a2, a3];
                closed[j1 - 1] += 1;
                closed[i] += 1;
                for d in self.closed_degree_choices(closed, 1, beta / 4) {
                    let open = Constraints::only(b2, b3).with(&[3 - i]);
                    let f = Factor::new(beta - 4 * d as i64, key.k, open);
                    total -= self.closed_open(key, &w, d, closed, f, stack)?;
                }
            }
        }

        // Σ binom(k-1, k1) [OGW_{β1,k1}(Γ_{j1-1}, Γ1, Γ_{I1}) OGW_{β2,k2+2}(Γ_{I2})
        //                  - OGW_{β1,k1+1}(Γ_{j1-1}, Γ_{I1}) OGW_{β2,k2+1}(Γ1, Γ_{I2})]
        for k1 in 0..key.k {
            let k2 = key.k - 1 - k1;
            let bk = binomial(key.k - 1, k1);
            for ((a2, a3), (b2, b3), w) in multiset_splits(rest.g2, rest.g3) {
                let w = &bk * &w;
                let i1 = Constraints::only(a2, a3);
                let i2 = Constraints::only(b2, b3);

                let x_raw = i1.with(&[j1 - 1, 1]);
                for b1 in self.beta_choices(beta, k1, x_raw) {
                    let x = Factor::new(b1, k1, x_raw);
                    let y = Factor::new(beta - b1, k2 + 2, Some(i2));
                    total += self.product(key, &w, x, y, stack)?;
                }

                let x_raw = i1.with(&[j1 - 1]);
                for b1 in self.beta_choices(beta, k1 + 1, x_raw) {
                    let x = Factor::new(b1, k1 + 1, x_raw);
                    let y = Factor::new(beta - b1, k2 + 1, i2.with(&[1]));
                    total -= self.product(key, &w, x, y, stack)?;
                }
            }
        }
        Ok(total)
    }

    /// Recursion (b), for `k >= 2`: the right side divided by
    /// `OGW_{2,0}(Γ2, Γ2)`.
    fn recursion_b(&self, key: OpenKey, stack: &mut EvalStack) -> Result<ExactRational> {
        let beta = key.beta as i64;
        let target = beta + 2;
        let splits = multiset_splits(key.l2, key.l3);
        let mut total = ExactRational::zero();

        // Σ GW_d(Δ2, Δ2, Δ_{I1}, Δi) OGW_{β+2-4d,k-1}(Γ_{3-i}, Γ_{I2})
        for ((a2, a3), (b2, b3), w) in &splits {
            for i in 0..4 {
                let mut closed = [0, 0, 2 + a2, *a3];
                closed[i] += 1;
                for d in self.closed_degree_choices(closed, 0, target / 4) {
                    let open = Constraints::only(*b2, *b3).with(&[3 - i]);
                    let f = Factor::new(target - 4 * d as i64, key.k - 1, open);
                    total += self.closed_open(key, w, d, closed, f, stack)?;
                }
            }
        }

        for k1 in 0..=key.k - 2 {
            let k2 = key.k - 2 - k1;
            let bk = binomial(key.k - 2, k1);
            for ((a2, a3), (b2, b3), w) in &splits {
                let w = &bk * w;
                let i1 = Constraints::only(*a2, *a3);
                let i2 = Constraints::only(*b2, *b3);

                // + OGW_{β1,k1+1}(Γ2, Γ_{I1}) OGW_{β2,k2+1}(Γ2, Γ_{I2})
                let x_raw = i1.with(&[2]);
                for b1 in self.beta_choices(target, k1 + 1, x_raw) {
                    let x = Factor::new(b1, k1 + 1, x_raw);
                    let y = Factor::new(target - b1, k2 + 1, i2.with(&[2]));
                    total += self.product(key, &w, x, y, stack)?;
                }

                // - OGW_{β1,k1+2}(Γ_{I1}) OGW_{β2,k2}(Γ2, Γ2, Γ_{I2}), (β1,k1) ≠ (β,k-2)
                let x_raw = Some(i1);
                for b1 in self.beta_choices(target, k1 + 2, x_raw) {
                    if b1 == beta && k1 == key.k - 2 {
                        continue;
                    }
                    let x = Factor::new(b1, k1 + 2, x_raw);
                    let y = Factor::new(target - b1, k2, i2.with(&[2, 2]));
                    total -= self.product(key, &w, x, y, stack)?;
                }
            }
        }

        let divisor = self.eval(
            OpenKey {
                beta: 2,
                k: 0,
                l2: 2,
                l3: 0,
            },
            stack,
        )?;
        if divisor.is_zero() {
            return Err(GwError::DivisorZero);
        }
        Ok(total.checked_div(&divisor)?)
    }

    /// Recursion (c), for `l >= 2`, with `j1 <= j2` the two smallest indices.
    fn recursion_c(&self, key: OpenKey, stack: &mut EvalStack) -> Result<ExactRational> {
        let beta = key.beta as i64;
        let (j1, after_first) = split_smallest(key);
        let (j2, rest) = split_smallest_of(after_first);
        let mut total = ExactRational::zero();

        // OGW_{β,k}(Γ_{j1-1}, Γ_{j2+1}, Γ_I)
        let lead = Factor::new(beta, key.k, rest.with(&[j1 - 1, j2 + 1]));
        let lead = lead.normalized();
        if let Normalized::Key { key: sub, .. } = &lead {
            debug_assert!(sub < &key, "leading term of (c) must descend");
        }
        total += self.factor_value(&lead, stack)?;

        let splits = multiset_splits(rest.g2, rest.g3);

        // Σ GW_d(Δ1, Δ_{j2}, Δ_{I1}, Δi) OGW_{β-4d,k}(Γ_{3-i}, Γ_{j1-1}, Γ_{I2})
        //  - GW_d(Δ1, Δ_{j1-1}, Δ_{I1}, Δi) OGW_{β-4d,k}(Γ_{3-i}, Γ_{j2}, Γ_{I2})
        for ((a2, a3), (b2, b3), w) in &splits {
            for i in 0..4 {
                for (sign, closed_extra, open_extra) in [(1, j2, j1 - 1), (-1, j1 - 1, j2)] {
                    let mut closed = [0, 1, *a2, *a3];
                    closed[closed_extra] += 1;
                    closed[i] += 1;
                    for d in self.closed_degree_choices(closed, 1, beta / 4) {
                        let open = Constraints::only(*b2, *b3).with(&[3 - i, open_extra]);
                        let f = Factor::new(beta - 4 * d as i64, key.k, open);
                        let v = self.closed_open(key, w, d, closed, f, stack)?;
                        if sign > 0 {
                            total += v;
                        } else {
                            total -= v;
                        }
                    }
                }
            }
        }

        // Σ binom(k, k1) [OGW_{β1,k1}(Γ1, Γ_{j1-1}, Γ_{I1}) OGW_{β2,k2+1}(Γ_{j2}, Γ_{I2})
        //               - OGW_{β1,k1}(Γ1, Γ_{j2}, Γ_{I1}) OGW_{β2,k2+1}(Γ_{j1-1}, Γ_{I2})]
        for k1 in 0..=key.k {
            let k2 = key.k - k1;
            let bk = binomial(key.k, k1);
            for ((a2, a3), (b2, b3), w) in &splits {
                let w = &bk * w;
                let i1 = Constraints::only(*a2, *a3);
                let i2 = Constraints::only(*b2, *b3);
                for (sign, x_extra, y_extra) in [(1, j1 - 1, j2), (-1, j2, j1 - 1)] {
                    let x_raw = i1.with(&[1, x_extra]);
                    for b1 in self.beta_choices(beta, k1, x_raw) {
                        let x = Factor::new(b1, k1, x_raw);
                        let y = Factor::new(beta - b1, k2 + 1, i2.with(&[y_extra]));
                        let v = self.product(key, &w, x, y, stack)?;
                        if sign > 0 {
                            total += v;
                        } else {
                            total -= v;
                        }
                    }
                }
            }
        }
        Ok(total)
    }

    /// `w * GW_d(closed) * OGW(open)`.
    fn closed_open(
        &self,
        current: OpenKey,
        w: &ExactRational,
        d: u32,
        closed: [u32; 4],
        open: Factor,
        stack: &mut EvalStack,
    ) -> Result<ExactRational> {
        let gw = self.closed.closed_gw_counts(d, closed)?;
        if gw.is_zero() {
            return Ok(ExactRational::zero());
        }
        let n = open.normalized();
        if n.is_zero() {
            return Ok(ExactRational::zero());
        }
        if let Normalized::Key { key, .. } = &n {
            if key.beta > current.beta {
                return Err(GwError::CyclicDependency(format!(
                    "{current} refers upward to {key} through a closed-open term"
                )));
            }
        }
        Ok(w * gw * self.factor_value(&n, stack)?)
    }

    pub fn stats(&self) -> DispatchStats {
        DispatchStats {
            base: self.counters.base.load(Ordering::Relaxed),
            recursion_a: self.counters.a.load(Ordering::Relaxed),
            recursion_b: self.counters.b.load(Ordering::Relaxed),
            recursion_c: self.counters.c.load(Ordering::Relaxed),
            recursion_a_other_shapes: self.counters.a_other.load(Ordering::Relaxed),
        }
    }

    pub fn snapshot(&self) -> BTreeMap<OpenKey, ExactRational> {
        self.cache
            .read()
            .unwrap()
            .iter()
            .map(|(k, v)| (*k, v.clone()))
            .collect()
    }

    /// Inserts precomputed values; existing entries are kept.
    pub fn load(&self, values: impl IntoIterator<Item = (OpenKey, ExactRational)>) {
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

/// Removes one copy of the smallest constraint index (2 before 3).
fn split_smallest(key: OpenKey) -> (usize, Constraints) {
    split_smallest_of(key.constraints())
}

fn split_smallest_of(c: Constraints) -> (usize, Constraints) {
    if c.g2 > 0 {
        (2, Constraints { g2: c.g2 - 1, ..c })
    } else {
        assert!(c.g3 > 0, "no constraint to split off");
        (3, Constraints { g3: c.g3 - 1, ..c })
    }
}
