//! Tables of open invariants and the analyses run over them: denominator
//! audits, sign periodicity, monotonicity, the `P_R` shift, the orientation
//! and spin sign changes, and re-evaluation under a substituted
//! `OGW_{1,0}(Γ2)`.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::closed_gw::ClosedGw;
use crate::error::{GwError, Result};
use crate::exact_arith::{
    denominator_factorization, is_power_of_four_denominator, is_power_of_two_denominator,
    ExactRational,
};
use crate::open_gw::{BasicInvariants, OpenConfig, OpenGw, OpenKey};

/// Largest `β` rendered with two decimals; larger ones use three
/// significant digits.
pub const FIXED_POINT_MAX_BETA: u32 = 16;

/// One table entry. `l2` is signed because the interior table keeps the
/// structurally zero cells with `β - 2 l3 < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub beta: u32,
    pub k: u32,
    pub l2: i64,
    pub l3: u32,
    pub value: ExactRational,
}

impl TableRow {
    pub fn from_key(key: OpenKey, value: ExactRational) -> Self {
        TableRow {
            beta: key.beta,
            k: key.k,
            l2: key.l2 as i64,
            l3: key.l3,
            value,
        }
    }

    pub fn key(&self) -> Option<OpenKey> {
        let l2 = u32::try_from(self.l2).ok()?;
        OpenKey::new(self.beta, self.k, l2, self.l3)
    }

    pub fn is_boundary(&self) -> bool {
        self.k == self.beta && self.l2 == 0 && self.l3 == 0
    }

    pub fn display(&self) -> String {
        display_value(self.beta, &self.value)
    }

    fn sort_key(&self) -> (u32, u32, i64, u32) {
        (self.beta, self.k, self.l2, self.l3)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableMetadata {
    pub basics: BasicInvariants,
    pub beta_max: u32,
    /// Seconds since the Unix epoch.
    pub generated_at: u64,
}

/// Rows sorted by `(β, k, l2, l3)` without duplicate keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantTable {
    rows: Vec<TableRow>,
    pub metadata: TableMetadata,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    beta: u32,
    k: u32,
    l2: i64,
    l3: u32,
    value: &'a ExactRational,
    display: String,
}

impl InvariantTable {
    /// Sorts the rows; on duplicate keys the first occurrence wins.
    pub fn new(mut rows: Vec<TableRow>, metadata: TableMetadata) -> Self {
        rows.sort_by_key(TableRow::sort_key);
        rows.dedup_by_key(|r| r.sort_key());
        InvariantTable { rows, metadata }
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn get(&self, beta: u32, k: u32, l2: i64, l3: u32) -> Option<&ExactRational> {
        self.rows
            .binary_search_by_key(&(beta, k, l2, l3), TableRow::sort_key)
            .ok()
            .map(|i| &self.rows[i].value)
    }

    /// Same metadata, rows transformed one by one.
    pub fn map_values(&self, mut f: impl FnMut(&TableRow) -> ExactRational) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| TableRow {
                value: f(r),
                ..r.clone()
            })
            .collect();
        InvariantTable {
            rows,
            metadata: self.metadata.clone(),
        }
    }

    /// JSON array of `{"beta","k","l2","l3","value","display"}`; depends
    /// only on the rows, so it is reproducible across runs.
    pub fn to_json(&self) -> String {
        let rows: Vec<JsonRow> = self
            .rows
            .iter()
            .map(|r| JsonRow {
                beta: r.beta,
                k: r.k,
                l2: r.l2,
                l3: r.l3,
                value: &r.value,
                display: r.display(),
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("table rows serialize")
    }
}

fn metadata(gw: &OpenGw, beta_max: u32) -> TableMetadata {
    let generated_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    TableMetadata {
        basics: gw.basics().clone(),
        beta_max,
        generated_at,
    }
}

fn check_beta_max(beta_max: u32) -> Result<()> {
    if beta_max == 0 {
        return Err(GwError::InvalidArgument("β_max must be at least 1".into()));
    }
    Ok(())
}

/// `OGW_{β,β}` for `β = 1..=beta_max`.
pub fn boundary_table(gw: &OpenGw, beta_max: u32) -> Result<InvariantTable> {
    check_beta_max(beta_max)?;
    let rows = (1..=beta_max)
        .map(|beta| {
            let key = OpenKey::boundary(beta);
            Ok(TableRow::from_key(key, gw.open_invariant(key)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantTable::new(rows, metadata(gw, beta_max)))
}

/// `OGW_{β,0}(Γ2^{β-2 l3}, Γ3^{l3})` for `l3 = 0..=3`, `β = 1..=beta_max`,
/// keeping the cells forced to zero by `β - 2 l3 < 0`.
pub fn interior_table(gw: &OpenGw, beta_max: u32) -> Result<InvariantTable> {
    check_beta_max(beta_max)?;
    let mut rows = Vec::new();
    for beta in 1..=beta_max {
        for l3 in 0..=3u32 {
            let l2 = beta as i64 - 2 * l3 as i64;
            let value = match u32::try_from(l2)
                .ok()
                .and_then(|l2| OpenKey::new(beta, 0, l2, l3))
            {
                Some(key) => gw.open_invariant(key)?,
                None => ExactRational::zero(),
            };
            rows.push(TableRow {
                beta,
                k: 0,
                l2,
                l3,
                value,
            });
        }
    }
    Ok(InvariantTable::new(rows, metadata(gw, beta_max)))
}

/// The rendering used in the round column: `"0"` for zero, two decimals for
/// `β ≤ 16`, otherwise three significant digits as `-4.84·10¹⁴`.
pub fn display_value(beta: u32, value: &ExactRational) -> String {
    if value.is_zero() {
        "0".to_string()
    } else if beta <= FIXED_POINT_MAX_BETA {
        fixed_two_decimals(value)
    } else {
        scientific(value, 3)
    }
}

/// `round(n / d)` for `n ≥ 0`, `d > 0`, halves rounded up.
fn round_half_up(n: &BigInt, d: &BigInt) -> BigInt {
    (n * 2u32 + d).div_floor(&(d * 2u32))
}

fn sign_prefix(value: &ExactRational) -> &'static str {
    if value.is_negative() {
        "-"
    } else {
        ""
    }
}

pub fn fixed_two_decimals(value: &ExactRational) -> String {
    let a = value.abs();
    let cents = round_half_up(&(a.numer() * 100), a.denom());
    let (int, frac) = cents.div_rem(&BigInt::from(100));
    let sign = if cents.is_zero() {
        ""
    } else {
        sign_prefix(value)
    };
    format!("{sign}{int}.{:02}", frac)
}

fn superscript(n: i64) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let mut out = String::new();
    if n < 0 {
        out.push('⁻');
    }
    for c in n.unsigned_abs().to_string().chars() {
        out.push(DIGITS[c.to_digit(10).unwrap() as usize]);
    }
    out
}

fn pow10(e: i64) -> ExactRational {
    ExactRational::from_integer(10)
        .pow(e as i32)
        .expect("10 is nonzero")
}

/// Scientific form with `digits` significant digits, rounded exactly.
pub fn scientific(value: &ExactRational, digits: u32) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let a = value.abs();
    let mut e = a.to_f64().log10().floor() as i64;
    while a < pow10(e) {
        e -= 1;
    }
    while a >= pow10(e + 1) {
        e += 1;
    }
    let scaled = &a * &pow10(digits as i64 - 1 - e);
    let mut mantissa = round_half_up(scaled.numer(), scaled.denom());
    let limit = BigInt::from(10).pow(digits);
    if mantissa >= limit {
        mantissa /= 10;
        e += 1;
    }
    let m = mantissa.to_string();
    let body = if m.len() > 1 {
        format!("{}.{}", &m[..1], &m[1..])
    } else {
        m
    };
    format!("{}{}·10{}", sign_prefix(value), body, superscript(e))
}

#[derive(Clone, Debug, Serialize)]
pub struct DenominatorRow {
    pub beta: u32,
    pub k: u32,
    pub l2: i64,
    pub l3: u32,
    pub denominator: String,
    pub factorization: String,
    pub power_of_two: bool,
    pub power_of_four: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DenominatorViolation {
    pub beta: u32,
    pub k: u32,
    pub l2: i64,
    pub l3: u32,
    /// `"power of 4"` for boundary rows, `"power of 2"` otherwise.
    pub expected: &'static str,
    pub factorization: String,
    pub odd_primes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DenominatorReport {
    pub rows: Vec<DenominatorRow>,
    pub boundary_all_power_of_four: bool,
    pub all_power_of_two: bool,
    pub violations: Vec<DenominatorViolation>,
}

/// Odd prime factors of the denominator; an unsplit composite cofactor is
/// shown in brackets.
pub fn odd_denominator_primes(value: &ExactRational) -> Vec<String> {
    let f = denominator_factorization(value);
    let mut out: Vec<String> = f
        .primes
        .keys()
        .filter(|p| **p != 2u32.into())
        .map(ToString::to_string)
        .collect();
    if let Some(c) = f.cofactor {
        out.push(format!("[{c}]"));
    }
    out
}

pub fn denominator_audit(table: &InvariantTable) -> DenominatorReport {
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for r in table.rows() {
        let f = denominator_factorization(&r.value);
        let power_of_two = is_power_of_two_denominator(&r.value);
        let power_of_four = is_power_of_four_denominator(&r.value);
        let expected = if r.is_boundary() {
            "power of 4"
        } else {
            "power of 2"
        };
        let ok = if r.is_boundary() {
            power_of_four
        } else {
            power_of_two
        };
        if !ok {
            violations.push(DenominatorViolation {
                beta: r.beta,
                k: r.k,
                l2: r.l2,
                l3: r.l3,
                expected,
                factorization: f.render(),
                odd_primes: odd_denominator_primes(&r.value),
            });
        }
        rows.push(DenominatorRow {
            beta: r.beta,
            k: r.k,
            l2: r.l2,
            l3: r.l3,
            denominator: r.value.denom().to_string(),
            factorization: f.render(),
            power_of_two,
            power_of_four,
        });
    }
    let boundary_all_power_of_four = rows
        .iter()
        .zip(table.rows())
        .filter(|(_, r)| r.is_boundary())
        .all(|(d, _)| d.power_of_four);
    let all_power_of_two = rows.iter().all(|d| d.power_of_two);
    DenominatorReport {
        rows,
        boundary_all_power_of_four,
        all_power_of_two,
        violations,
    }
}

fn boundary_values(table: &InvariantTable) -> impl Iterator<Item = (u32, &ExactRational)> {
    table
        .rows()
        .iter()
        .filter(|r| r.is_boundary())
        .map(|r| (r.beta, &r.value))
}

#[derive(Clone, Debug, Serialize)]
pub struct SignPeriodicityReport {
    /// Pairs `(β, β+8)` whose signs were compared.
    pub checked: Vec<(u32, u32)>,
    /// Pairs skipped because one of the two values is zero.
    pub skipped: Vec<(u32, u32)>,
    /// Pairs whose signs are not opposite.
    pub mismatches: Vec<(u32, u32)>,
    pub ok: bool,
}

/// Checks `sign OGW_{β,β} = -sign OGW_{β+8,β+8}` on the boundary rows.
pub fn sign_periodicity(table: &InvariantTable) -> SignPeriodicityReport {
    let values: std::collections::BTreeMap<u32, &ExactRational> = boundary_values(table).collect();
    let mut report = SignPeriodicityReport {
        checked: Vec::new(),
        skipped: Vec::new(),
        mismatches: Vec::new(),
        ok: true,
    };
    for (&beta, v) in &values {
        let Some(w) = values.get(&(beta + 8)) else {
            continue;
        };
        let pair = (beta, beta + 8);
        if v.is_zero() || w.is_zero() {
            report.skipped.push(pair);
            continue;
        }
        report.checked.push(pair);
        if v.signum() != -w.signum() {
            report.mismatches.push(pair);
        }
    }
    report.ok = report.mismatches.is_empty();
    report
}

/// Every `β` with `|OGW_{β-1,β-1}| > |OGW_{β,β}|`.
pub fn monotonicity_violations(table: &InvariantTable) -> Vec<u32> {
    let values: std::collections::BTreeMap<u32, ExactRational> =
        boundary_values(table).map(|(b, v)| (b, v.abs())).collect();
    values
        .iter()
        .filter_map(|(&beta, v)| {
            let prev = values.get(&beta.checked_sub(1)?)?;
            (prev > v).then_some(beta)
        })
        .collect()
}

/// The closed invariant `GW_{β/4}` of the absolute images of the row's
/// interior constraints, or `None` when the row is unaffected by `P_R`.
fn pr_closed_term(closed: &ClosedGw, row: &TableRow) -> Result<Option<ExactRational>> {
    if row.k != 0 || !row.beta.is_multiple_of(4) || row.l2 < 0 {
        return Ok(None);
    }
    let mut insertions = vec![2usize; row.l2 as usize];
    insertions.extend(std::iter::repeat_n(3, row.l3 as usize));
    let gw = closed.closed_gw(row.beta / 4, &insertions)?;
    Ok(Some(ExactRational::frac(row.beta as i64 / 4, 1) * gw))
}

/// Values for the left inverse `P_R'` with `P_R'(Δ2) = p`:
/// `OGW' = OGW - (β/4) GW_{β/4}(Δ...) p` on rows with `β ∈ 4Z`, `k = 0`.
pub fn pr_shift(
    table: &InvariantTable,
    p: &ExactRational,
    closed: &ClosedGw,
) -> Result<InvariantTable> {
    let mut rows = Vec::with_capacity(table.rows().len());
    for r in table.rows() {
        let value = match pr_closed_term(closed, r)? {
            Some(c) => &r.value - &(c * p),
            None => r.value.clone(),
        };
        rows.push(TableRow { value, ..r.clone() });
    }
    Ok(InvariantTable {
        rows,
        metadata: table.metadata.clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PrCertificate {
    /// `p` making `OGW'_{4,0}(Γ3,Γ3)` vanish.
    pub p_from_g3_g3: ExactRational,
    /// `p` making `OGW'_{4,0}(Γ2,Γ2,Γ3)` vanish.
    pub p_from_g2_g2_g3: ExactRational,
    pub verdict: &'static str,
}

/// Shows that no choice of `P_R` makes both degree-4 mixed invariants
/// vanish.
pub fn pr_certificate(gw: &OpenGw) -> Result<PrCertificate> {
    let solve = |l2: u32, l3: u32| -> Result<ExactRational> {
        let key = OpenKey::new(4, 0, l2, l3).expect("balanced key");
        let row = TableRow::from_key(key, gw.open_invariant(key)?);
        let c = pr_closed_term(gw.closed(), &row)?.expect("β = 4, k = 0");
        Ok(row.value.checked_div(&c)?)
    };
    let p1 = solve(0, 2)?;
    let p2 = solve(2, 1)?;
    let verdict = if p1 == p2 {
        "consistent"
    } else {
        "inconsistent"
    };
    Ok(PrCertificate {
        p_from_g3_g3: p1,
        p_from_g2_g2_g3: p2,
        verdict,
    })
}

/// Reversing the orientation of `L` multiplies `OGW_{β,k}` by
/// `(-1)^{k+1}`.
pub fn orientation_flip(table: &InvariantTable) -> InvariantTable {
    table.map_values(|r| {
        if r.k % 2 == 0 {
            -r.value.clone()
        } else {
            r.value.clone()
        }
    })
}

/// Twisting the spin structure by the nonzero `α ∈ H^1(L; Z/2)` multiplies
/// `OGW_β` by `(-1)^{α(∂β)}`. Since `H_1(L) = Z/4` is generated by `∂` of
/// the degree-one class, the only nonzero `α` is reduction mod 2 of
/// `Z/4`, so the sign is `(-1)^β`.
pub fn spin_flip(table: &InvariantTable) -> InvariantTable {
    table.map_values(|r| {
        if r.beta % 2 == 1 {
            -r.value.clone()
        } else {
            r.value.clone()
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OverrideRow {
    pub k: u32,
    pub value: ExactRational,
    pub factorization: String,
    pub power_of_two: bool,
    pub odd_primes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OverrideReport {
    pub v: ExactRational,
    pub m: u32,
    /// `OGW_{k,k}` for `k = 1..=m+1`.
    pub rows: Vec<OverrideRow>,
    /// Every `k ≤ m` has a power-of-2 denominator.
    pub pass: bool,
}

impl OverrideReport {
    pub fn row(&self, k: u32) -> Option<&OverrideRow> {
        self.rows.iter().find(|r| r.k == k)
    }
}

/// Recomputes `OGW_{k,k}`, `k = 1..=m+1`, in a fresh cache with
/// `OGW_{1,0}(Γ2) = v`. Closed invariants are shared with `closed`.
pub fn override_check(v: &ExactRational, m: u32, closed: Arc<ClosedGw>) -> Result<OverrideReport> {
    if m == 0 {
        return Err(GwError::InvalidArgument("M must be at least 1".into()));
    }
    let basics = BasicInvariants {
        v102: v.clone(),
        ..BasicInvariants::default()
    };
    let config = OpenConfig {
        basics,
        ..OpenConfig::default()
    };
    let gw = OpenGw::new(config, closed);
    let mut rows = Vec::new();
    for k in 1..=m + 1 {
        let value = gw.open_invariant(OpenKey::boundary(k))?;
        rows.push(OverrideRow {
            k,
            factorization: denominator_factorization(&value).render(),
            power_of_two: is_power_of_two_denominator(&value),
            odd_primes: odd_denominator_primes(&value),
            value,
        });
    }
    let pass = rows.iter().filter(|r| r.k <= m).all(|r| r.power_of_two);
    Ok(OverrideReport {
        v: v.clone(),
        m,
        rows,
        pass,
    })
}

/// Heuristic scan over `v = p / 2^t` with `p` in `numerators` and `t` in
/// `exponents`, returning the values `≠ 1/4` that pass
/// [`override_check`] for `m`. Values where the recursion divides by zero
/// are skipped.
pub fn v_search_range(
    numerators: RangeInclusive<i64>,
    exponents: RangeInclusive<u32>,
    m: u32,
    closed: Arc<ClosedGw>,
) -> Result<Vec<ExactRational>> {
    let default_v = BasicInvariants::default().v102;
    let mut candidates = BTreeSet::new();
    for t in exponents {
        let den = BigInt::from(2).pow(t);
        for p in numerators.clone() {
            candidates.insert(ExactRational::new(p, den.clone())?);
        }
    }
    let mut out = Vec::new();
    for v in candidates {
        if v == default_v {
            continue;
        }
        match override_check(&v, m, closed.clone()) {
            Ok(report) if report.pass => out.push(v),
            Ok(_) | Err(GwError::DivisorZero) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// [`v_search_range`] over `|p| ≤ numerator_bound`, `t ≤ max_exponent`.
pub fn v_search(
    numerator_bound: i64,
    max_exponent: u32,
    m: u32,
    closed: Arc<ClosedGw>,
) -> Result<Vec<ExactRational>> {
    if numerator_bound < 0 {
        return Ok(Vec::new());
    }
    v_search_range(
        -numerator_bound..=numerator_bound,
        0..=max_exponent,
        m,
        closed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(r: i64, s: i64) -> ExactRational {
        ExactRational::frac(r, s)
    }

    #[test]
    fn fixed_point_display() {
        assert_eq!(display_value(7, &q(16005, 4096)), "3.91");
        assert_eq!(display_value(12, &q(9045, 4)), "2261.25");
        assert_eq!(display_value(3, &q(-7, 16)), "-0.44");
        assert_eq!(display_value(16, &q(-4860, 1)), "-4860.00");
        assert_eq!(display_value(8, &q(0, 1)), "0");
        assert_eq!(display_value(1, &q(1, 1000)), "0.00");
        assert_eq!(display_value(1, &q(-1, 1000)), "0.00");
    }

    #[test]
    fn scientific_display() {
        assert_eq!(scientific(&q(76_800_000, 1), 3), "7.68·10⁷");
        assert_eq!(scientific(&q(-4_845_000, 1), 3), "-4.85·10⁶");
        assert_eq!(scientific(&q(9_995, 1), 3), "1.00·10⁴");
        assert_eq!(scientific(&q(1, 8), 3), "1.25·10⁻¹");
        assert_eq!(scientific(&q(1000, 1), 3), "1.00·10³");
        assert_eq!(scientific(&q(999, 1), 3), "9.99·10²");
        assert_eq!(scientific(&q(5, 1), 1), "5·10⁰");
    }

    #[test]
    fn table_sorting_and_lookup() {
        let meta = TableMetadata {
            basics: BasicInvariants::default(),
            beta_max: 2,
            generated_at: 0,
        };
        let rows = vec![
            TableRow {
                beta: 2,
                k: 0,
                l2: 2,
                l3: 0,
                value: q(1, 1),
            },
            TableRow {
                beta: 1,
                k: 0,
                l2: 1,
                l3: 0,
                value: q(2, 1),
            },
            TableRow {
                beta: 2,
                k: 0,
                l2: 2,
                l3: 0,
                value: q(3, 1),
            },
        ];
        let t = InvariantTable::new(rows, meta);
        assert_eq!(t.rows().len(), 2);
        assert_eq!(t.rows()[0].beta, 1);
        assert_eq!(t.get(2, 0, 2, 0), Some(&q(1, 1)));
        assert_eq!(t.get(3, 0, 3, 0), None);
    }

    #[test]
    fn flips_on_small_rows() {
        let gw = OpenGw::default();
        let t = boundary_table(&gw, 2).unwrap();
        let o = orientation_flip(&t);
        assert_eq!(o.get(1, 1, 0, 0), Some(&q(3, 1)));
        assert_eq!(o.get(2, 2, 0, 0), Some(&q(-5, 4)));
        let i = interior_table(&gw, 1).unwrap();
        assert_eq!(spin_flip(&i).get(1, 0, 1, 0), Some(&q(-1, 4)));
    }

    #[test]
    fn zero_beta_max_is_rejected() {
        let gw = OpenGw::default();
        assert!(matches!(
            boundary_table(&gw, 0),
            Err(GwError::InvalidArgument(_))
        ));
    }

    #[test]
    fn override_rejects_vanishing_divisor() {
        let r = override_check(&q(-8, 3), 2, Arc::new(ClosedGw::new()));
        assert!(matches!(r, Err(GwError::DivisorZero)));
    }

    #[test]
    fn empty_search_bounds() {
        assert!(v_search(-1, 3, 2, Arc::new(ClosedGw::new()))
            .unwrap()
            .is_empty());
    }
}
