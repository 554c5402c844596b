//! Small relative quantum cohomology of `(CP^3, L_△)`.
//!
//! The module is `Ĥ*(CP^3, L_△)` with basis `Γ0..Γ3, Γ_⋄` over finite
//! series in `q^{1/4}`; the exponent of `q^{1/4}` is the relative class
//! `β`, so a closed curve of degree `d` contributes `q^d`. On basis elements
//!
//! ```text
//! Γu * Γv = Σ_{d,l} q^d GW_d(Δu, Δv, Δl) Γ_{3-l} + Σ_β q^{β/4} OGW_{β,0}(Γu, Γv) Γ_⋄
//! ```
//!
//! with `Δ_⋄ = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Sub};

use serde::Serialize;

use crate::error::Result;
use crate::exact_arith::{ExactRational, NovikovSeries};
use crate::open_gw::{degree_support, Constraints, OpenGw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Basis {
    G0,
    G1,
    G2,
    G3,
    Diamond,
}

impl Basis {
    pub const ALL: [Basis; 5] = [Basis::G0, Basis::G1, Basis::G2, Basis::G3, Basis::Diamond];

    /// Cohomological degree.
    pub fn degree(self) -> u32 {
        match self {
            Basis::G0 => 0,
            Basis::G1 => 2,
            Basis::G2 => 4,
            Basis::G3 => 6,
            Basis::Diamond => 4,
        }
    }

    /// Index `j` of `Γj`/`Δj`; `None` for `Γ_⋄`, whose image in `H*(CP^3)`
    /// is zero.
    pub fn index(self) -> Option<usize> {
        match self {
            Basis::G0 => Some(0),
            Basis::G1 => Some(1),
            Basis::G2 => Some(2),
            Basis::G3 => Some(3),
            Basis::Diamond => None,
        }
    }

    pub fn from_index(j: usize) -> Option<Basis> {
        Basis::ALL.get(j).copied().filter(|b| *b != Basis::Diamond)
    }

    fn constraint(self) -> Constraints {
        let mut c = Constraints::default();
        match self {
            Basis::G0 => c.g0 = 1,
            Basis::G1 => c.g1 = 1,
            Basis::G2 => c.g2 = 1,
            Basis::G3 => c.g3 = 1,
            Basis::Diamond => c.diamond = 1,
        }
        c
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index() {
            Some(j) => write!(f, "Γ{j}"),
            None => write!(f, "Γ⋄"),
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "0" | "G0" | "g0" | "Γ0" => Ok(Basis::G0),
            "1" | "G1" | "g1" | "Γ1" => Ok(Basis::G1),
            "2" | "G2" | "g2" | "Γ2" => Ok(Basis::G2),
            "3" | "G3" | "g3" | "Γ3" => Ok(Basis::G3),
            "d" | "D" | "diamond" | "Γ⋄" => Ok(Basis::Diamond),
            _ => Err(format!("unknown basis element {s:?}")),
        }
    }
}

/// The interior constraint list `(Γu, Γv)`.
fn pair_constraints(u: Basis, v: Basis) -> Constraints {
    let (a, b) = (u.constraint(), v.constraint());
    Constraints::new(
        a.g0 + b.g0,
        a.g1 + b.g1,
        a.g2 + b.g2,
        a.g3 + b.g3,
        a.diamond + b.diamond,
    )
}

/// Element of the small relative quantum cohomology; no zero series is
/// stored.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct QhElement {
    coeffs: BTreeMap<Basis, NovikovSeries>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QhTerm {
    pub basis: String,
    /// Power of `q^{1/4}`.
    pub exponent: u32,
    pub value: ExactRational,
}

impl QhElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(b: Basis) -> Self {
        Self::term(b, 0, ExactRational::one())
    }

    /// `c * q^{m/4} * b`.
    pub fn term(b: Basis, m: u32, c: ExactRational) -> Self {
        let mut out = Self::zero();
        out.add_series(b, &NovikovSeries::monomial(m, c));
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, b: Basis) -> NovikovSeries {
        self.coeffs.get(&b).cloned().unwrap_or_default()
    }

    pub fn add_series(&mut self, b: Basis, s: &NovikovSeries) {
        let sum = &self.coeff(b) + s;
        if sum.is_zero() {
            self.coeffs.remove(&b);
        } else {
            self.coeffs.insert(b, sum);
        }
    }

    /// Multiplies every coefficient by `c * q^{m/4}`.
    pub fn scale(&self, m: u32, c: &ExactRational) -> Self {
        let factor = NovikovSeries::monomial(m, c.clone());
        let mut out = Self::zero();
        for (b, s) in &self.coeffs {
            out.add_series(*b, &(s * &factor));
        }
        out
    }

    pub fn terms(&self) -> Vec<QhTerm> {
        self.coeffs
            .iter()
            .flat_map(|(b, s)| {
                s.terms().map(move |(m, c)| QhTerm {
                    basis: b.to_string(),
                    exponent: m,
                    value: c.clone(),
                })
            })
            .collect()
    }

    /// Total degree if homogeneous, with `|q^{1/4}| = 2`.
    pub fn homogeneous_degree(&self) -> Option<Option<u32>> {
        let mut deg = None;
        for (b, s) in &self.coeffs {
            for (m, _) in s.terms() {
                let d = b.degree() + 2 * m;
                match deg {
                    None => deg = Some(d),
                    Some(prev) if prev != d => return None,
                    _ => {}
                }
            }
        }
        Some(deg)
    }
}

impl Add for &QhElement {
    type Output = QhElement;
    fn add(self, rhs: &QhElement) -> QhElement {
        let mut out = self.clone();
        for (b, s) in &rhs.coeffs {
            out.add_series(*b, s);
        }
        out
    }
}

impl Sub for &QhElement {
    type Output = QhElement;
    fn sub(self, rhs: &QhElement) -> QhElement {
        let mut out = self.clone();
        for (b, s) in &rhs.coeffs {
            out.add_series(*b, &-s);
        }
        out
    }
}

impl fmt::Display for QhElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{} · q^{{{}/4}} · {}", t.value, t.exponent, t.basis)?;
        }
        Ok(())
    }
}

impl fmt::Debug for QhElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for QhElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms().serialize(s)
    }
}

/// Product structure backed by an open engine (and its closed engine).
pub struct Rqc<'a> {
    open: &'a OpenGw,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub residual: QhElement,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PresentationReport {
    pub relations: Vec<RelationCheck>,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssociativityReport {
    pub triples_checked: usize,
    pub pairs_checked: usize,
    pub associativity_failures: Vec<(Basis, Basis, Basis, QhElement)>,
    pub commutativity_failures: Vec<(Basis, Basis, QhElement)>,
    pub ok: bool,
}

impl<'a> Rqc<'a> {
    pub fn new(open: &'a OpenGw) -> Self {
        Rqc { open }
    }

    /// `Γu * Γv`.
    pub fn basis_product(&self, u: Basis, v: Basis) -> Result<QhElement> {
        let mut out = QhElement::zero();
        if let (Some(iu), Some(iv)) = (u.index(), v.index()) {
            for l in 0..4 {
                // GW_d(Δu, Δv, Δl) can only be nonzero for 4d = u + v + l - 3.
                let s = iu + iv + l;
                if s < 3 || (s - 3) % 4 != 0 {
                    continue;
                }
                let d = ((s - 3) / 4) as u32;
                let gw = self.open.closed().closed_gw(d, &[iu, iv, l])?;
                if !gw.is_zero() {
                    let target = Basis::from_index(3 - l).expect("index in range");
                    out.add_series(target, &NovikovSeries::monomial(4 * d, gw));
                }
            }
        }
        let raw = pair_constraints(u, v);
        let beta = degree_support(0, &raw);
        if beta >= 0 {
            let v = self.open.evaluate(beta as u32, 0, raw)?;
            out.add_series(Basis::Diamond, &NovikovSeries::monomial(beta as u32, v));
        }
        Ok(out)
    }

    pub fn small_product(&self, x: &QhElement, y: &QhElement) -> Result<QhElement> {
        let mut out = QhElement::zero();
        for (bx, sx) in &x.coeffs {
            for (by, sy) in &y.coeffs {
                let coeff = sx * sy;
                let prod = self.basis_product(*bx, *by)?;
                for (b, s) in &prod.coeffs {
                    out.add_series(*b, &(s * &coeff));
                }
            }
        }
        Ok(out)
    }

    pub fn power(&self, x: &QhElement, n: u32) -> Result<QhElement> {
        let mut acc = QhElement::basis(Basis::G0);
        for _ in 0..n {
            acc = self.small_product(&acc, x)?;
        }
        Ok(acc)
    }

    /// Checks the ring presentation with `x = Γ1`, `y = Γ_⋄`.
    pub fn verify_presentation(&self) -> Result<PresentationReport> {
        let x = QhElement::basis(Basis::G1);
        let y = QhElement::basis(Basis::Diamond);
        let one = QhElement::basis(Basis::G0);
        let q = |r: i64, s: i64| ExactRational::frac(r, s);

        let x2 = self.power(&x, 2)?;
        let x3 = self.power(&x, 3)?;
        let x4 = self.power(&x, 4)?;
        let xy = self.small_product(&x, &y)?;
        let yy = self.small_product(&y, &y)?;

        let checks = vec![
            (
                "x^4 - q + (35/64) q^{1/2} y",
                &(&x4 - &one.scale(4, &q(1, 1))) + &y.scale(2, &q(35, 64)),
            ),
            ("y^2 - (5/4) q^{1/2} y", &yy - &y.scale(2, &q(5, 4))),
            ("xy + (3/4) q^{1/4} y", &xy + &y.scale(1, &q(3, 4))),
            ("x^2 - Γ2", &x2 - &QhElement::basis(Basis::G2)),
            (
                "x^3 - Γ3 - (1/16) q^{1/4} y",
                &(&x3 - &QhElement::basis(Basis::G3)) - &y.scale(1, &q(1, 16)),
            ),
        ];
        let relations: Vec<RelationCheck> = checks
            .into_iter()
            .map(|(name, residual)| RelationCheck {
                relation: name.to_string(),
                ok: residual.is_zero(),
                residual,
            })
            .collect();
        let ok = relations.iter().all(|r| r.ok);
        Ok(PresentationReport { relations, ok })
    }

    /// Associativity on all 125 ordered basis triples and commutativity on
    /// all 25 ordered pairs.
    pub fn associativity_check(&self) -> Result<AssociativityReport> {
        let mut table = BTreeMap::new();
        for &a in &Basis::ALL {
            for &b in &Basis::ALL {
                table.insert((a, b), self.basis_product(a, b)?);
            }
        }
        let mut commutativity_failures = Vec::new();
        for &a in &Basis::ALL {
            for &b in &Basis::ALL {
                let r = &table[&(a, b)] - &table[&(b, a)];
                if !r.is_zero() {
                    commutativity_failures.push((a, b, r));
                }
            }
        }
        let mut associativity_failures = Vec::new();
        for &a in &Basis::ALL {
            for &b in &Basis::ALL {
                for &c in &Basis::ALL {
                    let ab = &table[&(a, b)];
                    let bc = &table[&(b, c)];
                    let left = self.small_product(ab, &QhElement::basis(c))?;
                    let right = self.small_product(&QhElement::basis(a), bc)?;
                    let r = &left - &right;
                    if !r.is_zero() {
                        associativity_failures.push((a, b, c, r));
                    }
                }
            }
        }
        let ok = associativity_failures.is_empty() && commutativity_failures.is_empty();
        Ok(AssociativityReport {
            triples_checked: 125,
            pairs_checked: 25,
            associativity_failures,
            commutativity_failures,
            ok,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(r: i64, s: i64) -> ExactRational {
        ExactRational::frac(r, s)
    }

    #[test]
    fn products_of_generators() {
        let open = OpenGw::default();
        let rqc = Rqc::new(&open);
        assert_eq!(
            rqc.basis_product(Basis::G1, Basis::G1).unwrap(),
            QhElement::basis(Basis::G2)
        );
        let expected = &QhElement::basis(Basis::G3) + &QhElement::term(Basis::Diamond, 1, q(1, 16));
        assert_eq!(rqc.basis_product(Basis::G1, Basis::G2).unwrap(), expected);
        assert_eq!(
            rqc.basis_product(Basis::Diamond, Basis::Diamond).unwrap(),
            QhElement::term(Basis::Diamond, 2, q(5, 4))
        );
        assert_eq!(
            rqc.basis_product(Basis::G1, Basis::Diamond).unwrap(),
            QhElement::term(Basis::Diamond, 1, q(-3, 4))
        );
        for b in Basis::ALL {
            assert_eq!(
                rqc.basis_product(Basis::G0, b).unwrap(),
                QhElement::basis(b),
                "{b}"
            );
        }
    }

    #[test]
    fn display_and_json() {
        let e = &QhElement::basis(Basis::G3) + &QhElement::term(Basis::Diamond, 1, q(1, 16));
        assert_eq!(e.to_string(), "1 · q^{0/4} · Γ3 + 1/16 · q^{1/4} · Γ⋄");
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"[{"basis":"Γ3","exponent":0,"value":"1"},{"basis":"Γ⋄","exponent":1,"value":"1/16"}]"#
        );
    }

    #[test]
    fn grading_of_basis_products() {
        let open = OpenGw::default();
        let rqc = Rqc::new(&open);
        for a in Basis::ALL {
            for b in Basis::ALL {
                let p = rqc.basis_product(a, b).unwrap();
                let deg = p.homogeneous_degree().expect("homogeneous");
                if let Some(d) = deg {
                    assert_eq!(d, a.degree() + b.degree(), "{a} * {b} = {p}");
                }
            }
        }
    }

    #[test]
    fn diamond_component_reads_back_open_invariants() {
        let open = OpenGw::default();
        let rqc = Rqc::new(&open);
        for u in Basis::ALL {
            for v in Basis::ALL {
                let raw = pair_constraints(u, v);
                let series = rqc.basis_product(u, v).unwrap().coeff(Basis::Diamond);
                for beta in 0..8 {
                    assert_eq!(
                        series.coeff(beta),
                        open.evaluate(beta, 0, raw).unwrap(),
                        "{u} * {v}, β={beta}"
                    );
                }
            }
        }
    }

    #[test]
    fn presentation_and_associativity() {
        let open = OpenGw::default();
        let rqc = Rqc::new(&open);
        let pres = rqc.verify_presentation().unwrap();
        assert!(pres.ok, "{pres:?}");
        let assoc = rqc.associativity_check().unwrap();
        assert!(assoc.ok, "{assoc:?}");
    }
}
