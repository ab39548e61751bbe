//! Finite sums of `k · e^{λx} · y^p · (y')^q`.
//!
//! The basis is closed under addition, multiplication and the partial
//! derivatives in `x`, `y` and `y'`, which is all the symmetry computations
//! need. Every value is kept in normal form: like terms (same `p`, `q` and
//! `λ` within [`LAMBDA_TOL`]) are merged, negligible coefficients dropped,
//! and terms sorted by `(p, q, Re λ, Im λ)`.

use crate::error::{Error, Result};
use crate::num::complex::{is_finite, Cx, ONE, ZERO};
use std::fmt;
use std::str::FromStr;

/// Absolute tolerance under which two exponential rates are merged.
pub const LAMBDA_TOL: f64 = 1e-12;
/// Relative threshold (to the largest coefficient) below which a term is dropped.
pub const ZERO_TOL: f64 = 1e-12;
/// Largest power of `y` or `y'` a term may carry.
pub const DEGREE_CAP: u32 = 8;

/// Differentiation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Yp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: Cx,
    pub lambda: Cx,
    pub p: u32,
    pub q: u32,
}

impl Term {
    pub fn new(coeff: Cx, lambda: Cx, p: u32, q: u32) -> Result<Self> {
        if p > DEGREE_CAP || q > DEGREE_CAP {
            return Err(Error::DegreeOverflow { p, q });
        }
        if !is_finite(coeff) || !is_finite(lambda) {
            return Err(Error::InvalidInput("non-finite term".into()));
        }
        Ok(Self {
            coeff,
            lambda,
            p,
            q,
        })
    }

    pub fn eval(&self, x: f64, y: Cx, yp: Cx) -> Cx {
        let mut v = self.coeff * (self.lambda * x).exp();
        if self.p > 0 {
            v *= y.powu(self.p);
        }
        if self.q > 0 {
            v *= yp.powu(self.q);
        }
        v
    }

    fn key_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.p
            .cmp(&other.p)
            .then(self.q.cmp(&other.q))
            .then(self.lambda.re.total_cmp(&other.lambda.re))
            .then(self.lambda.im.total_cmp(&other.lambda.im))
    }
}

/// Outcome of [`ExpPoly::is_zero`].
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTest {
    pub zero: bool,
    pub max_coeff: f64,
    /// Largest-magnitude term when the test fails.
    pub witness: Option<Term>,
}

#[derive(Debug, Clone, Default)]
pub struct ExpPoly {
    terms: Vec<Term>,
    /// Magnitude bound of the inputs that went into this value; cancellation
    /// residue is judged relative to it.
    scale: f64,
}

impl PartialEq for ExpPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Cx) -> Self {
        Self::from_terms(vec![Term {
            coeff: c,
            lambda: ZERO,
            p: 0,
            q: 0,
        }])
    }

    /// `k · e^{λx}`.
    pub fn exp(coeff: Cx, lambda: Cx) -> Self {
        Self::from_terms(vec![Term {
            coeff,
            lambda,
            p: 0,
            q: 0,
        }])
    }

    pub fn y() -> Self {
        Self::monomial(1, 0)
    }

    pub fn yp() -> Self {
        Self::monomial(0, 1)
    }

    /// `y^p (y')^q` with unit coefficient.
    pub fn monomial(p: u32, q: u32) -> Self {
        assert!(
            p <= DEGREE_CAP && q <= DEGREE_CAP,
            "monomial beyond degree cap"
        );
        Self::from_terms(vec![Term {
            coeff: ONE,
            lambda: ZERO,
            p,
            q,
        }])
    }

    pub fn term(coeff: Cx, lambda: Cx, p: u32, q: u32) -> Result<Self> {
        Ok(Self::from_terms(vec![Term::new(coeff, lambda, p, q)?]))
    }

    /// Builds a normal-form value from arbitrary terms.
    pub fn from_terms(terms: Vec<Term>) -> Self {
        let scale = terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        let mut out = Self { terms, scale };
        out.normalize();
        out
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// True when no term depends on `y` or `y'`.
    pub fn is_x_only(&self) -> bool {
        self.terms.iter().all(|t| t.p == 0 && t.q == 0)
    }

    /// True when no term depends on `y'`.
    pub fn is_point(&self) -> bool {
        self.terms.iter().all(|t| t.q == 0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.norm())
            .fold(0.0, f64::max)
    }

    fn normalize(&mut self) {
        let mut sorted = std::mem::take(&mut self.terms);
        sorted.sort_by(Term::key_cmp);
        let mut merged: Vec<Term> = Vec::with_capacity(sorted.len());
        for t in sorted {
            match merged
                .iter_mut()
                .find(|m| m.p == t.p && m.q == t.q && (m.lambda - t.lambda).norm() <= LAMBDA_TOL)
            {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        let max = merged.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        merged.retain(|t| t.coeff.norm() > ZERO_TOL * max);
        merged.sort_by(Term::key_cmp);
        self.terms = merged;
    }

    /// Re-runs normalization; a no-op on values built through this API.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        out.normalize();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        let mut out = Self {
            terms,
            scale: self.scale.max(other.scale),
        };
        out.normalize();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale_by(-ONE)
    }

    pub fn scale_by(&self, k: Cx) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * k,
                ..*t
            })
            .collect();
        let mut out = Self {
            terms,
            scale: self.scale * k.norm(),
        };
        out.normalize();
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let (p, q) = (a.p + b.p, a.q + b.q);
                if p > DEGREE_CAP || q > DEGREE_CAP {
                    return Err(Error::DegreeOverflow { p, q });
                }
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    lambda: a.lambda + b.lambda,
                    p,
                    q,
                });
            }
        }
        let mut out = Self {
            terms,
            scale: self.scale * other.scale,
        };
        out.normalize();
        Ok(out)
    }

    /// Exact termwise partial derivative.
    pub fn diff(&self, var: Var) -> Self {
        let mut growth: f64 = 1.0;
        let terms = self
            .terms
            .iter()
            .filter_map(|t| match var {
                Var::X => {
                    growth = growth.max(t.lambda.norm());
                    Some(Term {
                        coeff: t.coeff * t.lambda,
                        ..*t
                    })
                }
                Var::Y if t.p > 0 => {
                    growth = growth.max(t.p as f64);
                    Some(Term {
                        coeff: t.coeff * t.p as f64,
                        p: t.p - 1,
                        ..*t
                    })
                }
                Var::Yp if t.q > 0 => {
                    growth = growth.max(t.q as f64);
                    Some(Term {
                        coeff: t.coeff * t.q as f64,
                        q: t.q - 1,
                        ..*t
                    })
                }
                _ => None,
            })
            .collect();
        let mut out = Self {
            terms,
            scale: self.scale * growth,
        };
        out.normalize();
        out
    }

    pub fn eval(&self, x: f64, y: Cx, yp: Cx) -> Cx {
        self.terms.iter().map(|t| t.eval(x, y, yp)).sum()
    }

    /// Zero test relative to the construction scale:
    /// every `|coeff| <= tol * (1 + scale)`.
    pub fn is_zero(&self, tol: f64) -> ZeroTest {
        let bound = tol * (1.0 + self.scale);
        let witness = self
            .terms
            .iter()
            .copied()
            .max_by(|a, b| a.coeff.norm().total_cmp(&b.coeff.norm()));
        let max_coeff = witness.map_or(0.0, |w| w.coeff.norm());
        let zero = max_coeff <= bound;
        ZeroTest {
            zero,
            max_coeff,
            witness: if zero { None } else { witness },
        }
    }

    /// Coefficient of `y^p (y')^q`, as a function of `x` alone.
    pub fn coefficient_of(&self, p: u32, q: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.p == p && t.q == q)
            .map(|t| Term { p: 0, q: 0, ..*t })
            .collect();
        Self {
            terms,
            scale: self.scale,
        }
    }

    /// Largest `|value|` over a set of evaluation points.
    pub fn max_abs_on(&self, points: impl IntoIterator<Item = (f64, Cx, Cx)>) -> f64 {
        points
            .into_iter()
            .map(|(x, y, yp)| self.eval(x, y, yp).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}·e^{{{}x}}·y^{}·y'^{}",
            fmt_cx(self.coeff),
            fmt_cx(self.lambda),
            self.p,
            self.q
        )
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// `(re+imi)` with shortest round-trip decimals.
pub fn fmt_cx(z: Cx) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("({}{}{}i)", z.re, sign, z.im.abs())
}

pub fn parse_cx(s: &str) -> Result<Cx> {
    let bad = || Error::Parse(format!("malformed complex literal `{s}`"));
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix("i)"))
        .ok_or_else(bad)?;
    let bytes = inner.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = inner[..split].parse().map_err(|_| bad())?;
    let im: f64 = inner[split..].parse().map_err(|_| bad())?;
    Ok(Cx::new(re, im))
}

fn parse_term(s: &str) -> Result<Term> {
    let bad = || Error::Parse(format!("malformed term `{s}`"));
    let mut parts = s.split('·');
    let coeff = parse_cx(parts.next().ok_or_else(bad)?)?;
    let lambda = parts
        .next()
        .and_then(|e| e.strip_prefix("e^{"))
        .and_then(|e| e.strip_suffix("x}"))
        .ok_or_else(bad)
        .and_then(parse_cx)?;
    let p: u32 = parts
        .next()
        .and_then(|e| e.strip_prefix("y^"))
        .and_then(|e| e.parse().ok())
        .ok_or_else(bad)?;
    let q: u32 = parts
        .next()
        .and_then(|e| e.strip_prefix("y'^"))
        .and_then(|e| e.parse().ok())
        .ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Term::new(coeff, lambda, p, q)
}

impl FromStr for ExpPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero());
        }
        let terms = s.split(" + ").map(parse_term).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_terms(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::complex::{cx, real, I};

    #[test]
    fn add_like_terms() {
        assert_eq!(
            ExpPoly::y().add(&ExpPoly::y()),
            ExpPoly::y().scale_by(real(2.0))
        );
        let e2 = ExpPoly::exp(ONE, real(2.0));
        assert!(e2.add(&e2.neg()).is_empty());
        let s = ExpPoly::yp().add(&ExpPoly::y().scale_by(real(3.0)));
        assert_eq!(s.terms().len(), 2);
        assert_eq!(
            s.terms()[0],
            Term {
                coeff: ONE,
                lambda: ZERO,
                p: 0,
                q: 1
            }
        );
        assert_eq!(
            s.terms()[1],
            Term {
                coeff: real(3.0),
                lambda: ZERO,
                p: 1,
                q: 0
            }
        );
    }

    #[test]
    fn products() {
        let yyp = ExpPoly::y().mul(&ExpPoly::yp()).unwrap();
        assert_eq!(yyp, ExpPoly::monomial(1, 1));
        let unit = ExpPoly::exp(ONE, I).mul(&ExpPoly::exp(ONE, -I)).unwrap();
        assert_eq!(unit, ExpPoly::constant(ONE));
        let y1 = ExpPoly::y().add(&ExpPoly::constant(ONE));
        let sq = y1.mul(&y1).unwrap();
        let expect = ExpPoly::monomial(2, 0)
            .add(&ExpPoly::y().scale_by(real(2.0)))
            .add(&ExpPoly::constant(ONE));
        assert_eq!(sq, expect);
    }

    #[test]
    fn degree_cap_is_enforced() {
        let y5 = ExpPoly::monomial(5, 0);
        assert_eq!(y5.mul(&y5), Err(Error::DegreeOverflow { p: 10, q: 0 }));
        assert!(ExpPoly::term(ONE, ZERO, 0, 9).is_err());
    }

    #[test]
    fn derivatives() {
        let a = ExpPoly::term(ONE, real(2.0), 1, 0).unwrap();
        assert_eq!(
            a.diff(Var::X),
            ExpPoly::term(real(2.0), real(2.0), 1, 0).unwrap()
        );
        assert_eq!(
            ExpPoly::monomial(3, 0).diff(Var::Y),
            ExpPoly::term(real(3.0), ZERO, 2, 0).unwrap()
        );
        assert_eq!(
            ExpPoly::monomial(1, 2).diff(Var::Yp),
            ExpPoly::term(real(2.0), ZERO, 1, 1).unwrap()
        );
        assert!(ExpPoly::constant(real(4.0)).diff(Var::X).is_empty());
    }

    #[test]
    fn evaluation() {
        let a = ExpPoly::term(real(2.0), I, 1, 0).unwrap();
        assert_eq!(a.eval(0.0, real(3.0), ZERO), real(6.0));
        assert_eq!(ExpPoly::zero().eval(1.3, I, I), ZERO);
        assert_eq!(
            ExpPoly::monomial(0, 2).eval(1.0, ZERO, cx(0.0, 2.0)),
            real(-4.0)
        );
    }

    #[test]
    fn zero_tests() {
        let r = ExpPoly::exp(ONE, I)
            .mul(&ExpPoly::exp(ONE, -I))
            .unwrap()
            .sub(&ExpPoly::constant(ONE));
        assert!(r.is_zero(1e-12).zero);

        // Cancellation residue after O(1) operations.
        let residue = ExpPoly::y()
            .add(&ExpPoly::term(real(1e-15), ZERO, 1, 0).unwrap())
            .sub(&ExpPoly::y());
        assert!(residue.is_zero(1e-12).zero);

        let half = ExpPoly::yp().scale_by(real(0.5));
        let t = half.is_zero(1e-12);
        assert!(!t.zero);
        assert_eq!(
            t.witness,
            Some(Term {
                coeff: real(0.5),
                lambda: ZERO,
                p: 0,
                q: 1
            })
        );
    }

    #[test]
    fn close_rates_merge() {
        let a = ExpPoly::exp(ONE, cx(0.0, 1.0));
        let b = ExpPoly::exp(ONE, cx(1e-13, 1.0));
        assert_eq!(a.add(&b).terms().len(), 1);
        let c = ExpPoly::exp(ONE, cx(1e-9, 1.0));
        assert_eq!(a.add(&c).terms().len(), 2);
    }

    #[test]
    fn render_and_parse() {
        let a = ExpPoly::term(real(2.0), I, 1, 0).unwrap();
        assert_eq!(a.to_string(), "(2+0i)·e^{(0+1i)x}·y^1·y'^0");
        assert_eq!(ExpPoly::zero().to_string(), "0");
        let b = a.add(&ExpPoly::term(cx(-0.5, -1e-20), cx(1.5, -3.0), 0, 2).unwrap());
        let back: ExpPoly = b.to_string().parse().unwrap();
        assert_eq!(back, b);
        assert!("(1+2i)·e^{(0+0i)x}".parse::<ExpPoly>().is_err());
        assert!("(1+2)·e^{(0+0i)x}·y^0·y'^0".parse::<ExpPoly>().is_err());
    }

    #[test]
    fn coefficient_extraction() {
        let a = ExpPoly::term(real(3.0), I, 1, 1)
            .unwrap()
            .add(&ExpPoly::term(real(2.0), ZERO, 0, 0).unwrap());
        assert_eq!(a.coefficient_of(1, 1), ExpPoly::exp(real(3.0), I));
        assert!(a.coefficient_of(2, 0).is_empty());
    }
}
