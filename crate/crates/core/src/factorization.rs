//! Factorization `(d/dt - f2)(d/dt - f1) Y = 0` of the deformed equation with
//!
//! ```text
//! f1 = α(√(F2 Y) + i√G),   f2 = α⁻¹(√(F2 Y) - i√G),   α = ±i√(2/3),
//! ```
//!
//! its Bernoulli reduction, and the `ω = Y^{-1/2}` solutions.

use crate::error::{Error, Result};
use crate::lienard::CoefficientSet;
use crate::num::complex::{sqrt, Cx, I, ONE, ZERO};
use crate::num::diff::{default_step, fd_derivative, DerivOrder};
use crate::num::quad::quad;
use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Magnitude of `∫√(F2/6) μ` below which the Bernoulli solution is at its pole.
pub const POLE_THRESHOLD: f64 = 1e-6;
/// Magnitude of `ω` below which `√(F2/ω)` is not evaluated.
pub const OMEGA_THRESHOLD: f64 = 1e-12;
/// Default quadrature tolerance for the closed-form solutions.
pub const DEFAULT_QUAD_TOL: f64 = 1e-13;

/// Upper (`+`) or lower (`-`) choice of a `±` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }

    pub fn both() -> [Self; 2] {
        [Self::Plus, Self::Minus]
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "+",
            Self::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "upper" => Ok(Self::Plus),
            "-" | "minus" | "lower" => Ok(Self::Minus),
            _ => Err(Error::Parse(format!("expected `+` or `-`, got `{s}`"))),
        }
    }
}

/// Finite sum of `c_k Y^{k/2}` with integer `k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HalfPowerPoly {
    terms: BTreeMap<i32, Cx>,
}

impl HalfPowerPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c Y^{k/2}`.
    pub fn monomial(c: Cx, half_exp: i32) -> Self {
        let mut out = Self::zero();
        out.push(half_exp, c);
        out
    }

    fn push(&mut self, k: i32, c: Cx) {
        *self.terms.entry(k).or_insert(ZERO) += c;
    }

    pub fn coeff(&self, half_exp: i32) -> Cx {
        self.terms.get(&half_exp).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, Cx)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.push(k, c);
        }
        out
    }

    pub fn scale(&self, s: Cx) -> Self {
        Self {
            terms: self.terms.iter().map(|(&k, &c)| (k, c * s)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, x) in self.terms() {
            for (b, y) in other.terms() {
                out.push(a + b, x * y);
            }
        }
        out
    }

    /// `d/dY`.
    pub fn diff(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in self.terms() {
            if k != 0 {
                out.push(k - 2, c * (k as f64 / 2.0));
            }
        }
        out
    }

    /// Multiplication by `Y`.
    pub fn times_y(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&k, &c)| (k + 2, c)).collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Value with `Y^{1/2}` taken on the principal branch.
    pub fn eval(&self, y: Cx) -> Cx {
        let r = sqrt(y);
        self.terms().map(|(k, c)| c * r.powi(k)).sum()
    }
}

/// `f(Y) = a √Y + b` at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPowerAffine {
    pub sqrt_y: Cx,
    pub constant: Cx,
}

impl HalfPowerAffine {
    pub fn poly(&self) -> HalfPowerPoly {
        HalfPowerPoly::monomial(self.sqrt_y, 1).add(&HalfPowerPoly::monomial(self.constant, 0))
    }

    pub fn eval(&self, y: Cx) -> Cx {
        self.sqrt_y * sqrt(y) + self.constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorPair {
    pub f1: HalfPowerAffine,
    pub f2: HalfPowerAffine,
    pub alpha: Cx,
    pub sign: Sign,
    pub t: f64,
}

/// `±i√(2/3)`.
pub fn branch_alpha(sign: Sign) -> Cx {
    I * (sign.value() * (2.0f64 / 3.0).sqrt())
}

/// Builds `f1`, `f2` from the coefficients at time `t`, with `√(F2 Y)` read
/// as `√F2 √Y`.
pub fn make_factor_pair(coeffs: &CoefficientSet, sign: Sign, t: f64) -> FactorPair {
    let (_, f2, g) = coeffs.eval(t);
    let alpha = branch_alpha(sign);
    let (rf, rg) = (sqrt(f2), sqrt(g));
    FactorPair {
        f1: HalfPowerAffine {
            sqrt_y: alpha * rf,
            constant: I * alpha * rg,
        },
        f2: HalfPowerAffine {
            sqrt_y: rf / alpha,
            constant: -I * rg / alpha,
        },
        alpha,
        sign,
        t,
    }
}

/// Residuals of the two factorization identities.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    /// `f1 f2 - (F2 Y + G)`.
    pub product: HalfPowerPoly,
    /// `-(f1 + f2 + Y f1_Y) - F1`.
    pub damping: HalfPowerPoly,
    /// Full expansion of `(d/dt - f2)(d/dt - f1) Y` as `Ÿ + D Ẏ + E`;
    /// `D` and `E` are returned as half-power polynomials.
    pub ydot_coeff: HalfPowerPoly,
    pub free_term: HalfPowerPoly,
}

impl FactorizationReport {
    pub fn product_residual(&self) -> f64 {
        self.product.max_abs_coeff()
    }

    pub fn damping_residual(&self) -> f64 {
        self.damping.max_abs_coeff()
    }
}

/// Expands the factorized operator and compares it with
/// `Ÿ + F1 Ẏ + F2 Y² + G Y` at the pair's time.
///
/// `d(f1 Y)/dt = (f1 + Y f1_Y) Ẏ`, so the operator is
/// `Ÿ - (f1 + Y f1_Y + f2) Ẏ + f1 f2 Y`.
pub fn verify_factorization(pair: &FactorPair, coeffs: &CoefficientSet) -> FactorizationReport {
    let (f1c, f2c, gc) = coeffs.eval(pair.t);
    let f1 = pair.f1.poly();
    let f2 = pair.f2.poly();
    let d_f1y = f1.add(&f1.diff().times_y());
    let ydot_coeff = d_f1y.add(&f2).scale(-ONE);
    let free_term = f1.mul(&f2).times_y();
    let target = HalfPowerPoly::monomial(f2c, 2).add(&HalfPowerPoly::monomial(gc, 0));
    FactorizationReport {
        product: f1.mul(&f2).sub(&target),
        damping: ydot_coeff.sub(&HalfPowerPoly::monomial(f1c, 0)),
        ydot_coeff,
        free_term,
    }
}

/// `F1 - (±5/√6) √G` at time `t`.
pub fn check_f1_g_relation(coeffs: &CoefficientSet, sign: Sign, t: f64) -> Cx {
    let (f1, _, g) = coeffs.eval(t);
    f1 - sqrt(g) * (sign.value() * 5.0 / 6f64.sqrt())
}

/// `Y = -μ² J⁻²` with `μ = exp(∓∫√(G/6))`, `J = ∫√(F2/6) μ`, integrals from `t0`.
#[derive(Debug, Clone)]
pub struct BernoulliSolution {
    coeffs: CoefficientSet,
    sign: Sign,
    t0: f64,
    tol: f64,
}

impl BernoulliSolution {
    pub fn new(coeffs: CoefficientSet, sign: Sign, t0: f64) -> Self {
        Self {
            coeffs,
            sign,
            t0,
            tol: DEFAULT_QUAD_TOL,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn mu(&self, t: f64) -> Result<Cx> {
        mu(&self.coeffs, self.sign, self.t0, t, self.tol)
    }

    /// `J(t) = ∫_{t0}^t √(F2/6) μ`.
    pub fn denominator(&self, t: f64) -> Result<Cx> {
        quad(
            |s| {
                let m = self.mu(s).unwrap_or(Cx::new(f64::NAN, f64::NAN));
                sqrt(self.coeffs.f2.eval(s) / 6.0) * m
            },
            self.t0,
            t,
            self.tol,
        )
    }

    fn parts(&self, t: f64) -> Result<(Cx, Cx)> {
        let j = self.denominator(t)?;
        if !(j.norm() > POLE_THRESHOLD) {
            return Err(Error::NearPole {
                t,
                magnitude: j.norm(),
            });
        }
        Ok((self.mu(t)?, j))
    }

    pub fn y(&self, t: f64) -> Result<Cx> {
        let (m, j) = self.parts(t)?;
        Ok(-(m * m) / (j * j))
    }

    /// `ω = ∓ i J / μ`, the solution of the linear equation obtained
    /// from `ω = Y^{-1/2}`; `ω⁻² = Y`.
    pub fn omega(&self, t: f64) -> Result<Cx> {
        let (m, j) = self.parts(t)?;
        Ok(-I * self.sign.value() * j / m)
    }
}

/// `exp(∓∫_{t0}^t √(G/6))`; closed form when `G` is a constant.
pub fn mu(coeffs: &CoefficientSet, sign: Sign, t0: f64, t: f64, tol: f64) -> Result<Cx> {
    let rate = match coeffs.g.as_constant() {
        Some(g) => sqrt(g / 6.0) * (t - t0),
        None => quad(|s| sqrt(coeffs.g.eval(s) / 6.0), t0, t, tol)?,
    };
    Ok((-rate * sign.value()).exp())
}

/// How `Y^{3/2}` is evaluated in the Bernoulli equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPowerSheet {
    /// `exp(3/2 · Ln Y)`.
    Principal,
    /// `Y / ω` with the solution's own `ω`, i.e. `ω⁻³`.
    Substitution,
}

/// Residual of `Ẏ ∓ i√(2F2/3) Y^{3/2} ± √(2G/3) Y` given `Y^{3/2}`.
pub fn bernoulli_lhs(coeffs: &CoefficientSet, sign: Sign, t: f64, y: Cx, ydot: Cx, y32: Cx) -> Cx {
    let (_, f2, g) = coeffs.eval(t);
    let s = sign.value();
    ydot - I * s * sqrt(f2 * (2.0 / 3.0)) * y32 + s * sqrt(g * (2.0 / 3.0)) * y
}

/// Residual form consumed by [`verify_ode_residual`].
pub enum OdeForm<'a> {
    /// `r(t, y, ẏ)`.
    First(Box<dyn Fn(f64, Cx, Cx) -> Result<Cx> + 'a>),
    /// `r(t, y, ẏ, ÿ)`.
    Second(Box<dyn Fn(f64, Cx, Cx, Cx) -> Result<Cx> + 'a>),
}

impl<'a> OdeForm<'a> {
    pub fn first(f: impl Fn(f64, Cx, Cx) -> Cx + 'a) -> Self {
        Self::First(Box::new(move |t, y, d| Ok(f(t, y, d))))
    }

    pub fn second(f: impl Fn(f64, Cx, Cx, Cx) -> Cx + 'a) -> Self {
        Self::Second(Box::new(move |t, y, d, dd| Ok(f(t, y, d, dd))))
    }

    /// The Bernoulli equation along `sol`, on the chosen sheet.
    pub fn bernoulli(sol: &'a BernoulliSolution, sheet: HalfPowerSheet) -> Self {
        Self::First(Box::new(move |t, y, d| {
            let y32 = match sheet {
                HalfPowerSheet::Principal => crate::num::complex::powf(y, 1.5),
                HalfPowerSheet::Substitution => y / sol.omega(t)?,
            };
            Ok(bernoulli_lhs(&sol.coeffs, sol.sign, t, y, d, y32))
        }))
    }
}

impl OdeForm<'_> {
    /// Stencil step at `t`: the default step for first-order forms, ten
    /// times larger for second-order ones to keep roundoff in `ÿ` small.
    pub fn step(&self, t: f64) -> f64 {
        match self {
            Self::First(_) => default_step(t),
            Self::Second(_) => 10.0 * default_step(t),
        }
    }
}

/// Largest `|residual|` of `ode` along `sol` over `grid`, with five-point
/// derivatives at [`OdeForm::step`].
pub fn verify_ode_residual(
    sol: &dyn Fn(f64) -> Result<Cx>,
    ode: &OdeForm<'_>,
    grid: &[f64],
) -> Result<f64> {
    if grid.len() < 5 {
        return Err(Error::InvalidInput(
            "residual grid needs at least 5 points".into(),
        ));
    }
    if grid
        .windows(2)
        .any(|w| !(w[1] - w[0] > 4.0 * ode.step(w[0].abs().max(w[1].abs()))))
    {
        return Err(Error::InvalidInput(
            "residual grid must be increasing with spacing above the stencil width".into(),
        ));
    }
    let mut worst: f64 = 0.0;
    for &t in grid {
        worst = worst.max(ode_residual_at(sol, ode, t)?.norm());
    }
    Ok(worst)
}

/// Residual of `ode` along `sol` at a single time.
pub fn ode_residual_at(sol: &dyn Fn(f64) -> Result<Cx>, ode: &OdeForm<'_>, t: f64) -> Result<Cx> {
    let h = ode.step(t);
    let mut s = [ZERO; 5];
    for (k, v) in s.iter_mut().enumerate() {
        *v = sol(t + (k as f64 - 2.0) * h)?;
    }
    let d1 = (s[0] - s[1] * 8.0 + s[3] * 8.0 - s[4]) / (12.0 * h);
    match ode {
        OdeForm::First(f) => f(t, s[2], d1),
        OdeForm::Second(f) => {
            let d2 = (-s[0] + s[1] * 16.0 - s[2] * 30.0 + s[3] * 16.0 - s[4]) / (12.0 * h * h);
            f(t, s[2], d1, d2)
        }
    }
}

/// `ω(t) = ¼(C1 ± i∫_{t0}^t √(F2/6))²`.
#[derive(Debug, Clone)]
pub struct OmegaSolution {
    coeffs: CoefficientSet,
    c1: Cx,
    sign: Sign,
    t0: f64,
    tol: f64,
}

impl OmegaSolution {
    pub fn omega(&self, t: f64) -> Result<Cx> {
        let s = match self.coeffs.f2.as_constant() {
            Some(f2) => sqrt(f2 / 6.0) * (t - self.t0),
            None => quad(|u| sqrt(self.coeffs.f2.eval(u) / 6.0), self.t0, t, self.tol)?,
        };
        let inner = self.c1 + I * self.sign.value() * s;
        Ok(inner * inner * 0.25)
    }

    /// `Y = ω⁻²`.
    pub fn y(&self, t: f64) -> Result<Cx> {
        let w = self.omega(t)?;
        if w.norm() < OMEGA_THRESHOLD {
            return Err(Error::VanishingOmega { t });
        }
        Ok(ONE / (w * w))
    }
}

pub fn omega_special_solution(
    coeffs: &CoefficientSet,
    c1: Cx,
    sign: Sign,
    t0: f64,
) -> OmegaSolution {
    OmegaSolution {
        coeffs: coeffs.clone(),
        c1,
        sign,
        t0,
        tol: DEFAULT_QUAD_TOL,
    }
}

/// Largest `|lhs - rhs|` over `grid` of
///
/// ```text
/// ω' ∓ √(G/6) ω = ∓ i√(F2/6) - ½ ω³ exp(∓ i√(3/2) ∫_{t0}^t (√(F2/ω) - i√G))
/// ```
///
/// with the candidate `ω` inside the integral.
pub fn omega_ode_residual(
    omega: &dyn Fn(f64) -> Result<Cx>,
    coeffs: &CoefficientSet,
    sign: Sign,
    t0: f64,
    grid: &[f64],
) -> Result<f64> {
    let s = sign.value();
    let checked = |t: f64| -> Result<Cx> {
        let w = omega(t)?;
        if w.norm() < OMEGA_THRESHOLD {
            return Err(Error::VanishingOmega { t });
        }
        Ok(w)
    };
    let mut worst: f64 = 0.0;
    for &t in grid {
        let w = checked(t)?;
        let wdot = fd_derivative(
            |u| checked(u).unwrap_or(Cx::new(f64::NAN, f64::NAN)),
            t,
            DerivOrder::First,
            None,
        );
        let failure = Cell::new(None);
        let phase = quad(
            |u| match checked(u) {
                Ok(wu) => {
                    let (_, f2, g) = coeffs.eval(u);
                    sqrt(f2 / wu) - I * sqrt(g)
                }
                Err(e) => {
                    failure.set(Some(e));
                    ZERO
                }
            },
            t0,
            t,
            DEFAULT_QUAD_TOL,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let phase = phase?;
        let (_, f2, g) = coeffs.eval(t);
        let lhs = wdot - s * sqrt(g / 6.0) * w;
        let rhs =
            -I * s * sqrt(f2 / 6.0) - 0.5 * w * w * w * (-I * s * 1.5f64.sqrt() * phase).exp();
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `φ'/φ = ∓ i√(3F2/(2ω)) + 3ω'/ω`, with `ω'` by finite differences.
pub fn phi_log_derivative(
    omega: &dyn Fn(f64) -> Result<Cx>,
    coeffs: &CoefficientSet,
    sign: Sign,
    t: f64,
) -> Result<Cx> {
    let w = omega(t)?;
    if w.norm() < OMEGA_THRESHOLD {
        return Err(Error::VanishingOmega { t });
    }
    let h = default_step(t);
    let mut s = [ZERO; 4];
    for (k, off) in [-2.0, -1.0, 1.0, 2.0].into_iter().enumerate() {
        s[k] = omega(t + off * h)?;
    }
    let wdot = (s[0] - s[1] * 8.0 + s[2] * 8.0 - s[3]) / (12.0 * h);
    let f2 = coeffs.f2.eval(t);
    Ok(-I * sign.value() * sqrt(f2 * 3.0 / (w * 2.0)) + wdot * 3.0 / w)
}

/// `F2` and `G` constant, `F1` chosen so that the damping identity closes.
pub fn compatible_constant_set(f2: Cx, g: Cx, sign: Sign) -> CoefficientSet {
    CoefficientSet::constant(sqrt(g) * (sign.value() * 5.0 / 6f64.sqrt()), f2, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::complex::{cx, real};

    fn consts(f1: f64, f2: f64, g: f64) -> CoefficientSet {
        CoefficientSet::constant(real(f1), real(f2), real(g))
    }

    #[test]
    fn pair_for_pure_quadratic() {
        let p = make_factor_pair(&consts(0.0, 6.0, 0.0), Sign::Plus, 0.0);
        assert!((p.f1.sqrt_y - cx(0.0, 2.0)).norm() < 1e-14);
        assert!((p.f2.sqrt_y - cx(0.0, -3.0)).norm() < 1e-14);
        assert_eq!(p.f1.constant, ZERO);
    }

    #[test]
    fn pair_for_pure_linear() {
        let p = make_factor_pair(&consts(0.0, 0.0, 6.0), Sign::Plus, 0.0);
        assert!((p.f1.constant - real(-2.0)).norm() < 1e-14);
        assert!((p.f2.constant - real(-3.0)).norm() < 1e-14);
    }

    #[test]
    fn alpha_squares() {
        for s in Sign::both() {
            let a = branch_alpha(s);
            assert!((a * a + real(2.0 / 3.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn identities_close_for_compatible_sets() {
        let r = verify_factorization(
            &make_factor_pair(&consts(0.0, 6.0, 0.0), Sign::Plus, 0.0),
            &consts(0.0, 6.0, 0.0),
        );
        assert!(r.product_residual() < 1e-14);
        assert!(r.damping_residual() < 1e-14);

        let c = consts(1.0, 1.0, 6.0 / 25.0);
        let r = verify_factorization(&make_factor_pair(&c, Sign::Plus, 0.0), &c);
        assert!(r.product_residual() < 1e-14);
        assert!(r.damping_residual() < 1e-14);
    }

    #[test]
    fn damping_identity_fails_off_relation() {
        let c = consts(0.0, 1.0, 1.0);
        let r = verify_factorization(&make_factor_pair(&c, Sign::Plus, 0.0), &c);
        assert!((r.damping_residual() - 5.0 / 6f64.sqrt()).abs() < 1e-14);
        assert!((r.damping_residual() - 2.0412415).abs() < 1e-7);
    }

    #[test]
    fn relation_examples() {
        assert!(check_f1_g_relation(&consts(1.0, 0.0, 6.0 / 25.0), Sign::Plus, 0.0).norm() < 1e-15);
        assert_eq!(
            check_f1_g_relation(&consts(0.0, 0.0, 0.0), Sign::Minus, 0.0),
            ZERO
        );
    }

    #[test]
    fn half_power_algebra() {
        let a = HalfPowerPoly::monomial(real(2.0), 3);
        assert_eq!(a.diff(), HalfPowerPoly::monomial(real(3.0), 1));
        assert_eq!(a.times_y().coeff(5), real(2.0));
        let y = cx(0.3, -1.2);
        assert!((a.eval(y) - crate::num::complex::powf(y, 1.5) * 2.0).norm() < 1e-14);
    }

    #[test]
    fn inverse_square_solution() {
        let c = consts(0.0, 6.0, 0.0);
        let sol = BernoulliSolution::new(c, Sign::Plus, 0.0);
        for t in [0.5, 1.0, 2.5] {
            assert!((sol.y(t).unwrap() + real(1.0 / (t * t))).norm() < 1e-13);
        }
        let grid: Vec<f64> = (0..=25).map(|k| 0.5 + 0.1 * k as f64).collect();
        let f = |t: f64| sol.y(t);
        let r = verify_ode_residual(
            &f,
            &OdeForm::bernoulli(&sol, HalfPowerSheet::Principal),
            &grid,
        )
        .unwrap();
        assert!(r < 1e-10, "{r}");
        let r = verify_ode_residual(
            &f,
            &OdeForm::bernoulli(&sol, HalfPowerSheet::Substitution),
            &grid,
        )
        .unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn lower_sign_needs_substitution_sheet() {
        let sol = BernoulliSolution::new(consts(0.0, 6.0, 0.0), Sign::Minus, 0.0);
        let grid: Vec<f64> = (0..=10).map(|k| 1.0 + 0.2 * k as f64).collect();
        let f = |t: f64| sol.y(t);
        let sub = verify_ode_residual(
            &f,
            &OdeForm::bernoulli(&sol, HalfPowerSheet::Substitution),
            &grid,
        )
        .unwrap();
        assert!(sub < 1e-10, "{sub}");
        // Principal Y^{3/2} = -i/t³ leaves Ẏ + 2iY^{3/2} = 4/t³, largest at t = 1.
        let pr = verify_ode_residual(
            &f,
            &OdeForm::bernoulli(&sol, HalfPowerSheet::Principal),
            &grid,
        )
        .unwrap();
        assert!((pr - 4.0).abs() < 1e-8, "{pr}");
    }

    #[test]
    fn pole_at_anchor() {
        let sol = BernoulliSolution::new(consts(0.0, 6.0, 0.0), Sign::Plus, 0.0);
        assert!(matches!(sol.y(0.0), Err(Error::NearPole { .. })));
        assert!(matches!(sol.y(1e-9), Err(Error::NearPole { .. })));
    }

    #[test]
    fn mu_is_one_without_g() {
        let c = consts(0.0, 3.0, 0.0);
        for s in Sign::both() {
            assert_eq!(mu(&c, s, 0.0, 2.0, 1e-12).unwrap(), ONE);
        }
    }

    #[test]
    fn residual_checker_examples() {
        let f = |t: f64| Ok((I * t).exp());
        let vdp = OdeForm::second(|t, z, d, dd| dd - crate::lienard::vdp_rhs(ONE, t, z, d));
        let grid: Vec<f64> = (0..10).map(|k| 0.3 * k as f64).collect();
        assert!(verify_ode_residual(&f, &vdp, &grid).unwrap() < 1e-8);

        let one = |_t: f64| Ok(ONE);
        let growth = OdeForm::first(|_, z, d| d - z);
        assert_eq!(verify_ode_residual(&one, &growth, &grid).unwrap(), 1.0);
        assert!(verify_ode_residual(&one, &growth, &grid[..3]).is_err());
    }

    #[test]
    fn special_omega_examples() {
        let w = omega_special_solution(&consts(0.0, 0.0, 0.0), real(3.0), Sign::Plus, 0.0);
        assert_eq!(w.omega(5.0).unwrap(), real(2.25));
        let w = omega_special_solution(&consts(0.0, 6.0, 0.0), ZERO, Sign::Plus, 0.0);
        for t in [0.5, 2.0] {
            assert!((w.omega(t).unwrap() - real(-t * t / 4.0)).norm() < 1e-14);
        }
        let w = omega_special_solution(&consts(0.0, 0.0, 0.0), real(2.0), Sign::Minus, 0.0);
        assert_eq!(w.omega(1.0).unwrap(), ONE);
        assert_eq!(w.y(1.0).unwrap(), ONE);
    }

    #[test]
    fn omega_equation_examples() {
        let c = consts(0.0, 0.0, 0.0);
        let grid = [0.0, 0.5, 1.0, 1.5, 2.0];
        let unit = |_t: f64| Ok(ONE);
        for s in Sign::both() {
            let r = omega_ode_residual(&unit, &c, s, 0.0, &grid).unwrap();
            assert!((r - 0.5).abs() < 1e-14);
        }
        let sep = |t: f64| Ok(real(1.0 / (t + 1.0).sqrt()));
        assert!(omega_ode_residual(&sep, &c, Sign::Plus, 0.0, &grid).unwrap() < 1e-8);
        let vanishing = |_t: f64| Ok(ZERO);
        assert_eq!(
            omega_ode_residual(&vanishing, &c, Sign::Plus, 0.0, &grid).unwrap_err(),
            Error::VanishingOmega { t: 0.0 }
        );
    }

    #[test]
    fn phi_examples() {
        let c = consts(0.0, 0.0, 0.0);
        let constant = |_t: f64| Ok(real(2.0));
        assert_eq!(
            phi_log_derivative(&constant, &c, Sign::Plus, 1.0).unwrap(),
            ZERO
        );
        let growth = |t: f64| Ok(real(t.exp()));
        assert!(
            (phi_log_derivative(&growth, &c, Sign::Minus, 0.7).unwrap() - real(3.0)).norm() < 1e-9
        );
    }
}
