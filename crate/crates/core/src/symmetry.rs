//! Lie point symmetries `X = ξ(x, y) ∂x + η(x, y) ∂y` of `y'' = f(x, y, y')`
//! with `f = -F1 y' - F2 y² - G y`.

use crate::error::{Error, Result};
use crate::exact::ExactSolutionBranch;
use crate::exppoly::{ExpPoly, Term, Var, ZeroTest};
use crate::lienard::{deformed_rhs_symbolic, CoefficientSet};
use crate::num::complex::{real, sqrt, Cx, I, ONE, ZERO};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Default zero-test tolerance for symbolic residuals.
pub const ZERO_TOL: f64 = 1e-12;
/// Number of `x` nodes in the numeric invariance grid.
pub const AUDIT_NODES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    xi: ExpPoly,
    eta: ExpPoly,
}

impl VectorField2D {
    pub fn new(xi: ExpPoly, eta: ExpPoly) -> Result<Self> {
        if !xi.is_point() || !eta.is_point() {
            return Err(Error::InvalidInput(
                "point symmetry components cannot depend on y'".into(),
            ));
        }
        Ok(Self { xi, eta })
    }

    pub fn dx() -> Self {
        Self {
            xi: ExpPoly::constant(ONE),
            eta: ExpPoly::zero(),
        }
    }

    pub fn dy() -> Self {
        Self {
            xi: ExpPoly::zero(),
            eta: ExpPoly::constant(ONE),
        }
    }

    pub fn xi(&self) -> &ExpPoly {
        &self.xi
    }

    pub fn eta(&self) -> &ExpPoly {
        &self.eta
    }

    /// `ξ g_x + η g_y`.
    pub fn apply(&self, g: &ExpPoly) -> Result<ExpPoly> {
        Ok(self
            .xi
            .mul(&g.diff(Var::X))?
            .add(&self.eta.mul(&g.diff(Var::Y))?))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            xi: self.xi.add(&other.xi),
            eta: self.eta.add(&other.eta),
        }
    }

    pub fn scale_by(&self, k: Cx) -> Self {
        Self {
            xi: self.xi.scale_by(k),
            eta: self.eta.scale_by(k),
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.xi.is_zero(tol).zero && self.eta.is_zero(tol).zero
    }
}

/// `[a, b] = (a(ξ_b) - b(ξ_a), a(η_b) - b(η_a))`.
pub fn commutator(a: &VectorField2D, b: &VectorField2D) -> Result<VectorField2D> {
    Ok(VectorField2D {
        xi: a.apply(&b.xi)?.sub(&b.apply(&a.xi)?),
        eta: a.apply(&b.eta)?.sub(&b.apply(&a.eta)?),
    })
}

/// Left side of the linearized symmetry condition,
///
/// ```text
/// η_xx + (2η_xy - ξ_xx) y' + (η_yy - 2ξ_xy) y'² - ξ_yy y'³ - ξ f_x - η f_y
///   + (η_y - 2ξ_x - 3ξ_y y') f - (η_x + (η_y - ξ_x) y' - ξ_y y'²) f_{y'}.
/// ```
pub fn lin_symmetry_residual(v: &VectorField2D, f: &ExpPoly) -> Result<ExpPoly> {
    let (xi, eta) = (&v.xi, &v.eta);
    let p = ExpPoly::yp();
    let p2 = ExpPoly::monomial(0, 2);
    let p3 = ExpPoly::monomial(0, 3);
    let xi_x = xi.diff(Var::X);
    let xi_y = xi.diff(Var::Y);
    let eta_x = eta.diff(Var::X);
    let eta_y = eta.diff(Var::Y);

    let mut r = eta_x.diff(Var::X);
    r = r.add(
        &eta_x
            .diff(Var::Y)
            .scale_by(real(2.0))
            .sub(&xi_x.diff(Var::X))
            .mul(&p)?,
    );
    r = r.add(
        &eta_y
            .diff(Var::Y)
            .sub(&xi_x.diff(Var::Y).scale_by(real(2.0)))
            .mul(&p2)?,
    );
    r = r.sub(&xi_y.diff(Var::Y).mul(&p3)?);
    r = r.sub(&xi.mul(&f.diff(Var::X))?);
    r = r.sub(&eta.mul(&f.diff(Var::Y))?);
    let bracket = eta_y
        .sub(&xi_x.scale_by(real(2.0)))
        .sub(&xi_y.mul(&p)?.scale_by(real(3.0)));
    r = r.add(&bracket.mul(f)?);
    let bracket = eta_x.add(&eta_y.sub(&xi_x).mul(&p)?).sub(&xi_y.mul(&p2)?);
    r = r.sub(&bracket.mul(&f.diff(Var::Yp))?);
    Ok(r)
}

/// Monomials `y^p y'^q` of the determining equations.
pub const GROUPS: [(&str, u32, u32); 7] = [
    ("y'^3", 0, 3),
    ("y'^2", 0, 2),
    ("y'", 0, 1),
    ("y^2", 2, 0),
    ("y", 1, 0),
    ("y^0", 0, 0),
    ("yy'", 1, 1),
];

pub fn group_monomial(label: &str) -> Option<(u32, u32)> {
    GROUPS.iter().find(|g| g.0 == label).map(|g| (g.1, g.2))
}

/// The symmetry condition split by monomial: each group holds the
/// `x`-dependent coefficient of its monomial; everything else is `extra`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminingSystem {
    pub groups: BTreeMap<&'static str, ExpPoly>,
    pub extra: ExpPoly,
    pub residual: ExpPoly,
}

impl DeterminingSystem {
    pub fn from_residual(residual: ExpPoly) -> Self {
        let mut groups = BTreeMap::new();
        for (label, p, q) in GROUPS {
            groups.insert(label, residual.coefficient_of(p, q));
        }
        let extra = ExpPoly::from_terms(
            residual
                .terms()
                .iter()
                .filter(|t| group_monomial_of(t).is_none())
                .copied()
                .collect(),
        );
        Self {
            groups,
            extra,
            residual,
        }
    }

    pub fn group(&self, label: &str) -> &ExpPoly {
        &self.groups[label]
    }

    /// `Σ group · monomial + extra`.
    pub fn reassemble(&self) -> Result<ExpPoly> {
        let mut out = self.extra.clone();
        for (label, p, q) in GROUPS {
            out = out.add(&self.groups[label].mul(&ExpPoly::monomial(p, q))?);
        }
        Ok(out)
    }

    pub fn report(&self, tol: f64, grid: &AuditGrid) -> BTreeMap<String, GroupReport> {
        let mut out = BTreeMap::new();
        for (label, p, q) in GROUPS {
            let full = self.groups[label]
                .mul(&ExpPoly::monomial(p, q))
                .expect("group monomials stay below the degree cap");
            out.insert(label.to_string(), GroupReport::new(&full, tol, grid));
        }
        out.insert(
            "extra".to_string(),
            GroupReport::new(&self.extra, tol, grid),
        );
        out
    }
}

fn group_monomial_of(t: &Term) -> Option<&'static str> {
    GROUPS
        .iter()
        .find(|g| g.1 == t.p && g.2 == t.q)
        .map(|g| g.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub zero: bool,
    pub witness: String,
    pub max_numeric: f64,
}

impl GroupReport {
    fn new(e: &ExpPoly, tol: f64, grid: &AuditGrid) -> Self {
        let z = e.is_zero(tol);
        Self {
            zero: z.zero,
            witness: z
                .witness
                .map(|w| ExpPoly::from_terms(vec![w]).to_string())
                .unwrap_or_default(),
            max_numeric: e.max_abs_on(grid.points()),
        }
    }
}

/// `f = -F1 y' - F2 y² - G y` from symbolic coefficients.
pub fn symbolic_rhs(coeffs: &CoefficientSet) -> Result<ExpPoly> {
    let (f1, f2, g) = coeffs.symbolic().ok_or_else(|| {
        Error::InvalidInput("symmetry analysis needs symbolic coefficients".into())
    })?;
    deformed_rhs_symbolic(f1, f2, g)
}

pub fn extract_determining_system(
    v: &VectorField2D,
    coeffs: &CoefficientSet,
) -> Result<DeterminingSystem> {
    let f = symbolic_rhs(coeffs)?;
    Ok(DeterminingSystem::from_residual(lin_symmetry_residual(
        v, &f,
    )?))
}

/// `A + B e^{F1 x}`.
pub fn solve_xi(f1: Cx, a: Cx, b: Cx) -> ExpPoly {
    ExpPoly::constant(a).add(&ExpPoly::exp(b, f1))
}

/// Roots of `α² - F1 α - G = 0`, `α± = (F1 ± √(F1² + 4G))/2`.
pub fn char_roots(f1: Cx, g: Cx) -> (Cx, Cx) {
    let d = sqrt(f1 * f1 + g * 4.0);
    ((f1 + d) * 0.5, (f1 - d) * 0.5)
}

/// The displayed closed form `½(F1 ± √(F1² + 4G)/2)`.
pub fn printed_char_roots(f1: Cx, g: Cx) -> (Cx, Cx) {
    let d = sqrt(f1 * f1 + g * 4.0) * 0.5;
    ((f1 + d) * 0.5, (f1 - d) * 0.5)
}

/// `S(x) = C1 e^{-α+ x} + C2 e^{-α- x}`.
pub fn s_solution(c1: Cx, c2: Cx, roots: (Cx, Cx)) -> ExpPoly {
    ExpPoly::exp(c1, -roots.0).add(&ExpPoly::exp(c2, -roots.1))
}

/// `S'' + F1 S' - G S`, the operator the characteristic roots annihilate.
pub fn s_operator(s: &ExpPoly, f1: Cx, g: Cx) -> ExpPoly {
    let s1 = s.diff(Var::X);
    s1.diff(Var::X).add(&s1.scale_by(f1)).sub(&s.scale_by(g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCheck {
    pub oracle: (Cx, Cx),
    /// `(F1 - iθ, iθ)`.
    pub claimed: (Cx, Cx),
    pub printed: (Cx, Cx),
    pub deviation_plus: f64,
    pub deviation_minus: f64,
    /// `(F1 - iθ) + iθ - F1`.
    pub sum_rule: f64,
    /// `|θ - (1 - c²)/5|`.
    pub theta_relation: f64,
}

pub fn stated_alpha_check(b: &ExactSolutionBranch) -> AlphaCheck {
    let f1 = b.coeffs.f1.eval(0.0);
    let g = b.coeffs.g.eval(0.0);
    let th = b.theta.value();
    let oracle = char_roots(f1, g);
    let claimed = (f1 - I * th, I * th);
    AlphaCheck {
        oracle,
        claimed,
        printed: printed_char_roots(f1, g),
        deviation_plus: (claimed.0 - oracle.0).norm(),
        deviation_minus: (claimed.1 - oracle.1).norm(),
        sum_rule: (claimed.0 + claimed.1 - f1).norm(),
        theta_relation: (th - (1.0 - b.c * b.c) / 5.0).norm(),
    }
}

/// `X1 = ∂x + e^{-α+ x} ∂y`, `X2 = e^{F1 x} ∂x + e^{-α- x} ∂y`.
pub fn make_generators(f1: Cx, alpha_plus: Cx, alpha_minus: Cx) -> (VectorField2D, VectorField2D) {
    (
        VectorField2D {
            xi: ExpPoly::constant(ONE),
            eta: ExpPoly::exp(ONE, -alpha_plus),
        },
        VectorField2D {
            xi: ExpPoly::exp(ONE, f1),
            eta: ExpPoly::exp(ONE, -alpha_minus),
        },
    )
}

/// Sample points `x × y × y'` for numeric residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditGrid {
    pub x: Vec<f64>,
    pub y: Vec<Cx>,
    pub yp: Vec<Cx>,
}

impl AuditGrid {
    /// `n` nodes on `[0, x_max]`, `y ∈ {±1, ±i}`, `y' ∈ {0, ±1}`.
    pub fn new(x_max: f64, n: usize) -> Self {
        let x = (0..n)
            .map(|k| x_max * k as f64 / (n.max(2) - 1) as f64)
            .collect();
        Self {
            x,
            y: vec![ONE, -ONE, I, -I],
            yp: vec![ZERO, ONE, -ONE],
        }
    }

    /// One period of the oscillating part of `F2`, or `2π` when there is none.
    pub fn for_coeffs(coeffs: &CoefficientSet) -> Self {
        let rate = coeffs.f2.as_symbolic().and_then(|e| {
            e.terms()
                .iter()
                .map(|t| t.lambda.im.abs())
                .find(|r| *r > 0.0)
        });
        Self::new(rate.map_or(2.0 * PI, |r| 2.0 * PI / r), AUDIT_NODES)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, Cx, Cx)> + '_ {
        self.x.iter().flat_map(move |&x| {
            self.y
                .iter()
                .flat_map(move |&y| self.yp.iter().map(move |&p| (x, y, p)))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceAudit {
    pub residual: ExpPoly,
    pub zero: ZeroTest,
    pub max_numeric: f64,
    pub system: DeterminingSystem,
    /// Nonzero residual terms, largest first.
    pub witnesses: Vec<Term>,
}

impl InvarianceAudit {
    pub fn passed(&self) -> bool {
        self.zero.zero
    }
}

pub fn invariance_audit(
    v: &VectorField2D,
    coeffs: &CoefficientSet,
    grid: &AuditGrid,
    tol: f64,
) -> Result<InvarianceAudit> {
    let system = extract_determining_system(v, coeffs)?;
    let residual = system.residual.clone();
    let zero = residual.is_zero(tol);
    let bound = tol * (1.0 + residual.scale());
    let mut witnesses: Vec<Term> = residual
        .terms()
        .iter()
        .filter(|t| t.coeff.norm() > bound)
        .copied()
        .collect();
    witnesses.sort_by(|a, b| b.coeff.norm().total_cmp(&a.coeff.norm()));
    Ok(InvarianceAudit {
        max_numeric: residual.max_abs_on(grid.points()),
        zero,
        residual,
        system,
        witnesses,
    })
}

/// Outcome of injecting `y`-dependence into `ξ` under constant coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzStructure {
    /// `ξ = y`: the `yy'` group is `3G`.
    pub linear_yy: ExpPoly,
    /// `ξ = y²`: the `y'^3` group is `-ξ_yy = -2`.
    pub quadratic_cubic: ExpPoly,
}

impl AnsatzStructure {
    pub fn forces_point_form(&self, tol: f64) -> bool {
        !self.linear_yy.is_zero(tol).zero && !self.quadratic_cubic.is_zero(tol).zero
    }
}

/// Shows that `ξ` must be free of `y` when `G ≠ 0`.
pub fn general_ansatz_structure(coeffs: &CoefficientSet) -> Result<AnsatzStructure> {
    let lin = VectorField2D::new(ExpPoly::y(), ExpPoly::zero())?;
    let quad = VectorField2D::new(ExpPoly::monomial(2, 0), ExpPoly::zero())?;
    Ok(AnsatzStructure {
        linear_yy: extract_determining_system(&lin, coeffs)?
            .group("yy'")
            .clone(),
        quadratic_cubic: extract_determining_system(&quad, coeffs)?
            .group("y'^3")
            .clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::real_branch;
    use crate::factorization::Sign;
    use crate::num::complex::cx;

    fn consts(f1: Cx, f2: Cx, g: Cx) -> CoefficientSet {
        CoefficientSet::constant(f1, f2, g)
    }

    #[test]
    fn free_particle_symmetries() {
        let f = ExpPoly::zero();
        assert!(lin_symmetry_residual(&VectorField2D::dx(), &f)
            .unwrap()
            .is_empty());
        let v = VectorField2D::new(ExpPoly::zero(), ExpPoly::exp(ONE, ZERO)).unwrap();
        assert!(lin_symmetry_residual(&v, &f).unwrap().is_empty());
    }

    #[test]
    fn harmonic_solution_symmetry() {
        let f = ExpPoly::y().neg();
        let v = VectorField2D::new(ExpPoly::zero(), ExpPoly::exp(ONE, I)).unwrap();
        assert!(lin_symmetry_residual(&v, &f).unwrap().is_zero(1e-14).zero);
        let c = consts(ZERO, ZERO, ONE);
        let a = invariance_audit(&v, &c, &AuditGrid::for_coeffs(&c), ZERO_TOL).unwrap();
        assert!(a.passed());
        assert!(a.max_numeric < 1e-14);
    }

    #[test]
    fn rejects_velocity_dependence() {
        assert!(VectorField2D::new(ExpPoly::yp(), ExpPoly::zero()).is_err());
    }

    #[test]
    fn linear_xi_feeds_mixed_group() {
        let v = VectorField2D::new(ExpPoly::y(), ExpPoly::zero()).unwrap();
        let s = extract_determining_system(&v, &consts(ZERO, ZERO, ONE)).unwrap();
        assert_eq!(s.group("yy'"), &ExpPoly::constant(real(3.0)));
    }

    #[test]
    fn translation_of_autonomous_equation() {
        let s = extract_determining_system(
            &VectorField2D::dx(),
            &consts(cx(0.3, 1.0), real(2.0), cx(-0.5, 0.2)),
        )
        .unwrap();
        assert!(s.residual.is_empty());
        assert!(s.groups.values().all(|g| g.is_empty()));
    }

    #[test]
    fn xi_solution_clears_velocity_group() {
        let f1 = cx(0.0, 2.6258286);
        let xi = solve_xi(f1, ONE, ONE);
        let v = VectorField2D::new(xi, ExpPoly::zero()).unwrap();
        let s = extract_determining_system(&v, &consts(f1, real(1.5), real(-0.6))).unwrap();
        assert!(s.group("y'").is_zero(1e-14).zero);
        let x2 = solve_xi(real(2.0), ONE, ONE);
        let op = x2
            .diff(Var::X)
            .diff(Var::X)
            .neg()
            .add(&x2.diff(Var::X).scale_by(real(2.0)));
        assert!(op.is_empty());
        assert_eq!(
            solve_xi(real(2.0), real(3.0), ZERO),
            ExpPoly::constant(real(3.0))
        );
    }

    #[test]
    fn roots_of_characteristic_quadratic() {
        let (p, m) = char_roots(ZERO, real(-1.0));
        assert!((p - I).norm() < 1e-15 && (m + I).norm() < 1e-15);
        let s = s_solution(ONE, ONE, (p, m));
        assert!(s_operator(&s, ZERO, real(-1.0)).is_zero(1e-14).zero);
    }

    #[test]
    fn stated_branch_roots() {
        let b = real_branch(Sign::Plus);
        let a = stated_alpha_check(&b);
        assert!((a.oracle.0 - cx(0.0, 2.847170717149396)).norm() < 1e-12);
        assert!((a.oracle.1 - cx(0.0, -0.22134213968795802)).norm() < 1e-12);
        assert!((a.deviation_minus - 0.3038235758043296).abs() < 1e-12);
        assert!((a.deviation_plus - 0.3038235758043296).abs() < 1e-12);
        assert!(a.sum_rule < 1e-15);
        assert!(a.theta_relation < 1e-15);
        assert!((a.printed.0 - cx(0.0, 2.0800425029400573)).norm() < 1e-12);
        assert!((a.printed.1 - cx(0.0, 0.5457860745213805)).norm() < 1e-12);
    }

    #[test]
    fn generator_shapes() {
        let (x1, x2) = make_generators(ZERO, ZERO, ZERO);
        assert_eq!(x1, VectorField2D::dx().add(&VectorField2D::dy()));
        assert_eq!(x2, x1);
    }

    #[test]
    fn brackets() {
        assert!(commutator(&VectorField2D::dx(), &VectorField2D::dy())
            .unwrap()
            .is_zero(0.0));
        let lam = cx(0.5, -1.0);
        let e = VectorField2D::new(ExpPoly::exp(ONE, lam), ExpPoly::zero()).unwrap();
        let c = commutator(&VectorField2D::dx(), &e).unwrap();
        assert_eq!(c.xi(), &ExpPoly::exp(lam, lam));
        assert!(c.eta().is_empty());
    }

    #[test]
    fn stated_generators_do_not_close() {
        let b = real_branch(Sign::Plus);
        let f1 = b.coeffs.f1.eval(0.0);
        let (ap, am) = char_roots(f1, b.g());
        let (x1, x2) = make_generators(f1, ap, am);
        let c = commutator(&x1, &x2).unwrap();
        assert_eq!(c.xi(), &ExpPoly::exp(f1, f1));
        let z = c.xi().is_zero(ZERO_TOL);
        assert!(!z.zero);
        assert!((z.max_coeff - 2.625828577461438).abs() < 1e-12);
    }

    #[test]
    fn printed_s_operator_leaves_twice_g_in_group() {
        // The y⁰ group of the full condition is S'' + F1 S' + G S.
        let (f1, g) = (cx(0.0, 1.3), cx(-0.4, 0.1));
        let roots = char_roots(f1, g);
        let s = s_solution(cx(0.7, 0.2), cx(-1.1, 0.4), roots);
        assert!(s_operator(&s, f1, g).is_zero(1e-13).zero);
        let v = VectorField2D::new(ExpPoly::zero(), s.clone()).unwrap();
        let sys = extract_determining_system(&v, &consts(f1, ZERO, g)).unwrap();
        let diff = sys.group("y^0").sub(&s.scale_by(g * 2.0));
        assert!(diff.is_zero(1e-13).zero, "{diff}");
    }

    #[test]
    fn structure_forces_y_free_xi() {
        let st = general_ansatz_structure(&consts(cx(0.0, 2.0), real(1.0), real(-0.6))).unwrap();
        assert!(st.forces_point_form(ZERO_TOL));
        assert_eq!(st.quadratic_cubic, ExpPoly::constant(real(-2.0)));
        assert!((st.linear_yy.eval(0.0, ZERO, ZERO) - real(-1.8)).norm() < 1e-14);
    }

    #[test]
    fn extra_bucket_catches_off_label_terms() {
        // ξ = y with F2 ≠ 0 leaves 3 F2 y² y' outside the seven labels.
        let v = VectorField2D::new(ExpPoly::y(), ExpPoly::zero()).unwrap();
        let s = extract_determining_system(&v, &consts(ZERO, real(2.0), ZERO)).unwrap();
        assert_eq!(s.extra.coefficient_of(2, 1), ExpPoly::constant(real(6.0)));
        assert_eq!(s.reassemble().unwrap(), s.residual);
    }

    #[test]
    fn audit_grid_spans_one_period() {
        let b = real_branch(Sign::Plus);
        let g = AuditGrid::for_coeffs(&b.coeffs);
        let th = b.theta.as_real().unwrap().abs();
        assert_eq!(g.x.len(), AUDIT_NODES);
        assert!((g.x[AUDIT_NODES - 1] - 2.0 * PI / th).abs() < 1e-12);
        assert_eq!(g.points().count(), AUDIT_NODES * 12);
    }
}
