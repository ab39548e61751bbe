//! Exact solutions `z = c e^{iθt}` of the deformed chain with `ε = i`:
//!
//! ```text
//! c(c² - 1) = ∓5,   θ = ±(1 - c²)/5,
//! F1 = i(c² - 1),   F2 = -cθ e^{iθt},   G = (6/25)(1 - c²),
//! ```
//!
//! and residual audits of the relations that are claimed along it.

use crate::error::{Error, Result};
use crate::exppoly::{fmt_cx, ExpPoly};
use crate::factorization::{verify_ode_residual, OdeForm, Sign};
use crate::lienard::{deformed_rhs, Coefficient, CoefficientSet};
use crate::num::complex::{real, Cx, I};
use crate::num::quad::quad;
use crate::num::roots::{poly_eval, poly_roots};

/// Largest `|c(c² - 1) ± 5|` accepted by [`make_branch`].
pub const ROOT_TOL: f64 = 1e-10;

/// `ε`, forced by the amplitude equation.
pub const EPS: Cx = I;

/// Coefficients of `c³ - c ± 5`, highest degree first.
pub fn cubic(branch: Sign) -> [Cx; 4] {
    [real(1.0), real(0.0), real(-1.0), real(5.0 * branch.value())]
}

/// Roots of `c(c² - 1) = ∓5`; real roots first, then by `(re, im)`.
pub fn solve_c(branch: Sign) -> Vec<Cx> {
    let mut roots = poly_roots(&cubic(branch), 1e-14).expect("monic cubic");
    roots.sort_by_key(|r| r.im != 0.0);
    roots
}

/// `|c(c² - 1) ± 5|`.
pub fn cubic_residual(c: Cx, branch: Sign) -> f64 {
    poly_eval(&cubic(branch), c).norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theta {
    Real(f64),
    Complex(Cx),
}

impl Theta {
    pub fn value(self) -> Cx {
        match self {
            Self::Real(t) => real(t),
            Self::Complex(t) => t,
        }
    }

    pub fn as_real(self) -> Option<f64> {
        match self {
            Self::Real(t) => Some(t),
            Self::Complex(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExactSolutionBranch {
    pub branch: Sign,
    pub c: Cx,
    pub theta: Theta,
    pub eps: Cx,
    pub coeffs: CoefficientSet,
}

impl ExactSolutionBranch {
    pub fn is_real(&self) -> bool {
        self.c.im == 0.0
    }

    /// `z(t) = c e^{iθt}`.
    pub fn z(&self, t: f64) -> Cx {
        self.c * (I * self.theta.value() * t).exp()
    }

    pub fn zdot(&self, t: f64) -> Cx {
        I * self.theta.value() * self.z(t)
    }

    pub fn zddot(&self, t: f64) -> Cx {
        let th = self.theta.value();
        -(th * th) * self.z(t)
    }

    /// `G = (6/25)(1 - c²)`.
    pub fn g(&self) -> Cx {
        (1.0 - self.c * self.c) * (6.0 / 25.0)
    }
}

/// `θ = ±(1 - c²)/5`.
pub fn theta_for(c: Cx, branch: Sign) -> Cx {
    (1.0 - c * c) * (branch.value() / 5.0)
}

pub fn make_branch(c: Cx, branch: Sign) -> Result<ExactSolutionBranch> {
    let residual = cubic_residual(c, branch);
    if !(residual <= ROOT_TOL) {
        return Err(Error::NotARoot {
            c: fmt_cx(c),
            residual,
        });
    }
    let th = theta_for(c, branch);
    let theta = if c.im == 0.0 {
        Theta::Real(th.re)
    } else {
        Theta::Complex(th)
    };
    let th = theta.value();
    let c2m1 = c * c - 1.0;
    let coeffs = CoefficientSet::new(
        Coefficient::Symbolic(ExpPoly::constant(I * c2m1)),
        Coefficient::Symbolic(ExpPoly::exp(-c * th, I * th)),
        Coefficient::Symbolic(ExpPoly::constant(-c2m1 * (6.0 / 25.0))),
    );
    Ok(ExactSolutionBranch {
        branch,
        c,
        theta,
        eps: EPS,
        coeffs,
    })
}

/// All three branches of one sign, real root first.
pub fn branches(branch: Sign) -> Vec<ExactSolutionBranch> {
    solve_c(branch)
        .into_iter()
        .map(|c| make_branch(c, branch).expect("roots of the cubic"))
        .collect()
}

/// The real-root branch of the given sign.
pub fn real_branch(branch: Sign) -> ExactSolutionBranch {
    branches(branch).swap_remove(0)
}

/// `|θc - 1|`.
pub fn theta_c_identity(b: &ExactSolutionBranch) -> f64 {
    (b.theta.value() * b.c - 1.0).norm()
}

/// `G* = θ² + iεθ(1 - c²)`, the `G` for which `c e^{iθt}` solves
/// `z'' - ε(1 - |z|²) z' + G z = 0` (real `c`).
pub fn consistent_g(c: Cx, theta: f64, eps: Cx) -> Cx {
    real(theta * theta) + I * eps * theta * (1.0 - c.norm_sqr())
}

/// `z'' - ε(1 - |z|²) z' + G z` along the branch orbit.
pub fn oscillator_residual(b: &ExactSolutionBranch, g: Cx, t: f64) -> Cx {
    let z = b.z(t);
    b.zddot(t) - b.eps * (1.0 - z.norm_sqr()) * b.zdot(t) + g * z
}

/// The three candidate values of `G` along a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GCandidates {
    /// `(6/25)(1 - c²)`.
    pub stated: Cx,
    /// `(6/25) F1²`, forced by the `F1`–`G` relation.
    pub from_relation: Cx,
    /// `G*` from substitution into the oscillator.
    pub consistent: Option<Cx>,
}

pub fn g_candidates(b: &ExactSolutionBranch) -> GCandidates {
    let f1 = I * (b.c * b.c - 1.0);
    GCandidates {
        stated: b.g(),
        from_relation: f1 * f1 * (6.0 / 25.0),
        consistent: b
            .theta
            .as_real()
            .filter(|_| b.is_real())
            .map(|th| consistent_g(b.c, th, b.eps)),
    }
}

/// Exponent prefactors tried by the calibration sweep: `±ε`, `±(√6/6)ε`.
pub fn kappa_sweep(eps: Cx) -> [Cx; 4] {
    let r = 6f64.sqrt() / 6.0;
    [eps, -eps, eps * r, -eps * r]
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityExpProfile {
    pub kappa: Cx,
    pub t: Vec<f64>,
    pub residual: Vec<f64>,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityExpAudit {
    pub profile: VelocityExpProfile,
    /// `(κ, max residual)` for each swept prefactor.
    pub sweep: Vec<(Cx, f64)>,
    pub best_kappa: Cx,
}

/// `|ż - RHS|` on `grid` for `RHS = -(6/ε) exp(κ ∫_0^t (|z|² - 1))`.
pub fn velocity_exp_profile(
    b: &ExactSolutionBranch,
    kappa: Cx,
    grid: &[f64],
) -> Result<VelocityExpProfile> {
    let mut residual = Vec::with_capacity(grid.len());
    for &t in grid {
        let integral = quad(|s| real(b.z(s).norm_sqr() - 1.0), 0.0, t, 1e-12)?;
        let rhs = -(6.0 / b.eps) * (kappa * integral).exp();
        residual.push((b.zdot(t) - rhs).norm());
    }
    let max = residual.iter().copied().fold(0.0, f64::max);
    Ok(VelocityExpProfile {
        kappa,
        t: grid.to_vec(),
        residual,
        max,
    })
}

pub fn audit_velocity_exp(
    b: &ExactSolutionBranch,
    kappa: Cx,
    grid: &[f64],
) -> Result<VelocityExpAudit> {
    let profile = velocity_exp_profile(b, kappa, grid)?;
    let mut sweep = Vec::new();
    for k in kappa_sweep(b.eps) {
        sweep.push((k, velocity_exp_profile(b, k, grid)?.max));
    }
    let best_kappa = sweep
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|s| s.0)
        .unwrap_or(kappa);
    Ok(VelocityExpAudit {
        profile,
        sweep,
        best_kappa,
    })
}

/// Largest residual of the deformed equation with the branch coefficients
/// along `y` over `grid`.
pub fn exact_solution_y_residual(
    b: &ExactSolutionBranch,
    y: &dyn Fn(f64) -> Result<Cx>,
    grid: &[f64],
) -> Result<f64> {
    let form = OdeForm::second(|t, y, d, dd| dd - deformed_rhs(&b.coeffs, t, y, d));
    verify_ode_residual(y, &form, grid)
}

/// `|F2(t) e^{-iθt} + cθ|`, zero when the stated `F2` has constant envelope.
pub fn f2_envelope_residual(b: &ExactSolutionBranch, t: f64) -> f64 {
    let th = b.theta.value();
    (b.coeffs.f2.eval(t) * (-I * th * t).exp() + b.c * th).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::check_f1_g_relation;
    use crate::lienard::deform_ansatz;
    use crate::num::complex::{cx, ONE, ZERO};

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(lo) < 0.0) == (f(mid) < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lower_cubic_roots() {
        let r = bisect(|c| c * c * c - c - 5.0, 1.0, 3.0);
        let roots = solve_c(Sign::Minus);
        assert!((roots[0] - real(r)).norm() < 1e-12);
        assert!((r - 1.9041609).abs() < 1e-6);
        // Vieta: the pair sums to -r and multiplies to 5/r.
        assert!((roots[1] + roots[2] + r).norm() < 1e-12);
        assert!((roots[1] * roots[2] - 5.0 / r).norm() < 1e-12);
        assert!((roots[2] - cx(-0.9520804, 1.3112480)).norm() < 1e-6);
    }

    #[test]
    fn branches_are_negations() {
        let up = solve_c(Sign::Plus);
        let mut low: Vec<Cx> = solve_c(Sign::Minus).into_iter().map(|c| -c).collect();
        low.sort_by_key(|r| r.im != 0.0);
        assert!((up[0] + real(1.9041609)).norm() < 1e-6);
        for (a, b) in up.iter().zip(&low) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
        for s in Sign::both() {
            for c in solve_c(s) {
                assert!(cubic_residual(c, s) < 1e-12);
            }
        }
    }

    #[test]
    fn real_upper_branch() {
        let b = real_branch(Sign::Plus);
        let th = b.theta.as_real().unwrap();
        assert!((th + 0.5251656).abs() < 1e-6);
        assert!((b.coeffs.f1.eval(0.0) - cx(0.0, 2.6258286)).norm() < 1e-6);
        assert!((b.g() - real(-0.6301989)).norm() < 1e-6);
        assert!((b.coeffs.f2.eval(0.0) - real(-1.0)).norm() < 1e-14);
        assert!((real_branch(Sign::Minus).theta.as_real().unwrap() - 0.5251656).abs() < 1e-6);
    }

    #[test]
    fn not_a_root() {
        match make_branch(ZERO, Sign::Plus) {
            Err(Error::NotARoot { residual, .. }) => assert_eq!(residual, 5.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn theta_c_on_all_roots() {
        for s in Sign::both() {
            for b in branches(s) {
                assert!(theta_c_identity(&b) < 1e-12, "{}", b.c);
            }
        }
        let mut b = real_branch(Sign::Plus);
        b.theta = Theta::Real(b.theta.as_real().unwrap() + 0.1);
        assert!((theta_c_identity(&b) - 0.1 * b.c.norm()).abs() < 1e-12);
        assert!((theta_c_identity(&b) - 0.1904161).abs() < 1e-6);
    }

    #[test]
    fn stated_coefficients_match_ansatz_deformation() {
        for s in Sign::both() {
            let b = real_branch(s);
            let th = b.theta.as_real().unwrap();
            let d = deform_ansatz(b.c, th, EPS, b.coeffs.g.clone());
            assert_eq!(d.f1.as_symbolic(), b.coeffs.f1.as_symbolic());
            assert_eq!(d.f2.as_symbolic(), b.coeffs.f2.as_symbolic());
            for t in [0.0, 1.3, 7.0] {
                assert!(f2_envelope_residual(&b, t) < 1e-12);
            }
        }
    }

    #[test]
    fn consistent_g_examples() {
        let b = real_branch(Sign::Plus);
        let th = b.theta.as_real().unwrap();
        let gs = consistent_g(b.c, th, I);
        assert!((gs - real(-1.1031961149141056)).norm() < 1e-12);
        assert!(((gs - b.g()).norm() - 0.4730).abs() < 1e-3);
        assert!((consistent_g(real(-1.0), 1.0, cx(0.3, 2.0)) - ONE).norm() < 1e-15);
        assert_eq!(consistent_g(real(2.0), 0.0, I), ZERO);
    }

    #[test]
    fn orbit_residual_with_each_g() {
        let b = real_branch(Sign::Plus);
        let gs = g_candidates(&b).consistent.unwrap();
        for t in [0.0, 0.7, 4.0] {
            assert!(oscillator_residual(&b, gs, t).norm() < 1e-12);
            let r = oscillator_residual(&b, b.g(), t).norm();
            assert!((r - (b.g() - gs).norm() * b.c.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn exponent_audit() {
        let b = real_branch(Sign::Plus);
        let grid = [0.0, 0.5, 1.0];
        let a = audit_velocity_exp(&b, -EPS, &grid).unwrap();
        assert!((a.profile.residual[0] - 5.0).abs() < 1e-12);
        assert_eq!(a.sweep.len(), 4);
        let rhs0 = (-(6.0 / EPS)).norm();
        assert!((rhs0 - 6.0).abs() < 1e-15);
    }

    #[test]
    fn relation_residual_on_stated_coefficients() {
        let b = real_branch(Sign::Plus);
        let r = check_f1_g_relation(&b.coeffs, Sign::Plus, 0.0);
        // F1 = i(c² - 1); (5/√6)√G with G < 0 is imaginary.
        let oracle = I * (b.c.re * b.c.re - 1.0) - I * (5.0 / 6f64.sqrt()) * (-b.g().re).sqrt();
        assert!((r - oracle).norm() < 1e-12);
        assert!((r - cx(0.0, 1.0053877184784765)).norm() < 1e-12);
    }

    #[test]
    fn y_residual_examples() {
        let b = real_branch(Sign::Plus);
        let grid: Vec<f64> = (0..6).map(|k| 0.5 * k as f64).collect();
        assert_eq!(
            exact_solution_y_residual(&b, &|_| Ok(ZERO), &grid).unwrap(),
            0.0
        );
        let r = exact_solution_y_residual(&b, &|_| Ok(ONE), &grid).unwrap();
        let oracle = grid
            .iter()
            .map(|&t| (b.coeffs.f2.eval(t) + b.g()).norm())
            .fold(0.0, f64::max);
        assert!((r - oracle).abs() < 1e-9);
        assert!(((b.coeffs.f2.eval(0.0) + b.g()).norm() - 1.6301989).abs() < 1e-6);
    }
}
