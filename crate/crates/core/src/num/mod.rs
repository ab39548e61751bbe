//! Numeric substrate: complex conventions, ODE integration, quadrature,
//! finite differences and polynomial roots.

pub mod complex;
pub mod diff;
pub mod ode;
pub mod quad;
pub mod roots;

pub use complex::{Cx, I, ONE, ZERO};
pub use diff::{fd_derivative, DerivOrder};
pub use ode::{integrate_ode, OdeSolution, StepperConfig, Trajectory};
pub use quad::quad;
pub use roots::poly_roots;

/// Shortest round-trip decimal for a real number; exponent form outside
/// `[1e-5, 1e16)`. Both zeros print as `0`.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
