//! Central five-point finite differences.

use super::complex::Cx;

/// Derivative order accepted by [`fd_derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

/// Default step `1e-4 * max(1, |t|)`.
pub fn default_step(t: f64) -> f64 {
    1e-4 * t.abs().max(1.0)
}

/// Five-point central difference of `f` at `t`; `h = None` uses [`default_step`].
///
/// Truncation error is `O(h^4)` for both orders.
pub fn fd_derivative<F>(f: F, t: f64, order: DerivOrder, h: Option<f64>) -> Cx
where
    F: Fn(f64) -> Cx,
{
    let h = h.unwrap_or_else(|| default_step(t));
    let fm2 = f(t - 2.0 * h);
    let fm1 = f(t - h);
    let fp1 = f(t + h);
    let fp2 = f(t + 2.0 * h);
    match order {
        DerivOrder::First => (fm2 - fm1 * 8.0 + fp1 * 8.0 - fp2) / (12.0 * h),
        DerivOrder::Second => {
            let f0 = f(t);
            (-fm2 + fm1 * 16.0 - f0 * 30.0 + fp1 * 16.0 - fp2) / (12.0 * h * h)
        }
    }
}

/// Both derivatives from one set of five samples.
pub fn fd_first_second<F>(f: F, t: f64, h: f64) -> (Cx, Cx, Cx)
where
    F: Fn(f64) -> Cx,
{
    let fm2 = f(t - 2.0 * h);
    let fm1 = f(t - h);
    let f0 = f(t);
    let fp1 = f(t + h);
    let fp2 = f(t + 2.0 * h);
    let d1 = (fm2 - fm1 * 8.0 + fp1 * 8.0 - fp2) / (12.0 * h);
    let d2 = (-fm2 + fm1 * 16.0 - f0 * 30.0 + fp1 * 16.0 - fp2) / (12.0 * h * h);
    (f0, d1, d2)
}
