//! Adaptive Simpson quadrature for complex-valued integrands.

use super::complex::Cx;
use crate::error::{Error, Result};

/// Default recursion depth for [`quad`].
pub const DEFAULT_MAX_DEPTH: u32 = 48;

/// Bisection levels always taken before the error test is trusted, so that
/// an integrand sampled at its zeros on the coarse grid is not mistaken for 0.
const MIN_DEPTH: u32 = 3;

/// Integrates `f` over `[a, b]` with [`DEFAULT_MAX_DEPTH`].
///
/// The target is `|result - exact| <= tol * (1 + |result|)`. `b < a` flips the
/// sign as usual; `a == b` gives zero.
pub fn quad<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Cx>
where
    F: Fn(f64) -> Cx,
{
    quad_with_depth(f, a, b, tol, DEFAULT_MAX_DEPTH)
}

pub fn quad_with_depth<F>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<Cx>
where
    F: Fn(f64) -> Cx,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(
            "quadrature tolerance must be positive".into(),
        ));
    }
    if a == b {
        return Ok(Cx::new(0.0, 0.0));
    }
    if b < a {
        return quad_with_depth(f, b, a, tol, max_depth).map(|v| -v);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    // Absolute target from a coarse magnitude estimate; refined once below.
    let eps = tol * (1.0 + whole.norm());
    let first = recurse(&f, a, b, fa, fm, fb, whole, eps, 0, max_depth)?;
    let eps_final = tol * (1.0 + first.norm());
    if eps_final < eps * 0.5 {
        return recurse(&f, a, b, fa, fm, fb, whole, eps_final, 0, max_depth);
    }
    Ok(first)
}

#[inline]
fn simpson(a: f64, b: f64, fa: Cx, fm: Cx, fb: Cx) -> Cx {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Cx,
    fm: Cx,
    fb: Cx,
    whole: Cx,
    eps: f64,
    depth: u32,
    max_depth: u32,
) -> Result<Cx>
where
    F: Fn(f64) -> Cx,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= MIN_DEPTH && delta.norm() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= max_depth || m <= a || m >= b {
        return Err(Error::DepthExceeded { depth, at: m });
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1, max_depth)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1, max_depth)?;
    Ok(l + r)
}
