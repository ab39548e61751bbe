//! All complex roots of low-degree polynomials.

use super::complex::{sqrt, Cx};
use crate::error::{Error, Result};
use std::cmp::Ordering;

/// Evaluates `coeffs[0] x^n + ... + coeffs[n]` by Horner's rule, returning
/// `(p(x), p'(x), p''(x) / 2)`.
fn horner(coeffs: &[Cx], x: Cx) -> (Cx, Cx, Cx) {
    let mut p = coeffs[0];
    let mut d = Cx::new(0.0, 0.0);
    let mut dd = Cx::new(0.0, 0.0);
    for &c in &coeffs[1..] {
        dd = dd * x + d;
        d = d * x + p;
        p = p * x + c;
    }
    (p, d, dd)
}

/// Value of the polynomial with coefficients listed from the highest degree.
pub fn poly_eval(coeffs: &[Cx], x: Cx) -> Cx {
    coeffs.iter().fold(Cx::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn laguerre(coeffs: &[Cx], mut x: Cx) -> Cx {
    let n = (coeffs.len() - 1) as f64;
    for _ in 0..200 {
        let (p, d, dd2) = horner(coeffs, x);
        if p.norm() == 0.0 {
            return x;
        }
        let g = d / p;
        let h = g * g - dd2 * 2.0 / p;
        let disc = sqrt((h * n - g * g) * (n - 1.0));
        let gp = g + disc;
        let gm = g - disc;
        let den = if gp.norm() >= gm.norm() { gp } else { gm };
        let step = if den.norm() > 0.0 {
            Cx::new(n, 0.0) / den
        } else {
            Cx::from_polar(1.0 + x.norm(), 1.0)
        };
        let next = x - step;
        if (next - x).norm() <= 4.0 * f64::EPSILON * next.norm().max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

fn newton_polish(coeffs: &[Cx], mut x: Cx) -> Cx {
    for _ in 0..50 {
        let (p, d, _) = horner(coeffs, x);
        if d.norm() == 0.0 {
            break;
        }
        let step = p / d;
        let next = x - step;
        if horner(coeffs, next).0.norm() >= p.norm() {
            break;
        }
        x = next;
        if step.norm() <= f64::EPSILON * x.norm() {
            break;
        }
    }
    x
}

fn quadratic(a: Cx, b: Cx, c: Cx) -> [Cx; 2] {
    let disc = sqrt(b * b - a * c * 4.0);
    // Avoid cancellation in -b ± sqrt(disc).
    let q = if (b + disc).norm() >= (b - disc).norm() {
        -(b + disc) * 0.5
    } else {
        -(b - disc) * 0.5
    };
    if q.norm() == 0.0 {
        return [Cx::new(0.0, 0.0), Cx::new(0.0, 0.0)];
    }
    [q / a, c / q]
}

/// Zeroes a component that is pure roundoff relative to `|r|`, so real
/// roots come out exactly real and the sort order is stable.
fn snap(r: Cx) -> Cx {
    let cut = 8.0 * f64::EPSILON * r.norm();
    Cx::new(
        if r.re.abs() <= cut { 0.0 } else { r.re },
        if r.im.abs() <= cut { 0.0 } else { r.im },
    )
}

/// Orders roots by real part, then imaginary part.
pub fn cmp_roots(a: &Cx, b: &Cx) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// All roots of `coeffs[0] x^n + ... + coeffs[n]`, `1 <= n <= 4`, sorted by (re, im).
///
/// Degrees 1 and 2 are closed form; higher degrees use Laguerre iteration
/// with deflation followed by Newton polishing on the undeflated polynomial.
/// `tol` bounds the accepted `|p(r)| / max|coeff|`; roots that cannot reach
/// it (clustered or multiple roots) are still returned.
pub fn poly_roots(coeffs: &[Cx], tol: f64) -> Result<Vec<Cx>> {
    let degree = coeffs.len().saturating_sub(1);
    if degree > 4 {
        return Err(Error::DegreeUnsupported(degree));
    }
    if coeffs.is_empty() || coeffs[0].norm() == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let mut roots = match degree {
        0 => Vec::new(),
        1 => vec![-coeffs[1] / coeffs[0]],
        2 => quadratic(coeffs[0], coeffs[1], coeffs[2]).to_vec(),
        _ => {
            let mut work = coeffs.to_vec();
            let mut found = Vec::with_capacity(degree);
            while work.len() > 3 {
                let r = newton_polish(coeffs, laguerre(&work, Cx::new(0.0, 0.0)));
                found.push(r);
                // Synthetic division by (x - r).
                let mut next = Vec::with_capacity(work.len() - 1);
                let mut acc = work[0];
                next.push(acc);
                for &c in &work[1..work.len() - 1] {
                    acc = acc * r + c;
                    next.push(acc);
                }
                work = next;
            }
            found.extend(quadratic(work[0], work[1], work[2]));
            found
        }
    };
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for r in roots.iter_mut() {
        if poly_eval(coeffs, *r).norm() > tol * scale {
            *r = newton_polish(coeffs, *r);
        }
        *r = snap(*r);
    }
    roots.sort_by(cmp_roots);
    Ok(roots)
}
