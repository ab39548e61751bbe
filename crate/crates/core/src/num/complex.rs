//! Complex scalar conventions shared by every module.
//!
//! All square roots and non-integer powers use the principal logarithm.
//! A negative real argument always sits on the upper side of the cut, so
//! `sqrt(-4) = 2i` regardless of the sign bit of a zero imaginary part.

use num_complex::Complex64;

/// Complex scalar carrier.
pub type Cx = Complex64;

pub const I: Cx = Cx::new(0.0, 1.0);
pub const ONE: Cx = Cx::new(1.0, 0.0);
pub const ZERO: Cx = Cx::new(0.0, 0.0);

#[inline]
pub fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Cx {
    Cx::new(re, 0.0)
}

/// Replaces a negative-zero imaginary part by `+0.0` so that the
/// principal branch of `ln` returns `+iπ` on the negative real axis.
#[inline]
fn upper_cut(z: Cx) -> Cx {
    if z.im == 0.0 {
        Cx::new(z.re, 0.0)
    } else {
        z
    }
}

/// Principal square root.
#[inline]
pub fn sqrt(z: Cx) -> Cx {
    upper_cut(z).sqrt()
}

/// Principal logarithm.
#[inline]
pub fn ln(z: Cx) -> Cx {
    upper_cut(z).ln()
}

/// Principal power `z^w = exp(w ln z)`; `0^w = 0` for `Re w > 0`.
pub fn powc(z: Cx, w: Cx) -> Cx {
    if z == ZERO {
        return if w.re > 0.0 {
            ZERO
        } else {
            Cx::new(f64::NAN, f64::NAN)
        };
    }
    (w * ln(z)).exp()
}

/// Principal real power.
pub fn powf(z: Cx, e: f64) -> Cx {
    powc(z, real(e))
}

#[inline]
pub fn is_finite(z: Cx) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Largest of `|z|` over a slice; zero for an empty slice.
pub fn max_abs(zs: &[Cx]) -> f64 {
    zs.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Parses `"re,im"` (or a bare real) into a complex number.
pub fn parse_pair(s: &str) -> Option<Cx> {
    let mut it = s.split(',').map(str::trim);
    let re: f64 = it.next()?.parse().ok()?;
    let im: f64 = match it.next() {
        Some(v) => v.parse().ok()?,
        None => 0.0,
    };
    if it.next().is_some() {
        return None;
    }
    Some(Cx::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_negative_real_is_upper() {
        assert_eq!(sqrt(cx(-4.0, 0.0)), cx(0.0, 2.0));
        assert_eq!(sqrt(cx(-4.0, -0.0)), cx(0.0, 2.0));
        // Just below the cut the principal value jumps.
        assert!(sqrt(cx(-4.0, -1e-300)).im < 0.0);
    }

    #[test]
    fn half_integer_power_of_negative_real() {
        // (-1/t^2)^{3/2} = -i/t^3
        let t = 2.0;
        let y = cx(-1.0 / (t * t), -0.0);
        let p = powf(y, 1.5);
        assert!((p - cx(0.0, -1.0 / (t * t * t))).norm() < 1e-15);
    }

    #[test]
    fn parse_pairs() {
        assert_eq!(parse_pair("0,-1"), Some(cx(0.0, -1.0)));
        assert_eq!(parse_pair("2.5"), Some(cx(2.5, 0.0)));
        assert_eq!(parse_pair("1,2,3"), None);
        assert_eq!(parse_pair("a,1"), None);
    }
}
