//! Dormand–Prince 5(4) integrator for complex state vectors.
//!
//! Local extrapolation (the 5th-order solution is propagated), elementwise
//! max-norm error control against `atol + rtol * |y|`, and the standard
//! 4th-order continuous extension for output at arbitrary times.

use super::complex::{is_finite, Cx};
use crate::error::{Error, Result};

/// Step-size control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl StepperConfig {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::InvalidInput("rtol and atol must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidInput("max_step must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Sampled complex curve `z(t)` with optional first derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t: Vec<f64>,
    z: Vec<Cx>,
    dz: Vec<Cx>,
}

impl Trajectory {
    /// Builds a trajectory; `dz` is either empty or as long as `t`.
    pub fn new(t: Vec<f64>, z: Vec<Cx>, dz: Vec<Cx>) -> Result<Self> {
        if t.len() != z.len() {
            return Err(Error::InvalidTrajectory(format!(
                "{} times but {} states",
                t.len(),
                z.len()
            )));
        }
        if !dz.is_empty() && dz.len() != t.len() {
            return Err(Error::InvalidTrajectory(format!(
                "{} times but {} derivatives",
                t.len(),
                dz.len()
            )));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidTrajectory(
                "times must be strictly increasing".into(),
            ));
        }
        if z.iter().chain(dz.iter()).any(|v| !is_finite(*v)) {
            return Err(Error::InvalidTrajectory("non-finite sample".into()));
        }
        Ok(Self { t, z, dz })
    }

    /// Samples `z` and `dz` from closures on a time grid.
    pub fn from_fn(
        t: Vec<f64>,
        z: impl Fn(f64) -> Cx,
        dz: Option<&dyn Fn(f64) -> Cx>,
    ) -> Result<Self> {
        let zs = t.iter().map(|&s| z(s)).collect();
        let dzs = match dz {
            Some(d) => t.iter().map(|&s| d(s)).collect(),
            None => Vec::new(),
        };
        Self::new(t, zs, dzs)
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn z(&self) -> &[Cx] {
        &self.z
    }

    pub fn dz(&self) -> Option<&[Cx]> {
        if self.dz.is_empty() {
            None
        } else {
            Some(&self.dz)
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// States returned by [`integrate_ode`] at the requested output times.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub states: Vec<Vec<Cx>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl OdeSolution {
    /// Reads a first-order system `(z, ż)` as a trajectory with derivatives.
    pub fn into_trajectory(self) -> Result<Trajectory> {
        let dim = self.states.first().map_or(0, Vec::len);
        match dim {
            1 => {
                let z = self.states.iter().map(|s| s[0]).collect();
                Trajectory::new(self.t, z, Vec::new())
            }
            2 => {
                let z = self.states.iter().map(|s| s[0]).collect();
                let dz = self.states.iter().map(|s| s[1]).collect();
                Trajectory::new(self.t, z, dz)
            }
            d => Err(Error::InvalidInput(format!(
                "state dimension {d} does not describe a scalar trajectory"
            ))),
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th minus 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn axpy(y: &[Cx], h: f64, terms: &[(f64, &[Cx])]) -> Vec<Cx> {
    let mut out = y.to_vec();
    for &(w, k) in terms {
        if w == 0.0 {
            continue;
        }
        for (o, ki) in out.iter_mut().zip(k) {
            *o += ki * (h * w);
        }
    }
    out
}

fn check_finite(t: f64, y: &[Cx]) -> Result<()> {
    if y.iter().all(|v| is_finite(*v)) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

fn initial_step<F>(rhs: &F, t0: f64, y0: &[Cx], f0: &[Cx], cfg: &StepperConfig, span: f64) -> f64
where
    F: Fn(f64, &[Cx]) -> Vec<Cx>,
{
    let scale = |v: Cx| cfg.atol + cfg.rtol * v.norm();
    let norm = |v: &[Cx]| {
        v.iter()
            .zip(y0)
            .map(|(a, y)| (a.norm() / scale(*y)).powi(2))
            .sum::<f64>()
            .sqrt()
            / (v.len().max(1) as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span).min(cfg.max_step);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = rhs(t0 + h0, &y1);
    let diff: Vec<Cx> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span).min(cfg.max_step)
}

/// Integrates `y' = rhs(t, y)` over `t_span` and returns the states at `t_out`.
///
/// `t_out` must be non-decreasing and lie inside `t_span`; `t_span.1 > t_span.0`.
pub fn integrate_ode<F>(
    rhs: F,
    y0: &[Cx],
    t_span: (f64, f64),
    cfg: &StepperConfig,
    t_out: &[f64],
) -> Result<OdeSolution>
where
    F: Fn(f64, &[Cx]) -> Vec<Cx>,
{
    cfg.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::InvalidInput("t_span must be increasing".into()));
    }
    if t_out.iter().any(|&t| t < t0 || t > t1) {
        return Err(Error::InvalidInput("output times outside t_span".into()));
    }
    if t_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(
            "output times must be non-decreasing".into(),
        ));
    }
    check_finite(t0, y0)?;

    let dim = y0.len();
    let mut out_t = Vec::with_capacity(t_out.len());
    let mut out_y = Vec::with_capacity(t_out.len());
    let mut next_out = 0;
    while next_out < t_out.len() && t_out[next_out] == t0 {
        out_t.push(t0);
        out_y.push(y0.to_vec());
        next_out += 1;
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = rhs(t, &y);
    check_finite(t, &k1)?;
    let mut h = initial_step(&rhs, t, &y, &k1, cfg, t1 - t0);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut last_rejected = false;

    while next_out < t_out.len() {
        if accepted + rejected >= cfg.max_steps {
            return Err(Error::StepLimitExceeded {
                max_steps: cfg.max_steps,
                t_end: t1,
            });
        }
        h = h.min(cfg.max_step);
        let last = t + h >= t1 || (t1 - (t + h)) < 1e-12 * t1.abs().max(1.0);
        if last {
            h = t1 - t;
        }

        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        check_finite(t + h, &y_new)?;
        let k7 = rhs(t + h, &y_new);
        check_finite(t + h, &k7)?;

        let mut err: f64 = 0.0;
        for i in 0..dim {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sk = cfg.atol + cfg.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / sk);
        }

        if err <= 1.0 {
            accepted += 1;
            let t_new = if last { t1 } else { t + h };

            // Continuous extension coefficients on [t, t_new].
            let rc5: Vec<Cx> = (0..dim)
                .map(|i| {
                    (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7)
                        * h
                })
                .collect();
            while next_out < t_out.len() && t_out[next_out] <= t_new {
                let s = (t_out[next_out] - t) / h;
                let s1 = 1.0 - s;
                let state: Vec<Cx> = (0..dim)
                    .map(|i| {
                        if t_out[next_out] == t_new {
                            return y_new[i];
                        }
                        let ydiff = y_new[i] - y[i];
                        let bspl = k1[i] * h - ydiff;
                        let rc4 = ydiff - k7[i] * h - bspl;
                        y[i] + (ydiff + (bspl + (rc4 + rc5[i] * s1) * s) * s1) * s
                    })
                    .collect();
                out_t.push(t_out[next_out]);
                out_y.push(state);
                next_out += 1;
            }

            t = t_new;
            y = y_new;
            k1 = k7;
            let mut fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
            if last {
                break;
            }
        } else {
            rejected += 1;
            last_rejected = true;
            h *= (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::NonFiniteState { t });
            }
        }
    }

    // Any outputs pinned exactly at t1 after the final step.
    while next_out < t_out.len() {
        out_t.push(t_out[next_out]);
        out_y.push(y.clone());
        next_out += 1;
    }

    Ok(OdeSolution {
        t: out_t,
        states: out_y,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::complex::{cx, I};

    #[test]
    fn exponential_rotation() {
        let sol = integrate_ode(
            |_, y| vec![I * y[0]],
            &[cx(1.0, 0.0)],
            (0.0, 1.0),
            &StepperConfig::default(),
            &[1.0],
        )
        .unwrap();
        let z = sol.states[0][0];
        assert!((z - cx(1f64.cos(), 1f64.sin())).norm() < 1e-9);
        assert!((z - cx(0.5403023, 0.8414710)).norm() < 1e-7);
    }

    #[test]
    fn constant_field_is_stationary() {
        let ts: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let sol = integrate_ode(
            |_, _| vec![cx(0.0, 0.0)],
            &[cx(3.0, 4.0)],
            (0.0, 10.0),
            &StepperConfig::default(),
            &ts,
        )
        .unwrap();
        assert!(sol.states.iter().all(|s| s[0] == cx(3.0, 4.0)));
        assert_eq!(sol.t, ts);
    }

    #[test]
    fn dense_output_between_steps() {
        // Large steps forced by a loose tolerance; dense output still tracks.
        let ts: Vec<f64> = (0..=50).map(|k| 0.1 * k as f64).collect();
        let sol = integrate_ode(
            |_, y| vec![I * y[0]],
            &[cx(1.0, 0.0)],
            (0.0, 5.0),
            &StepperConfig::default().with_rtol(1e-8).with_atol(1e-10),
            &ts,
        )
        .unwrap();
        for (t, s) in sol.t.iter().zip(&sol.states) {
            assert!((s[0] - (I * *t).exp()).norm() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn step_limit() {
        let err = integrate_ode(
            |_, y| vec![I * y[0]],
            &[cx(1.0, 0.0)],
            (0.0, 100.0),
            &StepperConfig::default().with_max_steps(5),
            &[100.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::StepLimitExceeded { .. }));
    }

    #[test]
    fn blow_up_is_non_finite() {
        // y' = y^2, y(0) = 1 explodes at t = 1.
        let err = integrate_ode(
            |_, y| vec![y[0] * y[0]],
            &[cx(1.0, 0.0)],
            (0.0, 2.0),
            &StepperConfig::default(),
            &[2.0],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NonFiniteState { .. } | Error::StepLimitExceeded { .. }
        ));
    }

    #[test]
    fn rejects_bad_config_and_span() {
        let bad = StepperConfig::default().with_rtol(0.0);
        assert!(
            integrate_ode(|_, y| y.to_vec(), &[cx(1.0, 0.0)], (0.0, 1.0), &bad, &[1.0]).is_err()
        );
        let cfg = StepperConfig::default();
        assert!(
            integrate_ode(|_, y| y.to_vec(), &[cx(1.0, 0.0)], (0.0, 1.0), &cfg, &[2.0]).is_err()
        );
        assert!(
            integrate_ode(|_, y| y.to_vec(), &[cx(1.0, 0.0)], (1.0, 0.0), &cfg, &[0.5]).is_err()
        );
    }

    #[test]
    fn trajectory_invariants() {
        assert!(Trajectory::new(vec![0.0, 1.0], vec![cx(0.0, 0.0)], vec![]).is_err());
        assert!(Trajectory::new(vec![1.0, 1.0], vec![cx(0.0, 0.0); 2], vec![]).is_err());
        assert!(
            Trajectory::new(vec![0.0, 1.0], vec![cx(0.0, 0.0); 2], vec![cx(0.0, 0.0)]).is_err()
        );
        let tr = Trajectory::new(vec![0.0, 1.0], vec![cx(0.0, 0.0); 2], vec![]).unwrap();
        assert!(tr.dz().is_none());
    }
}
