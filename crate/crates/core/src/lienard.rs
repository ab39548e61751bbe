//! The equations: complex Van der Pol, its variational deformation
//!
//! ```text
//! Y'' + F1(t) Y' + F2(t) Y^2 + G(t) Y = 0,   F1 = ε(|z|² - 1),  F2 = ε ż,
//! ```
//!
//! the skeleton surface `Q = Y''(Y, P = Y')`, and the homographic gauge
//! `y = (αY + β̃)/(γY + δ)`, `T = θ(t)` with its canonical choice.

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::num::complex::{cx, real, sqrt, Cx, I, ONE, ZERO};
use crate::num::diff::{default_step, fd_first_second};
use crate::num::fmt_num;
use crate::num::ode::{integrate_ode, StepperConfig, Trajectory};
use crate::num::quad::quad;
use std::fmt;
use std::sync::Arc;

pub type RealFn = Arc<dyn Fn(f64) -> Cx + Send + Sync>;

/// A time-dependent coefficient of the deformed equation.
#[derive(Clone)]
pub enum Coefficient {
    /// Exponential polynomial in the independent variable alone.
    Symbolic(ExpPoly),
    /// Samples on a strictly increasing grid, linearly interpolated.
    Tabulated {
        t: Vec<f64>,
        v: Vec<Cx>,
    },
    Function(RealFn),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Symbolic(e) => write!(f, "Symbolic({e})"),
            Self::Tabulated { t, .. } => write!(f, "Tabulated({} nodes)", t.len()),
            Self::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl Coefficient {
    pub fn constant(c: Cx) -> Self {
        Self::Symbolic(ExpPoly::constant(c))
    }

    pub fn symbolic(e: ExpPoly) -> Result<Self> {
        if !e.is_x_only() {
            return Err(Error::InvalidInput(format!(
                "coefficient must depend on the independent variable only: {e}"
            )));
        }
        Ok(Self::Symbolic(e))
    }

    pub fn function(f: impl Fn(f64) -> Cx + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> Cx {
        match self {
            Self::Symbolic(e) => e.eval(t, ZERO, ZERO),
            Self::Function(f) => f(t),
            Self::Tabulated { t: ts, v } => {
                let k = ts.partition_point(|&s| s <= t);
                if k == 0 {
                    v[0]
                } else if k >= ts.len() {
                    v[ts.len() - 1]
                } else {
                    let w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
                    v[k - 1] * (1.0 - w) + v[k] * w
                }
            }
        }
    }

    pub fn as_symbolic(&self) -> Option<&ExpPoly> {
        match self {
            Self::Symbolic(e) => Some(e),
            _ => None,
        }
    }

    /// `Some(c)` when the coefficient is a symbolic constant.
    pub fn as_constant(&self) -> Option<Cx> {
        let e = self.as_symbolic()?;
        match e.terms() {
            [] => Some(ZERO),
            [t] if t.lambda == ZERO => Some(t.coeff),
            _ => None,
        }
    }
}

/// Representation shared by all three coefficients, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Symbolic,
    Sampled,
    Mixed,
}

/// `(F1, F2, G)` of the deformed equation.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub f1: Coefficient,
    pub f2: Coefficient,
    pub g: Coefficient,
}

impl CoefficientSet {
    pub fn new(f1: Coefficient, f2: Coefficient, g: Coefficient) -> Self {
        Self { f1, f2, g }
    }

    pub fn constant(f1: Cx, f2: Cx, g: Cx) -> Self {
        Self::new(
            Coefficient::constant(f1),
            Coefficient::constant(f2),
            Coefficient::constant(g),
        )
    }

    pub fn eval(&self, t: f64) -> (Cx, Cx, Cx) {
        (self.f1.eval(t), self.f2.eval(t), self.g.eval(t))
    }

    pub fn representation(&self) -> Representation {
        let sym = [&self.f1, &self.f2, &self.g]
            .iter()
            .filter(|c| c.as_symbolic().is_some())
            .count();
        match sym {
            3 => Representation::Symbolic,
            0 => Representation::Sampled,
            _ => Representation::Mixed,
        }
    }

    /// The three symbolic coefficients, when all are symbolic.
    pub fn symbolic(&self) -> Option<(&ExpPoly, &ExpPoly, &ExpPoly)> {
        Some((
            self.f1.as_symbolic()?,
            self.f2.as_symbolic()?,
            self.g.as_symbolic()?,
        ))
    }

    /// Constant values, when all three are symbolic constants.
    pub fn constants(&self) -> Option<(Cx, Cx, Cx)> {
        Some((
            self.f1.as_constant()?,
            self.f2.as_constant()?,
            self.g.as_constant()?,
        ))
    }
}

/// Acceleration of the complex Van der Pol oscillator,
/// `z'' = ε(1 - |z|²) ż - z`.
pub fn vdp_rhs(eps: Cx, _t: f64, z: Cx, zdot: Cx) -> Cx {
    let modulus_sq = (z * z.conj()).re;
    eps * (1.0 - modulus_sq) * zdot - z
}

/// Integrates the oscillator from `(z0, v0)` at `t = 0` and samples `n`
/// uniform points on `[0, t1]`.
pub fn integrate_vdp(
    eps: Cx,
    z0: Cx,
    v0: Cx,
    t1: f64,
    n: usize,
    cfg: &StepperConfig,
) -> Result<Trajectory> {
    if n < 2 {
        return Err(Error::InvalidInput(
            "need at least two output samples".into(),
        ));
    }
    let t_out: Vec<f64> = (0..n).map(|k| t1 * k as f64 / (n - 1) as f64).collect();
    let sol = integrate_ode(
        |t, s| vec![s[1], vdp_rhs(eps, t, s[0], s[1])],
        &[z0, v0],
        (0.0, t1),
        cfg,
        &t_out,
    )?;
    sol.into_trajectory()
}

/// Deformation coefficients sampled along a base trajectory:
/// `F1 = ε(|z|² - 1)`, `F2 = ε ż`; `g` is supplied by the caller.
pub fn deform_coefficients(base: &Trajectory, eps: Cx, g: Coefficient) -> Result<CoefficientSet> {
    let dz = base.dz().ok_or(Error::MissingDerivatives)?;
    let t = base.t().to_vec();
    let f1 = base
        .z()
        .iter()
        .map(|z| eps * ((z * z.conj()).re - 1.0))
        .collect();
    let f2 = dz.iter().map(|d| eps * d).collect();
    Ok(CoefficientSet::new(
        Coefficient::Tabulated {
            t: t.clone(),
            v: f1,
        },
        Coefficient::Tabulated { t, v: f2 },
        g,
    ))
}

/// Symbolic deformation coefficients along `z = c e^{iθt}` with real θ:
/// `F1 = ε(|c|² - 1)` and `F2 = iεcθ e^{iθt}`.
pub fn deform_ansatz(c: Cx, theta: f64, eps: Cx, g: Coefficient) -> CoefficientSet {
    let f1 = ExpPoly::constant(eps * (c.norm_sqr() - 1.0));
    let f2 = ExpPoly::exp(I * eps * c * theta, cx(0.0, theta));
    CoefficientSet::new(Coefficient::Symbolic(f1), Coefficient::Symbolic(f2), g)
}

/// `Y'' = -F1 Y' - F2 Y² - G Y`.
pub fn deformed_rhs(coeffs: &CoefficientSet, t: f64, y: Cx, ydot: Cx) -> Cx {
    let (f1, f2, g) = coeffs.eval(t);
    -f1 * ydot - f2 * y * y - g * y
}

/// The right-hand side as an exponential polynomial in `(x, y, y')`.
pub fn deformed_rhs_symbolic(f1: &ExpPoly, f2: &ExpPoly, g: &ExpPoly) -> Result<ExpPoly> {
    let a = f1.mul(&ExpPoly::yp())?;
    let b = f2.mul(&ExpPoly::monomial(2, 0))?;
    let c = g.mul(&ExpPoly::y())?;
    Ok(a.add(&b).add(&c).neg())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonNode {
    pub y: f64,
    pub p: f64,
    pub q: Cx,
}

/// Samples `Q = Y''` on a uniform `n × n` grid of real `(Y, P)` at time `t`.
pub fn skeleton_grid(
    coeffs: &CoefficientSet,
    y_range: (f64, f64),
    p_range: (f64, f64),
    n: usize,
    t: f64,
) -> Result<Vec<SkeletonNode>> {
    if n < 2 {
        return Err(Error::InvalidInput("skeleton grid needs n >= 2".into()));
    }
    let lerp = |(a, b): (f64, f64), k: usize| a + (b - a) * k as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let y = lerp(y_range, i);
        for j in 0..n {
            let p = lerp(p_range, j);
            out.push(SkeletonNode {
                y,
                p,
                q: deformed_rhs(coeffs, t, real(y), real(p)),
            });
        }
    }
    Ok(out)
}

pub fn skeleton_csv(nodes: &[SkeletonNode]) -> String {
    let mut s = String::from("Y,P,Q_re,Q_im\n");
    for n in nodes {
        s.push_str(&format!(
            "{},{},{},{}\n",
            fmt_num(n.y),
            fmt_num(n.p),
            fmt_num(n.q.re),
            fmt_num(n.q.im)
        ));
    }
    s
}

/// Base curve `x(t)` with first and second derivatives.
#[derive(Clone)]
pub struct BasePath {
    x: RealFn,
    xd: RealFn,
    xdd: RealFn,
}

impl fmt::Debug for BasePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BasePath(..)")
    }
}

impl BasePath {
    pub fn analytic(
        x: impl Fn(f64) -> Cx + Send + Sync + 'static,
        xd: impl Fn(f64) -> Cx + Send + Sync + 'static,
        xdd: impl Fn(f64) -> Cx + Send + Sync + 'static,
    ) -> Self {
        Self {
            x: Arc::new(x),
            xd: Arc::new(xd),
            xdd: Arc::new(xdd),
        }
    }

    /// Derivatives by five-point differences of `x`.
    pub fn from_fn(x: impl Fn(f64) -> Cx + Send + Sync + 'static) -> Self {
        let x: RealFn = Arc::new(x);
        let (x1, x2) = (x.clone(), x.clone());
        Self {
            x,
            xd: Arc::new(move |t| fd_first_second(|s| x1(s), t, 1e-3 * t.abs().max(1.0)).1),
            xdd: Arc::new(move |t| fd_first_second(|s| x2(s), t, 1e-3 * t.abs().max(1.0)).2),
        }
    }

    pub fn x(&self, t: f64) -> Cx {
        (self.x)(t)
    }

    pub fn xdot(&self, t: f64) -> Cx {
        (self.xd)(t)
    }

    pub fn xddot(&self, t: f64) -> Cx {
        (self.xdd)(t)
    }
}

/// Value and first two derivatives of one gauge function at a node.
pub type Jet = [Cx; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeNode {
    pub t: f64,
    pub alpha: Jet,
    pub beta: Jet,
    pub theta: Jet,
}

/// `α(t)`, `β̃(t)`, `θ(t)` and their first two derivatives on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFunctions {
    pub nodes: Vec<GaugeNode>,
    /// True when derivatives were obtained analytically.
    pub analytic: bool,
}

impl GaugeFunctions {
    /// Samples arbitrary gauge functions; derivatives by five-point differences.
    pub fn from_fns(
        alpha: impl Fn(f64) -> Cx,
        beta: impl Fn(f64) -> Cx,
        theta: impl Fn(f64) -> Cx,
        grid: &[f64],
    ) -> Self {
        let jet = |f: &dyn Fn(f64) -> Cx, t: f64| {
            let (v, d1, d2) = fd_first_second(f, t, 10.0 * default_step(t));
            [v, d1, d2]
        };
        let nodes = grid
            .iter()
            .map(|&t| GaugeNode {
                t,
                alpha: jet(&alpha, t),
                beta: jet(&beta, t),
                theta: jet(&theta, t),
            })
            .collect();
        Self {
            nodes,
            analytic: false,
        }
    }

    /// `α = 1`, `β̃ = 0`, `θ = t`.
    pub fn identity(grid: &[f64]) -> Self {
        let nodes = grid
            .iter()
            .map(|&t| GaugeNode {
                t,
                alpha: [ONE, ZERO, ZERO],
                beta: [ZERO; 3],
                theta: [real(t), ONE, ZERO],
            })
            .collect();
        Self {
            nodes,
            analytic: true,
        }
    }

    pub fn node(&self, t: f64) -> Result<&GaugeNode> {
        self.nodes
            .iter()
            .find(|n| (n.t - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or(Error::OffGrid { t })
    }
}

/// Coefficients of the transformed equation at one time, in the order
/// `dY/dT`, `Y²`, `Y`, constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedCoefficients {
    pub d_y: Cx,
    pub y2: Cx,
    pub y1: Cx,
    pub constant: Cx,
}

/// Coefficients of the deformed equation after the change of variables
/// `y = αY + β̃`, `T = θ(t)` (the `γ = 0`, `δ = 1` slice):
///
/// ```text
/// dY/dT : (2α'/α + θ''/θ - ε(x² - 1)) / θ'
/// Y²    : -ε ẋ α / θ'²
/// Y     : (α''/α + 2ε ẋ β̃ - ε(1 - x²) α'/α) / θ'²
/// 1     : (β̃'' + ε ẋ β̃² - ε(1 - x²) β̃' - G) / (α⁻¹ θ'²)
/// ```
///
/// The `θ''/θ` term is taken as written and contributes nothing when `θ'' = 0`.
pub fn transform_coefficients(
    coeffs: &CoefficientSet,
    gauge: &GaugeFunctions,
    base: &BasePath,
    eps: Cx,
    t: f64,
) -> Result<TransformedCoefficients> {
    let node = gauge.node(t)?;
    let [a, a1, a2] = node.alpha;
    let [b, b1, b2] = node.beta;
    let [th, th1, th2] = node.theta;
    let magnitude = (a * th1).norm();
    if magnitude < 1e-12 {
        return Err(Error::SingularGauge { t, magnitude });
    }
    let x = base.x(t);
    let xd = base.xdot(t);
    let g = coeffs.g.eval(t);
    let th1_sq = th1 * th1;
    let curvature = if th2 == ZERO { ZERO } else { th2 / th };
    Ok(TransformedCoefficients {
        d_y: (a1 * 2.0 / a + curvature - eps * (x * x - 1.0)) / th1,
        y2: -eps * xd * a / th1_sq,
        y1: (a2 / a + eps * xd * b * 2.0 - eps * (1.0 - x * x) * a1 / a) / th1_sq,
        constant: (b2 + eps * xd * b * b - eps * (1.0 - x * x) * b1 - g) / (th1_sq / a),
    })
}

/// Log-derivative of the canonical `α`: `-(2/5)(ε(1 - x²) + ẍ/(2ẋ))`.
fn log_alpha_rate(base: &BasePath, eps: Cx, t: f64) -> Cx {
    let x = base.x(t);
    -0.4 * (eps * (1.0 - x * x) + base.xddot(t) / (base.xdot(t) * 2.0))
}

/// The gauge that brings the quadratic coefficient to magnitude 6:
///
/// ```text
/// θ'² = -ε ẋ α / 6
/// (ln α)' = -(2/5)(ε(1 - x²) + ẍ/(2ẋ))
/// β̃ = -(-G + ε(1 - x²)(ln α)' + (ln α)'' + (ln α)'²) / (2ε ẋ)
/// ```
///
/// `α(t0) = 1` and `θ(t0) = 0` at the first grid node; `α` and `θ` are
/// accumulated node to node by quadrature. `α`, `θ` derivatives are exact
/// given the path; `(ln α)''` and the derivatives of `β̃` are finite differences.
pub fn canonical_gauge(
    base: &BasePath,
    eps: Cx,
    g: &Coefficient,
    t_grid: &[f64],
    tol: f64,
) -> Result<GaugeFunctions> {
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty gauge grid".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "gauge grid must be strictly increasing".into(),
        ));
    }
    for &t in t_grid {
        if base.xdot(t).norm() < 1e-10 {
            return Err(Error::VanishingVelocity { t });
        }
    }
    let rate = |t: f64| log_alpha_rate(base, eps, t);
    let rate_jet = |t: f64| fd_first_second(rate, t, 10.0 * default_step(t));
    let beta = |t: f64| {
        let (l, l1, _) = rate_jet(t);
        let x = base.x(t);
        -(-g.eval(t) + eps * (1.0 - x * x) * l + l1 + l * l) / (eps * base.xdot(t) * 2.0)
    };
    let theta_rate = |ln_alpha: Cx, t: f64| sqrt(-eps * base.xdot(t) * ln_alpha.exp() / 6.0);

    let mut nodes = Vec::with_capacity(t_grid.len());
    let mut ln_alpha = ZERO;
    let mut theta = ZERO;
    let mut prev = t_grid[0];
    for &t in t_grid {
        if t > prev {
            let ln_prev = ln_alpha;
            let from = prev;
            theta += quad(
                |s| {
                    let la =
                        ln_prev + quad(rate, from, s, tol).unwrap_or(Cx::new(f64::NAN, f64::NAN));
                    theta_rate(la, s)
                },
                prev,
                t,
                tol,
            )?;
            ln_alpha += quad(rate, prev, t, tol)?;
            prev = t;
        }
        let (l, l1, _) = rate_jet(t);
        let a = ln_alpha.exp();
        let a1 = a * l;
        let a2 = a * (l1 + l * l);
        let xd = base.xdot(t);
        let u = -eps * xd * a / 6.0;
        let u1 = -eps * (base.xddot(t) * a + xd * a1) / 6.0;
        let th1 = sqrt(u);
        let th2 = u1 / (th1 * 2.0);
        let (b, b1, b2) = fd_first_second(beta, t, 10.0 * default_step(t));
        nodes.push(GaugeNode {
            t,
            alpha: [a, a1, a2],
            beta: [b, b1, b2],
            theta: [theta, th1, th2],
        });
    }
    if nodes.iter().any(|n| {
        n.alpha
            .iter()
            .chain(&n.beta)
            .chain(&n.theta)
            .any(|v| !crate::num::complex::is_finite(*v))
    }) {
        return Err(Error::NonFiniteState { t: t_grid[0] });
    }
    Ok(GaugeFunctions {
        nodes,
        analytic: true,
    })
}
