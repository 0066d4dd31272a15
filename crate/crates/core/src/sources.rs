//! Target functions: analytic closures, quadratic forms, the sharp radial
//! transition `g_delta`, the two oscillatory counterexamples and pixel grids.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::geometry::{Point2, QuadraticForm};
use crate::pixels::PixelGrid;

pub type AnalyticFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`; bounds may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Domain {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Domain { x0, x1, y0, y1 }
    }

    pub const fn unit_square() -> Self {
        Domain::new(0.0, 1.0, 0.0, 1.0)
    }

    pub const fn unbounded() -> Self {
        Domain::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
        )
    }

    pub fn contains(&self, p: Point2) -> bool {
        let tol = 1e-12 * (1.0 + p.x.abs().max(p.y.abs()));
        p.x >= self.x0 - tol && p.x <= self.x1 + tol && p.y >= self.y0 - tol && p.y <= self.y1 + tol
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// The C^2 radial profile `g_delta`: `(5 - r^2)/4` on `[0, 1]`, a quintic
/// blend on `[1, 1 + delta]`, and `-(5 - (1 - s)^2)/4` at `r = 1 + delta + s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SharpTransition {
    pub delta: f64,
    /// Coefficients of the blend as a polynomial in `t = (r - 1) / delta`.
    pub blend: [f64; 6],
}

impl SharpTransition {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "transition width must be positive, got {delta}"
            )));
        }
        // value, slope and curvature of both outer branches, in the t variable
        let left = [1.0, -0.5 * delta, -0.5 * delta * delta];
        let right = [-1.0, -0.5 * delta, 0.5 * delta * delta];
        let mut m = Matrix6::zeros();
        let mut rhs = Vector6::zeros();
        for (row0, t, vals) in [(0, 0.0f64, left), (3, 1.0f64, right)] {
            for k in 0..6 {
                let kf = k as f64;
                m[(row0, k)] = t.powi(k as i32);
                m[(row0 + 1, k)] = if k >= 1 {
                    kf * t.powi(k as i32 - 1)
                } else {
                    0.0
                };
                m[(row0 + 2, k)] = if k >= 2 {
                    kf * (kf - 1.0) * t.powi(k as i32 - 2)
                } else {
                    0.0
                };
            }
            rhs[row0] = vals[0];
            rhs[row0 + 1] = vals[1];
            rhs[row0 + 2] = vals[2];
        }
        let sol = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidParameter("blend system is singular".into()))?;
        let mut blend = [0.0; 6];
        blend.copy_from_slice(sol.as_slice());
        Ok(SharpTransition { delta, blend })
    }

    /// `(g, g', g'')` at radius `r >= 0`.
    pub fn profile(&self, r: f64) -> (f64, f64, f64) {
        if r <= 1.0 {
            (0.25 * (5.0 - r * r), -0.5 * r, -0.5)
        } else if r <= 1.0 + self.delta {
            self.blend_at((r - 1.0) / self.delta)
        } else {
            let s = r - 1.0 - self.delta;
            let u = 1.0 - s;
            (-0.25 * (5.0 - u * u), -0.5 * u, 0.5)
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.profile(x.hypot(y)).0
    }

    /// Hessian of `(x, y) -> g(|(x, y)|)` as a quadratic form.
    pub fn hessian(&self, x: f64, y: f64) -> QuadraticForm {
        let r = x.hypot(y);
        let (_, dg, ddg) = self.profile(r);
        if r < 1e-300 {
            return QuadraticForm::new(ddg, 0.0, ddg);
        }
        let (nx, ny) = (x / r, y / r);
        let tang = dg / r;
        QuadraticForm::new(
            ddg * nx * nx + tang * ny * ny,
            (ddg - tang) * nx * ny,
            ddg * ny * ny + tang * nx * nx,
        )
    }

    /// `(P, P', P'')` of the blend polynomial at `t`, scaled back to `r`.
    fn blend_at(&self, t: f64) -> (f64, f64, f64) {
        let c = &self.blend;
        let d = self.delta;
        let g = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let dg = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        let ddg = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        (g, dg / d, ddg / (d * d))
    }

    /// Largest relative violation of the six matching conditions.
    pub fn matching_residual(&self) -> f64 {
        let rel = |got: f64, want: f64| (got - want).abs() / want.abs();
        let (a0, a1, a2) = self.blend_at(0.0);
        let (b0, b1, b2) = self.blend_at(1.0);
        [
            rel(a0, 1.0),
            rel(a1, -0.5),
            rel(a2, -0.5),
            rel(b0, -1.0),
            rel(b1, -0.5),
            rel(b2, 0.5),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `u(x) = L_3(4x - 1) = 160 x^3 - 120 x^2 + 24 x - 1`.
pub fn legendre_profile(x: f64) -> f64 {
    ((160.0 * x - 120.0) * x + 24.0) * x - 1.0
}

#[derive(Clone)]
pub enum SourceKind {
    Analytic(AnalyticFn),
    Quadratic(QuadraticForm),
    SharpTransition(SharpTransition),
    /// `sin(2 pi m x)`: vanishes on every line `x = k / (2m)`.
    CounterexampleInterp {
        degree: usize,
    },
    /// Two copies of the Legendre profile on `[0, 1/2]` and `(1/2, 1]`.
    CounterexampleL2,
    PixelGrid(Arc<PixelGrid>),
}

impl fmt::Debug for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKind::Analytic(_) => write!(f, "Analytic(..)"),
            SourceKind::Quadratic(q) => write!(f, "Quadratic({q:?})"),
            SourceKind::SharpTransition(s) => write!(f, "SharpTransition(delta={})", s.delta),
            SourceKind::CounterexampleInterp { degree } => {
                write!(f, "CounterexampleInterp(m={degree})")
            }
            SourceKind::CounterexampleL2 => write!(f, "CounterexampleL2"),
            SourceKind::PixelGrid(g) => write!(f, "PixelGrid({}x{})", g.width(), g.height()),
        }
    }
}

/// A target function together with its domain.
#[derive(Clone, Debug)]
pub struct FunctionSource {
    pub kind: SourceKind,
    pub domain: Domain,
}

impl FunctionSource {
    pub fn analytic<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        FunctionSource {
            kind: SourceKind::Analytic(Arc::new(f)),
            domain,
        }
    }

    pub fn quadratic(q: QuadraticForm) -> Self {
        FunctionSource {
            kind: SourceKind::Quadratic(q),
            domain: Domain::unbounded(),
        }
    }

    pub fn pixel_grid(grid: PixelGrid) -> Self {
        FunctionSource {
            kind: SourceKind::PixelGrid(Arc::new(grid)),
            domain: Domain::unit_square(),
        }
    }

    pub fn pixels(&self) -> Option<&PixelGrid> {
        match &self.kind {
            SourceKind::PixelGrid(g) => Some(g),
            _ => None,
        }
    }

    pub fn is_pixel_grid(&self) -> bool {
        self.pixels().is_some()
    }

    /// Point value without the domain check. Pixel grids are sampled at the
    /// nearest pixel.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            SourceKind::Analytic(f) => f(x, y),
            SourceKind::Quadratic(q) => q.eval(Point2::new(x, y)),
            SourceKind::SharpTransition(s) => s.value(x, y),
            SourceKind::CounterexampleInterp { degree } => {
                (2.0 * std::f64::consts::PI * *degree as f64 * x).sin()
            }
            SourceKind::CounterexampleL2 => {
                if x <= 0.5 {
                    legendre_profile(x)
                } else {
                    legendre_profile(x - 0.5)
                }
            }
            SourceKind::PixelGrid(g) => g.sample_nearest(Point2::new(x, y)),
        }
    }

    /// Abscissa of a vertical line across which the source is only
    /// continuous; quadrature is applied on each side separately.
    pub fn breakline_x(&self) -> Option<f64> {
        match self.kind {
            SourceKind::CounterexampleL2 => Some(0.5),
            _ => None,
        }
    }

    /// Value at `p`; pixel grids can only be evaluated at pixel centers.
    pub fn eval(&self, p: Point2) -> Result<f64> {
        if !self.domain.contains(p) {
            return Err(Error::OutsideDomain { x: p.x, y: p.y });
        }
        if let SourceKind::PixelGrid(g) = &self.kind {
            return g.value_at_center(p).ok_or(Error::Unsupported(
                "pixel grids are sampled at pixel centers only",
            ));
        }
        Ok(self.value(p.x, p.y))
    }
}

/// `f(x, y) = g_delta(sqrt(x^2 + y^2))` on `[0, 1.1]^2`.
pub fn build_sharp_transition(delta: f64) -> Result<FunctionSource> {
    Ok(FunctionSource {
        kind: SourceKind::SharpTransition(SharpTransition::new(delta)?),
        domain: sharp_transition_domain(),
    })
}

/// Side of the square domain of the sharp transition experiments. The
/// transition circle `r = 1` crosses the square, and with this side the
/// Hessian functionals `||d^2 f||_{L^2}`, `||d^2 f||_{L^{2/3}}` and
/// `||sqrt|det d^2 f| ||_{L^{2/3}}` come out at about 103, 28 and 6.7 for
/// `delta = 0.2`.
pub const SHARP_TRANSITION_SIDE: f64 = 1.1;

/// Domain used for the sharp transition experiments.
pub const fn sharp_transition_domain() -> Domain {
    Domain::new(0.0, SHARP_TRANSITION_SIDE, 0.0, SHARP_TRANSITION_SIDE)
}

/// `sin(2 pi m x)` on the unit square.
pub fn build_counterexample_interp(degree: usize) -> Result<FunctionSource> {
    if degree == 0 {
        return Err(Error::InvalidParameter(
            "interpolation counterexample needs degree >= 1".into(),
        ));
    }
    Ok(FunctionSource {
        kind: SourceKind::CounterexampleInterp { degree },
        domain: Domain::unit_square(),
    })
}

/// Periodized Legendre profile on the unit square.
pub fn build_counterexample_l2() -> FunctionSource {
    FunctionSource {
        kind: SourceKind::CounterexampleL2,
        domain: Domain::unit_square(),
    }
}
