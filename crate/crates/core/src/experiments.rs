//! Experiment drivers: initial triangulations, the sharp-transition
//! constants table, the quadratic-form shape study and image approximation.

use crate::approx::{ApproxConfig, Operator};
use crate::encoding::{encode, BitStream};
use crate::error::Result;
use crate::geometry::{abs_form, rho_q, Point2, QuadraticForm, Triangle};
use crate::pixels::PixelGrid;
use crate::quadrature::gauss_legendre;
use crate::refine::{build_hierarchy, Hierarchy, RefineConfig};
use crate::sources::{
    build_sharp_transition, FunctionSource, SharpTransition, SourceKind, SHARP_TRANSITION_SIDE,
};
use crate::tree::{
    global_error, greedy_grow, isotropic_baseline, uniform_baseline, BisectionTree, StopRule,
};

/// The square `[x0, x0 + side] x [y0, y0 + side]` cut along the diagonal
/// through `(x0, y0)` into two symmetric triangles.
pub fn square_d0(x0: f64, y0: f64, side: f64) -> Vec<Triangle> {
    let p = |x: f64, y: f64| Point2::new(x0 + x * side, y0 + y * side);
    vec![
        Triangle::root(0, p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)).expect("valid square half"),
        Triangle::root(1, p(0.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)).expect("valid square half"),
    ]
}

/// The unit square cut along its diagonal.
pub fn unit_square_d0() -> Vec<Triangle> {
    square_d0(0.0, 0.0, 1.0)
}

/// Initial triangulation of the sharp-transition domain.
pub fn sharp_transition_d0() -> Vec<Triangle> {
    square_d0(0.0, 0.0, SHARP_TRANSITION_SIDE)
}

/// A single equilateral triangle of unit side centered at the origin.
pub fn equilateral_d0() -> Vec<Triangle> {
    let h = 3f64.sqrt() / 2.0;
    vec![Triangle::root(
        0,
        Point2::new(-0.5, -h / 3.0),
        Point2::new(0.5, -h / 3.0),
        Point2::new(0.0, 2.0 * h / 3.0),
    )
    .expect("valid equilateral triangle")]
}

/// Continuous configuration used by the constants table: `m = 1`, `p = 2`,
/// `L^2` projection, degree-8 quadrature.
pub fn table_config() -> ApproxConfig {
    ApproxConfig::new(1, 2.0, Operator::Projection).expect("valid config")
}

/// Hessian functionals of `f = g(|x|)` over the sharp-transition square:
/// `U = ||d^2 f||_{L^2}`, `I = ||d^2 f||_{L^{2/3}}` (Frobenius norm) and
/// `A = || sqrt|det d^2 f| ||_{L^{2/3}}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HessianConstants {
    pub u: f64,
    pub i: f64,
    pub a: f64,
}

/// Angular measure of the arc of radius `r` inside `[0, side]^2`.
fn arc_in_square(r: f64, side: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if r <= side {
        half_pi
    } else if r >= side * std::f64::consts::SQRT_2 {
        0.0
    } else {
        (half_pi - 2.0 * (side / r).acos()).max(0.0)
    }
}

/// Radial reduction of the three integrals with composite Gauss-Legendre
/// panels between the points where the integrands lose smoothness.
pub fn hessian_constants(s: &SharpTransition) -> HessianConstants {
    let d = s.delta;
    let side = SHARP_TRANSITION_SIDE;
    let rmax = side * std::f64::consts::SQRT_2;
    let mut breaks = vec![0.0, 1.0, 1.0 + d, 2.0 + d, side, rmax];
    breaks.retain(|&b| b <= rmax);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let (x, w) = gauss_legendre(12);
    let panels = 400;
    let (mut su, mut si, mut sa) = (0.0, 0.0, 0.0);
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let h = (b - a) / panels as f64;
        for k in 0..panels {
            let lo = a + k as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                let r = lo + 0.5 * h * (xi + 1.0);
                let (_, g1, g2) = s.profile(r);
                let tang = if r > 0.0 { g1 / r } else { g2 };
                let frob2 = g2 * g2 + tang * tang;
                let jac = 0.5 * h * wi * r * arc_in_square(r, side);
                su += jac * frob2;
                si += jac * frob2.powf(1.0 / 3.0);
                sa += jac * (g2 * tang).abs().powf(1.0 / 3.0);
            }
        }
    }
    HessianConstants {
        u: su.sqrt(),
        i: si.powf(1.5),
        a: sa.powf(1.5),
    }
}

/// One row of the constants table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantsRow {
    pub delta: f64,
    pub n: usize,
    pub c_u: f64,
    pub c_i: f64,
    pub c_a: f64,
    pub constants: HessianConstants,
}

/// `N ||f - f_N||_2` for the uniform, adaptive isotropic and adaptive
/// anisotropic (refinement rule `rcfg`) triangulations with `N` triangles.
pub fn run_constants_row(
    delta: f64,
    n: usize,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
) -> Result<ConstantsRow> {
    let f = build_sharp_transition(delta)?;
    let d0 = sharp_transition_d0();
    let nf = n as f64;
    let uniform = uniform_baseline(&f, &d0, n, acfg)?;
    let iso = isotropic_baseline(&f, &d0, n, acfg)?;
    let aniso = greedy_grow(&f, &d0, acfg, rcfg, StopRule::MaxLeaves(n))?;
    let constants = match &f.kind {
        SourceKind::SharpTransition(s) => hessian_constants(s),
        _ => unreachable!("sharp transition source"),
    };
    Ok(ConstantsRow {
        delta,
        n,
        c_u: nf * global_error(&uniform, acfg.p),
        c_i: nf * global_error(&iso, acfg.p),
        c_a: nf * global_error(&aniso, acfg.p),
        constants,
    })
}

/// Rows for several transition widths.
pub fn run_constants_table(
    deltas: &[f64],
    n: usize,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
) -> Result<Vec<ConstantsRow>> {
    deltas
        .iter()
        .map(|&d| run_constants_row(d, n, acfg, rcfg))
        .collect()
}

/// Shape class of a triangle with respect to a quadratic form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeClass {
    /// `rho_{|q|}(T) <= 4 sqrt(3)` (the same as `rho_q` for definite `q`).
    Adapted,
    /// `rho_q(T) <= 4 sqrt(3) < rho_{|q|}(T)`: thin triangles aligned with
    /// the null cone of an indefinite `q`.
    AdaptedToQOnly,
    Other,
}

impl ShapeClass {
    /// White, grey and dark.
    pub fn fill(self) -> &'static str {
        match self {
            ShapeClass::Adapted => "#ffffff",
            ShapeClass::AdaptedToQOnly => "#a0a0a0",
            ShapeClass::Other => "#303030",
        }
    }
}

/// Threshold on `rho_q` separating well adapted triangles.
pub const RHO_THRESHOLD: f64 = 6.928_203_230_275_509; // 4 sqrt(3)

pub fn classify(t: &Triangle, q: &QuadraticForm) -> Result<ShapeClass> {
    classify_with(t, q, RHO_THRESHOLD)
}

pub fn classify_with(t: &Triangle, q: &QuadraticForm, threshold: f64) -> Result<ShapeClass> {
    if rho_q(t, &abs_form(q))? <= threshold {
        return Ok(ShapeClass::Adapted);
    }
    if rho_q(t, q)? <= threshold {
        return Ok(ShapeClass::AdaptedToQOnly);
    }
    Ok(ShapeClass::Other)
}

/// Result of refining a quadratic form from an equilateral start.
#[derive(Clone, Debug)]
pub struct QuadraticDemo {
    pub hierarchy: Hierarchy,
    pub form: QuadraticForm,
    pub classes: Vec<ShapeClass>,
}

impl QuadraticDemo {
    pub fn fraction(&self, class: ShapeClass) -> f64 {
        let n = self.classes.iter().filter(|&&c| c == class).count();
        n as f64 / self.classes.len() as f64
    }

    /// Fraction of triangles with `rho_q(T) <= 4 sqrt(3)`.
    pub fn fraction_adapted(&self) -> f64 {
        self.fraction(ShapeClass::Adapted) + self.fraction(ShapeClass::AdaptedToQOnly)
    }
}

/// Builds `D_J` for `f = q` from an equilateral triangle and classifies
/// every triangle of the last level.
pub fn run_quadratic_demo(
    q: QuadraticForm,
    levels: usize,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
) -> Result<QuadraticDemo> {
    let f = FunctionSource::quadratic(q);
    let hierarchy = build_hierarchy(&f, &equilateral_d0(), levels, acfg, rcfg)?;
    let classes = hierarchy
        .level(levels)
        .map(|t| classify(t, &q))
        .collect::<Result<_>>()?;
    Ok(QuadraticDemo {
        hierarchy,
        form: q,
        classes,
    })
}

/// Point samples of the leaf approximations at the pixel centers.
pub fn rasterize(tree: &BisectionTree, grid: &PixelGrid) -> PixelGrid {
    let mut data = vec![0.0; grid.len()];
    for (id, set) in tree.leaf_pixels(grid) {
        let Some(poly) = &tree.node(id).poly else {
            continue;
        };
        for &k in &set.indices {
            let c = grid.center(k);
            data[k as usize] = poly.eval(c.x, c.y);
        }
    }
    PixelGrid::new(grid.width(), grid.height(), data)
}

/// Peak signal to noise ratio in dB on the `[0, 255]` scale; infinite
/// for identical images.
pub fn psnr(a: &PixelGrid, b: &PixelGrid) -> f64 {
    assert_eq!((a.width(), a.height()), (b.width(), b.height()));
    let mse = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| {
            let d = 255.0 * (x - y);
            d * d
        })
        .sum::<f64>()
        / a.len() as f64;
    10.0 * (255.0 * 255.0 / mse).log10()
}

/// Greedy tree approximation of an image.
#[derive(Clone, Debug)]
pub struct ImageRun {
    pub tree: BisectionTree,
    pub approximation: PixelGrid,
    pub psnr: f64,
    pub bits: BitStream,
}

/// Grows a tree on `grid` (roots: the unit square cut along its diagonal)
/// to `n` leaves and rasterizes the result.
pub fn run_image(
    grid: &PixelGrid,
    n: usize,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
) -> Result<ImageRun> {
    let f = FunctionSource::pixel_grid(grid.clone());
    let tree = greedy_grow(&f, &unit_square_d0(), acfg, rcfg, StopRule::MaxLeaves(n))?;
    let approximation = rasterize(&tree, grid);
    Ok(ImageRun {
        psnr: psnr(grid, &approximation),
        bits: encode(&tree),
        approximation,
        tree,
    })
}
