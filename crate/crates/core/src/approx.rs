//! Local approximation operators onto `Pi_m` (projection and interpolation)
//! and the local error `e_T(f)_p = ||f - A_T f||_{L^p(T)}`.
//!
//! Continuous sources are integrated with the configured triangle rule; the
//! p-th power of the residual is integrated with the same rule. Pixel grids
//! use exact discrete least squares over the pixel set of the triangle, and
//! the error is the discrete `l^p` norm over that set.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{Edge, NodeId, Point2, Triangle};
use crate::pixels::PixelSet;
use crate::quadrature::TriangleRule;
use crate::sources::FunctionSource;

/// Local operator `A_T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    Projection,
    Interpolation,
}

/// Degree, error exponent, operator and quadrature used for local fits.
#[derive(Clone, Debug)]
pub struct ApproxConfig {
    pub degree: usize,
    /// Error exponent in `[1, inf]`; `f64::INFINITY` selects the sup norm.
    pub p: f64,
    pub operator: Operator,
    quadrature_order: usize,
    subdivisions: u32,
    rule: Arc<TriangleRule>,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig::new(1, 2.0, Operator::Projection).expect("default config is valid")
    }
}

impl ApproxConfig {
    pub fn new(degree: usize, p: f64, operator: Operator) -> Result<Self> {
        if degree > 2 {
            return Err(Error::InvalidParameter(format!(
                "polynomial degree must be 0, 1 or 2, got {degree}"
            )));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "exponent p must be >= 1, got {p}"
            )));
        }
        Ok(ApproxConfig {
            degree,
            p,
            operator,
            quadrature_order: 8,
            subdivisions: 0,
            rule: Arc::new(TriangleRule::of_order(8)),
        })
    }

    /// Rule exact to total degree `order`, composed on `4^subdivisions`
    /// congruent sub-triangles.
    pub fn with_quadrature(mut self, order: usize, subdivisions: u32) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        self.quadrature_order = order;
        self.subdivisions = subdivisions;
        self.rule = Arc::new(TriangleRule::of_order(order).subdivided(subdivisions));
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        assert!(p >= 1.0);
        self.p = p;
        self
    }

    pub fn with_operator(mut self, operator: Operator) -> Self {
        self.operator = operator;
        self
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    pub fn subdivisions(&self) -> u32 {
        self.subdivisions
    }

    pub fn rule(&self) -> &TriangleRule {
        &self.rule
    }

    pub fn basis_len(&self) -> usize {
        basis_len(self.degree)
    }

    pub fn is_sup_norm(&self) -> bool {
        self.p.is_infinite()
    }
}

/// `dim Pi_m = (m + 1)(m + 2) / 2`.
pub fn basis_len(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Exponents `(i, j)` of the monomial basis, ordered by total degree.
pub const MONOMIAL_EXPONENTS: [(i32, i32); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// Polynomial of total degree `<= m` in the monomials of
/// `((x - cx) / h, (y - cy) / h)`, centered at the barycenter and scaled by
/// the diameter of the triangle it was fitted on.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPolynomial {
    pub degree: usize,
    pub center: Point2,
    pub scale: f64,
    pub coeffs: Vec<f64>,
}

impl LocalPolynomial {
    pub fn zero(degree: usize, t: &Triangle) -> Self {
        LocalPolynomial {
            degree,
            center: t.barycenter(),
            scale: t.diameter(),
            coeffs: vec![0.0; basis_len(degree)],
        }
    }

    fn basis(&self, x: f64, y: f64, out: &mut [f64; 6]) {
        let u = (x - self.center.x) / self.scale;
        let v = (y - self.center.y) / self.scale;
        out[0] = 1.0;
        out[1] = u;
        out[2] = v;
        out[3] = u * u;
        out[4] = u * v;
        out[5] = v * v;
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut b = [0.0; 6];
        self.basis(x, y, &mut b);
        self.coeffs.iter().zip(&b).map(|(c, m)| c * m).sum()
    }

    /// Re-expresses `sum c_k m_k` in the plain monomials `x^i y^j`,
    /// returned in the order of [`MONOMIAL_EXPONENTS`].
    pub fn to_global_monomials(&self) -> Vec<f64> {
        let (cx, cy, h) = (self.center.x, self.center.y, self.scale);
        let mut out = vec![0.0; basis_len(self.degree)];
        let c = |k: usize| self.coeffs.get(k).copied().unwrap_or(0.0);
        // u = (x - cx)/h, v = (y - cy)/h
        out[0] += c(0);
        if self.degree >= 1 {
            out[0] += -c(1) * cx / h - c(2) * cy / h;
            out[1] += c(1) / h;
            out[2] += c(2) / h;
        }
        if self.degree >= 2 {
            let h2 = h * h;
            // u^2
            out[0] += c(3) * cx * cx / h2;
            out[1] += -2.0 * c(3) * cx / h2;
            out[3] += c(3) / h2;
            // u v
            out[0] += c(4) * cx * cy / h2;
            out[1] += -c(4) * cy / h2;
            out[2] += -c(4) * cx / h2;
            out[4] += c(4) / h2;
            // v^2
            out[0] += c(5) * cy * cy / h2;
            out[2] += -2.0 * c(5) * cy / h2;
            out[5] += c(5) / h2;
        }
        out
    }
}

/// A triangle together with its pixel set when the source is a pixel grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub triangle: Triangle,
    pub pixels: Option<PixelSet>,
}

impl Cell {
    /// For pixel sources the pixel set is every pixel center in the closed
    /// triangle; use [`Cell::roots`] or [`Cell::children`] inside a
    /// partition.
    pub fn new(f: &FunctionSource, triangle: Triangle) -> Cell {
        Cell {
            triangle,
            pixels: f.pixels().map(|g| g.pixels_in(&triangle)),
        }
    }

    /// Cells of a partition, with boundary pixels assigned to the smallest
    /// root id.
    pub fn roots(f: &FunctionSource, roots: &[Triangle]) -> Vec<Cell> {
        match f.pixels() {
            Some(g) => roots
                .iter()
                .zip(g.partition(roots))
                .map(|(t, s)| Cell {
                    triangle: *t,
                    pixels: Some(s),
                })
                .collect(),
            None => roots
                .iter()
                .map(|t| Cell {
                    triangle: *t,
                    pixels: None,
                })
                .collect(),
        }
    }

    pub fn children(&self, f: &FunctionSource, edge: Edge) -> [Cell; 2] {
        let [t1, t2] = self.triangle.bisect(edge);
        match (&self.pixels, f.pixels()) {
            (Some(set), Some(g)) => {
                let [s1, s2] = g.split(set, &self.triangle, edge);
                [
                    Cell {
                        triangle: t1,
                        pixels: Some(s1),
                    },
                    Cell {
                        triangle: t2,
                        pixels: Some(s2),
                    },
                ]
            }
            _ => [
                Cell {
                    triangle: t1,
                    pixels: None,
                },
                Cell {
                    triangle: t2,
                    pixels: None,
                },
            ],
        }
    }
}

/// Result of applying `A_T` to `f` on one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFit {
    pub poly: LocalPolynomial,
    pub error: f64,
    /// False when the pixel set is too small to determine a polynomial;
    /// such cells report zero error and are never worth splitting.
    pub determined: bool,
}

/// Local error of one triangle with its fitted polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub id: NodeId,
    pub error: f64,
    pub poly: LocalPolynomial,
}

/// Minimum-norm least-squares solve of the symmetric system `g c = b`
/// through the eigen decomposition, dropping eigenvalues at rounding level.
fn solve_symmetric(g: DMatrix<f64>, b: DVector<f64>) -> DVector<f64> {
    let n = b.len();
    let unit = g.amax();
    if unit == 0.0 || !unit.is_finite() {
        return DVector::zeros(n);
    }
    let (g, b) = (g / unit, b / unit);
    let eig = g.symmetric_eigen();
    let lmax = eig.eigenvalues.amax();
    let eps = lmax * 1e-13 * n as f64;
    let mut x = DVector::zeros(n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > eps {
            let v = eig.eigenvectors.column(k);
            x += v * (v.dot(&b) / l);
        }
    }
    x
}

fn lp_norm(p: f64, sum_pow: f64) -> f64 {
    if p == 2.0 {
        sum_pow.max(0.0).sqrt()
    } else if p == 1.0 {
        sum_pow
    } else {
        sum_pow.powf(1.0 / p)
    }
}

fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 2.0 {
        v * v
    } else if p == 1.0 {
        v.abs()
    } else {
        v.abs().powf(p)
    }
}

/// Extra points used to estimate a sup norm: vertices and edge midpoints.
fn sup_probe_points(t: &Triangle) -> [Point2; 6] {
    let [a, b, c] = t.vertices;
    [a, b, c, a.midpoint(b), b.midpoint(c), c.midpoint(a)]
}

/// Applies `cfg.operator` to `f` on `cell` and measures the local error
/// in `L^{cfg.p}`.
pub fn fit(f: &FunctionSource, cell: &Cell, cfg: &ApproxConfig) -> Result<LocalFit> {
    match (&cell.pixels, f.pixels()) {
        (Some(set), Some(_)) => fit_pixels(f, &cell.triangle, set, cfg),
        (None, Some(g)) => fit_pixels(f, &cell.triangle, &g.pixels_in(&cell.triangle), cfg),
        _ => fit_continuous(f, &cell.triangle, cfg),
    }
}

fn fit_continuous(f: &FunctionSource, t: &Triangle, cfg: &ApproxConfig) -> Result<LocalFit> {
    if !t.is_valid() {
        return Err(Error::DegenerateTriangle);
    }
    let rule = cfg.rule();
    let mut samples = Vec::with_capacity(rule.len());
    for piece in split_at_breakline(t, f.breakline_x()) {
        let area = piece.area();
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let p = piece.point_at(*l);
            samples.push((p, w * area, f.value(p.x, p.y)));
        }
    }
    let poly = match cfg.operator {
        Operator::Projection => project_samples(t, cfg.degree, &samples),
        Operator::Interpolation => interpolate_continuous(f, t, cfg.degree)?,
    };
    let scale = if cfg.is_sup_norm() {
        samples.iter().map(|s| s.2.abs()).fold(0.0, f64::max)
    } else {
        lp_norm(
            cfg.p,
            samples.iter().map(|(_, w, v)| w * pow_abs(*v, cfg.p)).sum(),
        )
    };
    let error = if cfg.is_sup_norm() {
        let mut m = samples
            .iter()
            .map(|(p, _, v)| (v - poly.eval(p.x, p.y)).abs())
            .fold(0.0, f64::max);
        for p in sup_probe_points(t) {
            m = m.max((f.value(p.x, p.y) - poly.eval(p.x, p.y)).abs());
        }
        m
    } else {
        let s: f64 = samples
            .iter()
            .map(|(p, w, v)| w * pow_abs(v - poly.eval(p.x, p.y), cfg.p))
            .sum();
        lp_norm(cfg.p, s)
    };
    Ok(LocalFit {
        poly,
        error: snap_to_zero(error, scale),
        determined: true,
    })
}

/// Residuals at rounding level relative to the size of `f` count as zero.
fn snap_to_zero(error: f64, scale: f64) -> f64 {
    if error <= ZERO_FLOOR * scale {
        0.0
    } else {
        error
    }
}

/// Relative level below which a local error is indistinguishable from
/// rounding.
pub const ZERO_FLOOR: f64 = 1e-12;

/// Pieces of `t` on either side of the line `x = xb`, fan-triangulated.
pub(crate) fn split_at_breakline(t: &Triangle, xb: Option<f64>) -> Vec<Triangle> {
    let Some(xb) = xb else {
        return vec![*t];
    };
    let v = t.vertices;
    let tol = 1e-14 * t.diameter();
    if v.iter().all(|p| p.x >= xb - tol) || v.iter().all(|p| p.x <= xb + tol) {
        return vec![*t];
    }
    let mut pieces = Vec::with_capacity(3);
    for sign in [-1.0, 1.0] {
        // Sutherland-Hodgman against the half plane sign * (x - xb) <= 0
        let inside = |p: &Point2| sign * (p.x - xb) <= 0.0;
        let mut poly: Vec<Point2> = Vec::with_capacity(4);
        for k in 0..3 {
            let (p, q) = (v[k], v[(k + 1) % 3]);
            if inside(&p) {
                poly.push(p);
            }
            if inside(&p) != inside(&q) {
                let s = (xb - p.x) / (q.x - p.x);
                poly.push(Point2::new(xb, p.y + s * (q.y - p.y)));
            }
        }
        for k in 1..poly.len().saturating_sub(1) {
            if let Ok(piece) = Triangle::new(poly[0], poly[k], poly[k + 1]) {
                pieces.push(piece);
            }
        }
    }
    pieces
}

fn project_samples(t: &Triangle, degree: usize, samples: &[(Point2, f64, f64)]) -> LocalPolynomial {
    let mut poly = LocalPolynomial::zero(degree, t);
    let n = basis_len(degree);
    let mut g = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut phi = [0.0; 6];
    for &(p, w, v) in samples {
        poly.basis(p.x, p.y, &mut phi);
        for i in 0..n {
            b[i] += w * v * phi[i];
            for j in 0..=i {
                g[(i, j)] += w * phi[i] * phi[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            g[(j, i)] = g[(i, j)];
        }
    }
    poly.coeffs = solve_symmetric(g, b).iter().copied().collect();
    poly
}

/// Lagrange nodes `sum (k_i / m) v_i`; the barycenter for `m = 0`.
pub fn interpolation_nodes(t: &Triangle, degree: usize) -> Vec<Point2> {
    if degree == 0 {
        return vec![t.barycenter()];
    }
    let m = degree as f64;
    let mut nodes = Vec::with_capacity(basis_len(degree));
    for k0 in (0..=degree).rev() {
        for k1 in (0..=degree - k0).rev() {
            let k2 = degree - k0 - k1;
            nodes.push(t.point_at([k0 as f64 / m, k1 as f64 / m, k2 as f64 / m]));
        }
    }
    nodes
}

fn interpolate_continuous(
    f: &FunctionSource,
    t: &Triangle,
    degree: usize,
) -> Result<LocalPolynomial> {
    let mut poly = LocalPolynomial::zero(degree, t);
    let nodes = interpolation_nodes(t, degree);
    let n = nodes.len();
    let mut v = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let mut phi = [0.0; 6];
    for (r, p) in nodes.iter().enumerate() {
        poly.basis(p.x, p.y, &mut phi);
        for c in 0..n {
            v[(r, c)] = phi[c];
        }
        rhs[r] = f.value(p.x, p.y);
    }
    let sol = v.lu().solve(&rhs).ok_or(Error::DegenerateTriangle)?;
    poly.coeffs = sol.iter().copied().collect();
    Ok(poly)
}

fn fit_pixels(
    f: &FunctionSource,
    t: &Triangle,
    set: &PixelSet,
    cfg: &ApproxConfig,
) -> Result<LocalFit> {
    let grid = f.pixels().expect("pixel source");
    if cfg.operator == Operator::Interpolation {
        return Err(Error::Unsupported(
            "interpolation needs a continuous source",
        ));
    }
    let n = basis_len(cfg.degree);
    let mut poly = LocalPolynomial::zero(cfg.degree, t);
    if set.len() < n {
        // underdetermined: minimum-norm fit, zero error by convention
        if !set.is_empty() {
            let mut g = DMatrix::zeros(n, n);
            let mut b = DVector::zeros(n);
            let mut phi = [0.0; 6];
            for &idx in &set.indices {
                let p = grid.center(idx);
                poly.basis(p.x, p.y, &mut phi);
                let v = grid.value(idx);
                for i in 0..n {
                    b[i] += v * phi[i];
                    for j in 0..n {
                        g[(i, j)] += phi[i] * phi[j];
                    }
                }
            }
            poly.coeffs = solve_symmetric(g, b).iter().copied().collect();
        }
        return Ok(LocalFit {
            poly,
            error: 0.0,
            determined: false,
        });
    }
    let mut g = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut phi = [0.0; 6];
    for &idx in &set.indices {
        let p = grid.center(idx);
        poly.basis(p.x, p.y, &mut phi);
        let v = grid.value(idx);
        for i in 0..n {
            b[i] += v * phi[i];
            for j in 0..=i {
                g[(i, j)] += phi[i] * phi[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            g[(j, i)] = g[(i, j)];
        }
    }
    poly.coeffs = solve_symmetric(g, b).iter().copied().collect();
    let residual = |idx: u32| {
        let p = grid.center(idx);
        grid.value(idx) - poly.eval(p.x, p.y)
    };
    let (error, scale) = if cfg.is_sup_norm() {
        (
            set.indices
                .iter()
                .map(|&i| residual(i).abs())
                .fold(0.0, f64::max),
            set.indices
                .iter()
                .map(|&i| grid.value(i).abs())
                .fold(0.0, f64::max),
        )
    } else {
        let s: f64 = set
            .indices
            .iter()
            .map(|&i| pow_abs(residual(i), cfg.p))
            .sum();
        let n: f64 = set
            .indices
            .iter()
            .map(|&i| pow_abs(grid.value(i), cfg.p))
            .sum();
        (lp_norm(cfg.p, s), lp_norm(cfg.p, n))
    };
    Ok(LocalFit {
        poly,
        error: snap_to_zero(error, scale),
        determined: true,
    })
}

/// `L^2(T)`-orthogonal projection onto `Pi_m` (discrete `l^2(S_T)` for
/// pixel grids).
pub fn project(f: &FunctionSource, t: &Triangle, cfg: &ApproxConfig) -> Result<LocalPolynomial> {
    let cfg = cfg.clone().with_operator(Operator::Projection);
    Ok(fit(f, &Cell::new(f, *t), &cfg)?.poly)
}

/// Lagrange interpolation on the principal lattice of `T`.
pub fn interpolate(
    f: &FunctionSource,
    t: &Triangle,
    cfg: &ApproxConfig,
) -> Result<LocalPolynomial> {
    if f.is_pixel_grid() {
        return Err(Error::Unsupported(
            "interpolation needs a continuous source",
        ));
    }
    if !t.is_valid() {
        return Err(Error::DegenerateTriangle);
    }
    interpolate_continuous(f, t, cfg.degree)
}

/// `e_T(f)_p` with the configured operator.
pub fn local_error(f: &FunctionSource, t: &Triangle, cfg: &ApproxConfig) -> Result<ErrorRecord> {
    let fit = fit(f, &Cell::new(f, *t), cfg)?;
    Ok(ErrorRecord {
        id: t.id,
        error: fit.error,
        poly: fit.poly,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadraticForm;
    use crate::pixels::PixelGrid;
    use crate::sources::{build_counterexample_interp, build_counterexample_l2, Domain};

    fn t_ref() -> Triangle {
        Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
        )
        .unwrap()
    }

    fn cfg(m: usize, p: f64, op: Operator) -> ApproxConfig {
        ApproxConfig::new(m, p, op).unwrap()
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let t = Triangle::new(
            Point2::new(0.3, -0.2),
            Point2::new(2.0, 0.4),
            Point2::new(0.9, 1.7),
        )
        .unwrap();
        let f = FunctionSource::analytic(Domain::unbounded(), |x, y| {
            1.0 - 2.0 * x + 3.0 * y + 0.5 * x * x - x * y
        });
        let c = cfg(2, 2.0, Operator::Projection);
        let p = project(&f, &t, &c).unwrap();
        for (x, y) in [(0.5, 0.3), (1.2, 0.6), (1.0, 1.0)] {
            assert!((p.eval(x, y) - f.value(x, y)).abs() < 1e-12);
        }
        assert!(local_error(&f, &t, &c).unwrap().error < 1e-12);
        for p_exp in [1.0, 3.0, f64::INFINITY] {
            assert!(local_error(&f, &t, &c.clone().with_p(p_exp)).unwrap().error < 1e-11);
        }
    }

    #[test]
    fn interpolation_nodes_and_linear_reproduction() {
        let t = t_ref();
        assert_eq!(interpolation_nodes(&t, 0), vec![t.barycenter()]);
        assert_eq!(interpolation_nodes(&t, 2).len(), 6);
        let f = FunctionSource::analytic(Domain::unbounded(), |x, y| 2.0 + x - 4.0 * y);
        let p = interpolate(&f, &t, &cfg(1, 2.0, Operator::Interpolation)).unwrap();
        assert!((p.eval(0.7, 0.2) - f.value(0.7, 0.2)).abs() < 1e-13);
    }

    #[test]
    fn interp_counterexample_is_invisible() {
        let f = build_counterexample_interp(1).unwrap();
        let c = cfg(1, 2.0, Operator::Interpolation);
        let p = interpolate(&f, &t_ref(), &c).unwrap();
        assert!(p.coeffs.iter().all(|v| v.abs() < 1e-14));
        for e in Edge::ALL {
            for child in t_ref().bisect(e) {
                if e == Edge::B {
                    let p = interpolate(&f, &child, &c).unwrap();
                    assert!(p.coeffs.iter().all(|v| v.abs() < 1e-14));
                }
            }
        }
        let f2 = build_counterexample_interp(2).unwrap();
        let p = interpolate(&f2, &t_ref(), &cfg(2, 2.0, Operator::Interpolation)).unwrap();
        assert!(p.coeffs.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn l2_counterexample_projects_to_zero() {
        let f = build_counterexample_l2();
        let c = cfg(1, 2.0, Operator::Projection);
        let tris = [
            t_ref(),
            Triangle::new(
                Point2::new(0.0, 0.0),
                Point2::new(0.5, 0.3),
                Point2::new(1.0, 1.0),
            )
            .unwrap(),
            Triangle::new(
                Point2::new(0.0, 0.2),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 0.9),
            )
            .unwrap(),
            Triangle::new(
                Point2::new(0.5, 0.0),
                Point2::new(1.0, 0.4),
                Point2::new(1.0, 1.0),
            )
            .unwrap(),
        ];
        for t in tris {
            let p = project(&f, &t, &c).unwrap();
            assert!(p.coeffs.iter().all(|v| v.abs() < 1e-12), "{:?}", p.coeffs);
        }
    }

    #[test]
    fn x_squared_projection_matches_oracle() {
        // oracle: normal equations in the plain basis {1, x, y} assembled
        // with an independent order-12 collapsed rule
        let t = t_ref();
        let rule = TriangleRule::collapsed(7);
        let basis = |x: f64, y: f64| [1.0, x, y];
        let mut g = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for i in 0..3 {
            b[i] = rule.integrate(&t, |x, y| x * x * basis(x, y)[i]);
            for j in 0..3 {
                g[i][j] = rule.integrate(&t, |x, y| basis(x, y)[i] * basis(x, y)[j]);
            }
        }
        let gm = nalgebra::Matrix3::from_fn(|i, j| g[i][j]);
        let expected = gm
            .lu()
            .solve(&nalgebra::Vector3::from_row_slice(&b))
            .unwrap();

        let f = FunctionSource::quadratic(QuadraticForm::new(1.0, 0.0, 0.0));
        let p = project(&f, &t, &cfg(1, 2.0, Operator::Projection)).unwrap();
        let got = p.to_global_monomials();
        for k in 0..3 {
            assert!(
                (got[k] - expected[k]).abs() < 1e-12,
                "{got:?} vs {expected:?}"
            );
        }
    }

    #[test]
    fn constant_image_has_zero_error() {
        let g = PixelGrid::new(16, 16, vec![0.4; 256]);
        let f = FunctionSource::pixel_grid(g);
        let t = Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.3, 0.8),
        )
        .unwrap();
        for m in 0..=2 {
            let e = local_error(&f, &t, &cfg(m, 2.0, Operator::Projection)).unwrap();
            assert!(e.error < 1e-12);
        }
    }

    #[test]
    fn tiny_pixel_set_reports_zero_error() {
        let g = PixelGrid::from_fn(4, 4, |c, r| (c * r) as f64 / 9.0);
        let f = FunctionSource::pixel_grid(g);
        let t = Triangle::new(
            Point2::new(0.1, 0.1),
            Point2::new(0.2, 0.1),
            Point2::new(0.1, 0.2),
        )
        .unwrap();
        let fit = fit(&f, &Cell::new(&f, t), &ApproxConfig::default()).unwrap();
        assert_eq!(fit.error, 0.0);
        assert!(!fit.determined);
    }

    #[test]
    fn pixel_interpolation_is_unsupported() {
        let f = FunctionSource::pixel_grid(PixelGrid::new(2, 2, vec![0.0; 4]));
        assert!(interpolate(&f, &t_ref(), &ApproxConfig::default()).is_err());
    }

    #[test]
    fn invalid_config() {
        assert!(ApproxConfig::new(3, 2.0, Operator::Projection).is_err());
        assert!(ApproxConfig::new(1, 0.5, Operator::Projection).is_err());
    }
}
