//! Triangle primitives: vertices, edge vectors, bisection, areas, diameters
//! and the anisotropic shape measure `rho_q`.
//!
//! Vertex and edge labelling convention used across the crate:
//!
//! * vertices are `v[0], v[1], v[2]`;
//! * edge `a = v[1] - v[0]`, `b = v[2] - v[1]`, `c = v[0] - v[2]`, so that
//!   `a + b + c = 0`;
//! * edge `a` is opposite `v[2]`, `b` is opposite `v[0]` and `c` is opposite
//!   `v[1]`.
//!
//! Bisecting along edge `e` cuts from the vertex opposite `e` to the
//! midpoint of `e`. Both children are stored as `[apex, midpoint, endpoint]`
//! so the apex and the midpoint are the shared vertices and the midpoint is
//! the newest vertex of both children.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Identifier of a triangle inside a node store.
pub type NodeId = u32;

/// A point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// A displacement in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vector2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn distance(self, other: Point2) -> f64 {
        (other - self).norm()
    }

    /// Lexicographic comparison on `(x, y)`; total for finite points.
    pub fn lex_cmp(&self, other: &Point2) -> std::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }
}

impl Vector2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vector2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn cross(self, other: Vector2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Vector2) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl Sub for Point2 {
    type Output = Vector2;
    fn sub(self, rhs: Point2) -> Vector2 {
        Vector2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Add<Vector2> for Point2 {
    type Output = Point2;
    fn add(self, rhs: Vector2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Add for Vector2 {
    type Output = Vector2;
    fn add(self, rhs: Vector2) -> Vector2 {
        Vector2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vector2 {
    type Output = Vector2;
    fn sub(self, rhs: Vector2) -> Vector2 {
        Vector2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vector2 {
    type Output = Vector2;
    fn neg(self) -> Vector2 {
        Vector2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vector2 {
    type Output = Vector2;
    fn mul(self, s: f64) -> Vector2 {
        Vector2::new(self.x * s, self.y * s)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// One of the three edges of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    A,
    B,
    C,
}

impl Edge {
    pub const ALL: [Edge; 3] = [Edge::A, Edge::B, Edge::C];

    /// Index of the vertex opposite this edge.
    pub fn opposite_vertex(self) -> usize {
        match self {
            Edge::A => 2,
            Edge::B => 0,
            Edge::C => 1,
        }
    }

    /// The edge lying opposite vertex `i`.
    pub fn opposite_to(i: usize) -> Edge {
        match i {
            0 => Edge::B,
            1 => Edge::C,
            2 => Edge::A,
            _ => panic!("vertex index {i} out of range"),
        }
    }

    /// Endpoints of the edge as vertex indices, in orientation order.
    pub fn endpoints(self) -> (usize, usize) {
        match self {
            Edge::A => (0, 1),
            Edge::B => (1, 2),
            Edge::C => (2, 0),
        }
    }

    /// Two-bit code used by the tree encoding (0 is reserved for "leaf").
    pub fn code(self) -> u8 {
        match self {
            Edge::A => 1,
            Edge::B => 2,
            Edge::C => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Edge> {
        match code {
            1 => Some(Edge::A),
            2 => Some(Edge::B),
            3 => Some(Edge::C),
            _ => None,
        }
    }

    pub fn label(self) -> char {
        match self {
            Edge::A => 'a',
            Edge::B => 'b',
            Edge::C => 'c',
        }
    }
}

/// A triangle together with its newest-vertex bookkeeping, id and level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub vertices: [Point2; 3],
    /// Index of the most recently created vertex.
    pub newest: usize,
    pub id: NodeId,
    pub level: u32,
}

impl Triangle {
    /// Builds a root triangle. Its newest vertex is the one opposite the
    /// longest edge, so that newest-vertex bisection of a root is
    /// longest-edge bisection.
    pub fn new(v0: Point2, v1: Point2, v2: Point2) -> Result<Triangle> {
        let vertices = [v0, v1, v2];
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut t = Triangle {
            vertices,
            newest: 0,
            id: 0,
            level: 0,
        };
        if !t.is_valid() {
            return Err(Error::DegenerateTriangle);
        }
        t.newest = t.longest_edge().opposite_vertex();
        Ok(t)
    }

    /// Same as [`Triangle::new`] but with an explicit id.
    pub fn root(id: NodeId, v0: Point2, v1: Point2, v2: Point2) -> Result<Triangle> {
        Ok(Triangle::new(v0, v1, v2)?.with_id(id))
    }

    pub fn with_id(mut self, id: NodeId) -> Triangle {
        self.id = id;
        self
    }

    pub fn signed_area(&self) -> f64 {
        let [p, q, r] = self.vertices;
        0.5 * (q - p).cross(r - p)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// False for collinear or non-finite vertices.
    pub fn is_valid(&self) -> bool {
        let scale = self.diameter();
        scale.is_finite() && scale > 0.0 && self.area() > 1e-14 * scale * scale
    }

    pub fn barycenter(&self) -> Point2 {
        let [p, q, r] = self.vertices;
        Point2::new((p.x + q.x + r.x) / 3.0, (p.y + q.y + r.y) / 3.0)
    }

    /// Edge vectors `(a, b, c)` with `a + b + c = 0`.
    pub fn edge_vectors(&self) -> (Vector2, Vector2, Vector2) {
        let [p, q, r] = self.vertices;
        (q - p, r - q, p - r)
    }

    pub fn edge_vector(&self, e: Edge) -> Vector2 {
        let (i, j) = e.endpoints();
        self.vertices[j] - self.vertices[i]
    }

    pub fn diameter(&self) -> f64 {
        let (a, b, c) = self.edge_vectors();
        a.norm().max(b.norm()).max(c.norm())
    }

    pub fn longest_edge(&self) -> Edge {
        let mut best = Edge::A;
        let mut len = self.edge_vector(Edge::A).norm();
        for e in [Edge::B, Edge::C] {
            let l = self.edge_vector(e).norm();
            if l > len {
                best = e;
                len = l;
            }
        }
        best
    }

    /// The edge opposite the newest vertex.
    pub fn newest_vertex_edge(&self) -> Edge {
        Edge::opposite_to(self.newest)
    }

    /// Splits the triangle from the vertex opposite `e` to the midpoint of
    /// `e`. Children carry id 0; the caller assigns ids.
    ///
    /// The first child holds the lexicographically smaller endpoint of `e`.
    pub fn bisect(&self, e: Edge) -> [Triangle; 2] {
        let apex = self.vertices[e.opposite_vertex()];
        let (i, j) = e.endpoints();
        let (mut p, mut q) = (self.vertices[i], self.vertices[j]);
        if q.lex_cmp(&p).is_lt() {
            std::mem::swap(&mut p, &mut q);
        }
        let mid = p.midpoint(q);
        let child = |end: Point2| Triangle {
            vertices: [apex, mid, end],
            newest: 1,
            id: 0,
            level: self.level + 1,
        };
        [child(p), child(q)]
    }

    /// Closed containment test with a relative tolerance on the barycentric
    /// coordinates.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        let [a, b, c] = self.vertices;
        let area2 = (b - a).cross(c - a);
        let l0 = (b - p).cross(c - p) / area2;
        let l1 = (c - p).cross(a - p) / area2;
        let l2 = 1.0 - l0 - l1;
        l0 >= -tol && l1 >= -tol && l2 >= -tol
    }

    /// Barycentric coordinates of `p` with respect to the vertices.
    pub fn barycentric(&self, p: Point2) -> [f64; 3] {
        let [a, b, c] = self.vertices;
        let area2 = (b - a).cross(c - a);
        let l0 = (b - p).cross(c - p) / area2;
        let l1 = (c - p).cross(a - p) / area2;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Barycentric combination `sum lambda_i v_i`.
    pub fn point_at(&self, lambda: [f64; 3]) -> Point2 {
        let [a, b, c] = self.vertices;
        Point2::new(
            lambda[0] * a.x + lambda[1] * b.x + lambda[2] * c.x,
            lambda[0] * a.y + lambda[1] * b.y + lambda[2] * c.y,
        )
    }

    /// Image of the triangle under `x -> M x + t`, ids and bookkeeping kept.
    pub fn map_affine(&self, m: [[f64; 2]; 2], t: Vector2) -> Triangle {
        let map = |p: Point2| {
            Point2::new(
                m[0][0] * p.x + m[0][1] * p.y + t.x,
                m[1][0] * p.x + m[1][1] * p.y + t.y,
            )
        };
        Triangle {
            vertices: self.vertices.map(map),
            ..*self
        }
    }
}

/// A symmetric 2x2 quadratic form `q(x, y) = q11 x^2 + 2 q12 x y + q22 y^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticForm {
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
}

impl QuadraticForm {
    pub const fn new(q11: f64, q12: f64, q22: f64) -> Self {
        QuadraticForm { q11, q12, q22 }
    }

    pub fn det(&self) -> f64 {
        self.q11 * self.q22 - self.q12 * self.q12
    }

    /// `<Q u, u>`.
    pub fn apply(&self, u: Vector2) -> f64 {
        self.q11 * u.x * u.x + 2.0 * self.q12 * u.x * u.y + self.q22 * u.y * u.y
    }

    pub fn eval(&self, p: Point2) -> f64 {
        self.apply(Vector2::new(p.x, p.y))
    }

    /// Eigenvalues `(l1, l2)` with `l1 >= l2`, and the unit eigenvector of
    /// `l1`.
    pub fn eigen(&self) -> (f64, f64, Vector2) {
        let mean = 0.5 * (self.q11 + self.q22);
        let half_diff = 0.5 * (self.q11 - self.q22);
        let r = half_diff.hypot(self.q12);
        let (l1, l2) = (mean + r, mean - r);
        let angle = 0.5 * (2.0 * self.q12).atan2(self.q11 - self.q22);
        (l1, l2, Vector2::new(angle.cos(), angle.sin()))
    }

    /// `|Q|`: same eigenvectors, absolute eigenvalues.
    pub fn abs(&self) -> QuadraticForm {
        let (l1, l2, u) = self.eigen();
        let (a1, a2) = (l1.abs(), l2.abs());
        // Q = a1 u u^T + a2 w w^T with w = u rotated by 90 degrees
        let (ux, uy) = (u.x, u.y);
        QuadraticForm {
            q11: a1 * ux * ux + a2 * uy * uy,
            q12: (a1 - a2) * ux * uy,
            q22: a1 * uy * uy + a2 * ux * ux,
        }
    }

    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let (_, l2, _) = self.eigen();
        l2 >= -tol
    }

    /// Linear form rotated by `angle` radians: `R diag R^T`.
    pub fn rotated(&self, angle: f64) -> QuadraticForm {
        let (s, c) = angle.sin_cos();
        // R Q R^T with R = [[c, -s], [s, c]]
        let (a, b, d) = (self.q11, self.q12, self.q22);
        QuadraticForm {
            q11: c * c * a - 2.0 * c * s * b + s * s * d,
            q12: c * s * (a - d) + (c * c - s * s) * b,
            q22: s * s * a + 2.0 * c * s * b + c * c * d,
        }
    }
}

/// Shape quality of `t` relative to `q`:
/// `max(|q(a)|, |q(b)|, |q(c)|) / (|T| sqrt|det Q|)`.
pub fn rho_q(t: &Triangle, q: &QuadraticForm) -> Result<f64> {
    let det = q.det();
    let (a, b, c) = t.edge_vectors();
    let num = q.apply(a).abs().max(q.apply(b).abs()).max(q.apply(c).abs());
    let scale = num.max(q.q11.abs().max(q.q22.abs()).max(q.q12.abs()));
    if det.abs() <= 1e-14 * scale * scale || det == 0.0 {
        return Err(Error::SingularForm);
    }
    Ok(num / (t.area() * det.abs().sqrt()))
}

/// `|Q|` of a quadratic form.
pub fn abs_form(q: &QuadraticForm) -> QuadraticForm {
    q.abs()
}

/// Equilateral triangle of unit side with a horizontal base starting at the
/// origin.
pub fn unit_equilateral() -> Triangle {
    Triangle::new(
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(0.5, 0.75f64.sqrt()),
    )
    .expect("equilateral triangle is valid")
}
