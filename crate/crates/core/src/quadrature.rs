//! Quadrature on triangles.
//!
//! Order 8 uses the 16-point symmetric Gauss rule (Dunavant). Every other
//! order uses a collapsed (Duffy) tensor product of Gauss-Legendre rules,
//! exact for total degree `2n - 2` with `n` points per direction. Rules may
//! be composed on a uniform 4^s subdivision for non-smooth integrands.

use crate::geometry::Triangle;

/// A rule on the reference simplex given in barycentric coordinates; the
/// weights sum to one (fractions of the triangle area).
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess followed by Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

impl TriangleRule {
    /// A rule exact for polynomials of total degree `order`.
    pub fn of_order(order: usize) -> TriangleRule {
        if order == 8 {
            Self::dunavant8()
        } else {
            Self::collapsed(order.div_ceil(2).max(1) + 1)
        }
    }

    /// Collapsed Gauss product with `n` points per direction (degree
    /// `2n - 2` exact, accounting for the Jacobian factor).
    pub fn collapsed(n: usize) -> TriangleRule {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            let u = 0.5 * (x[i] + 1.0);
            for j in 0..n {
                let v = 0.5 * (x[j] + 1.0);
                // (u, v) in the unit square -> (s, t) = (u, v (1 - u))
                let s = u;
                let t = v * (1.0 - u);
                points.push([1.0 - s - t, s, t]);
                // area of reference simplex is 1/2; jacobian (1 - u), factor 1/4
                weights.push(0.25 * w[i] * w[j] * (1.0 - u) * 2.0);
            }
        }
        TriangleRule {
            points,
            weights,
            degree: 2 * n - 2,
        }
    }

    /// 16-point degree-8 symmetric rule.
    pub fn dunavant8() -> TriangleRule {
        let mut points = Vec::with_capacity(16);
        let mut weights = Vec::with_capacity(16);
        let third = 1.0 / 3.0;
        points.push([third, third, third]);
        weights.push(0.144_315_607_677_787);
        let orbits3 = [
            (0.459_292_588_292_723, 0.095_091_634_267_285),
            (0.170_569_307_751_760, 0.103_217_370_534_718),
            (0.050_547_228_317_031, 0.032_458_497_623_198),
        ];
        for (a, w) in orbits3 {
            let b = 1.0 - 2.0 * a;
            for p in [[b, a, a], [a, b, a], [a, a, b]] {
                points.push(p);
                weights.push(w);
            }
        }
        let (a, b, w) = (
            0.263_112_829_634_638,
            0.008_394_777_409_958,
            0.027_230_314_174_435,
        );
        let c = 1.0 - a - b;
        for p in [
            [a, b, c],
            [a, c, b],
            [b, a, c],
            [b, c, a],
            [c, a, b],
            [c, b, a],
        ] {
            points.push(p);
            weights.push(w);
        }
        // the tabulated weights are rounded to 15 digits; renormalize
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        TriangleRule {
            points,
            weights,
            degree: 8,
        }
    }

    /// Composite rule on the uniform `4^levels` subdivision of the simplex.
    pub fn subdivided(&self, levels: u32) -> TriangleRule {
        if levels == 0 {
            return self.clone();
        }
        let mut cells: Vec<[[f64; 3]; 3]> =
            vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(cells.len() * 4);
            for [p, q, r] in cells {
                let mid = |a: [f64; 3], b: [f64; 3]| {
                    [
                        0.5 * (a[0] + b[0]),
                        0.5 * (a[1] + b[1]),
                        0.5 * (a[2] + b[2]),
                    ]
                };
                let (pq, qr, rp) = (mid(p, q), mid(q, r), mid(r, p));
                next.push([p, pq, rp]);
                next.push([pq, q, qr]);
                next.push([rp, qr, r]);
                next.push([pq, qr, rp]);
            }
            cells = next;
        }
        let scale = 1.0 / cells.len() as f64;
        let mut points = Vec::with_capacity(cells.len() * self.points.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for [p, q, r] in &cells {
            for (l, w) in self.points.iter().zip(&self.weights) {
                let mut b = [0.0; 3];
                for k in 0..3 {
                    b[k] = l[0] * p[k] + l[1] * q[k] + l[2] * r[k];
                }
                points.push(b);
                weights.push(w * scale);
            }
        }
        TriangleRule {
            points,
            weights,
            degree: self.degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `int_T g`.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, t: &Triangle, mut g: F) -> f64 {
        let area = t.area();
        let mut acc = 0.0;
        for (l, w) in self.points.iter().zip(&self.weights) {
            let p = t.point_at(*l);
            acc += w * g(p.x, p.y);
        }
        acc * area
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    /// Exact integral of x^i y^j over the simplex (0,0),(1,0),(0,1):
    /// i! j! / (i + j + 2)!
    fn monomial_exact(i: u32, j: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        fact(i) * fact(j) / fact(i + j + 2)
    }

    fn unit() -> Triangle {
        Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        )
        .unwrap()
    }

    fn check_exact(rule: &TriangleRule, degree: u32) {
        let t = unit();
        for d in 0..=degree {
            for i in 0..=d {
                let j = d - i;
                let got = rule.integrate(&t, |x, y| x.powi(i as i32) * y.powi(j as i32));
                let exact = monomial_exact(i, j);
                assert!(
                    ((got - exact) / exact).abs() < 1e-12,
                    "x^{i} y^{j}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn gauss_legendre_small() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (_, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dunavant8_is_exact_to_degree_8() {
        check_exact(&TriangleRule::dunavant8(), 8);
    }

    #[test]
    fn collapsed_rules_are_exact() {
        for order in [1, 2, 3, 4, 6, 10, 12, 16] {
            let rule = TriangleRule::of_order(order);
            check_exact(&rule, order as u32);
        }
    }

    #[test]
    fn subdivided_rule_stays_exact() {
        let rule = TriangleRule::of_order(8).subdivided(2);
        assert_eq!(rule.len(), 16 * 16);
        check_exact(&rule, 8);
    }
}
