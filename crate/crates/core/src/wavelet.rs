//! Piecewise affine multiresolution analysis on a bisection tree (`m = 1`).
//!
//! On a triangle `T` the scaling functions are `phi_T^i = c (2 lambda_i - 1)`
//! with `c = sqrt(3 / |T|)` and `lambda_i` the barycentric coordinates: they
//! take the value `c` at `v_i` and `-c` at the two other vertices.
//!
//! For a bisected node the children are labeled `(v1, v2, v3)` =
//! (midpoint, shared apex, free endpoint), which maps to the stored child
//! vertex indices `(1, 0, 2)`. The three wavelets are
//!
//! ```text
//! psi^1 = (phi'_3 - phi''_3) / sqrt 2
//! psi^2 = (phi'_1 - phi'_2 - phi''_1 + phi''_2) / 2
//! psi^3 = (phi'_1 - phi'_3 + phi''_1 - phi''_3) / 2
//! ```
//!
//! Every internal node carries an orthonormal 6x6 two-scale matrix whose
//! rows are `phi_T^1..3, psi_T^1..3` in the basis of the six child scaling
//! functions; analysis multiplies by it and synthesis by its transpose.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::approx::{split_at_breakline, ApproxConfig, LocalPolynomial};
use crate::error::{Error, Result};
use crate::geometry::{NodeId, Point2, Triangle};
use crate::quadrature::TriangleRule;
use crate::sources::FunctionSource;
use crate::tree::BisectionTree;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Stored child vertex index of the labels `v1, v2, v3`.
const CHILD_LABEL: [usize; 3] = [1, 0, 2];

/// Wavelets as combinations of child scaling functions in label order:
/// `[psi][child][label]`.
const PSI: [[[f64; 3]; 2]; 3] = [
    [[0.0, 0.0, SQRT_HALF], [0.0, 0.0, -SQRT_HALF]],
    [[0.5, -0.5, 0.0], [-0.5, 0.5, 0.0]],
    [[0.5, 0.0, -0.5], [0.5, 0.0, -0.5]],
];

/// Affine function with prescribed vertex values, as a local polynomial.
pub fn affine_from_vertex_values(t: &Triangle, vals: [f64; 3]) -> LocalPolynomial {
    let mut poly = LocalPolynomial::zero(1, t);
    let h = poly.scale;
    let [a, b, c] = t.vertices;
    let (e1, e2) = (b - a, c - a);
    let (r1, r2) = (vals[1] - vals[0], vals[2] - vals[0]);
    let det = e1.cross(e2);
    // gradient g with e1.g = r1, e2.g = r2
    let gx = (r1 * e2.y - r2 * e1.y) / det;
    let gy = (e1.x * r2 - e2.x * r1) / det;
    poly.coeffs[0] = (vals[0] + vals[1] + vals[2]) / 3.0;
    poly.coeffs[1] = gx * h;
    poly.coeffs[2] = gy * h;
    poly
}

/// The orthonormal affine basis of `L^2(T)` described in the module docs.
#[derive(Clone, Copy, Debug)]
pub struct ScalingBasis {
    pub triangle: Triangle,
    /// `sqrt(3 / |T|)`.
    pub amplitude: f64,
}

impl ScalingBasis {
    pub fn new(t: &Triangle) -> Result<ScalingBasis> {
        if !t.is_valid() {
            return Err(Error::DegenerateTriangle);
        }
        Ok(ScalingBasis {
            triangle: *t,
            amplitude: (3.0 / t.area()).sqrt(),
        })
    }

    pub fn eval(&self, i: usize, p: Point2) -> f64 {
        self.amplitude * (2.0 * self.triangle.barycentric(p)[i] - 1.0)
    }

    /// All three functions at once.
    pub fn eval_all(&self, p: Point2) -> [f64; 3] {
        let l = self.triangle.barycentric(p);
        l.map(|li| self.amplitude * (2.0 * li - 1.0))
    }

    pub fn vertex_values(&self, i: usize) -> [f64; 3] {
        std::array::from_fn(|k| {
            if k == i {
                self.amplitude
            } else {
                -self.amplitude
            }
        })
    }

    pub fn polynomial(&self, i: usize) -> LocalPolynomial {
        affine_from_vertex_values(&self.triangle, self.vertex_values(i))
    }

    /// Affine function `sum_i s_i phi^i`.
    pub fn combine(&self, s: [f64; 3]) -> LocalPolynomial {
        let total: f64 = s.iter().sum();
        let vals = s.map(|si| self.amplitude * (2.0 * si - total));
        affine_from_vertex_values(&self.triangle, vals)
    }
}

pub fn scaling_basis(t: &Triangle) -> Result<ScalingBasis> {
    ScalingBasis::new(t)
}

/// `int_T u v` for affine `u, v` given by their vertex values.
fn affine_inner(area: f64, u: [f64; 3], v: [f64; 3]) -> f64 {
    let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    let su: f64 = u.iter().sum();
    let sv: f64 = v.iter().sum();
    area / 12.0 * (dot + su * sv)
}

/// Scaling functions of a bisected triangle and the wavelets of its
/// two children.
#[derive(Clone, Copy, Debug)]
pub struct WaveletTriple {
    pub parent: ScalingBasis,
    pub children: [ScalingBasis; 2],
    /// Rows `phi_T^1..3, psi_T^1..3` in the child basis
    /// `(phi'_{0,1,2}, phi''_{0,1,2})` (stored vertex order).
    pub matrix: [[f64; 6]; 6],
}

impl WaveletTriple {
    /// `psi^i` restricted to child `k`.
    pub fn piece(&self, i: usize, k: usize) -> LocalPolynomial {
        let row = &self.matrix[3 + i];
        self.children[k].combine([row[3 * k], row[3 * k + 1], row[3 * k + 2]])
    }

    /// `psi^i` at a point of child `k`.
    pub fn eval_on(&self, i: usize, k: usize, p: Point2) -> f64 {
        let row = &self.matrix[3 + i];
        let phi = self.children[k].eval_all(p);
        (0..3).map(|l| row[3 * k + l] * phi[l]).sum()
    }

    /// `[s_T; d_T] = M [s'; s'']`.
    pub fn analyze(&self, s: [[f64; 3]; 2]) -> ([f64; 3], [f64; 3]) {
        let v = [s[0][0], s[0][1], s[0][2], s[1][0], s[1][1], s[1][2]];
        let out: [f64; 6] = std::array::from_fn(|r| (0..6).map(|c| self.matrix[r][c] * v[c]).sum());
        ([out[0], out[1], out[2]], [out[3], out[4], out[5]])
    }

    /// `[s'; s''] = M^T [s_T; d_T]`.
    pub fn synthesize(&self, s: [f64; 3], d: [f64; 3]) -> [[f64; 3]; 2] {
        let v = [s[0], s[1], s[2], d[0], d[1], d[2]];
        let out: [f64; 6] = std::array::from_fn(|c| (0..6).map(|r| self.matrix[r][c] * v[r]).sum());
        [[out[0], out[1], out[2]], [out[3], out[4], out[5]]]
    }
}

/// Builds the two-scale relation of `t` with its children as produced by
/// bisection: both children are `[apex, midpoint, endpoint]`, share the
/// apex and the midpoint, and their endpoints are vertices of `t` whose
/// midpoint is the shared one.
pub fn wavelet_triple(t: &Triangle, c1: &Triangle, c2: &Triangle) -> Result<WaveletTriple> {
    let same = |p: Point2, q: Point2| p.x == q.x && p.y == q.y;
    let [a1, m1, e1] = c1.vertices;
    let [a2, m2, e2] = c2.vertices;
    let labeled = same(a1, a2)
        && same(m1, m2)
        && same(m1, e1.midpoint(e2))
        && t.vertices.iter().any(|&v| same(v, a1))
        && t.vertices.iter().any(|&v| same(v, e1))
        && t.vertices.iter().any(|&v| same(v, e2));
    if !labeled {
        return Err(Error::InvalidParameter(
            "children do not follow the bisection labeling".into(),
        ));
    }
    let parent = ScalingBasis::new(t)?;
    let children = [ScalingBasis::new(c1)?, ScalingBasis::new(c2)?];
    let mut matrix = [[0.0; 6]; 6];
    for (k, child) in children.iter().enumerate() {
        let area = child.triangle.area();
        // parent scaling functions at the child's vertices
        let at: [[f64; 3]; 3] =
            std::array::from_fn(|v| parent.eval_all(child.triangle.vertices[v]));
        for j in 0..3 {
            let u = [at[0][j], at[1][j], at[2][j]];
            for l in 0..3 {
                matrix[j][3 * k + l] = affine_inner(area, u, child.vertex_values(l));
            }
        }
        for (i, psi) in PSI.iter().enumerate() {
            for (label, &w) in psi[k].iter().enumerate() {
                matrix[3 + i][3 * k + CHILD_LABEL[label]] = w;
            }
        }
    }
    Ok(WaveletTriple {
        parent,
        children,
        matrix,
    })
}

fn node_triple(tree: &BisectionTree, id: NodeId) -> Result<Option<WaveletTriple>> {
    match tree.node(id).children {
        None => Ok(None),
        Some([c1, c2]) => wavelet_triple(
            &tree.node(id).triangle,
            &tree.node(c1).triangle,
            &tree.node(c2).triangle,
        )
        .map(Some),
    }
}

/// Coefficients in the multiscale basis: scaling coefficients of the roots
/// and wavelet coefficients of the internal nodes. Missing wavelet entries
/// are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoeffMap {
    pub scaling: BTreeMap<NodeId, [f64; 3]>,
    pub wavelet: BTreeMap<NodeId, [f64; 3]>,
}

impl CoeffMap {
    /// Sum of squared coefficients, `||P_J f||_2^2` by orthonormality.
    pub fn energy(&self) -> f64 {
        self.scaling
            .values()
            .chain(self.wavelet.values())
            .flat_map(|c| c.iter())
            .map(|c| c * c)
            .sum()
    }

    /// `(node, index, value)` for every wavelet coefficient, index in `0..3`.
    pub fn wavelet_entries(&self) -> impl Iterator<Item = (NodeId, usize, f64)> + '_ {
        self.wavelet
            .iter()
            .flat_map(|(&id, c)| c.iter().enumerate().map(move |(i, &v)| (id, i, v)))
    }

    /// Number of nonzero wavelet coefficients.
    pub fn nonzero_wavelets(&self) -> usize {
        self.wavelet_entries().filter(|e| e.2 != 0.0).count()
    }

    /// Euclidean distance of the coefficient vectors, equal to the `L^2`
    /// distance of the represented functions.
    pub fn distance(&self, other: &CoeffMap) -> f64 {
        fn part(a: &BTreeMap<NodeId, [f64; 3]>, b: &BTreeMap<NodeId, [f64; 3]>) -> f64 {
            let zero = [0.0; 3];
            let mut s = 0.0;
            for id in a.keys().chain(b.keys().filter(|k| !a.contains_key(k))) {
                let (x, y) = (a.get(id).unwrap_or(&zero), b.get(id).unwrap_or(&zero));
                s += x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>();
            }
            s
        }
        (part(&self.scaling, &other.scaling) + part(&self.wavelet, &other.wavelet)).sqrt()
    }

    /// One line `id index value` per coefficient; indices 1..3 are scaling
    /// functions of a root and 4..6 wavelets of an internal node.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (&id, c) in &self.scaling {
            for (i, v) in c.iter().enumerate() {
                let _ = writeln!(out, "{id} {} {v:.16e}", i + 1);
            }
        }
        for (&id, c) in &self.wavelet {
            for (i, v) in c.iter().enumerate() {
                let _ = writeln!(out, "{id} {} {v:.16e}", i + 4);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<CoeffMap> {
        let mut map = CoeffMap::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad =
                || Error::InvalidParameter(format!("coefficient line {}: {line:?}", lineno + 1));
            let mut it = line.split_whitespace();
            let id: NodeId = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let idx: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let v: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() {
                return Err(bad());
            }
            match idx {
                1..=3 => map.scaling.entry(id).or_insert([0.0; 3])[idx - 1] = v,
                4..=6 => map.wavelet.entry(id).or_insert([0.0; 3])[idx - 4] = v,
                _ => return Err(bad()),
            }
        }
        Ok(map)
    }
}

/// `<f, phi_T^i>` for every leaf, by quadrature.
pub fn leaf_coefficients(
    f: &FunctionSource,
    tree: &BisectionTree,
    cfg: &ApproxConfig,
) -> Result<BTreeMap<NodeId, [f64; 3]>> {
    let rule = cfg.rule();
    tree.leaves()
        .par_iter()
        .map(|&id| {
            let t = &tree.node(id).triangle;
            Ok((id, scaling_coefficients(f, t, rule)?))
        })
        .collect()
}

fn scaling_coefficients(f: &FunctionSource, t: &Triangle, rule: &TriangleRule) -> Result<[f64; 3]> {
    let basis = ScalingBasis::new(t)?;
    let mut s = [0.0; 3];
    for piece in split_at_breakline(t, f.breakline_x()) {
        let area = piece.area();
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let p = piece.point_at(*l);
            let fw = f.value(p.x, p.y) * w * area;
            let phi = basis.eval_all(p);
            for i in 0..3 {
                s[i] += fw * phi[i];
            }
        }
    }
    Ok(s)
}

/// Fine-to-coarse transform of leaf scaling coefficients.
pub fn analyze(tree: &BisectionTree, leaf: &BTreeMap<NodeId, [f64; 3]>) -> Result<CoeffMap> {
    let mut scaling: Vec<Option<[f64; 3]>> = vec![None; tree.node_count()];
    for (&id, &s) in leaf {
        if id as usize >= tree.node_count() || !tree.is_leaf(id) {
            return Err(Error::InvalidParameter(format!("node {id} is not a leaf")));
        }
        scaling[id as usize] = Some(s);
    }
    let mut map = CoeffMap::default();
    // children always carry larger ids than their parent
    for id in (0..tree.node_count() as NodeId).rev() {
        if let Some(triple) = node_triple(tree, id)? {
            let [c1, c2] = tree.node(id).children.expect("internal node");
            let missing =
                |c: NodeId| Error::InvalidParameter(format!("no coefficients for node {c}"));
            let s1 = scaling[c1 as usize].ok_or_else(|| missing(c1))?;
            let s2 = scaling[c2 as usize].ok_or_else(|| missing(c2))?;
            let (s, d) = triple.analyze([s1, s2]);
            scaling[id as usize] = Some(s);
            map.wavelet.insert(id, d);
        }
    }
    for &r in tree.roots() {
        let s = scaling[r as usize]
            .ok_or_else(|| Error::InvalidParameter(format!("no coefficients for root {r}")))?;
        map.scaling.insert(r, s);
    }
    Ok(map)
}

/// Coefficients of `P_J f`, `J` being the leaves of `tree`.
pub fn decompose(f: &FunctionSource, tree: &BisectionTree, cfg: &ApproxConfig) -> Result<CoeffMap> {
    analyze(tree, &leaf_coefficients(f, tree, cfg)?)
}

/// Coarse-to-fine transform back to leaf scaling coefficients.
pub fn synthesize(coeffs: &CoeffMap, tree: &BisectionTree) -> Result<BTreeMap<NodeId, [f64; 3]>> {
    for &id in coeffs.wavelet.keys() {
        if id as usize >= tree.node_count() || tree.is_leaf(id) {
            return Err(Error::InvalidParameter(format!(
                "wavelet coefficient at node {id}, which is not an internal node"
            )));
        }
    }
    for &id in coeffs.scaling.keys() {
        if !tree.roots().contains(&id) {
            return Err(Error::InvalidParameter(format!(
                "scaling coefficient at node {id}, which is not a root"
            )));
        }
    }
    let mut scaling: Vec<[f64; 3]> = vec![[0.0; 3]; tree.node_count()];
    for &r in tree.roots() {
        scaling[r as usize] = coeffs.scaling.get(&r).copied().unwrap_or([0.0; 3]);
    }
    let mut out = BTreeMap::new();
    for id in 0..tree.node_count() as NodeId {
        match node_triple(tree, id)? {
            Some(triple) => {
                let d = coeffs.wavelet.get(&id).copied().unwrap_or([0.0; 3]);
                let [c1, c2] = tree.node(id).children.expect("internal node");
                let [s1, s2] = triple.synthesize(scaling[id as usize], d);
                scaling[c1 as usize] = s1;
                scaling[c2 as usize] = s2;
            }
            None => {
                out.insert(id, scaling[id as usize]);
            }
        }
    }
    Ok(out)
}

/// The function represented by `coeffs` as one affine piece per leaf.
pub fn reconstruct(
    coeffs: &CoeffMap,
    tree: &BisectionTree,
) -> Result<Vec<(NodeId, LocalPolynomial)>> {
    synthesize(coeffs, tree)?
        .into_iter()
        .map(|(id, s)| Ok((id, ScalingBasis::new(&tree.node(id).triangle)?.combine(s))))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdMode {
    /// Keep `|f_lambda| >= eps`.
    Plain,
    /// Keep `||f_lambda psi_lambda||_{L^p} >= eps`.
    NormWeighted(f64),
}

/// `||psi||_{L^p}` of one wavelet, by quadrature on the two children
/// (exact at the vertices for `p = inf` since `psi` is piecewise affine).
pub fn wavelet_norm(triple: &WaveletTriple, i: usize, p: f64) -> f64 {
    if p == 2.0 {
        return 1.0;
    }
    if p.is_infinite() {
        return (0..2)
            .flat_map(|k| triple.children[k].triangle.vertices.map(move |v| (k, v)))
            .map(|(k, v)| triple.eval_on(i, k, v).abs())
            .fold(0.0, f64::max);
    }
    let rule = TriangleRule::of_order(8).subdivided(2);
    let sum: f64 = (0..2)
        .map(|k| {
            rule.integrate(&triple.children[k].triangle, |x, y| {
                triple.eval_on(i, k, Point2::new(x, y)).abs().powf(p)
            })
        })
        .sum();
    sum.powf(1.0 / p)
}

/// Drops the wavelet coefficients below `eps`; root scaling coefficients are
/// always kept.
pub fn threshold(
    coeffs: &CoeffMap,
    tree: &BisectionTree,
    eps: f64,
    mode: ThresholdMode,
) -> Result<CoeffMap> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {eps} must be >= 0"
        )));
    }
    let mut out = CoeffMap {
        scaling: coeffs.scaling.clone(),
        wavelet: BTreeMap::new(),
    };
    for (&id, c) in &coeffs.wavelet {
        let weights = match mode {
            ThresholdMode::Plain | ThresholdMode::NormWeighted(2.0) => [1.0; 3],
            ThresholdMode::NormWeighted(p) => {
                let triple = node_triple(tree, id)?.ok_or_else(|| {
                    Error::InvalidParameter(format!("node {id} is not an internal node"))
                })?;
                std::array::from_fn(|i| wavelet_norm(&triple, i, p))
            }
        };
        let kept: [f64; 3] = std::array::from_fn(|i| {
            if c[i].abs() * weights[i] >= eps {
                c[i]
            } else {
                0.0
            }
        });
        if kept.iter().any(|&v| v != 0.0) {
            out.wavelet.insert(id, kept);
        }
    }
    Ok(out)
}

/// Keeps the `n` wavelet coefficients of largest magnitude (ties broken by
/// node id, then index) and all root scaling coefficients.
pub fn best_n_term(coeffs: &CoeffMap, n: usize) -> CoeffMap {
    let mut entries: Vec<(NodeId, usize, f64)> = coeffs.wavelet_entries().collect();
    entries.sort_by(|a, b| {
        b.2.abs()
            .total_cmp(&a.2.abs())
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    let mut out = CoeffMap {
        scaling: coeffs.scaling.clone(),
        wavelet: BTreeMap::new(),
    };
    for &(id, i, v) in entries.iter().take(n) {
        out.wavelet.entry(id).or_insert([0.0; 3])[i] = v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::unit_square_d0;
    use crate::geometry::Edge;
    use crate::refine::{build_hierarchy, RefineConfig};
    use crate::sources::Domain;

    fn t_ref() -> Triangle {
        Triangle::root(
            0,
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn vertex_values_on_reference() {
        let b = scaling_basis(&t_ref()).unwrap();
        let c = 3f64.sqrt() * 2f64.sqrt();
        assert!((b.eval(0, Point2::new(0.0, 0.0)) - c).abs() < 1e-14);
        assert!((b.eval(0, Point2::new(1.0, 0.0)) + c).abs() < 1e-14);
        let poly = b.polynomial(2);
        assert!((poly.eval(0.0, 1.0) - c).abs() < 1e-13);
        assert!((poly.eval(0.5, 0.0) + c).abs() < 1e-13);
    }

    #[test]
    fn two_scale_matrix_is_orthogonal() {
        let t = t_ref();
        for e in Edge::ALL {
            let [c1, c2] = t.bisect(e);
            let w = wavelet_triple(&t, &c1, &c2).unwrap();
            for r in 0..6 {
                for s in 0..6 {
                    let dot: f64 = (0..6).map(|k| w.matrix[r][k] * w.matrix[s][k]).sum();
                    let want = if r == s { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12, "{e:?} {r} {s} {dot}");
                }
            }
        }
    }

    #[test]
    fn swapped_children_are_rejected() {
        let t = t_ref();
        let [c1, c2] = t.bisect(Edge::A);
        let bad = Triangle::new(c1.vertices[1], c1.vertices[0], c1.vertices[2]).unwrap();
        assert!(wavelet_triple(&t, &bad, &c2).is_err());
    }

    #[test]
    fn affine_function_has_no_details() {
        let f = FunctionSource::analytic(Domain::unit_square(), |x, y| 2.0 - 3.0 * x + 0.5 * y);
        let cfg = ApproxConfig::default();
        let h = build_hierarchy(&f, &unit_square_d0(), 5, &cfg, &RefineConfig::default()).unwrap();
        let c = decompose(&f, &h.tree, &cfg).unwrap();
        assert!(c.wavelet_entries().all(|e| e.2.abs() < 1e-10));
    }

    #[test]
    fn roundtrip_and_text_format() {
        let f = FunctionSource::analytic(Domain::unit_square(), |x, y| (3.0 * x).sin() * y * y);
        let cfg = ApproxConfig::default();
        let h = build_hierarchy(&f, &unit_square_d0(), 4, &cfg, &RefineConfig::default()).unwrap();
        let c = decompose(&f, &h.tree, &cfg).unwrap();
        let leaf = synthesize(&c, &h.tree).unwrap();
        let again = analyze(&h.tree, &leaf).unwrap();
        assert!(c.distance(&again) < 1e-12);
        let parsed = CoeffMap::from_text(&c.to_text()).unwrap();
        assert_eq!(parsed, c);
        assert!(CoeffMap::from_text("0 7 1.0").is_err());
    }

    #[test]
    fn foreign_index_is_an_error() {
        let f = FunctionSource::analytic(Domain::unit_square(), |x, _| x);
        let cfg = ApproxConfig::default();
        let h = build_hierarchy(&f, &unit_square_d0(), 1, &cfg, &RefineConfig::default()).unwrap();
        let mut c = decompose(&f, &h.tree, &cfg).unwrap();
        c.wavelet.insert(99, [1.0, 0.0, 0.0]);
        assert!(synthesize(&c, &h.tree).is_err());
    }

    #[test]
    fn threshold_extremes() {
        let f = FunctionSource::analytic(Domain::unit_square(), |x, y| (x - 0.3).abs() + y * y);
        let cfg = ApproxConfig::default();
        let h = build_hierarchy(&f, &unit_square_d0(), 4, &cfg, &RefineConfig::default()).unwrap();
        let c = decompose(&f, &h.tree, &cfg).unwrap();
        let same = threshold(&c, &h.tree, 0.0, ThresholdMode::Plain).unwrap();
        assert!(c.distance(&same) == 0.0);
        let coarse = threshold(&c, &h.tree, 1e9, ThresholdMode::Plain).unwrap();
        assert_eq!(coarse.wavelet.len(), 0);
        assert_eq!(coarse.scaling, c.scaling);
        assert!(threshold(&c, &h.tree, -1.0, ThresholdMode::Plain).is_err());
    }

    #[test]
    fn wavelet_sup_norm_matches_vertex_scan() {
        let t = t_ref();
        let [c1, c2] = t.bisect(Edge::B);
        let w = wavelet_triple(&t, &c1, &c2).unwrap();
        // psi^1 = +-phi_3 / sqrt 2 on each child
        let amp = (3.0 / c1.area()).sqrt();
        assert!((wavelet_norm(&w, 0, f64::INFINITY) - amp * SQRT_HALF).abs() < 1e-12);
        assert!((wavelet_norm(&w, 1, 2.0) - 1.0).abs() < 1e-15);
    }
}
