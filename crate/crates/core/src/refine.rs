//! Refinement rules: the decision function `d_T(e, f)`, greedy bisection,
//! the theta-gated rule with newest-vertex fallback, and level-by-level
//! hierarchies `D_0, ..., D_J`.

use rayon::prelude::*;

use crate::approx::{fit, ApproxConfig, Cell, LocalFit, Operator};
use crate::error::{Error, Result};
use crate::geometry::{Edge, NodeId, Point2, Triangle};
use crate::sources::FunctionSource;
use crate::tree::{BisectionTree, SplitKind};

/// Score assigned to each candidate bisection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecisionMetric {
    /// Sum of squared child projection errors.
    L2ProjSq,
    /// Sum of p-th powers of child projection errors (max for p = inf).
    LpProjPow(f64),
    /// Sum of child `L^1` interpolation errors.
    L1Interp,
    /// Sum of p-th powers of child interpolation errors (max for p = inf).
    LpInterpPow(f64),
}

impl DecisionMetric {
    pub fn operator(self) -> Operator {
        match self {
            DecisionMetric::L2ProjSq | DecisionMetric::LpProjPow(_) => Operator::Projection,
            DecisionMetric::L1Interp | DecisionMetric::LpInterpPow(_) => Operator::Interpolation,
        }
    }

    pub fn exponent(self) -> f64 {
        match self {
            DecisionMetric::L2ProjSq => 2.0,
            DecisionMetric::L1Interp => 1.0,
            DecisionMetric::LpProjPow(p) | DecisionMetric::LpInterpPow(p) => p,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RefineRule {
    /// Always bisect along the minimizer of the decision function.
    PureGreedy,
    /// Greedy bisection when it reduces the local error by the factor
    /// `theta`, newest-vertex bisection otherwise.
    Modified(f64),
    /// Newest-vertex bisection regardless of `f`.
    NewestVertex,
}

/// How the theta test of the modified rule measures the error reduction
/// `r = (e_{T1}^p + e_{T2}^p)^{1/p} / e_T` of the best greedy split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReductionTest {
    /// Accept when `r^p <= theta`, i.e. `e_{T1}^p + e_{T2}^p <= theta e_T^p`.
    /// For `p = 2` the best split of any quadratic achieves `r^2 <= 3/5`, so
    /// `theta = 2/3` keeps greedy splits once `f` is resolved.
    #[default]
    PowerSum,
    /// Accept when `r <= theta`.
    Norm,
}

impl ReductionTest {
    /// Whether a split with norm reduction `ratio` passes (`p = inf` always
    /// compares the maxima directly).
    pub fn accepts(self, ratio: f64, theta: f64, p: f64) -> bool {
        match self {
            ReductionTest::Norm => ratio <= theta,
            _ if p.is_infinite() => ratio <= theta,
            ReductionTest::PowerSum => ratio.powf(p) <= theta,
        }
    }
}

/// Choice among edges whose decision values tie.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieRule {
    /// Bisect from the lexicographically largest vertex.
    #[default]
    LexLargest,
    /// Bisect from the lexicographically smallest vertex.
    LexSmallest,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineConfig {
    pub metric: DecisionMetric,
    pub rule: RefineRule,
    pub tie_rule: TieRule,
    pub reduction_test: ReductionTest,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            metric: DecisionMetric::L2ProjSq,
            rule: RefineRule::Modified(2.0 / 3.0),
            tie_rule: TieRule::LexLargest,
            reduction_test: ReductionTest::PowerSum,
        }
    }
}

impl RefineConfig {
    pub fn new(metric: DecisionMetric, rule: RefineRule) -> Result<Self> {
        if let RefineRule::Modified(theta) = rule {
            if !(theta > 0.0 && theta < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "theta must lie in (0, 1), got {theta}"
                )));
            }
        }
        if !(metric.exponent() >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "decision exponent must be >= 1, got {}",
                metric.exponent()
            )));
        }
        Ok(RefineConfig {
            metric,
            rule,
            ..RefineConfig::default()
        })
    }

    pub fn with_tie_rule(mut self, tie_rule: TieRule) -> Self {
        self.tie_rule = tie_rule;
        self
    }

    pub fn with_reduction_test(mut self, test: ReductionTest) -> Self {
        self.reduction_test = test;
        self
    }
}

/// Relative tolerance under which two decision values count as equal.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// One candidate bisection with its children fitted under the
/// approximation config and its decision value.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub edge: Edge,
    pub children: [Cell; 2],
    pub fits: [LocalFit; 2],
    pub score: f64,
}

/// Outcome of refining one cell.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub edge: Edge,
    pub kind: SplitKind,
    pub children: [Cell; 2],
    pub fits: [LocalFit; 2],
    /// `(e_{T1}^p + e_{T2}^p)^{1/p} / e_T` of the greedy minimizer at
    /// decision time (`None` when `e_T = 0` or the rule ignores `f`).
    pub reduction: Option<f64>,
}

fn combine(p: f64, a: f64, b: f64) -> f64 {
    if p.is_infinite() {
        a.max(b)
    } else if p == 2.0 {
        a * a + b * b
    } else {
        a.powf(p) + b.powf(p)
    }
}

fn combined_norm(p: f64, a: f64, b: f64) -> f64 {
    if p.is_infinite() {
        a.max(b)
    } else if p == 2.0 {
        a.hypot(b)
    } else {
        (a.powf(p) + b.powf(p)).powf(1.0 / p)
    }
}

fn uses_same_fit(metric: DecisionMetric, acfg: &ApproxConfig) -> bool {
    metric.operator() == acfg.operator && metric.exponent() == acfg.p
}

fn candidate(
    f: &FunctionSource,
    cell: &Cell,
    edge: Edge,
    acfg: &ApproxConfig,
    mcfg: Option<&ApproxConfig>,
) -> Result<Candidate> {
    let children = cell.children(f, edge);
    let fits = [fit(f, &children[0], acfg)?, fit(f, &children[1], acfg)?];
    let score = match mcfg {
        None => combine(acfg.p, fits[0].error, fits[1].error),
        Some(m) => {
            let e1 = fit(f, &children[0], m)?.error;
            let e2 = fit(f, &children[1], m)?.error;
            combine(m.p, e1, e2)
        }
    };
    Ok(Candidate {
        edge,
        children,
        fits,
        score,
    })
}

/// Pixel sets above this size evaluate the three candidates in parallel.
const PARALLEL_PIXELS: usize = 4096;

/// The three candidate bisections of `cell`, in the order a, b, c.
pub fn candidates(
    f: &FunctionSource,
    cell: &Cell,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
) -> Result<Vec<Candidate>> {
    let metric_cfg = if uses_same_fit(rcfg.metric, acfg) {
        None
    } else {
        Some(
            acfg.clone()
                .with_operator(rcfg.metric.operator())
                .with_p(rcfg.metric.exponent()),
        )
    };
    let mcfg = metric_cfg.as_ref();
    let big = cell
        .pixels
        .as_ref()
        .is_some_and(|s| s.len() > PARALLEL_PIXELS);
    if big {
        Edge::ALL
            .par_iter()
            .map(|&e| candidate(f, cell, e, acfg, mcfg))
            .collect()
    } else {
        Edge::ALL
            .iter()
            .map(|&e| candidate(f, cell, e, acfg, mcfg))
            .collect()
    }
}

/// Index of the minimizing candidate with the tie rule applied.
pub fn select(cands: &[Candidate], t: &Triangle, tie_rule: TieRule) -> usize {
    let min = cands.iter().map(|c| c.score).fold(f64::INFINITY, f64::min);
    let max = cands.iter().map(|c| c.score).fold(0.0, f64::max);
    let tol = TIE_TOLERANCE * max;
    let mut best: Option<(usize, Point2)> = None;
    for (i, c) in cands.iter().enumerate() {
        if c.score > min + tol {
            continue;
        }
        let v = t.vertices[c.edge.opposite_vertex()];
        let better = match best {
            None => true,
            Some((_, w)) => match tie_rule {
                TieRule::LexLargest => v.lex_cmp(&w).is_gt(),
                TieRule::LexSmallest => v.lex_cmp(&w).is_lt(),
            },
        };
        if better {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i).unwrap_or(0)
}

/// Edge minimizing the decision function on `t`.
pub fn decide(
    f: &FunctionSource,
    t: &Triangle,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
) -> Result<Edge> {
    let cell = Cell::new(f, *t);
    let cands = candidates(f, &cell, acfg, rcfg)?;
    Ok(cands[select(&cands, t, rcfg.tie_rule)].edge)
}

/// Refines `cell`, whose own local error is `parent_error`.
pub fn refine_cell(
    f: &FunctionSource,
    cell: &Cell,
    parent_error: f64,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
) -> Result<Refinement> {
    let t = &cell.triangle;
    if rcfg.rule == RefineRule::NewestVertex {
        let edge = t.newest_vertex_edge();
        let children = cell.children(f, edge);
        let fits = [fit(f, &children[0], acfg)?, fit(f, &children[1], acfg)?];
        return Ok(Refinement {
            edge,
            kind: SplitKind::Newest,
            children,
            fits,
            reduction: None,
        });
    }
    let mut cands = candidates(f, cell, acfg, rcfg)?;
    let best = select(&cands, t, rcfg.tie_rule);
    let after = combined_norm(acfg.p, cands[best].fits[0].error, cands[best].fits[1].error);
    let reduction = (parent_error > 0.0).then(|| after / parent_error);
    let greedy = match (rcfg.rule, reduction) {
        (RefineRule::Modified(theta), Some(r)) => rcfg.reduction_test.accepts(r, theta, acfg.p),
        _ => true,
    };
    let pick = if greedy {
        best
    } else {
        let e = t.newest_vertex_edge();
        cands
            .iter()
            .position(|c| c.edge == e)
            .expect("all edges are candidates")
    };
    let c = cands.swap_remove(pick);
    Ok(Refinement {
        edge: c.edge,
        kind: if greedy {
            SplitKind::Greedy
        } else {
            SplitKind::Newest
        },
        children: c.children,
        fits: c.fits,
        reduction,
    })
}

/// Bisects `t` once according to the refinement rule.
pub fn refine_once(
    f: &FunctionSource,
    t: &Triangle,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
) -> Result<(Triangle, Triangle, SplitKind)> {
    let cell = Cell::new(f, *t);
    let parent = fit(f, &cell, acfg)?;
    let r = refine_cell(f, &cell, parent.error, acfg, rcfg)?;
    let [a, b] = r.children;
    Ok((a.triangle, b.triangle, r.kind))
}

/// Nested triangulations `D_0, ..., D_J` stored in one bisection tree.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub tree: BisectionTree,
    pub levels: Vec<Vec<NodeId>>,
}

impl Hierarchy {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, j: usize) -> impl Iterator<Item = &Triangle> + '_ {
        self.levels[j]
            .iter()
            .map(|&id| &self.tree.node(id).triangle)
    }

    /// `||f - P_j f||` aggregated over `D_j`.
    pub fn level_error(&self, j: usize, p: f64) -> f64 {
        crate::tree::aggregate(p, self.levels[j].iter().map(|&id| self.tree.node(id).error))
    }

    pub fn max_error(&self, j: usize) -> f64 {
        self.levels[j]
            .iter()
            .map(|&id| self.tree.node(id).error)
            .fold(0.0, f64::max)
    }
}

/// Refines every triangle of every level, `J` times.
pub fn build_hierarchy(
    f: &FunctionSource,
    d0: &[Triangle],
    levels: usize,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
) -> Result<Hierarchy> {
    let mut tree = BisectionTree::with_errors(f, d0, acfg)?;
    let mut all = vec![tree.roots().to_vec()];
    for _ in 0..levels {
        let current = all.last().expect("level 0 exists");
        let work: Vec<(NodeId, Cell, f64)> = current
            .iter()
            .map(|&id| (id, tree.cell(id), tree.node(id).error))
            .collect();
        let refinements: Vec<Result<Refinement>> = work
            .par_iter()
            .map(|(_, cell, e)| refine_cell(f, cell, *e, acfg, rcfg))
            .collect();
        let mut next = Vec::with_capacity(current.len() * 2);
        for ((id, _, _), r) in work.into_iter().zip(refinements) {
            let [a, b] = tree.split(id, r?);
            next.push(a);
            next.push(b);
        }
        all.push(next);
    }
    Ok(Hierarchy { tree, levels: all })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadraticForm;
    use crate::sources::{build_counterexample_l2, Domain};

    fn t_ref() -> Triangle {
        Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn zero_function_ties_are_lexicographic() {
        let f = FunctionSource::analytic(Domain::unbounded(), |_, _| 0.0);
        let acfg = ApproxConfig::default();
        let mut rcfg = RefineConfig::default();
        let t = t_ref();
        // largest vertex (1,1) is v2, opposite edge A
        assert_eq!(decide(&f, &t, &acfg, &rcfg).unwrap(), Edge::A);
        rcfg.tie_rule = TieRule::LexSmallest;
        assert_eq!(decide(&f, &t, &acfg, &rcfg).unwrap(), Edge::B);
    }

    #[test]
    fn counterexample_decisions_all_equal() {
        let f = build_counterexample_l2();
        let acfg = ApproxConfig::default();
        let cands =
            candidates(&f, &Cell::new(&f, t_ref()), &acfg, &RefineConfig::default()).unwrap();
        let s0 = cands[0].score;
        for c in &cands {
            assert!((c.score - s0).abs() <= 1e-12 * s0);
            for fit in &c.fits {
                assert!(fit.poly.coeffs.iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn modified_rule_falls_back_on_counterexample() {
        let f = build_counterexample_l2();
        let acfg = ApproxConfig::default();
        let rcfg = RefineConfig::default();
        let (_, _, kind) = refine_once(&f, &t_ref(), &acfg, &rcfg).unwrap();
        assert_eq!(kind, SplitKind::Newest);
    }

    #[test]
    fn modified_rule_is_greedy_on_polynomials_and_convex_forms() {
        let acfg = ApproxConfig::default();
        let rcfg = RefineConfig::default();
        let lin = FunctionSource::analytic(Domain::unbounded(), |x, y| x - 2.0 * y);
        assert_eq!(
            refine_once(&lin, &t_ref(), &acfg, &rcfg).unwrap().2,
            SplitKind::Greedy
        );
        let q = FunctionSource::quadratic(QuadraticForm::new(1.0, 0.0, 1.0));
        let small = Triangle::new(
            Point2::new(0.2, 0.1),
            Point2::new(0.25, 0.1),
            Point2::new(0.22, 0.14),
        )
        .unwrap();
        assert_eq!(
            refine_once(&q, &small, &acfg, &rcfg).unwrap().2,
            SplitKind::Greedy
        );
    }

    #[test]
    fn hierarchy_level_counts() {
        let f = FunctionSource::analytic(Domain::unit_square(), |_, _| 0.0);
        let p = |x, y| Point2::new(x, y);
        let d0 = [
            Triangle::root(0, p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)).unwrap(),
            Triangle::root(1, p(0.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)).unwrap(),
        ];
        let acfg = ApproxConfig::default();
        let h0 = build_hierarchy(&f, &d0, 0, &acfg, &RefineConfig::default()).unwrap();
        assert_eq!(h0.depth(), 0);
        assert_eq!(h0.levels[0].len(), 2);
        let h = build_hierarchy(&f, &d0, 3, &acfg, &RefineConfig::default()).unwrap();
        assert_eq!(h.levels[3].len(), 16);
        for j in 0..=3 {
            let area: f64 = h.level(j).map(|t| t.area()).sum();
            assert!((area - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_theta() {
        assert!(RefineConfig::new(DecisionMetric::L2ProjSq, RefineRule::Modified(1.0)).is_err());
        assert!(RefineConfig::new(DecisionMetric::L2ProjSq, RefineRule::Modified(0.0)).is_err());
        assert!(RefineConfig::new(DecisionMetric::LpProjPow(0.5), RefineRule::PureGreedy).is_err());
    }
}
