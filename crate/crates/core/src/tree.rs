//! Bisection trees: node store, greedy growth driven by a max-heap of leaf
//! errors, uniform and isotropic baselines, optimal (CART) pruning, and the
//! mesh text format.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::approx::{fit, ApproxConfig, Cell, LocalPolynomial};
use crate::error::{Error, Result};
use crate::geometry::{Edge, NodeId, Point2, Triangle};
use crate::pixels::{PixelGrid, PixelSet};
use crate::refine::{refine_cell, RefineConfig, RefineRule, Refinement};
use crate::sources::FunctionSource;

/// Greedy (`B`) or newest-vertex (`N`) bisection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitKind {
    Greedy,
    Newest,
}

impl SplitKind {
    pub fn label(self) -> char {
        match self {
            SplitKind::Greedy => 'B',
            SplitKind::Newest => 'N',
        }
    }

    pub fn from_label(c: char) -> Option<SplitKind> {
        match c {
            'B' => Some(SplitKind::Greedy),
            'N' => Some(SplitKind::Newest),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub triangle: Triangle,
    pub parent: Option<NodeId>,
    pub children: Option<[NodeId; 2]>,
    pub edge: Option<Edge>,
    pub kind: Option<SplitKind>,
    /// Cached local error `e_T(f)_p`.
    pub error: f64,
    pub poly: Option<LocalPolynomial>,
    /// False for pixel cells too small to determine a polynomial.
    pub determined: bool,
    /// Error reduction factor of the greedy candidate at split time.
    pub reduction: Option<f64>,
    pixels: Option<PixelSet>,
}

impl Node {
    fn new(triangle: Triangle, parent: Option<NodeId>) -> Node {
        Node {
            triangle,
            parent,
            children: None,
            edge: None,
            kind: None,
            error: 0.0,
            poly: None,
            determined: true,
            reduction: None,
            pixels: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// One greedy step: the split leaf, its error, and the largest error among
/// the leaves left in the heap at that moment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitRecord {
    pub node: NodeId,
    pub error: f64,
    pub runner_up: f64,
}

/// Finite subtree of the infinite bisection tree, rooted at `D_0`.
///
/// Root ids are `0..N_0`; children always receive the next two ids, so a
/// parent's id is smaller than its children's.
#[derive(Clone, Debug, Default)]
pub struct BisectionTree {
    nodes: Vec<Node>,
    roots: Vec<NodeId>,
    leaves: usize,
    /// Greedy growth log.
    pub history: Vec<SplitRecord>,
    /// Set when growth stopped before the stop rule was met (all leaf
    /// errors vanished, or the leaf cap was reached).
    pub exhausted: bool,
}

impl BisectionTree {
    /// Roots only, without errors. Root ids are reassigned to `0..N_0`.
    pub fn skeleton(d0: &[Triangle]) -> Result<BisectionTree> {
        if d0.is_empty() {
            return Err(Error::InvalidParameter(
                "empty initial triangulation".into(),
            ));
        }
        let mut tree = BisectionTree::default();
        for (i, t) in d0.iter().enumerate() {
            if !t.is_valid() {
                return Err(Error::DegenerateTriangle);
            }
            let mut t = t.with_id(i as NodeId);
            t.level = 0;
            tree.nodes.push(Node::new(t, None));
            tree.roots.push(i as NodeId);
        }
        tree.leaves = d0.len();
        Ok(tree)
    }

    /// Roots with their local fits.
    pub fn with_errors(
        f: &FunctionSource,
        d0: &[Triangle],
        acfg: &ApproxConfig,
    ) -> Result<BisectionTree> {
        let mut tree = BisectionTree::skeleton(d0)?;
        let tris: Vec<Triangle> = tree.nodes.iter().map(|n| n.triangle).collect();
        let cells = Cell::roots(f, &tris);
        let fits: Vec<_> = cells.par_iter().map(|c| fit(f, c, acfg)).collect();
        for ((node, cell), fit) in tree.nodes.iter_mut().zip(cells).zip(fits) {
            let fit = fit?;
            node.error = fit.error;
            node.determined = fit.determined;
            node.poly = Some(fit.poly);
            node.pixels = cell.pixels;
        }
        Ok(tree)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    /// `N_0`.
    pub fn n0(&self) -> usize {
        self.roots.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    pub fn split_count(&self) -> usize {
        self.leaves - self.roots.len()
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.node(id).is_leaf()
    }

    /// Leaf ids in increasing order.
    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.nodes.len() as NodeId)
            .filter(|&i| self.is_leaf(i))
            .collect()
    }

    pub fn leaf_triangles(&self) -> Vec<Triangle> {
        self.nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| n.triangle)
            .collect()
    }

    pub fn depth(&self) -> u32 {
        self.nodes
            .iter()
            .map(|n| n.triangle.level)
            .max()
            .unwrap_or(0)
    }

    /// The cell of a leaf (pixel sets are released when a node is split).
    pub fn cell(&self, id: NodeId) -> Cell {
        let n = self.node(id);
        Cell {
            triangle: n.triangle,
            pixels: n.pixels.clone(),
        }
    }

    fn push_children(&mut self, id: NodeId, edge: Edge, kind: SplitKind) -> [NodeId; 2] {
        let parent = &self.nodes[id as usize];
        assert!(parent.is_leaf(), "node {id} is already split");
        let [a, b] = parent.triangle.bisect(edge);
        let ia = self.nodes.len() as NodeId;
        let ib = ia + 1;
        self.nodes.push(Node::new(a.with_id(ia), Some(id)));
        self.nodes.push(Node::new(b.with_id(ib), Some(id)));
        let parent = &mut self.nodes[id as usize];
        parent.children = Some([ia, ib]);
        parent.edge = Some(edge);
        parent.kind = Some(kind);
        parent.pixels = None;
        self.leaves += 1;
        [ia, ib]
    }

    /// Splits leaf `id` per a computed refinement, caching child fits.
    pub fn split(&mut self, id: NodeId, r: Refinement) -> [NodeId; 2] {
        let ids = self.push_children(id, r.edge, r.kind);
        self.nodes[id as usize].reduction = r.reduction;
        for ((cid, cell), fit) in ids.iter().zip(r.children).zip(r.fits) {
            let n = &mut self.nodes[*cid as usize];
            n.error = fit.error;
            n.determined = fit.determined;
            n.poly = Some(fit.poly);
            n.pixels = cell.pixels;
        }
        ids
    }

    /// Splits leaf `id` geometrically, without fitting anything.
    pub fn split_geometry(&mut self, id: NodeId, edge: Edge, kind: SplitKind) -> [NodeId; 2] {
        self.push_children(id, edge, kind)
    }

    /// Overrides the cached error of a node.
    pub fn set_error(&mut self, id: NodeId, error: f64) {
        self.nodes[id as usize].error = error;
    }

    /// Checks parent/child links, the node count identity and that the
    /// leaves of each root tile it.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.nodes.len() != 2 * self.leaves - self.roots.len() {
            return Err(format!(
                "{} nodes but {} leaves and {} roots",
                self.nodes.len(),
                self.leaves,
                self.roots.len()
            ));
        }
        let counted = self.nodes.iter().filter(|n| n.is_leaf()).count();
        if counted != self.leaves {
            return Err(format!(
                "leaf counter {} but {} leaves",
                self.leaves, counted
            ));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.triangle.id as usize != i {
                return Err(format!("node {i} carries id {}", n.triangle.id));
            }
            if let Some([a, b]) = n.children {
                for c in [a, b] {
                    let child = self.node(c);
                    if child.parent != Some(i as NodeId) {
                        return Err(format!("child {c} does not point back to {i}"));
                    }
                    if child.triangle.level != n.triangle.level + 1 {
                        return Err(format!("child {c} has wrong level"));
                    }
                }
                let sum = self.node(a).triangle.area() + self.node(b).triangle.area();
                if (sum - n.triangle.area()).abs() > 1e-12 * n.triangle.area() {
                    return Err(format!("children of {i} do not tile it"));
                }
            }
        }
        Ok(())
    }

    /// Pixel sets of the leaves, obtained by replaying the splits from the
    /// roots with the boundary tie rule.
    pub fn leaf_pixels(&self, grid: &PixelGrid) -> Vec<(NodeId, PixelSet)> {
        let roots: Vec<Triangle> = self.roots.iter().map(|&r| self.node(r).triangle).collect();
        let mut stack: Vec<(NodeId, PixelSet)> = self
            .roots
            .iter()
            .copied()
            .zip(grid.partition(&roots))
            .collect();
        let mut out = Vec::with_capacity(self.leaves);
        while let Some((id, set)) = stack.pop() {
            let n = self.node(id);
            match (n.children, n.edge) {
                (Some([a, b]), Some(e)) => {
                    let [sa, sb] = grid.split(&set, &n.triangle, e);
                    stack.push((a, sa));
                    stack.push((b, sb));
                }
                _ => out.push((id, set)),
            }
        }
        out.sort_by_key(|(id, _)| *id);
        out
    }

    /// Subtree keeping exactly the nodes flagged in `keep`, which must
    /// contain the roots and be closed under parents, with children kept in
    /// pairs. Ids are compacted preserving order.
    pub fn restrict(&self, keep: &[bool]) -> BisectionTree {
        let mut map = vec![NodeId::MAX; self.nodes.len()];
        let mut next = 0;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                map[i] = next;
                next += 1;
            }
        }
        let mut out = BisectionTree {
            roots: self.roots.iter().map(|&r| map[r as usize]).collect(),
            ..Default::default()
        };
        for (i, n) in self.nodes.iter().enumerate() {
            if !keep[i] {
                continue;
            }
            let mut m = n.clone();
            m.triangle.id = map[i];
            m.parent = n.parent.map(|p| map[p as usize]);
            match n.children {
                Some([a, b]) if keep[a as usize] => {
                    debug_assert!(keep[b as usize]);
                    m.children = Some([map[a as usize], map[b as usize]]);
                }
                _ => {
                    m.children = None;
                    m.edge = None;
                    m.kind = None;
                    m.reduction = None;
                    out.leaves += 1;
                }
            }
            out.nodes.push(m);
        }
        out
    }
}

/// `l^p` aggregation of local errors (max for `p = inf`).
pub fn aggregate(p: f64, errors: impl Iterator<Item = f64>) -> f64 {
    if p.is_infinite() {
        errors.fold(0.0, f64::max)
    } else if p == 2.0 {
        errors.map(|e| e * e).sum::<f64>().sqrt()
    } else {
        errors.map(|e| e.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// `||f - f_N||_p` from the cached leaf errors.
pub fn global_error(tree: &BisectionTree, p: f64) -> f64 {
    aggregate(
        p,
        tree.nodes.iter().filter(|n| n.is_leaf()).map(|n| n.error),
    )
}

/// When greedy growth stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// Stop once the partition has this many triangles.
    MaxLeaves(usize),
    /// Stop once every leaf error is at most the tolerance.
    LocalError(f64),
    /// Stop once `||f - f_N||_p` is at most the tolerance.
    GlobalError(f64),
}

impl StopRule {
    fn validate(self, n0: usize) -> Result<()> {
        match self {
            StopRule::MaxLeaves(n) if n < n0 => Err(Error::InvalidParameter(format!(
                "leaf budget {n} is below the {n0} initial triangles"
            ))),
            StopRule::LocalError(e) | StopRule::GlobalError(e) if !(e > 0.0) => Err(
                Error::InvalidParameter(format!("error tolerance must be positive, got {e}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Upper bound on the number of leaves for error-driven stop rules.
pub const LEAF_CAP: usize = 1 << 24;

#[derive(Clone, Copy, Debug)]
struct HeapEntry {
    error: f64,
    id: NodeId,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    /// Largest error first, then smallest id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn pow_p(p: f64, e: f64) -> f64 {
    if p == 2.0 {
        e * e
    } else {
        e.powf(p)
    }
}

/// Greedy tree algorithm: repeatedly refines the leaf with the largest
/// local error until `stop` holds.
pub fn greedy_grow(
    f: &FunctionSource,
    d0: &[Triangle],
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
    stop: StopRule,
) -> Result<BisectionTree> {
    let mut tree = BisectionTree::with_errors(f, d0, acfg)?;
    grow(&mut tree, f, acfg, rcfg, stop)?;
    Ok(tree)
}

/// Continues greedy growth of an existing tree whose leaves carry fits.
pub fn grow(
    tree: &mut BisectionTree,
    f: &FunctionSource,
    acfg: &ApproxConfig,
    rcfg: &RefineConfig,
    stop: StopRule,
) -> Result<()> {
    stop.validate(tree.n0())?;
    let p = acfg.p;
    let mut heap: BinaryHeap<HeapEntry> = tree
        .leaves()
        .into_iter()
        .map(|id| HeapEntry {
            error: tree.node(id).error,
            id,
        })
        .collect();
    let mut sum_pow: f64 = if p.is_infinite() {
        0.0
    } else {
        heap.iter().map(|h| pow_p(p, h.error)).sum()
    };
    tree.exhausted = false;
    while let Some(&top) = heap.peek() {
        let done = match stop {
            StopRule::MaxLeaves(n) => tree.leaf_count() >= n,
            StopRule::LocalError(eps) => top.error <= eps,
            StopRule::GlobalError(eps) => {
                if p.is_infinite() {
                    top.error <= eps
                } else if sum_pow.max(0.0).powf(1.0 / p) <= eps {
                    // confirm against the exact sum before stopping
                    sum_pow = tree
                        .nodes
                        .iter()
                        .filter(|n| n.is_leaf())
                        .map(|n| pow_p(p, n.error))
                        .sum();
                    sum_pow.powf(1.0 / p) <= eps
                } else {
                    false
                }
            }
        };
        if done {
            break;
        }
        if top.error <= 0.0 || tree.leaf_count() >= LEAF_CAP {
            tree.exhausted = true;
            break;
        }
        heap.pop();
        let runner_up = heap.peek().map_or(0.0, |h| h.error);
        let cell = tree.cell(top.id);
        let r = refine_cell(f, &cell, top.error, acfg, rcfg)?;
        let ids = tree.split(top.id, r);
        tree.history.push(SplitRecord {
            node: top.id,
            error: top.error,
            runner_up,
        });
        if !p.is_infinite() {
            sum_pow -= pow_p(p, top.error);
        }
        for id in ids {
            let e = tree.node(id).error;
            if !p.is_infinite() {
                sum_pow += pow_p(p, e);
            }
            heap.push(HeapEntry { error: e, id });
        }
    }
    Ok(())
}

/// Greedy growth with newest-vertex bisection only.
pub fn isotropic_baseline(
    f: &FunctionSource,
    d0: &[Triangle],
    leaves: usize,
    acfg: &ApproxConfig,
) -> Result<BisectionTree> {
    let rcfg = RefineConfig {
        rule: RefineRule::NewestVertex,
        ..RefineConfig::default()
    };
    greedy_grow(f, d0, acfg, &rcfg, StopRule::MaxLeaves(leaves))
}

/// Breadth-first newest-vertex refinement, independent of the errors.
pub fn uniform_baseline(
    f: &FunctionSource,
    d0: &[Triangle],
    leaves: usize,
    acfg: &ApproxConfig,
) -> Result<BisectionTree> {
    let mut tree = BisectionTree::with_errors(f, d0, acfg)?;
    StopRule::MaxLeaves(leaves).validate(tree.n0())?;
    let rcfg = RefineConfig {
        rule: RefineRule::NewestVertex,
        ..RefineConfig::default()
    };
    let mut queue: VecDeque<NodeId> = tree.roots().iter().copied().collect();
    while tree.leaf_count() < leaves {
        // refine a whole generation at once, in parallel, when it fits
        let room = leaves - tree.leaf_count();
        let batch: Vec<NodeId> = queue.drain(..room.min(queue.len())).collect();
        let refinements: Vec<Result<Refinement>> = batch
            .par_iter()
            .map(|&id| {
                let n = tree.node(id);
                refine_cell(f, &tree.cell(id), n.error, acfg, &rcfg)
            })
            .collect();
        for (id, r) in batch.into_iter().zip(refinements) {
            let [a, b] = tree.split(id, r?);
            queue.push_back(a);
            queue.push_back(b);
        }
    }
    Ok(tree)
}

/// Optimal pruning: the subtree with the same roots minimizing
/// `sum_leaves e_T^p + lambda * #nodes` (`max_leaves e_T + lambda * #nodes`
/// for `p = inf`). Ties go to the smaller tree.
pub fn cart_prune(tree: &BisectionTree, lambda: f64, p: f64) -> BisectionTree {
    let keep = if p.is_infinite() {
        cart_keep_sup(tree, lambda)
    } else {
        cart_keep_sum(tree, lambda, p)
    };
    tree.restrict(&keep)
}

fn cart_keep_sum(tree: &BisectionTree, lambda: f64, p: f64) -> Vec<bool> {
    let n = tree.nodes.len();
    let mut cost = vec![0.0; n];
    let mut split = vec![false; n];
    // children always have larger ids than their parent
    for i in (0..n).rev() {
        let node = &tree.nodes[i];
        let leaf_cost = pow_p(p, node.error) + lambda;
        cost[i] = leaf_cost;
        if let Some([a, b]) = node.children {
            let split_cost = lambda + cost[a as usize] + cost[b as usize];
            if split_cost < leaf_cost {
                cost[i] = split_cost;
                split[i] = true;
            }
        }
    }
    keep_from_splits(tree, &split)
}

fn keep_from_splits(tree: &BisectionTree, split: &[bool]) -> Vec<bool> {
    let mut keep = vec![false; tree.nodes.len()];
    let mut stack: Vec<NodeId> = tree.roots.clone();
    while let Some(id) = stack.pop() {
        keep[id as usize] = true;
        if split[id as usize] {
            if let Some([a, b]) = tree.node(id).children {
                stack.push(a);
                stack.push(b);
            }
        }
    }
    keep
}

/// Exact sup-norm pruning. For a threshold `tau` the smallest subtree whose
/// leaves all have error `<= tau` splits exactly the nodes whose whole
/// ancestor chain (themselves included) has error `> tau`; the optimum is
/// attained at one of these subtrees with `tau` ranging over node errors.
fn cart_keep_sup(tree: &BisectionTree, lambda: f64) -> Vec<bool> {
    let n = tree.nodes.len();
    let mut chain = vec![0.0; n];
    let mut above = vec![f64::INFINITY; n];
    for i in 0..n {
        let node = &tree.nodes[i];
        above[i] = node.parent.map_or(f64::INFINITY, |p| chain[p as usize]);
        chain[i] = above[i].min(node.error);
    }
    // feasibility: every grown leaf must sit below a node with error <= tau
    let tau_min = (0..n)
        .filter(|&i| tree.nodes[i].is_leaf())
        .map(|i| chain[i])
        .fold(0.0, f64::max);
    let mut internal: Vec<f64> = (0..n)
        .filter(|&i| !tree.nodes[i].is_leaf())
        .map(|i| chain[i])
        .collect();
    internal.sort_by(f64::total_cmp);
    let mut by_error: Vec<usize> = (0..n).collect();
    by_error.sort_by(|&a, &b| tree.nodes[a].error.total_cmp(&tree.nodes[b].error));
    let mut taus: Vec<f64> = tree
        .nodes
        .iter()
        .map(|nd| nd.error)
        .filter(|&e| e >= tau_min)
        .collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();

    // active leaves of the threshold tree: error <= tau < error above
    let mut active: BinaryHeap<(HeapKey, usize)> = BinaryHeap::new();
    let mut next = 0;
    let mut best: Option<(f64, usize, f64)> = None;
    for &tau in &taus {
        while next < n && tree.nodes[by_error[next]].error <= tau {
            let i = by_error[next];
            active.push((HeapKey(tree.nodes[i].error), i));
            next += 1;
        }
        while let Some(&(_, i)) = active.peek() {
            if above[i] <= tau {
                active.pop();
            } else {
                break;
            }
        }
        let worst = active.peek().map_or(0.0, |(k, _)| k.0);
        let splits = internal.len() - internal.partition_point(|&c| c <= tau);
        let size = tree.roots.len() + 2 * splits;
        let cost = worst + lambda * size as f64;
        let better = match best {
            None => true,
            Some((c, s, _)) => cost < c || (cost == c && size < s),
        };
        if better {
            best = Some((cost, size, tau));
        }
    }
    let tau = best.map_or(f64::INFINITY, |b| b.2);
    (0..n).map(|i| above[i] > tau).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapKey(f64);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Pruning objective of a tree as used by [`cart_prune`].
pub fn cart_objective(tree: &BisectionTree, lambda: f64, p: f64) -> f64 {
    let leaves = tree.nodes.iter().filter(|n| n.is_leaf()).map(|n| n.error);
    let fit = if p.is_infinite() {
        leaves.fold(0.0, f64::max)
    } else {
        leaves.map(|e| pow_p(p, e)).sum()
    };
    fit + lambda * tree.node_count() as f64
}

const MESH_MAGIC: &str = "atb-mesh 1";

fn fmt_point(out: &mut String, p: Point2) {
    let _ = write!(out, " {:?} {:?}", p.x, p.y);
}

/// Mesh text format: a magic line, `N0 <n0> nodes <count>`, then one line
/// per node: id, parent (`-` for roots), the three vertices, split kind and
/// edge (`-` for leaves).
pub fn write_mesh(tree: &BisectionTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MESH_MAGIC}");
    let _ = writeln!(out, "N0 {} nodes {}", tree.n0(), tree.node_count());
    for n in &tree.nodes {
        let _ = write!(out, "{}", n.triangle.id);
        match n.parent {
            Some(p) => {
                let _ = write!(out, " {p}");
            }
            None => out.push_str(" -"),
        }
        for v in n.triangle.vertices {
            fmt_point(&mut out, v);
        }
        let kind = n.kind.map_or('-', SplitKind::label);
        let edge = n.edge.map_or('-', Edge::label);
        let _ = writeln!(out, " {kind} {edge}");
    }
    out
}

/// Parses [`write_mesh`] output back into a tree skeleton. Child vertices
/// are recomputed by bisection and must match the stored ones exactly.
pub fn read_mesh(text: &str) -> Result<BisectionTree> {
    let mut lines = text.lines().enumerate();
    let perr = |line: usize, reason: &str| Error::Parse {
        line: line + 1,
        reason: reason.to_string(),
    };
    match lines.next() {
        Some((_, l)) if l.trim() == MESH_MAGIC => {}
        _ => return Err(perr(0, "missing mesh header")),
    }
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing size line"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "N0" || h[2] != "nodes" {
        return Err(perr(hl, "expected `N0 <n0> nodes <count>`"));
    }
    let n0: usize = h[1].parse().map_err(|_| perr(hl, "bad N0"))?;
    let count: usize = h[3].parse().map_err(|_| perr(hl, "bad node count"))?;
    struct Row {
        line: usize,
        parent: Option<NodeId>,
        verts: [Point2; 3],
        kind: Option<SplitKind>,
        edge: Option<Edge>,
    }
    let mut rows = Vec::with_capacity(count);
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() != 10 {
            return Err(perr(ln, "expected 10 fields"));
        }
        let id: usize = tok[0].parse().map_err(|_| perr(ln, "bad id"))?;
        if id != rows.len() {
            return Err(perr(ln, "ids must be consecutive from 0"));
        }
        let parent = match tok[1] {
            "-" => None,
            s => Some(s.parse::<NodeId>().map_err(|_| perr(ln, "bad parent"))?),
        };
        let mut c = [0.0; 6];
        for k in 0..6 {
            c[k] = tok[2 + k].parse().map_err(|_| perr(ln, "bad coordinate"))?;
        }
        let verts = [
            Point2::new(c[0], c[1]),
            Point2::new(c[2], c[3]),
            Point2::new(c[4], c[5]),
        ];
        let kind = match tok[8] {
            "-" => None,
            s => Some(
                s.chars()
                    .next()
                    .and_then(SplitKind::from_label)
                    .ok_or_else(|| perr(ln, "bad split kind"))?,
            ),
        };
        let edge = match tok[9] {
            "-" => None,
            "a" => Some(Edge::A),
            "b" => Some(Edge::B),
            "c" => Some(Edge::C),
            _ => return Err(perr(ln, "bad edge label")),
        };
        rows.push(Row {
            line: ln,
            parent,
            verts,
            kind,
            edge,
        });
    }
    if rows.len() != count {
        return Err(perr(hl, "node count does not match"));
    }
    if n0 == 0 || n0 > count || rows[..n0].iter().any(|r| r.parent.is_some()) {
        return Err(perr(hl, "the first N0 nodes must be the roots"));
    }
    let roots: Vec<Triangle> = rows[..n0]
        .iter()
        .map(|r| Triangle::new(r.verts[0], r.verts[1], r.verts[2]))
        .collect::<Result<_>>()?;
    let mut tree = BisectionTree::skeleton(&roots)?;
    // children were numbered in split order: replay the splits that way
    for c in (n0..count).step_by(2) {
        let row = &rows[c];
        let p = row
            .parent
            .ok_or_else(|| perr(row.line, "non-root node without parent"))?
            as usize;
        if p >= c {
            return Err(perr(row.line, "parent id must precede its children"));
        }
        let (e, k) = match (rows[p].edge, rows[p].kind) {
            (Some(e), Some(k)) => (e, k),
            _ => {
                return Err(perr(
                    rows[p].line,
                    "node with children lacks a split record",
                ))
            }
        };
        if !tree.is_leaf(p as NodeId) {
            return Err(perr(row.line, "node split twice"));
        }
        tree.split_geometry(p as NodeId, e, k);
    }
    if tree.node_count() != count {
        return Err(perr(hl, "odd number of non-root nodes"));
    }
    for (i, r) in rows.iter().enumerate() {
        let n = tree.node(i as NodeId);
        if n.parent != r.parent {
            return Err(perr(r.line, "parent does not match the split records"));
        }
        if n.triangle.vertices != r.verts {
            return Err(perr(
                r.line,
                "vertices differ from the recomputed bisection",
            ));
        }
        if n.is_leaf() != r.edge.is_none() || r.edge.is_some() != r.kind.is_some() {
            return Err(perr(r.line, "split record without children"));
        }
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::DecisionMetric;
    use crate::sources::Domain;

    fn square() -> Vec<Triangle> {
        let p = |x, y| Point2::new(x, y);
        vec![
            Triangle::new(p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)).unwrap(),
            Triangle::new(p(0.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)).unwrap(),
        ]
    }

    fn bump() -> FunctionSource {
        FunctionSource::analytic(Domain::unit_square(), |x, y| {
            (-(x * x + 3.0 * y * y) * 4.0).exp()
        })
    }

    #[test]
    fn max_leaves_n0_gives_roots() {
        let t = greedy_grow(
            &bump(),
            &square(),
            &ApproxConfig::default(),
            &RefineConfig::default(),
            StopRule::MaxLeaves(2),
        )
        .unwrap();
        assert_eq!(t.node_count(), 2);
        assert!(!t.exhausted);
        assert!((global_error(&t, 2.0) - t.node(0).error.hypot(t.node(1).error)).abs() < 1e-15);
    }

    #[test]
    fn growth_counts_and_heap_order() {
        let acfg = ApproxConfig::default();
        let t = greedy_grow(
            &bump(),
            &square(),
            &acfg,
            &RefineConfig::default(),
            StopRule::MaxLeaves(60),
        )
        .unwrap();
        assert_eq!(t.leaf_count(), 60);
        assert_eq!(t.history.len(), 58);
        t.check_invariants().unwrap();
        for r in &t.history {
            assert!(r.error >= r.runner_up);
        }
    }

    #[test]
    fn polynomial_source_exhausts() {
        let f = FunctionSource::analytic(Domain::unit_square(), |x, y| 1.0 + x - y);
        let t = greedy_grow(
            &f,
            &square(),
            &ApproxConfig::default(),
            &RefineConfig::default(),
            StopRule::MaxLeaves(10),
        )
        .unwrap();
        assert!(t.exhausted);
        assert_eq!(t.leaf_count(), 2);
    }

    #[test]
    fn error_stop_rules() {
        let acfg = ApproxConfig::default();
        let rcfg = RefineConfig::default();
        let t = greedy_grow(
            &bump(),
            &square(),
            &acfg,
            &rcfg,
            StopRule::GlobalError(1e-3),
        )
        .unwrap();
        assert!(global_error(&t, 2.0) <= 1e-3);
        let t = greedy_grow(&bump(), &square(), &acfg, &rcfg, StopRule::LocalError(1e-4)).unwrap();
        assert!(t.leaves().iter().all(|&i| t.node(i).error <= 1e-4));
        assert!(greedy_grow(&bump(), &square(), &acfg, &rcfg, StopRule::MaxLeaves(1)).is_err());
    }

    #[test]
    fn global_error_of_three_and_four() {
        let mut t = BisectionTree::skeleton(&square()).unwrap();
        t.nodes[0].error = 3.0;
        t.nodes[1].error = 4.0;
        assert_eq!(global_error(&t, 2.0), 5.0);
        assert_eq!(global_error(&t, f64::INFINITY), 4.0);
    }

    #[test]
    fn uniform_matches_newest_vertex_hierarchy() {
        let acfg = ApproxConfig::default();
        let u = uniform_baseline(&bump(), &square(), 32, &acfg).unwrap();
        let rcfg = RefineConfig::new(DecisionMetric::L2ProjSq, RefineRule::NewestVertex).unwrap();
        let h = crate::refine::build_hierarchy(&bump(), &square(), 4, &acfg, &rcfg).unwrap();
        let mut a: Vec<_> = u.leaf_triangles().iter().map(|t| t.vertices).collect();
        let mut b: Vec<_> = h.level(4).map(|t| t.vertices).collect();
        let key = |v: &[Point2; 3]| format!("{v:?}");
        a.sort_by_key(key);
        b.sort_by_key(key);
        assert_eq!(a, b);
    }

    #[test]
    fn cart_extremes() {
        let acfg = ApproxConfig::default();
        let t = greedy_grow(
            &bump(),
            &square(),
            &acfg,
            &RefineConfig::default(),
            StopRule::MaxLeaves(40),
        )
        .unwrap();
        for p in [2.0, f64::INFINITY] {
            let roots = cart_prune(&t, 1e9, p);
            assert_eq!(roots.node_count(), 2);
            roots.check_invariants().unwrap();
        }
        let full = cart_prune(&t, 0.0, 2.0);
        assert_eq!(full.node_count(), t.node_count());
    }

    #[test]
    fn mesh_roundtrip() {
        let acfg = ApproxConfig::default();
        let t = greedy_grow(
            &bump(),
            &square(),
            &acfg,
            &RefineConfig::default(),
            StopRule::MaxLeaves(25),
        )
        .unwrap();
        let text = write_mesh(&t);
        let back = read_mesh(&text).unwrap();
        assert_eq!(write_mesh(&back), text);
        assert!(read_mesh("atb-mesh 1\nN0 1 nodes 1\n0 - 0 0 1 0 0 x - -\n").is_err());
    }
}
