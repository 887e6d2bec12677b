//! The gadget library: clause (K4), different-colors, degree-reduction,
//! crossover, and (k-2)-color gadgets, each with a fixed planar local
//! rotation, designated crossable edges, and an enumeration oracle that
//! certifies the forced-coloring behavior instead of assuming it.
//!
//! Naming inside the different-colors gadget: terminals x, y; central square
//! a-b-c-d; p sits on the square's d-a side, q on the b-c side; r carries
//! the x stub, s the y stub. The two stub edges are forced bichromatic in
//! every valid coloring, which is what makes them safe crossing sites.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::engine::{Engine, EngineStatus, MatchTarget};
use crate::graph::{Coloring, Graph, GraphBuilder, GraphError, NodeId, Role, RotationSystem};

#[derive(Debug, Error)]
pub enum GadgetError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("edge ({0}, {1}) does not exist")]
    EdgeAbsent(u32, u32),
    #[error("edge ({0}, {1}) is not marked crossable")]
    NotCrossable(u32, u32),
    #[error("crossing edges share endpoint {0}")]
    SharedEndpoint(u32),
    #[error("degree-reduction needs degree > 3, got {0}")]
    DegreeTooSmall(usize),
    #[error("edge order does not match the node's incident edges")]
    BadEdgeOrder,
    #[error("palette size {0} invalid here")]
    BadPalette(u8),
    #[error("subgraph too large for exhaustive enumeration: {0} nodes")]
    TooLargeForExhaustive(usize),
    #[error("enumeration budget exceeded")]
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    Clause,
    DifferentColors,
    DegreeReduction(usize),
    Crossover,
    KMinus2(usize),
}

/// A gadget as data: labeled nodes, terminals in cyclic port order, edges,
/// crossable edges, the designated different-colors cut, and a local
/// rotation (when the template is planar as drawn).
#[derive(Debug, Clone)]
pub struct GadgetTemplate {
    pub kind: GadgetKind,
    pub internal: Vec<(&'static str, Role)>,
    pub terminals: Vec<&'static str>,
    pub edges: Vec<(&'static str, &'static str)>,
    pub crossable: Vec<(&'static str, &'static str)>,
    pub cut: Vec<(&'static str, &'static str)>,
    pub rotation: Option<Vec<(&'static str, Vec<&'static str>)>>,
}

impl GadgetTemplate {
    /// Instantiates the template as a standalone graph (terminals become
    /// plain nodes), returning the graph, label map, and rotation if any.
    pub fn instantiate(&self) -> (Graph, BTreeMap<&'static str, NodeId>, Option<RotationSystem>) {
        let mut b = GraphBuilder::new();
        let mut ids = BTreeMap::new();
        for (label, role) in &self.internal {
            ids.insert(*label, b.add_node(role.clone(), None));
        }
        for label in &self.terminals {
            ids.insert(*label, b.add_node(Role::Other, None));
        }
        for (u, v) in &self.edges {
            b.add_edge(ids[u], ids[v]).unwrap();
        }
        let rot = self.rotation.as_ref().map(|r| {
            let mut rs = RotationSystem::default();
            for (label, cycle) in r {
                rs.set(ids[label], cycle.iter().map(|l| ids[l]).collect());
            }
            rs
        });
        (b.seal(), ids, rot)
    }
}

/// The concrete 10-node different-colors gadget.
pub fn neq_template() -> GadgetTemplate {
    GadgetTemplate {
        kind: GadgetKind::DifferentColors,
        internal: vec![
            ("a", Role::NeqInternal),
            ("b", Role::NeqInternal),
            ("c", Role::NeqInternal),
            ("d", Role::NeqInternal),
            ("p", Role::NeqInternal),
            ("q", Role::NeqInternal),
            ("r", Role::NeqInternal),
            ("s", Role::NeqInternal),
        ],
        terminals: vec!["x", "y"],
        edges: vec![
            ("a", "b"),
            ("b", "c"),
            ("c", "d"),
            ("d", "a"),
            ("p", "a"),
            ("p", "d"),
            ("q", "b"),
            ("q", "c"),
            ("r", "p"),
            ("s", "q"),
            ("r", "s"),
            ("x", "r"),
            ("s", "y"),
        ],
        crossable: vec![("x", "r"), ("s", "y")],
        cut: vec![("x", "r")],
        rotation: Some(vec![
            ("a", vec!["b", "p", "d"]),
            ("b", vec!["q", "a", "c"]),
            ("c", vec!["q", "b", "d"]),
            ("d", vec!["c", "a", "p"]),
            ("p", vec!["a", "r", "d"]),
            ("q", vec!["s", "b", "c"]),
            ("r", vec!["p", "x", "s"]),
            ("s", vec!["y", "q", "r"]),
            ("x", vec!["r"]),
            ("y", vec!["s"]),
        ]),
    }
}

/// Clause gadget: K4 with three variable terminals and a center.
pub fn clause_template() -> GadgetTemplate {
    GadgetTemplate {
        kind: GadgetKind::Clause,
        internal: vec![],
        terminals: vec!["x", "y", "z", "w"],
        edges: vec![
            ("x", "y"),
            ("x", "z"),
            ("x", "w"),
            ("y", "z"),
            ("y", "w"),
            ("z", "w"),
        ],
        crossable: vec![],
        cut: vec![],
        rotation: Some(vec![
            ("x", vec!["y", "w", "z"]),
            ("y", vec!["z", "w", "x"]),
            ("z", vec!["x", "w", "y"]),
            ("w", vec!["x", "y", "z"]),
        ]),
    }
}

const NEQ_LABELS: [&str; 8] = ["a", "b", "c", "d", "p", "q", "r", "s"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeqNodes {
    pub a: NodeId,
    pub b: NodeId,
    pub c: NodeId,
    pub d: NodeId,
    pub p: NodeId,
    pub q: NodeId,
    pub r: NodeId,
    pub s: NodeId,
}

impl NeqNodes {
    pub fn all(&self) -> [NodeId; 8] {
        [self.a, self.b, self.c, self.d, self.p, self.q, self.r, self.s]
    }
}

/// One placed different-colors gadget. `x_end`/`y_end` are the nodes its two
/// stub edges attach to (hosts, connectors, or neighbors in a fused chain).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeqInstance {
    pub nodes: NeqNodes,
    pub x_end: NodeId,
    pub y_end: NodeId,
}

impl NeqInstance {
    pub fn crossable_edges(&self) -> [(NodeId, NodeId); 2] {
        [(self.x_end, self.nodes.r), (self.nodes.s, self.y_end)]
    }

    /// The designated single-edge different-colors cut.
    pub fn cut_edge(&self) -> (NodeId, NodeId) {
        (self.x_end, self.nodes.r)
    }

    /// Planar rotations of the eight internal nodes.
    pub fn internal_rotations(&self) -> Vec<(NodeId, Vec<NodeId>)> {
        let n = &self.nodes;
        vec![
            (n.a, vec![n.b, n.p, n.d]),
            (n.b, vec![n.q, n.a, n.c]),
            (n.c, vec![n.q, n.b, n.d]),
            (n.d, vec![n.c, n.a, n.p]),
            (n.p, vec![n.a, n.r, n.d]),
            (n.q, vec![n.s, n.b, n.c]),
            (n.r, vec![n.p, self.x_end, n.s]),
            (n.s, vec![self.y_end, n.q, n.r]),
        ]
    }
}

/// Adds a different-colors gadget between two existing nodes, raising each
/// terminal's degree by one. The stub edges are marked crossable.
pub fn connect_neq(
    b: &mut GraphBuilder,
    u: NodeId,
    v: NodeId,
    origin: &str,
) -> Result<NeqInstance, GadgetError> {
    let mut ids = [NodeId(0); 8];
    for (i, _) in NEQ_LABELS.iter().enumerate() {
        ids[i] = b.add_node(Role::NeqInternal, Some(origin.to_string()));
    }
    let [a, bb, c, d, p, q, r, s] = ids;
    for (x, y) in [
        (a, bb),
        (bb, c),
        (c, d),
        (d, a),
        (p, a),
        (p, d),
        (q, bb),
        (q, c),
        (r, p),
        (s, q),
        (r, s),
    ] {
        b.add_edge(x, y)?;
    }
    b.add_edge(u, r)?;
    b.add_edge(s, v)?;
    b.mark_crossable(u, r);
    b.mark_crossable(s, v);
    Ok(NeqInstance { nodes: NeqNodes { a, b: bb, c, d, p, q, r, s }, x_end: u, y_end: v })
}

/// Replaces an existing edge by a different-colors gadget; endpoint degrees
/// are unchanged.
pub fn splice_neq_on_edge(
    b: &mut GraphBuilder,
    edge: (NodeId, NodeId),
    origin: &str,
) -> Result<NeqInstance, GadgetError> {
    let (u, v) = edge;
    if !b.has_edge(u, v) {
        return Err(GadgetError::EdgeAbsent(u.0, v.0));
    }
    b.remove_edge(u, v)?;
    connect_neq(b, u, v, origin)
}

/// A fused chain of different-colors gadgets between two host nodes:
/// `a_end -(g1)- (g2)- ... -(gL)- b_end`, consecutive gadgets joined by a
/// direct s-to-r edge. Any length forces `a_end != b_end` and exposes
/// `L + 1` crossable stub edges.
#[derive(Debug, Clone)]
pub struct NeqChain {
    pub a_end: NodeId,
    pub b_end: NodeId,
    pub gadgets: Vec<NeqInstance>,
}

impl NeqChain {
    /// The L+1 stub edges, in positional order from `a_end` to `b_end`.
    pub fn crossable_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.gadgets.len() + 1);
        for g in &self.gadgets {
            out.push((g.x_end, g.nodes.r));
        }
        let last = self.gadgets.last().unwrap();
        out.push((last.nodes.s, last.y_end));
        out
    }
}

pub fn connect_neq_chain(
    b: &mut GraphBuilder,
    u: NodeId,
    v: NodeId,
    len: usize,
    origin: &str,
) -> Result<NeqChain, GadgetError> {
    assert!(len >= 1);
    let mut gadgets: Vec<NeqInstance> = Vec::with_capacity(len);
    let mut chain = NeqChain { a_end: u, b_end: v, gadgets: Vec::new() };
    let first = connect_neq(b, u, v, origin)?;
    gadgets.push(first);
    chain.gadgets = gadgets;
    if len > 1 {
        extend_neq_chain(b, &mut chain, len - 1, origin)?;
    }
    Ok(chain)
}

/// Appends `extra` gadgets before the chain's `b_end`.
pub fn extend_neq_chain(
    b: &mut GraphBuilder,
    chain: &mut NeqChain,
    extra: usize,
    origin: &str,
) -> Result<(), GadgetError> {
    for _ in 0..extra {
        let last_idx = chain.gadgets.len() - 1;
        let last_s = chain.gadgets[last_idx].nodes.s;
        let b_end = chain.b_end;
        b.remove_edge(last_s, b_end)?;
        let g = connect_neq(b, last_s, b_end, origin)?;
        chain.gadgets[last_idx].y_end = g.nodes.r;
        chain.gadgets.push(g);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseInstance {
    pub vars: [NodeId; 3],
    pub center: NodeId,
}

impl ClauseInstance {
    /// Tetrahedral rotation (outer triangle of variables, center inside).
    pub fn rotations(&self) -> Vec<(NodeId, Vec<NodeId>)> {
        let [x, y, z] = self.vars;
        let w = self.center;
        vec![
            (x, vec![y, w, z]),
            (y, vec![z, w, x]),
            (z, vec![x, w, y]),
            (w, vec![x, y, z]),
        ]
    }
}

/// K4 clause gadget: three variable nodes plus one center node.
pub fn build_clause_gadget(
    b: &mut GraphBuilder,
    clause_idx: usize,
    names: [&str; 3],
    origin: &str,
) -> ClauseInstance {
    let vars = [
        b.add_node(Role::Variable(names[0].to_string()), Some(origin.to_string())),
        b.add_node(Role::Variable(names[1].to_string()), Some(origin.to_string())),
        b.add_node(Role::Variable(names[2].to_string()), Some(origin.to_string())),
    ];
    let center = b.add_node(Role::ClauseCenter(clause_idx), Some(origin.to_string()));
    for i in 0..3 {
        for j in i + 1..3 {
            b.add_edge(vars[i], vars[j]).unwrap();
        }
        b.add_edge(vars[i], center).unwrap();
    }
    ClauseInstance { vars, center }
}

/// Degree-reduction record: the split path that replaced a node.
#[derive(Debug, Clone)]
pub struct DegReductionInstance {
    pub original: NodeId,
    pub splits: Vec<NodeId>,
    /// Three intermediates between consecutive splits.
    pub intermediates: Vec<[NodeId; 3]>,
    /// `(split, inherited external neighbor)` in rotation order.
    pub attachments: Vec<(NodeId, NodeId)>,
}

impl DegReductionInstance {
    /// All path nodes in path order: x1, i11, i12, i13, x2, ...
    pub fn path_nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for (i, &x) in self.splits.iter().enumerate() {
            out.push(x);
            if i + 1 < self.splits.len() {
                out.extend(self.intermediates[i]);
            }
        }
        out
    }
}

/// Splits a node of degree k > 3 into k splits joined by length-4 subpaths;
/// split i inherits the i-th edge of `order` (the node's rotation order).
pub fn apply_degree_reduction(
    b: &mut GraphBuilder,
    node: NodeId,
    order: &[NodeId],
    origin: &str,
) -> Result<DegReductionInstance, GadgetError> {
    let k = b.degree(node);
    if k <= 3 {
        return Err(GadgetError::DegreeTooSmall(k));
    }
    let actual: BTreeSet<NodeId> = b.neighbors(node).collect();
    let given: BTreeSet<NodeId> = order.iter().copied().collect();
    if order.len() != k || actual != given {
        return Err(GadgetError::BadEdgeOrder);
    }
    let crossable_before: Vec<bool> =
        order.iter().map(|&nb| b.is_crossable(node, nb)).collect();
    b.remove_node(node)?;

    let splits: Vec<NodeId> = (0..k)
        .map(|_| b.add_node(Role::DegReductionSplit, Some(origin.to_string())))
        .collect();
    let mut intermediates = Vec::with_capacity(k - 1);
    for i in 0..k - 1 {
        let trio = [
            b.add_node(Role::DegReductionPath, Some(origin.to_string())),
            b.add_node(Role::DegReductionPath, Some(origin.to_string())),
            b.add_node(Role::DegReductionPath, Some(origin.to_string())),
        ];
        b.add_edge(splits[i], trio[0])?;
        b.add_edge(trio[0], trio[1])?;
        b.add_edge(trio[1], trio[2])?;
        b.add_edge(trio[2], splits[i + 1])?;
        intermediates.push(trio);
    }
    let mut attachments = Vec::with_capacity(k);
    for (i, &nb) in order.iter().enumerate() {
        b.add_edge(splits[i], nb)?;
        if crossable_before[i] {
            b.mark_crossable(splits[i], nb);
        }
        attachments.push((splits[i], nb));
    }
    Ok(DegReductionInstance { original: node, splits, intermediates, attachments })
}

/// A placed crossover: central 4-cycle x',y',z',w' plus four different-colors
/// gadgets tying the cycle to the four outer endpoints.
#[derive(Debug, Clone)]
pub struct CrossoverInstance {
    pub x: NodeId,
    pub y: NodeId,
    pub z: NodeId,
    pub w: NodeId,
    pub xp: NodeId,
    pub yp: NodeId,
    pub zp: NodeId,
    pub wp: NodeId,
    pub gadget_xy: NeqInstance,
    pub gadget_yx: NeqInstance,
    pub gadget_zw: NeqInstance,
    pub gadget_wz: NeqInstance,
}

impl CrossoverInstance {
    pub fn new_node_count() -> usize {
        4 + 4 * 8
    }

    /// Fresh crossable cut: the outer-side stubs of the x-y' and z-w'
    /// gadgets (the combined different-colors cut).
    pub fn cut_edges(&self) -> [(NodeId, NodeId); 2] {
        [self.gadget_xy.cut_edge(), self.gadget_zw.cut_edge()]
    }

    /// Rotations for all 36 new nodes, oriented for a crossing with x west,
    /// y east, z south, w north.
    pub fn internal_rotations(&self) -> Vec<(NodeId, Vec<NodeId>)> {
        let mut out = vec![
            (self.yp, vec![self.zp, self.gadget_xy.nodes.s, self.wp]),
            (self.xp, vec![self.gadget_yx.nodes.s, self.zp, self.wp]),
            (self.zp, vec![self.gadget_wz.nodes.s, self.yp, self.xp]),
            (self.wp, vec![self.xp, self.yp, self.gadget_zw.nodes.s]),
        ];
        for g in [&self.gadget_xy, &self.gadget_yx, &self.gadget_zw, &self.gadget_wz] {
            out.extend(g.internal_rotations());
        }
        out
    }

    /// Rotation-slot updates at the four outer nodes: (node, old, new).
    pub fn terminal_slot_updates(&self) -> [(NodeId, NodeId, NodeId); 4] {
        [
            (self.x, self.y, self.gadget_xy.nodes.r),
            (self.y, self.x, self.gadget_yx.nodes.r),
            (self.z, self.w, self.gadget_zw.nodes.r),
            (self.w, self.z, self.gadget_wz.nodes.r),
        ]
    }
}

/// Replaces two crossing crossable edges `(x, y)` and `(z, w)` by a planar
/// crossover. Orientation convention: the first edge runs west-east, the
/// second south-north, in the order given.
pub fn apply_crossover(
    b: &mut GraphBuilder,
    e1: (NodeId, NodeId),
    e2: (NodeId, NodeId),
    origin: &str,
) -> Result<CrossoverInstance, GadgetError> {
    let (x, y) = e1;
    let (z, w) = e2;
    for (u, v) in [e1, e2] {
        if !b.has_edge(u, v) {
            return Err(GadgetError::EdgeAbsent(u.0, v.0));
        }
        if !b.is_crossable(u, v) {
            return Err(GadgetError::NotCrossable(u.0, v.0));
        }
    }
    for a in [x, y] {
        if a == z || a == w {
            return Err(GadgetError::SharedEndpoint(a.0));
        }
    }
    b.remove_edge(x, y)?;
    b.remove_edge(z, w)?;

    let xp = b.add_node(Role::CrossoverCycle, Some(origin.to_string()));
    let yp = b.add_node(Role::CrossoverCycle, Some(origin.to_string()));
    let zp = b.add_node(Role::CrossoverCycle, Some(origin.to_string()));
    let wp = b.add_node(Role::CrossoverCycle, Some(origin.to_string()));
    // Square cycle y'-w'-x'-z' (x' and y' diagonal, z' and w' diagonal).
    b.add_edge(yp, wp)?;
    b.add_edge(wp, xp)?;
    b.add_edge(xp, zp)?;
    b.add_edge(zp, yp)?;

    let gadget_xy = connect_neq(b, x, yp, origin)?;
    let gadget_yx = connect_neq(b, y, xp, origin)?;
    let gadget_zw = connect_neq(b, z, wp, origin)?;
    let gadget_wz = connect_neq(b, w, zp, origin)?;

    Ok(CrossoverInstance {
        x,
        y,
        z,
        w,
        xp,
        yp,
        zp,
        wp,
        gadget_xy,
        gadget_yx,
        gadget_zw,
        gadget_wz,
    })
}

#[derive(Debug, Clone)]
pub struct KMinus2Instance {
    pub path: Vec<NodeId>,
    /// Even-position nodes (1-based), the external attachment points.
    pub evens: Vec<NodeId>,
}

/// Path of 2k-4 nodes with a clique on the even positions. Forces k-2
/// pairwise-distinct colors onto the even nodes.
pub fn build_k_minus_2_gadget(
    b: &mut GraphBuilder,
    k: usize,
    origin: &str,
) -> Result<KMinus2Instance, GadgetError> {
    if k < 3 {
        return Err(GadgetError::BadPalette(k as u8));
    }
    let n = 2 * k - 4;
    let path: Vec<NodeId> = (0..n)
        .map(|_| b.add_node(Role::KColorPath, Some(origin.to_string())))
        .collect();
    for i in 0..n - 1 {
        b.add_edge(path[i], path[i + 1])?;
    }
    let evens: Vec<NodeId> = (1..n).step_by(2).map(|i| path[i]).collect();
    for i in 0..evens.len() {
        for j in i + 1..evens.len() {
            b.add_edge(evens[i], evens[j])?;
        }
    }
    Ok(KMinus2Instance { path, evens })
}

/// Per-terminal boundary condition for gadget enumeration.
#[derive(Debug, Clone, Copy, Default)]
pub struct TerminalCondition {
    pub required_color: Option<u8>,
    /// The terminal's matching partner lies outside the subgraph, so it must
    /// have zero same-colored neighbors inside.
    pub match_external: bool,
}

#[derive(Debug, Clone, Default)]
pub struct BoundaryCondition {
    pub terminals: BTreeMap<NodeId, TerminalCondition>,
}

impl BoundaryCondition {
    pub fn external(terminals: &[NodeId]) -> Self {
        let mut b = BoundaryCondition::default();
        for &t in terminals {
            b.terminals.insert(t, TerminalCondition { required_color: None, match_external: true });
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumMode {
    Exhaustive,
    Propagation,
}

pub const EXHAUSTIVE_NODE_LIMIT: usize = 26;
pub const DEFAULT_ENUM_BUDGET: u64 = 5_000_000;

/// Enumerates all colorings in which every internal node has exactly one
/// same-colored neighbor within the subgraph and every terminal meets its
/// boundary condition. Both modes return the same set; exhaustive is an
/// independent oracle, propagation scales further.
pub fn enumerate_gadget_colorings(
    g: &Graph,
    boundary: &BoundaryCondition,
    k: u8,
    mode: EnumMode,
    backtrack_limit: u64,
) -> Result<Vec<Coloring>, GadgetError> {
    if k < 1 || k > 16 {
        return Err(GadgetError::BadPalette(k));
    }
    let ids: Vec<NodeId> = g.node_ids().collect();
    let index: BTreeMap<NodeId, u32> =
        ids.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
    let adj: Vec<Vec<u32>> = ids
        .iter()
        .map(|v| g.neighbors(*v).map(|w| index[&w]).collect())
        .collect();
    let mut target = vec![MatchTarget::ExactlyOne; ids.len()];
    let mut seeds = vec![None; ids.len()];
    for (node, cond) in &boundary.terminals {
        let i = index[node] as usize;
        if cond.match_external {
            target[i] = MatchTarget::Zero;
        }
        if let Some(c) = cond.required_color {
            seeds[i] = Some(c);
        }
    }

    let raw = match mode {
        EnumMode::Propagation => {
            let result = Engine::new(&adj, k, &target, &seeds).run(usize::MAX, backtrack_limit);
            if result.status == EngineStatus::BudgetExceeded {
                return Err(GadgetError::BudgetExceeded);
            }
            let mut sols = result.solutions;
            sols.sort();
            sols
        }
        EnumMode::Exhaustive => {
            let n = ids.len();
            if n > EXHAUSTIVE_NODE_LIMIT {
                return Err(GadgetError::TooLargeForExhaustive(n));
            }
            exhaustive_enumerate(&adj, k, &target, &seeds)
        }
    };
    Ok(raw
        .iter()
        .map(|sol| {
            let mut c = Coloring::new(k);
            for (i, id) in ids.iter().enumerate() {
                c.set(*id, sol[i]);
            }
            c
        })
        .collect())
}

/// Independent oracle: plain lexicographic DFS with count pruning and full
/// leaf verification.
fn exhaustive_enumerate(
    adj: &[Vec<u32>],
    k: u8,
    target: &[MatchTarget],
    seeds: &[Option<u8>],
) -> Vec<Vec<u8>> {
    let n = adj.len();
    let want = |j: usize| match target[j] {
        MatchTarget::ExactlyOne => 1usize,
        MatchTarget::Zero => 0usize,
    };
    let mut colors = vec![0u8; n];
    let mut out = Vec::new();

    fn same_count(adj: &[Vec<u32>], colors: &[u8], j: usize, limit: usize) -> usize {
        adj[j]
            .iter()
            .filter(|&&w| (w as usize) < limit && colors[w as usize] == colors[j])
            .count()
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        n: usize,
        k: u8,
        adj: &[Vec<u32>],
        want: &dyn Fn(usize) -> usize,
        seeds: &[Option<u8>],
        colors: &mut [u8],
        out: &mut Vec<Vec<u8>>,
    ) {
        if i == n {
            if (0..n).all(|j| same_count(adj, colors, j, n) == want(j)) {
                out.push(colors.to_vec());
            }
            return;
        }
        'next: for c in 0..k {
            if let Some(s) = seeds[i] {
                if s != c {
                    continue;
                }
            }
            colors[i] = c;
            let assigned = i + 1;
            if same_count(adj, colors, i, assigned) > want(i) {
                continue 'next;
            }
            for &wn in &adj[i] {
                let wn = wn as usize;
                if wn >= assigned {
                    continue;
                }
                let s = same_count(adj, colors, wn, assigned);
                if s > want(wn) {
                    continue 'next;
                }
                if s < want(wn) && adj[wn].iter().all(|&x| (x as usize) < assigned) {
                    continue 'next;
                }
            }
            rec(i + 1, n, k, adj, want, seeds, colors, out);
        }
    }

    if n == 0 {
        return vec![vec![]];
    }
    rec(0, n, k, adj, &want, seeds, &mut colors, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{check_regular, embedding_genus, is_biconnected};

    #[test]
    fn neq_template_shape() {
        let t = neq_template();
        let (g, ids, rot) = t.instantiate();
        assert_eq!(g.node_count(), 10);
        assert_eq!(g.edge_count(), 13);
        // Internal nodes have degree 3, terminals degree 1.
        for (label, _) in &t.internal {
            assert_eq!(g.degree(ids[label]), 3, "{label}");
        }
        for label in &t.terminals {
            assert_eq!(g.degree(ids[label]), 1, "{label}");
        }
        let (faces, chi) = embedding_genus(&g, &rot.unwrap()).unwrap();
        assert_eq!(chi, 2);
        assert_eq!(faces, 5);
    }

    #[test]
    fn clause_template_planar() {
        let (g, _, rot) = clause_template().instantiate();
        let (faces, chi) = embedding_genus(&g, &rot.unwrap()).unwrap();
        assert_eq!(chi, 2);
        assert_eq!(faces, 4);
    }

    #[test]
    fn splice_preserves_structure() {
        // Splice on a K4 edge: 12 nodes, 18 edges, all degrees 3,
        // biconnectivity preserved.
        let mut b = GraphBuilder::new();
        let inst = build_clause_gadget(&mut b, 0, ["x", "y", "z"], "t");
        let [x, y, _] = inst.vars;
        let before_deg_x = b.degree(x);
        splice_neq_on_edge(&mut b, (x, y), "t").unwrap();
        assert_eq!(b.degree(x), before_deg_x);
        let g = b.seal();
        assert_eq!(g.node_count(), 12);
        assert_eq!(g.edge_count(), 18);
        assert!(check_regular(&g, 3));
        let (ok, _) = is_biconnected(&g);
        assert!(ok);
    }

    #[test]
    fn chain_crossable_count() {
        let mut b = GraphBuilder::new();
        let u = b.add_node(Role::Other, None);
        let v = b.add_node(Role::Other, None);
        let mut chain = connect_neq_chain(&mut b, u, v, 1, "t").unwrap();
        assert_eq!(chain.crossable_edges().len(), 2);
        extend_neq_chain(&mut b, &mut chain, 2, "t").unwrap();
        assert_eq!(chain.gadgets.len(), 3);
        let edges = chain.crossable_edges();
        assert_eq!(edges.len(), 4);
        for (a, c) in &edges {
            assert!(b.has_edge(*a, *c));
            assert!(b.is_crossable(*a, *c));
        }
        // All internal nodes are 3-regular; u, v have degree 1.
        let g = b.seal();
        assert_eq!(g.node_count(), 2 + 3 * 8);
        for id in g.node_ids() {
            let d = g.degree(id);
            assert!(d == 3 || (d == 1 && (id == u || id == v)));
        }
    }

    #[test]
    fn degree_reduction_counts() {
        for (k, want_nodes, want_path_edges) in [(4usize, 13usize, 12usize), (5, 17, 16)] {
            let mut b = GraphBuilder::new();
            let center = b.add_node(Role::Variable("v".into()), None);
            let nbrs: Vec<NodeId> =
                (0..k).map(|_| b.add_node(Role::Other, None)).collect();
            for &nb in &nbrs {
                b.add_edge(center, nb).unwrap();
            }
            let inst = apply_degree_reduction(&mut b, center, &nbrs, "t").unwrap();
            assert_eq!(inst.path_nodes().len(), want_nodes);
            assert_eq!(inst.splits.len(), k);
            let g = b.seal();
            // k pendant nodes + path
            assert_eq!(g.node_count(), k + want_nodes);
            assert_eq!(g.edge_count(), want_path_edges + k);
            for (i, (split, ext)) in inst.attachments.iter().enumerate() {
                assert_eq!(*ext, nbrs[i]);
                assert!(g.has_edge(*split, *ext));
            }
        }
    }

    #[test]
    fn degree_reduction_rejects_small_degree() {
        let mut b = GraphBuilder::new();
        let center = b.add_node(Role::Variable("v".into()), None);
        let nbrs: Vec<NodeId> = (0..3).map(|_| b.add_node(Role::Other, None)).collect();
        for &nb in &nbrs {
            b.add_edge(center, nb).unwrap();
        }
        assert!(matches!(
            apply_degree_reduction(&mut b, center, &nbrs, "t"),
            Err(GadgetError::DegreeTooSmall(3))
        ));
    }

    #[test]
    fn crossover_growth_and_errors() {
        let mut b = GraphBuilder::new();
        let x = b.add_node(Role::Other, None);
        let y = b.add_node(Role::Other, None);
        let z = b.add_node(Role::Other, None);
        let w = b.add_node(Role::Other, None);
        b.add_edge(x, y).unwrap();
        b.add_edge(z, w).unwrap();
        // Not marked crossable yet.
        assert!(matches!(
            apply_crossover(&mut b, (x, y), (z, w), "t"),
            Err(GadgetError::NotCrossable(_, _))
        ));
        b.mark_crossable(x, y);
        b.mark_crossable(z, w);
        let before = b.node_count();
        let inst = apply_crossover(&mut b, (x, y), (z, w), "t").unwrap();
        assert_eq!(b.node_count() - before, 36);
        assert_eq!(CrossoverInstance::new_node_count(), 36);
        assert!(!b.has_edge(x, y));
        assert_eq!(b.degree(x), 1);
        assert_eq!(b.degree(inst.xp), 3);
        // Fresh cut edges are crossable.
        for (u, v) in inst.cut_edges() {
            assert!(b.is_crossable(u, v));
        }
    }

    #[test]
    fn crossover_shared_endpoint_rejected() {
        let mut b = GraphBuilder::new();
        let x = b.add_node(Role::Other, None);
        let y = b.add_node(Role::Other, None);
        let z = b.add_node(Role::Other, None);
        b.add_edge(x, y).unwrap();
        b.add_edge(y, z).unwrap();
        b.mark_crossable(x, y);
        b.mark_crossable(y, z);
        assert!(matches!(
            apply_crossover(&mut b, (x, y), (y, z), "t"),
            Err(GadgetError::SharedEndpoint(_))
        ));
    }

    #[test]
    fn k_minus_2_counts() {
        for (k, nodes, edges) in [(3usize, 2usize, 1usize), (4, 4, 4), (5, 6, 8)] {
            let mut b = GraphBuilder::new();
            let inst = build_k_minus_2_gadget(&mut b, k, "t").unwrap();
            assert_eq!(inst.path.len(), nodes);
            assert_eq!(inst.evens.len(), k - 2);
            let g = b.seal();
            assert_eq!(g.node_count(), nodes);
            assert_eq!(g.edge_count(), edges);
        }
        let mut b = GraphBuilder::new();
        assert!(build_k_minus_2_gadget(&mut b, 2, "t").is_err());
    }

    #[test]
    fn enumeration_modes_agree() {
        // Closed different-colors gadget and clause gadget.
        let (g, ids, _) = neq_template().instantiate();
        let boundary = BoundaryCondition::external(&[ids["x"], ids["y"]]);
        let a = enumerate_gadget_colorings(&g, &boundary, 2, EnumMode::Exhaustive, 0).unwrap();
        let b = enumerate_gadget_colorings(
            &g,
            &boundary,
            2,
            EnumMode::Propagation,
            DEFAULT_ENUM_BUDGET,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);

        let (g, _, _) = clause_template().instantiate();
        let boundary = BoundaryCondition::default();
        let a = enumerate_gadget_colorings(&g, &boundary, 2, EnumMode::Exhaustive, 0).unwrap();
        let b = enumerate_gadget_colorings(
            &g,
            &boundary,
            2,
            EnumMode::Propagation,
            DEFAULT_ENUM_BUDGET,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn k2_gadget_enumeration() {
        let mut b = GraphBuilder::new();
        let u = b.add_node(Role::Other, None);
        let v = b.add_node(Role::Other, None);
        b.add_edge(u, v).unwrap();
        let g = b.seal();
        let sols = enumerate_gadget_colorings(
            &g,
            &BoundaryCondition::default(),
            2,
            EnumMode::Exhaustive,
            0,
        )
        .unwrap();
        assert_eq!(sols.len(), 2);
    }
}
