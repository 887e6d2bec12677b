//! Undirected simple graphs with role-labeled nodes, a rotation-system
//! planarity certificate, structural checkers, and the perfect-matching
//! coloring verifier.
//!
//! A coloring is valid when every node has exactly one neighbor of its own
//! color; the monochromatic edges then form a perfect matching. Planarity is
//! certified constructively: a rotation system whose face trace gives Euler
//! characteristic 2 is a planar embedding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown node id {0}")]
    UnknownNode(u32),
    #[error("self-loop at node {0}")]
    SelfLoop(u32),
    #[error("parallel edge ({0}, {1})")]
    ParallelEdge(u32, u32),
    #[error("edge ({0}, {1}) absent")]
    EdgeAbsent(u32, u32),
    #[error("coloring is not total: node {0} uncolored")]
    PartialColoring(u32),
    #[error("color {color} out of range for palette {k}")]
    ColorOutOfRange { color: u8, k: u8 },
    #[error("coloring is not a valid perfect-matching coloring")]
    InvalidColoring,
    #[error("rotation system inconsistent at node {0}: {1}")]
    BadRotation(u32, String),
    #[error("graph must be connected for face tracing")]
    Disconnected,
}

/// Dense node identifier assigned by a [`GraphBuilder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What a node is for, in pipeline terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// Variable occurrence node, labeled with the variable name.
    Variable(String),
    /// Center node of a clause gadget, labeled with the clause index.
    ClauseCenter(usize),
    /// Internal node of a different-colors gadget.
    NeqInternal,
    /// Split node of a degree-reduction path.
    DegReductionSplit,
    /// Intermediate node of a degree-reduction path.
    DegReductionPath,
    /// Central-cycle node of a crossover gadget.
    CrossoverCycle,
    /// Node of a (k-2)-color gadget path.
    KColorPath,
    Other,
}

impl Role {
    pub fn token(&self) -> String {
        match self {
            Role::Variable(name) => format!("var:{name}"),
            Role::ClauseCenter(i) => format!("center:{i}"),
            Role::NeqInternal => "neq".into(),
            Role::DegReductionSplit => "split".into(),
            Role::DegReductionPath => "dpath".into(),
            Role::CrossoverCycle => "cross".into(),
            Role::KColorPath => "kpath".into(),
            Role::Other => "other".into(),
        }
    }

    pub fn from_token(tok: &str) -> Option<Role> {
        if let Some(name) = tok.strip_prefix("var:") {
            return Some(Role::Variable(name.to_string()));
        }
        if let Some(i) = tok.strip_prefix("center:") {
            return i.parse().ok().map(Role::ClauseCenter);
        }
        match tok {
            "neq" => Some(Role::NeqInternal),
            "split" => Some(Role::DegReductionSplit),
            "dpath" => Some(Role::DegReductionPath),
            "cross" => Some(Role::CrossoverCycle),
            "kpath" => Some(Role::KColorPath),
            "other" => Some(Role::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeData {
    pub role: Role,
    /// Provenance tag, e.g. `s4.g12` (pipeline step, gadget instance).
    pub origin: Option<String>,
}

/// Cyclic order of incident edges per node, each edge named by its far
/// endpoint (simple graphs make that unambiguous).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RotationSystem {
    pub order: BTreeMap<NodeId, Vec<NodeId>>,
}

impl RotationSystem {
    pub fn set(&mut self, v: NodeId, cycle: Vec<NodeId>) {
        self.order.insert(v, cycle);
    }

    pub fn get(&self, v: NodeId) -> Option<&[NodeId]> {
        self.order.get(&v).map(|c| c.as_slice())
    }

    /// Replaces `old` with `new` in `v`'s cycle, keeping its position.
    pub fn replace_slot(&mut self, v: NodeId, old: NodeId, new: NodeId) -> bool {
        if let Some(cycle) = self.order.get_mut(&v) {
            for slot in cycle.iter_mut() {
                if *slot == old {
                    *slot = new;
                    return true;
                }
            }
        }
        false
    }
}

/// Node-to-color association with an explicit palette size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub colors: BTreeMap<NodeId, u8>,
    pub k: u8,
}

impl Coloring {
    pub fn new(k: u8) -> Self {
        Coloring { colors: BTreeMap::new(), k }
    }

    pub fn set(&mut self, v: NodeId, c: u8) {
        self.colors.insert(v, c);
    }

    pub fn get(&self, v: NodeId) -> Option<u8> {
        self.colors.get(&v).copied()
    }
}

/// Immutable sealed graph. Build via [`GraphBuilder`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    nodes: BTreeMap<NodeId, NodeData>,
    adj: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.contains_key(&v)
    }

    pub fn node(&self, v: NodeId) -> Option<&NodeData> {
        self.nodes.get(&v)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodeData)> {
        self.nodes.iter().map(|(k, v)| (*k, v))
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj.get(&v).map_or(0, |s| s.len())
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    /// Edges as sorted (u, v) pairs with u < v.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(u, s)| s.iter().filter(move |v| *u < **v).map(move |v| (*u, *v)))
    }

    pub fn is_connected(&self) -> bool {
        let mut it = self.nodes.keys();
        let Some(&start) = it.next() else { return true };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == self.nodes.len()
    }
}

/// Single-owner mutable graph under construction.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: BTreeMap<NodeId, NodeData>,
    adj: BTreeMap<NodeId, BTreeSet<NodeId>>,
    next_id: u32,
    /// Edges designated forced-bichromatic, eligible for crossover splicing.
    crossable: BTreeSet<(NodeId, NodeId)>,
}

fn norm(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, role: Role, origin: Option<String>) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.insert(id, NodeData { role, origin });
        self.adj.insert(id, BTreeSet::new());
        id
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u.0));
        }
        if !self.nodes.contains_key(&u) {
            return Err(GraphError::UnknownNode(u.0));
        }
        if !self.nodes.contains_key(&v) {
            return Err(GraphError::UnknownNode(v.0));
        }
        if self.adj[&u].contains(&v) {
            return Err(GraphError::ParallelEdge(u.0, v.0));
        }
        self.adj.get_mut(&u).unwrap().insert(v);
        self.adj.get_mut(&v).unwrap().insert(u);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        if !self.adj.get(&u).is_some_and(|s| s.contains(&v)) {
            return Err(GraphError::EdgeAbsent(u.0, v.0));
        }
        self.adj.get_mut(&u).unwrap().remove(&v);
        self.adj.get_mut(&v).unwrap().remove(&u);
        self.crossable.remove(&norm(u, v));
        Ok(())
    }

    /// Removes a node and its incident edges. The id is never reused.
    pub fn remove_node(&mut self, v: NodeId) -> Result<(), GraphError> {
        if !self.nodes.contains_key(&v) {
            return Err(GraphError::UnknownNode(v.0));
        }
        let nbrs: Vec<NodeId> = self.adj[&v].iter().copied().collect();
        for u in nbrs {
            self.adj.get_mut(&u).unwrap().remove(&v);
            self.crossable.remove(&norm(u, v));
        }
        self.adj.remove(&v);
        self.nodes.remove(&v);
        Ok(())
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj.get(&v).map_or(0, |s| s.len())
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn node(&self, v: NodeId) -> Option<&NodeData> {
        self.nodes.get(&v)
    }

    pub fn set_origin(&mut self, v: NodeId, origin: String) {
        if let Some(d) = self.nodes.get_mut(&v) {
            d.origin = Some(origin);
        }
    }

    pub fn set_role(&mut self, v: NodeId, role: Role) {
        if let Some(d) = self.nodes.get_mut(&v) {
            d.role = role;
        }
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|s| s.len()).sum::<usize>() / 2
    }

    /// The id the next `add_node` call will assign.
    pub fn peek_next_id(&self) -> u32 {
        self.next_id
    }

    pub fn mark_crossable(&mut self, u: NodeId, v: NodeId) {
        self.crossable.insert(norm(u, v));
    }

    pub fn unmark_crossable(&mut self, u: NodeId, v: NodeId) {
        self.crossable.remove(&norm(u, v));
    }

    pub fn is_crossable(&self, u: NodeId, v: NodeId) -> bool {
        self.crossable.contains(&norm(u, v))
    }

    /// Freezes the builder into an immutable graph.
    pub fn seal(self) -> Graph {
        Graph { nodes: self.nodes, adj: self.adj }
    }

    /// Immutable snapshot without consuming the builder.
    pub fn snapshot(&self) -> Graph {
        Graph { nodes: self.nodes.clone(), adj: self.adj.clone() }
    }
}

/// True iff every node has degree exactly `d`.
pub fn check_regular(g: &Graph, d: usize) -> bool {
    g.node_ids().all(|v| g.degree(v) == d)
}

/// Lowpoint DFS for articulation points. Returns `(biconnected, cut_nodes)`;
/// biconnected means connected, at least 3 nodes, and no articulation point.
pub fn is_biconnected(g: &Graph) -> (bool, Vec<NodeId>) {
    let ids: Vec<NodeId> = g.node_ids().collect();
    let n = ids.len();
    if n == 0 {
        return (false, Vec::new());
    }
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let adj: Vec<Vec<usize>> = ids
        .iter()
        .map(|v| g.neighbors(*v).map(|w| index[&w]).collect())
        .collect();

    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut parent = vec![usize::MAX; n];
    let mut is_cut = vec![false; n];
    let mut timer = 0usize;
    let mut visited_total = 0usize;

    // Iterative DFS from node 0 only; disconnection detected by count.
    let root = 0usize;
    let mut stack: Vec<(usize, usize)> = Vec::new(); // (node, next child index)
    disc[root] = timer;
    low[root] = timer;
    timer += 1;
    visited_total += 1;
    stack.push((root, 0));
    let mut root_children = 0usize;

    while let Some(&mut (v, ref mut ci)) = stack.last_mut() {
        if *ci < adj[v].len() {
            let w = adj[v][*ci];
            *ci += 1;
            if disc[w] == usize::MAX {
                parent[w] = v;
                disc[w] = timer;
                low[w] = timer;
                timer += 1;
                visited_total += 1;
                if v == root {
                    root_children += 1;
                }
                stack.push((w, 0));
            } else if w != parent[v] {
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(p, _)) = stack.last() {
                low[p] = low[p].min(low[v]);
                if p != root && low[v] >= disc[p] {
                    is_cut[p] = true;
                }
            }
        }
    }
    if root_children > 1 {
        is_cut[root] = true;
    }

    let connected = visited_total == n;
    let cuts: Vec<NodeId> = (0..n).filter(|&i| is_cut[i]).map(|i| ids[i]).collect();
    let ok = connected && n >= 3 && cuts.is_empty();
    (ok, cuts)
}

/// Brute-force cross-check: removing any single node keeps the graph
/// connected. Quadratic; meant for small graphs and spot checks.
pub fn biconnected_by_deletion(g: &Graph) -> bool {
    let ids: Vec<NodeId> = g.node_ids().collect();
    if ids.len() < 3 || !g.is_connected() {
        return false;
    }
    for &v in &ids {
        let mut seen = BTreeSet::from([v]);
        let start = ids.iter().copied().find(|&u| u != v).unwrap();
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for w in g.neighbors(x) {
                if w != v && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        if seen.len() != ids.len() {
            return false;
        }
    }
    true
}

fn validate_rotation(g: &Graph, rot: &RotationSystem) -> Result<(), GraphError> {
    for v in g.node_ids() {
        let cycle = rot
            .get(v)
            .ok_or_else(|| GraphError::BadRotation(v.0, "missing cycle".into()))?;
        let nbrs: BTreeSet<NodeId> = g.neighbors(v).collect();
        if cycle.len() != nbrs.len() {
            return Err(GraphError::BadRotation(
                v.0,
                format!("cycle lists {} edges, degree is {}", cycle.len(), nbrs.len()),
            ));
        }
        let listed: BTreeSet<NodeId> = cycle.iter().copied().collect();
        if listed != nbrs {
            return Err(GraphError::BadRotation(v.0, "cycle does not match incident edges".into()));
        }
        if listed.len() != cycle.len() {
            return Err(GraphError::BadRotation(v.0, "duplicate entry in cycle".into()));
        }
    }
    Ok(())
}

/// Traces the faces of the embedding given by `rot` and returns
/// `(face_count, euler_characteristic)`. Characteristic 2 certifies a planar
/// embedding of a connected graph.
///
/// Face rule: after arriving at `v` along `(u, v)`, leave along the successor
/// of `u` in `v`'s cyclic order.
pub fn embedding_genus(g: &Graph, rot: &RotationSystem) -> Result<(usize, i64), GraphError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    validate_rotation(g, rot)?;

    // Position of each directed edge in the target's rotation.
    let mut pos: BTreeMap<(NodeId, NodeId), usize> = BTreeMap::new();
    for v in g.node_ids() {
        for (i, &u) in rot.get(v).unwrap().iter().enumerate() {
            pos.insert((u, v), i);
        }
    }

    let mut unvisited: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for (u, v) in g.edges() {
        unvisited.insert((u, v));
        unvisited.insert((v, u));
    }
    let total_directed = unvisited.len();

    let mut faces = 0usize;
    let mut traced = 0usize;
    while let Some(&start) = unvisited.iter().next() {
        faces += 1;
        let mut cur = start;
        loop {
            unvisited.remove(&cur);
            traced += 1;
            let (u, v) = cur;
            let cycle = rot.get(v).unwrap();
            let i = pos[&(u, v)];
            let w = cycle[(i + 1) % cycle.len()];
            cur = (v, w);
            if cur == start {
                break;
            }
        }
    }
    debug_assert_eq!(traced, total_directed);

    let chi = g.node_count() as i64 - g.edge_count() as i64 + faces as i64;
    Ok((faces, chi))
}

/// Verdict of the perfect-matching coloring check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PmVerdict {
    Valid,
    /// Nodes whose same-colored neighbor count differs from 1, with counts.
    Violations(Vec<(NodeId, usize)>),
}

impl PmVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, PmVerdict::Valid)
    }
}

/// Checks that every node has exactly one neighbor of its own color.
pub fn verify_pm_coloring(g: &Graph, col: &Coloring) -> Result<PmVerdict, GraphError> {
    for v in g.node_ids() {
        match col.get(v) {
            None => return Err(GraphError::PartialColoring(v.0)),
            Some(c) if c >= col.k => {
                return Err(GraphError::ColorOutOfRange { color: c, k: col.k })
            }
            _ => {}
        }
    }
    let mut bad = Vec::new();
    for v in g.node_ids() {
        let c = col.get(v).unwrap();
        let same = g.neighbors(v).filter(|w| col.get(*w) == Some(c)).count();
        if same != 1 {
            bad.push((v, same));
        }
    }
    if bad.is_empty() {
        Ok(PmVerdict::Valid)
    } else {
        Ok(PmVerdict::Violations(bad))
    }
}

/// Extracts the matching induced by a valid coloring: the monochromatic
/// edges. Errors unless the coloring passes [`verify_pm_coloring`].
pub fn matching_from_coloring(
    g: &Graph,
    col: &Coloring,
) -> Result<BTreeSet<(NodeId, NodeId)>, GraphError> {
    match verify_pm_coloring(g, col)? {
        PmVerdict::Valid => {}
        PmVerdict::Violations(_) => return Err(GraphError::InvalidColoring),
    }
    let mut m = BTreeSet::new();
    for (u, v) in g.edges() {
        if col.get(u) == col.get(v) {
            m.insert((u, v));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn cycle_graph(n: usize) -> Graph {
        let mut b = GraphBuilder::new();
        let ids: Vec<NodeId> = (0..n).map(|_| b.add_node(Role::Other, None)).collect();
        for i in 0..n {
            b.add_edge(ids[i], ids[(i + 1) % n]).unwrap();
        }
        b.seal()
    }

    pub(crate) fn path_graph(n: usize) -> Graph {
        let mut b = GraphBuilder::new();
        let ids: Vec<NodeId> = (0..n).map(|_| b.add_node(Role::Other, None)).collect();
        for i in 0..n - 1 {
            b.add_edge(ids[i], ids[i + 1]).unwrap();
        }
        b.seal()
    }

    pub(crate) fn complete_graph(n: usize) -> Graph {
        let mut b = GraphBuilder::new();
        let ids: Vec<NodeId> = (0..n).map(|_| b.add_node(Role::Other, None)).collect();
        for i in 0..n {
            for j in i + 1..n {
                b.add_edge(ids[i], ids[j]).unwrap();
            }
        }
        b.seal()
    }

    #[test]
    fn regular_check() {
        assert!(check_regular(&complete_graph(4), 3));
        assert!(!check_regular(&path_graph(3), 3));
    }

    #[test]
    fn builder_rejects_bad_edges() {
        let mut b = GraphBuilder::new();
        let u = b.add_node(Role::Other, None);
        let v = b.add_node(Role::Other, None);
        assert!(b.add_edge(u, u).is_err());
        b.add_edge(u, v).unwrap();
        assert!(b.add_edge(v, u).is_err());
    }

    #[test]
    fn biconnectivity_cases() {
        let (ok, cuts) = is_biconnected(&cycle_graph(5));
        assert!(ok);
        assert!(cuts.is_empty());

        let (ok, cuts) = is_biconnected(&path_graph(3));
        assert!(!ok);
        assert_eq!(cuts, vec![NodeId(1)]);

        // Two triangles sharing one node.
        let mut b = GraphBuilder::new();
        let ids: Vec<NodeId> = (0..5).map(|_| b.add_node(Role::Other, None)).collect();
        for (u, v) in [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)] {
            b.add_edge(ids[u], ids[v]).unwrap();
        }
        let g = b.seal();
        let (ok, cuts) = is_biconnected(&g);
        assert!(!ok);
        assert_eq!(cuts, vec![ids[2]]);
        assert!(!biconnected_by_deletion(&g));
    }

    fn k4_rotation() -> RotationSystem {
        // Tetrahedral embedding: outer triangle 0,1,2 with 3 inside.
        let mut rot = RotationSystem::default();
        rot.set(NodeId(0), vec![NodeId(1), NodeId(3), NodeId(2)]);
        rot.set(NodeId(1), vec![NodeId(2), NodeId(3), NodeId(0)]);
        rot.set(NodeId(2), vec![NodeId(0), NodeId(3), NodeId(1)]);
        rot.set(NodeId(3), vec![NodeId(0), NodeId(1), NodeId(2)]);
        rot
    }

    #[test]
    fn faces_of_k4() {
        let g = complete_graph(4);
        let (faces, chi) = embedding_genus(&g, &k4_rotation()).unwrap();
        assert_eq!(faces, 4);
        assert_eq!(chi, 2);
    }

    #[test]
    fn faces_of_cube() {
        // Standard cube: outer square 0-1-2-3, inner square 4-5-6-7.
        let mut b = GraphBuilder::new();
        let ids: Vec<NodeId> = (0..8).map(|_| b.add_node(Role::Other, None)).collect();
        for (u, v) in [
            (0, 1), (1, 2), (2, 3), (3, 0),
            (4, 5), (5, 6), (6, 7), (7, 4),
            (0, 4), (1, 5), (2, 6), (3, 7),
        ] {
            b.add_edge(ids[u], ids[v]).unwrap();
        }
        let g = b.seal();
        let mut rot = RotationSystem::default();
        // Outer square CCW 0,1,2,3; inner CCW 4,5,6,7 directly below each.
        rot.set(ids[0], vec![ids[1], ids[4], ids[3]]);
        rot.set(ids[1], vec![ids[2], ids[5], ids[0]]);
        rot.set(ids[2], vec![ids[3], ids[6], ids[1]]);
        rot.set(ids[3], vec![ids[0], ids[7], ids[2]]);
        rot.set(ids[4], vec![ids[0], ids[5], ids[7]]);
        rot.set(ids[5], vec![ids[1], ids[6], ids[4]]);
        rot.set(ids[6], vec![ids[2], ids[7], ids[5]]);
        rot.set(ids[7], vec![ids[3], ids[4], ids[6]]);
        let (faces, chi) = embedding_genus(&g, &rot).unwrap();
        assert_eq!(faces, 6);
        assert_eq!(chi, 2);
    }

    #[test]
    fn k5_has_no_planar_rotation_witness() {
        let g = complete_graph(5);
        // One fixed rotation; K5 is nonplanar so chi must differ from 2.
        let mut rot = RotationSystem::default();
        for v in 0..5u32 {
            let cycle: Vec<NodeId> = (0..5u32)
                .filter(|w| *w != v)
                .map(NodeId)
                .collect();
            rot.set(NodeId(v), cycle);
        }
        let (_, chi) = embedding_genus(&g, &rot).unwrap();
        assert_ne!(chi, 2);
    }

    #[test]
    fn rotation_validation_errors() {
        let g = complete_graph(3);
        let mut rot = RotationSystem::default();
        rot.set(NodeId(0), vec![NodeId(1)]);
        rot.set(NodeId(1), vec![NodeId(0), NodeId(2)]);
        rot.set(NodeId(2), vec![NodeId(0), NodeId(1)]);
        assert!(matches!(
            embedding_genus(&g, &rot),
            Err(GraphError::BadRotation(0, _))
        ));
    }

    #[test]
    fn verifier_k2() {
        let g = path_graph(2);
        let mut col = Coloring::new(2);
        col.set(NodeId(0), 0);
        col.set(NodeId(1), 0);
        assert!(verify_pm_coloring(&g, &col).unwrap().is_valid());

        col.set(NodeId(1), 1);
        match verify_pm_coloring(&g, &col).unwrap() {
            PmVerdict::Violations(v) => {
                assert_eq!(v, vec![(NodeId(0), 0), (NodeId(1), 0)]);
            }
            PmVerdict::Valid => panic!("expected violations"),
        }
    }

    #[test]
    fn verifier_c4_brute_force() {
        let g = cycle_graph(4);
        let mut valid = Vec::new();
        for mask in 0..16u32 {
            let mut col = Coloring::new(2);
            for i in 0..4 {
                col.set(NodeId(i), ((mask >> i) & 1) as u8);
            }
            if verify_pm_coloring(&g, &col).unwrap().is_valid() {
                valid.push(mask);
            }
        }
        assert_eq!(valid.len(), 4);
        // (0,0,1,1) in cycle order is among them.
        assert!(valid.contains(&0b1100));
    }

    #[test]
    fn matching_extraction() {
        let g = cycle_graph(4);
        let mut col = Coloring::new(2);
        for (i, c) in [0u8, 0, 1, 1].iter().enumerate() {
            col.set(NodeId(i as u32), *c);
        }
        let m = matching_from_coloring(&g, &col).unwrap();
        assert_eq!(m.len(), 2);
        // Opposite edges of the cycle.
        assert!(m.contains(&(NodeId(0), NodeId(1))));
        assert!(m.contains(&(NodeId(2), NodeId(3))));

        let mut bad = col.clone();
        bad.set(NodeId(0), 1);
        assert!(matching_from_coloring(&g, &bad).is_err());
    }

    #[test]
    fn partial_coloring_is_error() {
        let g = path_graph(2);
        let mut col = Coloring::new(2);
        col.set(NodeId(0), 0);
        assert!(matches!(
            verify_pm_coloring(&g, &col),
            Err(GraphError::PartialColoring(1))
        ));
    }

    proptest! {
        // Lowpoint verdict agrees with brute-force deletion on random graphs.
        #[test]
        fn biconnectivity_cross_validation(
            n in 3usize..9,
            edges in proptest::collection::vec((0usize..9, 0usize..9), 0..24)
        ) {
            let mut b = GraphBuilder::new();
            let ids: Vec<NodeId> = (0..n).map(|_| b.add_node(Role::Other, None)).collect();
            for (u, v) in edges {
                let (u, v) = (u % n, v % n);
                if u != v && !b.has_edge(ids[u], ids[v]) {
                    b.add_edge(ids[u], ids[v]).unwrap();
                }
            }
            let g = b.seal();
            let (fast, cuts) = is_biconnected(&g);
            let slow = biconnected_by_deletion(&g);
            prop_assert_eq!(fast, slow);
            if fast {
                prop_assert!(cuts.is_empty());
            }
        }

        // Matching nodes are covered exactly once iff the verdict is Valid.
        #[test]
        fn matching_covers_iff_valid(
            n in 1usize..7,
            edges in proptest::collection::vec((0usize..7, 0usize..7), 0..15),
            colors in proptest::collection::vec(0u8..2, 7)
        ) {
            let mut b = GraphBuilder::new();
            let ids: Vec<NodeId> = (0..n).map(|_| b.add_node(Role::Other, None)).collect();
            for (u, v) in edges {
                let (u, v) = (u % n, v % n);
                if u != v && !b.has_edge(ids[u], ids[v]) {
                    b.add_edge(ids[u], ids[v]).unwrap();
                }
            }
            let g = b.seal();
            let mut col = Coloring::new(2);
            for (i, id) in ids.iter().enumerate() {
                col.set(*id, colors[i]);
            }
            let verdict = verify_pm_coloring(&g, &col).unwrap();
            let mono: Vec<(NodeId, NodeId)> = g
                .edges()
                .filter(|(u, v)| col.get(*u) == col.get(*v))
                .collect();
            let mut count: BTreeMap<NodeId, usize> = BTreeMap::new();
            for (u, v) in &mono {
                *count.entry(*u).or_default() += 1;
                *count.entry(*v).or_default() += 1;
            }
            let covered_once = ids.iter().all(|id| count.get(id).copied().unwrap_or(0) == 1);
            prop_assert_eq!(verdict.is_valid(), covered_once);
        }
    }
}
