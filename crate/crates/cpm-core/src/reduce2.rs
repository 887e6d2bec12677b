//! Six-step compilation from a clause-connected Positive NAE 3SAT formula to
//! a 2-connected 3-regular planar 2-CPM instance.
//!
//! 1. one K4 clause gadget per clause;
//! 2. consecutive occurrences of each variable joined by an equality wire
//!    (two different-colors arcs through a degree-2 connector node);
//! 3. the whole graph duplicated, each variable node tied to its clone by a
//!    different-colors arc;
//! 4. every node of degree > 3 split by the degree-reduction gadget;
//! 5. every degree-2 node tied to its mirror clone, reaching 3-regularity;
//! 6. a one-page layout places all clusters on a line with wires as arcs in
//!    the upper half-plane; interleaving wires get crossovers spliced onto
//!    crossable stub edges, and the global rotation system is assembled.
//!
//! The layout geometry is rectangular: a wire rises at its left port, runs
//! at a height given by its span rank, and descends at its right port.
//! Nested wires never cross; interleaving wires cross exactly once, at the
//! higher wire's vertical. Every structural claim (3-regular, biconnected,
//! Euler characteristic 2, even order) is checked on the finished output
//! rather than assumed.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::formula::{Assignment, Formula};
use crate::gadgets::{
    apply_degree_reduction, build_clause_gadget, connect_neq_chain, extend_neq_chain,
    apply_crossover, GadgetError, NeqChain,
};
use crate::graph::{
    check_regular, embedding_genus, is_biconnected, verify_pm_coloring, Coloring, Graph,
    GraphBuilder, GraphError, NodeId, PmVerdict, Role, RotationSystem,
};
use crate::graphfile::emit_graph;
use crate::solver::{solve, Budgets, SolveMode, SolveRequest, SolveStatus};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("formula has no clauses")]
    EmptyFormula,
    #[error("formula is not clause-connected")]
    NotClauseConnected,
    #[error("variable `{0}` occurs in no clause")]
    UnusedVariable(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error("pipeline internal invariant broken: {0}")]
    Internal(String),
    #[error("output invariant violated: {0}")]
    InvariantViolated(String),
    #[error("coloring is not a valid 2-CPM coloring")]
    InvalidColoring,
    #[error("coloring palette must be 2, got {0}")]
    WrongPalette(u8),
    #[error("representative nodes of variable `{0}` disagree")]
    RepresentativeDisagreement(String),
    #[error("assignment does not satisfy the source formula")]
    AssignmentUnsatisfying,
    #[error("assignment misses variable `{0}`")]
    AssignmentMissingVariable(String),
    #[error("no coloring extends the seeded assignment: {0}")]
    PushFailed(String),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Backtrack budget used when completing seeded colorings.
    pub backtrack_limit: u64,
    /// Steps after which to capture a graph-file dump (1..=6).
    pub dump_steps: BTreeSet<u8>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { backtrack_limit: 2_000_000, dump_steps: BTreeSet::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub step: u8,
    pub tag: String,
}

#[derive(Debug, Clone, Default)]
pub struct StepStat {
    pub step: u8,
    pub label: String,
    pub nodes_added: usize,
    pub edges_added: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineStats {
    pub steps: Vec<StepStat>,
    pub arcs: usize,
    pub crossings: usize,
    pub crossovers: usize,
    pub final_nodes: usize,
    pub final_edges: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireParity {
    Equality,
    Inequality,
}

#[derive(Debug, Clone)]
pub struct WireInfo {
    pub arc: usize,
    pub a_port: usize,
    pub b_port: usize,
    pub parity: WireParity,
    /// Arcs belonging to one logical wire share a group id (the two halves
    /// of an equality wire).
    pub group: usize,
    /// Crossings in order along the wire: (other arc, crossing x position).
    pub crossings: Vec<(usize, usize)>,
    pub crossable_count: usize,
}

#[derive(Debug, Clone)]
pub struct ClusterInfo {
    pub label: String,
    pub first_port: usize,
    pub port_count: usize,
}

/// The one-page layout: cluster port ranges and one record per wire arc.
#[derive(Debug, Clone, Default)]
pub struct LayoutIR {
    pub clusters: Vec<ClusterInfo>,
    pub wires: Vec<WireInfo>,
    pub port_count: usize,
}

#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub graph: Graph,
    pub rotation: RotationSystem,
    /// One representative color-carrying node per variable (primary copy).
    pub var_reps: BTreeMap<String, NodeId>,
    /// All color-carrying nodes per variable in the primary copy.
    pub var_nodes: BTreeMap<String, Vec<NodeId>>,
    pub provenance: BTreeMap<NodeId, Provenance>,
    pub stats: PipelineStats,
    pub layout: LayoutIR,
    pub source: Formula,
    /// (step, graph file text) captures requested via the config.
    pub dumps: Vec<(u8, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CopyTag {
    Primary,
    Clone,
}

#[derive(Debug, Clone)]
struct OccRec {
    var: usize,
    clause: usize,
    slot: usize,
    copy: CopyTag,
    node: NodeId,
    path: Option<usize>,
}

#[derive(Debug, Clone)]
struct CenterRec {
    clause: usize,
    copy: CopyTag,
    node: NodeId,
}

/// Equality-wire connector: a matched pair of plain nodes. Both incident
/// gadget stubs are forced bichromatic, so the pair must match each other,
/// which relays equality between the wire's two occurrence endpoints.
#[derive(Debug, Clone)]
struct ConnRec {
    m1: NodeId,
    m2: NodeId,
    copy: CopyTag,
    /// Occurrence whose path this connector pair follows on the spine.
    left_occ: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArcKind {
    EqHalf,
    CloneLink,
}

#[derive(Debug, Clone)]
struct ArcRec {
    a: NodeId,
    b: NodeId,
    chain: NeqChain,
    kind: ArcKind,
    group: usize,
}

#[derive(Debug, Clone)]
struct PathRec {
    occ: usize,
    splits: Vec<NodeId>,
    nodes: Vec<NodeId>,
    /// (split, inherited neighbor) in rotation order.
    attachments: Vec<(NodeId, NodeId)>,
}

/// Mutable pipeline state; `reduce` drives the six steps in order.
pub struct PipelineBuilder {
    f: Formula,
    cfg: PipelineConfig,
    b: GraphBuilder,
    occs: Vec<OccRec>,
    centers: Vec<CenterRec>,
    conns: Vec<ConnRec>,
    arcs: Vec<ArcRec>,
    paths: Vec<PathRec>,
    clone_of: BTreeMap<NodeId, NodeId>,
    occ_of_node: BTreeMap<NodeId, usize>,
    prov: BTreeMap<NodeId, Provenance>,
    stats: PipelineStats,
    dumps: Vec<(u8, String)>,
    group_counter: usize,
    step_done: u8,
}

impl PipelineBuilder {
    pub fn new(f: &Formula, cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        if f.clauses().is_empty() {
            return Err(PipelineError::EmptyFormula);
        }
        if !f.is_clause_connected() {
            return Err(PipelineError::NotClauseConnected);
        }
        for v in f.variables() {
            if !f.clauses().iter().any(|c| c.vars().contains(&v.as_str())) {
                return Err(PipelineError::UnusedVariable(v.clone()));
            }
        }
        Ok(PipelineBuilder {
            f: f.clone(),
            cfg: cfg.clone(),
            b: GraphBuilder::new(),
            occs: Vec::new(),
            centers: Vec::new(),
            conns: Vec::new(),
            arcs: Vec::new(),
            paths: Vec::new(),
            clone_of: BTreeMap::new(),
            occ_of_node: BTreeMap::new(),
            prov: BTreeMap::new(),
            stats: PipelineStats::default(),
            dumps: Vec::new(),
            group_counter: 0,
            step_done: 0,
        })
    }

    fn tag_new_nodes(&mut self, since: u32, step: u8, tag: &str) {
        let ids: Vec<NodeId> = self
            .b
            .node_ids()
            .filter(|id| id.0 >= since && !self.prov.contains_key(id))
            .collect();
        for id in ids {
            self.prov.insert(id, Provenance { step, tag: tag.to_string() });
            self.b.set_origin(id, format!("s{step}.{tag}"));
        }
    }

    fn next_node_id(&self) -> u32 {
        self.b.peek_next_id()
    }

    fn record_step(&mut self, step: u8, label: &str, nodes_before: usize, edges_before: usize) {
        self.stats.steps.push(StepStat {
            step,
            label: label.to_string(),
            nodes_added: self.b.node_count() - nodes_before,
            edges_added: self.b.edge_count() - edges_before,
        });
        self.step_done = step;
        if self.cfg.dump_steps.contains(&step) {
            self.dumps.push((step, emit_graph(&self.b.snapshot(), None, None)));
        }
    }

    /// Step 1: one K4 clause gadget per clause.
    pub fn step1_clause_gadgets(&mut self) -> Result<(), PipelineError> {
        let (n0, e0) = (self.b.node_count(), self.b.edge_count());
        let clauses: Vec<[String; 3]> = self
            .f
            .clauses()
            .iter()
            .map(|c| [c.a.clone(), c.b.clone(), c.c.clone()])
            .collect();
        let var_index: BTreeMap<String, usize> = self
            .f
            .variables()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        for (j, names) in clauses.iter().enumerate() {
            let since = self.next_node_id();
            let inst = build_clause_gadget(
                &mut self.b,
                j,
                [&names[0], &names[1], &names[2]],
                &format!("clause{j}"),
            );
            self.tag_new_nodes(since, 1, &format!("clause{j}"));
            for (slot, node) in inst.vars.into_iter().enumerate() {
                let occ_idx = self.occs.len();
                self.occs.push(OccRec {
                    var: var_index[names[slot].as_str()],
                    clause: j,
                    slot,
                    copy: CopyTag::Primary,
                    node,
                    path: None,
                });
                self.occ_of_node.insert(node, occ_idx);
            }
            self.centers.push(CenterRec { clause: j, copy: CopyTag::Primary, node: inst.center });
        }
        self.record_step(1, "clause gadgets", n0, e0);
        Ok(())
    }

    /// Step 2: equality wires between consecutive occurrences of each
    /// variable: two different-colors arcs through a matched connector pair.
    pub fn step2_connect_shared(&mut self) -> Result<(), PipelineError> {
        let (n0, e0) = (self.b.node_count(), self.b.edge_count());
        for var in 0..self.f.variables().len() {
            let occ_idxs: Vec<usize> = (0..self.occs.len())
                .filter(|&i| self.occs[i].var == var && self.occs[i].copy == CopyTag::Primary)
                .collect();
            for pair in occ_idxs.windows(2) {
                let (o1, o2) = (pair[0], pair[1]);
                let group = self.group_counter;
                self.group_counter += 1;
                let since = self.next_node_id();
                let m1 = self.b.add_node(Role::Other, None);
                let m2 = self.b.add_node(Role::Other, None);
                self.b.add_edge(m1, m2)?;
                let tag = format!("chain.v{var}.g{group}");
                let c1 = connect_neq_chain(
                    &mut self.b,
                    self.occs[o1].node,
                    m1,
                    1,
                    &format!("s2.{tag}"),
                )?;
                let c2 = connect_neq_chain(
                    &mut self.b,
                    m2,
                    self.occs[o2].node,
                    1,
                    &format!("s2.{tag}"),
                )?;
                self.tag_new_nodes(since, 2, &tag);
                self.conns.push(ConnRec { m1, m2, copy: CopyTag::Primary, left_occ: o1 });
                self.arcs.push(ArcRec {
                    a: self.occs[o1].node,
                    b: m1,
                    chain: c1,
                    kind: ArcKind::EqHalf,
                    group,
                });
                self.arcs.push(ArcRec {
                    a: m2,
                    b: self.occs[o2].node,
                    chain: c2,
                    kind: ArcKind::EqHalf,
                    group,
                });
            }
        }
        self.record_step(2, "equality wires", n0, e0);
        Ok(())
    }

    /// Step 3: duplicate everything, then tie each variable occurrence to
    /// its clone with a different-colors arc.
    pub fn step3_duplicate_and_link(&mut self) -> Result<(), PipelineError> {
        let (n0, e0) = (self.b.node_count(), self.b.edge_count());

        let node_list: Vec<NodeId> = self.b.node_ids().collect();
        let edge_list: Vec<(NodeId, NodeId)> = self.b.snapshot().edges().collect();
        for &v in &node_list {
            let data = self.b.node(v).unwrap().clone();
            let c = self.b.add_node(data.role, None);
            let base = self
                .prov
                .get(&v)
                .map(|p| p.tag.clone())
                .unwrap_or_default();
            self.prov.insert(c, Provenance { step: 3, tag: format!("clone.{base}") });
            self.b.set_origin(c, format!("s3.clone.{base}"));
            self.clone_of.insert(v, c);
        }
        for (u, v) in edge_list {
            self.b.add_edge(self.clone_of[&u], self.clone_of[&v])?;
        }

        // Mirror the bookkeeping: occurrences, centers, connectors, arcs.
        let primary_occ_count = self.occs.len();
        for i in 0..primary_occ_count {
            let o = self.occs[i].clone();
            let node = self.clone_of[&o.node];
            let idx = self.occs.len();
            self.occs.push(OccRec { copy: CopyTag::Clone, node, path: None, ..o });
            self.occ_of_node.insert(node, idx);
        }
        let primary_centers = self.centers.clone();
        for c in primary_centers {
            self.centers.push(CenterRec {
                clause: c.clause,
                copy: CopyTag::Clone,
                node: self.clone_of[&c.node],
            });
        }
        let primary_conns = self.conns.clone();
        for c in primary_conns {
            self.conns.push(ConnRec {
                m1: self.clone_of[&c.m1],
                m2: self.clone_of[&c.m2],
                copy: CopyTag::Clone,
                left_occ: c.left_occ + primary_occ_count,
            });
        }
        let primary_arcs: Vec<ArcRec> = self.arcs.clone();
        let mut group_map: BTreeMap<usize, usize> = BTreeMap::new();
        for arc in primary_arcs {
            let chain = NeqChain {
                a_end: self.clone_of[&arc.chain.a_end],
                b_end: self.clone_of[&arc.chain.b_end],
                gadgets: arc
                    .chain
                    .gadgets
                    .iter()
                    .map(|g| crate::gadgets::NeqInstance {
                        nodes: crate::gadgets::NeqNodes {
                            a: self.clone_of[&g.nodes.a],
                            b: self.clone_of[&g.nodes.b],
                            c: self.clone_of[&g.nodes.c],
                            d: self.clone_of[&g.nodes.d],
                            p: self.clone_of[&g.nodes.p],
                            q: self.clone_of[&g.nodes.q],
                            r: self.clone_of[&g.nodes.r],
                            s: self.clone_of[&g.nodes.s],
                        },
                        x_end: self.clone_of[&g.x_end],
                        y_end: self.clone_of[&g.y_end],
                    })
                    .collect(),
            };
            let group = *group_map.entry(arc.group).or_insert_with(|| {
                let g = self.group_counter;
                self.group_counter += 1;
                g
            });
            for (u, v) in chain.crossable_edges() {
                self.b.mark_crossable(u, v);
            }
            self.arcs.push(ArcRec {
                a: self.clone_of[&arc.a],
                b: self.clone_of[&arc.b],
                chain,
                kind: arc.kind,
                group,
            });
        }

        // Variable-to-clone links.
        for i in 0..primary_occ_count {
            let node = self.occs[i].node;
            let clone = self.clone_of[&node];
            let group = self.group_counter;
            self.group_counter += 1;
            let since = self.next_node_id();
            let tag = format!("link.occ{i}");
            let chain = connect_neq_chain(&mut self.b, node, clone, 1, &format!("s3.{tag}"))?;
            self.tag_new_nodes(since, 3, &tag);
            self.arcs.push(ArcRec { a: node, b: clone, chain, kind: ArcKind::CloneLink, group });
        }
        self.record_step(3, "duplicate and link", n0, e0);
        Ok(())
    }

    /// Classifies the stub arcs incident to an occurrence node.
    fn occ_stubs(&self, occ_idx: usize) -> (Option<NodeId>, Option<NodeId>, Option<NodeId>) {
        let node = self.occs[occ_idx].node;
        let mut prev_stub = None;
        let mut next_stub = None;
        let mut clone_stub = None;
        for arc in &self.arcs {
            match arc.kind {
                ArcKind::EqHalf => {
                    if arc.a == node {
                        next_stub = Some(arc.chain.gadgets[0].nodes.r);
                    }
                    if arc.b == node {
                        prev_stub = Some(arc.chain.gadgets.last().unwrap().nodes.s);
                    }
                }
                ArcKind::CloneLink => {
                    if arc.a == node {
                        clone_stub = Some(arc.chain.gadgets[0].nodes.r);
                    }
                    if arc.b == node {
                        clone_stub = Some(arc.chain.gadgets.last().unwrap().nodes.s);
                    }
                }
            }
        }
        (prev_stub, next_stub, clone_stub)
    }

    /// Canonical rotation order of an occurrence node's incident edges:
    /// wire stubs first (prev-chain, next-chain, clone), then the three
    /// cluster chords in the slot pattern that keeps the cluster planar.
    fn canonical_order(&self, occ_idx: usize) -> Result<Vec<NodeId>, PipelineError> {
        let occ = &self.occs[occ_idx];
        let node = occ.node;
        let (prev_stub, next_stub, clone_stub) = self.occ_stubs(occ_idx);

        let mut chord_to_slot: BTreeMap<usize, NodeId> = BTreeMap::new();
        let mut chord_center = None;
        let stub_set: BTreeSet<NodeId> =
            [prev_stub, next_stub, clone_stub].iter().flatten().copied().collect();
        for nb in self.b.neighbors(node) {
            if stub_set.contains(&nb) {
                continue;
            }
            if let Some(&other) = self.occ_of_node.get(&nb) {
                let o = &self.occs[other];
                if o.clause == occ.clause && o.copy == occ.copy {
                    chord_to_slot.insert(o.slot, nb);
                    continue;
                }
            }
            let is_center = self
                .centers
                .iter()
                .any(|c| c.node == nb && c.clause == occ.clause && c.copy == occ.copy);
            if is_center {
                chord_center = Some(nb);
            } else {
                return Err(PipelineError::Internal(format!(
                    "unclassifiable neighbor {nb} of occurrence node {node}"
                )));
            }
        }

        let center =
            chord_center.ok_or_else(|| PipelineError::Internal("missing center chord".into()))?;
        let chord = |slot: usize| -> Result<NodeId, PipelineError> {
            chord_to_slot
                .get(&slot)
                .copied()
                .ok_or_else(|| PipelineError::Internal(format!("missing chord to slot {slot}")))
        };
        let chords = match occ.slot {
            0 => vec![chord(2)?, center, chord(1)?],
            1 => vec![chord(0)?, center, chord(2)?],
            2 => vec![chord(1)?, center, chord(0)?],
            _ => unreachable!(),
        };
        // Chain stubs sit at the path's outer ends so equality arcs hug
        // their connector blocks; the in-disk embedding allows stubs at any
        // position among the chords.
        let mut order: Vec<NodeId> = Vec::new();
        order.extend(prev_stub);
        order.extend(clone_stub);
        order.extend(chords);
        order.extend(next_stub);
        Ok(order)
    }

    /// Step 4: split every node of degree > 3 (always variable occurrences)
    /// into a degree-reduction path, primary and clone in lockstep.
    pub fn step4_degree_reduce(&mut self) -> Result<(), PipelineError> {
        let (n0, e0) = (self.b.node_count(), self.b.edge_count());

        // Sentinel: only Variable-role nodes may exceed degree 3.
        for v in self.b.node_ids().collect::<Vec<_>>() {
            if self.b.degree(v) > 3 {
                let role = self.b.node(v).unwrap().role.clone();
                if !matches!(role, Role::Variable(_)) {
                    return Err(PipelineError::Internal(format!(
                        "degree-{} node {v} has non-variable role {role:?}",
                        self.b.degree(v)
                    )));
                }
            }
        }

        let primary_occs: Vec<usize> = (0..self.occs.len())
            .filter(|&i| self.occs[i].copy == CopyTag::Primary)
            .collect();
        for i in primary_occs {
            let clone_idx = self
                .occs
                .iter()
                .position(|o| {
                    o.copy == CopyTag::Clone && o.node == self.clone_of[&self.occs[i].node]
                })
                .ok_or_else(|| PipelineError::Internal("missing clone occurrence".into()))?;
            for idx in [i, clone_idx] {
                let order = self.canonical_order(idx)?;
                let node = self.occs[idx].node;
                let occ = &self.occs[idx];
                let tag = format!(
                    "split.v{}.c{}.s{}{}",
                    occ.var,
                    occ.clause,
                    occ.slot,
                    if occ.copy == CopyTag::Clone { ".clone" } else { "" }
                );
                let since = self.next_node_id();
                let inst = apply_degree_reduction(&mut self.b, node, &order, &format!("s4.{tag}"))?;
                self.tag_new_nodes(since, 4, &tag);
                let path_idx = self.paths.len();
                for &s in &inst.splits {
                    self.occ_of_node.insert(s, idx);
                }
                self.paths.push(PathRec {
                    occ: idx,
                    splits: inst.splits.clone(),
                    nodes: inst.path_nodes(),
                    attachments: inst.attachments.clone(),
                });
                self.occs[idx].path = Some(path_idx);
            }
            // Mirror map for the new nodes, relying on lockstep order.
            let p = &self.paths[self.paths.len() - 2];
            let c = &self.paths[self.paths.len() - 1];
            for (pn, cn) in p.nodes.iter().zip(&c.nodes) {
                self.clone_of.insert(*pn, *cn);
            }
        }

        // Re-derive arc endpoints: a terminal gadget's outer neighbor is the
        // r (or s) node's single neighbor outside its own gadget.
        for arc in &mut self.arcs {
            let first = arc.chain.gadgets[0];
            let new_a = self
                .b
                .neighbors(first.nodes.r)
                .find(|&nb| nb != first.nodes.p && nb != first.nodes.s)
                .ok_or_else(|| PipelineError::Internal("dangling arc a-end".into()))?;
            arc.a = new_a;
            arc.chain.a_end = new_a;
            arc.chain.gadgets[0].x_end = new_a;
            let li = arc.chain.gadgets.len() - 1;
            let last = arc.chain.gadgets[li];
            let new_b = self
                .b
                .neighbors(last.nodes.s)
                .find(|&nb| nb != last.nodes.q && nb != last.nodes.r)
                .ok_or_else(|| PipelineError::Internal("dangling arc b-end".into()))?;
            arc.b = new_b;
            arc.chain.b_end = new_b;
            arc.chain.gadgets[li].y_end = new_b;
        }

        // Splitting a later occurrence rewrites chord endpoints recorded by
        // earlier splits; re-derive every attachment from the graph.
        for path in &mut self.paths {
            let node_set: BTreeSet<NodeId> = path.nodes.iter().copied().collect();
            for (split, ext) in path.attachments.iter_mut() {
                let external = self
                    .b
                    .neighbors(*split)
                    .find(|nb| !node_set.contains(nb))
                    .ok_or_else(|| {
                        PipelineError::Internal(format!("split {split} has no external edge"))
                    })?;
                *ext = external;
            }
        }

        for v in self.b.node_ids().collect::<Vec<_>>() {
            if self.b.degree(v) > 3 {
                return Err(PipelineError::Internal(format!("degree > 3 survives step 4 at {v}")));
            }
        }
        self.record_step(4, "degree reduction", n0, e0);
        Ok(())
    }

    /// Step 5: tie every degree-2 node to its mirror clone, reaching
    /// 3-regularity.
    pub fn step5_degree_expand(&mut self) -> Result<(), PipelineError> {
        let (n0, e0) = (self.b.node_count(), self.b.edge_count());
        let mut deg2: Vec<NodeId> = Vec::new();
        for v in self.b.node_ids() {
            match self.b.degree(v) {
                0 | 1 => {
                    return Err(PipelineError::Internal(format!(
                        "node {v} has degree {} before expansion",
                        self.b.degree(v)
                    )))
                }
                2 => deg2.push(v),
                _ => {}
            }
        }
        let deg2set: BTreeSet<NodeId> = deg2.iter().copied().collect();
        let mut linked: BTreeSet<NodeId> = BTreeSet::new();
        for &v in &deg2 {
            if linked.contains(&v) {
                continue;
            }
            let clone = *self.clone_of.get(&v).ok_or_else(|| {
                PipelineError::Internal(format!("degree-2 node {v} has no mirror clone"))
            })?;
            if !deg2set.contains(&clone) {
                return Err(PipelineError::Internal(format!(
                    "mirror {clone} of degree-2 node {v} has degree {}",
                    self.b.degree(clone)
                )));
            }
            linked.insert(v);
            linked.insert(clone);
            let group = self.group_counter;
            self.group_counter += 1;
            let since = self.next_node_id();
            let tag = format!("expand.n{}", v.0);
            let chain = connect_neq_chain(&mut self.b, v, clone, 1, &format!("s5.{tag}"))?;
            self.tag_new_nodes(since, 5, &tag);
            self.arcs.push(ArcRec { a: v, b: clone, chain, kind: ArcKind::CloneLink, group });
        }
        let g = self.b.snapshot();
        if !check_regular(&g, 3) {
            return Err(PipelineError::Internal("graph not 3-regular after step 5".into()));
        }
        self.record_step(5, "degree expansion", n0, e0);
        Ok(())
    }

    /// Cluster order on the spine: breadth-first over the clause graph from
    /// clause 0, neighbors in ascending index order. Keeps clauses that
    /// share variables near each other, which keeps equality wires short.
    fn cluster_order(&self) -> Vec<usize> {
        let adj = self.f.clause_graph();
        let m = adj.len();
        let mut order = Vec::with_capacity(m);
        let mut seen = vec![false; m];
        let mut queue = std::collections::VecDeque::new();
        for start in 0..m {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            while let Some(j) = queue.pop_front() {
                order.push(j);
                for &w in &adj[j] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        order
    }

    /// Spine sequence: primary clusters in BFS clause order (paths in slot
    /// order, each followed by its connectors), then the mirrored clone
    /// half.
    fn spine_sequence(&self) -> (Vec<NodeId>, Vec<(String, Vec<NodeId>)>) {
        let mut primary: Vec<NodeId> = Vec::new();
        let mut blocks: Vec<(String, Vec<NodeId>)> = Vec::new();
        for j in self.cluster_order() {
            let mut cluster_nodes = Vec::new();
            for slot in 0..3 {
                let occ_idx = (0..self.occs.len())
                    .find(|&i| {
                        let o = &self.occs[i];
                        o.copy == CopyTag::Primary && o.clause == j && o.slot == slot
                    })
                    .unwrap();
                let path = &self.paths[self.occs[occ_idx].path.unwrap()];
                cluster_nodes.extend(path.nodes.iter().copied());
                // Connector pairs ride immediately after the path whose
                // chain they continue, keeping equality arcs short.
                for c in self.conns.iter().filter(|c| {
                    c.copy == CopyTag::Primary && c.left_occ == occ_idx
                }) {
                    cluster_nodes.push(c.m1);
                    cluster_nodes.push(c.m2);
                }
            }
            blocks.push((format!("clause{j}"), cluster_nodes.clone()));
            primary.extend(cluster_nodes);
        }
        let mut spine = primary.clone();
        let mut clone_half: Vec<NodeId> =
            primary.iter().rev().map(|n| self.clone_of[n]).collect();
        let mut clone_blocks: Vec<(String, Vec<NodeId>)> = blocks
            .iter()
            .rev()
            .map(|(label, nodes)| {
                (
                    format!("{label}.clone"),
                    nodes.iter().rev().map(|n| self.clone_of[n]).collect(),
                )
            })
            .collect();
        spine.append(&mut clone_half);
        blocks.append(&mut clone_blocks);
        (spine, blocks)
    }

    /// Step 6: one-page layout, wire expansion, crossover insertion, and
    /// rotation assembly.
    pub fn step6_planarize(&mut self) -> Result<(LayoutIR, RotationSystem), PipelineError> {
        let (n0, e0) = (self.b.node_count(), self.b.edge_count());
        let (spine, blocks) = self.spine_sequence();
        let spine_index: BTreeMap<NodeId, usize> =
            spine.iter().enumerate().map(|(i, n)| (*n, i)).collect();

        // Stub lists per spine node: (arc index, endpoint node, partner).
        #[derive(Clone, Copy)]
        struct Stub {
            arc: usize,
            partner: NodeId,
        }
        let mut stubs: BTreeMap<NodeId, Vec<Stub>> = BTreeMap::new();
        for (i, arc) in self.arcs.iter().enumerate() {
            stubs.entry(arc.a).or_default().push(Stub { arc: i, partner: arc.b });
            stubs.entry(arc.b).or_default().push(Stub { arc: i, partner: arc.a });
        }
        for (node, list) in stubs.iter_mut() {
            let own = spine_index
                .get(node)
                .copied()
                .ok_or_else(|| PipelineError::Internal(format!("{node} not on the spine")))?;
            list.sort_by_key(|s| {
                let p = spine_index[&s.partner];
                let left = p < own;
                // Left partners first; both groups by descending partner
                // position; parallel arcs tie-break by side.
                let tie = if left { usize::MAX - s.arc } else { s.arc };
                (!left as u8, usize::MAX - p, tie)
            });
        }

        // Port enumeration in spine order.
        let mut port_of: BTreeMap<(usize, NodeId), usize> = BTreeMap::new();
        let mut cluster_infos: Vec<ClusterInfo> = Vec::new();
        let mut port = 0usize;
        {
            let mut block_iter = blocks.iter();
            let mut cur_block = block_iter.next();
            let mut covered = 0usize;
            let mut block_start = 0usize;
            for (i, node) in spine.iter().enumerate() {
                if let Some((label, nodes)) = cur_block {
                    if i == covered + nodes.len() {
                        cluster_infos.push(ClusterInfo {
                            label: label.clone(),
                            first_port: block_start,
                            port_count: port - block_start,
                        });
                        covered += nodes.len();
                        block_start = port;
                        cur_block = block_iter.next();
                    }
                }
                if let Some(list) = stubs.get(node) {
                    for s in list {
                        port_of.insert((s.arc, *node), port);
                        port += 1;
                    }
                }
            }
            if let Some((label, _)) = cur_block {
                cluster_infos.push(ClusterInfo {
                    label: label.clone(),
                    first_port: block_start,
                    port_count: port - block_start,
                });
            }
        }
        let port_count = port;

        // Arc spans and heights.
        let n_arcs = self.arcs.len();
        let mut lo = vec![0usize; n_arcs];
        let mut hi = vec![0usize; n_arcs];
        let mut a_is_lo = vec![true; n_arcs];
        for (i, arc) in self.arcs.iter().enumerate() {
            let pa = port_of[&(i, arc.a)];
            let pb = port_of[&(i, arc.b)];
            if pa < pb {
                lo[i] = pa;
                hi[i] = pb;
                a_is_lo[i] = true;
            } else {
                lo[i] = pb;
                hi[i] = pa;
                a_is_lo[i] = false;
            }
        }
        let mut by_span: Vec<usize> = (0..n_arcs).collect();
        by_span.sort_by_key(|&i| (hi[i] - lo[i], lo[i]));
        let mut height = vec![0usize; n_arcs];
        for (rank, &i) in by_span.iter().enumerate() {
            height[i] = rank;
        }

        // Crossings: exactly one per interleaving pair, at the higher
        // wire's vertical inside the lower wire's span.
        #[derive(Clone, Copy)]
        struct Crossing {
            low: usize,
            high: usize,
            x: usize,
            up_leg: bool,
        }
        let mut crossings: Vec<Crossing> = Vec::new();
        for i in 0..n_arcs {
            for j in i + 1..n_arcs {
                let interleave = (lo[i] < lo[j] && lo[j] < hi[i] && hi[i] < hi[j])
                    || (lo[j] < lo[i] && lo[i] < hi[j] && hi[j] < hi[i]);
                if !interleave {
                    continue;
                }
                let (low, high) = if height[i] < height[j] { (i, j) } else { (j, i) };
                let (x, up_leg) = if lo[low] < lo[high] && lo[high] < hi[low] {
                    (lo[high], true)
                } else {
                    (hi[high], false)
                };
                crossings.push(Crossing { low, high, x, up_leg });
            }
        }
        self.stats.crossings = crossings.len();

        // Ordered event list per arc. Traversal order from lo to hi:
        // up-leg crossings by the other arc's height ascending, horizontal
        // crossings by x ascending, down-leg by height descending.
        let mut events: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_arcs]; // (key, crossing idx)
        for (ci, c) in crossings.iter().enumerate() {
            // On the low arc: horizontal event.
            events[c.low].push((1 << 30 | c.x, ci));
            // On the high arc: vertical event.
            if c.up_leg {
                events[c.high].push((height[c.low], ci));
            } else {
                events[c.high].push((2 << 30 | (usize::MAX - height[c.low]), ci));
            }
        }
        for list in events.iter_mut() {
            list.sort();
        }

        // Wire expansion: a chain of L gadgets exposes L+1 crossable edges.
        for (i, list) in events.iter().enumerate() {
            let t = list.len();
            let need = t.saturating_sub(1).max(1);
            let have = self.arcs[i].chain.gadgets.len();
            if need > have {
                let since = self.next_node_id();
                let tag = format!("expandwire.a{i}");
                let mut chain = self.arcs[i].chain.clone();
                extend_neq_chain(&mut self.b, &mut chain, need - have, &format!("s6.{tag}"))?;
                self.tag_new_nodes(since, 6, &tag);
                self.arcs[i].chain = chain;
            }
            if self.arcs[i].chain.gadgets.len() + 1 < t {
                return Err(PipelineError::Internal(format!(
                    "arc {i} has {t} crossings but only {} crossable edges",
                    self.arcs[i].chain.gadgets.len() + 1
                )));
            }
        }

        // Rotation assembly for the crossover-free graph.
        let mut rot = RotationSystem::default();

        // Cluster path nodes and connectors.
        let path_neighbors: BTreeMap<NodeId, (Option<NodeId>, Option<NodeId>)> = {
            let mut m = BTreeMap::new();
            for path in &self.paths {
                for (i, &n) in path.nodes.iter().enumerate() {
                    let prev = if i > 0 { Some(path.nodes[i - 1]) } else { None };
                    let next = path.nodes.get(i + 1).copied();
                    m.insert(n, (prev, next));
                }
            }
            // Connector pairs sit on the spine joined by a plain edge.
            for c in &self.conns {
                m.insert(c.m1, (None, Some(c.m2)));
                m.insert(c.m2, (Some(c.m1), None));
            }
            m
        };
        let chord_of: BTreeMap<NodeId, NodeId> = {
            let mut m = BTreeMap::new();
            for path in &self.paths {
                for &(split, ext) in &path.attachments {
                    let is_stub = matches!(
                        self.b.node(ext).map(|d| &d.role),
                        Some(Role::NeqInternal)
                    );
                    if !is_stub {
                        m.insert(split, ext);
                    }
                }
            }
            m
        };
        for &node in &spine {
            let mut cycle: Vec<NodeId> = Vec::new();
            if let Some(list) = stubs.get(&node) {
                for s in list.iter().rev() {
                    let arc = &self.arcs[s.arc];
                    let stub_nbr = if arc.a == node {
                        arc.chain.gadgets[0].nodes.r
                    } else {
                        arc.chain.gadgets.last().unwrap().nodes.s
                    };
                    cycle.push(stub_nbr);
                }
            }
            let (p, n) = path_neighbors.get(&node).copied().unwrap_or((None, None));
            let own = spine_index[&node];
            let (west, east) = match (p, n) {
                (Some(a), Some(b)) => {
                    if spine_index[&a] < spine_index[&b] {
                        (Some(a), Some(b))
                    } else {
                        (Some(b), Some(a))
                    }
                }
                (Some(a), None) | (None, Some(a)) => {
                    if spine_index[&a] < own {
                        (Some(a), None)
                    } else {
                        (None, Some(a))
                    }
                }
                (None, None) => (None, None),
            };
            if let Some(w) = west {
                cycle.push(w);
            }
            if let Some(&c) = chord_of.get(&node) {
                cycle.push(c);
            }
            if let Some(e) = east {
                cycle.push(e);
            }
            rot.set(node, cycle);
        }

        // Clause centers: spokes in slot order 1, 0, 2; mirrored for clones.
        for c in &self.centers {
            let mut spokes: BTreeMap<usize, NodeId> = BTreeMap::new();
            for nb in self.b.neighbors(c.node) {
                let occ_idx = self.occ_of_node.get(&nb).copied().ok_or_else(|| {
                    PipelineError::Internal(format!("center {} neighbor {nb} not a split", c.node))
                })?;
                spokes.insert(self.occs[occ_idx].slot, nb);
            }
            let mut cycle = vec![spokes[&1], spokes[&0], spokes[&2]];
            if c.copy == CopyTag::Clone {
                cycle.reverse();
            }
            rot.set(c.node, cycle);
        }

        // Wire gadget internals.
        for arc in &self.arcs {
            for g in &arc.chain.gadgets {
                for (n, cycle) in g.internal_rotations() {
                    rot.set(n, cycle);
                }
            }
        }

        // Crossable edge consumption order along each arc, oriented west to
        // east (lo to hi).
        let oriented: Vec<Vec<(NodeId, NodeId)>> = (0..n_arcs)
            .map(|i| {
                let edges = self.arcs[i].chain.crossable_edges();
                if a_is_lo[i] {
                    edges
                } else {
                    edges.into_iter().rev().map(|(u, v)| (v, u)).collect()
                }
            })
            .collect();
        let mut edge_for_crossing: BTreeMap<usize, ((NodeId, NodeId), (NodeId, NodeId))> =
            BTreeMap::new();
        {
            let mut used: Vec<usize> = vec![0; n_arcs];
            // Assign per-arc in event order first.
            let mut assign: BTreeMap<(usize, usize), (NodeId, NodeId)> = BTreeMap::new();
            for (arc_idx, list) in events.iter().enumerate() {
                for &(_, ci) in list {
                    let e = oriented[arc_idx][used[arc_idx]];
                    used[arc_idx] += 1;
                    assign.insert((arc_idx, ci), e);
                }
            }
            for (ci, c) in crossings.iter().enumerate() {
                let we = assign[&(c.low, ci)];
                let sn_raw = assign[&(c.high, ci)];
                // Orient the high arc's edge south-to-north.
                let sn = if c.up_leg { sn_raw } else { (sn_raw.1, sn_raw.0) };
                edge_for_crossing.insert(ci, (we, sn));
            }
        }

        // Splice crossovers in deterministic order.
        let mut order: Vec<usize> = (0..crossings.len()).collect();
        order.sort_by_key(|&ci| {
            let c = &crossings[ci];
            (c.low.min(c.high), c.low.max(c.high), c.x)
        });
        for ci in order {
            let (we, sn) = edge_for_crossing[&ci];
            let since = self.next_node_id();
            let tag = format!("crossover.x{ci}");
            let inst = apply_crossover(&mut self.b, we, sn, &format!("s6.{tag}"))?;
            self.tag_new_nodes(since, 6, &tag);
            for (node, old, new) in inst.terminal_slot_updates() {
                if !rot.replace_slot(node, old, new) {
                    return Err(PipelineError::Internal(format!(
                        "rotation slot {old} missing at {node}"
                    )));
                }
            }
            for (n, cycle) in inst.internal_rotations() {
                rot.set(n, cycle);
            }
            self.stats.crossovers += 1;
        }

        // Layout IR.
        let mut wires = Vec::with_capacity(n_arcs);
        for i in 0..n_arcs {
            let arc = &self.arcs[i];
            let parity = match arc.kind {
                ArcKind::EqHalf => WireParity::Equality,
                ArcKind::CloneLink => WireParity::Inequality,
            };
            let crossing_list: Vec<(usize, usize)> = events[i]
                .iter()
                .map(|&(_, ci)| {
                    let c = &crossings[ci];
                    let other = if c.low == i { c.high } else { c.low };
                    (other, c.x)
                })
                .collect();
            wires.push(WireInfo {
                arc: i,
                a_port: lo[i],
                b_port: hi[i],
                parity,
                group: arc.group,
                crossings: crossing_list,
                crossable_count: self.arcs[i].chain.gadgets.len() + 1,
            });
        }
        let layout = LayoutIR { clusters: cluster_infos, wires, port_count };
        self.stats.arcs = n_arcs;

        self.record_step(6, "planarize", n0, e0);
        if self.cfg.dump_steps.contains(&6) {
            // Replace the rotation-less dump with a full one.
            self.dumps.pop();
            self.dumps.push((6, emit_graph(&self.b.snapshot(), Some(&rot), None)));
        }
        Ok((layout, rot))
    }

    /// Runs the remaining steps and validates every output invariant.
    pub fn finish(mut self) -> Result<ReductionOutput, PipelineError> {
        if self.step_done == 0 {
            self.step1_clause_gadgets()?;
        }
        if self.step_done == 1 {
            self.step2_connect_shared()?;
        }
        if self.step_done == 2 {
            self.step3_duplicate_and_link()?;
        }
        if self.step_done == 3 {
            self.step4_degree_reduce()?;
        }
        if self.step_done == 4 {
            self.step5_degree_expand()?;
        }
        let (layout, rotation) = self.step6_planarize()?;
        let graph = self.b.snapshot();

        if !check_regular(&graph, 3) {
            return Err(PipelineError::InvariantViolated("graph is not 3-regular".into()));
        }
        if graph.node_count() % 2 != 0 {
            return Err(PipelineError::InvariantViolated("odd node count".into()));
        }
        if !graph.is_connected() {
            return Err(PipelineError::InvariantViolated("graph is disconnected".into()));
        }
        let (bicon, cuts) = is_biconnected(&graph);
        if !bicon {
            return Err(PipelineError::InvariantViolated(format!(
                "graph is not biconnected (articulation nodes: {cuts:?})"
            )));
        }
        let (_, chi) = embedding_genus(&graph, &rotation)?;
        if chi != 2 {
            return Err(PipelineError::InvariantViolated(format!(
                "rotation system has Euler characteristic {chi}, not 2"
            )));
        }

        // Variable carriers: every split of every primary occurrence.
        let mut var_nodes: BTreeMap<String, Vec<NodeId>> = BTreeMap::new();
        for occ in self.occs.iter().filter(|o| o.copy == CopyTag::Primary) {
            let name = self.f.variables()[occ.var].clone();
            let path = &self.paths[occ.path.unwrap()];
            var_nodes.entry(name).or_default().extend(path.splits.iter().copied());
        }
        let var_reps: BTreeMap<String, NodeId> =
            var_nodes.iter().map(|(k, v)| (k.clone(), v[0])).collect();

        self.stats.final_nodes = graph.node_count();
        self.stats.final_edges = graph.edge_count();

        Ok(ReductionOutput {
            graph,
            rotation,
            var_reps,
            var_nodes,
            provenance: self.prov,
            stats: self.stats,
            layout,
            source: self.f,
            dumps: self.dumps,
        })
    }
}

/// Full pipeline. The formula must already be clause-connected.
pub fn reduce(f: &Formula, cfg: &PipelineConfig) -> Result<ReductionOutput, PipelineError> {
    PipelineBuilder::new(f, cfg)?.finish()
}

/// Reads a satisfying assignment off a valid 2-coloring: each variable takes
/// the color of its representative nodes (color 0 = false). Errors if the
/// carriers of any variable disagree, which would certify a pipeline bug.
pub fn lift_coloring(out: &ReductionOutput, col: &Coloring) -> Result<Assignment, PipelineError> {
    if col.k != 2 {
        return Err(PipelineError::WrongPalette(col.k));
    }
    match verify_pm_coloring(&out.graph, col)? {
        PmVerdict::Valid => {}
        PmVerdict::Violations(_) => return Err(PipelineError::InvalidColoring),
    }
    let mut asg = Assignment::new();
    for (var, nodes) in &out.var_nodes {
        let first = col.get(nodes[0]).unwrap();
        if nodes.iter().any(|n| col.get(*n) != Some(first)) {
            return Err(PipelineError::RepresentativeDisagreement(var.clone()));
        }
        asg.insert(var.clone(), first == 1);
    }
    Ok(asg)
}

/// Extends a satisfying assignment to a full valid coloring by seeding the
/// variable carriers and completing with the solver.
pub fn push_assignment(
    out: &ReductionOutput,
    asg: &Assignment,
) -> Result<Coloring, PipelineError> {
    for var in out.source.variables() {
        if !asg.contains_key(var) {
            return Err(PipelineError::AssignmentMissingVariable(var.clone()));
        }
    }
    match out.source.is_satisfying(asg) {
        Ok(true) => {}
        Ok(false) => return Err(PipelineError::AssignmentUnsatisfying),
        Err(e) => return Err(PipelineError::AssignmentMissingVariable(e.to_string())),
    }
    let mut req = SolveRequest {
        graph: &out.graph,
        k: 2,
        seeds: BTreeMap::new(),
        mode: SolveMode::Decide,
        budgets: Budgets::default(),
    };
    for (var, nodes) in &out.var_nodes {
        let c = if asg[var] { 1 } else { 0 };
        for &n in nodes {
            req.seeds.insert(n, c);
        }
    }
    let result = solve(&req).map_err(|e| PipelineError::PushFailed(e.to_string()))?;
    match result.status {
        SolveStatus::Sat(col) => Ok(col),
        SolveStatus::Unsat => Err(PipelineError::PushFailed(
            "seeded search refuted a satisfying assignment".into(),
        )),
        SolveStatus::BudgetExceeded => {
            Err(PipelineError::PushFailed("search budget exceeded".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{brute_force_nae, parse_formula};

    fn formula(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        let empty = Formula::default();
        assert!(matches!(
            reduce(&empty, &PipelineConfig::default()),
            Err(PipelineError::EmptyFormula)
        ));
        let disconnected = formula("nae a b c\nnae d e f");
        assert!(matches!(
            reduce(&disconnected, &PipelineConfig::default()),
            Err(PipelineError::NotClauseConnected)
        ));
        let unused = formula("vars a b c d\nnae a b c");
        assert!(matches!(
            reduce(&unused, &PipelineConfig::default()),
            Err(PipelineError::UnusedVariable(_))
        ));
    }

    #[test]
    fn step1_counts() {
        let f = formula("nae a b c");
        let mut p = PipelineBuilder::new(&f, &PipelineConfig::default()).unwrap();
        p.step1_clause_gadgets().unwrap();
        assert_eq!(p.b.node_count(), 4);
        assert_eq!(p.b.edge_count(), 6);

        let f3 = formula("nae a b c\nnae c d e\nnae e f a");
        let mut p3 = PipelineBuilder::new(&f3, &PipelineConfig::default()).unwrap();
        p3.step1_clause_gadgets().unwrap();
        assert_eq!(p3.b.node_count(), 12);
    }

    #[test]
    fn step1_duplicate_variable_distinct_nodes() {
        let f = formula("nae a a b");
        let mut p = PipelineBuilder::new(&f, &PipelineConfig::default()).unwrap();
        p.step1_clause_gadgets().unwrap();
        let g = p.b.snapshot();
        let a_nodes: Vec<NodeId> = g
            .nodes()
            .filter(|(_, d)| d.role == Role::Variable("a".into()))
            .map(|(id, _)| id)
            .collect();
        assert_eq!(a_nodes.len(), 2);
    }

    #[test]
    fn step2_chain_counts() {
        let f = formula("nae a b c\nnae c d e");
        let mut p = PipelineBuilder::new(&f, &PipelineConfig::default()).unwrap();
        p.step1_clause_gadgets().unwrap();
        let before = p.b.node_count();
        p.step2_connect_shared().unwrap();
        // One chain: 2 gadgets (16 internal) + the matched connector pair.
        assert_eq!(p.b.node_count() - before, 18);
        assert_eq!(p.arcs.len(), 2);

        // A variable in a single clause gets no chain.
        let f1 = formula("nae a b c");
        let mut p1 = PipelineBuilder::new(&f1, &PipelineConfig::default()).unwrap();
        p1.step1_clause_gadgets().unwrap();
        let before = p1.b.node_count();
        p1.step2_connect_shared().unwrap();
        assert_eq!(p1.b.node_count(), before);
    }

    #[test]
    fn step2_three_occurrences_two_chains() {
        let f = formula("nae a b c\nnae a d e\nnae a f g");
        let mut p = PipelineBuilder::new(&f, &PipelineConfig::default()).unwrap();
        p.step1_clause_gadgets().unwrap();
        p.step2_connect_shared().unwrap();
        assert_eq!(p.conns.len(), 2);
        assert_eq!(p.arcs.len(), 4);
        // Occurrence degree rises by at most 2.
        for occ in &p.occs {
            assert!(p.b.degree(occ.node) <= 5);
        }
    }

    #[test]
    fn step3_doubles_and_links() {
        let f = formula("nae a b c");
        let mut p = PipelineBuilder::new(&f, &PipelineConfig::default()).unwrap();
        p.step1_clause_gadgets().unwrap();
        p.step2_connect_shared().unwrap();
        let before = p.b.node_count();
        p.step3_duplicate_and_link().unwrap();
        // Doubling plus one 8-node gadget per variable occurrence.
        assert_eq!(p.b.node_count(), 2 * before + 3 * 8);
        assert!(p.b.snapshot().is_connected());
        // Variable nodes now have degree 4.
        for occ in &p.occs {
            assert_eq!(p.b.degree(occ.node), 4);
        }
    }

    #[test]
    fn step4_and_5_audits() {
        let f = formula("nae a b c\nnae c d e");
        let mut p = PipelineBuilder::new(&f, &PipelineConfig::default()).unwrap();
        p.step1_clause_gadgets().unwrap();
        p.step2_connect_shared().unwrap();
        p.step3_duplicate_and_link().unwrap();
        // Shared variable c occurs twice: degree 3 + 1 chain + 1 clone = 5.
        let c_first = p
            .occs
            .iter()
            .find(|o| {
                o.copy == CopyTag::Primary && p.f.variables()[o.var] == "c" && o.clause == 0
            })
            .unwrap()
            .node;
        assert_eq!(p.b.degree(c_first), 5);
        p.step4_degree_reduce().unwrap();
        for v in p.b.node_ids() {
            assert!(p.b.degree(v) <= 3);
        }
        // The 5-way split produced 5 splits.
        let c_path = p
            .paths
            .iter()
            .find(|path| {
                let o = &p.occs[path.occ];
                o.copy == CopyTag::Primary && p.f.variables()[o.var] == "c" && o.clause == 0
            })
            .unwrap();
        assert_eq!(c_path.splits.len(), 5);

        let deg2: Vec<NodeId> =
            p.b.node_ids().filter(|&v| p.b.degree(v) == 2).collect();
        assert!(!deg2.is_empty());
        let expected_links = deg2.len() / 2;
        let arcs_before = p.arcs.len();
        p.step5_degree_expand().unwrap();
        assert!(check_regular(&p.b.snapshot(), 3));
        assert_eq!(p.arcs.len() - arcs_before, expected_links);
    }

    #[test]
    fn single_clause_output_is_valid() {
        let f = formula("nae a b c");
        let out = reduce(&f, &PipelineConfig::default()).unwrap();
        assert_eq!(out.stats.crossovers, 0);
        assert_eq!(out.graph.node_count(), 368);
        assert_eq!(out.graph.edge_count(), 552);
        assert!(check_regular(&out.graph, 3));
        let (bicon, _) = is_biconnected(&out.graph);
        assert!(bicon);
        let (_, chi) = embedding_genus(&out.graph, &out.rotation).unwrap();
        assert_eq!(chi, 2);
    }

    #[test]
    fn two_clause_shared_variable_output() {
        let f = formula("nae a b c\nnae c d e");
        let out = reduce(&f, &PipelineConfig::default()).unwrap();
        assert!(check_regular(&out.graph, 3));
        assert_eq!(out.graph.node_count() % 2, 0);
        let (bicon, cuts) = is_biconnected(&out.graph);
        assert!(bicon, "articulation nodes: {cuts:?}");
        let (_, chi) = embedding_genus(&out.graph, &out.rotation).unwrap();
        assert_eq!(chi, 2);
        // Exactly one equality wire between the two occurrences of c.
        let eq_groups: BTreeSet<usize> = out
            .layout
            .wires
            .iter()
            .filter(|w| w.parity == WireParity::Equality)
            .map(|w| w.group)
            .collect();
        assert_eq!(eq_groups.len(), 2, "one equality wire per copy");
    }

    #[test]
    fn determinism_byte_identical() {
        let f = formula("nae a b c\nnae c d e");
        let out1 = reduce(&f, &PipelineConfig::default()).unwrap();
        let out2 = reduce(&f, &PipelineConfig::default()).unwrap();
        let t1 = emit_graph(&out1.graph, Some(&out1.rotation), None);
        let t2 = emit_graph(&out2.graph, Some(&out2.rotation), None);
        assert_eq!(t1, t2);
    }

    #[test]
    fn lift_and_push_roundtrip_single_clause() {
        let f = formula("nae a b c");
        let out = reduce(&f, &PipelineConfig::default()).unwrap();
        for asg in brute_force_nae(&f, usize::MAX).unwrap() {
            let col = push_assignment(&out, &asg).unwrap();
            assert!(crate::solver::coloring_is_valid(&out.graph, &col));
            let lifted = lift_coloring(&out, &col).unwrap();
            assert_eq!(lifted, asg);
        }
    }

    #[test]
    fn push_rejects_unsatisfying_assignment() {
        let f = formula("nae a b c");
        let out = reduce(&f, &PipelineConfig::default()).unwrap();
        let mut asg = Assignment::new();
        for v in f.variables() {
            asg.insert(v.clone(), true);
        }
        assert!(matches!(
            push_assignment(&out, &asg),
            Err(PipelineError::AssignmentUnsatisfying)
        ));
    }

    #[test]
    fn lift_rejects_invalid_coloring() {
        let f = formula("nae a b c");
        let out = reduce(&f, &PipelineConfig::default()).unwrap();
        let mut col = Coloring::new(2);
        for v in out.graph.node_ids() {
            col.set(v, 0);
        }
        assert!(matches!(
            lift_coloring(&out, &col),
            Err(PipelineError::InvalidColoring)
        ));
    }
}
