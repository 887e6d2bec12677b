//! Reduction from 2-colorable to k-colorable perfect matching: attach a
//! (k-2)-color gadget and join its even nodes to every original node. The
//! gadget burns k-2 colors, so original nodes keep exactly two.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::gadgets::{build_k_minus_2_gadget, GadgetError};
use crate::graph::{
    verify_pm_coloring, Coloring, Graph, GraphBuilder, GraphError, NodeId, PmVerdict, Role,
};

#[derive(Debug, Error)]
pub enum KReduceError {
    #[error("palette size must be at least 3, got {0}")]
    PaletteTooSmall(u8),
    #[error("input graph is empty")]
    EmptyGraph,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error("coloring invalid on the reduced graph")]
    InvalidColoring,
    #[error("original node {0} uses a gadget color {1}")]
    OriginalUsesGadgetColor(u32, u8),
    #[error("original nodes use more than two colors")]
    TooManyOriginalColors,
    #[error("coloring invalid on the original graph")]
    InvalidSourceColoring,
}

#[derive(Debug, Clone)]
pub struct KReductionOutput {
    pub graph: Graph,
    /// Even gadget nodes, in path order; these join to every original node.
    pub even_nodes: Vec<NodeId>,
    /// All gadget path nodes in path order.
    pub gadget_nodes: Vec<NodeId>,
    /// Nodes of the original graph (ids preserved).
    pub original_nodes: Vec<NodeId>,
    pub k: u8,
}

/// Builds the k-CPM instance: original graph, (k-2)-color gadget, and the
/// complete join between even gadget nodes and all original nodes.
pub fn reduce_k(g: &Graph, k: u8) -> Result<KReductionOutput, KReduceError> {
    if k < 3 {
        return Err(KReduceError::PaletteTooSmall(k));
    }
    if g.node_count() == 0 {
        return Err(KReduceError::EmptyGraph);
    }
    let mut b = GraphBuilder::new();
    let mut map = std::collections::BTreeMap::new();
    for (id, data) in g.nodes() {
        let new = b.add_node(data.role.clone(), data.origin.clone());
        map.insert(id, new);
    }
    for (u, v) in g.edges() {
        b.add_edge(map[&u], map[&v])?;
    }
    let inst = build_k_minus_2_gadget(&mut b, k as usize, "kreduce")?;
    for &e in &inst.evens {
        for (_, orig) in map.iter() {
            b.add_edge(e, *orig)?;
        }
    }
    Ok(KReductionOutput {
        graph: b.seal(),
        even_nodes: inst.evens,
        gadget_nodes: inst.path,
        original_nodes: map.values().copied().collect(),
        k,
    })
}

/// Restricts a valid k-coloring of the reduced graph to the original nodes
/// and renames their two colors to {0, 1} (lower original color -> 0).
pub fn lift_k_coloring(out: &KReductionOutput, col: &Coloring) -> Result<Coloring, KReduceError> {
    match verify_pm_coloring(&out.graph, col)? {
        PmVerdict::Valid => {}
        PmVerdict::Violations(_) => return Err(KReduceError::InvalidColoring),
    }
    let gadget_colors: BTreeSet<u8> = out
        .even_nodes
        .iter()
        .map(|v| col.get(*v).unwrap())
        .collect();
    let mut used = BTreeSet::new();
    for &v in &out.original_nodes {
        let c = col.get(v).unwrap();
        if gadget_colors.contains(&c) {
            return Err(KReduceError::OriginalUsesGadgetColor(v.0, c));
        }
        used.insert(c);
    }
    if used.len() > 2 {
        return Err(KReduceError::TooManyOriginalColors);
    }
    let mut sorted: Vec<u8> = used.into_iter().collect();
    sorted.sort_unstable();
    let mut lifted = Coloring::new(2);
    for &v in &out.original_nodes {
        let c = col.get(v).unwrap();
        let idx = sorted.iter().position(|&s| s == c).unwrap() as u8;
        lifted.set(v, idx);
    }
    Ok(lifted)
}

/// Extends a valid 2-coloring of the original graph to the reduced graph:
/// originals keep their colors, gadget evens take colors 2..k-1 in index
/// order, odd path nodes copy their even partner.
pub fn push_k_coloring(out: &KReductionOutput, col2: &Coloring) -> Result<Coloring, KReduceError> {
    // Validate against the original subgraph.
    let mut source = GraphBuilder::new();
    let mut map = std::collections::BTreeMap::new();
    for &v in &out.original_nodes {
        map.insert(v, source.add_node(Role::Other, None));
    }
    for (u, v) in out.graph.edges() {
        if map.contains_key(&u) && map.contains_key(&v) {
            source.add_edge(map[&u], map[&v])?;
        }
    }
    let source = source.seal();
    let mut src_col = Coloring::new(2);
    for &v in &out.original_nodes {
        let c = col2.get(v).ok_or(KReduceError::InvalidSourceColoring)?;
        src_col.set(map[&v], c);
    }
    match verify_pm_coloring(&source, &src_col)? {
        PmVerdict::Valid => {}
        PmVerdict::Violations(_) => return Err(KReduceError::InvalidSourceColoring),
    }

    let mut full = Coloring::new(out.k);
    for &v in &out.original_nodes {
        full.set(v, col2.get(v).unwrap());
    }
    for (i, &e) in out.even_nodes.iter().enumerate() {
        let c = 2 + i as u8;
        full.set(e, c);
        full.set(out.gadget_nodes[2 * i], c);
    }
    match verify_pm_coloring(&out.graph, &full)? {
        PmVerdict::Valid => Ok(full),
        PmVerdict::Violations(_) => Err(KReduceError::InvalidColoring),
    }
}
