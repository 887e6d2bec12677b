//! Small named graphs used as fixtures by tests and cross-checks.

use crate::graph::{Graph, GraphBuilder, NodeId, Role};

pub fn path(n: usize) -> Graph {
    let mut b = GraphBuilder::new();
    let ids: Vec<NodeId> = (0..n).map(|_| b.add_node(Role::Other, None)).collect();
    for i in 0..n.saturating_sub(1) {
        b.add_edge(ids[i], ids[i + 1]).unwrap();
    }
    b.seal()
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3);
    let mut b = GraphBuilder::new();
    let ids: Vec<NodeId> = (0..n).map(|_| b.add_node(Role::Other, None)).collect();
    for i in 0..n {
        b.add_edge(ids[i], ids[(i + 1) % n]).unwrap();
    }
    b.seal()
}

pub fn complete(n: usize) -> Graph {
    let mut b = GraphBuilder::new();
    let ids: Vec<NodeId> = (0..n).map(|_| b.add_node(Role::Other, None)).collect();
    for i in 0..n {
        for j in i + 1..n {
            b.add_edge(ids[i], ids[j]).unwrap();
        }
    }
    b.seal()
}

pub fn cube() -> Graph {
    let mut b = GraphBuilder::new();
    let ids: Vec<NodeId> = (0..8).map(|_| b.add_node(Role::Other, None)).collect();
    for (u, v) in [
        (0, 1), (1, 2), (2, 3), (3, 0),
        (4, 5), (5, 6), (6, 7), (7, 4),
        (0, 4), (1, 5), (2, 6), (3, 7),
    ] {
        b.add_edge(ids[u], ids[v]).unwrap();
    }
    b.seal()
}

pub fn petersen() -> Graph {
    let mut b = GraphBuilder::new();
    let ids: Vec<NodeId> = (0..10).map(|_| b.add_node(Role::Other, None)).collect();
    for i in 0..5 {
        b.add_edge(ids[i], ids[(i + 1) % 5]).unwrap();
        b.add_edge(ids[i], ids[i + 5]).unwrap();
        b.add_edge(ids[i + 5], ids[(i + 2) % 5 + 5]).unwrap();
    }
    b.seal()
}

/// Two triangles sharing a single node (the smallest graph with a cut node
/// where both sides are cycles).
pub fn bowtie() -> Graph {
    let mut b = GraphBuilder::new();
    let ids: Vec<NodeId> = (0..5).map(|_| b.add_node(Role::Other, None)).collect();
    for (u, v) in [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)] {
        b.add_edge(ids[u], ids[v]).unwrap();
    }
    b.seal()
}
