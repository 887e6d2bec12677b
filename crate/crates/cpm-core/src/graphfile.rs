//! Graph file format: a line-oriented structured-text document with
//! deterministic field ordering.
//!
//! ```text
//! cpm-graph v1
//! nodes <N>
//! <id> <role> <origin|->        (sorted by id)
//! edges <M>
//! <u> <v>                       (u < v, sorted)
//! rotation                      (optional)
//! <id>: <nbr> <nbr> ...         (sorted by id, one line per node)
//! coloring <k>                  (optional)
//! <id> <color>                  (sorted by id)
//! end
//! ```
//!
//! Emission is deterministic; `parse(emit(x)) == x` and emission is
//! byte-stable across round trips.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{Coloring, Graph, GraphBuilder, NodeId, Role, RotationSystem};

#[derive(Debug, Error)]
#[error("graph file, line {line}: {msg}")]
pub struct GraphFileError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, GraphFileError> {
    Err(GraphFileError { line, msg: msg.into() })
}

/// Serializes a graph with optional rotation system and coloring.
pub fn emit_graph(g: &Graph, rot: Option<&RotationSystem>, col: Option<&Coloring>) -> String {
    let mut out = String::from("cpm-graph v1\n");
    out.push_str(&format!("nodes {}\n", g.node_count()));
    for (id, data) in g.nodes() {
        let origin = data.origin.as_deref().unwrap_or("-");
        out.push_str(&format!("{} {} {}\n", id, data.role.token(), origin));
    }
    out.push_str(&format!("edges {}\n", g.edge_count()));
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    if let Some(rot) = rot {
        out.push_str("rotation\n");
        for id in g.node_ids() {
            let cycle = rot.get(id).unwrap_or(&[]);
            let parts: Vec<String> = cycle.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!("{}: {}\n", id, parts.join(" ")));
        }
    }
    if let Some(col) = col {
        out.push_str(&format!("coloring {}\n", col.k));
        for (id, c) in &col.colors {
            out.push_str(&format!("{id} {c}\n"));
        }
    }
    out.push_str("end\n");
    out
}

/// Parses the graph file format back into its three parts.
pub fn parse_graph(
    text: &str,
) -> Result<(Graph, Option<RotationSystem>, Option<Coloring>), GraphFileError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (ln, header) = lines.next().ok_or(GraphFileError { line: 1, msg: "empty file".into() })?;
    if header != "cpm-graph v1" {
        return err(ln, format!("bad header `{header}`"));
    }

    let (ln, nodes_line) =
        lines.next().ok_or(GraphFileError { line: 2, msg: "missing `nodes` section".into() })?;
    let n: usize = match nodes_line.strip_prefix("nodes ") {
        Some(rest) => rest
            .parse()
            .map_err(|_| GraphFileError { line: ln, msg: "bad node count".into() })?,
        None => return err(ln, "expected `nodes <N>`"),
    };

    // Node records, collected before building so ids can be sparse.
    let mut node_recs: Vec<(u32, Role, Option<String>)> = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, line) = lines
            .next()
            .ok_or(GraphFileError { line: usize::MAX, msg: "unexpected end in nodes".into() })?;
        let mut toks = line.split_whitespace();
        let id: u32 = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(GraphFileError { line: ln, msg: "bad node id".into() })?;
        let role_tok = toks.next().ok_or(GraphFileError { line: ln, msg: "missing role".into() })?;
        let role = Role::from_token(role_tok)
            .ok_or(GraphFileError { line: ln, msg: format!("unknown role `{role_tok}`") })?;
        let origin_tok =
            toks.next().ok_or(GraphFileError { line: ln, msg: "missing origin".into() })?;
        if toks.next().is_some() {
            return err(ln, "trailing tokens on node line");
        }
        let origin = if origin_tok == "-" { None } else { Some(origin_tok.to_string()) };
        node_recs.push((id, role, origin));
    }

    // Builder allocates dense ids; remap file ids through a map so sparse
    // inputs still parse, while preserving emitted ids when already dense.
    let max_id = node_recs.iter().map(|(id, _, _)| *id).max();
    let mut b = GraphBuilder::new();
    let mut idmap: BTreeMap<u32, NodeId> = BTreeMap::new();
    if let Some(max_id) = max_id {
        // Allocate up to max id, then drop placeholders not in the file.
        let present: BTreeMap<u32, &(u32, Role, Option<String>)> =
            node_recs.iter().map(|r| (r.0, r)).collect();
        for raw in 0..=max_id {
            let id = b.add_node(Role::Other, None);
            debug_assert_eq!(id.0, raw);
        }
        for raw in 0..=max_id {
            match present.get(&raw) {
                Some((_, role, origin)) => {
                    b.set_role(NodeId(raw), role.clone());
                    if let Some(o) = origin {
                        b.set_origin(NodeId(raw), o.clone());
                    }
                    idmap.insert(raw, NodeId(raw));
                }
                None => {
                    b.remove_node(NodeId(raw)).unwrap();
                }
            }
        }
    }
    if idmap.len() != node_recs.len() {
        return err(0, "duplicate node id");
    }

    let (ln, edges_line) =
        lines.next().ok_or(GraphFileError { line: usize::MAX, msg: "missing `edges`".into() })?;
    let m: usize = match edges_line.strip_prefix("edges ") {
        Some(rest) => rest
            .parse()
            .map_err(|_| GraphFileError { line: ln, msg: "bad edge count".into() })?,
        None => return err(ln, "expected `edges <M>`"),
    };
    for _ in 0..m {
        let (ln, line) = lines
            .next()
            .ok_or(GraphFileError { line: usize::MAX, msg: "unexpected end in edges".into() })?;
        let mut toks = line.split_whitespace();
        let u: u32 = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(GraphFileError { line: ln, msg: "bad edge endpoint".into() })?;
        let v: u32 = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(GraphFileError { line: ln, msg: "bad edge endpoint".into() })?;
        if toks.next().is_some() {
            return err(ln, "trailing tokens on edge line");
        }
        let (un, vn) = match (idmap.get(&u), idmap.get(&v)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return err(ln, format!("edge references unknown node ({u}, {v})")),
        };
        b.add_edge(un, vn)
            .map_err(|e| GraphFileError { line: ln, msg: e.to_string() })?;
    }

    let mut rot: Option<RotationSystem> = None;
    let mut col: Option<Coloring> = None;
    let mut saw_end = false;

    while let Some((ln, line)) = lines.next() {
        if line == "end" {
            saw_end = true;
            break;
        } else if line == "rotation" {
            let mut r = RotationSystem::default();
            for _ in 0..idmap.len() {
                let (ln2, rline) = lines.next().ok_or(GraphFileError {
                    line: usize::MAX,
                    msg: "unexpected end in rotation".into(),
                })?;
                let (head, rest) = rline
                    .split_once(':')
                    .ok_or(GraphFileError { line: ln2, msg: "expected `<id>: ...`".into() })?;
                let id: u32 = head
                    .trim()
                    .parse()
                    .map_err(|_| GraphFileError { line: ln2, msg: "bad node id".into() })?;
                let id = *idmap
                    .get(&id)
                    .ok_or(GraphFileError { line: ln2, msg: format!("unknown node {id}") })?;
                let mut cycle = Vec::new();
                for t in rest.split_whitespace() {
                    let w: u32 = t
                        .parse()
                        .map_err(|_| GraphFileError { line: ln2, msg: "bad rotation entry".into() })?;
                    let w = *idmap
                        .get(&w)
                        .ok_or(GraphFileError { line: ln2, msg: format!("unknown node {w}") })?;
                    cycle.push(w);
                }
                r.set(id, cycle);
            }
            rot = Some(r);
        } else if let Some(rest) = line.strip_prefix("coloring ") {
            let k: u8 = rest
                .parse()
                .map_err(|_| GraphFileError { line: ln, msg: "bad palette size".into() })?;
            let mut c = Coloring::new(k);
            for _ in 0..idmap.len() {
                let (ln2, cline) = lines.next().ok_or(GraphFileError {
                    line: usize::MAX,
                    msg: "unexpected end in coloring".into(),
                })?;
                let mut toks = cline.split_whitespace();
                let id: u32 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or(GraphFileError { line: ln2, msg: "bad node id".into() })?;
                let color: u8 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or(GraphFileError { line: ln2, msg: "bad color".into() })?;
                let id = *idmap
                    .get(&id)
                    .ok_or(GraphFileError { line: ln2, msg: format!("unknown node {id}") })?;
                c.set(id, color);
            }
            col = Some(c);
        } else {
            return err(ln, format!("unexpected line `{line}`"));
        }
    }
    if !saw_end {
        return err(0, "missing `end`");
    }

    Ok((b.seal(), rot, col))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, Role};
    use proptest::prelude::*;

    fn k4_with_roles() -> Graph {
        let mut b = GraphBuilder::new();
        let x = b.add_node(Role::Variable("x".into()), Some("s1.g0".into()));
        let y = b.add_node(Role::Variable("y".into()), Some("s1.g0".into()));
        let z = b.add_node(Role::Variable("z".into()), Some("s1.g0".into()));
        let c = b.add_node(Role::ClauseCenter(0), Some("s1.g0".into()));
        for (u, v) in [(x, y), (x, z), (x, c), (y, z), (y, c), (z, c)] {
            b.add_edge(u, v).unwrap();
        }
        b.seal()
    }

    #[test]
    fn roundtrip_k4() {
        let g = k4_with_roles();
        let text = emit_graph(&g, None, None);
        let (h, rot, col) = parse_graph(&text).unwrap();
        assert_eq!(g, h);
        assert!(rot.is_none() && col.is_none());
    }

    #[test]
    fn roundtrip_with_rotation_and_coloring() {
        let g = k4_with_roles();
        let mut rot = RotationSystem::default();
        rot.set(NodeId(0), vec![NodeId(1), NodeId(3), NodeId(2)]);
        rot.set(NodeId(1), vec![NodeId(2), NodeId(3), NodeId(0)]);
        rot.set(NodeId(2), vec![NodeId(0), NodeId(3), NodeId(1)]);
        rot.set(NodeId(3), vec![NodeId(0), NodeId(1), NodeId(2)]);
        let mut col = Coloring::new(2);
        for (i, c) in [0u8, 0, 1, 1].iter().enumerate() {
            col.set(NodeId(i as u32), *c);
        }
        let text = emit_graph(&g, Some(&rot), Some(&col));
        let (h, rot2, col2) = parse_graph(&text).unwrap();
        assert_eq!(g, h);
        assert_eq!(rot2.as_ref(), Some(&rot));
        assert_eq!(col2.as_ref(), Some(&col));
        // Byte-stable after one pass.
        let text2 = emit_graph(&h, rot2.as_ref(), col2.as_ref());
        assert_eq!(text, text2);
    }

    #[test]
    fn unknown_role_is_error() {
        let text = "cpm-graph v1\nnodes 1\n0 gadget -\nedges 0\nend\n";
        let e = parse_graph(text).unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn bad_edge_reference_is_error() {
        let text = "cpm-graph v1\nnodes 1\n0 other -\nedges 1\n0 7\nend\n";
        let e = parse_graph(text).unwrap_err();
        assert_eq!(e.line, 5);
    }

    proptest! {
        #[test]
        fn roundtrip_random_graphs(
            n in 1usize..10,
            edges in proptest::collection::vec((0usize..10, 0usize..10), 0..30),
            palette in 2u8..6,
        ) {
            let mut b = GraphBuilder::new();
            let roles = [Role::Other, Role::NeqInternal, Role::DegReductionPath];
            let ids: Vec<NodeId> = (0..n)
                .map(|i| b.add_node(roles[i % roles.len()].clone(), Some(format!("t{i}"))))
                .collect();
            for (u, v) in edges {
                let (u, v) = (u % n, v % n);
                if u != v && !b.has_edge(ids[u], ids[v]) {
                    b.add_edge(ids[u], ids[v]).unwrap();
                }
            }
            let g = b.seal();
            let mut col = Coloring::new(palette);
            for (i, id) in ids.iter().enumerate() {
                col.set(*id, (i as u8) % palette);
            }
            let text = emit_graph(&g, None, Some(&col));
            let (h, _, col2) = parse_graph(&text).unwrap();
            prop_assert_eq!(&g, &h);
            prop_assert_eq!(col2, Some(col));
        }
    }
}
