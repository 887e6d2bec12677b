//! DOT export for visualization. One node statement per node, one edge
//! statement per edge, deterministic order.

use crate::graph::{Coloring, Graph};

const PALETTE: [&str; 8] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#ffff33", "#a65628", "#f781bf",
];

pub fn emit_dot(g: &Graph, col: Option<&Coloring>) -> String {
    let mut out = String::from("graph cpm {\n");
    out.push_str("  node [shape=circle];\n");
    for (id, data) in g.nodes() {
        let label = format!("{}:{}", id, data.role.token());
        match col.and_then(|c| c.get(id)) {
            Some(c) => {
                let fill = PALETTE[(c as usize) % PALETTE.len()];
                out.push_str(&format!(
                    "  n{id} [label=\"{label}\", style=filled, fillcolor=\"{fill}\"];\n"
                ));
            }
            None => out.push_str(&format!("  n{id} [label=\"{label}\"];\n")),
        }
    }
    for (u, v) in g.edges() {
        out.push_str(&format!("  n{u} -- n{v};\n"));
    }
    out.push_str("}\n");
    out
}
