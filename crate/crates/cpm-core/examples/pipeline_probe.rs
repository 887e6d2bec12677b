use std::time::Instant;

use cpm_core::formula::{brute_force_nae, make_clause_connected, parse_formula};
use cpm_core::graph::{check_regular, embedding_genus, is_biconnected};
use cpm_core::reduce2::{lift_coloring, reduce, PipelineConfig};
use cpm_core::solver::{solve, SolveRequest, SolveStatus};

fn main() {
    let corpus = [
        ("1clause", "nae a b c"),
        ("dup", "nae a a b"),
        ("aaa", "nae a a a"),
        ("2shared", "nae a b c\nnae c d e"),
        ("2shared2", "nae a b c\nnae b c d"),
        ("triangle", "nae a b c\nnae c d e\nnae e f a"),
        ("star3", "nae a b c\nnae a d e\nnae a f g"),
        ("cycle4", "nae a b c\nnae c d e\nnae e f g\nnae g h a"),
        (
            "five",
            "nae a b c\nnae c d e\nnae b e f\nnae a f g\nnae d g h",
        ),
        (
            "fano",
            "nae x1 x2 x4\nnae x2 x3 x5\nnae x3 x4 x6\nnae x4 x5 x7\nnae x5 x6 x1\nnae x6 x7 x2\nnae x7 x1 x3",
        ),
    ];
    for (name, text) in corpus {
        let f = parse_formula(text).unwrap();
        let (f, _) = make_clause_connected(&f);
        let t0 = Instant::now();
        let out = match reduce(&f, &PipelineConfig::default()) {
            Ok(o) => o,
            Err(e) => {
                println!("{name}: REDUCE ERROR: {e}");
                continue;
            }
        };
        let build = t0.elapsed();
        let t1 = Instant::now();
        let reg = check_regular(&out.graph, 3);
        let (bicon, _) = is_biconnected(&out.graph);
        let (_, chi) = embedding_genus(&out.graph, &out.rotation).unwrap();
        let checks = t1.elapsed();
        let t2 = Instant::now();
        let r = solve(&SolveRequest::decide(&out.graph, 2)).unwrap();
        let solve_t = t2.elapsed();
        let status = match &r.status {
            SolveStatus::Sat(col) => {
                let asg = lift_coloring(&out, col).unwrap();
                let ok = f.is_satisfying(&asg).unwrap();
                format!("SAT(lift_ok={ok})")
            }
            SolveStatus::Unsat => "UNSAT".into(),
            SolveStatus::BudgetExceeded => "BUDGET".into(),
        };
        let bf_sat = if f.variables().len() <= 20 {
            format!("{}", !brute_force_nae(&f, 1).unwrap().is_empty())
        } else {
            "?".into()
        };
        println!(
            "{name}: n={} e={} xings={} xovers={} reg={reg} bicon={bicon} chi={chi} solve={status} bf_sat={bf_sat} [build {build:?}, checks {checks:?}, solve {solve_t:?}] decisions={} backtracks={}",
            out.graph.node_count(),
            out.graph.edge_count(),
            out.stats.crossings,
            out.stats.crossovers,
            r.stats.decisions,
            r.stats.backtracks,
        );
    }
}
