use cpm_core::formula::parse_formula;
use cpm_core::reduce2::{reduce, PipelineConfig};
use cpm_core::solver::{solve, Budgets, SolveMode, SolveRequest};

fn main() {
    let f = parse_formula("nae a b c").unwrap();
    let out = reduce(&f, &PipelineConfig::default()).unwrap();
    let req = SolveRequest {
        graph: &out.graph,
        k: 2,
        seeds: Default::default(),
        mode: SolveMode::Decide,
        budgets: Budgets { backtrack_limit: 2_000_000, brute_force_states: 1 },
    };
    let r = solve(&req).unwrap();
    eprintln!("status: {:?}", r.stats);
}
