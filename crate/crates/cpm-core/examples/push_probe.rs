use cpm_core::formula::{brute_force_nae, parse_formula};
use cpm_core::reduce2::{lift_coloring, push_assignment, reduce, PipelineConfig};

fn main() {
    for (name, text) in [
        ("dup", "nae a a b"),
        ("2shared", "nae a b c\nnae c d e"),
    ] {
        let f = parse_formula(text).unwrap();
        let out = reduce(&f, &PipelineConfig::default()).unwrap();
        let asg = brute_force_nae(&f, 1).unwrap().remove(0);
        println!("{name}: pushing {asg:?}");
        match push_assignment(&out, &asg) {
            Ok(col) => {
                let lifted = lift_coloring(&out, &col).unwrap();
                println!("{name}: push OK, lift round-trip = {}", lifted == asg);
            }
            Err(e) => println!("{name}: PUSH FAILED: {e}"),
        }
    }
}
