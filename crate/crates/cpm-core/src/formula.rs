//! Positive NAE 3SAT formulas: parsing, evaluation, the clause graph, and
//! the clause-connecting transform.
//!
//! A formula is a list of variables plus a list of `nae` triples over them.
//! No negated literals exist in this problem; a clause is satisfied when its
//! three values are not all equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Total truth assignment, keyed by variable identifier.
pub type Assignment = BTreeMap<String, bool>;

#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("variable `{0}` missing from assignment")]
    MissingVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("too many variables for enumeration: {0} > {1}")]
    TooManyVariables(usize, usize),
}

/// One `NAE(a, b, c)` clause. Duplicate identifiers are allowed:
/// `NAE(a, a, b)` degenerates to `a != b` and `NAE(a, a, a)` is unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub a: String,
    pub b: String,
    pub c: String,
}

impl Clause {
    pub fn new(a: impl Into<String>, b: impl Into<String>, c: impl Into<String>) -> Self {
        Clause { a: a.into(), b: b.into(), c: c.into() }
    }

    pub fn vars(&self) -> [&str; 3] {
        [&self.a, &self.b, &self.c]
    }

    pub fn shares_var(&self, other: &Clause) -> bool {
        self.vars().iter().any(|v| other.vars().contains(v))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nae {} {} {}", self.a, self.b, self.c)
    }
}

/// A Positive NAE 3SAT instance. Variables are ordered and unique; every
/// identifier used by a clause is present in the variable list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Formula {
    variables: Vec<String>,
    clauses: Vec<Clause>,
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Formula {
    /// Builds a formula from explicit variables and clauses, checking the
    /// invariants (unique identifiers, clause vars declared).
    pub fn new(variables: Vec<String>, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        let mut seen = BTreeSet::new();
        for v in &variables {
            if !seen.insert(v.clone()) {
                return Err(FormulaError::DuplicateVariable(v.clone()));
            }
        }
        for c in &clauses {
            for v in c.vars() {
                if !seen.contains(v) {
                    return Err(FormulaError::Parse {
                        line: 0,
                        msg: format!("clause references undeclared variable `{v}`"),
                    });
                }
            }
        }
        Ok(Formula { variables, clauses })
    }

    /// Builds a formula from clauses alone; variables are collected in
    /// first-occurrence order.
    pub fn from_clauses(clauses: Vec<Clause>) -> Self {
        let mut variables = Vec::new();
        let mut seen = BTreeSet::new();
        for c in &clauses {
            for v in c.vars() {
                if seen.insert(v.to_string()) {
                    variables.push(v.to_string());
                }
            }
        }
        Formula { variables, clauses }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn is_satisfying(&self, asg: &Assignment) -> Result<bool, FormulaError> {
        for c in &self.clauses {
            if !eval_nae(c, asg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Clause graph: one vertex per clause, an edge when two clauses share a
    /// variable. Returned as a sorted adjacency list over clause indices.
    pub fn clause_graph(&self) -> Vec<BTreeSet<usize>> {
        let m = self.clauses.len();
        let mut adj = vec![BTreeSet::new(); m];
        for i in 0..m {
            for j in i + 1..m {
                if self.clauses[i].shares_var(&self.clauses[j]) {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        adj
    }

    /// True when the clause graph is connected (vacuously for <= 1 clause).
    pub fn is_clause_connected(&self) -> bool {
        let adj = self.clause_graph();
        let m = adj.len();
        if m <= 1 {
            return true;
        }
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == m
    }

    /// Serializes to the formula file format: one `vars` line, then one
    /// `nae` line per clause.
    pub fn to_text(&self) -> String {
        let mut out = String::from("vars");
        for v in &self.variables {
            out.push(' ');
            out.push_str(v);
        }
        out.push('\n');
        for c in &self.clauses {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// True iff the clause's three values are not all equal.
pub fn eval_nae(clause: &Clause, asg: &Assignment) -> Result<bool, FormulaError> {
    let mut vals = [false; 3];
    for (i, v) in clause.vars().into_iter().enumerate() {
        vals[i] = *asg
            .get(v)
            .ok_or_else(|| FormulaError::MissingVariable(v.to_string()))?;
    }
    Ok(!(vals[0] == vals[1] && vals[1] == vals[2]))
}

/// Parses the formula file format.
///
/// Lines are `# comment`, blank, an optional `vars <id>...` declaration
/// (at most once, before any clause), or `nae <id> <id> <id>`. Identifiers
/// match `[A-Za-z0-9_]+`. Without a declaration, variables are collected in
/// first-occurrence order.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut declared: Option<Vec<String>> = None;
    let mut clauses = Vec::new();
    let mut inferred = Vec::new();
    let mut inferred_seen = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap();
        match head {
            "vars" => {
                if declared.is_some() {
                    return Err(FormulaError::Parse {
                        line: line_no,
                        msg: "duplicate `vars` line".into(),
                    });
                }
                if !clauses.is_empty() {
                    return Err(FormulaError::Parse {
                        line: line_no,
                        msg: "`vars` line must precede all clauses".into(),
                    });
                }
                let mut vars = Vec::new();
                let mut seen = BTreeSet::new();
                for t in toks {
                    if !valid_ident(t) {
                        return Err(FormulaError::Parse {
                            line: line_no,
                            msg: format!("invalid identifier `{t}`"),
                        });
                    }
                    if !seen.insert(t.to_string()) {
                        return Err(FormulaError::Parse {
                            line: line_no,
                            msg: format!("duplicate variable `{t}`"),
                        });
                    }
                    vars.push(t.to_string());
                }
                declared = Some(vars);
            }
            "nae" => {
                let ids: Vec<&str> = toks.collect();
                if ids.len() != 3 {
                    return Err(FormulaError::Parse {
                        line: line_no,
                        msg: format!("clause arity {} != 3", ids.len()),
                    });
                }
                for t in &ids {
                    if !valid_ident(t) {
                        return Err(FormulaError::Parse {
                            line: line_no,
                            msg: format!("invalid identifier `{t}`"),
                        });
                    }
                    if let Some(vars) = &declared {
                        if !vars.iter().any(|v| v == t) {
                            return Err(FormulaError::Parse {
                                line: line_no,
                                msg: format!("clause references undeclared variable `{t}`"),
                            });
                        }
                    } else if inferred_seen.insert(t.to_string()) {
                        inferred.push(t.to_string());
                    }
                }
                clauses.push(Clause::new(ids[0], ids[1], ids[2]));
            }
            other => {
                return Err(FormulaError::Parse {
                    line: line_no,
                    msg: format!("unknown directive `{other}`"),
                });
            }
        }
    }

    let variables = declared.unwrap_or(inferred);
    Formula::new(variables, clauses)
}

/// Component-merging transform: adds bridge clauses until the clause graph is
/// connected. Each bridge takes one variable from each of two components plus
/// one fresh variable, so satisfiability is preserved both ways.
///
/// Deterministic rule: components are keyed by their smallest clause index;
/// the two smallest-keyed components merge first, each contributing the
/// lexicographically least variable of its least-indexed clause. Fresh
/// variables are named `_cc0`, `_cc1`, ... with underscores appended on
/// collision.
pub fn make_clause_connected(f: &Formula) -> (Formula, Vec<Clause>) {
    let adj = f.clause_graph();
    let m = adj.len();

    // Component id per clause, components keyed by min clause index.
    let mut comp = vec![usize::MAX; m];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for start in 0..m {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }

    let mut variables = f.variables.clone();
    let mut var_set: BTreeSet<String> = variables.iter().cloned().collect();
    let mut clauses = f.clauses.clone();
    let mut added = Vec::new();

    // Sorted by smallest clause index already (discovery order is ascending).
    let mut fresh_counter = 0usize;
    while comps.len() > 1 {
        let b = comps.remove(1);
        let a = &mut comps[0];
        let ca = &clauses[a[0]];
        let cb = &clauses[b[0]];
        let va = ca.vars().into_iter().min().unwrap().to_string();
        let vb = cb.vars().into_iter().min().unwrap().to_string();
        let mut fresh = format!("_cc{fresh_counter}");
        fresh_counter += 1;
        while var_set.contains(&fresh) {
            fresh.push('_');
        }
        var_set.insert(fresh.clone());
        variables.push(fresh.clone());
        let bridge = Clause::new(va, vb, fresh);
        clauses.push(bridge.clone());
        added.push(bridge);
        a.extend(b);
        a.push(clauses.len() - 1);
    }

    (Formula { variables, clauses }, added)
}

/// Maximum variable count accepted by [`brute_force_nae`].
pub const BRUTE_FORCE_VAR_LIMIT: usize = 24;

/// Enumerates all satisfying assignments in lexicographic order (variables in
/// formula order, `false < true`), truncated at `limit`.
pub fn brute_force_nae(f: &Formula, limit: usize) -> Result<Vec<Assignment>, FormulaError> {
    let n = f.variables.len();
    if n > BRUTE_FORCE_VAR_LIMIT {
        return Err(FormulaError::TooManyVariables(n, BRUTE_FORCE_VAR_LIMIT));
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        if out.len() >= limit {
            break;
        }
        let mut asg = Assignment::new();
        for (i, v) in f.variables.iter().enumerate() {
            asg.insert(v.clone(), (mask >> (n - 1 - i)) & 1 == 1);
        }
        if f.is_satisfying(&asg)? {
            out.push(asg);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn asg(pairs: &[(&str, bool)]) -> Assignment {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn parse_single_clause() {
        let f = parse_formula("nae a b c").unwrap();
        assert_eq!(f.variables(), &["a", "b", "c"]);
        assert_eq!(f.clauses(), &[Clause::new("a", "b", "c")]);
    }

    #[test]
    fn parse_empty() {
        let f = parse_formula("").unwrap();
        assert!(f.variables().is_empty());
        assert!(f.clauses().is_empty());
    }

    #[test]
    fn parse_arity_error() {
        let err = parse_formula("nae a b").unwrap_err();
        assert!(matches!(err, FormulaError::Parse { line: 1, .. }));
    }

    #[test]
    fn parse_vars_line_and_comments() {
        let f = parse_formula("# header\n\nvars a b c d\nnae a b c\n").unwrap();
        assert_eq!(f.variables(), &["a", "b", "c", "d"]);
        assert_eq!(f.clauses().len(), 1);
    }

    #[test]
    fn parse_undeclared_var_is_error() {
        assert!(parse_formula("vars a b\nnae a b c\n").is_err());
    }

    #[test]
    fn parse_vars_after_clause_is_error() {
        assert!(parse_formula("nae a b c\nvars a b c\n").is_err());
    }

    #[test]
    fn eval_nae_basic() {
        let c = Clause::new("a", "b", "c");
        assert!(!eval_nae(&c, &asg(&[("a", true), ("b", true), ("c", true)])).unwrap());
        assert!(eval_nae(&c, &asg(&[("a", true), ("b", false), ("c", true)])).unwrap());
    }

    #[test]
    fn eval_nae_duplicate_vars() {
        let c = Clause::new("a", "a", "b");
        assert!(eval_nae(&c, &asg(&[("a", true), ("b", false)])).unwrap());
        assert!(!eval_nae(&c, &asg(&[("a", true), ("b", true)])).unwrap());
    }

    #[test]
    fn eval_nae_missing_var() {
        let c = Clause::new("a", "b", "c");
        assert!(eval_nae(&c, &asg(&[("a", true)])).is_err());
    }

    #[test]
    fn is_satisfying_cases() {
        let empty = Formula::default();
        assert!(empty.is_satisfying(&Assignment::new()).unwrap());

        let f = Formula::from_clauses(vec![Clause::new("a", "b", "c")]);
        assert!(!f
            .is_satisfying(&asg(&[("a", true), ("b", true), ("c", true)]))
            .unwrap());

        let g = Formula::from_clauses(vec![
            Clause::new("a", "b", "c"),
            Clause::new("c", "d", "e"),
        ]);
        // Second clause all-equal.
        assert!(!g
            .is_satisfying(&asg(&[
                ("a", true),
                ("b", false),
                ("c", true),
                ("d", true),
                ("e", true)
            ]))
            .unwrap());
    }

    #[test]
    fn clause_graph_shapes() {
        let f = Formula::from_clauses(vec![
            Clause::new("a", "b", "c"),
            Clause::new("c", "d", "e"),
        ]);
        let adj = f.clause_graph();
        assert!(adj[0].contains(&1) && adj[1].contains(&0));

        let g = Formula::from_clauses(vec![
            Clause::new("a", "b", "c"),
            Clause::new("d", "e", "f"),
        ]);
        assert!(g.clause_graph().iter().all(|s| s.is_empty()));

        let t = Formula::from_clauses(vec![
            Clause::new("a", "b", "c"),
            Clause::new("c", "d", "e"),
            Clause::new("e", "f", "a"),
        ]);
        let adj = t.clause_graph();
        for i in 0..3 {
            assert_eq!(adj[i].len(), 2, "triangle expected");
        }
    }

    #[test]
    fn clause_connectivity() {
        let single = Formula::from_clauses(vec![Clause::new("a", "b", "c")]);
        assert!(single.is_clause_connected());
        let disj = Formula::from_clauses(vec![
            Clause::new("a", "b", "c"),
            Clause::new("d", "e", "f"),
        ]);
        assert!(!disj.is_clause_connected());
    }

    #[test]
    fn make_connected_two_disjoint() {
        let f = Formula::from_clauses(vec![
            Clause::new("v1", "v2", "v3"),
            Clause::new("v4", "v5", "v6"),
        ]);
        let (g, added) = make_clause_connected(&f);
        assert_eq!(added, vec![Clause::new("v1", "v4", "_cc0")]);
        assert!(g.is_clause_connected());
        assert_eq!(&g.clauses()[..2], f.clauses());
    }

    #[test]
    fn make_connected_already_connected() {
        let f = Formula::from_clauses(vec![
            Clause::new("a", "b", "c"),
            Clause::new("c", "d", "e"),
        ]);
        let (g, added) = make_clause_connected(&f);
        assert!(added.is_empty());
        assert_eq!(g, f);
    }

    #[test]
    fn make_connected_three_components() {
        let f = Formula::from_clauses(vec![
            Clause::new("a", "b", "c"),
            Clause::new("d", "e", "f"),
            Clause::new("g", "h", "i"),
        ]);
        let (g, added) = make_clause_connected(&f);
        assert_eq!(added.len(), 2);
        assert!(g.is_clause_connected());
        // Fresh variables appear in exactly one clause each.
        for fresh in ["_cc0", "_cc1"] {
            let count = g
                .clauses()
                .iter()
                .filter(|c| c.vars().contains(&fresh))
                .count();
            assert_eq!(count, 1);
        }
    }

    #[test]
    fn fresh_name_collision_avoided() {
        let f = Formula::new(
            vec!["_cc0".into(), "a".into(), "b".into(), "d".into(), "e".into(), "f".into()],
            vec![Clause::new("_cc0", "a", "b"), Clause::new("d", "e", "f")],
        )
        .unwrap();
        let (g, added) = make_clause_connected(&f);
        assert_eq!(added.len(), 1);
        let fresh = &added[0].c;
        assert_ne!(fresh, "_cc0");
        assert!(g.variables().iter().filter(|v| *v == fresh).count() == 1);
    }

    #[test]
    fn brute_force_single_clause() {
        let f = Formula::from_clauses(vec![Clause::new("a", "b", "c")]);
        let sols = brute_force_nae(&f, usize::MAX).unwrap();
        assert_eq!(sols.len(), 6);
    }

    #[test]
    fn brute_force_no_clauses_one_var() {
        let f = Formula::new(vec!["a".into()], vec![]).unwrap();
        let sols = brute_force_nae(&f, usize::MAX).unwrap();
        assert_eq!(sols.len(), 2);
        // Lexicographic: false before true.
        assert_eq!(sols[0]["a"], false);
        assert_eq!(sols[1]["a"], true);
    }

    #[test]
    fn brute_force_fano_unsat() {
        let lines: [(usize, usize, usize); 7] = [
            (1, 2, 4),
            (2, 3, 5),
            (3, 4, 6),
            (4, 5, 7),
            (5, 6, 1),
            (6, 7, 2),
            (7, 1, 3),
        ];
        let clauses = lines
            .iter()
            .map(|(a, b, c)| Clause::new(format!("x{a}"), format!("x{b}"), format!("x{c}")))
            .collect();
        let f = Formula::from_clauses(clauses);
        assert_eq!(f.variables().len(), 7);
        let sols = brute_force_nae(&f, usize::MAX).unwrap();
        assert!(sols.is_empty(), "the Fano plane is not 2-colorable");
    }

    #[test]
    fn connecting_preserves_satisfiability_small_family() {
        // Every formula with <= 3 clauses drawn from a fixed pool over <= 4
        // variables: satisfiable iff the connected version is satisfiable.
        let pool = [
            Clause::new("a", "b", "c"),
            Clause::new("a", "a", "d"),
            Clause::new("c", "d", "d"),
            Clause::new("b", "b", "b"),
            Clause::new("a", "d", "c"),
        ];
        let mut checked = 0;
        for i in 0..pool.len() {
            for j in i..pool.len() {
                for k in j..pool.len() {
                    let f = Formula::from_clauses(vec![
                        pool[i].clone(),
                        pool[j].clone(),
                        pool[k].clone(),
                    ]);
                    let (g, added) = make_clause_connected(&f);
                    assert!(g.is_clause_connected());
                    let comp_count: usize = {
                        let adj = f.clause_graph();
                        let mut seen = vec![false; adj.len()];
                        let mut n = 0;
                        for s in 0..adj.len() {
                            if seen[s] {
                                continue;
                            }
                            n += 1;
                            let mut stack = vec![s];
                            seen[s] = true;
                            while let Some(v) = stack.pop() {
                                for &w in &adj[v] {
                                    if !seen[w] {
                                        seen[w] = true;
                                        stack.push(w);
                                    }
                                }
                            }
                        }
                        n
                    };
                    assert_eq!(added.len(), comp_count.saturating_sub(1));
                    let sat_f = !brute_force_nae(&f, 1).unwrap().is_empty();
                    let sat_g = !brute_force_nae(&g, 1).unwrap().is_empty();
                    assert_eq!(sat_f, sat_g);
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    proptest! {
        #[test]
        fn roundtrip_formula_text(
            clause_ids in proptest::collection::vec((0usize..5, 0usize..5, 0usize..5), 0..6)
        ) {
            let names = ["a", "b", "c", "d_0", "E5"];
            let clauses: Vec<Clause> = clause_ids
                .into_iter()
                .map(|(i, j, k)| Clause::new(names[i], names[j], names[k]))
                .collect();
            let f = Formula::from_clauses(clauses);
            let text = f.to_text();
            let g = parse_formula(&text).unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
