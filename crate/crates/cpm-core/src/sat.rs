//! Minimal conflict-driven clause-learning SAT core used by the solver:
//! two-watched-literal propagation, first-UIP learning, non-chronological
//! backjumping, Luby restarts, phase saving, and a deterministic
//! activity-based branching order. No randomness anywhere; identical inputs
//! produce identical runs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SatOutcome {
    Sat,
    Unsat,
    Budget,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SatStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
}

/// Literal: variable index v (0-based) with polarity; encoded 2v (positive)
/// or 2v+1 (negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Lit(u32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Self {
        Lit(var << 1 | (!positive) as u32)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn negate(self) -> Self {
        Lit(self.0 ^ 1)
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

const UNSET: u32 = u32::MAX;

pub(crate) struct CnfSolver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    assign: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    act_inc: f64,
    /// Lazy max-heap over (activity bits, lowest-var tiebreak); stale
    /// entries are skipped on pop.
    order: BinaryHeap<(u64, Reverse<u32>)>,
    phase: Vec<bool>,
    /// Set when an empty or contradictory unit clause is added.
    broken: bool,
    stats: SatStats,
}

impl CnfSolver {
    pub fn new(num_vars: usize) -> Self {
        CnfSolver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assign: vec![None; num_vars],
            level: vec![0; num_vars],
            reason: vec![UNSET; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; num_vars],
            act_inc: 1.0,
            order: (0..num_vars as u32).map(|v| (0u64, Reverse(v))).collect(),
            phase: vec![false; num_vars],
            broken: false,
            stats: SatStats::default(),
        }
    }

    pub fn stats(&self) -> SatStats {
        self.stats
    }

    fn value(&self, l: Lit) -> Option<bool> {
        self.assign[l.var() as usize].map(|v| v == l.positive())
    }

    /// Adds a clause in DIMACS-style literals (positive/negative 1-based).
    pub fn add_clause_dimacs(&mut self, lits: &[i64]) {
        let clause: Vec<Lit> = lits
            .iter()
            .map(|&l| Lit::new((l.unsigned_abs() - 1) as u32, l > 0))
            .collect();
        self.add_clause(clause);
    }

    pub fn add_clause(&mut self, mut lits: Vec<Lit>) {
        if self.broken {
            return;
        }
        debug_assert!(self.trail_lim.is_empty(), "clauses are added at level 0");
        // Deduplicate; drop tautologies and satisfied/false literals at root.
        lits.sort_by_key(|l| l.0);
        lits.dedup();
        let mut out: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in &lits {
            if lits.contains(&l.negate()) {
                return; // tautology
            }
            match self.value(l) {
                Some(true) => return,
                Some(false) => {}
                None => out.push(l),
            }
        }
        match out.len() {
            0 => self.broken = true,
            1 => {
                if !self.enqueue(out[0], UNSET) {
                    self.broken = true;
                }
            }
            _ => {
                let idx = self.clauses.len() as u32;
                self.watches[out[0].index()].push(idx);
                self.watches[out[1].index()].push(idx);
                self.clauses.push(out);
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: u32) -> bool {
        match self.value(l) {
            Some(true) => true,
            Some(false) => false,
            None => {
                let v = l.var() as usize;
                self.assign[v] = Some(l.positive());
                self.level[v] = self.trail_lim.len() as u32;
                self.reason[v] = reason;
                self.trail.push(l);
                true
            }
        }
    }

    /// Unit propagation; returns a conflicting clause index on conflict.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let l = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let falsified = l.negate();
            let fi = falsified.index();
            let mut i = 0;
            'watch: while i < self.watches[fi].len() {
                let ci = self.watches[fi][i] as usize;
                // Normalize: the falsified literal sits at position 1.
                if self.clauses[ci][0] == falsified {
                    self.clauses[ci].swap(0, 1);
                }
                debug_assert_eq!(self.clauses[ci][1], falsified);
                let first = self.clauses[ci][0];
                if self.value(first) == Some(true) {
                    i += 1;
                    continue;
                }
                // Find a replacement watch.
                let len = self.clauses[ci].len();
                let mut j = 2;
                while j < len {
                    let lj = self.clauses[ci][j];
                    if self.value(lj) != Some(false) {
                        self.clauses[ci].swap(1, j);
                        let nw = self.clauses[ci][1].index();
                        self.watches[fi].swap_remove(i);
                        self.watches[nw].push(ci as u32);
                        continue 'watch;
                    }
                    j += 1;
                }
                // Unit or conflicting.
                if !self.enqueue(first, ci as u32) {
                    return Some(ci as u32);
                }
                i += 1;
            }
        }
        None
    }

    fn bump(&mut self, var: u32) {
        self.activity[var as usize] += self.act_inc;
        if self.activity[var as usize] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.act_inc *= 1e-100;
            // All heap entries are stale now; rebuild.
            self.order = (0..self.num_vars as u32)
                .map(|v| (self.activity[v as usize].to_bits(), Reverse(v)))
                .collect();
        } else {
            self.order
                .push((self.activity[var as usize].to_bits(), Reverse(var)));
            if self.order.len() > 4 * self.num_vars + 1024 {
                self.order = (0..self.num_vars as u32)
                    .filter(|&v| self.assign[v as usize].is_none())
                    .map(|v| (self.activity[v as usize].to_bits(), Reverse(v)))
                    .collect();
            }
        }
    }

    /// First-UIP conflict analysis; returns (learned clause, backjump level).
    fn analyze(&mut self, conflict: u32) -> (Vec<Lit>, u32) {
        let current_level = self.trail_lim.len() as u32;
        let mut learned: Vec<Lit> = Vec::new();
        let mut seen = vec![false; self.num_vars];
        let mut counter = 0usize;
        let mut cref = conflict;
        let mut trail_pos = self.trail.len();
        let mut uip = None;

        loop {
            for i in 0..self.clauses[cref as usize].len() {
                let l = self.clauses[cref as usize][i];
                let v = l.var() as usize;
                if seen[v] || self.level[v] == 0 {
                    continue;
                }
                // Skip the asserted literal itself on reason clauses.
                if Some(l.positive()) == self.assign[v] {
                    continue;
                }
                seen[v] = true;
                self.bump(l.var());
                if self.level[v] == current_level {
                    counter += 1;
                } else {
                    learned.push(l);
                }
            }
            // Walk the trail backwards to the next marked literal.
            loop {
                trail_pos -= 1;
                let l = self.trail[trail_pos];
                if seen[l.var() as usize] {
                    seen[l.var() as usize] = false;
                    counter -= 1;
                    if counter == 0 {
                        uip = Some(l);
                    } else {
                        cref = self.reason[l.var() as usize];
                        debug_assert_ne!(cref, UNSET);
                    }
                    break;
                }
            }
            if let Some(u) = uip {
                learned.push(u.negate());
                break;
            }
        }
        let n = learned.len();
        learned.swap(0, n - 1); // asserted literal first
        let backjump = learned[1..]
            .iter()
            .map(|l| self.level[l.var() as usize])
            .max()
            .unwrap_or(0);
        (learned, backjump)
    }

    fn backtrack_to(&mut self, target: u32) {
        while self.trail_lim.len() as u32 > target {
            let mark = self.trail_lim.pop().unwrap();
            while self.trail.len() > mark {
                let l = self.trail.pop().unwrap();
                let v = l.var() as usize;
                self.phase[v] = l.positive();
                self.assign[v] = None;
                self.reason[v] = UNSET;
                self.order.push((self.activity[v].to_bits(), Reverse(l.var())));
            }
        }
        self.qhead = self.trail.len();
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(&(bits, Reverse(v))) = self.order.peek() {
            if self.assign[v as usize].is_some() || bits != self.activity[v as usize].to_bits() {
                self.order.pop();
                continue;
            }
            return Some(Lit::new(v, self.phase[v as usize]));
        }
        // Fall back to a scan when every heap entry went stale.
        for v in 0..self.num_vars as u32 {
            if self.assign[v as usize].is_none() {
                return Some(Lit::new(v, self.phase[v as usize]));
            }
        }
        None
    }

    /// Luby restart sequence (1-based): 1, 1, 2, 1, 1, 2, 4, ...
    fn luby(mut i: u64) -> u64 {
        loop {
            if (i + 1).is_power_of_two() {
                return (i + 1) >> 1;
            }
            let k = 63 - (i + 1).leading_zeros() as u64;
            i -= (1u64 << k) - 1;
        }
    }

    /// CDCL search with a conflict budget.
    pub fn solve(&mut self, conflict_budget: u64) -> SatOutcome {
        if self.broken {
            return SatOutcome::Unsat;
        }
        if self.propagate().is_some() {
            return SatOutcome::Unsat;
        }
        let mut restart_round = 0u64;
        let mut conflicts_in_round = 0u64;
        let restart_base = 768u64;

        loop {
            if let Some(conflict) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_in_round += 1;
                if self.stats.conflicts > conflict_budget {
                    self.backtrack_to(0);
                    return SatOutcome::Budget;
                }
                if self.trail_lim.is_empty() {
                    return SatOutcome::Unsat;
                }
                let (learned, backjump) = self.analyze(conflict);
                self.backtrack_to(backjump);
                let asserted = learned[0];
                if learned.len() == 1 {
                    if !self.enqueue(asserted, UNSET) {
                        return SatOutcome::Unsat;
                    }
                } else {
                    let idx = self.clauses.len() as u32;
                    self.watches[learned[0].index()].push(idx);
                    self.watches[learned[1].index()].push(idx);
                    self.clauses.push(learned);
                    let ok = self.enqueue(asserted, idx);
                    debug_assert!(ok);
                }
                self.act_inc /= 0.95;
                if conflicts_in_round >= restart_base * Self::luby(restart_round + 1) {
                    restart_round += 1;
                    conflicts_in_round = 0;
                    self.backtrack_to(0);
                }
            } else {
                match self.pick_branch() {
                    None => return SatOutcome::Sat,
                    Some(l) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        let ok = self.enqueue(l, UNSET);
                        debug_assert!(ok);
                    }
                }
            }
        }
    }

    /// Model access after `Sat` (true/false per variable, 0-based).
    pub fn model(&self) -> Vec<bool> {
        self.assign.iter().map(|a| a.unwrap_or(false)).collect()
    }

    /// Blocks the given assignment to the listed variables and resets the
    /// search to level 0, enabling model enumeration.
    pub fn block_model(&mut self, vars: &[u32]) {
        let lits: Vec<Lit> = vars
            .iter()
            .map(|&v| Lit::new(v, !self.assign[v as usize].unwrap()))
            .collect();
        self.backtrack_to(0);
        self.add_clause(lits);
    }
}
