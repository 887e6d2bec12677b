//! Backtracking search with constraint propagation over "same-colored
//! neighbor count" constraints.
//!
//! Each node carries a target: ExactlyOne (ordinary nodes: exactly one
//! neighbor of its own color) or Zero (gadget terminals whose matching
//! partner lies outside the subgraph). Propagation rules:
//!  - a matched node forbids its color on its other undecided neighbors,
//!  - a node reduced to one candidate color is committed,
//!  - a decided, unmatched node with a single possible partner forces it,
//!  - a color with no possible partner among the neighbors is dropped
//!    (covers the fully-decided-neighborhood conflict),
//!  - an empty domain is a conflict.
//!
//! The search is exhaustive and deterministic: branch on the undecided node
//! with the fewest remaining colors (preferring nodes adjacent to decided
//! ones, then lowest index), colors ascending.
//!
//! Backtracking is conflict-directed. Every domain change and commitment
//! records the maximum decision level it depends on; a conflict therefore
//! comes with a level bound, and the search jumps straight back to that
//! level. The bound is an over-approximation (a superset of the true
//! reasons), which keeps the jump sound for both decision and full
//! enumeration: sibling branches above the bound cannot avoid the conflict.

use std::collections::{BTreeSet, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchTarget {
    ExactlyOne,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineStatus {
    /// Search space exhausted; the solution list is complete.
    Complete,
    /// Stopped early because the requested solution cap was reached.
    CapReached,
    /// Stopped early because the backtrack budget ran out.
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub decisions: u64,
    pub propagations: u64,
    pub backtracks: u64,
}

#[derive(Debug, Clone)]
pub struct EngineResult {
    pub status: EngineStatus,
    pub solutions: Vec<Vec<u8>>,
    pub stats: SearchStats,
}

pub struct Engine<'a> {
    adj: &'a [Vec<u32>],
    k: u8,
    target: &'a [MatchTarget],
    n: usize,

    dom: Vec<u16>,
    color: Vec<Option<u8>>,
    cnt_same: Vec<u32>,
    decided_nbrs: Vec<u32>,
    /// Max decision level any removal from this domain depended on.
    dom_lvl: Vec<u32>,
    /// Max decision level this node's commitment depended on.
    com_lvl: Vec<u32>,
    /// Undecided nodes keyed by (domain size, frontier flag, index).
    branch_set: BTreeSet<(u8, u32, u32)>,
    trail: Vec<Trail>,
    queue: VecDeque<u32>,
    conflict: bool,
    conflict_lvl: u32,
    level: u32,
    stats: SearchStats,
}

enum Trail {
    Dom(u32, u16, u32),
    Commit(u32),
}

fn full_dom(k: u8) -> u16 {
    ((1u32 << k) - 1) as u16
}

impl<'a> Engine<'a> {
    /// `adj` is an index-space adjacency list; `seeds[i]` pins node i's color.
    pub fn new(
        adj: &'a [Vec<u32>],
        k: u8,
        target: &'a [MatchTarget],
        seeds: &[Option<u8>],
    ) -> Self {
        assert!(k >= 1 && k <= 16, "palette size out of range");
        let n = adj.len();
        let mut dom = vec![full_dom(k); n];
        for (i, s) in seeds.iter().enumerate() {
            if let Some(c) = s {
                dom[i] = 1u16 << c;
            }
        }
        let branch_set = (0..n as u32)
            .map(|i| (dom[i as usize].count_ones() as u8, 1, i))
            .collect();
        Engine {
            adj,
            k,
            target,
            n,
            dom,
            color: vec![None; n],
            cnt_same: vec![0; n],
            decided_nbrs: vec![0; n],
            dom_lvl: vec![0; n],
            com_lvl: vec![0; n],
            branch_set,
            trail: Vec::new(),
            queue: VecDeque::new(),
            conflict: false,
            conflict_lvl: 0,
            level: 0,
            stats: SearchStats::default(),
        }
    }

    fn key(&self, v: u32) -> (u8, u32, u32) {
        (
            self.dom[v as usize].count_ones() as u8,
            (self.decided_nbrs[v as usize] == 0) as u32,
            v,
        )
    }

    /// Level that explains a node's current state.
    fn lvl(&self, v: u32) -> u32 {
        if self.color[v as usize].is_some() {
            self.com_lvl[v as usize]
        } else {
            self.dom_lvl[v as usize]
        }
    }

    /// Conservative cause: the node and its whole neighborhood.
    fn cause_around(&self, v: u32) -> u32 {
        let mut c = self.lvl(v);
        for &w in &self.adj[v as usize] {
            c = c.max(self.lvl(w));
        }
        c
    }

    fn fail(&mut self, cause: u32) {
        self.conflict = true;
        self.conflict_lvl = self.conflict_lvl.min(cause);
    }

    fn set_dom(&mut self, v: u32, new: u16, cause: u32) {
        let old = self.dom[v as usize];
        if old == new {
            return;
        }
        self.trail.push(Trail::Dom(v, old, self.dom_lvl[v as usize]));
        self.dom_lvl[v as usize] = self.dom_lvl[v as usize].max(cause);
        if self.color[v as usize].is_none() {
            self.branch_set.remove(&self.key(v));
            self.dom[v as usize] = new;
            self.branch_set.insert(self.key(v));
        } else {
            self.dom[v as usize] = new;
        }
        if new == 0 {
            let lvl = self.dom_lvl[v as usize];
            self.fail(lvl);
            return;
        }
        self.queue.push_back(v);
        for &w in &self.adj[v as usize] {
            self.queue.push_back(w);
        }
    }

    fn forbid(&mut self, v: u32, c: u8, cause: u32) {
        let bit = 1u16 << c;
        if self.dom[v as usize] & bit != 0 {
            self.set_dom(v, self.dom[v as usize] & !bit, cause);
        }
    }

    fn commit(&mut self, v: u32, c: u8, cause: u32) {
        debug_assert!(self.color[v as usize].is_none());
        let old = self.dom[v as usize];
        self.branch_set.remove(&self.key(v));
        if old != (1u16 << c) {
            self.trail.push(Trail::Dom(v, old, self.dom_lvl[v as usize]));
            self.dom_lvl[v as usize] = self.dom_lvl[v as usize].max(cause);
            self.dom[v as usize] = 1u16 << c;
        }
        self.trail.push(Trail::Commit(v));
        self.color[v as usize] = Some(c);
        self.com_lvl[v as usize] = cause.max(self.dom_lvl[v as usize]);
        let mut same = 0u32;
        for &w in &self.adj[v as usize] {
            if self.color[w as usize].is_none() {
                self.branch_set.remove(&self.key(w));
                self.decided_nbrs[w as usize] += 1;
                self.branch_set.insert(self.key(w));
            } else {
                self.decided_nbrs[w as usize] += 1;
                if self.color[w as usize] == Some(c) {
                    same += 1;
                    self.cnt_same[w as usize] += 1;
                }
            }
        }
        self.cnt_same[v as usize] = same;
        self.queue.push_back(v);
        for &w in &self.adj[v as usize] {
            self.queue.push_back(w);
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Trail::Dom(v, old, old_lvl) => {
                    self.dom_lvl[v as usize] = old_lvl;
                    if self.color[v as usize].is_none() {
                        self.branch_set.remove(&self.key(v));
                        self.dom[v as usize] = old;
                        self.branch_set.insert(self.key(v));
                    } else {
                        self.dom[v as usize] = old;
                    }
                }
                Trail::Commit(v) => {
                    let c = self.color[v as usize].take().unwrap();
                    self.com_lvl[v as usize] = 0;
                    for &w in &self.adj[v as usize] {
                        if self.color[w as usize].is_none() {
                            self.branch_set.remove(&self.key(w));
                            self.decided_nbrs[w as usize] -= 1;
                            self.branch_set.insert(self.key(w));
                        } else {
                            self.decided_nbrs[w as usize] -= 1;
                            if self.color[w as usize] == Some(c) {
                                self.cnt_same[w as usize] -= 1;
                            }
                        }
                    }
                    self.cnt_same[v as usize] = 0;
                    self.branch_set.insert(self.key(v));
                }
            }
        }
        self.conflict = false;
        self.conflict_lvl = u32::MAX;
        self.queue.clear();
    }

    fn rules_decided(&mut self, v: u32) {
        let c = self.color[v as usize].unwrap();
        let same = self.cnt_same[v as usize];
        match self.target[v as usize] {
            MatchTarget::Zero => {
                if same > 0 {
                    let cause = self.cause_around(v);
                    self.fail(cause);
                    return;
                }
                for i in 0..self.adj[v as usize].len() {
                    let w = self.adj[v as usize][i];
                    if self.color[w as usize].is_none() {
                        let cause = self.com_lvl[v as usize];
                        self.forbid(w, c, cause);
                        if self.conflict {
                            return;
                        }
                    }
                }
            }
            MatchTarget::ExactlyOne => {
                if same >= 2 {
                    let cause = self.cause_around(v);
                    self.fail(cause);
                    return;
                }
                if same == 1 {
                    let cause = self.cause_around(v);
                    for i in 0..self.adj[v as usize].len() {
                        let w = self.adj[v as usize][i];
                        if self.color[w as usize].is_none() {
                            self.forbid(w, c, cause);
                            if self.conflict {
                                return;
                            }
                        }
                    }
                } else {
                    // Unmatched: some neighbor must eventually take color c.
                    let bit = 1u16 << c;
                    let mut candidate = None;
                    let mut count = 0;
                    for &w in &self.adj[v as usize] {
                        if self.color[w as usize].is_none() && self.dom[w as usize] & bit != 0 {
                            candidate = Some(w);
                            count += 1;
                        }
                    }
                    match count {
                        0 => {
                            let cause = self.cause_around(v);
                            self.fail(cause);
                        }
                        1 => {
                            let w = candidate.unwrap();
                            let cause = self.cause_around(v);
                            self.set_dom(w, bit, cause);
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    /// A decided neighbor can absorb `u` at color `c` only while unmatched;
    /// an undecided neighbor only while `c` is still in its domain.
    fn has_partner(&self, u: u32, c: u8) -> bool {
        let bit = 1u16 << c;
        self.adj[u as usize].iter().any(|&w| match self.color[w as usize] {
            Some(wc) => {
                wc == c
                    && self.target[w as usize] == MatchTarget::ExactlyOne
                    && self.cnt_same[w as usize] == 0
            }
            None => self.dom[w as usize] & bit != 0,
        })
    }

    fn rules_undecided(&mut self, v: u32) {
        let d = self.dom[v as usize];
        if d == 0 {
            let lvl = self.dom_lvl[v as usize];
            self.fail(lvl);
            return;
        }
        if self.target[v as usize] == MatchTarget::ExactlyOne {
            // Drop colors that cannot be matched by any neighbor.
            let mut keep = 0u16;
            for c in 0..self.k {
                if d & (1 << c) != 0 && self.has_partner(v, c) {
                    keep |= 1 << c;
                }
            }
            if keep != d {
                let cause = self.cause_around(v);
                self.set_dom(v, keep, cause);
                if self.conflict {
                    return;
                }
            }
            // With a fully decided neighborhood the count must be exact.
            if self.adj[v as usize]
                .iter()
                .all(|&w| self.color[w as usize].is_some())
            {
                let d = self.dom[v as usize];
                let mut exact = 0u16;
                for c in 0..self.k {
                    if d & (1 << c) == 0 {
                        continue;
                    }
                    let same = self.adj[v as usize]
                        .iter()
                        .filter(|&&w| self.color[w as usize] == Some(c))
                        .count();
                    if same == 1 {
                        exact |= 1 << c;
                    }
                }
                if exact != d {
                    let cause = self.cause_around(v);
                    self.set_dom(v, exact, cause);
                    if self.conflict {
                        return;
                    }
                }
            }
        } else if self.adj[v as usize]
            .iter()
            .all(|&w| self.color[w as usize].is_some())
        {
            let mut keep = 0u16;
            for c in 0..self.k {
                if d & (1 << c) == 0 {
                    continue;
                }
                let same = self.adj[v as usize]
                    .iter()
                    .filter(|&&w| self.color[w as usize] == Some(c))
                    .count();
                if same == 0 {
                    keep |= 1 << c;
                }
            }
            if keep != d {
                let cause = self.cause_around(v);
                self.set_dom(v, keep, cause);
                if self.conflict {
                    return;
                }
            }
        }
        let d = self.dom[v as usize];
        if d.count_ones() == 1 && self.color[v as usize].is_none() {
            let c = d.trailing_zeros() as u8;
            let cause = self.dom_lvl[v as usize];
            self.commit(v, c, cause);
        }
    }

    fn propagate(&mut self) {
        while !self.conflict {
            let Some(v) = self.queue.pop_front() else { break };
            self.stats.propagations += 1;
            if self.color[v as usize].is_some() {
                self.rules_decided(v);
            } else {
                self.rules_undecided(v);
            }
        }
        if self.conflict {
            self.queue.clear();
        }
    }

    fn pick_branch(&self) -> Option<u32> {
        self.branch_set.iter().next().map(|&(_, _, v)| v)
    }

    /// Runs the exhaustive search, collecting up to `cap` solutions within
    /// `backtrack_limit` backtracks.
    pub fn run(mut self, cap: usize, backtrack_limit: u64) -> EngineResult {
        let mut solutions: Vec<Vec<u8>> = Vec::new();

        // Decision stack: (node, color tried, trail mark).
        let mut decisions: Vec<(u32, u8, usize)> = Vec::new();

        for v in 0..self.n as u32 {
            self.queue.push_back(v);
        }
        self.conflict_lvl = u32::MAX;
        self.propagate();

        loop {
            let mut jump_to = u32::MAX;
            if self.conflict {
                jump_to = self.conflict_lvl;
            } else {
                match self.pick_branch() {
                    Some(v) => {
                        let c = self.dom[v as usize].trailing_zeros() as u8;
                        self.stats.decisions += 1;
                        decisions.push((v, c, self.trail.len()));
                        self.level = decisions.len() as u32;
                        self.commit(v, c, self.level);
                        self.conflict_lvl = u32::MAX;
                        self.propagate();
                        continue;
                    }
                    None => {
                        // Full assignment: record and continue past it.
                        let sol: Vec<u8> = self.color.iter().map(|c| c.unwrap()).collect();
                        solutions.push(sol);
                        if solutions.len() >= cap {
                            return EngineResult {
                                status: EngineStatus::CapReached,
                                solutions,
                                stats: self.stats,
                            };
                        }
                        jump_to = decisions.len() as u32;
                    }
                }
            }

            // Backjump to `jump_to`: every sibling branch above that level
            // runs into the same contradiction.
            loop {
                let target = (jump_to as usize).min(decisions.len());
                while decisions.len() > target {
                    let (_, _, mark) = decisions.pop().unwrap();
                    self.stats.backtracks += 1;
                    if self.stats.backtracks > backtrack_limit {
                        return EngineResult {
                            status: EngineStatus::BudgetExceeded,
                            solutions,
                            stats: self.stats,
                        };
                    }
                    self.undo_to(mark);
                }
                let Some((v, c, mark)) = decisions.pop() else {
                    return EngineResult {
                        status: EngineStatus::Complete,
                        solutions,
                        stats: self.stats,
                    };
                };
                self.stats.backtracks += 1;
                if self.stats.backtracks > backtrack_limit {
                    return EngineResult {
                        status: EngineStatus::BudgetExceeded,
                        solutions,
                        stats: self.stats,
                    };
                }
                self.undo_to(mark);
                self.level = decisions.len() as u32;
                let bit = 1u16 << c;
                self.conflict_lvl = u32::MAX;
                self.set_dom(v, self.dom[v as usize] & !bit, self.level);
                if !self.conflict {
                    self.propagate();
                }
                if !self.conflict {
                    break;
                }
                jump_to = self.conflict_lvl;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(adj: Vec<Vec<u32>>, k: u8, seeds: &[Option<u8>]) -> EngineResult {
        let target = vec![MatchTarget::ExactlyOne; adj.len()];
        let mut r = Engine::new(&adj, k, &target, seeds).run(usize::MAX, 1_000_000);
        r.solutions.sort();
        r
    }

    #[test]
    fn k2_two_solutions() {
        let adj = vec![vec![1], vec![0]];
        let r = run(adj, 2, &[None, None]);
        assert_eq!(r.status, EngineStatus::Complete);
        assert_eq!(r.solutions, vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn triangle_unsat() {
        let adj = vec![vec![1, 2], vec![0, 2], vec![0, 1]];
        let r = run(adj, 2, &[None, None, None]);
        assert_eq!(r.status, EngineStatus::Complete);
        assert!(r.solutions.is_empty());
    }

    #[test]
    fn k4_six_solutions() {
        let adj = vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]];
        let r = run(adj, 2, &[None; 4]);
        assert_eq!(r.status, EngineStatus::Complete);
        assert_eq!(r.solutions.len(), 6);
    }

    #[test]
    fn seeds_respected() {
        let adj = vec![vec![1], vec![0]];
        let r = run(adj, 2, &[Some(1), None]);
        assert_eq!(r.solutions, vec![vec![1, 1]]);
    }

    #[test]
    fn zero_target_terminal() {
        // Path x - a - b: a, b internal (must match each other), x external.
        let adj = vec![vec![1], vec![0, 2], vec![1]];
        let target = vec![MatchTarget::Zero, MatchTarget::ExactlyOne, MatchTarget::ExactlyOne];
        let mut r = Engine::new(&adj, 2, &target, &[None; 3]).run(usize::MAX, 1_000_000);
        r.solutions.sort();
        assert_eq!(r.status, EngineStatus::Complete);
        // a == b, x != a: two mirror colorings.
        assert_eq!(r.solutions, vec![vec![0, 1, 1], vec![1, 0, 0]]);
    }

    #[test]
    fn budget_is_reported() {
        // A 4x4 toroidal grid has many deep dead ends under a zero budget.
        let n = 16u32;
        let adj: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let (r, c) = (i / 4, i % 4);
                vec![
                    (r * 4) + (c + 1) % 4,
                    (r * 4) + (c + 3) % 4,
                    ((r + 1) % 4) * 4 + c,
                    ((r + 3) % 4) * 4 + c,
                ]
            })
            .collect();
        let target = vec![MatchTarget::ExactlyOne; n as usize];
        let r = Engine::new(&adj, 3, &target, &[None; 16]).run(usize::MAX, 0);
        assert_eq!(r.status, EngineStatus::BudgetExceeded);
    }

    #[test]
    fn enumeration_complete_on_cycles() {
        // C4: 4 solutions; C8: 2 matchings x 2 colorings x ... = 8? Count
        // against an independent brute force.
        for n in [4usize, 6, 8] {
            let adj: Vec<Vec<u32>> = (0..n)
                .map(|i| vec![((i + n - 1) % n) as u32, ((i + 1) % n) as u32])
                .collect();
            let mut expected = 0usize;
            for mask in 0..(1u32 << n) {
                let ok = (0..n).all(|v| {
                    let c = (mask >> v) & 1;
                    let same = adj[v]
                        .iter()
                        .filter(|&&w| (mask >> w) & 1 == c)
                        .count();
                    same == 1
                });
                if ok {
                    expected += 1;
                }
            }
            let r = run(adj, 2, &vec![None; n]);
            assert_eq!(r.status, EngineStatus::Complete);
            assert_eq!(r.solutions.len(), expected, "C{n}");
        }
    }
}
