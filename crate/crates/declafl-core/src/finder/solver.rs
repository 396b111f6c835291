//! Deterministic SAT search: watched-literal unit propagation, first-UIP
//! clause learning, chronological variable order (ascending index, false
//! phase first), no restarts. Identical inputs always produce identical
//! assignments and identical conflict behavior, which downstream ranking
//! depends on.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::finder::prop::Lit;

/// Abort hook for long searches; wall-clock budgets are provided by the
/// std-side companion crate.
pub trait Budget {
    fn exhausted(&self) -> bool;
}

/// Budget that never expires.
pub struct Unbounded;

impl Budget for Unbounded {
    fn exhausted(&self) -> bool {
        false
    }
}

/// Budget limited to a fixed number of propagation steps.
pub struct StepBudget {
    limit: u64,
    steps: core::cell::Cell<u64>,
}

impl StepBudget {
    pub fn new(limit: u64) -> Self {
        StepBudget { limit, steps: core::cell::Cell::new(0) }
    }
}

impl Budget for StepBudget {
    fn exhausted(&self) -> bool {
        let s = self.steps.get() + 1;
        self.steps.set(s);
        s > self.limit
    }
}

const BUDGET_CHECK_INTERVAL: u64 = 4096;

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    propagations: u64,
    conflict_at_root: bool,
}

fn watch_index(l: Lit) -> usize {
    (l.var() as usize) * 2 + usize::from(!l.is_pos())
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        Solver {
            num_vars,
            clauses: Vec::new(),
            watches: alloc::vec![Vec::new(); num_vars * 2],
            assign: alloc::vec![0; num_vars],
            level: alloc::vec![0; num_vars],
            reason: alloc::vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            propagations: 0,
            conflict_at_root: false,
        }
    }

    fn value(&self, l: Lit) -> i8 {
        let v = self.assign[l.var() as usize];
        if l.is_pos() {
            v
        } else {
            -v
        }
    }

    /// Add a clause; returns false if the formula is already unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if self.conflict_at_root {
            return false;
        }
        let mut clause: Vec<Lit> = lits.to_vec();
        clause.sort_unstable();
        clause.dedup();
        // Tautology check.
        for w in clause.windows(2) {
            if w[0].var() == w[1].var() {
                return true;
            }
        }
        match clause.len() {
            0 => {
                self.conflict_at_root = true;
                false
            }
            1 => {
                match self.value(clause[0]) {
                    1 => true,
                    -1 => {
                        self.conflict_at_root = true;
                        false
                    }
                    _ => {
                        self.enqueue(clause[0], None);
                        true
                    }
                }
            }
            _ => {
                let idx = self.clauses.len();
                self.watches[watch_index(clause[0].negate())].push(idx);
                self.watches[watch_index(clause[1].negate())].push(idx);
                self.clauses.push(clause);
                true
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var() as usize;
        self.assign[v] = if l.is_pos() { 1 } else { -1 };
        self.level[v] = self.trail_lim.len() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Propagate; returns the index of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            // Clauses watching ~p must be repaired.
            let widx = watch_index(p);
            let mut i = 0;
            'clauses: while i < self.watches[widx].len() {
                let ci = self.watches[widx][i];
                let false_lit = p.negate();
                // Normalize: the false literal sits at position 1.
                if self.clauses[ci][0] == false_lit {
                    self.clauses[ci].swap(0, 1);
                }
                let first = self.clauses[ci][0];
                if self.value(first) == 1 {
                    i += 1;
                    continue;
                }
                // Look for a replacement watch.
                for k in 2..self.clauses[ci].len() {
                    let cand = self.clauses[ci][k];
                    if self.value(cand) != -1 {
                        self.clauses[ci].swap(1, k);
                        self.watches[widx].swap_remove(i);
                        self.watches[watch_index(cand.negate())].push(ci);
                        continue 'clauses;
                    }
                }
                // Unit or conflict.
                if self.value(first) == -1 {
                    return Some(ci);
                }
                self.enqueue(first, Some(ci));
                i += 1;
            }
        }
        None
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn backtrack(&mut self, target: u32) {
        while self.decision_level() > target {
            let start = self.trail_lim.pop().unwrap();
            while self.trail.len() > start {
                let l = self.trail.pop().unwrap();
                let v = l.var() as usize;
                self.assign[v] = 0;
                self.reason[v] = None;
            }
        }
        self.qhead = self.trail.len();
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level. Relies on the invariant that
    /// a reason clause keeps its implied literal at position 0 while it
    /// stays a reason.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let current = self.decision_level();
        let mut seen = alloc::vec![false; self.num_vars];
        let mut learnt_tail: Vec<Lit> = Vec::new();
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();

        loop {
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl].len() {
                let q = self.clauses[confl][k];
                let v = q.var() as usize;
                if !seen[v] && self.level[v] > 0 {
                    seen[v] = true;
                    if self.level[v] == current {
                        counter += 1;
                    } else {
                        learnt_tail.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if seen[self.trail[index].var() as usize] {
                    break;
                }
            }
            let pl = self.trail[index];
            seen[pl.var() as usize] = false;
            counter -= 1;
            p = Some(pl);
            if counter == 0 {
                break;
            }
            confl = self.reason[pl.var() as usize].expect("non-decision literal has a reason");
        }

        let mut out = alloc::vec![p.unwrap().negate()];
        out.extend(learnt_tail);
        let back = out[1..]
            .iter()
            .map(|l| self.level[l.var() as usize])
            .max()
            .unwrap_or(0);
        // Move a max-level literal to the second watch slot.
        if out.len() > 1 {
            let pos = out[1..]
                .iter()
                .position(|l| self.level[l.var() as usize] == back)
                .unwrap()
                + 1;
            out.swap(1, pos);
        }
        (out, back)
    }

    /// Decide satisfiability. On SAT the final assignment is readable via
    /// `model_value`.
    pub fn solve(&mut self, budget: &dyn Budget) -> Result<bool> {
        if self.conflict_at_root {
            return Ok(false);
        }
        let mut next_check = BUDGET_CHECK_INTERVAL;
        loop {
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    return Ok(false);
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let idx = self.clauses.len();
                    self.watches[watch_index(learnt[0].negate())].push(idx);
                    self.watches[watch_index(learnt[1].negate())].push(idx);
                    let assert_lit = learnt[0];
                    self.clauses.push(learnt);
                    self.enqueue(assert_lit, Some(idx));
                }
            } else {
                if self.propagations >= next_check {
                    next_check = self.propagations + BUDGET_CHECK_INTERVAL;
                    if budget.exhausted() {
                        return Err(Error::Capacity {
                            message: alloc::string::String::from("solve budget exhausted"),
                        });
                    }
                }
                // Fixed order: lowest unassigned variable, false first.
                match self.assign.iter().position(|&a| a == 0) {
                    None => return Ok(true),
                    Some(v) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(Lit::neg(v as u32), None);
                    }
                }
            }
        }
    }

    pub fn model_value(&self, var: u32) -> bool {
        self.assign[var as usize] == 1
    }
}
