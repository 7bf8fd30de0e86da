//! Sparse clause bank for very wide, sparse inputs.
//!
//! Each clause stores only the literals whose automaton sits above an
//! implicit `floor` state, as `(literal, state)` pairs sorted by literal.
//! A pair is materialized the first time its state moves above the floor and
//! evicted when it falls back to it, so memory follows the patterns the
//! clauses actually track rather than the size of the vocabulary.
//!
//! Negated literals are not used here: the literal layout is the raw feature
//! index space `[0, n_literals)`.
//!
//! Draws come from the block stream exactly as in the dense engine: a Type I
//! event reserves one draw per literal of the universe and literal `l` reads
//! draw `base + l`. Untouched literals are skipped without being computed.

use std::ops::Range;

use crate::config::Config;
use crate::dense::{feedback_type, ClauseEvalMode, FeedbackDirection, FeedbackType, TypeIParams};
use crate::error::{Error, Result};
use crate::rng::{keyed_unit, RngStream};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseExample {
    /// Sorted, duplicate-free feature indices that are 1.
    pub active: Vec<u32>,
    pub label: usize,
}

impl SparseExample {
    pub fn new(active: Vec<u32>, label: usize) -> Result<Self> {
        if let Some(w) = active.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!(
                "active indices must be strictly ascending, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self { active, label })
    }

    pub fn check_range(&self, n_literals: usize) -> Result<()> {
        match self.active.last() {
            Some(&last) if last as usize >= n_literals => Err(Error::Data(format!(
                "active index {last} out of range for {n_literals} literals"
            ))),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, literal: u32) -> bool {
        self.active.binary_search(&literal).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparseMemoryReport {
    pub pairs: u64,
    pub bytes: u64,
}

/// Bytes per stored pair: a `u32` literal index and an `i8` state.
pub const SPARSE_PAIR_BYTES: u64 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseClauseBank {
    n_literals: usize,
    n_classes: usize,
    floor: i8,
    capacity: Option<u32>,
    clauses: Vec<Vec<(u32, i8)>>,
    weights: Vec<i32>,
}

impl SparseClauseBank {
    pub fn new(cfg: &Config) -> Self {
        Self::empty(
            cfg.n_clauses,
            cfg.n_literals,
            cfg.n_classes,
            cfg.sparse_floor,
            cfg.sparse_capacity,
        )
    }

    pub fn empty(
        n_clauses: usize,
        n_literals: usize,
        n_classes: usize,
        floor: i8,
        capacity: Option<u32>,
    ) -> Self {
        Self {
            n_literals,
            n_classes,
            floor,
            capacity,
            clauses: vec![Vec::new(); n_clauses],
            weights: vec![0; n_clauses * n_classes],
        }
    }

    /// Rebuild from stored pairs. Pairs must be strictly sorted and above the floor.
    pub fn from_parts(
        n_literals: usize,
        n_classes: usize,
        floor: i8,
        capacity: Option<u32>,
        clauses: Vec<Vec<(u32, i8)>>,
        weights: Vec<i32>,
    ) -> Result<Self> {
        if weights.len() != clauses.len() * n_classes {
            return Err(Error::Contract("weight matrix does not match clause count".into()));
        }
        for (j, pairs) in clauses.iter().enumerate() {
            if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Contract(format!("clause {j}: pairs not strictly sorted")));
            }
            if let Some(&(l, s)) = pairs.iter().find(|&&(l, s)| s <= floor || l as usize >= n_literals) {
                return Err(Error::Contract(format!(
                    "clause {j}: invalid pair ({l}, {s}) for floor {floor}, {n_literals} literals"
                )));
            }
        }
        Ok(Self {
            n_literals,
            n_classes,
            floor,
            capacity,
            clauses,
            weights,
        })
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn n_literals(&self) -> usize {
        self.n_literals
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn floor(&self) -> i8 {
        self.floor
    }

    pub fn capacity(&self) -> Option<u32> {
        self.capacity
    }

    pub fn pairs(&self, clause: usize) -> &[(u32, i8)] {
        &self.clauses[clause]
    }

    pub fn weights(&self) -> &[i32] {
        &self.weights
    }

    pub fn weight_row(&self, clause: usize) -> &[i32] {
        &self.weights[clause * self.n_classes..(clause + 1) * self.n_classes]
    }

    pub fn weight(&self, clause: usize, class: usize) -> i32 {
        self.weights[clause * self.n_classes + class]
    }

    pub fn set_weight(&mut self, clause: usize, class: usize, w: i32) {
        self.weights[clause * self.n_classes + class] = w;
    }

    /// Stored state, or the floor for unstored literals.
    pub fn lookup(&self, clause: usize, literal: u32) -> i8 {
        let pairs = &self.clauses[clause];
        match pairs.binary_search_by_key(&literal, |&(l, _)| l) {
            Ok(i) => pairs[i].1,
            Err(_) => self.floor,
        }
    }

    /// Set a literal's state directly. Setting it to the floor (or below) evicts it.
    /// Ignores the capacity.
    pub fn set_state(&mut self, clause: usize, literal: u32, state: i8) {
        let pairs = &mut self.clauses[clause];
        match pairs.binary_search_by_key(&literal, |&(l, _)| l) {
            Ok(i) if state <= self.floor => {
                pairs.remove(i);
            }
            Ok(i) => pairs[i].1 = state,
            Err(_) if state <= self.floor => {}
            Err(i) => pairs.insert(i, (literal, state)),
        }
    }

    pub fn include_count(&self, clause: usize) -> usize {
        self.clauses[clause].iter().filter(|&&(_, s)| s >= 0).count()
    }

    /// Materialize clause `clause` as a dense row of length `n_literals`.
    pub fn dense_row(&self, clause: usize) -> Vec<i8> {
        let mut row = vec![self.floor; self.n_literals];
        for &(l, s) in &self.clauses[clause] {
            row[l as usize] = s;
        }
        row
    }

    pub fn memory_report(&self) -> SparseMemoryReport {
        let pairs: u64 = self.clauses.iter().map(|c| c.len() as u64).sum();
        let bytes = pairs * SPARSE_PAIR_BYTES + self.weights.len() as u64 * 4;
        SparseMemoryReport { pairs, bytes }
    }

    pub fn slice(&self, range: Range<usize>) -> SparseClauseBank {
        SparseClauseBank {
            n_literals: self.n_literals,
            n_classes: self.n_classes,
            floor: self.floor,
            capacity: self.capacity,
            clauses: self.clauses[range.clone()].to_vec(),
            weights: self.weights[range.start * self.n_classes..range.end * self.n_classes]
                .to_vec(),
        }
    }

    pub fn concat(parts: Vec<SparseClauseBank>) -> Result<SparseClauseBank> {
        let mut iter = parts.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::Contract("cannot concatenate zero banks".into()))?;
        for part in iter {
            if part.n_literals != out.n_literals
                || part.n_classes != out.n_classes
                || part.floor != out.floor
            {
                return Err(Error::Contract("concatenating incompatible sparse banks".into()));
            }
            out.clauses.extend(part.clauses);
            out.weights.extend(part.weights);
        }
        Ok(out)
    }

    /// Same literal universe padded to `n_literals`; stored pairs untouched.
    pub fn with_universe(mut self, n_literals: usize) -> Result<Self> {
        let max = self
            .clauses
            .iter()
            .filter_map(|c| c.last().map(|&(l, _)| l as usize + 1))
            .max()
            .unwrap_or(0);
        if n_literals < max {
            return Err(Error::Contract("universe smaller than stored literals".into()));
        }
        self.n_literals = n_literals;
        Ok(self)
    }

    fn under_capacity(&self, len: usize) -> bool {
        self.capacity.map_or(true, |c| len < c as usize)
    }

    /// Clause output by sorted-list intersection.
    pub fn evaluate_clause(
        &self,
        clause: usize,
        active: &[u32],
        mode: ClauseEvalMode,
        budget: usize,
    ) -> bool {
        let mut included = 0usize;
        let mut satisfied = true;
        let mut cursor = 0usize;
        for &(l, s) in &self.clauses[clause] {
            if s < 0 {
                continue;
            }
            included += 1;
            if satisfied {
                // Galloping is not worth it at typical clause sizes.
                while cursor < active.len() && active[cursor] < l {
                    cursor += 1;
                }
                if cursor == active.len() || active[cursor] != l {
                    satisfied = false;
                    if mode == ClauseEvalMode::Inference {
                        return false;
                    }
                }
            }
        }
        match mode {
            ClauseEvalMode::Inference => included > 0,
            ClauseEvalMode::Training => satisfied && included <= budget,
        }
    }

    pub fn votes(&self, active: &[u32], mode: ClauseEvalMode, budget: usize) -> Vec<i64> {
        let mut votes = vec![0i64; self.n_classes];
        for j in 0..self.n_clauses() {
            if self.evaluate_clause(j, active, mode, budget) {
                for (v, &w) in votes.iter_mut().zip(self.weight_row(j)) {
                    *v += w as i64;
                }
            }
        }
        votes
    }

    fn type_i(
        &mut self,
        clause: usize,
        active: &[u32],
        clause_output: bool,
        params: &TypeIParams,
        rng: &mut RngStream,
    ) {
        let key = rng.next_u64();
        let draw = |l: u32| keyed_unit(key, l as u64);
        let old = std::mem::take(&mut self.clauses[clause]);
        let mut out = Vec::with_capacity(old.len() + if clause_output { active.len() } else { 0 });
        let floor = self.floor;
        let mut a = 0usize;
        for (idx, &(l, mut s)) in old.iter().enumerate() {
            if clause_output {
                // Unstored active literals before `l` may be materialized.
                while a < active.len() && active[a] < l {
                    let lit = active[a];
                    a += 1;
                    let pending = out.len() + (old.len() - idx);
                    if (params.boost_true_positive || draw(lit) < params.p_increase)
                        && floor < params.state_max
                        && self.under_capacity(pending)
                    {
                        out.push((lit, floor + 1));
                    }
                }
                let bit = a < active.len() && active[a] == l;
                if bit {
                    a += 1;
                    if (params.boost_true_positive || draw(l) < params.p_increase)
                        && s < params.state_max
                    {
                        s += 1;
                    }
                } else if draw(l) < params.p_decrease {
                    s -= 1;
                }
            } else if draw(l) < params.p_decrease {
                s -= 1;
            }
            if s > floor {
                out.push((l, s));
            }
        }
        if clause_output {
            for &lit in &active[a..] {
                if (params.boost_true_positive || draw(lit) < params.p_increase)
                    && floor < params.state_max
                    && self.under_capacity(out.len())
                {
                    out.push((lit, floor + 1));
                }
            }
        }
        self.clauses[clause] = out;
    }

    /// Type II over stored pairs and over unstored literals of `domain` that are
    /// absent from the example.
    fn type_ii(&mut self, clause: usize, active: &[u32], domain: &[u32], clause_output: bool) {
        if !clause_output {
            return;
        }
        let old = std::mem::take(&mut self.clauses[clause]);
        let mut out = Vec::with_capacity(old.len());
        let floor = self.floor;
        let mut a = 0usize;
        let mut d = 0usize;
        let in_active = |a: &mut usize, l: u32| {
            while *a < active.len() && active[*a] < l {
                *a += 1;
            }
            *a < active.len() && active[*a] == l
        };
        for (idx, &(l, s)) in old.iter().enumerate() {
            while d < domain.len() && domain[d] < l {
                let lit = domain[d];
                d += 1;
                let pending = out.len() + (old.len() - idx);
                if !in_active(&mut a, lit) && self.under_capacity(pending) {
                    out.push((lit, floor + 1));
                }
            }
            if d < domain.len() && domain[d] == l {
                d += 1;
            }
            let bit = in_active(&mut a, l);
            let s = if !bit && s < 0 { s + 1 } else { s };
            out.push((l, s));
        }
        for &lit in &domain[d..] {
            if !in_active(&mut a, lit) && self.under_capacity(out.len()) {
                out.push((lit, floor + 1));
            }
        }
        self.clauses[clause] = out;
    }
}

/// Coalesced update of one sparse clause; decision logic mirrors
/// [`crate::dense::clause_update`]. `domain` is the sorted set of literals
/// Type II may materialize (the literals observed in the training data).
#[allow(clippy::too_many_arguments)]
pub fn sparse_feedback(
    bank: &mut SparseClauseBank,
    clause: usize,
    class: usize,
    direction: FeedbackDirection,
    update_sampled: bool,
    clause_output: bool,
    active: &[u32],
    domain: &[u32],
    params: &TypeIParams,
    rng: &mut RngStream,
) {
    if !update_sampled {
        return;
    }
    let w = bank.weight(clause, class);
    match feedback_type(direction, w) {
        FeedbackType::TypeI => bank.type_i(clause, active, clause_output, params, rng),
        FeedbackType::TypeII => bank.type_ii(clause, active, domain, clause_output),
    }
    if clause_output {
        bank.set_weight(clause, class, w.saturating_add(direction.sign()));
    }
}
