//! Dense clause bank: one automaton per (clause, literal position) and a
//! signed weight per (clause, class), shared across all classes.

use std::ops::Range;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::rng::{keyed_unit, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseEvalMode {
    /// Empty clauses fire and the literal budget applies.
    Training,
    /// Empty clauses are silent and the budget is ignored.
    Inference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackDirection {
    /// The example's own class (+1).
    Target,
    /// The sampled negative class (-1).
    Negative,
}

impl FeedbackDirection {
    pub fn sign(self) -> i32 {
        match self {
            FeedbackDirection::Target => 1,
            FeedbackDirection::Negative => -1,
        }
    }
}

/// Parameters of the stochastic Type I rule, resolved once from a [`Config`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeIParams {
    pub p_increase: f64,
    pub p_decrease: f64,
    pub boost_true_positive: bool,
    pub state_min: i8,
    pub state_max: i8,
}

impl TypeIParams {
    pub fn new(s: f64, boost_true_positive: bool, state_min: i8, state_max: i8) -> Self {
        Self {
            p_increase: (s - 1.0) / s,
            p_decrease: 1.0 / s,
            boost_true_positive,
            state_min,
            state_max,
        }
    }

    pub fn dense(cfg: &Config) -> Self {
        Self::new(cfg.s, cfg.boost_true_positive, cfg.state_min, cfg.state_max)
    }

    /// Same rule with the sparse floor as the lower clamp.
    pub fn sparse(cfg: &Config) -> Self {
        Self::new(cfg.s, cfg.boost_true_positive, cfg.sparse_floor, cfg.state_max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseBank {
    n_clauses: usize,
    literal_len: usize,
    n_classes: usize,
    states: Vec<i8>,
    weights: Vec<i32>,
}

impl ClauseBank {
    /// Fresh bank for `cfg`: every automaton at `init_state`, every weight 0.
    pub fn new(cfg: &Config) -> Self {
        Self::filled(cfg.n_clauses, cfg.literal_len(), cfg.n_classes, cfg.init_state)
    }

    pub fn filled(n_clauses: usize, literal_len: usize, n_classes: usize, state: i8) -> Self {
        Self {
            n_clauses,
            literal_len,
            n_classes,
            states: vec![state; n_clauses * literal_len],
            weights: vec![0; n_clauses * n_classes],
        }
    }

    pub fn from_parts(
        n_clauses: usize,
        literal_len: usize,
        n_classes: usize,
        states: Vec<i8>,
        weights: Vec<i32>,
    ) -> Result<Self> {
        if states.len() != n_clauses * literal_len || weights.len() != n_clauses * n_classes {
            return Err(Error::Contract(format!(
                "bank shape {n_clauses}x{literal_len}/{n_classes} does not match {} states, {} weights",
                states.len(),
                weights.len()
            )));
        }
        Ok(Self {
            n_clauses,
            literal_len,
            n_classes,
            states,
            weights,
        })
    }

    pub fn n_clauses(&self) -> usize {
        self.n_clauses
    }

    pub fn literal_len(&self) -> usize {
        self.literal_len
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn states(&self) -> &[i8] {
        &self.states
    }

    pub fn weights(&self) -> &[i32] {
        &self.weights
    }

    pub fn row(&self, clause: usize) -> &[i8] {
        &self.states[clause * self.literal_len..(clause + 1) * self.literal_len]
    }

    pub fn row_mut(&mut self, clause: usize) -> &mut [i8] {
        &mut self.states[clause * self.literal_len..(clause + 1) * self.literal_len]
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

    pub fn set_state(&mut self, clause: usize, position: usize, state: i8) {
        self.states[clause * self.literal_len + position] = state;
    }

    pub fn include_count(&self, clause: usize) -> usize {
        self.row(clause).iter().filter(|&&s| s >= 0).count()
    }

    /// Copy out clauses `range` as an independent bank.
    pub fn slice(&self, range: Range<usize>) -> ClauseBank {
        ClauseBank {
            n_clauses: range.len(),
            literal_len: self.literal_len,
            n_classes: self.n_classes,
            states: self.states[range.start * self.literal_len..range.end * self.literal_len]
                .to_vec(),
            weights: self.weights[range.start * self.n_classes..range.end * self.n_classes]
                .to_vec(),
        }
    }

    /// Stack banks with identical literal and class widths, in order.
    pub fn concat(parts: Vec<ClauseBank>) -> Result<ClauseBank> {
        let mut iter = parts.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::Contract("cannot concatenate zero banks".into()))?;
        for part in iter {
            if part.literal_len != out.literal_len || part.n_classes != out.n_classes {
                return Err(Error::Contract("concatenating banks of different widths".into()));
            }
            out.n_clauses += part.n_clauses;
            out.states.extend_from_slice(&part.states);
            out.weights.extend_from_slice(&part.weights);
        }
        Ok(out)
    }
}

/// Clause output for one row of automaton states.
pub fn evaluate_clause(
    row: &[i8],
    literals: &[u8],
    mode: ClauseEvalMode,
    budget: usize,
) -> Result<bool> {
    if row.len() != literals.len() {
        return Err(Error::Contract(format!(
            "clause has {} literal slots but input has {}",
            row.len(),
            literals.len()
        )));
    }
    Ok(eval_row(row, literals, mode, budget))
}

#[inline]
pub(crate) fn eval_row(row: &[i8], literals: &[u8], mode: ClauseEvalMode, budget: usize) -> bool {
    match mode {
        ClauseEvalMode::Inference => {
            let mut included = false;
            for (&st, &bit) in row.iter().zip(literals) {
                if st >= 0 {
                    if bit == 0 {
                        return false;
                    }
                    included = true;
                }
            }
            included
        }
        ClauseEvalMode::Training => {
            let mut included = 0usize;
            let mut satisfied = true;
            for (&st, &bit) in row.iter().zip(literals) {
                if st >= 0 {
                    included += 1;
                    satisfied &= bit != 0;
                }
            }
            satisfied && included <= budget
        }
    }
}

/// Stochastic Type I feedback. Consumes exactly one stream value, the event
/// key; every literal position gets its own keyed uniform, used or not.
pub fn type_i_feedback(
    row: &mut [i8],
    literals: &[u8],
    clause_output: bool,
    params: &TypeIParams,
    rng: &mut RngStream,
) {
    let key = rng.next_u64();
    if clause_output {
        for (pos, (st, &bit)) in row.iter_mut().zip(literals).enumerate() {
            let u = keyed_unit(key, pos as u64);
            if bit != 0 {
                if (params.boost_true_positive || u < params.p_increase) && *st < params.state_max {
                    *st += 1;
                }
            } else if u < params.p_decrease && *st > params.state_min {
                *st -= 1;
            }
        }
    } else {
        for (pos, st) in row.iter_mut().enumerate() {
            let u = keyed_unit(key, pos as u64);
            if u < params.p_decrease && *st > params.state_min {
                *st -= 1;
            }
        }
    }
}

/// Deterministic Type II feedback: when the clause fired, push every excluded
/// literal whose bit is 0 one step toward inclusion.
pub fn type_ii_feedback(row: &mut [i8], literals: &[u8], clause_output: bool) {
    if !clause_output {
        return;
    }
    for (st, &bit) in row.iter_mut().zip(literals) {
        if bit == 0 && *st < 0 {
            *st += 1;
        }
    }
}

/// Which feedback type a (direction, weight sign) pair selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackType {
    TypeI,
    TypeII,
}

pub fn feedback_type(direction: FeedbackDirection, weight: i32) -> FeedbackType {
    match (direction, weight >= 0) {
        (FeedbackDirection::Target, true) | (FeedbackDirection::Negative, false) => {
            FeedbackType::TypeI
        }
        _ => FeedbackType::TypeII,
    }
}

/// One coalesced update of clause `clause` toward or away from `class`.
/// Feedback is applied first, then the weight moves by one when the clause fired.
#[allow(clippy::too_many_arguments)]
pub fn clause_update(
    bank: &mut ClauseBank,
    clause: usize,
    class: usize,
    direction: FeedbackDirection,
    update_sampled: bool,
    clause_output: bool,
    literals: &[u8],
    params: &TypeIParams,
    rng: &mut RngStream,
) {
    if !update_sampled {
        return;
    }
    let w = bank.weight(clause, class);
    let row = bank.row_mut(clause);
    match feedback_type(direction, w) {
        FeedbackType::TypeI => type_i_feedback(row, literals, clause_output, params, rng),
        FeedbackType::TypeII => type_ii_feedback(row, literals, clause_output),
    }
    if clause_output {
        bank.set_weight(clause, class, w.saturating_add(direction.sign()));
    }
}

/// Class votes of the whole bank; no randomness involved.
pub fn compute_block_votes(
    bank: &ClauseBank,
    literals: &[u8],
    mode: ClauseEvalMode,
    budget: usize,
) -> Vec<i64> {
    let mut votes = vec![0i64; bank.n_classes];
    for j in 0..bank.n_clauses {
        if eval_row(bank.row(j), literals, mode, budget) {
            for (v, &w) in votes.iter_mut().zip(bank.weight_row(j)) {
                *v += w as i64;
            }
        }
    }
    votes
}
