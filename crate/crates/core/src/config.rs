use crate::error::{Error, Result};

/// Hyperparameters of one Tsetlin machine.
///
/// `n_blocks` is part of the model: it fixes how clauses map to RNG streams,
/// so changing it changes what is learned. Thread count is not stored here.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub n_literals: usize,
    pub n_clauses: usize,
    pub n_classes: usize,
    /// Specificity, strictly greater than 1.
    pub s: f64,
    pub threshold: u32,
    /// Maximum included literals per clause during training. `None` is unbounded.
    pub n_literal_budget: Option<u32>,
    pub boost_true_positive: bool,
    pub init_state: i8,
    pub state_min: i8,
    pub state_max: i8,
    pub seed: u64,
    pub n_blocks: usize,
    pub negated_literals_enabled: bool,
    /// Implicit state of literals a sparse clause does not store.
    pub sparse_floor: i8,
    /// Per-clause cap on stored sparse pairs. `None` is unbounded.
    pub sparse_capacity: Option<u32>,
}

impl Config {
    pub const DEFAULT_S: f64 = 3.9;
    pub const DEFAULT_THRESHOLD: u32 = 15;
    pub const DEFAULT_SPARSE_FLOOR: i8 = -15;

    pub fn new(n_literals: usize, n_clauses: usize, n_classes: usize) -> Self {
        Self {
            n_literals,
            n_clauses,
            n_classes,
            s: Self::DEFAULT_S,
            threshold: Self::DEFAULT_THRESHOLD,
            n_literal_budget: None,
            boost_true_positive: false,
            init_state: -1,
            state_min: -127,
            state_max: 127,
            seed: 0,
            n_blocks: 1,
            negated_literals_enabled: true,
            sparse_floor: Self::DEFAULT_SPARSE_FLOOR,
            sparse_capacity: None,
        }
    }

    /// Length of the literal vector a clause sees.
    pub fn literal_len(&self) -> usize {
        if self.negated_literals_enabled {
            2 * self.n_literals
        } else {
            self.n_literals
        }
    }

    pub fn budget_limit(&self) -> usize {
        self.n_literal_budget.map_or(usize::MAX, |b| b as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_literals == 0 {
            return fail("n_literals must be positive".into());
        }
        if self.n_literals > u32::MAX as usize {
            return fail("n_literals must fit in 32 bits".into());
        }
        if self.n_clauses == 0 {
            return fail("n_clauses must be positive".into());
        }
        if self.n_classes < 2 {
            return fail(format!("n_classes must be at least 2, got {}", self.n_classes));
        }
        if !(self.s > 1.0) || !self.s.is_finite() {
            return fail(format!("s must be a finite value > 1, got {}", self.s));
        }
        if self.threshold == 0 {
            return fail("threshold must be positive".into());
        }
        if self.n_literal_budget == Some(0) {
            return fail("n_literal_budget must be at least 1".into());
        }
        if !(self.state_min <= self.init_state && self.init_state < 0 && 0 <= self.state_max) {
            return fail(format!(
                "need state_min <= init_state < 0 <= state_max, got {} / {} / {}",
                self.state_min, self.init_state, self.state_max
            ));
        }
        if self.n_blocks == 0 || self.n_blocks > self.n_clauses {
            return fail(format!(
                "n_blocks must be in 1..={}, got {}",
                self.n_clauses, self.n_blocks
            ));
        }
        if self.sparse_floor >= 0 {
            return fail(format!("sparse_floor must be negative, got {}", self.sparse_floor));
        }
        if self.sparse_capacity == Some(0) {
            return fail("sparse_capacity must be at least 1".into());
        }
        Ok(())
    }

    /// One-line `key=value` rendering of every field, defaults included.
    pub fn describe(&self) -> String {
        let opt = |v: Option<u32>| v.map_or_else(|| "inf".to_string(), |b| b.to_string());
        format!(
            "n_literals={} n_clauses={} n_classes={} s={} threshold={} n_literal_budget={} \
             boost_true_positive={} init_state={} state_min={} state_max={} seed={} n_blocks={} \
             negated_literals_enabled={} sparse_floor={} sparse_capacity={}",
            self.n_literals,
            self.n_clauses,
            self.n_classes,
            self.s,
            self.threshold,
            opt(self.n_literal_budget),
            self.boost_true_positive,
            self.init_state,
            self.state_min,
            self.state_max,
            self.seed,
            self.n_blocks,
            self.negated_literals_enabled,
            self.sparse_floor,
            opt(self.sparse_capacity),
        )
    }
}
