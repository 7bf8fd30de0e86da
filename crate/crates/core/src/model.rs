use crate::config::Config;
use crate::dataset::Dataset;
use crate::dense::{compute_block_votes, ClauseBank, ClauseEvalMode};
use crate::error::{Error, Result};
use crate::literals::LiteralVector;
use crate::sparse::SparseClauseBank;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bank {
    Dense(ClauseBank),
    Sparse(SparseClauseBank),
}

/// A trained (or freshly initialized) machine: its config and clause bank.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: Config,
    pub bank: Bank,
}

impl Model {
    pub fn new_dense(config: Config) -> Result<Self> {
        config.validate()?;
        let bank = Bank::Dense(ClauseBank::new(&config));
        Ok(Self { config, bank })
    }

    pub fn new_sparse(config: Config) -> Result<Self> {
        config.validate()?;
        if config.negated_literals_enabled {
            return Err(Error::Config(
                "sparse banks require negated_literals_enabled = false".into(),
            ));
        }
        let bank = Bank::Sparse(SparseClauseBank::new(&config));
        Ok(Self { config, bank })
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.bank, Bank::Sparse(_))
    }

    pub fn n_clauses(&self) -> usize {
        match &self.bank {
            Bank::Dense(b) => b.n_clauses(),
            Bank::Sparse(b) => b.n_clauses(),
        }
    }

    /// Votes for raw feature bits `x` (length `n_literals`).
    pub fn votes(&self, x: &[u8], mode: ClauseEvalMode) -> Result<Vec<i64>> {
        if x.len() != self.config.n_literals {
            return Err(Error::Data(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.config.n_literals
            )));
        }
        let budget = self.config.budget_limit();
        Ok(match &self.bank {
            Bank::Dense(b) => {
                let lits = LiteralVector::from_features(x, self.config.negated_literals_enabled);
                compute_block_votes(b, lits.bits(), mode, budget)
            }
            Bank::Sparse(b) => {
                let active: Vec<u32> = (0..x.len() as u32).filter(|&i| x[i as usize] != 0).collect();
                b.votes(&active, mode, budget)
            }
        })
    }

    /// Votes for a sorted list of active feature indices.
    pub fn votes_sparse(&self, active: &[u32], mode: ClauseEvalMode) -> Vec<i64> {
        let budget = self.config.budget_limit();
        match &self.bank {
            Bank::Sparse(b) => b.votes(active, mode, budget),
            Bank::Dense(b) => {
                let mut x = vec![0u8; self.config.n_literals];
                for &l in active {
                    x[l as usize] = 1;
                }
                let lits = LiteralVector::from_features(&x, self.config.negated_literals_enabled);
                compute_block_votes(b, lits.bits(), mode, budget)
            }
        }
    }

    /// Inference-mode class for every example of `data`.
    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<usize>> {
        if data.n_literals() != self.config.n_literals {
            return Err(Error::Data(format!(
                "data has {} features but the model expects {}",
                data.n_literals(),
                self.config.n_literals
            )));
        }
        Ok(match data {
            Dataset::Dense(d) => (0..d.len())
                .map(|i| self.votes(d.row(i), ClauseEvalMode::Inference).map(|v| argmax(&v)))
                .collect::<Result<_>>()?,
            Dataset::Sparse(d) => d
                .examples()
                .iter()
                .map(|e| argmax(&self.votes_sparse(&e.active, ClauseEvalMode::Inference)))
                .collect(),
        })
    }
}

/// Index of the largest vote; ties go to the lowest class index.
pub fn argmax(votes: &[i64]) -> usize {
    let mut best = 0;
    for (k, &v) in votes.iter().enumerate().skip(1) {
        if v > votes[best] {
            best = k;
        }
    }
    best
}
