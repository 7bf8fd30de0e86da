//! Frozen weighted rule sets compiled from trained banks.
//!
//! Literal indices always use the augmented layout: `l < n_literals` is
//! feature `l`, `l >= n_literals` is the negation of feature `l - n_literals`.

use crate::error::{Error, Result};
use crate::model::{argmax, Bank, Model};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    /// Sorted, duplicate-free augmented literal indices.
    pub literals: Vec<u32>,
    /// One weight per class.
    pub weights: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    n_literals: usize,
    n_classes: usize,
    rules: Vec<Rule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplanationLevel {
    Literal,
    Feature,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub level: ExplanationLevel,
    pub for_class: usize,
    /// `2 * n_literals` entries at literal level, `n_literals` at feature level.
    pub scores: Vec<i64>,
}

impl RuleSet {
    /// One rule per clause that includes at least one literal and has a
    /// nonzero weight; clause order is kept.
    pub fn compile(model: &Model) -> RuleSet {
        let n_literals = model.config.n_literals;
        let n_classes = model.config.n_classes;
        let mut rules = Vec::new();
        match &model.bank {
            Bank::Dense(bank) => {
                for j in 0..bank.n_clauses() {
                    let literals: Vec<u32> = bank
                        .row(j)
                        .iter()
                        .enumerate()
                        .filter(|(_, &s)| s >= 0)
                        .map(|(i, _)| i as u32)
                        .collect();
                    push_rule(&mut rules, literals, bank.weight_row(j));
                }
            }
            Bank::Sparse(bank) => {
                for j in 0..bank.n_clauses() {
                    let literals: Vec<u32> = bank
                        .pairs(j)
                        .iter()
                        .filter(|&&(_, s)| s >= 0)
                        .map(|&(l, _)| l)
                        .collect();
                    push_rule(&mut rules, literals, bank.weight_row(j));
                }
            }
        }
        RuleSet {
            n_literals,
            n_classes,
            rules,
        }
    }

    pub fn from_rules(n_literals: usize, n_classes: usize, rules: Vec<Rule>) -> Result<RuleSet> {
        for (i, r) in rules.iter().enumerate() {
            let bad = |why: &str| Err(Error::Contract(format!("rule {i}: {why}")));
            if r.literals.is_empty() {
                return bad("empty include set");
            }
            if r.literals.windows(2).any(|w| w[0] >= w[1]) {
                return bad("include list not sorted and unique");
            }
            if r.literals.last().is_some_and(|&l| l as usize >= 2 * n_literals) {
                return bad("literal index out of range");
            }
            if r.weights.len() != n_classes {
                return bad("weight row has wrong length");
            }
            if r.weights.iter().all(|&w| w == 0) {
                return bad("all-zero weight row");
            }
        }
        Ok(RuleSet {
            n_literals,
            n_classes,
            rules,
        })
    }

    pub fn n_literals(&self) -> usize {
        self.n_literals
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn check_width(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n_literals {
            return Err(Error::Data(format!(
                "input has {} features, rule set expects {}",
                x.len(),
                self.n_literals
            )));
        }
        Ok(())
    }

    fn fires(&self, rule: &Rule, x: &[u8]) -> bool {
        let n = self.n_literals as u32;
        rule.literals.iter().all(|&l| {
            if l < n {
                x[l as usize] != 0
            } else {
                x[(l - n) as usize] == 0
            }
        })
    }

    pub fn votes(&self, x: &[u8]) -> Result<Vec<i64>> {
        self.check_width(x)?;
        let mut votes = vec![0i64; self.n_classes];
        for rule in self.rules.iter().filter(|r| self.fires(r, x)) {
            for (v, &w) in votes.iter_mut().zip(&rule.weights) {
                *v += w as i64;
            }
        }
        Ok(votes)
    }

    /// Votes for a sorted list of active feature indices.
    pub fn votes_active(&self, active: &[u32]) -> Vec<i64> {
        let n = self.n_literals as u32;
        let mut votes = vec![0i64; self.n_classes];
        for rule in &self.rules {
            let fires = rule.literals.iter().all(|&l| {
                if l < n {
                    active.binary_search(&l).is_ok()
                } else {
                    active.binary_search(&(l - n)).is_err()
                }
            });
            if fires {
                for (v, &w) in votes.iter_mut().zip(&rule.weights) {
                    *v += w as i64;
                }
            }
        }
        votes
    }

    pub fn predict(&self, x: &[u8]) -> Result<usize> {
        Ok(argmax(&self.votes(x)?))
    }

    /// Prediction plus additive attribution: each firing rule credits its
    /// weight for `for_class` (default: the predicted class) to every literal
    /// it includes.
    pub fn predict_and_explain(
        &self,
        x: &[u8],
        level: ExplanationLevel,
        for_class: Option<usize>,
    ) -> Result<(usize, Explanation)> {
        self.check_width(x)?;
        if let Some(c) = for_class.filter(|&c| c >= self.n_classes) {
            return Err(Error::ClassOutOfRange {
                class: c,
                n_classes: self.n_classes,
            });
        }
        let mut votes = vec![0i64; self.n_classes];
        let firing: Vec<&Rule> = self.rules.iter().filter(|r| self.fires(r, x)).collect();
        for rule in &firing {
            for (v, &w) in votes.iter_mut().zip(&rule.weights) {
                *v += w as i64;
            }
        }
        let predicted = argmax(&votes);
        let class = for_class.unwrap_or(predicted);
        let mut literal_scores = vec![0i64; 2 * self.n_literals];
        for rule in &firing {
            for &l in &rule.literals {
                literal_scores[l as usize] += rule.weights[class] as i64;
            }
        }
        let scores = match level {
            ExplanationLevel::Literal => literal_scores,
            ExplanationLevel::Feature => feature_scores(&literal_scores),
        };
        Ok((
            predicted,
            Explanation {
                level,
                for_class: class,
                scores,
            },
        ))
    }
}

/// Collapse literal scores onto features: positive minus negated literal.
pub fn feature_scores(literal_scores: &[i64]) -> Vec<i64> {
    let n = literal_scores.len() / 2;
    (0..n)
        .map(|i| literal_scores[i] - literal_scores[i + n])
        .collect()
}

fn push_rule(rules: &mut Vec<Rule>, literals: Vec<u32>, weights: &[i32]) {
    if !literals.is_empty() && weights.iter().any(|&w| w != 0) {
        rules.push(Rule {
            literals,
            weights: weights.to_vec(),
        });
    }
}
