//! Analytic memory accounting for dense banks.

use crate::config::Config;
use crate::error::{Error, Result};

/// One signed byte per automaton.
pub const BYTES_PER_STATE: u64 = 1;
/// Weights are stored as `i32`.
pub const BYTES_PER_WEIGHT: u64 = 4;

/// State bytes of a dense bank: `n_clauses * 2 * n_literals * BYTES_PER_STATE`.
///
/// Always counts both polarities, whatever `negated_literals_enabled` says,
/// so the figure is comparable across configurations.
pub fn dense_state_bytes(cfg: &Config) -> Result<u64> {
    (cfg.n_clauses as u64)
        .checked_mul(2)
        .and_then(|v| v.checked_mul(cfg.n_literals as u64))
        .and_then(|v| v.checked_mul(BYTES_PER_STATE))
        .ok_or(Error::Overflow)
}

pub fn dense_weight_bytes(cfg: &Config) -> Result<u64> {
    (cfg.n_clauses as u64)
        .checked_mul(cfg.n_classes as u64)
        .and_then(|v| v.checked_mul(BYTES_PER_WEIGHT))
        .ok_or(Error::Overflow)
}

pub fn gib(bytes: u64) -> f64 {
    bytes as f64 / (1u64 << 30) as f64
}
