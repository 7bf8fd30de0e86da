//! Random hyperparameter search and stratified k-fold cross-validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::config::Config;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::executor::Trainer;
use crate::rng::{derive_stream, RngStream, HOLDOUT_STREAM, SEARCH_STREAM, SHUFFLE_STREAM};

#[derive(Debug, Clone, PartialEq)]
pub enum ParamRange {
    /// Inclusive integer range.
    Int { lo: i64, hi: i64 },
    /// Uniform real range.
    Real { lo: f64, hi: f64 },
    /// Log-uniform real range; `lo > 0`.
    Log { lo: f64, hi: f64 },
    Cat(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub range: ParamRange,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Text(v) => f.write_str(v),
        }
    }
}

/// Config fields a search space may name.
pub const TUNABLE: &[&str] = &[
    "n_clauses",
    "s",
    "threshold",
    "n_literal_budget",
    "boost_true_positive",
    "init_state",
    "state_min",
    "state_max",
    "seed",
    "n_blocks",
    "sparse_floor",
    "sparse_capacity",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchSpace {
    params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for p in &params {
            if !TUNABLE.contains(&p.name.as_str()) {
                return Err(Error::SearchSpace(format!("unknown parameter {:?}", p.name)));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(Error::SearchSpace(format!("parameter {:?} given twice", p.name)));
            }
            match &p.range {
                ParamRange::Int { lo, hi } if lo > hi => {
                    return Err(Error::SearchSpace(format!("{}: lower {lo} > upper {hi}", p.name)))
                }
                ParamRange::Real { lo, hi } if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() => {
                    return Err(Error::SearchSpace(format!("{}: bad real range {lo}..{hi}", p.name)))
                }
                ParamRange::Log { lo, hi } if !(*lo > 0.0 && lo <= hi) || !hi.is_finite() => {
                    return Err(Error::SearchSpace(format!(
                        "{}: log range needs 0 < lower <= upper, got {lo}..{hi}",
                        p.name
                    )))
                }
                ParamRange::Cat(v) if v.is_empty() => {
                    return Err(Error::SearchSpace(format!("{}: empty category list", p.name)))
                }
                _ => {}
            }
        }
        Ok(Self { params })
    }

    /// One parameter per line: `name int|real|log lower upper` or
    /// `name cat v1,v2,...`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut params = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::SearchSpace(format!("line {}: {msg}: {raw:?}", i + 1));
            let toks: Vec<&str> = line.split_whitespace().collect();
            let range = match toks.as_slice() {
                [_, "cat", values] => ParamRange::Cat(
                    values
                        .split(',')
                        .map(str::trim)
                        .filter(|v| !v.is_empty())
                        .map(String::from)
                        .collect(),
                ),
                [_, "int", lo, hi] => ParamRange::Int {
                    lo: lo.parse().map_err(|_| bad("bad integer bound"))?,
                    hi: hi.parse().map_err(|_| bad("bad integer bound"))?,
                },
                [_, kind @ ("real" | "log"), lo, hi] => {
                    let lo: f64 = lo.parse().map_err(|_| bad("bad real bound"))?;
                    let hi: f64 = hi.parse().map_err(|_| bad("bad real bound"))?;
                    if *kind == "real" {
                        ParamRange::Real { lo, hi }
                    } else {
                        ParamRange::Log { lo, hi }
                    }
                }
                _ => return Err(bad("expected `name int|real|log lo hi` or `name cat v1,v2`")),
            };
            params.push(ParamSpec {
                name: toks[0].to_string(),
                range,
            });
        }
        Self::new(params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    /// Draw one value per parameter, in declaration order.
    pub fn sample(&self, rng: &mut RngStream) -> Vec<(String, ParamValue)> {
        self.params
            .iter()
            .map(|p| {
                let v = match &p.range {
                    ParamRange::Int { lo, hi } => {
                        let span = hi.abs_diff(*lo).wrapping_add(1);
                        // span wraps to 0 only for the full i64 range
                        let off = if span == 0 { rng.next_u64() } else { rng.below(span) };
                        ParamValue::Int(lo.wrapping_add(off as i64))
                    }
                    ParamRange::Real { lo, hi } => ParamValue::Real(lo + rng.next_f64() * (hi - lo)),
                    ParamRange::Log { lo, hi } => {
                        let (a, b) = (lo.ln(), hi.ln());
                        ParamValue::Real((a + rng.next_f64() * (b - a)).exp().clamp(*lo, *hi))
                    }
                    ParamRange::Cat(vals) => ParamValue::Text(vals[rng.below(vals.len() as u64) as usize].clone()),
                };
                (p.name.clone(), v)
            })
            .collect()
    }
}

fn as_int(name: &str, v: &ParamValue) -> Result<i64> {
    match v {
        ParamValue::Int(i) => Ok(*i),
        ParamValue::Real(r) if r.fract() == 0.0 && r.abs() < 9.0e15 => Ok(*r as i64),
        ParamValue::Text(t) => t
            .trim()
            .parse()
            .map_err(|_| Error::SearchSpace(format!("{name}: {t:?} is not an integer"))),
        ParamValue::Real(r) => Err(Error::SearchSpace(format!("{name}: {r} is not an integer"))),
    }
}

fn as_real(name: &str, v: &ParamValue) -> Result<f64> {
    match v {
        ParamValue::Int(i) => Ok(*i as f64),
        ParamValue::Real(r) => Ok(*r),
        ParamValue::Text(t) => t
            .trim()
            .parse()
            .map_err(|_| Error::SearchSpace(format!("{name}: {t:?} is not a number"))),
    }
}

fn conv<T: TryFrom<i64>>(name: &str, v: &ParamValue) -> Result<T> {
    let i = as_int(name, v)?;
    T::try_from(i).map_err(|_| Error::SearchSpace(format!("{name}: {i} out of range")))
}

/// `inf`/`none` (or 0) mean unbounded.
fn optional_u32(name: &str, v: &ParamValue) -> Result<Option<u32>> {
    if let ParamValue::Text(t) = v {
        if matches!(t.trim().to_ascii_lowercase().as_str(), "inf" | "none") {
            return Ok(None);
        }
    }
    let b: u32 = conv(name, v)?;
    Ok((b != 0).then_some(b))
}

/// Set one named Config field.
pub fn apply_param(cfg: &mut Config, name: &str, v: &ParamValue) -> Result<()> {
    match name {
        "n_clauses" => cfg.n_clauses = conv(name, v)?,
        "s" => cfg.s = as_real(name, v)?,
        "threshold" => cfg.threshold = conv(name, v)?,
        "n_literal_budget" => cfg.n_literal_budget = optional_u32(name, v)?,
        "boost_true_positive" => {
            cfg.boost_true_positive = match v {
                ParamValue::Text(t) => match t.trim() {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(Error::SearchSpace(format!("{name}: {t:?} is not a boolean"))),
                },
                other => as_int(name, other)? != 0,
            }
        }
        "init_state" => cfg.init_state = conv(name, v)?,
        "state_min" => cfg.state_min = conv(name, v)?,
        "state_max" => cfg.state_max = conv(name, v)?,
        "seed" => cfg.seed = conv(name, v)?,
        "n_blocks" => cfg.n_blocks = conv(name, v)?,
        "sparse_floor" => cfg.sparse_floor = conv(name, v)?,
        "sparse_capacity" => cfg.sparse_capacity = optional_u32(name, v)?,
        _ => return Err(Error::SearchSpace(format!("unknown parameter {name:?}"))),
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validation {
    /// Hold out this fraction of the data (seeded shuffle) for evaluation.
    Holdout(f64),
    /// Mean accuracy of stratified k-fold cross-validation.
    CrossValidation(usize),
}

impl Default for Validation {
    fn default() -> Self {
        Validation::Holdout(0.2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// Position in sampling order.
    pub index: usize,
    pub params: Vec<(String, ParamValue)>,
    pub config: Config,
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub n_trials: usize,
    pub n_epochs: usize,
    pub seed: u64,
    pub validation: Validation,
    pub n_jobs: i32,
}

impl SearchOptions {
    pub fn new(n_trials: usize, n_epochs: usize, seed: u64) -> Self {
        Self {
            n_trials,
            n_epochs,
            seed,
            validation: Validation::default(),
            n_jobs: 1,
        }
    }
}

/// Seeded train/eval index split; both sides nonempty.
pub fn holdout_split(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("holdout fraction must be in (0, 1), got {fraction}")));
    }
    if n < 2 {
        return Err(Error::Data("holdout needs at least 2 examples".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    derive_stream(seed, HOLDOUT_STREAM).shuffle(&mut order);
    let n_eval = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let mut eval = order[..n_eval].to_vec();
    let mut train = order[n_eval..].to_vec();
    eval.sort_unstable();
    train.sort_unstable();
    Ok((train, eval))
}

/// Sample `n_trials` configs, score each, and rank by accuracy (descending,
/// ties keep sampling order). Neither `base` nor `data` is modified.
pub fn random_search(
    space: &SearchSpace,
    base: &Config,
    data: &Dataset,
    opts: &SearchOptions,
) -> Result<Vec<Trial>> {
    if opts.n_trials == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    let mut rng = derive_stream(opts.seed, SEARCH_STREAM);
    let mut sampled = Vec::with_capacity(opts.n_trials);
    for index in 0..opts.n_trials {
        let params = space.sample(&mut rng);
        let mut config = base.clone();
        for (name, v) in &params {
            apply_param(&mut config, name, v)?;
        }
        // A sampled clause count may undercut the block count.
        config.n_blocks = config.n_blocks.min(config.n_clauses.max(1));
        config.validate()?;
        sampled.push((index, params, config));
    }

    let holdout = match opts.validation {
        Validation::Holdout(f) => Some(holdout_split(data.len(), f, opts.seed)?),
        Validation::CrossValidation(_) => None,
    };
    let mut trials = Vec::with_capacity(sampled.len());
    for (index, params, config) in sampled {
        let accuracy = match (&holdout, opts.validation) {
            (Some((tr, ev)), _) => {
                let (train, eval) = (data.select(tr), data.select(ev));
                let run = Trainer::new(config.clone())
                    .epochs(opts.n_epochs)
                    .jobs(opts.n_jobs)
                    .fit(&train, Some(&eval))?;
                run.final_accuracy().unwrap_or(0.0)
            }
            (None, Validation::CrossValidation(k)) => {
                cross_validate_jobs(&config, data, k, opts.n_epochs, opts.seed, opts.n_jobs)?.mean
            }
            (None, Validation::Holdout(_)) => unreachable!(),
        };
        trials.push(Trial {
            index,
            params,
            config,
            accuracy,
        });
    }
    trials.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy).then(a.index.cmp(&b.index)));
    Ok(trials)
}

/// Fold index per example. Each class is shuffled, then dealt round-robin,
/// continuing from where the previous class stopped so fold sizes stay even.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    if let Some((class, members)) = by_class.iter().find(|(_, m)| m.len() < k) {
        return Err(Error::Data(format!(
            "class {class} has {} examples, fewer than k = {k}",
            members.len()
        )));
    }
    let mut rng = derive_stream(seed, SHUFFLE_STREAM);
    let mut folds = vec![0; labels.len()];
    let mut offset = 0;
    for members in by_class.values_mut() {
        rng.shuffle(members);
        for (j, &i) in members.iter().enumerate() {
            folds[i] = (offset + j) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    /// Fold index per example.
    pub folds: Vec<usize>,
}

pub fn cross_validate(cfg: &Config, data: &Dataset, k: usize, n_epochs: usize, seed: u64) -> Result<CvReport> {
    cross_validate_jobs(cfg, data, k, n_epochs, seed, 1)
}

/// As [`cross_validate`], training each fold with `n_jobs` workers. The
/// result does not depend on `n_jobs`.
pub fn cross_validate_jobs(
    cfg: &Config,
    data: &Dataset,
    k: usize,
    n_epochs: usize,
    seed: u64,
    n_jobs: i32,
) -> Result<CvReport> {
    let labels = data.labels();
    let folds = stratified_kfold(&labels, k, seed)?;
    let mut fold_accuracies = Vec::with_capacity(k);
    for fold in 0..k {
        let (held, rest): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| folds[i] == fold);
        let mut fold_cfg = cfg.clone();
        fold_cfg.seed = derive_stream(seed, fold as u64).stream_seed();
        let run = Trainer::new(fold_cfg)
            .epochs(n_epochs)
            .jobs(n_jobs)
            .fit(&data.select(&rest), Some(&data.select(&held)))?;
        let acc = match run.final_accuracy() {
            Some(a) => a,
            None => crate::executor::evaluate(&run.model, &data.select(&held))?,
        };
        fold_accuracies.push(acc);
    }
    let mean = fold_accuracies.iter().sum::<f64>() / k as f64;
    let var = fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Ok(CvReport {
        fold_accuracies,
        mean,
        std: var.sqrt(),
        folds,
    })
}
