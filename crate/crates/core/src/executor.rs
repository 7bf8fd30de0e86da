//! The executor: epoch loop, example shuffling, clause-block threading and
//! per-epoch evaluation.
//!
//! Every example runs in two block phases separated by the feedback block:
//!
//! 1. the input block picks the next example of the epoch's permutation;
//! 2. each clause block computes its clause outputs and partial votes;
//! 3. the feedback block sums the partial votes, picks the negative class
//!    and samples per-clause update flags;
//! 4. each clause block applies the target and then the negative update.
//!
//! Blocks own their bank slice and RNG stream, and partial votes are summed
//! as integers, so the trained model does not depend on `n_jobs` or on how
//! threads get scheduled.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Barrier, Mutex, RwLock};
use std::time::{Duration, Instant};

use crate::config::Config;
use crate::dataset::{Dataset, DenseDataset, SparseDataset};
use crate::dense::{clause_update, eval_row, ClauseBank, ClauseEvalMode, FeedbackDirection, TypeIParams};
use crate::error::{Error, Result};
use crate::feedback::{sample_updates, update_probabilities, UpdateDecision, VoteTally};
use crate::literals::LiteralVector;
use crate::model::{Bank, Model};
use crate::rng::{derive_stream, RngStream, FEEDBACK_STREAM, SHUFFLE_STREAM};
use crate::sparse::{sparse_feedback, SparseClauseBank, SparseExample};

/// Contiguous clause ranges whose sizes differ by at most one.
pub fn partition_clauses(n_clauses: usize, n_blocks: usize) -> Result<Vec<Range<usize>>> {
    if n_blocks == 0 || n_blocks > n_clauses {
        return Err(Error::Config(format!(
            "cannot split {n_clauses} clauses into {n_blocks} blocks"
        )));
    }
    let base = n_clauses / n_blocks;
    let extra = n_clauses % n_blocks;
    let mut start = 0;
    Ok((0..n_blocks)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect())
}

/// `-1` means every available core; other values must be positive.
pub fn resolve_jobs(n_jobs: i32) -> Result<usize> {
    match n_jobs {
        -1 => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        n if n >= 1 => Ok(n as usize),
        n => Err(Error::Config(format!("n_jobs must be -1 or positive, got {n}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// `None` when no evaluation data was supplied.
    pub eval_accuracy: Option<f64>,
    /// Wall-clock time since training started, evaluation included.
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub epoch_metrics: Vec<EpochMetrics>,
    pub model: Model,
}

impl TrainRun {
    pub fn config(&self) -> &Config {
        &self.model.config
    }

    pub fn final_accuracy(&self) -> Option<f64> {
        self.epoch_metrics.last().and_then(|m| m.eval_accuracy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Prepare,
    Evaluate,
    Feedback,
    Update,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    /// Running example counter across all epochs.
    pub step: u64,
    pub block: Option<usize>,
    pub phase: Phase,
}

/// Records the order in which phases ran, for schedule tests.
#[derive(Debug, Default)]
pub struct PhaseTrace {
    events: Mutex<Vec<TraceEvent>>,
}

impl PhaseTrace {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&self, step: u64, block: Option<usize>, phase: Phase) {
        self.events
            .lock()
            .expect("trace poisoned")
            .push(TraceEvent { step, block, phase });
    }

    pub fn events(&self) -> Vec<TraceEvent> {
        self.events.lock().expect("trace poisoned").clone()
    }
}

fn trace(t: Option<&PhaseTrace>, step: u64, block: Option<usize>, phase: Phase) {
    if let Some(t) = t {
        t.record(step, block, phase);
    }
}

/// Per-block behavior for the two block phases of an example.
trait ClauseBlock: Send {
    fn evaluate(&mut self, example: usize, outputs: &mut [bool], votes: &mut [i64]);
    fn update(
        &mut self,
        example: usize,
        outputs: &[bool],
        decision: &UpdateDecision,
        target: &[bool],
        negative: &[bool],
    );
}

struct DenseInput {
    literal_len: usize,
    literals: Vec<u8>,
}

impl DenseInput {
    fn new(data: &DenseDataset, negated: bool) -> Self {
        let mut literals = Vec::new();
        for i in 0..data.len() {
            literals.extend_from_slice(LiteralVector::from_features(data.row(i), negated).bits());
        }
        Self {
            literal_len: if negated { 2 * data.n_features() } else { data.n_features() },
            literals,
        }
    }

    fn example(&self, i: usize) -> &[u8] {
        &self.literals[i * self.literal_len..(i + 1) * self.literal_len]
    }
}

struct DenseBlock<'d> {
    bank: ClauseBank,
    rng: RngStream,
    params: TypeIParams,
    budget: usize,
    input: &'d DenseInput,
}

impl ClauseBlock for DenseBlock<'_> {
    fn evaluate(&mut self, example: usize, outputs: &mut [bool], votes: &mut [i64]) {
        let lits = self.input.example(example);
        votes.iter_mut().for_each(|v| *v = 0);
        for (j, out) in outputs.iter_mut().enumerate() {
            *out = eval_row(self.bank.row(j), lits, ClauseEvalMode::Training, self.budget);
            if *out {
                for (v, &w) in votes.iter_mut().zip(self.bank.weight_row(j)) {
                    *v += w as i64;
                }
            }
        }
    }

    fn update(
        &mut self,
        example: usize,
        outputs: &[bool],
        decision: &UpdateDecision,
        target: &[bool],
        negative: &[bool],
    ) {
        let lits = self.input.example(example);
        for j in 0..outputs.len() {
            clause_update(
                &mut self.bank,
                j,
                decision.target_class,
                FeedbackDirection::Target,
                target[j],
                outputs[j],
                lits,
                &self.params,
                &mut self.rng,
            );
            clause_update(
                &mut self.bank,
                j,
                decision.negative_class,
                FeedbackDirection::Negative,
                negative[j],
                outputs[j],
                lits,
                &self.params,
                &mut self.rng,
            );
        }
    }
}

struct SparseInput<'d> {
    examples: &'d [SparseExample],
    domain: Vec<u32>,
}

struct SparseBlock<'d> {
    bank: SparseClauseBank,
    rng: RngStream,
    params: TypeIParams,
    budget: usize,
    input: &'d SparseInput<'d>,
}

impl ClauseBlock for SparseBlock<'_> {
    fn evaluate(&mut self, example: usize, outputs: &mut [bool], votes: &mut [i64]) {
        let active = &self.input.examples[example].active;
        votes.iter_mut().for_each(|v| *v = 0);
        for (j, out) in outputs.iter_mut().enumerate() {
            *out = self
                .bank
                .evaluate_clause(j, active, ClauseEvalMode::Training, self.budget);
            if *out {
                for (v, &w) in votes.iter_mut().zip(self.bank.weight_row(j)) {
                    *v += w as i64;
                }
            }
        }
    }

    fn update(
        &mut self,
        example: usize,
        outputs: &[bool],
        decision: &UpdateDecision,
        target: &[bool],
        negative: &[bool],
    ) {
        let active = &self.input.examples[example].active;
        let domain = &self.input.domain;
        for j in 0..outputs.len() {
            sparse_feedback(
                &mut self.bank,
                j,
                decision.target_class,
                FeedbackDirection::Target,
                target[j],
                outputs[j],
                active,
                domain,
                &self.params,
                &mut self.rng,
            );
            sparse_feedback(
                &mut self.bank,
                j,
                decision.negative_class,
                FeedbackDirection::Negative,
                negative[j],
                outputs[j],
                active,
                domain,
                &self.params,
                &mut self.rng,
            );
        }
    }
}

/// The feedback block plus the bookkeeping the coordinating thread owns.
struct Coordinator<'a> {
    threshold: u32,
    n_clauses: usize,
    labels: &'a [usize],
    rng: RngStream,
    tally: VoteTally,
    target: Vec<bool>,
    negative: Vec<bool>,
    step: u64,
    trace: Option<&'a PhaseTrace>,
}

impl Coordinator<'_> {
    fn feedback(&mut self, example: usize, partials: impl Iterator<Item = Vec<i64>>) -> UpdateDecision {
        self.tally.clear();
        for p in partials {
            self.tally.add_partial(&p);
        }
        let decision = update_probabilities(&self.tally, self.labels[example], self.threshold, &mut self.rng);
        sample_updates(&decision, self.n_clauses, &mut self.rng, &mut self.target, &mut self.negative);
        trace(self.trace, self.step, None, Phase::Feedback);
        decision
    }
}

struct Slot<B> {
    index: usize,
    range: Range<usize>,
    block: B,
    outputs: Vec<bool>,
}

fn run_epoch_sequential<B: ClauseBlock>(slots: &mut [Slot<B>], order: &[usize], coord: &mut Coordinator<'_>, n_classes: usize) {
    let mut partials: Vec<Vec<i64>> = vec![vec![0; n_classes]; slots.len()];
    for &ex in order {
        trace(coord.trace, coord.step, None, Phase::Prepare);
        for (slot, partial) in slots.iter_mut().zip(partials.iter_mut()) {
            slot.block.evaluate(ex, &mut slot.outputs, partial);
            trace(coord.trace, coord.step, Some(slot.index), Phase::Evaluate);
        }
        let decision = coord.feedback(ex, partials.iter().cloned());
        for slot in slots.iter_mut() {
            slot.block.update(
                ex,
                &slot.outputs,
                &decision,
                &coord.target[slot.range.clone()],
                &coord.negative[slot.range.clone()],
            );
            trace(coord.trace, coord.step, Some(slot.index), Phase::Update);
        }
        coord.step += 1;
    }
}

struct SharedFeedback {
    decision: Option<UpdateDecision>,
    target: Vec<bool>,
    negative: Vec<bool>,
}

fn run_epoch_parallel<B: ClauseBlock>(
    slots: &mut [Slot<B>],
    order: &[usize],
    coord: &mut Coordinator<'_>,
    n_classes: usize,
    n_workers: usize,
) {
    let n_blocks = slots.len();
    let partials: Vec<Mutex<Vec<i64>>> = (0..n_blocks).map(|_| Mutex::new(vec![0; n_classes])).collect();
    let shared = RwLock::new(SharedFeedback {
        decision: None,
        target: Vec::new(),
        negative: Vec::new(),
    });
    let current = AtomicUsize::new(0);
    let step = AtomicUsize::new(0);
    let done = AtomicBool::new(false);
    let barrier = Barrier::new(n_workers + 1);
    let trace_ref = coord.trace;
    let step_base = coord.step;

    let mut per_worker: Vec<Vec<&mut Slot<B>>> = (0..n_workers).map(|_| Vec::new()).collect();
    for (b, slot) in slots.iter_mut().enumerate() {
        per_worker[b % n_workers].push(slot);
    }

    std::thread::scope(|scope| {
        for mut mine in per_worker {
            let (partials, shared, current, step, done, barrier) =
                (&partials, &shared, &current, &step, &done, &barrier);
            scope.spawn(move || loop {
                barrier.wait();
                if done.load(Ordering::Acquire) {
                    break;
                }
                let ex = current.load(Ordering::Acquire);
                let s = step_base + step.load(Ordering::Acquire) as u64;
                for slot in mine.iter_mut() {
                    let mut partial = partials[slot.index].lock().expect("partial votes poisoned");
                    slot.block.evaluate(ex, &mut slot.outputs, &mut partial);
                    trace(trace_ref, s, Some(slot.index), Phase::Evaluate);
                }
                barrier.wait();
                barrier.wait();
                let fb = shared.read().expect("feedback poisoned");
                let decision = fb.decision.as_ref().expect("decision published before update phase");
                for slot in mine.iter_mut() {
                    slot.block.update(
                        ex,
                        &slot.outputs,
                        decision,
                        &fb.target[slot.range.clone()],
                        &fb.negative[slot.range.clone()],
                    );
                    trace(trace_ref, s, Some(slot.index), Phase::Update);
                }
            });
        }

        for (i, &ex) in order.iter().enumerate() {
            current.store(ex, Ordering::Release);
            step.store(i, Ordering::Release);
            trace(coord.trace, coord.step, None, Phase::Prepare);
            barrier.wait(); // start phase 2
            barrier.wait(); // phase 2 done
            let decision = coord.feedback(
                ex,
                partials.iter().map(|p| p.lock().expect("partial votes poisoned").clone()),
            );
            {
                let mut fb = shared.write().expect("feedback poisoned");
                fb.decision = Some(decision);
                std::mem::swap(&mut fb.target, &mut coord.target);
                std::mem::swap(&mut fb.negative, &mut coord.negative);
            }
            barrier.wait(); // start phase 4
            // `shared` is next written after the following phase-2 barrier,
            // by which time every worker has dropped its read guard.
            coord.step += 1;
        }
        done.store(true, Ordering::Release);
        barrier.wait();
    });

    let mut fb = shared.into_inner().expect("feedback poisoned");
    coord.target = std::mem::take(&mut fb.target);
    coord.negative = std::mem::take(&mut fb.negative);
}

fn check_data(cfg: &Config, data: &Dataset, what: &str) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data(format!("{what} data is empty")));
    }
    data.check(cfg.n_literals, cfg.n_classes)
        .map_err(|e| Error::Data(format!("{what} data: {e}")))
}

/// Builder-style front end for [`train`] with progress and tracing hooks.
pub struct Trainer<'a> {
    config: Config,
    n_epochs: usize,
    n_jobs: i32,
    progress: Option<Box<dyn FnMut(&EpochMetrics) + 'a>>,
    trace: Option<&'a PhaseTrace>,
}

impl<'a> Trainer<'a> {
    pub fn new(config: Config) -> Self {
        Self {
            config,
            n_epochs: 1,
            n_jobs: 1,
            progress: None,
            trace: None,
        }
    }

    pub fn epochs(mut self, n_epochs: usize) -> Self {
        self.n_epochs = n_epochs;
        self
    }

    pub fn jobs(mut self, n_jobs: i32) -> Self {
        self.n_jobs = n_jobs;
        self
    }

    pub fn on_epoch(mut self, f: impl FnMut(&EpochMetrics) + 'a) -> Self {
        self.progress = Some(Box::new(f));
        self
    }

    pub fn trace(mut self, trace: &'a PhaseTrace) -> Self {
        self.trace = Some(trace);
        self
    }

    pub fn fit(mut self, train_data: &Dataset, eval_data: Option<&Dataset>) -> Result<TrainRun> {
        let cfg = self.config.clone();
        cfg.validate()?;
        let n_jobs = resolve_jobs(self.n_jobs)?;
        check_data(&cfg, train_data, "training")?;
        if let Some(e) = eval_data {
            check_data(&cfg, e, "evaluation")?;
        }
        let ranges = partition_clauses(cfg.n_clauses, cfg.n_blocks)?;
        let n_workers = n_jobs.min(ranges.len());
        let labels = train_data.labels();
        let mut coord = Coordinator {
            threshold: cfg.threshold,
            n_clauses: cfg.n_clauses,
            labels: &labels,
            rng: derive_stream(cfg.seed, FEEDBACK_STREAM),
            tally: VoteTally::zeros(cfg.n_classes),
            target: Vec::with_capacity(cfg.n_clauses),
            negative: Vec::with_capacity(cfg.n_clauses),
            step: 0,
            trace: self.trace,
        };
        let mut shuffle = derive_stream(cfg.seed, SHUFFLE_STREAM);
        let mut epochs = EpochLoop {
            n_epochs: self.n_epochs,
            n_examples: labels.len(),
            n_classes: cfg.n_classes,
            n_workers,
            eval_data,
            progress: self.progress.as_mut(),
            start: Instant::now(),
        };
        let budget = cfg.budget_limit();

        match train_data {
            Dataset::Dense(d) => {
                let initial = Model::new_dense(cfg.clone())?;
                let Bank::Dense(bank) = &initial.bank else { unreachable!() };
                let input = DenseInput::new(d, cfg.negated_literals_enabled);
                let params = TypeIParams::dense(&cfg);
                let mut slots: Vec<Slot<DenseBlock<'_>>> = ranges
                    .iter()
                    .enumerate()
                    .map(|(b, r)| Slot {
                        index: b,
                        range: r.clone(),
                        block: DenseBlock {
                            bank: bank.slice(r.clone()),
                            rng: derive_stream(cfg.seed, b as u64),
                            params,
                            budget,
                            input: &input,
                        },
                        outputs: vec![false; r.len()],
                    })
                    .collect();
                let snapshot = |slots: &[Slot<DenseBlock<'_>>]| -> Result<Model> {
                    let parts = slots.iter().map(|s| s.block.bank.clone()).collect();
                    Ok(Model {
                        config: cfg.clone(),
                        bank: Bank::Dense(ClauseBank::concat(parts)?),
                    })
                };
                epochs.run(&mut slots, &mut coord, &mut shuffle, snapshot, initial)
            }
            Dataset::Sparse(d) => {
                let initial = Model::new_sparse(cfg.clone())?;
                let Bank::Sparse(bank) = &initial.bank else { unreachable!() };
                let input = SparseInput {
                    examples: d.examples(),
                    domain: d.observed_literals(),
                };
                let params = TypeIParams::sparse(&cfg);
                let mut slots: Vec<Slot<SparseBlock<'_>>> = ranges
                    .iter()
                    .enumerate()
                    .map(|(b, r)| Slot {
                        index: b,
                        range: r.clone(),
                        block: SparseBlock {
                            bank: bank.slice(r.clone()),
                            rng: derive_stream(cfg.seed, b as u64),
                            params,
                            budget,
                            input: &input,
                        },
                        outputs: vec![false; r.len()],
                    })
                    .collect();
                let snapshot = |slots: &[Slot<SparseBlock<'_>>]| -> Result<Model> {
                    let parts = slots.iter().map(|s| s.block.bank.clone()).collect();
                    Ok(Model {
                        config: cfg.clone(),
                        bank: Bank::Sparse(SparseClauseBank::concat(parts)?),
                    })
                };
                epochs.run(&mut slots, &mut coord, &mut shuffle, snapshot, initial)
            }
        }
    }
}

struct EpochLoop<'e, 'p> {
    n_epochs: usize,
    n_examples: usize,
    n_classes: usize,
    n_workers: usize,
    eval_data: Option<&'e Dataset>,
    progress: Option<&'e mut Box<dyn FnMut(&EpochMetrics) + 'p>>,
    start: Instant,
}

impl EpochLoop<'_, '_> {
    fn run<B: ClauseBlock>(
        &mut self,
        slots: &mut [Slot<B>],
        coord: &mut Coordinator<'_>,
        shuffle: &mut RngStream,
        snapshot: impl Fn(&[Slot<B>]) -> Result<Model>,
        initial: Model,
    ) -> Result<TrainRun> {
        let mut metrics = Vec::with_capacity(self.n_epochs);
        let mut model = initial;
        for epoch in 1..=self.n_epochs {
            let mut order: Vec<usize> = (0..self.n_examples).collect();
            shuffle.shuffle(&mut order);
            if self.n_workers <= 1 {
                run_epoch_sequential(slots, &order, coord, self.n_classes);
            } else {
                run_epoch_parallel(slots, &order, coord, self.n_classes, self.n_workers);
            }
            model = snapshot(slots)?;
            let eval_accuracy = match self.eval_data {
                Some(d) => Some(evaluate(&model, d)?),
                None => None,
            };
            let m = EpochMetrics {
                epoch,
                eval_accuracy,
                elapsed: self.start.elapsed(),
            };
            if let Some(p) = self.progress.as_mut() {
                p(&m);
            }
            metrics.push(m);
        }
        Ok(TrainRun {
            epoch_metrics: metrics,
            model,
        })
    }
}

/// Train a fresh machine. Dense data trains a dense bank, sparse data a sparse one.
pub fn train(
    cfg: &Config,
    train_data: &Dataset,
    eval_data: Option<&Dataset>,
    n_epochs: usize,
    n_jobs: i32,
) -> Result<TrainRun> {
    Trainer::new(cfg.clone())
        .epochs(n_epochs)
        .jobs(n_jobs)
        .fit(train_data, eval_data)
}

/// Fraction of examples whose Inference-mode argmax equals the label.
pub fn evaluate(model: &Model, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Data("evaluation data is empty".into()));
    }
    let predictions = model.predict_all(data)?;
    let labels = data.labels();
    let correct = predictions.iter().zip(&labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Convenience for dense datasets.
pub fn evaluate_dense(model: &Model, data: &DenseDataset) -> Result<f64> {
    evaluate(model, &Dataset::Dense(data.clone()))
}

/// Convenience for sparse datasets.
pub fn evaluate_sparse(model: &Model, data: &SparseDataset) -> Result<f64> {
    evaluate(model, &Dataset::Sparse(data.clone()))
}
