mod common;

use common::*;
use tsetlin_core::dense::ClauseEvalMode;
use tsetlin_core::executor::{Phase, PhaseTrace};
use tsetlin_core::rng::derive_stream;
use tsetlin_core::tuning::cross_validate;
use tsetlin_core::{argmax, evaluate, Config, Dataset, ExplanationLevel, RuleSet, Trainer};

#[test]
fn parity_on_wide_inputs_randomized() {
    let mut cfg = Config::new(40, 30, 3);
    cfg.n_blocks = 3;
    cfg.threshold = 12;
    let model = Trainer::new(cfg).epochs(2).fit(&rule_data(4, 40, 3, 500).into(), None).unwrap().model;
    let rs = RuleSet::compile(&model);
    let mut rng = derive_stream(4, 2);
    for _ in 0..10_000 {
        let x = random_bits(&mut rng, 40);
        let v = model.votes(&x, ClauseEvalMode::Inference).unwrap();
        assert_eq!(rs.votes(&x).unwrap(), v);
        assert_eq!(rs.predict(&x).unwrap(), argmax(&v));
    }
}

#[test]
fn explanation_completeness_on_trained_models() {
    for seed in 0..5 {
        let model = trained_model(seed, 10);
        let rs = RuleSet::compile(&model);
        let n = rs.n_literals();
        for x in all_inputs(n).into_iter().step_by(7) {
            for class in 0..rs.n_classes() {
                let (_, lit) = rs.predict_and_explain(&x, ExplanationLevel::Literal, Some(class)).unwrap();
                let (_, feat) = rs.predict_and_explain(&x, ExplanationLevel::Feature, Some(class)).unwrap();
                let expected: i64 = rs
                    .rules()
                    .iter()
                    .filter(|r| {
                        r.literals.iter().all(|&l| {
                            let l = l as usize;
                            if l < n { x[l] == 1 } else { x[l - n] == 0 }
                        })
                    })
                    .map(|r| r.weights[class] as i64 * r.literals.len() as i64)
                    .sum();
                assert_eq!(lit.scores.iter().sum::<i64>(), expected);
                for i in 0..n {
                    assert_eq!(feat.scores[i], lit.scores[i] - lit.scores[i + n]);
                }
            }
        }
    }
}

#[test]
fn sparse_engine_learns_and_is_job_independent() {
    let train = random_sparse(21, 40, 600, 0.15, 2);
    let eval = random_sparse(22, 40, 200, 0.15, 2);
    let mut cfg = Config::new(40, 40, 2);
    cfg.negated_literals_enabled = false;
    cfg.n_blocks = 4;
    cfg.threshold = 20;
    let a = Trainer::new(cfg.clone()).epochs(3).jobs(1).fit(&train.clone().into(), Some(&eval.clone().into())).unwrap();
    let b = Trainer::new(cfg).epochs(3).jobs(3).fit(&train.into(), Some(&eval.clone().into())).unwrap();
    assert_eq!(a.model, b.model);
    let acc = evaluate(&a.model, &eval.into()).unwrap();
    assert_eq!(Some(acc), a.final_accuracy());
}

#[test]
fn phases_follow_barrier_order_in_parallel_runs() {
    let trace = PhaseTrace::new();
    let mut cfg = listing_config(3);
    cfg.n_blocks = 4;
    Trainer::new(cfg).epochs(1).jobs(4).trace(&trace).fit(&xor_data(3, 50).into(), None).unwrap();
    let events = trace.events();
    let at = |step: u64, phase: Phase, block: Option<usize>| {
        events
            .iter()
            .position(|e| e.step == step && e.phase == phase && e.block == block)
            .unwrap_or_else(|| panic!("missing {phase:?} for step {step}, block {block:?}"))
    };
    for step in 0..50u64 {
        let fb = at(step, Phase::Feedback, None);
        for b in 0..4 {
            assert!(at(step, Phase::Evaluate, Some(b)) < fb);
            assert!(fb < at(step, Phase::Update, Some(b)));
            if step + 1 < 50 {
                assert!(at(step, Phase::Update, Some(b)) < at(step + 1, Phase::Evaluate, Some(b)));
            }
        }
    }
}

#[test]
fn cross_validation_on_separable_data() {
    // label = x2, learnable by one literal
    let base = xor_data(8, 200);
    let rows: Vec<Vec<u8>> = (0..base.len()).map(|i| base.row(i).to_vec()).collect();
    let labels = rows.iter().map(|r| r[2] as usize).collect();
    let data: Dataset = tsetlin_core::DenseDataset::from_rows(&rows, labels).unwrap().into();
    let mut cfg = Config::new(6, 10, 2);
    cfg.threshold = 5;
    let r = cross_validate(&cfg, &data, 2, 10, 1).unwrap();
    assert_eq!(r.fold_accuracies, vec![1.0, 1.0]);
    assert_eq!(r.std, 0.0);
    assert_eq!(r, cross_validate(&cfg, &data, 2, 10, 1).unwrap());
}
