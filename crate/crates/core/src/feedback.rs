//! The feedback block: sums block votes, clips them, picks a negative class
//! and samples which clauses get updated.

use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteTally {
    votes: Vec<i64>,
}

impl VoteTally {
    pub fn zeros(n_classes: usize) -> Self {
        Self {
            votes: vec![0; n_classes],
        }
    }

    pub fn from_votes(votes: Vec<i64>) -> Self {
        Self { votes }
    }

    pub fn add_partial(&mut self, partial: &[i64]) {
        for (v, p) in self.votes.iter_mut().zip(partial) {
            *v += p;
        }
    }

    pub fn clear(&mut self) {
        self.votes.iter_mut().for_each(|v| *v = 0);
    }

    pub fn votes(&self) -> &[i64] {
        &self.votes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateDecision {
    pub target_class: usize,
    pub negative_class: usize,
    pub p_target: f64,
    pub p_negative: f64,
}

pub fn clip_votes(v: i64, threshold: u32) -> i64 {
    let t = threshold as i64;
    v.clamp(-t, t)
}

pub fn target_probability(votes: i64, threshold: u32) -> f64 {
    let t = threshold as f64;
    (t - clip_votes(votes, threshold) as f64) / (2.0 * t)
}

pub fn negative_probability(votes: i64, threshold: u32) -> f64 {
    let t = threshold as f64;
    (t + clip_votes(votes, threshold) as f64) / (2.0 * t)
}

/// Uniform class in `0..n_classes` other than `label`. One `below` draw.
pub fn sample_negative_class(label: usize, n_classes: usize, rng: &mut RngStream) -> usize {
    debug_assert!(n_classes >= 2);
    let r = rng.below(n_classes as u64 - 1) as usize;
    if r < label {
        r
    } else {
        r + 1
    }
}

pub fn update_probabilities(
    tally: &VoteTally,
    label: usize,
    threshold: u32,
    rng: &mut RngStream,
) -> UpdateDecision {
    let votes = tally.votes();
    let negative_class = sample_negative_class(label, votes.len(), rng);
    UpdateDecision {
        target_class: label,
        negative_class,
        p_target: target_probability(votes[label], threshold),
        p_negative: negative_probability(votes[negative_class], threshold),
    }
}

/// Per-clause update flags: all target draws in clause order, then all
/// negative draws.
pub fn sample_updates(
    decision: &UpdateDecision,
    n_clauses: usize,
    rng: &mut RngStream,
    target: &mut Vec<bool>,
    negative: &mut Vec<bool>,
) {
    target.clear();
    negative.clear();
    target.extend((0..n_clauses).map(|_| rng.bernoulli(decision.p_target)));
    negative.extend((0..n_clauses).map(|_| rng.bernoulli(decision.p_negative)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clipping() {
        assert_eq!(clip_votes(30, 11), 11);
        assert_eq!(clip_votes(-30, 11), -11);
        assert_eq!(clip_votes(4, 11), 4);
    }

    #[test]
    fn probability_boundaries() {
        assert_eq!(target_probability(11, 11), 0.0);
        assert_eq!(target_probability(-11, 11), 1.0);
        assert_eq!(target_probability(0, 11), 0.5);
        assert_eq!(negative_probability(0, 11), 0.5);
        assert_eq!(target_probability(500, 11), 0.0);
    }

    #[test]
    fn decision_uses_sampled_negative() {
        let tally = VoteTally::from_votes(vec![0, 0, 7]);
        let mut rng = RngStream::new(1);
        for _ in 0..50 {
            let d = update_probabilities(&tally, 1, 11, &mut rng);
            assert_ne!(d.negative_class, 1);
            assert_eq!(d.p_target, 0.5);
            let expect = if d.negative_class == 2 { 18.0 / 22.0 } else { 0.5 };
            assert_eq!(d.p_negative, expect);
        }
    }

    #[test]
    fn negative_class_is_uniform() {
        let mut rng = RngStream::new(77);
        let mut hist = [0usize; 4];
        for _ in 0..30_000 {
            hist[sample_negative_class(2, 4, &mut rng)] += 1;
        }
        assert_eq!(hist[2], 0);
        for k in [0, 1, 3] {
            assert!((9_500..10_500).contains(&hist[k]), "{hist:?}");
        }
    }

    #[test]
    fn sampling_extremes() {
        let mut rng = RngStream::new(0);
        let (mut t, mut n) = (Vec::new(), Vec::new());
        let d = UpdateDecision {
            target_class: 0,
            negative_class: 1,
            p_target: 0.0,
            p_negative: 1.0,
        };
        sample_updates(&d, 100, &mut rng, &mut t, &mut n);
        assert!(t.iter().all(|&b| !b));
        assert!(n.iter().all(|&b| b));
        assert_eq!(rng.position(), 200);
    }

    proptest! {
        #[test]
        fn probabilities_in_unit_interval(v in any::<i64>(), t in 1u32..10_000) {
            let p = target_probability(v, t);
            let q = negative_probability(v, t);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!((0.0..=1.0).contains(&q));
        }

        #[test]
        fn antisymmetric(v in -1_000_000i64..1_000_000, t in 1u32..10_000) {
            prop_assert_eq!(target_probability(v, t) + target_probability(-v, t), 1.0);
        }

        #[test]
        fn aggregation_order_invariant(parts in prop::collection::vec(prop::collection::vec(-50i64..50, 3), 1..8), seed in any::<u64>()) {
            let mut a = VoteTally::zeros(3);
            for p in &parts {
                a.add_partial(p);
            }
            let mut order: Vec<usize> = (0..parts.len()).collect();
            RngStream::new(seed).shuffle(&mut order);
            let mut b = VoteTally::zeros(3);
            for i in order {
                b.add_partial(&parts[i]);
            }
            prop_assert_eq!(a, b);
        }
    }
}
