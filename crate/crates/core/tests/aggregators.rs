mod common;

use factcrowd::aggregators::{
    cwmv_scores, mv_scores, AdviceMatrix, Aggregator, Exp4, ExpertiseTree, MetaCmab, Penalty, RidgeModel,
};
use factcrowd::data::Category;
use factcrowd::seed::rng_for;
use factcrowd::simulation::{build_rounds, run_replica, Mode, MemberRanking, ReplicaInputs};
use nalgebra::Cholesky;
use proptest::prelude::*;
use rand::Rng;

const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn advice() -> impl Strategy<Value = AdviceMatrix> {
    (1usize..8, 2usize..5).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(prop::sample::select(GRID.to_vec()), n * k),
            prop::collection::vec(prop::sample::select(Category::ALL.to_vec()), k),
        )
            .prop_map(move |(e, c)| AdviceMatrix::new(n, k, e, c).unwrap())
    })
}

fn reversed(n: usize) -> Vec<usize> {
    (0..n).rev().collect()
}

proptest! {
    #[test]
    fn vote_scores_ignore_expert_order(a in advice()) {
        let p = a.permute_experts(&reversed(a.experts()));
        prop_assert_eq!(mv_scores(&a), mv_scores(&p));
        prop_assert_eq!(cwmv_scores(&a), cwmv_scores(&p));
    }

    #[test]
    fn exp4_probabilities_are_a_floored_distribution(
        a in advice(),
        gamma in 0.01f64..=1.0,
        rounds in prop::collection::vec((0usize..4, 0.0f64..=1.0), 0..30),
    ) {
        let mut e = Exp4::new(a.experts(), gamma).unwrap();
        let k = a.arms();
        for (arm, r) in rounds {
            e.update(&a, arm % k, r.round());
        }
        let p = e.arm_probabilities(&a);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for v in &p {
            prop_assert!(*v >= gamma / k as f64 - 1e-12);
        }
        let q = Exp4::with_weights(e.weights().iter().rev().copied().collect(), gamma)
            .unwrap()
            .arm_probabilities(&a.permute_experts(&reversed(a.experts())));
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn metacmab_scores_ignore_expert_order(
        a in advice(),
        rewards in prop::collection::vec(0u8..2, 1..20),
    ) {
        let n = a.experts();
        let perm = reversed(n);
        let b = a.permute_experts(&perm);
        let mut m1 = MetaCmab::new(n, 1.0, 1.0).unwrap();
        let mut m2 = m1.clone();
        for (t, r) in rewards.iter().enumerate() {
            let arm = t % a.arms();
            m1.update(&a.feature(arm), f64::from(*r)).unwrap();
            m2.update(&b.feature(arm), f64::from(*r)).unwrap();
        }
        for (x, y) in m1.scores(&a).iter().zip(m2.scores(&b)) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn ridge_matches_dense_solve_and_stays_positive_definite() {
    let mut rng = rng_for("ridge-fixtures", &[]);
    for case in 0..100 {
        let d = rng.random_range(2..10);
        let lambda = [0.1, 1.0, 5.0][case % 3];
        let mut model = RidgeModel::new(d, lambda).unwrap();
        let obs = rng.random_range(1..60);
        let mut xs = Vec::new();
        let mut rs = Vec::new();
        for _ in 0..obs {
            let mut x = vec![1.0];
            x.extend((1..d).map(|_| GRID[rng.random_range(0..5)]));
            let r = f64::from(rng.random_range(0..2u8));
            model.observe(&x, r).unwrap();
            xs.push(x);
            rs.push(r);
        }
        let want = common::ridge(&xs, &rs, lambda);
        for (got, want) in model.theta().iter().zip(&want) {
            assert!((got - want).abs() < 1e-10, "case {case}: {got} vs {want}");
        }
        let a = model.design();
        assert_eq!(a, &a.transpose(), "case {case}: design not symmetric");
        assert!(Cholesky::new(a.clone()).is_some(), "case {case}: design not positive definite");
    }
}

#[test]
fn exp4_full_exploration_plays_uniformly() {
    let a = AdviceMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.75, 0.25, 0.0]], vec![Category::Age; 3]).unwrap();
    let mut e = Exp4::new(2, 1.0).unwrap();
    let mut rng = rng_for("exp4-uniform", &[]);
    let mut counts = [0usize; 3];
    for _ in 0..30_000 {
        assert_eq!(e.arm_probabilities(&a), vec![1.0 / 3.0; 3]);
        let d = e.decide(&a, &mut rng);
        counts[d.chosen] += 1;
        Aggregator::update(&mut e, &a, d.chosen, if d.chosen == 0 { 1.0 } else { 0.0 });
    }
    for c in counts {
        assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.015, "{counts:?}");
    }
}

#[test]
fn exp4_single_correct_expert_regret_is_exploration_cost() {
    // one always-right, fully confident expert: each round's expected regret is gamma / K
    let gamma = 0.2;
    let mut e = Exp4::new(1, gamma).unwrap();
    let mut rng = rng_for("exp4-single", &[]);
    let rounds = 40_000;
    let mut regret = 0.0;
    for t in 0..rounds {
        let y = (t % 2) as f64;
        let a = AdviceMatrix::label_arms(&[y], Category::Gender).unwrap();
        let truth = [y, 1.0 - y];
        let best = if y == 1.0 { 0 } else { 1 };
        assert!((e.arm_probabilities(&a)[best] - (1.0 - gamma / 2.0)).abs() < 1e-12);
        let d = e.decide(&a, &mut rng);
        regret += 1.0 - truth[d.chosen];
        Aggregator::update(&mut e, &a, d.chosen, truth[d.chosen]);
    }
    let mean = regret / rounds as f64;
    assert!(mean >= 0.0);
    assert!((mean - gamma / 2.0).abs() < 0.01, "mean regret {mean}");
}

#[test]
fn infinite_penalty_tree_replays_metacmab() {
    let d = factcrowd::fixture::dataset();
    for replica in 0..10u64 {
        let mut rng = rng_for("tree-equivalence", &[replica]);
        let t = 1 + (replica % 5) as u8;
        let pop = d.participants_in(t);
        let group: Vec<usize> = pop.iter().copied().step_by(1 + replica as usize % 3).take(12).collect();
        let mode = if replica % 2 == 0 { Mode::Label } else { Mode::HeadlineSelection { arms: 4 } };
        let plan = build_rounds(&d, t, mode, &mut rng).unwrap();
        let inputs = ReplicaInputs::new(&d, &group, &plan, plan.rounds.len(), MemberRanking::Binary).unwrap();
        let n = inputs.group.len();
        let mut tree = ExpertiseTree::new(n, 1.0, 1.0, Penalty::Fixed(f64::INFINITY)).unwrap();
        let mut flat = MetaCmab::new(n, 1.0, 1.0).unwrap();
        let a = run_replica(&inputs, &mut tree, &mut rng_for("play", &[replica]));
        let b = run_replica(&inputs, &mut flat, &mut rng_for("play", &[replica]));
        assert_eq!(a.rewards, b.rewards);
        for (x, y) in a.trace.rounds.iter().zip(&b.trace.rounds) {
            assert_eq!((x.chosen, &x.scores, &x.predictions), (y.chosen, &y.scores, &y.predictions));
        }
    }
}
