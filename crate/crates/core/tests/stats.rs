mod common;

use factcrowd::seed::rng_for;
use factcrowd::stats::{
    bootstrap_ci, gee_fit, kruskal_wallis, mann_whitney_u, mann_whitney_u_with, wilcoxon_signed_rank, PMethod,
    WorkingCorrelation,
};
use proptest::prelude::*;
use rand::Rng;

/// Small integer-valued samples so ties are common.
fn sample(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(0..8u8))).collect()
}

#[test]
fn wilcoxon_matches_enumeration() {
    let mut rng = rng_for("wilcoxon-oracle", &[]);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(5..=12);
        let a = sample(&mut rng, n);
        let b = sample(&mut rng, n);
        let Ok(r) = wilcoxon_signed_rank(&a, &b) else { continue };
        let want = common::wilcoxon_enumerated(&a, &b);
        assert!((r.p_value - want).abs() < 0.01, "{a:?} {b:?}: {} vs {want}", r.p_value);
        checked += 1;
    }
}

#[test]
fn mann_whitney_matches_enumeration() {
    let mut rng = rng_for("mwu-oracle", &[]);
    for _ in 0..100 {
        let n1 = rng.random_range(1..=6);
        let n2 = rng.random_range(1..=12 - n1);
        let x = sample(&mut rng, n1);
        let y = sample(&mut rng, n2);
        let r = mann_whitney_u(&x, &y).unwrap();
        let want = common::mwu_enumerated(&x, &y);
        assert!((r.p_value - want).abs() < 0.01, "{x:?} {y:?}: {} vs {want}", r.p_value);
    }
}

#[test]
fn kruskal_wallis_matches_brute_force() {
    let mut rng = rng_for("kw-oracle", &[]);
    for _ in 0..100 {
        let k = rng.random_range(2..6);
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let n = rng.random_range(1..15);
                sample(&mut rng, n)
            })
            .collect();
        let pooled = groups.concat();
        if pooled.iter().all(|v| *v == pooled[0]) {
            continue;
        }
        let h = kruskal_wallis(&groups).unwrap().statistic;
        let want = common::kruskal_h(&groups);
        assert!((h - want).abs() < 1e-10, "{h} vs {want}");
    }
}

#[test]
fn two_group_kruskal_wallis_agrees_with_normal_mann_whitney() {
    // H equals the squared uncorrected z of the rank-sum test, so p-values agree without continuity correction
    let mut rng = rng_for("kw-mwu", &[]);
    for _ in 0..20 {
        let x = sample(&mut rng, 40);
        let y: Vec<f64> = sample(&mut rng, 35).iter().map(|v| v + 1.0).collect();
        let kw = kruskal_wallis(&[x.clone(), y.clone()]).unwrap();
        let mw = mann_whitney_u_with(&x, &y, PMethod::Normal).unwrap();
        assert!((kw.p_value - mw.p_value).abs() < 0.02, "{} vs {}", kw.p_value, mw.p_value);
    }
}

fn regression_data(seed: u64, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut rng = rng_for("gee-data", &[seed]);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![1.0, rng.random_range(0..2u8).into(), rng.random::<f64>()])
        .collect();
    let y = x
        .iter()
        .map(|r| 0.3 + 0.2 * r[1] - 0.5 * r[2] + rng.random::<f64>() * r[1] - 0.4 * rng.random::<f64>())
        .collect();
    (y, x)
}

#[test]
fn independence_gee_on_singletons_is_ols() {
    for seed in 0..20 {
        let (y, x) = regression_data(seed, 60);
        let clusters: Vec<usize> = (0..y.len()).collect();
        let m = gee_fit(&y, &x, &clusters, &["c", "g", "u"], WorkingCorrelation::Independence).unwrap();
        let (beta, se) = common::ols_hc0(&y, &x);
        for i in 0..3 {
            assert!((m.coefficients[i] - beta[i]).abs() < 1e-8);
            assert!((m.std_errors[i] - se[i]).abs() < 1e-8);
            assert!((m.ci_lo[i] - (m.coefficients[i] - 1.96 * m.std_errors[i])).abs() < 1e-9);
        }
    }
}

#[test]
fn duplicating_every_cluster_shrinks_errors_by_root_two() {
    let (y, x) = regression_data(99, 80);
    let clusters: Vec<usize> = (0..80).map(|i| i / 4).collect();
    let once = gee_fit(&y, &x, &clusters, &["c", "g", "u"], WorkingCorrelation::Independence).unwrap();
    let y2 = [y.clone(), y].concat();
    let x2 = [x.clone(), x].concat();
    let c2: Vec<usize> = clusters.iter().copied().chain(clusters.iter().map(|c| c + 1000)).collect();
    let twice = gee_fit(&y2, &x2, &c2, &["c", "g", "u"], WorkingCorrelation::Independence).unwrap();
    for i in 0..3 {
        assert!((once.coefficients[i] - twice.coefficients[i]).abs() < 1e-10);
        assert!((once.std_errors[i] / twice.std_errors[i] - 2f64.sqrt()).abs() < 1e-8);
    }
}

proptest! {
    #[test]
    fn bootstrap_of_a_constant_is_a_point(c in -1e6f64..1e6, n in 1usize..50, seed in any::<u64>()) {
        let ci = bootstrap_ci(&vec![c; n], 200, n, 0.95, &mut rng_for("b", &[seed])).unwrap();
        prop_assert_eq!((ci.lo, ci.mean, ci.hi), (c, c, c));
    }

    #[test]
    fn bootstrap_interval_brackets_the_mean(v in prop::collection::vec(0.0f64..1.0, 2..40), seed in any::<u64>()) {
        let ci = bootstrap_ci(&v, 300, v.len(), 0.9, &mut rng_for("b", &[seed])).unwrap();
        prop_assert!(ci.lo <= ci.mean && ci.mean <= ci.hi);
        let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(*x), b.max(*x)));
        prop_assert!(ci.lo >= lo - 1e-12 && ci.hi <= hi + 1e-12);
    }

    #[test]
    fn rank_tests_ignore_monotone_transforms(x in prop::collection::vec(0u8..10, 3..10), y in prop::collection::vec(0u8..10, 3..10)) {
        let f = |v: &[u8], g: fn(f64) -> f64| v.iter().map(|a| g(f64::from(*a))).collect::<Vec<_>>();
        let a = mann_whitney_u(&f(&x, |v| v), &f(&y, |v| v)).unwrap();
        let b = mann_whitney_u(&f(&x, |v| v.exp()), &f(&y, |v| v.exp())).unwrap();
        prop_assert_eq!(a.statistic, b.statistic);
        prop_assert_eq!(a.p_value, b.p_value);
    }
}
