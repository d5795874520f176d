mod common;

use std::sync::Arc;

use common::{random_cost, rng};
use mssp::problems::cost_c1;
use mssp::scalar::weighted_sum;
use mssp::simplex_opt::{simplex_grid, MinMethod};
use mssp::{minimize_mode, vertex_shortcut, CostModel, Error, MinimizeOptions};
use proptest::prelude::*;
use rand::Rng;

fn numeric() -> MinimizeOptions<f64> {
    MinimizeOptions {
        force_numeric: true,
        ..Default::default()
    }
}

/// Independent 1-D scan of `C(t, 1−t) + tW₁ + (1−t)W₂`.
fn scan2(c: &CostModel<f64>, w: &[f64], steps: usize) -> (f64, f64) {
    (0..=steps)
        .map(|k| {
            let t = k as f64 / steps as f64;
            (c.eval(&[t, 1.0 - t]) + t * w[0] + (1.0 - t) * w[1], t)
        })
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
}

#[test]
fn linear_cost_picks_cheapest_vertex() {
    let c = CostModel::linear(vec![3.0, 5.0]);
    let r = minimize_mode(&c, &[1.0, 0.0], &MinimizeOptions::default());
    assert_eq!(r.value, 4.0);
    assert_eq!(r.minimizer.xi, vec![1.0, 0.0]);
    assert_eq!(r.method, MinMethod::Vertex);
    let v = vertex_shortcut(&c, &[1.0, 0.0]).unwrap();
    assert_eq!((v.value, v.minimizer.xi), (4.0, vec![1.0, 0.0]));
}

#[test]
fn euclidean_examples() {
    let c = CostModel::euclidean(1.0, 2);
    for opts in [MinimizeOptions::default(), numeric()] {
        let r = minimize_mode(&c, &[0.0, 0.0], &opts);
        assert!((r.value - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r.minimizer.xi[0] - 0.5).abs() < 1e-6);

        let r = minimize_mode(&c, &[0.0, 1.0], &opts);
        let (sv, st) = scan2(&c, &[0.0, 1.0], 100_000);
        assert!((r.value - 1.0).abs() < 1e-12 && (sv - 1.0).abs() < 1e-12);
        assert_eq!(st, 1.0);
        assert!((r.minimizer.xi[0] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn vertex_shortcut_on_c1() {
    let c = cost_c1::<f64>();
    assert_eq!(c.vertex_values(), vec![4.0, 2.0]);
    let r = vertex_shortcut(&c, &[0.0, 0.0]).unwrap();
    assert_eq!(r.value, 2.0);
    assert_eq!(r.minimizer.xi, vec![0.0, 1.0]);
    let r = vertex_shortcut(&c, &[f64::INFINITY, 0.5]).unwrap();
    assert_eq!(r.value, 2.5);
    assert_eq!(r.minimizer.xi, vec![0.0, 1.0]);
}

#[test]
fn vertex_shortcut_refuses_non_concave() {
    let r = vertex_shortcut(&CostModel::euclidean(1.0, 2), &[0.0, 0.0]);
    assert!(matches!(r, Err(Error::NotConcave)));
}

#[test]
fn all_infinite_w() {
    let inf = f64::INFINITY;
    let r = minimize_mode(
        &CostModel::euclidean(1.0, 3),
        &[inf, inf, inf],
        &MinimizeOptions::default(),
    );
    assert_eq!(r.value, inf);
    assert!(r.minimizer.xi.is_empty());
}

#[test]
fn infinite_entries_restrict_to_facet() {
    let mut r = rng(3);
    for n in 2..=4 {
        for _ in 0..20 {
            let c = random_cost(&mut r, n);
            let mut w: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..3.0)).collect();
            let j = r.gen_range(0..n);
            w[j] = f64::INFINITY;
            let m = minimize_mode(&c, &w, &MinimizeOptions::default());
            assert_eq!(m.minimizer.xi[j], 0.0);
            assert!(m.value.is_finite());
        }
    }
}

fn concave_costs() -> Vec<CostModel<f64>> {
    vec![
        cost_c1(),
        CostModel::linear(vec![1.0, 2.5, 0.7]),
        CostModel::custom(
            3,
            Arc::new(|x: &[f64]| 3.0 - x.iter().map(|v| v * v).sum::<f64>()),
        )
        .declare_concave(),
        CostModel::custom(2, Arc::new(|x: &[f64]| 1.0 + (x[0] + 0.1).sqrt() + x[1]))
            .declare_concave(),
    ]
}

#[test]
fn vertex_shortcut_agrees_with_grid_scan() {
    let mut r = rng(17);
    for c in concave_costs() {
        let n = c.dim();
        for _ in 0..100 {
            let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..5.0)).collect();
            let v = vertex_shortcut(&c, &w).unwrap().value;
            let g = minimize_mode(&c, &w, &numeric()).value;
            assert!((v - g).abs() <= 1e-8, "{} vs {g}", v);
        }
    }
}

#[test]
fn support_identity_at_numeric_minimizers() {
    let mut r = rng(29);
    let quadratic = CostModel::custom(
        2,
        Arc::new(|x: &[f64]| 2.0 * x[0] * x[0] + x[0] * x[1] + 1.5 * x[1] * x[1]),
    )
    .with_gradient(Arc::new(|x: &[f64]| {
        vec![4.0 * x[0] + x[1], x[0] + 3.0 * x[1]]
    }))
    .with_degree(2.0);
    let costs = vec![
        CostModel::euclidean(1.0, 2),
        CostModel::weighted_euclidean(1.5, vec![1.0, 2.0, 0.5]),
        CostModel::euclidean_offset(1.0, vec![vec![1.0, 0.0], vec![0.5, 0.8]]),
        quadratic,
    ];
    let mut checked = 0;
    for c in costs {
        let d = c.degree().unwrap();
        for _ in 0..50 {
            let w: Vec<f64> = (0..c.dim()).map(|_| r.gen_range(0.0..0.6)).collect();
            let m = minimize_mode(&c, &w, &numeric());
            let xi = &m.minimizer.xi;
            let g = c.gradient(xi).unwrap();
            let cv = c.eval(xi);
            for j in (0..xi.len()).filter(|&j| xi[j] > 1e-6) {
                let lhs = m.value - w[j];
                let rhs = g[j] - (d - 1.0) * cv;
                assert!(
                    (lhs - rhs).abs() <= 1e-5,
                    "{}: {lhs} vs {rhs}",
                    c.kind_name()
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn value_matches_objective_and_beats_the_grid(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let c = random_cost(&mut r, n);
        let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..3.0)).collect();
        let m = minimize_mode(&c, &w, &MinimizeOptions::default());
        let xi = &m.minimizer.xi;
        prop_assert!((xi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(xi.iter().all(|&v| v >= 0.0));
        let at = c.eval(xi) + weighted_sum(xi, &w);
        prop_assert!((at - m.value).abs() <= 1e-12 * (1.0 + at.abs()));
        let res = if n <= 2 { 512 } else if n == 3 { 48 } else { 12 };
        let best = simplex_grid::<f64>(n, res)
            .iter()
            .map(|p| c.eval(p) + weighted_sum(p, &w))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(m.value <= best + 1e-7, "{} vs grid {}", m.value, best);
    }

    #[test]
    fn near_minimizers_are_within_slack(seed in any::<u64>(), n in 2usize..=3) {
        let mut r = rng(seed);
        let c = random_cost(&mut r, n);
        let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..3.0)).collect();
        let opts = MinimizeOptions { collect_near_minimizers: true, ..Default::default() };
        let m = minimize_mode(&c, &w, &opts);
        prop_assert!(!m.near_minimizers.is_empty());
        for p in &m.near_minimizers {
            let v = c.eval(&p.xi) + weighted_sum(&p.xi, &w);
            prop_assert!(v <= m.value + opts.slack * (1.0 + m.value.abs()) + 1e-12);
        }
    }
}
