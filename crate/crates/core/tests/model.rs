mod common;

use std::sync::Arc;

use common::{max_abs_diff, random_cost, random_discrete, random_problem, rng};
use mssp::model::cost::FD_STEP;
use mssp::model::discrete::DiscreteControl;
use mssp::model::monte_carlo::PolicyEstimate;
use mssp::model::validate::{check_degree, Requirement};
use mssp::problems::{cost_c2, make_circular_list, make_fig1};
use mssp::simplex_opt::{random_simplex_point, MinimizeOptions};
use mssp::{
    apply_t, collapse_self_loop_mode, evaluate_policy_monte_carlo, validate_problem,
    value_iteration, Control, CostModel, DiscreteSsp, MsspProblem, ViOptions,
};
use proptest::prelude::*;

fn fig1_as_mssp() -> MsspProblem<f64> {
    let mut p = MsspProblem::new(2);
    p.add_mode(0, vec![1, 2], CostModel::linear(vec![1.0, 1.0]));
    p.add_mode(1, vec![0, 2], CostModel::linear(vec![1.0, 1.0]));
    p
}

#[test]
fn validate_examples() {
    assert!(validate_problem(&fig1_as_mssp()).is_empty());

    let mut dup = fig1_as_mssp();
    dup.add_mode(0, vec![2, 2], CostModel::linear(vec![1.0, 1.0]));
    let v = validate_problem(&dup);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].requirement, Requirement::DistinctSuccessors);
    assert_eq!(v[0].mode, Some(1));

    let mut neg = fig1_as_mssp();
    neg.add_mode(1, vec![2], CostModel::constant(-1.0));
    let v = validate_problem(&neg);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].requirement, Requirement::PositiveCost);
}

#[test]
fn apply_t_examples() {
    let (d, _) = make_fig1(1.0).unwrap();
    let o = MinimizeOptions::default();
    assert_eq!(
        apply_t(&d, &[2.0, 2.0, 0.0], &o).unwrap().0,
        vec![2.0, 2.0, 0.0]
    );
    assert_eq!(
        apply_t(&d, &[0.0, 0.0, 0.0], &o).unwrap().0,
        vec![1.0, 1.0, 0.0]
    );

    let mut chain = MsspProblem::new(2);
    chain.add_mode(0, vec![2], CostModel::constant(1.0));
    chain.add_mode(1, vec![0], CostModel::constant(1.0));
    let (w1, pol) = apply_t(&chain, &[0.0; 3], &o).unwrap();
    assert_eq!(w1, vec![1.0, 1.0, 0.0]);
    assert!(pol[2].is_none());
    assert_eq!(apply_t(&chain, &w1, &o).unwrap().0, vec![1.0, 2.0, 0.0]);
}

#[test]
fn non_finite_cost_names_node_and_mode() {
    let mut p = MsspProblem::new(1);
    p.add_mode(0, vec![1], CostModel::constant(1.0));
    p.add_mode(
        0,
        vec![1],
        CostModel::custom(1, Arc::new(|_: &[f64]| f64::NAN)),
    );
    let r = apply_t(&p, &[0.0, 0.0], &MinimizeOptions::default());
    assert!(matches!(
        r,
        Err(mssp::Error::NonFiniteCost { node: 0, mode: 1 })
    ));
}

#[test]
fn fig1_residual_halves() {
    let (d, _) = make_fig1(1.0).unwrap();
    let opts = ViOptions {
        max_iter: 20,
        ..Default::default()
    };
    let s = value_iteration(&d, &[0.0, 0.0, 0.0], &opts).unwrap();
    assert!(!s.diagnostics.converged);
    assert_eq!(s.diagnostics.iterations, 20);
    for (k, &r) in s.diagnostics.residual_history.iter().enumerate() {
        // W_k = 2 − 2^{1−k}, so the k-th step is 2^{1−k}
        let expected = 2f64.powi(1 - (k as i32 + 1));
        assert!((r - expected).abs() < 1e-12, "k={} r={r}", k + 1);
    }
    let wk = 2.0 - 2f64.powi(-19);
    assert!((s.values[0] - wk).abs() < 1e-12);
    assert_eq!(s.diagnostics.residual, s.diagnostics.residual_history[19]);
}

#[test]
fn fig1_exact_start() {
    for c in [1.0, 3.0] {
        let (d, u) = make_fig1(c).unwrap();
        let s = value_iteration(&d, &u, &ViOptions::default()).unwrap();
        assert!(s.diagnostics.converged);
        assert_eq!(s.diagnostics.iterations, 1);
        assert_eq!(s.diagnostics.residual, 0.0);
        assert_eq!(s.values, u);
    }
}

#[test]
fn self_transition_examples() {
    let mut d = DiscreteSsp::new(1);
    d.add_control(0, 1.0, vec![(0, 0.5), (1, 0.5)]);
    d.add_control(0, 3.0, vec![(1, 1.0)]);
    let e = d.eliminate_self_transitions().unwrap();
    assert_eq!(e.controls(0)[0], DiscreteControl::new(2.0, vec![(1, 1.0)]));
    assert_eq!(e.controls(0)[1], d.controls(0)[1]);
}

#[test]
fn collapse_examples() {
    let r = 100_000;
    let (v, p) = collapse_self_loop_mode(&CostModel::<f64>::linear(vec![1.0, 1.0]), r);
    assert!((v - 1.0).abs() < 1e-12 && (p - 1.0).abs() < 1e-9);

    let c = CostModel::<f64>::polynomial(vec![1.0, 0.0, 1.0]);
    let (v, p) = collapse_self_loop_mode(&c, r);
    assert!((v - 2.0).abs() < 1e-10 && (p - 1.0).abs() < 1e-6);

    let (v, p) = collapse_self_loop_mode(&cost_c2::<f64>(), r);
    // independent scan of √(p² + (1−p)²)/p over (0, 1]
    let scan = (1..=r)
        .map(|k| {
            let p = k as f64 / r as f64;
            (p * p + (1.0 - p) * (1.0 - p)).sqrt() / p
        })
        .fold(f64::INFINITY, f64::min);
    assert!((v - scan).abs() < 1e-9 && (v - 1.0).abs() < 1e-12);
    assert!((p - 1.0).abs() < 1e-6);
}

#[test]
fn monte_carlo_fig1() {
    let (d, _) = make_fig1(1.0).unwrap();
    let policy = vec![
        Some(Control {
            mode_index: 0,
            xi: vec![0.5, 0.5],
        }),
        Some(Control {
            mode_index: 0,
            xi: vec![0.5, 0.5],
        }),
        None,
    ];
    let e = evaluate_policy_monte_carlo(&d, &policy, 0, 100_000, 7);
    assert!(!e.improper);
    assert!((e.mean - 2.0).abs() <= 3.0 * e.std_error, "{e:?}");
    // reproducible for a fixed seed
    assert_eq!(e, evaluate_policy_monte_carlo(&d, &policy, 0, 100_000, 7));
}

#[test]
fn monte_carlo_deterministic_chain() {
    let mut p = MsspProblem::new(2);
    p.add_mode(0, vec![2], CostModel::constant(1.5));
    p.add_mode(1, vec![0], CostModel::constant(2.0));
    let s = value_iteration(&p, &[0.0; 3], &ViOptions::default()).unwrap();
    let e = evaluate_policy_monte_carlo(&p, &s.policy, 1, 100, 1);
    assert_eq!(
        e,
        PolicyEstimate {
            mean: 3.5,
            std_error: 0.0,
            trials: 100,
            improper: false
        }
    );
}

#[test]
fn monte_carlo_improper_policy() {
    let g = make_circular_list(&[1.0; 4], cost_c2()).unwrap();
    let policy: Vec<_> = (0..5)
        .map(|i| {
            (i < 4).then(|| Control {
                mode_index: 0,
                xi: vec![0.5, 0.5],
            })
        })
        .collect();
    let e = evaluate_policy_monte_carlo(&g.problem, &policy, 2, 10, 3);
    assert!(e.improper);
    assert_eq!(e.mean, f64::INFINITY);
}

#[test]
fn degree_metadata_on_builtin_families() {
    let mut r = rng(11);
    for n in 1..=3 {
        for _ in 0..20 {
            let c = random_cost(&mut r, n);
            if let Some(d) = c.degree() {
                assert!(check_degree(&c, d, 5).is_none(), "{c:?}");
            }
        }
    }
}

fn central_difference(c: &CostModel<f64>, xi: &[f64], j: usize) -> f64 {
    let h = FD_STEP;
    let mut a = xi.to_vec();
    let mut b = xi.to_vec();
    a[j] += h;
    b[j] -= h;
    (c.eval(&a) - c.eval(&b)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn t_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, 6, true);
        let n = p.len();
        use rand::Rng;
        let mut lo: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..5.0)).collect();
        let mut hi: Vec<f64> = lo.iter().map(|&v| v + r.gen_range(0.0..2.0)).collect();
        lo[n - 1] = 0.0;
        hi[n - 1] = 0.0;
        let o = MinimizeOptions::default();
        let (tlo, _) = apply_t(&p, &lo, &o).unwrap();
        let (thi, _) = apply_t(&p, &hi, &o).unwrap();
        prop_assert_eq!(tlo[n - 1], 0.0);
        for i in 0..n {
            prop_assert!(tlo[i] <= thi[i] + 1e-8, "node {}: {} > {}", i, tlo[i], thi[i]);
        }
    }

    #[test]
    fn converged_vi_is_a_fixed_point(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, 5, true);
        let opts = ViOptions { tol: 1e-10, ..Default::default() };
        let s = value_iteration(&p, &vec![0.0; p.len()], &opts).unwrap();
        prop_assert!(s.diagnostics.converged);
        let (tu, _) = apply_t(&p, &s.values, &opts.minimize).unwrap();
        prop_assert!(max_abs_diff(&tu, &s.values) <= 2e-10);
    }

    #[test]
    fn self_transition_elimination_keeps_fixed_point(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = random_discrete(&mut r, 5);
        let e = d.eliminate_self_transitions().unwrap();
        for i in 0..e.node_count() {
            for c in e.controls(i) {
                prop_assert_eq!(c.self_probability(i), 0.0);
                let total: f64 = c.transitions.iter().map(|t| t.1).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
        let opts = ViOptions { tol: 1e-12, ..Default::default() };
        let a = value_iteration(&d, &vec![0.0; d.len()], &opts).unwrap();
        let b = value_iteration(&e, &vec![0.0; e.len()], &opts).unwrap();
        prop_assert!(max_abs_diff(&a.values, &b.values) < 1e-9);
    }

    #[test]
    fn analytic_gradients_match_central_differences(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let mut costs = vec![random_cost(&mut r, n)];
        costs.push(costs[0].homogenized());
        if n == 3 {
            costs.push(costs[0].restricted_to(vec![0, 2]));
        }
        for c in costs {
            if !c.gradient_is_exact() {
                continue;
            }
            for _ in 0..5 {
                let xi: Vec<f64> = random_simplex_point(&mut r, c.dim());
                if xi.iter().any(|&v| v < 1e-3) {
                    continue;
                }
                let g = c.gradient(&xi).unwrap();
                for (j, &gj) in g.iter().enumerate() {
                    let fd = central_difference(&c, &xi, j);
                    prop_assert!((gj - fd).abs() <= 1e-5 * gj.abs().max(1.0),
                        "{}: j={} analytic {} fd {}", c.kind_name(), j, gj, fd);
                }
            }
        }
    }
}
