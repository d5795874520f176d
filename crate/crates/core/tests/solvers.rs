mod common;

use std::sync::Arc;

use common::{max_abs_diff, random_acyclic_problem, random_problem, rng};
use mssp::causality::{certify_problem, CertifyOptions};
use mssp::eikonal::{build_mesh_mssp, equilateral_hexagon, BoundaryPenalty, ConstantSpeed};
use mssp::problems::{make_aux1, make_circular_list, make_fig1, make_multitask, TERMINAL_EPSILON};
use mssp::solvers::{BucketQueue, DependencyGraph};
use mssp::{
    dial_solve, dijkstra_solve, reachable_set, sweep_solve, value_iteration, verify_fixed_point,
    CostModel, Error, MsspProblem, ViOptions,
};
use proptest::prelude::*;
use rand::Rng;

fn vi(p: &MsspProblem<f64>, tol: f64) -> Vec<f64> {
    let opts = ViOptions {
        tol,
        ..Default::default()
    };
    let s = value_iteration(p, &vec![0.0; p.len()], &opts).unwrap();
    assert!(s.diagnostics.converged);
    s.values
}

#[test]
fn dijkstra_stalls_on_fig1() {
    let (d, _) = make_fig1(1.0).unwrap();
    let s = dijkstra_solve(&d).unwrap();
    assert_eq!(s.values, vec![f64::INFINITY, f64::INFINITY, 0.0]);
    assert_eq!(s.diagnostics.accept_order, vec![2]);
    let r = verify_fixed_point(&d, &s.values, 1e-9).unwrap();
    assert!(!r.pass);
    assert_eq!(r.infinite_inside_reachable, vec![0, 1]);
    assert_eq!(reachable_set(&d), vec![true, true, true]);
}

#[test]
fn dijkstra_on_aux1() {
    let g = make_aux1(CostModel::euclidean(1.0, 2), 1.0, 1.0).unwrap();
    let s = dijkstra_solve(&g.problem).unwrap();
    assert!((s.values[1] - (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
    assert_eq!(s.diagnostics.accept_order, vec![3, 0, 2, 1]);
    assert!(max_abs_diff(&s.values, g.expected.as_ref().unwrap()) < 1e-12);
    let sw = sweep_solve(&g.problem).unwrap();
    assert!(max_abs_diff(&s.values, &sw.values) < 1e-12);
}

#[test]
fn circular_list_exit_dominates() {
    let g = make_circular_list(&[1.0; 4], CostModel::euclidean(1.0, 2)).unwrap();
    let s = dijkstra_solve(&g.problem).unwrap();
    assert!(s.values[..4].iter().all(|&v| v == 1.0));
    assert!(max_abs_diff(&s.values, &vi(&g.problem, 1e-12)) < 1e-12);
    assert!(s.policy[..4]
        .iter()
        .all(|c| c.as_ref().unwrap().mode_index == 1));
}

#[test]
fn sweep_rejects_cycles_with_witness() {
    let g = make_circular_list(&[1.0; 6], CostModel::euclidean(1.0, 2)).unwrap();
    match sweep_solve(&g.problem) {
        Err(Error::Cycle { witness }) => {
            assert!(witness.len() >= 3);
            assert_eq!(witness.first(), witness.last());
            let graph = DependencyGraph::from_model(&g.problem);
            for e in witness.windows(2) {
                assert!(graph.has_edge(e[0], e[1]));
            }
        }
        other => panic!("expected a cycle, got {other:?}"),
    }
}

#[test]
fn sweep_on_multitask_matches_vi() {
    let g = make_multitask(3, 2, CostModel::linear(vec![1.0, 1.5]), TERMINAL_EPSILON).unwrap();
    let s = sweep_solve(&g.problem).unwrap();
    assert_eq!(s.diagnostics.accept_order[0], g.problem.target());
    assert!(max_abs_diff(&s.values, &vi(&g.problem, 1e-12)) < 1e-10);
}

#[test]
fn isolated_node_is_infinite_everywhere() {
    let mut p = MsspProblem::new(3);
    p.add_mode(0, vec![3], CostModel::constant(1.0));
    p.add_mode(1, vec![2], CostModel::constant(1.0));
    p.add_mode(2, vec![1], CostModel::constant(1.0));
    assert_eq!(reachable_set(&p), vec![true, false, false, true]);
    let inf = f64::INFINITY;
    assert_eq!(vi(&p, 1e-10), vec![1.0, inf, inf, 0.0]);
    assert_eq!(dijkstra_solve(&p).unwrap().values, vec![1.0, inf, inf, 0.0]);
    assert_eq!(
        dial_solve(&p, 0.5).unwrap().values,
        vec![1.0, inf, inf, 0.0]
    );
    assert!(matches!(sweep_solve(&p), Err(Error::Cycle { .. })));
    assert!(
        verify_fixed_point(&p, &[1.0, inf, inf, 0.0], 1e-12)
            .unwrap()
            .pass
    );
}

#[test]
fn circular_list_is_reachable() {
    let g = make_circular_list(&[2.0; 5], CostModel::euclidean(1.0, 2)).unwrap();
    assert!(reachable_set(&g.problem).iter().all(|&r| r));
}

#[test]
fn dial_rejects_bad_widths() {
    let g = make_aux1(CostModel::euclidean(1.0, 2), 1.0, 1.0).unwrap();
    assert!(matches!(
        dial_solve(&g.problem, 0.0),
        Err(Error::InvalidBucketWidth(_))
    ));
    assert!(matches!(
        dial_solve(&g.problem, -1.0),
        Err(Error::InvalidBucketWidth(_))
    ));
    assert!(matches!(
        dial_solve(&g.problem, 1e-12),
        Err(Error::BucketOverflow { .. })
    ));
}

#[test]
fn bucket_queue_orders_and_clamps() {
    let mut q = BucketQueue::new(0.5).unwrap();
    assert_eq!(q.push(4, 1.2).unwrap(), (2, false));
    assert_eq!(q.push(7, 0.1).unwrap(), (0, false));
    assert_eq!(q.pop_bucket(), Some((0, vec![7])));
    assert_eq!(q.pop_bucket(), Some((2, vec![4])));
    assert_eq!(q.push(1, 0.2).unwrap(), (2, true));
    assert_eq!(q.cursor(), 2);
}

/// Textbook Dijkstra over an edge list, for comparison.
fn classical_dijkstra(n: usize, edges: &[(usize, usize, f64)], target: usize) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    d[target] = 0.0;
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&i| !done[i] && d[i].is_finite())
            .min_by(|&a, &b| d[a].total_cmp(&d[b]))
        else {
            break;
        };
        done[u] = true;
        // edges are i → j with cost c; relax predecessors of u
        for &(i, j, c) in edges {
            if j == u && d[u] + c < d[i] {
                d[i] = d[u] + c;
            }
        }
    }
    d
}

#[test]
fn dial_matches_classical_dijkstra_on_graphs() {
    let mut r = rng(5);
    for _ in 0..20 {
        let m = r.gen_range(3..30);
        let mut p = MsspProblem::new(m);
        let mut edges = Vec::new();
        for i in 0..m {
            for _ in 0..3 {
                let j = r.gen_range(0..=m);
                if j != i && !edges.iter().any(|&(a, b, _)| a == i && b == j) {
                    let c: f64 = r.gen_range(1.0..4.0);
                    edges.push((i, j, c));
                    p.add_mode(i, vec![j], CostModel::constant(c));
                }
            }
        }
        let expected = classical_dijkstra(m + 1, &edges, m);
        assert_eq!(dijkstra_solve(&p).unwrap().values, expected);
        let s = dial_solve(&p, 1.0).unwrap();
        assert_eq!(s.values, expected);
        assert_eq!(s.diagnostics.reupdates_after_acceptance, 0);
    }
}

#[test]
fn vi_output_verifies() {
    let g = make_circular_list(
        &[0.1, 10.0, 10.0, 10.0, 10.0, 10.0],
        CostModel::euclidean(1.0, 2),
    )
    .unwrap();
    let u = vi(&g.problem, 1e-10);
    let r = verify_fixed_point(&g.problem, &u, 2e-10).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn dijkstra_on_acute_mesh_verifies() {
    let mesh = equilateral_hexagon(6, 1.0 / 6.0);
    let p = build_mesh_mssp(
        &mesh,
        Arc::new(ConstantSpeed(1.0)),
        &BoundaryPenalty::zero(),
    )
    .unwrap();
    let s = dijkstra_solve(&p).unwrap();
    let r = verify_fixed_point(&p, &s.values, 1e-8).unwrap();
    assert!(r.pass, "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn accept_order_is_nondecreasing(seed in any::<u64>()) {
        let p = random_problem(&mut rng(seed), 8, true);
        // only causal problems accept in value order
        prop_assume!(certify_problem(&p, &CertifyOptions::default()).verdict.label_setting_ok());
        let s = dijkstra_solve(&p).unwrap();
        let vals: Vec<f64> = s.diagnostics.accept_order.iter().map(|&i| s.values[i]).collect();
        for w in vals.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn sweep_equals_vi_on_acyclic(seed in any::<u64>()) {
        let p = random_acyclic_problem(&mut rng(seed), 8);
        let s = sweep_solve(&p).unwrap();
        prop_assert!(max_abs_diff(&s.values, &vi(&p, 1e-12)) < 1e-8);
    }

    #[test]
    fn unreachable_nodes_are_infinite(seed in any::<u64>()) {
        let p = random_problem(&mut rng(seed), 7, false);
        let reach = reachable_set(&p);
        let solutions = [
            vi(&p, 1e-10),
            dijkstra_solve(&p).unwrap().values,
            dial_solve(&p, 0.25).unwrap().values,
        ];
        for (i, &r) in reach.iter().enumerate() {
            for s in &solutions {
                prop_assert_eq!(r, s[i].is_finite());
            }
        }
    }

    #[test]
    fn certified_problems_agree_across_solvers(seed in any::<u64>()) {
        let p = random_problem(&mut rng(seed), 6, true);
        let cert = certify_problem(&p, &CertifyOptions::default());
        if cert.verdict.label_setting_ok() {
            let d = dijkstra_solve(&p).unwrap();
            prop_assert!(max_abs_diff(&d.values, &vi(&p, 1e-12)) < 1e-8);
            if let Some(delta) = cert.bucket_width() {
                let dl = dial_solve(&p, delta).unwrap();
                prop_assert!(max_abs_diff(&d.values, &dl.values) < 1e-12);
                prop_assert_eq!(dl.diagnostics.reupdates_after_acceptance, 0);
            }
        }
    }
}
