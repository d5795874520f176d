mod common;

use std::sync::Arc;

use common::max_abs_diff;
use mssp::problems::{
    chain_collapse, cost_c1, cost_c2, cost_c3, linear_distraction_cost, make_aux1, make_auxiliary,
    make_circular_list, make_fig1, make_multitask, make_multitask_distraction, make_rg_game1,
    make_rg_game2, Generated, Lattice, TERMINAL_EPSILON,
};
use mssp::{
    dijkstra_solve, sweep_solve, validate_problem, value_iteration, CostModel, Error, MsspProblem,
    ViOptions,
};

fn vi(p: &MsspProblem<f64>) -> Vec<f64> {
    let opts = ViOptions {
        tol: 1e-13,
        ..Default::default()
    };
    let s = value_iteration(p, &vec![0.0; p.len()], &opts).unwrap();
    assert!(s.diagnostics.converged);
    s.values
}

fn all_generated() -> Vec<(&'static str, Generated<f64>)> {
    let lin = || CostModel::linear(vec![1.0, 1.5]);
    vec![
        ("aux", make_auxiliary(cost_c2(), &[0.5, 0.2]).unwrap()),
        (
            "aux3",
            make_auxiliary(CostModel::euclidean(1.0, 3), &[0.5, 0.2, 0.9]).unwrap(),
        ),
        ("aux1", make_aux1(cost_c2(), 1.0, 1.0).unwrap()),
        (
            "circular",
            make_circular_list(&[1.0; 6], cost_c2()).unwrap(),
        ),
        ("game1 k=1", make_rg_game1(1, cost_c2()).unwrap().0),
        ("game1 k=4", make_rg_game1(4, cost_c1()).unwrap().0),
        ("game2 1x3", make_rg_game2(1, 3, cost_c2()).unwrap()),
        ("game2 2x1", make_rg_game2(2, 1, cost_c3()).unwrap()),
        ("game2 4x3", make_rg_game2(4, 3, cost_c2()).unwrap()),
        ("game2 2x2", make_rg_game2(2, 2, cost_c1()).unwrap()),
        (
            "multitask",
            make_multitask(3, 2, lin(), TERMINAL_EPSILON).unwrap(),
        ),
        (
            "distraction 1x1",
            make_multitask_distraction(
                1,
                1,
                linear_distraction_cost(1.0, 1.2, 0.5),
                TERMINAL_EPSILON,
            )
            .unwrap(),
        ),
        (
            "distraction 3x2",
            make_multitask_distraction(
                3,
                2,
                linear_distraction_cost(1.0, 1.2, 0.5),
                TERMINAL_EPSILON,
            )
            .unwrap(),
        ),
    ]
}

#[test]
fn every_generator_validates() {
    for (name, g) in all_generated() {
        let v = validate_problem(&g.problem);
        assert!(v.is_empty(), "{name}: {v:?}");
    }
}

#[test]
fn explicit_causality_flags_match_sweep() {
    for (name, g) in all_generated() {
        let swept = sweep_solve(&g.problem);
        assert_eq!(swept.is_ok(), g.explicitly_causal, "{name}");
        if let Err(e) = swept {
            assert!(matches!(e, Error::Cycle { .. }), "{name}");
        }
    }
    let (d, _) = make_fig1(1.0).unwrap();
    assert!(matches!(sweep_solve(&d), Err(Error::Cycle { .. })));
}

#[test]
fn bundled_solutions_match_solvers() {
    for (name, g) in all_generated() {
        if let Some(expected) = &g.expected {
            assert!(max_abs_diff(&vi(&g.problem), expected) < 1e-9, "{name}");
            assert!(
                max_abs_diff(&dijkstra_solve(&g.problem).unwrap().values, expected) < 1e-9,
                "{name}"
            );
        }
    }
}

#[test]
fn fig1_bundles() {
    assert_eq!(make_fig1(1.0).unwrap().1, vec![2.0, 2.0, 0.0]);
    assert_eq!(make_fig1(3.0).unwrap().1, vec![6.0, 6.0, 0.0]);
    assert!(make_fig1(0.0).is_err());
}

#[test]
fn circular_list_routes_through_the_cheap_exit() {
    let mut exits = vec![10.0; 6];
    exits[0] = 0.1;
    let g = make_circular_list(&exits, cost_c2()).unwrap();
    let u = vi(&g.problem);
    let s = value_iteration(&g.problem, &u, &ViOptions::default()).unwrap();
    assert_eq!(s.policy[0].as_ref().unwrap().mode_index, 1);
    for i in [1, 5] {
        let c = s.policy[i].as_ref().unwrap();
        assert_eq!(c.mode_index, 0, "node {i}");
        // the weight on x₁ dominates
        let toward = if i == 1 { c.xi[0] } else { c.xi[1] };
        assert!(toward > 0.5);
        assert!(u[i] < 1.2);
    }
    assert!(make_circular_list(&[1.0, 1.0], cost_c2()).is_err());
}

#[test]
fn game1_constant_cost() {
    let (g, chain) = make_rg_game1(3, CostModel::linear(vec![1.0, 1.0])).unwrap();
    assert!(chain.links.iter().all(|&l: &f64| (l - 1.0).abs() < 1e-12));
    assert!(max_abs_diff(&chain.values, &[3.0, 2.0, 1.0, 0.0]) < 1e-12);
    assert!(max_abs_diff(&vi(&g.problem), &[3.0, 2.0, 1.0, 0.0]) < 1e-9);
}

#[test]
fn game1_single_step() {
    // min (p² + 0.1)/p = 2√0.1 at p = √0.1
    let c = CostModel::polynomial(vec![0.1, 0.0, 1.0]);
    let chain = chain_collapse(&c, 1);
    assert!((chain.links[0] - 2.0 * 0.1f64.sqrt()).abs() < 1e-9);
    assert!((chain.p_star[0] - 0.1f64.sqrt()).abs() < 1e-4);
    let (g, _) = make_rg_game1(1, c).unwrap();
    assert!((vi(&g.problem)[0] - 2.0 * 0.1f64.sqrt()).abs() < 1e-9);
}

#[test]
fn game1_chain_matches_vi() {
    for k in [2, 5] {
        let (g, chain) = make_rg_game1(k, cost_c2()).unwrap();
        assert!(max_abs_diff(&vi(&g.problem), &chain.values) < 1e-9);
    }
}

#[test]
fn game2_solvers_agree() {
    for c in [cost_c1(), cost_c2(), cost_c3()] {
        let g = make_rg_game2(4, 3, c).unwrap();
        assert_eq!(g.problem.node_count(), 6);
        let d = dijkstra_solve(&g.problem).unwrap();
        assert!(max_abs_diff(&d.values, &vi(&g.problem)) < 1e-8);
    }
}

#[test]
fn lattice_layout() {
    let lat = Lattice { ka: 3, kb: 2 };
    assert_eq!(lat.node_count(), 11);
    assert_eq!(lat.node(0, 0), 0);
    assert_eq!(lat.node(3, 1), 7);
    assert_eq!(lat.node(2, 2), 10);
}

#[test]
fn multitask_matches_an_independent_recursion() {
    // Uᵢⱼ = min_ξ cA ξA + cB ξB + ξA U_{i+1,j} + ξB U_{i,j+1}: a vertex
    let (ka, kb, ca, cb, eps) = (3, 2, 1.0, 1.5, TERMINAL_EPSILON);
    let lat = Lattice { ka, kb };
    let mut u = vec![vec![eps; kb + 1]; ka + 1];
    for i in (0..ka).rev() {
        for j in (0..kb).rev() {
            u[i][j] = (ca + u[i + 1][j]).min(cb + u[i][j + 1]);
        }
    }
    let g = make_multitask(ka, kb, CostModel::linear(vec![ca, cb]), eps).unwrap();
    let s = sweep_solve(&g.problem).unwrap();
    for i in 0..ka {
        for j in 0..kb {
            assert!((s.values[lat.node(i, j)] - u[i][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn distraction_variants() {
    // cheapest outcome is distraction: the union graph is cyclic
    let cyclic = make_multitask_distraction(
        2,
        2,
        linear_distraction_cost(1.0, 1.0, 0.2),
        TERMINAL_EPSILON,
    )
    .unwrap();
    assert!(!cyclic.explicitly_causal);
    assert!(matches!(
        sweep_solve(&cyclic.problem),
        Err(Error::Cycle { .. })
    ));
    let d = dijkstra_solve(&cyclic.problem).unwrap();
    assert!(max_abs_diff(&d.values, &vi(&cyclic.problem)) < 1e-8);
    let custom = CostModel::custom(
        3,
        Arc::new(|x: &[f64]| 1.0 + x[0] + 0.5 * x[1] - 0.5 * x[2] * x[2]),
    );
    assert!(make_multitask_distraction(2, 2, custom, TERMINAL_EPSILON).is_ok());
    assert!(make_multitask_distraction(2, 2, cost_c2(), TERMINAL_EPSILON).is_err());
    assert!(make_multitask(2, 2, cost_c2(), 0.0).is_err());
}
