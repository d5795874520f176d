#![allow(dead_code)]

use std::sync::Arc;

use mssp::eikonal::EllipticSpeed;
use mssp::{CostModel, DiscreteSsp, MsspProblem};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

/// A positive cost on Ξₙ from one of the built-in families.
pub fn random_cost(rng: &mut ChaCha8Rng, n: usize) -> CostModel<f64> {
    let pick = if n == 2 {
        rng.gen_range(0..5)
    } else {
        rng.gen_range(0..4)
    };
    match pick {
        0 => CostModel::linear((0..n).map(|_| rng.gen_range(0.2..3.0)).collect()),
        1 => CostModel::weighted_euclidean(
            rng.gen_range(0.2..2.0),
            (0..n).map(|_| rng.gen_range(0.5..2.0)).collect(),
        ),
        2 => {
            let offsets = (0..n)
                .map(|_| vec![rng.gen_range(0.5..1.5), rng.gen_range(-1.0..1.0), 0.3])
                .collect();
            CostModel::euclidean_offset(rng.gen_range(0.5..2.0), offsets)
        }
        3 => CostModel::semi_lagrangian(
            (0..n)
                .map(|k| {
                    let a = k as f64 * 0.7;
                    vec![a.cos(), a.sin()]
                })
                .collect(),
            vec![0.0, 0.0],
            Arc::new(EllipticSpeed::planar(
                rng.gen_range(1.0..3.0),
                rng.gen_range(0.0..3.0),
            )),
        ),
        _ => CostModel::polynomial(vec![
            rng.gen_range(1.5..3.0),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.4..0.4),
        ]),
    }
}

/// Random MSSP with `2..=max_nodes` nodes; every node has an exit to `t`
/// when `with_exits` is set, otherwise only random modes.
pub fn random_problem(
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
    with_exits: bool,
) -> MsspProblem<f64> {
    let m = rng.gen_range(2..=max_nodes);
    let mut p = MsspProblem::new(m);
    for i in 0..m {
        let mut others: Vec<usize> = (0..=m).filter(|&j| j != i).collect();
        let modes = rng.gen_range(1..=3);
        for _ in 0..modes {
            others.shuffle(rng);
            let n = rng.gen_range(1..=3.min(others.len()));
            let succ = others[..n].to_vec();
            let cost = random_cost(rng, n);
            p.add_mode(i, succ, cost);
        }
        if with_exits {
            p.add_mode(i, vec![m], CostModel::constant(rng.gen_range(1.0..10.0)));
        }
    }
    p
}

/// Random acyclic MSSP: node `i` only moves to nodes `< i` or to `t`.
pub fn random_acyclic_problem(rng: &mut ChaCha8Rng, max_nodes: usize) -> MsspProblem<f64> {
    let m = rng.gen_range(2..=max_nodes);
    let mut p = MsspProblem::new(m);
    for i in 0..m {
        let mut cands: Vec<usize> = (0..i).collect();
        cands.push(m);
        for _ in 0..rng.gen_range(1..=2) {
            cands.shuffle(rng);
            let n = rng.gen_range(1..=3.min(cands.len()));
            p.add_mode(i, cands[..n].to_vec(), random_cost(rng, n));
        }
    }
    p
}

/// Random finite-control SSP whose controls may include self-transitions
/// (probability below 1) and always reach `t` with positive probability.
pub fn random_discrete(rng: &mut ChaCha8Rng, max_nodes: usize) -> DiscreteSsp<f64> {
    let m = rng.gen_range(1..=max_nodes);
    let mut d = DiscreteSsp::new(m);
    for i in 0..m {
        for _ in 0..rng.gen_range(1..=2) {
            let mut weights: Vec<(usize, f64)> =
                vec![(m, rng.gen_range(0.1..1.0)), (i, rng.gen_range(0.0..1.0))];
            let j = rng.gen_range(0..m);
            if j != i {
                weights.push((j, rng.gen_range(0.0..1.0)));
            }
            let total: f64 = weights.iter().map(|w| w.1).sum();
            let transitions = weights.into_iter().map(|(j, w)| (j, w / total)).collect();
            d.add_control(i, rng.gen_range(0.5..5.0), transitions);
        }
    }
    d
}
