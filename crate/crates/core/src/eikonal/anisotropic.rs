use rayon::prelude::*;

use crate::linalg;
use crate::model::cost::{semi_lagrangian_jet, CostKind};
use crate::model::{MsspProblem, NodeId};
use crate::simplex_opt::simplex_grid;
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropicWitness<T> {
    pub node: NodeId,
    pub mode: usize,
    pub xi: Vec<T>,
    pub j: usize,
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropicReport<T> {
    pub pass: bool,
    /// Smallest sampled `f(∂τ/∂ξⱼ − δf)/τ − ∂f/∂ξⱼ`.
    pub worst_margin: T,
    /// Where the worst margin was attained, when it is not positive.
    pub witness: Option<AnisotropicWitness<T>>,
    pub samples: usize,
    /// Modes whose cost is not a facet cost (exit modes, custom costs).
    pub skipped_modes: usize,
}

/// Samples `∂f/∂ξⱼ < f(∂τ/∂ξⱼ − δf)/τ` at every simplex grid point with
/// `ξⱼ > 0`, over all nodes and facet modes.
pub fn check_anisotropic_causality<T: Real>(
    problem: &MsspProblem<T>,
    delta: T,
    resolution: usize,
) -> AnisotropicReport<T> {
    let t = problem.target();
    let per_node: Vec<(usize, usize, Option<AnisotropicWitness<T>>)> = (0..problem.node_count())
        .into_par_iter()
        .map(|node| {
            let mut samples = 0;
            let mut skipped = 0;
            let mut worst: Option<AnisotropicWitness<T>> = None;
            for (k, mode) in problem.modes(node).iter().enumerate() {
                if mode.successors == [t] {
                    skipped += 1;
                    continue;
                }
                let n = mode.cost.dim();
                for xi in simplex_grid::<T>(n, resolution) {
                    let (tau, f, dtau, df) = match mode.cost.kind() {
                        CostKind::EuclideanOffset { scale, offsets } => {
                            let y = combine(offsets, &xi);
                            let tau = linalg::norm(&y);
                            let dtau = offsets
                                .iter()
                                .map(|v| linalg::dot(v, &y) / tau)
                                .collect::<Vec<T>>();
                            (tau, T::one() / *scale, dtau, vec![T::zero(); n])
                        }
                        CostKind::SemiLagrangian {
                            offsets,
                            position,
                            speed,
                        } => {
                            let jet = semi_lagrangian_jet(offsets, position, speed.as_ref(), &xi);
                            (jet.tau, jet.speed, jet.dtau, jet.dspeed)
                        }
                        _ => {
                            skipped += 1;
                            break;
                        }
                    };
                    if !(tau > T::zero()) {
                        continue;
                    }
                    for j in 0..n {
                        if !(xi[j] > T::zero()) {
                            continue;
                        }
                        samples += 1;
                        let margin = f * (dtau[j] - delta * f) / tau - df[j];
                        if worst.as_ref().is_none_or(|w| margin < w.margin) {
                            worst = Some(AnisotropicWitness {
                                node,
                                mode: k,
                                xi: xi.clone(),
                                j,
                                margin,
                            });
                        }
                    }
                }
            }
            (samples, skipped, worst)
        })
        .collect();
    let mut samples = 0;
    let mut skipped_modes = 0;
    let mut worst: Option<AnisotropicWitness<T>> = None;
    for (s, k, w) in per_node {
        samples += s;
        skipped_modes += k;
        if let Some(w) = w {
            if worst.as_ref().is_none_or(|b| w.margin < b.margin) {
                worst = Some(w);
            }
        }
    }
    let worst_margin = worst.as_ref().map_or(T::infinity(), |w| w.margin);
    let pass = worst_margin > T::zero();
    AnisotropicReport {
        pass,
        worst_margin,
        witness: if pass { None } else { worst },
        samples,
        skipped_modes,
    }
}

fn combine<T: Real>(offsets: &[Vec<T>], xi: &[T]) -> Vec<T> {
    let d = offsets[0].len();
    (0..d)
        .map(|k| offsets.iter().zip(xi).map(|(v, &x)| v[k] * x).sum())
        .collect()
}
