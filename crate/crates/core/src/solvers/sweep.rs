use crate::error::Result;
use crate::model::bellman::{update_node, SspModel};
use crate::model::{Diagnostics, Method, ValueSolution};
use crate::simplex_opt::MinimizeOptions;
use crate::solvers::DependencyGraph;
use crate::Real;

/// One update per node in topological order of the union dependency graph.
/// Fails with a cycle witness when the graph is cyclic.
pub fn sweep_solve<T: Real, P: SspModel<T> + ?Sized>(model: &P) -> Result<ValueSolution<T>> {
    sweep_solve_with(model, &MinimizeOptions::default())
}

pub fn sweep_solve_with<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    opts: &MinimizeOptions<T>,
) -> Result<ValueSolution<T>> {
    let order = DependencyGraph::from_model(model).topological_order()?;
    let n = model.state_count();
    let t = model.target();
    let mut values = vec![T::infinity(); n];
    let mut policy = vec![None; n];
    values[t] = T::zero();
    let mut diag = Diagnostics::new(Method::Sweep);
    for &i in &order {
        if i == t {
            continue;
        }
        let (v, c) = update_node(model, i, &values, opts)?;
        values[i] = v;
        policy[i] = c;
        diag.iterations += 1;
    }
    diag.accept_order = order;
    Ok(ValueSolution {
        values,
        policy,
        diagnostics: diag,
    })
}
