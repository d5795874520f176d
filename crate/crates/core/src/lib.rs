//! Multimode stochastic shortest path (MSSP) problems: the Bellman operator
//! and value iteration, label-setting solvers (Dijkstra-like and Dial-like),
//! causality certificates for individual modes, and semi-Lagrangian
//! discretizations of Eikonal / anisotropic HJB equations that compile to
//! MSSPs.
//!
//! Everything is generic over the scalar type through [`Real`]; the aliases
//! at the crate root fix it to `f64`.

pub mod causality;
pub mod eikonal;
pub mod error;
pub mod linalg;
pub mod model;
pub mod problems;
pub mod scalar;
pub mod simplex_opt;
pub mod solvers;

pub use error::{Error, Result};
pub use model::bellman::{apply_t, value_iteration, SspModel, ViOptions};
pub use model::cost::{CostKind, CostModel};
pub use model::discrete::{collapse_self_loop_mode, DiscreteSsp};
pub use model::monte_carlo::evaluate_policy_monte_carlo;
pub use model::validate::validate_problem;
pub use model::{Control, Diagnostics, Method, Mode, MsspProblem, NodeId, ValueSolution};
pub use scalar::Real;
pub use simplex_opt::{minimize_mode, vertex_shortcut, MinimizeOptions, ModeMinResult};
pub use solvers::{dial_solve, dijkstra_solve, reachable_set, sweep_solve, verify_fixed_point};

pub type Problem = MsspProblem<f64>;
pub type Cost = CostModel<f64>;
pub type Solution = ValueSolution<f64>;
pub type Discrete = DiscreteSsp<f64>;
