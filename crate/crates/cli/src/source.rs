//! Where a problem comes from: a file, a named example, or an Eikonal
//! discretization described by flags.

use std::sync::Arc;

use clap::{Args, ValueEnum};
use mssp::eikonal::{
    build_grid_mssp, build_mesh_mssp, equilateral_hexagon, parse_mesh, BoundaryPenalty,
    ConstantSpeed, EllipticSpeed, GridSpec, Speed, Stencil,
};
use mssp::problems::{
    cost_c1, cost_c2, cost_c3, make_aux1, make_circular_list, make_fig1, make_multitask,
    make_multitask_distraction, make_rg_game1, make_rg_game2, TERMINAL_EPSILON,
};
use mssp::CostModel;

use crate::error::{read_file, CliError, Result};
use crate::files::{problem_from_text, Loaded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    Fig1,
    Aux1,
    CircularList,
    RgGame1,
    RgGame2,
    Multitask,
    MultitaskDistraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StencilArg {
    Four,
    Eight,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Problem file (JSON).
    #[arg(long, conflicts_with_all = ["generate", "eikonal_grid", "mesh", "hexagon"])]
    pub problem: Option<String>,

    /// Built-in example.
    #[arg(long, value_enum, conflicts_with_all = ["eikonal_grid", "mesh", "hexagon"])]
    pub generate: Option<Example>,

    /// Eikonal problem on an N×N grid over the unit square.
    #[arg(long, value_name = "N", conflicts_with_all = ["mesh", "hexagon"])]
    pub eikonal_grid: Option<usize>,

    /// Eikonal problem on a mesh file.
    #[arg(long, conflicts_with = "hexagon")]
    pub mesh: Option<String>,

    /// Eikonal problem on the equilateral hexagon mesh with K rings (h = 1/K).
    #[arg(long, value_name = "K")]
    pub hexagon: Option<usize>,

    /// Per-toss / per-step cost: c1, c2, c3, euclidean[:scale],
    /// linear:a,b[,c] or polynomial:a0,a1,...
    #[arg(long)]
    pub cost: Option<String>,

    /// Control cost of the two-node example.
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,

    #[arg(long, default_value_t = 1.0)]
    pub c1t: f64,

    #[arg(long, default_value_t = 1.0)]
    pub c3t: f64,

    /// Circular list size.
    #[arg(long, default_value_t = 6)]
    pub m: usize,

    /// Circular list exit costs, one value or a comma-separated list.
    #[arg(long, default_value = "1")]
    pub exit_cost: String,

    #[arg(long, default_value_t = 3)]
    pub k: usize,

    #[arg(long, default_value_t = 4)]
    pub kh: usize,

    #[arg(long, default_value_t = 3)]
    pub kt: usize,

    #[arg(long, default_value_t = 3)]
    pub ka: usize,

    #[arg(long, default_value_t = 2)]
    pub kb: usize,

    /// Exit cost of the multitasking lattice's terminal edges.
    #[arg(long, default_value_t = TERMINAL_EPSILON)]
    pub terminal_cost: f64,

    #[arg(long, value_enum, default_value_t = StencilArg::Four)]
    pub stencil: StencilArg,

    /// Isotropic speed.
    #[arg(long, default_value_t = 1.0)]
    pub f: f64,

    /// Boundary exit cost (grid and hexagon problems).
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,

    /// Elliptic speed with this semi-axis ratio (grid problems).
    #[arg(long)]
    pub eccentricity: Option<f64>,

    /// Orientation of the elliptic speed's long axis, radians.
    #[arg(long, default_value_t = 0.0)]
    pub angle: f64,
}

/// A problem plus what is known about it from its construction.
pub struct Built {
    pub problem: Loaded,
    /// Grid spacing or minimum edge length, for geometric problems.
    pub spacing: Option<f64>,
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number '{t}' in '{s}'")))
        })
        .collect()
}

/// Parses a cost spec for a mode over `dim` successors.
pub fn parse_cost(spec: &str, dim: usize) -> Result<CostModel<f64>> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let cost = match name {
        "c1" => cost_c1(),
        "c2" => cost_c2(),
        "c3" => cost_c3(),
        "euclidean" => {
            let s = if args.is_empty() {
                1.0
            } else {
                numbers(args)?[0]
            };
            CostModel::euclidean(s, dim)
        }
        "linear" => CostModel::linear(numbers(args)?),
        "polynomial" => CostModel::polynomial(numbers(args)?),
        _ => {
            return Err(CliError::Usage(format!(
            "unknown cost '{spec}'; expected c1, c2, c3, euclidean[:s], linear:..., polynomial:..."
        )))
        }
    };
    if cost.dim() != dim {
        return Err(CliError::Usage(format!(
            "cost '{spec}' is defined on {} successors, this mode has {dim}",
            cost.dim()
        )));
    }
    if !(cost.vertex_values().iter().all(|v| v.is_finite())) {
        return Err(CliError::Usage(format!("cost '{spec}' is not finite")));
    }
    Ok(cost)
}

impl SourceArgs {
    fn cost_or(&self, default: &str, dim: usize) -> Result<CostModel<f64>> {
        parse_cost(self.cost.as_deref().unwrap_or(default), dim)
    }

    fn speed(&self) -> Result<Arc<dyn Speed<f64>>> {
        if !(self.f > 0.0) || !self.f.is_finite() {
            return Err(CliError::Usage("speed --f must be positive".into()));
        }
        match self.eccentricity {
            Some(e) if e > 0.0 && e.is_finite() => {
                let base = EllipticSpeed::planar(e, self.angle);
                let d: Vec<Vec<f64>> = base
                    .matrix()
                    .iter()
                    .map(|r| r.iter().map(|v| v * self.f).collect())
                    .collect();
                Ok(Arc::new(EllipticSpeed::new(d)))
            }
            Some(e) => Err(CliError::Usage(format!(
                "eccentricity {e} must be positive"
            ))),
            None => Ok(Arc::new(ConstantSpeed(self.f))),
        }
    }

    pub fn build(&self) -> Result<Built> {
        let plain = |problem| Built {
            problem,
            spacing: None,
        };
        if let Some(path) = &self.problem {
            let text = read_file(path)?;
            return Ok(plain(problem_from_text(path, &text)?));
        }
        if let Some(ex) = self.generate {
            let p = match ex {
                Example::Fig1 => Loaded::Discrete(make_fig1(self.c)?.0),
                Example::Aux1 => {
                    Loaded::Mssp(make_aux1(self.cost_or("c2", 2)?, self.c1t, self.c3t)?.problem)
                }
                Example::CircularList => {
                    let mut exits = numbers(&self.exit_cost)?;
                    if exits.len() == 1 {
                        exits = vec![exits[0]; self.m];
                    }
                    Loaded::Mssp(make_circular_list(&exits, self.cost_or("c2", 2)?)?.problem)
                }
                Example::RgGame1 => {
                    Loaded::Mssp(make_rg_game1(self.k, self.cost_or("c2", 2)?)?.0.problem)
                }
                Example::RgGame2 => {
                    Loaded::Mssp(make_rg_game2(self.kh, self.kt, self.cost_or("c2", 2)?)?.problem)
                }
                Example::Multitask => Loaded::Mssp(
                    make_multitask(
                        self.ka,
                        self.kb,
                        self.cost_or("linear:1,1.5", 2)?,
                        self.terminal_cost,
                    )?
                    .problem,
                ),
                Example::MultitaskDistraction => Loaded::Mssp(
                    make_multitask_distraction(
                        self.ka,
                        self.kb,
                        self.cost_or("linear:1,1.2,0.5", 3)?,
                        self.terminal_cost,
                    )?
                    .problem,
                ),
            };
            return Ok(plain(p));
        }
        if let Some(n) = self.eikonal_grid {
            if n < 3 {
                return Err(CliError::Usage(
                    "--eikonal-grid needs at least 3 nodes per side".into(),
                ));
            }
            let stencil = match self.stencil {
                StencilArg::Four => Stencil::Four,
                StencilArg::Eight => Stencil::Eight,
            };
            let spec = GridSpec::unit_square(n, stencil);
            let p = build_grid_mssp(&spec, self.speed()?, &BoundaryPenalty::Constant(self.q))?;
            return Ok(Built {
                problem: Loaded::Mssp(p),
                spacing: Some(spec.spacing),
            });
        }
        if let Some(k) = self.hexagon {
            if k == 0 {
                return Err(CliError::Usage("--hexagon needs at least one ring".into()));
            }
            let h = 1.0 / k as f64;
            let mesh = equilateral_hexagon(k, h);
            let p = build_mesh_mssp(&mesh, self.speed()?, &BoundaryPenalty::Constant(self.q))?;
            return Ok(Built {
                problem: Loaded::Mssp(p),
                spacing: Some(h),
            });
        }
        if let Some(path) = &self.mesh {
            let text = read_file(path)?;
            let (mesh, q) = parse_mesh::<f64>(&text).map_err(|e| match e {
                mssp::Error::Parse { line, message } => CliError::Parse {
                    path: path.clone(),
                    line,
                    column: 0,
                    message,
                },
                other => CliError::Core(other),
            })?;
            let p = build_mesh_mssp(&mesh, self.speed()?, &BoundaryPenalty::PerNode(q))?;
            return Ok(Built {
                problem: Loaded::Mssp(p),
                spacing: Some(mesh.min_edge_length()),
            });
        }
        Err(CliError::Usage(
            "no problem given: use --problem, --generate, --eikonal-grid, --hexagon or --mesh"
                .into(),
        ))
    }
}
