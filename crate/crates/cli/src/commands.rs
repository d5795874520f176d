use std::fmt::Write as _;
use std::time::Instant;

use clap::ValueEnum;
use mssp::causality::{
    certify_problem, oracle_mode_causality, CertifyOptions, OracleOptions, ProblemCertificate,
    ProblemVerdict,
};
use mssp::solvers::{
    dial_solve_with, dijkstra_solve_with, sweep_solve_with, verify_fixed_point_with,
};
use mssp::{value_iteration, MinimizeOptions, Solution, SspModel, ViOptions};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::files::{to_json, CertificateSummary, Loaded, Num, ResultFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Vi,
    Dijkstra,
    Dial,
    Sweep,
    Auto,
}

impl MethodArg {
    pub fn name(self) -> &'static str {
        match self {
            MethodArg::Vi => "vi",
            MethodArg::Dijkstra => "dijkstra",
            MethodArg::Dial => "dial",
            MethodArg::Sweep => "sweep",
            MethodArg::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub bucket_width: Option<f64>,
    pub seed: u64,
}

pub fn certify_options(seed: u64) -> CertifyOptions<f64> {
    CertifyOptions {
        seed,
        ..Default::default()
    }
}

pub fn certify(problem: &Loaded, seed: u64) -> Option<ProblemCertificate<f64>> {
    match problem {
        Loaded::Mssp(p) => Some(certify_problem(p, &certify_options(seed))),
        Loaded::Discrete(_) => None,
    }
}

fn run_on<P: SspModel<f64> + ?Sized>(
    model: &P,
    method: MethodArg,
    width: Option<f64>,
    settings: &SolveSettings,
) -> Result<Solution> {
    let mo = MinimizeOptions::default();
    Ok(match method {
        MethodArg::Vi => {
            let opts = ViOptions {
                tol: settings.tol,
                max_iter: settings.max_iter,
                minimize: mo,
            };
            value_iteration(model, &vec![0.0; model.state_count()], &opts)?
        }
        MethodArg::Dijkstra => dijkstra_solve_with(model, &mo)?,
        MethodArg::Dial => {
            let w = width.ok_or_else(|| {
                CliError::Usage("dial needs --bucket-width or a problem certified dial_ok".into())
            })?;
            dial_solve_with(model, w, &mo)?
        }
        MethodArg::Sweep => sweep_solve_with(model, &mo)?,
        MethodArg::Auto => unreachable!("auto is resolved before solving"),
    })
}

/// Runs one concrete method; dial takes its width from the flag or from the
/// certificate.
pub fn run_method(
    problem: &Loaded,
    method: MethodArg,
    settings: &SolveSettings,
    cert: Option<&ProblemCertificate<f64>>,
) -> Result<Solution> {
    let width = settings
        .bucket_width
        .or_else(|| cert.and_then(|c| c.bucket_width()));
    match problem {
        Loaded::Mssp(p) => run_on(p, method, width, settings),
        Loaded::Discrete(d) => run_on(d, method, width, settings),
    }
}

/// dial (Δ > 0) > dijkstra (certified) > sweep (acyclic) > vi.
pub fn pick_method(
    problem: &Loaded,
    cert: Option<&ProblemCertificate<f64>>,
    settings: &SolveSettings,
) -> MethodArg {
    match cert.map(|c| c.verdict) {
        Some(ProblemVerdict::DialOk(_)) => MethodArg::Dial,
        Some(ProblemVerdict::DijkstraOk) => MethodArg::Dijkstra,
        _ => {
            if run_method(problem, MethodArg::Sweep, settings, None).is_ok() {
                MethodArg::Sweep
            } else {
                MethodArg::Vi
            }
        }
    }
}

pub fn verify(
    problem: &Loaded,
    values: &[f64],
    tol: f64,
) -> Result<mssp::solvers::FixedPointReport<f64>> {
    if values.len() != problem.state_count() {
        return Err(CliError::Invalid(format!(
            "{} values for a problem with {} states",
            values.len(),
            problem.state_count()
        )));
    }
    let mo = MinimizeOptions::default();
    Ok(match problem {
        Loaded::Mssp(p) => verify_fixed_point_with(p, values, tol, &mo)?,
        Loaded::Discrete(d) => verify_fixed_point_with(d, values, tol, &mo)?,
    })
}

pub struct SolveOutcome {
    pub result: ResultFile,
    pub seconds: f64,
}

pub fn solve(
    problem: &Loaded,
    method: MethodArg,
    settings: &SolveSettings,
    verify_tol: f64,
    require_certificate: bool,
) -> Result<(SolveOutcome, Option<ProblemCertificate<f64>>)> {
    let needs_cert = require_certificate
        || method == MethodArg::Auto
        || (method == MethodArg::Dial && settings.bucket_width.is_none());
    let cert = if needs_cert {
        certify(problem, settings.seed)
    } else {
        None
    };
    let chosen = if method == MethodArg::Auto {
        pick_method(problem, cert.as_ref(), settings)
    } else {
        method
    };
    let start = Instant::now();
    let s = run_method(problem, chosen, settings, cert.as_ref())?;
    let seconds = start.elapsed().as_secs_f64();
    let report = verify(problem, &s.values, verify_tol)?;
    let summary = cert.as_ref().map(CertificateSummary::from_certificate);
    Ok((
        SolveOutcome {
            result: ResultFile::new(problem, &s, &report, verify_tol, summary),
            seconds,
        },
        cert,
    ))
}

fn fmt_small(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        fmt_num(v)
    } else {
        format!("{v:.3e}")
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v}")
    }
}

pub fn solve_report(problem: &Loaded, out: &SolveOutcome) -> String {
    let r = &out.result;
    let mut s = String::new();
    let _ = write!(s, "method {}", r.method);
    if let Some(w) = r.bucket_width {
        let _ = write!(s, " (bucket width {w})");
    }
    let _ = writeln!(
        s,
        ", {} iterations, residual {}, {:.3} ms",
        r.iterations,
        fmt_small(r.residual.0),
        out.seconds * 1e3
    );
    if let Some(c) = &r.certificate {
        let _ = writeln!(
            s,
            "certificate {}{}",
            c.verdict,
            c.delta.map(|d| format!(", Δ = {d}")).unwrap_or_default()
        );
    }
    if r.method == "vi" && !r.converged {
        let _ = writeln!(s, "note: not finitely convergent within the iteration cap; residual still above tolerance");
    }
    let v = &r.verification;
    let _ = writeln!(
        s,
        "verification {} (max residual {}, tol {})",
        if v.pass { "PASS" } else { "FAIL" },
        fmt_small(v.max_residual.0),
        fmt_small(v.tol)
    );
    if !v.infinite_inside_reachable.is_empty() {
        let _ = writeln!(
            s,
            "nodes left at +inf although the target is reachable: {:?}",
            v.infinite_inside_reachable
        );
    }
    if r.nodes.len() <= 40 {
        let _ = writeln!(s, "{:>6}  {:<10} {:>22}  policy", "node", "label", "value");
        for n in &r.nodes {
            let policy = n
                .policy
                .as_ref()
                .map(|p| format!("mode {} xi {:?}", p.mode, p.xi))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "{:>6}  {:<10} {:>22}  {}",
                n.id,
                n.label
                    .clone()
                    .or_else(|| problem.label(n.id))
                    .unwrap_or_default(),
                fmt_num(n.value.0),
                policy
            );
        }
    } else {
        let finite: Vec<f64> = r
            .nodes
            .iter()
            .map(|n| n.value.0)
            .filter(|v| v.is_finite())
            .collect();
        let max = finite.iter().copied().fold(0.0, f64::max);
        let _ = writeln!(
            s,
            "{} nodes, {} finite, max finite value {max}",
            r.nodes.len(),
            finite.len()
        );
    }
    s
}

#[derive(Serialize)]
pub struct ModeLine {
    pub node: usize,
    pub mode: usize,
    pub verdict: String,
    pub delta: Option<f64>,
    pub reason: Option<String>,
}

#[derive(Serialize)]
pub struct CertifyReport {
    pub verdict: String,
    pub delta: Option<f64>,
    pub bucket_width: Option<f64>,
    pub certified_modes: usize,
    pub modes: Vec<ModeLine>,
}

pub fn certify_report(cert: Option<&ProblemCertificate<f64>>) -> CertifyReport {
    let Some(c) = cert else {
        return CertifyReport {
            verdict: "unknown".into(),
            delta: None,
            bucket_width: None,
            certified_modes: 0,
            modes: Vec::new(),
        };
    };
    let modes: Vec<ModeLine> = c
        .modes
        .iter()
        .enumerate()
        .flat_map(|(i, ms)| {
            ms.iter().enumerate().map(move |(k, m)| ModeLine {
                node: i,
                mode: k,
                verdict: m.verdict.name().into(),
                delta: m.delta,
                reason: if m.is_certified() {
                    None
                } else {
                    m.reason.clone()
                },
            })
        })
        .collect();
    CertifyReport {
        verdict: c.verdict.name().into(),
        delta: c.delta,
        bucket_width: c.bucket_width(),
        certified_modes: modes.len() - c.uncertified_modes().len(),
        modes,
    }
}

pub fn certify_text(
    r: &CertifyReport,
    discrete: bool,
    spacing: Option<f64>,
    verbose: bool,
) -> String {
    let mut s = String::new();
    match r.delta {
        Some(d) => {
            let _ = writeln!(s, "{}, Δ={d}", r.verdict);
            if let Some(h) = spacing {
                let _ = writeln!(s, "spacing h={h}, Δ/h={}", d / h);
            }
        }
        None => {
            let _ = writeln!(s, "{}", r.verdict);
        }
    }
    if discrete {
        let _ = writeln!(
            s,
            "fixed-distribution controls carry no mode cost to certify"
        );
        return s;
    }
    if let Some(w) = r.bucket_width {
        let _ = writeln!(s, "bucket width for dial: {w}");
    }
    let _ = writeln!(
        s,
        "{} of {} modes certified",
        r.certified_modes,
        r.modes.len()
    );
    let mut counts: Vec<(String, usize)> = Vec::new();
    for m in &r.modes {
        match counts.iter_mut().find(|c| c.0 == m.verdict) {
            Some(c) => c.1 += 1,
            None => counts.push((m.verdict.clone(), 1)),
        }
    }
    for (v, n) in counts {
        let _ = writeln!(s, "  {v}: {n}");
    }
    let mut shown = 0;
    let limit = if verbose { usize::MAX } else { 20 };
    let listed = r
        .modes
        .iter()
        .filter(|m| verbose || m.verdict == "uncertified")
        .count();
    for m in &r.modes {
        if (m.verdict == "uncertified" || verbose) && shown < limit {
            shown += 1;
            let _ = write!(s, "node {} mode {}: {}", m.node, m.mode, m.verdict);
            if let Some(d) = m.delta {
                let _ = write!(s, " δ={d}");
            }
            if let Some(reason) = &m.reason {
                let _ = write!(s, " ({reason})");
            }
            s.push('\n');
        }
    }
    if listed > shown {
        let _ = writeln!(s, "... and {} more (--verbose lists all)", listed - shown);
    }
    s
}

#[derive(Serialize)]
pub struct CompareRow {
    pub method: String,
    pub ok: bool,
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    /// `[i][j]` = max |U_i − U_j| over nodes; `null` if either run failed.
    pub max_diff: Vec<Vec<Option<Num>>>,
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

pub fn compare(
    problem: &Loaded,
    methods: &[MethodArg],
    settings: &SolveSettings,
) -> Result<CompareReport> {
    let cert = if methods
        .iter()
        .any(|&m| m == MethodArg::Auto || m == MethodArg::Dial)
        && settings.bucket_width.is_none()
    {
        certify(problem, settings.seed)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut values: Vec<Option<Vec<f64>>> = Vec::new();
    for &m in methods {
        let chosen = if m == MethodArg::Auto {
            pick_method(problem, cert.as_ref(), settings)
        } else {
            m
        };
        let start = Instant::now();
        let r = run_method(problem, chosen, settings, cert.as_ref());
        let seconds = start.elapsed().as_secs_f64();
        let name = if m == MethodArg::Auto {
            format!("auto({})", chosen.name())
        } else {
            m.name().to_string()
        };
        match r {
            Ok(s) => {
                rows.push(CompareRow {
                    method: name,
                    ok: true,
                    error: None,
                    seconds,
                });
                values.push(Some(s.values));
            }
            Err(e) => {
                rows.push(CompareRow {
                    method: name,
                    ok: false,
                    error: Some(e.to_string()),
                    seconds,
                });
                values.push(None);
            }
        }
    }
    let max_diff = values
        .iter()
        .map(|a| {
            values
                .iter()
                .map(|b| match (a, b) {
                    (Some(a), Some(b)) => Some(Num(max_abs_diff(a, b))),
                    _ => None,
                })
                .collect()
        })
        .collect();
    Ok(CompareReport { rows, max_diff })
}

pub fn compare_text(r: &CompareReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {:>12}  status", "method", "time");
    for row in &r.rows {
        let status = row.error.clone().unwrap_or_else(|| "ok".into());
        let _ = writeln!(
            s,
            "{:<16} {:>10.3}ms  {status}",
            row.method,
            row.seconds * 1e3
        );
    }
    let _ = writeln!(s, "\nmax |ΔU|");
    let _ = write!(s, "{:<16}", "");
    for row in &r.rows {
        let _ = write!(s, " {:>16}", row.method);
    }
    s.push('\n');
    for (row, diffs) in r.rows.iter().zip(&r.max_diff) {
        let _ = write!(s, "{:<16}", row.method);
        for d in diffs {
            let cell = match d {
                None => "-".to_string(),
                Some(Num(v)) if v.is_infinite() => "inf (!)".to_string(),
                Some(Num(v)) => format!("{v:.3e}"),
            };
            let _ = write!(s, " {cell:>16}");
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
pub struct OracleReport {
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
    pub modes_checked: usize,
    pub violation: Option<OracleViolation>,
}

#[derive(Serialize)]
pub struct OracleViolation {
    pub node: Option<usize>,
    pub mode: Option<usize>,
    pub w: Vec<f64>,
    pub xi: Vec<f64>,
    pub j: usize,
    pub value: f64,
}

pub fn oracle(
    costs: &[(Option<usize>, Option<usize>, mssp::CostModel<f64>)],
    delta: f64,
    opts: &OracleOptions<f64>,
) -> OracleReport {
    let mut violation = None;
    for (node, mode, c) in costs {
        if let Some(v) = oracle_mode_causality(c, delta, opts) {
            violation = Some(OracleViolation {
                node: *node,
                mode: *mode,
                w: v.w,
                xi: v.xi,
                j: v.j,
                value: v.value,
            });
            break;
        }
    }
    OracleReport {
        delta,
        samples: opts.samples,
        seed: opts.seed,
        modes_checked: costs.len(),
        violation,
    }
}

pub fn oracle_text(r: &OracleReport) -> String {
    match &r.violation {
        None => format!(
            "none: no violation of δ = {} in {} modes ({} samples each, seed {})\n",
            r.delta, r.modes_checked, r.samples, r.seed
        ),
        Some(v) => {
            let at = match (v.node, v.mode) {
                (Some(n), Some(m)) => format!(" at node {n} mode {m}"),
                _ => String::new(),
            };
            format!(
                "violation{at}: W = {:?}, xi = {:?}, j = {}, V = {} <= W_j + δ = {}\n",
                v.w,
                v.xi,
                v.j,
                v.value,
                v.w[v.j] + r.delta
            )
        }
    }
}

pub fn print_json<T: Serialize>(v: &T) {
    print!("{}", to_json(v));
}
