//! JSON problem and result files.

use std::fmt::Write as _;
use std::sync::Arc;

use mssp::causality::ProblemCertificate;
use mssp::eikonal::{ConstantSpeed, EllipticSpeed, Speed, SpeedForm};
use mssp::solvers::FixedPointReport;
use mssp::{CostKind, CostModel, Discrete, Problem, Solution};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, Result};

pub const PROBLEM_VERSION: u32 = 1;
pub const RESULT_VERSION: u32 = 1;

/// A number that may be infinite; written as `"inf"` / `"-inf"` / `"nan"`
/// when it is not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(v) => Ok(Num(v)),
            Raw::S(s) => match s.as_str() {
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                "nan" => Ok(Num(f64::NAN)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, got '{other}'"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedType {
    Constant,
    Elliptic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedRecord {
    #[serde(rename = "type")]
    pub kind: SpeedType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostTag {
    Linear,
    WeightedEuclidean,
    EuclideanOffset,
    Polynomial,
    SemiLagrangian,
    Facet,
    Homogenized,
}

impl CostTag {
    fn name(self) -> &'static str {
        match self {
            CostTag::Linear => "linear",
            CostTag::WeightedEuclidean => "weighted_euclidean",
            CostTag::EuclideanOffset => "euclidean_offset",
            CostTag::Polynomial => "polynomial",
            CostTag::SemiLagrangian => "semi_lagrangian",
            CostTag::Facet => "facet",
            CostTag::Homogenized => "homogenized",
        }
    }
}

/// One cost; which fields are required depends on `kind`. Kept flat (rather
/// than an internally tagged enum) so parse errors carry exact positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostRecord {
    pub kind: CostTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<SpeedRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<CostRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub concave: bool,
}

impl CostRecord {
    pub fn new(kind: CostTag) -> Self {
        CostRecord {
            kind,
            coeffs: None,
            scale: None,
            weights: None,
            offsets: None,
            position: None,
            speed: None,
            inner: None,
            keep: None,
            degree: None,
            concave: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRecord {
    pub successors: Vec<usize>,
    pub cost: CostRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlRecord {
    pub cost: f64,
    /// `(successor, probability)` pairs.
    pub transitions: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Mssp,
    Discrete,
}

/// `modes` for `"mssp"` files, `controls` for `"discrete"` ones; one list per
/// non-target node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format: Format,
    pub version: u32,
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Option<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<Vec<ModeRecord>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls: Option<Vec<Vec<ControlRecord>>>,
}

/// Either kind of problem the tools operate on.
pub enum Loaded {
    Mssp(Problem),
    Discrete(Discrete),
}

impl Loaded {
    pub fn state_count(&self) -> usize {
        match self {
            Loaded::Mssp(p) => p.len(),
            Loaded::Discrete(d) => d.len(),
        }
    }

    pub fn label(&self, node: usize) -> Option<String> {
        match self {
            Loaded::Mssp(p) => p.label(node).map(str::to_string),
            Loaded::Discrete(_) => None,
        }
    }

    pub fn coordinates(&self) -> Option<&[Vec<f64>]> {
        match self {
            Loaded::Mssp(p) => p.coordinates(),
            Loaded::Discrete(_) => None,
        }
    }
}

fn speed_record(speed: &Arc<dyn Speed<f64>>) -> Result<SpeedRecord> {
    match speed.form() {
        Some(SpeedForm::Constant(f)) => Ok(SpeedRecord {
            kind: SpeedType::Constant,
            f: Some(f),
            matrix: None,
        }),
        Some(SpeedForm::Elliptic(matrix)) => Ok(SpeedRecord {
            kind: SpeedType::Elliptic,
            f: None,
            matrix: Some(matrix),
        }),
        None => Err(CliError::Usage(format!(
            "speed profile {speed:?} cannot be written to a file"
        ))),
    }
}

pub fn cost_record(cost: &CostModel<f64>) -> Result<CostRecord> {
    let mut r = match cost.kind() {
        CostKind::Linear { coeffs } => CostRecord {
            coeffs: Some(coeffs.clone()),
            ..CostRecord::new(CostTag::Linear)
        },
        CostKind::WeightedEuclidean { scale, weights } => CostRecord {
            scale: Some(*scale),
            weights: Some(weights.clone()),
            ..CostRecord::new(CostTag::WeightedEuclidean)
        },
        CostKind::EuclideanOffset { scale, offsets } => CostRecord {
            scale: Some(*scale),
            offsets: Some(offsets.clone()),
            ..CostRecord::new(CostTag::EuclideanOffset)
        },
        CostKind::Polynomial { coeffs } => CostRecord {
            coeffs: Some(coeffs.clone()),
            ..CostRecord::new(CostTag::Polynomial)
        },
        CostKind::SemiLagrangian {
            offsets,
            position,
            speed,
        } => CostRecord {
            offsets: Some(offsets.clone()),
            position: Some(position.clone()),
            speed: Some(speed_record(speed)?),
            ..CostRecord::new(CostTag::SemiLagrangian)
        },
        CostKind::Facet { inner, keep } => CostRecord {
            inner: Some(Box::new(cost_record(inner)?)),
            keep: Some(keep.clone()),
            ..CostRecord::new(CostTag::Facet)
        },
        CostKind::Homogenized { inner } => CostRecord {
            inner: Some(Box::new(cost_record(inner)?)),
            ..CostRecord::new(CostTag::Homogenized)
        },
        CostKind::Custom { .. } => {
            return Err(CliError::Usage(
                "custom costs cannot be written to a file".into(),
            ))
        }
    };
    r.degree = cost.degree();
    r.concave = cost.is_concave() && !cost.is_linear() && cost.dim() > 1;
    Ok(r)
}

fn need<'a, T>(v: &'a Option<T>, kind: CostTag, field: &str) -> std::result::Result<&'a T, String> {
    v.as_ref()
        .ok_or_else(|| format!("{} cost needs '{field}'", kind.name()))
}

fn check_len<T>(v: &[T], what: &str) -> std::result::Result<(), String> {
    if v.is_empty() {
        Err(format!("{what} must not be empty"))
    } else {
        Ok(())
    }
}

fn check_offsets(
    offsets: &[Vec<f64>],
    position: Option<&[f64]>,
) -> std::result::Result<(), String> {
    check_len(offsets, "offsets")?;
    let n = position.map_or(offsets[0].len(), <[f64]>::len);
    if n == 0 || offsets.iter().any(|v| v.len() != n) {
        return Err("offsets and position must share one non-zero dimension".into());
    }
    Ok(())
}

pub fn cost_from_record(r: &CostRecord) -> std::result::Result<CostModel<f64>, String> {
    let k = r.kind;
    let base = match k {
        CostTag::Linear => {
            let coeffs = need(&r.coeffs, k, "coeffs")?;
            check_len(coeffs, "coeffs")?;
            CostModel::linear(coeffs.clone())
        }
        CostTag::WeightedEuclidean => {
            let weights = need(&r.weights, k, "weights")?;
            check_len(weights, "weights")?;
            CostModel::weighted_euclidean(*need(&r.scale, k, "scale")?, weights.clone())
        }
        CostTag::EuclideanOffset => {
            let offsets = need(&r.offsets, k, "offsets")?;
            check_offsets(offsets, None)?;
            CostModel::euclidean_offset(*need(&r.scale, k, "scale")?, offsets.clone())
        }
        CostTag::Polynomial => {
            let coeffs = need(&r.coeffs, k, "coeffs")?;
            check_len(coeffs, "coeffs")?;
            CostModel::polynomial(coeffs.clone())
        }
        CostTag::SemiLagrangian => {
            let offsets = need(&r.offsets, k, "offsets")?;
            let position = need(&r.position, k, "position")?;
            check_offsets(offsets, Some(position))?;
            let sr = need(&r.speed, k, "speed")?;
            let speed: Arc<dyn Speed<f64>> = match sr.kind {
                SpeedType::Constant => {
                    Arc::new(ConstantSpeed(sr.f.ok_or("constant speed needs 'f'")?))
                }
                SpeedType::Elliptic => {
                    let matrix = sr.matrix.as_ref().ok_or("elliptic speed needs 'matrix'")?;
                    if matrix.is_empty() || matrix.iter().any(|row| row.len() != matrix.len()) {
                        return Err("elliptic speed matrix must be square".into());
                    }
                    if matrix.len() != position.len() {
                        return Err(
                            "elliptic speed matrix does not match the position dimension".into(),
                        );
                    }
                    Arc::new(EllipticSpeed::new(matrix.clone()))
                }
            };
            CostModel::semi_lagrangian(offsets.clone(), position.clone(), speed)
        }
        CostTag::Facet => {
            let inner = cost_from_record(need(&r.inner, k, "inner")?)?;
            let keep = need(&r.keep, k, "keep")?;
            if keep.is_empty() || keep.iter().any(|&j| j >= inner.dim()) {
                return Err(format!(
                    "facet indices {keep:?} out of range for dimension {}",
                    inner.dim()
                ));
            }
            inner.restricted_to(keep.clone())
        }
        CostTag::Homogenized => cost_from_record(need(&r.inner, k, "inner")?)?.homogenized(),
    };
    let mut cost = base;
    if let Some(d) = r.degree {
        if cost.degree() != Some(d) {
            cost = cost.with_degree(d);
        }
    }
    if r.concave {
        cost = cost.declare_concave();
    }
    Ok(cost)
}

pub fn problem_to_file(problem: &Loaded) -> Result<ProblemFile> {
    match problem {
        Loaded::Mssp(p) => {
            let mut modes = Vec::with_capacity(p.node_count());
            for i in 0..p.node_count() {
                let ms = p
                    .modes(i)
                    .iter()
                    .enumerate()
                    .map(|(k, m)| {
                        Ok(ModeRecord {
                            successors: m.successors.clone(),
                            cost: cost_record(&m.cost)
                                .map_err(|e| CliError::Usage(format!("node {i}, mode {k}: {e}")))?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                modes.push(ms);
            }
            let labels: Vec<Option<String>> = (0..p.len())
                .map(|i| p.label(i).map(str::to_string))
                .collect();
            Ok(ProblemFile {
                format: Format::Mssp,
                version: PROBLEM_VERSION,
                nodes: p.node_count(),
                kappa: p.kappa(),
                labels: labels.iter().any(Option::is_some).then_some(labels),
                coordinates: p.coordinates().map(|c| c.to_vec()),
                modes: Some(modes),
                controls: None,
            })
        }
        Loaded::Discrete(d) => Ok(ProblemFile {
            format: Format::Discrete,
            version: PROBLEM_VERSION,
            nodes: d.node_count(),
            kappa: None,
            labels: None,
            coordinates: None,
            modes: None,
            controls: Some(
                (0..d.node_count())
                    .map(|i| {
                        d.controls(i)
                            .iter()
                            .map(|c| ControlRecord {
                                cost: c.cost,
                                transitions: c.transitions.clone(),
                            })
                            .collect()
                    })
                    .collect(),
            ),
        }),
    }
}

fn parse_error(path: &str, e: &serde_json::Error) -> CliError {
    CliError::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: {
            let m = e.to_string();
            match m.rsplit_once(" at line ") {
                Some((head, _)) if e.line() > 0 => head.to_string(),
                _ => m,
            }
        },
    }
}

/// Parses and validates a problem file.
pub fn problem_from_text(path: &str, text: &str) -> Result<Loaded> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| parse_error(path, &e))?;
    check_version(file.version)?;
    let nodes = file.nodes;
    match file.format {
        Format::Mssp => {
            if file.controls.is_some() {
                return Err(CliError::Invalid(
                    "'controls' belongs in discrete files".into(),
                ));
            }
            let modes = file
                .modes
                .ok_or_else(|| CliError::Invalid("mssp file needs 'modes'".into()))?;
            if modes.len() != nodes {
                return Err(CliError::Invalid(format!(
                    "{} mode lists for {nodes} nodes",
                    modes.len()
                )));
            }
            let mut p = Problem::new(nodes);
            if let Some(k) = file.kappa {
                p = p.with_kappa(k);
            }
            for (i, ms) in modes.iter().enumerate() {
                for (k, m) in ms.iter().enumerate() {
                    let cost = cost_from_record(&m.cost)
                        .map_err(|e| CliError::Invalid(format!("node {i}, mode {k}: {e}")))?;
                    p.add_mode(i, m.successors.clone(), cost);
                }
            }
            if let Some(labels) = file.labels {
                for (i, l) in labels.into_iter().enumerate().take(nodes + 1) {
                    if let Some(l) = l {
                        p.set_label(i, l);
                    }
                }
            }
            if let Some(c) = file.coordinates {
                if c.len() != nodes && c.len() != nodes + 1 {
                    return Err(CliError::Invalid(format!(
                        "{} coordinates for {nodes} nodes",
                        c.len()
                    )));
                }
                p.set_coordinates(c);
            }
            let violations = mssp::validate_problem(&p);
            if !violations.is_empty() {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                return Err(CliError::Invalid(list.join("; ")));
            }
            Ok(Loaded::Mssp(p))
        }
        Format::Discrete => {
            if file.modes.is_some()
                || file.kappa.is_some()
                || file.labels.is_some()
                || file.coordinates.is_some()
            {
                return Err(CliError::Invalid(
                    "discrete files take only 'controls'".into(),
                ));
            }
            let controls = file
                .controls
                .ok_or_else(|| CliError::Invalid("discrete file needs 'controls'".into()))?;
            if controls.len() != nodes {
                return Err(CliError::Invalid(format!(
                    "{} control lists for {nodes} nodes",
                    controls.len()
                )));
            }
            let mut d = Discrete::new(nodes);
            for (i, cs) in controls.into_iter().enumerate() {
                for c in cs {
                    d.add_control(i, c.cost, c.transitions);
                }
            }
            let problems = d.validate();
            if !problems.is_empty() {
                return Err(CliError::Invalid(problems.join("; ")));
            }
            Ok(Loaded::Discrete(d))
        }
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != PROBLEM_VERSION {
        return Err(CliError::Invalid(format!(
            "unsupported problem file version {v}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRecord {
    pub mode: usize,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub value: Num,
    pub policy: Option<PolicyRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub tol: f64,
    pub pass: bool,
    pub max_residual: Num,
    pub worst_node: Option<usize>,
    pub infinite_inside_reachable: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub verdict: String,
    pub delta: Option<f64>,
    pub uncertified_modes: usize,
}

impl CertificateSummary {
    pub fn from_certificate(c: &ProblemCertificate<f64>) -> Self {
        CertificateSummary {
            verdict: c.verdict.name().to_string(),
            delta: c.delta,
            uncertified_modes: c.uncertified_modes().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub format: String,
    pub version: u32,
    pub method: String,
    pub iterations: usize,
    pub residual: Num,
    pub converged: bool,
    /// Sup-norm step per value iteration sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residual_history: Vec<Num>,
    /// Only with `--record-time`, so default output stays byte-stable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bucket_width: Option<f64>,
    pub reupdates_after_acceptance: usize,
    pub accept_order: Vec<usize>,
    pub verification: VerificationRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSummary>,
    pub nodes: Vec<NodeRecord>,
}

impl ResultFile {
    pub fn new(
        problem: &Loaded,
        s: &Solution,
        report: &FixedPointReport<f64>,
        tol: f64,
        certificate: Option<CertificateSummary>,
    ) -> Self {
        let d = &s.diagnostics;
        ResultFile {
            format: "mssp_result".into(),
            version: RESULT_VERSION,
            method: d.method.name().into(),
            iterations: d.iterations,
            residual: Num(d.residual),
            converged: d.converged,
            residual_history: d.residual_history.iter().map(|&r| Num(r)).collect(),
            wall_time_s: None,
            bucket_width: d.bucket_width,
            reupdates_after_acceptance: d.reupdates_after_acceptance,
            accept_order: d.accept_order.clone(),
            verification: VerificationRecord {
                tol,
                pass: report.pass,
                max_residual: Num(report.max_residual),
                worst_node: report.worst_node,
                infinite_inside_reachable: report.infinite_inside_reachable.clone(),
            },
            certificate,
            nodes: s
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| NodeRecord {
                    id: i,
                    label: problem.label(i),
                    value: Num(v),
                    policy: s.policy[i].as_ref().map(|c| PolicyRecord {
                        mode: c.mode_index,
                        xi: c.xi.clone(),
                    }),
                })
                .collect(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.value.0).collect()
    }

    pub fn from_text(path: &str, text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| parse_error(path, &e))
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// `node,[x,y,…,]value` rows, coordinates when the problem has them.
pub fn values_csv(problem: &Loaded, values: &[f64]) -> String {
    let coords = problem.coordinates();
    let dim = coords.and_then(|c| c.first()).map_or(0, Vec::len);
    let mut out = String::from("node");
    for k in 0..dim {
        let _ = write!(out, ",x{k}");
    }
    out.push_str(",value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = write!(out, "{i}");
        if let Some(c) = coords.and_then(|c| c.get(i)) {
            for x in c {
                let _ = write!(out, ",{x}");
            }
        } else {
            for _ in 0..dim {
                out.push(',');
            }
        }
        let _ = writeln!(out, ",{v}");
    }
    out
}
