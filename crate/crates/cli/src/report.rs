//! JSON and CSV outputs of the commands.

use std::path::Path;

use hybrid_lchs::dv_baseline::DvScan;
use hybrid_lchs::linalg::C64;
use hybrid_lchs::metrics::NonGaussReport;
use hybrid_lchs::trotter_compile::GateCountComparison;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, PrepMethod};
use crate::CliError;

/// Version tag written into every report.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// JSON Schema of [`ExperimentReport`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

/// State-preparation details.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepSummary {
    pub method: PrepMethod,
    /// `|⟨C|χ⟩|²` of the prepared Fock state against the target coefficients.
    pub fidelity: f64,
    pub jc_pulses: Option<usize>,
    pub rotations: Option<usize>,
    /// Population left on the excited ancilla after a Law–Eberly sequence.
    pub residual_excitation: Option<f64>,
    pub snapd: Option<SnapdSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapdSummary {
    pub layers: usize,
    pub achieved_fidelity: f64,
    pub converged: bool,
    pub iterations: u64,
    pub best_start: usize,
}

/// Optional wall-clock measurements, omitted in reproducible mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub stages: Vec<StageTime>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

/// Result of one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub generator: String,
    pub n_qubits: usize,
    pub prep: PrepSummary,
    /// Fidelity of the postselected register state with the normalized exact solution.
    pub fidelity_exact: f64,
    /// Fidelity with the exact truncated hybrid evolution of the same prepared state.
    pub fidelity_model: f64,
    pub success_probability: f64,
    pub qubit_state: Vec<C64>,
    pub gate_counts: Option<GateCountComparison>,
    pub nongaussianity: NonGaussReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing: Option<Timing>,
}

/// One grid point of an injection sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub r: f64,
    pub r_prime: f64,
    pub beta: f64,
    pub n_coeff: usize,
    pub infidelity: Option<f64>,
    pub success_probability: Option<f64>,
    pub error: Option<String>,
}

/// Best and mean infidelity over the points sharing one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub parameter: String,
    pub value: f64,
    pub points: usize,
    pub failed: usize,
    pub best_infidelity: Option<f64>,
    pub mean_infidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: String,
    pub seed: u64,
    pub generator: String,
    pub points: Vec<SweepPoint>,
    pub marginals: Vec<Marginal>,
}

impl SweepReport {
    /// Point with the smallest infidelity, if any succeeded.
    pub fn best(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .filter(|p| p.infidelity.is_some())
            .min_by(|a, b| a.infidelity.partial_cmp(&b.infidelity).expect("finite infidelity"))
    }
}

/// Groups sweep points by each parameter value.
pub fn marginals(points: &[SweepPoint]) -> Vec<Marginal> {
    type Getter = fn(&SweepPoint) -> f64;
    let params: [(&str, Getter); 4] = [
        ("r", |p| p.r),
        ("r_prime", |p| p.r_prime),
        ("beta", |p| p.beta),
        ("n_coeff", |p| p.n_coeff as f64),
    ];
    let mut out = Vec::new();
    for (name, get) in params {
        let mut values: Vec<f64> = points.iter().map(get).collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite parameter"));
        values.dedup();
        for value in values {
            let group: Vec<&SweepPoint> = points.iter().filter(|p| get(p) == value).collect();
            let ok: Vec<f64> = group.iter().filter_map(|p| p.infidelity).collect();
            out.push(Marginal {
                parameter: name.to_string(),
                value,
                points: group.len(),
                failed: group.len() - ok.len(),
                best_infidelity: ok.iter().copied().reduce(f64::min),
                mean_infidelity: (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64),
            });
        }
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// One summary row of a benchmark report.
pub fn write_benchmark_csv(path: &Path, report: &ExperimentReport) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let c = &report.config;
    let rows: [[String; 13]; 2] = [
        [
            "generator", "prep", "evolution", "beta", "r", "r_prime", "n_coeff", "n_fock", "n_t", "infidelity",
            "infidelity_model", "success_probability", "delta_ng",
        ]
        .map(String::from),
        [
            report.generator.clone(),
            serde_json::to_value(c.simulation.prep).expect("enum serializes").as_str().unwrap_or_default().to_string(),
            serde_json::to_value(c.simulation.evolution).expect("enum serializes").as_str().unwrap_or_default().to_string(),
            c.kernel.beta.to_string(),
            c.kernel.r.to_string(),
            c.kernel.r_prime.to_string(),
            c.kernel.n_coeff.to_string(),
            c.simulation.n_fock.to_string(),
            c.simulation.n_t.to_string(),
            format!("{:e}", 1.0 - report.fidelity_exact),
            format!("{:e}", 1.0 - report.fidelity_model),
            format!("{:e}", report.success_probability),
            format!("{:e}", report.nongaussianity.delta_ng),
        ],
    ];
    for row in &rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Every sweep point, one per row.
pub fn write_sweep_csv(path: &Path, report: &SweepReport) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["r", "r_prime", "beta", "n_coeff", "infidelity", "success_probability", "error"])
        .map_err(|e| csv_error(path, e))?;
    for p in &report.points {
        w.write_record([
            p.r.to_string(),
            p.r_prime.to_string(),
            p.beta.to_string(),
            p.n_coeff.to_string(),
            opt(p.infidelity),
            opt(p.success_probability),
            p.error.clone().unwrap_or_default(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn write_marginals_csv(path: &Path, marginals: &[Marginal]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["parameter", "value", "points", "failed", "best_infidelity", "mean_infidelity"])
        .map_err(|e| csv_error(path, e))?;
    for m in marginals {
        w.write_record([
            m.parameter.clone(),
            m.value.to_string(),
            m.points.to_string(),
            m.failed.to_string(),
            opt(m.best_infidelity),
            opt(m.mean_infidelity),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// The β scan of the discrete-variable baseline, best row flagged.
pub fn write_dv_csv(path: &Path, scan: &DvScan) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["beta", "h1", "K", "Q", "M_DV", "m_c", "l1_norm", "infidelity", "best"])
        .map_err(|e| csv_error(path, e))?;
    for (i, row) in scan.rows.iter().enumerate() {
        let p = &row.params;
        w.write_record([
            format!("{:.2}", p.beta),
            format!("{:.5}", p.h1),
            format!("{:.5}", p.k_max),
            p.q.to_string(),
            p.m_dv.to_string(),
            p.m_c.to_string(),
            format!("{:.4}", row.l1_norm),
            format!("{:.3e}", row.infidelity),
            (i == scan.best).to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}
