//! TOML experiment configuration with strict key checking and up-front validation.

use std::path::{Path, PathBuf};

use hybrid_lchs::hybrid_sim::Convention;
use hybrid_lchs::pauli_heat::Boundary;
use hybrid_lchs::stateprep::SnapDOptions;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Problem whose solution is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkKind {
    HeatDirichlet,
    HeatNeumann,
    HeatPeriodic,
    DampedOsc,
    /// Generator read from `generator_file`.
    Custom,
}

impl BenchmarkKind {
    pub fn boundary(self) -> Option<Boundary> {
        match self {
            BenchmarkKind::HeatDirichlet => Some(Boundary::Dirichlet),
            BenchmarkKind::HeatNeumann => Some(Boundary::Neumann),
            BenchmarkKind::HeatPeriodic => Some(Boundary::Periodic),
            _ => None,
        }
    }
}

/// How the kernel state is put on the oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrepMethod {
    /// Ideal injection of the normalized coefficients.
    Inject,
    /// Law–Eberly pulse sequence.
    Le,
    /// Optimized SNAP + displacement layers.
    Snapd,
}

/// Hybrid evolution used between preparation and postselection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evolution {
    Exact,
    Trotter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkSection {
    pub kind: BenchmarkKind,
    /// Qubits per axis of a heat grid; several entries build a Kronecker sum.
    pub dims: Vec<usize>,
    pub alpha: f64,
    pub h: f64,
    pub zeta: f64,
    pub kappa: f64,
    pub generator_file: Option<PathBuf>,
    /// Computational-basis index of the initial register state.
    pub initial_state: usize,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self {
            kind: BenchmarkKind::HeatDirichlet,
            dims: vec![2],
            alpha: 1.0,
            h: 1.0,
            zeta: 0.5,
            kappa: 1.0,
            generator_file: None,
            initial_state: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub beta: f64,
    /// Postselection squeezing.
    pub r: f64,
    /// Preparation squeezing.
    pub r_prime: f64,
    pub n_coeff: usize,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            beta: 0.5,
            r: 7.9,
            r_prime: 4.1,
            n_coeff: 48,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub n_fock: usize,
    pub n_t: usize,
    pub t: f64,
    pub prep: PrepMethod,
    pub evolution: Evolution,
    pub convention: Convention,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            n_fock: 64,
            n_t: 100,
            t: 1.0,
            prep: PrepMethod::Le,
            evolution: Evolution::Trotter,
            convention: Convention::Benchmark,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnapdSection {
    pub layers: usize,
    /// Optimizer iterations per start.
    pub budget: u64,
    pub cache: bool,
    pub optimizer: SnapDOptions,
}

impl Default for SnapdSection {
    fn default() -> Self {
        Self {
            layers: 30,
            budget: 2000,
            cache: true,
            optimizer: SnapDOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DvSection {
    pub eps: f64,
    pub eta: f64,
    pub beta_grid: Vec<f64>,
}

impl Default for DvSection {
    fn default() -> Self {
        Self {
            eps: 0.1,
            eta: 1.0,
            beta_grid: hybrid_lchs::dv_baseline::default_beta_grid(),
        }
    }
}

/// Grids of the injection sweep; an empty grid pins that parameter to the kernel section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub r: Vec<f64>,
    pub r_prime: Vec<f64>,
    pub beta: Vec<f64>,
    pub n_coeff: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            r: vec![7.7, 7.9, 8.1],
            r_prime: vec![3.9, 4.1, 4.3],
            beta: vec![0.3, 0.5, 0.7],
            n_coeff: vec![48],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Also write a one-line CSV summary of each benchmark.
    pub csv: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            csv: true,
        }
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub benchmark: BenchmarkSection,
    pub kernel: KernelSection,
    pub simulation: SimulationSection,
    pub snapd: SnapdSection,
    pub dv: DvSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn check(cond: bool, msg: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(invalid(msg))
    }
}

impl ExperimentConfig {
    /// Parses a TOML file, rejecting unknown keys.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(format!("invalid configuration: {e}")))
    }

    /// Checks every range and referenced file before anything runs.
    pub fn validate(&self) -> Result<(), CliError> {
        let b = &self.benchmark;
        match b.kind {
            BenchmarkKind::Custom => {
                let path = b.generator_file.as_ref().ok_or_else(|| invalid("custom benchmark needs generator_file"))?;
                check(path.is_file(), &format!("generator file {} does not exist", path.display()))?;
            }
            BenchmarkKind::DampedOsc => check(b.zeta >= 0.0 && b.kappa > 0.0 && b.kappa.is_finite(), "damped oscillator needs zeta >= 0 and kappa > 0")?,
            _ => {
                check(!b.dims.is_empty(), "benchmark.dims must be nonempty")?;
                check(b.dims.iter().all(|&m| (2..=6).contains(&m)), "benchmark.dims entries must lie in 2..=6")?;
                check(b.dims.iter().sum::<usize>() <= 6, "at most 6 register qubits in total")?;
                check(b.alpha > 0.0 && b.h > 0.0, "alpha and h must be positive")?;
            }
        }
        let k = &self.kernel;
        check(k.beta > 0.0 && k.beta < 1.0, "kernel.beta must lie in (0, 1)")?;
        check(k.r > 0.0 && k.r_prime > 0.0 && k.r.is_finite() && k.r_prime.is_finite(), "squeezing parameters must be positive")?;
        check(k.n_coeff >= 1, "kernel.n_coeff must be at least 1")?;
        let s = &self.simulation;
        check((2..=256).contains(&s.n_fock), "simulation.n_fock must lie in 2..=256")?;
        check(k.n_coeff <= s.n_fock, "kernel.n_coeff cannot exceed simulation.n_fock")?;
        check(s.n_t >= 1, "simulation.n_t must be at least 1")?;
        check(s.t > 0.0 && s.t.is_finite(), "simulation.t must be positive")?;
        let sd = &self.snapd;
        check(sd.layers >= 1 && sd.budget >= 1, "snapd.layers and snapd.budget must be at least 1")?;
        check(sd.optimizer.starts >= 1 && sd.optimizer.chunk >= 1, "snapd.starts and snapd.chunk must be at least 1")?;
        check(k.n_coeff <= sd.optimizer.n_fock, "kernel.n_coeff cannot exceed snapd.n_fock")?;
        let dv = &self.dv;
        check(dv.eps > 0.0 && dv.eps < 1.0, "dv.eps must lie in (0, 1)")?;
        check(dv.eta > 0.0, "dv.eta must be positive")?;
        check(!dv.beta_grid.is_empty(), "dv.beta_grid must be nonempty")?;
        check(dv.beta_grid.iter().all(|b| *b > 0.0 && *b < 1.0), "dv.beta_grid entries must lie in (0, 1)")?;
        let sw = &self.sweep;
        check(sw.beta.iter().all(|b| *b > 0.0 && *b < 1.0), "sweep.beta entries must lie in (0, 1)")?;
        check(sw.r.iter().chain(&sw.r_prime).all(|x| *x > 0.0 && x.is_finite()), "sweep squeezing entries must be positive")?;
        check(sw.n_coeff.iter().all(|n| (1..=s.n_fock).contains(n)), "sweep.n_coeff entries must lie in 1..=n_fock")?;
        Ok(())
    }
}
