//! Implementations of the subcommands, independent of argument parsing.

use std::path::Path;
use std::time::Instant;

use hybrid_lchs::coeffs::{compute_raw_coefficients, CoefficientSet, QuadratureConfig};
use hybrid_lchs::dv_baseline::{dv_beta_scan, DvScan};
use hybrid_lchs::hybrid_sim::{
    fidelity, postselect, prepare_kernel_state, reference_solution, Convention, HybridPropagator, HybridState,
    PostselectedResult, POSTSELECTION_FLOOR,
};
use hybrid_lchs::kernel::KernelParams;
use hybrid_lchs::linalg::{basis, normalized, C64, CVector};
use hybrid_lchs::metrics::qre_nongaussianity;
use hybrid_lchs::oscillator::{squeezed_vacuum_amplitudes, LeakagePolicy, TruncatedSpace};
use hybrid_lchs::parallel::{map_slice, Exec};
use hybrid_lchs::pauli_heat::{
    damped_oscillator_generator, heat_generator, kron_sum_generator, AxisGrid, Boundary, GeneratorSpec,
};
use hybrid_lchs::stateprep::{law_eberly_synthesize, simulate_le, snapd_optimize, LeSequence, SnapDParams};
use hybrid_lchs::trotter_compile::{compile_layer, gate_counts, trotterized_evolution, write_jsonl, GateCountComparison};
use serde::Serialize;

use crate::cache::{snapd_key, SnapdCache};
use crate::config::{BenchmarkKind, Evolution, ExperimentConfig, KernelSection, PrepMethod};
use crate::report::{
    marginals, ExperimentReport, PrepSummary, SnapdSummary, StageTime, SweepPoint, SweepReport, Timing,
    SCHEMA_VERSION,
};
use crate::{CliError, Stage};

/// Settings shared by every command.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub exec: Exec,
    /// Leave wall-clock timing out of reports so reruns are byte-identical.
    pub reproducible: bool,
}

struct Stopwatch {
    start: Instant,
    last: Instant,
    stages: Vec<StageTime>,
}

impl Stopwatch {
    fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            stages: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.stages.push(StageTime {
            stage: stage.to_string(),
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }

    fn finish(self) -> Timing {
        Timing {
            total_seconds: self.start.elapsed().as_secs_f64(),
            stages: self.stages,
        }
    }
}

/// Builds the generator named by the benchmark section.
pub fn build_generator(config: &ExperimentConfig) -> Result<GeneratorSpec, CliError> {
    let b = &config.benchmark;
    match b.kind {
        BenchmarkKind::DampedOsc => damped_oscillator_generator(b.zeta, b.kappa).stage("generator"),
        BenchmarkKind::Custom => {
            let path = b
                .generator_file
                .as_ref()
                .ok_or_else(|| CliError::Validation("custom benchmark needs generator_file".into()))?;
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            let spec: GeneratorSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("generator file {}: {e}", path.display())))?;
            if spec.l.n_qubits != spec.h.n_qubits {
                return Err(CliError::Validation("generator L and H act on different registers".into()));
            }
            if spec.n_qubits() > 6 {
                return Err(CliError::Validation("custom generators are limited to 6 qubits".into()));
            }
            Ok(spec)
        }
        kind => {
            let bc = kind.boundary().expect("heat benchmark has a boundary");
            if b.dims.len() == 1 {
                heat_generator(bc, b.dims[0], b.alpha, b.h).stage("generator")
            } else {
                let axes: Vec<AxisGrid> = b.dims.iter().map(|&m| AxisGrid { bc, m, h: b.h }).collect();
                kron_sum_generator(&axes, b.alpha).stage("generator")
            }
        }
    }
}

/// Computational-basis initial state, checked against the register size.
pub fn initial_state(spec: &GeneratorSpec, index: usize) -> Result<CVector, CliError> {
    let dim = 1usize << spec.n_qubits();
    if index >= dim {
        return Err(CliError::Validation(format!(
            "initial_state {index} does not fit a {}-qubit register",
            spec.n_qubits()
        )));
    }
    Ok(basis(dim, index))
}

/// Normalized kernel coefficients of the kernel section.
pub fn coefficients(kernel: &KernelSection, exec: Exec) -> Result<CoefficientSet, CliError> {
    let params = KernelParams::new(kernel.beta, kernel.r, kernel.r_prime, kernel.n_coeff)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    compute_raw_coefficients(&params, &QuadratureConfig::default(), exec).stage("coefficients")
}

fn padded(c: &[C64], n_fock: usize) -> CVector {
    CVector::from_iterator(n_fock, c.iter().copied().chain(std::iter::repeat(C64::new(0.0, 0.0))).take(n_fock))
}

/// Fock-basis oscillator state `χ` produced by a preparation method.
#[derive(Debug, Clone)]
pub struct PreparedFock {
    pub chi: CVector,
    pub summary: PrepSummary,
    pub le: Option<LeSequence>,
    pub snapd: Option<SnapDParams>,
}

/// Runs the configured preparation method for `coeffs`.
pub fn prepare(
    config: &ExperimentConfig,
    method: PrepMethod,
    coeffs: &CoefficientSet,
    opts: RunOptions,
) -> Result<PreparedFock, CliError> {
    let n_fock = config.simulation.n_fock;
    let space = TruncatedSpace::new(n_fock).stage("state preparation")?;
    let target = padded(&coeffs.normalized, n_fock);
    let mut summary = PrepSummary {
        method,
        fidelity: 1.0,
        jc_pulses: None,
        rotations: None,
        residual_excitation: None,
        snapd: None,
    };
    let (chi, le, snapd) = match method {
        PrepMethod::Inject => (target.clone(), None, None),
        PrepMethod::Le => {
            let seq = law_eberly_synthesize(&coeffs.normalized).stage("state preparation")?;
            let (chi, excitation) = simulate_le(&seq, space).stage("state preparation")?;
            summary.jc_pulses = Some(seq.n_jc);
            summary.rotations = Some(seq.n_rot);
            summary.residual_excitation = Some(excitation);
            (normalized(&chi).stage("state preparation")?, Some(seq), None)
        }
        PrepMethod::Snapd => {
            let params = optimize_snapd(config, coeffs, opts)?;
            let chi = params.prepared_state(space).stage("state preparation")?;
            summary.snapd = Some(SnapdSummary {
                layers: params.layers.len(),
                achieved_fidelity: params.achieved_fidelity,
                converged: params.converged,
                iterations: params.iterations,
                best_start: params.best_start,
            });
            (normalized(&chi).stage("state preparation")?, None, Some(params))
        }
    };
    summary.fidelity = fidelity(target.as_slice(), chi.as_slice()).stage("state preparation")?;
    Ok(PreparedFock {
        chi,
        summary,
        le,
        snapd,
    })
}

fn optimize_snapd(config: &ExperimentConfig, coeffs: &CoefficientSet, opts: RunOptions) -> Result<SnapDParams, CliError> {
    let sd = &config.snapd;
    let key = snapd_key(&coeffs.normalized, sd.layers, config.seed, sd.budget, &sd.optimizer);
    let cache = SnapdCache::new(config.output.dir.join("cache"));
    if sd.cache {
        if let Some(hit) = cache.get(&key) {
            return Ok(hit);
        }
    }
    let params = snapd_optimize(&coeffs.normalized, sd.layers, config.seed, sd.budget, &sd.optimizer, opts.exec)
        .stage("state preparation")?;
    if sd.cache {
        cache.put(&key, &params)?;
    }
    Ok(params)
}

/// Postselection bra `S(∓r)|0⟩`; truncation leakage of the bra is tolerated.
fn bra(r: f64, space: TruncatedSpace, convention: Convention) -> Result<CVector, CliError> {
    let (bra, _) = squeezed_vacuum_amplitudes(convention.squeeze_sign() * r, space, LeakagePolicy::Allow)
        .stage("postselection")?;
    Ok(bra)
}

fn exact_run(
    propagator: &HybridPropagator,
    prepared: &CVector,
    u0: &CVector,
    bra: &CVector,
) -> Result<PostselectedResult, CliError> {
    let state = HybridState::product(prepared, u0).stage("evolution")?;
    let evolved = propagator.apply(&state).stage("evolution")?;
    postselect(&evolved, bra, POSTSELECTION_FLOOR).stage("postselection")
}

/// Prepares, evolves and postselects one benchmark instance.
pub fn run_benchmark(config: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentReport, CliError> {
    config.validate()?;
    let mut clock = Stopwatch::new();
    let sim = &config.simulation;
    let spec = build_generator(config)?;
    let u0 = initial_state(&spec, config.benchmark.initial_state)?;
    let space = TruncatedSpace::new(sim.n_fock).stage("generator")?;
    let counts = match config.benchmark.kind.boundary() {
        Some(bc) => {
            let cmp = gate_counts(bc, &config.benchmark.dims, sim.n_t as u64).stage("gate counting")?;
            if !cmp.matches {
                return Err(CliError::Mismatch(format!(
                    "compiled circuit for {} disagrees with the closed-form counts",
                    spec.label
                )));
            }
            Some(cmp)
        }
        None => None,
    };
    clock.lap("generator");

    let coeffs = coefficients(&config.kernel, opts.exec)?;
    clock.lap("coefficients");
    let prep = prepare(config, sim.prep, &coeffs, opts)?;
    let nongaussianity = qre_nongaussianity(prep.chi.as_slice()).stage("metrics")?;
    let prepared = prepare_kernel_state(prep.chi.as_slice(), config.kernel.r_prime, space, sim.convention)
        .stage("state preparation")?;
    clock.lap("state preparation");

    let bra = bra(config.kernel.r, space, sim.convention)?;
    let propagator = HybridPropagator::new(&spec.l, &spec.h, space, sim.convention.coupling(), sim.t).stage("evolution")?;
    let model = exact_run(&propagator, &prepared, &u0, &bra)?;
    let result = match sim.evolution {
        Evolution::Exact => model.clone(),
        Evolution::Trotter => {
            let state = HybridState::product(&prepared, &u0).stage("evolution")?;
            let evolved = trotterized_evolution(&spec, sim.t, sim.n_t, &state, sim.convention).stage("evolution")?;
            postselect(&evolved, &bra, POSTSELECTION_FLOOR).stage("postselection")?
        }
    };
    clock.lap("evolution");

    let a = spec.a_matrix().stage("reference solution")?;
    let reference = reference_solution(&a, sim.t, &u0).stage("reference solution")?;
    let fidelity_exact = fidelity(reference.as_slice(), &result.qubit_state).stage("reference solution")?;
    let fidelity_model = fidelity(&model.qubit_state, &result.qubit_state).stage("reference solution")?;
    clock.lap("reference solution");

    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        config: config.clone(),
        generator: spec.label.clone(),
        n_qubits: spec.n_qubits(),
        prep: prep.summary,
        fidelity_exact,
        fidelity_model,
        success_probability: result.success_probability,
        qubit_state: result.qubit_state,
        gate_counts: counts,
        nongaussianity,
        timing: (!opts.reproducible).then(|| clock.finish()),
    })
}

fn grid_or<T: Copy>(grid: &[T], fallback: T) -> Vec<T> {
    if grid.is_empty() {
        vec![fallback]
    } else {
        grid.to_vec()
    }
}

/// Injection sweep with exact evolution over the sweep grids.
///
/// A failing point is recorded with its error and the sweep continues.
pub fn run_sweep(config: &ExperimentConfig, opts: RunOptions) -> Result<SweepReport, CliError> {
    config.validate()?;
    let sim = &config.simulation;
    let k = &config.kernel;
    let sw = &config.sweep;
    let spec = build_generator(config)?;
    let u0 = initial_state(&spec, config.benchmark.initial_state)?;
    let space = TruncatedSpace::new(sim.n_fock).stage("generator")?;
    let propagator = HybridPropagator::new(&spec.l, &spec.h, space, sim.convention.coupling(), sim.t).stage("evolution")?;
    let a = spec.a_matrix().stage("reference solution")?;
    let reference = reference_solution(&a, sim.t, &u0).stage("reference solution")?;

    let mut grid = Vec::new();
    for &r in &grid_or(&sw.r, k.r) {
        for &r_prime in &grid_or(&sw.r_prime, k.r_prime) {
            for &beta in &grid_or(&sw.beta, k.beta) {
                for &n_coeff in &grid_or(&sw.n_coeff, k.n_coeff) {
                    grid.push(KernelSection { beta, r, r_prime, n_coeff });
                }
            }
        }
    }
    let point = |kernel: &KernelSection| -> Result<PostselectedResult, CliError> {
        let coeffs = coefficients(kernel, Exec::Sequential)?;
        let chi = padded(&coeffs.normalized, sim.n_fock);
        let prepared = prepare_kernel_state(chi.as_slice(), kernel.r_prime, space, sim.convention)
            .stage("state preparation")?;
        exact_run(&propagator, &prepared, &u0, &bra(kernel.r, space, sim.convention)?)
    };
    let points: Vec<SweepPoint> = map_slice(opts.exec, &grid, |kernel| {
        let outcome = point(kernel).and_then(|res| {
            let f = fidelity(reference.as_slice(), &res.qubit_state).stage("reference solution")?;
            Ok((1.0 - f, res.success_probability))
        });
        let (infidelity, success_probability, error) = match outcome {
            Ok((inf, p)) => (Some(inf), Some(p), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
        SweepPoint {
            r: kernel.r,
            r_prime: kernel.r_prime,
            beta: kernel.beta,
            n_coeff: kernel.n_coeff,
            infidelity,
            success_probability,
            error,
        }
    });
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION.to_string(),
        seed: config.seed,
        generator: spec.label,
        marginals: marginals(&points),
        points,
    })
}

/// β scan of the discrete-variable quadrature baseline.
pub fn run_dv_baseline(config: &ExperimentConfig, opts: RunOptions) -> Result<DvScan, CliError> {
    config.validate()?;
    let spec = build_generator(config)?;
    let u0 = initial_state(&spec, config.benchmark.initial_state)?;
    let dv = &config.dv;
    dv_beta_scan(&spec, dv.eps, dv.eta, config.simulation.t, &u0, &dv.beta_grid, opts.exec).stage("quadrature baseline")
}

/// Compares compiled and closed-form counts; optionally writes one compiled step as JSONL.
pub fn run_gatecount(bc: Boundary, dims: &[usize], n_t: u64, gates: Option<&Path>) -> Result<GateCountComparison, CliError> {
    if dims.is_empty() {
        return Err(CliError::Validation("at least one axis size is required".into()));
    }
    if let Some(&m) = dims.iter().find(|&&m| !(2..=30).contains(&m)) {
        return Err(CliError::Validation(format!("axis size {m} is outside 2..=30")));
    }
    if n_t == 0 {
        return Err(CliError::Validation("n_t must be at least 1".into()));
    }
    let cmp = gate_counts(bc, dims, n_t).stage("gate counting")?;
    if let Some(path) = gates {
        let axes: Vec<AxisGrid> = dims.iter().map(|&m| AxisGrid { bc, m, h: 1.0 }).collect();
        let spec = kron_sum_generator(&axes, 1.0).stage("gate counting")?;
        let layer = compile_layer(&spec, 1.0 / n_t as f64, Convention::default()).stage("gate counting")?;
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        }
        let file = std::fs::File::create(path).map_err(CliError::io(path))?;
        write_jsonl(&layer, std::io::BufWriter::new(file)).map_err(CliError::io(path))?;
    }
    if !cmp.matches {
        return Err(CliError::Mismatch(format!(
            "compiled counts {:?} differ from closed form {:?}",
            cmp.compiled, cmp.closed_form
        )));
    }
    Ok(cmp)
}

/// Preparation artifacts written by the `prep` command.
#[derive(Debug, Clone, Serialize)]
pub struct PrepArtifacts {
    pub schema_version: String,
    pub coefficients: CoefficientSet,
    pub summary: PrepSummary,
    pub law_eberly: Option<LeSequence>,
    pub snapd: Option<SnapDParams>,
}

pub fn run_prep(config: &ExperimentConfig, opts: RunOptions) -> Result<PrepArtifacts, CliError> {
    config.validate()?;
    let coefficients = coefficients(&config.kernel, opts.exec)?;
    let prep = prepare(config, config.simulation.prep, &coefficients, opts)?;
    Ok(PrepArtifacts {
        schema_version: SCHEMA_VERSION.to_string(),
        coefficients,
        summary: prep.summary,
        law_eberly: prep.le,
        snapd: prep.snapd,
    })
}
