//! Oscillator state preparation: Law–Eberly pulse synthesis and a variational
//! SNAP + displacement ansatz.

use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient, State, TerminationReason};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{hermitian_eigen, re, CMatrix, CVector, C64, I};
use crate::oscillator::{annihilation, TruncatedSpace, EXCITED, GROUND};
use crate::parallel::{map_range, Exec};
use crate::trotter_compile::{CircuitOp, GateSimulator};

/// One Law–Eberly pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LePulse {
    /// Jaynes–Cummings pulse `S_n(α, φ)`.
    Jc { n: usize, alpha: f64, phi: f64 },
    /// Ancilla rotation `R(θ, φ)` emitted while processing Fock level `n_context`.
    Rot { n_context: usize, theta: f64, phi: f64 },
}

/// Ordered preparation pulses and their counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeSequence {
    pub pulses: Vec<LePulse>,
    pub n_jc: usize,
    pub n_rot: usize,
}

impl LeSequence {
    /// Gate list acting on the oscillator and register qubit `qubit`.
    pub fn to_ops(&self, qubit: usize) -> Vec<CircuitOp> {
        self.pulses
            .iter()
            .map(|p| match *p {
                LePulse::Jc { n, alpha, phi } => CircuitOp::Jc { qubit, n, alpha, phi },
                LePulse::Rot { theta, phi, .. } => CircuitOp::Rot1q { qubit, theta, phi },
            })
            .collect()
    }
}

/// Largest accepted deviation of a target norm from one.
const TARGET_NORM_TOL: f64 = 1e-10;

fn check_unit(c: &[C64]) -> Result<()> {
    let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (n - 1.0).abs() > TARGET_NORM_TOL {
        return Err(Error::Normalization { norm: n });
    }
    Ok(())
}

/// Index of `|q, n⟩` in the oscillator ⊗ ancilla layout.
fn idx(n: usize, q: usize) -> usize {
    2 * n + q
}

/// Builds the preparation pulses for `Σ Cₙ|n⟩` by unpreparing the target
/// from the top Fock level down and reversing the adjoint sequence.
pub fn law_eberly_synthesize(c: &[C64]) -> Result<LeSequence> {
    check_unit(c)?;
    let levels = c.len();
    let space = TruncatedSpace::new((levels + 1).max(2))?;
    let sim = GateSimulator::new(space, 1)?;
    let mut psi = vec![C64::new(0.0, 0.0); 2 * space.n_fock];
    for (n, z) in c.iter().enumerate() {
        psi[idx(n, GROUND)] = *z;
    }
    let mut unprep = Vec::new();
    for n in (1..levels).rev() {
        let a = psi[idx(n - 1, EXCITED)];
        let b = psi[idx(n, GROUND)];
        if b.norm() > 0.0 {
            let (alpha, phi) = if a.norm() == 0.0 {
                (std::f64::consts::FRAC_PI_2, 0.0)
            } else {
                ((b.norm() / a.norm()).atan(), b.arg() - a.arg() - std::f64::consts::FRAC_PI_2)
            };
            sim.apply_op(&CircuitOp::Jc { qubit: 0, n, alpha, phi }, &mut psi)?;
            unprep.push(LePulse::Jc { n, alpha, phi });
        }
        let u = psi[idx(n - 1, EXCITED)];
        let v = psi[idx(n - 1, GROUND)];
        if u.norm() > 0.0 {
            let (theta, phi) = if v.norm() == 0.0 {
                (std::f64::consts::PI, 0.0)
            } else {
                (2.0 * (u.norm() / v.norm()).atan(), -u.arg() + v.arg() + std::f64::consts::FRAC_PI_2)
            };
            sim.apply_op(&CircuitOp::Rot1q { qubit: 0, theta, phi }, &mut psi)?;
            unprep.push(LePulse::Rot {
                n_context: n - 1,
                theta,
                phi,
            });
        }
    }
    let pulses: Vec<LePulse> = unprep
        .into_iter()
        .rev()
        .map(|p| match p {
            LePulse::Jc { n, alpha, phi } => LePulse::Jc { n, alpha: -alpha, phi },
            LePulse::Rot { n_context, theta, phi } => LePulse::Rot {
                n_context,
                theta: -theta,
                phi,
            },
        })
        .collect();
    let n_jc = pulses.iter().filter(|p| matches!(p, LePulse::Jc { .. })).count();
    Ok(LeSequence {
        n_rot: pulses.len() - n_jc,
        n_jc,
        pulses,
    })
}

/// Runs a pulse sequence from `|g⟩|0⟩`.
///
/// Returns the oscillator amplitudes on the ancilla ground state and the
/// residual ancilla excitation probability.
pub fn simulate_le(seq: &LeSequence, space: TruncatedSpace) -> Result<(CVector, f64)> {
    if let Some(top) = seq.pulses.iter().filter_map(|p| match p {
        LePulse::Jc { n, .. } => Some(*n),
        _ => None,
    }).max() {
        if top >= space.n_fock {
            return Err(Error::Dimension {
                expected: space.n_fock,
                got: top + 1,
            });
        }
    }
    let sim = GateSimulator::new(space, 1)?;
    let mut psi = vec![C64::new(0.0, 0.0); 2 * space.n_fock];
    psi[idx(0, GROUND)] = re(1.0);
    sim.apply_ops(&seq.to_ops(0), &mut psi)?;
    let osc = CVector::from_iterator(space.n_fock, (0..space.n_fock).map(|n| psi[idx(n, GROUND)]));
    let excitation = (0..space.n_fock).map(|n| psi[idx(n, EXCITED)].norm_sqr()).sum();
    Ok((osc, excitation))
}

/// One SNAP + displacement layer, applied as `D(α) SNAP(θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapLayer {
    pub alpha: C64,
    pub theta: Vec<f64>,
}

/// Optimized SNAP + displacement circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapDParams {
    pub layers: Vec<SnapLayer>,
    pub achieved_fidelity: f64,
    /// Whether the best start met the gradient or cost tolerance before the budget ran out.
    pub converged: bool,
    /// Optimizer iterations used by the best start.
    pub iterations: u64,
    /// Start index that produced the best result.
    pub best_start: usize,
    /// Best fidelity after each chunk of the best start.
    pub history: Vec<f64>,
}

impl SnapDParams {
    /// Gate list `D(α₁)SNAP(θ₁)` first.
    pub fn to_ops(&self) -> Vec<CircuitOp> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    CircuitOp::Snap { theta: l.theta.clone() },
                    CircuitOp::Displace { alpha: l.alpha },
                ]
            })
            .collect()
    }

    /// Oscillator state prepared from vacuum on `space`.
    pub fn prepared_state(&self, space: TruncatedSpace) -> Result<CVector> {
        let sim = GateSimulator::new(space, 0)?;
        let mut psi = vec![C64::new(0.0, 0.0); space.n_fock];
        psi[0] = re(1.0);
        sim.apply_ops(&self.to_ops(), &mut psi)?;
        Ok(CVector::from_vec(psi))
    }
}

/// Settings of the SNAP + displacement search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnapDOptions {
    /// Fock levels simulated.
    pub n_fock: usize,
    /// Independent random starts.
    pub starts: usize,
    /// L-BFGS history length.
    pub memory: usize,
    /// Iterations per restart chunk; the best point seeds the next chunk.
    pub chunk: u64,
    /// Gradient-norm tolerance.
    pub tol_grad: f64,
    /// Standard deviation scale of the initial displacement amplitudes.
    pub init_displacement: f64,
}

impl Default for SnapDOptions {
    fn default() -> Self {
        Self {
            n_fock: 64,
            starts: 4,
            memory: 10,
            chunk: 250,
            tol_grad: 1e-10,
            init_displacement: 0.5,
        }
    }
}

/// Fidelity objective `|⟨t|Π D(α_ℓ) SNAP(θ_ℓ)|0⟩|²` with analytic gradient.
///
/// Parameters are laid out as all phases (layer-major), then the
/// displacement magnitudes `r_ℓ`, then their phases `φ_ℓ`, with
/// `α_ℓ = r_ℓ e^{iφ_ℓ}`.
struct SnapObjective {
    target: Vec<C64>,
    layers: usize,
    levels: usize,
    n_fock: usize,
    /// Eigen-decomposition of `P = i(a† − a)`, so `D(r) = e^{−irP}`.
    p_values: Vec<f64>,
    p_vectors: CMatrix,
    p_matrix: CMatrix,
}

impl SnapObjective {
    fn new(target: &[C64], layers: usize, n_fock: usize) -> Result<Self> {
        let a = annihilation(n_fock);
        let p_matrix = (a.adjoint() - &a) * I;
        let (p_values, p_vectors) = hermitian_eigen(&p_matrix)?;
        let mut t = target.to_vec();
        t.resize(n_fock, C64::new(0.0, 0.0));
        Ok(Self {
            target: t,
            layers,
            levels: target.len(),
            n_fock,
            p_values,
            p_vectors,
            p_matrix,
        })
    }

    fn dim(&self) -> usize {
        self.layers * (self.levels + 2)
    }

    /// `D(r e^{iφ}) v = R(φ) e^{−irP} R(φ)† v` with `R(φ) = e^{iφn̂}`.
    fn displace(&self, r: f64, phi: f64, v: &[C64]) -> Vec<C64> {
        let rotated = CVector::from_iterator(self.n_fock, v.iter().enumerate().map(|(n, z)| z * C64::from_polar(1.0, -phi * n as f64)));
        let mut w = self.p_vectors.adjoint() * rotated;
        for (k, z) in w.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, -r * self.p_values[k]);
        }
        let out = &self.p_vectors * w;
        out.iter().enumerate().map(|(n, z)| z * C64::from_polar(1.0, phi * n as f64)).collect()
    }

    fn unpack<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let nt = self.layers * self.levels;
        (&p[..nt], &p[nt..nt + self.layers], &p[nt + self.layers..])
    }

    fn snap_phases(&self, theta: &[f64]) -> Vec<C64> {
        (0..self.n_fock)
            .map(|n| if n < self.levels { C64::from_polar(1.0, theta[n]) } else { re(1.0) })
            .collect()
    }

    fn forward(&self, p: &[f64]) -> (Vec<Vec<C64>>, Vec<Vec<C64>>, Vec<C64>) {
        let (th, r, ph) = self.unpack(p);
        let mut psi = vec![C64::new(0.0, 0.0); self.n_fock];
        psi[0] = re(1.0);
        let mut before = Vec::with_capacity(self.layers);
        let mut snapped = Vec::with_capacity(self.layers);
        for l in 0..self.layers {
            let s = self.snap_phases(&th[l * self.levels..(l + 1) * self.levels]);
            let f: Vec<C64> = psi.iter().zip(&s).map(|(a, b)| a * b).collect();
            before.push(psi);
            psi = self.displace(r[l], ph[l], &f);
            snapped.push(f);
        }
        (before, snapped, psi)
    }

    fn overlap(&self, psi: &[C64]) -> C64 {
        self.target.iter().zip(psi).map(|(t, z)| t.conj() * z).sum()
    }

    fn fidelity(&self, p: &[f64]) -> f64 {
        let (_, _, psi) = self.forward(p);
        self.overlap(&psi).norm_sqr()
    }

    fn fidelity_gradient(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let (th, r, ph) = self.unpack(p);
        let (before, snapped, psi) = self.forward(p);
        let amp = self.overlap(&psi);
        let weight = |d: C64| 2.0 * (amp.conj() * d).re;
        let nt = self.layers * self.levels;
        let mut grad = vec![0.0; self.dim()];
        let mut chi = self.target.clone();
        let inner = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
        for l in (0..self.layers).rev() {
            let out = self.displace(r[l], ph[l], &snapped[l]);
            // ∂D/∂r = −i R P R† D.
            let rot: CVector = CVector::from_iterator(self.n_fock, out.iter().enumerate().map(|(n, z)| z * C64::from_polar(1.0, -ph[l] * n as f64)));
            let prod = &self.p_matrix * rot;
            let pr: Vec<C64> = prod.iter().enumerate().map(|(n, z)| z * C64::from_polar(1.0, ph[l] * n as f64) * (-I)).collect();
            grad[nt + l] = weight(inner(&chi, &pr));
            // ∂D/∂φ = i(n̂ D − D n̂).
            let n_out: Vec<C64> = out.iter().enumerate().map(|(n, z)| z * n as f64).collect();
            let n_in: Vec<C64> = snapped[l].iter().enumerate().map(|(n, z)| z * n as f64).collect();
            let d_n_in = self.displace(r[l], ph[l], &n_in);
            let dphi: Vec<C64> = n_out.iter().zip(&d_n_in).map(|(a, b)| (a - b) * I).collect();
            grad[nt + self.layers + l] = weight(inner(&chi, &dphi));
            let w = self.displace(-r[l], ph[l], &chi);
            let s = self.snap_phases(&th[l * self.levels..(l + 1) * self.levels]);
            for k in 0..self.levels {
                grad[l * self.levels + k] = weight(w[k].conj() * I * s[k] * before[l][k]);
            }
            chi = w.iter().zip(&s).map(|(a, b)| a * b.conj()).collect();
        }
        (amp.norm_sqr(), grad)
    }
}

impl CostFunction for &SnapObjective {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, ArgminError> {
        Ok(-self.fidelity(p))
    }
}

impl Gradient for &SnapObjective {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Self::Param) -> std::result::Result<Vec<f64>, ArgminError> {
        Ok(self.fidelity_gradient(p).1.into_iter().map(|g| -g).collect())
    }
}

struct StartOutcome {
    params: Vec<f64>,
    fidelity: f64,
    converged: bool,
    iterations: u64,
    history: Vec<f64>,
}

fn optimize_start(obj: &SnapObjective, p0: Vec<f64>, budget: u64, opts: &SnapDOptions) -> StartOutcome {
    let mut best = p0;
    let mut best_f = obj.fidelity(&best);
    let mut used = 0u64;
    let mut converged = false;
    let mut history = vec![best_f];
    while used < budget && !converged {
        let iters = opts.chunk.min(budget - used);
        let solver = match LBFGS::new(MoreThuenteLineSearch::new(), opts.memory).with_tolerance_grad(opts.tol_grad) {
            Ok(s) => s,
            Err(_) => break,
        };
        let run = Executor::new(obj, solver)
            .configure(|s| s.param(best.clone()).max_iters(iters))
            .run();
        let Ok(res) = run else {
            // A failed line search ends this start with the best point so far.
            break;
        };
        let state = res.state();
        used += state.get_iter().max(1);
        if let Some(p) = state.get_best_param() {
            let f = obj.fidelity(p);
            if f > best_f {
                best_f = f;
                best = p.clone();
            }
        }
        history.push(best_f);
        converged = matches!(
            state.get_termination_reason(),
            Some(TerminationReason::SolverConverged) | Some(TerminationReason::TargetCostReached)
        );
        if !converged && state.get_iter() < iters {
            // Terminated early for a reason other than convergence.
            break;
        }
    }
    StartOutcome {
        params: best,
        fidelity: best_f,
        converged,
        iterations: used,
        history,
    }
}

/// Maximizes the preparation fidelity of `target` with `layers` SNAP +
/// displacement layers.
///
/// Each of `opts.starts` seeded random starts runs L-BFGS for at most
/// `budget` iterations; an exhausted budget returns the best point with
/// `converged = false`. Results depend only on `(target, layers, seed,
/// budget, opts)`.
pub fn snapd_optimize(
    target: &[C64],
    layers: usize,
    seed: u64,
    budget: u64,
    opts: &SnapDOptions,
    exec: Exec,
) -> Result<SnapDParams> {
    if layers == 0 {
        return Err(domain("at least one layer is required"));
    }
    if budget == 0 {
        return Err(domain("optimizer budget must be at least one iteration"));
    }
    if opts.starts == 0 || opts.chunk == 0 {
        return Err(domain("need at least one start and a positive chunk length"));
    }
    check_unit(target)?;
    if target.len() > opts.n_fock {
        return Err(Error::Dimension {
            expected: opts.n_fock,
            got: target.len(),
        });
    }
    let obj = SnapObjective::new(target, layers, opts.n_fock)?;
    let outcomes = map_range(exec, opts.starts, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let tau = std::f64::consts::TAU;
        let mut p0: Vec<f64> = (0..layers * obj.levels).map(|_| rng.random_range(0.0..tau)).collect();
        p0.extend((0..layers).map(|_| opts.init_displacement * rng.random_range(-1.0..1.0)));
        p0.extend((0..layers).map(|_| rng.random_range(0.0..tau)));
        optimize_start(&obj, p0, budget, opts)
    });
    let (best_start, best) = outcomes
        .into_iter()
        .enumerate()
        .fold(None::<(usize, StartOutcome)>, |acc, (i, o)| match acc {
            Some((j, b)) if b.fidelity >= o.fidelity => Some((j, b)),
            _ => Some((i, o)),
        })
        .expect("at least one start");
    let (th, r, ph) = obj.unpack(&best.params);
    let layers_out = (0..layers)
        .map(|l| SnapLayer {
            alpha: C64::from_polar(r[l], ph[l]),
            theta: th[l * obj.levels..(l + 1) * obj.levels].to_vec(),
        })
        .collect();
    Ok(SnapDParams {
        layers: layers_out,
        achieved_fidelity: best.fidelity.min(1.0),
        converged: best.converged,
        iterations: best.iterations,
        best_start,
        history: best.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let target: Vec<C64> = vec![re(0.6), C64::new(0.0, 0.8)];
        let obj = SnapObjective::new(&target, 3, 12).unwrap();
        let p: Vec<f64> = (0..obj.dim()).map(|i| 0.3 + 0.17 * i as f64).collect();
        let (_, g) = obj.fidelity_gradient(&p);
        for k in 0..obj.dim() {
            let mut q = p.clone();
            q[k] += 1e-6;
            let mut m = p.clone();
            m[k] -= 1e-6;
            let fd = (obj.fidelity(&q) - obj.fidelity(&m)) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-7, "component {k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn two_level_target_needs_one_pulse_each() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let seq = law_eberly_synthesize(&[re(h), re(h)]).unwrap();
        assert_eq!((seq.n_jc, seq.n_rot), (1, 1));
    }
}
