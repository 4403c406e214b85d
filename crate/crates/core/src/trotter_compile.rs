//! Gate-level compilation of the first-order product formula, a gate-list
//! simulator and gate tallies.
//!
//! A hybrid factor `e^{−iλ x̂⊗P}` is compiled by rotating every support qubit
//! of `P` into the `Z` basis, collecting the parity on the lowest support
//! qubit with a CNOT ladder, applying one conditional displacement
//! `e^{−iλ x̂⊗Z}` and uncomputing. An identity string becomes the unconditional
//! displacement `D(−iλ) = e^{−iλ x̂}`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hybrid_sim::{Convention, HybridPropagator, HybridState};
use crate::linalg::{hermitian_eigen, re, spectral_norm, CMatrix, CVector, C64, I};
use crate::oscillator::{displace, position, qubit_rotation, squeeze, TruncatedSpace, EXCITED, GROUND};
use crate::parallel::{map_range, Exec};
use crate::pauli_heat::{Boundary, GeneratorSpec, Pauli, PauliTerm};

/// One gate of a hybrid circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircuitOp {
    /// `D(α) = exp(α a† − α* a)`.
    Displace { alpha: C64 },
    /// `exp(−iλ x̂ ⊗ Z_control)`.
    CondDisplace { control: usize, lambda: f64 },
    /// `S(r)` with `⟨x̂²⟩ = e^{2r}` on the squeezed vacuum.
    Squeeze { r: f64 },
    /// Fock-level phases `e^{iθₙ}`.
    Snap { theta: Vec<f64> },
    /// Jaynes–Cummings pulse between the oscillator and `qubit`.
    Jc { qubit: usize, n: usize, alpha: f64, phi: f64 },
    /// `exp[−iθ/2 (cos φ X + sin φ Y)]`.
    Rot1q { qubit: usize, theta: f64, phi: f64 },
    Hadamard { qubit: usize },
    /// `S = diag(1, i)`, or its adjoint.
    Sgate { qubit: usize, dagger: bool },
    /// `exp(−iθ Z/2)`.
    Rz { qubit: usize, theta: f64 },
    Cnot { control: usize, target: usize },
}

impl CircuitOp {
    /// Qubits the gate touches.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            CircuitOp::Displace { .. } | CircuitOp::Squeeze { .. } | CircuitOp::Snap { .. } => Vec::new(),
            CircuitOp::CondDisplace { control, .. } => vec![*control],
            CircuitOp::Jc { qubit, .. }
            | CircuitOp::Rot1q { qubit, .. }
            | CircuitOp::Hadamard { qubit }
            | CircuitOp::Sgate { qubit, .. }
            | CircuitOp::Rz { qubit, .. } => vec![*qubit],
            CircuitOp::Cnot { control, target } => vec![*control, *target],
        }
    }

    /// Whether the gate acts on the oscillator.
    pub fn is_hybrid(&self) -> bool {
        matches!(self, CircuitOp::Displace { .. } | CircuitOp::CondDisplace { .. })
    }

    fn is_one_qubit(&self) -> bool {
        matches!(
            self,
            CircuitOp::Rot1q { .. } | CircuitOp::Hadamard { .. } | CircuitOp::Sgate { .. } | CircuitOp::Rz { .. }
        )
    }
}

/// Writes one JSON object per gate.
pub fn write_jsonl<W: Write>(ops: &[CircuitOp], mut out: W) -> std::io::Result<()> {
    for op in ops {
        serde_json::to_writer(&mut out, op)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn basis_change_in(p: Pauli, q: usize, ops: &mut Vec<CircuitOp>) {
    match p {
        Pauli::X => ops.push(CircuitOp::Hadamard { qubit: q }),
        Pauli::Y => {
            ops.push(CircuitOp::Sgate { qubit: q, dagger: true });
            ops.push(CircuitOp::Hadamard { qubit: q });
        }
        Pauli::I | Pauli::Z => {}
    }
}

fn basis_change_out(p: Pauli, q: usize, ops: &mut Vec<CircuitOp>) {
    match p {
        Pauli::X => ops.push(CircuitOp::Hadamard { qubit: q }),
        Pauli::Y => {
            ops.push(CircuitOp::Hadamard { qubit: q });
            ops.push(CircuitOp::Sgate { qubit: q, dagger: false });
        }
        Pauli::I | Pauli::Z => {}
    }
}

/// Wraps a `Z`-basis core gate on the lowest support qubit in basis changes and ladders.
fn conjugate_into_z(term: &PauliTerm, core: impl FnOnce(usize) -> CircuitOp) -> Vec<CircuitOp> {
    let support = term.string.support();
    let mut ops = Vec::new();
    for &q in &support {
        basis_change_in(term.string.get(q), q, &mut ops);
    }
    for k in (1..support.len()).rev() {
        ops.push(CircuitOp::Cnot {
            control: support[k],
            target: support[k - 1],
        });
    }
    ops.push(core(support[0]));
    for k in 1..support.len() {
        ops.push(CircuitOp::Cnot {
            control: support[k],
            target: support[k - 1],
        });
    }
    for &q in support.iter().rev() {
        basis_change_out(term.string.get(q), q, &mut ops);
    }
    ops
}

/// Gate sequence for `exp(−iθ c x̂ ⊗ P)` with `c` the term coefficient.
pub fn compile_hybrid_factor(theta: f64, term: &PauliTerm) -> Result<Vec<CircuitOp>> {
    if term.string.is_empty() {
        return Err(domain("cannot compile an empty Pauli string"));
    }
    let lambda = theta * term.coefficient;
    if term.string.is_identity() {
        return Ok(vec![CircuitOp::Displace {
            alpha: C64::new(0.0, -lambda),
        }]);
    }
    Ok(conjugate_into_z(term, |q| CircuitOp::CondDisplace { control: q, lambda }))
}

/// Gate sequence for the register rotation `exp(−iθ c P)`; an identity
/// string is a global phase and emits nothing.
pub fn compile_pauli_rotation(theta: f64, term: &PauliTerm) -> Result<Vec<CircuitOp>> {
    if term.string.is_empty() {
        return Err(domain("cannot compile an empty Pauli string"));
    }
    if term.string.is_identity() {
        return Ok(Vec::new());
    }
    let angle = 2.0 * theta * term.coefficient;
    Ok(conjugate_into_z(term, |q| CircuitOp::Rz { qubit: q, theta: angle }))
}

/// One first-order layer of step `dt`: every `L` term as a hybrid factor,
/// then every `H` term as a register rotation.
pub fn compile_layer(spec: &GeneratorSpec, dt: f64, convention: Convention) -> Result<Vec<CircuitOp>> {
    let mut ops = Vec::new();
    for term in &spec.l.terms {
        ops.extend(compile_hybrid_factor(dt * convention.coupling(), term)?);
    }
    for term in &spec.h.terms {
        ops.extend(compile_pauli_rotation(dt, term)?);
    }
    Ok(ops)
}

/// Applies gate lists to hybrid states of a fixed shape.
#[derive(Debug, Clone)]
pub struct GateSimulator {
    n_fock: usize,
    n_qubits: usize,
    x_values: Vec<f64>,
    x_vectors: CMatrix,
}

impl GateSimulator {
    /// Diagonalizes `x̂` on `space` once for all displacement gates.
    pub fn new(space: TruncatedSpace, n_qubits: usize) -> Result<Self> {
        let (x_values, x_vectors) = hermitian_eigen(&position(space.n_fock))?;
        Ok(Self {
            n_fock: space.n_fock,
            n_qubits,
            x_values,
            x_vectors,
        })
    }

    fn dq(&self) -> usize {
        1 << self.n_qubits
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                got: q + 1,
            });
        }
        Ok(())
    }

    /// Applies `exp(−iλ sⱼ x̂)` to register column `j`, with `sⱼ = signs(j)`.
    fn position_phase(&self, amps: &mut [C64], lambda: f64, signs: impl Fn(usize) -> f64) {
        let dq = self.dq();
        let nf = self.n_fock;
        let psi = CMatrix::from_row_slice(nf, dq, amps);
        let mut phi = self.x_vectors.adjoint() * psi;
        for j in 0..dq {
            let s = signs(j);
            if s == 0.0 {
                continue;
            }
            for i in 0..nf {
                phi[(i, j)] *= C64::from_polar(1.0, -lambda * s * self.x_values[i]);
            }
        }
        let out = &self.x_vectors * phi;
        for n in 0..nf {
            for j in 0..dq {
                amps[n * dq + j] = out[(n, j)];
            }
        }
    }

    fn oscillator_gate(&self, amps: &mut [C64], u: &CMatrix) {
        let dq = self.dq();
        let psi = CMatrix::from_row_slice(self.n_fock, dq, amps);
        let out = u * psi;
        for n in 0..self.n_fock {
            for j in 0..dq {
                amps[n * dq + j] = out[(n, j)];
            }
        }
    }

    fn qubit_gate(&self, amps: &mut [C64], q: usize, g: [[C64; 2]; 2]) {
        let bit = 1usize << q;
        for i0 in (0..amps.len()).filter(|i| i & bit == 0) {
            let i1 = i0 | bit;
            let (a, b) = (amps[i0], amps[i1]);
            amps[i0] = g[0][0] * a + g[0][1] * b;
            amps[i1] = g[1][0] * a + g[1][1] * b;
        }
    }

    fn jc(&self, amps: &mut [C64], q: usize, n: usize, alpha: f64, phi: f64) {
        let dq = self.dq();
        let bit = 1usize << q;
        let set = |j: usize, v: usize| if v == 1 { j | bit } else { j & !bit };
        for rest in (0..dq).filter(|j| j & bit == 0) {
            for m in 1..self.n_fock {
                let theta = alpha * (m as f64 / n as f64).sqrt();
                let ie = (m - 1) * dq + set(rest, EXCITED);
                let ig = m * dq + set(rest, GROUND);
                let (c, s) = (theta.cos(), theta.sin());
                let (e, g) = (amps[ie], amps[ig]);
                amps[ie] = e * c + g * C64::from_polar(s, -phi) * (-I);
                amps[ig] = g * c + e * C64::from_polar(s, phi) * (-I);
            }
        }
    }

    /// Applies one gate to the amplitudes of a hybrid state in place.
    pub fn apply_op(&self, op: &CircuitOp, amps: &mut [C64]) -> Result<()> {
        if amps.len() != self.n_fock * self.dq() {
            return Err(Error::Dimension {
                expected: self.n_fock * self.dq(),
                got: amps.len(),
            });
        }
        for q in op.qubits() {
            self.check_qubit(q)?;
        }
        let o = C64::new(0.0, 0.0);
        let h = re(std::f64::consts::FRAC_1_SQRT_2);
        match op {
            CircuitOp::Displace { alpha } => {
                if alpha.re == 0.0 {
                    // D(−iλ) = e^{−iλ x̂}.
                    self.position_phase(amps, -alpha.im, |_| 1.0);
                } else {
                    self.oscillator_gate(amps, &displace(*alpha, self.n_fock)?);
                }
            }
            CircuitOp::CondDisplace { control, lambda } => {
                let bit = 1usize << control;
                self.position_phase(amps, *lambda, |j| if j & bit == 0 { 1.0 } else { -1.0 });
            }
            CircuitOp::Squeeze { r } => self.oscillator_gate(amps, &squeeze(*r, self.n_fock)?),
            CircuitOp::Snap { theta } => {
                if theta.len() > self.n_fock {
                    return Err(Error::Dimension {
                        expected: self.n_fock,
                        got: theta.len(),
                    });
                }
                let dq = self.dq();
                for (n, t) in theta.iter().enumerate() {
                    let p = C64::from_polar(1.0, *t);
                    for a in &mut amps[n * dq..(n + 1) * dq] {
                        *a *= p;
                    }
                }
            }
            CircuitOp::Jc { qubit, n, alpha, phi } => {
                if *n == 0 {
                    return Err(domain("JC pulse index must be at least one"));
                }
                self.jc(amps, *qubit, *n, *alpha, *phi);
            }
            CircuitOp::Rot1q { qubit, theta, phi } => self.qubit_gate(amps, *qubit, qubit_rotation(*theta, *phi)),
            CircuitOp::Hadamard { qubit } => self.qubit_gate(amps, *qubit, [[h, h], [h, -h]]),
            CircuitOp::Sgate { qubit, dagger } => {
                let p = if *dagger { -I } else { I };
                self.qubit_gate(amps, *qubit, [[re(1.0), o], [o, p]]);
            }
            CircuitOp::Rz { qubit, theta } => {
                let a = C64::from_polar(1.0, -0.5 * theta);
                self.qubit_gate(amps, *qubit, [[a, o], [o, a.conj()]]);
            }
            CircuitOp::Cnot { control, target } => {
                if control == target {
                    return Err(domain("CNOT control and target coincide"));
                }
                let (cb, tb) = (1usize << control, 1usize << target);
                for i in (0..amps.len()).filter(|i| i & cb != 0 && i & tb == 0) {
                    amps.swap(i, i | tb);
                }
            }
        }
        Ok(())
    }

    /// Applies a gate list in order.
    pub fn apply_ops(&self, ops: &[CircuitOp], amps: &mut [C64]) -> Result<()> {
        for op in ops {
            self.apply_op(op, amps)?;
        }
        Ok(())
    }

    /// Dense unitary of a gate list, one column per basis state.
    pub fn unitary(&self, ops: &[CircuitOp], exec: Exec) -> Result<CMatrix> {
        let dim = self.n_fock * self.dq();
        let cols = map_range(exec, dim, |k| {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[k] = re(1.0);
            self.apply_ops(ops, &mut v).map(|_| v)
        });
        let mut u = CMatrix::zeros(dim, dim);
        for (k, col) in cols.into_iter().enumerate() {
            for (i, z) in col?.into_iter().enumerate() {
                u[(i, k)] = z;
            }
        }
        Ok(u)
    }
}

/// Applies a gate list to a hybrid state.
pub fn simulate_gate_list(ops: &[CircuitOp], state: &HybridState) -> Result<HybridState> {
    let sim = GateSimulator::new(TruncatedSpace::new(state.n_fock)?, state.n_qubits)?;
    let mut amps: Vec<C64> = state.amplitudes.iter().copied().collect();
    sim.apply_ops(ops, &mut amps)?;
    Ok(HybridState {
        amplitudes: CVector::from_vec(amps),
        ..state.clone()
    })
}

/// `n_t` first-order layers of step `t/n_t` applied to `state`.
pub fn trotterized_evolution(
    spec: &GeneratorSpec,
    t: f64,
    n_t: usize,
    state: &HybridState,
    convention: Convention,
) -> Result<HybridState> {
    if n_t == 0 {
        return Err(domain("step count must be positive"));
    }
    if state.n_qubits != spec.n_qubits() {
        return Err(Error::Dimension {
            expected: spec.n_qubits(),
            got: state.n_qubits,
        });
    }
    let layer = compile_layer(spec, t / n_t as f64, convention)?;
    let sim = GateSimulator::new(TruncatedSpace::new(state.n_fock)?, state.n_qubits)?;
    let mut amps: Vec<C64> = state.amplitudes.iter().copied().collect();
    for _ in 0..n_t {
        sim.apply_ops(&layer, &mut amps)?;
    }
    Ok(HybridState {
        amplitudes: CVector::from_vec(amps),
        ..state.clone()
    })
}

fn matrix_power(m: &CMatrix, mut k: usize) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Dense `n_t`-step product-formula unitary.
pub fn trotter_unitary(
    spec: &GeneratorSpec,
    t: f64,
    n_t: usize,
    space: TruncatedSpace,
    convention: Convention,
    exec: Exec,
) -> Result<CMatrix> {
    if n_t == 0 {
        return Err(domain("step count must be positive"));
    }
    let layer = compile_layer(spec, t / n_t as f64, convention)?;
    let step = GateSimulator::new(space, spec.n_qubits())?.unitary(&layer, exec)?;
    Ok(matrix_power(&step, n_t))
}

/// Spectral-norm distance between the exact hybrid propagator and its
/// `n_t`-step product formula.
pub fn trotter_operator_error(
    spec: &GeneratorSpec,
    t: f64,
    n_t: usize,
    space: TruncatedSpace,
    convention: Convention,
    exec: Exec,
) -> Result<f64> {
    let exact = HybridPropagator::new(&spec.l, &spec.h, space, convention.coupling(), t)?;
    let approx = trotter_unitary(spec, t, n_t, space, convention, exec)?;
    Ok(spectral_norm(&(exact.matrix() - approx)))
}

/// Gate tallies of one coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AxisCounts {
    pub m: usize,
    pub displace: u64,
    pub cond_displace: u64,
    pub cnot: u64,
    pub one_qubit: u64,
}

impl AxisCounts {
    /// Displacements plus conditional displacements.
    pub fn hybrid(&self) -> u64 {
        self.displace + self.cond_displace
    }

    fn scaled(self, k: u64) -> Self {
        Self {
            m: self.m,
            displace: self.displace * k,
            cond_displace: self.cond_displace * k,
            cnot: self.cnot * k,
            one_qubit: self.one_qubit * k,
        }
    }
}

/// Gate counts of an `n_t`-step circuit with a per-axis breakdown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCountReport {
    pub hybrid: u64,
    pub displace: u64,
    pub cond_displace: u64,
    pub cnot: u64,
    pub one_qubit: u64,
    pub per_axis: Vec<AxisCounts>,
}

impl GateCountReport {
    fn from_axes(per_axis: Vec<AxisCounts>) -> Self {
        let sum = |f: fn(&AxisCounts) -> u64| per_axis.iter().map(f).sum();
        Self {
            hybrid: sum(|a| a.hybrid()),
            displace: sum(|a| a.displace),
            cond_displace: sum(|a| a.cond_displace),
            cnot: sum(|a| a.cnot),
            one_qubit: sum(|a| a.one_qubit),
            per_axis,
        }
    }
}

/// Closed-form per-step counts `(hybrid, cnot, one_qubit)` of one axis.
pub fn closed_form_axis(bc: Boundary, m: usize) -> Result<(u64, u64, u64)> {
    if !(2..=30).contains(&m) {
        return Err(domain(format!("axis size must be between 2 and 30 qubits, got {m}")));
    }
    let big_m = 1i64 << m;
    let mi = m as i64;
    let (hybrid, cnot, one) = match bc {
        Boundary::Dirichlet => (big_m, 2 * (mi - 2) * big_m + 4, 3 * (mi - 1) * big_m + 2),
        Boundary::Neumann => (3 * big_m / 2 - 1, (5 * mi - 10) * big_m / 2 + 6, 3 * (mi - 1) * big_m + 2),
        Boundary::Periodic => {
            let one = if m == 2 { 6 } else { 2 + (9 * mi - 13) * big_m / 4 };
            (3 * big_m / 4, (3 * mi - 7) * big_m / 2 + 4, one)
        }
    };
    Ok((hybrid as u64, cnot as u64, one as u64))
}

/// Closed-form counts for a Kronecker-sum grid with boundary `bc` on every axis.
pub fn closed_form_counts(bc: Boundary, dims: &[usize], n_t: u64) -> Result<GateCountReport> {
    if dims.is_empty() {
        return Err(domain("at least one axis is required"));
    }
    let per_axis = dims
        .iter()
        .map(|&m| {
            let (hybrid, cnot, one_qubit) = closed_form_axis(bc, m)?;
            Ok(AxisCounts {
                m,
                displace: n_t,
                cond_displace: (hybrid - 1) * n_t,
                cnot: cnot * n_t,
                one_qubit: one_qubit * n_t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GateCountReport::from_axes(per_axis))
}

/// Tallies an actually compiled layer per axis and scales by `n_t`.
pub fn compiled_counts(spec: &GeneratorSpec, n_t: u64) -> Result<GateCountReport> {
    let axes = spec.grid.len().max(1);
    let mut per_axis: Vec<AxisCounts> = (0..axes)
        .map(|a| AxisCounts {
            m: spec.grid.get(a).map_or(spec.n_qubits(), |g| g.m),
            ..Default::default()
        })
        .collect();
    let l_ops = spec.l.terms.iter().map(|t| Ok((t.axis, compile_hybrid_factor(1.0, t)?)));
    let h_ops = spec.h.terms.iter().map(|t| Ok((t.axis, compile_pauli_rotation(1.0, t)?)));
    for item in l_ops.chain(h_ops) {
        let (axis, ops): (usize, Vec<CircuitOp>) = item?;
        let c = per_axis.get_mut(axis).ok_or_else(|| domain("term axis out of range"))?;
        for op in &ops {
            match op {
                CircuitOp::Displace { .. } => c.displace += 1,
                CircuitOp::CondDisplace { .. } => c.cond_displace += 1,
                CircuitOp::Cnot { .. } => c.cnot += 1,
                o if o.is_one_qubit() => c.one_qubit += 1,
                _ => {}
            }
        }
    }
    Ok(GateCountReport::from_axes(
        per_axis.into_iter().map(|a| a.scaled(n_t)).collect(),
    ))
}

/// Closed-form and compiled counts side by side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCountComparison {
    pub closed_form: GateCountReport,
    pub compiled: GateCountReport,
    pub matches: bool,
}

/// Compiles the heat generator for `(bc, dims)` and compares with the closed forms.
pub fn gate_counts(bc: Boundary, dims: &[usize], n_t: u64) -> Result<GateCountComparison> {
    let axes: Vec<_> = dims
        .iter()
        .map(|&m| crate::pauli_heat::AxisGrid { bc, m, h: 1.0 })
        .collect();
    let spec = crate::pauli_heat::kron_sum_generator(&axes, 1.0)?;
    let closed_form = closed_form_counts(bc, dims, n_t)?;
    let compiled = compiled_counts(&spec, n_t)?;
    let matches = closed_form == compiled;
    Ok(GateCountComparison {
        closed_form,
        compiled,
        matches,
    })
}
