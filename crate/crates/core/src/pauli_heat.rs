//! Pauli-sum generators for the heat-equation and damped-oscillator benchmarks,
//! nested-commutator sums and Trotter-step estimators.
//!
//! Qubit `q0` is the least significant bit of the register index. Strings are
//! written most significant qubit first, so `"IX"` means `I₁X₀ = I ⊗ X`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{kron, re, spectral_norm, CMatrix, C64, I};

/// One-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Dense 2×2 matrix.
    pub fn matrix(self) -> CMatrix {
        let o = C64::new(0.0, 0.0);
        let l = re(1.0);
        match self {
            Pauli::I => CMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[o, -I, I, o]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of Paulis; `ops[q]` acts on qubit `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    /// Identity on `n` qubits.
    pub fn identity(n: usize) -> Self {
        Self { ops: vec![Pauli::I; n] }
    }

    /// Builds a string from per-qubit operators, `ops[q]` on qubit `q`.
    pub fn from_qubits(ops: Vec<Pauli>) -> Self {
        Self { ops }
    }

    /// Number of qubits.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    /// Whether the string acts on zero qubits.
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Operator on qubit `q`.
    pub fn get(&self, q: usize) -> Pauli {
        self.ops[q]
    }

    /// Per-qubit operators, lowest qubit first.
    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    /// Qubits carrying a non-identity operator, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.ops.len()).filter(|&q| self.ops[q] != Pauli::I).collect()
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Whether every site is the identity.
    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Places this string on qubits `offset..offset+len` of an `n`-qubit register.
    pub fn embed(&self, offset: usize, n: usize) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[offset..offset + self.ops.len()].copy_from_slice(&self.ops);
        Self { ops }
    }

    /// Whether the two strings commute, by counting anticommuting sites.
    pub fn commutes_with(&self, other: &Self) -> bool {
        self.ops
            .iter()
            .zip(&other.ops)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count()
            % 2
            == 0
    }

    /// Dense matrix, `kron(P_{n−1}, …, P_0)`.
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::from_element(1, 1, re(1.0));
        for p in self.ops.iter().rev() {
            m = kron(&m, &p.matrix());
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.ops.iter().rev() {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut ops = Vec::with_capacity(s.len());
        for ch in s.chars().rev() {
            ops.push(match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(domain(format!("invalid Pauli symbol {other:?}"))),
            });
        }
        if ops.is_empty() {
            return Err(domain("empty Pauli string"));
        }
        Ok(Self { ops })
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Real-weighted Pauli string, tagged with the grid axis it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
    /// Coordinate axis of a Kronecker-sum generator; zero otherwise.
    #[serde(default)]
    pub axis: usize,
}

impl PauliTerm {
    /// Term on axis zero.
    pub fn new(coefficient: f64, string: PauliString) -> Self {
        Self {
            coefficient,
            string,
            axis: 0,
        }
    }
}

/// Sum of real-weighted Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub terms: Vec<PauliTerm>,
}

/// Coefficients below this magnitude are dropped by [`PauliSum::simplify`].
const DROP_TOL: f64 = 1e-14;

/// Register size beyond which dense reconstruction is refused.
pub const MAX_DENSE_QUBITS: usize = 12;

impl PauliSum {
    /// The zero operator.
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    /// Appends a term.
    pub fn push(&mut self, coefficient: f64, string: PauliString) -> Result<()> {
        if string.len() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                got: string.len(),
            });
        }
        self.terms.push(PauliTerm::new(coefficient, string));
        Ok(())
    }

    /// Parses `(coefficient, "XYZ…")` pairs.
    pub fn from_pairs(n_qubits: usize, pairs: &[(f64, &str)]) -> Result<Self> {
        let mut sum = Self::zero(n_qubits);
        for (c, s) in pairs {
            sum.push(*c, s.parse()?)?;
        }
        Ok(sum)
    }

    /// Whether the sum has no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges repeated strings within each axis, keeping first-occurrence
    /// order, and drops vanishing coefficients.
    pub fn simplify(&self) -> Self {
        let mut merged: Vec<PauliTerm> = Vec::new();
        for t in &self.terms {
            match merged.iter_mut().find(|m| m.string == t.string && m.axis == t.axis) {
                Some(m) => m.coefficient += t.coefficient,
                None => merged.push(t.clone()),
            }
        }
        merged.retain(|t| t.coefficient.abs() > DROP_TOL);
        Self {
            n_qubits: self.n_qubits,
            terms: merged,
        }
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coefficient *= s;
        }
        out
    }

    /// Dense matrix `Σ cᵢ Pᵢ`.
    pub fn matrix(&self) -> Result<CMatrix> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(domain(format!(
                "{} qubits exceed the dense limit of {MAX_DENSE_QUBITS}",
                self.n_qubits
            )));
        }
        let d = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(d, d);
        for t in &self.terms {
            m += t.string.matrix() * re(t.coefficient);
        }
        Ok(m)
    }

    /// Sum of absolute coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }
}

/// Boundary condition of the one-dimensional Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Neumann,
    Periodic,
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(Boundary::Dirichlet),
            "neumann" | "n" => Ok(Boundary::Neumann),
            "periodic" | "p" => Ok(Boundary::Periodic),
            other => Err(domain(format!("unknown boundary condition {other:?}"))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
            Boundary::Periodic => "periodic",
        })
    }
}

/// Discretization of one coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisGrid {
    pub bc: Boundary,
    /// Qubits on this axis; the axis has `2^m` grid points.
    pub m: usize,
    /// Grid spacing.
    pub h: f64,
}

/// Cartesian pair `A = L + iH` as Pauli sums, with optional grid metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub label: String,
    pub l: PauliSum,
    pub h: PauliSum,
    /// Per-axis grids of a heat generator; empty otherwise.
    #[serde(default)]
    pub grid: Vec<AxisGrid>,
    /// Diffusivity of a heat generator.
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl GeneratorSpec {
    /// Register size.
    pub fn n_qubits(&self) -> usize {
        self.l.n_qubits
    }

    /// Dense `A = L + iH`.
    pub fn a_matrix(&self) -> Result<CMatrix> {
        Ok(self.l.matrix()? + self.h.matrix()? * I)
    }

    /// Whether this is a heat-equation generator.
    pub fn is_heat(&self) -> bool {
        self.alpha.is_some() && !self.grid.is_empty()
    }
}

/// Coefficients of `R_c = σ⁺_c Π_{j<c} σ⁻_j + h.c.` as Pauli strings on `c+1` qubits.
///
/// `σ⁺ = (X − iY)/2` raises bit `c` while `σ⁻ = (X + iY)/2` clears the lower
/// bits, so `R_c` carries `j → j+1` for every `j` whose lowest `c` bits are
/// set. Adding the adjoint keeps twice the real part of each product coefficient.
fn shift_block(c: usize, n: usize) -> Vec<(f64, PauliString)> {
    let mut out = Vec::with_capacity(1 << c);
    for mask in 0u64..(1u64 << (c + 1)) {
        let mut coef = C64::new(1.0, 0.0);
        let mut ops = vec![Pauli::I; n];
        for (q, op) in ops.iter_mut().enumerate().take(c + 1) {
            let is_y = (mask >> q) & 1 == 1;
            *op = if is_y { Pauli::Y } else { Pauli::X };
            let sign = if q == c { -1.0 } else { 1.0 };
            coef *= if is_y { I * (0.5 * sign) } else { re(0.5) };
        }
        let value = 2.0 * coef.re;
        if value.abs() > DROP_TOL {
            out.push((value, PauliString::from_qubits(ops)));
        }
    }
    out
}

/// All subsets of `0..m` with an even number of elements, as bit masks.
fn even_subsets(m: usize) -> impl Iterator<Item = u64> {
    (0u64..(1u64 << m)).filter(|s| s.count_ones() % 2 == 0)
}

/// Dimensionless `T_m` for the chosen boundary, unsimplified.
fn laplacian_terms(bc: Boundary, m: usize) -> Result<PauliSum> {
    if m < 2 {
        return Err(domain(format!("need at least two qubits per axis, got {m}")));
    }
    if m > MAX_DENSE_QUBITS {
        return Err(domain(format!("{m} qubits per axis exceed the limit of {MAX_DENSE_QUBITS}")));
    }
    let mut sum = PauliSum::zero(m);
    sum.push(2.0, PauliString::identity(m))?;
    for c in 0..m {
        for (v, s) in shift_block(c, m) {
            sum.push(-v, s)?;
        }
    }
    let corr = 2f64.powi(1 - m as i32);
    match bc {
        Boundary::Dirichlet => {}
        Boundary::Neumann => {
            // |0…0⟩⟨0…0| + |1…1⟩⟨1…1| = 2^{1−m} Σ_{|S| even} Z_S.
            for s in even_subsets(m) {
                let ops = (0..m).map(|q| if (s >> q) & 1 == 1 { Pauli::Z } else { Pauli::I }).collect();
                sum.push(-corr, PauliString::from_qubits(ops))?;
            }
        }
        Boundary::Periodic => {
            // |0…0⟩⟨1…1| + h.c. = 2^{1−m} Σ_{|S| even} (−1)^{|S|/2} X_{S^c} Y_S.
            for s in even_subsets(m) {
                let sign = if (s.count_ones() / 2) % 2 == 0 { 1.0 } else { -1.0 };
                let ops = (0..m).map(|q| if (s >> q) & 1 == 1 { Pauli::Y } else { Pauli::X }).collect();
                sum.push(-sign * corr, PauliString::from_qubits(ops))?;
            }
        }
    }
    Ok(sum.simplify())
}

/// Heat generator `L = (α/h²) T_m`, `H = 0` on `m` qubits.
///
/// Terms appear as the identity, then `R_0, R_1, …`, then the surviving
/// boundary corrections.
pub fn heat_generator(bc: Boundary, m: usize, alpha: f64, h: f64) -> Result<GeneratorSpec> {
    kron_sum_generator(&[AxisGrid { bc, m, h }], alpha)
}

/// Kronecker-sum generator of a `d`-dimensional grid; axis `i` occupies the
/// qubits after those of axes `0..i`.
///
/// Identity strings of different axes are kept separate, matching the
/// per-axis compilation.
pub fn kron_sum_generator(axes: &[AxisGrid], alpha: f64) -> Result<GeneratorSpec> {
    if axes.is_empty() {
        return Err(domain("at least one axis is required"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(format!("diffusivity must be positive, got {alpha}")));
    }
    let n: usize = axes.iter().map(|a| a.m).sum();
    if n > MAX_DENSE_QUBITS {
        return Err(domain(format!("{n} qubits exceed the register limit of {MAX_DENSE_QUBITS}")));
    }
    let mut l = PauliSum::zero(n);
    let mut offset = 0;
    for (axis, g) in axes.iter().enumerate() {
        if !(g.h > 0.0 && g.h.is_finite()) {
            return Err(domain(format!("grid spacing must be positive, got {}", g.h)));
        }
        let scale = alpha / (g.h * g.h);
        for t in laplacian_terms(g.bc, g.m)?.terms {
            l.terms.push(PauliTerm {
                coefficient: scale * t.coefficient,
                string: t.string.embed(offset, n),
                axis,
            });
        }
        offset += g.m;
    }
    let label = axes
        .iter()
        .map(|g| format!("{}-m{}", g.bc, g.m))
        .collect::<Vec<_>>()
        .join("x");
    Ok(GeneratorSpec {
        label: format!("heat-{label}"),
        l,
        h: PauliSum::zero(n),
        grid: axes.to_vec(),
        alpha: Some(alpha),
    })
}

/// Damped oscillator `L = (ζ/2) I`, `H = −κ Y` on one qubit.
pub fn damped_oscillator_generator(zeta: f64, kappa: f64) -> Result<GeneratorSpec> {
    if !(kappa > 0.0) || !zeta.is_finite() || zeta < 0.0 {
        return Err(domain("need kappa > 0 and a finite, non-negative zeta"));
    }
    let mut l = PauliSum::zero(1);
    if zeta != 0.0 {
        l.push(0.5 * zeta, PauliString::identity(1))?;
    }
    let mut h = PauliSum::zero(1);
    h.push(-kappa, "Y".parse()?)?;
    Ok(GeneratorSpec {
        label: "damped-osc".into(),
        l,
        h,
        grid: Vec::new(),
        alpha: None,
    })
}

/// Nested-commutator sums entering the product-formula step count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorSums {
    /// Formula order.
    pub p: usize,
    /// `Γ_{p,a}` for `a = 1..=p`, at index `a − 1`.
    pub mixed: Vec<f64>,
    /// Pure `L`-sector sum.
    pub pure_l: f64,
    /// Pure `H`-sector sum.
    pub pure_h: f64,
}

/// Word-count guard on the nested-commutator enumeration.
pub const MAX_COMMUTATOR_WORDS: usize = 2_000_000;

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Evaluates every `(p+1)`-letter nested commutator over the `L`- and
/// `H`-sector summands with `x̂` factored out.
pub fn commutator_sums(spec: &GeneratorSpec, p: usize) -> Result<CommutatorSums> {
    if !(1..=2).contains(&p) {
        return Err(domain(format!("formula order must be 1 or 2, got {p}")));
    }
    let mut letters: Vec<(bool, CMatrix)> = Vec::new();
    for t in &spec.l.terms {
        letters.push((true, t.string.matrix() * re(t.coefficient)));
    }
    for t in &spec.h.terms {
        letters.push((false, t.string.matrix() * re(t.coefficient)));
    }
    let k = letters.len();
    let words = k.checked_pow(p as u32 + 1).unwrap_or(usize::MAX);
    if words > MAX_COMMUTATOR_WORDS {
        return Err(domain(format!("{words} commutator words exceed the limit")));
    }
    let mut mixed = vec![0.0; p];
    let (mut pure_l, mut pure_h) = (0.0, 0.0);
    let mut idx = vec![0usize; p + 1];
    for _ in 0..words {
        let mut c = letters[idx[0]].1.clone();
        for &j in &idx[1..] {
            c = commutator(&letters[j].1, &c);
        }
        let norm = if c.iter().all(|z| z.norm() < 1e-15) { 0.0 } else { spectral_norm(&c) };
        let a = idx.iter().filter(|&&j| letters[j].0).count();
        if a == p + 1 {
            pure_l += norm;
        } else if a == 0 {
            pure_h += norm;
        } else {
            mixed[a - 1] += norm;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < k {
                break;
            }
            *slot = 0;
        }
    }
    Ok(CommutatorSums {
        p,
        mixed,
        pure_l,
        pure_h,
    })
}

/// Step count `n_t = ⌈t^{1+1/p} ((Σ_a ‖x̂‖^a Γ_{p,a} + ‖x̂‖^{p+1} Γ_p^L + Γ_p^H)/ε)^{1/p}⌉`,
/// at least one.
pub fn trotter_step_estimate(spec: &GeneratorSpec, p: usize, t: f64, eps: f64, x_norm: f64) -> Result<u64> {
    if !(eps > 0.0) || !(t >= 0.0) || !(x_norm >= 0.0) {
        return Err(domain("need eps > 0, t ≥ 0 and a non-negative position norm"));
    }
    let g = commutator_sums(spec, p)?;
    let pf = p as f64;
    let total: f64 = g
        .mixed
        .iter()
        .enumerate()
        .map(|(i, v)| x_norm.powi(i as i32 + 1) * v)
        .sum::<f64>()
        + x_norm.powf(pf + 1.0) * g.pure_l
        + g.pure_h;
    let n = (t.powf(1.0 + 1.0 / pf) * (total / eps).powf(1.0 / pf)).ceil();
    Ok((n as u64).max(1))
}

/// Order estimate `(t²/n_t)(α²/h⁴)‖x̂‖² log₂²M` of the product-formula error
/// for a heat generator, with unit constant.
///
/// Multi-axis grids use the largest `α/h²` and the total register size.
pub fn heat_error_estimate(spec: &GeneratorSpec, t: f64, n_t: u64, x_norm: f64) -> Result<f64> {
    let alpha = spec.alpha.filter(|_| spec.is_heat()).ok_or_else(|| domain("not a heat generator"))?;
    if n_t == 0 {
        return Err(domain("step count must be positive"));
    }
    let rate = spec
        .grid
        .iter()
        .map(|g| alpha / (g.h * g.h))
        .fold(0.0, f64::max);
    let log_m = spec.n_qubits() as f64;
    Ok(t * t / n_t as f64 * rate * rate * x_norm * x_norm * log_m * log_m)
}
