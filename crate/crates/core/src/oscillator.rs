//! Truncated Fock-space operators in the `ħ = 2` convention.
//!
//! Position is `x̂ = a + a†`, so `[x̂, p̂] = 2i` and the vacuum has `⟨x̂²⟩ = 1`.
//! Every gate is the exact exponential of its generator truncated to
//! `n_fock` levels; generators are anti-Hermitian, so the truncated gates are
//! unitary and truncation shows up as population reaching the top levels.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{expm_hermitian, hermitian_eigen, re, CMatrix, CVector, C64, I};
use crate::special::hermite_functions;

/// Default population threshold on the top Fock levels.
pub const LEAKAGE_THRESHOLD: f64 = 1e-8;

/// Qubit index of the excited state of a Jaynes–Cummings ancilla.
pub const EXCITED: usize = 0;
/// Qubit index of the ground state of a Jaynes–Cummings ancilla.
pub const GROUND: usize = 1;

/// Oscillator truncated to levels `0 … n_fock − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedSpace {
    /// Number of retained Fock levels.
    pub n_fock: usize,
}

impl TruncatedSpace {
    /// Validated constructor; squeezing and displacement need two levels.
    pub fn new(n_fock: usize) -> Result<Self> {
        if n_fock < 2 {
            return Err(domain(format!("need at least two Fock levels, got {n_fock}")));
        }
        Ok(Self { n_fock })
    }

    /// Dimension of the space.
    pub fn dim(&self) -> usize {
        self.n_fock
    }
}

/// Operator family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Ladder,
    Position,
    Squeeze,
    Displace,
    Snap,
    Projector,
}

/// Request for one oscillator operator.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// Annihilation operator `a`.
    Ladder,
    /// `x̂ = a + a†`.
    Position,
    /// `S(r)` with `⟨x̂²⟩ = e^{2r}` on `S(r)|0⟩`.
    Squeeze(f64),
    /// `D(α) = exp(α a† − α* a)`.
    Displace(C64),
    /// Diagonal phases `e^{iθₙ}`; missing trailing phases are zero.
    Snap(Vec<f64>),
    /// `|n⟩⟨n|`.
    Projector(usize),
}

impl OperatorSpec {
    fn kind(&self) -> OperatorKind {
        match self {
            OperatorSpec::Ladder => OperatorKind::Ladder,
            OperatorSpec::Position => OperatorKind::Position,
            OperatorSpec::Squeeze(_) => OperatorKind::Squeeze,
            OperatorSpec::Displace(_) => OperatorKind::Displace,
            OperatorSpec::Snap(_) => OperatorKind::Snap,
            OperatorSpec::Projector(_) => OperatorKind::Projector,
        }
    }
}

/// A constructed oscillator operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorOperator {
    /// Dense matrix on the truncated space.
    pub matrix: CMatrix,
    /// Operator family.
    pub kind: OperatorKind,
    /// Population on the top two levels of the operator applied to vacuum,
    /// for gates; zero for the other kinds.
    pub leakage: f64,
    /// Whether `leakage` exceeds [`LEAKAGE_THRESHOLD`].
    pub leakage_warning: bool,
}

/// Annihilation operator on `n` levels, `a|m⟩ = √m |m−1⟩`.
pub fn annihilation(n: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    for m in 1..n {
        a[(m - 1, m)] = re((m as f64).sqrt());
    }
    a
}

/// Number operator on `n` levels.
pub fn number(n: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(n, (0..n).map(|m| re(m as f64))))
}

/// `x̂ = a + a†` on `n` levels.
pub fn position(n: usize) -> CMatrix {
    let a = annihilation(n);
    &a + a.adjoint()
}

/// Largest eigenvalue of the truncated position operator.
pub fn position_norm(n: usize) -> Result<f64> {
    let (values, _) = hermitian_eigen(&position(n))?;
    Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Population of the top two Fock levels of `v`.
///
/// Two levels are inspected because parity-preserving gates populate only
/// every other level.
pub fn top_population(v: &CVector) -> f64 {
    let n = v.len();
    v.iter().skip(n.saturating_sub(2)).map(|z| z.norm_sqr()).sum()
}

/// `S(r) = exp[(r/2)(a†² − a²)]`, which widens the vacuum in position to `σ = e^r`.
pub fn squeeze(r: f64, n: usize) -> Result<CMatrix> {
    let a = annihilation(n);
    let a2 = &a * &a;
    let adag2 = a2.adjoint();
    // exp(G) with anti-Hermitian G equals exp(−i H) for H = iG.
    let h = (adag2 - a2) * (I * (0.5 * r));
    expm_hermitian(&h, 1.0)
}

/// `D(α) = exp(α a† − α* a)`.
pub fn displace(alpha: C64, n: usize) -> Result<CMatrix> {
    let a = annihilation(n);
    let h = (a.adjoint() * alpha - &a * alpha.conj()) * I;
    expm_hermitian(&h, 1.0)
}

/// Diagonal SNAP gate with phases `θ`; levels past `θ.len()` keep phase zero.
pub fn snap(theta: &[f64], n: usize) -> Result<CMatrix> {
    if theta.len() > n {
        return Err(Error::Dimension {
            expected: n,
            got: theta.len(),
        });
    }
    Ok(CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        (0..n).map(|m| C64::from_polar(1.0, theta.get(m).copied().unwrap_or(0.0))),
    )))
}

/// Builds one operator on `space`.
pub fn build_operator(space: TruncatedSpace, spec: &OperatorSpec) -> Result<OscillatorOperator> {
    let n = space.n_fock;
    let matrix = match spec {
        OperatorSpec::Ladder => annihilation(n),
        OperatorSpec::Position => position(n),
        OperatorSpec::Squeeze(r) => squeeze(*r, n)?,
        OperatorSpec::Displace(alpha) => displace(*alpha, n)?,
        OperatorSpec::Snap(theta) => snap(theta, n)?,
        OperatorSpec::Projector(level) => {
            if *level >= n {
                return Err(Error::Dimension {
                    expected: n,
                    got: *level + 1,
                });
            }
            let mut p = CMatrix::zeros(n, n);
            p[(*level, *level)] = re(1.0);
            p
        }
    };
    let leakage = match spec {
        OperatorSpec::Squeeze(_) | OperatorSpec::Displace(_) => top_population(&matrix.column(0).into_owned()),
        _ => 0.0,
    };
    Ok(OscillatorOperator {
        matrix,
        kind: spec.kind(),
        leakage,
        leakage_warning: leakage > LEAKAGE_THRESHOLD,
    })
}

/// Whether to reject or accept truncation leakage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LeakagePolicy {
    /// Fail when the top-level population exceeds the threshold.
    Reject(f64),
    /// Accept any leakage; the value is still reported.
    Allow,
}

impl Default for LeakagePolicy {
    fn default() -> Self {
        LeakagePolicy::Reject(LEAKAGE_THRESHOLD)
    }
}

impl LeakagePolicy {
    /// Applies the policy to a measured leakage.
    pub fn check(self, leakage: f64) -> Result<()> {
        match self {
            LeakagePolicy::Reject(threshold) if leakage > threshold => Err(Error::Leakage { leakage, threshold }),
            _ => Ok(()),
        }
    }
}

/// Fock amplitudes of `S(r)|0⟩` together with the top-level population.
pub fn squeezed_vacuum_amplitudes(r: f64, space: TruncatedSpace, policy: LeakagePolicy) -> Result<(CVector, f64)> {
    let s = squeeze(r, space.n_fock)?;
    let mut v: CVector = s.column(0).into_owned();
    // Parity is exact in theory; clear rounding noise on odd levels.
    for m in (1..v.len()).step_by(2) {
        v[m] = C64::new(0.0, 0.0);
    }
    let leakage = top_population(&v);
    policy.check(leakage)?;
    Ok((v, leakage))
}

/// Squeezed Fock function `φ_{n,r'}(x) = (√2σ')^{−1/2} hₙ(x/(√2σ'))`.
pub fn squeezed_fock_wavefunction(n: usize, r_prime: f64, x: f64) -> f64 {
    let w = SQRT_2 * r_prime.exp();
    hermite_functions(x / w, n + 1)[n] / w.sqrt()
}

/// Jaynes–Cummings pulse `exp[−i(α/√n)(e^{iφ} σ₋ a† + e^{−iφ} σ₊ a)]`.
///
/// Acts on the oscillator ⊗ qubit space with index `2m + q`, where the
/// qubit uses [`EXCITED`] and [`GROUND`]. The pulse is block diagonal over
/// the manifolds `{|e, m−1⟩, |g, m⟩}`, each rotated by `α √(m/n)`.
pub fn jc_pulse_matrix(space: TruncatedSpace, n: usize, alpha: f64, phi: f64) -> Result<CMatrix> {
    if n == 0 {
        return Err(domain("JC pulse index must be at least one"));
    }
    let nf = space.n_fock;
    let mut u = CMatrix::identity(2 * nf, 2 * nf);
    for m in 1..nf {
        let theta = alpha * (m as f64 / n as f64).sqrt();
        let e = 2 * (m - 1) + EXCITED;
        let g = 2 * m + GROUND;
        let (c, s) = (theta.cos(), theta.sin());
        u[(e, e)] = re(c);
        u[(g, g)] = re(c);
        u[(e, g)] = C64::from_polar(s, -phi) * (-I);
        u[(g, e)] = C64::from_polar(s, phi) * (-I);
    }
    Ok(u)
}

/// Single-qubit rotation `exp[−iθ/2 (cos φ X + sin φ Y)]` in the computational basis.
pub fn qubit_rotation(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    [
        [re(c), C64::from_polar(s, -phi) * (-I)],
        [C64::from_polar(s, phi) * (-I), re(c)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    #[test]
    fn vacuum_position_variance_is_one() {
        let x = position(8);
        assert!((x[(0, 1)].re - 1.0).abs() < 1e-15);
        let v = (&x * &x)[(0, 0)].re;
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jc_pulse_is_unitary() {
        let u = jc_pulse_matrix(TruncatedSpace::new(6).unwrap(), 3, 0.7, 0.4).unwrap();
        assert!(unitarity_defect(&u) < 1e-14);
    }

    #[test]
    fn leakage_policy_rejects_wide_squeezing() {
        let space = TruncatedSpace::new(16).unwrap();
        assert!(squeezed_vacuum_amplitudes(2.0, space, LeakagePolicy::default()).is_err());
        assert!(squeezed_vacuum_amplitudes(2.0, space, LeakagePolicy::Allow).is_ok());
    }
}
