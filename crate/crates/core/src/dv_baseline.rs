//! Classical discrete-variable quadrature baseline for the same kernel integral.
//!
//! The integral `∫ g(k) e^{−iT(kL+H)} dk u₀` is truncated to `[−K, K]`,
//! split into panels of width `h₁` and evaluated with a `Q`-point
//! Gauss–Legendre rule on each panel.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::hybrid_sim::{exact_propagator, fidelity};
use crate::kernel::eval_kernel;
use crate::linalg::{expm_hermitian, hermitian_eigen, normalized, spectral_norm, CMatrix, CVector, C64};
use crate::parallel::{map_range, map_slice, Exec};
use crate::pauli_heat::GeneratorSpec;
use crate::quadrature::CompositeRule;

/// Closed-form quadrature parameters for one `(ε, η, β, T, ‖L‖₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvQuadratureParams {
    pub eps: f64,
    pub eta: f64,
    pub beta: f64,
    pub t: f64,
    pub l_norm: f64,
    /// Panel width.
    pub h1: f64,
    /// Truncation half-width.
    pub k_max: f64,
    /// Gauss–Legendre order per panel.
    pub q: usize,
    /// Total number of quadrature nodes.
    pub m_dv: usize,
    /// Qubits needed to index the nodes.
    pub m_c: u32,
    pub c_beta: f64,
}

impl DvQuadratureParams {
    /// Number of panels `2⌊K/h₁⌋`.
    pub fn panels(&self) -> usize {
        2 * half_panels(self.k_max, self.h1)
    }
}

/// `⌊K/h₁⌋`, robust to `K` being an integer multiple of `h₁` up to rounding.
fn half_panels(k_max: f64, h1: f64) -> usize {
    (k_max / h1 * (1.0 + 1e-12)).floor() as usize
}

/// Computes `h₁ = 1/(eT‖L‖)`, `K = η⌈ln(1/ε)^{1/β}/h₁⌉h₁`,
/// `Q = ⌈ln(8K/(3C_β ε))/ln 4⌉` with `C_β = 2π e^{−2^β}`.
pub fn dv_params(eps: f64, eta: f64, beta: f64, t: f64, l_norm: f64) -> Result<DvQuadratureParams> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(eta > 0.0 && eta.is_finite()) || !(t > 0.0 && t.is_finite()) || !(l_norm > 0.0 && l_norm.is_finite()) {
        return Err(domain("eta, T and the generator norm must be positive and finite"));
    }
    let h1 = 1.0 / (E * t * l_norm);
    let k_max = eta * ((1.0 / eps).ln().powf(1.0 / beta) / h1).ceil() * h1;
    let c_beta = 2.0 * PI * (-(2f64.powf(beta))).exp();
    let q = ((8.0 * k_max / (3.0 * c_beta * eps)).ln() / 4f64.ln()).ceil().max(1.0) as usize;
    let m_dv = 2 * half_panels(k_max, h1) * q;
    if m_dv == 0 {
        return Err(domain("quadrature has no nodes; increase eta or decrease eps"));
    }
    let m_c = (m_dv as f64).log2().ceil() as u32;
    let params = DvQuadratureParams {
        eps,
        eta,
        beta,
        t,
        l_norm,
        h1,
        k_max,
        q,
        m_dv,
        m_c,
        c_beta,
    };
    debug_assert_eq!(params.m_dv, params.panels() * params.q);
    debug_assert!(1usize << params.m_c >= params.m_dv && (params.m_c == 0 || 1usize << (params.m_c - 1) < params.m_dv));
    Ok(params)
}

/// Output of one quadrature evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvSolution {
    /// Normalized quadrature estimate of `e^{−AT}u₀`.
    pub state: Vec<C64>,
    /// `Σ |wⱼ g(kⱼ)|`.
    pub l1_norm: f64,
    /// Fidelity against the exact normalized solution.
    pub fidelity: f64,
}

/// Evaluates the composite rule with exact exponentials at every node.
pub fn dv_solve(spec: &GeneratorSpec, params: &DvQuadratureParams, u0: &CVector, exec: Exec) -> Result<DvSolution> {
    dv_solve_with_order(spec, params, params.q, u0, exec)
}

/// [`dv_solve`] with the per-panel order overridden.
pub fn dv_solve_with_order(spec: &GeneratorSpec, params: &DvQuadratureParams, order: usize, u0: &CVector, exec: Exec) -> Result<DvSolution> {
    let dim = 1usize << spec.n_qubits();
    if u0.len() != dim {
        return Err(crate::Error::Dimension { expected: dim, got: u0.len() });
    }
    let l = spec.l.matrix()?;
    let h = spec.h.matrix()?;
    let panels = params.panels();
    let lo = -params.k_max;
    let rule = CompositeRule::new(lo, lo + panels as f64 * params.h1, panels, order)?;
    let points: Vec<(f64, f64)> = rule.points().collect();
    let t = params.t;
    let beta = params.beta;
    let terms: Vec<Result<(CVector, f64)>> = if spec.h.is_zero() {
        let (values, vectors) = hermitian_eigen(&l)?;
        let projected = vectors.adjoint() * u0;
        map_slice(exec, &points, |&(k, w)| {
            let c = eval_kernel(k, beta)? * w;
            let phased = CVector::from_iterator(dim, projected.iter().zip(&values).map(|(z, v)| z * C64::from_polar(1.0, -t * k * v)));
            Ok((&vectors * phased * c, c.norm()))
        })
    } else {
        map_range(exec, points.len(), |j| {
            let (k, w) = points[j];
            let c = eval_kernel(k, beta)? * w;
            let gen: CMatrix = &l * C64::new(k, 0.0) + &h;
            Ok((expm_hermitian(&gen, t)? * u0 * c, c.norm()))
        })
    };
    let mut acc = CVector::zeros(dim);
    let mut l1 = 0.0;
    for term in terms {
        let (v, a) = term?;
        acc += v;
        l1 += a;
    }
    let exact = normalized(&(exact_propagator(&spec.a_matrix()?, t)? * u0))?;
    let state = normalized(&acc)?;
    Ok(DvSolution {
        fidelity: fidelity(exact.as_slice(), state.as_slice())?,
        state: state.iter().copied().collect(),
        l1_norm: l1,
    })
}

/// One row of a β scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvScanRow {
    pub params: DvQuadratureParams,
    pub l1_norm: f64,
    pub infidelity: f64,
}

/// Every evaluated β and the best one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvScan {
    pub rows: Vec<DvScanRow>,
    pub best: usize,
}

impl DvScan {
    pub fn best_row(&self) -> &DvScanRow {
        &self.rows[self.best]
    }
}

/// Evaluates each β of `beta_grid` and picks the highest fidelity, preferring
/// the smaller β on ties.
pub fn dv_beta_scan(
    spec: &GeneratorSpec,
    eps: f64,
    eta: f64,
    t: f64,
    u0: &CVector,
    beta_grid: &[f64],
    exec: Exec,
) -> Result<DvScan> {
    if beta_grid.is_empty() {
        return Err(domain("beta grid must be nonempty"));
    }
    let l_norm = spectral_norm(&spec.l.matrix()?);
    let rows = map_slice(exec, beta_grid, |&beta| -> Result<DvScanRow> {
        let params = dv_params(eps, eta, beta, t, l_norm)?;
        let sol = dv_solve(spec, &params, u0, Exec::Sequential)?;
        Ok(DvScanRow {
            params,
            l1_norm: sol.l1_norm,
            infidelity: 1.0 - sol.fidelity,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        let b = &rows[best];
        if row.infidelity < b.infidelity || (row.infidelity == b.infidelity && row.params.beta < b.params.beta) {
            best = i;
        }
    }
    Ok(DvScan { rows, best })
}

/// Default β grid `0.60, 0.65, …, 0.95`.
pub fn default_beta_grid() -> Vec<f64> {
    (0..8).map(|i| 0.60 + 0.05 * i as f64).collect()
}
