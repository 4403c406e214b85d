//! Non-Gaussianity diagnostics and postselection-probability analysis.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{spectral_norm, CMatrix, CVector, C64};
use crate::parallel::{map_range, Exec};

/// Default relative threshold below which a coefficient counts as zero.
pub const STELLAR_TOL: f64 = 1e-10;

const NORM_TOL: f64 = 1e-8;
const NU_CLAMP: f64 = 1e-12;

fn check_unit(c: &[C64]) -> Result<()> {
    let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::Normalization { norm: n });
    }
    Ok(())
}

/// Highest Fock index whose coefficient exceeds `tol · max|Cₙ|`.
///
/// For a finite superposition this is the number of zeros of the stellar
/// function, so a vacuum has rank zero.
pub fn stellar_rank(c: &[C64], tol: f64) -> Result<usize> {
    check_unit(c)?;
    if !(0.0..1.0).contains(&tol) {
        return Err(domain(format!("relative tolerance must lie in [0, 1), got {tol}")));
    }
    let peak = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    c.iter()
        .rposition(|z| z.norm() > tol * peak)
        .ok_or_else(|| domain("every coefficient is below the tolerance"))
}

/// Moments and relative-entropy non-Gaussianity of `Σ Cₙ|n⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonGaussReport {
    pub stellar_rank: usize,
    /// `⟨a⟩`.
    pub alpha_moment: C64,
    /// `⟨a†a⟩`.
    pub nbar: f64,
    /// `⟨a²⟩`.
    pub m_moment: C64,
    /// `n̄ − |α|²`.
    pub n_c: f64,
    /// `m − α²`.
    pub m_c: C64,
    /// Symplectic eigenvalue of the covariance matrix.
    pub nu: f64,
    /// Entropy of the Gaussian reference state, equal to the relative
    /// entropy to it for a pure state.
    pub delta_ng: f64,
}

/// Builds the Gaussian reference from the first and second moments.
pub fn qre_nongaussianity(c: &[C64]) -> Result<NonGaussReport> {
    check_unit(c)?;
    let sqrt = |n: usize| (n as f64).sqrt();
    let alpha: C64 = (1..c.len()).map(|n| c[n - 1].conj() * c[n] * sqrt(n)).sum();
    let nbar: f64 = c.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum();
    let m: C64 = (2..c.len()).map(|n| c[n - 2].conj() * c[n] * sqrt(n * (n - 1))).sum();
    let n_c = nbar - alpha.norm_sqr();
    let m_c = m - alpha * alpha;
    let disc = (n_c + 0.5).powi(2) - m_c.norm_sqr();
    let mut nu = disc.max(0.0).sqrt();
    if nu < 0.5 {
        if 0.5 - nu > NU_CLAMP {
            return Err(Error::Numerical(format!("symplectic eigenvalue {nu} is below one half")));
        }
        nu = 0.5;
    }
    let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    Ok(NonGaussReport {
        stellar_rank: stellar_rank(c, STELLAR_TOL)?,
        alpha_moment: alpha,
        nbar,
        m_moment: m,
        n_c,
        m_c,
        nu,
        delta_ng: (xlogx(nu + 0.5) - xlogx(nu - 0.5)).max(0.0),
    })
}

/// A postselected register operator and its label.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleVariant {
    pub label: String,
    pub operator: CMatrix,
}

/// Success probability of one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub label: String,
    pub success_probability: f64,
    pub operator_norm: f64,
}

/// Perturbation-bound check for one ordered pair; `reference` supplies `‖K‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub reference: usize,
    pub other: usize,
    /// `‖K_ref − K_other‖₂`.
    pub gap: f64,
    /// `|p_ref − p_other|`.
    pub probability_difference: f64,
    /// `2‖K_ref‖ε + ε²`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostselectionReport {
    pub variants: Vec<VariantSummary>,
    pub pairs: Vec<PairCheck>,
    pub all_hold: bool,
}

/// Slack for rounding in the bound comparison.
const BOUND_SLACK: f64 = 1e-14;

/// Success probabilities `‖K u₀‖²` and, for every pair `i < j`, the bound
/// `|pᵢ − pⱼ| ≤ 2‖Kᵢ‖ε + ε²` with `ε = ‖Kᵢ − Kⱼ‖₂`.
pub fn postselection_analysis(variants: &[OracleVariant], u0: &CVector, exec: Exec) -> Result<PostselectionReport> {
    if variants.is_empty() {
        return Err(domain("need at least one oracle variant"));
    }
    check_unit(u0.as_slice())?;
    for v in variants {
        if v.operator.ncols() != u0.len() || v.operator.nrows() != u0.len() {
            return Err(Error::Dimension {
                expected: u0.len(),
                got: v.operator.ncols(),
            });
        }
    }
    let summaries: Vec<VariantSummary> = map_range(exec, variants.len(), |i| {
        let v = &variants[i];
        VariantSummary {
            label: v.label.clone(),
            success_probability: (&v.operator * u0).norm_squared(),
            operator_norm: spectral_norm(&v.operator),
        }
    });
    let index: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|i| (i + 1..variants.len()).map(move |j| (i, j)))
        .collect();
    let pairs: Vec<PairCheck> = map_range(exec, index.len(), |k| {
        let (i, j) = index[k];
        let gap = spectral_norm(&(&variants[i].operator - &variants[j].operator));
        let diff = (summaries[i].success_probability - summaries[j].success_probability).abs();
        let bound = 2.0 * summaries[i].operator_norm * gap + gap * gap;
        PairCheck {
            reference: i,
            other: j,
            gap,
            probability_difference: diff,
            bound,
            holds: diff <= bound + BOUND_SLACK,
        }
    });
    Ok(PostselectionReport {
        all_hold: pairs.iter().all(|p| p.holds),
        variants: summaries,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn vacuum_is_gaussian() {
        let r = qre_nongaussianity(&[re(1.0), re(0.0)]).unwrap();
        assert_eq!(r.stellar_rank, 0);
        assert!((r.nu - 0.5).abs() < 1e-15 && r.delta_ng.abs() < 1e-15);
    }

    #[test]
    fn rank_of_sparse_state() {
        assert_eq!(stellar_rank(&[re(0.6), re(0.0), re(0.8)], STELLAR_TOL).unwrap(), 2);
    }
}
