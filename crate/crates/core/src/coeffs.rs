//! Squeezed-Fock expansion coefficients of the kernel state.
//!
//! The raw coefficients are
//!
//! ```text
//! C̃ₙ = √(σ/σ') (2ⁿ n!)^{-1/2} ∫ Hₙ(x/(√2σ')) g(x) e^{−γx²} dx
//! ```
//!
//! with `σ = e^r`, `σ' = e^{r'}` and `γ = ¼(e^{−2r'} − e^{−2r})`. The Hermite
//! factor is evaluated through the normalized recurrence seeded with
//! `e^{−γx²}`, so every term stays in range for the cutoffs used here.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernel::{self, KernelParams};
use crate::linalg::{C64, I};
use crate::parallel::Exec;
use crate::quadrature::{integrate_refined, CompositeRule};
use crate::special::{hermite_coefficients, hermite_complex, hermite_functions_weighted, ln_factorial};

/// Cramér's constant: `|Hₙ(y)| e^{−y²/2} ≤ 1.0865 √(2ⁿ n!)`.
const CRAMER: f64 = 1.086_435;

/// Numerical settings for the coefficient integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Half-width of the integration domain; derived from the integrand
    /// envelope when absent.
    pub radius: Option<f64>,
    /// Absolute agreement required between successive panel bisections.
    pub tol: f64,
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Upper limit on the number of panels.
    pub max_panels: usize,
    /// Largest panel width on the first pass.
    pub initial_width: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            radius: None,
            tol: 1e-12,
            order: 40,
            max_panels: 1 << 18,
            initial_width: 2.0,
        }
    }
}

/// Raw and normalized kernel-state coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    /// Parameters the set was computed for.
    pub params: KernelParams,
    /// Gaussian damping `γ`.
    pub gamma: f64,
    /// `C̃₀ … C̃_{N−1}`.
    pub raw: Vec<C64>,
    /// `Cₙ = C̃ₙ / ‖C̃‖₂`.
    pub normalized: Vec<C64>,
    /// Integration half-width used.
    pub radius: f64,
    /// Panels in the accepted quadrature pass.
    pub panels: usize,
}

impl CoefficientSet {
    /// Builds a set from raw values, attaching the normalized copy.
    pub fn from_raw(params: KernelParams, raw: Vec<C64>, radius: f64, panels: usize) -> Result<Self> {
        let normalized = normalize(&raw)?;
        Ok(Self {
            gamma: params.gamma(),
            params,
            raw,
            normalized,
            radius,
            panels,
        })
    }

    /// Euclidean norm of the raw coefficients.
    pub fn raw_norm(&self) -> f64 {
        self.raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn normalize(raw: &[C64]) -> Result<Vec<C64>> {
    let n = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Numerical(format!("coefficient norm {n} cannot be normalized")));
    }
    Ok(raw.iter().map(|c| c / n).collect())
}

/// Upper bound on `ln |C̃ₙ integrand|` at `x`, maximized over `n < n_max`.
fn log_integrand_bound(x: f64, p: &KernelParams, n_max: usize) -> f64 {
    let sigma_p = p.sigma_prime();
    let y = x.abs() / (SQRT_2 * sigma_p);
    let g = p.gamma();
    let prefactor = 0.5 * (p.r - p.r_prime);
    let env = kernel::envelope(x, p.beta).ln();
    let cramer = CRAMER.ln() + x * x * (-2.0 * p.r).exp() / 4.0;
    let poly = (0..n_max)
        .map(|n| {
            let nf = n as f64;
            let shift = (2.0 * nf + 1.0).sqrt();
            0.5 * nf * 2f64.ln() + nf * (y + shift).ln() - 0.5 * ln_factorial(n)
        })
        .fold(f64::NEG_INFINITY, f64::max)
        - g * x * x;
    prefactor + env + cramer.min(poly)
}

/// Integration half-width beyond which the coefficient integrands are below `tol`.
///
/// The bound combines the kernel envelope with Cramér's inequality and with
/// the root bound `|Hₙ(y)| ≤ 2ⁿ(|y| + √(2n+1))ⁿ`.
pub fn coefficient_radius(p: &KernelParams, n_max: usize, tol: f64) -> f64 {
    let target = (tol / 10.0).ln();
    let ok = |x: f64| log_integrand_bound(x, p, n_max) + (4.0 * x).ln() < target;
    let mut x = 4.0;
    loop {
        if ok(x) && ok(2.0 * x) && ok(4.0 * x) && ok(16.0 * x) {
            return x;
        }
        x *= 1.1;
        if x > 1e12 {
            return x;
        }
    }
}

/// Quadrature evaluation of `C̃₀ … C̃_{N−1}`.
pub fn compute_raw_coefficients(params: &KernelParams, cfg: &QuadratureConfig, exec: Exec) -> Result<CoefficientSet> {
    let g = params.gamma();
    if !(g > 0.0) {
        return Err(domain(format!("Gaussian damping must be positive, got {g}")));
    }
    let n = params.n_trunc;
    let radius = cfg.radius.unwrap_or_else(|| coefficient_radius(params, n, cfg.tol));
    let scale = 1.0 / (SQRT_2 * params.sigma_prime());
    let prefactor = (0.5 * (params.r - params.r_prime)).exp() * PI.powf(0.25);
    let beta = params.beta;
    let panels = ((2.0 * radius / cfg.initial_width).ceil() as usize).max(8);
    let start = CompositeRule::new(-radius, radius, panels, cfg.order)?;
    let (raw, used) = integrate_refined(start, cfg.tol, cfg.max_panels, exec, n, |x, w, acc| {
        let mut h = vec![0.0; acc.len()];
        hermite_functions_weighted(x * scale, -g * x * x, &mut h);
        let gk = kernel::kernel_value(x, beta) * (w * prefactor);
        for (a, hn) in acc.iter_mut().zip(&h) {
            *a += gk * *hn;
        }
    })?;
    CoefficientSet::from_raw(*params, raw, radius, used)
}

/// The limiting kernel exponents with closed-form coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaLimit {
    /// `β = 0`: `g(k) = 1/(2π(1 − ik))`.
    Zero,
    /// `β = 1`: `g(k) = e^{1−ik}/(2π(1 − ik))`.
    One,
}

impl BetaLimit {
    /// The numeric exponent.
    pub fn beta(self) -> f64 {
        match self {
            BetaLimit::Zero => 0.0,
            BetaLimit::One => 1.0,
        }
    }
}

/// `∫ xʲ e^{−γx² − ibx} dx` for `j = 0 … max`, by completing the square.
fn shifted_gaussian_moments(gamma: f64, b: f64, max: usize) -> Vec<C64> {
    // Central moments m_k = Γ((k+1)/2) γ^{−(k+1)/2} for even k.
    let central: Vec<f64> = (0..=max)
        .map(|k| {
            if k % 2 == 1 {
                0.0
            } else {
                let half = (k as f64 + 1.0) / 2.0;
                (ln_gamma_half_integer(k) - half * gamma.ln()).exp()
            }
        })
        .collect();
    let shift = C64::new(0.0, -b / (2.0 * gamma));
    let damp = (-b * b / (4.0 * gamma)).exp();
    (0..=max)
        .map(|j| {
            let mut s = C64::new(0.0, 0.0);
            let mut binom = 1.0;
            for (k, &mk) in central.iter().enumerate().take(j + 1) {
                if k > 0 {
                    binom *= (j - k + 1) as f64 / k as f64;
                }
                if k % 2 == 0 {
                    s += shift.powu((j - k) as u32) * (binom * mk);
                }
            }
            s * damp
        })
        .collect()
}

/// `ln Γ((k+1)/2)` for even `k`, i.e. of a half-integer.
fn ln_gamma_half_integer(k: usize) -> f64 {
    // Γ(m + ½) = √π (2m)! / (4^m m!)
    let m = k / 2;
    0.5 * PI.ln() + ln_factorial(2 * m) - (m as f64) * 4f64.ln() - ln_factorial(m)
}

/// Closed-form `C̃ₙ` for the limiting exponents.
///
/// Writes `Hₙ(x/(√2σ')) = Hₙ(z₀) + (x + i) Q_{n−1}(x)` with `z₀ = −i/(√2σ')`.
/// The pole term integrates to an `erfc` boundary term and the quotient
/// polynomial reduces to shifted Gaussian moments.
pub fn analytic_coefficients_limit(n: usize, sigma: f64, sigma_prime: f64, limit: BetaLimit) -> Result<C64> {
    if !(sigma > 0.0 && sigma_prime > 0.0) {
        return Err(domain("squeezing widths must be positive"));
    }
    let gamma = 0.25 * (sigma_prime.powi(-2) - sigma.powi(-2));
    if !(gamma > 0.0) {
        return Err(domain(format!("Gaussian damping must be positive, got {gamma}")));
    }
    let s = 1.0 / (SQRT_2 * sigma_prime);
    let z0 = C64::new(0.0, -s);
    let hz0 = hermite_complex(n, z0);

    // Coefficients of p(x) = Hₙ(s x), lowest degree first.
    let poly: Vec<C64> = hermite_coefficients(n)
        .iter()
        .enumerate()
        .map(|(k, c)| C64::new(c * s.powi(k as i32), 0.0))
        .collect();
    // Synthetic division by (x + i): p(x) = p(−i) + (x + i) q(x).
    let mut quotient = vec![C64::new(0.0, 0.0); n];
    let mut carry = C64::new(0.0, 0.0);
    for k in (1..=n).rev() {
        carry = poly[k] + carry * (-I);
        quotient[k - 1] = carry;
    }

    let root = gamma.sqrt();
    let (b, boundary_arg, pref) = match limit {
        BetaLimit::Zero => (0.0, root, I / (2.0 * PI)),
        BetaLimit::One => (1.0, root - 0.5 / root, I * (1f64.exp() / (2.0 * PI))),
    };
    let boundary = hz0 * (0.5 * gamma.exp() * libm::erfc(boundary_arg));
    let moments = shifted_gaussian_moments(gamma, b, n.max(1));
    let residual: C64 = quotient.iter().zip(&moments).map(|(q, m)| q * m).sum::<C64>() * pref;

    let kn = (0.5 * (sigma / sigma_prime).ln() - 0.5 * (n as f64 * 2f64.ln() + ln_factorial(n))).exp();
    Ok((boundary + residual) * kn)
}

/// Overlaps `⟨φ_{n,r'}|g⟩` for `n < n_max` and the squared norm `∫|g|²`.
fn kernel_state_overlaps(params: &KernelParams, n_max: usize, cfg: &QuadratureConfig, exec: Exec) -> Result<(Vec<C64>, f64)> {
    let beta = params.beta;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain("truncation error requires 0 < beta < 1"));
    }
    let sigma_p = params.sigma_prime();
    let kernel_radius = cfg
        .radius
        .unwrap_or(kernel::truncation_radius(beta, cfg.tol * 1e-2)?);
    let hermite_radius = SQRT_2 * sigma_p * ((2.0 * n_max as f64 + 1.0).sqrt() + 12.0);
    let radius = kernel_radius.min(hermite_radius);

    let norm_rule = CompositeRule::graded_symmetric(kernel_radius, 8.0, 0.25, 1.1, cfg.order)?;
    let (norm, _) = integrate_refined(norm_rule, cfg.tol, cfg.max_panels, exec, 1, |x, w, acc| {
        acc[0] += kernel::kernel_value(x, beta).norm_sqr() * w;
    })?;

    let scale = 1.0 / (SQRT_2 * sigma_p);
    let amp = (SQRT_2 * sigma_p).powf(-0.5);
    let h0 = (0.25 * sigma_p).clamp(0.05, 1.0);
    let rule = CompositeRule::graded_symmetric(radius, 8.0_f64.max(4.0 * sigma_p), h0, 1.05, cfg.order)?;
    let (overlaps, _) = integrate_refined(rule, cfg.tol, cfg.max_panels, exec, n_max, |x, w, acc| {
        let y = x * scale;
        let mut h = vec![0.0; acc.len()];
        hermite_functions_weighted(y, -0.5 * y * y, &mut h);
        let gk = kernel::kernel_value(x, beta) * (w * amp);
        for (a, hn) in acc.iter_mut().zip(&h) {
            *a += gk * *hn;
        }
    })?;
    Ok((overlaps, norm[0].re))
}

/// Projection error `‖ψ∞ − Π_{N} ψ∞‖₂` of the normalized kernel state onto the
/// first `n_eval` squeezed-Fock functions.
pub fn truncation_error(params: &KernelParams, n_eval: usize, cfg: &QuadratureConfig, exec: Exec) -> Result<f64> {
    Ok(truncation_errors(params, &[n_eval], cfg, exec)?[0])
}

/// [`truncation_error`] for several cutoffs from one set of overlaps.
pub fn truncation_errors(params: &KernelParams, n_evals: &[usize], cfg: &QuadratureConfig, exec: Exec) -> Result<Vec<f64>> {
    if n_evals.contains(&0) {
        return Err(domain("cutoff must be at least one"));
    }
    let n_max = n_evals.iter().copied().max().unwrap_or(1);
    let (overlaps, norm) = kernel_state_overlaps(params, n_max, cfg, exec)?;
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::NonConvergence {
            what: "kernel normalization".into(),
            change: norm,
            tol: cfg.tol,
        });
    }
    Ok(n_evals
        .iter()
        .map(|&n| {
            let captured: f64 = overlaps[..n].iter().map(|c| c.norm_sqr()).sum::<f64>() / norm;
            (1.0 - captured).max(0.0).sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_reduce_to_gaussian_integrals() {
        let m = shifted_gaussian_moments(0.5, 0.0, 4);
        assert!((m[0].re - (2.0 * PI).sqrt()).abs() < 1e-14);
        assert!(m[1].norm() < 1e-15);
        assert!((m[2].re - (2.0 * PI).sqrt()).abs() < 1e-14);
        assert!((m[4].re - 3.0 * (2.0 * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn shifted_moment_matches_fourier_transform() {
        // ∫ e^{−γx² − ibx} dx = √(π/γ) e^{−b²/(4γ)}
        let m = shifted_gaussian_moments(0.3, 1.0, 0);
        let expect = (PI / 0.3).sqrt() * (-1.0f64 / 1.2).exp();
        assert!((m[0].re - expect).abs() < 1e-14 && m[0].im.abs() < 1e-15);
    }

    #[test]
    fn radius_grows_with_preparation_squeezing() {
        let a = KernelParams::new(0.5, 2.0, 0.5, 8).unwrap();
        let b = KernelParams::new(0.5, 8.0, 4.0, 8).unwrap();
        assert!(coefficient_radius(&b, 8, 1e-12) > coefficient_radius(&a, 8, 1e-12));
    }
}
