//! The near-optimal LCHS kernel, its decay envelope and the mollified time window.
//!
//! The kernel is
//!
//! ```text
//! g(k) = e^{2^β} / (2π (1 − ik) e^{(1+ik)^β})
//! ```
//!
//! with the principal branch of `(1+ik)^β`. Its integral over the real line is
//! one, which is what makes `∫ g(k) e^{−it(kL+H)} dk` reproduce `e^{−At}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::C64;
use crate::quadrature::CompositeRule;

/// Kernel shape and squeezed-Fock truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Kernel exponent, strictly inside `(0, 1)`.
    pub beta: f64,
    /// Postselection squeezing.
    pub r: f64,
    /// Preparation-basis squeezing, smaller than `r`.
    pub r_prime: f64,
    /// Number of squeezed-Fock coefficients kept.
    pub n_trunc: usize,
}

impl KernelParams {
    /// Validated constructor for `0 < β < 1`.
    pub fn new(beta: f64, r: f64, r_prime: f64, n_trunc: usize) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(domain(format!("beta must lie in (0, 1), got {beta}")));
        }
        Self::with_limit_beta(beta, r, r_prime, n_trunc)
    }

    /// Constructor that also admits the limiting exponents `β ∈ {0, 1}`.
    pub fn with_limit_beta(beta: f64, r: f64, r_prime: f64, n_trunc: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(domain(format!("beta must lie in [0, 1], got {beta}")));
        }
        if !(r.is_finite() && r_prime.is_finite() && r >= 0.0 && r_prime >= 0.0) {
            return Err(domain("squeezing parameters must be finite and non-negative"));
        }
        if !(r_prime < r) {
            return Err(domain(format!("need r' < r, got r' = {r_prime}, r = {r}")));
        }
        if n_trunc == 0 {
            return Err(domain("truncation must keep at least one coefficient"));
        }
        Ok(Self {
            beta,
            r,
            r_prime,
            n_trunc,
        })
    }

    /// Postselection width `σ = e^r`.
    pub fn sigma(&self) -> f64 {
        self.r.exp()
    }

    /// Preparation width `σ' = e^{r'}`.
    pub fn sigma_prime(&self) -> f64 {
        self.r_prime.exp()
    }

    /// Gaussian damping `γ = ¼(e^{−2r'} − e^{−2r})`.
    pub fn gamma(&self) -> f64 {
        gamma(self.r, self.r_prime)
    }
}

/// `γ = ¼(e^{−2r'} − e^{−2r})`, written to avoid cancellation when `r' ≈ r`.
pub fn gamma(r: f64, r_prime: f64) -> f64 {
    0.25 * (-2.0 * r_prime).exp() * (-(-2.0 * (r - r_prime)).exp_m1())
}

fn check_beta_closed(beta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(domain(format!("beta must lie in [0, 1], got {beta}")))
    }
}

fn check_beta_open(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("beta must lie in (0, 1), got {beta}")))
    }
}

/// Principal branch `(1 + ik)^β` through the polar form.
fn one_plus_ik_pow(k: f64, beta: f64) -> C64 {
    let modulus = (1.0 + k * k).powf(0.5 * beta);
    C64::from_polar(modulus, beta * k.atan())
}

/// `g(k)` without argument checks.
///
/// The two exponentials are combined before evaluation, since each alone
/// overflows for large `|k|` when `β` is close to one.
pub(crate) fn kernel_value(k: f64, beta: f64) -> C64 {
    let w = one_plus_ik_pow(k, beta);
    let num = (C64::new(2f64.powf(beta), 0.0) - w).exp();
    num / (C64::new(2.0 * PI, -2.0 * PI * k))
}

/// Evaluates the kernel `g(k)`; `β ∈ {0, 1}` is accepted for the limiting forms.
pub fn eval_kernel(k: f64, beta: f64) -> Result<C64> {
    check_beta_closed(beta)?;
    if !k.is_finite() {
        return Err(domain("kernel argument must be finite"));
    }
    Ok(kernel_value(k, beta))
}

/// Pointwise envelope `e^{2^β}/(2π√(1+k²)) · exp(−cos(βπ/2)(1+k²)^{β/2})`.
pub(crate) fn envelope(k: f64, beta: f64) -> f64 {
    let s = 1.0 + k * k;
    let c = (0.5 * beta * PI).cos();
    (2f64.powf(beta) - c * s.powf(0.5 * beta)).exp() / (2.0 * PI * s.sqrt())
}

/// Upper bound on `|g(k)|` for `0 < β < 1`.
pub fn tail_bound(k: f64, beta: f64) -> Result<f64> {
    check_beta_open(beta)?;
    Ok(envelope(k, beta))
}

/// Bound on `∫_{|k|>x} |g(k)| dk`.
///
/// Uses `√(1+k²) ≥ k`, `(1+k²)^{β/2} ≥ k^β` and the substitution `u = c k^β`,
/// which turns the tail into an exponential integral `E₁(c x^β)` bounded by
/// `e^{−u}/u`.
pub fn tail_integral_bound(x: f64, beta: f64) -> Result<f64> {
    check_beta_open(beta)?;
    if !(x > 0.0) {
        return Err(domain("tail radius must be positive"));
    }
    let c = (0.5 * beta * PI).cos();
    let u = c * x.powf(beta);
    Ok(2.0 * 2f64.powf(beta).exp() / (2.0 * PI * beta) * (-u).exp() / u)
}

/// Smallest radius `X` (to within a factor `1.05`) whose tail bound is below `tol`.
pub fn truncation_radius(beta: f64, tol: f64) -> Result<f64> {
    check_beta_open(beta)?;
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let mut x = 1.0;
    while tail_integral_bound(x, beta)? > tol {
        x *= 1.05;
        if x > 1e15 {
            return Err(domain("tail bound does not reach the tolerance"));
        }
    }
    Ok(x)
}

/// `∫ g(k) dk` over `[−X, X]`, with `X` chosen so the neglected tail is below `tol/10`.
///
/// Returns the integral together with the radius used. The exact value over
/// the whole line is one.
pub fn kernel_integral(beta: f64, tol: f64) -> Result<(C64, f64)> {
    let x = truncation_radius(beta, tol / 10.0)?;
    let rule = CompositeRule::graded_half(x, 8.0, 0.25, 1.15, 40)?;
    // g(−k) = conj(g(k)), so the integral over the symmetric interval is real.
    let half = rule.integrate(|k| kernel_value(k, beta).re);
    Ok((C64::new(2.0 * half, 0.0), x))
}

/// Gaussian-mollified indicator `½[erf(τ/ρ) − erf((τ−t)/ρ)]` of `[0, t]`.
pub fn mollified_window(tau: f64, t: f64, rho: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("window length must be positive, got {t}")));
    }
    if !(rho > 0.0) {
        return Err(domain(format!("mollification width must be positive, got {rho}")));
    }
    Ok(0.5 * (libm::erf(tau / rho) - libm::erf((tau - t) / rho)))
}

/// `L¹` bound `2ρ/√π` on the distance between the window and the indicator.
pub fn mollified_window_l1_bound(rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(domain(format!("mollification width must be positive, got {rho}")));
    }
    Ok(2.0 * rho / PI.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_direct_formula() {
        let direct = 0.25 * ((-2.0f64 * 1.2f64.ln()).exp() - (-2.0f64 * 2f64.ln()).exp());
        assert!((gamma(2f64.ln(), 1.2f64.ln()) - direct).abs() < 1e-16);
    }

    #[test]
    fn kernel_is_finite_far_out_for_beta_near_one() {
        let g = kernel_value(1e6, 0.99);
        assert!(g.re.is_finite() && g.im.is_finite());
    }

    #[test]
    fn limiting_kernels_have_simple_forms() {
        let k = 0.37;
        let g0 = kernel_value(k, 0.0);
        let expect0 = C64::new(1.0, 0.0) / C64::new(2.0 * PI, -2.0 * PI * k);
        assert!((g0 - expect0).norm() < 1e-15);
        let g1 = kernel_value(k, 1.0);
        let expect1 = C64::from_polar(1f64.exp(), -k) / C64::new(2.0 * PI, -2.0 * PI * k);
        assert!((g1 - expect1).norm() < 1e-15);
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(KernelParams::new(1.0, 2.0, 1.0, 4).is_err());
        assert!(KernelParams::new(0.5, 1.0, 2.0, 4).is_err());
        assert!(KernelParams::new(0.5, 2.0, 1.0, 0).is_err());
        assert!(KernelParams::new(0.5, 2.0, 1.0, 4).unwrap().gamma() > 0.0);
    }
}
