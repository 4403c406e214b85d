//! Hermite polynomials and normalized Hermite functions.

use std::f64::consts::PI;

use crate::linalg::C64;

/// Fills `out[n]` with `π^{-1/4} (2ⁿ n!)^{-1/2} Hₙ(y) · e^{log_weight}` for `n < out.len()`.
///
/// With `log_weight = −y²/2` these are the orthonormal Hermite functions
/// `hₙ(y)`. The weight seeds the three-term recurrence
/// `h_{n+1} = √(2/(n+1)) y hₙ − √(n/(n+1)) h_{n−1}`, which keeps every term
/// representable where the raw polynomials would overflow.
pub fn hermite_functions_weighted(y: f64, log_weight: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI.powf(-0.25) * log_weight.exp();
    if out.len() == 1 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * y * out[0];
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * y * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

/// Orthonormal Hermite functions `h₀(y) … h_{len−1}(y)`.
pub fn hermite_functions(y: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    hermite_functions_weighted(y, -0.5 * y * y, &mut out);
    out
}

/// Coefficients of the physicists' Hermite polynomial `Hₙ`, lowest degree first.
pub fn hermite_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (j, &c) in cur.iter().enumerate() {
            next[j + 1] += 2.0 * c;
        }
        for (j, &c) in prev.iter().enumerate() {
            next[j] -= 2.0 * k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `Hₙ(z)` for complex `z` by the recurrence `H_{k+1} = 2z H_k − 2k H_{k−1}`.
pub fn hermite_complex(n: usize, z: C64) -> C64 {
    let mut prev = C64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = z * 2.0;
    for k in 1..n {
        let next = z * cur * 2.0 - prev * (2.0 * k as f64);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln(n!)`, exact summation for the small arguments used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_coefficients_match_known_cases() {
        assert_eq!(hermite_coefficients(3), vec![0.0, -12.0, 0.0, 8.0]);
        assert_eq!(hermite_coefficients(4), vec![12.0, 0.0, -48.0, 0.0, 16.0]);
    }

    #[test]
    fn functions_agree_with_explicit_polynomials() {
        let y = 0.7_f64;
        let h = hermite_functions(y, 5);
        for (n, &hn) in h.iter().enumerate() {
            let poly: f64 = hermite_coefficients(n)
                .iter()
                .enumerate()
                .map(|(j, c)| c * y.powi(j as i32))
                .sum();
            let norm = (2f64.powi(n as i32) * ln_factorial(n).exp()).sqrt() * PI.powf(0.25);
            let expect = poly * (-0.5 * y * y).exp() / norm;
            assert!((hn - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_evaluation_matches_real_axis() {
        let z = C64::new(0.3, 0.0);
        let coeffs = hermite_coefficients(6);
        let poly: f64 = coeffs.iter().enumerate().map(|(j, c)| c * 0.3f64.powi(j as i32)).sum();
        assert!((hermite_complex(6, z).re - poly).abs() < 1e-12);
    }
}
