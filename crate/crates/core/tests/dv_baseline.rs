use hybrid_lchs::dv_baseline::{default_beta_grid, dv_beta_scan, dv_params, dv_solve, dv_solve_with_order};
use hybrid_lchs::hybrid_sim::fidelity;
use hybrid_lchs::kernel::eval_kernel;
use hybrid_lchs::linalg::{basis, expm_hermitian, normalized, spectral_norm, CMatrix, CVector, C64};
use hybrid_lchs::pauli_heat::{heat_generator, Boundary};
use hybrid_lchs::Exec;
use proptest::prelude::*;
use std::f64::consts::PI;

fn u0() -> CVector {
    basis(4, 1)
}

#[test]
fn parameter_rows() {
    // (bc, ‖L‖₂, β, h1, K, Q, M_DV, m_c)
    let rows = [
        (Boundary::Dirichlet, 2.0 - 2.0 * (4.0 * PI / 5.0).cos(), 0.60, 0.10168, 4.06718, 4, 320, 9),
        (Boundary::Neumann, 2.0 + 2f64.sqrt(), 0.90, 0.10775, 2.58599, 4, 192, 8),
        (Boundary::Periodic, 4.0, 0.80, 0.09197, 2.85107, 4, 248, 8),
    ];
    for (bc, norm, beta, h1, k, q, m_dv, m_c) in rows {
        let spec = heat_generator(bc, 2, 1.0, 1.0).unwrap();
        let measured = spectral_norm(&spec.l.matrix().unwrap());
        assert!((measured - norm).abs() < 1e-12, "{bc}: {measured}");
        let p = dv_params(0.1, 1.0, beta, 1.0, norm).unwrap();
        assert!((p.h1 - h1).abs() < 5e-6, "{bc}: {}", p.h1);
        assert!((p.k_max - k).abs() < 5e-6, "{bc}: {}", p.k_max);
        assert_eq!((p.q, p.m_dv, p.m_c), (q, m_dv, m_c), "{bc}");
    }
}

#[test]
fn parameter_formulas_by_hand() {
    let (eps, eta, beta, t, norm) = (0.02, 1.5, 0.7, 2.0, 3.0);
    let p = dv_params(eps, eta, beta, t, norm).unwrap();
    let h1 = 1.0 / (std::f64::consts::E * t * norm);
    let k = eta * ((1.0 / eps).ln().powf(1.0 / beta) / h1).ceil() * h1;
    let c_beta = 2.0 * PI * (-(2f64.powf(beta))).exp();
    let q = ((8.0 * k / (3.0 * c_beta * eps)).ln() / 4f64.ln()).ceil() as usize;
    assert!((p.h1 - h1).abs() < 1e-15 && (p.k_max - k).abs() < 1e-12);
    assert_eq!(p.q, q);
    assert_eq!(p.m_dv, 2 * (k / h1 + 1e-9).floor() as usize * q);
    assert_eq!(p.m_c, (p.m_dv as f64).log2().ceil() as u32);
}

#[test]
fn parameter_domains() {
    assert!(dv_params(0.0, 1.0, 0.5, 1.0, 1.0).is_err());
    assert!(dv_params(0.1, 1.0, 0.0, 1.0, 1.0).is_err());
    assert!(dv_params(0.1, 0.0, 0.5, 1.0, 1.0).is_err());
    assert!(dv_params(0.1, 1.0, 0.5, 1.0, -1.0).is_err());
}

#[test]
fn table_rows_of_the_solver() {
    // (bc, β, infidelity, tolerance, ‖c‖₁)
    let rows = [
        (Boundary::Dirichlet, 0.60, 2.33e-3, 5e-4, Some(0.9357)),
        (Boundary::Periodic, 0.80, 2.78e-4, 1e-4, None),
    ];
    for (bc, beta, infid, tol, l1) in rows {
        let spec = heat_generator(bc, 2, 1.0, 1.0).unwrap();
        let norm = spectral_norm(&spec.l.matrix().unwrap());
        let p = dv_params(0.1, 1.0, beta, 1.0, norm).unwrap();
        let sol = dv_solve(&spec, &p, &u0(), Exec::default()).unwrap();
        assert!((1.0 - sol.fidelity - infid).abs() < tol, "{bc}: {}", 1.0 - sol.fidelity);
        if let Some(l1) = l1 {
            assert!((sol.l1_norm - l1).abs() < 1e-2, "{bc}: {}", sol.l1_norm);
        }
    }
}

/// Midpoint sum of the same truncated integral on a fine grid.
fn midpoint_oracle(l: &CMatrix, beta: f64, t: f64, lo: f64, hi: f64, n: usize) -> CVector {
    let h = (hi - lo) / n as f64;
    let mut acc = CVector::zeros(4);
    for i in 0..n {
        let k = lo + (i as f64 + 0.5) * h;
        let g = eval_kernel(k, beta).unwrap() * h;
        acc += expm_hermitian(&(l * C64::new(k, 0.0)), t).unwrap() * u0() * g;
    }
    acc
}

#[test]
fn composite_rule_matches_fine_midpoint_sum() {
    let spec = heat_generator(Boundary::Neumann, 2, 1.0, 1.0).unwrap();
    let l = spec.l.matrix().unwrap();
    let norm = spectral_norm(&l);
    let p = dv_params(0.1, 1.0, 0.9, 1.0, norm).unwrap();
    let sol = dv_solve_with_order(&spec, &p, 10, &u0(), Exec::default()).unwrap();
    let lo = -p.k_max;
    let hi = lo + p.panels() as f64 * p.h1;
    let oracle = midpoint_oracle(&l, p.beta, p.t, lo, hi, 20_000);
    let f = fidelity(normalized(&oracle).unwrap().as_slice(), &sol.state).unwrap();
    assert!(1.0 - f < 1e-9, "{}", 1.0 - f);
}

#[test]
fn zero_time_returns_the_initial_state() {
    let spec = heat_generator(Boundary::Dirichlet, 2, 1.0, 1.0).unwrap();
    let mut p = dv_params(0.1, 1.0, 0.6, 1.0, 3.618).unwrap();
    p.t = 0.0;
    let sol = dv_solve(&spec, &p, &u0(), Exec::default()).unwrap();
    assert!((sol.fidelity - 1.0).abs() < 1e-12);
    assert!((fidelity(u0().as_slice(), &sol.state).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn doubling_the_order_saturates() {
    for (bc, beta) in [(Boundary::Dirichlet, 0.60), (Boundary::Neumann, 0.90), (Boundary::Periodic, 0.80)] {
        let spec = heat_generator(bc, 2, 1.0, 1.0).unwrap();
        let norm = spectral_norm(&spec.l.matrix().unwrap());
        let p = dv_params(0.1, 1.0, beta, 1.0, norm).unwrap();
        let a = dv_solve(&spec, &p, &u0(), Exec::default()).unwrap();
        let b = dv_solve_with_order(&spec, &p, 2 * p.q, &u0(), Exec::default()).unwrap();
        assert!((a.fidelity - b.fidelity).abs() < 1e-6, "{bc}");
    }
}

#[test]
fn fidelity_improves_as_tolerance_shrinks() {
    let spec = heat_generator(Boundary::Dirichlet, 2, 1.0, 1.0).unwrap();
    let norm = spectral_norm(&spec.l.matrix().unwrap());
    let mut last = 0.0;
    for eps in [0.2, 0.1, 0.05, 0.01, 1e-3] {
        let p = dv_params(eps, 1.0, 0.6, 1.0, norm).unwrap();
        let f = dv_solve(&spec, &p, &u0(), Exec::default()).unwrap().fidelity;
        assert!(f >= last - 1e-12, "eps={eps}: {f} < {last}");
        last = f;
    }
}

#[test]
fn beta_scan_picks_table_values() {
    for (bc, expected) in [(Boundary::Dirichlet, 0.60), (Boundary::Neumann, 0.90)] {
        let spec = heat_generator(bc, 2, 1.0, 1.0).unwrap();
        let scan = dv_beta_scan(&spec, 0.1, 1.0, 1.0, &u0(), &default_beta_grid(), Exec::default()).unwrap();
        assert_eq!(scan.rows.len(), 8);
        assert!((scan.best_row().params.beta - expected).abs() < 1e-12, "{bc}");
        let best = scan.best_row().infidelity;
        assert!(scan.rows.iter().all(|r| r.infidelity >= best));
    }
}

#[test]
fn single_point_and_empty_grids() {
    let spec = heat_generator(Boundary::Periodic, 2, 1.0, 1.0).unwrap();
    let scan = dv_beta_scan(&spec, 0.1, 1.0, 1.0, &u0(), &[0.75], Exec::default()).unwrap();
    assert_eq!(scan.best, 0);
    assert_eq!(scan.best_row().params.beta, 0.75);
    assert!(dv_beta_scan(&spec, 0.1, 1.0, 1.0, &u0(), &[], Exec::default()).is_err());
}

#[test]
fn ties_go_to_the_smaller_beta() {
    let spec = heat_generator(Boundary::Periodic, 2, 1.0, 1.0).unwrap();
    let scan = dv_beta_scan(&spec, 0.1, 1.0, 1.0, &u0(), &[0.7, 0.7, 0.7], Exec::default()).unwrap();
    assert_eq!(scan.rows[0], scan.rows[2]);
    assert_eq!(scan.best, 0);
}

#[test]
fn sequential_and_parallel_scans_agree() {
    let spec = heat_generator(Boundary::Neumann, 2, 1.0, 1.0).unwrap();
    let grid = default_beta_grid();
    let a = dv_beta_scan(&spec, 0.1, 1.0, 1.0, &u0(), &grid, Exec::Sequential).unwrap();
    let b = dv_beta_scan(&spec, 0.1, 1.0, 1.0, &u0(), &grid, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn node_identities_hold(eps in 1e-4f64..0.5, eta in 1.0f64..3.0, beta in 0.6f64..0.99, t in 0.1f64..5.0, norm in 0.5f64..10.0) {
        let p = dv_params(eps, eta, beta, t, norm).unwrap();
        prop_assert_eq!(p.m_dv, p.panels() * p.q);
        prop_assert!(1usize << p.m_c >= p.m_dv);
        prop_assert!(p.m_c == 0 || 1usize << (p.m_c - 1) < p.m_dv);
    }
}
