use hybrid_lchs::linalg::{expm_hermitian, kron, unitarity_defect, CMatrix, CVector, C64};
use hybrid_lchs::oscillator::{
    annihilation, build_operator, displace, jc_pulse_matrix, position, position_norm, qubit_rotation, snap, squeeze,
    squeezed_fock_wavefunction, squeezed_vacuum_amplitudes, LeakagePolicy, OperatorKind, OperatorSpec,
    TruncatedSpace, EXCITED, GROUND,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn vacuum(n: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[0] = C64::new(1.0, 0.0);
    v
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn zero_squeeze_is_identity() {
    let s = squeeze(0.0, 32).unwrap();
    assert!(max_abs(&(s - CMatrix::identity(32, 32))) < 1e-14);
}

#[test]
fn displacement_inverse() {
    for alpha in [C64::new(2.0, 0.0), C64::new(-0.3, 1.1), C64::from_polar(2.0, 2.0)] {
        let p = displace(alpha, 64).unwrap() * displace(-alpha, 64).unwrap();
        assert!(max_abs(&(p - CMatrix::identity(64, 64))) < 1e-10, "{alpha}");
    }
}

fn position_variance(r: f64, n: usize) -> f64 {
    let psi = squeeze(r, n).unwrap() * vacuum(n);
    (position(n) * psi).norm_squared()
}

#[test]
fn squeezed_vacuum_position_variance() {
    for r in [0.0, 0.4, 0.7, 1.0] {
        let var = position_variance(r, 64);
        assert!((var - (2.0 * r).exp()).abs() < 1e-6, "r={r}: {var}");
    }
    // S(1.5)|0⟩ keeps ~1e-3 of its population above level 64.
    let var = position_variance(1.5, 256);
    assert!((var - 3f64.exp()).abs() < 1e-6, "{var}");
}

#[test]
fn squeezed_vacuum_amplitude_paths_agree() {
    let space = TruncatedSpace::new(64).unwrap();
    for r in [-0.9, 0.0, 0.5, 0.9] {
        let (amps, leakage) = squeezed_vacuum_amplitudes(r, space, LeakagePolicy::default()).unwrap();
        let column = squeeze(r, 64).unwrap() * vacuum(64);
        assert!((amps.clone() - column).norm() < 1e-12);
        assert!(leakage < 1e-8);
        for (n, a) in amps.iter().enumerate() {
            if n % 2 == 1 {
                assert_eq!(*a, C64::new(0.0, 0.0));
            }
        }
    }
    let (zero, _) = squeezed_vacuum_amplitudes(0.0, space, LeakagePolicy::default()).unwrap();
    assert!((zero - vacuum(64)).norm() < 1e-15);
}

#[test]
fn strong_squeezing_is_flagged() {
    let space = TruncatedSpace::new(16).unwrap();
    assert!(squeezed_vacuum_amplitudes(2.0, space, LeakagePolicy::default()).is_err());
    assert!(squeezed_vacuum_amplitudes(2.0, space, LeakagePolicy::Allow).is_ok());
    let op = build_operator(space, &OperatorSpec::Squeeze(2.0)).unwrap();
    assert!(op.leakage_warning);
    assert_eq!(op.kind, OperatorKind::Squeeze);
}

#[test]
fn squeeze_composition() {
    let (r1, r2) = (0.4, 0.7);
    let a = squeeze(r1, 64).unwrap() * squeeze(r2, 64).unwrap() * vacuum(64);
    let b = squeeze(r1 + r2, 64).unwrap() * vacuum(64);
    assert!((a - b).norm() < 1e-8);
}

#[test]
fn position_matrix_structure() {
    let x = position(12);
    for i in 0..12 {
        for j in 0..12 {
            let expected = if j == i + 1 {
                (j as f64).sqrt()
            } else if i == j + 1 {
                (i as f64).sqrt()
            } else {
                0.0
            };
            assert!((x[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-15);
        }
    }
}

#[test]
fn position_norm_grows_below_bound() {
    let mut last = 0.0;
    for n in 2..=64 {
        let v = position_norm(n).unwrap();
        assert!(v > last, "n={n}");
        assert!(v <= 2.0 * ((n - 1) as f64).sqrt() + 1e-12);
        last = v;
    }
}

#[test]
fn wavefunction_value_at_origin() {
    let expected = 2f64.powf(-0.25) * PI.powf(-0.25);
    assert!((squeezed_fock_wavefunction(0, 0.0, 0.0) - expected).abs() < 1e-15);
    assert!((expected - 0.6316).abs() < 1e-4);
}

#[test]
fn wavefunctions_are_orthonormal() {
    let rp = 0.3;
    let (a, b, n) = (-40.0, 40.0, 80_000);
    let h = (b - a) / n as f64;
    let grid: Vec<Vec<f64>> = (0..=10)
        .map(|k| (0..n).map(|i| squeezed_fock_wavefunction(k, rp, a + (i as f64 + 0.5) * h)).collect())
        .collect();
    for m in 0..=10 {
        for k in 0..=10 {
            let s: f64 = grid[m].iter().zip(&grid[k]).map(|(x, y)| x * y * h).sum();
            let expected = if m == k { 1.0 } else { 0.0 };
            assert!((s - expected).abs() < 1e-10, "m={m}, k={k}: {s}");
        }
    }
}

#[test]
fn wavefunction_parity() {
    for n in 0..12 {
        for x in [0.3, 1.7, 4.0] {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let a = squeezed_fock_wavefunction(n, 0.8, -x);
            let b = squeezed_fock_wavefunction(n, 0.8, x);
            assert!((a - sign * b).abs() < 1e-14);
        }
    }
}

fn jc_oracle(space: TruncatedSpace, n: usize, alpha: f64, phi: f64) -> CMatrix {
    let mut lower = CMatrix::zeros(2, 2);
    lower[(GROUND, EXCITED)] = C64::new(1.0, 0.0);
    let ad = annihilation(space.n_fock).adjoint();
    let term = kron(&ad, &lower) * C64::from_polar(alpha / (n as f64).sqrt(), phi);
    let gen = &term + term.adjoint();
    expm_hermitian(&gen, 1.0).unwrap()
}

#[test]
fn jc_pulse_matches_dense_exponential() {
    let space = TruncatedSpace::new(10).unwrap();
    for (n, alpha, phi) in [(1, 0.7, 0.0), (3, 1.9, -0.4), (9, 0.25, 2.2)] {
        let m = jc_pulse_matrix(space, n, alpha, phi).unwrap();
        let dense = jc_oracle(space, n, alpha, phi);
        assert!(max_abs(&(&m - dense)) < 1e-12);
        assert!(unitarity_defect(&m) < 1e-12);
    }
}

#[test]
fn jc_pulse_rotates_its_manifold_by_alpha() {
    let space = TruncatedSpace::new(8).unwrap();
    let (n, alpha) = (4, 0.9);
    let m = jc_pulse_matrix(space, n, alpha, 0.0).unwrap();
    let e = 2 * (n - 1) + EXCITED;
    let g = 2 * n + GROUND;
    assert!((m[(e, e)] - C64::new(alpha.cos(), 0.0)).norm() < 1e-14);
    assert!((m[(g, e)].norm() - alpha.sin()).abs() < 1e-14);
    let zero = jc_pulse_matrix(space, n, 0.0, 1.0).unwrap();
    assert!(max_abs(&(zero - CMatrix::identity(16, 16))) < 1e-15);
    assert!(jc_pulse_matrix(space, 0, 0.5, 0.0).is_err());
}

#[test]
fn qubit_rotation_is_unitary() {
    let r = qubit_rotation(1.3, 0.4);
    let m = CMatrix::from_fn(2, 2, |i, j| r[i][j]);
    assert!(unitarity_defect(&m) < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snap_is_diagonal_unitary(theta in proptest::collection::vec(-PI..PI, 1..20)) {
        let s = snap(&theta, 20).unwrap();
        prop_assert!(unitarity_defect(&s) < 1e-14);
        for (n, t) in theta.iter().enumerate() {
            prop_assert!((s[(n, n)] - C64::from_polar(1.0, *t)).norm() < 1e-15);
        }
    }

    #[test]
    fn small_displacements_are_unitary(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let d = displace(C64::new(re, im), 64).unwrap();
        prop_assert!(unitarity_defect(&d) < 1e-10);
    }
}
