//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hybrid_lchs::coeffs::{analytic_coefficients_limit, compute_raw_coefficients, truncation_errors, BetaLimit, QuadratureConfig};
use hybrid_lchs::dv_baseline::{default_beta_grid, dv_beta_scan, dv_params, dv_solve};
use hybrid_lchs::hybrid_sim::{
    fidelity, postselect, postselected_operator, prepare_kernel_state, reference_solution, Convention, HybridState,
    LchsSetup,
};
use hybrid_lchs::kernel::KernelParams;
use hybrid_lchs::linalg::{basis, normalized, spectral_norm, CVector, C64};
use hybrid_lchs::metrics::{postselection_analysis, qre_nongaussianity, OracleVariant};
use hybrid_lchs::oscillator::{position_norm, LeakagePolicy, TruncatedSpace};
use hybrid_lchs::pauli_heat::{damped_oscillator_generator, heat_generator, trotter_step_estimate, Boundary, PauliSum};
use hybrid_lchs::stateprep::{law_eberly_synthesize, simulate_le, snapd_optimize, SnapDOptions};
use hybrid_lchs::trotter_compile::{gate_counts, trotter_operator_error, trotterized_evolution};
use hybrid_lchs::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), hybrid_lchs::Error>;

const N_FOCK: usize = 64;
const N_COEFF: usize = 48;
const STEPS: usize = 100;

/// Boundary, r, r', β and the reference δ_nG, 1−F, p_post of the Law–Eberly route.
struct Bench {
    bc: Boundary,
    r: f64,
    r_prime: f64,
    beta: f64,
    delta_ng: f64,
    infidelity_cap: f64,
    p_post: f64,
}

const BENCHES: [Bench; 3] = [
    Bench { bc: Boundary::Dirichlet, r: 7.9, r_prime: 4.1, beta: 0.5, delta_ng: 2.22, infidelity_cap: 3e-3, p_post: 0.0628 },
    Bench { bc: Boundary::Neumann, r: 7.9, r_prime: 4.0, beta: 0.3, delta_ng: 1.98, infidelity_cap: 1e-3, p_post: 0.0562 },
    Bench { bc: Boundary::Periodic, r: 8.1, r_prime: 4.1, beta: 0.3, delta_ng: 2.01, infidelity_cap: 1e-3, p_post: 0.0484 },
];

fn space() -> TruncatedSpace {
    TruncatedSpace::new(N_FOCK).expect("valid cutoff")
}

fn u0() -> CVector {
    basis(4, 1)
}

fn coefficients(b: &Bench, n: usize) -> hybrid_lchs::Result<Vec<C64>> {
    let p = KernelParams::new(b.beta, b.r, b.r_prime, n)?;
    Ok(compute_raw_coefficients(&p, &QuadratureConfig::default(), Exec::default())?.normalized)
}

fn setup(b: &Bench) -> hybrid_lchs::Result<LchsSetup> {
    let spec = heat_generator(b.bc, 2, 1.0, 1.0)?;
    let mut s = LchsSetup::new(spec.l, spec.h, 1.0, b.r, space());
    s.leakage = LeakagePolicy::Allow;
    Ok(s)
}

/// Trotterized evolution of `S(r')χ ⊗ u₀`, postselection, and comparison with the exact solution.
fn trotter_run(b: &Bench, chi: &[C64]) -> hybrid_lchs::Result<(f64, f64)> {
    let spec = heat_generator(b.bc, 2, 1.0, 1.0)?;
    let prepared = prepare_kernel_state(chi, b.r_prime, space(), Convention::Benchmark)?;
    let state = HybridState::product(&prepared, &u0())?;
    let evolved = trotterized_evolution(&spec, 1.0, STEPS, &state, Convention::Benchmark)?;
    let (bra, _) = setup(b)?.postselection_bra()?;
    let out = postselect(&evolved, &bra, 1e-8)?;
    let target = reference_solution(&spec.a_matrix()?, 1.0, &u0())?;
    Ok((1.0 - fidelity(&out.qubit_state, target.as_slice())?, out.success_probability))
}

fn sci(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn criterion_1() -> Outcome {
    let lower = [0.4597572626, 0.5273259733, -0.0143676684, 0.3661994074];
    let upper = [1.3713254670, -0.8819209173, -0.7976665975, -0.1673816287];
    let mut worst_table: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    for (limit, table) in [(BetaLimit::Zero, lower), (BetaLimit::One, upper)] {
        let p = KernelParams::with_limit_beta(limit.beta(), 2f64.ln(), 1.2f64.ln(), 4)?;
        let set = compute_raw_coefficients(&p, &QuadratureConfig::default(), Exec::default())?;
        for (n, (c, t)) in set.raw.iter().zip(table).enumerate() {
            let expected = if n % 2 == 0 { C64::new(t, 0.0) } else { C64::new(0.0, t) };
            worst_table = worst_table.max((c - expected).norm());
            let closed = analytic_coefficients_limit(n, 2.0, 1.2, limit)?;
            worst_closed = worst_closed.max((c - closed).norm());
        }
    }
    Ok((
        worst_table <= 1e-9 && worst_closed <= 1e-9,
        format!("max |table − quad| {worst_table:.2e}, max |closed − quad| {worst_closed:.2e}"),
    ))
}

fn criterion_2() -> Outcome {
    let mut mismatches = Vec::new();
    for bc in [Boundary::Dirichlet, Boundary::Neumann, Boundary::Periodic] {
        for m in 2..=4 {
            for n_t in [1, 10] {
                if !gate_counts(bc, &[m], n_t)?.matches {
                    mismatches.push(format!("{bc} m={m} n_t={n_t}"));
                }
            }
        }
    }
    let table = [
        (Boundary::Dirichlet, [1400, 400, 100, 300]),
        (Boundary::Neumann, [1400, 600, 100, 400]),
        (Boundary::Periodic, [600, 200, 100, 200]),
    ];
    let mut rows = Vec::new();
    for (bc, want) in table {
        let r = gate_counts(bc, &[2], 100)?.compiled;
        let got = [r.one_qubit, r.cnot, r.displace, r.cond_displace];
        if got != want {
            mismatches.push(format!("{bc} table row {got:?}"));
        }
        rows.push(format!("{bc} {}/{}/{}/{}", got[0], got[1], got[2], got[3]));
    }
    Ok((mismatches.is_empty(), format!("{}; mismatches {mismatches:?}", rows.join(", "))))
}

fn criterion_3() -> Outcome {
    // (bc, β, h1, K, Q, M_DV, m_c, ‖c‖₁, 1−F, tolerance)
    let rows = [
        (Boundary::Dirichlet, 0.60, 0.10168, 4.06718, 4, 320, 9, 0.9357, 2.33e-3, 5e-4),
        (Boundary::Neumann, 0.90, 0.10775, 2.58599, 4, 192, 8, 1.2073, 2.26e-3, 5e-4),
        (Boundary::Periodic, 0.80, 0.09197, 2.85107, 4, 248, 8, 1.0740, 2.78e-4, 1e-4),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (bc, beta, h1, k, q, m_dv, m_c, l1, infid, tol) in rows {
        let spec = heat_generator(bc, 2, 1.0, 1.0)?;
        let p = dv_params(0.1, 1.0, beta, 1.0, spectral_norm(&spec.l.matrix()?))?;
        let sol = dv_solve(&spec, &p, &u0(), Exec::default())?;
        let row_ok = (p.h1 - h1).abs() <= 1e-5
            && (p.k_max - k).abs() <= 1e-5
            && (p.q, p.m_dv, p.m_c) == (q, m_dv, m_c)
            && (1.0 - sol.fidelity - infid).abs() <= tol
            && (sol.l1_norm - l1).abs() <= 1e-2;
        ok &= row_ok;
        notes.push(format!(
            "{bc}: h1 {:.5} K {:.5} Q {} M {} m_c {} l1 {:.4} 1-F {:.3e}",
            p.h1,
            p.k_max,
            p.q,
            p.m_dv,
            p.m_c,
            sol.l1_norm,
            1.0 - sol.fidelity
        ));
    }
    let dirichlet = dv_beta_scan(&heat_generator(Boundary::Dirichlet, 2, 1.0, 1.0)?, 0.1, 1.0, 1.0, &u0(), &default_beta_grid(), Exec::default())?;
    let neumann = dv_beta_scan(&heat_generator(Boundary::Neumann, 2, 1.0, 1.0)?, 0.1, 1.0, 1.0, &u0(), &default_beta_grid(), Exec::default())?;
    let scan = (dirichlet.best_row().params.beta, neumann.best_row().params.beta);
    ok &= (scan.0 - 0.60).abs() < 1e-12 && (scan.1 - 0.90).abs() < 1e-12;
    notes.push(format!("scan optima {:.2}/{:.2}", scan.0, scan.1));
    Ok((ok, notes.join("; ")))
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for b in &BENCHES {
        let c = coefficients(b, N_COEFF)?;
        let seq = law_eberly_synthesize(&c)?;
        let (chi, _) = simulate_le(&seq, space())?;
        let (infid, p) = trotter_run(b, chi.as_slice())?;
        let delta = qre_nongaussianity(&c)?.delta_ng;
        let row_ok = infid <= b.infidelity_cap && (p - b.p_post).abs() <= 0.015 && (delta - b.delta_ng).abs() <= 0.05;
        ok &= row_ok;
        notes.push(format!(
            "{}: 1-F {infid:.3e} (cap {:.0e}) p {:.2}% (want {:.2}% ± 1.5) δ_nG {delta:.3} (want {} ± 0.05)",
            b.bc,
            b.infidelity_cap,
            100.0 * p,
            100.0 * b.p_post,
            b.delta_ng
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn random_targets(count: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=N_COEFF);
            let v: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / norm).collect()
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut targets = random_targets(100, 2024);
    for b in &BENCHES {
        targets.push(coefficients(b, N_COEFF)?);
    }
    let (mut worst_infid, mut worst_exc, mut bad_counts) = (0f64, 0f64, 0usize);
    for c in &targets {
        let support = c.iter().rposition(|z| z.norm() > 0.0).map_or(1, |i| i + 1);
        let seq = law_eberly_synthesize(c)?;
        let (osc, exc) = simulate_le(&seq, space())?;
        let mut padded = c.clone();
        padded.resize(N_FOCK, C64::new(0.0, 0.0));
        worst_infid = worst_infid.max(1.0 - fidelity(osc.as_slice(), &padded)?);
        worst_exc = worst_exc.max(exc);
        if (seq.n_jc, seq.n_rot) != (support - 1, support - 1) {
            bad_counts += 1;
        }
    }
    Ok((
        worst_infid <= 1e-10 && worst_exc <= 1e-12 && bad_counts == 0,
        format!("{} targets: worst 1-F {worst_infid:.2e}, worst excitation {worst_exc:.2e}, count mismatches {bad_counts}", targets.len()),
    ))
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for b in &BENCHES {
        let c = coefficients(b, N_COEFF)?;
        let res = snapd_optimize(&c, 30, 7, 2000, &SnapDOptions::default(), Exec::default())?;
        let chi = res.prepared_state(space())?;
        let (infid, p) = trotter_run(b, chi.as_slice())?;
        let prep = 1.0 - res.achieved_fidelity;
        ok &= prep <= 2e-2 && infid <= 1e-2;
        notes.push(format!("{}: prep 1-F {prep:.3e} end-to-end 1-F {infid:.3e} p {:.2}%", b.bc, 100.0 * p));
    }
    Ok((ok, notes.join("; ")))
}

fn criterion_7() -> Outcome {
    let p = KernelParams::new(0.5, 7.9, 4.1, 64)?;
    let cutoffs = [8usize, 16, 32, 64];
    let errs = truncation_errors(&p, &cutoffs, &QuadratureConfig::default(), Exec::default())?;
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let xs: Vec<f64> = cutoffs.iter().map(|&n| n as f64).collect();
    let slope = fit_slope(&xs, &errs);
    Ok((
        decreasing && slope < -1.0,
        format!("errors [{}], strictly decreasing {decreasing}, slope {slope:.3} (want < -1)", sci(&errs)),
    ))
}

fn criterion_8() -> Outcome {
    let spec = heat_generator(Boundary::Dirichlet, 2, 1.0, 1.0)?;
    let steps = [25usize, 50, 100, 200];
    let convention = Convention::Hbar2;
    let errs = steps
        .iter()
        .map(|&n| trotter_operator_error(&spec, 1.0, n, space(), convention, Exec::default()))
        .collect::<hybrid_lchs::Result<Vec<f64>>>()?;
    let xs: Vec<f64> = steps.iter().map(|&n| n as f64).collect();
    let p = -fit_slope(&xs, &errs);
    let x_norm = position_norm(N_FOCK)? * convention.coupling();
    let mut conservative = true;
    for (&n, &e) in steps.iter().zip(&errs) {
        conservative &= trotter_step_estimate(&spec, 1, 1.0, e, x_norm)? >= n as u64;
    }
    let damped = damped_oscillator_generator(0.5, 1.0)?;
    // H is split term by term, so its strings are chosen to commute among themselves.
    let mut scalar_l = heat_generator(Boundary::Periodic, 2, 1.0, 1.0)?;
    scalar_l.l = PauliSum::from_pairs(2, &[(0.7, "II")])?;
    scalar_l.h = PauliSum::from_pairs(2, &[(0.4, "XX"), (0.25, "YY"), (-0.1, "ZZ")])?;
    let commuting = [
        trotter_operator_error(&damped, 1.0, 1, space(), convention, Exec::default())?,
        trotter_operator_error(&scalar_l, 1.0, 1, space(), convention, Exec::default())?,
    ];
    let commuting_ok = commuting.iter().all(|e| *e <= 1e-10);
    Ok((
        (0.8..=1.2).contains(&p) && conservative && commuting_ok,
        format!("errors [{}], order {p:.3}, estimator conservative {conservative}, commuting errors [{}]", sci(&errs), sci(&commuting)),
    ))
}

fn criterion_9() -> Outcome {
    let b = &BENCHES[0];
    let s = setup(b)?;
    let prepared = |n: usize| -> hybrid_lchs::Result<CVector> { prepare_kernel_state(&coefficients(b, n)?, b.r_prime, space(), Convention::Benchmark) };
    let ideal = prepared(N_COEFF)?;
    let mut variants = vec![
        OracleVariant { label: "N=48".into(), operator: postselected_operator(&ideal, &s)? },
        OracleVariant { label: "N=24".into(), operator: postselected_operator(&prepared(24)?, &s)? },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..24 {
        let scale = 10f64.powf(rng.random_range(-4.0..-1.0));
        let noise = CVector::from_fn(N_FOCK, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let state = normalized(&(&ideal + noise * C64::new(scale, 0.0)))?;
        variants.push(OracleVariant { label: format!("perturbed-{i}"), operator: postselected_operator(&state, &s)? });
    }
    let rep = postselection_analysis(&variants, &u0(), Exec::default())?;
    let tightest = rep
        .pairs
        .iter()
        .map(|p| p.probability_difference / p.bound.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let truncation = &rep.pairs[0];
    Ok((
        rep.all_hold,
        format!(
            "{} pairs, all hold {}; N=24 vs 48: |Δp| {:.3e} ≤ {:.3e}; max |Δp|/bound {tightest:.3}",
            rep.pairs.len(),
            rep.all_hold,
            truncation.probability_difference,
            truncation.bound
        ),
    ))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 limit-coefficient tables", criterion_1, Duration::from_secs(5)),
        ("2 gate counts", criterion_2, Duration::from_secs(10)),
        ("3 discrete-variable baseline", criterion_3, Duration::from_secs(30)),
        ("4 end-to-end benchmarks", criterion_4, Duration::from_secs(300)),
        ("5 Law-Eberly synthesis", criterion_5, Duration::from_secs(120)),
        ("6 SNAP+D preparation", criterion_6, Duration::from_secs(1800)),
        ("7 truncation-error decay", criterion_7, Duration::from_secs(60)),
        ("8 Trotter scaling", criterion_8, Duration::from_secs(120)),
        ("9 postselection perturbation bound", criterion_9, Duration::from_secs(120)),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed <= limit, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} [{name}] {detail} ({:.1?} of {:?})",
            if ok { "PASS" } else { "FAIL" },
            elapsed,
            limit
        );
    }
    println!("EXCLUDED [10 desk-scale exclusions] circuit depths of the quadrature LCU, full-resolution sweep heatmaps, optimizer iteration counts");
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
