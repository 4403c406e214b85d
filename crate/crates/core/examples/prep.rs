//! Prepares the Dirichlet kernel state with Law–Eberly pulses and SNAP + displacement layers.

use std::time::Instant;

use hybrid_lchs::coeffs::{compute_raw_coefficients, QuadratureConfig};
use hybrid_lchs::hybrid_sim::fidelity;
use hybrid_lchs::kernel::KernelParams;
use hybrid_lchs::oscillator::TruncatedSpace;
use hybrid_lchs::stateprep::{law_eberly_synthesize, simulate_le, snapd_optimize, SnapDOptions};
use hybrid_lchs::Exec;

fn main() -> hybrid_lchs::Result<()> {
    let budget: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let space = TruncatedSpace::new(64)?;
    let coeffs = compute_raw_coefficients(&KernelParams::new(0.5, 7.9, 4.1, 48)?, &QuadratureConfig::default(), Exec::default())?;
    let mut target = coeffs.normalized.clone();
    target.resize(64, Default::default());

    let seq = law_eberly_synthesize(&coeffs.normalized)?;
    let (osc, excitation) = simulate_le(&seq, space)?;
    println!(
        "law-eberly: {} jc, {} rotations, 1-F {:.3e}, excitation {:.3e}",
        seq.n_jc,
        seq.n_rot,
        1.0 - fidelity(osc.as_slice(), &target)?,
        excitation
    );

    let start = Instant::now();
    let snap = snapd_optimize(&coeffs.normalized, 30, 7, budget, &SnapDOptions::default(), Exec::default())?;
    println!(
        "snap+d: 1-F {:.3e}, converged {}, iterations {}, start {} ({:.1?})",
        1.0 - snap.achieved_fidelity,
        snap.converged,
        snap.iterations,
        snap.best_start,
        start.elapsed()
    );
    Ok(())
}
