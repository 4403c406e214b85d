//! Runs the three heat-equation benchmarks with ideal kernel-state injection.

use std::time::Instant;

use hybrid_lchs::coeffs::{compute_raw_coefficients, QuadratureConfig};
use hybrid_lchs::hybrid_sim::{fidelity, postselect, reference_solution, run_lchs, Convention, HybridState, LchsSetup, prepare_kernel_state};
use hybrid_lchs::kernel::KernelParams;
use hybrid_lchs::linalg::{basis, CVector};
use hybrid_lchs::oscillator::{LeakagePolicy, TruncatedSpace};
use hybrid_lchs::pauli_heat::{heat_generator, Boundary};
use hybrid_lchs::trotter_compile::trotterized_evolution;
use hybrid_lchs::Exec;

fn main() -> hybrid_lchs::Result<()> {
    let space = TruncatedSpace::new(64)?;
    for (bc, r, rp, beta) in [
        (Boundary::Dirichlet, 7.9, 4.1, 0.5),
        (Boundary::Neumann, 7.9, 4.0, 0.3),
        (Boundary::Periodic, 8.1, 4.1, 0.3),
    ] {
        let start = Instant::now();
        let spec = heat_generator(bc, 2, 1.0, 1.0)?;
        let coeffs = compute_raw_coefficients(&KernelParams::new(beta, r, rp, 48)?, &QuadratureConfig::default(), Exec::default())?;
        let prepared = prepare_kernel_state(&coeffs.normalized, rp, space, Convention::Benchmark)?;
        let u0: CVector = basis(4, 1);
        let mut setup = LchsSetup::new(spec.l.clone(), spec.h.clone(), 1.0, r, space);
        setup.leakage = LeakagePolicy::Allow;
        let exact = run_lchs(&prepared, &u0, &setup)?;
        let target = reference_solution(&spec.a_matrix()?, 1.0, &u0)?;
        let f_exact = fidelity(&exact.qubit_state, target.as_slice())?;
        let state = HybridState::product(&prepared, &u0)?;
        let evolved = trotterized_evolution(&spec, 1.0, 100, &state, Convention::Benchmark)?;
        let (bra, _) = setup.postselection_bra()?;
        let trot = postselect(&evolved, &bra, setup.floor)?;
        let f_trot = fidelity(&trot.qubit_state, target.as_slice())?;
        println!(
            "{bc}: exact 1-F {:.3e} p {:.4}  trotter 1-F {:.3e} p {:.4}  ({:.2?})",
            1.0 - f_exact,
            exact.success_probability,
            1.0 - f_trot,
            trot.success_probability,
            start.elapsed()
        );
    }
    Ok(())
}
