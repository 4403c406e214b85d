//! Prints the classical quadrature baseline for the three heat benchmarks.

use hybrid_lchs::dv_baseline::{default_beta_grid, dv_beta_scan};
use hybrid_lchs::linalg::basis;
use hybrid_lchs::pauli_heat::{heat_generator, Boundary};
use hybrid_lchs::Exec;

fn main() -> hybrid_lchs::Result<()> {
    println!("bc,beta,h1,K,Q,M_DV,m_c,l1,infidelity");
    for bc in [Boundary::Dirichlet, Boundary::Neumann, Boundary::Periodic] {
        let spec = heat_generator(bc, 2, 1.0, 1.0)?;
        let scan = dv_beta_scan(&spec, 0.1, 1.0, 1.0, &basis(4, 1), &default_beta_grid(), Exec::default())?;
        let row = scan.best_row();
        let p = &row.params;
        println!(
            "{bc},{:.2},{:.5},{:.5},{},{},{},{:.4},{:.3e}",
            p.beta, p.h1, p.k_max, p.q, p.m_dv, p.m_c, row.l1_norm, row.infidelity
        );
    }
    Ok(())
}
