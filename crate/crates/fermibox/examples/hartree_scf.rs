//! Grand-canonical Hartree solver at the Thomas-Fermi chemical potential.
//!
//! The converged state is a Fermi projection of its own mean-field
//! Hamiltonian; the run prints the fixed-point certificate, the particle
//! number, both energies, and the semiclassical commutator diagnostics.
//!
//! Run with: cargo run --release --example hartree_scf

use fermibox::hartree::{commutator_report, scf_solve, ScfParams};
use fermibox::lattice::Grid;
use fermibox::potentials::{ExternalPotential, PairPotential};
use fermibox::thomas_fermi::tf_solve;

fn main() -> fermibox::Result<()> {
    let grid = Grid::new(8.0, 1024);
    let u = ExternalPotential::harmonic();
    let v = PairPotential::power_law(0.2, 0.5, 1)?;
    let tf = tf_solve(&u, &v, &grid)?;
    println!("TF chemical potential mu = {:.6}\n", tf.mu);

    println!("  N    Tr gamma   residual   E_Hartree    E_HF         [x,g]/Nh  [p,g]/Nh");
    for n in [8u64, 16, 32] {
        let nf = n as f64;
        let hbar = 1.0 / nf;
        let state = scf_solve(&u, &v, tf.mu, ScfParams::default(), nf, hbar, &grid)?;
        let comm = commutator_report(&state.occ, hbar, nf, &[0.5, 1.0, 2.0], &grid)?;
        println!(
            "  {n:3}  {:8.3}  {:9.2e}  {:11.6}  {:11.6}  {:8.4}  {:8.4}",
            state.trace(),
            state.residual,
            state.energy,
            state.energy_hf,
            comm.x_comm,
            comm.p_comm,
        );
    }
    println!("\nthe commutator ratios stay bounded as hbar shrinks: that is the");
    println!("semiclassical structure the convergence analysis relies on.");
    Ok(())
}
