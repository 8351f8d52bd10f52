//! Spectral window counts of the Hartree Hamiltonian around the chemical
//! potential: the number of levels in [mu - eps, mu + eps] stays of order
//! N (eps + hbar), which is what controls the sharp-projection error terms.
//!
//! Run with: cargo run --release --example window_counts

use fermibox::hartree::{scf_solve, ScfParams};
use fermibox::lattice::Grid;
use fermibox::potentials::{ExternalPotential, PairPotential};
use fermibox::semiclassics::window_count_check;
use fermibox::thomas_fermi::tf_solve;

fn main() -> fermibox::Result<()> {
    let grid = Grid::new(8.0, 1024);
    let u = ExternalPotential::harmonic();
    let v = PairPotential::power_law(0.2, 0.5, 1)?;
    let ug = u.on_grid(&grid)?;
    let tf = tf_solve(&u, &v, &grid)?;

    println!("mu = {:.6}", tf.mu);
    println!("  N     eps    count   count / (N (eps + hbar))");
    let mut max_ratio = 0.0f64;
    for n in [8u64, 16, 32] {
        let nf = n as f64;
        let state = scf_solve(&u, &v, tf.mu, ScfParams::default(), nf, 1.0 / nf, &grid)?;
        for eps in [0.1, 0.2, 0.3] {
            let rep = window_count_check(&state, &ug, eps, &grid)?;
            max_ratio = max_ratio.max(rep.bound_ratio);
            println!("  {n:3}   {eps:4}   {:5}   {:.4}", rep.count, rep.bound_ratio);
        }
    }
    println!("\nmeasured window constant: {max_ratio:.3}");
    Ok(())
}
