//! Thomas-Fermi ground state in a harmonic trap.
//!
//! For U = x^2 and no interaction the TF problem has the closed form
//! mu = 2 and rho(x) = sqrt(2 - x^2)_+ / pi; with a repulsive power-law
//! pair potential the chemical potential rises and the cloud spreads.
//!
//! Run with: cargo run --release --example tf_harmonic

use fermibox::lattice::Grid;
use fermibox::potentials::{ExternalPotential, PairPotential};
use fermibox::thomas_fermi::{counting_function, tf_energy, tf_solve};

fn main() -> fermibox::Result<()> {
    let grid = Grid::new(8.0, 4096);
    let u = ExternalPotential::harmonic();
    let ug = u.on_grid(&grid)?;

    println!("free case (V = 0):");
    let tf = tf_solve(&u, &PairPotential::Zero, &grid)?;
    let energy = tf_energy(&tf.rho, &ug, &PairPotential::Zero, 1, &grid)?;
    println!("  mu       = {:.9}   (exact: 2)", tf.mu);
    println!("  mass     = {:.9}", tf.mass(&grid));
    println!("  energy   = {:.9}", energy);
    println!("  residual = {:.2e}", tf.residual);
    let l1: f64 = grid
        .points()
        .iter()
        .zip(&tf.rho)
        .map(|(&x, &r)| (r - (2.0 - x * x).max(0.0).sqrt() / std::f64::consts::PI).abs())
        .sum::<f64>()
        * grid.spacing();
    println!("  L1 error against the semicircle = {l1:.2e}");

    println!("\nrepulsive pair potential lambda |x|^(-1/2):");
    for lambda in [0.05, 0.1, 0.2, 0.4] {
        let v = PairPotential::power_law(lambda, 0.5, 1)?;
        let tf = tf_solve(&u, &v, &grid)?;
        let e = tf_energy(&tf.rho, &ug, &v, 1, &grid)?;
        let f_mu = counting_function(tf.mu, &tf, &ug, &v, &grid)?;
        let (a, b) = tf.support().unwrap();
        println!(
            "  lambda = {lambda:4}: mu = {:.6}, E = {:.6}, F(mu) = {:.8}, support = [{:+.3}, {:+.3}]",
            tf.mu,
            e,
            f_mu,
            grid.points()[a],
            grid.points()[b]
        );
    }
    Ok(())
}
