//! Exact identities on the finite-mode fermionic Fock space.
//!
//! Everything here is finite-dimensional linear algebra, so the canonical
//! anticommutation relations, the particle-hole conjugation relations, the
//! one- and two-body conjugation identities, the assembled conjugated
//! Hamiltonian, and the spectral gap inequality can all be checked to
//! roundoff.
//!
//! Run with: cargo run --release --example fock_verification

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fermibox::fock::ph::{conjugation_residual, particle_hole};
use fermibox::fock::verify::{
    fermionic_estimates_battery, gap_inequality_combinatorial, verify_gap_inequality,
    verify_hamiltonian_assembly, verify_one_body_conjugation, verify_two_body_conjugation,
};
use fermibox::fock::{FockSpace, PairTensor};
use fermibox::lattice::{build_laplacian, Grid};
use fermibox::potentials::{apply_cutoff, PairPotential};

fn main() -> fermibox::Result<()> {
    let space = FockSpace::new(6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // CAR spot check
    let mut car = 0.0f64;
    for i in 0..6 {
        for j in 0..6 {
            let ac = space.annihilator(i).anticommutator(&space.creator(j));
            for b in 0..space.dim {
                for r in 0..space.dim {
                    let expect = if i == j && r == b { 1.0 } else { 0.0 };
                    car = car.max((ac[[r, b]] - expect).abs());
                }
            }
        }
    }
    println!("CAR max defect (M = 6)                    {car:.1e}");

    let ph = particle_hole(&space, &[0, 2, 4])?;
    println!(
        "particle-hole conjugation residual        {:.1e}",
        conjugation_residual(&space, &ph)
    );

    // one-body conjugation on random symmetric mode operators
    let mut worst1 = 0.0f64;
    for _ in 0..25 {
        let mut a = Array2::<f64>::zeros((6, 6));
        for i in 0..6 {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                a[[i, j]] = v;
                a[[j, i]] = v;
            }
        }
        worst1 = worst1.max(verify_one_body_conjugation(&space, &ph, &a)?);
    }
    println!("one-body conjugation, 25 instances        {worst1:.1e}");

    // two-body conjugation + assembly with a genuine cutoff tensor
    let grid = Grid::new(6.0, 192);
    let mut h0 = build_laplacian(&grid, 0.25)?;
    for (d, &x) in h0.diag.iter_mut().zip(grid.points()) {
        *d += x * x;
    }
    let (_, vecs) = h0.eigh_below(f64::INFINITY)?;
    let modes = vecs.slice(ndarray::s![.., ..6]).to_owned();
    let cut = apply_cutoff(&PairPotential::power_law(1.0, 0.5, 1)?, 8.0, &grid)?;
    let w = PairTensor::from_offset_table(&cut.v_cut, &modes)?;
    println!(
        "two-body conjugation (cutoff tensor)      {:.1e}",
        verify_two_body_conjugation(&space, &ph, &w)?
    );
    let mut h1 = Array2::<f64>::zeros((6, 6));
    for i in 0..6 {
        h1[[i, i]] = 0.25 * (2.0 * i as f64 + 1.0);
    }
    println!(
        "conjugated Hamiltonian assembly           {:.1e}",
        verify_hamiltonian_assembly(&space, &ph, &h1, &w, 3.0)?
    );

    // gap inequality, matrix route against the combinatorial oracle
    let space8 = FockSpace::new(8)?;
    let mut worst_gap = f64::INFINITY;
    let mut worst_mismatch = 0.0f64;
    for _ in 0..20 {
        let mut h = Array2::<f64>::zeros((8, 8));
        for i in 0..8 {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                h[[i, j]] = v;
                h[[j, i]] = v;
            }
        }
        let mu = rng.gen_range(-0.5..0.5);
        let eps = rng.gen_range(0.05..0.5);
        let a = verify_gap_inequality(&space8, &h, mu, eps)?;
        let b = gap_inequality_combinatorial(&space8, &h, mu, eps)?;
        worst_gap = worst_gap.min(a);
        worst_mismatch = worst_mismatch.max((a - b).abs());
    }
    println!("gap inequality min eigenvalue (20 runs)   {worst_gap:+.1e}");
    println!("matrix vs combinatorial route mismatch    {worst_mismatch:.1e}");

    // the eight fermionic estimates
    println!("\nfermionic estimates, worst violation over 100 random pairs:");
    for (name, w) in fermionic_estimates_battery(&space, 100, 99)? {
        println!("  {name}: {:+.1e}", w);
    }
    Ok(())
}
