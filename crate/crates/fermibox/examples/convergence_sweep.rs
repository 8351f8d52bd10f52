//! Hartree-to-Thomas-Fermi convergence as hbar = 1/N shrinks.
//!
//! One Thomas-Fermi solve fixes the chemical potential; each particle
//! number gets its own Hartree projection, compared against the Weyl
//! quantization of the TF phase-space indicator in trace norm,
//! Hilbert-Schmidt norm, Wigner L2 distance, and density L1 distance.
//! The log-log slope of the trace distance is the measured convergence
//! rate.
//!
//! Run with: cargo run --release --example convergence_sweep

use fermibox::hartree::ScfParams;
use fermibox::potentials::{ExternalPotential, PairPotential};
use fermibox::semiclassics::{convergence_sweep, SweepConfig};

fn main() -> fermibox::Result<()> {
    let cfg = SweepConfig {
        n_list: vec![8, 16, 32, 64],
        external: ExternalPotential::harmonic(),
        pair: PairPotential::power_law(0.2, 0.5, 1)?,
        scf: ScfParams::default(),
        grid_points: 1024,
        box_half_length: 8.0,
        xi_samples: vec![0.5, 1.0, 2.0],
    };
    let rep = convergence_sweep(&cfg)?;
    println!("mu = {:.6}\n", rep.mu);
    println!("  hbar     trace_dist  hs_dist   wigner_L2  density_L1  trace_gap  [x,g]/Nh");
    for r in &rep.rows {
        println!(
            "  1/{:<4}  {:9.5}  {:8.5}  {:9.5}  {:9.5}  {:9.5}  {:7.4}",
            1.0 / r.hbar,
            r.trace_dist,
            r.hs_dist,
            r.wigner_l2,
            r.density_l1,
            r.trace_gap,
            r.x_comm
        );
    }
    println!(
        "\nfitted trace-distance rate: hbar^{:.3} (residual {:.3}{})",
        rep.beta,
        rep.fit_residual,
        if rep.fit_restricted {
            ", restricted to the three smallest hbar"
        } else {
            ""
        }
    );
    println!("log-corrected rate:         hbar^{:.3}", rep.beta_logcorrected);
    Ok(())
}
