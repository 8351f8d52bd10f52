//! The Wigner/Weyl transform pair on a Gaussian wave packet.
//!
//! A rank-one Gaussian state has the closed-form Wigner function
//! f(x, p) = 2 exp(-x^2/s^2 - s^2 p^2/hbar^2); the example measures the
//! transform against it, round-trips through the Weyl quantization, and
//! checks the trace identity Tr gamma_f = (2 pi hbar)^-1 iint f.
//!
//! Run with: cargo run --release --example wigner_gaussian

use ndarray::Array2;

use fermibox::lattice::Grid;
use fermibox::phase_space::{weyl_quantize, wigner_transform, PhaseSpaceGrid};

fn main() -> fermibox::Result<()> {
    let (n, l, hbar, sigma) = (1024usize, 8.0, 0.125, 1.0);
    let grid = Grid::new(l, n);
    let psg = PhaseSpaceGrid::new(&grid, hbar);

    // normalized Gaussian in the coefficient convention
    let mut psi: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| (-x * x / (2.0 * sigma * sigma)).exp())
        .collect();
    let nrm = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|v| *v /= nrm);
    let gamma = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j]);

    let f = wigner_transform(&gamma, &psg)?;
    let mut sup = 0.0f64;
    for j in 0..n {
        let x = grid.points()[j];
        for c in 0..psg.m {
            let p = psg.p_at(c);
            let exact =
                2.0 * (-x * x / (sigma * sigma) - sigma * sigma * p * p / (hbar * hbar)).exp();
            sup = sup.max((f.values[[j, c]] - exact).abs());
        }
    }
    println!("phase-space grid: {} x {} (p_max = {:.3})", n, psg.m, psg.p_max());
    println!("sup |f - f_exact|     = {sup:.3e}   (peak 2)");
    println!("imaginary residual    = {:.3e}", f.imag_residual);

    let integral = f.integral() / (2.0 * std::f64::consts::PI * hbar);
    println!("(2 pi hbar)^-1 iint f = {integral:.12}   (Tr gamma = 1)");

    let (g2, herm) = weyl_quantize(&f)?;
    let back = wigner_transform(g2.as_array(), &psg)?;
    let mut round = 0.0f64;
    for j in 0..n {
        for c in 0..psg.m {
            round = round.max((back.values[[j, c]] - f.values[[j, c]]).abs());
        }
    }
    println!("hermitian defect      = {herm:.3e}");
    println!("roundtrip sup error   = {round:.3e}");
    Ok(())
}
