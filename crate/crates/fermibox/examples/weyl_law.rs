//! Eigenvalue counts of -hbar^2 d^2/dx^2 + (x^2 - 1) against the
//! phase-space volume (2 pi hbar)^-1 |{p^2 + W < 0}|.
//!
//! For the shifted harmonic well both sides equal 1/(2 hbar) up to a
//! bounded deficit; the counts come from exact Sturm sequences of the
//! tridiagonal discretization, so the sweep is cheap down to hbar = 1/128.
//!
//! Run with: cargo run --release --example weyl_law

use fermibox::lattice::Grid;
use fermibox::semiclassics::weyl_law_check;

fn main() -> fermibox::Result<()> {
    let grid = Grid::new(6.0, 6144);
    let w: Vec<f64> = grid.points().iter().map(|&x| x * x - 1.0).collect();
    println!("  hbar      count   phase volume   deficit");
    for k in 3..=7 {
        let hbar = 0.5f64.powi(k);
        let rep = weyl_law_check(&w, hbar, &grid)?;
        println!(
            "  1/{:<6} {:6}   {:12.4}   {:.4}",
            1.0 / hbar,
            rep.count,
            rep.phase_volume,
            rep.deficit
        );
    }
    println!("\nexact harmonic count: #{{hbar (2k+1) <= 1}} = 1/(2 hbar) for these hbar");
    Ok(())
}
