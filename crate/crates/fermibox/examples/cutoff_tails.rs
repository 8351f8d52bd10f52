//! Ultraviolet regularization of the power-law pair potential.
//!
//! V_Lambda keeps only Fourier modes |xi| <= Lambda; it is bounded with
//! nonnegative profile, its weighted norm grows like Lambda^(1+a), and the
//! tail W_Lambda = V - V_Lambda decays in L^p like Lambda^-(d/p - a) for
//! 2 <= p < d/a (evaluated in d = 3 where that window is nonempty at a = 1/2).
//!
//! Run with: cargo run --release --example cutoff_tails

use fermibox::lattice::Grid;
use fermibox::potentials::{apply_cutoff, tail_lp_norm_radial, PairPotential};
use fermibox::semiclassics::rate_fit;

fn main() -> fermibox::Result<()> {
    let grid = Grid::new(8.0, 1025);
    let (lambda, a) = (1.0, 0.5);
    let v = PairPotential::power_law(lambda, a, 1)?;

    println!("cutoff norms, d = 1 grid:");
    println!("  Lambda   V_Lambda(0)    ||V_Lambda||   ||tail||_L2(grid)");
    let mut norm_pts = Vec::new();
    for lam in [16.0, 32.0, 64.0, 128.0] {
        let cut = apply_cutoff(&v, lam, &grid)?;
        let vn = cut.v_norm()?;
        norm_pts.push((lam, vn));
        println!(
            "  {lam:6}   {:11.4}   {:11.4}    {:.5}",
            cut.v_cut[0],
            vn,
            cut.tail_l2_grid()
        );
    }
    let fit = rate_fit(&norm_pts)?;
    println!(
        "  fitted ||V_Lambda|| ~ Lambda^{:.3}   (bound exponent 1 + a = {:.1})",
        fit.beta,
        1.0 + a
    );

    println!("\ntail L^p decay, d = 3 radial quadrature:");
    for p in [2.0, 2.5] {
        let mut pts = Vec::new();
        for lam in [4.0, 8.0, 16.0, 32.0] {
            pts.push((lam, tail_lp_norm_radial(lambda, a, 3, lam, p)?));
        }
        let fit = rate_fit(&pts)?;
        println!(
            "  p = {p}: slope {:+.4}   (predicted -(d/p - a) = {:+.4})",
            fit.beta,
            -(3.0 / p - a)
        );
    }
    Ok(())
}
