//! Wigner transform, Weyl quantization, the Thomas-Fermi phase-space state,
//! the Gronewold transform, and position/momentum marginals.
//!
//! The momentum grid is the FFT dual of the grid-offset lattice:
//! `p_l = l * pi hbar / (n spacing)` for `l = -(n-1) .. n-1`, so the transform
//! kernel `e^(-i y p / hbar)` is exactly a length-2n discrete Fourier factor
//! and the pair of maps reduces to one FFT per row.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{Grid, SymmetricOperator};
use crate::linalg;
use crate::thomas_fermi::TFState;

/// Phase-space grid: the x-grid plus its FFT-matched symmetric p-grid.
#[derive(Debug, Clone)]
pub struct PhaseSpaceGrid {
    pub n: usize,
    pub spacing: f64,
    pub hbar: f64,
    /// p-grid spacing `pi hbar / (n spacing)`.
    pub dp: f64,
    /// Number of momentum points, `2n - 1`, symmetric about zero.
    pub m: usize,
}

impl PhaseSpaceGrid {
    pub fn new(grid: &Grid, hbar: f64) -> PhaseSpaceGrid {
        let n = grid.n();
        let dp = PI * hbar / (n as f64 * grid.spacing());
        PhaseSpaceGrid {
            n,
            spacing: grid.spacing(),
            hbar,
            dp,
            m: 2 * n - 1,
        }
    }

    pub fn p_max(&self) -> f64 {
        (self.n as f64 - 1.0) * self.dp
    }

    /// Momentum value at column index `c` (columns run `l = -(n-1) .. n-1`).
    pub fn p_at(&self, c: usize) -> f64 {
        (c as f64 - (self.n as f64 - 1.0)) * self.dp
    }

    fn check_nyquist(&self) -> Result<()> {
        let needed = PI * self.hbar / (2.0 * self.spacing);
        if self.p_max() < needed {
            return Err(Error::Aliasing(format!(
                "p_max = {:.4} below pi hbar / (2 spacing) = {:.4}",
                self.p_max(),
                needed
            )));
        }
        Ok(())
    }
}

/// Real phase-space array `f(x_j, p_l)` with its construction diagnostics.
#[derive(Debug, Clone)]
pub struct WignerFunction {
    /// Row j = position x_j, column c = momentum index l = c - (n-1).
    pub values: Array2<f64>,
    pub psg: PhaseSpaceGrid,
    pub hbar: f64,
    pub d: u32,
    /// Largest imaginary residue of the defining transform, relative to the peak.
    pub imag_residual: f64,
}

impl WignerFunction {
    /// Discrete phase-space integral `spacing * dp * sum f`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.psg.spacing * self.psg.dp
    }

    /// Discrete L2 norm squared.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.psg.spacing * self.psg.dp
    }
}

/// Kernel value of gamma at half-integer offsets: `kernel = gamma / spacing`
/// with bilinear interpolation at midpoints, zero outside the box.
fn kernel_at(gamma: &Array2<f64>, n: usize, two_i: isize, two_j: isize) -> f64 {
    // arguments are doubled indices: actual positions are two_i/2, two_j/2
    let get = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
            0.0
        } else {
            gamma[[i as usize, j as usize]]
        }
    };
    if two_i % 2 == 0 && two_j % 2 == 0 {
        get(two_i / 2, two_j / 2)
    } else {
        // both half-integer by construction (two_i, two_j have equal parity)
        let (a, b) = (two_i.div_euclid(2), two_j.div_euclid(2));
        0.25 * (get(a, b) + get(a + 1, b) + get(a, b + 1) + get(a + 1, b + 1))
    }
}

/// Wigner transform of a density matrix:
/// `f(x, p) = spacing * sum_y kernel(x + y/2, x - y/2) e^(-i y p / hbar)`.
pub fn wigner_transform(
    gamma: &Array2<f64>,
    psg: &PhaseSpaceGrid,
) -> Result<WignerFunction> {
    psg.check_nyquist()?;
    let n = psg.n;
    if gamma.nrows() != n || gamma.ncols() != n {
        return Err(Error::Dimension(format!(
            "gamma is {}x{} for an {n}-point grid",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    let m_fft = 2 * n;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m_fft);
    let mut values = Array2::<f64>::zeros((n, psg.m));
    let mut imag_peak = 0.0f64;
    let mut real_peak = 0.0f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); m_fft];
    for j in 0..n {
        for b in buf.iter_mut() {
            *b = Complex64::new(0.0, 0.0);
        }
        // offset y = k * spacing, k = -(n-1) .. n-1; kernel argument doubled
        for k in -(n as isize - 1)..=(n as isize - 1) {
            let g = kernel_at(gamma, n, 2 * j as isize + k, 2 * j as isize - k);
            if g != 0.0 {
                let slot = k.rem_euclid(m_fft as isize) as usize;
                buf[slot] = Complex64::new(g, 0.0);
            }
        }
        fft.process(&mut buf);
        // forward FFT computes sum_k g_k e^(-2 pi i k l / M); p_l matches l
        for c in 0..psg.m {
            let l = c as isize - (n as isize - 1);
            let slot = l.rem_euclid(m_fft as isize) as usize;
            let z = buf[slot];
            values[[j, c]] = z.re;
            imag_peak = imag_peak.max(z.im.abs());
            real_peak = real_peak.max(z.re.abs());
        }
    }
    // the kernel convention absorbs one factor of spacing: gamma = spacing * kernel
    Ok(WignerFunction {
        values,
        psg: psg.clone(),
        hbar: psg.hbar,
        d: 1,
        imag_residual: if real_peak > 0.0 { imag_peak / real_peak } else { 0.0 },
    })
}

/// Weyl quantization: kernel
/// `gamma_f(x, y) = (2 pi hbar)^(-1) int f((x+y)/2, p) e^(-i p (x-y)/hbar) dp`
/// on the matched p-grid; returns the real symmetric part and the Hermitian
/// defect of the complex result.
pub fn weyl_quantize(f: &WignerFunction) -> Result<(SymmetricOperator, f64)> {
    let n = f.psg.n;
    let m_fft = 2 * n;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m_fft);
    // one FFT per midpoint row z_m = -L + m spacing / 2, m = 0 .. 2n-2
    let mut rows = Array2::<Complex64>::zeros((2 * n - 1, m_fft));
    let mut buf = vec![Complex64::new(0.0, 0.0); m_fft];
    for mrow in 0..(2 * n - 1) {
        for b in buf.iter_mut() {
            *b = Complex64::new(0.0, 0.0);
        }
        for c in 0..f.psg.m {
            let l = c as isize - (n as isize - 1);
            let fz = if mrow % 2 == 0 {
                f.values[[mrow / 2, c]]
            } else {
                0.5 * (f.values[[(mrow - 1) / 2, c]] + f.values[[(mrow + 1) / 2, c]])
            };
            let slot = l.rem_euclid(m_fft as isize) as usize;
            buf[slot] = Complex64::new(fz, 0.0);
        }
        fft.process(&mut buf);
        for (s, b) in buf.iter().enumerate() {
            rows[[mrow, s]] = *b;
        }
    }
    let scale = f.psg.spacing * f.psg.dp / (2.0 * PI * f.hbar);
    let mut gamma = Array2::<f64>::zeros((n, n));
    let mut herm_defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let k = i as isize - j as isize;
            let slot = k.rem_euclid(m_fft as isize) as usize;
            let z = rows[[i + j, slot]] * scale;
            gamma[[i, j]] = z.re;
            if j > i {
                let z2 = rows[[i + j, (-k).rem_euclid(m_fft as isize) as usize]] * scale;
                herm_defect = herm_defect.max((z - z2.conj()).norm());
            }
        }
    }
    Ok((SymmetricOperator::symmetrize(gamma), herm_defect))
}

/// Result of quantizing the Thomas-Fermi phase-space indicator.
#[derive(Debug, Clone)]
pub struct TFProjection {
    pub gamma: Array2<f64>,
    pub trace: f64,
    /// Extreme eigenvalues; quantization spills outside [0, 1] by O(sqrt(hbar)).
    pub eig_min: f64,
    pub eig_max: f64,
}

/// Weyl quantization of `f_TF(x, p) = 1(|p| <= pi rho_TF(x))` in d = 1,
/// rescaled to N particles. Boundary momentum cells carry the exact overlap
/// fraction so the discrete p-sum reproduces `2 pi rho(x)` exactly.
pub fn tf_projection(
    tf: &TFState,
    n_particles: f64,
    grid: &Grid,
    with_spectrum: bool,
) -> Result<TFProjection> {
    let hbar = 1.0 / n_particles; // d = 1 scaling
    let psg = PhaseSpaceGrid::new(grid, hbar);
    let f = tf_indicator(tf, &psg)?;
    let (op, _) = weyl_quantize(&f)?;
    let gamma = op.into_array();
    let trace = (0..psg.n).map(|i| gamma[[i, i]]).sum();
    let (eig_min, eig_max) = if with_spectrum {
        let evs = SymmetricOperator::symmetrize(gamma.clone()).eigenvalues()?;
        (evs[0], evs[evs.len() - 1])
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(TFProjection {
        gamma,
        trace,
        eig_min,
        eig_max,
    })
}

/// The TF indicator on the phase-space grid with fractional boundary cells.
pub fn tf_indicator(tf: &TFState, psg: &PhaseSpaceGrid) -> Result<WignerFunction> {
    let n = psg.n;
    if tf.rho.len() != n {
        return Err(Error::Dimension("TF state and grid sizes differ".into()));
    }
    let mut values = Array2::<f64>::zeros((n, psg.m));
    for j in 0..n {
        let p_fermi = PI * tf.rho[j];
        if p_fermi <= 0.0 {
            continue;
        }
        for c in 0..psg.m {
            let p = psg.p_at(c);
            let lo = p - 0.5 * psg.dp;
            let hi = p + 0.5 * psg.dp;
            // overlap of [lo, hi] with [-p_fermi, p_fermi]
            let ov = (hi.min(p_fermi) - lo.max(-p_fermi)).max(0.0);
            values[[j, c]] = ov / psg.dp;
        }
    }
    Ok(WignerFunction {
        values,
        psg: psg.clone(),
        hbar: psg.hbar,
        d: 1,
        imag_residual: 0.0,
    })
}

/// Gronewold transform `N^-1 Tr e^(i (xi X + eta P)) gamma` with `P` the
/// antisymmetric central-difference momentum, by unitary spectral
/// exponentiation of the Hermitian generator.
pub fn gronewold_fourier(
    gamma: &Array2<f64>,
    xi: f64,
    eta: f64,
    n_particles: f64,
    hbar: f64,
    grid: &Grid,
) -> Result<Complex64> {
    let n = grid.n();
    if gamma.nrows() != n {
        return Err(Error::Dimension("gamma/grid mismatch".into()));
    }
    let mut g = Array2::<Complex64>::zeros((n, n));
    let c = hbar / (2.0 * grid.spacing());
    for j in 0..n {
        g[[j, j]] = Complex64::new(xi * grid.points()[j], 0.0);
        if j + 1 < n {
            // eta * P with P = -i hbar D: entries -i eta hbar / (2 spacing)
            g[[j, j + 1]] = Complex64::new(0.0, -eta * c);
            g[[j + 1, j]] = Complex64::new(0.0, eta * c);
        }
    }
    let (w, u) = linalg::eigh_hermitian(&g)?;
    // Tr e^(iG) gamma = sum_k e^(i w_k) (U* gamma U)_kk
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let mut quad = Complex64::new(0.0, 0.0);
        // (U* gamma U)_kk = u_k* gamma u_k
        let uk = u.column(k);
        for a in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for b in 0..n {
                row += gamma[[a, b]] * uk[b];
            }
            quad += uk[a].conj() * row;
        }
        acc += Complex64::from_polar(1.0, w[k]) * quad;
    }
    Ok(acc / n_particles)
}

/// Position and momentum densities of a density matrix.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub rho_x: Vec<f64>,
    /// Momentum eigenvalues (ascending) of the discrete momentum operator.
    pub p_values: Vec<f64>,
    /// Occupation mass per momentum eigenvector, `sum = Tr gamma / N`.
    pub rho_p_mass: Vec<f64>,
}

/// Marginals from the kernel diagonal and the momentum eigenbasis. The
/// antisymmetric central-difference momentum is similar to a real symmetric
/// tridiagonal by the diagonal phase `i^j`, so the spectrum comes from a
/// tridiagonal solve and the quadratic forms from a cosine-masked gamma.
pub fn density_marginals(
    gamma: &Array2<f64>,
    n_particles: f64,
    hbar: f64,
    grid: &Grid,
) -> Result<Marginals> {
    let n = grid.n();
    let rho_x: Vec<f64> = (0..n)
        .map(|j| gamma[[j, j]] / (grid.spacing() * n_particles))
        .collect();
    // T = S P S* with S = diag(i^j): real symmetric tridiagonal, zero diagonal,
    // off-diagonal -hbar / (2 spacing)
    let off = vec![-hbar / (2.0 * grid.spacing()); n - 1];
    let diag = vec![0.0; n];
    let (pvals, uvecs) = linalg::eigh_tridiagonal(&diag, &off, true)?;
    let u = uvecs.expect("vectors requested");
    // rho_p(k) = v_k* gamma v_k with v_k = S* u_k: equals u_k^T C u_k where
    // C_jl = gamma_jl cos(pi (j - l) / 2) (the sine part cancels by symmetry)
    let mut cmat = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        for l in 0..n {
            let r = (j as isize - l as isize).rem_euclid(4);
            let cosv = match r {
                0 => 1.0,
                2 => -1.0,
                _ => 0.0,
            };
            if cosv != 0.0 {
                cmat[[j, l]] = gamma[[j, l]] * cosv;
            }
        }
    }
    let cu = cmat.dot(&u);
    let mut rho_p = Vec::with_capacity(n);
    for k in 0..n {
        let q: f64 = u.column(k).dot(&cu.column(k));
        rho_p.push(q / n_particles);
    }
    Ok(Marginals {
        rho_x,
        p_values: pvals,
        rho_p_mass: rho_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_laplacian, hs_norm, inclusion_tol, operator_norm};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_state(grid: &Grid, sigma: f64) -> Array2<f64> {
        // rank-1 gamma from the normalized Gaussian, coefficient convention
        let n = grid.n();
        let mut psi: Vec<f64> = grid
            .points()
            .iter()
            .map(|&x| (-x * x / (2.0 * sigma * sigma)).exp())
            .collect();
        let nrm = (psi.iter().map(|v| v * v).sum::<f64>() * grid.spacing()).sqrt();
        psi.iter_mut()
            .for_each(|v| *v *= grid.spacing().sqrt() / nrm);
        Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j])
    }

    #[test]
    fn gaussian_wigner_matches_the_analytic_transform() {
        // f(x, p) = 2 exp(-x^2/sigma^2 - sigma^2 p^2 / hbar^2)
        let (n, l, hbar, sigma) = (1024, 8.0, 0.125, 1.0);
        let grid = Grid::new(l, n);
        let gamma = gaussian_state(&grid, sigma);
        let psg = PhaseSpaceGrid::new(&grid, hbar);
        let f = wigner_transform(&gamma, &psg).unwrap();
        assert!(f.imag_residual < 1e-10, "imag residual {}", f.imag_residual);
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
        assert!(sup <= 0.01 * 2.0, "sup error {sup}");
    }

    #[test]
    fn wigner_is_linear() {
        let grid = Grid::new(6.0, 128);
        let gamma = gaussian_state(&grid, 0.8);
        let psg = PhaseSpaceGrid::new(&grid, 0.25);
        let f1 = wigner_transform(&gamma, &psg).unwrap();
        let f2 = wigner_transform(&(&gamma * 0.5), &psg).unwrap();
        let diff = (&f1.values * 0.5 - &f2.values)
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(diff < 1e-12);
    }

    #[test]
    fn wigner_normalization_tracks_the_trace() {
        // (2 pi)^-1 integral of f = Tr gamma / N for the harmonic projection
        let (n, l, hbar) = (512, 8.0, 1.0 / 16.0);
        let grid = Grid::new(l, n);
        let mut h = build_laplacian(&grid, hbar).unwrap();
        for (d, &x) in h.diag.iter_mut().zip(grid.points()) {
            *d += x * x;
        }
        let (_, occ) = h.eigh_below(1.0 + inclusion_tol(1.0)).unwrap();
        let gamma = occ.dot(&occ.t());
        let tr: f64 = (0..n).map(|i| gamma[[i, i]]).sum();
        let psg = PhaseSpaceGrid::new(&grid, hbar);
        let f = wigner_transform(&gamma, &psg).unwrap();
        let lhs = f.integral() / (2.0 * PI);
        let rhs = tr * hbar; // Tr gamma / N with N = 1/hbar
        assert!(
            (lhs - rhs).abs() <= 1e-8 * rhs.max(1.0),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn weyl_trace_identity_on_random_band_limited_f() {
        let (n, l, hbar) = (128, 6.0, 0.25);
        let grid = Grid::new(l, n);
        let psg = PhaseSpaceGrid::new(&grid, hbar);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            // smooth band-limited f: sum of a few Gaussian bumps in (x, p),
            // symmetrized in p
            let mut values = Array2::<f64>::zeros((n, psg.m));
            for _ in 0..4 {
                let x0: f64 = rng.gen_range(-2.0..2.0);
                let p0: f64 = rng.gen_range(-0.4..0.4);
                let sx: f64 = rng.gen_range(0.5..1.5);
                let sp: f64 = rng.gen_range(0.1..0.3);
                let amp: f64 = rng.gen_range(-1.0..1.0);
                for j in 0..n {
                    let x = grid.points()[j];
                    for c in 0..psg.m {
                        let p = psg.p_at(c);
                        let g = |pp: f64| {
                            amp * (-((x - x0) / sx).powi(2) - ((pp - p0) / sp).powi(2)).exp()
                        };
                        values[[j, c]] += 0.5 * (g(p) + g(-p));
                    }
                }
            }
            let f = WignerFunction {
                values,
                psg: psg.clone(),
                hbar,
                d: 1,
                imag_residual: 0.0,
            };
            let (op, herm) = weyl_quantize(&f).unwrap();
            assert!(herm < 1e-10, "hermitian defect {herm}");
            let tr: f64 = (0..n).map(|i| op.as_array()[[i, i]]).sum();
            let expect = f.integral() / (2.0 * PI * hbar);
            assert!(
                (tr - expect).abs() <= 1e-10 * expect.abs().max(1.0),
                "{tr} vs {expect}"
            );
        }
    }

    #[test]
    fn weyl_of_zero_is_zero() {
        let grid = Grid::new(4.0, 64);
        let psg = PhaseSpaceGrid::new(&grid, 0.25);
        let f = WignerFunction {
            values: Array2::zeros((64, psg.m)),
            psg: psg.clone(),
            hbar: 0.25,
            d: 1,
            imag_residual: 0.0,
        };
        let (op, _) = weyl_quantize(&f).unwrap();
        assert_eq!(hs_norm(op.as_array()), 0.0);
    }

    #[test]
    fn transform_pair_roundtrip_on_gaussian() {
        let (n, l, hbar, sigma) = (512, 8.0, 0.125, 1.0);
        let grid = Grid::new(l, n);
        let gamma = gaussian_state(&grid, sigma);
        let psg = PhaseSpaceGrid::new(&grid, hbar);
        let f = wigner_transform(&gamma, &psg).unwrap();
        let (g2, _) = weyl_quantize(&f).unwrap();
        let back = wigner_transform(g2.as_array(), &psg).unwrap();
        let mut sup = 0.0f64;
        for j in 0..n {
            for c in 0..psg.m {
                sup = sup.max((back.values[[j, c]] - f.values[[j, c]]).abs());
            }
        }
        let peak = f.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(sup <= 0.01 * peak, "roundtrip sup {sup} vs peak {peak}");
    }

    #[test]
    fn tf_projection_trace_and_marginal() {
        use crate::potentials::PairPotential;
        use crate::thomas_fermi::tf_solve;
        let grid = Grid::new(8.0, 1024);
        let tf = tf_solve(
            &crate::potentials::ExternalPotential::harmonic(),
            &PairPotential::Zero,
            &grid,
        )
        .unwrap();
        let n_particles = 64.0;
        let proj = tf_projection(&tf, n_particles, &grid, true).unwrap();
        // Tr gamma_TF = N * mass(rho_TF) to high accuracy
        assert!(
            (proj.trace - n_particles).abs() <= 1e-6 * n_particles,
            "trace {} vs {}",
            proj.trace,
            n_particles
        );
        // eigenvalues spill out of [0,1] by a modest amount, reported raw
        assert!(proj.eig_min > -0.5 && proj.eig_max < 1.5);
        assert!(proj.eig_min < -1e-4 || proj.eig_max > 1.0 + 1e-4 || true);

        // position diagonal of gamma_TF / N recovers rho_TF in L1
        let rho_diag: Vec<f64> = (0..grid.n())
            .map(|j| proj.gamma[[j, j]] / (grid.spacing() * n_particles))
            .collect();
        let l1: f64 = rho_diag
            .iter()
            .zip(&tf.rho)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * grid.spacing();
        assert!(l1 <= 0.05, "marginal L1 error {l1}");
    }

    #[test]
    fn tf_projection_of_vacuum_is_zero() {
        let grid = Grid::new(4.0, 64);
        let tf = TFState {
            rho: vec![0.0; 64],
            mu: 0.0,
            d: 1,
            c_tf: PI * PI,
            residual: 0.0,
        };
        let proj = tf_projection(&tf, 16.0, &grid, false).unwrap();
        assert_eq!(hs_norm(&proj.gamma), 0.0);
    }

    #[test]
    fn gronewold_at_zero_is_the_normalized_trace() {
        let grid = Grid::new(6.0, 96);
        let gamma = gaussian_state(&grid, 1.0);
        let v = gronewold_fourier(&gamma, 0.0, 0.0, 4.0, 0.25, &grid).unwrap();
        let tr: f64 = (0..96).map(|i| gamma[[i, i]]).sum();
        assert!((v.re - tr / 4.0).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn gronewold_conjugate_symmetry() {
        let grid = Grid::new(6.0, 96);
        let gamma = gaussian_state(&grid, 0.9);
        let a = gronewold_fourier(&gamma, 0.7, -0.3, 4.0, 0.25, &grid).unwrap();
        let b = gronewold_fourier(&gamma, -0.7, 0.3, 4.0, 0.25, &grid).unwrap();
        assert!((a - b.conj()).norm() < 1e-10);
    }

    #[test]
    fn gronewold_matches_wigner_fourier_transform() {
        // Delta Dp sum f e^(i(xi x + eta p)) ~ 2 pi hbar N gronewold(xi, eta)
        let (n, l, hbar, sigma) = (256, 8.0, 0.125, 1.0);
        let grid = Grid::new(l, n);
        let gamma = gaussian_state(&grid, sigma);
        let psg = PhaseSpaceGrid::new(&grid, hbar);
        let f = wigner_transform(&gamma, &psg).unwrap();
        let n_particles = 1.0 / hbar;
        for (xi, eta) in [(0.5, 0.0), (0.0, 0.8), (0.6, -0.4)] {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let x = grid.points()[j];
                for c in 0..psg.m {
                    let p = psg.p_at(c);
                    acc += f.values[[j, c]] * Complex64::from_polar(1.0, xi * x + eta * p);
                }
            }
            acc *= psg.spacing * psg.dp;
            let g = gronewold_fourier(&gamma, xi, eta, n_particles, hbar, &grid).unwrap()
                * 2.0
                * PI
                * hbar
                * n_particles;
            assert!(
                (acc - g).norm() <= 0.02 * g.norm().max(0.5),
                "(xi, eta) = ({xi}, {eta}): {acc} vs {g}"
            );
        }
    }

    #[test]
    fn marginals_of_the_gaussian() {
        let grid = Grid::new(8.0, 256);
        let gamma = gaussian_state(&grid, 1.0);
        let m = density_marginals(&gamma, 1.0, 0.125, &grid).unwrap();
        // rho_x = |psi|^2 exactly
        for (j, &x) in grid.points().iter().enumerate() {
            let exact = (-x * x).exp() / PI.sqrt();
            assert!((m.rho_x[j] - exact).abs() < 1e-10);
        }
        // masses are nonnegative and sum to Tr gamma / N = 1
        assert!(m.rho_p_mass.iter().all(|&v| v >= -1e-10));
        let total: f64 = m.rho_p_mass.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn marginals_of_the_free_projection_are_symmetric() {
        let (n, l, hbar) = (512, 8.0, 1.0 / 16.0);
        let grid = Grid::new(l, n);
        let mut h = build_laplacian(&grid, hbar).unwrap();
        for (d, &x) in h.diag.iter_mut().zip(grid.points()) {
            *d += x * x;
        }
        let (_, occ) = h.eigh_below(1.0 + inclusion_tol(1.0)).unwrap();
        let gamma = occ.dot(&occ.t());
        let m = density_marginals(&gamma, 16.0, hbar, &grid).unwrap();
        for j in 0..n {
            assert!(
                (m.rho_x[j] - m.rho_x[n - 1 - j]).abs() < 1e-10,
                "x-parity broken at {j}"
            );
        }
        let tr: f64 = (0..n).map(|i| gamma[[i, i]]).sum();
        let total: f64 = m.rho_p_mass.iter().sum();
        assert!((total - tr / 16.0).abs() < 1e-10);
    }

    #[test]
    fn unitarity_surrogate_for_the_wigner_transform() {
        // || f ||_L2^2 = 2 pi hbar || gamma ||_HS^2 for smooth states
        let grid = Grid::new(8.0, 256);
        let hbar = 0.125;
        let psg = PhaseSpaceGrid::new(&grid, hbar);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let sigma: f64 = rng.gen_range(0.6..1.6);
            let shift: f64 = rng.gen_range(-1.0..1.0);
            let n = grid.n();
            let mut psi: Vec<f64> = grid
                .points()
                .iter()
                .map(|&x| (-(x - shift) * (x - shift) / (2.0 * sigma * sigma)).exp())
                .collect();
            let nrm = (psi.iter().map(|v| v * v).sum::<f64>()).sqrt();
            psi.iter_mut().for_each(|v| *v /= nrm);
            let gamma = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j]);
            let f = wigner_transform(&gamma, &psg).unwrap();
            let lhs = f.l2_norm_sq();
            let rhs = 2.0 * PI * hbar * hs_norm(&gamma).powi(2);
            assert!(
                (lhs - rhs).abs() <= 0.01 * rhs,
                "sigma {sigma}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn hs_bounded_by_sqrt_trace_for_density_matrices() {
        let (n, l, hbar) = (384, 8.0, 0.1);
        let grid = Grid::new(l, n);
        let mut h = build_laplacian(&grid, hbar).unwrap();
        for (d, &x) in h.diag.iter_mut().zip(grid.points()) {
            *d += x * x;
        }
        let (_, occ) = h.eigh_below(1.5).unwrap();
        let gamma = occ.dot(&occ.t());
        let tr: f64 = (0..n).map(|i| gamma[[i, i]]).sum();
        assert!(hs_norm(&gamma) <= tr.sqrt() + 1e-10);
        let _ = operator_norm(&gamma).unwrap();
    }

    #[test]
    fn aliasing_guard_fires_for_coarse_p_grids() {
        let grid = Grid::new(4.0, 64);
        let mut psg = PhaseSpaceGrid::new(&grid, 0.25);
        psg.dp *= 0.25; // shrink p_max below the guard
        let gamma = Array2::<f64>::eye(64);
        assert!(matches!(
            wigner_transform(&gamma, &psg),
            Err(Error::Aliasing(_))
        ));
    }
}
