//! Cross-scale diagnostics: Weyl-law eigenvalue counts, spectral window
//! counts, Hartree-vs-Thomas-Fermi convergence sweeps with rate fits, the
//! number-estimate experiment wiring the lattice and Fock layers together,
//! and the scalar-term checks.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    ph::{fluctuation_number, particle_hole, rdm_difference_check},
    ground_state, FockSpace, NBodySector, PairTensor,
};
use crate::hartree::{commutator_report, scf_solve, HartreeState, ScfParams};
use crate::lattice::{build_laplacian, hs_norm, inclusion_tol, trace_norm, Grid, Tridiagonal};
use crate::phase_space::{tf_indicator, tf_projection, wigner_transform, PhaseSpaceGrid};
use crate::potentials::{offset_table, ExternalPotential, PairPotential};
use crate::thomas_fermi::{counting_function, tf_solve, unit_ball_volume, TFState};

/// Configuration of a convergence sweep over particle numbers.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Ascending particle numbers (at least 3).
    pub n_list: Vec<u64>,
    pub external: ExternalPotential,
    pub pair: PairPotential,
    pub scf: ScfParams,
    pub grid_points: usize,
    pub box_half_length: f64,
    /// Frequencies for the Fourier commutator diagnostic.
    pub xi_samples: Vec<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.len() < 3 {
            return Err(Error::Range("sweep needs at least 3 particle numbers".into()));
        }
        if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Range("particle numbers must be ascending".into()));
        }
        Ok(())
    }
}

/// One row of the sweep, keyed by decreasing hbar.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n_particles: u64,
    pub hbar: f64,
    /// `|| gamma_H - gamma_TF ||_Tr / Tr gamma_TF`
    pub trace_dist: f64,
    /// `|| gamma_H - gamma_TF ||_HS / Tr gamma_TF`
    pub hs_dist: f64,
    /// `|| f_H - f_TF ||_L2` on the phase-space grid
    pub wigner_l2: f64,
    /// `|| rho_H - rho_TF ||_L1`
    pub density_l1: f64,
    /// `| Tr gamma_H - N | / N`
    pub trace_gap: f64,
    pub scf_residual: f64,
    pub x_comm: f64,
    pub p_comm: f64,
    pub fourier_comm_max: f64,
    pub failed: bool,
}

/// Sweep output with least-squares rate fits.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub rows: Vec<SweepRow>,
    pub mu: f64,
    pub beta: f64,
    pub fit_residual: f64,
    pub beta_logcorrected: f64,
    /// True when the fit fell back to the three smallest hbar values.
    pub fit_restricted: bool,
}

/// Ordinary least-squares slope of y against x.
fn ols_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let res = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let p = slope * a + intercept;
            (b - p) * (b - p)
        })
        .sum::<f64>()
        .sqrt()
        / (n.sqrt());
    (slope, res)
}

/// Rate fit on `(hbar, value)` pairs: plain log-log slope and the
/// log-corrected variant fitting `value / |ln hbar|^(1/2)`.
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub beta: f64,
    pub residual: f64,
    pub beta_logcorrected: f64,
}

pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::FitDomain(format!(
            "need >= 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(h, v)| !(h > 0.0) || !(v > 0.0)) {
        return Err(Error::FitDomain("values and hbar must be positive".into()));
    }
    let x: Vec<f64> = points.iter().map(|&(h, _)| h.ln()).collect();
    let y: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
    let (beta, residual) = ols_slope(&x, &y);
    let ylc: Vec<f64> = points
        .iter()
        .map(|&(h, v)| (v / h.ln().abs().sqrt()).ln())
        .collect();
    let (beta_lc, _) = ols_slope(&x, &ylc);
    Ok(RateFit {
        beta,
        residual,
        beta_logcorrected: beta_lc,
    })
}

/// Runs the convergence sweep: one shared TF solve, one SCF per particle
/// number, distances against the Weyl-quantized TF state.
pub fn convergence_sweep(cfg: &SweepConfig) -> Result<RateReport> {
    cfg.validate()?;
    let grid = Grid::new(cfg.box_half_length, cfg.grid_points);
    let tf = tf_solve(&cfg.external, &cfg.pair, &grid)?;
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let nf = n as f64;
        let hbar = 1.0 / nf; // d = 1
        let state = match scf_solve(&cfg.external, &cfg.pair, tf.mu, cfg.scf, nf, hbar, &grid) {
            Ok(s) => s,
            Err(Error::ScfDiverged { last, .. }) => {
                rows.push(SweepRow {
                    n_particles: n,
                    hbar,
                    trace_dist: f64::NAN,
                    hs_dist: f64::NAN,
                    wigner_l2: f64::NAN,
                    density_l1: f64::NAN,
                    trace_gap: f64::NAN,
                    scf_residual: last,
                    x_comm: f64::NAN,
                    p_comm: f64::NAN,
                    fourier_comm_max: f64::NAN,
                    failed: true,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let proj = tf_projection(&tf, nf, &grid, false)?;
        let gamma_h = state.gamma_dense();
        let diff = &gamma_h - &proj.gamma;
        let tr_tf = proj.trace;
        let trace_dist = trace_norm(&diff)? / tr_tf;
        let hs_dist = hs_norm(&diff) / tr_tf;

        let psg = PhaseSpaceGrid::new(&grid, hbar);
        let f_h = wigner_transform(&gamma_h, &psg)?;
        let f_tf = tf_indicator(&tf, &psg)?;
        let wigner_l2 = {
            let d2 = (&f_h.values - &f_tf.values)
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                * psg.spacing
                * psg.dp;
            d2.sqrt()
        };
        let density_l1: f64 = state
            .rho
            .iter()
            .zip(&tf.rho)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * grid.spacing();
        let comm = commutator_report(&state.occ, hbar, nf, &cfg.xi_samples, &grid)?;
        rows.push(SweepRow {
            n_particles: n,
            hbar,
            trace_dist,
            hs_dist,
            wigner_l2,
            density_l1,
            trace_gap: (state.trace() - nf).abs() / nf,
            scf_residual: state.residual,
            x_comm: comm.x_comm,
            p_comm: comm.p_comm,
            fourier_comm_max: comm.fourier_comm_max,
            failed: false,
        });
    }
    // fit beta on trace_dist over the successful rows
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.failed && r.trace_dist > 0.0)
        .map(|r| (r.hbar, r.trace_dist))
        .collect();
    let (beta, fit_residual, beta_lc, restricted) = if pts.len() >= 3 {
        let fit = rate_fit(&pts)?;
        if fit.residual > 0.1 && pts.len() > 3 {
            // pre-asymptotic pollution: refit on the three smallest hbar
            let mut sorted = pts.clone();
            sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let small: Vec<(f64, f64)> = sorted.into_iter().take(3).collect();
            let fit2 = rate_fit(&small)?;
            (fit2.beta, fit2.residual, fit2.beta_logcorrected, true)
        } else {
            (fit.beta, fit.residual, fit.beta_logcorrected, false)
        }
    } else {
        (f64::NAN, f64::NAN, f64::NAN, false)
    };
    Ok(RateReport {
        rows,
        mu: tf.mu,
        beta,
        fit_residual,
        beta_logcorrected: beta_lc,
        fit_restricted: restricted,
    })
}

/// Weyl-law diagnostic for `-hbar^2 Lap + W`.
#[derive(Debug, Clone, Serialize)]
pub struct WeylLawReport {
    pub count: usize,
    pub phase_volume: f64,
    pub deficit: f64,
}

pub fn weyl_law_check(w_values: &[f64], hbar: f64, grid: &Grid) -> Result<WeylLawReport> {
    let mut h = build_laplacian(grid, hbar)?;
    for (d, w) in h.diag.iter_mut().zip(w_values) {
        *d += w;
    }
    let count = h.count_below(inclusion_tol(0.0));
    let df = 1.0;
    let volume = (2.0 * std::f64::consts::PI * hbar).powf(-df)
        * unit_ball_volume(1)
        * grid.spacing()
        * w_values
            .iter()
            .map(|&w| (-w).max(0.0).sqrt())
            .sum::<f64>();
    Ok(WeylLawReport {
        count,
        phase_volume: volume,
        deficit: (count as f64 - volume).abs(),
    })
}

/// Eigenvalue count of the Hartree Hamiltonian in `[mu - eps, mu + eps]`.
#[derive(Debug, Clone, Serialize)]
pub struct WindowReport {
    pub eps: f64,
    pub count: usize,
    /// `count / (N (eps + hbar))`
    pub bound_ratio: f64,
}

pub fn window_count_check(
    state: &HartreeState,
    u: &[f64],
    eps: f64,
    grid: &Grid,
) -> Result<WindowReport> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Range(format!("eps must be in (0, 0.5), got {eps}")));
    }
    let h = hamiltonian_of_state(state, u, grid)?;
    let lo = state.mu - eps;
    let hi = state.mu + eps;
    let count = h.count_below(hi + inclusion_tol(hi)) - h.count_below(lo - inclusion_tol(lo));
    Ok(WindowReport {
        eps,
        count,
        bound_ratio: count as f64 / (state.n_particles * (eps + state.hbar)),
    })
}

/// Rebuilds the converged tridiagonal Hartree Hamiltonian from a state.
pub fn hamiltonian_of_state(
    state: &HartreeState,
    u: &[f64],
    grid: &Grid,
) -> Result<Tridiagonal> {
    let mut h = build_laplacian(grid, state.hbar)?;
    // w_eff = U + V*rho - mu, so the Hamiltonian diagonal is w_eff + mu + lap
    for ((d, w), _uu) in h.diag.iter_mut().zip(&state.w_eff).zip(u) {
        *d += w + state.mu;
    }
    Ok(h)
}

/// One row of the number-estimate experiment.
#[derive(Debug, Clone, Serialize)]
pub struct NumberEstimateRow {
    pub lambda: f64,
    /// `<Omega, N Omega>` for the fluctuation vector around the reference.
    pub fluctuation: f64,
    /// Identity cross-check difference (two evaluation routes).
    pub fluctuation_identity_gap: f64,
    /// `|| gamma_Psi - gamma ||_Tr` in mode space.
    pub rdm_trace_dist: f64,
    /// Residual of the four-term field-operator identity.
    pub rdm_identity_residual: f64,
    /// Exact sector ground energy.
    pub e0: f64,
    /// Hartree-Fock energy of the trace-N truncation (mode space).
    pub e_hf: f64,
    pub mu: f64,
}

/// Configuration for the number-estimate experiment.
#[derive(Debug, Clone)]
pub struct NumberEstimateConfig {
    pub modes: usize,
    pub n_particles: usize,
    pub lambda_list: Vec<f64>,
    pub grid_points: usize,
    pub box_half_length: f64,
    pub pair_exponent: f64,
}

impl Default for NumberEstimateConfig {
    fn default() -> Self {
        NumberEstimateConfig {
            modes: 8,
            n_particles: 3,
            lambda_list: vec![0.0, 0.01, 0.02, 0.04, 0.08],
            grid_points: 256,
            box_half_length: 6.0,
            pair_exponent: 0.5,
        }
    }
}

/// For each coupling: Hartree reference on the lattice, compression to the
/// Hartree eigenbasis, exact N-body ground state, fluctuation number, and the
/// reduced-density distance with its trace bound.
pub fn number_estimate_experiment(cfg: &NumberEstimateConfig) -> Result<Vec<NumberEstimateRow>> {
    let grid = Grid::new(cfg.box_half_length, cfg.grid_points);
    let u = ExternalPotential::harmonic();
    let ug = u.on_grid(&grid)?;
    let space = FockSpace::new(cfg.modes)?;
    let np = cfg.n_particles;
    let nf = np as f64;
    let hbar = 1.0 / nf;
    let mut rows = Vec::new();
    for &lambda in &cfg.lambda_list {
        let pair = if lambda == 0.0 {
            PairPotential::Zero
        } else {
            PairPotential::power_law(lambda, cfg.pair_exponent, 1)?
        };
        let tf = tf_solve(&u, &pair, &grid)?;
        let state = scf_solve(&u, &pair, tf.mu, ScfParams::default(), nf, hbar, &grid)?;
        // Hartree eigenbasis: lowest M eigenvectors of the converged H_gamma
        let h_lattice = hamiltonian_of_state(&state, &ug, &grid)?;
        let (evs, vecs) = h_lattice.eigh_below(f64::INFINITY)?;
        let _ = evs;
        let modes = vecs.slice(ndarray::s![.., ..cfg.modes]).to_owned();
        // bare one-body part in the mode basis
        let mut free = build_laplacian(&grid, hbar)?;
        for (d, uu) in free.diag.iter_mut().zip(&ug) {
            *d += uu;
        }
        let free_dense = free.to_dense();
        let h_modes = modes.t().dot(free_dense.as_array()).dot(&modes);
        let w = if pair.is_zero() {
            PairTensor::zeros(cfg.modes)
        } else {
            PairTensor::from_offset_table(&offset_table(&pair, &grid)?, &modes)?
        };
        let h_fock = space.hamiltonian(&h_modes, &w, nf)?;
        let sector = NBodySector::new(&space, &h_fock, np);
        let gs = ground_state(&sector)?;
        let psi = sector.embed(&gs.psi_sector, space.dim);
        let occupied: Vec<usize> = (0..np).collect();
        let ph = particle_hole(&space, &occupied)?;
        let (fluct, fluct_id) = fluctuation_number(&space, &psi, &ph)?;
        let rdm = rdm_difference_check(&space, &psi, &ph)?;
        // Hartree-Fock energy of the trace-N truncation omega (Slater on the
        // N lowest Hartree modes), evaluated in mode space
        let e_hf = slater_hf_energy(&h_modes, &w, &occupied, nf);
        rows.push(NumberEstimateRow {
            lambda,
            fluctuation: fluct,
            fluctuation_identity_gap: (fluct - fluct_id).abs(),
            rdm_trace_dist: rdm.trace_distance,
            rdm_identity_residual: rdm.identity_residual,
            e0: gs.energy,
            e_hf,
            mu: tf.mu,
        });
    }
    Ok(rows)
}

/// Hartree-Fock energy of a Slater determinant over `occupied` in mode space:
/// `sum h_ii + (2N)^-1 sum_{a,b in S} (W[(a,a),(b,b)] - W[(a,b),(a,b)])`.
pub fn slater_hf_energy(
    h_modes: &Array2<f64>,
    w: &PairTensor,
    occupied: &[usize],
    n_particles: f64,
) -> f64 {
    let e: f64 = occupied.iter().map(|&i| h_modes[[i, i]]).sum();
    let mut pair = 0.0;
    for &a in occupied {
        for &b in occupied {
            pair += w.get(a, a, b, b) - w.get(a, b, a, b);
        }
    }
    e + pair / (2.0 * n_particles)
}

/// Scalar-term diagnostics: the trace asymptotics
/// `Tr 1_(-inf, nu](H_gamma) ~ N F(nu)` across a window around mu, and the
/// sandwich `gamma_- <= omega <= gamma_+` as matrix inequalities.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarTermReport {
    /// Max of `|count(nu) - N F(nu)| / N` over the scanned window.
    pub max_f_deficit: f64,
    /// Minimum eigenvalue of `omega - gamma_-` (should be >= -1e-10).
    pub sandwich_lower: f64,
    /// Minimum eigenvalue of `gamma_+ - omega` (should be >= -1e-10).
    pub sandwich_upper: f64,
    /// Window half-width actually used for the sandwich.
    pub eps_used: f64,
}

pub fn scalar_term_check(
    state: &HartreeState,
    tf: &TFState,
    u: &[f64],
    v: &PairPotential,
    grid: &Grid,
) -> Result<ScalarTermReport> {
    let h = hamiltonian_of_state(state, u, grid)?;
    let nf = state.n_particles;
    let mut max_f_deficit = 0.0f64;
    for k in 0..=20 {
        let nu = state.mu - 0.2 + 0.02 * k as f64;
        let count = h.count_below(nu + inclusion_tol(nu)) as f64;
        let f = counting_function(nu, tf, u, v, grid)?;
        max_f_deficit = max_f_deficit.max((count - nf * f).abs() / nf);
    }

    // sandwich: find eps with count(mu - eps) <= N <= count(mu + eps)
    let n_int = nf.round() as usize;
    let mut eps = state.hbar;
    let mut found = None;
    for _ in 0..20 {
        let lo = h.count_below(state.mu - eps);
        let hi = h.count_below(state.mu + eps + inclusion_tol(state.mu + eps));
        if lo <= n_int && n_int <= hi {
            found = Some(eps);
            break;
        }
        eps *= 1.5;
    }
    let eps = found.ok_or_else(|| Error::Range("no sandwich window found".into()))?;
    let (_, occ_minus) = h.eigh_below(state.mu - eps)?;
    let (_, occ_plus) = h.eigh_below(state.mu + eps + inclusion_tol(state.mu + eps))?;
    let (_, occ_all) = h.eigh_below(f64::INFINITY)?;
    let omega_cols = occ_all.slice(ndarray::s![.., ..n_int]).to_owned();

    let min_eig_diff = |big: &Array2<f64>, small: &Array2<f64>| -> Result<f64> {
        let d = big.dot(&big.t()) - small.dot(&small.t());
        let evs = crate::lattice::SymmetricOperator::symmetrize(d).eigenvalues()?;
        Ok(evs[0])
    };
    let sandwich_lower = min_eig_diff(&omega_cols, &occ_minus)?;
    let sandwich_upper = min_eig_diff(&occ_plus, &omega_cols)?;
    Ok(ScalarTermReport {
        max_f_deficit,
        sandwich_lower,
        sandwich_upper,
        eps_used: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_fit_recovers_planted_exponents() {
        let pts: Vec<(f64, f64)> = (3..8).map(|k| {
            let h = 0.5f64.powi(k);
            (h, h.sqrt())
        }).collect();
        let fit = rate_fit(&pts).unwrap();
        assert!((fit.beta - 0.5).abs() < 1e-12, "beta = {}", fit.beta);
        assert!(fit.residual < 1e-12);

        let flat: Vec<(f64, f64)> = (3..8).map(|k| (0.5f64.powi(k), 2.7)).collect();
        let fit = rate_fit(&flat).unwrap();
        assert!(fit.beta.abs() < 1e-12);

        // log-corrected data: v = h^0.5 |ln h|^0.5
        let lc: Vec<(f64, f64)> = (3..10)
            .map(|k| {
                let h = 0.5f64.powi(k);
                (h, h.sqrt() * h.ln().abs().sqrt())
            })
            .collect();
        let fit = rate_fit(&lc).unwrap();
        assert!(
            (fit.beta_logcorrected - 0.5).abs() < 1e-10,
            "beta_lc = {}",
            fit.beta_logcorrected
        );
        assert!(fit.beta < 0.5);

        assert!(rate_fit(&[(0.5, 1.0), (0.25, 0.5)]).is_err());
        assert!(rate_fit(&[(0.5, 1.0), (0.25, 0.5), (0.125, -0.2)]).is_err());
    }

    #[test]
    fn weyl_law_on_the_harmonic_well() {
        // W = x^2 - 1: count = #{hbar(2k+1) <= 1}, volume = 1/(2 hbar)
        let grid = Grid::new(6.0, 6144);
        let w: Vec<f64> = grid.points().iter().map(|&x| x * x - 1.0).collect();
        for k in 3..=7 {
            let hbar = 0.5f64.powi(k);
            let rep = weyl_law_check(&w, hbar, &grid).unwrap();
            let exact = 1.0 / (2.0 * hbar);
            assert_eq!(rep.count as f64, exact, "count at hbar = {hbar}");
            assert!(rep.deficit <= 2.0, "deficit {} at hbar = {hbar}", rep.deficit);
        }
        // nonnegative W: degenerate zero report
        let wpos: Vec<f64> = grid.points().iter().map(|&x| x * x + 0.5).collect();
        let rep = weyl_law_check(&wpos, 0.125, &grid).unwrap();
        assert_eq!(rep.count, 0);
        assert_eq!(rep.phase_volume, 0.0);
    }

    #[test]
    fn window_counts_on_the_free_harmonic_case() {
        let grid = Grid::new(8.0, 2048);
        let state = scf_solve(
            &ExternalPotential::harmonic(),
            &PairPotential::Zero,
            2.0,
            ScfParams::default(),
            32.0,
            1.0 / 32.0,
            &grid,
        )
        .unwrap();
        let u: Vec<f64> = grid.points().iter().map(|&x| x * x).collect();
        let rep = window_count_check(&state, &u, 0.2, &grid).unwrap();
        // hbar(2k+1) in [1.8, 2.2] <=> 2k+1 in [57.6, 70.4] <=> k in {29..34}
        assert_eq!(rep.count, 6);
        assert!(rep.bound_ratio > 0.0);
        assert!(matches!(
            window_count_check(&state, &u, 0.7, &grid),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn scalar_terms_free_case() {
        // n = 2048 keeps the finite-difference dispersion shift at the Fermi
        // level below a level spacing for hbar = 1/64
        let grid = Grid::new(8.0, 2048);
        let u: Vec<f64> = grid.points().iter().map(|&x| x * x).collect();
        let tf = tf_solve(
            &ExternalPotential::harmonic(),
            &PairPotential::Zero,
            &grid,
        )
        .unwrap();
        let state = scf_solve(
            &ExternalPotential::harmonic(),
            &PairPotential::Zero,
            tf.mu,
            ScfParams::default(),
            64.0,
            1.0 / 64.0,
            &grid,
        )
        .unwrap();
        let rep = scalar_term_check(&state, &tf, &u, &PairPotential::Zero, &grid).unwrap();
        // free case: F(nu) = nu/2, count = #{hbar(2k+1) <= nu}; the deficit per
        // particle stays below the 10% band at hbar = 1/64
        assert!(rep.max_f_deficit <= 0.1, "deficit {}", rep.max_f_deficit);
        assert!(rep.sandwich_lower >= -1e-10, "lower {}", rep.sandwich_lower);
        assert!(rep.sandwich_upper >= -1e-10, "upper {}", rep.sandwich_upper);
    }

    #[test]
    fn sweep_config_validation() {
        let mut cfg = SweepConfig {
            n_list: vec![8, 16],
            external: ExternalPotential::harmonic(),
            pair: PairPotential::Zero,
            scf: ScfParams::default(),
            grid_points: 256,
            box_half_length: 8.0,
            xi_samples: vec![1.0],
        };
        assert!(cfg.validate().is_err());
        cfg.n_list = vec![8, 16, 12];
        assert!(cfg.validate().is_err());
        cfg.n_list = vec![8, 16, 32];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn free_sweep_distances_decrease() {
        // lambda = 0: quantization vs sharp indicator still leaves distances
        // that shrink with hbar
        let cfg = SweepConfig {
            n_list: vec![8, 16, 32],
            external: ExternalPotential::harmonic(),
            pair: PairPotential::Zero,
            scf: ScfParams::default(),
            grid_points: 1024,
            box_half_length: 8.0,
            xi_samples: vec![0.5, 1.0],
        };
        let rep = convergence_sweep(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 3);
        assert!(rep.rows.iter().all(|r| !r.failed));
        for w in rep.rows.windows(2) {
            assert!(
                w[1].trace_dist < w[0].trace_dist,
                "trace_dist not decreasing: {} -> {}",
                w[0].trace_dist,
                w[1].trace_dist
            );
            assert!(w[1].hbar < w[0].hbar);
        }
        // norm ordering after the shared normalization
        for r in &rep.rows {
            assert!(r.hs_dist <= r.trace_dist + 1e-12);
            assert!(r.trace_dist >= 0.0 && r.wigner_l2 >= 0.0 && r.density_l1 >= 0.0);
        }
        assert!(rep.beta > 0.0, "beta = {}", rep.beta);
    }

    #[test]
    fn number_estimates_scale_quadratically_in_lambda() {
        let cfg = NumberEstimateConfig {
            modes: 6,
            n_particles: 2,
            lambda_list: vec![0.0, 0.02, 0.04, 0.08],
            grid_points: 192,
            box_half_length: 6.0,
            pair_exponent: 0.5,
        };
        let rows = number_estimate_experiment(&cfg).unwrap();
        assert!(rows[0].fluctuation <= 1e-10, "free case fluctuation {}", rows[0].fluctuation);
        assert!(rows[0].rdm_trace_dist <= 1e-10);
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.lambda > 0.0)
            .map(|r| (r.lambda, r.fluctuation))
            .collect();
        let fit = rate_fit(&pts).unwrap();
        assert!(
            (fit.beta - 2.0).abs() <= 0.2,
            "lambda exponent {} not ~2",
            fit.beta
        );
        for r in &rows {
            assert!(r.fluctuation_identity_gap <= 1e-10);
            assert!(r.rdm_identity_residual <= 1e-10);
            assert!(
                r.e0 <= r.e_hf + 1e-10,
                "variational ordering violated at lambda = {}: {} > {}",
                r.lambda,
                r.e0,
                r.e_hf
            );
            let bound =
                4.0 * (cfg.n_particles as f64).sqrt() * (r.fluctuation + 1.0).sqrt();
            assert!(r.rdm_trace_dist <= bound);
        }
    }
}
