//! Grand-canonical Hartree theory at the Thomas-Fermi chemical potential:
//! the self-consistent Fermi-projection solver, Hartree and Hartree-Fock
//! energies, the effective potential, and semiclassical commutator
//! diagnostics.
//!
//! The fixed-point iteration `gamma <- (1-alpha) gamma + alpha 1_(-inf,mu](H_gamma)`
//! is run in density space: `H_gamma` depends on `gamma` only through the
//! position density, which is linear in `gamma`, so mixing the densities
//! reproduces the density sequence of the matrix iteration exactly while the
//! Hamiltonians stay tridiagonal. The returned state is the Fermi projection
//! of the converged mean field, certified by the trace-norm fixed-point
//! residual.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{
    build_laplacian, inclusion_tol, Grid, SymmetricOperator, Tridiagonal,
};
use crate::linalg;
use crate::potentials::{convolve_table, offset_table, ExternalPotential, PairPotential};

/// SCF controls.
#[derive(Debug, Clone, Copy)]
pub struct ScfParams {
    /// Linear-mixing weight in (0, 1].
    pub alpha: f64,
    /// Convergence target: trace-norm increment per particle.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScfParams {
    fn default() -> Self {
        ScfParams {
            alpha: 0.5,
            tol: 1e-6,
            max_iter: 6000,
        }
    }
}

/// Converged Hartree state.
#[derive(Debug, Clone)]
pub struct HartreeState {
    /// Occupied orthonormal orbitals (columns); `gamma = occ occ^T`.
    pub occ: Array2<f64>,
    /// Occupied one-body eigenvalues of the converged Hamiltonian.
    pub occ_energies: Vec<f64>,
    /// Chemical potential inherited from the TF solve.
    pub mu: f64,
    /// Position density `rho_gamma(x) = gamma(x, x) / N`.
    pub rho: Vec<f64>,
    /// Effective potential `U + V*rho_gamma - mu` on the grid.
    pub w_eff: Vec<f64>,
    /// Trace-norm fixed-point residual of the returned projection.
    pub residual: f64,
    /// Hartree energy of the state.
    pub energy: f64,
    /// Hartree-Fock energy (exchange-corrected).
    pub energy_hf: f64,
    pub hbar: f64,
    pub n_particles: f64,
    pub iterations: usize,
    /// Mixing weight after adaptive halving.
    pub alpha_final: f64,
}

impl HartreeState {
    pub fn gamma_dense(&self) -> Array2<f64> {
        self.occ.dot(&self.occ.t())
    }

    pub fn trace(&self) -> f64 {
        self.occ.ncols() as f64
    }
}

/// Hartree Hamiltonian `-hbar^2 Lap + U + V*rho_gamma` as a tridiagonal
/// operator, from the position density of gamma.
pub fn hartree_hamiltonian_from_density(
    rho_gamma: &[f64],
    u: &[f64],
    v_table: Option<&[f64]>,
    n_particles: f64,
    hbar: f64,
    grid: &Grid,
) -> Result<Tridiagonal> {
    let mut h = build_laplacian(grid, hbar)?;
    let _ = n_particles; // the mean field uses the unit-mass density rho_gamma
    if let Some(table) = v_table {
        let conv = convolve_table(table, rho_gamma, grid)?;
        for ((d, uu), c) in h.diag.iter_mut().zip(u).zip(&conv) {
            *d += uu + c;
        }
    } else {
        for (d, uu) in h.diag.iter_mut().zip(u) {
            *d += uu;
        }
    }
    Ok(h)
}

/// Dense Hartree Hamiltonian for a given density matrix (public operation).
pub fn hartree_hamiltonian(
    gamma: &Array2<f64>,
    u: &ExternalPotential,
    v: &PairPotential,
    n_particles: f64,
    hbar: f64,
    grid: &Grid,
) -> Result<SymmetricOperator> {
    let n = grid.n();
    if gamma.nrows() != n || gamma.ncols() != n {
        return Err(Error::Dimension(format!(
            "gamma is {}x{} on a {n}-point grid",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    let ug = u.on_grid(grid)?;
    let rho = density_of(gamma, n_particles, grid);
    let table = if v.is_zero() {
        None
    } else {
        Some(offset_table(v, grid)?)
    };
    Ok(
        hartree_hamiltonian_from_density(&rho, &ug, table.as_deref(), n_particles, hbar, grid)?
            .to_dense(),
    )
}

/// Position density `gamma(x,x)/N` from a dense density matrix.
pub fn density_of(gamma: &Array2<f64>, n_particles: f64, grid: &Grid) -> Vec<f64> {
    (0..gamma.nrows())
        .map(|j| gamma[[j, j]] / (grid.spacing() * n_particles))
        .collect()
}

fn density_of_columns(occ: &Array2<f64>, n_particles: f64, grid: &Grid) -> Vec<f64> {
    let n = occ.nrows();
    let mut rho = vec![0.0; n];
    for k in 0..occ.ncols() {
        for j in 0..n {
            rho[j] += occ[[j, k]] * occ[[j, k]];
        }
    }
    let scale = 1.0 / (grid.spacing() * n_particles);
    rho.iter_mut().for_each(|r| *r *= scale);
    rho
}

/// Trace norm of the difference of two orthogonal projections given by
/// orthonormal column blocks. `P - Q` lives on the joint column span, so the
/// spectrum is read off a `(k_p + k_q)`-dimensional compression.
pub fn projection_distance_trace(p_cols: &Array2<f64>, q_cols: &Array2<f64>) -> Result<f64> {
    let kp = p_cols.ncols();
    let kq = q_cols.ncols();
    if kp == 0 || kq == 0 {
        return Ok((kp + kq) as f64);
    }
    let n = p_cols.nrows();
    let mut basis = Array2::<f64>::zeros((n, kp + kq));
    basis.slice_mut(s![.., ..kp]).assign(p_cols);
    basis.slice_mut(s![.., kp..]).assign(q_cols);
    let w = gram_schmidt(&basis);
    let wp = w.t().dot(p_cols);
    let wq = w.t().dot(q_cols);
    let small = wp.dot(&wp.t()) - wq.dot(&wq.t());
    let evs = SymmetricOperator::symmetrize(small).eigenvalues()?;
    // the dropped null directions of the joint span contribute nothing
    Ok(evs.iter().map(|e| e.abs()).sum())
}

/// Grand-canonical SCF at fixed chemical potential.
pub fn scf_solve(
    u: &ExternalPotential,
    v: &PairPotential,
    mu: f64,
    params: ScfParams,
    n_particles: f64,
    hbar: f64,
    grid: &Grid,
) -> Result<HartreeState> {
    if !(params.alpha > 0.0 && params.alpha <= 1.0) {
        return Err(Error::Range(format!("alpha must be in (0, 1], got {}", params.alpha)));
    }
    let ug = u.on_grid(grid)?;
    let table = if v.is_zero() {
        None
    } else {
        Some(offset_table(v, grid)?)
    };
    let cut = mu + inclusion_tol(mu);

    let project = |rho: &[f64]| -> Result<(Vec<f64>, Array2<f64>)> {
        let h = hartree_hamiltonian_from_density(rho, &ug, table.as_deref(), n_particles, hbar, grid)?;
        h.eigh_below(cut)
    };

    // free projection as the initial iterate
    let h0 = {
        let mut h = build_laplacian(grid, hbar)?;
        for (d, uu) in h.diag.iter_mut().zip(&ug) {
            *d += uu;
        }
        h
    };
    let (_, occ0) = h0.eigh_below(cut)?;
    let mut rho = density_of_columns(&occ0, n_particles, grid);

    let mut alpha = params.alpha;
    let mut halvings = 0usize;
    let mut history: Vec<f64> = Vec::new();
    let mut window: Vec<f64> = Vec::new();
    let mut iterations = 0usize;

    // Density-increment target standing in for the trace-norm increment
    // during the loop; the returned state is certified afterwards.
    let rho_tol = params.tol;

    for round in 0..4 {
        let budget = params.max_iter / 4 + params.max_iter / 8 * round;
        let mut converged = false;
        for _ in 0..budget {
            iterations += 1;
            let (_, occ_new) = project(&rho)?;
            let rho_new = density_of_columns(&occ_new, n_particles, grid);
            let mut inc_l1 = 0.0;
            for (r, t) in rho.iter_mut().zip(&rho_new) {
                let next = (1.0 - alpha) * *r + alpha * t;
                inc_l1 += (next - *r).abs();
                *r = next;
            }
            let step = inc_l1 * grid.spacing() * n_particles;
            history.push(step / alpha);
            window.push(step / alpha);
            if window.len() > 12 {
                window.remove(0);
            }
            if step <= rho_tol * n_particles * alpha {
                converged = true;
                break;
            }
            // stall: no 30% progress across the last 12 iterations
            if window.len() == 12 {
                let recent = window.iter().cloned().fold(f64::INFINITY, f64::min);
                let past = history[..history.len() - 12]
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                if recent > 0.7 * past && halvings < 3 {
                    alpha *= 0.5;
                    halvings += 1;
                    window.clear();
                }
            }
        }

        // certify the projection built from the converged density
        let (evs, occ) = project(&rho)?;
        let rho_of_p = density_of_columns(&occ, n_particles, grid);
        let (_, occ_next) = project(&rho_of_p)?;
        let residual = projection_distance_trace(&occ, &occ_next)?;
        if converged && residual <= params.tol * n_particles {
            return finalize(
                occ, evs, rho_of_p, mu, &ug, table.as_deref(), v, n_particles, hbar, grid,
                residual, iterations, alpha,
            );
        }
        if round == 3 || !converged {
            if !converged {
                return Err(Error::ScfDiverged {
                    iterations,
                    last: history.last().cloned().unwrap_or(f64::NAN),
                    history,
                });
            }
            // converged in density but the projection certificate failed:
            // tighten and retry within the remaining rounds
        }
    }
    Err(Error::ScfDiverged {
        iterations,
        last: history.last().cloned().unwrap_or(f64::NAN),
        history,
    })
}

#[allow(clippy::too_many_arguments)]
fn finalize(
    occ: Array2<f64>,
    occ_energies: Vec<f64>,
    rho: Vec<f64>,
    mu: f64,
    ug: &[f64],
    v_table: Option<&[f64]>,
    v: &PairPotential,
    n_particles: f64,
    hbar: f64,
    grid: &Grid,
    residual: f64,
    iterations: usize,
    alpha_final: f64,
) -> Result<HartreeState> {
    let w_eff: Vec<f64> = if let Some(table) = v_table {
        let conv = convolve_table(table, &rho, grid)?;
        ug.iter().zip(&conv).map(|(a, b)| a + b - mu).collect()
    } else {
        ug.iter().map(|a| a - mu).collect()
    };
    let energy = hartree_energy_occ(&occ, ug, v_table, mu, n_particles, hbar, grid)?;
    let exchange = exchange_trace(&occ, v, v_table, grid)?;
    let energy_hf = energy - exchange / (2.0 * n_particles);
    Ok(HartreeState {
        occ,
        occ_energies,
        mu,
        rho,
        w_eff,
        residual,
        energy,
        energy_hf,
        hbar,
        n_particles,
        iterations,
        alpha_final,
    })
}

/// Hartree energy `Tr (-hbar^2 Lap + U - mu) gamma + (N/2) int rho V rho`.
pub fn hartree_energy(
    gamma: &Array2<f64>,
    u: &[f64],
    v: &PairPotential,
    mu: f64,
    n_particles: f64,
    hbar: f64,
    grid: &Grid,
) -> Result<f64> {
    let lap = build_laplacian(grid, hbar)?;
    let n = grid.n();
    let mut one_body = 0.0;
    for i in 0..n {
        let mut hg = lap.diag[i] * gamma[[i, i]];
        if i > 0 {
            hg += lap.off[i - 1] * gamma[[i - 1, i]];
        }
        if i + 1 < n {
            hg += lap.off[i] * gamma[[i + 1, i]];
        }
        one_body += hg + (u[i] - mu) * gamma[[i, i]];
    }
    let rho = density_of(gamma, n_particles, grid);
    let pair = if v.is_zero() {
        0.0
    } else {
        let table = offset_table(v, grid)?;
        let conv = convolve_table(&table, &rho, grid)?;
        rho.iter().zip(&conv).map(|(r, c)| r * c).sum::<f64>() * grid.spacing()
    };
    Ok(one_body + 0.5 * n_particles * pair)
}

fn hartree_energy_occ(
    occ: &Array2<f64>,
    u: &[f64],
    v_table: Option<&[f64]>,
    mu: f64,
    n_particles: f64,
    hbar: f64,
    grid: &Grid,
) -> Result<f64> {
    let lap = build_laplacian(grid, hbar)?;
    let n = grid.n();
    let k = occ.ncols();
    let mut one_body = 0.0;
    for c in 0..k {
        let q = occ.column(c);
        for i in 0..n {
            let mut hq = lap.diag[i] * q[i];
            if i > 0 {
                hq += lap.off[i - 1] * q[i - 1];
            }
            if i + 1 < n {
                hq += lap.off[i] * q[i + 1];
            }
            one_body += q[i] * (hq + (u[i] - mu) * q[i]);
        }
    }
    let rho = density_of_columns(occ, n_particles, grid);
    let pair = if let Some(table) = v_table {
        let conv = convolve_table(table, &rho, grid)?;
        rho.iter().zip(&conv).map(|(r, c)| r * c).sum::<f64>() * grid.spacing()
    } else {
        0.0
    };
    Ok(one_body + 0.5 * n_particles * pair)
}

/// `Tr X_gamma gamma = sum_ij V(x_i - x_j) gamma_ij^2` from the orbitals.
fn exchange_trace(
    occ: &Array2<f64>,
    v: &PairPotential,
    v_table: Option<&[f64]>,
    grid: &Grid,
) -> Result<f64> {
    if v.is_zero() {
        return Ok(0.0);
    }
    let table = match v_table {
        Some(t) => t.to_vec(),
        None => offset_table(v, grid)?,
    };
    let n = occ.nrows();
    let k = occ.ncols();
    let mut acc = 0.0;
    // gamma_ij = sum_c occ[i,c] occ[j,c]; accumulate row by row
    for i in 0..n {
        for j in 0..n {
            let mut g = 0.0;
            for c in 0..k {
                g += occ[[i, c]] * occ[[j, c]];
            }
            acc += table[(i as isize - j as isize).unsigned_abs()] * g * g;
        }
    }
    Ok(acc)
}

/// Hartree-Fock energy `E_N(gamma) - (2N)^-1 Tr X_gamma gamma`.
pub fn hartree_fock_energy(
    gamma: &Array2<f64>,
    u: &[f64],
    v: &PairPotential,
    mu: f64,
    n_particles: f64,
    hbar: f64,
    grid: &Grid,
) -> Result<f64> {
    let e = hartree_energy(gamma, u, v, mu, n_particles, hbar, grid)?;
    if v.is_zero() {
        return Ok(e);
    }
    let table = offset_table(v, grid)?;
    let n = gamma.nrows();
    let mut tr_x = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = gamma[[i, j]];
            tr_x += table[(i as isize - j as isize).unsigned_abs()] * g * g;
        }
    }
    Ok(e - tr_x / (2.0 * n_particles))
}

/// Semiclassical commutator diagnostics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CommutatorReport {
    /// `|| [x, gamma] ||_Tr / (N hbar)`
    pub x_comm: f64,
    /// `|| [-i hbar d/dx, gamma] ||_Tr / (N hbar)`
    pub p_comm: f64,
    /// `max_xi || [e^(i xi x), gamma] ||_Tr / (N hbar |xi|)`
    pub fourier_comm_max: f64,
}

/// Trace norm of `A = U W^T -/+ W U^T` (real, rank <= 2k) via a thin QR of
/// the joint column space; `plus` selects the symmetric combination.
fn trace_norm_bilinear(u_cols: &Array2<f64>, w_cols: &Array2<f64>, plus: bool) -> Result<f64> {
    let n = u_cols.nrows();
    let k = u_cols.ncols();
    let mut basis = Array2::<f64>::zeros((n, 2 * k));
    basis.slice_mut(s![.., ..k]).assign(u_cols);
    basis.slice_mut(s![.., k..]).assign(w_cols);
    let q = gram_schmidt(&basis);
    let m = q.ncols();
    if m == 0 {
        return Ok(0.0);
    }
    // project: A = Q (Qt A Q) Qt with Qt A Q = (Qt U)(Qt W)^T - (Qt W)(Qt U)^T
    let qu = q.t().dot(u_cols);
    let qw = q.t().dot(w_cols);
    let small = if plus {
        qu.dot(&qw.t()) + qw.dot(&qu.t())
    } else {
        qu.dot(&qw.t()) - qw.dot(&qu.t())
    };
    // singular values from eigenvalues of small^T small
    let gram = small.t().dot(&small);
    let evs = SymmetricOperator::symmetrize(gram).eigenvalues()?;
    let floor = evs.iter().fold(0.0f64, |a, v| a.max(v.abs())) * 1e-14;
    Ok(evs
        .iter()
        .map(|&e| if e > floor { e.sqrt() } else { 0.0 })
        .sum())
}

fn gram_schmidt(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let k = a.ncols();
    let mut q = Array2::<f64>::zeros((n, k));
    let mut kept = 0usize;
    for c in 0..k {
        let mut v: Array1<f64> = a.column(c).to_owned();
        for _pass in 0..2 {
            for j in 0..kept {
                let d = q.column(j).dot(&v);
                let qj = q.column(j).to_owned();
                v.zip_mut_with(&qj, |x, y| *x -= d * y);
            }
        }
        let nrm = v.dot(&v).sqrt();
        if nrm > 1e-12 {
            v.mapv_inplace(|x| x / nrm);
            q.column_mut(kept).assign(&v);
            kept += 1;
        }
    }
    q.slice(s![.., ..kept]).to_owned()
}

/// Commutator report from occupied orbitals (gamma = occ occ^T).
pub fn commutator_report(
    occ: &Array2<f64>,
    hbar: f64,
    n_particles: f64,
    xi_samples: &[f64],
    grid: &Grid,
) -> Result<CommutatorReport> {
    let n = grid.n();
    let k = occ.ncols();
    let scale = 1.0 / (n_particles * hbar);

    // [X, gamma] = (X occ) occ^T - occ (X occ)^T
    let mut xo = occ.clone();
    for j in 0..n {
        let x = grid.points()[j];
        for c in 0..k {
            xo[[j, c]] *= x;
        }
    }
    let x_comm = trace_norm_bilinear(&xo, occ, false)? * scale;

    // [-i hbar d, gamma] = -i hbar (D gamma - gamma D) with D the antisymmetric
    // central difference; the real matrix D gamma - gamma D is symmetric and
    // its trace norm carries the hbar factor.
    let mut dq = Array2::<f64>::zeros((n, k));
    let inv2h = 1.0 / (2.0 * grid.spacing());
    for c in 0..k {
        for j in 0..n {
            let up = if j + 1 < n { occ[[j + 1, c]] } else { 0.0 };
            let dn = if j > 0 { occ[[j - 1, c]] } else { 0.0 };
            dq[[j, c]] = (up - dn) * inv2h;
        }
    }
    // D gamma - gamma D = (D occ) occ^T + occ (D occ)^T for antisymmetric D
    let p_comm = hbar * trace_norm_bilinear(&dq, occ, true)? * scale;

    // [e^(i xi x), gamma]: complexified low-rank trace norm
    let mut fmax: f64 = 0.0;
    for &xi in xi_samples {
        if xi == 0.0 {
            continue;
        }
        let tn = fourier_commutator_trace_norm(occ, xi, grid)?;
        fmax = fmax.max(tn * scale / xi.abs());
    }
    Ok(CommutatorReport {
        x_comm,
        p_comm,
        fourier_comm_max: fmax,
    })
}

/// Trace norm of `[e^(i xi x), gamma]` for a projection gamma = occ occ^T.
/// The commutator and its adjoint live on span{E occ, conj(E) occ, occ}, so a
/// 3k-column compression captures the full singular spectrum.
pub fn fourier_commutator_trace_norm(occ: &Array2<f64>, xi: f64, grid: &Grid) -> Result<f64> {
    let n = occ.nrows();
    let k = occ.ncols();
    let mut eo = Array2::<Complex64>::zeros((n, k));
    let mut eco = Array2::<Complex64>::zeros((n, k));
    let mut oc = Array2::<Complex64>::zeros((n, k));
    for j in 0..n {
        let ph = Complex64::from_polar(1.0, xi * grid.points()[j]);
        for c in 0..k {
            eo[[j, c]] = ph * occ[[j, c]];
            eco[[j, c]] = ph.conj() * occ[[j, c]];
            oc[[j, c]] = Complex64::new(occ[[j, c]], 0.0);
        }
    }
    let mut basis = Array2::<Complex64>::zeros((n, 3 * k));
    basis.slice_mut(s![.., ..k]).assign(&eo);
    basis.slice_mut(s![.., k..2 * k]).assign(&eco);
    basis.slice_mut(s![.., 2 * k..]).assign(&oc);
    let q = gram_schmidt_complex(&basis);
    let m = q.ncols();
    if m == 0 {
        return Ok(0.0);
    }
    // Q* [E, gamma] Q = (Q* E occ)(occ^T Q) - (Q* occ)((E occ)^T Q)
    let qa = conj_t(&q).dot(&eo); // Q* (E occ)
    let qb = conj_t(&q).dot(&oc); // Q* occ
    let qc = q.t().dot(&eo); // Q^T (E occ), plain transpose
    let qd = q.t().dot(&oc); // Q^T occ
    let small = qa.dot(&qd.t()) - qb.dot(&qc.t());
    let gram = conj_t(&small).dot(&small);
    let (evs, _) = linalg::eigh_hermitian(&gram)?;
    let floor = evs.iter().fold(0.0f64, |a, v| a.max(v.abs())) * 1e-14;
    Ok(evs
        .iter()
        .map(|&e| if e > floor { e.sqrt() } else { 0.0 })
        .sum())
}

fn conj_t(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|z| z.conj())
}

fn gram_schmidt_complex(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let k = a.ncols();
    let mut q = Array2::<Complex64>::zeros((n, k));
    let mut kept = 0usize;
    for c in 0..k {
        let mut v: Array1<Complex64> = a.column(c).to_owned();
        for _pass in 0..2 {
            for j in 0..kept {
                let d: Complex64 = q.column(j).iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                let qj = q.column(j).to_owned();
                v.zip_mut_with(&qj, |x, y| *x -= d * y);
            }
        }
        let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-12 {
            v.mapv_inplace(|z| z / nrm);
            q.column_mut(kept).assign(&v);
            kept += 1;
        }
    }
    q.slice(s![.., ..kept]).to_owned()
}

/// Effective one-body potential `W_N = U + V*rho_gamma - mu` of a solved state.
pub fn effective_potential(state: &HartreeState) -> &[f64] {
    &state.w_eff
}
