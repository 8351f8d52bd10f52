//! Discretized one-body Hilbert space: grids, the kinetic operator, spectral
//! calculus, and operator norms.
//!
//! Discretization convention: functions are represented by coefficient vectors
//! with the quadrature weight absorbed, `c_j = sqrt(spacing) * f(x_j)`, so that
//! operator traces are plain matrix traces and kernels recover from matrices as
//! `kernel(x_i, x_j) = A[i, j] / spacing`.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg;

/// Scaling parameters of the mean-field model, with `hbar = N^(-1/d)`.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    /// Spatial dimension (numerics run d = 1; formulas stay d-parametric).
    pub d: u32,
    /// Particle number.
    pub n_particles: u64,
    /// Effective Planck constant.
    pub hbar: f64,
    /// Box half-length.
    pub box_half_length: f64,
    /// Grid point count.
    pub grid_points: usize,
}

impl ModelParams {
    pub fn new(d: u32, n_particles: u64, box_half_length: f64, grid_points: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Range("dimension must be positive".into()));
        }
        if n_particles == 0 {
            return Err(Error::Range("particle number must be positive".into()));
        }
        if grid_points < 16 {
            return Err(Error::InvalidGrid(format!(
                "need at least 16 grid points, got {grid_points}"
            )));
        }
        if !(box_half_length > 0.0) {
            return Err(Error::InvalidGrid("box half-length must be positive".into()));
        }
        let hbar = (n_particles as f64).powf(-1.0 / d as f64);
        Ok(ModelParams {
            d,
            n_particles,
            hbar,
            box_half_length,
            grid_points,
        })
    }

    /// Checks `hbar = N^(-1/d)` to 1e-12 relative.
    pub fn check_scaling(&self) -> bool {
        let expect = (self.n_particles as f64).powf(-1.0 / self.d as f64);
        (self.hbar - expect).abs() <= 1e-12 * expect
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.box_half_length, self.grid_points)
    }
}

/// Uniform grid `x_j = -L + j * spacing` on `[-L, L]`.
#[derive(Debug, Clone)]
pub struct Grid {
    points: Vec<f64>,
    spacing: f64,
    half_length: f64,
}

impl Grid {
    pub fn new(half_length: f64, n: usize) -> Grid {
        let spacing = 2.0 * half_length / (n as f64 - 1.0);
        let points = (0..n).map(|j| -half_length + j as f64 * spacing).collect();
        Grid {
            points,
            spacing,
            half_length,
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Uniformity check (1e-12 relative), for loaded/tabulated grids.
    pub fn is_uniform(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| ((w[1] - w[0]) - self.spacing).abs() <= 1e-12 * self.spacing.abs())
    }
}

/// Dense real symmetric operator on coefficient vectors.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    m: Array2<f64>,
}

impl SymmetricOperator {
    /// Wraps a matrix after verifying symmetry to `1e-12 * max|A|`.
    pub fn new(m: Array2<f64>) -> Result<SymmetricOperator> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "{}x{} not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let defect = symmetry_defect(&m);
        if defect > 1e-12 * scale.max(1e-300) {
            return Err(Error::Dimension(format!(
                "symmetry defect {defect:.3e} exceeds 1e-12 * {scale:.3e}"
            )));
        }
        Ok(SymmetricOperator { m })
    }

    /// Symmetrizes `(A + A^T)/2` and wraps without further checks.
    pub fn symmetrize(m: Array2<f64>) -> SymmetricOperator {
        let s = (&m + &m.t()) * 0.5;
        SymmetricOperator { m: s }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.m
    }

    pub fn into_array(self) -> Array2<f64> {
        self.m
    }

    pub fn eigh(&self) -> Result<SpectralDecomposition> {
        let (w, v) = linalg::eigh_dense(&self.m, true)?;
        Ok(SpectralDecomposition {
            eigenvalues: w,
            eigenvectors: v.expect("vectors requested"),
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (w, _) = linalg::eigh_dense(&self.m, false)?;
        Ok(w)
    }
}

pub(crate) fn symmetry_defect(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            defect = defect.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    defect
}

/// Eigendecomposition with ascending eigenvalues and orthonormal columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<f64>,
}

impl SpectralDecomposition {
    /// Reconstruction residual `max|A - Q L Q^T|` against the given matrix.
    pub fn reconstruction_defect(&self, a: &Array2<f64>) -> f64 {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (k, &w) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).mapv_inplace(|v| v * w);
        }
        let recon = scaled.dot(&self.eigenvectors.t());
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                defect = defect.max((recon[[i, j]] - a[[i, j]]).abs());
            }
        }
        defect
    }
}

/// Symmetric tridiagonal operator; the dressed Hamiltonians of this crate are
/// all of this form, which keeps the SCF loop cheap.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> SymmetricOperator {
        let n = self.diag.len();
        let mut m = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = self.diag[i];
            if i + 1 < n {
                m[[i, i + 1]] = self.off[i];
                m[[i + 1, i]] = self.off[i];
            }
        }
        SymmetricOperator { m }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (w, _) = linalg::eigh_tridiagonal(&self.diag, &self.off, false)?;
        Ok(w)
    }

    /// Eigenpairs with eigenvalue `<= vu`.
    pub fn eigh_below(&self, vu: f64) -> Result<(Vec<f64>, Array2<f64>)> {
        linalg::eigh_tridiagonal_range(&self.diag, &self.off, f64::NEG_INFINITY, vu)
    }

    /// Exact `#\{eigenvalues < t\}` by Sturm count.
    pub fn count_below(&self, t: f64) -> usize {
        linalg::sturm_count_below(&self.diag, &self.off, t)
    }
}

/// Inclusion tolerance at a spectral threshold: `1e-12 * (1 + |mu|)`.
pub fn inclusion_tol(mu: f64) -> f64 {
    1e-12 * (1.0 + mu.abs())
}

/// Matrix of `-hbar^2 Lap` with the 3-point stencil and Dirichlet walls.
pub fn build_laplacian(grid: &Grid, hbar: f64) -> Result<Tridiagonal> {
    if grid.n() < 3 {
        return Err(Error::InvalidGrid(format!(
            "laplacian stencil needs n >= 3, got {}",
            grid.n()
        )));
    }
    if !(hbar > 0.0) {
        return Err(Error::Range(format!("hbar must be positive, got {hbar}")));
    }
    let n = grid.n();
    let c = hbar * hbar / (grid.spacing() * grid.spacing());
    Ok(Tridiagonal {
        diag: vec![2.0 * c; n],
        off: vec![-c; n - 1],
    })
}

/// Sharp Fermi projection `1_(-inf, mu]`(H) as a dense matrix.
///
/// Ties within `inclusion_tol(mu)` of the threshold are included.
pub fn spectral_projection_below(h: &SymmetricOperator, mu: f64) -> Result<SymmetricOperator> {
    let dec = h.eigh()?;
    let cut = mu + inclusion_tol(mu);
    let k = dec.eigenvalues.partition_point(|&w| w <= cut);
    Ok(projection_from_columns(&dec.eigenvectors, k))
}

/// Assembles `Q_k Q_k^T` from the first k columns.
pub(crate) fn projection_from_columns(q: &Array2<f64>, k: usize) -> SymmetricOperator {
    let n = q.nrows();
    if k == 0 {
        return SymmetricOperator {
            m: Array2::zeros((n, n)),
        };
    }
    let occ = q.slice(ndarray::s![.., ..k]);
    let p = occ.dot(&occ.t());
    // Products of orthonormal blocks are symmetric up to roundoff; symmetrize
    // so downstream eigensolves see an exactly symmetric matrix.
    SymmetricOperator::symmetrize(p)
}

/// Trace norm `Tr |A| = sum of singular values`.
///
/// For symmetric input this is the sum of absolute eigenvalues; general input
/// goes through the eigenvalues of `A^T A`.
pub fn trace_norm(a: &Array2<f64>) -> Result<f64> {
    if is_symmetric_enough(a) {
        let sym = SymmetricOperator::symmetrize(a.clone());
        Ok(sym.eigenvalues()?.iter().map(|w| w.abs()).sum())
    } else {
        Ok(singular_values(a)?.iter().sum())
    }
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Operator norm = largest singular value.
pub fn operator_norm(a: &Array2<f64>) -> Result<f64> {
    if is_symmetric_enough(a) {
        let sym = SymmetricOperator::symmetrize(a.clone());
        Ok(sym
            .eigenvalues()?
            .iter()
            .fold(0.0f64, |acc, w| acc.max(w.abs())))
    } else {
        Ok(singular_values(a)?
            .iter()
            .fold(0.0f64, |acc, s| acc.max(*s)))
    }
}

fn is_symmetric_enough(a: &Array2<f64>) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    symmetry_defect(a) <= 1e-12 * scale.max(1e-300)
}

/// Singular values via the spectrum of `A^T A`. Eigenvalues below the
/// roundoff floor of the Gram matrix are treated as exact zeros; without the
/// clamp the square root inflates null-space noise into O(sqrt(eps)) ghosts.
pub fn singular_values(a: &Array2<f64>) -> Result<Vec<f64>> {
    let ata = a.t().dot(a);
    let sym = SymmetricOperator::symmetrize(ata);
    let w = sym.eigenvalues()?;
    let floor = w.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) * 1e-14;
    Ok(w
        .iter()
        .map(|&x| if x > floor { x.sqrt() } else { 0.0 })
        .collect())
}

/// `#{eigenvalues of H in [a, b]}` with the standard inclusion tolerance.
pub fn count_in_window(h: &SymmetricOperator, a: f64, b: f64) -> Result<usize> {
    if a > b {
        return Err(Error::InvalidWindow { a, b });
    }
    let w = h.eigenvalues()?;
    let lo = a - inclusion_tol(a);
    let hi = b + inclusion_tol(b);
    Ok(w.iter().filter(|&&x| x >= lo && x <= hi).count())
}

/// Window count for tridiagonal operators via two Sturm counts.
pub fn count_in_window_tridiagonal(h: &Tridiagonal, a: f64, b: f64) -> Result<usize> {
    if a > b {
        return Err(Error::InvalidWindow { a, b });
    }
    let lo = a - inclusion_tol(a);
    let hi = b + inclusion_tol(b);
    Ok(h.count_below(hi) - h.count_below(lo))
}

/// Column of grid samples as a coefficient vector: `c_j = sqrt(spacing) f(x_j)`.
pub fn coefficients_from_samples(grid: &Grid, f: &[f64]) -> Array1<f64> {
    let s = grid.spacing().sqrt();
    Array1::from_iter(f.iter().map(|v| v * s))
}
