//! Thin LAPACK bindings for the dense and tridiagonal symmetric eigenproblems.
//!
//! Everything downstream (spectral projections, trace norms, Wigner checks)
//! needs full or selected spectra of real symmetric matrices. We call the
//! divide-and-conquer drivers directly: `dsyevd` for dense, `dstevd`/`dstevr`
//! for tridiagonal, `zheev` for the complex Hermitian generators used by the
//! Gronewold transform.

use ndarray::Array2;
use num_complex::Complex64;
use std::os::raw::c_int;

use crate::error::{Error, Result};

fn lapack_err(routine: &str, info: c_int) -> Error {
    Error::Decomposition(format!("{routine} returned info = {info}"))
}

/// Eigendecomposition of a dense real symmetric matrix (ascending eigenvalues).
///
/// Returns `(eigenvalues, eigenvectors)`; eigenvector k is column k.
pub fn eigh_dense(a: &Array2<f64>, vectors: bool) -> Result<(Vec<f64>, Option<Array2<f64>>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!("{}x{} not square", n, a.ncols())));
    }
    if n == 0 {
        return Ok((Vec::new(), None));
    }
    // Column-major copy; for symmetric input the transpose is immaterial.
    let mut m: Vec<f64> = a.t().iter().cloned().collect();
    let mut w = vec![0.0f64; n];
    let jobz = if vectors { b'V' as i8 } else { b'N' as i8 };
    let uplo = b'L' as i8;
    let nn = n as c_int;
    let mut info: c_int = 0;
    unsafe {
        let (mut lwork, mut liwork): (c_int, c_int) = (-1, -1);
        let mut wq = [0.0f64];
        let mut iq = [0 as c_int];
        lapack_sys::dsyevd_(
            &jobz, &uplo, &nn, m.as_mut_ptr(), &nn, w.as_mut_ptr(),
            wq.as_mut_ptr(), &lwork, iq.as_mut_ptr(), &liwork, &mut info,
        );
        if info != 0 {
            return Err(lapack_err("dsyevd (workspace query)", info));
        }
        lwork = wq[0] as c_int;
        liwork = iq[0];
        let mut work = vec![0.0f64; lwork as usize];
        let mut iwork = vec![0 as c_int; liwork as usize];
        lapack_sys::dsyevd_(
            &jobz, &uplo, &nn, m.as_mut_ptr(), &nn, w.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("dsyevd", info));
    }
    let v = if vectors {
        // LAPACK returns column-major eigenvectors; transpose into row-major
        // storage so that column k of the Array2 is eigenvector k.
        let cm = Array2::from_shape_vec((n, n), m)
            .map_err(|e| Error::Decomposition(e.to_string()))?;
        Some(cm.t().to_owned())
    } else {
        None
    };
    Ok((w, v))
}

/// Full eigendecomposition of a symmetric tridiagonal matrix.
pub fn eigh_tridiagonal(
    diag: &[f64],
    off: &[f64],
    vectors: bool,
) -> Result<(Vec<f64>, Option<Array2<f64>>)> {
    let n = diag.len();
    if off.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "tridiagonal sizes: diag {} off {}",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    let jobz = if vectors { b'V' as i8 } else { b'N' as i8 };
    let nn = n as c_int;
    let ldz = if vectors { nn } else { 1 };
    let mut z = vec![0.0f64; if vectors { n * n } else { 1 }];
    let mut info: c_int = 0;
    unsafe {
        let (mut lwork, mut liwork): (c_int, c_int) = (-1, -1);
        let mut wq = [0.0f64];
        let mut iq = [0 as c_int];
        lapack_sys::dstevd_(
            &jobz, &nn, d.as_mut_ptr(), e.as_mut_ptr(), z.as_mut_ptr(), &ldz,
            wq.as_mut_ptr(), &lwork, iq.as_mut_ptr(), &liwork, &mut info,
        );
        if info != 0 {
            return Err(lapack_err("dstevd (workspace query)", info));
        }
        lwork = wq[0] as c_int;
        liwork = iq[0];
        let mut work = vec![0.0f64; lwork.max(1) as usize];
        let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
        lapack_sys::dstevd_(
            &jobz, &nn, d.as_mut_ptr(), e.as_mut_ptr(), z.as_mut_ptr(), &ldz,
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("dstevd", info));
    }
    let v = if vectors {
        let cm = Array2::from_shape_vec((n, n), z)
            .map_err(|e| Error::Decomposition(e.to_string()))?;
        Some(cm.t().to_owned())
    } else {
        None
    };
    Ok((d, v))
}

/// Eigenpairs of a symmetric tridiagonal matrix with eigenvalues in `(vl, vu]`.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvector k in column k.
/// This is the workhorse of the SCF loop: only the occupied part of the
/// spectrum is ever materialized.
pub fn eigh_tridiagonal_range(
    diag: &[f64],
    off: &[f64],
    vl: f64,
    vu: f64,
) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = diag.len();
    if off.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "tridiagonal sizes: diag {} off {}",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    let jobz = b'V' as i8;
    let range = b'V' as i8;
    let nn = n as c_int;
    let (il, iu): (c_int, c_int) = (0, 0);
    let abstol = 0.0f64; // default tolerance
    let mut m: c_int = 0;
    let mut w = vec![0.0f64; n];
    let mut z = vec![0.0f64; n * n];
    let mut isuppz = vec![0 as c_int; 2 * n.max(1)];
    let mut info: c_int = 0;
    unsafe {
        let (mut lwork, mut liwork): (c_int, c_int) = (-1, -1);
        let mut wq = [0.0f64];
        let mut iq = [0 as c_int];
        lapack_sys::dstevr_(
            &jobz, &range, &nn, d.as_mut_ptr(), e.as_mut_ptr(), &vl, &vu, &il, &iu,
            &abstol, &mut m, w.as_mut_ptr(), z.as_mut_ptr(), &nn, isuppz.as_mut_ptr(),
            wq.as_mut_ptr(), &lwork, iq.as_mut_ptr(), &liwork, &mut info,
        );
        if info != 0 {
            return Err(lapack_err("dstevr (workspace query)", info));
        }
        lwork = wq[0] as c_int;
        liwork = iq[0];
        let mut work = vec![0.0f64; lwork.max(1) as usize];
        let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
        lapack_sys::dstevr_(
            &jobz, &range, &nn, d.as_mut_ptr(), e.as_mut_ptr(), &vl, &vu, &il, &iu,
            &abstol, &mut m, w.as_mut_ptr(), z.as_mut_ptr(), &nn, isuppz.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("dstevr", info));
    }
    let m = m as usize;
    w.truncate(m);
    // z holds m columns of length n, column-major.
    let mut vecs = Array2::<f64>::zeros((n, m));
    for k in 0..m {
        for i in 0..n {
            vecs[[i, k]] = z[k * n + i];
        }
    }
    Ok((w, vecs))
}

/// Number of eigenvalues of a symmetric tridiagonal matrix strictly below `t`,
/// by Sturm sequence (LDL^T pivot signs). Exact integer, O(n).
pub fn sturm_count_below(diag: &[f64], off: &[f64], t: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let mut count = 0usize;
    let mut d = diag[0] - t;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let denom = if d == 0.0 { f64::MIN_POSITIVE } else { d };
        d = (diag[i] - t) - off[i - 1] * off[i - 1] / denom;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigendecomposition of a complex Hermitian matrix (ascending eigenvalues).
pub fn eigh_hermitian(a: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!("{}x{} not square", n, a.ncols())));
    }
    // Column-major copy (ndarray transpose does not conjugate).
    let mut m: Vec<Complex64> = a.t().iter().cloned().collect();
    let mut w = vec![0.0f64; n];
    let jobz = b'V' as i8;
    let uplo = b'L' as i8;
    let nn = n as c_int;
    let mut info: c_int = 0;
    let lwork_min = (2 * n.max(1)) as c_int;
    let mut rwork = vec![0.0f64; (3 * n).max(1)];
    unsafe {
        let mut lwork: c_int = -1;
        let mut wq = [Complex64::new(0.0, 0.0)];
        lapack_sys::zheev_(
            &jobz, &uplo, &nn,
            m.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr(),
            wq.as_mut_ptr() as *mut _, &lwork, rwork.as_mut_ptr(), &mut info,
        );
        if info != 0 {
            return Err(lapack_err("zheev (workspace query)", info));
        }
        lwork = (wq[0].re as c_int).max(lwork_min);
        let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
        lapack_sys::zheev_(
            &jobz, &uplo, &nn,
            m.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _, &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zheev", info));
    }
    let cm = Array2::from_shape_vec((n, n), m)
        .map_err(|e| Error::Decomposition(e.to_string()))?;
    // Columns of the column-major result are eigenvectors; after from_shape_vec
    // (row-major) the eigenvectors sit in rows, so transpose back.
    Ok((w, cm.t().to_owned()))
}
