//! External traps, pair potentials, Fourier-cutoff regularization, tails,
//! convolutions, and the exchange kernel.

use ndarray::Array2;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{Grid, SymmetricOperator};

extern "C" {
    // from libm, which std already links on this target
    fn tgamma(x: f64) -> f64;
}

fn gamma_fn(x: f64) -> f64 {
    unsafe { tgamma(x) }
}

/// External trapping potential U.
#[derive(Debug, Clone)]
pub enum ExternalPotential {
    /// `omega2 * x^2`
    Harmonic { omega2: f64 },
    /// `sum_k c_k x^(2k)`, coefficients for the even powers starting at x^0.
    EvenPolynomial { coeffs: Vec<f64> },
    /// Samples on the working grid.
    Tabulated { values: Vec<f64> },
}

impl ExternalPotential {
    pub fn harmonic() -> Self {
        ExternalPotential::Harmonic { omega2: 1.0 }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            ExternalPotential::Harmonic { omega2 } => omega2 * x * x,
            ExternalPotential::EvenPolynomial { coeffs } => {
                let x2 = x * x;
                let mut acc = 0.0;
                let mut p = 1.0;
                for &c in coeffs {
                    acc += c * p;
                    p *= x2;
                }
                acc
            }
            ExternalPotential::Tabulated { .. } => {
                panic!("tabulated potentials are evaluated via on_grid")
            }
        }
    }

    pub fn on_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            ExternalPotential::Tabulated { values } => {
                if values.len() != grid.n() {
                    return Err(Error::Dimension(format!(
                        "tabulated potential has {} samples for a {}-point grid",
                        values.len(),
                        grid.n()
                    )));
                }
                Ok(values.clone())
            }
            _ => Ok(grid.points().iter().map(|&x| self.evaluate(x)).collect()),
        }
    }

    /// Confinement check on the grid: the walls must sit at least one energy
    /// unit above the center.
    pub fn is_confining(&self, grid: &Grid) -> Result<bool> {
        let u = self.on_grid(grid)?;
        let mid = u[grid.n() / 2];
        Ok(u[0] >= mid + 1.0 && u[grid.n() - 1] >= mid + 1.0)
    }
}

/// Nonnegative Fourier profile on a uniform symmetric xi-grid, interpolated
/// linearly; zero outside the tabulated range.
#[derive(Debug, Clone)]
pub struct RegularProfile {
    /// Maximum tabulated |xi|.
    pub xi_max: f64,
    /// Profile values at `xi_k = -xi_max + k * dxi`, symmetric grid.
    pub values: Vec<f64>,
}

impl RegularProfile {
    pub fn new(xi_max: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 || !(xi_max > 0.0) {
            return Err(Error::Range("profile needs >= 3 samples and xi_max > 0".into()));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::NotRegularClass(
                "profile must be pointwise nonnegative".into(),
            ));
        }
        Ok(RegularProfile { xi_max, values })
    }

    pub fn dxi(&self) -> f64 {
        2.0 * self.xi_max / (self.values.len() as f64 - 1.0)
    }

    pub fn at(&self, xi: f64) -> f64 {
        if xi.abs() > self.xi_max {
            return 0.0;
        }
        let t = (xi + self.xi_max) / self.dxi();
        let j = (t.floor() as usize).min(self.values.len() - 2);
        let s = t - j as f64;
        self.values[j] * (1.0 - s) + self.values[j + 1] * s
    }
}

/// Pair interaction V.
#[derive(Debug, Clone)]
pub enum PairPotential {
    /// `lambda |x|^(-a)` in dimension d.
    PowerLaw { lambda: f64, a: f64, d: u32 },
    /// Regular class: given by its nonnegative Fourier profile.
    Regular { profile: RegularProfile },
    /// Identically zero interaction.
    Zero,
}

impl PairPotential {
    pub fn power_law(lambda: f64, a: f64, d: u32) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Range(format!("coupling must be positive, got {lambda}")));
        }
        if !(a > 0.0) || a >= d as f64 {
            return Err(Error::Range(format!(
                "power-law exponent must satisfy 0 < a < d = {d}, got {a}"
            )));
        }
        Ok(PairPotential::PowerLaw { lambda, a, d })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PairPotential::Zero)
    }
}

/// Riesz constant: the Fourier transform of `|x|^(-a)` in d dimensions is
/// `C_{d,a} |xi|^(a-d)` under the convention `vhat = (2 pi)^(-d) int e^(-i xi x) v`.
pub fn riesz_constant(d: u32, a: f64) -> f64 {
    let d = d as f64;
    2f64.powf(-a) * PI.powf(-d / 2.0) * gamma_fn((d - a) / 2.0) / gamma_fn(a / 2.0)
}

/// Fourier transform of the pair potential at frequency xi.
pub fn pair_fourier(v: &PairPotential, xi: f64) -> Result<f64> {
    match v {
        PairPotential::PowerLaw { lambda, a, d } => {
            if xi == 0.0 {
                return Err(Error::SingularFrequency);
            }
            Ok(lambda * riesz_constant(*d, *a) * xi.abs().powf(a - *d as f64))
        }
        PairPotential::Regular { profile } => Ok(profile.at(xi)),
        PairPotential::Zero => Ok(0.0),
    }
}

/// Integrates `f` over `[lo, hi]` splitting at the zeros of `cos(x xi)` /
/// `sin(x xi)` so each chunk is non-oscillatory, 8-point Gauss per chunk.
fn oscillatory_integral(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, x: f64) -> f64 {
    // Gauss-Legendre 8-point nodes/weights on [-1, 1].
    const NODES: [f64; 8] = [
        -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
        -0.1834346424956498, 0.1834346424956498, 0.5255324099163290,
        0.7966664774136267, 0.9602898564975363,
    ];
    const WEIGHTS: [f64; 8] = [
        0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
        0.2223810344533745, 0.1012285362903763,
    ];
    let gauss = |a: f64, b: f64| -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (t, w) in NODES.iter().zip(WEIGHTS.iter()) {
            acc += w * f(c + h * t);
        }
        acc * h
    };
    let period = if x.abs() > 1e-12 { PI / x.abs() } else { f64::INFINITY };
    // Subdivide each half-period further so the amplitude is well resolved.
    let step = (period / 2.0).min((hi - lo).max(1e-12));
    let mut acc = 0.0;
    let mut a = lo;
    while a < hi {
        let b = (a + step).min(hi);
        acc += gauss(a, b);
        a = b;
    }
    acc
}

/// `V_Lambda(x) = int_{|xi| <= Lambda} e^(i x xi) vhat(xi) dxi` for even profiles
/// in d = 1: `2 int_0^Lambda cos(x xi) vhat(xi) dxi`, with the `t = xi^a`
/// substitution flattening the power-law endpoint.
fn cutoff_value(v: &PairPotential, lambda_cut: f64, x: f64) -> Result<f64> {
    match v {
        PairPotential::Zero => Ok(0.0),
        PairPotential::Regular { profile } => {
            let hi = lambda_cut.min(profile.xi_max);
            Ok(2.0 * oscillatory_integral(&|xi| profile.at(xi) * (x * xi).cos(), 0.0, hi, x))
        }
        PairPotential::PowerLaw { lambda, a, d } => {
            if *d != 1 {
                return Err(Error::Range(
                    "grid tabulation of cutoffs is implemented for d = 1".into(),
                ));
            }
            let c = lambda * riesz_constant(1, *a);
            // int_0^L xi^(a-1) cos(x xi) dxi = (1/a) int_0^{L^a} cos(x t^(1/a)) dt
            let ainv = 1.0 / a;
            let val = oscillatory_integral(
                &|t| (x * t.powf(ainv)).cos(),
                0.0,
                lambda_cut.powf(*a),
                x,
            ) * ainv;
            Ok(2.0 * c * val)
        }
    }
}

/// Ultraviolet-regularized pair potential `V_Lambda` and its tail `W_Lambda`.
#[derive(Debug, Clone)]
pub struct CutoffPotential {
    pub source: PairPotential,
    pub lambda_cut: f64,
    /// `V_Lambda(o * spacing)` for offsets o = 0..n-1.
    pub v_cut: Vec<f64>,
    /// `W_Lambda = V - V_Lambda` at the same offsets; the o = 0 entry uses the
    /// singular-cell average of V.
    pub tail: Vec<f64>,
    pub spacing: f64,
}

/// Diagonal-cell average of the power-law: `(1/D) int_{-D/2}^{D/2} lambda |t|^-a dt`.
pub fn singular_cell_average(lambda: f64, a: f64, spacing: f64) -> f64 {
    2.0 * lambda * (spacing / 2.0).powf(1.0 - a) / ((1.0 - a) * spacing)
}

/// Even-function value of V at a grid offset, with the diagonal cell averaged.
fn pair_value_at_offset(v: &PairPotential, offset: f64, spacing: f64) -> Result<f64> {
    match v {
        PairPotential::Zero => Ok(0.0),
        PairPotential::PowerLaw { lambda, a, .. } => {
            if offset == 0.0 {
                Ok(singular_cell_average(*lambda, *a, spacing))
            } else {
                Ok(lambda * offset.abs().powf(-a))
            }
        }
        PairPotential::Regular { profile } => Ok(2.0 * oscillatory_integral(
            &|xi| profile.at(xi) * (offset * xi).cos(),
            0.0,
            profile.xi_max,
            offset,
        )),
    }
}

/// Builds the cutoff potential on the offset grid `{0, D, 2D, ...}`.
pub fn apply_cutoff(v: &PairPotential, lambda_cut: f64, grid: &Grid) -> Result<CutoffPotential> {
    if lambda_cut < 1.0 {
        return Err(Error::CutoffTooSmall(lambda_cut));
    }
    let n = grid.n();
    let spacing = grid.spacing();
    let mut v_cut = Vec::with_capacity(n);
    let mut tail = Vec::with_capacity(n);
    for o in 0..n {
        let x = o as f64 * spacing;
        let vc = cutoff_value(v, lambda_cut, x)?;
        let vfull = pair_value_at_offset(v, x, spacing)?;
        v_cut.push(vc);
        tail.push(vfull - vc);
    }
    Ok(CutoffPotential {
        source: v.clone(),
        lambda_cut,
        v_cut,
        tail,
        spacing,
    })
}

impl CutoffPotential {
    /// `||V_Lambda|| = int_{|xi|<=Lambda} vhat (1 + |xi|) dxi`, closed form for
    /// power-law sources.
    pub fn v_norm(&self) -> Result<f64> {
        match &self.source {
            PairPotential::PowerLaw { lambda, a, d } => {
                if *d != 1 {
                    return Err(Error::Range("v_norm of cutoffs assumes d = 1".into()));
                }
                let c = lambda * riesz_constant(1, *a);
                let l = self.lambda_cut;
                Ok(2.0 * c * (l.powf(*a) / a + l.powf(1.0 + a) / (1.0 + a)))
            }
            PairPotential::Regular { profile } => {
                let restricted = RegularProfile {
                    xi_max: profile.xi_max,
                    values: profile.values.clone(),
                };
                v_norm_profile_upto(&restricted, self.lambda_cut)
            }
            PairPotential::Zero => Ok(0.0),
        }
    }

    /// Discrete L2 norm of the tail over the box (both half-lines).
    pub fn tail_l2_grid(&self) -> f64 {
        let mut acc = self.tail[0] * self.tail[0];
        for t in &self.tail[1..] {
            acc += 2.0 * t * t;
        }
        (acc * self.spacing).sqrt()
    }
}

/// `||V|| = int vhat(xi) (1 + |xi|) dxi` for the regular class; exact on the
/// piecewise-linear profile.
pub fn v_norm(v: &PairPotential) -> Result<f64> {
    match v {
        PairPotential::Regular { profile } => v_norm_profile_upto(profile, profile.xi_max),
        PairPotential::PowerLaw { .. } => Err(Error::NotRegularClass(
            "power-law potentials enter the regular class only after a cutoff".into(),
        )),
        PairPotential::Zero => Ok(0.0),
    }
}

fn v_norm_profile_upto(profile: &RegularProfile, xi_cap: f64) -> Result<f64> {
    // integrate the piecewise-linear profile times (1 + |xi|) segment by segment
    let m = profile.values.len();
    let dxi = profile.dxi();
    let mut acc = 0.0;
    for k in 0..m - 1 {
        let x0 = -profile.xi_max + k as f64 * dxi;
        let x1 = x0 + dxi;
        let lo = x0.max(-xi_cap);
        let hi = x1.min(xi_cap);
        if hi <= lo {
            continue;
        }
        let f = |x: f64| {
            let s = (x - x0) / dxi;
            (profile.values[k] * (1.0 - s) + profile.values[k + 1] * s) * (1.0 + x.abs())
        };
        // the integrand is piecewise quadratic on the segment; Simpson is exact
        // away from xi = 0, and the grid is symmetric so segments do not
        // straddle zero for even sample counts; subdivide at 0 to be safe.
        let pieces = if lo < 0.0 && hi > 0.0 {
            vec![(lo, 0.0), (0.0, hi)]
        } else {
            vec![(lo, hi)]
        };
        for (a, b) in pieces {
            let mid = 0.5 * (a + b);
            acc += (b - a) / 6.0 * (f(a) + 4.0 * f(mid) + f(b));
        }
    }
    Ok(acc)
}

/// Radial tail value `W_Lambda(r)` for power-law sources in d = 1 or d = 3,
/// by the oscillatory integral over `|xi| > Lambda` with series acceleration.
pub fn tail_radial_value(lambda: f64, a: f64, d: u32, lambda_cut: f64, r: f64) -> Result<f64> {
    let c = lambda * riesz_constant(d, a);
    // Integrand in radial form:
    //   d = 1: 2 c int_L^inf xi^(a-1) cos(r xi) dxi
    //   d = 3: (4 pi c / r) int_L^inf xi^(a-2) sin(r xi) dxi
    // Substituting u = r xi turns both into u-power integrals from L r.
    let lo = lambda_cut * r;
    let (power, use_sin, prefac) = match d {
        1 => (a - 1.0, false, 2.0 * c * r.powf(-a)),
        3 => (a - 2.0, true, 4.0 * PI * c * r.powf(-a) / 1.0),
        _ => {
            return Err(Error::Range(format!(
                "radial tails implemented for d = 1 and d = 3, got {d}"
            )))
        }
    };
    // Integrate in half-period chunks and Euler-average the alternating sums.
    let f = |u: f64| -> f64 {
        let osc = if use_sin { u.sin() } else { u.cos() };
        u.powf(power) * osc
    };
    let mut chunks = Vec::with_capacity(64);
    let mut u0 = lo;
    for _ in 0..64 {
        let u1 = ((u0 / PI).floor() + 1.0) * PI;
        chunks.push(oscillatory_integral(&f, u0, u1, 1.0));
        u0 = u1;
    }
    // Euler transform: repeatedly average partial sums.
    let mut s: Vec<f64> = chunks
        .iter()
        .scan(0.0, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    for _ in 0..10 {
        s = s.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    Ok(prefac * s[s.len() - 1])
}

/// `L^p` norm of the power-law cutoff tail by radial quadrature in dimension
/// d. Admissible range `2 <= p < d/a`.
pub fn tail_lp_norm_radial(lambda: f64, a: f64, d: u32, lambda_cut: f64, p: f64) -> Result<f64> {
    let df = d as f64;
    if !(2.0 <= p && p < df / a) {
        return Err(Error::Range(format!(
            "tail L^p norm requires 2 <= p < d/a = {:.3}, got p = {p}",
            df / a
        )));
    }
    // log-radial quadrature; the integrand decays like r^(-p) at infinity and
    // like r^(-a p) (integrable) at zero.
    let r_lo = 1e-4 / lambda_cut;
    let r_hi = 2.0e3 / lambda_cut;
    let m = 4000usize;
    let lr0 = r_lo.ln();
    let lstep = (r_hi.ln() - lr0) / (m as f64 - 1.0);
    let surface = match d {
        1 => 2.0,
        3 => 4.0 * PI,
        _ => {
            return Err(Error::Range(format!(
                "radial tails implemented for d = 1 and d = 3, got {d}"
            )))
        }
    };
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..m {
        let r = (lr0 + k as f64 * lstep).exp();
        let w = tail_radial_value(lambda, a, d, lambda_cut, r)?;
        let g = w.abs().powf(p) * r.powf(df - 1.0);
        if let Some((rp, gp)) = prev {
            acc += 0.5 * (g + gp) * (r - rp);
        }
        prev = Some((r, g));
    }
    Ok((surface * acc).powf(1.0 / p))
}

/// Discrete `L^p` norm of the cutoff tail, radial quadrature in the source
/// dimension. Admissible range `2 <= p < d/a`.
pub fn tail_lp_norm(cut: &CutoffPotential, p: f64) -> Result<f64> {
    let (lambda, a, d) = match &cut.source {
        PairPotential::PowerLaw { lambda, a, d } => (*lambda, *a, *d),
        PairPotential::Regular { profile } => {
            // tail of a compactly supported profile: zero once Lambda covers it
            if cut.lambda_cut >= profile.xi_max {
                return Ok(0.0);
            }
            // discrete grid norm of the tabulated tail (d = 1 grid)
            let mut acc = cut.tail[0].abs().powf(p);
            for t in &cut.tail[1..] {
                acc += 2.0 * t.abs().powf(p);
            }
            return Ok((acc * cut.spacing).powf(1.0 / p));
        }
        PairPotential::Zero => return Ok(0.0),
    };
    tail_lp_norm_radial(lambda, a, d, cut.lambda_cut, p)
}

/// Grid convolution `(V * rho)(x_j) = D sum_k V(x_j - x_k) rho_k` with the
/// diagonal cell replaced by the exact cell integral for power laws.
pub fn convolve(v: &PairPotential, rho: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    convolve_table(&offset_table(v, grid)?, rho, grid)
}

/// Precomputed offset table for repeated convolutions with the same V.
pub fn offset_table(v: &PairPotential, grid: &Grid) -> Result<Vec<f64>> {
    (0..grid.n())
        .map(|o| pair_value_at_offset(v, o as f64 * grid.spacing(), grid.spacing()))
        .collect()
}

pub fn convolve_table(table: &[f64], rho: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    let n = grid.n();
    if rho.len() != n || table.len() != n {
        return Err(Error::Dimension(format!(
            "convolution sizes: rho {}, table {}, grid {}",
            rho.len(),
            table.len(),
            n
        )));
    }
    if rho.iter().any(|&r| r < -1e-12) {
        return Err(Error::InvalidDensity(
            "density has negative entries beyond -1e-12".into(),
        ));
    }
    let mut out = vec![0.0; n];
    for j in 0..n {
        let mut acc = 0.0;
        for k in 0..n {
            acc += table[(j as isize - k as isize).unsigned_abs()] * rho[k];
        }
        out[j] = acc * grid.spacing();
    }
    Ok(out)
}

/// Convolution against a cutoff potential's tabulated values.
pub fn convolve_cutoff(cut: &CutoffPotential, rho: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    convolve_table(&cut.v_cut, rho, grid)
}

/// Exchange operator `X_gamma` with kernel `V(x-y) gamma(x, y)`: under the
/// coefficient convention this is the entrywise product of the offset table
/// with the gamma matrix.
pub fn exchange_kernel(
    v: &PairPotential,
    gamma: &Array2<f64>,
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
    let table = offset_table(v, grid)?;
    exchange_from_table(&table, gamma)
}

pub fn exchange_from_table(table: &[f64], gamma: &Array2<f64>) -> Result<SymmetricOperator> {
    let n = gamma.nrows();
    let mut x = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            x[[i, j]] = table[(i as isize - j as isize).unsigned_abs()] * gamma[[i, j]];
        }
    }
    SymmetricOperator::new(x)
}

/// Loads a tabulated potential from the two-column text format with the
/// header `# potential d=<d>`.
pub fn load_tabulated(text: &str) -> Result<(u32, Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Range("empty potential file".into()))?;
    let d: u32 = header
        .trim()
        .strip_prefix("# potential d=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Range(format!("bad potential header: {header:?}")))?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let x: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Range(format!("line {}: bad x", k + 2)))?;
        let v: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Range(format!("line {}: bad value", k + 2)))?;
        xs.push(x);
        vs.push(v);
    }
    Ok((d, xs, vs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::operator_norm;

    #[test]
    fn power_law_fourier_homogeneity() {
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let r = pair_fourier(&v, 2.0).unwrap() / pair_fourier(&v, 1.0).unwrap();
        assert!((r - 2f64.powf(-0.5)).abs() < 1e-14);
        assert!(matches!(pair_fourier(&v, 0.0), Err(Error::SingularFrequency)));
    }

    #[test]
    fn riesz_constant_fourier_inversion() {
        // 2 C_{1,a} Gamma(a) cos(pi a / 2) = 1 expresses Fourier inversion of
        // the 1d Riesz kernel; checks the Gamma-function plumbing.
        for a in [0.2, 0.5, 0.8] {
            let lhs = 2.0 * riesz_constant(1, a) * gamma_fn(a) * (PI * a / 2.0).cos();
            assert!((lhs - 1.0).abs() < 1e-12, "a = {a}: {lhs}");
        }
    }

    #[test]
    fn regular_profile_lookup_exact_at_nodes() {
        let p = RegularProfile::new(2.0, vec![0.0, 1.0, 4.0, 1.0, 0.0]).unwrap();
        let v = PairPotential::Regular { profile: p };
        assert!((pair_fourier(&v, 0.0).unwrap() - 4.0).abs() < 1e-14);
        assert!((pair_fourier(&v, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((pair_fourier(&v, 3.0).unwrap()).abs() < 1e-14);
        assert!((pair_fourier(&v, 0.5).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn tabulated_power_law_transform_matches_closed_form() {
        // Discrete transform oracle, independent of pair_fourier: tabulate V by
        // exact cell averages on [0, L], rectangle-sum the cosine transform,
        // and add the two-term asymptotic tail beyond L.
        let (lambda, a) = (1.0, 0.5);
        let v = PairPotential::power_law(lambda, a, 1).unwrap();
        let (l, m) = (200.0, 40000usize);
        let d = l / m as f64;
        let anti = |t: f64| lambda * t.powf(1.0 - a) / (1.0 - a);
        for xi in [0.8, 1.6, 3.0] {
            let mut acc = 0.0;
            for o in 0..m {
                let lo = (o as f64 - 0.5).max(0.0) * d;
                let hi = (o as f64 + 0.5) * d;
                let cell = (anti(hi) - anti(lo)) / d;
                acc += cell * (xi * o as f64 * d).cos() * d;
            }
            // int_L^inf t^-a cos(xi t) dt ~ -L^-a sin(xi L)/xi - (a/xi^2) L^-(a+1) cos(xi L)
            let lb = (m as f64 - 0.5) * d;
            acc += -lb.powf(-a) * (xi * lb).sin() / xi
                - (a / (xi * xi)) * lb.powf(-a - 1.0) * (xi * lb).cos();
            let num = 2.0 * acc / (2.0 * PI);
            let exact = pair_fourier(&v, xi).unwrap();
            assert!(
                (num - exact).abs() <= 0.02 * exact,
                "xi = {xi}: {num} vs {exact}"
            );
        }
    }

    #[test]
    fn cutoff_finite_at_origin() {
        let grid = Grid::new(8.0, 257);
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let cut = apply_cutoff(&v, 8.0, &grid).unwrap();
        // V_Lambda(0) = 2 lambda C int_0^Lambda xi^(a-1) = 2 lambda C Lambda^a / a
        let exact = 2.0 * riesz_constant(1, 0.5) * 8f64.powf(0.5) / 0.5;
        assert!(
            (cut.v_cut[0] - exact).abs() < 1e-8 * exact,
            "{} vs {exact}",
            cut.v_cut[0]
        );
        assert!(cut.v_cut[0].is_finite());
        assert!(matches!(
            apply_cutoff(&v, 0.5, &grid),
            Err(Error::CutoffTooSmall(_))
        ));
    }

    #[test]
    fn cutoff_tail_l2_decreases() {
        let grid = Grid::new(8.0, 513);
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let mut prev = f64::INFINITY;
        for lam in [4.0, 8.0, 16.0, 32.0] {
            let cut = apply_cutoff(&v, lam, &grid).unwrap();
            let nrm = cut.tail_l2_grid();
            assert!(nrm < prev, "Lambda = {lam}: {nrm} !< {prev}");
            prev = nrm;
        }
    }

    #[test]
    fn v_norm_closed_form_matches_quadrature() {
        let grid = Grid::new(8.0, 65);
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let cut = apply_cutoff(&v, 16.0, &grid).unwrap();
        let implemented = cut.v_norm().unwrap();
        // independent quadrature of 2 c xi^(a-1)(1+xi) with the t = xi^a substitution
        let c = riesz_constant(1, 0.5);
        let m = 200000;
        let t_hi = 16f64.powf(0.5);
        let dt = t_hi / m as f64;
        let mut acc = 0.0;
        for k in 0..m {
            let t = (k as f64 + 0.5) * dt;
            let xi = t * t; // t^(1/a) with a = 1/2
            acc += (1.0 + xi) * dt;
        }
        let oracle = 2.0 * c * acc / 0.5;
        assert!(
            (implemented - oracle).abs() <= 1e-6 * oracle,
            "{implemented} vs {oracle}"
        );
    }

    #[test]
    fn v_norm_of_indicator_profile() {
        // profile = indicator of [-1, 1]: ||V|| = int (1 + |xi|) dxi = 3
        let m = 2001;
        let vals: Vec<f64> = (0..m)
            .map(|k| {
                let xi = -4.0 + 8.0 * k as f64 / (m - 1) as f64;
                if xi.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let p = RegularProfile::new(4.0, vals).unwrap();
        let v = PairPotential::Regular { profile: p };
        let nrm = v_norm(&v).unwrap();
        // the piecewise-linear profile adds one ramp segment of width dxi at
        // each edge of the indicator
        assert!((nrm - 3.0).abs() < 0.01, "norm = {nrm}");
        assert!(nrm >= 3.0);

        // linearity in the profile
        let p2 = RegularProfile::new(
            4.0,
            (0..m)
                .map(|k| {
                    let xi = -4.0 + 8.0 * k as f64 / (m - 1) as f64;
                    if xi.abs() <= 1.0 {
                        2.5
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
        .unwrap();
        let nrm2 = v_norm(&PairPotential::Regular { profile: p2 }).unwrap();
        assert!((nrm2 - 2.5 * nrm).abs() < 1e-12);
    }

    #[test]
    fn v_norm_rejects_bare_power_law() {
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        assert!(matches!(v_norm(&v), Err(Error::NotRegularClass(_))));
    }

    #[test]
    fn tail_lp_norm_rejects_inadmissible_exponents() {
        let grid = Grid::new(8.0, 65);
        // d = 1, a = 0.5: admissible range 2 <= p < 2 is empty
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let cut = apply_cutoff(&v, 8.0, &grid).unwrap();
        assert!(matches!(tail_lp_norm(&cut, 2.0), Err(Error::Range(_))));
        // d = 1, a = 0.3 admits p = 2
        let v2 = PairPotential::power_law(1.0, 0.3, 1).unwrap();
        let cut2 = apply_cutoff(&v2, 8.0, &grid).unwrap();
        assert!(tail_lp_norm(&cut2, 2.0).unwrap() > 0.0);
        assert!(matches!(tail_lp_norm(&cut2, 1.5), Err(Error::Range(_))));
        assert!(matches!(tail_lp_norm(&cut2, 4.0), Err(Error::Range(_))));
    }

    #[test]
    fn tail_lp_slope_d1_admissible_case() {
        // d = 1, a = 0.3, p = 2: exact scaling gives slope -(1/p - a) = -0.2
        let grid = Grid::new(8.0, 65);
        let v = PairPotential::power_law(1.0, 0.3, 1).unwrap();
        let lams = [8.0, 16.0, 32.0, 64.0];
        let mut logs = Vec::new();
        for &l in &lams {
            let cut = apply_cutoff(&v, l, &grid).unwrap();
            logs.push(tail_lp_norm(&cut, 2.0).unwrap().ln());
        }
        let slope = fit_slope(&lams.map(|l: f64| l.ln()), &logs);
        assert!((slope + 0.2).abs() < 0.03, "slope = {slope}");
    }

    fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn convolution_with_point_mass_recovers_potential() {
        let grid = Grid::new(8.0, 513);
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let n = grid.n();
        let mut rho = vec![0.0; n];
        let j0 = n / 2;
        rho[j0] = 1.0 / grid.spacing(); // unit mass in one cell
        let out = convolve(&v, &rho, &grid).unwrap();
        for (j, &x) in grid.points().iter().enumerate() {
            let dist = (x - grid.points()[j0]).abs();
            if dist > 0.5 {
                let exact = dist.powf(-0.5);
                assert!(
                    (out[j] - exact).abs() < 1e-12 * exact.max(1.0),
                    "x = {x}: {} vs {exact}",
                    out[j]
                );
            }
        }
    }

    #[test]
    fn convolution_is_linear_and_positive() {
        let grid = Grid::new(4.0, 129);
        let v = PairPotential::power_law(0.7, 0.5, 1).unwrap();
        let n = grid.n();
        let rho1: Vec<f64> = (0..n).map(|j| ((j * 13) % 7) as f64 / 7.0).collect();
        let rho2: Vec<f64> = (0..n).map(|j| ((j * 5) % 11) as f64 / 11.0).collect();
        let c1 = convolve(&v, &rho1, &grid).unwrap();
        let c2 = convolve(&v, &rho2, &grid).unwrap();
        let sum: Vec<f64> = rho1.iter().zip(&rho2).map(|(a, b)| a + b).collect();
        let cs = convolve(&v, &sum, &grid).unwrap();
        for j in 0..n {
            assert!((cs[j] - c1[j] - c2[j]).abs() < 1e-10);
            assert!(c1[j] >= 0.0);
        }
    }

    #[test]
    fn convolution_against_uniform_density_matches_quadrature() {
        // PowerLaw(1, 0.5) against uniform rho on [-1, 1] at n = 2048:
        // (V * rho)(x) = int_-1^1 |x - y|^-1/2 dy has a closed form.
        let grid = Grid::new(8.0, 2048);
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let n = grid.n();
        let rho: Vec<f64> = grid
            .points()
            .iter()
            .map(|&x| if x.abs() <= 1.0 { 0.5 } else { 0.0 })
            .collect();
        // normalize the discrete mass to exactly 1 for the comparison
        let mass: f64 = rho.iter().sum::<f64>() * grid.spacing();
        let rho: Vec<f64> = rho.iter().map(|r| r / mass).collect();
        let out = convolve(&v, &rho, &grid).unwrap();
        let closed = |x: f64| -> f64 {
            // 0.5 int_-1^1 |x-y|^-1/2 dy = sqrt(|x+1|) +- sqrt(|x-1|) cases
            if x.abs() <= 1.0 {
                ((1.0 + x).sqrt() + (1.0 - x).sqrt())
            } else {
                let s = x.abs();
                ((s + 1.0).sqrt() - (s - 1.0).sqrt())
            }
        };
        for (j, &x) in grid.points().iter().enumerate() {
            let e = closed(x);
            assert!(
                (out[j] - e).abs() <= 5e-3 * e.max(0.2),
                "x = {x}: {} vs {e}",
                out[j]
            );
        }
    }

    #[test]
    fn constant_regular_potential_convolves_to_mass() {
        // profile concentrated at xi = 0 acts as V = const; approximate with a
        // narrow triangle of integral c.
        let grid = Grid::new(4.0, 257);
        let eps = 1e-3;
        let c = 2.7;
        let p = RegularProfile::new(eps, vec![0.0, c / eps, 0.0]).unwrap();
        let v = PairPotential::Regular { profile: p };
        let n = grid.n();
        let rho: Vec<f64> = (0..n).map(|j| (j % 5) as f64).collect();
        let mass: f64 = rho.iter().sum::<f64>() * grid.spacing();
        let out = convolve(&v, &rho, &grid).unwrap();
        for &o in &out {
            assert!((o - c * mass).abs() < 1e-4 * c * mass);
        }
    }

    #[test]
    fn convolution_rejects_negative_density() {
        let grid = Grid::new(4.0, 64);
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let mut rho = vec![0.0; 64];
        rho[3] = -1e-6;
        assert!(matches!(
            convolve(&v, &rho, &grid),
            Err(Error::InvalidDensity(_))
        ));
    }

    #[test]
    fn exchange_kernel_zero_cases() {
        let grid = Grid::new(4.0, 32);
        let gamma = Array2::<f64>::zeros((32, 32));
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let x = exchange_kernel(&v, &gamma, &grid).unwrap();
        assert_eq!(operator_norm(x.as_array()).unwrap(), 0.0);
        let x0 = exchange_kernel(&PairPotential::Zero, &Array2::eye(32), &grid).unwrap();
        assert_eq!(operator_norm(x0.as_array()).unwrap(), 0.0);
    }

    #[test]
    fn exchange_norm_bounded_by_fourier_mass() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        // || X_gamma || <= || vhat ||_L1 for 0 <= gamma <= 1 and vhat >= 0
        let grid = Grid::new(6.0, 96);
        let v = PairPotential::power_law(1.0, 0.5, 1).unwrap();
        let cut = apply_cutoff(&v, 8.0, &grid).unwrap();
        // || vhat_Lambda ||_L1 = 2 c Lambda^a / a
        let l1 = 2.0 * riesz_constant(1, 0.5) * 8f64.powf(0.5) / 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            // random rank-3 projection
            let mut q = Array2::<f64>::zeros((96, 3));
            for v in q.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            // Gram-Schmidt
            for k in 0..3 {
                for j in 0..k {
                    let d = q.column(k).dot(&q.column(j));
                    let col_j = q.column(j).to_owned();
                    q.column_mut(k).zip_mut_with(&col_j, |a, b| *a -= d * b);
                }
                let nrm = q.column(k).dot(&q.column(k)).sqrt();
                q.column_mut(k).mapv_inplace(|x| x / nrm);
            }
            let gamma = q.dot(&q.t());
            let x = exchange_from_table(&cut.v_cut, &gamma).unwrap();
            let nrm = operator_norm(x.as_array()).unwrap();
            assert!(nrm <= l1 + 1e-10, "{nrm} vs {l1}");
        }
    }

    #[test]
    fn load_tabulated_roundtrip() {
        let text = "# potential d=1\n-1.0 2.5\n0.0 0.0\n1.0 2.5\n";
        let (d, xs, vs) = load_tabulated(text).unwrap();
        assert_eq!(d, 1);
        assert_eq!(xs, vec![-1.0, 0.0, 1.0]);
        assert_eq!(vs, vec![2.5, 0.0, 2.5]);
        assert!(load_tabulated("junk\n1 2\n").is_err());
    }

    #[test]
    fn confining_check() {
        let grid = Grid::new(8.0, 64);
        assert!(ExternalPotential::harmonic().is_confining(&grid).unwrap());
        let flat = ExternalPotential::EvenPolynomial { coeffs: vec![0.3] };
        assert!(!flat.is_confining(&grid).unwrap());
    }
}
