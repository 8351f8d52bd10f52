//! Exact finite-mode fermionic Fock space: ladder operators in the
//! occupation-bitmask basis, second quantization, the interacting
//! Hamiltonian, N-particle sectors, ground states, and reduced density
//! matrices.
//!
//! Sign convention (Jordan-Wigner): `a_i^dag` flips bit i on a bitmask with
//! phase `(-1)^(number of occupied modes j < i)`. Every product of ladder
//! operators maps each basis vector to at most one signed basis vector, so
//! operator monomials are stored as signed partial permutations and composed
//! in O(2^M).

pub mod ph;
pub mod verify;

use ndarray::Array2;

use crate::error::{Error, Result};

pub const MAX_MODES: usize = 12;

/// Finite-mode fermionic Fock space over M modes.
#[derive(Debug, Clone)]
pub struct FockSpace {
    pub modes: usize,
    pub dim: usize,
}

impl FockSpace {
    pub fn new(modes: usize) -> Result<FockSpace> {
        if modes < 2 || modes > MAX_MODES {
            return Err(Error::TooManyModes(modes));
        }
        Ok(FockSpace {
            modes,
            dim: 1usize << modes,
        })
    }

    pub fn annihilator(&self, i: usize) -> Monomial {
        assert!(i < self.modes);
        let mut col = vec![None; self.dim];
        for (b, slot) in col.iter_mut().enumerate() {
            if b & (1 << i) != 0 {
                let sign = if ((b & ((1 << i) - 1)).count_ones()) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                *slot = Some((b ^ (1 << i), sign));
            }
        }
        Monomial { col }
    }

    pub fn creator(&self, i: usize) -> Monomial {
        self.annihilator(i).transpose(self.dim)
    }

    /// Diagonal parity of mode i: `1 - 2 n_i`.
    pub fn mode_parity(&self, i: usize) -> Monomial {
        let col = (0..self.dim)
            .map(|b| {
                let s = if b & (1 << i) != 0 { -1.0 } else { 1.0 };
                Some((b, s))
            })
            .collect();
        Monomial { col }
    }

    /// Global particle parity `(-1)^N`.
    pub fn parity(&self) -> Monomial {
        let col = (0..self.dim)
            .map(|b| {
                let s = if (b as u32).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                Some((b, s))
            })
            .collect();
        Monomial { col }
    }

    pub fn identity(&self) -> Monomial {
        Monomial {
            col: (0..self.dim).map(|b| Some((b, 1.0))).collect(),
        }
    }

    /// Number operator as a dense matrix.
    pub fn number_dense(&self) -> Array2<f64> {
        let mut n = Array2::<f64>::zeros((self.dim, self.dim));
        for b in 0..self.dim {
            n[[b, b]] = (b as u32).count_ones() as f64;
        }
        n
    }

    /// `dGamma(A) = sum_ij A_ij a_i^dag a_j` as a dense matrix.
    pub fn second_quantize(&self, a: &Array2<f64>) -> Result<Array2<f64>> {
        let m = self.modes;
        if a.nrows() != m || a.ncols() != m {
            return Err(Error::Dimension(format!(
                "mode operator is {}x{} for {m} modes",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut out = Array2::<f64>::zeros((self.dim, self.dim));
        for i in 0..m {
            let cre = self.creator(i);
            for j in 0..m {
                let c = a[[i, j]];
                if c == 0.0 {
                    continue;
                }
                let mono = cre.compose(&self.annihilator(j));
                mono.add_into(&mut out, c);
            }
        }
        Ok(out)
    }

    /// The quartic interaction `sum W[(i,k),(j,l)] a_i^dag a_j^dag a_l a_k`
    /// (no prefactor), as a dense matrix.
    pub fn quartic_dense(&self, w: &PairTensor) -> Result<Array2<f64>> {
        let m = self.modes;
        if w.modes != m {
            return Err(Error::Dimension("tensor/space mode mismatch".into()));
        }
        let mut out = Array2::<f64>::zeros((self.dim, self.dim));
        let cres: Vec<Monomial> = (0..m).map(|i| self.creator(i)).collect();
        let anns: Vec<Monomial> = (0..m).map(|i| self.annihilator(i)).collect();
        for i in 0..m {
            for j in 0..m {
                let cij = cres[i].compose(&cres[j]);
                for l in 0..m {
                    let cijl = cij.compose(&anns[l]);
                    for k in 0..m {
                        let c = w.get(i, k, j, l);
                        if c == 0.0 {
                            continue;
                        }
                        cijl.compose(&anns[k]).add_into(&mut out, c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Full interacting Hamiltonian `dGamma(h) + (2N)^-1 * quartic(W)`.
    pub fn hamiltonian(
        &self,
        h: &Array2<f64>,
        w: &PairTensor,
        n_particles: f64,
    ) -> Result<Array2<f64>> {
        w.check_symmetry()?;
        let mut out = self.second_quantize(h)?;
        let quartic = self.quartic_dense(w)?;
        out.scaled_add(1.0 / (2.0 * n_particles), &quartic);
        Ok(out)
    }

    /// Bitmasks of the N-particle sector, ascending.
    pub fn sector_basis(&self, n_particles: usize) -> Vec<usize> {
        (0..self.dim)
            .filter(|b| (*b as u32).count_ones() as usize == n_particles)
            .collect()
    }
}

/// Signed partial permutation: column b maps to at most one `(row, coeff)`.
#[derive(Debug, Clone)]
pub struct Monomial {
    pub col: Vec<Option<(usize, f64)>>,
}

impl Monomial {
    pub fn dim(&self) -> usize {
        self.col.len()
    }

    /// `self . other` (apply `other` first).
    pub fn compose(&self, other: &Monomial) -> Monomial {
        let col = other
            .col
            .iter()
            .map(|entry| {
                entry.and_then(|(mid, c1)| self.col[mid].map(|(fin, c2)| (fin, c1 * c2)))
            })
            .collect();
        Monomial { col }
    }

    pub fn transpose(&self, dim: usize) -> Monomial {
        let mut col = vec![None; dim];
        for (b, entry) in self.col.iter().enumerate() {
            if let Some((r, c)) = entry {
                col[*r] = Some((b, *c));
            }
        }
        Monomial { col }
    }

    pub fn scale(&self, s: f64) -> Monomial {
        Monomial {
            col: self
                .col
                .iter()
                .map(|e| e.map(|(r, c)| (r, c * s)))
                .collect(),
        }
    }

    pub fn add_into(&self, dense: &mut Array2<f64>, coeff: f64) {
        for (b, entry) in self.col.iter().enumerate() {
            if let Some((r, c)) = entry {
                dense[[*r, b]] += coeff * c;
            }
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let d = self.dim();
        let mut m = Array2::<f64>::zeros((d, d));
        self.add_into(&mut m, 1.0);
        m
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (b, entry) in self.col.iter().enumerate() {
            if let Some((r, c)) = entry {
                out[*r] += c * v[b];
            }
        }
        out
    }

    /// Anticommutator with another monomial, as a dense matrix.
    pub fn anticommutator(&self, other: &Monomial) -> Array2<f64> {
        let mut m = self.compose(other).to_dense();
        other.compose(self).add_into(&mut m, 1.0);
        m
    }
}

/// Two-body coefficients `W[(a,c),(b,d)] = iint V(x-y) f_a(x) f_c(x) f_b(y) f_d(y)`;
/// the Hamiltonian tensor is `V_ijkl = W[(i,k),(j,l)]`.
#[derive(Debug, Clone)]
pub struct PairTensor {
    pub modes: usize,
    w: Vec<f64>,
}

impl PairTensor {
    pub fn zeros(modes: usize) -> PairTensor {
        PairTensor {
            modes,
            w: vec![0.0; modes * modes * modes * modes],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize, j: usize, l: usize) -> f64 {
        let m = self.modes;
        self.w[((i * m + k) * m + j) * m + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, k: usize, j: usize, l: usize, v: f64) {
        let m = self.modes;
        self.w[((i * m + k) * m + j) * m + l] = v;
    }

    /// Compression of a lattice pair potential to a mode basis:
    /// `W[(a,c),(b,d)] = sum_xy table(|x-y|) (m_a m_c)(x) (m_b m_d)(y)`
    /// over orthonormal coefficient columns.
    pub fn from_offset_table(table: &[f64], modes: &Array2<f64>) -> Result<PairTensor> {
        let n = modes.nrows();
        let m = modes.ncols();
        if table.len() != n {
            return Err(Error::Dimension("offset table length != grid size".into()));
        }
        // products p_(a,c)(x) for a <= c
        let npairs = m * (m + 1) / 2;
        let mut pairs = Array2::<f64>::zeros((n, npairs));
        let mut pair_index = vec![(0usize, 0usize); npairs];
        let mut idx = 0;
        for a in 0..m {
            for c in a..m {
                for x in 0..n {
                    pairs[[x, idx]] = modes[[x, a]] * modes[[x, c]];
                }
                pair_index[idx] = (a, c);
                idx += 1;
            }
        }
        // q = V pairs via the Toeplitz table
        let mut q = Array2::<f64>::zeros((n, npairs));
        for x in 0..n {
            for y in 0..n {
                let t = table[(x as isize - y as isize).unsigned_abs()];
                if t != 0.0 {
                    for p in 0..npairs {
                        q[[x, p]] += t * pairs[[y, p]];
                    }
                }
            }
        }
        let overlap = pairs.t().dot(&q); // npairs x npairs
        let mut w = PairTensor::zeros(m);
        for p1 in 0..npairs {
            let (a, c) = pair_index[p1];
            for p2 in 0..npairs {
                let (b, d) = pair_index[p2];
                let v = overlap[[p1, p2]];
                for (x, y) in [(a, c), (c, a)] {
                    for (u, t) in [(b, d), (d, b)] {
                        w.set(x, y, u, t, v);
                    }
                }
            }
        }
        Ok(w)
    }

    /// Symmetry required for a self-adjoint quartic: `V_ijkl = V_jilk`.
    pub fn check_symmetry(&self) -> Result<()> {
        let m = self.modes;
        let mut defect = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        defect = defect.max((self.get(i, k, j, l) - self.get(j, l, i, k)).abs());
                    }
                }
            }
        }
        if defect > 1e-10 {
            return Err(Error::IllFormedTensor(defect));
        }
        Ok(())
    }

    /// Mean-field mode matrix `MF_ac = sum_{b in S} W[(a,c),(b,b)]`.
    pub fn mean_field(&self, occupied: &[usize]) -> Array2<f64> {
        let m = self.modes;
        let mut mf = Array2::<f64>::zeros((m, m));
        for a in 0..m {
            for c in 0..m {
                let mut acc = 0.0;
                for &b in occupied {
                    acc += self.get(a, c, b, b);
                }
                mf[[a, c]] = acc;
            }
        }
        mf
    }

    /// Exchange mode matrix `EX_ac = sum_{g in S} W[(a,g),(g,c)]`.
    pub fn exchange(&self, occupied: &[usize]) -> Array2<f64> {
        let m = self.modes;
        let mut ex = Array2::<f64>::zeros((m, m));
        for a in 0..m {
            for c in 0..m {
                let mut acc = 0.0;
                for &g in occupied {
                    acc += self.get(a, g, g, c);
                }
                ex[[a, c]] = acc;
            }
        }
        ex
    }
}

/// N-particle sector of the interacting Hamiltonian.
#[derive(Debug, Clone)]
pub struct NBodySector {
    pub n_particles: usize,
    pub basis: Vec<usize>,
    pub h: Array2<f64>,
}

impl NBodySector {
    /// Restricts a Fock-space Hamiltonian to the N-particle sector.
    pub fn new(space: &FockSpace, h_fock: &Array2<f64>, n_particles: usize) -> NBodySector {
        let basis = space.sector_basis(n_particles);
        let d = basis.len();
        let mut h = Array2::<f64>::zeros((d, d));
        for (r, &br) in basis.iter().enumerate() {
            for (c, &bc) in basis.iter().enumerate() {
                h[[r, c]] = h_fock[[br, bc]];
            }
        }
        NBodySector {
            n_particles,
            basis,
            h,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Embeds a sector vector into the full Fock space.
    pub fn embed(&self, v: &[f64], dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (c, &b) in self.basis.iter().enumerate() {
            out[b] = v[c];
        }
        out
    }
}

/// Normalized ground vector and energy of a sector.
pub struct GroundState {
    pub psi_sector: Vec<f64>,
    pub energy: f64,
}

pub fn ground_state(sector: &NBodySector) -> Result<GroundState> {
    let d = sector.dim();
    if d == 0 {
        return Err(Error::Dimension("empty sector".into()));
    }
    if d > 4000 {
        // unreachable for M <= 12 (max C(12,6) = 924), kept as a guard
        return Err(Error::Range(format!(
            "sector dimension {d} exceeds the dense solver cap"
        )));
    }
    let sym = crate::lattice::SymmetricOperator::symmetrize(sector.h.clone());
    let dec = sym.eigh()?;
    let psi: Vec<f64> = dec.eigenvectors.column(0).to_vec();
    Ok(GroundState {
        psi_sector: psi,
        energy: dec.eigenvalues[0],
    })
}

/// One-particle reduced density matrix `(gamma_Psi)_ij = <Psi, a_j^dag a_i Psi>`.
pub fn reduced_density(space: &FockSpace, psi: &[f64]) -> Array2<f64> {
    let m = space.modes;
    let mut g = Array2::<f64>::zeros((m, m));
    for j in 0..m {
        let aj = space.annihilator(j);
        let ajpsi = aj.apply(psi);
        for i in 0..m {
            let ai = space.annihilator(i);
            let aipsi = ai.apply(psi);
            // <Psi, a_j^dag a_i Psi> = <a_j Psi, a_i Psi>
            let val: f64 = ajpsi.iter().zip(&aipsi).map(|(x, y)| x * y).sum();
            g[[i, j]] = val;
        }
    }
    g
}
