//! Particle-hole transformation around a reference Slater projection, the
//! fluctuation number, and the field-operator identity for the reduced
//! density matrix difference.
//!
//! For a projection onto a mode subset S the implementer is the signed
//! permutation `R = sign * prod_{i in S, desc} [(a_i + a_i^dag) Z_i] * P^(|S| mod 2)`
//! with `Z_i` the mode parity and `P` the global parity; the dressing factors
//! cancel the Jordan-Wigner string signs so the conjugation relations come
//! out clean: `R^dag a_i R = a_i` off S and `= a_i^dag` on S, and `R` maps the
//! vacuum to the Slater determinant over S with a positive sign.

use ndarray::Array2;

use super::{FockSpace, Monomial};
use crate::error::{Error, Result};

/// Particle-hole data for a reference projection diagonal in the mode basis.
#[derive(Debug, Clone)]
pub struct PHData {
    pub occupied: Vec<usize>,
    pub modes: usize,
    /// The implementing signed permutation.
    pub r: Monomial,
    /// Its inverse (= adjoint).
    pub r_dag: Monomial,
}

impl PHData {
    pub fn is_occupied(&self, i: usize) -> bool {
        self.occupied.contains(&i)
    }

    /// Diagonal of `u = 1 - gamma` in the mode basis.
    pub fn u_diag(&self, i: usize) -> f64 {
        if self.is_occupied(i) {
            0.0
        } else {
            1.0
        }
    }

    /// Diagonal of `v = gamma` in the mode basis.
    pub fn v_diag(&self, i: usize) -> f64 {
        if self.is_occupied(i) {
            1.0
        } else {
            0.0
        }
    }

    /// Reference projection as a mode matrix.
    pub fn gamma_modes(&self) -> Array2<f64> {
        let mut g = Array2::<f64>::zeros((self.modes, self.modes));
        for &i in &self.occupied {
            g[[i, i]] = 1.0;
        }
        g
    }
}

/// Builds the particle-hole transformation for the projection onto `occupied`.
pub fn particle_hole(space: &FockSpace, occupied: &[usize]) -> Result<PHData> {
    let m = space.modes;
    let mut occ: Vec<usize> = occupied.to_vec();
    occ.sort_unstable();
    occ.dedup();
    if occ.iter().any(|&i| i >= m) {
        return Err(Error::Dimension(format!(
            "occupied mode out of range for {m} modes"
        )));
    }
    let mut r = space.identity();
    for &i in occ.iter().rev() {
        // (a_i + a_i^dag) Z_i: disjoint supports, still a signed permutation
        let mut flip = vec![None; space.dim];
        let ann = space.annihilator(i);
        let cre = space.creator(i);
        for (b, slot) in flip.iter_mut().enumerate() {
            let z = if b & (1 << i) != 0 { -1.0 } else { 1.0 };
            let target = if b & (1 << i) != 0 {
                ann.col[b]
            } else {
                cre.col[b]
            };
            *slot = target.map(|(row, c)| (row, c * z));
        }
        r = r.compose(&Monomial { col: flip });
    }
    if occ.len() % 2 == 1 {
        r = r.compose(&space.parity());
    }
    // fix the global sign: R vacuum = + (prod over S ascending of a_i^dag) vacuum
    let mut target = vec![0.0; space.dim];
    target[0] = 1.0;
    for &i in occ.iter().rev() {
        target = space.creator(i).apply(&target);
    }
    let r_vac = r.col[0].expect("R is a permutation");
    let s = target[r_vac.0] * r_vac.1;
    if s < 0.0 {
        r = r.scale(-1.0);
    }
    let r_dag = r.transpose(space.dim);
    Ok(PHData {
        occupied: occ,
        modes: m,
        r,
        r_dag,
    })
}

/// Residual of the conjugation relations
/// `R^dag a_i R = a(u e_i) + a^dag(v e_i)` over all modes (max entry).
pub fn conjugation_residual(space: &FockSpace, ph: &PHData) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..space.modes {
        let lhs = ph.r_dag.compose(&space.annihilator(i)).compose(&ph.r);
        let rhs = if ph.is_occupied(i) {
            space.creator(i)
        } else {
            space.annihilator(i)
        };
        let mut diff = lhs.to_dense();
        rhs.scale(-1.0).add_into(&mut diff, 1.0);
        worst = worst.max(diff.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    worst
}

/// `<R^dag Psi, N R^dag Psi>` computed two ways: directly, and through the
/// one-body conjugation identity `R N R^dag = Tr gamma + dGamma(u - gamma)`.
pub fn fluctuation_number(space: &FockSpace, psi: &[f64], ph: &PHData) -> Result<(f64, f64)> {
    if psi.len() != space.dim {
        return Err(Error::Dimension("state/space size mismatch".into()));
    }
    let omega = ph.r_dag.apply(psi);
    let direct: f64 = omega
        .iter()
        .enumerate()
        .map(|(b, amp)| (b as u32).count_ones() as f64 * amp * amp)
        .sum();

    // identity route: <Psi, (|S| + dGamma(u - gamma)) Psi>
    let mut via_identity =
        ph.occupied.len() as f64 * psi.iter().map(|v| v * v).sum::<f64>();
    for (b, amp) in psi.iter().enumerate() {
        let mut diag = 0.0;
        for i in 0..space.modes {
            if b & (1 << i) != 0 {
                diag += ph.u_diag(i) - ph.v_diag(i);
            }
        }
        via_identity += diag * amp * amp;
    }
    Ok((direct, via_identity))
}

/// Report of the field-operator identity for `gamma_Psi - gamma` and the
/// trace-norm bound `||gamma_Psi - gamma||_Tr <= c sqrt(Tr gamma) sqrt(<N> + 1)`.
#[derive(Debug, Clone)]
pub struct RdmDifferenceReport {
    /// Max entrywise residual of the four-term identity.
    pub identity_residual: f64,
    /// `|| gamma_Psi - gamma ||_Tr`
    pub trace_distance: f64,
    /// Measured constant `c` in the trace-norm bound.
    pub measured_constant: f64,
    pub fluctuation: f64,
}

/// Verifies
/// `gamma_Psi,ij - gamma_ij = <O, [a^dag(u_j) a(u_i) - a^dag(v_i) a(v_j)
///  + a^dag(u_j) a^dag(v_i) + a(v_j) a(u_i)] O>` with `O = R^dag Psi`.
pub fn rdm_difference_check(
    space: &FockSpace,
    psi: &[f64],
    ph: &PHData,
) -> Result<RdmDifferenceReport> {
    let m = space.modes;
    let omega = ph.r_dag.apply(psi);
    let gamma_psi = super::reduced_density(space, psi);
    let gamma_ref = ph.gamma_modes();

    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut residual = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let mut rhs = 0.0;
            if !ph.is_occupied(i) && !ph.is_occupied(j) {
                // <O, a_j^dag a_i O> = <a_j O, a_i O>
                let aj = space.annihilator(j).apply(&omega);
                let ai = space.annihilator(i).apply(&omega);
                rhs += dot(&aj, &ai);
            }
            if ph.is_occupied(i) && ph.is_occupied(j) {
                // - <O, a_i^dag a_j O>
                let ai = space.annihilator(i).apply(&omega);
                let aj = space.annihilator(j).apply(&omega);
                rhs -= dot(&ai, &aj);
            }
            if !ph.is_occupied(j) && ph.is_occupied(i) {
                // <O, a_j^dag a_i^dag O> = <a_j O, a_i^dag O>
                let aj = space.annihilator(j).apply(&omega);
                let ci = space.creator(i).apply(&omega);
                rhs += dot(&aj, &ci);
            }
            if ph.is_occupied(j) && !ph.is_occupied(i) {
                // <O, a_j a_i O>
                let ji = space
                    .annihilator(j)
                    .compose(&space.annihilator(i))
                    .apply(&omega);
                rhs += dot(&omega, &ji);
            }
            let lhs = gamma_psi[[i, j]] - gamma_ref[[i, j]];
            residual = residual.max((lhs - rhs).abs());
        }
    }

    let diff = &gamma_psi - &gamma_ref;
    let trace_distance = crate::lattice::trace_norm(&diff)?;
    let (fluct, _) = fluctuation_number(space, psi, ph)?;
    let tr_gamma = ph.occupied.len() as f64;
    let denom = tr_gamma.sqrt() * (fluct + 1.0).sqrt();
    Ok(RdmDifferenceReport {
        identity_residual: residual,
        trace_distance,
        measured_constant: if denom > 0.0 {
            trace_distance / denom
        } else {
            0.0
        },
        fluctuation: fluct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::operator_norm;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn r_is_unitary_and_conjugates_cleanly() {
        let space = FockSpace::new(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..8 {
            let occ: Vec<usize> = (0..6).filter(|_| rng.gen_bool(0.5)).collect();
            let ph = particle_hole(&space, &occ).unwrap();
            // unitarity: R R^dag = 1 exactly for signed permutations
            let prod = ph.r.compose(&ph.r_dag);
            for b in 0..space.dim {
                assert_eq!(prod.col[b], Some((b, 1.0)));
            }
            let res = conjugation_residual(&space, &ph);
            assert!(res <= 1e-12, "occ {occ:?}: residual {res}");
        }
    }

    #[test]
    fn empty_set_gives_the_identity() {
        let space = FockSpace::new(4).unwrap();
        let ph = particle_hole(&space, &[]).unwrap();
        for b in 0..space.dim {
            assert_eq!(ph.r.col[b], Some((b, 1.0)));
        }
    }

    #[test]
    fn vacuum_maps_to_the_slater_determinant() {
        let space = FockSpace::new(6).unwrap();
        let ph = particle_hole(&space, &[0, 2, 5]).unwrap();
        let mut vac = vec![0.0; space.dim];
        vac[0] = 1.0;
        let mapped = ph.r.apply(&vac);
        let mut target = vec![0.0; space.dim];
        target[0] = 1.0;
        for &i in [0usize, 2, 5].iter().rev() {
            target = space.creator(i).apply(&target);
        }
        for b in 0..space.dim {
            assert!((mapped[b] - target[b]).abs() < 1e-14);
        }
    }

    #[test]
    fn full_occupation_maps_vacuum_to_the_filled_state() {
        let space = FockSpace::new(5).unwrap();
        let ph = particle_hole(&space, &[0, 1, 2, 3, 4]).unwrap();
        let mut vac = vec![0.0; space.dim];
        vac[0] = 1.0;
        let mapped = ph.r.apply(&vac);
        let full = space.dim - 1;
        assert!((mapped[full].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fluctuation_number_vanishes_on_the_reference_state() {
        let space = FockSpace::new(6).unwrap();
        let ph = particle_hole(&space, &[1, 3, 4]).unwrap();
        let mut vac = vec![0.0; space.dim];
        vac[0] = 1.0;
        let slater = ph.r.apply(&vac);
        let (direct, via) = fluctuation_number(&space, &slater, &ph).unwrap();
        assert!(direct.abs() < 1e-14 && via.abs() < 1e-14);
    }

    #[test]
    fn fluctuation_number_identity_on_random_states() {
        let space = FockSpace::new(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ph = particle_hole(&space, &[0, 1, 5]).unwrap();
        for _ in 0..20 {
            let mut psi: Vec<f64> = (0..space.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nrm: f64 = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|v| *v /= nrm);
            let (direct, via) = fluctuation_number(&space, &psi, &ph).unwrap();
            assert!((direct - via).abs() <= 1e-10, "{direct} vs {via}");
        }
    }

    #[test]
    fn rdm_difference_vanishes_on_the_reference() {
        let space = FockSpace::new(6).unwrap();
        let ph = particle_hole(&space, &[0, 1, 2]).unwrap();
        let mut vac = vec![0.0; space.dim];
        vac[0] = 1.0;
        let slater = ph.r.apply(&vac);
        let rep = rdm_difference_check(&space, &slater, &ph).unwrap();
        assert!(rep.identity_residual < 1e-12);
        assert!(rep.trace_distance < 1e-12);
    }

    #[test]
    fn rdm_identity_on_random_three_particle_states() {
        let space = FockSpace::new(6).unwrap();
        let ph = particle_hole(&space, &[0, 1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let basis = space.sector_basis(3);
        for _ in 0..10 {
            let mut psi = vec![0.0; space.dim];
            for &b in &basis {
                psi[b] = rng.gen_range(-1.0..1.0);
            }
            let nrm: f64 = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|v| *v /= nrm);
            let rep = rdm_difference_check(&space, &psi, &ph).unwrap();
            assert!(
                rep.identity_residual <= 1e-10,
                "identity residual {}",
                rep.identity_residual
            );
            assert!(
                rep.trace_distance
                    <= 4.0 * 3f64.sqrt() * (rep.fluctuation + 1.0).sqrt() + 1e-12,
                "bound violated: {} vs {}",
                rep.trace_distance,
                4.0 * 3f64.sqrt() * (rep.fluctuation + 1.0).sqrt()
            );
        }
    }

    #[test]
    fn ph_conjugation_matches_dense_transformation() {
        // independent dense route: R^dag dGamma(A) R by matrix products
        let space = FockSpace::new(5).unwrap();
        let ph = particle_hole(&space, &[1, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut a = Array2::<f64>::zeros((5, 5));
        for v in a.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let a = (&a + &a.t()) * 0.5;
        let dg = space.second_quantize(&a).unwrap();
        let r = ph.r.to_dense();
        let lhs = r.t().dot(&dg).dot(&r);
        // ladder-algebra route through the conjugated operators
        let mut rhs = Array2::<f64>::zeros((space.dim, space.dim));
        for i in 0..5 {
            let bi = if ph.is_occupied(i) {
                space.creator(i)
            } else {
                space.annihilator(i)
            };
            for j in 0..5 {
                if a[[i, j]] == 0.0 {
                    continue;
                }
                let bj = if ph.is_occupied(j) {
                    space.creator(j)
                } else {
                    space.annihilator(j)
                };
                // R^dag a_i^dag a_j R = (R^dag a_i R)^dag (R^dag a_j R)
                let term = bi.transpose(space.dim).compose(&bj);
                term.add_into(&mut rhs, a[[i, j]]);
            }
        }
        let diff = operator_norm(&(&lhs - &rhs)).unwrap();
        assert!(diff <= 1e-12, "dense conjugation mismatch {diff}");
    }
}
