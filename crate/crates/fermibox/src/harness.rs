//! Experiment orchestration behind the command-line interface: each
//! subcommand runs one pipeline, writes its artifacts (CSV/JSON stamped with
//! the config hash), and fails if an invoked invariant check does not pass.

use ndarray::Array2;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fock::{
    ph::{conjugation_residual, particle_hole},
    verify::{
        fermionic_estimates_battery, verify_gap_inequality, verify_hamiltonian_assembly,
        verify_one_body_conjugation, verify_quadratic_form_bounds, verify_two_body_conjugation,
    },
    FockSpace, PairTensor,
};
use crate::hartree::{commutator_report, fourier_commutator_trace_norm, scf_solve};
use crate::lattice::{build_laplacian, Grid};
use crate::phase_space::{wigner_transform, PhaseSpaceGrid};
use crate::potentials::{apply_cutoff, offset_table, tail_lp_norm_radial, PairPotential};
use crate::report::{artifact_path, fmt_f64, write_csv, write_json};
use crate::semiclassics::{
    convergence_sweep, number_estimate_experiment, rate_fit, weyl_law_check, window_count_check,
    NumberEstimateConfig, SweepConfig,
};
use crate::thomas_fermi::{tf_energy, tf_solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Tf,
    Hartree,
    Sweep,
    Wigner,
    WeylLaw,
    Window,
    Cutoff,
    FockVerify,
    Nbody,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Tf => "tf",
            Subcommand::Hartree => "hartree",
            Subcommand::Sweep => "sweep",
            Subcommand::Wigner => "wigner",
            Subcommand::WeylLaw => "weyl-law",
            Subcommand::Window => "window",
            Subcommand::Cutoff => "cutoff",
            Subcommand::FockVerify => "fock-verify",
            Subcommand::Nbody => "nbody",
        }
    }
}

/// Runs one subcommand; `Ok` means every invoked invariant check passed.
pub fn run(sub: Subcommand, cfg: &RunConfig) -> Result<()> {
    match sub {
        Subcommand::Tf => run_tf(cfg),
        Subcommand::Hartree => run_hartree(cfg),
        Subcommand::Sweep => run_sweep(cfg),
        Subcommand::Wigner => run_wigner(cfg),
        Subcommand::WeylLaw => run_weyl_law(cfg),
        Subcommand::Window => run_window(cfg),
        Subcommand::Cutoff => run_cutoff(cfg),
        Subcommand::FockVerify => run_fock_verify(cfg),
        Subcommand::Nbody => run_nbody(cfg),
    }
}

fn grid_of(cfg: &RunConfig) -> Grid {
    Grid::new(cfg.box_half_length, cfg.grid_points)
}

fn run_tf(cfg: &RunConfig) -> Result<()> {
    let grid = grid_of(cfg);
    let tf = tf_solve(&cfg.external, &cfg.pair, &grid)?;
    let ug = cfg.external.on_grid(&grid)?;
    let energy = tf_energy(&tf.rho, &ug, &cfg.pair, tf.d, &grid)?;
    let mass = tf.mass(&grid);
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::Range(format!("TF mass {mass} not normalized")));
    }
    if tf.residual > 1e-6 {
        return Err(Error::Range(format!("TF residual {} too large", tf.residual)));
    }
    let rows: Vec<Vec<String>> = grid
        .points()
        .iter()
        .zip(&tf.rho)
        .map(|(&x, &r)| vec![fmt_f64(x), fmt_f64(r)])
        .collect();
    write_csv(
        &artifact_path(&cfg.out_dir, "tf", &cfg.config_hash, "density.csv")?,
        &["x", "rho"],
        &rows,
    )?;
    write_json(
        &artifact_path(&cfg.out_dir, "tf", &cfg.config_hash, "summary.json")?,
        &json!({
            "mu": tf.mu,
            "energy": energy,
            "mass": mass,
            "residual": tf.residual,
            "c_tf": tf.c_tf,
        }),
    )?;
    println!("tf: mu = {:.8}, energy = {:.8}, residual = {:.2e}", tf.mu, energy, tf.residual);
    Ok(())
}

fn run_hartree(cfg: &RunConfig) -> Result<()> {
    let grid = grid_of(cfg);
    let tf = tf_solve(&cfg.external, &cfg.pair, &grid)?;
    let nf = cfg.n_particles as f64;
    let hbar = 1.0 / nf;
    let state = scf_solve(&cfg.external, &cfg.pair, tf.mu, cfg.scf, nf, hbar, &grid)?;
    if state.residual > cfg.scf.tol * nf {
        return Err(Error::Range(format!(
            "SCF residual {} above tolerance",
            state.residual
        )));
    }
    let comm = commutator_report(&state.occ, hbar, nf, &cfg.xi_samples, &grid)?;
    let rows: Vec<Vec<String>> = grid
        .points()
        .iter()
        .zip(&state.rho)
        .map(|(&x, &r)| vec![fmt_f64(x), fmt_f64(r)])
        .collect();
    write_csv(
        &artifact_path(&cfg.out_dir, "hartree", &cfg.config_hash, "density.csv")?,
        &["x", "rho"],
        &rows,
    )?;
    write_json(
        &artifact_path(&cfg.out_dir, "hartree", &cfg.config_hash, "summary.json")?,
        &json!({
            "mu": state.mu,
            "hbar": hbar,
            "trace": state.trace(),
            "residual": state.residual,
            "energy": state.energy,
            "energy_hf": state.energy_hf,
            "iterations": state.iterations,
            "alpha_final": state.alpha_final,
            "commutators": {
                "x_comm": comm.x_comm,
                "p_comm": comm.p_comm,
                "fourier_comm_max": comm.fourier_comm_max,
            },
        }),
    )?;
    println!(
        "hartree: Tr = {:.3}, residual = {:.2e}, E = {:.6}, x_comm = {:.3}",
        state.trace(),
        state.residual,
        state.energy,
        comm.x_comm
    );
    Ok(())
}

fn run_sweep(cfg: &RunConfig) -> Result<()> {
    let sweep = SweepConfig {
        n_list: cfg.n_list.clone(),
        external: cfg.external.clone(),
        pair: cfg.pair.clone(),
        scf: cfg.scf,
        grid_points: cfg.grid_points,
        box_half_length: cfg.box_half_length,
        xi_samples: cfg.xi_samples.clone(),
    };
    let report = convergence_sweep(&sweep)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.hbar),
                fmt_f64(r.trace_dist),
                fmt_f64(r.hs_dist),
                fmt_f64(r.wigner_l2),
                fmt_f64(r.density_l1),
                fmt_f64(r.trace_gap),
            ]
        })
        .collect();
    write_csv(
        &artifact_path(&cfg.out_dir, "sweep", &cfg.config_hash, "rates.csv")?,
        &["hbar", "trace_dist", "hs_dist", "wigner_l2", "density_l1", "trace_gap"],
        &rows,
    )?;
    write_json(
        &artifact_path(&cfg.out_dir, "sweep", &cfg.config_hash, "fit.json")?,
        &json!({
            "mu": report.mu,
            "beta": report.beta,
            "fit_residual": report.fit_residual,
            "beta_logcorrected": report.beta_logcorrected,
            "fit_restricted": report.fit_restricted,
            "rows": report.rows,
        }),
    )?;
    if report.rows.iter().any(|r| r.failed) {
        return Err(Error::Range("sweep contains failed SCF rows".into()));
    }
    println!(
        "sweep: beta = {:.3} (residual {:.3}), {} rows",
        report.beta,
        report.fit_residual,
        report.rows.len()
    );
    Ok(())
}

fn run_wigner(cfg: &RunConfig) -> Result<()> {
    let grid = grid_of(cfg);
    let tf = tf_solve(&cfg.external, &cfg.pair, &grid)?;
    let nf = cfg.n_particles as f64;
    let hbar = 1.0 / nf;
    let state = scf_solve(&cfg.external, &cfg.pair, tf.mu, cfg.scf, nf, hbar, &grid)?;
    let psg = PhaseSpaceGrid::new(&grid, hbar);
    let f = wigner_transform(&state.gamma_dense(), &psg)?;
    if f.imag_residual > 1e-10 {
        return Err(Error::Range(format!(
            "Wigner imaginary residual {} too large",
            f.imag_residual
        )));
    }
    let mut rows = Vec::with_capacity(grid.n() * psg.m);
    for j in 0..grid.n() {
        for c in 0..psg.m {
            rows.push(vec![
                fmt_f64(grid.points()[j]),
                fmt_f64(psg.p_at(c)),
                fmt_f64(f.values[[j, c]]),
            ]);
        }
    }
    write_csv(
        &artifact_path(&cfg.out_dir, "wigner", &cfg.config_hash, "f.csv")?,
        &["x", "p", "f"],
        &rows,
    )?;
    println!(
        "wigner: {} x {} grid, imag residual {:.2e}",
        grid.n(),
        psg.m,
        f.imag_residual
    );
    Ok(())
}

fn run_weyl_law(cfg: &RunConfig) -> Result<()> {
    let grid = grid_of(cfg);
    let ug = cfg.external.on_grid(&grid)?;
    // W = U - mu with the TF chemical potential of the free problem; the
    // classic diagnostic uses the shifted harmonic well
    let tf = tf_solve(&cfg.external, &cfg.pair, &grid)?;
    let w: Vec<f64> = if cfg.pair.is_zero() {
        ug.iter().map(|u| u - tf.mu / 2.0).collect()
    } else {
        let table = offset_table(&cfg.pair, &grid)?;
        let conv = crate::potentials::convolve_table(&table, &tf.rho, &grid)?;
        ug.iter().zip(&conv).map(|(u, c)| u + c - tf.mu).collect()
    };
    let mut rows = Vec::new();
    let mut max_deficit = 0.0f64;
    for &n in &cfg.n_list {
        let hbar = 1.0 / n as f64;
        let rep = weyl_law_check(&w, hbar, &grid)?;
        max_deficit = max_deficit.max(rep.deficit);
        rows.push(vec![
            fmt_f64(hbar),
            format!("{}", rep.count),
            fmt_f64(rep.phase_volume),
            fmt_f64(rep.deficit),
        ]);
    }
    write_csv(
        &artifact_path(&cfg.out_dir, "weyl-law", &cfg.config_hash, "deficit.csv")?,
        &["hbar", "count", "phase_volume", "deficit"],
        &rows,
    )?;
    println!("weyl-law: max deficit {max_deficit:.4} over {} values", cfg.n_list.len());
    Ok(())
}

fn run_window(cfg: &RunConfig) -> Result<()> {
    let grid = grid_of(cfg);
    let ug = cfg.external.on_grid(&grid)?;
    let tf = tf_solve(&cfg.external, &cfg.pair, &grid)?;
    let mut rows = Vec::new();
    let mut max_ratio = 0.0f64;
    for &n in &cfg.n_list {
        let nf = n as f64;
        let hbar = 1.0 / nf;
        let state = scf_solve(&cfg.external, &cfg.pair, tf.mu, cfg.scf, nf, hbar, &grid)?;
        for &eps in &cfg.window_eps {
            let rep = window_count_check(&state, &ug, eps, &grid)?;
            max_ratio = max_ratio.max(rep.bound_ratio);
            rows.push(vec![
                fmt_f64(hbar),
                fmt_f64(eps),
                format!("{}", rep.count),
                fmt_f64(rep.bound_ratio),
            ]);
        }
    }
    write_csv(
        &artifact_path(&cfg.out_dir, "window", &cfg.config_hash, "counts.csv")?,
        &["hbar", "eps", "count", "bound_ratio"],
        &rows,
    )?;
    write_json(
        &artifact_path(&cfg.out_dir, "window", &cfg.config_hash, "summary.json")?,
        &json!({ "max_bound_ratio": max_ratio }),
    )?;
    println!("window: measured count/(N(eps+hbar)) <= {max_ratio:.3}");
    Ok(())
}

fn run_cutoff(cfg: &RunConfig) -> Result<()> {
    let grid = grid_of(cfg);
    let (tail_lambda, tail_a) = match &cfg.pair {
        PairPotential::PowerLaw { lambda, a, .. } => (*lambda, *a),
        _ => (1.0, 0.5),
    };
    let mut rows = Vec::new();
    let mut norms: Vec<(f64, f64)> = Vec::new();
    let mut tails: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.tail_p_list.len()];
    for &lam in &cfg.cutoff_lambdas {
        let cut = apply_cutoff(&cfg.pair, lam, &grid)?;
        let vn = cut.v_norm()?;
        norms.push((lam, vn));
        let mut row = vec![fmt_f64(lam), fmt_f64(vn), fmt_f64(cut.tail_l2_grid())];
        for (pi, &p) in cfg.tail_p_list.iter().enumerate() {
            let t = tail_lp_norm_radial(tail_lambda, tail_a, cfg.tail_d, lam, p)?;
            tails[pi].push((lam, t));
            row.push(fmt_f64(t));
        }
        rows.push(row);
    }
    let mut header: Vec<String> = vec!["lambda_cut".into(), "v_norm".into(), "tail_l2_grid".into()];
    for &p in &cfg.tail_p_list {
        header.push(format!("tail_lp_{p}"));
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_csv(
        &artifact_path(&cfg.out_dir, "cutoff", &cfg.config_hash, "tails.csv")?,
        &header_refs,
        &rows,
    )?;
    // fitted slopes
    let norm_fit = rate_fit(&norms)?;
    let mut tail_fits = Vec::new();
    for (pi, &p) in cfg.tail_p_list.iter().enumerate() {
        let fit = rate_fit(&tails[pi])?;
        tail_fits.push(json!({
            "p": p,
            "slope": fit.beta,
            "target": -(cfg.tail_d as f64 / p - tail_a),
        }));
    }
    write_json(
        &artifact_path(&cfg.out_dir, "cutoff", &cfg.config_hash, "fits.json")?,
        &json!({
            "v_norm_slope": norm_fit.beta,
            "tail_d": cfg.tail_d,
            "tail_fits": tail_fits,
        }),
    )?;
    println!(
        "cutoff: ||V_Lambda|| slope {:.3}, {} tail exponents",
        norm_fit.beta,
        cfg.tail_p_list.len()
    );
    Ok(())
}

fn run_fock_verify(cfg: &RunConfig) -> Result<()> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut entries = Vec::new();
    let mut ok = true;
    let mut record = |lemma: &str, seed: u64, residual: f64, min_eig: Option<f64>, pass: bool| {
        entries.push(json!({
            "lemma": lemma,
            "instance_seed": seed,
            "residual": residual,
            "min_eigenvalue": min_eig,
        }));
        ok &= pass;
    };

    // CAR exactness at the configured mode count
    let space_big = FockSpace::new(cfg.fock_modes.max(6))?;
    let mut car = 0.0f64;
    for i in 0..space_big.modes {
        for j in 0..space_big.modes {
            let ac = space_big
                .annihilator(i)
                .anticommutator(&space_big.creator(j));
            for b in 0..space_big.dim {
                for r in 0..space_big.dim {
                    let expect = if i == j && r == b { 1.0 } else { 0.0 };
                    car = car.max((ac[[r, b]] - expect).abs());
                }
            }
        }
    }
    record("car", cfg.seed, car, None, car <= 1e-14);

    // particle-hole + one-/two-body conjugations + assembly at M = 6, |S| = 3
    let space = FockSpace::new(6)?;
    let ph = particle_hole(&space, &[0, 2, 4])?;
    record(
        "ph_conjugation",
        cfg.seed,
        conjugation_residual(&space, &ph),
        None,
        conjugation_residual(&space, &ph) <= 1e-12,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for inst in 0..25u64 {
        let mut a = Array2::<f64>::zeros((6, 6));
        for i in 0..6 {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                a[[i, j]] = v;
                a[[j, i]] = v;
            }
        }
        let r3 = verify_one_body_conjugation(&space, &ph, &a)?;
        record("one_body_conjugation", cfg.seed + inst, r3, None, r3 <= 1e-9);
    }
    // mode basis + cutoff tensor on a small lattice (hbar = 1/4 scale)
    let grid = Grid::new(6.0, 192);
    let (hbar, nf) = (0.25, 4.0);
    let mut h0 = build_laplacian(&grid, hbar)?;
    let ug: Vec<f64> = grid.points().iter().map(|&x| x * x).collect();
    for (d, u) in h0.diag.iter_mut().zip(&ug) {
        *d += u;
    }
    let (_, vecs) = h0.eigh_below(f64::INFINITY)?;
    let modes = vecs.slice(ndarray::s![.., ..6]).to_owned();
    let base = PairPotential::power_law(1.0, 0.5, 1)?;
    let cut = apply_cutoff(&base, 8.0, &grid)?;
    let w = PairTensor::from_offset_table(&cut.v_cut, &modes)?;
    for inst in 0..25u64 {
        let r4 = verify_two_body_conjugation(&space, &ph, &w)?;
        let mut h1 = Array2::<f64>::zeros((6, 6));
        for i in 0..6 {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                h1[[i, j]] = v;
                h1[[j, i]] = v;
            }
        }
        let ra = verify_hamiltonian_assembly(&space, &ph, &h1, &w, 3.0)?;
        record("two_body_conjugation", cfg.seed + inst, r4, None, r4 <= 1e-9);
        record("hamiltonian_assembly", cfg.seed + inst, ra, None, ra <= 1e-9);
    }

    // quadratic-form bounds with the measured commutator constant
    let occ_cols = vecs.slice(ndarray::s![.., ..3]).to_owned();
    let mut c0 = 0.0f64;
    for &xi in &[0.5, 1.0, 2.0] {
        let tn = fourier_commutator_trace_norm(&occ_cols, xi, &grid)?;
        c0 = c0.max(tn / (nf * hbar * xi));
    }
    let vhat_l1 = 2.0 * crate::potentials::riesz_constant(1, 0.5) * 8f64.powf(0.5) / 0.5;
    let v_norm = cut.v_norm()?;
    let bounds = verify_quadratic_form_bounds(&space, &ph, &w, vhat_l1, v_norm, c0, hbar, nf)?;
    for b in &bounds {
        record(
            &format!("form_bound_{}", b.name),
            cfg.seed,
            0.0,
            Some(b.min_eigenvalue),
            b.min_eigenvalue >= -1e-8 * b.scale.max(1.0),
        );
    }

    // gap inequality on random instances at M = 8
    let space8 = FockSpace::new(8)?;
    for inst in 0..20u64 {
        let mut h = Array2::<f64>::zeros((8, 8));
        for i in 0..8 {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                h[[i, j]] = v;
                h[[j, i]] = v;
            }
        }
        let mu = rng.gen_range(-0.5..0.5);
        let eps = rng.gen_range(0.05..0.5);
        let me = verify_gap_inequality(&space8, &h, mu, eps)?;
        record("gap_inequality", cfg.seed + inst, 0.0, Some(me), me >= -1e-10);
    }

    // fermionic estimates A1..A8
    let worst = fermionic_estimates_battery(&space, 100, cfg.seed)?;
    for (name, w) in worst {
        record(&format!("estimate_{name}"), cfg.seed, w.max(0.0), None, w <= 1e-10);
    }

    write_json(
        &artifact_path(&cfg.out_dir, "fock-verify", &cfg.config_hash, "report.json")?,
        &json!(entries),
    )?;
    println!("fock-verify: {} checks, pass = {}", entries.len(), ok);
    if !ok {
        return Err(Error::Range("fock verification battery failed".into()));
    }
    Ok(())
}

fn run_nbody(cfg: &RunConfig) -> Result<()> {
    let ncfg = NumberEstimateConfig {
        modes: cfg.fock_modes,
        n_particles: cfg.fock_particles,
        lambda_list: cfg.fock_lambdas.clone(),
        grid_points: 256,
        box_half_length: 6.0,
        pair_exponent: 0.5,
    };
    let rows = number_estimate_experiment(&ncfg)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.lambda),
                fmt_f64(r.fluctuation),
                fmt_f64(r.rdm_trace_dist),
                fmt_f64(r.e0),
                fmt_f64(r.e_hf),
            ]
        })
        .collect();
    write_csv(
        &artifact_path(&cfg.out_dir, "nbody", &cfg.config_hash, "table.csv")?,
        &["lambda", "fluctuation", "rdm_trace_dist", "e0", "e_hf"],
        &table,
    )?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.lambda > 0.0 && r.fluctuation > 0.0)
        .map(|r| (r.lambda, r.fluctuation))
        .collect();
    let exponent = if pts.len() >= 3 {
        Some(rate_fit(&pts)?.beta)
    } else {
        None
    };
    let mut pass = true;
    for r in &rows {
        let bound = 4.0 * (cfg.fock_particles as f64).sqrt() * (r.fluctuation + 1.0).sqrt();
        pass &= r.rdm_trace_dist <= bound;
        pass &= r.e0 <= r.e_hf + 1e-10;
        pass &= r.rdm_identity_residual <= 1e-10;
        if r.lambda == 0.0 {
            pass &= r.fluctuation <= 1e-10;
        }
    }
    write_json(
        &artifact_path(&cfg.out_dir, "nbody", &cfg.config_hash, "summary.json")?,
        &json!({
            "lambda_exponent": exponent,
            "rows": rows,
            "pass": pass,
        }),
    )?;
    println!(
        "nbody: {} rows, lambda exponent {:?}, pass = {pass}",
        rows.len(),
        exponent
    );
    if !pass {
        return Err(Error::Range("nbody invariant checks failed".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg(dir: &str) -> RunConfig {
        RunConfig::from_text(&format!(
            "[model]\nn = 8\nl = 8.0\ngrid = 256\n\n[pair]\nvariant = zero\n\n[sweep]\nn_list = 4, 8, 16\n\n[fock]\nm = 4\nn = 2\nlambda_list = 0.0, 0.05\n\n[output]\ndir = {dir}\nseed = 3\n"
        ))
        .unwrap()
    }

    #[test]
    fn tf_subcommand_writes_artifacts() {
        let dir = std::env::temp_dir().join("fermibox_harness_tf");
        let cfg = tiny_cfg(dir.to_str().unwrap());
        run(Subcommand::Tf, &cfg).unwrap();
        let density = dir.join(format!("tf_{}_density.csv", cfg.config_hash));
        let summary = dir.join(format!("tf_{}_summary.json", cfg.config_hash));
        assert!(density.exists() && summary.exists());
        let text = std::fs::read_to_string(summary).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!((v["mu"].as_f64().unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn deterministic_artifacts_for_fixed_config() {
        let dir = std::env::temp_dir().join("fermibox_harness_det");
        let cfg = tiny_cfg(dir.to_str().unwrap());
        run(Subcommand::Tf, &cfg).unwrap();
        let path = dir.join(format!("tf_{}_density.csv", cfg.config_hash));
        let first = std::fs::read(&path).unwrap();
        run(Subcommand::Tf, &cfg).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
    }
}
