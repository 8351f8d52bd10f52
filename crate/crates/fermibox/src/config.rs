//! Declarative run configuration: INI-style sections with field-level
//! validation, parsed before any computation starts.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hartree::ScfParams;
use crate::potentials::{ExternalPotential, PairPotential, RegularProfile};

/// Parsed `key = value` sections.
#[derive(Debug, Clone, Default)]
pub struct Ini {
    sections: BTreeMap<String, BTreeMap<String, String>>,
    /// Canonical text for hashing.
    pub canonical: String,
}

impl Ini {
    pub fn parse(text: &str) -> Result<Ini> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                current = name.trim().to_lowercase();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    &format!("line {}", lineno + 1),
                    format!("expected `key = value`, got {line:?}"),
                )
            })?;
            if current.is_empty() {
                return Err(Error::config(
                    &format!("line {}", lineno + 1),
                    "key outside of any [section]",
                ));
            }
            sections
                .get_mut(&current)
                .unwrap()
                .insert(k.trim().to_lowercase(), v.trim().to_string());
        }
        let mut canonical = String::new();
        for (s, kv) in &sections {
            canonical.push_str(&format!("[{s}]\n"));
            for (k, v) in kv {
                canonical.push_str(&format!("{k}={v}\n"));
            }
        }
        Ok(Ini {
            sections,
            canonical,
        })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(|s| s.as_str())
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                Error::config(&format!("{section}.{key}"), format!("not a number: {raw:?}"))
            }),
        }
    }

    fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                Error::config(
                    &format!("{section}.{key}"),
                    format!("not an integer: {raw:?}"),
                )
            }),
        }
    }

    fn list_f64(&self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(section, key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|t| {
                    t.trim().parse().map_err(|_| {
                        Error::config(
                            &format!("{section}.{key}"),
                            format!("bad list entry: {t:?}"),
                        )
                    })
                })
                .collect(),
        }
    }

    fn list_u64(&self, section: &str, key: &str, default: &[u64]) -> Result<Vec<u64>> {
        match self.get(section, key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|t| {
                    t.trim().parse().map_err(|_| {
                        Error::config(
                            &format!("{section}.{key}"),
                            format!("bad list entry: {t:?}"),
                        )
                    })
                })
                .collect(),
        }
    }
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub d: u32,
    pub n_particles: u64,
    pub n_list: Vec<u64>,
    pub box_half_length: f64,
    pub grid_points: usize,
    pub external: ExternalPotential,
    pub pair: PairPotential,
    pub scf: ScfParams,
    pub cutoff_lambdas: Vec<f64>,
    pub tail_p_list: Vec<f64>,
    pub tail_d: u32,
    pub fock_modes: usize,
    pub fock_particles: usize,
    pub fock_lambdas: Vec<f64>,
    pub xi_samples: Vec<f64>,
    pub window_eps: Vec<f64>,
    pub out_dir: String,
    pub seed: u64,
    pub config_hash: String,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<RunConfig> {
        let ini = Ini::parse(text)?;

        let d = ini.usize_or("model", "d", 1)? as u32;
        if d != 1 {
            return Err(Error::config("model.d", "grid numerics run in d = 1"));
        }
        let n_particles = ini.usize_or("model", "n", 16)? as u64;
        if n_particles == 0 {
            return Err(Error::config("model.n", "particle number must be positive"));
        }
        let box_half_length = ini.f64_or("model", "l", 8.0)?;
        if !(box_half_length > 0.0) {
            return Err(Error::config("model.l", "box half-length must be positive"));
        }
        let grid_points = ini.usize_or("model", "grid", 1024)?;
        if grid_points < 16 {
            return Err(Error::config("model.grid", "need at least 16 grid points"));
        }

        let external = match ini.get("external", "variant").unwrap_or("harmonic") {
            "harmonic" => {
                let omega2 = ini.f64_or("external", "omega2", 1.0)?;
                if !(omega2 > 0.0) {
                    return Err(Error::config("external.omega2", "stiffness must be positive"));
                }
                ExternalPotential::Harmonic { omega2 }
            }
            "polynomial" => {
                let coeffs = ini.list_f64("external", "coeffs", &[0.0, 1.0])?;
                ExternalPotential::EvenPolynomial { coeffs }
            }
            other => {
                return Err(Error::config(
                    "external.variant",
                    format!("unknown variant {other:?} (harmonic | polynomial)"),
                ))
            }
        };

        let pair = match ini.get("pair", "variant").unwrap_or("powerlaw") {
            "zero" => PairPotential::Zero,
            "powerlaw" => {
                let lambda = ini.f64_or("pair", "lambda", 0.2)?;
                let a = ini.f64_or("pair", "a", 0.5)?;
                if lambda == 0.0 {
                    PairPotential::Zero
                } else {
                    if !(a > 0.0 && a < 1.0) {
                        return Err(Error::config(
                            "pair.a",
                            format!("power-law exponent must be in (0, 1) for d = 1, got {a}"),
                        ));
                    }
                    PairPotential::power_law(lambda, a, 1)
                        .map_err(|e| Error::config("pair.lambda", e.to_string()))?
                }
            }
            "regular" => {
                let xi_max = ini.f64_or("pair", "xi_max", 4.0)?;
                let values = ini.list_f64("pair", "profile", &[0.0, 1.0, 0.0])?;
                let profile = RegularProfile::new(xi_max, values)
                    .map_err(|e| Error::config("pair.profile", e.to_string()))?;
                PairPotential::Regular { profile }
            }
            other => {
                return Err(Error::config(
                    "pair.variant",
                    format!("unknown variant {other:?} (zero | powerlaw | regular)"),
                ))
            }
        };

        let alpha = ini.f64_or("scf", "alpha", 0.5)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config("scf.alpha", "mixing weight must be in (0, 1]"));
        }
        let tol = ini.f64_or("scf", "tol", 1e-6)?;
        let max_iter = ini.usize_or("scf", "max_iter", 6000)?;
        let scf = ScfParams {
            alpha,
            tol,
            max_iter,
        };

        let n_list = ini.list_u64("sweep", "n_list", &[8, 16, 32, 64])?;
        let xi_samples = ini.list_f64("sweep", "xi_samples", &[0.5, 1.0, 2.0])?;
        let window_eps = ini.list_f64("sweep", "eps_list", &[0.1, 0.2, 0.3])?;

        let cutoff_lambdas = ini.list_f64("pair", "cutoff_lambdas", &[8.0, 16.0, 32.0, 64.0])?;
        if cutoff_lambdas.iter().any(|&l| l < 1.0) {
            return Err(Error::config("pair.cutoff_lambdas", "cutoffs must be >= 1"));
        }
        let tail_p_list = ini.list_f64("pair", "tail_p_list", &[2.0, 2.5])?;
        let tail_d = ini.usize_or("pair", "tail_d", 3)? as u32;

        let fock_modes = ini.usize_or("fock", "m", 8)?;
        if !(2..=12).contains(&fock_modes) {
            return Err(Error::config("fock.m", "mode count must be in 2..=12"));
        }
        let fock_particles = ini.usize_or("fock", "n", 3)?;
        if fock_particles >= fock_modes {
            return Err(Error::config("fock.n", "need fewer particles than modes"));
        }
        let fock_lambdas =
            ini.list_f64("fock", "lambda_list", &[0.0, 0.01, 0.02, 0.04, 0.08])?;

        let out_dir = ini
            .get("output", "dir")
            .unwrap_or("out")
            .to_string();
        let seed = ini.usize_or("output", "seed", 42)? as u64;

        let config_hash = {
            use sha2::{Digest, Sha256};
            let mut h = Sha256::new();
            h.update(ini.canonical.as_bytes());
            let digest = h.finalize();
            digest[..4].iter().map(|b| format!("{b:02x}")).collect()
        };

        Ok(RunConfig {
            d,
            n_particles,
            n_list,
            box_half_length,
            grid_points,
            external,
            pair,
            scf,
            cutoff_lambdas,
            tail_p_list,
            tail_d,
            fock_modes,
            fock_particles,
            fock_lambdas,
            xi_samples,
            window_eps,
            out_dir,
            seed,
            config_hash,
        })
    }
}
