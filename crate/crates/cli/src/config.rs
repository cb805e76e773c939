//! Experiment configuration: presets, a flat versioned TOML file, and flag
//! overrides, applied in that order.
//!
//! ```toml
//! version = 1
//! preset = "fig4"
//! sigma_gs = [0.4]
//! sigmas = { start = 0.0, stop = 1.5, step = 0.05 }
//! n_delta = 1000
//! ```

use anyhow::{bail, Context, Result};
use coherence_core::experiments::{ExperimentConfig, Population};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig3,
    Fig4,
    Fig5,
    Table3,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Table3 => "table3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationKind {
    RhoA,
    Cue,
    KCoherentPure,
}

/// Fully resolved run parameters. Serialized form is what gets hashed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: u32,
    pub preset: Preset,
    pub d: usize,
    pub targets: Vec<usize>,
    pub orders: Vec<u32>,
    pub sigmas: Vec<f64>,
    pub sigma_gs: Vec<f64>,
    pub n_delta: usize,
    pub population: PopulationKind,
    pub size: usize,
    /// Support size for `k_coherent_pure`.
    pub pure_k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub purities: Vec<f64>,
    pub budget: usize,
}

/// A grid given either as a list or as `{start, stop, step}` (inclusive).
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            Grid::List(ref v) => Ok(v.clone()),
            Grid::Range { start, stop, step } => linspace(start, stop, step),
        }
    }
}

/// `start, start + step, …` up to `stop` inclusive, rounded to 12 decimals so
/// grids written in different ways produce identical values.
pub fn linspace(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        bail!("bad grid {start}:{stop}:{step}");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

/// Optional keys as they appear in a config file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: u32,
    pub preset: Option<Preset>,
    pub d: Option<usize>,
    pub targets: Option<Vec<usize>>,
    pub orders: Option<Vec<u32>>,
    pub sigmas: Option<Grid>,
    pub sigma_gs: Option<Grid>,
    pub n_delta: Option<usize>,
    pub population: Option<PopulationKind>,
    pub size: Option<usize>,
    pub pure_k: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub purities: Option<Grid>,
    pub budget: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).context("config file")?;
        if file.version != CONFIG_VERSION {
            bail!("config version {} unsupported (expected {CONFIG_VERSION})", file.version);
        }
        Ok(file)
    }
}

/// Command-line overrides; `None` keeps the file or preset value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub d: Option<usize>,
    pub targets: Option<Vec<usize>>,
    pub orders: Option<Vec<u32>>,
    pub sigmas: Option<Vec<f64>>,
    pub sigma_gs: Option<Vec<f64>>,
    pub n_delta: Option<usize>,
    pub size: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
}

impl RunConfig {
    pub fn preset(p: Preset) -> Self {
        let g = |a, b, s| linspace(a, b, s).expect("static grid");
        let base = RunConfig {
            version: CONFIG_VERSION,
            preset: p,
            d: 7,
            targets: vec![7],
            orders: vec![3],
            sigmas: g(0.0, 1.2, 0.1),
            sigma_gs: g(0.0, 0.6, 0.05),
            n_delta: 1000,
            population: PopulationKind::RhoA,
            size: 0,
            pure_k: 0,
            restarts: 20,
            seed: 2024,
            purities: Vec::new(),
            budget: 50,
        };
        match p {
            Preset::Fig3 => base,
            Preset::Fig4 => RunConfig { orders: vec![1, 2, 3], sigmas: g(0.0, 1.5, 0.05), sigma_gs: vec![0.4], ..base },
            Preset::Fig5 => RunConfig {
                d: 5,
                targets: vec![2, 3, 4, 5],
                orders: vec![2],
                sigmas: vec![1.0],
                sigma_gs: vec![0.0],
                n_delta: 1,
                purities: g(0.2, 1.0, 0.05),
                ..base
            },
            Preset::Table3 => RunConfig {
                targets: vec![4, 5, 6],
                orders: vec![1, 2, 3],
                sigma_gs: vec![0.3, 0.8],
                n_delta: 25,
                population: PopulationKind::Cue,
                size: 500,
                ..base
            },
        }
    }

    /// Preset named in the file (or `fallback`), then file keys, then flags.
    pub fn resolve(fallback: Option<Preset>, file: Option<&ConfigFile>, o: &Overrides) -> Result<Self> {
        let preset = file.and_then(|f| f.preset).or(fallback).context("no preset given (flag or config file)")?;
        let mut c = RunConfig::preset(preset);
        if let Some(f) = file {
            if let Some(p) = fallback {
                if f.preset.is_some_and(|fp| fp != p) {
                    bail!("config file preset differs from --preset");
                }
            }
            macro_rules! take {
                ($($k:ident),*) => { $( if let Some(v) = f.$k.clone() { c.$k = v; } )* };
            }
            take!(d, targets, orders, n_delta, population, size, pure_k, restarts, seed, budget);
            for (slot, grid) in [(&mut c.sigmas, &f.sigmas), (&mut c.sigma_gs, &f.sigma_gs), (&mut c.purities, &f.purities)] {
                if let Some(g) = grid {
                    *slot = g.values()?;
                }
            }
        }
        macro_rules! over {
            ($($k:ident),*) => { $( if let Some(v) = o.$k.clone() { c.$k = v; } )* };
        }
        over!(d, targets, orders, sigmas, sigma_gs, n_delta, size, restarts, seed, budget);
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        if self.preset == Preset::Fig5 {
            if self.d < 2 || self.targets.iter().any(|&k| k < 1 || k > self.d) {
                bail!("fig5 needs d >= 2 and targets in [1, d]");
            }
            if self.purities.is_empty() || self.sigmas.len() != 1 || self.budget < 1 {
                bail!("fig5 needs a purity grid, exactly one sigma and budget >= 1");
            }
            let pmin = 1.0 / self.d as f64;
            if let Some(p) = self.purities.iter().find(|&&p| !(p >= pmin - 1e-12 && p <= 1.0)) {
                bail!("purity {p} outside [1/d, 1]");
            }
            return Ok(());
        }
        self.experiment()?.check()?;
        Ok(())
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let population = match self.population {
            PopulationKind::RhoA => Population::RhoA,
            PopulationKind::Cue => Population::Cue { size: self.size },
            PopulationKind::KCoherentPure => Population::KCoherentPure { k: self.pure_k, size: self.size },
        };
        Ok(ExperimentConfig {
            d: self.d,
            targets: self.targets.clone(),
            orders: self.orders.clone(),
            sigmas: self.sigmas.clone(),
            sigma_gs: self.sigma_gs.clone(),
            n_delta: self.n_delta,
            population,
            restarts: self.restarts,
            seed: self.seed,
        })
    }

    /// sha256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("serializable");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_clean() {
        let g = linspace(0.0, 1.2, 0.1).unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(g[3], 0.3);
        assert_eq!(g[12], 1.2);
        assert_eq!(linspace(0.2, 1.0, 0.05).unwrap().len(), 17);
        assert!(linspace(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn file_then_flags() {
        let f = ConfigFile::parse("version = 1\npreset = \"fig4\"\nn_delta = 10\nsigmas = { start = 0.0, stop = 0.2, step = 0.1 }\n").unwrap();
        let o = Overrides { seed: Some(3), ..Overrides::default() };
        let c = RunConfig::resolve(None, Some(&f), &o).unwrap();
        assert_eq!(c.preset, Preset::Fig4);
        assert_eq!(c.n_delta, 10);
        assert_eq!(c.sigmas, vec![0.0, 0.1, 0.2]);
        assert_eq!(c.seed, 3);
        assert!(ConfigFile::parse("version = 2").is_err());
        assert!(ConfigFile::parse("version = 1\nbogus = 1").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::preset(Preset::Fig3);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn presets_validate() {
        for p in [Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Table3] {
            RunConfig::preset(p).check().unwrap();
        }
        let o = Overrides { targets: Some(vec![9]), ..Overrides::default() };
        assert!(RunConfig::resolve(Some(Preset::Fig3), None, &o).is_err());
    }
}
