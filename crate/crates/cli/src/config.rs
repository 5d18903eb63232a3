//! Run configuration: a TOML file merged with command-line flags (flags win).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ppaas_core::attacks::AttackSpec;
use ppaas_core::fis::load_fis_config;
use ppaas_core::orchestrator::{PoolConfig, UtilityMode};
use ppaas_core::perturbation::Perturbator;
use ppaas_core::utility_metric::Classifier;
use serde::Deserialize;

/// Contents of `--config`. Every key is optional.
///
/// ```toml
/// input = "blobs.csv"
/// label = "class"
/// seed = 7
/// fi_threshold = 0.8
///
/// [[perturbator]]
/// algorithm = "laplace_ldp"
/// epsilon = 1.0
///
/// [[attack]]
/// attack = "known_io"
/// known_fraction = 0.1
///
/// [[classifier]]
/// kind = "knn"
/// k = 3
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub label: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub fi_threshold: Option<f64>,
    pub max_rounds: Option<usize>,
    pub bin_width: Option<f64>,
    pub n_folds: Option<usize>,
    pub known_fraction: Option<f64>,
    pub utility_mode: Option<UtilityMode>,
    pub schedule: Option<Vec<f64>>,
    /// Path of a FIS document, relative to the config file.
    pub fis: Option<PathBuf>,
    #[serde(default)]
    pub perturbator: Vec<Perturbator>,
    #[serde(default)]
    pub attack: Vec<AttackSpec>,
    #[serde(default)]
    pub classifier: Vec<Classifier>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.input, &mut cfg.out_dir, &mut cfg.fis].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Flag values that override the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub label: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub fi_threshold: Option<f64>,
    pub max_rounds: Option<usize>,
    pub bin_width: Option<f64>,
    pub known_fraction: Option<f64>,
    pub pool: Option<Vec<String>>,
    pub attacks: Option<Vec<String>>,
    pub classifiers: Option<Vec<String>>,
    pub fis: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RunConfig {
    pub input: PathBuf,
    /// `None` selects the last column.
    pub label: Option<String>,
    pub out_dir: PathBuf,
    pub pool: PoolConfig,
}

fn by_names<T>(names: &[String], what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    names
        .iter()
        .map(|n| parse(n.trim()).with_context(|| format!("unknown {what} {n:?}")))
        .collect()
}

pub fn resolve(file: FileConfig, flags: Overrides, default_out: PathBuf) -> Result<RunConfig> {
    let input = flags.input.or(file.input).context("--input is required")?;
    if !input.is_file() {
        bail!("input file {} does not exist", input.display());
    }
    let seed = match flags.seed.or(file.seed) {
        Some(s) => s,
        None if std::env::var_os("CI").is_some() => bail!("--seed is mandatory when CI is set"),
        None => 0,
    };
    let defaults = PoolConfig::default();

    let perturbators = match flags.pool {
        Some(names) => by_names(&names, "perturbator", Perturbator::from_name)?,
        None if !file.perturbator.is_empty() => file.perturbator,
        None => defaults.perturbators,
    };
    let mut attacks = match flags.attacks {
        Some(names) => by_names(&names, "attack", AttackSpec::from_name)?,
        None if !file.attack.is_empty() => file.attack,
        None => defaults.attacks,
    };
    if let Some(f) = flags.known_fraction.or(file.known_fraction) {
        for a in &mut attacks {
            if let AttackSpec::KnownIo { known_fraction, .. } = a {
                *known_fraction = f;
            }
        }
    }
    let classifiers = match flags.classifiers {
        Some(names) => by_names(&names, "classifier", Classifier::from_name)?,
        None if !file.classifier.is_empty() => file.classifier,
        None => defaults.classifiers,
    };
    let fis = match flags.fis.or(file.fis) {
        Some(p) => {
            let doc = std::fs::read_to_string(&p).with_context(|| format!("reading FIS document {}", p.display()))?;
            load_fis_config(&doc).with_context(|| format!("in FIS document {}", p.display()))?
        }
        None => defaults.fis,
    };

    let pool = PoolConfig {
        perturbators,
        attacks,
        classifiers,
        fis,
        fi_threshold: flags.fi_threshold.or(file.fi_threshold).unwrap_or(defaults.fi_threshold),
        max_rounds: flags.max_rounds.or(file.max_rounds).unwrap_or(defaults.max_rounds),
        seed,
        bin_width: flags.bin_width.or(file.bin_width).unwrap_or(defaults.bin_width),
        n_folds: file.n_folds.unwrap_or(defaults.n_folds),
        utility_mode: file.utility_mode.unwrap_or(defaults.utility_mode),
        schedule: file.schedule.unwrap_or(defaults.schedule),
    };
    pool.validate()?;
    Ok(RunConfig {
        input,
        label: flags.label.or(file.label),
        out_dir: flags.out_dir.or(file.out_dir).unwrap_or(default_out),
        pool,
    })
}
