//! Flat `key = value` run configuration.
//!
//! Every setting of a run lives in [`RunConfig`]. The text form has one
//! `key = value` line per field, `#` starts a comment, blank lines are
//! ignored. Lists are comma separated, inclusive ranges are written `lo-hi`,
//! and an empty value clears an optional path. Floats are printed in their
//! shortest round-trip form, so `parse(to_text(c)) == c`.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use rpdetect_core::cvnn::TrainConfig;
use rpdetect_core::datagen::DatasetSpec;
use rpdetect_core::mf_cfar::CfarConfig;
use rpdetect_core::seed::{subseed, DATAGEN};

/// Named starting points for the dataset grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    Baseline,
    Enriched,
    Valid,
    Test,
}

impl Recipe {
    pub const ALL: [Recipe; 4] = [Recipe::Baseline, Recipe::Enriched, Recipe::Valid, Recipe::Test];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Baseline => "baseline",
            Recipe::Enriched => "enriched",
            Recipe::Valid => "valid",
            Recipe::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| anyhow!("unknown recipe `{s}` (expected baseline, enriched, valid or test)"))
    }

    /// Full-size grid for this recipe; empty and contrastive counts are the
    /// full-size ones too and usually need scaling down with the grid steps.
    pub fn dataset(self) -> DatasetSpec {
        let base = DatasetSpec::default();
        match self {
            Recipe::Baseline => base,
            Recipe::Enriched => DatasetSpec {
                bandwidths_hz: vec![0.96e6, 1e6],
                n_empty: 408_480,
                n_contrastive: 102_120,
                ..base
            },
            Recipe::Valid => DatasetSpec {
                bandwidths_hz: vec![0.97e6],
                reflection_coeffs: vec![0.7],
                noise_stds: vec![0.08],
                target_counts: 1..=117,
                jitter_max: 2,
                n_empty: 103_160,
                n_contrastive: 51_580,
                ..base
            },
            Recipe::Test => DatasetSpec {
                bandwidths_hz: vec![0.98e6, 1e6],
                reflection_coeffs: vec![0.1, 0.8],
                noise_stds: vec![0.1, 0.2],
                jitter_max: 2,
                n_empty: 412_776,
                n_contrastive: 103_194,
                ..base
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub recipe: Recipe,
    pub dataset: DatasetSpec,
    /// Bandwidth of the matched filter reference chirp.
    pub mf_bandwidth_hz: f64,
    pub cfar: CfarConfig,
    pub train: TrainConfig,
    pub exclusion_window: usize,
    pub profile_index: usize,

    pub dataset_path: Option<PathBuf>,
    pub valid_dataset_path: Option<PathBuf>,
    /// Checkpoint written by `train`, read by `detect`; `evaluate` accepts a
    /// comma-separated list.
    pub model_path: Option<PathBuf>,
    pub history_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_recipe(Recipe::Baseline)
    }
}

/// Keys in the order they are written.
pub const KEYS: &[&str] = &[
    "seed",
    "threads",
    "recipe",
    "m",
    "sample_rate_hz",
    "pulse_duration_s",
    "bandwidths_hz",
    "reflection_coeffs",
    "noise_stds",
    "target_counts",
    "count_step",
    "strides",
    "stride_step",
    "offset_step",
    "jitter_max",
    "n_empty",
    "n_contrastive",
    "tone_freq_hz",
    "mf_bandwidth_hz",
    "guard_per_side",
    "ref_per_side",
    "pfa_target",
    "cell_stride",
    "epochs",
    "batch_size",
    "lr0",
    "lr_halving_period",
    "positive_weight",
    "threshold",
    "hidden_width",
    "exclusion_window",
    "profile_index",
    "dataset",
    "valid_dataset",
    "model",
    "history",
    "report",
    "output",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| anyhow!("invalid value for {key}: `{v}`"))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| num(key, x.trim())).collect()
}

fn range(key: &str, v: &str) -> Result<std::ops::RangeInclusive<usize>> {
    match v.split_once('-') {
        Some((lo, hi)) => Ok(num(key, lo.trim())?..=num(key, hi.trim())?),
        None => {
            let x = num(key, v)?;
            Ok(x..=x)
        }
    }
}

/// `key = value` lines of a config text, in order.
pub fn parse_pairs(text: &str) -> Result<Vec<(&str, &str)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
        pairs.push((k.trim(), v.trim()));
    }
    Ok(pairs)
}

fn path(v: &str) -> Option<PathBuf> {
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    pub fn from_recipe(recipe: Recipe) -> Self {
        RunConfig {
            seed: 0,
            threads: 0,
            recipe,
            dataset: recipe.dataset(),
            mf_bandwidth_hz: 1e6,
            cfar: CfarConfig::default(),
            train: TrainConfig::default(),
            exclusion_window: 199,
            profile_index: 0,
            dataset_path: None,
            valid_dataset_path: None,
            model_path: None,
            history_path: None,
            report_path: None,
            output_path: None,
        }
    }

    /// Sets one field from its text form. `recipe` resets the dataset grid.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let d = &mut self.dataset;
        match key {
            "seed" => self.seed = num(key, v)?,
            "threads" => self.threads = num(key, v)?,
            "recipe" => {
                self.recipe = Recipe::parse(v)?;
                self.dataset = self.recipe.dataset();
            }
            "m" => d.m = num(key, v)?,
            "sample_rate_hz" => d.sample_rate_hz = num(key, v)?,
            "pulse_duration_s" => d.pulse_duration_s = num(key, v)?,
            "bandwidths_hz" => d.bandwidths_hz = list(key, v)?,
            "reflection_coeffs" => d.reflection_coeffs = list(key, v)?,
            "noise_stds" => d.noise_stds = list(key, v)?,
            "target_counts" => d.target_counts = range(key, v)?,
            "count_step" => d.count_step = num(key, v)?,
            "strides" => d.strides = range(key, v)?,
            "stride_step" => d.stride_step = num(key, v)?,
            "offset_step" => d.offset_step = num(key, v)?,
            "jitter_max" => d.jitter_max = num(key, v)?,
            "n_empty" => d.n_empty = num(key, v)?,
            "n_contrastive" => d.n_contrastive = num(key, v)?,
            "tone_freq_hz" => d.tone_freq_hz = num(key, v)?,
            "mf_bandwidth_hz" => self.mf_bandwidth_hz = num(key, v)?,
            "guard_per_side" => self.cfar.guard_per_side = num(key, v)?,
            "ref_per_side" => self.cfar.ref_per_side = num(key, v)?,
            "pfa_target" => self.cfar.pfa_target = num(key, v)?,
            "cell_stride" => self.cfar.cell_stride = num(key, v)?,
            "epochs" => self.train.epochs = num(key, v)?,
            "batch_size" => self.train.batch_size = num(key, v)?,
            "lr0" => self.train.lr0 = num(key, v)?,
            "lr_halving_period" => self.train.lr_halving_period = num(key, v)?,
            "positive_weight" => self.train.positive_weight = num(key, v)?,
            "threshold" => self.train.threshold = num(key, v)?,
            "hidden_width" => self.train.hidden_width = num(key, v)?,
            "exclusion_window" => self.exclusion_window = num(key, v)?,
            "profile_index" => self.profile_index = num(key, v)?,
            "dataset" => self.dataset_path = path(v),
            "valid_dataset" => self.valid_dataset_path = path(v),
            "model" => self.model_path = path(v),
            "history" => self.history_path = path(v),
            "report" => self.report_path = path(v),
            "output" => self.output_path = path(v),
            _ => bail!("unknown config key `{key}`"),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let d = &self.dataset;
        let range = |r: &std::ops::RangeInclusive<usize>| format!("{}-{}", r.start(), r.end());
        Some(match key {
            "seed" => self.seed.to_string(),
            "threads" => self.threads.to_string(),
            "recipe" => self.recipe.name().to_string(),
            "m" => d.m.to_string(),
            "sample_rate_hz" => d.sample_rate_hz.to_string(),
            "pulse_duration_s" => d.pulse_duration_s.to_string(),
            "bandwidths_hz" => join(&d.bandwidths_hz),
            "reflection_coeffs" => join(&d.reflection_coeffs),
            "noise_stds" => join(&d.noise_stds),
            "target_counts" => range(&d.target_counts),
            "count_step" => d.count_step.to_string(),
            "strides" => range(&d.strides),
            "stride_step" => d.stride_step.to_string(),
            "offset_step" => d.offset_step.to_string(),
            "jitter_max" => d.jitter_max.to_string(),
            "n_empty" => d.n_empty.to_string(),
            "n_contrastive" => d.n_contrastive.to_string(),
            "tone_freq_hz" => d.tone_freq_hz.to_string(),
            "mf_bandwidth_hz" => self.mf_bandwidth_hz.to_string(),
            "guard_per_side" => self.cfar.guard_per_side.to_string(),
            "ref_per_side" => self.cfar.ref_per_side.to_string(),
            "pfa_target" => self.cfar.pfa_target.to_string(),
            "cell_stride" => self.cfar.cell_stride.to_string(),
            "epochs" => self.train.epochs.to_string(),
            "batch_size" => self.train.batch_size.to_string(),
            "lr0" => self.train.lr0.to_string(),
            "lr_halving_period" => self.train.lr_halving_period.to_string(),
            "positive_weight" => self.train.positive_weight.to_string(),
            "threshold" => self.train.threshold.to_string(),
            "hidden_width" => self.train.hidden_width.to_string(),
            "exclusion_window" => self.exclusion_window.to_string(),
            "profile_index" => self.profile_index.to_string(),
            "dataset" => show_path(&self.dataset_path),
            "valid_dataset" => show_path(&self.valid_dataset_path),
            "model" => show_path(&self.model_path),
            "history" => show_path(&self.history_path),
            "report" => show_path(&self.report_path),
            "output" => show_path(&self.output_path),
            _ => return None,
        })
    }

    /// Applies `key = value` lines on top of `self`. A `recipe` line is
    /// applied first wherever it appears, so it never clobbers other lines.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        self.apply_pairs(&parse_pairs(text)?)
    }

    pub fn apply_pairs(&mut self, pairs: &[(&str, &str)]) -> Result<()> {
        for (k, v) in pairs.iter().filter(|(k, _)| *k == "recipe") {
            self.set(k, v)?;
        }
        for (k, v) in pairs.iter().filter(|(k, _)| *k != "recipe") {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for k in KEYS {
            writeln!(s, "{k} = {}", self.get(k).expect("listed key")).expect("writing to a String");
        }
        s
    }

    /// The text form with every line commented out, for CSV headers.
    pub fn header_comment(&self) -> String {
        self.to_text().lines().map(|l| format!("# {l}\n")).collect()
    }

    /// Dataset grid with the seed derived from the global one. The recipe
    /// name is part of the label so that, say, test and training sets built
    /// from one global seed draw different noise.
    pub fn dataset_spec(&self) -> DatasetSpec {
        DatasetSpec {
            seed: subseed(self.seed, &format!("{DATAGEN}/{}", self.recipe.name())),
            ..self.dataset.clone()
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            exclusion_window: self.exclusion_window,
            ..self.train.clone()
        }
    }

    pub fn require<'a>(&self, p: &'a Option<PathBuf>, key: &str) -> Result<&'a PathBuf> {
        p.as_ref().with_context(|| format!("`{key}` path is not set"))
    }
}
