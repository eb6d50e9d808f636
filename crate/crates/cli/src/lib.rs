//! Command-line driver: dataset generation, training, per-profile traces and
//! Pd/Pfa reports, all configured through one [`RunConfig`].

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_detect, cmd_evaluate, cmd_generate, cmd_train};
pub use config::{Recipe, RunConfig};

macro_rules! overrides {
    ($($field:ident $(| $alias:literal)?),* $(,)?) => {
        /// One flag per config key; each overrides the config file.
        #[derive(Args, Debug, Clone, Default)]
        pub struct Overrides {
            $(
                #[arg(long, value_name = "VALUE", help_heading = "Config overrides" $(, visible_alias = $alias)?)]
                pub $field: Option<String>,
            )*
        }

        impl Overrides {
            pub fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut v = Vec::new();
                $(
                    if let Some(x) = &self.$field {
                        v.push((stringify!($field), x.as_str()));
                    }
                )*
                v
            }
        }
    };
}

overrides!(
    seed,
    recipe,
    m,
    sample_rate_hz,
    pulse_duration_s,
    bandwidths_hz,
    reflection_coeffs,
    noise_stds,
    target_counts,
    count_step,
    strides,
    stride_step,
    offset_step,
    jitter_max,
    n_empty,
    n_contrastive,
    tone_freq_hz,
    mf_bandwidth_hz,
    guard_per_side,
    ref_per_side,
    pfa_target,
    cell_stride,
    epochs,
    batch_size | "batch",
    lr0,
    lr_halving_period | "lr-half-every",
    positive_weight | "pos-weight",
    threshold,
    hidden_width,
    exclusion_window,
    profile_index,
    dataset,
    valid_dataset,
    model,
    history,
    report,
    output,
);

#[derive(Parser, Debug)]
#[command(name = "rpdetect", version, about = "Radar range profile target detection")]
pub struct Cli {
    /// `key = value` config file; flags take precedence over its entries.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads, 0 for all available cores.
    #[arg(long, global = true, env = "RPDETECT_THREADS", value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a range profile dataset.
    Generate(Overrides),
    /// Train the network on a dataset.
    Train(Overrides),
    /// Per-bin trace of one profile through both detectors.
    Detect(Overrides),
    /// Pd/Pfa report over a dataset.
    Evaluate(Overrides),
    /// Print the effective configuration.
    Config(Overrides),
}

impl Command {
    fn overrides(&self) -> &Overrides {
        match self {
            Command::Generate(o) | Command::Train(o) | Command::Detect(o) | Command::Evaluate(o) | Command::Config(o) => o,
        }
    }
}

/// Default, then config file, then flags.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut pairs = config::parse_pairs(&text)?;
    pairs.extend(cli.command.overrides().pairs());
    let threads = cli.threads.map(|t| t.to_string());
    if let Some(t) = &threads {
        pairs.push(("threads", t));
    }
    let mut cfg = RunConfig::default();
    cfg.apply_pairs(&pairs)?;
    Ok(cfg)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = effective_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    let mut buf = Vec::new();
    let status = pool.install(|| match &cli.command {
        Command::Generate(_) => cmd_generate(&cfg, &mut buf).map(drop),
        Command::Train(_) => cmd_train(&cfg, &mut buf).map(drop),
        Command::Detect(_) => cmd_detect(&cfg, &mut buf),
        Command::Evaluate(_) => cmd_evaluate(&cfg, &mut buf).map(drop),
        Command::Config(_) => {
            buf.extend_from_slice(cfg.to_text().as_bytes());
            Ok(())
        }
    });
    out.write_all(&buf)?;
    status
}
