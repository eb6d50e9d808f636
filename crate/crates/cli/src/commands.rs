use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rpdetect_core::cvnn::{
    forward, initial_params, read_checkpoint, train_from, write_checkpoint, NetworkParams, TrainResult,
};
use rpdetect_core::datagen::{read_dataset, Dataset, DatasetPlan, DatasetReader, DatasetWriter, KindCounts};
use rpdetect_core::detector::{evaluate, MfCfarDetector, NeuralDetector, ProfileDetector};
use rpdetect_core::metrics::{report_csv, report_text, standard_filters, ReportRow};
use rpdetect_core::mf_cfar::{ca_cfar_detect, matched_filter_profile, to_db};
use rpdetect_core::signal::{make_lfm_chirp, Waveform};

use crate::config::RunConfig;

/// Profiles generated in memory before being streamed to disk.
const WRITE_BLOCK: usize = 1024;

fn load(path: &Path) -> Result<Dataset> {
    read_dataset(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn reference_chirp(cfg: &RunConfig, n: usize) -> Result<Waveform> {
    let d = &cfg.dataset;
    let w = make_lfm_chirp(cfg.mf_bandwidth_hz, d.pulse_duration_s, d.sample_rate_hz)?;
    ensure!(
        w.len() == n,
        "reference chirp has {} samples but the dataset pulse has {n}",
        w.len()
    );
    Ok(w)
}

fn model_paths(cfg: &RunConfig) -> Vec<PathBuf> {
    cfg.model_path
        .iter()
        .flat_map(|p| p.to_string_lossy().split(',').map(|s| PathBuf::from(s.trim())).collect::<Vec<_>>())
        .filter(|p| !p.as_os_str().is_empty())
        .collect()
}

fn load_model(path: &Path, m: usize) -> Result<NetworkParams> {
    let p = read_checkpoint(path).with_context(|| format!("reading {}", path.display()))?;
    ensure!(p.m == m, "model {} expects {} bins, dataset has {m}", path.display(), p.m);
    Ok(p)
}

/// Writes the configured dataset and returns its per-kind counts.
pub fn cmd_generate(cfg: &RunConfig, out: &mut dyn Write) -> Result<KindCounts> {
    let path = cfg.require(&cfg.dataset_path, "dataset")?;
    let spec = cfg.dataset_spec();
    let plan = DatasetPlan::new(&spec)?;
    let mut w = DatasetWriter::create(path, spec.m, plan.pulse_len(), plan.len() as u64)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut start = 0;
    while start < plan.len() {
        let end = (start + WRITE_BLOCK).min(plan.len());
        for p in plan.generate_range(start..end) {
            w.write_profile(&p)?;
        }
        start = end;
    }
    w.finish()?;
    let c = plan.counts();
    writeln!(out, "wrote {} profiles to {}", c.total(), path.display())?;
    writeln!(out, "targets {}", c.targets)?;
    writeln!(out, "empty {}", c.empty)?;
    writeln!(out, "contrastive {}", c.contrastive)?;
    Ok(c)
}

pub const HISTORY_HEADER: &str = "epoch,lr,train_loss,valid_loss,valid_pd,valid_pfa";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Trains on `dataset`, writes the final weights to `model` and one line per
/// epoch to `history`.
pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> Result<TrainResult> {
    let data_path = cfg.require(&cfg.dataset_path, "dataset")?;
    let model_path = cfg.require(&cfg.model_path, "model")?;
    let history_path = cfg.require(&cfg.history_path, "history")?;
    let train_set = load(data_path)?;
    let valid_set = match &cfg.valid_dataset_path {
        Some(p) => {
            let v = load(p)?;
            ensure!(v.m == train_set.m, "validation set has {} bins, training set {}", v.m, train_set.m);
            v.profiles
        }
        None => Vec::new(),
    };
    if train_set.is_empty() {
        bail!("training set {} is empty", data_path.display());
    }
    let tc = cfg.train_config();
    let result = train_from(initial_params(train_set.m, &tc), &train_set.profiles, &valid_set, &tc)?;
    write_checkpoint(model_path, &result.params).with_context(|| format!("writing {}", model_path.display()))?;

    let mut csv = cfg.header_comment();
    csv.push_str(HISTORY_HEADER);
    csv.push('\n');
    for r in &result.history {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.epoch,
            r.lr,
            r.train_loss,
            opt(r.valid_loss),
            opt(r.valid.pd),
            opt(r.valid.pfa)
        )?;
    }
    write_text(history_path, &csv)?;

    let last = result.history.last().expect("at least one epoch");
    writeln!(out, "trained {} epochs on {} profiles", result.history.len(), train_set.len())?;
    writeln!(out, "final train loss {}", last.train_loss)?;
    if let Some(v) = last.valid_loss {
        writeln!(out, "final valid loss {v}")?;
    }
    writeln!(out, "model written to {}", model_path.display())?;
    Ok(result)
}

pub const DETECT_HEADER: &str = "bin,mf_db,cfar_threshold_db,mf_detect,nn_output,nn_detect,label";

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Per-bin trace of one profile through both detectors. Written to `output`
/// if set, else to `out`.
pub fn cmd_detect(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let data_path = cfg.require(&cfg.dataset_path, "dataset")?;
    let mut reader = DatasetReader::open(data_path).with_context(|| format!("reading {}", data_path.display()))?;
    let (m, n, count) = (reader.m, reader.n, reader.count);
    let idx = cfg.profile_index;
    if idx as u64 >= count {
        bail!("profile index {idx} out of range for {count} profiles");
    }
    let profile = reader.nth(idx).expect("index checked against count")?;
    let x = profile.samples_f64();

    let cp = matched_filter_profile(&x, &reference_chirp(cfg, n)?)?;
    let cfar = ca_cfar_detect(&cp, &cfg.cfar)?;
    let nn = match model_paths(cfg).as_slice() {
        [] => None,
        [p] => Some(forward(&load_model(p, m)?, &x)?.y),
        _ => bail!("detect takes a single model"),
    };
    let threshold = cfg.train.threshold;

    let mut csv = cfg.header_comment();
    csv.push_str(DETECT_HEADER);
    csv.push('\n');
    for bin in 0..m {
        let (mf_db, thr, mf_det) = match cfar.thresholds.get(bin) {
            Some(Some(t)) => (cp.db[bin].to_string(), to_db(*t).to_string(), bit(cfar.detections[bin]).to_string()),
            Some(None) => (cp.db[bin].to_string(), String::new(), String::new()),
            None => Default::default(),
        };
        let (nn_out, nn_det) = match &nn {
            Some(y) => (y[bin].to_string(), bit(y[bin] > threshold).to_string()),
            None => Default::default(),
        };
        writeln!(csv, "{bin},{mf_db},{thr},{mf_det},{nn_out},{nn_det},{}", bit(profile.labels[bin]))?;
    }
    match &cfg.output_path {
        Some(p) => write_text(p, &csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn detector_name(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("nn_{stem}")
}

/// Pd/Pfa of the matched filter chain and every listed model over the
/// standard subsets of `dataset`.
pub fn cmd_evaluate(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<ReportRow>> {
    let data_path = cfg.require(&cfg.dataset_path, "dataset")?;
    let report_path = cfg.require(&cfg.report_path, "report")?;
    let data = load(data_path)?;
    let mf = MfCfarDetector {
        name: "mf_cfar".into(),
        reference: reference_chirp(cfg, data.n)?,
        cfar: cfg.cfar,
    };
    let mut nets = Vec::new();
    for p in model_paths(cfg) {
        nets.push(NeuralDetector {
            name: detector_name(&p),
            params: load_model(&p, data.m)?,
            threshold: cfg.train.threshold,
        });
    }
    let mut detectors: Vec<&dyn ProfileDetector> = nets.iter().map(|d| d as &dyn ProfileDetector).collect();
    detectors.push(&mf);
    let rows = evaluate(&data.profiles, &detectors, &standard_filters(&data.profiles), cfg.exclusion_window)?;

    let mut csv = cfg.header_comment();
    csv.push_str(&report_csv(&rows));
    write_text(report_path, &csv)?;
    out.write_all(report_text(&rows).as_bytes())?;
    Ok(rows)
}
