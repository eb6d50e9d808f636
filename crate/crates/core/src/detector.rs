//! Uniform interface over the two detection chains, plus dataset-level
//! scoring into Pd/Pfa report rows.

use rayon::prelude::*;

use crate::cvnn::{forward, NetworkParams};
use crate::datagen::RangeProfile;
use crate::error::{check_len, Result};
use crate::metrics::{aggregate, score_profile, DetectionCounts, NamedFilter, ReportRow};
use crate::mf_cfar::{ca_cfar_detect, matched_filter_profile, CfarConfig};
use crate::signal::Waveform;

/// Per-bin decisions over a full profile. `valid[i]` is false where the
/// detector produces no output.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOutput {
    pub detections: Vec<bool>,
    pub valid: Vec<bool>,
}

pub trait ProfileDetector: Sync {
    fn name(&self) -> &str;
    fn detect(&self, profile: &RangeProfile) -> Result<DetectorOutput>;
}

/// Matched filter against the nominal transmitted pulse, then CA-CFAR.
#[derive(Debug, Clone)]
pub struct MfCfarDetector {
    pub name: String,
    pub reference: Waveform,
    pub cfar: CfarConfig,
}

impl ProfileDetector for MfCfarDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn detect(&self, profile: &RangeProfile) -> Result<DetectorOutput> {
        let m = profile.len();
        let cp = matched_filter_profile(&profile.samples_f64(), &self.reference)?;
        let out = ca_cfar_detect(&cp, &self.cfar)?;
        let mut detections = vec![false; m];
        let mut valid = vec![false; m];
        detections[..cp.len()].copy_from_slice(&out.detections);
        for (v, t) in valid.iter_mut().zip(&out.thresholds) {
            *v = t.is_some();
        }
        Ok(DetectorOutput { detections, valid })
    }
}

#[derive(Debug, Clone)]
pub struct NeuralDetector {
    pub name: String,
    pub params: NetworkParams,
    pub threshold: f64,
}

impl ProfileDetector for NeuralDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn detect(&self, profile: &RangeProfile) -> Result<DetectorOutput> {
        let y = forward(&self.params, &profile.samples_f64())?.y;
        Ok(DetectorOutput {
            detections: y.iter().map(|&v| v > self.threshold).collect(),
            valid: vec![true; y.len()],
        })
    }
}

/// Reports exactly the labels; useful as a scoring sanity reference.
#[derive(Debug, Clone)]
pub struct LabelOracle;

impl ProfileDetector for LabelOracle {
    fn name(&self) -> &str {
        "oracle"
    }

    fn detect(&self, profile: &RangeProfile) -> Result<DetectorOutput> {
        Ok(DetectorOutput {
            detections: profile.labels.clone(),
            valid: vec![true; profile.len()],
        })
    }
}

/// Counts for every profile, in dataset order.
pub fn score_profiles(
    profiles: &[RangeProfile],
    detector: &dyn ProfileDetector,
    exclusion_window: usize,
) -> Result<Vec<DetectionCounts>> {
    profiles
        .par_iter()
        .map(|p| {
            let out = detector.detect(p)?;
            check_len("detector output", p.len(), out.detections.len())?;
            score_profile(&out.detections, Some(&out.valid), &p.target_bins, exclusion_window)
        })
        .collect()
}

/// One row per (filter, detector), filters outermost.
pub fn evaluate(
    profiles: &[RangeProfile],
    detectors: &[&dyn ProfileDetector],
    filters: &[NamedFilter],
    exclusion_window: usize,
) -> Result<Vec<ReportRow>> {
    let per_detector = detectors
        .iter()
        .map(|d| score_profiles(profiles, *d, exclusion_window))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for f in filters {
        for (d, counts) in detectors.iter().zip(&per_detector) {
            let selected = profiles
                .iter()
                .zip(counts)
                .filter(|(p, _)| f.filter.matches(&p.meta))
                .map(|(_, c)| *c);
            rows.push(ReportRow {
                subset: f.name.clone(),
                detector: d.name().to_string(),
                rates: aggregate(selected),
            });
        }
    }
    Ok(rows)
}
