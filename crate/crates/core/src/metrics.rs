//! Pd/Pfa accounting.
//!
//! Only bins holding a target count as positives. A non-target bin is an
//! eligible negative only if it is farther than `exclusion_window` bins from
//! every target; closer bins are correlated with a target echo and are left
//! out of both rates. Bins where a detector has no output (validity mask) are
//! left out as well. Rates are ratios of sums over all scored profiles.

use std::fmt::Write as _;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use crate::datagen::{ProfileKind, ProfileMeta, RangeProfile};
use crate::error::{check_len, invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DetectionCounts {
    pub true_detections: u64,
    pub missed: u64,
    pub false_alarms: u64,
    pub eligible_negatives: u64,
    /// Bins counted neither as positive nor as eligible negative.
    pub excluded_bins: u64,
}

impl DetectionCounts {
    pub fn positives(&self) -> u64 {
        self.true_detections + self.missed
    }

    pub fn total_bins(&self) -> u64 {
        self.positives() + self.eligible_negatives + self.excluded_bins
    }
}

impl Add for DetectionCounts {
    type Output = DetectionCounts;

    fn add(mut self, rhs: DetectionCounts) -> DetectionCounts {
        self += rhs;
        self
    }
}

impl AddAssign for DetectionCounts {
    fn add_assign(&mut self, rhs: DetectionCounts) {
        self.true_detections += rhs.true_detections;
        self.missed += rhs.missed;
        self.false_alarms += rhs.false_alarms;
        self.eligible_negatives += rhs.eligible_negatives;
        self.excluded_bins += rhs.excluded_bins;
    }
}

impl Sum for DetectionCounts {
    fn sum<I: Iterator<Item = DetectionCounts>>(iter: I) -> Self {
        iter.fold(DetectionCounts::default(), Add::add)
    }
}

impl<'a> Sum<&'a DetectionCounts> for DetectionCounts {
    fn sum<I: Iterator<Item = &'a DetectionCounts>>(iter: I) -> Self {
        iter.copied().sum()
    }
}

/// Scores one profile. `valid`, when given, masks out bins without detector
/// output; `target_bins` must be sorted.
pub fn score_profile(
    detections: &[bool],
    valid: Option<&[bool]>,
    target_bins: &[usize],
    exclusion_window: usize,
) -> Result<DetectionCounts> {
    let m = detections.len();
    if let Some(v) = valid {
        check_len("validity mask", m, v.len())?;
    }
    if let Some(&b) = target_bins.iter().find(|&&b| b >= m) {
        return Err(invalid(format!("target bin {b} outside a {m}-bin profile")));
    }
    // +1 at the start of each exclusion interval, -1 past its end
    let mut edges = vec![0i32; m + 1];
    for &t in target_bins {
        edges[t.saturating_sub(exclusion_window)] += 1;
        edges[(t + exclusion_window + 1).min(m)] -= 1;
    }
    let mut is_target = vec![false; m];
    for &t in target_bins {
        is_target[t] = true;
    }

    let mut c = DetectionCounts::default();
    let mut near = 0i32;
    for i in 0..m {
        near += edges[i];
        if !valid.is_none_or(|v| v[i]) {
            c.excluded_bins += 1;
        } else if is_target[i] {
            if detections[i] {
                c.true_detections += 1;
            } else {
                c.missed += 1;
            }
        } else if near > 0 {
            c.excluded_bins += 1;
        } else {
            c.eligible_negatives += 1;
            if detections[i] {
                c.false_alarms += 1;
            }
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rates {
    /// `None` when no target bin was scored.
    pub pd: Option<f64>,
    /// `None` when no eligible negative was scored.
    pub pfa: Option<f64>,
}

impl From<DetectionCounts> for Rates {
    fn from(c: DetectionCounts) -> Rates {
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        Rates {
            pd: ratio(c.true_detections, c.positives()),
            pfa: ratio(c.false_alarms, c.eligible_negatives),
        }
    }
}

pub fn aggregate<I: IntoIterator<Item = DetectionCounts>>(counts: I) -> Rates {
    Rates::from(counts.into_iter().sum::<DetectionCounts>())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SubsetFilter {
    pub reflection_coeff: Option<f64>,
    pub noise_std: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub kind: Option<ProfileKind>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

impl SubsetFilter {
    pub fn all() -> Self {
        SubsetFilter::default()
    }

    pub fn matches(&self, meta: &ProfileMeta) -> bool {
        self.reflection_coeff.is_none_or(|r| close(r, meta.reflection_coeff))
            && self.noise_std.is_none_or(|s| close(s, meta.noise_std))
            && self.bandwidth_hz.is_none_or(|b| close(b, meta.bandwidth_hz))
            && self.kind.is_none_or(|k| k == meta.kind)
    }
}

pub fn filter_subset<'a>(profiles: &'a [RangeProfile], f: &SubsetFilter) -> Vec<&'a RangeProfile> {
    profiles.iter().filter(|p| f.matches(&p.meta)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedFilter {
    pub name: String,
    pub filter: SubsetFilter,
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.iter().any(|&o| close(o, v)) {
            out.push(v);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// "All RPs" followed by one row per distinct reflection coefficient, noise
/// level and bandwidth found among target profiles.
pub fn standard_filters(profiles: &[RangeProfile]) -> Vec<NamedFilter> {
    let targets = || profiles.iter().filter(|p| p.meta.kind == ProfileKind::Targets);
    let mut out = vec![NamedFilter {
        name: "All RPs".into(),
        filter: SubsetFilter::all(),
    }];
    for r in distinct(targets().map(|p| p.meta.reflection_coeff)) {
        out.push(NamedFilter {
            name: format!("Refl coeff = {r}"),
            filter: SubsetFilter {
                reflection_coeff: Some(r),
                ..SubsetFilter::default()
            },
        });
    }
    for s in distinct(targets().map(|p| p.meta.noise_std)) {
        out.push(NamedFilter {
            name: format!("Noise std = {s}"),
            filter: SubsetFilter {
                noise_std: Some(s),
                ..SubsetFilter::default()
            },
        });
    }
    for b in distinct(targets().map(|p| p.meta.bandwidth_hz)) {
        out.push(NamedFilter {
            name: format!("LFM {} MHz", b / 1e6),
            filter: SubsetFilter {
                bandwidth_hz: Some(b),
                ..SubsetFilter::default()
            },
        });
    }
    out
}

/// Four significant digits; tiny values in exponent form, undefined as `n/a`.
pub fn format_rate(v: Option<f64>) -> String {
    match v {
        None => "n/a".into(),
        Some(0.0) => "0".into(),
        Some(x) => {
            let rounded: f64 = format!("{x:.3e}").parse().expect("formatted float parses");
            if rounded.abs() < 1e-5 {
                format!("{rounded:e}")
            } else {
                format!("{rounded}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub subset: String,
    pub detector: String,
    pub rates: Rates,
}

pub const REPORT_HEADER: &str = "subset,detector,pd,pfa";

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{}",
            r.subset,
            r.detector,
            format_rate(r.rates.pd),
            format_rate(r.rates.pfa)
        )
        .expect("writing to a String");
    }
    s
}

/// Subsets down, detectors across, `pd / pfa` in each cell. Row and column
/// order follow first appearance in `rows`.
pub fn report_text(rows: &[ReportRow]) -> String {
    let mut subsets: Vec<&str> = Vec::new();
    let mut detectors: Vec<&str> = Vec::new();
    for r in rows {
        if !subsets.contains(&r.subset.as_str()) {
            subsets.push(&r.subset);
        }
        if !detectors.contains(&r.detector.as_str()) {
            detectors.push(&r.detector);
        }
    }
    let cell = |s: &str, d: &str| {
        rows.iter()
            .find(|r| r.subset == s && r.detector == d)
            .map(|r| format!("{} / {}", format_rate(r.rates.pd), format_rate(r.rates.pfa)))
            .unwrap_or_default()
    };
    let mut table: Vec<Vec<String>> = vec![std::iter::once("Subset filter".to_string())
        .chain(detectors.iter().map(|d| d.to_string()))
        .collect()];
    for s in &subsets {
        table.push(
            std::iter::once(s.to_string())
                .chain(detectors.iter().map(|d| cell(s, d)))
                .collect(),
        );
    }
    let widths: Vec<usize> = (0..=detectors.len())
        .map(|c| table.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:<w$}"))
            .collect();
        writeln!(out, "{}", line.join(" | ").trim_end()).expect("writing to a String");
    }
    out
}
