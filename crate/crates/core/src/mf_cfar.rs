//! Matched filtering and cell-averaging CFAR.
//!
//! The compressed profile has one cell per full-pulse alignment, so it is
//! `n - 1` cells shorter than the received signal; cell `i` lines up with an
//! echo whose leading edge sits at bin `i`. With `Fs = 2·B`, every other cell
//! around an LFM peak is a matched-filter zero, so guard and reference cells
//! are taken at multiples of `cell_stride`.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::signal::{pulse_energy, Waveform};

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedProfile {
    pub linear: Vec<f64>,
    /// `20·log10(linear)`; `-inf` where `linear` is zero.
    pub db: Vec<f64>,
}

impl CompressedProfile {
    pub fn from_linear(linear: Vec<f64>) -> Self {
        let db = linear.iter().map(|&v| to_db(v)).collect();
        CompressedProfile { linear, db }
    }

    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }
}

/// `20·log10(v)`, applied to the already squared, normalised correlation.
pub fn to_db(v: f64) -> f64 {
    20.0 * v.log10()
}

/// `linear[i] = |Σ_k x[i+k]·conj(s[k])|² / Σ_k |s[k]|²` for every full
/// alignment of the pulse inside `x`.
pub fn matched_filter_profile(x: &[Complex64], s: &Waveform) -> Result<CompressedProfile> {
    let n = s.len();
    if n == 0 {
        return Err(invalid("empty reference pulse"));
    }
    if x.len() < n {
        return Err(invalid(format!(
            "received signal ({} samples) is shorter than the pulse ({n})",
            x.len()
        )));
    }
    let energy = pulse_energy(s);
    let reference: Vec<Complex64> = s.samples.iter().map(|v| v.conj()).collect();
    let linear = x
        .windows(n)
        .map(|win| {
            let acc = win
                .iter()
                .zip(&reference)
                .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b);
            acc.norm_sqr() / energy
        })
        .collect();
    Ok(CompressedProfile::from_linear(linear))
}

/// Threshold factor `α = R·(pfa^(−1/R) − 1)`.
pub fn cfar_alpha(reference_cells: usize, pfa: f64) -> Result<f64> {
    if reference_cells == 0 {
        return Err(invalid("at least one reference cell is required"));
    }
    if !(pfa > 0.0 && pfa <= 1.0) {
        return Err(invalid(format!("false alarm probability must be in (0, 1], got {pfa}")));
    }
    let r = reference_cells as f64;
    Ok(r * (pfa.powf(-1.0 / r) - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfarConfig {
    pub guard_per_side: usize,
    pub ref_per_side: usize,
    pub pfa_target: f64,
    /// Spacing between successive guard/reference cells.
    pub cell_stride: usize,
}

impl Default for CfarConfig {
    fn default() -> Self {
        CfarConfig {
            guard_per_side: 2,
            ref_per_side: 10,
            pfa_target: 1e-3,
            cell_stride: 2,
        }
    }
}

impl CfarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.guard_per_side == 0 || self.ref_per_side == 0 || self.cell_stride == 0 {
            return Err(invalid("guard, reference and stride counts must be at least 1"));
        }
        cfar_alpha(self.reference_cells(), self.pfa_target).map(|_| ())
    }

    /// Total reference cells `R` (both sides).
    pub fn reference_cells(&self) -> usize {
        2 * self.ref_per_side
    }

    pub fn threshold_factor(&self) -> Result<f64> {
        cfar_alpha(self.reference_cells(), self.pfa_target)
    }

    /// Distance from the cell under test to its outermost reference cell.
    pub fn half_window(&self) -> usize {
        (self.guard_per_side + self.ref_per_side) * self.cell_stride
    }

    /// Offsets (positive side) of the reference cells.
    fn reference_offsets(&self) -> impl Iterator<Item = usize> + '_ {
        (self.guard_per_side + 1..=self.guard_per_side + self.ref_per_side).map(|j| j * self.cell_stride)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfarOutput {
    pub detections: Vec<bool>,
    /// `None` for edge cells without a full window.
    pub thresholds: Vec<Option<f64>>,
}

impl CfarOutput {
    pub fn valid(&self) -> Vec<bool> {
        self.thresholds.iter().map(Option::is_some).collect()
    }
}

/// Cell-averaging CFAR over a compressed profile: `linear[i] > α · mean(ref)`.
pub fn ca_cfar_detect(cp: &CompressedProfile, cfg: &CfarConfig) -> Result<CfarOutput> {
    cfg.validate()?;
    let alpha = cfg.threshold_factor()?;
    let len = cp.len();
    let hw = cfg.half_window();
    if len < 2 * hw + 1 {
        return Err(invalid(format!(
            "a {len}-cell profile cannot host a CFAR window of {} cells",
            2 * hw + 1
        )));
    }
    let r = cfg.reference_cells() as f64;
    let offsets: Vec<usize> = cfg.reference_offsets().collect();
    let mut detections = vec![false; len];
    let mut thresholds = vec![None; len];
    for i in hw..len - hw {
        let sum: f64 = offsets
            .iter()
            .map(|&d| cp.linear[i - d] + cp.linear[i + d])
            .sum();
        let t = alpha * sum / r;
        thresholds[i] = Some(t);
        detections[i] = cp.linear[i] > t;
    }
    Ok(CfarOutput {
        detections,
        thresholds,
    })
}

/// `bin,db,threshold_db,detection` rows; threshold and detection are empty
/// where the CFAR window does not fit.
pub fn trace_csv(cp: &CompressedProfile, out: &CfarOutput) -> String {
    let mut s = String::from("bin,db,threshold_db,detection\n");
    for i in 0..cp.len() {
        match out.thresholds[i] {
            Some(t) => writeln!(s, "{i},{},{},{}", cp.db[i], to_db(t), u8::from(out.detections[i])),
            None => writeln!(s, "{i},{},,", cp.db[i]),
        }
        .expect("writing to a String");
    }
    s
}
