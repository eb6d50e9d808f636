//! Labelled range profile synthesis.
//!
//! A range profile is the complex signal received over one pulse repetition
//! interval: every target contributes a copy of the transmitted pulse starting
//! at its range bin, scaled by a reflection coefficient, and the sum is buried
//! in circular white Gaussian noise. Labels mark the leading edge of each
//! echo. Datasets are Cartesian sweeps over distortion parameters and target
//! layouts, optionally enriched with noise-only and tone-pulse profiles.

mod format;

use std::ops::RangeInclusive;

use num_complex::{Complex32, Complex64};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::seed::stream_rng;
use crate::signal::{make_lfm_chirp, make_tone_pulse, Waveform};

pub use format::{read_dataset, write_dataset, DatasetReader, DatasetWriter, FORMAT_VERSION, MAGIC};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfileKind {
    Targets,
    Empty,
    Contrastive,
}

impl ProfileKind {
    pub fn code(self) -> u8 {
        match self {
            ProfileKind::Targets => 0,
            ProfileKind::Empty => 1,
            ProfileKind::Contrastive => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ProfileKind::Targets),
            1 => Some(ProfileKind::Empty),
            2 => Some(ProfileKind::Contrastive),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Targets => "targets",
            ProfileKind::Empty => "empty",
            ProfileKind::Contrastive => "contrastive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileMeta {
    pub bandwidth_hz: f64,
    pub reflection_coeff: f64,
    pub noise_std: f64,
    pub kind: ProfileKind,
}

/// One simulated received signal with per-bin labels.
///
/// Samples are stored in single precision, which is also the on-disk
/// precision, so a profile survives a write/read cycle unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile {
    pub samples: Vec<Complex32>,
    pub labels: Vec<bool>,
    pub target_bins: Vec<usize>,
    pub meta: ProfileMeta,
}

impl RangeProfile {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples_f64(&self) -> Vec<Complex64> {
        self.samples
            .iter()
            .map(|s| Complex64::new(f64::from(s.re), f64::from(s.im)))
            .collect()
    }

    /// Labels set exactly at `target_bins`, and every target echo fits.
    pub fn is_consistent(&self, pulse_len: usize) -> bool {
        let m = self.samples.len();
        if self.labels.len() != m {
            return false;
        }
        if self.target_bins.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        if self.target_bins.iter().any(|&b| b + pulse_len > m) {
            return false;
        }
        let set: Vec<usize> = (0..m).filter(|&i| self.labels[i]).collect();
        if set != self.target_bins {
            return false;
        }
        self.meta.kind == ProfileKind::Targets || self.target_bins.is_empty()
    }
}

/// `[offset, offset + stride, …]` with `num_targets` entries, rejected if the
/// last echo would run past the end of the profile.
pub fn place_targets_regular(
    num_targets: usize,
    stride: usize,
    offset: usize,
    m: usize,
    n: usize,
) -> Result<Vec<usize>> {
    if num_targets == 0 {
        return Ok(Vec::new());
    }
    if stride == 0 && num_targets > 1 {
        return Err(invalid("stride must be at least 1"));
    }
    let last = offset + (num_targets - 1) * stride;
    if last + n > m {
        return Err(invalid(format!(
            "{num_targets} targets at stride {stride} from bin {offset} overflow a {m}-bin profile with {n}-sample pulses"
        )));
    }
    Ok((0..num_targets).map(|i| offset + i * stride).collect())
}

/// Shifts each position by a uniform integer in `[-jitter_max, jitter_max]`,
/// clamps to `[0, m - n]`, then sorts and collapses duplicates.
pub fn jitter_positions<R: Rng + ?Sized>(
    positions: &[usize],
    jitter_max: usize,
    m: usize,
    n: usize,
    rng: &mut R,
) -> Vec<usize> {
    if jitter_max == 0 {
        return positions.to_vec();
    }
    let max_start = m.saturating_sub(n) as i64;
    let j = jitter_max as i64;
    let mut out: Vec<usize> = positions
        .iter()
        .map(|&p| {
            let shift = rng.random_range(-j..=j);
            (p as i64 + shift).clamp(0, max_start) as usize
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Noiseless coherent sum of `amplitude · pulse` copies starting at each
/// position, in double precision.
pub fn superpose_echoes(pulse: &[Complex64], positions: &[usize], amplitude: f64, m: usize) -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    for &p in positions {
        for (xi, s) in x[p..p + pulse.len()].iter_mut().zip(pulse) {
            *xi += s * amplitude;
        }
    }
    x
}

fn add_noise<R: Rng + ?Sized>(x: &mut [Complex64], noise_std: f64, rng: &mut R) {
    if noise_std == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, noise_std).expect("noise std validated");
    for xi in x {
        let re = normal.sample(rng);
        let im = normal.sample(rng);
        *xi += Complex64::new(re, im);
    }
}

fn check_echo_params(w: &Waveform, positions: &[usize], reflection_coeff: f64, noise_std: f64, m: usize) -> Result<()> {
    if !(reflection_coeff >= 0.0 && reflection_coeff.is_finite()) {
        return Err(invalid(format!("reflection coefficient must be >= 0, got {reflection_coeff}")));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(invalid(format!("noise std must be >= 0, got {noise_std}")));
    }
    if let Some(&p) = positions.iter().find(|&&p| p + w.len() > m) {
        return Err(invalid(format!("echo at bin {p} does not fit in {m} bins")));
    }
    Ok(())
}

fn to_single(x: Vec<Complex64>) -> Vec<Complex32> {
    x.into_iter()
        .map(|s| Complex32::new(s.re as f32, s.im as f32))
        .collect()
}

/// Target profile: echoes of `w` at `positions`, labelled at those bins.
pub fn synthesize_profile<R: Rng + ?Sized>(
    w: &Waveform,
    positions: &[usize],
    reflection_coeff: f64,
    noise_std: f64,
    m: usize,
    rng: &mut R,
) -> Result<RangeProfile> {
    check_echo_params(w, positions, reflection_coeff, noise_std, m)?;
    let mut target_bins = positions.to_vec();
    target_bins.sort_unstable();
    target_bins.dedup();
    let mut x = superpose_echoes(&w.samples, &target_bins, reflection_coeff, m);
    add_noise(&mut x, noise_std, rng);
    let mut labels = vec![false; m];
    for &b in &target_bins {
        labels[b] = true;
    }
    Ok(RangeProfile {
        samples: to_single(x),
        labels,
        target_bins,
        meta: ProfileMeta {
            bandwidth_hz: w.bandwidth_hz,
            reflection_coeff,
            noise_std,
            kind: ProfileKind::Targets,
        },
    })
}

/// Tone-pulse echoes at `positions`; no bin is labelled.
pub fn synthesize_contrastive<R: Rng + ?Sized>(
    tone: &Waveform,
    positions: &[usize],
    amplitude: f64,
    noise_std: f64,
    m: usize,
    bandwidth_tag_hz: f64,
    rng: &mut R,
) -> Result<RangeProfile> {
    check_echo_params(tone, positions, amplitude, noise_std, m)?;
    let mut x = superpose_echoes(&tone.samples, positions, amplitude, m);
    add_noise(&mut x, noise_std, rng);
    Ok(RangeProfile {
        samples: to_single(x),
        labels: vec![false; m],
        target_bins: Vec::new(),
        meta: ProfileMeta {
            bandwidth_hz: bandwidth_tag_hz,
            reflection_coeff: amplitude,
            noise_std,
            kind: ProfileKind::Contrastive,
        },
    })
}

/// Noise-only profile.
pub fn synthesize_empty<R: Rng + ?Sized>(m: usize, noise_std: f64, meta: ProfileMeta, rng: &mut R) -> Result<RangeProfile> {
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(invalid(format!("noise std must be >= 0, got {noise_std}")));
    }
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    add_noise(&mut x, noise_std, rng);
    Ok(RangeProfile {
        samples: to_single(x),
        labels: vec![false; m],
        target_bins: Vec::new(),
        meta: ProfileMeta {
            noise_std,
            kind: ProfileKind::Empty,
            ..meta
        },
    })
}

/// Generation grid for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    /// Range bins per profile.
    pub m: usize,
    pub sample_rate_hz: f64,
    pub pulse_duration_s: f64,
    pub bandwidths_hz: Vec<f64>,
    pub reflection_coeffs: Vec<f64>,
    pub noise_stds: Vec<f64>,
    pub target_counts: RangeInclusive<usize>,
    pub count_step: usize,
    pub strides: RangeInclusive<usize>,
    pub stride_step: usize,
    /// Step between consecutive first-target offsets.
    pub offset_step: usize,
    /// 0 keeps targets regularly spaced.
    pub jitter_max: usize,
    pub n_empty: usize,
    pub n_contrastive: usize,
    pub tone_freq_hz: f64,
    pub seed: u64,
}

impl Default for DatasetSpec {
    /// Baseline training recipe at 2 MHz, 1000 bins, 200-sample pulses.
    fn default() -> Self {
        DatasetSpec {
            m: 1000,
            sample_rate_hz: 2e6,
            pulse_duration_s: 1e-4,
            bandwidths_hz: vec![1e6],
            reflection_coeffs: vec![0.5, 1.0],
            noise_stds: vec![0.04, 0.06],
            target_counts: 1..=119,
            count_step: 1,
            strides: 5..=50,
            stride_step: 1,
            offset_step: 1,
            jitter_max: 0,
            n_empty: 0,
            n_contrastive: 0,
            tone_freq_hz: 5e5,
            seed: 0,
        }
    }
}

impl DatasetSpec {
    pub fn pulse_len(&self) -> usize {
        (self.pulse_duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.pulse_len();
        if n == 0 || n > self.m {
            return Err(invalid(format!("pulse length {n} does not fit in {} bins", self.m)));
        }
        if self.bandwidths_hz.is_empty() || self.reflection_coeffs.is_empty() || self.noise_stds.is_empty() {
            return Err(invalid("bandwidth, reflection and noise grids must be non-empty"));
        }
        for &b in &self.bandwidths_hz {
            make_lfm_chirp(b, self.pulse_duration_s, self.sample_rate_hz)?;
        }
        if self.reflection_coeffs.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(invalid("reflection coefficients must be finite and >= 0"));
        }
        if self.noise_stds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(invalid("noise stds must be finite and >= 0"));
        }
        if self.target_counts.is_empty() || *self.target_counts.start() == 0 {
            return Err(invalid("target counts must be a non-empty range starting at 1 or more"));
        }
        if self.strides.is_empty() || *self.strides.start() == 0 {
            return Err(invalid("min stride must be at least 1"));
        }
        if self.count_step == 0 || self.stride_step == 0 || self.offset_step == 0 {
            return Err(invalid("count, stride and offset steps must be at least 1"));
        }
        if self.target_counts.end() * self.strides.start() + n > self.m {
            return Err(invalid(format!(
                "{} targets at stride {} do not fit in {} bins",
                self.target_counts.end(),
                self.strides.start(),
                self.m
            )));
        }
        if self.n_contrastive > 0 {
            make_tone_pulse(self.tone_freq_hz, self.pulse_duration_s, self.sample_rate_hz)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    Targets {
        cell: u32,
        count: u32,
        stride: u32,
        offset: u32,
    },
    Empty {
        cell: u32,
    },
    Contrastive {
        cell: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KindCounts {
    pub targets: usize,
    pub empty: usize,
    pub contrastive: usize,
}

impl KindCounts {
    pub fn total(&self) -> usize {
        self.targets + self.empty + self.contrastive
    }
}

/// Enumerated generation grid. Profile `i` is a pure function of the spec
/// and `i`, drawing randomness from stream `i` of the spec seed.
#[derive(Debug, Clone)]
pub struct DatasetPlan {
    spec: DatasetSpec,
    chirps: Vec<Waveform>,
    tone: Option<Waveform>,
    entries: Vec<Entry>,
}

impl DatasetPlan {
    pub fn new(spec: &DatasetSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.pulse_len();
        let chirps = spec
            .bandwidths_hz
            .iter()
            .map(|&b| make_lfm_chirp(b, spec.pulse_duration_s, spec.sample_rate_hz))
            .collect::<Result<Vec<_>>>()?;
        let tone = if spec.n_contrastive > 0 {
            Some(make_tone_pulse(spec.tone_freq_hz, spec.pulse_duration_s, spec.sample_rate_hz)?)
        } else {
            None
        };
        let cells = spec.bandwidths_hz.len() * spec.reflection_coeffs.len() * spec.noise_stds.len();
        let span = spec.m - n;
        let mut entries = Vec::new();
        for cell in 0..cells {
            for count in spec.target_counts.clone().step_by(spec.count_step) {
                for stride in spec.strides.clone().step_by(spec.stride_step) {
                    let extent = (count - 1) * stride;
                    if extent > span {
                        continue;
                    }
                    for offset in (0..=span - extent).step_by(spec.offset_step) {
                        entries.push(Entry::Targets {
                            cell: cell as u32,
                            count: count as u32,
                            stride: stride as u32,
                            offset: offset as u32,
                        });
                    }
                }
            }
        }
        entries.extend((0..spec.n_empty).map(|i| Entry::Empty {
            cell: (i % cells) as u32,
        }));
        entries.extend((0..spec.n_contrastive).map(|i| Entry::Contrastive {
            cell: (i % cells) as u32,
        }));
        Ok(DatasetPlan {
            spec: spec.clone(),
            chirps,
            tone,
            entries,
        })
    }

    pub fn spec(&self) -> &DatasetSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pulse_len(&self) -> usize {
        self.spec.pulse_len()
    }

    pub fn counts(&self) -> KindCounts {
        let mut c = KindCounts::default();
        for e in &self.entries {
            match e {
                Entry::Targets { .. } => c.targets += 1,
                Entry::Empty { .. } => c.empty += 1,
                Entry::Contrastive { .. } => c.contrastive += 1,
            }
        }
        c
    }

    /// (bandwidth index, reflection, noise) for a grid cell.
    fn cell(&self, cell: u32) -> (usize, f64, f64) {
        let s = &self.spec;
        let cell = cell as usize;
        let nb = s.bandwidths_hz.len();
        let nr = s.reflection_coeffs.len();
        let b = cell % nb;
        let r = (cell / nb) % nr;
        let z = cell / (nb * nr);
        (b, s.reflection_coeffs[r], s.noise_stds[z])
    }

    pub fn profile(&self, index: usize) -> RangeProfile {
        let s = &self.spec;
        let n = s.pulse_len();
        let mut rng = stream_rng(s.seed, index as u64);
        let built = match self.entries[index] {
            Entry::Targets {
                cell,
                count,
                stride,
                offset,
            } => {
                let (b, refl, noise) = self.cell(cell);
                let regular = place_targets_regular(count as usize, stride as usize, offset as usize, s.m, n)
                    .expect("plan only holds legal placements");
                let positions = jitter_positions(&regular, s.jitter_max, s.m, n, &mut rng);
                synthesize_profile(&self.chirps[b], &positions, refl, noise, s.m, &mut rng)
            }
            Entry::Empty { cell } => {
                let (b, refl, noise) = self.cell(cell);
                let meta = ProfileMeta {
                    bandwidth_hz: s.bandwidths_hz[b],
                    reflection_coeff: refl,
                    noise_std: noise,
                    kind: ProfileKind::Empty,
                };
                synthesize_empty(s.m, noise, meta, &mut rng)
            }
            Entry::Contrastive { cell } => {
                let (b, refl, noise) = self.cell(cell);
                let positions = self.random_layout(&mut rng);
                let tone = self.tone.as_ref().expect("tone built when contrastive profiles requested");
                synthesize_contrastive(tone, &positions, refl, noise, s.m, s.bandwidths_hz[b], &mut rng)
            }
        };
        built.expect("plan parameters validated")
    }

    /// Random regular layout drawn from the count/stride ranges, jittered
    /// like target layouts.
    fn random_layout<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let s = &self.spec;
        let n = s.pulse_len();
        let span = s.m - n;
        let stride = rng.random_range(s.strides.clone());
        let max_fit = span / stride + 1;
        let hi = (*s.target_counts.end()).min(max_fit);
        let lo = (*s.target_counts.start()).min(hi);
        let count = rng.random_range(lo..=hi);
        let offset = rng.random_range(0..=span - (count - 1) * stride);
        let regular = place_targets_regular(count, stride, offset, s.m, n).expect("layout fits by construction");
        jitter_positions(&regular, s.jitter_max, s.m, n, rng)
    }

    pub fn iter(&self) -> impl Iterator<Item = RangeProfile> + '_ {
        (0..self.len()).map(move |i| self.profile(i))
    }

    /// Generates profiles `range` in parallel, preserving order.
    pub fn generate_range(&self, range: std::ops::Range<usize>) -> Vec<RangeProfile> {
        range.into_par_iter().map(|i| self.profile(i)).collect()
    }
}

/// An in-memory set of equally sized profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Range bins per profile.
    pub m: usize,
    /// Transmitted pulse length in samples.
    pub n: usize,
    pub profiles: Vec<RangeProfile>,
}

impl Dataset {
    pub fn new(m: usize, n: usize) -> Self {
        Dataset {
            m,
            n,
            profiles: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn push(&mut self, p: RangeProfile) -> Result<()> {
        crate::error::check_len("profile length", self.m, p.len())?;
        self.profiles.push(p);
        Ok(())
    }

    pub fn counts(&self) -> KindCounts {
        let mut c = KindCounts::default();
        for p in &self.profiles {
            match p.meta.kind {
                ProfileKind::Targets => c.targets += 1,
                ProfileKind::Empty => c.empty += 1,
                ProfileKind::Contrastive => c.contrastive += 1,
            }
        }
        c
    }
}

pub fn generate_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let plan = DatasetPlan::new(spec)?;
    Ok(Dataset {
        m: spec.m,
        n: plan.pulse_len(),
        profiles: plan.generate_range(0..plan.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::pulse_energy;
    use proptest::prelude::*;

    fn chirp() -> Waveform {
        make_lfm_chirp(1e6, 1e-4, 2e6).unwrap()
    }

    #[test]
    fn regular_placement() {
        assert_eq!(place_targets_regular(3, 50, 0, 1000, 200).unwrap(), vec![0, 50, 100]);
        assert_eq!(place_targets_regular(1, 5, 790, 1000, 200).unwrap(), vec![790]);
        let dense = place_targets_regular(119, 5, 0, 1000, 200).unwrap();
        assert_eq!(dense.len(), 119);
        assert_eq!(*dense.last().unwrap(), 590);
        assert!(place_targets_regular(1, 5, 801, 1000, 200).is_err());
        assert!(place_targets_regular(2, 700, 0, 1000, 200).is_ok());
        assert!(place_targets_regular(2, 701, 100, 1000, 200).is_err());
    }

    #[test]
    fn zero_jitter_is_identity() {
        let mut rng = stream_rng(1, 0);
        let p = vec![3, 50, 700];
        assert_eq!(jitter_positions(&p, 0, 1000, 200, &mut rng), p);
    }

    #[test]
    fn jitter_stays_near_inputs() {
        let input = [0usize, 50, 100];
        for seed in 0..500 {
            let mut rng = stream_rng(seed, 0);
            let out = jitter_positions(&input, 2, 1000, 200, &mut rng);
            assert!(out.windows(2).all(|w| w[0] < w[1]));
            for o in &out {
                assert!(input.iter().any(|&i| (*o as i64 - i as i64).abs() <= 2));
            }
        }
    }

    #[test]
    fn jitter_clamps_at_profile_end() {
        for seed in 0..200 {
            let mut rng = stream_rng(seed, 0);
            let out = jitter_positions(&[790], 10, 1000, 200, &mut rng);
            assert!(out[0] <= 800);
            assert!(out[0] + 200 <= 1000);
        }
    }

    #[test]
    fn empty_noiseless_profile_is_zero() {
        let mut rng = stream_rng(0, 0);
        let p = synthesize_profile(&chirp(), &[], 1.0, 0.0, 1000, &mut rng).unwrap();
        assert!(p.samples.iter().all(|s| s.re == 0.0 && s.im == 0.0));
        assert!(p.labels.iter().all(|l| !l));
    }

    #[test]
    fn single_clean_echo() {
        let w = chirp();
        let mut rng = stream_rng(0, 0);
        let p = synthesize_profile(&w, &[300], 1.0, 0.0, 1000, &mut rng).unwrap();
        for (i, s) in p.samples.iter().enumerate() {
            if (300..500).contains(&i) {
                let e = w.samples[i - 300];
                assert_eq!(s.re, e.re as f32);
                assert_eq!(s.im, e.im as f32);
            } else {
                assert_eq!(*s, Complex32::new(0.0, 0.0));
            }
        }
        assert_eq!(p.target_bins, vec![300]);
        assert!(p.is_consistent(200));
    }

    #[test]
    fn overlapping_echoes_add_coherently() {
        let w = chirp();
        let x = superpose_echoes(&w.samples, &[300, 310], 1.0, 1000);
        // direct summation oracle
        for i in 310..500 {
            let expected = w.samples[i - 300] + w.samples[i - 310];
            assert_eq!(x[i], expected);
        }
        for i in 300..310 {
            assert_eq!(x[i], w.samples[i - 300]);
        }
        for i in 500..510 {
            assert_eq!(x[i], w.samples[i - 310]);
        }
    }

    #[test]
    fn synthesis_rejects_bad_inputs() {
        let w = chirp();
        let mut rng = stream_rng(0, 0);
        assert!(synthesize_profile(&w, &[801], 1.0, 0.0, 1000, &mut rng).is_err());
        assert!(synthesize_profile(&w, &[0], -1.0, 0.0, 1000, &mut rng).is_err());
        assert!(synthesize_profile(&w, &[0], 1.0, -0.1, 1000, &mut rng).is_err());
    }

    #[test]
    fn energy_scales_with_reflection_squared() {
        let w = chirp();
        let mut rng = stream_rng(0, 0);
        for refl in [0.1, 0.5, 0.8, 1.0] {
            let p = synthesize_profile(&w, &[123], refl, 0.0, 1000, &mut rng).unwrap();
            let e: f64 = p.samples_f64().iter().map(|s| s.norm_sqr()).sum();
            let expected = refl * refl * pulse_energy(&w);
            assert!((e - expected).abs() / expected < 1e-6, "refl {refl}: {e} vs {expected}");
        }
    }

    #[test]
    fn noise_variance_per_component() {
        let sigma = 0.2;
        let mut re = Vec::new();
        let mut im = Vec::new();
        for i in 0..120 {
            let mut rng = stream_rng(99, i);
            let meta = ProfileMeta {
                bandwidth_hz: 1e6,
                reflection_coeff: 0.0,
                noise_std: sigma,
                kind: ProfileKind::Empty,
            };
            let p = synthesize_empty(1000, sigma, meta, &mut rng).unwrap();
            re.extend(p.samples.iter().map(|s| f64::from(s.re)));
            im.extend(p.samples.iter().map(|s| f64::from(s.im)));
        }
        for v in [re, im] {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
            assert!((var / (sigma * sigma) - 1.0).abs() < 0.05, "variance {var}");
        }
    }

    fn tiny_spec() -> DatasetSpec {
        DatasetSpec {
            m: 1000,
            bandwidths_hz: vec![1e6],
            reflection_coeffs: vec![1.0],
            noise_stds: vec![0.05],
            target_counts: 1..=1,
            strides: 5..=5,
            offset_step: 1000,
            n_empty: 2,
            n_contrastive: 3,
            seed: 11,
            ..DatasetSpec::default()
        }
    }

    #[test]
    fn degenerate_grid_counts() {
        let plan = DatasetPlan::new(&tiny_spec()).unwrap();
        assert_eq!(
            plan.counts(),
            KindCounts {
                targets: 1,
                empty: 2,
                contrastive: 3
            }
        );
        let d = generate_dataset(&tiny_spec()).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(d.counts(), plan.counts());
        for p in &d.profiles {
            assert!(p.is_consistent(200));
        }
        assert_eq!(d.profiles[0].target_bins, vec![0]);
    }

    #[test]
    fn grid_enumeration_matches_brute_force() {
        let spec = DatasetSpec {
            m: 300,
            pulse_duration_s: 5e-5,
            target_counts: 1..=4,
            strides: 5..=60,
            stride_step: 5,
            offset_step: 7,
            bandwidths_hz: vec![1e6, 0.96e6],
            ..DatasetSpec::default()
        };
        let plan = DatasetPlan::new(&spec).unwrap();
        let span = 300 - 100;
        let mut per_cell = 0;
        for c in 1..=4usize {
            for s in (5..=60usize).step_by(5) {
                for off in (0..=span).step_by(7) {
                    if off + (c - 1) * s <= span {
                        per_cell += 1;
                    }
                }
            }
        }
        assert_eq!(plan.counts().targets, per_cell * 2 * 2 * 2);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = DatasetSpec {
            jitter_max: 2,
            target_counts: 1..=3,
            strides: 5..=50,
            stride_step: 15,
            offset_step: 97,
            n_empty: 4,
            n_contrastive: 4,
            ..DatasetSpec::default()
        };
        let a = generate_dataset(&spec).unwrap();
        let b = generate_dataset(&spec).unwrap();
        assert_eq!(a, b);
        let other = generate_dataset(&DatasetSpec { seed: 1, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn spec_validation() {
        assert!(DatasetSpec::default().validate().is_ok());
        let bad = [
            DatasetSpec { strides: 0..=5, ..DatasetSpec::default() },
            DatasetSpec { target_counts: 1..=200, ..DatasetSpec::default() },
            DatasetSpec { bandwidths_hz: vec![], ..DatasetSpec::default() },
            DatasetSpec { bandwidths_hz: vec![1.5e6], ..DatasetSpec::default() },
            DatasetSpec { offset_step: 0, ..DatasetSpec::default() },
            DatasetSpec { m: 150, ..DatasetSpec::default() },
        ];
        for s in bad {
            assert!(s.validate().is_err(), "{s:?}");
        }
    }

    proptest! {
        #[test]
        fn labels_match_targets_and_echo_support(
            count in 1usize..20,
            stride in 5usize..40,
            offset in 0usize..100,
            jitter in 0usize..4,
            refl in 0.05f64..1.5,
            seed in any::<u64>(),
        ) {
            let w = chirp();
            let m = 1000;
            prop_assume!(offset + (count - 1) * stride + 200 <= m);
            let regular = place_targets_regular(count, stride, offset, m, 200).unwrap();
            let mut rng = stream_rng(seed, 0);
            let pos = jitter_positions(&regular, jitter, m, 200, &mut rng);
            let p = synthesize_profile(&w, &pos, refl, 0.0, m, &mut rng).unwrap();
            prop_assert!(p.is_consistent(200));
            for (i, s) in p.samples.iter().enumerate() {
                let covered = p.target_bins.iter().any(|&b| (b..b + 200).contains(&i));
                if !covered {
                    prop_assert!(s.re == 0.0 && s.im == 0.0);
                }
            }
        }
    }
}
