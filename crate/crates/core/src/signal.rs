//! Transmitted pulse synthesis.
//!
//! Pulses are sampled from `t = 0` at `k / sample_rate`, without windowing.
//! The LFM chirp sweeps instantaneous frequency from 0 to `bandwidth` over
//! the pulse duration; the tone pulse is an unmodulated complex exponential
//! used for contrastive (non-target) echoes.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// One complex baseband (IQ) sample.
pub type ComplexSample = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveformKind {
    Lfm,
    Tone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<ComplexSample>,
    /// Swept bandwidth for LFM, tone frequency for tone pulses.
    pub bandwidth_hz: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub kind: WaveformKind,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Returns a copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Waveform {
        Waveform {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            ..self.clone()
        }
    }
}

fn sample_count(duration_s: f64, sample_rate_hz: f64) -> Result<usize> {
    let n = (duration_s * sample_rate_hz).round();
    if !n.is_finite() || n < 1.0 {
        return Err(invalid(format!(
            "pulse of {duration_s} s at {sample_rate_hz} Hz has no samples"
        )));
    }
    Ok(n as usize)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Samples `exp(j·π·(B/T)·t²)` at `t_k = k / Fs`, `k = 0..round(T·Fs)`.
pub fn make_lfm_chirp(bandwidth_hz: f64, duration_s: f64, sample_rate_hz: f64) -> Result<Waveform> {
    check_positive("bandwidth", bandwidth_hz)?;
    check_positive("duration", duration_s)?;
    check_positive("sample rate", sample_rate_hz)?;
    if sample_rate_hz < 2.0 * bandwidth_hz {
        return Err(invalid(format!(
            "sample rate {sample_rate_hz} Hz is below Nyquist for bandwidth {bandwidth_hz} Hz"
        )));
    }
    let n = sample_count(duration_s, sample_rate_hz)?;
    let sweep_rate = bandwidth_hz / duration_s;
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / sample_rate_hz;
            Complex64::from_polar(1.0, PI * sweep_rate * t * t)
        })
        .collect();
    Ok(Waveform {
        samples,
        bandwidth_hz,
        duration_s,
        sample_rate_hz,
        kind: WaveformKind::Lfm,
    })
}

/// Samples `exp(j·2π·f·t_k)`; requires `0 < f < Fs / 2`.
pub fn make_tone_pulse(freq_hz: f64, duration_s: f64, sample_rate_hz: f64) -> Result<Waveform> {
    check_positive("tone frequency", freq_hz)?;
    check_positive("duration", duration_s)?;
    check_positive("sample rate", sample_rate_hz)?;
    if freq_hz >= sample_rate_hz / 2.0 {
        return Err(invalid(format!(
            "tone frequency {freq_hz} Hz is not below Nyquist ({} Hz)",
            sample_rate_hz / 2.0
        )));
    }
    let n = sample_count(duration_s, sample_rate_hz)?;
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / sample_rate_hz;
            Complex64::from_polar(1.0, 2.0 * PI * freq_hz * t)
        })
        .collect();
    Ok(Waveform {
        samples,
        bandwidth_hz: freq_hz,
        duration_s,
        sample_rate_hz,
        kind: WaveformKind::Tone,
    })
}

/// `Σ |s_k|²`, the matched-filter normalisation.
pub fn pulse_energy(w: &Waveform) -> f64 {
    w.samples.iter().map(|s| s.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn paper_chirp() -> Waveform {
        make_lfm_chirp(1e6, 1e-4, 2e6).unwrap()
    }

    #[test]
    fn chirp_first_samples() {
        let w = paper_chirp();
        assert_eq!(w.len(), 200);
        assert_eq!(w.samples[0], Complex64::new(1.0, 0.0));
        // π·1e10·(5e-7)² = 0.0025π
        let expected = Complex64::from_polar(1.0, 0.0025 * PI);
        assert_abs_diff_eq!(w.samples[1].re, expected.re, epsilon = 1e-15);
        assert_abs_diff_eq!(w.samples[1].im, expected.im, epsilon = 1e-15);
        assert_abs_diff_eq!(w.samples[1].arg(), 0.007_853_981_633_974_483, epsilon = 1e-15);
    }

    #[test]
    fn chirp_rejects_bad_parameters() {
        assert!(make_lfm_chirp(0.0, 1e-4, 2e6).is_err());
        assert!(make_lfm_chirp(1e6, -1e-4, 2e6).is_err());
        assert!(make_lfm_chirp(1e6, 1e-4, 1.5e6).is_err());
        assert!(make_lfm_chirp(f64::NAN, 1e-4, 2e6).is_err());
        // exactly Nyquist is allowed
        assert!(make_lfm_chirp(1e6, 1e-4, 2e6).is_ok());
    }

    #[test]
    fn chirp_instantaneous_frequency_is_linear() {
        let w = paper_chirp();
        let dt = 1.0 / w.sample_rate_hz;
        let bin = w.sample_rate_hz / w.len() as f64;
        let rate = w.bandwidth_hz / w.duration_s;
        for k in 1..w.len() {
            let dphi = (w.samples[k] * w.samples[k - 1].conj()).arg();
            let f = dphi / (2.0 * PI * dt);
            let t_mid = (k as f64 - 0.5) * dt;
            assert!((f - rate * t_mid).abs() < bin, "k={k} f={f}");
        }
        let last = (w.samples[199] * w.samples[198].conj()).arg() / (2.0 * PI * dt);
        assert!((last - w.bandwidth_hz).abs() < bin);
    }

    #[test]
    fn tone_quarter_turn_per_sample() {
        let w = make_tone_pulse(5e5, 1e-4, 2e6).unwrap();
        assert_eq!(w.kind, WaveformKind::Tone);
        assert_abs_diff_eq!(w.samples[1].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.samples[1].im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn tone_rejects_bad_frequency() {
        assert!(make_tone_pulse(0.0, 1e-4, 2e6).is_err());
        assert!(make_tone_pulse(1e6, 1e-4, 2e6).is_err());
        assert!(make_tone_pulse(-1.0, 1e-4, 2e6).is_err());
    }

    #[test]
    fn unit_magnitude() {
        for w in [paper_chirp(), make_tone_pulse(5e5, 1e-4, 2e6).unwrap()] {
            for s in &w.samples {
                assert!((s.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy() {
        let w = paper_chirp();
        assert_abs_diff_eq!(pulse_energy(&w), 200.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pulse_energy(&w.scaled(0.5)), 50.0, epsilon = 1e-12);
        let single = Waveform {
            samples: vec![Complex64::new(1.0, 0.0)],
            bandwidth_hz: 1.0,
            duration_s: 1.0,
            sample_rate_hz: 1.0,
            kind: WaveformKind::Tone,
        };
        assert_eq!(pulse_energy(&single), 1.0);
    }
}
