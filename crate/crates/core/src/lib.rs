//! Dense target swarm detection in simulated radar range profiles.
//!
//! Two detectors are provided over the same simulated data: the classical
//! chain of matched filtering followed by cell-averaging CFAR
//! ([`mf_cfar`]), and a partially complex-valued autoencoder that maps the
//! raw IQ profile straight to per-bin detection scores ([`cvnn`]). Profiles
//! come from [`datagen`], and [`metrics`] turns detections into Pd/Pfa.

pub mod cvnn;
pub mod datagen;
pub mod detector;
pub mod error;
pub mod metrics;
pub mod mf_cfar;
pub mod seed;
pub mod signal;

pub use cvnn::{NetworkParams, TrainConfig};
pub use datagen::{Dataset, DatasetSpec, ProfileKind, ProfileMeta, RangeProfile};
pub use detector::{LabelOracle, MfCfarDetector, NeuralDetector, ProfileDetector};
pub use error::{Error, Result};
pub use metrics::{DetectionCounts, Rates, SubsetFilter};
pub use mf_cfar::{CfarConfig, CompressedProfile};
pub use signal::{ComplexSample, Waveform, WaveformKind};
