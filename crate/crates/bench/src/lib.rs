//! Shared fixtures for the benchmarks.

use rpdetect_core::datagen::{generate_dataset, DatasetSpec};
use rpdetect_core::RangeProfile;

/// A handful of dense, noisy target profiles at the default geometry.
pub fn dense_profiles(count: usize) -> Vec<RangeProfile> {
    let spec = DatasetSpec {
        reflection_coeffs: vec![0.8],
        noise_stds: vec![0.1],
        target_counts: 20..=20,
        strides: 17..=17,
        offset_step: 1,
        jitter_max: 2,
        seed: 42,
        ..DatasetSpec::default()
    };
    let mut profiles = generate_dataset(&spec).expect("fixture spec is valid").profiles;
    profiles.truncate(count);
    profiles
}
