use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::adam::{adam_step, AdamState};
use super::network::{accumulate_gradients, forward, weighted_mse, Gradients, NetworkParams};
use crate::datagen::RangeProfile;
use crate::error::{check_len, invalid, Error, Result};
use crate::metrics::{score_profile, DetectionCounts, Rates};
use crate::seed::{stream_rng, subseed, INIT, SHUFFLE};

/// Profiles per gradient partial sum. Fixed so that the reduction order, and
/// hence the result, does not depend on the number of worker threads.
const GRAD_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    /// Epochs between learning-rate halvings.
    pub lr_halving_period: usize,
    /// Loss weight of target bins relative to empty bins.
    pub positive_weight: f64,
    /// Detection threshold on the sigmoid output.
    pub threshold: f64,
    pub hidden_width: usize,
    pub seed: u64,
    /// Exclusion window used for validation Pd/Pfa.
    pub exclusion_window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 512,
            lr0: 1e-3,
            lr_halving_period: 20,
            positive_weight: 10.0,
            threshold: 0.5,
            hidden_width: 256,
            seed: 0,
            exclusion_window: 199,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.lr_halving_period == 0 || self.hidden_width == 0 {
            return Err(invalid("epochs, batch size, halving period and hidden width must be positive"));
        }
        if !(self.lr0 >= 0.0 && self.lr0.is_finite()) {
            return Err(invalid(format!("learning rate must be >= 0, got {}", self.lr0)));
        }
        if !(self.positive_weight > 0.0 && self.positive_weight.is_finite()) {
            return Err(invalid("positive weight must be positive"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(invalid(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        Ok(())
    }

    /// `lr0 · 0.5^⌊epoch / period⌋`, epochs counted from 0.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr0 * 0.5f64.powi((epoch / self.lr_halving_period) as i32)
    }
}

/// Parameters a training run with this config starts from.
pub fn initial_params(m: usize, cfg: &TrainConfig) -> NetworkParams {
    let mut rng = stream_rng(subseed(cfg.seed, INIT), 0);
    NetworkParams::init(m, cfg.hidden_width, &mut rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
    pub valid: Rates,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    /// Final-epoch weights.
    pub params: NetworkParams,
    pub history: Vec<EpochRecord>,
    /// Epoch with the lowest validation loss, if a validation set was given.
    pub best_epoch: Option<usize>,
    pub best_params: Option<NetworkParams>,
}

/// Mean loss and mean gradient over `batch`.
pub fn batch_gradient(p: &NetworkParams, batch: &[&RangeProfile], positive_weight: f64) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scale = 1.0 / batch.len() as f64;
    let partials = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut g = NetworkParams::zeros(p.m, p.hidden);
            let mut loss = 0.0;
            for prof in chunk {
                let act = forward(p, &prof.samples_f64())?;
                loss += accumulate_gradients(p, &act, &prof.labels, positive_weight, scale, &mut g)?;
            }
            Ok((loss, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut iter = partials.into_iter();
    let (mut loss, mut grad) = iter.next().expect("non-empty batch");
    for (l, g) in iter {
        loss += l;
        grad.add_assign(&g);
    }
    Ok((loss * scale, grad))
}

/// Mean loss and detection counts of `p` over `profiles`.
pub fn evaluate_network(
    p: &NetworkParams,
    profiles: &[RangeProfile],
    cfg: &TrainConfig,
) -> Result<(f64, DetectionCounts)> {
    let per = profiles
        .par_iter()
        .map(|prof| {
            let y = forward(p, &prof.samples_f64())?.y;
            let loss = weighted_mse(&y, &prof.labels, cfg.positive_weight);
            let det: Vec<bool> = y.iter().map(|&v| v > cfg.threshold).collect();
            let counts = score_profile(&det, None, &prof.target_bins, cfg.exclusion_window)?;
            Ok((loss, counts))
        })
        .collect::<Result<Vec<_>>>()?;
    let loss = per.iter().map(|(l, _)| l).sum::<f64>() / per.len().max(1) as f64;
    let counts = per.iter().map(|(_, c)| *c).sum();
    Ok((loss, counts))
}

/// Fraction of bins whose thresholded output equals the label.
pub fn per_bin_accuracy(p: &NetworkParams, profiles: &[RangeProfile], threshold: f64) -> Result<f64> {
    let correct = profiles
        .par_iter()
        .map(|prof| {
            let y = forward(p, &prof.samples_f64())?.y;
            Ok(y.iter().zip(&prof.labels).filter(|(&v, &l)| (v > threshold) == l).count())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let total: usize = profiles.iter().map(RangeProfile::len).sum();
    Ok(correct as f64 / total.max(1) as f64)
}

fn check_profiles(profiles: &[RangeProfile], m: usize) -> Result<()> {
    for p in profiles {
        check_len("profile length", m, p.len())?;
        check_len("label length", m, p.labels.len())?;
    }
    Ok(())
}

pub fn train(train_set: &[RangeProfile], valid_set: &[RangeProfile], cfg: &TrainConfig) -> Result<TrainResult> {
    let first = train_set.first().ok_or(Error::EmptyDataset)?;
    train_from(initial_params(first.len(), cfg), train_set, valid_set, cfg)
}

/// Runs the training schedule starting from `params`.
pub fn train_from(
    mut params: NetworkParams,
    train_set: &[RangeProfile],
    valid_set: &[RangeProfile],
    cfg: &TrainConfig,
) -> Result<TrainResult> {
    cfg.validate()?;
    params.check_shapes()?;
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let m = params.m;
    check_profiles(train_set, m)?;
    check_profiles(valid_set, m)?;

    let shuffle_seed = subseed(cfg.seed, SHUFFLE);
    let mut adam = AdamState::new(&params);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(usize, f64, NetworkParams)> = None;

    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate(epoch);
        order.sort_unstable();
        order.shuffle(&mut stream_rng(shuffle_seed, epoch as u64));

        let mut loss_sum = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let batch: Vec<&RangeProfile> = idx.iter().map(|&i| &train_set[i]).collect();
            let (loss, grad) = batch_gradient(&params, &batch, cfg.positive_weight)?;
            loss_sum += loss * batch.len() as f64;
            adam_step(&mut adam, &mut params, &grad, lr)?;
        }
        let train_loss = loss_sum / train_set.len() as f64;

        let (valid_loss, valid) = if valid_set.is_empty() {
            (None, Rates::default())
        } else {
            let (loss, counts) = evaluate_network(&params, valid_set, cfg)?;
            if best.as_ref().is_none_or(|(_, l, _)| loss < *l) {
                best = Some((epoch, loss, params.clone()));
            }
            (Some(loss), Rates::from(counts))
        };
        history.push(EpochRecord {
            epoch,
            lr,
            train_loss,
            valid_loss,
            valid,
        });
    }

    let (best_epoch, best_params) = match best {
        Some((e, _, p)) => (Some(e), Some(p)),
        None => (None, None),
    };
    Ok(TrainResult {
        params,
        history,
        best_epoch,
        best_params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_dataset, DatasetSpec};

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 1,
            batch_size: 4,
            hidden_width: 8,
            seed: 3,
            ..TrainConfig::default()
        }
    }

    fn small_set(seed: u64, m: usize) -> Vec<RangeProfile> {
        generate_dataset(&DatasetSpec {
            m,
            pulse_duration_s: 1e-5,
            target_counts: 1..=3,
            strides: 5..=5,
            offset_step: 37,
            n_empty: 2,
            seed,
            ..DatasetSpec::default()
        })
        .unwrap()
        .profiles
    }

    #[test]
    fn lr_schedule_halves() {
        let cfg = TrainConfig {
            lr0: 1e-3,
            lr_halving_period: 20,
            ..TrainConfig::default()
        };
        assert_eq!(cfg.learning_rate(0), 1e-3);
        assert_eq!(cfg.learning_rate(19), 1e-3);
        assert_eq!(cfg.learning_rate(20), 5e-4);
        assert_eq!(cfg.learning_rate(45), 2.5e-4);
        assert_eq!(cfg.learning_rate(99), 1e-3 / 16.0);
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let set = small_set(1, 64);
        let cfg = TrainConfig { lr0: 0.0, ..small_cfg() };
        let res = train(&set[..1], &[], &cfg).unwrap();
        assert_eq!(res.params, initial_params(64, &cfg));
        assert_eq!(res.history.len(), 1);
        assert!(res.best_epoch.is_none());
    }

    #[test]
    fn training_is_deterministic() {
        let set = small_set(2, 64);
        let valid = small_set(3, 64);
        let cfg = TrainConfig { epochs: 3, ..small_cfg() };
        let a = train(&set, &valid, &cfg).unwrap();
        let b = train(&set, &valid, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.history, b.history);
        assert!(a.best_epoch.is_some());
    }

    #[test]
    fn rejects_bad_inputs() {
        let set = small_set(2, 64);
        assert!(matches!(train(&[], &[], &small_cfg()), Err(Error::EmptyDataset)));
        let other = small_set(2, 80);
        let mixed = vec![set[0].clone(), other[0].clone()];
        assert!(train(&mixed, &[], &small_cfg()).is_err());
        let bad = TrainConfig {
            threshold: 1.0,
            ..small_cfg()
        };
        assert!(train(&set, &[], &bad).is_err());
    }

    #[test]
    fn batch_gradient_is_mean_of_profiles() {
        let set = small_set(4, 64);
        let p = initial_params(64, &small_cfg());
        let batch: Vec<&RangeProfile> = set.iter().take(5).collect();
        let (loss, g) = batch_gradient(&p, &batch, 10.0).unwrap();
        let mut sum = NetworkParams::zeros(64, 8);
        let mut lsum = 0.0;
        for prof in &batch {
            let act = forward(&p, &prof.samples_f64()).unwrap();
            lsum += accumulate_gradients(&p, &act, &prof.labels, 10.0, 1.0, &mut sum).unwrap();
        }
        sum.scale(0.2);
        assert!((loss - lsum / 5.0).abs() < 1e-15);
        for (a, b) in g.w2.iter().zip(&sum.w2) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn small_first_step_does_not_increase_loss() {
        let set = small_set(6, 64);
        let p = initial_params(64, &small_cfg());
        let batch: Vec<&RangeProfile> = set.iter().take(8).collect();
        let (loss, g) = batch_gradient(&p, &batch, 10.0).unwrap();
        let mut q = p.clone();
        let mut adam = AdamState::new(&p);
        adam_step(&mut adam, &mut q, &g, 1e-5).unwrap();
        let (after, _) = batch_gradient(&q, &batch, 10.0).unwrap();
        assert!(after <= loss, "{after} > {loss}");
    }
}
