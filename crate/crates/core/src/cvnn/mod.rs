//! Partially complex-valued autoencoder detector: complex linear layer and
//! modReLU, real projection, real linear layer and sigmoid, trained with a
//! class-weighted MSE and Adam.

mod adam;
mod checkpoint;
mod network;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint};
pub use network::{
    accumulate_gradients, backward, detect, forward, modrelu, sigmoid, weighted_mse, Activations, Gradients,
    NetworkParams,
};
pub use train::{
    batch_gradient, evaluate_network, initial_params, per_bin_accuracy, train, train_from, EpochRecord, TrainConfig,
    TrainResult,
};

pub mod format {
    pub use super::checkpoint::{FORMAT_VERSION, MAGIC};
}
