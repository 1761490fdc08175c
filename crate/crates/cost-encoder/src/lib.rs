//! Learned cost features: a feedforward encoder with sigmoid outputs, its
//! dual-gradient update, autoencoder pre-training and an encoder-backed
//! outer loop.

pub mod error;
pub mod mlp;
pub mod objectives;
pub mod pretrain;
pub mod runner;

pub use error::{EncoderError, Result};
pub use mlp::{encoder_forward, ForwardCache, Layer, MlpDecoder, MlpEncoder, MlpGradient};
pub use objectives::{
    encode_pair, encoded_feature_map, encoder_dual_gradient, encoder_dual_objective, reconstruction_gradient,
    reconstruction_loss, WeightedBatch,
};
pub use pretrain::{pretrain_autoencoder, PretrainConfig, PretrainReport, HELD_OUT_FRACTION};
pub use runner::{run_mce_icrl_encoder, EncoderConfig, EncoderRun};
