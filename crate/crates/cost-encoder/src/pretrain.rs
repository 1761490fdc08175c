use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EncoderError, Result};
use crate::mlp::{MlpDecoder, MlpEncoder};
use crate::objectives::{reconstruction_gradient, reconstruction_loss};

/// Share of the data held out for the loss curve.
pub const HELD_OUT_FRACTION: f64 = 0.1;

fn default_epochs() -> usize {
    200
}

fn default_pretrain_lr() -> f64 {
    0.05
}

fn default_minibatch() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_pretrain_lr")]
    pub lr: f64,
    #[serde(default = "default_minibatch")]
    pub minibatch: usize,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self { epochs: default_epochs(), lr: default_pretrain_lr(), minibatch: default_minibatch() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainReport {
    pub encoder: MlpEncoder,
    pub decoder: MlpDecoder,
    /// Held-out loss before the first epoch.
    pub initial_loss: f64,
    /// Held-out loss after each epoch.
    pub losses: Vec<f64>,
}

/// Minibatch gradient descent on mean-squared reconstruction error.
///
/// The data are shuffled once and split; the last [`HELD_OUT_FRACTION`]
/// (at least one point) is held out. A single data point serves as both.
pub fn pretrain_autoencoder<R: Rng + ?Sized>(
    enc: &MlpEncoder,
    dec: &MlpDecoder,
    data: &[Vec<f64>],
    cfg: &PretrainConfig,
    rng: &mut R,
) -> Result<PretrainReport> {
    dec.check_pair(enc)?;
    if data.is_empty() {
        return Err(EncoderError::EmptyBatch("pre-training"));
    }
    if !(cfg.lr > 0.0) {
        return Err(EncoderError::Config("pretrain lr"));
    }
    if cfg.minibatch == 0 {
        return Err(EncoderError::Config("pretrain minibatch"));
    }
    let mut shuffled = data.to_vec();
    shuffled.shuffle(rng);
    let (train, held) = if shuffled.len() == 1 {
        (shuffled.clone(), shuffled)
    } else {
        let n_held = ((shuffled.len() as f64 * HELD_OUT_FRACTION).round() as usize).max(1);
        let train = shuffled[..shuffled.len() - n_held].to_vec();
        (train, shuffled[shuffled.len() - n_held..].to_vec())
    };

    let (mut enc, mut dec) = (enc.clone(), dec.clone());
    let initial_loss = reconstruction_loss(&enc, &dec, &held)?;
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(cfg.minibatch) {
            let batch: Vec<Vec<f64>> = chunk.iter().map(|&i| train[i].clone()).collect();
            let (ge, gd) = reconstruction_gradient(&enc, &dec, &batch)?;
            if !ge.is_finite() || !gd.is_finite() {
                return Err(EncoderError::Diverged { epoch });
            }
            enc.apply_gradient(&ge, cfg.lr);
            dec.apply_gradient(&gd, cfg.lr);
        }
        let loss = reconstruction_loss(&enc, &dec, &held)?;
        if !loss.is_finite() {
            return Err(EncoderError::Diverged { epoch });
        }
        losses.push(loss);
    }
    Ok(PretrainReport { encoder: enc, decoder: dec, initial_loss, losses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cmdp_core::seeded_rng;

    #[test]
    fn zero_epochs_leave_parameters() {
        let mut rng = seeded_rng(0, 0);
        let enc = MlpEncoder::init(&[4, 3, 2], &mut rng).unwrap();
        let dec = MlpDecoder::mirror(&enc, &mut rng).unwrap();
        let cfg = PretrainConfig { epochs: 0, ..PretrainConfig::default() };
        let rep = pretrain_autoencoder(&enc, &dec, &[vec![1.0, 0.0, 0.0, 1.0]], &cfg, &mut rng).unwrap();
        assert_eq!(rep.encoder, enc);
        assert_eq!(rep.decoder, dec);
        assert!(rep.losses.is_empty());
    }

    #[test]
    fn overfits_one_point() {
        let mut rng = seeded_rng(1, 0);
        let enc = MlpEncoder::init(&[4, 6, 2], &mut rng).unwrap();
        let dec = MlpDecoder::mirror(&enc, &mut rng).unwrap();
        let data = vec![vec![0.0, 1.0, 1.0, 0.0]; 20];
        let cfg = PretrainConfig { epochs: 100, ..PretrainConfig::default() };
        let rep = pretrain_autoencoder(&enc, &dec, &data, &cfg, &mut rng).unwrap();
        assert!(rep.losses.last().unwrap() < &(rep.initial_loss / 10.0));
    }

    #[test]
    fn divergence_aborts() {
        let mut rng = seeded_rng(2, 0);
        let enc = MlpEncoder::init(&[4, 6, 2], &mut rng).unwrap();
        let dec = MlpDecoder::mirror(&enc, &mut rng).unwrap();
        let data = vec![vec![1e200, 1.0, 1.0, 0.0]; 4];
        let cfg = PretrainConfig { epochs: 5, lr: 1e10, minibatch: 4 };
        assert!(matches!(pretrain_autoencoder(&enc, &dec, &data, &cfg, &mut rng), Err(EncoderError::Diverged { .. })));
    }
}
