use cmdp_core::{state_action_occupancy, FeatureMap, TabularCmdp, TabularPolicy, Trajectory};

use crate::error::{EncoderError, Result};
use crate::mlp::{MlpDecoder, MlpEncoder, MlpGradient};

/// Concatenated one-hot state and one-hot action.
pub fn encode_pair(s: usize, a: usize, num_states: usize, num_actions: usize) -> Vec<f64> {
    let mut x = vec![0.0; num_states + num_actions];
    x[s] = 1.0;
    x[num_states + a] = 1.0;
    x
}

/// Encoded state-action pairs with weights; a weighted sum over the batch is
/// a mean discounted feature expectation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedBatch {
    pub inputs: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl WeightedBatch {
    pub fn push(&mut self, x: Vec<f64>, w: f64) {
        self.inputs.push(x);
        self.weights.push(w);
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Every visited step of every trajectory, weighted `γ^t / N`.
    pub fn from_trajectories(trajs: &[Trajectory], num_states: usize, num_actions: usize, gamma: f64) -> Self {
        let mut batch = Self::default();
        let n = trajs.len() as f64;
        for t in trajs {
            let mut disc = 1.0;
            for &(s, a) in &t.steps {
                batch.push(encode_pair(s, a, num_states, num_actions), disc / n);
                disc *= gamma;
            }
        }
        batch
    }

    /// Every pair weighted by its exact discounted occupancy under `policy`.
    pub fn from_occupancy(policy: &TabularPolicy, cmdp: &TabularCmdp) -> Self {
        let (ns, na) = (cmdp.num_states(), cmdp.num_actions());
        let occ = state_action_occupancy(policy, cmdp);
        let mut batch = Self::default();
        for s in 0..ns {
            for a in 0..na {
                let w = occ[s * na + a];
                if w > 0.0 {
                    batch.push(encode_pair(s, a, ns, na), w);
                }
            }
        }
        batch
    }

    /// `Σ_i w_i φ(x_i)`.
    pub fn expected_features(&self, enc: &MlpEncoder) -> Result<Vec<f64>> {
        let mut out = vec![0.0; enc.output_dim()];
        for (x, &w) in self.inputs.iter().zip(&self.weights) {
            for (o, y) in out.iter_mut().zip(enc.output(x)?) {
                *o += w * y;
            }
        }
        Ok(out)
    }
}

/// The scalar `λ · (Ê_D[φ_ζ] - Ê_π[φ_ζ])` whose parameter gradient drives ζ.
pub fn encoder_dual_objective(enc: &MlpEncoder, lambda: &[f64], demo: &WeightedBatch, nominal: &WeightedBatch) -> Result<f64> {
    check_dual_inputs(enc, lambda, demo, nominal)?;
    let e = demo.expected_features(enc)?;
    let n = nominal.expected_features(enc)?;
    Ok(lambda.iter().zip(e.iter().zip(&n)).map(|(l, (e, n))| l * (e - n)).sum())
}

/// Parameter gradient of [`encoder_dual_objective`].
pub fn encoder_dual_gradient(enc: &MlpEncoder, lambda: &[f64], demo: &WeightedBatch, nominal: &WeightedBatch) -> Result<MlpGradient> {
    check_dual_inputs(enc, lambda, demo, nominal)?;
    let mut grad = enc.zero_gradient();
    let mut seed = vec![0.0; lambda.len()];
    for (batch, sign) in [(demo, 1.0), (nominal, -1.0)] {
        for (x, &w) in batch.inputs.iter().zip(&batch.weights) {
            let cache = enc.forward(x)?;
            seed.iter_mut().zip(lambda).for_each(|(g, l)| *g = sign * w * l);
            enc.backward(&cache, &seed, &mut grad)?;
        }
    }
    Ok(grad)
}

fn check_dual_inputs(enc: &MlpEncoder, lambda: &[f64], demo: &WeightedBatch, nominal: &WeightedBatch) -> Result<()> {
    if demo.is_empty() {
        return Err(EncoderError::EmptyBatch("demo"));
    }
    if nominal.is_empty() {
        return Err(EncoderError::EmptyBatch("nominal"));
    }
    if lambda.len() != enc.output_dim() {
        return Err(EncoderError::Shape { what: "lambda", got: lambda.len(), expected: enc.output_dim() });
    }
    Ok(())
}

/// Mean over the batch of `‖dec(enc(x)) - x‖² / dim(x)`.
pub fn reconstruction_loss(enc: &MlpEncoder, dec: &MlpDecoder, data: &[Vec<f64>]) -> Result<f64> {
    dec.check_pair(enc)?;
    if data.is_empty() {
        return Err(EncoderError::EmptyBatch("reconstruction"));
    }
    let mut total = 0.0;
    for x in data {
        let r = dec.output(&enc.output(x)?)?;
        total += r.iter().zip(x).map(|(r, x)| (r - x).powi(2)).sum::<f64>() / x.len() as f64;
    }
    Ok(total / data.len() as f64)
}

/// Gradients of [`reconstruction_loss`] for the encoder and decoder.
pub fn reconstruction_gradient(enc: &MlpEncoder, dec: &MlpDecoder, data: &[Vec<f64>]) -> Result<(MlpGradient, MlpGradient)> {
    dec.check_pair(enc)?;
    if data.is_empty() {
        return Err(EncoderError::EmptyBatch("reconstruction"));
    }
    let mut ge = enc.zero_gradient();
    let mut gd = dec.zero_gradient();
    let scale = 1.0 / data.len() as f64;
    for x in data {
        let ec = enc.forward(x)?;
        let dc = dec.forward(&ec.output)?;
        let d = x.len() as f64;
        let g_out: Vec<f64> = dc.output.iter().zip(x).map(|(r, x)| 2.0 * (r - x) * scale / d).collect();
        let g_feat = dec.backward(&dc, &g_out, &mut gd)?;
        enc.backward(&ec, &g_feat, &mut ge)?;
    }
    Ok((ge, gd))
}

/// Tabulates the encoder over every state-action pair.
pub fn encoded_feature_map(enc: &MlpEncoder, num_states: usize, num_actions: usize) -> Result<FeatureMap> {
    if enc.input_dim() != num_states + num_actions {
        return Err(EncoderError::Shape { what: "encoder input", got: enc.input_dim(), expected: num_states + num_actions });
    }
    let mut table = Vec::with_capacity(num_states * num_actions * enc.output_dim());
    for s in 0..num_states {
        for a in 0..num_actions {
            table.extend(enc.output(&encode_pair(s, a, num_states, num_actions))?);
        }
    }
    Ok(FeatureMap::encoded(num_states, num_actions, enc.output_dim(), table)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cmdp_core::seeded_rng;

    fn batch(pairs: &[(usize, usize, f64)]) -> WeightedBatch {
        let mut b = WeightedBatch::default();
        for &(s, a, w) in pairs {
            b.push(encode_pair(s, a, 3, 2), w);
        }
        b
    }

    #[test]
    fn encoding_is_two_hot() {
        assert_eq!(encode_pair(1, 0, 3, 2), vec![0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn identical_batches_give_zero_gradient() {
        let mut rng = seeded_rng(0, 0);
        let enc = MlpEncoder::init(&[5, 6, 3], &mut rng).unwrap();
        let b = batch(&[(0, 1, 0.5), (2, 0, 0.25)]);
        let g = encoder_dual_gradient(&enc, &[1.0, 2.0, 0.5], &b, &b).unwrap();
        assert!(g.flatten().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_lambda_gives_zero_gradient() {
        let mut rng = seeded_rng(1, 0);
        let enc = MlpEncoder::init(&[5, 6, 3], &mut rng).unwrap();
        let g = encoder_dual_gradient(&enc, &[0.0; 3], &batch(&[(0, 1, 1.0)]), &batch(&[(1, 1, 1.0)])).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_batches_and_bad_lambda_rejected() {
        let enc = MlpEncoder::zeros(&[5, 2]).unwrap();
        let b = batch(&[(0, 0, 1.0)]);
        assert!(encoder_dual_gradient(&enc, &[1.0, 1.0], &WeightedBatch::default(), &b).is_err());
        assert!(encoder_dual_gradient(&enc, &[1.0, 1.0], &b, &WeightedBatch::default()).is_err());
        assert!(encoder_dual_gradient(&enc, &[1.0], &b, &b).is_err());
    }

    #[test]
    fn feature_map_entries_match_forward() {
        let mut rng = seeded_rng(2, 0);
        let enc = MlpEncoder::init(&[5, 4, 2], &mut rng).unwrap();
        let phi = encoded_feature_map(&enc, 3, 2).unwrap();
        assert_eq!(phi.features(2, 1), enc.output(&encode_pair(2, 1, 3, 2)).unwrap());
    }
}
