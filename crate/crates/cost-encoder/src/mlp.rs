use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EncoderError, Result};

/// One affine layer; `weights` is row-major `(out, in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], biases: vec![0.0; outputs] }
    }

    fn init<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let mut draw = || rng.gen_range(-bound..=bound);
        let weights = (0..inputs * outputs).map(|_| draw()).collect();
        let biases = (0..outputs).map(|_| draw()).collect();
        Self { inputs, outputs, weights, biases }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.biases[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != self.inputs * self.outputs {
            return Err(EncoderError::Shape { what: "layer weights", got: self.weights.len(), expected: self.inputs * self.outputs });
        }
        if self.biases.len() != self.outputs {
            return Err(EncoderError::Shape { what: "layer biases", got: self.biases.len(), expected: self.outputs });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Output {
    Sigmoid,
    Linear,
}

/// Activations retained by a forward pass. `inputs[l]` feeds layer `l`;
/// `output` is the network output.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub inputs: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

/// Parameter gradient laid out exactly like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpGradient {
    fn zeros(layers: &[Layer]) -> Self {
        Self {
            weights: layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Same order as [`MlpEncoder::params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).flatten().all(|g| g.is_finite())
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(EncoderError::TooFewLayers);
    }
    if sizes.contains(&0) {
        return Err(EncoderError::EmptyLayer);
    }
    Ok(())
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn build_layers(sizes: &[usize], mut make: impl FnMut(usize, usize) -> Layer) -> Vec<Layer> {
    sizes.windows(2).map(|w| make(w[0], w[1])).collect()
}

fn forward(layers: &[Layer], out: Output, x: &[f64]) -> Result<ForwardCache> {
    let first = &layers[0];
    if x.len() != first.inputs {
        return Err(EncoderError::Shape { what: "network input", got: x.len(), expected: first.inputs });
    }
    let mut inputs = Vec::with_capacity(layers.len());
    let mut h = x.to_vec();
    for (i, layer) in layers.iter().enumerate() {
        let z = layer.affine(&h);
        inputs.push(h);
        h = if i + 1 < layers.len() {
            z.into_iter().map(|v| v.max(0.0)).collect()
        } else {
            match out {
                Output::Sigmoid => z.into_iter().map(sigmoid).collect(),
                Output::Linear => z,
            }
        };
    }
    Ok(ForwardCache { inputs, output: h })
}

/// Accumulates `∂(g_out · y)/∂params` into `grad` and returns `∂/∂x`.
fn backward(layers: &[Layer], out: Output, cache: &ForwardCache, grad_out: &[f64], grad: &mut MlpGradient) -> Vec<f64> {
    // gradient with respect to the pre-activation of the current layer
    let mut delta: Vec<f64> = match out {
        Output::Sigmoid => cache.output.iter().zip(grad_out).map(|(y, g)| g * y * (1.0 - y)).collect(),
        Output::Linear => grad_out.to_vec(),
    };
    for l in (0..layers.len()).rev() {
        let layer = &layers[l];
        let x = &cache.inputs[l];
        for o in 0..layer.outputs {
            grad.biases[l][o] += delta[o];
            let row = &mut grad.weights[l][o * layer.inputs..(o + 1) * layer.inputs];
            row.iter_mut().zip(x).for_each(|(g, v)| *g += delta[o] * v);
        }
        let mut dx = vec![0.0; layer.inputs];
        for o in 0..layer.outputs {
            let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
            dx.iter_mut().zip(row).for_each(|(d, w)| *d += delta[o] * w);
        }
        if l > 0 {
            // the layer input is a rectified activation of the previous layer
            dx.iter_mut().zip(x).for_each(|(d, v)| if *v <= 0.0 { *d = 0.0 });
        }
        delta = dx;
    }
    delta
}

fn params(layers: &[Layer]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend_from_slice(&l.weights);
        out.extend_from_slice(&l.biases);
    }
    out
}

fn set_params(layers: &mut [Layer], p: &[f64]) -> Result<()> {
    let total: usize = layers.iter().map(|l| l.weights.len() + l.biases.len()).sum();
    if p.len() != total {
        return Err(EncoderError::Shape { what: "parameter vector", got: p.len(), expected: total });
    }
    let mut i = 0;
    for l in layers {
        let (nw, nb) = (l.weights.len(), l.biases.len());
        l.weights.copy_from_slice(&p[i..i + nw]);
        l.biases.copy_from_slice(&p[i + nw..i + nw + nb]);
        i += nw + nb;
    }
    Ok(())
}

fn apply(layers: &mut [Layer], grad: &MlpGradient, step: f64) {
    for (l, layer) in layers.iter_mut().enumerate() {
        layer.weights.iter_mut().zip(&grad.weights[l]).for_each(|(w, g)| *w -= step * g);
        layer.biases.iter_mut().zip(&grad.biases[l]).for_each(|(b, g)| *b -= step * g);
    }
}

fn sizes_of(layers: &[Layer]) -> Vec<usize> {
    let mut s = vec![layers[0].inputs];
    s.extend(layers.iter().map(|l| l.outputs));
    s
}

fn check_layers(layers: &[Layer]) -> Result<()> {
    if layers.is_empty() {
        return Err(EncoderError::TooFewLayers);
    }
    for l in layers {
        l.check()?;
    }
    for w in layers.windows(2) {
        if w[0].outputs != w[1].inputs {
            return Err(EncoderError::Shape { what: "chained layer input", got: w[1].inputs, expected: w[0].outputs });
        }
    }
    validate_sizes(&sizes_of(layers))
}

macro_rules! network {
    ($name:ident, $out:expr) => {
        impl $name {
            /// Layer widths from input to output.
            pub fn layer_sizes(&self) -> Vec<usize> {
                sizes_of(&self.layers)
            }

            pub fn layers(&self) -> &[Layer] {
                &self.layers
            }

            pub fn input_dim(&self) -> usize {
                self.layers[0].inputs
            }

            pub fn output_dim(&self) -> usize {
                self.layers[self.layers.len() - 1].outputs
            }

            pub fn zeros(sizes: &[usize]) -> Result<Self> {
                validate_sizes(sizes)?;
                Ok(Self { layers: build_layers(sizes, Layer::zeros) })
            }

            /// Uniform initialization in `±1/√fan_in`.
            pub fn init<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
                validate_sizes(sizes)?;
                Ok(Self { layers: build_layers(sizes, |i, o| Layer::init(i, o, rng)) })
            }

            pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
                check_layers(&layers)?;
                Ok(Self { layers })
            }

            pub fn forward(&self, x: &[f64]) -> Result<ForwardCache> {
                forward(&self.layers, $out, x)
            }

            pub fn output(&self, x: &[f64]) -> Result<Vec<f64>> {
                Ok(self.forward(x)?.output)
            }

            /// Adds `∂(grad_out · y)/∂params` for the cached pass to `grad`
            /// and returns the input gradient.
            pub fn backward(&self, cache: &ForwardCache, grad_out: &[f64], grad: &mut MlpGradient) -> Result<Vec<f64>> {
                if grad_out.len() != self.output_dim() {
                    return Err(EncoderError::Shape { what: "output gradient", got: grad_out.len(), expected: self.output_dim() });
                }
                Ok(backward(&self.layers, $out, cache, grad_out, grad))
            }

            pub fn zero_gradient(&self) -> MlpGradient {
                MlpGradient::zeros(&self.layers)
            }

            /// All weights and biases, layer by layer, weights first.
            pub fn params(&self) -> Vec<f64> {
                params(&self.layers)
            }

            pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
                set_params(&mut self.layers, p)
            }

            /// Gradient descent step `θ ← θ - step · grad`.
            pub fn apply_gradient(&mut self, grad: &MlpGradient, step: f64) {
                apply(&mut self.layers, grad, step)
            }

            pub fn to_json(&self) -> Result<String> {
                Ok(serde_json::to_string_pretty(self)?)
            }

            pub fn from_json(text: &str) -> Result<Self> {
                let net: Self = serde_json::from_str(text)?;
                check_layers(&net.layers)?;
                Ok(net)
            }
        }
    };
}

/// Feedforward feature network: rectifier hidden layers, sigmoid output,
/// so every feature lies in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpEncoder {
    layers: Vec<Layer>,
}

/// Maps features back to the input encoding; linear output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpDecoder {
    layers: Vec<Layer>,
}

network!(MlpEncoder, Output::Sigmoid);
network!(MlpDecoder, Output::Linear);

impl MlpDecoder {
    /// Decoder with the encoder's widths reversed.
    pub fn mirror<R: Rng + ?Sized>(enc: &MlpEncoder, rng: &mut R) -> Result<Self> {
        let mut sizes = enc.layer_sizes();
        sizes.reverse();
        Self::init(&sizes, rng)
    }

    pub fn check_pair(&self, enc: &MlpEncoder) -> Result<()> {
        let mut mirrored = enc.layer_sizes();
        mirrored.reverse();
        if self.layer_sizes() != mirrored {
            return Err(EncoderError::Mismatch { encoder: enc.layer_sizes(), decoder: self.layer_sizes() });
        }
        Ok(())
    }
}

/// `(features, cache)` for one encoded state-action pair.
pub fn encoder_forward(enc: &MlpEncoder, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    let cache = enc.forward(x)?;
    Ok((cache.output.clone(), cache))
}
