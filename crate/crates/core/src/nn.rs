//! Fully-connected feedforward network trained by full-batch gradient descent
//! on mean squared error. Hidden layers use `tanh`, the output is linear.

use std::fmt::Write as _;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Per-layer `(weights, bias)`, weights shaped `(out, in)`.
pub type LayerParameters = Vec<(Array2<f64>, Array1<f64>)>;

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    /// `out x in`
    weights: Array2<f64>,
    bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.05,
        }
    }
}

impl MlpNetwork {
    /// Glorot-uniform weights, zero biases.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "layer sizes {layer_sizes:?}: need at least two positive sizes"
            )));
        }
        let mut rng = seeded(seed);
        let layers = layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Layer {
                    weights: Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-s..s)),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    /// Builds a network from explicit `(weights, bias)` pairs, `weights` given
    /// as `out x in` row-major.
    pub fn from_parameters(params: LayerParameters) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidArgument("no layers".into()));
        }
        for (i, (w, b)) in params.iter().enumerate() {
            if w.nrows() != b.len() {
                return Err(Error::DimensionMismatch {
                    expected: w.nrows(),
                    found: b.len(),
                });
            }
            if i > 0 && params[i - 1].0.nrows() != w.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: params[i - 1].0.nrows(),
                    found: w.ncols(),
                });
            }
        }
        Ok(Self {
            layers: params
                .into_iter()
                .map(|(weights, bias)| Layer { weights, bias })
                .collect(),
        })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_size()];
        sizes.extend(self.layers.iter().map(|l| l.weights.nrows()));
        sizes
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().map(|l| l.weights.nrows()).unwrap_or(0)
    }

    pub fn weight_shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| l.weights.dim()).collect()
    }

    pub fn bias_lengths(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.bias.len()).collect()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.input_size(),
                found: input.len(),
            });
        }
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row view");
        Ok(self.forward_batch(x).row(0).to_vec())
    }

    /// Forward pass over a `rows x input` batch.
    pub fn forward_batch(&self, inputs: ArrayView2<f64>) -> Array2<f64> {
        let mut act = inputs.to_owned();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = act.dot(&layer.weights.t());
            z += &layer.bias;
            if i < last {
                z.mapv_inplace(f64::tanh);
            }
            act = z;
        }
        act
    }

    /// Mean squared error over all rows and outputs, with its gradient
    /// flattened in [`flat_parameters`](Self::flat_parameters) order.
    pub fn loss_and_gradient(
        &self,
        inputs: ArrayView2<f64>,
        targets: ArrayView2<f64>,
    ) -> Result<(f64, Vec<f64>)> {
        self.check_batch(inputs, targets)?;
        let (loss, grads) = self.backprop(inputs, targets);
        let mut flat = Vec::with_capacity(self.parameter_count());
        for (gw, gb) in grads {
            flat.extend(gw.iter());
            flat.extend(gb.iter());
        }
        Ok((loss, flat))
    }

    pub fn loss(&self, inputs: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<f64> {
        self.check_batch(inputs, targets)?;
        let out = self.forward_batch(inputs);
        Ok(mse(&out, targets))
    }

    /// Runs exactly `settings.epochs` full-batch steps and returns the loss of
    /// the trained network.
    pub fn train(
        &mut self,
        inputs: ArrayView2<f64>,
        targets: ArrayView2<f64>,
        settings: &TrainSettings,
    ) -> Result<f64> {
        if settings.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if settings.learning_rate.is_nan() || settings.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if inputs.nrows() == 0 {
            return Err(Error::InvalidArgument("no training rows".into()));
        }
        self.check_batch(inputs, targets)?;
        for _ in 0..settings.epochs {
            let (_, grads) = self.backprop(inputs, targets);
            for (layer, (gw, gb)) in self.layers.iter_mut().zip(grads) {
                layer.weights.scaled_add(-settings.learning_rate, &gw);
                layer.bias.scaled_add(-settings.learning_rate, &gb);
            }
        }
        let loss = self.loss(inputs, targets)?;
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("training diverged (loss {loss})")));
        }
        Ok(loss)
    }

    fn check_batch(&self, inputs: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<()> {
        if inputs.ncols() != self.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.input_size(),
                found: inputs.ncols(),
            });
        }
        if targets.ncols() != self.output_size() || targets.nrows() != inputs.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.output_size(),
                found: targets.ncols(),
            });
        }
        Ok(())
    }

    fn backprop(
        &self,
        inputs: ArrayView2<f64>,
        targets: ArrayView2<f64>,
    ) -> (f64, LayerParameters) {
        let last = self.layers.len() - 1;
        // activations[0] is the input, activations[i + 1] the output of layer i
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(inputs.to_owned());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = activations[i].dot(&layer.weights.t());
            z += &layer.bias;
            if i < last {
                z.mapv_inplace(f64::tanh);
            }
            activations.push(z);
        }
        let output = &activations[last + 1];
        let loss = mse(output, targets);
        let scale = 2.0 / (output.len().max(1) as f64);
        let mut delta = (output - &targets) * scale;
        let mut grads = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let gw = delta.t().dot(&activations[i]);
            let gb = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut back = delta.dot(&self.layers[i].weights);
                back.zip_mut_with(&activations[i], |d, &a| *d *= 1.0 - a * a);
                delta = back;
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        (loss, grads)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Layer by layer: weights row-major, then bias.
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn set_flat_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                found: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = it.next().unwrap_or_default());
            l.bias.iter_mut().for_each(|b| *b = it.next().unwrap_or_default());
        }
        Ok(())
    }

    /// Debug dump: the layer sizes on the first line, then one line per layer
    /// with its row-major weights followed by its bias.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let sizes: Vec<String> = self.layer_sizes().iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "{}", sizes.join(" "));
        for l in &self.layers {
            let vals: Vec<String> = l
                .weights
                .iter()
                .chain(l.bias.iter())
                .map(|v| format!("{v:e}"))
                .collect();
            let _ = writeln!(s, "{}", vals.join(" "));
        }
        s
    }
}

fn mse(output: &Array2<f64>, targets: ArrayView2<f64>) -> f64 {
    let n = output.len().max(1) as f64;
    output
        .iter()
        .zip(targets.iter())
        .map(|(y, t)| (y - t).powi(2))
        .sum::<f64>()
        / n
}

/// Stacks row slices into a matrix.
pub fn rows_to_matrix(rows: &[Vec<f64>], width: usize) -> Result<Array2<f64>> {
    let mut data = Vec::with_capacity(rows.len() * width);
    for r in rows {
        if r.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: r.len(),
            });
        }
        data.extend_from_slice(r);
    }
    Ok(Array2::from_shape_vec((rows.len(), width), data).expect("shape checked"))
}
