use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Transfer function of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// Hyperbolic-tangent sigmoid, output in (−1, 1).
    Tansig,
    /// Identity.
    Purelin,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tansig => z.tanh(),
            Activation::Purelin => z,
        }
    }

    /// Derivative expressed through the activation value.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tansig => 1.0 - a * a,
            Activation::Purelin => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    /// Connect the input and every layer to all later layers.
    pub cascade: bool,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl Topology {
    /// Cascade-forward net with the given hidden sizes, tansig hidden units
    /// and a single linear output.
    pub fn cascade(input_dim: usize, hidden: &[usize]) -> Self {
        Self {
            input_dim,
            hidden: hidden.to_vec(),
            output_dim: 1,
            cascade: true,
            hidden_activation: Activation::Tansig,
            output_activation: Activation::Purelin,
        }
    }

    pub fn feedforward(input_dim: usize, hidden: &[usize]) -> Self {
        Self {
            cascade: false,
            ..Self::cascade(input_dim, hidden)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::Training(format!("layer sizes must be at least 1: {self:?}")));
        }
        Ok(())
    }

    /// Width of activation `k`: 0 is the input, `1..` the layer outputs.
    fn width(&self, k: usize) -> usize {
        if k == 0 {
            self.input_dim
        } else if k <= self.hidden.len() {
            self.hidden[k - 1]
        } else {
            self.output_dim
        }
    }

    fn layer_count(&self) -> usize {
        self.hidden.len() + 1
    }

    /// Parameter layout; weights of a layer are stored row-major
    /// (`out × fan_in`) with the column blocks in `sources` order, followed by
    /// the biases.
    pub fn layout(&self) -> Vec<LayerShape> {
        let mut offset = 0;
        (1..=self.layer_count())
            .map(|l| {
                let sources: Vec<usize> = if self.cascade { (0..l).collect() } else { vec![l - 1] };
                let fan_in = sources.iter().map(|&s| self.width(s)).sum();
                let out = self.width(l);
                let activation = if l == self.layer_count() {
                    self.output_activation
                } else {
                    self.hidden_activation
                };
                let shape = LayerShape {
                    out,
                    fan_in,
                    sources,
                    weight_offset: offset,
                    bias_offset: offset + out * fan_in,
                    activation,
                };
                offset += out * fan_in + out;
                shape
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layout()
            .iter()
            .map(|l| l.out * l.fan_in + l.out)
            .sum()
    }
}

/// Where one layer's parameters live in the flat vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub out: usize,
    pub fan_in: usize,
    /// Activation indices feeding this layer (0 = network input).
    pub sources: Vec<usize>,
    pub weight_offset: usize,
    pub bias_offset: usize,
    pub activation: Activation,
}

/// Layered network whose weights are held in one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeNet {
    topology: Topology,
    layout: Vec<LayerShape>,
    params: Vec<f64>,
}

impl CascadeNet {
    /// All-zero network.
    pub fn zeros(topology: Topology) -> Result<Self> {
        topology.validate()?;
        let layout = topology.layout();
        let n = topology.param_count();
        Ok(Self {
            topology,
            layout,
            params: vec![0.0; n],
        })
    }

    /// Weights uniform in `±1/√fan_in` of the destination layer, zero biases.
    pub fn init_weights(topology: Topology, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(topology)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for shape in &net.layout {
            let bound = 1.0 / (shape.fan_in as f64).sqrt();
            for w in &mut net.params[shape.weight_offset..shape.bias_offset] {
                *w = rng.gen_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    pub fn from_params(topology: Topology, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(topology)?;
        if params.len() != net.params.len() {
            return Err(Error::Dimension {
                expected: net.params.len(),
                actual: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn layout(&self) -> &[LayerShape] {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Column range of the block fed by activation `source` inside layer
    /// `layer`'s weight matrix.
    pub fn block_columns(&self, layer: usize, source: usize) -> Option<(usize, usize)> {
        let shape = &self.layout[layer];
        let mut start = 0;
        for &s in &shape.sources {
            let w = self.topology.width(s);
            if s == source {
                return Some((start, start + w));
            }
            start += w;
        }
        None
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.topology.input_dim {
            return Err(Error::Dimension {
                expected: self.topology.input_dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Activations of the input and every layer for one sample.
    fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layout.len() + 1);
        acts.push(x.to_vec());
        for shape in &self.layout {
            let w = &self.params[shape.weight_offset..shape.bias_offset];
            let b = &self.params[shape.bias_offset..shape.bias_offset + shape.out];
            let mut out = b.to_vec();
            for (i, o) in out.iter_mut().enumerate() {
                let row = &w[i * shape.fan_in..(i + 1) * shape.fan_in];
                let mut col = 0;
                for &s in &shape.sources {
                    for &a in &acts[s] {
                        *o += row[col] * a;
                        col += 1;
                    }
                }
            }
            for o in &mut out {
                *o = shape.activation.apply(*o);
            }
            acts.push(out);
        }
        acts
    }

    /// Network outputs for one sample.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.trace(x).pop().unwrap_or_default())
    }

    /// First output for one sample.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?[0])
    }

    /// Backpropagate `seed` (d loss / d output) for one sample and add the
    /// parameter gradient into `grad`.
    fn backprop_into(&self, acts: &[Vec<f64>], seed: &[f64], grad: &mut [f64]) {
        let n_layers = self.layout.len();
        // d loss / d activation, per activation index.
        let mut upstream: Vec<Vec<f64>> = acts.iter().map(|a| vec![0.0; a.len()]).collect();
        upstream[n_layers].copy_from_slice(seed);
        for l in (0..n_layers).rev() {
            let shape = &self.layout[l];
            let out_act = &acts[l + 1];
            let delta: Vec<f64> = upstream[l + 1]
                .iter()
                .zip(out_act)
                .map(|(g, &a)| g * shape.activation.derivative_from_output(a))
                .collect();
            for (i, d) in delta.iter().enumerate() {
                grad[shape.bias_offset + i] += d;
            }
            let w = &self.params[shape.weight_offset..shape.bias_offset];
            let mut col = 0;
            for &s in &shape.sources {
                let src = &acts[s];
                for (i, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let g_row = &mut grad[shape.weight_offset + i * shape.fan_in + col..];
                    for (j, &a) in src.iter().enumerate() {
                        g_row[j] += d * a;
                    }
                }
                if s > 0 {
                    let up = &mut upstream[s];
                    for (i, &d) in delta.iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        let w_row = &w[i * shape.fan_in + col..i * shape.fan_in + col + src.len()];
                        for (u, &wij) in up.iter_mut().zip(w_row) {
                            *u += wij * d;
                        }
                    }
                }
                col += src.len();
            }
        }
    }

    /// Residuals `output − target` (sample-major, then output) for a batch.
    pub fn residuals(&self, batch: &Batch) -> Result<Vec<f64>> {
        batch.check(&self.topology)?;
        let mut r = Vec::with_capacity(batch.len() * self.topology.output_dim);
        for (x, t) in batch.inputs.iter().zip(&batch.targets) {
            let out = self.trace(x).pop().unwrap_or_default();
            r.extend(out.iter().zip(t).map(|(o, t)| o - t));
        }
        Ok(r)
    }

    /// Mean squared residual over the batch.
    pub fn mse(&self, batch: &Batch) -> Result<f64> {
        let r = self.residuals(batch)?;
        Ok(r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64)
    }

    /// Gradient of `½·Σ residual²` with respect to the parameters.
    pub fn gradient(&self, batch: &Batch) -> Result<Vec<f64>> {
        batch.check(&self.topology)?;
        let mut grad = vec![0.0; self.params.len()];
        for (x, t) in batch.inputs.iter().zip(&batch.targets) {
            let acts = self.trace(x);
            let seed: Vec<f64> = acts[acts.len() - 1]
                .iter()
                .zip(t)
                .map(|(o, t)| o - t)
                .collect();
            self.backprop_into(&acts, &seed, &mut grad);
        }
        Ok(grad)
    }

    /// Residual Jacobian (rows = residuals, row-major) and the residuals.
    pub fn jacobian(&self, batch: &Batch) -> Result<(Jacobian, Vec<f64>)> {
        batch.check(&self.topology)?;
        let p = self.params.len();
        let m = self.topology.output_dim;
        let mut data = vec![0.0; batch.len() * m * p];
        let mut r = Vec::with_capacity(batch.len() * m);
        let mut seed = vec![0.0; m];
        for (s, (x, t)) in batch.inputs.iter().zip(&batch.targets).enumerate() {
            let acts = self.trace(x);
            r.extend(acts[acts.len() - 1].iter().zip(t).map(|(o, t)| o - t));
            for o in 0..m {
                seed.iter_mut().for_each(|v| *v = 0.0);
                seed[o] = 1.0;
                let row = s * m + o;
                self.backprop_into(&acts, &seed, &mut data[row * p..(row + 1) * p]);
            }
        }
        Ok((
            Jacobian {
                rows: batch.len() * m,
                cols: p,
                data,
            },
            r,
        ))
    }
}

/// Dense row-major residual Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Jacobian {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `Jᵀ·v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &j) in out.iter_mut().zip(self.row(i)) {
                *o += j * vi;
            }
        }
        out
    }
}

/// Training or evaluation samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Batch {
    pub inputs: Vec<Vec<f64>>,
    /// One target vector per sample, `output_dim` long.
    pub targets: Vec<Vec<f64>>,
}

impl Batch {
    /// Single-output batch.
    pub fn scalar(inputs: Vec<Vec<f64>>, targets: &[f64]) -> Self {
        Self {
            inputs,
            targets: targets.iter().map(|&t| vec![t]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn check(&self, topology: &Topology) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::Training("empty batch".into()));
        }
        if self.inputs.len() != self.targets.len() {
            return Err(Error::Dimension {
                expected: self.inputs.len(),
                actual: self.targets.len(),
            });
        }
        for x in &self.inputs {
            if x.len() != topology.input_dim {
                return Err(Error::Dimension {
                    expected: topology.input_dim,
                    actual: x.len(),
                });
            }
        }
        for t in &self.targets {
            if t.len() != topology.output_dim {
                return Err(Error::Dimension {
                    expected: topology.output_dim,
                    actual: t.len(),
                });
            }
        }
        Ok(())
    }
}
