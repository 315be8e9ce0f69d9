//! The built-in inference engine: a 784-128-128-C perceptron with ReLU
//! hidden layers and a softmax output, trained by mini-batch SGD with
//! momentum on cross-entropy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, Image, PIXELS};

use super::{InferenceEngine, Prediction};

pub const HIDDEN: usize = 128;

const BLOB_MAGIC: &[u8; 4] = b"XMLP";
const BLOB_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            epochs: 20,
            batch_size: 64,
            learning_rate: 0.01,
            momentum: 0.9,
            seed: 0,
        }
    }
}

/// Dense layer, weights row-major `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    /// Glorot-uniform weights, zero biases.
    fn glorot(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let mut layer = Layer::zeros(inputs, outputs);
        for w in &mut layer.weights {
            *w = rng.gen_range(-limit..limit);
        }
        layer
    }

    fn forward(&self, input: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out
            .iter_mut()
            .zip(self.weights.chunks_exact(self.inputs).zip(&self.biases))
        {
            *o = b + dot(row, input);
        }
    }

    /// Forward pass over a sparse input given as `(index, value)` pairs.
    fn forward_sparse(&self, input: &[(usize, f64)], out: &mut [f64]) {
        for (o, (row, b)) in out
            .iter_mut()
            .zip(self.weights.chunks_exact(self.inputs).zip(&self.biases))
        {
            *o = b + input.iter().map(|&(j, x)| row[j] * x).sum::<f64>();
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Pixel intensities scaled to `[0, 1]`.
pub fn normalize(image: &Image) -> Vec<f64> {
    image.0.iter().map(|&p| p as f64 / 255.0).collect()
}

fn sparse_input(image: &Image) -> Vec<(usize, f64)> {
    image
        .0
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != 0)
        .map(|(i, &p)| (i, p as f64 / 255.0))
        .collect()
}

/// Per-parameter gradients, shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            layers: model.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    fn clear(&mut self) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
    }
}

struct Activations {
    hidden1: Vec<f64>,
    hidden2: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<Layer>,
}

impl MlpModel {
    /// Freshly initialized `[784, 128, 128, classes]` network.
    pub fn init(class_count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MlpModel {
            layers: vec![
                Layer::glorot(PIXELS, HIDDEN, &mut rng),
                Layer::glorot(HIDDEN, HIDDEN, &mut rng),
                Layer::glorot(HIDDEN, class_count, &mut rng),
            ],
        }
    }

    /// Every weight and bias zero.
    pub fn zeros(class_count: usize) -> Self {
        MlpModel {
            layers: vec![
                Layer::zeros(PIXELS, HIDDEN),
                Layer::zeros(HIDDEN, HIDDEN),
                Layer::zeros(HIDDEN, class_count),
            ],
        }
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].inputs];
        dims.extend(self.layers.iter().map(|l| l.outputs));
        dims
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    fn parameter_mut(&mut self, index: usize) -> &mut f64 {
        let mut i = index;
        for l in &mut self.layers {
            if i < l.weights.len() {
                return &mut l.weights[i];
            }
            i -= l.weights.len();
            if i < l.biases.len() {
                return &mut l.biases[i];
            }
            i -= l.biases.len();
        }
        panic!("parameter index {index} out of range")
    }

    fn forward_sparse(&self, input: &[(usize, f64)]) -> Activations {
        let [l1, l2, l3] = [&self.layers[0], &self.layers[1], &self.layers[2]];
        let mut hidden1 = vec![0.0; l1.outputs];
        l1.forward_sparse(input, &mut hidden1);
        hidden1.iter_mut().for_each(|v| *v = v.max(0.0));
        let mut hidden2 = vec![0.0; l2.outputs];
        l2.forward(&hidden1, &mut hidden2);
        hidden2.iter_mut().for_each(|v| *v = v.max(0.0));
        let mut probs = vec![0.0; l3.outputs];
        l3.forward(&hidden2, &mut probs);
        softmax_in_place(&mut probs);
        Activations { hidden1, hidden2, probs }
    }

    pub fn probabilities(&self, image: &Image) -> Vec<f64> {
        self.forward_sparse(&sparse_input(image)).probs
    }

    /// Cross-entropy `-ln p(label)` of one sample.
    pub fn loss(&self, image: &Image, label: usize) -> f64 {
        -self.probabilities(image)[label].ln()
    }

    /// Accumulates the cross-entropy gradient of one sample into `grads`
    /// and returns the sample loss.
    fn backprop(&self, input: &[(usize, f64)], label: usize, grads: &mut Gradients) -> f64 {
        let act = self.forward_sparse(input);
        let [l2, l3] = [&self.layers[1], &self.layers[2]];

        let mut delta3 = act.probs.clone();
        delta3[label] -= 1.0;

        let g3 = &mut grads.layers[2];
        for (o, &d) in delta3.iter().enumerate() {
            g3.biases[o] += d;
            let row = &mut g3.weights[o * l3.inputs..(o + 1) * l3.inputs];
            for (g, h) in row.iter_mut().zip(&act.hidden2) {
                *g += d * h;
            }
        }

        let mut delta2 = vec![0.0; l3.inputs];
        for (o, &d) in delta3.iter().enumerate() {
            let row = &l3.weights[o * l3.inputs..(o + 1) * l3.inputs];
            for (acc, w) in delta2.iter_mut().zip(row) {
                *acc += d * w;
            }
        }
        for (d, h) in delta2.iter_mut().zip(&act.hidden2) {
            if *h <= 0.0 {
                *d = 0.0;
            }
        }

        let g2 = &mut grads.layers[1];
        for (o, &d) in delta2.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            g2.biases[o] += d;
            let row = &mut g2.weights[o * l2.inputs..(o + 1) * l2.inputs];
            for (g, h) in row.iter_mut().zip(&act.hidden1) {
                *g += d * h;
            }
        }

        let mut delta1 = vec![0.0; l2.inputs];
        for (o, &d) in delta2.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = &l2.weights[o * l2.inputs..(o + 1) * l2.inputs];
            for (acc, w) in delta1.iter_mut().zip(row) {
                *acc += d * w;
            }
        }
        for (d, h) in delta1.iter_mut().zip(&act.hidden1) {
            if *h <= 0.0 {
                *d = 0.0;
            }
        }

        let g1 = &mut grads.layers[0];
        let stride = g1.inputs;
        for (o, &d) in delta1.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            g1.biases[o] += d;
            let row = &mut g1.weights[o * stride..(o + 1) * stride];
            for &(j, x) in input {
                row[j] += d * x;
            }
        }

        -act.probs[label].ln()
    }

    /// Analytic gradient of the single-sample cross-entropy.
    pub fn gradients(&self, image: &Image, label: usize) -> Gradients {
        let mut grads = Gradients::zeros_like(self);
        self.backprop(&sparse_input(image), label, &mut grads);
        grads
    }

    pub fn predict(&self, image: &Image) -> Prediction {
        Prediction::from_scores(self.probabilities(image))
    }

    pub fn train(data: &Dataset, config: &MlpConfig) -> Result<MlpModel> {
        train_mlp(data, config)
    }

    pub fn to_blob(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.parameter_count() * 8);
        out.extend_from_slice(BLOB_MAGIC);
        out.extend_from_slice(&BLOB_VERSION.to_le_bytes());
        let dims = self.layer_dims();
        out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for d in &dims {
            out.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        for l in &self.layers {
            for w in l.weights.iter().chain(&l.biases) {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        out
    }

    pub fn from_blob(bytes: &[u8]) -> Result<MlpModel> {
        let corrupt = |msg: &str| Error::CorruptKb(format!("model blob: {msg}"));
        let mut cursor = Reader { bytes, pos: 0 };
        if cursor.take(4).ok_or_else(|| corrupt("truncated"))? != BLOB_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = cursor.u32().ok_or_else(|| corrupt("truncated"))?;
        if version != BLOB_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                supported: BLOB_VERSION,
            });
        }
        let n = cursor.u32().ok_or_else(|| corrupt("truncated"))? as usize;
        if n != 4 {
            return Err(corrupt("expected four layer dims"));
        }
        let dims: Vec<usize> = (0..n)
            .map(|_| cursor.u32().map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| corrupt("truncated"))?;
        if dims[0] != PIXELS || dims[1] != HIDDEN || dims[2] != HIDDEN || dims[3] == 0 {
            return Err(corrupt(&format!("unexpected layer dims {dims:?}")));
        }
        let mut layers = Vec::with_capacity(3);
        for w in dims.windows(2) {
            let mut layer = Layer::zeros(w[0], w[1]);
            for v in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *v = cursor.f64().ok_or_else(|| corrupt("truncated"))?;
            }
            layers.push(layer);
        }
        if cursor.pos != bytes.len() {
            return Err(corrupt("trailing bytes"));
        }
        Ok(MlpModel { layers })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let out = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(out)
    }
    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }
    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }
}

impl InferenceEngine for MlpModel {
    fn kind(&self) -> &'static str {
        "mlp"
    }

    fn class_count(&self) -> usize {
        self.layers[2].outputs
    }

    fn predict(&self, image: &Image) -> Prediction {
        MlpModel::predict(self, image)
    }

    fn to_blob(&self) -> Vec<u8> {
        MlpModel::to_blob(self)
    }
}

/// Mini-batch SGD with momentum; deterministic for a fixed seed.
pub fn train_mlp(data: &Dataset, config: &MlpConfig) -> Result<MlpModel> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    let mut model = MlpModel::init(data.class_count(), config.seed);
    let mut velocity = Gradients::zeros_like(&model);
    let mut grads = Gradients::zeros_like(&model);
    let inputs: Vec<Vec<(usize, f64)>> = data.samples().iter().map(|s| sparse_input(&s.pixels)).collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for (batch_no, batch) in order.chunks(config.batch_size).enumerate() {
            grads.clear();
            let mut loss = 0.0;
            for &i in batch {
                loss += model.backprop(&inputs[i], data.samples()[i].label, &mut grads);
            }
            if !loss.is_finite() {
                return Err(Error::DivergedLoss { epoch, batch: batch_no });
            }
            let step = config.learning_rate / batch.len() as f64;
            for ((layer, vel), g) in model.layers.iter_mut().zip(&mut velocity.layers).zip(&grads.layers) {
                for ((w, v), g) in layer
                    .weights
                    .iter_mut()
                    .chain(layer.biases.iter_mut())
                    .zip(vel.weights.iter_mut().chain(vel.biases.iter_mut()))
                    .zip(g.weights.iter().chain(&g.biases))
                {
                    *v = config.momentum * *v - step * g;
                    *w += *v;
                }
            }
        }
    }
    Ok(model)
}

/// Largest relative error between backpropagated gradients and central
/// finite differences, over `count` parameters drawn with `seed`.
pub fn gradient_check(model: &MlpModel, image: &Image, label: usize, epsilon: f64, count: usize, seed: u64) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in [1e-6, 1e-3]")));
    }
    let analytic = model.gradients(image, label);
    let flat: Vec<f64> = analytic
        .layers
        .iter()
        .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, flat.len(), count.min(flat.len()));

    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for idx in picks.iter() {
        let original = *probe.parameter_mut(idx);
        *probe.parameter_mut(idx) = original + epsilon;
        let up = probe.loss(image, label);
        *probe.parameter_mut(idx) = original - epsilon;
        let down = probe.loss(image, label);
        *probe.parameter_mut(idx) = original;

        let numeric = (up - down) / (2.0 * epsilon);
        let a = flat[idx];
        let scale = a.abs().max(numeric.abs());
        // both effectively zero: nothing to compare
        if scale < 1e-10 {
            continue;
        }
        worst = worst.max((a - numeric).abs() / scale);
    }
    Ok(worst)
}
