use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{pool_clip, ClipSample, HighlightClass, HighlightError};

const MAGIC: &[u8; 4] = b"SMX1";
const K: usize = HighlightClass::COUNT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Weight of the `½‖W‖²` penalty; the bias is not penalized.
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, epochs: 500, seed: 7, l2: 1e-4 }
    }
}

/// Linear softmax head over pooled clip features.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    pub dim: usize,
    /// Row-major `7 × dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub train_config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl SoftmaxModel {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, weights: vec![0.0; K * dim], bias: vec![0.0; K], train_config: TrainConfig::default() }
    }

    fn seeded(dim: usize, config: TrainConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, 0.01).expect("valid std");
        let weights = (0..K * dim).map(|_| normal.sample(&mut rng)).collect();
        Self { dim, weights, bias: vec![0.0; K], train_config: config }
    }

    pub fn logits(&self, x: &[f64]) -> [f64; K] {
        let mut z = [0.0; K];
        for (k, zk) in z.iter_mut().enumerate() {
            let row = &self.weights[k * self.dim..(k + 1) * self.dim];
            *zk = self.bias[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        z
    }

    pub fn probabilities(&self, x: &[f64]) -> [f64; K] {
        softmax(self.logits(x))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * (self.weights.len() + K));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(K as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for v in self.weights.iter().chain(&self.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HighlightError> {
        let bad = |m: &str| HighlightError::BadModelFile(m.to_string());
        if bytes.len() < 12 || &bytes[..4] != MAGIC {
            return Err(bad("missing SMX1 header"));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let classes = u32_at(4) as usize;
        let dim = u32_at(8) as usize;
        if classes != K {
            return Err(bad(&format!("expected {K} classes, found {classes}")));
        }
        let n = classes * dim + classes;
        if bytes.len() != 12 + 8 * n {
            return Err(bad("length does not match header"));
        }
        let vals: Vec<f64> =
            bytes[12..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite parameter"));
        }
        let (w, b) = vals.split_at(classes * dim);
        Ok(Self { dim, weights: w.to_vec(), bias: b.to_vec(), train_config: TrainConfig::default() })
    }

    pub fn save(&self, path: &Path) -> Result<(), HighlightError> {
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, HighlightError> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}

fn softmax(z: [f64; K]) -> [f64; K] {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p = z.map(|v| (v - m).exp());
    let s: f64 = p.iter().sum();
    for v in &mut p {
        *v /= s;
    }
    p
}

/// Mean cross-entropy plus `½·l2·‖W‖²`, with its gradient.
pub fn loss_and_gradient(model: &SoftmaxModel, xs: &[Vec<f64>], ys: &[usize], l2: f64) -> (f64, Gradient) {
    let d = model.dim;
    let n = xs.len().max(1) as f64;
    let mut gw = vec![0.0; K * d];
    let mut gb = vec![0.0; K];
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = model.logits(x);
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - z[y];
        for k in 0..K {
            let r = (z[k] - lse).exp() - if k == y { 1.0 } else { 0.0 };
            gb[k] += r;
            for (g, v) in gw[k * d..(k + 1) * d].iter_mut().zip(x) {
                *g += r * v;
            }
        }
    }
    loss /= n;
    for g in gw.iter_mut().chain(gb.iter_mut()) {
        *g /= n;
    }
    let mut sq = 0.0;
    for (g, w) in gw.iter_mut().zip(&model.weights) {
        *g += l2 * w;
        sq += w * w;
    }
    (loss + 0.5 * l2 * sq, Gradient { weights: gw, bias: gb })
}

/// Full-batch gradient descent on pooled vectors. Returns the model and the
/// objective value before every epoch and after the last one.
pub fn train_pooled(
    xs: &[Vec<f64>],
    ys: &[usize],
    config: &TrainConfig,
) -> Result<(SoftmaxModel, Vec<f64>), HighlightError> {
    let dim = xs.first().map_or(0, Vec::len);
    if let Some(x) = xs.iter().find(|x| x.len() != dim) {
        return Err(HighlightError::DimensionMismatch { expected: dim, found: x.len() });
    }
    let mut seen = [false; K];
    for &y in ys {
        if y >= K {
            return Err(HighlightError::DegenerateDataset);
        }
        seen[y] = true;
    }
    if xs.len() != ys.len() || seen.iter().filter(|&&s| s).count() < 2 {
        return Err(HighlightError::DegenerateDataset);
    }
    let mut model = SoftmaxModel::seeded(dim, *config);
    let mut history = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        let (loss, g) = loss_and_gradient(&model, xs, ys, config.l2);
        history.push(loss);
        for (w, gw) in model.weights.iter_mut().zip(&g.weights) {
            *w -= config.learning_rate * gw;
        }
        for (b, gb) in model.bias.iter_mut().zip(&g.bias) {
            *b -= config.learning_rate * gb;
        }
    }
    history.push(loss_and_gradient(&model, xs, ys, config.l2).0);
    Ok((model, history))
}

/// Trains on the labeled clips; unlabeled clips are ignored.
pub fn train_clip_classifier(clips: &[ClipSample], config: &TrainConfig) -> Result<SoftmaxModel, HighlightError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for c in clips {
        if let Some(label) = c.label {
            xs.push(pool_clip(c)?);
            ys.push(label.index());
        }
    }
    train_pooled(&xs, &ys, config).map(|(m, _)| m)
}

pub fn classify_pooled(model: &SoftmaxModel, x: &[f64]) -> Result<(HighlightClass, [f64; K]), HighlightError> {
    if x.len() != model.dim {
        return Err(HighlightError::DimensionMismatch { expected: model.dim, found: x.len() });
    }
    let p = model.probabilities(x);
    let mut best = 0;
    for k in 1..K {
        if p[k] > p[best] {
            best = k;
        }
    }
    Ok((HighlightClass::ALL[best], p))
}

pub fn classify_clip(model: &SoftmaxModel, clip: &ClipSample) -> Result<(HighlightClass, [f64; K]), HighlightError> {
    classify_pooled(model, &pool_clip(clip)?)
}
