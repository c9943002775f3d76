//! Tiny differentiable classifiers: logistic regression and a one-hidden-
//! layer tanh MLP, trained by deterministic (mini-batch or full-batch)
//! gradient descent on cross-entropy.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

const MODEL_MAGIC: &[u8; 4] = b"MDL1";

/// Substream tag separating the shuffle RNG from other seed consumers.
const SHUFFLE_STREAM: u64 = 0x7368_7566_666c_6531;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArchKind {
    Logistic,
    Mlp1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub kind: ArchKind,
    /// Hidden width; only meaningful for `Mlp1`.
    pub hidden_units: usize,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl Architecture {
    pub fn logistic(d: usize, m: usize) -> Self {
        Architecture { kind: ArchKind::Logistic, hidden_units: 0, input_dim: d, output_dim: m }
    }

    pub fn mlp1(d: usize, hidden: usize, m: usize) -> Self {
        Architecture { kind: ArchKind::Mlp1, hidden_units: hidden, input_dim: d, output_dim: m }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::Architecture("zero input or output dimension".into()));
        }
        if self.kind == ArchKind::Mlp1 && self.hidden_units == 0 {
            return Err(Error::Architecture("mlp1 requires hiddenUnits ≥ 1".into()));
        }
        Ok(())
    }
}

/// A dense layer stored row-major: weights is out×in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub(crate) fn zeros_like(&self) -> Layer {
        Layer {
            weights: self.weights.iter().map(|r| vec![0.0; r.len()]).collect(),
            biases: vec![0.0; self.biases.len()],
        }
    }

    pub(crate) fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub arch: Architecture,
    pub layers: Vec<Layer>,
    pub init_seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Sub-service learning-rate scale; effective rate is `lr_scale * learning_rate`.
    pub lr_scale: f64,
    pub epochs: usize,
    /// `batch_size >= n` means full-batch gradient descent (no shuffling).
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::Config { field: "learningRate".into(), msg: "must be > 0".into() });
        }
        if self.lr_scale <= 0.0 {
            return Err(Error::Config { field: "lrScale".into(), msg: "must be > 0".into() });
        }
        if self.batch_size == 0 {
            return Err(Error::Config { field: "batchSize".into(), msg: "must be ≥ 1".into() });
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.1, lr_scale: 1.0, epochs: 200, batch_size: usize::MAX, seed: 0 }
    }
}

/// Uniform init in [−1/√fanIn, 1/√fanIn], biases zero.
pub fn init(arch: Architecture, seed: u64) -> Result<ModelParams> {
    arch.validate()?;
    let mut rng = rng::rng_from(seed);
    let mut layer = |out: usize, inp: usize| {
        let bound = 1.0 / (inp as f64).sqrt();
        Layer {
            weights: (0..out)
                .map(|_| (0..inp).map(|_| rng.gen_range(-bound..bound)).collect())
                .collect(),
            biases: vec![0.0; out],
        }
    };
    let layers = match arch.kind {
        ArchKind::Logistic => vec![layer(arch.output_dim, arch.input_dim)],
        ArchKind::Mlp1 => vec![
            layer(arch.hidden_units, arch.input_dim),
            layer(arch.output_dim, arch.hidden_units),
        ],
    };
    Ok(ModelParams { arch, layers, init_seed: seed })
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

pub fn logits(params: &ModelParams, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != params.arch.input_dim {
        return Err(Error::Dimension { expected: params.arch.input_dim, got: x.len() });
    }
    match params.arch.kind {
        ArchKind::Logistic => Ok(params.layers[0].forward(x)),
        ArchKind::Mlp1 => {
            let h: Vec<f64> = params.layers[0].forward(x).iter().map(|v| v.tanh()).collect();
            Ok(params.layers[1].forward(&h))
        }
    }
}

/// Softmax class probabilities for a single input.
pub fn predict_proba(params: &ModelParams, x: &[f64]) -> Result<Vec<f64>> {
    Ok(softmax(&logits(params, x)?))
}

/// Mean cross-entropy of `params` over the rows of `data` selected by `idx`.
pub fn cross_entropy(params: &ModelParams, data: &Dataset, idx: &[usize]) -> f64 {
    let mut total = 0.0;
    for &i in idx {
        let p = predict_proba(params, &data.features[i]).expect("dims checked");
        total -= p[data.labels[i]].max(1e-300).ln();
    }
    total / idx.len() as f64
}

/// Cross-entropy gradient accumulated over a batch, as per-layer deltas.
fn batch_gradient(params: &ModelParams, data: &Dataset, batch: &[usize]) -> Vec<Layer> {
    let mut grads: Vec<Layer> = params.layers.iter().map(Layer::zeros_like).collect();
    for &i in batch {
        let x = &data.features[i];
        let y = data.labels[i];
        match params.arch.kind {
            ArchKind::Logistic => {
                let p = softmax(&params.layers[0].forward(x));
                for (k, pk) in p.iter().enumerate() {
                    let dz = pk - if k == y { 1.0 } else { 0.0 };
                    for (g, xv) in grads[0].weights[k].iter_mut().zip(x) {
                        *g += dz * xv;
                    }
                    grads[0].biases[k] += dz;
                }
            }
            ArchKind::Mlp1 => {
                let pre: Vec<f64> = params.layers[0].forward(x);
                let h: Vec<f64> = pre.iter().map(|v| v.tanh()).collect();
                let p = softmax(&params.layers[1].forward(&h));
                let mut dh = vec![0.0; h.len()];
                for (k, pk) in p.iter().enumerate() {
                    let dz = pk - if k == y { 1.0 } else { 0.0 };
                    for (j, hv) in h.iter().enumerate() {
                        grads[1].weights[k][j] += dz * hv;
                        dh[j] += dz * params.layers[1].weights[k][j];
                    }
                    grads[1].biases[k] += dz;
                }
                for (j, (hv, dhj)) in h.iter().zip(&dh).enumerate() {
                    let dpre = dhj * (1.0 - hv * hv);
                    for (g, xv) in grads[0].weights[j].iter_mut().zip(x) {
                        *g += dpre * xv;
                    }
                    grads[0].biases[j] += dpre;
                }
            }
        }
    }
    let scale = 1.0 / batch.len() as f64;
    for layer in &mut grads {
        for row in &mut layer.weights {
            for g in row {
                *g *= scale;
            }
        }
        for g in &mut layer.biases {
            *g *= scale;
        }
    }
    grads
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Post-epoch mean cross-entropy over the training rows.
    pub loss_trace: Vec<f64>,
    /// Per-epoch parameter snapshots, when requested.
    pub snapshots: Option<Vec<ModelParams>>,
}

/// Gradient descent on the rows of `data` selected by `idx`. Fully
/// deterministic under (`params.init_seed`, `cfg.seed`): shuffle order and
/// batch partition are fixed functions of the seeds. Full-batch when
/// `cfg.batch_size >= idx.len()`.
pub fn train(
    params: &ModelParams,
    data: &Dataset,
    idx: &[usize],
    cfg: &TrainConfig,
    keep_snapshots: bool,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if idx.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    let lr = cfg.learning_rate * cfg.lr_scale;
    let mut params = params.clone();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut snapshots = keep_snapshots.then(Vec::new);
    let full_batch = cfg.batch_size >= idx.len();
    let mut shuffle_rng = rng::rng_from(rng::combine(cfg.seed, SHUFFLE_STREAM));
    let mut order: Vec<usize> = idx.to_vec();

    for _epoch in 0..cfg.epochs {
        if full_batch {
            let grads = batch_gradient(&params, data, idx);
            apply(&mut params, &grads, lr);
        } else {
            order.shuffle(&mut shuffle_rng);
            for batch in order.chunks(cfg.batch_size) {
                let grads = batch_gradient(&params, data, batch);
                apply(&mut params, &grads, lr);
            }
        }
        trace.push(cross_entropy(&params, data, idx));
        if let Some(s) = snapshots.as_mut() {
            s.push(params.clone());
        }
    }
    Ok(TrainOutcome { params, loss_trace: trace, snapshots })
}

/// Like [`train`] but stops early once the relative loss improvement over
/// the trailing 5 epochs drops below `tol`, or the epoch cap is reached.
pub fn train_to_convergence(
    params: &ModelParams,
    data: &Dataset,
    idx: &[usize],
    cfg: &TrainConfig,
    tol: f64,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if idx.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    let lr = cfg.learning_rate * cfg.lr_scale;
    let mut params = params.clone();
    let mut trace: Vec<f64> = Vec::new();
    let full_batch = cfg.batch_size >= idx.len();
    let mut shuffle_rng = rng::rng_from(rng::combine(cfg.seed, SHUFFLE_STREAM));
    let mut order: Vec<usize> = idx.to_vec();

    for _epoch in 0..cfg.epochs {
        if full_batch {
            let grads = batch_gradient(&params, data, idx);
            apply(&mut params, &grads, lr);
        } else {
            order.shuffle(&mut shuffle_rng);
            for batch in order.chunks(cfg.batch_size) {
                let grads = batch_gradient(&params, data, batch);
                apply(&mut params, &grads, lr);
            }
        }
        trace.push(cross_entropy(&params, data, idx));
        let k = trace.len();
        if k > 5 {
            let prev = trace[k - 6];
            let now = trace[k - 1];
            if (prev - now).abs() < tol * prev.abs().max(1e-12) {
                break;
            }
        }
    }
    Ok(TrainOutcome { params, loss_trace: trace, snapshots: None })
}

/// Init-and-train convenience: fresh parameters seeded from `cfg.seed`,
/// all rows, trained to convergence under `tol`.
pub fn fit(arch: &Architecture, data: &Dataset, cfg: &TrainConfig, tol: f64) -> Result<TrainOutcome> {
    let params = init(*arch, rng::combine(cfg.seed, 1))?;
    let idx: Vec<usize> = (0..data.n()).collect();
    train_to_convergence(&params, data, &idx, cfg, tol)
}

/// Like [`fit`], but runs exactly `cfg.epochs` full-batch epochs with no
/// loss trace or early stopping. The per-epoch parameter updates match
/// [`fit`] exactly; this exists for callers that fit very many tiny models
/// and don't need convergence monitoring, where the per-epoch loss pass is
/// a significant fraction of the total cost.
pub fn fit_epochs(
    arch: &Architecture,
    data: &Dataset,
    idx: &[usize],
    cfg: &TrainConfig,
) -> Result<ModelParams> {
    cfg.validate()?;
    if idx.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    let mut params = init(*arch, rng::combine(cfg.seed, 1))?;
    let lr = cfg.learning_rate * cfg.lr_scale;
    let full_batch = cfg.batch_size >= idx.len();
    let mut shuffle_rng = rng::rng_from(rng::combine(cfg.seed, SHUFFLE_STREAM));
    let mut order: Vec<usize> = idx.to_vec();
    for _epoch in 0..cfg.epochs {
        if full_batch {
            let grads = batch_gradient(&params, data, idx);
            apply(&mut params, &grads, lr);
        } else {
            order.shuffle(&mut shuffle_rng);
            for batch in order.chunks(cfg.batch_size) {
                let grads = batch_gradient(&params, data, batch);
                apply(&mut params, &grads, lr);
            }
        }
    }
    Ok(params)
}

fn apply(params: &mut ModelParams, grads: &[Layer], lr: f64) {
    for (layer, grad) in params.layers.iter_mut().zip(grads) {
        for (wrow, grow) in layer.weights.iter_mut().zip(&grad.weights) {
            for (w, g) in wrow.iter_mut().zip(grow) {
                *w -= lr * g;
            }
        }
        for (b, g) in layer.biases.iter_mut().zip(&grad.biases) {
            *b -= lr * g;
        }
    }
}

/// Numeric self-check: worst relative error between the analytic batch
/// gradient and central finite differences (step 1e−5) on a small random
/// instance seeded by `seed`.
#[allow(clippy::needless_range_loop)] // indices drive the probe closures
pub fn gradient_check_max_rel_error(arch: Architecture, seed: u64) -> f64 {
    use crate::data::{generate, SyntheticKind, SyntheticSpec};
    let spec = SyntheticSpec {
        kind: SyntheticKind::GaussianBlobs,
        n: 6,
        d: arch.input_dim,
        m: arch.output_dim,
        noise_std: 0.8,
        seed,
    };
    let data = generate(&spec).expect("valid spec");
    let idx: Vec<usize> = (0..data.n()).collect();
    let params = init(arch, seed).expect("valid arch");
    let grads = batch_gradient(&params, &data, &idx);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut probe = |li: usize, set: &dyn Fn(&mut ModelParams, f64), g: f64| {
        let _ = li;
        let mut plus = params.clone();
        set(&mut plus, h);
        let mut minus = params.clone();
        set(&mut minus, -h);
        let fd =
            (cross_entropy(&plus, &data, &idx) - cross_entropy(&minus, &data, &idx)) / (2.0 * h);
        worst = worst.max((fd - g).abs() / g.abs().max(fd.abs()).max(1e-8));
    };
    for li in 0..params.layers.len() {
        for r in 0..params.layers[li].weights.len() {
            for c in 0..params.layers[li].weights[r].len() {
                probe(li, &|p, d| p.layers[li].weights[r][c] += d, grads[li].weights[r][c]);
            }
        }
        for b in 0..params.layers[li].biases.len() {
            probe(li, &|p, d| p.layers[li].biases[b] += d, grads[li].biases[b]);
        }
    }
    worst
}

pub fn accuracy(params: &ModelParams, data: &Dataset, idx: &[usize]) -> f64 {
    let correct = idx
        .iter()
        .filter(|&&i| {
            let p = predict_proba(params, &data.features[i]).expect("dims checked");
            let pred = p
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(k, _)| k)
                .unwrap();
            pred == data.labels[i]
        })
        .count();
    correct as f64 / idx.len() as f64
}

// --- serialization: self-describing binary blob ---

pub fn to_bytes(params: &ModelParams) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.push(match params.arch.kind {
        ArchKind::Logistic => 0u8,
        ArchKind::Mlp1 => 1u8,
    });
    for dim in [
        params.arch.hidden_units,
        params.arch.input_dim,
        params.arch.output_dim,
    ] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    out.extend_from_slice(&params.init_seed.to_le_bytes());
    for layer in &params.layers {
        for row in &layer.weights {
            for v in row {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        for v in &layer.biases {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<ModelParams> {
    let fail = |msg: &str| Error::Format(format!("model blob: {msg}"));
    if bytes.len() < 25 || &bytes[0..4] != MODEL_MAGIC {
        return Err(fail("bad header"));
    }
    let kind = match bytes[4] {
        0 => ArchKind::Logistic,
        1 => ArchKind::Mlp1,
        k => return Err(fail(&format!("unknown kind {k}"))),
    };
    let word = |i: usize| u32::from_le_bytes(bytes[5 + 4 * i..9 + 4 * i].try_into().unwrap()) as usize;
    let arch = Architecture { kind, hidden_units: word(0), input_dim: word(1), output_dim: word(2) };
    let init_seed = u64::from_le_bytes(bytes[17..25].try_into().unwrap());
    let mut pos = 25;
    let mut read = |count: usize| -> Result<Vec<f64>> {
        let need = count * 8;
        if pos + need > bytes.len() {
            return Err(Error::Format("model blob: truncated".into()));
        }
        let vals = bytes[pos..pos + need]
            .chunks(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        pos += need;
        Ok(vals)
    };
    let mut read_layer = |out: usize, inp: usize| -> Result<Layer> {
        let mut weights = Vec::with_capacity(out);
        for _ in 0..out {
            weights.push(read(inp)?);
        }
        Ok(Layer { weights, biases: read(out)? })
    };
    let layers = match kind {
        ArchKind::Logistic => vec![read_layer(arch.output_dim, arch.input_dim)?],
        ArchKind::Mlp1 => vec![
            read_layer(arch.hidden_units, arch.input_dim)?,
            read_layer(arch.output_dim, arch.hidden_units)?,
        ],
    };
    Ok(ModelParams { arch, layers, init_seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, SyntheticKind, SyntheticSpec};

    fn blobs(n: usize, seed: u64) -> Dataset {
        generate(&SyntheticSpec {
            kind: SyntheticKind::GaussianBlobs,
            n,
            d: 2,
            m: 2,
            noise_std: 0.5,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn fit_epochs_matches_fit_without_early_stop() {
        let data = blobs(12, 5);
        let cfg = TrainConfig { epochs: 15, seed: 9, ..TrainConfig::default() };
        let arch = Architecture::logistic(2, 2);
        // tol = 0 makes fit's early-stop condition unsatisfiable
        let full = fit(&arch, &data, &cfg, 0.0).unwrap().params;
        let idx: Vec<usize> = (0..data.n()).collect();
        let fixed = fit_epochs(&arch, &data, &idx, &cfg).unwrap();
        for (a, b) in full.layers.iter().zip(&fixed.layers) {
            assert_eq!(a.weights, b.weights);
            assert_eq!(a.biases, b.biases);
        }
    }

    #[test]
    fn init_deterministic_and_shaped() {
        let arch = Architecture::logistic(2, 2);
        let a = init(arch, 3).unwrap();
        let b = init(arch, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.layers[0].weights.len(), 2);
        assert_eq!(a.layers[0].weights[0].len(), 2);
        assert_eq!(a.layers[0].biases.len(), 2);
    }

    #[test]
    fn mlp_zero_hidden_rejected() {
        assert!(init(Architecture::mlp1(2, 0, 2), 1).is_err());
    }

    #[test]
    fn softmax_basics() {
        let p = softmax(&[0.0, 0.0, 0.0]);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = softmax(&[0.0, 3.0f64.ln()]);
        assert!((p[0] - 0.25).abs() < 1e-12);
        assert!((p[1] - 0.75).abs() < 1e-12);
        // shift invariance
        let a = softmax(&[0.3, -1.2, 2.0]);
        let b = softmax(&[0.3 + 5.0, -1.2 + 5.0, 2.0 + 5.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn proba_sums_to_one() {
        let params = init(Architecture::mlp1(3, 4, 3), 11).unwrap();
        let p = predict_proba(&params, &[0.5, -2.0, 7.0]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let params = init(Architecture::logistic(2, 2), 1).unwrap();
        assert!(predict_proba(&params, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn zero_epochs_identity() {
        let data = blobs(10, 1);
        let params = init(Architecture::logistic(2, 2), 2).unwrap();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let out = train(&params, &data, &(0..10).collect::<Vec<_>>(), &cfg, false).unwrap();
        assert_eq!(out.params, params);
        assert!(out.loss_trace.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let data = blobs(12, 4);
        let params = init(Architecture::logistic(2, 2), 5).unwrap();
        let cfg = TrainConfig { epochs: 50, batch_size: 4, seed: 9, ..TrainConfig::default() };
        let idx: Vec<usize> = (0..12).collect();
        let a = train(&params, &data, &idx, &cfg, false).unwrap();
        let b = train(&params, &data, &idx, &cfg, false).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.loss_trace, b.loss_trace);
    }

    #[test]
    fn separable_blobs_reach_high_accuracy() {
        let data = blobs(20, 7);
        let params = init(Architecture::logistic(2, 2), 3).unwrap();
        let cfg = TrainConfig { epochs: 500, ..TrainConfig::default() };
        let idx: Vec<usize> = (0..20).collect();
        let out = train(&params, &data, &idx, &cfg, false).unwrap();
        assert!(accuracy(&out.params, &data, &idx) >= 0.95);
    }

    #[test]
    fn empty_coalition_rejected_at_this_layer() {
        let data = blobs(4, 1);
        let params = init(Architecture::logistic(2, 2), 1).unwrap();
        let err = train(&params, &data, &[], &TrainConfig::default(), false).unwrap_err();
        assert!(matches!(err, Error::EmptyCoalition));
    }

    #[test]
    fn loss_trace_finite() {
        let data = blobs(16, 2);
        let params = init(Architecture::mlp1(2, 6, 2), 8).unwrap();
        let cfg = TrainConfig { learning_rate: 1.0, epochs: 100, ..TrainConfig::default() };
        let out = train(&params, &data, &(0..16).collect::<Vec<_>>(), &cfg, false).unwrap();
        assert!(out.loss_trace.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        assert!(gradient_check_max_rel_error(Architecture::logistic(3, 2), 21) < 1e-4);
        assert!(gradient_check_max_rel_error(Architecture::mlp1(3, 4, 3), 22) < 1e-4);
    }

    #[test]
    fn binary_round_trip() {
        let params = init(Architecture::mlp1(3, 5, 2), 77).unwrap();
        let bytes = to_bytes(&params);
        let back = from_bytes(&bytes).unwrap();
        assert_eq!(params, back);
        assert!(from_bytes(&bytes[..10]).is_err());
    }
}
