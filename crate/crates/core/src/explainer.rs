//! Amortized attribution explainer: a one-hidden-layer network mapping a
//! test point (features concatenated with a one-hot label) to an output
//! grid of per-training-point values, trained against the kernel-weighted
//! least squares objective so that, at the optimum, its normalized outputs
//! are the Shapley values of the utility it was trained on.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::GroupPartition;
use crate::model::Layer;
use crate::rng;
use crate::shapley::{efficient_normalize, KernelSampler, ShapleyVector};
use crate::utility::{ModelUtility, SubsetMask, TabularGame};

const EXPLAINER_MAGIC: &[u8; 4] = b"EXP1";

/// The value functions the explainer trains against. Tabular oracles ignore
/// the test point; model-backed oracles retrain sub-service models.
pub trait ValueOracle {
    /// Player count (training points of the explained game).
    fn n(&self) -> usize;
    /// Label count.
    fn m(&self) -> usize;
    fn eval(&self, mask: &SubsetMask, x: &[f64], y: usize) -> f64;

    fn v_one(&self, x: &[f64], y: usize) -> f64 {
        self.eval(&SubsetMask::ones(self.n()), x, y)
    }

    fn v_zero(&self, x: &[f64], y: usize) -> f64 {
        self.eval(&SubsetMask::zeros(self.n()), x, y)
    }
}

impl ValueOracle for ModelUtility<'_> {
    fn n(&self) -> usize {
        ModelUtility::n(self)
    }
    fn m(&self) -> usize {
        ModelUtility::m(self)
    }
    fn eval(&self, mask: &SubsetMask, x: &[f64], y: usize) -> f64 {
        ModelUtility::eval(self, mask, x, y)
    }
}

/// A fixed tabular game presented as an (x, y)-independent oracle.
pub struct TabularOracle {
    pub game: TabularGame,
    pub m: usize,
}

impl ValueOracle for TabularOracle {
    fn n(&self) -> usize {
        use crate::utility::Game;
        self.game.num_players()
    }
    fn m(&self) -> usize {
        self.m
    }
    fn eval(&self, mask: &SubsetMask, _x: &[f64], _y: usize) -> f64 {
        use crate::utility::Game;
        self.game.eval(mask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Fds,
    Afds,
    Gfds,
    GfdsPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GfdsPlusHead {
    /// n-dim output with an in-group spread penalty weighted by γ.
    NDimPenalty,
    /// N-dim output; the group value is split evenly at inference.
    NDimSplit,
}

#[derive(Debug, Clone)]
pub struct ExplainerTrainConfig {
    pub variant: Variant,
    /// Explainer learning rate α.
    pub alpha: f64,
    pub steps: usize,
    pub batch_size: usize,
    /// Sub-model truncation epochs (carried by the oracle; recorded here).
    pub k: usize,
    /// Sub-model learning-rate scale (idem).
    pub beta: f64,
    pub gamma: f64,
    pub head: GfdsPlusHead,
    pub hidden_units: usize,
    pub seed: u64,
}

impl Default for ExplainerTrainConfig {
    fn default() -> Self {
        ExplainerTrainConfig {
            variant: Variant::Fds,
            alpha: 0.05,
            steps: 2000,
            batch_size: 16,
            k: 10,
            beta: 10.0,
            gamma: 0.0,
            head: GfdsPlusHead::NDimSplit,
            hidden_units: 32,
            seed: 0,
        }
    }
}

/// One-hidden-layer tanh network, input d+m, output grid out_rows×m.
/// out_rows is n, or N for the group-split head; column y is selected at
/// inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainerParams {
    pub feature_dim: usize,
    pub n: usize,
    pub m: usize,
    pub out_rows: usize,
    pub hidden_units: usize,
    pub layers: Vec<Layer>,
    pub init_seed: u64,
}

impl ExplainerParams {
    pub fn init(feature_dim: usize, n: usize, m: usize, out_rows: usize, hidden: usize, seed: u64) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::Architecture("explainer requires hiddenUnits ≥ 1".into()));
        }
        let input_dim = feature_dim + m;
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
        let layers = vec![layer(hidden, input_dim), layer(out_rows * m, hidden)];
        Ok(ExplainerParams { feature_dim, n, m, out_rows, hidden_units: hidden, layers, init_seed: seed })
    }

    fn augment(&self, x: &[f64], y: usize) -> Result<Vec<f64>> {
        if x.len() != self.feature_dim {
            return Err(Error::Dimension { expected: self.feature_dim, got: x.len() });
        }
        if y >= self.m {
            return Err(Error::Domain(format!("label {y} out of range for m={}", self.m)));
        }
        let mut input = Vec::with_capacity(self.feature_dim + self.m);
        input.extend_from_slice(x);
        for c in 0..self.m {
            input.push(if c == y { 1.0 } else { 0.0 });
        }
        Ok(input)
    }

    /// Raw (pre-normalization) output column for label y: out_rows values.
    pub fn forward(&self, x: &[f64], y: usize) -> Result<Vec<f64>> {
        let input = self.augment(x, y)?;
        let h: Vec<f64> = self.layers[0].forward(&input).iter().map(|v| v.tanh()).collect();
        let grid = self.layers[1].forward(&h);
        Ok((0..self.out_rows).map(|r| grid[r * self.m + y]).collect())
    }

    /// Gradient of a scalar loss w.r.t. all parameters, given the gradient
    /// `d_out` of that loss w.r.t. the selected output column.
    fn backward(&self, x: &[f64], y: usize, d_out: &[f64]) -> Result<Vec<Layer>> {
        let input = self.augment(x, y)?;
        let pre: Vec<f64> = self.layers[0].forward(&input);
        let h: Vec<f64> = pre.iter().map(|v| v.tanh()).collect();
        let mut grads = vec![self.layers[0].zeros_like(), self.layers[1].zeros_like()];
        let mut dh = vec![0.0; h.len()];
        for (r, &g) in d_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let row = r * self.m + y;
            for (j, hv) in h.iter().enumerate() {
                grads[1].weights[row][j] += g * hv;
                dh[j] += g * self.layers[1].weights[row][j];
            }
            grads[1].biases[row] += g;
        }
        for (j, (hv, dhj)) in h.iter().zip(&dh).enumerate() {
            let dpre = dhj * (1.0 - hv * hv);
            for (gw, xv) in grads[0].weights[j].iter_mut().zip(&input) {
                *gw += dpre * xv;
            }
            grads[0].biases[j] += dpre;
        }
        Ok(grads)
    }

    fn apply(&mut self, grads: &[Layer], lr: f64) {
        for (layer, grad) in self.layers.iter_mut().zip(grads) {
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
}

/// Normalized length-n attribution for a test point. For the group-split
/// head the N group values are normalized then divided evenly inside each
/// group, so the result still sums to v(1) − v(0).
pub fn predict_normalized(
    params: &ExplainerParams,
    x: &[f64],
    y: usize,
    v_one: f64,
    v_zero: f64,
    partition: Option<&GroupPartition>,
) -> Result<ShapleyVector> {
    let raw = params.forward(x, y)?;
    if params.out_rows == params.n {
        Ok(efficient_normalize(&raw, v_one, v_zero))
    } else {
        let partition = partition.ok_or_else(|| {
            Error::Consistency("group-split head needs the partition at inference".into())
        })?;
        let groups = efficient_normalize(&raw, v_one, v_zero);
        let mut values = vec![0.0; params.n];
        for (g, members) in partition.groups.iter().enumerate() {
            let share = groups.values[g] / members.len() as f64;
            for &i in members {
                values[i] = share;
            }
        }
        Ok(ShapleyVector::new(values, v_one, v_zero))
    }
}

/// Residual and the loss gradient w.r.t. the raw output, with the additive
/// efficient normalization folded in (a row of the chain rule: the uniform
/// shift makes ∂φ̂norm_i/∂φ̂_k = δ_ik − 1/n_out).
fn residual_grad(
    raw: &[f64],
    mask_bits: impl Fn(usize) -> bool,
    v_s: f64,
    v_one: f64,
    v_zero: f64,
) -> (f64, Vec<f64>) {
    let n_out = raw.len() as f64;
    let shift = (v_one - v_zero - raw.iter().sum::<f64>()) / n_out;
    let mut s_dot = 0.0;
    let mut popcount = 0usize;
    for (i, v) in raw.iter().enumerate() {
        if mask_bits(i) {
            s_dot += v + shift;
            popcount += 1;
        }
    }
    let r = v_s - v_zero - s_dot;
    let grad: Vec<f64> = (0..raw.len())
        .map(|k| {
            let indicator = if mask_bits(k) { 1.0 } else { 0.0 };
            -2.0 * r * (indicator - popcount as f64 / n_out)
        })
        .collect();
    (r, grad)
}

pub struct TrainedExplainer {
    pub params: ExplainerParams,
    /// Per-step mean squared residual.
    pub loss_trace: Vec<f64>,
}

/// Shared loop for the point-wise variants: per step, a batch of
/// independent (x, y, s) triples with s drawn from the Shapley kernel, the
/// prediction normalized before the residual, and one gradient step on the
/// mean squared residual.
fn train_pointwise<O: ValueOracle + ?Sized>(
    oracle: &O,
    pool: &[Vec<f64>],
    cfg: &ExplainerTrainConfig,
) -> Result<TrainedExplainer> {
    if pool.is_empty() {
        return Err(Error::Domain("explainer training pool is empty".into()));
    }
    let n = oracle.n();
    let m = oracle.m();
    let d = pool[0].len();
    let mut params = ExplainerParams::init(d, n, m, n, cfg.hidden_units, rng::combine(cfg.seed, 1))?;
    let sampler = KernelSampler::new(n)?;
    let mut rng = rng::rng_from(rng::combine(cfg.seed, 2));
    let mut trace = Vec::with_capacity(cfg.steps);

    for _step in 0..cfg.steps {
        let mut batch_grads: Option<Vec<Layer>> = None;
        let mut loss = 0.0;
        for _ in 0..cfg.batch_size {
            let x = &pool[rng.gen_range(0..pool.len())];
            let y = rng.gen_range(0..m);
            let mask = sampler.sample(&mut rng);
            let v_s = oracle.eval(&mask, x, y);
            let v_one = oracle.v_one(x, y);
            let v_zero = oracle.v_zero(x, y);
            let raw = params.forward(x, y)?;
            let (r, d_out) = residual_grad(&raw, |i| mask.get(i), v_s, v_one, v_zero);
            loss += r * r;
            let grads = params.backward(x, y, &d_out)?;
            batch_grads = Some(match batch_grads {
                None => grads,
                Some(mut acc) => {
                    accumulate(&mut acc, &grads);
                    acc
                }
            });
        }
        if let Some(mut grads) = batch_grads {
            scale(&mut grads, 1.0 / cfg.batch_size as f64);
            params.apply(&grads, cfg.alpha);
        }
        trace.push(loss / cfg.batch_size as f64);
    }
    Ok(TrainedExplainer { params, loss_trace: trace })
}

/// Explainer trained against the converged-training utility.
pub fn train_fds<O: ValueOracle + ?Sized>(
    oracle: &O,
    pool: &[Vec<f64>],
    cfg: &ExplainerTrainConfig,
) -> Result<TrainedExplainer> {
    train_pointwise(oracle, pool, cfg)
}

/// Explainer trained against the K-epoch truncated utility. The loop is
/// identical to [`train_fds`]; the approximation lives in the oracle.
pub fn train_afds<O: ValueOracle + ?Sized>(
    oracle: &O,
    pool: &[Vec<f64>],
    cfg: &ExplainerTrainConfig,
) -> Result<TrainedExplainer> {
    train_pointwise(oracle, pool, cfg)
}

/// Grouped explainer training: per sampled (x, y), one update per group,
/// each over a reduced coalition re-expanded to the full player set.
pub fn train_gfds<O: ValueOracle + ?Sized>(
    oracle: &O,
    pool: &[Vec<f64>],
    partition: &GroupPartition,
    cfg: &ExplainerTrainConfig,
) -> Result<TrainedExplainer> {
    if pool.is_empty() {
        return Err(Error::Domain("explainer training pool is empty".into()));
    }
    let n = oracle.n();
    if partition.n() != n {
        return Err(Error::Partition("partition size != oracle player count".into()));
    }
    let m = oracle.m();
    let d = pool[0].len();
    let mut params = ExplainerParams::init(d, n, m, n, cfg.hidden_units, rng::combine(cfg.seed, 1))?;
    // One sampler per reduced coalition size; the reduced mask length depends
    // on the group, so each group draws from a shared seed stream.
    let samplers: Vec<KernelSampler> = (0..partition.n_groups)
        .map(|g| KernelSampler::new(partition.coalition_size(g)))
        .collect::<Result<_>>()?;
    let mut rng = rng::rng_from(rng::combine(cfg.seed, 2));
    let mut trace = Vec::with_capacity(cfg.steps);

    for _step in 0..cfg.steps {
        let x = &pool[rng.gen_range(0..pool.len())];
        let y = rng.gen_range(0..m);
        let v_one = oracle.v_one(x, y);
        let v_zero = oracle.v_zero(x, y);
        let mut loss = 0.0;
        for (sampler, group) in samplers.iter().zip(&partition.groups) {
            let reduced = sampler.sample(&mut rng);
            let full = crate::grouping::gfds_expand(group[0], partition, &reduced)?;
            let v_s = oracle.eval(&full, x, y);
            let raw = params.forward(x, y)?;
            let (r, d_out) = residual_grad(&raw, |i| full.get(i), v_s, v_one, v_zero);
            loss += r * r;
            let grads = params.backward(x, y, &d_out)?;
            params.apply(&grads, cfg.alpha);
        }
        trace.push(loss / partition.n_groups as f64);
    }
    Ok(TrainedExplainer { params, loss_trace: trace })
}

/// Group-as-player explainer training. The split head outputs N group
/// values divided evenly at inference; the penalty head keeps the n-dim
/// output and adds γ times the in-group deviation-from-mean norm.
pub fn train_gfds_plus<O: ValueOracle + ?Sized>(
    oracle: &O,
    pool: &[Vec<f64>],
    partition: &GroupPartition,
    cfg: &ExplainerTrainConfig,
) -> Result<TrainedExplainer> {
    if pool.is_empty() {
        return Err(Error::Domain("explainer training pool is empty".into()));
    }
    if cfg.gamma < 0.0 {
        return Err(Error::Domain("γ must be ≥ 0".into()));
    }
    let n = oracle.n();
    if partition.n() != n {
        return Err(Error::Partition("partition size != oracle player count".into()));
    }
    let m = oracle.m();
    let d = pool[0].len();
    let n_groups = partition.n_groups;
    let out_rows = match cfg.head {
        GfdsPlusHead::NDimSplit => n_groups,
        GfdsPlusHead::NDimPenalty => n,
    };
    let mut params =
        ExplainerParams::init(d, n, m, out_rows, cfg.hidden_units, rng::combine(cfg.seed, 1))?;
    let sampler = KernelSampler::new(n_groups.max(2))?;
    let mut rng = rng::rng_from(rng::combine(cfg.seed, 2));
    let mut trace = Vec::with_capacity(cfg.steps);

    for _step in 0..cfg.steps {
        let mut batch_grads: Option<Vec<Layer>> = None;
        let mut loss = 0.0;
        for _ in 0..cfg.batch_size {
            let x = &pool[rng.gen_range(0..pool.len())];
            let y = rng.gen_range(0..m);
            let group_mask = if n_groups >= 2 {
                sampler.sample(&mut rng)
            } else {
                SubsetMask::ones(1)
            };
            // Groups participate atomically: expand to the full player set.
            let mut full = SubsetMask::zeros(n);
            for g in group_mask.members() {
                for &i in &partition.groups[g] {
                    full.set(i, true);
                }
            }
            let v_s = oracle.eval(&full, x, y);
            let v_one = oracle.v_one(x, y);
            let v_zero = oracle.v_zero(x, y);
            let raw = params.forward(x, y)?;
            let (r, mut d_out) = match cfg.head {
                GfdsPlusHead::NDimSplit => {
                    residual_grad(&raw, |g| group_mask.get(g), v_s, v_one, v_zero)
                }
                GfdsPlusHead::NDimPenalty => {
                    residual_grad(&raw, |i| full.get(i), v_s, v_one, v_zero)
                }
            };
            loss += r * r;
            if cfg.head == GfdsPlusHead::NDimPenalty && cfg.gamma > 0.0 {
                // γ · Σ_g ‖φ̂_{G_g} − mean(φ̂_{G_g})‖₂; the deviation vector is
                // already centered, so its normalized form is the gradient.
                for members in &partition.groups {
                    let mean: f64 =
                        members.iter().map(|&i| raw[i]).sum::<f64>() / members.len() as f64;
                    let dev: Vec<f64> = members.iter().map(|&i| raw[i] - mean).collect();
                    let norm = dev.iter().map(|v| v * v).sum::<f64>().sqrt();
                    loss += cfg.gamma * norm;
                    if norm > 1e-12 {
                        for (&i, dv) in members.iter().zip(&dev) {
                            d_out[i] += cfg.gamma * dv / norm;
                        }
                    }
                }
            }
            let grads = params.backward(x, y, &d_out)?;
            batch_grads = Some(match batch_grads {
                None => grads,
                Some(mut acc) => {
                    accumulate(&mut acc, &grads);
                    acc
                }
            });
        }
        if let Some(mut grads) = batch_grads {
            scale(&mut grads, 1.0 / cfg.batch_size as f64);
            params.apply(&grads, cfg.alpha);
        }
        trace.push(loss / cfg.batch_size as f64);
    }
    Ok(TrainedExplainer { params, loss_trace: trace })
}

fn accumulate(acc: &mut [Layer], grads: &[Layer]) {
    for (a, g) in acc.iter_mut().zip(grads) {
        for (ar, gr) in a.weights.iter_mut().zip(&g.weights) {
            for (av, gv) in ar.iter_mut().zip(gr) {
                *av += gv;
            }
        }
        for (ab, gb) in a.biases.iter_mut().zip(&g.biases) {
            *ab += gb;
        }
    }
}

fn scale(grads: &mut [Layer], factor: f64) {
    for g in grads.iter_mut() {
        for row in &mut g.weights {
            for v in row {
                *v *= factor;
            }
        }
        for v in &mut g.biases {
            *v *= factor;
        }
    }
}

/// Numeric self-check: worst relative error between the backprop gradient
/// (through the normalized squared residual) and central finite differences
/// on a random instance seeded by `seed`.
#[allow(clippy::needless_range_loop)] // indices drive symmetric +h/-h probes
pub fn gradient_check_max_rel_error(seed: u64) -> f64 {
    use rand::Rng;
    let mut rng = rng::rng_from(seed);
    let n = rng.gen_range(3..=6);
    let d = rng.gen_range(1..=3);
    let m = rng.gen_range(2..=3);
    let params = ExplainerParams::init(d, n, m, n, 6, rng::combine(seed, 1)).expect("valid dims");
    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = rng.gen_range(0..m);
    let mask = SubsetMask::from_index(rng.gen_range(1..(1u64 << n) - 1), n);
    let (v_s, v_one, v_zero) =
        (rng.gen_range(0.0..1.0), rng.gen_range(0.5..1.0), rng.gen_range(0.0..0.5));
    let loss_of = |p: &ExplainerParams| -> f64 {
        let raw = p.forward(&x, y).expect("in range");
        let (r, _) = residual_grad(&raw, |i| mask.get(i), v_s, v_one, v_zero);
        r * r
    };
    let raw = params.forward(&x, y).expect("in range");
    let (_, d_out) = residual_grad(&raw, |i| mask.get(i), v_s, v_one, v_zero);
    let grads = params.backward(&x, y, &d_out).expect("in range");
    let h = 1e-5;
    let mut worst = 0.0f64;
    for li in 0..2 {
        for r in 0..params.layers[li].weights.len() {
            for c in 0..params.layers[li].weights[r].len() {
                let mut plus = params.clone();
                plus.layers[li].weights[r][c] += h;
                let mut minus = params.clone();
                minus.layers[li].weights[r][c] -= h;
                let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                let g = grads[li].weights[r][c];
                worst = worst.max((fd - g).abs() / g.abs().max(fd.abs()).max(1e-8));
            }
        }
        for b in 0..params.layers[li].biases.len() {
            let mut plus = params.clone();
            plus.layers[li].biases[b] += h;
            let mut minus = params.clone();
            minus.layers[li].biases[b] -= h;
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let g = grads[li].biases[b];
            worst = worst.max((fd - g).abs() / g.abs().max(fd.abs()).max(1e-8));
        }
    }
    worst
}

// --- checkpoint format: binary params + JSON sidecar ---

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckpointMeta {
    pub variant: Variant,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub n_groups: usize,
    pub k: usize,
    pub gamma: f64,
    pub seed: u64,
}

pub fn save_checkpoint(params: &ExplainerParams, meta: &CheckpointMeta, base: &Path) -> Result<()> {
    let bin = base.with_extension("bin");
    std::fs::write(&bin, to_bytes(params)).map_err(|e| Error::Io { path: bin, source: e })?;
    let json = base.with_extension("json");
    let body = serde_json::to_string_pretty(meta).expect("serializable");
    std::fs::write(&json, body).map_err(|e| Error::Io { path: json, source: e })?;
    Ok(())
}

pub fn load_checkpoint(base: &Path) -> Result<(ExplainerParams, CheckpointMeta)> {
    let bin = base.with_extension("bin");
    let bytes = std::fs::read(&bin).map_err(|e| Error::Io { path: bin, source: e })?;
    let params = from_bytes(&bytes)?;
    let json = base.with_extension("json");
    let body = std::fs::read_to_string(&json).map_err(|e| Error::Io { path: json, source: e })?;
    let meta = serde_json::from_str(&body).map_err(|e| Error::Format(e.to_string()))?;
    Ok((params, meta))
}

pub fn to_bytes(params: &ExplainerParams) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(EXPLAINER_MAGIC);
    for dim in [params.feature_dim, params.n, params.m, params.out_rows, params.hidden_units] {
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

pub fn from_bytes(bytes: &[u8]) -> Result<ExplainerParams> {
    if bytes.len() < 32 || &bytes[0..4] != EXPLAINER_MAGIC {
        return Err(Error::Format("explainer blob: bad header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (feature_dim, n, m, out_rows, hidden) = (word(0), word(1), word(2), word(3), word(4));
    let init_seed = u64::from_le_bytes(bytes[24..32].try_into().unwrap());
    let mut pos = 32;
    let mut read = |count: usize| -> Result<Vec<f64>> {
        let need = count * 8;
        if pos + need > bytes.len() {
            return Err(Error::Format("explainer blob: truncated".into()));
        }
        let vals = bytes[pos..pos + need]
            .chunks(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        pos += need;
        Ok(vals)
    };
    let input_dim = feature_dim + m;
    let mut read_layer = |out: usize, inp: usize| -> Result<Layer> {
        let mut weights = Vec::with_capacity(out);
        for _ in 0..out {
            weights.push(read(inp)?);
        }
        Ok(Layer { weights, biases: read(out)? })
    };
    let layers = vec![read_layer(hidden, input_dim)?, read_layer(out_rows * m, hidden)?];
    Ok(ExplainerParams {
        feature_dim,
        n,
        m,
        out_rows,
        hidden_units: hidden,
        layers,
        init_seed,
    })
}
