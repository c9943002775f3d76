//! Value functions over coalition masks: the converged-training utility,
//! the K-epoch truncated utility, explicit tabular games for testing, and
//! a mask-keyed evaluation cache.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{self, Architecture, ModelParams, TrainConfig};
use crate::rng;

/// Loss-improvement threshold declaring a sub-model "trained to converge":
/// relative improvement over the trailing 5 epochs below this, or epoch cap.
pub const CONVERGENCE_TOL: f64 = 1e-5;

pub const MAX_ENUM_PLAYERS: usize = 20;

/// Length-n binary coalition indicator with cached popcount.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    bits: Vec<bool>,
    ones: usize,
}

impl SubsetMask {
    pub fn zeros(n: usize) -> Self {
        SubsetMask { bits: vec![false; n], ones: 0 }
    }

    pub fn ones(n: usize) -> Self {
        SubsetMask { bits: vec![true; n], ones: n }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        let ones = bits.iter().filter(|&&b| b).count();
        SubsetMask { bits, ones }
    }

    /// Mask from the low n bits of an integer (bit i ↔ player i).
    pub fn from_index(index: u64, n: usize) -> Self {
        Self::from_bits((0..n).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn to_index(&self) -> u64 {
        debug_assert!(self.len() <= 64);
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| if b { acc | 1 << i } else { acc })
    }

    pub fn singleton(i: usize, n: usize) -> Self {
        let mut m = Self::zeros(n);
        m.set(i, true);
        m
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ones == 0
    }

    pub fn is_full(&self) -> bool {
        self.ones == self.bits.len()
    }

    pub fn popcount(&self) -> usize {
        self.ones
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if self.bits[i] != value {
            self.ones = if value { self.ones + 1 } else { self.ones - 1 };
            self.bits[i] = value;
        }
    }

    pub fn with_bit(&self, i: usize) -> Self {
        let mut m = self.clone();
        m.set(i, true);
        m
    }

    pub fn without_bit(&self, i: usize) -> Self {
        let mut m = self.clone();
        m.set(i, false);
        m
    }

    /// Indices of the set bits.
    pub fn members(&self) -> Vec<usize> {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    /// Packed 64-bit words, for hashing and seed derivation.
    pub fn words(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.bits.len().div_ceil(64)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }
}

/// A cooperative game with a fixed player count: the interface every
/// Shapley solver consumes. `eval` must be deterministic in the mask.
pub trait Game {
    fn num_players(&self) -> usize;
    fn eval(&self, mask: &SubsetMask) -> f64;

    fn v_one(&self) -> f64 {
        self.eval(&SubsetMask::ones(self.num_players()))
    }

    fn v_zero(&self) -> f64 {
        self.eval(&SubsetMask::zeros(self.num_players()))
    }
}

impl<G: Game + ?Sized> Game for &G {
    fn num_players(&self) -> usize {
        (**self).num_players()
    }
    fn eval(&self, mask: &SubsetMask) -> f64 {
        (**self).eval(mask)
    }
}

/// Explicit table of 2^n utilities, indexed by mask-as-integer.
#[derive(Debug, Clone)]
pub struct TabularGame {
    n: usize,
    table: Vec<f64>,
}

impl TabularGame {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        if n > MAX_ENUM_PLAYERS {
            return Err(Error::Capacity(format!("tabular game limited to n ≤ {MAX_ENUM_PLAYERS}, got {n}")));
        }
        if table.len() != 1 << n {
            return Err(Error::Consistency(format!(
                "table length {} != 2^{n}",
                table.len()
            )));
        }
        Ok(TabularGame { n, table })
    }

    /// Additive game v(s) = Σ_{i∈s} w_i.
    pub fn additive(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        let table = (0..1u64 << n)
            .map(|idx| {
                weights
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| idx >> i & 1 == 1)
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect();
        Self::new(n, table)
    }

    /// Uniform random table in [0,1) under a fixed seed.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        use rand::Rng;
        let mut rng = rng::rng_from(seed);
        let table = (0..1usize << n).map(|_| rng.gen::<f64>()).collect();
        Self::new(n, table)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Structured-text format: first line n, then 2^n lines "maskInteger value".
    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
        let mut lines = BufReader::new(f).lines().enumerate();
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Format("empty game file".into()))?;
        let first = first.map_err(|e| Error::Io { path: path.into(), source: e })?;
        let n: usize = first
            .trim()
            .parse()
            .map_err(|_| Error::Parse { row: 0, msg: format!("bad player count {first:?}") })?;
        if n > MAX_ENUM_PLAYERS {
            return Err(Error::Capacity(format!("game file declares n={n} > {MAX_ENUM_PLAYERS}")));
        }
        let mut table = vec![f64::NAN; 1 << n];
        for (row, line) in lines {
            let line = line.map_err(|e| Error::Io { path: path.into(), source: e })?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let idx: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse { row, msg: "bad mask integer".into() })?;
            let val: f64 = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse { row, msg: "bad value".into() })?;
            if idx >= table.len() {
                return Err(Error::Parse { row, msg: format!("mask {idx} out of range") });
            }
            table[idx] = val;
        }
        if table.iter().any(|v| v.is_nan()) {
            return Err(Error::Format("game file is missing mask entries".into()));
        }
        Ok(TabularGame { n, table })
    }
}

impl Game for TabularGame {
    fn num_players(&self) -> usize {
        self.n
    }

    fn eval(&self, mask: &SubsetMask) -> f64 {
        assert_eq!(mask.len(), self.n, "mask length {} != game size {}", mask.len(), self.n);
        self.table[mask.to_index() as usize]
    }
}

/// How sub-service models are trained for a utility evaluation.
#[derive(Debug, Clone, Copy)]
pub enum UtilityMode {
    /// Train to convergence (trailing-improvement criterion, epoch cap).
    Converged,
    /// Exactly K epochs at learning rate β·lr.
    Truncated { k: usize },
}

/// Maps (coalition mask, test point, label) to the sub-service model's
/// softmax confidence. The empty coalition is the uniform predictor 1/m.
pub struct ModelUtility<'a> {
    pub data: &'a Dataset,
    pub arch: Architecture,
    pub cfg: TrainConfig,
    pub mode: UtilityMode,
    cache: EvalCache,
}

impl<'a> ModelUtility<'a> {
    pub fn converged(data: &'a Dataset, arch: Architecture, cfg: TrainConfig) -> Self {
        ModelUtility { data, arch, cfg, mode: UtilityMode::Converged, cache: EvalCache::default() }
    }

    /// K-epoch truncated utility; `cfg.lr_scale` carries β.
    pub fn truncated(data: &'a Dataset, arch: Architecture, cfg: TrainConfig, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("K must be ≥ 1".into()));
        }
        Ok(ModelUtility { data, arch, cfg, mode: UtilityMode::Truncated { k }, cache: EvalCache::default() })
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn m(&self) -> usize {
        self.data.m
    }

    /// Train (or fetch) the sub-service model for a coalition and return its
    /// confidence on (x, y). Deterministic: the sub-model seed is a hash of
    /// (cfg.seed, mask bits) so distinct coalitions get independent streams.
    pub fn eval(&self, mask: &SubsetMask, x: &[f64], y: usize) -> f64 {
        assert_eq!(mask.len(), self.data.n(), "mask length != n");
        if mask.is_empty() {
            return 1.0 / self.data.m as f64;
        }
        let key = CacheKey::new(mask, x, y);
        if let Some(v) = self.cache.get(&key) {
            return v;
        }
        let params = self.sub_model(mask);
        let v = model::predict_proba(&params, x).expect("dims checked")[y];
        self.cache.insert(key, v);
        v
    }

    /// The trained sub-service model for a coalition (uncached).
    pub fn sub_model(&self, mask: &SubsetMask) -> ModelParams {
        let sub_seed = rng::mask_seed(self.cfg.seed, &mask.words());
        let init = model::init(self.arch, rng::combine(sub_seed, 1)).expect("valid arch");
        let idx = mask.members();
        let cfg = TrainConfig { seed: sub_seed, ..self.cfg };
        let out = match self.mode {
            UtilityMode::Converged => {
                model::train_to_convergence(&init, self.data, &idx, &cfg, CONVERGENCE_TOL)
            }
            UtilityMode::Truncated { k } => {
                model::train(&init, self.data, &idx, &TrainConfig { epochs: k, ..cfg }, false)
            }
        };
        out.expect("nonempty coalition").params
    }

    /// Fixed-(x, y) game view for the Shapley solvers.
    pub fn game<'b>(&'b self, x: &'b [f64], y: usize) -> ModelGame<'b> {
        ModelGame { utility: self, x, y }
    }

    pub fn cache_stats(&self) -> (u64, u64) {
        self.cache.stats()
    }

    pub fn clear_cache(&self) {
        self.cache.clear();
    }
}

pub struct ModelGame<'a> {
    utility: &'a ModelUtility<'a>,
    x: &'a [f64],
    y: usize,
}

impl Game for ModelGame<'_> {
    fn num_players(&self) -> usize {
        self.utility.n()
    }

    fn eval(&self, mask: &SubsetMask) -> f64 {
        self.utility.eval(mask, self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    mask: Vec<u64>,
    x_hash: u64,
    y: usize,
}

impl CacheKey {
    fn new(mask: &SubsetMask, x: &[f64], y: usize) -> Self {
        let mut h = rng::mix(x.len() as u64);
        for v in x {
            h = rng::combine(h, v.to_bits());
        }
        CacheKey { mask: mask.words(), x_hash: h, y }
    }
}

/// Memoizes (mask, x, y) → value. Values are deterministic, so concurrent
/// insert collisions are benign (last writer wins with an identical value).
#[derive(Default)]
pub struct EvalCache {
    map: Mutex<HashMap<CacheKey, f64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl EvalCache {
    fn get(&self, key: &CacheKey) -> Option<f64> {
        let found = self.map.lock().unwrap().get(key).copied();
        match found {
            Some(v) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                Some(v)
            }
            None => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    fn insert(&self, key: CacheKey, value: f64) {
        self.map.lock().unwrap().insert(key, value);
    }

    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    pub fn clear(&self) {
        self.map.lock().unwrap().clear();
        self.hits.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
    }
}

/// Memoizing wrapper for any game; useful when a solver revisits masks.
pub struct CachedGame<G: Game> {
    inner: G,
    map: Mutex<HashMap<Vec<u64>, f64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<G: Game> CachedGame<G> {
    pub fn new(inner: G) -> Self {
        CachedGame {
            inner,
            map: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    pub fn clear(&self) {
        self.map.lock().unwrap().clear();
    }
}

impl<G: Game> Game for CachedGame<G> {
    fn num_players(&self) -> usize {
        self.inner.num_players()
    }

    fn eval(&self, mask: &SubsetMask) -> f64 {
        let key = mask.words();
        if let Some(v) = self.map.lock().unwrap().get(&key).copied() {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return v;
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = self.inner.eval(mask);
        self.map.lock().unwrap().insert(key, v);
        v
    }
}
