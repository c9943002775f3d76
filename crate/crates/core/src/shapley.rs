//! Ground-truth and sampled Shapley machinery: exact enumeration by subset
//! sum and by permutation average, truncated Monte Carlo, leave-one-out,
//! kernel-weighted subset sampling, the constrained weighted least squares
//! solver, and additive efficient normalization.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::utility::{Game, SubsetMask, MAX_ENUM_PLAYERS};

/// Ridge added to the sampled-mode normal equations.
const SAMPLED_RIDGE: f64 = 1e-10;

/// Length-n attribution values with an efficiency certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShapleyVector {
    pub values: Vec<f64>,
    /// |Σφ − (v(1) − v(0))|.
    pub efficiency_gap: f64,
    pub v_one: f64,
    pub v_zero: f64,
}

impl ShapleyVector {
    pub fn new(values: Vec<f64>, v_one: f64, v_zero: f64) -> Self {
        let gap = (values.iter().sum::<f64>() - (v_one - v_zero)).abs();
        ShapleyVector { values, efficiency_gap: gap, v_one, v_zero }
    }
}

/// ln C(n, k); binomials are kept in log space up to n = 20.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    ln_binomial(n, k).exp()
}

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("game must have at least one player".into()));
    }
    if n > MAX_ENUM_PLAYERS {
        return Err(Error::Capacity(format!(
            "enumeration limited to n ≤ {MAX_ENUM_PLAYERS}, got {n}"
        )));
    }
    Ok(())
}

/// Every utility value of an n-player game, indexed by mask integer.
fn full_table<G: Game>(game: &G, n: usize) -> Vec<f64> {
    (0..1u64 << n)
        .map(|idx| game.eval(&SubsetMask::from_index(idx, n)))
        .collect()
}

/// Exact Shapley values by the subset-sum formula:
/// φ_i = (1/n) Σ_{s: s_i=0} C(n−1, |s|)^{−1} (v(s+e_i) − v(s)).
pub fn exact_shapley<G: Game>(game: &G) -> Result<ShapleyVector> {
    let n = game.num_players();
    check_capacity(n)?;
    let table = full_table(game, n);
    Ok(exact_from_table(&table, n))
}

pub(crate) fn exact_from_table(table: &[f64], n: usize) -> ShapleyVector {
    // C(n−1, k)^{-1} for k = 0..n−1, shared across players.
    let inv_binom: Vec<f64> = (0..n).map(|k| (-ln_binomial(n - 1, k)).exp()).collect();
    let mut values = vec![0.0; n];
    for (idx, &v_s) in table.iter().enumerate() {
        let size = (idx as u64).count_ones() as usize;
        for i in 0..n {
            if idx >> i & 1 == 0 {
                let with = table[idx | 1 << i];
                values[i] += inv_binom[size] * (with - v_s);
            }
        }
    }
    for v in &mut values {
        *v /= n as f64;
    }
    ShapleyVector::new(values, table[table.len() - 1], table[0])
}

/// Exact Shapley values by averaging marginal contributions over all n!
/// player orderings. Independent route used to cross-check [`exact_shapley`].
pub fn exact_shapley_permutation<G: Game>(game: &G) -> Result<ShapleyVector> {
    let n = game.num_players();
    check_capacity(n)?;
    if n > 9 {
        return Err(Error::Capacity(format!("n! enumeration limited to n ≤ 9, got {n}")));
    }
    let table = full_table(game, n);
    let mut sums = vec![0.0; n];
    let mut count = 0u64;
    let mut perm: Vec<usize> = (0..n).collect();
    // Lexicographic enumeration of all permutations.
    loop {
        let mut idx = 0usize;
        let mut prev = table[0];
        for &p in &perm {
            idx |= 1 << p;
            let cur = table[idx];
            sums[p] += cur - prev;
            prev = cur;
        }
        count += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let values = sums.iter().map(|s| s / count as f64).collect();
    Ok(ShapleyVector::new(values, table[table.len() - 1], table[0]))
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Truncated Monte Carlo estimate: mean marginal contribution over sampled
/// permutations. Within a permutation, once |v(prefix) − v(1)| drops below
/// `truncation_tol` the remaining marginals are taken as zero. Unbiased when
/// `truncation_tol` is 0.
pub fn permutation_shapley<G: Game>(
    game: &G,
    permutations: usize,
    truncation_tol: f64,
    seed: u64,
) -> Result<ShapleyVector> {
    let n = game.num_players();
    if n == 0 {
        return Err(Error::Domain("game must have at least one player".into()));
    }
    if permutations == 0 {
        return Err(Error::Domain("permutations must be ≥ 1".into()));
    }
    let v_one = game.v_one();
    let v_zero = game.v_zero();
    let mut rng = rng::rng_from(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sums = vec![0.0; n];
    for _ in 0..permutations {
        perm.shuffle(&mut rng);
        let mut mask = SubsetMask::zeros(n);
        let mut prev = v_zero;
        let mut truncated = false;
        for &p in &perm {
            if truncated {
                break; // remaining marginals stay 0
            }
            mask.set(p, true);
            let cur = game.eval(&mask);
            sums[p] += cur - prev;
            prev = cur;
            if (cur - v_one).abs() < truncation_tol {
                truncated = true;
            }
        }
    }
    let values = sums.iter().map(|s| s / permutations as f64).collect();
    Ok(ShapleyVector::new(values, v_one, v_zero))
}

/// Default truncation threshold, relative to the full-coalition swing.
pub fn default_truncation_tol(v_one: f64, v_zero: f64) -> f64 {
    0.001 * (v_one - v_zero).abs()
}

/// Leave-one-out values: v(1) − v(1 − e_i).
pub fn loo_values<G: Game>(game: &G) -> Vec<f64> {
    let n = game.num_players();
    let v_one = game.v_one();
    let full = SubsetMask::ones(n);
    (0..n).map(|i| v_one - game.eval(&full.without_bit(i))).collect()
}

/// Unnormalized Shapley kernel weight (n−1)/(C(n,k)·k·(n−k)) for 0 < k < n.
pub fn kernel_weight(n: usize, k: usize) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("kernel weight undefined for k={k}, n={n}")));
    }
    let ln_w = ((n - 1) as f64).ln() - ln_binomial(n, k) - (k as f64).ln() - ((n - k) as f64).ln();
    Ok(ln_w.exp())
}

/// Subset-size probabilities under the Shapley kernel:
/// P(|s| = k) ∝ C(n,k) · kernel_weight(n,k) = (n−1)/(k·(n−k)).
pub fn kernel_size_probs(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Domain("kernel sampling needs n ≥ 2".into()));
    }
    let raw: Vec<f64> = (1..n).map(|k| 1.0 / (k as f64 * (n - k) as f64)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.iter().map(|w| w / total).collect())
}

/// Draw a coalition from the Shapley kernel: size k with probability
/// ∝ C(n,k)·kernel_weight(n,k), then a uniform size-k subset. Never emits
/// the empty or grand coalition.
pub fn kernel_sample<R: Rng>(n: usize, probs: &[f64], rng: &mut R) -> SubsetMask {
    debug_assert_eq!(probs.len(), n - 1);
    let mut u: f64 = rng.gen();
    let mut k = 1;
    for (i, p) in probs.iter().enumerate() {
        if u < *p || i == probs.len() - 1 {
            k = i + 1;
            break;
        }
        u -= p;
    }
    // Partial Fisher-Yates: uniform size-k subset of 0..n.
    let mut pool: Vec<usize> = (0..n).collect();
    let mut mask = SubsetMask::zeros(n);
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
        mask.set(pool[i], true);
    }
    mask
}

/// Convenience sampler owning its size distribution.
pub struct KernelSampler {
    n: usize,
    probs: Vec<f64>,
}

impl KernelSampler {
    pub fn new(n: usize) -> Result<Self> {
        Ok(KernelSampler { n, probs: kernel_size_probs(n)? })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> SubsetMask {
        kernel_sample(self.n, &self.probs, rng)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum CwlsMode {
    /// All 2^n − 2 proper coalitions, weighted by the exact kernel.
    Enumerate,
    /// Monte Carlo over kernel draws.
    Sampled { num_samples: usize, seed: u64 },
}

/// Constrained weighted least squares characterization:
/// min_φ Σ_s P(s)(v(s) − v(0) − sᵀφ)² subject to 1ᵀφ = v(1) − v(0),
/// solved through the KKT system with a Lagrange multiplier. Enumerate mode
/// recovers exact Shapley values.
pub fn cwls_solve<G: Game>(game: &G, mode: CwlsMode) -> Result<ShapleyVector> {
    let n = game.num_players();
    if n == 0 {
        return Err(Error::Domain("game must have at least one player".into()));
    }
    let v_one = game.v_one();
    let v_zero = game.v_zero();
    if n == 1 {
        // Forced by the efficiency constraint.
        return Ok(ShapleyVector::new(vec![v_one - v_zero], v_one, v_zero));
    }

    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    let mut ridge = 0.0;
    match mode {
        CwlsMode::Enumerate => {
            check_capacity(n)?;
            for idx in 1..(1u64 << n) - 1 {
                let mask = SubsetMask::from_index(idx, n);
                let w = kernel_weight(n, mask.popcount())?;
                let r = game.eval(&mask) - v_zero;
                let members = mask.members();
                for &i in &members {
                    b[i] += w * r;
                    for &j in &members {
                        a[(i, j)] += w;
                    }
                }
            }
        }
        CwlsMode::Sampled { num_samples, seed } => {
            if num_samples == 0 {
                return Err(Error::Domain("numSamples must be ≥ 1".into()));
            }
            ridge = SAMPLED_RIDGE;
            let sampler = KernelSampler::new(n)?;
            let mut rng = rng::rng_from(seed);
            for _ in 0..num_samples {
                let mask = sampler.sample(&mut rng);
                let r = game.eval(&mask) - v_zero;
                let members = mask.members();
                for &i in &members {
                    b[i] += r;
                    for &j in &members {
                        a[(i, j)] += 1.0;
                    }
                }
            }
        }
    }

    // KKT system: [2(A + ridge·I)  1; 1ᵀ  0] [φ; λ] = [2b; v1 − v0].
    let mut kkt = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut rhs = DVector::<f64>::zeros(n + 1);
    for i in 0..n {
        for j in 0..n {
            kkt[(i, j)] = 2.0 * a[(i, j)];
        }
        kkt[(i, i)] += 2.0 * ridge;
        kkt[(i, n)] = 1.0;
        kkt[(n, i)] = 1.0;
        rhs[i] = 2.0 * b[i];
    }
    rhs[n] = v_one - v_zero;
    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Domain("singular CWLS system".into()))?;
    let values = sol.as_slice()[..n].to_vec();
    Ok(ShapleyVector::new(values, v_one, v_zero))
}

/// Additive efficient normalization: a uniform shift making the vector sum
/// to v(1) − v(0). Pairwise differences are preserved exactly.
pub fn efficient_normalize(raw: &[f64], v_one: f64, v_zero: f64) -> ShapleyVector {
    let n = raw.len();
    let shift = (v_one - v_zero - raw.iter().sum::<f64>()) / n as f64;
    ShapleyVector::new(raw.iter().map(|v| v + shift).collect(), v_one, v_zero)
}
