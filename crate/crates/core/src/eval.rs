//! Value-loss metric H_η, data-removal curves, and the reward-allocation
//! front-end that splits a payment proportionally to attributions.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{self, Architecture, ModelParams, TrainConfig};
use crate::rng;
use crate::shapley::ShapleyVector;

const PROB_FLOOR: f64 = 1e-12;

/// H_η values for one ranking, one η grid, one seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RemovalCurve {
    pub etas: Vec<f64>,
    pub h_values: Vec<f64>,
    /// Label of the method that produced the ranking.
    pub ranking_source: String,
    pub seed: u64,
}

/// Proportional split of a payment `total` across providers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RewardSplit {
    pub per_provider: Vec<f64>,
    pub total: f64,
    /// True when negative attributions were clamped to zero before the split.
    pub clamped: bool,
}

/// Mean cross-entropy between one-hot true labels and the model's softmax
/// output, probabilities clamped at 1e−12 before the log.
pub fn value_loss(test: &Dataset, params: &ModelParams) -> Result<f64> {
    if test.n() == 0 {
        return Err(Error::Domain("value_loss needs a nonempty test set".into()));
    }
    let mut total = 0.0;
    for (x, &y) in test.features.iter().zip(&test.labels) {
        let p = model::predict_proba(params, x)?[y].max(PROB_FLOOR);
        total -= p.ln();
    }
    Ok(total / test.n() as f64)
}

/// For each η, drop the ⌈η·n⌉ highest-ranked points (ties broken toward the
/// lower index), retrain from scratch with a fresh per-η seed, and record
/// H_η on the test set.
#[allow(clippy::too_many_arguments)]
pub fn removal_curve(
    data: &Dataset,
    rankings: &[f64],
    etas: &[f64],
    arch: &Architecture,
    retrain_cfg: &TrainConfig,
    test: &Dataset,
    ranking_source: &str,
    seed: u64,
) -> Result<RemovalCurve> {
    let n = data.n();
    if rankings.len() != n {
        return Err(Error::Dimension { expected: n, got: rankings.len() });
    }
    if etas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("etas must be strictly increasing".into()));
    }
    if etas.iter().any(|&e| !(0.0..1.0).contains(&e)) {
        return Err(Error::Domain("each η must lie in [0, 1)".into()));
    }
    // Descending by ranking; on ties the lower index is removed first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        rankings[b].partial_cmp(&rankings[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });

    let mut h_values = Vec::with_capacity(etas.len());
    for (idx, &eta) in etas.iter().enumerate() {
        let drop = (eta * n as f64).ceil() as usize;
        let remaining = n - drop;
        if remaining < data.m {
            return Err(Error::Capacity(format!(
                "η={eta} leaves {remaining} points for {} classes",
                data.m
            )));
        }
        let mut keep: Vec<usize> = order[drop..].to_vec();
        keep.sort_unstable();
        let subset = data.subset(&keep)?;
        let mut cfg = *retrain_cfg;
        cfg.seed = rng::combine(seed, idx as u64 + 1);
        let outcome = model::fit(arch, &subset, &cfg, crate::utility::CONVERGENCE_TOL)?;
        h_values.push(value_loss(test, &outcome.params)?);
    }
    Ok(RemovalCurve { etas: etas.to_vec(), h_values, ranking_source: ranking_source.into(), seed })
}

/// Proportional reward split c_i = φ_i·c / Σφ_j, negatives clamped to zero
/// first (and flagged). A (clamped) attribution sum within 1e−12 of zero
/// makes the split undefined.
pub fn allocate_rewards(phi: &ShapleyVector, c: f64) -> Result<RewardSplit> {
    if c < 0.0 {
        return Err(Error::Domain("reward must be ≥ 0".into()));
    }
    let clamped = phi.values.iter().any(|&v| v < 0.0);
    let weights: Vec<f64> = phi.values.iter().map(|&v| v.max(0.0)).collect();
    let sum: f64 = weights.iter().sum();
    if sum.abs() <= 1e-12 {
        return Err(Error::UndefinedSplit);
    }
    let per_provider = weights.iter().map(|w| w * c / sum).collect();
    Ok(RewardSplit { per_provider, total: c, clamped })
}

/// Rows `eta,h_value,method,seed`, one per curve point, plot-ready.
pub fn write_removal_csv<W: Write>(curves: &[RemovalCurve], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["eta", "h_value", "method", "seed"])
        .map_err(|e| Error::Format(e.to_string()))?;
    for curve in curves {
        for (eta, h) in curve.etas.iter().zip(&curve.h_values) {
            w.write_record([
                eta.to_string(),
                h.to_string(),
                curve.ranking_source.clone(),
                curve.seed.to_string(),
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

pub fn write_removal_csv_file(curves: &[RemovalCurve], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    write_removal_csv(curves, file)
}

/// Spearman rank correlation; ties get the mean of their rank range.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spearman needs equal lengths");
    let ra = fractional_ranks(a);
    let rb = fractional_ranks(b);
    pearson(&ra, &rb)
}

fn fractional_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&x, &y| v[x].partial_cmp(&v[y]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{self, SyntheticKind, SyntheticSpec};

    fn blobs(n: usize, seed: u64) -> Dataset {
        data::generate(&SyntheticSpec {
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
    fn value_loss_matches_hand_formula() {
        // logistic with zero weights → uniform output; m=2 → ln 2
        let ds = blobs(8, 0);
        let arch = Architecture::logistic(2, 2);
        let zero = model::init(arch, 0).unwrap();
        let mut uniform = zero.clone();
        for layer in &mut uniform.layers {
            for row in &mut layer.weights {
                row.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let h = value_loss(&ds, &uniform).unwrap();
        assert!((h - (2f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn value_loss_single_sample_half_probability() {
        // logits (ln 2, 0) on a 2-class logistic → p = (2/3, 1/3); use
        // bias-only weights so the probe input is ignored.
        let arch = Architecture::logistic(1, 2);
        let mut params = model::init(arch, 0).unwrap();
        for row in &mut params.layers[0].weights {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        params.layers[0].biases = vec![0.0, 0.0];
        let ds = Dataset::new(vec![vec![0.0]], vec![0], 2).unwrap();
        let h = value_loss(&ds, &params).unwrap();
        assert!((h - (0.5f64).ln().abs()).abs() < 1e-12, "{h}");
    }

    #[test]
    fn value_loss_perfect_predictor_tends_to_zero() {
        let arch = Architecture::logistic(1, 2);
        let mut params = model::init(arch, 0).unwrap();
        params.layers[0].weights = vec![vec![0.0], vec![0.0]];
        params.layers[0].biases = vec![60.0, 0.0];
        let ds = Dataset::new(vec![vec![0.0]], vec![0], 2).unwrap();
        let h = value_loss(&ds, &params).unwrap();
        assert!((0.0..1e-12).contains(&h), "{h}");
    }

    #[test]
    fn removal_eta_zero_equals_full_model_loss() {
        let ds = blobs(12, 1);
        let test = blobs(12, 2);
        let arch = Architecture::logistic(2, 2);
        let cfg = TrainConfig::default();
        let curve = removal_curve(
            &ds,
            &[0.0; 12],
            &[0.0],
            &arch,
            &cfg,
            &test,
            "noop",
            7,
        )
        .unwrap();
        let mut full_cfg = cfg;
        full_cfg.seed = rng::combine(7, 1);
        let full = model::fit(&arch, &ds, &full_cfg, crate::utility::CONVERGENCE_TOL).unwrap().params;
        let expect = value_loss(&test, &full).unwrap();
        assert!((curve.h_values[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn tied_rankings_remove_lowest_indices() {
        let ds = blobs(10, 3);
        let test = blobs(10, 4);
        let arch = Architecture::logistic(2, 2);
        let cfg = TrainConfig::default();
        // all-equal rankings: removal set must be indices {0,1,2}
        let tied = removal_curve(&ds, &[1.0; 10], &[0.3], &arch, &cfg, &test, "tied", 5)
            .unwrap();
        // explicit ranking putting the top 3 at indices 0,1,2
        let mut explicit_rank = vec![0.0; 10];
        explicit_rank[0] = 3.0;
        explicit_rank[1] = 2.0;
        explicit_rank[2] = 1.0;
        let explicit =
            removal_curve(&ds, &explicit_rank, &[0.3], &arch, &cfg, &test, "explicit", 5).unwrap();
        assert_eq!(tied.h_values, explicit.h_values);
    }

    #[test]
    fn removal_is_deterministic() {
        let ds = blobs(10, 6);
        let test = blobs(10, 7);
        let arch = Architecture::logistic(2, 2);
        let cfg = TrainConfig::default();
        let rank: Vec<f64> = (0..10).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = removal_curve(&ds, &rank, &[0.1, 0.3], &arch, &cfg, &test, "m", 9).unwrap();
        let b = removal_curve(&ds, &rank, &[0.1, 0.3], &arch, &cfg, &test, "m", 9).unwrap();
        assert_eq!(a.h_values, b.h_values);
    }

    #[test]
    fn too_aggressive_eta_is_capacity_error() {
        let ds = blobs(4, 8);
        let test = blobs(4, 9);
        let arch = Architecture::logistic(2, 2);
        let err = removal_curve(
            &ds,
            &[0.0; 4],
            &[0.9],
            &arch,
            &TrainConfig::default(),
            &test,
            "m",
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn non_increasing_etas_rejected() {
        let ds = blobs(6, 10);
        let err = removal_curve(
            &ds,
            &[0.0; 6],
            &[0.2, 0.2],
            &Architecture::logistic(2, 2),
            &TrainConfig::default(),
            &ds,
            "m",
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn rewards_proportional_split() {
        let phi = ShapleyVector::new(vec![1.0, 3.0], 4.0, 0.0);
        let split = allocate_rewards(&phi, 100.0).unwrap();
        assert_eq!(split.per_provider, vec![25.0, 75.0]);
        assert!(!split.clamped);
    }

    #[test]
    fn rewards_zero_total() {
        let phi = ShapleyVector::new(vec![0.5, 0.5], 1.0, 0.0);
        let split = allocate_rewards(&phi, 0.0).unwrap();
        assert_eq!(split.per_provider, vec![0.0, 0.0]);
    }

    #[test]
    fn rewards_clamp_negative() {
        let phi = ShapleyVector::new(vec![-1.0, 3.0], 2.0, 0.0);
        let split = allocate_rewards(&phi, 100.0).unwrap();
        assert_eq!(split.per_provider, vec![0.0, 100.0]);
        assert!(split.clamped);
    }

    #[test]
    fn rewards_scale_invariant_and_undefined_split() {
        let a = allocate_rewards(&ShapleyVector::new(vec![0.2, 0.6], 0.8, 0.0), 10.0).unwrap();
        let b = allocate_rewards(&ShapleyVector::new(vec![0.4, 1.2], 1.6, 0.0), 10.0).unwrap();
        assert_eq!(a.per_provider, b.per_provider);
        let err = allocate_rewards(&ShapleyVector::new(vec![-1.0, -2.0], -3.0, 0.0), 5.0)
            .unwrap_err();
        assert!(matches!(err, Error::UndefinedSplit));
    }

    #[test]
    fn reward_split_sums_to_total() {
        let phi = ShapleyVector::new(vec![0.11, 0.47, -0.02, 0.9], 1.46, 0.0);
        let split = allocate_rewards(&phi, 37.5).unwrap();
        let sum: f64 = split.per_provider.iter().sum();
        assert!((sum - 37.5).abs() < 1e-9);
        assert!(split.per_provider.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn csv_format_matches_contract() {
        let curve = RemovalCurve {
            etas: vec![0.1, 0.2],
            h_values: vec![0.5, 0.75],
            ranking_source: "exact".into(),
            seed: 42,
        };
        let mut buf = Vec::new();
        write_removal_csv(std::slice::from_ref(&curve), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("eta,h_value,method,seed"));
        assert_eq!(lines.next(), Some("0.1,0.5,exact,42"));
        assert_eq!(lines.next(), Some("0.2,0.75,exact,42"));
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        // monotone transform leaves ρ at 1
        let a = [0.3, -1.0, 2.0, 0.7];
        let b: Vec<f64> = a.iter().map(|v: &f64| v.exp()).collect();
        assert!((spearman(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shapley_ranked_removal_hurts_more_than_keeping_best() {
        // directional sanity at tiny scale: removing the top-ranked points
        // (by exact Shapley) raises H more than removing the bottom-ranked.
        use crate::shapley::exact_shapley;
        use crate::utility::ModelUtility;
        let ds = blobs(8, 11);
        let test = blobs(16, 12);
        let arch = Architecture::logistic(2, 2);
        let cfg = TrainConfig::default();
        let util = ModelUtility::converged(&ds, arch, cfg);
        // value of the aggregate prediction game averaged over the test set
        let mut phi = vec![0.0; 8];
        for (x, &y) in test.features.iter().take(4).zip(&test.labels) {
            let game = util.game(x, y);
            let sv = exact_shapley(&game).unwrap();
            for (p, v) in phi.iter_mut().zip(&sv.values) {
                *p += v;
            }
        }
        let top = removal_curve(&ds, &phi, &[0.25], &arch, &cfg, &test, "top", 3).unwrap();
        let inverted: Vec<f64> = phi.iter().map(|v| -v).collect();
        let bottom = removal_curve(&ds, &inverted, &[0.25], &arch, &cfg, &test, "bottom", 3)
            .unwrap();
        assert!(
            top.h_values[0] >= bottom.h_values[0] - 0.05,
            "top {} bottom {}",
            top.h_values[0],
            bottom.h_values[0]
        );
    }

    #[test]
    fn removal_curve_serializes() {
        let curve = RemovalCurve {
            etas: vec![0.1],
            h_values: vec![0.4],
            ranking_source: "tmc".into(),
            seed: 1,
        };
        let json = serde_json::to_string(&curve).unwrap();
        assert!(json.contains("\"rankingSource\":\"tmc\""));
        assert!(json.contains("\"hValues\""));
    }
}
