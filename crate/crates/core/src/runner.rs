//! Experiment runner: ties ingestion, training, valuation, and evaluation
//! together and writes the reproducible artifact set for a run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{DatasetSource, ExperimentConfig, Method};
use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::eval::{self, RemovalCurve};
use crate::explainer::{
    self, ExplainerTrainConfig, ValueOracle, Variant,
};
use crate::grouping;
use crate::model::{self, Architecture, TrainConfig};
use crate::rng;
use crate::shapley::{
    cwls_solve, default_truncation_tol, exact_shapley, loo_values, permutation_shapley,
    CwlsMode, ShapleyVector,
};
use crate::utility::{Game, ModelUtility, TabularGame};

/// Exact enumeration stays feasible up to this player count; beyond it CWLS
/// switches to kernel sampling.
const CWLS_ENUM_LIMIT: usize = 12;
const CWLS_SAMPLES: usize = 4000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleAttribution {
    pub index: usize,
    pub label: usize,
    pub shapley: ShapleyVector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub config: ExperimentConfig,
    /// SHA-256 hash of the loaded training data, keying comparability.
    pub dataset_hash: String,
    /// SHA-256 per artifact file, keyed by file name.
    pub artifacts: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub attributions: Vec<SampleAttribution>,
    pub curve: RemovalCurve,
    pub timings: Vec<(String, f64)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn dataset_hash(data: &Dataset) -> String {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&(data.m as u64).to_le_bytes());
    for (x, &y) in data.features.iter().zip(&data.labels) {
        for v in x {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(&(y as u64).to_le_bytes());
    }
    sha256_hex(&bytes)
}

/// Load the training and test sets for a config. Synthetic sources draw the
/// test set from a fresh substream; file-backed sources hold out a seeded
/// 20% (at least one point per side).
fn load_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    match &cfg.dataset {
        DatasetSource::Synthetic(spec) => {
            let mut train_spec = spec.clone();
            train_spec.seed = rng::stream_seed(cfg.seed, "dataset");
            let mut test_spec = spec.clone();
            test_spec.n = cfg.test_size;
            test_spec.seed = rng::stream_seed(cfg.seed, "eval");
            Ok((data::generate(&train_spec)?, data::generate(&test_spec)?))
        }
        DatasetSource::Csv { path, label_column, has_header } => {
            split(data::load_csv(path, *label_column, *has_header)?, cfg.seed)
        }
        DatasetSource::Idx { images, labels } => split(data::load_idx(images, labels)?, cfg.seed),
    }
}

fn split(full: Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    use rand::seq::SliceRandom;
    let n = full.n();
    if n < 2 {
        return Err(Error::Capacity("file-backed datasets need ≥ 2 rows to split".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::rng_from(rng::stream_seed(seed, "dataset")));
    let test_len = (n / 5).max(1);
    let (test_idx, train_idx) = order.split_at(test_len);
    let mut train_idx = train_idx.to_vec();
    let mut test_idx = test_idx.to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((full.subset(&train_idx)?, full.subset(&test_idx)?))
}

fn architecture(cfg: &ExperimentConfig, d: usize, m: usize) -> Architecture {
    match cfg.model.kind {
        model::ArchKind::Logistic => Architecture::logistic(d, m),
        model::ArchKind::Mlp1 => Architecture::mlp1(d, cfg.model.hidden_units, m),
    }
}

fn service_train_config(cfg: &ExperimentConfig, stream: &str) -> TrainConfig {
    TrainConfig {
        learning_rate: cfg.model.learning_rate,
        lr_scale: 1.0,
        epochs: cfg.model.epochs,
        batch_size: cfg.model.batch_size.unwrap_or(usize::MAX),
        seed: rng::stream_seed(cfg.seed, stream),
    }
}

/// Run items 0..len through `f` on up to `threads` workers, results in
/// index order.
fn parallel_map<T, F>(len: usize, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let threads = threads.max(1).min(len.max(1));
    if threads <= 1 {
        return (0..len).map(&f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<T>>> = (0..len).map(|_| None).collect();
    let slots_mutex = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= len {
                    break;
                }
                let out = f(i);
                slots_mutex.lock().expect("poisoned")[i] = Some(out);
            });
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled every slot")).collect()
}

struct Valuation {
    attributions: Vec<SampleAttribution>,
    /// Seconds spent training the amortized explainer, when one was used.
    explainer_seconds: Option<f64>,
}

fn probe_indices(test: &Dataset, count: usize) -> Vec<usize> {
    (0..count.min(test.n())).collect()
}

fn run_valuation(
    cfg: &ExperimentConfig,
    data: &Dataset,
    test: &Dataset,
    threads: usize,
    out_dir: &Path,
) -> Result<Valuation> {
    let n = data.n();
    let m = data.m;
    let arch = architecture(cfg, data.d(), m);
    let util_cfg = service_train_config(cfg, "utility");
    let probes = probe_indices(test, cfg.num_explained);

    if cfg.method.is_explainer() {
        let mut afds_cfg = util_cfg;
        afds_cfg.lr_scale = cfg.params.beta;
        let converged = ModelUtility::converged(data, arch, util_cfg);
        let truncated =
            ModelUtility::truncated(data, arch, afds_cfg, cfg.params.k)?;
        let oracle: &dyn ValueOracle = match cfg.method {
            Method::Fds => &converged,
            _ => &truncated,
        };

        let partition = if matches!(cfg.method, Method::Gfds | Method::GfdsPlus) {
            let n_groups = cfg.params.n_groups.unwrap_or(m);
            let service_cfg = service_train_config(cfg, "service");
            let service = model::fit(&arch, data, &service_cfg, crate::utility::CONVERGENCE_TOL)?.params;
            Some(grouping::psi_partition(
                data,
                &service,
                n_groups,
                cfg.params.grouping,
                rng::stream_seed(cfg.seed, "service"),
            )?)
        } else {
            None
        };

        let train_cfg = ExplainerTrainConfig {
            variant: match cfg.method {
                Method::Fds => Variant::Fds,
                Method::Afds => Variant::Afds,
                Method::Gfds => Variant::Gfds,
                _ => Variant::GfdsPlus,
            },
            alpha: cfg.params.alpha,
            steps: cfg.params.steps,
            batch_size: cfg.params.batch_size,
            k: cfg.params.k,
            beta: cfg.params.beta,
            gamma: cfg.params.gamma,
            head: cfg.params.head,
            hidden_units: cfg.params.hidden_units,
            seed: rng::stream_seed(cfg.seed, "explainer"),
        };
        let pool: Vec<Vec<f64>> = test.features.clone();

        let start = Instant::now();
        let trained = match cfg.method {
            Method::Fds => explainer::train_fds(oracle, &pool, &train_cfg)?,
            Method::Afds => explainer::train_afds(oracle, &pool, &train_cfg)?,
            Method::Gfds => explainer::train_gfds(
                oracle,
                &pool,
                partition.as_ref().expect("partition built"),
                &train_cfg,
            )?,
            _ => explainer::train_gfds_plus(
                oracle,
                &pool,
                partition.as_ref().expect("partition built"),
                &train_cfg,
            )?,
        };
        let explainer_seconds = start.elapsed().as_secs_f64();

        let meta = explainer::CheckpointMeta {
            variant: train_cfg.variant,
            n,
            m,
            n_groups: partition.as_ref().map_or(1, |p| p.n_groups),
            k: cfg.params.k,
            gamma: cfg.params.gamma,
            seed: train_cfg.seed,
        };
        explainer::save_checkpoint(&trained.params, &meta, &out_dir.join("explainer"))?;

        let mut attributions = Vec::with_capacity(probes.len());
        for &i in &probes {
            let x = &test.features[i];
            let y = test.labels[i];
            let sv = explainer::predict_normalized(
                &trained.params,
                x,
                y,
                oracle.v_one(x, y),
                oracle.v_zero(x, y),
                partition.as_ref(),
            )?;
            attributions.push(SampleAttribution { index: i, label: y, shapley: sv });
        }
        return Ok(Valuation { attributions, explainer_seconds: Some(explainer_seconds) });
    }

    let util = ModelUtility::converged(data, arch, util_cfg);
    let sample_seed = rng::stream_seed(cfg.seed, "utility");
    let attributions = parallel_map(probes.len(), threads, |slot| {
        let i = probes[slot];
        let x = &test.features[i];
        let y = test.labels[i];
        let game = util.game(x, y);
        let sv = match cfg.method {
            Method::Exact => exact_shapley(&game)?,
            Method::Loo => {
                let values = loo_values(&game);
                ShapleyVector::new(values, game.v_one(), game.v_zero())
            }
            Method::Tmc => {
                let tol = default_truncation_tol(game.v_one(), game.v_zero());
                permutation_shapley(
                    &game,
                    cfg.params.permutations,
                    tol,
                    rng::combine(sample_seed, i as u64 + 1),
                )?
            }
            Method::Cwls => {
                let mode = if util.n() <= CWLS_ENUM_LIMIT {
                    CwlsMode::Enumerate
                } else {
                    CwlsMode::Sampled {
                        num_samples: CWLS_SAMPLES,
                        seed: rng::combine(sample_seed, i as u64 + 1),
                    }
                };
                cwls_solve(&game, mode)?
            }
            _ => unreachable!("explainer methods handled above"),
        };
        Ok(SampleAttribution { index: i, label: y, shapley: sv })
    })?;
    Ok(Valuation { attributions, explainer_seconds: None })
}

fn mean_ranking(attributions: &[SampleAttribution], n: usize) -> Vec<f64> {
    let mut ranking = vec![0.0; n];
    for sample in attributions {
        for (r, v) in ranking.iter_mut().zip(&sample.shapley.values) {
            *r += v;
        }
    }
    for r in &mut ranking {
        *r /= attributions.len() as f64;
    }
    ranking
}

fn write_artifact(out_dir: &Path, name: &str, bytes: &[u8]) -> Result<String> {
    let path = out_dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| Error::Io { path, source: e })?;
    Ok(sha256_hex(bytes))
}

/// Execute a full experiment and write manifest.json, shapley.json,
/// removal_curve.csv, and timing.csv under the config's output directory.
pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<RunReport> {
    let out_dir = cfg.out_dir.clone();
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Error::Io { path: out_dir.clone(), source: e })?;

    let mut timings: Vec<(String, f64)> = Vec::new();
    let t0 = Instant::now();
    let (data, test) = load_data(cfg)?;
    cfg.validate_against(data.n(), data.m)?;
    timings.push(("dataset".into(), t0.elapsed().as_secs_f64()));

    let t1 = Instant::now();
    let arch = architecture(cfg, data.d(), data.m);
    let service_cfg = service_train_config(cfg, "service");
    model::fit(&arch, &data, &service_cfg, crate::utility::CONVERGENCE_TOL)?;
    timings.push(("service_training".into(), t1.elapsed().as_secs_f64()));

    let t2 = Instant::now();
    let valuation = run_valuation(cfg, &data, &test, threads, &out_dir)?;
    timings.push(("valuation".into(), t2.elapsed().as_secs_f64()));
    if let Some(secs) = valuation.explainer_seconds {
        timings.push(("explainer_training".into(), secs));
    }

    let t3 = Instant::now();
    let ranking = mean_ranking(&valuation.attributions, data.n());
    let curve = eval::removal_curve(
        &data,
        &ranking,
        &cfg.etas,
        &arch,
        &service_train_config(cfg, "service"),
        &test,
        cfg.method.label(),
        rng::stream_seed(cfg.seed, "eval"),
    )?;
    timings.push(("eval".into(), t3.elapsed().as_secs_f64()));

    let mut artifacts = BTreeMap::new();

    let shapley_json = serde_json::to_vec_pretty(&valuation.attributions).expect("serializable");
    artifacts.insert("shapley.json".to_string(), write_artifact(&out_dir, "shapley.json", &shapley_json)?);

    let mut curve_csv = Vec::new();
    eval::write_removal_csv(std::slice::from_ref(&curve), &mut curve_csv)?;
    artifacts
        .insert("removal_curve.csv".to_string(), write_artifact(&out_dir, "removal_curve.csv", &curve_csv)?);

    let mut timing_csv = String::from("phase,seconds\n");
    for (phase, secs) in &timings {
        timing_csv.push_str(&format!("{phase},{secs:.6}\n"));
    }
    artifacts
        .insert("timing.csv".to_string(), write_artifact(&out_dir, "timing.csv", timing_csv.as_bytes())?);

    let manifest = Manifest {
        config: resolved_config(cfg),
        dataset_hash: dataset_hash(&data),
        artifacts,
    };
    let manifest_json = serde_json::to_vec_pretty(&manifest).expect("serializable");
    write_artifact(&out_dir, "manifest.json", &manifest_json)?;

    Ok(RunReport { out_dir, attributions: valuation.attributions, curve, timings })
}

/// The config as actually executed: implicit defaults made explicit so the
/// manifest alone reproduces the run.
fn resolved_config(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut resolved = cfg.clone();
    if resolved.params.n_groups.is_none() && matches!(cfg.method, Method::Gfds | Method::GfdsPlus)
    {
        if let DatasetSource::Synthetic(spec) = &cfg.dataset {
            resolved.params.n_groups = Some(spec.m);
        }
    }
    resolved
}

/// Aggregate completed runs under `dir` into an H_η comparison table:
/// `method,eta,h_mean,h_std`, mean±std over seeds.
pub fn compare(dir: &Path) -> Result<String> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    // (method, eta, h_value, seed) rows per run
    type CurveRows = Vec<(String, f64, f64, u64)>;
    let mut runs: Vec<(Manifest, CurveRows)> = Vec::new();
    let mut run_dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("manifest.json").is_file())
        .collect();
    run_dirs.sort();
    for run_dir in &run_dirs {
        let manifest_path = run_dir.join("manifest.json");
        let body = std::fs::read_to_string(&manifest_path)
            .map_err(|e| Error::Io { path: manifest_path, source: e })?;
        let manifest: Manifest =
            serde_json::from_str(&body).map_err(|e| Error::Format(e.to_string()))?;
        let curve_path = run_dir.join("removal_curve.csv");
        let mut rows = Vec::new();
        let mut reader = csv::Reader::from_path(&curve_path)
            .map_err(|e| Error::Format(format!("{}: {e}", curve_path.display())))?;
        for record in reader.records() {
            let record = record.map_err(|e| Error::Format(e.to_string()))?;
            let eta: f64 = record[0].parse().map_err(|_| Error::Format("bad eta".into()))?;
            let h: f64 = record[1].parse().map_err(|_| Error::Format("bad h_value".into()))?;
            let method = record[2].to_string();
            let seed: u64 = record[3].parse().map_err(|_| Error::Format("bad seed".into()))?;
            rows.push((method, eta, h, seed));
        }
        runs.push((manifest, rows));
    }
    if runs.len() < 2 {
        return Err(Error::Comparability(format!(
            "compare needs ≥ 2 completed runs, found {}",
            runs.len()
        )));
    }
    let reference = &runs[0].0;
    for (manifest, _) in &runs[1..] {
        if manifest.dataset_hash != reference.dataset_hash {
            return Err(Error::Comparability("runs cover different datasets".into()));
        }
    }

    // group H values by (method, eta) across runs/seeds
    let mut cells: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for (_, rows) in &runs {
        for (method, eta, h, _) in rows {
            cells.entry((method.clone(), format!("{eta}"))).or_default().push(*h);
        }
    }
    let mut out = String::from("method,eta,h_mean,h_std\n");
    for ((method, eta), hs) in cells {
        let count = hs.len() as f64;
        let mean = hs.iter().sum::<f64>() / count;
        let var = hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / count;
        out.push_str(&format!("{method},{eta},{mean},{}\n", var.sqrt()));
    }
    Ok(out)
}

/// Exact, leave-one-out, and TMC values for a tabular game file, one line
/// per player: `player,exact,loo,tmc`.
pub fn oracle_report(game_path: &Path, seed: u64, header: bool) -> Result<String> {
    let game = TabularGame::load(game_path)?;
    let exact = exact_shapley(&game)?;
    let loo = loo_values(&game);
    let tol = default_truncation_tol(game.v_one(), game.v_zero());
    let tmc = permutation_shapley(&game, 500, tol, rng::stream_seed(seed, "utility"))?;
    let mut out = String::new();
    if header {
        out.push_str("player,exact,loo,tmc\n");
    }
    for (i, ((e, l), t)) in exact.values.iter().zip(&loo).zip(&tmc.values).enumerate() {
        out.push_str(&format!("{i},{e},{l},{t}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn base_config(dir: &Path, extra: &str) -> ExperimentConfig {
        let text = format!(
            "dataset.source = synthetic\n\
             dataset.kind = blobs\n\
             dataset.n = 8\n\
             eval.etas = 0.25\n\
             eval.test_size = 8\n\
             eval.num_explained = 2\n\
             seed = 11\n\
             out = {}\n\
             {extra}",
            dir.display()
        );
        ExperimentConfig::parse(&text).unwrap()
    }

    #[test]
    fn exact_run_writes_all_artifacts_with_tiny_gap() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = base_config(tmp.path(), "method = exact\n");
        let report = run(&cfg, 1).unwrap();
        for name in ["manifest.json", "shapley.json", "removal_curve.csv", "timing.csv"] {
            assert!(tmp.path().join(name).is_file(), "{name} missing");
        }
        for sample in &report.attributions {
            assert!(sample.shapley.efficiency_gap <= 1e-12);
        }
        // manifest hashes match the files on disk
        let manifest: Manifest = serde_json::from_str(
            &std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        for (name, hash) in &manifest.artifacts {
            let bytes = std::fs::read(tmp.path().join(name)).unwrap();
            assert_eq!(&sha256_hex(&bytes), hash, "{name}");
        }
    }

    #[test]
    fn same_config_twice_is_byte_identical() {
        let tmp_a = tempfile::tempdir().unwrap();
        let tmp_b = tempfile::tempdir().unwrap();
        let cfg_a = base_config(tmp_a.path(), "method = tmc\nmethod.permutations = 50\n");
        let cfg_b = base_config(tmp_b.path(), "method = tmc\nmethod.permutations = 50\n");
        run(&cfg_a, 1).unwrap();
        run(&cfg_b, 1).unwrap();
        for name in ["shapley.json", "removal_curve.csv"] {
            let a = std::fs::read(tmp_a.path().join(name)).unwrap();
            let b = std::fs::read(tmp_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs");
        }
    }

    #[test]
    fn threads_do_not_change_results() {
        let tmp_a = tempfile::tempdir().unwrap();
        let tmp_b = tempfile::tempdir().unwrap();
        let cfg_a = base_config(tmp_a.path(), "method = exact\n");
        let cfg_b = base_config(tmp_b.path(), "method = exact\n");
        run(&cfg_a, 1).unwrap();
        run(&cfg_b, 4).unwrap();
        let a = std::fs::read(tmp_a.path().join("shapley.json")).unwrap();
        let b = std::fs::read(tmp_b.path().join("shapley.json")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn explainer_run_emits_checkpoint_and_timing_phase() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = base_config(
            tmp.path(),
            "method = afds\nmethod.steps = 30\nmethod.batch_size = 4\nmethod.alpha = 0.05\n",
        );
        let report = run(&cfg, 1).unwrap();
        assert!(tmp.path().join("explainer.bin").is_file());
        assert!(tmp.path().join("explainer.json").is_file());
        assert!(report.timings.iter().any(|(p, _)| p == "explainer_training"));
        for sample in &report.attributions {
            assert!(sample.shapley.efficiency_gap <= 1e-12);
        }
    }

    #[test]
    fn gfds_plus_run_with_split_head() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = base_config(
            tmp.path(),
            "method = gfds+\nmethod.steps = 30\nmethod.batch_size = 4\nmethod.alpha = 0.05\n",
        );
        let report = run(&cfg, 1).unwrap();
        assert_eq!(report.attributions[0].shapley.values.len(), 8);
    }

    #[test]
    fn gfds_n_exceeding_n_is_config_error() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = base_config(tmp.path(), "method = gfds\nmethod.N = 40\nmethod.grouping = kmeans-logits\n");
        let err = run(&cfg, 1).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        match err {
            Error::Config { field, .. } => assert_eq!(field, "method.N"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn compare_requires_two_runs_and_same_dataset() {
        let root = tempfile::tempdir().unwrap();
        let run_a = root.path().join("a");
        let cfg = base_config(&run_a, "method = exact\n");
        run(&cfg, 1).unwrap();
        let err = compare(root.path()).unwrap_err();
        assert!(matches!(err, Error::Comparability(_)));

        let run_b = root.path().join("b");
        let cfg_b = base_config(&run_b, "method = loo\n");
        run(&cfg_b, 1).unwrap();
        let table = compare(root.path()).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "method,eta,h_mean,h_std");
        assert!(lines.iter().any(|l| l.starts_with("exact,0.25,")));
        assert!(lines.iter().any(|l| l.starts_with("loo,0.25,")));

        // mismatched dataset → comparability error
        let run_c = root.path().join("c");
        let text = format!(
            "dataset.source = synthetic\ndataset.kind = blobs\ndataset.n = 6\n\
             eval.etas = 0.25\neval.test_size = 8\neval.num_explained = 2\n\
             method = exact\nseed = 11\nout = {}\n",
            run_c.display()
        );
        run(&ExperimentConfig::parse(&text).unwrap(), 1).unwrap();
        let err = compare(root.path()).unwrap_err();
        assert!(matches!(err, Error::Comparability(_)));
    }

    #[test]
    fn identical_methods_give_identical_rows() {
        let root = tempfile::tempdir().unwrap();
        for sub in ["a", "b"] {
            let cfg = base_config(&root.path().join(sub), "method = exact\n");
            run(&cfg, 1).unwrap();
        }
        let table = compare(root.path()).unwrap();
        // two identical runs pool into one row with zero std
        let row = table.lines().find(|l| l.starts_with("exact,0.25,")).unwrap();
        let std: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(std, 0.0);
    }

    #[test]
    fn oracle_subcommand_formats() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("game.txt");
        // glove game: v=1 iff player 0 (left) and one of {1,2} (right)
        std::fs::write(&path, "3\n0 0\n1 0\n2 0\n3 1\n4 0\n5 1\n6 0\n7 1\n").unwrap();
        let with_header = oracle_report(&path, 0, true).unwrap();
        assert!(with_header.starts_with("player,exact,loo,tmc\n"));
        let plain = oracle_report(&path, 0, false).unwrap();
        assert_eq!(plain.lines().count(), 3);
        let first: Vec<&str> = plain.lines().next().unwrap().split(',').collect();
        assert_eq!(first[0], "0");
        let exact: f64 = first[1].parse().unwrap();
        assert!((exact - 2.0 / 3.0).abs() < 1e-12);
    }
}
