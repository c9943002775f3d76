//! Dataset ingestion and synthetic generation. The rows of a [`Dataset`]
//! are the players of every cooperative game built downstream.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Labeled feature vectors with provider provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Row-major n×d feature matrix.
    pub features: Vec<Vec<f64>>,
    /// Labels in [0, m).
    pub labels: Vec<usize>,
    /// Provider of each point; defaults to the point index.
    pub provider_ids: Vec<usize>,
    /// Class count.
    pub m: usize,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, m: usize) -> Result<Self> {
        let n = features.len();
        if n == 0 {
            return Err(Error::Format("no data rows".into()));
        }
        if labels.len() != n {
            return Err(Error::Consistency(format!(
                "{} feature rows but {} labels",
                n,
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= m) {
            return Err(Error::Consistency(format!("label {bad} out of range for m={m}")));
        }
        let d = features[0].len();
        if let Some(row) = features.iter().position(|r| r.len() != d) {
            return Err(Error::Parse {
                row,
                msg: format!("row has {} fields, expected {}", features[row].len(), d),
            });
        }
        let provider_ids = (0..n).collect();
        Ok(Dataset { features, labels, provider_ids, m })
    }

    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn d(&self) -> usize {
        self.features[0].len()
    }

    /// Rows selected by `indices`, preserving provider ids.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::EmptyCoalition);
        }
        Ok(Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            provider_ids: indices.iter().map(|&i| self.provider_ids[i]).collect(),
            m: self.m,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    GaussianBlobs,
    Xor,
    TwoMoons,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Format("n must be ≥ 1".into()));
        }
        if self.noise_std < 0.0 {
            return Err(Error::Format("noiseStd must be ≥ 0".into()));
        }
        match self.kind {
            SyntheticKind::Xor => {
                if self.m != 2 {
                    return Err(Error::Format("xor forces m=2".into()));
                }
                if self.d < 2 {
                    return Err(Error::Format("xor requires d≥2".into()));
                }
            }
            SyntheticKind::TwoMoons => {
                if self.m != 2 {
                    return Err(Error::Format("two-moons forces m=2".into()));
                }
                if self.d < 2 {
                    return Err(Error::Format("two-moons requires d≥2".into()));
                }
            }
            SyntheticKind::GaussianBlobs => {
                if self.m < 1 {
                    return Err(Error::Format("gaussian-blobs requires m≥1".into()));
                }
                if self.d < 1 {
                    return Err(Error::Format("gaussian-blobs requires d≥1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Deterministic synthetic dataset: labels cycle 0..m so class counts stay
/// balanced within ±1, and everything is a pure function of the spec.
pub fn generate(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = rng::rng_from(rng::combine(spec.seed, spec.kind as u64));
    let noise = Normal::new(0.0, spec.noise_std.max(f64::MIN_POSITIVE)).expect("valid std");
    let mut features = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);

    for i in 0..spec.n {
        let label = i % spec.m;
        let mut x = vec![0.0; spec.d];
        match spec.kind {
            SyntheticKind::GaussianBlobs => {
                // Class centers on a circle of radius 4 in the first two dims
                // (on a line when d = 1).
                let angle = 2.0 * std::f64::consts::PI * label as f64 / spec.m as f64;
                x[0] = 4.0 * angle.cos();
                if spec.d > 1 {
                    x[1] = 4.0 * angle.sin();
                }
            }
            SyntheticKind::Xor => {
                // Corners (±1,±1); label is the parity of the quadrant.
                // Cycle the two corners of each class so corner counts balance.
                let corner = (i / spec.m) % 2;
                let (a, b) = match (label, corner) {
                    (0, 0) => (1.0, 1.0),
                    (0, _) => (-1.0, -1.0),
                    (1, 0) => (1.0, -1.0),
                    _ => (-1.0, 1.0),
                };
                x[0] = a;
                x[1] = b;
            }
            SyntheticKind::TwoMoons => {
                let t = std::f64::consts::PI * rng.gen::<f64>();
                if label == 0 {
                    x[0] = t.cos();
                    x[1] = t.sin();
                } else {
                    x[0] = 1.0 - t.cos();
                    x[1] = 0.5 - t.sin();
                }
            }
        }
        if spec.noise_std > 0.0 {
            for v in x.iter_mut() {
                *v += noise.sample(&mut rng);
            }
        }
        features.push(x);
        labels.push(label);
    }
    Dataset::new(features, labels, spec.m)
}

/// Load a comma-separated file. No header by default; `has_header` skips
/// the first row. The label column must parse as an integer ≥ 0.
pub fn load_csv(path: &Path, label_column: usize, has_header: bool) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse { row, msg: e.to_string() })?;
        let w = record.len();
        if let Some(expected) = width {
            if w != expected {
                return Err(Error::Parse {
                    row,
                    msg: format!("row has {w} fields, expected {expected}"),
                });
            }
        } else {
            if label_column >= w {
                return Err(Error::Parse {
                    row,
                    msg: format!("label column {label_column} out of range (width {w})"),
                });
            }
            width = Some(w);
        }
        let mut x = Vec::with_capacity(w - 1);
        let mut label = None;
        for (col, field) in record.iter().enumerate() {
            if col == label_column {
                let l: i64 = field.trim().parse().map_err(|_| Error::Parse {
                    row,
                    msg: format!("label {field:?} is not an integer"),
                })?;
                if l < 0 {
                    return Err(Error::Parse { row, msg: format!("negative label {l}") });
                }
                label = Some(l as usize);
            } else {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    row,
                    msg: format!("field {field:?} is not a number"),
                })?;
                x.push(v);
            }
        }
        features.push(x);
        labels.push(label.expect("label column checked"));
    }
    if features.is_empty() {
        return Err(Error::Format("no data rows".into()));
    }
    let m = labels.iter().max().copied().unwrap_or(0) + 1;
    Dataset::new(features, labels, m)
}

fn read_u32_be(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format(format!("unexpected end of file in {}", path.display())))?;
    Ok(u32::from_be_bytes(buf))
}

/// Load an IDX image/label pair (standard MNIST binary layout). Pixels are
/// scaled to \[0,1\] by 1/255.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let f = File::open(images_path)
        .map_err(|e| Error::Io { path: images_path.into(), source: e })?;
    let mut r = BufReader::new(f);
    let magic = read_u32_be(&mut r, images_path)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:#010x} in {}, expected {IDX_IMAGES_MAGIC:#010x}",
            images_path.display()
        )));
    }
    let count = read_u32_be(&mut r, images_path)? as usize;
    let rows = read_u32_be(&mut r, images_path)? as usize;
    let cols = read_u32_be(&mut r, images_path)? as usize;
    let d = rows * cols;
    let mut pixels = vec![0u8; count * d];
    r.read_exact(&mut pixels)
        .map_err(|_| Error::Format("unexpected end of file".into()))?;

    let f = File::open(labels_path)
        .map_err(|e| Error::Io { path: labels_path.into(), source: e })?;
    let mut r = BufReader::new(f);
    let magic = read_u32_be(&mut r, labels_path)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:#010x} in {}, expected {IDX_LABELS_MAGIC:#010x}",
            labels_path.display()
        )));
    }
    let label_count = read_u32_be(&mut r, labels_path)? as usize;
    if label_count != count {
        return Err(Error::Consistency(format!(
            "{count} images but {label_count} labels"
        )));
    }
    let mut raw_labels = vec![0u8; count];
    r.read_exact(&mut raw_labels)
        .map_err(|_| Error::Format("unexpected end of file".into()))?;

    let features = pixels
        .chunks(d)
        .map(|chunk| chunk.iter().map(|&p| p as f64 / 255.0).collect())
        .collect();
    let labels: Vec<usize> = raw_labels.iter().map(|&l| l as usize).collect();
    let m = labels.iter().max().copied().unwrap_or(0) + 1;
    Dataset::new(features, labels, m)
}

/// Emit a Dataset as an IDX pair, quantizing features to 8 bits. Inverse of
/// [`load_idx`] up to that quantization. Features must lie in \[0,1\].
pub fn write_idx(data: &Dataset, images_path: &Path, labels_path: &Path) -> Result<()> {
    let n = data.n();
    let d = data.d();
    let f = File::create(images_path)
        .map_err(|e| Error::Io { path: images_path.into(), source: e })?;
    let mut w = BufWriter::new(f);
    let io = |e| Error::Io { path: images_path.into(), source: e };
    w.write_all(&IDX_IMAGES_MAGIC.to_be_bytes()).map_err(io)?;
    w.write_all(&(n as u32).to_be_bytes()).map_err(io)?;
    // Emit as 1×d "images"; load_idx only consumes rows*cols.
    w.write_all(&1u32.to_be_bytes()).map_err(io)?;
    w.write_all(&(d as u32).to_be_bytes()).map_err(io)?;
    for row in &data.features {
        let bytes: Vec<u8> = row.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        w.write_all(&bytes).map_err(io)?;
    }

    let f = File::create(labels_path)
        .map_err(|e| Error::Io { path: labels_path.into(), source: e })?;
    let mut w = BufWriter::new(f);
    let io = |e| Error::Io { path: labels_path.into(), source: e };
    w.write_all(&IDX_LABELS_MAGIC.to_be_bytes()).map_err(io)?;
    w.write_all(&(n as u32).to_be_bytes()).map_err(io)?;
    let bytes: Vec<u8> = data.labels.iter().map(|&l| l as u8).collect();
    w.write_all(&bytes).map_err(io)?;
    Ok(())
}
