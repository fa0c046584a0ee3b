//! Synthetic data, CSV ingestion and column normalization.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use cotrain_core::admm::Dataset;
use cotrain_core::linalg::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::HarnessError;

/// Per-party training sets drawn from one linear model, plus that model.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub parties: Vec<Dataset>,
    pub weights: Vec<f64>,
}

/// `m` datasets of `n` rows with standard normal features and
/// `y = Xw* + N(0, σ²)`. Identical seeds give identical data.
pub fn gen_synthetic(m: usize, n: usize, d: usize, noise: f64, seed: u64) -> Result<Synthetic, HarnessError> {
    if d == 0 || n < d {
        return Err(HarnessError::Data(format!("need at least d = {d} samples per party, got {n}")));
    }
    if !(noise >= 0.0) {
        return Err(HarnessError::Data("noise must be non-negative".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let parties = (0..m).map(|_| sample(&mut rng, &weights, n, noise)).collect::<Result<_, _>>()?;
    Ok(Synthetic { parties, weights })
}

/// Fresh rows from the same model, e.g. a held-out test set.
pub fn sample_like(weights: &[f64], n: usize, noise: f64, seed: u64) -> Result<Dataset, HarnessError> {
    sample(&mut ChaCha20Rng::seed_from_u64(seed), weights, n, noise)
}

fn sample(rng: &mut ChaCha20Rng, w: &[f64], n: usize, noise: f64) -> Result<Dataset, HarnessError> {
    let d = w.len();
    let eps = Normal::new(0.0, noise).map_err(|e| HarnessError::Data(e.to_string()))?;
    let data: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
    let x = Matrix::from_vec(n, d, data);
    let y = x.matvec(w).into_iter().map(|v| v + eps.sample(rng)).collect();
    Ok(Dataset::new(x, y)?)
}

/// Parses a headered numeric CSV, taking `label` as the target column.
pub fn parse_csv<R: Read>(input: R, label: &str) -> Result<Dataset, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    let label_col = header
        .iter()
        .position(|h| h == label)
        .ok_or_else(|| HarnessError::Data(format!("no column named {label:?}")))?;
    let d = header.len() - 1;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(HarnessError::Data(format!("row {} has {} cells, expected {}", r + 1, rec.len(), header.len())));
        }
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| HarnessError::Data(format!("row {}, column {}: {cell:?} is not a number", r + 1, c + 1)))?;
            if c == label_col {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    Ok(Dataset::new(Matrix::from_vec(y.len(), d, x), y)?)
}

pub fn load_csv(path: &Path, label: &str) -> Result<Dataset, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    parse_csv(file, label)
}

/// Writes features as `x0..x{d-1}` and the target as `y`.
pub fn write_csv(path: &Path, ds: &Dataset) -> Result<(), HarnessError> {
    let mut wtr = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..ds.d()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    wtr.write_record(&header)?;
    for i in 0..ds.n() {
        let mut row: Vec<String> = ds.x.row(i).iter().map(f64::to_string).collect();
        row.push(ds.y[i].to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// Column statistics from one normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub dataset: Dataset,
    /// Columns with zero variance, left at zero.
    pub constant_columns: Vec<usize>,
}

/// Shifts every feature column to mean zero and scales it to unit variance.
pub fn normalize(ds: &Dataset) -> Normalized {
    let (n, d) = (ds.n(), ds.d());
    let mut x = ds.x.clone();
    let mut constant_columns = Vec::new();
    for j in 0..d {
        let col = ds.x.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        let constant = sd <= 1e-12 * mean.abs().max(1.0);
        if constant {
            constant_columns.push(j);
        }
        for i in 0..n {
            x[(i, j)] = if constant { 0.0 } else { (col[i] - mean) / sd };
        }
    }
    Normalized { dataset: Dataset { x, y: ds.y.clone() }, constant_columns }
}

/// One weight per line.
pub fn write_model(path: &Path, w: &[f64]) -> Result<(), HarnessError> {
    let mut f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    for v in w {
        writeln!(f, "{v}").map_err(|e| HarnessError::io(path, e))?;
    }
    Ok(())
}

pub fn read_model(path: &Path) -> Result<Vec<f64>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| l.parse().map_err(|_| HarnessError::Data(format!("model line {}: {l:?} is not a number", i + 1))))
        .collect()
}
