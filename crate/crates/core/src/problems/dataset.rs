use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{domain, Error, Result};

/// How a synthetic dataset was drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationMeta {
    pub n: usize,
    pub d: usize,
    pub sigma: f64,
    pub seed: u64,
}

/// Labelled points `(xᵢ, yᵢ)` with `yᵢ ∈ {−1, +1}`, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationDataset {
    pub features: DMatrix<f64>,
    pub labels: DVector<f64>,
    pub meta: Option<GenerationMeta>,
}

impl ClassificationDataset {
    pub fn new(features: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Dataset(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(Error::Dataset(format!("label {bad} is not -1 or +1")));
        }
        Ok(Self {
            features,
            labels,
            meta: None,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    /// Writes headerless CSV rows: label, then the `d` features.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let io = |e: csv::Error| Error::Dataset(e.to_string());
        for i in 0..self.n() {
            let features = self.features.row(i);
            let row = std::iter::once(self.labels[i])
                .chain(features.iter().copied())
                .map(|x| x.to_string());
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Dataset(e.to_string()))
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
        let mut labels = Vec::new();
        let mut values = Vec::new();
        let mut width = None;
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Dataset(e.to_string()))?;
            if rec.len() < 2 {
                return Err(Error::Dataset(format!("row {}: need a label and at least one feature", line + 1)));
            }
            if *width.get_or_insert(rec.len()) != rec.len() {
                return Err(Error::Dataset(format!("row {}: ragged row", line + 1)));
            }
            for (j, field) in rec.iter().enumerate() {
                let x: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Dataset(format!("row {}: cannot parse {field:?}", line + 1)))?;
                if j == 0 {
                    labels.push(x);
                } else {
                    values.push(x);
                }
            }
        }
        let Some(width) = width else {
            return Err(Error::Dataset("empty file".into()));
        };
        let features = DMatrix::from_row_slice(labels.len(), width - 1, &values);
        Self::new(features, DVector::from_vec(labels))
    }
}

/// Two gaussian classes whose centres differ by one along the first `d/2`
/// coordinates.
///
/// The first `N/2` rows carry label `+1` and have their first `d/2`
/// coordinates shifted by `+1/2`; the remaining rows carry `−1` and are
/// shifted by `−1/2`. `sigma` is the per-coordinate standard deviation.
pub fn generate_classification_data(n: usize, d: usize, sigma: f64, seed: u64) -> Result<ClassificationDataset> {
    if n == 0 || n % 2 != 0 {
        return Err(domain("N", n as f64, "must be even and positive"));
    }
    if d == 0 || d % 2 != 0 {
        return Err(domain("d", d as f64, "must be even and positive"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain("sigma", sigma, "must be positive and finite"));
    }
    let noise = Normal::new(0.0, sigma).expect("sigma validated above");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = DVector::from_fn(n, |i, _| if i < n / 2 { 1.0 } else { -1.0 });
    // Row-major fill so the draw order does not depend on matrix layout.
    let mut values = Vec::with_capacity(n * d);
    for i in 0..n {
        for j in 0..d {
            let shift = if j < d / 2 { 0.5 * labels[i] } else { 0.0 };
            values.push(noise.sample(&mut rng) + shift);
        }
    }
    Ok(ClassificationDataset {
        features: DMatrix::from_row_slice(n, d, &values),
        labels,
        meta: Some(GenerationMeta { n, d, sigma, seed }),
    })
}
