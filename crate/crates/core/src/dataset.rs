//! Observational samples of `(Y, X, Z)` and their grouped summaries.
//!
//! Three dataset variants cover the estimation regimes:
//!
//! * [`DiscreteDataset`]: categorical `X` in `{0..n}` (code 0 is the
//!   baseline state) and categorical `Z` in `{0..m-1}`.
//! * [`MixedDataset`]: categorical `X`, real `Z` in `[0, 1]`.
//! * [`ContinuousDataset`]: real vector `X` and `Z` inside declared
//!   bounded rectangles.
//!
//! Datasets are immutable after construction and validated on entry;
//! rows with missing fields are rejected rather than imputed. Grouped
//! sums use a canonical value ordering so summary statistics are exactly
//! invariant under permutations of sample order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Categorical-instrument samples. `x` codes lie in `{0..n}` with 0 the
/// baseline state; `z` codes lie in `{0..m-1}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteDataset {
    pub y: Vec<f64>,
    pub x: Vec<usize>,
    pub z: Vec<usize>,
    /// Number of non-baseline X levels (codes run 0..=n).
    pub n: usize,
    /// Number of instrument levels (codes run 0..m).
    pub m: usize,
}

/// Categorical `X`, real `Z` restricted to `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedDataset {
    pub y: Vec<f64>,
    pub x: Vec<usize>,
    pub z: Vec<f64>,
    pub n: usize,
}

/// Real-valued `X` and `Z`, stored row-major, with per-component closed
/// bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuousDataset {
    pub y: Vec<f64>,
    /// Row-major N x n.
    pub x: Vec<f64>,
    /// Row-major N x m.
    pub z: Vec<f64>,
    pub x_dim: usize,
    pub z_dim: usize,
    pub x_bounds: Vec<(f64, f64)>,
    pub z_bounds: Vec<(f64, f64)>,
}

/// Any of the three variants, as produced by [`load_csv`].
#[derive(Debug, Clone)]
pub enum Dataset {
    Discrete(DiscreteDataset),
    Mixed(MixedDataset),
    Continuous(ContinuousDataset),
}

impl DiscreteDataset {
    pub fn new(y: Vec<f64>, x: Vec<usize>, z: Vec<usize>, n: usize, m: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParam("need n >= 1 non-baseline X levels".into()));
        }
        if m < 2 {
            return Err(Error::InvalidParam(
                "need m >= 2 instrument levels to form a contrast pair".into(),
            ));
        }
        if y.len() != x.len() || y.len() != z.len() {
            return Err(Error::Schema("y, x, z must have identical length".into()));
        }
        if let Some(i) = x.iter().position(|&c| c > n) {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("x code {} exceeds declared maximum {}", x[i], n),
            });
        }
        if let Some(i) = z.iter().position(|&c| c >= m) {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("z code {} exceeds declared maximum {}", z[i], m - 1),
            });
        }
        Ok(Self { y, x, z, n, m })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Resample rows with replacement (bootstrap draw).
    pub fn resample(&self, rng: &mut impl rand::Rng) -> Self {
        let n = self.len();
        let mut y = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            y.push(self.y[i]);
            x.push(self.x[i]);
            z.push(self.z[i]);
        }
        Self { y, x, z, n: self.n, m: self.m }
    }
}

impl MixedDataset {
    pub fn new(y: Vec<f64>, x: Vec<usize>, z: Vec<f64>, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParam("need n >= 1 non-baseline X levels".into()));
        }
        if y.len() != x.len() || y.len() != z.len() {
            return Err(Error::Schema("y, x, z must have identical length".into()));
        }
        if let Some(i) = x.iter().position(|&c| c > n) {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("x code {} exceeds declared maximum {}", x[i], n),
            });
        }
        if let Some(i) = z.iter().position(|&v| !(0.0..=1.0).contains(&v) || !v.is_finite()) {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("z value {} outside [0, 1]", z[i]),
            });
        }
        Ok(Self { y, x, z, n })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

impl ContinuousDataset {
    pub fn new(
        y: Vec<f64>,
        x: Vec<f64>,
        z: Vec<f64>,
        x_dim: usize,
        z_dim: usize,
        x_bounds: Vec<(f64, f64)>,
        z_bounds: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let rows = y.len();
        if x_dim == 0 || z_dim == 0 {
            return Err(Error::InvalidParam("x and z must have at least one component".into()));
        }
        if x.len() != rows * x_dim || z.len() != rows * z_dim {
            return Err(Error::Schema("row counts of y, x, z disagree".into()));
        }
        if x_bounds.len() != x_dim || z_bounds.len() != z_dim {
            return Err(Error::Schema("one bound pair required per component".into()));
        }
        for (lo, hi) in x_bounds.iter().chain(z_bounds.iter()) {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidParam("bounds must be finite nonempty intervals".into()));
            }
        }
        for r in 0..rows {
            for j in 0..x_dim {
                let v = x[r * x_dim + j];
                let (lo, hi) = x_bounds[j];
                if !(lo..=hi).contains(&v) {
                    return Err(Error::Parse {
                        line: r + 2,
                        message: format!("x{} value {} outside declared bound [{}, {}]", j + 1, v, lo, hi),
                    });
                }
            }
            for j in 0..z_dim {
                let v = z[r * z_dim + j];
                let (lo, hi) = z_bounds[j];
                if !(lo..=hi).contains(&v) {
                    return Err(Error::Parse {
                        line: r + 2,
                        message: format!("z{} value {} outside declared bound [{}, {}]", j + 1, v, lo, hi),
                    });
                }
            }
        }
        Ok(Self { y, x, z, x_dim, z_dim, x_bounds, z_bounds })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x_col(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|r| self.x[r * self.x_dim + j]).collect()
    }

    pub fn z_col(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|r| self.z[r * self.z_dim + j]).collect()
    }
}

/// Per-instrument-level summaries consumed by the discrete estimator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupStats {
    /// Mean of `Y` given `Z = i` (NaN for empty levels).
    pub cond_mean_y: Vec<f64>,
    /// Sample variance of `Y` given `Z = i` (NaN for levels with < 2 obs).
    pub cond_var_y: Vec<f64>,
    /// Row-major m x (n+1): relative frequency of `X = j` given `Z = i`.
    pub cond_prob_x: Vec<Vec<f64>>,
    pub group_counts: Vec<usize>,
    /// Instrument levels with zero observations.
    pub empty_levels: Vec<usize>,
    pub n: usize,
    pub m: usize,
}

/// Sum in a canonical (sorted) order, so the result is independent of
/// the order samples arrived in.
fn canonical_sum(values: &mut Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Conditional means and choice frequencies per instrument level.
///
/// Empty levels are flagged rather than fatal; downstream estimators
/// decide whether a contrast touching them is an error.
pub fn group_stats(d: &DiscreteDataset) -> Result<GroupStats> {
    if d.is_empty() {
        return Err(Error::InvalidParam("group statistics need at least one sample".into()));
    }
    let m = d.m;
    let n = d.n;
    let mut ys: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut counts = vec![0usize; m];
    let mut xcounts = vec![vec![0usize; n + 1]; m];
    for i in 0..d.len() {
        let zi = d.z[i];
        ys[zi].push(d.y[i]);
        counts[zi] += 1;
        xcounts[zi][d.x[i]] += 1;
    }
    let mut cond_mean_y = vec![f64::NAN; m];
    let mut cond_var_y = vec![f64::NAN; m];
    let mut cond_prob_x = vec![vec![0.0; n + 1]; m];
    let mut empty = Vec::new();
    for i in 0..m {
        if counts[i] == 0 {
            empty.push(i);
            continue;
        }
        let total = counts[i] as f64;
        let mut vals = std::mem::take(&mut ys[i]);
        let sum = canonical_sum(&mut vals);
        let mean = sum / total;
        cond_mean_y[i] = mean;
        if counts[i] >= 2 {
            let mut sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
            cond_var_y[i] = canonical_sum(&mut sq) / (total - 1.0);
        }
        for j in 0..=n {
            cond_prob_x[i][j] = xcounts[i][j] as f64 / total;
        }
    }
    Ok(GroupStats {
        cond_mean_y,
        cond_var_y,
        cond_prob_x,
        group_counts: counts,
        empty_levels: empty,
        n,
        m,
    })
}

/// Declares how a delimited file should be interpreted.
#[derive(Debug, Clone)]
pub enum CsvSchema {
    /// Header `y,x,z`; integer codes. `None` bounds are inferred from the
    /// largest observed code.
    Discrete { n: Option<usize>, m: Option<usize> },
    /// Header `y,x,z`; `z` real in `[0, 1]`.
    Mixed { n: Option<usize> },
    /// Header `y,x1..xn,z1..zm`. Bounds default to the observed ranges.
    Continuous {
        x_bounds: Option<Vec<(f64, f64)>>,
        z_bounds: Option<Vec<(f64, f64)>>,
    },
}

fn parse_f64(field: &str, line: usize, col: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("column `{col}`: cannot parse `{field}` as a number"),
    })
}

fn parse_code(field: &str, line: usize, col: &str) -> Result<usize> {
    field.trim().parse::<usize>().map_err(|_| Error::Parse {
        line,
        message: format!("column `{col}`: cannot parse `{field}` as a category code"),
    })
}

/// Load a dataset from a comma-delimited UTF-8 file with a header row.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();

    match schema {
        CsvSchema::Discrete { n, m } => {
            expect_headers(&headers, &["y", "x", "z"])?;
            let mut y = Vec::new();
            let mut x = Vec::new();
            let mut z = Vec::new();
            for (idx, record) in reader.records().enumerate() {
                let line = idx + 2;
                let rec = record?;
                check_width(&rec, 3, line)?;
                y.push(parse_f64(&rec[0], line, "y")?);
                x.push(parse_code(&rec[1], line, "x")?);
                z.push(parse_code(&rec[2], line, "z")?);
            }
            let n = n.unwrap_or_else(|| x.iter().copied().max().unwrap_or(1).max(1));
            let m = m.unwrap_or_else(|| z.iter().copied().max().map_or(2, |v| (v + 1).max(2)));
            Ok(Dataset::Discrete(DiscreteDataset::new(y, x, z, n, m)?))
        }
        CsvSchema::Mixed { n } => {
            expect_headers(&headers, &["y", "x", "z"])?;
            let mut y = Vec::new();
            let mut x = Vec::new();
            let mut z = Vec::new();
            for (idx, record) in reader.records().enumerate() {
                let line = idx + 2;
                let rec = record?;
                check_width(&rec, 3, line)?;
                y.push(parse_f64(&rec[0], line, "y")?);
                x.push(parse_code(&rec[1], line, "x")?);
                z.push(parse_f64(&rec[2], line, "z")?);
            }
            let n = n.unwrap_or_else(|| x.iter().copied().max().unwrap_or(1).max(1));
            Ok(Dataset::Mixed(MixedDataset::new(y, x, z, n)?))
        }
        CsvSchema::Continuous { x_bounds, z_bounds } => {
            let (x_dim, z_dim) = continuous_dims(&headers)?;
            let mut y = Vec::new();
            let mut x = Vec::new();
            let mut z = Vec::new();
            for (idx, record) in reader.records().enumerate() {
                let line = idx + 2;
                let rec = record?;
                check_width(&rec, 1 + x_dim + z_dim, line)?;
                y.push(parse_f64(&rec[0], line, "y")?);
                for j in 0..x_dim {
                    x.push(parse_f64(&rec[1 + j], line, &format!("x{}", j + 1))?);
                }
                for j in 0..z_dim {
                    z.push(parse_f64(&rec[1 + x_dim + j], line, &format!("z{}", j + 1))?);
                }
            }
            let xb = match x_bounds {
                Some(b) => b.clone(),
                None => observed_bounds(&x, x_dim),
            };
            let zb = match z_bounds {
                Some(b) => b.clone(),
                None => observed_bounds(&z, z_dim),
            };
            Ok(Dataset::Continuous(ContinuousDataset::new(
                y, x, z, x_dim, z_dim, xb, zb,
            )?))
        }
    }
}

/// Write a dataset back out in the format [`load_csv`] reads.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    match d {
        Dataset::Discrete(d) => {
            w.write_record(["y", "x", "z"])?;
            for i in 0..d.len() {
                w.write_record(&[d.y[i].to_string(), d.x[i].to_string(), d.z[i].to_string()])?;
            }
        }
        Dataset::Mixed(d) => {
            w.write_record(["y", "x", "z"])?;
            for i in 0..d.len() {
                w.write_record(&[d.y[i].to_string(), d.x[i].to_string(), d.z[i].to_string()])?;
            }
        }
        Dataset::Continuous(d) => {
            let mut header = vec!["y".to_string()];
            header.extend((1..=d.x_dim).map(|j| format!("x{j}")));
            header.extend((1..=d.z_dim).map(|j| format!("z{j}")));
            w.write_record(&header)?;
            for r in 0..d.len() {
                let mut rec = vec![d.y[r].to_string()];
                rec.extend((0..d.x_dim).map(|j| d.x[r * d.x_dim + j].to_string()));
                rec.extend((0..d.z_dim).map(|j| d.z[r * d.z_dim + j].to_string()));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn expect_headers(got: &[String], want: &[&str]) -> Result<()> {
    if got.len() != want.len() || got.iter().zip(want).any(|(g, w)| g != w) {
        return Err(Error::Schema(format!(
            "expected header `{}`, found `{}`",
            want.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

fn check_width(rec: &csv::StringRecord, want: usize, line: usize) -> Result<()> {
    if rec.len() != want {
        return Err(Error::Parse {
            line,
            message: format!("expected {} fields, found {}", want, rec.len()),
        });
    }
    Ok(())
}

fn continuous_dims(headers: &[String]) -> Result<(usize, usize)> {
    if headers.first().map(String::as_str) != Some("y") {
        return Err(Error::Schema("continuous header must start with `y`".into()));
    }
    let mut x_dim = 0;
    let mut z_dim = 0;
    for h in &headers[1..] {
        if z_dim == 0 && *h == format!("x{}", x_dim + 1) {
            x_dim += 1;
        } else if *h == format!("z{}", z_dim + 1) {
            z_dim += 1;
        } else {
            return Err(Error::Schema(format!(
                "unexpected column `{h}`; continuous header is y,x1..xn,z1..zm"
            )));
        }
    }
    if x_dim == 0 || z_dim == 0 {
        return Err(Error::Schema("continuous data needs at least x1 and z1".into()));
    }
    Ok((x_dim, z_dim))
}

fn observed_bounds(data: &[f64], dim: usize) -> Vec<(f64, f64)> {
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
    for (i, &v) in data.iter().enumerate() {
        let b = &mut bounds[i % dim];
        b.0 = b.0.min(v);
        b.1 = b.1.max(v);
    }
    bounds
        .into_iter()
        .map(|(lo, hi)| {
            if lo > hi {
                (0.0, 1.0)
            } else if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        })
        .collect()
}
