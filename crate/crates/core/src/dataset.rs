//! Multi-label datasets with sparse features and sign-coded labels.
//!
//! Text format, one instance per line after a header:
//!
//! ```text
//! K=3 D=5
//! 0,2 1:0.5 4:1.0
//! - 0:2.0
//! ```
//!
//! The first token lists the positive label indices (or `-` for none); the
//! rest are `index:value` feature pairs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Sparse feature vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a vector from `(index, value)` pairs. Pairs are sorted; a
    /// repeated index keeps the last value.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() = v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        SparseVector { indices, values }
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let pairs = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i as u32, v))
            .collect();
        SparseVector::from_pairs(pairs)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| (i as usize, v))
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().map(|&i| i as usize)
    }

    /// Inner product with a dense weight row.
    #[inline]
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| dense[i] * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Row-major matrix of labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i8>,
}

impl SignMatrix {
    pub fn new(cols: usize) -> Self {
        SignMatrix {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn filled(rows: usize, cols: usize, value: i8) -> Self {
        SignMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds a matrix from rows; every entry must be -1 or +1.
    pub fn from_rows<R: AsRef<[i8]>>(cols: usize, rows: &[R]) -> Result<Self> {
        let mut m = SignMatrix::new(cols);
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[i8]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::dim(self.cols, row.len()));
        }
        if let Some(&bad) = row.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidDataset(format!("label entry {bad} is not ±1")));
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [i8] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, k: usize) -> i8 {
        self.data[i * self.cols + k]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[i8]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> SignMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        SignMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Positive count per label column.
    pub fn positive_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.cols];
        for row in self.iter_rows() {
            for (c, &v) in counts.iter_mut().zip(row) {
                if v > 0 {
                    *c += 1;
                }
            }
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelDataset {
    features: Vec<SparseVector>,
    labels: SignMatrix,
    feature_dim: usize,
}

impl MultiLabelDataset {
    /// Validates and assembles a dataset.
    pub fn new(features: Vec<SparseVector>, labels: SignMatrix, feature_dim: usize) -> Result<Self> {
        if features.len() != labels.rows() {
            return Err(Error::dim(labels.rows(), features.len()));
        }
        if features.is_empty() {
            return Err(Error::NoInstances);
        }
        if labels.cols() < 2 {
            return Err(Error::InvalidDataset(format!(
                "label space needs K >= 2, got {}",
                labels.cols()
            )));
        }
        for (i, f) in features.iter().enumerate() {
            if let Some(max) = f.max_index() {
                if max >= feature_dim {
                    return Err(Error::FeatureBounds {
                        line: i + 2,
                        index: max,
                        dim: feature_dim,
                    });
                }
            }
        }
        if labels.positive_counts().iter().all(|&c| c == 0) {
            return Err(Error::InvalidDataset("no instance carries a positive label".into()));
        }
        Ok(MultiLabelDataset {
            features,
            labels,
            feature_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.cols()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn features(&self, i: usize) -> &SparseVector {
        &self.features[i]
    }

    pub fn all_features(&self) -> &[SparseVector] {
        &self.features
    }

    pub fn label_row(&self, i: usize) -> &[i8] {
        self.labels.row(i)
    }

    pub fn labels(&self) -> &SignMatrix {
        &self.labels
    }

    pub fn label_matrix(&self, indices: &[usize]) -> SignMatrix {
        self.labels.select(indices)
    }

    pub fn feature_rows(&self, indices: &[usize]) -> Vec<&SparseVector> {
        indices.iter().map(|&i| &self.features[i]).collect()
    }

    /// New dataset restricted to `indices`. Fails if the subset violates the
    /// dataset invariants (e.g. it has no positive label at all).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let features = indices.iter().map(|&i| self.features[i].clone()).collect();
        MultiLabelDataset::new(features, self.labels.select(indices), self.feature_dim)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let (k, d) = parse_header(hline, header)?;

        let mut features = Vec::new();
        let mut labels = SignMatrix::new(k);
        let mut row = vec![-1i8; k];
        for (line, content) in lines {
            let mut tokens = content.split_whitespace();
            let label_tok = tokens.next().unwrap_or("-");
            row.iter_mut().for_each(|v| *v = -1);
            if label_tok != "-" {
                for t in label_tok.split(',') {
                    let idx: usize = t.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad label index {t:?}"),
                    })?;
                    if idx >= k {
                        return Err(Error::LabelBounds {
                            line,
                            index: idx,
                            labels: k,
                        });
                    }
                    row[idx] = 1;
                }
            }
            let mut pairs = Vec::new();
            for t in tokens {
                let (i, v) = t.split_once(':').ok_or_else(|| Error::Parse {
                    line,
                    message: format!("expected idx:val, got {t:?}"),
                })?;
                let idx: u32 = i.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad feature index {i:?}"),
                })?;
                let val: f64 = v.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad feature value {v:?}"),
                })?;
                if idx as usize >= d {
                    return Err(Error::FeatureBounds {
                        line,
                        index: idx as usize,
                        dim: d,
                    });
                }
                pairs.push((idx, val));
            }
            features.push(SparseVector::from_pairs(pairs));
            labels.push_row(&row)?;
        }
        if features.is_empty() {
            return Err(Error::NoInstances);
        }
        MultiLabelDataset::new(features, labels, d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MultiLabelDataset::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("K={} D={}\n", self.num_labels(), self.feature_dim);
        for (f, row) in self.features.iter().zip(self.labels.iter_rows()) {
            let pos: Vec<String> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(|(k, _)| k.to_string())
                .collect();
            if pos.is_empty() {
                out.push('-');
            } else {
                out.push_str(&pos.join(","));
            }
            for (i, v) in f.iter() {
                let _ = write!(out, " {i}:{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn parse_header(line: usize, header: &str) -> Result<(usize, usize)> {
    let mut k = None;
    let mut d = None;
    for tok in header.split_whitespace() {
        let bad = || Error::Parse {
            line,
            message: format!("bad header token {tok:?}"),
        };
        let (key, val) = tok.split_once('=').ok_or_else(bad)?;
        let val: usize = val.parse().map_err(|_| bad())?;
        match key {
            "K" => k = Some(val),
            "D" => d = Some(val),
            _ => return Err(bad()),
        }
    }
    match (k, d) {
        (Some(k), Some(d)) => Ok((k, d)),
        _ => Err(Error::Parse {
            line,
            message: "header must be `K=<int> D=<int>`".into(),
        }),
    }
}
