//! Structural (call-ratio), semantic (TF-IDF cosine) and fused class
//! similarity, and the distance matrix DBSCAN runs on.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extract::CallGraph;
use crate::lexicon::TfIdfMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityKind {
    Structural,
    Semantic,
    Fused,
}

/// Symmetric N×N matrix with entries in [0, 1] and a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    n: usize,
    values: Vec<T>,
    kind: SimilarityKind,
    alpha: Option<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    /// Builds from the strict upper triangle; the rest follows by symmetry.
    fn from_upper(
        n: usize,
        kind: SimilarityKind,
        upper: impl Fn(usize, usize) -> T + Sync,
    ) -> Self {
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| upper(i, j)).collect())
            .collect();
        let mut values = vec![T::zero(); n * n];
        for (i, row) in rows.into_iter().enumerate() {
            values[i * n + i] = T::one();
            for (k, v) in row.into_iter().enumerate() {
                let j = i + 1 + k;
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        SimilarityMatrix {
            n,
            values,
            kind,
            alpha: None,
        }
    }

    /// Validated construction from a full row-major matrix.
    pub fn from_values(n: usize, values: Vec<T>, kind: SimilarityKind) -> Result<Self> {
        check_square(n, &values)?;
        for i in 0..n {
            if values[i * n + i] != T::one() {
                return Err(Error::InvalidParameter(format!(
                    "similarity[{i}][{i}] must be 1"
                )));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::InvalidParameter(format!(
                        "similarity[{i}][{j}] = {v} outside [0, 1]"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "similarity not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SimilarityMatrix {
            n,
            values,
            kind,
            alpha: None,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    /// Weight of the structural term, for fused matrices.
    pub fn alpha(&self) -> Option<T> {
        self.alpha
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn to_csv(&self, names: &[&str]) -> String {
        matrix_csv(self.n, &self.values, names)
    }
}

/// `1 - CS`: symmetric, zero diagonal, entries in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        check_square(n, &values)?;
        for i in 0..n {
            if values[i * n + i] != T::zero() {
                return Err(Error::InvalidParameter(format!(
                    "distance[{i}][{i}] must be 0"
                )));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::InvalidParameter(format!(
                        "distance[{i}][{j}] = {v} outside [0, 1]"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "distance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn to_csv(&self, names: &[&str]) -> String {
        matrix_csv(self.n, &self.values, names)
    }
}

fn check_square<T>(n: usize, values: &[T]) -> Result<()> {
    if values.len() != n * n {
        return Err(Error::DimensionMismatch {
            left: n * n,
            right: values.len(),
        });
    }
    Ok(())
}

fn matrix_csv<T: Scalar>(n: usize, values: &[T], names: &[&str]) -> String {
    let mut out = String::from("class");
    for name in names {
        out.push(',');
        out.push_str(&csv_field(name));
    }
    out.push('\n');
    for i in 0..n {
        out.push_str(&csv_field(names.get(i).copied().unwrap_or("")));
        for v in &values[i * n..(i + 1) * n] {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Call-ratio similarity. With `in(c)` the calls a class receives from other
/// classes:
///
/// * both `in` non-zero: `(calls(i,j)/in(j) + calls(j,i)/in(i)) / 2`
/// * only `in(j)` non-zero: `calls(i,j)/in(j)`
/// * only `in(i)` non-zero: `calls(j,i)/in(i)`
/// * otherwise 0.
pub fn structural_similarity<T: Scalar>(graph: &CallGraph) -> SimilarityMatrix<T> {
    let n = graph.len();
    let calls_in: Vec<u64> = (0..n).map(|i| graph.calls_in(i)).collect();
    let ratio =
        |from: usize, to: usize| T::of(graph.calls(from, to) as f64) / T::of(calls_in[to] as f64);
    SimilarityMatrix::from_upper(n, SimilarityKind::Structural, |i, j| {
        match (calls_in[i] != 0, calls_in[j] != 0) {
            (true, true) => (ratio(i, j) + ratio(j, i)) / T::of(2.0),
            (false, true) => ratio(i, j),
            (true, false) => ratio(j, i),
            (false, false) => T::zero(),
        }
    })
}

/// Cosine of TF-IDF rows. A zero row is dissimilar to everything else.
pub fn semantic_similarity<T: Scalar>(tfidf: &TfIdfMatrix<T>) -> SimilarityMatrix<T> {
    let n = tfidf.n_docs();
    let norms: Vec<T> = (0..n)
        .map(|i| {
            tfidf
                .row(i)
                .iter()
                .fold(T::zero(), |acc, &w| acc + w * w)
                .sqrt()
        })
        .collect();
    SimilarityMatrix::from_upper(n, SimilarityKind::Semantic, |i, j| {
        if norms[i] == T::zero() || norms[j] == T::zero() {
            return T::zero();
        }
        let dot = tfidf
            .row(i)
            .iter()
            .zip(tfidf.row(j))
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        (dot / (norms[i] * norms[j])).max(T::zero()).min(T::one())
    })
}

/// `alpha * structural + (1 - alpha) * semantic`, elementwise.
pub fn class_similarity<T: Scalar>(
    structural: &SimilarityMatrix<T>,
    semantic: &SimilarityMatrix<T>,
    alpha: T,
) -> Result<SimilarityMatrix<T>> {
    if structural.n != semantic.n {
        return Err(Error::DimensionMismatch {
            left: structural.n,
            right: semantic.n,
        });
    }
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} outside [0, 1]"
        )));
    }
    let beta = T::one() - alpha;
    let n = structural.n;
    let mut fused = SimilarityMatrix::from_upper(n, SimilarityKind::Fused, |i, j| {
        (alpha * structural.get(i, j) + beta * semantic.get(i, j)).min(T::one())
    });
    fused.alpha = Some(alpha);
    Ok(fused)
}

pub fn to_distance<T: Scalar>(cs: &SimilarityMatrix<T>) -> Result<DistanceMatrix<T>> {
    if cs.kind != SimilarityKind::Fused {
        return Err(Error::InvalidParameter(
            "distance is defined on the fused class similarity".into(),
        ));
    }
    let values = cs
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if k / cs.n == k % cs.n {
                T::zero()
            } else {
                T::one() - v
            }
        })
        .collect();
    Ok(DistanceMatrix { n: cs.n, values })
}
