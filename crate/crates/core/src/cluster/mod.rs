//! Density-based clustering over a precomputed distance matrix, and the
//! epsilon-stepped variant that produces a hierarchy of nested layers.

mod export;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similarity::DistanceMatrix;

pub use export::{
    decomposition_json, hierarchy_dot, hierarchy_json, read_assignment, AssignmentFile,
};

/// Outlier label.
pub const NOISE: isize = -1;

/// An assignment vector with dense labels `0..k` and `-1` for outliers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<isize>,
    k: usize,
}

impl Partition {
    /// Accepts any labelling whose non-negative labels are exactly `0..k`.
    pub fn new(labels: Vec<isize>) -> Result<Self> {
        let mut used = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            if l < NOISE {
                return Err(Error::InvalidParameter(format!(
                    "label {l} of class {i} is below -1"
                )));
            }
            if l >= 0 {
                let l = l as usize;
                if l >= used.len() {
                    used.resize(l + 1, false);
                }
                used[l] = true;
            }
        }
        if let Some(gap) = used.iter().position(|u| !u) {
            return Err(Error::InvalidParameter(format!(
                "cluster labels are not dense: {gap} unused"
            )));
        }
        Ok(Partition {
            k: used.len(),
            labels,
        })
    }

    /// Renumbers clusters by their lowest member id.
    pub fn canonical(labels: &[isize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let relabeled: Vec<isize> = labels
            .iter()
            .map(|&l| {
                if l < 0 {
                    NOISE
                } else {
                    let next = map.len() as isize;
                    *map.entry(l).or_insert(next)
                }
            })
            .collect();
        Partition {
            k: map.len(),
            labels: relabeled,
        }
    }

    pub fn labels(&self) -> &[isize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.k
    }

    pub fn outlier_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    pub fn cluster_of(&self, class: usize) -> Option<usize> {
        usize::try_from(self.labels[class]).ok()
    }

    /// Member ids per cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            if l >= 0 {
                out[l as usize].push(i);
            }
        }
        out
    }

    pub fn outliers(&self) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] < 0)
            .collect()
    }
}

/// One DBSCAN result.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    partition: Partition,
    epsilon: T,
    min_samples: usize,
    core: Vec<bool>,
}

impl<T: Scalar> Decomposition<T> {
    pub fn assignment(&self) -> &[isize] {
        self.partition.labels()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn min_samples(&self) -> usize {
        self.min_samples
    }

    pub fn core_flags(&self) -> &[bool] {
        &self.core
    }

    pub fn n_clusters(&self) -> usize {
        self.partition.n_clusters()
    }

    pub fn outlier_count(&self) -> usize {
        self.partition.outlier_count()
    }
}

fn check_epsilon<T: Scalar>(epsilon: T) -> Result<()> {
    if epsilon >= T::zero() && epsilon <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} outside [0, 1]"
        )))
    }
}

fn check_min_samples(min_samples: usize) -> Result<()> {
    if min_samples == 0 {
        return Err(Error::InvalidParameter(
            "min_samples must be at least 1".into(),
        ));
    }
    Ok(())
}

/// DBSCAN with `d <= epsilon` neighbourhoods that include the point itself.
///
/// Clusters are the connected components of core points; a non-core point
/// within `epsilon` of some core point joins the cluster of the lowest-id
/// such core. Labels are canonical (cluster 0 holds the lowest clustered id).
pub fn dbscan<T: Scalar>(
    d: &DistanceMatrix<T>,
    epsilon: T,
    min_samples: usize,
) -> Result<Decomposition<T>> {
    check_epsilon(epsilon)?;
    check_min_samples(min_samples)?;
    let n = d.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|p| (0..n).filter(|&q| d.get(p, q) <= epsilon).collect())
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_samples).collect();

    let mut labels = vec![NOISE; n];
    let mut next = 0isize;
    let mut stack = Vec::new();
    for seed in 0..n {
        if !core[seed] || labels[seed] != NOISE {
            continue;
        }
        labels[seed] = next;
        stack.push(seed);
        while let Some(p) = stack.pop() {
            for &q in &neighbors[p] {
                if core[q] && labels[q] == NOISE {
                    labels[q] = next;
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    for p in 0..n {
        if !core[p] {
            if let Some(&q) = neighbors[p].iter().find(|&&q| core[q]) {
                labels[p] = labels[q];
            }
        }
    }
    Ok(Decomposition {
        partition: Partition::canonical(&labels),
        epsilon,
        min_samples,
        core,
    })
}

/// Ordered layers of DBSCAN runs at epsilon = 0, step, 2·step, ... up to
/// `max_epsilon`. The last layer is the recommended decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy<T> {
    layers: Vec<Decomposition<T>>,
    step: T,
    max_epsilon: T,
    min_samples: usize,
}

impl<T: Scalar> Hierarchy<T> {
    pub fn layers(&self) -> &[Decomposition<T>] {
        &self.layers
    }

    pub fn final_layer(&self) -> &Decomposition<T> {
        self.layers
            .last()
            .expect("hierarchy has at least one layer")
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn max_epsilon(&self) -> T {
        self.max_epsilon
    }

    pub fn min_samples(&self) -> usize {
        self.min_samples
    }
}

const MAX_LAYERS: usize = 100_000;

/// Layer epsilons. Grid values are rounded to 12 decimals so that e.g. the
/// seventh 0.1 step is 0.7 rather than 0.7000000000000001; a final layer at
/// exactly `max_epsilon` is appended when the grid does not land on it.
pub fn epsilon_grid<T: Scalar>(step: T, max_epsilon: T) -> Result<Vec<T>> {
    if !(step > T::zero() && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step = {step} must be positive"
        )));
    }
    check_epsilon(max_epsilon)?;
    let (step64, max64) = (step.as_f64(), max_epsilon.as_f64());
    let steps = (max64 / step64 + 1e-9).floor() as usize;
    if steps >= MAX_LAYERS {
        return Err(Error::InvalidParameter(format!(
            "step {step} yields more than {MAX_LAYERS} layers"
        )));
    }
    let mut grid: Vec<T> = (0..=steps)
        .map(|k| T::of(((k as f64 * step64) * 1e12).round() / 1e12))
        .collect();
    let last = grid.last_mut().expect("grid has epsilon 0");
    if (last.as_f64() - max64).abs() <= 1e-9 {
        *last = max_epsilon;
    } else {
        grid.push(max_epsilon);
    }
    Ok(grid)
}

pub fn epsilon_dbscan<T: Scalar>(
    d: &DistanceMatrix<T>,
    step: T,
    max_epsilon: T,
    min_samples: usize,
) -> Result<Hierarchy<T>> {
    check_min_samples(min_samples)?;
    let grid = epsilon_grid(step, max_epsilon)?;
    let layers = grid
        .par_iter()
        .map(|&eps| dbscan(d, eps, min_samples))
        .collect::<Result<Vec<_>>>()?;
    Ok(Hierarchy {
        layers,
        step,
        max_epsilon,
        min_samples,
    })
}

/// Cluster `child` of layer `layer` is contained in cluster `parent` of
/// layer `layer + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct HierarchyEdge {
    pub layer: usize,
    pub child: usize,
    pub parent: usize,
}

/// Parent of each cluster is the next-layer cluster holding its core points.
pub fn hierarchy_edges<T: Scalar>(h: &Hierarchy<T>) -> Vec<HierarchyEdge> {
    let mut edges = Vec::new();
    for (t, pair) in h.layers.windows(2).enumerate() {
        let (layer, next) = (&pair[0], &pair[1]);
        for (child, members) in layer.partition.clusters().iter().enumerate() {
            let core = members
                .iter()
                .copied()
                .find(|&m| layer.core[m])
                .expect("every cluster has a core point");
            if let Some(parent) = next.partition.cluster_of(core) {
                edges.push(HierarchyEdge {
                    layer: t,
                    child,
                    parent,
                });
            }
        }
    }
    edges
}
