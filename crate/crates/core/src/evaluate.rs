//! Decomposition scoring: intrinsic quality over the call graph, and
//! agreement with a reference service assignment.
//!
//! Outlier classes take part in no metric. Every function here fails with
//! [`Error::UndefinedMetric`] when the decomposition has no clusters.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};

use crate::cluster::Partition;
use crate::error::{Error, Result};
use crate::extract::CallGraph;
use crate::scalar::Scalar;

fn check_dims(p: &Partition, g: &CallGraph) -> Result<()> {
    if p.len() != g.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: g.len(),
        });
    }
    Ok(())
}

fn require_clusters(p: &Partition, metric: &'static str) -> Result<usize> {
    match p.n_clusters() {
        0 => Err(Error::UndefinedMetric(metric)),
        k => Ok(k),
    }
}

/// Cluster-to-cluster edge tally: `(from cluster, to cluster) -> (unique
/// directed class edges, summed icp weight)`. Self-calls and outliers skipped.
fn cluster_edges(p: &Partition, g: &CallGraph) -> BTreeMap<(usize, usize), (usize, f64)> {
    let mut out = BTreeMap::new();
    for (from, to, count) in g.edges() {
        if from == to {
            continue;
        }
        if let (Some(a), Some(b)) = (p.cluster_of(from), p.cluster_of(to)) {
            let e = out.entry((a, b)).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += (count as f64).ln() + 1.0;
        }
    }
    out
}

/// Structural modularity: mean cohesion `μ_i / m_i²` minus mean pairwise
/// coupling `σ_ij / (2 m_i m_j)`. A single cluster has no coupling term.
pub fn structural_modularity<T: Scalar>(p: &Partition, g: &CallGraph) -> Result<T> {
    check_dims(p, g)?;
    let k = require_clusters(p, "SM")?;
    let sizes: Vec<usize> = p.clusters().iter().map(Vec::len).collect();
    let mut mu = vec![0usize; k];
    let mut sigma = BTreeMap::<(usize, usize), usize>::new();
    for ((a, b), (edges, _)) in cluster_edges(p, g) {
        if a == b {
            mu[a] += edges;
        } else {
            *sigma.entry((a.min(b), a.max(b))).or_default() += edges;
        }
    }
    let cohesion: f64 = (0..k)
        .map(|i| mu[i] as f64 / (sizes[i] * sizes[i]) as f64)
        .sum::<f64>()
        / k as f64;
    let coupling = if k > 1 {
        let pairs = (k * (k - 1) / 2) as f64;
        sigma
            .iter()
            .map(|(&(i, j), &s)| s as f64 / (2 * sizes[i] * sizes[j]) as f64)
            .sum::<f64>()
            / pairs
    } else {
        0.0
    };
    Ok(T::of(cohesion - coupling))
}

/// Interface number: mean count, per cluster, of member classes called from
/// some other cluster.
pub fn interface_number<T: Scalar>(p: &Partition, g: &CallGraph) -> Result<T> {
    check_dims(p, g)?;
    let k = require_clusters(p, "IFN")?;
    let mut interfaces = BTreeSet::new();
    for (from, to, _) in g.edges() {
        if let (Some(a), Some(b)) = (p.cluster_of(from), p.cluster_of(to)) {
            if a != b {
                interfaces.insert(to);
            }
        }
    }
    Ok(T::of_usize(interfaces.len()) / T::of_usize(k))
}

/// Share of clusters whose size is outside the open interval (5, 20).
pub fn non_extreme_distribution<T: Scalar>(p: &Partition) -> Result<T> {
    let k = require_clusters(p, "NED")?;
    let moderate = p
        .clusters()
        .iter()
        .filter(|c| c.len() > 5 && c.len() < 20)
        .count();
    Ok(T::one() - T::of_usize(moderate) / T::of_usize(k))
}

/// Inter-cluster share of log-weighted call volume. Each calling class pair
/// contributes `ln(calls) + 1`.
pub fn inter_call_percentage<T: Scalar>(p: &Partition, g: &CallGraph) -> Result<T> {
    check_dims(p, g)?;
    require_clusters(p, "ICP")?;
    let (mut inter, mut intra) = (0.0, 0.0);
    for ((a, b), (_, weight)) in cluster_edges(p, g) {
        if a == b {
            intra += weight;
        } else {
            inter += weight;
        }
    }
    if inter + intra == 0.0 {
        return Err(Error::UndefinedMetric("ICP"));
    }
    Ok(T::of(inter / (inter + intra)))
}

/// Intrinsic metrics of one decomposition. `icp` is `None` when no calls
/// connect clustered classes.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport<T> {
    pub k: usize,
    pub outlier_count: usize,
    pub sm: T,
    pub ifn: T,
    pub ned: T,
    pub icp: Option<T>,
}

impl<T: Scalar> QualityReport<T> {
    pub fn compute(p: &Partition, g: &CallGraph) -> Result<Self> {
        let icp = match inter_call_percentage(p, g) {
            Ok(v) => Some(v),
            Err(Error::UndefinedMetric(_)) if p.n_clusters() > 0 => None,
            Err(e) => return Err(e),
        };
        Ok(QualityReport {
            k: p.n_clusters(),
            outlier_count: p.outlier_count(),
            sm: structural_modularity(p, g)?,
            ifn: interface_number(p, g)?,
            ned: non_extreme_distribution(p)?,
            icp,
        })
    }
}

/// Writes a metric as a number, or the string `"NA"` when undefined.
pub fn metric_value<T: Scalar>(v: Option<T>) -> serde_json::Value {
    match v.map(Scalar::as_f64) {
        Some(x) if x.is_finite() => serde_json::json!(x),
        _ => serde_json::Value::String("NA".into()),
    }
}

impl<T: Scalar> Serialize for QualityReport<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("QualityReport", 6)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("outliers", &self.outlier_count)?;
        st.serialize_field("sm", &metric_value(Some(self.sm)))?;
        st.serialize_field("ifn", &metric_value(Some(self.ifn)))?;
        st.serialize_field("ned", &metric_value(Some(self.ned)))?;
        st.serialize_field("icp", &metric_value(self.icp))?;
        st.end()
    }
}

/// Reference decomposition: every class of the universe in exactly one
/// service. Services are numbered in name order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    services: Vec<String>,
    labels: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TruthFile {
    services: BTreeMap<String, Vec<String>>,
}

fn name_list(names: &BTreeSet<&str>) -> String {
    names.iter().copied().collect::<Vec<_>>().join(", ")
}

impl GroundTruth {
    /// Service ids given directly, one per class.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let k = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
        GroundTruth {
            services: (0..k).map(|i| format!("service{i}")).collect(),
            labels,
        }
    }

    /// Parses `{"services": {"name": ["class", ...]}}` against the class
    /// names of the project, in id order.
    pub fn from_json(text: &str, classes: &[&str]) -> Result<Self> {
        let file: TruthFile = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("ground truth: {e}")))?;
        let index: BTreeMap<&str, usize> =
            classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut labels = vec![None; classes.len()];
        let mut unknown = BTreeSet::new();
        let mut repeated = BTreeSet::new();
        for (service, (_, members)) in file.services.iter().enumerate() {
            for member in members {
                match index.get(member.as_str()) {
                    None => {
                        unknown.insert(member.as_str());
                    }
                    Some(&i) if labels[i].is_some() => {
                        repeated.insert(member.as_str());
                    }
                    Some(&i) => labels[i] = Some(service),
                }
            }
        }
        let missing: BTreeSet<&str> = classes
            .iter()
            .zip(&labels)
            .filter(|(_, l)| l.is_none())
            .map(|(&c, _)| c)
            .collect();
        let mut problems = Vec::new();
        if !missing.is_empty() {
            problems.push(format!("not in any service: {}", name_list(&missing)));
        }
        if !unknown.is_empty() {
            problems.push(format!("not project classes: {}", name_list(&unknown)));
        }
        if !repeated.is_empty() {
            problems.push(format!("listed more than once: {}", name_list(&repeated)));
        }
        if !problems.is_empty() {
            return Err(Error::UniverseMismatch(problems.join("; ")));
        }
        Ok(GroundTruth {
            services: file.services.into_keys().collect(),
            labels: labels.into_iter().map(Option::unwrap).collect(),
        })
    }

    pub fn load(path: &Path, classes: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, classes)
    }

    pub fn services(&self) -> &[String] {
        &self.services
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Truth service sharing the largest fraction of `cluster`, ties to the
/// lowest service id, with that fraction.
pub fn correspond<T: Scalar>(cluster: &[usize], truth: &GroundTruth) -> (usize, T) {
    let mut overlap = vec![0usize; truth.services.len()];
    for &c in cluster {
        overlap[truth.labels[c]] += 1;
    }
    let (best, count) =
        overlap
            .iter()
            .enumerate()
            .fold((0, 0), |acc, (s, &n)| if n > acc.1 { (s, n) } else { acc });
    (best, T::of_usize(count) / T::of_usize(cluster.len().max(1)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ClusterMatch<T> {
    pub cluster: usize,
    pub service: String,
    #[serde(serialize_with = "as_f64")]
    pub overlap: T,
}

fn as_f64<T: Scalar, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(v.as_f64())
}

/// Agreement of a decomposition with a ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport<T> {
    pub precision: T,
    /// Threshold k (meaning k/10) to success rate.
    pub sr: BTreeMap<u8, T>,
    pub per_cluster: Vec<ClusterMatch<T>>,
}

impl<T: Scalar> MatchReport<T> {
    pub fn compute(p: &Partition, truth: &GroundTruth, thresholds: &[u8]) -> Result<Self> {
        if p.len() != truth.len() {
            return Err(Error::DimensionMismatch {
                left: p.len(),
                right: truth.len(),
            });
        }
        let k = require_clusters(p, "precision")?;
        if let Some(&bad) = thresholds.iter().find(|&&t| !(1..=10).contains(&t)) {
            return Err(Error::InvalidParameter(format!(
                "success-rate threshold {bad} outside 1..=10"
            )));
        }
        let per_cluster: Vec<ClusterMatch<T>> = p
            .clusters()
            .iter()
            .enumerate()
            .map(|(cluster, members)| {
                let (service, overlap) = correspond::<T>(members, truth);
                ClusterMatch {
                    cluster,
                    service: truth.services[service].clone(),
                    overlap,
                }
            })
            .collect();
        let kk = T::of_usize(k);
        let precision = per_cluster.iter().fold(T::zero(), |acc, m| acc + m.overlap) / kk;
        let sr = thresholds
            .iter()
            .map(|&t| {
                // compare counts, not floats: overlap >= t/10
                let hits = p
                    .clusters()
                    .iter()
                    .filter(|members| {
                        let (s, _) = correspond::<T>(members, truth);
                        let shared = members.iter().filter(|&&c| truth.labels[c] == s).count();
                        10 * shared >= t as usize * members.len()
                    })
                    .count();
                (t, T::of_usize(hits) / kk)
            })
            .collect();
        Ok(MatchReport {
            precision,
            sr,
            per_cluster,
        })
    }

    pub fn success_rate(&self, threshold: u8) -> Option<T> {
        self.sr.get(&threshold).copied()
    }
}

impl<T: Scalar> Serialize for MatchReport<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Rates<'a, T>(&'a BTreeMap<u8, T>);
        impl<T: Scalar> Serialize for Rates<'_, T> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    m.serialize_entry(&format!("sr@{k}"), &v.as_f64())?;
                }
                m.end()
            }
        }
        let mut st = s.serialize_struct("MatchReport", 3)?;
        st.serialize_field("precision", &self.precision.as_f64())?;
        st.serialize_field("success_rate", &Rates(&self.sr))?;
        st.serialize_field("per_cluster", &self.per_cluster)?;
        st.end()
    }
}
