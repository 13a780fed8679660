use msdecomp::cluster::Partition;
use msdecomp::evaluate::metric_value;
use msdecomp::{CallGraph, Error, GroundTruth, MatchReportF64, QualityReportF64};
use serde_json::{json, Map, Value};

pub const THRESHOLDS: [u8; 3] = [5, 7, 9];

fn undefined<T>(r: msdecomp::Result<T>) -> msdecomp::Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedMetric(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Metrics of one decomposition. Quality and matching are `None` when the
/// decomposition has no clusters; they print as `NA`.
#[derive(Debug, Clone)]
pub struct Metrics {
    pub classes: usize,
    pub clusters: usize,
    pub outliers: usize,
    pub quality: Option<QualityReportF64>,
    pub with_truth: bool,
    pub matching: Option<MatchReportF64>,
}

impl Metrics {
    pub fn compute(
        p: &Partition,
        graph: &CallGraph,
        truth: Option<&GroundTruth>,
    ) -> msdecomp::Result<Self> {
        let quality = undefined(QualityReportF64::compute(p, graph))?;
        let matching = match truth {
            Some(t) => undefined(MatchReportF64::compute(p, t, &THRESHOLDS))?,
            None => None,
        };
        Ok(Metrics {
            classes: p.len(),
            clusters: p.n_clusters(),
            outliers: p.outlier_count(),
            quality,
            with_truth: truth.is_some(),
            matching,
        })
    }

    fn values(&self) -> Vec<(String, Value)> {
        let q = self.quality.as_ref();
        let mut v = vec![
            ("clusters".to_string(), json!(self.clusters)),
            ("outliers".to_string(), json!(self.outliers)),
            ("sm".to_string(), metric_value(q.map(|q| q.sm))),
            ("ifn".to_string(), metric_value(q.map(|q| q.ifn))),
            ("ned".to_string(), metric_value(q.map(|q| q.ned))),
            ("icp".to_string(), metric_value(q.and_then(|q| q.icp))),
        ];
        if self.with_truth {
            let m = self.matching.as_ref();
            v.push(("precision".into(), metric_value(m.map(|m| m.precision))));
            for k in THRESHOLDS {
                v.push((
                    format!("sr@{k}"),
                    metric_value(m.and_then(|m| m.success_rate(k))),
                ));
            }
        }
        v
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("classes".into(), json!(self.classes));
        for (k, v) in self.values() {
            obj.insert(k, v);
        }
        if let Some(m) = &self.matching {
            obj.insert(
                "per_cluster".into(),
                serde_json::to_value(&m.per_cluster).expect("matches serialise"),
            );
        }
        Value::Object(obj)
    }

    pub fn csv_header(&self) -> String {
        self.values()
            .into_iter()
            .map(|(k, _)| k)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn csv_row(&self) -> String {
        self.values()
            .into_iter()
            .map(|(_, v)| match v {
                Value::String(s) => s,
                other => other.to_string(),
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serialises");
    s.push('\n');
    s
}
