//! Hierarchy and decomposition files: JSON for machines, DOT for people.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{hierarchy_edges, Decomposition, Hierarchy, HierarchyEdge};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Serialize)]
struct LayerOut<'a> {
    epsilon: f64,
    clusters: usize,
    outliers: usize,
    assignment: &'a [isize],
    core: &'a [bool],
}

#[derive(Serialize)]
struct HierarchyOut<'a> {
    classes: &'a [&'a str],
    min_samples: usize,
    step: f64,
    max_epsilon: f64,
    layers: Vec<LayerOut<'a>>,
    edges: Vec<HierarchyEdge>,
}

#[derive(Serialize)]
struct DecompositionOut<'a> {
    classes: &'a [&'a str],
    epsilon: f64,
    min_samples: usize,
    clusters: usize,
    outliers: usize,
    assignment: &'a [isize],
    core: &'a [bool],
}

fn layer_out<T: Scalar>(d: &Decomposition<T>) -> LayerOut<'_> {
    LayerOut {
        epsilon: d.epsilon().as_f64(),
        clusters: d.n_clusters(),
        outliers: d.outlier_count(),
        assignment: d.assignment(),
        core: d.core_flags(),
    }
}

fn pretty<S: Serialize>(value: &S) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("export serialises");
    out.push('\n');
    out
}

pub fn hierarchy_json<T: Scalar>(h: &Hierarchy<T>, names: &[&str]) -> String {
    pretty(&HierarchyOut {
        classes: names,
        min_samples: h.min_samples(),
        step: h.step().as_f64(),
        max_epsilon: h.max_epsilon().as_f64(),
        layers: h.layers().iter().map(layer_out).collect(),
        edges: hierarchy_edges(h),
    })
}

pub fn decomposition_json<T: Scalar>(d: &Decomposition<T>, names: &[&str]) -> String {
    pretty(&DecompositionOut {
        classes: names,
        epsilon: d.epsilon().as_f64(),
        min_samples: d.min_samples(),
        clusters: d.n_clusters(),
        outliers: d.outlier_count(),
        assignment: d.assignment(),
        core: d.core_flags(),
    })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn simple_name(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}

/// One node per cluster per layer, grouped by layer; outliers of a layer are
/// a single dashed node without edges.
pub fn hierarchy_dot<T: Scalar>(h: &Hierarchy<T>, names: &[&str]) -> String {
    let mut out =
        String::from("digraph hierarchy {\n  rankdir=LR;\n  node [shape=box, fontsize=10];\n");
    for (t, layer) in h.layers().iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_layer{t} {{");
        let _ = writeln!(out, "    label=\"epsilon {}\";", layer.epsilon());
        for (c, members) in layer.partition().clusters().iter().enumerate() {
            let listed: Vec<String> = members
                .iter()
                .map(|&m| dot_escape(simple_name(names.get(m).copied().unwrap_or(""))))
                .collect();
            let _ = writeln!(
                out,
                "    \"L{t}_C{c}\" [label=\"m{c} ({})\\n{}\"];",
                members.len(),
                listed.join("\\n")
            );
        }
        let outliers = layer.partition().outliers();
        if !outliers.is_empty() {
            let listed: Vec<String> = outliers
                .iter()
                .map(|&m| dot_escape(simple_name(names.get(m).copied().unwrap_or(""))))
                .collect();
            let _ = writeln!(
                out,
                "    \"L{t}_outliers\" [label=\"outliers ({})\\n{}\", style=dashed, color=gray];",
                outliers.len(),
                listed.join("\\n")
            );
        }
        out.push_str("  }\n");
    }
    for e in hierarchy_edges(h) {
        let _ = writeln!(
            out,
            "  \"L{}_C{}\" -> \"L{}_C{}\";",
            e.layer,
            e.child,
            e.layer + 1,
            e.parent
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Deserialize)]
struct LayerIn {
    assignment: Vec<isize>,
}

#[derive(Deserialize)]
struct AssignmentIn {
    classes: Vec<String>,
    #[serde(default)]
    assignment: Option<Vec<isize>>,
    #[serde(default)]
    layers: Option<Vec<LayerIn>>,
}

/// Class names and labels read back from a decomposition or hierarchy file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentFile {
    pub classes: Vec<String>,
    pub labels: Vec<isize>,
}

/// Reads a decomposition file, or one layer of a hierarchy file (the final
/// layer when `layer` is `None`).
pub fn read_assignment(text: &str, layer: Option<usize>) -> Result<AssignmentFile> {
    let parsed: AssignmentIn = serde_json::from_str(text)
        .map_err(|e| Error::Validation(format!("decomposition file: {e}")))?;
    let labels = match (parsed.assignment, parsed.layers) {
        (Some(a), None) if layer.is_none() => a,
        (None, Some(mut layers)) => {
            let idx = layer.unwrap_or(layers.len().saturating_sub(1));
            if idx >= layers.len() {
                return Err(Error::Validation(format!(
                    "layers: index {idx} out of range ({} layers)",
                    layers.len()
                )));
            }
            layers.swap_remove(idx).assignment
        }
        (Some(_), None) => {
            return Err(Error::Validation(
                "a layer index applies only to hierarchy files".into(),
            ))
        }
        _ => {
            return Err(Error::Validation(
                "expected exactly one of `assignment` or `layers`".into(),
            ))
        }
    };
    if labels.len() != parsed.classes.len() {
        return Err(Error::Validation(format!(
            "assignment: {} labels for {} classes",
            labels.len(),
            parsed.classes.len()
        )));
    }
    Ok(AssignmentFile {
        classes: parsed.classes,
        labels,
    })
}
