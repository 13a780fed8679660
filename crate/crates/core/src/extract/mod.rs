//! Front end: class roster, class-level call-count graph and raw lexical
//! items, either scanned from a source tree or loaded from a facts file.

mod facts;
mod java;
mod lexer;
mod scan;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use facts::{load_facts, save_facts, to_facts_json};
pub use java::keywords as profile_keywords;
pub use scan::{scan_sources, Scan, ScanWarning, JAVA_LIKE};

/// One top-level type of the monolith. Nested and anonymous types are folded
/// into their enclosing top-level type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub id: usize,
    pub qualified_name: String,
    pub source_path: String,
    /// Class, method, parameter, field and local-variable names.
    pub identifiers: Vec<String>,
    pub comments: Vec<String>,
}

/// Dense N×N matrix of static call counts, `calls(i, j)` being the number of
/// invocation sites in class i resolved to a method of class j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph {
    n: usize,
    counts: Vec<u64>,
}

impl CallGraph {
    pub fn new(n: usize) -> Self {
        CallGraph {
            n,
            counts: vec![0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        let mut graph = CallGraph::new(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: row.len(),
                });
            }
            graph.counts[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(graph)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn calls(&self, from: usize, to: usize) -> u64 {
        self.counts[from * self.n + to]
    }

    pub fn add(&mut self, from: usize, to: usize, count: u64) {
        self.counts[from * self.n + to] += count;
    }

    pub fn set(&mut self, from: usize, to: usize, count: u64) {
        self.counts[from * self.n + to] = count;
    }

    /// Calls arriving at `class` from other classes. Self-calls are excluded.
    pub fn calls_in(&self, class: usize) -> u64 {
        (0..self.n)
            .filter(|&j| j != class)
            .map(|j| self.calls(j, class))
            .sum()
    }

    /// Non-zero cells in row-major order, self-calls included.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(k, &c)| (k / self.n, k % self.n, c))
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts
            .chunks(self.n.max(1))
            .take(self.n)
            .map(<[u64]>::to_vec)
            .collect()
    }
}

/// The extracted monolith. Class ids are indices into `classes`, ordered by
/// qualified name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectFacts {
    classes: Vec<ClassRecord>,
    call_graph: CallGraph,
}

impl ProjectFacts {
    /// Checks that ids are contiguous, names unique and the graph sized to
    /// the roster.
    pub fn new(classes: Vec<ClassRecord>, call_graph: CallGraph) -> Result<Self> {
        if call_graph.len() != classes.len() {
            return Err(Error::DimensionMismatch {
                left: classes.len(),
                right: call_graph.len(),
            });
        }
        let mut seen = HashMap::new();
        for (i, class) in classes.iter().enumerate() {
            if class.id != i {
                return Err(Error::Validation(format!(
                    "classes[{i}].id: expected {i}, found {}",
                    class.id
                )));
            }
            if seen.insert(class.qualified_name.as_str(), i).is_some() {
                return Err(Error::Validation(format!(
                    "classes[{i}].name: duplicate class `{}`",
                    class.qualified_name
                )));
            }
        }
        Ok(ProjectFacts {
            classes,
            call_graph,
        })
    }

    /// Builds facts from unordered records and named call triples. Ids are
    /// assigned by sorting on qualified name.
    pub fn assemble<I>(mut records: Vec<ClassRecord>, calls: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, u64)>,
    {
        records.sort_by(|a, b| a.qualified_name.cmp(&b.qualified_name));
        for (i, r) in records.iter_mut().enumerate() {
            r.id = i;
        }
        let index: HashMap<&str, usize> = records
            .iter()
            .map(|r| (r.qualified_name.as_str(), r.id))
            .collect();
        let mut graph = CallGraph::new(records.len());
        for (from, to, count) in calls {
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::Validation(format!("unknown class `{name}` in calls")))
            };
            graph.add(lookup(&from)?, lookup(&to)?, count);
        }
        ProjectFacts::new(records, graph)
    }

    pub fn classes(&self) -> &[ClassRecord] {
        &self.classes
    }

    pub fn call_graph(&self) -> &CallGraph {
        &self.call_graph
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.classes
            .iter()
            .map(|c| c.qualified_name.as_str())
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.classes
            .binary_search_by(|c| c.qualified_name.as_str().cmp(name))
            .ok()
    }
}
