//! Facts file: `{ "classes": [...], "calls": [{ "from", "to", "count" }] }`.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClassRecord, ProjectFacts};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactsFile {
    classes: Vec<ClassEntry>,
    calls: Vec<CallEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    name: String,
    path: String,
    identifiers: Vec<String>,
    comments: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CallEntry {
    from: String,
    to: String,
    count: i64,
}

/// Serialises facts deterministically: classes in id order, calls row-major,
/// zero cells omitted.
pub fn to_facts_json(facts: &ProjectFacts) -> String {
    let file = FactsFile {
        classes: facts
            .classes()
            .iter()
            .map(|c| ClassEntry {
                name: c.qualified_name.clone(),
                path: c.source_path.clone(),
                identifiers: c.identifiers.clone(),
                comments: c.comments.clone(),
            })
            .collect(),
        calls: facts
            .call_graph()
            .edges()
            .map(|(i, j, count)| CallEntry {
                from: facts.classes()[i].qualified_name.clone(),
                to: facts.classes()[j].qualified_name.clone(),
                count: count as i64,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("facts serialise");
    out.push('\n');
    out
}

pub fn save_facts(facts: &ProjectFacts, path: &Path) -> Result<()> {
    fs::write(path, to_facts_json(facts)).map_err(|e| Error::io(path, e))
}

pub fn load_facts(path: &Path) -> Result<ProjectFacts> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_facts(&text).map_err(|e| match e {
        ParseFailure::Json(source) => Error::Json {
            path: path.to_path_buf(),
            source,
        },
        ParseFailure::Invalid(e) => e,
    })
}

enum ParseFailure {
    Json(serde_json::Error),
    Invalid(Error),
}

fn parse_facts(text: &str) -> std::result::Result<ProjectFacts, ParseFailure> {
    let file: FactsFile = serde_json::from_str(text).map_err(ParseFailure::Json)?;
    let invalid = |msg: String| ParseFailure::Invalid(Error::Validation(msg));

    let mut names = HashSet::new();
    for (i, c) in file.classes.iter().enumerate() {
        if c.name.is_empty() {
            return Err(invalid(format!("classes[{i}].name: empty class name")));
        }
        if !names.insert(c.name.as_str()) {
            return Err(invalid(format!(
                "classes[{i}].name: duplicate class `{}`",
                c.name
            )));
        }
    }
    let mut pairs = HashSet::new();
    let mut calls = Vec::with_capacity(file.calls.len());
    for (k, call) in file.calls.iter().enumerate() {
        for (field, name) in [("from", &call.from), ("to", &call.to)] {
            if !names.contains(name.as_str()) {
                return Err(invalid(format!(
                    "calls[{k}].{field}: `{name}` is not a class of the project"
                )));
            }
        }
        if call.count < 0 {
            return Err(invalid(format!(
                "calls[{k}].count: negative count {}",
                call.count
            )));
        }
        if !pairs.insert((call.from.as_str(), call.to.as_str())) {
            return Err(invalid(format!(
                "calls[{k}]: duplicate pair `{}` -> `{}`",
                call.from, call.to
            )));
        }
        calls.push((call.from.clone(), call.to.clone(), call.count as u64));
    }
    let records = file
        .classes
        .into_iter()
        .map(|c| ClassRecord {
            id: 0,
            qualified_name: c.name,
            source_path: c.path,
            identifiers: c.identifiers,
            comments: c.comments,
        })
        .collect();
    ProjectFacts::assemble(records, calls).map_err(ParseFailure::Invalid)
}
