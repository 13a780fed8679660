use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use msdecomp::cluster::{
    dbscan, decomposition_json, epsilon_dbscan, hierarchy_dot, hierarchy_json, read_assignment,
    Partition, NOISE,
};
use msdecomp::extract::{load_facts, scan_sources, to_facts_json};
use msdecomp::lexicon::documents;
use msdecomp::similarity::SimilarityMatrix;
use msdecomp::{
    build_tfidf, class_similarity, semantic_similarity, structural_similarity, to_distance,
    DistanceMatrixF64, Error, GroundTruth, ProjectFacts, Stoplist,
};
use serde_json::{json, Value};

use crate::metrics::{pretty, Metrics};
use crate::{CliError, Command, Format, InputArgs, RunConfig, SweepParam};

type Outcome = Result<(), CliError>;

pub fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Extract {
            root,
            out_dir,
            profile,
        } => extract(root, out_dir.as_deref(), profile, out, err),
        Command::Decompose {
            input,
            tuning,
            truth,
            out_dir,
            format,
        } => {
            let config = RunConfig::from(tuning);
            config.validate()?;
            decompose(
                input,
                &config,
                truth.as_deref(),
                out_dir.as_deref(),
                *format,
                out,
                err,
            )
        }
        Command::Evaluate {
            input,
            decomposition,
            layer,
            truth,
            out_dir,
            format,
        } => evaluate(
            input,
            decomposition,
            *layer,
            truth.as_deref(),
            out_dir.as_deref(),
            *format,
            out,
            err,
        ),
        Command::Sweep {
            input,
            tuning,
            param,
            from,
            to,
            by,
            truth,
            out_dir,
            format,
        } => {
            let config = RunConfig::from(tuning);
            config.validate()?;
            let values = sweep_values(*param, *from, *to, *by)?;
            sweep(
                input,
                &config,
                *param,
                &values,
                truth.as_deref(),
                out_dir.as_deref(),
                *format,
                out,
                err,
            )
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Writes `files` into `dir`, or the single `stdout_text` to `out`.
fn emit(
    dir: Option<&Path>,
    files: &[(&str, &str)],
    stdout_text: &str,
    out: &mut dyn Write,
) -> Outcome {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            for (name, text) in files {
                let path = dir.join(name);
                std::fs::write(&path, text).map_err(|e| io_error(&path, e))?;
            }
        }
        None => out
            .write_all(stdout_text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}")))?,
    }
    Ok(())
}

fn extract(
    root: &Path,
    out_dir: Option<&Path>,
    profile: &str,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    if !root.is_dir() {
        return Err(CliError::Input(format!(
            "{}: not a directory",
            root.display()
        )));
    }
    let scan = scan_sources(root, profile)?;
    for w in &scan.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let text = to_facts_json(&scan.facts);
    emit(out_dir, &[("facts.json", &text)], &text, out)
}

fn load_input(input: &InputArgs, err: &mut dyn Write) -> Result<ProjectFacts, CliError> {
    let facts = if input.input.is_dir() {
        let scan = scan_sources(&input.input, &input.profile)?;
        for w in &scan.warnings {
            let _ = writeln!(err, "warning: {w}");
        }
        scan.facts
    } else {
        load_facts(&input.input)?
    };
    if facts.is_empty() {
        return Err(CliError::Degenerate(format!(
            "{}: no classes found",
            input.input.display()
        )));
    }
    Ok(facts)
}

fn load_truth(path: Option<&Path>, facts: &ProjectFacts) -> Result<Option<GroundTruth>, CliError> {
    path.map(|p| GroundTruth::load(p, &facts.names()).map_err(CliError::from))
        .transpose()
}

/// Similarity inputs computed once per run and fused per alpha.
struct Prepared {
    structural: SimilarityMatrix<f64>,
    /// `None` when preprocessing left every class without terms.
    semantic: Option<SimilarityMatrix<f64>>,
}

impl Prepared {
    fn new(facts: &ProjectFacts, config: &RunConfig) -> Result<Self, CliError> {
        let stoplist = match &config.stopwords {
            Some(path) => Stoplist::with_file(path)?,
            None => Stoplist::builtin(),
        };
        let semantic = match build_tfidf::<f64>(&documents(facts, &stoplist)) {
            Ok(tfidf) => Some(semantic_similarity(&tfidf)),
            Err(Error::DegenerateVocabulary) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(Prepared {
            structural: structural_similarity(facts.call_graph()),
            semantic,
        })
    }

    fn distance(&self, alpha: f64) -> Result<DistanceMatrixF64, CliError> {
        let semantic = match (&self.semantic, alpha == 1.0) {
            (Some(s), _) => s,
            // semantic weight is zero; any matrix of the right size will do
            (None, true) => &self.structural,
            (None, false) => {
                return Err(CliError::Degenerate(format!(
                    "{}; use --alpha 1 to cluster on calls alone",
                    Error::DegenerateVocabulary
                )))
            }
        };
        Ok(to_distance(&class_similarity(
            &self.structural,
            semantic,
            alpha,
        )?)?)
    }
}

fn report_text(m: &Metrics, format: Format) -> String {
    match format {
        Format::Csv => format!("{}\n{}\n", m.csv_header(), m.csv_row()),
        _ => pretty(&m.to_json()),
    }
}

fn warn_if_all_outliers(p: &Partition, epsilon: f64, err: &mut dyn Write) {
    if !p.is_empty() && p.n_clusters() == 0 {
        let _ = writeln!(
            err,
            "warning: every class is an outlier at epsilon {epsilon}; metrics are NA"
        );
    }
}

fn decompose(
    input: &InputArgs,
    config: &RunConfig,
    truth: Option<&Path>,
    out_dir: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let facts = load_input(input, err)?;
    let truth = load_truth(truth, &facts)?;
    let d = Prepared::new(&facts, config)?.distance(config.alpha)?;
    let h = epsilon_dbscan(&d, config.step, config.max_epsilon, config.min_samples)?;
    let names = facts.names();
    let last = h.final_layer();
    warn_if_all_outliers(last.partition(), config.max_epsilon, err);
    let metrics = Metrics::compute(last.partition(), facts.call_graph(), truth.as_ref())?;

    let report_format = if format == Format::Csv {
        Format::Csv
    } else {
        Format::Json
    };
    let report = report_text(&metrics, report_format);
    let dot = hierarchy_dot(&h, &names);
    let report_name = if report_format == Format::Csv {
        "report.csv"
    } else {
        "report.json"
    };
    let stdout_text = if format == Format::Dot { &dot } else { &report };
    emit(
        out_dir,
        &[
            ("hierarchy.json", &hierarchy_json(&h, &names)),
            ("hierarchy.dot", &dot),
            ("decomposition.json", &decomposition_json(last, &names)),
            (report_name, &report),
        ],
        stdout_text,
        out,
    )
}

/// Labels from a decomposition file, reordered to the facts' class ids.
fn partition_for(
    facts: &ProjectFacts,
    path: &Path,
    layer: Option<usize>,
) -> Result<Partition, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let file = read_assignment(&text, layer)?;
    let names = facts.names();
    let by_name: HashMap<&str, isize> = file
        .classes
        .iter()
        .map(String::as_str)
        .zip(file.labels.iter().copied())
        .collect();
    if by_name.len() != file.classes.len() {
        return Err(CliError::Input(format!(
            "{}: a class is listed twice",
            path.display()
        )));
    }
    let missing: Vec<&str> = names
        .iter()
        .copied()
        .filter(|n| !by_name.contains_key(n))
        .collect();
    let known: std::collections::HashSet<&str> = names.iter().copied().collect();
    let unknown: Vec<&str> = file
        .classes
        .iter()
        .map(String::as_str)
        .filter(|c| !known.contains(c))
        .collect();
    if !missing.is_empty() || !unknown.is_empty() {
        let mut parts = Vec::new();
        if !missing.is_empty() {
            parts.push(format!(
                "missing from decomposition: {}",
                missing.join(", ")
            ));
        }
        if !unknown.is_empty() {
            parts.push(format!("not project classes: {}", unknown.join(", ")));
        }
        return Err(Error::UniverseMismatch(parts.join("; ")).into());
    }
    let labels: Vec<isize> = names.iter().map(|n| by_name[n]).collect();
    if let Some(bad) = labels.iter().find(|&&l| l < NOISE) {
        return Err(CliError::Input(format!(
            "{}: label {bad} is below -1",
            path.display()
        )));
    }
    Ok(Partition::canonical(&labels))
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    input: &InputArgs,
    decomposition: &Path,
    layer: Option<usize>,
    truth: Option<&Path>,
    out_dir: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    if format == Format::Dot {
        return Err(CliError::Usage("evaluate writes json or csv".into()));
    }
    let facts = load_input(input, err)?;
    let truth = load_truth(truth, &facts)?;
    let p = partition_for(&facts, decomposition, layer)?;
    if !p.is_empty() && p.n_clusters() == 0 {
        let _ = writeln!(err, "warning: every class is an outlier; metrics are NA");
    }
    let metrics = Metrics::compute(&p, facts.call_graph(), truth.as_ref())?;
    let text = report_text(&metrics, format);
    let name = if format == Format::Csv {
        "report.csv"
    } else {
        "report.json"
    };
    emit(out_dir, &[(name, &text)], &text, out)
}

/// Evenly spaced values from `from` to `to` inclusive, rounded to 12
/// decimals so that 0.35 prints as 0.35.
pub(crate) fn sweep_values(
    param: SweepParam,
    from: Option<f64>,
    to: Option<f64>,
    by: Option<f64>,
) -> Result<Vec<f64>, CliError> {
    let (d_from, d_to, d_by) = match param {
        SweepParam::MaxEpsilon => (0.0, 1.0, 0.05),
        SweepParam::Alpha => (0.0, 1.0, 0.1),
        SweepParam::MinSamples => (1.0, 4.0, 1.0),
    };
    let (from, to, by) = (
        from.unwrap_or(d_from),
        to.unwrap_or(d_to),
        by.unwrap_or(d_by),
    );
    if !(from.is_finite() && to.is_finite() && by.is_finite()) || by <= 0.0 || from > to {
        return Err(CliError::Usage(format!(
            "invalid sweep range: from {from} to {to} by {by}"
        )));
    }
    let count = ((to - from) / by + 1e-9).floor() as usize + 1;
    if count > 10_000 {
        return Err(CliError::Usage(format!(
            "sweep range has {count} values (limit 10000)"
        )));
    }
    let values: Vec<f64> = (0..count)
        .map(|i| ((from + i as f64 * by) * 1e12).round() / 1e12)
        .collect();
    let in_domain = |v: &f64| match param {
        SweepParam::MaxEpsilon | SweepParam::Alpha => (0.0..=1.0).contains(v),
        SweepParam::MinSamples => *v >= 1.0 && v.fract() == 0.0,
    };
    if let Some(bad) = values.iter().find(|v| !in_domain(v)) {
        return Err(CliError::Usage(format!(
            "sweep value {bad} is outside the domain of {}",
            param_name(param)
        )));
    }
    Ok(values)
}

fn param_name(param: SweepParam) -> &'static str {
    match param {
        SweepParam::MaxEpsilon => "max_epsilon",
        SweepParam::Alpha => "alpha",
        SweepParam::MinSamples => "min_samples",
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    input: &InputArgs,
    config: &RunConfig,
    param: SweepParam,
    values: &[f64],
    truth: Option<&Path>,
    out_dir: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    if format == Format::Dot {
        return Err(CliError::Usage("sweep writes csv or json".into()));
    }
    let facts = load_input(input, err)?;
    let truth = load_truth(truth, &facts)?;
    let prepared = Prepared::new(&facts, config)?;
    let fixed = match param {
        SweepParam::Alpha => None,
        _ => Some(prepared.distance(config.alpha)?),
    };

    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let (alpha, max_eps, min_samples) = match param {
            SweepParam::MaxEpsilon => (config.alpha, v, config.min_samples),
            SweepParam::Alpha => (v, config.max_epsilon, config.min_samples),
            SweepParam::MinSamples => (config.alpha, config.max_epsilon, v as usize),
        };
        let owned;
        let d = match &fixed {
            Some(d) => d,
            None => {
                owned = prepared.distance(alpha)?;
                &owned
            }
        };
        // the final ε-DBSCAN layer is DBSCAN at max epsilon
        let layer = dbscan(d, max_eps, min_samples)?;
        rows.push((
            v,
            Metrics::compute(layer.partition(), facts.call_graph(), truth.as_ref())?,
        ));
    }

    let name = param_name(param);
    let text = match format {
        Format::Csv => {
            let mut s = String::new();
            if let Some((_, first)) = rows.first() {
                s.push_str(&format!("{name},{}\n", first.csv_header()));
            }
            for (v, m) in &rows {
                s.push_str(&format!("{v},{}\n", m.csv_row()));
            }
            s
        }
        _ => pretty(&Value::Array(
            rows.iter()
                .map(|(v, m)| {
                    let mut obj = m.to_json();
                    obj.as_object_mut()
                        .expect("metrics are an object")
                        .insert(name.into(), json!(v));
                    obj
                })
                .collect(),
        )),
    };
    let file = if format == Format::Csv {
        "sweep.csv"
    } else {
        "sweep.json"
    };
    emit(out_dir, &[(file, &text)], &text, out)
}
