//! Semantic side of the pipeline: identifier splitting, stopword removal,
//! stemming, and TF-IDF weighting over the project vocabulary.

mod porter;
mod stopwords;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::extract::{profile_keywords, ClassRecord, ProjectFacts};
use crate::scalar::Scalar;

pub use porter::stem;

/// Words removed before stemming.
///
/// Language-profile keywords are always removed, but only as whole words: a
/// comment word `null` goes, the `Case` hump of `CamelCase` stays. The other
/// entries (English function words, doc tags, user terms) are matched against
/// every split piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stoplist {
    keywords: HashSet<String>,
    words: HashSet<String>,
}

impl Default for Stoplist {
    fn default() -> Self {
        Stoplist::builtin()
    }
}

impl Stoplist {
    /// Profile keywords only.
    pub fn keywords_only() -> Self {
        Stoplist {
            keywords: profile_keywords().iter().map(|w| w.to_string()).collect(),
            words: HashSet::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut list = Stoplist::keywords_only();
        list.extend(
            stopwords::ENGLISH
                .iter()
                .chain(stopwords::DOC_TAGS)
                .copied(),
        );
        list
    }

    /// Built-in list plus the terms of a UTF-8 file, one per line.
    pub fn with_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut list = Stoplist::builtin();
        list.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()));
        Ok(list)
    }

    pub fn extend<'a>(&mut self, words: impl IntoIterator<Item = &'a str>) {
        self.words
            .extend(words.into_iter().map(|w| w.to_lowercase()));
    }

    /// Is the lowercase piece `word` removed after splitting?
    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.keywords.contains(word)
    }
}

/// Splits on non-alphanumeric characters, camelCase humps, acronym
/// boundaries (`HTTPServer` -> `HTTP`, `Server`) and letter/digit boundaries.
/// Pieces keep their original case.
pub fn split_identifier(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    for run in raw.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = run.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (prev.is_lowercase() && cur.is_uppercase())
                || (prev.is_uppercase() && cur.is_uppercase() && next_lower)
                || (prev.is_numeric() != cur.is_numeric());
            if boundary {
                out.push(chars[start..i].iter().collect());
                start = i;
            }
        }
        if start < chars.len() {
            out.push(chars[start..].iter().collect());
        }
    }
    out
}

/// Split, lowercase, drop stopwords, stem. Numbers and single characters are
/// dropped as they carry no domain meaning.
pub fn preprocess<S: AsRef<str>>(raw_items: &[S], stoplist: &Stoplist) -> Vec<String> {
    raw_items
        .iter()
        .flat_map(|item| {
            item.as_ref()
                .split(|c: char| !c.is_alphanumeric() && c != '_' && c != '$')
                .filter(|word| !stoplist.is_keyword(word))
                .flat_map(split_identifier)
                .collect::<Vec<_>>()
        })
        .map(|piece| piece.to_lowercase())
        .filter(|w| w.chars().count() > 1 && !w.chars().all(char::is_numeric))
        .filter(|w| !stoplist.contains(w))
        .map(|w| stem(&w))
        .collect()
}

/// Preprocessed term multiset of one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenDocument {
    pub class_id: usize,
    pub terms: BTreeMap<String, usize>,
}

impl TokenDocument {
    pub fn new<S: AsRef<str>>(class_id: usize, raw_items: &[S], stoplist: &Stoplist) -> Self {
        let mut terms = BTreeMap::new();
        for t in preprocess(raw_items, stoplist) {
            *terms.entry(t).or_insert(0) += 1;
        }
        TokenDocument { class_id, terms }
    }

    pub fn from_class(class: &ClassRecord, stoplist: &Stoplist) -> Self {
        let items: Vec<&str> = class
            .identifiers
            .iter()
            .chain(&class.comments)
            .map(String::as_str)
            .collect();
        TokenDocument::new(class.id, &items, stoplist)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.values().sum()
    }
}

/// One document per class, in id order.
pub fn documents(facts: &ProjectFacts, stoplist: &Stoplist) -> Vec<TokenDocument> {
    use rayon::prelude::*;
    facts
        .classes()
        .par_iter()
        .map(|c| TokenDocument::from_class(c, stoplist))
        .collect()
}

/// Row-per-class TF-IDF weights. Rows are not length-normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfMatrix<T> {
    terms: Vec<String>,
    df: Vec<usize>,
    weights: Vec<T>,
    n_docs: usize,
}

impl<T: Scalar> TfIdfMatrix<T> {
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    /// Vocabulary in column order (lexicographic).
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn df(&self, column: usize) -> usize {
        self.df[column]
    }

    pub fn row(&self, doc: usize) -> &[T] {
        let v = self.terms.len();
        &self.weights[doc * v..(doc + 1) * v]
    }

    pub fn weight(&self, doc: usize, term: &str) -> T {
        self.column(term).map_or_else(T::zero, |c| self.row(doc)[c])
    }
}

/// `w[i][t] = tf(i, t) * (ln((1 + N) / (1 + df(t))) + 1)` with raw counts.
pub fn build_tfidf<T: Scalar>(documents: &[TokenDocument]) -> Result<TfIdfMatrix<T>> {
    for (i, d) in documents.iter().enumerate() {
        if d.class_id != i {
            return Err(Error::InvalidParameter(format!(
                "document {i} carries class id {}",
                d.class_id
            )));
        }
    }
    let mut df_map: BTreeMap<&str, usize> = BTreeMap::new();
    for d in documents {
        for term in d.terms.keys() {
            *df_map.entry(term).or_insert(0) += 1;
        }
    }
    if df_map.is_empty() {
        return Err(Error::DegenerateVocabulary);
    }
    let terms: Vec<String> = df_map.keys().map(|t| t.to_string()).collect();
    let df: Vec<usize> = df_map.values().copied().collect();
    let n = documents.len();
    let idf: Vec<T> = df
        .iter()
        .map(|&d| T::of(((1 + n) as f64 / (1 + d) as f64).ln() + 1.0))
        .collect();

    let v = terms.len();
    let mut weights = vec![T::zero(); n * v];
    for (i, d) in documents.iter().enumerate() {
        for (term, &count) in &d.terms {
            let c = terms
                .binary_search_by(|t| t.as_str().cmp(term))
                .expect("term in vocabulary");
            weights[i * v + c] = T::of_usize(count) * idf[c];
        }
    }
    Ok(TfIdfMatrix {
        terms,
        df,
        weights,
        n_docs: n,
    })
}
