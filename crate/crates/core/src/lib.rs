//! Candidate microservice extraction for monolithic object-oriented codebases.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`extract`] parses a Java-style source tree (or loads a facts file) into
//!    a class roster, a class-level call-count graph and raw lexical items.
//! 2. [`lexicon`] turns lexical items into stemmed token documents and builds
//!    TF-IDF vectors over the project vocabulary.
//! 3. [`similarity`] fuses call-based structural similarity with TF-IDF cosine
//!    similarity into a single class-similarity matrix and its distance
//!    complement.
//! 4. [`cluster`] runs DBSCAN over the distance matrix at increasing epsilon
//!    steps, producing a hierarchy of nested decompositions with outliers.
//! 5. [`evaluate`] scores decompositions intrinsically (SM, IFN, NED, ICP) and
//!    against a ground-truth service assignment (precision, SR@k).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The `*F64`
//! aliases below are what the command-line front end uses.

pub mod cluster;
pub mod error;
pub mod evaluate;
pub mod extract;
pub mod lexicon;
pub mod scalar;
pub mod similarity;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use cluster::{dbscan, epsilon_dbscan, hierarchy_edges, HierarchyEdge, Partition};
pub use evaluate::{GroundTruth, MatchReport, QualityReport};
pub use extract::{load_facts, save_facts, scan_sources, CallGraph, ClassRecord, ProjectFacts};
pub use lexicon::{build_tfidf, preprocess, Stoplist, TokenDocument};
pub use similarity::{class_similarity, semantic_similarity, structural_similarity, to_distance};

pub type SimilarityMatrixF64 = similarity::SimilarityMatrix<f64>;
pub type SimilarityMatrixF32 = similarity::SimilarityMatrix<f32>;
pub type DistanceMatrixF64 = similarity::DistanceMatrix<f64>;
pub type DistanceMatrixF32 = similarity::DistanceMatrix<f32>;
pub type TfIdfMatrixF64 = lexicon::TfIdfMatrix<f64>;
pub type TfIdfMatrixF32 = lexicon::TfIdfMatrix<f32>;
pub type DecompositionF64 = cluster::Decomposition<f64>;
pub type DecompositionF32 = cluster::Decomposition<f32>;
pub type HierarchyF64 = cluster::Hierarchy<f64>;
pub type HierarchyF32 = cluster::Hierarchy<f32>;
pub type QualityReportF64 = evaluate::QualityReport<f64>;
pub type MatchReportF64 = evaluate::MatchReport<f64>;
