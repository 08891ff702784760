//! Truthfulness evaluation for feature-importance explanations.
//!
//! Given a probabilistic classifier, an instance, and one or more
//! feature-importance interpretations of its prediction, this crate runs
//! 2 x |F| local perturbation tests per interpretation, justifies the
//! per-feature verdicts through a classical-logic argument tree, extracts
//! the maximum truthful sub-interpretation, and selects the most truthful
//! technique among the candidates.
//!
//! Pipeline: [`datamodel`] holds the data, [`models`] the predictor
//! contract, [`importance`] produces the interpretations, [`investigator`]
//! tests them, [`argumentation`] judges and explains, [`selector`] reduces
//! and picks the winner.

pub mod argumentation;
pub mod datamodel;
pub mod importance;
pub mod investigator;
mod linalg;
pub mod models;
pub mod seed;
pub mod selector;

pub use argumentation::{
    build_tree, dialogue_text, export_tree, judge, mark, render_dialogue, tree_from_structured,
    ArgumentTree, ExportFormat, Judgement,
};
pub use datamodel::{load_dataset, Dataset, FeatureKind, FeatureMeta, Instance, Schema};
pub use importance::{ImportanceVector, TechniqueSpec};
pub use investigator::{investigate, InvestigateConfig, PerturbMode, TruthReport};
pub use models::{load_predictor, Predictor};
pub use selector::{evaluate_instance, EvalConfig, EvaluationResult};
