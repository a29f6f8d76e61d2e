//! Sense disambiguation of noun-noun compound constituents by set expansion.
//!
//! The pipeline is:
//!
//! 1. [`ingest`] reads CoNLL-U or plain text into [`Sentence`]s and merges
//!    open and hyphenated compound spellings into single tokens.
//! 2. [`context`] turns each occurrence of a word of interest into a
//!    [`ContextKey`], either a dependency triple or a blanked n-gram frame.
//! 3. [`cooccur`] counts word/context pairs and stores the asymmetric
//!    positive PMI (APPMI) values in two sparse incidence matrices.
//! 4. [`expansion`] ranks words against a seed set,
//!    `E = M_cv · diag(f^rho) · M_vc · S`.
//! 5. [`disambig`] expands `{compound, constituent}` over the constituent's
//!    synonyms and picks the best one; [`wup`] is the Wu-Palmer baseline and
//!    [`eval`] runs accuracy, rho sweeps and Fleiss' kappa over test items.

pub mod context;
pub mod cooccur;
pub mod csr;
pub mod disambig;
mod error;
pub mod eval;
pub mod expansion;
pub mod ingest;
pub mod persist;
pub mod wup;

pub use context::{ContextId, ContextKey, ContextScheme, ContextTable, Scheme};
pub use cooccur::{
    appmi, appmi_reverse, build_index, pmi, probability, ApmiConfig, ApmiIndex, CooccurrenceCounts,
    Estimator, LogBase, Probabilities,
};
pub use csr::Csr;
pub use disambig::{
    disambiguate, disambiguate_among, load_synonyms, DisambiguationAnswer, DisambiguationQuery,
    SynonymLexicon,
};
pub use error::{Error, Result};
pub use eval::{
    evaluate, evaluate_baseline, fleiss_kappa, load_test_items, rho_sweep, sweep_csv,
    EvaluationReport, SweepRow, TestItem, DEFAULT_RHO_GRID,
};
pub use expansion::{expand, restrict, ExpansionParams, ExpansionResult, InputSet};
pub use ingest::{
    merge_multiword, parse_conllu, tokenize_plain, write_conllu, Sentence, Token, Vocabulary,
    WordId,
};
pub use persist::{load_index, save_index};
pub use wup::{baseline_disambiguate, Taxonomy};
