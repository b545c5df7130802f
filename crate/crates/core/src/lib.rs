//! Toolkit for fine-grained facial behavior text built on the Facial Action
//! Coding System (FACS).
//!
//! The crate works over a fixed universe of 12 action units (AUs) and a
//! corpus of 38 constructs: the 12 individual AUs plus 26 documented
//! interacting AU combinations, each carrying five paraphrase texts.
//!
//! What it provides:
//! - **Composition**: turn a binary AU activation vector into a natural
//!   language description by greedy set decomposition over the combined
//!   constructs ([`decompose`], [`compose`]).
//! - **Parsing**: the exact inverse, recovering constructs and activations
//!   from composed text ([`parse_strict`], [`parse_lenient`], [`f1_score`]).
//! - **AAAD metric**: normalized mean cosine similarity between AU
//!   probability vectors ([`cosine`], [`aaad`]).
//! - **Dataset pipeline**: CSV ingestion of per-frame AU occurrence tables,
//!   reference face selection, deterministic annotation build, and category
//!   statistics (the [`dataset`] module).
//!
//! All randomness is seeded and all batch outputs are canonically ordered,
//! so every pipeline run is reproducible bit for bit.
//!
//! ```
//! use aufacs::{bundled_corpus, compose_with_overrides, parse_strict, ActivationVector};
//!
//! let corpus = bundled_corpus();
//! let v = ActivationVector::from_numbers(&[15, 17]).unwrap();
//! let (text, decomposition) = compose_with_overrides(v, &corpus, &[0]).unwrap();
//! assert!(text.starts_with("The lip corners are pulled down slightly"));
//!
//! let parsed = parse_strict(&text, &corpus).unwrap();
//! assert_eq!(parsed.activation, v);
//! assert_eq!(parsed.constructs(), decomposition.constructs);
//! ```
//!
//! The default `parallel` feature routes batch operations through a data
//! parallel path; disabling it leaves the same API running sequentially.

pub mod aaad;
pub mod au;
pub mod composer;
pub mod corpus;
pub mod dataset;
pub mod parser;
pub(crate) mod seed;

pub use aaad::{
    AaadError, AaadReport, BoundsProvenance, VectorFileError, aaad, aaad_with_bounds, cosine,
    pair_by_id, pair_cosines, pair_cosines_seq, read_probability_vectors,
};
pub use au::{
    ActivationVector, AuError, AuId, CANONICAL_AUS, Category, ConflictTable, Construct,
    ProbabilityVector, TableError, categorize,
};
pub use composer::{
    ComposeError, Decomposition, compose, compose_with_overrides, decompose, decompose_batch,
    decompose_batch_seq,
};
pub use corpus::{
    Check, CheckStatus, Corpus, CorpusError, DuplicatePair, ParaphraseText, ValidationReport,
    bundled_corpus, bundled_corpus_text, load_corpus, normalize, parse_corpus, validate_corpus,
};
pub use parser::{
    ConstructMatch, F1Report, ParseError, ParseResult, Parser, f1_score, parse_lenient,
    parse_strict,
};

#[cfg(feature = "parallel")]
pub use aaad::pair_cosines_par;
#[cfg(feature = "parallel")]
pub use composer::decompose_batch_par;
