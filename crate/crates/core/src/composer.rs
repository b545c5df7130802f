//! Turns activation vectors into text: greedy decomposition into corpus
//! constructs followed by seeded paraphrase selection.
//!
//! Decomposition walks the combined constructs from most AUs to fewest and
//! claims every construct whose AU set is still fully active. Combinations
//! of three or more AUs consume their AUs immediately; pairs defer removal
//! until all pairs have been considered, so overlapping pairs can all
//! match. Whatever remains becomes individual constructs.

use thiserror::Error;

use crate::au::{ActivationVector, Construct};
use crate::corpus::{Corpus, CorpusError};
use crate::seed::paraphrase_index;

/// Errors from composition.
#[derive(Debug, Error)]
pub enum ComposeError {
    /// Composition needs at least one active AU.
    #[error("activation vector has no active action units")]
    EmptyActivation,
    /// The override list must supply one index per decomposed construct.
    #[error("expected {expected} paraphrase overrides, got {found}")]
    OverrideLengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// The constructs assigned to an activation vector, with the paraphrase
/// chosen for each and the seed that chose them.
///
/// `seed` is `None` when the paraphrases were supplied as overrides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub constructs: Vec<Construct>,
    pub paraphrase_indices: Vec<usize>,
    pub seed: Option<u64>,
}

impl Decomposition {
    /// Union of all AUs across the constructs.
    pub fn activation(&self) -> ActivationVector {
        self.constructs
            .iter()
            .fold(ActivationVector::EMPTY, |acc, c| acc.union(c.activation()))
    }
}

/// Decomposes an activation vector into corpus constructs.
///
/// The result preserves claim order: combined constructs as visited in
/// `corpus.combined_order()`, then leftover individual AUs ascending. The
/// union of the result's AUs always equals the input's active set.
pub fn decompose(v: ActivationVector, corpus: &Corpus) -> Result<Vec<Construct>, ComposeError> {
    if v.is_empty() {
        return Err(ComposeError::EmptyActivation);
    }
    let mut active = v;
    let mut removals = ActivationVector::EMPTY;
    let mut result = Vec::new();
    for construct in corpus.combined_order() {
        let members = construct.activation();
        if members.is_subset_of(active) {
            result.push(construct.clone());
            if construct.len() > 2 {
                active = active.difference(members);
            } else {
                removals = removals.union(members);
            }
        }
    }
    active = active.difference(removals);
    for au in active.iter() {
        result.push(Construct::single(au));
    }
    Ok(result)
}

/// Composes the description for an activation vector.
///
/// Paraphrases are drawn per construct by a deterministic counter-based
/// generator keyed on `(seed, construct position)`; equal `(v, seed)`
/// always produces identical text. The text is the normalized paraphrases
/// joined by single spaces.
pub fn compose(
    v: ActivationVector,
    corpus: &Corpus,
    seed: u64,
) -> Result<(String, Decomposition), ComposeError> {
    let constructs = decompose(v, corpus)?;
    let indices: Vec<usize> = (0..constructs.len())
        .map(|ordinal| paraphrase_index(seed, ordinal))
        .collect();
    let text = join_paraphrases(&constructs, &indices, corpus)?;
    Ok((
        text,
        Decomposition {
            constructs,
            paraphrase_indices: indices,
            seed: Some(seed),
        },
    ))
}

/// Composes with caller-chosen paraphrase indices, one per construct.
pub fn compose_with_overrides(
    v: ActivationVector,
    corpus: &Corpus,
    overrides: &[usize],
) -> Result<(String, Decomposition), ComposeError> {
    let constructs = decompose(v, corpus)?;
    if overrides.len() != constructs.len() {
        return Err(ComposeError::OverrideLengthMismatch {
            expected: constructs.len(),
            found: overrides.len(),
        });
    }
    let text = join_paraphrases(&constructs, overrides, corpus)?;
    Ok((
        text,
        Decomposition {
            constructs,
            paraphrase_indices: overrides.to_vec(),
            seed: None,
        },
    ))
}

fn join_paraphrases(
    constructs: &[Construct],
    indices: &[usize],
    corpus: &Corpus,
) -> Result<String, CorpusError> {
    let mut parts = Vec::with_capacity(constructs.len());
    for (construct, &index) in constructs.iter().zip(indices) {
        parts.push(corpus.lookup(construct, index)?.normalized());
    }
    Ok(parts.join(" "))
}

/// Decomposes a batch of vectors, in input order.
///
/// Uses the parallel path when the `parallel` feature is enabled.
pub fn decompose_batch(
    vectors: &[ActivationVector],
    corpus: &Corpus,
) -> Result<Vec<Vec<Construct>>, ComposeError> {
    #[cfg(feature = "parallel")]
    {
        decompose_batch_par(vectors, corpus)
    }
    #[cfg(not(feature = "parallel"))]
    {
        decompose_batch_seq(vectors, corpus)
    }
}

/// Sequential batch decomposition; always available.
pub fn decompose_batch_seq(
    vectors: &[ActivationVector],
    corpus: &Corpus,
) -> Result<Vec<Vec<Construct>>, ComposeError> {
    vectors.iter().map(|v| decompose(*v, corpus)).collect()
}

/// Data-parallel batch decomposition.
#[cfg(feature = "parallel")]
pub fn decompose_batch_par(
    vectors: &[ActivationVector],
    corpus: &Corpus,
) -> Result<Vec<Vec<Construct>>, ComposeError> {
    use rayon::prelude::*;
    vectors.par_iter().map(|v| decompose(*v, corpus)).collect()
}
