//! Inverse of the composer: recovers constructs and AU activations from a
//! description by exact matching against the corpus paraphrases.
//!
//! Strict mode consumes the whole text as a sequence of paraphrases and
//! fails at the first unmatchable offset. Lenient mode detects paraphrases
//! anywhere in the text and reports the uncovered remainder instead of
//! failing.

use thiserror::Error;

use crate::au::Construct;
use crate::au::{ActivationVector, CANONICAL_AUS, ProbabilityVector};
use crate::corpus::{Corpus, normalize};

/// Errors from parsing and scoring.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("text is empty after normalization")]
    EmptyText,
    /// Strict parsing found no paraphrase at this byte offset of the
    /// normalized text.
    #[error("no corpus paraphrase matches at byte offset {offset}")]
    UnparsableAt { offset: usize },
    #[error("predicted and truth lists differ in length: {predicted} vs {truth}")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("scoring needs at least one sample")]
    EmptyInput,
}

/// One detected paraphrase occurrence.
///
/// `start` and `end` are byte offsets into the normalized input text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructMatch {
    pub construct: Construct,
    pub paraphrase_index: usize,
    pub start: usize,
    pub end: usize,
}

/// Outcome of a parse.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseResult {
    /// Detected paraphrases. Strict mode lists them in text order; lenient
    /// mode sorts by position then construct.
    pub matches: Vec<ConstructMatch>,
    /// Union of the matched constructs' AUs.
    pub activation: ActivationVector,
    /// The 0/1 image of `activation`.
    pub probabilities: ProbabilityVector,
    /// Uncovered text, present only for lenient parses that left something
    /// unmatched.
    pub residual: Option<String>,
}

impl ParseResult {
    /// The matched constructs in match order.
    pub fn constructs(&self) -> Vec<Construct> {
        self.matches.iter().map(|m| m.construct.clone()).collect()
    }
}

/// Reusable matcher over one corpus.
///
/// Building the index costs one sort of all 190 paraphrases, so batch
/// callers should construct a `Parser` once and reuse it.
pub struct Parser<'c> {
    /// Paraphrases sorted by normalized length descending, then text, then
    /// construct and index, so the first prefix hit is the longest one.
    index: Vec<(&'c str, &'c Construct, usize)>,
}

impl<'c> Parser<'c> {
    pub fn new(corpus: &'c Corpus) -> Self {
        let mut index: Vec<(&str, &Construct, usize)> = corpus
            .entries()
            .flat_map(|(construct, texts)| {
                texts
                    .iter()
                    .enumerate()
                    .map(move |(i, t)| (t.normalized(), construct, i))
            })
            .collect();
        index.sort_by(|a, b| {
            b.0.len()
                .cmp(&a.0.len())
                .then_with(|| a.0.cmp(b.0))
                .then_with(|| a.1.cmp(b.1))
                .then_with(|| a.2.cmp(&b.2))
        });
        Self { index }
    }

    /// Parses text that must consist entirely of corpus paraphrases.
    ///
    /// Repeatedly matches the longest paraphrase that is a prefix of the
    /// remaining normalized text, consuming one separating space after
    /// each match. There is no backtracking.
    pub fn parse_strict(&self, text: &str) -> Result<ParseResult, ParseError> {
        let norm = normalize(text);
        if norm.is_empty() {
            return Err(ParseError::EmptyText);
        }
        let mut matches = Vec::new();
        let mut pos = 0;
        while pos < norm.len() {
            let rest = &norm[pos..];
            let hit = self
                .index
                .iter()
                .find(|(t, _, _)| rest.starts_with(t))
                .ok_or(ParseError::UnparsableAt { offset: pos })?;
            let (t, construct, paraphrase_index) = *hit;
            matches.push(ConstructMatch {
                construct: construct.clone(),
                paraphrase_index,
                start: pos,
                end: pos + t.len(),
            });
            pos += t.len();
            if norm.as_bytes().get(pos) == Some(&b' ') {
                pos += 1;
            }
        }
        Ok(build_result(matches, None))
    }

    /// Detects corpus paraphrases anywhere in the text.
    ///
    /// Overlapping detections are allowed and never fail; text covered by
    /// no detection is returned as the residual.
    pub fn parse_lenient(&self, text: &str) -> Result<ParseResult, ParseError> {
        let norm = normalize(text);
        if norm.is_empty() {
            return Err(ParseError::EmptyText);
        }
        let mut matches: Vec<ConstructMatch> = Vec::new();
        let mut covered = vec![false; norm.len()];
        for (t, construct, paraphrase_index) in &self.index {
            let mut from = 0;
            while let Some(offset) = norm[from..].find(t) {
                let start = from + offset;
                let end = start + t.len();
                let duplicate = matches
                    .iter()
                    .any(|m| m.start == start && m.end == end && m.construct == **construct);
                if !duplicate {
                    matches.push(ConstructMatch {
                        construct: (*construct).clone(),
                        paraphrase_index: *paraphrase_index,
                        start,
                        end,
                    });
                    covered[start..end].fill(true);
                }
                from = start + 1;
            }
        }
        matches.sort_by(|a, b| {
            (a.start, a.end, &a.construct, a.paraphrase_index).cmp(&(
                b.start,
                b.end,
                &b.construct,
                b.paraphrase_index,
            ))
        });
        let residual = collect_residual(&norm, &covered);
        Ok(build_result(matches, residual))
    }
}

fn build_result(matches: Vec<ConstructMatch>, residual: Option<String>) -> ParseResult {
    let activation = matches.iter().fold(ActivationVector::EMPTY, |acc, m| {
        acc.union(m.construct.activation())
    });
    ParseResult {
        probabilities: activation.to_probabilities(),
        activation,
        matches,
        residual,
    }
}

fn collect_residual(norm: &str, covered: &[bool]) -> Option<String> {
    let mut segments = Vec::new();
    let mut start = None;
    for (i, &c) in covered.iter().enumerate() {
        match (c, start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                segments.push(norm[s..i].trim());
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        segments.push(norm[s..].trim());
    }
    let residual = segments
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    if residual.is_empty() {
        None
    } else {
        Some(residual)
    }
}

/// One-shot strict parse; builds a throwaway [`Parser`].
pub fn parse_strict(text: &str, corpus: &Corpus) -> Result<ParseResult, ParseError> {
    Parser::new(corpus).parse_strict(text)
}

/// One-shot lenient parse; builds a throwaway [`Parser`].
pub fn parse_lenient(text: &str, corpus: &Corpus) -> Result<ParseResult, ParseError> {
    Parser::new(corpus).parse_lenient(text)
}

/// Per-AU binary F1 scores with their macro average.
#[derive(Clone, Debug, PartialEq)]
pub struct F1Report {
    /// F1 per AU in canonical order.
    pub per_au: [f64; 12],
    /// Unweighted mean of the 12 per-AU scores.
    pub macro_f1: f64,
}

/// Scores predicted activations against truth, per AU.
///
/// An AU with no positives in truth and none predicted scores 1.0;
/// otherwise F1 is `2TP / (2TP + FP + FN)`.
pub fn f1_score(
    predicted: &[ActivationVector],
    truth: &[ActivationVector],
) -> Result<F1Report, ParseError> {
    if predicted.len() != truth.len() {
        return Err(ParseError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let mut per_au = [0.0; 12];
    for au in CANONICAL_AUS {
        let mut tp = 0u64;
        let mut fp = 0u64;
        let mut fn_ = 0u64;
        for (p, t) in predicted.iter().zip(truth) {
            match (p.contains(au), t.contains(au)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let denominator = 2 * tp + fp + fn_;
        per_au[au.index()] = if denominator == 0 {
            1.0
        } else {
            2.0 * tp as f64 / denominator as f64
        };
    }
    let macro_f1 = per_au.iter().sum::<f64>() / 12.0;
    Ok(F1Report { per_au, macro_f1 })
}
