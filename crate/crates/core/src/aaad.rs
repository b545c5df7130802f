//! The AAAD metric: normalized mean cosine similarity between AU
//! probability vectors.
//!
//! A pair couples an image-derived vector with a text-derived vector. The
//! metric normalizes the mean cosine over the evaluation pairs into the
//! band spanned by the best ground-truth pairing (upper bound) and a
//! deterministically shuffled pairing (lower bound).

use std::fmt;
use std::io::BufRead;

use thiserror::Error;

use crate::au::{AuError, ProbabilityVector};
use crate::seed::SplitMix64;

/// Errors from the metric computations.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum AaadError {
    #[error("no evaluation pairs given")]
    EmptyEval,
    #[error("ground truth needs at least 2 pairs to shuffle, got {0}")]
    TooFewGroundTruth(usize),
    /// A probability vector with no positive entry has no direction.
    #[error("probability vector has no positive entries")]
    ZeroVector,
    #[error("degenerate normalization bounds: c_min = c_max = {0}")]
    DegenerateBounds(f64),
    #[error("invalid bounds: c_min {c_min} and c_max {c_max} must be finite with c_min < c_max")]
    InvalidBounds { c_min: f64, c_max: f64 },
}

/// Cosine similarity between two probability vectors.
///
/// Entries are nonnegative, so the result lies in [0, 1]. Either vector
/// having zero norm is an error.
pub fn cosine(a: &ProbabilityVector, b: &ProbabilityVector) -> Result<f64, AaadError> {
    if a.is_zero() || b.is_zero() {
        return Err(AaadError::ZeroVector);
    }
    Ok(cosine_unchecked(a, b))
}

fn cosine_unchecked(a: &ProbabilityVector, b: &ProbabilityVector) -> f64 {
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for (x, y) in a.values().iter().zip(b.values()) {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    (dot / (norm_a.sqrt() * norm_b.sqrt())).min(1.0)
}

/// Where the normalization bounds came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundsProvenance {
    /// Computed from ground-truth pairs; the minimum came from the
    /// derangement drawn with this seed.
    Computed { shuffle_seed: u64 },
    /// Supplied by the caller.
    Supplied,
}

/// Full outcome of an AAAD evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct AaadReport {
    /// Cosine per evaluation pair, in input order.
    pub pair_cosines: Vec<f64>,
    /// Mean of `pair_cosines` (pairwise summation).
    pub mean_cosine: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub provenance: BoundsProvenance,
    /// `(mean_cosine - c_min) / (c_max - c_min)`.
    pub aaad: f64,
    /// Set when `mean_cosine` fell outside `[c_min, c_max]`; the AAAD
    /// value is still reported and then lies outside [0, 1].
    pub bounds_warning: bool,
}

impl fmt::Display for AaadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairs evaluated: {}", self.pair_cosines.len())?;
        writeln!(f, "mean cosine: {:.6}", self.mean_cosine)?;
        match self.provenance {
            BoundsProvenance::Computed { shuffle_seed } => {
                writeln!(f, "c_max: {:.6} (ground-truth pairing)", self.c_max)?;
                writeln!(
                    f,
                    "c_min: {:.6} (shuffled pairing, seed {shuffle_seed})",
                    self.c_min
                )?;
            }
            BoundsProvenance::Supplied => {
                writeln!(f, "c_max: {:.6} (supplied)", self.c_max)?;
                writeln!(f, "c_min: {:.6} (supplied)", self.c_min)?;
            }
        }
        write!(f, "aaad: {:.6}", self.aaad)?;
        if self.bounds_warning {
            write!(f, "\nwarning: mean cosine lies outside [c_min, c_max]")?;
        }
        Ok(())
    }
}

/// Cosines for a batch of pairs, in input order.
///
/// Uses the parallel path when the `parallel` feature is enabled.
pub fn pair_cosines(
    pairs: &[(ProbabilityVector, ProbabilityVector)],
) -> Result<Vec<f64>, AaadError> {
    #[cfg(feature = "parallel")]
    {
        pair_cosines_par(pairs)
    }
    #[cfg(not(feature = "parallel"))]
    {
        pair_cosines_seq(pairs)
    }
}

/// Sequential batch cosines; always available.
pub fn pair_cosines_seq(
    pairs: &[(ProbabilityVector, ProbabilityVector)],
) -> Result<Vec<f64>, AaadError> {
    pairs.iter().map(|(a, b)| cosine(a, b)).collect()
}

/// Data-parallel batch cosines.
#[cfg(feature = "parallel")]
pub fn pair_cosines_par(
    pairs: &[(ProbabilityVector, ProbabilityVector)],
) -> Result<Vec<f64>, AaadError> {
    use rayon::prelude::*;
    pairs.par_iter().map(|(a, b)| cosine(a, b)).collect()
}

/// Sums in a fixed pairwise order, independent of thread scheduling.
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Cyclic derangement of `0..n` drawn from the seed; no index maps to
/// itself.
fn derangement(n: usize, seed: u64) -> Vec<usize> {
    debug_assert!(n >= 2);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(seed);
    let mut i = n - 1;
    while i > 0 {
        let j = rng.next_below(i as u64) as usize;
        perm.swap(i, j);
        i -= 1;
    }
    perm
}

/// Evaluates AAAD with bounds computed from ground-truth pairs.
///
/// The mean cosine runs over `eval_pairs`. `c_max` is the maximum cosine
/// over `gt_pairs` as given; `c_min` is the minimum cosine after deranging
/// the ground-truth text vectors against the image vectors with
/// `shuffle_seed`. Inside the shuffled pairing a zero-support vector
/// scores 0 instead of erroring.
pub fn aaad(
    eval_pairs: &[(ProbabilityVector, ProbabilityVector)],
    gt_pairs: &[(ProbabilityVector, ProbabilityVector)],
    shuffle_seed: u64,
) -> Result<AaadReport, AaadError> {
    if eval_pairs.is_empty() {
        return Err(AaadError::EmptyEval);
    }
    if gt_pairs.len() < 2 {
        return Err(AaadError::TooFewGroundTruth(gt_pairs.len()));
    }
    let gt_cosines = pair_cosines(gt_pairs)?;
    let c_max = gt_cosines.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let perm = derangement(gt_pairs.len(), shuffle_seed);
    let c_min = perm
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let image = &gt_pairs[k].0;
            let text = &gt_pairs[p].1;
            if image.is_zero() || text.is_zero() {
                0.0
            } else {
                cosine_unchecked(image, text)
            }
        })
        .fold(f64::INFINITY, f64::min);

    finish_report(
        eval_pairs,
        c_min,
        c_max,
        BoundsProvenance::Computed { shuffle_seed },
    )
}

/// Evaluates AAAD against caller-supplied bounds.
pub fn aaad_with_bounds(
    eval_pairs: &[(ProbabilityVector, ProbabilityVector)],
    c_min: f64,
    c_max: f64,
) -> Result<AaadReport, AaadError> {
    if eval_pairs.is_empty() {
        return Err(AaadError::EmptyEval);
    }
    if !c_min.is_finite() || !c_max.is_finite() || c_min > c_max {
        return Err(AaadError::InvalidBounds { c_min, c_max });
    }
    finish_report(eval_pairs, c_min, c_max, BoundsProvenance::Supplied)
}

fn finish_report(
    eval_pairs: &[(ProbabilityVector, ProbabilityVector)],
    c_min: f64,
    c_max: f64,
    provenance: BoundsProvenance,
) -> Result<AaadReport, AaadError> {
    if c_max == c_min {
        return Err(AaadError::DegenerateBounds(c_max));
    }
    let pair_cosines = pair_cosines(eval_pairs)?;
    let mean_cosine = pairwise_sum(&pair_cosines) / pair_cosines.len() as f64;
    let aaad = (mean_cosine - c_min) / (c_max - c_min);
    let bounds_warning = mean_cosine < c_min || mean_cosine > c_max;
    Ok(AaadReport {
        pair_cosines,
        mean_cosine,
        c_min,
        c_max,
        provenance,
        aaad,
        bounds_warning,
    })
}

/// Errors from reading probability-vector files.
#[derive(Debug, Error)]
pub enum VectorFileError {
    #[error("cannot read vectors: {0}")]
    Io(#[from] std::io::Error),
    #[error("vector line {line}: expected an id plus 12 values, found {found} fields")]
    FieldCount { line: usize, found: usize },
    #[error("vector line {line}: {value:?} is not a number")]
    BadNumber { line: usize, value: String },
    #[error("vector line {line}: {source}")]
    Probability { line: usize, source: AuError },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("id {0:?} is present in only one of the two files")]
    UnpairedId(String),
}

/// Reads id-tagged probability vectors.
///
/// One record per line: an id followed by 12 comma-separated reals in
/// canonical AU order. Blank lines and lines starting with `#` are
/// ignored.
pub fn read_probability_vectors(
    reader: impl BufRead,
) -> Result<Vec<(String, ProbabilityVector)>, VectorFileError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != 13 {
            return Err(VectorFileError::FieldCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let id = fields[0].to_string();
        let mut values = [0.0; 12];
        for (slot, field) in values.iter_mut().zip(&fields[1..]) {
            *slot = field.parse().map_err(|_| VectorFileError::BadNumber {
                line: line_no,
                value: (*field).to_string(),
            })?;
        }
        let vector =
            ProbabilityVector::new(values).map_err(|source| VectorFileError::Probability {
                line: line_no,
                source,
            })?;
        records.push((id, vector));
    }
    Ok(records)
}

/// Pairs image and text vectors by id.
///
/// Both lists must carry exactly the same id set, without duplicates.
/// Pairs are returned in ascending id order.
pub fn pair_by_id(
    images: Vec<(String, ProbabilityVector)>,
    texts: Vec<(String, ProbabilityVector)>,
) -> Result<Vec<(ProbabilityVector, ProbabilityVector)>, VectorFileError> {
    use std::collections::BTreeMap;
    let mut by_id: BTreeMap<String, ProbabilityVector> = BTreeMap::new();
    for (id, vector) in images {
        if by_id.insert(id.clone(), vector).is_some() {
            return Err(VectorFileError::DuplicateId(id));
        }
    }
    let mut pairs = Vec::with_capacity(texts.len());
    let mut seen: std::collections::BTreeSet<String> = Default::default();
    for (id, text) in texts {
        if !seen.insert(id.clone()) {
            return Err(VectorFileError::DuplicateId(id));
        }
        let Some(image) = by_id.get(&id) else {
            return Err(VectorFileError::UnpairedId(id));
        };
        pairs.push((id, (*image, text)));
    }
    if let Some(id) = by_id.keys().find(|id| !seen.contains(*id)) {
        return Err(VectorFileError::UnpairedId(id.clone()));
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(pairs.into_iter().map(|(_, pair)| pair).collect())
}
