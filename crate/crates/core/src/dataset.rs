//! Dataset pipeline: CSV ingestion of per-frame AU occurrence tables,
//! reference face selection, deterministic annotation build, and category
//! statistics.
//!
//! Ingestion reads occurrence tables where each row is one video frame and
//! each AU column holds `0` (inactive), `1` (active), or `9` (unknown).
//! The build stage groups frames by subject, picks one reference face per
//! subject, and composes a description for every frame with at least one
//! active AU. All seeding is derived from a single run seed plus the frame
//! identity, so output never depends on input order or thread count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::au::{
    ActivationVector, AuId, CANONICAL_AUS, Category, ConflictTable, Construct, categorize,
};
use crate::composer::{ComposeError, Decomposition, compose};
use crate::corpus::{Corpus, EXPECTED_PARAPHRASES};
use crate::seed::{SplitMix64, frame_seed, subject_seed};

/// Errors from the dataset pipeline.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("column {0:?} appears more than once")]
    DuplicateColumn(String),
    #[error("row {row}, column {column:?}: invalid value {value:?}")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("duplicate frame {subject}/{task}/{frame}")]
    DuplicateFrame {
        subject: String,
        task: String,
        frame: u64,
    },
    #[error("no frames to select a reference from")]
    NoFrames,
    #[error("record line {line}: {message}")]
    Record { line: usize, message: String },
    #[error(transparent)]
    Compose(#[from] ComposeError),
}

/// One ingested video frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameRecord {
    pub subject: String,
    pub task: String,
    pub frame: u64,
    /// AUs marked active (`1`).
    pub activation: ActivationVector,
    /// AUs marked unknown (`9`) and kept under
    /// [`UnknownPolicy::TreatInactive`].
    pub unknown: ActivationVector,
    pub image: String,
}

impl FrameRecord {
    /// A frame is neutral when every AU is known to be inactive.
    pub fn is_neutral(&self) -> bool {
        self.activation.is_empty() && self.unknown.is_empty()
    }
}

/// How to handle cells whose occurrence value is `9`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownPolicy {
    /// Drop the whole frame.
    SkipFrame,
    /// Keep the frame with the AU inactive, recording it in
    /// [`FrameRecord::unknown`].
    TreatInactive,
}

/// Ingestion settings.
#[derive(Clone, Debug)]
pub struct IngestOptions {
    pub policy: UnknownPolicy,
    /// Subject used when the CSV has no `subject` column or the cell is
    /// empty.
    pub default_subject: String,
    /// Task used when the CSV has no `task` column or the cell is empty.
    pub default_task: String,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            policy: UnknownPolicy::SkipFrame,
            default_subject: String::new(),
            default_task: String::new(),
        }
    }
}

fn validated_string(value: &str, column: &str, row: usize) -> Result<String, DatasetError> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(DatasetError::BadCell {
            row,
            column: column.to_string(),
            value: value.to_string(),
        });
    }
    Ok(value.to_string())
}

fn default_image_path(subject: &str, task: &str, frame: u64) -> String {
    let mut path = String::new();
    if !subject.is_empty() {
        path.push_str(subject);
        path.push('/');
    }
    if !task.is_empty() {
        path.push_str(task);
        path.push('/');
    }
    path.push_str(&frame.to_string());
    path.push_str(".jpg");
    path
}

/// Reads an AU occurrence CSV into frame records.
///
/// Header names are matched case-insensitively. `frame` and all 12 AU
/// columns (`AU1` .. `AU24`, zero padding accepted) are required;
/// `subject`, `task`, and `image` are optional, and unrecognized columns
/// are ignored. AU cells must be `0`, `1`, or `9`. Rows are numbered from
/// 1 at the header line, so the first data row is row 2.
pub fn ingest_csv(
    reader: impl Read,
    options: &IngestOptions,
) -> Result<Vec<FrameRecord>, DatasetError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();

    let mut frame_col = None;
    let mut subject_col = None;
    let mut task_col = None;
    let mut image_col = None;
    let mut au_cols: [Option<usize>; 12] = [None; 12];
    for (idx, raw) in headers.iter().enumerate() {
        let name = raw.to_ascii_lowercase();
        let slot = match name.as_str() {
            "frame" => Some(&mut frame_col),
            "subject" => Some(&mut subject_col),
            "task" => Some(&mut task_col),
            "image" => Some(&mut image_col),
            _ => None,
        };
        if let Some(slot) = slot {
            if slot.replace(idx).is_some() {
                return Err(DatasetError::DuplicateColumn(name));
            }
            continue;
        }
        if let Some(au) = name
            .strip_prefix("au")
            .and_then(|digits| digits.parse::<u32>().ok())
            .and_then(|number| AuId::from_number(number).ok())
            && au_cols[au.index()].replace(idx).is_some()
        {
            return Err(DatasetError::DuplicateColumn(name));
        }
    }
    let frame_col = frame_col.ok_or_else(|| DatasetError::MissingColumn("frame".to_string()))?;
    let au_cols: Vec<(AuId, usize)> = CANONICAL_AUS
        .iter()
        .map(|&au| match au_cols[au.index()] {
            Some(col) => Ok((au, col)),
            None => Err(DatasetError::MissingColumn(format!("AU{}", au.number()))),
        })
        .collect::<Result<_, _>>()?;

    let mut records = Vec::new();
    let mut seen: BTreeSet<(String, String, u64)> = BTreeSet::new();
    for (idx, row) in csv_reader.records().enumerate() {
        let row_no = idx + 2;
        let row = row?;
        let optional_cell =
            |col: Option<usize>| col.and_then(|c| row.get(c)).filter(|v| !v.is_empty());

        let frame_value = row.get(frame_col).unwrap_or("");
        let frame: u64 = frame_value.parse().map_err(|_| DatasetError::BadCell {
            row: row_no,
            column: "frame".to_string(),
            value: frame_value.to_string(),
        })?;
        let subject = validated_string(
            optional_cell(subject_col).unwrap_or(&options.default_subject),
            "subject",
            row_no,
        )?;
        let task = validated_string(
            optional_cell(task_col).unwrap_or(&options.default_task),
            "task",
            row_no,
        )?;

        let mut activation = ActivationVector::EMPTY;
        let mut unknown = ActivationVector::EMPTY;
        for &(au, col) in &au_cols {
            match row.get(col).unwrap_or("") {
                "0" => {}
                "1" => activation.insert(au),
                "9" => unknown.insert(au),
                other => {
                    return Err(DatasetError::BadCell {
                        row: row_no,
                        column: format!("AU{}", au.number()),
                        value: other.to_string(),
                    });
                }
            }
        }

        let key = (subject.clone(), task.clone(), frame);
        if !seen.insert(key) {
            return Err(DatasetError::DuplicateFrame {
                subject,
                task,
                frame,
            });
        }
        if !unknown.is_empty() && options.policy == UnknownPolicy::SkipFrame {
            continue;
        }

        let image = match optional_cell(image_col) {
            Some(path) => validated_string(path, "image", row_no)?,
            None => default_image_path(&subject, &task, frame),
        };
        records.push(FrameRecord {
            subject,
            task,
            frame,
            activation,
            unknown,
            image,
        });
    }
    Ok(records)
}

fn select_reference_among(
    frames: &[FrameRecord],
    indices: &[usize],
    seed: u64,
) -> Result<usize, DatasetError> {
    if indices.is_empty() {
        return Err(DatasetError::NoFrames);
    }
    let mut neutral: Vec<usize> = indices
        .iter()
        .copied()
        .filter(|&i| frames[i].is_neutral())
        .collect();
    if neutral.is_empty() {
        let earliest = indices
            .iter()
            .copied()
            .min_by_key(|&i| (frames[i].frame, &frames[i].task, &frames[i].subject))
            .expect("indices is nonempty");
        return Ok(earliest);
    }
    neutral.sort_by(|&a, &b| {
        let fa = &frames[a];
        let fb = &frames[b];
        (&fa.subject, &fa.task, fa.frame).cmp(&(&fb.subject, &fb.task, fb.frame))
    });
    let mut rng = SplitMix64::new(seed);
    let pick = rng.next_below(neutral.len() as u64) as usize;
    Ok(neutral[pick])
}

/// Picks the reference frame for a subject's frames.
///
/// Neutral frames are the candidate pool; the seed draws one of them
/// uniformly. Without any neutral frame the earliest frame (lowest frame
/// number, then task) stands in. The chosen frame depends only on the set
/// of frames and the seed, not on slice order. Returns an index into
/// `frames`.
pub fn select_reference(frames: &[FrameRecord], seed: u64) -> Result<usize, DatasetError> {
    let indices: Vec<usize> = (0..frames.len()).collect();
    select_reference_among(frames, &indices, seed)
}

/// One annotated frame: the composed description plus its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub subject: String,
    pub task: String,
    pub frame: u64,
    pub image: String,
    /// Image path of the subject's reference face.
    pub reference_image: String,
    pub text: String,
    pub decomposition: Decomposition,
    /// Category of each decomposed construct, in construct order.
    pub categories: Vec<Category>,
}

const RECORD_KEYS: [&str; 10] = [
    "subject",
    "task",
    "frame",
    "image",
    "reference",
    "seed",
    "constructs",
    "paraphrases",
    "categories",
    "text",
];

fn record_error(message: String) -> DatasetError {
    DatasetError::Record { line: 0, message }
}

impl AnnotationRecord {
    /// Serializes to one tab-separated `key=value` line.
    ///
    /// The `text` field comes last, so it may contain `=` freely; no field
    /// may contain tabs or newlines.
    pub fn to_record_line(&self) -> String {
        let seed = self
            .decomposition
            .seed
            .map(|s| s.to_string())
            .unwrap_or_default();
        let constructs = self
            .decomposition
            .constructs
            .iter()
            .map(|c| {
                c.aus()
                    .iter()
                    .map(|au| au.number().to_string())
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect::<Vec<_>>()
            .join(";");
        let paraphrases = self
            .decomposition
            .paraphrase_indices
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(";");
        let categories = self
            .categories
            .iter()
            .map(|c| c.token())
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "subject={}\ttask={}\tframe={}\timage={}\treference={}\tseed={}\tconstructs={}\tparaphrases={}\tcategories={}\ttext={}",
            self.subject,
            self.task,
            self.frame,
            self.image,
            self.reference_image,
            seed,
            constructs,
            paraphrases,
            categories,
            self.text,
        )
    }

    /// Parses one record line written by [`AnnotationRecord::to_record_line`].
    ///
    /// Fields must appear in the exact order written. Errors report line 0;
    /// [`read_records`] fills in real line numbers.
    pub fn from_record_line(line: &str) -> Result<Self, DatasetError> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != RECORD_KEYS.len() {
            return Err(record_error(format!(
                "expected {} fields, found {}",
                RECORD_KEYS.len(),
                fields.len()
            )));
        }
        let mut values = Vec::with_capacity(RECORD_KEYS.len());
        for (field, key) in fields.iter().zip(RECORD_KEYS) {
            let Some((found, value)) = field.split_once('=') else {
                return Err(record_error(format!("field {key:?} is not key=value")));
            };
            if found != key {
                return Err(record_error(format!(
                    "expected key {key:?}, found {found:?}"
                )));
            }
            values.push(value);
        }

        let frame: u64 = values[2]
            .parse()
            .map_err(|_| record_error(format!("invalid frame {:?}", values[2])))?;
        if values[3].is_empty() {
            return Err(record_error("empty image path".to_string()));
        }
        if values[4].is_empty() {
            return Err(record_error("empty reference path".to_string()));
        }
        let seed = if values[5].is_empty() {
            None
        } else {
            Some(
                values[5]
                    .parse()
                    .map_err(|_| record_error(format!("invalid seed {:?}", values[5])))?,
            )
        };
        if values[6].is_empty() {
            return Err(record_error("record has no constructs".to_string()));
        }
        let constructs: Vec<Construct> = values[6]
            .split(';')
            .map(|token| {
                Construct::from_str(token)
                    .map_err(|e| record_error(format!("bad construct {token:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let paraphrase_indices: Vec<usize> = values[7]
            .split(';')
            .map(|token| {
                let index: usize = token
                    .parse()
                    .map_err(|_| record_error(format!("invalid paraphrase index {token:?}")))?;
                if index >= EXPECTED_PARAPHRASES {
                    return Err(record_error(format!(
                        "paraphrase index {index} out of range"
                    )));
                }
                Ok(index)
            })
            .collect::<Result<_, _>>()?;
        let categories: Vec<Category> = values[8]
            .split(';')
            .map(|token| {
                Category::from_str(token)
                    .map_err(|_| record_error(format!("unknown category {token:?}")))
            })
            .collect::<Result<_, _>>()?;
        if paraphrase_indices.len() != constructs.len() || categories.len() != constructs.len() {
            return Err(record_error(format!(
                "field counts disagree: {} constructs, {} paraphrases, {} categories",
                constructs.len(),
                paraphrase_indices.len(),
                categories.len()
            )));
        }
        if values[9].is_empty() {
            return Err(record_error("empty text".to_string()));
        }
        Ok(Self {
            subject: values[0].to_string(),
            task: values[1].to_string(),
            frame,
            image: values[3].to_string(),
            reference_image: values[4].to_string(),
            text: values[9].to_string(),
            decomposition: Decomposition {
                constructs,
                paraphrase_indices,
                seed,
            },
            categories,
        })
    }
}

/// Writes records one per line.
pub fn write_records(
    mut writer: impl Write,
    records: &[AnnotationRecord],
) -> Result<(), DatasetError> {
    for record in records {
        writeln!(writer, "{}", record.to_record_line())?;
    }
    Ok(())
}

/// Reads a records file, skipping blank lines and `#` comments.
pub fn read_records(reader: impl BufRead) -> Result<Vec<AnnotationRecord>, DatasetError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.trim_end_matches('\r');
        if content.trim().is_empty() || content.trim_start().starts_with('#') {
            continue;
        }
        let record = AnnotationRecord::from_record_line(content).map_err(|e| match e {
            DatasetError::Record { message, .. } => DatasetError::Record {
                line: idx + 1,
                message,
            },
            other => other,
        })?;
        records.push(record);
    }
    Ok(records)
}

fn group_by_subject(frames: &[FrameRecord]) -> BTreeMap<&str, Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, frame) in frames.iter().enumerate() {
        groups.entry(frame.subject.as_str()).or_default().push(i);
    }
    groups
}

fn build_subject(
    frames: &[FrameRecord],
    indices: &[usize],
    corpus: &Corpus,
    conflicts: &ConflictTable,
    run_seed: u64,
) -> Result<Vec<AnnotationRecord>, DatasetError> {
    let subject = frames[indices[0]].subject.as_str();
    let reference = select_reference_among(frames, indices, subject_seed(run_seed, subject))?;
    let reference_image = frames[reference].image.clone();
    let mut out = Vec::new();
    for &i in indices {
        let frame = &frames[i];
        if frame.activation.is_empty() {
            continue;
        }
        let fseed = frame_seed(run_seed, &frame.subject, &frame.task, frame.frame);
        let (text, decomposition) = compose(frame.activation, corpus, fseed)?;
        let categories = decomposition
            .constructs
            .iter()
            .map(|c| categorize(c, conflicts))
            .collect();
        out.push(AnnotationRecord {
            subject: frame.subject.clone(),
            task: frame.task.clone(),
            frame: frame.frame,
            image: frame.image.clone(),
            reference_image: reference_image.clone(),
            text,
            decomposition,
            categories,
        });
    }
    Ok(out)
}

fn sort_annotations(records: &mut [AnnotationRecord]) {
    records.sort_by(|a, b| (&a.subject, &a.task, a.frame).cmp(&(&b.subject, &b.task, b.frame)));
}

/// Builds annotations for every frame with at least one active AU.
///
/// Frames are grouped by subject; each subject gets one reference frame
/// via [`select_reference`] seeded from `run_seed` and the subject id, and
/// each annotated frame gets its paraphrases from a seed derived from
/// `run_seed` and the frame identity. Output is sorted by
/// `(subject, task, frame)`.
///
/// Uses the parallel path when the `parallel` feature is enabled.
pub fn build(
    frames: &[FrameRecord],
    corpus: &Corpus,
    conflicts: &ConflictTable,
    run_seed: u64,
) -> Result<Vec<AnnotationRecord>, DatasetError> {
    #[cfg(feature = "parallel")]
    {
        build_par(frames, corpus, conflicts, run_seed)
    }
    #[cfg(not(feature = "parallel"))]
    {
        build_seq(frames, corpus, conflicts, run_seed)
    }
}

/// Sequential build; always available.
pub fn build_seq(
    frames: &[FrameRecord],
    corpus: &Corpus,
    conflicts: &ConflictTable,
    run_seed: u64,
) -> Result<Vec<AnnotationRecord>, DatasetError> {
    let mut out = Vec::new();
    for indices in group_by_subject(frames).values() {
        out.extend(build_subject(frames, indices, corpus, conflicts, run_seed)?);
    }
    sort_annotations(&mut out);
    Ok(out)
}

/// Data-parallel build over subjects.
#[cfg(feature = "parallel")]
pub fn build_par(
    frames: &[FrameRecord],
    corpus: &Corpus,
    conflicts: &ConflictTable,
    run_seed: u64,
) -> Result<Vec<AnnotationRecord>, DatasetError> {
    use rayon::prelude::*;
    let groups: Vec<Vec<usize>> = group_by_subject(frames).into_values().collect();
    let chunks: Vec<Vec<AnnotationRecord>> = groups
        .par_iter()
        .map(|indices| build_subject(frames, indices, corpus, conflicts, run_seed))
        .collect::<Result<_, _>>()?;
    let mut out: Vec<AnnotationRecord> = chunks.into_iter().flatten().collect();
    sort_annotations(&mut out);
    Ok(out)
}

/// Counters for one construct category.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CategoryStats {
    /// Records containing at least one construct of this category.
    pub entries: usize,
    /// Total constructs of this category across all records.
    pub occurrences: usize,
    /// Records whose most specific category is this one, ranking
    /// conflicting over non-conflicting over individual.
    pub dominant_entries: usize,
    /// `dominant_entries` over the record total, 0 for an empty dataset.
    pub entry_share: f64,
}

/// Category statistics over a set of records.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetStats {
    pub individual: CategoryStats,
    pub non_conflicting: CategoryStats,
    pub conflicting: CategoryStats,
    pub total_records: usize,
}

impl DatasetStats {
    fn slot(&mut self, category: Category) -> &mut CategoryStats {
        match category {
            Category::Individual => &mut self.individual,
            Category::NonConflictingCombination => &mut self.non_conflicting,
            Category::ConflictingCombination => &mut self.conflicting,
        }
    }

    fn rows(&self) -> [(&'static str, &CategoryStats); 3] {
        [
            ("individual", &self.individual),
            ("non-conflicting", &self.non_conflicting),
            ("conflicting", &self.conflicting),
        ]
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total records: {}", self.total_records)?;
        writeln!(
            f,
            "{:<16} {:>7} {:>11} {:>8} {:>8}",
            "category", "entries", "occurrences", "dominant", "share"
        )?;
        let rows = self.rows();
        for (i, (name, s)) in rows.iter().enumerate() {
            write!(
                f,
                "{:<16} {:>7} {:>11} {:>8} {:>8.6}",
                name, s.entries, s.occurrences, s.dominant_entries, s.entry_share
            )?;
            if i + 1 < rows.len() {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Tallies category statistics over annotation records.
pub fn stats(records: &[AnnotationRecord]) -> DatasetStats {
    let mut result = DatasetStats {
        individual: CategoryStats::default(),
        non_conflicting: CategoryStats::default(),
        conflicting: CategoryStats::default(),
        total_records: records.len(),
    };
    for record in records {
        let mut dominant: Option<Category> = None;
        for &category in &record.categories {
            result.slot(category).occurrences += 1;
            dominant = Some(dominant.map_or(category, |d| d.max(category)));
        }
        for category in [
            Category::Individual,
            Category::NonConflictingCombination,
            Category::ConflictingCombination,
        ] {
            if record.categories.contains(&category) {
                result.slot(category).entries += 1;
            }
        }
        if let Some(category) = dominant {
            result.slot(category).dominant_entries += 1;
        }
    }
    if result.total_records > 0 {
        let total = result.total_records as f64;
        for category in [
            Category::Individual,
            Category::NonConflictingCombination,
            Category::ConflictingCombination,
        ] {
            let slot = result.slot(category);
            slot.entry_share = slot.dominant_entries as f64 / total;
        }
    }
    result
}
