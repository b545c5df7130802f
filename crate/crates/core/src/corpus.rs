//! Loading, validation, and lookup for the 38-construct AU text corpus.
//!
//! The corpus holds 12 individual constructs and 26 combined constructs,
//! each with exactly five paraphrase texts. It ships as a line-oriented
//! data file and is embedded in the crate as the default corpus.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::au::{AuId, Construct};

const EXPECTED_INDIVIDUAL: usize = 12;
const EXPECTED_COMBINED: usize = 26;
pub(crate) const EXPECTED_PARAPHRASES: usize = 5;

/// Errors from loading or querying a corpus.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] std::io::Error),
    /// A line that fits neither the header nor the paraphrase shape.
    #[error("corpus line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("corpus line {line}: AU{value} is not a canonical action unit")]
    UnknownAu { line: usize, value: u32 },
    #[error("corpus line {line}: construct {key:?} appears more than once")]
    DuplicateConstruct { key: Construct, line: usize },
    /// A construct with other than five paraphrases.
    #[error("construct {key:?} has {found} paraphrases, expected 5")]
    ParaphraseCount { key: Construct, found: usize },
    /// Wrong number of individual or combined constructs.
    #[error("expected {expected} {kind} constructs, found {found}")]
    ConstructCount {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    /// The same normalized text under two different constructs, which would
    /// make the inverse mapping ambiguous.
    #[error(
        "paraphrase {index_b} of {key_b:?} duplicates paraphrase {index_a} of {key_a:?} \
         (indices zero-based)"
    )]
    DuplicateText {
        key_a: Construct,
        index_a: usize,
        key_b: Construct,
        index_b: usize,
    },
    #[error("paraphrase text is empty")]
    EmptyParaphrase,
    #[error("paraphrase text must be a single line")]
    MultilineParaphrase,
    #[error("construct {0:?} is not in the corpus")]
    UnknownConstruct(Construct),
    #[error("paraphrase index {index} out of range for {key:?}")]
    IndexOutOfRange { key: Construct, index: usize },
}

/// Collapses all whitespace runs to single spaces and trims the ends.
pub fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// One paraphrase, kept both as printed and in normalized form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParaphraseText {
    raw: String,
    normalized: String,
}

impl ParaphraseText {
    /// Wraps a single-line text whose normalized form is nonempty.
    pub fn new(raw: impl Into<String>) -> Result<Self, CorpusError> {
        let raw = raw.into();
        if raw.contains(['\n', '\r']) {
            return Err(CorpusError::MultilineParaphrase);
        }
        let normalized = normalize(&raw);
        if normalized.is_empty() {
            return Err(CorpusError::EmptyParaphrase);
        }
        Ok(Self { raw, normalized })
    }

    /// The text exactly as stored in the corpus file.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Whitespace-collapsed form; this is what composition and parsing use.
    pub fn normalized(&self) -> &str {
        &self.normalized
    }
}

/// Two corpus positions holding the same normalized text.
///
/// Indices are zero-based paraphrase positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DuplicatePair {
    pub first: (Construct, usize),
    pub second: (Construct, usize),
}

impl DuplicatePair {
    /// True when both positions belong to the same construct.
    pub fn within_construct(&self) -> bool {
        self.first.0 == self.second.0
    }
}

/// The validated construct-to-paraphrases mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    entries: BTreeMap<Construct, Vec<ParaphraseText>>,
    combined_order: Vec<Construct>,
    duplicates: Vec<DuplicatePair>,
}

impl Corpus {
    /// Builds a corpus from entries without enforcing cardinality.
    ///
    /// The combined iteration order and the duplicate list are computed;
    /// run [`validate_corpus`] to check the full invariant set. File
    /// loading via [`parse_corpus`] is the strict entry point.
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (Construct, Vec<ParaphraseText>)>,
    {
        let entries: BTreeMap<_, _> = entries.into_iter().collect();
        let combined_order = compute_combined_order(&entries);
        let duplicates = find_duplicates(&entries);
        Self {
            entries,
            combined_order,
            duplicates,
        }
    }

    /// All constructs in ascending tuple order.
    pub fn constructs(&self) -> impl Iterator<Item = &Construct> {
        self.entries.keys()
    }

    /// All entries in ascending construct order.
    pub fn entries(&self) -> impl Iterator<Item = (&Construct, &[ParaphraseText])> {
        self.entries.iter().map(|(c, t)| (c, t.as_slice()))
    }

    /// The individual constructs in ascending order.
    pub fn individual_constructs(&self) -> impl Iterator<Item = &Construct> {
        self.entries.keys().filter(|c| c.is_individual())
    }

    /// The combined constructs in ascending tuple order.
    pub fn combined_constructs(&self) -> impl Iterator<Item = &Construct> {
        self.entries.keys().filter(|c| !c.is_individual())
    }

    pub fn individual_count(&self) -> usize {
        self.individual_constructs().count()
    }

    pub fn combined_count(&self) -> usize {
        self.combined_constructs().count()
    }

    /// Total number of paraphrase texts.
    pub fn text_count(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    /// Combined constructs sorted by length descending, ties broken by
    /// ascending AU tuple. This is the decomposition iteration order.
    pub fn combined_order(&self) -> &[Construct] {
        &self.combined_order
    }

    /// Normalized-text collisions found when the corpus was built.
    pub fn duplicates(&self) -> &[DuplicatePair] {
        &self.duplicates
    }

    pub fn contains(&self, construct: &Construct) -> bool {
        self.entries.contains_key(construct)
    }

    /// The paraphrases of one construct.
    pub fn texts(&self, construct: &Construct) -> Option<&[ParaphraseText]> {
        self.entries.get(construct).map(Vec::as_slice)
    }

    /// The paraphrase of `construct` at `index`.
    pub fn lookup(
        &self,
        construct: &Construct,
        index: usize,
    ) -> Result<&ParaphraseText, CorpusError> {
        let texts = self
            .entries
            .get(construct)
            .ok_or_else(|| CorpusError::UnknownConstruct(construct.clone()))?;
        texts
            .get(index)
            .ok_or_else(|| CorpusError::IndexOutOfRange {
                key: construct.clone(),
                index,
            })
    }

    /// Writes the corpus in the loadable file format.
    ///
    /// Constructs are emitted individuals first in ascending order, then
    /// combined constructs in the decomposition iteration order.
    pub fn write_to<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        let individuals: Vec<&Construct> = self.individual_constructs().collect();
        let ordered = individuals.into_iter().chain(self.combined_order.iter());
        for construct in ordered {
            writeln!(writer, "[AU {}]", construct.key_string())?;
            for text in &self.entries[construct] {
                writeln!(writer, "{}", text.raw())?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }

    /// The corpus rendered in the loadable file format.
    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("corpus text is UTF-8")
    }
}

fn compute_combined_order(entries: &BTreeMap<Construct, Vec<ParaphraseText>>) -> Vec<Construct> {
    let mut order: Vec<Construct> = entries
        .keys()
        .filter(|c| !c.is_individual())
        .cloned()
        .collect();
    order.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    order
}

fn find_duplicates(entries: &BTreeMap<Construct, Vec<ParaphraseText>>) -> Vec<DuplicatePair> {
    let mut seen: BTreeMap<&str, (Construct, usize)> = BTreeMap::new();
    let mut duplicates = Vec::new();
    for (construct, texts) in entries {
        for (index, text) in texts.iter().enumerate() {
            match seen.get(text.normalized()) {
                Some(first) => duplicates.push(DuplicatePair {
                    first: first.clone(),
                    second: (construct.clone(), index),
                }),
                None => {
                    seen.insert(text.normalized(), (construct.clone(), index));
                }
            }
        }
    }
    duplicates
}

/// Parses a corpus from its file format, enforcing full cardinality.
///
/// The format is line-oriented: a header `[AU <n>(,<n>)*]` opens a
/// construct and must be followed by exactly five paraphrase lines. Blank
/// lines and lines starting with `#` are ignored.
///
/// A normalized text appearing under two different constructs is an error
/// because the inverse mapping would be ambiguous. The same text repeated
/// within one construct is tolerated and surfaced via
/// [`Corpus::duplicates`] and the validation report.
pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let mut entries: BTreeMap<Construct, Vec<ParaphraseText>> = BTreeMap::new();
    let mut current: Option<Construct> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.starts_with('[') {
            let inner = trimmed
                .strip_prefix("[AU")
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| CorpusError::Schema {
                    line,
                    message: format!("malformed construct header {trimmed:?}"),
                })?;
            if let Some(key) = current.take() {
                let found = entries[&key].len();
                if found != EXPECTED_PARAPHRASES {
                    return Err(CorpusError::ParaphraseCount { key, found });
                }
            }
            let key = parse_header_aus(inner, line)?;
            if entries.contains_key(&key) {
                return Err(CorpusError::DuplicateConstruct { key, line });
            }
            entries.insert(key.clone(), Vec::new());
            current = Some(key);
        } else {
            let Some(key) = &current else {
                return Err(CorpusError::Schema {
                    line,
                    message: "paraphrase text before any construct header".to_string(),
                });
            };
            let texts = entries.get_mut(key).expect("current construct is present");
            if texts.len() == EXPECTED_PARAPHRASES {
                return Err(CorpusError::ParaphraseCount {
                    key: key.clone(),
                    found: EXPECTED_PARAPHRASES + 1,
                });
            }
            let text = ParaphraseText::new(raw_line).map_err(|e| CorpusError::Schema {
                line,
                message: e.to_string(),
            })?;
            texts.push(text);
        }
    }
    if let Some(key) = current {
        let found = entries[&key].len();
        if found != EXPECTED_PARAPHRASES {
            return Err(CorpusError::ParaphraseCount { key, found });
        }
    }

    let individual = entries.keys().filter(|c| c.is_individual()).count();
    let combined = entries.len() - individual;
    if individual != EXPECTED_INDIVIDUAL {
        return Err(CorpusError::ConstructCount {
            kind: "individual",
            expected: EXPECTED_INDIVIDUAL,
            found: individual,
        });
    }
    if combined != EXPECTED_COMBINED {
        return Err(CorpusError::ConstructCount {
            kind: "combined",
            expected: EXPECTED_COMBINED,
            found: combined,
        });
    }

    let corpus = Corpus::from_entries(entries);
    if let Some(cross) = corpus.duplicates().iter().find(|d| !d.within_construct()) {
        return Err(CorpusError::DuplicateText {
            key_a: cross.first.0.clone(),
            index_a: cross.first.1,
            key_b: cross.second.0.clone(),
            index_b: cross.second.1,
        });
    }
    Ok(corpus)
}

fn parse_header_aus(inner: &str, line: usize) -> Result<Construct, CorpusError> {
    let mut aus = Vec::new();
    for token in inner.split(',') {
        let token = token.trim();
        let n: u32 = token.parse().map_err(|_| CorpusError::Schema {
            line,
            message: format!("bad AU number {token:?} in construct header"),
        })?;
        let au = AuId::from_number(n).map_err(|_| CorpusError::UnknownAu { line, value: n })?;
        aus.push(au);
    }
    let count = aus.len();
    let construct = Construct::new(aus).map_err(|_| CorpusError::Schema {
        line,
        message: "construct header lists no AUs".to_string(),
    })?;
    if construct.len() != count {
        return Err(CorpusError::Schema {
            line,
            message: "construct header repeats an AU".to_string(),
        });
    }
    Ok(construct)
}

/// Loads and parses a corpus file.
pub fn load_corpus<P: AsRef<Path>>(path: P) -> Result<Corpus, CorpusError> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

/// The corpus data file bundled with the crate.
pub fn bundled_corpus_text() -> &'static str {
    include_str!("../data/au_text_corpus.txt")
}

/// Parses the bundled corpus. The library's own tests guarantee validity.
pub fn bundled_corpus() -> Corpus {
    parse_corpus(bundled_corpus_text()).expect("bundled corpus is valid")
}

/// Outcome of one validation check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Warn => "WARN",
            CheckStatus::Fail => "FAIL",
        })
    }
}

/// One named validation check with its outcome.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

/// Full validation outcome for a corpus.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub individual: usize,
    pub combined: usize,
    pub texts: usize,
}

impl ValidationReport {
    /// True when no check failed. Warnings do not fail validation.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Warn)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{} {}: {}", check.status, check.name, check.detail)?;
        }
        write!(
            f,
            "{} constructs ({} individual, {} combined), {} texts, {}",
            self.individual + self.combined,
            self.individual,
            self.combined,
            self.texts,
            if self.passed() { "OK" } else { "FAILED" }
        )
    }
}

/// Checks every corpus invariant and reports per-check outcomes.
///
/// Within-construct duplicate texts and paraphrases that are proper
/// prefixes of other paraphrases are reported as warnings; everything else
/// that deviates is a failure.
pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let mut checks = Vec::new();
    let individual = corpus.individual_count();
    let combined = corpus.combined_count();
    let texts = corpus.text_count();

    let count_check = |name, expected: usize, found: usize| Check {
        name,
        status: if expected == found {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail: format!("expected {expected}, found {found}"),
    };
    checks.push(count_check(
        "individual-count",
        EXPECTED_INDIVIDUAL,
        individual,
    ));
    checks.push(count_check("combined-count", EXPECTED_COMBINED, combined));
    checks.push(count_check(
        "text-total",
        (EXPECTED_INDIVIDUAL + EXPECTED_COMBINED) * EXPECTED_PARAPHRASES,
        texts,
    ));

    let short: Vec<String> = corpus
        .entries()
        .filter(|(_, t)| t.len() != EXPECTED_PARAPHRASES)
        .map(|(c, t)| format!("{:?} has {}", c, t.len()))
        .collect();
    checks.push(Check {
        name: "paraphrase-cardinality",
        status: if short.is_empty() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail: if short.is_empty() {
            "every construct has 5 paraphrases".to_string()
        } else {
            short.join("; ")
        },
    });

    let expected_order = compute_combined_order(
        &corpus
            .entries()
            .map(|(c, t)| (c.clone(), t.to_vec()))
            .collect(),
    );
    checks.push(Check {
        name: "combined-order",
        status: if corpus.combined_order() == expected_order.as_slice() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail: "length descending, ties by ascending AU tuple".to_string(),
    });

    let (within, cross): (Vec<_>, Vec<_>) = corpus
        .duplicates()
        .iter()
        .partition(|d| d.within_construct());
    let describe = |d: &DuplicatePair| {
        format!(
            "{:?}[{}] = {:?}[{}]",
            d.first.0, d.first.1, d.second.0, d.second.1
        )
    };
    checks.push(Check {
        name: "duplicate-texts",
        status: if !cross.is_empty() {
            CheckStatus::Fail
        } else if !within.is_empty() {
            CheckStatus::Warn
        } else {
            CheckStatus::Pass
        },
        detail: if corpus.duplicates().is_empty() {
            "all normalized texts are distinct".to_string()
        } else {
            corpus
                .duplicates()
                .iter()
                .map(describe)
                .collect::<Vec<_>>()
                .join("; ")
        },
    });

    let mut prefixes = Vec::new();
    let all: Vec<(&Construct, usize, &str)> = corpus
        .entries()
        .flat_map(|(c, texts)| {
            texts
                .iter()
                .enumerate()
                .map(move |(i, t)| (c, i, t.normalized()))
        })
        .collect();
    for (ca, ia, ta) in &all {
        for (cb, ib, tb) in &all {
            if ta.len() < tb.len() && tb.starts_with(ta) {
                prefixes.push(format!("{ca:?}[{ia}] prefixes {cb:?}[{ib}]"));
            }
        }
    }
    checks.push(Check {
        name: "prefix-pairs",
        status: if prefixes.is_empty() {
            CheckStatus::Pass
        } else {
            CheckStatus::Warn
        },
        detail: if prefixes.is_empty() {
            "no paraphrase is a prefix of another".to_string()
        } else {
            prefixes.join("; ")
        },
    });

    ValidationReport {
        checks,
        individual,
        combined,
        texts,
    }
}
