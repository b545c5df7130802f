//! Canonical action unit identifiers, activation and probability vectors,
//! construct identity, and the conflict taxonomy.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

/// The 12 canonical action units, in ascending numeric order.
///
/// The position of each AU in this array fixes the meaning of every vector
/// index used throughout the crate.
pub const CANONICAL_AUS: [AuId; 12] = [
    AuId::Au1,
    AuId::Au2,
    AuId::Au4,
    AuId::Au6,
    AuId::Au7,
    AuId::Au10,
    AuId::Au12,
    AuId::Au14,
    AuId::Au15,
    AuId::Au17,
    AuId::Au23,
    AuId::Au24,
];

const ACTIVATION_MASK: u16 = 0x0FFF;

/// Errors for action unit level values.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum AuError {
    /// The number is not one of the 12 canonical AUs.
    #[error("AU{0} is not a canonical action unit")]
    UnknownAu(u32),
    /// A token could not be read as an action unit.
    #[error("cannot parse {0:?} as an action unit")]
    InvalidToken(String),
    /// A token could not be read as a category name.
    #[error("cannot parse {0:?} as a category")]
    InvalidCategory(String),
    /// A construct needs at least one action unit.
    #[error("construct needs at least one action unit")]
    EmptyConstruct,
    /// A probability entry fell outside [0, 1] or was not finite.
    #[error("probability {value} at position {position} is outside [0, 1]")]
    InvalidProbability { position: usize, value: f64 },
    /// A conflict pair must name two distinct action units.
    #[error("conflict pair names AU{0} twice")]
    IdenticalPair(u32),
}

/// One of the 12 canonical FACS action units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum AuId {
    Au1 = 1,
    Au2 = 2,
    Au4 = 4,
    Au6 = 6,
    Au7 = 7,
    Au10 = 10,
    Au12 = 12,
    Au14 = 14,
    Au15 = 15,
    Au17 = 17,
    Au23 = 23,
    Au24 = 24,
}

impl AuId {
    /// The FACS number of this action unit.
    pub const fn number(self) -> u8 {
        self as u8
    }

    /// Position of this AU in [`CANONICAL_AUS`], hence in every vector.
    pub const fn index(self) -> usize {
        match self {
            AuId::Au1 => 0,
            AuId::Au2 => 1,
            AuId::Au4 => 2,
            AuId::Au6 => 3,
            AuId::Au7 => 4,
            AuId::Au10 => 5,
            AuId::Au12 => 6,
            AuId::Au14 => 7,
            AuId::Au15 => 8,
            AuId::Au17 => 9,
            AuId::Au23 => 10,
            AuId::Au24 => 11,
        }
    }

    /// The AU at a canonical vector position, if the position is in range.
    pub const fn from_index(index: usize) -> Option<Self> {
        if index < 12 {
            Some(CANONICAL_AUS[index])
        } else {
            None
        }
    }

    /// Maps a FACS number to its AU, rejecting anything non-canonical.
    pub fn from_number(n: u32) -> Result<Self, AuError> {
        match n {
            1 => Ok(AuId::Au1),
            2 => Ok(AuId::Au2),
            4 => Ok(AuId::Au4),
            6 => Ok(AuId::Au6),
            7 => Ok(AuId::Au7),
            10 => Ok(AuId::Au10),
            12 => Ok(AuId::Au12),
            14 => Ok(AuId::Au14),
            15 => Ok(AuId::Au15),
            17 => Ok(AuId::Au17),
            23 => Ok(AuId::Au23),
            24 => Ok(AuId::Au24),
            other => Err(AuError::UnknownAu(other)),
        }
    }
}

impl fmt::Display for AuId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AU{}", self.number())
    }
}

impl FromStr for AuId {
    type Err = AuError;

    /// Accepts `"12"` or `"AU12"` (case-insensitive prefix).
    fn from_str(s: &str) -> Result<Self, AuError> {
        let token = s.trim();
        let digits = token
            .strip_prefix("AU")
            .or_else(|| token.strip_prefix("au"))
            .or_else(|| token.strip_prefix("Au"))
            .unwrap_or(token);
        let n: u32 = digits
            .parse()
            .map_err(|_| AuError::InvalidToken(s.to_string()))?;
        Self::from_number(n)
    }
}

/// Binary activation state of the 12 canonical AUs, packed as a bitmask.
///
/// Bit `i` corresponds to `CANONICAL_AUS[i]`.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActivationVector(u16);

impl ActivationVector {
    /// No AU active.
    pub const EMPTY: Self = Self(0);
    /// All 12 AUs active.
    pub const ALL: Self = Self(ACTIVATION_MASK);

    /// Builds a vector from raw bits, discarding bits beyond the 12 AUs.
    pub const fn from_bits_truncate(bits: u16) -> Self {
        Self(bits & ACTIVATION_MASK)
    }

    /// The raw 12-bit mask.
    pub const fn bits(self) -> u16 {
        self.0
    }

    /// Whether the given AU is active.
    pub const fn contains(self, au: AuId) -> bool {
        self.0 >> au.index() & 1 == 1
    }

    /// Marks the AU active.
    pub fn insert(&mut self, au: AuId) {
        self.0 |= 1 << au.index();
    }

    /// Marks the AU inactive.
    pub fn remove(&mut self, au: AuId) {
        self.0 &= !(1 << au.index());
    }

    /// Union of two activation sets.
    pub const fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    /// Intersection of two activation sets.
    pub const fn intersection(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    /// AUs active in `self` but not in `other`.
    pub const fn difference(self, other: Self) -> Self {
        Self(self.0 & !other.0)
    }

    /// Whether every AU active in `self` is also active in `other`.
    pub const fn is_subset_of(self, other: Self) -> bool {
        self.0 & other.0 == self.0
    }

    /// True when no AU is active.
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Number of active AUs.
    pub const fn count(self) -> u32 {
        self.0.count_ones()
    }

    /// Active AUs in ascending order.
    pub fn to_set(self) -> Vec<AuId> {
        self.iter().collect()
    }

    /// Builds a vector from any collection of AUs; duplicates are harmless.
    pub fn from_set<I: IntoIterator<Item = AuId>>(aus: I) -> Self {
        let mut v = Self::EMPTY;
        for au in aus {
            v.insert(au);
        }
        v
    }

    /// Builds a vector from FACS numbers, rejecting non-canonical ones.
    pub fn from_numbers(numbers: &[u32]) -> Result<Self, AuError> {
        let mut v = Self::EMPTY;
        for &n in numbers {
            v.insert(AuId::from_number(n)?);
        }
        Ok(v)
    }

    /// Iterates the active AUs in ascending order.
    pub fn iter(self) -> impl Iterator<Item = AuId> {
        CANONICAL_AUS
            .into_iter()
            .filter(move |au| self.contains(*au))
    }

    /// The 0/1 probability image of this activation.
    pub fn to_probabilities(self) -> ProbabilityVector {
        let mut values = [0.0; 12];
        for au in self.iter() {
            values[au.index()] = 1.0;
        }
        ProbabilityVector(values)
    }

    /// The 12 bits as a string of `0`/`1` digits in canonical AU order.
    pub fn bit_string(self) -> String {
        (0..12)
            .map(|i| if self.0 >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for ActivationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bit_string())
    }
}

impl fmt::Debug for ActivationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActivationVector({})", self.bit_string())
    }
}

/// Per-AU activation probabilities, each finite and within [0, 1].
///
/// Position `i` corresponds to `CANONICAL_AUS[i]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityVector([f64; 12]);

impl ProbabilityVector {
    /// Validates and wraps a probability array.
    pub fn new(values: [f64; 12]) -> Result<Self, AuError> {
        for (position, &value) in values.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(AuError::InvalidProbability { position, value });
            }
        }
        Ok(Self(values))
    }

    /// The probability for one AU.
    pub fn get(&self, au: AuId) -> f64 {
        self.0[au.index()]
    }

    /// All 12 probabilities in canonical order.
    pub fn values(&self) -> &[f64; 12] {
        &self.0
    }

    /// The AUs with strictly positive probability.
    pub fn support(&self) -> ActivationVector {
        ActivationVector::from_set(
            CANONICAL_AUS
                .into_iter()
                .filter(|au| self.0[au.index()] > 0.0),
        )
    }

    /// True when every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

impl From<ActivationVector> for ProbabilityVector {
    fn from(v: ActivationVector) -> Self {
        v.to_probabilities()
    }
}

/// An individual AU or a combination of AUs that owns its own texts.
///
/// Identity is the sorted AU tuple. Display names such as
/// `"AU6, AU12, AU15 and AU17"` are rendered on demand and never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Construct(Vec<AuId>);

impl Construct {
    /// Builds a construct from any collection of AUs.
    ///
    /// The AUs are sorted and deduplicated; an empty collection is rejected.
    pub fn new<I: IntoIterator<Item = AuId>>(aus: I) -> Result<Self, AuError> {
        let mut list: Vec<AuId> = aus.into_iter().collect();
        list.sort();
        list.dedup();
        if list.is_empty() {
            return Err(AuError::EmptyConstruct);
        }
        Ok(Self(list))
    }

    /// Builds a construct from FACS numbers.
    pub fn from_numbers(numbers: &[u32]) -> Result<Self, AuError> {
        let aus = numbers
            .iter()
            .map(|&n| AuId::from_number(n))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(aus)
    }

    /// A single-AU construct.
    pub fn single(au: AuId) -> Self {
        Self(vec![au])
    }

    /// The member AUs in ascending order.
    pub fn aus(&self) -> &[AuId] {
        &self.0
    }

    /// Number of member AUs, always at least one.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; constructs hold at least one AU.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True for single-AU constructs.
    pub fn is_individual(&self) -> bool {
        self.0.len() == 1
    }

    /// The activation vector with exactly this construct's AUs set.
    pub fn activation(&self) -> ActivationVector {
        ActivationVector::from_set(self.0.iter().copied())
    }

    /// Whether every member AU is active in `v`.
    pub fn is_subset_of(&self, v: ActivationVector) -> bool {
        self.activation().is_subset_of(v)
    }

    /// Human-readable name, e.g. `"AU15"` or `"AU6, AU12, AU15 and AU17"`.
    pub fn display_name(&self) -> String {
        match self.0.len() {
            1 => self.0[0].to_string(),
            2 => format!("{} and {}", self.0[0], self.0[1]),
            _ => {
                let (last, head) = self.0.split_last().expect("construct is nonempty");
                let head = head
                    .iter()
                    .map(AuId::to_string)
                    .collect::<Vec<_>>()
                    .join(", ");
                format!("{head} and {last}")
            }
        }
    }

    /// Compact numeric key, e.g. `"6,12,15,17"`.
    pub fn key_string(&self) -> String {
        self.0
            .iter()
            .map(|au| au.number().to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Construct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

impl fmt::Debug for Construct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Construct({})", self.key_string())
    }
}

impl FromStr for Construct {
    type Err = AuError;

    /// Accepts AU tokens separated by `,` or `+`, e.g. `"15,17"` or
    /// `"AU15+AU17"`.
    fn from_str(s: &str) -> Result<Self, AuError> {
        let tokens: Vec<&str> = s
            .split([',', '+'])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(AuError::EmptyConstruct);
        }
        let aus = tokens
            .iter()
            .map(|t| t.parse::<AuId>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(aus)
    }
}

/// Dataset category of a construct under a given conflict table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    /// A single AU.
    Individual,
    /// A combination none of whose AU pairs is marked antagonistic.
    NonConflictingCombination,
    /// A combination containing at least one antagonistic AU pair.
    ConflictingCombination,
}

impl Category {
    /// Stable lowercase token used in record output.
    pub const fn token(self) -> &'static str {
        match self {
            Category::Individual => "individual",
            Category::NonConflictingCombination => "non-conflicting",
            Category::ConflictingCombination => "conflicting",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Category {
    type Err = AuError;

    fn from_str(s: &str) -> Result<Self, AuError> {
        match s.trim() {
            "individual" => Ok(Category::Individual),
            "non-conflicting" => Ok(Category::NonConflictingCombination),
            "conflicting" => Ok(Category::ConflictingCombination),
            other => Err(AuError::InvalidCategory(other.to_string())),
        }
    }
}

/// Errors from reading a conflict table file.
#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read conflict table: {0}")]
    Io(#[from] std::io::Error),
    #[error("conflict table line {line}: expected two comma-separated AU numbers, got {content:?}")]
    Malformed { line: usize, content: String },
    #[error("conflict table line {line}: {source}")]
    Au { line: usize, source: AuError },
}

/// Set of unordered AU pairs marked antagonistic.
///
/// The table is symmetric by construction; pairs are stored with the lower
/// AU first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictTable {
    pairs: BTreeSet<(AuId, AuId)>,
}

impl ConflictTable {
    /// A table with no pairs.
    pub fn empty() -> Self {
        Self {
            pairs: BTreeSet::new(),
        }
    }

    /// Adds a pair; the two AUs must differ.
    pub fn insert(&mut self, a: AuId, b: AuId) -> Result<(), AuError> {
        if a == b {
            return Err(AuError::IdenticalPair(a.number() as u32));
        }
        let pair = if a < b { (a, b) } else { (b, a) };
        self.pairs.insert(pair);
        Ok(())
    }

    /// Whether the pair is marked antagonistic, in either order.
    pub fn contains(&self, a: AuId, b: AuId) -> bool {
        let pair = if a < b { (a, b) } else { (b, a) };
        self.pairs.contains(&pair)
    }

    /// The pairs in ascending order, lower AU first.
    pub fn pairs(&self) -> impl Iterator<Item = (AuId, AuId)> + '_ {
        self.pairs.iter().copied()
    }

    /// Number of pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// True when the table has no pairs.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether some pair of the construct's AUs is in the table.
    pub fn conflicts_within(&self, construct: &Construct) -> bool {
        let aus = construct.aus();
        for (i, &a) in aus.iter().enumerate() {
            for &b in &aus[i + 1..] {
                if self.contains(a, b) {
                    return true;
                }
            }
        }
        false
    }

    /// Parses a table from text.
    ///
    /// One pair per line as two comma-separated AU numbers. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut table = Self::empty();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let Some((left, right)) = content.split_once(',') else {
                return Err(TableError::Malformed {
                    line,
                    content: content.to_string(),
                });
            };
            if right.contains(',') {
                return Err(TableError::Malformed {
                    line,
                    content: content.to_string(),
                });
            }
            let a: AuId = left
                .parse()
                .map_err(|source| TableError::Au { line, source })?;
            let b: AuId = right
                .parse()
                .map_err(|source| TableError::Au { line, source })?;
            table
                .insert(a, b)
                .map_err(|source| TableError::Au { line, source })?;
        }
        Ok(table)
    }

    /// Loads a table from a file.
    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self, TableError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl Default for ConflictTable {
    /// The default taxonomy: AU1+4, AU2+4, AU12+15, and AU15+17.
    fn default() -> Self {
        let mut table = Self::empty();
        for (a, b) in [
            (AuId::Au1, AuId::Au4),
            (AuId::Au2, AuId::Au4),
            (AuId::Au12, AuId::Au15),
            (AuId::Au15, AuId::Au17),
        ] {
            table.insert(a, b).expect("default pairs are distinct");
        }
        table
    }
}

/// Classifies a construct under the given conflict table.
pub fn categorize(construct: &Construct, table: &ConflictTable) -> Category {
    if construct.is_individual() {
        Category::Individual
    } else if table.conflicts_within(construct) {
        Category::ConflictingCombination
    } else {
        Category::NonConflictingCombination
    }
}
