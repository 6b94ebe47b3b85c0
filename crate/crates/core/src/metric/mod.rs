//! Metric spaces for each decision setting, their points, and the distance
//! oracle shared by every other module.
//!
//! A [`MetricSpace`] is an immutable descriptor. Points carry a payload
//! tagged by kind; [`MetricSpace::validate_point`] reports every violated
//! invariant, while [`MetricSpace::distance`] only checks that the payload
//! kind matches the space.

mod enumerate;
mod midpoint;
pub mod perm;
mod repr;
mod sample;
pub mod strings;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use midpoint::DEFAULT_MIDPOINT_CAP;
pub use repr::PointRepr;

/// Tolerance on the simplex sum-to-one constraint.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Largest ground set a subset payload can address.
pub const MAX_GROUND_SET: usize = 64;

/// Longest text the string space accepts; the exact distance search is
/// exponential in the number of repeated symbols.
pub const MAX_TEXT_LEN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("a {point} point does not belong to a {space} space")]
    PointSpaceMismatch { space: &'static str, point: &'static str },
    #[error("invalid point: {}", display_violations(.0))]
    InvalidPoint(Vec<Violation>),
    #[error("{0} spaces cannot be enumerated")]
    SpaceNotEnumerable(String),
    #[error("midpoint candidates need two distinct points")]
    DegeneratePair,
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("cannot decode point: {0}")]
    Decode(String),
}

fn display_violations(vs: &[Violation]) -> String {
    vs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// One violated point invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    #[error("{point} payload in a {space} space")]
    KindMismatch { space: String, point: String },
    #[error("expected {expected} coordinates, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("negative entry {value} at {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("entries sum to {sum}, not 1")]
    SumNotOne { sum: f64 },
    #[error("{value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("not a bijection on the items")]
    NotABijection,
    #[error("unknown candidate {index}")]
    UnknownCandidate { index: usize },
    #[error("subset uses elements outside the ground set")]
    OutsideGroundSet,
    #[error("subset has {found} elements, expected {expected}")]
    WrongSubsetSize { expected: usize, found: usize },
    #[error("symbol {symbol:?} is not in the alphabet")]
    UnknownSymbol { symbol: char },
    #[error("text of length {len} exceeds {max}")]
    TooLong { len: usize, max: usize },
    #[error("unknown table point {index}")]
    UnknownNode { index: usize },
}

/// A point of some metric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    /// A candidate index, or `None` for the vacant position.
    Candidate(Option<usize>),
    Scalar(f64),
    /// Simplex allocations and Euclidean points.
    Vector(Vec<f64>),
    /// Item indices from most to least preferred.
    Ranking(Vec<usize>),
    /// Bitmask over the ground set.
    Subset(u64),
    Text(String),
    /// Index into a finite table.
    Node(usize),
}

impl Point {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Point::Candidate(_) => "candidate",
            Point::Scalar(_) => "scalar",
            Point::Vector(_) => "vector",
            Point::Ranking(_) => "ranking",
            Point::Subset(_) => "subset",
            Point::Text(_) => "text",
            Point::Node(_) => "node",
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Point::Scalar(x) => Some(*x),
            _ => None,
        }
    }
}

/// Descriptor of one metric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDescriptor", into = "SpaceDescriptor")]
pub enum MetricSpace {
    /// Discrete metric on the candidates plus the vacancy marker.
    Plurality { candidates: Vec<String> },
    /// A closed interval of the reals with `|x - y|`.
    Scalar { lo: f64, hi: f64 },
    /// The probability simplex over `m` categories, Euclidean distance.
    Simplex { m: usize },
    /// `R^dim` with Euclidean distance.
    Euclidean { dim: usize },
    /// Rankings of `m` items with the swap distance.
    Permutations { m: usize },
    /// Subsets of a ground set with symmetric-difference distance,
    /// optionally restricted to a fixed size.
    Subsets { ground: Vec<String>, size: Option<usize> },
    /// Texts over an alphabet; swaps cost `1 / max_len^2`.
    Strings { alphabet: Vec<char>, max_len: usize },
    /// An explicit finite metric.
    Table { labels: Vec<String>, distances: Vec<Vec<f64>> },
}

/// Serialized form of [`MetricSpace`]; validated on conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDescriptor {
    Plurality {
        candidates: Vec<String>,
    },
    Scalar {
        lo: f64,
        hi: f64,
    },
    Simplex {
        m: usize,
    },
    Euclidean {
        dim: usize,
    },
    Permutations {
        m: usize,
    },
    Subsets {
        ground: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
    },
    Strings {
        alphabet: String,
        max_len: usize,
    },
    Table {
        labels: Vec<String>,
        distances: Vec<Vec<f64>>,
    },
    /// Read-only shorthand for a table: weighted edges between labels,
    /// completed by shortest paths.
    Graph {
        labels: Vec<String>,
        edges: Vec<(String, String, f64)>,
    },
}

impl TryFrom<SpaceDescriptor> for MetricSpace {
    type Error = MetricError;

    fn try_from(d: SpaceDescriptor) -> Result<Self, MetricError> {
        let space = match d {
            SpaceDescriptor::Plurality { candidates } => MetricSpace::Plurality { candidates },
            SpaceDescriptor::Scalar { lo, hi } => MetricSpace::Scalar { lo, hi },
            SpaceDescriptor::Simplex { m } => MetricSpace::Simplex { m },
            SpaceDescriptor::Euclidean { dim } => MetricSpace::Euclidean { dim },
            SpaceDescriptor::Permutations { m } => MetricSpace::Permutations { m },
            SpaceDescriptor::Subsets { ground, size } => MetricSpace::Subsets { ground, size },
            SpaceDescriptor::Strings { alphabet, max_len } => MetricSpace::Strings {
                alphabet: alphabet.chars().collect(),
                max_len,
            },
            SpaceDescriptor::Table { labels, distances } => MetricSpace::Table { labels, distances },
            SpaceDescriptor::Graph { labels, edges } => {
                let index = |l: &str| {
                    labels
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| MetricError::InvalidSpace(format!("edge names unknown point {l:?}")))
                };
                let edges = edges
                    .iter()
                    .map(|(a, b, w)| Ok((index(a)?, index(b)?, *w)))
                    .collect::<Result<Vec<_>, MetricError>>()?;
                return MetricSpace::graph(labels.clone(), &edges);
            }
        };
        space.check()?;
        Ok(space)
    }
}

impl From<MetricSpace> for SpaceDescriptor {
    fn from(s: MetricSpace) -> Self {
        match s {
            MetricSpace::Plurality { candidates } => SpaceDescriptor::Plurality { candidates },
            MetricSpace::Scalar { lo, hi } => SpaceDescriptor::Scalar { lo, hi },
            MetricSpace::Simplex { m } => SpaceDescriptor::Simplex { m },
            MetricSpace::Euclidean { dim } => SpaceDescriptor::Euclidean { dim },
            MetricSpace::Permutations { m } => SpaceDescriptor::Permutations { m },
            MetricSpace::Subsets { ground, size } => SpaceDescriptor::Subsets { ground, size },
            MetricSpace::Strings { alphabet, max_len } => SpaceDescriptor::Strings {
                alphabet: alphabet.into_iter().collect(),
                max_len,
            },
            MetricSpace::Table { labels, distances } => SpaceDescriptor::Table { labels, distances },
        }
    }
}

impl fmt::Display for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpace::Plurality { candidates } => write!(f, "plurality({} candidates)", candidates.len()),
            MetricSpace::Scalar { lo, hi } => write!(f, "scalar[{lo}, {hi}]"),
            MetricSpace::Simplex { m } => write!(f, "simplex(m={m})"),
            MetricSpace::Euclidean { dim } => write!(f, "euclidean(dim={dim})"),
            MetricSpace::Permutations { m } => write!(f, "permutations(m={m})"),
            MetricSpace::Subsets { ground, size: None } => write!(f, "subsets(|A|={})", ground.len()),
            MetricSpace::Subsets { ground, size: Some(k) } => {
                write!(f, "subsets(|A|={}, k={k})", ground.len())
            }
            MetricSpace::Strings { alphabet, max_len } => {
                write!(f, "strings(|alphabet|={}, max_len={max_len})", alphabet.len())
            }
            MetricSpace::Table { labels, .. } => write!(f, "table({} points)", labels.len()),
        }
    }
}

impl MetricSpace {
    pub fn plurality<S: Into<String>>(candidates: impl IntoIterator<Item = S>) -> Result<Self, MetricError> {
        let s = MetricSpace::Plurality { candidates: candidates.into_iter().map(Into::into).collect() };
        s.check()?;
        Ok(s)
    }

    pub fn scalar(lo: f64, hi: f64) -> Result<Self, MetricError> {
        let s = MetricSpace::Scalar { lo, hi };
        s.check()?;
        Ok(s)
    }

    pub fn simplex(m: usize) -> Result<Self, MetricError> {
        let s = MetricSpace::Simplex { m };
        s.check()?;
        Ok(s)
    }

    pub fn euclidean(dim: usize) -> Result<Self, MetricError> {
        let s = MetricSpace::Euclidean { dim };
        s.check()?;
        Ok(s)
    }

    pub fn permutations(m: usize) -> Result<Self, MetricError> {
        let s = MetricSpace::Permutations { m };
        s.check()?;
        Ok(s)
    }

    pub fn subsets<S: Into<String>>(
        ground: impl IntoIterator<Item = S>,
        size: Option<usize>,
    ) -> Result<Self, MetricError> {
        let s = MetricSpace::Subsets { ground: ground.into_iter().map(Into::into).collect(), size };
        s.check()?;
        Ok(s)
    }

    /// Subsets of `{e0, .., e(n-1)}`.
    pub fn hypercube(n: usize) -> Result<Self, MetricError> {
        Self::subsets((0..n).map(|i| format!("e{i}")), None)
    }

    pub fn strings(alphabet: &str, max_len: usize) -> Result<Self, MetricError> {
        let s = MetricSpace::Strings { alphabet: alphabet.chars().collect(), max_len };
        s.check()?;
        Ok(s)
    }

    /// A finite metric given by its distance matrix. Symmetry, zero
    /// diagonal, positivity off the diagonal and the triangle inequality are
    /// all checked.
    pub fn table<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        distances: Vec<Vec<f64>>,
    ) -> Result<Self, MetricError> {
        let s = MetricSpace::Table { labels: labels.into_iter().map(Into::into).collect(), distances };
        s.check()?;
        Ok(s)
    }

    /// A finite metric completed by shortest paths over the given edges.
    pub fn graph<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        edges: &[(usize, usize, f64)],
    ) -> Result<Self, MetricError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(MetricError::InvalidSpace(format!("edge ({a}, {b}) out of range")));
            }
            d[a][b] = d[a][b].min(w);
            d[b][a] = d[b][a].min(w);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        Self::table(labels, d)
    }

    fn check(&self) -> Result<(), MetricError> {
        let bad = |msg: String| Err(MetricError::InvalidSpace(msg));
        match self {
            MetricSpace::Plurality { candidates } => {
                if candidates.is_empty() {
                    return bad("plurality needs at least one candidate".into());
                }
            }
            MetricSpace::Scalar { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("scalar interval [{lo}, {hi}] is empty or unbounded"));
                }
            }
            MetricSpace::Simplex { m } => {
                if *m < 2 {
                    return bad("simplex needs m >= 2".into());
                }
            }
            MetricSpace::Euclidean { dim } => {
                if *dim < 1 {
                    return bad("euclidean space needs dim >= 1".into());
                }
            }
            MetricSpace::Permutations { m } => {
                if *m < 1 {
                    return bad("permutations need m >= 1".into());
                }
            }
            MetricSpace::Subsets { ground, size } => {
                if ground.is_empty() || ground.len() > MAX_GROUND_SET {
                    return bad(format!("ground set size must be in 1..={MAX_GROUND_SET}"));
                }
                if size.is_some_and(|k| k > ground.len()) {
                    return bad("fixed subset size exceeds the ground set".into());
                }
            }
            MetricSpace::Strings { alphabet, max_len } => {
                if alphabet.is_empty() {
                    return bad("empty alphabet".into());
                }
                if *max_len < 1 || *max_len > MAX_TEXT_LEN {
                    return bad(format!("max_len must be in 1..={MAX_TEXT_LEN}"));
                }
                let mut sorted = alphabet.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != alphabet.len() {
                    return bad("alphabet has repeated symbols".into());
                }
            }
            MetricSpace::Table { labels, distances } => check_table(labels, distances)?,
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricSpace::Plurality { .. } => "plurality",
            MetricSpace::Scalar { .. } => "scalar",
            MetricSpace::Simplex { .. } => "simplex",
            MetricSpace::Euclidean { .. } => "euclidean",
            MetricSpace::Permutations { .. } => "permutations",
            MetricSpace::Subsets { .. } => "subsets",
            MetricSpace::Strings { .. } => "strings",
            MetricSpace::Table { .. } => "table",
        }
    }

    /// Whether every distance is an integer, so score comparisons are exact.
    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            MetricSpace::Plurality { .. } | MetricSpace::Permutations { .. } | MetricSpace::Subsets { .. }
        )
    }

    /// Absolute tolerance below which utilities and score differences count
    /// as zero.
    pub fn score_tolerance(&self) -> f64 {
        if self.is_exact() {
            0.0
        } else {
            1e-12
        }
    }

    /// Default novelty distance for public proposals.
    pub fn default_novelty(&self) -> f64 {
        match self {
            MetricSpace::Scalar { lo, hi } => 1e-3 * (hi - lo),
            MetricSpace::Simplex { .. } | MetricSpace::Euclidean { .. } => 1e-3,
            MetricSpace::Strings { max_len, .. } => 1.0 / (*max_len as f64).powi(2),
            _ => 1.0,
        }
    }

    /// Whether the space has finitely many points.
    pub fn is_finite(&self) -> bool {
        !matches!(
            self,
            MetricSpace::Scalar { .. } | MetricSpace::Simplex { .. } | MetricSpace::Euclidean { .. }
        )
    }

    fn kind_matches(&self, p: &Point) -> bool {
        matches!(
            (self, p),
            (MetricSpace::Plurality { .. }, Point::Candidate(_))
                | (MetricSpace::Scalar { .. }, Point::Scalar(_))
                | (MetricSpace::Simplex { .. }, Point::Vector(_))
                | (MetricSpace::Euclidean { .. }, Point::Vector(_))
                | (MetricSpace::Permutations { .. }, Point::Ranking(_))
                | (MetricSpace::Subsets { .. }, Point::Subset(_))
                | (MetricSpace::Strings { .. }, Point::Text(_))
                | (MetricSpace::Table { .. }, Point::Node(_))
        )
    }

    fn mismatch(&self, p: &Point) -> MetricError {
        MetricError::PointSpaceMismatch { space: self.kind_name(), point: p.kind_name() }
    }

    /// Every violated invariant of `x`; empty when the point is valid.
    pub fn validate_point(&self, x: &Point) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.kind_matches(x) {
            out.push(Violation::KindMismatch {
                space: self.kind_name().into(),
                point: x.kind_name().into(),
            });
            return out;
        }
        match (self, x) {
            (MetricSpace::Plurality { candidates }, Point::Candidate(Some(i))) => {
                if *i >= candidates.len() {
                    out.push(Violation::UnknownCandidate { index: *i });
                }
            }
            (MetricSpace::Plurality { .. }, Point::Candidate(None)) => {}
            (MetricSpace::Scalar { lo, hi }, Point::Scalar(v)) => {
                if !v.is_finite() {
                    out.push(Violation::NonFinite { index: 0 });
                } else if v < lo || v > hi {
                    out.push(Violation::OutOfRange { value: *v, lo: *lo, hi: *hi });
                }
            }
            (MetricSpace::Simplex { m }, Point::Vector(v)) => {
                if v.len() != *m {
                    out.push(Violation::WrongDimension { expected: *m, found: v.len() });
                }
                for (index, &value) in v.iter().enumerate() {
                    if !value.is_finite() {
                        out.push(Violation::NonFinite { index });
                    } else if value < 0.0 {
                        out.push(Violation::NegativeEntry { index, value });
                    }
                }
                let sum: f64 = v.iter().sum();
                if sum.is_finite() && (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
                    out.push(Violation::SumNotOne { sum });
                }
            }
            (MetricSpace::Euclidean { dim }, Point::Vector(v)) => {
                if v.len() != *dim {
                    out.push(Violation::WrongDimension { expected: *dim, found: v.len() });
                }
                for (index, value) in v.iter().enumerate() {
                    if !value.is_finite() {
                        out.push(Violation::NonFinite { index });
                    }
                }
            }
            (MetricSpace::Permutations { m }, Point::Ranking(r)) => {
                if r.len() != *m {
                    out.push(Violation::WrongDimension { expected: *m, found: r.len() });
                }
                let mut seen = vec![false; *m];
                let bijective = r.len() == *m
                    && r.iter().all(|&i| i < *m && !std::mem::replace(&mut seen[i], true));
                if !bijective {
                    out.push(Violation::NotABijection);
                }
            }
            (MetricSpace::Subsets { ground, size }, Point::Subset(mask)) => {
                if ground.len() < 64 && mask >> ground.len() != 0 {
                    out.push(Violation::OutsideGroundSet);
                }
                if let Some(k) = size {
                    let found = mask.count_ones() as usize;
                    if found != *k {
                        out.push(Violation::WrongSubsetSize { expected: *k, found });
                    }
                }
            }
            (MetricSpace::Strings { alphabet, max_len }, Point::Text(t)) => {
                let len = t.chars().count();
                if len > *max_len {
                    out.push(Violation::TooLong { len, max: *max_len });
                }
                for symbol in t.chars() {
                    if !alphabet.contains(&symbol) {
                        out.push(Violation::UnknownSymbol { symbol });
                    }
                }
            }
            (MetricSpace::Table { labels, .. }, Point::Node(i)) => {
                if *i >= labels.len() {
                    out.push(Violation::UnknownNode { index: *i });
                }
            }
            _ => unreachable!("kind checked above"),
        }
        out
    }

    pub fn is_valid(&self, x: &Point) -> bool {
        self.validate_point(x).is_empty()
    }

    /// `Ok(())` for valid points, otherwise every violation.
    pub fn ensure_valid(&self, x: &Point) -> Result<(), MetricError> {
        let v = self.validate_point(x);
        if v.is_empty() {
            Ok(())
        } else {
            Err(MetricError::InvalidPoint(v))
        }
    }

    /// The distance between two points of this space.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64, MetricError> {
        match (self, x, y) {
            (MetricSpace::Plurality { .. }, Point::Candidate(a), Point::Candidate(b)) => {
                Ok(if a == b { 0.0 } else { 1.0 })
            }
            (MetricSpace::Scalar { .. }, Point::Scalar(a), Point::Scalar(b)) => Ok((a - b).abs()),
            (MetricSpace::Simplex { .. } | MetricSpace::Euclidean { .. }, Point::Vector(a), Point::Vector(b)) => {
                if a.len() != b.len() {
                    return Err(MetricError::InvalidPoint(vec![Violation::WrongDimension {
                        expected: a.len(),
                        found: b.len(),
                    }]));
                }
                Ok(euclidean(a, b))
            }
            (MetricSpace::Permutations { .. }, Point::Ranking(a), Point::Ranking(b)) => {
                Ok(perm::inversions_between(a, b) as f64)
            }
            (MetricSpace::Subsets { .. }, Point::Subset(a), Point::Subset(b)) => Ok((a ^ b).count_ones() as f64),
            (MetricSpace::Strings { max_len, .. }, Point::Text(a), Point::Text(b)) => {
                let a: Vec<char> = a.chars().collect();
                let b: Vec<char> = b.chars().collect();
                Ok(strings::weighted_edit_distance(&a, &b, swap_cost(*max_len)))
            }
            (MetricSpace::Table { distances, .. }, Point::Node(a), Point::Node(b)) => distances
                .get(*a)
                .and_then(|row| row.get(*b))
                .copied()
                .ok_or(MetricError::InvalidPoint(vec![Violation::UnknownNode { index: (*a).max(*b) }])),
            _ => Err(if self.kind_matches(x) { self.mismatch(y) } else { self.mismatch(x) }),
        }
    }

    /// Total order used for tie-breaking and enumeration: candidates by
    /// declaration order (vacancy first), subsets by bitmask, rankings and
    /// vectors lexicographically, texts by length then alphabet order,
    /// table points by index.
    pub fn canonical_cmp(&self, a: &Point, b: &Point) -> Ordering {
        match (a, b) {
            (Point::Candidate(x), Point::Candidate(y)) => x.cmp(y),
            (Point::Scalar(x), Point::Scalar(y)) => x.total_cmp(y),
            (Point::Vector(x), Point::Vector(y)) => x
                .iter()
                .zip(y)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| x.len().cmp(&y.len())),
            (Point::Ranking(x), Point::Ranking(y)) => x.cmp(y),
            (Point::Subset(x), Point::Subset(y)) => x.cmp(y),
            (Point::Text(x), Point::Text(y)) => {
                let key = |t: &str| -> (usize, Vec<usize>) {
                    let order = match self {
                        MetricSpace::Strings { alphabet, .. } => t
                            .chars()
                            .map(|c| alphabet.iter().position(|&s| s == c).unwrap_or(usize::MAX))
                            .collect(),
                        _ => t.chars().map(|c| c as usize).collect(),
                    };
                    (t.chars().count(), order)
                };
                key(x).cmp(&key(y))
            }
            (Point::Node(x), Point::Node(y)) => x.cmp(y),
            _ => a.kind_name().cmp(b.kind_name()),
        }
    }

    /// Rescales a simplex vector to sum to one. Never applied implicitly.
    pub fn renormalize(&self, x: &Point) -> Result<Point, MetricError> {
        match (self, x) {
            (MetricSpace::Simplex { .. }, Point::Vector(v)) => {
                let sum: f64 = v.iter().sum();
                if !(sum > 0.0) || v.iter().any(|c| *c < 0.0) {
                    return Err(MetricError::InvalidPoint(vec![Violation::SumNotOne { sum }]));
                }
                Ok(Point::Vector(v.iter().map(|c| c / sum).collect()))
            }
            _ => Err(self.mismatch(x)),
        }
    }
}

/// Swap weight of the string space, `1 / max_len^2`.
pub fn swap_cost(max_len: usize) -> f64 {
    1.0 / (max_len as f64 * max_len as f64)
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_table(labels: &[String], d: &[Vec<f64>]) -> Result<(), MetricError> {
    let n = labels.len();
    let bad = |msg: String| Err(MetricError::InvalidSpace(msg));
    if n == 0 {
        return bad("table needs at least one point".into());
    }
    if d.len() != n || d.iter().any(|row| row.len() != n) {
        return bad(format!("distance matrix must be {n}x{n}"));
    }
    let tol = 1e-9;
    for i in 0..n {
        if d[i][i] != 0.0 {
            return bad(format!("d({0}, {0}) = {1} is not zero", labels[i], d[i][i]));
        }
        for j in 0..n {
            if !d[i][j].is_finite() || d[i][j] < 0.0 {
                return bad(format!("d({}, {}) is not a finite non-negative number", labels[i], labels[j]));
            }
            if i != j && d[i][j] == 0.0 {
                return bad(format!("distinct points {} and {} at distance zero", labels[i], labels[j]));
            }
            if (d[i][j] - d[j][i]).abs() > tol {
                return bad(format!("d({}, {}) is not symmetric", labels[i], labels[j]));
            }
            for k in 0..n {
                if d[i][k] > d[i][j] + d[j][k] + tol {
                    return bad(format!(
                        "triangle inequality fails: d({}, {}) > d({}, {}) + d({}, {})",
                        labels[i], labels[k], labels[i], labels[j], labels[j], labels[k]
                    ));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_distance() {
        let s = MetricSpace::plurality(["Alice", "Bob"]).unwrap();
        let alice = Point::Candidate(Some(0));
        let bob = Point::Candidate(Some(1));
        assert_eq!(s.distance(&alice, &bob).unwrap(), 1.0);
        assert_eq!(s.distance(&alice, &alice).unwrap(), 0.0);
        assert_eq!(s.distance(&alice, &Point::Candidate(None)).unwrap(), 1.0);
    }

    #[test]
    fn one_swap_between_rankings() {
        // g > w > q versus w > g > q
        let s = MetricSpace::permutations(3).unwrap();
        let d = s.distance(&Point::Ranking(vec![0, 1, 2]), &Point::Ranking(vec![1, 0, 2])).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn symmetric_difference() {
        let s = MetricSpace::subsets(["a", "b", "c", "d"], None).unwrap();
        // {a,b,c} vs {a,c,d}
        let d = s.distance(&Point::Subset(0b0111), &Point::Subset(0b1101)).unwrap();
        assert_eq!(d, 2.0);
    }

    #[test]
    fn weighted_levenshtein() {
        let s = MetricSpace::strings("abc", 4).unwrap();
        let t = |x: &str| Point::Text(x.into());
        assert_eq!(s.distance(&t("ab"), &t("ba")).unwrap(), 1.0 / 16.0);
        assert_eq!(s.distance(&t("ab"), &t("abc")).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_kinds_are_rejected() {
        let s = MetricSpace::simplex(3).unwrap();
        let err = s.distance(&Point::Scalar(1.0), &Point::Vector(vec![1.0, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, MetricError::PointSpaceMismatch { .. }));
    }

    #[test]
    fn simplex_validation() {
        let s = MetricSpace::simplex(3).unwrap();
        assert!(s.validate_point(&Point::Vector(vec![0.5, 0.5, 0.0])).is_empty());
        let v = s.validate_point(&Point::Vector(vec![0.6, 0.6, -0.2]));
        assert_eq!(v, vec![Violation::NegativeEntry { index: 2, value: -0.2 }]);
        let v = s.validate_point(&Point::Vector(vec![0.5, 0.6, 0.0]));
        assert!(matches!(v[0], Violation::SumNotOne { .. }));
    }

    #[test]
    fn ranking_validation() {
        let s = MetricSpace::permutations(3).unwrap();
        assert_eq!(s.validate_point(&Point::Ranking(vec![0, 0, 2])), vec![Violation::NotABijection]);
        assert!(s.validate_point(&Point::Ranking(vec![2, 0, 1])).is_empty());
    }

    #[test]
    fn plurality_validation() {
        let s = MetricSpace::plurality(["a", "b"]).unwrap();
        assert!(s.is_valid(&Point::Candidate(None)));
        assert_eq!(
            s.validate_point(&Point::Candidate(Some(2))),
            vec![Violation::UnknownCandidate { index: 2 }]
        );
    }

    #[test]
    fn table_rejects_triangle_violations() {
        let err = MetricSpace::table(
            ["x", "y", "z"],
            vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]],
        )
        .unwrap_err();
        assert!(matches!(err, MetricError::InvalidSpace(_)));
    }

    #[test]
    fn invalid_spaces() {
        assert!(MetricSpace::simplex(1).is_err());
        assert!(MetricSpace::permutations(0).is_err());
        assert!(MetricSpace::subsets(Vec::<String>::new(), None).is_err());
        assert!(MetricSpace::scalar(1.0, 1.0).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let s = MetricSpace::strings("abc", 5).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"kind":"strings","alphabet":"abc","max_len":5}"#);
        let back: MetricSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::from_str::<MetricSpace>(r#"{"kind":"simplex","m":1}"#);
        assert!(bad.is_err());
        let g: MetricSpace =
            serde_json::from_str(r#"{"kind":"graph","labels":["a","b","c"],"edges":[["a","b",1.0],["b","c",2.0]]}"#)
                .unwrap();
        assert_eq!(g.distance(&Point::Node(0), &Point::Node(2)).unwrap(), 3.0);
        assert!(serde_json::to_string(&g).unwrap().contains(r#""kind":"table""#));
        let dangling = r#"{"kind":"graph","labels":["a"],"edges":[["a","z",1.0]]}"#;
        assert!(serde_json::from_str::<MetricSpace>(dangling).is_err());
    }
}
