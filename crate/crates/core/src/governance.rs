//! Utilities, aggregators, the support gate and the per-round rule.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{MetricError, MetricSpace, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GovernanceError {
    #[error("cannot aggregate an empty utility vector")]
    EmptyVector,
    #[error("the vote profile is empty")]
    EmptyProfile,
    #[error("no proposals to score")]
    NoProposals,
    #[error("threshold {0} is outside [1/2, 1)")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A supermajority threshold in `[1/2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Threshold(f64);

impl Threshold {
    pub const HALF: Threshold = Threshold(0.5);

    pub fn new(sigma: f64) -> Result<Self, GovernanceError> {
        if (0.5..1.0).contains(&sigma) {
            Ok(Threshold(sigma))
        } else {
            Err(GovernanceError::InvalidThreshold(sigma))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `ceil(sigma * n)`, clamped to `1..=n`. A tiny downward nudge keeps
    /// products like `0.6 * 5` from rounding up past the integer.
    pub fn required(self, n: usize) -> usize {
        let k = (self.0 * n as f64 - 1e-9).ceil();
        (k.max(1.0) as usize).min(n.max(1))
    }
}

impl TryFrom<f64> for Threshold {
    type Error = GovernanceError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Threshold::new(v)
    }
}

impl From<Threshold> for f64 {
    fn from(t: Threshold) -> f64 {
        t.0
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How a utility vector is collapsed into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    /// The `ceil(sigma n)`-th largest entry.
    #[serde(alias = "median")]
    GeneralisedMedian,
    Mean,
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::GeneralisedMedian => "generalised_median",
            Aggregator::Mean => "mean",
        })
    }
}

/// The `k`-th largest entry (1-based), in linear time.
pub fn kth_largest(u: &[f64], k: usize) -> Result<f64, GovernanceError> {
    if u.is_empty() {
        return Err(GovernanceError::EmptyVector);
    }
    let k = k.clamp(1, u.len());
    let mut buf = u.to_vec();
    let (_, kth, _) = buf.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    Ok(*kth)
}

/// The aggregate score of one utility vector.
pub fn aggregate_score(agg: Aggregator, sigma: Threshold, u: &[f64]) -> Result<f64, GovernanceError> {
    match agg {
        Aggregator::GeneralisedMedian => kth_largest(u, sigma.required(u.len())),
        Aggregator::Mean => {
            if u.is_empty() {
                return Err(GovernanceError::EmptyVector);
            }
            Ok(u.iter().sum::<f64>() / u.len() as f64)
        }
    }
}

/// Aggregator plus threshold: everything needed to score a proposal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub aggregator: Aggregator,
    pub sigma: Threshold,
}

impl Rule {
    pub fn median(sigma: f64) -> Result<Self, GovernanceError> {
        Ok(Rule { aggregator: Aggregator::GeneralisedMedian, sigma: Threshold::new(sigma)? })
    }

    pub fn mean(sigma: f64) -> Result<Self, GovernanceError> {
        Ok(Rule { aggregator: Aggregator::Mean, sigma: Threshold::new(sigma)? })
    }

    pub fn score(&self, u: &[f64]) -> Result<f64, GovernanceError> {
        aggregate_score(self.aggregator, self.sigma, u)
    }
}

/// `u(q, p) = d(q, s) - d(q, p)`.
pub fn utility(space: &MetricSpace, s: &Point, q: &Point, p: &Point) -> Result<f64, GovernanceError> {
    Ok(space.distance(q, s)? - space.distance(q, p)?)
}

/// Votes and status quo with cached distances to the status quo; the shared
/// context of every scoring call in one round.
#[derive(Debug, Clone)]
pub struct Electorate<'a> {
    space: &'a MetricSpace,
    status_quo: &'a Point,
    votes: &'a [Point],
    to_status_quo: Vec<f64>,
    tolerance: f64,
}

impl<'a> Electorate<'a> {
    pub fn new(space: &'a MetricSpace, status_quo: &'a Point, votes: &'a [Point]) -> Result<Self, GovernanceError> {
        if votes.is_empty() {
            return Err(GovernanceError::EmptyProfile);
        }
        let to_status_quo = votes.iter().map(|v| space.distance(v, status_quo)).collect::<Result<Vec<_>, _>>()?;
        let scale = to_status_quo.iter().fold(1.0f64, |m, d| m.max(*d));
        let tolerance = space.score_tolerance() * scale;
        Ok(Electorate { space, status_quo, votes, to_status_quo, tolerance })
    }

    pub fn space(&self) -> &MetricSpace {
        self.space
    }

    pub fn status_quo(&self) -> &Point {
        self.status_quo
    }

    pub fn votes(&self) -> &[Point] {
        self.votes
    }

    pub fn n(&self) -> usize {
        self.votes.len()
    }

    /// Values within this distance of zero count as zero.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn is_positive(&self, x: f64) -> bool {
        x > self.tolerance
    }

    pub fn utilities(&self, p: &Point) -> Result<Vec<f64>, GovernanceError> {
        self.votes
            .iter()
            .zip(&self.to_status_quo)
            .map(|(v, ds)| Ok(ds - self.space.distance(v, p)?))
            .collect()
    }

    /// Members with strictly positive utility for `p`, 0-based.
    pub fn support_set(&self, p: &Point) -> Result<Vec<usize>, GovernanceError> {
        Ok(self.support_of(&self.utilities(p)?))
    }

    fn support_of(&self, u: &[f64]) -> Vec<usize> {
        u.iter().enumerate().filter(|(_, x)| self.is_positive(**x)).map(|(i, _)| i).collect()
    }

    pub fn is_supported(&self, p: &Point, sigma: Threshold) -> Result<bool, GovernanceError> {
        Ok(self.support_set(p)?.len() >= sigma.required(self.n()))
    }

    pub fn score(&self, p: &Point, rule: &Rule) -> Result<ScoredProposal, GovernanceError> {
        let utilities = self.utilities(p)?;
        let score = rule.score(&utilities)?;
        let support = self.support_of(&utilities);
        let supported = support.len() >= rule.sigma.required(self.n());
        Ok(ScoredProposal { point: p.clone(), utilities, score, support, supported })
    }

    /// Definition of the per-round rule: the supported proposal of positive
    /// maximal score, ties to the canonically smallest; otherwise none.
    pub fn round_winner(&self, proposals: &[Point], rule: &Rule) -> Result<RoundResult, GovernanceError> {
        if proposals.is_empty() {
            return Err(GovernanceError::NoProposals);
        }
        let scores = proposals.iter().map(|p| self.score(p, rule)).collect::<Result<Vec<_>, _>>()?;
        let mut best: Option<usize> = None;
        for (i, sp) in scores.iter().enumerate() {
            if !sp.supported || !self.is_positive(sp.score) {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) => {
                    let diff = sp.score - scores[b].score;
                    let better = diff > self.tolerance
                        || (diff.abs() <= self.tolerance
                            && self.space.canonical_cmp(&sp.point, &scores[b].point) == Ordering::Less);
                    Some(if better { i } else { b })
                }
            };
        }
        Ok(RoundResult {
            winner: best.map(|b| scores[b].point.clone()),
            winning_score: best.map(|b| scores[b].score),
            scores,
        })
    }

    /// If at least `ceil(sigma n)` votes coincide at some `w != s`, returns
    /// `w`. Only meaningful for `sigma > 1/2` or odd `n`; returns `None`
    /// otherwise.
    pub fn majoritarity_check(&self, sigma: Threshold) -> Option<Point> {
        let n = self.n();
        if sigma.value() <= 0.5 && n % 2 == 0 {
            return None;
        }
        let k = sigma.required(n);
        self.votes
            .iter()
            .zip(&self.to_status_quo)
            .filter(|(_, ds)| **ds > 0.0)
            .find(|(w, _)| self.votes.iter().filter(|v| v == w).count() >= k)
            .map(|(w, _)| w.clone())
    }
}

/// One proposal's audit record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredProposal {
    pub point: Point,
    pub utilities: Vec<f64>,
    pub score: f64,
    /// 0-based member indices with strictly positive utility.
    pub support: Vec<usize>,
    pub supported: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub winner: Option<Point>,
    pub winning_score: Option<f64>,
    pub scores: Vec<ScoredProposal>,
}

/// Convenience wrapper over [`Electorate::round_winner`].
pub fn round_winner(
    space: &MetricSpace,
    s: &Point,
    votes: &[Point],
    proposals: &[Point],
    rule: &Rule,
) -> Result<RoundResult, GovernanceError> {
    Electorate::new(space, s, votes)?.round_winner(proposals, rule)
}

/// The vote whose utility equals the `ceil(sigma n)`-th largest for a 1D
/// proposal `p`: the `(n-k+1)`-th smallest when `p > s`, the `k`-th
/// smallest when `p < s`. `None` when `p == s`.
pub fn positional_voter(votes: &[f64], s: f64, p: f64, sigma: Threshold) -> Option<f64> {
    if votes.is_empty() || p == s {
        return None;
    }
    let mut sorted = votes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = sigma.required(n);
    Some(if p > s { sorted[n - k] } else { sorted[k - 1] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate_space() -> MetricSpace {
        MetricSpace::scalar(0.0, 100.0).unwrap()
    }

    fn scalars(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::Scalar(x)).collect()
    }

    #[test]
    fn required_counts() {
        assert_eq!(Threshold::HALF.required(5), 3);
        assert_eq!(Threshold::HALF.required(4), 2);
        assert_eq!(Threshold::new(2.0 / 3.0).unwrap().required(5), 4);
        assert_eq!(Threshold::new(0.6).unwrap().required(5), 3);
        assert!(Threshold::new(1.0).is_err());
        assert!(Threshold::new(0.49).is_err());
    }

    #[test]
    fn aggregates() {
        let half = Threshold::HALF;
        let med = Aggregator::GeneralisedMedian;
        assert_eq!(aggregate_score(med, half, &[2.0, 2.0, 2.0, -2.0, -2.0]).unwrap(), 2.0);
        assert_eq!(aggregate_score(med, half, &[0.0; 4]).unwrap(), 0.0);
        let u = [-3.0, -2.0, -1.0, 0.01, 0.02, 5.0, 10.0];
        assert_eq!(aggregate_score(med, half, &u).unwrap(), 0.01);
        let mean = aggregate_score(Aggregator::Mean, half, &[10.0, 0.0, -6.0, -10.0, -10.0]).unwrap();
        assert!((mean + 3.2).abs() < 1e-12);
        assert_eq!(aggregate_score(med, half, &[]), Err(GovernanceError::EmptyVector));
    }

    #[test]
    fn utilities() {
        let sp = rate_space();
        let s = Point::Scalar(20.0);
        assert_eq!(utility(&sp, &s, &Point::Scalar(10.0), &Point::Scalar(18.0)).unwrap(), 2.0);
        assert_eq!(utility(&sp, &s, &Point::Scalar(10.0), &s).unwrap(), 0.0);
        assert_eq!(utility(&sp, &s, &Point::Scalar(10.0), &Point::Scalar(10.0)).unwrap(), 10.0);
    }

    #[test]
    fn rate_example() {
        let sp = rate_space();
        let s = Point::Scalar(20.0);
        let votes = scalars(&[10.0, 15.0, 18.0, 22.0, 25.0]);
        let rule = Rule::median(0.5).unwrap();
        let el = Electorate::new(&sp, &s, &votes).unwrap();
        let r = el.round_winner(&votes, &rule).unwrap();
        assert_eq!(r.winner, Some(Point::Scalar(18.0)));
        assert_eq!(r.winning_score, Some(2.0));
        let table: Vec<f64> = r.scores.iter().map(|x| x.score).collect();
        assert_eq!(table, vec![-6.0, -1.0, 2.0, -2.0, -5.0]);
        assert_eq!(el.support_set(&Point::Scalar(18.0)).unwrap(), vec![0, 1, 2]);
        assert!(el.support_set(&s).unwrap().is_empty());
    }

    #[test]
    fn gate_sizes() {
        // five voters, three at w: supported at 1/2, not at 2/3
        let sp = MetricSpace::plurality(["w", "x"]).unwrap();
        let s = Point::Candidate(None);
        let w = Point::Candidate(Some(0));
        let x = Point::Candidate(Some(1));
        let votes = vec![w.clone(), w.clone(), w.clone(), x.clone(), x.clone()];
        let el = Electorate::new(&sp, &s, &votes).unwrap();
        assert!(el.is_supported(&w, Threshold::HALF).unwrap());
        assert!(!el.is_supported(&w, Threshold::new(2.0 / 3.0).unwrap()).unwrap());
        let even = vec![w.clone(), w.clone(), x.clone(), x];
        let el = Electorate::new(&sp, &s, &even).unwrap();
        assert!(el.is_supported(&w, Threshold::HALF).unwrap());
    }

    #[test]
    fn plurality_examples() {
        let sp = MetricSpace::plurality(["Alice", "Bob", "Carol"]).unwrap();
        let s = Point::Candidate(None);
        let [a, b, c] = [0, 1, 2].map(|i| Point::Candidate(Some(i)));
        let rule = Rule::median(0.5).unwrap();
        let split = vec![b.clone(), b.clone(), a.clone(), a.clone(), c.clone()];
        assert_eq!(round_winner(&sp, &s, &split, &split, &rule).unwrap().winner, None);
        let three = vec![b.clone(), b.clone(), b.clone(), a, c];
        let el = Electorate::new(&sp, &s, &three).unwrap();
        assert_eq!(el.round_winner(&three, &rule).unwrap().winner, Some(b.clone()));
        assert_eq!(el.majoritarity_check(Threshold::HALF), Some(b));
    }

    #[test]
    fn ties_go_to_the_canonically_smallest() {
        let sp = MetricSpace::plurality(["a", "b", "c"]).unwrap();
        let s = Point::Candidate(None);
        let votes: Vec<Point> = [1, 1, 2, 2].map(|i| Point::Candidate(Some(i))).to_vec();
        let r = round_winner(&sp, &s, &votes, &[votes[2].clone(), votes[0].clone()], &Rule::median(0.5).unwrap())
            .unwrap();
        assert_eq!(r.winner, Some(Point::Candidate(Some(1))));
    }

    #[test]
    fn positional_voters() {
        let v = [10.0, 15.0, 18.0, 22.0, 25.0];
        let half = Threshold::HALF;
        assert_eq!(positional_voter(&v, 20.0, 18.0, half), Some(18.0));
        let two_thirds = Threshold::new(2.0 / 3.0).unwrap();
        // k = 4: above s the 2nd smallest, below s the 4th smallest
        assert_eq!(positional_voter(&v, 20.0, 30.0, two_thirds), Some(15.0));
        assert_eq!(positional_voter(&v, 20.0, 5.0, two_thirds), Some(22.0));
        assert_eq!(positional_voter(&v, 20.0, 20.0, half), None);
    }
}
