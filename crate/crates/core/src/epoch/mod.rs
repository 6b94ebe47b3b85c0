//! The epoch: a sealed voting round, then public-proposal rounds until the
//! result repeats for two consecutive rounds.
//!
//! Round 1 scores the revealed votes alone. From round 2 on, proposal
//! sources are polled in order and every action they emit is checked and
//! applied at once, before the round is scored.

mod commit;
mod source;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::governance::{Electorate, GovernanceError, RoundResult, Rule};
use crate::metric::{MetricError, MetricSpace, Point, Violation};

pub use commit::{Ballot, Commitment, SealedEpoch};
pub use source::{
    Action, GeometricMedianSource, HeuristicSource, ProposalSource, RandomSource, ScriptedSource,
};
pub use trace::{read_trace, verify_trace, write_trace, ProposalRecord, TraceError, TraceEvent, TraceSummary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpochError {
    #[error("invalid epoch configuration: {0}")]
    Config(String),
    #[error("vote of member {member} is invalid: {source}")]
    InvalidVote { member: usize, source: MetricError },
    #[error("expected {expected} ballots, got {got}")]
    BallotCount { expected: usize, got: usize },
    #[error("opening of member {member} does not match its commitment")]
    CommitmentMismatch { member: usize },
    #[error("no member {0}")]
    UnknownMember(usize),
    #[error("member {0} has no public proposal")]
    EmptySlot(usize),
    #[error("public proposals are not accepted before the voting round is scored")]
    VotingRoundPending,
    #[error("member {member}: {violation}")]
    Inadmissible { member: usize, violation: Inadmissible },
    #[error("no quiescence within {0} rounds")]
    MaxRoundsExceeded(usize),
    #[error("proposal source {name}: {detail}")]
    Source { name: String, detail: String },
    #[error(transparent)]
    Governance(#[from] GovernanceError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Where a novelty conflict was found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoveltyConflict {
    Vote { member: usize },
    Ledger { entry: usize },
}

/// The first admissibility condition a public proposal fails.
#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Inadmissible {
    #[error("not a valid point: {violations:?}")]
    InvalidPoint { violations: Vec<Violation> },
    #[error("member already holds a public proposal")]
    SlotTaken,
    #[error("proposer utility {utility} is not positive")]
    NotPreferred { utility: f64 },
    #[error("supported by {support} members, {required} required")]
    Unsupported { support: usize, required: usize },
    #[error("within {distance} of an earlier point ({conflict:?}), novelty distance {epsilon}")]
    NotNovel { distance: f64, epsilon: f64, conflict: NoveltyConflict },
    #[error("score {score} does not improve on {baseline}")]
    NoImprovement { score: f64, baseline: f64 },
}

/// Why an epoch stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The same proposal won two consecutive rounds.
    SameWinner,
    /// No proposal won in two consecutive rounds; the status quo stands.
    Unsupported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochConfig {
    pub space: MetricSpace,
    pub status_quo: Point,
    pub rule: Rule,
    /// Novelty distance.
    pub epsilon: f64,
    /// Round limit; `None` means `10 n + 10`.
    pub max_rounds: Option<usize>,
}

impl EpochConfig {
    /// A configuration with the space's default novelty distance.
    pub fn new(space: MetricSpace, status_quo: Point, rule: Rule) -> Result<Self, EpochError> {
        let epsilon = space.default_novelty();
        let config = EpochConfig { space, status_quo, rule, epsilon, max_rounds: None };
        config.validate()?;
        Ok(config)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self, EpochError> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_rounds(mut self, max_rounds: usize) -> Result<Self, EpochError> {
        self.max_rounds = Some(max_rounds);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), EpochError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(EpochError::Config(format!("novelty distance must be positive, got {}", self.epsilon)));
        }
        if self.max_rounds == Some(0) {
            return Err(EpochError::Config("max_rounds must be positive".into()));
        }
        self.space
            .ensure_valid(&self.status_quo)
            .map_err(|e| EpochError::Config(format!("status quo: {e}")))
    }

    pub fn round_limit(&self, n: usize) -> usize {
        self.max_rounds.unwrap_or(10 * n + 10)
    }
}

/// Result of one scored round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundStatus {
    pub round: usize,
    pub winner: Option<Point>,
    pub winning_score: Option<f64>,
    pub quiescent: bool,
}

/// State of one epoch after the votes are revealed.
#[derive(Debug, Clone)]
pub struct EpochState {
    config: EpochConfig,
    votes: Vec<Point>,
    public: Vec<Option<Point>>,
    ledger: Vec<Point>,
    history: Vec<RoundResult>,
    stable_rounds: usize,
    trace: Vec<TraceEvent>,
}

impl EpochState {
    /// Commits to every vote and reveals them in one step. Nonces are the
    /// member indices.
    pub fn seal_and_reveal(config: EpochConfig, votes: Vec<Point>) -> Result<Self, EpochError> {
        let ballots: Vec<Ballot> =
            votes.into_iter().enumerate().map(|(i, vote)| Ballot { vote, nonce: i as u64 }).collect();
        let mut commitments = Vec::with_capacity(ballots.len());
        for (member, b) in ballots.iter().enumerate() {
            commitments.push(
                b.commit(&config.space).map_err(|source| EpochError::InvalidVote { member, source })?,
            );
        }
        SealedEpoch::seal(config, commitments)?.reveal(ballots)
    }

    pub(crate) fn revealed(config: EpochConfig, votes: Vec<Point>, trace: Vec<TraceEvent>) -> Self {
        let n = votes.len();
        EpochState {
            config,
            votes,
            public: vec![None; n],
            ledger: Vec::new(),
            history: Vec::new(),
            stable_rounds: 0,
            trace,
        }
    }

    pub fn config(&self) -> &EpochConfig {
        &self.config
    }

    pub fn votes(&self) -> &[Point] {
        &self.votes
    }

    pub fn n(&self) -> usize {
        self.votes.len()
    }

    /// Current public proposal of each member.
    pub fn public(&self) -> &[Option<Point>] {
        &self.public
    }

    /// Every public proposal submitted this epoch, in order.
    pub fn ledger(&self) -> &[Point] {
        &self.ledger
    }

    pub fn history(&self) -> &[RoundResult] {
        &self.history
    }

    /// Number of scored rounds.
    pub fn round(&self) -> usize {
        self.history.len()
    }

    /// Consecutive rounds, up to the latest, with the same result.
    pub fn stable_rounds(&self) -> usize {
        self.stable_rounds
    }

    pub fn is_quiescent(&self) -> bool {
        self.stable_rounds >= 2
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn electorate(&self) -> Electorate<'_> {
        Electorate::new(&self.config.space, &self.config.status_quo, &self.votes).expect("votes checked at reveal")
    }

    /// The votes followed by the current public proposals, without repeats.
    pub fn proposals(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::with_capacity(2 * self.n());
        for p in self.votes.iter().chain(self.public.iter().flatten()) {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
        out
    }

    pub fn last_result(&self) -> Option<&RoundResult> {
        self.history.last()
    }

    /// Winner of the latest round, or the status quo.
    pub fn outcome(&self) -> Point {
        self.last_result()
            .and_then(|r| r.winner.clone())
            .unwrap_or_else(|| self.config.status_quo.clone())
    }

    fn member(&self, member: usize) -> Result<(), EpochError> {
        if member < self.n() {
            Ok(())
        } else {
            Err(EpochError::UnknownMember(member))
        }
    }

    /// Checks a new public proposal by `member` against the five conditions
    /// in order: slot, proposer preference, support, novelty, improvement.
    pub fn check_admissibility(&self, member: usize, c: &Point) -> Result<(), EpochError> {
        self.member(member)?;
        self.check(member, c, false)
            .map_err(|violation| EpochError::Inadmissible { member, violation })
    }

    fn check(&self, member: usize, c: &Point, replacing: bool) -> Result<(), Inadmissible> {
        let space = &self.config.space;
        let violations = space.validate_point(c);
        if !violations.is_empty() {
            return Err(Inadmissible::InvalidPoint { violations });
        }
        if !replacing && self.public[member].is_some() {
            return Err(Inadmissible::SlotTaken);
        }
        let el = self.electorate();
        let scored = el.score(c, &self.config.rule).expect("valid point");
        let utility = scored.utilities[member];
        if !el.is_positive(utility) {
            return Err(Inadmissible::NotPreferred { utility });
        }
        let required = self.config.rule.sigma.required(self.n());
        if scored.support.len() < required {
            return Err(Inadmissible::Unsupported { support: scored.support.len(), required });
        }
        let epsilon = self.config.epsilon;
        let near = self
            .votes
            .iter()
            .enumerate()
            .map(|(i, v)| (NoveltyConflict::Vote { member: i }, v))
            .chain(self.ledger.iter().enumerate().map(|(i, l)| (NoveltyConflict::Ledger { entry: i }, l)));
        for (conflict, x) in near {
            let distance = space.distance(c, x).expect("valid points");
            if distance < epsilon {
                return Err(Inadmissible::NotNovel { distance, epsilon, conflict });
            }
        }
        let baseline = self.last_result().and_then(|r| r.winning_score).unwrap_or(0.0);
        if scored.score - baseline <= el.tolerance() {
            return Err(Inadmissible::NoImprovement { score: scored.score, baseline });
        }
        Ok(())
    }

    fn next_round(&self) -> Result<usize, EpochError> {
        if self.history.is_empty() {
            Err(EpochError::VotingRoundPending)
        } else {
            Ok(self.round() + 1)
        }
    }

    fn admit(&mut self, member: usize, c: Point, replacing: bool, source: &str) -> Result<(), EpochError> {
        let round = self.next_round()?;
        self.member(member)?;
        if replacing && self.public[member].is_none() {
            return Err(EpochError::EmptySlot(member));
        }
        if let Err(violation) = self.check(member, &c, replacing) {
            self.trace.push(TraceEvent::Reject {
                round,
                member,
                point: self.config.space.encode(&c).ok(),
                update: replacing,
                source: source.to_string(),
                violation: violation.clone(),
            });
            return Err(EpochError::Inadmissible { member, violation });
        }
        let point = self.config.space.encode(&c)?;
        let source = source.to_string();
        self.trace.push(if replacing {
            TraceEvent::Update { round, member, point, source }
        } else {
            TraceEvent::Submit { round, member, point, source }
        });
        self.ledger.push(c.clone());
        self.public[member] = Some(c);
        Ok(())
    }

    /// Submits a first public proposal for `member`.
    pub fn submit(&mut self, member: usize, c: Point, source: &str) -> Result<(), EpochError> {
        self.admit(member, c, false, source)
    }

    /// Replaces `member`'s public proposal; the old one stays in the ledger.
    pub fn update(&mut self, member: usize, c: Point, source: &str) -> Result<(), EpochError> {
        self.admit(member, c, true, source)
    }

    pub fn withdraw(&mut self, member: usize, source: &str) -> Result<(), EpochError> {
        let round = self.next_round()?;
        self.member(member)?;
        if self.public[member].take().is_none() {
            return Err(EpochError::EmptySlot(member));
        }
        self.trace.push(TraceEvent::Withdraw { round, member, source: source.to_string() });
        Ok(())
    }

    pub(crate) fn push_event(&mut self, e: TraceEvent) {
        self.trace.push(e);
    }

    pub fn apply(&mut self, action: Action, source: &str) -> Result<(), EpochError> {
        match action {
            Action::Submit { member, point } => self.submit(member, point, source),
            Action::Update { member, point } => self.update(member, point, source),
            Action::Withdraw { member } => self.withdraw(member, source),
        }
    }

    /// Scores the current proposals and updates the quiescence count.
    pub fn step_round(&mut self) -> Result<RoundStatus, EpochError> {
        let proposals = self.proposals();
        let result = self.electorate().round_winner(&proposals, &self.config.rule)?;
        let same = self.last_result().is_some_and(|prev| prev.winner == result.winner);
        self.stable_rounds = if same { self.stable_rounds + 1 } else { 1 };
        let round = self.round() + 1;
        self.trace.push(trace::round_event(&self.config.space, round, &result, self.stable_rounds)?);
        let status = RoundStatus {
            round,
            winner: result.winner.clone(),
            winning_score: result.winning_score,
            quiescent: self.stable_rounds >= 2,
        };
        self.history.push(result);
        Ok(status)
    }

    /// Closes a quiescent epoch.
    pub fn finish(mut self) -> Result<EpochOutcome, EpochError> {
        let termination = match self.last_result() {
            Some(r) if r.winner.is_some() => Termination::SameWinner,
            _ => Termination::Unsupported,
        };
        let outcome = self.outcome();
        self.trace.push(TraceEvent::Outcome {
            outcome: self.config.space.encode(&outcome)?,
            rounds: self.round(),
            termination,
        });
        Ok(EpochOutcome {
            outcome,
            winning_score: self.last_result().and_then(|r| r.winning_score),
            rounds: self.round(),
            termination,
            history: self.history,
            ledger: self.ledger,
            trace: self.trace,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochOutcome {
    /// The new status quo.
    pub outcome: Point,
    pub winning_score: Option<f64>,
    pub rounds: usize,
    pub termination: Termination,
    pub history: Vec<RoundResult>,
    pub ledger: Vec<Point>,
    pub trace: Vec<TraceEvent>,
}

/// Runs a full epoch. Inadmissible proposals are logged and skipped; any
/// other error from a source aborts the epoch.
pub fn run_epoch(
    config: EpochConfig,
    votes: Vec<Point>,
    sources: &mut [Box<dyn ProposalSource>],
) -> Result<EpochOutcome, EpochError> {
    let mut state = EpochState::seal_and_reveal(config, votes)?;
    let limit = state.config.round_limit(state.n());
    state.step_round()?;
    while !state.is_quiescent() {
        if state.round() >= limit {
            return Err(EpochError::MaxRoundsExceeded(limit));
        }
        for source in sources.iter_mut() {
            let actions = source.propose(&state)?;
            let name = source.name().to_string();
            for action in actions {
                match state.apply(action, &name) {
                    Ok(()) | Err(EpochError::Inadmissible { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        state.step_round()?;
    }
    state.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates() -> (EpochConfig, Vec<Point>) {
        let space = MetricSpace::scalar(0.0, 100.0).unwrap();
        let config = EpochConfig::new(space, Point::Scalar(20.0), Rule::median(0.5).unwrap()).unwrap();
        let votes = [10.0, 15.0, 18.0, 22.0, 25.0].map(Point::Scalar).to_vec();
        (config, votes)
    }

    #[test]
    fn rate_example_without_sources() {
        let (config, votes) = rates();
        let out = run_epoch(config, votes, &mut []).unwrap();
        assert_eq!(out.outcome, Point::Scalar(18.0));
        assert_eq!(out.rounds, 2);
        assert_eq!(out.termination, Termination::SameWinner);
    }

    #[test]
    fn admissibility_order() {
        let (config, votes) = rates();
        let mut st = EpochState::seal_and_reveal(config, votes).unwrap();
        assert_eq!(st.submit(0, Point::Scalar(17.0), "t"), Err(EpochError::VotingRoundPending));
        st.step_round().unwrap();
        let violation = |r: Result<(), EpochError>| match r {
            Err(EpochError::Inadmissible { violation, .. }) => violation,
            other => panic!("{other:?}"),
        };
        // member 4 (25) prefers nothing below 20
        assert!(matches!(violation(st.check_admissibility(4, &Point::Scalar(17.0))), Inadmissible::NotPreferred { .. }));
        assert!(matches!(violation(st.check_admissibility(0, &Point::Scalar(5.0))), Inadmissible::Unsupported { .. }));
        assert!(matches!(
            violation(st.check_admissibility(0, &Point::Scalar(18.01))),
            Inadmissible::NotNovel { conflict: NoveltyConflict::Vote { member: 2 }, .. }
        ));
        // 17 scores 1 < 2
        assert!(matches!(violation(st.check_admissibility(0, &Point::Scalar(17.0))), Inadmissible::NoImprovement { .. }));
        assert!(matches!(violation(st.check_admissibility(0, &Point::Scalar(150.0))), Inadmissible::InvalidPoint { .. }));
    }

    fn star() -> EpochState {
        let space = MetricSpace::graph(["h", "l1", "l2", "l3"], &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let config = EpochConfig::new(space, Point::Node(1), Rule::median(0.5).unwrap()).unwrap();
        let mut st = EpochState::seal_and_reveal(config, vec![Point::Node(1), Point::Node(2), Point::Node(3)]).unwrap();
        st.step_round().unwrap();
        st
    }

    #[test]
    fn slots_and_ledger() {
        let mut st = star();
        assert_eq!(st.last_result().unwrap().winner, None);
        assert_eq!(st.withdraw(1, "t"), Err(EpochError::EmptySlot(1)));
        st.submit(1, Point::Node(0), "t").unwrap();
        assert_eq!(st.proposals().len(), 4);
        assert!(matches!(
            st.check_admissibility(1, &Point::Node(0)),
            Err(EpochError::Inadmissible { violation: Inadmissible::SlotTaken, .. })
        ));
        st.withdraw(1, "t").unwrap();
        assert_eq!(st.proposals().len(), 3);
        assert_eq!(st.ledger().len(), 1);
        assert!(matches!(
            st.check_admissibility(1, &Point::Node(0)),
            Err(EpochError::Inadmissible {
                violation: Inadmissible::NotNovel { conflict: NoveltyConflict::Ledger { entry: 0 }, .. },
                ..
            })
        ));
    }

    #[test]
    fn star_hub_wins_after_two_more_rounds() {
        let mut st = star();
        st.submit(2, Point::Node(0), "t").unwrap();
        let r2 = st.step_round().unwrap();
        assert_eq!((r2.winner, r2.winning_score, r2.quiescent), (Some(Point::Node(0)), Some(1.0), false));
        let r3 = st.step_round().unwrap();
        assert!(r3.quiescent);
        let out = st.finish().unwrap();
        assert_eq!(out.outcome, Point::Node(0));
        assert_eq!(out.rounds, 3);
    }

    #[test]
    fn two_unsupported_rounds_keep_the_status_quo() {
        let space = MetricSpace::plurality(["a", "b", "c"]).unwrap();
        let config = EpochConfig::new(space, Point::Candidate(None), Rule::median(0.5).unwrap()).unwrap();
        let votes = vec![Point::Candidate(Some(0)), Point::Candidate(Some(0)), Point::Candidate(Some(1)), Point::Candidate(Some(1)), Point::Candidate(Some(2))];
        let out = run_epoch(config, votes, &mut []).unwrap();
        assert_eq!(out.outcome, Point::Candidate(None));
        assert_eq!(out.termination, Termination::Unsupported);
    }

    #[test]
    fn bad_configs() {
        let (config, _) = rates();
        assert!(config.clone().with_epsilon(0.0).is_err());
        assert!(config.with_max_rounds(0).is_err());
        let space = MetricSpace::scalar(0.0, 1.0).unwrap();
        assert!(EpochConfig::new(space, Point::Scalar(2.0), Rule::median(0.5).unwrap()).is_err());
    }
}
