//! Line-delimited epoch traces and their replay.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Ballot, Commitment, EpochConfig, EpochError, Inadmissible, SealedEpoch, Termination};
use crate::governance::{RoundResult, Rule};
use crate::metric::{MetricError, MetricSpace, PointRepr};

/// Audit record of one scored proposal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalRecord {
    pub point: PointRepr,
    pub utilities: Vec<f64>,
    pub score: f64,
    pub support: Vec<usize>,
    pub supported: bool,
}

/// One trace line. Points use the canonical encodings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Config {
        space: MetricSpace,
        status_quo: PointRepr,
        rule: Rule,
        epsilon: f64,
        max_rounds: usize,
    },
    Commit {
        member: usize,
        digest: String,
    },
    Reveal {
        votes: Vec<PointRepr>,
        nonces: Vec<u64>,
    },
    Submit {
        round: usize,
        member: usize,
        point: PointRepr,
        source: String,
    },
    Update {
        round: usize,
        member: usize,
        point: PointRepr,
        source: String,
    },
    Withdraw {
        round: usize,
        member: usize,
        source: String,
    },
    Reject {
        round: usize,
        member: usize,
        /// Absent when the point could not be encoded.
        point: Option<PointRepr>,
        update: bool,
        source: String,
        #[serde(flatten)]
        violation: Inadmissible,
    },
    Round {
        round: usize,
        proposals: Vec<ProposalRecord>,
        winner: Option<PointRepr>,
        winning_score: Option<f64>,
        stable_rounds: usize,
    },
    Outcome {
        outcome: PointRepr,
        rounds: usize,
        termination: Termination,
    },
}

pub(crate) fn config_event(config: &EpochConfig, n: usize) -> TraceEvent {
    TraceEvent::Config {
        space: config.space.clone(),
        status_quo: config.space.encode(&config.status_quo).expect("validated status quo"),
        rule: config.rule,
        epsilon: config.epsilon,
        max_rounds: config.round_limit(n),
    }
}

pub(crate) fn round_event(
    space: &MetricSpace,
    round: usize,
    result: &RoundResult,
    stable_rounds: usize,
) -> Result<TraceEvent, MetricError> {
    let proposals = result
        .scores
        .iter()
        .map(|sp| {
            Ok(ProposalRecord {
                point: space.encode(&sp.point)?,
                utilities: sp.utilities.clone(),
                score: sp.score,
                support: sp.support.clone(),
                supported: sp.supported,
            })
        })
        .collect::<Result<_, MetricError>>()?;
    Ok(TraceEvent::Round {
        round,
        proposals,
        winner: result.winner.as_ref().map(|w| space.encode(w)).transpose()?,
        winning_score: result.winning_score,
        stable_rounds,
    })
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: recorded {recorded} but replay gives {replayed}")]
    Mismatch { line: usize, recorded: String, replayed: String },
    #[error("replay failed: {0}")]
    Epoch(#[from] EpochError),
}

pub fn write_trace<W: Write>(events: &[TraceEvent], mut out: W) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceEvent>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| TraceError::Parse { line: i + 1, detail: e.to_string() })?,
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub events: usize,
    pub rounds: usize,
    pub submissions: usize,
    pub rejections: usize,
    pub outcome: PointRepr,
}

fn malformed(line: usize, detail: impl Into<String>) -> TraceError {
    TraceError::Malformed { line, detail: detail.into() }
}

/// Re-runs a recorded epoch from its configuration, commitments and
/// actions, and checks that every line the replay produces matches.
pub fn verify_trace(events: &[TraceEvent]) -> Result<TraceSummary, TraceError> {
    let Some(TraceEvent::Config { space, status_quo, rule, epsilon, max_rounds }) = events.first() else {
        return Err(malformed(1, "trace must start with a config record"));
    };
    let s = space.decode(status_quo).map_err(EpochError::from)?;
    let config = EpochConfig::new(space.clone(), s, *rule)?.with_epsilon(*epsilon)?.with_max_rounds(*max_rounds)?;

    let mut commitments = Vec::new();
    let mut at = 1;
    while let Some(TraceEvent::Commit { member, digest }) = events.get(at) {
        if *member != commitments.len() {
            return Err(malformed(at + 1, "commitments out of order"));
        }
        commitments.push(Commitment(digest.clone()));
        at += 1;
    }
    let Some(TraceEvent::Reveal { votes, nonces }) = events.get(at) else {
        return Err(malformed(at + 1, "expected the reveal record"));
    };
    if votes.len() != nonces.len() {
        return Err(malformed(at + 1, "votes and nonces differ in length"));
    }
    let ballots = votes
        .iter()
        .zip(nonces)
        .map(|(v, &nonce)| Ok(Ballot { vote: space.decode(v)?, nonce }))
        .collect::<Result<Vec<_>, MetricError>>()
        .map_err(EpochError::from)?;
    let mut state = SealedEpoch::seal(config, commitments)?.reveal(ballots)?;
    let limit = state.config().round_limit(state.n());

    let mut finished = None;
    for (i, e) in events.iter().enumerate().skip(at + 1) {
        let line = i + 1;
        if finished.is_some() {
            return Err(malformed(line, "records after the outcome"));
        }
        match e {
            TraceEvent::Submit { member, point, source, .. } => {
                state.submit(*member, space.decode(point).map_err(EpochError::from)?, source)?;
            }
            TraceEvent::Update { member, point, source, .. } => {
                state.update(*member, space.decode(point).map_err(EpochError::from)?, source)?;
            }
            TraceEvent::Withdraw { member, source, .. } => state.withdraw(*member, source)?,
            TraceEvent::Reject { member, point: Some(point), update, source, .. } => {
                let c = space.decode(point).map_err(EpochError::from)?;
                let replayed = if *update { state.update(*member, c, source) } else { state.submit(*member, c, source) };
                match replayed {
                    Err(EpochError::Inadmissible { .. }) => {}
                    Ok(()) => return Err(malformed(line, "recorded rejection is admissible")),
                    Err(other) => return Err(other.into()),
                }
            }
            TraceEvent::Reject { point: None, .. } => state.push_event(e.clone()),
            TraceEvent::Round { .. } => {
                if state.is_quiescent() {
                    return Err(malformed(line, "round after quiescence"));
                }
                if state.round() >= limit {
                    return Err(EpochError::MaxRoundsExceeded(limit).into());
                }
                state.step_round()?;
            }
            TraceEvent::Outcome { .. } => {
                if !state.is_quiescent() {
                    return Err(malformed(line, "outcome before quiescence"));
                }
                finished = Some(state.clone().finish()?);
            }
            TraceEvent::Config { .. } | TraceEvent::Commit { .. } | TraceEvent::Reveal { .. } => {
                return Err(malformed(line, "unexpected setup record"));
            }
        }
    }
    let Some(outcome) = finished else {
        return Err(malformed(events.len(), "trace has no outcome record"));
    };
    for (i, (recorded, replayed)) in events.iter().zip(&outcome.trace).enumerate() {
        if recorded != replayed {
            return Err(TraceError::Mismatch {
                line: i + 1,
                recorded: serde_json::to_string(recorded).unwrap_or_default(),
                replayed: serde_json::to_string(replayed).unwrap_or_default(),
            });
        }
    }
    if events.len() != outcome.trace.len() {
        return Err(malformed(events.len(), "replay produced a different number of records"));
    }
    Ok(TraceSummary {
        events: events.len(),
        rounds: outcome.rounds,
        submissions: events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Submit { .. } | TraceEvent::Update { .. }))
            .count(),
        rejections: events.iter().filter(|e| matches!(e, TraceEvent::Reject { .. })).count(),
        outcome: space.encode(&outcome.outcome).map_err(EpochError::from)?,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{run_epoch, ProposalSource, RandomSource};
    use super::*;
    use crate::metric::Point;

    fn traced() -> Vec<TraceEvent> {
        let space = MetricSpace::simplex(3).unwrap();
        let s = Point::Vector(vec![0.6, 0.2, 0.2]);
        let config = EpochConfig::new(space, s, Rule::median(0.5).unwrap()).unwrap();
        let votes = [[0.2, 0.5, 0.3], [0.3, 0.3, 0.4], [0.1, 0.6, 0.3], [0.5, 0.1, 0.4], [0.2, 0.2, 0.6]]
            .map(|v| Point::Vector(v.to_vec()))
            .to_vec();
        let mut sources: Vec<Box<dyn ProposalSource>> = vec![Box::new(RandomSource::new(11, 0.8))];
        run_epoch(config, votes, &mut sources).unwrap().trace
    }

    #[test]
    fn round_trip_and_replay() {
        let events = traced();
        let mut buf = Vec::new();
        write_trace(&events, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, events);
        let summary = verify_trace(&back).unwrap();
        assert!(summary.rounds >= 2);
    }

    #[test]
    fn tampering_is_detected() {
        let mut events = traced();
        let round = events.iter().position(|e| matches!(e, TraceEvent::Round { .. })).unwrap();
        if let TraceEvent::Round { winning_score, .. } = &mut events[round] {
            *winning_score = Some(123.0);
        }
        assert!(matches!(verify_trace(&events), Err(TraceError::Mismatch { .. })));

        let mut events = traced();
        if let TraceEvent::Reveal { votes, .. } = &mut events[6] {
            votes[0] = PointRepr::Numbers(vec![0.3, 0.4, 0.3]);
        }
        assert!(matches!(verify_trace(&events), Err(TraceError::Epoch(EpochError::CommitmentMismatch { member: 0 }))));

        let mut events = traced();
        events.pop();
        assert!(verify_trace(&events).is_err());
    }
}
