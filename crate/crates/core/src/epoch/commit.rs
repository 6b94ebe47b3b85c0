//! Sealed votes: commit to a digest, then reveal all openings at once.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{trace, EpochConfig, EpochError, EpochState, TraceEvent};
use crate::metric::{MetricError, MetricSpace, Point};

/// Hex SHA-256 of the canonical vote encoding followed by the nonce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Commitment(pub String);

/// A vote and the nonce that hides it until reveal.
#[derive(Debug, Clone, PartialEq)]
pub struct Ballot {
    pub vote: Point,
    pub nonce: u64,
}

impl Ballot {
    pub fn commit(&self, space: &MetricSpace) -> Result<Commitment, MetricError> {
        let repr = space.encode(&self.vote)?;
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&repr).expect("point encodings serialize"));
        h.update(b":");
        h.update(self.nonce.to_le_bytes());
        Ok(Commitment(hex::encode(h.finalize())))
    }
}

/// An epoch whose votes are committed but not yet visible.
#[derive(Debug, Clone)]
pub struct SealedEpoch {
    config: EpochConfig,
    commitments: Vec<Commitment>,
}

impl SealedEpoch {
    pub fn seal(config: EpochConfig, commitments: Vec<Commitment>) -> Result<Self, EpochError> {
        config.validate()?;
        if commitments.is_empty() {
            return Err(EpochError::Config("the vote profile is empty".into()));
        }
        Ok(SealedEpoch { config, commitments })
    }

    pub fn commitments(&self) -> &[Commitment] {
        &self.commitments
    }

    /// Opens every ballot. Either all openings check out and the votes
    /// become public together, or nothing is revealed.
    pub fn reveal(self, ballots: Vec<Ballot>) -> Result<EpochState, EpochError> {
        let n = self.commitments.len();
        if ballots.len() != n {
            return Err(EpochError::BallotCount { expected: n, got: ballots.len() });
        }
        for (member, (b, c)) in ballots.iter().zip(&self.commitments).enumerate() {
            let opened = b.commit(&self.config.space).map_err(|source| EpochError::InvalidVote { member, source })?;
            if &opened != c {
                return Err(EpochError::CommitmentMismatch { member });
            }
        }
        let mut events = vec![trace::config_event(&self.config, n)];
        events.extend(
            self.commitments.iter().enumerate().map(|(member, c)| TraceEvent::Commit { member, digest: c.0.clone() }),
        );
        events.push(TraceEvent::Reveal {
            votes: ballots.iter().map(|b| self.config.space.encode(&b.vote)).collect::<Result<_, _>>()?,
            nonces: ballots.iter().map(|b| b.nonce).collect(),
        });
        let votes = ballots.into_iter().map(|b| b.vote).collect();
        Ok(EpochState::revealed(self.config, votes, events))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::governance::Rule;

    #[test]
    fn tampered_opening_is_refused() {
        let space = MetricSpace::scalar(0.0, 1.0).unwrap();
        let config = EpochConfig::new(space.clone(), Point::Scalar(0.5), Rule::median(0.5).unwrap()).unwrap();
        let ballots = vec![Ballot { vote: Point::Scalar(0.1), nonce: 7 }, Ballot { vote: Point::Scalar(0.9), nonce: 8 }];
        let commitments: Vec<_> = ballots.iter().map(|b| b.commit(&space).unwrap()).collect();
        assert_eq!(commitments[0].0.len(), 64);
        let sealed = SealedEpoch::seal(config, commitments).unwrap();
        let mut forged = ballots.clone();
        forged[1].vote = Point::Scalar(0.8);
        assert_eq!(sealed.clone().reveal(forged).unwrap_err(), EpochError::CommitmentMismatch { member: 1 });
        assert_eq!(
            sealed.clone().reveal(ballots[..1].to_vec()).unwrap_err(),
            EpochError::BallotCount { expected: 2, got: 1 }
        );
        let st = sealed.reveal(ballots).unwrap();
        assert_eq!(st.votes(), &[Point::Scalar(0.1), Point::Scalar(0.9)]);
    }
}
