//! Proposal sources: anything that suggests public proposals between rounds.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EpochError, EpochState};
use crate::gap::{geometric_median, heuristic_p, HeuristicConfig, WEISZFELD_MAX_ITER, WEISZFELD_TOLERANCE};
use crate::metric::{MetricSpace, Point};

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Submit { member: usize, point: Point },
    Update { member: usize, point: Point },
    Withdraw { member: usize },
}

pub trait ProposalSource {
    fn name(&self) -> &str;

    /// Actions for the round about to be scored, given the state so far.
    fn propose(&mut self, state: &EpochState) -> Result<Vec<Action>, EpochError>;
}

impl EpochState {
    /// The first member with a free slot for whom `c` is admissible; if
    /// there is none, the free member who gains most from `c`, so that the
    /// rejection is logged under a plausible proposer. `None` when every
    /// slot is taken.
    pub fn proposer_for(&self, c: &Point) -> Option<usize> {
        let free: Vec<usize> = (0..self.n()).filter(|&i| self.public()[i].is_none()).collect();
        if let Some(&i) = free.iter().find(|&&i| self.check_admissibility(i, c).is_ok()) {
            return Some(i);
        }
        let u = self.electorate().utilities(c).ok()?;
        free.into_iter().max_by(|&a, &b| u[a].total_cmp(&u[b]).then(b.cmp(&a)))
    }
}

/// Proposes the geometric median of the votes once, in the first public
/// round. Vector spaces only.
#[derive(Debug, Clone)]
pub struct GeometricMedianSource {
    pub tolerance: f64,
    pub max_iter: usize,
    done: bool,
}

impl Default for GeometricMedianSource {
    fn default() -> Self {
        GeometricMedianSource { tolerance: WEISZFELD_TOLERANCE, max_iter: WEISZFELD_MAX_ITER, done: false }
    }
}

impl GeometricMedianSource {
    /// The point this source proposes for `votes`.
    pub fn median_of(&self, space: &MetricSpace, votes: &[Point]) -> Result<Point, EpochError> {
        let fail = |detail: String| EpochError::Source { name: "geometric_median".into(), detail };
        let pts = votes
            .iter()
            .map(|v| v.as_vector().map(<[f64]>::to_vec))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| fail(format!("needs vector votes, space is {}", space.kind_name())))?;
        let x = geometric_median(&pts, self.tolerance, self.max_iter).map_err(|e| fail(e.to_string()))?;
        let mut p = Point::Vector(x);
        if !space.is_valid(&p) && matches!(space, MetricSpace::Simplex { .. }) {
            p = space.renormalize(&p).map_err(|e| fail(e.to_string()))?;
        }
        Ok(p)
    }
}

impl ProposalSource for GeometricMedianSource {
    fn name(&self) -> &str {
        "geometric_median"
    }

    fn propose(&mut self, state: &EpochState) -> Result<Vec<Action>, EpochError> {
        if self.done {
            return Ok(Vec::new());
        }
        self.done = true;
        let point = self.median_of(&state.config().space, state.votes())?;
        Ok(state.proposer_for(&point).map(|member| Action::Submit { member, point }).into_iter().collect())
    }
}

/// Runs the pairwise heuristic on the current proposals and submits any
/// compromise it finds, each at most once.
#[derive(Debug, Clone, Default)]
pub struct HeuristicSource {
    pub config: HeuristicConfig,
    tried: Vec<Point>,
}

impl HeuristicSource {
    pub fn new(config: HeuristicConfig) -> Self {
        HeuristicSource { config, tried: Vec::new() }
    }
}

impl ProposalSource for HeuristicSource {
    fn name(&self) -> &str {
        "heuristic_p"
    }

    fn propose(&mut self, state: &EpochState) -> Result<Vec<Action>, EpochError> {
        let el = state.electorate();
        let found = heuristic_p(&el, &state.proposals(), &state.config().rule, &self.config)
            .map_err(|e| EpochError::Source { name: self.name().into(), detail: e.to_string() })?;
        let Some((point, _)) = found else {
            return Ok(Vec::new());
        };
        if self.tried.contains(&point) {
            return Ok(Vec::new());
        }
        self.tried.push(point.clone());
        Ok(state.proposer_for(&point).map(|member| Action::Submit { member, point }).into_iter().collect())
    }
}

/// Fixed actions keyed by the round in which they are made.
#[derive(Debug, Clone)]
pub struct ScriptedSource {
    pub name: String,
    pub script: Vec<(usize, Action)>,
}

impl ProposalSource for ScriptedSource {
    fn name(&self) -> &str {
        &self.name
    }

    fn propose(&mut self, state: &EpochState) -> Result<Vec<Action>, EpochError> {
        let round = state.round() + 1;
        Ok(self.script.iter().filter(|(r, _)| *r == round).map(|(_, a)| a.clone()).collect())
    }
}

/// Each member acts with probability `rate` per round: a random point or a
/// random pairwise midpoint of current proposals, or occasionally a
/// withdrawal.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    pub rate: f64,
}

impl RandomSource {
    pub fn new(seed: u64, rate: f64) -> Self {
        RandomSource { rng: ChaCha8Rng::seed_from_u64(seed), rate: rate.clamp(0.0, 1.0) }
    }

    fn candidate(&mut self, state: &EpochState) -> Point {
        let space = &state.config().space;
        let proposals = state.proposals();
        if proposals.len() >= 2 && self.rng.random_bool(0.5) {
            let pair: Vec<&Point> = proposals.choose_multiple(&mut self.rng, 2).collect();
            if let Ok(mids) = space.midpoint_candidates(pair[0], pair[1], 8) {
                if let Some(c) = mids.choose(&mut self.rng) {
                    return c.clone();
                }
            }
        }
        let mut around = state.votes().to_vec();
        around.push(state.config().status_quo.clone());
        space.sample_point(&mut self.rng, &around)
    }
}

impl ProposalSource for RandomSource {
    fn name(&self) -> &str {
        "random"
    }

    fn propose(&mut self, state: &EpochState) -> Result<Vec<Action>, EpochError> {
        let mut out = Vec::new();
        for member in 0..state.n() {
            if !self.rng.random_bool(self.rate) {
                continue;
            }
            let held = state.public()[member].is_some();
            if held && self.rng.random_bool(0.2) {
                out.push(Action::Withdraw { member });
                continue;
            }
            let point = self.candidate(state);
            out.push(if held { Action::Update { member, point } } else { Action::Submit { member, point } });
        }
        Ok(out)
    }
}
