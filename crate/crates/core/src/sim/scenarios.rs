//! Strategic-behaviour scenarios run as batch experiments.
//!
//! Each scenario either replays a fixed instance or searches random
//! instances for a counterexample to a structural claim about the rule.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{profile_seed, SimError};
use crate::epoch::{run_epoch, EpochConfig};
use crate::governance::{Electorate, Rule, Threshold};
use crate::metric::{MetricSpace, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    /// Space kind, for scenarios repeated per kind.
    pub space: Option<String>,
    pub trials: usize,
    /// Trials in which the premise of the claim held.
    pub events: usize,
    pub counterexamples: usize,
    pub first_counterexample: Option<String>,
}

impl ScenarioReport {
    fn new(name: &str, space: Option<&MetricSpace>) -> Self {
        ScenarioReport {
            name: name.to_string(),
            space: space.map(|s| s.kind_name().to_string()),
            trials: 0,
            events: 0,
            counterexamples: 0,
            first_counterexample: None,
        }
    }

    fn fail(&mut self, what: impl FnOnce() -> String) {
        self.counterexamples += 1;
        if self.first_counterexample.is_none() {
            self.first_counterexample = Some(what());
        }
    }

    fn merge(mut self, other: ScenarioReport) -> Self {
        self.trials += other.trials;
        self.events += other.events;
        self.counterexamples += other.counterexamples;
        if self.first_counterexample.is_none() {
            self.first_counterexample = other.first_counterexample;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.counterexamples == 0 && self.trials > 0
    }
}

/// Trial counts for [`scenario_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioBudget {
    /// `(v*, misreport)` pairs per space kind for the separating epoch.
    pub separating_pairs: usize,
    /// Random trials per claim per space kind.
    pub lemma_trials: usize,
    /// Random profiles per electorate size for the 1D misreport search,
    /// on top of every profile with `n <= 2`.
    pub misreport_profiles: usize,
}

impl Default for ScenarioBudget {
    fn default() -> Self {
        ScenarioBudget { separating_pairs: 1_000, lemma_trials: 100_000, misreport_profiles: 2_000 }
    }
}

impl ScenarioBudget {
    pub fn quick() -> Self {
        ScenarioBudget { separating_pairs: 50, lemma_trials: 2_000, misreport_profiles: 100 }
    }
}

/// One space of each kind, small enough for dense random search.
pub fn scenario_spaces() -> Vec<MetricSpace> {
    vec![
        MetricSpace::plurality(["a", "b", "c"]).expect("static"),
        MetricSpace::scalar(0.0, 10.0).expect("static"),
        MetricSpace::simplex(3).expect("static"),
        MetricSpace::euclidean(2).expect("static"),
        MetricSpace::permutations(4).expect("static"),
        MetricSpace::hypercube(5).expect("static"),
        MetricSpace::strings("abc", 4).expect("static"),
        MetricSpace::graph(
            ["h", "a", "b", "c", "x", "y"],
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 2.0), (1, 4, 1.5), (4, 5, 1.0), (2, 5, 3.0)],
        )
        .expect("static"),
    ]
}

fn half() -> Rule {
    Rule::median(0.5).expect("1/2 is a valid threshold")
}

fn describe(space: &MetricSpace, pts: &[Point]) -> String {
    pts.iter().map(|p| space.describe(p)).collect::<Vec<_>>().join(" ")
}

/// True utility of an outcome; `None` is the status quo.
fn value(space: &MetricSpace, s: &Point, truth: &Point, outcome: Option<&Point>) -> f64 {
    outcome.map_or(0.0, |w| space.distance(truth, s).unwrap() - space.distance(truth, w).unwrap())
}

// ------------------------------------------------------ separating epoch

/// Builds the separating profile for member 0 and runs both epochs without
/// public proposals. Returns the member's true utility under sincere
/// voting and under the misreport.
pub fn separating_epoch(
    space: &MetricSpace,
    s: &Point,
    truth: &Point,
    misreport: &Point,
    n: usize,
) -> Result<(f64, f64), SimError> {
    let k = n.div_ceil(2);
    let mut others: Vec<Point> = Vec::with_capacity(n - 1);
    others.extend(std::iter::repeat_n(truth.clone(), k - 1));
    others.extend(std::iter::repeat_n(misreport.clone(), k - 1));
    others.extend(std::iter::repeat_n(s.clone(), n + 1 - 2 * k));
    let run = |own: &Point| -> Result<f64, SimError> {
        let mut votes = vec![own.clone()];
        votes.extend(others.iter().cloned());
        let config = EpochConfig::new(space.clone(), s.clone(), half()).map_err(sim_err)?;
        let out = run_epoch(config, votes, &mut []).map_err(sim_err)?;
        Ok(value(space, s, truth, Some(&out.outcome)))
    };
    Ok((run(truth)?, run(misreport)?))
}

fn sim_err(e: impl std::fmt::Display) -> SimError {
    SimError::Scenario { name: "epoch".into(), detail: e.to_string() }
}

fn separating_trials(space: &MetricSpace, pairs: usize, seed: u64) -> Result<ScenarioReport, SimError> {
    let mut rep = ScenarioReport::new("separating_epoch", Some(space));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while rep.trials < pairs {
        let s = space.sample_point(&mut rng, &[]);
        let truth = space.sample_point(&mut rng, &[]);
        let misreport = if rng.random_bool(0.1) { s.clone() } else { space.sample_point(&mut rng, &[]) };
        if truth == s || misreport == truth {
            continue;
        }
        let n = rng.random_range(1..=9);
        rep.trials += 1;
        rep.events += 1;
        let (sincere, lie) = separating_epoch(space, &s, &truth, &misreport, n)?;
        let d_truth = space.distance(&truth, &s)?;
        let expected_lie =
            if misreport == s { 0.0 } else { d_truth - space.distance(&truth, &misreport)? };
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + d_truth);
        if !(sincere > lie && close(sincere, d_truth) && close(lie, expected_lie)) {
            rep.fail(|| {
                format!(
                    "n={n} s={} v*={} misreport={}: sincere {sincere}, misreport {lie}",
                    space.describe(&s),
                    space.describe(&truth),
                    space.describe(&misreport)
                )
            });
        }
    }
    Ok(rep)
}

// ------------------------------------------------ two-dimensional fixture

/// The two-dimensional manipulation instance: three members, one of whom
/// gains by reporting `(0.5, 0.5)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManipulationFixture {
    pub sincere_winner: Option<Point>,
    pub misreport_winner: Option<Point>,
    /// Utilities of `(0.5, 0.5)` on the reported votes.
    pub misreport_utilities: Vec<f64>,
    pub misreport_median: f64,
    pub sincere_value: f64,
    pub misreport_value: f64,
}

pub fn multidim_fixture() -> Result<ManipulationFixture, SimError> {
    let space = MetricSpace::euclidean(2)?;
    let s = Point::Vector(vec![0.0, 0.0]);
    let truth = [vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]].map(Point::Vector);
    let lie = Point::Vector(vec![0.5, 0.5]);
    let mut reported = truth.to_vec();
    reported[0] = lie.clone();
    let rule = half();
    let gov = |e: crate::governance::GovernanceError| SimError::Scenario { name: "multidim".into(), detail: e.to_string() };
    let sincere = Electorate::new(&space, &s, &truth).map_err(gov)?.round_winner(&truth, &rule).map_err(gov)?;
    let el = Electorate::new(&space, &s, &reported).map_err(gov)?;
    let manipulated = el.round_winner(&reported, &rule).map_err(gov)?;
    let scored = el.score(&lie, &rule).map_err(gov)?;
    Ok(ManipulationFixture {
        sincere_value: value(&space, &s, &truth[0], sincere.winner.as_ref()),
        misreport_value: value(&space, &s, &truth[0], manipulated.winner.as_ref()),
        sincere_winner: sincere.winner,
        misreport_winner: manipulated.winner,
        misreport_utilities: scored.utilities,
        misreport_median: scored.score,
    })
}

fn multidim_report() -> Result<ScenarioReport, SimError> {
    let f = multidim_fixture()?;
    let mut rep = ScenarioReport::new("multidim_manipulation", None);
    rep.trials = 1;
    rep.events = 1;
    let expected = [0.5f64.sqrt(), 1.0 - 0.5f64.sqrt(), -(0.5f64.sqrt())];
    let ok = f.sincere_winner.is_none()
        && f.misreport_winner == Some(Point::Vector(vec![0.5, 0.5]))
        && f.misreport_utilities.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-3)
        && f.misreport_value > f.sincere_value;
    if !ok {
        rep.fail(|| format!("{f:?}"));
    }
    Ok(rep)
}

// ---------------------------------------------- 1D exhaustive misreports

const GRID_POINTS: usize = 21;

/// Exhaustive misreport search for one 1D profile on the integer grid
/// `0..=20`: every member tries every grid misreport against the round
/// with the reported votes plus `extra` public proposals.
fn misreport_gain(
    space: &MetricSpace,
    s: &Point,
    votes: &[Point],
    extra: &[Point],
    rule: &Rule,
) -> Option<String> {
    let winner = |vs: &[Point]| -> Option<Point> {
        let mut props = vs.to_vec();
        props.extend(extra.iter().cloned());
        Electorate::new(space, s, vs).ok()?.round_winner(&props, rule).ok()?.winner
    };
    let sincere = winner(votes);
    for (i, truth) in votes.iter().enumerate() {
        let honest = value(space, s, truth, sincere.as_ref());
        for g in 0..GRID_POINTS {
            let lie = Point::Scalar(g as f64);
            if &lie == truth {
                continue;
            }
            let mut reported = votes.to_vec();
            reported[i] = lie.clone();
            let got = value(space, s, truth, winner(&reported).as_ref());
            if got > honest + 1e-12 {
                return Some(format!(
                    "sigma={} s={} votes=[{}] extra=[{}]: member {i} gains {got} > {honest} by reporting {g}",
                    rule.sigma.value(),
                    space.describe(s),
                    describe(space, votes),
                    describe(space, extra)
                ));
            }
        }
    }
    None
}

/// Exhaustive misreport search on the 21-point grid: every profile with
/// `n <= 2` and `profiles` random profiles (with up to two public
/// proposals) for each larger size in `sizes`, under every threshold in
/// `sigmas`.
pub fn one_dimensional_search(
    sizes: std::ops::RangeInclusive<usize>,
    sigmas: &[f64],
    profiles: usize,
    seed: u64,
) -> Result<ScenarioReport, SimError> {
    let space = MetricSpace::scalar(0.0, (GRID_POINTS - 1) as f64)?;
    let grid: Vec<Point> = (0..GRID_POINTS).map(|g| Point::Scalar(g as f64)).collect();
    let rules = sigmas
        .iter()
        .map(|&x| Rule::median(x))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| SimError::Config(e.to_string()))?;
    let mut cases: Vec<(Point, Vec<Point>, Vec<Point>)> = Vec::new();
    for s in &grid {
        for a in &grid {
            if sizes.contains(&1) {
                cases.push((s.clone(), vec![a.clone()], vec![]));
            }
            if sizes.contains(&2) {
                for b in &grid {
                    cases.push((s.clone(), vec![a.clone(), b.clone()], vec![]));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in sizes.filter(|&n| n >= 3) {
        for _ in 0..profiles {
            let s = grid.choose(&mut rng).expect("grid").clone();
            let votes: Vec<Point> = (0..n).map(|_| grid.choose(&mut rng).expect("grid").clone()).collect();
            let k = rng.random_range(0..=2);
            let extra: Vec<Point> = (0..k).map(|_| grid.choose(&mut rng).expect("grid").clone()).collect();
            cases.push((s, votes, extra));
        }
    }
    let sp = &space;
    let found: Vec<Option<String>> = cases
        .par_iter()
        .flat_map_iter(|(s, votes, extra)| rules.iter().map(move |r| misreport_gain(sp, s, votes, extra, r)))
        .collect();
    let mut rep = ScenarioReport::new("one_dimensional_misreport", Some(&space));
    for f in found {
        rep.trials += 1;
        rep.events += 1;
        if let Some(msg) = f {
            rep.fail(|| msg);
        }
    }
    Ok(rep)
}

// ------------------------------------------------------ lemma searches

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// A unilateral flip to supported needs a member who does not prefer
    /// the flipped proposal.
    FlipUnsupported,
    /// A public proposal is supported iff the same point as a misreport is.
    CompromiseReplicates,
    /// Lowering the winner and raising a rival needs a member who prefers
    /// the winner.
    WinnerSwap,
    /// Submitting a public proposal one does not prefer never helps.
    CoalitionCompromise,
    /// A coalition flip to supported needs a member who does not prefer
    /// the flipped proposal.
    CoalitionFlip,
}

impl Claim {
    pub const ALL: [Claim; 5] = [
        Claim::FlipUnsupported,
        Claim::CompromiseReplicates,
        Claim::WinnerSwap,
        Claim::CoalitionCompromise,
        Claim::CoalitionFlip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::FlipUnsupported => "flip_unsupported",
            Claim::CompromiseReplicates => "compromise_replicates",
            Claim::WinnerSwap => "winner_swap",
            Claim::CoalitionCompromise => "coalition_compromise",
            Claim::CoalitionFlip => "coalition_flip",
        }
    }
}

/// One random instance: a status quo, a small pool of popular points and
/// sincere votes drawn mostly from the pool, so that coincidences are
/// common.
pub(super) struct Instance<'a> {
    pub(super) space: &'a MetricSpace,
    pub(super) s: Point,
    pub(super) votes: Vec<Point>,
    pub(super) pool: Vec<Point>,
    pub(super) tol: f64,
}

impl<'a> Instance<'a> {
    pub(super) fn draw(space: &'a MetricSpace, rng: &mut ChaCha8Rng) -> Self {
        let pool: Vec<Point> = (0..5).map(|_| space.sample_point(rng, &[])).collect();
        let s = if rng.random_bool(0.5) { pool[0].clone() } else { space.sample_point(rng, &[]) };
        let n = rng.random_range(3..=9);
        let votes: Vec<Point> = (0..n).map(|_| Self::pick(space, &pool, rng)).collect();
        let scale = pool.iter().chain(&votes).map(|x| space.distance(x, &s).unwrap()).fold(1.0, f64::max);
        let tol = space.score_tolerance() * 4.0 * scale;
        Instance { space, s, votes, pool, tol }
    }

    pub(super) fn pick(space: &MetricSpace, pool: &[Point], rng: &mut ChaCha8Rng) -> Point {
        if rng.random_bool(0.6) {
            pool.choose(rng).expect("pool").clone()
        } else {
            space.sample_point(rng, &[])
        }
    }

    pub(super) fn point(&self, rng: &mut ChaCha8Rng) -> Point {
        if rng.random_bool(0.3) {
            self.votes.choose(rng).expect("votes").clone()
        } else {
            Self::pick(self.space, &self.pool, rng)
        }
    }

    pub(super) fn u(&self, q: &Point, p: &Point) -> f64 {
        self.space.distance(q, &self.s).unwrap() - self.space.distance(q, p).unwrap()
    }

    pub(super) fn support(&self, votes: &[Point], p: &Point) -> usize {
        votes.iter().filter(|v| self.u(v, p) > self.tol).count()
    }

    pub(super) fn phi(&self, votes: &[Point], p: &Point, rule: &Rule) -> f64 {
        let u: Vec<f64> = votes.iter().map(|v| self.u(v, p)).collect();
        rule.score(&u).unwrap()
    }

    pub(super) fn winner(&self, votes: &[Point], proposals: &[Point], rule: &Rule) -> Option<Point> {
        Electorate::new(self.space, &self.s, votes).unwrap().round_winner(proposals, rule).unwrap().winner
    }

    pub(super) fn show(&self) -> String {
        format!("s={} votes=[{}]", self.space.describe(&self.s), describe(self.space, &self.votes))
    }
}

/// Outcome of one trial: whether the premise held, and a counterexample.
pub(super) type TrialResult = (bool, Option<String>);

fn trial(claim: Claim, space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let inst = Instance::draw(space, rng);
    let n = inst.votes.len();
    let sigma = if rng.random_bool(0.5) { 0.5 } else { [0.6, 2.0 / 3.0, 0.75].choose(rng).copied().unwrap() };
    let rule = Rule::median(sigma).unwrap();
    let k = Threshold::new(sigma).unwrap().required(n);
    let i = rng.random_range(0..n);
    match claim {
        Claim::FlipUnsupported => {
            let w = inst.point(rng);
            let lie = if rng.random_bool(0.5) { w.clone() } else { inst.point(rng) };
            let mut reported = inst.votes.clone();
            reported[i] = lie;
            let flipped = inst.support(&inst.votes, &w) < k && inst.support(&reported, &w) >= k;
            if !flipped {
                return (false, None);
            }
            let ui = inst.u(&inst.votes[i], &w);
            (true, (ui > inst.tol).then(|| format!("{} sigma={sigma} member {i} W={}: u={ui}", inst.show(), space.describe(&w))))
        }
        Claim::CompromiseReplicates => {
            let c = inst.point(rng);
            if c == inst.s || inst.u(&inst.votes[i], &c) <= inst.tol {
                return (false, None);
            }
            let mut reported = inst.votes.clone();
            reported[i] = c.clone();
            let a = inst.support(&inst.votes, &c) >= k;
            let b = inst.support(&reported, &c) >= k;
            (true, (a != b).then(|| format!("{} sigma={sigma} member {i} c={}: {a} vs {b}", inst.show(), space.describe(&c))))
        }
        Claim::WinnerSwap => {
            let mut props = inst.votes.clone();
            props.extend(inst.pool.iter().cloned());
            let ok: Vec<(&Point, f64)> = props
                .iter()
                .filter(|p| inst.support(&inst.votes, p) >= k)
                .map(|p| (p, inst.phi(&inst.votes, p, &rule)))
                .filter(|(_, f)| *f > inst.tol)
                .collect();
            let Some(&(w0, f0)) = ok.iter().max_by(|a, b| a.1.total_cmp(&b.1)) else {
                return (false, None);
            };
            let rivals: Vec<&(&Point, f64)> = ok.iter().filter(|(_, f)| *f < f0).collect();
            let Some(&&(wt, ft)) = rivals.choose(rng) else {
                return (false, None);
            };
            let lie = if rng.random_bool(0.5) { wt.clone() } else { inst.point(rng) };
            let mut reported = inst.votes.clone();
            reported[i] = lie;
            if !(inst.phi(&reported, w0, &rule) < f0 && inst.phi(&reported, wt, &rule) > ft) {
                return (false, None);
            }
            let (a, b) = (inst.u(&inst.votes[i], w0), inst.u(&inst.votes[i], wt));
            (true, (a <= b).then(|| format!("{} sigma={sigma} member {i}: u(W0)={a} <= u(W~)={b}", inst.show())))
        }
        Claim::CoalitionCompromise => {
            let mut members: Vec<usize> = (0..n).collect();
            members.shuffle(rng);
            members.truncate(rng.random_range(1..=n));
            let subs: Vec<Point> = members.iter().map(|_| inst.point(rng)).collect();
            let j = rng.random_range(0..members.len());
            let mut without = inst.votes.clone();
            without.extend(subs.iter().enumerate().filter(|(l, _)| *l != j).map(|(_, c)| c.clone()));
            let mut with = inst.votes.clone();
            with.extend(subs.iter().cloned());
            let w1 = inst.winner(&inst.votes, &without, &rule);
            let w2 = inst.winner(&inst.votes, &with, &rule);
            let cj = &subs[j];
            if w2 != w1 && w2.as_ref() != Some(cj) {
                return (true, Some(format!("{} winner moved to a third proposal", inst.show())));
            }
            let truth = &inst.votes[members[j]];
            let before = value(space, &inst.s, truth, w1.as_ref());
            if inst.u(truth, cj) > before {
                return (false, None);
            }
            let after = value(space, &inst.s, truth, w2.as_ref());
            (true, (after > before + inst.tol).then(|| format!("{} member {} gains {after} > {before}", inst.show(), members[j])))
        }
        Claim::CoalitionFlip => {
            let w = inst.point(rng);
            let mut reported = inst.votes.clone();
            let mut coalition: Vec<usize> = (0..n).collect();
            coalition.shuffle(rng);
            coalition.truncate(rng.random_range(1..=n));
            for &m in &coalition {
                reported[m] = if rng.random_bool(0.5) { w.clone() } else { inst.point(rng) };
            }
            let flipped = inst.support(&inst.votes, &w) < k && inst.support(&reported, &w) >= k;
            if !flipped {
                return (false, None);
            }
            let someone = coalition.iter().any(|&m| inst.u(&inst.votes[m], &w) <= inst.tol);
            (true, (!someone).then(|| format!("{} sigma={sigma} coalition {coalition:?} W={}", inst.show(), space.describe(&w))))
        }
    }
}

/// Runs `trials` independent trials in parallel chunks, each chunk seeded
/// from `seed` and its index.
pub(super) fn run_trials<F>(name: &str, space: Option<&MetricSpace>, trials: usize, seed: u64, trial: F) -> ScenarioReport
where
    F: Fn(&mut ChaCha8Rng) -> TrialResult + Sync,
{
    const CHUNK: usize = 1_000;
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(profile_seed(seed, c));
            let mut rep = ScenarioReport::new(name, space);
            for _ in 0..CHUNK.min(trials - c * CHUNK) {
                let (event, bad) = trial(&mut rng);
                rep.trials += 1;
                rep.events += usize::from(event);
                if let Some(msg) = bad {
                    rep.fail(|| msg);
                }
            }
            rep
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(ScenarioReport::new(name, space), ScenarioReport::merge)
}

/// Random search for a counterexample to `claim`.
pub fn claim_search(claim: Claim, space: &MetricSpace, trials: usize, seed: u64) -> ScenarioReport {
    run_trials(claim.name(), Some(space), trials, seed, |rng| trial(claim, space, rng))
}

// ------------------------------------------------- monotonicity fixture

/// The seven-member table metric in which the winner `w` loses after a
/// member moves to `w`.
pub fn monotonicity_space() -> Result<MetricSpace, SimError> {
    // s, w, p, v1..v5
    let labels = ["s", "w", "p", "v1", "v2", "v3", "v4", "v5"];
    let to_w = [13.0, 12.0, 11.0, 9.99, 9.98];
    let u_p = [-6.0, -4.0, -2.0, -0.01, 0.1];
    let mut edges = vec![(0, 1, 10.0), (0, 2, 10.0), (1, 2, 5.0)];
    for j in 0..5 {
        edges.push((3 + j, 0, 10.0));
        edges.push((3 + j, 1, to_w[j]));
        edges.push((3 + j, 2, 10.0 - u_p[j]));
    }
    Ok(MetricSpace::graph(labels, &edges)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityFixture {
    pub before_w: f64,
    pub before_p: f64,
    pub before_winner: Option<Point>,
    pub after_w: f64,
    pub after_p: f64,
    pub after_winner: Option<Point>,
}

pub fn monotonicity_fixture() -> Result<MonotonicityFixture, SimError> {
    let space = monotonicity_space()?;
    let (s, w, p) = (Point::Node(0), Point::Node(1), Point::Node(2));
    let before: Vec<Point> = (3..8).map(Point::Node).chain([p.clone(), w.clone()]).collect();
    let mut after = before.clone();
    after[3] = w.clone();
    let rule = half();
    let gov = |e: crate::governance::GovernanceError| SimError::Scenario { name: "monotonicity".into(), detail: e.to_string() };
    let run = |votes: &[Point]| -> Result<(f64, f64, Option<Point>), SimError> {
        let el = Electorate::new(&space, &s, votes).map_err(gov)?;
        let r = el.round_winner(votes, &rule).map_err(gov)?;
        Ok((el.score(&w, &rule).map_err(gov)?.score, el.score(&p, &rule).map_err(gov)?.score, r.winner))
    };
    let (before_w, before_p, before_winner) = run(&before)?;
    let (after_w, after_p, after_winner) = run(&after)?;
    Ok(MonotonicityFixture { before_w, before_p, before_winner, after_w, after_p, after_winner })
}

fn monotonicity_report() -> Result<ScenarioReport, SimError> {
    let f = monotonicity_fixture()?;
    let mut rep = ScenarioReport::new("monotonicity_counterexample", None);
    rep.trials = 1;
    rep.events = 1;
    let near = |a: f64, b: f64| (a - b).abs() < 1e-9;
    let ok = near(f.before_w, 0.01)
        && near(f.before_p, -0.01)
        && f.before_winner == Some(Point::Node(1))
        && near(f.after_w, 0.02)
        && near(f.after_p, 0.1)
        && f.after_winner == Some(Point::Node(2));
    if !ok {
        rep.fail(|| format!("{f:?}"));
    }
    Ok(rep)
}

/// Every scenario: separating epochs and claim searches for each space
/// kind, the two fixed instances, and the 1D misreport search.
pub fn scenario_suite(seed: u64, budget: &ScenarioBudget) -> Result<Vec<ScenarioReport>, SimError> {
    let spaces = scenario_spaces();
    let mut out = Vec::new();
    for (i, space) in spaces.iter().enumerate() {
        out.push(separating_trials(space, budget.separating_pairs, profile_seed(seed, i))?);
    }
    out.push(multidim_report()?);
    out.push(one_dimensional_search(1..=7, &[0.5, 2.0 / 3.0, 0.75], budget.misreport_profiles, profile_seed(seed, 100))?);
    for (c, claim) in Claim::ALL.iter().enumerate() {
        for (i, space) in spaces.iter().enumerate() {
            out.push(claim_search(*claim, space, budget.lemma_trials, profile_seed(seed, 1000 + 100 * c + i)));
        }
    }
    out.push(monotonicity_report()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_hold() {
        let f = multidim_fixture().unwrap();
        assert!((f.misreport_median - 0.293).abs() < 1e-3);
        assert_eq!(f.sincere_value, 0.0);
        let m = monotonicity_fixture().unwrap();
        assert!((m.before_w - 0.01).abs() < 1e-9 && (m.after_p - 0.1).abs() < 1e-9);
        let space = monotonicity_space().unwrap();
        // the shortest-path closure keeps every listed distance
        assert_eq!(space.distance(&Point::Node(6), &Point::Node(1)).unwrap(), 9.99);
        assert_eq!(space.distance(&Point::Node(7), &Point::Node(2)).unwrap(), 9.9);
    }

    #[test]
    fn even_electorates_have_one_voter_at_the_status_quo() {
        let space = MetricSpace::scalar(0.0, 10.0).unwrap();
        let (sincere, lie) =
            separating_epoch(&space, &Point::Scalar(5.0), &Point::Scalar(8.0), &Point::Scalar(2.0), 6).unwrap();
        assert_eq!((sincere, lie), (3.0, -3.0));
    }

    #[test]
    fn one_dimensional_misreports_need_two_positional_voters() {
        let odd = one_dimensional_search(1..=7, &[2.0 / 3.0, 0.75], 100, 3).unwrap();
        assert!(odd.passed(), "{odd:?}");
        for n in [1, 3, 5, 7] {
            assert!(one_dimensional_search(n..=n, &[0.5], 100, 3).unwrap().passed());
        }
        // even n at one half: the upper and lower positional voters both
        // score, and exaggerating one side wins the tie
        let even = one_dimensional_search(2..=2, &[0.5], 0, 3).unwrap();
        assert!(even.counterexamples > 0);
        let space = MetricSpace::scalar(0.0, 20.0).unwrap();
        let votes = [Point::Scalar(0.0), Point::Scalar(2.0)];
        assert!(misreport_gain(&space, &Point::Scalar(1.0), &votes, &[], &half()).is_some());
    }

    #[test]
    fn quick_suite_passes() {
        let reports = scenario_suite(7, &ScenarioBudget::quick()).unwrap();
        for r in reports.iter().filter(|r| r.name != "one_dimensional_misreport") {
            assert!(r.passed(), "{r:?}");
        }
    }
}
