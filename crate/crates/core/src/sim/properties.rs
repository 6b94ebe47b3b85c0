//! Randomised invariant checks.
//!
//! Every check draws one instance from a seeded generator and either
//! confirms the invariant or describes a counterexample. The same checks
//! back the property tests and [`property_suite`].

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenarios::{run_trials, scenario_spaces, Instance, ScenarioReport, TrialResult};
use crate::epoch::{run_epoch, EpochConfig, HeuristicSource, ProposalSource, RandomSource, Termination, TraceEvent};
use crate::gap::{compromise_gap, heuristic_p, GapConfig, HeuristicConfig, OptMethod};
use crate::governance::{aggregate_score, positional_voter, Aggregator, Electorate, Rule, Threshold};
use crate::metric::{MetricSpace, Point};

const SIGMAS: [f64; 4] = [0.5, 0.6, 2.0 / 3.0, 0.75];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    /// Symmetry, identity of indiscernibles, triangle inequality.
    MetricAxioms,
    /// `phi(u(p)) > 0` exactly when `p` is supported.
    SupportEquivalence,
    /// Without a supported positive proposal the status quo stands.
    RealityAwareness,
    /// A point voted by a supermajority wins.
    Majoritarity,
    /// Permuting the votes changes neither scores nor winner.
    Anonymity,
    /// Both aggregators are 1-Lipschitz in the sup norm.
    AggregatorLipschitz,
    /// On a line the score is the positional voter's utility.
    PositionalVoter,
    /// On a line with odd `n` at one half nothing beats the best vote.
    ZeroGap1D,
    /// `0 <= cg <= min_p d(x*, p)` when the optimum is exact.
    LipschitzBound,
    /// The pairwise heuristic only returns strict improvements.
    HeuristicGating,
    /// Epochs end, and the novelty ledger stays separated.
    EpochTermination,
    /// Adding a proposal leaves the winner or makes the newcomer win.
    ChannelMonotonicity,
}

impl Property {
    pub const ALL: [Property; 12] = [
        Property::MetricAxioms,
        Property::SupportEquivalence,
        Property::RealityAwareness,
        Property::Majoritarity,
        Property::Anonymity,
        Property::AggregatorLipschitz,
        Property::PositionalVoter,
        Property::ZeroGap1D,
        Property::LipschitzBound,
        Property::HeuristicGating,
        Property::EpochTermination,
        Property::ChannelMonotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::MetricAxioms => "metric_axioms",
            Property::SupportEquivalence => "support_equivalence",
            Property::RealityAwareness => "reality_awareness",
            Property::Majoritarity => "majoritarity",
            Property::Anonymity => "anonymity",
            Property::AggregatorLipschitz => "aggregator_lipschitz",
            Property::PositionalVoter => "positional_voter",
            Property::ZeroGap1D => "zero_gap_1d",
            Property::LipschitzBound => "lipschitz_bound",
            Property::HeuristicGating => "heuristic_gating",
            Property::EpochTermination => "epoch_termination",
            Property::ChannelMonotonicity => "channel_monotonicity",
        }
    }

    /// Spaces the property is checked in; empty when it needs none.
    pub fn spaces(self) -> Vec<MetricSpace> {
        let all = property_spaces();
        match self {
            Property::AggregatorLipschitz => Vec::new(),
            Property::PositionalVoter | Property::ZeroGap1D => vec![line()],
            Property::LipschitzBound => {
                all.into_iter().filter(|s| s.is_finite() || matches!(s, MetricSpace::Scalar { .. })).collect()
            }
            // The plane is not totally bounded.
            Property::EpochTermination => {
                all.into_iter().filter(|s| !matches!(s, MetricSpace::Euclidean { .. })).collect()
            }
            _ => all,
        }
    }

    /// One trial. `Ok(true)` when the premise held and the invariant with
    /// it, `Ok(false)` when the premise did not hold.
    pub fn check(self, space: Option<&MetricSpace>, seed: u64) -> Result<bool, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self.trial(space, &mut rng) {
            (_, Some(msg)) => Err(msg),
            (event, None) => Ok(event),
        }
    }

    fn trial(self, space: Option<&MetricSpace>, rng: &mut ChaCha8Rng) -> TrialResult {
        let Some(space) = space else {
            return aggregator_lipschitz(rng);
        };
        match self {
            Property::MetricAxioms => metric_axioms(space, rng),
            Property::SupportEquivalence => support_equivalence(space, rng),
            Property::RealityAwareness => reality_awareness(space, rng),
            Property::Majoritarity => majoritarity(space, rng),
            Property::Anonymity => anonymity(space, rng),
            Property::AggregatorLipschitz => aggregator_lipschitz(rng),
            Property::PositionalVoter => positional(space, rng),
            Property::ZeroGap1D => zero_gap_1d(space, rng),
            Property::LipschitzBound => bound(space, rng),
            Property::HeuristicGating => gating(space, rng),
            Property::EpochTermination => termination(space, rng),
            Property::ChannelMonotonicity => channel(space, rng),
        }
    }
}

/// Every space kind: the scenario spaces plus fixed-size committees and a
/// distance table.
pub fn property_spaces() -> Vec<MetricSpace> {
    let mut spaces = scenario_spaces();
    spaces.push(MetricSpace::subsets(["a", "b", "c", "d", "e"], Some(2)).expect("static"));
    spaces.push(
        MetricSpace::table(
            ["p", "q", "r", "t"],
            vec![
                vec![0.0, 1.0, 2.0, 1.5],
                vec![1.0, 0.0, 1.0, 2.0],
                vec![2.0, 1.0, 0.0, 1.0],
                vec![1.5, 2.0, 1.0, 0.0],
            ],
        )
        .expect("static"),
    );
    spaces
}

fn line() -> MetricSpace {
    MetricSpace::scalar(0.0, 20.0).expect("static")
}

/// `trials` trials of `property` in each of its spaces.
pub fn property_reports(property: Property, trials: usize, seed: u64) -> Vec<ScenarioReport> {
    let spaces = property.spaces();
    if spaces.is_empty() {
        return vec![run_trials(property.name(), None, trials, seed, |rng| property.trial(None, rng))];
    }
    spaces
        .iter()
        .enumerate()
        .map(|(i, space)| {
            let seed = seed ^ ((property as u64) << 32) ^ i as u64;
            run_trials(property.name(), Some(space), trials, seed, |rng| property.trial(Some(space), rng))
        })
        .collect()
}

/// Every property with `trials` trials per space kind.
pub fn property_suite(seed: u64, trials: usize) -> Vec<ScenarioReport> {
    Property::ALL.iter().flat_map(|&p| property_reports(p, trials, seed)).collect()
}

fn sigma(rng: &mut ChaCha8Rng) -> f64 {
    *SIGMAS.choose(rng).expect("non-empty")
}

/// An instance with between one and nine voters.
fn instance<'a>(space: &'a MetricSpace, rng: &mut ChaCha8Rng) -> Instance<'a> {
    let mut inst = Instance::draw(space, rng);
    if rng.random_bool(0.25) {
        let n = rng.random_range(1..=inst.votes.len());
        inst.votes.truncate(n);
    }
    inst
}

fn proposals(inst: &Instance, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut props = inst.votes.clone();
    for _ in 0..rng.random_range(0..=4) {
        props.push(inst.point(rng));
    }
    if rng.random_bool(0.2) {
        props.push(inst.s.clone());
    }
    props
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn metric_axioms(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let x = space.sample_point(rng, &[]);
    let y = if rng.random_bool(0.1) { x.clone() } else { space.sample_point(rng, &[]) };
    let z = space.sample_point(rng, &[x.clone(), y.clone()]);
    let d = |a: &Point, b: &Point| space.distance(a, b).expect("sampled points are valid");
    let (xy, yx, yz, xz) = (d(&x, &y), d(&y, &x), d(&y, &z), d(&x, &z));
    let tol = 1e-12 * (1.0 + xy + yz);
    let show = || format!("x={} y={} z={}", space.describe(&x), space.describe(&y), space.describe(&z));
    if xy != yx {
        return (true, Some(format!("{}: d(x,y)={xy} d(y,x)={yx}", show())));
    }
    if d(&x, &x) != 0.0 || (xy == 0.0) != (x == y) || xy < 0.0 {
        return (true, Some(format!("{}: d(x,y)={xy}", show())));
    }
    if xz > xy + yz + tol {
        return (true, Some(format!("{}: {xz} > {xy} + {yz}", show())));
    }
    (true, None)
}

fn support_equivalence(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let inst = instance(space, rng);
    let sigma = Threshold::new(sigma(rng)).expect("valid");
    let rule = Rule { aggregator: Aggregator::GeneralisedMedian, sigma };
    let p = inst.point(rng);
    let el = Electorate::new(space, &inst.s, &inst.votes).expect("valid profile");
    let scored = el.score(&p, &rule).expect("valid point");
    let positive = el.is_positive(scored.score);
    let counted = scored.utilities.iter().filter(|&&u| el.is_positive(u)).count() >= sigma.required(inst.votes.len());
    let supported = el.is_supported(&p, sigma).expect("valid point");
    let ok = positive == supported && supported == counted;
    (
        true,
        (!ok).then(|| {
            format!("{} sigma={sigma} p={}: score={} supported={supported}", inst.show(), space.describe(&p), scored.score)
        }),
    )
}

fn reality_awareness(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let inst = instance(space, rng);
    let rule = Rule::median(sigma(rng)).expect("valid");
    let props = proposals(&inst, rng);
    let el = Electorate::new(space, &inst.s, &inst.votes).expect("valid profile");
    let res = el.round_winner(&props, &rule).expect("valid proposals");
    let k = rule.sigma.required(inst.votes.len());
    let eligible: Vec<(&Point, f64)> = props
        .iter()
        .map(|p| (p, inst.phi(&inst.votes, p, &rule)))
        .filter(|(p, f)| *f > inst.tol && inst.support(&inst.votes, p) >= k)
        .collect();
    let show = || format!("{} sigma={}", inst.show(), rule.sigma);
    match (&res.winner, eligible.is_empty()) {
        (None, true) => {}
        (Some(w), true) => return (true, Some(format!("{}: {} won without support", show(), space.describe(w)))),
        (None, false) => return (true, Some(format!("{}: an eligible proposal lost to the status quo", show()))),
        (Some(w), false) => {
            let best = eligible.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
            let score = res.winning_score.unwrap_or(f64::NAN);
            if !eligible.iter().any(|(p, _)| *p == w) || !(score >= best - inst.tol) || *w == inst.s {
                return (true, Some(format!("{}: winner {} score {score} best {best}", show(), space.describe(w))));
            }
        }
    }
    if !eligible.is_empty() {
        return (true, None);
    }
    // The votes are among the proposals, so an epoch without public
    // proposals must keep the status quo.
    let config = EpochConfig::new(space.clone(), inst.s.clone(), rule).expect("valid config");
    let out = run_epoch(config, inst.votes.clone(), &mut []).expect("epoch without sources");
    let ok = out.outcome == inst.s && out.termination == Termination::Unsupported && out.winning_score.is_none();
    (true, (!ok).then(|| format!("{}: epoch moved to {}", show(), space.describe(&out.outcome))))
}

fn majoritarity(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let inst = instance(space, rng);
    let n = inst.votes.len();
    let sigma = if n % 2 == 1 { sigma(rng) } else { SIGMAS[1..].choose(rng).copied().expect("non-empty") };
    let rule = Rule::median(sigma).expect("valid");
    let k = rule.sigma.required(n);
    let w = inst.point(rng);
    if inst.space.distance(&w, &inst.s).expect("valid") <= inst.tol {
        return (false, None);
    }
    let mut votes = inst.votes.clone();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    for &i in &idx[..k + rng.random_range(0..=n - k)] {
        votes[i] = w.clone();
    }
    let mut props = votes.clone();
    for _ in 0..rng.random_range(0..=4) {
        props.push(inst.point(rng));
    }
    props.shuffle(rng);
    let el = Electorate::new(space, &inst.s, &votes).expect("valid profile");
    let checked = el.majoritarity_check(rule.sigma);
    let res = el.round_winner(&props, &rule).expect("valid proposals");
    let ok = checked.as_ref() == Some(&w) && res.winner.as_ref() == Some(&w);
    (
        true,
        (!ok).then(|| {
            format!(
                "s={} votes=[{}] sigma={sigma}: majority point {}, winner {:?}",
                space.describe(&inst.s),
                votes.iter().map(|v| space.describe(v)).collect::<Vec<_>>().join(" "),
                space.describe(&w),
                res.winner.as_ref().map(|p| space.describe(p))
            )
        }),
    )
}

fn anonymity(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let inst = instance(space, rng);
    let rule = if rng.random_bool(0.8) { Rule::median(sigma(rng)) } else { Rule::mean(0.5) }.expect("valid");
    let props = proposals(&inst, rng);
    let mut shuffled = inst.votes.clone();
    shuffled.shuffle(rng);
    let a = Electorate::new(space, &inst.s, &inst.votes).and_then(|e| e.round_winner(&props, &rule)).expect("valid");
    let b = Electorate::new(space, &inst.s, &shuffled).and_then(|e| e.round_winner(&props, &rule)).expect("valid");
    let tol = 1e-12 * (1.0 + a.scores.iter().map(|s| s.score.abs()).fold(0.0, f64::max));
    let same_scores = a.scores.iter().zip(&b.scores).all(|(x, y)| close(x.score, y.score, tol));
    let ok = same_scores && a.winner == b.winner;
    (true, (!ok).then(|| format!("{} {}: permuted votes change the round", inst.show(), rule.aggregator)))
}

fn aggregator_lipschitz(rng: &mut ChaCha8Rng) -> TrialResult {
    let n = rng.random_range(1..=12);
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let scale = if rng.random_bool(0.5) { 0.01 } else { 3.0 };
    let v: Vec<f64> = u
        .iter()
        .map(|x| if rng.random_bool(0.2) { *x } else { x + rng.random_range(-scale..scale) })
        .collect();
    let sup = u.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sigma = Threshold::new(sigma(rng)).expect("valid");
    for agg in [Aggregator::GeneralisedMedian, Aggregator::Mean] {
        let a = aggregate_score(agg, sigma, &u).expect("non-empty");
        let b = aggregate_score(agg, sigma, &v).expect("non-empty");
        if (a - b).abs() > sup + 1e-12 {
            return (true, Some(format!("{agg} sigma={sigma} u={u:?} v={v:?}: |{a} - {b}| > {sup}")));
        }
    }
    (true, None)
}

fn scalar_profile(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let integral = rng.random_bool(0.5);
    (0..n)
        .map(|_| if integral { rng.random_range(0..=20) as f64 } else { rng.random_range(0.0..=20.0) })
        .collect()
}

fn positional(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let n = rng.random_range(1..=9);
    let xs = scalar_profile(rng, n + 2);
    let (s, p, votes) = (xs[0], xs[1], &xs[2..]);
    let sigma = Threshold::new(sigma(rng)).expect("valid");
    let rule = Rule { aggregator: Aggregator::GeneralisedMedian, sigma };
    let pts: Vec<Point> = votes.iter().map(|&x| Point::Scalar(x)).collect();
    let sp = Point::Scalar(s);
    let el = Electorate::new(space, &sp, &pts).expect("valid profile");
    let score = el.score(&Point::Scalar(p), &rule).expect("valid").score;
    let expected = match positional_voter(votes, s, p, sigma) {
        Some(q) => (q - s).abs() - (q - p).abs(),
        None => 0.0,
    };
    (
        true,
        (!close(score, expected, 1e-12 * 20.0)).then(|| format!("s={s} p={p} votes={votes:?} sigma={sigma}: {score} vs {expected}")),
    )
}

fn zero_gap_1d(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let n = 2 * rng.random_range(0..=4) + 1;
    let xs = scalar_profile(rng, n + 1);
    let s = Point::Scalar(xs[0]);
    let votes: Vec<Point> = xs[1..].iter().map(|&x| Point::Scalar(x)).collect();
    let rule = Rule::median(0.5).expect("valid");
    let el = Electorate::new(space, &s, &votes).expect("valid profile");
    let rep = compromise_gap(&el, &rule, &GapConfig::default()).expect("gap");
    if rep.cg != 0.0 || rep.opt_method != OptMethod::ClosedForm1D {
        return (true, Some(format!("s={} votes={:?}: cg={}", xs[0], &xs[1..], rep.cg)));
    }
    // Independent scan: a fine grid plus every pairwise midpoint.
    let mut probes: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
    for a in &xs[1..] {
        for b in &xs[1..] {
            probes.push(0.5 * (a + b));
        }
    }
    let baseline = rep.baseline();
    for x in probes {
        let f = el.score(&Point::Scalar(x), &rule).expect("valid").score;
        if f > baseline + 1e-9 {
            return (true, Some(format!("s={} votes={:?}: {x} scores {f} > {baseline}", xs[0], &xs[1..])));
        }
    }
    (true, None)
}

fn bound(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let inst = instance(space, rng);
    let rule = Rule::median(sigma(rng)).expect("valid");
    let el = Electorate::new(space, &inst.s, &inst.votes).expect("valid profile");
    let rep = compromise_gap(&el, &rule, &GapConfig::default()).expect("gap");
    let tol = inst.tol.max(1e-12);
    let nearest = inst.votes.iter().map(|v| space.distance(&rep.opt_point, v).expect("valid")).fold(f64::INFINITY, f64::min);
    let vote_best = inst.votes.iter().map(|v| inst.phi(&inst.votes, v, &rule)).fold(f64::NEG_INFINITY, f64::max);
    let ok = rep.cg >= -tol
        && rep.cg <= rep.lipschitz_bound + tol
        && close(rep.lipschitz_bound, nearest, tol)
        && rep.opt_value >= vote_best.max(0.0) - tol;
    (
        true,
        (!ok).then(|| {
            format!(
                "{} sigma={}: opt={} at {} peak={} cg={} bound={}",
                inst.show(),
                rule.sigma,
                rep.opt_value,
                space.describe(&rep.opt_point),
                rep.peak_value,
                rep.cg,
                rep.lipschitz_bound
            )
        }),
    )
}

fn gating(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let inst = instance(space, rng);
    let rule = Rule::median(sigma(rng)).expect("valid");
    let props = proposals(&inst, rng);
    let config = HeuristicConfig { gate_at_status_quo: rng.random_bool(0.5), ..HeuristicConfig::default() };
    let el = Electorate::new(space, &inst.s, &inst.votes).expect("valid profile");
    let found = heuristic_p(&el, &props, &rule, &config).expect("heuristic");
    let mut gate = props.iter().map(|p| inst.phi(&inst.votes, p, &rule)).fold(f64::NEG_INFINITY, f64::max);
    if config.gate_at_status_quo {
        gate = gate.max(0.0);
    }
    let show = || format!("{} sigma={} gate={gate}", inst.show(), rule.sigma);
    match found {
        Some((c, score)) => {
            let recomputed = inst.phi(&inst.votes, &c, &rule);
            let ok = close(score, recomputed, 1e-12) && score > gate + inst.tol;
            (true, (!ok).then(|| format!("{}: returned {} scoring {score}", show(), space.describe(&c))))
        }
        None => {
            // No pairwise candidate may clear the gate.
            for p in &props {
                for q in &props {
                    if space.distance(p, q).expect("valid") == 0.0 {
                        continue;
                    }
                    for c in space.midpoint_candidates(p, q, config.cap).expect("distinct points") {
                        let f = inst.phi(&inst.votes, &c, &rule);
                        if f > gate + inst.tol {
                            return (true, Some(format!("{}: missed {} scoring {f}", show(), space.describe(&c))));
                        }
                    }
                }
            }
            (false, None)
        }
    }
}

fn termination(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let inst = instance(space, rng);
    let rule = Rule::median(sigma(rng)).expect("valid");
    let mut config = EpochConfig::new(space.clone(), inst.s.clone(), rule).expect("valid config");
    if matches!(space, MetricSpace::Scalar { .. } | MetricSpace::Simplex { .. }) && rng.random_bool(0.5) {
        config = config.with_epsilon(rng.random_range(0.01..0.5)).expect("positive");
    }
    let epsilon = config.epsilon;
    let mut sources: Vec<Box<dyn ProposalSource>> = Vec::new();
    let random = rng.random_bool(0.8);
    if random {
        sources.push(Box::new(RandomSource::new(rng.random(), rng.random_range(0.2..=1.0))));
    }
    if !random || rng.random_bool(0.5) {
        sources.push(Box::new(HeuristicSource::default()));
    }
    let show = || format!("{} sigma={} eps={epsilon}", inst.show(), rule.sigma);
    let out = match run_epoch(config, inst.votes.clone(), &mut sources) {
        Ok(out) => out,
        Err(e) => return (true, Some(format!("{}: {e}", show()))),
    };
    let d = |a: &Point, b: &Point| space.distance(a, b).expect("valid");
    for (i, a) in out.ledger.iter().enumerate() {
        for b in out.ledger[i + 1..].iter().chain(&inst.votes) {
            if d(a, b) < epsilon {
                return (true, Some(format!("{}: ledger entries {} and {} closer than eps", show(), space.describe(a), space.describe(b))));
            }
        }
    }
    // With submissions only, a new winner must score strictly higher.
    let submit_only = out.trace.iter().all(|e| !matches!(e, TraceEvent::Withdraw { .. } | TraceEvent::Update { .. }));
    if submit_only {
        for w in out.history.windows(2) {
            if let (Some(a), Some(b)) = (&w[0].winner, &w[1].winner) {
                let (sa, sb) = (w[0].winning_score.unwrap_or(0.0), w[1].winning_score.unwrap_or(0.0));
                if a != b && sb <= sa {
                    return (true, Some(format!("{}: winner changed with score {sa} -> {sb}", show())));
                }
            }
        }
    }
    (true, None)
}

fn channel(space: &MetricSpace, rng: &mut ChaCha8Rng) -> TrialResult {
    let inst = instance(space, rng);
    let rule = Rule::median(sigma(rng)).expect("valid");
    let props = proposals(&inst, rng);
    let c = inst.point(rng);
    let mut extended = props.clone();
    extended.push(c.clone());
    let el = Electorate::new(space, &inst.s, &inst.votes).expect("valid profile");
    let before = el.round_winner(&props, &rule).expect("valid");
    let after = el.round_winner(&extended, &rule).expect("valid");
    let unchanged = before.scores.iter().zip(&after.scores).all(|(a, b)| a.score == b.score);
    let ok = unchanged && (after.winner == before.winner || after.winner.as_ref() == Some(&c));
    (true, (!ok).then(|| format!("{} sigma={}: adding {} moved the winner elsewhere", inst.show(), rule.sigma, space.describe(&c))))
}
