//! Constitutional components and self-amendment.
//!
//! A [`Constitution`] is an immutable value. Every change goes through
//! [`ConstitutionHistory::amend`], which appends to the amendment log, so
//! each earlier version can be rebuilt by replaying the log from genesis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epoch::{run_epoch, EpochConfig, EpochError, EpochOutcome, ProposalSource};
use crate::governance::{Aggregator, Electorate, GovernanceError, Rule, Threshold};
use crate::metric::{MetricError, MetricSpace, Point, PointRepr};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmendmentError {
    #[error("unknown component {0:?}")]
    UnknownComponent(String),
    #[error("cannot parse component reference {0:?}")]
    BadReference(String),
    #[error("threshold vote {value} of member {index} is outside [1/2, 1)")]
    ThresholdVote { index: usize, value: f64 },
    #[error("invalid component {id:?}: {detail}")]
    InvalidComponent { id: String, detail: String },
    #[error("change {change} does not apply to {component}")]
    WrongChange { component: String, change: String },
    #[error("no amendment version {0}")]
    UnknownVersion(usize),
    #[error(transparent)]
    Epoch(#[from] EpochError),
    #[error(transparent)]
    Governance(#[from] GovernanceError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

// ---------------------------------------------------------------- h-rule

/// Candidate thresholds the h-rule considers besides the current one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HRuleMode {
    /// The distinct voted values.
    VotedValues,
    /// The voted values plus every multiple of [`DENSE_GRID_STEP`] in `[1/2, 1)`.
    DenseGrid,
}

impl fmt::Display for HRuleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HRuleMode::VotedValues => "voted_values",
            HRuleMode::DenseGrid => "dense_grid",
        })
    }
}

pub const DENSE_GRID_STEP: f64 = 0.05;

/// Slack for comparing thresholds that went through decimal notation.
const THRESHOLD_SLACK: f64 = 1e-12;

/// Candidate set for `mode`, sorted, without repeats.
pub fn h_rule_candidates(sigma: Threshold, votes: &[f64], mode: HRuleMode) -> Vec<f64> {
    let mut c: Vec<f64> = votes.to_vec();
    c.push(sigma.value());
    if mode == HRuleMode::DenseGrid {
        let steps = (0.5 / DENSE_GRID_STEP).round() as usize;
        c.extend((0..steps).map(|k| 0.5 + k as f64 * DENSE_GRID_STEP));
    }
    c.sort_by(f64::total_cmp);
    c.dedup_by(|a, b| (*a - *b).abs() <= THRESHOLD_SLACK);
    c
}

/// The h-rule for amending a threshold. Raises `sigma` to the largest
/// candidate `s' > sigma` such that at least `ceil(s' n)` members voted
/// `>= s'`; failing that, lowers it to the smallest candidate `s' < sigma`
/// such that at least `ceil(sigma n)` members voted `<= s'`; otherwise
/// keeps it.
pub fn h_rule(sigma: Threshold, votes: &[f64], mode: HRuleMode) -> Result<Threshold, AmendmentError> {
    if votes.is_empty() {
        return Err(GovernanceError::EmptyProfile.into());
    }
    if let Some((index, &value)) = votes.iter().enumerate().find(|(_, v)| !(0.5..1.0).contains(*v)) {
        return Err(AmendmentError::ThresholdVote { index, value });
    }
    let n = votes.len();
    let candidates = h_rule_candidates(sigma, votes, mode);
    let s = sigma.value();
    let raise = candidates.iter().rev().copied().filter(|&c| c > s + THRESHOLD_SLACK).find(|&c| {
        let at_least = votes.iter().filter(|&&v| v >= c - THRESHOLD_SLACK).count();
        at_least >= Threshold::new(c).expect("candidate in range").required(n)
    });
    if let Some(c) = raise {
        return Ok(Threshold::new(c)?);
    }
    let need = sigma.required(n);
    let lower = candidates
        .iter()
        .copied()
        .filter(|&c| c < s - THRESHOLD_SLACK)
        .find(|&c| votes.iter().filter(|&&v| v <= c + THRESHOLD_SLACK).count() >= need);
    Ok(lower.map(Threshold::new).transpose()?.unwrap_or(sigma))
}

// ------------------------------------------------------------ membership

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Admit,
    Retain,
    Reject,
}

/// Membership vote on the two-point space `{out, in}` with `d = 1`. The
/// status quo is `in` for a sitting member and `out` for a newcomer, who
/// must also consent.
pub fn membership_referendum(
    is_member: bool,
    in_votes: usize,
    n: usize,
    sigma: Threshold,
    consent: bool,
) -> Result<Verdict, AmendmentError> {
    if n == 0 || in_votes > n {
        return Err(AmendmentError::InvalidComponent {
            id: "membership".into(),
            detail: format!("{in_votes} in-votes among {n} members"),
        });
    }
    let space = MetricSpace::graph(["out", "in"], &[(0, 1, 1.0)])?;
    let (out, inside) = (Point::Node(0), Point::Node(1));
    let votes: Vec<Point> = (0..n).map(|i| if i < in_votes { inside.clone() } else { out.clone() }).collect();
    let s = if is_member { inside.clone() } else { out.clone() };
    let rule = Rule { aggregator: Aggregator::GeneralisedMedian, sigma };
    let el = Electorate::new(&space, &s, &votes)?;
    // a sitting member is removed only by a supermajority for "out"
    let result = el.round_winner(&[inside.clone(), out], &rule)?;
    let stays_in = match result.winner {
        Some(w) => w == inside,
        None => is_member,
    };
    Ok(match (is_member, stays_in) {
        (true, true) => Verdict::Retain,
        (false, true) if consent => Verdict::Admit,
        _ => Verdict::Reject,
    })
}

// ------------------------------------------------------------ components

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentClass {
    Ordinary,
    Constitutional,
}

/// A governed value together with the parameters that govern it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComponentDoc", into = "ComponentDoc")]
pub struct Component {
    pub space: MetricSpace,
    pub value: Point,
    pub rule: Rule,
    pub epsilon: f64,
    pub class: ComponentClass,
    /// Allows a constitutional component with `sigma <= 1/2`.
    pub low_sigma_override: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    space: MetricSpace,
    value: PointRepr,
    aggregator: Aggregator,
    sigma: Threshold,
    #[serde(default)]
    epsilon: Option<f64>,
    class: ComponentClass,
    #[serde(default)]
    low_sigma_override: bool,
}

impl TryFrom<ComponentDoc> for Component {
    type Error = AmendmentError;
    fn try_from(d: ComponentDoc) -> Result<Self, Self::Error> {
        let value = d.space.decode(&d.value)?;
        let epsilon = d.epsilon.unwrap_or_else(|| d.space.default_novelty());
        let c = Component {
            space: d.space,
            value,
            rule: Rule { aggregator: d.aggregator, sigma: d.sigma },
            epsilon,
            class: d.class,
            low_sigma_override: d.low_sigma_override,
        };
        c.check("component")?;
        Ok(c)
    }
}

impl From<Component> for ComponentDoc {
    fn from(c: Component) -> Self {
        ComponentDoc {
            value: c.space.encode(&c.value).expect("validated component"),
            space: c.space,
            aggregator: c.rule.aggregator,
            sigma: c.rule.sigma,
            epsilon: Some(c.epsilon),
            class: c.class,
            low_sigma_override: c.low_sigma_override,
        }
    }
}

impl Component {
    pub fn new(space: MetricSpace, value: Point, rule: Rule, class: ComponentClass) -> Result<Self, AmendmentError> {
        let epsilon = space.default_novelty();
        let c = Component { space, value, rule, epsilon, class, low_sigma_override: false };
        c.check("component")?;
        Ok(c)
    }

    fn check(&self, id: &str) -> Result<(), AmendmentError> {
        let bad = |detail: String| AmendmentError::InvalidComponent { id: id.to_string(), detail };
        self.space.ensure_valid(&self.value).map_err(|e| bad(e.to_string()))?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(bad(format!("novelty distance {} is not positive", self.epsilon)));
        }
        if self.class == ComponentClass::Constitutional && self.rule.sigma.value() <= 0.5 && !self.low_sigma_override {
            return Err(bad("constitutional components need sigma > 1/2 unless overridden".into()));
        }
        Ok(())
    }

    /// Epoch configuration for amending the value.
    pub fn epoch_config(&self) -> Result<EpochConfig, EpochError> {
        EpochConfig::new(self.space.clone(), self.value.clone(), self.rule)?.with_epsilon(self.epsilon)
    }
}

/// What an amendment targets: a component's value, one of its framework
/// parameters, or the membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentRef {
    Value(String),
    Sigma(String),
    Aggregator(String),
    Space(String),
    Epsilon(String),
    Membership,
}

impl ComponentRef {
    pub fn component(&self) -> Option<&str> {
        match self {
            ComponentRef::Value(id)
            | ComponentRef::Sigma(id)
            | ComponentRef::Aggregator(id)
            | ComponentRef::Space(id)
            | ComponentRef::Epsilon(id) => Some(id),
            ComponentRef::Membership => None,
        }
    }
}

impl fmt::Display for ComponentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentRef::Value(id) => write!(f, "{id}"),
            ComponentRef::Sigma(id) => write!(f, "sigma:{id}"),
            ComponentRef::Aggregator(id) => write!(f, "aggregator:{id}"),
            ComponentRef::Space(id) => write!(f, "space:{id}"),
            ComponentRef::Epsilon(id) => write!(f, "epsilon:{id}"),
            ComponentRef::Membership => write!(f, "membership"),
        }
    }
}

impl FromStr for ComponentRef {
    type Err = AmendmentError;
    /// `budget`, `sigma:budget`, `aggregator:budget`, `space:budget`,
    /// `epsilon:budget` or `membership`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AmendmentError::BadReference(s.to_string());
        if s == "membership" {
            return Ok(ComponentRef::Membership);
        }
        let r = match s.split_once(':') {
            None => ComponentRef::Value(s.to_string()),
            Some(("sigma", id)) => ComponentRef::Sigma(id.to_string()),
            Some(("aggregator", id)) => ComponentRef::Aggregator(id.to_string()),
            Some(("space", id)) => ComponentRef::Space(id.to_string()),
            Some(("epsilon", id)) => ComponentRef::Epsilon(id.to_string()),
            Some(_) => return Err(bad()),
        };
        if r.component().is_some_and(|id| id.is_empty() || id.contains(':')) {
            return Err(bad());
        }
        Ok(r)
    }
}

impl Serialize for ComponentRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ComponentRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A change to one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Change {
    Value { value: PointRepr },
    Sigma { sigma: Threshold },
    Aggregator { aggregator: Aggregator },
    Epsilon { epsilon: f64 },
    /// A new space needs a new value inside it.
    Space { space: MetricSpace, value: PointRepr },
    Membership { member: String, admitted: bool },
}

impl Change {
    fn label(&self) -> &'static str {
        match self {
            Change::Value { .. } => "value",
            Change::Sigma { .. } => "sigma",
            Change::Aggregator { .. } => "aggregator",
            Change::Epsilon { .. } => "epsilon",
            Change::Space { .. } => "space",
            Change::Membership { .. } => "membership",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constitution {
    pub components: BTreeMap<String, Component>,
    pub membership: BTreeSet<String>,
    /// Threshold for amending framework parameters and membership.
    pub constitutional_sigma: Threshold,
}

impl Constitution {
    pub fn new(members: impl IntoIterator<Item = impl Into<String>>, constitutional_sigma: Threshold) -> Self {
        Constitution {
            components: BTreeMap::new(),
            membership: members.into_iter().map(Into::into).collect(),
            constitutional_sigma,
        }
    }

    pub fn with_component(mut self, id: &str, c: Component) -> Result<Self, AmendmentError> {
        if id.is_empty() || id.contains(':') || id == "membership" {
            return Err(AmendmentError::BadReference(id.to_string()));
        }
        c.check(id)?;
        self.components.insert(id.to_string(), c);
        Ok(self)
    }

    pub fn component(&self, id: &str) -> Result<&Component, AmendmentError> {
        self.components.get(id).ok_or_else(|| AmendmentError::UnknownComponent(id.to_string()))
    }

    /// Ordinary or constitutional. Values carry their stored class; the
    /// framework parameters and the membership are always constitutional.
    pub fn classify_component(&self, r: &ComponentRef) -> Result<ComponentClass, AmendmentError> {
        match r {
            ComponentRef::Value(id) => Ok(self.component(id)?.class),
            ComponentRef::Membership => Ok(ComponentClass::Constitutional),
            other => {
                self.component(other.component().expect("named component"))?;
                Ok(ComponentClass::Constitutional)
            }
        }
    }

    /// The current setting of `r`, as a change that would restore it.
    pub fn current(&self, r: &ComponentRef) -> Result<Change, AmendmentError> {
        if *r == ComponentRef::Membership {
            return Err(AmendmentError::WrongChange { component: r.to_string(), change: "snapshot".into() });
        }
        let c = self.component(r.component().expect("named component"))?;
        Ok(match r {
            ComponentRef::Value(_) => Change::Value { value: c.space.encode(&c.value)? },
            ComponentRef::Sigma(_) => Change::Sigma { sigma: c.rule.sigma },
            ComponentRef::Aggregator(_) => Change::Aggregator { aggregator: c.rule.aggregator },
            ComponentRef::Epsilon(_) => Change::Epsilon { epsilon: c.epsilon },
            ComponentRef::Space(_) => Change::Space { space: c.space.clone(), value: c.space.encode(&c.value)? },
            ComponentRef::Membership => unreachable!(),
        })
    }

    /// A new constitution with `change` applied to `r`; `self` is untouched.
    pub fn apply(&self, r: &ComponentRef, change: &Change) -> Result<Constitution, AmendmentError> {
        let mut next = self.clone();
        let wrong = || AmendmentError::WrongChange { component: r.to_string(), change: change.label().into() };
        if let (ComponentRef::Membership, Change::Membership { member, admitted }) = (r, change) {
            if *admitted {
                next.membership.insert(member.clone());
            } else {
                next.membership.remove(member);
            }
            return Ok(next);
        }
        let id = r.component().ok_or_else(wrong)?;
        let c = next.components.get_mut(id).ok_or_else(|| AmendmentError::UnknownComponent(id.to_string()))?;
        match (r, change) {
            (ComponentRef::Value(_), Change::Value { value }) => c.value = c.space.decode(value)?,
            (ComponentRef::Sigma(_), Change::Sigma { sigma }) => c.rule.sigma = *sigma,
            (ComponentRef::Aggregator(_), Change::Aggregator { aggregator }) => c.rule.aggregator = *aggregator,
            (ComponentRef::Epsilon(_), Change::Epsilon { epsilon }) => c.epsilon = *epsilon,
            (ComponentRef::Space(_), Change::Space { space, value }) => {
                c.value = space.decode(value)?;
                c.space = space.clone();
            }
            _ => return Err(wrong()),
        }
        c.check(id)?;
        Ok(next)
    }

    /// Sets a component's value to an epoch outcome.
    pub fn amend_component(&self, r: &ComponentRef, outcome: &Point) -> Result<Constitution, AmendmentError> {
        let ComponentRef::Value(id) = r else {
            return Err(AmendmentError::WrongChange { component: r.to_string(), change: "value".into() });
        };
        let c = self.component(id)?;
        self.apply(r, &Change::Value { value: c.space.encode(outcome)? })
    }
}

// ---------------------------------------------------------------- history

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amendment {
    /// Version produced by this amendment; genesis is version 0.
    pub version: usize,
    pub component: ComponentRef,
    /// Absent for membership changes.
    pub old: Option<Change>,
    pub new: Change,
    /// Where the deciding epoch trace is kept, if any.
    pub trace: Option<String>,
}

/// Genesis constitution plus an append-only amendment log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstitutionHistory {
    genesis: Constitution,
    log: Vec<Amendment>,
    #[serde(skip)]
    current: Option<Constitution>,
}

impl ConstitutionHistory {
    pub fn new(genesis: Constitution) -> Self {
        ConstitutionHistory { current: Some(genesis.clone()), genesis, log: Vec::new() }
    }

    pub fn current(&self) -> Constitution {
        match &self.current {
            Some(c) => c.clone(),
            None => self.version(self.log.len()).expect("log replays"),
        }
    }

    pub fn log(&self) -> &[Amendment] {
        &self.log
    }

    /// Rebuilds version `k` from genesis and the first `k` amendments.
    pub fn version(&self, k: usize) -> Result<Constitution, AmendmentError> {
        if k > self.log.len() {
            return Err(AmendmentError::UnknownVersion(k));
        }
        self.log[..k].iter().try_fold(self.genesis.clone(), |c, a| c.apply(&a.component, &a.new))
    }

    pub fn amend(&mut self, r: ComponentRef, change: Change, trace: Option<String>) -> Result<&Amendment, AmendmentError> {
        let now = self.current();
        let old = match r {
            ComponentRef::Membership => None,
            _ => Some(now.current(&r)?),
        };
        let next = now.apply(&r, &change)?;
        self.log.push(Amendment { version: self.log.len() + 1, component: r, old, new: change, trace });
        self.current = Some(next);
        Ok(self.log.last().expect("just pushed"))
    }

    /// Runs an epoch on a component value and records its outcome.
    pub fn amend_by_epoch(
        &mut self,
        id: &str,
        votes: Vec<Point>,
        sources: &mut [Box<dyn ProposalSource>],
        trace: Option<String>,
    ) -> Result<EpochOutcome, AmendmentError> {
        let c = self.current().component(id)?.clone();
        let out = run_epoch(c.epoch_config()?, votes, sources)?;
        self.amend(ComponentRef::Value(id.to_string()), Change::Value { value: c.space.encode(&out.outcome)? }, trace)?;
        Ok(out)
    }

    /// Applies the h-rule to a component's threshold.
    pub fn amend_sigma(&mut self, id: &str, votes: &[f64], mode: HRuleMode) -> Result<Threshold, AmendmentError> {
        let sigma = self.current().component(id)?.rule.sigma;
        let next = h_rule(sigma, votes, mode)?;
        self.amend(ComponentRef::Sigma(id.to_string()), Change::Sigma { sigma: next }, None)?;
        Ok(next)
    }

    /// Elects a component's aggregator among the supported ones, treated as
    /// a plurality choice at the constitutional threshold.
    pub fn amend_aggregator(&mut self, id: &str, votes: &[Aggregator]) -> Result<Aggregator, AmendmentError> {
        let now = self.current();
        let current = now.component(id)?.rule.aggregator;
        let names = [Aggregator::GeneralisedMedian, Aggregator::Mean];
        let space = MetricSpace::plurality(names.map(|a| a.to_string()))?;
        let at = |a: Aggregator| Point::Candidate(names.iter().position(|&x| x == a));
        let rule = Rule { aggregator: Aggregator::GeneralisedMedian, sigma: now.constitutional_sigma };
        let config = EpochConfig::new(space, at(current), rule)?;
        let out = run_epoch(config, votes.iter().map(|&a| at(a)).collect(), &mut [])?;
        let Point::Candidate(Some(k)) = out.outcome else { unreachable!("status quo is a candidate") };
        self.amend(ComponentRef::Aggregator(id.to_string()), Change::Aggregator { aggregator: names[k] }, None)?;
        Ok(names[k])
    }

    /// Amends a novelty distance as a 1D value at the constitutional
    /// threshold, over `[0, max]` of the current value and the votes.
    pub fn amend_epsilon(&mut self, id: &str, votes: &[f64]) -> Result<f64, AmendmentError> {
        let now = self.current();
        let current = now.component(id)?.epsilon;
        let hi = votes.iter().copied().fold(current, f64::max);
        let space = MetricSpace::scalar(0.0, hi)?;
        let rule = Rule { aggregator: Aggregator::GeneralisedMedian, sigma: now.constitutional_sigma };
        let config = EpochConfig::new(space, Point::Scalar(current), rule)?;
        let out = run_epoch(config, votes.iter().map(|&v| Point::Scalar(v)).collect(), &mut [])?;
        let eps = out.outcome.as_scalar().expect("scalar outcome");
        self.amend(ComponentRef::Epsilon(id.to_string()), Change::Epsilon { epsilon: eps }, None)?;
        Ok(eps)
    }

    /// Membership referendum at the constitutional threshold.
    pub fn referendum(&mut self, candidate: &str, in_votes: usize, consent: bool) -> Result<Verdict, AmendmentError> {
        let now = self.current();
        let is_member = now.membership.contains(candidate);
        let verdict = membership_referendum(is_member, in_votes, now.membership.len(), now.constitutional_sigma, consent)?;
        let admitted = matches!(verdict, Verdict::Admit | Verdict::Retain);
        if admitted != is_member {
            self.amend(
                ComponentRef::Membership,
                Change::Membership { member: candidate.to_string(), admitted },
                None,
            )?;
        }
        Ok(verdict)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(x: f64) -> Threshold {
        Threshold::new(x).unwrap()
    }

    #[test]
    fn h_rule_examples() {
        let votes = [0.5, 0.5, 2.0 / 3.0, 2.0 / 3.0, 0.75];
        assert_eq!(h_rule(t(0.5), &votes, HRuleMode::VotedValues).unwrap(), t(0.5));
        assert_eq!(h_rule(t(0.5), &votes, HRuleMode::DenseGrid).unwrap(), t(0.6));
        let lower = [0.5, 0.5, 0.5, 0.5, 0.75];
        assert_eq!(h_rule(t(2.0 / 3.0), &lower, HRuleMode::VotedValues).unwrap(), t(0.5));
        assert_eq!(h_rule(t(0.6), &[0.6; 4], HRuleMode::DenseGrid).unwrap(), t(0.6));
        assert_eq!(
            h_rule(t(0.5), &[0.5, 1.0], HRuleMode::VotedValues),
            Err(AmendmentError::ThresholdVote { index: 1, value: 1.0 })
        );
    }

    #[test]
    fn referendum_examples() {
        let s = t(2.0 / 3.0);
        assert_eq!(membership_referendum(false, 4, 5, s, true).unwrap(), Verdict::Admit);
        assert_eq!(membership_referendum(false, 4, 5, s, false).unwrap(), Verdict::Reject);
        assert_eq!(membership_referendum(false, 3, 5, s, true).unwrap(), Verdict::Reject);
        assert_eq!(membership_referendum(true, 2, 5, s, false).unwrap(), Verdict::Retain);
        assert_eq!(membership_referendum(true, 1, 5, s, false).unwrap(), Verdict::Reject);
    }

    fn budget() -> Constitution {
        let c = Component::new(
            MetricSpace::simplex(3).unwrap(),
            Point::Vector(vec![0.4, 0.4, 0.2]),
            Rule::median(0.5).unwrap(),
            ComponentClass::Ordinary,
        )
        .unwrap();
        Constitution::new(["a", "b", "c", "d", "e"], t(2.0 / 3.0)).with_component("budget", c).unwrap()
    }

    #[test]
    fn classification() {
        let c = budget();
        let class = |s: &str| c.classify_component(&s.parse().unwrap()).unwrap();
        assert_eq!(class("budget"), ComponentClass::Ordinary);
        assert_eq!(class("sigma:budget"), ComponentClass::Constitutional);
        assert_eq!(class("membership"), ComponentClass::Constitutional);
        assert!(matches!(c.classify_component(&"rent".parse().unwrap()), Err(AmendmentError::UnknownComponent(_))));
    }

    #[test]
    fn history_replays() {
        let mut h = ConstitutionHistory::new(budget());
        h.amend_sigma("budget", &[0.5, 0.5, 2.0 / 3.0, 2.0 / 3.0, 0.75], HRuleMode::DenseGrid).unwrap();
        h.amend_aggregator("budget", &[Aggregator::Mean; 5]).unwrap();
        h.amend(
            "budget".parse().unwrap(),
            Change::Value { value: PointRepr::Numbers(vec![0.34, 0.4, 0.26]) },
            Some("epoch-1.jsonl".into()),
        )
        .unwrap();
        assert_eq!(h.referendum("f", 4, true).unwrap(), Verdict::Admit);
        let now = h.current();
        assert_eq!(now.component("budget").unwrap().rule, Rule::mean(0.6).unwrap());
        assert!(now.membership.contains("f"));
        assert_eq!(h.version(0).unwrap(), budget());
        assert_eq!(h.version(4).unwrap(), now);
        assert_eq!(h.version(1).unwrap().component("budget").unwrap().rule.sigma, t(0.6));

        let json = serde_json::to_string(&h).unwrap();
        let back: ConstitutionHistory = serde_json::from_str(&json).unwrap();
        assert_eq!(back.current(), now);
    }

    #[test]
    fn constitutional_components_need_a_supermajority() {
        let bylaws = Component::new(
            MetricSpace::strings("ab", 4).unwrap(),
            Point::Text("ab".into()),
            Rule::median(0.5).unwrap(),
            ComponentClass::Constitutional,
        );
        assert!(matches!(bylaws, Err(AmendmentError::InvalidComponent { .. })));
    }
}
