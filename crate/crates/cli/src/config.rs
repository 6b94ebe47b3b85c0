//! Experiment configuration documents (TOML).
//!
//! ```toml
//! name = "rate"
//!
//! [components.rate]
//! space = { kind = "scalar", lo = 0.0, hi = 100.0 }
//! status_quo = 20.0
//! sigma = 0.5
//!
//! [profiles.members]
//! component = "rate"
//! votes = [10.0, 15.0, 18.0, 22.0, 25.0]
//!
//! [epoch]
//! profile = "members"
//! sources = [{ kind = "geometric_median" }]
//! ```
//!
//! Points use the same encodings as traces: numbers, lists of numbers,
//! 1-based rankings, lists of element names, text, or labels.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use metgov_core::amendment::HRuleMode;
use metgov_core::epoch::{
    Action, EpochConfig, GeometricMedianSource, HeuristicSource, ProposalSource, RandomSource, ScriptedSource,
    Termination,
};
use metgov_core::gap::{GapConfig, HeuristicConfig, OptMethod, PairScan};
use metgov_core::sim::{Setting, StatusQuoPolicy, SweepConfig, HEADLINE_ROWS, REFERENCE_ROWS};
use metgov_core::{Aggregator, MetricSpace, Point, PointRepr, Rule, Threshold};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub description: Option<String>,
    #[serde(default)]
    pub components: BTreeMap<String, ComponentSpec>,
    #[serde(default)]
    pub profiles: BTreeMap<String, ProfileSpec>,
    pub epoch: Option<EpochSpec>,
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub space: MetricSpace,
    pub status_quo: PointRepr,
    pub sigma: Threshold,
    #[serde(default = "default_aggregator")]
    pub aggregator: Aggregator,
    pub epsilon: Option<f64>,
    pub max_rounds: Option<usize>,
}

fn default_aggregator() -> Aggregator {
    Aggregator::GeneralisedMedian
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub component: String,
    pub votes: Vec<PointRepr>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochSpec {
    pub profile: String,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    GeometricMedian,
    Heuristic {
        #[serde(default)]
        unordered: bool,
    },
    /// Needs `--seed`; the source stream is derived from it.
    Random {
        rate: f64,
    },
    Scripted {
        #[serde(default = "scripted_name")]
        name: String,
        actions: Vec<ScriptedAction>,
    },
}

fn scripted_name() -> String {
    "scripted".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedAction {
    pub round: usize,
    pub action: ActionKind,
    pub member: usize,
    pub point: Option<PointRepr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Submit,
    Update,
    Withdraw,
}

impl SourceSpec {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, SourceSpec::Random { .. })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RowSelection {
    /// `"headline"` or `"full"`.
    Named(String),
    Explicit(Vec<RowSpec>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub setting: Setting,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub rows: RowSelection,
    pub profiles: usize,
    #[serde(default = "half")]
    pub sigma: Threshold,
    #[serde(default = "canonical")]
    pub status_quo: StatusQuoPolicy,
}

fn half() -> Threshold {
    Threshold::HALF
}

fn canonical() -> StatusQuoPolicy {
    StatusQuoPolicy::Canonical
}

impl SweepSpec {
    pub fn rows(&self) -> Result<Vec<RowSpec>, CliError> {
        let reference = |idx: &mut dyn Iterator<Item = usize>| {
            idx.map(|i| RowSpec { setting: REFERENCE_ROWS[i].setting, n: REFERENCE_ROWS[i].n }).collect()
        };
        let rows: Vec<RowSpec> = match &self.rows {
            RowSelection::Named(s) if s == "headline" => reference(&mut HEADLINE_ROWS.iter().copied()),
            RowSelection::Named(s) if s == "full" => reference(&mut (0..REFERENCE_ROWS.len())),
            RowSelection::Named(s) => {
                return Err(CliError::Config(format!("unknown row set {s:?}; use \"headline\" or \"full\"")))
            }
            RowSelection::Explicit(r) => r.clone(),
        };
        if rows.is_empty() {
            return Err(CliError::Config("the sweep selects no rows".into()));
        }
        Ok(rows)
    }

    pub fn configs(&self, seed: u64) -> Result<Vec<SweepConfig>, CliError> {
        if self.profiles == 0 {
            return Err(CliError::Config("sweep.profiles must be positive".into()));
        }
        self.rows()?
            .into_iter()
            .map(|r| {
                let mut c = SweepConfig::new(r.setting, r.n, self.profiles, seed);
                c.sigma = self.sigma;
                c.status_quo = self.status_quo;
                c.validate().map_err(CliError::config)?;
                Ok(c)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// One round over the votes, or over `proposals` when given.
    Round {
        name: String,
        profile: String,
        proposals: Option<Vec<PointRepr>>,
        /// `None` expects the status quo to stand.
        winner: Option<PointRepr>,
        #[serde(default)]
        no_winner: bool,
        winning_score: Option<f64>,
        /// Scores of the proposals, in order.
        scores: Option<Vec<f64>>,
        #[serde(default = "tight")]
        tolerance: f64,
    },
    Epoch {
        name: String,
        profile: String,
        #[serde(default)]
        sources: Vec<SourceSpec>,
        outcome: Option<PointRepr>,
        rounds: Option<usize>,
        termination: Option<Termination>,
        /// The outcome's score must exceed every peak's.
        #[serde(default)]
        beats_peaks: bool,
        #[serde(default = "tight")]
        tolerance: f64,
    },
    Gap {
        name: String,
        profile: String,
        opt: Option<f64>,
        peak: Option<f64>,
        cg: Option<f64>,
        lipschitz_bound: Option<f64>,
        opt_point: Option<PointRepr>,
        #[serde(default)]
        method: Option<OptMethod>,
        #[serde(default = "tight")]
        tolerance: f64,
    },
    /// `member` reports `report` instead of their vote.
    Misreport {
        name: String,
        profile: String,
        member: usize,
        report: PointRepr,
        sincere_winner: Option<PointRepr>,
        #[serde(default)]
        sincere_no_winner: bool,
        misreport_winner: Option<PointRepr>,
        /// Utilities for the misreport winner under the reported votes.
        utilities: Option<Vec<f64>>,
        score: Option<f64>,
        /// Whether the member is better off by their true vote.
        gains: Option<bool>,
        #[serde(default = "tight")]
        tolerance: f64,
    },
    /// `member` changes their vote to `to`; scores of `watch` before and
    /// after.
    Move {
        name: String,
        profile: String,
        member: usize,
        to: PointRepr,
        watch: Vec<PointRepr>,
        before: Vec<f64>,
        after: Vec<f64>,
        winner_before: Option<PointRepr>,
        winner_after: Option<PointRepr>,
        #[serde(default = "tight")]
        tolerance: f64,
    },
    HRule {
        name: String,
        sigma: f64,
        votes: Vec<f64>,
        mode: HRuleMode,
        expect: f64,
        #[serde(default = "tight")]
        tolerance: f64,
    },
}

fn tight() -> f64 {
    1e-9
}

impl Check {
    pub fn name(&self) -> &str {
        match self {
            Check::Round { name, .. }
            | Check::Epoch { name, .. }
            | Check::Gap { name, .. }
            | Check::Misreport { name, .. }
            | Check::Move { name, .. }
            | Check::HRule { name, .. } => name,
        }
    }

    fn profile(&self) -> Option<&str> {
        match self {
            Check::Round { profile, .. }
            | Check::Epoch { profile, .. }
            | Check::Gap { profile, .. }
            | Check::Misreport { profile, .. }
            | Check::Move { profile, .. } => Some(profile),
            Check::HRule { .. } => None,
        }
    }
}

/// A profile with its component, decoded.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub space: MetricSpace,
    pub status_quo: Point,
    pub rule: Rule,
    pub epsilon: Option<f64>,
    pub max_rounds: Option<usize>,
    pub votes: Vec<Point>,
}

impl Resolved {
    pub fn decode(&self, r: &PointRepr) -> Result<Point, CliError> {
        self.space.decode(r).map_err(CliError::config)
    }

    pub fn epoch_config(&self) -> Result<EpochConfig, CliError> {
        let mut c = EpochConfig::new(self.space.clone(), self.status_quo.clone(), self.rule).map_err(CliError::config)?;
        if let Some(e) = self.epsilon {
            c = c.with_epsilon(e).map_err(CliError::config)?;
        }
        if let Some(m) = self.max_rounds {
            c = c.with_max_rounds(m).map_err(CliError::config)?;
        }
        Ok(c)
    }

    pub fn gap_config(&self, method: Option<OptMethod>) -> GapConfig {
        GapConfig { method, ..GapConfig::default() }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let c: ExperimentConfig = toml::from_str(text).map_err(CliError::config)?;
        c.validate()?;
        Ok(c)
    }

    /// Every reference resolves and every profile decodes.
    pub fn validate(&self) -> Result<(), CliError> {
        for name in self.profiles.keys() {
            self.profile(name)?;
        }
        if let Some(e) = &self.epoch {
            self.profile(&e.profile)?;
        }
        for c in &self.checks {
            if let Some(p) = c.profile() {
                self.profile(p).map_err(|e| CliError::Config(format!("check {:?}: {e}", c.name())))?;
            }
        }
        Ok(())
    }

    pub fn profile(&self, name: &str) -> Result<Resolved, CliError> {
        let p = self.profiles.get(name).ok_or_else(|| CliError::Config(format!("unknown profile {name:?}")))?;
        let c = self
            .components
            .get(&p.component)
            .ok_or_else(|| CliError::Config(format!("profile {name:?} names unknown component {:?}", p.component)))?;
        if p.votes.is_empty() {
            return Err(CliError::Config(format!("profile {name:?} has no votes")));
        }
        let status_quo = c
            .space
            .decode(&c.status_quo)
            .map_err(|e| CliError::Config(format!("component {:?} status quo: {e}", p.component)))?;
        let votes = p
            .votes
            .iter()
            .enumerate()
            .map(|(i, v)| c.space.decode(v).map_err(|e| CliError::Config(format!("profile {name:?} vote {i}: {e}"))))
            .collect::<Result<_, _>>()?;
        Ok(Resolved {
            space: c.space.clone(),
            status_quo,
            rule: Rule { aggregator: c.aggregator, sigma: c.sigma },
            epsilon: c.epsilon,
            max_rounds: c.max_rounds,
            votes,
        })
    }

    /// Directory of the document, for relative output paths.
    pub fn base_dir(path: &Path) -> PathBuf {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    }
}

/// Builds the sources. Random sources need `seed`; the `k`-th one uses
/// `seed + k`.
pub fn build_sources(
    specs: &[SourceSpec],
    space: &MetricSpace,
    seed: Option<u64>,
) -> Result<Vec<Box<dyn ProposalSource>>, CliError> {
    let mut out: Vec<Box<dyn ProposalSource>> = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        out.push(match spec {
            SourceSpec::GeometricMedian => Box::new(GeometricMedianSource::default()),
            SourceSpec::Heuristic { unordered } => {
                let scan = if *unordered { PairScan::Unordered } else { PairScan::Ordered };
                Box::new(HeuristicSource::new(HeuristicConfig { scan, ..HeuristicConfig::default() }))
            }
            SourceSpec::Random { rate } => {
                let seed = seed.ok_or_else(|| CliError::Config("a random source needs --seed".into()))?;
                if !(0.0..=1.0).contains(rate) {
                    return Err(CliError::Config(format!("random source rate {rate} is outside [0, 1]")));
                }
                Box::new(RandomSource::new(seed.wrapping_add(k as u64), *rate))
            }
            SourceSpec::Scripted { name, actions } => {
                let script = actions
                    .iter()
                    .map(|a| {
                        let point = |r: &Option<PointRepr>| -> Result<Point, CliError> {
                            let r = r.as_ref().ok_or_else(|| CliError::Config("scripted action needs a point".into()))?;
                            space.decode(r).map_err(CliError::config)
                        };
                        let action = match a.action {
                            ActionKind::Submit => Action::Submit { member: a.member, point: point(&a.point)? },
                            ActionKind::Update => Action::Update { member: a.member, point: point(&a.point)? },
                            ActionKind::Withdraw => Action::Withdraw { member: a.member },
                        };
                        Ok((a.round, action))
                    })
                    .collect::<Result<_, CliError>>()?;
                Box::new(ScriptedSource { name: name.clone(), script })
            }
        });
    }
    Ok(out)
}
