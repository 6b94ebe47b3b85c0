//! Fixture checks: each compares computed values with expected ones.

use metgov_core::amendment::h_rule;
use metgov_core::epoch::run_epoch;
use metgov_core::gap::{compromise_gap, peak};
use metgov_core::{Electorate, MetricSpace, Point, PointRepr, Threshold};
use serde::Serialize;

use crate::config::{build_sources, Check, ExperimentConfig, Resolved};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub fixture: String,
    pub check: String,
    pub passed: bool,
    /// Mismatches, or a short summary when the check passed.
    pub detail: String,
}

/// Collects mismatches for one check.
struct Compare<'a> {
    space: Option<&'a MetricSpace>,
    tol: f64,
    notes: Vec<String>,
    summary: Vec<String>,
}

impl<'a> Compare<'a> {
    fn new(space: Option<&'a MetricSpace>, tol: f64) -> Self {
        Compare { space, tol, notes: Vec::new(), summary: Vec::new() }
    }

    fn num(&mut self, what: &str, got: f64, want: Option<f64>) {
        self.summary.push(format!("{what}={got:.6}"));
        if let Some(w) = want {
            if (got - w).abs() > self.tol || got.is_nan() {
                self.notes.push(format!("{what}: expected {w} (+/-{}), got {got:.6}", self.tol));
            }
        }
    }

    fn nums(&mut self, what: &str, got: &[f64], want: Option<&Vec<f64>>) {
        if let Some(w) = want {
            let ok = got.len() == w.len() && got.iter().zip(w).all(|(a, b)| (a - b).abs() <= self.tol);
            if !ok {
                self.notes.push(format!("{what}: expected {w:?}, got {got:?}"));
            }
        }
    }

    fn show(&self, p: &Point) -> String {
        self.space.map_or_else(|| format!("{p:?}"), |s| s.describe(p))
    }

    /// `want = None` means the status quo should stand.
    fn winner(&mut self, what: &str, got: Option<&Point>, want: Option<&Point>) {
        let shown = got.map_or_else(|| "status quo".to_string(), |p| self.show(p));
        self.summary.push(format!("{what}={shown}"));
        let space = self.space.expect("winner checks carry a space");
        let ok = match (got, want) {
            (None, None) => true,
            (Some(g), Some(w)) => space.distance(g, w).is_ok_and(|d| d <= self.tol),
            _ => false,
        };
        if !ok {
            let expected = want.map_or_else(|| "status quo".to_string(), |p| self.show(p));
            self.notes.push(format!("{what}: expected {expected}, got {shown}"));
        }
    }

    fn flag(&mut self, what: &str, got: bool, want: bool) {
        if got != want {
            self.notes.push(format!("{what}: expected {want}, got {got}"));
        }
    }

    fn finish(self) -> (bool, String) {
        if self.notes.is_empty() {
            (true, self.summary.join(" "))
        } else {
            (false, self.notes.join("; "))
        }
    }
}

fn expected_winner(
    r: &Resolved,
    point: &Option<PointRepr>,
    none: bool,
) -> Result<Option<Option<Point>>, CliError> {
    match (point, none) {
        (Some(_), true) => Err(CliError::Config("a check cannot expect both a winner and no winner".into())),
        (Some(p), false) => Ok(Some(Some(r.decode(p)?))),
        (None, true) => Ok(Some(None)),
        (None, false) => Ok(None),
    }
}

fn electorate<'a>(r: &'a Resolved, votes: &'a [Point]) -> Result<Electorate<'a>, CliError> {
    Electorate::new(&r.space, &r.status_quo, votes).map_err(CliError::runtime)
}

fn value(r: &Resolved, truth: &Point, w: Option<&Point>) -> Result<f64, CliError> {
    match w {
        None => Ok(0.0),
        Some(w) => {
            let d = |a: &Point, b: &Point| r.space.distance(a, b).map_err(CliError::runtime);
            Ok(d(truth, &r.status_quo)? - d(truth, w)?)
        }
    }
}

/// Runs one check. Configuration problems are errors; wrong values are a
/// failed result.
pub fn run_check(cfg: &ExperimentConfig, check: &Check) -> Result<(bool, String), CliError> {
    match check {
        Check::Round { profile, proposals, winner, no_winner, winning_score, scores, tolerance, .. } => {
            let r = cfg.profile(profile)?;
            let props = match proposals {
                Some(ps) => ps.iter().map(|p| r.decode(p)).collect::<Result<Vec<_>, _>>()?,
                None => r.votes.clone(),
            };
            let res = electorate(&r, &r.votes)?.round_winner(&props, &r.rule).map_err(CliError::runtime)?;
            let mut c = Compare::new(Some(&r.space), *tolerance);
            if let Some(w) = expected_winner(&r, winner, *no_winner)? {
                c.winner("winner", res.winner.as_ref(), w.as_ref());
            }
            if let Some(s) = res.winning_score {
                c.num("score", s, *winning_score);
            } else if winning_score.is_some() {
                c.notes.push("winning score: no proposal won".into());
            }
            let got: Vec<f64> = res.scores.iter().map(|s| s.score).collect();
            c.nums("scores", &got, scores.as_ref());
            Ok(c.finish())
        }
        Check::Epoch { profile, sources, outcome, rounds, termination, beats_peaks, tolerance, .. } => {
            let r = cfg.profile(profile)?;
            let mut srcs = build_sources(sources, &r.space, None)?;
            let out = run_epoch(r.epoch_config()?, r.votes.clone(), &mut srcs).map_err(CliError::runtime)?;
            let mut c = Compare::new(Some(&r.space), *tolerance);
            if let Some(o) = outcome {
                let want = r.decode(o)?;
                let got = Some(&out.outcome).filter(|p| **p != r.status_quo);
                let want = Some(&want).filter(|p| **p != r.status_quo);
                c.winner("outcome", got, want);
            } else {
                c.summary.push(format!("outcome={}", r.space.describe(&out.outcome)));
            }
            c.summary.push(format!("rounds={}", out.rounds));
            if let Some(n) = rounds.filter(|n| *n != out.rounds) {
                c.notes.push(format!("rounds: expected {n}, got {}", out.rounds));
            }
            if let Some(t) = termination {
                if out.termination != *t {
                    c.notes.push(format!("termination: expected {t:?}, got {:?}", out.termination));
                }
            }
            if *beats_peaks {
                let el = electorate(&r, &r.votes)?;
                let (best_peak, _) = peak(&el, &r.rule).map_err(CliError::runtime)?;
                let score = el.score(&out.outcome, &r.rule).map_err(CliError::runtime)?.score;
                c.summary.push(format!("outcome_score={score:.6} best_peak={best_peak:.6}"));
                if !(score > best_peak) {
                    c.notes.push(format!(
                        "outcome score {score:.6} does not exceed the best peak {best_peak:.6} ({})",
                        r.space.describe(&out.outcome)
                    ));
                }
            }
            Ok(c.finish())
        }
        Check::Gap { profile, opt, peak, cg, lipschitz_bound, opt_point, method, tolerance, .. } => {
            let r = cfg.profile(profile)?;
            let el = electorate(&r, &r.votes)?;
            let rep = compromise_gap(&el, &r.rule, &r.gap_config(*method)).map_err(CliError::runtime)?;
            let mut c = Compare::new(Some(&r.space), *tolerance);
            c.num("opt", rep.opt_value, *opt);
            c.num("peak", rep.peak_value, *peak);
            c.num("cg", rep.cg, *cg);
            c.num("lipschitz", rep.lipschitz_bound, *lipschitz_bound);
            if let Some(p) = opt_point {
                let want = r.decode(p)?;
                c.winner("opt_point", Some(&rep.opt_point), Some(&want));
            }
            Ok(c.finish())
        }
        Check::Misreport {
            profile,
            member,
            report,
            sincere_winner,
            sincere_no_winner,
            misreport_winner,
            utilities,
            score,
            gains,
            tolerance,
            ..
        } => {
            let r = cfg.profile(profile)?;
            if *member >= r.votes.len() {
                return Err(CliError::Config(format!("member {member} is out of range")));
            }
            let lie = r.decode(report)?;
            let mut reported = r.votes.clone();
            reported[*member] = lie;
            let sincere = electorate(&r, &r.votes)?.round_winner(&r.votes, &r.rule).map_err(CliError::runtime)?;
            let el = electorate(&r, &reported)?;
            let manipulated = el.round_winner(&reported, &r.rule).map_err(CliError::runtime)?;
            let mut c = Compare::new(Some(&r.space), *tolerance);
            if let Some(w) = expected_winner(&r, sincere_winner, *sincere_no_winner)? {
                c.winner("sincere", sincere.winner.as_ref(), w.as_ref());
            }
            if let Some(w) = expected_winner(&r, misreport_winner, false)? {
                c.winner("misreport", manipulated.winner.as_ref(), w.as_ref());
            }
            if let Some(w) = &manipulated.winner {
                let scored = el.score(w, &r.rule).map_err(CliError::runtime)?;
                c.nums("utilities", &scored.utilities, utilities.as_ref());
                c.num("score", scored.score, *score);
            } else if utilities.is_some() || score.is_some() {
                c.notes.push("misreport: no proposal won".into());
            }
            let truth = &r.votes[*member];
            let honest = value(&r, truth, sincere.winner.as_ref())?;
            let lying = value(&r, truth, manipulated.winner.as_ref())?;
            c.summary.push(format!("sincere_value={honest:.4} misreport_value={lying:.4}"));
            if let Some(g) = gains {
                c.flag("member gains", lying > honest, *g);
            }
            Ok(c.finish())
        }
        Check::Move { profile, member, to, watch, before, after, winner_before, winner_after, tolerance, .. } => {
            let r = cfg.profile(profile)?;
            if *member >= r.votes.len() {
                return Err(CliError::Config(format!("member {member} is out of range")));
            }
            let watched = watch.iter().map(|p| r.decode(p)).collect::<Result<Vec<_>, _>>()?;
            let mut moved = r.votes.clone();
            moved[*member] = r.decode(to)?;
            let mut c = Compare::new(Some(&r.space), *tolerance);
            for (label, votes, want, winner) in
                [("before", &r.votes, before, winner_before), ("after", &moved, after, winner_after)]
            {
                let el = electorate(&r, votes)?;
                let got = watched
                    .iter()
                    .map(|p| el.score(p, &r.rule).map(|s| s.score))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::runtime)?;
                c.summary.push(format!("{label}={got:?}"));
                c.nums(label, &got, Some(want));
                if let Some(w) = expected_winner(&r, winner, false)? {
                    let res = el.round_winner(votes, &r.rule).map_err(CliError::runtime)?;
                    c.winner(&format!("winner_{label}"), res.winner.as_ref(), w.as_ref());
                }
            }
            Ok(c.finish())
        }
        Check::HRule { sigma, votes, mode, expect, tolerance, .. } => {
            let current = Threshold::new(*sigma).map_err(CliError::config)?;
            let got = h_rule(current, votes, *mode).map_err(CliError::config)?;
            let mut c = Compare::new(None, *tolerance);
            c.num(&format!("sigma[{mode}]"), got.value(), Some(*expect));
            Ok(c.finish())
        }
    }
}

/// Every check of one fixture document.
pub fn run_fixture(name: &str, cfg: &ExperimentConfig) -> Vec<CheckResult> {
    cfg.checks
        .iter()
        .map(|check| {
            let (passed, detail) = match run_check(cfg, check) {
                Ok(r) => r,
                Err(e) => (false, e.to_string()),
            };
            CheckResult { fixture: name.to_string(), check: check.name().to_string(), passed, detail }
        })
        .collect()
}
