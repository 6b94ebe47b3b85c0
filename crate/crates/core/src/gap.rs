//! Compromise gap: the unconstrained optimum, the best peak, the Lipschitz
//! bound, the pairwise heuristic and the geometric median.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::governance::{Electorate, GovernanceError, Rule};
use crate::metric::{euclidean, MetricError, MetricSpace, Point, DEFAULT_MIDPOINT_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("{method:?} search is not available for {space} spaces")]
    MethodUnsupported { method: OptMethod, space: String },
    #[error("geometric median did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("no input points")]
    EmptyInput,
    #[error(transparent)]
    Governance(#[from] GovernanceError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptMethod {
    Enumeration,
    Grid,
    #[serde(rename = "closed_form_1d")]
    ClosedForm1D,
}

/// Region covered by the coarse grid in Euclidean spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridRegion {
    /// The votes' bounding box, inflated on each side by the distance from
    /// the status quo to the box.
    InflatedBoundingBox,
    /// `[0, 1]^dim`.
    UnitBox,
}

/// Grid search settings for continuous spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    /// Intervals per axis; the simplex lattice has spacing `1 / divisions`.
    pub divisions: usize,
    pub region: GridRegion,
    /// One pass at ten times the resolution around the incumbent.
    pub refine: bool,
    /// Also count the votes as candidate optima.
    pub include_votes: bool,
}

impl GridSearch {
    /// 101 x 101 in the plane, spacing 0.02 on the simplex, one refinement
    /// pass, votes included.
    pub fn fine(space: &MetricSpace) -> Self {
        let divisions = match space {
            MetricSpace::Simplex { .. } => 50,
            _ => 100,
        };
        GridSearch { divisions, region: GridRegion::InflatedBoundingBox, refine: true, include_votes: true }
    }
}

/// How the pairwise heuristic walks the proposal set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairScan {
    /// Every ordered pair, so asymmetric constructions are tried in both
    /// directions.
    Ordered,
    /// Every unordered pair once, oriented from the canonically smaller point.
    Unordered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub cap: usize,
    pub scan: PairScan,
    /// Treat the status quo as an ever-present proposal with score zero, so
    /// a candidate must also be strictly positive.
    pub gate_at_status_quo: bool,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig { cap: DEFAULT_MIDPOINT_CAP, scan: PairScan::Ordered, gate_at_status_quo: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    /// `None` picks enumeration for finite spaces, the closed form on a
    /// line and the grid elsewhere.
    pub method: Option<OptMethod>,
    pub grid: Option<GridSearch>,
    pub heuristic: HeuristicConfig,
    /// Longest text enumerated when searching a string space.
    pub text_bound: Option<usize>,
}

impl Default for GapConfig {
    fn default() -> Self {
        GapConfig { method: None, grid: None, heuristic: HeuristicConfig::default(), text_bound: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub opt_value: f64,
    pub opt_point: Point,
    pub opt_method: OptMethod,
    /// Best raw peak score.
    pub peak_value: f64,
    pub peak_point: Point,
    /// `opt_value - max(peak_value, 0)`: the status quo scores zero and is
    /// always available, so a negative peak is never the fallback.
    pub cg: f64,
    pub lipschitz_bound: f64,
    pub heuristic_result: Option<Point>,
    pub heuristic_score: Option<f64>,
    /// `opt_value <= 0`: nothing beats the status quo.
    pub vacuous: bool,
}

impl GapReport {
    pub fn baseline(&self) -> f64 {
        self.peak_value.max(0.0)
    }

    /// Share of the gap closed by the heuristic, in `[0, 1]`; `None` when
    /// there is no gap.
    pub fn closed_fraction(&self, tol: f64) -> Option<f64> {
        if self.cg <= tol {
            return None;
        }
        let gain = self.heuristic_score.map_or(0.0, |h| h - self.baseline());
        Some((gain / self.cg).clamp(0.0, 1.0))
    }
}

fn better(el: &Electorate, a: (&Point, f64), b: (&Point, f64)) -> bool {
    let diff = a.1 - b.1;
    diff > el.tolerance() || (diff.abs() <= el.tolerance() && el.space().canonical_cmp(a.0, b.0) == Ordering::Less)
}

/// Best point of `candidates` by score, ties to the canonically smallest.
fn argmax(el: &Electorate, rule: &Rule, candidates: &[Point]) -> Result<Option<(Point, f64)>, GapError> {
    let mut best: Option<(Point, f64)> = None;
    for c in candidates {
        let sc = rule.score(&el.utilities(c)?)?;
        if best.as_ref().is_none_or(|(bp, bs)| better(el, (c, sc), (bp, *bs))) {
            best = Some((c.clone(), sc));
        }
    }
    Ok(best)
}

/// `max_{p in V} phi(u(p))`.
pub fn peak(el: &Electorate, rule: &Rule) -> Result<(f64, Point), GapError> {
    let (p, v) = argmax(el, rule, el.votes())?.ok_or(GapError::EmptyInput)?;
    Ok((v, p))
}

/// `min_{p in V} d(x, p)`.
pub fn lipschitz_bound(space: &MetricSpace, votes: &[Point], x: &Point) -> Result<f64, GapError> {
    votes
        .iter()
        .map(|v| space.distance(x, v))
        .try_fold(f64::INFINITY, |m, d| Ok(m.min(d?)))
}

fn default_method(space: &MetricSpace) -> OptMethod {
    match space {
        MetricSpace::Scalar { .. } => OptMethod::ClosedForm1D,
        MetricSpace::Simplex { .. } | MetricSpace::Euclidean { .. } => OptMethod::Grid,
        _ => OptMethod::Enumeration,
    }
}

/// `sup_x phi(u(x))` by the requested method.
pub fn opt(el: &Electorate, rule: &Rule, config: &GapConfig) -> Result<(f64, Point, OptMethod), GapError> {
    let space = el.space();
    let method = config.method.unwrap_or_else(|| default_method(space));
    let unsupported = || GapError::MethodUnsupported { method, space: space.kind_name().into() };
    let candidates = match method {
        OptMethod::Enumeration => match space {
            MetricSpace::Strings { max_len, .. } => space.enumerate_bounded(config.text_bound.unwrap_or(*max_len))?,
            _ => space.enumerate()?,
        },
        OptMethod::ClosedForm1D => {
            // On a line the score is maximised at a positional voter, which
            // is itself a vote; the status quo covers the vacuous case.
            if !matches!(space, MetricSpace::Scalar { .. }) {
                return Err(unsupported());
            }
            let mut c = el.votes().to_vec();
            c.push(el.status_quo().clone());
            c
        }
        OptMethod::Grid => {
            let grid = config.grid.unwrap_or_else(|| GridSearch::fine(space));
            return grid_opt(el, rule, &grid).map(|(v, p)| (v, p, method));
        }
    };
    let (p, v) = argmax(el, rule, &candidates)?.ok_or(GapError::EmptyInput)?;
    Ok((v, p, method))
}

fn grid_opt(el: &Electorate, rule: &Rule, grid: &GridSearch) -> Result<(f64, Point), GapError> {
    let space = el.space();
    let coarse: Vec<Point> = match space {
        MetricSpace::Simplex { m } => simplex_lattice(*m, grid.divisions),
        MetricSpace::Euclidean { dim } => {
            let (lo, hi) = grid_box(el, grid.region, *dim)?;
            box_grid(&lo, &hi, grid.divisions)
        }
        _ => return Err(GapError::MethodUnsupported { method: OptMethod::Grid, space: space.kind_name().into() }),
    };
    let (mut best, mut best_score) = argmax(el, rule, &coarse)?.ok_or(GapError::EmptyInput)?;
    if grid.refine {
        let fine = match (space, &best) {
            (MetricSpace::Simplex { m }, Point::Vector(x)) if *m <= 4 => simplex_patch(x, grid.divisions),
            (MetricSpace::Euclidean { dim }, Point::Vector(x)) => {
                let (lo, hi) = grid_box(el, grid.region, *dim)?;
                let step: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / grid.divisions as f64).collect();
                let plo: Vec<f64> = x.iter().zip(&step).map(|(c, h)| c - h).collect();
                let phi: Vec<f64> = x.iter().zip(&step).map(|(c, h)| c + h).collect();
                box_grid(&plo, &phi, 20)
            }
            _ => Vec::new(),
        };
        if let Some((p, v)) = argmax(el, rule, &fine)? {
            if better(el, (&p, v), (&best, best_score)) {
                best = p;
                best_score = v;
            }
        }
    }
    if grid.include_votes {
        if let Some((p, v)) = argmax(el, rule, el.votes())? {
            if v > best_score + el.tolerance() {
                best = p;
                best_score = v;
            }
        }
    }
    Ok((best_score, best))
}

fn grid_box(el: &Electorate, region: GridRegion, dim: usize) -> Result<(Vec<f64>, Vec<f64>), GapError> {
    match region {
        GridRegion::UnitBox => Ok((vec![0.0; dim], vec![1.0; dim])),
        GridRegion::InflatedBoundingBox => {
            let mut lo = vec![f64::INFINITY; dim];
            let mut hi = vec![f64::NEG_INFINITY; dim];
            for v in el.votes() {
                let x = v.as_vector().ok_or(GapError::EmptyInput)?;
                for i in 0..dim {
                    lo[i] = lo[i].min(x[i]);
                    hi[i] = hi[i].max(x[i]);
                }
            }
            let s = el.status_quo().as_vector().ok_or(GapError::EmptyInput)?;
            let gap: f64 = (0..dim)
                .map(|i| (lo[i] - s[i]).max(0.0).max(s[i] - hi[i]))
                .map(|g| g * g)
                .sum::<f64>()
                .sqrt();
            for i in 0..dim {
                lo[i] -= gap;
                hi[i] += gap;
                if hi[i] - lo[i] <= 0.0 {
                    lo[i] -= 0.5;
                    hi[i] += 0.5;
                }
            }
            Ok((lo, hi))
        }
    }
}

fn box_grid(lo: &[f64], hi: &[f64], divisions: usize) -> Vec<Point> {
    let dim = lo.len();
    let per_axis = divisions + 1;
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = vec![0.0; dim];
            for i in 0..dim {
                let t = (idx % per_axis) as f64 / divisions as f64;
                idx /= per_axis;
                x[i] = lo[i] + t * (hi[i] - lo[i]);
            }
            Point::Vector(x)
        })
        .collect()
}

/// Simplex points whose coordinates are multiples of `1 / divisions`.
pub fn simplex_lattice(m: usize, divisions: usize) -> Vec<Point> {
    fn rec(m: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(m, left - c, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(m, divisions, &mut Vec::with_capacity(m), &mut raw);
    let scale = divisions as f64;
    raw.into_iter()
        .map(|c| Point::Vector(c.into_iter().map(|k| k as f64 / scale).collect()))
        .collect()
}

/// Points within one lattice cell of `x` at ten times the resolution.
fn simplex_patch(x: &[f64], divisions: usize) -> Vec<Point> {
    let m = x.len();
    let h = 1.0 / (10 * divisions) as f64;
    let free = m - 1;
    let mut out = Vec::new();
    let per = 21usize;
    for mut idx in 0..per.pow(free as u32) {
        let mut y = x.to_vec();
        for c in y.iter_mut().take(free) {
            let off = (idx % per) as f64 - 10.0;
            idx /= per;
            *c += off * h;
        }
        let last: f64 = 1.0 - y[..free].iter().sum::<f64>();
        y[free] = last;
        if y.iter().all(|&c| c >= 0.0) {
            out.push(Point::Vector(y));
        }
    }
    out
}

/// Pairwise compromise: the best midpoint candidate over all pairs of
/// distinct proposals, returned only if it strictly beats every proposal.
pub fn heuristic_p(
    el: &Electorate,
    proposals: &[Point],
    rule: &Rule,
    config: &HeuristicConfig,
) -> Result<Option<(Point, f64)>, GapError> {
    let space = el.space();
    let mut distinct: Vec<Point> = Vec::with_capacity(proposals.len());
    for p in proposals {
        if !distinct.contains(p) {
            distinct.push(p.clone());
        }
    }
    if distinct.len() < 2 {
        return Ok(None);
    }
    let mut candidates = Vec::new();
    match config.scan {
        PairScan::Ordered => {
            for p in &distinct {
                for q in &distinct {
                    if p != q {
                        candidates.extend(space.midpoint_candidates(p, q, config.cap)?);
                    }
                }
            }
        }
        PairScan::Unordered => {
            let mut sorted = distinct.clone();
            sorted.sort_by(|a, b| space.canonical_cmp(a, b));
            for (i, p) in sorted.iter().enumerate() {
                for q in &sorted[i + 1..] {
                    candidates.extend(space.midpoint_candidates(p, q, config.cap)?);
                }
            }
        }
    }
    let Some((best, best_score)) = argmax(el, rule, &candidates)? else {
        return Ok(None);
    };
    let mut gate = f64::NEG_INFINITY;
    for p in &distinct {
        gate = gate.max(rule.score(&el.utilities(p)?)?);
    }
    if config.gate_at_status_quo {
        gate = gate.max(0.0);
    }
    Ok((best_score > gate + el.tolerance()).then_some((best, best_score)))
}

/// The full gap report for one profile.
pub fn compromise_gap(el: &Electorate, rule: &Rule, config: &GapConfig) -> Result<GapReport, GapError> {
    let (opt_value, opt_point, opt_method) = opt(el, rule, config)?;
    let (peak_value, peak_point) = peak(el, rule)?;
    let cg = opt_value - peak_value.max(0.0);
    let lipschitz_bound = lipschitz_bound(el.space(), el.votes(), &opt_point)?;
    let heuristic = heuristic_p(el, el.votes(), rule, &config.heuristic)?;
    let (heuristic_result, heuristic_score) = match heuristic {
        Some((p, v)) => (Some(p), Some(v)),
        None => (None, None),
    };
    Ok(GapReport {
        opt_value,
        opt_point,
        opt_method,
        peak_value,
        peak_point,
        cg,
        lipschitz_bound,
        heuristic_result,
        heuristic_score,
        vacuous: opt_value <= el.tolerance(),
    })
}

/// Stopping rule for [`geometric_median`].
pub const WEISZFELD_TOLERANCE: f64 = 1e-10;
pub const WEISZFELD_MAX_ITER: usize = 10_000;

/// Minimiser of the summed Euclidean distances (Weiszfeld iteration with
/// the Vardi-Zhang step at input points). Stops when an update moves less
/// than `tolerance`.
pub fn geometric_median(points: &[Vec<f64>], tolerance: f64, max_iter: usize) -> Result<Vec<f64>, GapError> {
    let first = points.first().ok_or(GapError::EmptyInput)?;
    let dim = first.len();
    let n = points.len() as f64;
    let mut x: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n).collect();
    let coincide = 1e-14;
    for _ in 0..max_iter {
        let mut num = vec![0.0; dim];
        let mut den = 0.0;
        let mut at_input = 0.0;
        for p in points {
            let d = euclidean(&x, p);
            if d < coincide {
                at_input += 1.0;
                continue;
            }
            for j in 0..dim {
                num[j] += p[j] / d;
            }
            den += 1.0 / d;
        }
        if den == 0.0 {
            // every point coincides with x
            return Ok(x);
        }
        let t: Vec<f64> = num.iter().map(|v| v / den).collect();
        let next = if at_input > 0.0 {
            // Pull of the other points, compared with the mass sitting at x.
            let r: f64 = (0..dim)
                .map(|j| {
                    let pull: f64 = points
                        .iter()
                        .filter_map(|p| {
                            let d = euclidean(&x, p);
                            (d >= coincide).then(|| (p[j] - x[j]) / d)
                        })
                        .sum();
                    pull * pull
                })
                .sum::<f64>()
                .sqrt();
            if r <= at_input {
                return Ok(x);
            }
            let w = at_input / r;
            t.iter().zip(&x).map(|(tj, xj)| (1.0 - w) * tj + w * xj).collect()
        } else {
            t
        };
        let step = euclidean(&next, &x);
        x = next;
        if step < tolerance {
            return Ok(x);
        }
    }
    Err(GapError::NoConvergence { iterations: max_iter })
}
