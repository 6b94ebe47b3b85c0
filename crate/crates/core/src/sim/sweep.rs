//! Monte-Carlo sweep over random profiles.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gap::{compromise_gap, GapConfig, GapError, GridRegion, GridSearch, HeuristicConfig, OptMethod, PairScan};
use crate::governance::{Electorate, Rule, Threshold};
use crate::metric::{MetricSpace, Point};

/// Draws allowed per profile before the configuration is declared degenerate.
const MAX_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Setting {
    /// Peaks uniform on the unit square.
    Euclid2d,
    /// Peaks from the flat Dirichlet distribution.
    Simplex { m: usize },
    /// Peaks uniform over all subsets.
    Hypercube { size: usize },
    /// Peaks uniform over all rankings.
    Permutations { m: usize },
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Euclid2d => write!(f, "euclid2d"),
            Setting::Simplex { m } => write!(f, "simplex_m{m}"),
            Setting::Hypercube { size } => write!(f, "hypercube_a{size}"),
            Setting::Permutations { m } => write!(f, "permutations_m{m}"),
        }
    }
}

impl Setting {
    pub fn space(&self) -> MetricSpace {
        match *self {
            Setting::Euclid2d => MetricSpace::Euclidean { dim: 2 },
            Setting::Simplex { m } => MetricSpace::Simplex { m },
            Setting::Hypercube { size } => MetricSpace::hypercube(size).expect("validated size"),
            Setting::Permutations { m } => MetricSpace::Permutations { m },
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let ok = match *self {
            Setting::Euclid2d => true,
            Setting::Simplex { m } => (2..=6).contains(&m),
            Setting::Hypercube { size } => (1..=16).contains(&size),
            Setting::Permutations { m } => (1..=8).contains(&m),
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::Config(format!("{self} is outside the supported sizes")))
        }
    }

    /// Coarse grid used for OPT in the sweep: 51 x 51 on the unit square,
    /// spacing 1/50 on the 3-simplex and 1/25 on the 4-simplex and above.
    pub fn sweep_grid(&self) -> Option<GridSearch> {
        let divisions = match *self {
            Setting::Euclid2d => 50,
            Setting::Simplex { m } if m <= 3 => 50,
            Setting::Simplex { m } if m == 4 => 25,
            Setting::Simplex { .. } => 12,
            _ => return None,
        };
        Some(GridSearch { divisions, region: GridRegion::UnitBox, refine: false, include_votes: false })
    }

    fn canonical_status_quo(&self) -> Point {
        match *self {
            Setting::Euclid2d => Point::Vector(vec![0.5, 0.5]),
            Setting::Simplex { m } => Point::Vector(vec![1.0 / m as f64; m]),
            Setting::Hypercube { .. } => Point::Subset(0),
            Setting::Permutations { m } => Point::Ranking((0..m).collect()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Point {
        match *self {
            Setting::Euclid2d => Point::Vector(vec![rng.random::<f64>(), rng.random::<f64>()]),
            Setting::Simplex { m } => {
                // flat Dirichlet: normalised unit exponentials
                let g: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = g.iter().sum();
                Point::Vector(g.into_iter().map(|x: f64| x / total).collect())
            }
            Setting::Hypercube { size } => {
                let mask = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
                Point::Subset(rng.next_u64() & mask)
            }
            Setting::Permutations { m } => {
                let mut r: Vec<usize> = (0..m).collect();
                r.shuffle(rng);
                Point::Ranking(r)
            }
        }
    }
}

/// Where the status quo of each sampled profile comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusQuoPolicy {
    /// An independent draw from the peak distribution.
    Random,
    /// A fixed neutral point: the centre of the square, the barycentre of
    /// the simplex, the empty set, the identity ranking.
    Canonical,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("profile {index}: no draw with a positive optimum in {draws} attempts")]
    Degenerate { index: usize, draws: usize },
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error(transparent)]
    Metric(#[from] crate::metric::MetricError),
    #[error("scenario {name} failed: {detail}")]
    Scenario { name: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub setting: Setting,
    pub n: usize,
    pub profiles: usize,
    pub sigma: Threshold,
    pub seed: u64,
    pub status_quo: StatusQuoPolicy,
    /// Overrides [`Setting::sweep_grid`].
    pub grid: Option<GridSearch>,
    pub heuristic: HeuristicConfig,
}

impl SweepConfig {
    /// Defaults: σ = 1/2, canonical status quo, the coarse sweep grid, and
    /// the pairwise heuristic over unordered pairs gated at the status quo.
    pub fn new(setting: Setting, n: usize, profiles: usize, seed: u64) -> Self {
        SweepConfig {
            setting,
            n,
            profiles,
            sigma: Threshold::HALF,
            seed,
            status_quo: StatusQuoPolicy::Canonical,
            grid: None,
            heuristic: HeuristicConfig { scan: PairScan::Unordered, gate_at_status_quo: true, ..Default::default() },
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.setting.validate()?;
        if self.n == 0 || self.profiles == 0 {
            return Err(SimError::Config("n and profiles must be positive".into()));
        }
        Ok(())
    }

    fn gap_config(&self) -> GapConfig {
        let method = match self.setting {
            Setting::Euclid2d | Setting::Simplex { .. } => OptMethod::Grid,
            _ => OptMethod::Enumeration,
        };
        GapConfig {
            method: Some(method),
            grid: self.grid.or_else(|| self.setting.sweep_grid()),
            heuristic: self.heuristic,
            text_bound: None,
        }
    }
}

/// Seed of the stream for profile `index`.
pub fn profile_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Draws `n` peaks and a status quo.
pub fn sample_profile(setting: Setting, n: usize, policy: StatusQuoPolicy, rng: &mut ChaCha8Rng) -> (Vec<Point>, Point) {
    let votes = (0..n).map(|_| setting.draw(rng)).collect();
    let s = match policy {
        StatusQuoPolicy::Random => setting.draw(rng),
        StatusQuoPolicy::Canonical => setting.canonical_status_quo(),
    };
    (votes, s)
}

/// One evaluated profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub index: usize,
    pub seed: u64,
    /// Draws discarded because nothing beat the status quo.
    pub vacuous_draws: usize,
    pub opt: f64,
    pub peak: f64,
    pub cg: f64,
    pub positive_cg: bool,
    pub heuristic_score: Option<f64>,
    pub hit: bool,
    /// Share of the gap the heuristic closed; `None` when there is no gap.
    pub closed: Option<f64>,
}

fn cg_tolerance(setting: Setting) -> f64 {
    match setting {
        Setting::Euclid2d | Setting::Simplex { .. } => 1e-9,
        _ => 0.0,
    }
}

/// Evaluates one profile index, resampling vacuous draws.
pub fn evaluate_index(config: &SweepConfig, index: usize) -> Result<ProfileRecord, SimError> {
    let seed = profile_seed(config.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = config.setting.space();
    let rule = Rule { aggregator: crate::Aggregator::GeneralisedMedian, sigma: config.sigma };
    let gap_config = config.gap_config();
    let tol = cg_tolerance(config.setting);
    for draw in 0..MAX_DRAWS {
        let (votes, s) = sample_profile(config.setting, config.n, config.status_quo, &mut rng);
        let el = Electorate::new(&space, &s, &votes).map_err(GapError::from)?;
        let report = compromise_gap(&el, &rule, &gap_config)?;
        if report.vacuous {
            continue;
        }
        return Ok(ProfileRecord {
            index,
            seed,
            vacuous_draws: draw,
            opt: report.opt_value,
            peak: report.peak_value,
            cg: report.cg,
            positive_cg: report.cg > tol,
            heuristic_score: report.heuristic_score,
            hit: report.heuristic_result.is_some(),
            closed: report.closed_fraction(tol),
        });
    }
    Err(SimError::Degenerate { index, draws: MAX_DRAWS })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub setting: Setting,
    pub n: usize,
    pub profiles: usize,
    pub positive_cg: usize,
    pub hits: usize,
    /// Hits among profiles with a positive gap.
    pub gap_hits: usize,
    pub positive_cg_freq: f64,
    /// Mean closed share over profiles with a positive gap, misses counting
    /// as zero.
    pub gap_closing_ratio: f64,
    /// Mean closed share over profiles with a positive gap and a hit.
    pub gap_closing_on_hits: f64,
    pub hit_rate: f64,
}

impl SweepStats {
    pub fn from_records(setting: Setting, n: usize, records: &[ProfileRecord]) -> Self {
        let profiles = records.len();
        let positive: Vec<&ProfileRecord> = records.iter().filter(|r| r.positive_cg).collect();
        let closed: Vec<f64> = positive.iter().map(|r| r.closed.unwrap_or(0.0)).collect();
        let on_hits: Vec<f64> = positive.iter().filter(|r| r.hit).map(|r| r.closed.unwrap_or(0.0)).collect();
        let mean = |xs: &[f64]| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
        let hits = records.iter().filter(|r| r.hit).count();
        SweepStats {
            setting,
            n,
            profiles,
            positive_cg: positive.len(),
            hits,
            gap_hits: on_hits.len(),
            positive_cg_freq: positive.len() as f64 / profiles.max(1) as f64,
            gap_closing_ratio: mean(&closed),
            gap_closing_on_hits: mean(&on_hits),
            hit_rate: hits as f64 / profiles.max(1) as f64,
        }
    }

    pub const CSV_HEADER: &'static str = "setting,n,profiles,positive_cg_freq,gap_closing_ratio,hit_rate";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.4},{:.4},{:.4}",
            self.setting, self.n, self.profiles, self.positive_cg_freq, self.gap_closing_ratio, self.hit_rate
        )
    }
}

/// Records in index order. `jobs = Some(1)` runs serially; `None` uses the
/// global pool.
pub fn sweep_records(config: &SweepConfig, jobs: Option<usize>) -> Result<Vec<ProfileRecord>, SimError> {
    config.validate()?;
    let run = || -> Result<Vec<ProfileRecord>, SimError> {
        (0..config.profiles).into_par_iter().map(|i| evaluate_index(config, i)).collect()
    };
    match jobs {
        Some(1) => (0..config.profiles).map(|i| evaluate_index(config, i)).collect(),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| SimError::Config(e.to_string()))?
            .install(run),
        None => run(),
    }
}

pub fn sweep(config: &SweepConfig, jobs: Option<usize>) -> Result<(SweepStats, Vec<ProfileRecord>), SimError> {
    let records = sweep_records(config, jobs)?;
    Ok((SweepStats::from_records(config.setting, config.n, &records), records))
}

/// One row of the published table, as fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub setting: Setting,
    pub n: usize,
    pub positive_cg_freq: f64,
    pub gap_closing_ratio: f64,
    pub hit_rate: f64,
}

const fn row(setting: Setting, n: usize, cg: f64, gap: f64, hit: f64) -> ReferenceRow {
    ReferenceRow { setting, n, positive_cg_freq: cg, gap_closing_ratio: gap, hit_rate: hit }
}

/// Every row of the published full sweep (28 printed rows).
pub const REFERENCE_ROWS: [ReferenceRow; 28] = [
    row(Setting::Euclid2d, 5, 0.986, 0.411, 0.668),
    row(Setting::Euclid2d, 11, 0.996, 0.611, 0.878),
    row(Setting::Euclid2d, 21, 1.000, 0.794, 0.963),
    row(Setting::Euclid2d, 51, 0.960, 0.963, 0.980),
    row(Setting::Simplex { m: 3 }, 5, 0.930, 0.401, 0.600),
    row(Setting::Simplex { m: 3 }, 11, 0.980, 0.644, 0.857),
    row(Setting::Simplex { m: 3 }, 21, 0.980, 0.816, 0.950),
    row(Setting::Simplex { m: 4 }, 5, 0.970, 0.524, 0.775),
    row(Setting::Simplex { m: 4 }, 11, 0.990, 0.660, 0.940),
    row(Setting::Simplex { m: 4 }, 21, 0.990, 0.811, 0.960),
    row(Setting::Hypercube { size: 6 }, 5, 0.394, 0.995, 0.392),
    row(Setting::Hypercube { size: 6 }, 11, 0.262, 0.992, 0.260),
    row(Setting::Hypercube { size: 6 }, 21, 0.117, 1.000, 0.117),
    row(Setting::Hypercube { size: 8 }, 5, 0.685, 0.965, 0.663),
    row(Setting::Hypercube { size: 8 }, 11, 0.514, 0.959, 0.494),
    row(Setting::Hypercube { size: 8 }, 21, 0.355, 1.000, 0.355),
    row(Setting::Hypercube { size: 10 }, 5, 0.850, 0.902, 0.787),
    row(Setting::Hypercube { size: 10 }, 11, 0.730, 0.914, 0.675),
    row(Setting::Hypercube { size: 10 }, 21, 0.510, 0.961, 0.490),
    row(Setting::Permutations { m: 4 }, 5, 0.274, 0.988, 0.271),
    row(Setting::Permutations { m: 4 }, 11, 0.130, 0.973, 0.127),
    row(Setting::Permutations { m: 4 }, 21, 0.048, 1.000, 0.048),
    row(Setting::Permutations { m: 5 }, 5, 0.630, 0.818, 0.529),
    row(Setting::Permutations { m: 5 }, 11, 0.475, 0.891, 0.425),
    row(Setting::Permutations { m: 5 }, 21, 0.317, 0.989, 0.313),
    row(Setting::Permutations { m: 6 }, 5, 0.850, 0.671, 0.653),
    row(Setting::Permutations { m: 6 }, 11, 0.833, 0.774, 0.697),
    row(Setting::Permutations { m: 6 }, 21, 0.720, 0.843, 0.627),
];

/// Indices into [`REFERENCE_ROWS`] of the nine headline rows.
pub const HEADLINE_ROWS: [usize; 9] = [0, 2, 3, 7, 9, 13, 15, 22, 24];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_valid_and_reproducible() {
        for setting in [
            Setting::Euclid2d,
            Setting::Simplex { m: 3 },
            Setting::Hypercube { size: 6 },
            Setting::Permutations { m: 5 },
        ] {
            let space = setting.space();
            let mut a = ChaCha8Rng::seed_from_u64(7);
            let mut b = ChaCha8Rng::seed_from_u64(7);
            let (va, sa) = sample_profile(setting, 11, StatusQuoPolicy::Random, &mut a);
            let (vb, sb) = sample_profile(setting, 11, StatusQuoPolicy::Random, &mut b);
            assert_eq!((&va, &sa), (&vb, &sb));
            assert_eq!(va.len(), 11);
            assert!(va.iter().chain([&sa]).all(|p| space.is_valid(p)), "{setting}");
        }
    }

    #[test]
    fn headline_rows() {
        let picked: Vec<String> =
            HEADLINE_ROWS.iter().map(|&i| format!("{} {}", REFERENCE_ROWS[i].setting, REFERENCE_ROWS[i].n)).collect();
        assert_eq!(
            picked,
            [
                "euclid2d 5",
                "euclid2d 21",
                "euclid2d 51",
                "simplex_m4 5",
                "simplex_m4 21",
                "hypercube_a8 5",
                "hypercube_a8 21",
                "permutations_m5 5",
                "permutations_m5 21"
            ]
        );
    }

    #[test]
    fn statistics_from_records() {
        let rec = |positive_cg, hit, closed| ProfileRecord {
            index: 0,
            seed: 0,
            vacuous_draws: 0,
            opt: 1.0,
            peak: 0.0,
            cg: 1.0,
            positive_cg,
            heuristic_score: None,
            hit,
            closed,
        };
        let records = vec![rec(true, true, Some(1.0)), rec(true, false, Some(0.0)), rec(false, true, None), rec(false, false, None)];
        let s = SweepStats::from_records(Setting::Euclid2d, 3, &records);
        assert_eq!(s.positive_cg_freq, 0.5);
        assert_eq!(s.hit_rate, 0.5);
        assert_eq!(s.gap_closing_ratio, 0.5);
        assert_eq!(s.gap_closing_on_hits, 1.0);
        assert_eq!(s.csv_row(), "euclid2d,3,4,0.5000,0.5000,0.5000");
    }
}
