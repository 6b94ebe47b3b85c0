use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use metgov_core::amendment::{h_rule, HRuleMode};
use metgov_core::epoch::{read_trace, run_epoch, verify_trace, write_trace, Termination, TraceError, TraceSummary};
use metgov_core::sim::{sweep, ProfileRecord, SweepStats};
use metgov_core::{PointRepr, Threshold};
use serde::{Deserialize, Serialize};

use crate::checks::{run_fixture, CheckResult};
use crate::config::{build_sources, ExperimentConfig};
use crate::CliError;

/// Fixture documents compiled into the binary, by name.
pub const BUILTIN_FIXTURES: [(&str, &str); 10] = [
    ("rate", include_str!("../../../fixtures/examples/rate.toml")),
    ("running", include_str!("../../../fixtures/examples/running.toml")),
    ("plurality", include_str!("../../../fixtures/examples/plurality.toml")),
    ("swf", include_str!("../../../fixtures/examples/swf.toml")),
    ("star", include_str!("../../../fixtures/examples/star.toml")),
    ("freelancer_gap", include_str!("../../../fixtures/examples/freelancer_gap.toml")),
    ("hrule", include_str!("../../../fixtures/examples/hrule.toml")),
    ("monotonicity", include_str!("../../../fixtures/examples/monotonicity.toml")),
    ("multidim", include_str!("../../../fixtures/examples/multidim.toml")),
    ("committee", include_str!("../../../fixtures/examples/committee.toml")),
];

/// Loads fixtures from `dir` (every `*.toml`, by file stem, sorted), or the
/// built-in set.
pub fn load_fixtures(dir: Option<&Path>) -> Result<Vec<(String, ExperimentConfig)>, CliError> {
    let Some(dir) = dir else {
        return BUILTIN_FIXTURES
            .iter()
            .map(|(name, text)| {
                ExperimentConfig::parse(text)
                    .map(|c| (name.to_string(), c))
                    .map_err(|e| CliError::Config(format!("fixture {name}: {e}")))
            })
            .collect();
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Config(format!("no fixtures in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            ExperimentConfig::load(p).map(|c| (name, c))
        })
        .collect()
}

pub fn verify_examples(dir: Option<&Path>) -> Result<Vec<CheckResult>, CliError> {
    Ok(load_fixtures(dir)?.iter().flat_map(|(name, cfg)| run_fixture(name, cfg)).collect())
}

pub fn render_results(results: &[CheckResult]) -> String {
    let w1 = results.iter().map(|r| r.fixture.len()).max().unwrap_or(7).max(7);
    let w2 = results.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<w1$}  {:<w2$}  result  detail\n", "fixture", "check");
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{:<w1$}  {:<w2$}  {status:<6}  {}\n", r.fixture, r.check, r.detail));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    out.push_str(&format!("{} checks, {} passed, {failed} failed\n", results.len(), results.len() - failed));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub outcome: PointRepr,
    pub winning_score: Option<f64>,
    pub rounds: usize,
    pub termination: Termination,
}

/// Runs the `[epoch]` section and writes `trace.jsonl` and `outcome.json`
/// into `out`.
pub fn epoch_run(config: &Path, out: &Path, seed: Option<u64>) -> Result<OutcomeSummary, CliError> {
    let cfg = ExperimentConfig::load(config)?;
    let spec = cfg.epoch.as_ref().ok_or_else(|| CliError::Config("the document has no [epoch] section".into()))?;
    let r = cfg.profile(&spec.profile)?;
    let mut sources = build_sources(&spec.sources, &r.space, seed)?;
    let outcome = run_epoch(r.epoch_config()?, r.votes.clone(), &mut sources).map_err(CliError::runtime)?;
    let summary = OutcomeSummary {
        outcome: r.space.encode(&outcome.outcome).map_err(CliError::runtime)?,
        winning_score: outcome.winning_score,
        rounds: outcome.rounds,
        termination: outcome.termination,
    };
    fs::create_dir_all(out)?;
    let mut w = BufWriter::new(File::create(out.join("trace.jsonl"))?);
    write_trace(&outcome.trace, &mut w)?;
    w.flush()?;
    let json = serde_json::to_string_pretty(&summary).map_err(CliError::runtime)?;
    fs::write(out.join("outcome.json"), json + "\n")?;
    Ok(summary)
}

pub fn epoch_verify(trace: &Path) -> Result<TraceSummary, CliError> {
    let file = File::open(trace).map_err(|e| CliError::Config(format!("cannot read {}: {e}", trace.display())))?;
    let events = read_trace(BufReader::new(file)).map_err(|e| match e {
        TraceError::Io(e) => CliError::runtime(e),
        other => CliError::Mismatch(other.to_string()),
    })?;
    verify_trace(&events).map_err(|e| CliError::Mismatch(e.to_string()))
}

/// One line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordLine {
    pub setting: String,
    pub n: usize,
    #[serde(flatten)]
    pub record: ProfileRecord,
}

/// Runs every configured row and writes `summary.csv` and `records.jsonl`.
pub fn run_sweep(
    config: &Path,
    out: &Path,
    seed: u64,
    jobs: Option<usize>,
    profiles: Option<usize>,
) -> Result<Vec<SweepStats>, CliError> {
    let cfg = ExperimentConfig::load(config)?;
    let mut spec = cfg.sweep.clone().ok_or_else(|| CliError::Config("the document has no [sweep] section".into()))?;
    if let Some(p) = profiles {
        spec.profiles = p;
    }
    if jobs == Some(0) {
        return Err(CliError::Config("--jobs must be positive".into()));
    }
    let configs = spec.configs(seed)?;
    fs::create_dir_all(out)?;
    let mut csv = BufWriter::new(File::create(out.join("summary.csv"))?);
    let mut records = BufWriter::new(File::create(out.join("records.jsonl"))?);
    writeln!(csv, "{}", SweepStats::CSV_HEADER)?;
    let mut all = Vec::new();
    for c in &configs {
        let (stats, recs) = sweep(c, jobs).map_err(CliError::runtime)?;
        writeln!(csv, "{}", stats.csv_row())?;
        for record in recs {
            let line = RecordLine { setting: c.setting.to_string(), n: c.n, record };
            serde_json::to_writer(&mut records, &line).map_err(CliError::runtime)?;
            records.write_all(b"\n")?;
        }
        all.push(stats);
    }
    csv.flush()?;
    records.flush()?;
    Ok(all)
}

/// New thresholds under each requested mode.
pub fn hrule(sigma: f64, votes: &[f64], modes: &[HRuleMode]) -> Result<Vec<(HRuleMode, f64)>, CliError> {
    let current = Threshold::new(sigma).map_err(CliError::config)?;
    modes.iter().map(|&m| Ok((m, h_rule(current, votes, m).map_err(CliError::config)?.value()))).collect()
}

/// Validates an emitted file: `summary.csv`, `records.jsonl`, a trace, or
/// `outcome.json`. Returns a one-line description.
pub fn schema_check(path: &Path) -> Result<String, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let bad = |line: usize, why: String| CliError::Mismatch(format!("{}:{line}: {why}", path.display()));
    let ext = path.extension().and_then(|x| x.to_str()).unwrap_or("");
    match ext {
        "csv" => {
            let mut lines = text.lines();
            if lines.next() != Some(SweepStats::CSV_HEADER) {
                return Err(bad(1, format!("header must be {:?}", SweepStats::CSV_HEADER)));
            }
            let mut rows = 0;
            for (i, line) in lines.enumerate() {
                let f: Vec<&str> = line.split(',').collect();
                let ok = f.len() == 6
                    && !f[0].is_empty()
                    && f[1].parse::<usize>().is_ok_and(|n| n > 0)
                    && f[2].parse::<usize>().is_ok_and(|n| n > 0)
                    && f[3..].iter().all(|x| x.parse::<f64>().is_ok_and(|v| (0.0..=1.0).contains(&v)));
                if !ok {
                    return Err(bad(i + 2, format!("malformed row {line:?}")));
                }
                rows += 1;
            }
            Ok(format!("sweep summary, {rows} rows"))
        }
        "jsonl" => {
            let lines: Vec<(usize, &str)> =
                text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l)).collect();
            let is_trace = lines.first().is_some_and(|(_, l)| l.contains("\"event\""));
            if is_trace {
                let events = read_trace(text.as_bytes()).map_err(|e| bad(0, e.to_string()))?;
                return Ok(format!("epoch trace, {} records", events.len()));
            }
            for (i, l) in &lines {
                let r: RecordLine = serde_json::from_str(l).map_err(|e| bad(*i, e.to_string()))?;
                let rec = &r.record;
                let consistent = (rec.opt - rec.peak.max(0.0) - rec.cg).abs() <= 1e-9 * (1.0 + rec.opt.abs())
                    && rec.closed.is_none_or(|c| (0.0..=1.0 + 1e-12).contains(&c))
                    && (rec.hit == rec.heuristic_score.is_some());
                if !consistent {
                    return Err(bad(*i, "inconsistent record".into()));
                }
            }
            Ok(format!("sweep records, {} lines", lines.len()))
        }
        "json" => {
            serde_json::from_str::<OutcomeSummary>(&text).map_err(|e| bad(0, e.to_string()))?;
            Ok("epoch outcome".into())
        }
        other => Err(CliError::Config(format!("{}: unknown file type {other:?}", path.display()))),
    }
}
