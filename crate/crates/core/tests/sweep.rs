use metgov_core::sim::{sweep, sweep_records, ProfileRecord, Setting, SweepConfig};

fn configs(seed: u64) -> Vec<SweepConfig> {
    [
        (Setting::Euclid2d, 5),
        (Setting::Simplex { m: 3 }, 5),
        (Setting::Hypercube { size: 6 }, 7),
        (Setting::Permutations { m: 4 }, 5),
    ]
    .into_iter()
    .map(|(setting, n)| SweepConfig::new(setting, n, 30, seed))
    .collect()
}

fn bytes(records: &[ProfileRecord]) -> String {
    serde_json::to_string(records).unwrap()
}

#[test]
fn same_seed_same_records() {
    for c in configs(11) {
        let a = sweep_records(&c, None).unwrap();
        let b = sweep_records(&c, None).unwrap();
        assert_eq!(bytes(&a), bytes(&b), "{}", c.setting);
        assert!(a.iter().enumerate().all(|(i, r)| r.index == i));
    }
}

#[test]
fn seeds_matter() {
    let a = sweep_records(&configs(1)[2], None).unwrap();
    let b = sweep_records(&configs(2)[2], None).unwrap();
    assert_ne!(bytes(&a), bytes(&b));
}

#[test]
fn serial_and_parallel_agree() {
    for c in configs(5) {
        let serial = sweep_records(&c, Some(1)).unwrap();
        for jobs in [None, Some(2), Some(3)] {
            assert_eq!(bytes(&serial), bytes(&sweep_records(&c, jobs).unwrap()), "{} jobs={jobs:?}", c.setting);
        }
    }
}

#[test]
fn statistics_recomputed_from_records() {
    for c in configs(9) {
        let (stats, records) = sweep(&c, None).unwrap();
        let positive: Vec<&ProfileRecord> = records.iter().filter(|r| r.cg > 1e-9).collect();
        let freq = positive.len() as f64 / records.len() as f64;
        let hit = records.iter().filter(|r| r.heuristic_score.is_some()).count() as f64 / records.len() as f64;
        let closing = if positive.is_empty() {
            0.0
        } else {
            positive
                .iter()
                .map(|r| r.heuristic_score.map_or(0.0, |h| ((h - r.peak.max(0.0)) / r.cg).clamp(0.0, 1.0)))
                .sum::<f64>()
                / positive.len() as f64
        };
        assert_eq!(stats.profiles, c.profiles);
        assert!((stats.positive_cg_freq - freq).abs() < 1e-12, "{}", c.setting);
        assert!((stats.hit_rate - hit).abs() < 1e-12, "{}", c.setting);
        assert!((stats.gap_closing_ratio - closing).abs() < 1e-9, "{}", c.setting);
        assert!(records.iter().all(|r| r.opt > 0.0), "vacuous profiles are redrawn");
    }
}
