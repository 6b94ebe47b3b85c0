use metgov_core::amendment::{h_rule, h_rule_candidates, HRuleMode};
use metgov_core::governance::{aggregate_score, positional_voter, Aggregator};
use metgov_core::sim::{property_spaces, Property};
use metgov_core::{Electorate, MetricSpace, Point, Rule, Threshold};
use proptest::prelude::*;

const CASES: u32 = 10_000;

fn config() -> ProptestConfig {
    ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() }
}

/// Runs `property` for a proptest-chosen space and seed.
fn holds(property: Property, space: usize, seed: u64) -> Result<(), TestCaseError> {
    let spaces = property.spaces();
    let space = (!spaces.is_empty()).then(|| &spaces[space % spaces.len()]);
    property.check(space, seed).map(|_| ()).map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn metric_axioms(space in 0usize..64, seed in any::<u64>()) {
        holds(Property::MetricAxioms, space, seed)?;
    }

    #[test]
    fn score_positive_iff_supported(space in 0usize..64, seed in any::<u64>()) {
        holds(Property::SupportEquivalence, space, seed)?;
    }

    #[test]
    fn unsupported_rounds_keep_the_status_quo(space in 0usize..64, seed in any::<u64>()) {
        holds(Property::RealityAwareness, space, seed)?;
    }

    #[test]
    fn supermajority_points_win(space in 0usize..64, seed in any::<u64>()) {
        holds(Property::Majoritarity, space, seed)?;
    }

    #[test]
    fn rounds_are_anonymous(space in 0usize..64, seed in any::<u64>()) {
        holds(Property::Anonymity, space, seed)?;
    }

    #[test]
    fn no_gap_on_a_line(seed in any::<u64>()) {
        holds(Property::ZeroGap1D, 0, seed)?;
    }

    #[test]
    fn gap_within_distance_to_nearest_vote(space in 0usize..64, seed in any::<u64>()) {
        holds(Property::LipschitzBound, space, seed)?;
    }

    #[test]
    fn heuristic_only_returns_improvements(space in 0usize..64, seed in any::<u64>()) {
        holds(Property::HeuristicGating, space, seed)?;
    }

    #[test]
    fn epochs_terminate_with_a_separated_ledger(space in 0usize..64, seed in any::<u64>()) {
        holds(Property::EpochTermination, space, seed)?;
    }

    #[test]
    fn new_proposals_win_or_change_nothing(space in 0usize..64, seed in any::<u64>()) {
        holds(Property::ChannelMonotonicity, space, seed)?;
    }

    #[test]
    fn aggregators_are_one_lipschitz(
        pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..15),
        sigma in 0.5f64..0.99,
    ) {
        let (u, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let sup = u.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let sigma = Threshold::new(sigma).unwrap();
        for agg in [Aggregator::GeneralisedMedian, Aggregator::Mean] {
            let a = aggregate_score(agg, sigma, &u).unwrap();
            let b = aggregate_score(agg, sigma, &v).unwrap();
            prop_assert!((a - b).abs() <= sup + 1e-12, "{agg}: |{a} - {b}| > {sup}");
        }
    }

    #[test]
    fn line_scores_follow_the_positional_voter(
        votes in prop::collection::vec(0.0f64..=100.0, 1..12),
        s in 0.0f64..=100.0,
        p in 0.0f64..=100.0,
        sigma in 0.5f64..0.99,
    ) {
        let space = MetricSpace::scalar(0.0, 100.0).unwrap();
        let sigma = Threshold::new(sigma).unwrap();
        let rule = Rule { aggregator: Aggregator::GeneralisedMedian, sigma };
        let pts: Vec<Point> = votes.iter().map(|&x| Point::Scalar(x)).collect();
        let sq = Point::Scalar(s);
        let el = Electorate::new(&space, &sq, &pts).unwrap();
        let got = el.score(&Point::Scalar(p), &rule).unwrap().score;
        let want = positional_voter(&votes, s, p, sigma).map_or(0.0, |q| (q - s).abs() - (q - p).abs());
        prop_assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
    }

    #[test]
    fn scalar_axioms(x in -1e6f64..1e6, y in -1e6f64..1e6, z in -1e6f64..1e6) {
        let space = MetricSpace::scalar(-1e6, 1e6).unwrap();
        let d = |a: f64, b: f64| space.distance(&Point::Scalar(a), &Point::Scalar(b)).unwrap();
        prop_assert_eq!(d(x, y), d(y, x));
        prop_assert_eq!(d(x, y) == 0.0, x == y);
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-9);
    }

    #[test]
    fn h_rule_moves_to_the_feasible_extremum(
        votes in prop::collection::vec(prop::sample::select(vec![0.5, 0.55, 0.6, 0.65, 2.0 / 3.0, 0.7, 0.75, 0.8, 0.9]), 1..12),
        current in prop::sample::select(vec![0.5, 0.6, 2.0 / 3.0, 0.75]),
        dense in any::<bool>(),
    ) {
        let mode = if dense { HRuleMode::DenseGrid } else { HRuleMode::VotedValues };
        let sigma = Threshold::new(current).unwrap();
        let next = h_rule(sigma, &votes, mode).unwrap();
        let n = votes.len();
        // A raise needs its own supermajority at or above it; a lowering
        // needs the current one at or below it.
        let passes = |c: f64| {
            if c > current {
                let backers = votes.iter().filter(|&&v| v >= c - 1e-12).count();
                backers >= Threshold::new(c).unwrap().required(n)
            } else {
                votes.iter().filter(|&&v| v <= c + 1e-12).count() >= sigma.required(n)
            }
        };
        let cands = h_rule_candidates(sigma, &votes, mode);
        let raises: Vec<f64> = cands.iter().copied().filter(|&c| c > current + 1e-12).collect();
        let lowers: Vec<f64> = cands.iter().copied().filter(|&c| c < current - 1e-12).collect();
        let next = next.value();
        if next > current {
            prop_assert!(passes(next));
            prop_assert!(raises.iter().filter(|&&c| c > next).all(|&c| !passes(c)));
        } else if next < current {
            prop_assert!(passes(next));
            prop_assert!(raises.iter().all(|&c| !passes(c)));
            prop_assert!(lowers.iter().filter(|&&c| c < next).all(|&c| !passes(c)));
        } else {
            prop_assert!(raises.iter().chain(&lowers).all(|&c| !passes(c)));
        }
    }
}

#[test]
fn property_spaces_cover_all_kinds() {
    let mut kinds: Vec<&str> = property_spaces().iter().map(|s| s.kind_name()).collect();
    kinds.dedup();
    assert!(kinds.len() >= 7, "{kinds:?}");
}
