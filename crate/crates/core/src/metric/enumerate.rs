use itertools::Itertools;

use super::{MetricError, MetricSpace, Point};

/// Largest permutation space that is enumerated.
pub const MAX_ENUM_ITEMS: usize = 8;
/// Largest subset ground set that is enumerated.
pub const MAX_ENUM_GROUND: usize = 16;

impl MetricSpace {
    /// Every point of a finite space, each once, in canonical order.
    ///
    /// Strings need an explicit bound; use [`MetricSpace::enumerate_bounded`].
    pub fn enumerate(&self) -> Result<Vec<Point>, MetricError> {
        match self {
            MetricSpace::Plurality { candidates } => Ok(std::iter::once(Point::Candidate(None))
                .chain((0..candidates.len()).map(|i| Point::Candidate(Some(i))))
                .collect()),
            MetricSpace::Permutations { m } if *m <= MAX_ENUM_ITEMS => {
                Ok((0..*m).permutations(*m).map(Point::Ranking).collect())
            }
            MetricSpace::Subsets { ground, size } if ground.len() <= MAX_ENUM_GROUND => {
                Ok((0u64..1 << ground.len())
                    .filter(|mask| size.is_none_or(|k| mask.count_ones() as usize == k))
                    .map(Point::Subset)
                    .collect())
            }
            MetricSpace::Table { labels, .. } => Ok((0..labels.len()).map(Point::Node).collect()),
            _ => Err(MetricError::SpaceNotEnumerable(self.to_string())),
        }
    }

    /// Like [`MetricSpace::enumerate`], but strings are listed up to
    /// `max_len` symbols (capped by the space's own bound).
    pub fn enumerate_bounded(&self, max_len: usize) -> Result<Vec<Point>, MetricError> {
        match self {
            MetricSpace::Strings { alphabet, max_len: cap } => {
                let bound = max_len.min(*cap);
                let mut out = vec![Point::Text(String::new())];
                for len in 1..=bound {
                    out.extend(
                        (0..len)
                            .map(|_| alphabet.iter().copied())
                            .multi_cartesian_product()
                            .map(|cs| Point::Text(cs.into_iter().collect())),
                    );
                }
                Ok(out)
            }
            _ => self.enumerate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(MetricSpace::hypercube(3).unwrap().enumerate().unwrap().len(), 8);
        assert_eq!(MetricSpace::permutations(4).unwrap().enumerate().unwrap().len(), 24);
        let star = MetricSpace::graph(["h", "l1", "l2", "l3"], &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        assert_eq!(star.enumerate().unwrap().len(), 4);
        let fixed = MetricSpace::subsets(["a", "b", "c", "d", "e"], Some(3)).unwrap();
        assert_eq!(fixed.enumerate().unwrap().len(), 10);
        let text = MetricSpace::strings("ab", 6).unwrap();
        assert_eq!(text.enumerate_bounded(2).unwrap().len(), 1 + 2 + 4);
    }

    #[test]
    fn canonical_order_and_uniqueness() {
        for space in [
            MetricSpace::permutations(4).unwrap(),
            MetricSpace::hypercube(4).unwrap(),
            MetricSpace::plurality(["a", "b"]).unwrap(),
            MetricSpace::strings("abc", 3).unwrap(),
        ] {
            let pts = space.enumerate_bounded(3).unwrap();
            for w in pts.windows(2) {
                assert_eq!(space.canonical_cmp(&w[0], &w[1]), std::cmp::Ordering::Less, "{space}");
            }
            assert!(pts.iter().all(|p| space.is_valid(p)));
        }
    }

    #[test]
    fn continuous_spaces_are_not_enumerable() {
        assert!(matches!(
            MetricSpace::simplex(3).unwrap().enumerate(),
            Err(MetricError::SpaceNotEnumerable(_))
        ));
        assert!(MetricSpace::permutations(9).unwrap().enumerate().is_err());
    }
}
