//! Candidate combinations of two points, used by the pairwise heuristic.

use itertools::Itertools;

use super::{perm, strings, MetricError, MetricSpace, Point};

pub const DEFAULT_MIDPOINT_CAP: usize = 8;

/// Above this many balanced subsets the candidates are unranked directly
/// instead of listed.
const SUBSET_LISTING_LIMIT: u128 = 1 << 16;

impl MetricSpace {
    /// A bounded set of points between `p` and `q`.
    ///
    /// Scalars and vectors give the arithmetic midpoint. Rankings give the
    /// points `floor(d/2)` and `ceil(d/2)` swaps along the bubble-sort
    /// geodesic from `p` to `q`. Subsets flip a balanced part of `p ^ q`;
    /// when there are more than `cap` of them, an evenly strided selection
    /// in bitmask order is kept. Texts apply the first half of an optimal
    /// edit script. Table points give the interior points of geodesics,
    /// most balanced first. Endpoints are never returned, so the set is
    /// empty when `p` and `q` are adjacent.
    pub fn midpoint_candidates(&self, p: &Point, q: &Point, cap: usize) -> Result<Vec<Point>, MetricError> {
        let d = self.distance(p, q)?;
        if d == 0.0 {
            return Err(MetricError::DegeneratePair);
        }
        let cap = cap.max(1);
        let out = match (self, p, q) {
            (MetricSpace::Plurality { .. }, _, _) => Vec::new(),
            (MetricSpace::Scalar { .. }, Point::Scalar(a), Point::Scalar(b)) => {
                vec![Point::Scalar(0.5 * (a + b))]
            }
            (MetricSpace::Simplex { .. } | MetricSpace::Euclidean { .. }, Point::Vector(a), Point::Vector(b)) => {
                vec![Point::Vector(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())]
            }
            (MetricSpace::Permutations { .. }, Point::Ranking(a), Point::Ranking(b)) => {
                let d = d as usize;
                let mut out: Vec<Point> = Vec::new();
                for steps in [d / 2, d.div_ceil(2)] {
                    if steps == 0 || steps == d {
                        continue;
                    }
                    let c = Point::Ranking(perm::geodesic_point(a, b, steps));
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
                out
            }
            (MetricSpace::Subsets { size, .. }, Point::Subset(a), Point::Subset(b)) => {
                subset_midpoints(*a, *b, *size, cap)
            }
            (MetricSpace::Strings { .. }, Point::Text(a), Point::Text(b)) => {
                let a: Vec<char> = a.chars().collect();
                let b: Vec<char> = b.chars().collect();
                let script = strings::edit_script(&a, &b);
                let mut cur = a.clone();
                for op in &script[..script.len() / 2] {
                    op.apply(&mut cur);
                }
                if cur == a || cur == b {
                    Vec::new()
                } else {
                    vec![Point::Text(cur.into_iter().collect())]
                }
            }
            (MetricSpace::Table { labels, distances }, Point::Node(a), Point::Node(b)) => {
                let tol = 1e-9 * (1.0 + d);
                let mut inner: Vec<usize> = (0..labels.len())
                    .filter(|&x| x != *a && x != *b)
                    .filter(|&x| distances[*a][x] + distances[x][*b] <= d + tol)
                    .collect();
                inner.sort_by(|&x, &y| {
                    let bx = (distances[*a][x] - distances[*b][x]).abs();
                    let by = (distances[*a][y] - distances[*b][y]).abs();
                    bx.total_cmp(&by).then(x.cmp(&y))
                });
                inner.into_iter().map(Point::Node).collect()
            }
            _ => unreachable!("distance checked the payload kinds"),
        };
        Ok(out.into_iter().take(cap).collect())
    }
}

fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// The `rank`-th `k`-combination of `0..n` in lexicographic order.
fn unrank_combination(n: u32, k: u32, mut rank: u128) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    let mut next = 0;
    for left in (1..=k).rev() {
        let mut i = next;
        loop {
            let with_i = binomial(n - i - 1, left - 1);
            if rank < with_i {
                break;
            }
            rank -= with_i;
            i += 1;
        }
        out.push(i);
        next = i + 1;
    }
    out
}

fn subset_midpoints(a: u64, b: u64, size: Option<usize>, cap: usize) -> Vec<Point> {
    let diff = a ^ b;
    let bits: Vec<u64> = (0..64).filter(|i| diff >> i & 1 == 1).map(|i| 1u64 << i).collect();
    let d = bits.len() as u32;
    // Flip counts that keep a fixed size must be even.
    let flips: Vec<u32> = match size {
        None => vec![d / 2, d.div_ceil(2)],
        Some(_) => {
            let t = d / 2;
            vec![2 * (t / 2), 2 * t.div_ceil(2)]
        }
    }
    .into_iter()
    .filter(|&r| r > 0 && r < d)
    .dedup()
    .collect();

    let keeps_size = |x: u64| size.is_none_or(|k| x.count_ones() as usize == k);
    let total: u128 = flips.iter().map(|&r| binomial(d, r)).sum();
    if total <= SUBSET_LISTING_LIMIT {
        let mut all: Vec<u64> = flips
            .iter()
            .flat_map(|&r| bits.iter().combinations(r as usize).map(|c| a ^ c.into_iter().fold(0, |m, &bit| m | bit)))
            .filter(|&x| keeps_size(x))
            .collect();
        all.sort_unstable();
        all.dedup();
        let len = all.len();
        if len > cap {
            all = (0..cap).map(|i| all[i * len / cap]).collect();
        }
        return all.into_iter().map(Point::Subset).collect();
    }

    let per_size = cap.div_ceil(flips.len().max(1));
    let mut out = Vec::new();
    for &r in &flips {
        let count = binomial(d, r);
        for i in 0..per_size as u128 {
            let rank = i * count / per_size as u128;
            let mask = unrank_combination(d, r, rank).into_iter().fold(0, |m, j| m | bits[j as usize]);
            let x = a ^ mask;
            if keeps_size(x) {
                out.push(x);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out.truncate(cap);
    out.into_iter().map(Point::Subset).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_and_simplex_midpoints() {
        let s = MetricSpace::scalar(0.0, 100.0).unwrap();
        assert_eq!(
            s.midpoint_candidates(&Point::Scalar(10.0), &Point::Scalar(20.0), 8).unwrap(),
            vec![Point::Scalar(15.0)]
        );
        let x = MetricSpace::simplex(3).unwrap();
        let c = x
            .midpoint_candidates(&Point::Vector(vec![1.0, 0.0, 0.0]), &Point::Vector(vec![0.0, 1.0, 0.0]), 8)
            .unwrap();
        assert_eq!(c, vec![Point::Vector(vec![0.5, 0.5, 0.0])]);
    }

    #[test]
    fn star_hub_is_the_midpoint_of_two_leaves() {
        let star = MetricSpace::graph(["h", "l1", "l2", "l3"], &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let c = star.midpoint_candidates(&Point::Node(2), &Point::Node(3), 8).unwrap();
        assert_eq!(c, vec![Point::Node(0)]);
        assert!(star.midpoint_candidates(&Point::Node(0), &Point::Node(1), 8).unwrap().is_empty());
    }

    #[test]
    fn subset_interval() {
        // {a,b} and {b,c}: the interval is {b} ⊆ x ⊆ {a,b,c}
        let s = MetricSpace::subsets(["a", "b", "c"], None).unwrap();
        let c = s.midpoint_candidates(&Point::Subset(0b011), &Point::Subset(0b110), 4).unwrap();
        assert_eq!(c, vec![Point::Subset(0b010), Point::Subset(0b111)]);
        for x in &c {
            let Point::Subset(m) = x else { unreachable!() };
            assert_eq!(m & 0b010, 0b010);
            assert_eq!(m & !0b111, 0);
        }
    }

    #[test]
    fn fixed_size_subsets_keep_their_size() {
        let s = MetricSpace::subsets(["a", "b", "c", "d", "e", "f"], Some(3)).unwrap();
        let c = s.midpoint_candidates(&Point::Subset(0b000111), &Point::Subset(0b111000), 8).unwrap();
        assert!(!c.is_empty());
        assert!(c.iter().all(|x| s.is_valid(x)));
    }

    #[test]
    fn ranking_midpoints_lie_on_the_geodesic() {
        let s = MetricSpace::permutations(5).unwrap();
        let p = Point::Ranking(vec![0, 1, 2, 3, 4]);
        let q = Point::Ranking(vec![4, 3, 2, 1, 0]);
        let c = s.midpoint_candidates(&p, &q, 8).unwrap();
        assert_eq!(c.len(), 1); // d = 10 is even
        let dpc = s.distance(&p, &c[0]).unwrap();
        assert_eq!(dpc, 5.0);
        assert_eq!(dpc + s.distance(&c[0], &q).unwrap(), 10.0);
    }

    #[test]
    fn text_midpoint() {
        let s = MetricSpace::strings("abcd", 6).unwrap();
        let p = Point::Text("ab".into());
        let q = Point::Text("abcd".into());
        assert_eq!(s.midpoint_candidates(&p, &q, 8).unwrap(), vec![Point::Text("abc".into())]);
    }

    #[test]
    fn degenerate_pair() {
        let s = MetricSpace::hypercube(3).unwrap();
        assert_eq!(
            s.midpoint_candidates(&Point::Subset(1), &Point::Subset(1), 8),
            Err(MetricError::DegeneratePair)
        );
    }

    #[test]
    fn unranking_matches_listing() {
        let listed: Vec<Vec<u32>> = (0..6u32).combinations(3).collect();
        for (rank, combo) in listed.iter().enumerate() {
            assert_eq!(&unrank_combination(6, 3, rank as u128), combo);
        }
    }

    #[test]
    fn large_ground_sets_are_sampled() {
        let s = MetricSpace::hypercube(40).unwrap();
        let c = s.midpoint_candidates(&Point::Subset(0), &Point::Subset((1u64 << 40) - 1), 8).unwrap();
        assert_eq!(c.len(), 8);
        assert!(c.iter().all(|x| s.distance(&Point::Subset(0), x).unwrap() == 20.0));
    }
}
