//! Random points, for proposal sources and randomized checks.

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{MetricSpace, Point};

impl MetricSpace {
    /// A random point. Bounded kinds are sampled uniformly (flat Dirichlet on
    /// the simplex); Euclidean points are uniform on the bounding box of
    /// `around`, or the unit box when `around` is empty.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, around: &[Point]) -> Point {
        match self {
            MetricSpace::Plurality { candidates } => {
                let k = rng.random_range(0..=candidates.len());
                Point::Candidate((k < candidates.len()).then_some(k))
            }
            MetricSpace::Scalar { lo, hi } => Point::Scalar(rng.random_range(*lo..=*hi)),
            MetricSpace::Simplex { m } => {
                let g: Vec<f64> = (0..*m).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = g.iter().sum();
                Point::Vector(g.into_iter().map(|x: f64| x / total).collect())
            }
            MetricSpace::Euclidean { dim } => {
                let mut lo = vec![0.0; *dim];
                let mut hi = vec![1.0; *dim];
                let vs: Vec<&[f64]> = around.iter().filter_map(Point::as_vector).collect();
                if !vs.is_empty() {
                    for j in 0..*dim {
                        lo[j] = vs.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
                        hi[j] = vs.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max);
                    }
                }
                Point::Vector((0..*dim).map(|j| if hi[j] > lo[j] { rng.random_range(lo[j]..=hi[j]) } else { lo[j] }).collect())
            }
            MetricSpace::Permutations { m } => {
                let mut r: Vec<usize> = (0..*m).collect();
                r.shuffle(rng);
                Point::Ranking(r)
            }
            MetricSpace::Subsets { ground, size } => {
                let g = ground.len();
                match size {
                    Some(k) => Point::Subset((0..g).choose_multiple(rng, *k).into_iter().fold(0, |m, i| m | 1 << i)),
                    None => {
                        let mask = if g == 64 { u64::MAX } else { (1u64 << g) - 1 };
                        Point::Subset(rng.random::<u64>() & mask)
                    }
                }
            }
            MetricSpace::Strings { alphabet, max_len } => {
                let len = rng.random_range(0..=*max_len);
                Point::Text((0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect())
            }
            MetricSpace::Table { labels, .. } => Point::Node(rng.random_range(0..labels.len())),
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn samples_are_valid() {
        let spaces = [
            MetricSpace::plurality(["a", "b"]).unwrap(),
            MetricSpace::scalar(0.0, 100.0).unwrap(),
            MetricSpace::simplex(4).unwrap(),
            MetricSpace::euclidean(2).unwrap(),
            MetricSpace::permutations(5).unwrap(),
            MetricSpace::subsets(["a", "b", "c", "d"], Some(2)).unwrap(),
            MetricSpace::hypercube(7).unwrap(),
            MetricSpace::strings("ab", 4).unwrap(),
            MetricSpace::graph(["h", "l"], &[(0, 1, 1.0)]).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for space in &spaces {
            for _ in 0..200 {
                let x = space.sample_point(&mut rng, &[]);
                assert!(space.is_valid(&x), "{space}: {x:?}");
            }
        }
    }
}
