//! Human-facing point encodings used in configuration files and traces.
//!
//! | space        | encoding                                     |
//! |--------------|----------------------------------------------|
//! | plurality    | candidate name, or `"vacant"`                |
//! | scalar       | number                                       |
//! | simplex      | list of numbers                              |
//! | euclidean    | list of numbers                              |
//! | permutations | list of 1-based item numbers, best first     |
//! | subsets      | list of ground-set element names             |
//! | strings      | the text                                     |
//! | table        | point label                                  |

use serde::{Deserialize, Serialize};

use super::{MetricError, MetricSpace, Point};

/// Name of the vacant position in plurality spaces.
pub const VACANT: &str = "vacant";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRepr {
    Integers(Vec<u64>),
    Numbers(Vec<f64>),
    Number(f64),
    Label(String),
    Labels(Vec<String>),
}

impl MetricSpace {
    /// Canonical encoding of a point; also the preimage of vote commitments.
    pub fn encode(&self, x: &Point) -> Result<PointRepr, MetricError> {
        self.ensure_valid(x)?;
        Ok(match (self, x) {
            (MetricSpace::Plurality { candidates }, Point::Candidate(c)) => {
                PointRepr::Label(c.map_or_else(|| VACANT.to_string(), |i| candidates[i].clone()))
            }
            (_, Point::Scalar(v)) => PointRepr::Number(*v),
            (_, Point::Vector(v)) => PointRepr::Numbers(v.clone()),
            (_, Point::Ranking(r)) => PointRepr::Integers(r.iter().map(|&i| i as u64 + 1).collect()),
            (MetricSpace::Subsets { ground, .. }, Point::Subset(mask)) => PointRepr::Labels(
                ground
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, g)| g.clone())
                    .collect(),
            ),
            (_, Point::Text(t)) => PointRepr::Label(t.clone()),
            (MetricSpace::Table { labels, .. }, Point::Node(i)) => PointRepr::Label(labels[*i].clone()),
            _ => unreachable!("validated above"),
        })
    }

    /// Decodes and validates a point.
    pub fn decode(&self, r: &PointRepr) -> Result<Point, MetricError> {
        let fail = |what: &str| MetricError::Decode(format!("{what} for a {} space", self.kind_name()));
        let point = match (self, r) {
            (MetricSpace::Plurality { candidates }, PointRepr::Label(name)) => {
                match candidates.iter().position(|c| c == name) {
                    Some(i) => Point::Candidate(Some(i)),
                    None if name == VACANT => Point::Candidate(None),
                    None => return Err(MetricError::Decode(format!("unknown candidate {name:?}"))),
                }
            }
            (MetricSpace::Scalar { .. }, PointRepr::Number(v)) => Point::Scalar(*v),
            (MetricSpace::Simplex { .. } | MetricSpace::Euclidean { .. }, PointRepr::Numbers(v)) => {
                Point::Vector(v.clone())
            }
            (MetricSpace::Simplex { .. } | MetricSpace::Euclidean { .. }, PointRepr::Integers(v)) => {
                Point::Vector(v.iter().map(|&x| x as f64).collect())
            }
            (MetricSpace::Permutations { .. }, PointRepr::Integers(v)) => {
                if v.contains(&0) {
                    return Err(fail("item numbers start at 1"));
                }
                Point::Ranking(v.iter().map(|&i| i as usize - 1).collect())
            }
            (MetricSpace::Subsets { ground, .. }, PointRepr::Labels(names)) => {
                let mut mask = 0u64;
                for name in names {
                    let i = ground
                        .iter()
                        .position(|g| g == name)
                        .ok_or_else(|| MetricError::Decode(format!("unknown element {name:?}")))?;
                    mask |= 1 << i;
                }
                Point::Subset(mask)
            }
            (MetricSpace::Subsets { .. }, PointRepr::Integers(v)) if v.is_empty() => Point::Subset(0),
            (MetricSpace::Strings { .. }, PointRepr::Label(t)) => Point::Text(t.clone()),
            (MetricSpace::Table { labels, .. }, PointRepr::Label(name)) => Point::Node(
                labels
                    .iter()
                    .position(|l| l == name)
                    .ok_or_else(|| MetricError::Decode(format!("unknown point {name:?}")))?,
            ),
            _ => return Err(fail("unexpected encoding")),
        };
        self.ensure_valid(&point)?;
        Ok(point)
    }

    /// Short display form, e.g. `[0.3400, 0.4000, 0.2600]` or `{a, b}`.
    pub fn describe(&self, x: &Point) -> String {
        match self.encode(x) {
            Ok(PointRepr::Number(v)) => format!("{v}"),
            Ok(PointRepr::Numbers(v)) => {
                format!("[{}]", v.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(", "))
            }
            Ok(PointRepr::Integers(v)) => {
                format!("[{}]", v.iter().map(u64::to_string).collect::<Vec<_>>().join(", "))
            }
            Ok(PointRepr::Labels(v)) => format!("{{{}}}", v.join(", ")),
            Ok(PointRepr::Label(l)) => format!("{l:?}"),
            Err(_) => format!("{x:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let cases = [
            (MetricSpace::plurality(["Alice", "Bob"]).unwrap(), Point::Candidate(Some(1))),
            (MetricSpace::plurality(["Alice", "Bob"]).unwrap(), Point::Candidate(None)),
            (MetricSpace::scalar(0.0, 100.0).unwrap(), Point::Scalar(18.0)),
            (MetricSpace::simplex(3).unwrap(), Point::Vector(vec![0.5, 0.3, 0.2])),
            (MetricSpace::simplex(3).unwrap(), Point::Vector(vec![1.0, 0.0, 0.0])),
            (MetricSpace::permutations(3).unwrap(), Point::Ranking(vec![1, 0, 2])),
            (MetricSpace::subsets(["a", "b", "c"], None).unwrap(), Point::Subset(0b101)),
            (MetricSpace::subsets(["a", "b", "c"], None).unwrap(), Point::Subset(0)),
            (MetricSpace::strings("abc", 4).unwrap(), Point::Text("cab".into())),
            (MetricSpace::graph(["h", "l1"], &[(0, 1, 1.0)]).unwrap(), Point::Node(1)),
        ];
        for (space, point) in cases {
            let repr = space.encode(&point).unwrap();
            let json = serde_json::to_string(&repr).unwrap();
            let back: PointRepr = serde_json::from_str(&json).unwrap();
            assert_eq!(space.decode(&back).unwrap(), point, "{space} via {json}");
        }
    }

    #[test]
    fn decoding_validates() {
        let s = MetricSpace::simplex(3).unwrap();
        assert!(matches!(
            s.decode(&PointRepr::Numbers(vec![0.6, 0.6, -0.2])),
            Err(MetricError::InvalidPoint(_))
        ));
        let p = MetricSpace::permutations(3).unwrap();
        assert!(p.decode(&PointRepr::Integers(vec![1, 1, 3])).is_err());
        assert!(p.decode(&PointRepr::Integers(vec![0, 1, 2])).is_err());
    }
}
