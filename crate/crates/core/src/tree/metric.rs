use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("metric has no points")]
    Empty,
    #[error("row {0} has length {1}, expected {2}")]
    NotSquare(usize, usize, usize),
    #[error("{0} names for {1} points")]
    NameCount(usize, usize),
    #[error("dist({0},{0}) is not zero")]
    NonZeroDiagonal(usize),
    #[error("dist({0},{1}) is negative")]
    Negative(usize, usize),
    #[error("dist({0},{1}) is zero for distinct points")]
    ZeroDistance(usize, usize),
    #[error("dist({0},{1}) != dist({1},{0})")]
    Asymmetric(usize, usize),
    #[error("triangle inequality fails: d({0},{2}) > d({0},{1}) + d({1},{2})")]
    Triangle(usize, usize, usize),
    #[error("cannot parse distance {0:?}")]
    Parse(String),
    #[error("integer overflow while scaling distances")]
    Overflow,
    #[error("point {0} is out of range for a metric with {1} points")]
    UnknownPoint(usize, usize),
}

/// Finite metric with exact rational distances.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace {
    names: Vec<String>,
    dist: Vec<Vec<Rational>>,
}

impl MetricSpace {
    pub fn new(names: Option<Vec<String>>, dist: Vec<Vec<Rational>>) -> Result<Self, MetricError> {
        let n = dist.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare(i, row.len(), n));
            }
        }
        let names = match names {
            Some(v) if v.len() != n => return Err(MetricError::NameCount(v.len(), n)),
            Some(v) => v,
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(MetricError::NonZeroDiagonal(i));
            }
            for j in 0..n {
                if dist[i][j].is_negative() {
                    return Err(MetricError::Negative(i, j));
                }
                if i != j && dist[i][j].is_zero() {
                    return Err(MetricError::ZeroDistance(i, j));
                }
                if dist[i][j] != dist[j][i] {
                    return Err(MetricError::Asymmetric(i, j));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if dist[a][c] > dist[a][b] + dist[b][c] {
                        return Err(MetricError::Triangle(a, b, c));
                    }
                }
            }
        }
        Ok(MetricSpace { names, dist })
    }

    pub fn from_integers(dist: &[Vec<i64>]) -> Result<Self, MetricError> {
        let d = dist
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect())
            .collect();
        Self::new(None, d)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dist(&self, i: usize, j: usize) -> Rational {
        self.dist[i][j]
    }

    pub fn check_point(&self, i: usize) -> Result<(), MetricError> {
        if i < self.len() {
            Ok(())
        } else {
            Err(MetricError::UnknownPoint(i, self.len()))
        }
    }

    pub fn min_positive(&self) -> Option<Rational> {
        self.pairs().map(|(i, j)| self.dist[i][j]).min()
    }

    pub fn max_distance(&self) -> Rational {
        self.pairs().map(|(i, j)| self.dist[i][j]).max().unwrap_or_else(Rational::zero)
    }

    /// Max over min non-zero distance; 1 for a single point.
    pub fn aspect_ratio(&self) -> Rational {
        match self.min_positive() {
            Some(m) => self.max_distance() / m,
            None => Rational::from_integer(1),
        }
    }

    /// Distances multiplied by the smallest positive rational that makes
    /// every entry an integer with gcd 1. Returns the matrix and the factor.
    pub fn integer_scaled(&self) -> Result<(Vec<Vec<i64>>, Rational), MetricError> {
        let mut lcm = 1i64;
        for (i, j) in self.pairs() {
            lcm = lcm.lcm(self.dist[i][j].denom());
        }
        let mut out = vec![vec![0i64; self.len()]; self.len()];
        let mut g = 0i64;
        for (i, j) in self.pairs() {
            let d = self.dist[i][j];
            let v = d.numer().checked_mul(lcm / d.denom()).ok_or(MetricError::Overflow)?;
            out[i][j] = v;
            out[j][i] = v;
            g = g.gcd(&v);
        }
        if g > 1 {
            out.iter_mut().flatten().for_each(|x| *x /= g);
        }
        Ok((out, Rational::new(lcm, g.max(1))))
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }
}

pub const METRIC_FORMAT: &str = "metric/v1";

/// A distance entry in a `metric/v1` file: an integer or a `"p/q"` string.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum DistValue {
    Int(i64),
    Text(String),
}

impl DistValue {
    pub fn parse(&self) -> Result<Rational, MetricError> {
        match self {
            DistValue::Int(x) => Ok(Rational::from_integer(*x)),
            DistValue::Text(s) => {
                let bad = || MetricError::Parse(s.clone());
                match s.split_once('/') {
                    Some((p, q)) => {
                        let p: i64 = p.trim().parse().map_err(|_| bad())?;
                        let q: i64 = q.trim().parse().map_err(|_| bad())?;
                        if q == 0 {
                            return Err(bad());
                        }
                        Ok(Rational::new(p, q))
                    }
                    None => s.trim().parse().map(Rational::from_integer).map_err(|_| bad()),
                }
            }
        }
    }

    fn from_rational(r: Rational) -> Self {
        if r.is_integer() {
            DistValue::Int(r.to_integer())
        } else {
            DistValue::Text(format!("{}/{}", r.numer(), r.denom()))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MetricDescription {
    #[serde(default = "metric_format")]
    pub format: String,
    pub points: Vec<String>,
    pub dist: Vec<Vec<DistValue>>,
}

fn metric_format() -> String {
    METRIC_FORMAT.to_string()
}

impl MetricDescription {
    pub fn build(&self) -> Result<MetricSpace, MetricError> {
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(DistValue::parse).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        MetricSpace::new(Some(self.points.clone()), dist)
    }
}

impl From<&MetricSpace> for MetricDescription {
    fn from(m: &MetricSpace) -> Self {
        MetricDescription {
            format: metric_format(),
            points: m.names.clone(),
            dist: m
                .dist
                .iter()
                .map(|r| r.iter().copied().map(DistValue::from_rational).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn validation() {
        assert_eq!(MetricSpace::new(None, vec![]), Err(MetricError::Empty));
        assert!(matches!(
            MetricSpace::from_integers(&[vec![0, 1], vec![2, 0]]),
            Err(MetricError::Asymmetric(0, 1))
        ));
        assert!(matches!(
            MetricSpace::from_integers(&[vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]]),
            Err(MetricError::Triangle(0, 1, 2))
        ));
        assert!(matches!(
            MetricSpace::from_integers(&[vec![0, 0], vec![0, 0]]),
            Err(MetricError::ZeroDistance(0, 1))
        ));
        assert!(MetricSpace::from_integers(&[vec![0]]).is_ok());
    }

    #[test]
    fn integer_scaling() {
        let m = MetricSpace::new(
            None,
            vec![
                vec![r(0, 1), r(1, 2), r(3, 4)],
                vec![r(1, 2), r(0, 1), r(1, 2)],
                vec![r(3, 4), r(1, 2), r(0, 1)],
            ],
        )
        .unwrap();
        let (ints, f) = m.integer_scaled().unwrap();
        assert_eq!(ints[0][1], 2);
        assert_eq!(ints[0][2], 3);
        assert_eq!(f, r(4, 1));
        assert_eq!(m.aspect_ratio(), r(3, 2));

        let m = MetricSpace::from_integers(&[vec![0, 6], vec![6, 0]]).unwrap();
        let (ints, f) = m.integer_scaled().unwrap();
        assert_eq!(ints[0][1], 1);
        assert_eq!(f, r(1, 6));
    }

    #[test]
    fn description_round_trip() {
        let text = r#"{"points":["a","b"],"dist":[[0,"3/2"],["3/2",0]]}"#;
        let d: MetricDescription = serde_json::from_str(text).unwrap();
        let m = d.build().unwrap();
        assert_eq!(m.dist(0, 1), r(3, 2));
        let back = MetricDescription::from(&m);
        assert_eq!(back.build().unwrap(), m);
        assert_eq!(back.format, METRIC_FORMAT);
    }
}
