use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::index_set::IndexSet;
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// A probability measure on the points of `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureFile", into = "MeasureFile")]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    Uniform,
    /// Unit mass at the point with this index.
    PointMass(usize),
    /// Nonnegative weights, normalized to total mass 1.
    Explicit(Vec<f64>),
    /// Flat Dirichlet draw.
    Dirichlet {
        seed: u64,
    },
}

pub fn make_measure(set: &IndexSet, kind: MeasureKind) -> Result<DiscreteMeasure> {
    let n = set.len();
    match kind {
        MeasureKind::Uniform => DiscreteMeasure::new(vec![1.0 / n as f64; n]),
        MeasureKind::PointMass(i) => {
            set.check_index(i)?;
            let mut w = vec![0.0; n];
            w[i] = 1.0;
            DiscreteMeasure::new(w)
        }
        MeasureKind::Explicit(w) => {
            if w.len() != n {
                return Err(Error::SizeMismatch {
                    measure: w.len(),
                    points: n,
                });
            }
            DiscreteMeasure::normalized(w)
        }
        MeasureKind::Dirichlet { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(dirichlet(n, &mut rng))
        }
    }
}

/// Flat Dirichlet weights from normalized unit exponentials.
pub fn dirichlet<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DiscreteMeasure {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        if let Ok(m) = DiscreteMeasure::normalized(raw) {
            return m;
        }
    }
}

impl DiscreteMeasure {
    /// Accepts weights that already sum to 1 (within 1e-12).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        validate(&weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(DiscreteMeasure { weights })
    }

    /// Divides nonnegative weights by their total.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        validate(&weights)?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "total weight {total} is not positive and finite"
            )));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        DiscreteMeasure::new(weights)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self, range: std::ops::Range<usize>) -> f64 {
        self.weights[range].iter().sum()
    }

    pub fn check_against(&self, set: &IndexSet) -> Result<()> {
        if self.len() == set.len() {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                measure: self.len(),
                points: set.len(),
            })
        }
    }
}

fn validate(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidMeasure("no weights".into()));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
    {
        return Err(Error::InvalidMeasure(format!("weight {i} is {w}")));
    }
    Ok(())
}

/// `m(B(t, r))` for the closed ball `{s : |s - t| <= r}` around point `t`.
pub fn ball_mass(m: &DiscreteMeasure, set: &IndexSet, t: usize, r: f64) -> Result<f64> {
    m.check_against(set)?;
    set.check_index(t)?;
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius {r} must be nonnegative")));
    }
    let pos = set.positions();
    let center = pos[t];
    let lo = pos[..t].partition_point(|p| p.distance(center) > r);
    let hi = t + 1 + pos[t + 1..].partition_point(|p| p.distance(center) <= r);
    Ok(m.mass(lo..hi).min(1.0))
}

/// On-disk form: either `{"weights": [...]}` or a bare array.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MeasureFile {
    Object {
        weights: Vec<f64>,
    },
    #[serde(skip_serializing)]
    Bare(Vec<f64>),
}

impl TryFrom<MeasureFile> for DiscreteMeasure {
    type Error = Error;
    fn try_from(f: MeasureFile) -> Result<Self> {
        match f {
            MeasureFile::Object { weights } | MeasureFile::Bare(weights) => {
                DiscreteMeasure::normalized(weights)
            }
        }
    }
}

impl From<DiscreteMeasure> for MeasureFile {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureFile::Object { weights: m.weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::position::Position;

    fn set(points: &[f64]) -> IndexSet {
        IndexSet::from_positions(
            points
                .iter()
                .map(|&p| Position::from_f64(p).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn kinds() {
        let t = set(&[0.0, 0.1, 0.2]);
        let u = make_measure(&t, MeasureKind::Uniform).unwrap();
        assert!(u.weights().iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-16));
        assert_eq!(
            make_measure(&t, MeasureKind::PointMass(0))
                .unwrap()
                .weights(),
            &[1.0, 0.0, 0.0]
        );
        let t2 = set(&[0.0, 0.25]);
        assert_eq!(
            make_measure(&t2, MeasureKind::Explicit(vec![2.0, 2.0]))
                .unwrap()
                .weights(),
            &[0.5, 0.5]
        );
    }

    #[test]
    fn invalid_measures() {
        let t = set(&[0.0, 0.25]);
        assert!(matches!(
            make_measure(&t, MeasureKind::Explicit(vec![1.0, -1.0])),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(matches!(
            make_measure(&t, MeasureKind::Explicit(vec![0.0, 0.0])),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(matches!(
            make_measure(&t, MeasureKind::Explicit(vec![1.0])),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(matches!(
            make_measure(&t, MeasureKind::PointMass(2)),
            Err(Error::NotInSet(_))
        ));
        assert!(DiscreteMeasure::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn dirichlet_is_seeded() {
        let t = set(&[0.0, 0.1, 0.2, 0.3]);
        let a = make_measure(&t, MeasureKind::Dirichlet { seed: 9 }).unwrap();
        let b = make_measure(&t, MeasureKind::Dirichlet { seed: 9 }).unwrap();
        let c = make_measure(&t, MeasureKind::Dirichlet { seed: 10 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_balls() {
        let t = set(&[0.0, 0.25]);
        let u = make_measure(&t, MeasureKind::Uniform).unwrap();
        assert_eq!(ball_mass(&u, &t, 0, 0.1).unwrap(), 0.5);
        assert_eq!(ball_mass(&u, &t, 0, 0.25).unwrap(), 1.0);
        assert_eq!(ball_mass(&u, &t, 1, 0.0).unwrap(), 0.5);
        assert!(matches!(ball_mass(&u, &t, 2, 0.1), Err(Error::NotInSet(_))));
        assert!(ball_mass(&u, &t, 0, -1.0).is_err());
    }

    #[test]
    fn measure_file_forms() {
        let a: DiscreteMeasure = serde_json::from_str(r#"{"weights":[1,3]}"#).unwrap();
        let b: DiscreteMeasure = serde_json::from_str("[1,3]").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.weights(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<DiscreteMeasure>("[0,0]").is_err());
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"{"weights":[0.25,0.75]}"#
        );
    }
}
