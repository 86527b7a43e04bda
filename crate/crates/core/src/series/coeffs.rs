use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a coefficient sequence is specified in input files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CoefficientSpec {
    Explicit {
        values: Vec<f64>,
    },
    /// `a_n = n^-exponent`
    Power {
        exponent: f64,
        count: usize,
    },
    /// `a_n = ratio^(n/2)`, i.e. `a_n^2 = ratio^n`
    Geometric {
        ratio: f64,
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Power { exponent: f64 },
    Geometric { ratio: f64 },
}

/// Mass `sum_{n > N} a_n^2` dropped by truncating a named family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "lowercase")]
pub enum TailMass {
    /// Explicit lists carry no information past `N`.
    Unknown,
    Finite(f64),
    Divergent,
}

/// Positive weights `a_1, ..., a_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSequence {
    values: Vec<f64>,
    squares: Vec<f64>,
    family: Option<Family>,
}

impl CoefficientSequence {
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let squares = values.iter().map(|a| a * a).collect();
        Self::checked(values, squares, None)
    }

    pub fn power(exponent: f64, count: usize) -> Result<Self> {
        if !exponent.is_finite() {
            return Err(Error::InvalidFamily(format!(
                "power exponent {exponent} is not finite"
            )));
        }
        let values = (1..=count).map(|n| (n as f64).powf(-exponent)).collect();
        let squares = (1..=count)
            .map(|n| (n as f64).powf(-2.0 * exponent))
            .collect();
        Self::checked(values, squares, Some(Family::Power { exponent }))
    }

    pub fn geometric(ratio: f64, count: usize) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidFamily(format!(
                "geometric ratio {ratio} must be positive"
            )));
        }
        let values = (1..=count).map(|n| ratio.powf(n as f64 / 2.0)).collect();
        // powi keeps ratio^n exact for dyadic ratios such as 0.5
        let squares = (1..=count).map(|n| ratio.powi(n as i32)).collect();
        Self::checked(values, squares, Some(Family::Geometric { ratio }))
    }

    pub fn from_spec(spec: &CoefficientSpec) -> Result<Self> {
        match spec {
            CoefficientSpec::Explicit { values } => Self::explicit(values.clone()),
            CoefficientSpec::Power { exponent, count } => Self::power(*exponent, *count),
            CoefficientSpec::Geometric { ratio, count } => Self::geometric(*ratio, *count),
        }
    }

    fn checked(values: Vec<f64>, squares: Vec<f64>, family: Option<Family>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        for (i, (&a, &a2)) in values.iter().zip(&squares).enumerate() {
            if !(a.is_finite() && a > 0.0 && a2.is_finite() && a2 > 0.0) {
                return Err(Error::InvalidCoefficient {
                    index: i + 1,
                    value: a,
                });
            }
        }
        Ok(CoefficientSequence {
            values,
            squares,
            family,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `a_n^2`, computed directly for named families.
    pub fn squares(&self) -> &[f64] {
        &self.squares
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn tail_mass(&self) -> TailMass {
        let n = self.len();
        match self.family {
            None => TailMass::Unknown,
            Some(Family::Geometric { ratio }) => {
                if ratio < 1.0 {
                    TailMass::Finite(ratio.powi(n as i32 + 1) / (1.0 - ratio))
                } else {
                    TailMass::Divergent
                }
            }
            Some(Family::Power { exponent }) => {
                let s = 2.0 * exponent;
                if s <= 1.0 {
                    TailMass::Divergent
                } else {
                    TailMass::Finite(zeta_tail(s, n as u64 + 1))
                }
            }
        }
    }
}

/// `sum_{n >= from} n^-s` for `s > 1`: a direct block followed by Euler-Maclaurin.
fn zeta_tail(s: f64, from: u64) -> f64 {
    const DIRECT: u64 = 10_000;
    let direct: f64 = (from..from + DIRECT)
        .map(|n| (n as f64).powf(-s))
        .rev()
        .sum();
    let k = (from + DIRECT) as f64;
    let em = k.powf(1.0 - s) / (s - 1.0) + 0.5 * k.powf(-s) + s * k.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * k.powf(-s - 3.0) / 720.0;
    direct + em
}
