use serde::Serialize;

use crate::series::CoefficientSequence;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RmRow {
    pub n: usize,
    pub a_squared: f64,
    pub term: f64,
    pub partial: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RmTable {
    pub value: f64,
    pub rows: Vec<RmRow>,
}

/// `Σ_{n=1}^N a_n^2 ln^2(n+1)` with the running partial sums.
pub fn rademacher_menchov(coeffs: &CoefficientSequence) -> RmTable {
    let mut partial = 0.0;
    let rows: Vec<RmRow> = coeffs
        .squares()
        .iter()
        .enumerate()
        .map(|(i, &a2)| {
            let n = i + 1;
            let log = ((n + 1) as f64).ln();
            let term = a2 * log * log;
            partial += term;
            RmRow {
                n,
                a_squared: a2,
                term,
                partial,
            }
        })
        .collect();
    RmTable {
        value: partial,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let two = CoefficientSequence::explicit(vec![0.5f64.sqrt(), 0.5]).unwrap();
        assert!((rademacher_menchov(&two).value - 0.5419637471622463).abs() < 1e-15);
        let one = CoefficientSequence::explicit(vec![1.0]).unwrap();
        let t = rademacher_menchov(&one);
        assert!((t.value - 0.4804530139182014).abs() < 1e-15);
        assert_eq!(t.rows.len(), 1);
    }
}
