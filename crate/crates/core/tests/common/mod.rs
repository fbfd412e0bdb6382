#![allow(dead_code)]

use noisecorr::{PartitionLayout, ProbVector};
use proptest::prelude::*;

/// Strictly positive weights normalised onto the simplex.
pub fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

pub fn prob_vector(k: usize) -> impl Strategy<Value = ProbVector> {
    simplex(1 << k).prop_map(move |v| ProbVector::new(PartitionLayout::singletons(k), v).unwrap())
}

/// Per-qubit `(p_x, p_y, p_z)` with total below `max_total`.
pub fn triples(n: usize, max_total: f64) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), n).prop_map(move |v| {
        v.into_iter()
            .map(|(e, a, b, c)| {
                let s = a + b + c + 1e-9;
                let e = e * max_total;
                (e * a / s, e * b / s, e * c / s)
            })
            .collect()
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
