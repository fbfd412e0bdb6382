//! Divergences, information measures, correlation matrices and fidelities of
//! error-pattern distributions.
//!
//! KL, entropy and mutual information are in nats unless a base is given;
//! JSD defaults to base 2 so it lies in `[0, 1]`. `0 ln 0 = 0` throughout.

use serde::{Deserialize, Serialize};

use crate::dist::{EigenvalueVector, ProbVector};
use crate::error::{Error, Result};
use crate::layout::{gather_bits, PartitionLayout};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    Natural,
    #[default]
    Two,
}

impl LogBase {
    fn scale(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
        }
    }
}

fn same_shape(p: &ProbVector, q: &ProbVector) -> Result<()> {
    if p.layout() != q.layout() {
        return Err(Error::Shape("distributions have different layouts".into()));
    }
    Ok(())
}

fn check_lengths(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!("lengths {} and {}", p.len(), q.len())));
    }
    if p.is_empty() {
        return Err(Error::Empty("distribution"));
    }
    Ok(())
}

/// `D(p‖q) = Σ p ln(p/q)` in nats.
pub fn kl(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    same_shape(p, q)?;
    kl_values(p.values(), q.values())
}

pub fn kl_values(p: &[f64], q: &[f64]) -> Result<f64> {
    check_lengths(p, q)?;
    let mut d = 0.0;
    for (j, (&a, &b)) in p.iter().zip(q).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::Support { index: j });
            }
            d += a * (a / b).ln();
        }
    }
    Ok(d.max(0.0))
}

/// Jensen–Shannon distance (square root of the JS divergence).
pub fn jsd(p: &ProbVector, q: &ProbVector, base: LogBase) -> Result<f64> {
    same_shape(p, q)?;
    jsd_values(p.values(), q.values(), base)
}

pub fn jsd_values(p: &[f64], q: &[f64], base: LogBase) -> Result<f64> {
    check_lengths(p, q)?;
    // per entry: ½[a ln(a/m) + b ln(b/m)] = (s/4)·g(t), no first-order cancellation
    let div: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let s = a.max(0.0) + b.max(0.0);
            if s > 0.0 {
                0.25 * s * js_kernel((a - b) / s)
            } else {
                0.0
            }
        })
        .sum();
    Ok((div / base.scale()).max(0.0).sqrt())
}

/// `g(t) = (1+t)ln(1+t) + (1−t)ln(1−t)` on `[−1, 1]`, accurate near 0.
pub(crate) fn js_kernel(t: f64) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    if t.abs() < 1e-2 {
        // Σ t^{2k} / (k(2k−1))
        let t2 = t * t;
        t2 * (1.0 + t2 * (1.0 / 6.0 + t2 * (1.0 / 15.0 + t2 * (1.0 / 28.0 + t2 / 45.0))))
    } else {
        let f = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
        f(1.0 + t) + f(1.0 - t)
    }
}

/// `H = (½ Σ (√p − √q)²)^{1/2}`, equal to `(1 − Σ √(p q))^{1/2}` for
/// normalised inputs.
pub fn hellinger(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    same_shape(p, q)?;
    hellinger_values(p.values(), q.values())
}

pub fn hellinger_values(p: &[f64], q: &[f64]) -> Result<f64> {
    check_lengths(p, q)?;
    let ss: f64 = p.iter().zip(q).map(|(a, b)| (a.max(0.0).sqrt() - b.max(0.0).sqrt()).powi(2)).sum();
    Ok((0.5 * ss).sqrt())
}

/// Total variation distance `½ Σ |p − q|`.
pub fn tvd(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    same_shape(p, q)?;
    tvd_values(p.values(), q.values())
}

pub fn tvd_values(p: &[f64], q: &[f64]) -> Result<f64> {
    check_lengths(p, q)?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Joint table of `p` over the listed groups of sets; entry index is the
/// mixed-radix number with group 0 least significant.
fn group_table(p: &ProbVector, groups: &[&[usize]]) -> Result<(Vec<usize>, Vec<f64>)> {
    let k = p.k();
    let mut seen = vec![false; k];
    for g in groups {
        if g.is_empty() {
            return Err(Error::Empty("variable group"));
        }
        for &i in *g {
            if i >= k {
                return Err(Error::SetIndex { index: i, len: k });
            }
            if seen[i] {
                return Err(Error::Overlap(format!("set {i} appears in more than one group")));
            }
            seen[i] = true;
        }
    }
    let union: Vec<usize> = (0..k).filter(|&i| seen[i]).collect();
    let marg = p.marginalize(&union)?;
    // positions of each group's sets inside the marginal
    let local: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| g.iter().map(|i| union.binary_search(i).expect("in union")).collect())
        .collect();
    let dims: Vec<usize> = groups.iter().map(|g| 1usize << g.len()).collect();
    let total: usize = dims.iter().product();
    let mut table = vec![0.0; total];
    for (idx, &v) in marg.values().iter().enumerate() {
        let mut cell = 0;
        let mut stride = 1;
        for (pos, d) in local.iter().zip(&dims) {
            cell += gather_bits(idx, pos) * stride;
            stride *= d;
        }
        table[cell] += v;
    }
    Ok((dims, table))
}

fn entropy_of(values: &[f64]) -> f64 {
    -values.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}

/// Shannon entropy (nats) of the marginal on `group`.
pub fn entropy(p: &ProbVector, group: &[usize]) -> Result<f64> {
    let (_, t) = group_table(p, &[group])?;
    Ok(entropy_of(&t))
}

/// `I(A; B)` in nats, each group treated as one variable.
pub fn mutual_information(p: &ProbVector, a: &[usize], b: &[usize]) -> Result<f64> {
    let (dims, t) = group_table(p, &[a, b])?;
    let (da, db) = (dims[0], dims[1]);
    let mut pa = vec![0.0; da];
    let mut pb = vec![0.0; db];
    for j in 0..db {
        for i in 0..da {
            pa[i] += t[i + da * j];
            pb[j] += t[i + da * j];
        }
    }
    let mut mi = 0.0;
    for j in 0..db {
        for i in 0..da {
            let v = t[i + da * j];
            if v > 0.0 {
                mi += v * (v / (pa[i] * pb[j])).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// `I(A; B | C)` in nats.
pub fn conditional_mutual_information(p: &ProbVector, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    let (dims, t) = group_table(p, &[a, b, c])?;
    let (da, db, dc) = (dims[0], dims[1], dims[2]);
    let at = |i: usize, j: usize, l: usize| t[i + da * (j + db * l)];
    let mut pc = vec![0.0; dc];
    let mut pac = vec![0.0; da * dc];
    let mut pbc = vec![0.0; db * dc];
    for l in 0..dc {
        for j in 0..db {
            for i in 0..da {
                let v = at(i, j, l);
                pc[l] += v;
                pac[i + da * l] += v;
                pbc[j + db * l] += v;
            }
        }
    }
    let mut cmi = 0.0;
    for l in 0..dc {
        for j in 0..db {
            for i in 0..da {
                let v = at(i, j, l);
                if v > 0.0 {
                    cmi += v * (pc[l] * v / (pac[i + da * l] * pbc[j + db * l])).ln();
                }
            }
        }
    }
    Ok(cmi.max(0.0))
}

/// Covariance of the `k` error indicators.
pub fn covariance_matrix(p: &ProbVector) -> Vec<Vec<f64>> {
    let k = p.k();
    let mut mean = vec![0.0; k];
    let mut second = vec![vec![0.0; k]; k];
    for (idx, &v) in p.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let on: Vec<usize> = (0..k).filter(|i| (idx >> i) & 1 == 1).collect();
        for &i in &on {
            mean[i] += v;
            for &j in &on {
                second[i][j] += v;
            }
        }
    }
    (0..k)
        .map(|i| (0..k).map(|j| second[i][j] - mean[i] * mean[j]).collect())
        .collect()
}

/// Pearson correlation matrix of the error indicators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub layout: PartitionLayout,
    pub matrix: Vec<Vec<f64>>,
    /// Sets whose indicator never (or always) fires; their off-diagonal
    /// entries are reported as 0.
    pub zero_variance: Vec<bool>,
}

/// Variance below which an indicator counts as constant.
const VARIANCE_FLOOR: f64 = 1e-15;

pub fn correlation_matrix(p: &ProbVector) -> CorrelationMatrix {
    let cov = covariance_matrix(p);
    let k = cov.len();
    let zero_variance: Vec<bool> = (0..k).map(|i| cov[i][i] <= VARIANCE_FLOOR).collect();
    let matrix = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        1.0
                    } else if zero_variance[i] || zero_variance[j] {
                        0.0
                    } else {
                        (cov[i][j] / (cov[i][i] * cov[j][j]).sqrt()).clamp(-1.0, 1.0)
                    }
                })
                .collect()
        })
        .collect();
    CorrelationMatrix { layout: p.layout().clone(), matrix, zero_variance }
}

/// Label of a set for tables: its qubits joined by `-`.
pub fn set_label(set: &[usize]) -> String {
    set.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

impl CorrelationMatrix {
    pub fn k(&self) -> usize {
        self.matrix.len()
    }

    /// Square CSV with set labels as header row and first column.
    pub fn to_csv(&self) -> String {
        matrix_csv(&self.layout, &self.matrix)
    }

    /// `(row, col, value)` triplets for Hinton-style plots.
    pub fn hinton_triplets(&self) -> Vec<(usize, usize, f64)> {
        triplets(&self.matrix)
    }
}

pub fn matrix_csv(layout: &PartitionLayout, matrix: &[Vec<f64>]) -> String {
    let labels: Vec<String> = layout.sets().iter().map(|s| set_label(s)).collect();
    let mut out = format!("set,{}\n", labels.join(","));
    for (label, row) in labels.iter().zip(matrix) {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&format!("{label},{}\n", cells.join(",")));
    }
    out
}

pub fn triplets(matrix: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    matrix
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    /// Average gate fidelity.
    pub f: f64,
    /// `1 − F`.
    pub r: f64,
    /// Multiplicity-weighted mean non-identity eigenvalue.
    pub lambda_bar: f64,
    pub n_qubits: usize,
}

/// Average gate fidelity of the channel restricted to `subset` (set indices).
pub fn fidelity_from_eigs(lambda: &EigenvalueVector, subset: &[usize]) -> Result<Fidelity> {
    let sub = lambda.marginalize(subset)?;
    let weights: Vec<f64> = sub.layout().sets().iter().map(|s| ((1u64 << (2 * s.len())) - 1) as f64).collect();
    let n_qubits: usize = sub.layout().sets().iter().map(Vec::len).sum();
    let mut num = 0.0;
    let mut den = 0.0;
    for (b, &l) in sub.values().iter().enumerate().skip(1) {
        let w: f64 = weights.iter().enumerate().filter(|(i, _)| (b >> i) & 1 == 1).map(|(_, w)| w).product();
        num += w * l;
        den += w;
    }
    let lambda_bar = num / den;
    let d = (1u64 << n_qubits) as f64;
    let f = ((d - 1.0) * lambda_bar + 1.0) / d;
    Ok(Fidelity { f, r: 1.0 - f, lambda_bar, n_qubits })
}
