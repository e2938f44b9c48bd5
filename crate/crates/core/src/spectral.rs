//! Perron–Frobenius eigenvalues of substitution matrices, substitution
//! entropy and the J-cost ordering of substitution systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const POWER_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionMatrix {
    pub name: String,
    pub rows: Vec<Vec<u64>>,
}

impl SubstitutionMatrix {
    pub fn new(name: &str, rows: Vec<Vec<u64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain(format!("substitution matrix {name:?} is not square")));
        }
        Ok(Self { name: name.to_string(), rows })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Some power up to `n²` is strictly positive.
    pub fn is_primitive(&self) -> bool {
        let n = self.size();
        let pattern: Vec<Vec<bool>> = self.rows.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
        let mut power = pattern.clone();
        for _ in 0..n * n {
            if power.iter().all(|r| r.iter().all(|&b| b)) {
                return true;
            }
            power = (0..n)
                .map(|i| (0..n).map(|j| (0..n).any(|k| power[i][k] && pattern[k][j])).collect())
                .collect();
        }
        false
    }
}

/// Dominant eigenvalue by power iteration from the all-ones vector.
pub fn perron_frobenius(m: &SubstitutionMatrix) -> Result<f64> {
    if !m.is_primitive() {
        return Err(Error::Domain(format!("substitution matrix {:?} is not primitive", m.name)));
    }
    let n = m.size();
    let mut v = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..MAX_ITERATIONS {
        let w: Vec<f64> = m
            .rows
            .iter()
            .map(|r| r.iter().zip(&v).map(|(&a, x)| a as f64 * x).sum())
            .collect();
        let norm = w.iter().cloned().fold(0.0, f64::max);
        let next = norm / v.iter().cloned().fold(0.0, f64::max);
        v = w.iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= POWER_TOL * next {
            return Ok(next);
        }
        lambda = next;
    }
    log::warn!("power iteration for {:?} stopped at the iteration cap", m.name);
    Ok(lambda)
}

/// Larger root of the characteristic polynomial of a 2×2 matrix.
pub fn closed_form_2x2(m: &SubstitutionMatrix) -> Option<f64> {
    let [[a, b], [c, d]] = match m.rows.as_slice() {
        [r0, r1] => [[r0[0], r0[1]], [r1[0], r1[1]]].map(|r| r.map(|x| x as f64)),
        _ => return None,
    };
    let tr = a + d;
    let det = a * d - b * c;
    Some((tr + (tr * tr - 4.0 * det).sqrt()) / 2.0)
}

pub fn substitution_entropy(lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda < 1.0 {
        return Err(Error::Domain(format!("entropy needs lambda >= 1, got {lambda}")));
    }
    Ok(lambda.ln())
}

/// `cosh(ln λ) − 1`.
pub fn j_cost(lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!("J-cost needs lambda > 0, got {lambda}")));
    }
    Ok(0.5 * (lambda + 1.0 / lambda) - 1.0)
}

/// Real root of `x³ = x + 1`, by bisection on `[1, 2]`.
pub fn plastic_constant() -> f64 {
    let f = |x: f64| x * x * x - x - 1.0;
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    Matrix(SubstitutionMatrix),
    Lambda(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyRow {
    pub name: String,
    pub lambda: f64,
    pub entropy: f64,
    pub j_cost: f64,
}

/// Rows sorted ascending by λ; ties keep input order.
pub fn coherence_hierarchy(systems: &[(String, SystemSpec)]) -> Result<Vec<HierarchyRow>> {
    let mut rows = systems
        .iter()
        .map(|(name, spec)| {
            let lambda = match spec {
                SystemSpec::Matrix(m) => perron_frobenius(m)?,
                SystemSpec::Lambda(l) => *l,
            };
            Ok(HierarchyRow {
                name: name.clone(),
                lambda,
                entropy: substitution_entropy(lambda)?,
                j_cost: j_cost(lambda)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(rows)
}

pub fn builtin_systems() -> Vec<(String, SystemSpec)> {
    let golden = || vec![vec![1, 1], vec![1, 0]];
    let m = |name: &str, rows| SystemSpec::Matrix(SubstitutionMatrix::new(name, rows).expect("square"));
    vec![
        ("Fibonacci".to_string(), m("Fibonacci", golden())),
        ("Penrose".to_string(), m("Penrose", golden())),
        ("Icosahedral".to_string(), SystemSpec::Lambda((1.0 + 5f64.sqrt()) / 2.0)),
        ("Ammann-Beenker".to_string(), m("Ammann-Beenker", vec![vec![2, 1], vec![1, 0]])),
    ]
}

/// Fixed-width text table.
pub fn format_hierarchy(rows: &[HierarchyRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(6);
    let mut out = format!("{:<width$}  {:>14}  {:>14}  {:>14}\n", "system", "lambda_pf", "entropy", "j_cost");
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>14.10}  {:>14.10}  {:>14.10}\n",
            r.name, r.lambda, r.entropy, r.j_cost
        ));
    }
    out
}
