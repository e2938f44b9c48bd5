//! De Bruijn pentagrid duality: Penrose rhombus tilings whose vertices
//! carry integer 5-tuples of strip indices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::tiling::{Model, Side, Tile, TileKind, Tiling, Vertex};

pub const FAMILIES: usize = 5;
pub const SINGULAR_TOL: f64 = 1e-9;

pub fn normal(k: usize) -> [f64; 2] {
    let a = 2.0 * PI * k as f64 / 5.0;
    [a.cos(), a.sin()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct PentagridParams {
    pub offsets: [Rational64; 5],
    pub radius: f64,
}

impl PentagridParams {
    pub fn new(offsets: [Rational64; 5], radius: f64) -> Result<Self> {
        let p = PentagridParams { offsets, radius };
        p.check()?;
        Ok(p)
    }

    /// γ_k = 1/5 for every family.
    pub fn regular(radius: f64) -> Self {
        PentagridParams {
            offsets: [Rational64::new(1, 5); 5],
            radius,
        }
    }

    /// Parses either one rational (used for all five offsets) or five
    /// comma-separated rationals, e.g. `1/5` or `0.1,0.3,1/5,1/5,1/5`.
    pub fn parse_offsets(text: &str) -> Result<[Rational64; 5]> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let values = parts.iter().map(|p| parse_rational(p)).collect::<Result<Vec<_>>>()?;
        match values.len() {
            1 => Ok([values[0]; 5]),
            5 => Ok([values[0], values[1], values[2], values[3], values[4]]),
            n => Err(Error::Domain(format!("expected 1 or 5 offsets, got {n}"))),
        }
    }

    fn check(&self) -> Result<()> {
        let sum: Rational64 = self.offsets.iter().copied().fold(Rational64::zero(), |a, b| a + b);
        if !sum.is_integer() {
            return Err(Error::Domain(format!("offset sum {sum} is not an integer")));
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Err(Error::Domain(format!("invalid radius {}", self.radius)));
        }
        Ok(())
    }

    fn gamma(&self) -> [f64; 5] {
        self.offsets.map(|g| g.to_f64().unwrap_or(0.0))
    }

    /// Rough upper bound on the number of rhombi, for size caps.
    pub fn estimated_cells(&self) -> u128 {
        let r = self.radius + 1.0;
        let per_area: f64 = 5.0 / (2.0 * PI / 5.0).sin() + 5.0 / (4.0 * PI / 5.0).sin();
        (PI * r * r * per_area).ceil() as u128
    }
}

fn parse_rational(text: &str) -> Result<Rational64> {
    let bad = || Error::Domain(format!("cannot parse offset {text:?}"));
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(n, d));
    }
    if let Ok(n) = text.parse::<i64>() {
        return Ok(Rational64::from_integer(n));
    }
    // short decimals such as 0.25
    let (int, frac) = text.split_once('.').ok_or_else(bad)?;
    if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let neg = int.trim_start().starts_with('-');
    let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10i64.pow(frac.len() as u32);
    let f: i64 = frac.parse().map_err(|_| bad())?;
    let num = whole.abs() * den + f;
    Ok(Rational64::new(if neg { -num } else { num }, den))
}

fn strip_value(point: [f64; 2], k: usize, gamma: f64) -> f64 {
    let n = normal(k);
    point[0] * n[0] + point[1] * n[1] + gamma
}

/// `⌈point·n_k + γ_k⌉`; fails when the point is within 1e-9 of a line.
pub fn strip_index(point: [f64; 2], family: usize, params: &PentagridParams) -> Result<i64> {
    let x = strip_value(point, family, params.gamma()[family]);
    if (x - x.round()).abs() < SINGULAR_TOL {
        return Err(Error::OnGridLine { family });
    }
    Ok(x.ceil() as i64)
}

/// `(2/5) Σ m_k n_k`.
pub fn reconstruct_vertex(tuple: &[i64]) -> [f64; 2] {
    let mut p = [0.0; 2];
    for (k, &m) in tuple.iter().enumerate() {
        let n = normal(k);
        p[0] += 0.4 * m as f64 * n[0];
        p[1] += 0.4 * m as f64 * n[1];
    }
    p
}

pub fn generate_pentagrid(params: &PentagridParams) -> Result<Tiling> {
    generate_pentagrid_capped(params, None)
}

/// Generates the dual rhombus tiling of all grid intersections within the
/// radius. `max_cells` bounds the number of rhombi.
pub fn generate_pentagrid_capped(params: &PentagridParams, max_cells: Option<u128>) -> Result<Tiling> {
    params.check()?;
    if let Some(limit) = max_cells {
        let est = params.estimated_cells();
        if est > limit {
            return Err(Error::TooLarge { requested: est, limit });
        }
    }
    let gamma = params.gamma();
    let r = params.radius;
    let mut rhombi: Vec<(usize, usize, [[i64; 5]; 4])> = Vec::new();
    for j in 0..5 {
        for k in (j + 1)..5 {
            let (nj, nk) = (normal(j), normal(k));
            let det = nj[0] * nk[1] - nj[1] * nk[0];
            let a_range = ((-r + gamma[j]).ceil() as i64)..=((r + gamma[j]).floor() as i64);
            for a in a_range {
                let b_range = ((-r + gamma[k]).ceil() as i64)..=((r + gamma[k]).floor() as i64);
                for b in b_range {
                    let (cj, ck) = (a as f64 - gamma[j], b as f64 - gamma[k]);
                    let x = [(cj * nk[1] - ck * nj[1]) / det, (nj[0] * ck - nk[0] * cj) / det];
                    if x[0] * x[0] + x[1] * x[1] > r * r {
                        continue;
                    }
                    let mut m = [0i64; 5];
                    for i in 0..5 {
                        if i == j || i == k {
                            continue;
                        }
                        let s = strip_value(x, i, gamma[i]);
                        if (s - s.round()).abs() < SINGULAR_TOL {
                            return Err(Error::SingularPentagrid { families: [j, k, i], point: x });
                        }
                        m[i] = s.ceil() as i64;
                    }
                    let corner = |dj: i64, dk: i64| {
                        let mut t = m;
                        t[j] = a + dj;
                        t[k] = b + dk;
                        t
                    };
                    let corners = if det > 0.0 {
                        [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)]
                    } else {
                        [corner(0, 0), corner(0, 1), corner(1, 1), corner(1, 0)]
                    };
                    rhombi.push((j, k, corners));
                    if let Some(limit) = max_cells {
                        if rhombi.len() as u128 > limit {
                            return Err(Error::TooLarge { requested: rhombi.len() as u128, limit });
                        }
                    }
                }
            }
        }
    }
    build_tiling(params, rhombi)
}

fn build_tiling(params: &PentagridParams, rhombi: Vec<(usize, usize, [[i64; 5]; 4])>) -> Result<Tiling> {
    let mut raw: Vec<[i64; 5]> = rhombi.iter().flat_map(|r| r.2).collect();
    raw.sort_unstable();
    raw.dedup();
    let positions: Vec<[f64; 2]> = raw.iter().map(|t| reconstruct_vertex(t)).collect();
    let reference = (0..raw.len()).min_by(|&a, &b| {
        let na = positions[a][0].powi(2) + positions[a][1].powi(2);
        let nb = positions[b][0].powi(2) + positions[b][1].powi(2);
        if (na - nb).abs() > 1e-12 {
            na.partial_cmp(&nb).unwrap()
        } else {
            raw[a].cmp(&raw[b])
        }
    });
    let base = reference.map_or([0; 5], |i| raw[i]);
    let index: HashMap<[i64; 5], usize> = raw.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let vertices = raw
        .iter()
        .zip(&positions)
        .map(|(t, p)| Vertex {
            pos: p.to_vec(),
            tuple: Some((0..5).map(|k| t[k] - base[k]).collect()),
        })
        .collect();
    let tiles = rhombi
        .iter()
        .map(|&(j, k, corners)| {
            let ids: Vec<usize> = corners.iter().map(|c| index[c]).collect();
            let sides = (0..4)
                .map(|s| {
                    let (from, to) = (corners[s], corners[(s + 1) % 4]);
                    let values = (0..5)
                        .filter(|&f| to[f] != from[f])
                        .map(|f| (f, to[f] - from[f]))
                        .collect();
                    Side { from: ids[s], to: ids[(s + 1) % 4], values }
                })
                .collect();
            let kind = if matches!(k - j, 1 | 4) { TileKind::Thick } else { TileKind::Thin };
            Tile { kind, vertices: ids, sides, orientation: None }
        })
        .collect();
    let basis = (0..5).map(|k| normal(k).iter().map(|x| 0.4 * x).collect()).collect();
    let mut metadata = BTreeMap::new();
    metadata.insert(
        "offsets".to_string(),
        json!(params.offsets.iter().map(|g| g.to_string()).collect::<Vec<_>>()),
    );
    metadata.insert("radius".to_string(), json!(params.radius));
    metadata.insert("reference_vertex".to_string(), json!(reference));
    metadata.insert("reference_tuple".to_string(), json!(base));
    Tiling::assemble(Model::Pentagrid, FAMILIES, 2, vertices, tiles, &[], basis, metadata)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineReport {
    pub sums: BTreeSet<i64>,
    pub alternating_sums: BTreeSet<i64>,
}

/// Distinct values of `Σ h_k(v)` and `Σ (−1)^k h_k(v)` over the vertices.
pub fn affine_constraint_report(tiling: &Tiling) -> AffineReport {
    let mut sums = BTreeSet::new();
    let mut alternating_sums = BTreeSet::new();
    for v in &tiling.vertices {
        let Some(t) = &v.tuple else { continue };
        sums.insert(t.iter().sum());
        alternating_sums.insert(
            t.iter()
                .enumerate()
                .map(|(k, &h)| if k % 2 == 0 { h } else { -h })
                .sum(),
        );
    }
    log::info!(
        "affine constraint report: {} index sums, {} alternating sums",
        sums.len(),
        alternating_sums.len()
    );
    AffineReport { sums, alternating_sums }
}
