//! Canonical projection tilings Z^N -> R^d: window acceptance, patch
//! generation, lattice-coordinate cochains and the conservation report.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cochain::{face_sum, DirectedEdgeCochain, Graph};
use crate::error::{Error, Result};
use crate::tiling::{EdgeSpec, Model, Side, Tile, TileKind, Tiling, Vertex};

pub const BOUNDARY_TOL: f64 = 1e-9;
pub const ORTHO_TOL: f64 = 1e-12;
pub const INJECTIVITY_BOUND: i64 = 12;
pub const INDEPENDENCE_BOUND: i64 = 5;
pub const MAX_RANK: usize = 12;

const BUILTINS: [&str; 4] = ["fibonacci", "penrose5", "ammann_beenker", "icosahedral"];

#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: DVector<f64>,
    pub lower: f64,
    pub upper: f64,
}

/// Shifted zonotope `π⊥([0,1]^N) − centroid + offset` as a list of slabs.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub halfspaces: Vec<HalfSpace>,
    pub vertices: Vec<DVector<f64>>,
    pub offset: DVector<f64>,
}

impl Window {
    /// Signed distance to the nearest facet plane (positive inside).
    pub fn min_slack(&self, y: &DVector<f64>) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| {
                let s = h.normal.dot(y);
                (s - h.lower).min(h.upper - s)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CptScheme {
    pub name: String,
    pub n: usize,
    pub d: usize,
    /// d×N; column k is e_k*.
    pub physical: DMatrix<f64>,
    /// (N−d)×N with orthonormal rows spanning the orthogonal complement.
    pub internal: DMatrix<f64>,
    pub window: Window,
}

/// User-supplied scheme: rows of the physical projection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub name: String,
    pub physical: Vec<Vec<f64>>,
    #[serde(default)]
    pub internal_offset: Option<Vec<f64>>,
}

fn phi() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

pub fn builtin_names() -> &'static [&'static str] {
    &BUILTINS
}

pub fn builtin_scheme(name: &str) -> Result<CptScheme> {
    let physical = match name {
        "fibonacci" => DMatrix::from_row_slice(1, 2, &[1.0, 1.0 / phi()]),
        "penrose5" => DMatrix::from_fn(2, 5, |r, k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            0.4 * if r == 0 { a.cos() } else { a.sin() }
        }),
        "ammann_beenker" => DMatrix::from_fn(2, 4, |r, k| {
            let a = std::f64::consts::PI * k as f64 / 4.0;
            if r == 0 {
                a.cos()
            } else {
                a.sin()
            }
        }),
        "icosahedral" => {
            let p = phi();
            let cols = [
                [1.0, p, 0.0],
                [-1.0, p, 0.0],
                [0.0, 1.0, p],
                [0.0, -1.0, p],
                [p, 0.0, 1.0],
                [-p, 0.0, 1.0],
            ];
            let norm = (1.0 + p * p).sqrt();
            DMatrix::from_fn(3, 6, |r, k| cols[k][r] / norm)
        }
        other => {
            return Err(Error::InvalidScheme(format!(
                "unknown scheme {other:?}; expected one of {}",
                BUILTINS.join(", ")
            )))
        }
    };
    CptScheme::new(name, physical, None)
}

fn default_offset(m: usize) -> DVector<f64> {
    DVector::from_fn(m, |i, _| 1e-3 * ((i as f64 + 1.0) * 2f64.sqrt() + 3f64.sqrt()).fract())
}

fn orthonormal_complement(physical: &DMatrix<f64>) -> Result<(DMatrix<f64>, usize)> {
    let (d, n) = physical.shape();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let push = |v: DVector<f64>, basis: &mut Vec<DVector<f64>>| -> bool {
        let mut w = v;
        for b in basis.iter() {
            let c = b.dot(&w);
            w -= b * c;
        }
        let norm = w.norm();
        if norm > 1e-8 {
            basis.push(w / norm);
            true
        } else {
            false
        }
    };
    for r in 0..d {
        if !push(physical.row(r).transpose(), &mut basis) {
            return Err(Error::InvalidScheme("physical rows are linearly dependent".into()));
        }
    }
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        push(DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 }), &mut basis);
    }
    let m = n - d;
    Ok((DMatrix::from_fn(m, n, |r, c| basis[d + r][c]), m))
}

// Normal to the span of `m - 1` vectors in R^m (generalised cross product).
fn facet_normal(vectors: &[DVector<f64>], m: usize) -> DVector<f64> {
    if m == 1 {
        return DVector::from_element(1, 1.0);
    }
    let a = DMatrix::from_fn(m - 1, m, |r, c| vectors[r][c]);
    DVector::from_fn(m, |i, _| {
        let minor = a.clone().remove_column(i);
        let det = minor.determinant();
        if i % 2 == 0 {
            det
        } else {
            -det
        }
    })
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn build_window(internal: &DMatrix<f64>, offset: DVector<f64>) -> Window {
    let (m, n) = internal.shape();
    let gens: Vec<DVector<f64>> = (0..n).map(|k| internal.column(k).into_owned()).collect();
    let centroid: DVector<f64> = gens.iter().fold(DVector::zeros(m), |a, g| a + g) * 0.5;
    let shift = &offset - &centroid;

    let mut normals: Vec<DVector<f64>> = Vec::new();
    for subset in subsets(n, m - 1) {
        let vs: Vec<DVector<f64>> = subset.iter().map(|&i| gens[i].clone()).collect();
        let mut u = facet_normal(&vs, m);
        let norm = u.norm();
        if norm < 1e-9 {
            continue;
        }
        u /= norm;
        if let Some(first) = u.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                u = -u;
            }
        }
        if !normals.iter().any(|w| (w - &u).norm() < 1e-9) {
            normals.push(u);
        }
    }
    let halfspaces: Vec<HalfSpace> = normals
        .into_iter()
        .map(|u| {
            let (mut hi, mut lo) = (0.0, 0.0);
            for g in &gens {
                let s = u.dot(g);
                if s > 0.0 {
                    hi += s;
                } else {
                    lo += s;
                }
            }
            let t = u.dot(&shift);
            HalfSpace { normal: u, lower: lo + t, upper: hi + t }
        })
        .collect();

    let mut vertices = Vec::new();
    if n <= MAX_RANK {
        for mask in 0u32..(1u32 << n) {
            let mut y = shift.clone();
            for (k, g) in gens.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    y += g;
                }
            }
            let tight = halfspaces
                .iter()
                .filter(|h| {
                    let s = h.normal.dot(&y);
                    (s - h.lower).abs() < BOUNDARY_TOL || (h.upper - s).abs() < BOUNDARY_TOL
                })
                .count();
            if tight >= m && !vertices.iter().any(|v: &DVector<f64>| (v - &y).norm() < 1e-9) {
                vertices.push(y);
            }
        }
    }
    Window { halfspaces, vertices, offset }
}

impl CptScheme {
    pub fn new(name: &str, physical: DMatrix<f64>, internal_offset: Option<DVector<f64>>) -> Result<Self> {
        let (d, n) = physical.shape();
        if d == 0 || d >= n {
            return Err(Error::InvalidScheme(format!("need 1 <= d < N, got d={d}, N={n}")));
        }
        if n > MAX_RANK {
            return Err(Error::InvalidScheme(format!("rank {n} exceeds {MAX_RANK}")));
        }
        if physical.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidScheme("non-finite basis entry".into()));
        }
        let (internal, m) = orthonormal_complement(&physical)?;
        let offset = internal_offset.unwrap_or_else(|| default_offset(m));
        if offset.len() != m {
            return Err(Error::InvalidScheme(format!("internal offset must have {m} entries")));
        }
        let scheme = CptScheme {
            name: name.to_string(),
            n,
            d,
            physical,
            window: build_window(&internal, offset),
            internal,
        };
        scheme.check_bases()?;
        Ok(scheme)
    }

    pub fn from_config(config: &SchemeConfig) -> Result<Self> {
        let d = config.physical.len();
        let n = config.physical.first().map_or(0, Vec::len);
        if d == 0 || config.physical.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidScheme("physical rows must be non-empty and equal length".into()));
        }
        let physical = DMatrix::from_fn(d, n, |r, c| config.physical[r][c]);
        let offset = config.internal_offset.as_ref().map(|o| DVector::from_column_slice(o));
        CptScheme::new(&config.name, physical, offset)
    }

    fn check_bases(&self) -> Result<()> {
        let cross = &self.physical * self.internal.transpose();
        if cross.iter().any(|x| x.abs() > ORTHO_TOL) {
            return Err(Error::InvalidScheme("physical and internal bases are not orthogonal".into()));
        }
        let stacked = DMatrix::from_fn(self.n, self.n, |r, c| {
            if r < self.d {
                self.physical[(r, c)]
            } else {
                self.internal[(r - self.d, c)]
            }
        });
        if stacked.determinant().abs() < ORTHO_TOL {
            return Err(Error::InvalidScheme("bases are not jointly full rank".into()));
        }
        Ok(())
    }

    /// e_k* as a vector.
    pub fn star(&self, k: usize) -> DVector<f64> {
        self.physical.column(k).into_owned()
    }

    pub fn project(&self, x: &[i64]) -> Vec<f64> {
        let v = DVector::from_iterator(self.n, x.iter().map(|&c| c as f64));
        (&self.physical * v).iter().copied().collect()
    }

    pub fn project_internal(&self, x: &[i64]) -> DVector<f64> {
        let v = DVector::from_iterator(self.n, x.iter().map(|&c| c as f64));
        &self.internal * v
    }

    /// Smallest nonzero integer vector (entries in `[-bound, bound]`) found
    /// in `ker π`, if any.
    pub fn kernel_vector(&self, bound: i64) -> Option<Vec<i64>> {
        (1..=bound).find_map(|b| integer_relation(&self.physical, b))
    }

    /// Injectivity proxy with the default search box.
    pub fn injectivity_proxy(&self) -> Option<Vec<i64>> {
        self.kernel_vector(INJECTIVITY_BOUND)
    }
}

/// Searches `[-bound, bound]^N` for a nonzero integer `c` with
/// `|A c| < 1e-9`, enumerating `N - d` free coordinates and solving for the rest.
pub fn integer_relation(a: &DMatrix<f64>, bound: i64) -> Option<Vec<i64>> {
    let (d, n) = a.shape();
    let pivot = subsets(n, d)
        .into_iter()
        .map(|cols| {
            let sub = DMatrix::from_fn(d, d, |r, c| a[(r, cols[c])]);
            (sub.determinant().abs(), cols)
        })
        .max_by(|x, y| x.0.partial_cmp(&y.0).unwrap())?;
    if pivot.0 < 1e-12 {
        // rank deficient: some column combination is exactly dependent
        let mut c = vec![0; n];
        c[0] = 1;
        return (a.column(0).norm() < BOUNDARY_TOL).then_some(c);
    }
    let dep = pivot.1;
    let free: Vec<usize> = (0..n).filter(|i| !dep.contains(i)).collect();
    let lu = DMatrix::from_fn(d, d, |r, c| a[(r, dep[c])]).lu();
    let mut counter = vec![-bound; free.len()];
    loop {
        if counter.iter().any(|&c| c != 0) {
            let rhs = DVector::from_fn(d, |r, _| {
                -free.iter().zip(&counter).map(|(&f, &c)| a[(r, f)] * c as f64).sum::<f64>()
            });
            if let Some(sol) = lu.solve(&rhs) {
                let rounded: Vec<i64> = sol.iter().map(|x| x.round() as i64).collect();
                if rounded.iter().all(|x| x.abs() <= bound) {
                    let mut c = vec![0i64; n];
                    for (&f, &v) in free.iter().zip(&counter) {
                        c[f] = v;
                    }
                    for (&i, &v) in dep.iter().zip(&rounded) {
                        c[i] = v;
                    }
                    let cv = DVector::from_iterator(n, c.iter().map(|&x| x as f64));
                    if (a * cv).norm() < BOUNDARY_TOL {
                        return Some(c);
                    }
                }
            }
        }
        let mut i = 0;
        loop {
            if i == counter.len() {
                return None;
            }
            counter[i] += 1;
            if counter[i] <= bound {
                break;
            }
            counter[i] = -bound;
            i += 1;
        }
    }
}

/// Window membership; points within 1e-9 of the window boundary abort.
pub fn accept(scheme: &CptScheme, x: &[i64]) -> Result<bool> {
    let y = scheme.project_internal(x);
    let slack = scheme.window.min_slack(&y);
    if slack > BOUNDARY_TOL {
        Ok(true)
    } else if slack < -BOUNDARY_TOL {
        Ok(false)
    } else {
        Err(Error::NonGenericWindow { point: x.to_vec() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CptEdge {
    pub u: usize,
    pub v: usize,
    /// `x(v) = x(u) + e_class`.
    pub class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CptFace {
    /// Corners `x, x+e_j, x+e_j+e_k, x+e_k`.
    pub corners: [usize; 4],
    pub classes: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct CptPatch {
    pub scheme: String,
    pub n: usize,
    pub d: usize,
    pub radius: f64,
    pub points: Vec<Vec<i64>>,
    pub positions: Vec<Vec<f64>>,
    pub edges: Vec<CptEdge>,
    pub faces: Vec<CptFace>,
    pub basis: Vec<Vec<f64>>,
    /// Rows of the internal projection.
    pub internal: Vec<Vec<f64>>,
    index: HashMap<Vec<i64>, usize>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn generate_cpt(scheme: &CptScheme, radius: f64) -> Result<CptPatch> {
    generate_cpt_capped(scheme, radius, None)
}

/// Breadth-first search over ±e_k steps from the origin, restricted to
/// accepted points within `radius + d·max|e_k*|`, then clipped to `radius`.
pub fn generate_cpt_capped(scheme: &CptScheme, radius: f64, max_cells: Option<u128>) -> Result<CptPatch> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::Domain(format!("invalid radius {radius}")));
    }
    let n = scheme.n;
    let max_star = (0..n).map(|k| scheme.star(k).norm()).fold(0.0, f64::max);
    let reach = radius + scheme.d as f64 * max_star;
    log::debug!("{}: search reach {reach:.3}", scheme.name);
    let origin = vec![0i64; n];
    if !accept(scheme, &origin)? {
        return Err(Error::InvalidScheme("origin is outside the window; adjust the internal offset".into()));
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::from([origin.clone()]);
    let mut accepted = vec![origin.clone()];
    let mut queue = VecDeque::from([origin]);
    while let Some(x) = queue.pop_front() {
        for k in 0..n {
            for step in [1, -1] {
                let mut y = x.clone();
                y[k] += step;
                if !seen.insert(y.clone()) {
                    continue;
                }
                if norm(&scheme.project(&y)) > reach || !accept(scheme, &y)? {
                    continue;
                }
                accepted.push(y.clone());
                if let Some(limit) = max_cells {
                    if accepted.len() as u128 > limit {
                        return Err(Error::TooLarge { requested: accepted.len() as u128, limit });
                    }
                }
                queue.push_back(y);
            }
        }
    }
    let mut points: Vec<Vec<i64>> = accepted
        .into_iter()
        .filter(|x| norm(&scheme.project(x)) <= radius)
        .collect();
    points.sort_unstable();
    let index: HashMap<Vec<i64>, usize> = points.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
    let positions: Vec<Vec<f64>> = points.iter().map(|x| scheme.project(x)).collect();

    let shifted = |x: &[i64], k: usize, s: i64| {
        let mut y = x.to_vec();
        y[k] += s;
        y
    };
    let mut edges = Vec::new();
    for (u, x) in points.iter().enumerate() {
        for k in 0..n {
            if let Some(&v) = index.get(&shifted(x, k, 1)) {
                edges.push(CptEdge { u, v, class: k });
            }
        }
    }
    let mut faces = Vec::new();
    if scheme.d >= 2 {
        for (a, x) in points.iter().enumerate() {
            for j in 0..n {
                let xj = shifted(x, j, 1);
                let Some(&b) = index.get(&xj) else { continue };
                for k in (j + 1)..n {
                    let (Some(&c), Some(&e)) = (index.get(&shifted(&xj, k, 1)), index.get(&shifted(x, k, 1))) else {
                        continue;
                    };
                    faces.push(CptFace { corners: [a, b, c, e], classes: (j, k) });
                }
            }
        }
    }
    let basis = (0..n).map(|k| scheme.star(k).iter().copied().collect()).collect();
    let internal = scheme.internal.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(CptPatch {
        scheme: scheme.name.clone(),
        n,
        d: scheme.d,
        radius,
        points,
        positions,
        edges,
        faces,
        basis,
        internal,
        index,
    })
}

impl CptPatch {
    pub fn vertex_of(&self, x: &[i64]) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn graph(&self) -> Result<Graph> {
        Graph::new(self.points.len(), self.edges.iter().map(|e| (e.u, e.v)))
    }

    /// Vertex nearest the physical origin.
    pub fn root(&self) -> Option<usize> {
        (0..self.points.len()).min_by(|&a, &b| {
            norm(&self.positions[a])
                .partial_cmp(&norm(&self.positions[b]))
                .unwrap()
                .then(self.points[a].cmp(&self.points[b]))
        })
    }

    /// Tiling view. 2-faces become tiles only for planar patches.
    pub fn to_tiling(&self) -> Result<Tiling> {
        let vertices = self
            .points
            .iter()
            .zip(&self.positions)
            .map(|(x, p)| Vertex { pos: p.clone(), tuple: Some(x.clone()) })
            .collect();
        let mut tiles = Vec::new();
        if self.d == 2 {
            for f in &self.faces {
                let ids = f.corners.to_vec();
                let sides = (0..4)
                    .map(|s| {
                        let (a, b) = (ids[s], ids[(s + 1) % 4]);
                        let values = (0..self.n)
                            .filter(|&k| self.points[a][k] != self.points[b][k])
                            .map(|k| (k, self.points[b][k] - self.points[a][k]))
                            .collect();
                        Side { from: a, to: b, values }
                    })
                    .collect();
                let (j, k) = f.classes;
                let (pj, pk) = (&self.basis[j], &self.basis[k]);
                let ccw = pj[0] * pk[1] - pj[1] * pk[0] > 0.0;
                let mut tile = Tile { kind: TileKind::Rhomb, vertices: ids, sides, orientation: None };
                if !ccw {
                    reverse_tile(&mut tile);
                }
                tiles.push(tile);
            }
        }
        let extra: Vec<EdgeSpec> = self
            .edges
            .iter()
            .map(|e| EdgeSpec { u: e.u, v: e.v, class: e.class, boundary: None })
            .collect();
        let mut metadata = std::collections::BTreeMap::new();
        metadata.insert("scheme".to_string(), json!(self.scheme));
        metadata.insert("radius".to_string(), json!(self.radius));
        metadata.insert("faces".to_string(), json!(self.faces.len()));
        metadata.insert("internal".to_string(), json!(self.internal));
        Tiling::assemble(Model::Cpt, self.n, self.d, vertices, tiles, &extra, self.basis.clone(), metadata)
    }
}

fn reverse_tile(tile: &mut Tile) {
    tile.vertices.reverse();
    let m = tile.vertices.len();
    tile.sides = (0..m)
        .map(|s| {
            let (a, b) = (tile.vertices[s], tile.vertices[(s + 1) % m]);
            let orig = tile
                .sides
                .iter()
                .find(|side| side.from == b && side.to == a)
                .expect("reversed side");
            Side { from: a, to: b, values: orig.values.iter().map(|&(k, v)| (k, -v)).collect() }
        })
        .collect();
}

/// `Δ_k(u→v) = x_k(v) − x_k(u)` on the patch graph.
pub fn lattice_cochain(patch: &CptPatch, graph: &Graph, k: usize) -> Result<DirectedEdgeCochain> {
    if k >= patch.n {
        return Err(Error::Domain(format!("family {k} out of range 0..{}", patch.n)));
    }
    Ok(DirectedEdgeCochain::from_fn(graph, |u, v| patch.points[v][k] - patch.points[u][k]))
}

/// `max_v |pos(v) − Σ_k x_k(v) e_k*|`.
pub fn reconstruction_check_cpt(patch: &CptPatch) -> f64 {
    patch
        .points
        .iter()
        .zip(&patch.positions)
        .map(|(x, p)| {
            let mut err2 = 0.0;
            for i in 0..patch.d {
                let predicted: f64 = x.iter().zip(&patch.basis).map(|(&c, e)| c as f64 * e[i]).sum();
                err2 += (p[i] - predicted).powi(2);
            }
            err2.sqrt()
        })
        .fold(0.0, f64::max)
}

impl CptPatch {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.points.len()];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj
    }

    fn max_step(&self) -> f64 {
        self.basis.iter().map(|e| norm(e)).fold(0.0, f64::max)
    }

    // Vertices whose `hops`-neighbourhood lies inside the clipped patch.
    fn is_interior(&self, u: usize, hops: usize) -> bool {
        norm(&self.positions[u]) + hops as f64 * self.max_step() <= self.radius
    }
}

/// Lattice offsets `x(w) − x(u)` of every vertex within `hops` edges of `u`.
fn neighbourhood_key(patch: &CptPatch, adj: &[Vec<usize>], u: usize, hops: usize) -> Vec<Vec<i64>> {
    let mut seen = HashSet::from([u]);
    let mut frontier = vec![u];
    for _ in 0..hops {
        let mut next = Vec::new();
        for &w in &frontier {
            for &x in &adj[w] {
                if seen.insert(x) {
                    next.push(x);
                }
            }
        }
        frontier = next;
    }
    let base = &patch.points[u];
    let mut key: Vec<Vec<i64>> = seen
        .into_iter()
        .map(|w| patch.points[w].iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    key.sort_unstable();
    key
}

#[derive(Debug, Clone, PartialEq)]
pub enum EquivarianceOutcome {
    Pass { radius: usize, classes: usize },
    Fail { max_radius: usize, ambiguous_steps: Vec<Vec<i64>> },
}

impl EquivarianceOutcome {
    pub fn radius(&self) -> Option<usize> {
        match self {
            EquivarianceOutcome::Pass { radius, .. } => Some(*radius),
            EquivarianceOutcome::Fail { .. } => None,
        }
    }
}

/// Smallest `R` in `1..=max_radius` such that the `R`-hop configuration
/// around the tail of each interior directed edge, together with the
/// edge's physical displacement, determines its lattice step.
pub fn pattern_equivariance_radius(patch: &CptPatch, max_radius: usize) -> EquivarianceOutcome {
    let adj = patch.adjacency();
    let mut last_ambiguous = Vec::new();
    for r in 1..=max_radius {
        let mut keys: HashMap<usize, Vec<Vec<i64>>> = HashMap::new();
        let mut classes: HashMap<(Vec<Vec<i64>>, Vec<i64>), Vec<i64>> = HashMap::new();
        let mut ambiguous = None;
        'edges: for e in &patch.edges {
            for (u, v) in [(e.u, e.v), (e.v, e.u)] {
                if !patch.is_interior(u, r) {
                    continue;
                }
                let step: Vec<i64> = (0..patch.n).map(|k| patch.points[v][k] - patch.points[u][k]).collect();
                let displacement = quantise(patch.positions[v].iter().zip(&patch.positions[u]).map(|(a, b)| a - b));
                let config = keys.entry(u).or_insert_with(|| neighbourhood_key(patch, &adj, u, r)).clone();
                match classes.get(&(config.clone(), displacement.clone())) {
                    Some(existing) if *existing != step => {
                        ambiguous = Some(vec![existing.clone(), step]);
                        break 'edges;
                    }
                    Some(_) => {}
                    None => {
                        classes.insert((config, displacement), step);
                    }
                }
            }
        }
        match ambiguous {
            None => return EquivarianceOutcome::Pass { radius: r, classes: classes.len() },
            Some(a) => last_ambiguous = a,
        }
    }
    EquivarianceOutcome::Fail { max_radius, ambiguous_steps: last_ambiguous }
}

const QUANTUM: f64 = 1e6;

fn quantise(v: impl Iterator<Item = f64>) -> Vec<i64> {
    v.map(|x| (x * QUANTUM).round() as i64).collect()
}

/// Distinct translation classes of `hops`-patches around the interior
/// vertices selected by `region`.
pub fn patch_class_count(patch: &CptPatch, hops: usize, region: impl Fn(&[f64]) -> bool) -> usize {
    let adj = patch.adjacency();
    let classes: HashSet<Vec<Vec<i64>>> = (0..patch.points.len())
        .filter(|&u| patch.is_interior(u, hops + 1) && region(&patch.positions[u]))
        .map(|u| neighbourhood_key(patch, &adj, u, hops))
        .collect();
    classes.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CfStatus {
    Pass,
    Fail,
    ProxyPass,
}

impl fmt::Display for CfStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CfStatus::Pass => "pass",
            CfStatus::Fail => "fail",
            CfStatus::ProxyPass => "proxy-pass",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfResult {
    pub condition: String,
    pub status: CfStatus,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub scheme: String,
    pub n: usize,
    pub d: usize,
    pub conditions: Vec<CfResult>,
    /// N when every condition passes, otherwise 0.
    pub rank: usize,
    pub recognition_gap_rank: usize,
}

impl ConservationReport {
    pub fn condition(&self, name: &str) -> Option<&CfResult> {
        self.conditions.iter().find(|c| c.condition == name)
    }

    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.status != CfStatus::Fail)
    }
}

pub const CF2_MAX_RADIUS: usize = 2;

pub fn conservation_report(scheme: &CptScheme, patch: &CptPatch) -> Result<ConservationReport> {
    let n = scheme.n;
    let graph = patch.graph()?;
    let mut conditions = Vec::with_capacity(5);

    // CF1
    let mut bad_faces = 0usize;
    for k in 0..n {
        let cochain = lattice_cochain(patch, &graph, k)?;
        for f in &patch.faces {
            if face_sum(&graph, &cochain, &f.corners)? != 0 {
                bad_faces += 1;
            }
        }
    }
    conditions.push(CfResult {
        condition: "CF1".into(),
        status: if bad_faces == 0 { CfStatus::Pass } else { CfStatus::Fail },
        evidence: format!(
            "{} of {} face sums nonzero over {n} cochains",
            bad_faces,
            patch.faces.len() * n
        ),
    });

    // CF2
    let pe = pattern_equivariance_radius(patch, CF2_MAX_RADIUS);
    conditions.push(CfResult {
        condition: "CF2".into(),
        status: if pe.radius().is_some() { CfStatus::Pass } else { CfStatus::Fail },
        evidence: match &pe {
            EquivarianceOutcome::Pass { radius, classes } => {
                format!("lattice steps determined at radius {radius} ({classes} edge classes)")
            }
            EquivarianceOutcome::Fail { max_radius, ambiguous_steps } => {
                format!("ambiguous steps {ambiguous_steps:?} up to radius {max_radius}")
            }
        },
    });

    // CF3
    let root = patch.root();
    let radii = [patch.radius / 4.0, patch.radius / 2.0, patch.radius];
    let mut growth = Vec::with_capacity(n);
    let mut monotone = root.is_some();
    if let Some(r0) = root {
        for k in 0..n {
            let maxes: Vec<i64> = radii
                .iter()
                .map(|&rho| {
                    patch
                        .points
                        .iter()
                        .zip(&patch.positions)
                        .filter(|(_, p)| norm(p) <= rho)
                        .map(|(x, _)| (x[k] - patch.points[r0][k]).abs())
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            monotone &= maxes.windows(2).all(|w| w[0] < w[1]);
            growth.push(maxes);
        }
    }
    conditions.push(CfResult {
        condition: "CF3".into(),
        status: if monotone { CfStatus::Pass } else { CfStatus::Fail },
        evidence: format!("max |h_k| at radii {radii:?}: {growth:?}"),
    });

    // CF4
    let relation = scheme.kernel_vector(INDEPENDENCE_BOUND);
    conditions.push(CfResult {
        condition: "CF4".into(),
        status: if relation.is_none() { CfStatus::ProxyPass } else { CfStatus::Fail },
        evidence: match &relation {
            None => format!("finite proxy: no integer relation with |c_k| <= {INDEPENDENCE_BOUND} among e_k*"),
            Some(c) => format!("integer relation {c:?} has sum c_k e_k* = 0, so sum c_k h_k is bounded"),
        },
    });

    // CF5
    conditions.push(CfResult {
        condition: "CF5".into(),
        status: CfStatus::ProxyPass,
        evidence: format!("rank {n} from the cohomology of the hull: external result, not recomputed"),
    });

    let all = conditions.iter().all(|c| c.status != CfStatus::Fail);
    Ok(ConservationReport {
        scheme: scheme.name.clone(),
        n,
        d: scheme.d,
        conditions,
        rank: if all { n } else { 0 },
        recognition_gap_rank: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_dimensions() {
        let dims: Vec<(usize, usize)> = BUILTINS
            .iter()
            .map(|n| {
                let s = builtin_scheme(n).unwrap();
                (s.n, s.d)
            })
            .collect();
        assert_eq!(dims, vec![(2, 1), (5, 2), (4, 2), (6, 3)]);
        assert!(matches!(builtin_scheme("hexagonal"), Err(Error::InvalidScheme(_))));
    }

    #[test]
    fn penrose_frame_identity() {
        let s = builtin_scheme("penrose5").unwrap();
        let mut m = DMatrix::<f64>::zeros(2, 2);
        for k in 0..5 {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            let nk = DVector::from_vec(vec![a.cos(), a.sin()]);
            m += &nk * nk.transpose();
            assert!((s.star(k) - nk * 0.4).norm() < 1e-15);
        }
        assert!((m - DMatrix::identity(2, 2) * 2.5).abs().max() < 1e-12);
    }

    #[test]
    fn window_contains_origin_and_rejects_far_points() {
        for name in BUILTINS {
            let s = builtin_scheme(name).unwrap();
            assert!(accept(&s, &vec![0; s.n]).unwrap());
            let mut far = vec![0; s.n];
            far[0] = 40;
            assert!(!accept(&s, &far).unwrap());
            assert!(s.window.vertices.len() >= 2);
        }
    }

    #[test]
    fn boundary_hit_aborts() {
        let mut s = builtin_scheme("fibonacci").unwrap();
        let h = &mut s.window.halfspaces[0];
        let y = s.internal[(0, 0)] * 3.0 + s.internal[(0, 1)] * -2.0;
        h.upper = h.normal[0] * y;
        assert_eq!(accept(&s, &[3, -2]), Err(Error::NonGenericWindow { point: vec![3, -2] }));
    }

    #[test]
    fn kernel_search() {
        let fib = builtin_scheme("fibonacci").unwrap();
        assert_eq!(fib.injectivity_proxy(), None);
        let ab = builtin_scheme("ammann_beenker").unwrap();
        assert_eq!(ab.injectivity_proxy(), None);
        let pen = builtin_scheme("penrose5").unwrap();
        let c = pen.kernel_vector(INDEPENDENCE_BOUND).unwrap();
        assert!(c.iter().all(|&x| x == c[0]) && c[0] != 0);
        let rational = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let r = integer_relation(&rational, 3).unwrap();
        assert_eq!(r[0] + 2 * r[1], 0);
    }

    #[test]
    fn fibonacci_chain_gaps() {
        let s = builtin_scheme("fibonacci").unwrap();
        let p = generate_cpt(&s, 50.0).unwrap();
        assert!(p.faces.is_empty());
        let mut order: Vec<usize> = (0..p.points.len()).collect();
        order.sort_by(|&a, &b| p.positions[a][0].partial_cmp(&p.positions[b][0]).unwrap());
        let gaps: Vec<f64> = order.windows(2).map(|w| p.positions[w[1]][0] - p.positions[w[0]][0]).collect();
        let mut distinct: Vec<f64> = Vec::new();
        for g in &gaps {
            if !distinct.iter().any(|d| (d - g).abs() < 1e-9) {
                distinct.push(*g);
            }
        }
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(distinct.len(), 2);
        assert!((distinct[1] / distinct[0] - phi()).abs() < 1e-6);
        assert_eq!(p.edges.len(), p.points.len() - 1);
    }

    #[test]
    fn edges_are_unit_steps_and_faces_telescope() {
        for (name, r) in [("penrose5", 6.0), ("ammann_beenker", 6.0), ("icosahedral", 3.0)] {
            let s = builtin_scheme(name).unwrap();
            let p = generate_cpt(&s, r).unwrap();
            assert!(!p.faces.is_empty(), "{name}");
            for e in &p.edges {
                let diff: Vec<i64> = (0..p.n).map(|k| p.points[e.v][k] - p.points[e.u][k]).collect();
                assert_eq!(diff.iter().map(|x| x.abs()).sum::<i64>(), 1);
                assert_eq!(diff[e.class], 1);
            }
            for f in &p.faces {
                for k in 0..p.n {
                    let c = f.corners.map(|i| p.points[i][k]);
                    assert_eq!(c[0] - c[1] + c[2] - c[3], 0);
                }
            }
            assert!(reconstruction_check_cpt(&p) <= 1e-12);
        }
    }

    #[test]
    fn equivariance_radius_one() {
        for (name, r) in [("penrose5", 6.0), ("fibonacci", 30.0)] {
            let s = builtin_scheme(name).unwrap();
            let p = generate_cpt(&s, r).unwrap();
            assert_eq!(pattern_equivariance_radius(&p, 3).radius(), Some(1), "{name}");
        }
    }

    #[test]
    fn fibonacci_gap_word_is_sturmian() {
        let s = builtin_scheme("fibonacci").unwrap();
        let p = generate_cpt(&s, 80.0).unwrap();
        let mut order: Vec<usize> = (0..p.points.len()).collect();
        order.sort_by(|&a, &b| p.positions[a][0].partial_cmp(&p.positions[b][0]).unwrap());
        let word: Vec<usize> = order
            .windows(2)
            .map(|w| {
                let step: Vec<i64> = (0..2).map(|k| p.points[w[1]][k] - p.points[w[0]][k]).collect();
                step.iter().position(|&x| x != 0).unwrap()
            })
            .collect();
        let short = if s.star(0).norm() < s.star(1).norm() { 0 } else { 1 };
        assert!(word.contains(&0) && word.contains(&1));
        assert!(word.windows(2).all(|w| !(w[0] == short && w[1] == short)));
    }

    #[test]
    fn flc_proxy_half_discs() {
        let s = builtin_scheme("penrose5").unwrap();
        let p = generate_cpt(&s, 15.0).unwrap();
        let left = patch_class_count(&p, 2, |x| x[0] < -0.5);
        let right = patch_class_count(&p, 2, |x| x[0] > 0.5);
        assert!(left > 0 && left < p.points.len() / 2);
        assert_eq!(left, right);
    }

    #[test]
    fn conservation_reports() {
        for (name, r, rank) in [("fibonacci", 50.0, 2), ("ammann_beenker", 10.0, 4)] {
            let s = builtin_scheme(name).unwrap();
            let p = generate_cpt(&s, r).unwrap();
            let rep = conservation_report(&s, &p).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert_eq!((rep.rank, rep.recognition_gap_rank), (rank, rank));
            assert_eq!(rep.condition("CF4").unwrap().status, CfStatus::ProxyPass);
            assert_eq!(rep.condition("CF5").unwrap().status, CfStatus::ProxyPass);
        }
        // The five Penrose stars sum to zero, so the diagonal relation is found.
        let s = builtin_scheme("penrose5").unwrap();
        let p = generate_cpt(&s, 8.0).unwrap();
        let rep = conservation_report(&s, &p).unwrap();
        for cf in ["CF1", "CF2", "CF3"] {
            assert_eq!(rep.condition(cf).unwrap().status, CfStatus::Pass, "{cf}");
        }
        assert_eq!(rep.condition("CF4").unwrap().status, CfStatus::Fail);
        assert_eq!(rep.rank, 0);
        assert_eq!(rep.recognition_gap_rank, 5);
    }

    #[test]
    fn scheme_from_config() {
        let cfg: SchemeConfig = serde_json::from_value(json!({
            "name": "custom_fib",
            "physical": [[1.618033988749895, 1.0]]
        }))
        .unwrap();
        let s = CptScheme::from_config(&cfg).unwrap();
        assert_eq!((s.n, s.d), (2, 1));
        let bad: SchemeConfig = serde_json::from_value(json!({"name": "x", "physical": [[1.0, 0.0], [2.0, 0.0]]})).unwrap();
        assert!(CptScheme::from_config(&bad).is_err());
    }

    #[test]
    fn planar_patch_as_tiling() {
        let s = builtin_scheme("ammann_beenker").unwrap();
        let p = generate_cpt(&s, 5.0).unwrap();
        let t = p.to_tiling().unwrap();
        assert_eq!(t.vertices.len(), p.points.len());
        assert_eq!(t.edges.len(), p.edges.len());
        assert!(t.edges.iter().all(|e| e.tiles.len() <= 2));
    }
}
