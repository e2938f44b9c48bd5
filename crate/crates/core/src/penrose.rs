//! Penrose P2 (kite/dart) patches from Robinson-triangle substitution,
//! with decorations read from the frozen crossing table.
//!
//! Half-tiles are labelled triangles. At even levels they are kite halves
//! `K[apex, side, axis_end]` and dart halves `D[reflex, tip, side]`, paired
//! across the tile axis. At odd levels they are `T3[apex, b1, b2]` and
//! `G3[apex, x, y]`, paired across their base. One substitution step moves
//! between the two levels; the step back to even level rescales by φ.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use serde_json::json;

use crate::cyclotomic::ExactPoint;
use crate::error::{Error, Result};
use crate::tiling::{Model, Side, Tile, TileKind, Tiling, Vertex};

pub const FAMILIES: usize = 5;
pub const MAX_ROBINSON_STEPS: usize = 40;

const CROSSING_TABLE: &str = include_str!("../data/crossing_table_v1.txt");

/// Bar family of the edge direction `36°·j`: the `k` with
/// `36·j ≡ 72·k (mod 180)`.
pub fn class_of_edge(direction_index: usize) -> usize {
    (3 * direction_index) % 5
}

/// `ζ^j = sign · ε_family` with `ε_k = e^{2πik/5}`.
pub fn unit_step(direction_index: usize) -> (usize, i64) {
    let sign = if direction_index % 2 == 0 { 1 } else { -1 };
    (class_of_edge(direction_index), sign)
}

/// Unit vector ε_k.
pub fn epsilon(k: usize) -> [f64; 2] {
    let a = 2.0 * PI * k as f64 / 5.0;
    [a.cos(), a.sin()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfKind {
    K,
    D,
    T3,
    G3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub kind: HalfKind,
    pub pts: [ExactPoint; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrianglePatch {
    pub level: usize,
    pub triangles: Vec<Triangle>,
}

impl TrianglePatch {
    pub fn empty() -> Self {
        TrianglePatch { level: 0, triangles: Vec::new() }
    }

    /// Single kite half: the `T` seed.
    pub fn half_kite() -> Self {
        let phi = ExactPoint::PHI;
        TrianglePatch {
            level: 0,
            triangles: vec![Triangle {
                kind: HalfKind::K,
                pts: [ExactPoint::ZERO, phi.rotate(-1), phi],
            }],
        }
    }

    /// Single dart half: the `G` seed.
    pub fn half_dart() -> Self {
        TrianglePatch {
            level: 0,
            triangles: vec![Triangle {
                kind: HalfKind::D,
                pts: [ExactPoint::ONE, ExactPoint::ZERO, ExactPoint::PHI.rotate(-1)],
            }],
        }
    }

    pub fn kite() -> Self {
        let phi = ExactPoint::PHI;
        let mut p = Self::half_kite();
        p.triangles.push(Triangle {
            kind: HalfKind::K,
            pts: [ExactPoint::ZERO, phi.rotate(1), phi],
        });
        p
    }

    pub fn dart() -> Self {
        let mut p = Self::half_dart();
        p.triangles.push(Triangle {
            kind: HalfKind::D,
            pts: [ExactPoint::ONE, ExactPoint::ZERO, ExactPoint::PHI.rotate(1)],
        });
        p
    }

    /// `(T, G)` counts in the sense of the substitution matrix.
    pub fn counts(&self) -> (usize, usize) {
        let count = |k| self.triangles.iter().filter(|t| t.kind == k).count();
        if self.level % 2 == 0 {
            (count(HalfKind::K), count(HalfKind::D))
        } else {
            (count(HalfKind::G3), count(HalfKind::T3))
        }
    }
}

fn step_to_rhomb(tris: &[Triangle]) -> Vec<Triangle> {
    let mut out = Vec::with_capacity(tris.len() * 2);
    for t in tris {
        match t.kind {
            HalfKind::K => {
                let [a, b, c] = t.pts;
                let p = a + (c - a).div_phi();
                out.push(Triangle { kind: HalfKind::T3, pts: [b, c, p] });
                out.push(Triangle { kind: HalfKind::G3, pts: [p, b, a] });
            }
            HalfKind::D => {
                let [r, tip, s] = t.pts;
                out.push(Triangle { kind: HalfKind::G3, pts: [r, tip, s] });
            }
            _ => unreachable!("even level holds only kite and dart halves"),
        }
    }
    out
}

fn step_to_p2(tris: &[Triangle]) -> Vec<Triangle> {
    let mut out = Vec::with_capacity(tris.len() * 2);
    let grow = |pts: [ExactPoint; 3]| pts.map(ExactPoint::mul_phi);
    for t in tris {
        match t.kind {
            HalfKind::G3 => {
                let [q, x, y] = t.pts;
                let e = x + (y - x).div_phi();
                out.push(Triangle { kind: HalfKind::K, pts: grow([x, e, q]) });
                out.push(Triangle { kind: HalfKind::D, pts: grow([e, y, q]) });
            }
            HalfKind::T3 => {
                out.push(Triangle { kind: HalfKind::K, pts: grow(t.pts) });
            }
            _ => unreachable!("odd level holds only T3 and G3 halves"),
        }
    }
    out
}

/// Applies `steps` Robinson half-deflations. Triangle size is preserved
/// (the patch grows by φ every two steps).
pub fn robinson_substitute(patch: &TrianglePatch, steps: usize) -> Result<TrianglePatch> {
    if steps > MAX_ROBINSON_STEPS {
        return Err(Error::TooLarge {
            requested: steps as u128,
            limit: MAX_ROBINSON_STEPS as u128,
        });
    }
    let mut level = patch.level;
    let mut tris = patch.triangles.clone();
    for _ in 0..steps {
        tris = if level % 2 == 0 { step_to_rhomb(&tris) } else { step_to_p2(&tris) };
        level += 1;
    }
    Ok(TrianglePatch { level, triangles: tris })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingEntry {
    pub kind: TileKind,
    pub slot: usize,
    pub family_offset: usize,
    pub sign: i64,
}

fn parse_crossing_table(text: &str) -> Result<Vec<CrossingEntry>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::Domain(format!("crossing table line {}: {line:?}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad());
        }
        let kind = match fields[0] {
            "kite" => TileKind::Kite,
            "dart" => TileKind::Dart,
            _ => return Err(bad()),
        };
        let slot: usize = fields[1].parse().map_err(|_| bad())?;
        let family_offset: usize = fields[2].parse().map_err(|_| bad())?;
        let sign: i64 = fields[3].parse().map_err(|_| bad())?;
        if slot > 3 || family_offset > 4 || sign.abs() != 1 {
            return Err(bad());
        }
        out.push(CrossingEntry { kind, slot, family_offset, sign });
    }
    Ok(out)
}

/// The frozen side-decoration table for tiles at orientation 0.
pub fn canonical_crossing_table() -> Vec<CrossingEntry> {
    parse_crossing_table(CROSSING_TABLE).expect("bundled crossing table parses")
}

/// Side values of a tile of `kind` at orientation `o`, per side slot.
pub fn tile_decorations(table: &[CrossingEntry], kind: TileKind, orientation: usize) -> [Vec<(usize, i64)>; 4] {
    let mut out: [Vec<(usize, i64)>; 4] = Default::default();
    let flip = if orientation % 2 == 0 { 1 } else { -1 };
    for e in table.iter().filter(|e| e.kind == kind) {
        let family = (e.family_offset + 3 * orientation) % 5;
        let slot = &mut out[e.slot];
        match slot.iter_mut().find(|(k, _)| *k == family) {
            Some((_, v)) => *v += e.sign * flip,
            None => slot.push((family, e.sign * flip)),
        }
    }
    for slot in &mut out {
        slot.retain(|&(_, v)| v != 0);
        slot.sort_unstable();
    }
    out
}

/// Decoration value of `tile` on the directed side `from -> to`.
pub fn tile_side_crossing(tiling: &Tiling, tile: usize, from: usize, to: usize, family: usize) -> Result<i64> {
    let t = tiling
        .tiles
        .get(tile)
        .ok_or_else(|| Error::Domain(format!("no tile {tile}")))?;
    for side in &t.sides {
        if side.from == from && side.to == to {
            return Ok(side.value(family));
        }
        if side.from == to && side.to == from {
            return Ok(-side.value(family));
        }
    }
    Err(Error::Domain(format!("side {from} -> {to} is not on tile {tile}")))
}

/// Result of merging triangle pairs into darts and kites.
#[derive(Debug, Clone)]
pub struct P2Assembly {
    pub tiling: Tiling,
    /// Unpaired halves dropped at the patch boundary.
    pub dropped: Vec<Triangle>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Merges mirror-paired halves into kites and darts (counter-clockwise
/// from apex or tip) and decorates them from the crossing table.
pub fn assemble_p2(patch: &TrianglePatch) -> Result<P2Assembly> {
    if patch.level % 2 != 0 {
        return Err(Error::Domain(
            "assembly needs a kite/dart level patch (even number of half-steps)".into(),
        ));
    }
    // key: (kind, apex/reflex, axis end/tip) -> halves in input order
    let mut groups: BTreeMap<(u8, ExactPoint, ExactPoint), Vec<usize>> = BTreeMap::new();
    let mut first_seen: Vec<(u8, ExactPoint, ExactPoint)> = Vec::new();
    for (i, t) in patch.triangles.iter().enumerate() {
        let key = match t.kind {
            HalfKind::K => (0, t.pts[0], t.pts[2]),
            HalfKind::D => (1, t.pts[1], t.pts[0]),
            _ => unreachable!(),
        };
        let entry = groups.entry(key).or_default();
        if entry.is_empty() {
            first_seen.push(key);
        }
        entry.push(i);
    }

    let table = canonical_crossing_table();
    let mut dropped = Vec::new();
    let mut raw_tiles: Vec<(TileKind, [ExactPoint; 4], usize)> = Vec::new();
    for key in first_seen {
        let members = &groups[&key];
        if members.len() != 2 {
            if members.len() > 2 {
                return Err(Error::MalformedTiling(format!(
                    "{} halves share one axis",
                    members.len()
                )));
            }
            dropped.extend(members.iter().map(|&i| patch.triangles[i]));
            continue;
        }
        let (h0, h1) = (&patch.triangles[members[0]], &patch.triangles[members[1]]);
        let (kind, start, end, s0, s1) = match h0.kind {
            HalfKind::K => (TileKind::Kite, h0.pts[0], h0.pts[2], h0.pts[1], h1.pts[1]),
            _ => (TileKind::Dart, h0.pts[1], h0.pts[0], h0.pts[2], h1.pts[2]),
        };
        let axis = if kind == TileKind::Kite { (end - start).div_phi() } else { end - start };
        let orientation = axis
            .unit_direction()
            .ok_or_else(|| Error::MalformedTiling(format!("axis {axis} is not a unit direction")))?;
        let (fs, fe, f0) = (start.to_f64(), end.to_f64(), s0.to_f64());
        let (right, left) = if cross(fs, fe, f0) < 0.0 { (s0, s1) } else { (s1, s0) };
        raw_tiles.push((kind, [start, right, end, left], orientation));
    }

    let mut points: Vec<ExactPoint> = raw_tiles.iter().flat_map(|t| t.1).collect();
    points.sort_unstable();
    points.dedup();
    let index: HashMap<ExactPoint, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let vertices = points
        .iter()
        .map(|p| Vertex { pos: p.to_f64().to_vec(), tuple: None })
        .collect();
    let tiles = raw_tiles
        .iter()
        .map(|&(kind, corners, orientation)| {
            let ids: Vec<usize> = corners.iter().map(|p| index[p]).collect();
            let deco = tile_decorations(&table, kind, orientation);
            let sides = (0..4)
                .map(|s| Side {
                    from: ids[s],
                    to: ids[(s + 1) % 4],
                    values: deco[s].clone(),
                })
                .collect();
            Tile { kind, vertices: ids, sides, orientation: Some(orientation as u8) }
        })
        .collect();

    let basis = (0..FAMILIES).map(|k| epsilon(k).to_vec()).collect();
    let mut metadata = BTreeMap::new();
    metadata.insert("level".to_string(), json!(patch.level));
    metadata.insert("dropped_halves".to_string(), json!(dropped.len()));
    metadata.insert("crossing_table".to_string(), json!("v1"));
    let tiling = Tiling::assemble(Model::P2, FAMILIES, 2, vertices, tiles, &[], basis, metadata)?;
    Ok(P2Assembly { tiling, dropped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    Kite,
    Dart,
}

/// P2 patch after `deflations` full deflations (two Robinson steps each).
pub fn p2_patch(seed: Seed, deflations: usize) -> Result<Tiling> {
    let start = match seed {
        Seed::Kite => TrianglePatch::kite(),
        Seed::Dart => TrianglePatch::dart(),
    };
    let steps = deflations
        .checked_mul(2)
        .ok_or(Error::TooLarge { requested: u128::MAX, limit: MAX_ROBINSON_STEPS as u128 })?;
    let patch = robinson_substitute(&start, steps)?;
    let mut a = assemble_p2(&patch)?;
    a.tiling.metadata.insert("deflations".into(), json!(deflations));
    a.tiling.metadata.insert(
        "seed".into(),
        json!(match seed {
            Seed::Kite => "kite",
            Seed::Dart => "dart",
        }),
    );
    Ok(a.tiling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::{face_sum, DirectedEdgeCochain};

    fn mat_counts(mut t: usize, mut g: usize, n: usize) -> (usize, usize) {
        for _ in 0..n {
            (t, g) = (t + g, t);
        }
        (t, g)
    }

    #[test]
    fn class_of_edge_matches_congruence() {
        for j in 0..10 {
            let brute: Vec<usize> = (0..5).filter(|&k| (36 * j) % 180 == (72 * k) % 180).collect();
            assert_eq!(brute, vec![class_of_edge(j)]);
        }
        assert_eq!(class_of_edge(0), 0);
        assert_eq!(class_of_edge(2), 1);
        assert_eq!(class_of_edge(7), 1);
    }

    #[test]
    fn unit_step_decomposes_zeta_powers() {
        for j in 0..10 {
            let (k, s) = unit_step(j);
            let z = ExactPoint::zeta_pow(j as i64).to_f64();
            let e = epsilon(k);
            assert!((z[0] - s as f64 * e[0]).abs() < 1e-12 && (z[1] - s as f64 * e[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_follow_substitution_matrix() {
        let seed = TrianglePatch::half_kite();
        assert_eq!(robinson_substitute(&seed, 0).unwrap(), seed);
        for (n, want) in [(1, (1, 1)), (2, (2, 1)), (3, (3, 2)), (10, (89, 55))] {
            assert_eq!(robinson_substitute(&seed, n).unwrap().counts(), want);
        }
        for n in 0..14 {
            let p = robinson_substitute(&TrianglePatch::half_dart(), n).unwrap();
            assert_eq!(p.counts(), mat_counts(0, 1, n));
        }
        assert!(robinson_substitute(&seed, MAX_ROBINSON_STEPS + 1).is_err());
    }

    #[test]
    fn seed_assemblies() {
        let dart = assemble_p2(&TrianglePatch::dart()).unwrap();
        assert_eq!(dart.tiling.tiles.len(), 1);
        assert_eq!(dart.tiling.vertices.len(), 4);
        assert_eq!(dart.tiling.edges.len(), 4);
        assert!(dart.tiling.edges.iter().all(|e| e.boundary));
        assert!(dart.dropped.is_empty());

        let empty = assemble_p2(&TrianglePatch::empty()).unwrap();
        assert!(empty.tiling.tiles.is_empty() && empty.tiling.vertices.is_empty());

        let half = assemble_p2(&TrianglePatch::half_kite()).unwrap();
        assert!(half.tiling.tiles.is_empty());
        assert_eq!(half.dropped.len(), 1);
    }

    #[test]
    fn appendix_kite_pattern_in_family_zero() {
        let table = canonical_crossing_table();
        let kite = tile_decorations(&table, TileKind::Kite, 0);
        let fam0: Vec<i64> = kite
            .iter()
            .map(|s| s.iter().find(|e| e.0 == 0).map_or(0, |e| e.1))
            .collect();
        assert_eq!(fam0, vec![1, 0, 0, -1]);
        let dart = tile_decorations(&table, TileKind::Dart, 0);
        assert_eq!(dart[0].iter().find(|e| e.0 == 0), Some(&(0, 1)));
    }

    #[test]
    fn table_matches_edge_geometry() {
        // every decorated side equals the sum of its unit steps
        let t = p2_patch(Seed::Kite, 3).unwrap();
        for tile in &t.tiles {
            for side in &tile.sides {
                let mut sum = [0.0; 2];
                for &(k, v) in &side.values {
                    let e = epsilon(k);
                    sum[0] += v as f64 * e[0];
                    sum[1] += v as f64 * e[1];
                }
                let (a, b) = (&t.vertices[side.from].pos, &t.vertices[side.to].pos);
                assert!((b[0] - a[0] - sum[0]).abs() < 1e-9);
                assert!((b[1] - a[1] - sum[1]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn single_family_per_side_model_is_infeasible() {
        // Direction classes of the four sides of a kite and a dart at
        // orientation 0; all four are distinct, so each family meets the
        // boundary once and no choice of ±1 makes every family sum vanish.
        for kind in [TileKind::Kite, TileKind::Dart] {
            let t = p2_patch(if kind == TileKind::Kite { Seed::Kite } else { Seed::Dart }, 0).unwrap();
            let tile = &t.tiles[0];
            let classes: Vec<usize> = tile
                .sides
                .iter()
                .map(|s| {
                    let (a, b) = (&t.vertices[s.from].pos, &t.vertices[s.to].pos);
                    let ang = (b[1] - a[1]).atan2(b[0] - a[0]).to_degrees();
                    let j = ((ang / 36.0).round() as i64).rem_euclid(10) as usize;
                    class_of_edge(j)
                })
                .collect();
            let solutions = (0..16u32)
                .filter(|mask| {
                    (0..5).all(|k| {
                        let sum: i64 = (0..4)
                            .filter(|&s| classes[s] == k)
                            .map(|s| if mask >> s & 1 == 1 { 1 } else { -1 })
                            .sum();
                        sum == 0
                    })
                })
                .count();
            assert_eq!(solutions, 0, "{kind:?} classes {classes:?}");
        }
    }

    fn gluing_and_sums_hold(t: &Tiling, deco: &dyn Fn(TileKind, usize) -> [Vec<(usize, i64)>; 4]) -> bool {
        for tile in &t.tiles {
            let d = deco(tile.kind, tile.orientation.unwrap() as usize);
            for k in 0..5 {
                let s: i64 = d.iter().map(|side| side.iter().filter(|e| e.0 == k).map(|e| e.1).sum::<i64>()).sum();
                if s != 0 {
                    return false;
                }
            }
        }
        for e in t.edges.iter().filter(|e| e.tiles.len() == 2) {
            let vals: Vec<[i64; 5]> = e
                .tiles
                .iter()
                .map(|&(ti, slot)| {
                    let tile = &t.tiles[ti];
                    let d = deco(tile.kind, tile.orientation.unwrap() as usize);
                    let sign = if tile.sides[slot].from < tile.sides[slot].to { 1 } else { -1 };
                    let mut out = [0; 5];
                    for &(k, v) in &d[slot] {
                        out[k] += sign * v;
                    }
                    out
                })
                .collect();
            if vals[0] != vals[1] {
                return false;
            }
        }
        true
    }

    #[test]
    fn crossing_table_is_unique_completion_up_to_sign() {
        let table = canonical_crossing_table();
        let t = p2_patch(Seed::Kite, 4).unwrap();
        let n = table.len();
        let mut solutions = Vec::new();
        for mask in 0u32..(1 << n) {
            let signed: Vec<CrossingEntry> = table
                .iter()
                .enumerate()
                .map(|(i, e)| CrossingEntry { sign: if mask >> i & 1 == 1 { -1 } else { 1 }, ..*e })
                .collect();
            if gluing_and_sums_hold(&t, &|kind, o| tile_decorations(&signed, kind, o)) {
                solutions.push(signed.iter().map(|e| e.sign).collect::<Vec<_>>());
            }
        }
        let frozen: Vec<i64> = table.iter().map(|e| e.sign).collect();
        let negated: Vec<i64> = frozen.iter().map(|s| -s).collect();
        solutions.sort();
        let mut want = vec![frozen, negated];
        want.sort();
        assert_eq!(solutions, want);
    }

    #[test]
    fn frozen_table_passes_tile_sums_and_gluing() {
        let table = canonical_crossing_table();
        let t = p2_patch(Seed::Kite, 4).unwrap();
        assert!(gluing_and_sums_hold(&t, &|kind, o| tile_decorations(&table, kind, o)));
        let g = t.graph().unwrap();
        for k in 0..5 {
            for (ti, tile) in t.tiles.iter().enumerate() {
                let mut c = DirectedEdgeCochain::zero(&g);
                for (slot, side) in tile.sides.iter().enumerate() {
                    let id = t.edge_id(side.from, side.to).unwrap();
                    c.set_canonical(id, t.side_value_canonical(ti, slot, k));
                }
                assert_eq!(face_sum(&g, &c, &tile.vertices).unwrap(), 0);
            }
        }
    }

    #[test]
    fn side_crossing_lookup() {
        let t = p2_patch(Seed::Dart, 0).unwrap();
        let tile = &t.tiles[0];
        let (a, b) = (tile.vertices[0], tile.vertices[1]);
        assert_eq!(tile_side_crossing(&t, 0, a, b, 0).unwrap(), 1);
        assert_eq!(tile_side_crossing(&t, 0, b, a, 0).unwrap(), -1);
        assert_eq!(tile_side_crossing(&t, 0, a, b, 2).unwrap(), 0);
        assert!(tile_side_crossing(&t, 0, a, tile.vertices[2], 0).is_err());
    }

    #[test]
    fn deep_patch_is_edge_to_edge() {
        let t = p2_patch(Seed::Kite, 5).unwrap();
        assert!(t.edges.iter().all(|e| e.tiles.len() <= 2));
        // no vertex in the relative interior of any edge
        for e in &t.edges {
            let (a, b) = (&t.vertices[e.u].pos, &t.vertices[e.v].pos);
            let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            for (i, w) in t.vertices.iter().enumerate() {
                if i == e.u || i == e.v {
                    continue;
                }
                let p = &w.pos;
                let s = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2;
                if s <= 1e-9 || s >= 1.0 - 1e-9 {
                    continue;
                }
                let cr = cross([a[0], a[1]], [b[0], b[1]], [p[0], p[1]]).abs();
                assert!(cr > 1e-6, "vertex {i} lies on edge ({}, {})", e.u, e.v);
            }
        }
    }
}
