//! Height functions per family, the assembled tuple map Φ, and the
//! injectivity and reconstruction checks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cochain::{build_potential, ClosureWitness, Graph, Potential, PotentialMap};
use crate::error::{Error, Result};
use crate::tiling::Tiling;

/// Value substituted on an edge (canonical `u < v` orientation) before
/// integrating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeOverride {
    pub edge: (usize, usize),
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyWitness {
    pub family: usize,
    pub witness: ClosureWitness,
    pub overrides: Vec<EdgeOverride>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Height {
    Map(PotentialMap),
    Witness(FamilyWitness),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightAtlas {
    pub root: Option<usize>,
    pub maps: Vec<PotentialMap>,
    /// Φ(v), indexed by vertex id.
    pub tuples: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtlasOutcome {
    Atlas(HeightAtlas),
    Witnesses(Vec<FamilyWitness>),
}

fn resolve_root(tiling: &Tiling, root: Option<usize>) -> Result<Option<usize>> {
    match root {
        Some(r) if r >= tiling.vertices.len() => Err(Error::UnknownVertex(r)),
        Some(r) => Ok(Some(r)),
        None => Ok(tiling.reference_vertex()),
    }
}

fn height_on_graph(tiling: &Tiling, graph: &Graph, family: usize, root: usize) -> Result<Height> {
    let mut cochain = tiling.first_tile_cochain(graph, family)?;
    match build_potential(graph, &cochain, root)? {
        Potential::Witness(witness) => Ok(Height::Witness(FamilyWitness { family, witness, overrides: Vec::new() })),
        Potential::Map(map) => {
            // The first-tile cochain is closed; a disagreeing second tile
            // on some edge still rules out a global cochain.
            for (id, e) in tiling.edges.iter().enumerate() {
                let [a, b] = match e.tiles[..] {
                    [a, b] => [a, b],
                    _ => continue,
                };
                let va = tiling.side_value_canonical(a.0, a.1, family);
                let vb = tiling.side_value_canonical(b.0, b.1, family);
                if va == vb {
                    continue;
                }
                cochain.set_canonical(id, vb);
                let overrides = vec![EdgeOverride { edge: (e.u, e.v), value: vb }];
                return match build_potential(graph, &cochain, root)? {
                    Potential::Witness(witness) => Ok(Height::Witness(FamilyWitness { family, witness, overrides })),
                    Potential::Map(_) => Err(Error::Inconsistent(format!(
                        "edge ({}, {}) disagrees in family {family} but is not on any cycle",
                        e.u, e.v
                    ))),
                };
            }
            Ok(Height::Map(map))
        }
    }
}

/// Potential of one family's edge cochain, or the cycle that obstructs it.
pub fn height_function(tiling: &Tiling, family: usize, root: Option<usize>) -> Result<Height> {
    let graph = tiling.graph()?;
    match resolve_root(tiling, root)? {
        None => Ok(Height::Map(PotentialMap { root: 0, heights: Vec::new() })),
        Some(r) => height_on_graph(tiling, &graph, family, r),
    }
}

/// Builds every family; the atlas exists exactly when all families do.
pub fn height_atlas(tiling: &Tiling, root: Option<usize>) -> Result<AtlasOutcome> {
    let root = resolve_root(tiling, root)?;
    let Some(r) = root else {
        return Ok(AtlasOutcome::Atlas(HeightAtlas { root: None, maps: Vec::new(), tuples: Vec::new() }));
    };
    let graph = tiling.graph()?;
    let mut maps = Vec::with_capacity(tiling.families);
    let mut witnesses = Vec::new();
    for k in 0..tiling.families {
        match height_on_graph(tiling, &graph, k, r)? {
            Height::Map(m) => maps.push(m),
            Height::Witness(w) => witnesses.push(w),
        }
    }
    if !witnesses.is_empty() {
        return Ok(AtlasOutcome::Witnesses(witnesses));
    }
    let tuples = (0..tiling.vertices.len())
        .map(|v| maps.iter().map(|m| m.heights[v]).collect())
        .collect();
    Ok(AtlasOutcome::Atlas(HeightAtlas { root, maps, tuples }))
}

/// First pair of vertices (in id order) sharing a tuple.
pub fn injectivity_check(atlas: &HeightAtlas) -> Option<(usize, usize)> {
    let mut seen: HashMap<&[i64], usize> = HashMap::with_capacity(atlas.tuples.len());
    for (v, t) in atlas.tuples.iter().enumerate() {
        if let Some(&first) = seen.get(t.as_slice()) {
            return Some((first, v));
        }
        seen.insert(t, v);
    }
    None
}

/// `max_v |pos(v) − pos(root) − Σ_k h_k(v) e_k*|`.
pub fn reconstruction_check(atlas: &HeightAtlas, tiling: &Tiling) -> f64 {
    let Some(root) = atlas.root else { return 0.0 };
    let origin = &tiling.vertices[root].pos;
    let mut worst: f64 = 0.0;
    for (v, tuple) in atlas.tuples.iter().enumerate() {
        let pos = &tiling.vertices[v].pos;
        let mut err2 = 0.0;
        for i in 0..pos.len() {
            let predicted: f64 = tuple
                .iter()
                .zip(&tiling.basis)
                .map(|(&h, e)| h as f64 * e[i])
                .sum();
            err2 += (pos[i] - origin[i] - predicted).powi(2);
        }
        worst = worst.max(err2.sqrt());
    }
    worst
}
