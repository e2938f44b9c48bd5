//! Per-edge, per-family gluing checks with violation localisation, and
//! the executable equivalence audit.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cochain::{check_cycle_closure, DirectedEdgeCochain};
use crate::error::{Error, Result};
use crate::potential::{height_atlas, AtlasOutcome};
use crate::tiling::Tiling;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub edge: (usize, usize),
    pub family: usize,
    pub a_tile: usize,
    pub a_val: i64,
    pub b_tile: usize,
    pub b_val: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyViolations {
    pub k: usize,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub families: Vec<FamilyViolations>,
    pub edges_checked: usize,
    pub millis: f64,
}

impl ValidationReport {
    pub fn violation_count(&self) -> usize {
        self.families.iter().map(|f| f.violations.len()).sum()
    }

    pub fn all_violations(&self) -> impl Iterator<Item = &Violation> {
        self.families.iter().flat_map(|f| f.violations.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InjectMode {
    Flip,
    Zero,
}

fn check_incidence(tiling: &Tiling) -> Result<()> {
    for e in &tiling.edges {
        let n = e.tiles.len();
        if n > 2 {
            return Err(Error::MalformedTiling(format!(
                "edge ({}, {}) has {n} incident tiles",
                e.u, e.v
            )));
        }
        if (n == 2) == e.boundary {
            return Err(Error::MalformedTiling(format!(
                "edge ({}, {}) has {n} incident tiles but boundary = {}",
                e.u, e.v, e.boundary
            )));
        }
    }
    Ok(())
}

fn gluing_pass(tiling: &Tiling, family: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in &tiling.edges {
        if e.tiles.len() != 2 {
            continue;
        }
        let (a_tile, a_slot) = e.tiles[0];
        let (b_tile, b_slot) = e.tiles[1];
        let a_val = tiling.side_value_canonical(a_tile, a_slot, family);
        let b_val = tiling.side_value_canonical(b_tile, b_slot, family);
        if a_val != b_val {
            out.push(Violation { edge: (e.u, e.v), family, a_tile, a_val, b_tile, b_val });
        }
    }
    out
}

/// Gluing mismatches of one family, in edge-id order.
pub fn check_gluing(tiling: &Tiling, family: usize) -> Result<Vec<Violation>> {
    check_incidence(tiling)?;
    Ok(gluing_pass(tiling, family))
}

pub fn validate(tiling: &Tiling) -> Result<ValidationReport> {
    let start = Instant::now();
    check_incidence(tiling)?;
    let families: Vec<FamilyViolations> = (0..tiling.families)
        .map(|k| FamilyViolations { k, violations: gluing_pass(tiling, k) })
        .collect();
    Ok(finish(tiling, families, start))
}

/// As [`validate`], running the family passes on separate threads.
pub fn validate_parallel(tiling: &Tiling) -> Result<ValidationReport> {
    let start = Instant::now();
    check_incidence(tiling)?;
    let families = std::thread::scope(|s| {
        let handles: Vec<_> = (0..tiling.families)
            .map(|k| s.spawn(move || FamilyViolations { k, violations: gluing_pass(tiling, k) }))
            .collect();
        handles.into_iter().map(|h| h.join().expect("family pass")).collect()
    });
    Ok(finish(tiling, families, start))
}

fn finish(tiling: &Tiling, families: Vec<FamilyViolations>, start: Instant) -> ValidationReport {
    let valid = families.iter().all(|f| f.violations.is_empty());
    ValidationReport {
        valid,
        families,
        edges_checked: tiling.edges.len(),
        millis: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Flips the chosen tile's value on the edge's relevant family.
pub fn inject_violation(tiling: &Tiling, edge: usize, which: Which) -> Result<Tiling> {
    inject_violation_with(tiling, edge, which, InjectMode::Flip)
}

pub fn inject_violation_with(tiling: &Tiling, edge: usize, which: Which, mode: InjectMode) -> Result<Tiling> {
    let e = tiling
        .edges
        .get(edge)
        .ok_or_else(|| Error::Domain(format!("no edge {edge}")))?;
    if e.tiles.len() != 2 {
        return Err(Error::Domain(format!("edge ({}, {}) is a boundary edge", e.u, e.v)));
    }
    let (tile, slot) = e.tiles[match which {
        Which::A => 0,
        Which::B => 1,
    }];
    let mut out = tiling.clone();
    let side = &mut out.tiles[tile].sides[slot];
    let current = side.value(e.class);
    if current == 0 && mode == InjectMode::Flip {
        return Err(Error::Domain(format!(
            "tile {tile} carries no value on family {} of edge ({}, {})",
            e.class, e.u, e.v
        )));
    }
    side.set_value(
        e.class,
        match mode {
            InjectMode::Flip => -current,
            InjectMode::Zero => 0,
        },
    );
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Every interior edge glues in every family.
    pub gluing: bool,
    /// A global cochain exists for every family and passes cycle closure.
    pub cochain_closure: bool,
    /// Height functions exist for every family.
    pub heights: bool,
}

pub fn equivalence_audit(tiling: &Tiling) -> Result<AuditReport> {
    let gluing = validate(tiling)?.valid;

    let graph = tiling.graph()?;
    let mut cochain_closure = true;
    if !tiling.vertices.is_empty() {
        'families: for k in 0..tiling.families {
            let fallback = tiling.first_tile_cochain(&graph, k)?;
            let mut values = Vec::with_capacity(tiling.edges.len());
            for (id, e) in tiling.edges.iter().enumerate() {
                let mut seen: Option<i64> = None;
                for &(t, slot) in &e.tiles {
                    let v = tiling.side_value_canonical(t, slot, k);
                    match seen {
                        Some(s) if s != v => {
                            cochain_closure = false;
                            break 'families;
                        }
                        _ => seen = Some(v),
                    }
                }
                values.push(seen.unwrap_or_else(|| fallback.canonical_value(id)));
            }
            let cochain = DirectedEdgeCochain::from_canonical_values(&graph, values)?;
            if !check_cycle_closure(&graph, &cochain)?.is_pass() {
                cochain_closure = false;
                break;
            }
        }
    }

    let heights = matches!(height_atlas(tiling, None)?, AtlasOutcome::Atlas(_));

    if gluing != cochain_closure || gluing != heights {
        return Err(Error::Inconsistent(format!(
            "gluing={gluing} cochain_closure={cochain_closure} heights={heights}"
        )));
    }
    Ok(AuditReport { gluing, cochain_closure, heights })
}
