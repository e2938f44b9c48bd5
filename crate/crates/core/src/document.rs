//! JSON interchange for tilings and reports.
//!
//! Output is canonical: object keys sorted, every float rounded to 12
//! significant digits, two-space indentation. Reading then writing a
//! document reproduces it byte for byte.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::tiling::{EdgeSpec, Model, Side, Tile, TileKind, Tiling, Vertex};
use crate::validator::ValidationReport;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub model: Model,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuple: Option<Vec<i64>>,
    pub pos: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub u: usize,
    pub v: usize,
    pub class: usize,
    pub boundary: bool,
}

/// One `(family, value)` entry of a tile side. A side with no nonzero
/// value is written once with its edge class and value 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideDoc {
    pub from: usize,
    pub to: usize,
    pub family: usize,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileDoc {
    pub id: usize,
    pub kind: TileKind,
    pub vertices: Vec<usize>,
    pub sides: Vec<SideDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingDocument {
    pub header: Header,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
    pub tiles: Vec<TileDoc>,
}

fn malformed(msg: String) -> Error {
    Error::MalformedTiling(msg)
}

impl TilingDocument {
    pub fn from_tiling(t: &Tiling) -> TilingDocument {
        let mut metadata = t.metadata.clone();
        metadata.insert("basis".to_string(), serde_json::json!(t.basis));
        let vertices = t
            .vertices
            .iter()
            .enumerate()
            .map(|(id, v)| VertexDoc { id, tuple: v.tuple.clone(), pos: v.pos.clone() })
            .collect();
        let edges = t
            .edges
            .iter()
            .map(|e| EdgeDoc { u: e.u, v: e.v, class: e.class, boundary: e.boundary })
            .collect();
        let tiles = t
            .tiles
            .iter()
            .enumerate()
            .map(|(id, tile)| {
                let mut sides = Vec::new();
                for side in &tile.sides {
                    if side.values.is_empty() {
                        let class = t.edge_id(side.from, side.to).map_or(0, |e| t.edges[e].class);
                        sides.push(SideDoc { from: side.from, to: side.to, family: class, value: 0 });
                    }
                    for &(family, value) in &side.values {
                        sides.push(SideDoc { from: side.from, to: side.to, family, value });
                    }
                }
                TileDoc {
                    id,
                    kind: tile.kind,
                    vertices: tile.vertices.clone(),
                    sides,
                    orientation: tile.orientation,
                }
            })
            .collect();
        TilingDocument {
            header: Header { model: t.model, n: t.families, d: t.dim, metadata },
            vertices,
            edges,
            tiles,
        }
    }

    /// Checks the document invariants and rebuilds the tiling.
    pub fn to_tiling(&self) -> Result<Tiling> {
        let (n, d) = (self.header.n, self.header.d);
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(malformed(format!("vertex at index {i} has id {}", v.id)));
            }
            if v.pos.len() != d {
                return Err(malformed(format!("vertex {i} has {} coordinates, expected {d}", v.pos.len())));
            }
            if let Some(t) = &v.tuple {
                if t.len() != n {
                    return Err(malformed(format!("vertex {i} tuple has length {}, expected {n}", t.len())));
                }
            }
            vertices.push(Vertex { pos: v.pos.clone(), tuple: v.tuple.clone() });
        }

        let mut listed = HashSet::with_capacity(self.edges.len());
        for e in &self.edges {
            if e.u >= vertices.len() || e.v >= vertices.len() {
                return Err(malformed(format!("edge ({}, {}) names an unknown vertex", e.u, e.v)));
            }
            if e.class >= n.max(1) {
                return Err(malformed(format!("edge ({}, {}) has class {} of {n}", e.u, e.v, e.class)));
            }
            if !listed.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(malformed(format!("edge ({}, {}) is listed twice", e.u, e.v)));
            }
        }

        let mut tiles = Vec::with_capacity(self.tiles.len());
        for (i, td) in self.tiles.iter().enumerate() {
            if td.id != i {
                return Err(malformed(format!("tile at index {i} has id {}", td.id)));
            }
            let m = td.vertices.len();
            if m < 3 {
                return Err(malformed(format!("tile {i} has {m} vertices")));
            }
            let mut sides: Vec<Side> = (0..m)
                .map(|s| Side { from: td.vertices[s], to: td.vertices[(s + 1) % m], values: Vec::new() })
                .collect();
            let mut present = vec![false; m];
            for sd in &td.sides {
                let slot = sides
                    .iter()
                    .position(|s| s.from == sd.from && s.to == sd.to)
                    .ok_or_else(|| malformed(format!("tile {i} side ({}, {}) is not on its vertex cycle", sd.from, sd.to)))?;
                if sd.family >= n {
                    return Err(malformed(format!("tile {i} side ({}, {}) has family {} of {n}", sd.from, sd.to, sd.family)));
                }
                if sides[slot].value(sd.family) != 0 {
                    return Err(malformed(format!("tile {i} side ({}, {}) repeats family {}", sd.from, sd.to, sd.family)));
                }
                sides[slot].set_value(sd.family, sd.value);
                present[slot] = true;
            }
            if let Some(s) = present.iter().position(|p| !p) {
                return Err(malformed(format!("tile {i} has no entry for side ({}, {})", sides[s].from, sides[s].to)));
            }
            for s in &sides {
                if !listed.contains(&(s.from.min(s.to), s.from.max(s.to))) {
                    return Err(malformed(format!("tile {i} side ({}, {}) is missing from the edge list", s.from, s.to)));
                }
            }
            tiles.push(Tile { kind: td.kind, vertices: td.vertices.clone(), sides, orientation: td.orientation });
        }

        let mut metadata = self.header.metadata.clone();
        let basis: Vec<Vec<f64>> = match metadata.remove("basis") {
            Some(b) => serde_json::from_value(b).map_err(|e| malformed(format!("metadata.basis: {e}")))?,
            None => Vec::new(),
        };
        let extra: Vec<EdgeSpec> = self
            .edges
            .iter()
            .map(|e| EdgeSpec { u: e.u, v: e.v, class: e.class, boundary: Some(e.boundary) })
            .collect();
        let tiling = Tiling::assemble(self.header.model, n, d, vertices, tiles, &extra, basis, metadata)?;
        for e in &tiling.edges {
            let k = e.tiles.len();
            if k > 2 || (!e.boundary && k != 2) || (e.boundary && k == 2) {
                return Err(malformed(format!(
                    "edge ({}, {}) has {k} incident tiles but boundary = {}",
                    e.u, e.v, e.boundary
                )));
            }
        }
        Ok(tiling)
    }
}

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(num) if !num.is_i64() && !num.is_u64() => {
            if let Some(x) = num.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_significant(x)) {
                    *num = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Canonical text of any serialisable value, newline-terminated.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Domain(format!("serialisation failed: {e}")))?;
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Domain(format!("serialisation failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_document(t: &Tiling) -> Result<String> {
    to_canonical_json(&TilingDocument::from_tiling(t))
}

pub fn parse_document(text: &str) -> Result<TilingDocument> {
    serde_json::from_str(text).map_err(|e| malformed(format!("invalid document: {e}")))
}

pub fn read_document(text: &str) -> Result<Tiling> {
    parse_document(text)?.to_tiling()
}

/// Report JSON; `millis` is dropped unless `timing` is set.
pub fn report_json(report: &ValidationReport, timing: bool) -> Result<String> {
    let mut v = serde_json::to_value(report).map_err(|e| Error::Domain(format!("serialisation failed: {e}")))?;
    if !timing {
        if let Value::Object(o) = &mut v {
            o.remove("millis");
        }
    }
    to_canonical_json(&v)
}
