//! Candidate tilings: vertices, undirected edges with tile incidence, and
//! per-tile per-side decoration values.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cochain::{DirectedEdgeCochain, Graph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    P2,
    Pentagrid,
    Cpt,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::P2 => "p2",
            Model::Pentagrid => "pentagrid",
            Model::Cpt => "cpt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TileKind {
    Kite,
    Dart,
    Thick,
    Thin,
    Rhomb,
}

impl TileKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TileKind::Kite => "kite",
            TileKind::Dart => "dart",
            TileKind::Thick => "thick",
            TileKind::Thin => "thin",
            TileKind::Rhomb => "rhomb",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub pos: Vec<f64>,
    pub tuple: Option<Vec<i64>>,
}

/// Decoration values on the directed side `from -> to` of a tile, stored
/// sparsely as `(family, value)` pairs sorted by family; absent = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Side {
    pub from: usize,
    pub to: usize,
    pub values: Vec<(usize, i64)>,
}

impl Side {
    pub fn value(&self, family: usize) -> i64 {
        self.values
            .iter()
            .find(|&&(k, _)| k == family)
            .map_or(0, |&(_, v)| v)
    }

    pub fn set_value(&mut self, family: usize, value: i64) {
        match self.values.iter().position(|&(k, _)| k == family) {
            Some(i) if value == 0 => {
                self.values.remove(i);
            }
            Some(i) => self.values[i].1 = value,
            None if value == 0 => {}
            None => {
                self.values.push((family, value));
                self.values.sort_unstable();
            }
        }
    }

    /// Smallest family carrying a nonzero value.
    pub fn relevant_family(&self) -> Option<usize> {
        self.values.first().map(|&(k, _)| k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub kind: TileKind,
    /// Vertex cycle, counter-clockwise.
    pub vertices: Vec<usize>,
    /// `sides[i]` runs `vertices[i] -> vertices[i + 1]`.
    pub sides: Vec<Side>,
    /// Multiple of 36° for P2 tiles.
    pub orientation: Option<u8>,
}

impl Tile {
    pub fn boundary_cycle(&self) -> Vec<usize> {
        self.vertices.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub class: usize,
    pub boundary: bool,
    /// Incident `(tile id, side slot)` pairs in tile-id order.
    pub tiles: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tiling {
    pub model: Model,
    pub families: usize,
    pub dim: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub tiles: Vec<Tile>,
    /// Reconstruction vectors e_k*, one per family.
    pub basis: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, serde_json::Value>,
    edge_index: HashMap<(usize, usize), usize>,
}

/// Edge declared independently of any tile (1-d chains, document input).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    pub class: usize,
    pub boundary: Option<bool>,
}

impl Tiling {
    pub fn empty(model: Model, families: usize, dim: usize) -> Tiling {
        Tiling {
            model,
            families,
            dim,
            vertices: Vec::new(),
            edges: Vec::new(),
            tiles: Vec::new(),
            basis: Vec::new(),
            metadata: BTreeMap::new(),
            edge_index: HashMap::new(),
        }
    }

    /// Assembles a tiling, deriving edges from tile sides plus `extra`.
    ///
    /// An edge's boundary flag defaults to "fewer than two incident tiles";
    /// an explicit flag in `extra` overrides it (and is checked by the
    /// validator). Edge class defaults to the relevant family of the first
    /// incident side.
    pub fn assemble(
        model: Model,
        families: usize,
        dim: usize,
        vertices: Vec<Vertex>,
        tiles: Vec<Tile>,
        extra: &[EdgeSpec],
        basis: Vec<Vec<f64>>,
        metadata: BTreeMap<String, serde_json::Value>,
    ) -> Result<Tiling> {
        let n = vertices.len();
        let mut map: BTreeMap<(usize, usize), (Option<usize>, Option<bool>, Vec<(usize, usize)>)> =
            BTreeMap::new();
        for (t, tile) in tiles.iter().enumerate() {
            let m = tile.vertices.len();
            if m < 3 || tile.sides.len() != m {
                return Err(Error::MalformedTiling(format!(
                    "tile {t} has {m} vertices and {} sides",
                    tile.sides.len()
                )));
            }
            for (slot, side) in tile.sides.iter().enumerate() {
                let (a, b) = (tile.vertices[slot], tile.vertices[(slot + 1) % m]);
                if side.from != a || side.to != b {
                    return Err(Error::MalformedTiling(format!(
                        "tile {t} side {slot} ({} -> {}) is not on its vertex cycle",
                        side.from, side.to
                    )));
                }
                if a >= n || b >= n {
                    return Err(Error::UnknownVertex(a.max(b)));
                }
                if a == b {
                    return Err(Error::MalformedTiling(format!("tile {t} has a degenerate side")));
                }
                if let Some(&(k, _)) = side.values.iter().find(|&&(k, _)| k >= families) {
                    return Err(Error::MalformedTiling(format!(
                        "tile {t} side {slot} uses family {k} of {families}"
                    )));
                }
                map.entry((a.min(b), a.max(b)))
                    .or_insert((None, None, Vec::new()))
                    .2
                    .push((t, slot));
            }
        }
        for e in extra {
            if e.u >= n || e.v >= n {
                return Err(Error::UnknownVertex(e.u.max(e.v)));
            }
            if e.u == e.v {
                return Err(Error::MalformedTiling(format!("self-loop at vertex {}", e.u)));
            }
            let entry = map
                .entry((e.u.min(e.v), e.u.max(e.v)))
                .or_insert((None, None, Vec::new()));
            entry.0 = Some(e.class);
            if e.boundary.is_some() {
                entry.1 = e.boundary;
            }
        }
        let mut edges = Vec::with_capacity(map.len());
        let mut edge_index = HashMap::with_capacity(map.len());
        for ((u, v), (class, boundary, incident)) in map {
            let class = match class {
                Some(c) => c,
                None => {
                    let (t, slot) = incident[0];
                    tiles[t].sides[slot].relevant_family().unwrap_or(0)
                }
            };
            edge_index.insert((u, v), edges.len());
            edges.push(Edge {
                u,
                v,
                class,
                boundary: boundary.unwrap_or(incident.len() < 2),
                tiles: incident,
            });
        }
        Ok(Tiling {
            model,
            families,
            dim,
            vertices,
            edges,
            tiles,
            basis,
            metadata,
            edge_index,
        })
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn graph(&self) -> Result<Graph> {
        Graph::new(self.vertices.len(), self.edges.iter().map(|e| (e.u, e.v)))
    }

    /// Value assigned by tile side `(tile, slot)` to the canonical
    /// `min -> max` orientation of its edge.
    pub fn side_value_canonical(&self, tile: usize, slot: usize, family: usize) -> i64 {
        let side = &self.tiles[tile].sides[slot];
        let v = side.value(family);
        if side.from < side.to {
            v
        } else {
            -v
        }
    }

    /// Edge cochain for `family` read from the first incident tile; edges
    /// without tiles fall back to the lattice-coordinate difference.
    pub fn first_tile_cochain(&self, graph: &Graph, family: usize) -> Result<DirectedEdgeCochain> {
        let values = self
            .edges
            .iter()
            .map(|e| match e.tiles.first() {
                Some(&(t, slot)) => self.side_value_canonical(t, slot, family),
                None => self.tuple_step(e.u, e.v, family),
            })
            .collect();
        DirectedEdgeCochain::from_canonical_values(graph, values)
    }

    fn tuple_step(&self, u: usize, v: usize, family: usize) -> i64 {
        match (&self.vertices[u].tuple, &self.vertices[v].tuple) {
            (Some(a), Some(b)) if family < a.len() && family < b.len() => b[family] - a[family],
            _ => 0,
        }
    }

    /// Vertex nearest the origin, ties broken by tuple then id.
    pub fn reference_vertex(&self) -> Option<usize> {
        let norm = |v: &Vertex| v.pos.iter().map(|x| x * x).sum::<f64>();
        (0..self.vertices.len()).min_by(|&a, &b| {
            let (va, vb) = (&self.vertices[a], &self.vertices[b]);
            let (na, nb) = (norm(va), norm(vb));
            if (na - nb).abs() > 1e-12 {
                na.partial_cmp(&nb).unwrap()
            } else {
                va.tuple.cmp(&vb.tuple).then(a.cmp(&b))
            }
        })
    }

    pub fn interior_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.boundary).count()
    }

    pub fn tile_count_of(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|t| t.kind == kind).count()
    }
}
