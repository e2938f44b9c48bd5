//! SVG rendering of tilings: tile polygons, schematic bar chords,
//! highlighted violations and height-coloured vertices.

use std::fmt::Write;

use crate::tiling::{TileKind, Tiling};
use crate::validator::ValidationReport;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 20.0;

#[derive(Debug, Clone, Default)]
pub struct SvgOptions<'a> {
    pub bars: bool,
    pub violations: Option<&'a ValidationReport>,
    /// One height per vertex, coloured on a blue to red ramp.
    pub heights: Option<&'a [i64]>,
}

fn fill(kind: TileKind) -> &'static str {
    match kind {
        TileKind::Kite => "#f2c14e",
        TileKind::Dart => "#5b8e7d",
        TileKind::Thick => "#e8a87c",
        TileKind::Thin => "#85cdca",
        TileKind::Rhomb => "#c3bef0",
    }
}

fn planar(pos: &[f64]) -> (f64, f64) {
    (pos.first().copied().unwrap_or(0.0), pos.get(1).copied().unwrap_or(0.0))
}

struct Frame {
    min: (f64, f64),
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(t: &Tiling) -> Frame {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for v in &t.vertices {
            let (x, y) = planar(&v.pos);
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if t.vertices.is_empty() {
            lo = (0.0, 0.0);
            hi = (1.0, 1.0);
        }
        let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-9);
        let scale = (CANVAS - 2.0 * MARGIN) / span;
        Frame { min: lo, scale, height: (hi.1 - lo.1) * scale + 2.0 * MARGIN }
    }

    fn map(&self, pos: &[f64]) -> (f64, f64) {
        let (x, y) = planar(pos);
        (
            MARGIN + (x - self.min.0) * self.scale,
            self.height - MARGIN - (y - self.min.1) * self.scale,
        )
    }
}

pub fn render_svg(t: &Tiling, opts: &SvgOptions) -> String {
    let frame = Frame::new(t);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS:.0}" height="{:.0}" viewBox="0 0 {CANVAS:.0} {:.0}">"#,
        frame.height, frame.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    out.push_str("<g id=\"tiles\" stroke=\"#333\" stroke-width=\"0.8\">\n");
    for tile in &t.tiles {
        let points: Vec<String> = tile
            .vertices
            .iter()
            .map(|&v| {
                let (x, y) = frame.map(&t.vertices[v].pos);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(out, r#"<polygon points="{}" fill="{}"/>"#, points.join(" "), fill(tile.kind));
    }
    out.push_str("</g>\n");

    out.push_str("<g id=\"edges\" stroke=\"#333\" stroke-width=\"1\">\n");
    for e in t.edges.iter().filter(|e| e.tiles.is_empty()) {
        let (x1, y1) = frame.map(&t.vertices[e.u].pos);
        let (x2, y2) = frame.map(&t.vertices[e.v].pos);
        let _ = writeln!(out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
    }
    out.push_str("</g>\n");

    if opts.bars {
        out.push_str("<g id=\"bars\" stroke=\"#c0392b\" stroke-width=\"1\" stroke-dasharray=\"3,2\">\n");
        for e in &t.edges {
            let Some(n) = t.basis.get(e.class) else { continue };
            let (nx, ny) = planar(n);
            let len = nx.hypot(ny);
            if len == 0.0 {
                continue;
            }
            let (a, b) = (planar(&t.vertices[e.u].pos), planar(&t.vertices[e.v].pos));
            let mid = [(a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0];
            let half = 0.3 * (b.0 - a.0).hypot(b.1 - a.1);
            let (px, py) = (-ny / len * half, nx / len * half);
            let (x1, y1) = frame.map(&[mid[0] - px, mid[1] - py]);
            let (x2, y2) = frame.map(&[mid[0] + px, mid[1] + py]);
            let _ = writeln!(out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
        }
        out.push_str("</g>\n");
    }

    if let Some(report) = opts.violations {
        out.push_str("<g id=\"violations\" stroke=\"#e00000\" stroke-width=\"4\">\n");
        for v in report.all_violations() {
            let (x1, y1) = frame.map(&t.vertices[v.edge.0].pos);
            let (x2, y2) = frame.map(&t.vertices[v.edge.1].pos);
            let _ = writeln!(
                out,
                r#"<line class="violation" data-family="{}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#,
                v.family
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" font-size="12" fill="#e00000" stroke="none">k={}</text>"##,
                (x1 + x2) / 2.0 + 3.0,
                (y1 + y2) / 2.0 - 3.0,
                v.family
            );
        }
        out.push_str("</g>\n");
    }

    if let Some(h) = opts.heights {
        let lo = h.iter().copied().min().unwrap_or(0);
        let hi = h.iter().copied().max().unwrap_or(0);
        out.push_str("<g id=\"heights\" stroke=\"none\">\n");
        for (v, &value) in h.iter().enumerate().take(t.vertices.len()) {
            let s = if hi > lo { (value - lo) as f64 / (hi - lo) as f64 } else { 0.5 };
            let (r, b) = ((255.0 * s).round() as u8, (255.0 * (1.0 - s)).round() as u8);
            let (x, y) = frame.map(&t.vertices[v].pos);
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="rgb({r},60,{b})" data-height="{value}"/>"#
            );
        }
        out.push_str("</g>\n");
    }

    out.push_str("</svg>\n");
    out
}
