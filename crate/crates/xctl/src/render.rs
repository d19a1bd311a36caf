//! Deterministic SVG snapshots: the lattice skeleton in grey, loops coloured
//! by length rank, triples as red/blue loops with dashed defect edges, and
//! spin configurations as face fills with the dual `η` drawn across edges.

use std::fmt::Write as _;
use std::path::Path;

use fixedbitset::FixedBitSet;
use loopon::coupling::CoherentTriple;
use loopon::loopcore::decompose;
use loopon::{LoopConfig, Region, SpinConfig};

use crate::error::Result;

const SCALE: f64 = 36.0;
const MARGIN: f64 = 12.0;
const SKELETON: &str = "#c8c8c8";
const PALETTE: [&str; 8] = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const OTHER_LOOPS: &str = "#444444";
const RED: &str = "#d62728";
const BLUE: &str = "#1f77b4";
const DEFECT: &str = "#2ca02c";
const PLUS: &str = "#f6e3b4";
const MINUS: &str = "#8fb3d9";

/// Hexagon side length with unit spacing between face centres.
const SIDE: f64 = 0.57735026919;

struct Frame {
    min_x: f64,
    max_y: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(region: &Region) -> Frame {
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for v in region.vertices() {
            let (x, y) = v.position();
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
        Frame { min_x, max_y, width: (max_x - min_x) * SCALE + 2.0 * MARGIN, height: (max_y - min_y) * SCALE + 2.0 * MARGIN }
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        ((x - self.min_x) * SCALE + MARGIN, (self.max_y - y) * SCALE + MARGIN)
    }
}

/// Endpoints of an edge, or `None` when it wraps around a torus.
fn segment(region: &Region, e: usize) -> Option<((f64, f64), (f64, f64))> {
    let [a, b] = region.edge(e).ends;
    let pa = region.vertices()[a].position();
    let pb = region.vertices()[b].position();
    let d = ((pa.0 - pb.0).powi(2) + (pa.1 - pb.1).powi(2)).sqrt();
    (d < SIDE * 1.01).then_some((pa, pb))
}

struct Svg {
    frame: Frame,
    body: String,
}

impl Svg {
    fn new(region: &Region) -> Svg {
        Svg { frame: Frame::new(region), body: String::new() }
    }

    fn line(&mut self, region: &Region, e: usize) {
        if let Some((a, b)) = segment(region, e) {
            let (x1, y1) = self.frame.map(a);
            let (x2, y2) = self.frame.map(b);
            let _ = writeln!(self.body, "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>");
        }
    }

    fn group(&mut self, attrs: &str, region: &Region, edges: impl IntoIterator<Item = usize>) {
        let _ = writeln!(self.body, "<g {attrs}>");
        for e in edges {
            self.line(region, e);
        }
        self.body.push_str("</g>\n");
    }

    fn skeleton(&mut self, region: &Region) {
        self.group(&format!("stroke=\"{SKELETON}\" stroke-width=\"1\""), region, 0..region.edge_count());
    }

    fn finish(self) -> String {
        let (w, h) = (self.frame.width, self.frame.height);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

/// Loops coloured by length rank (longest first, ties by smallest edge id);
/// loops beyond the palette are dark grey.
pub fn render_loops(region: &Region, omega: &LoopConfig) -> String {
    let mut svg = Svg::new(region);
    svg.skeleton(region);
    let mut loops = decompose(region, omega);
    loops.sort_by_key(|l| (std::cmp::Reverse(l.len()), l.min_edge()));
    for (rank, l) in loops.iter().enumerate() {
        let colour = PALETTE.get(rank).copied().unwrap_or(OTHER_LOOPS);
        svg.group(&format!("stroke=\"{colour}\" stroke-width=\"3\" stroke-linecap=\"round\""), region, l.edges.iter().copied());
    }
    svg.finish()
}

/// Red loops, blue loops and dashed defect edges.
pub fn render_triple(region: &Region, t: &CoherentTriple) -> String {
    let mut svg = Svg::new(region);
    svg.skeleton(region);
    svg.group(&format!("stroke=\"{RED}\" stroke-width=\"3\" stroke-linecap=\"round\""), region, t.red.edges().ones());
    svg.group(&format!("stroke=\"{BLUE}\" stroke-width=\"3\" stroke-linecap=\"round\""), region, t.blue.edges().ones());
    svg.group(&format!("stroke=\"{DEFECT}\" stroke-width=\"2\" stroke-dasharray=\"4 3\""), region, t.eta.ones());
    svg.finish()
}

/// Faces filled by spin, the lattice on top, and `η` as dashed dual edges
/// between the centres of the two faces of each edge.
pub fn render_spins(region: &Region, sigma: &SpinConfig, eta: Option<&FixedBitSet>) -> String {
    let mut svg = Svg::new(region);
    svg.body.push_str("<g stroke=\"none\">\n");
    for f in 0..region.face_count() {
        let pts: Vec<String> = region
            .vertices_of_face(f)
            .iter()
            .map(|&v| {
                let (x, y) = svg.frame.map(region.vertices()[v].position());
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let fill = if sigma.spins[f] > 0 { PLUS } else { MINUS };
        let _ = writeln!(svg.body, "<polygon points=\"{}\" fill=\"{fill}\"/>", pts.join(" "));
    }
    svg.body.push_str("</g>\n");
    svg.skeleton(region);
    if let Some(eta) = eta {
        svg.body.push_str("<g stroke=\"#222222\" stroke-width=\"2\" stroke-dasharray=\"3 2\">\n");
        for e in eta.ones() {
            let [a, b] = region.edge(e).key.faces();
            let (x1, y1) = svg.frame.map(a.center());
            let (x2, y2) = svg.frame.map(b.center());
            let _ = writeln!(svg.body, "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>");
        }
        svg.body.push_str("</g>\n");
    }
    svg.finish()
}

pub fn write_svg(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg).map_err(|e| crate::XctlError::Usage(format!("cannot write {}: {e}", path.display())))
}
