//! Hexagonal lattice geometry: balls, simply connected domains and tori.
//!
//! Faces of the hexagonal lattice are the sites of the triangular lattice,
//! addressed by axial coordinates `(k, l)` for the point `k + l e^{iπ/3}`.
//! Vertices are triangles of three mutually adjacent faces and edges are
//! pairs of adjacent faces.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Face-neighbour offsets in counter-clockwise order starting at angle 0.
pub const DIRS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceCoord {
    pub k: i32,
    pub l: i32,
}

impl FaceCoord {
    pub const ORIGIN: FaceCoord = FaceCoord { k: 0, l: 0 };

    pub const fn new(k: i32, l: i32) -> Self {
        FaceCoord { k, l }
    }

    pub fn step(self, dir: usize) -> Self {
        let (dk, dl) = DIRS[dir % 6];
        FaceCoord::new(self.k + dk, self.l + dl)
    }

    /// Centre of the face in the plane (unit spacing between face centres).
    pub fn center(self) -> (f64, f64) {
        let (k, l) = (self.k as f64, self.l as f64);
        (k + 0.5 * l, l * 3f64.sqrt() / 2.0)
    }
}

impl fmt::Display for FaceCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

/// Graph distance on the triangular lattice.
pub fn face_distance(a: FaceCoord, b: FaceCoord) -> u32 {
    let dk = (a.k - b.k) as i64;
    let dl = (a.l - b.l) as i64;
    dk.abs().max(dl.abs()).max((dk + dl).abs()) as u32
}

/// A hexagon vertex: the triangle `{(k,l),(k+1,l),(k,l+1)}` (up) or
/// `{(k+1,l),(k,l+1),(k+1,l+1)}` (down).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexKey {
    pub k: i32,
    pub l: i32,
    pub up: bool,
}

impl VertexKey {
    /// The `i`-th corner of face `f`, between directions `i` and `i+1`.
    pub fn corner(f: FaceCoord, i: usize) -> VertexKey {
        let (k, l) = (f.k, f.l);
        match i % 6 {
            0 => VertexKey { k, l, up: true },
            1 => VertexKey { k: k - 1, l, up: false },
            2 => VertexKey { k: k - 1, l, up: true },
            3 => VertexKey { k: k - 1, l: l - 1, up: false },
            4 => VertexKey { k, l: l - 1, up: true },
            _ => VertexKey { k, l: l - 1, up: false },
        }
    }

    pub fn faces(self) -> [FaceCoord; 3] {
        let (k, l) = (self.k, self.l);
        if self.up {
            [FaceCoord::new(k, l), FaceCoord::new(k + 1, l), FaceCoord::new(k, l + 1)]
        } else {
            [FaceCoord::new(k + 1, l), FaceCoord::new(k, l + 1), FaceCoord::new(k + 1, l + 1)]
        }
    }

    pub fn position(self) -> (f64, f64) {
        let fs = self.faces();
        let mut x = 0.0;
        let mut y = 0.0;
        for f in fs {
            let (a, b) = f.center();
            x += a;
            y += b;
        }
        (x / 3.0, y / 3.0)
    }
}

/// An edge of the infinite lattice: the hexagon side between `base` and
/// `base.step(dir)` with `dir ∈ {0,1,2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub base: FaceCoord,
    pub dir: u8,
}

impl EdgeKey {
    /// Edge of face `f` towards neighbour direction `i` (0..6).
    pub fn side(f: FaceCoord, i: usize) -> EdgeKey {
        let i = i % 6;
        if i < 3 {
            EdgeKey { base: f, dir: i as u8 }
        } else {
            EdgeKey { base: f.step(i), dir: (i - 3) as u8 }
        }
    }

    pub fn faces(self) -> [FaceCoord; 2] {
        [self.base, self.base.step(self.dir as usize)]
    }

    /// Twice the midpoint, in axial coordinates.
    pub fn doubled_midpoint(self) -> (i64, i64) {
        let (dk, dl) = DIRS[self.dir as usize];
        (2 * self.base.k as i64 + dk as i64, 2 * self.base.l as i64 + dl as i64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegionKind {
    /// Simply connected domain; `ball` records `(center, radius)` when built by [`Region::ball`].
    Domain { ball: Option<(FaceCoord, u32)> },
    Torus { k: u32, l: u32 },
}

/// Incidence data of one edge. `sides` are dual-vertex ids: `< face_count()`
/// for region faces, `>= face_count()` for outer faces of a domain.
#[derive(Clone, Debug)]
pub struct EdgeInfo {
    pub key: EdgeKey,
    pub ends: [usize; 2],
    pub sides: [usize; 2],
}

#[derive(Clone, Debug)]
pub(crate) struct TorusData {
    /// `+1`/`-1` per edge for crossings of the two cut lines; `0` elsewhere.
    pub cut_sign_a: Vec<i8>,
    pub cut_sign_b: Vec<i8>,
    pub up_end: Vec<usize>,
    pub generators: [FixedBitSet; 2],
}

/// A finite region of the hexagonal lattice with dense integer ids.
#[derive(Clone, Debug)]
pub struct Region {
    kind: RegionKind,
    faces: Vec<FaceCoord>,
    face_index: HashMap<FaceCoord, usize>,
    outer: Vec<FaceCoord>,
    outer_index: HashMap<FaceCoord, usize>,
    vertices: Vec<VertexKey>,
    edges: Vec<EdgeInfo>,
    edge_index: HashMap<EdgeKey, usize>,
    face_edges: Vec<[usize; 6]>,
    face_vertices: Vec<[usize; 6]>,
    vertex_edges: Vec<Vec<usize>>,
    boundary: Vec<usize>,
    torus: Option<TorusData>,
}

impl Region {
    /// The ball `Λ_r(center)`: all vertices and edges bordering faces within
    /// triangular distance `r` of `center`.
    pub fn ball(center: FaceCoord, r: u32) -> Region {
        let ri = r as i32;
        let mut faces = Vec::new();
        for l in -ri..=ri {
            for k in -ri..=ri {
                let f = FaceCoord::new(center.k + k, center.l + l);
                if face_distance(center, f) <= r {
                    faces.push(f);
                }
            }
        }
        Region::build_planar(faces, Some((center, r))).expect("balls are valid domains")
    }

    /// A domain from an explicit face set. The faces must form a simply
    /// connected union (checked through the Euler relation and a single
    /// boundary cycle).
    pub fn domain(mut faces: Vec<FaceCoord>) -> Result<Region> {
        faces.sort_by_key(|f| (f.l, f.k));
        faces.dedup();
        if faces.is_empty() {
            return Err(Error::InvalidRegion("empty face set".into()));
        }
        Region::build_planar(faces, None)
    }

    /// The `k × l` torus.
    pub fn torus(k: u32, l: u32) -> Result<Region> {
        if k < 2 || l < 2 {
            return Err(Error::InvalidRegion(format!(
                "torus dimensions must be at least 2, got {k}x{l}"
            )));
        }
        let (ki, li) = (k as i32, l as i32);
        let mut faces = Vec::new();
        for t in 0..li {
            for s in 0..ki {
                faces.push(FaceCoord::new(s, t));
            }
        }
        let red = move |f: FaceCoord| FaceCoord::new(f.k.rem_euclid(ki), f.l.rem_euclid(li));
        let mut region = Region::assemble(faces, RegionKind::Torus { k, l }, red);
        region.torus = Some(region.torus_data(ki, li));
        Ok(region)
    }

    fn build_planar(faces: Vec<FaceCoord>, ball: Option<(FaceCoord, u32)>) -> Result<Region> {
        let region = Region::assemble(faces, RegionKind::Domain { ball }, |f| f);
        let v = region.vertices.len() as i64;
        let e = region.edges.len() as i64;
        let f = region.faces.len() as i64;
        if v - e + f + 1 != 2 {
            return Err(Error::InvalidRegion("face set is not simply connected".into()));
        }
        // a connected, hole-free union has a connected boundary cycle
        let mut seen = vec![false; region.vertices.len()];
        let mut stack = vec![region.edges[region.boundary[0]].ends[0]];
        let mut count = 0;
        let bset: FixedBitSet = region.boundary.iter().copied().collect();
        while let Some(u) = stack.pop() {
            if seen[u] {
                continue;
            }
            seen[u] = true;
            count += 1;
            for &e in &region.vertex_edges[u] {
                if bset.contains(e) {
                    let w = region.other_end(e, u);
                    if !seen[w] {
                        stack.push(w);
                    }
                }
            }
        }
        if count != region.boundary.len() {
            return Err(Error::InvalidRegion("boundary is not a single cycle".into()));
        }
        Ok(region)
    }

    fn assemble(faces: Vec<FaceCoord>, kind: RegionKind, red: impl Fn(FaceCoord) -> FaceCoord) -> Region {
        let face_index: HashMap<FaceCoord, usize> =
            faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut vertex_index: HashMap<VertexKey, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut edge_index: HashMap<EdgeKey, usize> = HashMap::new();
        let mut edges: Vec<EdgeInfo> = Vec::new();
        let mut outer = Vec::new();
        let mut outer_index: HashMap<FaceCoord, usize> = HashMap::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        let mut face_vertices = Vec::with_capacity(faces.len());
        let nf = faces.len();
        let reduce_vertex = |v: VertexKey| {
            let f = red(FaceCoord::new(v.k, v.l));
            VertexKey { k: f.k, l: f.l, up: v.up }
        };
        for &f in &faces {
            let mut fv = [0usize; 6];
            for (i, slot) in fv.iter_mut().enumerate() {
                let key = reduce_vertex(VertexKey::corner(f, i));
                *slot = *vertex_index.entry(key).or_insert_with(|| {
                    vertices.push(key);
                    vertices.len() - 1
                });
            }
            let mut fe = [0usize; 6];
            for i in 0..6 {
                let raw = EdgeKey::side(f, i);
                let key = EdgeKey { base: red(raw.base), dir: raw.dir };
                let id = match edge_index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let nb = red(f.step(i));
                        let nb_id = match face_index.get(&nb) {
                            Some(&j) => j,
                            None => {
                                let len = outer.len();
                                *outer_index.entry(nb).or_insert_with(|| {
                                    outer.push(nb);
                                    nf + len
                                })
                            }
                        };
                        let self_id = face_index[&f];
                        let (a, b) = (fv[(i + 5) % 6], fv[i]);
                        edges.push(EdgeInfo {
                            key,
                            ends: [a.min(b), a.max(b)],
                            sides: [self_id.min(nb_id), self_id.max(nb_id)],
                        });
                        edge_index.insert(key, edges.len() - 1);
                        edges.len() - 1
                    }
                };
                fe[i] = id;
            }
            face_edges.push(fe);
            face_vertices.push(fv);
        }
        let mut vertex_edges = vec![Vec::with_capacity(3); vertices.len()];
        for (id, e) in edges.iter().enumerate() {
            vertex_edges[e.ends[0]].push(id);
            vertex_edges[e.ends[1]].push(id);
        }
        let boundary = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.sides[1] >= nf)
            .map(|(i, _)| i)
            .collect();
        Region {
            kind,
            faces,
            face_index,
            outer,
            outer_index,
            vertices,
            edges,
            edge_index,
            face_edges,
            face_vertices,
            vertex_edges,
            boundary,
            torus: None,
        }
    }

    fn torus_data(&self, ki: i32, li: i32) -> TorusData {
        let ne = self.edges.len();
        let mut cut_a = vec![0i8; ne];
        let mut cut_b = vec![0i8; ne];
        let mut up_end = vec![0usize; ne];
        for (id, e) in self.edges.iter().enumerate() {
            up_end[id] = if self.vertices[e.ends[0]].up { e.ends[0] } else { e.ends[1] };
            if e.key.dir == 1 && e.key.base.k == 0 {
                cut_a[id] = 1;
            }
            if e.key.dir == 0 && e.key.base.l == 0 {
                cut_b[id] = 1;
            }
        }
        let mut h1 = FixedBitSet::with_capacity(ne);
        for s in 0..ki {
            h1.insert(self.edge_index[&EdgeKey { base: FaceCoord::new(s, 0), dir: 1 }]);
            h1.insert(self.edge_index[&EdgeKey { base: FaceCoord::new((s + 1) % ki, 0), dir: 2 }]);
        }
        let mut h2 = FixedBitSet::with_capacity(ne);
        for t in 0..li {
            h2.insert(self.edge_index[&EdgeKey { base: FaceCoord::new(0, t), dir: 0 }]);
            h2.insert(self.edge_index[&EdgeKey { base: FaceCoord::new(1 % ki, t), dir: 2 }]);
        }
        TorusData { cut_sign_a: cut_a, cut_sign_b: cut_b, up_end, generators: [h1, h2] }
    }

    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, RegionKind::Torus { .. })
    }

    pub fn ball_params(&self) -> Option<(FaceCoord, u32)> {
        match self.kind {
            RegionKind::Domain { ball } => ball,
            RegionKind::Torus { .. } => None,
        }
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn faces(&self) -> &[FaceCoord] {
        &self.faces
    }

    pub fn face(&self, id: usize) -> FaceCoord {
        self.faces[id]
    }

    pub fn face_id(&self, f: FaceCoord) -> Result<usize> {
        let f = self.reduce(f);
        self.face_index.get(&f).copied().ok_or(Error::OutOfRegion(format!("face {f}")))
    }

    /// Canonical representative of a face (periodic reduction on tori).
    pub fn reduce(&self, f: FaceCoord) -> FaceCoord {
        match self.kind {
            RegionKind::Torus { k, l } => FaceCoord::new(f.k.rem_euclid(k as i32), f.l.rem_euclid(l as i32)),
            RegionKind::Domain { .. } => f,
        }
    }

    pub fn contains_face(&self, f: FaceCoord) -> bool {
        self.face_index.contains_key(&self.reduce(f))
    }

    /// Faces outside a domain that border one of its boundary edges.
    pub fn outer_faces(&self) -> &[FaceCoord] {
        &self.outer
    }

    /// Number of dual vertices: region faces plus outer faces.
    pub fn dual_vertex_count(&self) -> usize {
        self.faces.len() + self.outer.len()
    }

    pub fn dual_vertex(&self, id: usize) -> FaceCoord {
        if id < self.faces.len() {
            self.faces[id]
        } else {
            self.outer[id - self.faces.len()]
        }
    }

    pub fn dual_vertex_id(&self, f: FaceCoord) -> Option<usize> {
        let f = self.reduce(f);
        self.face_index
            .get(&f)
            .copied()
            .or_else(|| self.outer_index.get(&f).copied())
    }

    pub fn vertices(&self) -> &[VertexKey] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeInfo] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &EdgeInfo {
        &self.edges[id]
    }

    pub fn edge_id(&self, key: EdgeKey) -> Option<usize> {
        let key = EdgeKey { base: self.reduce(key.base), dir: key.dir };
        self.edge_index.get(&key).copied()
    }

    pub fn edges_of_face(&self, face: usize) -> Result<&[usize; 6]> {
        self.face_edges.get(face).ok_or(Error::OutOfRegion(format!("face id {face}")))
    }

    pub fn vertices_of_face(&self, face: usize) -> &[usize; 6] {
        &self.face_vertices[face]
    }

    pub fn edges_of_vertex(&self, v: usize) -> Result<&[usize]> {
        self.vertex_edges
            .get(v)
            .map(|e| e.as_slice())
            .ok_or(Error::OutOfRegion(format!("vertex id {v}")))
    }

    pub(crate) fn vertex_edges_raw(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn faces_of_edge(&self, e: usize) -> Result<[usize; 2]> {
        self.edges.get(e).map(|x| x.sides).ok_or(Error::OutOfRegion(format!("edge id {e}")))
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let ends = self.edges[e].ends;
        if ends[0] == v {
            ends[1]
        } else {
            ends[0]
        }
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].sides[1] >= self.faces.len()
    }

    pub fn empty_edge_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.edges.len())
    }

    /// The boundary `∂f` of a face as an edge set.
    pub fn face_boundary(&self, face: usize) -> FixedBitSet {
        let mut s = self.empty_edge_set();
        for &e in &self.face_edges[face] {
            s.toggle(e);
        }
        s
    }

    /// Edge set of the boundary of a face set (edges with an odd number of
    /// sides in the set).
    pub fn boundary_of_faces(&self, faces: &[usize]) -> FixedBitSet {
        let mut s = self.empty_edge_set();
        for &f in faces {
            for &e in &self.face_edges[f] {
                s.toggle(e);
            }
        }
        s
    }

    /// Face ids of `Λ_r(center)` intersected with this region.
    pub fn ball_faces(&self, center: FaceCoord, r: u32) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.faces.len())
            .filter(|&i| self.face_distance(center, self.faces[i]) <= r)
            .collect();
        out.sort_unstable();
        out
    }

    /// All edges bordering at least one of the given faces.
    pub fn edges_bordering(&self, faces: &[usize]) -> FixedBitSet {
        let mut s = self.empty_edge_set();
        for &f in faces {
            for &e in &self.face_edges[f] {
                s.insert(e);
            }
        }
        s
    }

    /// Triangular-lattice distance, periodic on tori.
    pub fn face_distance(&self, a: FaceCoord, b: FaceCoord) -> u32 {
        match self.kind {
            RegionKind::Domain { .. } => face_distance(a, b),
            RegionKind::Torus { k, l } => {
                let (k, l) = (k as i32, l as i32);
                let (a, b) = (self.reduce(a), self.reduce(b));
                let mut best = u32::MAX;
                for i in -1..=1 {
                    for j in -1..=1 {
                        best = best.min(face_distance(a, FaceCoord::new(b.k + i * k, b.l + j * l)));
                    }
                }
                best
            }
        }
    }

    /// Face ids in BFS order of the dual graph restricted to region faces.
    pub fn dual_bfs_distances(&self, from: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.faces.len()];
        let mut q = VecDeque::new();
        dist[from] = 0;
        q.push_back(from);
        while let Some(u) = q.pop_front() {
            for &e in &self.face_edges[u] {
                let s = self.edges[e].sides;
                let w = if s[0] == u { s[1] } else { s[0] };
                if w < self.faces.len() && dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    pub(crate) fn torus_data_ref(&self) -> Option<&TorusData> {
        self.torus.as_ref()
    }

    /// The two fixed non-contractible generator cycles of a torus.
    pub fn homology_generators(&self) -> Option<[&FixedBitSet; 2]> {
        self.torus.as_ref().map(|t| [&t.generators[0], &t.generators[1]])
    }

    /// Cut-line membership of each edge: `(in cut a, in cut b)`.
    pub fn cut_lines(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        self.torus.as_ref().map(|t| {
            let a = (0..self.edges.len()).filter(|&e| t.cut_sign_a[e] != 0).collect();
            let b = (0..self.edges.len()).filter(|&e| t.cut_sign_b[e] != 0).collect();
            (a, b)
        })
    }

    /// Plain-text description: kind, parameters and face list.
    pub fn describe(&self) -> String {
        let mut s = String::from("region v1\n");
        match &self.kind {
            RegionKind::Torus { k, l } => {
                s.push_str(&format!("kind torus\nk {k}\nl {l}\n"));
            }
            RegionKind::Domain { ball: Some((c, r)) } => {
                s.push_str(&format!("kind ball\ncenter {} {}\nradius {r}\n", c.k, c.l));
            }
            RegionKind::Domain { ball: None } => s.push_str("kind domain\n"),
        }
        s.push_str(&format!("faces {}\n", self.faces.len()));
        for f in &self.faces {
            s.push_str(&format!("{} {}\n", f.k, f.l));
        }
        s
    }

    /// Parses the output of [`Region::describe`].
    pub fn parse(text: &str) -> Result<Region> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("region v1") {
            return Err(bad("missing 'region v1' header"));
        }
        let kind = lines.next().and_then(|l| l.strip_prefix("kind ")).ok_or_else(|| bad("missing kind"))?;
        let mut kv = |name: &str| -> Result<Vec<i64>> {
            let line = lines.next().ok_or_else(|| bad(&format!("missing {name}")))?;
            let rest = line.strip_prefix(name).ok_or_else(|| bad(&format!("expected {name}")))?;
            rest.split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|_| bad(&format!("bad number in {name}"))))
                .collect()
        };
        let region = match kind {
            "torus" => {
                let k = kv("k")?;
                let l = kv("l")?;
                Region::torus(k[0] as u32, l[0] as u32)?
            }
            "ball" => {
                let c = kv("center")?;
                let r = kv("radius")?;
                if c.len() != 2 || r.len() != 1 || r[0] < 0 {
                    return Err(bad("bad ball parameters"));
                }
                Region::ball(FaceCoord::new(c[0] as i32, c[1] as i32), r[0] as u32)
            }
            "domain" => {
                let n = kv("faces")?[0] as usize;
                let mut faces = Vec::with_capacity(n);
                for _ in 0..n {
                    let p = kv("")?;
                    faces.push(FaceCoord::new(p[0] as i32, p[1] as i32));
                }
                return Region::domain(faces);
            }
            other => return Err(bad(&format!("unknown region kind {other}"))),
        };
        Ok(region)
    }
}

/// The dual domain `D*`: one vertex per face bordering an edge of the
/// region, one dual edge per primal edge.
#[derive(Clone, Debug)]
pub struct DualGraph {
    pub vertex_count: usize,
    /// Dual vertices `>= interior` are outer (boundary) dual vertices.
    pub interior: usize,
    /// Dual edge `e` joins `ends[e]`; indexed like the primal edges.
    pub ends: Vec<[usize; 2]>,
}

impl DualGraph {
    pub fn boundary_vertices(&self) -> std::ops::Range<usize> {
        self.interior..self.vertex_count
    }
}

pub fn dual_domain(region: &Region) -> DualGraph {
    DualGraph {
        vertex_count: region.dual_vertex_count(),
        interior: region.face_count(),
        ends: region.edges().iter().map(|e| e.sides).collect(),
    }
}
