//! The quotient graph `G_D(ω)`, the loop/face association, the site
//! process `ζ` and its Bernoulli domination, and neighbourhood diagnostics.

use std::collections::{BTreeMap, VecDeque};

use fixedbitset::FixedBitSet;
use rand::Rng;

use crate::coupling::{find_defect_free_circuit, CoherentTriple};
use crate::error::{Error, Result};
use crate::hexlattice::{FaceCoord, Region};
use crate::loopcore::{decompose, Loop, LoopConfig};
use crate::sampler::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuxVertex {
    Loop(usize),
    FreeEdge(usize),
    Face(usize),
}

impl AuxVertex {
    pub fn tag(self) -> char {
        match self {
            AuxVertex::Loop(_) => 'L',
            AuxVertex::FreeEdge(_) => 'E',
            AuxVertex::Face(_) => 'F',
        }
    }
}

/// `G_D(ω)` with `D` the whole region. Vertex ids: loops first, then free
/// edges, then faces.
#[derive(Clone, Debug)]
pub struct AuxGraph {
    pub vertices: Vec<AuxVertex>,
    pub adj: Vec<Vec<usize>>,
    pub boundary: FixedBitSet,
    pub loops: Vec<Loop>,
    edge_vertex: Vec<usize>,
    face_offset: usize,
}

/// Builds the quotient graph. Rule (E1) links a face with each edge it
/// borders, rule (E2) links edges sharing an endpoint; loop edges are
/// contracted and multi-edges and self-loops dropped.
pub fn build_aux_graph(region: &Region, omega: &LoopConfig) -> Result<AuxGraph> {
    if region.is_torus() {
        return Err(Error::TorusUnsupported);
    }
    let loops = decompose(region, omega);
    let ne = region.edge_count();
    let nf = region.face_count();
    let mut vertices: Vec<AuxVertex> = (0..loops.len()).map(AuxVertex::Loop).collect();
    let mut edge_vertex = vec![usize::MAX; ne];
    for (i, l) in loops.iter().enumerate() {
        for &e in &l.edges {
            edge_vertex[e] = i;
        }
    }
    for e in 0..ne {
        if edge_vertex[e] == usize::MAX {
            edge_vertex[e] = vertices.len();
            vertices.push(AuxVertex::FreeEdge(e));
        }
    }
    let face_offset = vertices.len();
    vertices.extend((0..nf).map(AuxVertex::Face));
    let nv = vertices.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut link = |a: usize, b: usize| {
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    };
    for f in 0..nf {
        for &e in region.edges_of_face(f)? {
            link(face_offset + f, edge_vertex[e]);
        }
    }
    for v in 0..region.vertex_count() {
        let es = region.edges_of_vertex(v)?;
        for i in 0..es.len() {
            for j in i + 1..es.len() {
                link(edge_vertex[es[i]], edge_vertex[es[j]]);
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let mut boundary = FixedBitSet::with_capacity(nv);
    for &e in region.boundary_edges() {
        boundary.insert(edge_vertex[e]);
    }
    Ok(AuxGraph { vertices, adj, boundary, loops, edge_vertex, face_offset })
}

impl AuxGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }

    /// `π_ω(e)`.
    pub fn pi_edge(&self, e: usize) -> usize {
        self.edge_vertex[e]
    }

    /// `π_ω(f)`.
    pub fn pi_face(&self, f: usize) -> usize {
        self.face_offset + f
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary.contains(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn bfs_distances(&self, from: usize) -> Vec<u32> {
        let mut d = vec![u32::MAX; self.len()];
        d[from] = 0;
        let mut q = VecDeque::from([from]);
        while let Some(u) = q.pop_front() {
            for &w in &self.adj[u] {
                if d[w] == u32::MAX {
                    d[w] = d[u] + 1;
                    q.push_back(w);
                }
            }
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.bfs_distances(0).iter().all(|&d| d != u32::MAX)
    }

    /// Distance from `v` to the nearest boundary vertex.
    pub fn boundary_distance(&self, v: usize) -> u32 {
        let d = self.bfs_distances(v);
        self.boundary.ones().map(|b| d[b]).min().unwrap_or(u32::MAX)
    }

    /// Plain adjacency-list export: a header line, then one line per vertex
    /// `id tag source boundary: neighbours`.
    pub fn to_text(&self) -> String {
        let mut s = format!("auxgraph v1\nvertices {}\n", self.len());
        for (v, kind) in self.vertices.iter().enumerate() {
            let src = match kind {
                AuxVertex::Loop(i) => *i,
                AuxVertex::FreeEdge(e) => *e,
                AuxVertex::Face(f) => *f,
            };
            let nb: Vec<String> = self.adj[v].iter().map(|w| w.to_string()).collect();
            s.push_str(&format!("{v} {} {src} {}: {}\n", kind.tag(), self.is_boundary(v) as u8, nb.join(" ")));
        }
        s
    }
}

/// `I(ℓ)` for every loop, as face-vertex ids, together with the peeling order.
#[derive(Clone, Debug, Default)]
pub struct Association {
    pub faces: Vec<Vec<usize>>,
    pub order: Vec<usize>,
}

/// Peels the loop-adjacency graph (loops bordering a common face), always
/// removing a remaining loop of minimal degree with the smallest id, and
/// assigns to it the witness faces of its remaining links. The witness of a
/// link is the smallest face both loops border.
pub fn associate(g: &AuxGraph) -> Result<Association> {
    let nl = g.loop_count();
    let mut links: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); nl];
    for v in g.face_offset..g.len() {
        let ls: Vec<usize> = g.adj[v].iter().copied().filter(|&w| w < nl).collect();
        for i in 0..ls.len() {
            for j in i + 1..ls.len() {
                links[ls[i]].entry(ls[j]).or_insert(v);
                links[ls[j]].entry(ls[i]).or_insert(v);
            }
        }
    }
    let mut alive = vec![true; nl];
    let mut deg: Vec<usize> = links.iter().map(BTreeMap::len).collect();
    let mut faces = vec![Vec::new(); nl];
    let mut order = Vec::with_capacity(nl);
    for _ in 0..nl {
        let l = (0..nl).filter(|&l| alive[l]).min_by_key(|&l| (deg[l], l)).unwrap();
        if deg[l] > 5 {
            return Err(Error::PeelingFailed);
        }
        let mut fs: Vec<usize> = Vec::new();
        for (&m, &f) in &links[l] {
            if alive[m] {
                fs.push(f);
                deg[m] -= 1;
            }
        }
        fs.sort_unstable();
        fs.dedup();
        faces[l] = fs;
        alive[l] = false;
        order.push(l);
    }
    Ok(Association { faces, order })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AssociationViolations {
    pub p1: usize,
    pub p2: usize,
    pub p3: usize,
}

impl AssociationViolations {
    pub fn total(&self) -> usize {
        self.p1 + self.p2 + self.p3
    }
}

/// Direct check of (P1) faces only and neighbours, (P2) at most five, and
/// (P3) every pair of loops at distance 2 has a common neighbouring face in
/// `I(ℓ₁) ∪ I(ℓ₂)`.
pub fn check_association(g: &AuxGraph, a: &Association) -> AssociationViolations {
    let nl = g.loop_count();
    let mut v = AssociationViolations::default();
    for l in 0..nl {
        let i = &a.faces[l];
        if i.iter().any(|&f| !matches!(g.vertices[f], AuxVertex::Face(_)) || g.adj[l].binary_search(&f).is_err()) {
            v.p1 += 1;
        }
        if i.len() > 5 {
            v.p2 += 1;
        }
    }
    for l1 in 0..nl {
        let d = g.bfs_distances(l1);
        for l2 in l1 + 1..nl {
            if d[l2] != 2 {
                continue;
            }
            let ok = a.faces[l1]
                .iter()
                .chain(&a.faces[l2])
                .any(|&f| g.adj[l1].binary_search(&f).is_ok() && g.adj[l2].binary_search(&f).is_ok());
            if !ok {
                v.p3 += 1;
            }
        }
    }
    v
}

/// One bit per vertex of an [`AuxGraph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteConfig {
    pub open: FixedBitSet,
}

impl SiteConfig {
    pub fn closed(g: &AuxGraph) -> Self {
        SiteConfig { open: FixedBitSet::with_capacity(g.len()) }
    }

    pub fn is_open(&self, v: usize) -> bool {
        self.open.contains(v)
    }

    pub fn open_count(&self) -> usize {
        self.open.count_ones(..)
    }

    /// Pointwise `self ≤ other`.
    pub fn is_below(&self, other: &SiteConfig) -> bool {
        self.open.is_subset(&other.open)
    }
}

fn check_zeta_params(p: &ModelParams<f64>) -> Result<()> {
    if !(p.n >= 1.0 && p.x > 0.0 && p.x <= 1.0) {
        return Err(Error::Parameter(format!("site process needs n >= 1 and 0 < x <= 1, got n={} x={}", p.n, p.x)));
    }
    Ok(())
}

/// Derives face bits from loop and edge bits: a face is open iff a free
/// edge bordering it is open or it lies in `I(ℓ)` of an open loop.
pub fn derive_faces(g: &AuxGraph, a: &Association, sites: &mut SiteConfig) {
    for v in g.face_offset..g.len() {
        sites.open.set(v, false);
    }
    for v in g.face_offset..g.len() {
        if g.adj[v].iter().any(|&w| matches!(g.vertices[w], AuxVertex::FreeEdge(_)) && sites.open.contains(w)) {
            sites.open.insert(v);
        }
    }
    for l in 0..g.loop_count() {
        if sites.open.contains(l) {
            for &f in &a.faces[l] {
                sites.open.insert(f);
            }
        }
    }
}

/// `ζ`: loops open with probability `(n−1)/n`, free edges with `1 − x`,
/// faces derived.
pub fn sample_zeta<R: Rng>(g: &AuxGraph, a: &Association, p: &ModelParams<f64>, rng: &mut R) -> Result<SiteConfig> {
    check_zeta_params(p)?;
    let pl = (p.n - 1.0) / p.n;
    let pe = 1.0 - p.x;
    let mut s = SiteConfig::closed(g);
    for v in 0..g.face_offset {
        let q = if v < g.loop_count() { pl } else { pe };
        if rng.gen::<f64>() < q {
            s.open.insert(v);
        }
    }
    derive_faces(g, a, &mut s);
    Ok(s)
}

/// `p_x = (1−x)^{1/3}`, `p_n = ((n−1)/n)^{1/6}` and `p(n,x) = 6 p_x + 3 p_n`.
pub fn domination_intensity(n: f64, x: f64) -> (f64, f64, f64) {
    let px = (1.0 - x).max(0.0).powf(1.0 / 3.0);
    let pn = ((n - 1.0) / n).max(0.0).powf(1.0 / 6.0);
    (px, pn, 6.0 * px + 3.0 * pn)
}

#[derive(Clone, Debug)]
pub struct DominationSample {
    pub zeta: SiteConfig,
    pub bernoulli: SiteConfig,
    /// `min(1, p(n,x))`.
    pub p: f64,
    pub clamped: bool,
}

/// Joint sample of `ζ` and an independent `Ber(p)` field with `ζ ≤ Ber`
/// pointwise. Each open free edge needs its own coin and those of its
/// bordering faces, each open loop needs its own coin and those of `I(ℓ)`;
/// missing sites (boundary edges, `|I(ℓ)| < 5`) are replaced by one
/// auxiliary coin of matching probability. A vertex of the Bernoulli field
/// is open when any of its coins fires, topped up to intensity exactly `p`.
pub fn domination_coupling<R: Rng>(
    g: &AuxGraph,
    a: &Association,
    p: &ModelParams<f64>,
    rng: &mut R,
) -> Result<DominationSample> {
    check_zeta_params(p)?;
    let (px, pn, total) = domination_intensity(p.n, p.x);
    let pt = total.min(1.0);
    let nv = g.len();
    let mut fired = FixedBitSet::with_capacity(nv);
    let mut coins_x = vec![0i32; nv];
    let mut coins_n = vec![0i32; nv];
    let mut zeta = SiteConfig::closed(g);
    for v in g.loop_count()..g.face_offset {
        let sites: Vec<usize> = std::iter::once(v).chain(g.adj[v].iter().copied().filter(|&w| w >= g.face_offset)).collect();
        let mut all = true;
        for &s in &sites {
            coins_x[s] += 1;
            if rng.gen::<f64>() < px {
                fired.insert(s);
            } else {
                all = false;
            }
        }
        let missing = 3 - sites.len() as i32;
        if missing > 0 && rng.gen::<f64>() >= px.powi(missing) {
            all = false;
        }
        if all {
            zeta.open.insert(v);
        }
    }
    for l in 0..g.loop_count() {
        let sites: Vec<usize> = std::iter::once(l).chain(a.faces[l].iter().copied()).collect();
        let mut all = true;
        for &s in &sites {
            coins_n[s] += 1;
            if rng.gen::<f64>() < pn {
                fired.insert(s);
            } else {
                all = false;
            }
        }
        let missing = 6 - sites.len() as i32;
        if missing > 0 && rng.gen::<f64>() >= pn.powi(missing) {
            all = false;
        }
        if all {
            zeta.open.insert(l);
        }
    }
    derive_faces(g, a, &mut zeta);
    let mut bernoulli = SiteConfig { open: fired };
    for v in 0..nv {
        if bernoulli.open.contains(v) {
            continue;
        }
        let q = 1.0 - (1.0 - px).powi(coins_x[v]) * (1.0 - pn).powi(coins_n[v]);
        if q >= 1.0 {
            continue;
        }
        let top = ((pt - q) / (1.0 - q)).max(0.0);
        if rng.gen::<f64>() < top {
            bernoulli.open.insert(v);
        }
    }
    Ok(DominationSample { zeta, bernoulli, p: pt, clamped: total > 1.0 })
}

/// Whether an open path joins an open vertex of `from` to an open vertex of `to`.
pub fn connectivity(g: &AuxGraph, sites: &SiteConfig, from: &[usize], to: &[usize]) -> bool {
    let mut target = FixedBitSet::with_capacity(g.len());
    for &t in to {
        target.insert(t);
    }
    let mut seen = FixedBitSet::with_capacity(g.len());
    let mut q = VecDeque::new();
    for &f in from {
        if sites.is_open(f) && !seen.put(f) {
            q.push_back(f);
        }
    }
    while let Some(u) = q.pop_front() {
        if target.contains(u) {
            return true;
        }
        for &w in &g.adj[u] {
            if sites.is_open(w) && !seen.put(w) {
                q.push_back(w);
            }
        }
    }
    false
}

#[derive(Clone, Debug, Default)]
pub struct PercolationBoundReport {
    pub trials: usize,
    /// Samples with `B_{2r+2}(π(f))` not joined to `B_R(π(f))ᶜ`.
    pub non_connection: usize,
    /// Samples with a defect-free circuit surrounding `Λ_r(f)` made of edges
    /// whose images lie in `B_R(π(f))`.
    pub circuits: usize,
    /// Non-connection samples without any defect-free circuit surrounding `Λ_r(f)`.
    pub implication_failures: usize,
    /// Non-connection samples whose circuits all leave `B_R(π(f))`.
    pub outside_ball_r: usize,
    /// Non-connection samples whose circuits all leave `B_{R+1}(π(f))`.
    pub outside_ball_r_plus_one: usize,
}

/// Per-sample check of the percolation bound: `ζ` drawn under the coupling,
/// blue loops and defect edges read off `ζ`, and a defect-free circuit
/// searched for whenever the non-connection event holds. The closed outer
/// boundary of a cluster confined to `B_R` can sit at distance `R + 1` and
/// bypassing face vertices moves it further, so circuits are looked for in
/// `B_R`, then `B_{R+1}`, then anywhere.
#[allow(clippy::too_many_arguments)]
pub fn percolation_bound_check<R: Rng>(
    region: &Region,
    omega: &LoopConfig,
    p: &ModelParams<f64>,
    f: FaceCoord,
    r: u32,
    big_r: u32,
    trials: usize,
    rng: &mut R,
) -> Result<PercolationBoundReport> {
    let g = build_aux_graph(region, omega)?;
    let assoc = associate(&g)?;
    let fid = region.face_id(f)?;
    let root = g.pi_face(fid);
    if big_r < 2 * r + 2 {
        return Err(Error::Parameter(format!("need R >= 2r+2, got r={r} R={big_r}")));
    }
    if g.boundary_distance(root) <= big_r {
        return Err(Error::Parameter(format!(
            "distance from the root to the boundary is {} <= R = {big_r}",
            g.boundary_distance(root)
        )));
    }
    let dist = g.bfs_distances(root);
    let inner: Vec<usize> = (0..g.len()).filter(|&v| dist[v] <= 2 * r + 2).collect();
    let outer: Vec<usize> = (0..g.len()).filter(|&v| dist[v] > big_r).collect();
    let protect = region.ball_faces(f, r);
    let far = |radius: u32| {
        let mut s = region.empty_edge_set();
        for e in 0..region.edge_count() {
            if dist[g.pi_edge(e)] > radius {
                s.insert(e);
            }
        }
        s
    };
    let (far_r, far_r1) = (far(big_r), far(big_r + 1));
    let mut rep = PercolationBoundReport::default();
    for _ in 0..trials {
        let sample = domination_coupling(&g, &assoc, p, rng)?;
        let zeta = &sample.zeta;
        let mut blue = region.empty_edge_set();
        let mut red = region.empty_edge_set();
        for (i, l) in g.loops.iter().enumerate() {
            let target = if zeta.is_open(i) { &mut blue } else { &mut red };
            for &e in &l.edges {
                target.insert(e);
            }
        }
        let mut eta = region.empty_edge_set();
        for e in 0..region.edge_count() {
            let v = g.pi_edge(e);
            if v >= g.loop_count() && zeta.is_open(v) {
                eta.insert(e);
            }
        }
        let triple = CoherentTriple::new(LoopConfig::from_edges(region, red)?, LoopConfig::from_edges(region, blue)?, eta)?;
        let mut blocked = triple.blocked();
        blocked.union_with(&far_r);
        let found = find_defect_free_circuit(region, &blocked, &protect, None)?.is_some();
        let separated = !connectivity(&g, zeta, &inner, &outer);
        rep.trials += 1;
        rep.circuits += found as usize;
        if separated {
            rep.non_connection += 1;
            if !found {
                rep.outside_ball_r += 1;
                let within = |extra: &FixedBitSet| {
                    let mut b = triple.blocked();
                    b.union_with(extra);
                    find_defect_free_circuit(region, &b, &protect, None).map(|c| c.is_some())
                };
                if !within(&far_r1)? {
                    rep.outside_ball_r_plus_one += 1;
                    if !within(&region.empty_edge_set())? {
                        rep.implication_failures += 1;
                    }
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct DegreeReport {
    pub histogram: BTreeMap<usize, usize>,
    /// `r ↦ Σ_v deg(v) 1[deg(v) ≥ r] / |V|` for `r` in `1..=max_r`.
    pub truncated: Vec<(usize, f64)>,
    /// Loop vertices with `deg(ℓ) > 4 |ℓ ∩ D|`.
    pub loop_bound_violations: usize,
    /// Non-loop vertices of degree above 6.
    pub other_bound_violations: usize,
}

pub fn degree_diagnostics(g: &AuxGraph, max_r: usize) -> DegreeReport {
    let mut histogram = BTreeMap::new();
    for v in 0..g.len() {
        *histogram.entry(g.degree(v)).or_insert(0) += 1;
    }
    let nv = g.len().max(1) as f64;
    let truncated = (1..=max_r)
        .map(|r| {
            let s: usize = (0..g.len()).map(|v| g.degree(v)).filter(|&d| d >= r).sum();
            (r, s as f64 / nv)
        })
        .collect();
    let loop_bound_violations = (0..g.loop_count()).filter(|&l| g.degree(l) > 4 * g.loops[l].len()).count();
    let other_bound_violations = (g.loop_count()..g.len()).filter(|&v| g.degree(v) > 6).count();
    DegreeReport { histogram, truncated, loop_bound_violations, other_bound_violations }
}

pub const MAX_CENSUS_RADIUS: u32 = 4;

/// Canonical forms of all rooted `radius`-balls, with multiplicities.
pub fn rooted_ball_census(g: &AuxGraph, radius: u32) -> Result<BTreeMap<String, usize>> {
    if radius > MAX_CENSUS_RADIUS {
        return Err(Error::Parameter(format!("census radius {radius} exceeds {MAX_CENSUS_RADIUS}")));
    }
    let mut out = BTreeMap::new();
    for v in 0..g.len() {
        *out.entry(rooted_ball_form(g, v, radius)).or_insert(0) += 1;
    }
    Ok(out)
}

/// Census frequencies, summing to 1.
pub fn census_frequencies(census: &BTreeMap<String, usize>) -> BTreeMap<String, f64> {
    let total: usize = census.values().sum();
    census.iter().map(|(k, &c)| (k.clone(), c as f64 / total.max(1) as f64)).collect()
}

/// Canonical form of the induced ball of radius `radius` around `root`.
pub fn rooted_ball_form(g: &AuxGraph, root: usize, radius: u32) -> String {
    let d = g.bfs_distances(root);
    let ball: Vec<usize> = (0..g.len()).filter(|&v| d[v] <= radius).collect();
    let index: BTreeMap<usize, usize> = ball.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = ball
        .iter()
        .map(|&v| g.adj[v].iter().filter_map(|w| index.get(w).copied()).collect())
        .collect();
    let colours: Vec<u32> = ball.iter().map(|&v| d[v]).collect();
    canonical_form(&adj, &colours)
}

/// Canonical string of a vertex-coloured graph by colour refinement and
/// individualisation, taking the least adjacency string over all branches.
pub fn canonical_form(adj: &[Vec<usize>], colours: &[u32]) -> String {
    let n = adj.len();
    let init = refine(adj, colours.to_vec());
    let mut best: Option<Vec<u8>> = None;
    search(adj, init, &mut best);
    let bits = best.unwrap_or_default();
    let mut s = format!("{n}:");
    for c in colours_sorted(colours) {
        s.push_str(&format!("{c},"));
    }
    s.push(':');
    s.push_str(&hex::encode(bits));
    s
}

fn colours_sorted(c: &[u32]) -> Vec<u32> {
    let mut v = c.to_vec();
    v.sort_unstable();
    v
}

fn refine(adj: &[Vec<usize>], mut colour: Vec<u32>) -> Vec<u32> {
    let n = adj.len();
    let mut classes = usize::MAX;
    loop {
        let sigs: Vec<(u32, Vec<u32>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<u32> = adj[v].iter().map(|&w| colour[w]).collect();
                nb.sort_unstable();
                (colour[v], nb)
            })
            .collect();
        let mut sorted: Vec<&(u32, Vec<u32>)> = sigs.iter().collect();
        sorted.sort();
        sorted.dedup();
        let next: Vec<u32> = sigs.iter().map(|s| sorted.binary_search(&s).unwrap() as u32).collect();
        colour = next;
        if sorted.len() == classes {
            return colour;
        }
        classes = sorted.len();
    }
}

fn search(adj: &[Vec<usize>], colour: Vec<u32>, best: &mut Option<Vec<u8>>) {
    let n = adj.len();
    let mut count = vec![0usize; n];
    for &c in &colour {
        count[c as usize] += 1;
    }
    let cell = (0..n as u32).find(|&c| count[c as usize] > 1);
    let Some(cell) = cell else {
        let mut pos = vec![0usize; n];
        for (v, &c) in colour.iter().enumerate() {
            pos[c as usize] = v;
        }
        let mut bits = vec![0u8; (n * n.saturating_sub(1) / 2).div_ceil(8)];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if adj[pos[i]].contains(&pos[j]) {
                    bits[k / 8] |= 1 << (k % 8);
                }
                k += 1;
            }
        }
        if best.as_ref().is_none_or(|b| bits < *b) {
            *best = Some(bits);
        }
        return;
    };
    let members: Vec<usize> = (0..n).filter(|&v| colour[v] == cell).collect();
    for (i, &v) in members.iter().enumerate() {
        // swapping twins is an automorphism fixing the colouring
        if members[..i].iter().any(|&u| twins(adj, u, v)) {
            continue;
        }
        // split v off ahead of its cell
        let c: Vec<u32> = colour
            .iter()
            .enumerate()
            .map(|(w, &x)| 2 * x + u32::from(!(w == v || x != cell)))
            .collect();
        search(adj, refine(adj, c), best);
    }
}

fn twins(adj: &[Vec<usize>], u: usize, v: usize) -> bool {
    let a: Vec<usize> = adj[u].iter().copied().filter(|&w| w != v).collect();
    let b: Vec<usize> = adj[v].iter().copied().filter(|&w| w != u).collect();
    let (mut a, mut b) = (a, b);
    a.sort_unstable();
    b.sort_unstable();
    a == b
}
