//! Loop configurations: even edge sets, their cycle decomposition, XOR,
//! diameters, surrounding tests, homology classes and the spin/domain-wall
//! correspondence.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::hexlattice::{FaceCoord, Region};

/// An even subgraph of a region, stored as a bit set over edge ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LoopConfig {
    edges: FixedBitSet,
}

/// Fails with the first odd-degree vertex, if any.
pub fn check_even(region: &Region, set: &FixedBitSet) -> Result<()> {
    for v in 0..region.vertex_count() {
        let d = region.vertex_edges_raw(v).iter().filter(|&&e| set.contains(e)).count();
        if d % 2 == 1 {
            return Err(Error::NotEven(v));
        }
    }
    Ok(())
}

impl LoopConfig {
    pub fn empty(region: &Region) -> Self {
        LoopConfig { edges: region.empty_edge_set() }
    }

    pub fn from_edges(region: &Region, edges: FixedBitSet) -> Result<Self> {
        if edges.len() != region.edge_count() {
            return Err(Error::OutOfRegion("edge set size does not match region".into()));
        }
        check_even(region, &edges)?;
        Ok(LoopConfig { edges })
    }

    pub fn from_edge_ids(region: &Region, ids: &[usize]) -> Result<Self> {
        let mut s = region.empty_edge_set();
        for &e in ids {
            if e >= region.edge_count() {
                return Err(Error::OutOfRegion(format!("edge id {e}")));
            }
            s.toggle(e);
        }
        LoopConfig::from_edges(region, s)
    }

    /// Wraps a set already known to be even.
    pub(crate) fn from_even_unchecked(edges: FixedBitSet) -> Self {
        LoopConfig { edges }
    }

    pub fn edges(&self) -> &FixedBitSet {
        &self.edges
    }

    pub fn into_edges(self) -> FixedBitSet {
        self.edges
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.contains(e)
    }

    /// Number of edges `|ω|`.
    pub fn edge_count(&self) -> usize {
        self.edges.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_clear()
    }

    /// `ω ⊕ Γ`; `Γ` must be even.
    pub fn xor(&self, region: &Region, gamma: &FixedBitSet) -> Result<LoopConfig> {
        check_even(region, gamma)?;
        let mut edges = self.edges.clone();
        edges.symmetric_difference_with(gamma);
        Ok(LoopConfig { edges })
    }

    /// XOR of two configurations, which is always even.
    pub fn xor_config(&self, other: &LoopConfig) -> LoopConfig {
        let mut edges = self.edges.clone();
        edges.symmetric_difference_with(&other.edges);
        LoopConfig { edges }
    }

    pub(crate) fn toggle_all(&mut self, gamma: &FixedBitSet) {
        self.edges.symmetric_difference_with(gamma);
    }

    /// Number of loops `ℓ(ω)`.
    pub fn loop_count(&self, region: &Region) -> usize {
        count_loops(region, &self.edges, None)
    }

    pub fn loops(&self, region: &Region) -> Vec<Loop> {
        decompose(region, self)
    }
}

/// A simple cycle: `vertices[i]` and `vertices[i+1]` (cyclically) are joined
/// by `edges[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub edges: Vec<usize>,
    pub vertices: Vec<usize>,
}

impl Loop {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn min_edge(&self) -> usize {
        *self.edges.iter().min().expect("loops are nonempty")
    }

    pub fn edge_set(&self, region: &Region) -> FixedBitSet {
        let mut s = region.empty_edge_set();
        for &e in &self.edges {
            s.insert(e);
        }
        s
    }

    /// Dual-vertex ids of the faces on either side of the loop's edges.
    pub fn bordered_faces(&self, region: &Region) -> Vec<usize> {
        let mut out: Vec<usize> = self.edges.iter().flat_map(|&e| region.edge(e).sides).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn borders_face(&self, region: &Region, face: usize) -> bool {
        self.edges.iter().any(|&e| region.edge(e).sides.contains(&face))
    }

    /// Diameter in the triangular-lattice metric, measured between edge
    /// midpoints and rounded down. A hexagon has diameter 1 and the boundary
    /// of `Λ_k` has diameter `2k+1`. Domains only.
    pub fn diameter(&self, region: &Region) -> Result<u32> {
        if region.is_torus() {
            return Err(Error::TorusUnsupported);
        }
        Ok(midpoint_spread(self.edges.iter().map(|&e| region.edge(e).key.doubled_midpoint())) / 2)
    }

    /// Net signed crossings of the two torus cut lines.
    pub fn homology_class(&self, region: &Region) -> Result<(i64, i64)> {
        let t = region.torus_data_ref().ok_or(Error::InvalidRegion("not a torus".into()))?;
        let mut a = 0i64;
        let mut b = 0i64;
        let n = self.edges.len();
        for i in 0..n {
            let e = self.edges[i];
            let to = self.vertices[(i + 1) % n];
            let dir = if t.up_end[e] == to { 1 } else { -1 };
            a += dir * t.cut_sign_a[e] as i64;
            b += dir * t.cut_sign_b[e] as i64;
        }
        Ok((a, b))
    }

    pub fn is_contractible(&self, region: &Region) -> Result<bool> {
        Ok(self.homology_class(region)? == (0, 0))
    }

    /// Whether the loop surrounds face `f` (domains only). Uses the parity of
    /// crossings along the horizontal ray from `f`.
    pub fn surrounds(&self, region: &Region, f: FaceCoord) -> Result<bool> {
        if region.is_torus() {
            return Err(Error::TorusUnsupported);
        }
        region.face_id(f)?;
        Ok(surrounds_unchecked(region, &self.edges, f))
    }
}

pub(crate) fn surrounds_unchecked(region: &Region, edges: &[usize], f: FaceCoord) -> bool {
    let mut parity = false;
    for &e in edges {
        let key = region.edge(e).key;
        if key.dir == 0 && key.base.l == f.l && key.base.k >= f.k {
            parity = !parity;
        }
    }
    parity
}

/// Doubled diameter of a set of doubled midpoints.
pub(crate) fn midpoint_spread(points: impl Iterator<Item = (i64, i64)>) -> u32 {
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for (a, b) in points {
        for (i, v) in [a, b, a + b].into_iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    (0..3).map(|i| (hi[i] - lo[i]).max(0)).max().unwrap_or(0) as u32
}

/// Splits `ω` into its loops, ordered by minimal edge id.
pub fn decompose(region: &Region, omega: &LoopConfig) -> Vec<Loop> {
    let set = omega.edges();
    let mut visited = FixedBitSet::with_capacity(region.edge_count());
    let mut out = Vec::new();
    for e0 in set.ones() {
        if visited.contains(e0) {
            continue;
        }
        out.push(trace(region, set, e0, &mut visited));
    }
    out
}

fn trace(region: &Region, set: &FixedBitSet, e0: usize, visited: &mut FixedBitSet) -> Loop {
    let [start, mut cur] = region.edge(e0).ends;
    let mut edges = vec![e0];
    let mut vertices = vec![start];
    visited.insert(e0);
    let mut last = e0;
    while cur != start {
        vertices.push(cur);
        let next = region
            .vertex_edges_raw(cur)
            .iter()
            .copied()
            .find(|&e| e != last && set.contains(e))
            .expect("even configuration");
        visited.insert(next);
        edges.push(next);
        cur = region.other_end(next, cur);
        last = next;
    }
    Loop { edges, vertices }
}

/// Loop count, optionally restricted to loops with an edge in `within`.
pub fn count_loops(region: &Region, set: &FixedBitSet, within: Option<&FixedBitSet>) -> usize {
    let mut visited = FixedBitSet::with_capacity(region.edge_count());
    let mut count = 0;
    for e0 in set.ones() {
        if visited.contains(e0) {
            continue;
        }
        let l = trace(region, set, e0, &mut visited);
        if within.map_or(true, |w| l.edges.iter().any(|&e| w.contains(e))) {
            count += 1;
        }
    }
    count
}

/// Counts loops through a vertex set without touching the rest of the
/// configuration. Reuses a stamp buffer across calls.
#[derive(Clone, Debug)]
pub struct LoopTracer {
    stamp: Vec<u32>,
    gen: u32,
}

impl LoopTracer {
    pub fn new(region: &Region) -> Self {
        LoopTracer { stamp: vec![0; region.vertex_count()], gen: 0 }
    }

    pub fn loops_through(&mut self, region: &Region, set: &FixedBitSet, vertices: &[usize]) -> usize {
        self.gen = self.gen.wrapping_add(1);
        if self.gen == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.gen = 1;
        }
        let mut count = 0;
        for &v in vertices {
            if self.stamp[v] == self.gen {
                continue;
            }
            let first = region.vertex_edges_raw(v).iter().copied().find(|&e| set.contains(e));
            let Some(e0) = first else { continue };
            count += 1;
            self.stamp[v] = self.gen;
            let mut last = e0;
            let mut cur = region.other_end(e0, v);
            while cur != v {
                self.stamp[cur] = self.gen;
                let next = region
                    .vertex_edges_raw(cur)
                    .iter()
                    .copied()
                    .find(|&e| e != last && set.contains(e))
                    .expect("even configuration");
                cur = region.other_end(next, cur);
                last = next;
            }
        }
        count
    }
}

/// Faces (by id) lying inside the closed edge set `edges` on a domain,
/// found by a dual BFS from the outer faces that never crosses `edges`.
pub fn interior_faces(region: &Region, edges: &FixedBitSet) -> Result<Vec<bool>> {
    if region.is_torus() {
        return Err(Error::TorusUnsupported);
    }
    let nf = region.face_count();
    let nd = region.dual_vertex_count();
    let mut outside = vec![false; nd];
    let mut q: VecDeque<usize> = (nf..nd).collect();
    for v in nf..nd {
        outside[v] = true;
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nd];
    for (id, e) in region.edges().iter().enumerate() {
        adj[e.sides[0]].push((e.sides[1], id));
        adj[e.sides[1]].push((e.sides[0], id));
    }
    while let Some(u) = q.pop_front() {
        for &(w, e) in &adj[u] {
            if !edges.contains(e) && !outside[w] {
                outside[w] = true;
                q.push_back(w);
            }
        }
    }
    Ok((0..nf).map(|f| !outside[f]).collect())
}

/// Spins on the dual vertices of a region: region faces first, then the
/// outer faces of a domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    pub spins: Vec<i8>,
}

impl SpinConfig {
    pub fn constant(region: &Region, s: i8) -> Self {
        SpinConfig { spins: vec![s; region.dual_vertex_count()] }
    }

    pub fn negate(&self) -> SpinConfig {
        SpinConfig { spins: self.spins.iter().map(|s| -s).collect() }
    }
}

/// Edges separating faces of different spin, without an evenness check.
pub fn domain_walls_raw(region: &Region, sigma: &SpinConfig) -> Result<FixedBitSet> {
    if sigma.spins.len() != region.dual_vertex_count() {
        return Err(Error::BoundarySpins(format!(
            "expected {} spins, got {}",
            region.dual_vertex_count(),
            sigma.spins.len()
        )));
    }
    let mut s = region.empty_edge_set();
    for (id, e) in region.edges().iter().enumerate() {
        if sigma.spins[e.sides[0]] != sigma.spins[e.sides[1]] {
            s.insert(id);
        }
    }
    Ok(s)
}

/// The domain-wall map DW. On a domain the outer spins must be constant so
/// that the walls form an even subgraph of the region.
pub fn domain_walls(region: &Region, sigma: &SpinConfig) -> Result<LoopConfig> {
    let raw = domain_walls_raw(region, sigma)?;
    let nf = region.face_count();
    if sigma.spins[nf..].windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::BoundarySpins("outer spins are not constant".into()));
    }
    Ok(LoopConfig::from_even_unchecked(raw))
}

/// Spin representation of `ω`: outer faces (domain) or face 0 (torus) get
/// `anchor`, and the spin flips across every edge of `ω`.
pub fn spin_rep(region: &Region, omega: &LoopConfig, anchor: i8) -> Result<SpinConfig> {
    let nf = region.face_count();
    let nd = region.dual_vertex_count();
    let mut spins = vec![0i8; nd];
    let mut q = VecDeque::new();
    if region.is_torus() {
        spins[0] = anchor;
        q.push_back(0);
    } else {
        for v in nf..nd {
            spins[v] = anchor;
            q.push_back(v);
        }
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nd];
    for (id, e) in region.edges().iter().enumerate() {
        adj[e.sides[0]].push((e.sides[1], id));
        adj[e.sides[1]].push((e.sides[0], id));
    }
    while let Some(u) = q.pop_front() {
        for &(w, e) in &adj[u] {
            let want = if omega.contains(e) { -spins[u] } else { spins[u] };
            if spins[w] == 0 {
                spins[w] = want;
                q.push_back(w);
            } else if spins[w] != want {
                return Err(Error::NoSpinRepresentation);
            }
        }
    }
    Ok(SpinConfig { spins })
}
