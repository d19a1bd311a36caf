//! Brute-force oracles shared by the integration tests. None of them call
//! the library routine they are used to check.

#![allow(dead_code)]

use fixedbitset::FixedBitSet;
use loopon::hexlattice::DIRS;
use loopon::{FaceCoord, Loop, LoopConfig, Region};
use rand::Rng;

/// All edge subsets with even degree at every vertex (small regions only).
pub fn brute_even_subsets(region: &Region) -> Vec<FixedBitSet> {
    let ne = region.edge_count();
    assert!(ne <= 22, "too many edges for brute force");
    let mut out = Vec::new();
    for m in 0u64..(1u64 << ne) {
        let mut deg = vec![0u8; region.vertex_count()];
        for e in 0..ne {
            if m >> e & 1 == 1 {
                for v in region.edge(e).ends {
                    deg[v] ^= 1;
                }
            }
        }
        if deg.iter().all(|&d| d == 0) {
            out.push(bits(ne, (0..ne).filter(|&e| m >> e & 1 == 1)));
        }
    }
    out
}

pub fn bits(len: usize, ones: impl IntoIterator<Item = usize>) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(len);
    for i in ones {
        s.insert(i);
    }
    s
}

/// Connected components (with at least one edge) of an edge set, by a
/// hand-rolled union-find over vertices.
pub fn uf_components(region: &Region, set: &FixedBitSet) -> usize {
    let n = region.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut touched = vec![false; n];
    for e in set.ones() {
        let [a, b] = region.edge(e).ends;
        touched[a] = true;
        touched[b] = true;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    (0..n).filter(|&v| touched[v] && find(&mut parent, v) == v).count()
}

/// Whether `set` lies in the GF(2) span of the face boundaries.
pub fn in_face_span(region: &Region, set: &FixedBitSet) -> bool {
    let ne = region.edge_count();
    let mut basis: Vec<Vec<u8>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let to_vec = |s: &FixedBitSet| (0..ne).map(|e| s.contains(e) as u8).collect::<Vec<u8>>();
    let reduce = |v: &mut Vec<u8>, basis: &Vec<Vec<u8>>, pivots: &Vec<usize>| {
        for (b, &p) in basis.iter().zip(pivots) {
            if v[p] == 1 {
                for i in 0..ne {
                    v[i] ^= b[i];
                }
            }
        }
    };
    for f in 0..region.face_count() {
        let mut v = to_vec(&region.face_boundary(f));
        reduce(&mut v, &basis, &pivots);
        if let Some(p) = v.iter().position(|&x| x == 1) {
            // keep the basis fully reduced on pivots
            for b in basis.iter_mut() {
                if b[p] == 1 {
                    for i in 0..ne {
                        b[i] ^= v[i];
                    }
                }
            }
            basis.push(v);
            pivots.push(p);
        }
    }
    let mut v = to_vec(set);
    reduce(&mut v, &basis, &pivots);
    v.iter().all(|&x| x == 0)
}

fn edge_midpoint(region: &Region, e: usize) -> (f64, f64) {
    let [a, b] = region.edge(e).key.faces();
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    ((ax + bx) / 2.0, (ay + by) / 2.0)
}

/// Loop diameter from Euclidean edge midpoints: the largest spread along
/// the three normals of the lattice directions, in units of row spacing.
pub fn euclid_diameter(region: &Region, l: &Loop) -> u32 {
    let pts: Vec<(f64, f64)> = l.edges.iter().map(|&e| edge_midpoint(region, e)).collect();
    let row = 3f64.sqrt() / 2.0;
    let mut best: f64 = 0.0;
    for i in 0..3 {
        let ang = std::f64::consts::PI / 2.0 + i as f64 * std::f64::consts::PI / 3.0;
        let (nx, ny) = (ang.cos(), ang.sin());
        let proj: Vec<f64> = pts.iter().map(|(x, y)| x * nx + y * ny).collect();
        let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        best = best.max((hi - lo) / row);
    }
    (best + 1e-9).floor() as u32
}

/// Even-odd point-in-polygon test of a face centre against the polygon
/// through the loop's vertex positions.
pub fn polygon_contains(region: &Region, l: &Loop, f: FaceCoord) -> bool {
    let poly: Vec<(f64, f64)> = l.vertices.iter().map(|&v| region.vertices()[v].position()).collect();
    // nudge off lattice symmetry lines
    let (px, py) = f.center();
    let (px, py) = (px + 1e-7, py + 3e-7);
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (x1, y1) = poly[i];
        let (x2, y2) = poly[(i + 1) % n];
        if (y1 > py) != (y2 > py) {
            let x = x1 + (py - y1) * (x2 - x1) / (y2 - y1);
            if x > px {
                inside = !inside;
            }
        }
    }
    inside
}

/// Uniform element of the cycle space of a domain: XOR of random face boundaries.
pub fn random_config<R: Rng>(region: &Region, rng: &mut R) -> LoopConfig {
    let mut s = region.empty_edge_set();
    for f in 0..region.face_count() {
        if rng.gen::<bool>() {
            s.symmetric_difference_with(&region.face_boundary(f));
        }
    }
    LoopConfig::from_edges(region, s).unwrap()
}

/// Random configuration with sparser loops: XOR of boundaries of a random
/// face subset where each face is picked with probability `p`.
pub fn random_config_p<R: Rng>(region: &Region, p: f64, rng: &mut R) -> LoopConfig {
    let mut s = region.empty_edge_set();
    for f in 0..region.face_count() {
        if rng.gen::<f64>() < p {
            s.symmetric_difference_with(&region.face_boundary(f));
        }
    }
    LoopConfig::from_edges(region, s).unwrap()
}

/// Triangular-lattice BFS distance between faces on the infinite lattice.
pub fn bfs_face_distance(a: FaceCoord, b: FaceCoord) -> u32 {
    use std::collections::{HashSet, VecDeque};
    let mut seen = HashSet::from([a]);
    let mut q = VecDeque::from([(a, 0u32)]);
    while let Some((f, d)) = q.pop_front() {
        if f == b {
            return d;
        }
        for (dk, dl) in DIRS {
            let g = FaceCoord::new(f.k + dk, f.l + dl);
            if seen.insert(g) {
                q.push_back((g, d + 1));
            }
        }
    }
    unreachable!()
}

pub fn hexagon() -> Region {
    Region::ball(FaceCoord::ORIGIN, 0)
}
