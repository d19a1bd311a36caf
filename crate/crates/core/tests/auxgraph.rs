mod common;

use std::collections::BTreeSet;

use common::{hexagon, random_config, random_config_p};
use loopon::auxgraph::{
    associate, build_aux_graph, canonical_form, census_frequencies, check_association, connectivity,
    degree_diagnostics, derive_faces, domination_coupling, domination_intensity, percolation_bound_check,
    rooted_ball_census, sample_zeta, AuxVertex, SiteConfig, MAX_CENSUS_RADIUS,
};
use loopon::sampler::{seeded_rng, Ensemble};
use loopon::{face_distance, Error, FaceCoord, LoopConfig, ModelParams, Region};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn two_hexagons() -> (Region, LoopConfig) {
    let reg = Region::ball(FaceCoord::ORIGIN, 2);
    let a = reg.face_id(FaceCoord::ORIGIN).unwrap();
    let b = reg.face_id(FaceCoord::new(2, 0)).unwrap();
    let mut s = reg.face_boundary(a);
    s.symmetric_difference_with(&reg.face_boundary(b));
    let w = LoopConfig::from_edges(&reg, s).unwrap();
    (reg, w)
}

#[test]
fn hexagon_examples() {
    let reg = hexagon();
    let g = build_aux_graph(&reg, &LoopConfig::empty(&reg)).unwrap();
    assert_eq!(g.len(), 7);
    assert!(g.is_connected());
    assert_eq!(g.loop_count(), 0);
    assert_eq!(g.boundary.count_ones(..), 6);
    // 6 face-edge links and a 6-cycle of edges
    assert_eq!(g.edge_count(), 12);
    assert_eq!(g.degree(g.pi_face(0)), 6);

    let h = LoopConfig::from_edges(&reg, reg.face_boundary(0)).unwrap();
    let g = build_aux_graph(&reg, &h).unwrap();
    assert_eq!(g.len(), 2);
    assert_eq!(g.edge_count(), 1);
    assert_eq!(g.vertices, vec![AuxVertex::Loop(0), AuxVertex::Face(0)]);
    assert!(g.is_boundary(0) && !g.is_boundary(1));
    let t = Region::torus(2, 2).unwrap();
    assert!(matches!(build_aux_graph(&t, &LoopConfig::empty(&t)), Err(Error::TorusUnsupported)));
}

/// Adjacency rebuilt from the rules: face–edge if the face borders the
/// edge, edge–edge if they share an endpoint, then merged through loops.
fn oracle_adjacency(region: &Region, g: &loopon::auxgraph::AuxGraph) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    let mut add = |a: usize, b: usize| {
        if a != b {
            out.insert((a.min(b), a.max(b)));
        }
    };
    for (e, info) in region.edges().iter().enumerate() {
        for &s in &info.sides {
            if s < region.face_count() {
                add(g.pi_face(s), g.pi_edge(e));
            }
        }
        for e2 in 0..region.edge_count() {
            let o = region.edge(e2).ends;
            if e2 != e && (o.contains(&info.ends[0]) || o.contains(&info.ends[1])) {
                add(g.pi_edge(e), g.pi_edge(e2));
            }
        }
    }
    out
}

#[test]
fn graph_structure_on_random_configurations() {
    let mut rng = seeded_rng(20, 0);
    for r in 1..=3 {
        let reg = Region::ball(FaceCoord::ORIGIN, r);
        for _ in 0..10 {
            let w = random_config(&reg, &mut rng);
            let g = build_aux_graph(&reg, &w).unwrap();
            assert!(g.is_connected());
            assert!(g.len() <= 7 * reg.face_count());
            assert_eq!(g.loop_count(), w.loop_count(&reg));
            let mut got = BTreeSet::new();
            for v in 0..g.len() {
                for &u in &g.adj[v] {
                    assert!(g.adj[u].contains(&v));
                    got.insert((u.min(v), u.max(v)));
                }
            }
            assert_eq!(got, oracle_adjacency(&reg, &g));
            for &e in reg.boundary_edges() {
                assert!(g.is_boundary(g.pi_edge(e)));
            }
            for f in 0..reg.face_count() {
                assert!(!g.is_boundary(g.pi_face(f)));
            }
        }
    }
}

#[test]
fn distance_contract_on_ball_three() {
    let reg = Region::ball(FaceCoord::ORIGIN, 3);
    let mut rng = seeded_rng(21, 0);
    for p in [0.1, 0.3, 0.5] {
        for _ in 0..4 {
            let w = random_config_p(&reg, p, &mut rng);
            let g = build_aux_graph(&reg, &w).unwrap();
            for (i, &f) in reg.faces().iter().enumerate() {
                let d = g.bfs_distances(g.pi_face(i));
                for (j, &h) in reg.faces().iter().enumerate() {
                    let r = face_distance(f, h);
                    assert!(d[g.pi_face(j)] <= 2 * r + 1, "faces {f:?} {h:?}");
                }
            }
        }
    }
}

#[test]
fn association_examples_and_properties() {
    let reg = hexagon();
    let g = build_aux_graph(&reg, &LoopConfig::empty(&reg)).unwrap();
    let a = associate(&g).unwrap();
    assert!(a.faces.is_empty());
    let h = LoopConfig::from_edges(&reg, reg.face_boundary(0)).unwrap();
    let g = build_aux_graph(&reg, &h).unwrap();
    let a = associate(&g).unwrap();
    assert_eq!(a.faces, vec![Vec::<usize>::new()]);

    let (reg, w) = two_hexagons();
    let g = build_aux_graph(&reg, &w).unwrap();
    let a = associate(&g).unwrap();
    let shared = g.pi_face(reg.face_id(FaceCoord::new(1, 0)).unwrap());
    assert!(a.faces[0].contains(&shared) || a.faces[1].contains(&shared));
    assert_eq!(check_association(&g, &a).total(), 0);

    let mut rng = seeded_rng(22, 0);
    for r in 2..=4 {
        let reg = Region::ball(FaceCoord::ORIGIN, r);
        for p in [0.2, 0.5] {
            for _ in 0..8 {
                let w = random_config_p(&reg, p, &mut rng);
                let g = build_aux_graph(&reg, &w).unwrap();
                let a = associate(&g).unwrap();
                assert_eq!(check_association(&g, &a).total(), 0);
                let mut order = a.order.clone();
                order.sort_unstable();
                assert_eq!(order, (0..g.loop_count()).collect::<Vec<_>>());
            }
        }
    }
}

#[test]
fn zeta_law() {
    let (reg, w) = two_hexagons();
    let g = build_aux_graph(&reg, &w).unwrap();
    let a = associate(&g).unwrap();
    let mut rng = seeded_rng(23, 0);
    let z = sample_zeta(&g, &a, &ModelParams::new(1.0, 1.0).unwrap(), &mut rng).unwrap();
    assert_eq!(z.open_count(), 0);
    assert!(sample_zeta(&g, &a, &ModelParams::new(1.5, 1.2).unwrap(), &mut rng).is_err());

    let p = ModelParams::new(1.6, 0.7).unwrap();
    let (mut loops_open, mut edges_open, mut edges) = (0usize, 0usize, 0usize);
    let trials = 2000;
    for _ in 0..trials {
        let z = sample_zeta(&g, &a, &p, &mut rng).unwrap();
        for v in 0..g.len() {
            match g.vertices[v] {
                AuxVertex::Loop(_) => loops_open += z.is_open(v) as usize,
                AuxVertex::FreeEdge(_) => {
                    edges += 1;
                    edges_open += z.is_open(v) as usize;
                }
                AuxVertex::Face(_) => {
                    let from_edges = g.adj[v].iter().any(|&u| matches!(g.vertices[u], AuxVertex::FreeEdge(_)) && z.is_open(u));
                    let from_loops = (0..g.loop_count()).any(|l| z.is_open(l) && a.faces[l].contains(&v));
                    assert_eq!(z.is_open(v), from_edges || from_loops);
                }
            }
        }
        let mut again = z.clone();
        derive_faces(&g, &a, &mut again);
        assert_eq!(again, z);
    }
    let pl = 0.6 / 1.6;
    let nl = (trials * g.loop_count()) as f64;
    assert!((loops_open as f64 / nl - pl).abs() < 4.0 * (pl * (1.0 - pl) / nl).sqrt());
    let fe = edges_open as f64 / edges as f64;
    assert!((fe - 0.3).abs() < 4.0 * (0.21 / edges as f64).sqrt());
}

#[test]
fn zeta_is_two_dependent() {
    let reg = Region::ball(FaceCoord::ORIGIN, 3);
    let w = random_config_p(&reg, 0.3, &mut seeded_rng(24, 0));
    let g = build_aux_graph(&reg, &w).unwrap();
    let a = associate(&g).unwrap();
    let p = ModelParams::new(1.5, 0.8).unwrap();
    let u = g.pi_face(reg.face_id(FaceCoord::ORIGIN).unwrap());
    let d = g.bfs_distances(u);
    let v = (0..g.len()).find(|&v| d[v] >= 3 && matches!(g.vertices[v], AuxVertex::Face(_))).unwrap();
    let mut rng = seeded_rng(24, 1);
    let trials = 20000;
    let (mut cu, mut cv, mut cuv) = (0.0, 0.0, 0.0);
    for _ in 0..trials {
        let z = sample_zeta(&g, &a, &p, &mut rng).unwrap();
        let (x, y) = (z.is_open(u) as u8 as f64, z.is_open(v) as u8 as f64);
        cu += x;
        cv += y;
        cuv += x * y;
    }
    let t = trials as f64;
    let cov = cuv / t - (cu / t) * (cv / t);
    let sd = ((cu / t) * (1.0 - cu / t) * (cv / t) * (1.0 - cv / t) / t).sqrt();
    assert!(cov.abs() < 4.0 * sd + 1e-9, "cov {cov} sd {sd}");
}

#[test]
fn domination_intensity_examples() {
    assert_eq!(domination_intensity(1.0, 1.0).2, 0.0);
    let (_, _, p) = domination_intensity(1.0, 0.999);
    assert!((p - 0.6).abs() < 1e-9);
}

#[test]
fn domination_is_pointwise_and_has_the_right_intensity() {
    let reg = Region::ball(FaceCoord::ORIGIN, 3);
    let w = random_config_p(&reg, 0.3, &mut seeded_rng(25, 0));
    let g = build_aux_graph(&reg, &w).unwrap();
    let a = associate(&g).unwrap();
    let mut rng = seeded_rng(25, 1);

    let s = domination_coupling(&g, &a, &ModelParams::new(1.0, 1.0).unwrap(), &mut rng).unwrap();
    assert_eq!(s.zeta.open_count() + s.bernoulli.open_count(), 0);

    let p = ModelParams::new(1.0 + 1e-7, 0.9999).unwrap();
    let (_, _, total) = domination_intensity(p.n, p.x);
    assert!(total < 1.0);
    let mut opened = 0usize;
    let trials = 2000;
    for _ in 0..trials {
        let s = domination_coupling(&g, &a, &p, &mut rng).unwrap();
        assert!(s.zeta.is_below(&s.bernoulli));
        assert!(!s.clamped);
        opened += s.bernoulli.open_count();
    }
    let n = (trials * g.len()) as f64;
    let f = opened as f64 / n;
    assert!((f - total).abs() < 4.0 * (total * (1.0 - total) / n).sqrt(), "{f} vs {total}");

    let big = ModelParams::new(2.0, 0.5).unwrap();
    let s = domination_coupling(&g, &a, &big, &mut rng).unwrap();
    assert!(s.clamped && s.p == 1.0);
    assert!(s.zeta.is_below(&s.bernoulli));
}

/// Reachability by powers of the open-restricted adjacency matrix.
fn matrix_reach(adj: &[Vec<usize>], open: &[bool], from: &[usize], to: &[usize]) -> bool {
    let n = adj.len();
    let mut m = vec![vec![false; n]; n];
    for v in 0..n {
        m[v][v] = open[v];
        for &w in &adj[v] {
            m[v][w] = open[v] && open[w];
        }
    }
    let mut r = m.clone();
    for _ in 0..n {
        let mut next = r.clone();
        for i in 0..n {
            for k in 0..n {
                if r[i][k] {
                    for j in 0..n {
                        if m[k][j] {
                            next[i][j] = true;
                        }
                    }
                }
            }
        }
        r = next;
    }
    from.iter().any(|&f| to.iter().any(|&t| r[f][t]))
}

#[test]
fn connectivity_matches_matrix_powers() {
    let reg = Region::domain(vec![FaceCoord::new(0, 0), FaceCoord::new(1, 0)]).unwrap();
    let mut rng = seeded_rng(26, 0);
    let ens = Ensemble::new(&reg);
    let configs: Vec<LoopConfig> = ens.enumerate(22).unwrap().collect();
    for _ in 0..300 {
        let w = configs.choose(&mut rng).unwrap();
        let g = build_aux_graph(&reg, w).unwrap();
        assert!(g.len() <= 20);
        let mut s = SiteConfig::closed(&g);
        let open: Vec<bool> = (0..g.len()).map(|_| rng.gen::<f64>() < 0.6).collect();
        for (v, &o) in open.iter().enumerate() {
            s.open.set(v, o);
        }
        let from: Vec<usize> = (0..g.len()).filter(|_| rng.gen::<f64>() < 0.2).collect();
        let to: Vec<usize> = (0..g.len()).filter(|_| rng.gen::<f64>() < 0.2).collect();
        assert_eq!(connectivity(&g, &s, &from, &to), matrix_reach(&g.adj, &open, &from, &to));
    }
    let g = build_aux_graph(&reg, &LoopConfig::empty(&reg)).unwrap();
    assert!(!connectivity(&g, &SiteConfig::closed(&g), &[0], &[0]));
    let mut s = SiteConfig::closed(&g);
    s.open.insert(3);
    assert!(connectivity(&g, &s, &[3], &[3]));
}

#[test]
fn percolation_bound_implication_never_fails() {
    let reg = Region::ball(FaceCoord::ORIGIN, 5);
    let params = ModelParams::new(1.05, 0.97).unwrap();
    // loops kept away from the boundary so that the root is far from it
    let mut pick = seeded_rng(27, 0);
    let mut s = reg.empty_edge_set();
    for f in reg.ball_faces(FaceCoord::ORIGIN, 3) {
        if pick.gen::<f64>() < 0.3 {
            s.symmetric_difference_with(&reg.face_boundary(f));
        }
    }
    let omega = LoopConfig::from_edges(&reg, s).unwrap();
    let mut rng = seeded_rng(27, 1);
    let (mut ran, mut outside) = (0, 0);
    for (r, big_r) in [(0, 2), (0, 3), (1, 4)] {
        let g = build_aux_graph(&reg, &omega).unwrap();
        let root = g.pi_face(reg.face_id(FaceCoord::ORIGIN).unwrap());
        if g.boundary_distance(root) <= big_r {
            continue;
        }
        let rep = percolation_bound_check(&reg, &omega, &params, FaceCoord::ORIGIN, r, big_r, 200, &mut rng).unwrap();
        assert_eq!(rep.trials, 200);
        assert_eq!(rep.implication_failures, 0, "{rep:?}");
        assert!(rep.outside_ball_r_plus_one <= rep.outside_ball_r);
        outside += rep.outside_ball_r;
        assert!(rep.non_connection <= rep.circuits);
        ran += 1;
    }
    assert!(ran > 0);
    // the literal B_R location is missed on some samples
    assert!(outside > 0);
    let empty = LoopConfig::empty(&reg);
    let rep = percolation_bound_check(&reg, &empty, &ModelParams::new(1.0, 1.0).unwrap(), FaceCoord::ORIGIN, 0, 2, 5, &mut rng)
        .unwrap();
    assert_eq!((rep.non_connection, rep.circuits, rep.implication_failures), (5, 5, 0));
    assert!(percolation_bound_check(&reg, &empty, &params, FaceCoord::ORIGIN, 1, 3, 1, &mut rng).is_err());
    assert!(percolation_bound_check(&reg, &empty, &params, FaceCoord::ORIGIN, 0, 40, 1, &mut rng).is_err());
}

#[test]
fn degree_diagnostics_bounds() {
    let reg = Region::ball(FaceCoord::ORIGIN, 3);
    let g = build_aux_graph(&reg, &LoopConfig::empty(&reg)).unwrap();
    let rep = degree_diagnostics(&g, 8);
    assert!(rep.histogram.keys().all(|&d| d <= 6));
    assert_eq!(rep.other_bound_violations, 0);
    assert_eq!(rep.truncated[6].1, 0.0);
    assert_eq!(rep.histogram.values().sum::<usize>(), g.len());

    // one long loop: the boundary of the whole ball
    let b: fixedbitset::FixedBitSet = reg.boundary_edges().iter().copied().collect();
    let mut s = reg.empty_edge_set();
    s.union_with(&b);
    let w = LoopConfig::from_edges(&reg, s).unwrap();
    let g = build_aux_graph(&reg, &w).unwrap();
    let rep = degree_diagnostics(&g, 8);
    assert_eq!(rep.loop_bound_violations + rep.other_bound_violations, 0);
    // at r = 7 only the loop vertex contributes
    let want = g.degree(0) as f64 / g.len() as f64;
    assert!((rep.truncated[6].1 - want).abs() < 1e-12);

    let mut rng = seeded_rng(28, 0);
    for _ in 0..10 {
        let w = random_config(&reg, &mut rng);
        let g = build_aux_graph(&reg, &w).unwrap();
        let rep = degree_diagnostics(&g, 8);
        assert_eq!(rep.loop_bound_violations + rep.other_bound_violations, 0);
    }
}

#[test]
fn census_examples() {
    let reg = hexagon();
    let g = build_aux_graph(&reg, &LoopConfig::empty(&reg)).unwrap();
    let c1 = rooted_ball_census(&g, 1).unwrap();
    assert_eq!(c1.len(), 2);
    let mut counts: Vec<usize> = c1.values().copied().collect();
    counts.sort_unstable();
    assert_eq!(counts, vec![1, 6]);
    assert_eq!(rooted_ball_census(&g, 0).unwrap().len(), 1);
    let f = census_frequencies(&c1);
    assert!((f.values().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(rooted_ball_census(&g, MAX_CENSUS_RADIUS + 1).is_err());
    let reg = Region::ball(FaceCoord::ORIGIN, 2);
    let g = build_aux_graph(&reg, &LoopConfig::empty(&reg)).unwrap();
    for r in 0..=MAX_CENSUS_RADIUS {
        let c = rooted_ball_census(&g, r).unwrap();
        assert_eq!(c.values().sum::<usize>(), g.len());
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn isomorphic(a: &[Vec<usize>], b: &[Vec<usize>]) -> bool {
    let n = a.len();
    if n != b.len() {
        return false;
    }
    permutations(n).iter().any(|p| (0..n).all(|u| {
        let mut x: Vec<usize> = a[u].iter().map(|&w| p[w]).collect();
        let mut y = b[p[u]].clone();
        x.sort_unstable();
        y.sort_unstable();
        x == y
    }))
}

fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

#[test]
fn canonical_form_matches_brute_isomorphism() {
    let mut rng = seeded_rng(29, 0);
    let graphs: Vec<Vec<Vec<usize>>> = (0..60).map(|_| random_graph(6, 0.45, &mut rng)).collect();
    let forms: Vec<String> = graphs.iter().map(|g| canonical_form(g, &vec![0; g.len()])).collect();
    for i in 0..graphs.len() {
        for j in i + 1..graphs.len() {
            assert_eq!(forms[i] == forms[j], isomorphic(&graphs[i], &graphs[j]));
        }
    }
    // 6-cycle against two triangles: same degrees, not isomorphic
    let c6: Vec<Vec<usize>> = (0..6).map(|i| vec![(i + 1) % 6, (i + 5) % 6]).collect();
    let tt: Vec<Vec<usize>> = vec![vec![1, 2], vec![0, 2], vec![0, 1], vec![4, 5], vec![3, 5], vec![3, 4]];
    assert_ne!(canonical_form(&c6, &[0; 6]), canonical_form(&tt, &[0; 6]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn canonical_form_is_relabelling_invariant(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = seeded_rng(seed, 0);
        let g = random_graph(n, 0.4, &mut rng);
        let colours: Vec<u32> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut h = vec![Vec::new(); n];
        let mut hc = vec![0u32; n];
        for u in 0..n {
            h[perm[u]] = g[u].iter().map(|&w| perm[w]).collect();
            hc[perm[u]] = colours[u];
        }
        prop_assert_eq!(canonical_form(&g, &colours), canonical_form(&h, &hc));
    }
}
