mod common;

use std::collections::HashMap;

use common::{bits, hexagon, random_config, uf_components};
use fixedbitset::FixedBitSet;
use loopon::coupling::{
    circuit_surrounds, color_loops, find_defect_free_circuit, marginal_check, monotonicity_check,
    non_contractible_cycle_avoiding, sample_eta, torus_duality_check, triple_weight, xor_resample, CoherentTriple,
    ColoredConfig,
};
use loopon::loopcore::{decompose, interior_faces};
use loopon::sampler::{seeded_rng, Chain, Ensemble};
use loopon::{q, Error, Exact, FaceCoord, LoopConfig, ModelParams, Region, Scalar};
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn colouring_partitions_loops_with_the_right_frequency() {
    let reg = Region::ball(FaceCoord::ORIGIN, 3);
    let ens = Ensemble::new(&reg);
    let mut rng = seeded_rng(1, 0);
    let n = 1.6;
    let (mut blue, mut total) = (0usize, 0usize);
    for _ in 0..400 {
        let w = random_config(&reg, &mut rng);
        let c = color_loops(&ens, &w, n, &mut rng).unwrap();
        assert!(c.red.edges().is_disjoint(c.blue.edges()));
        assert_eq!(c.union(), w);
        blue += c.blue.loop_count(&reg);
        total += w.loop_count(&reg);
    }
    let p = (n - 1.0) / n;
    let f = blue as f64 / total as f64;
    let sd = (p * (1.0 - p) / total as f64).sqrt();
    assert!((f - p).abs() < 4.0 * sd, "{f} vs {p}");
    assert!(color_loops(&ens, &LoopConfig::empty(&reg), 0.5, &mut rng).is_err());
}

#[test]
fn defect_edges_avoid_loops() {
    let reg = Region::ball(FaceCoord::ORIGIN, 3);
    let ens = Ensemble::new(&reg);
    let mut rng = seeded_rng(2, 0);
    let x = 0.7;
    let (mut hits, mut slots) = (0usize, 0usize);
    for _ in 0..300 {
        let w = random_config(&reg, &mut rng);
        let eta = sample_eta(&ens, &w, x, &mut rng).unwrap();
        assert!(eta.is_disjoint(w.edges()));
        hits += eta.count_ones(..);
        slots += reg.edge_count() - w.edge_count();
    }
    let f = hits as f64 / slots as f64;
    let sd = (0.3 * 0.7 / slots as f64).sqrt();
    assert!((f - 0.3).abs() < 4.0 * sd);
    assert!(sample_eta(&ens, &LoopConfig::empty(&reg), 1.5, &mut rng).is_err());
}

/// Sums triple weights over every `(red, blue, η)` assignment of the edges
/// of a small region and groups them by `red ∪ blue`.
fn brute_triple_marginal(region: &Region, n: &Exact, x: &Exact) -> HashMap<Vec<usize>, Exact> {
    let ne = region.edge_count();
    let a = Exact::from_ratio(1, 1) / x.clone() - Exact::from_ratio(1, 1);
    let nb = n.clone() - Exact::from_ratio(1, 1);
    let mut out: HashMap<Vec<usize>, Exact> = HashMap::new();
    let total = 4usize.pow(ne as u32);
    for code in 0..total {
        let mut c = code;
        let (mut red, mut blue, mut eta) = (Vec::new(), Vec::new(), 0usize);
        for e in 0..ne {
            match c % 4 {
                1 => red.push(e),
                2 => blue.push(e),
                3 => eta += 1,
                _ => {}
            }
            c /= 4;
        }
        let (rs, bs) = (bits(ne, red.iter().copied()), bits(ne, blue.iter().copied()));
        if loopon::loopcore::check_even(region, &rs).is_err() || loopon::loopcore::check_even(region, &bs).is_err() {
            continue;
        }
        let w = nb.powu(uf_components(region, &bs)) * a.powu(eta);
        let mut u = red;
        u.extend(blue);
        u.sort_unstable();
        *out.entry(u).or_insert_with(Exact::zero) += w;
    }
    out
}

#[test]
fn triple_marginal_matches_brute_force_on_hexagon() {
    let reg = hexagon();
    for (n, x) in [(q(3, 2), q(2, 3)), (q(2, 1), q(1, 1)), (q(1, 1), q(1, 2))] {
        let brute = brute_triple_marginal(&reg, &n, &x);
        let p = ModelParams::new(n.clone(), x.clone()).unwrap();
        let ratios: Vec<Exact> = brute
            .iter()
            .map(|(u, w)| {
                let s = bits(reg.edge_count(), u.iter().copied());
                w.clone() / p.weight(s.count_ones(..), uf_components(&reg, &s))
            })
            .collect();
        assert!(ratios.windows(2).all(|r| r[0] == r[1]));
        let rep = marginal_check(&Ensemble::new(&reg), &p, 22).unwrap();
        assert!(rep.max_relative_error.is_zero());
        assert_eq!(rep.constant, ratios[0]);
    }
}

#[test]
fn marginal_identity_exact_on_torus_and_float_on_ball() {
    let t = Region::torus(2, 2).unwrap();
    for n in [q(1, 1), q(3, 2), q(2, 1)] {
        let rep = marginal_check(&Ensemble::new(&t), &ModelParams::new(n, q(1, 1)).unwrap(), 22).unwrap();
        assert!(rep.max_relative_error.is_zero());
        assert_eq!(rep.groups, 32);
        let rep = marginal_check(&Ensemble::new(&t), &ModelParams::new(q(7, 5), q(3, 5)).unwrap(), 22).unwrap();
        assert!(rep.max_relative_error.is_zero());
    }
    let b1 = Region::ball(FaceCoord::ORIGIN, 1);
    let rep = marginal_check(&Ensemble::new(&b1), &ModelParams::new(1.4, 0.6).unwrap(), 22).unwrap();
    assert!(rep.max_relative_error < 1e-10);
}

#[test]
fn triple_validation() {
    let reg = hexagon();
    let h = LoopConfig::from_edges(&reg, reg.face_boundary(0)).unwrap();
    let e = LoopConfig::empty(&reg);
    assert!(CoherentTriple::new(h.clone(), h.clone(), reg.empty_edge_set()).is_err());
    assert!(CoherentTriple::new(h.clone(), e.clone(), bits(6, [0])).is_err());
    let t = CoherentTriple::new(e.clone(), h.clone(), reg.empty_edge_set()).unwrap();
    let p = ModelParams::new(q(3, 1), q(1, 2)).unwrap();
    assert_eq!(triple_weight(&Ensemble::new(&reg), &t, &p), q(2, 1));
    assert_eq!(t.blocked(), reg.face_boundary(0));
}

/// Every simple cycle of a region, with its interior.
fn all_circuits(region: &Region) -> Vec<(FixedBitSet, Vec<bool>)> {
    Ensemble::new(region)
        .enumerate(22)
        .unwrap()
        .filter(|w| w.loop_count(region) == 1)
        .map(|w| {
            let inside = interior_faces(region, w.edges()).unwrap();
            (w.into_edges(), inside)
        })
        .collect()
}

fn check_circuit_oracle(region: &Region, cycles: &[(FixedBitSet, Vec<bool>)], blocked: &FixedBitSet, protect: &[usize]) {
    let valid: Vec<&(FixedBitSet, Vec<bool>)> = cycles
        .iter()
        .filter(|(c, inside)| c.is_disjoint(blocked) && protect.iter().all(|&f| inside[f]))
        .collect();
    let got = find_defect_free_circuit(region, blocked, protect, None).unwrap();
    assert_eq!(got.is_some(), !valid.is_empty());
    if let Some(c) = got {
        assert!(c.set.is_disjoint(blocked));
        assert!(circuit_surrounds(region, &c, protect));
        let mine = interior_faces(region, &c.set).unwrap();
        for (_, inside) in valid {
            // outermost: contains the interior of every valid circuit
            assert!(inside.iter().zip(&mine).all(|(a, b)| !a || *b));
        }
    }
}

#[test]
fn circuit_search_examples() {
    let reg = Region::ball(FaceCoord::ORIGIN, 2);
    let o = reg.face_id(FaceCoord::ORIGIN).unwrap();
    let c = find_defect_free_circuit(&reg, &reg.empty_edge_set(), &[o], None).unwrap().unwrap();
    let b: FixedBitSet = reg.boundary_edges().iter().copied().collect();
    let mut want = reg.empty_edge_set();
    want.union_with(&b);
    assert_eq!(c.set, want);
    let inner = reg.ball_faces(FaceCoord::ORIGIN, 1);
    let c1 = find_defect_free_circuit(&reg, &reg.empty_edge_set(), &[o], Some(&inner)).unwrap().unwrap();
    assert_eq!(c1.set, reg.boundary_of_faces(&inner));
    let mut all = reg.empty_edge_set();
    all.insert_range(..);
    assert!(find_defect_free_circuit(&reg, &all, &[o], None).unwrap().is_none());
    let t = Region::torus(3, 3).unwrap();
    assert!(matches!(find_defect_free_circuit(&t, &t.empty_edge_set(), &[0], None), Err(Error::TorusUnsupported)));
}

#[test]
fn circuit_search_matches_cycle_oracle_on_ball_one() {
    let reg = Region::ball(FaceCoord::ORIGIN, 1);
    let cycles = all_circuits(&reg);
    let o = reg.face_id(FaceCoord::ORIGIN).unwrap();
    let mut rng = seeded_rng(5, 0);
    for _ in 0..500 {
        let mut blocked = reg.empty_edge_set();
        let density = rng.gen::<f64>() * 0.5;
        for e in 0..reg.edge_count() {
            if rng.gen::<f64>() < density {
                blocked.insert(e);
            }
        }
        let protect: Vec<usize> = if rng.gen::<bool>() { vec![o] } else { vec![rng.gen_range(0..reg.face_count())] };
        check_circuit_oracle(&reg, &cycles, &blocked, &protect);
    }
}

#[test]
fn circuit_search_matches_cycle_oracle_on_ball_two() {
    let reg = Region::ball(FaceCoord::ORIGIN, 2);
    let cycles = all_circuits(&reg);
    let protect = reg.ball_faces(FaceCoord::ORIGIN, 0);
    let mut rng = seeded_rng(6, 0);
    for _ in 0..60 {
        let mut blocked = reg.empty_edge_set();
        for e in 0..reg.edge_count() {
            if rng.gen::<f64>() < 0.25 {
                blocked.insert(e);
            }
        }
        check_circuit_oracle(&reg, &cycles, &blocked, &protect);
    }
}

#[test]
fn xor_with_defect_free_circuit_preserves_triple_weight() {
    let reg = Region::ball(FaceCoord::ORIGIN, 3);
    let ens = Ensemble::new(&reg);
    let p = ModelParams::new(1.1, 0.9).unwrap();
    let pq = ModelParams::new(q(11, 10), q(9, 10)).unwrap();
    let mut chain = Chain::new(&ens, &p, seeded_rng(8, 0));
    let o = reg.face_id(FaceCoord::ORIGIN).unwrap();
    let mut done = 0;
    for _ in 0..200 {
        for _ in 0..50 {
            chain.step();
        }
        let w = chain.state().clone();
        let mut rng = seeded_rng(8, 1 + done as u64);
        let c = color_loops(&ens, &w, p.n, &mut rng).unwrap();
        let eta = sample_eta(&ens, &w, p.x, &mut rng).unwrap();
        let t = CoherentTriple::new(c.red, c.blue, eta).unwrap();
        if let Some(g) = find_defect_free_circuit(&reg, &t.blocked(), &[o], None).unwrap() {
            let t2 = xor_resample(&t, &g).unwrap();
            assert_eq!(triple_weight(&ens, &t, &pq), triple_weight(&ens, &t2, &pq));
            assert_eq!(t2.union(), t.union().xor(&reg, &g.set).unwrap());
            assert_eq!(xor_resample(&t2, &g).unwrap(), t);
            done += 1;
        }
    }
    assert!(done > 10);
    let h = LoopConfig::from_edges(&reg, reg.face_boundary(o)).unwrap();
    let t = CoherentTriple::new(LoopConfig::empty(&reg), h, reg.empty_edge_set()).unwrap();
    let g = find_defect_free_circuit(&reg, &reg.empty_edge_set(), &[o], Some(&[o])).unwrap().unwrap();
    assert!(matches!(xor_resample(&t, &g), Err(Error::BlockedCircuit)));
}

#[test]
fn monotonicity_on_small_tori() {
    for (k, l) in [(2, 2), (2, 3)] {
        let t = Region::torus(k, l).unwrap();
        let ens = Ensemble::new(&t);
        let nonc = |s: &FixedBitSet| {
            let w = LoopConfig::from_edges(&t, s.clone()).unwrap();
            decompose(&t, &w).iter().any(|lp| !lp.is_contractible(&t).unwrap())
        };
        for n in [q(1, 1), q(3, 2), q(2, 1)] {
            let rep = monotonicity_check(&ens, &n, nonc, 22).unwrap();
            assert!(rep.holds, "torus({k},{l}) n={n}");
        }
        let big = |s: &FixedBitSet| s.count_ones(..) >= 4;
        assert!(monotonicity_check(&ens, &q(3, 2), big, 22).unwrap().holds);
        let empty = |s: &FixedBitSet| s.is_clear();
        assert!(matches!(monotonicity_check(&ens, &q(3, 2), empty, 22), Err(Error::NotMonotone)));
    }
}

fn assert_witness(t: &Region, colored: &ColoredConfig) {
    let w = torus_duality_check(t, colored).unwrap().expect("duality witness");
    let avoid = if w.blue_free { colored.blue.edges() } else { colored.red.edges() };
    assert!(w.circuit.set.is_disjoint(avoid));
    assert_ne!(w.class, (0, 0));
    assert_eq!(w.circuit.as_loop().homology_class(t).unwrap(), w.class);
    let lc = LoopConfig::from_edges(t, w.circuit.set.clone()).unwrap();
    assert_eq!(lc.loop_count(t), 1);
}

#[test]
fn duality_exhaustive_on_torus_two_two() {
    let t = Region::torus(2, 2).unwrap();
    let ens = Ensemble::new(&t);
    let mut checked = 0;
    for w in ens.enumerate(22).unwrap() {
        let loops = decompose(&t, &w);
        for mask in 0u32..(1 << loops.len()) {
            let mut blue = t.empty_edge_set();
            let mut red = t.empty_edge_set();
            for (i, l) in loops.iter().enumerate() {
                let target = if mask >> i & 1 == 1 { &mut blue } else { &mut red };
                for &e in &l.edges {
                    target.insert(e);
                }
            }
            let colored = ColoredConfig {
                red: LoopConfig::from_edges(&t, red).unwrap(),
                blue: LoopConfig::from_edges(&t, blue).unwrap(),
            };
            assert_witness(&t, &colored);
            checked += 1;
        }
    }
    assert!(checked > 32);
}

#[test]
fn duality_monte_carlo_on_torus_four_four() {
    let t = Region::torus(4, 4).unwrap();
    let ens = Ensemble::new(&t);
    let p = ModelParams::new(1.5, 1.0).unwrap();
    let mut chain = Chain::new(&ens, &p, seeded_rng(10, 0));
    for _ in 0..500 {
        for _ in 0..16 {
            chain.step();
        }
        let w = chain.state().clone();
        let c = color_loops(&ens, &w, 1.5, chain.rng()).unwrap();
        assert_witness(&t, &c);
    }
}

#[test]
fn non_contractible_search_respects_avoid_set() {
    let t = Region::torus(3, 3).unwrap();
    let c = non_contractible_cycle_avoiding(&t, &t.empty_edge_set()).unwrap().unwrap();
    assert_ne!(c.as_loop().homology_class(&t).unwrap(), (0, 0));
    let mut all = t.empty_edge_set();
    all.insert_range(..);
    assert!(non_contractible_cycle_avoiding(&t, &all).unwrap().is_none());
    // blocking every edge crossing cut A leaves no cycle winding in that direction
    let reg = Region::ball(FaceCoord::ORIGIN, 1);
    assert!(non_contractible_cycle_avoiding(&reg, &reg.empty_edge_set()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn circuit_is_simple_and_unblocked(seed in any::<u64>()) {
        let reg = Region::ball(FaceCoord::ORIGIN, 3);
        let mut rng = seeded_rng(seed, 0);
        let mut blocked = reg.empty_edge_set();
        for e in 0..reg.edge_count() {
            if rng.gen::<f64>() < 0.2 {
                blocked.insert(e);
            }
        }
        let protect = reg.ball_faces(FaceCoord::ORIGIN, 1);
        if let Some(c) = find_defect_free_circuit(&reg, &blocked, &protect, None).unwrap() {
            prop_assert!(c.set.is_disjoint(&blocked));
            let w = LoopConfig::from_edges(&reg, c.set.clone()).unwrap();
            prop_assert_eq!(w.loop_count(&reg), 1);
            prop_assert!(circuit_surrounds(&reg, &c, &protect));
        }
    }
}
