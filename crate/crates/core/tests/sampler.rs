mod common;

use std::collections::HashMap;

use common::{brute_even_subsets, hexagon, uf_components};
use fixedbitset::FixedBitSet;
use loopon::loopcore::decompose;
use loopon::sampler::{
    acceptance_delta, acceptance_lower_bound, metropolis_acceptance, seeded_rng, x_c, BoundaryCondition, Chain,
    Ensemble, ExactDistribution,
};
use loopon::{q, Exact, FaceCoord, LoopConfig, ModelParams, Region, Scalar};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn key(s: &FixedBitSet) -> Vec<usize> {
    s.ones().collect()
}

/// Exact probabilities by brute force: every even subset weighted with a
/// union-find loop count.
fn brute_distribution(region: &Region, n: &Exact, x: &Exact) -> HashMap<Vec<usize>, Exact> {
    let all = brute_even_subsets(region);
    let w: Vec<Exact> = all
        .iter()
        .map(|s| x.powu(s.count_ones(..)) * n.powu(uf_components(region, s)))
        .collect();
    let z = w.iter().fold(Exact::zero(), |a, b| a + b);
    all.iter().zip(w).map(|(s, w)| (key(s), w / z.clone())).collect()
}

#[test]
fn enumeration_sizes() {
    let b1 = Region::ball(FaceCoord::ORIGIN, 1);
    assert_eq!(Ensemble::new(&b1).enumerate(22).unwrap().count(), 128);
    let b2 = Region::ball(FaceCoord::ORIGIN, 2);
    assert_eq!(Ensemble::new(&b2).state_count_log2(), 19);
    let t = Region::torus(2, 2).unwrap();
    assert_eq!(Ensemble::new(&t).enumerate(22).unwrap().count(), 32);
    let t33 = Region::torus(3, 3).unwrap();
    assert_eq!(Ensemble::new(&t33).state_count_log2(), 10);
    assert!(matches!(Ensemble::new(&b2).enumerate(10), Err(loopon::Error::CapExceeded { needed: 19, cap: 10 })));
}

#[test]
fn enumeration_is_distinct_and_even() {
    let b1 = Region::ball(FaceCoord::ORIGIN, 1);
    let ens = Ensemble::new(&b1);
    let mut seen = std::collections::HashSet::new();
    for (i, w) in ens.enumerate(22).unwrap().enumerate() {
        assert!(loopon::loopcore::check_even(&b1, w.edges()).is_ok());
        assert!(seen.insert(key(w.edges())));
        assert_eq!(ens.config_at(i as u64), w);
    }
}

#[test]
fn exact_distribution_matches_brute_force() {
    let params = [(q(1, 1), q(1, 1)), (q(7, 5), q(3, 5)), (q(2, 1), q(1, 1)), (q(1, 2), q(3, 2))];
    for reg in [hexagon(), Region::torus(2, 2).unwrap()] {
        let ens = Ensemble::new(&reg);
        for (n, x) in &params {
            let brute = brute_distribution(&reg, n, x);
            let p = ModelParams::new(n.clone(), x.clone()).unwrap();
            let d = ExactDistribution::new(&ens, &p, 22).unwrap();
            let mut total = Exact::zero();
            for i in 0..d.len() {
                let w = ens.config_at(i as u64);
                assert_eq!(d.probability(i), brute[&key(w.edges())]);
                total = total + d.probability(i);
            }
            assert!(total.is_one());
        }
    }
}

#[test]
fn exact_event_probability_matches_brute_force() {
    let t = Region::torus(2, 2).unwrap();
    let ens = Ensemble::new(&t);
    let n = q(3, 2);
    let x = q(1, 1);
    let event = |w: &LoopConfig| decompose(&t, w).iter().any(|l| !l.is_contractible(&t).unwrap());
    let brute = brute_distribution(&t, &n, &x);
    let mut want = Exact::zero();
    for w in ens.enumerate(22).unwrap() {
        if event(&w) {
            want = want + brute[&key(w.edges())].clone();
        }
    }
    let got = ens.exact_probability(&ModelParams::new(n, x).unwrap(), 22, event).unwrap();
    assert_eq!(got, want);
}

#[test]
fn boundary_condition_fixes_outside_edges() {
    let reg = Region::ball(FaceCoord::ORIGIN, 2);
    let d = reg.ball_faces(FaceCoord::ORIGIN, 1);
    // ξ: a hexagon outside Λ_1
    let out = reg.face_id(FaceCoord::new(2, 0)).unwrap();
    let xi = LoopConfig::from_edges(&reg, reg.face_boundary(out)).unwrap();
    let ens = Ensemble::with_boundary(&reg, &BoundaryCondition { faces: d.clone(), xi: xi.clone() }).unwrap();
    assert_eq!(ens.state_count_log2(), 7);
    let d_edges = reg.edges_bordering(&d);
    let mut count = 0;
    for w in ens.enumerate(22).unwrap() {
        for e in 0..reg.edge_count() {
            if !d_edges.contains(e) {
                assert_eq!(w.contains(e), xi.contains(e));
            }
        }
        count += 1;
    }
    assert_eq!(count, 128);
    // brute oracle: all even configurations of Λ_2 that agree with ξ off D
    let full = Ensemble::new(&reg);
    let agree = full
        .enumerate(22)
        .unwrap()
        .filter(|w| (0..reg.edge_count()).all(|e| d_edges.contains(e) || w.contains(e) == xi.contains(e)))
        .count();
    assert_eq!(agree, 128);
}

#[test]
fn annulus_ensemble_includes_the_hole_generator() {
    let reg = Region::ball(FaceCoord::ORIGIN, 2);
    let annulus: Vec<usize> = (0..reg.face_count()).filter(|&f| reg.face(f) != FaceCoord::ORIGIN).collect();
    let ens = Ensemble::with_boundary(&reg, &BoundaryCondition { faces: annulus, xi: LoopConfig::empty(&reg) }).unwrap();
    assert_eq!(ens.state_count_log2(), 19);
}

#[test]
fn restricted_loop_count_ignores_loops_off_d() {
    let reg = Region::ball(FaceCoord::ORIGIN, 3);
    let d = reg.ball_faces(FaceCoord::ORIGIN, 1);
    let far = reg.face_id(FaceCoord::new(3, 0)).unwrap();
    let xi = LoopConfig::from_edges(&reg, reg.face_boundary(far)).unwrap();
    let ens = Ensemble::with_boundary(&reg, &BoundaryCondition { faces: d, xi: xi.clone() }).unwrap();
    assert_eq!(ens.stats(&xi), (0, 0));
}

#[test]
fn metropolis_helpers() {
    let p = ModelParams::new(q(2, 1), q(1, 2)).unwrap();
    assert_eq!(metropolis_acceptance(&p, 6, 1), q(1, 32));
    assert_eq!(metropolis_acceptance(&p, -6, 0), q(1, 1));
    assert!((x_c(1.0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    assert!((x_c(2.0).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    assert!(x_c(2.5).is_none());
    assert!((acceptance_lower_bound(1.0, 1.0) - 1.0).abs() < 1e-15);
    assert!(ModelParams::new(0.0, 1.0).is_err());
}

#[test]
fn acceptance_delta_matches_recount() {
    let reg = Region::ball(FaceCoord::ORIGIN, 3);
    let ens = Ensemble::new(&reg);
    let mut rng = seeded_rng(2, 0);
    for _ in 0..200 {
        let w = common::random_config(&reg, &mut rng);
        let f = rng.gen_range(0..reg.face_count());
        let (de, dl) = acceptance_delta(&ens, &w, f);
        let w2 = w.xor(&reg, &reg.face_boundary(f)).unwrap();
        assert_eq!(de, w2.edge_count() as i64 - w.edge_count() as i64);
        assert_eq!(dl, uf_components(&reg, w2.edges()) as i64 - uf_components(&reg, w.edges()) as i64);
    }
}

#[test]
fn chain_bookkeeping_stays_exact() {
    for reg in [Region::ball(FaceCoord::ORIGIN, 3), Region::torus(4, 4).unwrap()] {
        let ens = Ensemble::new(&reg);
        let p = ModelParams::new(1.3, 0.8).unwrap();
        let mut chain = Chain::new(&ens, &p, seeded_rng(4, 0));
        for _ in 0..200 {
            for _ in 0..37 {
                chain.step();
            }
            let w = chain.state().clone();
            assert_eq!(chain.edge_count(), w.edge_count());
            assert_eq!(chain.loop_count(), uf_components(&reg, w.edges()));
        }
        assert!(chain.acceptance_rate() > 0.0);
    }
}

#[test]
fn chain_is_reproducible_per_seed() {
    let reg = Region::ball(FaceCoord::ORIGIN, 2);
    let ens = Ensemble::new(&reg);
    let p = ModelParams::new(1.0, 1.0).unwrap();
    let run = |seed| {
        let mut c = Chain::new(&ens, &p, seeded_rng(seed, 3));
        c.trace_csv(5, 50, &["empty"], |w| vec![w.is_empty()])
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1), run(2));
    assert!(run(1).starts_with("step,edges,loops,empty\n"));
}

/// Pearson χ² of chain samples against the exact law, cells with expected
/// count below 5 pooled.
fn chi_square(region: &Region, n: f64, x: f64, samples: usize, seed: u64) -> (f64, f64) {
    chi_square_ens(&Ensemble::new(region), n, x, samples, seed)
}

fn chi_square_ens(ens: &Ensemble<'_>, n: f64, x: f64, samples: usize, seed: u64) -> (f64, f64) {
    let p = ModelParams::new(n, x).unwrap();
    let exact = ExactDistribution::new(ens, &p, 22).unwrap();
    let index: HashMap<Vec<usize>, usize> =
        (0..exact.len()).map(|i| (key(ens.config_at(i as u64).edges()), i)).collect();
    let mut counts = vec![0usize; exact.len()];
    let mut chain = Chain::new(ens, &p, seeded_rng(seed, 0));
    let thin = 10 * chain.sweep_len();
    chain.run(100, thin, samples, |w, _, _| counts[index[&key(w.edges())]] += 1);
    let mut stat = 0.0;
    let mut cells = 0;
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for i in 0..exact.len() {
        let e = exact.probability(i) * samples as f64;
        let o = counts[i] as f64;
        if e < 5.0 {
            pool_o += o;
            pool_e += e;
        } else {
            stat += (o - e) * (o - e) / e;
            cells += 1;
        }
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
        cells += 1;
    }
    let df = (cells - 1).max(1) as f64;
    (stat, ChiSquared::new(df).unwrap().inverse_cdf(0.999))
}

#[test]
fn chain_matches_exact_law_chi_square() {
    for reg in [hexagon(), Region::torus(2, 2).unwrap()] {
        for (n, x) in [(1.0, 1.0), (1.4, 0.6), (2.0, 1.0)] {
            let (stat, crit) = chi_square(&reg, n, x, 20_000, 17);
            assert!(stat < crit, "chi2 {stat} >= {crit} at n={n} x={x}");
        }
    }
}

#[test]
fn chain_reaches_hole_generator_on_annulus() {
    let reg = Region::ball(FaceCoord::ORIGIN, 1);
    let ring: Vec<usize> = (0..reg.face_count()).filter(|&f| reg.face(f) != FaceCoord::ORIGIN).collect();
    let ens = Ensemble::with_boundary(&reg, &BoundaryCondition { faces: ring, xi: LoopConfig::empty(&reg) }).unwrap();
    assert_eq!(ens.state_count_log2(), 7);
    for (n, x) in [(1.0, 1.0), (1.4, 0.6)] {
        let (stat, crit) = chi_square_ens(&ens, n, x, 20_000, 18);
        assert!(stat < crit, "chi2 {stat} >= {crit} at n={n} x={x}");
    }
}

#[test]
fn perco_bound_exact_on_ball_one() {
    let reg = Region::ball(FaceCoord::ORIGIN, 1);
    let ens = Ensemble::new(&reg);
    let p = ModelParams::new(q(1, 1), q(1, 1)).unwrap();
    let pr = ens
        .exact_probability(&p, 22, |w| {
            decompose(&reg, w)
                .iter()
                .any(|l| l.diameter(&reg).unwrap() >= 1 && l.surrounds(&reg, FaceCoord::ORIGIN).unwrap())
        })
        .unwrap();
    assert!(pr >= q(1, 2), "{pr}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn gray_code_index_matches_iteration(i in 0u64..128) {
        let reg = Region::ball(FaceCoord::ORIGIN, 1);
        let ens = Ensemble::new(&reg);
        let nth = ens.enumerate(22).unwrap().nth(i as usize).unwrap();
        prop_assert_eq!(ens.config_at(i), nth);
    }

    #[test]
    fn weights_are_positive_and_multiplicative(e in 0usize..20, l in 0usize..6, a in 1i64..9, b in 1i64..9) {
        let p = ModelParams::new(q(a, 3), q(b, 4)).unwrap();
        let w = p.weight(e, l);
        prop_assert!(w > Exact::zero());
        prop_assert_eq!(p.weight(e + 1, l), w.clone() * q(b, 4));
        prop_assert_eq!(p.weight(e, l + 1), w * q(a, 3));
    }
}
