//! Exact enumeration of the loop O(n) measure over the cycle space and a
//! face-flip Metropolis chain.
//!
//! Randomness: every sampler uses `ChaCha8Rng` seeded with
//! `seed_from_u64(seed)`; independent streams for parallel trials are
//! selected with `set_stream`.

use std::collections::{BTreeMap, VecDeque};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hexlattice::Region;
use crate::loopcore::{count_loops, LoopConfig, LoopTracer};
use crate::scalar::Scalar;

/// Default enumeration cap, as a power of two.
pub const DEFAULT_CAP_LOG2: u32 = 22;

/// Probability of proposing a global move (torus homology or hole boundary).
pub const HOMOLOGY_MOVE_PROB: f64 = 0.1;

/// Probability that a step holds. Without it the chain is periodic
/// whenever every proposal is accepted (e.g. `n = x = 1`).
pub const HOLD_PROB: f64 = 0.25;

/// Seeded generator for stream `stream` of a run with master seed `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Loop weight `n` and edge weight `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub n: T,
    pub x: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(n: T, x: T) -> Result<Self> {
        if !(n > T::zero()) || !(x > T::zero()) {
            return Err(Error::Parameter(format!("need n > 0 and x > 0, got n={n:?}, x={x:?}")));
        }
        Ok(ModelParams { n, x })
    }

    /// `x^edges · n^loops`.
    pub fn weight(&self, edges: usize, loops: usize) -> T {
        self.x.powu(edges) * self.n.powu(loops)
    }

    pub fn to_f64(&self) -> ModelParams<f64> {
        ModelParams { n: self.n.to_f64_lossy(), x: self.x.to_f64_lossy() }
    }
}

impl ModelParams<f64> {
    /// `x_c(n) = 1/√(2+√(2−n))` for `n ≤ 2`.
    pub fn x_c(&self) -> Option<f64> {
        x_c(self.n)
    }
}

pub fn x_c(n: f64) -> Option<f64> {
    if n > 2.0 || n < 0.0 {
        None
    } else {
        Some(1.0 / (2.0 + (2.0 - n).sqrt()).sqrt())
    }
}

/// Lower bound on the acceptance probability of a face flip.
pub fn acceptance_lower_bound(n: f64, x: f64) -> f64 {
    n.powi(3).min(n.powi(-3)) * x.powi(6).min(x.powi(-6))
}

/// Metropolis acceptance `min(1, n^Δℓ x^Δ|ω|)`.
pub fn metropolis_acceptance<T: Scalar>(p: &ModelParams<T>, d_edges: i64, d_loops: i64) -> T {
    let r = p.n.powi_signed(d_loops) * p.x.powi_signed(d_edges);
    T::min_val(T::one(), r)
}

/// Domain `D` inside an enclosing region together with the configuration
/// `ξ` that fixes every edge not bordering a face of `D`.
#[derive(Clone, Debug)]
pub struct BoundaryCondition {
    pub faces: Vec<usize>,
    pub xi: LoopConfig,
}

/// A finite-volume loop ensemble: the region, the free faces `D`, the edges
/// counted by the weight, the seed configuration and cycle-space generators.
#[derive(Clone, Debug)]
pub struct Ensemble<'a> {
    region: &'a Region,
    free_faces: Vec<usize>,
    d_edges: FixedBitSet,
    restricted: bool,
    seed: LoopConfig,
    generators: Vec<FixedBitSet>,
}

impl<'a> Ensemble<'a> {
    /// Whole region with empty boundary condition.
    pub fn new(region: &'a Region) -> Self {
        let nf = region.face_count();
        let mut generators: Vec<FixedBitSet> = Vec::new();
        let faces: Vec<usize> = (0..nf).collect();
        if let Some(h) = region.homology_generators() {
            // face boundaries satisfy one relation on a torus
            generators.extend((0..nf - 1).map(|f| region.face_boundary(f)));
            generators.push(h[0].clone());
            generators.push(h[1].clone());
        } else {
            generators.extend((0..nf).map(|f| region.face_boundary(f)));
        }
        let mut d_edges = region.empty_edge_set();
        d_edges.insert_range(..);
        Ensemble {
            region,
            free_faces: faces,
            d_edges,
            restricted: false,
            seed: LoopConfig::empty(region),
            generators,
        }
    }

    /// Free faces `D ⊆ region` with `ξ` fixed elsewhere. `D` may have holes;
    /// each hole contributes the boundary of its faces as an extra generator.
    pub fn with_boundary(region: &'a Region, bc: &BoundaryCondition) -> Result<Self> {
        if region.is_torus() {
            return Err(Error::TorusUnsupported);
        }
        let nf = region.face_count();
        let mut faces = bc.faces.clone();
        faces.sort_unstable();
        faces.dedup();
        if faces.is_empty() || faces.iter().any(|&f| f >= nf) {
            return Err(Error::InvalidRegion("boundary condition faces must be a nonempty subset".into()));
        }
        if bc.xi.edges().len() != region.edge_count() {
            return Err(Error::InvalidRegion("ξ lives on a different region".into()));
        }
        let mut in_d = vec![false; nf];
        for &f in &faces {
            in_d[f] = true;
        }
        let mut generators: Vec<FixedBitSet> = faces.iter().map(|&f| region.face_boundary(f)).collect();
        let mut comp = vec![usize::MAX; nf];
        for start in 0..nf {
            if in_d[start] || comp[start] != usize::MAX {
                continue;
            }
            let mut members = vec![start];
            let mut touches_outside = false;
            let mut q = VecDeque::from([start]);
            comp[start] = start;
            while let Some(u) = q.pop_front() {
                for &e in region.edges_of_face(u)? {
                    let s = region.edge(e).sides;
                    let w = if s[0] == u { s[1] } else { s[0] };
                    if w >= nf {
                        touches_outside = true;
                    } else if !in_d[w] && comp[w] == usize::MAX {
                        comp[w] = start;
                        members.push(w);
                        q.push_back(w);
                    }
                }
            }
            if !touches_outside {
                generators.push(region.boundary_of_faces(&members));
            }
        }
        let d_edges = region.edges_bordering(&faces);
        let restricted = faces.len() != nf;
        Ok(Ensemble { region, free_faces: faces, d_edges, restricted, seed: bc.xi.clone(), generators })
    }

    pub fn region(&self) -> &'a Region {
        self.region
    }

    pub fn free_faces(&self) -> &[usize] {
        &self.free_faces
    }

    /// Edges of `D`.
    pub fn d_edges(&self) -> &FixedBitSet {
        &self.d_edges
    }

    pub fn is_restricted(&self) -> bool {
        self.restricted
    }

    pub fn seed(&self) -> &LoopConfig {
        &self.seed
    }

    pub fn generators(&self) -> &[FixedBitSet] {
        &self.generators
    }

    pub fn state_count_log2(&self) -> u32 {
        self.generators.len() as u32
    }

    /// `(|ω ∩ D|, number of loops meeting D)`.
    pub fn stats(&self, omega: &LoopConfig) -> (usize, usize) {
        if self.restricted {
            let e = omega.edges().intersection_count(&self.d_edges);
            (e, count_loops(self.region, omega.edges(), Some(&self.d_edges)))
        } else {
            (omega.edge_count(), count_loops(self.region, omega.edges(), None))
        }
    }

    fn check_cap(&self, cap_log2: u32) -> Result<()> {
        let m = self.generators.len() as u32;
        if m > cap_log2 || m > 62 {
            return Err(Error::CapExceeded { needed: m, cap: cap_log2 });
        }
        Ok(())
    }

    /// The configuration with enumeration index `i` (Gray-code order).
    pub fn config_at(&self, i: u64) -> LoopConfig {
        let g = i ^ (i >> 1);
        let mut c = self.seed.clone();
        for (j, gen) in self.generators.iter().enumerate() {
            if g >> j & 1 == 1 {
                c.toggle_all(gen);
            }
        }
        c
    }

    /// Every configuration agreeing with `ξ` off `D`, each exactly once.
    pub fn enumerate(&self, cap_log2: u32) -> Result<Enumeration<'_, 'a>> {
        self.check_cap(cap_log2)?;
        Ok(Enumeration { ens: self, next: 0, total: 1u64 << self.generators.len(), state: self.seed.clone() })
    }

    /// Parallel fold over all configurations, split into contiguous index
    /// ranges. `f` receives the enumeration index and the configuration.
    pub fn par_fold<A, I, F, R>(&self, cap_log2: u32, init: I, f: F, reduce: R) -> Result<A>
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, u64, &LoopConfig) + Sync + Send,
        R: Fn(A, A) -> A + Sync + Send,
    {
        self.check_cap(cap_log2)?;
        let total = 1u64 << self.generators.len();
        let chunks = total.min(512);
        let size = total / chunks;
        let out = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                let start = c * size;
                let mut state = self.config_at(start);
                for i in start..start + size {
                    if i > start {
                        state.toggle_all(&self.generators[i.trailing_zeros() as usize]);
                    }
                    f(&mut acc, i, &state);
                }
                acc
            })
            .reduce(&init, &reduce);
        Ok(out)
    }

    /// Counts configurations by `(|ω∩D|, ℓ)` and whether `event` holds.
    pub fn histogram<E>(&self, cap_log2: u32, event: E) -> Result<Histogram>
    where
        E: Fn(&LoopConfig) -> bool + Sync + Send,
    {
        self.par_fold(
            cap_log2,
            Histogram::default,
            |h, _, c| {
                let (e, l) = self.stats(c);
                let slot = h.counts.entry((e, l)).or_insert([0, 0]);
                slot[event(c) as usize] += 1;
            },
            |mut a, b| {
                for (k, v) in b.counts {
                    let s = a.counts.entry(k).or_insert([0, 0]);
                    s[0] += v[0];
                    s[1] += v[1];
                }
                a
            },
        )
    }

    /// Exact probability of `event` under the loop measure.
    pub fn exact_probability<T, E>(&self, p: &ModelParams<T>, cap_log2: u32, event: E) -> Result<T>
    where
        T: Scalar,
        E: Fn(&LoopConfig) -> bool + Sync + Send,
    {
        Ok(self.histogram(cap_log2, event)?.probability(p))
    }
}

/// Configuration counts keyed by `(edges in D, loops)`, split by an event.
#[derive(Clone, Debug, Default)]
pub struct Histogram {
    pub counts: BTreeMap<(usize, usize), [u64; 2]>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.values().map(|v| v[0] + v[1]).sum()
    }

    /// `(Σ_{A} w, Σ w)`.
    pub fn weights<T: Scalar>(&self, p: &ModelParams<T>) -> (T, T) {
        let mut hit = T::zero();
        let mut all = T::zero();
        for (&(e, l), v) in &self.counts {
            let w = p.weight(e, l);
            hit = hit + w.clone() * T::from_u64(v[1]).unwrap();
            all = all + w * T::from_u64(v[0] + v[1]).unwrap();
        }
        (hit, all)
    }

    pub fn probability<T: Scalar>(&self, p: &ModelParams<T>) -> T {
        let (hit, all) = self.weights(p);
        hit / all
    }
}

/// Gray-code iterator over the configuration space of an ensemble.
pub struct Enumeration<'e, 'a> {
    ens: &'e Ensemble<'a>,
    next: u64,
    total: u64,
    state: LoopConfig,
}

impl<'e, 'a> Enumeration<'e, 'a> {
    pub fn total(&self) -> u64 {
        self.total
    }
}

impl Iterator for Enumeration<'_, '_> {
    type Item = LoopConfig;

    fn next(&mut self) -> Option<LoopConfig> {
        if self.next >= self.total {
            return None;
        }
        if self.next > 0 {
            let j = self.next.trailing_zeros() as usize;
            self.state.toggle_all(&self.ens.generators[j]);
        }
        self.next += 1;
        Some(self.state.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = (self.total - self.next) as usize;
        (r, Some(r))
    }
}

/// Normalised loop measure over an enumerated ensemble, indexed like
/// [`Ensemble::config_at`].
#[derive(Clone, Debug)]
pub struct ExactDistribution<T> {
    stats: Vec<(u32, u32)>,
    xpow: Vec<T>,
    npow: Vec<T>,
    z: T,
}

impl<T: Scalar> ExactDistribution<T> {
    pub fn new(ens: &Ensemble<'_>, p: &ModelParams<T>, cap_log2: u32) -> Result<Self> {
        let mut stats = vec![(0u32, 0u32); 0];
        let parts = ens.par_fold(
            cap_log2,
            Vec::new,
            |acc: &mut Vec<(u64, u32, u32)>, i, c| {
                let (e, l) = ens.stats(c);
                acc.push((i, e as u32, l as u32));
            },
            |mut a, mut b| {
                a.append(&mut b);
                a
            },
        )?;
        stats.resize(parts.len(), (0, 0));
        let mut max_e = 0;
        let mut max_l = 0;
        for (i, e, l) in parts {
            stats[i as usize] = (e, l);
            max_e = max_e.max(e as usize);
            max_l = max_l.max(l as usize);
        }
        let xpow: Vec<T> = (0..=max_e).map(|j| p.x.powu(j)).collect();
        let npow: Vec<T> = (0..=max_l).map(|j| p.n.powu(j)).collect();
        let mut z = T::zero();
        for &(e, l) in &stats {
            z = z + xpow[e as usize].clone() * npow[l as usize].clone();
        }
        Ok(ExactDistribution { stats, xpow, npow, z })
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    pub fn partition_function(&self) -> &T {
        &self.z
    }

    pub fn weight(&self, i: usize) -> T {
        let (e, l) = self.stats[i];
        self.xpow[e as usize].clone() * self.npow[l as usize].clone()
    }

    pub fn probability(&self, i: usize) -> T {
        self.weight(i) / self.z.clone()
    }

    /// `(|ω∩D|, ℓ)` of configuration `i`.
    pub fn stats(&self, i: usize) -> (usize, usize) {
        let (e, l) = self.stats[i];
        (e as usize, l as usize)
    }
}

struct Move {
    edges: Vec<usize>,
    set: FixedBitSet,
    vertices: Vec<usize>,
}

impl Move {
    fn new(region: &Region, set: FixedBitSet) -> Move {
        let edges: Vec<usize> = set.ones().collect();
        let mut vertices: Vec<usize> = edges.iter().flat_map(|&e| region.edge(e).ends).collect();
        vertices.sort_unstable();
        vertices.dedup();
        Move { edges, set, vertices }
    }
}

/// Lazy Metropolis chain proposing `ω ⊕ ∂f` for a uniform free face `f`;
/// with probability `h` the XOR with a global generator instead (a torus
/// homology generator, or the boundary of a hole of `D`).
pub struct Chain<'e, 'a> {
    ens: &'e Ensemble<'a>,
    ln_n: f64,
    ln_x: f64,
    state: LoopConfig,
    edges: usize,
    loops: usize,
    rng: ChaCha8Rng,
    tracer: LoopTracer,
    faces: Vec<Move>,
    homology: Vec<Move>,
    homology_prob: f64,
    steps: u64,
    proposals: u64,
    accepted: u64,
}

/// Steps between full recounts of the loop number.
const RECOUNT_PERIOD: u64 = 1 << 16;

impl<'e, 'a> Chain<'e, 'a> {
    pub fn new(ens: &'e Ensemble<'a>, p: &ModelParams<f64>, rng: ChaCha8Rng) -> Self {
        let region = ens.region;
        let faces = ens.free_faces.iter().map(|&f| Move::new(region, region.face_boundary(f))).collect();
        // torus homology generators, or the boundaries of holes in D
        let homology = match region.homology_generators() {
            Some(h) => h.iter().map(|g| Move::new(region, (*g).clone())).collect(),
            None => ens.generators[ens.free_faces.len()..].iter().map(|g| Move::new(region, g.clone())).collect(),
        };
        let state = ens.seed.clone();
        let (edges, loops) = ens.stats(&state);
        Chain {
            ens,
            ln_n: p.n.ln(),
            ln_x: p.x.ln(),
            state,
            edges,
            loops,
            rng,
            tracer: LoopTracer::new(region),
            faces,
            homology,
            homology_prob: HOMOLOGY_MOVE_PROB,
            steps: 0,
            proposals: 0,
            accepted: 0,
        }
    }

    /// Overrides the global-move probability (0 disables).
    pub fn with_homology_prob(mut self, h: f64) -> Self {
        self.homology_prob = h;
        self
    }

    /// Starts from a different configuration in the same ensemble.
    pub fn with_state(mut self, omega: LoopConfig) -> Self {
        let (e, l) = self.ens.stats(&omega);
        self.state = omega;
        self.edges = e;
        self.loops = l;
        self
    }

    pub fn state(&self) -> &LoopConfig {
        &self.state
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn loop_count(&self) -> usize {
        self.loops
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Accepted fraction of the non-holding steps.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Proposal count per sweep.
    pub fn sweep_len(&self) -> usize {
        self.faces.len()
    }

    /// `(Δ|ω|, Δℓ)` for XOR with the given move.
    fn delta(&mut self, mv: usize, homology: bool) -> (i64, i64) {
        let region = self.ens.region;
        let m = if homology { &self.homology[mv] } else { &self.faces[mv] };
        let shared = m.edges.iter().filter(|&&e| self.state.contains(e)).count() as i64;
        let de = m.edges.len() as i64 - 2 * shared;
        let before = self.tracer.loops_through(region, self.state.edges(), &m.vertices) as i64;
        self.state.toggle_all(&m.set);
        let after = self.tracer.loops_through(region, self.state.edges(), &m.vertices) as i64;
        self.state.toggle_all(&m.set);
        (de, after - before)
    }

    /// One Metropolis step; returns whether the proposal was accepted.
    pub fn step(&mut self) -> bool {
        if self.rng.gen::<f64>() < HOLD_PROB {
            self.steps += 1;
            return false;
        }
        let homology = !self.homology.is_empty() && self.homology_prob > 0.0 && self.rng.gen::<f64>() < self.homology_prob;
        let mv = if homology {
            self.rng.gen_range(0..self.homology.len())
        } else {
            self.rng.gen_range(0..self.faces.len())
        };
        let (de, dl) = self.delta(mv, homology);
        let log_ratio = dl as f64 * self.ln_n + de as f64 * self.ln_x;
        let accept = log_ratio >= 0.0 || self.rng.gen::<f64>() < log_ratio.exp();
        self.steps += 1;
        self.proposals += 1;
        if accept {
            let m = if homology { &self.homology[mv] } else { &self.faces[mv] };
            self.state.toggle_all(&m.set);
            self.edges = (self.edges as i64 + de) as usize;
            self.loops = (self.loops as i64 + dl) as usize;
            self.accepted += 1;
        }
        if self.proposals % RECOUNT_PERIOD == 0 {
            let (e, l) = self.ens.stats(&self.state);
            debug_assert_eq!((e, l), (self.edges, self.loops), "incremental bookkeeping drifted");
            self.edges = e;
            self.loops = l;
        }
        accept
    }

    pub fn sweep(&mut self) {
        for _ in 0..self.faces.len() {
            self.step();
        }
    }

    /// Default burn-in: `10·|faces|` sweeps.
    pub fn default_burn_in_sweeps(&self) -> usize {
        10 * self.faces.len()
    }

    /// Default thinning: `|faces|` steps.
    pub fn default_thinning(&self) -> usize {
        self.faces.len()
    }

    /// Burns in, then calls `visit` on `samples` states spaced `thin` steps apart.
    pub fn run<F: FnMut(&LoopConfig, usize, usize)>(&mut self, burn_in_sweeps: usize, thin: usize, samples: usize, mut visit: F) {
        for _ in 0..burn_in_sweeps {
            self.sweep();
        }
        for _ in 0..samples {
            for _ in 0..thin.max(1) {
                self.step();
            }
            visit(&self.state, self.edges, self.loops);
        }
    }

    /// Runs the chain and records a CSV trace `step,edges,loops,<flags>`.
    pub fn trace_csv<F>(&mut self, thin: usize, samples: usize, flag_names: &[&str], flags: F) -> String
    where
        F: Fn(&LoopConfig) -> Vec<bool>,
    {
        let mut out = String::from("step,edges,loops");
        for n in flag_names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for _ in 0..samples {
            for _ in 0..thin.max(1) {
                self.step();
            }
            out.push_str(&format!("{},{},{}", self.steps, self.edges, self.loops));
            for b in flags(&self.state) {
                out.push_str(if b { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

/// `(Δ|ω|, Δℓ)` for `ω ↦ ω ⊕ ∂f`, computed by local loop tracing.
pub fn acceptance_delta(ens: &Ensemble<'_>, omega: &LoopConfig, face: usize) -> (i64, i64) {
    let region = ens.region;
    let m = Move::new(region, region.face_boundary(face));
    let mut tracer = LoopTracer::new(region);
    let shared = m.edges.iter().filter(|&&e| omega.contains(e)).count() as i64;
    let before = tracer.loops_through(region, omega.edges(), &m.vertices) as i64;
    let mut flipped = omega.clone();
    flipped.toggle_all(&m.set);
    let after = tracer.loops_through(region, flipped.edges(), &m.vertices) as i64;
    (m.edges.len() as i64 - 2 * shared, after - before)
}
