//! Ising correspondence at `n = 1`, Edwards–Sokal couplings and FK marginals.
//!
//! Spins live on the dual vertices of a domain: region faces first, then
//! the outer faces, whose spins are the boundary condition `τ`. Dual edges
//! are indexed like primal edges.

use fixedbitset::FixedBitSet;
use num_traits::Float;
use petgraph::unionfind::UnionFind;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::coupling::find_defect_free_circuit;
use crate::error::{Error, Result};
use crate::hexlattice::{dual_domain, DualGraph, FaceCoord, Region};
use crate::loopcore::{check_even, decompose, domain_walls, domain_walls_raw, interior_faces, LoopConfig, SpinConfig};
use crate::scalar::Scalar;

/// `β = −½ log x`.
pub fn beta_from_x(x: f64) -> f64 {
    -0.5 * x.ln()
}

pub fn x_from_beta(beta: f64) -> f64 {
    (-2.0 * beta).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsingParams {
    pub beta: f64,
}

impl IsingParams {
    pub fn from_x(x: f64) -> Self {
        IsingParams { beta: beta_from_x(x) }
    }

    pub fn x(&self) -> f64 {
        x_from_beta(self.beta)
    }
}

fn require_domain(region: &Region) -> Result<()> {
    if region.is_torus() {
        Err(Error::TorusUnsupported)
    } else {
        Ok(())
    }
}

/// Spins with the outer faces set to `tau` and every region face set to `inner`.
pub fn boundary_spins(region: &Region, tau: &[i8], inner: i8) -> Result<SpinConfig> {
    let nf = region.face_count();
    if tau.len() != region.dual_vertex_count() - nf {
        return Err(Error::BoundarySpins(format!(
            "expected {} boundary spins, got {}",
            region.dual_vertex_count() - nf,
            tau.len()
        )));
    }
    let mut spins = vec![inner; nf];
    spins.extend_from_slice(tau);
    Ok(SpinConfig { spins })
}

/// `exp(β Σ σ_u σ_v)` over adjacent pairs with at least one face in the domain.
pub fn ising_weight<T: Float>(region: &Region, sigma: &SpinConfig, beta: T) -> T {
    let mut s: i64 = 0;
    for e in region.edges() {
        s += (sigma.spins[e.sides[0]] * sigma.spins[e.sides[1]]) as i64;
    }
    (beta * T::from(s).unwrap()).exp()
}

/// Number of disagreeing adjacent pairs.
pub fn disagreements(region: &Region, sigma: &SpinConfig) -> usize {
    region.edges().iter().filter(|e| sigma.spins[e.sides[0]] != sigma.spins[e.sides[1]]).count()
}

/// Iterates all spin configurations with boundary `tau`.
pub fn spin_configs(region: &Region, tau: &[i8]) -> Result<impl Iterator<Item = SpinConfig>> {
    let base = boundary_spins(region, tau, 1)?;
    let nf = region.face_count();
    if nf > 24 {
        return Err(Error::CapExceeded { needed: nf as u32, cap: 24 });
    }
    Ok((0u64..(1u64 << nf)).map(move |m| {
        let mut s = base.clone();
        for f in 0..nf {
            if m >> f & 1 == 1 {
                s.spins[f] = -1;
            }
        }
        s
    }))
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub configurations: usize,
    pub bijective: bool,
    pub max_abs_error: f64,
}

/// Exhaustive check that the Ising measure pushed forward by DW equals the
/// `n = 1` loop measure with the induced boundary condition.
///
/// The loop side is enumerated independently of DW: all edge subsets of the
/// domain when there are at most 20 edges, otherwise a parity-matched seed
/// XOR the span of the face boundaries.
pub fn loop_ising_equivalence_check(region: &Region, x: f64, tau: &[i8]) -> Result<EquivalenceReport> {
    require_domain(region)?;
    let beta = beta_from_x(x);
    let ne = region.edge_count();
    // parity demanded at each vertex by the outer spins
    let outer = boundary_spins(region, tau, 1)?;
    let parity = boundary_parity(region, &outer);
    let loop_side: Vec<FixedBitSet> = if ne <= 20 {
        (0u64..(1u64 << ne))
            .filter_map(|m| {
                let mut s = region.empty_edge_set();
                for e in 0..ne {
                    if m >> e & 1 == 1 {
                        s.insert(e);
                    }
                }
                let ok = (0..region.vertex_count()).all(|v| {
                    let d = region.edges_of_vertex(v).unwrap().iter().filter(|&&e| s.contains(e)).count();
                    d % 2 == parity[v] as usize
                });
                ok.then_some(s)
            })
            .collect()
    } else {
        let seed = parity_seed(region, &parity)?;
        let nf = region.face_count();
        (0u64..(1u64 << nf))
            .map(|m| {
                let mut s = seed.clone();
                for f in 0..nf {
                    if m >> f & 1 == 1 {
                        s.symmetric_difference_with(&region.face_boundary(f));
                    }
                }
                s
            })
            .collect()
    };
    let zl: f64 = loop_side.iter().map(|s| x.powi(s.count_ones(..) as i32)).sum();
    let mut ising_mass: std::collections::HashMap<FixedBitSet, f64> = std::collections::HashMap::new();
    let mut zi = 0.0;
    let mut count = 0;
    for sigma in spin_configs(region, tau)? {
        let w = ising_weight(region, &sigma, beta);
        zi += w;
        count += 1;
        *ising_mass.entry(domain_walls_raw(region, &sigma)?).or_insert(0.0) += w;
    }
    let bijective = ising_mass.len() == count
        && count == loop_side.len()
        && loop_side.iter().all(|s| ising_mass.contains_key(s));
    let mut max_err: f64 = 0.0;
    for s in &loop_side {
        let pl = x.powi(s.count_ones(..) as i32) / zl;
        let pi = ising_mass.get(s).copied().unwrap_or(0.0) / zi;
        max_err = max_err.max((pl - pi).abs());
    }
    Ok(EquivalenceReport { configurations: count, bijective, max_abs_error: max_err })
}

/// Degree parity at each vertex forced by external edges whose two outer
/// faces carry different spins.
fn boundary_parity(region: &Region, outer: &SpinConfig) -> Vec<u8> {
    let nf = region.face_count();
    let mut parity = vec![0u8; region.vertex_count()];
    for (v, key) in region.vertices().iter().enumerate() {
        let ids: Vec<Option<usize>> = key.faces().iter().map(|&f| region.dual_vertex_id(f)).collect();
        if ids.iter().filter(|i| matches!(i, Some(j) if *j < nf)).count() != 1 {
            continue;
        }
        let outs: Vec<usize> = ids.into_iter().flatten().filter(|&j| j >= nf).collect();
        if outs.len() == 2 && outer.spins[outs[0]] != outer.spins[outs[1]] {
            parity[v] = 1;
        }
    }
    parity
}

/// Some edge set with the given vertex parities, built by pairing odd
/// vertices along the boundary cycle.
fn parity_seed(region: &Region, parity: &[u8]) -> Result<FixedBitSet> {
    let boundary: FixedBitSet = region.boundary_edges().iter().copied().collect();
    let mut order = Vec::new();
    let start = region.edge(region.boundary_edges()[0]).ends[0];
    let (mut cur, mut last) = (start, usize::MAX);
    loop {
        order.push(cur);
        let next = region
            .vertex_edges_raw(cur)
            .iter()
            .copied()
            .find(|&e| e != last && boundary.contains(e))
            .expect("boundary is a cycle");
        let (nv, ne) = (region.other_end(next, cur), next);
        last = ne;
        cur = nv;
        if cur == start {
            break;
        }
    }
    let mut edges_in_order = Vec::new();
    for i in 0..order.len() {
        let (a, b) = (order[i], order[(i + 1) % order.len()]);
        let e = region
            .vertex_edges_raw(a)
            .iter()
            .copied()
            .find(|&e| boundary.contains(e) && region.other_end(e, a) == b)
            .unwrap();
        edges_in_order.push(e);
    }
    let mut s = FixedBitSet::with_capacity(region.edge_count());
    let mut open = false;
    for (i, &v) in order.iter().enumerate() {
        if parity[v] == 1 {
            open = !open;
        }
        if open {
            s.insert(edges_in_order[i]);
        }
    }
    if open {
        return Err(Error::BoundarySpins("odd number of boundary sign changes".into()));
    }
    Ok(s)
}

/// Free and wired cluster counts `(k⁰, k¹)` of `η` on `D*`.
pub fn cluster_counts(dual: &DualGraph, eta: &FixedBitSet) -> (usize, usize) {
    let mut uf = UnionFind::<usize>::new(dual.vertex_count + 1);
    for e in eta.ones() {
        let [a, b] = dual.ends[e];
        uf.union(a, b);
    }
    let k0 = (0..dual.vertex_count).filter(|&v| uf.find(v) == v).count();
    let virt = dual.vertex_count;
    for v in dual.boundary_vertices() {
        uf.union(v, virt);
    }
    let k1 = (0..=dual.vertex_count).filter(|&v| uf.find(v) == v).count();
    (k0, k1)
}

/// Clusters of `η` that contain no boundary dual vertex.
pub fn interior_clusters(dual: &DualGraph, eta: &FixedBitSet) -> usize {
    cluster_counts(dual, eta).1 - 1
}

/// Wired FK weight `(1/x − 1)^{|η|} 2^{k¹(η)}`.
pub fn fk_weight_ferro<T: Scalar>(dual: &DualGraph, eta: &FixedBitSet, x: &T) -> T {
    let a = T::one() / x.clone() - T::one();
    let k1 = cluster_counts(dual, eta).1;
    a.powu(eta.count_ones(..)) * T::from_u64(2).unwrap().powu(k1)
}

/// Antiferromagnetic FK weight `(x − 1)^{|η|} 2^{k(η)} 1[Bip_τ(η)]`, where
/// `k(η)` counts the clusters free of boundary vertices (the ones whose
/// colouring is not fixed by `τ`).
pub fn fk_weight_antiferro<T: Scalar>(dual: &DualGraph, eta: &FixedBitSet, x: &T, tau: &[i8]) -> T {
    if !is_bipartite_with_boundary(dual, eta, tau) {
        return T::zero();
    }
    let a = x.clone() - T::one();
    a.powu(eta.count_ones(..)) * T::from_u64(2).unwrap().powu(interior_clusters(dual, eta))
}

/// Whether `η` admits a proper ±1 colouring agreeing with `tau` on the
/// boundary dual vertices.
pub fn is_bipartite_with_boundary(dual: &DualGraph, eta: &FixedBitSet, tau: &[i8]) -> bool {
    let n = dual.vertex_count;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in eta.ones() {
        let [a, b] = dual.ends[e];
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut colour = vec![0i8; n];
    let mut order: Vec<usize> = dual.boundary_vertices().collect();
    for v in dual.boundary_vertices() {
        colour[v] = tau[v - dual.interior];
    }
    order.extend(0..dual.interior);
    for s in order {
        if colour[s] == 0 {
            colour[s] = 1;
        }
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if colour[w] == 0 {
                    colour[w] = -colour[u];
                    stack.push(w);
                } else if colour[w] == colour[u] {
                    return false;
                }
            }
        }
    }
    true
}

/// `(1/x − 1)^{|η|} Π_{e∈η} 1[σ_u = σ_v]`.
pub fn es_weight_ferro<T: Scalar>(dual: &DualGraph, sigma: &SpinConfig, eta: &FixedBitSet, x: &T) -> T {
    if eta.ones().any(|e| sigma.spins[dual.ends[e][0]] != sigma.spins[dual.ends[e][1]]) {
        return T::zero();
    }
    (T::one() / x.clone() - T::one()).powu(eta.count_ones(..))
}

/// `(x − 1)^{|η|} Π_{e∈η} 1[σ_u ≠ σ_v]`.
pub fn es_weight_antiferro<T: Scalar>(dual: &DualGraph, sigma: &SpinConfig, eta: &FixedBitSet, x: &T) -> T {
    if eta.ones().any(|e| sigma.spins[dual.ends[e][0]] == sigma.spins[dual.ends[e][1]]) {
        return T::zero();
    }
    (x.clone() - T::one()).powu(eta.count_ones(..))
}

fn all_eta(ne: usize) -> Result<impl Iterator<Item = FixedBitSet>> {
    if ne > 24 {
        return Err(Error::CapExceeded { needed: ne as u32, cap: 24 });
    }
    Ok((0u64..(1u64 << ne)).map(move |m| {
        let mut s = FixedBitSet::with_capacity(ne);
        for e in 0..ne {
            if m >> e & 1 == 1 {
                s.insert(e);
            }
        }
        s
    }))
}

fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    let za = a.iter().cloned().fold(T::zero(), |s, v| s + v);
    let zb = b.iter().cloned().fold(T::zero(), |s, v| s + v);
    let mut m = T::zero();
    for (u, v) in a.iter().zip(b) {
        let d = (u.clone() / za.clone() - v.clone() / zb.clone()).abs_val();
        m = T::max_val(m, d);
    }
    m
}

#[derive(Clone, Debug)]
pub struct EsReport<T> {
    /// `Σ_η ES(σ,η)` against the Ising weight, as normalised distributions.
    pub spin_marginal_error: T,
    /// `Σ_σ ES(σ,η)` against the FK weight formula.
    pub fk_marginal_error: T,
}

/// Exhaustive check of both marginals of the ferromagnetic (`x ≤ 1`) or
/// antiferromagnetic (`x ≥ 1`) coupling. The Ising weight is taken in the
/// form `x^{#disagreeing pairs}`, proportional to `exp(β Σ σ_u σ_v)`.
pub fn es_consistency_check<T: Scalar>(region: &Region, x: &T, tau: &[i8], antiferro: bool) -> Result<EsReport<T>> {
    require_domain(region)?;
    let dual = dual_domain(region);
    let sigmas: Vec<SpinConfig> = spin_configs(region, tau)?.collect();
    let etas: Vec<FixedBitSet> = all_eta(region.edge_count())?.collect();
    let es = |s: &SpinConfig, e: &FixedBitSet| {
        if antiferro {
            es_weight_antiferro(&dual, s, e, x)
        } else {
            es_weight_ferro(&dual, s, e, x)
        }
    };
    let spin_side: Vec<T> = sigmas
        .iter()
        .map(|s| etas.iter().fold(T::zero(), |acc, e| acc + es(s, e)))
        .collect();
    let ising: Vec<T> = sigmas.iter().map(|s| x.powu(disagreements(region, s))).collect();
    let eta_side: Vec<T> = etas
        .iter()
        .map(|e| sigmas.iter().fold(T::zero(), |acc, s| acc + es(s, e)))
        .collect();
    let fk: Vec<T> = etas
        .iter()
        .map(|e| if antiferro { fk_weight_antiferro(&dual, e, x, tau) } else { fk_weight_ferro(&dual, e, x) })
        .collect();
    Ok(EsReport { spin_marginal_error: max_abs_diff(&spin_side, &ising), fk_marginal_error: max_abs_diff(&eta_side, &fk) })
}

#[derive(Clone, Debug)]
pub struct RelationReport<T> {
    /// `max_η |φ^τ_x(η) − φ^1_{1/x}(η | Bip)|`.
    pub max_abs_error: T,
    /// Decreasing events tested and whether `φ^τ_x(D) ≥ φ^1_{1/x}(D)` held for each.
    pub decreasing_events: Vec<(String, bool)>,
}

/// Exact check of the antiferromagnetic/ferromagnetic FK relation for `x > 1`.
pub fn antiferro_ferro_relation_check<T: Scalar>(region: &Region, x: &T, tau: &[i8]) -> Result<RelationReport<T>> {
    require_domain(region)?;
    if !(*x > T::one()) {
        return Err(Error::Parameter("relation check needs x > 1".into()));
    }
    let dual = dual_domain(region);
    let ne = region.edge_count();
    let etas: Vec<FixedBitSet> = all_eta(ne)?.collect();
    let inv = T::one() / x.clone();
    let anti: Vec<T> = etas.iter().map(|e| fk_weight_antiferro(&dual, e, x, tau)).collect();
    let ferro: Vec<T> = etas.iter().map(|e| fk_weight_ferro(&dual, e, &inv)).collect();
    let cond: Vec<T> = etas
        .iter()
        .zip(&ferro)
        .map(|(e, w)| if is_bipartite_with_boundary(&dual, e, tau) { w.clone() } else { T::zero() })
        .collect();
    let max_abs_error = max_abs_diff(&anti, &cond);
    let za = anti.iter().cloned().fold(T::zero(), |s, v| s + v);
    let zf = ferro.iter().cloned().fold(T::zero(), |s, v| s + v);
    let prob = |ws: &[T], z: &T, ev: &dyn Fn(&FixedBitSet) -> bool| -> T {
        etas.iter().zip(ws).filter(|(e, _)| ev(e)).fold(T::zero(), |s, (_, w)| s + w.clone()) / z.clone()
    };
    let mut events: Vec<(String, Box<dyn Fn(&FixedBitSet) -> bool>)> = vec![
        ("eta empty".into(), Box::new(|e: &FixedBitSet| e.is_clear())),
        ("bipartite".into(), Box::new(|e: &FixedBitSet| is_bipartite_with_boundary(&dual, e, tau))),
    ];
    for j in 1..ne.min(4) {
        events.push((format!("|eta| <= {j}"), Box::new(move |e: &FixedBitSet| e.count_ones(..) <= j)));
    }
    for e0 in 0..ne.min(3) {
        events.push((format!("edge {e0} closed"), Box::new(move |e: &FixedBitSet| !e.contains(e0))));
    }
    let decreasing_events = events
        .iter()
        .map(|(name, ev)| {
            let a = prob(&anti, &za, ev.as_ref());
            let f = prob(&ferro, &zf, ev.as_ref());
            // float ties when Bip is certain
            let ok = a >= f || (f.clone() - a.clone()).to_f64_lossy() < 1e-12;
            (name.clone(), ok)
        })
        .collect();
    Ok(RelationReport { max_abs_error, decreasing_events })
}

/// Alternating conditional sampler for the Edwards–Sokal pair.
///
/// Given `σ`, each edge is included with probability `1 − x` on agreeing
/// pairs (`x < 1`) or `1 − 1/x` on disagreeing pairs (`x > 1`). Given `η`,
/// every cluster without boundary vertices has its spins flipped with
/// probability 1/2.
pub struct EsChain<'r> {
    region: &'r Region,
    dual: DualGraph,
    x: f64,
    pub sigma: SpinConfig,
    pub eta: FixedBitSet,
    rng: ChaCha8Rng,
}

impl<'r> EsChain<'r> {
    pub fn new(region: &'r Region, x: f64, tau: &[i8], rng: ChaCha8Rng) -> Result<Self> {
        require_domain(region)?;
        if !(x > 0.0) {
            return Err(Error::Parameter("x must be positive".into()));
        }
        let sigma = boundary_spins(region, tau, 1)?;
        Ok(EsChain { region, dual: dual_domain(region), x, sigma, eta: region.empty_edge_set(), rng })
    }

    pub fn region(&self) -> &Region {
        self.region
    }

    pub fn dual(&self) -> &DualGraph {
        &self.dual
    }

    pub fn resample_eta(&mut self) {
        let x = self.x;
        self.eta.clear();
        for (id, ends) in self.dual.ends.iter().enumerate() {
            let agree = self.sigma.spins[ends[0]] == self.sigma.spins[ends[1]];
            let p = if x < 1.0 && agree {
                1.0 - x
            } else if x > 1.0 && !agree {
                1.0 - 1.0 / x
            } else {
                0.0
            };
            if p > 0.0 && self.rng.gen::<f64>() < p {
                self.eta.insert(id);
            }
        }
    }

    pub fn resample_sigma(&mut self) {
        let n = self.dual.vertex_count;
        let mut uf = UnionFind::<usize>::new(n + 1);
        for e in self.eta.ones() {
            uf.union(self.dual.ends[e][0], self.dual.ends[e][1]);
        }
        for v in self.dual.boundary_vertices() {
            uf.union(v, n);
        }
        let fixed = uf.find(n);
        let mut flip = vec![0u8; n + 1];
        for v in 0..self.dual.interior {
            let r = uf.find(v);
            if r == fixed {
                continue;
            }
            if flip[r] == 0 {
                flip[r] = if self.rng.gen::<bool>() { 2 } else { 1 };
            }
            if flip[r] == 2 {
                self.sigma.spins[v] = -self.sigma.spins[v];
            }
        }
    }

    pub fn step(&mut self) {
        self.resample_eta();
        self.resample_sigma();
    }

    pub fn es_weight(&self) -> f64 {
        if self.x <= 1.0 {
            es_weight_ferro(&self.dual, &self.sigma, &self.eta, &self.x)
        } else {
            es_weight_antiferro(&self.dual, &self.sigma, &self.eta, &self.x)
        }
    }
}

/// Outcome of one sample of the antiferromagnetic XOR experiment.
#[derive(Clone, Debug, Default)]
pub struct AntiferroSample {
    pub surrounded_gt_k: bool,
    pub surrounded_ge_k: bool,
    pub circ_k: bool,
    pub xor_ok: bool,
    pub weight_preserved: bool,
}

/// Whether `ω` has a loop surrounding `f` with diameter at least `min_diam`.
pub fn has_surrounding_loop(region: &Region, omega: &LoopConfig, f: FaceCoord, min_diam: u32) -> bool {
    decompose(region, omega)
        .iter()
        .any(|l| l.diameter(region).is_ok_and(|d| d >= min_diam) && l.surrounds(region, f).unwrap_or(false))
}

/// Evaluates the events of the XOR argument on the current state of an ES
/// chain on `Λ_{2k}(0)`: surrounding loops of `DW(σ)`, the outermost
/// `η`-avoiding circuit in the annulus around `Λ_k(0)`, and the spin flip
/// inside it.
pub fn antiferro_xor_sample(chain: &EsChain<'_>, k: u32) -> Result<AntiferroSample> {
    let region = chain.region;
    let origin = FaceCoord::ORIGIN;
    let omega = domain_walls(region, &chain.sigma)?;
    let mut out = AntiferroSample {
        surrounded_gt_k: has_surrounding_loop(region, &omega, origin, k + 1),
        surrounded_ge_k: has_surrounding_loop(region, &omega, origin, k),
        xor_ok: true,
        weight_preserved: true,
        ..Default::default()
    };
    let protect = region.ball_faces(origin, k + 1);
    if let Some(c) = find_defect_free_circuit(region, &chain.eta, &protect, None)? {
        out.circ_k = true;
        let inside = interior_faces(region, &c.set)?;
        let mut flipped = chain.sigma.clone();
        for (f, &ins) in inside.iter().enumerate() {
            if ins {
                flipped.spins[f] = -flipped.spins[f];
            }
        }
        let w0 = chain.es_weight();
        let w1 = if chain.x <= 1.0 {
            es_weight_ferro(&chain.dual, &flipped, &chain.eta, &chain.x)
        } else {
            es_weight_antiferro(&chain.dual, &flipped, &chain.eta, &chain.x)
        };
        out.weight_preserved = w0 == w1;
        let omega2 = domain_walls(region, &flipped)?;
        debug_assert!(check_even(region, omega2.edges()).is_ok());
        out.xor_ok = omega2 == omega.xor(region, &c.set)?
            && (out.surrounded_ge_k || has_surrounding_loop(region, &omega2, origin, k));
    }
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct AntiferroEstimate {
    pub trials: usize,
    pub surrounded_gt_k: usize,
    pub surrounded_ge_k: usize,
    pub circ_k: usize,
    pub xor_failures: usize,
    pub weight_failures: usize,
}

impl AntiferroEstimate {
    pub fn surround_frequency(&self) -> f64 {
        self.surrounded_gt_k as f64 / self.trials.max(1) as f64
    }

    pub fn circ_frequency(&self) -> f64 {
        self.circ_k as f64 / self.trials.max(1) as f64
    }
}

/// Runs the ES chain on `Λ_{2k}(0)` with plus boundary and evaluates
/// [`antiferro_xor_sample`] every `thin` steps after `burn_in` steps.
pub fn antiferro_xor_experiment(
    k: u32,
    x: f64,
    trials: usize,
    burn_in: usize,
    thin: usize,
    rng: ChaCha8Rng,
) -> Result<AntiferroEstimate> {
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    let region = Region::ball(FaceCoord::ORIGIN, 2 * k);
    let tau = vec![1i8; region.dual_vertex_count() - region.face_count()];
    let mut chain = EsChain::new(&region, x, &tau, rng)?;
    for _ in 0..burn_in {
        chain.step();
    }
    let mut est = AntiferroEstimate::default();
    for _ in 0..trials {
        for _ in 0..thin.max(1) {
            chain.step();
        }
        let s = antiferro_xor_sample(&chain, k)?;
        est.trials += 1;
        est.surrounded_gt_k += s.surrounded_gt_k as usize;
        est.surrounded_ge_k += s.surrounded_ge_k as usize;
        est.circ_k += s.circ_k as usize;
        est.xor_failures += (!s.xor_ok) as usize;
        est.weight_failures += (!s.weight_preserved) as usize;
    }
    Ok(est)
}
