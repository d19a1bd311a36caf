//! Red/blue loop colourings, defect edges, the triple measure and
//! defect-free circuit detection.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hexlattice::Region;
use crate::loopcore::{count_loops, decompose, Loop, LoopConfig};
use crate::sampler::{Ensemble, ModelParams};
use crate::scalar::{binomial, Scalar};

/// Red and blue loops of one configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredConfig {
    pub red: LoopConfig,
    pub blue: LoopConfig,
}

impl ColoredConfig {
    pub fn union(&self) -> LoopConfig {
        self.red.xor_config(&self.blue)
    }
}

/// `(ω_r, ω_b, η)`: red loops, blue loops and defect edges, pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherentTriple {
    pub red: LoopConfig,
    pub blue: LoopConfig,
    pub eta: FixedBitSet,
}

impl CoherentTriple {
    pub fn new(red: LoopConfig, blue: LoopConfig, eta: FixedBitSet) -> Result<Self> {
        if !red.edges().is_disjoint(blue.edges()) {
            return Err(Error::Parameter("red and blue loops share an edge".into()));
        }
        if !eta.is_disjoint(red.edges()) || !eta.is_disjoint(blue.edges()) {
            return Err(Error::Parameter("defect edges meet a loop".into()));
        }
        Ok(CoherentTriple { red, blue, eta })
    }

    pub fn union(&self) -> LoopConfig {
        self.red.xor_config(&self.blue)
    }

    /// `ω_b ∪ η`.
    pub fn blocked(&self) -> FixedBitSet {
        let mut b = self.eta.clone();
        b.union_with(self.blue.edges());
        b
    }
}

/// A simple cycle of edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub edges: Vec<usize>,
    pub vertices: Vec<usize>,
    pub set: FixedBitSet,
}

impl Circuit {
    fn from_loop(region: &Region, l: Loop) -> Circuit {
        let set = l.edge_set(region);
        Circuit { edges: l.edges, vertices: l.vertices, set }
    }

    pub fn as_loop(&self) -> Loop {
        Loop { edges: self.edges.clone(), vertices: self.vertices.clone() }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Colours each loop meeting `D` blue with probability `(n−1)/n`.
pub fn color_loops<R: Rng>(ens: &Ensemble<'_>, omega: &LoopConfig, n: f64, rng: &mut R) -> Result<ColoredConfig> {
    if !(n >= 1.0) {
        return Err(Error::Parameter(format!("colouring needs n >= 1, got {n}")));
    }
    let region = ens.region();
    let pb = (n - 1.0) / n;
    let mut red = region.empty_edge_set();
    let mut blue = region.empty_edge_set();
    for l in decompose(region, omega) {
        let meets = !ens.is_restricted() || l.edges.iter().any(|&e| ens.d_edges().contains(e));
        let target = if meets && rng.gen::<f64>() < pb { &mut blue } else { &mut red };
        for e in l.edges {
            target.insert(e);
        }
    }
    Ok(ColoredConfig {
        red: LoopConfig::from_even_unchecked(red),
        blue: LoopConfig::from_even_unchecked(blue),
    })
}

/// Independent `(1−x)`-percolation on the edges of `D` outside `ω`.
pub fn sample_eta<R: Rng>(ens: &Ensemble<'_>, omega: &LoopConfig, x: f64, rng: &mut R) -> Result<FixedBitSet> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Parameter(format!("defect edges need 0 < x <= 1, got {x}")));
    }
    let mut eta = ens.region().empty_edge_set();
    for e in ens.d_edges().ones() {
        if !omega.contains(e) && rng.gen::<f64>() < 1.0 - x {
            eta.insert(e);
        }
    }
    Ok(eta)
}

/// `(n−1)^{ℓ(ω_b)} (1/x − 1)^{|η|}`, with `0^0 = 1`.
pub fn triple_weight<T: Scalar>(ens: &Ensemble<'_>, t: &CoherentTriple, p: &ModelParams<T>) -> T {
    let within = ens.is_restricted().then(|| ens.d_edges());
    let blue_loops = count_loops(ens.region(), t.blue.edges(), within);
    let a = T::one() / p.x.clone() - T::one();
    (p.n.clone() - T::one()).powu(blue_loops) * a.powu(t.eta.count_ones(..))
}

#[derive(Clone, Debug)]
pub struct MarginalReport<T> {
    /// Number of configurations compared.
    pub groups: usize,
    /// Ratio of the grouped triple sum to `x^{|ω|} n^{ℓ(ω)}` for the first configuration.
    pub constant: T,
    /// Largest `|ratio/constant − 1|` over all configurations.
    pub max_relative_error: T,
}

/// Sums triple weights grouped by `ω_r ∪ ω_b` and compares with the loop
/// weight. Defect sets are enumerated one by one when `D ∖ ω` has at most
/// `EXHAUSTIVE_ETA` edges and by size class otherwise.
pub fn marginal_check<T: Scalar>(ens: &Ensemble<'_>, p: &ModelParams<T>, cap_log2: u32) -> Result<MarginalReport<T>> {
    const EXHAUSTIVE_ETA: usize = 16;
    let d_size = ens.d_edges().count_ones(..);
    let a = T::one() / p.x.clone() - T::one();
    let nb = p.n.clone() - T::one();
    let mut constant: Option<T> = None;
    let mut max_err = T::zero();
    let mut groups = 0;
    for omega in ens.enumerate(cap_log2)? {
        let (e, l) = ens.stats(&omega);
        // colourings
        let mut colour_sum = T::zero();
        for mask in 0u64..(1u64 << l) {
            colour_sum = colour_sum + nb.powu(mask.count_ones() as usize);
        }
        let m = d_size - e;
        let mut eta_sum = T::zero();
        if m <= EXHAUSTIVE_ETA {
            let apow: Vec<T> = (0..=m).map(|j| a.powu(j)).collect();
            for mask in 0u64..(1u64 << m) {
                eta_sum = eta_sum + apow[mask.count_ones() as usize].clone();
            }
        } else {
            for j in 0..=m {
                eta_sum = eta_sum + binomial::<T>(m, j) * a.powu(j);
            }
        }
        let ratio = colour_sum * eta_sum / p.weight(e, l);
        match &constant {
            None => constant = Some(ratio),
            Some(c) => {
                let err = ((ratio / c.clone()) - T::one()).abs_val();
                max_err = T::max_val(max_err, err);
            }
        }
        groups += 1;
    }
    Ok(MarginalReport { groups, constant: constant.unwrap_or_else(T::one), max_relative_error: max_err })
}

/// Outermost circuit avoiding `blocked` that surrounds every face in
/// `protect` and stays inside `search` (default: the whole domain).
///
/// Faces reachable from outside `search` by crossing blocked edges cannot lie
/// inside such a circuit; the circuit exists iff `protect` avoids that set,
/// and then the boundary of the component of `protect` in the complement is
/// the outermost one.
pub fn find_defect_free_circuit(
    region: &Region,
    blocked: &FixedBitSet,
    protect: &[usize],
    search: Option<&[usize]>,
) -> Result<Option<Circuit>> {
    if region.is_torus() {
        return Err(Error::TorusUnsupported);
    }
    if protect.is_empty() {
        return Err(Error::Parameter("protect set is empty".into()));
    }
    let nf = region.face_count();
    let nd = region.dual_vertex_count();
    let mut in_search = vec![search.is_none(); nf];
    if let Some(s) = search {
        for &f in s {
            in_search[f] = true;
        }
    }
    if protect.iter().any(|&f| f >= nf || !in_search[f]) {
        return Err(Error::Parameter("protect must lie inside the search region".into()));
    }
    let adj = dual_adjacency(region);
    let mut outside = vec![false; nd];
    let mut q = VecDeque::new();
    for v in 0..nd {
        if v >= nf || !in_search[v] {
            outside[v] = true;
            q.push_back(v);
        }
    }
    while let Some(u) = q.pop_front() {
        for &(w, e) in &adj[u] {
            if !outside[w] && blocked.contains(e) {
                outside[w] = true;
                q.push_back(w);
            }
        }
    }
    if protect.iter().any(|&f| outside[f]) {
        return Ok(None);
    }
    let mut inside = vec![false; nd];
    inside[protect[0]] = true;
    let mut q = VecDeque::from([protect[0]]);
    while let Some(u) = q.pop_front() {
        for &(w, _) in &adj[u] {
            if !outside[w] && !inside[w] {
                inside[w] = true;
                q.push_back(w);
            }
        }
    }
    if protect.iter().any(|&f| !inside[f]) {
        return Ok(None);
    }
    let mut set = region.empty_edge_set();
    for (id, e) in region.edges().iter().enumerate() {
        if inside[e.sides[0]] != inside[e.sides[1]] {
            set.insert(id);
        }
    }
    let omega = LoopConfig::from_even_unchecked(set);
    let mut loops = decompose(region, &omega);
    debug_assert_eq!(loops.len(), 1, "boundary of a simply connected face set");
    Ok(Some(Circuit::from_loop(region, loops.swap_remove(0))))
}

fn dual_adjacency(region: &Region) -> Vec<Vec<(usize, usize)>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); region.dual_vertex_count()];
    for (id, e) in region.edges().iter().enumerate() {
        adj[e.sides[0]].push((e.sides[1], id));
        adj[e.sides[1]].push((e.sides[0], id));
    }
    adj
}

/// Whether every face in `faces` lies inside the simple cycle `edges`.
pub fn circuit_surrounds(region: &Region, circuit: &Circuit, faces: &[usize]) -> bool {
    faces
        .iter()
        .all(|&f| crate::loopcore::surrounds_unchecked(region, &circuit.edges, region.face(f)))
}

/// Replaces `ω_r` by `ω_r ⊕ Γ` for a defect-free circuit `Γ`.
pub fn xor_resample(t: &CoherentTriple, gamma: &Circuit) -> Result<CoherentTriple> {
    if !gamma.set.is_disjoint(t.blue.edges()) || !gamma.set.is_disjoint(&t.eta) {
        return Err(Error::BlockedCircuit);
    }
    let mut red = t.red.clone();
    red.toggle_all(&gamma.set);
    Ok(CoherentTriple { red, blue: t.blue.clone(), eta: t.eta.clone() })
}

#[derive(Clone, Debug)]
pub struct MonotonicityReport<T> {
    pub red_probability: T,
    pub blue_probability: T,
    pub holds: bool,
}

/// Exact comparison `ρ[ω_r ∈ A] ≥ ρ[ω_b ∈ A]` on an enumerable torus with
/// `x = 1`. The event is first checked to be increasing on the enumerated
/// configurations.
pub fn monotonicity_check<T, A>(ens: &Ensemble<'_>, n: &T, event: A, cap_log2: u32) -> Result<MonotonicityReport<T>>
where
    T: Scalar,
    A: Fn(&FixedBitSet) -> bool,
{
    let region = ens.region();
    if !region.is_torus() {
        return Err(Error::InvalidRegion("monotonicity check runs on a torus".into()));
    }
    if *n < T::one() || *n > T::from_ratio(2, 1) {
        return Err(Error::Parameter("monotonicity check needs n in [1,2]".into()));
    }
    let configs: Vec<LoopConfig> = ens.enumerate(cap_log2)?.collect();
    let values: Vec<bool> = configs.iter().map(|c| event(c.edges())).collect();
    for (i, a) in configs.iter().enumerate() {
        if !values[i] {
            continue;
        }
        for (j, b) in configs.iter().enumerate() {
            if !values[j] && a.edges().is_subset(b.edges()) {
                return Err(Error::NotMonotone);
            }
        }
    }
    let nb = n.clone() - T::one();
    let mut z = T::zero();
    let mut red_hit = T::zero();
    let mut blue_hit = T::zero();
    for omega in &configs {
        let loops = decompose(region, omega);
        let l = loops.len();
        for mask in 0u64..(1u64 << l) {
            let mut red = region.empty_edge_set();
            let mut blue = region.empty_edge_set();
            for (i, lp) in loops.iter().enumerate() {
                let target = if mask >> i & 1 == 1 { &mut blue } else { &mut red };
                for &e in &lp.edges {
                    target.insert(e);
                }
            }
            let w = nb.powu(mask.count_ones() as usize);
            if event(&red) {
                red_hit = red_hit + w.clone();
            }
            if event(&blue) {
                blue_hit = blue_hit + w.clone();
            }
            z = z + w;
        }
    }
    let red_probability = red_hit / z.clone();
    let blue_probability = blue_hit / z;
    let holds = red_probability >= blue_probability;
    Ok(MonotonicityReport { red_probability, blue_probability, holds })
}

/// A non-contractible circuit avoiding one colour.
#[derive(Clone, Debug)]
pub struct DualityWitness {
    pub circuit: Circuit,
    /// `true` if the circuit avoids the blue loops, `false` if it avoids the red ones.
    pub blue_free: bool,
    pub class: (i64, i64),
}

/// Finds a blue-free, else a red-free, non-contractible circuit on a torus.
pub fn torus_duality_check(region: &Region, colored: &ColoredConfig) -> Result<Option<DualityWitness>> {
    if !region.is_torus() {
        return Err(Error::InvalidRegion("duality check runs on a torus".into()));
    }
    for (avoid, blue_free) in [(colored.blue.edges(), true), (colored.red.edges(), false)] {
        if let Some(c) = non_contractible_cycle_avoiding(region, avoid)? {
            let class = c.as_loop().homology_class(region)?;
            return Ok(Some(DualityWitness { circuit: c, blue_free, class }));
        }
    }
    Ok(None)
}

/// A simple non-contractible cycle in the subgraph of edges outside
/// `avoid`, found among the fundamental cycles of a BFS forest carrying
/// homology displacements.
pub fn non_contractible_cycle_avoiding(region: &Region, avoid: &FixedBitSet) -> Result<Option<Circuit>> {
    let t = region.torus_data_ref().ok_or(Error::InvalidRegion("not a torus".into()))?;
    let nv = region.vertex_count();
    let cross = |e: usize, to: usize| -> (i64, i64) {
        let d = if t.up_end[e] == to { 1 } else { -1 };
        (d * t.cut_sign_a[e] as i64, d * t.cut_sign_b[e] as i64)
    };
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
    let mut disp = vec![(0i64, 0i64); nv];
    let mut depth = vec![usize::MAX; nv];
    let mut tree = region.empty_edge_set();
    for root in 0..nv {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut q = VecDeque::from([root]);
        let mut order = Vec::new();
        while let Some(u) = q.pop_front() {
            order.push(u);
            for &e in region.vertex_edges_raw(u) {
                if avoid.contains(e) {
                    continue;
                }
                let w = region.other_end(e, u);
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some((u, e));
                    let c = cross(e, w);
                    disp[w] = (disp[u].0 + c.0, disp[u].1 + c.1);
                    tree.insert(e);
                    q.push_back(w);
                }
            }
        }
        for &u in &order {
            for &e in region.vertex_edges_raw(u) {
                if avoid.contains(e) || tree.contains(e) {
                    continue;
                }
                let w = region.other_end(e, u);
                let c = cross(e, w);
                let class = (disp[u].0 + c.0 - disp[w].0, disp[u].1 + c.1 - disp[w].1);
                if class != (0, 0) {
                    return Ok(Some(fundamental_cycle(region, &parent, &depth, u, w, e)));
                }
            }
        }
    }
    Ok(None)
}

fn fundamental_cycle(
    region: &Region,
    parent: &[Option<(usize, usize)>],
    depth: &[usize],
    u: usize,
    w: usize,
    e: usize,
) -> Circuit {
    let mut a = u;
    let mut b = w;
    let mut path_a = Vec::new(); // edges from u up to the common ancestor
    let mut path_b = Vec::new();
    while depth[a] > depth[b] {
        let (p, pe) = parent[a].unwrap();
        path_a.push(pe);
        a = p;
    }
    while depth[b] > depth[a] {
        let (p, pe) = parent[b].unwrap();
        path_b.push(pe);
        b = p;
    }
    while a != b {
        let (pa, ea) = parent[a].unwrap();
        let (pb, eb) = parent[b].unwrap();
        path_a.push(ea);
        path_b.push(eb);
        a = pa;
        b = pb;
    }
    let mut set = region.empty_edge_set();
    for &x in path_a.iter().chain(path_b.iter()) {
        set.insert(x);
    }
    set.insert(e);
    let omega = LoopConfig::from_even_unchecked(set);
    let mut loops = decompose(region, &omega);
    debug_assert_eq!(loops.len(), 1);
    Circuit::from_loop(region, loops.swap_remove(0))
}
