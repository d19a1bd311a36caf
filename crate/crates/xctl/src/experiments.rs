//! The experiments behind each subcommand. Every function returns one
//! [`EventReport`] per reported quantity; rows with `pass == Some(false)`
//! make the command exit with code 1.
//!
//! Monte Carlo trials are split over `workers` chains, worker `w` seeded
//! with stream `w` of the run seed, and merged in worker order. A result is
//! therefore reproducible from `(seed, workers, trials)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use loopon::auxgraph::{associate, build_aux_graph, connectivity, domination_intensity, sample_zeta};
use loopon::coupling::{color_loops, find_defect_free_circuit, sample_eta, triple_weight, xor_resample, CoherentTriple};
use loopon::isingfk::antiferro_xor_experiment;
use loopon::loopcore::decompose;
use loopon::sampler::{seeded_rng, BoundaryCondition, Chain, Ensemble, DEFAULT_CAP_LOG2};
use loopon::{q, Exact, FaceCoord, LoopConfig, ModelParams, Region};

use crate::config::{Mode, Real, Settings, Xi};
use crate::error::{usage, Result};
use crate::events;
use crate::report::{Check, EventReport};
use crate::stats::{batch_means_stderr, binomial_stderr, chain_stderr, wilson, SIGMAS};

/// Largest configuration space (log2) enumerated in `auto` mode.
pub const AUTO_EXACT_LOG2: u32 = 20;

/// Tolerance for exact checks at irrational parameters.
pub const FLOAT_TOL: f64 = 1e-12;

pub const EXPERIMENTS: [&str; 6] = ["perco", "torus", "antiferro", "defect-circuit", "events", "rsw"];

pub fn run(name: &str, s: &Settings) -> Result<Vec<EventReport>> {
    match name {
        "perco" => run_perco(s),
        "torus" => run_torus(s),
        "antiferro" => run_antiferro(s),
        "defect-circuit" => run_defect_circuit(s),
        "events" => run_events(s),
        "rsw" => run_rsw(s),
        _ => usage(format!("unknown experiment '{name}'")),
    }
}

fn split(trials: usize, workers: usize) -> Vec<usize> {
    (0..workers).map(|w| trials / workers + (w < trials % workers) as usize).collect()
}

/// Runs `f(worker, count, rng)` on every worker, results in worker order.
fn on_workers<T, F>(s: &Settings, trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize, ChaCha8Rng) -> Result<T> + Sync,
{
    split(trials, s.workers)
        .into_par_iter()
        .enumerate()
        .map(|(w, c)| f(w, c, seeded_rng(s.seed, w as u64)))
        .collect()
}

/// Chain samples evaluated by `eval`, which gets its own generator (stream
/// `2^32 + w`) for any extra randomness.
fn chain_samples<T, F>(s: &Settings, ens: &Ensemble<'_>, p: &ModelParams<f64>, trials: usize, eval: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&LoopConfig, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    let parts = on_workers(s, trials, |w, count, rng| {
        let mut chain = Chain::new(ens, p, rng);
        let burn = s.burn_in.unwrap_or_else(|| chain.default_burn_in_sweeps());
        let thin = s.thin.unwrap_or_else(|| chain.default_thinning());
        let mut aux = seeded_rng(s.seed, (1 << 32) + w as u64);
        let mut out = Vec::with_capacity(count);
        let mut err = None;
        chain.run(burn, thin, count, |omega, _, _| {
            if err.is_none() {
                match eval(omega, &mut aux) {
                    Ok(v) => out.push(v),
                    Err(e) => err = Some(e),
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    })?;
    Ok(parts.into_iter().flatten().collect())
}

fn mean_and_stderr(hits: &[bool]) -> (f64, f64) {
    let k = hits.iter().filter(|&&h| h).count();
    (k as f64 / hits.len().max(1) as f64, chain_stderr(hits))
}

fn use_exact(mode: Mode, ens: &Ensemble<'_>) -> bool {
    match mode {
        Mode::Exact => true,
        Mode::Mcmc => false,
        Mode::Auto => ens.state_count_log2() <= AUTO_EXACT_LOG2,
    }
}

/// Exact probability of an event, rational when both parameters are.
enum ExactValue {
    Rational(Exact),
    Float(f64),
}

impl ExactValue {
    fn value(&self) -> f64 {
        match self {
            ExactValue::Rational(r) => loopon::Scalar::to_f64_lossy(r),
            ExactValue::Float(v) => *v,
        }
    }

    fn text(&self) -> String {
        match self {
            ExactValue::Rational(r) => r.to_string(),
            ExactValue::Float(v) => format!("{v:.15}"),
        }
    }

    fn at_least(&self, num: i64, den: i64) -> bool {
        match self {
            ExactValue::Rational(r) => *r >= q(num, den),
            ExactValue::Float(v) => *v >= num as f64 / den as f64 - FLOAT_TOL,
        }
    }

    fn within(&self, lo: f64, hi: f64) -> bool {
        // lo, hi are user tolerances; compare in floating point
        let v = self.value();
        v >= lo - FLOAT_TOL && v <= hi + FLOAT_TOL
    }
}

fn exact_probability<E>(ens: &Ensemble<'_>, n: &Real, x: &Real, event: E) -> Result<ExactValue>
where
    E: Fn(&LoopConfig) -> bool + Sync + Send,
{
    let hist = ens.histogram(DEFAULT_CAP_LOG2, event)?;
    Ok(match (&n.exact, &x.exact) {
        (Some(a), Some(b)) => ExactValue::Rational(hist.probability(&ModelParams::new(a.clone(), b.clone())?)),
        _ => ExactValue::Float(hist.probability(&ModelParams::new(n.value, x.value)?)),
    })
}

fn params_f64(n: &Real, x: &Real) -> Result<ModelParams<f64>> {
    Ok(ModelParams::new(n.value, x.value)?)
}

/// Region and boundary condition for free faces `Λ_m(0)` (or the annulus
/// `Λ_m(0) ∖ Λ_{hole}(0)`), with `ξ` empty or one hexagon loop two rings out.
fn domain(m: u32, hole: Option<u32>, xi: Xi) -> Result<(Region, Option<BoundaryCondition>)> {
    let outer = match xi {
        Xi::Empty => m,
        Xi::Hexagon => m + 2,
    };
    let region = Region::ball(FaceCoord::ORIGIN, outer);
    let faces = match hole {
        Some(h) => events::annulus_faces(&region, h, m),
        None => region.ball_faces(FaceCoord::ORIGIN, m),
    };
    let xi_config = match xi {
        Xi::Empty => LoopConfig::empty(&region),
        Xi::Hexagon => {
            let f = region.face_id(FaceCoord::new(m as i32 + 2, 0))?;
            LoopConfig::from_edges(&region, region.face_boundary(f))?
        }
    };
    let bc = (faces.len() != region.face_count()).then_some(BoundaryCondition { faces, xi: xi_config });
    Ok((region, bc))
}

fn ensemble<'a>(region: &'a Region, bc: &Option<BoundaryCondition>) -> Result<Ensemble<'a>> {
    Ok(match bc {
        Some(bc) => Ensemble::with_boundary(region, bc)?,
        None => Ensemble::new(region),
    })
}

fn xi_name(xi: Xi) -> &'static str {
    match xi {
        Xi::Empty => "empty",
        Xi::Hexagon => "hexagon",
    }
}

fn base_params(k: u32, n: &Real, x: &Real) -> Vec<(String, String)> {
    vec![("k".into(), k.to_string()), ("n".into(), n.text.clone()), ("x".into(), x.text.clone())]
}

/// Loop of diameter `≥ k` surrounding the origin at `n = x = 1`, free
/// faces `Λ_k(0)`. Bound: at least 1/2.
pub fn run_perco(s: &Settings) -> Result<Vec<EventReport>> {
    let one = Real::rational(1, 1);
    let n = s.n_or(one.clone());
    let x = s.x_or(one)?;
    if n.value != 1.0 || x.value != 1.0 {
        return usage("perco runs at n = x = 1");
    }
    let mut rows = Vec::new();
    for k in s.k_or(&[1, 2]) {
        if k == 0 {
            return usage("k must be positive");
        }
        let (region, bc) = domain(k, None, s.xi)?;
        let ens = ensemble(&region, &bc)?;
        let event = |w: &LoopConfig| events::surrounding_loop(&region, w, FaceCoord::ORIGIN, k);
        let params = base_params(k, &n, &x);
        let row = if use_exact(s.mode, &ens) {
            let v = exact_probability(&ens, &n, &x, event)?;
            let pass = v.at_least(1, 2);
            EventReport::exact("perco", "surrounding_loop_diam_ge_k", v.value(), v.text(), Check::ExactAtLeast("1/2".into()), Some(pass))
        } else {
            let hits = chain_samples(s, &ens, &params_f64(&n, &x)?, s.trials, |w, _| Ok(event(w)))?;
            let (m, se) = mean_and_stderr(&hits);
            EventReport::estimate("perco", "surrounding_loop_diam_ge_k", m, se, hits.len() as u64, Check::AtLeast(0.5), Some(m + SIGMAS * se >= 0.5))
        };
        rows.push(row.with_params(&params).with_param("xi", xi_name(s.xi)));
    }
    Ok(rows)
}

/// Non-contractible loop on `Tor_{k,l}` at `x = 1`, `n ∈ [1,2]`. Bound: at least 1/4.
pub fn run_torus(s: &Settings) -> Result<Vec<EventReport>> {
    let n = s.n_or(Real::rational(1, 1));
    let x = s.x_or(Real::rational(1, 1))?;
    if x.value != 1.0 {
        return usage("torus experiment requires x = 1");
    }
    if !(1.0..=2.0).contains(&n.value) {
        return usage("torus experiment requires n in [1,2]");
    }
    let mut rows = Vec::new();
    for k in s.k_or(&[2, 3]) {
        let l = s.l.unwrap_or(k);
        let region = Region::torus(k, l)?;
        let ens = Ensemble::new(&region);
        let event = |w: &LoopConfig| events::has_noncontractible(&region, w);
        let params = vec![("k".into(), k.to_string()), ("l".into(), l.to_string()), ("n".into(), n.text.clone()), ("x".into(), x.text.clone())];
        let row = if use_exact(s.mode, &ens) {
            let v = exact_probability(&ens, &n, &x, event)?;
            let pass = v.at_least(1, 4);
            EventReport::exact("torus", "noncontractible_loop", v.value(), v.text(), Check::ExactAtLeast("1/4".into()), Some(pass))
        } else {
            let hits = chain_samples(s, &ens, &params_f64(&n, &x)?, s.trials, |w, _| Ok(event(w)))?;
            let (m, se) = mean_and_stderr(&hits);
            EventReport::estimate("torus", "noncontractible_loop", m, se, hits.len() as u64, Check::AtLeast(0.25), Some(m + SIGMAS * se >= 0.25))
        };
        rows.push(row.with_params(&params));
    }
    Ok(rows)
}

/// Antiferromagnetic Ising with plus boundary on `Λ_{2k}(0)`: loop of
/// diameter `> k` surrounding the origin. Positivity is asserted through
/// the threshold `eps`; the trend across `k` is reported only.
pub fn run_antiferro(s: &Settings) -> Result<Vec<EventReport>> {
    let sqrt3 = Real { value: 3f64.sqrt(), exact: None, text: "sqrt3".into() };
    let x = s.x_or(sqrt3)?;
    if !(x.value > 1.0 && x.value <= 3f64.sqrt() + FLOAT_TOL) {
        return usage("antiferro experiment requires 1 < x <= sqrt(3)");
    }
    let one = Real::rational(1, 1);
    let mut rows = Vec::new();
    let mut trend: Vec<(u32, f64)> = Vec::new();
    for k in s.k_or(&[1, 2, 4]) {
        if k == 0 {
            return usage("k must be positive");
        }
        let params = base_params(k, &one, &x);
        let region = Region::ball(FaceCoord::ORIGIN, 2 * k);
        let ens = Ensemble::new(&region);
        if k == 1 && use_exact(s.mode, &ens) {
            // Ising with plus boundary = loop measure at n = 1 via domain walls
            let v = exact_probability(&ens, &one, &x, |w| events::surrounding_loop(&region, w, FaceCoord::ORIGIN, k + 1))?;
            let pass = v.value() > s.eps;
            trend.push((k, v.value()));
            rows.push(
                EventReport::exact("antiferro", "surrounding_loop_diam_gt_k", v.value(), v.text(), Check::ExactAtLeast(format!("{}", s.eps)), Some(pass))
                    .with_params(&params),
            );
            continue;
        }
        let burn = s.burn_in.unwrap_or(200);
        let thin = s.thin.unwrap_or(5);
        let parts = on_workers(s, s.trials, |_, count, rng| Ok(antiferro_xor_experiment(k, x.value, count, burn, thin, rng)?))?;
        let mut tot = loopon::isingfk::AntiferroEstimate::default();
        for p in parts {
            tot.trials += p.trials;
            tot.surrounded_gt_k += p.surrounded_gt_k;
            tot.surrounded_ge_k += p.surrounded_ge_k;
            tot.circ_k += p.circ_k;
            tot.xor_failures += p.xor_failures;
            tot.weight_failures += p.weight_failures;
        }
        let t = tot.trials as u64;
        let hits = tot.surrounded_gt_k as u64;
        let (lo, _) = wilson(hits, t, SIGMAS);
        let est = tot.surround_frequency();
        trend.push((k, est));
        rows.push(
            EventReport::estimate(
                "antiferro",
                "surrounding_loop_diam_gt_k",
                est,
                binomial_stderr(hits, t),
                t,
                Check::WilsonAbove(s.eps),
                Some(hits > 0 && lo > s.eps),
            )
            .with_params(&params)
            .with_param("wilson3_lo", format!("{lo:.6}")),
        );
        let circ = tot.circ_k as u64;
        rows.push(
            EventReport::estimate("antiferro", "circ_k", tot.circ_frequency(), binomial_stderr(circ, t), t, Check::ReportOnly, None)
                .with_params(&params),
        );
        for (name, count) in [("xor_failures", tot.xor_failures), ("weight_failures", tot.weight_failures)] {
            rows.push(
                EventReport::estimate("antiferro", name, count as f64, 0.0, t, Check::Zero, Some(count == 0)).with_params(&params),
            );
        }
    }
    if trend.len() >= 2 {
        let (k0, f0) = trend[0];
        let (k1, f1) = trend[trend.len() - 1];
        let ratio = if f0 > 0.0 { f1 / f0 } else { f64::NAN };
        let shape: Vec<String> = trend.iter().map(|(k, f)| format!("{k}:{f:.4}")).collect();
        rows.push(
            EventReport::estimate("antiferro", "trend_last_over_first", ratio, 0.0, 0, Check::ReportOnly, None)
                .with_param("x", &x.text)
                .with_param("k_range", format!("{k0}-{k1}"))
                .with_param("curve", shape.join(" ")),
        );
    }
    Ok(rows)
}

fn regime_note(s: &Settings, n: f64, x: f64, x_max: f64) -> &'static str {
    let inside = n >= 1.0 && n <= 1.0 + s.delta_hat && x >= 1.0 - s.delta_hat && x <= x_max + FLOAT_TOL;
    if inside {
        "inside"
    } else {
        eprintln!("warning: (n, x) = ({n}, {x}) lies outside the delta_hat = {} window; results are reported only", s.delta_hat);
        "outside"
    }
}

#[derive(Clone, Debug, Default)]
struct DefectSample {
    circuit: bool,
    surround: bool,
    xor_parity_ok: Option<bool>,
    weight_ok: Option<bool>,
    zeta_separated: Option<bool>,
}

/// Defect-free circuits around `Λ_r(0)` in `Λ_k(0)`, the XOR step on them,
/// and the site process `ζ` for comparison.
pub fn run_defect_circuit(s: &Settings) -> Result<Vec<EventReport>> {
    let n = s.n_or(Real::rational(1, 1));
    let x = s.x_or(Real::rational(1, 1))?;
    if !(n.value >= 1.0 && x.value > 0.0 && x.value <= 1.0) {
        return usage("defect-circuit requires n >= 1 and 0 < x <= 1");
    }
    let r = s.r.unwrap_or(0);
    let big_r = s.big_r.unwrap_or(2 * r + 2);
    if big_r < 2 * r + 2 {
        return usage("R must be at least 2r+2");
    }
    let regime = regime_note(s, n.value, x.value, 1.0);
    let (_, _, p_raw) = domination_intensity(n.value, x.value);
    if p_raw > s.p0 {
        eprintln!("warning: p(n,x) = {p_raw:.4} exceeds the p0 proxy {}", s.p0);
    }
    let mut rows = Vec::new();
    for k in s.k_or(&[4]) {
        if r >= k {
            return usage("r must be smaller than k");
        }
        let region = Region::ball(FaceCoord::ORIGIN, k);
        let ens = Ensemble::new(&region);
        let protect = region.ball_faces(FaceCoord::ORIGIN, r);
        let mut params = base_params(k, &n, &x);
        params.push(("r".into(), r.to_string()));
        params.push(("regime".into(), regime.into()));
        if s.mode == Mode::Exact {
            rows.extend(defect_circuit_exact(&region, &ens, &protect, &n, &x)?.into_iter().map(|r| r.with_params(&params)));
            continue;
        }
        let pf = params_f64(&n, &x)?;
        let root_face = region.face_id(FaceCoord::ORIGIN)?;
        let samples = chain_samples(s, &ens, &pf, s.trials, |omega, rng| {
            let mut out = DefectSample { surround: events::loop_surrounding_ball(&region, omega, FaceCoord::ORIGIN, r), ..Default::default() };
            let colored = color_loops(&ens, omega, pf.n, rng)?;
            let eta = sample_eta(&ens, omega, pf.x, rng)?;
            let triple = CoherentTriple::new(colored.red, colored.blue, eta)?;
            if let Some(c) = find_defect_free_circuit(&region, &triple.blocked(), &protect, None)? {
                out.circuit = true;
                let t2 = xor_resample(&triple, &c)?;
                let (w0, w1) = (triple_weight(&ens, &triple, &pf), triple_weight(&ens, &t2, &pf));
                out.weight_ok = Some((w0 - w1).abs() <= FLOAT_TOL * w0.abs().max(1.0));
                let after = t2.union();
                let has = |w: &LoopConfig| events::surrounding_loop(&region, w, FaceCoord::ORIGIN, 0);
                out.xor_parity_ok = Some(has(omega) || has(&after));
            }
            let g = build_aux_graph(&region, omega)?;
            let root = g.pi_face(root_face);
            if g.boundary_distance(root) > big_r {
                let a = associate(&g)?;
                let zeta = sample_zeta(&g, &a, &pf, rng)?;
                let dist = g.bfs_distances(root);
                let inner: Vec<usize> = (0..g.len()).filter(|&v| dist[v] <= 2 * r + 2).collect();
                let outer: Vec<usize> = (0..g.len()).filter(|&v| dist[v] > big_r).collect();
                out.zeta_separated = Some(!connectivity(&g, &zeta, &inner, &outer));
            }
            Ok(out)
        })?;
        let t = samples.len() as u64;
        let col = |f: &dyn Fn(&DefectSample) -> bool| samples.iter().map(f).collect::<Vec<bool>>();
        for (name, hits) in [("defect_free_circuit", col(&|d| d.circuit)), ("surrounding_loop_around_ball", col(&|d| d.surround))] {
            let (m, se) = mean_and_stderr(&hits);
            rows.push(EventReport::estimate("defect-circuit", name, m, se, t, Check::ReportOnly, None).with_params(&params));
        }
        let fails = |f: &dyn Fn(&DefectSample) -> Option<bool>| samples.iter().filter(|d| f(d) == Some(false)).count();
        let checked = samples.iter().filter(|d| d.xor_parity_ok.is_some()).count() as u64;
        for (name, c) in [("xor_parity_failures", fails(&|d| d.xor_parity_ok)), ("xor_weight_failures", fails(&|d| d.weight_ok))] {
            rows.push(EventReport::estimate("defect-circuit", name, c as f64, 0.0, checked, Check::Zero, Some(c == 0)).with_params(&params));
        }
        let zs: Vec<bool> = samples.iter().filter_map(|d| d.zeta_separated).collect();
        let (zm, zse) = mean_and_stderr(&zs);
        rows.push(
            EventReport::estimate("defect-circuit", "zeta_non_connection", zm, zse, zs.len() as u64, Check::ReportOnly, None)
                .with_params(&params)
                .with_param("R", big_r),
        );
        rows.push(
            EventReport::estimate("defect-circuit", "p_nx", p_raw, 0.0, 0, Check::ReportOnly, None)
                .with_params(&params)
                .with_param("clamped", p_raw > 1.0)
                .with_param("above_p0", p_raw > s.p0),
        );
    }
    Ok(rows)
}

/// Exact circuit probability at `x = 1`, where there are no defect edges and
/// only the blue colouring blocks. Other `x` would need a sum over all
/// defect sets and is refused.
fn defect_circuit_exact(region: &Region, ens: &Ensemble<'_>, protect: &[usize], n: &Real, x: &Real) -> Result<Vec<EventReport>> {
    const EXACT_DEFECT_LOG2: u32 = 12;
    let (Some(nq), Some(xq)) = (&n.exact, &x.exact) else {
        return usage("exact defect-circuit needs rational n and x");
    };
    if *xq != q(1, 1) {
        return usage("exact defect-circuit is only available at x = 1");
    }
    if ens.state_count_log2() > EXACT_DEFECT_LOG2 {
        return usage(format!("exact defect-circuit is limited to 2^{EXACT_DEFECT_LOG2} configurations"));
    }
    let p = ModelParams::new(nq.clone(), xq.clone())?;
    let pb = (nq.clone() - q(1, 1)) / nq.clone();
    let pr = q(1, 1) / nq.clone();
    let (mut z, mut hit) = (q(0, 1), q(0, 1));
    let mut parity_failures = 0usize;
    let has = |w: &LoopConfig| events::surrounding_loop(region, w, FaceCoord::ORIGIN, 0);
    for omega in ens.enumerate(EXACT_DEFECT_LOG2)? {
        let (e, l) = ens.stats(&omega);
        let w = p.weight(e, l);
        let loops = decompose(region, &omega);
        let mut pc = q(0, 1);
        for mask in 0u64..(1u64 << loops.len()) {
            let mut blue = region.empty_edge_set();
            for (i, lp) in loops.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    blue.union_with(&lp.edge_set(region));
                }
            }
            if let Some(c) = find_defect_free_circuit(region, &blue, protect, None)? {
                let b = mask.count_ones() as usize;
                pc += loopon::Scalar::powu(&pb, b) * loopon::Scalar::powu(&pr, loops.len() - b);
                let after = omega.xor(region, &c.set)?;
                if !(has(&omega) || has(&after)) {
                    parity_failures += 1;
                }
            }
        }
        hit += w.clone() * pc;
        z += w;
    }
    let v = hit / z;
    let f = loopon::Scalar::to_f64_lossy(&v);
    Ok(vec![
        EventReport::exact("defect-circuit", "defect_free_circuit", f, v.to_string(), Check::ReportOnly, None),
        EventReport::exact("defect-circuit", "xor_parity_failures", parity_failures as f64, parity_failures.to_string(), Check::Zero, Some(parity_failures == 0)),
    ])
}

#[derive(Clone, Debug)]
struct EventSample {
    c: bool,
    s: bool,
    longest: usize,
    volume: usize,
    /// Faces and length of the outermost loop surrounding the chosen face.
    outer: Option<(usize, usize)>,
}

/// Finite-volume events at a uniformly chosen face of `Λ_k(0)`. Nothing is
/// asserted.
pub fn run_events(s: &Settings) -> Result<Vec<EventReport>> {
    let n = s.n_or(Real::rational(1, 1));
    let x = s.x_or(Real::rational(1, 1))?;
    let r = s.r.unwrap_or(1);
    let big_r = s.big_r.unwrap_or(3);
    let mut rows = Vec::new();
    for k in s.k_or(&[4]) {
        let region = Region::ball(FaceCoord::ORIGIN, k);
        let ens = Ensemble::new(&region);
        let pf = params_f64(&n, &x)?;
        let mut params = base_params(k, &n, &x);
        params.push(("r".into(), r.to_string()));
        params.push(("R".into(), big_r.to_string()));
        let nf = region.face_count();
        let samples = chain_samples(s, &ens, &pf, s.trials, |omega, rng| {
            let fid = rng.gen_range(0..nf);
            let f = region.face(fid);
            let loops = decompose(&region, omega);
            let outer = events::outermost_surrounding(&region, &loops, f).map(|(i, v)| (v, loops[i].len()));
            Ok(EventSample {
                c: events::crossing(&region, &loops, f, r, big_r),
                s: events::annulus_surrounding(&region, &loops, f, r, big_r),
                longest: events::longest_bordering(&region, &loops, fid),
                volume: outer.map_or(0, |o| o.0),
                outer,
            })
        })?;
        let t = samples.len() as u64;
        let mut push = |name: &str, hits: Vec<bool>| {
            let (m, se) = mean_and_stderr(&hits);
            rows.push(EventReport::estimate("events", name, m, se, t, Check::ReportOnly, None).with_params(&params));
        };
        push("C_or_S", samples.iter().map(|e| e.c || e.s).collect());
        push("C", samples.iter().map(|e| e.c).collect());
        push("S", samples.iter().map(|e| e.s).collect());
        for th in [6usize, 12, 24, 48] {
            push(&format!("L_ge_{th}"), samples.iter().map(|e| e.longest >= th).collect());
        }
        for th in [1usize, 7, 19, 37] {
            push(&format!("V_ge_{th}"), samples.iter().map(|e| e.volume >= th).collect());
        }
        for (name, xs) in [
            ("L_mean", samples.iter().map(|e| e.longest as f64).collect::<Vec<f64>>()),
            ("V_mean", samples.iter().map(|e| e.volume as f64).collect()),
        ] {
            let m = xs.iter().sum::<f64>() / xs.len().max(1) as f64;
            rows.push(EventReport::estimate("events", name, m, batch_means_stderr(&xs, 20), t, Check::ReportOnly, None).with_params(&params));
        }
        // isoperimetric constant of V against the squared length of the same loop
        let pairs: Vec<(f64, f64)> = samples.iter().filter_map(|e| e.outer).map(|(v, l)| (v as f64, (l * l) as f64)).collect();
        let max_ratio = pairs.iter().map(|(v, l2)| v / l2).fold(0.0, f64::max);
        let num: f64 = pairs.iter().map(|(v, l2)| v * l2).sum();
        let den: f64 = pairs.iter().map(|(_, l2)| l2 * l2).sum();
        let fit = if den > 0.0 { num / den } else { 0.0 };
        for (name, val) in [("iso_constant_max", max_ratio), ("iso_constant_fit", fit)] {
            rows.push(
                EventReport::estimate("events", name, val, 0.0, pairs.len() as u64, Check::ReportOnly, None).with_params(&params),
            );
        }
    }
    Ok(rows)
}

/// Loop surrounding the origin in the annulus `Λ_{2k}(0) ∖ Λ_k(0)` taken as
/// the domain; asserted to lie in `[eps, 1 − eps]`.
pub fn run_rsw(s: &Settings) -> Result<Vec<EventReport>> {
    let n = s.n_or(Real::rational(1, 1));
    let x = s.x_or(Real::rational(1, 1))?;
    let regime = regime_note(s, n.value, x.value, 1.0 / n.value.sqrt());
    let (lo, hi) = (s.eps, 1.0 - s.eps);
    let mut rows = Vec::new();
    for k in s.k_or(&[1, 2]) {
        if k == 0 {
            return usage("k must be positive");
        }
        let (region, bc) = domain(2 * k, Some(k), s.xi)?;
        let ens = ensemble(&region, &bc)?;
        let event = |w: &LoopConfig| events::surrounding_loop(&region, w, FaceCoord::ORIGIN, 0);
        let mut params = base_params(k, &n, &x);
        params.push(("xi".into(), xi_name(s.xi).into()));
        params.push(("regime".into(), regime.into()));
        let row = if use_exact(s.mode, &ens) {
            let v = exact_probability(&ens, &n, &x, event)?;
            let pass = v.within(lo, hi);
            EventReport::exact("rsw", "annulus_surrounding_loop", v.value(), v.text(), Check::ExactWithin { lo: lo.to_string(), hi: hi.to_string() }, Some(pass))
        } else {
            let hits = chain_samples(s, &ens, &params_f64(&n, &x)?, s.trials, |w, _| Ok(event(w)))?;
            let (m, se) = mean_and_stderr(&hits);
            let pass = m + SIGMAS * se >= lo && m - SIGMAS * se <= hi;
            EventReport::estimate("rsw", "annulus_surrounding_loop", m, se, hits.len() as u64, Check::Within { lo, hi }, Some(pass))
        };
        rows.push(row.with_params(&params));
    }
    Ok(rows)
}
