//! Command-line front end. `run` returns the process exit code: 0 when every
//! asserted row passes, 1 on an assertion failure, 2 on a usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use loopon::coupling::{color_loops, sample_eta, CoherentTriple};
use loopon::io::{loop_config_from_text, loop_config_to_text, triple_from_text, triple_to_text};
use loopon::isingfk::EsChain;
use loopon::sampler::{seeded_rng, Chain, Ensemble};
use loopon::{FaceCoord, ModelParams, Region};

use crate::config::{parse_config, Real, Settings};
use crate::error::{usage, Result, XctlError};
use crate::experiments;
use crate::render;
use crate::report::{write_csv_file, EventReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "xctl", version, about = "Loop O(n) experiments: exact checks, Monte Carlo estimates, CSV reports and SVG snapshots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Surrounding loop of diameter >= k at n = x = 1 (bound 1/2).
    Perco(Common),
    /// Non-contractible loop on a torus at x = 1 (bound 1/4).
    Torus(Common),
    /// Surrounding loops for the antiferromagnetic Ising model, 1 < x <= sqrt(3).
    Antiferro(Common),
    /// Defect-free circuits, the XOR step and the site process near (1,1).
    DefectCircuit(Common),
    /// Crossing and annulus events at a uniform face, loop length and volume tails.
    Events(Common),
    /// Surrounding loop in the annulus between radii k and 2k.
    Rsw(Common),
    /// Write an SVG snapshot of a stored or freshly sampled configuration.
    Render(RenderArgs),
}

/// Flags shared by all experiments. Values given here override the config file.
#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// Scale parameter(s), comma separated.
    #[arg(long)]
    pub k: Option<String>,
    /// Second torus side (defaults to k).
    #[arg(long)]
    pub l: Option<String>,
    /// Loop weight n (a/b, decimal, sqrt(m)).
    #[arg(long)]
    pub n: Option<String>,
    /// Edge weight x (a/b, decimal, sqrt(m), 1/sqrt(m)).
    #[arg(long)]
    pub x: Option<String>,
    /// Inverse temperature; sets x = exp(-2 beta).
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// auto, exact or mcmc.
    #[arg(long)]
    pub mode: Option<String>,
    /// Inner radius.
    #[arg(long)]
    pub r: Option<String>,
    /// Outer radius.
    #[arg(long = "big-r")]
    pub big_r: Option<String>,
    /// Width of the parameter window around (1,1).
    #[arg(long = "delta-hat")]
    pub delta_hat: Option<String>,
    /// Threshold standing in for unquantified positive constants.
    #[arg(long)]
    pub eps: Option<String>,
    /// Threshold above which p(n,x) triggers a warning.
    #[arg(long)]
    pub p0: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    /// Burn-in (sweeps for loop chains, steps for the Ising chain).
    #[arg(long = "burn-in")]
    pub burn_in: Option<String>,
    /// Steps between samples.
    #[arg(long)]
    pub thin: Option<String>,
    /// Boundary condition outside the domain: empty or hexagon.
    #[arg(long)]
    pub xi: Option<String>,
    /// CSV report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// key = value settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RenderArgs {
    #[command(flatten)]
    pub common: Common,
    /// Stored configuration (loopconfig v1 or triple v1) to draw instead of sampling.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// What to sample: loops, triple or spins.
    #[arg(long)]
    pub what: Option<String>,
}

impl Common {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut add = |k: &'static str, o: &Option<String>| {
            if let Some(s) = o {
                v.push((k, s.clone()));
            }
        };
        add("k", &self.k);
        add("l", &self.l);
        add("n", &self.n);
        add("x", &self.x);
        add("beta", &self.beta);
        add("trials", &self.trials);
        add("seed", &self.seed);
        add("mode", &self.mode);
        add("r", &self.r);
        add("big_r", &self.big_r);
        add("delta_hat", &self.delta_hat);
        add("eps", &self.eps);
        add("p0", &self.p0);
        add("workers", &self.workers);
        add("burn_in", &self.burn_in);
        add("thin", &self.thin);
        add("xi", &self.xi);
        for (k, p) in [("out", &self.out), ("svg", &self.svg)] {
            if let Some(p) = p {
                v.push((k, p.to_string_lossy().into_owned()));
            }
        }
        v
    }

    /// Defaults, then the config file, then these flags.
    pub fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| XctlError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            for (k, v) in parse_config(&text)? {
                s.apply(&k, &v)?;
            }
        }
        for (k, v) in self.pairs() {
            s.apply(k, &v)?;
        }
        Ok(s)
    }
}

/// Parses arguments, runs the command and prints one line per report row.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli.command) {
        Ok(rows) => {
            for r in &rows {
                println!("{}", r.summary());
            }
            if rows.iter().any(EventReport::failed) {
                EXIT_FAIL
            } else {
                EXIT_PASS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Vec<EventReport>> {
    let (name, common) = match cmd {
        Command::Perco(c) => ("perco", c),
        Command::Torus(c) => ("torus", c),
        Command::Antiferro(c) => ("antiferro", c),
        Command::DefectCircuit(c) => ("defect-circuit", c),
        Command::Events(c) => ("events", c),
        Command::Rsw(c) => ("rsw", c),
        Command::Render(r) => {
            let mut s = r.common.settings()?;
            if let Some(i) = &r.input {
                s.input = Some(i.clone());
            }
            if let Some(w) = &r.what {
                s.what = w.clone();
            }
            run_render(&s)?;
            return Ok(Vec::new());
        }
    };
    let s = common.settings()?;
    if s.svg.is_some() {
        return usage("--svg is only used by the render command");
    }
    let rows = experiments::run(name, &s)?;
    if let Some(out) = &s.out {
        write_csv_file(out, &rows)?;
    }
    Ok(rows)
}

/// Draws `--input` if given, otherwise samples on `Λ_k(0)` (or `Tor_{k,l}`
/// when `l` is set for loops) and optionally stores the sample as text in `--out`.
pub fn run_render(s: &Settings) -> Result<()> {
    let Some(svg_path) = &s.svg else {
        return usage("render needs --svg");
    };
    if let Some(input) = &s.input {
        let text = std::fs::read_to_string(input)?;
        let svg = if text.starts_with("triple v1") {
            let (region, t) = triple_from_text(&text)?;
            render::render_triple(&region, &t)
        } else {
            let (region, w) = loop_config_from_text(&text)?;
            render::render_loops(&region, &w)
        };
        return render::write_svg(svg_path, &svg);
    }
    let k = *s.k_or(&[3]).first().expect("nonempty");
    let one = Real::rational(1, 1);
    let n = s.n_or(one.clone());
    match s.what.as_str() {
        "loops" | "triple" => {
            let x = s.x_or(one)?;
            let region = match s.l {
                Some(l) if s.what == "loops" => Region::torus(k, l)?,
                Some(_) => return usage("triples are drawn on balls only"),
                None => Region::ball(FaceCoord::ORIGIN, k),
            };
            let ens = Ensemble::new(&region);
            let p = ModelParams::new(n.value, x.value)?;
            let mut chain = Chain::new(&ens, &p, seeded_rng(s.seed, 0));
            let burn = s.burn_in.unwrap_or_else(|| chain.default_burn_in_sweeps());
            for _ in 0..burn {
                chain.sweep();
            }
            let omega = chain.state().clone();
            if s.what == "loops" {
                if let Some(out) = &s.out {
                    std::fs::write(out, loop_config_to_text(&region, &omega))?;
                }
                render::write_svg(svg_path, &render::render_loops(&region, &omega))
            } else {
                let mut rng = seeded_rng(s.seed, 1);
                let c = color_loops(&ens, &omega, p.n, &mut rng)?;
                let eta = sample_eta(&ens, &omega, p.x, &mut rng)?;
                let t = CoherentTriple::new(c.red, c.blue, eta)?;
                if let Some(out) = &s.out {
                    std::fs::write(out, triple_to_text(&region, &t))?;
                }
                render::write_svg(svg_path, &render::render_triple(&region, &t))
            }
        }
        "spins" => {
            let x = s.x_or(Real { value: 3f64.sqrt(), exact: None, text: "sqrt3".into() })?;
            let region = Region::ball(FaceCoord::ORIGIN, k);
            let tau = vec![1i8; region.dual_vertex_count() - region.face_count()];
            let mut chain = EsChain::new(&region, x.value, &tau, seeded_rng(s.seed, 0))?;
            for _ in 0..s.burn_in.unwrap_or(200) {
                chain.step();
            }
            render::write_svg(svg_path, &render::render_spins(&region, &chain.sigma, Some(&chain.eta)))
        }
        other => usage(format!("render --what must be loops, triple or spins, got '{other}'")),
    }
}
