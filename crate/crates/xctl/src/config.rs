//! Run settings from defaults, a `key = value` file and command-line flags,
//! in increasing priority.

use std::collections::BTreeMap;
use std::path::PathBuf;

use loopon::{q, Exact};

use crate::error::{usage, Result};

/// A parameter value with its exact rational form when it has one.
#[derive(Clone, Debug, PartialEq)]
pub struct Real {
    pub value: f64,
    pub exact: Option<Exact>,
    pub text: String,
}

impl Real {
    pub fn rational(num: i64, den: i64) -> Real {
        let text = if den == 1 { num.to_string() } else { format!("{num}/{den}") };
        Real { value: num as f64 / den as f64, exact: Some(q(num, den)), text }
    }

    pub fn float(v: f64) -> Real {
        Real { value: v, exact: None, text: format!("{v}") }
    }
}

/// Parses `a/b`, plain decimals (exact), `sqrt(m)`, `1/sqrt(m)` and any
/// other float syntax (inexact).
pub fn parse_real(s: &str) -> Result<Real> {
    let t = s.trim();
    let bad = || usage(format!("cannot parse number '{s}'"));
    let sqrt_arg = |u: &str| -> Option<u64> {
        let u = u.strip_prefix("sqrt")?;
        let u = u.strip_prefix('(').and_then(|v| v.strip_suffix(')')).unwrap_or(u);
        u.parse().ok()
    };
    let perfect = |m: u64| (m as f64).sqrt().round() as i64;
    if let Some(m) = sqrt_arg(t) {
        let r = perfect(m);
        if (r * r) as u64 == m {
            return Ok(Real { text: t.into(), ..Real::rational(r, 1) });
        }
        return Ok(Real { value: (m as f64).sqrt(), exact: None, text: t.into() });
    }
    if let Some(m) = t.strip_prefix("1/").and_then(sqrt_arg) {
        if m == 0 {
            return bad();
        }
        let r = perfect(m);
        if (r * r) as u64 == m {
            return Ok(Real { text: t.into(), ..Real::rational(1, r) });
        }
        return Ok(Real { value: 1.0 / (m as f64).sqrt(), exact: None, text: t.into() });
    }
    if let Some((a, b)) = t.split_once('/') {
        let (a, b): (i64, i64) = match (a.trim().parse(), b.trim().parse()) {
            (Ok(a), Ok(b)) if b != 0 => (a, b),
            _ => return bad(),
        };
        return Ok(Real { text: t.into(), ..Real::rational(a, b) });
    }
    if let Some(r) = parse_decimal(t) {
        return Ok(Real { text: t.into(), ..r });
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Real { value: v, exact: None, text: t.into() }),
        _ => bad(),
    }
}

fn parse_decimal(t: &str) -> Option<Real> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 15 {
        return None;
    }
    let den = 10i64.pow(frac.len() as u32);
    let num: i64 = format!("{int}{frac}").parse().ok()?;
    let num = if neg { -num } else { num };
    Some(Real::rational(num, den))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Exact where the state space is enumerable, Monte Carlo otherwise.
    Auto,
    Exact,
    Mcmc,
}

/// Boundary condition outside the free faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Xi {
    Empty,
    /// One hexagon loop two rings outside the domain.
    Hexagon,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub k: Vec<u32>,
    pub l: Option<u32>,
    pub n: Option<Real>,
    pub x: Option<Real>,
    pub beta: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub r: Option<u32>,
    pub big_r: Option<u32>,
    pub delta_hat: f64,
    pub eps: f64,
    pub p0: f64,
    pub workers: usize,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub xi: Xi,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub what: String,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            k: Vec::new(),
            l: None,
            n: None,
            x: None,
            beta: None,
            trials: 2000,
            seed: 1,
            mode: Mode::Auto,
            r: None,
            big_r: None,
            delta_hat: 0.05,
            eps: 0.01,
            p0: 0.5,
            // fixed so that results do not depend on the machine
            workers: 4,
            burn_in: None,
            thin: None,
            xi: Xi::Empty,
            out: None,
            svg: None,
            input: None,
            what: "loops".into(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().or_else(|_| usage(format!("bad value '{v}' for {key}")))
}

fn positive_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = num(key, v)?;
    if !(x.is_finite() && x > 0.0) {
        return usage(format!("{key} must be positive"));
    }
    Ok(x)
}

impl Settings {
    /// Sets one entry; keys accept `-` or `_`.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "k" => {
                self.k = v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num("k", s)).collect::<Result<_>>()?;
                if self.k.is_empty() {
                    return usage("k needs at least one value");
                }
            }
            "l" => self.l = Some(num("l", v)?),
            "n" => self.n = Some(parse_real(v)?),
            "x" => self.x = Some(parse_real(v)?),
            "beta" => self.beta = Some(num("beta", v)?),
            "trials" => self.trials = num("trials", v)?,
            "seed" => self.seed = num("seed", v)?,
            "mode" => {
                self.mode = match v {
                    "auto" => Mode::Auto,
                    "exact" => Mode::Exact,
                    "mcmc" => Mode::Mcmc,
                    _ => return usage(format!("mode must be auto, exact or mcmc, got '{v}'")),
                }
            }
            "r" => self.r = Some(num("r", v)?),
            "big_r" | "R" => self.big_r = Some(num("big_r", v)?),
            "delta_hat" => self.delta_hat = positive_f64("delta_hat", v)?,
            "eps" => {
                self.eps = positive_f64("eps", v)?;
                if self.eps >= 0.5 {
                    return usage("eps must be below 1/2");
                }
            }
            "p0" => self.p0 = positive_f64("p0", v)?,
            "workers" => {
                self.workers = num("workers", v)?;
                if self.workers == 0 {
                    return usage("workers must be positive");
                }
            }
            "burn_in" => self.burn_in = Some(num("burn_in", v)?),
            "thin" => self.thin = Some(num("thin", v)?),
            "xi" => {
                self.xi = match v {
                    "empty" => Xi::Empty,
                    "hexagon" => Xi::Hexagon,
                    _ => return usage(format!("xi must be empty or hexagon, got '{v}'")),
                }
            }
            "out" => self.out = Some(v.into()),
            "svg" => self.svg = Some(v.into()),
            "input" => self.input = Some(v.into()),
            "what" => self.what = v.into(),
            _ => return usage(format!("unknown setting '{key}'")),
        }
        Ok(())
    }

    /// `x` from `--x` or `--beta` (not both), or `default`.
    pub fn x_or(&self, default: Real) -> Result<Real> {
        match (&self.x, self.beta) {
            (Some(_), Some(_)) => usage("give either x or beta, not both"),
            (Some(x), None) => Ok(x.clone()),
            (None, Some(b)) => Ok(Real::float(loopon::isingfk::x_from_beta(b))),
            (None, None) => Ok(default),
        }
    }

    pub fn n_or(&self, default: Real) -> Real {
        self.n.clone().unwrap_or(default)
    }

    pub fn k_or(&self, default: &[u32]) -> Vec<u32> {
        if self.k.is_empty() {
            default.to_vec()
        } else {
            self.k.clone()
        }
    }
}

/// Parses a config file: one `key = value` per line, `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key = value", i + 1));
        };
        let k = k.trim().replace('-', "_");
        if k.is_empty() {
            return usage(format!("config line {}: empty key", i + 1));
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return usage(format!("config line {}: duplicate key '{k}'", i + 1));
        }
    }
    Ok(out)
}
