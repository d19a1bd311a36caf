//! Proportion intervals, standard errors and a pooled χ² goodness-of-fit test.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Multiplier used for every Monte Carlo assertion.
pub const SIGMAS: f64 = 3.0;

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn binomial_stderr(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Standard error of the mean from `batches` contiguous batch means. Falls
/// back to the iid estimate when there are fewer than two samples per batch.
pub fn batch_means_stderr(xs: &[f64], batches: usize) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let b = batches.max(2);
    if n < 2 * b {
        return iid_stderr(xs);
    }
    let size = n / b;
    let means: Vec<f64> = (0..b).map(|i| xs[i * size..(i + 1) * size].iter().sum::<f64>() / size as f64).collect();
    iid_stderr(&means)
}

fn iid_stderr(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Standard error of a chain-sampled proportion: the larger of the binomial
/// and the 20-batch estimates, so that autocorrelation is not ignored.
pub fn chain_stderr(hits: &[bool]) -> f64 {
    let xs: Vec<f64> = hits.iter().map(|&h| h as u8 as f64).collect();
    let k = hits.iter().filter(|&&h| h).count() as u64;
    binomial_stderr(k, hits.len() as u64).max(batch_means_stderr(&xs, 20))
}

#[derive(Clone, Debug)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: f64,
    pub critical: f64,
}

impl ChiSquare {
    pub fn passes(&self) -> bool {
        self.statistic < self.critical
    }
}

/// Pearson test of observed counts against cell probabilities at
/// significance `alpha`; cells with expected count below 5 are pooled.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], alpha: f64) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        if e < 5.0 {
            pool_o += o as f64;
            pool_e += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e;
        cells += 1;
    }
    let df = cells.saturating_sub(1).max(1) as f64;
    let critical = ChiSquared::new(df).expect("df > 0").inverse_cdf(1.0 - alpha);
    ChiSquare { statistic: stat, df, critical }
}
