//! Binomial estimates and a chi-square helper.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Normal-approximation 95% quantile.
pub const Z95: f64 = 1.959963984540054;

/// Below this many hits the interval switches from normal to Wilson.
pub const WILSON_BELOW: u64 = 30;

/// `hits` successes out of `trials` Bernoulli draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BinomialEstimate {
    pub hits: u64,
    pub trials: u64,
}

impl BinomialEstimate {
    pub fn new(hits: u64, trials: u64) -> Self {
        assert!(hits <= trials, "hits exceed trials");
        BinomialEstimate { hits, trials }
    }

    pub fn p_hat(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.hits as f64 / self.trials as f64
    }

    /// `sqrt(p(1-p)/trials)` at the estimate.
    pub fn stderr(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.p_hat();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// 95% interval: normal, or Wilson when hits are scarce; clipped to [0, 1].
    pub fn ci95(&self) -> (f64, f64) {
        if self.trials == 0 {
            return (0.0, 1.0);
        }
        if self.hits < WILSON_BELOW {
            return wilson(self.hits, self.trials, Z95);
        }
        let (p, se) = (self.p_hat(), self.stderr());
        ((p - Z95 * se).max(0.0), (p + Z95 * se).min(1.0))
    }

    /// Distance from `p` in standard errors of a Bernoulli(`p`) mean.
    pub fn z_against(&self, p: f64) -> f64 {
        let sd = (p * (1.0 - p) / self.trials as f64).sqrt();
        if sd == 0.0 {
            return if self.p_hat() == p { 0.0 } else { f64::INFINITY };
        }
        (self.p_hat() - p) / sd
    }

    pub fn merge(self, o: BinomialEstimate) -> BinomialEstimate {
        BinomialEstimate::new(self.hits + o.hits, self.trials + o.trials)
    }
}

pub fn wilson(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the bounds are exactly 0 and 1 at the edges; avoid rounding residue
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Pearson chi-square of observed counts against expected probabilities.
///
/// Bins with expected count below `min_expected` are pooled into one bin
/// (together with any probability mass missing from `probs`).
/// Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square(observed: &[u64], probs: &[f64], min_expected: f64) -> (f64, usize, f64) {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let n = total as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut pooled_obs, mut pooled_p) = (0u64, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        if p * n < min_expected {
            pooled_obs += o;
            pooled_p += p;
            continue;
        }
        let e = p * n;
        stat += (o as f64 - e).powi(2) / e;
        bins += 1;
    }
    pooled_p += (1.0 - probs.iter().sum::<f64>()).max(0.0);
    if pooled_p * n > 0.0 {
        let e = pooled_p * n;
        stat += (pooled_obs as f64 - e).powi(2) / e;
        bins += 1;
    } else if pooled_obs > 0 {
        return (f64::INFINITY, bins, 0.0);
    }
    let dof = bins.saturating_sub(1).max(1);
    let p_value = 1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat);
    (stat, dof, p_value)
}
