//! Critical Galton–Watson processes with Poisson(1) offspring.
//!
//! A process with `N` founders is `N` independent single-founder
//! processes. Generation `s` of founder `i` holds `mu^i(s)` particles;
//! the extinction time `tau^i` is the index of the first empty generation.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::stats::BinomialEstimate;

/// Default cap on the total number of particles in one trace.
pub const DEFAULT_PROGENY_CAP: u64 = 10_000_000;

/// Means below this are drawn by sequential inversion.
const INVERSION_BELOW: f64 = 30.0;

/// One Poisson(`mean`) draw.
///
/// Small means use inversion over the unbounded support; large means
/// (whole generations at once) go through `rand_distr`.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < INVERSION_BELOW {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            if p == 0.0 {
                break;
            }
            cdf += p;
        }
        return k;
    }
    let d = Poisson::new(mean).expect("finite positive mean");
    d.sample(rng) as u64
}

/// Generation sizes of every founder's line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GwTrace {
    pub founders: usize,
    /// `generations[i][s] = mu^i(s)`. An extinct line ends with its first
    /// zero; a line still alive at the horizon ends with a positive entry.
    pub generations: Vec<Vec<u64>>,
    /// Last generation index simulated.
    pub t_max: usize,
    /// The particle cap was hit; later founders were not simulated.
    pub truncated: bool,
}

impl GwTrace {
    /// `mu^i(s)`; `None` when generation `s` of founder `i` was not observed.
    pub fn mu(&self, i: usize, s: usize) -> Option<u64> {
        let g = &self.generations[i];
        match g.get(s) {
            Some(&v) => Some(v),
            None if g.last() == Some(&0) => Some(0),
            None => None,
        }
    }

    /// `tau^i`, if the line died within the horizon.
    pub fn tau(&self, i: usize) -> Option<usize> {
        let g = &self.generations[i];
        (g.last() == Some(&0)).then(|| g.len() - 1)
    }

    /// `nu^i`, the whole progeny of founder `i`, if the line died out.
    pub fn nu(&self, i: usize) -> Option<u64> {
        self.tau(i).map(|_| self.generations[i].iter().sum())
    }

    /// `nu^i(t)`: particles of founder `i` in generations strictly before `t`.
    pub fn nu_before(&self, i: usize, t: usize) -> Option<u64> {
        let g = &self.generations[i];
        if t <= g.len() || self.tau(i).is_some() {
            Some(g.iter().take(t).sum())
        } else {
            None
        }
    }

    /// `nu_N`, if every line died out.
    pub fn total_progeny(&self) -> Option<u64> {
        (0..self.founders).map(|i| self.nu(i)).sum()
    }

    /// `mu_N(s)` summed over founders, up to the longest recorded line.
    pub fn level_profile(&self) -> Vec<u64> {
        let len = self.generations.iter().map(|g| g.len()).max().unwrap_or(0);
        let mut out = vec![0; len];
        for g in &self.generations {
            for (s, &v) in g.iter().enumerate() {
                out[s] += v;
            }
        }
        while out.last() == Some(&0) {
            out.pop();
        }
        out
    }

    /// Every founder's line died out and the cap was never hit.
    pub fn is_complete(&self) -> bool {
        !self.truncated && (0..self.founders).all(|i| self.tau(i).is_some())
    }
}

/// Runs `founders` independent lines for at most `t_max` generations,
/// stopping everything once more than `progeny_cap` particles were born.
pub fn simulate<R: Rng + ?Sized>(founders: usize, t_max: usize, progeny_cap: u64, rng: &mut R) -> Result<GwTrace> {
    if founders == 0 {
        return Err(Error::InvalidSize("need at least one founder".into()));
    }
    if t_max == 0 {
        return Err(Error::InvalidConfig("t_max must be positive".into()));
    }
    if progeny_cap < founders as u64 {
        return Err(Error::InvalidConfig("progeny cap below the founder count".into()));
    }
    let mut trace = GwTrace { founders, generations: Vec::with_capacity(founders), t_max, truncated: false };
    let mut born = founders as u64;
    for _ in 0..founders {
        let mut line = vec![1u64];
        if !trace.truncated {
            let mut current = 1u64;
            for _ in 1..=t_max {
                let next = poisson(current as f64, rng);
                line.push(next);
                born += next;
                if born > progeny_cap {
                    trace.truncated = true;
                    break;
                }
                if next == 0 {
                    break;
                }
                current = next;
            }
        }
        trace.generations.push(line);
    }
    Ok(trace)
}

/// `q_t = P(mu_1(t) = 0)`: `q_0 = 0`, `q_{s+1} = exp(q_s - 1)`.
pub fn extinction_prob_exact(t: usize) -> f64 {
    1.0 - survival_prob_exact(t)
}

/// `1 - q_t`, iterated as `s_{k+1} = 1 - exp(-s_k)` to keep precision.
pub fn survival_prob_exact(t: usize) -> f64 {
    let mut s = 1.0f64;
    for _ in 0..t {
        s = -(-s).exp_m1();
    }
    s
}

/// Borel–Tanner law: `P(nu_N = k) = (N/k) e^{-k} k^{k-N} / (k-N)!`.
pub fn borel_tanner_pmf(founders: usize, k: u64) -> f64 {
    let n = founders as u64;
    if n == 0 || k < n {
        return 0.0;
    }
    let (nf, kf) = (n as f64, k as f64);
    ((nf / kf).ln() - kf + (kf - nf) * kf.ln() - ln_gamma(kf - nf + 1.0)).exp()
}

/// Upper bound on `P(nu_N > k_max)`.
///
/// Stirling's lower bound on `(k-N)!` and `(1 + N/(k-N))^(k-N) <= e^N` give
/// `P(nu_N = k) <= N / (k sqrt(2 pi (k-N)))`; integrating the right side
/// from `k_max` yields `2N / sqrt(2 pi (k_max - N))`.
pub fn borel_tanner_tail_bound(founders: usize, k_max: u64) -> f64 {
    let n = founders as f64;
    let gap = k_max as f64 - n;
    if gap <= 0.0 {
        return 1.0;
    }
    (2.0 * n / (2.0 * std::f64::consts::PI * gap).sqrt()).min(1.0)
}

/// `(t, d, r)` of the founder-ordering events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AEventParams {
    pub t: usize,
    pub d: usize,
    pub r: usize,
}

impl AEventParams {
    pub fn new(t: usize, d: usize, r: usize) -> Result<Self> {
        if t == 0 || r == 0 {
            return Err(Error::InvalidConfig("event needs t >= 1 and r >= 1".into()));
        }
        Ok(AEventParams { t, d, r })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
    /// The trace was truncated or some line outlived the horizon.
    Indeterminate,
}

impl From<bool> for Verdict {
    fn from(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

/// Founder indices sorted by extinction time, latest first; ties keep index order.
fn by_descending_tau(tr: &GwTrace) -> Option<Vec<(usize, usize)>> {
    let mut taus: Vec<(usize, usize)> =
        (0..tr.founders).map(|i| tr.tau(i).map(|tau| (i, tau))).collect::<Option<_>>()?;
    taus.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Some(taus)
}

/// Evaluates the founder-ordering event on a complete trace.
///
/// `d = 0`: the top line is alive at `t`, has at most `mu^1(t)` particles
/// from generation `t` on, the runner-up dies exactly at `t + 1` and all
/// other lines are empty at `t + 1`.
/// `d > 0`: the top line is alive at `t` and empty at `t + r`, the next `d`
/// lines die exactly at `t + 1`, and the rest are dead by `t`.
pub fn classify_event(tr: &GwTrace, p: AEventParams) -> Verdict {
    if !tr.is_complete() {
        return Verdict::Indeterminate;
    }
    let Some(order) = by_descending_tau(tr) else {
        return Verdict::Indeterminate;
    };
    let mu = |i: usize, s: usize| tr.mu(i, s).expect("complete trace");
    let t = p.t;
    let first = order[0].0;
    if mu(first, t) == 0 {
        return Verdict::Fails;
    }
    if p.d == 0 {
        let Some(&(_, tau2)) = order.get(1) else {
            return Verdict::Fails;
        };
        let nu = tr.nu(first).expect("complete trace");
        let before = tr.nu_before(first, t).expect("complete trace");
        let ok = nu - before <= mu(first, t) && tau2 == t + 1 && order[2..].iter().all(|&(j, _)| mu(j, t + 1) == 0);
        return ok.into();
    }
    if order.len() < p.d + 1 {
        return Verdict::Fails;
    }
    let ok = mu(first, t + p.r) == 0
        && order[1..=p.d].iter().all(|&(_, tau)| tau == t + 1)
        && order[p.d + 1..].iter().all(|&(_, tau)| tau <= t);
    ok.into()
}

/// An accepted conditioned trace with the number of attempts it took.
#[derive(Debug, Clone)]
pub struct Conditioned {
    pub trace: GwTrace,
    pub attempts: u64,
}

/// Rejection sampling of a process with `founders` founders and total
/// progeny exactly `total`. The induced forest is uniform among labeled
/// forests with that many roots and vertices.
pub fn conditioned_sample<R: Rng + ?Sized>(
    founders: usize,
    total: u64,
    max_attempts: u64,
    rng: &mut R,
) -> Result<Conditioned> {
    if total < founders as u64 {
        return Err(Error::InvalidConfig("total progeny below the founder count".into()));
    }
    // No line can be taller than the total progeny.
    let horizon = total as usize;
    for attempt in 1..=max_attempts {
        let trace = simulate(founders, horizon, total, rng)?;
        if trace.total_progeny() == Some(total) && !trace.truncated {
            return Ok(Conditioned { trace, attempts: attempt });
        }
    }
    Err(Error::ConditioningFailed { attempts: max_attempts, accepted: 0 })
}

/// Monte Carlo estimate of `P(|mu_N(1)/N - 1| > 1/2)`.
pub fn founders_generation_check<R: Rng + ?Sized>(
    founders: usize,
    trials: u64,
    rng: &mut R,
) -> Result<BinomialEstimate> {
    let mut hits = 0;
    for _ in 0..trials {
        let tr = simulate(founders, 1, u64::MAX, rng)?;
        let first_gen: u64 = (0..founders).map(|i| tr.mu(i, 1).unwrap_or(0)).sum();
        if founder_deviation_exceeds_half(first_gen, founders) {
            hits += 1;
        }
    }
    Ok(BinomialEstimate::new(hits, trials))
}

/// `|k/N - 1| > 1/2`, in integers.
fn founder_deviation_exceeds_half(k: u64, founders: usize) -> bool {
    let n = founders as u64;
    2 * k < n || 2 * k > 3 * n
}

/// Exact `P(|X/N - 1| > 1/2)` for `X ~ Poisson(N)`.
pub fn founders_tail_exact(founders: usize) -> f64 {
    let n = founders as f64;
    let ln_pmf = |k: u64| -n + k as f64 * n.ln() - ln_gamma(k as f64 + 1.0);
    let mut tail = 0.0;
    let mut k = 0u64;
    loop {
        let term = ln_pmf(k).exp();
        if founder_deviation_exceeds_half(k, founders) {
            tail += term;
        }
        if k as f64 > 1.5 * n && term < 1e-300 {
            break;
        }
        k += 1;
    }
    tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::substream;

    fn trace(lines: Vec<Vec<u64>>) -> GwTrace {
        GwTrace { founders: lines.len(), generations: lines, t_max: 1000, truncated: false }
    }

    #[test]
    fn immediate_extinction() {
        let tr = trace(vec![vec![1, 0]]);
        assert_eq!(tr.tau(0), Some(1));
        assert_eq!(tr.nu(0), Some(1));
        assert_eq!(tr.mu(0, 5), Some(0));
    }

    #[test]
    fn trace_accessors() {
        let tr = trace(vec![vec![1, 2, 3, 1, 0], vec![1, 1, 0]]);
        assert_eq!(tr.nu_before(0, 0), Some(0));
        assert_eq!(tr.nu_before(0, 2), Some(3));
        assert_eq!(tr.nu(0), Some(7));
        assert_eq!(tr.total_progeny(), Some(9));
        assert_eq!(tr.level_profile(), vec![2, 3, 3, 1]);
        let live = GwTrace { t_max: 2, ..trace(vec![vec![1, 2, 3]]) };
        assert_eq!(live.tau(0), None);
        assert_eq!(live.mu(0, 3), None);
        assert!(!live.is_complete());
    }

    #[test]
    fn simulated_traces_are_consistent() {
        for idx in 0..500 {
            let tr = simulate(3, 50, DEFAULT_PROGENY_CAP, &mut substream(11, idx)).unwrap();
            for g in &tr.generations {
                assert_eq!(g[0], 1);
                if let Some(z) = g.iter().position(|&v| v == 0) {
                    assert_eq!(z, g.len() - 1);
                }
                assert!(g.len() <= 51);
            }
        }
    }

    #[test]
    fn simulate_rejects_bad_input() {
        let mut rng = substream(0, 0);
        assert!(simulate(0, 5, 10, &mut rng).is_err());
        assert!(simulate(2, 0, 10, &mut rng).is_err());
        assert!(simulate(5, 5, 4, &mut rng).is_err());
    }

    #[test]
    fn cap_truncates() {
        let mut truncated = 0;
        for idx in 0..2000 {
            let tr = simulate(1, 10_000, 20, &mut substream(5, idx)).unwrap();
            if tr.truncated {
                truncated += 1;
                let born: u64 = tr.generations.iter().flatten().sum();
                assert!(born > 20);
            }
        }
        assert!(truncated > 0);
    }

    #[test]
    fn exact_extinction_values() {
        assert_eq!(extinction_prob_exact(0), 0.0);
        assert!((extinction_prob_exact(1) - (-1f64).exp()).abs() < 1e-15);
        // F(F(0)) with F(z) = e^{z-1}
        let q2 = ((-1f64).exp() - 1.0).exp();
        assert!((extinction_prob_exact(2) - q2).abs() < 1e-15);
        assert!((q2 - 0.531464).abs() < 1e-6);
        let qs: Vec<f64> = (0..200).map(extinction_prob_exact).collect();
        assert!(qs.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0));
    }

    #[test]
    fn survival_scaling_approaches_two() {
        let scaled: Vec<f64> = [100, 1000, 10_000].iter().map(|&t| t as f64 * survival_prob_exact(t)).collect();
        assert!(scaled.windows(2).all(|w| w[1] > w[0] && w[1] < 2.0), "{scaled:?}");
        assert!(scaled[2] > 1.99);
    }

    #[test]
    fn borel_tanner_values() {
        assert!((borel_tanner_pmf(1, 1) - (-1f64).exp()).abs() < 1e-15);
        assert!((borel_tanner_pmf(1, 2) - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(borel_tanner_pmf(3, 2), 0.0);
        // P(nu_2 = 3): two founders, exactly one child between them.
        let two = 2.0 * (-1f64).exp() * (-1f64).exp() * (-1f64).exp();
        assert!((borel_tanner_pmf(2, 3) - two).abs() < 1e-15);
    }

    #[test]
    fn borel_tanner_sums_to_one() {
        let k_max = 1_000_000u64;
        for n in [1usize, 3, 10] {
            let s: f64 = (n as u64..=k_max).map(|k| borel_tanner_pmf(n, k)).sum();
            let bound = borel_tanner_tail_bound(n, k_max);
            assert!(s <= 1.0 + 1e-9, "N={n} sum={s}");
            assert!(s + bound >= 1.0 - 1e-9, "N={n} sum={s} bound={bound}");
            assert!(bound < 0.02);
        }
    }

    #[test]
    fn event_requires_top_line_alive_at_t() {
        let tr = trace(vec![vec![1, 1, 0], vec![1, 0]]);
        for d in 0..3 {
            let p = AEventParams::new(3, d, 1).unwrap();
            assert_eq!(classify_event(&tr, p), Verdict::Fails);
        }
    }

    #[test]
    fn event_with_two_lines() {
        // tau = (t + 2, t + 1) with t = 2
        let tr = trace(vec![vec![1, 1, 1, 0], vec![1, 2, 1, 1, 0]]);
        assert_eq!(classify_event(&tr, AEventParams::new(2, 1, 2).unwrap()), Verdict::Holds);
        assert_eq!(classify_event(&tr, AEventParams::new(2, 1, 1).unwrap()), Verdict::Fails);
        // d = 0: nu^1 - nu^1(2) = 2 > mu^1(2) = 1
        assert_eq!(classify_event(&tr, AEventParams::new(2, 0, 1).unwrap()), Verdict::Fails);
        // tie at tau = t + 1; index 0 leads
        let tr0 = trace(vec![vec![1, 1, 1, 0], vec![1, 2, 2, 0]]);
        assert_eq!(classify_event(&tr0, AEventParams::new(2, 0, 1).unwrap()), Verdict::Holds);
    }

    #[test]
    fn indeterminate_when_truncated() {
        let mut tr = trace(vec![vec![1, 1, 0]]);
        tr.truncated = true;
        assert_eq!(classify_event(&tr, AEventParams::new(1, 0, 1).unwrap()), Verdict::Indeterminate);
        let live = GwTrace { t_max: 2, ..trace(vec![vec![1, 2, 3]]) };
        assert_eq!(classify_event(&live, AEventParams::new(1, 0, 1).unwrap()), Verdict::Indeterminate);
    }

    #[test]
    fn single_founder_trivial_conditioning() {
        let c = conditioned_sample(1, 1, 10_000, &mut substream(3, 0)).unwrap();
        assert_eq!(c.trace.total_progeny(), Some(1));
        assert!(matches!(
            conditioned_sample(2, 40, 3, &mut substream(3, 1)),
            Err(Error::ConditioningFailed { attempts: 3, .. })
        ));
    }

    #[test]
    fn founders_tail_values() {
        // N = 1: P(X != 1) = 1 - 1/e
        assert!((founders_tail_exact(1) - (1.0 - (-1f64).exp())).abs() < 1e-12);
        assert!(founders_tail_exact(100) < 1e-3);
        assert!(founders_tail_exact(400) < founders_tail_exact(100));
    }
}
