//! Closed-form constants and asymptotic formulas, each as a checkable
//! numeric function.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// `2π/3 − 827/(288π)`, the constant as printed (≈ 1.1803596).
pub fn rho_printed_constant() -> f64 {
    2.0 * PI / 3.0 - 827.0 / (288.0 * PI)
}

/// The bracket `8 + 7/4 + 4/9 + 1/16` subtracted from `8π²/6` in the series
/// evaluation, as an exact fraction.
pub fn printed_bracket_terms() -> Ratio<i64> {
    [(8, 1), (7, 4), (4, 9), (1, 16)].into_iter().map(|(a, b)| Ratio::new(a, b)).sum()
}

/// The four sub-series `Σ_k c/(k + a)²` as `(a, c)` pairs.
pub const SUBSERIES: [(u32, f64); 4] = [(2, 1.0), (3, 3.0), (4, 3.0), (5, 1.0)];

/// Constant `8ζ(2) − S`: what the leading terms removed from each ζ(2)
/// copy add up to, `Σ_(a,c) c · Σ_{j<a} 1/j²`, as an exact fraction.
pub fn subseries_offset() -> Ratio<i64> {
    SUBSERIES
        .iter()
        .map(|&(a, c)| {
            let partial: Ratio<i64> = (1..a as i64).map(|j| Ratio::new(1, j * j)).sum();
            partial * Ratio::from_integer(c as i64)
        })
        .sum()
}

/// A summed series with a rigorous remainder bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: u64,
    pub tail_bound: f64,
}

/// Kahan-compensated accumulator.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Partial sum of `S` over `k < terms`, in ascending `k`.
pub fn series_partial_sum(terms: u64) -> f64 {
    let mut acc = Compensated::default();
    for k in 0..terms {
        let k = k as f64;
        for &(a, c) in &SUBSERIES {
            let d = k + a as f64;
            acc.add(c / (d * d));
        }
    }
    acc.sum
}

/// `S = Σ_{k≥0} [1/(k+2)² + 3/(k+3)² + 3/(k+4)² + 1/(k+5)²]` with error at most `tol`.
///
/// For the decreasing summand `f`, `∫_K^∞ f ≤ Σ_{k≥K} f(k) ≤ f(K) + ∫_K^∞ f`;
/// the tail is estimated by the midpoint of that bracket and the bound is
/// its half-width.
pub fn series_sum(tol: f64) -> SeriesResult {
    assert!(tol > 0.0, "tolerance must be positive");
    // half-width <= Σ c / (2 (K + a)²) <= 4 / K²
    let terms = ((4.0 / tol).sqrt().ceil() as u64).max(1);
    let partial = series_partial_sum(terms);
    let k = terms as f64;
    let (mut lower, mut width) = (0.0, 0.0);
    for &(a, c) in &SUBSERIES {
        let d = k + a as f64;
        lower += c / d;
        width += c / (d * d);
    }
    SeriesResult { value: partial + lower + 0.5 * width, terms_used: terms, tail_bound: 0.5 * width }
}

/// `S / (2π)`, the constant implied by the series (≈ 0.4619517).
pub fn rho_series_constant(tol: f64) -> SeriesResult {
    let s = series_sum(tol * 2.0 * PI);
    SeriesResult { value: s.value / (2.0 * PI), terms_used: s.terms_used, tail_bound: s.tail_bound / (2.0 * PI) }
}

fn z_window(n: usize, big_n: usize) -> Result<f64> {
    let nf = n as f64;
    let z = big_n as f64 / nf.sqrt();
    let lo = nf.powf(-0.25);
    let hi = 4.0 * nf.ln().sqrt();
    if !(z > lo && z < hi) {
        return Err(Error::OutOfDomain(format!("z = N/sqrt(n) = {z:.4} outside ({lo:.4}, {hi:.4}) for n = {n}")));
    }
    Ok(z)
}

/// `P(λ = N) ≈ z e^{-z²/2} / √n` with `z = N/√n`.
pub fn lambda_pmf_asym(n: usize, big_n: usize) -> Result<f64> {
    let z = z_window(n, big_n)?;
    Ok(z * (-z * z / 2.0).exp() / (n as f64).sqrt())
}

/// `P(ν_N = n + N) ≈ z e^{-z²/2} / (n √(2π))` with `z = N/√n`.
pub fn total_progeny_asym(n: usize, big_n: usize) -> Result<f64> {
    let z = z_window(n, big_n)?;
    Ok(z * (-z * z / 2.0).exp() / (n as f64 * (2.0 * PI).sqrt()))
}

/// Frequency, height and size feeding the α/β bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaInputs {
    pub theta: f64,
    pub t: u64,
    pub n: u64,
}

impl AlphaInputs {
    /// `u = t √(|θ|/n)`.
    pub fn u(&self) -> f64 {
        self.t as f64 * (self.theta.abs() / self.n as f64).sqrt()
    }

    /// `β = √(−2iθ/n)` on the principal branch (positive real part).
    pub fn beta(&self) -> Complex64 {
        Complex64::new(0.0, -2.0 * self.theta / self.n as f64).sqrt()
    }

    /// `α = β (1 + e^{−tβ}) / (1 − e^{−tβ})`.
    pub fn alpha(&self) -> Complex64 {
        let beta = self.beta();
        let e = (-(self.t as f64) * beta).exp();
        beta * (1.0 + e) / (1.0 - e)
    }
}

/// `x / (1 − e^{−x})`, continuous at 0.
pub fn x_over_one_minus_exp(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    x / -(-x).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaReport {
    pub inputs: AlphaInputs,
    pub u: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub alpha_abs: f64,
    /// `3(u + 1)/t`.
    pub alpha_abs_bound: f64,
    /// `u / (1 − e^{−u})`.
    pub scalar: f64,
    pub re_alpha_positive: bool,
    pub abs_alpha_bounded: bool,
    pub scalar_in_range: bool,
}

impl AlphaReport {
    pub fn all_pass(&self) -> bool {
        self.re_alpha_positive && self.abs_alpha_bounded && self.scalar_in_range
    }
}

/// Evaluates `α` and checks `Re α > 0`, `|α| ≤ 3(u+1)/t` and
/// `1 ≤ u/(1−e^{−u}) ≤ 3(u+1)`.
pub fn alpha_bounds_check(a: AlphaInputs) -> Result<AlphaReport> {
    if a.theta == 0.0 || !a.theta.is_finite() {
        return Err(Error::Singular("theta = 0 makes beta vanish".into()));
    }
    if a.t == 0 || a.n == 0 {
        return Err(Error::InvalidConfig("t and n must be positive".into()));
    }
    let u = a.u();
    let beta = a.beta();
    let alpha = a.alpha();
    let bound = 3.0 * (u + 1.0) / a.t as f64;
    let scalar = x_over_one_minus_exp(u);
    Ok(AlphaReport {
        inputs: a,
        u,
        beta_re: beta.re,
        beta_im: beta.im,
        alpha_re: alpha.re,
        alpha_im: alpha.im,
        alpha_abs: alpha.norm(),
        alpha_abs_bound: bound,
        scalar,
        re_alpha_positive: alpha.re > 0.0,
        abs_alpha_bounded: alpha.norm() <= bound,
        scalar_in_range: (1.0..=3.0 * (u + 1.0)).contains(&scalar),
    })
}

/// One Monte Carlo point for the √n fit: `(n, p̂, stderr of p̂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRow {
    pub n: f64,
    pub p_hat: f64,
    pub stderr: f64,
}

/// Weighted least squares of `p̂ √n` on `c + b n^{-1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqrtFit {
    pub c: f64,
    pub b: f64,
    pub se_c: f64,
    pub se_b: f64,
    pub cov_cb: f64,
    /// `(y − ŷ)/σ_y` per row.
    pub residuals: Vec<f64>,
    pub chi2: f64,
    pub dof: usize,
}

impl SqrtFit {
    pub fn ci95(&self) -> (f64, f64) {
        (self.c - crate::stats::Z95 * self.se_c, self.c + crate::stats::Z95 * self.se_c)
    }

    /// Signed distance of `value` from `c` in standard errors of `c`.
    pub fn distance(&self, value: f64) -> f64 {
        (self.c - value) / self.se_c
    }
}

fn scaled(rows: &[FitRow]) -> Result<Vec<(f64, f64, f64)>> {
    rows.iter()
        .map(|r| {
            if r.stderr.is_nan() || r.n.is_nan() || r.stderr <= 0.0 || r.n <= 0.0 {
                return Err(Error::Fit(format!("row at n = {} needs stderr > 0", r.n)));
            }
            let s = r.n.sqrt();
            Ok((1.0 / s, r.p_hat * s, r.stderr * s))
        })
        .collect()
}

pub fn fit_sqrt_law(rows: &[FitRow]) -> Result<SqrtFit> {
    let mut distinct: Vec<f64> = rows.iter().map(|r| r.n).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 distinct n, got {}", distinct.len())));
    }
    let pts = scaled(rows)?;
    // normal equations with weights 1/σ²
    let (mut sw, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, sd) in &pts {
        let w = 1.0 / (sd * sd);
        sw += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * y;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if det.is_nan() || det.abs() <= 1e-12 * sw * sxx {
        return Err(Error::Fit("singular design".into()));
    }
    let c = (sxx * sy - sx * sxy) / det;
    let b = (sw * sxy - sx * sy) / det;
    let residuals: Vec<f64> = pts.iter().map(|&(x, y, sd)| (y - c - b * x) / sd).collect();
    let chi2 = residuals.iter().map(|r| r * r).sum();
    Ok(SqrtFit {
        c,
        b,
        se_c: (sxx / det).sqrt(),
        se_b: (sw / det).sqrt(),
        cov_cb: -sx / det,
        residuals,
        chi2,
        dof: pts.len() - 2,
    })
}

/// The degenerate model `p̂ √n = c`: the inverse-variance weighted mean
/// and its standard error.
pub fn fit_constant(rows: &[FitRow]) -> Result<(f64, f64)> {
    if rows.is_empty() {
        return Err(Error::Fit("no rows".into()));
    }
    let pts = scaled(rows)?;
    let (mut sw, mut sy) = (0.0, 0.0);
    for &(_, y, sd) in &pts {
        let w = 1.0 / (sd * sd);
        sw += w;
        sy += w * y;
    }
    Ok((sy / sw, (1.0 / sw).sqrt()))
}
