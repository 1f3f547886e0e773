//! Mappings of bounded height: exact counts, the nested roots `rho_j`,
//! and the two classical approximations built on them.
//!
//! Exponential generating functions are carried as labeled counts
//! `a_m = m! [x^m] A(x)`, which keeps every coefficient an integer.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::{E, PI};

use super::fixed::Fixed;

/// Rows `0..=m` of Pascal's triangle.
fn binomials(m: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let mut row = vec![BigUint::one(); i + 1];
        for j in 1..i {
            row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
        }
        rows.push(row);
    }
    rows
}

/// Labeled counts of `x · exp(A(x))` truncated at degree `len - 1`.
fn x_exp(a: &[BigUint], binom: &[Vec<BigUint>]) -> Vec<BigUint> {
    let len = a.len();
    // B = exp(A): b_0 = 1, b_{m+1} = sum_k C(m,k) a_{k+1} b_{m-k}
    let mut b = vec![BigUint::zero(); len];
    b[0] = BigUint::one();
    for m in 0..len.saturating_sub(1) {
        let mut s = BigUint::zero();
        for k in 0..=m {
            if a[k + 1].is_zero() {
                continue;
            }
            s += &binom[m][k] * &a[k + 1] * &b[m - k];
        }
        b[m + 1] = s;
    }
    // C = x B: c_m = m b_{m-1}
    let mut c = vec![BigUint::zero(); len];
    for m in 1..len {
        c[m] = &b[m - 1] * m as u64;
    }
    c
}

/// Labeled counts of rooted trees of height at most `h` on `0..=n_max` vertices.
pub fn tree_counts(n_max: usize, h: u32) -> Vec<BigUint> {
    let binom = binomials(n_max);
    let mut t = vec![BigUint::zero(); n_max + 1];
    if n_max >= 1 {
        t[1] = BigUint::one();
    }
    // Trees on at most n_max vertices have height < n_max, so iterating
    // beyond that changes nothing in the truncated series.
    for _ in 0..(h as usize).min(n_max) {
        t = x_exp(&t, &binom);
    }
    t
}

/// `T_{n,h}` for every `n` in `0..=n_max`: mappings of `[n]` in which every
/// vertex has height at most `h`.
///
/// `T = n! [x^n] 1 / (1 - t_h(x))` with `t_0 = x`, `t_{k+1} = x exp(t_k)`.
pub fn height_le_counts(n_max: usize, h: u32) -> Vec<BigUint> {
    let binom = binomials(n_max);
    let t = tree_counts(n_max, h);
    // D = 1 + T D: d_m = sum_{k>=1} C(m,k) t_k d_{m-k}
    let mut d = vec![BigUint::zero(); n_max + 1];
    d[0] = BigUint::one();
    for m in 1..=n_max {
        let mut s = BigUint::zero();
        for k in 1..=m {
            s += &binom[m][k] * &t[k] * &d[m - k];
        }
        d[m] = s;
    }
    d
}

/// Number of mappings of `[n]` with every vertex at height at most `h`.
pub fn count_height_le_exact(n: usize, h: u32) -> BigUint {
    height_le_counts(n, h).swap_remove(n)
}

/// `L_j(x)` with `L_0(x) = x`, `L_{k+1}(x) = x exp(L_k(x))`.
///
/// Returns `+inf` once the iterate passes 64, which is all the root
/// finder needs to know (the iterates increase with both `j` and `x`).
pub fn nested_iterate(j: u32, x: f64) -> f64 {
    let mut y = x;
    for _ in 0..j {
        y = x * y.exp();
        if y > 64.0 {
            return f64::INFINITY;
        }
    }
    y
}

/// `(L_j(x), L_j'(x))`.
fn nested_with_derivative(j: u32, x: f64) -> (f64, f64) {
    let (mut y, mut dy) = (x, 1.0);
    for _ in 0..j {
        let e = y.exp();
        dy = e * (1.0 + x * dy);
        y = x * e;
    }
    (y, dy)
}

/// Default tolerance for [`rho_root`].
pub const RHO_TOL: f64 = 1e-12;

/// The positive root `rho_j` of `L_j(x) = 1`; `rho_0 = 1`.
///
/// Bisection on `[0, 1]` down to `tol`, then one Newton step.
pub fn rho_root(j: u32, tol: f64) -> f64 {
    assert!(tol > 0.0, "tolerance must be positive");
    if j == 0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if nested_iterate(j, mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let (y, dy) = nested_with_derivative(j, x);
    let polished = x - (y - 1.0) / dy;
    if (lo..=hi).contains(&polished) {
        polished
    } else {
        x
    }
}

/// Grusho's asymptotic `rho_m ~ (1/e)(1 + (2/m^2)(pi/2)^2)`.
pub fn grusho_rho_approx(m: u32) -> f64 {
    assert!(m >= 1);
    let m = m as f64;
    (1.0 + 2.0 / (m * m) * (PI / 2.0).powi(2)) / E
}

/// `1 + rho_1 + rho_1 rho_2 + ... + rho_1 ... rho_h`.
fn sachkov_denominator(h: u32) -> f64 {
    let mut sum = 1.0;
    let mut prod = 1.0;
    for j in 1..=h {
        prod *= rho_root(j, RHO_TOL);
        sum += prod;
    }
    sum
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Natural log of Sachkov's estimate `n! rho_h^-n / (1 + rho_1 + ... + rho_1...rho_h)`.
pub fn ln_sachkov_count(n: usize, h: u32) -> f64 {
    ln_factorial(n) - n as f64 * rho_root(h, RHO_TOL).ln() - sachkov_denominator(h).ln()
}

/// Sachkov's estimate of `T_{n,h}`; `+inf` when it exceeds the `f64` range
/// (use [`ln_sachkov_count`] there).
pub fn sachkov_count(n: usize, h: u32) -> f64 {
    if h == 0 {
        // rho_0 = 1 and the denominator is 1: exactly n!.
        return exact_factorial(n).to_f64().unwrap_or(f64::INFINITY);
    }
    ln_sachkov_count(n, h).exp()
}

fn exact_factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Natural log of a big unsigned integer.
pub fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (v >> shift as usize).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Working precision (bits) for [`rho_root_precise`] and the deviation table.
pub const PRECISE_BITS: u32 = 4096;

fn fixed_nested(j: u32, x: &Fixed) -> (Fixed, Fixed) {
    let bits = x.bits();
    let mut y = x.clone();
    let mut dy = Fixed::one(bits);
    for _ in 0..j {
        let e = y.exp();
        dy = e.mul(&Fixed::one(bits).add(&x.mul(&dy)));
        y = x.mul(&e);
    }
    (y, dy)
}

/// `rho_j` to `bits` fractional bits: Newton iteration seeded by [`rho_root`].
pub fn rho_root_precise(j: u32, bits: u32) -> Fixed {
    if j == 0 {
        return Fixed::one(bits);
    }
    let mut x = Fixed::from_f64(rho_root(j, RHO_TOL), bits);
    let one = Fixed::one(bits);
    for _ in 0..64 {
        let (y, dy) = fixed_nested(j, &x);
        let step = y.sub(&one).div(&dy);
        x = x.sub(&step);
        // Stop once the correction is within a few ulps.
        if step.raw().bits() < 8 {
            break;
        }
    }
    x
}

/// One line of the bounded-height comparison.
#[derive(Debug, Clone)]
pub struct HeightCountRow {
    pub n: usize,
    pub h: u32,
    pub exact: BigUint,
    /// `ln` of Sachkov's estimate.
    pub sachkov_ln: f64,
    /// `sachkov / exact`.
    pub ratio: f64,
    /// `sachkov / exact - 1` evaluated at [`PRECISE_BITS`] bits.
    pub deviation: Fixed,
}

impl HeightCountRow {
    /// Sachkov's estimate in decimal scientific notation.
    pub fn approx_sci(&self) -> String {
        let log10 = self.sachkov_ln / std::f64::consts::LN_10;
        let e = log10.floor();
        format!("{:.9}e{}", 10f64.powf(log10 - e), e as i64)
    }

    pub fn csv_line(&self) -> String {
        format!("{},{},{},{},{:.12}", self.n, self.h, self.exact, self.approx_sci(), self.ratio)
    }
}

pub const HEIGHT_TABLE_HEADER: &str = "n,h,exact,approx,ratio";

/// Exact counts against Sachkov's estimate for every `(n, h)` pair.
pub fn height_count_table(ns: &[usize], hs: &[u32]) -> Vec<HeightCountRow> {
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let bits = PRECISE_BITS;
    let mut rows = Vec::new();
    for &h in hs {
        let counts = height_le_counts(n_max, h);
        let rhos: Vec<Fixed> = (0..=h).map(|j| rho_root_precise(j, bits)).collect();
        let mut denom = Fixed::one(bits);
        let mut prod = Fixed::one(bits);
        for r in &rhos[1..] {
            prod = prod.mul(r);
            denom = denom.add(&prod);
        }
        for &n in ns {
            let exact = counts[n].clone();
            // deviation = n! / (T rho^n S) - 1
            let scaled = Fixed::from_uint(&exact, bits).mul(&rhos[h as usize].pow(n as u64)).mul(&denom);
            let ratio_fixed = Fixed::from_uint(&exact_factorial(n), bits).div(&scaled);
            let deviation = ratio_fixed.sub(&Fixed::one(bits));
            rows.push(HeightCountRow {
                n,
                h,
                sachkov_ln: ln_sachkov_count(n, h),
                ratio: ratio_fixed.to_f64(),
                exact,
                deviation,
            });
        }
    }
    rows
}
