//! Exact law of the number of cyclic vertices of a uniform mapping.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Number of mappings of `[n]` with exactly `k` cyclic vertices:
/// `k · n^(n-k) · (n-1)! / (n-k)!`. Zero outside `1..=n`.
pub fn lambda_count(n: usize, k: usize) -> BigUint {
    if k == 0 || k > n {
        return BigUint::zero();
    }
    let mut falling = BigUint::one();
    for j in (n - k + 1)..n {
        falling *= j as u64;
    }
    BigUint::from(k) * BigUint::from(n).pow((n - k) as u32) * falling
}

/// `lambda_count(n, k)` for every `k` in `0..=n` (index 0 is zero).
///
/// Uses `q_{k+1} = q_k · (n - k) / n` with `q_1 = n^(n-1)`; each division
/// is exact because `q_k` still carries the factor `n^(n-k)`.
pub fn lambda_counts(n: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); n + 1];
    if n == 0 {
        return out;
    }
    let big_n = BigUint::from(n);
    let mut q = big_n.pow((n - 1) as u32);
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = &q * k as u64;
        if k < n {
            q = q * (n - k) as u64 / &big_n;
        }
    }
    out
}

fn over_n_pow_n(count: BigUint, n: usize) -> BigRational {
    BigRational::new(BigInt::from(count), BigInt::from(BigUint::from(n).pow(n as u32)))
}

/// `P(λ = k) = k (n-1)! / (n^k (n-k)!)` as an exact rational; zero outside `1..=n`.
pub fn lambda_pmf_exact(n: usize, k: usize) -> BigRational {
    if n == 0 || k == 0 || k > n {
        return BigRational::zero();
    }
    let mut falling = BigUint::one();
    for j in (n - k + 1)..n {
        falling *= j as u64;
    }
    BigRational::new(BigInt::from(falling * k as u64), BigInt::from(BigUint::from(n).pow(k as u32)))
}

/// Integers `k` in the open window `(n^(1/5), 4 sqrt(n ln n))`.
pub fn lambda_main_window(n: usize) -> std::ops::RangeInclusive<usize> {
    let nf = n as f64;
    let lo = nf.powf(0.2);
    let hi = 4.0 * (nf * nf.ln()).sqrt();
    // smallest integer > lo, largest integer < hi
    let first = lo.floor() as usize + 1;
    let last = if hi.fract() == 0.0 { hi as usize - 1 } else { hi.floor() as usize };
    first..=last.min(n)
}

/// Probability mass of `λ` outside [`lambda_main_window`].
pub fn lambda_tail_mass(n: usize) -> BigRational {
    assert!(n >= 2, "tail mass needs n >= 2");
    let window = lambda_main_window(n);
    let counts = lambda_counts(n);
    let tail: BigUint = counts.into_iter().enumerate().filter(|(k, _)| !window.contains(k)).map(|(_, c)| c).sum();
    over_n_pow_n(tail, n)
}

/// Full exact pmf as rationals over `n^n`, index `k` in `0..=n`.
pub fn lambda_pmf_table(n: usize) -> Vec<BigRational> {
    lambda_counts(n).into_iter().map(|c| over_n_pow_n(c, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn small_values() {
        assert_eq!(lambda_pmf_exact(2, 1), q(1, 2));
        assert_eq!(lambda_pmf_exact(2, 2), q(1, 2));
        assert_eq!(lambda_pmf_exact(2, 3), BigRational::zero());
        assert_eq!(lambda_pmf_exact(2, 0), BigRational::zero());
        // n!/n^n at k = n
        assert_eq!(lambda_pmf_exact(5, 5), q(120, 3125));
    }

    #[test]
    fn counts_agree_with_pmf() {
        for n in 1..=30 {
            let counts = lambda_counts(n);
            let table = lambda_pmf_table(n);
            for k in 0..=n {
                assert_eq!(counts[k], lambda_count(n, k));
                assert_eq!(table[k], lambda_pmf_exact(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        for n in 1..=200 {
            let s: BigRational = (1..=n).map(|k| lambda_pmf_exact(n, k)).sum();
            assert_eq!(s, BigRational::one(), "n={n}");
        }
    }

    #[test]
    fn pmf_times_n_pow_n_is_integer() {
        for n in 1..=30 {
            let scale = BigRational::from_integer(BigInt::from(BigUint::from(n).pow(n as u32)));
            for k in 1..=n {
                let v = lambda_pmf_exact(n, k) * &scale;
                assert!(v.is_integer() && v >= BigRational::zero(), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn window_edges() {
        // (2^0.2, 4 sqrt(2 ln 2)) ~ (1.149, 4.71): only k = 2 inside [1, 2].
        assert_eq!(lambda_main_window(2).filter(|&k| k <= 2).collect::<Vec<_>>(), vec![2]);
        assert_eq!(lambda_tail_mass(2), q(1, 2));
    }

    #[test]
    fn tail_is_complement_of_window() {
        let n = 100;
        let inside: BigRational = lambda_main_window(n).map(|k| lambda_pmf_exact(n, k)).sum();
        assert_eq!(lambda_tail_mass(n), BigRational::one() - inside);
    }

    #[test]
    fn tail_at_ten_thousand() {
        // Frozen from exact summation; dominated by k <= 6 (= n^(1/5) rounded down).
        let v = lambda_tail_mass(10_000).to_f64().unwrap() * 100.0;
        assert!((v - 0.2098250734838705).abs() < 1e-10, "{v}");
    }
}
