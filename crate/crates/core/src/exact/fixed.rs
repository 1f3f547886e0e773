//! Binary fixed-point reals on top of `BigInt`, just enough to evaluate
//! `exp`, powers and quotients at a few thousand bits.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `raw / 2^bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixed {
    raw: BigInt,
    bits: u32,
}

impl Fixed {
    pub fn zero(bits: u32) -> Self {
        Fixed { raw: BigInt::zero(), bits }
    }

    pub fn one(bits: u32) -> Self {
        Fixed::from_int(&BigInt::one(), bits)
    }

    pub fn from_int(v: &BigInt, bits: u32) -> Self {
        Fixed { raw: v << bits as usize, bits }
    }

    pub fn from_uint(v: &BigUint, bits: u32) -> Self {
        Fixed::from_int(&BigInt::from(v.clone()), bits)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64, bits: u32) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            return Fixed::zero(bits);
        }
        let raw_bits = x.abs().to_bits();
        let exp = ((raw_bits >> 52) & 0x7ff) as i64;
        let frac = raw_bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let mut raw = BigInt::from(mant);
        let shift = e + bits as i64;
        raw = if shift >= 0 { raw << shift as usize } else { raw >> (-shift) as usize };
        if x < 0.0 {
            raw = -raw;
        }
        Fixed { raw, bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn raw(&self) -> &BigInt {
        &self.raw
    }

    pub fn is_negative(&self) -> bool {
        self.raw.is_negative()
    }

    pub fn is_zero(&self) -> bool {
        self.raw.is_zero()
    }

    pub fn add(&self, o: &Fixed) -> Fixed {
        debug_assert_eq!(self.bits, o.bits);
        Fixed { raw: &self.raw + &o.raw, bits: self.bits }
    }

    pub fn sub(&self, o: &Fixed) -> Fixed {
        debug_assert_eq!(self.bits, o.bits);
        Fixed { raw: &self.raw - &o.raw, bits: self.bits }
    }

    pub fn mul(&self, o: &Fixed) -> Fixed {
        debug_assert_eq!(self.bits, o.bits);
        Fixed { raw: (&self.raw * &o.raw) >> self.bits as usize, bits: self.bits }
    }

    pub fn div(&self, o: &Fixed) -> Fixed {
        debug_assert_eq!(self.bits, o.bits);
        Fixed { raw: (&self.raw << self.bits as usize) / &o.raw, bits: self.bits }
    }

    pub fn div_small(&self, k: u64) -> Fixed {
        Fixed { raw: &self.raw / k, bits: self.bits }
    }

    pub fn pow(&self, mut e: u64) -> Fixed {
        let mut base = self.clone();
        let mut acc = Fixed::one(self.bits);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Taylor series; intended for moderate arguments (|x| of order 1).
    pub fn exp(&self) -> Fixed {
        let mut sum = Fixed::one(self.bits);
        let mut term = Fixed::one(self.bits);
        let mut k = 1u64;
        loop {
            term = term.mul(self).div_small(k);
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term);
            k += 1;
        }
        sum
    }

    pub fn cmp_abs(&self, o: &Fixed) -> Ordering {
        self.raw.abs().cmp(&o.raw.abs())
    }

    pub fn to_f64(&self) -> f64 {
        let (sign, mag) = self.raw.clone().into_parts();
        let f = ratio_to_f64(&mag, self.bits);
        if sign == Sign::Minus {
            -f
        } else {
            f
        }
    }

    /// Base-10 logarithm of `|self|`; `-inf` at zero.
    pub fn log10_abs(&self) -> f64 {
        let mag = self.raw.magnitude();
        if mag.is_zero() {
            return f64::NEG_INFINITY;
        }
        let nb = mag.bits();
        let keep = 60u64;
        let (top, dropped) = if nb > keep { (mag >> (nb - keep) as usize, nb - keep) } else { (mag.clone(), 0) };
        let top = top.to_f64().unwrap_or(f64::INFINITY);
        (top.log2() + dropped as f64 - self.bits as f64) * std::f64::consts::LOG10_2
    }

    /// Scientific notation with `digits` significant digits (truncated).
    pub fn to_sci(&self, digits: usize) -> String {
        if self.raw.is_zero() {
            return "0".into();
        }
        let sign = if self.is_negative() { "-" } else { "" };
        let approx_exp = self.log10_abs().floor() as i64;
        // Scale so that the integer part carries `digits + 2` digits.
        let shift = digits as i64 + 1 - approx_exp;
        let mag = BigInt::from(self.raw.magnitude().clone());
        let scaled = if shift >= 0 {
            (mag * BigInt::from(10u32).pow(shift as u32)) >> self.bits as usize
        } else {
            (mag >> self.bits as usize) / BigInt::from(10u32).pow((-shift) as u32)
        };
        let s = scaled.to_string();
        let exp10 = s.len() as i64 - 1 - shift;
        let mant = &s[..digits.min(s.len())];
        let (head, tail) = mant.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp10}")
        } else {
            format!("{sign}{head}.{tail}e{exp10}")
        }
    }
}

/// `mag / 2^bits` rounded to the nearest representable `f64` (up to one ulp).
fn ratio_to_f64(mag: &BigUint, bits: u32) -> f64 {
    if mag.is_zero() {
        return 0.0;
    }
    let nb = mag.bits();
    let keep = 64u64;
    let (top, dropped) = if nb > keep { (mag >> (nb - keep) as usize, nb - keep) } else { (mag.clone(), 0) };
    let top = top.to_u64().expect("at most 64 bits") as f64;
    let e = dropped as i64 - bits as i64;
    let e = e.clamp(-4000, 4000) as i32;
    top * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip() {
        for x in [0.0, 1.0, -2.5, 0.1, 1e-300, 123456.789] {
            assert_eq!(Fixed::from_f64(x, 1200).to_f64(), x);
        }
    }

    #[test]
    fn exp_matches_std() {
        for x in [0.0, 0.25, 1.0, -0.7, 1.5] {
            let e = Fixed::from_f64(x, 256).exp().to_f64();
            assert!((e - f64::exp(x)).abs() <= 4.0 * f64::EPSILON * e, "{x}");
        }
    }

    #[test]
    fn division_and_power() {
        let b = 512;
        let third = Fixed::one(b).div(&Fixed::from_f64(3.0, b));
        let back = third.mul(&Fixed::from_f64(3.0, b));
        assert!(Fixed::one(b).sub(&back).raw().abs() < BigInt::from(4));
        let half_pow = Fixed::from_f64(0.5, b).pow(100);
        assert_eq!(half_pow.to_f64(), 0.5f64.powi(100));
    }

    #[test]
    fn sci_formatting() {
        let b = 300;
        assert_eq!(Fixed::from_f64(1234.5, b).to_sci(5), "1.2345e3");
        assert_eq!(Fixed::from_f64(-0.375, b).to_sci(3), "-3.75e-1");
        assert_eq!(Fixed::from_f64(2.0, b).pow(100).to_sci(6), "1.26765e30");
        assert_eq!(Fixed::from_f64(0.5, b).pow(200).to_sci(4), "6.223e-61");
    }
}
