//! High-precision base-2 logarithms of big integers.
//!
//! Level counts grow like 2^n, so every dimension ratio is a quotient of
//! logarithms of integers far beyond machine range. We compute `log2` as a
//! fixed-point value with a configurable number of fractional bits
//! (default 128) and only drop to `f64` at the very end.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Natural log of 2, used when converting log2-domain values to natural logs.
pub const LN_2: f64 = core::f64::consts::LN_2;

/// `log2(n)` as an exact rational when `n` is a power of two.
fn log2_exact_pow2(n: &BigUint) -> Option<BigRational> {
    if n.is_zero() {
        return None;
    }
    if n.count_ones() == 1 {
        let e = n.bits() - 1;
        Some(BigRational::from_integer(BigInt::from(e)))
    } else {
        None
    }
}

/// `log2(n)` to `frac_bits` fractional bits of precision, as a rational
/// with denominator `2^frac_bits`. Exact for powers of two.
///
/// Uses the classic bit-extraction scheme: normalize the mantissa into
/// `[1, 2)`, then repeatedly square it; each squaring yields one output bit.
pub fn log2_big(n: &BigUint, frac_bits: u32) -> BigRational {
    assert!(!n.is_zero(), "log2 of zero");
    if let Some(exact) = log2_exact_pow2(n) {
        return exact;
    }
    let int_part = n.bits() - 1;
    // Guard bits keep the truncation error of repeated squaring below the
    // last requested bit.
    let guard = 32u32;
    let work = frac_bits + guard;
    // y = n / 2^int_part in fixed point with `work` fractional bits; y in [1,2).
    let mut y: BigUint = n << work >> int_part;
    let two: BigUint = BigUint::one() << (work + 1);
    let mut frac = BigUint::zero();
    for _ in 0..frac_bits {
        // y <- y^2, renormalized to `work` fractional bits.
        y = (&y * &y) >> work;
        frac <<= 1;
        if y >= two {
            y >>= 1;
            frac += 1u32;
        }
    }
    let num = (BigUint::from(int_part) << frac_bits) + frac;
    BigRational::new(BigInt::from(num), BigInt::one() << frac_bits)
}

/// `log2(n)` as an `f64`, computed through the fixed-point path.
pub fn log2_f64(n: &BigUint, frac_bits: u32) -> f64 {
    rational_to_f64(&log2_big(n, frac_bits))
}

/// Natural log of a big integer as an `f64`.
pub fn ln_f64(n: &BigUint, frac_bits: u32) -> f64 {
    log2_f64(n, frac_bits) * LN_2
}

/// Rational to f64, falling back to a scaled division for extreme magnitudes.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Shift numerator and denominator into range, tracking the exponent.
    let num_bits = r.numer().magnitude().bits() as i64;
    let den_bits = r.denom().magnitude().bits() as i64;
    let shift = num_bits.max(den_bits).saturating_sub(64);
    if shift <= 0 {
        return f64::NAN;
    }
    let num = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let den = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn powers_of_two_are_exact() {
        for e in [0u64, 1, 7, 100, 4096] {
            let n = BigUint::one() << e;
            let l = log2_big(&n, DEFAULT_PRECISION_BITS);
            assert_eq!(l, BigRational::from_integer(BigInt::from(e)));
        }
    }

    #[test]
    fn log2_three_matches_reference() {
        let l = log2_f64(&BigUint::from(3u32), DEFAULT_PRECISION_BITS);
        assert!((l - 3f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn log2_large_integer() {
        // 3^200: compare against 200*log2(3) computed in f64.
        let n = BigUint::from(3u32).pow(200);
        let l = log2_f64(&n, DEFAULT_PRECISION_BITS);
        assert!((l - 200.0 * 3f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn additive_within_precision() {
        let a = BigUint::from(7u32);
        let b = BigUint::from(11u32);
        let la = log2_big(&a, 128);
        let lb = log2_big(&b, 128);
        let lab = log2_big(&(a * b), 128);
        let diff = rational_to_f64(&(la + lb - lab)).abs();
        assert!(diff < 1e-30);
    }
}
