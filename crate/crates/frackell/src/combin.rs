//! Exact big-integer combinatorics: binomials, factorials, falling products.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact binomial coefficient l over n.
pub fn big_binomial(l: u64, n: u64) -> Result<BigInt> {
    if n > l {
        return Err(Error::Domain(format!(
            "binomial requires n <= l, got n={n}, l={l}"
        )));
    }
    let n = n.min(l - n);
    let mut acc = BigInt::one();
    for i in 0..n {
        acc *= l - i;
        acc /= i + 1; // exact: product of j consecutive integers is divisible by j!
    }
    Ok(acc)
}

/// Exact factorial.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Exact (k+n)!/k!, the product of the n integers k+1 ..= k+n.
pub fn rising_factorial_ratio(k: u64, n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 1..=n {
        acc *= k + i;
    }
    acc
}

/// Exact n^m with 0^0 = 1.
pub fn int_pow(n: u64, m: u32) -> BigInt {
    if m == 0 {
        return BigInt::one();
    }
    BigInt::from(n).pow(m)
}

/// Alternating sum c(m,l) = sum_{n=0}^{l} (-1)^(l-n) * binom(l,n) * n^m.
/// These are the exact numerators of the fractional Stirling numbers; at the
/// classic order they equal l! * S(m,l).
pub fn stirling_numerator(m: u32, l: u32) -> BigInt {
    if l == 0 {
        return if m == 0 { BigInt::one() } else { BigInt::zero() };
    }
    let mut acc = BigInt::zero();
    let mut binom = BigInt::one(); // binom(l, 0)
    for n in 0..=l {
        if n > 0 {
            // binom(l, n) = binom(l, n-1) * (l-n+1) / n, exact at each step
            binom *= l - n + 1;
            binom /= n;
        }
        let term = &binom * int_pow(n as u64, m);
        if (l - n) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}
