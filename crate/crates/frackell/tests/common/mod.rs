//! Shared test oracles, written against raw `astro_float` arithmetic so they
//! are independent of every code path they check.

#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};

pub const RM: RoundingMode = RoundingMode::ToEven;

pub fn bits(digits: u32) -> usize {
    (digits as f64 * 3.321928094887362).ceil() as usize + 64
}

pub fn bf(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

pub fn consts() -> Consts {
    Consts::new().expect("constants cache")
}

/// erf(z) by the Maclaurin series, z in f64 desk range (|z| ≤ ~6).
pub fn erf_oracle(z: f64, digits: u32) -> BigFloat {
    let p = bits(digits + 25);
    let mut cc = consts();
    let zb = bf(z, p);
    let z2 = zb.mul(&zb, p, RM);
    // sum_{n} (-1)^n z^(2n+1) / (n! (2n+1))
    let mut term_pow = zb.clone(); // z^(2n+1)
    let mut fact = bf(1.0, p);
    let mut sum = BigFloat::new(p);
    for n in 0..5000u64 {
        if n > 0 {
            fact = fact.mul(&bf(n as f64, p), p, RM);
            term_pow = term_pow.mul(&z2, p, RM);
        }
        let denom = fact.mul(&bf(2.0 * n as f64 + 1.0, p), p, RM);
        let mut t = term_pow.div(&denom, p, RM);
        if n % 2 == 1 {
            t = t.neg();
        }
        let next = sum.add(&t, p, RM);
        // stop once the term is far below the target precision
        let scale_exp = sum.exponent().unwrap_or(0);
        let term_exp = t.exponent().unwrap_or(i32::MIN / 2);
        sum = next;
        if n > 4 && (t.is_zero() || term_exp < scale_exp - (digits as i32 + 20) * 4) {
            break;
        }
    }
    let pi = cc.pi(p, RM);
    let two_over_sqrt_pi = bf(2.0, p).div(&pi.sqrt(p, RM), p, RM);
    sum.mul(&two_over_sqrt_pi, p, RM)
}

/// erfc(z) = 1 - erf(z).
pub fn erfc_oracle(z: f64, digits: u32) -> BigFloat {
    let p = bits(digits + 25);
    bf(1.0, p).sub(&erf_oracle(z, digits), p, RM)
}

/// E_{1/2}(z) = e^(z²)·erfc(-z), the closed form used to cross-check the
/// Mittag-Leffler series at μ = 1/2.
pub fn ml_half_oracle(z: f64, digits: u32) -> BigFloat {
    let p = bits(digits + 25);
    let mut cc = consts();
    let zb = bf(z, p);
    let z2 = zb.mul(&zb, p, RM);
    let e_z2 = z2.exp(p, RM, &mut cc);
    e_z2.mul(&erfc_oracle(-z, digits), p, RM)
}

/// exp(z) at high precision (the independent exponential oracle).
pub fn exp_oracle(z: f64, digits: u32) -> BigFloat {
    let p = bits(digits + 10);
    let mut cc = consts();
    bf(z, p).exp(p, RM, &mut cc)
}

/// |a - b| as f64.
pub fn abs_diff_f64(a: &BigFloat, b: &BigFloat, digits: u32) -> f64 {
    let p = bits(digits);
    bf_to_f64(&a.sub(b, p, RM)).abs()
}

/// Relative deviation |a-b| / |b| as f64.
pub fn rel_dev_f64(a: &BigFloat, b: &BigFloat, digits: u32) -> f64 {
    let p = bits(digits);
    let d = a.sub(b, p, RM);
    let q = d.div(b, p, RM);
    bf_to_f64(&q).abs()
}

/// Approximate f64 view of a BigFloat (top 128 mantissa bits).
pub fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let e = x.exponent().unwrap_or(0) as i64;
    let words = x.mantissa_digits().unwrap_or(&[]);
    let top = words.last().copied().unwrap_or(0) as f64;
    let next = if words.len() > 1 {
        words[words.len() - 2] as f64
    } else {
        0.0
    };
    let frac = top / 2f64.powi(64) + next / 2f64.powi(128);
    let mag = if e > 1080 {
        f64::INFINITY
    } else if e < -1080 {
        0.0
    } else if (-500..=500).contains(&e) {
        frac * 2f64.powi(e as i32)
    } else {
        let h = e / 2;
        frac * 2f64.powi(h as i32) * 2f64.powi((e - h) as i32)
    };
    if x.is_negative() {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod selfcheck {
    use super::*;

    /// The oracle itself against frozen references before anything uses it.
    #[test]
    fn erfc_oracle_matches_references() {
        // erfc(1) = 0.15729920705028513065877936491739074070393300203370…
        let v = bf_to_f64(&erfc_oracle(1.0, 50));
        assert!((v - 0.15729920705028513).abs() < 1e-16);
        // erfc(-0.5) = 1.5204998778130465376827466538919645287364515757579…
        let v = bf_to_f64(&erfc_oracle(-0.5, 50));
        assert!((v - 1.5204998778130465).abs() < 1e-15);
        // E_1/2(-1) = e·erfc(1) = 0.42758357615580700441…
        let v = bf_to_f64(&ml_half_oracle(-1.0, 50));
        assert!((v - 0.4275835761558070044).abs() < 1e-16);
        // E_1/2(2) = e^4·erfc(-2) = 108.94090438997797241…
        let v = bf_to_f64(&ml_half_oracle(2.0, 50));
        assert!((v - 108.94090438997797).abs() < 1e-12);
    }
}
