//! Machine verification suites.
//!
//! Each suite exercises an identity family on a fixed grid and reports one
//! pass/fail case per grid cell; these back the CLI `check` command and the
//! acceptance tests. Every oracle here takes a route through the code base
//! (or through closed forms of the exponential) that is independent of the
//! path under test.

use astro_float::BigFloat;

use crate::bell::{bell_poly_f64, bell_poly_series_f64, BellEvalContext};
use crate::combin::factorial;
use crate::error::{Error, Result};
use crate::genfun::{gf_bell_numbers, gf_bell_poly, gf_stirling_bivariate, verify_bell_gf, verify_stirling_gf};
use crate::poisson::{moment, pmf_table, PmfParams, MAX_TABLE_N};
use crate::precision::{
    abs, add, bf_from_f64, bf_one, bf_zero, bigint_to_bf, bits_for, div, exp, le, mul, neg, sub,
    ten_pow, to_f64, MuParam,
};
use crate::sampler::{empirical_moments, moment_standard_error, sample_from_table};
use crate::stirling::{classic_stirling_triangle, stirling_value};

/// One grid cell of a verification suite.
#[derive(Debug, Clone)]
pub struct CheckCase {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

/// Output of one suite run.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub suite: String,
    pub cases: Vec<CheckCase>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckCase> {
        self.cases.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.cases.push(CheckCase {
            label: label.into(),
            passed,
            detail: detail.into(),
        });
    }
}

/// Suites known to [`run_suite`].
pub const SUITES: [&str; 6] = [
    "mu1",
    "normalization",
    "genfun",
    "stirling-gf",
    "dualpath",
    "moments",
];

/// Dispatch by suite name; `mu` restricts the μ grid where applicable.
pub fn run_suite(name: &str, mu: Option<f64>, digits: u32) -> Result<CheckReport> {
    match name {
        "mu1" => check_mu1(digits),
        "normalization" => check_normalization(mu, digits),
        "genfun" => check_genfun(mu, digits),
        "stirling-gf" => check_stirling_gf(mu, digits),
        "dualpath" => check_dualpath(mu, digits),
        "moments" => check_moments(mu, digits),
        other => Err(Error::Domain(format!(
            "unknown suite {other:?}; known suites: {}",
            SUITES.join(", ")
        ))),
    }
}

fn mu_grid(mu: Option<f64>, default: &[f64]) -> Result<Vec<MuParam>> {
    match mu {
        Some(v) => Ok(vec![MuParam::new(v)?]),
        None => default.iter().map(|&v| MuParam::new(v)).collect(),
    }
}

/// Relative deviation |a-b|/|b| in f64, with exact-zero agreement mapping
/// to zero.
fn rel_dev(a: &BigFloat, b: &BigFloat, p: usize) -> f64 {
    let d = abs(&sub(a, b, p));
    if d.is_zero() {
        return 0.0;
    }
    if b.is_zero() {
        return f64::INFINITY;
    }
    to_f64(&div(&d, &abs(b), p))
}

// ---------------------------------------------------------------------------
// mu1: every family must collapse to its classical counterpart at μ = 1
// ---------------------------------------------------------------------------

/// Poisson masses against e^(-λ)λ^n/n!, Bell polynomials against the
/// exponential moment sum, Stirling values against the classic recurrence,
/// generating functions against exp(x(e^s-1)).
pub fn check_mu1(digits: u32) -> Result<CheckReport> {
    let mut report = CheckReport {
        suite: "mu1".into(),
        cases: Vec::new(),
    };
    let mu1 = MuParam::new(1.0)?;
    let p = bits_for(digits);

    // fractional pmf vs. closed-form Poisson masses
    for lambda in [0.5f64, 1.0, 2.0, 5.0, 10.0] {
        let params = PmfParams::new(mu1, lambda, 1.0)?;
        let table = pmf_table(&params, 50, digits)?;
        let e_neg = exp(&neg(&bf_from_f64(lambda, p)), p);
        let mut worst = 0.0f64;
        let mut pow = bf_one(p);
        for (n, mass) in table.masses.iter().enumerate() {
            let oracle = div(
                &mul(&e_neg, &pow, p),
                &bigint_to_bf(&factorial(n as u64), p),
                p,
            );
            worst = worst.max(rel_dev(mass.value(), &oracle, p));
            pow = mul(&pow, &bf_from_f64(lambda, p), p);
        }
        report.push(
            format!("pmf vs Poisson(νt={lambda}), n ≤ 50"),
            worst <= 1e-12,
            format!("max rel dev {worst:.3e} (tol 1e-12)"),
        );
    }

    // Bell polynomials vs. e^(-x) Σ n^m x^n / n!
    let ctx = BellEvalContext::new(mu1, 8, digits)?;
    for x in [0.5f64, 1.0, 2.0, 5.0] {
        let mut worst = 0.0f64;
        for m in 0..=8u32 {
            let b = bell_poly_f64(&ctx, x, m)?;
            let oracle = classic_bell_oracle(x, m, digits);
            worst = worst.max(rel_dev(b.value(), &oracle, p));
        }
        report.push(
            format!("Bell polynomials vs exponential sum, x={x}, m ≤ 8"),
            worst <= 1e-12,
            format!("max rel dev {worst:.3e} (tol 1e-12)"),
        );
    }

    // Stirling reduction: exact integers at μ = 1
    let classic = classic_stirling_triangle(20)?;
    let mut exact = true;
    for m in 0..=20u32 {
        for l in 0..=m {
            let v = stirling_value(mu1, m, l, digits)?;
            let expect = &classic[m as usize][l as usize];
            if !v.err_bound().is_zero()
                || crate::precision::cmp(v.value(), &bigint_to_bf(expect, p))
                    != std::cmp::Ordering::Equal
            {
                exact = false;
            }
        }
    }
    report.push(
        "Stirling values equal classic integers, m ≤ 20",
        exact,
        if exact { "exact equality" } else { "mismatch" }.to_string(),
    );

    // generating functions vs exp(x(e^s - 1))
    let mut worst = 0.0f64;
    for s in [-0.5f64, 0.3, std::f64::consts::LN_2] {
        for x in [0.5f64, 1.0, 2.0] {
            let g = gf_bell_poly(mu1, s, x, digits)?;
            let em1 = sub(&exp(&bf_from_f64(s, p), p), &bf_one(p), p);
            let oracle = exp(&mul(&bf_from_f64(x, p), &em1, p), p);
            worst = worst.max(rel_dev(g.value(), &oracle, p));
        }
        let gb = gf_bell_numbers(mu1, s, digits)?;
        let em1 = sub(&exp(&bf_from_f64(s, p), p), &bf_one(p), p);
        let oracle = exp(&em1, p);
        worst = worst.max(rel_dev(gb.value(), &oracle, p));
    }
    report.push(
        "generating functions reduce to exp(x(e^s-1)) / exp(e^s-1)",
        worst <= 1e-12,
        format!("max rel dev {worst:.3e} (tol 1e-12)"),
    );

    Ok(report)
}

/// e^(-x) Σ_{n} n^m x^n / n!, truncated with a tail bound far below the
/// comparison tolerance. This is the classical Bell polynomial.
pub fn classic_bell_oracle(x: f64, m: u32, digits: u32) -> BigFloat {
    let p = bits_for(digits) + 64;
    let xb = bf_from_f64(x, p);
    let mut sum = bf_zero(p);
    let mut x_pow = bf_one(p);
    let mut fact = bf_one(p);
    let limit = ten_pow(-(digits as i64 + 10), 64);
    for n in 0..1000u64 {
        if n > 0 {
            fact = mul(&fact, &bf_from_f64(n as f64, p), p);
            x_pow = mul(&x_pow, &xb, p);
        }
        let term = div(
            &mul(&bigint_to_bf(&crate::combin::int_pow(n, m), p), &x_pow, p),
            &fact,
            p,
        );
        sum = add(&sum, &term, p);
        if n > 2 * m as u64 + 8 && n as f64 > 3.0 * x {
            let scale = abs(&sum);
            if le(&term, &crate::precision::err_mul(&scale, &limit)) {
                break;
            }
        }
    }
    mul(&exp(&neg(&xb), p), &sum, p)
}

// ---------------------------------------------------------------------------
// normalization
// ---------------------------------------------------------------------------

/// Σ_n P_μ(n,t) ≥ 1 - 1e-10 with adaptive n_max on the acceptance grid.
pub fn check_normalization(mu: Option<f64>, digits: u32) -> Result<CheckReport> {
    let mut report = CheckReport {
        suite: "normalization".into(),
        cases: Vec::new(),
    };
    for mu in mu_grid(mu, &[0.25, 0.5, 0.75, 1.0])? {
        for x in [0.5f64, 1.0, 5.0] {
            // t = 1 makes νt^μ = ν exactly
            let params = PmfParams::new(mu, x, 1.0)?;
            let mut n_max = 40u32;
            let (sum, n_used) = loop {
                let table = pmf_table(&params, n_max, digits)?;
                let sum: f64 = table.masses.iter().map(|m| m.to_f64()).sum();
                if sum >= 1.0 - 1e-10 || n_max >= MAX_TABLE_N {
                    break (sum, n_max);
                }
                n_max = (n_max * 3 / 2).min(MAX_TABLE_N);
            };
            report.push(
                format!("normalization μ={}, x={x}", mu.get()),
                sum >= 1.0 - 1e-10,
                format!("Σ masses = {sum:.15} with n_max = {n_used}"),
            );
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// genfun / stirling-gf
// ---------------------------------------------------------------------------

/// Coefficient checks of the Bell generating function plus the bit-for-bit
/// bivariate identity.
pub fn check_genfun(mu: Option<f64>, digits: u32) -> Result<CheckReport> {
    let mut report = CheckReport {
        suite: "genfun".into(),
        cases: Vec::new(),
    };
    for mu in mu_grid(mu, &[0.25, 0.5, 0.75, 1.0])? {
        for (x, m_max) in [(0.5f64, 10u32), (1.0, 12), (2.0, 10)] {
            let ctx = BellEvalContext::new(mu, m_max, digits)?;
            let rep = verify_bell_gf(&ctx, x, m_max, 1e-9)?;
            let worst = rep
                .entries
                .iter()
                .map(|e| e.abs_diff)
                .fold(0.0f64, f64::max);
            report.push(
                format!("bell-gf coefficients μ={}, x={x}, M={m_max}", mu.get()),
                rep.passed(),
                format!("max |diff| {worst:.3e} (tol 1e-9)"),
            );
        }
        // Eq-level identity of the two bivariate generating functions
        let mut bitwise = true;
        for (s, x) in [(0.4f64, 0.5f64), (-0.8, 2.0), (1.2, 1.0)] {
            let a = gf_bell_poly(mu, s, x, digits)?;
            let b = gf_stirling_bivariate(mu, s, x, digits)?;
            if crate::precision::cmp(a.value(), b.value()) != std::cmp::Ordering::Equal
                || a.to_decimal_string() != b.to_decimal_string()
            {
                bitwise = false;
            }
        }
        report.push(
            format!("bivariate generating function identity μ={}", mu.get()),
            bitwise,
            if bitwise {
                "bit-for-bit equal"
            } else {
                "values differ"
            }
            .to_string(),
        );
    }
    Ok(report)
}

/// Coefficient checks of the fixed-l Stirling generating function.
pub fn check_stirling_gf(mu: Option<f64>, digits: u32) -> Result<CheckReport> {
    let mut report = CheckReport {
        suite: "stirling-gf".into(),
        cases: Vec::new(),
    };
    for mu in mu_grid(mu, &[0.25, 0.5, 0.75, 1.0])? {
        for l in 0..=6u32 {
            let rep = verify_stirling_gf(mu, l, 12, 1e-9, digits)?;
            let worst = rep
                .entries
                .iter()
                .map(|e| e.abs_diff)
                .fold(0.0f64, f64::max);
            let zeros_exact = rep.entries[..l as usize]
                .iter()
                .all(|e| e.coeff_genfun.is_zero() && e.coeff_poly.is_zero());
            report.push(
                format!("stirling-gf μ={}, l={l}, M=12", mu.get()),
                rep.passed() && zeros_exact,
                format!("max |diff| {worst:.3e} (tol 1e-9), zeros below diagonal exact: {zeros_exact}"),
            );
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// dualpath
// ---------------------------------------------------------------------------

/// The defining double series against the finite Stirling expansion on the
/// acceptance grid; agreement must fall inside combined error bounds and
/// inside 1e-20 absolute.
pub fn check_dualpath(mu: Option<f64>, digits: u32) -> Result<CheckReport> {
    let mut report = CheckReport {
        suite: "dualpath".into(),
        cases: Vec::new(),
    };
    let p = bits_for(digits);
    let series_target = 1e-33;
    for mu in mu_grid(mu, &[0.25, 0.5, 0.75, 1.0])? {
        let ctx = BellEvalContext::new(mu, 8, digits)?;
        for x in [0.1f64, 0.5, 1.0, 2.0, 5.0] {
            let mut worst_abs = 0.0f64;
            let mut within_bounds = true;
            for m in 0..=8u32 {
                let finite = bell_poly_f64(&ctx, x, m)?;
                let series = bell_poly_series_f64(mu, x, m, digits, series_target)?;
                let diff = abs(&sub(finite.value(), series.value.value(), p));
                let bound = crate::precision::err_add(
                    finite.err_bound(),
                    series.value.err_bound(),
                );
                if !le(&diff, &bound) {
                    within_bounds = false;
                }
                worst_abs = worst_abs.max(to_f64(&diff));
            }
            report.push(
                format!("dual path μ={}, x={x}, m ≤ 8", mu.get()),
                within_bounds && worst_abs <= 1e-20,
                format!(
                    "max |finite - series| = {worst_abs:.3e} (abs tol 1e-20), within bounds: {within_bounds}"
                ),
            );
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// moments
// ---------------------------------------------------------------------------

/// Monte Carlo moment concordance: empirical raw moments within 4 standard
/// errors of B_μ(νt^μ, m) in at least 19 of 20 seeds.
pub fn check_moments(mu: Option<f64>, digits: u32) -> Result<CheckReport> {
    let mut report = CheckReport {
        suite: "moments".into(),
        cases: Vec::new(),
    };
    let count = 100_000usize;
    let seeds: Vec<u64> = (0..20).collect();
    for mu in mu_grid(mu, &[0.5, 1.0])? {
        let params = PmfParams::new(mu, 1.0, 1.0)?;
        // one table per μ, large enough for a certified tail
        let mut n_max = 40u32;
        let table = loop {
            let t = pmf_table(&params, n_max, digits)?;
            if t.tail_bound <= crate::sampler::MAX_SAMPLING_TAIL || n_max >= MAX_TABLE_N {
                break t;
            }
            n_max = (n_max * 3 / 2).min(MAX_TABLE_N);
        };
        let ctx = BellEvalContext::new(mu, 3, digits)?;
        let analytic: Vec<f64> = (0..=3u32)
            .map(|m| moment(&params, m, &ctx).map(|v| v.to_f64()))
            .collect::<Result<_>>()?;

        let mut hits = [0u32; 4];
        for &seed in &seeds {
            let run = sample_from_table(table.clone(), count, seed, false)?;
            let emp = empirical_moments(&run, 6)?;
            for m in 1..=3u32 {
                let se = moment_standard_error(&emp, m, count);
                let dev = (emp[m as usize].to_f64() - analytic[m as usize]).abs();
                if dev <= 4.0 * se {
                    hits[m as usize] += 1;
                }
            }
        }
        for m in 1..=3u32 {
            report.push(
                format!("moment concordance μ={}, m={m}", mu.get()),
                hits[m as usize] >= 19,
                format!(
                    "{}/20 seeds within 4 SE of analytic {:.12}",
                    hits[m as usize], analytic[m as usize]
                ),
            );
        }
    }
    Ok(report)
}
