//! `frackell` — fractional Poisson distribution, fractional Bell polynomials
//! and numbers, and fractional Stirling numbers of the second kind, at
//! configurable precision, with machine-checkable identity suites.
//!
//! Exit codes: 0 success (and all checks passed), 2 usage error,
//! 3 numerical non-convergence, 4 check-suite failure.

mod envelope;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use envelope::{Envelope, Format};
use frackell::bell::{bell_number, bell_poly_f64, BellEvalContext};
use frackell::check::run_suite;
use frackell::mittag_leffler::{ml_derivative, ml_eval, MLRequest};
use frackell::poisson::{moment, pmf_table, PmfParams};
use frackell::sampler::{
    empirical_moments, moment_standard_error, sample_from_table, RNG_ALGORITHM,
};
use frackell::stirling::build_triangle;
use frackell::{Error, MuParam};

#[derive(Parser)]
#[command(
    name = "frackell",
    version,
    about = "Fractional Poisson distribution, fractional Bell and Stirling families at configurable precision"
)]
struct Cli {
    /// Working precision in decimal digits (flag wins over FRACKELL_DIGITS)
    #[arg(long, global = true, env = "FRACKELL_DIGITS", default_value_t = 50)]
    digits: u32,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the Mittag-Leffler function E_mu(z) or a derivative of it
    Ml {
        #[arg(long)]
        mu: f64,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
        /// Derivative order (0 = the function itself)
        #[arg(long, default_value_t = 0)]
        derivative: u32,
    },
    /// Fractional Stirling numbers of the second kind, as a triangle
    Stirling {
        #[arg(long)]
        mu: f64,
        #[arg(long = "max-m")]
        max_m: u32,
        /// Emit exact integer numerators with a symbolic denominator
        #[arg(long)]
        exact: bool,
    },
    /// Fractional Bell polynomials B_mu(x, m) for m = 0..=max-m
    Bell {
        #[arg(long)]
        mu: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long = "max-m")]
        max_m: u32,
    },
    /// Fractional Bell numbers B_mu(m) for m = 0..=max-m
    BellNumbers {
        #[arg(long)]
        mu: f64,
        #[arg(long = "max-m")]
        max_m: u32,
    },
    /// Fractional Poisson masses P_mu(n, t) for n = 0..=max-n
    Pmf {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        t: f64,
        #[arg(long = "max-n")]
        max_n: u32,
    },
    /// Run a verification suite; exits 0 iff every case passes
    Check {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Draw reproducible Monte Carlo samples and compare raw moments
    Sample {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        /// Highest raw moment to report (max 3)
        #[arg(long, default_value_t = 2)]
        moments: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonConvergence { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn command_echo() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

/// Quotes a CSV field when it contains a comma or quote.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn run(cli: Cli) -> frackell::Result<ExitCode> {
    let digits = cli.digits;
    let format = cli.format;
    let echo = command_echo();

    let (envelope, exit) = match &cli.cmd {
        Cmd::Ml { mu, z, derivative } => (cmd_ml(&echo, digits, format, *mu, *z, *derivative)?, ExitCode::SUCCESS),
        Cmd::Stirling { mu, max_m, exact } => (
            cmd_stirling(&echo, digits, format, *mu, *max_m, *exact)?,
            ExitCode::SUCCESS,
        ),
        Cmd::Bell { mu, x, max_m } => (
            cmd_bell(&echo, digits, format, *mu, Some(*x), *max_m)?,
            ExitCode::SUCCESS,
        ),
        Cmd::BellNumbers { mu, max_m } => (
            cmd_bell(&echo, digits, format, *mu, None, *max_m)?,
            ExitCode::SUCCESS,
        ),
        Cmd::Pmf { mu, nu, t, max_n } => (
            cmd_pmf(&echo, digits, format, *mu, *nu, *t, *max_n)?,
            ExitCode::SUCCESS,
        ),
        Cmd::Check { suite, mu } => cmd_check(&echo, digits, format, suite, *mu)?,
        Cmd::Sample {
            mu,
            nu,
            t,
            count,
            seed,
            moments,
        } => (
            cmd_sample(&echo, digits, format, *mu, *nu, *t, *count, *seed, *moments)?,
            ExitCode::SUCCESS,
        ),
    };

    println!("{}", envelope.render(format));
    Ok(exit)
}

fn cmd_ml(
    echo: &str,
    digits: u32,
    format: Format,
    mu: f64,
    z: f64,
    derivative: u32,
) -> frackell::Result<Envelope> {
    let mu_p = MuParam::new(mu)?;
    let req = MLRequest::new(mu_p, z, digits)?.with_derivative(derivative)?;
    let r = if derivative == 0 {
        ml_eval(&req)?
    } else {
        ml_derivative(&req)?
    };
    let mut env = Envelope::new(echo, Some(mu), digits, format);
    env.meta(
        "params",
        json!({
            "mu": mu.to_string(),
            "z": z.to_string(),
            "derivative": derivative,
            "target_rel_err": format!("{:e}", frackell::DEFAULT_TARGET_REL_ERR),
        }),
    );
    env.payload = json!({
        "value": r.value.to_decimal_string(),
        "err_bound": r.value.err_bound_string(),
        "terms_used": r.terms_used.to_string(),
        "cancellation_digits": format!("{:.2}", r.cancellation_digits),
    });
    env.csv_header = vec![
        "value".into(),
        "err_bound".into(),
        "terms_used".into(),
        "cancellation_digits".into(),
    ];
    env.csv_rows = vec![vec![
        r.value.to_decimal_string(),
        r.value.err_bound_string(),
        r.terms_used.to_string(),
        format!("{:.2}", r.cancellation_digits),
    ]];
    Ok(env)
}

fn cmd_stirling(
    echo: &str,
    digits: u32,
    format: Format,
    mu: f64,
    max_m: u32,
    exact: bool,
) -> frackell::Result<Envelope> {
    let mu_p = MuParam::new(mu)?;
    let tri = build_triangle(max_m)?;
    let mut env = Envelope::new(echo, Some(mu), digits, format);
    env.meta(
        "params",
        json!({
            "mu": mu.to_string(),
            "max_m": max_m,
            "exact": exact,
        }),
    );

    // CSV keeps the reference table's shape: rows m = 1..max_m, columns
    // l = 1..max_m, empty above the diagonal.
    env.csv_header = std::iter::once("m/l".to_string())
        .chain((1..=max_m).map(|l| l.to_string()))
        .collect();
    let mut json_rows = Vec::new();
    for m in 0..=max_m {
        let mut json_row = Vec::new();
        let mut csv_row = vec![m.to_string()];
        for l in 0..=max_m {
            if l > m {
                if l >= 1 {
                    csv_row.push(String::new());
                }
                continue;
            }
            let cell = if exact {
                tri.numerator(m, l).expect("in range").to_string()
            } else {
                tri.evaluate(mu_p, m, l, digits)?.to_decimal_string()
            };
            json_row.push(Value::String(cell.clone()));
            if l >= 1 {
                csv_row.push(cell);
            }
        }
        json_rows.push(Value::Array(json_row));
        if m >= 1 {
            env.csv_rows.push(csv_row);
        }
    }
    if exact {
        env.csv_preamble = vec!["denominator: Gamma(mu*l+1)".into()];
        env.payload = json!({
            "numerators": Value::Array(json_rows),
            "denominator": "Gamma(mu*l+1)",
        });
    } else {
        env.payload = json!({ "values": Value::Array(json_rows) });
    }
    Ok(env)
}

fn cmd_bell(
    echo: &str,
    digits: u32,
    format: Format,
    mu: f64,
    x: Option<f64>,
    max_m: u32,
) -> frackell::Result<Envelope> {
    let mu_p = MuParam::new(mu)?;
    let ctx = BellEvalContext::new(mu_p, max_m, digits)?;
    let mut env = Envelope::new(echo, Some(mu), digits, format);
    let mut params = serde_json::Map::new();
    params.insert("mu".into(), json!(mu.to_string()));
    params.insert("max_m".into(), json!(max_m));
    if let Some(x) = x {
        params.insert("x".into(), json!(x.to_string()));
    }
    env.meta("params", Value::Object(params));

    let mut values = Vec::new();
    env.csv_header = vec!["m".into(), "value".into(), "err_bound".into()];
    for m in 0..=max_m {
        let v = match x {
            Some(x) => bell_poly_f64(&ctx, x, m)?,
            None => bell_number(&ctx, m)?,
        };
        values.push(json!({
            "m": m,
            "value": v.to_decimal_string(),
            "err_bound": v.err_bound_string(),
        }));
        env.csv_rows.push(vec![
            m.to_string(),
            v.to_decimal_string(),
            v.err_bound_string(),
        ]);
    }
    env.payload = json!({ "values": values });
    Ok(env)
}

fn cmd_pmf(
    echo: &str,
    digits: u32,
    format: Format,
    mu: f64,
    nu: f64,
    t: f64,
    max_n: u32,
) -> frackell::Result<Envelope> {
    let mu_p = MuParam::new(mu)?;
    let params = PmfParams::new(mu_p, nu, t)?;
    let table = pmf_table(&params, max_n, digits)?;
    let mut env = Envelope::new(echo, Some(mu), digits, format);
    env.meta(
        "params",
        json!({
            "mu": mu.to_string(),
            "nu": nu.to_string(),
            "t": t.to_string(),
            "max_n": max_n,
        }),
    );
    env.csv_header = vec!["n".into(), "mass".into(), "err_bound".into()];
    let mut masses = Vec::new();
    for (n, m) in table.masses.iter().enumerate() {
        masses.push(json!({
            "n": n,
            "mass": m.to_decimal_string(),
            "err_bound": m.err_bound_string(),
        }));
        env.csv_rows.push(vec![
            n.to_string(),
            m.to_decimal_string(),
            m.err_bound_string(),
        ]);
    }
    env.csv_rows.push(vec![
        "tail_bound".into(),
        format!("{:e}", table.tail_bound),
        String::new(),
    ]);
    env.payload = json!({
        "masses": masses,
        "tail_bound": format!("{:e}", table.tail_bound),
    });
    Ok(env)
}

fn cmd_check(
    echo: &str,
    digits: u32,
    format: Format,
    suite: &str,
    mu: Option<f64>,
) -> frackell::Result<(Envelope, ExitCode)> {
    let report = run_suite(suite, mu, digits)?;
    let passed = report.passed();
    let mut env = Envelope::new(echo, mu, digits, format);
    env.meta(
        "params",
        json!({
            "suite": suite,
            "mu": mu.map(|m| m.to_string()),
        }),
    );
    env.csv_header = vec!["case".into(), "passed".into(), "detail".into()];
    let mut cases = Vec::new();
    for c in &report.cases {
        cases.push(json!({
            "label": c.label,
            "passed": c.passed,
            "detail": c.detail,
        }));
        env.csv_rows.push(vec![
            csv_field(&c.label),
            c.passed.to_string(),
            csv_field(&c.detail),
        ]);
    }
    env.payload = json!({
        "suite": report.suite,
        "passed": passed,
        "cases": cases,
    });
    let code = if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    };
    Ok((env, code))
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    echo: &str,
    digits: u32,
    format: Format,
    mu: f64,
    nu: f64,
    t: f64,
    count: usize,
    seed: u64,
    moments: u32,
) -> frackell::Result<Envelope> {
    if moments > 3 {
        return Err(Error::Domain(format!(
            "--moments is capped at 3 (standard errors need the 2m-th moment), got {moments}"
        )));
    }
    let mu_p = MuParam::new(mu)?;
    let params = PmfParams::new(mu_p, nu, t)?;
    // grow the table until its tail is certified small enough to sample
    let mut n_max = 40u32;
    let table = loop {
        let t = pmf_table(&params, n_max, digits)?;
        if t.tail_bound <= frackell::sampler::MAX_SAMPLING_TAIL
            || n_max >= frackell::poisson::MAX_TABLE_N
        {
            break t;
        }
        n_max = (n_max * 3 / 2).min(frackell::poisson::MAX_TABLE_N);
    };
    let n_max = table.n_max();
    let tail_bound = table.tail_bound;
    let run = sample_from_table(table, count, seed, false)?;
    let emp = empirical_moments(&run, (2 * moments).min(6))?;
    let ctx = BellEvalContext::new(mu_p, moments.max(1), digits)?;

    let mut env = Envelope::new(echo, Some(mu), digits, format);
    env.meta(
        "params",
        json!({
            "mu": mu.to_string(),
            "nu": nu.to_string(),
            "t": t.to_string(),
            "count": count,
            "seed": seed.to_string(),
            "moments": moments,
            "n_max": n_max,
            "rng": RNG_ALGORITHM,
        }),
    );
    env.csv_header = vec![
        "m".into(),
        "empirical".into(),
        "analytic".into(),
        "std_error".into(),
    ];
    let mut rows = Vec::new();
    for m in 0..=moments {
        let analytic = moment(&params, m, &ctx)?;
        let se = if m >= 1 {
            format!("{:e}", moment_standard_error(&emp, m, count))
        } else {
            "0".to_string()
        };
        rows.push(json!({
            "m": m,
            "empirical": emp[m as usize].to_decimal_string(),
            "analytic": analytic.to_decimal_string(),
            "std_error": se,
        }));
        env.csv_rows.push(vec![
            m.to_string(),
            emp[m as usize].to_decimal_string(),
            analytic.to_decimal_string(),
            se,
        ]);
    }
    env.payload = json!({
        "count": count.to_string(),
        "seed": seed.to_string(),
        "rng": RNG_ALGORITHM,
        "n_max": n_max,
        "tail_bound": format!("{:e}", tail_bound),
        "moments": rows,
    });
    Ok(env)
}
