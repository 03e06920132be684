use std::path::{Path, PathBuf};

use nfold_svd::char_equation::{build_char_equation, emit_equation, EquationFormat};
use nfold_svd::eigen_solver::singular_values;
use nfold_svd::eigenfunctions::{eigenfunctions, eigenfunctions_for, plot_data_csv, Normalization};
use nfold_svd::epsilon_series::{compute_a_coefficients, EXPANSION_VARIABLE};
use nfold_svd::numerics::{parse_decimal, to_decimal};
use nfold_svd::spectral_cutoff::{
    add_noise, choose_n_discrepancy, cutoff_solve, forward_jn, l2_distance, residual_norms, DataFunction,
    SampleTable, SingularSystem,
};
use nfold_svd::verify::{run_suite, VerifyOptions};
use nfold_svd::PrecisionContext;
use rug::Float;
use serde_json::{json, Value};

use crate::{Cli, Command, Example, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cutoff {
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug)]
pub enum Task {
    Eigensystem,
    Charpoly,
    Epsilon,
    Differentiate {
        input: Option<PathBuf>,
        example: Option<Example>,
        points: usize,
    },
    Verify {
        force_failure: bool,
    },
    Plotdata {
        points: usize,
    },
}

/// Validated command line.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub task: Task,
    pub n: usize,
    pub count: usize,
    pub bits: u32,
    pub digits: usize,
    pub format: Format,
    pub seed: u64,
    pub delta: f64,
    pub tau: f64,
    pub cutoff: Cutoff,
    pub normalization: Normalization,
}

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, Failure> {
        let task = match &cli.command {
            Command::Eigensystem => Task::Eigensystem,
            Command::Charpoly => Task::Charpoly,
            Command::Epsilon => Task::Epsilon,
            Command::Differentiate { input, example, points } => Task::Differentiate {
                input: input.clone(),
                example: *example,
                points: *points,
            },
            Command::Verify { force_failure } => Task::Verify {
                force_failure: *force_failure,
            },
            Command::Plotdata { points } => Task::Plotdata { points: *points },
        };
        if cli.n == 0 {
            return Err(config("--n must be at least 1"));
        }
        if cli.count == Some(0) {
            return Err(config("--count must be at least 1"));
        }
        if cli.bits < PrecisionContext::MIN_BITS {
            return Err(config(format!("--bits must be at least {}", PrecisionContext::MIN_BITS)));
        }
        if !(cli.delta >= 0.0 && cli.delta.is_finite()) {
            return Err(config("--delta must be finite and non-negative"));
        }
        if !(cli.tau > 1.0 && cli.tau.is_finite()) {
            return Err(config("--tau must exceed 1"));
        }
        let (allowed, default): (&[Format], Format) = match task {
            Task::Eigensystem | Task::Epsilon | Task::Differentiate { .. } => (&[Format::Json, Format::Csv], Format::Json),
            Task::Charpoly | Task::Verify { .. } => (&[Format::Text, Format::Json], Format::Text),
            Task::Plotdata { .. } => (&[Format::Csv], Format::Csv),
        };
        let format = match cli.format.as_deref() {
            None => default,
            Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some("text") => Format::Text,
            Some(other) => return Err(config(format!("unknown format `{other}`"))),
        };
        if !allowed.contains(&format) {
            let name = format!("{format:?}").to_lowercase();
            return Err(config(format!("format `{name}` is not available for this command")));
        }
        let cutoff = match cli.cutoff.as_str() {
            "auto" => Cutoff::Auto,
            s => Cutoff::Fixed(
                s.parse()
                    .map_err(|_| config(format!("--cutoff must be `auto` or an index, got `{s}`")))?,
            ),
        };
        let normalization = cli
            .normalization
            .parse()
            .map_err(|_| config(format!("unknown normalization `{}`", cli.normalization)))?;
        let count = cli.count.unwrap_or(match task {
            Task::Epsilon => 6,
            Task::Differentiate { .. } => 25,
            _ => 5,
        });
        let digits = cli.digits.unwrap_or(match task {
            Task::Plotdata { .. } | Task::Differentiate { .. } if format == Format::Csv => 20,
            _ => PrecisionContext::new(cli.bits).map(|c| c.decimal_digits()).unwrap_or(20),
        });
        if digits == 0 {
            return Err(config("--digits must be at least 1"));
        }
        match &task {
            Task::Epsilon if cli.n != 2 => return Err(config("the offset expansion is defined for n = 2 only")),
            Task::Differentiate { input: None, example: None, .. } => {
                return Err(config("differentiate needs --input or --example"))
            }
            Task::Differentiate { points, .. } | Task::Plotdata { points } if *points < 2 => {
                return Err(config("--points must be at least 2"))
            }
            Task::Differentiate { .. } if cutoff == Cutoff::Auto && cli.delta == 0.0 => {
                return Err(config("--cutoff auto needs --delta > 0"))
            }
            _ => {}
        }
        Ok(RunConfig {
            task,
            n: cli.n,
            count,
            bits: cli.bits,
            digits,
            format,
            seed: cli.seed,
            delta: cli.delta,
            tau: cli.tau,
            cutoff,
            normalization,
        })
    }

    fn ctx(&self) -> Result<PrecisionContext, Failure> {
        Ok(PrecisionContext::new(self.bits)?)
    }
}

/// Runs the command; returns the output text and whether all checks passed.
pub fn dispatch(cfg: &RunConfig) -> Result<(String, bool), Failure> {
    match &cfg.task {
        Task::Eigensystem => eigensystem(cfg).map(|s| (s, true)),
        Task::Charpoly => charpoly(cfg).map(|s| (s, true)),
        Task::Epsilon => epsilon(cfg).map(|s| (s, true)),
        Task::Differentiate { input, example, points } => {
            differentiate(cfg, input.as_deref(), *example, *points).map(|s| (s, true))
        }
        Task::Verify { force_failure } => verify(cfg, *force_failure),
        Task::Plotdata { points } => plotdata(cfg, *points).map(|s| (s, true)),
    }
}

fn normalization_name(n: Normalization) -> &'static str {
    match n {
        Normalization::UnitL2 => "unit-l2",
        Normalization::LastCoefficientOne => "last-one",
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn eigensystem(cfg: &RunConfig) -> Result<String, Failure> {
    let ctx = cfg.ctx()?;
    let records = singular_values(cfg.n, cfg.count, &ctx)?;
    let us = eigenfunctions_for(&records, cfg.normalization, &ctx)?;
    let d = cfg.digits;
    match cfg.format {
        Format::Csv => {
            let mut header: Vec<String> = ["i", "z", "lambda", "sigma", "epsilon"].map(String::from).to_vec();
            header.extend((1..=2 * cfg.n).map(|k| format!("gamma_{k}")));
            let rows: Vec<Vec<String>> = us
                .iter()
                .map(|u| {
                    let r = &u.record;
                    let mut row = vec![
                        r.i.to_string(),
                        to_decimal(&r.z, d),
                        to_decimal(&r.lambda, d),
                        to_decimal(&r.sigma, d),
                        to_decimal(&r.epsilon, d),
                    ];
                    row.extend(u.gamma.iter().map(|g| to_decimal(g, d)));
                    row
                })
                .collect();
            Ok(csv_text(&header, &rows))
        }
        _ => {
            let records: Vec<Value> = us
                .iter()
                .map(|u| {
                    let view = u.record.to_view(d);
                    json!({
                        "i": view.i,
                        "z": view.z,
                        "lambda": view.lambda,
                        "sigma": view.sigma,
                        "zeta": view.zeta,
                        "epsilon": view.epsilon,
                        "gamma": u.gamma.iter().map(|g| to_decimal(g, d)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            Ok(pretty(&json!({
                "n": cfg.n,
                "count": cfg.count,
                "bits": cfg.bits,
                "digits": d,
                "normalization": normalization_name(cfg.normalization),
                "variable": format!("z = lambda^(-1/{})", 2 * cfg.n),
                "records": records,
            })))
        }
    }
}

fn charpoly(cfg: &RunConfig) -> Result<String, Failure> {
    let ctx = cfg.ctx()?;
    let f = build_char_equation(cfg.n, &ctx)?;
    let format = if cfg.format == Format::Json {
        EquationFormat::Json
    } else {
        EquationFormat::Text
    };
    let mut s = emit_equation(&f, format, &ctx);
    s.push('\n');
    Ok(s)
}

fn epsilon(cfg: &RunConfig) -> Result<String, Failure> {
    let series = compute_a_coefficients(cfg.count)?;
    let coeffs = series.to_strings();
    match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| vec![(k + 1).to_string(), a.clone()])
                .collect();
            Ok(csv_text(&["k".to_string(), "a_k".to_string()], &rows))
        }
        _ => Ok(pretty(&json!({
            "order": cfg.count,
            "variable": EXPANSION_VARIABLE,
            "coefficients": coeffs,
        }))),
    }
}

fn read_samples(path: &Path, bits: u32) -> Result<SampleTable, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let mut t = Vec::new();
    let mut y = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(config(format!("{}: row {} must have two columns", path.display(), line + 1)));
        }
        match (parse_decimal(&record[0], bits), parse_decimal(&record[1], bits)) {
            (Ok(a), Ok(b)) => {
                t.push(a);
                y.push(b);
            }
            // header
            _ if line == 0 => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        }
    }
    Ok(SampleTable::new(t, y)?)
}

fn example_data(example: Example, n: usize) -> (DataFunction, DataFunction) {
    match example {
        Example::Ones => {
            let truth = DataFunction::from_fn(|_, ctx| ctx.float(1));
            let data = DataFunction::from_fn(move |t, ctx| {
                let mut p = ctx.float(1);
                for k in 1..=n as u32 {
                    p = p * t / k;
                }
                p
            });
            (data, truth)
        }
        Example::Sine => {
            let truth = DataFunction::from_fn(|t, ctx| (ctx.pi() * t).sin());
            (forward_jn(&truth, n), truth)
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn differentiate(cfg: &RunConfig, input: Option<&Path>, example: Option<Example>, points: usize) -> Result<String, Failure> {
    let ctx = cfg.ctx()?;
    let (data, truth) = match (input, example) {
        (Some(path), _) => (DataFunction::from_samples(read_samples(path, cfg.bits)?), None),
        (None, Some(ex)) => {
            let (d, t) = example_data(ex, cfg.n);
            (d, Some(t))
        }
        (None, None) => unreachable!("validated in RunConfig"),
    };
    let noisy = add_noise(&data, cfg.delta, cfg.seed, &ctx)?;
    let system = SingularSystem::compute(cfg.n, cfg.count, &ctx)?;
    let (cutoff, discrepancy, cap_reached) = match cfg.cutoff {
        Cutoff::Auto => {
            let choice = choose_n_discrepancy(&noisy, cfg.delta, cfg.tau, cfg.n, &system, &ctx)?;
            if choice.cap_reached {
                eprintln!(
                    "warning: discrepancy bound {} not met up to N = {}",
                    cfg.tau * cfg.delta,
                    choice.cutoff
                );
            }
            (choice.cutoff, choice.discrepancy, choice.cap_reached)
        }
        Cutoff::Fixed(k) => {
            if k > system.len() {
                return Err(nfold_svd::Error::InsufficientSystem {
                    requested: k,
                    available: system.len(),
                }
                .into());
            }
            (k, residual_norms(&noisy, &system, &ctx)?[k], false)
        }
    };
    let solution = cutoff_solve(&noisy, cfg.n, cutoff, &system, &ctx)?;
    if cfg.format == Format::Csv {
        let rows: Vec<Vec<String>> = (0..points)
            .map(|j| {
                let t = Float::with_val(cfg.bits, j as u32) / (points as u32 - 1);
                vec![to_decimal(&t, cfg.digits), to_decimal(&solution.evaluate(&t, &ctx), cfg.digits)]
            })
            .collect();
        return Ok(csv_text(&["t".to_string(), "x".to_string()], &rows));
    }
    let l2_error = match &truth {
        Some(x) => Some(l2_distance(&solution.to_data(), x, 4 * (cutoff + cfg.n), &ctx)?.to_f64()),
        None => None,
    };
    Ok(pretty(&json!({
        "n": cfg.n,
        "N": cutoff,
        "cutoff_rule": if cfg.cutoff == Cutoff::Auto { "discrepancy" } else { "fixed" },
        "delta": real(cfg.delta),
        "tau": real(cfg.tau),
        "seed": cfg.seed,
        "discrepancy": real(discrepancy),
        "cap_reached": cap_reached,
        "l2_error_if_truth_known": l2_error.map(real),
        "coefficients": solution.coefficients.iter().map(|c| to_decimal(c, cfg.digits)).collect::<Vec<_>>(),
    })))
}

fn verify(cfg: &RunConfig, force_failure: bool) -> Result<(String, bool), Failure> {
    let report = run_suite(&VerifyOptions {
        bits: cfg.bits,
        force_failure,
    })?;
    let text = match cfg.format {
        Format::Json => pretty(&serde_json::to_value(&report).expect("serializable")),
        _ => report.timing_table(),
    };
    Ok((text, report.passed()))
}

fn plotdata(cfg: &RunConfig, points: usize) -> Result<String, Failure> {
    let ctx = cfg.ctx()?;
    let us = eigenfunctions(cfg.n, cfg.count, Normalization::UnitL2, &ctx)?;
    Ok(plot_data_csv(&us, points, cfg.digits, &ctx))
}
