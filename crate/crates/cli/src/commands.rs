use std::f64::consts::PI;

use tbell_core::bloch::{
    is_cptp, is_entanglement_breaking, is_unital, is_unitary, min_choi_eigenvalue, AffineChannel, CPTP_TOL, NORM_TOL,
};
use tbell_core::campaigns::{
    canonical_grid, linear_grid, scan_canonical_e, scan_werner, verify_ebt_bias, verify_table1, ALGEBRAIC, CLASSICAL,
    CANONICAL_MARGIN, TSIRELSON,
};
use tbell_core::optimizer::{optimize_bell, BiasMode, ChannelClass, ConstraintMode, OptimizationSpec, Witness};
use tbell_core::scenario::{
    bell_value, correlations_closed_form, correlations_oracle, hadamard_three_step, is_divisible, CorrelationSet,
    Divisibility, UNITARY_TOL,
};

use crate::cli::{Command, EvaluateArgs, Format, OptimizeArgs, ScanArgs, ScanTarget, Suite, VerifyArgs};
use crate::io::{self, Loaded};
use crate::report::*;
use crate::CliError;

/// Rendered output plus the names of failed checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub body: String,
    pub failures: Vec<String>,
}

impl Rendered {
    fn ok(body: String) -> Self {
        Self { body, failures: Vec::new() }
    }
}

pub fn execute(cmd: &Command) -> Result<Rendered, CliError> {
    match cmd {
        Command::Evaluate(a) => evaluate(a),
        Command::Optimize(a) => optimize(a),
        Command::Verify(a) => verify(a),
        Command::Scan(a) => scan(a),
    }
}

const DIVISIBILITY_TOL: f64 = 1e-9;

fn summarize(name: &'static str, ch: &AffineChannel) -> Result<ChannelSummary, CliError> {
    Ok(ChannelSummary {
        name,
        cptp: is_cptp(ch, CPTP_TOL),
        min_choi_eigenvalue: min_choi_eigenvalue(ch),
        unital: is_unital(ch, NORM_TOL),
        unitary: is_unitary(ch, UNITARY_TOL),
        ebt: is_entanglement_breaking(ch, CPTP_TOL)?,
    })
}

fn oracle(closed: CorrelationSet, oracle: CorrelationSet) -> OracleSummary {
    OracleSummary {
        correlations: oracle.into(),
        bell: bell_value(&oracle),
        max_deviation: closed.max_abs_diff(&oracle),
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Result<Rendered, CliError> {
    let report = evaluate_loaded(&io::read(&args.path)?, args.oracle)?;
    Ok(Rendered::ok(match args.format {
        Format::Json => json(&report),
        Format::Csv => report.to_csv(),
    }))
}

pub fn evaluate_loaded(loaded: &Loaded, with_oracle: bool) -> Result<EvaluateReport, CliError> {
    Ok(match loaded {
        Loaded::Scenario(s) => {
            let closed = correlations_closed_form(s);
            EvaluateReport {
                kind: "pipeline",
                correlations: closed.into(),
                bell: bell_value(&closed),
                channels: vec![
                    summarize("lambda_A", &s.lambda_a)?,
                    summarize("lambda_E", &s.lambda_e)?,
                    summarize("lambda_B", &s.lambda_b)?,
                ],
                divisibility: None,
                oracle: with_oracle.then(|| oracle(closed, correlations_oracle(s))),
            }
        }
        Loaded::Indivisible(s) => {
            let closed = s.correlations_closed_form();
            let p = &s.process;
            let div = is_divisible(p, DIVISIBILITY_TOL);
            EvaluateReport {
                kind: "indivisible",
                correlations: closed.into(),
                bell: bell_value(&closed),
                channels: vec![
                    summarize("lambda_31", &p.lambda_31)?,
                    summarize("lambda_41", &p.lambda_41)?,
                    summarize("lambda_32", &p.lambda_32)?,
                    summarize("lambda_42", &p.lambda_42)?,
                ],
                divisibility: Some(DivisibilitySummary {
                    divisible: div.verdict == Divisibility::Divisible,
                    residual: div.residual,
                    factor_is_cptp: div.factor_is_cptp,
                }),
                oracle: with_oracle.then(|| oracle(closed, s.correlations())),
            }
        }
    })
}

/// The value each class is expected to reach, where one is known.
pub fn class_target(class: &ChannelClass, bias: BiasMode) -> Option<f64> {
    match (class, bias) {
        (ChannelClass::UnitalAEbt | ChannelClass::ClassicalStochastic, _) => Some(CLASSICAL),
        (ChannelClass::EbtFree, BiasMode::Fixed(m)) => Some(2.0 * (1.0 + m * m).sqrt()),
        (ChannelClass::Indivisible, _) => Some(ALGEBRAIC),
        (ChannelClass::CanonicalE(Some(_)), _) => None,
        _ => Some(TSIRELSON),
    }
}

fn constraint_label(c: ConstraintMode) -> String {
    match c {
        ConstraintMode::ExactCptp => "exact".into(),
        ConstraintMode::SampledPositivity(n) => format!("sampled:{n}"),
    }
}

fn witness_settings(w: &Witness) -> Settings {
    let (v, a1, a2, b1, b2) = match w {
        Witness::Scenario(s) => (s.v, s.a1, s.a2, s.b1, s.b2),
        Witness::Indivisible(s) => (s.v, s.a1, s.a2, s.b1, s.b2),
    };
    Settings {
        v: v.vec().to_array(),
        a1: a1.vec().to_array(),
        a2: a2.vec().to_array(),
        b1: b1.vec().to_array(),
        b2: b2.vec().to_array(),
    }
}

pub fn optimize(args: &OptimizeArgs) -> Result<Rendered, CliError> {
    let class = args.channel_class().map_err(CliError::Input)?;
    let spec = OptimizationSpec {
        restarts: args.restarts,
        max_iters: args.max_iters,
        seed: args.seed,
        convergence_tol: args.tol,
        constraint_mode: args.constraint,
        ..OptimizationSpec::new(class, args.bias)
    };
    let result = optimize_bell(&spec)?;
    if let Some(path) = &args.emit_scenario {
        let loaded = match result.witness {
            Witness::Scenario(s) => Loaded::Scenario(s),
            Witness::Indivisible(s) => Loaded::Indivisible(s),
        };
        io::write(path, &loaded)?;
    }
    let report = OptimizeReport {
        class: class.name(),
        bias_mode: args.bias.label(),
        target: class_target(&class, args.bias),
        best_value: result.best_value,
        audit_cptp: result.audit_cptp,
        per_restart: result.per_restart.iter().map(RestartRow::from).collect(),
        best_restart: result.best_restart,
        seed: spec.seed,
        restarts: spec.restarts,
        max_iters: spec.max_iters,
        convergence_tol: spec.convergence_tol,
        constraint_mode: constraint_label(spec.constraint_mode),
        settings: witness_settings(&result.witness),
        schema: spec.schema()?.iter().map(Block::from).collect(),
        best_params: result.best_params,
    };
    Ok(Rendered::ok(match args.format {
        Format::Json => json(&report),
        Format::Csv => report.to_csv(),
    }))
}

fn check(suite: &'static str, name: impl Into<String>, value: Option<f64>, target: Option<f64>, pass: bool, note: impl Into<String>) -> Check {
    Check { suite, check: name.into(), value, target, pass, note: note.into() }
}

fn table1_checks(seed: u64, restarts: usize) -> Result<Vec<Check>, CliError> {
    let report = verify_table1(seed, restarts)?;
    Ok(report
        .cells
        .iter()
        .map(|c| {
            let note = match (&c.note, &c.spec) {
                (Some(n), _) => (*n).to_string(),
                (None, Some(s)) => format!("class {}, bias {}", s.class.name(), s.bias_mode.label()),
                (None, None) => String::new(),
            };
            check("table1", format!("{} / {}", c.row, c.column), c.attained(), c.target, c.pass, note)
        })
        .collect())
}

fn canonical_e_checks(seed: u64, restarts: usize) -> Result<Vec<Check>, CliError> {
    let (thetas, phis) = canonical_grid();
    let cells = scan_canonical_e(&thetas, &phis, restarts, seed)?;
    let mut out: Vec<Check> = cells
        .iter()
        .map(|c| {
            let (target, note) = if c.non_unitary_by_margin {
                (Some(TSIRELSON - CANONICAL_MARGIN), "non-unitary: must stay below target")
            } else {
                (None, "near-unitary: unconstrained")
            };
            check("appendix-c", format!("theta={:.6} phi={:.6}", c.theta, c.phi), Some(c.max_bell), target, c.pass, note)
        })
        .collect();
    let identity = cells.iter().find(|c| c.theta == 0.0 && c.phi == 0.0).map(|c| c.max_bell);
    let ok = identity.is_some_and(|v| (v - TSIRELSON).abs() <= 1e-4);
    out.push(check("appendix-c", "identity cell reaches 2√2", identity, Some(TSIRELSON), ok, "within 1e-4"));
    Ok(out)
}

fn werner_checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let rows = scan_werner(&linear_grid(0.0, 1.0, 101), seed)?;
    let dev = rows.iter().map(|r| (r.bell_at_fixed_settings - TSIRELSON * r.p).abs()).fold(0.0, f64::max);
    let flips = rows.iter().filter(|r| r.is_ebt != (r.p <= 1.0 / 3.0 + 1e-12)).count();
    let window: Vec<_> = rows.iter().filter(|r| r.p > 1.0 / 3.0 && r.p < std::f64::consts::FRAC_1_SQRT_2).collect();
    let window_max = window.iter().map(|r| r.max_bell).fold(f64::NEG_INFINITY, f64::max);
    let window_ok = !window.is_empty() && window.iter().all(|r| !r.is_ebt && r.bell_at_fixed_settings < 2.0 && r.max_bell < 2.0);
    Ok(vec![
        check("werner", "bell at CHSH settings = 2√2 p", Some(dev), Some(0.0), dev <= 1e-12, "max deviation over 101 points, tolerance 1e-12"),
        check("werner", "EBT iff p ≤ 1/3", Some(flips as f64), Some(0.0), flips == 0, "grid points with the wrong verdict"),
        check(
            "werner",
            "entangling window 1/3 < p < 1/√2 stays below 2",
            Some(window_max),
            Some(CLASSICAL),
            window_ok,
            format!("{} grid points, largest optimized value reported", window.len()),
        ),
    ])
}

fn ebt_bias_checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let mags: Vec<f64> = (0..=5).map(|k| k as f64 / 5.0).collect();
    let rows = verify_ebt_bias(&mags, seed)?;
    let mut out: Vec<Check> = rows
        .iter()
        .map(|r| {
            let ok = (r.attained - r.target).abs() <= 1e-9 && (r.oracle - r.attained).abs() <= 1e-9;
            check("ebt-bias", format!("|v| = {:.1}", r.magnitude), Some(r.attained), Some(r.target), ok, "2√(1+|v|²) within 1e-9")
        })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].attained > w[0].attained);
    let end = rows.last().map(|r| r.attained);
    out.push(check("ebt-bias", "monotone in |v|", None, None, monotone, ""));
    out.push(check(
        "ebt-bias",
        "pure state reaches 2√2",
        end,
        Some(TSIRELSON),
        end.is_some_and(|e| (e - TSIRELSON).abs() <= 1e-9),
        "within 1e-9",
    ));
    Ok(out)
}

fn hadamard_checks() -> Vec<Check> {
    let (e12, e23, e13) = hadamard_three_step();
    [("E12", e12, 0.0), ("E23", e23, 0.0), ("E13", e13, 1.0)]
        .into_iter()
        .map(|(name, v, t)| check("hadamard", name, Some(v), Some(t), (v - t).abs() <= 1e-12, "within 1e-12"))
        .collect()
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Table1 => "table1",
        Suite::CanonicalE => "appendix-c",
        Suite::Werner => "werner",
        Suite::EbtBias => "ebt-bias",
        Suite::Hadamard => "hadamard",
        Suite::All => "all",
    }
}

pub fn verify(args: &VerifyArgs) -> Result<Rendered, CliError> {
    let (seed, restarts) = (args.seed, args.restarts);
    let run = |s: Suite| -> Result<Vec<Check>, CliError> {
        match s {
            Suite::Table1 => table1_checks(seed, restarts),
            Suite::CanonicalE => canonical_e_checks(seed, restarts),
            Suite::Werner => werner_checks(seed),
            Suite::EbtBias => ebt_bias_checks(seed),
            Suite::Hadamard => Ok(hadamard_checks()),
            Suite::All => unreachable!("expanded below"),
        }
    };
    let checks = match args.suite {
        Suite::All => {
            let mut all = Vec::new();
            for s in [Suite::Hadamard, Suite::EbtBias, Suite::Werner, Suite::Table1, Suite::CanonicalE] {
                all.extend(run(s)?);
            }
            all
        }
        s => run(s)?,
    };
    let failures: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.suite, c.check)).collect();
    let report = VerifyReport { suite: suite_name(args.suite), seed, restarts, pass: failures.is_empty(), checks };
    let body = match args.format {
        Format::Json => json(&report),
        Format::Csv => report.to_csv(),
    };
    Ok(Rendered { body, failures })
}

fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !from.is_finite() || !to.is_finite() || steps == 0 {
        return Err(CliError::Input(format!("invalid grid: from {from}, to {to}, steps {steps}")));
    }
    Ok(linear_grid(from, to, steps))
}

pub fn scan(args: &ScanArgs) -> Result<Rendered, CliError> {
    let report = match args.what {
        ScanTarget::Werner => {
            let g = grid(args.from.unwrap_or(0.0), args.to.unwrap_or(1.0), args.steps.unwrap_or(11))?;
            if let Some(p) = g.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(CliError::Input(format!("invalid grid: p = {p} outside [0, 1]")));
            }
            let rows = scan_werner(&g, args.seed)?;
            ScanReport {
                what: "werner",
                seed: args.seed,
                rows: ScanRows::Werner(
                    rows.iter()
                        .map(|r| WernerScanRow {
                            p: r.p,
                            bell_at_fixed_settings: r.bell_at_fixed_settings,
                            max_bell: r.max_bell,
                            is_ebt: r.is_ebt,
                        })
                        .collect(),
                ),
            }
        }
        ScanTarget::CanonicalE => {
            let (thetas, phis) = match (args.from, args.to, args.steps) {
                (None, None, None) => canonical_grid(),
                (from, to, steps) => {
                    let t = grid(from.unwrap_or(0.0), to.unwrap_or(8.0 / 9.0), steps.unwrap_or(9))?;
                    if let Some(x) = t.iter().find(|x| !(0.0..1.0).contains(*x)) {
                        return Err(CliError::Input(format!("invalid grid: fraction {x} outside [0, 1)")));
                    }
                    (t.iter().map(|x| 2.0 * PI * x).collect(), t.iter().map(|x| PI * x).collect())
                }
            };
            let cells = scan_canonical_e(&thetas, &phis, args.restarts, args.seed)?;
            ScanReport {
                what: "canonical-e",
                seed: args.seed,
                rows: ScanRows::CanonicalE(
                    cells
                        .iter()
                        .map(|c| CanonicalScanRow {
                            theta: c.theta,
                            phi: c.phi,
                            max_bell: c.max_bell,
                            non_unitary_by_margin: c.non_unitary_by_margin,
                            pass: c.pass,
                        })
                        .collect(),
                ),
            }
        }
    };
    Ok(Rendered::ok(match args.format {
        Format::Json => json(&report),
        Format::Csv => report.to_csv(),
    }))
}
