use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use nclp_core::expectations::ExpectationSpec;
use nclp_core::funcalc::{frechet_derivative, DerivativeMethod};
use nclp_core::lab::{
    alt_proof_check, case1b_decomposition_check, case2_conclusion_check, case2_default_depth, case2_identity_check,
    classical_pointwise_check, corollary1_ratio, counterexample_search, duality_monotonicity_check,
    normalized_theorem_gap, run_campaign, run_sweep, CampaignConfig, GapReport, ALT_QUADRATURE_NODES,
};
use nclp_core::matcore::{frobenius, random_hermitian, sample_psd, stream_rng, InstanceKind, MatrixJson};
use nclp_core::semigroups::{laplace_resolvent_apply, resolvent, resolvent_defect_check, GeneratorSpec};
use nclp_core::PositiveMatrix;

use crate::args::{
    CampaignArgs, CheckArgs, Command, CounterexampleArgs, DerivativeArgs, Format, OutputArgs, SemigroupArgs,
};

/// `Ok(true)` when every check passed, `Ok(false)` on a check failure,
/// `Err` for usage, config and operand errors.
pub type Outcome = Result<bool, String>;

const SEED_ENV: &str = "NCLP_SEED";
const DEFAULT_TOL: f64 = 1e-9;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Verify(a) => verify(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Counterexample(a) => counterexample(&a),
        Command::Derivative(a) => derivative(&a),
        Command::Semigroup(a) => semigroup(&a),
        Command::Check(a) => check(&a),
    }
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| format!("{SEED_ENV}={s:?} is not an unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn seed_or_env(seed: Option<u64>) -> Result<u64, String> {
    Ok(match seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    })
}

/// Config file, then flags on top; the seed falls back to the environment
/// only when neither sets it.
pub fn campaign_config(args: &CampaignArgs) -> Result<CampaignConfig, String> {
    let (mut config, file_seed) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let has_seed = value.get("seed").is_some();
            let config: CampaignConfig =
                serde_json::from_value(value).map_err(|e| format!("{}: {e}", path.display()))?;
            let seed = has_seed.then_some(config.seed);
            (config, seed)
        }
        None => (CampaignConfig::default(), None),
    };
    config.seed = match (args.seed, file_seed) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => env_seed()?.unwrap_or(0),
    };
    if let Some(d) = &args.dims {
        config.dims = d.clone();
    }
    if let Some(p) = &args.p_grid {
        config.p_grid = p.clone();
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(t) = args.tol {
        config.tol = t;
    }
    config.inject_fault |= args.inject_fault;
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn emit(output: &OutputArgs, text: &str) -> Result<(), String> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| e.to_string())
        }
    }
}

/// Human summary goes to stdout when the report goes to a file.
fn summary(output: &OutputArgs, text: &str) {
    if output.out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
}

fn report_summary(report: &GapReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "seed {}: {} instances in {} cells, {} failures",
        report.seed,
        report.instances,
        report.cells.len(),
        report.failures.len()
    );
    let worst = report.worst_by_check();
    if !worst.is_empty() {
        let _ = writeln!(s, "worst normalized gap by check:");
        for (check, gap) in worst {
            let _ = writeln!(s, "  {check:<22} {gap:+.3e}");
        }
    }
    for c in &report.counterexamples {
        let _ = writeln!(
            s,
            "two-atom search p = {}: ratio {:.12} at μ = {:.6}, x = (1, {:.6})",
            c.p, c.ratio, c.weights[0], c.x[1]
        );
    }
    const SHOWN: usize = 20;
    for f in report.failures.iter().take(SHOWN) {
        let _ = writeln!(
            s,
            "FAIL {} seed={} trial={} dim={} kind={} p={}: {}",
            f.check, f.seed, f.trial, f.dim, f.kind, f.p, f.detail
        );
    }
    if report.failures.len() > SHOWN {
        let _ = writeln!(s, "... {} more failures in the report", report.failures.len() - SHOWN);
    }
    s
}

fn write_report(report: &GapReport, output: &OutputArgs, default: Format) -> Outcome {
    let text = match output.format.unwrap_or(default) {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(output, &text)?;
    summary(output, &report_summary(report));
    Ok(report.passed())
}

fn verify(args: &CampaignArgs) -> Outcome {
    let config = campaign_config(args)?;
    let report = run_campaign(&config).map_err(|e| e.to_string())?;
    write_report(&report, &args.output, Format::Json)
}

fn sweep(args: &CampaignArgs) -> Outcome {
    let config = campaign_config(args)?;
    let report = run_sweep(&config).map_err(|e| e.to_string())?;
    write_report(&report, &args.output, Format::Csv)
}

fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn counterexample(args: &CounterexampleArgs) -> Outcome {
    let r = counterexample_search(args.p, args.budget).map_err(|e| e.to_string())?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_text(&r),
        Format::Csv => {
            let mut s = String::from("step,mu,r,ratio\n");
            for (i, step) in r.trace.iter().enumerate() {
                let _ = writeln!(s, "{i},{},{},{}", step.mu, step.r, step.ratio);
            }
            s
        }
    };
    emit(&args.output, &text)?;
    summary(
        &args.output,
        &format!(
            "p = {}: ratio {:.12} at weights ({:.6}, {:.6}), x = (1, {:.6}); exceeds one: {} ({} evaluations)\n",
            r.p, r.ratio, r.weights[0], r.weights[1], r.x[1], r.exceeds_one, r.evaluations
        ),
    );
    Ok(true)
}

#[derive(Serialize)]
struct DerivativeReport {
    dim: usize,
    p: f64,
    seed: u64,
    methods: Vec<&'static str>,
    /// `‖D_i − D_j‖_F / ‖D_dd‖_F`.
    relative_differences: Vec<Vec<f64>>,
    /// `‖D_x f_p(x) − p x^p‖_F / ‖p x^p‖_F`.
    euler_residual: f64,
    pass: bool,
}

const EXACT_AGREEMENT: f64 = 1e-7;
const FINITE_DIFFERENCE_AGREEMENT: f64 = 1e-5;
const EULER_AGREEMENT: f64 = 1e-9;

fn derivative(args: &DerivativeArgs) -> Outcome {
    if args.dim == 0 || args.dim > 16 {
        return Err(format!("--dim must be in 1..=16, got {}", args.dim));
    }
    let seed = seed_or_env(args.seed)?;
    let mut rng = stream_rng(seed, 0);
    let x = sample_psd(args.dim, InstanceKind::SpectralGap, &mut rng);
    let h = random_hermitian(args.dim, &mut rng);
    let err = |e: nclp_core::Error| e.to_string();
    let values = DerivativeMethod::ALL
        .iter()
        .map(|&m| frechet_derivative(&x, &h, args.p, m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let scale = values[0].frobenius().max(f64::MIN_POSITIVE);
    let diffs: Vec<Vec<f64>> = values
        .iter()
        .map(|a| values.iter().map(|b| frobenius(&(a.as_matrix() - b.as_matrix())) / scale).collect())
        .collect();
    let euler = frechet_derivative(&x, x.base(), args.p, DerivativeMethod::DividedDifference).map_err(err)?;
    let target = x.power(args.p).map_err(err)?.base().scale(args.p);
    let euler_residual = frobenius(&(euler.as_matrix() - target.as_matrix())) / target.frobenius();

    let fd = DerivativeMethod::ALL.iter().position(|&m| m == DerivativeMethod::FiniteDifference).unwrap();
    let mut pass = euler_residual <= EULER_AGREEMENT;
    for (i, row) in diffs.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            let limit = if i == fd || j == fd { FINITE_DIFFERENCE_AGREEMENT } else { EXACT_AGREEMENT };
            pass &= d <= limit;
        }
    }
    let methods: Vec<&'static str> = DerivativeMethod::ALL.iter().map(|m| m.name()).collect();
    let report = DerivativeReport {
        dim: args.dim,
        p: args.p,
        seed,
        methods: methods.clone(),
        relative_differences: diffs.clone(),
        euler_residual,
        pass,
    };
    let mut table = format!("{:<20}", "method");
    for m in &methods {
        let _ = write!(table, " {m:>20}");
    }
    table.push('\n');
    for (m, row) in methods.iter().zip(&diffs) {
        let _ = write!(table, "{m:<20}");
        for d in row {
            let _ = write!(table, " {d:>20.3e}");
        }
        table.push('\n');
    }
    let _ = writeln!(table, "euler residual {euler_residual:.3e}");
    let _ = writeln!(
        table,
        "limits: {EXACT_AGREEMENT:e} between exact routes, {FINITE_DIFFERENCE_AGREEMENT:e} against finite differences, {EULER_AGREEMENT:e} for the Euler relation"
    );
    match args.output.format {
        None => emit(&args.output, &table)?,
        Some(Format::Json) => {
            emit(&args.output, &json_text(&report))?;
            summary(&args.output, &table);
        }
        Some(Format::Csv) => {
            let mut csv = format!("method,{}\n", methods.join(","));
            for (m, row) in methods.iter().zip(&diffs) {
                let cells: Vec<String> = row.iter().map(|d| format!("{d:e}")).collect();
                let _ = writeln!(csv, "{m},{}", cells.join(","));
            }
            emit(&args.output, &csv)?;
            summary(&args.output, &table);
        }
    }
    Ok(pass)
}

#[derive(Serialize)]
struct LambdaRow {
    lambda: f64,
    inverse_residual: f64,
    unital_residual: f64,
    trace_residual: f64,
    positivity_floor: f64,
    /// `‖R_λ x − ∫ e^{−λt} T_t x dt‖_F / ‖R_λ x‖_F`.
    laplace_residual: f64,
    defect_norm: f64,
    input_norm: f64,
    cross_term: f64,
    pass: bool,
}

const LAPLACE_AGREEMENT: f64 = 1e-6;
const DIAGNOSTIC_SAMPLES: usize = 16;

fn semigroup(args: &SemigroupArgs) -> Outcome {
    let seed = seed_or_env(args.seed)?;
    let spec: GeneratorSpec = match &args.generator {
        Some(text) => serde_json::from_str(text).map_err(|e| format!("--generator: {e}"))?,
        None => GeneratorSpec::UnitaryMixing { count: 2, rates: vec![1.0, 0.5], seed },
    };
    if args.dim == 0 || args.dim > nclp_core::semigroups::MAX_GENERATOR_DIM {
        return Err(format!("--dim must be in 1..={}", nclp_core::semigroups::MAX_GENERATOR_DIM));
    }
    let tol = args.tol.unwrap_or(DEFAULT_TOL);
    let err = |e: nclp_core::Error| e.to_string();
    let g = spec.build(args.dim).map_err(err)?;
    let mut rng = stream_rng(seed, 1);
    let generator = g.diagnostics(DIAGNOSTIC_SAMPLES, &mut rng).map_err(err)?;
    let x = sample_psd(args.dim, InstanceKind::Generic, &mut rng);
    let mut pass = generator.passes();
    let mut rows = Vec::new();
    for &lambda in &args.lambdas {
        let r = resolvent(&g, lambda).map_err(err)?;
        let d = r.diagnostics(&g, DIAGNOSTIC_SAMPLES, &mut rng).map_err(err)?;
        let direct = r.apply(x.as_matrix());
        let oracle = laplace_resolvent_apply(&g, lambda, x.as_matrix()).map_err(err)?;
        let laplace_residual = frobenius(&(&direct - &oracle)) / frobenius(&direct).max(f64::MIN_POSITIVE);
        let defect = resolvent_defect_check(&g, lambda, &x, args.p).map_err(err)?;
        let ok = d.passes() && laplace_residual <= LAPLACE_AGREEMENT && defect.holds(args.p, tol);
        pass &= ok;
        rows.push(LambdaRow {
            lambda,
            inverse_residual: d.inverse_residual,
            unital_residual: d.unital_residual,
            trace_residual: d.trace_residual,
            positivity_floor: d.positivity_floor,
            laplace_residual,
            defect_norm: defect.defect_norm,
            input_norm: defect.input_norm,
            cross_term: defect.cross_term,
            pass: ok,
        });
    }
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_text(&json!({
            "dim": args.dim,
            "p": args.p,
            "seed": seed,
            "tol": tol,
            "generator": spec,
            "generator_diagnostics": generator,
            "resolvents": rows,
            "pass": pass,
        })),
        Format::Csv => {
            let mut s = String::from(
                "lambda,inverse_residual,unital_residual,trace_residual,positivity_floor,laplace_residual,defect_norm,input_norm,cross_term,pass\n",
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
                    r.lambda,
                    r.inverse_residual,
                    r.unital_residual,
                    r.trace_residual,
                    r.positivity_floor,
                    r.laplace_residual,
                    r.defect_norm,
                    r.input_norm,
                    r.cross_term,
                    r.pass
                );
            }
            s
        }
    };
    emit(&args.output, &text)?;
    Ok(pass)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairOperands {
    a: MatrixJson,
    b: MatrixJson,
    p: f64,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    eps: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalarOperands {
    a: f64,
    b: f64,
    p: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Corollary1Operands {
    x: MatrixJson,
    expectation: ExpectationSpec,
    p: f64,
}

#[derive(Serialize)]
struct Tolerance {
    name: &'static str,
    value: f64,
    source: &'static str,
}

fn fixed(name: &'static str, value: f64) -> Tolerance {
    Tolerance { name, value, source: "built-in" }
}

fn operands<T: DeserializeOwned>(value: &Value) -> Result<T, String> {
    serde_json::from_value(value.clone()).map_err(|e| format!("operands: {e}"))
}

fn pair(o: &PairOperands) -> Result<(PositiveMatrix, PositiveMatrix), String> {
    let a = o.a.to_positive().map_err(|e| format!("operand a: {e}"))?;
    let b = o.b.to_positive().map_err(|e| format!("operand b: {e}"))?;
    Ok((a, b))
}

fn check(args: &CheckArgs) -> Outcome {
    let input: Value = serde_json::from_str(&args.operands).map_err(|e| format!("operands are not JSON: {e}"))?;
    let (tol, tol_source) = match args.tol {
        Some(t) if t > 0.0 => (t, "--tol"),
        Some(t) => return Err(format!("--tol must be positive, got {t}")),
        None => (DEFAULT_TOL, "default"),
    };
    let slack = Tolerance { name: "inequality_slack", value: tol, source: tol_source };
    let err = |e: nclp_core::Error| e.to_string();
    let (result, tolerances, pass): (Value, Vec<Tolerance>, bool) = match args.op.as_str() {
        "theorem_gap" => {
            let o: PairOperands = operands(&input)?;
            let (a, b) = pair(&o)?;
            let (gap, normalized) = normalized_theorem_gap(&a, &b, o.p).map_err(err)?;
            (json!({"gap": gap, "normalized_gap": normalized}), vec![slack], normalized >= -tol)
        }
        "classical_pointwise" => {
            let o: ScalarOperands = operands(&input)?;
            let gap = classical_pointwise_check(o.a, o.b, o.p).map_err(err)?;
            let scale = o.a.max(o.b).powf(o.p).max(1.0);
            (json!({"gap": gap}), vec![slack], gap >= -tol * scale)
        }
        "duality" => {
            let o: PairOperands = operands(&input)?;
            let (a, b) = pair(&o)?;
            let r = duality_monotonicity_check(&a, &b, o.p).map_err(err)?;
            let (_, normalized) = normalized_theorem_gap(&a, &b, o.p).map_err(err)?;
            let ok = normalized >= -tol && r.agreement_residual <= 1e-12 && r.norm_residual <= 1e-10;
            let tols = vec![slack, fixed("agreement_residual", 1e-12), fixed("norm_residual", 1e-10)];
            (serde_json::to_value(&r).unwrap(), tols, ok)
        }
        "corollary1" => {
            let o: Corollary1Operands = operands(&input)?;
            let x = o.x.to_positive().map_err(|e| format!("operand x: {e}"))?;
            let e = o.expectation.build().map_err(|e| format!("operand expectation: {e}"))?;
            let r = corollary1_ratio(&x, &e, o.p).map_err(err)?;
            let ok = r.ratio <= 1.0 + 1e-10 && r.orthogonality.abs() <= 1e-10;
            (serde_json::to_value(&r).unwrap(), vec![fixed("ratio_excess", 1e-10), fixed("orthogonality", 1e-10)], ok)
        }
        "case1b" => {
            let o: PairOperands = operands(&input)?;
            let (a, b) = pair(&o)?;
            let r = case1b_decomposition_check(&a, &b, o.p).map_err(err)?;
            let ok = r.identity_residual <= 1e-10 && r.min_margin() >= -tol;
            (serde_json::to_value(&r).unwrap(), vec![slack, fixed("identity_residual", 1e-10)], ok)
        }
        "case2_identity" => {
            let o: PairOperands = operands(&input)?;
            let (a, b) = pair(&o)?;
            let n = match o.n {
                Some(n) => n,
                None => case2_default_depth(o.p).map_err(err)?,
            };
            let r = case2_identity_check(&a, &b, o.p, n).map_err(err)?;
            let ok = r.residual <= 1e-9;
            (serde_json::to_value(&r).unwrap(), vec![fixed("identity_residual", 1e-9)], ok)
        }
        "case2_chain" => {
            let o: PairOperands = operands(&input)?;
            let (a, b) = pair(&o)?;
            let r = case2_conclusion_check(&a, &b, o.p).map_err(err)?;
            let ok = r.min_margin() >= -tol && r.terminal_residual <= 1e-10;
            (serde_json::to_value(&r).unwrap(), vec![slack, fixed("terminal_residual", 1e-10)], ok)
        }
        "alt_proof" => {
            let o: PairOperands = operands(&input)?;
            let (a, b) = pair(&o)?;
            let eps = o.eps.unwrap_or(CampaignConfig::default().eps);
            let r = alt_proof_check(&a, &b, o.p, eps, ALT_QUADRATURE_NODES).map_err(err)?;
            let ok = r.representation_residual <= 1e-6 && r.min_margin() >= -tol && r.jensen_floor >= -1e-9;
            let tols = vec![slack, fixed("representation_residual", 1e-6), fixed("jensen_floor", 1e-9)];
            (serde_json::to_value(&r).unwrap(), tols, ok)
        }
        other => return Err(format!("unknown check {other:?}")),
    };
    let report = json!({
        "op": args.op,
        "operands": input,
        "tolerances": tolerances,
        "result": result,
        "pass": pass,
    });
    emit(&args.output, &json_text(&report))?;
    Ok(pass)
}
