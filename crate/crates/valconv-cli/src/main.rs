//! `valconv`: exact computations with invariant differential forms and
//! smooth invariant valuations on Lie groups given by rational structure
//! constants, plus the bi-invariant valuation algebra of the 3-sphere.
//!
//! Exit codes: 0 success, 1 identity or property violation, 2 invalid input.

use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use valconv_core::conv::{convolve_forms, mu_component};
use valconv_core::error::Error as CoreError;
use valconv_core::forms::BigradedForm;
use valconv_core::lie::{builtin, builtin_names, LieAlgebraSpec};
use valconv_core::linalg::Gauge;
use valconv_core::s3;
use valconv_core::scalar::rat_to_string;
use valconv_core::suites;
use valconv_core::valuation::{convolve_valuations, validate, InvariantValuation};

#[derive(Parser)]
#[command(
    name = "valconv",
    version,
    about = "Exact convolution of invariant forms and valuations on Lie groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a Lie algebra: Jacobi validity, traces, unimodularity.
    Lie {
        #[command(subcommand)]
        command: LieCommand,
    },
    /// Operate on bigraded invariant forms.
    Forms {
        #[command(subcommand)]
        command: FormsCommand,
    },
    /// Operate on smooth invariant valuations.
    Val {
        #[command(subcommand)]
        command: ValCommand,
    },
    /// The bi-invariant valuation algebra of the 3-sphere.
    S3 {
        #[command(subcommand)]
        command: S3Command,
    },
    /// Run every property suite against one Lie algebra.
    Suite {
        /// Builtin name or path to a Lie algebra JSON file.
        #[arg(long, default_value = "so3")]
        lie: String,
        /// Seed for all randomized properties.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Trials per randomized property; must be positive.
        #[arg(long, default_value_t = 25)]
        trials: usize,
        /// Degree bound for random polynomial coefficients.
        #[arg(long, default_value_t = 2)]
        max_deg: usize,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum LieCommand {
    /// Validate a spec and report its unimodularity.
    Check {
        /// Builtin name or path to a Lie algebra JSON file.
        spec: String,
    },
}

#[derive(Subcommand)]
enum FormsCommand {
    /// Convolve two bigraded forms.
    Convolve {
        lhs: PathBuf,
        rhs: PathBuf,
        /// Builtin name or path to a Lie algebra JSON file.
        #[arg(long)]
        lie: String,
        /// Require the left factor to be invariant.
        #[arg(long)]
        strict_invariance: bool,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Total differential of a bigraded form.
    D {
        form: PathBuf,
        #[arg(long)]
        lie: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fiber integral of the top sphere-component.
    Integrate {
        form: PathBuf,
        #[arg(long)]
        lie: String,
    },
}

#[derive(Subcommand)]
enum ValCommand {
    /// Convolve two valuations; the files embed their Lie algebras.
    Convolve {
        lhs: PathBuf,
        rhs: PathBuf,
        /// Require invariant inputs.
        #[arg(long)]
        strict_invariance: bool,
        /// Pivoting order for the primitive solver.
        #[arg(long, value_enum, default_value_t = GaugeArg::Forward)]
        gauge: GaugeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structural checks on a valuation file.
    Validate { val: PathBuf },
}

#[derive(Subcommand)]
enum S3Command {
    /// Print a multiplication table.
    Table {
        #[arg(long, value_enum, default_value_t = BasisArg::Nu)]
        basis: BasisArg,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
    /// Run the full table invariant suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    Nu,
    Mu,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum GaugeArg {
    Forward,
    Reverse,
}

impl From<GaugeArg> for Gauge {
    fn from(g: GaugeArg) -> Gauge {
        match g {
            GaugeArg::Forward => Gauge::Forward,
            GaugeArg::Reverse => Gauge::Reverse,
        }
    }
}

/// A command failure with its exit code; code 2 marks invalid input and
/// code 1 a violated identity or failed operation.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn violation(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn use_color() -> bool {
    match std::env::var("VALCONV_COLOR") {
        Ok(v) => v == "1" || v.eq_ignore_ascii_case("always"),
        Err(_) => std::io::stderr().is_terminal(),
    }
}

fn paint(text: &str, code: &str) -> String {
    if use_color() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("{} is not valid JSON: {e}", path.display())))
}

/// Resolve a `--lie` argument: an existing file wins, otherwise a builtin
/// name. Structural defects in a file (including a Jacobi violation) make
/// the input invalid for every command except `lie check`.
fn load_spec(arg: &str) -> Result<LieAlgebraSpec, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let v = read_json(path)?;
        return LieAlgebraSpec::from_json(&v)
            .map_err(|e| Failure::invalid(format!("{arg}: {e}")));
    }
    builtin(arg).ok_or_else(|| {
        Failure::invalid(format!(
            "unknown Lie algebra '{arg}': not a readable file or a builtin ({})",
            builtin_names().join(", ")
        ))
    })
}

fn load_form(path: &Path, n: usize) -> Result<BigradedForm, Failure> {
    let v = read_json(path)?;
    BigradedForm::from_json(&v, n)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn load_valuation(path: &Path) -> Result<(InvariantValuation, LieAlgebraSpec), Failure> {
    let v = read_json(path)?;
    InvariantValuation::from_json(&v)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

/// Print the result JSON to stdout, or write it to `out` and report the
/// path; the human summary always goes to stderr.
fn emit(result: &Value, out: Option<&Path>, summary: &str) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(result).expect("serializable value");
    match out {
        Some(path) => {
            fs::write(path, text + "\n")
                .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("{summary}");
            eprintln!("wrote {}", path.display());
        }
        None => {
            eprintln!("{summary}");
            println!("{text}");
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Lie { command: LieCommand::Check { spec } } => cmd_lie_check(&spec),
        Command::Forms { command } => match command {
            FormsCommand::Convolve { lhs, rhs, lie, strict_invariance, out } => {
                cmd_forms_convolve(&lhs, &rhs, &lie, strict_invariance, out.as_deref())
            }
            FormsCommand::D { form, lie, out } => cmd_forms_d(&form, &lie, out.as_deref()),
            FormsCommand::Integrate { form, lie } => cmd_forms_integrate(&form, &lie),
        },
        Command::Val { command } => match command {
            ValCommand::Convolve { lhs, rhs, strict_invariance, gauge, out } => {
                cmd_val_convolve(&lhs, &rhs, strict_invariance, gauge.into(), out.as_deref())
            }
            ValCommand::Validate { val } => cmd_val_validate(&val),
        },
        Command::S3 { command } => match command {
            S3Command::Table { basis, format } => cmd_s3_table(basis, format),
            S3Command::Verify { format } => cmd_s3_verify(format),
        },
        Command::Suite { lie, seed, trials, max_deg, format } => {
            cmd_suite(&lie, seed, trials, max_deg, format)
        }
    }
}

fn cmd_lie_check(arg: &str) -> Result<(), Failure> {
    let path = Path::new(arg);
    let spec = if path.exists() {
        let v = read_json(path)?;
        match LieAlgebraSpec::from_json(&v) {
            Ok(spec) => spec,
            Err(CoreError::Jacobi { i, j, k }) => {
                println!("jacobi: violated on (e{i}, e{j}, e{k})");
                return Err(Failure::violation("the bracket table is not a Lie algebra"));
            }
            Err(e) => return Err(Failure::invalid(format!("{arg}: {e}"))),
        }
    } else {
        builtin(arg).ok_or_else(|| {
            Failure::invalid(format!(
                "unknown Lie algebra '{arg}': not a readable file or a builtin ({})",
                builtin_names().join(", ")
            ))
        })?
    };
    println!("algebra: {} (dim {})", spec.name, spec.n);
    println!("jacobi: ok");
    for i in 1..=spec.n {
        println!("tr ad_e{i} = {}", rat_to_string(&spec.trace_ad(i)));
    }
    match spec.unimodular_witness() {
        None => println!("unimodular: yes"),
        Some((i, tr)) => println!("unimodular: no (tr ad_e{i} = {})", rat_to_string(&tr)),
    }
    Ok(())
}

fn core_violation(e: CoreError) -> Failure {
    Failure::violation(e.to_string())
}

fn cmd_forms_convolve(
    lhs: &Path,
    rhs: &Path,
    lie: &str,
    strict: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let spec = load_spec(lie)?;
    let a = load_form(lhs, spec.n)?;
    let b = load_form(rhs, spec.n)?;
    let result = convolve_forms(&a, &b, &spec, strict).map_err(core_violation)?;
    let comps: Vec<usize> = result.components().map(|(&k, _)| k).collect();
    let mut summary = format!(
        "convolved: degree {} * {} -> {}, components {:?}",
        a.degree(),
        b.degree(),
        result.degree(),
        comps
    );
    if result.degree() == spec.n {
        // The volume coefficient only exists when the bottom component is
        // constant; generic forms simply have no mu to report.
        if let Ok(mu) = mu_component(&result) {
            summary.push_str(&format!(", mu = {mu}"));
        }
    }
    emit(&result.to_json(), out, &summary)
}

fn cmd_forms_d(form: &Path, lie: &str, out: Option<&Path>) -> Result<(), Failure> {
    let spec = load_spec(lie)?;
    let f = load_form(form, spec.n)?;
    let result = f.d_total(&spec).map_err(core_violation)?;
    let summary = format!(
        "d: degree {} -> {}, zero: {}",
        f.degree(),
        result.degree(),
        result.is_zero()
    );
    emit(&result.to_json(), out, &summary)
}

fn cmd_forms_integrate(form: &Path, lie: &str) -> Result<(), Failure> {
    let spec = load_spec(lie)?;
    let f = load_form(form, spec.n)?;
    let result = f.pushforward().map_err(core_violation)?;
    let mut terms = serde_json::Map::new();
    for (set, c) in result.terms.iter() {
        let key: Vec<String> = set.indices().iter().map(|i| i.to_string()).collect();
        terms.insert(key.join(","), c.to_json());
    }
    let space = match result.space {
        valconv_core::blade::Space::Primal => "primal",
        valconv_core::blade::Space::Dual => "dual",
    };
    let payload = json!({"n": result.n, "space": space, "terms": terms});
    emit(&payload, None, &format!("fiber integral of a degree-{} form", f.degree()))
}

fn cmd_val_convolve(
    lhs: &Path,
    rhs: &Path,
    strict: bool,
    gauge: Gauge,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (phi, spec_l) = load_valuation(lhs)?;
    let (psi, spec_r) = load_valuation(rhs)?;
    if spec_l != spec_r {
        return Err(Failure::violation(format!(
            "valuations live on different Lie algebras ({} vs {})",
            spec_l.name, spec_r.name
        )));
    }
    let result = convolve_valuations(&phi, &psi, &spec_l, strict, gauge).map_err(core_violation)?;
    let mu = result.mu().map_err(core_violation)?;
    let summary = format!("convolved valuations on {}: c = {}, mu = {}", spec_l.name, result.c, mu);
    emit(&result.to_json(spec_l.to_json()), out, &summary)
}

fn cmd_val_validate(val: &Path) -> Result<(), Failure> {
    let (v, spec) = load_valuation(val)?;
    let report = validate(&v, &spec, Gauge::Forward, true).map_err(core_violation)?;
    let flag = |b: bool| if b { "ok" } else { "FAIL" };
    println!("algebra: {} (dim {})", spec.name, spec.n);
    println!("shape: {}", flag(report.shape_ok));
    println!("vertical: {}", flag(report.vertical));
    println!("closed: {}", flag(report.closed));
    println!("fiber integral zero: {}", flag(report.integral_zero));
    println!("primitive found: {}", flag(report.primitive_found));
    match report.invariant {
        Some(b) => println!("invariant: {}", flag(b)),
        None => println!("invariant: not checked"),
    }
    for m in &report.messages {
        println!("note: {m}");
    }
    if report.is_valid() && report.invariant != Some(false) {
        Ok(())
    } else {
        Err(Failure::violation("valuation failed validation"))
    }
}

fn cmd_s3_table(basis: BasisArg, format: Format) -> Result<(), Failure> {
    let table = match basis {
        BasisArg::Nu => s3::nu_table(),
        BasisArg::Mu => s3::mu_table(),
    };
    match format {
        Format::Md => print!("{}", table.table_markdown()),
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&table.table_json()).expect("table json"))
        }
    }
    Ok(())
}

fn cmd_s3_verify(format: Format) -> Result<(), Failure> {
    let report = suites::s3_suite();
    match format {
        Format::Md => print!("{}", report.to_markdown()),
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&report.to_json()).expect("report json"))
        }
    }
    if report.passed() {
        eprintln!("{}", paint("all table properties hold", "32"));
        Ok(())
    } else {
        Err(Failure::violation("table verification failed"))
    }
}

fn write_counterexamples(reports: &[suites::SuiteReport]) -> Vec<PathBuf> {
    let mut paths = Vec::new();
    for report in reports {
        for p in report.properties.iter().filter(|p| !p.passed) {
            let payload = json!({
                "suite": report.suite,
                "spec": report.spec,
                "seed": report.seed,
                "trials": report.trials,
                "max_deg": report.max_deg,
                "property": p.name,
                "counterexample": p.counterexample,
            });
            let path = PathBuf::from(format!(
                "valconv-counterexample-{}-{}.json",
                report.suite, p.name
            ));
            if let Ok(text) = serde_json::to_string_pretty(&payload) {
                if fs::write(&path, text + "\n").is_ok() {
                    paths.push(path);
                }
            }
        }
    }
    paths
}

fn cmd_suite(
    lie: &str,
    seed: u64,
    trials: usize,
    max_deg: usize,
    format: Format,
) -> Result<(), Failure> {
    if trials == 0 {
        return Err(Failure::invalid("--trials must be positive"));
    }
    let spec = load_spec(lie)?;
    let start = Instant::now();
    let reports = suites::run_all(&spec, seed, trials, max_deg);
    let elapsed = start.elapsed();
    match format {
        Format::Md => {
            for report in &reports {
                print!("{}", report.to_markdown());
                println!();
            }
        }
        Format::Json => {
            let all: Vec<Value> = reports.iter().map(|r| r.to_json()).collect();
            let payload = json!({
                "spec": spec.name,
                "seed": seed,
                "trials": trials,
                "max_deg": max_deg,
                "passed": reports.iter().all(|r| r.passed()),
                "suites": all,
            });
            println!("{}", serde_json::to_string_pretty(&payload).expect("suite json"));
        }
    }
    let total: usize = reports.iter().map(|r| r.properties.len()).sum();
    let failed: usize = reports.iter().map(|r| r.failures().len()).sum();
    if failed == 0 {
        eprintln!(
            "{} ({} properties, {:.2}s)",
            paint("suite passed", "32"),
            total,
            elapsed.as_secs_f64()
        );
        Ok(())
    } else {
        for path in write_counterexamples(&reports) {
            eprintln!("counterexample written to {}", path.display());
        }
        eprintln!(
            "{} ({} of {} properties, {:.2}s)",
            paint("suite FAILED", "31"),
            failed,
            total,
            elapsed.as_secs_f64()
        );
        Err(Failure::violation(format!("{failed} properties failed")))
    }
}
