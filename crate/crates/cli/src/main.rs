mod verify;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use repvar::components::{randomized_representative, randomized_torus_representative};
use repvar::connectivity::sample_rng;
use repvar::{
    canonical_representative, canonical_torus_representative, census, classify_fix, classify_torus, count_fix,
    count_fix_char, count_torus, enumerate_fix_labels, enumerate_torus_labels, probe_path, verify_certificate,
    ComponentLabel, Error, PathCertificate, PathConfig, RepDocument, System, TorusLabel,
};
use serde_json::{json, Value};

/// SU(2) representation varieties of bounding-pair mapping tori.
#[derive(Parser)]
#[command(name = "repvar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemArg {
    Surface,
    Fix,
    Torus,
}

impl From<SystemArg> for System {
    fn from(s: SystemArg) -> System {
        match s {
            SystemArg::Surface => System::Surface,
            SystemArg::Fix => System::Fix,
            SystemArg::Torus => System::Torus,
        }
    }
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the main document here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Budget {
    /// Residual acceptance for path points.
    #[arg(long)]
    tol: Option<f64>,
    /// Bisection depth.
    #[arg(long, default_value_t = 12)]
    depth: usize,
    /// Projection iterations per point.
    #[arg(long, default_value_t = 100)]
    iters: usize,
}

impl Budget {
    fn config(&self) -> Result<PathConfig, Failure> {
        let mut cfg = PathConfig { depth: self.depth, iters: self.iters, ..PathConfig::default() };
        if let Some(tol) = self.tol {
            cfg.tol = positive(tol)?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form component counts.
    Count {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[command(flatten)]
        output: Output,
    },
    /// List component labels.
    Enumerate {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, value_enum, default_value_t = SystemArg::Fix)]
        system: SystemArg,
        #[command(flatten)]
        output: Output,
    },
    /// Write a representative of a component as a representation file.
    Representative {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        label: String,
        #[arg(long, value_enum, default_value_t = SystemArg::Fix)]
        system: SystemArg,
        /// Draw a randomized representative with this seed instead of the canonical one.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Classify the point in a representation file.
    Classify {
        file: PathBuf,
        /// Defaults to the `n` recorded in the file.
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Search for a path certificate between two representation files.
    Probe {
        file0: PathBuf,
        file1: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
        /// Defaults to torus when either file has `T`, else fix.
        #[arg(long, value_enum)]
        system: Option<SystemArg>,
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        output: Output,
    },
    /// Sampling census of components.
    Census {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, value_enum, default_value_t = SystemArg::Fix)]
        system: SystemArg,
        /// Samples per label.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        output: Output,
    },
    /// Check counts and constructions for 0 ≤ n ≤ N, or verify a certificate file.
    Verify {
        #[arg(long, default_value_t = 4)]
        n: i64,
        /// Census samples per label; 0 skips the census.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Verify this certificate file instead.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    /// Malformed input: exit code 2.
    Input(String),
    /// A check did not pass: exit code 1.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Parse(_) | Error::LabelOutOfRange { .. } => Failure::Input(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn positive(tol: f64) -> Result<f64, Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(Failure::Input(format!("tolerance must be positive, got {tol}")))
    }
}

fn read_doc(path: &Path) -> Result<RepDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    RepDocument::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_out(output: &Output, doc: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => {
            fs::write(path, format!("{doc}\n")).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        None => say(doc),
    }
}

/// Prints a line; a closed pipe (`repvar ... | head`) is not an error.
fn say(line: &str) -> Result<(), Failure> {
    match writeln!(io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Check(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

/// Emits either the text rendering or the JSON document.
fn emit(output: &Output, text: String, doc: Value) -> Result<(), Failure> {
    match output.format {
        Format::Text => write_out(output, text.trim_end()),
        Format::Json => write_out(output, &serde_json::to_string_pretty(&doc).expect("plain data")),
    }
}

fn cmd_count(n: i64, output: &Output) -> Result<(), Failure> {
    let (fix, chr, torus) = (count_fix(n), count_fix_char(n), count_torus(n));
    let m = n.unsigned_abs();
    let parity_torus = if m.is_multiple_of(2) { m * m + 1 } else { m * m };
    let parity_fix = if m.is_multiple_of(2) { m * m / 2 + 1 } else { (m * m).div_ceil(2) };
    let consistent = torus == parity_torus && fix == parity_fix && chr == parity_fix;
    let text = format!(
        "n = {n}\nfix        {fix}\nchar-fix   {chr}\ntorus      {torus}\nparity forms {}\n",
        if consistent { "agree" } else { "DISAGREE" }
    );
    let doc = json!({
        "format": "repvar-count-1",
        "n": n,
        "fix": fix,
        "char_fix": chr,
        "torus": torus,
        "parity_consistent": consistent,
    });
    emit(output, text, doc)?;
    if consistent {
        Ok(())
    } else {
        Err(Failure::Check("closed forms disagree with parity forms".into()))
    }
}

fn cmd_enumerate(n: i64, system: SystemArg, output: &Output) -> Result<(), Failure> {
    let labels: Vec<String> = match system {
        SystemArg::Torus => enumerate_torus_labels(n).iter().map(|l| l.to_string()).collect(),
        SystemArg::Fix => enumerate_fix_labels(n).iter().map(|l| l.to_string()).collect(),
        SystemArg::Surface => vec![ComponentLabel::Central.to_string()],
    };
    let text = labels.iter().fold(String::new(), |mut s, l| {
        let _ = writeln!(s, "{l}");
        s
    });
    let doc = json!({
        "format": "repvar-labels-1",
        "n": n,
        "system": System::from(system),
        "count": labels.len(),
        "labels": labels,
    });
    emit(output, text, doc)
}

fn cmd_representative(
    n: i64,
    label: &str,
    system: SystemArg,
    seed: Option<u64>,
    output: &Output,
) -> Result<(), Failure> {
    let doc = match system {
        SystemArg::Torus => {
            let label: TorusLabel = label.parse()?;
            let trep = match seed {
                Some(s) => randomized_torus_representative(n, label, &mut sample_rng(s, 0))?,
                None => canonical_torus_representative(n, label)?,
            };
            RepDocument::torus(n, trep)
        }
        _ => {
            let label: ComponentLabel = label.parse()?;
            let rep = match seed {
                Some(s) => randomized_representative(n, label, &mut sample_rng(s, 0))?,
                None => canonical_representative(n, label)?,
            };
            RepDocument::surface(n, rep)
        }
    };
    write_out(output, &doc.to_json())
}

fn cmd_classify(file: &Path, n: Option<i64>, tol: f64, output: &Output) -> Result<(), Failure> {
    let tol = positive(tol)?;
    let doc = read_doc(file)?;
    let n = n.unwrap_or(doc.n);
    let (system, label) = match doc.t {
        Some(_) => (System::Torus, classify_torus(&doc.torus_rep(), n, tol)?.to_string()),
        None => (System::Fix, classify_fix(&doc.rep, n, tol)?.to_string()),
    };
    let json = json!({ "format": "repvar-label-1", "n": n, "system": system, "label": label });
    emit(output, label, json)
}

fn cmd_probe(
    file0: &Path,
    file1: &Path,
    n: Option<i64>,
    system: Option<SystemArg>,
    budget: &Budget,
    output: &Output,
) -> Result<(), Failure> {
    let (d0, d1) = (read_doc(file0)?, read_doc(file1)?);
    let n = n.unwrap_or(d0.n);
    let system =
        system.map(System::from).unwrap_or(if d0.t.is_some() || d1.t.is_some() { System::Torus } else { System::Fix });
    let cfg = budget.config()?;
    let cert = probe_path(&d0.torus_rep(), &d1.torus_rep(), system, n, &cfg)?;
    let report = verify_certificate(&cert);
    if !report.valid {
        return Err(Failure::Check(format!("certificate failed re-verification: {:?}", report.issues)));
    }
    match &output.out {
        Some(_) => {
            write_out(output, &cert.to_json())?;
            say(&format!(
                "certificate: {} points, max residual {:.2e}, max step {:.4}, label {}",
                cert.points.len(),
                cert.max_residual,
                cert.max_step,
                cert.labels[0]
            ))
        }
        None => write_out(output, &cert.to_json()),
    }
}

fn cmd_census(
    n: i64,
    system: SystemArg,
    samples: usize,
    seed: u64,
    budget: &Budget,
    output: &Output,
) -> Result<(), Failure> {
    if system == SystemArg::Surface {
        return Err(Failure::Input("census runs on the fix or torus system".into()));
    }
    let cfg = budget.config()?;
    let report = census(n, system.into(), samples, seed, &cfg);
    let mut text = format!("census n = {n}, system {}, {samples} samples/label, seed {seed}\n", report.system);
    let _ = writeln!(text, "{:<18} {:>7} {:>10} {:>9} {:>8}", "label", "samples", "classified", "certified", "rate");
    for s in &report.per_label {
        let _ = writeln!(
            text,
            "{:<18} {:>7} {:>10} {:>9} {:>8.3}",
            s.label, s.samples, s.classified, s.certified, s.success_rate
        );
    }
    let _ = writeln!(
        text,
        "components: estimated {}, expected {}; unresolved {}; cross-label certificates {}; {}",
        report.estimated_components,
        report.expected_components,
        report.unresolved,
        report.cross_label_certificates,
        if report.agreement { "AGREE" } else { "DISAGREE" }
    );
    emit(output, text, serde_json::to_value(&report).expect("plain data"))?;
    if report.agreement {
        Ok(())
    } else {
        Err(Failure::Check("census disagrees with the closed-form count".into()))
    }
}

fn cmd_verify_cert(path: &Path, output: &Output) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let cert = PathCertificate::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let report = verify_certificate(&cert);
    let mut text = format!(
        "{}: {} points, max residual {:.2e}, max step {:.4}\n",
        if report.valid { "VALID" } else { "INVALID" },
        cert.points.len(),
        report.max_residual,
        report.max_step
    );
    for issue in &report.issues {
        let _ =
            writeln!(text, "  {}{}", issue.index.map(|i| format!("point {i}: ")).unwrap_or_default(), issue.message);
    }
    let mut doc = serde_json::to_value(&report).expect("plain data");
    doc["format"] = json!("repvar-cert-report-1");
    emit(output, text, doc)?;
    if report.valid {
        Ok(())
    } else {
        Err(Failure::Check("certificate is invalid".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Count { n, output } => cmd_count(*n, output),
        Command::Enumerate { n, system, output } => cmd_enumerate(*n, *system, output),
        Command::Representative { n, label, system, seed, output } => {
            cmd_representative(*n, label, *system, *seed, output)
        }
        Command::Classify { file, n, tol, output } => cmd_classify(file, *n, *tol, output),
        Command::Probe { file0, file1, n, system, budget, output } => {
            cmd_probe(file0, file1, *n, *system, budget, output)
        }
        Command::Census { n, system, samples, seed, budget, output } => {
            cmd_census(*n, *system, *samples, *seed, budget, output)
        }
        Command::Verify { cert: Some(path), output, .. } => cmd_verify_cert(path, output),
        Command::Verify { n, samples, seed, budget, output, cert: None } => {
            if *n < 0 {
                return Err(Failure::Input("--n must be nonnegative for verify".into()));
            }
            let report = verify::run_checks(*n, *samples, *seed, &budget.config()?);
            let pass = report.pass;
            emit(output, report.to_text(), serde_json::to_value(&report).expect("plain data"))?;
            if pass {
                Ok(())
            } else {
                Err(Failure::Check("some checks failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
