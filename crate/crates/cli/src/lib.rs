//! Command-line front end: problem files in, certificates and oracle
//! classifications out.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use minimax_cert::certify::{certify, CertificateReport, Conclusion};
use minimax_cert::oracle::{
    classify, classify_box_only, tau_profile, ClassificationReport, TauProfile, Tri,
};
use minimax_cert::Error;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub mod problem;
mod render;

pub use problem::{load_problem, Loaded, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistent(_) | Error::NumericalFailure(_) => {
                CliError::Internal(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "minimax-cert",
    version,
    about = "Certify calm local minimax points"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Mesh nodes per axis for oracle runs.
    #[arg(long, global = true)]
    pub mesh: Option<usize>,
    /// Sampled directions per cone for certification.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First- and second-order checks at the candidate.
    Certify { problem: PathBuf },
    /// Certificate and mesh classification with a soundness cross-check.
    Oracle { problem: PathBuf },
    /// Mesh classification against the minimax definitions.
    Classify {
        problem: PathBuf,
        /// Only the bounding-box and finest-ball tests.
        #[arg(long)]
        box_only: bool,
    },
    /// Minimal radius function and its calmness verdict.
    TauProfile {
        problem: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// `sha256:<hex>` of the problem file bytes.
    pub input_digest: String,
    pub seed: u64,
    pub candidate: problem::CandidateSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classification: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau_profile: Option<TauProfile>,
    pub assumptions: Vec<String>,
}

impl RunReport {
    /// The certificate conclusion line, when a certificate was computed.
    pub fn conclusion_line(&self) -> Option<String> {
        self.certificate.as_ref().map(|c| c.conclusion.to_string())
    }
}

fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// A certificate claim contradicted by the mesh classification.
pub fn soundness_conflict(
    cert: &CertificateReport,
    class: &ClassificationReport,
) -> Option<String> {
    match (&cert.conclusion, class.calm_local_minimax.verdict) {
        (Conclusion::Certified, Tri::False) => {
            Some("certificate proves calm local minimax but the oracle refutes it".into())
        }
        (Conclusion::Refuted { which }, Tri::True) => Some(format!(
            "certificate refutes via {which} but the oracle finds a calm local minimax point"
        )),
        _ => None,
    }
}

fn execute(cli: &Cli) -> Result<(RunReport, Option<(PathBuf, String)>), CliError> {
    let path = match &cli.command {
        Command::Certify { problem } | Command::Oracle { problem } => problem,
        Command::Classify { problem, .. } | Command::TauProfile { problem, .. } => problem,
    };
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Input("problem file is not UTF-8".into()))?;
    let Loaded {
        problem,
        point,
        mut options,
        file,
    } = ProblemFile::parse(&text)?.validate()?;

    let seed = cli.seed.or(options.seed).unwrap_or(options.certify.seed);
    options.certify.seed = seed;
    if let Some(s) = cli.samples {
        options.certify.samples = s;
    }
    if let Some(k) = cli.mesh {
        options.grid.mesh_per_axis = k;
        options
            .grid
            .validate()
            .map_err(|e| CliError::Input(format!("--mesh: {e}")))?;
    }

    let mut report = RunReport {
        tool: "minimax-cert".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: String::new(),
        input_digest: digest(&bytes),
        seed,
        candidate: file.candidate.clone(),
        certificate: None,
        classification: None,
        tau_profile: None,
        assumptions: Vec::new(),
    };
    let mut csv = None;
    match &cli.command {
        Command::Certify { .. } => {
            report.subcommand = "certify".into();
            report.certificate = Some(certify(&problem, &point, &options.certify)?);
        }
        Command::Oracle { .. } => {
            report.subcommand = "oracle".into();
            let cert = certify(&problem, &point, &options.certify)?;
            let class = classify(&problem, &point, &options.grid)?;
            if let Some(msg) = soundness_conflict(&cert, &class) {
                return Err(CliError::Internal(msg));
            }
            report.certificate = Some(cert);
            report.classification = Some(class);
        }
        Command::Classify { box_only, .. } => {
            report.subcommand = "classify".into();
            report.classification = Some(if *box_only {
                classify_box_only(&problem, &point, &options.grid)?
            } else {
                classify(&problem, &point, &options.grid)?
            });
        }
        Command::TauProfile { csv: target, .. } => {
            report.subcommand = "tau-profile".into();
            let profile = tau_profile(&problem, &point, &options.grid)?;
            if let Some(t) = target {
                csv = Some((t.clone(), profile.to_csv()));
            }
            report.tau_profile = Some(profile);
        }
    }
    report.assumptions = report
        .certificate
        .as_ref()
        .map(|c| c.assumptions.clone())
        .unwrap_or_default();
    Ok((report, csv))
}

/// Parses `args` (program name first), runs the subcommand and writes the
/// report to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok((report, csv)) => {
            if let Some((path, text)) = csv {
                if let Err(e) = std::fs::write(&path, text) {
                    let _ = writeln!(err, "input error: {}: {e}", path.display());
                    return EXIT_INPUT;
                }
            }
            let text = if cli.json {
                let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
                s.push('\n');
                s
            } else {
                render::text(&report)
            };
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}
