//! Library side of the `trotterlab` command: configuration parsing, report
//! emission and the run driver used by the binary.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use trotterlab_core::config::{ExperimentConfig, ExperimentKind};
use trotterlab_core::experiments::{run_experiment, RateReport, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
}

/// Parses a strict JSON configuration; missing fields keep their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        if let Some(key) = unknown_field(&message) {
            return ConfigError::UnknownKey(key);
        }
        if e.is_data() {
            return ConfigError::Validation(message);
        }
        ConfigError::Parse { line: e.line(), column: e.column(), message }
    })?;
    cfg.validate().map_err(|e| match e {
        trotterlab_core::Error::InvalidArgument(m) => ConfigError::Validation(m),
        other => ConfigError::Validation(other.to_string()),
    })?;
    Ok(cfg)
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

pub const CSV_HEADER: &str = "experiment,t,n,sup_error,opnorm_error,scaled_error";

/// Writes a report as CSV (rows plus `# key=value` trailer) or pretty JSON.
pub fn emit_report(report: &RateReport, format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)
        }
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for r in &report.rows {
                let label = if r.series.is_empty() {
                    report.experiment.clone()
                } else {
                    format!("{}/{}", report.experiment, r.series)
                };
                let op = r.opnorm_error.map(|v| format!("{v:.16e}")).unwrap_or_default();
                writeln!(out, "{label},{:.16e},{},{:.16e},{op},{:.16e}", r.t, r.n, r.sup_error, r.scaled_error)?;
            }
            let num = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.16e}"));
            let fit = report.fit.as_ref();
            writeln!(out, "# slope={}", num(fit.map(|f| f.slope)))?;
            writeln!(out, "# intercept={}", num(fit.map(|f| f.intercept)))?;
            writeln!(out, "# r2={}", num(fit.map(|f| f.r_squared)))?;
            writeln!(out, "# verdict={}", report.verdict.label())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    HarmonicRate,
    Correction,
    MatrixBch,
    Chernoff,
    Dirichlet,
    Unitary,
    All,
}

impl Command {
    pub fn label(self) -> &'static str {
        match self.experiments().as_slice() {
            [single] => single.label(),
            _ => "all",
        }
    }

    pub fn experiments(self) -> Vec<ExperimentKind> {
        match self {
            Self::HarmonicRate => vec![ExperimentKind::HarmonicRate],
            Self::Correction => vec![ExperimentKind::Correction],
            Self::MatrixBch => vec![ExperimentKind::MatrixBch],
            Self::Chernoff => vec![ExperimentKind::Chernoff],
            Self::Dirichlet => vec![ExperimentKind::Dirichlet],
            Self::Unitary => vec![ExperimentKind::Unitary],
            Self::All => ExperimentKind::ALL.to_vec(),
        }
    }
}

/// Everything that determines one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub format: Format,
    pub threads: usize,
    pub seed: Option<u64>,
}

/// Contents of `<command>_summary.json`. Deliberately excludes the thread
/// count so output bytes depend only on configuration and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub config: ExperimentConfig,
    pub reports: Vec<RateReport>,
}

#[derive(Debug)]
pub struct Outcome {
    pub summary: Summary,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.summary.reports.iter().all(|r| r.verdict.is_pass())
    }

    /// One line per failing criterion, `experiment: description`.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.summary.reports {
            if r.verdict == Verdict::Fail {
                out.extend(r.failed_checks().map(|c| format!("{}: {}", r.experiment, c.describe())));
            }
        }
        out
    }
}

pub fn load_config(path: Option<&Path>) -> anyhow::Result<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_config(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

/// Runs the requested experiments on a pool of `threads` workers and
/// writes one file per `(experiment, t)` plus the summary.
pub fn run(manifest: &RunManifest) -> anyhow::Result<Outcome> {
    anyhow::ensure!(manifest.threads >= 1, "threads must be at least 1");
    let mut config = load_config(manifest.config_path.as_deref())?;
    if let Some(seed) = manifest.seed {
        config.seed = Some(seed);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(manifest.threads)
        .build()
        .context("building thread pool")?;
    let mut reports = Vec::new();
    for kind in manifest.command.experiments() {
        log::info!("running {kind}");
        let settings = config.resolve(kind).with_context(|| format!("configuring {kind}"))?;
        let report = pool
            .install(|| run_experiment(&settings))
            .with_context(|| format!("running {kind}"))?;
        log::info!("{kind}: {}", report.verdict.label());
        reports.push(report);
    }

    fs::create_dir_all(&manifest.out_dir)
        .with_context(|| format!("creating {}", manifest.out_dir.display()))?;
    let mut written = Vec::new();
    for report in &reports {
        for t in report.t_values() {
            let path = manifest
                .out_dir
                .join(format!("{}_t{t}.{}", report.experiment, manifest.format.extension()));
            let mut buf = Vec::new();
            emit_report(&report.for_t(t), manifest.format, &mut buf)?;
            fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
    }
    let summary = Summary { command: manifest.command.label().to_string(), config, reports };
    let path = manifest.out_dir.join(format!("{}_summary.json", summary.command));
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(Outcome { summary, written })
}
