//! The `urank` command line.
//!
//! Every command that writes files also writes a [`RunManifest`] next to
//! them, listing each output with its SHA-256 digest. `urank replay
//! --manifest m.json` recomputes the outputs and checks the digests.
//!
//! Exit codes: 0 success, 1 validation error (bad flags, malformed input,
//! digest mismatch on replay), 2 I/O error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complexity::{bound_report, BoundOptions};
use crate::erm::{erm_exhaustive, erm_threshold_scan};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentConfig, OracleSpec, Truth};
use crate::hoeffding::{decompose, ExpectationOracle};
use crate::io::{self, read_document, read_sample_csv, to_json};
use crate::model::{ClassSpec, RankingRule};
use crate::risk::{empirical_risk, empirical_risk_naive};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Parser)]
#[command(name = "urank", version, about = "Pairwise ranking risk, its Hoeffding decomposition and rate experiments")]
pub struct Cli {
    /// Worker threads; outputs are identical for any value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Draw a sample CSV from an oracle document
    Sample {
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical ranking risk L_n of one rule
    Risk {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        rule: PathBuf,
        /// Use the O(n²) pair loop
        #[arg(long)]
        naive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hoeffding decomposition of the excess-risk U-statistic
    Decompose {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        /// Reference rule (default: the oracle's Bayes rule)
        #[arg(long)]
        bayes: Option<PathBuf>,
        /// Also write the n×n table of the degenerate kernel
        #[arg(long)]
        table_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rademacher estimates E Z, E U, E M and the bound shape
    Complexity {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long)]
        bayes: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Keep i = j terms in the chaos sums
        #[arg(long)]
        include_diagonal: bool,
        /// Per-replicate (z, u, m) values as CSV
        #[arg(long)]
        replicates_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical risk minimizer over a rule class
    Erm {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded Monte-Carlo studies
    #[command(subcommand)]
    Experiment(Study),
    /// Recompute the outputs of a manifest and compare digests
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Write the recomputed outputs here
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "kebab-case")]
pub enum Study {
    /// E sup|W_n| and E sup|T_n| against n
    WnDecay(ExperimentArgs),
    /// Var h_r against Λ(r)
    Variance(ExperimentArgs),
    /// Excess risk of the empirical minimizer against n
    Rate(ExperimentArgs),
    /// Coverage of the fitted moment inequality
    Coverage(ExperimentArgs),
}

impl Study {
    fn args(&self) -> &ExperimentArgs {
        match self {
            Study::WnDecay(a) | Study::Variance(a) | Study::Rate(a) | Study::Coverage(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Study::WnDecay(_) => "wn-decay",
            Study::Variance(_) => "variance",
            Study::Rate(_) => "rate",
            Study::Coverage(_) => "coverage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overrides `base_seed`
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub include_diagonal: bool,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let text = io::read_text(&self.config)?;
        let mut config: ExperimentConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
            context: self.config.display().to_string(),
            source,
        })?;
        if let Some(seed) = self.seed {
            config.base_seed = seed;
        }
        if let Some(reps) = self.reps {
            config.reps = reps;
        }
        if let Some(delta) = self.delta {
            config.delta = delta;
        }
        if let Some(epsilon) = self.epsilon {
            config.epsilon = epsilon;
        }
        config.include_diagonal |= self.include_diagonal;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Record of one run: what was invoked, on which inputs, and what it wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    /// Subcommand name, e.g. `experiment rate`.
    pub command_name: String,
    pub invocation: Command,
    /// Resolved configuration (experiment config after flag overrides, or
    /// the command's own parameters).
    pub config: serde_json::Value,
    pub base_seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

struct Artifact {
    path: PathBuf,
    bytes: Vec<u8>,
}

/// Result of executing a command without touching the file system.
struct Run {
    command_name: String,
    config: serde_json::Value,
    base_seed: Option<u64>,
    inputs: Vec<PathBuf>,
    artifacts: Vec<Artifact>,
    /// Where the manifest goes; `None` prints the single artifact instead.
    manifest: Option<PathBuf>,
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn single(command_name: &str, config: serde_json::Value, inputs: Vec<PathBuf>, out: &Option<PathBuf>, text: String) -> Run {
    Run {
        command_name: command_name.into(),
        config,
        base_seed: None,
        inputs,
        artifacts: vec![Artifact {
            path: out.clone().unwrap_or_default(),
            bytes: text.into_bytes(),
        }],
        manifest: out.as_ref().map(|p| manifest_beside(p)),
    }
}

fn manifest_beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn read_bayes(path: &Option<PathBuf>, truth: &Truth) -> Result<RankingRule> {
    match path {
        Some(p) => read_document(p),
        None => Ok(truth.bayes()),
    }
}

fn json_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable value")
}

fn expectation_oracle<'a>(truth: &'a Truth) -> Result<ExpectationOracle<'a>> {
    truth.expectation_oracle()
}

fn execute(command: &Command, config_echo: Option<&serde_json::Value>) -> Result<Run> {
    match command {
        Command::Sample { oracle, n, seed, out } => {
            let spec: OracleSpec = read_document(oracle)?;
            let truth = Truth::new(&spec)?;
            let sample = truth.sample(*n, *seed)?;
            let mut run = single(
                "sample",
                serde_json::json!({ "oracle": spec, "n": n, "seed": seed }),
                vec![oracle.clone()],
                out,
                io::sample_to_csv(&sample),
            );
            run.base_seed = Some(*seed);
            Ok(run)
        }
        Command::Risk { sample, rule, naive, out } => {
            let s = read_sample_csv(sample)?;
            let r: RankingRule = read_document(rule)?;
            let report = if *naive { empirical_risk_naive(&s, &r)? } else { empirical_risk(&s, &r)? };
            Ok(single(
                "risk",
                serde_json::json!({ "rule": r, "naive": naive }),
                vec![sample.clone(), rule.clone()],
                out,
                to_json(&report),
            ))
        }
        Command::Decompose {
            sample,
            rule,
            oracle,
            bayes,
            table_out,
            out,
        } => {
            let s = read_sample_csv(sample)?;
            let r: RankingRule = read_document(rule)?;
            let spec: OracleSpec = read_document(oracle)?;
            let truth = Truth::new(&spec)?;
            let b = read_bayes(bayes, &truth)?;
            let table = decompose(&s, &r, &b, expectation_oracle(&truth)?)?;
            let mut inputs = vec![sample.clone(), rule.clone(), oracle.clone()];
            inputs.extend(bayes.clone());
            let mut run = single(
                "decompose",
                serde_json::json!({ "rule": r, "bayes": b, "oracle": spec }),
                inputs,
                out,
                to_json(&table.summary()),
            );
            if let Some(path) = table_out {
                if out.is_none() {
                    return Err(Error::InvalidArgument("--table-out requires --out".into()));
                }
                let mut csv = String::from("i,j,hat\n");
                for (i, row) in table.hat.rows().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        csv.push_str(&format!("{i},{j},{v:.16e}\n"));
                    }
                }
                run.artifacts.push(Artifact {
                    path: path.clone(),
                    bytes: csv.into_bytes(),
                });
            }
            Ok(run)
        }
        Command::Complexity {
            sample,
            class,
            oracle,
            bayes,
            reps,
            seed,
            delta,
            include_diagonal,
            replicates_out,
            out,
        } => {
            let s = read_sample_csv(sample)?;
            let spec: ClassSpec = read_document(class)?;
            let rules = spec.enumerate()?;
            let ospec: OracleSpec = read_document(oracle)?;
            let truth = Truth::new(&ospec)?;
            let b = read_bayes(bayes, &truth)?;
            let options = BoundOptions {
                delta: *delta,
                reps: *reps,
                seed: *seed,
                include_diagonal: *include_diagonal,
            };
            let (report, estimates) = bound_report(&s, &rules, &b, expectation_oracle(&truth)?, &options)?;
            let mut inputs = vec![sample.clone(), class.clone(), oracle.clone()];
            inputs.extend(bayes.clone());
            let mut run = single(
                "complexity",
                serde_json::json!({ "class": spec, "oracle": ospec, "bayes": b, "options": options }),
                inputs,
                out,
                to_json(&report),
            );
            run.base_seed = Some(*seed);
            if let Some(path) = replicates_out {
                if out.is_none() {
                    return Err(Error::InvalidArgument("--replicates-out requires --out".into()));
                }
                let mut csv = String::from("replicate,seed,z,u,m\n");
                for (k, t) in estimates.replicates.iter().enumerate() {
                    let sd = crate::rng::replicate_seed(*seed, k as u64);
                    csv.push_str(&format!("{k},{sd},{:.16e},{:.16e},{:.16e}\n", t.z, t.u, t.m));
                }
                run.artifacts.push(Artifact {
                    path: path.clone(),
                    bytes: csv.into_bytes(),
                });
            }
            Ok(run)
        }
        Command::Erm { sample, class, out } => {
            let s = read_sample_csv(sample)?;
            let spec: ClassSpec = read_document(class)?;
            let result = match spec.threshold_grid() {
                Some(grid) if s.dim() == 1 => erm_threshold_scan(&s, grid)?,
                _ => erm_exhaustive(&s, &spec.enumerate()?)?,
            };
            Ok(single(
                "erm",
                serde_json::json!({ "class": spec }),
                vec![sample.clone(), class.clone()],
                out,
                to_json(&result),
            ))
        }
        Command::Experiment(study) => {
            let args = study.args();
            let config = match config_echo {
                Some(v) => serde_json::from_value(v.clone()).map_err(|source| Error::Json {
                    context: "manifest config".into(),
                    source,
                })?,
                None => args.resolve()?,
            };
            let files = run_study(study, &config)?;
            Ok(Run {
                command_name: format!("experiment {}", study.name()),
                config: json_value(&config),
                base_seed: Some(config.base_seed),
                inputs: if config_echo.is_some() { Vec::new() } else { vec![args.config.clone()] },
                artifacts: files
                    .into_iter()
                    .map(|(name, text)| Artifact {
                        path: args.out_dir.join(name),
                        bytes: text.into_bytes(),
                    })
                    .collect(),
                manifest: Some(args.out_dir.join("manifest.json")),
            })
        }
        Command::Replay { .. } => Err(Error::InvalidArgument("replay cannot be nested".into())),
    }
}

fn run_study(study: &Study, config: &ExperimentConfig) -> Result<Vec<(&'static str, String)>> {
    Ok(match study {
        Study::WnDecay(_) => {
            let r = experiments::wn_decay_study(config)?;
            vec![
                ("cells.csv", r.cells_csv()),
                ("summary.csv", r.summary_csv()),
                ("plot.dat", r.plot_data()),
                ("result.json", to_json(&r)),
            ]
        }
        Study::Variance(_) => {
            let r = experiments::variance_study_from_config(config)?;
            vec![
                ("rules.csv", r.rules_csv()),
                ("summary.csv", r.summary_csv()),
                ("plot.dat", r.plot_data()),
                ("result.json", to_json(&r)),
            ]
        }
        Study::Rate(_) => {
            let r = experiments::excess_risk_rate_study(config)?;
            vec![
                ("cells.csv", r.cells_csv()),
                ("summary.csv", r.summary_csv()),
                ("plot.dat", r.plot_data()),
                ("result.json", to_json(&r)),
            ]
        }
        Study::Coverage(_) => {
            let r = experiments::coverage_study(config)?;
            vec![
                ("cells.csv", r.cells_csv()),
                ("summary.csv", r.summary_csv()),
                ("plot.dat", r.plot_data()),
                ("result.json", to_json(&r)),
            ]
        }
    })
}

fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
            Ok(FileDigest {
                path: absolute(p),
                sha256: sha256(&bytes),
            })
        })
        .collect()
}

fn command_absolute(command: &Command) -> Command {
    let abs = |p: &PathBuf| absolute(p);
    let abs_opt = |p: &Option<PathBuf>| p.as_ref().map(|p| absolute(p));
    let mut c = command.clone();
    match &mut c {
        Command::Sample { oracle, out, .. } => {
            *oracle = abs(oracle);
            *out = abs_opt(out);
        }
        Command::Risk { sample, rule, out, .. } => {
            *sample = abs(sample);
            *rule = abs(rule);
            *out = abs_opt(out);
        }
        Command::Decompose {
            sample,
            rule,
            oracle,
            bayes,
            table_out,
            out,
        } => {
            *sample = abs(sample);
            *rule = abs(rule);
            *oracle = abs(oracle);
            *bayes = abs_opt(bayes);
            *table_out = abs_opt(table_out);
            *out = abs_opt(out);
        }
        Command::Complexity {
            sample,
            class,
            oracle,
            bayes,
            replicates_out,
            out,
            ..
        } => {
            *sample = abs(sample);
            *class = abs(class);
            *oracle = abs(oracle);
            *bayes = abs_opt(bayes);
            *replicates_out = abs_opt(replicates_out);
            *out = abs_opt(out);
        }
        Command::Erm { sample, class, out } => {
            *sample = abs(sample);
            *class = abs(class);
            *out = abs_opt(out);
        }
        Command::Experiment(study) => {
            let a = match study {
                Study::WnDecay(a) | Study::Variance(a) | Study::Rate(a) | Study::Coverage(a) => a,
            };
            a.config = abs(&a.config);
            a.out_dir = abs(&a.out_dir);
        }
        Command::Replay { manifest, out_dir } => {
            *manifest = abs(manifest);
            *out_dir = abs_opt(out_dir);
        }
    }
    c
}

fn write_run(command: &Command, run: Run) -> Result<()> {
    let Some(manifest_path) = run.manifest else {
        let text = String::from_utf8(run.artifacts.into_iter().next().expect("one artifact").bytes)
            .expect("utf-8 output");
        print!("{text}");
        return Ok(());
    };
    let mut outputs = Vec::with_capacity(run.artifacts.len());
    for a in &run.artifacts {
        io::write_bytes(&a.path, &a.bytes)?;
        outputs.push(FileDigest {
            path: absolute(&a.path),
            sha256: sha256(&a.bytes),
        });
    }
    let manifest = RunManifest {
        schema_version: io::SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.into(),
        command_name: run.command_name,
        invocation: command_absolute(command),
        config: run.config,
        base_seed: run.base_seed,
        inputs: digests(&run.inputs)?,
        outputs,
    };
    io::write_bytes(&manifest_path, to_json(&manifest).as_bytes())?;
    eprintln!("wrote {} file(s); manifest {}", manifest.outputs.len(), manifest_path.display());
    Ok(())
}

/// Outcome of [`replay`]: `(path, expected, actual)` for each mismatch.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub checked: usize,
    pub mismatches: Vec<(PathBuf, String, String)>,
}

/// Recomputes every output of a manifest in memory. Non-experiment commands
/// re-read their inputs, which must still match their recorded digests.
/// When `out_dir` is given the recomputed files are written there under
/// their original file names.
pub fn replay(manifest_path: &Path, out_dir: Option<&Path>) -> Result<ReplayReport> {
    let manifest: RunManifest = serde_json::from_str(&io::read_text(manifest_path)?).map_err(|source| Error::Json {
        context: manifest_path.display().to_string(),
        source,
    })?;
    for input in &manifest.inputs {
        let now = digests(std::slice::from_ref(&input.path))?;
        if now[0].sha256 != input.sha256 {
            return Err(Error::InvalidArgument(format!(
                "input {} changed since the run (digest mismatch)",
                input.path.display()
            )));
        }
    }
    let echo = matches!(manifest.invocation, Command::Experiment(_)).then_some(&manifest.config);
    let run = execute(&manifest.invocation, echo)?;
    if run.artifacts.len() != manifest.outputs.len() {
        return Err(Error::InvalidArgument(format!(
            "replay produced {} outputs, manifest lists {}",
            run.artifacts.len(),
            manifest.outputs.len()
        )));
    }
    let mut mismatches = Vec::new();
    for (a, recorded) in run.artifacts.iter().zip(&manifest.outputs) {
        let actual = sha256(&a.bytes);
        if actual != recorded.sha256 {
            mismatches.push((recorded.path.clone(), recorded.sha256.clone(), actual));
        }
        if let Some(dir) = out_dir {
            let name = recorded.path.file_name().unwrap_or_default();
            io::write_bytes(&dir.join(name), &a.bytes)?;
        }
    }
    Ok(ReplayReport {
        checked: manifest.outputs.len(),
        mismatches,
    })
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Replay { manifest, out_dir } => {
            let report = replay(manifest, out_dir.as_deref())?;
            for (path, want, got) in &report.mismatches {
                eprintln!("mismatch: {} expected {want} got {got}", path.display());
            }
            if report.mismatches.is_empty() {
                eprintln!("replay ok: {} output(s) reproduced", report.checked);
                Ok(0)
            } else {
                Ok(1)
            }
        }
        command => {
            let run = execute(command, None)?;
            write_run(command, run)?;
            Ok(0)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or("error").to_string();
            eprintln!("{first} (see --help)");
            return 1;
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::InvalidArgument(format!("cannot start {t} threads: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}
