use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use digit_forensics::harness::{
    render, run_validation, scan_corpus, NoiseSpec, SignPolicy, SyntheticCorpus, ValidationConfig,
    DEFAULT_LEVELS, DEFAULT_THRESHOLD,
};
use digit_forensics::ingest::{
    compute_stats, load_csv, load_report, CsvOptions, DatasetMatrix, DEFAULT_PAIR_CAP,
};
use digit_forensics::reference::{
    DEFAULT_CALIBRATION_SAMPLES, DEFAULT_MC_DRAWS, DEFAULT_NULL_RESAMPLES,
};
use digit_forensics::rng::{derive_seed, tag};
use digit_forensics::scoring::DEFAULT_MIN_SAMPLES;
use digit_forensics::{
    flag, AggregateOutcome, Error, OperatorKind, ReferenceCache, Scorer, ScorerConfig, DEFAULT_SEED,
};

const CACHE_ENV: &str = "DIGIT_FORENSICS_CACHE";
const DEFAULT_CACHE: &str = "digit-forensics-cache.json";

/// Leading-digit forensics for reported statistics.
///
/// Exit codes: 0 success, 2 invalid arguments or malformed input,
/// 3 reference generation failure, 4 scored and flagged at --flag-level,
/// 5 insufficient data.
#[derive(Parser, Debug)]
#[command(name = "digit-forensics", version)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Reference cache file. The DIGIT_FORENSICS_CACHE environment variable
    /// takes precedence when set.
    #[arg(long, global = true, default_value = DEFAULT_CACHE)]
    cache: PathBuf,

    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Synthetic vectors drawn per reference distribution.
    #[arg(long, global = true, default_value_t = DEFAULT_MC_DRAWS)]
    mc_draws: usize,

    /// Null samples used to calibrate the floor of each reference.
    #[arg(long, global = true, default_value_t = DEFAULT_CALIBRATION_SAMPLES)]
    calibration_samples: usize,

    /// Monte-Carlo resamples behind each KS p-value.
    #[arg(long, global = true, default_value_t = DEFAULT_NULL_RESAMPLES)]
    resamples: usize,

    /// Fewest usable leading digits an operator group needs to be scored.
    #[arg(long, global = true, default_value_t = DEFAULT_MIN_SAMPLES)]
    min_samples: usize,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Sign {
    Symmetric,
    Positive,
    Negative,
}

impl From<Sign> for SignPolicy {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Symmetric => SignPolicy::Symmetric,
            Sign::Positive => SignPolicy::Positive,
            Sign::Negative => SignPolicy::Negative,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate, calibrate and cache one reference distribution.
    GenRef {
        /// Operator: mean, std or ols_slope.
        #[arg(long, value_parser = parse_operator)]
        operator: OperatorKind,

        /// Entries per synthetic vector (the sample size behind each statistic).
        #[arg(long)]
        n: usize,

        /// Number of reported statistics the reference will be tested with.
        #[arg(long, default_value_t = 20)]
        obs_len: usize,

        /// Synthetic vectors to draw; overrides --mc-draws.
        #[arg(long)]
        draws: Option<usize>,
    },

    /// Score the statistics computed from a CSV dataset.
    ScoreDataset {
        csv: PathBuf,

        #[command(flatten)]
        csv_opts: CsvArgs,

        /// Most feature pairs used for slopes; larger sets are subsampled.
        #[arg(long, default_value_t = DEFAULT_PAIR_CAP)]
        pair_cap: usize,

        /// Exit with code 4 when the overall score reaches this level.
        #[arg(long)]
        flag_level: Option<f64>,
    },

    /// Score statistics transcribed from a manuscript (JSON report).
    ScoreStats {
        report: PathBuf,

        /// Entries behind each statistic; defaults to the report's "n"
        /// metadata, then 100.
        #[arg(long)]
        n: Option<usize>,

        /// Exit with code 4 when the overall score reaches this level.
        #[arg(long)]
        flag_level: Option<f64>,
    },

    /// Noise-injection validation over a dataset directory or a synthetic corpus.
    #[command(group(ArgGroup::new("source").required(true).args(["datasets", "synthetic"])))]
    Validate {
        /// Directory of CSV datasets (read in file-name order).
        datasets: Option<PathBuf>,

        /// Use N generated datasets instead of a directory.
        #[arg(long)]
        synthetic: Option<usize>,

        #[command(flatten)]
        csv_opts: CsvArgs,

        /// Smallest noise magnitude, as a fraction of the group mean.
        #[arg(long, default_value_t = 0.01)]
        noise_min: f64,

        /// Largest noise magnitude, as a fraction of the group mean.
        #[arg(long, default_value_t = 0.10)]
        noise_max: f64,

        #[arg(long, value_enum, default_value_t = Sign::Symmetric)]
        noise_sign: Sign,

        /// Overall score at or above which a dataset is called manipulated.
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,

        #[arg(long, default_value_t = DEFAULT_PAIR_CAP)]
        pair_cap: usize,

        /// Write the result here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },

    /// Score a directory of JSON reports and count flags per confidence level.
    ScanCorpus {
        /// Directory of report files (*.json, read in file-name order).
        reports: PathBuf,

        /// Strictly increasing confidence levels in (0, 1).
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LEVELS)]
        levels: Vec<f64>,

        /// Write the result here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct CsvArgs {
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,

    /// Decimal separator inside numbers.
    #[arg(long, default_value_t = '.')]
    decimal: char,

    /// The first row is data, not column labels.
    #[arg(long)]
    no_header: bool,
}

impl CsvArgs {
    fn options(&self) -> Result<CsvOptions, Failure> {
        let delimiter = u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| {
                Failure::usage(format!(
                    "delimiter {:?} must be a single ASCII character",
                    self.delimiter
                ))
            })?;
        Ok(CsvOptions {
            delimiter,
            header: !self.no_header,
            decimal_separator: self.decimal,
        })
    }
}

fn parse_operator(s: &str) -> Result<OperatorKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::TooManySkips { .. }
            | Error::CorruptCache { .. }
            | Error::UncalibratedReference(_) => 3,
            Error::NoUsableOutcomes(_) => 5,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

enum Outcome {
    Done,
    Flagged,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged) => ExitCode::from(4),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cache_path(global: &Global) -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| global.cache.clone())
}

fn scorer(global: &Global, mc_draws: usize) -> Result<Scorer, Failure> {
    let path = cache_path(global);
    info!("reference cache {}", path.display());
    let config = ScorerConfig {
        seed: global.seed,
        mc_draws,
        calibration_samples: global.calibration_samples,
        resamples: global.resamples,
        min_samples: global.min_samples,
        ..ScorerConfig::default()
    };
    Ok(Scorer::new(config, ReferenceCache::open(path)?))
}

fn check_level(level: Option<f64>) -> Result<(), Failure> {
    match level {
        Some(l) if !(l > 0.0 && l < 1.0) => Err(Failure::usage(format!(
            "--flag-level must lie in (0, 1), got {l}"
        ))),
        _ => Ok(()),
    }
}

fn emit<T: Serialize>(
    value: &T,
    text: impl FnOnce() -> String,
    format: Format,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let body = match format {
        Format::Json => serde_json::to_string_pretty(value).map_err(Error::from)? + "\n",
        Format::Text => text(),
    };
    match output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(Error::from)?;
            }
            fs::write(path, body).map_err(Error::from)?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn finish_scoring(
    outcome: &AggregateOutcome,
    global: &Global,
    flag_level: Option<f64>,
) -> Result<Outcome, Failure> {
    emit(
        outcome,
        || render::outcome_table(outcome),
        global.format,
        None,
    )?;
    Ok(match flag_level {
        Some(level) if flag(outcome.overall, level) => Outcome::Flagged,
        _ => Outcome::Done,
    })
}

fn files_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case(ext)))
        .collect();
    files.sort();
    Ok(files)
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let global = &cli.global;
    match cli.command {
        Command::GenRef {
            operator,
            n,
            obs_len,
            draws,
        } => {
            if n == 0 || obs_len == 0 {
                return Err(Failure::usage("--n and --obs-len must be positive"));
            }
            let scorer = scorer(global, draws.unwrap_or(global.mc_draws))?;
            let reference = scorer
                .reference(operator, n, obs_len)
                .map_err(|e| match e {
                    Error::InvalidConfig(_) => Failure::from(e),
                    other => Failure {
                        code: 3,
                        message: other.to_string(),
                    },
                })?;
            let text = || {
                let mut s = format!(
                    "{}\n",
                    reference.key().map(|k| k.to_string()).unwrap_or_default()
                );
                for (d, p) in reference.pmf.probs().iter().enumerate() {
                    let _ = writeln!(s, "{}  {p:.6}", d + 1);
                }
                let _ = writeln!(s, "floor {:.6}", reference.calibration_floor.unwrap_or(0.0));
                s
            };
            emit(&reference, text, global.format, None)?;
            Ok(Outcome::Done)
        }

        Command::ScoreDataset {
            csv,
            csv_opts,
            pair_cap,
            flag_level,
        } => {
            check_level(flag_level)?;
            let data: DatasetMatrix<f64> = load_csv(&csv, &csv_opts.options()?)?;
            let stats = compute_stats(
                &data,
                pair_cap,
                derive_seed(global.seed, &[tag("pairs"), 0]),
            )?;
            let outcome = scorer(global, global.mc_draws)?.score_stats(&stats)?;
            finish_scoring(&outcome, global, flag_level)
        }

        Command::ScoreStats {
            report,
            n,
            flag_level,
        } => {
            check_level(flag_level)?;
            let report = load_report(&report)?;
            let scorer = scorer(global, global.mc_draws)?;
            let outcome = match n {
                Some(n) if n > 0 => scorer
                    .score_groups(report.groups.iter().map(|(op, v)| (*op, v.as_slice())), n)?,
                Some(_) => return Err(Failure::usage("--n must be positive")),
                None => scorer.score_report(&report)?,
            };
            finish_scoring(&outcome, global, flag_level)
        }

        Command::Validate {
            datasets,
            synthetic,
            csv_opts,
            noise_min,
            noise_max,
            noise_sign,
            threshold,
            pair_cap,
            output,
        } => {
            let corpus: Vec<DatasetMatrix<f64>> = match (synthetic, datasets) {
                (Some(count), _) => {
                    if count < 2 || !count.is_multiple_of(2) {
                        return Err(Failure::usage(format!(
                            "validation needs an even number of datasets (at least 2), got {count}"
                        )));
                    }
                    SyntheticCorpus::new(count, derive_seed(global.seed, &[tag("corpus")]))
                        .generate()?
                }
                (None, Some(dir)) => {
                    let opts = csv_opts.options()?;
                    files_with_extension(&dir, "csv")?
                        .iter()
                        .map(|p| {
                            load_csv(p, &opts).map_err(|e| Failure {
                                message: format!("{}: {e}", p.display()),
                                ..Failure::from(e)
                            })
                        })
                        .collect::<Result<_, _>>()?
                }
                (None, None) => unreachable!("clap requires a dataset source"),
            };
            let config = ValidationConfig {
                noise: NoiseSpec {
                    min_fraction: noise_min,
                    max_fraction: noise_max,
                    seed: global.seed,
                    sign: noise_sign.into(),
                },
                threshold,
                seed: global.seed,
                pair_cap,
            };
            let result = run_validation(&corpus, &config, &scorer(global, global.mc_draws)?)?;
            emit(
                &result,
                || render::validation_table(&result),
                global.format,
                output.as_deref(),
            )?;
            Ok(Outcome::Done)
        }

        Command::ScanCorpus {
            reports,
            levels,
            output,
        } => {
            let reports = files_with_extension(&reports, "json")?
                .iter()
                .map(|p| {
                    load_report(p).map_err(|e| Failure {
                        message: format!("{}: {e}", p.display()),
                        ..Failure::from(e)
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if reports.is_empty() {
                return Err(Failure::usage("no *.json reports found"));
            }
            let scan = scan_corpus(&reports, &levels, &scorer(global, global.mc_draws)?)?;
            emit(
                &scan,
                || render::flag_table(&scan),
                global.format,
                output.as_deref(),
            )?;
            Ok(Outcome::Done)
        }
    }
}
