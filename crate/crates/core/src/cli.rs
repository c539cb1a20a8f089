//! `textsql` command line: preprocess, label-columns, mask, fill,
//! export-filler and evaluate. Every artifact is JSON lines.
//!
//! Exit codes: 0 success, 1 usage, 2 input/format, 3 availability (a
//! database or input file that does not exist), 4 internal.

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{load_examples, load_schemas, open_database, Database, DbSchema, Example};
use crate::error::Error;
use crate::evaluator::{evaluate_corpus, EvalSettings, Metric, Prediction};
use crate::preprocess::{build_model_input, derive_column_labels, segment_question, tokenize};
use crate::sql::{mask_values, parse_sql, print_sql};
use crate::value_filler::{build_candidates, fill_heuristic, filler_example, Fill, FillerConfig};

/// Environment variable naming a Spider-style dataset root holding
/// `tables.json`, `dev.json` and `database/`.
pub const DATA_ENV: &str = "TEXTSQL_DATA";

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const DATABASE: i32 = 3;
    pub const INTERNAL: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(
    name = "textsql",
    version,
    about = "Value filling and evaluation for text-to-SQL parsers"
)]
struct Cli {
    /// Worker threads for per-example stages.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Dataset {
    /// Spider `tables.json`.
    #[arg(long)]
    tables: Option<PathBuf>,
    /// Examples file (JSON array with question, query, db_id).
    #[arg(long, visible_alias = "gold")]
    examples: Option<PathBuf>,
    /// Database root holding `<db_id>/<db_id>.sqlite`.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Ignore databases even when a root is configured.
    #[arg(long, conflicts_with = "db")]
    no_db: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Setting {
    NoCellValues,
    WithCellValues,
}

#[derive(Debug, Args)]
struct FillerArgs {
    /// Minimum similarity (0-100) for retrieved cell values.
    #[arg(long, default_value_t = crate::value_filler::DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Send every question token to retrieval.
    #[arg(long)]
    no_skip_stopwords: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Export model inputs: segments, enhanced columns, annotations, labels.
    Preprocess {
        #[command(flatten)]
        data: Dataset,
        #[arg(long, value_enum, default_value = "no-cell-values")]
        setting: Setting,
        #[arg(long)]
        out: PathBuf,
        /// Skip examples whose gold SQL does not parse instead of failing.
        #[arg(long)]
        skip_invalid: bool,
    },
    /// Export per-column selection labels from gold SQL.
    LabelColumns {
        #[command(flatten)]
        data: Dataset,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        skip_invalid: bool,
    },
    /// Write gold SQL with every value replaced by `<mask>`.
    Mask {
        #[command(flatten)]
        data: Dataset,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        skip_invalid: bool,
    },
    /// Fill `<mask>` slots of predicted SQL with the heuristic filler.
    Fill {
        #[command(flatten)]
        data: Dataset,
        #[command(flatten)]
        filler: FillerArgs,
        /// Predictions with `<mask>` slots, one {db_id, sql} per line.
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export question, masked SQL and candidates for a neural filler.
    ExportFiller {
        #[command(flatten)]
        data: Dataset,
        #[command(flatten)]
        filler: FillerArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions by exact set match and/or execution.
    Evaluate {
        #[command(flatten)]
        data: Dataset,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        metric: Metric,
        /// Per-query execution timeout in seconds.
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
        /// Also write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Bad flag combinations or values that clap cannot express.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return exit::USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Unavailable(_)) => exit::DATABASE,
        Some(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => {
            exit::DATABASE
        }
        Some(
            Error::Io { .. }
            | Error::Format { .. }
            | Error::Validation { .. }
            | Error::UnknownDatabase { .. }
            | Error::Grammar { .. }
            | Error::Binding(_)
            | Error::Corpus { .. },
        ) => exit::INPUT,
        _ => exit::INTERNAL,
    }
}

fn category(code: i32) -> &'static str {
    match code {
        exit::USAGE => "usage error",
        exit::INPUT => "input error",
        exit::DATABASE => "unavailable",
        _ => "internal error",
    }
}

type CliResult<T> = anyhow::Result<T>;

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr, summaries to stdout.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            exit::OK
        }
        Err(err) => {
            let code = exit_code(&err);
            eprintln!("textsql: {}: {err:#}", category(code));
            code
        }
    }
}

struct Loaded {
    schemas: BTreeMap<String, DbSchema>,
    examples: Vec<Example>,
    db_root: Option<PathBuf>,
}

fn data_root() -> Option<PathBuf> {
    std::env::var_os(DATA_ENV).map(PathBuf::from)
}

fn load(data: &Dataset) -> CliResult<Loaded> {
    let root = data_root();
    let pick = |given: &Option<PathBuf>, default: &str, what: &str| -> CliResult<PathBuf> {
        given
            .clone()
            .or_else(|| root.as_ref().map(|r| r.join(default)))
            .ok_or_else(|| usage(format!("--{what} is required (or set {DATA_ENV})")))
    };
    let tables = pick(&data.tables, "tables.json", "tables")?;
    let examples_path = pick(&data.examples, "dev.json", "examples")?;
    let schemas = load_schemas(&tables)?;
    let examples = load_examples(&examples_path, &schemas)?;
    let db_root = if data.no_db {
        None
    } else {
        data.db.clone().or_else(|| root.map(|r| r.join("database")))
    };
    Ok(Loaded {
        schemas,
        examples,
        db_root,
    })
}

fn write_lines<T: Serialize>(path: &Path, records: &[T]) -> CliResult<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).map_err(|e| Error::format(None, e.to_string()))?);
        text.push('\n');
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a `{db_id, sql}` JSON-lines file.
pub fn read_predictions(path: &Path) -> crate::Result<Vec<Prediction>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| {
                Error::format(format!("{} line {}", path.display(), i + 1), e.to_string())
            })
        })
        .collect()
}

/// Maps `f` over `0..n`, in order, on `jobs` workers. Each worker keeps its
/// own cache of database handles.
fn par_map<T, F>(jobs: usize, n: usize, f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(&mut DbCache, usize) -> CliResult<T> + Sync,
{
    if jobs <= 1 {
        let mut cache = DbCache::default();
        return (0..n).map(|i| f(&mut cache, i)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| usage(format!("--jobs: {e}")))?;
    pool.install(|| {
        (0..n)
            .into_par_iter()
            .map_init(DbCache::default, |cache, i| f(cache, i))
            .collect()
    })
}

#[derive(Default)]
struct DbCache {
    handles: HashMap<String, Option<Database>>,
}

impl DbCache {
    /// Handle for `schema`, `None` when there is no root. With `required`,
    /// a missing file is an error; otherwise it degrades to `None`.
    fn get(
        &mut self,
        schema: &DbSchema,
        root: Option<&Path>,
        required: bool,
    ) -> CliResult<Option<&Database>> {
        let Some(root) = root else {
            return Ok(None);
        };
        if !self.handles.contains_key(&schema.db_id) {
            let handle = match open_database(schema, root) {
                Ok(db) => Some(db),
                Err(e) if required => return Err(e.into()),
                Err(e) => {
                    log::warn!("{e}; continuing without cell values");
                    None
                }
            };
            self.handles.insert(schema.db_id.clone(), handle);
        }
        Ok(self.handles[&schema.db_id].as_ref())
    }
}

fn filler_config(args: &FillerArgs) -> CliResult<FillerConfig> {
    if !(0.0..=100.0).contains(&args.threshold) {
        return Err(usage(format!(
            "--threshold must be within [0, 100], got {}",
            args.threshold
        )));
    }
    Ok(FillerConfig {
        threshold: args.threshold,
        skip_stopwords: !args.no_skip_stopwords,
    })
}

#[derive(Serialize)]
struct LabelRecord<'a> {
    db_id: &'a str,
    column_labels: Vec<u8>,
}

#[derive(Serialize)]
struct FilledRecord {
    db_id: String,
    sql: String,
    fills: Vec<Fill>,
}

fn gold_or_skip<T>(
    parsed: crate::Result<T>,
    index: usize,
    skip_invalid: bool,
) -> CliResult<Option<T>> {
    match parsed {
        Ok(v) => Ok(Some(v)),
        Err(e) if skip_invalid => {
            log::warn!("example {index}: skipped: {e}");
            Ok(None)
        }
        Err(e) => Err(Error::format(format!("example {index}"), e.to_string()).into()),
    }
}

fn execute(cli: Cli) -> CliResult<String> {
    let jobs = cli.jobs.max(1);
    match cli.command {
        Command::Preprocess {
            data,
            setting,
            out,
            skip_invalid,
        } => {
            let loaded = load(&data)?;
            let with_cells = setting == Setting::WithCellValues;
            if with_cells && loaded.db_root.is_none() {
                return Err(usage(
                    "--setting with-cell-values requires --db".to_string(),
                ));
            }
            let records = par_map(jobs, loaded.examples.len(), |cache, i| {
                let ex = &loaded.examples[i];
                let schema = &loaded.schemas[&ex.db_id];
                let Some(gold) = gold_or_skip(parse_sql(&ex.gold_sql, schema), i, skip_invalid)?
                else {
                    return Ok(None);
                };
                let db = if with_cells {
                    cache.get(schema, loaded.db_root.as_deref(), true)?
                } else {
                    None
                };
                Ok(Some(build_model_input(
                    &ex.question,
                    schema,
                    db,
                    Some(&gold),
                )?))
            })?;
            let records: Vec<_> = records.into_iter().flatten().collect();
            write_lines(&out, &records)?;
            Ok(format!(
                "preprocess: wrote {} of {} examples to {}",
                records.len(),
                loaded.examples.len(),
                out.display()
            ))
        }

        Command::LabelColumns {
            data,
            out,
            skip_invalid,
        } => {
            let loaded = load(&data)?;
            let mut records = Vec::new();
            for (i, ex) in loaded.examples.iter().enumerate() {
                let schema = &loaded.schemas[&ex.db_id];
                if let Some(gold) = gold_or_skip(parse_sql(&ex.gold_sql, schema), i, skip_invalid)?
                {
                    records.push(LabelRecord {
                        db_id: &ex.db_id,
                        column_labels: derive_column_labels(&gold, schema).labels,
                    });
                }
            }
            write_lines(&out, &records)?;
            Ok(format!(
                "label-columns: wrote {} records to {}",
                records.len(),
                out.display()
            ))
        }

        Command::Mask {
            data,
            out,
            skip_invalid,
        } => {
            let loaded = load(&data)?;
            let mut records = Vec::new();
            for (i, ex) in loaded.examples.iter().enumerate() {
                let schema = &loaded.schemas[&ex.db_id];
                if let Some(gold) = gold_or_skip(parse_sql(&ex.gold_sql, schema), i, skip_invalid)?
                {
                    records.push(Prediction {
                        db_id: ex.db_id.clone(),
                        sql: print_sql(&mask_values(&gold)),
                    });
                }
            }
            write_lines(&out, &records)?;
            Ok(format!(
                "mask: wrote {} queries to {}",
                records.len(),
                out.display()
            ))
        }

        Command::Fill {
            data,
            filler,
            pred,
            out,
        } => {
            let config = filler_config(&filler)?;
            let loaded = load(&data)?;
            let preds = read_predictions(&pred)?;
            if preds.len() != loaded.examples.len() {
                return Err(Error::format(
                    pred.display().to_string(),
                    format!(
                        "{} predictions for {} examples",
                        preds.len(),
                        loaded.examples.len()
                    ),
                )
                .into());
            }
            let records = par_map(jobs, preds.len(), |cache, i| {
                let (p, ex) = (&preds[i], &loaded.examples[i]);
                if p.db_id != ex.db_id {
                    return Err(Error::format(
                        format!("{} line {}", pred.display(), i + 1),
                        format!("db_id `{}` but example uses `{}`", p.db_id, ex.db_id),
                    )
                    .into());
                }
                let schema = &loaded.schemas[&ex.db_id];
                let masked = match parse_sql(&p.sql, schema) {
                    Ok(q) => q,
                    Err(e) => {
                        log::warn!("prediction {i} left unfilled: {e}");
                        return Ok(FilledRecord {
                            db_id: p.db_id.clone(),
                            sql: p.sql.clone(),
                            fills: Vec::new(),
                        });
                    }
                };
                let db = cache.get(schema, loaded.db_root.as_deref(), false)?;
                let pq = segment_question(&tokenize(&ex.question), schema);
                let cands = build_candidates(&pq, db, schema, &config);
                let result = fill_heuristic(&masked, &cands, schema)?;
                Ok(FilledRecord {
                    db_id: p.db_id.clone(),
                    sql: result.sql,
                    fills: result.fills,
                })
            })?;
            write_lines(&out, &records)?;
            Ok(format!(
                "fill: wrote {} queries to {}",
                records.len(),
                out.display()
            ))
        }

        Command::ExportFiller { data, filler, out } => {
            let config = filler_config(&filler)?;
            let loaded = load(&data)?;
            let records = par_map(jobs, loaded.examples.len(), |cache, i| {
                let ex = &loaded.examples[i];
                let schema = &loaded.schemas[&ex.db_id];
                let db = cache.get(schema, loaded.db_root.as_deref(), false)?;
                match filler_example(ex, schema, db, &config) {
                    Ok(r) => Ok(Some(r)),
                    Err(e) => {
                        log::warn!("example {i}: skipped, gold SQL unusable: {e}");
                        Ok(None)
                    }
                }
            })?;
            let skipped = records.iter().filter(|r| r.is_none()).count();
            let records: Vec<_> = records.into_iter().flatten().collect();
            write_lines(&out, &records)?;
            Ok(format!(
                "export-filler: wrote {} records to {} ({skipped} skipped)",
                records.len(),
                out.display()
            ))
        }

        Command::Evaluate {
            data,
            pred,
            metric,
            timeout,
            json,
        } => {
            if !(timeout > 0.0 && timeout.is_finite()) {
                return Err(usage(format!("--timeout must be positive, got {timeout}")));
            }
            let loaded = load(&data)?;
            let preds = read_predictions(&pred)?;
            let settings = EvalSettings {
                metric,
                timeout: Duration::from_secs_f64(timeout),
                jobs,
            };
            let report = evaluate_corpus(
                &preds,
                &loaded.examples,
                &loaded.schemas,
                loaded.db_root.as_deref(),
                &settings,
            )?;
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::format(None, e.to_string()))?;
                fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
            }
            Ok(report.render_table())
        }
    }
}
