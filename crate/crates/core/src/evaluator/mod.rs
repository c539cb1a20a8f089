//! Exact set match, execution match, hardness breakdown and reports.

mod exact;
mod exec;
mod hardness;

pub use exact::{exact_set_match, mismatched_components};
pub use exec::{
    cells_equal, execution_match, execution_verdict, has_top_level_order_by, results_match,
    ExecVerdict, DEFAULT_TIMEOUT,
};
pub use hardness::{classify_hardness, component_counts, ComponentCounts, Hardness};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{database_path, open_database, Database, DbSchema, Example};
use crate::error::{Error, Result};
use crate::sql::parse_sql;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Exact,
    Exec,
    Both,
}

impl Metric {
    pub fn exact(self) -> bool {
        matches!(self, Metric::Exact | Metric::Both)
    }

    pub fn exec(self) -> bool {
        matches!(self, Metric::Exec | Metric::Both)
    }
}

#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub metric: Metric,
    pub timeout: Duration,
    pub jobs: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            metric: Metric::Both,
            timeout: DEFAULT_TIMEOUT,
            jobs: 1,
        }
    }
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub db_id: String,
    pub sql: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub index: usize,
    pub db_id: String,
    pub hardness: Hardness,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_match: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exec_match: Option<bool>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub exec_timed_out: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatched: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelAccuracy {
    pub level: String,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exec: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub metric: Metric,
    pub examples: Vec<Verdict>,
    /// Easy, medium, hard, extra, then all.
    pub levels: Vec<LevelAccuracy>,
}

fn mean(values: impl Iterator<Item = bool>) -> Option<f64> {
    let (hits, n) = values.fold((0usize, 0usize), |(h, n), v| (h + v as usize, n + 1));
    (n > 0).then(|| hits as f64 / n as f64)
}

impl EvalReport {
    pub fn from_verdicts(metric: Metric, examples: Vec<Verdict>) -> Self {
        let level = |name: &str, filter: &dyn Fn(&Verdict) -> bool| {
            let picked: Vec<&Verdict> = examples.iter().filter(|v| filter(v)).collect();
            LevelAccuracy {
                level: name.to_string(),
                count: picked.len(),
                exact: mean(picked.iter().filter_map(|v| v.exact_match)),
                exec: mean(picked.iter().filter_map(|v| v.exec_match)),
            }
        };
        let mut levels: Vec<LevelAccuracy> = Hardness::ALL
            .iter()
            .map(|&h| level(h.label(), &|v: &Verdict| v.hardness == h))
            .collect();
        levels.push(level("all", &|_| true));
        EvalReport {
            metric,
            examples,
            levels,
        }
    }

    pub fn overall(&self) -> &LevelAccuracy {
        self.levels.last().expect("report has an `all` row")
    }

    /// Levels-by-metrics table: one column per hardness plus "All", one row
    /// per metric, accuracies in percent.
    pub fn render_table(&self) -> String {
        let headers = ["Easy", "Medium", "Hard", "Extra Hard", "All"];
        let mut out = String::new();
        let _ = write!(out, "{:<22}", "");
        for h in headers {
            let _ = write!(out, "{h:>12}");
        }
        out.push('\n');
        let _ = write!(out, "{:<22}", "count");
        for l in &self.levels {
            let _ = write!(out, "{:>12}", l.count);
        }
        out.push('\n');
        let mut row = |name: &str, pick: &dyn Fn(&LevelAccuracy) -> Option<f64>| {
            let _ = write!(out, "{name:<22}");
            for l in &self.levels {
                match pick(l) {
                    Some(acc) => {
                        let _ = write!(out, "{:>12.1}", acc * 100.0);
                    }
                    None => {
                        let _ = write!(out, "{:>12}", "-");
                    }
                }
            }
            out.push('\n');
        };
        if self.metric.exact() {
            row("exact set match", &|l| l.exact);
        }
        if self.metric.exec() {
            row("execution", &|l| l.exec);
        }
        out
    }
}

fn evaluate_one(
    index: usize,
    pred: &Prediction,
    example: &Example,
    schema: &DbSchema,
    db: Option<&Database>,
    settings: &EvalSettings,
) -> Result<Verdict> {
    let gold = parse_sql(&example.gold_sql, schema)
        .map_err(|e| Error::format(format!("gold query {index}"), e.to_string()))?;
    let hardness = classify_hardness(&gold);

    let mut mismatched = Vec::new();
    let exact_match = settings
        .metric
        .exact()
        .then(|| match parse_sql(&pred.sql, schema) {
            Ok(p) => {
                mismatched = mismatched_components(&p, &gold);
                mismatched.is_empty()
            }
            Err(e) => {
                log::debug!("prediction {index} does not parse: {e}");
                mismatched = vec!["parse"];
                false
            }
        });

    let (exec_match, exec_timed_out) = match (settings.metric.exec(), db) {
        (true, Some(db)) => {
            let v = execution_verdict(&pred.sql, &example.gold_sql, db, settings.timeout)?;
            (Some(v.matched), v.timed_out)
        }
        _ => (None, false),
    };

    Ok(Verdict {
        index,
        db_id: example.db_id.clone(),
        hardness,
        exact_match,
        exec_match,
        exec_timed_out,
        mismatched,
    })
}

/// Scores predictions against a corpus. Exact match needs no databases;
/// execution match needs every referenced database under `db_root`.
pub fn evaluate_corpus(
    predictions: &[Prediction],
    corpus: &[Example],
    schemas: &BTreeMap<String, DbSchema>,
    db_root: Option<&Path>,
    settings: &EvalSettings,
) -> Result<EvalReport> {
    if predictions.len() != corpus.len() {
        return Err(Error::format(
            "predictions".to_string(),
            format!(
                "{} predictions for {} examples",
                predictions.len(),
                corpus.len()
            ),
        ));
    }
    for (index, (p, e)) in predictions.iter().zip(corpus).enumerate() {
        if p.db_id != e.db_id {
            return Err(Error::format(
                "predictions".to_string(),
                format!(
                    "line {}: db_id `{}` but gold uses `{}`",
                    index + 1,
                    p.db_id,
                    e.db_id
                ),
            ));
        }
        if !schemas.contains_key(&e.db_id) {
            return Err(Error::UnknownDatabase {
                index,
                db_id: e.db_id.clone(),
            });
        }
    }

    if settings.metric.exec() {
        let needed: BTreeSet<&str> = corpus.iter().map(|e| e.db_id.as_str()).collect();
        let missing: Vec<&str> = match db_root {
            None => needed.into_iter().collect(),
            Some(root) => needed
                .into_iter()
                .filter(|id| !database_path(root, id).is_file())
                .collect(),
        };
        if !missing.is_empty() {
            return Err(Error::Unavailable(format!(
                "execution requested but databases are missing: {}",
                missing.join(", ")
            )));
        }
    }

    let open = |cache: &mut HashMap<String, Database>, db_id: &str| -> Result<()> {
        if settings.metric.exec() && !cache.contains_key(db_id) {
            let root = db_root.expect("checked above");
            cache.insert(db_id.to_string(), open_database(&schemas[db_id], root)?);
        }
        Ok(())
    };
    let run = |cache: &mut HashMap<String, Database>, index: usize| -> Result<Verdict> {
        let (pred, example) = (&predictions[index], &corpus[index]);
        open(cache, &example.db_id)?;
        evaluate_one(
            index,
            pred,
            example,
            &schemas[&example.db_id],
            cache.get(&example.db_id),
            settings,
        )
    };

    let verdicts: Result<Vec<Verdict>> = if settings.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.jobs)
            .build()
            .map_err(|e| Error::format(None, e.to_string()))?;
        pool.install(|| {
            (0..corpus.len())
                .into_par_iter()
                .map_init(HashMap::new, |cache, i| run(cache, i))
                .collect()
        })
    } else {
        let mut cache = HashMap::new();
        (0..corpus.len()).map(|i| run(&mut cache, i)).collect()
    };
    Ok(EvalReport::from_verdicts(settings.metric, verdicts?))
}
