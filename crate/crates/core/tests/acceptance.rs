//! Acceptance suite. Runs every criterion against the fixture corpus and
//! prints one PASS/FAIL line each; exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{hardness_golden, Fixture};
use regex::Regex;
use textsql_kit::corpus::{ColumnType, Database, DbSchema};
use textsql_kit::evaluator::{
    classify_hardness, component_counts, evaluate_corpus, exact_set_match, execution_match,
    EvalSettings, Metric, Prediction,
};
use textsql_kit::preprocess::{derive_column_labels, segment_question, tokenize};
use textsql_kit::sql::{
    collect_value_slots, mask_values, parse_sql, print_sql, print_sql_resolved, replace_slots,
    value_slots, SlotContext, SlotKind, SqlQuery,
};
use textsql_kit::value_filler::{
    build_candidates, fill_heuristic, retrieve_cell_candidates, FillSource, FillerConfig,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&Ctx) -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Ctx {
    fx: Fixture,
    golds: Vec<SqlQuery>,
}

impl Ctx {
    fn db(&self, db_id: &str) -> Database {
        self.fx.open(db_id)
    }

    fn schema(&self, db_id: &str) -> &DbSchema {
        self.fx.schema(db_id)
    }
}

fn metric_identity(cx: &Ctx) -> Outcome {
    let start = Instant::now();
    let dbs = cx.fx.open_all();
    for (i, (ex, g)) in cx.fx.examples.iter().zip(&cx.golds).enumerate() {
        ensure(exact_set_match(g, g), || {
            format!("example {i}: exact(g, g) false")
        })?;
        let ok = execution_match(&ex.gold_sql, &ex.gold_sql, &dbs[&ex.db_id])
            .map_err(|e| e.to_string())?;
        ensure(ok, || format!("example {i}: execution(g, g) false"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("{} queries in {:.2?}", cx.golds.len(), elapsed))
}

fn fresh_literals(q: &SqlQuery) -> SqlQuery {
    replace_slots(q, &mut |slot| {
        Some(match &slot.kind {
            SlotKind::Str(_) => SlotKind::Str(format!("fresh value {}", slot.slot_id)),
            SlotKind::Num(_) => SlotKind::Num(format!("{}", 7919 + slot.slot_id)),
            SlotKind::Mask => return None,
        })
    })
}

fn value_agnosticism(cx: &Ctx) -> Outcome {
    let mut rewritten = 0;
    for (i, g) in cx.golds.iter().enumerate() {
        let r = fresh_literals(g);
        if r != *g {
            rewritten += 1;
        }
        ensure(exact_set_match(&r, g) && exact_set_match(g, &r), || {
            format!("example {i}: `{}` vs `{}`", print_sql(&r), print_sql(g))
        })?;
    }
    Ok(format!("{rewritten} queries rewritten, all still match"))
}

fn semantic_pairs(cx: &Ctx) -> Outcome {
    let pairs = [
        (
            "EXCEPT / NOT IN",
            "SELECT name FROM country EXCEPT SELECT T1.name FROM country AS T1 JOIN countrylanguage AS T2 \
             ON T1.code = T2.country_code WHERE T2.language = 'English'",
            "SELECT name FROM country WHERE code NOT IN \
             (SELECT country_code FROM countrylanguage WHERE language = 'English')",
        ),
        (
            "INTERSECT / AND",
            "SELECT name FROM country WHERE continent = 'Europe' \
             INTERSECT SELECT name FROM country WHERE population > 50000000",
            "SELECT name FROM country WHERE continent = 'Europe' AND population > 50000000",
        ),
    ];
    let schema = cx.schema("world");
    let db = cx.db("world");
    for (name, a, b) in pairs {
        let (qa, qb) = (parse_sql(a, schema).unwrap(), parse_sql(b, schema).unwrap());
        let exec = execution_match(b, a, &db).map_err(|e| e.to_string())?;
        let exact = exact_set_match(&qb, &qa);
        ensure(exec && !exact, || {
            format!("{name}: exec={exec} exact={exact}")
        })?;
    }
    Ok("both pairs: execution match, exact mismatch".to_string())
}

/// Text of every distinct non-null cell in a text column.
fn column_cells(db: &Database, schema: &DbSchema, column: usize) -> BTreeSet<String> {
    let col = &schema.columns[column];
    let table = &schema.tables[col.table_index.unwrap()].raw_name;
    let rows = db
        .query(
            &format!("SELECT DISTINCT \"{}\" FROM \"{}\"", col.raw_name, table),
            &[],
        )
        .unwrap();
    rows.rows.iter().filter_map(|r| r[0].to_text()).collect()
}

fn text_column_ids(schema: &DbSchema) -> Vec<usize> {
    (1..schema.columns.len())
        .filter(|&c| schema.columns[c].col_type == ColumnType::Text)
        .collect()
}

/// Literal tokens appear as a contiguous run of question tokens.
fn verbatim(literal: &str, question: &[String]) -> bool {
    let lit = tokenize(literal);
    !lit.is_empty() && question.windows(lit.len()).any(|w| w == lit.as_slice())
}

/// Every literal appears verbatim in the question; string literals occur in
/// their gold column and in no other text column.
fn in_recoverable_subset(cx: &Ctx, i: usize, db: &Database) -> bool {
    let ex = &cx.fx.examples[i];
    let schema = cx.schema(&ex.db_id);
    let q = tokenize(&ex.question);
    let contexts = collect_value_slots(&mask_values(&cx.golds[i]), schema);
    value_slots(&cx.golds[i]).iter().all(|slot| {
        let ctx = contexts
            .iter()
            .find(|c| c.slot_id == slot.slot_id)
            .map(|c| &c.context);
        match &slot.kind {
            SlotKind::Num(n) => verbatim(n, &q),
            SlotKind::Str(s) => {
                let Some(SlotContext::Column { column, .. }) = ctx else {
                    return false;
                };
                let holders: Vec<usize> = text_column_ids(schema)
                    .into_iter()
                    .filter(|&c| column_cells(db, schema, c).contains(s))
                    .collect();
                verbatim(s, &q) && holders == [*column]
            }
            SlotKind::Mask => false,
        }
    })
}

struct FillRun {
    hit: bool,
    subset: bool,
    sources: Vec<FillSource>,
}

fn run_filler(cx: &Ctx) -> Vec<FillRun> {
    let dbs = cx.fx.open_all();
    let config = FillerConfig::default();
    cx.fx
        .examples
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            let schema = cx.schema(&ex.db_id);
            let db = &dbs[&ex.db_id];
            let pq = segment_question(&tokenize(&ex.question), schema);
            let cands = build_candidates(&pq, Some(db), schema, &config);
            let filled = fill_heuristic(&mask_values(&cx.golds[i]), &cands, schema).unwrap();
            FillRun {
                hit: execution_match(&filled.sql, &ex.gold_sql, db).unwrap(),
                subset: in_recoverable_subset(cx, i, db),
                sources: filled.fills.iter().map(|f| f.source).collect(),
            }
        })
        .collect()
}

fn filler_recovery(cx: &Ctx) -> Outcome {
    let runs = run_filler(cx);
    let subset: Vec<usize> = (0..runs.len()).filter(|&i| runs[i].subset).collect();
    ensure(!subset.is_empty(), || {
        "empty recoverable subset".to_string()
    })?;
    let subset_misses: Vec<usize> = subset.iter().copied().filter(|&i| !runs[i].hit).collect();
    ensure(subset_misses.is_empty(), || {
        format!("subset misses at {subset_misses:?}")
    })?;

    let misses: Vec<usize> = (0..runs.len()).filter(|&i| !runs[i].hit).collect();
    ensure(!misses.is_empty(), || {
        "full corpus recovered 100%".to_string()
    })?;
    for &i in &misses {
        ensure(
            runs[i]
                .sources
                .iter()
                .any(|s| matches!(s, FillSource::Placeholder | FillSource::DefaultOne)),
            || {
                format!(
                    "example {i} missed without placeholder/default_one: {:?}",
                    runs[i].sources
                )
            },
        )?;
    }
    let hits = runs.len() - misses.len();
    Ok(format!(
        "subset {}/{} recovered; full {hits}/{} (misses {misses:?} all tagged)",
        subset.len(),
        subset.len(),
        runs.len()
    ))
}

fn filler_ordering(cx: &Ctx) -> Outcome {
    let dbs = cx.fx.open_all();
    let mut no_filler = 0;
    for (ex, g) in cx.fx.examples.iter().zip(&cx.golds) {
        let masked = print_sql(&mask_values(g));
        if execution_match(&masked, &ex.gold_sql, &dbs[&ex.db_id]).unwrap() {
            no_filler += 1;
        }
    }
    let heuristic = run_filler(cx).iter().filter(|r| r.hit).count();
    let n = cx.golds.len() as f64;
    let (a, b) = (no_filler as f64 / n * 100.0, heuristic as f64 / n * 100.0);
    ensure(a < b, || format!("no filler {a:.1} >= heuristic {b:.1}"))?;
    Ok(format!("no filler {a:.1} < heuristic {b:.1}"))
}

fn four_pattern(cell: &str, token: &str) -> bool {
    let (c, t) = (cell.to_lowercase(), token.to_lowercase());
    c == t
        || c.starts_with(&format!("{t} "))
        || c.ends_with(&format!(" {t}"))
        || c.contains(&format!(" {t} "))
}

fn retrieval_oracle(cx: &Ctx) -> Outcome {
    let mut checked = 0;
    for ex in &cx.fx.examples {
        let schema = cx.schema(&ex.db_id);
        let db = cx.db(&ex.db_id);
        let cells: Vec<(usize, BTreeSet<String>)> = text_column_ids(schema)
            .into_iter()
            .map(|c| (c, column_cells(&db, schema, c)))
            .collect();
        for token in tokenize(&ex.question) {
            let got: BTreeSet<(usize, usize, String)> =
                retrieve_cell_candidates(&token, &db, schema)
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .map(|c| (c.table, c.column, c.value))
                    .collect();
            let want: BTreeSet<(usize, usize, String)> = cells
                .iter()
                .flat_map(|(c, values)| {
                    let table = schema.columns[*c].table_index.unwrap();
                    values
                        .iter()
                        .filter(|v| four_pattern(v, &token))
                        .map(move |v| (table, *c, v.clone()))
                })
                .collect();
            ensure(got == want, || {
                format!("token `{token}` in {}: {got:?} != {want:?}", ex.db_id)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} tokens match the brute-force scan"))
}

fn round_trip(cx: &Ctx) -> Outcome {
    let dbs = cx.fx.open_all();
    for (i, (ex, g)) in cx.fx.examples.iter().zip(&cx.golds).enumerate() {
        let printed = print_sql(g);
        let ok =
            execution_match(&printed, &ex.gold_sql, &dbs[&ex.db_id]).map_err(|e| e.to_string())?;
        ensure(ok, || {
            format!("example {i}: printed form changes results: {printed}")
        })?;
        let reparsed =
            parse_sql(&printed, cx.schema(&ex.db_id)).map_err(|e| format!("example {i}: {e}"))?;
        ensure(reparsed == *g, || {
            format!("example {i}: parse(print(q)) != q")
        })?;
        ensure(print_sql(&reparsed) == printed, || {
            format!("example {i}: print not stable")
        })?;
    }
    Ok(format!("{} queries", cx.golds.len()))
}

/// Positive columns found by scanning `table.column` references in the
/// alias-resolved text, string literals removed.
fn label_oracle(resolved: &str, schema: &DbSchema) -> Vec<u8> {
    let literals = Regex::new(r"'(?:[^']|'')*'").unwrap();
    let refs = Regex::new(r"\b([A-Za-z_][A-Za-z0-9_]*)\.([A-Za-z_][A-Za-z0-9_]*)\b").unwrap();
    let text = literals.replace_all(resolved, "''");
    let mut labels = vec![0u8; schema.columns.len()];
    for cap in refs.captures_iter(&text) {
        let (t, c) = (&cap[1], &cap[2]);
        let idx = schema.columns.iter().position(|col| {
            col.raw_name.eq_ignore_ascii_case(c)
                && col
                    .table_index
                    .is_some_and(|ti| schema.tables[ti].raw_name.eq_ignore_ascii_case(t))
        });
        labels[idx.unwrap_or_else(|| panic!("unresolved reference {t}.{c}"))] = 1;
    }
    labels
}

fn label_oracle_check(cx: &Ctx) -> Outcome {
    for (i, (ex, g)) in cx.fx.examples.iter().zip(&cx.golds).enumerate() {
        let schema = cx.schema(&ex.db_id);
        let resolved = print_sql_resolved(g, schema);
        let want = label_oracle(&resolved, schema);
        let got = derive_column_labels(g, schema).labels;
        ensure(got == want, || {
            format!("example {i}: {got:?} != {want:?} for {resolved}")
        })?;
    }
    Ok(format!("{} label vectors", cx.golds.len()))
}

fn hardness_records(cx: &Ctx) -> Outcome {
    let golden = hardness_golden();
    ensure(golden.len() == cx.golds.len(), || {
        "golden record count differs".to_string()
    })?;
    for (i, (g, &(level, c1, c2, others))) in cx.golds.iter().zip(&golden).enumerate() {
        let counts = component_counts(g);
        ensure(
            (counts.comp1, counts.comp2, counts.others) == (c1, c2, others),
            || format!("example {i}: counts {counts:?} != ({c1}, {c2}, {others})"),
        )?;
        ensure(classify_hardness(g) == level, || {
            format!("example {i}: {:?} != {level:?}", classify_hardness(g))
        })?;
        ensure(classify_hardness(&mask_values(g)) == level, || {
            format!("example {i}: level changes under masking")
        })?;
    }
    let preds: Vec<Prediction> = cx
        .fx
        .examples
        .iter()
        .map(|e| Prediction {
            db_id: e.db_id.clone(),
            sql: e.gold_sql.clone(),
        })
        .collect();
    let report = evaluate_corpus(
        &preds,
        &cx.fx.examples,
        &cx.fx.schemas,
        Some(cx.fx.db_root()),
        &EvalSettings {
            metric: Metric::Both,
            ..EvalSettings::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let table = report.render_table();
    let header: Vec<&str> = table
        .lines()
        .next()
        .unwrap_or("")
        .split("  ")
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    ensure(
        header == ["Easy", "Medium", "Hard", "Extra Hard", "All"],
        || format!("table header {header:?}"),
    )?;
    let counts: Vec<usize> = report.levels.iter().map(|l| l.count).collect();
    ensure(
        counts.iter().take(4).all(|&c| c > 0) && counts[4] == cx.golds.len(),
        || format!("level counts {counts:?}"),
    )?;
    ensure(
        table.contains("exact set match") && table.contains("execution"),
        || table.clone(),
    )?;
    Ok(format!(
        "{} records match; levels {:?}",
        golden.len(),
        &counts[..4]
    ))
}

fn textsql(args: &[&std::ffi::OsStr]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_textsql"))
        .args(args)
        .env_remove(textsql_kit::cli::DATA_ENV)
        .output()
        .expect("run textsql")
        .status
        .code()
        .unwrap_or(-1)
}

fn setting_split(cx: &Ctx) -> Outcome {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let pred = work.path().join("pred.jsonl");
    let lines: String = cx
        .fx
        .examples
        .iter()
        .map(|e| serde_json::json!({"db_id": e.db_id, "sql": e.gold_sql}).to_string() + "\n")
        .collect();
    std::fs::write(&pred, lines).map_err(|e| e.to_string())?;
    let empty_root = work.path().join("no-databases");
    std::fs::create_dir_all(&empty_root).map_err(|e| e.to_string())?;

    let tables = Fixture::tables_path();
    let gold = Fixture::examples_path();
    let base = |extra: &[&Path], metric: &str| -> i32 {
        let mut args: Vec<&std::ffi::OsStr> = vec![
            "evaluate".as_ref(),
            "--tables".as_ref(),
            tables.as_os_str(),
            "--gold".as_ref(),
            gold.as_os_str(),
            "--pred".as_ref(),
            pred.as_os_str(),
            "--metric".as_ref(),
            metric.as_ref(),
        ];
        match extra.first() {
            Some(db) => {
                args.push("--db".as_ref());
                args.push(db.as_os_str());
            }
            None => args.push("--no-db".as_ref()),
        }
        textsql(&args)
    };
    let exact_no_db = base(&[], "exact");
    let exec_no_db = base(&[], "exec");
    let exec_missing = base(&[&empty_root], "exec");
    let both_missing = base(&[&empty_root], "both");
    ensure(exact_no_db == 0, || {
        format!("exact --no-db exited {exact_no_db}")
    })?;
    ensure(
        exec_no_db == 3 && exec_missing == 3 && both_missing == 3,
        || format!("exec without databases exited {exec_no_db}/{exec_missing}/{both_missing}"),
    )?;
    Ok("exact without databases: 0; execution without databases: 3".to_string())
}

fn main() {
    let fx = Fixture::build();
    let golds: Vec<SqlQuery> = fx
        .examples
        .iter()
        .map(|e| parse_sql(&e.gold_sql, &fx.schemas[&e.db_id]).expect("fixture gold parses"))
        .collect();
    let cx = Ctx { fx, golds };

    let criteria: [Criterion; 10] = [
        ("metric identity", metric_identity),
        ("value agnosticism", value_agnosticism),
        ("semantic-equivalence pairs", semantic_pairs),
        ("filler recovery", filler_recovery),
        ("filler ordering", filler_ordering),
        ("retrieval oracle", retrieval_oracle),
        ("round trip", round_trip),
        ("label oracle", label_oracle_check),
        ("hardness golden records", hardness_records),
        ("setting split", setting_split),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check(&cx) {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
