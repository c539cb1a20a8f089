//! Heuristic value filling for `<mask>` slots.
//!
//! Every question token is looked up in each text column with four LIKE
//! patterns (`tok %`, `% tok`, `% tok %`, `tok`). Retrieved cells that are
//! close enough to some question span join a per-column queue (the
//! projection); numbers in the question form a separate list. Slots are then
//! filled in order: numeric slots take the next unused number (default 1),
//! other slots take the next unused value queued for their column, or a
//! placeholder string when the column has no queue.

mod similarity;

pub use similarity::{best_window_ratio, levenshtein_ratio, normalize_text};

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{open_database, CellValue, Database, DbSchema, Example};
use crate::error::{Error, Result};
use crate::preprocess::{quote_ident, segment_question, tokenize, PreprocessedQuestion};
use crate::sql::{
    collect_value_slots, mask_values, parse_sql, print_sql, replace_slots, value_slots,
    SlotContext, SlotKind, SqlQuery,
};

/// Literal used for text slots nothing could fill.
pub const PLACEHOLDER: &str = "value";

pub const DEFAULT_THRESHOLD: f64 = 85.0;

const STOPWORDS: &[&str] = &[
    "the", "and", "for", "are", "was", "were", "what", "which", "who", "whom", "whose", "where",
    "when", "how", "that", "this", "these", "those", "with", "from", "have", "has", "had", "all",
    "any", "each", "list", "show", "give", "find", "return", "name", "names", "number", "many",
    "much", "more", "most", "less", "least", "than", "their", "there", "they", "them", "its",
    "into", "about", "also", "only", "not", "but", "does", "did", "some", "such", "other", "per",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FillerConfig {
    /// Minimum similarity (0-100) between a retrieved cell and the question.
    pub threshold: f64,
    /// Skip tokens of length <= 2 and stopwords during retrieval.
    pub skip_stopwords: bool,
}

impl Default for FillerConfig {
    fn default() -> Self {
        FillerConfig {
            threshold: DEFAULT_THRESHOLD,
            skip_stopwords: true,
        }
    }
}

impl FillerConfig {
    pub fn skips(&self, token: &str) -> bool {
        self.skip_stopwords && (token.chars().count() <= 2 || STOPWORDS.contains(&token))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellCandidate {
    pub table: usize,
    pub column: usize,
    pub value: String,
}

/// Escapes LIKE wildcards so `token` matches literally under `ESCAPE '\'`.
pub fn escape_like(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    for c in token.chars() {
        if matches!(c, '\\' | '%' | '_') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Distinct cells of every text column that contain `token` as a leading,
/// trailing, interior or whole word, ordered by (table, column, value).
pub fn retrieve_cell_candidates(
    token: &str,
    db: &Database,
    schema: &DbSchema,
) -> Result<Vec<CellCandidate>> {
    let escaped = escape_like(token);
    let patterns = [
        format!("{escaped} %"),
        format!("% {escaped}"),
        format!("% {escaped} %"),
        escaped,
    ];
    let mut out = Vec::new();
    for column in schema.text_columns() {
        let table = schema
            .table_of(column)
            .expect("text columns belong to a table");
        let col = quote_ident(&schema.columns[column].raw_name);
        let sql = format!(
            "SELECT DISTINCT {col} FROM {tab} WHERE {col} LIKE ?1 ESCAPE '\\' OR {col} LIKE ?2 ESCAPE '\\' \
             OR {col} LIKE ?3 ESCAPE '\\' OR {col} LIKE ?4 ESCAPE '\\'",
            tab = quote_ident(&schema.tables[table].raw_name),
        );
        let rows = db.query(
            &sql,
            &[&patterns[0], &patterns[1], &patterns[2], &patterns[3]],
        )?;
        let mut values: Vec<String> = rows
            .rows
            .iter()
            .filter_map(|r| r.first().and_then(CellValue::to_text))
            .collect();
        values.sort();
        values.dedup();
        out.extend(values.into_iter().map(|value| CellCandidate {
            table,
            column,
            value,
        }));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumberCandidate {
    /// Spelling used when the number is printed into SQL.
    pub text: String,
    pub value: f64,
    /// Question token the number came from.
    pub token: usize,
}

impl NumberCandidate {
    fn is_limit_count(&self) -> bool {
        self.value >= 0.0 && self.value.fract() == 0.0 && !self.text.contains('.')
    }
}

const CARDINALS: &[&str] = &[
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
];

/// Numbers mentioned in the question, in question order: numeric tokens and
/// the cardinal words one to ten.
pub fn extract_numbers(pq: &PreprocessedQuestion) -> Vec<NumberCandidate> {
    pq.tokens
        .iter()
        .enumerate()
        .filter_map(|(i, tok)| {
            if let Some(k) = CARDINALS.iter().position(|w| w == tok) {
                return Some(NumberCandidate {
                    text: (k + 1).to_string(),
                    value: (k + 1) as f64,
                    token: i,
                });
            }
            let numeric = !tok.is_empty()
                && tok.chars().all(|c| c.is_ascii_digit() || c == '.')
                && tok.chars().any(|c| c.is_ascii_digit());
            if !numeric {
                return None;
            }
            tok.parse::<f64>().ok().map(|value| NumberCandidate {
                text: tok.clone(),
                value,
                token: i,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueuedValue {
    pub value: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueuedNumber {
    pub number: NumberCandidate,
    pub index: usize,
}

/// Projection from (table, column) to retrieved values, plus the number
/// list. Indices count up in collection order across both.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub projection: BTreeMap<(usize, usize), Vec<QueuedValue>>,
    pub numbers: Vec<QueuedNumber>,
}

impl CandidateSet {
    pub fn is_empty(&self) -> bool {
        self.projection.is_empty() && self.numbers.is_empty()
    }
}

/// Collects projection values and numbers for one question. Without a
/// database, or if a lookup fails, only numbers are collected.
pub fn build_candidates(
    pq: &PreprocessedQuestion,
    db: Option<&Database>,
    schema: &DbSchema,
    config: &FillerConfig,
) -> CandidateSet {
    let mut set = CandidateSet::default();
    let numbers = extract_numbers(pq);
    let mut next_index = 0;
    let mut db = db;
    for (i, token) in pq.tokens.iter().enumerate() {
        if let Some(handle) = db {
            if !config.skips(token) {
                match retrieve_cell_candidates(token, handle, schema) {
                    Ok(cells) => {
                        for cell in cells {
                            if best_window_ratio(&cell.value, &pq.tokens) < config.threshold {
                                continue;
                            }
                            let queue =
                                set.projection.entry((cell.table, cell.column)).or_default();
                            if queue.iter().any(|q| q.value == cell.value) {
                                continue;
                            }
                            queue.push(QueuedValue {
                                value: cell.value,
                                index: next_index,
                            });
                            next_index += 1;
                        }
                    }
                    Err(e) => {
                        log::warn!(
                            "{}: cell retrieval failed, using numbers only: {e}",
                            schema.db_id
                        );
                        set.projection.clear();
                        db = None;
                    }
                }
            }
        }
        for number in numbers.iter().filter(|n| n.token == i) {
            set.numbers.push(QueuedNumber {
                number: number.clone(),
                index: next_index,
            });
            next_index += 1;
        }
    }
    set
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillSource {
    Projection,
    Number,
    DefaultOne,
    Placeholder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fill {
    pub slot_id: usize,
    pub source: FillSource,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FillResult {
    pub sql: String,
    pub query: SqlQuery,
    pub fills: Vec<Fill>,
}

/// Fills every mask slot of `masked` from `cands`. Literal slots are kept.
pub fn fill_heuristic(
    masked: &SqlQuery,
    cands: &CandidateSet,
    schema: &DbSchema,
) -> Result<FillResult> {
    let mut slots = collect_value_slots(masked, schema);
    slots.sort_by_key(|s| s.slot_id);

    let mut number_used = vec![false; cands.numbers.len()];
    let mut queue_pos: HashMap<(usize, usize), usize> = HashMap::new();
    let mut fills = Vec::with_capacity(slots.len());
    let mut kinds: HashMap<usize, SlotKind> = HashMap::new();

    for slot in &slots {
        let (source, kind) = if slot.context.is_numeric() {
            let limit = slot.context == SlotContext::Limit;
            let pick = cands
                .numbers
                .iter()
                .enumerate()
                .find(|(i, q)| !number_used[*i] && (!limit || q.number.is_limit_count()));
            match pick {
                Some((i, q)) => {
                    number_used[i] = true;
                    (FillSource::Number, SlotKind::Num(q.number.text.clone()))
                }
                None => (FillSource::DefaultOne, SlotKind::Num("1".to_string())),
            }
        } else {
            let SlotContext::Column { table, column, .. } = slot.context else {
                unreachable!("non-numeric contexts are columns")
            };
            let table = match table {
                Some(t) if column > 0 && column < schema.columns.len() => t,
                _ => {
                    return Err(Error::Context {
                        slot_id: slot.slot_id,
                        message: format!("no table/column context for column ordinal {column}"),
                    })
                }
            };
            let key = (table, column);
            let pos = queue_pos.entry(key).or_insert(0);
            match cands.projection.get(&key).and_then(|queue| queue.get(*pos)) {
                Some(q) => {
                    *pos += 1;
                    (FillSource::Projection, SlotKind::Str(q.value.clone()))
                }
                None => (
                    FillSource::Placeholder,
                    SlotKind::Str(PLACEHOLDER.to_string()),
                ),
            }
        };
        let value = match &kind {
            SlotKind::Str(s) | SlotKind::Num(s) => s.clone(),
            SlotKind::Mask => unreachable!(),
        };
        fills.push(Fill {
            slot_id: slot.slot_id,
            source,
            value,
        });
        kinds.insert(slot.slot_id, kind);
    }

    let query = replace_slots(masked, &mut |slot| {
        if slot.is_mask() {
            kinds.get(&slot.slot_id).cloned()
        } else {
            None
        }
    });
    Ok(FillResult {
        sql: print_sql(&query),
        query,
        fills,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub value: String,
    /// `table.column` for projected cells, `NUMBER` for numbers.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotGold {
    pub slot_id: usize,
    pub gold_value: String,
    pub gold_index: Option<usize>,
}

/// One training record for a neural filler: question, masked SQL and the
/// candidate list, with the gold candidate per slot when present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillerExample {
    pub db_id: String,
    pub question: String,
    pub masked_sql: String,
    pub candidates: Vec<CandidateEntry>,
    pub slots: Vec<SlotGold>,
}

/// Candidate list in collection order.
pub fn ordered_candidates(cands: &CandidateSet, schema: &DbSchema) -> Vec<(CandidateEntry, usize)> {
    let mut all: Vec<(CandidateEntry, usize)> = Vec::new();
    for (&(table, column), queue) in &cands.projection {
        let source = format!(
            "{}.{}",
            schema.tables[table].raw_name, schema.columns[column].raw_name
        );
        for q in queue {
            all.push((
                CandidateEntry {
                    value: q.value.clone(),
                    source: source.clone(),
                },
                q.index,
            ));
        }
    }
    for q in &cands.numbers {
        all.push((
            CandidateEntry {
                value: q.number.text.clone(),
                source: "NUMBER".to_string(),
            },
            q.index,
        ));
    }
    all.sort_by_key(|(_, index)| *index);
    all
}

fn literal_matches(gold: &SlotKind, candidate: &str) -> bool {
    match gold {
        SlotKind::Str(s) => s.to_lowercase() == candidate.to_lowercase(),
        SlotKind::Num(n) => match (n.parse::<f64>(), candidate.parse::<f64>()) {
            (Ok(a), Ok(b)) => a == b,
            _ => n == candidate,
        },
        SlotKind::Mask => false,
    }
}

/// Builds the export record for one example. Fails when the gold query does
/// not parse.
pub fn filler_example(
    example: &Example,
    schema: &DbSchema,
    db: Option<&Database>,
    config: &FillerConfig,
) -> Result<FillerExample> {
    let gold = parse_sql(&example.gold_sql, schema)?;
    let masked = mask_values(&gold);
    let pq = segment_question(&tokenize(&example.question), schema);
    let cands = build_candidates(&pq, db, schema, config);
    let candidates: Vec<CandidateEntry> = ordered_candidates(&cands, schema)
        .into_iter()
        .map(|(c, _)| c)
        .collect();

    let contexts: HashMap<usize, SlotContext> = collect_value_slots(&masked, schema)
        .into_iter()
        .map(|s| (s.slot_id, s.context))
        .collect();
    let slots = value_slots(&gold)
        .into_iter()
        .map(|slot| {
            let preferred = contexts.get(&slot.slot_id).map(|ctx| match ctx {
                SlotContext::Column {
                    table: Some(t),
                    column,
                    ..
                } if !ctx.is_numeric() => format!(
                    "{}.{}",
                    schema.tables[*t].raw_name, schema.columns[*column].raw_name
                ),
                _ => "NUMBER".to_string(),
            });
            let equal = |c: &&CandidateEntry| literal_matches(&slot.kind, &c.value);
            let gold_index = candidates
                .iter()
                .position(|c| Some(&c.source) == preferred.as_ref() && equal(&c))
                .or_else(|| candidates.iter().position(|c| equal(&c)));
            let gold_value = match &slot.kind {
                SlotKind::Str(s) | SlotKind::Num(s) => s.clone(),
                SlotKind::Mask => String::new(),
            };
            SlotGold {
                slot_id: slot.slot_id,
                gold_value,
                gold_index,
            }
        })
        .collect();

    Ok(FillerExample {
        db_id: example.db_id.clone(),
        question: example.question.clone(),
        masked_sql: print_sql(&masked),
        candidates,
        slots,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExportSummary {
    pub written: usize,
    pub skipped: usize,
}

/// Builds filler records for a corpus. Examples whose gold SQL does not
/// parse are skipped and counted. Databases are opened from `db_root` when
/// given; a missing file degrades that example to numbers-only candidates.
pub fn export_filler_examples(
    corpus: &[Example],
    schemas: &BTreeMap<String, DbSchema>,
    db_root: Option<&Path>,
    config: &FillerConfig,
) -> Result<(Vec<FillerExample>, ExportSummary)> {
    let mut handles: HashMap<String, Option<Database>> = HashMap::new();
    let mut out = Vec::with_capacity(corpus.len());
    let mut summary = ExportSummary::default();
    for (index, example) in corpus.iter().enumerate() {
        let schema = schemas
            .get(&example.db_id)
            .ok_or_else(|| Error::UnknownDatabase {
                index,
                db_id: example.db_id.clone(),
            })?;
        let db = match db_root {
            Some(root) => handles
                .entry(example.db_id.clone())
                .or_insert_with(|| open_database(schema, root).ok())
                .as_ref(),
            None => None,
        };
        match filler_example(example, schema, db, config) {
            Ok(record) => {
                out.push(record);
                summary.written += 1;
            }
            Err(e) => {
                log::warn!("example {index}: skipped, gold SQL unusable: {e}");
                summary.skipped += 1;
            }
        }
    }
    if summary.skipped > 0 {
        log::info!("skipped {} of {} examples", summary.skipped, corpus.len());
    }
    Ok((out, summary))
}
