//! Question and schema preprocessing for the parser's encoder input, plus
//! column-selection labels derived from gold SQL.
//!
//! Questions are tokenized, then token n-grams that equal a column or table
//! display name are grouped into one segment tagged `[column]` or `[table]`.
//! Columns are rendered as "<table> <column>" enhanced names. When database
//! contents are available, spans equal to a full text cell are annotated
//! with the enhanced name of the cell's column.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{CellValue, Database, DbSchema};
use crate::error::Result;
use crate::sql::{column_refs, SqlQuery};

/// Longest n-gram compared against schema names.
pub const MAX_NGRAM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    Column,
    Table,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub indicator: Indicator,
    pub ordinal: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    /// Token index the column name is inserted before.
    pub position: usize,
    pub column: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessedQuestion {
    pub tokens: Vec<String>,
    pub segments: Vec<Segment>,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnLabelSet {
    pub db_id: String,
    pub labels: Vec<u8>,
}

impl ColumnLabelSet {
    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == 1)
            .map(|(i, _)| i)
    }
}

fn is_open_quote(c: char) -> Option<char> {
    match c {
        '"' => Some('"'),
        '\u{201c}' => Some('\u{201d}'),
        '\'' => Some('\''),
        '\u{2018}' => Some('\u{2019}'),
        _ => None,
    }
}

/// Lowercases and splits a question on whitespace and punctuation.
///
/// Quoted spans become single tokens without their quotes. A single quote
/// opens a span only at a word boundary and only when a matching quote
/// closes it at a word boundary, so apostrophes split words instead.
/// Decimal points between digits are kept.
pub fn tokenize(question: &str) -> Vec<String> {
    let chars: Vec<char> = question.to_lowercase().chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if !current.is_empty() {
            tokens.push(std::mem::take(current));
        }
    };
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if let Some(close) = is_open_quote(c) {
            let at_boundary = i == 0 || !chars[i - 1].is_alphanumeric();
            let end = chars[i + 1..]
                .iter()
                .enumerate()
                .find(|&(k, &ch)| {
                    let j = i + 1 + k;
                    ch == close && chars.get(j + 1).is_none_or(|n| !n.is_alphanumeric())
                })
                .map(|(k, _)| i + 1 + k);
            if let (true, Some(end)) = (at_boundary, end) {
                let inner: String = chars[i + 1..end].iter().collect();
                let inner = inner.split_whitespace().collect::<Vec<_>>().join(" ");
                flush(&mut current, &mut tokens);
                if !inner.is_empty() {
                    tokens.push(inner);
                }
                i = end + 1;
                continue;
            }
        }
        let decimal_point = c == '.'
            && current.chars().last().is_some_and(|p| p.is_ascii_digit())
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if c.is_alphanumeric() || decimal_point {
            current.push(c);
        } else {
            flush(&mut current, &mut tokens);
        }
        i += 1;
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// Groups tokens into schema-matching segments, greedy longest match from
/// the left. On equal length a column beats a table, and among same-named
/// columns the lowest ordinal wins.
pub fn segment_question(tokens: &[String], schema: &DbSchema) -> PreprocessedQuestion {
    let mut names: HashMap<&str, (Indicator, usize)> = HashMap::new();
    for (i, col) in schema
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_star())
    {
        names
            .entry(col.display_name.as_str())
            .or_insert((Indicator::Column, i));
    }
    for (i, table) in schema.tables.iter().enumerate() {
        names
            .entry(table.display_name.as_str())
            .or_insert((Indicator::Table, i));
    }

    let mut segments = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = (1..=MAX_NGRAM.min(tokens.len() - i)).rev().find_map(|n| {
            let key = tokens[i..i + n].join(" ");
            names.get(key.as_str()).map(|&hit| (n, hit))
        });
        match longest {
            Some((n, (indicator, ordinal))) => {
                segments.push(Segment {
                    start: i,
                    end: i + n - 1,
                    indicator,
                    ordinal: Some(ordinal),
                });
                i += n;
            }
            None => {
                segments.push(Segment {
                    start: i,
                    end: i,
                    indicator: Indicator::None,
                    ordinal: None,
                });
                i += 1;
            }
        }
    }
    PreprocessedQuestion {
        tokens: tokens.to_vec(),
        segments,
        annotations: Vec::new(),
    }
}

/// "<table> <column>" for every column; `*` stays `*`.
pub fn enhance_column_names(schema: &DbSchema) -> Vec<String> {
    schema
        .columns
        .iter()
        .map(|c| match c.table_index {
            None => "*".to_string(),
            Some(t) => format!("{} {}", schema.tables[t].display_name, c.display_name),
        })
        .collect()
}

pub(crate) fn quote_ident(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

fn normalize_cell(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Annotates question spans equal to a full text cell with the enhanced
/// name of each column holding that cell, ordered by column ordinal.
/// Tokens and segments are left untouched.
pub fn annotate_cell_matches(
    pq: &PreprocessedQuestion,
    db: &Database,
    schema: &DbSchema,
) -> Result<PreprocessedQuestion> {
    let mut cells: HashMap<String, BTreeSet<usize>> = HashMap::new();
    let mut widest = 0;
    for column in schema.text_columns() {
        let table = schema
            .table_of(column)
            .expect("text columns belong to a table");
        let sql = format!(
            "SELECT DISTINCT {col} FROM {table} WHERE {col} IS NOT NULL",
            col = quote_ident(&schema.columns[column].raw_name),
            table = quote_ident(&schema.tables[table].raw_name),
        );
        for row in db.query(&sql, &[])?.rows {
            if let Some(text) = row.first().and_then(CellValue::to_text) {
                let key = normalize_cell(&text);
                if key.is_empty() {
                    continue;
                }
                widest = widest.max(key.split(' ').count());
                cells.entry(key).or_default().insert(column);
            }
        }
    }

    let enhanced = enhance_column_names(schema);
    let mut out = pq.clone();
    let tokens = &pq.tokens;
    let mut i = 0;
    while i < tokens.len() {
        let hit = (1..=widest.min(tokens.len() - i)).rev().find_map(|n| {
            let key = normalize_cell(&tokens[i..i + n].join(" "));
            cells.get(&key).map(|cols| (n, cols))
        });
        match hit {
            Some((n, cols)) => {
                for &column in cols {
                    out.annotations.push(Annotation {
                        position: i,
                        column,
                        name: enhanced[column].clone(),
                    });
                }
                i += n;
            }
            None => i += 1,
        }
    }
    Ok(out)
}

/// Positive label for every column the query mentions, anywhere.
pub fn derive_column_labels(gold: &SqlQuery, schema: &DbSchema) -> ColumnLabelSet {
    let mut labels = vec![0u8; schema.columns.len()];
    for col in column_refs(gold) {
        if col.column != 0 && col.column < labels.len() {
            labels[col.column] = 1;
        }
    }
    ColumnLabelSet {
        db_id: schema.db_id.clone(),
        labels,
    }
}

/// One line of the model-input export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInput {
    pub db_id: String,
    pub tokens: Vec<String>,
    pub segments: Vec<Segment>,
    pub enhanced_columns: Vec<String>,
    pub annotations: Vec<Annotation>,
    pub column_labels: Option<Vec<u8>>,
}

/// Builds the export record for one question. `db` selects the
/// using-cell-value setting; `gold` supplies column labels.
pub fn build_model_input(
    question: &str,
    schema: &DbSchema,
    db: Option<&Database>,
    gold: Option<&SqlQuery>,
) -> Result<ModelInput> {
    let mut pq = segment_question(&tokenize(question), schema);
    if let Some(db) = db {
        pq = annotate_cell_matches(&pq, db, schema)?;
    }
    Ok(ModelInput {
        db_id: schema.db_id.clone(),
        tokens: pq.tokens,
        segments: pq.segments,
        enhanced_columns: enhance_column_names(schema),
        annotations: pq.annotations,
        column_labels: gold.map(|g| derive_column_labels(g, schema).labels),
    })
}
