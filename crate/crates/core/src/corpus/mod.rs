//! Spider-format corpus ingestion: schemas from `tables.json`, examples from
//! `dev.json`-style files, and read-only SQLite handles for each database.

mod database;

pub use database::{CellValue, Database, QueryOutcome, Rows};

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column type as declared in `tables.json`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Text,
    Number,
    Time,
    Boolean,
    Other,
}

impl ColumnType {
    fn from_spider(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Some(ColumnType::Text),
            "number" => Some(ColumnType::Number),
            "time" => Some(ColumnType::Time),
            "boolean" => Some(ColumnType::Boolean),
            "others" | "other" => Some(ColumnType::Other),
            _ => None,
        }
    }

    fn as_spider(self) -> &'static str {
        match self {
            ColumnType::Text => "text",
            ColumnType::Number => "number",
            ColumnType::Time => "time",
            ColumnType::Boolean => "boolean",
            ColumnType::Other => "others",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDef {
    /// `None` only for the `*` pseudo-column at ordinal 0.
    pub table_index: Option<usize>,
    pub raw_name: String,
    pub display_name: String,
    pub col_type: ColumnType,
}

impl ColumnDef {
    pub fn is_star(&self) -> bool {
        self.table_index.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableDef {
    pub raw_name: String,
    pub display_name: String,
    pub column_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbSchema {
    pub db_id: String,
    pub tables: Vec<TableDef>,
    pub columns: Vec<ColumnDef>,
    pub primary_keys: Vec<usize>,
    pub foreign_keys: Vec<(usize, usize)>,
}

impl DbSchema {
    /// Case-insensitive lookup of a table by its raw name.
    pub fn table_by_name(&self, name: &str) -> Option<usize> {
        self.tables
            .iter()
            .position(|t| t.raw_name.eq_ignore_ascii_case(name))
    }

    /// Case-insensitive lookup of a column of `table` by its raw name.
    pub fn column_in_table(&self, table: usize, name: &str) -> Option<usize> {
        self.tables
            .get(table)?
            .column_indices
            .iter()
            .copied()
            .find(|&c| self.columns[c].raw_name.eq_ignore_ascii_case(name))
    }

    /// Table owning column `column`, `None` for `*`.
    pub fn table_of(&self, column: usize) -> Option<usize> {
        self.columns.get(column).and_then(|c| c.table_index)
    }

    /// Ordinals of every text-typed column, in schema order.
    pub fn text_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_star() && c.col_type == ColumnType::Text)
            .map(|(i, _)| i)
    }

    /// Serializes back into a `tables.json` record.
    pub fn to_spider_json(&self) -> serde_json::Value {
        let record = RawSchema {
            db_id: self.db_id.clone(),
            table_names_original: self.tables.iter().map(|t| t.raw_name.clone()).collect(),
            table_names: Some(self.tables.iter().map(|t| t.display_name.clone()).collect()),
            column_names_original: self
                .columns
                .iter()
                .map(|c| (table_ordinal(c.table_index), c.raw_name.clone()))
                .collect(),
            column_names: Some(
                self.columns
                    .iter()
                    .map(|c| (table_ordinal(c.table_index), c.display_name.clone()))
                    .collect(),
            ),
            column_types: self
                .columns
                .iter()
                .map(|c| c.col_type.as_spider().to_string())
                .collect(),
            primary_keys: self
                .primary_keys
                .iter()
                .map(|&k| KeySpec::Single(k))
                .collect(),
            foreign_keys: self.foreign_keys.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_value(record).expect("schema record serializes")
    }
}

fn table_ordinal(index: Option<usize>) -> i64 {
    index.map(|t| t as i64).unwrap_or(-1)
}

/// Canonical display form of a schema identifier: lowercase, underscores to
/// spaces, whitespace runs collapsed.
pub fn normalize_name(raw: &str) -> String {
    raw.replace('_', " ")
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSchema {
    db_id: String,
    table_names_original: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table_names: Option<Vec<String>>,
    column_names_original: Vec<(i64, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    column_names: Option<Vec<(i64, String)>>,
    column_types: Vec<String>,
    #[serde(default)]
    primary_keys: Vec<KeySpec>,
    #[serde(default)]
    foreign_keys: Vec<[usize; 2]>,
}

// Newer Spider releases list composite primary keys as nested arrays.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum KeySpec {
    Single(usize),
    Composite(Vec<usize>),
}

fn build_schema(raw: RawSchema) -> Result<DbSchema> {
    let db_id = raw.db_id;
    let invalid = |message: String| Error::Validation {
        db_id: db_id.clone(),
        message,
    };

    if raw.column_types.len() != raw.column_names_original.len() {
        return Err(invalid(format!(
            "{} column types for {} columns",
            raw.column_types.len(),
            raw.column_names_original.len()
        )));
    }

    let mut tables: Vec<TableDef> = raw
        .table_names_original
        .iter()
        .map(|name| TableDef {
            raw_name: name.clone(),
            display_name: normalize_name(name),
            column_indices: Vec::new(),
        })
        .collect();
    if let Some(t) = tables.iter().find(|t| t.display_name.is_empty()) {
        return Err(invalid(format!("table `{}` has an empty name", t.raw_name)));
    }

    let mut columns = Vec::with_capacity(raw.column_names_original.len());
    for (ordinal, ((table, name), ty)) in raw
        .column_names_original
        .into_iter()
        .zip(&raw.column_types)
        .enumerate()
    {
        let col_type = ColumnType::from_spider(ty)
            .ok_or_else(|| invalid(format!("column {ordinal}: unknown type `{ty}`")))?;
        let table_index = if table < 0 {
            if ordinal != 0 || name != "*" {
                return Err(invalid(format!(
                    "column {ordinal} `{name}` has no table; only `*` at ordinal 0 may"
                )));
            }
            None
        } else {
            let t = table as usize;
            let def = tables.get_mut(t).ok_or_else(|| {
                invalid(format!(
                    "column {ordinal} `{name}` references missing table {t}"
                ))
            })?;
            def.column_indices.push(ordinal);
            Some(t)
        };
        if ordinal == 0 && table_index.is_some() {
            return Err(invalid("column 0 must be `*`".to_string()));
        }
        columns.push(ColumnDef {
            table_index,
            display_name: if table_index.is_none() {
                "*".to_string()
            } else {
                normalize_name(&name)
            },
            raw_name: name,
            col_type,
        });
    }
    if columns.is_empty() && !tables.is_empty() {
        return Err(invalid("missing `*` column".to_string()));
    }

    let mut primary_keys = Vec::new();
    for key in raw.primary_keys {
        match key {
            KeySpec::Single(k) => primary_keys.push(k),
            KeySpec::Composite(ks) => primary_keys.extend(ks),
        }
    }
    for &k in &primary_keys {
        if k == 0 || k >= columns.len() {
            return Err(invalid(format!("primary key references column {k}")));
        }
    }

    let mut foreign_keys = Vec::with_capacity(raw.foreign_keys.len());
    for [a, b] in raw.foreign_keys {
        let (ta, tb) = match (
            columns.get(a).and_then(|c| c.table_index),
            columns.get(b).and_then(|c| c.table_index),
        ) {
            (Some(ta), Some(tb)) => (ta, tb),
            _ => {
                return Err(invalid(format!(
                    "foreign key ({a}, {b}) references a missing column"
                )))
            }
        };
        if ta == tb {
            return Err(invalid(format!(
                "foreign key ({a}, {b}) links columns of the same table"
            )));
        }
        foreign_keys.push((a, b));
    }

    Ok(DbSchema {
        db_id,
        tables,
        columns,
        primary_keys,
        foreign_keys,
    })
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses schemas from the text of a `tables.json` file.
pub fn parse_schemas(text: &str) -> Result<BTreeMap<String, DbSchema>> {
    let records: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| Error::format(None, e.to_string()))?;
    let mut schemas = BTreeMap::new();
    for (i, record) in records.into_iter().enumerate() {
        let name = record
            .get("db_id")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .unwrap_or_else(|| format!("record {i}"));
        let raw: RawSchema = serde_json::from_value(record)
            .map_err(|e| Error::format(name.clone(), e.to_string()))?;
        let schema = build_schema(raw)?;
        if schemas.contains_key(&schema.db_id) {
            return Err(Error::Validation {
                db_id: schema.db_id,
                message: "duplicate db_id".to_string(),
            });
        }
        schemas.insert(schema.db_id.clone(), schema);
    }
    Ok(schemas)
}

pub fn load_schemas(path: impl AsRef<Path>) -> Result<BTreeMap<String, DbSchema>> {
    let path = path.as_ref();
    parse_schemas(&read_file(path)?).map_err(|e| match e {
        Error::Format { context, message } => Error::Format {
            context: Some(match context {
                Some(c) => format!("{} ({c})", path.display()),
                None => path.display().to_string(),
            }),
            message,
        },
        other => other,
    })
}

/// Serializes a schema map back into `tables.json` layout.
pub fn schemas_to_json(schemas: &BTreeMap<String, DbSchema>) -> String {
    let records: Vec<_> = schemas.values().map(DbSchema::to_spider_json).collect();
    serde_json::to_string_pretty(&records).expect("schemas serialize")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub question: String,
    #[serde(rename = "query")]
    pub gold_sql: String,
    pub db_id: String,
}

pub fn parse_examples(text: &str, schemas: &BTreeMap<String, DbSchema>) -> Result<Vec<Example>> {
    let examples: Vec<Example> =
        serde_json::from_str(text).map_err(|e| Error::format(None, e.to_string()))?;
    for (index, ex) in examples.iter().enumerate() {
        if !schemas.contains_key(&ex.db_id) {
            return Err(Error::UnknownDatabase {
                index,
                db_id: ex.db_id.clone(),
            });
        }
    }
    Ok(examples)
}

pub fn load_examples(
    path: impl AsRef<Path>,
    schemas: &BTreeMap<String, DbSchema>,
) -> Result<Vec<Example>> {
    let path = path.as_ref();
    parse_examples(&read_file(path)?, schemas).map_err(|e| match e {
        Error::Format { message, .. } => Error::format(path.display().to_string(), message),
        other => other,
    })
}

/// Location of the SQLite file for `db_id` under a Spider database root.
pub fn database_path(root: &Path, db_id: &str) -> std::path::PathBuf {
    root.join(db_id).join(format!("{db_id}.sqlite"))
}

pub fn open_database(schema: &DbSchema, root: impl AsRef<Path>) -> Result<Database> {
    Database::open(&database_path(root.as_ref(), &schema.db_id), &schema.db_id)
}
