use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rusqlite::types::ValueRef;
use rusqlite::{Connection, OpenFlags, ToSql};

use crate::error::{Error, Result};

/// One result cell.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Null,
    Integer(i64),
    Real(f64),
    Text(String),
    Blob(Vec<u8>),
}

impl CellValue {
    fn from_ref(value: ValueRef<'_>) -> Self {
        match value {
            ValueRef::Null => CellValue::Null,
            ValueRef::Integer(i) => CellValue::Integer(i),
            ValueRef::Real(r) => CellValue::Real(r),
            ValueRef::Text(t) => CellValue::Text(String::from_utf8_lossy(t).into_owned()),
            ValueRef::Blob(b) => CellValue::Blob(b.to_vec()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            CellValue::Integer(i) => Some(i as f64),
            CellValue::Real(r) => Some(r),
            _ => None,
        }
    }

    /// Text rendering the way SQLite casts a value to TEXT.
    pub fn to_text(&self) -> Option<String> {
        match self {
            CellValue::Null => None,
            CellValue::Integer(i) => Some(i.to_string()),
            CellValue::Real(r) => Some(r.to_string()),
            CellValue::Text(s) => Some(s.clone()),
            CellValue::Blob(b) => Some(String::from_utf8_lossy(b).into_owned()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rows {
    pub column_count: usize,
    pub rows: Vec<Vec<CellValue>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryOutcome {
    Rows(Rows),
    TimedOut,
}

/// Read-only handle on one corpus database.
///
/// Handles are not shared across threads; each worker opens its own.
pub struct Database {
    conn: Connection,
    db_id: String,
}

impl std::fmt::Debug for Database {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Database")
            .field("db_id", &self.db_id)
            .finish()
    }
}

impl Database {
    pub fn open(path: &Path, db_id: &str) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Unavailable(format!(
                "{db_id}: no database file at {}",
                path.display()
            )));
        }
        let conn = Connection::open_with_flags(
            path,
            OpenFlags::SQLITE_OPEN_READ_ONLY | OpenFlags::SQLITE_OPEN_NO_MUTEX,
        )
        .map_err(|e| Error::Unavailable(format!("{db_id}: {e}")))?;
        conn.pragma_update(None, "query_only", true)?;
        Ok(Database {
            conn,
            db_id: db_id.to_string(),
        })
    }

    pub fn db_id(&self) -> &str {
        &self.db_id
    }

    pub fn query(&self, sql: &str, params: &[&dyn ToSql]) -> Result<Rows> {
        let mut stmt = self.conn.prepare(sql)?;
        let column_count = stmt.column_count();
        let mut rows = Vec::new();
        let mut cursor = stmt.query(params)?;
        while let Some(row) = cursor.next()? {
            let mut cells = Vec::with_capacity(column_count);
            for i in 0..column_count {
                cells.push(CellValue::from_ref(row.get_ref(i)?));
            }
            rows.push(cells);
        }
        Ok(Rows { column_count, rows })
    }

    /// Runs `sql`, interrupting it once `timeout` has elapsed.
    pub fn query_with_timeout(&self, sql: &str, timeout: Duration) -> Result<QueryOutcome> {
        let fired = Arc::new(AtomicBool::new(false));
        let deadline = Instant::now() + timeout;
        let flag = Arc::clone(&fired);
        self.conn.progress_handler(
            1000,
            Some(move || {
                if Instant::now() >= deadline {
                    flag.store(true, Ordering::Relaxed);
                    true
                } else {
                    false
                }
            }),
        )?;
        let result = self.query(sql, &[]);
        self.conn.progress_handler(0, None::<fn() -> bool>)?;
        match result {
            Err(_) if fired.load(Ordering::Relaxed) => Ok(QueryOutcome::TimedOut),
            other => other.map(QueryOutcome::Rows),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch_db() -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.sqlite");
        let conn = Connection::open(&path).unwrap();
        conn.execute_batch(
            "CREATE TABLE t (a INTEGER, b TEXT); INSERT INTO t VALUES (1, 'x'), (2, NULL);",
        )
        .unwrap();
        (dir, path)
    }

    #[test]
    fn reads_and_rejects_writes() {
        let (_dir, path) = scratch_db();
        let db = Database::open(&path, "t").unwrap();
        let rows = db.query("SELECT COUNT(*) FROM t", &[]).unwrap();
        assert_eq!(rows.rows, vec![vec![CellValue::Integer(2)]]);
        assert!(db.query("INSERT INTO t VALUES (3, 'y')", &[]).is_err());
        assert!(db.query("DELETE FROM t", &[]).is_err());
        let rows = db.query("SELECT COUNT(*) FROM t", &[]).unwrap();
        assert_eq!(rows.rows, vec![vec![CellValue::Integer(2)]]);
    }

    #[test]
    fn missing_file_is_unavailable() {
        let dir = tempfile::tempdir().unwrap();
        let err = Database::open(&dir.path().join("nope.sqlite"), "nope").unwrap_err();
        assert!(matches!(err, Error::Unavailable(_)));
    }

    #[test]
    fn long_query_times_out() {
        let (_dir, path) = scratch_db();
        let db = Database::open(&path, "t").unwrap();
        let runaway = "WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c) \
                       SELECT COUNT(*) FROM c";
        let outcome = db
            .query_with_timeout(runaway, Duration::from_millis(50))
            .unwrap();
        assert_eq!(outcome, QueryOutcome::TimedOut);
        // The handler is cleared afterwards.
        let outcome = db
            .query_with_timeout("SELECT b FROM t ORDER BY a", Duration::from_secs(5))
            .unwrap();
        assert_eq!(
            outcome,
            QueryOutcome::Rows(Rows {
                column_count: 1,
                rows: vec![vec![CellValue::Text("x".into())], vec![CellValue::Null]],
            })
        );
    }
}
