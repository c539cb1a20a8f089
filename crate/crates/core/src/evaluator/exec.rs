use std::cmp::Ordering;
use std::time::Duration;

use serde::Serialize;

use crate::corpus::{CellValue, Database, QueryOutcome, Rows};
use crate::error::{Error, Result};
use crate::sql::{tokenize, Token};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

const REL_TOL: f64 = 1e-6;
const ABS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecVerdict {
    pub matched: bool,
    pub timed_out: bool,
    /// Why the prediction did not execute, when it did not.
    pub error: Option<String>,
}

/// Whether `sql` has an ORDER BY outside any parentheses.
pub fn has_top_level_order_by(sql: &str) -> bool {
    let Ok(tokens) = tokenize(sql) else {
        return sql.to_lowercase().contains("order by");
    };
    let mut depth = 0i32;
    tokens.windows(2).any(|w| {
        match &w[0] {
            Token::Sym("(") => depth += 1,
            Token::Sym(")") => depth -= 1,
            _ => {}
        }
        depth == 0 && w[0].is_kw("order") && w[1].is_kw("by")
    })
}

fn numbers_equal(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= ABS_TOL.max(REL_TOL * a.abs().max(b.abs()))
}

pub fn cells_equal(a: &CellValue, b: &CellValue) -> bool {
    match (a, b) {
        (CellValue::Null, CellValue::Null) => true,
        (CellValue::Text(x), CellValue::Text(y)) => x == y,
        (CellValue::Blob(x), CellValue::Blob(y)) => x == y,
        _ => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => numbers_equal(x, y),
            _ => false,
        },
    }
}

fn rank(c: &CellValue) -> u8 {
    match c {
        CellValue::Null => 0,
        CellValue::Integer(_) | CellValue::Real(_) => 1,
        CellValue::Text(_) => 2,
        CellValue::Blob(_) => 3,
    }
}

fn cell_order(a: &CellValue, b: &CellValue) -> Ordering {
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (CellValue::Text(x), CellValue::Text(y)) => x.cmp(y),
        (CellValue::Blob(x), CellValue::Blob(y)) => x.cmp(y),
        _ => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            _ => Ordering::Equal,
        },
    })
}

fn row_order(a: &[CellValue], b: &[CellValue]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| cell_order(x, y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

fn rows_equal(a: &[Vec<CellValue>], b: &[Vec<CellValue>]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| cells_equal(p, q)))
}

/// Compares two results positionally by column. Rows are compared in order
/// when `ordered`, otherwise as multisets.
pub fn results_match(gold: &Rows, pred: &Rows, ordered: bool) -> bool {
    if gold.column_count != pred.column_count || gold.rows.len() != pred.rows.len() {
        return false;
    }
    if ordered {
        return rows_equal(&gold.rows, &pred.rows);
    }
    let mut g = gold.rows.clone();
    let mut p = pred.rows.clone();
    g.sort_by(|a, b| row_order(a, b));
    p.sort_by(|a, b| row_order(a, b));
    rows_equal(&g, &p)
}

/// Executes both queries and compares their results. The gold query must
/// run; a prediction that fails or times out scores false.
pub fn execution_verdict(
    pred_sql: &str,
    gold_sql: &str,
    db: &Database,
    timeout: Duration,
) -> Result<ExecVerdict> {
    let gold = match db.query_with_timeout(gold_sql, timeout) {
        Ok(QueryOutcome::Rows(rows)) => rows,
        Ok(QueryOutcome::TimedOut) => {
            return Err(Error::Corpus {
                db_id: db.db_id().to_string(),
                message: format!("timed out: {gold_sql}"),
            })
        }
        Err(e) => {
            return Err(Error::Corpus {
                db_id: db.db_id().to_string(),
                message: format!("{e}: {gold_sql}"),
            })
        }
    };
    let verdict = match db.query_with_timeout(pred_sql, timeout) {
        Ok(QueryOutcome::Rows(pred)) => ExecVerdict {
            matched: results_match(&gold, &pred, has_top_level_order_by(gold_sql)),
            timed_out: false,
            error: None,
        },
        Ok(QueryOutcome::TimedOut) => ExecVerdict {
            matched: false,
            timed_out: true,
            error: Some("timed out".to_string()),
        },
        Err(e) => ExecVerdict {
            matched: false,
            timed_out: false,
            error: Some(e.to_string()),
        },
    };
    Ok(verdict)
}

pub fn execution_match(pred_sql: &str, gold_sql: &str, db: &Database) -> Result<bool> {
    execution_verdict(pred_sql, gold_sql, db, DEFAULT_TIMEOUT).map(|v| v.matched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rows(data: &[&[CellValue]]) -> Rows {
        Rows {
            column_count: data.first().map_or(1, |r| r.len()),
            rows: data.iter().map(|r| r.to_vec()).collect(),
        }
    }

    #[test]
    fn numeric_tolerance() {
        assert!(cells_equal(&CellValue::Integer(3), &CellValue::Real(3.0)));
        assert!(cells_equal(
            &CellValue::Real(1.0),
            &CellValue::Real(1.0 + 1e-9)
        ));
        assert!(!cells_equal(&CellValue::Real(1.0), &CellValue::Real(1.001)));
        assert!(cells_equal(&CellValue::Real(0.0), &CellValue::Real(1e-10)));
        assert!(!cells_equal(
            &CellValue::Text("3".into()),
            &CellValue::Integer(3)
        ));
        assert!(cells_equal(&CellValue::Null, &CellValue::Null));
        assert!(!cells_equal(&CellValue::Null, &CellValue::Integer(0)));
    }

    #[test]
    fn order_matters_only_when_ordered() {
        let a = rows(&[&[CellValue::Integer(1)], &[CellValue::Integer(2)]]);
        let b = rows(&[&[CellValue::Integer(2)], &[CellValue::Integer(1)]]);
        assert!(results_match(&a, &b, false));
        assert!(!results_match(&a, &b, true));
    }

    #[test]
    fn multiset_not_set() {
        let a = rows(&[&[CellValue::Integer(1)], &[CellValue::Integer(1)]]);
        let b = rows(&[&[CellValue::Integer(1)]]);
        assert!(!results_match(&a, &b, false));
    }

    #[test]
    fn detects_top_level_order_by() {
        assert!(has_top_level_order_by("SELECT a FROM t ORDER BY a"));
        assert!(!has_top_level_order_by(
            "SELECT a FROM t WHERE a IN (SELECT b FROM s ORDER BY b LIMIT 1)"
        ));
        assert!(!has_top_level_order_by("SELECT a FROM t"));
    }

    fn cell() -> impl Strategy<Value = CellValue> {
        prop_oneof![
            Just(CellValue::Null),
            (-5i64..5).prop_map(CellValue::Integer),
            (-5i64..5).prop_map(|i| CellValue::Real(i as f64 / 2.0)),
            "[ab]{0,2}".prop_map(CellValue::Text),
        ]
    }

    proptest! {
        #[test]
        fn unordered_comparison_ignores_row_permutation(
            data in prop::collection::vec(prop::collection::vec(cell(), 2), 0..8),
            seed in any::<u64>(),
        ) {
            let gold = Rows { column_count: 2, rows: data.clone() };
            let mut shuffled = data;
            // Deterministic permutation from the seed.
            let n = shuffled.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            let pred = Rows { column_count: 2, rows: shuffled };
            prop_assert!(results_match(&gold, &pred, false));
            prop_assert!(results_match(&pred, &gold, false));
        }
    }
}
