use std::fmt::Write;

use super::*;
use crate::corpus::DbSchema;

/// Prints a query in canonical form: uppercase keywords, raw schema
/// identifiers, single-quoted strings, and `<mask>` for mask slots.
pub fn print_sql(query: &SqlQuery) -> String {
    let mut out = String::new();
    Printer { resolve: None }.query(query, &mut out);
    out
}

/// Prints with every column qualified by its owning table's raw name and
/// table aliases dropped. Used for inspection; not executable when a table
/// appears twice.
pub fn print_sql_resolved(query: &SqlQuery, schema: &DbSchema) -> String {
    let mut out = String::new();
    Printer {
        resolve: Some(schema),
    }
    .query(query, &mut out);
    out
}

struct Printer<'a> {
    resolve: Option<&'a DbSchema>,
}

impl Printer<'_> {
    fn query(&self, q: &SqlQuery, out: &mut String) {
        out.push_str("SELECT ");
        if q.select.distinct {
            out.push_str("DISTINCT ");
        }
        for (i, item) in q.select.items.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.select_item(item, out);
        }

        out.push_str(" FROM ");
        for (i, join) in q.from.joins.iter().enumerate() {
            if i > 0 {
                out.push_str(" JOIN ");
            }
            self.source(&join.source, out);
            for (k, cond) in join.on.iter().enumerate() {
                out.push_str(if k == 0 { " ON " } else { " AND " });
                self.condition(cond, out);
            }
        }

        if let Some(w) = &q.where_clause {
            out.push_str(" WHERE ");
            self.cond_tree(w, false, out);
        }
        if !q.group_by.is_empty() {
            out.push_str(" GROUP BY ");
            for (i, col) in q.group_by.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                self.column(col, out);
            }
        }
        if let Some(h) = &q.having {
            out.push_str(" HAVING ");
            self.cond_tree(h, false, out);
        }
        if !q.order_by.is_empty() {
            out.push_str(" ORDER BY ");
            for (i, item) in q.order_by.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                self.value_expr(&item.expr, out);
                if item.direction == Direction::Desc {
                    out.push_str(" DESC");
                }
            }
        }
        if let Some(limit) = &q.limit {
            out.push_str(" LIMIT ");
            slot(limit, out);
        }
        if let Some(set) = &q.set_op {
            let _ = write!(out, " {} ", set.op.keyword());
            self.query(&set.query, out);
        }
    }

    fn source(&self, source: &TableSource, out: &mut String) {
        match source {
            TableSource::Table { name, alias, .. } => {
                out.push_str(name);
                if let (Some(a), None) = (alias, self.resolve) {
                    let _ = write!(out, " AS {a}");
                }
            }
            TableSource::Subquery { query, alias } => {
                out.push('(');
                self.query(query, out);
                out.push(')');
                if let Some(a) = alias {
                    let _ = write!(out, " AS {a}");
                }
            }
        }
    }

    fn select_item(&self, item: &SelectItem, out: &mut String) {
        if item.agg == Agg::None {
            self.value_expr(&item.expr, out);
            return;
        }
        let _ = write!(out, "{}(", item.agg.keyword());
        if item.expr.left.distinct {
            out.push_str("DISTINCT ");
        }
        let mut inner = item.expr.clone();
        inner.left.distinct = false;
        self.value_expr(&inner, out);
        out.push(')');
    }

    fn value_expr(&self, expr: &ValueExpr, out: &mut String) {
        self.col_unit(&expr.left, out);
        if let Some((op, right)) = &expr.arith {
            let _ = write!(out, " {} ", op.symbol());
            self.col_unit(right, out);
        }
    }

    fn col_unit(&self, unit: &ColUnit, out: &mut String) {
        if unit.agg == Agg::None {
            self.column(&unit.column, out);
            return;
        }
        let _ = write!(out, "{}(", unit.agg.keyword());
        if unit.distinct {
            out.push_str("DISTINCT ");
        }
        self.column(&unit.column, out);
        out.push(')');
    }

    fn column(&self, col: &ColumnRef, out: &mut String) {
        let qualifier = match self.resolve {
            Some(schema) => col
                .table
                .or_else(|| schema.table_of(col.column))
                .map(|t| schema.tables[t].raw_name.clone()),
            None => col.qualifier.clone(),
        };
        if let Some(q) = qualifier {
            let _ = write!(out, "{q}.");
        }
        out.push_str(&col.name);
    }

    fn cond_tree(&self, tree: &CondTree, nested: bool, out: &mut String) {
        match tree {
            CondTree::Leaf(c) => self.condition(c, out),
            CondTree::And(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" AND ");
                    }
                    self.cond_tree(x, true, out);
                }
            }
            CondTree::Or(xs) => {
                if nested {
                    out.push('(');
                }
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" OR ");
                    }
                    self.cond_tree(x, false, out);
                }
                if nested {
                    out.push(')');
                }
            }
        }
    }

    fn condition(&self, cond: &Condition, out: &mut String) {
        if let Some(left) = &cond.left {
            self.value_expr(left, out);
            out.push(' ');
        }
        out.push_str(cond.op.keyword());
        out.push(' ');
        match &cond.rhs {
            Rhs::Single(o) => self.operand(o, out),
            Rhs::Between(lo, hi) => {
                self.operand(lo, out);
                out.push_str(" AND ");
                self.operand(hi, out);
            }
        }
    }

    fn operand(&self, operand: &Operand, out: &mut String) {
        match operand {
            Operand::Value(v) => slot(v, out),
            Operand::Column(e) => self.value_expr(e, out),
            Operand::Subquery(q) => {
                out.push('(');
                self.query(q, out);
                out.push(')');
            }
        }
    }
}

fn slot(v: &ValueSlot, out: &mut String) {
    match &v.kind {
        SlotKind::Str(s) => {
            out.push('\'');
            out.push_str(&s.replace('\'', "''"));
            out.push('\'');
        }
        SlotKind::Num(n) => out.push_str(n),
        SlotKind::Mask => out.push_str(super::lexer::MASK_TOKEN),
    }
}
