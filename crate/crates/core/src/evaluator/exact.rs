//! Value-agnostic exact set match.
//!
//! Each query is reduced to a canonical form in which every literal becomes
//! the same token, select items, tables, group-by columns and the operands of
//! each AND/OR level become sets, and ORDER BY stays a sequence. Two queries
//! match when their canonical forms are equal. Join conditions and aliases
//! do not take part; tables are compared as a set.

use std::collections::BTreeSet;

use crate::sql::*;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Unit {
    agg: Agg,
    distinct: bool,
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Expr {
    left: Unit,
    arith: Option<(ArithOp, Unit)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Value {
    Literal,
    Column(Expr),
    Query(Box<Canonical>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Right {
    Single(Value),
    Between(Value, Value),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Cond {
    left: Option<Expr>,
    op: CmpOp,
    right: Right,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Tree {
    Leaf(Cond),
    And(BTreeSet<Tree>),
    Or(BTreeSet<Tree>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Source {
    Table(usize),
    Query(Box<Canonical>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Canonical {
    distinct: bool,
    select: BTreeSet<(Agg, Expr)>,
    tables: BTreeSet<Source>,
    where_clause: Option<Tree>,
    group_by: BTreeSet<usize>,
    having: Option<Tree>,
    order_by: Vec<(Expr, Direction)>,
    limit: bool,
    set_op: Option<(SetOp, Box<Canonical>)>,
}

fn unit(u: &ColUnit) -> Unit {
    Unit {
        agg: u.agg,
        distinct: u.distinct,
        column: u.column.column,
    }
}

fn expr(e: &ValueExpr) -> Expr {
    Expr {
        left: unit(&e.left),
        arith: e.arith.as_ref().map(|(op, u)| (*op, unit(u))),
    }
}

fn value(o: &Operand) -> Value {
    match o {
        Operand::Value(_) => Value::Literal,
        Operand::Column(e) => Value::Column(expr(e)),
        Operand::Subquery(q) => Value::Query(Box::new(canonical(q))),
    }
}

fn tree(t: &CondTree) -> Tree {
    match t {
        CondTree::Leaf(c) => Tree::Leaf(Cond {
            left: c.left.as_ref().map(expr),
            op: c.op,
            right: match &c.rhs {
                Rhs::Single(o) => Right::Single(value(o)),
                Rhs::Between(a, b) => Right::Between(value(a), value(b)),
            },
        }),
        CondTree::And(xs) => Tree::And(xs.iter().map(tree).collect()),
        CondTree::Or(xs) => Tree::Or(xs.iter().map(tree).collect()),
    }
}

pub(crate) fn canonical(q: &SqlQuery) -> Canonical {
    Canonical {
        distinct: q.select.distinct,
        select: q
            .select
            .items
            .iter()
            .map(|item| (item.agg, expr(&item.expr)))
            .collect(),
        tables: q
            .from
            .joins
            .iter()
            .map(|j| match &j.source {
                TableSource::Table { table, .. } => Source::Table(*table),
                TableSource::Subquery { query, .. } => Source::Query(Box::new(canonical(query))),
            })
            .collect(),
        where_clause: q.where_clause.as_ref().map(tree),
        group_by: q.group_by.iter().map(|c| c.column).collect(),
        having: q.having.as_ref().map(tree),
        order_by: q
            .order_by
            .iter()
            .map(|o| (expr(&o.expr), o.direction))
            .collect(),
        limit: q.limit.is_some(),
        set_op: q
            .set_op
            .as_ref()
            .map(|s| (s.op, Box::new(canonical(&s.query)))),
    }
}

/// Clause-level exact set match with all literal values ignored.
pub fn exact_set_match(pred: &SqlQuery, gold: &SqlQuery) -> bool {
    canonical(pred) == canonical(gold)
}

/// Names of the components on which two queries differ, for reports.
pub fn mismatched_components(pred: &SqlQuery, gold: &SqlQuery) -> Vec<&'static str> {
    let (p, g) = (canonical(pred), canonical(gold));
    let mut out = Vec::new();
    if p.distinct != g.distinct || p.select != g.select {
        out.push("select");
    }
    if p.tables != g.tables {
        out.push("from");
    }
    if p.where_clause != g.where_clause {
        out.push("where");
    }
    if p.group_by != g.group_by {
        out.push("group_by");
    }
    if p.having != g.having {
        out.push("having");
    }
    if p.order_by != g.order_by {
        out.push("order_by");
    }
    if p.limit != g.limit {
        out.push("limit");
    }
    if p.set_op != g.set_op {
        out.push("set_op");
    }
    out
}
