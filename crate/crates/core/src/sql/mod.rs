//! Clause-level intermediate representation for the Spider SQL dialect.
//!
//! Queries are parsed against a [`DbSchema`](crate::corpus::DbSchema) so every
//! column reference is bound to a schema ordinal. Literal values live in
//! [`ValueSlot`]s numbered depth-first, left to right over
//! select, from, where, group by, having, order by, limit and the set operand.

mod lexer;
mod parser;
mod printer;
mod visit;

pub use parser::parse_sql;
pub use printer::{print_sql, print_sql_resolved};
pub use visit::{
    collect_value_slots, column_refs, literal_count, mask_count, mask_values, renumber_slots,
    replace_slots, value_slots, SlotContext, SlotInfo,
};

pub(crate) use lexer::{tokenize, Token};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agg {
    None,
    Max,
    Min,
    Count,
    Sum,
    Avg,
}

impl Agg {
    pub(crate) fn from_keyword(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Some(Agg::Max),
            "min" => Some(Agg::Min),
            "count" => Some(Agg::Count),
            "sum" => Some(Agg::Sum),
            "avg" => Some(Agg::Avg),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Agg::None => "",
            Agg::Max => "MAX",
            Agg::Min => "MIN",
            Agg::Count => "COUNT",
            Agg::Sum => "SUM",
            Agg::Avg => "AVG",
        }
    }

    pub fn is_some(self) -> bool {
        self != Agg::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

/// A bound column. `column` 0 is `*`; `table` is the owning table, or for a
/// qualified `T1.*` the table behind the qualifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnRef {
    pub column: usize,
    /// Raw schema name, `*` for the star column.
    pub name: String,
    pub table: Option<usize>,
    /// Alias or table name as written before the dot.
    pub qualifier: Option<String>,
}

/// Optionally aggregated column, the operand of a value expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColUnit {
    pub agg: Agg,
    pub distinct: bool,
    pub column: ColumnRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValueExpr {
    pub left: ColUnit,
    pub arith: Option<(ArithOp, ColUnit)>,
}

impl ValueExpr {
    pub fn column(column: ColumnRef) -> Self {
        ValueExpr {
            left: ColUnit {
                agg: Agg::None,
                distinct: false,
                column,
            },
            arith: None,
        }
    }

    pub fn units(&self) -> impl Iterator<Item = &ColUnit> {
        std::iter::once(&self.left).chain(self.arith.as_ref().map(|(_, u)| u))
    }
}

/// A select-list entry. An aggregate wrapping the whole expression is held
/// in `agg`; aggregates inside arithmetic stay on the operands.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectItem {
    pub agg: Agg,
    pub expr: ValueExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Select {
    pub distinct: bool,
    pub items: Vec<SelectItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TableSource {
    Table {
        table: usize,
        name: String,
        alias: Option<String>,
    },
    Subquery {
        query: Box<SqlQuery>,
        alias: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Join {
    pub source: TableSource,
    /// AND-joined `ON` conditions; empty for the first source and for
    /// cross joins.
    pub on: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct From {
    pub joins: Vec<Join>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Gt,
    Lt,
    Ge,
    Le,
    Between,
    In,
    NotIn,
    Like,
    NotLike,
    Exists,
}

impl CmpOp {
    pub fn keyword(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Between => "BETWEEN",
            CmpOp::In => "IN",
            CmpOp::NotIn => "NOT IN",
            CmpOp::Like => "LIKE",
            CmpOp::NotLike => "NOT LIKE",
            CmpOp::Exists => "EXISTS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SlotKind {
    Str(String),
    /// Numeric literal kept in its source spelling.
    Num(String),
    Mask,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValueSlot {
    pub kind: SlotKind,
    pub slot_id: usize,
}

impl ValueSlot {
    pub fn is_mask(&self) -> bool {
        self.kind == SlotKind::Mask
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Value(ValueSlot),
    Column(ValueExpr),
    Subquery(Box<SqlQuery>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rhs {
    Single(Operand),
    Between(Operand, Operand),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    /// `None` only for `EXISTS`.
    pub left: Option<ValueExpr>,
    pub op: CmpOp,
    pub rhs: Rhs,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[allow(clippy::large_enum_variant)]
pub enum CondTree {
    Leaf(Condition),
    And(Vec<CondTree>),
    Or(Vec<CondTree>),
}

impl CondTree {
    pub fn leaves(&self) -> Vec<&Condition> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Condition>) {
        match self {
            CondTree::Leaf(c) => out.push(c),
            CondTree::And(xs) | CondTree::Or(xs) => xs.iter().for_each(|x| x.collect_leaves(out)),
        }
    }

    /// Number of `OR` connectives when the tree is written out flat.
    pub fn or_count(&self) -> usize {
        match self {
            CondTree::Leaf(_) => 0,
            CondTree::And(xs) => xs.iter().map(CondTree::or_count).sum(),
            CondTree::Or(xs) => xs.len() - 1 + xs.iter().map(CondTree::or_count).sum::<usize>(),
        }
    }

    /// Number of `AND`/`OR` connectives when the tree is written out flat.
    pub fn connective_count(&self) -> usize {
        self.leaves().len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderItem {
    pub expr: ValueExpr,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SetOp {
    Union,
    Intersect,
    Except,
}

impl SetOp {
    pub fn keyword(self) -> &'static str {
        match self {
            SetOp::Union => "UNION",
            SetOp::Intersect => "INTERSECT",
            SetOp::Except => "EXCEPT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetOperation {
    pub op: SetOp,
    pub query: Box<SqlQuery>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SqlQuery {
    pub select: Select,
    pub from: From,
    pub where_clause: Option<CondTree>,
    pub group_by: Vec<ColumnRef>,
    pub having: Option<CondTree>,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<ValueSlot>,
    pub set_op: Option<SetOperation>,
}

impl SqlQuery {
    /// Sub-queries nested directly in this query's FROM, WHERE and HAVING
    /// condition operands and FROM sources (not recursively, set operand
    /// excluded).
    pub fn nested_queries(&self) -> Vec<&SqlQuery> {
        let mut out = Vec::new();
        for join in &self.from.joins {
            if let TableSource::Subquery { query, .. } = &join.source {
                out.push(query.as_ref());
            }
        }
        let conds = self
            .from
            .joins
            .iter()
            .flat_map(|j| j.on.iter())
            .chain(self.where_clause.iter().flat_map(|w| w.leaves()))
            .chain(self.having.iter().flat_map(|h| h.leaves()));
        for cond in conds {
            let operands: Vec<&Operand> = match &cond.rhs {
                Rhs::Single(o) => vec![o],
                Rhs::Between(a, b) => vec![a, b],
            };
            for o in operands {
                if let Operand::Subquery(q) = o {
                    out.push(q.as_ref());
                }
            }
        }
        out
    }
}
