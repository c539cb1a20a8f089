//! Hardness levels by SQL component counting.
//!
//! Three tallies are taken from the top-level query:
//!
//! | tally  | counts |
//! |--------|--------|
//! | comp1  | +1 each for WHERE, GROUP BY, ORDER BY, LIMIT present; + (FROM sources - 1); + OR connectives in WHERE/HAVING; + LIKE/NOT LIKE conditions in WHERE/HAVING |
//! | comp2  | sub-queries used as condition operands in ON/WHERE/HAVING, + 1 for a set operator |
//! | others | +1 if aggregates > 1; +1 if select items > 1; +1 if WHERE conditions > 1; +1 if GROUP BY columns > 1 |
//!
//! The aggregate tally follows the reference evaluation script literally:
//! aggregated select items (outer aggregate, or on the first operand), plus
//! NOT IN / NOT LIKE conditions in WHERE, plus aggregated operands in
//! ORDER BY and GROUP BY, plus one per AND/OR connective in HAVING.
//!
//! Decision table (first matching row wins):
//!
//! | level      | condition |
//! |------------|-----------|
//! | easy       | comp1 <= 1, others == 0, comp2 == 0 |
//! | medium     | (others <= 2, comp1 <= 1, comp2 == 0) or (comp1 <= 2, others < 2, comp2 == 0) |
//! | hard       | (others > 2, comp1 <= 2, comp2 == 0) or (2 < comp1 <= 3, others <= 2, comp2 == 0) or (comp1 <= 1, others == 0, comp2 <= 1) |
//! | extra_hard | otherwise |
//!
//! Table version: 1.

use serde::{Deserialize, Serialize};

use crate::sql::{CmpOp, CondTree, Operand, Rhs, SqlQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hardness {
    Easy,
    Medium,
    Hard,
    ExtraHard,
}

impl Hardness {
    pub const ALL: [Hardness; 4] = [
        Hardness::Easy,
        Hardness::Medium,
        Hardness::Hard,
        Hardness::ExtraHard,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Hardness::Easy => "easy",
            Hardness::Medium => "medium",
            Hardness::Hard => "hard",
            Hardness::ExtraHard => "extra",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComponentCounts {
    pub comp1: usize,
    pub comp2: usize,
    pub others: usize,
}

fn like_count(tree: &CondTree) -> usize {
    tree.leaves()
        .iter()
        .filter(|c| matches!(c.op, CmpOp::Like | CmpOp::NotLike))
        .count()
}

pub fn component_counts(q: &SqlQuery) -> ComponentCounts {
    let mut comp1 = 0;
    comp1 += q.where_clause.is_some() as usize;
    comp1 += !q.group_by.is_empty() as usize;
    comp1 += !q.order_by.is_empty() as usize;
    comp1 += q.limit.is_some() as usize;
    comp1 += q.from.joins.len().saturating_sub(1);
    for tree in q.where_clause.iter().chain(q.having.iter()) {
        comp1 += tree.or_count();
        comp1 += like_count(tree);
    }

    let conds = q
        .from
        .joins
        .iter()
        .flat_map(|j| j.on.iter())
        .chain(q.where_clause.iter().flat_map(|w| w.leaves()))
        .chain(q.having.iter().flat_map(|h| h.leaves()));
    let mut comp2 = 0;
    for cond in conds {
        let operands: Vec<&Operand> = match &cond.rhs {
            Rhs::Single(o) => vec![o],
            Rhs::Between(a, b) => vec![a, b],
        };
        comp2 += operands
            .iter()
            .filter(|o| matches!(o, Operand::Subquery(_)))
            .count();
    }
    comp2 += q.set_op.is_some() as usize;

    let mut aggs = q
        .select
        .items
        .iter()
        .filter(|i| i.agg.is_some() || i.expr.left.agg.is_some())
        .count();
    if let Some(w) = &q.where_clause {
        aggs += w
            .leaves()
            .iter()
            .filter(|c| matches!(c.op, CmpOp::NotIn | CmpOp::NotLike))
            .count();
    }
    aggs += q
        .order_by
        .iter()
        .flat_map(|o| o.expr.units())
        .filter(|u| u.agg.is_some())
        .count();
    if let Some(h) = &q.having {
        aggs += h.connective_count();
    }

    let mut others = 0;
    others += (aggs > 1) as usize;
    others += (q.select.items.len() > 1) as usize;
    others += q
        .where_clause
        .as_ref()
        .is_some_and(|w| w.leaves().len() > 1) as usize;
    others += (q.group_by.len() > 1) as usize;

    ComponentCounts {
        comp1,
        comp2,
        others,
    }
}

pub fn classify_hardness(gold: &SqlQuery) -> Hardness {
    let ComponentCounts {
        comp1,
        comp2,
        others,
    } = component_counts(gold);
    if comp1 <= 1 && others == 0 && comp2 == 0 {
        Hardness::Easy
    } else if (others <= 2 && comp1 <= 1 && comp2 == 0) || (comp1 <= 2 && others < 2 && comp2 == 0)
    {
        Hardness::Medium
    } else if (others > 2 && comp1 <= 2 && comp2 == 0)
        || (2 < comp1 && comp1 <= 3 && others <= 2 && comp2 == 0)
        || (comp1 <= 1 && others == 0 && comp2 <= 1)
    {
        Hardness::Hard
    } else {
        Hardness::ExtraHard
    }
}
