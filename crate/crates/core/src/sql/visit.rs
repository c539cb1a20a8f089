use serde::Serialize;

use super::*;
use crate::corpus::{ColumnType, DbSchema};

/// Where a value slot sits, as seen by the value filler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlotContext {
    Column {
        table: Option<usize>,
        column: usize,
        agg: Agg,
        col_type: ColumnType,
    },
    Limit,
}

impl SlotContext {
    /// Whether the slot must hold a number: LIMIT, numeric columns, and
    /// COUNT/SUM/AVG results.
    pub fn is_numeric(&self) -> bool {
        match self {
            SlotContext::Limit => true,
            SlotContext::Column { agg, col_type, .. } => {
                matches!(agg, Agg::Count | Agg::Sum | Agg::Avg) || *col_type == ColumnType::Number
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotInfo {
    pub slot_id: usize,
    pub context: SlotContext,
}

/// Visits every value slot in slot order with the column unit governing it
/// (`None` for LIMIT).
fn walk_slots(q: &mut SqlQuery, f: &mut dyn FnMut(&mut ValueSlot, Option<&ColUnit>)) {
    for join in &mut q.from.joins {
        if let TableSource::Subquery { query, .. } = &mut join.source {
            walk_slots(query, f);
        }
        for cond in &mut join.on {
            walk_condition(cond, f);
        }
    }
    if let Some(w) = &mut q.where_clause {
        walk_tree(w, f);
    }
    if let Some(h) = &mut q.having {
        walk_tree(h, f);
    }
    if let Some(limit) = &mut q.limit {
        f(limit, None);
    }
    if let Some(set) = &mut q.set_op {
        walk_slots(&mut set.query, f);
    }
}

fn walk_tree(tree: &mut CondTree, f: &mut dyn FnMut(&mut ValueSlot, Option<&ColUnit>)) {
    match tree {
        CondTree::Leaf(c) => walk_condition(c, f),
        CondTree::And(xs) | CondTree::Or(xs) => xs.iter_mut().for_each(|x| walk_tree(x, f)),
    }
}

fn walk_condition(cond: &mut Condition, f: &mut dyn FnMut(&mut ValueSlot, Option<&ColUnit>)) {
    let governing = cond.left.as_ref().map(|l| l.left.clone());
    let operands: Vec<&mut Operand> = match &mut cond.rhs {
        Rhs::Single(o) => vec![o],
        Rhs::Between(a, b) => vec![a, b],
    };
    for operand in operands {
        match operand {
            Operand::Value(v) => f(v, governing.as_ref()),
            Operand::Subquery(sub) => walk_slots(sub, f),
            Operand::Column(_) => {}
        }
    }
}

/// Assigns slot ids 0, 1, ... in traversal order.
pub fn renumber_slots(q: &mut SqlQuery) {
    let mut next = 0;
    walk_slots(q, &mut |slot, _| {
        slot.slot_id = next;
        next += 1;
    });
}

/// Replaces every literal with a mask slot, keeping slot ids.
pub fn mask_values(q: &SqlQuery) -> SqlQuery {
    let mut masked = q.clone();
    walk_slots(&mut masked, &mut |slot, _| slot.kind = SlotKind::Mask);
    masked
}

pub fn literal_count(q: &SqlQuery) -> usize {
    let mut n = 0;
    walk_slots(&mut q.clone(), &mut |slot, _| {
        if !slot.is_mask() {
            n += 1
        }
    });
    n
}

pub fn mask_count(q: &SqlQuery) -> usize {
    let mut n = 0;
    walk_slots(&mut q.clone(), &mut |slot, _| {
        if slot.is_mask() {
            n += 1
        }
    });
    n
}

/// Copy of `q` with each slot for which `fill` returns a kind rewritten.
pub fn replace_slots(
    q: &SqlQuery,
    fill: &mut dyn FnMut(&ValueSlot) -> Option<SlotKind>,
) -> SqlQuery {
    let mut out = q.clone();
    walk_slots(&mut out, &mut |slot, _| {
        if let Some(kind) = fill(slot) {
            slot.kind = kind;
        }
    });
    out
}

/// Every slot in slot order, literals and masks alike.
pub fn value_slots(q: &SqlQuery) -> Vec<ValueSlot> {
    let mut out = Vec::new();
    walk_slots(&mut q.clone(), &mut |slot, _| out.push(slot.clone()));
    out
}

/// Mask slots with their governing column context, in slot order.
pub fn collect_value_slots(q: &SqlQuery, schema: &DbSchema) -> Vec<SlotInfo> {
    let mut out = Vec::new();
    walk_slots(&mut q.clone(), &mut |slot, unit| {
        if !slot.is_mask() {
            return;
        }
        let context = match unit {
            None => SlotContext::Limit,
            Some(unit) => {
                let column = unit.column.column;
                let col_type = schema
                    .columns
                    .get(column)
                    .map(|c| {
                        if c.is_star() {
                            ColumnType::Number
                        } else {
                            c.col_type
                        }
                    })
                    .unwrap_or(ColumnType::Other);
                SlotContext::Column {
                    table: schema.table_of(column).or(unit.column.table),
                    column,
                    agg: unit.agg,
                    col_type,
                }
            }
        };
        out.push(SlotInfo {
            slot_id: slot.slot_id,
            context,
        });
    });
    out
}

/// Every bound column reference in the query, nested queries included.
pub fn column_refs(q: &SqlQuery) -> Vec<&ColumnRef> {
    let mut out = Vec::new();
    query_columns(q, &mut out);
    out
}

fn query_columns<'a>(q: &'a SqlQuery, out: &mut Vec<&'a ColumnRef>) {
    for item in &q.select.items {
        expr_columns(&item.expr, out);
    }
    for join in &q.from.joins {
        if let TableSource::Subquery { query, .. } = &join.source {
            query_columns(query, out);
        }
        for cond in &join.on {
            condition_columns(cond, out);
        }
    }
    for tree in q.where_clause.iter().chain(q.having.iter()) {
        for cond in tree.leaves() {
            condition_columns(cond, out);
        }
    }
    out.extend(q.group_by.iter());
    for item in &q.order_by {
        expr_columns(&item.expr, out);
    }
    if let Some(set) = &q.set_op {
        query_columns(&set.query, out);
    }
}

fn expr_columns<'a>(expr: &'a ValueExpr, out: &mut Vec<&'a ColumnRef>) {
    out.extend(expr.units().map(|u| &u.column));
}

fn condition_columns<'a>(cond: &'a Condition, out: &mut Vec<&'a ColumnRef>) {
    if let Some(left) = &cond.left {
        expr_columns(left, out);
    }
    let operands: Vec<&Operand> = match &cond.rhs {
        Rhs::Single(o) => vec![o],
        Rhs::Between(a, b) => vec![a, b],
    };
    for operand in operands {
        match operand {
            Operand::Column(e) => expr_columns(e, out),
            Operand::Subquery(sub) => query_columns(sub, out),
            Operand::Value(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_schemas;

    fn school() -> DbSchema {
        let text = r#"[{
            "db_id": "school",
            "table_names_original": ["student"],
            "column_names_original": [[-1, "*"], [0, "name"], [0, "age"]],
            "column_types": ["text", "text", "number"],
            "primary_keys": [],
            "foreign_keys": []
        }]"#;
        parse_schemas(text).unwrap().remove("school").unwrap()
    }

    #[test]
    fn masks_every_literal() {
        let s = school();
        let q = parse_sql(
            "SELECT name FROM student WHERE name = 'Spanish' LIMIT 3",
            &s,
        )
        .unwrap();
        let m = mask_values(&q);
        assert_eq!(
            print_sql(&m),
            "SELECT name FROM student WHERE name = <mask> LIMIT <mask>"
        );
        assert_eq!(mask_values(&m), m);
        let plain = parse_sql("SELECT name FROM student", &s).unwrap();
        assert_eq!(mask_values(&plain), plain);
    }

    #[test]
    fn slot_contexts_in_order() {
        let s = school();
        let q = parse_sql(
            "SELECT name FROM student WHERE age > <mask> AND name = <mask>",
            &s,
        )
        .unwrap();
        let slots = collect_value_slots(&q, &s);
        assert_eq!(slots.len(), 2);
        assert_eq!(slots[0].slot_id, 0);
        assert!(slots[0].context.is_numeric());
        assert_eq!(
            slots[1].context,
            SlotContext::Column {
                table: Some(0),
                column: 1,
                agg: Agg::None,
                col_type: ColumnType::Text
            }
        );

        let q = parse_sql("SELECT name FROM student LIMIT <mask>", &s).unwrap();
        let slots = collect_value_slots(&q, &s);
        assert_eq!(
            slots,
            vec![SlotInfo {
                slot_id: 0,
                context: SlotContext::Limit
            }]
        );
    }

    #[test]
    fn count_slots_are_numeric() {
        let s = school();
        let q = parse_sql(
            "SELECT name FROM student GROUP BY name HAVING count(*) > <mask>",
            &s,
        )
        .unwrap();
        let slots = collect_value_slots(&q, &s);
        assert!(slots[0].context.is_numeric());
    }
}
