use super::lexer::{tokenize, Token};
use super::visit::renumber_slots;
use super::*;
use crate::corpus::DbSchema;
use crate::error::{Error, Result};

const RESERVED: &[&str] = &[
    "select",
    "from",
    "where",
    "group",
    "by",
    "having",
    "order",
    "limit",
    "union",
    "intersect",
    "except",
    "join",
    "inner",
    "left",
    "right",
    "outer",
    "cross",
    "on",
    "as",
    "and",
    "or",
    "not",
    "in",
    "like",
    "between",
    "exists",
    "asc",
    "desc",
    "distinct",
    "is",
    "null",
    "window",
    "offset",
    "natural",
    "using",
    "case",
    "when",
    "then",
    "else",
    "end",
    "with",
    "full",
];

fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|r| r.eq_ignore_ascii_case(word))
}

/// Parses one Spider-dialect query and binds it against `schema`.
///
/// Aliases resolve to table ordinals, every column reference is bound, and
/// the `<mask>` token becomes a mask value slot.
pub fn parse_sql(text: &str, schema: &DbSchema) -> Result<SqlQuery> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        schema,
        scopes: Vec::new(),
    };
    let mut query = parser.query()?;
    if let Some(tok) = parser.peek() {
        return Err(Error::grammar(tok.text(), "unexpected trailing input"));
    }
    renumber_slots(&mut query);
    Ok(query)
}

enum SourceKind {
    Table(usize),
    /// Output columns of a FROM sub-query, by underlying raw name.
    Derived(Vec<ColumnRef>),
}

struct ScopeSource {
    alias: Option<String>,
    kind: SourceKind,
}

#[derive(Default)]
struct Frame {
    sources: Vec<ScopeSource>,
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    schema: &'a DbSchema,
    scopes: Vec<Frame>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.pos + offset)
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_kw(kw))
    }

    fn at_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Token::Sym(s)) if *s == sym)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.at_kw(kw);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        let hit = self.at_sym(sym);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn here(&self) -> String {
        self.peek()
            .map(Token::text)
            .unwrap_or_else(|| "<end>".to_string())
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(Error::grammar(
                self.here(),
                format!("expected {}", kw.to_uppercase()),
            ))
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<()> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(Error::grammar(self.here(), format!("expected `{sym}`")))
        }
    }

    fn query(&mut self) -> Result<SqlQuery> {
        self.expect_kw("select")?;
        let select_start = self.pos;
        let from_pos = self.find_from()?;

        // FROM is bound first so the select list can see its aliases.
        self.pos = from_pos + 1;
        self.scopes.push(Frame::default());
        let from = self.parse_from()?;
        let after_from = self.pos;

        self.pos = select_start;
        let select = self.select_list(from_pos)?;
        self.pos = after_from;

        let where_clause = if self.eat_kw("where") {
            Some(self.cond_tree()?)
        } else {
            None
        };

        let mut group_by = Vec::new();
        if self.eat_kw("group") {
            self.expect_kw("by")?;
            loop {
                group_by.push(self.column_ref()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }

        let having = if self.eat_kw("having") {
            Some(self.cond_tree()?)
        } else {
            None
        };

        let mut order_by = Vec::new();
        if self.eat_kw("order") {
            self.expect_kw("by")?;
            loop {
                let expr = self.value_expr()?;
                let direction = if self.eat_kw("desc") {
                    Direction::Desc
                } else {
                    self.eat_kw("asc");
                    Direction::Asc
                };
                order_by.push(OrderItem { expr, direction });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }

        let limit = if self.eat_kw("limit") {
            match self.peek().cloned() {
                Some(Token::Num(n)) => {
                    self.pos += 1;
                    Some(ValueSlot {
                        kind: SlotKind::Num(n),
                        slot_id: 0,
                    })
                }
                Some(Token::Mask) => {
                    self.pos += 1;
                    Some(ValueSlot {
                        kind: SlotKind::Mask,
                        slot_id: 0,
                    })
                }
                _ => {
                    return Err(Error::grammar(
                        self.here(),
                        "LIMIT expects a number or <mask>",
                    ))
                }
            }
        } else {
            None
        };

        self.scopes.pop();

        let set_op = [SetOp::Union, SetOp::Intersect, SetOp::Except]
            .into_iter()
            .find(|op| self.at_kw(op.keyword()));
        let set_op = match set_op {
            Some(op) => {
                self.pos += 1;
                if self.at_kw("all") {
                    return Err(Error::grammar(
                        self.here(),
                        "set operator ALL is not supported",
                    ));
                }
                Some(SetOperation {
                    op,
                    query: Box::new(self.query()?),
                })
            }
            None => None,
        };

        Ok(SqlQuery {
            select,
            from,
            where_clause,
            group_by,
            having,
            order_by,
            limit,
            set_op,
        })
    }

    fn find_from(&self) -> Result<usize> {
        let mut depth = 0usize;
        for (i, tok) in self.tokens.iter().enumerate().skip(self.pos) {
            match tok {
                Token::Sym("(") => depth += 1,
                Token::Sym(")") => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                }
                t if depth == 0 && t.is_kw("from") => return Ok(i),
                t if depth == 0
                    && (t.is_kw("union") || t.is_kw("intersect") || t.is_kw("except")) =>
                {
                    break
                }
                _ => {}
            }
        }
        Err(Error::grammar(self.here(), "SELECT without FROM"))
    }

    fn select_list(&mut self, end: usize) -> Result<Select> {
        let distinct = self.eat_kw("distinct");
        let mut items = Vec::new();
        loop {
            items.push(self.select_item()?);
            if self.pos >= end {
                break;
            }
            self.expect_sym(",")?;
        }
        if self.pos != end {
            return Err(Error::grammar(
                self.here(),
                "unexpected token in select list",
            ));
        }
        Ok(Select { distinct, items })
    }

    fn select_item(&mut self) -> Result<SelectItem> {
        if let Some(agg) = self.agg_call_ahead() {
            let save = self.pos;
            self.pos += 2;
            let distinct = self.eat_kw("distinct");
            let mut inner = self.value_expr()?;
            self.expect_sym(")")?;
            if !self.at_arith() && inner.units().all(|u| !u.agg.is_some()) {
                inner.left.distinct |= distinct;
                return Ok(SelectItem { agg, expr: inner });
            }
            self.pos = save;
        }
        Ok(SelectItem {
            agg: Agg::None,
            expr: self.value_expr()?,
        })
    }

    fn agg_call_ahead(&self) -> Option<Agg> {
        match (self.peek(), self.peek_at(1)) {
            (Some(Token::Ident(name)), Some(Token::Sym("("))) => Agg::from_keyword(name),
            _ => None,
        }
    }

    fn at_arith(&self) -> bool {
        matches!(self.peek(), Some(Token::Sym("+" | "-" | "*" | "/")))
    }

    fn value_expr(&mut self) -> Result<ValueExpr> {
        let left = self.col_unit()?;
        let arith = match self.peek() {
            Some(Token::Sym(s)) if matches!(*s, "+" | "-" | "*" | "/") => {
                let op = match *s {
                    "+" => ArithOp::Add,
                    "-" => ArithOp::Sub,
                    "*" => ArithOp::Mul,
                    _ => ArithOp::Div,
                };
                self.pos += 1;
                Some((op, self.col_unit()?))
            }
            _ => None,
        };
        if self.at_arith() {
            return Err(Error::grammar(
                self.here(),
                "only one arithmetic operator per expression",
            ));
        }
        Ok(ValueExpr { left, arith })
    }

    fn col_unit(&mut self) -> Result<ColUnit> {
        if let Some(agg) = self.agg_call_ahead() {
            self.pos += 2;
            let distinct = self.eat_kw("distinct");
            let column = self.column_ref()?;
            self.expect_sym(")")?;
            return Ok(ColUnit {
                agg,
                distinct,
                column,
            });
        }
        if self.at_sym("(") && !self.peek_at(1).is_some_and(|t| t.is_kw("select")) {
            self.pos += 1;
            let unit = self.col_unit()?;
            self.expect_sym(")")?;
            return Ok(unit);
        }
        Ok(ColUnit {
            agg: Agg::None,
            distinct: false,
            column: self.column_ref()?,
        })
    }

    fn column_ref(&mut self) -> Result<ColumnRef> {
        match self.peek().cloned() {
            Some(Token::Sym("*")) => {
                self.pos += 1;
                Ok(star(None, None))
            }
            Some(Token::Ident(first)) if !is_reserved(&first) => {
                self.pos += 1;
                if self.eat_sym(".") {
                    match self.peek().cloned() {
                        Some(Token::Ident(name)) => {
                            self.pos += 1;
                            self.resolve(Some(&first), &name)
                        }
                        Some(Token::Sym("*")) => {
                            self.pos += 1;
                            let table = self.resolve_qualifier(&first)?;
                            Ok(star(table, Some(first)))
                        }
                        _ => Err(Error::grammar(self.here(), "expected column after `.`")),
                    }
                } else {
                    self.resolve(None, &first)
                }
            }
            _ => Err(Error::grammar(self.here(), "expected a column")),
        }
    }

    /// Finds the source named by `qualifier`, innermost scope first.
    fn find_source(&self, qualifier: &str) -> Option<&ScopeSource> {
        for frame in self.scopes.iter().rev() {
            let by_alias = frame.sources.iter().find(|s| {
                s.alias
                    .as_deref()
                    .is_some_and(|a| a.eq_ignore_ascii_case(qualifier))
            });
            if by_alias.is_some() {
                return by_alias;
            }
            let by_name = frame.sources.iter().find(|s| match s.kind {
                SourceKind::Table(t) => self.schema.tables[t]
                    .raw_name
                    .eq_ignore_ascii_case(qualifier),
                SourceKind::Derived(_) => false,
            });
            if by_name.is_some() {
                return by_name;
            }
        }
        None
    }

    fn resolve_qualifier(&self, qualifier: &str) -> Result<Option<usize>> {
        match self.find_source(qualifier) {
            Some(ScopeSource {
                kind: SourceKind::Table(t),
                ..
            }) => Ok(Some(*t)),
            Some(_) => Ok(None),
            None => Err(Error::Binding(format!(
                "unknown table or alias `{qualifier}`"
            ))),
        }
    }

    fn lookup_in(&self, source: &ScopeSource, name: &str) -> Option<ColumnRef> {
        match &source.kind {
            SourceKind::Table(t) => self.schema.column_in_table(*t, name).map(|c| ColumnRef {
                column: c,
                name: self.schema.columns[c].raw_name.clone(),
                table: Some(*t),
                qualifier: None,
            }),
            SourceKind::Derived(cols) => cols
                .iter()
                .find(|c| c.name.eq_ignore_ascii_case(name))
                .cloned(),
        }
    }

    fn resolve(&self, qualifier: Option<&str>, name: &str) -> Result<ColumnRef> {
        match qualifier {
            Some(q) => {
                let source = self
                    .find_source(q)
                    .ok_or_else(|| Error::Binding(format!("unknown table or alias `{q}`")))?;
                let mut col = self
                    .lookup_in(source, name)
                    .ok_or_else(|| Error::Binding(format!("unknown column `{q}.{name}`")))?;
                col.qualifier = Some(q.to_string());
                Ok(col)
            }
            None => self
                .scopes
                .iter()
                .rev()
                .flat_map(|f| f.sources.iter())
                .find_map(|s| self.lookup_in(s, name))
                .ok_or_else(|| Error::Binding(format!("unknown column `{name}`"))),
        }
    }

    fn parse_from(&mut self) -> Result<From> {
        let mut joins = Vec::new();
        loop {
            let source = self.table_source()?;
            let mut on = Vec::new();
            if self.eat_kw("on") {
                loop {
                    on.push(self.condition()?);
                    if !self.eat_kw("and") {
                        break;
                    }
                }
                if self.at_kw("or") {
                    return Err(Error::grammar(self.here(), "OR in a join condition"));
                }
            }
            joins.push(Join { source, on });

            if self.eat_sym(",") {
                continue;
            }
            if self.at_kw("left")
                || self.at_kw("right")
                || self.at_kw("outer")
                || self.at_kw("cross")
            {
                return Err(Error::grammar(
                    self.here(),
                    "only inner joins are supported",
                ));
            }
            self.eat_kw("inner");
            if !self.eat_kw("join") {
                break;
            }
        }
        Ok(From { joins })
    }

    fn table_source(&mut self) -> Result<TableSource> {
        if self.at_sym("(") {
            self.pos += 1;
            let query = self.query()?;
            self.expect_sym(")")?;
            let alias = self.alias()?;
            let columns = derived_columns(&query);
            self.scopes
                .last_mut()
                .expect("from clause has a frame")
                .sources
                .push(ScopeSource {
                    alias: alias.clone(),
                    kind: SourceKind::Derived(columns),
                });
            return Ok(TableSource::Subquery {
                query: Box::new(query),
                alias,
            });
        }
        let name = match self.peek().cloned() {
            Some(Token::Ident(name)) if !is_reserved(&name) => name,
            _ => return Err(Error::grammar(self.here(), "expected a table name")),
        };
        self.pos += 1;
        let table = self
            .schema
            .table_by_name(&name)
            .ok_or_else(|| Error::Binding(format!("unknown table `{name}`")))?;
        let alias = self.alias()?;
        self.scopes
            .last_mut()
            .expect("from clause has a frame")
            .sources
            .push(ScopeSource {
                alias: alias.clone(),
                kind: SourceKind::Table(table),
            });
        Ok(TableSource::Table {
            table,
            name: self.schema.tables[table].raw_name.clone(),
            alias,
        })
    }

    fn alias(&mut self) -> Result<Option<String>> {
        let explicit = self.eat_kw("as");
        match self.peek().cloned() {
            Some(Token::Ident(a)) if !is_reserved(&a) => {
                self.pos += 1;
                Ok(Some(a))
            }
            _ if explicit => Err(Error::grammar(self.here(), "expected an alias after AS")),
            _ => Ok(None),
        }
    }

    fn cond_tree(&mut self) -> Result<CondTree> {
        let mut parts = vec![self.cond_and()?];
        while self.eat_kw("or") {
            parts.push(self.cond_and()?);
        }
        Ok(flatten(parts, CondTree::Or))
    }

    fn cond_and(&mut self) -> Result<CondTree> {
        let mut parts = vec![self.cond_atom()?];
        while self.eat_kw("and") {
            parts.push(self.cond_atom()?);
        }
        Ok(flatten(parts, CondTree::And))
    }

    fn cond_atom(&mut self) -> Result<CondTree> {
        if self.at_sym("(") && !self.peek_at(1).is_some_and(|t| t.is_kw("select")) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(tree) = self.cond_tree() {
                if self.eat_sym(")") {
                    return Ok(tree);
                }
            }
            self.pos = save;
        }
        Ok(CondTree::Leaf(self.condition()?))
    }

    fn condition(&mut self) -> Result<Condition> {
        if self.eat_kw("exists") {
            self.expect_sym("(")?;
            let query = self.query()?;
            self.expect_sym(")")?;
            return Ok(Condition {
                left: None,
                op: CmpOp::Exists,
                rhs: Rhs::Single(Operand::Subquery(Box::new(query))),
            });
        }
        if self.at_kw("not") {
            return Err(Error::grammar(
                self.here(),
                "NOT before a condition is not supported",
            ));
        }
        let left = self.value_expr()?;
        let op = match self.peek().cloned() {
            Some(Token::Sym(s)) => {
                let op = match s {
                    "=" => CmpOp::Eq,
                    "!=" | "<>" => CmpOp::Ne,
                    ">" => CmpOp::Gt,
                    "<" => CmpOp::Lt,
                    ">=" => CmpOp::Ge,
                    "<=" => CmpOp::Le,
                    _ => return Err(Error::grammar(s, "expected a comparison operator")),
                };
                self.pos += 1;
                op
            }
            Some(t) if t.is_kw("not") => {
                self.pos += 1;
                if self.eat_kw("in") {
                    CmpOp::NotIn
                } else if self.eat_kw("like") {
                    CmpOp::NotLike
                } else {
                    return Err(Error::grammar(self.here(), "expected IN or LIKE after NOT"));
                }
            }
            Some(t) if t.is_kw("in") => {
                self.pos += 1;
                CmpOp::In
            }
            Some(t) if t.is_kw("like") => {
                self.pos += 1;
                CmpOp::Like
            }
            Some(t) if t.is_kw("between") => {
                self.pos += 1;
                CmpOp::Between
            }
            _ => {
                return Err(Error::grammar(
                    self.here(),
                    "expected a comparison operator",
                ))
            }
        };
        let rhs = if op == CmpOp::Between {
            let low = self.operand()?;
            self.expect_kw("and")?;
            Rhs::Between(low, self.operand()?)
        } else {
            let operand = self.operand()?;
            if matches!(op, CmpOp::In | CmpOp::NotIn) && !matches!(operand, Operand::Subquery(_)) {
                return Err(Error::grammar(self.here(), "IN expects a sub-query"));
            }
            Rhs::Single(operand)
        };
        Ok(Condition {
            left: Some(left),
            op,
            rhs,
        })
    }

    fn operand(&mut self) -> Result<Operand> {
        let slot = |kind| Operand::Value(ValueSlot { kind, slot_id: 0 });
        match self.peek().cloned() {
            Some(Token::Mask) => {
                self.pos += 1;
                Ok(slot(SlotKind::Mask))
            }
            Some(Token::Str(s)) => {
                self.pos += 1;
                Ok(slot(SlotKind::Str(s)))
            }
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(slot(SlotKind::Num(n)))
            }
            Some(Token::Sym("-")) if matches!(self.peek_at(1), Some(Token::Num(_))) => {
                let Some(Token::Num(n)) = self.peek_at(1).cloned() else {
                    unreachable!()
                };
                self.pos += 2;
                Ok(slot(SlotKind::Num(format!("-{n}"))))
            }
            Some(Token::Sym("(")) if self.peek_at(1).is_some_and(|t| t.is_kw("select")) => {
                self.pos += 1;
                let query = self.query()?;
                self.expect_sym(")")?;
                Ok(Operand::Subquery(Box::new(query)))
            }
            _ => Ok(Operand::Column(self.value_expr()?)),
        }
    }
}

fn star(table: Option<usize>, qualifier: Option<String>) -> ColumnRef {
    ColumnRef {
        column: 0,
        name: "*".to_string(),
        table,
        qualifier,
    }
}

fn derived_columns(query: &SqlQuery) -> Vec<ColumnRef> {
    query
        .select
        .items
        .iter()
        .filter(|item| item.agg == Agg::None && item.expr.arith.is_none())
        .map(|item| {
            let mut col = item.expr.left.column.clone();
            col.qualifier = None;
            col
        })
        .filter(|c| c.column != 0)
        .collect()
}

fn flatten(parts: Vec<CondTree>, wrap: fn(Vec<CondTree>) -> CondTree) -> CondTree {
    if parts.len() == 1 {
        return parts.into_iter().next().expect("one part");
    }
    let is_and = matches!(wrap(Vec::new()), CondTree::And(_));
    let mut flat = Vec::with_capacity(parts.len());
    for part in parts {
        match part {
            CondTree::And(xs) if is_and => flat.extend(xs),
            CondTree::Or(xs) if !is_and => flat.extend(xs),
            other => flat.push(other),
        }
    }
    wrap(flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_schemas;

    fn world() -> DbSchema {
        let text = r#"[{
            "db_id": "world",
            "table_names_original": ["country", "countrylanguage"],
            "column_names_original": [[-1, "*"], [0, "code"], [0, "name"], [0, "population"],
                                      [1, "countrycode"], [1, "language"], [1, "is_official"]],
            "column_types": ["text", "text", "text", "number", "text", "text", "text"],
            "primary_keys": [1],
            "foreign_keys": [[4, 1]]
        }]"#;
        parse_schemas(text).unwrap().remove("world").unwrap()
    }

    #[test]
    fn parses_simple_select() {
        let q = parse_sql("SELECT name FROM country", &world()).unwrap();
        assert_eq!(q.select.items.len(), 1);
        assert_eq!(q.select.items[0].agg, Agg::None);
        assert_eq!(q.select.items[0].expr.left.column.column, 2);
        assert!(q.where_clause.is_none());
    }

    #[test]
    fn resolves_alias() {
        let q = parse_sql("SELECT T2.name FROM country AS T2", &world()).unwrap();
        let col = &q.select.items[0].expr.left.column;
        assert_eq!(col.table, Some(0));
        assert_eq!(col.column, 2);
        assert_eq!(col.qualifier.as_deref(), Some("T2"));
    }

    #[test]
    fn binds_correlated_and_nested() {
        let q = parse_sql(
            "SELECT name FROM country WHERE code NOT IN \
             (SELECT countrycode FROM countrylanguage WHERE language = 'English')",
            &world(),
        )
        .unwrap();
        let leaf = q.where_clause.as_ref().unwrap().leaves()[0].clone();
        assert_eq!(leaf.op, CmpOp::NotIn);
        let Rhs::Single(Operand::Subquery(sub)) = leaf.rhs else {
            panic!("expected sub-query")
        };
        assert_eq!(sub.select.items[0].expr.left.column.column, 4);
    }

    #[test]
    fn parses_mask_and_between() {
        let q = parse_sql(
            "SELECT name FROM country WHERE population BETWEEN <mask> AND 20 LIMIT <mask>",
            &world(),
        )
        .unwrap();
        let leaf = q.where_clause.as_ref().unwrap().leaves()[0].clone();
        let Rhs::Between(Operand::Value(lo), Operand::Value(hi)) = leaf.rhs else {
            panic!("expected between")
        };
        assert_eq!((lo.slot_id, hi.slot_id), (0, 1));
        assert!(lo.is_mask());
        assert_eq!(hi.kind, SlotKind::Num("20".into()));
        assert_eq!(q.limit.unwrap().slot_id, 2);
    }

    #[test]
    fn select_aggregates_normalize() {
        let s = world();
        let q = parse_sql("SELECT count(DISTINCT language), max(population) - min(population) FROM country JOIN countrylanguage", &s).unwrap();
        assert_eq!(q.select.items[0].agg, Agg::Count);
        assert!(q.select.items[0].expr.left.distinct);
        assert_eq!(q.select.items[1].agg, Agg::None);
        assert_eq!(q.select.items[1].expr.left.agg, Agg::Max);
    }

    #[test]
    fn precedence_and_over_or() {
        let q = parse_sql(
            "SELECT name FROM country WHERE name = 'a' AND code = 'b' OR population > 3",
            &world(),
        )
        .unwrap();
        match q.where_clause.unwrap() {
            CondTree::Or(xs) => {
                assert_eq!(xs.len(), 2);
                assert!(matches!(xs[0], CondTree::And(_)));
            }
            other => panic!("expected OR at the top, got {other:?}"),
        }
    }

    #[test]
    fn binding_errors() {
        let s = world();
        assert!(matches!(
            parse_sql("SELECT nope FROM country", &s),
            Err(Error::Binding(_))
        ));
        assert!(matches!(
            parse_sql("SELECT name FROM nope", &s),
            Err(Error::Binding(_))
        ));
        assert!(matches!(
            parse_sql("SELECT T9.name FROM country AS T1", &s),
            Err(Error::Binding(_))
        ));
    }

    #[test]
    fn grammar_errors_name_token() {
        let s = world();
        match parse_sql("SELECT name FROM country WINDOW w", &s) {
            Err(Error::Grammar { token, .. }) => assert_eq!(token, "WINDOW"),
            other => panic!("expected grammar error, got {other:?}"),
        }
        assert!(matches!(
            parse_sql("SELECT name FROM country LEFT JOIN countrylanguage", &s),
            Err(Error::Grammar { .. })
        ));
        assert!(matches!(
            parse_sql("SELECT 1", &s),
            Err(Error::Grammar { .. })
        ));
    }
}
