use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token {
    /// Bare or backtick/bracket-quoted identifier, possibly a keyword.
    Ident(String),
    /// Single- or double-quoted literal; Spider uses both for strings.
    Str(String),
    Num(String),
    Mask,
    Sym(&'static str),
}

impl Token {
    pub(crate) fn is_kw(&self, kw: &str) -> bool {
        matches!(self, Token::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    pub(crate) fn text(&self) -> String {
        match self {
            Token::Ident(s) | Token::Num(s) => s.clone(),
            Token::Str(s) => format!("'{s}'"),
            Token::Mask => "<mask>".to_string(),
            Token::Sym(s) => s.to_string(),
        }
    }
}

pub(crate) const MASK_TOKEN: &str = "<mask>";

const SYMBOLS: &[&str] = &[
    "!=", "<>", ">=", "<=", "(", ")", ",", ".", "*", "+", "-", "/", "=", ">", "<", ";",
];

pub(crate) fn tokenize(sql: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = sql.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '<' && starts_with_ci(&chars[i..], MASK_TOKEN) {
            tokens.push(Token::Mask);
            i += MASK_TOKEN.len();
            continue;
        }
        if c == '\'' || c == '"' {
            let (text, next) = quoted(&chars, i, c)?;
            tokens.push(Token::Str(text));
            i = next;
            continue;
        }
        if c == '`' || c == '[' {
            let close = if c == '`' { '`' } else { ']' };
            let (text, next) = quoted(&chars, i, close)?;
            tokens.push(Token::Ident(text));
            i = next;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            if text.matches('.').count() > 1 {
                return Err(Error::grammar(text, "malformed number"));
            }
            tokens.push(Token::Num(text));
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token::Ident(chars[start..i].iter().collect()));
            continue;
        }
        match SYMBOLS.iter().find(|s| starts_with_ci(&chars[i..], s)) {
            Some(sym) => {
                tokens.push(Token::Sym(sym));
                i += sym.len();
            }
            None => return Err(Error::grammar(c.to_string(), "unexpected character")),
        }
    }
    while tokens.last() == Some(&Token::Sym(";")) {
        tokens.pop();
    }
    Ok(tokens)
}

fn starts_with_ci(chars: &[char], pat: &str) -> bool {
    let mut n = 0;
    for (a, b) in chars.iter().zip(pat.chars()) {
        if !a.eq_ignore_ascii_case(&b) {
            return false;
        }
        n += 1;
    }
    n == pat.chars().count()
}

/// Reads a quoted span starting at `open`, where a doubled closing quote
/// stands for one literal quote.
fn quoted(chars: &[char], open: usize, close: char) -> Result<(String, usize)> {
    let mut out = String::new();
    let mut i = open + 1;
    while i < chars.len() {
        if chars[i] == close {
            if close != ']' && chars.get(i + 1) == Some(&close) {
                out.push(close);
                i += 2;
                continue;
            }
            return Ok((out, i + 1));
        }
        out.push(chars[i]);
        i += 1;
    }
    Err(Error::grammar(
        chars[open..].iter().take(20).collect::<String>(),
        "unterminated quoted text",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_mask_and_operators() {
        let toks = tokenize("WHERE a <= <MASK> AND b <> 'O''Brien';").unwrap();
        assert_eq!(
            toks,
            vec![
                Token::Ident("WHERE".into()),
                Token::Ident("a".into()),
                Token::Sym("<="),
                Token::Mask,
                Token::Ident("AND".into()),
                Token::Ident("b".into()),
                Token::Sym("<>"),
                Token::Str("O'Brien".into()),
            ]
        );
    }

    #[test]
    fn lexes_numbers() {
        let toks = tokenize("LIMIT 3 2.5 1e3 .5").unwrap();
        assert_eq!(
            &toks[1..],
            &[
                Token::Num("3".into()),
                Token::Num("2.5".into()),
                Token::Num("1e3".into()),
                Token::Num(".5".into()),
            ]
        );
    }

    #[test]
    fn rejects_unterminated_string() {
        assert!(matches!(
            tokenize("SELECT 'abc"),
            Err(Error::Grammar { .. })
        ));
    }
}
