//! Tokenizer and s-expression reader for PDDL text.

use super::PddlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Symbol(String),
}

/// A parsed s-expression. Symbols are lowercased (PDDL is case-insensitive).
#[derive(Debug, Clone)]
pub enum SExpr {
    Symbol(String, Position),
    List(Vec<SExpr>, Position),
}

impl SExpr {
    pub fn position(&self) -> Position {
        match self {
            SExpr::Symbol(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Symbol(..) => None,
        }
    }

    /// Short rendering used in error messages.
    pub fn describe(&self) -> String {
        match self {
            SExpr::Symbol(s, _) => format!("`{s}`"),
            SExpr::List(items, _) => match items.first().and_then(SExpr::as_symbol) {
                Some(head) => format!("`({head} ...)`"),
                None => "a list".to_string(),
            },
        }
    }
}

fn tokenize(text: &str) -> Vec<(Token, Position)> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    let mut current = String::new();
    let mut start = Position { line, column };

    macro_rules! flush {
        () => {
            if !current.is_empty() {
                tokens.push((Token::Symbol(current.to_lowercase()), start));
                current.clear();
            }
        };
    }

    while let Some(c) = chars.next() {
        let here = Position { line, column };
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
        match c {
            ';' => {
                flush!();
                while let Some(&next) = chars.peek() {
                    if next == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '(' => {
                flush!();
                tokens.push((Token::Open, here));
            }
            ')' => {
                flush!();
                tokens.push((Token::Close, here));
            }
            c if c.is_whitespace() => flush!(),
            c => {
                if current.is_empty() {
                    start = here;
                }
                current.push(c);
            }
        }
    }
    flush!();
    tokens
}

/// Reads exactly one top-level s-expression from `text`.
pub fn read(text: &str) -> Result<SExpr, PddlError> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let expr = read_expr(&tokens, &mut pos, end_position(text))?;
    if let Some((_, p)) = tokens.get(pos) {
        return Err(PddlError::syntax(*p, "end of input", "trailing tokens"));
    }
    Ok(expr)
}

fn end_position(text: &str) -> Position {
    let line = text.lines().count().max(1);
    let column = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    Position { line, column }
}

fn read_expr(tokens: &[(Token, Position)], pos: &mut usize, eof: Position) -> Result<SExpr, PddlError> {
    let Some((token, start)) = tokens.get(*pos) else {
        return Err(PddlError::syntax(eof, "`(`", "end of input"));
    };
    *pos += 1;
    match token {
        Token::Symbol(s) => Ok(SExpr::Symbol(s.clone(), *start)),
        Token::Close => Err(PddlError::syntax(*start, "an expression", "`)`")),
        Token::Open => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(PddlError::syntax(eof, "`)`", "end of input")),
                    Some((Token::Close, _)) => {
                        *pos += 1;
                        return Ok(SExpr::List(items, *start));
                    }
                    Some(_) => items.push(read_expr(tokens, pos, eof)?),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_case_are_normalized() {
        let e = read("(Define ; comment (\n (Domain X))").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items[0].as_symbol(), Some("define"));
        assert_eq!(items[1].as_list().unwrap()[1].as_symbol(), Some("x"));
        assert_eq!(items[1].position(), Position { line: 2, column: 2 });
    }

    #[test]
    fn unbalanced_input_reports_position() {
        match read("(a (b c)") {
            Err(PddlError::Syntax { expected, .. }) => assert_eq!(expected, "`)`"),
            other => panic!("unexpected {other:?}"),
        }
        match read("(a) b") {
            Err(PddlError::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 5)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
