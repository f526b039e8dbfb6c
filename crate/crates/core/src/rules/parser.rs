//! Tokenizer and recursive-descent parser for rule formulas.
//!
//! ```text
//! formula  := ["="] expr
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := ("-" | "+") unary | primary
//! primary  := NUMBER | "{" ref "}" | IDENT "(" [expr ("," expr)*] ")" | "(" expr ")"
//! ref      := name ["|" DIM "=" MEMBER ("," DIM "=" MEMBER)*]
//! ```
//!
//! Member names may contain anything except `{`, `}` and `|`.

use super::ast::{BinaryOp, Expression, Function, MemberRef};
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ref(MemberRef),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Op(BinaryOp),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(n) => n.to_string(),
            Token::Ref(r) => format!("{{{}}}", r.name),
            Token::Ident(s) => s.clone(),
            Token::LParen => "(".into(),
            Token::RParen => ")".into(),
            Token::Comma => ",".into(),
            Token::Op(op) => op.symbol().to_string(),
        }
    }
}

fn parse_ref_body(body: &str, pos: usize) -> Result<MemberRef, ParseError> {
    let (name, overrides) = match body.split_once('|') {
        Some((name, rest)) => (name, Some(rest)),
        None => (body, None),
    };
    let name = name.trim();
    if name.is_empty() {
        return Err(ParseError::EmptyRef { pos });
    }
    let mut r = MemberRef::new(name);
    if let Some(rest) = overrides {
        for part in rest.split(',') {
            let (dim, member) = part
                .split_once('=')
                .map(|(d, m)| (d.trim(), m.trim()))
                .filter(|(d, m)| !d.is_empty() && !m.is_empty())
                .ok_or_else(|| ParseError::MalformedOverride { pos, text: part.trim().to_string() })?;
            r.overrides.push((dim.to_string(), member.to_string()));
        }
    }
    Ok(r)
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'{' => {
                let body_start = i + 1;
                let mut j = body_start;
                loop {
                    match bytes.get(j) {
                        None => return Err(ParseError::UnterminatedRef { pos: start }),
                        Some(b'}') => break,
                        Some(b'{') => return Err(ParseError::UnterminatedRef { pos: start }),
                        Some(_) => j += 1,
                    }
                }
                tokens.push((start, Token::Ref(parse_ref_body(&text[body_start..j], start)?)));
                i = j + 1;
            }
            b'}' => return Err(ParseError::UnexpectedChar { pos: start, ch: '}' }),
            b'(' => {
                tokens.push((start, Token::LParen));
                i += 1;
            }
            b')' => {
                tokens.push((start, Token::RParen));
                i += 1;
            }
            b',' => {
                tokens.push((start, Token::Comma));
                i += 1;
            }
            b'+' | b'-' | b'*' | b'/' => {
                let op = match c {
                    b'+' => BinaryOp::Add,
                    b'-' => BinaryOp::Sub,
                    b'*' => BinaryOp::Mul,
                    _ => BinaryOp::Div,
                };
                tokens.push((start, Token::Op(op)));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let literal = &text[start..i];
                let n: f64 = literal
                    .parse()
                    .map_err(|_| ParseError::InvalidNumber { pos: start, text: literal.to_string() })?;
                tokens.push((start, Token::Number(n)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                    i += 1;
                }
                tokens.push((start, Token::Ident(text[start..i].to_string())));
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::UnexpectedChar { pos: start, ch });
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::UnexpectedToken { pos: self.offset(), found: t.describe() },
            None => ParseError::UnexpectedEnd,
        }
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut left = self.term()?;
        while let Some(Token::Op(op @ (BinaryOp::Add | BinaryOp::Sub))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let right = self.term()?;
            left = Expression::binary(op, left, right);
        }
        Ok(left)
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut left = self.unary()?;
        while let Some(Token::Op(op @ (BinaryOp::Mul | BinaryOp::Div))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let right = self.unary()?;
            left = Expression::binary(op, left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        match self.peek() {
            Some(Token::Op(BinaryOp::Sub)) => {
                self.pos += 1;
                Ok(Expression::Negate(Box::new(self.unary()?)))
            }
            Some(Token::Op(BinaryOp::Add)) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expression, ParseError> {
        let offset = self.offset();
        match self.next() {
            Some(Token::Number(n)) => Ok(Expression::Number(n)),
            Some(Token::Ref(r)) => Ok(Expression::Member(r)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                let function =
                    Function::from_name(&name).ok_or(ParseError::UnknownFunction { pos: offset, name })?;
                self.expect(Token::LParen)?;
                let mut args = Vec::new();
                if self.peek() != Some(&Token::RParen) {
                    args.push(self.expr()?);
                    while self.peek() == Some(&Token::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                }
                self.expect(Token::RParen)?;
                Ok(Expression::Call { function, args })
            }
            Some(_) => {
                self.pos -= 1;
                Err(self.unexpected())
            }
            None => Err(ParseError::UnexpectedEnd),
        }
    }
}

/// Parses a rule formula into an unbound syntax tree.
pub fn parse(text: &str) -> Result<Expression, ParseError> {
    let trimmed = text.trim_start();
    let offset = text.len() - trimmed.len();
    let body = trimmed.strip_prefix('=').unwrap_or(trimmed);
    let skipped = offset + (trimmed.len() - body.len());
    let tokens = tokenize(body)
        .map_err(|e| e.shifted(skipped))?
        .into_iter()
        .map(|(p, t)| (p + skipped, t))
        .collect::<Vec<_>>();
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut parser = Parser { tokens, pos: 0, end: text.len() };
    let expr = parser.expr()?;
    if parser.peek().is_some() {
        return Err(parser.unexpected());
    }
    Ok(expr)
}
