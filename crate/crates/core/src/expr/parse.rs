use thiserror::Error;

use super::{BinaryOp, Node, UnaryOp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("empty expression")]
    Empty,
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                Some(*offset)
            }
            ParseError::Empty => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<(Token, usize)>,
    coords: &'a [String],
    params: &'a [String],
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, coords: &'a [String], params: &'a [String]) -> Self {
        Self {
            src,
            pos: 0,
            peeked: None,
            coords,
            params,
        }
    }

    pub(crate) fn parse(mut self) -> Result<Node, ParseError> {
        if self.src.trim().is_empty() {
            return Err(ParseError::Empty);
        }
        let node = self.expr()?;
        let (tok, at) = self.next()?;
        if tok != Token::End {
            return Err(syntax(at, format!("unexpected {}", describe(&tok))));
        }
        Ok(node)
    }

    fn lex(&mut self) -> Result<(Token, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Token::End, start));
        };
        if c.is_ascii_digit() || c == b'.' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &self.src[start..end];
            let v: f64 = text
                .parse()
                .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
            self.pos = end;
            return Ok((Token::Number(v), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((Token::Ident(self.src[start..end].to_string()), start));
        }
        self.pos += 1;
        match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Ok((Token::Op(c as char), start)),
            b'(' => Ok((Token::LParen, start)),
            b')' => Ok((Token::RParen, start)),
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                Err(syntax(start, format!("unexpected character `{ch}`")))
            }
        }
    }

    fn peek(&mut self) -> Result<&Token, ParseError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex()?);
        }
        Ok(&self.peeked.as_ref().unwrap().0)
    }

    fn next(&mut self) -> Result<(Token, usize), ParseError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex(),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek()? {
                Token::Op('+') => BinaryOp::Add,
                Token::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.next()?;
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek()? {
                Token::Op('*') => BinaryOp::Mul,
                Token::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.next()?;
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.peek()? == &Token::Op('-') {
            self.next()?;
            let inner = self.unary()?;
            return Ok(Node::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.peek()? == &Token::Op('^') {
            self.next()?;
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let (tok, at) = self.next()?;
        match tok {
            Token::Number(v) => Ok(Node::Const(v)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Node::Coord(i));
                }
                if let Some(i) = self.params.iter().position(|p| *p == name) {
                    return Ok(Node::Param(i));
                }
                if let Some(op) = UnaryOp::function(&name) {
                    let (open, open_at) = self.next()?;
                    if open != Token::LParen {
                        return Err(syntax(open_at, format!("expected `(` after `{name}`")));
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Node::Unary(op, Box::new(arg)));
                }
                if name == "pi" {
                    return Ok(Node::Const(std::f64::consts::PI));
                }
                Err(ParseError::UnknownIdentifier { name, offset: at })
            }
            other => Err(syntax(at, format!("expected an operand, found {}", describe(&other)))),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.next()?;
        if tok == Token::RParen {
            Ok(())
        } else {
            Err(syntax(at, format!("expected `)`, found {}", describe(&tok))))
        }
    }
}

fn syntax(offset: usize, message: String) -> ParseError {
    ParseError::Syntax { offset, message }
}

fn describe(tok: &Token) -> String {
    match tok {
        Token::Number(v) => format!("number {v}"),
        Token::Ident(s) => format!("`{s}`"),
        Token::Op(c) => format!("`{c}`"),
        Token::LParen => "`(`".into(),
        Token::RParen => "`)`".into(),
        Token::End => "end of input".into(),
    }
}
