//! A small arithmetic language for chart component functions.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?          (right associative)
//! atom    := number | name | func "(" expr ")" | "(" expr ")"
//! func    := "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt"
//! number  := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! ```
//!
//! Names resolve against the declared coordinate list first, then the
//! parameter list; `pi` is a built-in constant. Angles are radians.

mod eval;
mod jet;
mod parse;

use std::fmt;
use std::sync::Arc;

pub use eval::EvalError;
pub use jet::{Jet, MAX_ORDER};
pub use parse::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
        }
    }

    pub(crate) fn function(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
            BinaryOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Coord(usize),
    Param(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(op, _, _) => op.precedence(),
            Node::Unary(UnaryOp::Neg, _) => 3,
            _ => 5,
        }
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            Node::Const(_) | Node::Coord(_) | Node::Param(_) => 1,
            Node::Unary(_, a) => 1 + a.depth(),
            Node::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Integer exponent if this node is a literal integer (possibly negated).
    pub(crate) fn integer_literal(&self) -> Option<i32> {
        let v = match self {
            Node::Const(c) => *c,
            Node::Unary(UnaryOp::Neg, inner) => match **inner {
                Node::Const(c) => -c,
                _ => return None,
            },
            _ => return None,
        };
        (v.fract() == 0.0 && v.abs() <= 1024.0).then_some(v as i32)
    }
}

/// A parsed expression together with the names it was resolved against.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    coords: Arc<[String]>,
    params: Arc<[String]>,
}

impl Expr {
    /// Parses `source` with `coords` as coordinate names and `params` as
    /// named constants bound at evaluation time.
    pub fn parse<S: AsRef<str>>(source: &str, coords: &[S], params: &[S]) -> Result<Expr, ParseError> {
        let coords: Arc<[String]> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        let params: Arc<[String]> = params.iter().map(|s| s.as_ref().to_string()).collect();
        Self::parse_shared(source, coords, params)
    }

    pub(crate) fn parse_shared(
        source: &str,
        coords: Arc<[String]>,
        params: Arc<[String]>,
    ) -> Result<Expr, ParseError> {
        let root = parse::Parser::new(source, &coords, &params).parse()?;
        Ok(Expr { root, coords, params })
    }

    /// Builds an expression from a node tree. Indices in the tree must be
    /// valid for the given name lists.
    pub fn from_node<S: AsRef<str>>(root: Node, coords: &[S], params: &[S]) -> Expr {
        Expr {
            root,
            coords: coords.iter().map(|s| s.as_ref().to_string()).collect(),
            params: params.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub(crate) fn display_node<'a>(&'a self, node: &'a Node) -> NodeDisplay<'a> {
        NodeDisplay { expr: self, node }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display_node(&self.root).fmt(f)
    }
}

pub(crate) struct NodeDisplay<'a> {
    expr: &'a Expr,
    node: &'a Node,
}

impl NodeDisplay<'_> {
    fn write_child(&self, f: &mut fmt::Formatter<'_>, child: &Node, parens: bool) -> fmt::Result {
        let d = NodeDisplay {
            expr: self.expr,
            node: child,
        };
        if parens {
            write!(f, "({d})")
        } else {
            write!(f, "{d}")
        }
    }
}

impl fmt::Display for NodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Node::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Node::Coord(i) => f.write_str(&self.expr.coords[*i]),
            Node::Param(i) => f.write_str(&self.expr.params[*i]),
            Node::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                self.write_child(f, a, a.precedence() < 3)
            }
            Node::Unary(op, a) => {
                write!(f, "{}", op.name())?;
                self.write_child(f, a, true)
            }
            Node::Binary(BinaryOp::Pow, a, b) => {
                self.write_child(f, a, a.precedence() <= 4)?;
                f.write_str("^")?;
                self.write_child(f, b, b.precedence() < 3)
            }
            Node::Binary(op, a, b) => {
                let p = op.precedence();
                self.write_child(f, a, a.precedence() < p)?;
                write!(f, "{}", op.symbol())?;
                self.write_child(f, b, b.precedence() <= p)
            }
        }
    }
}
