use thiserror::Error;

use super::{BinaryOp, Expr, Jet, Node, UnaryOp, MAX_ORDER};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{reason} in `{subexpr}`")]
    Domain { reason: &'static str, subexpr: String },
    #[error("expected {expected} {what} values, got {got}")]
    Arity {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("jet order {0} not in 1..={MAX_ORDER}")]
    Order(usize),
}

impl Expr {
    /// Plain IEEE evaluation.
    pub fn eval(&self, point: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        self.check_arity(point.len(), params.len())?;
        self.walk(&self.root, point, params, &0.0)
    }

    /// Evaluates with every coordinate seeded as an independent variable.
    pub fn eval_jet(&self, point: &[f64], params: &[f64], order: usize) -> Result<Jet, EvalError> {
        if order == 0 || order > MAX_ORDER {
            return Err(EvalError::Order(order));
        }
        self.check_arity(point.len(), params.len())?;
        let seeded = Jet::seed(point, order);
        let proto = Jet::constant(point.len(), order, 0.0);
        self.walk(&self.root, &seeded, params, &proto)
    }

    /// Evaluates with arbitrary scalar values bound to the coordinates, for
    /// example jets of an inner map when composing charts.
    pub fn eval_scalar<T: Scalar>(&self, coords: &[T], params: &[f64]) -> Result<T, EvalError> {
        self.check_arity(coords.len(), params.len())?;
        let Some(proto) = coords.first() else {
            return Err(EvalError::Arity {
                what: "coordinate",
                expected: 1,
                got: 0,
            });
        };
        self.walk(&self.root, coords, params, proto)
    }

    /// Evaluates an expression without coordinates (manifest constants,
    /// grid bounds).
    pub fn eval_constant(&self, params: &[f64]) -> Result<f64, EvalError> {
        self.eval(&[], params)
    }

    fn check_arity(&self, ncoords: usize, nparams: usize) -> Result<(), EvalError> {
        if ncoords != self.coords.len() {
            return Err(EvalError::Arity {
                what: "coordinate",
                expected: self.coords.len(),
                got: ncoords,
            });
        }
        if nparams != self.params.len() {
            return Err(EvalError::Arity {
                what: "parameter",
                expected: self.params.len(),
                got: nparams,
            });
        }
        Ok(())
    }

    fn domain(&self, node: &Node, reason: &'static str) -> EvalError {
        EvalError::Domain {
            reason,
            subexpr: self.display_node(node).to_string(),
        }
    }

    fn walk<T: Scalar>(
        &self,
        node: &Node,
        coords: &[T],
        params: &[f64],
        proto: &T,
    ) -> Result<T, EvalError> {
        let out = match node {
            Node::Const(c) => proto.lift(*c),
            Node::Coord(i) => coords[*i].clone(),
            Node::Param(i) => proto.lift(params[*i]),
            Node::Unary(op, a) => {
                let x = self.walk(a, coords, params, proto)?;
                let v = x.value();
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Tan => {
                        if v.cos() == 0.0 {
                            return Err(self.domain(node, "tangent pole"));
                        }
                        x.tan()
                    }
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Ln => {
                        if v <= 0.0 {
                            return Err(self.domain(node, "logarithm of non-positive value"));
                        }
                        x.ln()
                    }
                    UnaryOp::Sqrt => {
                        if v < 0.0 {
                            return Err(self.domain(node, "square root of negative value"));
                        }
                        if v == 0.0 && x.has_derivatives() {
                            return Err(self.domain(node, "square root not differentiable at zero"));
                        }
                        x.sqrt()
                    }
                }
            }
            Node::Binary(BinaryOp::Pow, base, exponent) => {
                let b = self.walk(base, coords, params, proto)?;
                match exponent.integer_literal() {
                    Some(n) => {
                        if n < 0 && b.value() == 0.0 {
                            return Err(self.domain(node, "division by zero"));
                        }
                        powi(&b, n)
                    }
                    None => {
                        if b.value() <= 0.0 {
                            return Err(self.domain(node, "non-integer power of non-positive base"));
                        }
                        let e = self.walk(exponent, coords, params, proto)?;
                        (e * b.ln()).exp()
                    }
                }
            }
            Node::Binary(op, a, b) => {
                let x = self.walk(a, coords, params, proto)?;
                let y = self.walk(b, coords, params, proto)?;
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y.value() == 0.0 {
                            return Err(self.domain(node, "division by zero"));
                        }
                        x / y
                    }
                    BinaryOp::Pow => unreachable!(),
                }
            }
        };
        if !out.value().is_finite() {
            return Err(self.domain(node, "non-finite value"));
        }
        Ok(out)
    }
}

/// Repeated multiplication, left to right; negative powers invert at the end.
fn powi<T: Scalar>(base: &T, n: i32) -> T {
    if n == 0 {
        return base.lift(1.0);
    }
    let mut acc = base.clone();
    for _ in 1..n.unsigned_abs() {
        acc = acc * base.clone();
    }
    if n < 0 {
        base.lift(1.0) / acc
    } else {
        acc
    }
}
