//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] of order `k` in `n` variables stores the Taylor coefficients
//! `c_a = (d^a f)/a!` for every multi-index `a` with `|a| <= k`. Monomials are
//! kept in graded order (degree 0, then degree 1, ...), so the coefficients of
//! an order-`j` jet are a prefix of the order-`k` coefficients for `j <= k`.
//!
//! Arithmetic is exact up to floating point: products are truncated
//! polynomial products and elementary functions are applied through their
//! Taylor series around the value, so no step size ever enters.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::Scalar;

/// Highest supported order. Immersion -> induced metric -> Riemann tensor
/// needs three derivative levels.
pub const MAX_ORDER: usize = 3;

#[derive(Debug)]
struct JetLayout {
    nvars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)`: coefficient `i` times coefficient `j` lands in `k`.
    /// The `(0, 0, 0)` entry comes first.
    products: Vec<(u32, u32, u32)>,
}

fn monomials_of_degree(nvars: usize, degree: usize) -> Vec<Vec<u8>> {
    fn rec(var: usize, nvars: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if var == nvars - 1 {
            cur[var] = left as u8;
            out.push(cur.clone());
            cur[var] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[var] = e as u8;
            rec(var + 1, nvars, left - e, cur, out);
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0u8; nvars];
    rec(0, nvars, degree, &mut cur, &mut out);
    out
}

impl JetLayout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exponents = Vec::new();
        let mut degrees = Vec::new();
        for d in 0..=order {
            for m in monomials_of_degree(nvars, d) {
                exponents.push(m);
                degrees.push(d as u8);
            }
        }
        let index: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (i, a) in exponents.iter().enumerate() {
            for (j, b) in exponents.iter().enumerate() {
                if (degrees[i] + degrees[j]) as usize > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        Self {
            nvars,
            order,
            exponents,
            index,
            products,
        }
    }

    fn get(nvars: usize, order: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet layout cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetLayout::build(nvars, order)))
            .clone()
    }

    fn len(&self) -> usize {
        self.exponents.len()
    }
}

/// A value bundled with all of its partial derivatives up to a fixed order.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.layout.nvars)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.nvars == other.layout.nvars
            && self.layout.order == other.layout.order
            && self.coeffs == other.coeffs
    }
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

impl Jet {
    /// # Panics
    /// If `order > MAX_ORDER`.
    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let layout = JetLayout::get(nvars, order);
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Self { layout, coeffs }
    }

    /// The coordinate function `q^var` at `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: f64) -> Self {
        assert!(var < nvars, "variable index {var} out of range for {nvars} variables");
        let mut jet = Self::constant(nvars, order, value);
        if order >= 1 {
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    /// Seeds one independent variable per point coordinate.
    pub fn seed(point: &[f64], order: usize) -> Vec<Jet> {
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(point.len(), order, i, v))
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficients in graded monomial order.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mixed partial derivative; `vars` lists the differentiation variables,
    /// e.g. `[0, 0, 1]` is the third partial d^3/dq0^2 dq1. An empty list
    /// returns the value.
    ///
    /// # Panics
    /// If `vars.len()` exceeds the jet order.
    pub fn partial(&self, vars: &[usize]) -> f64 {
        assert!(
            vars.len() <= self.layout.order,
            "partial of order {} requested from order-{} jet",
            vars.len(),
            self.layout.order
        );
        let mut exps = vec![0u8; self.layout.nvars];
        for &v in vars {
            exps[v] += 1;
        }
        let scale: f64 = exps.iter().map(|&e| factorial(e)).product();
        self.coeffs[self.layout.index[&exps]] * scale
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.nvars()).map(|i| self.partial(&[i])).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.nvars();
        (0..n)
            .map(|i| (0..n).map(|j| self.partial(&[i, j])).collect())
            .collect()
    }

    /// The partial derivative with respect to `var`, one order lower.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.layout.order >= 1, "cannot differentiate an order-0 jet");
        let lower = JetLayout::get(self.layout.nvars, self.layout.order - 1);
        let mut coeffs = vec![0.0; lower.len()];
        for (i, exps) in self.layout.exponents.iter().enumerate() {
            if exps[var] == 0 {
                continue;
            }
            let mut e = exps.clone();
            e[var] -= 1;
            coeffs[lower.index[&e]] = f64::from(exps[var]) * self.coeffs[i];
        }
        Jet {
            layout: lower,
            coeffs,
        }
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.layout.order);
        let layout = JetLayout::get(self.layout.nvars, order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs }
    }

    fn zeros_like(&self) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: vec![0.0; self.coeffs.len()],
        }
    }

    fn check_compatible(&self, other: &Jet) {
        assert!(
            Arc::ptr_eq(&self.layout, &other.layout)
                || (self.layout.nvars == other.layout.nvars
                    && self.layout.order == other.layout.order),
            "jet layout mismatch: ({}, {}) vs ({}, {})",
            self.layout.nvars,
            self.layout.order,
            other.layout.nvars,
            other.layout.order
        );
    }

    fn mul_ref(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        let mut out = self.zeros_like();
        for &(i, j, k) in &self.layout.products {
            out.coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        out
    }

    /// `f(self)` given `f` and its first three derivatives at the value.
    fn compose(&self, derivs: [f64; 4]) -> Jet {
        let mut out = self.lift(derivs[0]);
        if self.layout.order == 0 {
            return out;
        }
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut power = delta.clone();
        let mut fact = 1.0;
        for (k, &d) in derivs.iter().enumerate().skip(1).take(self.layout.order) {
            fact *= k as f64;
            if k > 1 {
                power = power.mul_ref(&delta);
            }
            let c = d / fact;
            for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs).skip(1) {
                *o += c * p;
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let u = self.value();
        let r = 1.0 / u;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn lift(&self, c: f64) -> Self {
        let mut out = self.zeros_like();
        out.coeffs[0] = c;
        out
    }

    fn has_derivatives(&self) -> bool {
        self.layout.order > 0
    }

    fn scale(&self, c: f64) -> Self {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    fn tan(&self) -> Self {
        let t = self.value().tan();
        let d1 = 1.0 + t * t;
        self.compose([t, d1, 2.0 * t * d1, (2.0 + 6.0 * t * t) * d1])
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose([e, e, e, e])
    }

    fn ln(&self) -> Self {
        let u = self.value();
        let r = 1.0 / u;
        self.compose([u.ln(), r, -r * r, 2.0 * r * r * r])
    }

    fn sqrt(&self) -> Self {
        let u = self.value();
        let s = u.sqrt();
        let r = 1.0 / u;
        self.compose([s, 0.5 * s * r, -0.25 * s * r * r, 0.375 * s * r * r * r])
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_ref(rhs)
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        let mut out = self.mul_ref(&rhs.recip());
        // keep the value bit-identical to plain division
        out.coeffs[0] = self.coeffs[0] / rhs.coeffs[0];
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul, Div::div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}
