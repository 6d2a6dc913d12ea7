//! Shared oracles and generators for the integration tests.
#![allow(dead_code)]

use kappa_core::{ImmersionChart, Matrix, MetricChart};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a - b| / max(1, |a|, |b|)`.
pub fn rel_floor(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// `|a - b| / |b|`, or the absolute gap when `b` is zero.
pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

// ---------------------------------------------------------------- expressions

/// Random expression in `x0..x{nvars-1}` that is finite and smooth whenever
/// every coordinate lies in `[0.5, 1.5]`. Logs, roots and quotients are
/// guarded so their arguments stay away from zero.
pub fn random_expr(rng: &mut impl Rng, nvars: usize, depth: usize) -> String {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.7) {
            format!("x{}", rng.random_range(0..nvars))
        } else {
            format!("{:.3}", rng.random_range(-2.0..2.0))
        };
    }
    let a = random_expr(rng, nvars, depth - 1);
    match rng.random_range(0..13) {
        0 => format!("({a} + {})", random_expr(rng, nvars, depth - 1)),
        1 => format!("({a} - {})", random_expr(rng, nvars, depth - 1)),
        2 | 3 => format!("({a} * {})", random_expr(rng, nvars, depth - 1)),
        4 => format!("({a} / (2.5 + sin({})))", random_expr(rng, nvars, depth - 1)),
        5 => format!("sin({a})"),
        6 => format!("cos({a})"),
        7 => format!("exp(0.5*sin({a}))"),
        8 => format!("ln(1.2 + cos({a}))"),
        9 => format!("sqrt(1 + ({a})^2)"),
        10 => format!("tan(0.5*sin({a}))"),
        11 => format!("({a})^{}", rng.random_range(2..4)),
        _ => format!("(1.5 + cos({a}))^{:.2}", rng.random_range(-1.5..1.5)),
    }
}

pub fn coord_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

pub fn random_point(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Central first difference with `h = 1e-5 (1 + |x_i|)`.
pub fn fd_first(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize) -> f64 {
    let h = 1e-5 * (1.0 + x[i].abs());
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[i] += h;
    m[i] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

fn fd_second_step(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, j: usize, hi: f64, hj: f64) -> f64 {
    let at = |di: f64, dj: f64| {
        let mut y = x.to_vec();
        y[i] += di;
        y[j] += dj;
        f(&y)
    };
    if i == j {
        (at(hi, 0.0) - 2.0 * f(x) + at(-hi, 0.0)) / (hi * hi)
    } else {
        (at(hi, hj) - at(hi, -hj) - at(-hi, hj) + at(-hi, -hj)) / (4.0 * hi * hj)
    }
}

/// Central second difference with one Richardson step, `h = 1e-3 (1 + |x|)`.
pub fn fd_second(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, j: usize) -> f64 {
    let hi = 1e-3 * (1.0 + x[i].abs());
    let hj = 1e-3 * (1.0 + x[j].abs());
    let coarse = fd_second_step(f, x, i, j, hi, hj);
    let fine = fd_second_step(f, x, i, j, 0.5 * hi, 0.5 * hj);
    (4.0 * fine - coarse) / 3.0
}

// ---------------------------------------------------------------- matrices

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn inf_norm(a: &Matrix) -> f64 {
    (0..a.rows()).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Infinity-norm condition number, via the library inverse.
pub fn condition(a: &Matrix) -> f64 {
    match kappa_core::linalg::invert(a) {
        Ok(inv) => inf_norm(a) * inf_norm(&inv),
        Err(_) => f64::INFINITY,
    }
}

/// Uniform `[-1, 1]` entries, resampled until the condition number is below `max_cond`.
pub fn well_conditioned(rng: &mut impl Rng, n: usize, max_cond: f64) -> Matrix {
    loop {
        let a = random_matrix(rng, n, n);
        if condition(&a) < max_cond {
            return a;
        }
    }
}

/// Orthogonal factor of a random square matrix (modified Gram-Schmidt).
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Matrix {
    loop {
        let a = random_matrix(rng, n, n);
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut v = a.column(j);
            for u in &q {
                let d: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-3 {
                ok = false;
                break;
            }
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
        if ok {
            return Matrix::from_columns(&q);
        }
    }
}

/// Laplace expansion along the first row.
pub fn cofactor_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    match n {
        0 => 1.0,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[0][j] * cofactor_det(&minor)
            })
            .sum(),
    }
}

// ---------------------------------------------------------------- immersions

fn random_poly(rng: &mut impl Rng, m: usize, cubic: bool) -> String {
    let mut terms = Vec::new();
    for a in 0..m {
        for b in a..m {
            terms.push(format!("{:.4}*q{a}*q{b}", rng.random_range(-1.0..1.0)));
            if cubic {
                for c in b..m {
                    terms.push(format!("{:.4}*q{a}*q{b}*q{c}", rng.random_range(-0.5..0.5)));
                }
            }
        }
    }
    terms.join(" + ")
}

/// Graph immersion `(q, f_1(q), ..., f_{N-M}(q))` with random quadratic or
/// cubic `f`; regular everywhere since the first `M` components are `q`.
pub fn random_graph(rng: &mut impl Rng, m: usize, n: usize, cubic: bool) -> ImmersionChart {
    let coords: Vec<String> = (0..m).map(|a| format!("q{a}")).collect();
    let mut comps: Vec<String> = coords.clone();
    for _ in m..n {
        comps.push(random_poly(rng, m, cubic));
    }
    let c: Vec<&str> = coords.iter().map(String::as_str).collect();
    let e: Vec<&str> = comps.iter().map(String::as_str).collect();
    ImmersionChart::new(&c, &[], &e).unwrap()
}

/// Round `S^n` of radius `a` in `E^{n+1}` via hyperspherical angles.
pub fn sphere_chart(n: usize, a: f64) -> ImmersionChart {
    let coords: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let mut comps = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut s: Vec<String> = vec!["a".into()];
        s.extend((0..k.min(n)).map(|i| format!("sin(t{i})")));
        if k < n {
            s.push(format!("cos(t{k})"));
        }
        comps.push(s.join("*"));
    }
    let c: Vec<&str> = coords.iter().map(String::as_str).collect();
    let e: Vec<&str> = comps.iter().map(String::as_str).collect();
    ImmersionChart::new(&c, &[("a", a)], &e).unwrap()
}

pub fn cylinder_chart(a: f64) -> ImmersionChart {
    ImmersionChart::new(&["phi", "z"], &[("a", a)], &["a*cos(phi)", "a*sin(phi)", "z"]).unwrap()
}

// ---------------------------------------------------------------- spherically symmetric example

/// `diag(e^mu, rho^2, rho^2 sin^2, e^nu)` with `mu = -nu = -ln(1 - 2m/rho)`.
pub fn schwarzschild(m: f64) -> MetricChart {
    MetricChart::new(
        &["rho", "theta", "phi", "tau"],
        &[("m", m)],
        &[
            "exp(-ln(1-2*m/rho))", "0", "0", "0",
            "rho^2", "0", "0",
            "rho^2*sin(theta)^2", "0",
            "exp(ln(1-2*m/rho))",
        ],
    )
    .unwrap()
}

/// `e^mu diag(1, rho^2, rho^2 sin^2, 1)` with `mu = -2m/rho`.
pub fn isotropic(m: f64) -> MetricChart {
    MetricChart::new(
        &["rho", "theta", "phi", "tau"],
        &[("m", m)],
        &[
            "exp(-2*m/rho)", "0", "0", "0",
            "exp(-2*m/rho)*rho^2", "0", "0",
            "exp(-2*m/rho)*rho^2*sin(theta)^2", "0",
            "exp(-2*m/rho)",
        ],
    )
    .unwrap()
}

pub fn kappa_closed(m: f64, rho: f64) -> f64 {
    2.0 * m * m / rho.powi(6)
}

pub fn kappa_bar_closed(m: f64, rho: f64) -> f64 {
    kappa_closed(m, rho) * (4.0 * m / rho).exp() * ((1.0 + m / (2.0 * rho)) * (1.0 + m / rho)).sqrt()
}

/// The acceptance grid: `rho in [3, 10]`, `theta in [0.3, pi - 0.3]`, 5 x 5.
pub fn example_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(25);
    for i in 0..5 {
        let rho = 3.0 + 7.0 * i as f64 / 4.0;
        for j in 0..5 {
            let theta = 0.3 + (std::f64::consts::PI - 0.6) * j as f64 / 4.0;
            out.push((rho, theta));
        }
    }
    out
}

/// Radial profile and its first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Profile {
    pub rho: f64,
    pub s: f64,
    pub c: f64,
    pub e_mu: f64,
    pub d_mu: f64,
    pub dd_mu: f64,
    pub e_nu: f64,
    pub d_nu: f64,
    pub dd_nu: f64,
}

impl Profile {
    pub fn plain(m: f64, rho: f64, theta: f64) -> Self {
        let f = 1.0 - 2.0 * m / rho;
        let d_mu = -2.0 * m / (rho * rho * f);
        let dd_mu = 2.0 * m * (2.0 * rho - 2.0 * m) / (rho * (rho - 2.0 * m)).powi(2);
        Self {
            rho,
            s: theta.sin(),
            c: theta.cos(),
            e_mu: 1.0 / f,
            d_mu,
            dd_mu,
            e_nu: f,
            d_nu: -d_mu,
            dd_nu: -dd_mu,
        }
    }

    pub fn barred(m: f64, rho: f64, theta: f64) -> Self {
        let mu = -2.0 * m / rho;
        Self {
            rho,
            s: theta.sin(),
            c: theta.cos(),
            e_mu: mu.exp(),
            d_mu: 2.0 * m / (rho * rho),
            dd_mu: -4.0 * m / rho.powi(3),
            e_nu: mu.exp(),
            d_nu: 2.0 * m / (rho * rho),
            dd_nu: -4.0 * m / rho.powi(3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Plain,
    Barred,
}

/// One printed closed form: `Gamma_{ab,c}` (three indices) or `R_{abcd}`
/// (four), 0-based. `corrected` is set when the printed form is a misprint.
pub struct ClosedForm {
    pub label: &'static str,
    pub family: Family,
    pub index: &'static [usize],
    pub printed: fn(&Profile) -> f64,
    pub corrected: Option<fn(&Profile) -> f64>,
}

impl ClosedForm {
    pub fn is_gamma(&self) -> bool {
        self.index.len() == 3
    }

    pub fn expected(&self, p: &Profile) -> f64 {
        self.corrected.unwrap_or(self.printed)(p)
    }
}

macro_rules! form {
    ($label:expr, $fam:ident, [$($i:expr),+], $printed:expr) => {
        ClosedForm { label: $label, family: Family::$fam, index: &[$($i),+], printed: $printed, corrected: None }
    };
    ($label:expr, $fam:ident, [$($i:expr),+], $printed:expr, $fixed:expr) => {
        ClosedForm { label: $label, family: Family::$fam, index: &[$($i),+], printed: $printed, corrected: Some($fixed) }
    };
}

/// Christoffel symbols of the first kind as printed for both metrics,
/// including the negated companions (`Gamma_{22,1} = -Gamma_{12,2}` etc.).
pub fn gamma_table() -> Vec<ClosedForm> {
    vec![
        form!("G_11,1", Plain, [0, 0, 0], |p| 0.5 * p.e_mu * p.d_mu),
        form!("G_22,1", Plain, [1, 1, 0], |p| -p.rho),
        form!("G_12,2", Plain, [0, 1, 1], |p| p.rho),
        form!("G_33,1", Plain, [2, 2, 0], |p| -p.rho * p.s * p.s),
        form!("G_13,3", Plain, [0, 2, 2], |p| p.rho * p.s * p.s),
        form!("G_33,2", Plain, [2, 2, 1], |p| -p.rho * p.s * p.c, |p| -p.rho * p.rho * p.s * p.c),
        form!("G_23,3", Plain, [1, 2, 2], |p| p.rho * p.s * p.c, |p| p.rho * p.rho * p.s * p.c),
        form!("G_44,1", Plain, [3, 3, 0], |p| -0.5 * p.e_nu * p.d_nu),
        form!("G_14,4", Plain, [0, 3, 3], |p| 0.5 * p.e_nu * p.d_nu),
        form!("Gbar_11,1", Barred, [0, 0, 0], |p| 0.5 * p.e_mu * p.d_mu),
        form!("Gbar_22,1", Barred, [1, 1, 0], |p| -0.5 * p.rho * p.e_mu * (2.0 + p.rho * p.d_mu)),
        form!("Gbar_12,2", Barred, [0, 1, 1], |p| 0.5 * p.rho * p.e_mu * (2.0 + p.rho * p.d_mu)),
        form!("Gbar_33,1", Barred, [2, 2, 0], |p| -0.5 * p.rho * p.s * p.s * p.e_mu * (2.0 + p.rho * p.d_mu)),
        form!("Gbar_13,3", Barred, [0, 2, 2], |p| 0.5 * p.rho * p.s * p.s * p.e_mu * (2.0 + p.rho * p.d_mu)),
        form!("Gbar_33,2", Barred, [2, 2, 1], |p| -p.rho * p.rho * p.e_mu * p.s * p.c),
        form!("Gbar_23,3", Barred, [1, 2, 2], |p| p.rho * p.rho * p.e_mu * p.s * p.c),
        form!("Gbar_44,1", Barred, [3, 3, 0], |p| -0.5 * p.e_mu * p.d_mu),
        form!("Gbar_14,4", Barred, [0, 3, 3], |p| 0.5 * p.e_mu * p.d_mu),
    ]
}

/// Riemann components as printed for both metrics.
pub fn riemann_table() -> Vec<ClosedForm> {
    vec![
        form!("R_1212", Plain, [0, 1, 0, 1], |p| 0.5 * p.rho * p.d_mu),
        form!("R_1313", Plain, [0, 2, 0, 2], |p| 0.5 * p.rho * p.s * p.s * p.d_mu),
        form!("R_2323", Plain, [1, 2, 1, 2], |p| p.rho * p.rho * p.s * p.s * (1.0 - 1.0 / p.e_mu)),
        form!("R_1414", Plain, [0, 3, 0, 3], |p| {
            0.5 * p.e_nu * (0.5 * (p.d_mu * p.d_nu - p.d_nu * p.d_nu) - p.dd_nu)
        }),
        form!("R_2424", Plain, [1, 3, 1, 3], |p| -0.5 * p.rho * p.e_nu / p.e_mu * p.d_nu),
        form!(
            "Rbar_1212",
            Barred,
            [0, 1, 0, 1],
            |p| 0.5 * p.rho * p.e_mu * (p.d_mu + p.dd_mu),
            |p| -0.5 * p.rho * p.e_mu * (p.d_mu + p.rho * p.dd_mu)
        ),
        form!(
            "Rbar_1313",
            Barred,
            [0, 2, 0, 2],
            |p| 0.5 * p.rho * p.e_mu * p.s * p.s * (p.d_mu + p.rho * p.dd_mu),
            |p| -0.5 * p.rho * p.e_mu * p.s * p.s * (p.d_mu + p.rho * p.dd_mu)
        ),
        form!("Rbar_2323", Barred, [1, 2, 1, 2], |p| {
            -p.rho.powi(3) * p.e_mu * p.d_mu * p.s * p.s * (1.0 + 0.25 * p.rho * p.d_mu)
        }),
        form!("Rbar_1414", Barred, [0, 3, 0, 3], |p| -0.5 * p.e_mu * p.dd_mu),
        form!("Rbar_2424", Barred, [1, 3, 1, 3], |p| -0.5 * p.rho * p.e_mu * p.d_mu * (1.0 + 0.5 * p.rho * p.d_mu)),
    ]
}
