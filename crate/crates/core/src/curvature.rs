//! The curvature invariant `kappa^2` by two routes: the extrinsic determinant
//! `det(K.K) / |g|` of the second fundamental form, and the intrinsic
//! formula built from condensed Riemann-tensor determinants.

use thiserror::Error;

use crate::geometry::{nested_split, CurvatureTensors, GeometryError, PointGeometry, SecondFundamentalForm, Tensor4};
use crate::linalg::{det_lu, Matrix};

/// A coordinate-plane component `R_pqpq` counts as vanishing below this
/// fraction of the largest one.
pub const PIVOT_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("condensed blocks need M > 2 (M = {m}); use the Gaussian reduction")]
    UseGaussianReduction { m: usize },
    #[error("every R_pqpq vanishes while R does not")]
    PivotDegenerate,
    #[error("pivot ({p}, {q}) is not a valid pair for M = {m}")]
    InvalidPivot { p: usize, q: usize, m: usize },
    #[error("R_pqpq vanishes at pivot ({p}, {q})")]
    ZeroPivot { p: usize, q: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotPolicy {
    /// `(0, 1)` unless `R_0101` vanishes, then the largest `|R_pqpq|`.
    #[default]
    Auto,
    /// Largest `|R_pqpq|`, first pair in lexicographic order on ties.
    MaxAbs,
    Fixed(usize, usize),
}

impl PivotPolicy {
    pub fn describe(&self) -> String {
        match self {
            PivotPolicy::Auto => "auto".into(),
            PivotPolicy::MaxAbs => "max".into(),
            PivotPolicy::Fixed(p, q) => format!("{p},{q}"),
        }
    }
}

/// The four condensed determinants for pivot pair `(p, q)`:
/// - `a = det[R_{p i p j}]`, `i, j != p`
/// - `b = det[R_{q i q j}]`, `i, j != q`
/// - `c = det[R_{p i q j}]`, rows `i != p`, columns `j != q`
/// - `d = det[R_{q i p j}]`, rows `i != q`, columns `j != p`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensedBlocks {
    pub p: usize,
    pub q: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

fn block(r: &Tensor4, first: usize, second: usize, skip_row: usize, skip_col: usize) -> Matrix {
    let m = r.dim();
    let rows: Vec<usize> = (0..m).filter(|&i| i != skip_row).collect();
    let cols: Vec<usize> = (0..m).filter(|&j| j != skip_col).collect();
    Matrix::from_fn(m - 1, m - 1, |i, j| r[[first, rows[i], second, cols[j]]])
}

pub fn condensed_blocks(r: &Tensor4, p: usize, q: usize) -> Result<CondensedBlocks, CurvatureError> {
    let m = r.dim();
    if m <= 2 {
        return Err(CurvatureError::UseGaussianReduction { m });
    }
    if p == q || p >= m || q >= m {
        return Err(CurvatureError::InvalidPivot { p, q, m });
    }
    Ok(CondensedBlocks {
        p,
        q,
        a: det_lu(&block(r, p, p, p, p)),
        b: det_lu(&block(r, q, q, q, q)),
        c: det_lu(&block(r, p, q, p, q)),
        d: det_lu(&block(r, q, p, q, p)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KappaFlags {
    pub flat: bool,
    pub pivot_degenerate: bool,
    pub invalid_radicand: bool,
    /// The intrinsic route is unavailable; `kappa2` comes from the
    /// second fundamental form.
    pub extrinsic_only: bool,
    /// Nested chart whose geodesic part vanishes.
    pub geodesic: bool,
    /// `kappa2 < 0`.
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicKappa {
    /// NaN when the radicand is invalid.
    pub kappa2: f64,
    /// Signed value; for `M = 2` this is `R_0101 / |g|`.
    pub kappa: f64,
    pub pivot: Option<(usize, usize)>,
    pub blocks: Option<CondensedBlocks>,
    pub flat: bool,
    pub invalid_radicand: bool,
}

fn pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |p| (p + 1..m).map(move |q| (p, q)))
}

/// Chooses the pivot pair under `policy`.
pub fn choose_pivot(r: &Tensor4, policy: PivotPolicy) -> Result<(usize, usize), CurvatureError> {
    let m = r.dim();
    let plane = |(p, q): (usize, usize)| r[[p, q, p, q]].abs();
    let mut best = None;
    let mut best_val = 0.0;
    for pq in pairs(m) {
        if plane(pq) > best_val {
            best_val = plane(pq);
            best = Some(pq);
        }
    }
    let threshold = PIVOT_RTOL * best_val;
    let Some(argmax) = best else {
        return Err(CurvatureError::PivotDegenerate);
    };
    if best_val <= PIVOT_RTOL * r.max_abs() {
        return Err(CurvatureError::PivotDegenerate);
    }
    match policy {
        PivotPolicy::MaxAbs => Ok(argmax),
        PivotPolicy::Auto => Ok(if plane((0, 1)) > threshold { (0, 1) } else { argmax }),
        PivotPolicy::Fixed(p, q) => {
            if p == q || p >= m || q >= m {
                return Err(CurvatureError::InvalidPivot { p, q, m });
            }
            if plane((p, q)) <= threshold {
                return Err(CurvatureError::ZeroPivot { p, q });
            }
            Ok((p, q))
        }
    }
}

/// Real root `x^(1/n)`; odd `n` keeps the sign, even `n` rejects negatives.
fn real_root(x: f64, n: usize) -> Option<f64> {
    if n == 1 {
        return Some(x);
    }
    if x < 0.0 {
        if n.is_multiple_of(2) {
            return None;
        }
        return Some(-(-x).powf(1.0 / n as f64));
    }
    Some(x.powf(1.0 / n as f64))
}

fn signed_sqrt(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

/// `kappa^2` from the Riemann tensor alone.
///
/// `M = 2`: `kappa = R_pqpq / |g|`. `M > 2`:
/// `kappa^2 = [(a b)^(1/r) - (c d)^(1/r)]^r / (|g|^2 R_pqpq^r)` with
/// `r = M - 2` and the condensed blocks `a, b, c, d` of the pivot pair.
pub fn kappa_intrinsic(t: &CurvatureTensors, policy: PivotPolicy) -> Result<IntrinsicKappa, CurvatureError> {
    let m = t.dim();
    if m < 2 || t.is_flat() {
        return Ok(IntrinsicKappa {
            kappa2: 0.0,
            kappa: 0.0,
            pivot: None,
            blocks: None,
            flat: true,
            invalid_radicand: false,
        });
    }
    let (p, q) = choose_pivot(&t.riemann, policy)?;
    let rpq = t.riemann[[p, q, p, q]];
    if m == 2 {
        let kappa = rpq / t.det_g;
        return Ok(IntrinsicKappa {
            kappa2: kappa * kappa,
            kappa,
            pivot: Some((p, q)),
            blocks: None,
            flat: false,
            invalid_radicand: false,
        });
    }
    let blocks = condensed_blocks(&t.riemann, p, q)?;
    let r = m - 2;
    let (kappa2, invalid) = match (real_root(blocks.a * blocks.b, r), real_root(blocks.c * blocks.d, r)) {
        (Some(x), Some(y)) => {
            let num = (x - y).powi(r as i32);
            (num / (t.det_g * t.det_g * rpq.powi(r as i32)), false)
        }
        _ => (f64::NAN, true),
    };
    Ok(IntrinsicKappa {
        kappa2,
        kappa: signed_sqrt(kappa2),
        pivot: Some((p, q)),
        blocks: Some(blocks),
        flat: false,
        invalid_radicand: invalid,
    })
}

/// `det(K.K) / |g|`.
pub fn kappa_extrinsic(sff: &SecondFundamentalForm, g_inv: &Matrix, det_g: f64, gram: &Matrix) -> f64 {
    sff.kappa_squared(g_inv, det_g, gram)
}

/// Right-hand side of the Gauss relation:
/// `G[r][a][d][b] = n_LS (tau^L_ab tau^S_dr - tau^L_ad tau^S_br)`.
pub fn gauss_tensor(sff: &SecondFundamentalForm, gram: &Matrix, m: usize) -> Tensor4 {
    Tensor4::from_fn(m, |[r, a, d, b]| {
        let mut acc = 0.0;
        for (l, tl) in sff.slabs.iter().enumerate() {
            for (s, ts) in sff.slabs.iter().enumerate() {
                let w = gram[(l, s)];
                if w != 0.0 {
                    acc += w * (tl[(a, b)] * ts[(d, r)] - tl[(a, d)] * ts[(b, r)]);
                }
            }
        }
        acc
    })
}

/// `max |R - G|` over all index tuples.
pub fn gauss_residual(r: &Tensor4, sff: &SecondFundamentalForm, gram: &Matrix) -> f64 {
    r.max_diff(&gauss_tensor(sff, gram, r.dim()))
}

fn relative(lhs: f64, rhs: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Relative residuals of the two condensation identities
/// `|K.K| (tau_pp . tau_qq)^(M-2) = a b / |g|` and
/// `|K.K| (tau_pq . tau_qp)^(M-2) = c d / |g|`.
///
/// Both are measured against the largest of the four sides, since the
/// second pair vanishes whenever `tau_pq` does.
pub fn identity_check(
    sff: &SecondFundamentalForm,
    gram: &Matrix,
    t: &CurvatureTensors,
    pivot: (usize, usize),
) -> Result<[f64; 2], CurvatureError> {
    let (p, q) = pivot;
    let blocks = condensed_blocks(&t.riemann, p, q)?;
    let kk = det_lu(&sff.shape_square(&t.g_inv, gram));
    let pair = |a: (usize, usize), b: (usize, usize)| {
        let mut acc = 0.0;
        for (l, tl) in sff.slabs.iter().enumerate() {
            for (s, ts) in sff.slabs.iter().enumerate() {
                acc += gram[(l, s)] * tl[(a.0, a.1)] * ts[(b.0, b.1)];
            }
        }
        acc
    };
    let r = t.dim() as i32 - 2;
    let lhs1 = kk * pair((p, p), (q, q)).powi(r);
    let lhs2 = kk * pair((p, q), (q, p)).powi(r);
    let rhs1 = blocks.a * blocks.b / t.det_g;
    let rhs2 = blocks.c * blocks.d / t.det_g;
    let scale = [lhs1, lhs2, rhs1, rhs2].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok([relative(lhs1, rhs1, scale), relative(lhs2, rhs2, scale)])
}

/// Both routes and the consistency checks at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaReport {
    pub kappa2_extrinsic: Option<f64>,
    pub kappa2_intrinsic: Option<f64>,
    /// Intrinsic when available, extrinsic otherwise (and always for curves).
    pub kappa2: f64,
    /// `sign(kappa2) sqrt|kappa2|`, or the signed Gaussian curvature when
    /// `M = 2` and the intrinsic route is used.
    pub kappa: f64,
    pub kappa_n2: Option<f64>,
    pub kappa_g2: Option<f64>,
    pub split_residual: Option<f64>,
    pub pivot: Option<(usize, usize)>,
    pub blocks: Option<CondensedBlocks>,
    pub gauss_residual: Option<f64>,
    pub identity_residuals: Option<[f64; 2]>,
    pub flags: KappaFlags,
}

impl KappaReport {
    /// `|kappa2_ext - kappa2_int| / max(1, |kappa2_ext|)` when both exist.
    pub fn route_gap(&self) -> Option<f64> {
        match (self.kappa2_extrinsic, self.kappa2_intrinsic) {
            (Some(e), Some(i)) => Some((e - i).abs() / e.abs().max(1.0)),
            _ => None,
        }
    }
}

pub fn kappa_report(pg: &PointGeometry, policy: PivotPolicy) -> Result<KappaReport, CurvatureError> {
    let t = &pg.tensors;
    let m = t.dim();
    let mut flags = KappaFlags::default();

    let intrinsic = if m >= 2 {
        match kappa_intrinsic(t, policy) {
            Ok(k) => Some(k),
            Err(CurvatureError::PivotDegenerate) => {
                flags.pivot_degenerate = true;
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    if let Some(k) = &intrinsic {
        flags.flat = k.flat;
        flags.invalid_radicand = k.invalid_radicand;
    }

    let mut report = KappaReport {
        kappa2_extrinsic: None,
        kappa2_intrinsic: intrinsic.as_ref().filter(|k| !k.invalid_radicand).map(|k| k.kappa2),
        kappa2: 0.0,
        kappa: 0.0,
        kappa_n2: None,
        kappa_g2: None,
        split_residual: None,
        pivot: intrinsic.as_ref().and_then(|k| k.pivot),
        blocks: intrinsic.as_ref().and_then(|k| k.blocks),
        gauss_residual: None,
        identity_residuals: None,
        flags,
    };

    if let Some(ext) = &pg.extrinsic {
        let gram = ext.frame.gram();
        let k2 = kappa_extrinsic(&ext.sff, &t.g_inv, t.det_g, &gram);
        report.kappa2_extrinsic = Some(k2);
        report.gauss_residual = Some(gauss_residual(&t.riemann, &ext.sff, &gram));
        if let (Some(pivot), true) = (report.pivot, m > 2) {
            report.identity_residuals = Some(identity_check(&ext.sff, &gram, t, pivot)?);
        }
        if ext.frame.nested.is_some() {
            let split = nested_split(ext, &t.g_inv, t.det_g)?;
            report.kappa_n2 = Some(split.kappa_n2);
            report.kappa_g2 = Some(split.kappa_g2);
            report.split_residual = Some(split.split_residual);
            report.flags.geodesic = split.geodesic;
        } else {
            report.kappa_n2 = Some(k2);
            report.kappa_g2 = Some(0.0);
            report.split_residual = Some(0.0);
        }
    }

    match (&intrinsic, report.kappa2_extrinsic) {
        (Some(k), _) if m >= 2 && !k.invalid_radicand => {
            report.kappa2 = k.kappa2;
            report.kappa = k.kappa;
        }
        (_, Some(e)) => {
            report.flags.extrinsic_only = true;
            report.kappa2 = e;
            report.kappa = signed_sqrt(e);
        }
        (Some(_), None) => {
            report.kappa2 = f64::NAN;
            report.kappa = f64::NAN;
        }
        (None, None) => {
            if m < 2 {
                report.flags.flat = true;
            } else {
                return Err(CurvatureError::PivotDegenerate);
            }
        }
    }
    report.flags.negative = report.kappa2 < 0.0;
    Ok(report)
}
