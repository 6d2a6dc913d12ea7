//! Serializable report types. Field order is the output order.
//!
//! Tensor indices in reports are 1-based (`R_1212` is `[1, 2, 1, 2]`).

use kappa_core::curvature::KappaReport;
use kappa_core::geometry::{CurvatureTensors, Extrinsic};
use kappa_core::subspaces::{PrincipalReport, SubspaceResidual};
use kappa_core::Matrix;
use serde::Serialize;

use crate::manifest::Manifest;

pub const SCHEMA: &str = "kappa-report/1";

/// Components below this fraction of the largest are not listed.
pub const LISTING_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub manifest: String,
    pub origin: String,
    pub manifest_sha256: String,
    pub engine_version: &'static str,
    pub pivot_policy: String,
}

impl Provenance {
    pub fn new(m: &Manifest, pivot_policy: String) -> Self {
        Self {
            manifest: m.name.clone(),
            origin: m.origin.clone(),
            manifest_sha256: m.sha256.clone(),
            engine_version: kappa_core::VERSION,
            pivot_policy,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Document<T: Serialize> {
    pub schema: &'static str,
    pub command: &'static str,
    pub provenance: Provenance,
    pub coords: Vec<String>,
    pub points: Vec<T>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Component {
    pub index: Vec<usize>,
    pub value: f64,
}

fn listing<const R: usize>(entries: impl Iterator<Item = ([usize; R], f64)>, keep: impl Fn(&[usize; R]) -> bool) -> Vec<Component> {
    let all: Vec<([usize; R], f64)> = entries.filter(|(i, _)| keep(i)).collect();
    let max = all.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    all.into_iter()
        .filter(|(_, v)| max > 0.0 && v.abs() > LISTING_RTOL * max)
        .map(|(i, value)| Component {
            index: i.iter().map(|k| k + 1).collect(),
            value,
        })
        .collect()
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.to_rows()
}

#[derive(Debug, Clone, Serialize)]
pub struct TensorsPoint {
    pub point: Vec<f64>,
    pub metric: Vec<Vec<f64>>,
    pub det_metric: f64,
    /// `Gamma_{ab,c}`, listed for `a <= b`.
    pub christoffel_first: Vec<Component>,
    /// `Gamma^c_{ab}` as `[c, a, b]`, listed for `a <= b`.
    pub christoffel_second: Vec<Component>,
    /// `R_{abcd}` for `a < b`, `c < d`, `(a, b) <= (c, d)`; empty when flat.
    pub riemann: Vec<Component>,
    pub max_abs_riemann: f64,
    pub scalar_curvature: f64,
    pub flat: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_fundamental_form: Option<Vec<Vec<Vec<f64>>>>,
}

impl TensorsPoint {
    pub fn new(t: &CurvatureTensors, ext: Option<&Extrinsic>) -> Self {
        Self {
            point: t.point.clone(),
            metric: rows(&t.g),
            det_metric: t.det_g,
            christoffel_first: listing(t.gamma_first.entries(), |[a, b, _]| a <= b),
            christoffel_second: listing(t.gamma_second.entries(), |[_, a, b]| a <= b),
            riemann: if t.is_flat() {
                Vec::new()
            } else {
                listing(t.riemann.entries(), |&[a, b, c, d]| a < b && c < d && (a, b) <= (c, d))
            },
            max_abs_riemann: t.max_abs_riemann(),
            scalar_curvature: t.scalar,
            flat: t.is_flat(),
            second_fundamental_form: ext.map(|e| e.sff.slabs.iter().map(rows).collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Blocks {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Flags {
    pub flat: bool,
    pub pivot_degenerate: bool,
    pub invalid_radicand: bool,
    pub extrinsic_only: bool,
    pub geodesic: bool,
    pub negative: bool,
}

impl Flags {
    /// Set flags joined by `|`, for CSV.
    pub fn joined(&self) -> String {
        let named = [
            (self.flat, "flat"),
            (self.pivot_degenerate, "pivot_degenerate"),
            (self.invalid_radicand, "invalid_radicand"),
            (self.extrinsic_only, "extrinsic_only"),
            (self.geodesic, "geodesic"),
            (self.negative, "negative"),
        ];
        named.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect::<Vec<_>>().join("|")
    }
}

fn signed_sqrt(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaPoint {
    pub point: Vec<f64>,
    pub kappa2: f64,
    pub kappa: f64,
    pub kappa2_extrinsic: Option<f64>,
    pub kappa2_intrinsic: Option<f64>,
    pub route_gap: Option<f64>,
    pub kappa_n: Option<f64>,
    pub kappa_g: Option<f64>,
    pub kappa_n2: Option<f64>,
    pub kappa_g2: Option<f64>,
    pub split_residual: Option<f64>,
    pub pivot: Option<[usize; 2]>,
    pub blocks: Option<Blocks>,
    pub gauss_residual: Option<f64>,
    pub identity_residuals: Option<[f64; 2]>,
    pub flags: Flags,
}

impl KappaPoint {
    pub fn new(point: &[f64], r: &KappaReport) -> Self {
        let f = &r.flags;
        Self {
            point: point.to_vec(),
            kappa2: r.kappa2,
            kappa: r.kappa,
            kappa2_extrinsic: r.kappa2_extrinsic,
            kappa2_intrinsic: r.kappa2_intrinsic,
            route_gap: r.route_gap(),
            kappa_n: r.kappa_n2.map(signed_sqrt),
            kappa_g: r.kappa_g2.map(signed_sqrt),
            kappa_n2: r.kappa_n2,
            kappa_g2: r.kappa_g2,
            split_residual: r.split_residual,
            pivot: r.pivot.map(|(p, q)| [p + 1, q + 1]),
            blocks: r.blocks.as_ref().map(|b| Blocks { a: b.a, b: b.b, c: b.c, d: b.d }),
            gauss_residual: r.gauss_residual,
            identity_residuals: r.identity_residuals,
            flags: Flags {
                flat: f.flat,
                pivot_degenerate: f.pivot_degenerate,
                invalid_radicand: f.invalid_radicand,
                extrinsic_only: f.extrinsic_only,
                geodesic: f.geodesic,
                negative: f.negative,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Group {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Subspace {
    pub dim: usize,
    pub kappa2: f64,
    pub mixed_product: f64,
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Isotropic {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub sign_agrees: bool,
    pub sectional: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub kappa2: f64,
    pub residual: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrincipalPoint {
    pub point: Vec<f64>,
    pub ambient_point: Vec<f64>,
    pub values: Vec<f64>,
    pub groups: Vec<Group>,
    /// Columns of the e-orthonormal eigenvector matrix.
    pub directions: Vec<Vec<f64>>,
    pub k2: f64,
    pub det_ratio: f64,
    pub all_distinct: bool,
    pub subspaces: Vec<Subspace>,
    pub isotropic: Option<Isotropic>,
    /// Present for nested manifests.
    pub subspace_residual: Option<Residual>,
}

impl PrincipalPoint {
    pub fn new(point: &[f64], ambient: &[f64], r: &PrincipalReport, res: Option<&SubspaceResidual>) -> Self {
        Self {
            point: point.to_vec(),
            ambient_point: ambient.to_vec(),
            values: r.values.clone(),
            groups: r.groups.iter().map(|&(value, multiplicity)| Group { value, multiplicity }).collect(),
            directions: r.directions.columns(),
            k2: r.k2,
            det_ratio: r.det_ratio,
            all_distinct: r.all_distinct,
            subspaces: r
                .subspaces
                .iter()
                .map(|s| Subspace {
                    dim: s.dim,
                    kappa2: s.kappa2,
                    mixed_product: s.mixed_product,
                    directions: s.directions.clone(),
                })
                .collect(),
            isotropic: r.isotropic.as_ref().map(|i| Isotropic {
                lhs: i.lhs,
                rhs: i.rhs,
                residual: i.residual,
                sign_agrees: i.sign_agrees,
                sectional: i.sectional,
            }),
            subspace_residual: res.map(|s| Residual {
                kappa2: s.kappa2,
                residual: s.residual,
                scale: s.scale,
            }),
        }
    }
}
