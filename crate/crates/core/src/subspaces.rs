//! Principal curvature directions and subspaces of an immersed ambient space.
//!
//! For an ambient immersed in flat space with normals `w_P` and second
//! fundamental form `t_{ij,P}`, the shape square `S_ij = t_{ik,P} e^{kl} t_{lj,P}`
//! against the ambient metric `e_ij` gives the generalized eigenproblem
//! `|S - k^2 e| = 0`.

use thiserror::Error;

use crate::geometry::{Chart, CurvatureTensors, GeometryError, ImmersionChart, NestedChart, PointGeometry};
use crate::linalg::{det_lu, sym_gen_eig, LinalgError, Matrix};
use crate::scalar::dot;

/// Sectional ratios must agree to this relative tolerance for isotropy.
pub const ISOTROPY_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubspaceError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("space is not isotropic (sectional ratios span {min:e}..{max:e})")]
    NotIsotropic { min: f64, max: f64 },
    #[error("{0}")]
    Mismatch(String),
}

/// Ambient quantities at one point.
#[derive(Debug, Clone)]
pub struct AmbientGeometry {
    pub point: Vec<f64>,
    pub tensors: CurvatureTensors,
    /// Ambient normals `w_P` in the flat space.
    pub normals: Vec<Vec<f64>>,
    /// `t_{ij,P}`, one `N x N` slab per normal.
    pub t: Vec<Matrix>,
    pub shape: Matrix,
}

fn shape_square(t: &[Matrix], e_inv: &Matrix) -> Matrix {
    let n = e_inv.rows();
    let mut s = Matrix::zeros(n, n);
    for tp in t {
        let prod = &(tp * e_inv) * tp;
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] += prod[(i, j)];
            }
        }
    }
    // exact symmetry; the product is symmetric up to rounding
    Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]))
}

impl AmbientGeometry {
    /// Reads the ambient data off an analyzed immersion point.
    pub fn from_point(pg: &PointGeometry) -> Result<Self, SubspaceError> {
        let ext = pg
            .extrinsic
            .as_ref()
            .ok_or(GeometryError::WrongKind("ambient geometry needs an immersion chart"))?;
        if ext.frame.nested.is_some() {
            return Err(GeometryError::WrongKind("ambient must be a plain immersion").into());
        }
        let t = ext.sff.slabs.clone();
        Ok(Self {
            point: pg.tensors.point.clone(),
            shape: shape_square(&t, &pg.tensors.g_inv),
            normals: ext.frame.normals.clone(),
            tensors: pg.tensors.clone(),
            t,
        })
    }

    pub fn dim(&self) -> usize {
        self.tensors.dim()
    }

    pub fn class(&self) -> usize {
        self.normals.len()
    }

    pub fn metric(&self) -> &Matrix {
        &self.tensors.g
    }

    /// Same geometry seen through normals `w'_P = sum_S q[S][P] w_S`.
    pub fn rotate_normals(&self, q: &Matrix) -> Result<Self, SubspaceError> {
        let c = self.class();
        if q.rows() != c || q.cols() != c {
            return Err(SubspaceError::Mismatch(format!(
                "rotation is {}x{}, ambient has {c} normals",
                q.rows(),
                q.cols()
            )));
        }
        let n = self.dim();
        let t: Vec<Matrix> = (0..c)
            .map(|p| {
                Matrix::from_fn(n, n, |i, j| (0..c).map(|s| q[(s, p)] * self.t[s][(i, j)]).sum())
            })
            .collect();
        let k = self.normals.first().map_or(0, Vec::len);
        let normals = (0..c)
            .map(|p| (0..k).map(|i| (0..c).map(|s| q[(s, p)] * self.normals[s][i]).sum()).collect())
            .collect();
        Ok(Self {
            point: self.point.clone(),
            tensors: self.tensors.clone(),
            shape: shape_square(&t, &self.tensors.g_inv),
            normals,
            t,
        })
    }
}

/// Ambient geometry of an immersion chart at `point`.
pub fn ambient_shape(chart: &ImmersionChart, point: &[f64]) -> Result<AmbientGeometry, SubspaceError> {
    let pg = Chart::Immersion(chart.clone()).analyze(point)?;
    AmbientGeometry::from_point(&pg)
}

/// A multiplicity-`dim` eigenvalue: a principal subspace of that dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalSubspace {
    pub dim: usize,
    pub kappa2: f64,
    /// `kappa~^dim * prod kappa^_i` over the remaining eigenvalues.
    pub mixed_product: f64,
    /// e-orthonormal basis, in ambient coordinates.
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicRelation {
    /// `kappa^2` from the shape operator.
    pub lhs: f64,
    /// `-R / (M (M - 1))`.
    pub rhs: f64,
    /// `||lhs| - |rhs||`.
    pub residual: f64,
    /// Whether `lhs` and `rhs` carry the same sign (zero agrees with zero).
    pub sign_agrees: bool,
    /// Common sectional ratio.
    pub sectional: f64,
}

#[derive(Debug, Clone)]
pub struct PrincipalReport {
    /// Ascending generalized eigenvalues `kappa^_i^2`.
    pub values: Vec<f64>,
    /// e-orthonormal principal directions (columns).
    pub directions: Matrix,
    /// `(eigenvalue, multiplicity)` per group.
    pub groups: Vec<(f64, usize)>,
    /// `prod kappa^_i^2`.
    pub k2: f64,
    /// `det S / det e`.
    pub det_ratio: f64,
    /// Every eigenvalue is simple.
    pub all_distinct: bool,
    /// Groups with multiplicity at least 2.
    pub subspaces: Vec<PrincipalSubspace>,
    /// Present when the spectrum is a single group.
    pub isotropic: Option<IsotropicRelation>,
}

fn sqrt_clamped(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

pub fn principal_spectrum(ag: &AmbientGeometry) -> Result<PrincipalReport, SubspaceError> {
    let spectrum = sym_gen_eig(&ag.shape, ag.metric())?;
    let groups: Vec<(f64, usize)> = spectrum.groups.iter().map(|g| (g.value, g.multiplicity())).collect();
    let k2 = spectrum.product();
    let det_ratio = det_lu(&ag.shape) / ag.tensors.det_g;
    let subspaces = spectrum
        .groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.multiplicity() >= 2)
        .map(|(gi, g)| {
            let others: f64 = spectrum
                .groups
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != gi)
                .flat_map(|(_, o)| o.indices.clone())
                .map(|i| sqrt_clamped(spectrum.values[i]))
                .product();
            PrincipalSubspace {
                dim: g.multiplicity(),
                kappa2: g.value,
                mixed_product: sqrt_clamped(g.value).powi(g.multiplicity() as i32) * others,
                directions: g.indices.clone().map(|i| spectrum.vectors.column(i)).collect(),
            }
        })
        .collect();
    let isotropic = if spectrum.groups.len() == 1 && ag.dim() >= 2 {
        isotropic_relation(&ag.tensors, spectrum.groups[0].value).ok()
    } else {
        None
    };
    Ok(PrincipalReport {
        all_distinct: spectrum.groups.len() == spectrum.values.len(),
        values: spectrum.values,
        directions: spectrum.vectors,
        groups,
        k2,
        det_ratio,
        subspaces,
        isotropic,
    })
}

/// Compares `kappa2` with `-R / (M (M - 1))` for an isotropic space.
pub fn isotropic_relation(t: &CurvatureTensors, kappa2: f64) -> Result<IsotropicRelation, SubspaceError> {
    let m = t.dim();
    if m < 2 {
        return Err(SubspaceError::Mismatch("isotropy needs M >= 2".into()));
    }
    let g = &t.g;
    // R_{adbc} / (g_ab g_cd - g_ac g_bd) over every non-degenerate index set
    let mut ratios = Vec::new();
    let mut max_den: f64 = 0.0;
    let mut entries = Vec::new();
    for a in 0..m {
        for d in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let den = g[(a, b)] * g[(c, d)] - g[(a, c)] * g[(b, d)];
                    max_den = max_den.max(den.abs());
                    entries.push((t.riemann[[a, d, b, c]], den));
                }
            }
        }
    }
    for (num, den) in entries {
        if den.abs() > 1e-8 * max_den {
            ratios.push(num / den);
        }
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max - min > ISOTROPY_RTOL * max.abs().max(min.abs()).max(1e-300) && max - min > 1e-12 {
        return Err(SubspaceError::NotIsotropic { min, max });
    }
    let rhs = -t.scalar / (m * (m - 1)) as f64;
    let tiny = 1e-12 * kappa2.abs().max(rhs.abs()).max(1e-300);
    let sign_of = |x: f64| if x.abs() <= tiny { 0 } else if x > 0.0 { 1 } else { -1 };
    Ok(IsotropicRelation {
        lhs: kappa2,
        rhs,
        residual: (kappa2.abs() - rhs.abs()).abs(),
        sign_agrees: sign_of(kappa2) == sign_of(rhs),
        sectional: 0.5 * (min + max),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceResidual {
    /// Least-squares `kappa^2`.
    pub kappa2: f64,
    /// Max-norm residual of the defining equations.
    pub residual: f64,
    /// Max norm of the `kappa^2 e_ij dx^j` term, for scaling.
    pub scale: f64,
}

/// Residual of `kappa^P_ab g^ad t_{ij,P} dx^j/dq^d - kappa^2 e_ij dx^j/dq^b`
/// over all ambient indices `i` and subspace indices `b`, with `kappa^2`
/// fitted by least squares. Near zero certifies a subspace of curvature.
pub fn subspace_residual(
    ag: &AmbientGeometry,
    chart: &NestedChart,
    point: &[f64],
) -> Result<SubspaceResidual, SubspaceError> {
    let y = chart.ambient_point(point)?;
    let gap = y.iter().zip(&ag.point).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if y.len() != ag.point.len() || gap > 1e-12 * (1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
        return Err(SubspaceError::Mismatch(
            "ambient geometry was evaluated at a different point".into(),
        ));
    }
    let pg = Chart::Nested(chart.clone()).analyze(point)?;
    let ext = pg.extrinsic.as_ref().expect("nested charts are extrinsic");
    let g_inv = &pg.tensors.g_inv;
    let m = pg.tensors.dim();
    let n = ag.dim();
    let jac_jets = chart.inner().position_jets(point, 1)?;
    let jac = Matrix::from_fn(n, m, |j, d| jac_jets[j].partial(&[d]));
    let kappa: Vec<Matrix> = ag
        .normals
        .iter()
        .map(|w| Matrix::from_fn(m, m, |a, b| dot(&ext.hessians[a][b], w)))
        .collect();

    let mut lhs = Matrix::zeros(n, m);
    for (kp, tp) in kappa.iter().zip(&ag.t) {
        // (t J)_{i d} (g^-1)_{d a} kappa_{a b}
        let term = &(&(tp * &jac) * g_inv) * kp;
        for i in 0..n {
            for b in 0..m {
                lhs[(i, b)] += term[(i, b)];
            }
        }
    }
    let rhs = ag.metric() * &jac;
    let num: f64 = lhs.as_slice().iter().zip(rhs.as_slice()).map(|(a, b)| a * b).sum();
    let den: f64 = rhs.as_slice().iter().map(|b| b * b).sum();
    let kappa2 = if den > 0.0 { num / den } else { 0.0 };
    let residual = lhs
        .as_slice()
        .iter()
        .zip(rhs.as_slice())
        .fold(0.0f64, |mx, (a, b)| mx.max((a - kappa2 * b).abs()));
    Ok(SubspaceResidual {
        kappa2,
        residual,
        scale: rhs.max_abs() * kappa2.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(a: f64) -> ImmersionChart {
        ImmersionChart::new(
            &["theta", "phi"],
            &[("a", a)],
            &["a*sin(theta)*cos(phi)", "a*sin(theta)*sin(phi)", "a*cos(theta)"],
        )
        .unwrap()
    }

    fn cylinder(a: f64) -> ImmersionChart {
        ImmersionChart::new(&["phi", "z"], &[("a", a)], &["a*cos(phi)", "a*sin(phi)", "z"]).unwrap()
    }

    #[test]
    fn sphere_shape_is_umbilic() {
        let a = 2.0;
        let ag = ambient_shape(&sphere(a), &[0.7, 0.2]).unwrap();
        let e = ag.metric();
        for i in 0..2 {
            for j in 0..2 {
                assert!((ag.shape[(i, j)] - e[(i, j)] / (a * a)).abs() < 1e-12);
            }
        }
        let rep = principal_spectrum(&ag).unwrap();
        assert_eq!(rep.groups.len(), 1);
        assert_eq!(rep.groups[0].1, 2);
        assert!((rep.k2 - a.powi(-4)).abs() < 1e-12);
        let iso = rep.isotropic.unwrap();
        assert!(iso.residual < 1e-12);
        assert!(iso.sign_agrees);
    }

    #[test]
    fn cylinder_spectrum() {
        let a = 0.5;
        let rep = principal_spectrum(&ambient_shape(&cylinder(a), &[0.3, 1.0]).unwrap()).unwrap();
        assert!(rep.values[0].abs() < 1e-12);
        assert!((rep.values[1] - 1.0 / (a * a)).abs() < 1e-12);
        assert!(rep.all_distinct);
        assert!(rep.k2.abs() < 1e-12);
    }

    #[test]
    fn plane_has_zero_shape() {
        let plane = ImmersionChart::new(&["u", "v"], &[], &["u", "v", "0*u"]).unwrap();
        let ag = ambient_shape(&plane, &[0.1, 0.2]).unwrap();
        assert_eq!(ag.shape.max_abs(), 0.0);
        let rep = principal_spectrum(&ag).unwrap();
        assert!(rep.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cylinder_meridian_and_slant() {
        let a = 1.0;
        let amb = cylinder(a);
        let meridian = NestedChart::new(amb.clone(), ImmersionChart::new(&["s"], &[], &["0.4", "s"]).unwrap()).unwrap();
        let p = [0.6];
        let ag = ambient_shape(&amb, &meridian.ambient_point(&p).unwrap()).unwrap();
        let r = subspace_residual(&ag, &meridian, &p).unwrap();
        assert!(r.residual < 1e-12);
        assert!(r.kappa2.abs() < 1e-12);

        let slant = NestedChart::new(amb.clone(), ImmersionChart::new(&["s"], &[], &["s", "s"]).unwrap()).unwrap();
        let ag = ambient_shape(&amb, &slant.ambient_point(&p).unwrap()).unwrap();
        let r = subspace_residual(&ag, &slant, &p).unwrap();
        assert!(r.residual > 1e-3);
    }

    #[test]
    fn mismatched_point_is_rejected() {
        let amb = sphere(1.0);
        let c = NestedChart::new(amb.clone(), ImmersionChart::new(&["s"], &[], &["1.0", "s"]).unwrap()).unwrap();
        let ag = ambient_shape(&amb, &[0.5, 0.5]).unwrap();
        assert!(matches!(subspace_residual(&ag, &c, &[0.2]), Err(SubspaceError::Mismatch(_))));
    }

    #[test]
    fn non_isotropic_is_rejected() {
        let pg = Chart::Immersion(cylinder(1.0)).analyze(&[0.1, 0.1]).unwrap();
        // flat, so every ratio is zero: isotropic with both sides zero
        let iso = isotropic_relation(&pg.tensors, 0.0).unwrap();
        assert_eq!(iso.residual, 0.0);
        let product = ImmersionChart::new(
            &["x", "y", "z"],
            &[],
            &["sin(x)*cos(y)", "sin(x)*sin(y)", "cos(x)", "z"],
        )
        .unwrap();
        let t = Chart::Immersion(product).tensors(&[0.8, 0.1, 0.0]).unwrap();
        assert!(matches!(isotropic_relation(&t, 1.0), Err(SubspaceError::NotIsotropic { .. })));
    }
}
