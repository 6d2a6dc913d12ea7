use crate::expr::Jet;
use crate::linalg::{det_lu, extend_orthonormal, LinalgError, Matrix};
use crate::scalar::dot;

use super::GeometryError;

/// Orthonormal frame data of an immersed space at one point.
#[derive(Debug, Clone)]
pub struct FrameBundle {
    pub point: Vec<f64>,
    /// `g_a = dx/dq^a`, vectors in the flat space.
    pub tangents: Vec<Vec<f64>>,
    /// Orthonormal normals `n_L`. For nested charts the geodesic normals come
    /// first, then the ambient normals.
    pub normals: Vec<Vec<f64>>,
    /// Order-1 jets of `normals` (plain immersions only).
    pub normal_jets: Option<Vec<Vec<Jet>>>,
    pub nested: Option<NestedFrame>,
}

/// Extra frame data when the subspace lives in an immersed ambient space.
#[derive(Debug, Clone)]
pub struct NestedFrame {
    /// `dX/dy^k` of the ambient immersion.
    pub ambient_tangents: Vec<Vec<f64>>,
    /// `w_P`, orthonormal, orthogonal to the ambient tangents.
    pub ambient_normals: Vec<Vec<f64>>,
    /// Unit vectors tangent to the ambient and normal to the subspace.
    pub geodesic_normals: Vec<Vec<f64>>,
}

impl FrameBundle {
    pub fn class(&self) -> usize {
        self.normals.len()
    }

    /// `n_L . n_S`.
    pub fn gram(&self) -> Matrix {
        let c = self.normals.len();
        Matrix::from_fn(c, c, |i, j| dot(&self.normals[i], &self.normals[j]))
    }

    /// Largest `|n_L . g_a|` and `|n_L . n_S - delta_LS|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, n) in self.normals.iter().enumerate() {
            for t in &self.tangents {
                worst = worst.max(dot(n, t).abs());
            }
            for (s, m) in self.normals.iter().enumerate() {
                let delta = if l == s { 1.0 } else { 0.0 };
                worst = worst.max((dot(n, m) - delta).abs());
            }
        }
        worst
    }

    /// Replaces `n_L` by `sum_S q[S][L] n_S` for a `C x C` matrix `q`.
    /// Nested frame data and normal jets are dropped, since a general
    /// rotation mixes the two normal families.
    pub fn rotate_normals(&self, q: &Matrix) -> Result<FrameBundle, GeometryError> {
        let c = self.class();
        if q.rows() != c || q.cols() != c {
            return Err(GeometryError::Dimension(format!(
                "rotation is {}x{}, frame has {c} normals",
                q.rows(),
                q.cols()
            )));
        }
        let dim = self.tangents[0].len();
        let normals = (0..c)
            .map(|l| (0..dim).map(|i| (0..c).map(|s| q[(s, l)] * self.normals[s][i]).sum()).collect())
            .collect();
        Ok(FrameBundle {
            point: self.point.clone(),
            tangents: self.tangents.clone(),
            normals,
            normal_jets: None,
            nested: None,
        })
    }
}

/// `tau^L_ab`, one symmetric `M x M` slab per normal.
#[derive(Debug, Clone)]
pub struct SecondFundamentalForm {
    pub slabs: Vec<Matrix>,
}

impl SecondFundamentalForm {
    /// `tau^L_ab = (d_a d_b x) . n_L`.
    pub fn from_frame(hessians: &[Vec<Vec<f64>>], normals: &[Vec<f64>]) -> Self {
        let m = hessians.len();
        let slabs = normals
            .iter()
            .map(|n| Matrix::from_fn(m, m, |a, b| dot(&hessians[a][b], n)))
            .collect();
        Self { slabs }
    }

    pub fn class(&self) -> usize {
        self.slabs.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.slabs.iter().fold(0.0, |m, s| m.max(s.max_abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        self.slabs.iter().fold(0.0, |m, s| m.max(s.asymmetry()))
    }

    /// `(K.K)_ac = tau^L_ab g^bd tau^S_cd n_LS`.
    pub fn shape_square(&self, g_inv: &Matrix, gram: &Matrix) -> Matrix {
        let m = g_inv.rows();
        let mut out = Matrix::zeros(m, m);
        let raised: Vec<Matrix> = self.slabs.iter().map(|t| t * g_inv).collect();
        for (l, tl) in raised.iter().enumerate() {
            for (s, ts) in self.slabs.iter().enumerate() {
                let w = gram[(l, s)];
                if w == 0.0 {
                    continue;
                }
                for a in 0..m {
                    for c in 0..m {
                        let mut acc = 0.0;
                        for d in 0..m {
                            acc += tl[(a, d)] * ts[(c, d)];
                        }
                        out[(a, c)] += w * acc;
                    }
                }
            }
        }
        out
    }

    /// `det(K.K) / |g|`, the squared curvature of the form.
    pub fn kappa_squared(&self, g_inv: &Matrix, det_g: f64, gram: &Matrix) -> f64 {
        if self.slabs.is_empty() {
            return 0.0;
        }
        det_lu(&self.shape_square(g_inv, gram)) / det_g
    }
}

/// Frame, hessians and second fundamental form of an immersed point.
#[derive(Debug, Clone)]
pub struct Extrinsic {
    pub frame: FrameBundle,
    /// `hessians[a][b] = d_a d_b x`.
    pub hessians: Vec<Vec<Vec<f64>>>,
    pub sff: SecondFundamentalForm,
}

fn linalg_to_geometry(e: LinalgError) -> GeometryError {
    match e {
        LinalgError::RankDeficient { column } => GeometryError::DegenerateJacobian { column },
        other => GeometryError::Linalg(other),
    }
}

/// Tangent vectors and second derivatives from position jets of order >= 2.
pub fn hessians(position: &[Jet]) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
    let m = position[0].nvars();
    let tangents = (0..m).map(|a| position.iter().map(|x| x.partial(&[a])).collect()).collect();
    let hess = (0..m)
        .map(|a| (0..m).map(|b| position.iter().map(|x| x.partial(&[a, b])).collect()).collect())
        .collect();
    (tangents, hess)
}

/// Induced metric `g_ab = dx/dq^a . dx/dq^b` as jets one order below the
/// position jets.
pub fn induced_metric(position: &[Jet]) -> Vec<Vec<Jet>> {
    let m = position[0].nvars();
    let tangent: Vec<Vec<Jet>> = (0..m)
        .map(|a| position.iter().map(|x| x.derivative(a)).collect())
        .collect();
    (0..m)
        .map(|a| (0..m).map(|b| dot(&tangent[a], &tangent[b])).collect())
        .collect()
}

/// Deterministic normal frame of a plain immersion, with order-1 jets.
pub fn normal_frame(point: &[f64], position: &[Jet]) -> Result<FrameBundle, GeometryError> {
    let m = position[0].nvars();
    let n = position.len();
    let tangent_jets: Vec<Vec<Jet>> = (0..m)
        .map(|a| position.iter().map(|x| x.derivative(a).truncate(1)).collect())
        .collect();
    let frame = extend_orthonormal(&tangent_jets, n).map_err(linalg_to_geometry)?;
    let tangents = tangent_jets
        .iter()
        .map(|t| t.iter().map(Jet::value).collect())
        .collect();
    let normals = frame
        .complement
        .iter()
        .map(|v| v.iter().map(Jet::value).collect())
        .collect();
    Ok(FrameBundle {
        point: point.to_vec(),
        tangents,
        normals,
        normal_jets: Some(frame.complement),
        nested: None,
    })
}

/// Frame of a subspace inside an immersed ambient: the ambient normals `w_P`
/// complete the ambient tangents, and the geodesic normals complete
/// `[g_a | w_P]`.
pub fn nested_frame(
    point: &[f64],
    tangents: Vec<Vec<f64>>,
    ambient_tangents: Vec<Vec<f64>>,
) -> Result<FrameBundle, GeometryError> {
    let k = tangents[0].len();
    let ambient = extend_orthonormal(&ambient_tangents, k).map_err(linalg_to_geometry)?;
    let w = ambient.complement;
    let mut required = tangents.clone();
    required.extend(w.iter().cloned());
    let sub = extend_orthonormal(&required, k).map_err(linalg_to_geometry)?;
    let u = sub.complement;
    let mut normals = u.clone();
    normals.extend(w.iter().cloned());
    Ok(FrameBundle {
        point: point.to_vec(),
        tangents,
        normals,
        normal_jets: None,
        nested: Some(NestedFrame {
            ambient_tangents,
            ambient_normals: w,
            geodesic_normals: u,
        }),
    })
}

/// Curvature of a curve (`M = 1`) at a point.
#[derive(Debug, Clone)]
pub struct CurveCurvature {
    /// `d t / ds`, the curvature vector in the flat space.
    pub vector: Vec<f64>,
    pub kappa: f64,
    /// Length of the component along the ambient normals (nested charts).
    pub kappa_n: Option<f64>,
    /// Length of the component tangent to the ambient (nested charts).
    pub kappa_g: Option<f64>,
}

/// `d t/ds = (x'' - (x''.t) t) / |x'|^2` with `t = x'/|x'|`.
pub fn curve_curvature(extrinsic: &Extrinsic) -> Result<CurveCurvature, GeometryError> {
    let frame = &extrinsic.frame;
    if frame.tangents.len() != 1 {
        return Err(GeometryError::Dimension(format!(
            "curve curvature needs one coordinate, chart has {}",
            frame.tangents.len()
        )));
    }
    let v = &frame.tangents[0];
    let acc = &extrinsic.hessians[0][0];
    let speed2 = dot(v, v);
    if !(speed2 > 0.0) {
        return Err(GeometryError::ZeroVelocity);
    }
    let along = dot(acc, v) / speed2;
    let vector: Vec<f64> = acc
        .iter()
        .zip(v)
        .map(|(a, t)| (a - along * t) / speed2)
        .collect();
    let kappa = dot(&vector, &vector).sqrt();
    let component = |dirs: &[Vec<f64>]| dirs.iter().map(|d| dot(&vector, d).powi(2)).sum::<f64>().sqrt();
    let (kappa_n, kappa_g) = match &frame.nested {
        Some(nf) => (
            Some(component(&nf.ambient_normals)),
            Some(component(&nf.geodesic_normals)),
        ),
        None => (None, None),
    };
    Ok(CurveCurvature {
        vector,
        kappa,
        kappa_n,
        kappa_g,
    })
}

/// Split of the full second fundamental form of a nested subspace.
#[derive(Debug, Clone)]
pub struct NestedSplit {
    /// `kappa^P_ab` along the ambient normals `w_P`.
    pub normal_slabs: Vec<Matrix>,
    /// Components along the geodesic normals.
    pub geodesic_slabs: Vec<Matrix>,
    pub kappa2: f64,
    pub kappa_n2: f64,
    pub kappa_g2: f64,
    /// `|kappa^2 - kappa_n^2 - kappa_g^2|`; zero for curves, not in general.
    pub split_residual: f64,
    /// All geodesic slabs vanish.
    pub geodesic: bool,
}

/// Relative size below which the geodesic part counts as zero.
const GEODESIC_RTOL: f64 = 1e-9;

pub fn nested_split(extrinsic: &Extrinsic, g_inv: &Matrix, det_g: f64) -> Result<NestedSplit, GeometryError> {
    let Some(nf) = &extrinsic.frame.nested else {
        return Err(GeometryError::WrongKind("nested split needs a nested chart"));
    };
    let normal = SecondFundamentalForm::from_frame(&extrinsic.hessians, &nf.ambient_normals);
    let geodesic = SecondFundamentalForm::from_frame(&extrinsic.hessians, &nf.geodesic_normals);
    let eye = |c: usize| Matrix::identity(c);
    let kappa2 = extrinsic
        .sff
        .kappa_squared(g_inv, det_g, &extrinsic.frame.gram());
    let kappa_n2 = normal.kappa_squared(g_inv, det_g, &eye(normal.class()));
    let kappa_g2 = geodesic.kappa_squared(g_inv, det_g, &eye(geodesic.class()));
    let scale = extrinsic.sff.max_abs().max(1.0);
    Ok(NestedSplit {
        split_residual: (kappa2 - kappa_n2 - kappa_g2).abs(),
        geodesic: geodesic.max_abs() <= GEODESIC_RTOL * scale,
        normal_slabs: normal.slabs,
        geodesic_slabs: geodesic.slabs,
        kappa2,
        kappa_n2,
        kappa_g2,
    })
}
