use crate::expr::Jet;
use crate::scalar::Scalar;
use crate::linalg::{cholesky, det_lu, invert, is_singular, LinalgError, Matrix};

use super::{GeometryError, Tensor3, Tensor4};

/// `R` counts as zero below `FLAT_RTOL * (1 + max|dGamma|)`.
pub const FLAT_RTOL: f64 = 1e-10;

/// Intrinsic quantities at one point.
///
/// Index conventions:
/// - `gamma_first[[a, b, c]]` is `Gamma_{ab,c} = (d_a g_bc + d_b g_ac - d_c g_ab) / 2`;
/// - `gamma_second[[c, a, b]]` is `Gamma^c_{ab} = g^{cs} Gamma_{ab,s}`;
/// - `riemann[[i, j, k, l]]` is
///   `d_k Gamma_{jl,i} - d_l Gamma_{jk,i} + g^{uv}(Gamma_{jk,u} Gamma_{il,v} - Gamma_{jl,u} Gamma_{ik,v})`;
/// - `scalar` is `g^{ac} g^{bd} R_{adbc}`.
///
/// With these conventions a round sphere of radius `a` has
/// `R_{0101} = a^2 sin^2(theta)` and `scalar = -2/a^2`.
#[derive(Debug, Clone)]
pub struct CurvatureTensors {
    pub point: Vec<f64>,
    pub g: Matrix,
    pub g_inv: Matrix,
    pub det_g: f64,
    /// `dg[[c, a, b]] = d_c g_ab`.
    pub dg: Tensor3,
    pub gamma_first: Tensor3,
    pub gamma_second: Tensor3,
    /// `d_gamma_first[[d, a, b, c]] = d_d Gamma_{ab,c}`.
    pub d_gamma_first: Tensor4,
    pub riemann: Tensor4,
    pub scalar: f64,
}

impl CurvatureTensors {
    /// Builds everything from metric jets of order at least 2.
    pub fn from_metric_jets(point: &[f64], g: &[Vec<Jet>]) -> Result<Self, GeometryError> {
        let m = g.len();
        if m == 0 || g.iter().any(|row| row.len() != m) {
            return Err(GeometryError::Dimension("metric jets must form a square array".into()));
        }
        if g[0][0].order() < 2 {
            return Err(GeometryError::Dimension("metric jets need order 2".into()));
        }
        let gv = Matrix::from_fn(m, m, |a, b| g[a][b].value());
        let det_g = det_lu(&gv);
        if is_singular(&gv, det_g) {
            return Err(GeometryError::DegenerateMetric { det: det_g });
        }
        if let Err(LinalgError::NotPositiveDefinite { index, pivot }) = cholesky(&gv) {
            return Err(GeometryError::MetricNotPositive { index, pivot });
        }
        let g_inv = invert(&gv)?;

        // d_c g_ab as order-1 jets, so that second derivatives stay available.
        let dgj: Vec<Vec<Vec<Jet>>> = (0..m)
            .map(|c| (0..m).map(|a| (0..m).map(|b| g[a][b].derivative(c)).collect()).collect())
            .collect();
        let dg = Tensor3::from_fn(m, |[c, a, b]| dgj[c][a][b].value());
        let gamma_jets: Vec<Vec<Vec<Jet>>> = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        (0..m)
                            .map(|c| {
                                let s = &(&dgj[a][b][c] + &dgj[b][a][c]) - &dgj[c][a][b];
                                s.scale(0.5)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let gamma_first = Tensor3::from_fn(m, |[a, b, c]| gamma_jets[a][b][c].value());
        let d_gamma_first = Tensor4::from_fn(m, |[d, a, b, c]| gamma_jets[a][b][c].partial(&[d]));
        let gamma_second = Tensor3::from_fn(m, |[c, a, b]| {
            (0..m).map(|s| g_inv[(c, s)] * gamma_first[[a, b, s]]).sum()
        });

        let riemann = Tensor4::from_fn(m, |[i, j, k, l]| {
            let mut quad = 0.0;
            for lam in 0..m {
                for sig in 0..m {
                    let gi = g_inv[(lam, sig)];
                    if gi == 0.0 {
                        continue;
                    }
                    quad += gi
                        * (gamma_first[[j, k, lam]] * gamma_first[[i, l, sig]]
                            - gamma_first[[j, l, lam]] * gamma_first[[i, k, sig]]);
                }
            }
            d_gamma_first[[k, j, l, i]] - d_gamma_first[[l, j, k, i]] + quad
        });

        let mut scalar = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        scalar += g_inv[(a, c)] * g_inv[(b, d)] * riemann[[a, d, b, c]];
                    }
                }
            }
        }

        Ok(Self {
            point: point.to_vec(),
            g: gv,
            g_inv,
            det_g,
            dg,
            gamma_first,
            gamma_second,
            d_gamma_first,
            riemann,
            scalar,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn max_abs_riemann(&self) -> f64 {
        self.riemann.max_abs()
    }

    pub fn max_abs_d_gamma(&self) -> f64 {
        self.d_gamma_first.max_abs()
    }

    /// Zero curvature up to `1e-10 * (1 + max|dGamma|)`.
    pub fn is_flat(&self) -> bool {
        self.max_abs_riemann() < FLAT_RTOL * (1.0 + self.max_abs_d_gamma())
    }

    /// Largest violation among the two antisymmetries, the pair symmetry and
    /// the first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let r = &self.riemann;
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let v = r[[i, j, k, l]];
                        worst = worst
                            .max((v + r[[j, i, k, l]]).abs())
                            .max((v + r[[i, j, l, k]]).abs())
                            .max((v - r[[k, l, i, j]]).abs())
                            .max((v + r[[i, k, l, j]] + r[[i, l, j, k]]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Sectional curvature of the coordinate plane `(a, b)`:
    /// `R_abab / (g_aa g_bb - g_ab^2)`.
    pub fn sectional(&self, a: usize, b: usize) -> f64 {
        let g = &self.g;
        self.riemann[[a, b, a, b]] / (g[(a, a)] * g[(b, b)] - g[(a, b)] * g[(a, b)])
    }
}
