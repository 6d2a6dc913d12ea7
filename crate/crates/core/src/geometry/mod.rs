//! Pointwise tensor pipeline: metric, Christoffel symbols, Riemann tensor,
//! normal frames and second fundamental forms.

mod chart;
mod curvature_tensors;
mod frame;
mod tensor;

use thiserror::Error;

use crate::expr::EvalError;
use crate::linalg::LinalgError;

pub use chart::{Chart, ChartError, ChartKind, ImmersionChart, MetricChart, NestedChart};
pub use curvature_tensors::{CurvatureTensors, FLAT_RTOL};
pub use frame::{
    curve_curvature, hessians, induced_metric, nested_frame, nested_split, normal_frame,
    CurveCurvature, Extrinsic, FrameBundle, NestedFrame, NestedSplit, SecondFundamentalForm,
};
pub use tensor::{Tensor3, Tensor4};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("degenerate metric (|g| = {det:e})")]
    DegenerateMetric { det: f64 },
    #[error("metric is not positive definite (pivot {index} = {pivot:e})")]
    MetricNotPositive { index: usize, pivot: f64 },
    #[error("Jacobian is rank deficient (tangent {column})")]
    DegenerateJacobian { column: usize },
    #[error("zero velocity")]
    ZeroVelocity,
    #[error("{0}")]
    Dimension(String),
    #[error("{0}")]
    WrongKind(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Everything computed at one point of a chart.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub tensors: CurvatureTensors,
    /// Absent for metric charts.
    pub extrinsic: Option<Extrinsic>,
}

impl Chart {
    fn check_point(&self, point: &[f64]) -> Result<(), GeometryError> {
        if point.len() != self.dim() {
            return Err(GeometryError::Dimension(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Position jets of order 3 in the flat space (immersion kinds only).
    pub fn position_jets(&self, point: &[f64]) -> Result<Vec<crate::Jet>, GeometryError> {
        self.check_point(point)?;
        match self {
            Chart::Metric(_) => Err(GeometryError::WrongKind("metric charts have no immersion")),
            Chart::Immersion(c) => c.position_jets(point, 3),
            Chart::Nested(c) => c.position_jets(point, 3),
        }
    }

    /// Intrinsic quantities only.
    pub fn tensors(&self, point: &[f64]) -> Result<CurvatureTensors, GeometryError> {
        self.check_point(point)?;
        match self {
            Chart::Metric(c) => CurvatureTensors::from_metric_jets(point, &c.metric_jets(point, 2)?),
            _ => {
                let x = self.position_jets(point)?;
                CurvatureTensors::from_metric_jets(point, &induced_metric(&x))
            }
        }
    }

    /// Intrinsic and (for immersions) extrinsic quantities.
    pub fn analyze(&self, point: &[f64]) -> Result<PointGeometry, GeometryError> {
        self.check_point(point)?;
        let x = match self {
            Chart::Metric(_) => {
                return Ok(PointGeometry {
                    tensors: self.tensors(point)?,
                    extrinsic: None,
                })
            }
            _ => self.position_jets(point)?,
        };
        let (tangents, hess) = hessians(&x);
        let frame = match self {
            Chart::Nested(c) => {
                let y = c.ambient_point(point)?;
                let outer = c.outer().position_jets(&y, 1)?;
                let ambient_tangents = (0..c.outer().dim())
                    .map(|k| outer.iter().map(|xi| xi.partial(&[k])).collect())
                    .collect();
                nested_frame(point, tangents, ambient_tangents)?
            }
            _ => normal_frame(point, &x)?,
        };
        let tensors = CurvatureTensors::from_metric_jets(point, &induced_metric(&x))?;
        let sff = SecondFundamentalForm::from_frame(&hess, &frame.normals);
        Ok(PointGeometry {
            tensors,
            extrinsic: Some(Extrinsic {
                frame,
                hessians: hess,
                sff,
            }),
        })
    }
}
