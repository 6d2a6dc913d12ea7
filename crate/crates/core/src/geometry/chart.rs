use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Expr, Jet, ParseError};

use super::GeometryError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("component {index} (`{source_text}`): {error}")]
    Parse {
        index: usize,
        source_text: String,
        error: ParseError,
    },
    #[error("{0}")]
    Dimension(String),
}

fn parse_all(
    sources: &[&str],
    coords: &Arc<[String]>,
    params: &Arc<[String]>,
) -> Result<Vec<Expr>, ChartError> {
    sources
        .iter()
        .enumerate()
        .map(|(index, src)| {
            Expr::parse_shared(src, coords.clone(), params.clone()).map_err(|error| ChartError::Parse {
                index,
                source_text: src.to_string(),
                error,
            })
        })
        .collect()
}

fn names(list: &[&str]) -> Arc<[String]> {
    list.iter().map(|s| s.to_string()).collect()
}

fn split_params(params: &[(&str, f64)]) -> (Arc<[String]>, Vec<f64>) {
    (
        params.iter().map(|(n, _)| n.to_string()).collect(),
        params.iter().map(|(_, v)| *v).collect(),
    )
}

fn check_exprs(exprs: &[Expr], params: &[f64]) -> Result<Arc<[String]>, ChartError> {
    let first = exprs
        .first()
        .ok_or_else(|| ChartError::Dimension("chart has no components".into()))?;
    for (i, e) in exprs.iter().enumerate() {
        if e.coords() != first.coords() || e.params() != first.params() {
            return Err(ChartError::Dimension(format!(
                "component {i} is declared over different names"
            )));
        }
    }
    if first.params().len() != params.len() {
        return Err(ChartError::Dimension(format!(
            "{} parameter values for {} parameters",
            params.len(),
            first.params().len()
        )));
    }
    if first.coords().is_empty() {
        return Err(ChartError::Dimension("chart has no coordinates".into()));
    }
    Ok(first.coords().into())
}

/// Intrinsic chart: the metric components `g_ab(q)` in `M` coordinates.
#[derive(Debug, Clone)]
pub struct MetricChart {
    coords: Arc<[String]>,
    /// Upper triangle, row-major: g_00, g_01, ..., g_11, ...
    components: Vec<Expr>,
    params: Vec<f64>,
}

impl MetricChart {
    pub fn new(coords: &[&str], params: &[(&str, f64)], upper: &[&str]) -> Result<Self, ChartError> {
        let coords_arc = names(coords);
        let (param_names, values) = split_params(params);
        let components = parse_all(upper, &coords_arc, &param_names)?;
        Self::from_exprs(components, values)
    }

    pub fn from_exprs(components: Vec<Expr>, params: Vec<f64>) -> Result<Self, ChartError> {
        let coords = check_exprs(&components, &params)?;
        let m = coords.len();
        if components.len() != m * (m + 1) / 2 {
            return Err(ChartError::Dimension(format!(
                "metric in {m} coordinates needs {} upper-triangle entries, got {}",
                m * (m + 1) / 2,
                components.len()
            )));
        }
        Ok(Self {
            coords,
            components,
            params,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Index of `g_ab` in the upper-triangle list.
    pub fn upper_index(m: usize, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        a * m - a * (a + 1) / 2 + b
    }

    /// Full symmetric matrix of metric jets.
    pub fn metric_jets(&self, point: &[f64], order: usize) -> Result<Vec<Vec<Jet>>, GeometryError> {
        let m = self.dim();
        let upper: Vec<Jet> = self
            .components
            .iter()
            .map(|e| e.eval_jet(point, &self.params, order))
            .collect::<Result<_, _>>()?;
        Ok((0..m)
            .map(|a| (0..m).map(|b| upper[Self::upper_index(m, a, b)].clone()).collect())
            .collect())
    }
}

/// Extrinsic chart: a map `q -> x(q)` from `M` coordinates into flat `R^N`.
#[derive(Debug, Clone)]
pub struct ImmersionChart {
    coords: Arc<[String]>,
    components: Vec<Expr>,
    params: Vec<f64>,
}

impl ImmersionChart {
    pub fn new(coords: &[&str], params: &[(&str, f64)], components: &[&str]) -> Result<Self, ChartError> {
        let coords_arc = names(coords);
        let (param_names, values) = split_params(params);
        let exprs = parse_all(components, &coords_arc, &param_names)?;
        Self::from_exprs(exprs, values)
    }

    pub fn from_exprs(components: Vec<Expr>, params: Vec<f64>) -> Result<Self, ChartError> {
        let coords = check_exprs(&components, &params)?;
        if components.len() < coords.len() {
            return Err(ChartError::Dimension(format!(
                "immersion of {} coordinates into {} dimensions",
                coords.len(),
                components.len()
            )));
        }
        Ok(Self {
            coords,
            components,
            params,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn position(&self, point: &[f64]) -> Result<Vec<f64>, GeometryError> {
        Ok(self
            .components
            .iter()
            .map(|e| e.eval(point, &self.params))
            .collect::<Result<_, _>>()?)
    }

    pub fn position_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, GeometryError> {
        Ok(self
            .components
            .iter()
            .map(|e| e.eval_jet(point, &self.params, order))
            .collect::<Result<_, _>>()?)
    }

    /// The immersion evaluated on jets of an inner map.
    pub fn compose(&self, inner: &[Jet]) -> Result<Vec<Jet>, GeometryError> {
        Ok(self
            .components
            .iter()
            .map(|e| e.eval_scalar(inner, &self.params))
            .collect::<Result<_, _>>()?)
    }
}

/// A subspace given inside an ambient space that is itself immersed in flat
/// space: `q -> y(q)` (inner, `M -> N`) followed by `y -> X(y)` (outer,
/// `N -> K`).
#[derive(Debug, Clone)]
pub struct NestedChart {
    outer: ImmersionChart,
    inner: ImmersionChart,
}

impl NestedChart {
    pub fn new(outer: ImmersionChart, inner: ImmersionChart) -> Result<Self, ChartError> {
        if inner.target_dim() != outer.dim() {
            return Err(ChartError::Dimension(format!(
                "inner map has {} components but the ambient has {} coordinates",
                inner.target_dim(),
                outer.dim()
            )));
        }
        Ok(Self { outer, inner })
    }

    pub fn outer(&self) -> &ImmersionChart {
        &self.outer
    }

    pub fn inner(&self) -> &ImmersionChart {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Ambient coordinates of the subspace point.
    pub fn ambient_point(&self, point: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.inner.position(point)
    }

    pub fn position_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, GeometryError> {
        let inner = self.inner.position_jets(point, order)?;
        self.outer.compose(&inner)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Metric,
    Immersion,
    Nested,
}

impl ChartKind {
    pub fn name(self) -> &'static str {
        match self {
            ChartKind::Metric => "metric",
            ChartKind::Immersion => "immersion",
            ChartKind::Nested => "nested",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Chart {
    Metric(MetricChart),
    Immersion(ImmersionChart),
    Nested(NestedChart),
}

impl Chart {
    pub fn kind(&self) -> ChartKind {
        match self {
            Chart::Metric(_) => ChartKind::Metric,
            Chart::Immersion(_) => ChartKind::Immersion,
            Chart::Nested(_) => ChartKind::Nested,
        }
    }

    /// Intrinsic dimension `M`.
    pub fn dim(&self) -> usize {
        match self {
            Chart::Metric(c) => c.dim(),
            Chart::Immersion(c) => c.dim(),
            Chart::Nested(c) => c.dim(),
        }
    }

    pub fn coords(&self) -> &[String] {
        match self {
            Chart::Metric(c) => c.coords(),
            Chart::Immersion(c) => c.coords(),
            Chart::Nested(c) => c.inner.coords(),
        }
    }
}

impl From<MetricChart> for Chart {
    fn from(c: MetricChart) -> Self {
        Chart::Metric(c)
    }
}

impl From<ImmersionChart> for Chart {
    fn from(c: ImmersionChart) -> Self {
        Chart::Immersion(c)
    }
}

impl From<NestedChart> for Chart {
    fn from(c: NestedChart) -> Self {
        Chart::Nested(c)
    }
}
