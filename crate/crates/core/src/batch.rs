//! Evaluation over many points: grids and data-parallel maps.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it, or with [`Execution::Sequential`], points are processed in
//! order on the calling thread. Results always come back in input order.

use crate::curvature::{kappa_report, CurvatureError, KappaReport, PivotPolicy};
use crate::geometry::Chart;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `f(0), f(1), ..., f(n - 1)`.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

pub fn map_points<T, F>(points: &[Vec<f64>], exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync + Send,
{
    map_indexed(points.len(), exec, |i| f(&points[i]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 1, "axis needs at least one point");
        Self { lo, hi, n }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.lo
        } else if i + 1 == self.n {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }
}

/// Tensor-product grid; the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            out[k] = axis.value(flat % axis.n);
            flat /= axis.n;
        }
        out
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// [`kappa_report`] at every point.
pub fn sweep(
    chart: &Chart,
    points: &[Vec<f64>],
    policy: PivotPolicy,
    exec: Execution,
) -> Vec<Result<KappaReport, CurvatureError>> {
    map_points(points, exec, |p| {
        let pg = chart.analyze(p)?;
        kappa_report(&pg, policy)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order_and_endpoints() {
        let g = Grid::new(vec![Axis::new(0.0, 1.0, 3), Axis::new(5.0, 6.0, 2)]);
        assert_eq!(g.len(), 6);
        assert_eq!(g.point(0), vec![0.0, 5.0]);
        assert_eq!(g.point(1), vec![0.0, 6.0]);
        assert_eq!(g.point(5), vec![1.0, 6.0]);
        assert_eq!(Axis::new(2.0, 9.0, 1).value(0), 2.0);
    }

    #[test]
    fn parallel_matches_sequential() {
        let seq = map_indexed(1000, Execution::Sequential, |i| (i as f64).sin());
        let par = map_indexed(1000, Execution::Parallel, |i| (i as f64).sin());
        assert_eq!(seq, par);
    }
}
