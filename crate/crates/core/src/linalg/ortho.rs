use super::{LinalgError, Matrix};
use crate::scalar::{dot, Scalar};

/// A column counts as dependent when orthogonalization leaves less than
/// this fraction of its norm.
const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OrthoFrame<T> {
    /// Orthonormalized input columns (same span, same order).
    pub basis: Vec<Vec<T>>,
    /// Unit vectors completing `basis` to an orthonormal basis.
    pub complement: Vec<Vec<T>>,
    /// Which identity column seeded each complement vector.
    pub seeds: Vec<usize>,
}

/// Removes the components along `basis` from `v`, twice for stability.
fn project_out<T: Scalar>(v: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x = x.clone() - c.clone() * y.clone();
            }
        }
    }
}

fn normalized<T: Scalar>(v: &[T]) -> (Vec<T>, T) {
    let norm = dot(v, v).sqrt();
    (v.iter().map(|x| x.clone() / norm.clone()).collect(), norm)
}

/// Orthonormalizes `required` (modified Gram-Schmidt) and extends it to a
/// basis of `R^dim` with identity columns, choosing at each step the
/// candidate with the largest residual norm (lowest index on ties).
///
/// Works in any [`Scalar`] arithmetic; every choice is made on values, so a
/// jet run differentiates exactly the branch taken by the plain run.
pub fn extend_orthonormal<T: Scalar>(
    required: &[Vec<T>],
    dim: usize,
) -> Result<OrthoFrame<T>, LinalgError> {
    let Some(first) = required.first() else {
        return Err(LinalgError::Dimension("no columns given".into()));
    };
    if required.len() > dim {
        return Err(LinalgError::RankDeficient { column: dim });
    }
    let zero = first[0].lift(0.0);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(dim);
    for (j, col) in required.iter().enumerate() {
        if col.len() != dim {
            return Err(LinalgError::Dimension(format!(
                "column {j} has length {}, expected {dim}",
                col.len()
            )));
        }
        let scale = dot(col, col).value().sqrt();
        let mut v = col.clone();
        project_out(&mut v, &basis);
        let (unit, norm) = normalized(&v);
        if scale == 0.0 || !(norm.value() > RANK_RTOL * scale) {
            return Err(LinalgError::RankDeficient { column: j });
        }
        basis.push(unit);
    }
    let mut used = vec![false; dim];
    let mut complement = Vec::with_capacity(dim - required.len());
    let mut seeds = Vec::with_capacity(dim - required.len());
    while basis.len() < dim {
        let mut best: Option<(usize, Vec<T>, f64)> = None;
        for k in (0..dim).filter(|&k| !used[k]) {
            let mut e: Vec<T> = (0..dim)
                .map(|i| if i == k { zero.lift(1.0) } else { zero.clone() })
                .collect();
            project_out(&mut e, &basis);
            let r = dot(&e, &e).value();
            if best.as_ref().is_none_or(|b| r > b.2) {
                best = Some((k, e, r));
            }
        }
        let (k, e, _) = best.expect("a candidate always remains");
        used[k] = true;
        let (unit, _) = normalized(&e);
        basis.push(unit.clone());
        complement.push(unit);
        seeds.push(k);
    }
    basis.truncate(required.len());
    Ok(OrthoFrame {
        basis,
        complement,
        seeds,
    })
}

/// Orthonormal basis of the orthogonal complement of the column span of `t`,
/// returned as the columns of an `N x (N - M)` matrix.
pub fn orthonormal_complement(t: &Matrix) -> Result<Matrix, LinalgError> {
    let frame = extend_orthonormal(&t.columns(), t.rows())?;
    let mut out = Matrix::zeros(t.rows(), frame.complement.len());
    for (j, c) in frame.complement.iter().enumerate() {
        for (i, x) in c.iter().enumerate() {
            out[(i, j)] = *x;
        }
    }
    Ok(out)
}
