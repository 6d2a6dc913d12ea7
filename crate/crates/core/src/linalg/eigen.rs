use std::ops::Range;

use super::{LinalgError, Matrix};

const SYMMETRY_TOL: f64 = 1e-10;
const GROUP_RTOL: f64 = 1e-7;
const MAX_SWEEPS: usize = 100;

/// Generalized eigenpairs `A v = lambda B v`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` pairs with `values[i]`; columns are B-orthonormal.
    pub vectors: Matrix,
    /// Runs of (numerically) equal eigenvalues.
    pub groups: Vec<EigenGroup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroup {
    /// Mean of the grouped eigenvalues.
    pub value: f64,
    pub indices: Range<usize>,
}

impl EigenGroup {
    pub fn multiplicity(&self) -> usize {
        self.indices.len()
    }
}

impl Spectrum {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.groups.iter().map(EigenGroup::multiplicity).collect()
    }

    pub fn product(&self) -> f64 {
        self.values.iter().product()
    }
}

/// Lower-triangular `L` with `B = L L^T`.
pub fn cholesky(b: &Matrix) -> Result<Matrix, LinalgError> {
    let n = b.require_square()?;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = b[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix by forward substitution.
fn lower_inverse(l: &Matrix) -> Matrix {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for c in 0..n {
        for i in c..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in c..i {
                s -= l[(i, k)] * inv[(k, c)];
            }
            inv[(i, c)] = s / l[(i, i)];
        }
    }
    inv
}

fn check_symmetric(a: &Matrix) -> Result<(), LinalgError> {
    a.require_square()?;
    let asymmetry = a.asymmetry();
    if asymmetry > SYMMETRY_TOL * a.max_abs().max(1.0) {
        return Err(LinalgError::NotSymmetric { asymmetry });
    }
    Ok(())
}

/// Cyclic Jacobi on a symmetric matrix; returns (eigenvalues, eigenvector
/// columns), unsorted.
fn jacobi(mut a: Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    let mut v = Matrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = a[(i, j)] * a[(i, j)];
                total += x;
                if i != j {
                    off += x;
                }
            }
        }
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// Groups ascending `values` into runs whose spread from the first member
/// is at most `1e-7 * max|value|`.
pub fn group_multiplicities(values: &[f64]) -> Vec<EigenGroup> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = GROUP_RTOL * scale;
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[start] > tol {
            let run = &values[start..i];
            groups.push(EigenGroup {
                value: run.iter().sum::<f64>() / run.len() as f64,
                indices: start..i,
            });
            start = i;
        }
    }
    groups
}

/// Solves `A v = lambda B v` for symmetric `A` and SPD `B` via `B = L L^T`
/// and Jacobi rotations on `L^-1 A L^-T`.
pub fn sym_gen_eig(a: &Matrix, b: &Matrix) -> Result<Spectrum, LinalgError> {
    check_symmetric(a)?;
    check_symmetric(b)?;
    if a.rows() != b.rows() {
        return Err(LinalgError::Dimension(format!(
            "A is {0}x{0}, B is {1}x{1}",
            a.rows(),
            b.rows()
        )));
    }
    let n = a.rows();
    let l = cholesky(b)?;
    let li = lower_inverse(&l);
    let c = &(&li * a) * &li.transpose();
    let c = Matrix::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let (values, y) = jacobi(c);
    let x = &li.transpose() * &y;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| x[(r, order[c])]);
    Ok(Spectrum {
        groups: group_multiplicities(&sorted),
        values: sorted,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_problem() {
        let s = sym_gen_eig(&Matrix::diag(&[4.0, 1.0]), &Matrix::identity(2)).unwrap();
        assert_eq!(s.values, vec![1.0, 4.0]);
        assert_eq!(s.multiplicities(), vec![1, 1]);
    }

    #[test]
    fn equal_pencil_has_unit_spectrum() {
        let b = Matrix::from_rows(&[[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]]);
        let s = sym_gen_eig(&b, &b).unwrap();
        for v in &s.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.multiplicities(), vec![3]);
    }

    #[test]
    fn not_spd_names_pivot() {
        let b = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        match sym_gen_eig(&Matrix::identity(2), &b) {
            Err(LinalgError::NotPositiveDefinite { index, pivot }) => {
                assert_eq!(index, 1);
                assert_eq!(pivot, -3.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(
            sym_gen_eig(&a, &Matrix::identity(2)),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn grouping_tolerance() {
        let g = group_multiplicities(&[0.0, 1.0, 1.0 + 1e-9, 2.0]);
        assert_eq!(g.iter().map(EigenGroup::multiplicity).collect::<Vec<_>>(), vec![1, 2, 1]);
        assert_eq!(group_multiplicities(&[0.0, 0.0]).len(), 1);
    }
}
