use super::{LinalgError, Matrix};

/// Relative threshold below which a determinant counts as zero.
const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChioPivot {
    /// Largest |a_pq| at every condensation level.
    #[default]
    MaxAbs,
    /// Use `(row, col)` at the first level, max-abs afterwards.
    Fixed(usize, usize),
}

/// Determinant by LU factorization with partial pivoting.
///
/// # Panics
/// If `a` is not square.
pub fn det_lu(a: &Matrix) -> f64 {
    let n = a.require_square().expect("det_lu needs a square matrix");
    let mut m = a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()).then(j.cmp(&i)))
            .unwrap();
        if m[(p, k)] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
            det = -det;
        }
        let pivot = m[(k, k)];
        det *= pivot;
        for i in k + 1..n {
            let f = m[(i, k)] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    det
}

/// Determinant by Chiò pivotal condensation.
///
/// Each level picks a pivot `a_pq`, replaces the matrix by the
/// `(n-1)x(n-1)` array of 2x2 minors `a_ij a_pq - a_iq a_pj` (row `p` and
/// column `q` removed, order kept), and divides by `a_pq^(n-2)`. Moving the
/// pivot to the corner costs a sign `(-1)^(p+q)`.
pub fn det_chio(a: &Matrix, pivot: ChioPivot) -> Result<f64, LinalgError> {
    let n = a.require_square()?;
    if n == 0 {
        return Ok(1.0);
    }
    let mut m = a.clone();
    let mut factor = 1.0;
    let mut level = 0;
    while m.rows() > 1 {
        let size = m.rows();
        let (p, q) = match (pivot, level) {
            (ChioPivot::Fixed(r, c), 0) => {
                if r >= size || c >= size {
                    return Err(LinalgError::Dimension(format!(
                        "pivot ({r}, {c}) outside {size}x{size} matrix"
                    )));
                }
                if m[(r, c)] == 0.0 {
                    return Err(LinalgError::PivotFailure { level });
                }
                (r, c)
            }
            _ => {
                let (p, q) = argmax_abs(&m);
                if m[(p, q)] == 0.0 {
                    return Ok(0.0);
                }
                (p, q)
            }
        };
        let apq = m[(p, q)];
        let rows: Vec<usize> = (0..size).filter(|&i| i != p).collect();
        let cols: Vec<usize> = (0..size).filter(|&j| j != q).collect();
        let condensed = Matrix::from_fn(size - 1, size - 1, |i, j| {
            let (r, c) = (rows[i], cols[j]);
            m[(r, c)] * apq - m[(r, q)] * m[(p, c)]
        });
        if (p + q) % 2 == 1 {
            factor = -factor;
        }
        factor /= apq.powi(size as i32 - 2);
        m = condensed;
        level += 1;
    }
    Ok(factor * m[(0, 0)])
}

/// First entry of largest magnitude in row-major order.
fn argmax_abs(m: &Matrix) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_val = -1.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)].abs();
            if v > best_val {
                best_val = v;
                best = (i, j);
            }
        }
    }
    best
}

/// `|det| < 1e-12 * max|a_ij|^n`, i.e. singular relative to the entry scale.
pub fn is_singular(a: &Matrix, det: f64) -> bool {
    let scale = a.max_abs();
    scale == 0.0 || det.abs() < SINGULAR_RTOL * scale.powi(a.rows() as i32)
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.require_square()?;
    let det = det_lu(a);
    if is_singular(a, det) {
        return Err(LinalgError::Singular { det });
    }
    let mut m = a.clone();
    let mut inv = Matrix::identity(n);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()).then(j.cmp(&i)))
            .unwrap();
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
                let t = inv[(k, j)];
                inv[(k, j)] = inv[(p, j)];
                inv[(p, j)] = t;
            }
        }
        let pivot = m[(k, k)];
        for j in 0..n {
            m[(k, j)] /= pivot;
            inv[(k, j)] /= pivot;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = m[(i, k)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[(i, j)] -= f * m[(k, j)];
                inv[(i, j)] -= f * inv[(k, j)];
            }
        }
    }
    Ok(inv)
}
