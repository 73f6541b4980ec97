//! Small dense solvers for symmetric positive definite and least-squares systems.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Float;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<F> {
    lower: Array2<F>,
}

impl<F: Float> Cholesky<F> {
    /// Factorizes a symmetric matrix; only the lower triangle of `a` is read.
    pub fn new(a: ArrayView2<F>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "cholesky input",
                expected: n,
                found: a.ncols(),
            });
        }
        let mut l = vec![F::zero(); n * n];
        for j in 0..n {
            let (above, rest) = l.split_at_mut(j * n);
            let row_j = &mut rest[..n];
            for i in 0..j {
                let row_i = &above[i * n..i * n + n];
                row_j[i] = (a[[j, i]] - dot(&row_i[..i], &row_j[..i])) / row_i[i];
            }
            let d = a[[j, j]] - dot(&row_j[..j], &row_j[..j]);
            if !(d > F::zero()) || !d.is_finite() {
                return Err(Error::Singular);
            }
            row_j[j] = d.sqrt();
        }
        Ok(Self {
            lower: Array2::from_shape_vec((n, n), l).expect("square buffer"),
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    fn rows(&self) -> &[F] {
        self.lower.as_slice().expect("standard layout")
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: ArrayView1<F>) -> Array1<F> {
        let n = self.dim();
        let l = self.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            y[i] = (y[i] - dot(row, &y[..i])) / l[i * n + i];
        }
        Array1::from(y)
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: ArrayView1<F>) -> Array1<F> {
        let n = self.dim();
        let l = self.rows();
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            x[i] = x[i] / l[i * n + i];
            let xi = x[i];
            for p in 0..i {
                x[p] -= l[i * n + p] * xi;
            }
        }
        Array1::from(x)
    }

    pub fn solve(&self, b: ArrayView1<F>) -> Array1<F> {
        let y = self.forward(b);
        self.backward(y.view())
    }

    /// Factor of the bordered matrix `[[A, C], [Cᵀ, D]]` given this factor of
    /// `A`, the `p × q` cross block `C` and the `q × q` corner `D`.
    pub fn extend(&self, cross: ArrayView2<F>, corner: ArrayView2<F>) -> Result<Self> {
        let p = self.dim();
        let q = corner.nrows();
        if cross.nrows() != p || cross.ncols() != q || corner.ncols() != q {
            return Err(Error::DimensionMismatch {
                what: "bordered cholesky blocks",
                expected: p,
                found: cross.nrows(),
            });
        }
        let n = p + q;
        let old = self.rows();
        let mut l = vec![F::zero(); n * n];
        for i in 0..p {
            l[i * n..i * n + i + 1].copy_from_slice(&old[i * p..i * p + i + 1]);
        }
        for j in 0..q {
            let r = p + j;
            let (above, rest) = l.split_at_mut(r * n);
            let row_r = &mut rest[..n];
            for i in 0..r {
                let row_i = &above[i * n..i * n + n];
                let a = if i < p { cross[[i, j]] } else { corner[[j, i - p]] };
                row_r[i] = (a - dot(&row_i[..i], &row_r[..i])) / row_i[i];
            }
            let d = corner[[j, j]] - dot(&row_r[..r], &row_r[..r]);
            if !(d > F::zero()) || !d.is_finite() {
                return Err(Error::Singular);
            }
            row_r[r] = d.sqrt();
        }
        Ok(Self {
            lower: Array2::from_shape_vec((n, n), l).expect("square buffer"),
        })
    }
}

/// Inner product with four independent partial sums so the loop vectorizes.
fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [F::zero(); 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail = ca.remainder().iter().zip(cb.remainder()).fold(F::zero(), |s, (x, y)| s + *x * *y);
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Least squares via Householder QR: `argmin ‖a x − b‖`.
///
/// Used as the fallback when the normal equations are too ill-conditioned
/// for Cholesky.
pub fn qr_least_squares<F: Float>(a: ArrayView2<F>, b: ArrayView1<F>) -> Result<Array1<F>> {
    let (n, p) = a.dim();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: b.len(),
        });
    }
    if n < p {
        return Err(Error::Singular);
    }
    // Column-major working copy: each column is contiguous.
    let mut cols: Vec<Vec<F>> = (0..p).map(|j| a.column(j).to_vec()).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![F::zero(); p];
    let scale = cols
        .iter()
        .map(|c| c.iter().fold(F::zero(), |m, v| m.max(v.abs())))
        .fold(F::zero(), F::max);
    let tiny = F::epsilon() * F::from_usize_lossy(n.max(p)) * scale.max(F::min_positive_value());

    for j in 0..p {
        let norm = cols[j][j..].iter().map(|v| *v * *v).sum::<F>().sqrt();
        if norm <= tiny {
            return Err(Error::Singular);
        }
        let alpha = if cols[j][j] > F::zero() { -norm } else { norm };
        let mut v: Vec<F> = cols[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: F = v.iter().map(|x| *x * *x).sum();
        diag[j] = alpha;
        if vnorm2 > F::zero() {
            let two = F::lit(2.0);
            for col in cols.iter_mut().skip(j + 1) {
                let dot: F = v.iter().zip(&col[j..]).map(|(a, b)| *a * *b).sum();
                let f = two * dot / vnorm2;
                for (c, vi) in col[j..].iter_mut().zip(&v) {
                    *c -= f * *vi;
                }
            }
            let dot: F = v.iter().zip(&rhs[j..]).map(|(a, b)| *a * *b).sum();
            let f = two * dot / vnorm2;
            for (c, vi) in rhs[j..].iter_mut().zip(&v) {
                *c -= f * *vi;
            }
        }
    }

    let mut x = Array1::<F>::zeros(p);
    for i in (0..p).rev() {
        let mut s = rhs[i];
        for (k, col) in cols.iter().enumerate().skip(i + 1) {
            s -= col[i] * x[k];
        }
        x[i] = s / diag[i];
    }
    Ok(x)
}

/// Column means of `a`.
pub fn column_means<F: Float>(a: ArrayView2<F>) -> Array1<F> {
    if a.nrows() == 0 {
        return Array1::zeros(a.ncols());
    }
    a.sum_axis(Axis(0)) / F::from_usize_lossy(a.nrows())
}

/// Copy of `a` with every column shifted to zero mean, plus the means.
pub fn center_columns<F: Float>(a: ArrayView2<F>) -> (Array2<F>, Array1<F>) {
    let means = column_means(a);
    let centered = &a - &means.view().insert_axis(Axis(0));
    (centered, means)
}

pub fn mean<F: Float>(v: ArrayView1<F>) -> F {
    if v.is_empty() {
        F::zero()
    } else {
        v.sum() / F::from_usize_lossy(v.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = array![[4.0f64, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]];
        let b = array![1.0, -2.0, 0.5];
        let x = Cholesky::new(a.view()).unwrap().solve(b.view());
        let back = a.dot(&x);
        for (u, v) in back.iter().zip(b.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(Cholesky::new(a.view()), Err(Error::Singular)));
    }

    #[test]
    fn bordered_factor_matches_direct_factor() {
        let a = array![
            [6.0f64, 1.0, 0.5, 0.2, -0.3],
            [1.0, 5.0, 0.1, 0.4, 0.0],
            [0.5, 0.1, 4.0, -0.6, 0.7],
            [0.2, 0.4, -0.6, 3.0, 0.2],
            [-0.3, 0.0, 0.7, 0.2, 2.5]
        ];
        let head = Cholesky::new(a.slice(ndarray::s![..3, ..3])).unwrap();
        let grown = head
            .extend(a.slice(ndarray::s![..3, 3..]), a.slice(ndarray::s![3.., 3..]))
            .unwrap();
        let direct = Cholesky::new(a.view()).unwrap();
        for (u, v) in grown.lower.iter().zip(direct.lower.iter()) {
            assert!((u - v).abs() < 1e-14);
        }
        let empty = Cholesky::new(Array2::<f64>::zeros((0, 0)).view()).unwrap();
        let whole = empty.extend(Array2::zeros((0, 5)).view(), a.view()).unwrap();
        for (u, v) in whole.lower.iter().zip(direct.lower.iter()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn qr_matches_exact_solution() {
        let a = array![[1.0f64, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]];
        // b = 2 + 0.5 t exactly
        let b = array![2.0, 2.5, 3.0, 3.5];
        let x = qr_least_squares(a.view(), b.view()).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!((x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn qr_detects_rank_deficiency() {
        let a = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let b = array![1.0, 2.0, 3.0];
        assert!(matches!(
            qr_least_squares(a.view(), b.view()),
            Err(Error::Singular)
        ));
    }
}
