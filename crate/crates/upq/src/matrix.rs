//! Dense complex matrix arithmetic and the few factorizations the rest of
//! the crate needs. Everything here is desk-scale (matrices of order <= 6
//! on the group side, a few hundred on the operator side), so we use plain
//! row-major storage and textbook algorithms with partial pivoting.

use num_complex::Complex64;

use crate::Error;

pub type C64 = Complex64;

/// Dense complex matrix, row-major, value semantics.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        CMatrix::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Submatrix with the given row/column ranges.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> CMatrix {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        CMatrix::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Write `b` into this matrix starting at (r0, c0).
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMatrix) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols);
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, a: C64) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| a * self[(i, j)])
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).frobenius_norm()
    }

    /// Matrix-vector product on a plain coefficient vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMatrix, Error> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "inverse of non-square matrix".into(),
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        for col in 0..n {
            let (mut piv, mut best) = (col, a[(col, col)].norm());
            for r in col + 1..n {
                let v = a[(r, col)].norm();
                if v > best {
                    piv = r;
                    best = v;
                }
            }
            if best < 1e-300 {
                return Err(Error::DecompositionFailed {
                    context: "singular matrix in inverse".into(),
                });
            }
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let acj = a[(col, j)];
                    let icj = inv[(col, j)];
                    a[(r, j)] -= f * acj;
                    inv[(r, j)] -= f * icj;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Cholesky factor L (lower triangular, real positive diagonal) of a
    /// Hermitian positive-definite matrix: L L* = self.
    pub fn cholesky_lower(&self) -> Result<CMatrix, Error> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "cholesky of non-square matrix".into(),
            });
        }
        let scale = self.frobenius_norm().max(1.0);
        if self.hermitian_defect() > 1e-12 * scale {
            return Err(Error::NotHermitian {
                defect: self.hermitian_defect(),
            });
        }
        let n = self.rows;
        let mut l = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self[(i, j)];
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)].conj();
                }
                if i == j {
                    let d = sum.re;
                    if d <= 0.0 || !d.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: d });
                    }
                    l[(i, i)] = C64::new(d.sqrt(), 0.0);
                } else {
                    l[(i, j)] = sum / l[(j, j)];
                }
            }
        }
        Ok(l)
    }

    /// Numerical rank via row echelon with partial pivoting.
    pub fn rank(&self, tol: f64) -> usize {
        let mut a = self.clone();
        let (m, n) = (a.rows, a.cols);
        let scale = a.max_abs().max(1.0);
        let mut rank = 0;
        let mut row = 0;
        for col in 0..n {
            if row >= m {
                break;
            }
            let (mut piv, mut best) = (row, a[(row, col)].norm());
            for r in row + 1..m {
                let v = a[(r, col)].norm();
                if v > best {
                    piv = r;
                    best = v;
                }
            }
            if best <= tol * scale {
                continue;
            }
            a.swap_rows(row, piv);
            let d = a[(row, col)];
            for r in row + 1..m {
                let f = a[(r, col)] / d;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in col..n {
                    let arj = a[(row, j)];
                    a[(r, j)] -= f * arj;
                }
            }
            rank += 1;
            row += 1;
        }
        rank
    }

    /// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>, Error> {
        let scale = self.frobenius_norm().max(1.0);
        if !self.is_square() || self.hermitian_defect() > 1e-8 * scale {
            return Err(Error::NotHermitian {
                defect: self.hermitian_defect(),
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        // symmetrize exactly so rounding in the input cannot bias the sweep
        for i in 0..n {
            a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
            for j in 0..i {
                let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
                a[(i, j)] = avg;
                a[(j, i)] = avg.conj();
            }
        }
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in i + 1..n {
                    off += a[(i, j)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-14 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let bmag = apq.norm();
                    if bmag <= 1e-300 {
                        continue;
                    }
                    let phase = apq / bmag;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let theta = 0.5 * (2.0 * bmag).atan2(app - aqq);
                    let (c, s) = (theta.cos(), theta.sin());
                    // columns: col_p <- c*col_p + s*phase*col_q, etc.
                    let gp = C64::new(c, 0.0);
                    let gq = phase * s;
                    for r in 0..n {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        a[(r, p)] = arp * gp + arq * gq.conj();
                        a[(r, q)] = -arp * gq + arq * gp;
                    }
                    for r in 0..n {
                        let apr = a[(p, r)];
                        let aqr = a[(q, r)];
                        a[(p, r)] = gp * apr + gq * aqr;
                        a[(q, r)] = -gq.conj() * apr + gp * aqr;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(eig)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Determinant of a real d x d matrix by LU with partial pivoting.
pub fn real_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut det = 1.0f64;
    for col in 0..n {
        let (mut piv, mut best) = (col, m[col][col].abs());
        for r in col + 1..n {
            if m[r][col].abs() > best {
                piv = r;
                best = m[r][col].abs();
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m[col][j];
                m[r][j] -= f * v;
            }
        }
    }
    det
}

/// Numerical rank of a real matrix (rows = constraints).
pub fn real_rank(a: &[Vec<f64>], tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let m = a.len();
    let n = a[0].len();
    let mut w: Vec<Vec<f64>> = a.to_vec();
    let scale = w
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    let mut rank = 0;
    let mut row = 0;
    for col in 0..n {
        if row >= m {
            break;
        }
        let (mut piv, mut best) = (row, w[row][col].abs());
        for r in row + 1..m {
            if w[r][col].abs() > best {
                piv = r;
                best = w[r][col].abs();
            }
        }
        if best <= tol * scale {
            continue;
        }
        w.swap(row, piv);
        for r in row + 1..m {
            let f = w[r][col] / w[row][col];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = w[row][j];
                w[r][j] -= f * v;
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

/// Determinant of a real-linear map on a d-dimensional real coordinate
/// space, given by its action on the coordinate basis vectors.
///
/// `action(k)` must return the image of the k-th basis vector as a full
/// coordinate vector of length d.
pub fn real_linear_det(dim: usize, action: impl Fn(usize) -> Vec<f64>) -> Result<f64, Error> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for k in 0..dim {
        let img = action(k);
        if img.len() != dim {
            return Err(Error::DimensionMismatch {
                context: format!("real_linear_det: image length {} != {}", img.len(), dim),
            });
        }
        cols.push(img);
    }
    // columns of the matrix are the basis images
    let rows: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| cols[j][i]).collect()).collect();
    Ok(real_det(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_lower(n: usize, rng: &mut impl Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(0.5 + rng.gen::<f64>(), 0.0)
            } else if i > j {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn cholesky_identity() {
        let m = CMatrix::identity(3);
        let l = m.cholesky_lower().unwrap();
        assert!(l.sub(&CMatrix::identity(3)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn cholesky_scalar() {
        let m = CMatrix::from_fn(1, 1, |_, _| C64::new(4.0, 0.0));
        let l = m.cholesky_lower().unwrap();
        assert!((l[(0, 0)] - C64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cholesky_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5 {
            let l0 = random_lower(n, &mut rng);
            let m = l0.mul(&l0.adjoint());
            let l = m.cholesky_lower().unwrap();
            assert!(
                l.sub(&l0).frobenius_norm() < 1e-10 * l0.frobenius_norm(),
                "round trip failed at n={n}"
            );
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                C64::new(if i == 0 { 1.0 } else { -1.0 }, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!(matches!(
            m.cholesky_lower(),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn cholesky_rejects_non_hermitian() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(m.cholesky_lower(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = CMatrix::from_fn(4, 4, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        }).add(&CMatrix::identity(4).scale(C64::new(2.0, 0.0)));
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).sub(&CMatrix::identity(4)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn real_linear_det_identity_and_scaling() {
        assert!((real_linear_det(2, |k| {
            let mut v = vec![0.0; 2];
            v[k] = 1.0;
            v
        })
        .unwrap()
            - 1.0)
            .abs()
            < 1e-14);
        let d = 5;
        let det = real_linear_det(d, |k| {
            let mut v = vec![0.0; d];
            v[k] = 2.0;
            v
        })
        .unwrap();
        assert!((det - 32.0).abs() < 1e-12);
    }

    #[test]
    fn det_of_composition_is_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = 4;
        for _ in 0..20 {
            let a: Vec<Vec<f64>> =
                (0..d).map(|_| (0..d).map(|_| rng.gen::<f64>() - 0.5).collect()).collect();
            let b: Vec<Vec<f64>> =
                (0..d).map(|_| (0..d).map(|_| rng.gen::<f64>() - 0.5).collect()).collect();
            let ab: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum())
                        .collect()
                })
                .collect();
            let lhs = real_det(&ab);
            let rhs = real_det(&a) * real_det(&b);
            assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn hermitian_eigenvalues_of_diagonal_conjugate() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 5;
        // random Hermitian with known spectrum: Q D Q* with Q from Gram-Schmidt
        let d: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let g = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        // orthonormalize columns
        let mut q = g;
        for j in 0..n {
            for k in 0..j {
                let mut dot = C64::new(0.0, 0.0);
                for i in 0..n {
                    dot += q[(i, k)].conj() * q[(i, j)];
                }
                for i in 0..n {
                    let v = q[(i, k)];
                    q[(i, j)] -= dot * v;
                }
            }
            let nrm: f64 = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..n {
                q[(i, j)] /= nrm;
            }
        }
        let dm = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(d[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let h = q.mul(&dm).mul(&q.adjoint());
        let mut expect = d.clone();
        expect.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let eig = h.hermitian_eigenvalues().unwrap();
        for (a, b) in eig.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
