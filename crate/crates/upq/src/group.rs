//! The group U(p,q) in anti-diagonal coordinates: the defining form `sigma`,
//! membership checks with per-block residuals, the maximal compact subgroup,
//! the involution `w`, and Lie-algebra dimension counts obtained from the
//! numerical rank of the linearized membership condition.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{real_rank, CMatrix};
use crate::Error;

/// Signature (p, q) with the standing assumption q >= p >= 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self, Error> {
        if p < 1 || q < p {
            return Err(Error::InvalidInput {
                context: format!("signature requires q >= p >= 1, got ({p},{q})"),
            });
        }
        Ok(Signature { p, q })
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }
}

/// Element of U(p,q): a (p+q) x (p+q) matrix with g sigma g* = sigma.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub sig: Signature,
    pub m: CMatrix,
}

/// Default Frobenius tolerance for membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

impl GroupElement {
    pub fn new(sig: Signature, m: CMatrix) -> Result<Self, Error> {
        let (ok, _res) = is_member(&m, sig, MEMBERSHIP_TOL)?;
        if !ok {
            return Err(Error::InvalidInput {
                context: "matrix does not satisfy g sigma g* = sigma".into(),
            });
        }
        Ok(GroupElement { sig, m })
    }

    pub fn identity(sig: Signature) -> Self {
        GroupElement {
            sig,
            m: CMatrix::identity(sig.n()),
        }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            sig: self.sig,
            m: self.m.mul(&other.m),
        }
    }

    /// Group inverse, computed as sigma g* sigma (exact on the group).
    pub fn inverse(&self) -> GroupElement {
        let s = sigma(self.sig);
        GroupElement {
            sig: self.sig,
            m: s.mul(&self.m.adjoint()).mul(&s),
        }
    }

    pub fn residual(&self) -> f64 {
        let s = sigma(self.sig);
        self.m.mul(&s).mul(&self.m.adjoint()).sub(&s).frobenius_norm()
    }

    /// k k* = I defect, zero for elements of the maximal compact subgroup.
    pub fn unitarity_defect(&self) -> f64 {
        self.m
            .mul(&self.m.adjoint())
            .sub(&CMatrix::identity(self.sig.n()))
            .frobenius_norm()
    }
}

/// The block anti-diagonal form matrix: sigma = sigma* = sigma^{-1}.
pub fn sigma(sig: Signature) -> CMatrix {
    let (p, q) = (sig.p, sig.q);
    let n = p + q;
    let mut s = CMatrix::zeros(n, n);
    for i in 0..p {
        s[(i, n - p + i)] = C64::new(1.0, 0.0);
        s[(n - p + i, i)] = C64::new(1.0, 0.0);
    }
    for i in p..q {
        s[(i, i)] = C64::new(1.0, 0.0);
    }
    s
}

/// Residuals of the six block relations equivalent to g sigma g* = sigma.
#[derive(Clone, Debug)]
pub struct BlockResiduals(pub [f64; 6]);

/// Checks g sigma g* = sigma in Frobenius norm and reports the six block
/// residuals individually.
pub fn is_member(g: &CMatrix, sig: Signature, tol: f64) -> Result<(bool, BlockResiduals), Error> {
    let n = sig.n();
    if g.rows() != n || g.cols() != n {
        return Err(Error::DimensionMismatch {
            context: format!("is_member: matrix {}x{}, expected {n}x{n}", g.rows(), g.cols()),
        });
    }
    let s = sigma(sig);
    let r = g.mul(&s).mul(&g.adjoint()).sub(&s);
    let total = r.frobenius_norm();
    let (p, q) = (sig.p, sig.q);
    let m = q - p;
    // blocks of the residual matrix in row order (11, 22, 12, 13, 23, 33)
    let res = BlockResiduals([
        r.block(0, 0, p, p).frobenius_norm(),
        r.block(p, p, m, m).frobenius_norm(),
        r.block(0, p, p, m).frobenius_norm(),
        r.block(0, p + m, p, p).frobenius_norm(),
        r.block(p, p + m, m, p).frobenius_norm(),
        r.block(p + m, p + m, p, p).frobenius_norm(),
    ]);
    Ok((total <= tol, res))
}

/// Haar-random unitary of order n via Gram-Schmidt of a Gaussian matrix with
/// phase-fixed diagonal.
fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    let mut g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    for j in 0..n {
        for k in 0..j {
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..n {
                dot += g[(i, k)].conj() * g[(i, j)];
            }
            for i in 0..n {
                let v = g[(i, k)];
                g[(i, j)] -= dot * v;
            }
        }
        let nrm: f64 = (0..n).map(|i| g[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            g[(i, j)] /= nrm;
        }
        // phase fix: make the leading entry of each column real positive
        let ph = g[(j, j)] / g[(j, j)].norm();
        for i in 0..n {
            g[(i, j)] /= ph;
        }
    }
    g
}

/// Fixed unitary change of basis with C* sigma C = diag(+1 x q, -1 x p).
///
/// Columns: (e_i + e_{n-p+i})/sqrt(2) and the middle block give the +1
/// eigenvectors, (e_i - e_{n-p+i})/sqrt(2) give the -1 eigenvectors.
fn diagonalizing_basis(sig: Signature) -> CMatrix {
    let (p, q) = (sig.p, sig.q);
    let n = p + q;
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut c = CMatrix::zeros(n, n);
    for i in 0..p {
        c[(i, i)] = inv_sqrt2;
        c[(n - p + i, i)] = inv_sqrt2;
    }
    for j in p..q {
        c[(j, j)] = C64::new(1.0, 0.0);
    }
    for i in 0..p {
        c[(i, q + i)] = inv_sqrt2;
        c[(n - p + i, q + i)] = -inv_sqrt2;
    }
    c
}

/// Random element of the maximal compact subgroup K = U(p,q) n U(p+q):
/// a block-diagonal unitary in the sigma-diagonalizing basis, conjugated
/// back to the anti-diagonal coordinates.
pub fn random_compact(sig: Signature, rng: &mut impl Rng) -> GroupElement {
    let (p, q) = (sig.p, sig.q);
    let n = p + q;
    let uq = random_unitary(q, rng);
    let up = random_unitary(p, rng);
    let mut b = CMatrix::zeros(n, n);
    b.set_block(0, 0, &uq);
    b.set_block(q, q, &up);
    let c = diagonalizing_basis(sig);
    GroupElement {
        sig,
        m: c.mul(&b).mul(&c.adjoint()),
    }
}

/// The involution w = sigma, an element of K.
pub fn involution_w(sig: Signature) -> GroupElement {
    GroupElement {
        sig,
        m: sigma(sig),
    }
}

/// Linear subalgebra patterns whose dimensions the group theory pins down.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraPattern {
    /// The full Lie algebra of U(p,q).
    Full,
    /// The Lie algebra of the Heisenberg subgroup N.
    Heisenberg,
    /// The Lie algebra of the Iwasawa subgroup P = S x| N.
    Iwasawa,
    /// The Lie algebra of the maximal compact subgroup K.
    Compact,
}

/// Real dimension of the solution space of X sigma + sigma X* = 0
/// intersected with the pattern's linear constraints, by numerical rank.
pub fn lie_algebra_dimension(sig: Signature, pattern: AlgebraPattern) -> usize {
    let n = sig.n();
    let dim = 2 * n * n; // real coordinates: (re, im) of every entry
    let idx = |i: usize, j: usize, im: usize| 2 * (i * n + j) + im;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let s = sigma(sig);

    // Lie condition: X sigma + sigma X* = 0, entry (i,j):
    //   sum_k X_{ik} s_{kj} + s_{ik} conj(X_{jk}) = 0
    for i in 0..n {
        for j in 0..n {
            let mut re = vec![0.0; dim];
            let mut im = vec![0.0; dim];
            for k in 0..n {
                let skj = s[(k, j)].re; // sigma is real 0/1
                if skj != 0.0 {
                    re[idx(i, k, 0)] += skj;
                    im[idx(i, k, 1)] += skj;
                }
                let sik = s[(i, k)].re;
                if sik != 0.0 {
                    re[idx(j, k, 0)] += sik;
                    im[idx(j, k, 1)] -= sik;
                }
            }
            rows.push(re);
            rows.push(im);
        }
    }

    let (p, q) = (sig.p, sig.q);
    let m = q - p;
    let block_of = |i: usize| -> usize {
        if i < p {
            0
        } else if i < p + m {
            1
        } else {
            2
        }
    };
    let zero_entry = |rows: &mut Vec<Vec<f64>>, i: usize, j: usize| {
        for im in 0..2 {
            let mut r = vec![0.0; dim];
            r[idx(i, j, im)] = 1.0;
            rows.push(r);
        }
    };

    match pattern {
        AlgebraPattern::Full => {}
        AlgebraPattern::Compact => {
            // X + X* = 0
            for i in 0..n {
                for j in 0..n {
                    let mut re = vec![0.0; dim];
                    re[idx(i, j, 0)] += 1.0;
                    re[idx(j, i, 0)] += 1.0;
                    rows.push(re);
                    let mut im = vec![0.0; dim];
                    im[idx(i, j, 1)] += 1.0;
                    im[idx(j, i, 1)] -= 1.0;
                    rows.push(im);
                }
            }
        }
        AlgebraPattern::Heisenberg | AlgebraPattern::Iwasawa => {
            // strictly block lower triangular part only, plus (for the
            // Iwasawa pattern) block (3,3) in the lower-triangular algebra
            // of S and its forced mirror block (1,1)
            for i in 0..n {
                for j in 0..n {
                    let (bi, bj) = (block_of(i), block_of(j));
                    let keep = match (bi, bj) {
                        (1, 0) | (2, 0) | (2, 1) => true,
                        (0, 0) | (2, 2) => pattern == AlgebraPattern::Iwasawa,
                        _ => false,
                    };
                    if !keep {
                        zero_entry(&mut rows, i, j);
                    } else if pattern == AlgebraPattern::Iwasawa && bi == 2 && bj == 2 {
                        // S is lower triangular with real diagonal
                        let (li, lj) = (i - (p + m), j - (p + m));
                        if li < lj {
                            zero_entry(&mut rows, i, j);
                        } else if li == lj {
                            let mut r = vec![0.0; dim];
                            r[idx(i, j, 1)] = 1.0;
                            rows.push(r);
                        }
                    }
                }
            }
        }
    }

    dim - real_rank(&rows, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_small_cases() {
        let s11 = sigma(Signature::new(1, 1).unwrap());
        assert_eq!(s11[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(s11[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(s11[(0, 0)], C64::new(0.0, 0.0));

        let s12 = sigma(Signature::new(1, 2).unwrap());
        for (i, j) in [(0usize, 2usize), (1, 1), (2, 0)] {
            assert_eq!(s12[(i, j)], C64::new(1.0, 0.0));
        }
        assert_eq!(s12[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn sigma_is_involution() {
        for (p, q) in [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3)] {
            let sig = Signature::new(p, q).unwrap();
            let s = sigma(sig);
            assert_eq!(s.sub(&s.adjoint()).frobenius_norm(), 0.0);
            assert_eq!(
                s.mul(&s).sub(&CMatrix::identity(sig.n())).frobenius_norm(),
                0.0
            );
        }
    }

    #[test]
    fn membership_basics() {
        let sig = Signature::new(1, 2).unwrap();
        let (ok, res) = is_member(&CMatrix::identity(3), sig, 1e-8).unwrap();
        assert!(ok);
        assert!(res.0.iter().all(|r| *r == 0.0));

        // sigma itself is in the group
        let (ok, _) = is_member(&sigma(sig), sig, 1e-8).unwrap();
        assert!(ok);

        let mut g = CMatrix::identity(3);
        g[(0, 1)] += C64::new(1e-3, 0.0);
        let (ok, _) = is_member(&g, sig, 1e-8).unwrap();
        assert!(!ok);
    }

    #[test]
    fn random_compact_is_compact_member() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, q) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
            let sig = Signature::new(p, q).unwrap();
            for _ in 0..20 {
                let k = random_compact(sig, &mut rng);
                assert!(k.residual() < 1e-10, "membership residual too large");
                assert!(k.unitarity_defect() < 1e-10);
                // |det k| = 1: product of row norms bounds aside, check via
                // Gram: det(k k*) = 1 within tolerance
                let kk = k.m.mul(&k.m.adjoint());
                assert!(
                    kk.sub(&CMatrix::identity(sig.n())).frobenius_norm() < 1e-10
                );
            }
        }
    }

    #[test]
    fn involution_w_properties() {
        for (p, q) in [(1, 1), (1, 2), (2, 3)] {
            let sig = Signature::new(p, q).unwrap();
            let w = involution_w(sig);
            assert!(w
                .m
                .mul(&w.m)
                .sub(&CMatrix::identity(sig.n()))
                .frobenius_norm()
                == 0.0);
            assert!(w.residual() < 1e-14);
            assert!(w.unitarity_defect() < 1e-14);
        }
    }

    #[test]
    fn dimension_counts() {
        for p in 1..=3usize {
            for q in p..=3usize {
                let sig = Signature::new(p, q).unwrap();
                assert_eq!(
                    lie_algebra_dimension(sig, AlgebraPattern::Full),
                    (p + q) * (p + q),
                    "full ({p},{q})"
                );
                assert_eq!(
                    lie_algebra_dimension(sig, AlgebraPattern::Heisenberg),
                    p * (2 * q - p),
                    "heisenberg ({p},{q})"
                );
                assert_eq!(
                    lie_algebra_dimension(sig, AlgebraPattern::Iwasawa),
                    2 * p * q,
                    "iwasawa ({p},{q})"
                );
                assert_eq!(
                    lie_algebra_dimension(sig, AlgebraPattern::Compact),
                    p * p + q * q,
                    "compact ({p},{q})"
                );
            }
        }
    }

    #[test]
    fn compact_family_dimension_1_1() {
        let sig = Signature::new(1, 1).unwrap();
        assert_eq!(lie_algebra_dimension(sig, AlgebraPattern::Compact), 2);
    }
}
