//! The subgroups S, N (Heisenberg) and P = S x| N of U(p,q) in coordinates,
//! the matrix embedding, the Iwasawa decomposition g = p k, and the
//! conjugation solve k p = p' k'.
//!
//! Conventions fixed by the matrix-multiplication oracle (see the tests):
//!   * Heisenberg law (n1,z1)(n2,z2) = (n1+n2 - (z1 z2* - z2 z1*)/2, z1+z2),
//!   * S acts by (n,z) -> (s n s*, s z),
//!   * P-law (s1,h1)(s2,h2) = (s1 s2, h1 * s_act(s1, h2)),
//!   * embed(s,h) = E_N(h) E_S(s) with E_S = diag((s*)^{-1}, e, s).

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::group::{GroupElement, Signature};
use crate::matrix::CMatrix;
use crate::Error;

/// Lower-triangular p x p complex matrix with real positive diagonal.
#[derive(Clone, Debug)]
pub struct TriangularS {
    pub sig: Signature,
    pub m: CMatrix,
}

impl TriangularS {
    pub fn new(sig: Signature, m: CMatrix) -> Result<Self, Error> {
        let p = sig.p;
        if m.rows() != p || m.cols() != p {
            return Err(Error::DimensionMismatch {
                context: format!("TriangularS expects {p}x{p}"),
            });
        }
        for i in 0..p {
            for j in i + 1..p {
                if m[(i, j)].norm() != 0.0 {
                    return Err(Error::InvalidInput {
                        context: "TriangularS must be lower triangular".into(),
                    });
                }
            }
            if m[(i, i)].im != 0.0 || m[(i, i)].re <= 0.0 {
                return Err(Error::InvalidInput {
                    context: "TriangularS diagonal must be real positive".into(),
                });
            }
        }
        Ok(TriangularS { sig, m })
    }

    pub fn identity(sig: Signature) -> Self {
        TriangularS {
            sig,
            m: CMatrix::identity(sig.p),
        }
    }

    pub fn mul(&self, other: &TriangularS) -> TriangularS {
        TriangularS {
            sig: self.sig,
            m: self.m.mul(&other.m),
        }
    }

    pub fn inverse(&self) -> TriangularS {
        TriangularS {
            sig: self.sig,
            m: self.m.inverse().expect("triangular matrix with positive diagonal"),
        }
    }

    /// |s| = sqrt(tr(s s*)), the Frobenius norm over the occupied entries.
    pub fn norm(&self) -> f64 {
        self.m.frobenius_norm()
    }

    /// Scale by a positive real factor (stays in S).
    pub fn scaled(&self, lambda: f64) -> TriangularS {
        TriangularS {
            sig: self.sig,
            m: self.m.scale(C64::new(lambda, 0.0)),
        }
    }

    /// Random element with log-normal diagonal and Gaussian subdiagonal.
    pub fn random(sig: Signature, spread: f64, rng: &mut impl Rng) -> TriangularS {
        let p = sig.p;
        TriangularS {
            sig,
            m: CMatrix::from_fn(p, p, |i, j| {
                if i == j {
                    let g: f64 = StandardNormal.sample(rng);
                    C64::new((spread * g).exp(), 0.0)
                } else if i > j {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(spread * re, spread * im)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// Real coordinates (diagonal entries, then re/im of the subdiagonal),
    /// in a fixed order shared with `from_coords`.
    pub fn coords(&self) -> Vec<f64> {
        let p = self.sig.p;
        let mut v = Vec::with_capacity(p * p);
        for i in 0..p {
            v.push(self.m[(i, i)].re);
        }
        for i in 0..p {
            for j in 0..i {
                v.push(self.m[(i, j)].re);
                v.push(self.m[(i, j)].im);
            }
        }
        v
    }

    pub fn from_coords(sig: Signature, coords: &[f64]) -> TriangularS {
        let p = sig.p;
        let mut m = CMatrix::zeros(p, p);
        for i in 0..p {
            m[(i, i)] = C64::new(coords[i], 0.0);
        }
        let mut k = p;
        for i in 0..p {
            for j in 0..i {
                m[(i, j)] = C64::new(coords[k], coords[k + 1]);
                k += 2;
            }
        }
        TriangularS { sig, m }
    }
}

/// Element (n, z) of the Heisenberg group N: n skew-Hermitian p x p,
/// z complex p x (q-p).
#[derive(Clone, Debug)]
pub struct HeisenbergElement {
    pub sig: Signature,
    pub n: CMatrix,
    pub z: CMatrix,
}

impl HeisenbergElement {
    pub fn new(sig: Signature, n: CMatrix, z: CMatrix) -> Result<Self, Error> {
        let (p, m) = (sig.p, sig.q - sig.p);
        if n.rows() != p || n.cols() != p || z.rows() != p || z.cols() != m {
            return Err(Error::DimensionMismatch {
                context: "HeisenbergElement block sizes".into(),
            });
        }
        let defect = n.add(&n.adjoint()).frobenius_norm();
        if defect > 1e-12 * n.frobenius_norm().max(1.0) {
            return Err(Error::NotSkewHermitian { defect });
        }
        Ok(HeisenbergElement { sig, n, z })
    }

    pub fn identity(sig: Signature) -> Self {
        HeisenbergElement {
            sig,
            n: CMatrix::zeros(sig.p, sig.p),
            z: CMatrix::zeros(sig.p, sig.q - sig.p),
        }
    }

    pub fn inverse(&self) -> HeisenbergElement {
        HeisenbergElement {
            sig: self.sig,
            n: self.n.scale(C64::new(-1.0, 0.0)),
            z: self.z.scale(C64::new(-1.0, 0.0)),
        }
    }

    pub fn scaled(&self, lambda: f64) -> HeisenbergElement {
        let l = C64::new(lambda, 0.0);
        HeisenbergElement {
            sig: self.sig,
            n: self.n.scale(l),
            z: self.z.scale(l),
        }
    }

    /// Random element with entries of the given scale.
    pub fn random(sig: Signature, scale: f64, rng: &mut impl Rng) -> HeisenbergElement {
        let (p, m) = (sig.p, sig.q - sig.p);
        let a = CMatrix::from_fn(p, p, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(scale * re, scale * im)
        });
        let n = a.sub(&a.adjoint()).scale(C64::new(0.5, 0.0));
        let z = CMatrix::from_fn(p, m, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(scale * re, scale * im)
        });
        HeisenbergElement { sig, n, z }
    }
}

/// Heisenberg group law; the symplectic correction is skew-Hermitian by
/// construction, so the invariant holds exactly.
pub fn heis_mul(a: &HeisenbergElement, b: &HeisenbergElement) -> Result<HeisenbergElement, Error> {
    check_sig(a.sig, b.sig)?;
    let comm = a
        .z
        .mul(&b.z.adjoint())
        .sub(&b.z.mul(&a.z.adjoint()))
        .scale(C64::new(0.5, 0.0));
    Ok(HeisenbergElement {
        sig: a.sig,
        n: a.n.add(&b.n).sub(&comm),
        z: a.z.add(&b.z),
    })
}

/// The action of S on N by automorphisms: (n, z) -> (s n s*, s z).
pub fn s_act(s: &TriangularS, h: &HeisenbergElement) -> Result<HeisenbergElement, Error> {
    check_sig(s.sig, h.sig)?;
    Ok(HeisenbergElement {
        sig: h.sig,
        n: s.m.mul(&h.n).mul(&s.m.adjoint()),
        z: s.m.mul(&h.z),
    })
}

/// Element of the Iwasawa group P = S x| N.
#[derive(Clone, Debug)]
pub struct IwasawaElement {
    pub s: TriangularS,
    pub h: HeisenbergElement,
}

impl IwasawaElement {
    pub fn new(s: TriangularS, h: HeisenbergElement) -> Result<Self, Error> {
        check_sig(s.sig, h.sig)?;
        Ok(IwasawaElement { s, h })
    }

    pub fn sig(&self) -> Signature {
        self.s.sig
    }

    pub fn identity(sig: Signature) -> Self {
        IwasawaElement {
            s: TriangularS::identity(sig),
            h: HeisenbergElement::identity(sig),
        }
    }

    pub fn from_s(s: TriangularS) -> Self {
        let sig = s.sig;
        IwasawaElement {
            s,
            h: HeisenbergElement::identity(sig),
        }
    }

    pub fn from_h(h: HeisenbergElement) -> Self {
        let sig = h.sig;
        IwasawaElement {
            s: TriangularS::identity(sig),
            h,
        }
    }

    pub fn inverse(&self) -> IwasawaElement {
        let si = self.s.inverse();
        let h = s_act(&si, &self.h.inverse()).expect("same signature");
        IwasawaElement { s: si, h }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let p = self.sig().p;
        self.s.m.sub(&CMatrix::identity(p)).frobenius_norm() <= tol
            && self.h.n.frobenius_norm() <= tol
            && self.h.z.frobenius_norm() <= tol
    }

    /// Distance in coordinates, used for merging formal generators.
    pub fn distance(&self, other: &IwasawaElement) -> f64 {
        self.s.m.sub(&other.s.m).frobenius_norm()
            + self.h.n.sub(&other.h.n).frobenius_norm()
            + self.h.z.sub(&other.h.z).frobenius_norm()
    }

    pub fn random(sig: Signature, scale: f64, rng: &mut impl Rng) -> IwasawaElement {
        IwasawaElement {
            s: TriangularS::random(sig, scale, rng),
            h: HeisenbergElement::random(sig, scale, rng),
        }
    }
}

/// Semidirect-product law on P, consistent with `embed` (see module docs).
pub fn p_mul(a: &IwasawaElement, b: &IwasawaElement) -> Result<IwasawaElement, Error> {
    check_sig(a.sig(), b.sig())?;
    let twisted = s_act(&a.s, &b.h)?;
    Ok(IwasawaElement {
        s: a.s.mul(&b.s),
        h: heis_mul(&a.h, &twisted)?,
    })
}

/// Matrix embedding of P into U(p,q):
/// embed(s, (n,z)) = E_N(n,z) E_S(s), with zeta = n - z z*/2 and blocks
/// ((s*)^{-1}, 0, 0; -z*(s*)^{-1}, e, 0; zeta (s*)^{-1}, z, s).
pub fn embed(a: &IwasawaElement) -> GroupElement {
    let sig = a.sig();
    let (p, mdim) = (sig.p, sig.q - sig.p);
    let n = sig.n();
    let zeta = a
        .h
        .n
        .sub(&a.h.z.mul(&a.h.z.adjoint()).scale(C64::new(0.5, 0.0)));
    let s_inv_adj = a.s.m.adjoint().inverse().expect("triangular with positive diagonal");
    let mut g = CMatrix::identity(n);
    g.set_block(0, 0, &s_inv_adj);
    g.set_block(p, 0, &a.h.z.adjoint().scale(C64::new(-1.0, 0.0)).mul(&s_inv_adj));
    g.set_block(p + mdim, 0, &zeta.mul(&s_inv_adj));
    g.set_block(p + mdim, p, &a.h.z);
    g.set_block(p + mdim, p + mdim, &a.s.m);
    GroupElement { sig, m: g }
}

/// Iwasawa decomposition g = embed(p) k with k in the maximal compact
/// subgroup, solved blockwise from M = g g* = pp*.
pub fn iwasawa_decompose(g: &GroupElement) -> Result<(IwasawaElement, GroupElement), Error> {
    let sig = g.sig;
    let (p, mdim) = (sig.p, sig.q - sig.p);
    if g.residual() > crate::group::MEMBERSHIP_TOL * g.m.frobenius_norm().max(1.0) {
        return Err(Error::DecompositionFailed {
            context: "input does not satisfy the membership condition".into(),
        });
    }
    let big = g.m.mul(&g.m.adjoint());
    let m11 = big.block(0, 0, p, p);
    let gram = m11.inverse().map_err(|_| Error::DecompositionFailed {
        context: "top-left block of g g* is singular".into(),
    })?; // gram = s s*
    let s_mat = gram.cholesky_lower().map_err(|e| Error::DecompositionFailed {
        context: format!("cholesky of (g g*)_{{11}}^{{-1}}: {e}"),
    })?;
    let s = TriangularS::new(sig, s_mat)?;
    // z = -(s s*) M12, zeta = M31 (s s*)
    let z = gram.mul(&big.block(0, p, p, mdim)).scale(C64::new(-1.0, 0.0));
    let zeta = big.block(p + mdim, 0, p, p).mul(&gram);
    let mut nmat = zeta.add(&z.mul(&z.adjoint()).scale(C64::new(0.5, 0.0)));
    let defect = nmat.add(&nmat.adjoint()).frobenius_norm();
    if defect > 1e-6 * nmat.frobenius_norm().max(1.0) {
        return Err(Error::DecompositionFailed {
            context: format!("central block is not skew-Hermitian (defect {defect:.3e})"),
        });
    }
    nmat = nmat.sub(&nmat.adjoint()).scale(C64::new(0.5, 0.0));
    let h = HeisenbergElement::new(sig, nmat, z)?;
    let pel = IwasawaElement::new(s, h)?;
    let k = embed(&pel).inverse().mul(g);
    if k.unitarity_defect() > 1e-6 * k.m.frobenius_norm().max(1.0) {
        return Err(Error::DecompositionFailed {
            context: "compact factor is not unitary".into(),
        });
    }
    Ok((pel, k))
}

/// The conjugation solve k p = p' k': returns (p', k') for compact k.
pub fn k_conjugate(
    k: &GroupElement,
    a: &IwasawaElement,
) -> Result<(IwasawaElement, GroupElement), Error> {
    if k.unitarity_defect() > 1e-8 * k.m.frobenius_norm().max(1.0) {
        return Err(Error::InvalidInput {
            context: "k_conjugate expects a compact element".into(),
        });
    }
    iwasawa_decompose(&k.mul(&embed(a)))
}

fn check_sig(a: Signature, b: Signature) -> Result<(), Error> {
    if a != b {
        return Err(Error::SignatureMismatch {
            p1: a.p,
            q1: a.q,
            p2: b.p,
            q2: b.q,
        });
    }
    Ok(())
}
