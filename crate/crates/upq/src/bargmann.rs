//! Truncated Fock model for the fiber representation attached to a point
//! s of the triangular group.
//!
//! The fiber space is the span of normalized monomials x^k / sqrt(k!) in
//! the p*(q-p) complex variables x_ij, truncated at a total degree cap.
//! The operator of an Iwasawa element factors as a scalar times
//! multiplication by exp(sum c_ij x_ij) times a substitution
//! x_ij -> x_ij + t_ij, all of which are explicit on monomials.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::group::Signature;
use crate::iwasawa::{IwasawaElement, TriangularS};
use crate::matrix::CMatrix;
use crate::measures::SignVector;
use crate::Error;

/// Multi-indices over `vars` variables with total degree <= max_degree,
/// graded lexicographic, vacuum (all zeros) first.
#[derive(Debug)]
pub struct MultiIndexBasis {
    pub sig: Signature,
    pub max_degree: usize,
    pub vars: usize,
    indices: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl MultiIndexBasis {
    pub fn new(sig: Signature, max_degree: usize) -> Arc<Self> {
        let vars = sig.p * (sig.q - sig.p);
        let mut indices = Vec::new();
        for deg in 0..=max_degree {
            let mut bucket = Vec::new();
            enumerate_degree(vars, deg as u32, &mut vec![0; vars], 0, &mut bucket);
            bucket.sort();
            indices.extend(bucket);
        }
        let lookup = indices
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        Arc::new(MultiIndexBasis {
            sig,
            max_degree,
            vars,
            indices,
            lookup,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index(&self, i: usize) -> &[u32] {
        &self.indices[i]
    }

    pub fn position(&self, k: &[u32]) -> Option<usize> {
        self.lookup.get(k).copied()
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.indices[i].iter().sum()
    }

    /// Number of basis elements of total degree <= d.
    pub fn block_len(&self, d: usize) -> usize {
        self.indices
            .iter()
            .take_while(|k| k.iter().sum::<u32>() <= d as u32)
            .count()
    }

    /// Flat variable index of the matrix position (i, j), i < p, j < q - p.
    pub fn var(&self, i: usize, j: usize) -> usize {
        i * (self.sig.q - self.sig.p) + j
    }
}

fn enumerate_degree(vars: usize, deg: u32, cur: &mut Vec<u32>, at: usize, out: &mut Vec<Vec<u32>>) {
    if at == vars {
        if deg == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for d in 0..=deg {
        cur[at] = d;
        enumerate_degree(vars, deg - d, cur, at + 1, out);
    }
    cur[at] = 0;
}

/// Coefficient vector over a `MultiIndexBasis`.
#[derive(Clone, Debug)]
pub struct BargmannVector {
    pub basis: Arc<MultiIndexBasis>,
    pub coeffs: Vec<C64>,
}

impl BargmannVector {
    pub fn zero(basis: Arc<MultiIndexBasis>) -> Self {
        let n = basis.len();
        BargmannVector {
            basis,
            coeffs: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn vacuum(basis: Arc<MultiIndexBasis>) -> Self {
        let mut v = BargmannVector::zero(basis);
        v.coeffs[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &BargmannVector) -> C64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }
}

/// Dense operator on a `MultiIndexBasis` fiber.
#[derive(Clone, Debug)]
pub struct BargmannOperator {
    pub basis: Arc<MultiIndexBasis>,
    pub m: CMatrix,
}

impl BargmannOperator {
    pub fn identity(basis: Arc<MultiIndexBasis>) -> Self {
        let n = basis.len();
        BargmannOperator {
            basis,
            m: CMatrix::identity(n),
        }
    }

    pub fn apply(&self, v: &BargmannVector) -> BargmannVector {
        BargmannVector {
            basis: v.basis.clone(),
            coeffs: self.m.apply(&v.coeffs),
        }
    }

    pub fn compose(&self, other: &BargmannOperator) -> BargmannOperator {
        BargmannOperator {
            basis: self.basis.clone(),
            m: self.m.mul(&other.m),
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Matrix of multiplication by exp(sum_l c_l x_l) on normalized monomials:
/// column k feeds rows k + a with coefficient
/// prod_l c_l^{a_l} / a_l! * sqrt((k+a)_l! / k_l!).
fn mult_exp_matrix(basis: &MultiIndexBasis, c: &[C64]) -> CMatrix {
    let n = basis.len();
    let mut m = CMatrix::zeros(n, n);
    for col in 0..n {
        let k = basis.index(col);
        for row in 0..n {
            let kk = basis.index(row);
            if kk.iter().zip(k).any(|(a, b)| a < b) {
                continue;
            }
            let mut v = C64::new(1.0, 0.0);
            for l in 0..basis.vars {
                let a = kk[l] - k[l];
                if a > 0 {
                    v *= c[l].powu(a) / factorial(a);
                }
                v *= C64::new((factorial(kk[l]) / factorial(k[l])).sqrt(), 0.0);
            }
            m[(row, col)] = v;
        }
    }
    m
}

/// Matrix of the substitution x_l -> x_l + t_l on normalized monomials:
/// column k feeds rows m <= k with coefficient
/// prod_l C(k_l, m_l) t_l^{k_l - m_l} * sqrt(m_l! / k_l!).
fn shift_matrix(basis: &MultiIndexBasis, t: &[C64]) -> CMatrix {
    let n = basis.len();
    let mut mat = CMatrix::zeros(n, n);
    for col in 0..n {
        let k = basis.index(col);
        for row in 0..n {
            let mm = basis.index(row);
            if mm.iter().zip(k).any(|(a, b)| a > b) {
                continue;
            }
            let mut v = C64::new(1.0, 0.0);
            for l in 0..basis.vars {
                let drop = k[l] - mm[l];
                if drop > 0 {
                    v *= t[l].powu(drop) * binomial(k[l], mm[l]);
                }
                v *= C64::new((factorial(mm[l]) / factorial(k[l])).sqrt(), 0.0);
            }
            mat[(row, col)] = v;
        }
    }
    mat
}

/// Operator of the Iwasawa element (s0, h) on the fiber at s, for the sign
/// vector eps. With w = s h.z, the operator is
///   exp(tr(eps s h.n s*) - |w|^2/2) * Mult(exp(sum c x)) * Shift(t),
/// where per entry c = -conj(w), t = w when eps = +1 and c = -w,
/// t = conj(w) when eps = -1.
pub fn rep_operator(
    eps: &SignVector,
    s: &TriangularS,
    elem: &IwasawaElement,
    basis: &Arc<MultiIndexBasis>,
) -> Result<BargmannOperator, Error> {
    let sig = s.sig;
    if elem.sig() != sig || basis.sig != sig {
        return Err(Error::SignatureMismatch {
            p1: sig.p,
            q1: sig.q,
            p2: elem.sig().p,
            q2: elem.sig().q,
        });
    }
    if eps.len() != sig.p {
        return Err(Error::DimensionMismatch {
            context: "rep_operator: sign vector length".into(),
        });
    }
    let p = sig.p;
    let md = sig.q - sig.p;
    let w = s.m.mul(&elem.h.z);
    let conj_n = s.m.mul(&elem.h.n).mul(&s.m.adjoint());
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..p {
        tr += C64::new(eps.eps[i] as f64, 0.0) * conj_n[(i, i)];
    }
    let wnorm2: f64 = (0..p)
        .flat_map(|i| (0..md).map(move |j| (i, j)))
        .map(|(i, j)| w[(i, j)].norm_sqr())
        .sum();
    let scalar = (tr - C64::new(0.5 * wnorm2, 0.0)).exp();

    let mut c = vec![C64::new(0.0, 0.0); basis.vars];
    let mut t = vec![C64::new(0.0, 0.0); basis.vars];
    for i in 0..p {
        for j in 0..md {
            let l = basis.var(i, j);
            let wij = w[(i, j)];
            if eps.eps[i] == 1 {
                c[l] = -wij.conj();
                t[l] = wij;
            } else {
                c[l] = -wij;
                t[l] = wij.conj();
            }
        }
    }
    let m = mult_exp_matrix(basis, &c)
        .mul(&shift_matrix(basis, &t))
        .scale(scalar);
    Ok(BargmannOperator {
        basis: basis.clone(),
        m,
    })
}

/// Creation operator (multiplication by x_ij) and annihilation operator
/// (d/dx_ij) on the truncated basis. [A-, A+] = I holds exactly on the
/// degree <= max_degree - 1 block and fails only at the truncation edge.
pub fn creation_annihilation(
    basis: &Arc<MultiIndexBasis>,
    i: usize,
    j: usize,
) -> (BargmannOperator, BargmannOperator) {
    let l = basis.var(i, j);
    let n = basis.len();
    let mut up = CMatrix::zeros(n, n);
    let mut down = CMatrix::zeros(n, n);
    for col in 0..n {
        let k = basis.index(col);
        let mut raised = k.to_vec();
        raised[l] += 1;
        if let Some(row) = basis.position(&raised) {
            up[(row, col)] = C64::new(((k[l] + 1) as f64).sqrt(), 0.0);
        }
        if k[l] > 0 {
            let mut lowered = k.to_vec();
            lowered[l] -= 1;
            let row = basis.position(&lowered).expect("lowered index in basis");
            down[(row, col)] = C64::new((k[l] as f64).sqrt(), 0.0);
        }
    }
    (
        BargmannOperator {
            basis: basis.clone(),
            m: up,
        },
        BargmannOperator {
            basis: basis.clone(),
            m: down,
        },
    )
}

/// Vacuum matrix element of the fiber operator at s:
/// exp(tr(eps s n s*) - |s z|^2 / 2). The oscillatory part carries the
/// signs; the Gaussian part does not. For the all-plus sign vector this is
/// exp(tr(s (n - zz*/2) s*)).
pub fn spherical_function(
    eps: &SignVector,
    s: &TriangularS,
    elem: &IwasawaElement,
) -> Result<C64, Error> {
    let sig = s.sig;
    if eps.len() != sig.p || elem.sig() != sig {
        return Err(Error::DimensionMismatch {
            context: "spherical_function: sizes".into(),
        });
    }
    let conj = s.m.mul(&elem.h.n).mul(&s.m.adjoint());
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..sig.p {
        tr += C64::new(eps.eps[i] as f64, 0.0) * conj[(i, i)];
    }
    let w = s.m.mul(&elem.h.z);
    let wnorm2 = w.frobenius_norm().powi(2);
    Ok((tr - C64::new(0.5 * wnorm2, 0.0)).exp())
}

/// Gauss quadrature nodes and weights for the weight exp(-x^2) on the line.
/// Nodes are eigenvalues of the Jacobi matrix; weights are Christoffel
/// numbers from the orthonormal recurrence.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>), Error> {
    if n == 0 || n > 80 {
        return Err(Error::InvalidInput {
            context: "gauss_hermite order out of range".into(),
        });
    }
    let mut jac = CMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = C64::new(b, 0.0);
        jac[(k, k - 1)] = C64::new(b, 0.0);
    }
    let nodes = jac.hermitian_eigenvalues()?;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            // orthonormal recurrence p_{k+1} = (x p_k - sqrt(k/2) p_{k-1}) / sqrt((k+1)/2)
            let mut pkm1 = 0.0f64;
            let mut pk = 1.0 / sqrt_pi.sqrt();
            let mut sum = pk * pk;
            for k in 0..(n - 1) {
                let next = (x * pk - (k as f64 / 2.0).sqrt() * pkm1)
                    / (((k + 1) as f64) / 2.0).sqrt();
                pkm1 = pk;
                pk = next;
                sum += pk * pk;
            }
            1.0 / sum
        })
        .collect();
    Ok((nodes, weights))
}

/// Checks that the delta functional at zero equals Gaussian integration of
/// a polynomial in the truncated model: for f = sum coeffs_k x^k/sqrt(k!),
///   f(0) = int f(x-bar per sign) exp(-|x|^2) / pi^v dx.
/// Rows with eps = -1 use the conjugated variable. Returns the quadrature
/// value and f(0); errors if doubling the node count moves the result.
pub fn vacuum_functional_check(
    eps: &SignVector,
    f: &BargmannVector,
    nodes_per_axis: usize,
) -> Result<(C64, C64), Error> {
    let basis = &f.basis;
    let v = basis.vars;
    if v > 2 {
        return Err(Error::InvalidInput {
            context: "vacuum_functional_check supports at most 2 variables".into(),
        });
    }
    let at_zero = f.coeffs[0];
    let quad = |order: usize| -> Result<C64, Error> {
        let (xs, ws) = gauss_hermite(order)?;
        let mut total = C64::new(0.0, 0.0);
        // tensor grid over 2v real axes
        let axes = 2 * v;
        let mut idx = vec![0usize; axes];
        loop {
            let mut weight = 1.0;
            for &i in &idx {
                weight *= ws[i];
            }
            let mut zs = Vec::with_capacity(v);
            for l in 0..v {
                let z = C64::new(xs[idx[2 * l]], xs[idx[2 * l + 1]]);
              	// row sign decides holomorphic vs antiholomorphic variable
                let row = l / (basis.sig.q - basis.sig.p);
                zs.push(if eps.eps[row] == 1 { z } else { z.conj() });
            }
            let mut fv = C64::new(0.0, 0.0);
            for (bi, coeff) in f.coeffs.iter().enumerate() {
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                let k = basis.index(bi);
                let mut term = *coeff;
                for l in 0..v {
                    term *= zs[l].powu(k[l]) / factorial(k[l]).sqrt();
                }
                fv += term;
            }
            total += fv * weight;
            // advance the grid index
            let mut carry = 0;
            while carry < axes {
                idx[carry] += 1;
                if idx[carry] < xs.len() {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
            if carry == axes {
                break;
            }
        }
        Ok(total / C64::new(std::f64::consts::PI.powi(v as i32), 0.0))
    };
    let q1 = quad(nodes_per_axis)?;
    let q2 = quad(2 * nodes_per_axis)?;
    if (q1 - q2).norm() > 1e-8 * (1.0 + q2.norm()) {
        return Err(Error::QuadratureUnstable {
            context: format!(
                "doubling nodes moved the value by {:.3e}",
                (q1 - q2).norm()
            ),
        });
    }
    Ok((q2, at_zero))
}

/// Complex dimension of the space of matrices commuting with every operator
/// in the family, restricted to the degree <= block_degree block.
pub fn commutant_scan(
    family: &[BargmannOperator],
    block_degree: usize,
    tol: f64,
) -> Result<usize, Error> {
    if family.is_empty() {
        return Err(Error::InvalidInput {
            context: "commutant_scan needs a nonempty family".into(),
        });
    }
    let basis = &family[0].basis;
    let d = basis.block_len(block_degree);
    let unknowns = d * d;
    let mut rows = CMatrix::zeros(family.len() * unknowns, unknowns);
    for (fi, op) in family.iter().enumerate() {
        // normalize so the rank tolerance is scale-free
        let nrm = op.m.frobenius_norm().max(1e-300);
        for r in 0..d {
            for s in 0..d {
                let row = fi * unknowns + r * d + s;
                // (A X - X A)_{rs}: coefficient of X_{ks} is A_{rk},
                // coefficient of X_{rk} is -A_{ks}
                for k in 0..d {
                    rows[(row, k * d + s)] += op.m[(r, k)] / nrm;
                    rows[(row, r * d + k)] -= op.m[(k, s)] / nrm;
                }
            }
        }
    }
    let rank = rows.rank(tol);
    Ok(unknowns - rank)
}
