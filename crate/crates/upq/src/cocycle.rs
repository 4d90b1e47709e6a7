//! The tautological 1-cocycle of the weighted Iwasawa representation and
//! its extension to the whole group.
//!
//! A single Iwasawa element p yields the section s -> b(p)(s) in the bundle
//! of fiber spaces; linear combinations of such sections form a module on
//! which the group acts by the cocycle rule B(g p) = pi(g) B(p) + B(g).
//! Compact elements act trivially, which extends the cocycle from the
//! Iwasawa subgroup to the rest of the group through the decomposition.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::bargmann::{rep_operator, BargmannVector, MultiIndexBasis};
use crate::group::GroupElement;
use crate::iwasawa::{iwasawa_decompose, k_conjugate, p_mul, IwasawaElement, TriangularS};
use crate::measures::{MeasureOnS, SignVector};
use crate::Error;

/// b(p)(s) = e^{-|s s0|^2 / 2} T_s(p) vac - e^{-|s|^2 / 2} vac,
/// evaluated in the truncated fiber at s.
pub fn cocycle_fiber(
    p: &IwasawaElement,
    s: &TriangularS,
    eps: &SignVector,
    basis: &Arc<MultiIndexBasis>,
) -> Result<BargmannVector, Error> {
    let op = rep_operator(eps, s, p, basis)?;
    let shifted = s.mul(&p.s);
    let w_shift = (-0.5 * shifted.norm() * shifted.norm()).exp();
    let w_here = (-0.5 * s.norm() * s.norm()).exp();
    let mut out = BargmannVector {
        basis: basis.clone(),
        coeffs: op.m.apply(&BargmannVector::vacuum(basis.clone()).coeffs),
    };
    for c in out.coeffs.iter_mut() {
        *c *= w_shift;
    }
    out.coeffs[0] -= C64::new(w_here, 0.0);
    Ok(out)
}

/// Closed form of the vacuum pairing <b(p)(s), vac> + e^{-|s|^2/2}:
/// exp(-tr(s (s0 s0*/2 + z z*/2 - n) s*)) for the all-plus sign vector.
/// Used as an oracle for the fiber computation.
pub fn vacuum_pairing_closed_form(p: &IwasawaElement, s: &TriangularS) -> C64 {
    let half = C64::new(0.5, 0.0);
    let core = p
        .s
        .m
        .mul(&p.s.m.adjoint())
        .scale(half)
        .add(&p.h.z.mul(&p.h.z.adjoint()).scale(half))
        .sub(&p.h.n);
    let conj = s.m.mul(&core).mul(&s.m.adjoint());
    (-conj.trace()).exp()
}

/// Shared-sample Monte Carlo pairing
/// int <b(p1)(s), b(p2)(s)> dnu(s) over the window, with a standard error
/// from batch means.
pub struct GramCache {
    pub samples: Vec<(TriangularS, f64)>,
    pub window: (f64, f64),
}

impl GramCache {
    pub fn draw(
        nu: &MeasureOnS,
        window: (f64, f64),
        n_samples: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let mut samples = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            let (s, q) = nu.sample_proposal(rng);
            let r = s.norm();
            let w = if r >= window.0 && r <= window.1 {
                nu.weight(&s, q)
            } else {
                0.0
            };
            samples.push((s, w));
        }
        GramCache { samples, window }
    }

    /// Pairing of two fiber sections against the cached sample set.
    pub fn pair(
        &self,
        p1: &IwasawaElement,
        p2: &IwasawaElement,
        eps: &SignVector,
        basis: &Arc<MultiIndexBasis>,
    ) -> Result<(C64, f64), Error> {
        let vals: Vec<C64> = self
            .samples
            .iter()
            .map(|(s, w)| -> Result<C64, Error> {
                if *w == 0.0 {
                    return Ok(C64::new(0.0, 0.0));
                }
                let b1 = cocycle_fiber(p1, s, eps, basis)?;
                let b2 = cocycle_fiber(p2, s, eps, basis)?;
                Ok(b1.inner(&b2) * *w)
            })
            .collect::<Result<_, _>>()?;
        Ok(mean_and_se(&vals))
    }

    /// Pairing of formal combinations, sharing fiber evaluations per sample.
    pub fn pair_combinations(
        &self,
        v1: &CocycleCombination,
        v2: &CocycleCombination,
        eps: &SignVector,
        basis: &Arc<MultiIndexBasis>,
    ) -> Result<(C64, f64), Error> {
        let vals: Vec<C64> = self
            .samples
            .iter()
            .map(|(s, w)| -> Result<C64, Error> {
                if *w == 0.0 {
                    return Ok(C64::new(0.0, 0.0));
                }
                let b1 = v1.eval_fiber(s, eps, basis)?;
                let b2 = v2.eval_fiber(s, eps, basis)?;
                Ok(b1.inner(&b2) * *w)
            })
            .collect::<Result<_, _>>()?;
        Ok(mean_and_se(&vals))
    }
}

fn mean_and_se(vals: &[C64]) -> (C64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<C64>() / n;
    let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Formal linear combination sum_i lambda_i b(p_i) in the module generated
/// by single-element sections.
#[derive(Clone, Debug)]
pub struct CocycleCombination {
    pub terms: Vec<(C64, IwasawaElement)>,
}

/// Generators closer than this are merged when normalizing; group actions
/// reproduce equal generators only up to floating-point noise.
pub const MERGE_TOL: f64 = 1e-6;

impl CocycleCombination {
    pub fn zero() -> Self {
        CocycleCombination { terms: Vec::new() }
    }

    pub fn single(p: IwasawaElement) -> Self {
        CocycleCombination {
            terms: vec![(C64::new(1.0, 0.0), p)],
        }
    }

    pub fn add(&self, other: &CocycleCombination) -> CocycleCombination {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        CocycleCombination { terms }.normalized()
    }

    pub fn scale(&self, lambda: C64) -> CocycleCombination {
        CocycleCombination {
            terms: self
                .terms
                .iter()
                .map(|(c, p)| (lambda * c, p.clone()))
                .collect(),
        }
    }

    /// Merges generators within MERGE_TOL, drops identity generators
    /// (b(e) = 0) and near-zero coefficients.
    pub fn normalized(&self) -> CocycleCombination {
        let mut merged: Vec<(C64, IwasawaElement)> = Vec::new();
        for (c, p) in &self.terms {
            if p.is_identity(MERGE_TOL) {
                continue;
            }
            match merged.iter_mut().find(|(_, q)| q.distance(p) < MERGE_TOL) {
                Some((cc, _)) => *cc += *c,
                None => merged.push((*c, p.clone())),
            }
        }
        merged.retain(|(c, _)| c.norm() > 1e-12);
        CocycleCombination { terms: merged }
    }

    pub fn is_zero(&self) -> bool {
        self.normalized().terms.is_empty()
    }

    pub fn eval_fiber(
        &self,
        s: &TriangularS,
        eps: &SignVector,
        basis: &Arc<MultiIndexBasis>,
    ) -> Result<BargmannVector, Error> {
        let mut out = BargmannVector::zero(basis.clone());
        for (c, p) in &self.terms {
            let b = cocycle_fiber(p, s, eps, basis)?;
            for (o, v) in out.coeffs.iter_mut().zip(&b.coeffs) {
                *o += c * v;
            }
        }
        Ok(out)
    }
}

/// Action of an Iwasawa element: lambda b(p) -> lambda (b(g p) - b(g)).
pub fn act_iwasawa(
    g: &IwasawaElement,
    v: &CocycleCombination,
) -> Result<CocycleCombination, Error> {
    let mut terms = Vec::new();
    let mut total = C64::new(0.0, 0.0);
    for (c, p) in &v.terms {
        terms.push((*c, p_mul(g, p)?));
        total += *c;
    }
    terms.push((-total, g.clone()));
    Ok(CocycleCombination { terms }.normalized())
}

/// Action of a compact element: b(p) -> b(p') where k embed(p) = embed(p') k'.
pub fn act_compact(k: &GroupElement, v: &CocycleCombination) -> Result<CocycleCombination, Error> {
    let mut terms = Vec::new();
    for (c, p) in &v.terms {
        let (p2, _k2) = k_conjugate(k, p)?;
        terms.push((*c, p2));
    }
    Ok(CocycleCombination { terms }.normalized())
}

/// Action of a general group element through its Iwasawa decomposition
/// g = p_g k_g: first the trivial compact action, then the cocycle rule.
pub fn act_group(g: &GroupElement, v: &CocycleCombination) -> Result<CocycleCombination, Error> {
    let (pg, kg) = iwasawa_decompose(g)?;
    let moved = act_compact(&kg, v)?;
    act_iwasawa(&pg, &moved)
}

/// Value of the extended cocycle at a group element: B(g) = b(p_g).
pub fn extended_cocycle(g: &GroupElement) -> Result<CocycleCombination, Error> {
    let (pg, _) = iwasawa_decompose(g)?;
    Ok(CocycleCombination::single(pg).normalized())
}

#[derive(Clone, Debug, Serialize)]
pub struct InjectivityReport {
    pub gram_min_eigenvalue: f64,
    pub min_eigenvalue_std_error: f64,
    pub gram_dim: usize,
    pub n_samples: usize,
}

/// Gram matrix of the sections b(p_1), ..., b(p_m) on shared samples; a
/// strictly positive smallest eigenvalue (beyond its batch standard error)
/// is evidence that distinct group elements give distinct cocycle values.
pub fn injectivity_evidence(
    elems: &[IwasawaElement],
    eps: &SignVector,
    basis: &Arc<MultiIndexBasis>,
    nu: &MeasureOnS,
    window: (f64, f64),
    n_samples: usize,
    n_batches: usize,
    rng: &mut impl Rng,
) -> Result<InjectivityReport, Error> {
    let m = elems.len();
    let mut lambdas = Vec::with_capacity(n_batches);
    for _ in 0..n_batches {
        let cache = GramCache::draw(nu, window, n_samples / n_batches, rng);
        let mut gram = crate::matrix::CMatrix::zeros(m, m);
        // per-sample section values, reused across all pairs
        let mut fibers: Vec<Vec<Option<BargmannVector>>> = Vec::new();
        for (s, w) in &cache.samples {
            if *w == 0.0 {
                fibers.push(vec![None; m]);
                continue;
            }
            let row: Vec<Option<BargmannVector>> = elems
                .iter()
                .map(|p| cocycle_fiber(p, s, eps, basis).map(Some))
                .collect::<Result<_, _>>()?;
            fibers.push(row);
        }
        let n = cache.samples.len() as f64;
        for i in 0..m {
            for j in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for (row, (_, w)) in fibers.iter().zip(&cache.samples) {
                    if let (Some(bi), Some(bj)) = (&row[i], &row[j]) {
                        acc += bi.inner(bj) * *w;
                    }
                }
                gram[(i, j)] = acc / n;
            }
        }
        // exact symmetrization before the eigenvalue solve
        let sym = gram.add(&gram.adjoint()).scale(C64::new(0.5, 0.0));
        let eigs = sym.hermitian_eigenvalues()?;
        lambdas.push(eigs[0]);
    }
    let (mean, se) = {
        let n = lambdas.len() as f64;
        let mean = lambdas.iter().sum::<f64>() / n;
        let var = lambdas.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    };
    Ok(InjectivityReport {
        gram_min_eigenvalue: mean,
        min_eigenvalue_std_error: se,
        gram_dim: m,
        n_samples,
    })
}
