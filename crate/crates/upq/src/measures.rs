//! Nondegenerate characters on the center of the Heisenberg group, almost
//! invariant measures on the triangular group S, Radon-Nikodym machinery,
//! and the quadrature engine for the sufficient conditions under which the
//! associated representation of the Iwasawa group carries a nontrivial
//! 1-cocycle.
//!
//! All integrals over S are windowed to delta <= |s| <= R and estimated by
//! importance sampling (log-normal diagonal, Gaussian subdiagonal proposal),
//! with p = 1 additionally served by deterministic radial quadrature.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::group::Signature;
use crate::iwasawa::{IwasawaElement, TriangularS};
use crate::matrix::{real_linear_det, CMatrix};
use crate::Error;

/// Sign vector eps = diag(eps_1, ..., eps_p), entries +-1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignVector {
    pub eps: Vec<i8>,
}

impl SignVector {
    pub fn new(eps: Vec<i8>) -> Result<Self, Error> {
        if eps.is_empty() || eps.iter().any(|e| *e != 1 && *e != -1) {
            return Err(Error::InvalidInput {
                context: "sign vector entries must be +-1".into(),
            });
        }
        Ok(SignVector { eps })
    }

    pub fn plus(p: usize) -> Self {
        SignVector { eps: vec![1; p] }
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }
}

/// chi_s^eps(n) = exp(tr(eps s n s*)) for skew-Hermitian n; always on the
/// unit circle because the trace is purely imaginary.
pub fn char_eval(eps: &SignVector, s: &TriangularS, n: &CMatrix) -> Result<C64, Error> {
    let p = s.sig.p;
    if eps.len() != p || n.rows() != p || n.cols() != p {
        return Err(Error::DimensionMismatch {
            context: "char_eval: sign vector / matrix sizes".into(),
        });
    }
    let defect = n.add(&n.adjoint()).frobenius_norm();
    if defect > 1e-10 * n.frobenius_norm().max(1.0) {
        return Err(Error::NotSkewHermitian { defect });
    }
    let conj = s.m.mul(n).mul(&s.m.adjoint());
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..p {
        tr += C64::new(eps.eps[i] as f64, 0.0) * conj[(i, i)];
    }
    Ok(tr.exp())
}

/// Looks for a sampled (s, n) pair on which the characters of two distinct
/// sign vectors take different values.
pub fn orbit_separation(
    eps1: &SignVector,
    eps2: &SignVector,
    samples: &[(TriangularS, CMatrix)],
) -> Result<bool, Error> {
    if eps1 == eps2 {
        return Err(Error::InvalidInput {
            context: "orbit_separation requires distinct sign vectors".into(),
        });
    }
    for (s, n) in samples {
        let a = char_eval(eps1, s, n)?;
        let b = char_eval(eps2, s, n)?;
        if (a - b).norm() > 1e-8 {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MeasureKind {
    PowerLaw,
    RightHaar,
    Custom,
}

type DensityFn = Arc<dyn Fn(&TriangularS) -> f64 + Send + Sync>;

/// A measure on S given by a density with respect to the flat measure on
/// the p^2 real coordinates, together with an importance-sampling proposal.
#[derive(Clone)]
pub struct MeasureOnS {
    pub sig: Signature,
    pub kind: MeasureKind,
    density: DensityFn,
    /// log-normal spread of the proposal's diagonal entries
    diag_spread: f64,
}

impl MeasureOnS {
    pub fn custom(sig: Signature, density: DensityFn) -> Self {
        MeasureOnS {
            sig,
            kind: MeasureKind::Custom,
            density,
            diag_spread: 1.2,
        }
    }

    pub fn density(&self, s: &TriangularS) -> f64 {
        (self.density)(s)
    }

    /// Draws from the proposal and returns the proposal density at the draw.
    pub fn sample_proposal(&self, rng: &mut impl Rng) -> (TriangularS, f64) {
        let p = self.sig.p;
        let tau = self.diag_spread;
        let mut logpdf = 0.0f64;
        let mut m = CMatrix::zeros(p, p);
        for i in 0..p {
            let g: f64 = StandardNormal.sample(rng);
            let d = (tau * g).exp();
            m[(i, i)] = C64::new(d, 0.0);
            // log-normal density in the linear coordinate d
            logpdf += -0.5 * g * g - (tau * d * (2.0 * std::f64::consts::PI).sqrt()).ln();
            for j in 0..i {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                m[(i, j)] = C64::new(re, im);
                logpdf += -0.5 * (re * re + im * im) - (2.0 * std::f64::consts::PI).ln();
            }
        }
        (TriangularS { sig: self.sig, m }, logpdf.exp())
    }

    /// Importance weight of a proposal draw with respect to this measure.
    pub fn weight(&self, s: &TriangularS, proposal_density: f64) -> f64 {
        self.density(s) / proposal_density
    }
}

/// The almost invariant measure d nu(s) = |s|^{-p^2} ds.
pub fn power_law_measure(sig: Signature) -> MeasureOnS {
    let exponent = (sig.p * sig.p) as f64;
    MeasureOnS {
        sig,
        kind: MeasureKind::PowerLaw,
        density: Arc::new(move |s: &TriangularS| s.norm().powf(-exponent)),
        diag_spread: 1.2,
    }
}

/// Real Jacobian determinant of the right translation s -> s s0 on the p^2
/// real coordinates of S, computed from the action on the coordinate basis.
pub fn right_translation_jacobian(s0: &TriangularS) -> f64 {
    let sig = s0.sig;
    let d = sig.p * sig.p;
    real_linear_det(d, |k| {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        let basis = TriangularS::from_coords(sig, &e);
        TriangularS {
            sig,
            m: basis.m.mul(&s0.m),
        }
        .coords()
    })
    .expect("coordinate dimensions agree")
    .abs()
}

/// Exponents c_i of the right Haar density prod s_ii^{-c_i}, calibrated
/// numerically from the translation Jacobian at diagonal test elements.
pub fn haar_exponents(sig: Signature) -> Vec<f64> {
    let p = sig.p;
    let lambda = 2.0f64;
    (0..p)
        .map(|i| {
            let mut m = CMatrix::identity(p);
            m[(i, i)] = C64::new(lambda, 0.0);
            let s0 = TriangularS { sig, m };
            right_translation_jacobian(&s0).ln() / lambda.ln()
        })
        .collect()
}

/// Right Haar measure on S (invariant under s -> s s0), with exponents
/// frozen from `haar_exponents`.
pub fn right_haar_measure(sig: Signature) -> MeasureOnS {
    let c = haar_exponents(sig);
    MeasureOnS {
        sig,
        kind: MeasureKind::RightHaar,
        density: Arc::new(move |s: &TriangularS| {
            (0..s.sig.p)
                .map(|i| s.m[(i, i)].re.powf(-c[i]))
                .product()
        }),
        diag_spread: 1.2,
    }
}

/// Radon-Nikodym derivative d nu(s s0) / d nu(s) of the right translation,
/// including the coordinate Jacobian.
pub fn radon_nikodym(measure: &MeasureOnS, s: &TriangularS, s0: &TriangularS) -> f64 {
    let ss0 = s.mul(s0);
    measure.density(&ss0) * right_translation_jacobian(s0) / measure.density(s)
}

/// Positive scalar weight on S.
#[derive(Clone)]
pub struct WeightFunction {
    f: Arc<dyn Fn(&TriangularS) -> f64 + Send + Sync>,
}

impl WeightFunction {
    pub fn new(f: impl Fn(&TriangularS) -> f64 + Send + Sync + 'static) -> Self {
        WeightFunction { f: Arc::new(f) }
    }

    /// The reference weight f(s) = exp(-|s|^2 / 2).
    pub fn gaussian() -> Self {
        WeightFunction::new(|s: &TriangularS| (-0.5 * s.norm() * s.norm()).exp())
    }

    pub fn eval(&self, s: &TriangularS) -> f64 {
        (self.f)(s)
    }
}

/// Weight a with |a(s)|^2 = d nu(s) / d mu(s) against the right Haar
/// measure mu, so that int |g|^2 dnu = int |g a|^2 dmu.
pub fn haar_reweight(nu: &MeasureOnS) -> WeightFunction {
    let mu = right_haar_measure(nu.sig);
    let nu = nu.clone();
    WeightFunction::new(move |s: &TriangularS| (nu.density(s) / mu.density(s)).sqrt())
}

/// Windowed importance-sampling estimate of an integral over S.
///
/// Returns (estimate, standard error, effective sample size).
pub fn integrate_window(
    measure: &MeasureOnS,
    window: (f64, f64),
    integrand: impl Fn(&TriangularS) -> f64,
    n_samples: usize,
    rng: &mut impl Rng,
) -> (f64, f64, f64) {
    let (lo, hi) = window;
    let mut vals = Vec::with_capacity(n_samples);
    let mut wsum = 0.0f64;
    let mut w2sum = 0.0f64;
    for _ in 0..n_samples {
        let (s, q) = measure.sample_proposal(rng);
        let r = s.norm();
        let v = if r >= lo && r <= hi {
            let w = measure.weight(&s, q);
            wsum += w;
            w2sum += w * w;
            integrand(&s) * w
        } else {
            0.0
        };
        vals.push(v);
    }
    let n = n_samples as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let ess = if w2sum > 0.0 { wsum * wsum / w2sum } else { 0.0 };
    (mean, (var / n).sqrt(), ess)
}

/// Simpson quadrature of int_lo^hi g(r) dr/r on a logarithmic grid.
pub fn radial_log_quadrature(lo: f64, hi: f64, g: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let a = lo.ln();
    let b = hi.ln();
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let t = a + h * i as f64;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * g(t.exp());
    }
    sum * h / 3.0
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// same estimate with the window top doubled, for stability checks
    pub estimate_2r: f64,
    pub std_error_2r: f64,
}

impl ConditionEstimate {
    /// |estimate(2R)/estimate(R) - 1| within k combined standard errors.
    pub fn window_stable(&self, k: f64) -> bool {
        let denom = self.estimate.abs().max(1e-300);
        let ratio = self.estimate_2r / self.estimate;
        let se = (self.std_error.hypot(self.std_error_2r)) / denom;
        (ratio - 1.0).abs() <= k * se.max(1e-12) || (ratio - 1.0).abs() < 1e-6
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem9Report {
    /// (delta, truncated integral) pairs for the divergence condition
    pub i_points: Vec<(f64, f64)>,
    /// fitted growth rate of the truncated integral against log(1/delta)
    pub i_slope: f64,
    pub ii_values: Vec<ConditionEstimate>,
    pub iii_values: Vec<ConditionEstimate>,
}

/// Evaluates the three sufficient conditions for the weighted representation
/// to carry a nontrivial 1-cocycle, on a finite window [delta, R]:
///   (i)  growth of int_{delta<=|s|<=R} f^2 dnu as delta -> 0,
///   (ii) int |f(s s0) - f(s)|^2 dnu for each test element's S-part,
///   (iii) int (1 - Re exp(tr(eps s (n - zz*/2) s*))) f^2 dnu for each
///         test element's Heisenberg part.
#[allow(clippy::too_many_arguments)]
pub fn theorem9_conditions(
    nu: &MeasureOnS,
    f: &WeightFunction,
    eps: &SignVector,
    test_elems: &[IwasawaElement],
    window: (f64, f64),
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<Theorem9Report, Error> {
    let (delta, r) = window;
    if !(delta > 0.0 && delta < r) {
        return Err(Error::InvalidInput {
            context: "window must satisfy 0 < delta < R".into(),
        });
    }
    let p = nu.sig.p;

    // condition (i): truncated integral at a ladder of lower cutoffs
    let deltas: Vec<f64> = (0..6).map(|k| delta * 2f64.powi(k)).collect();
    let mut i_points = Vec::new();
    for d in &deltas {
        let val = if p == 1 {
            // nu and f are radial for p = 1: deterministic quadrature
            let dens = |rr: f64| {
                nu.density(&scalar_s(nu.sig, rr)) * f.eval(&scalar_s(nu.sig, rr)).powi(2)
            };
            // density is with respect to ds = dr; fold r into the integrand
            radial_log_quadrature(*d, r, |rr| dens(rr) * rr, 400)
        } else {
            let (est, _, _) =
                integrate_window(nu, (*d, r), |s| f.eval(s).powi(2), n_samples, rng);
            est
        };
        i_points.push((*d, val));
    }
    // least-squares slope of I(delta) against log(1/delta)
    let xs: Vec<f64> = i_points.iter().map(|(d, _)| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = i_points.iter().map(|(_, v)| *v).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let i_slope = sxy / sxx;

    // conditions (ii) and (iii)
    let mut ii_values = Vec::new();
    let mut iii_values = Vec::new();
    for elem in test_elems {
        let s0 = elem.s.clone();
        let ii_fn = |s: &TriangularS| {
            let d = f.eval(&s.mul(&s0)) - f.eval(s);
            d * d
        };
        let iii_fn = |s: &TriangularS| {
            let conj = s.m.mul(&elem.h.n).mul(&s.m.adjoint());
            let mut tr = C64::new(0.0, 0.0);
            for i in 0..p {
                tr += C64::new(eps.eps[i] as f64, 0.0) * conj[(i, i)];
            }
            let w = s.m.mul(&elem.h.z);
            let sph = (tr - C64::new(0.5 * w.frobenius_norm().powi(2), 0.0)).exp();
            let fv = f.eval(s);
            (1.0 - sph.re) * fv * fv
        };
        let (e1, s1, _) = integrate_window(nu, (delta, r), ii_fn, n_samples, rng);
        let (e1b, s1b, _) = integrate_window(nu, (delta, 2.0 * r), ii_fn, n_samples, rng);
        let (e2, s2, _) = integrate_window(nu, (delta, r), &iii_fn, n_samples, rng);
        let (e2b, s2b, _) = integrate_window(nu, (delta, 2.0 * r), &iii_fn, n_samples, rng);
        for v in [e1, e1b, e2, e2b] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "condition (ii)/(iii) estimate".into(),
                });
            }
        }
        ii_values.push(ConditionEstimate {
            estimate: e1,
            std_error: s1,
            estimate_2r: e1b,
            std_error_2r: s1b,
        });
        iii_values.push(ConditionEstimate {
            estimate: e2,
            std_error: s2,
            estimate_2r: e2b,
            std_error_2r: s2b,
        });
    }

    Ok(Theorem9Report {
        i_points,
        i_slope,
        ii_values,
        iii_values,
    })
}

fn scalar_s(sig: Signature, r: f64) -> TriangularS {
    TriangularS {
        sig,
        m: CMatrix::from_fn(sig.p, sig.p, |i, j| {
            if i == j {
                C64::new(r, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig12() -> Signature {
        Signature::new(1, 2).unwrap()
    }

    fn sig23() -> Signature {
        Signature::new(2, 3).unwrap()
    }

    #[test]
    fn char_eval_basics() {
        let sig = sig12();
        let s = TriangularS::identity(sig);
        let eps = SignVector::plus(1);
        let zero = CMatrix::zeros(1, 1);
        assert!((char_eval(&eps, &s, &zero).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);

        let theta = 0.7;
        let n = CMatrix::from_fn(1, 1, |_, _| C64::new(0.0, theta));
        let v = char_eval(&eps, &s, &n).unwrap();
        assert!((v - C64::new(theta.cos(), theta.sin())).norm() < 1e-14);
    }

    #[test]
    fn char_modulus_one_and_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let sig = sig23();
        let eps = SignVector::new(vec![1, -1]).unwrap();
        for _ in 0..1000 {
            let s = TriangularS::random(sig, 0.5, &mut rng);
            let h1 = crate::iwasawa::HeisenbergElement::random(sig, 0.8, &mut rng);
            let h2 = crate::iwasawa::HeisenbergElement::random(sig, 0.8, &mut rng);
            let v1 = char_eval(&eps, &s, &h1.n).unwrap();
            let v2 = char_eval(&eps, &s, &h2.n).unwrap();
            assert!((v1.norm() - 1.0).abs() < 1e-12);
            let v12 = char_eval(&eps, &s, &h1.n.add(&h2.n)).unwrap();
            assert!((v12 - v1 * v2).norm() < 1e-12);
        }
    }

    #[test]
    fn orbit_separation_cases() {
        let sig = sig12();
        let e_plus = SignVector::plus(1);
        let e_minus = SignVector::new(vec![-1]).unwrap();
        let s = TriangularS::identity(sig);
        let n = CMatrix::from_fn(1, 1, |_, _| C64::new(0.0, 1.0));
        let samples = vec![(s, n)];
        assert!(orbit_separation(&e_plus, &e_minus, &samples).unwrap());
        assert!(orbit_separation(&e_plus, &e_plus.clone(), &samples).is_err());

        // p = 2: (+,+) vs (+,-) separated by n = diag(i, i)
        let sig2 = sig23();
        let epp = SignVector::new(vec![1, 1]).unwrap();
        let epm = SignVector::new(vec![1, -1]).unwrap();
        let n2 = CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                C64::new(0.0, 1.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let samples2 = vec![(TriangularS::identity(sig2), n2)];
        assert!(orbit_separation(&epp, &epm, &samples2).unwrap());
    }

    #[test]
    fn power_law_density_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let sig = sig23();
        let nu = power_law_measure(sig);
        for _ in 0..20 {
            let s = TriangularS::random(sig, 0.4, &mut rng);
            let lam = 1.7f64;
            let lhs = nu.density(&s.scaled(lam));
            let rhs = lam.powf(-((sig.p * sig.p) as f64)) * nu.density(&s);
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
        }
        // p = 1: density is 1/s
        let nu1 = power_law_measure(sig12());
        let s = scalar_s(sig12(), 0.25);
        assert!((nu1.density(&s) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_shell_mass_matches_radial_oracle() {
        // p = 1: int_{1<=s<=2} ds/s = ln 2, MC within 3 std errors
        let nu = power_law_measure(sig12());
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let (est, se, ess) = integrate_window(&nu, (1.0, 2.0), |_| 1.0, 40_000, &mut rng);
        assert!(ess > 1000.0, "effective sample size too small: {ess}");
        assert!(
            (est - std::f64::consts::LN_2).abs() < 3.0 * se,
            "est {est} se {se}"
        );
        // stable across seeds
        let mut rng2 = ChaCha8Rng::seed_from_u64(34);
        let (est2, se2, _) = integrate_window(&nu, (1.0, 2.0), |_| 1.0, 40_000, &mut rng2);
        assert!((est - est2).abs() < 3.0 * (se + se2));
    }

    #[test]
    fn radon_nikodym_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let sig = sig12();
        let nu = power_law_measure(sig);
        let s = TriangularS::random(sig, 0.5, &mut rng);
        assert!((radon_nikodym(&nu, &s, &TriangularS::identity(sig)) - 1.0).abs() < 1e-12);
        // p = 1: ds/s is right-invariant
        let s0 = TriangularS::random(sig, 0.5, &mut rng);
        assert!((radon_nikodym(&nu, &s, &s0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn radon_nikodym_cocycle_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let sig = sig23();
        let nu = power_law_measure(sig);
        for _ in 0..30 {
            let s = TriangularS::random(sig, 0.4, &mut rng);
            let s0 = TriangularS::random(sig, 0.4, &mut rng);
            let s1 = TriangularS::random(sig, 0.4, &mut rng);
            let lhs = radon_nikodym(&nu, &s, &s0.mul(&s1));
            let rhs = radon_nikodym(&nu, &s, &s0) * radon_nikodym(&nu, &s.mul(&s0), &s1);
            assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn radon_nikodym_bounded_for_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let sig = sig23();
        let nu = power_law_measure(sig);
        for _ in 0..20 {
            let s0 = TriangularS::random(sig, 0.4, &mut rng);
            let mut sup = 0.0f64;
            for _ in 0..10_000 {
                let (s, _) = nu.sample_proposal(&mut rng);
                sup = sup.max(radon_nikodym(&nu, &s, &s0));
            }
            assert!(sup.is_finite(), "unbounded RN derivative");
        }
    }

    #[test]
    fn right_haar_is_right_invariant_in_mc() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let sig = sig23();
        let mu = right_haar_measure(sig);
        // RN derivative of right translation for the Haar measure is 1
        for _ in 0..20 {
            let s = TriangularS::random(sig, 0.4, &mut rng);
            let s0 = TriangularS::random(sig, 0.4, &mut rng);
            assert!((radon_nikodym(&mu, &s, &s0) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn haar_exponents_p1() {
        let c = haar_exponents(sig12());
        assert_eq!(c.len(), 1);
        assert!((c[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_reweight_identities() {
        let sig = sig12();
        // nu = mu for p = 1 (both ds/s): a is constant
        let nu = power_law_measure(sig);
        let a = haar_reweight(&nu);
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let s1 = TriangularS::random(sig, 0.5, &mut rng);
        let s2 = TriangularS::random(sig, 0.5, &mut rng);
        assert!((a.eval(&s1) - a.eval(&s2)).abs() < 1e-12);

        // nu = mu exactly: a == 1
        let mu = right_haar_measure(sig);
        let a2 = haar_reweight(&mu);
        assert!((a2.eval(&s1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_reweight_change_of_measure_p2() {
        // int |g(s s0)|^2 dnu = int |g(s s0) a(s)|^2 dmu within 3 se
        let sig = sig23();
        let nu = power_law_measure(sig);
        let mu = right_haar_measure(sig);
        let a = haar_reweight(&nu);
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let s0 = TriangularS::random(sig, 0.3, &mut rng);
        let g = |s: &TriangularS| (-0.5 * s.norm() * s.norm()).exp();
        let window = (1e-2, 8.0);
        let mut r1 = ChaCha8Rng::seed_from_u64(41);
        let (lhs, se1, _) = integrate_window(
            &nu,
            window,
            |s| g(&s.mul(&s0)).powi(2),
            60_000,
            &mut r1,
        );
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        let (rhs, se2, _) = integrate_window(
            &mu,
            window,
            |s| (g(&s.mul(&s0)) * a.eval(s)).powi(2),
            60_000,
            &mut r2,
        );
        assert!(
            (lhs - rhs).abs() < 3.0 * (se1 + se2),
            "lhs {lhs}+-{se1} rhs {rhs}+-{se2}"
        );
    }

    #[test]
    fn theorem9_reference_configuration_p1() {
        let sig = sig12();
        let nu = power_law_measure(sig);
        let f = WeightFunction::gaussian();
        let eps = SignVector::plus(1);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let elems = vec![IwasawaElement::random(sig, 0.3, &mut rng)];
        let rep =
            theorem9_conditions(&nu, &f, &eps, &elems, (1e-3, 10.0), 30_000, &mut rng).unwrap();
        assert!(
            (rep.i_slope - 1.0).abs() < 0.05,
            "slope {} should be 1 +- 0.05",
            rep.i_slope
        );
        for c in rep.ii_values.iter().chain(rep.iii_values.iter()) {
            assert!(c.estimate.is_finite());
            assert!(c.window_stable(3.0), "estimate not window-stable: {c:?}");
        }
    }

    #[test]
    fn theorem9_trivial_weight_condition_ii_zero() {
        let sig = sig12();
        let nu = power_law_measure(sig);
        let f = WeightFunction::new(|_| 1.0);
        let eps = SignVector::plus(1);
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let elems = vec![IwasawaElement::identity(sig)];
        let rep =
            theorem9_conditions(&nu, &f, &eps, &elems, (1e-2, 4.0), 5_000, &mut rng).unwrap();
        assert!(rep.ii_values[0].estimate.abs() < 1e-12);
    }
}
