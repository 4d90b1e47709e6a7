//! Step-function current groups over X = [0,1) with pointwise operations,
//! the vacuum matrix coefficient of the current representation over the
//! quasi-Poisson process, and the current-level formal cocycle algebra.
//!
//! Configurations are marked: every point of S carries a position x in X,
//! uniform and independent of the S-coordinate. A current acts on a marked
//! point through its value at the mark.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::group::GroupElement;
use crate::iwasawa::{
    iwasawa_decompose, k_conjugate, p_mul, IwasawaElement, TriangularS,
};
use crate::measures::radon_nikodym;
use crate::qpoisson::{sample_configuration, QPTriple};
use crate::Error;

/// Piecewise-constant map [0,1) -> V: values[i] on [breaks[i], breaks[i+1]),
/// the last piece extending to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct StepCurrent<V> {
    pub breaks: Vec<f64>,
    pub values: Vec<V>,
}

impl<V: Clone> StepCurrent<V> {
    pub fn new(breaks: Vec<f64>, values: Vec<V>) -> Result<Self, Error> {
        if breaks.len() != values.len() || breaks.is_empty() || breaks[0] != 0.0 {
            return Err(Error::InvalidInput {
                context: "step current needs matching breaks/values starting at 0".into(),
            });
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) || *breaks.last().unwrap() >= 1.0 {
            return Err(Error::InvalidInput {
                context: "breakpoints must increase strictly inside [0,1)".into(),
            });
        }
        Ok(StepCurrent { breaks, values })
    }

    pub fn constant(v: V) -> Self {
        StepCurrent {
            breaks: vec![0.0],
            values: vec![v],
        }
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    pub fn value_at(&self, x: f64) -> &V {
        let i = self.breaks.partition_point(|b| *b <= x);
        &self.values[i.saturating_sub(1)]
    }

    pub fn map<W: Clone>(&self, f: impl Fn(&V) -> W) -> StepCurrent<W> {
        StepCurrent {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn try_map<W: Clone>(
        &self,
        f: impl Fn(&V) -> Result<W, Error>,
    ) -> Result<StepCurrent<W>, Error> {
        Ok(StepCurrent {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    /// Combines two currents on the common refinement of their partitions.
    pub fn zip_with<W: Clone, U: Clone>(
        &self,
        other: &StepCurrent<W>,
        f: impl Fn(&V, &W) -> Result<U, Error>,
    ) -> Result<StepCurrent<U>, Error> {
        let mut breaks: Vec<f64> = self
            .breaks
            .iter()
            .chain(other.breaks.iter())
            .copied()
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let values = breaks
            .iter()
            .map(|x| f(self.value_at(*x), other.value_at(*x)))
            .collect::<Result<_, _>>()?;
        Ok(StepCurrent { breaks, values })
    }
}

pub fn current_mul(
    a: &StepCurrent<IwasawaElement>,
    b: &StepCurrent<IwasawaElement>,
) -> Result<StepCurrent<IwasawaElement>, Error> {
    a.zip_with(b, p_mul)
}

pub fn current_inv(a: &StepCurrent<IwasawaElement>) -> StepCurrent<IwasawaElement> {
    a.map(IwasawaElement::inverse)
}

pub fn group_current_mul(
    a: &StepCurrent<GroupElement>,
    b: &StepCurrent<GroupElement>,
) -> Result<StepCurrent<GroupElement>, Error> {
    a.zip_with(b, |x, y| {
        if x.sig != y.sig {
            return Err(Error::SignatureMismatch {
                p1: x.sig.p,
                q1: x.sig.q,
                p2: y.sig.p,
                q2: y.sig.q,
            });
        }
        Ok(x.mul(y))
    })
}

pub fn identity_current(sig: crate::group::Signature) -> StepCurrent<IwasawaElement> {
    StepCurrent::constant(IwasawaElement::identity(sig))
}

/// JSON form [{from, to, value-coordinates}, ...].
pub fn current_to_json(a: &StepCurrent<IwasawaElement>) -> serde_json::Value {
    let mut segs = Vec::new();
    for (i, v) in a.values.iter().enumerate() {
        let to = a.breaks.get(i + 1).copied().unwrap_or(1.0);
        let mat = |m: &crate::matrix::CMatrix| -> Vec<Vec<[f64; 2]>> {
            (0..m.rows())
                .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect()
        };
        segs.push(json!({
            "from": a.breaks[i],
            "to": to,
            "s": mat(&v.s.m),
            "n": mat(&v.h.n),
            "z": mat(&v.h.z),
        }));
    }
    serde_json::Value::Array(segs)
}

/// Configuration with a position mark per point.
#[derive(Clone, Debug)]
pub struct MarkedConfiguration {
    pub points: Vec<(TriangularS, f64)>,
    pub log_weight: f64,
}

pub fn sample_marked_configuration(
    triple: &QPTriple,
    rng: &mut impl Rng,
) -> Result<MarkedConfiguration, Error> {
    let cfg = sample_configuration(triple, rng)?;
    let points = cfg
        .points
        .into_iter()
        .map(|s| (s, rng.gen::<f64>()))
        .collect();
    Ok(MarkedConfiguration {
        points,
        log_weight: cfg.log_weight,
    })
}

/// Vacuum-to-vacuum matrix element of the current operator at a fixed
/// marked configuration: over the points (s, x),
///   prod  sqrt(dnu(s s0)/dnu(s)) * e^{-(|s s0|^2 - |s|^2)/2}
///         * exp(tr(eps s n s*) - |s z|^2/2)
/// with (s0, (n, z)) the current value at x. The S-part moves the fiber
/// argument (hence the measure and vacuum-rule ratios); the N-part acts in
/// the fiber, where the vacuum element is the spherical function.
pub fn pair_against_vacuum(
    g: &StepCurrent<IwasawaElement>,
    omega: &MarkedConfiguration,
    eps: &crate::measures::SignVector,
    nu: &crate::measures::MeasureOnS,
) -> Result<C64, Error> {
    let mut out = C64::new(1.0, 0.0);
    for (s, x) in &omega.points {
        let v = g.value_at(*x);
        let moved = s.mul(&v.s);
        let rn = radon_nikodym(nu, s, &v.s);
        let gauss = (-0.5 * (moved.norm().powi(2) - s.norm().powi(2))).exp();
        let sph = crate::bargmann::spherical_function(eps, s, v)?;
        out *= sph * (rn.sqrt() * gauss);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectationReport {
    pub value_re: f64,
    pub value_im: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Phi(g) = E[ e^{c_R - sum_x u(x)} * pair_against_vacuum(g, omega) ] over
/// the base Poisson law: the vacuum's own density e^{-sum u} times the
/// quasi-Poisson renormalization. Phi(id) = 1 in expectation, and Phi
/// factorizes over currents with disjoint supports.
pub fn expectation_functional(
    g: &StepCurrent<IwasawaElement>,
    triple: &QPTriple,
    eps: &crate::measures::SignVector,
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<ExpectationReport, Error> {
    let mut vals = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let omega = sample_marked_configuration(triple, rng)?;
        let pv = pair_against_vacuum(g, &omega, eps, &triple.nu)?;
        let usum: f64 = omega.points.iter().map(|(s, _)| triple.u(s)).sum();
        let v = pv * (omega.log_weight - usum).exp();
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite {
                context: "expectation functional sample".into(),
            });
        }
        vals.push(v);
    }
    let n = n_samples as f64;
    let mean = vals.iter().sum::<C64>() / n;
    let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    Ok(ExpectationReport {
        value_re: mean.re,
        value_im: mean.im,
        std_error: (var / n).sqrt(),
        n_samples,
    })
}

/// Formal combination of current-level cocycle generators b(p~).
#[derive(Clone, Debug)]
pub struct CurrentCocycleCombination {
    pub terms: Vec<(C64, StepCurrent<IwasawaElement>)>,
}

fn current_distance(a: &StepCurrent<IwasawaElement>, b: &StepCurrent<IwasawaElement>) -> f64 {
    // sup over the refinement of the pointwise element distance
    let joined = a
        .zip_with(b, |x, y| Ok((x.clone(), y.clone())))
        .expect("pairing cannot fail");
    joined
        .values
        .iter()
        .map(|(x, y)| x.distance(y))
        .fold(0.0, f64::max)
}

fn current_is_identity(a: &StepCurrent<IwasawaElement>, tol: f64) -> bool {
    a.values.iter().all(|v| v.is_identity(tol))
}

impl CurrentCocycleCombination {
    pub fn zero() -> Self {
        CurrentCocycleCombination { terms: Vec::new() }
    }

    pub fn single(p: StepCurrent<IwasawaElement>) -> Self {
        CurrentCocycleCombination {
            terms: vec![(C64::new(1.0, 0.0), p)],
        }
    }

    pub fn add(&self, other: &CurrentCocycleCombination) -> CurrentCocycleCombination {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        CurrentCocycleCombination { terms }.normalized()
    }

    pub fn scale(&self, lambda: C64) -> CurrentCocycleCombination {
        CurrentCocycleCombination {
            terms: self
                .terms
                .iter()
                .map(|(c, p)| (lambda * c, p.clone()))
                .collect(),
        }
    }

    pub fn normalized(&self) -> CurrentCocycleCombination {
        let tol = crate::cocycle::MERGE_TOL;
        let mut merged: Vec<(C64, StepCurrent<IwasawaElement>)> = Vec::new();
        for (c, p) in &self.terms {
            if current_is_identity(p, tol) {
                continue;
            }
            match merged
                .iter_mut()
                .find(|(_, q)| current_distance(q, p) < tol)
            {
                Some((cc, _)) => *cc += *c,
                None => merged.push((*c, p.clone())),
            }
        }
        merged.retain(|(c, _)| c.norm() > 1e-12);
        CurrentCocycleCombination { terms: merged }
    }

    pub fn is_zero(&self) -> bool {
        self.normalized().terms.is_empty()
    }
}

/// Cocycle rule at current level: lambda b(p~) -> lambda (b(g~ p~) - b(g~)).
pub fn act_current_iwasawa(
    g: &StepCurrent<IwasawaElement>,
    v: &CurrentCocycleCombination,
) -> Result<CurrentCocycleCombination, Error> {
    let mut terms = Vec::new();
    let mut total = C64::new(0.0, 0.0);
    for (c, p) in &v.terms {
        terms.push((*c, current_mul(g, p)?));
        total += *c;
    }
    terms.push((-total, g.clone()));
    Ok(CurrentCocycleCombination { terms }.normalized())
}

/// Pointwise compact relabeling on the common refinement.
pub fn act_current_compact(
    k: &StepCurrent<GroupElement>,
    v: &CurrentCocycleCombination,
) -> Result<CurrentCocycleCombination, Error> {
    let mut terms = Vec::new();
    for (c, p) in &v.terms {
        let moved = k.zip_with(p, |kk, pp| Ok(k_conjugate(kk, pp)?.0))?;
        terms.push((*c, moved));
    }
    Ok(CurrentCocycleCombination { terms }.normalized())
}

/// Pointwise Iwasawa factorization of the current, then the compact and
/// Iwasawa actions in turn.
pub fn act_current_group(
    g: &StepCurrent<GroupElement>,
    v: &CurrentCocycleCombination,
) -> Result<CurrentCocycleCombination, Error> {
    let pg = g.try_map(|x| Ok(iwasawa_decompose(x)?.0))?;
    let kg = g.try_map(|x| Ok(iwasawa_decompose(x)?.1))?;
    let moved = act_current_compact(&kg, v)?;
    act_current_iwasawa(&pg, &moved)
}

/// Extended cocycle at a group current: b applied to the P^X-part.
pub fn extended_current_cocycle(
    g: &StepCurrent<GroupElement>,
) -> Result<CurrentCocycleCombination, Error> {
    let pg = g.try_map(|x| Ok(iwasawa_decompose(x)?.0))?;
    Ok(CurrentCocycleCombination::single(pg).normalized())
}
