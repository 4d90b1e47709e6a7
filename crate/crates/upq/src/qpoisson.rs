//! Windowed quasi-Poisson point process on the triangular group S.
//!
//! The base process is Poisson with intensity nu restricted to the shell
//! delta <= |s| <= R; a configuration carries the renormalizing weight
//! exp(-sum_x u(x)), and the constant c_R = int_W (1 - e^{-u}) dnu makes
//! the weighted law a probability measure. For the power-law measure the
//! polar factorization is exact (log-uniform radius, uniform sphere patch
//! direction), so sampling needs no rejection in the radius.

use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::Serialize;

use crate::iwasawa::TriangularS;
use crate::measures::{radial_log_quadrature, MeasureKind, MeasureOnS};
use crate::Error;

/// Expected point counts above this abort sampling.
pub const POINT_CAP: f64 = 1e5;

type ExponentFn = Arc<dyn Fn(&TriangularS) -> f64 + Send + Sync>;

/// Intensity measure, observation window, and renormalizing exponent u.
#[derive(Clone)]
pub struct QPTriple {
    pub nu: MeasureOnS,
    pub window: (f64, f64),
    u: ExponentFn,
    c_r: Arc<OnceLock<f64>>,
}

impl QPTriple {
    pub fn new(
        nu: MeasureOnS,
        window: (f64, f64),
        u: impl Fn(&TriangularS) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, Error> {
        if !(window.0 > 0.0 && window.0 < window.1) {
            return Err(Error::InvalidInput {
                context: "window must satisfy 0 < delta < R".into(),
            });
        }
        Ok(QPTriple {
            nu,
            window,
            u: Arc::new(u),
            c_r: Arc::new(OnceLock::new()),
        })
    }

    pub fn u(&self, s: &TriangularS) -> f64 {
        (self.u)(s)
    }

    /// The normalizing constant c_R, cached after the first computation:
    /// quadrature for p = 1, internal-seed Monte Carlo otherwise.
    pub fn renormalization(&self) -> Result<f64, Error> {
        if let Some(v) = self.c_r.get() {
            return Ok(*v);
        }
        let id = TriangularS::identity(self.nu.sig);
        let v = if self.nu.sig.p == 1 {
            renormalization_quadrature(self, &id)?
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0C1);
            renormalization_mc(self, &id, 60_000, &mut rng)?.0
        };
        Ok(*self.c_r.get_or_init(|| v))
    }
}

/// Gamma(m/2) for integer m >= 1, by the half-integer recursion.
fn gamma_half(m: usize) -> f64 {
    if m == 1 {
        std::f64::consts::PI.sqrt()
    } else if m == 2 {
        1.0
    } else {
        (m as f64 / 2.0 - 1.0) * gamma_half(m - 2)
    }
}

/// Surface area of the unit sphere in R^m.
fn sphere_area(m: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(m as f64 / 2.0) / gamma_half(m)
}

/// Total mass of the power-law intensity on the window: the density
/// |s|^{-p^2} in p^2 real coordinates is r^{-1} dr times the uniform sphere
/// measure, and the positive-diagonal patch is the fraction 2^{-p}.
pub fn intensity_mass(triple: &QPTriple) -> Result<f64, Error> {
    if triple.nu.kind != MeasureKind::PowerLaw {
        return Err(Error::VariantMismatch {
            context: "exact intensity mass is available for the power-law measure".into(),
        });
    }
    let p = triple.nu.sig.p;
    let m = p * p;
    let (lo, hi) = triple.window;
    Ok(sphere_area(m) / 2f64.powi(p as i32) * (hi / lo).ln())
}

/// One exact draw from the normalized power-law intensity on the window.
pub fn sample_point(triple: &QPTriple, rng: &mut impl Rng) -> TriangularS {
    let sig = triple.nu.sig;
    let p = sig.p;
    let m = p * p;
    let (lo, hi) = triple.window;
    let r = lo * (hi / lo).powf(rng.gen::<f64>());
    // uniform direction on the sphere patch with positive diagonal part
    loop {
        let mut v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        for x in v.iter_mut() {
            *x *= r / norm;
        }
        // reflecting the diagonal coordinates keeps the sphere measure
        for x in v.iter_mut().take(p) {
            *x = x.abs();
        }
        if v.iter().take(p).all(|x| *x > 0.0) {
            return TriangularS::from_coords(sig, &v);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Configuration {
    pub points: Vec<TriangularS>,
    /// the renormalizing constant c_R; the quasi-Poisson measure is
    /// e^{c_R} times the law of the base Poisson process
    pub log_weight: f64,
}

pub fn sample_configuration(
    triple: &QPTriple,
    rng: &mut impl Rng,
) -> Result<Configuration, Error> {
    sample_configuration_capped(triple, POINT_CAP, rng)
}

pub fn sample_configuration_capped(
    triple: &QPTriple,
    cap: f64,
    rng: &mut impl Rng,
) -> Result<Configuration, Error> {
    let mass = intensity_mass(triple)?;
    if mass > cap {
        return Err(Error::WindowTooLarge {
            expected: mass,
            cap,
        });
    }
    let c_r = triple.renormalization()?;
    let count = Poisson::new(mass)
        .map_err(|_| Error::InvalidInput {
            context: "invalid Poisson intensity".into(),
        })?
        .sample(rng) as usize;
    let points: Vec<TriangularS> = (0..count).map(|_| sample_point(triple, rng)).collect();
    Ok(Configuration {
        points,
        log_weight: c_r,
    })
}

/// Right translation of every point of a configuration; the weight is left
/// untouched and must be recomputed against the new exponent if needed.
pub fn translate_configuration(config: &Configuration, s0: &TriangularS) -> Configuration {
    Configuration {
        points: config.points.iter().map(|s| s.mul(s0)).collect(),
        log_weight: config.log_weight,
    }
}

/// Monte Carlo estimate of c_R = int_W (1 - e^{-u(s s0)}) dnu for the
/// translated exponent (s0 = identity gives the plain constant).
pub fn renormalization_mc(
    triple: &QPTriple,
    s0: &TriangularS,
    n_points: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64), Error> {
    let mass = intensity_mass(triple)?;
    let vals: Vec<f64> = (0..n_points)
        .map(|_| {
            let s = sample_point(triple, rng);
            1.0 - (-triple.u(&s.mul(s0))).exp()
        })
        .collect();
    let n = n_points as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mass * mean, mass * (var / n).sqrt()))
}

/// Deterministic c_R for p = 1, where points are positive scalars and the
/// intensity is dr/r on the window.
pub fn renormalization_quadrature(triple: &QPTriple, s0: &TriangularS) -> Result<f64, Error> {
    let sig = triple.nu.sig;
    if sig.p != 1 || triple.nu.kind != MeasureKind::PowerLaw {
        return Err(Error::VariantMismatch {
            context: "quadrature renormalization requires p = 1 and the power-law measure".into(),
        });
    }
    let (lo, hi) = triple.window;
    Ok(radial_log_quadrature(
        lo,
        hi,
        |r| {
            let s = TriangularS::from_coords(sig, &[r]);
            1.0 - (-triple.u(&s.mul(s0))).exp()
        },
        600,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacteristicReport {
    pub mc_value: f64,
    pub mc_std_error: f64,
    pub closed_form: f64,
    pub renormalization: f64,
    pub n_configs: usize,
}

/// Compares the sampled Laplace functional of the quasi-Poisson measure,
///   e^{c_R} E[ exp(-sum_x f(x)) ],
/// against the closed form exp(int_W (e^{-f} - e^{-u}) dnu).
pub fn characteristic_functional_check(
    triple: &QPTriple,
    f: impl Fn(&TriangularS) -> f64,
    n_configs: usize,
    n_quad_points: usize,
    rng: &mut impl Rng,
) -> Result<CharacteristicReport, Error> {
    let mass = intensity_mass(triple)?;
    let c_r = triple.renormalization()?;

    // closed form exponent by point Monte Carlo against the normalized
    // intensity (deterministic for p = 1)
    let exponent = if triple.nu.sig.p == 1 {
        let (lo, hi) = triple.window;
        radial_log_quadrature(
            lo,
            hi,
            |r| {
                let s = TriangularS::from_coords(triple.nu.sig, &[r]);
                (-f(&s)).exp() - (-triple.u(&s)).exp()
            },
            600,
        )
    } else {
        let vals: Vec<f64> = (0..n_quad_points)
            .map(|_| {
                let s = sample_point(triple, rng);
                (-f(&s)).exp() - (-triple.u(&s)).exp()
            })
            .collect();
        mass * vals.iter().sum::<f64>() / n_quad_points as f64
    };
    let closed_form = exponent.exp();

    let samples: Vec<f64> = (0..n_configs)
        .map(|_| -> Result<f64, Error> {
            let cfg = sample_configuration(triple, rng)?;
            let fsum: f64 = cfg.points.iter().map(&f).sum();
            Ok((cfg.log_weight - fsum).exp())
        })
        .collect::<Result<_, _>>()?;
    let n = n_configs as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(CharacteristicReport {
        mc_value: mean,
        mc_std_error: (var / n).sqrt(),
        closed_form,
        renormalization: c_r,
        n_configs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiInvarianceReport {
    /// density ratio exp(c_R - c~_R) from the Monte Carlo estimate of c~_R
    pub j2_mc: f64,
    pub j2_mc_std_error: f64,
    /// independent estimate (quadrature for p = 1, fresh samples otherwise)
    pub j2_reference: f64,
}

/// Translation s -> s s0 changes the renormalizing constant from c_R to
/// c~_R = int_W (1 - e^{-u(s s0)}) dnu; the ratio of the two normalizations
/// exp(c_R - c~_R) is the translated-to-original density factor coming from
/// the weight. Estimates it two ways and reports both.
pub fn quasi_invariance_estimate(
    triple: &QPTriple,
    s0: &TriangularS,
    n_points: usize,
    rng: &mut impl Rng,
) -> Result<QuasiInvarianceReport, Error> {
    let id = TriangularS::identity(triple.nu.sig);
    let (c_r, c_r_se) = renormalization_mc(triple, &id, n_points, rng)?;
    let (c_t, c_t_se) = renormalization_mc(triple, s0, n_points, rng)?;
    let j2_mc = (c_r - c_t).exp();
    let j2_se = j2_mc * (c_r_se.hypot(c_t_se));
    let j2_reference = if triple.nu.sig.p == 1 {
        (renormalization_quadrature(triple, &id)? - renormalization_quadrature(triple, s0)?).exp()
    } else {
        let (a, _) = renormalization_mc(triple, &id, n_points, rng)?;
        let (b, _) = renormalization_mc(triple, s0, n_points, rng)?;
        (a - b).exp()
    };
    Ok(QuasiInvarianceReport {
        j2_mc,
        j2_mc_std_error: j2_se,
        j2_reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Signature;
    use crate::measures::power_law_measure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triple12() -> QPTriple {
        let sig = Signature::new(1, 2).unwrap();
        QPTriple::new(power_law_measure(sig), (1e-3, 10.0), |s: &TriangularS| {
            let r = s.norm();
            r * r / (1.0 + r * r)
        })
        .unwrap()
    }

    #[test]
    fn sphere_area_small_dims() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-12);
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        let pi = std::f64::consts::PI;
        assert!((sphere_area(4) - 2.0 * pi * pi).abs() < 1e-12);
    }

    #[test]
    fn intensity_mass_p1_is_log_window() {
        let t = triple12();
        let mass = intensity_mass(&t).unwrap();
        assert!((mass - (10.0f64 / 1e-3).ln()).abs() < 1e-12);
    }

    #[test]
    fn window_cap_enforced() {
        let t = triple12();
        match sample_configuration_capped(&t, 2.0, &mut ChaCha8Rng::seed_from_u64(80)) {
            Err(Error::WindowTooLarge { expected, cap }) => {
                assert!(expected > cap);
            }
            other => panic!("expected WindowTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn sampled_points_lie_in_window_with_positive_diagonal() {
        let sig = Signature::new(2, 3).unwrap();
        let t = QPTriple::new(power_law_measure(sig), (1e-2, 5.0), |_| 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for _ in 0..2000 {
            let s = sample_point(&t, &mut rng);
            let r = s.norm();
            assert!(r >= 1e-2 && r <= 5.0);
            for i in 0..2 {
                assert!(s.m[(i, i)].re > 0.0);
            }
        }
    }

    #[test]
    fn point_count_matches_intensity_mass() {
        let t = triple12();
        let mass = intensity_mass(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let n = 3000;
        let mut total = 0usize;
        for _ in 0..n {
            total += sample_configuration(&t, &mut rng).unwrap().points.len();
        }
        let mean = total as f64 / n as f64;
        // Poisson mean has sd sqrt(mass / n)
        let se = (mass / n as f64).sqrt();
        assert!((mean - mass).abs() < 4.0 * se, "mean {mean} vs mass {mass}");
    }

    #[test]
    fn radial_law_of_points_is_log_uniform() {
        let t = triple12();
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let n = 40_000;
        // median of log r should sit at the geometric midpoint of the window
        let mut logs: Vec<f64> = (0..n)
            .map(|_| sample_point(&t, &mut rng).norm().ln())
            .collect();
        logs.sort_by(f64::total_cmp);
        let median = logs[n / 2];
        let expect = 0.5 * ((1e-3f64).ln() + 10f64.ln());
        let spread = (10f64 / 1e-3).ln();
        assert!((median - expect).abs() < 0.02 * spread);
    }

    #[test]
    fn renormalization_mc_matches_quadrature() {
        let t = triple12();
        let id = TriangularS::identity(t.nu.sig);
        let mut rng = ChaCha8Rng::seed_from_u64(84);
        let (mc, se) = renormalization_mc(&t, &id, 60_000, &mut rng).unwrap();
        let quad = renormalization_quadrature(&t, &id).unwrap();
        assert!((mc - quad).abs() < 3.0 * se, "mc {mc}+-{se} quad {quad}");
    }

    #[test]
    fn characteristic_functional_closed_form() {
        let t = triple12();
        let f = |s: &TriangularS| {
            let r = s.norm();
            0.5 * r * r / (1.0 + r * r)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        let rep = characteristic_functional_check(&t, f, 4000, 40_000, &mut rng).unwrap();
        assert!(
            (rep.mc_value - rep.closed_form).abs() < 3.0 * rep.mc_std_error,
            "mc {}+-{} closed {}",
            rep.mc_value,
            rep.mc_std_error,
            rep.closed_form
        );
    }

    #[test]
    fn characteristic_functional_trivial_f() {
        // f = 0: both sides are the total quasi-Poisson mass e^{c_R},
        // and the sampled side has zero variance
        let t = triple12();
        let mut rng = ChaCha8Rng::seed_from_u64(86);
        let rep = characteristic_functional_check(&t, |_| 0.0, 200, 0, &mut rng).unwrap();
        assert!((rep.closed_form - rep.renormalization.exp()).abs() < 1e-9);
        assert!((rep.mc_value - rep.closed_form).abs() < 1e-9);
        assert!(rep.mc_std_error < 1e-12);
    }

    #[test]
    fn u_zero_reduces_to_classical_poisson() {
        let sig = Signature::new(1, 2).unwrap();
        let t = QPTriple::new(power_law_measure(sig), (1e-2, 10.0), |_| 0.0).unwrap();
        assert!(t.renormalization().unwrap().abs() < 1e-12);
        let mass = intensity_mass(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(108);
        let n = 20_000;
        let sub = (0.1, 1.0); // subshell: void probability e^{-ln 10}
        let sub_mass = (sub.1 / sub.0 as f64).ln();
        let mut void = 0usize;
        let mut counts = Vec::with_capacity(n);
        for _ in 0..n {
            let cfg = sample_configuration(&t, &mut rng).unwrap();
            counts.push(cfg.points.len() as f64);
            if !cfg
                .points
                .iter()
                .any(|s| s.norm() >= sub.0 && s.norm() <= sub.1)
            {
                void += 1;
            }
        }
        let nf = n as f64;
        let void_rate = void as f64 / nf;
        let void_expect = (-sub_mass).exp();
        let void_se = (void_expect * (1.0 - void_expect) / nf).sqrt();
        assert!(
            (void_rate - void_expect).abs() < 4.0 * void_se,
            "void {void_rate} vs {void_expect}"
        );
        let mean = counts.iter().sum::<f64>() / nf;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (nf - 1.0);
        assert!((mean - mass).abs() < 4.0 * (mass / nf).sqrt());
        // Poisson: variance equals the mean
        assert!((var - mass).abs() < 0.1 * mass, "var {var} vs mass {mass}");
    }

    #[test]
    fn quasi_invariance_identity_translation() {
        let t = triple12();
        let id = TriangularS::identity(t.nu.sig);
        let mut rng = ChaCha8Rng::seed_from_u64(87);
        let rep = quasi_invariance_estimate(&t, &id, 20_000, &mut rng).unwrap();
        assert!((rep.j2_reference - 1.0).abs() < 1e-10);
        assert!((rep.j2_mc - 1.0).abs() < 3.0 * rep.j2_mc_std_error.max(1e-6));
    }

    #[test]
    fn quasi_invariance_scaling_translation() {
        let t = triple12();
        let sig = t.nu.sig;
        let s0 = TriangularS::from_coords(sig, &[1.7]);
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let rep = quasi_invariance_estimate(&t, &s0, 60_000, &mut rng).unwrap();
        assert!(
            (rep.j2_mc - rep.j2_reference).abs() < 3.0 * rep.j2_mc_std_error.max(1e-6),
            "mc {}vs ref {} (se {})",
            rep.j2_mc,
            rep.j2_reference,
            rep.j2_mc_std_error
        );
        // the translated exponent genuinely differs
        assert!((rep.j2_reference - 1.0).abs() > 1e-3);
    }

    #[test]
    fn translate_configuration_moves_points() {
        let t = triple12();
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let cfg = loop {
            let c = sample_configuration(&t, &mut rng).unwrap();
            if !c.points.is_empty() {
                break c;
            }
        };
        let s0 = TriangularS::from_coords(t.nu.sig, &[2.0]);
        let moved = translate_configuration(&cfg, &s0);
        for (a, b) in cfg.points.iter().zip(&moved.points) {
            assert!((b.norm() - 2.0 * a.norm()).abs() < 1e-12);
        }
    }
}
