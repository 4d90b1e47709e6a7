//! Batch verification suites with JSON/CSV reporting.
//!
//! Every check draws its randomness from a ChaCha stream seeded by the run
//! seed plus a per-check offset, so a fixed config reproduces reports byte
//! for byte.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bargmann::{
    commutant_scan, creation_annihilation, rep_operator, vacuum_functional_check,
    BargmannVector, MultiIndexBasis,
};
use crate::cocycle::{
    act_compact, act_group, cocycle_fiber, extended_cocycle, injectivity_evidence,
    CocycleCombination,
};
use crate::current::{
    current_mul, expectation_functional, identity_current, StepCurrent,
};
use crate::group::{
    involution_w, is_member, lie_algebra_dimension, random_compact, AlgebraPattern,
    GroupElement, Signature, MEMBERSHIP_TOL,
};
use crate::iwasawa::{embed, heis_mul, iwasawa_decompose, p_mul, IwasawaElement, TriangularS};
use crate::matrix::CMatrix;
use crate::measures::{
    orbit_separation, power_law_measure, theorem9_conditions, SignVector, WeightFunction,
};
use crate::qpoisson::{
    characteristic_functional_check, quasi_invariance_estimate, sample_configuration, QPTriple,
};
use crate::Error;

pub const SUITES: [&str; 7] = [
    "group", "iwasawa", "bargmann", "special", "extension", "qp", "currents",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: usize,
    pub q: usize,
    pub eps: Vec<i8>,
    pub degree: usize,
    pub seed: u64,
    pub samples: usize,
    pub window_min: f64,
    pub window_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 1,
            q: 2,
            eps: vec![1],
            degree: 10,
            seed: 42,
            samples: 20_000,
            window_min: 1e-3,
            window_max: 10.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.p < 1 || self.q < self.p {
            return Err(Error::ConfigInvalid {
                context: format!("signature ({}, {}) needs q >= p >= 1", self.p, self.q),
            });
        }
        if self.degree < 4 {
            return Err(Error::ConfigInvalid {
                context: "truncation degree must be at least 4".into(),
            });
        }
        if self.eps.len() != self.p || self.eps.iter().any(|e| *e != 1 && *e != -1) {
            return Err(Error::ConfigInvalid {
                context: "sign vector must have one +-1 entry per row".into(),
            });
        }
        if !(self.window_min > 0.0 && self.window_min < self.window_max) {
            return Err(Error::ConfigInvalid {
                context: "window must satisfy 0 < min < max".into(),
            });
        }
        Ok(())
    }

    pub fn sig(&self) -> Result<Signature, Error> {
        Signature::new(self.p, self.q)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.window_min, self.window_max)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9).wrapping_add(salt))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub check: String,
    pub window: (f64, f64),
    pub estimate: f64,
    pub std_error: f64,
    pub tolerance: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub verdict: String,
}

impl ReportRow {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub rows: Vec<ReportRow>,
    pub passed: bool,
}

impl SuiteReport {
    fn from_rows(suite: &str, rows: Vec<ReportRow>) -> Self {
        let passed = rows.iter().all(ReportRow::passed);
        SuiteReport {
            suite: suite.to_string(),
            rows,
            passed,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6e},{:.3e},{:.3e},{},{}\n",
                self.suite, r.check, r.estimate, r.std_error, r.tolerance, r.n_samples, r.verdict
            ));
        }
        out
    }
}

struct Rower {
    cfg: RunConfig,
    rows: Vec<ReportRow>,
}

impl Rower {
    fn new(cfg: &RunConfig) -> Self {
        Rower {
            cfg: cfg.clone(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, check: &str, estimate: f64, std_error: f64, tolerance: f64, n: usize, ok: bool) {
        self.rows.push(ReportRow {
            check: check.to_string(),
            window: self.cfg.window(),
            estimate,
            std_error,
            tolerance,
            n_samples: n,
            seed: self.cfg.seed,
            verdict: if ok { "pass" } else { "fail" }.to_string(),
        });
    }

    /// estimate must stay below the tolerance
    fn bound(&mut self, check: &str, estimate: f64, tolerance: f64, n: usize) {
        self.push(check, estimate, 0.0, tolerance, n, estimate <= tolerance);
    }

    /// estimate must equal expected exactly (integer-valued checks)
    fn exact(&mut self, check: &str, estimate: f64, expected: f64, n: usize) {
        self.push(check, estimate, 0.0, 0.0, n, estimate == expected);
    }
}

fn random_group_element(sig: Signature, scale: f64, rng: &mut ChaCha8Rng) -> GroupElement {
    embed(&IwasawaElement::random(sig, scale, rng)).mul(&random_compact(sig, rng))
}

pub fn run_group_suite(cfg: &RunConfig) -> Result<SuiteReport, Error> {
    let mut out = Rower::new(cfg);

    for p in 1..=3usize {
        for q in p..=3usize {
            let sig = Signature::new(p, q)?;
            let cases = [
                (AlgebraPattern::Full, (p + q) * (p + q), "dim_full"),
                (AlgebraPattern::Heisenberg, p * (2 * q - p), "dim_heisenberg"),
                (AlgebraPattern::Iwasawa, 2 * p * q, "dim_iwasawa"),
                (AlgebraPattern::Compact, p * p + q * q, "dim_compact"),
            ];
            for (pattern, expect, name) in cases {
                let dim = lie_algebra_dimension(sig, pattern);
                out.exact(&format!("{name}_{p}{q}"), dim as f64, expect as f64, 1);
            }
        }
    }

    // closure under products and inverses
    let mut worst = 0.0f64;
    let mut n = 0usize;
    for p in 1..=3usize {
        for q in p..=3usize {
            let sig = Signature::new(p, q)?;
            let mut rng = cfg.rng(1000 + (10 * p + q) as u64);
            for _ in 0..170 {
                let a = random_group_element(sig, 0.3, &mut rng);
                let b = random_group_element(sig, 0.3, &mut rng);
                let prod = a.mul(&b);
                let inv = prod.inverse();
                for g in [&prod, &inv, &prod.mul(&inv)] {
                    let (ok, _) = is_member(&g.m, sig, MEMBERSHIP_TOL)?;
                    worst = worst.max(g.residual());
                    n += 1;
                    if !ok {
                        worst = worst.max(1.0);
                    }
                }
            }
        }
    }
    out.bound("closure_residual", worst, MEMBERSHIP_TOL, n);

    // the involution is a member and squares to the identity
    let mut winv = 0.0f64;
    for p in 1..=3usize {
        for q in p..=3usize {
            let sig = Signature::new(p, q)?;
            let w = involution_w(sig);
            let (ok, _) = is_member(&w.m, sig, MEMBERSHIP_TOL)?;
            let sq = w.mul(&w);
            let dev = sq
                .m
                .sub(&CMatrix::identity(p + q))
                .frobenius_norm();
            winv = winv.max(dev);
            if !ok {
                winv = winv.max(1.0);
            }
        }
    }
    out.bound("involution_order_two", winv, 1e-14, 6);

    Ok(SuiteReport::from_rows("group", out.rows))
}

pub fn run_iwasawa_suite(cfg: &RunConfig) -> Result<SuiteReport, Error> {
    let mut out = Rower::new(cfg);
    let sigs = [
        Signature::new(1, 2)?,
        Signature::new(2, 2)?,
        Signature::new(2, 3)?,
    ];

    // decomposition round trip, entrywise
    let mut worst = 0.0f64;
    for (i, sig) in sigs.iter().enumerate() {
        let mut rng = cfg.rng(2000 + i as u64);
        for _ in 0..170 {
            let g = random_group_element(*sig, 0.3, &mut rng);
            let (p, k) = iwasawa_decompose(&g)?;
            let back = embed(&p).mul(&k);
            worst = worst.max(back.m.sub(&g.m).max_abs());
        }
    }
    out.bound("decompose_round_trip", worst, 1e-8, 510);

    // decomposition is a deterministic function of its input
    {
        let mut rng = cfg.rng(2100);
        let g = random_group_element(sigs[0], 0.4, &mut rng);
        let (p1, k1) = iwasawa_decompose(&g)?;
        let (p2, k2) = iwasawa_decompose(&g)?;
        let same = p1.s.m == p2.s.m && p1.h.n == p2.h.n && p1.h.z == p2.h.z && k1.m == k2.m;
        out.exact("decompose_deterministic", same as u64 as f64, 1.0, 2);
    }

    // Heisenberg associativity and central commutators
    let mut assoc = 0.0f64;
    let mut central = 0.0f64;
    for (i, sig) in sigs.iter().enumerate() {
        let mut rng = cfg.rng(2200 + i as u64);
        for _ in 0..340 {
            let h1 = crate::iwasawa::HeisenbergElement::random(*sig, 0.6, &mut rng);
            let h2 = crate::iwasawa::HeisenbergElement::random(*sig, 0.6, &mut rng);
            let h3 = crate::iwasawa::HeisenbergElement::random(*sig, 0.6, &mut rng);
            let l = heis_mul(&heis_mul(&h1, &h2)?, &h3)?;
            let r = heis_mul(&h1, &heis_mul(&h2, &h3)?)?;
            assoc = assoc
                .max(l.n.sub(&r.n).max_abs())
                .max(l.z.sub(&r.z).max_abs());
            // the group commutator lands in the center: z-part vanishes
            let c = heis_mul(
                &heis_mul(&h1, &h2)?,
                &heis_mul(&h1.inverse(), &h2.inverse())?,
            )?;
            central = central.max(c.z.max_abs());
        }
    }
    out.bound("heisenberg_associativity", assoc, 1e-11, 1020);
    out.bound("heisenberg_central_commutator", central, 1e-12, 1020);

    // the embedding turns the semidirect product into matrix multiplication
    let mut hom = 0.0f64;
    for (i, sig) in sigs.iter().enumerate() {
        let mut rng = cfg.rng(2300 + i as u64);
        for _ in 0..100 {
            let a = IwasawaElement::random(*sig, 0.4, &mut rng);
            let b = IwasawaElement::random(*sig, 0.4, &mut rng);
            let lhs = embed(&p_mul(&a, &b)?);
            let rhs = embed(&a).mul(&embed(&b));
            let rel = lhs.m.sub(&rhs.m).frobenius_norm() / rhs.m.frobenius_norm();
            hom = hom.max(rel);
        }
    }
    out.bound("embedding_homomorphism", hom, 1e-10, 300);

    Ok(SuiteReport::from_rows("iwasawa", out.rows))
}

pub fn run_bargmann_suite(cfg: &RunConfig) -> Result<SuiteReport, Error> {
    let mut out = Rower::new(cfg);
    let sig = Signature::new(1, 2)?;
    let eps = SignVector::plus(1);

    // vacuum matrix element against Gaussian quadrature at D = 12
    {
        let basis = MultiIndexBasis::new(sig, 12);
        let mut rng = cfg.rng(3000);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let s = TriangularS::identity(sig);
            let n = CMatrix::from_fn(1, 1, |_, _| C64::new(0.0, 0.6 * rng.gen::<f64>() - 0.3));
            let z = CMatrix::from_fn(1, 1, |_, _| {
                C64::new(0.6 * rng.gen::<f64>() - 0.3, 0.6 * rng.gen::<f64>() - 0.3)
            });
            let h = crate::iwasawa::HeisenbergElement::new(sig, n, z)?;
            let elem = IwasawaElement::from_h(h);
            let op = rep_operator(&eps, &s, &elem, &basis)?;
            let image = BargmannVector {
                basis: basis.clone(),
                coeffs: op.m.apply(&BargmannVector::vacuum(basis.clone()).coeffs),
            };
            let (quad, _) = vacuum_functional_check(&eps, &image, 16)?;
            let sph = crate::bargmann::spherical_function(&eps, &s, &elem)?;
            worst = worst.max((quad - sph).norm());
        }
        out.bound("spherical_function_identity", worst, 1e-6, 20);
    }

    // canonical commutation relation, exact on the interior block
    {
        let basis = MultiIndexBasis::new(sig, cfg.degree.max(6));
        let (up, down) = creation_annihilation(&basis, 0, 0);
        let comm = down.m.mul(&up.m).sub(&up.m.mul(&down.m));
        let d = basis.block_len(basis.max_degree - 1);
        let mut dev = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let expect = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((comm[(r, c)] - C64::new(expect, 0.0)).norm());
            }
        }
        out.bound("canonical_commutation", dev, 1e-12, d * d);
    }

    // the truncated group-law residual shrinks as the degree cap grows
    {
        let mut rng = cfg.rng(3100);
        let s = TriangularS::random(sig, 0.3, &mut rng);
        let h1 = crate::iwasawa::HeisenbergElement::random(sig, 0.5, &mut rng);
        let h2 = crate::iwasawa::HeisenbergElement::random(sig, 0.5, &mut rng);
        let h12 = heis_mul(&h1, &h2)?;
        let residual = |d: usize| -> Result<f64, Error> {
            let basis = MultiIndexBasis::new(sig, d);
            let t1 = rep_operator(&eps, &s, &IwasawaElement::from_h(h1.clone()), &basis)?;
            let t2 = rep_operator(&eps, &s, &IwasawaElement::from_h(h2.clone()), &basis)?;
            let t12 = rep_operator(&eps, &s, &IwasawaElement::from_h(h12.clone()), &basis)?;
            let prod = t1.compose(&t2);
            let blk = basis.block_len(4);
            let mut err = 0.0f64;
            for r in 0..blk {
                for c in 0..blk {
                    err = err.max((prod.m[(r, c)] - t12.m[(r, c)]).norm());
                }
            }
            Ok(err)
        };
        let vals = [residual(6)?, residual(8)?, residual(10)?, residual(12)?];
        let monotone = vals.windows(2).all(|w| w[1] < w[0]);
        out.push(
            "group_law_residual_decreasing",
            vals[3],
            0.0,
            vals[0],
            4,
            monotone,
        );
    }

    // commutant of the operator family is scalar
    {
        let basis = MultiIndexBasis::new(sig, 8);
        let mut rng = cfg.rng(3200);
        let s = TriangularS::identity(sig);
        let fam: Vec<_> = (0..6)
            .map(|_| {
                let h = crate::iwasawa::HeisenbergElement::random(sig, 0.7, &mut rng);
                rep_operator(&eps, &s, &IwasawaElement::from_h(h), &basis)
            })
            .collect::<Result<_, _>>()?;
        let dim = commutant_scan(&fam, 4, 1e-6)?;
        out.exact("commutant_dimension", dim as f64, 1.0, 6);
    }

    Ok(SuiteReport::from_rows("bargmann", out.rows))
}

pub fn run_special_suite(cfg: &RunConfig) -> Result<SuiteReport, Error> {
    let mut out = Rower::new(cfg);
    let sig = Signature::new(1, 2)?;
    let nu = power_law_measure(sig);
    let f = WeightFunction::gaussian();
    let eps = SignVector::plus(1);
    let mut rng = cfg.rng(4000);
    let elems: Vec<IwasawaElement> = (0..3)
        .map(|_| IwasawaElement::random(sig, 0.3, &mut rng))
        .collect();
    let rep = theorem9_conditions(
        &nu,
        &f,
        &eps,
        &elems,
        cfg.window(),
        cfg.samples,
        &mut rng,
    )?;
    out.push(
        "condition_i_growth_slope",
        rep.i_slope,
        0.0,
        0.05,
        rep.i_points.len(),
        (rep.i_slope - 1.0).abs() <= 0.05,
    );
    let mut stable = true;
    let mut finite = true;
    for c in rep.ii_values.iter().chain(rep.iii_values.iter()) {
        stable &= c.window_stable(3.0);
        finite &= c.estimate.is_finite() && c.estimate_2r.is_finite();
    }
    out.push(
        "conditions_ii_iii_window_stable",
        rep.ii_values[0].estimate,
        rep.ii_values[0].std_error,
        3.0,
        cfg.samples,
        stable && finite,
    );

    // distinct sign vectors are separated by characters on sampled orbits
    {
        let sig2 = Signature::new(2, 3)?;
        let mut rng = cfg.rng(4100);
        let samples: Vec<_> = (0..50)
            .map(|_| {
                let s = TriangularS::random(sig2, 0.5, &mut rng);
                let h = crate::iwasawa::HeisenbergElement::random(sig2, 0.5, &mut rng);
                (s, h.n)
            })
            .collect();
        let epp = SignVector::new(vec![1, 1])?;
        let epm = SignVector::new(vec![1, -1])?;
        let sep = orbit_separation(&epp, &epm, &samples)?;
        out.exact("sign_orbit_separation", sep as u64 as f64, 1.0, 50);
    }

    Ok(SuiteReport::from_rows("special", out.rows))
}

pub fn run_extension_suite(cfg: &RunConfig) -> Result<SuiteReport, Error> {
    let mut out = Rower::new(cfg);
    let sig = Signature::new(1, 2)?;
    let eps = SignVector::plus(1);

    // cocycle identity, evaluated in the fibers; the truncation degree is
    // floored so the residual sits well below the pinned bound
    {
        let basis = MultiIndexBasis::new(sig, cfg.degree.max(18));
        let mut rng = cfg.rng(5000);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let p1 = IwasawaElement::random(sig, 0.2, &mut rng);
            let p2 = IwasawaElement::random(sig, 0.2, &mut rng);
            let p12 = p_mul(&p1, &p2)?;
            for _ in 0..100 {
                let s = TriangularS::random(sig, 0.3, &mut rng);
                let lhs = cocycle_fiber(&p12, &s, &eps, &basis)?;
                let moved = s.mul(&p1.s);
                let b2 = cocycle_fiber(&p2, &moved, &eps, &basis)?;
                let op1 = rep_operator(&eps, &s, &p1, &basis)?;
                let b1 = cocycle_fiber(&p1, &s, &eps, &basis)?;
                let image = op1.m.apply(&b2.coeffs);
                let err: f64 = lhs
                    .coeffs
                    .iter()
                    .zip(image.iter().zip(&b1.coeffs))
                    .map(|(l, (t, b))| (l - (t + b)).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(err);
            }
        }
        out.bound("cocycle_identity_fiber", worst, 1e-6, 5000);
    }

    // the extended action is a homomorphism, exactly at generator level
    for (salt, sig_h) in [(5100u64, Signature::new(1, 2)?), (5200, Signature::new(2, 2)?)] {
        let mut rng = cfg.rng(salt);
        let mut ok = true;
        for _ in 0..50 {
            let g1 = random_group_element(sig_h, 0.3, &mut rng);
            let g2 = random_group_element(sig_h, 0.3, &mut rng);
            let v = CocycleCombination::single(IwasawaElement::random(sig_h, 0.3, &mut rng));
            let seq = act_group(&g1, &act_group(&g2, &v)?)?;
            let joint = act_group(&g1.mul(&g2), &v)?;
            ok &= seq.add(&joint.scale(C64::new(-1.0, 0.0))).is_zero();
        }
        out.exact(
            &format!("extension_homomorphism_{}{}", sig_h.p, sig_h.q),
            ok as u64 as f64,
            1.0,
            50,
        );
    }

    // the extended cocycle vanishes on the compact subgroup
    {
        let mut rng = cfg.rng(5300);
        let mut ok = true;
        for _ in 0..20 {
            let k = random_compact(sig, &mut rng);
            ok &= extended_cocycle(&k)?.is_zero();
            let v = CocycleCombination::single(IwasawaElement::random(sig, 0.3, &mut rng));
            // and compact elements only relabel generators
            ok &= act_compact(&k, &v)?.terms.len() == 1;
        }
        out.exact("cocycle_vanishes_on_compact", ok as u64 as f64, 1.0, 20);
    }

    // linear independence of five cocycle sections
    {
        let nu = power_law_measure(sig);
        let basis = MultiIndexBasis::new(sig, 8);
        let mut rng = cfg.rng(5400);
        let elems: Vec<_> = (0..5)
            .map(|_| IwasawaElement::random(sig, 0.4, &mut rng))
            .collect();
        let rep = injectivity_evidence(
            &elems,
            &eps,
            &basis,
            &nu,
            cfg.window(),
            cfg.samples,
            8,
            &mut rng,
        )?;
        out.push(
            "gram_min_eigenvalue_positive",
            rep.gram_min_eigenvalue,
            rep.min_eigenvalue_std_error,
            3.0,
            cfg.samples,
            rep.gram_min_eigenvalue > 3.0 * rep.min_eigenvalue_std_error,
        );
    }

    Ok(SuiteReport::from_rows("extension", out.rows))
}

pub fn run_qp_suite(cfg: &RunConfig) -> Result<SuiteReport, Error> {
    let mut out = Rower::new(cfg);
    let sig = Signature::new(1, 2)?;
    let nu = power_law_measure(sig);
    let triple = QPTriple::new(nu.clone(), cfg.window(), |s: &TriangularS| {
        0.5 * s.norm() * s.norm()
    })?;

    // characteristic functional against the closed form, five test functions
    let tests: Vec<(&str, Box<dyn Fn(&TriangularS) -> f64>)> = vec![
        ("cf_zero", Box::new(|_s: &TriangularS| 0.0)),
        ("cf_half_norm_sq", Box::new(|s: &TriangularS| {
            0.5 * s.norm() * s.norm()
        })),
        ("cf_exp_decay", Box::new(|s: &TriangularS| (-s.norm()).exp())),
        ("cf_capped_norm", Box::new(|s: &TriangularS| s.norm().min(1.0))),
        ("cf_rational", Box::new(|s: &TriangularS| {
            1.0 / (1.0 + s.norm())
        })),
    ];
    for (i, (name, f)) in tests.iter().enumerate() {
        let mut rng = cfg.rng(6000 + i as u64);
        let rep = characteristic_functional_check(
            &triple,
            f,
            (cfg.samples / 4).max(500),
            cfg.samples,
            &mut rng,
        )?;
        let gap = (rep.mc_value - rep.closed_form).abs();
        out.push(
            name,
            rep.mc_value,
            rep.mc_std_error,
            3.0,
            rep.n_configs,
            gap <= 3.0 * rep.mc_std_error.max(1e-12),
        );
    }

    // u = 0: plain Poisson void probability on a subshell
    {
        let plain = QPTriple::new(nu.clone(), cfg.window(), |_| 0.0)?;
        let mut rng = cfg.rng(6100);
        let n = (cfg.samples / 2).max(2000);
        let sub = (0.1f64, 1.0f64);
        let sub_mass = (sub.1 / sub.0).ln();
        let mut void = 0usize;
        for _ in 0..n {
            let cfg_pts = sample_configuration(&plain, &mut rng)?;
            if !cfg_pts
                .points
                .iter()
                .any(|s| s.norm() >= sub.0 && s.norm() <= sub.1)
            {
                void += 1;
            }
        }
        let rate = void as f64 / n as f64;
        let expect = (-sub_mass).exp();
        let se = (expect * (1.0 - expect) / n as f64).sqrt();
        out.push(
            "poisson_void_probability",
            rate,
            se,
            3.0,
            n,
            (rate - expect).abs() <= 3.5 * se,
        );
    }

    // quasi-invariance under a scaling translation, window-stable
    {
        let s0 = TriangularS::from_coords(sig, &[1.5]);
        let mut rng = cfg.rng(6200);
        let rep = quasi_invariance_estimate(&triple, &s0, cfg.samples, &mut rng)?;
        let ok = rep.j2_mc.is_finite()
            && (rep.j2_mc - rep.j2_reference).abs() <= 3.0 * rep.j2_mc_std_error.max(1e-9);
        out.push(
            "quasi_invariance_density_ratio",
            rep.j2_mc,
            rep.j2_mc_std_error,
            3.0,
            cfg.samples,
            ok,
        );

        // the same ratio on the doubled window stays close
        let wide = QPTriple::new(
            nu.clone(),
            (cfg.window_min, 2.0 * cfg.window_max),
            |s: &TriangularS| 0.5 * s.norm() * s.norm(),
        )?;
        let mut rng2 = cfg.rng(6300);
        let rep2 = quasi_invariance_estimate(&wide, &s0, cfg.samples, &mut rng2)?;
        let drift = (rep2.j2_reference / rep.j2_reference - 1.0).abs();
        out.push(
            "quasi_invariance_window_stable",
            rep2.j2_reference,
            rep2.j2_mc_std_error,
            0.05,
            cfg.samples,
            rep2.j2_mc.is_finite() && drift <= 0.05,
        );
    }

    Ok(SuiteReport::from_rows("qp", out.rows))
}

pub fn run_currents_suite(cfg: &RunConfig) -> Result<SuiteReport, Error> {
    let mut out = Rower::new(cfg);
    let sig = Signature::new(1, 2)?;
    let eps = SignVector::plus(1);
    let nu = power_law_measure(sig);
    let triple = QPTriple::new(nu, cfg.window(), |s: &TriangularS| {
        let r = s.norm();
        r * r / (1.0 + r * r)
    })?;
    let n_cfgs = (cfg.samples / 4).max(1000);

    // vacuum normalization
    {
        let mut rng = cfg.rng(7000);
        let rep = expectation_functional(&identity_current(sig), &triple, &eps, n_cfgs, &mut rng)?;
        let gap = C64::new(rep.value_re - 1.0, rep.value_im).norm();
        out.push(
            "vacuum_expectation_one",
            rep.value_re,
            rep.std_error,
            3.0,
            n_cfgs,
            gap <= 3.0 * rep.std_error,
        );
    }

    // factorization over disjoint supports, ten pairs
    {
        let mut rng = cfg.rng(7100);
        let id = IwasawaElement::identity(sig);
        let mut ok = true;
        let mut worst_pull = 0.0f64;
        for _ in 0..10 {
            let a = IwasawaElement::random(sig, 0.3, &mut rng);
            let b = IwasawaElement::random(sig, 0.3, &mut rng);
            let g1 = StepCurrent::new(vec![0.0, 0.5], vec![a, id.clone()])?;
            let g2 = StepCurrent::new(vec![0.0, 0.5], vec![id.clone(), b])?;
            let g12 = current_mul(&g1, &g2)?;
            let r1 = expectation_functional(&g1, &triple, &eps, n_cfgs, &mut rng)?;
            let r2 = expectation_functional(&g2, &triple, &eps, n_cfgs, &mut rng)?;
            let r12 = expectation_functional(&g12, &triple, &eps, n_cfgs, &mut rng)?;
            let phi1 = C64::new(r1.value_re, r1.value_im);
            let phi2 = C64::new(r2.value_re, r2.value_im);
            let phi12 = C64::new(r12.value_re, r12.value_im);
            let se = r12.std_error
                + r1.std_error * phi2.norm()
                + r2.std_error * phi1.norm();
            let pull = (phi12 - phi1 * phi2).norm() / se.max(1e-12);
            worst_pull = worst_pull.max(pull);
            ok &= pull <= 3.0;
        }
        out.push(
            "disjoint_support_factorization",
            worst_pull,
            1.0,
            3.0,
            10 * 3 * n_cfgs,
            ok,
        );
    }

    // constant currents reproduce the group-level product bit for bit
    {
        let mut rng = cfg.rng(7200);
        let mut ok = true;
        for _ in 0..20 {
            let a = IwasawaElement::random(sig, 0.4, &mut rng);
            let b = IwasawaElement::random(sig, 0.4, &mut rng);
            let cur = current_mul(&StepCurrent::constant(a.clone()), &StepCurrent::constant(b.clone()))?;
            let direct = p_mul(&a, &b)?;
            ok &= cur.pieces() == 1
                && cur.values[0].s.m == direct.s.m
                && cur.values[0].h.n == direct.h.n
                && cur.values[0].h.z == direct.h.z;
        }
        out.exact("constant_current_consistency", ok as u64 as f64, 1.0, 20);
    }

    Ok(SuiteReport::from_rows("currents", out.rows))
}

pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<SuiteReport, Error> {
    cfg.validate()?;
    match name {
        "group" => run_group_suite(cfg),
        "iwasawa" => run_iwasawa_suite(cfg),
        "bargmann" => run_bargmann_suite(cfg),
        "special" => run_special_suite(cfg),
        "extension" => run_extension_suite(cfg),
        "qp" => run_qp_suite(cfg),
        "currents" => run_currents_suite(cfg),
        other => Err(Error::ConfigInvalid {
            context: format!("unknown suite '{other}'"),
        }),
    }
}

pub fn run_all(cfg: &RunConfig) -> Result<Vec<SuiteReport>, Error> {
    SUITES.iter().map(|s| run_suite(s, cfg)).collect()
}
