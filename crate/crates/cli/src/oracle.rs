use std::path::Path;

use anyhow::Result;
use bergcomp_core::functions::{make_test_function, AnalyticFunction, DeltaChoice, EXPANSION_DEGREE};
use bergcomp_core::geometry::DiskPoint;
use bergcomp_core::operators::{image_norm_outcome, pullback_integrate, OperatorSymbol, PullbackMeasure, SymbolFn};
use bergcomp_core::quadrature::{QuadratureSpec, Verdict};
use bergcomp_core::truncation::{norm_of, remainder_sup_check_with_norm, truncation_norm_ratio_with_norm, Flavor};
use bergcomp_core::weights::RadialWeight;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Loaded;
use crate::output::{write_csv, write_json};
use crate::run::{header, Command, Status};

/// Relative agreement required between the two sides of the pullback identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-5;

fn point(rng: &mut ChaCha8Rng, max: f64) -> DiskPoint {
    DiskPoint::from_polar(rng.gen_range(0.0..max), rng.gen_range(-3.0..3.0)).expect("radius below one")
}

/// A random self-map from the families the parser understands.
pub fn random_symbol(rng: &mut ChaCha8Rng) -> SymbolFn {
    match rng.gen_range(0..5) {
        0 => SymbolFn::Scaling(point(rng, 0.9).to_complex()),
        1 => SymbolFn::Blaschke(point(rng, 0.8)),
        2 => SymbolFn::Power(rng.gen_range(1..4)),
        3 => SymbolFn::Constant(point(rng, 0.9).to_complex()),
        _ => SymbolFn::Taylor(vec![
            point(rng, 0.3).to_complex(),
            point(rng, 0.4).to_complex(),
            point(rng, 0.2).to_complex(),
        ]),
    }
}

pub fn random_multiplier(rng: &mut ChaCha8Rng) -> SymbolFn {
    match rng.gen_range(0..3) {
        0 => SymbolFn::Constant(Complex64::new(rng.gen_range(0.5..2.0), 0.0)),
        1 => SymbolFn::Power(1),
        _ => SymbolFn::Taylor(vec![Complex64::new(1.0, 0.0), point(rng, 0.9).to_complex()]),
    }
}

pub fn random_polynomial(rng: &mut ChaCha8Rng, degree: usize) -> AnalyticFunction {
    let c = (0..=degree)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    AnalyticFunction::taylor(c).expect("finite coefficients")
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub pair: usize,
    pub operator: String,
    pub function: String,
    pub q: f64,
    pub image_norm_q: f64,
    pub pullback: f64,
    pub rel_diff: f64,
}

/// Compares `||D f||^q` with the pullback integral of `|f^{(n)}|^q` on
/// `pairs` seeded random (operator, function) pairs.
pub fn identity_rows(nu: &RadialWeight, pairs: usize, seed: u64, spec: &QuadratureSpec) -> Result<Vec<IdentityRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = RadialWeight::standard(0.0)?;
    let delta = DeltaChoice::user(3.0)?;
    let mut rows = Vec::with_capacity(pairs);
    for pair in 0..pairs {
        let op = OperatorSymbol::new(random_symbol(&mut rng), random_multiplier(&mut rng), rng.gen_range(0..3))?;
        let q = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
        let (f, label) = if rng.gen_bool(0.5) {
            (random_polynomial(&mut rng, 8), "random degree-8 polynomial".to_string())
        } else {
            let a = point(&mut rng, 0.95);
            (make_test_function(a, &delta, &w, 2.0)?, format!("test function at ({:.6}, {:.6})", a.re, a.im))
        };
        let lhs = image_norm_outcome(&op, &f, nu, q, spec)?;
        let pm = PullbackMeasure::new(op.clone(), nu.clone(), q, spec)?;
        let n = op.n;
        let rhs = pullback_integrate(&pm, |img| f.derivative_modulus(n, img.z).powf(q), spec)?;
        let finite = lhs.verdict != Verdict::Divergent && rhs.verdict != Verdict::Divergent;
        let rel_diff = if finite {
            (lhs.value - rhs.value).abs() / lhs.value.abs().max(rhs.value.abs()).max(f64::MIN_POSITIVE)
        } else {
            f64::INFINITY
        };
        rows.push(IdentityRow {
            pair,
            operator: format!("phi={} u={} n={}", op.phi, op.u, op.n),
            function: label,
            q,
            image_norm_q: lhs.value,
            pullback: rhs.value,
            rel_diff,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationRow {
    pub member: usize,
    pub flavor: Flavor,
    pub m: usize,
    pub r: f64,
    pub norm_ratio: f64,
    pub remainder_sup: f64,
    pub kernel_tail: f64,
    pub ratio: f64,
}

/// Seeded truncation corpus: random polynomials of degree 60 and two test
/// functions expanded to `EXPANSION_DEGREE`.
pub fn truncation_corpus(seed: u64, w: &RadialWeight, p: f64) -> Result<Vec<AnalyticFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut corpus: Vec<AnalyticFunction> = (0..5).map(|_| random_polynomial(&mut rng, 60)).collect();
    let delta = DeltaChoice::user(3.0)?;
    for a in [DiskPoint::new(0.5, 0.0)?, DiskPoint::new(0.0, 0.8)?] {
        let (c, _) = make_test_function(a, &delta, w, p)?.expand_taylor(EXPANSION_DEGREE);
        corpus.push(AnalyticFunction::taylor(c)?);
    }
    Ok(corpus)
}

pub fn truncation_rows(
    corpus: &[AnalyticFunction],
    w: &RadialWeight,
    p: f64,
    ms: &[usize],
    radii: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<TruncationRow>> {
    let mut rows = Vec::new();
    for (member, f) in corpus.iter().enumerate() {
        let norm = norm_of(f, w, p, spec)?;
        for flavor in [Flavor::Sharp, Flavor::Fejer] {
            for &m in ms {
                let norm_ratio = truncation_norm_ratio_with_norm(f, norm, w, p, m, flavor, spec)?;
                for &r in radii {
                    let check = remainder_sup_check_with_norm(f, norm, w, m, r, flavor)?;
                    rows.push(TruncationRow {
                        member,
                        flavor,
                        m,
                        r,
                        norm_ratio,
                        remainder_sup: check.measured,
                        kernel_tail: check.bound,
                        ratio: check.measured / check.bound,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn run(loaded: &Loaded, dir: &Path) -> Result<Status> {
    let c = &loaded.config;
    let spec = c.spec();
    let w = loaded.source_weight()?;
    let nu = loaded.target_weight()?;

    let identity = identity_rows(&nu, c.oracle.pairs, c.oracle.seed, &spec)?;
    write_csv(&dir.join("oracle_identity.csv"), &identity)?;

    let corpus = truncation_corpus(c.oracle.seed, &w, c.p)?;
    let truncation = truncation_rows(&corpus, &w, c.p, &c.grid.m_sweep, &c.oracle.remainder_r, &spec)?;
    write_csv(&dir.join("oracle_truncation.csv"), &truncation)?;

    let max_rel = identity.iter().map(|r| r.rel_diff).fold(0.0, f64::max);
    let max_norm_ratio = |flavor| {
        truncation
            .iter()
            .filter(|r| r.flavor == flavor)
            .map(|r| r.norm_ratio)
            .fold(0.0, f64::max)
    };
    let remainder_constant = truncation.iter().map(|r| r.ratio).fold(0.0, f64::max);
    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        header: crate::run::Header<'a>,
        identity_max_rel_diff: f64,
        identity_tolerance: f64,
        identity_holds: bool,
        sharp_max_norm_ratio: f64,
        fejer_max_norm_ratio: f64,
        remainder_constant: f64,
    }
    let doc = Doc {
        header: header(Command::Oracle, c),
        identity_max_rel_diff: max_rel,
        identity_tolerance: IDENTITY_TOLERANCE,
        identity_holds: max_rel <= IDENTITY_TOLERANCE,
        sharp_max_norm_ratio: max_norm_ratio(Flavor::Sharp),
        fejer_max_norm_ratio: max_norm_ratio(Flavor::Fejer),
        remainder_constant,
    };
    write_json(&dir.join("oracle.json"), &doc)?;
    Ok(Status::Ok)
}
