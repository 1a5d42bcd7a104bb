use bergcomp_core::functions::{make_test_function, AnalyticFunction, DeltaChoice};
use bergcomp_core::geometry::{DiskPoint, Region};
use bergcomp_core::operators::{image_norm_outcome, pullback_integrate, pullback_region_mass, OperatorSymbol, PullbackMeasure, SymbolFn};
use bergcomp_core::quadrature::QuadratureSpec;
use bergcomp_core::truncation::{reproducing_check, reproducing_check_quadrature};
use bergcomp_core::weights::RadialWeight;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_point(rng: &mut ChaCha8Rng, max: f64) -> DiskPoint {
    DiskPoint::from_polar(rng.gen_range(0.0..max), rng.gen_range(-3.0..3.0)).unwrap()
}

fn random_symbol(rng: &mut ChaCha8Rng) -> SymbolFn {
    match rng.gen_range(0..5) {
        0 => SymbolFn::Scaling(random_point(rng, 0.9).to_complex()),
        1 => SymbolFn::Blaschke(random_point(rng, 0.8)),
        2 => SymbolFn::Power(rng.gen_range(1..4)),
        3 => SymbolFn::Constant(random_point(rng, 0.9).to_complex()),
        _ => {
            let a0 = random_point(rng, 0.3).to_complex();
            let a1 = random_point(rng, 0.4).to_complex();
            let a2 = random_point(rng, 0.2).to_complex();
            SymbolFn::Taylor(vec![a0, a1, a2])
        }
    }
}

fn random_multiplier(rng: &mut ChaCha8Rng) -> SymbolFn {
    match rng.gen_range(0..3) {
        0 => SymbolFn::Constant(c(rng.gen_range(0.5..2.0), 0.0)),
        1 => SymbolFn::Power(1),
        _ => SymbolFn::Taylor(vec![c(1.0, 0.0), random_point(rng, 0.9).to_complex()]),
    }
}

#[test]
fn image_norm_equals_pullback_integral() {
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let nu = RadialWeight::standard(1.0).unwrap();
    let w = RadialWeight::standard(0.0).unwrap();
    for _ in 0..4 {
        let op = OperatorSymbol::new(random_symbol(&mut rng), random_multiplier(&mut rng), rng.gen_range(0..3)).unwrap();
        let q = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
        let f = if rng.gen_bool(0.5) {
            let coeffs = (0..8).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            AnalyticFunction::taylor(coeffs).unwrap()
        } else {
            make_test_function(random_point(&mut rng, 0.9), &DeltaChoice::user(3.0).unwrap(), &w, 2.0).unwrap()
        };
        let lhs = image_norm_outcome(&op, &f, &nu, q, &spec).unwrap();
        let pm = PullbackMeasure::new(op.clone(), nu.clone(), q, &spec).unwrap();
        let n = op.n;
        let rhs = pullback_integrate(&pm, |img| f.derivative_modulus(n, img.z).powf(q), &spec).unwrap();
        let tol = 1e-9 * lhs.value.abs() + lhs.error_estimate + rhs.error_estimate;
        assert!((lhs.value - rhs.value).abs() <= tol, "{op:?}: {} vs {}", lhs.value, rhs.value);
    }
}

#[test]
fn pullback_mass_is_additive_over_an_annulus_split() {
    let spec = QuadratureSpec::default();
    let nu = RadialWeight::standard(0.0).unwrap();
    for phi in [SymbolFn::Identity, SymbolFn::Scaling(c(0.6, 0.3)), SymbolFn::Power(2)] {
        let op = OperatorSymbol::new(phi, SymbolFn::Constant(c(1.0, 0.0)), 0).unwrap();
        let pm = PullbackMeasure::new(op, nu.clone(), 2.0, &spec).unwrap();
        for radius in [0.3, 0.5] {
            let inner = pullback_region_mass(&pm, &Region::pseudo_disk(DiskPoint::ORIGIN, radius).unwrap(), &spec).unwrap();
            let outer = pullback_region_mass(&pm, &Region::annulus_complement(radius).unwrap(), &spec).unwrap();
            let total = pullback_region_mass(&pm, &Region::FullDisk, &spec).unwrap();
            assert!((inner + outer - total).abs() < 1e-4 * total, "{inner} + {outer} != {total}");
            assert!((total - pm.total_mass).abs() < 1e-9 * total);
        }
    }
}

#[test]
fn pullback_mass_is_monotone_in_the_radius() {
    let spec = QuadratureSpec::default();
    let nu = RadialWeight::standard(0.0).unwrap();
    let op = OperatorSymbol::new(SymbolFn::Blaschke(DiskPoint::new(0.4, 0.2).unwrap()), SymbolFn::Power(1), 0).unwrap();
    let pm = PullbackMeasure::new(op, nu, 2.0, &spec).unwrap();
    let center = DiskPoint::new(0.5, -0.3).unwrap();
    let mut last = 0.0;
    for radius in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let m = pullback_region_mass(&pm, &Region::pseudo_disk(center, radius).unwrap(), &spec).unwrap();
        assert!(m + 1e-6 >= last, "radius {radius}: {m} < {last}");
        last = m;
    }
}

#[test]
fn identity_pullback_of_centered_disk_is_its_area() {
    let spec = QuadratureSpec::default();
    let nu = RadialWeight::standard(0.0).unwrap();
    let pm = PullbackMeasure::new(OperatorSymbol::identity(), nu, 3.0, &spec).unwrap();
    let m = pullback_region_mass(&pm, &Region::pseudo_disk(DiskPoint::ORIGIN, 0.5).unwrap(), &spec).unwrap();
    assert!((m - 0.25).abs() < 1e-4, "{m}");
}

#[test]
fn reproducing_formula_recovers_point_values() {
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for alpha in [0.0, 1.5] {
        let w = RadialWeight::standard(alpha).unwrap();
        for _ in 0..3 {
            let coeffs = (0..10).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let f = AnalyticFunction::taylor(coeffs).unwrap();
            let z = random_point(&mut rng, 0.7);
            assert!(reproducing_check(&w, &f, z, 64).unwrap() < 1e-12);
            assert!(reproducing_check_quadrature(&w, &f, z, 64, &spec).unwrap() < 1e-7);
        }
    }
}
