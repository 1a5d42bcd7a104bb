//! Analytic functions on the disk: Taylor polynomials, the normalized
//! kernel-type test functions `f_a`, and normalized monomials.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::DiskPoint;
use crate::math::{cpow, powf, rising_factorial};
use crate::quadrature::{integrate_disk_focused, IntegralOutcome, Node, QuadratureSpec, Verdict};
use crate::weights::{DoublingReport, RadialWeight};

/// Degree used when closed-form families are expanded into Taylor series.
pub const EXPANSION_DEGREE: usize = 256;

/// `f_a(z) = ((1 - |a|) / (1 - conj(a) z))^delta * box_mass^(-1/p)`, or with
/// `1 - |a|^2` in the numerator when `squared_variant` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestFunction {
    pub a: DiskPoint,
    pub delta: f64,
    pub p: f64,
    /// `omega(S(a))` of the weight the family is normalized for.
    pub box_mass: f64,
    pub squared_variant: bool,
}

impl TestFunction {
    fn prefactor(&self) -> f64 {
        let m = self.a.modulus();
        let base = if self.squared_variant {
            (1.0 - m) * (1.0 + m)
        } else {
            1.0 - m
        };
        powf(base, self.delta) * powf(self.box_mass, -1.0 / self.p)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AnalyticFunction {
    /// Coefficients `a_0, ..., a_d`.
    Taylor(Vec<Complex64>),
    TestFunction(TestFunction),
    /// `z^n / norm`.
    MonomialNormalized { n: u32, norm: f64 },
}

impl AnalyticFunction {
    pub fn taylor(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("Taylor polynomial needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("Taylor coefficients must be finite"));
        }
        Ok(AnalyticFunction::Taylor(coeffs))
    }

    pub fn taylor_real(coeffs: &[f64]) -> Result<Self> {
        Self::taylor(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: f64) -> Self {
        AnalyticFunction::Taylor(alloc::vec![Complex64::new(c, 0.0)])
    }

    /// `z^n / ||z^n||_{A^p_omega}` with the norm from a radial integral.
    pub fn monomial_normalized(n: u32, w: &RadialWeight, p: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(invalid("p must be positive"));
        }
        let norm = powf(2.0 * w.moment_real(n as f64 * p + 1.0)?, 1.0 / p);
        Ok(AnalyticFunction::MonomialNormalized { n, norm })
    }

    pub fn coefficients(&self) -> Option<&[Complex64]> {
        match self {
            AnalyticFunction::Taylor(c) => Some(c),
            _ => None,
        }
    }

    /// Multiplies the function by `c`. Closed forms are expanded first.
    pub fn scaled(&self, c: Complex64) -> Self {
        let coeffs = match self {
            AnalyticFunction::Taylor(a) => a.clone(),
            other => other.expand_taylor(EXPANSION_DEGREE).0,
        };
        AnalyticFunction::Taylor(coeffs.into_iter().map(|a| a * c).collect())
    }

    /// `f^{(n)}(z)` without a domain check.
    pub fn derivative_at(&self, n: u32, z: Complex64) -> Complex64 {
        match self {
            AnalyticFunction::Taylor(a) => taylor_derivative(a, n, z),
            AnalyticFunction::TestFunction(t) => {
                let ab = t.a.to_complex().conj();
                let w = Complex64::new(1.0, 0.0) - ab * z;
                let c = rising_factorial(t.delta, n) * t.prefactor();
                crate::math::cpowi(ab, n) * cpow(w, -(t.delta + n as f64)) * c
            }
            AnalyticFunction::MonomialNormalized { n: k, norm } => {
                if n > *k {
                    return Complex64::new(0.0, 0.0);
                }
                let fall = falling_factorial(*k, n);
                crate::math::cpowi(z, k - n) * (fall / norm)
            }
        }
    }

    /// `|f^{(n)}(z)|`, computed without complex powers where possible.
    pub fn derivative_modulus(&self, n: u32, z: Complex64) -> f64 {
        match self {
            AnalyticFunction::TestFunction(t) => {
                let am = t.a.modulus();
                let w = Complex64::new(1.0, 0.0) - t.a.to_complex().conj() * z;
                rising_factorial(t.delta, n)
                    * powf(am, n as f64)
                    * powf(w.norm_sqr(), -0.5 * (t.delta + n as f64))
                    * t.prefactor()
            }
            _ => self.derivative_at(n, z).norm(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.derivative_at(0, z)
    }

    /// Evaluator for `|f^{(n)}|^p` with per-function constants hoisted.
    pub(crate) fn power_modulus(&self, n: u32, p: f64) -> PowerModulus<'_> {
        match self {
            AnalyticFunction::TestFunction(t) => {
                let c = rising_factorial(t.delta, n) * powf(t.a.modulus(), n as f64) * t.prefactor();
                PowerModulus::Kernel {
                    ab: t.a.to_complex().conj(),
                    scale: powf(c, p),
                    expo: -0.5 * (t.delta + n as f64) * p,
                }
            }
            _ => PowerModulus::General { f: self, n, p },
        }
    }

    /// Points where `|f|` peaks, used to grade quadrature grids.
    pub fn foci(&self) -> Vec<DiskPoint> {
        match self {
            AnalyticFunction::TestFunction(t) if !t.a.is_origin() => alloc::vec![t.a],
            _ => Vec::new(),
        }
    }

    /// Taylor coefficients up to `degree` and the modulus of the first
    /// omitted coefficient (zero for polynomials of lower degree).
    pub fn expand_taylor(&self, degree: usize) -> (Vec<Complex64>, f64) {
        match self {
            AnalyticFunction::Taylor(a) => {
                let mut c: Vec<Complex64> = a.iter().take(degree + 1).copied().collect();
                c.resize(degree + 1, Complex64::new(0.0, 0.0));
                let next = a.get(degree + 1).map(|x| x.norm()).unwrap_or(0.0);
                (c, next)
            }
            AnalyticFunction::TestFunction(t) => {
                // (1 - w)^{-delta} = sum (delta)_k / k! w^k
                let ab = t.a.to_complex().conj();
                let mut out = Vec::with_capacity(degree + 1);
                let mut coef = t.prefactor();
                let mut power = Complex64::new(1.0, 0.0);
                for k in 0..=degree {
                    out.push(power * coef);
                    coef *= (t.delta + k as f64) / (k + 1) as f64;
                    power *= ab;
                }
                (out, (power * coef).norm())
            }
            AnalyticFunction::MonomialNormalized { n, norm } => {
                let mut c = alloc::vec![Complex64::new(0.0, 0.0); degree + 1];
                let n = *n as usize;
                if n <= degree {
                    c[n] = Complex64::new(1.0 / norm, 0.0);
                    (c, 0.0)
                } else {
                    (c, 1.0 / norm)
                }
            }
        }
    }
}

fn falling_factorial(k: u32, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (k - i) as f64)
}

fn taylor_derivative(a: &[Complex64], n: u32, z: Complex64) -> Complex64 {
    let n = n as usize;
    if n >= a.len() {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    if n == 0 {
        for &c in a.iter().rev() {
            acc = acc * z + c;
        }
        return acc;
    }
    // k!/(k-n)! updated downwards: ff(k-1) = ff(k) (k-n) / k
    let top = a.len() - 1;
    let mut ff = falling_factorial(top as u32, n as u32);
    for k in (n..=top).rev() {
        acc = acc * z + a[k] * ff;
        if k > n {
            ff = ff * (k - n) as f64 / k as f64;
        }
    }
    acc
}

/// `f^{(n)}(z)` for `|z| < 1`.
pub fn eval_derivative(f: &AnalyticFunction, n: u32, z: DiskPoint) -> Complex64 {
    f.derivative_at(n, z.to_complex())
}

/// Quadrature outcome for `int |f|^p omega dA`.
pub(crate) enum PowerModulus<'a> {
    Kernel { ab: Complex64, scale: f64, expo: f64 },
    General { f: &'a AnalyticFunction, n: u32, p: f64 },
}

impl PowerModulus<'_> {
    #[inline]
    pub(crate) fn at(&self, z: Complex64) -> f64 {
        match *self {
            PowerModulus::Kernel { ab, scale, expo } => {
                if scale == 0.0 {
                    return 0.0;
                }
                let w = Complex64::new(1.0, 0.0) - ab * z;
                scale * crate::math::pow_pos(w.norm_sqr(), expo)
            }
            PowerModulus::General { f, n, p } => {
                let v = f.derivative_modulus(n, z);
                if v == 0.0 {
                    0.0
                } else if p == 2.0 {
                    v * v
                } else {
                    powf(v, p)
                }
            }
        }
    }
}

pub fn bergman_norm_outcome(
    f: &AnalyticFunction,
    w: &RadialWeight,
    p: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralOutcome> {
    if !(p > 0.0) {
        return Err(invalid("p must be positive"));
    }
    let fp = f.power_modulus(0, p);
    let density = |node: &Node| {
        let v = fp.at(node.z);
        if v == 0.0 {
            0.0
        } else {
            v * w.density_gap(node.gap)
        }
    };
    integrate_disk_focused(density, spec, &f.foci())
}

/// `||f||_{A^p_omega}` by disk quadrature.
pub fn bergman_norm(f: &AnalyticFunction, w: &RadialWeight, p: f64, spec: &QuadratureSpec) -> Result<f64> {
    let out = bergman_norm_outcome(f, w, p, spec)?;
    if out.verdict == Verdict::Divergent {
        return Err(Error::Divergent {
            last_partial: out.value,
        });
    }
    Ok(powf(out.value.max(0.0), 1.0 / p))
}

/// `||f||_{A^2_omega}^2 = sum |a_k|^2 2 omega_{2k+1}` for polynomials.
pub fn coefficient_norm_sq(coeffs: &[Complex64], w: &RadialWeight) -> Result<f64> {
    let mut acc = crate::math::CompensatedSum::default();
    for (k, c) in coeffs.iter().enumerate() {
        if c.norm_sqr() > 0.0 {
            acc.add(c.norm_sqr() * 2.0 * w.moment(2 * k as u32 + 1)?);
        }
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DeltaBasis {
    User,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeltaChoice {
    pub delta: f64,
    pub basis: DeltaBasis,
}

impl DeltaChoice {
    pub fn user(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta must be positive"));
        }
        Ok(DeltaChoice {
            delta,
            basis: DeltaBasis::User,
        })
    }
}

/// `delta = max(2, 2 (beta_high + 1) / p)`.
pub fn choose_delta(p: f64, report: &DoublingReport) -> DeltaChoice {
    let beta = report.exponents.1;
    DeltaChoice {
        delta: (2.0f64).max(2.0 * (beta + 1.0) / p),
        basis: DeltaBasis::Heuristic,
    }
}

/// Builds `f_a` for the weight `w` and exponent `p`.
pub fn make_test_function(a: DiskPoint, delta: &DeltaChoice, w: &RadialWeight, p: f64) -> Result<AnalyticFunction> {
    make_test_function_variant(a, delta, w, p, false)
}

/// As [`make_test_function`], optionally with `(1 - |a|^2)^delta`.
pub fn make_test_function_variant(
    a: DiskPoint,
    delta: &DeltaChoice,
    w: &RadialWeight,
    p: f64,
    squared_variant: bool,
) -> Result<AnalyticFunction> {
    if !(delta.delta > 0.0) {
        return Err(invalid("delta must be positive"));
    }
    if !(p > 0.0) {
        return Err(invalid("p must be positive"));
    }
    let box_mass = w.carleson_box_weight(a)?;
    if !(box_mass > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(AnalyticFunction::TestFunction(TestFunction {
        a,
        delta: delta.delta,
        p,
        box_mass,
        squared_variant,
    }))
}

/// `max_z |f^{(n)}(z)| omega(S(z))^{1/p} (1 - |z|)^n / ||f||` over `grid`.
pub fn growth_ratio(
    f: &AnalyticFunction,
    w: &RadialWeight,
    p: f64,
    n: u32,
    grid: &[DiskPoint],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let norm = bergman_norm(f, w, p, spec)?;
    growth_ratio_with_norm(f, w, p, n, grid, norm)
}

/// [`growth_ratio`] with a precomputed norm.
pub fn growth_ratio_with_norm(
    f: &AnalyticFunction,
    w: &RadialWeight,
    p: f64,
    n: u32,
    grid: &[DiskPoint],
    norm: f64,
) -> Result<f64> {
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let mut best = 0.0f64;
    for &z in grid {
        let g = 1.0 - z.modulus();
        let mass = w.carleson_mass_at(z.is_origin(), g)?;
        let v = f.derivative_modulus(n, z.to_complex()) * powf(mass, 1.0 / p) * powf(g, n as f64);
        best = best.max(v);
    }
    Ok(best / norm)
}
