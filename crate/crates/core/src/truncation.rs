//! Taylor and Fejér truncations, partial sums of the reproducing kernel
//! `B_z(xi) = sum (xi conj(z))^k / (2 omega_{2k+1})`, and the remainder
//! bounds built from the kernel tail.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::functions::{bergman_norm, coefficient_norm_sq, AnalyticFunction, EXPANSION_DEGREE};
use crate::geometry::DiskPoint;
use crate::math::{powf, sin_cos, sqrt, CompensatedSum, PI};
use crate::quadrature::{integrate_disk, Node, QuadratureSpec};
use crate::weights::RadialWeight;

/// Relative size at which kernel-tail summation stops.
pub const TAIL_CUTOFF: f64 = 1e-16;

/// Term budget for [`kernel_tail`]; running out means the moments decay too
/// slowly for the radius.
pub const MAX_TAIL_TERMS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Flavor {
    /// `T_m f = sum_{k<m} a_k z^k`
    Sharp,
    /// `sum_{k<m} (1 - k/m) a_k z^k`
    Fejer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationPair {
    pub head: AnalyticFunction,
    pub tail: AnalyticFunction,
    pub m: usize,
    pub flavor: Flavor,
}

/// Splits a Taylor polynomial into head and tail with `head + tail = f`.
pub fn truncate(f: &AnalyticFunction, m: usize, flavor: Flavor) -> Result<TruncationPair> {
    let coeffs = f.coefficients().ok_or(Error::NotTaylor)?;
    if m == 0 {
        return Err(invalid("truncation index must be positive"));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut head = Vec::with_capacity(coeffs.len());
    let mut tail = Vec::with_capacity(coeffs.len());
    for (k, &a) in coeffs.iter().enumerate() {
        let h = match flavor {
            Flavor::Sharp if k < m => a,
            Flavor::Fejer if k < m => a * (1.0 - k as f64 / m as f64),
            _ => zero,
        };
        head.push(h);
        tail.push(a - h);
    }
    Ok(TruncationPair {
        head: AnalyticFunction::Taylor(head),
        tail: AnalyticFunction::Taylor(tail),
        m,
        flavor,
    })
}

/// [`truncate`] for closed-form families after expansion to
/// `EXPANSION_DEGREE`; also returns the first omitted coefficient modulus.
pub fn truncate_expanded(f: &AnalyticFunction, m: usize, flavor: Flavor) -> Result<(TruncationPair, f64)> {
    let (coeffs, next) = f.expand_taylor(EXPANSION_DEGREE);
    Ok((truncate(&AnalyticFunction::Taylor(coeffs), m, flavor)?, next))
}

/// `||f||_{A^p_omega}`: moment formula for polynomials at `p = 2`, disk
/// quadrature otherwise.
pub fn norm_of(f: &AnalyticFunction, w: &RadialWeight, p: f64, spec: &QuadratureSpec) -> Result<f64> {
    match f.coefficients() {
        // Parseval with moment weights: exact for p = 2
        Some(c) if p == 2.0 => Ok(sqrt(coefficient_norm_sq(c, w)?)),
        _ => bergman_norm(f, w, p, spec),
    }
}

/// `||head|| / ||f||` in `A^p_omega` (moment formula at `p = 2`, disk
/// quadrature otherwise).
pub fn truncation_norm_ratio(
    f: &AnalyticFunction,
    w: &RadialWeight,
    p: f64,
    m: usize,
    flavor: Flavor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_flavor(flavor, p)?;
    let nf = norm_of(f, w, p, spec)?;
    truncation_norm_ratio_with_norm(f, nf, w, p, m, flavor, spec)
}

/// [`truncation_norm_ratio`] with `||f||` supplied by the caller.
pub fn truncation_norm_ratio_with_norm(
    f: &AnalyticFunction,
    norm: f64,
    w: &RadialWeight,
    p: f64,
    m: usize,
    flavor: Flavor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_flavor(flavor, p)?;
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let pair = truncate(f, m, flavor)?;
    Ok(norm_of(&pair.head, w, p, spec)? / norm)
}

fn check_flavor(flavor: Flavor, p: f64) -> Result<()> {
    match flavor {
        Flavor::Sharp if !(p > 1.0) => Err(Error::UnsupportedRegime(alloc::format!(
            "sharp truncation needs p > 1, got {p}"
        ))),
        Flavor::Fejer if !(p >= 1.0) => Err(Error::UnsupportedRegime(alloc::format!(
            "Fejér truncation needs p >= 1, got {p}"
        ))),
        _ => Ok(()),
    }
}

/// `sum_{k=0}^{N} (xi conj(z))^k / (2 omega_{2k+1})`.
pub fn kernel_partial_sum(w: &RadialWeight, z: DiskPoint, xi: DiskPoint, n: usize) -> Result<Complex64> {
    let x = xi.to_complex() * z.to_complex().conj();
    let mut power = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        acc += power / (2.0 * w.moment(2 * k as u32 + 1)?);
        power *= x;
    }
    Ok(acc)
}

fn tail_from(w: &RadialWeight, r: f64, m: usize) -> Result<f64> {
    let mut sum = CompensatedSum::default();
    let mut prev = f64::INFINITY;
    let mut power = powf(r, m as f64);
    for k in m..m + MAX_TAIL_TERMS {
        let term = power / (2.0 * w.moment(2 * k as u32 + 1)?);
        if !term.is_finite() {
            return Err(Error::KernelTailDivergent);
        }
        sum.add(term);
        let s = sum.value();
        if term < prev && term <= TAIL_CUTOFF * s {
            return Ok(s);
        }
        if term == 0.0 && s == 0.0 {
            return Ok(0.0);
        }
        prev = term;
        power *= r;
    }
    Err(Error::KernelTailDivergent)
}

/// `sum_{k >= m} r^k / (2 omega_{2k+1})`, summed until terms are decreasing
/// and below `TAIL_CUTOFF` of the running sum.
pub fn kernel_tail(w: &RadialWeight, r: f64, m: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(invalid("kernel tail radius must lie in [0, 1)"));
    }
    tail_from(w, r, m)
}

/// Smallest `m` with `kernel_tail(w, r, m) < eps`.
pub fn kernel_tail_threshold(w: &RadialWeight, r: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(invalid("threshold must be positive"));
    }
    let total = kernel_tail(w, r, 0)?;
    if total < eps {
        return Ok(0);
    }
    // the tail is monotone in m: bracket then bisect
    let mut hi = 1usize;
    while kernel_tail(w, r, hi)? >= eps {
        hi *= 2;
        if hi > MAX_TAIL_TERMS {
            return Err(Error::KernelTailDivergent);
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if kernel_tail(w, r, mid)? < eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Kernel-tail bound with the extra Fejér term
/// `(1/m) sum_{k<m} k r^{k-1} / (2 omega_{2k+1})`.
pub fn fejer_bound(w: &RadialWeight, r: f64, m: usize) -> Result<f64> {
    let mut extra = CompensatedSum::default();
    for k in 1..m {
        extra.add(k as f64 * powf(r, (k - 1) as f64) / (2.0 * w.moment(2 * k as u32 + 1)?));
    }
    Ok(kernel_tail(w, r, m)? + extra.value() / m.max(1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RemainderCheck {
    /// `sup_{|z| <= r} |R_m f(z)| / ||f||`
    pub measured: f64,
    /// Kernel-tail bound for the flavor.
    pub bound: f64,
}

/// Radial and angular resolution of the polar grid in [`remainder_sup_check`].
pub const REMAINDER_GRID: (usize, usize) = (8, 256);

/// Measures `sup_{|z| <= r} |R_m f(z)| / ||f||_{A^p_omega}` on a polar grid
/// and pairs it with the kernel-tail bound.
pub fn remainder_sup_check(
    f: &AnalyticFunction,
    w: &RadialWeight,
    p: f64,
    m: usize,
    r: f64,
    flavor: Flavor,
    spec: &QuadratureSpec,
) -> Result<RemainderCheck> {
    let norm = norm_of(f, w, p, spec)?;
    remainder_sup_check_with_norm(f, norm, w, m, r, flavor)
}

/// [`remainder_sup_check`] with `||f||` supplied by the caller.
pub fn remainder_sup_check_with_norm(
    f: &AnalyticFunction,
    norm: f64,
    w: &RadialWeight,
    m: usize,
    r: f64,
    flavor: Flavor,
) -> Result<RemainderCheck> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("radius must lie in (0, 1)"));
    }
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let pair = truncate(f, m, flavor)?;
    let (nr, na) = REMAINDER_GRID;
    let mut sup = 0.0f64;
    for i in 1..=nr {
        let rho = r * i as f64 / nr as f64;
        for k in 0..na {
            let (s, c) = sin_cos(2.0 * PI * k as f64 / na as f64);
            sup = sup.max(pair.tail.eval(Complex64::new(rho * c, rho * s)).norm());
        }
    }
    let bound = match flavor {
        Flavor::Sharp => kernel_tail(w, r, m)?,
        Flavor::Fejer => fejer_bound(w, r, m)?,
    };
    Ok(RemainderCheck {
        measured: sup / norm,
        bound,
    })
}

/// `|<f, B_z^N> - f(z)|` with the pairing `int f conj(g) omega dA`
/// evaluated through the moment orthogonality of monomials.
pub fn reproducing_check(w: &RadialWeight, f: &AnalyticFunction, z: DiskPoint, n: usize) -> Result<f64> {
    let coeffs = f.coefficients().ok_or(Error::NotTaylor)?;
    let zc = z.to_complex();
    let mut pairing = Complex64::new(0.0, 0.0);
    let mut zk = Complex64::new(1.0, 0.0);
    for (k, &a) in coeffs.iter().enumerate().take(n + 1) {
        let m2 = 2.0 * w.moment(2 * k as u32 + 1)?;
        // kernel coefficient of xi^k is conj(z)^k / m2; <xi^k, xi^k> = m2
        let kernel_coef = zk.conj() / m2;
        pairing += a * kernel_coef.conj() * m2;
        zk *= zc;
    }
    Ok((pairing - f.eval(zc)).norm())
}

/// [`reproducing_check`] with the pairing computed by disk quadrature.
pub fn reproducing_check_quadrature(
    w: &RadialWeight,
    f: &AnalyticFunction,
    z: DiskPoint,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let coeffs = f.coefficients().ok_or(Error::NotTaylor)?;
    let kernel: Vec<Complex64> = {
        let zb = z.to_complex().conj();
        let mut out = Vec::with_capacity(n + 1);
        let mut p = Complex64::new(1.0, 0.0);
        for k in 0..=n {
            out.push(p / (2.0 * w.moment(2 * k as u32 + 1)?));
            p *= zb;
        }
        out
    };
    let horner = |c: &[Complex64], x: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * x + a);
    let integrand = |node: &Node, part: usize| {
        let v = horner(coeffs, node.z) * horner(&kernel, node.z).conj() * w.density_gap(node.gap);
        if part == 0 {
            v.re
        } else {
            v.im
        }
    };
    let re = integrate_disk(|n: &Node| integrand(n, 0), spec)?.finite_value()?;
    let im = integrate_disk(|n: &Node| integrand(n, 1), spec)?.finite_value()?;
    Ok((Complex64::new(re, im) - f.eval(z.to_complex())).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn w0() -> RadialWeight {
        RadialWeight::standard(0.0).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let f = AnalyticFunction::taylor_real(&[1.0, 2.0, 3.0]).unwrap();
        let pair = truncate(&f, 2, Flavor::Sharp).unwrap();
        assert_eq!(pair.head.coefficients().unwrap(), &[c(1.0), c(2.0), c(0.0)]);
        assert_eq!(pair.tail.coefficients().unwrap(), &[c(0.0), c(0.0), c(3.0)]);
        let g = AnalyticFunction::taylor_real(&[1.0, 1.0, 1.0]).unwrap();
        let fej = truncate(&g, 3, Flavor::Fejer).unwrap();
        let h = fej.head.coefficients().unwrap();
        assert_eq!(h[0], c(1.0));
        assert!((h[1] - c(2.0 / 3.0)).norm() < 1e-15 && (h[2] - c(1.0 / 3.0)).norm() < 1e-15);
        let all = truncate(&f, 10, Flavor::Sharp).unwrap();
        assert!(all.tail.coefficients().unwrap().iter().all(|x| *x == c(0.0)));
        assert!(matches!(
            truncate(&AnalyticFunction::MonomialNormalized { n: 1, norm: 1.0 }, 2, Flavor::Sharp),
            Err(Error::NotTaylor)
        ));
    }

    #[test]
    fn kernel_examples() {
        let w = w0();
        let z = DiskPoint::new(0.5, 0.0).unwrap();
        for n in [0, 3, 50] {
            let v = kernel_partial_sum(&w, DiskPoint::ORIGIN, z, n).unwrap();
            assert!((v - c(1.0)).norm() < 1e-14);
        }
        let v = kernel_partial_sum(&w, z, z, 200).unwrap();
        assert!((v - c(16.0 / 9.0)).norm() < 1e-6);
        assert!((kernel_partial_sum(&w, z, DiskPoint::new(-0.1, 0.3).unwrap(), 0).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn kernel_tail_examples() {
        let w = w0();
        assert!((kernel_tail(&w, 0.5, 0).unwrap() - 4.0).abs() < 1e-13);
        let t10 = kernel_tail(&w, 0.5, 10).unwrap();
        let t11 = kernel_tail(&w, 0.5, 11).unwrap();
        assert!(t11 < t10);
        let t60 = kernel_tail(&w, 0.5, 60).unwrap();
        let t61 = kernel_tail(&w, 0.5, 61).unwrap();
        assert!((t61 / t60 - 0.5).abs() < 0.02);
        for alpha in [0.0, 1.0, 2.0] {
            let w = RadialWeight::standard(alpha).unwrap();
            let m = kernel_tail_threshold(&w, 0.99, 1e-10).unwrap();
            assert!(kernel_tail(&w, 0.99, m).unwrap() < 1e-10);
            assert!(kernel_tail(&w, 0.99, m - 1).unwrap() >= 1e-10);
        }
    }

    #[test]
    fn reproducing_examples() {
        let w = w0();
        let f = AnalyticFunction::taylor_real(&[1.0, 1.0]).unwrap();
        let z = DiskPoint::new(0.3, 0.0).unwrap();
        assert!(reproducing_check(&w, &f, z, 1).unwrap() < 1e-15);
        let id = AnalyticFunction::taylor_real(&[0.0, 1.0]).unwrap();
        assert!((reproducing_check(&w, &id, z, 0).unwrap() - 0.3).abs() < 1e-15);
        let g = AnalyticFunction::taylor(alloc::vec![c(0.2), Complex64::new(1.0, -0.5), c(0.0), c(0.7)]).unwrap();
        let zz = DiskPoint::new(-0.4, 0.35).unwrap();
        let spec = QuadratureSpec::default();
        for n in [1, 3] {
            let a = reproducing_check(&w, &g, zz, n).unwrap();
            let b = reproducing_check_quadrature(&w, &g, zz, n, &spec).unwrap();
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn remainder_is_zero_past_degree() {
        let w = w0();
        let f = AnalyticFunction::taylor_real(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        let chk = remainder_sup_check(&f, &w, 2.0, 4, 0.5, Flavor::Sharp, &QuadratureSpec::default()).unwrap();
        assert_eq!(chk.measured, 0.0);
    }

    #[test]
    fn monomial_ratios() {
        let w = w0();
        let spec = QuadratureSpec::default();
        let f = AnalyticFunction::taylor_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(truncation_norm_ratio(&f, &w, 2.0, 5, Flavor::Sharp, &spec).unwrap(), 1.0);
        assert_eq!(truncation_norm_ratio(&f, &w, 2.0, 2, Flavor::Sharp, &spec).unwrap(), 0.0);
        assert!(truncation_norm_ratio(&f, &w, 1.0, 2, Flavor::Sharp, &spec).is_err());
    }
}
