//! The operator `f -> u (f^{(n)} o phi)` and the pullback measure
//! `mu(E) = int_{phi^{-1}(E)} |u|^q nu dA`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::functions::AnalyticFunction;
use crate::geometry::{mobius, DiskPoint, Region};
use crate::math::{exp_m1, ln_1p, modulus, powf, sin_cos, PI};
use crate::quadrature::{integrate_layout, IntegralOutcome, Layout, Node, QuadratureSpec, Verdict};
use crate::weights::RadialWeight;

/// Points on `|z| = 0.9999` sampled by the self-map certificate.
pub const BOUNDARY_SAMPLES: usize = 4096;
const BOUNDARY_RADIUS: f64 = 0.9999;

/// Closed-form holomorphic functions used as symbols.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SymbolFn {
    Identity,
    Constant(Complex64),
    /// `lambda z`
    Scaling(Complex64),
    /// `z^k`
    Power(u32),
    /// `(b - z) / (1 - conj(b) z)`
    Blaschke(DiskPoint),
    Taylor(Vec<Complex64>),
}

impl SymbolFn {
    /// Parses `identity`, `constant:<c>`, `scaling:<c>`, `power:<k>`,
    /// `blaschke:<c>` or `taylor:<c>,<c>,...`; `<c>` is `x`, `yi`, `x+yi`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), a.trim()),
            None => (s, ""),
        };
        match head {
            "identity" | "id" => Ok(SymbolFn::Identity),
            "constant" => Ok(SymbolFn::Constant(parse_complex(arg)?)),
            "scaling" => Ok(SymbolFn::Scaling(parse_complex(arg)?)),
            "power" => arg
                .parse::<u32>()
                .ok()
                .filter(|&k| k >= 1)
                .map(SymbolFn::Power)
                .ok_or_else(|| invalid(format!("bad power exponent '{arg}'"))),
            "blaschke" => {
                let b = parse_complex(arg)?;
                Ok(SymbolFn::Blaschke(DiskPoint::new(b.re, b.im)?))
            }
            "taylor" => {
                let coeffs = arg.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
                if coeffs.is_empty() {
                    return Err(invalid("taylor symbol needs coefficients"));
                }
                Ok(SymbolFn::Taylor(coeffs))
            }
            _ => Err(invalid(format!("unknown symbol '{s}'"))),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            SymbolFn::Identity => z,
            SymbolFn::Constant(c) => *c,
            SymbolFn::Scaling(l) => l * z,
            SymbolFn::Power(k) => crate::math::cpowi(z, *k),
            SymbolFn::Blaschke(b) => mobius(b.to_complex(), z),
            SymbolFn::Taylor(a) => a.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c),
        }
    }

    /// Image node with `1 - |phi(z)|` computed from the source gap where a
    /// cancellation-free formula exists.
    pub fn image(&self, node: &Node) -> Node {
        let w = self.eval(node.z);
        let gap = match self {
            SymbolFn::Identity => node.gap,
            SymbolFn::Scaling(l) => {
                let m = modulus(*l);
                (1.0 - m) + m * node.gap
            }
            SymbolFn::Power(k) => -exp_m1(*k as f64 * ln_1p(-node.gap)),
            SymbolFn::Blaschke(b) => {
                let bc = b.to_complex();
                let den = (Complex64::new(1.0, 0.0) - bc.conj() * node.z).norm_sqr();
                let s = (1.0 - bc.norm_sqr()) * node.one_minus_mod_sq() / den;
                s / (1.0 + modulus(w))
            }
            _ => 1.0 - modulus(w),
        };
        Node {
            z: w,
            modulus: 1.0 - gap,
            gap,
        }
    }

    /// `k` with `f(e^{it} z) = e^{ikt} f(z)` and `|f|` radial, when such a
    /// monomial structure exists (`k = 0` for constants).
    fn monomial_degree(&self) -> Option<u32> {
        match self {
            SymbolFn::Identity | SymbolFn::Scaling(_) => Some(1),
            SymbolFn::Constant(_) => Some(0),
            SymbolFn::Power(k) => Some(*k),
            SymbolFn::Taylor(a) => {
                let nz: Vec<usize> = (0..a.len()).filter(|&i| a[i].norm_sqr() > 0.0).collect();
                match nz.len() {
                    0 => Some(0),
                    1 => Some(nz[0] as u32),
                    _ => None,
                }
            }
            SymbolFn::Blaschke(b) if b.is_origin() => Some(1),
            SymbolFn::Blaschke(_) => None,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            SymbolFn::Constant(c) => c.norm_sqr() == 0.0,
            SymbolFn::Scaling(l) => l.norm_sqr() == 0.0,
            SymbolFn::Taylor(a) => a.iter().all(|c| c.norm_sqr() == 0.0),
            _ => false,
        }
    }

    /// Points of the disk mapped to `a`, where integrands concentrate.
    pub fn preimages(&self, a: DiskPoint) -> Vec<DiskPoint> {
        let ac = a.to_complex();
        let pts: Vec<Complex64> = match self {
            SymbolFn::Identity => alloc::vec![ac],
            SymbolFn::Scaling(l) if l.norm_sqr() > 0.0 => alloc::vec![ac / l],
            SymbolFn::Blaschke(b) => alloc::vec![mobius(b.to_complex(), ac)],
            SymbolFn::Power(k) if !a.is_origin() => {
                let r = powf(a.modulus(), 1.0 / *k as f64);
                (0..*k)
                    .map(|j| {
                        let t = (a.arg() + 2.0 * PI * j as f64) / *k as f64;
                        let (s, c) = sin_cos(t);
                        Complex64::new(r * c, r * s)
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        pts.into_iter().filter_map(|z| DiskPoint::from_complex(z).ok()).collect()
    }
}

impl fmt::Display for SymbolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolFn::Identity => write!(f, "identity"),
            SymbolFn::Constant(c) => write!(f, "constant:{}", fmt_complex(*c)),
            SymbolFn::Scaling(c) => write!(f, "scaling:{}", fmt_complex(*c)),
            SymbolFn::Power(k) => write!(f, "power:{k}"),
            SymbolFn::Blaschke(b) => write!(f, "blaschke:{}", fmt_complex(b.to_complex())),
            SymbolFn::Taylor(a) => {
                write!(f, "taylor:")?;
                for (i, c) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", fmt_complex(*c))?;
                }
                Ok(())
            }
        }
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Parses `x`, `yi`, `x+yi` or `x-yi`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let bad = || invalid(format!("cannot parse complex number '{s}'"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(body) = s.strip_suffix('i') {
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                split = Some(i);
                break;
            }
        }
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
        Ok(Complex64::new(re, im))
    } else {
        s.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad())
    }
}

/// `D^n_{phi,u}` with a certified self-map `phi`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperatorSymbol {
    pub phi: SymbolFn,
    pub u: SymbolFn,
    pub n: u32,
    /// Largest `|phi|` seen by the certificate.
    pub sampled_sup: f64,
}

impl OperatorSymbol {
    /// Checks `|phi| < 1` on a polar grid plus `BOUNDARY_SAMPLES` points on
    /// `|z| = 0.9999`.
    pub fn new(phi: SymbolFn, u: SymbolFn, n: u32) -> Result<Self> {
        let mut sup = 0.0f64;
        let mut check = |z: Complex64| -> Result<()> {
            let node = Node::from_complex(z);
            let img = phi.image(&node);
            if !(img.gap > 0.0) || !img.z.re.is_finite() || !img.z.im.is_finite() {
                return Err(Error::SelfMapViolation { re: z.re, im: z.im });
            }
            sup = sup.max(img.modulus);
            Ok(())
        };
        for j in 1..=20 {
            let r = 1.0 - powf(2.0, -(j as f64));
            for k in 0..64 {
                let (s, c) = sin_cos(2.0 * PI * (k as f64 + 0.5) / 64.0);
                check(Complex64::new(r * c, r * s))?;
            }
        }
        check(Complex64::new(0.0, 0.0))?;
        for k in 0..BOUNDARY_SAMPLES {
            let (s, c) = sin_cos(2.0 * PI * k as f64 / BOUNDARY_SAMPLES as f64);
            check(Complex64::new(BOUNDARY_RADIUS * c, BOUNDARY_RADIUS * s))?;
        }
        Ok(OperatorSymbol {
            phi,
            u,
            n,
            sampled_sup: sup,
        })
    }

    pub fn identity() -> Self {
        Self::new(SymbolFn::Identity, SymbolFn::Constant(Complex64::new(1.0, 0.0)), 0).expect("identity is a self-map")
    }

    /// Whether `B(e^{it} a)` does not depend on `t` for radial weights.
    pub fn rotation_invariant(&self) -> bool {
        let u_ok = self.u.monomial_degree().is_some();
        let phi_ok = self.phi.is_zero() || matches!(self.phi.monomial_degree(), Some(k) if k >= 1);
        u_ok && phi_ok
    }

    /// `u(z) f^{(n)}(phi(z))`.
    pub fn apply(&self, f: &AnalyticFunction, z: DiskPoint) -> Result<Complex64> {
        let node = Node::from_complex(z.to_complex());
        let img = self.phi.image(&node);
        if !(img.gap > 0.0) {
            return Err(Error::SelfMapViolation { re: z.re, im: z.im });
        }
        Ok(self.u.eval(node.z) * f.derivative_at(self.n, img.z))
    }

    /// Source-side foci for integrands peaked at the image points `targets`.
    pub fn source_foci(&self, targets: &[DiskPoint]) -> Vec<DiskPoint> {
        targets.iter().flat_map(|&a| self.phi.preimages(a)).collect()
    }
}

/// Quadrature outcome for `||D f||^q_{A^q_nu}`.
pub fn image_norm_outcome(
    op: &OperatorSymbol,
    f: &AnalyticFunction,
    nu: &RadialWeight,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralOutcome> {
    if !(q > 0.0) {
        return Err(invalid("q must be positive"));
    }
    let fq = f.power_modulus(op.n, q);
    let density = |node: &Node| {
        let u = op.u.eval(node.z).norm_sqr();
        if u == 0.0 {
            return 0.0;
        }
        let img = op.phi.image(node);
        let v = fq.at(img.z);
        if v == 0.0 {
            0.0
        } else {
            let uq = crate::math::pow_pos(u, 0.5 * q);
            uq * v * nu.density_gap(node.gap)
        }
    };
    let foci = op.source_foci(&f.foci());
    integrate_layout(Layout::full_disk(spec, &foci), &density, None::<&fn(&Node) -> bool>, spec)
}

/// `||D^n_{phi,u} f||_{A^q_nu}`.
pub fn image_norm(op: &OperatorSymbol, f: &AnalyticFunction, nu: &RadialWeight, q: f64, spec: &QuadratureSpec) -> Result<f64> {
    let out = image_norm_outcome(op, f, nu, q, spec)?;
    if out.verdict == Verdict::Divergent {
        return Err(Error::Divergent {
            last_partial: out.value,
        });
    }
    Ok(powf(out.value.max(0.0), 1.0 / q))
}

/// `mu^nu_{phi,u}` for exponent `q`.
#[derive(Debug, Clone)]
pub struct PullbackMeasure {
    pub symbol: OperatorSymbol,
    pub nu: RadialWeight,
    pub q: f64,
    /// `mu(D) = int |u|^q nu dA`
    pub total_mass: f64,
}

impl PullbackMeasure {
    pub fn new(symbol: OperatorSymbol, nu: RadialWeight, q: f64, spec: &QuadratureSpec) -> Result<Self> {
        if !(q > 0.0) {
            return Err(invalid("q must be positive"));
        }
        let mut pm = PullbackMeasure {
            symbol,
            nu,
            q,
            total_mass: 0.0,
        };
        let out = pm.source_integral(Layout::full_disk(spec, &[]), |_| 1.0, spec)?;
        if out.verdict == Verdict::Divergent {
            return Err(Error::Divergent {
                last_partial: out.value,
            });
        }
        pm.total_mass = out.value;
        Ok(pm)
    }

    #[inline]
    fn weight(&self, node: &Node) -> f64 {
        let u = self.symbol.u.eval(node.z).norm();
        if u == 0.0 {
            0.0
        } else {
            powf(u, self.q) * self.nu.density_gap(node.gap)
        }
    }

    fn source_integral<G>(&self, layout: Layout, g: G, spec: &QuadratureSpec) -> Result<IntegralOutcome>
    where
        G: Fn(&Node) -> f64 + Sync,
    {
        let density = |node: &Node| {
            let wt = self.weight(node);
            if wt == 0.0 {
                0.0
            } else {
                wt * g(&self.symbol.phi.image(node))
            }
        };
        integrate_layout(layout, &density, None::<&fn(&Node) -> bool>, spec)
    }
}

/// `int g dmu`, evaluated as `int g(phi(z)) |u(z)|^q nu(z) dA(z)`. The
/// node passed to `g` is the image point.
pub fn pullback_integrate<G>(pm: &PullbackMeasure, g: G, spec: &QuadratureSpec) -> Result<IntegralOutcome>
where
    G: Fn(&Node) -> f64 + Sync,
{
    pm.source_integral(Layout::full_disk(spec, &[]), g, spec)
}

/// As [`pullback_integrate`], with the source grid graded towards the
/// preimages of `targets`.
pub fn pullback_integrate_focused<G>(
    pm: &PullbackMeasure,
    g: G,
    targets: &[DiskPoint],
    spec: &QuadratureSpec,
) -> Result<IntegralOutcome>
where
    G: Fn(&Node) -> f64 + Sync,
{
    let foci = pm.symbol.source_foci(targets);
    pm.source_integral(Layout::full_disk(spec, &foci), g, spec)
}

enum SourceRegion {
    Empty,
    All,
    Fitted(Layout),
    Masked,
}

fn preimage(phi: &SymbolFn, reg: &Region, spec: &QuadratureSpec) -> SourceRegion {
    if matches!(reg, Region::FullDisk) {
        return SourceRegion::All;
    }
    if let Region::CarlesonSquare { z } = reg {
        if z.is_origin() {
            return SourceRegion::All;
        }
    }
    match phi {
        SymbolFn::Identity => SourceRegion::Fitted(Layout::for_region(reg, spec, &[])),
        SymbolFn::Constant(c) => {
            if reg.contains(DiskPoint { re: c.re, im: c.im }) {
                SourceRegion::All
            } else {
                SourceRegion::Empty
            }
        }
        SymbolFn::Scaling(l) if l.norm_sqr() > 0.0 => {
            let lm = modulus(*l);
            let rot = l.arg();
            match *reg {
                Region::PseudoDisk { center, radius } => {
                    let (c, r) = Region::euclidean_disk(center, radius);
                    SourceRegion::Fitted(Layout::clipped(c / l, r / lm, spec))
                }
                Region::CarlesonSquare { z } => {
                    let rz = z.modulus() / lm;
                    if rz >= 1.0 {
                        return SourceRegion::Empty;
                    }
                    let half = 0.5 * (1.0 - z.modulus());
                    let t = z.arg() - rot;
                    SourceRegion::Fitted(Layout::polar(1.0 - rz, t - half, t + half, 2, &[], spec.radial_rings))
                }
                Region::AnnulusComplement { radius } => {
                    let rr = radius / lm;
                    if rr >= 1.0 {
                        SourceRegion::Empty
                    } else {
                        SourceRegion::Fitted(Layout::polar(1.0 - rr, 0.0, 2.0 * PI, spec.angular_sectors, &[], spec.radial_rings))
                    }
                }
                Region::FullDisk => SourceRegion::All,
            }
        }
        SymbolFn::Blaschke(b) => match *reg {
            Region::PseudoDisk { center, radius } => {
                let c = mobius(b.to_complex(), center.to_complex());
                match DiskPoint::from_complex(c) {
                    Ok(cp) => SourceRegion::Fitted(Layout::for_region(
                        &Region::PseudoDisk { center: cp, radius },
                        spec,
                        &[],
                    )),
                    Err(_) => SourceRegion::Masked,
                }
            }
            _ => SourceRegion::Masked,
        },
        _ => SourceRegion::Masked,
    }
}

/// `mu(reg)`.
pub fn pullback_region_mass(pm: &PullbackMeasure, reg: &Region, spec: &QuadratureSpec) -> Result<f64> {
    Ok(pullback_region_outcome(pm, reg, spec)?.value)
}

/// Quadrature outcome behind [`pullback_region_mass`].
pub fn pullback_region_outcome(pm: &PullbackMeasure, reg: &Region, spec: &QuadratureSpec) -> Result<IntegralOutcome> {
    let weight = |node: &Node| pm.weight(node);
    let out = match preimage(&pm.symbol.phi, reg, spec) {
        SourceRegion::Empty => IntegralOutcome {
            value: 0.0,
            error_estimate: 0.0,
            verdict: Verdict::Converged,
            partial_values: Vec::new(),
            cells: 0,
            evaluations: 0,
        },
        SourceRegion::All => {
            return Ok(IntegralOutcome {
                value: pm.total_mass,
                error_estimate: 0.0,
                verdict: Verdict::Converged,
                partial_values: Vec::new(),
                cells: 0,
                evaluations: 0,
            })
        }
        SourceRegion::Fitted(layout) => integrate_layout(layout, &weight, None::<&fn(&Node) -> bool>, spec)?,
        SourceRegion::Masked => {
            let phi = &pm.symbol.phi;
            let mask = |node: &Node| {
                let w = phi.eval(node.z);
                reg.contains(DiskPoint { re: w.re, im: w.im })
            };
            integrate_layout(Layout::full_disk(spec, &[]), &weight, Some(&mask), spec)?
        }
    };
    if out.verdict == Verdict::Divergent {
        return Err(Error::Divergent {
            last_partial: out.value,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn one() -> SymbolFn {
        SymbolFn::Constant(Complex64::new(1.0, 0.0))
    }

    #[test]
    fn parse_grammar() {
        assert_eq!(SymbolFn::parse("scaling:0.5").unwrap(), SymbolFn::Scaling(Complex64::new(0.5, 0.0)));
        assert_eq!(SymbolFn::parse("constant:0.3").unwrap(), SymbolFn::Constant(Complex64::new(0.3, 0.0)));
        assert_eq!(SymbolFn::parse("power:2").unwrap(), SymbolFn::Power(2));
        assert_eq!(SymbolFn::parse(" blaschke:0.5 ").unwrap(), SymbolFn::Blaschke(DiskPoint::new(0.5, 0.0).unwrap()));
        assert_eq!(
            SymbolFn::parse("taylor:1,0.5-2i,1e-3+i").unwrap(),
            SymbolFn::Taylor(alloc::vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, -2.0),
                Complex64::new(1e-3, 1.0)
            ])
        );
        assert!(SymbolFn::parse("power:0").is_err());
        assert!(SymbolFn::parse("blaschke:1.5").is_err());
        assert!(SymbolFn::parse("spiral:2").is_err());
        let s = SymbolFn::parse("taylor:1,0.5-2i").unwrap();
        assert_eq!(SymbolFn::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn certificate_rejects_non_self_maps() {
        let bad = SymbolFn::parse("taylor:0,1.2").unwrap();
        assert!(matches!(OperatorSymbol::new(bad, one(), 0), Err(Error::SelfMapViolation { .. })));
        assert!(OperatorSymbol::new(SymbolFn::Constant(Complex64::new(1.0, 0.0)), one(), 0).is_err());
        assert!(OperatorSymbol::new(SymbolFn::parse("taylor:0.2,0.5,0.2").unwrap(), one(), 1).is_ok());
    }

    #[test]
    fn image_gaps_are_accurate() {
        let node = Node {
            z: Complex64::new(1.0 - 1e-12, 0.0),
            modulus: 1.0 - 1e-12,
            gap: 1e-12,
        };
        let g = SymbolFn::Power(3).image(&node).gap;
        assert!((g - 3e-12).abs() < 1e-22);
        let b = SymbolFn::Blaschke(DiskPoint::new(0.3, 0.2).unwrap()).image(&node);
        let direct = 1.0 - mobius(Complex64::new(0.3, 0.2), node.z).norm();
        assert!((b.gap - direct).abs() < 1e-15);
    }

    #[test]
    fn apply_examples() {
        let op = OperatorSymbol::new(SymbolFn::Power(2), SymbolFn::Identity, 1).unwrap();
        let f = AnalyticFunction::taylor_real(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        let v = op.apply(&f, DiskPoint::new(0.5, 0.0).unwrap()).unwrap();
        assert!((v - Complex64::new(0.09375, 0.0)).norm() < 1e-15);
        let id = OperatorSymbol::identity();
        let z = DiskPoint::new(0.2, -0.4).unwrap();
        assert_eq!(id.apply(&f, z).unwrap(), f.eval(z.to_complex()));
        let op2 = OperatorSymbol::new(SymbolFn::Identity, one(), 2).unwrap();
        let lin = AnalyticFunction::taylor_real(&[1.0, 3.0]).unwrap();
        assert_eq!(op2.apply(&lin, z).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn image_norm_examples() {
        let w = RadialWeight::standard(0.0).unwrap();
        let f = AnalyticFunction::taylor_real(&[0.0, 0.0, 1.0]).unwrap();
        let d1 = OperatorSymbol::new(SymbolFn::Identity, one(), 1).unwrap();
        assert!((image_norm(&d1, &f, &w, 2.0, &spec()).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        let c0 = OperatorSymbol::new(SymbolFn::Constant(Complex64::new(0.0, 0.0)), one(), 0).unwrap();
        let g = AnalyticFunction::taylor_real(&[0.7, 2.0, -1.0]).unwrap();
        assert!((image_norm(&c0, &g, &w, 2.0, &spec()).unwrap() - 0.7).abs() < 1e-9);
    }

    #[test]
    fn pullback_examples() {
        let w = RadialWeight::standard(0.0).unwrap();
        let sq = OperatorSymbol::new(SymbolFn::Power(2), one(), 0).unwrap();
        let pm = PullbackMeasure::new(sq, w.clone(), 2.0, &spec()).unwrap();
        assert!((pm.total_mass - 1.0).abs() < 1e-12);
        let out = pullback_integrate(&pm, |n| n.modulus * n.modulus, &spec()).unwrap();
        assert!((out.value - 1.0 / 3.0).abs() < 1e-10);

        let id = PullbackMeasure::new(OperatorSymbol::identity(), w.clone(), 3.0, &spec()).unwrap();
        let pd = Region::pseudo_disk(DiskPoint::ORIGIN, 0.5).unwrap();
        assert!((pullback_region_mass(&id, &pd, &spec()).unwrap() - 0.25).abs() < 1e-10);

        let c = OperatorSymbol::new(SymbolFn::Constant(Complex64::new(0.3, 0.0)), one(), 0).unwrap();
        let pc = PullbackMeasure::new(c, w, 2.0, &spec()).unwrap();
        let far = Region::pseudo_disk(DiskPoint::new(-0.5, 0.0).unwrap(), 0.3).unwrap();
        assert_eq!(pullback_region_mass(&pc, &far, &spec()).unwrap(), 0.0);
        assert!((pullback_region_mass(&pc, &Region::FullDisk, &spec()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fitted_and_masked_preimages_agree() {
        let w = RadialWeight::standard(1.0).unwrap();
        let u = SymbolFn::parse("taylor:1,0.5").unwrap();
        let regions = [
            Region::pseudo_disk(DiskPoint::new(0.3, 0.2).unwrap(), 0.4).unwrap(),
            Region::carleson_square(DiskPoint::new(0.0, 0.4).unwrap()),
            Region::annulus_complement(0.35).unwrap(),
        ];
        for phi in [
            SymbolFn::Scaling(Complex64::new(0.6, 0.2)),
            SymbolFn::Blaschke(DiskPoint::new(-0.2, 0.4).unwrap()),
            SymbolFn::Identity,
        ] {
            let op = OperatorSymbol::new(phi.clone(), u.clone(), 0).unwrap();
            let pm = PullbackMeasure::new(op, w.clone(), 2.0, &spec()).unwrap();
            for reg in &regions {
                let fitted = pullback_region_mass(&pm, reg, &spec()).unwrap();
                let mask = |node: &Node| {
                    let z = phi.eval(node.z);
                    reg.contains(DiskPoint { re: z.re, im: z.im })
                };
                let masked = integrate_layout(Layout::full_disk(&spec(), &[]), &|n: &Node| pm.weight(n), Some(&mask), &spec())
                    .unwrap()
                    .value;
                assert!((fitted - masked).abs() < 2e-3 * fitted.max(1e-3), "{phi} {reg:?}: {fitted} vs {masked}");
            }
        }
    }
}
