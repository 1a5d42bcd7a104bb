//! Computable criteria for `D^n_{phi,u} : A^p_omega -> A^q_nu`: order
//! boundedness, boundedness through test-function integrals, the Carleson
//! quantity and its vanishing tail, the essential-norm tail, and the
//! weakly-null probe.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::functions::{bergman_norm, make_test_function_variant, DeltaChoice};
use crate::geometry::{DiskPoint, Region};
use crate::math::{linear_fit, ln, pow_pos, powf, sin_cos, PI};
use crate::operators::{image_norm_outcome, pullback_region_outcome, OperatorSymbol, PullbackMeasure};
use crate::quadrature::{integrate_layout, IntegralOutcome, Layout, Node, QuadratureSpec, Verdict};
use crate::weights::RadialWeight;

/// A radial-maximum sequence counts as growing when its last three ratios
/// all reach this factor.
pub const GROWTH_TREND_RATIO: f64 = 1.2;

/// Decay threshold `E_last <= COMPACT_DECAY * E_0` for compact verdicts.
pub const COMPACT_DECAY: f64 = 1e-6;

/// Vanishing Carleson tail: last tail value relative to the first.
pub const VANISHING_RATIO: f64 = 1e-3;

/// Relative level below which one side of the equivalence gap counts as
/// zero and the point is skipped.
pub const GAP_VANISHING_FLOOR: f64 = 1e-12;

/// Largest allowed max/min of test-function norms in the compact probe.
pub const TEST_FAMILY_SPREAD: f64 = 20.0;

/// Points used by the log-log decay fit of tail sequences.
pub const DECAY_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CriterionKind {
    OrderBounded,
    Bounded,
    Carleson,
    CarlesonVanishing,
    EssentialNorm,
    CompactProbe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CriterionVerdict {
    Holds,
    Fails,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointValue {
    pub point: DiskPoint,
    pub value: f64,
    pub error_estimate: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailPoint {
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub outcome: Option<IntegralOutcome>,
    pub delta: Option<DeltaChoice>,
    pub carleson_radius: Option<f64>,
    pub tail: Vec<TailPoint>,
    pub fitted_exponent: Option<f64>,
    pub angles_per_radius: Option<usize>,
    /// max/min of test-function norms along the probe sequence.
    pub test_norm_spread: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriterionResult {
    pub kind: CriterionKind,
    /// Finite value, or the last partial value when `infinite` is set.
    pub value: f64,
    pub infinite: bool,
    pub per_point: Vec<PointValue>,
    pub verdict: CriterionVerdict,
    pub diagnostics: Diagnostics,
}

/// An operator together with its source and target spaces.
#[derive(Debug, Clone)]
pub struct Problem {
    pub op: OperatorSymbol,
    /// Source weight.
    pub w: RadialWeight,
    pub p: f64,
    /// Target weight.
    pub nu: RadialWeight,
    pub q: f64,
}

impl Problem {
    pub fn new(op: OperatorSymbol, w: RadialWeight, p: f64, nu: RadialWeight, q: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
            return Err(invalid("exponents p and q must be positive"));
        }
        Ok(Problem { op, w, p, nu, q })
    }

    fn require_p_le_q(&self) -> Result<()> {
        if self.p > self.q {
            return Err(Error::UnsupportedRegime(format!(
                "p = {} > q = {}; only 0 < p <= q is covered",
                self.p, self.q
            )));
        }
        Ok(())
    }

    /// `omega(S(z))`
    fn box_mass(&self, z: DiskPoint) -> Result<f64> {
        self.w.carleson_mass_at(z.is_origin(), 1.0 - z.modulus())
    }
}

/// Points `r e^{i 2 pi k / angles}` for each radius (a single point at the
/// origin for `r = 0`).
pub fn circle_grid(radii: &[f64], angles: usize) -> Result<Vec<DiskPoint>> {
    let mut out = Vec::new();
    for &r in radii {
        if r == 0.0 {
            out.push(DiskPoint::ORIGIN);
            continue;
        }
        for k in 0..angles.max(1) {
            let (s, c) = sin_cos(2.0 * PI * k as f64 / angles.max(1) as f64);
            out.push(DiskPoint::new(r * c, r * s)?);
        }
    }
    Ok(out)
}

/// `1 - 2^-j` for `j = 1..=levels`.
pub fn dyadic_radii(levels: u32) -> Vec<f64> {
    (1..=levels).map(|j| 1.0 - powf(2.0, -(j as f64))).collect()
}

/// Default number of angles on each circle of the tail grids.
pub const DEFAULT_ANGLES: usize = 16;

/// Default radii `1 - 2^-j`, `j <= 14`, for limits `|a| -> 1`.
pub fn default_tail_radii() -> Vec<f64> {
    dyadic_radii(14)
}

/// Angles per circle: one when `op` commutes with rotations.
pub fn angles_for(op: &OperatorSymbol) -> usize {
    if op.rotation_invariant() {
        1
    } else {
        DEFAULT_ANGLES
    }
}

fn verdict_of(outcomes: &[Verdict]) -> CriterionVerdict {
    if outcomes.contains(&Verdict::Divergent) {
        CriterionVerdict::Fails
    } else if outcomes.contains(&Verdict::Undecided) {
        CriterionVerdict::Undecided
    } else {
        CriterionVerdict::Holds
    }
}

/// `(radius, max over points on that radius)`, radii ascending.
fn radial_maxima(points: &[PointValue]) -> Vec<TailPoint> {
    let mut out: Vec<TailPoint> = Vec::new();
    let mut sorted: Vec<&PointValue> = points.iter().collect();
    sorted.sort_by(|a, b| a.point.modulus().total_cmp(&b.point.modulus()));
    for pv in sorted {
        let r = pv.point.modulus();
        match out.last_mut() {
            Some(t) if (t.radius - r).abs() <= 1e-14 => t.value = t.value.max(pv.value),
            _ => out.push(TailPoint { radius: r, value: pv.value }),
        }
    }
    out
}

fn growth_trend(seq: &[TailPoint]) -> bool {
    if seq.len() < 4 {
        return false;
    }
    seq[seq.len() - 4..]
        .windows(2)
        .all(|w| w[0].value > 0.0 && w[1].value >= GROWTH_TREND_RATIO * w[0].value)
}

fn decays_to_zero(seq: &[TailPoint]) -> bool {
    let (Some(first), Some(last)) = (seq.first(), seq.last()) else {
        return false;
    };
    let monotone = seq.len() < 4 || seq[seq.len() - 4..].windows(2).all(|w| w[1].value < w[0].value);
    last.value <= COMPACT_DECAY * first.value && monotone
}

/// Slope of `ln value` against `ln(1 - radius)` over the last positive points.
fn decay_exponent(seq: &[TailPoint]) -> Option<f64> {
    let pts: Vec<&TailPoint> = seq.iter().filter(|t| t.value > 0.0 && t.radius < 1.0).collect();
    let start = pts.len().saturating_sub(DECAY_FIT_POINTS);
    let xs: Vec<f64> = pts[start..].iter().map(|t| ln(1.0 - t.radius)).collect();
    let ys: Vec<f64> = pts[start..].iter().map(|t| ln(t.value)).collect();
    linear_fit(&xs, &ys).map(|(slope, _)| slope)
}

fn scale_outcome(mut out: IntegralOutcome, factor: f64) -> IntegralOutcome {
    out.value *= factor;
    out.error_estimate *= factor;
    for v in &mut out.partial_values {
        *v *= factor;
    }
    out
}

/// `h(z) = |u(z)| / ((1 - |phi(z)|^2)^n omega(S(phi(z)))^{1/p})`.
pub fn order_majorant(pb: &Problem, z: DiskPoint) -> Result<f64> {
    let node = Node::from_complex(z.to_complex());
    let img = pb.op.phi.image(&node);
    if !(img.gap > 0.0) {
        return Err(Error::SelfMapViolation { re: z.re, im: z.im });
    }
    let u = pb.op.u.eval(node.z).norm();
    let mass = pb.w.carleson_mass_at(is_origin(img.z), img.gap)?;
    Ok(u / (powf(img.one_minus_mod_sq(), pb.op.n as f64) * powf(mass, 1.0 / pb.p)))
}

fn is_origin(z: Complex64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

/// `int |u|^q nu / ((1 - |phi|^2)^{nq} omega(S(phi))^{q/p}) dA`; holds iff
/// the integral converges.
pub fn order_bounded_criterion(pb: &Problem, spec: &QuadratureSpec) -> Result<CriterionResult> {
    let (n, p, q) = (pb.op.n as f64, pb.p, pb.q);
    let density = |node: &Node| {
        let u = pb.op.u.eval(node.z).norm();
        if u == 0.0 {
            return 0.0;
        }
        let img = pb.op.phi.image(node);
        let mass = pb.w.carleson_mass_at(is_origin(img.z), img.gap).unwrap_or(f64::NAN);
        powf(u, q) * pb.nu.density_gap(node.gap) / (powf(img.one_minus_mod_sq(), n * q) * powf(mass, q / p))
    };
    let out = integrate_layout(Layout::full_disk(spec, &[]), &density, None::<&fn(&Node) -> bool>, spec)?;
    let verdict = match out.verdict {
        Verdict::Converged => CriterionVerdict::Holds,
        Verdict::Divergent => CriterionVerdict::Fails,
        Verdict::Undecided => CriterionVerdict::Undecided,
    };
    Ok(CriterionResult {
        kind: CriterionKind::OrderBounded,
        value: out.value,
        infinite: out.verdict == Verdict::Divergent,
        per_point: Vec::new(),
        verdict,
        diagnostics: Diagnostics {
            outcome: Some(out),
            ..Diagnostics::default()
        },
    })
}

/// `B(a) = (1-|a|)^{delta q} / omega(S(a))^{q/p} *
/// int |u|^q nu / |1 - conj(a) phi|^{(delta+n) q} dA`.
pub fn sup_integral(pb: &Problem, delta: f64, a: DiskPoint, spec: &QuadratureSpec) -> Result<IntegralOutcome> {
    let (n, q) = (pb.op.n as f64, pb.q);
    let ab = a.to_complex().conj();
    let expo = -0.5 * (delta + n) * q;
    let density = |node: &Node| {
        let u = pb.op.u.eval(node.z).norm_sqr();
        if u == 0.0 {
            return 0.0;
        }
        let w = Complex64::new(1.0, 0.0) - ab * pb.op.phi.eval(node.z);
        pow_pos(u, 0.5 * q) * pb.nu.density_gap(node.gap) * pow_pos(w.norm_sqr(), expo)
    };
    let foci = pb.op.source_foci(&[a]);
    let factor = powf(1.0 - a.modulus(), delta * q) / powf(pb.box_mass(a)?, q / pb.p);
    // The cap bounds B(a), not the unscaled integral.
    let mut local = *spec;
    if factor > 0.0 && factor.is_finite() {
        local.divergence_cap = spec.divergence_cap / factor;
    }
    let out = integrate_layout(Layout::full_disk(spec, &foci), &density, None::<&fn(&Node) -> bool>, &local)?;
    Ok(scale_outcome(out, factor))
}

fn sup_integral_points(pb: &Problem, delta: f64, grid: &[DiskPoint], spec: &QuadratureSpec) -> Result<Vec<PointValue>> {
    grid.iter()
        .map(|&a| {
            let out = sup_integral(pb, delta, a, spec)?;
            Ok(PointValue {
                point: a,
                value: out.value,
                error_estimate: out.error_estimate,
                verdict: out.verdict,
            })
        })
        .collect()
}

/// Default grid for boundedness: the origin and circles `1 - 2^-j`.
pub fn default_a_grid(op: &OperatorSymbol) -> Vec<DiskPoint> {
    let mut radii = alloc::vec![0.0];
    radii.extend(default_tail_radii());
    circle_grid(&radii, angles_for(op)).expect("radii lie in the disk")
}

/// Maximum of `B(a)` over `a_grid`; holds iff every `B(a)` is finite and the
/// radial maxima show no growth trend.
pub fn boundedness_criterion(
    pb: &Problem,
    delta: &DeltaChoice,
    a_grid: &[DiskPoint],
    spec: &QuadratureSpec,
) -> Result<CriterionResult> {
    pb.require_p_le_q()?;
    if a_grid.is_empty() {
        return Err(invalid("a-grid is empty"));
    }
    let per_point = sup_integral_points(pb, delta.delta, a_grid, spec)?;
    let verdicts: Vec<Verdict> = per_point.iter().map(|p| p.verdict).collect();
    let tail = radial_maxima(&per_point);
    let mut verdict = verdict_of(&verdicts);
    let mut notes = Vec::new();
    if verdict != CriterionVerdict::Fails && growth_trend(&tail) {
        verdict = CriterionVerdict::Fails;
        notes.push(String::from("radial maxima of B(a) grow towards the boundary"));
    }
    let infinite = verdicts.contains(&Verdict::Divergent);
    let value = per_point.iter().map(|p| p.value).fold(0.0, f64::max);
    Ok(CriterionResult {
        kind: CriterionKind::Bounded,
        value,
        infinite,
        per_point,
        verdict,
        diagnostics: Diagnostics {
            delta: Some(*delta),
            tail,
            notes,
            ..Diagnostics::default()
        },
    })
}

/// `mu(Delta(z, r)) / (omega(S(z))^{q/p} (1 - |z|)^{nq})` over `z_grid`,
/// with the tail `sup_{|z| >= r_j}` in the diagnostics.
pub fn carleson_criterion(pb: &Problem, r: f64, z_grid: &[DiskPoint], spec: &QuadratureSpec) -> Result<CriterionResult> {
    let pm = PullbackMeasure::new(pb.op.clone(), pb.nu.clone(), pb.q, spec)?;
    carleson_with_measure(pb, &pm, r, z_grid, spec)
}

fn carleson_point(pb: &Problem, pm: &PullbackMeasure, r: f64, z: DiskPoint, spec: &QuadratureSpec) -> Result<PointValue> {
    let reg = Region::pseudo_disk(z, r)?;
    let out = pullback_region_outcome(pm, &reg, spec)?;
    let g = 1.0 - z.modulus();
    let den = powf(pb.box_mass(z)?, pb.q / pb.p) * powf(g, pb.op.n as f64 * pb.q);
    Ok(PointValue {
        point: z,
        value: out.value / den,
        error_estimate: out.error_estimate / den,
        verdict: out.verdict,
    })
}

fn carleson_with_measure(
    pb: &Problem,
    pm: &PullbackMeasure,
    r: f64,
    z_grid: &[DiskPoint],
    spec: &QuadratureSpec,
) -> Result<CriterionResult> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("Carleson radius must lie in (0, 1)"));
    }
    if z_grid.is_empty() {
        return Err(invalid("z-grid is empty"));
    }
    let per_point = z_grid
        .iter()
        .map(|&z| carleson_point(pb, pm, r, z, spec))
        .collect::<Result<Vec<_>>>()?;
    let maxima = radial_maxima(&per_point);
    // sup over |z| >= r_j
    let mut tail = maxima.clone();
    for i in (0..tail.len().saturating_sub(1)).rev() {
        tail[i].value = tail[i].value.max(tail[i + 1].value);
    }
    let verdicts: Vec<Verdict> = per_point.iter().map(|p| p.verdict).collect();
    let mut verdict = verdict_of(&verdicts);
    let mut notes = Vec::new();
    if verdict != CriterionVerdict::Fails && growth_trend(&maxima) {
        verdict = CriterionVerdict::Fails;
        notes.push(String::from("radial maxima of the Carleson quantity grow towards the boundary"));
    }
    let value = per_point.iter().map(|p| p.value).fold(0.0, f64::max);
    Ok(CriterionResult {
        kind: CriterionKind::Carleson,
        value,
        infinite: false,
        per_point,
        verdict,
        diagnostics: Diagnostics {
            carleson_radius: Some(r),
            tail,
            notes,
            ..Diagnostics::default()
        },
    })
}

/// Vanishing form of a Carleson record: holds iff the tail sequence falls
/// below `VANISHING_RATIO` of its first value.
pub fn carleson_vanishing(carleson: &CriterionResult) -> CriterionResult {
    let tail = &carleson.diagnostics.tail;
    let first = tail.first().map(|t| t.value).unwrap_or(0.0);
    let last = tail.last().map(|t| t.value).unwrap_or(0.0);
    let verdict = if carleson.verdict == CriterionVerdict::Undecided {
        CriterionVerdict::Undecided
    } else if last <= VANISHING_RATIO * first {
        CriterionVerdict::Holds
    } else {
        CriterionVerdict::Fails
    };
    CriterionResult {
        kind: CriterionKind::CarlesonVanishing,
        value: last,
        infinite: false,
        per_point: carleson.per_point.clone(),
        verdict,
        diagnostics: carleson.diagnostics.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapPoint {
    pub point: DiskPoint,
    pub carleson: f64,
    pub sup_integral: f64,
    /// `carleson / sup_integral`, absent for skipped points.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivalenceGap {
    /// `[lo, hi]` of the per-point ratios; `None` when every point is skipped.
    pub bracket: Option<(f64, f64)>,
    pub skipped: usize,
    pub points: Vec<GapPoint>,
}

/// Bracket of Carleson quantity over `B(z)` across `grid`. Points where
/// either side vanishes (below `GAP_VANISHING_FLOOR` times its grid maximum)
/// are skipped and counted.
pub fn equivalence_gap(
    pb: &Problem,
    r: f64,
    delta: &DeltaChoice,
    grid: &[DiskPoint],
    spec: &QuadratureSpec,
) -> Result<EquivalenceGap> {
    let carleson = carleson_criterion(pb, r, grid, spec)?;
    let sup = sup_integral_points(pb, delta.delta, grid, spec)?;
    let cmax = carleson.per_point.iter().map(|p| p.value).fold(0.0, f64::max);
    let smax = sup.iter().map(|p| p.value).fold(0.0, f64::max);
    let mut points = Vec::with_capacity(grid.len());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut skipped = 0;
    for (c, s) in carleson.per_point.iter().zip(&sup) {
        let vanishes = |v: f64, max: f64| !(v > GAP_VANISHING_FLOOR * max) || max == 0.0;
        let ratio = if vanishes(c.value, cmax) || vanishes(s.value, smax) {
            skipped += 1;
            None
        } else {
            let x = c.value / s.value;
            lo = lo.min(x);
            hi = hi.max(x);
            Some(x)
        };
        points.push(GapPoint {
            point: c.point,
            carleson: c.value,
            sup_integral: s.value,
            ratio,
        });
    }
    Ok(EquivalenceGap {
        bracket: if skipped < grid.len() { Some((lo, hi)) } else { None },
        skipped,
        points,
    })
}

/// Tail `E_j = max_{|a| = r_j} B(a)` with a log-log decay fit. Holds
/// (compact) iff `E_last <= COMPACT_DECAY * E_0` and the last four values
/// decrease.
pub fn essential_norm_estimate(
    pb: &Problem,
    delta: &DeltaChoice,
    tail_radii: &[f64],
    spec: &QuadratureSpec,
) -> Result<CriterionResult> {
    pb.require_p_le_q()?;
    if pb.p < 1.0 {
        return Err(Error::UnsupportedRegime(format!("p = {} < 1", pb.p)));
    }
    if tail_radii.is_empty() {
        return Err(invalid("tail radii are empty"));
    }
    if tail_radii.windows(2).any(|w| !(w[1] > w[0])) || tail_radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(invalid("tail radii must increase inside (0, 1)"));
    }
    let angles = angles_for(&pb.op);
    let grid = circle_grid(tail_radii, angles)?;
    let per_point = sup_integral_points(pb, delta.delta, &grid, spec)?;
    if let Some(bad) = per_point.iter().find(|p| p.verdict == Verdict::Divergent) {
        return Err(Error::Precondition(format!(
            "operator is not bounded: B(a) diverges at a = ({}, {})",
            bad.point.re, bad.point.im
        )));
    }
    let tail = radial_maxima(&per_point);
    if growth_trend(&tail) {
        return Err(Error::Precondition(String::from(
            "operator is not bounded: B(a) grows towards the boundary",
        )));
    }
    let verdicts: Vec<Verdict> = per_point.iter().map(|p| p.verdict).collect();
    let verdict = if decays_to_zero(&tail) {
        CriterionVerdict::Holds
    } else if verdicts.contains(&Verdict::Undecided) {
        CriterionVerdict::Undecided
    } else {
        CriterionVerdict::Fails
    };
    Ok(CriterionResult {
        kind: CriterionKind::EssentialNorm,
        value: tail.last().map(|t| t.value).unwrap_or(0.0),
        infinite: false,
        per_point,
        verdict,
        diagnostics: Diagnostics {
            delta: Some(*delta),
            fitted_exponent: decay_exponent(&tail),
            tail,
            angles_per_radius: Some(angles),
            ..Diagnostics::default()
        },
    })
}

/// `||D f_{a_k}||_{A^q_nu}` along `a_sequence`, after checking that the test
/// functions stay bounded in `A^p_omega`. Holds iff the `q`-th powers decay
/// as in [`essential_norm_estimate`].
pub fn compact_probe(
    pb: &Problem,
    delta: &DeltaChoice,
    a_sequence: &[DiskPoint],
    squared_variant: bool,
    spec: &QuadratureSpec,
) -> Result<CriterionResult> {
    if a_sequence.is_empty() {
        return Err(invalid("probe sequence is empty"));
    }
    let mut norms = Vec::with_capacity(a_sequence.len());
    let mut per_point = Vec::with_capacity(a_sequence.len());
    for &a in a_sequence {
        let f = make_test_function_variant(a, delta, &pb.w, pb.p, squared_variant)?;
        norms.push(bergman_norm(&f, &pb.w, pb.p, spec)?);
        let out = image_norm_outcome(&pb.op, &f, &pb.nu, pb.q, spec)?;
        if out.verdict == Verdict::Divergent {
            return Err(Error::Divergent {
                last_partial: out.value,
            });
        }
        per_point.push(PointValue {
            point: a,
            value: powf(out.value.max(0.0), 1.0 / pb.q),
            error_estimate: out.error_estimate,
            verdict: out.verdict,
        });
    }
    let nmax = norms.iter().copied().fold(0.0, f64::max);
    let nmin = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = nmax / nmin;
    if !(spread <= TEST_FAMILY_SPREAD) {
        return Err(Error::Precondition(format!(
            "test functions are not uniformly bounded: max/min norm = {spread:.3e}"
        )));
    }
    let tail: Vec<TailPoint> = per_point
        .iter()
        .map(|p| TailPoint {
            radius: p.point.modulus(),
            value: powf(p.value, pb.q),
        })
        .collect();
    let verdicts: Vec<Verdict> = per_point.iter().map(|p| p.verdict).collect();
    let verdict = if decays_to_zero(&tail) {
        CriterionVerdict::Holds
    } else if verdicts.contains(&Verdict::Undecided) {
        CriterionVerdict::Undecided
    } else {
        CriterionVerdict::Fails
    };
    Ok(CriterionResult {
        kind: CriterionKind::CompactProbe,
        value: per_point.last().map(|p| p.value).unwrap_or(0.0),
        infinite: false,
        per_point,
        verdict,
        diagnostics: Diagnostics {
            delta: Some(*delta),
            fitted_exponent: decay_exponent(&tail),
            tail,
            test_norm_spread: Some(spread),
            ..Diagnostics::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SymbolFn;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn one() -> SymbolFn {
        SymbolFn::Constant(Complex64::new(1.0, 0.0))
    }

    fn problem(phi: SymbolFn, n: u32, alpha: f64, p: f64, q: f64) -> Problem {
        let w = RadialWeight::standard(alpha).unwrap();
        Problem::new(OperatorSymbol::new(phi, one(), n).unwrap(), w.clone(), p, w, q).unwrap()
    }

    fn delta(d: f64) -> DeltaChoice {
        DeltaChoice::user(d).unwrap()
    }

    #[test]
    fn order_bounded_examples() {
        let zero = problem(SymbolFn::Constant(Complex64::new(0.0, 0.0)), 0, 0.0, 2.0, 2.0);
        let r = order_bounded_criterion(&zero, &spec()).unwrap();
        assert_eq!(r.verdict, CriterionVerdict::Holds);
        assert!((r.value - 1.0).abs() < 1e-10);

        let id = problem(SymbolFn::Identity, 0, 0.0, 2.0, 2.0);
        let r = order_bounded_criterion(&id, &spec()).unwrap();
        assert_eq!(r.verdict, CriterionVerdict::Fails);
        assert!(r.infinite);

        let half = problem(SymbolFn::Scaling(Complex64::new(0.5, 0.0)), 1, 0.0, 2.0, 2.0);
        let r = order_bounded_criterion(&half, &spec()).unwrap();
        assert_eq!(r.verdict, CriterionVerdict::Holds);
        assert!(r.value.is_finite() && r.value > 0.0);
    }

    #[test]
    fn majorant_of_zero_symbol_is_one() {
        let zero = problem(SymbolFn::Constant(Complex64::new(0.0, 0.0)), 0, 0.0, 2.0, 2.0);
        for z in [DiskPoint::ORIGIN, DiskPoint::new(0.4, -0.7).unwrap()] {
            assert!((order_majorant(&zero, z).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn boundedness_rejects_p_above_q() {
        let pb = problem(SymbolFn::Identity, 0, 0.0, 3.0, 2.0);
        let err = boundedness_criterion(&pb, &delta(3.0), &[DiskPoint::ORIGIN], &spec()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedRegime(_)));
    }

    #[test]
    fn boundedness_of_zero_symbol_matches_closed_form() {
        let pb = problem(SymbolFn::Constant(Complex64::new(0.0, 0.0)), 0, 0.0, 2.0, 2.0);
        let grid = circle_grid(&[0.0, 0.5, 0.9, 0.99], 1).unwrap();
        let r = boundedness_criterion(&pb, &delta(3.0), &grid, &spec()).unwrap();
        for pv in &r.per_point {
            let g = 1.0 - pv.point.modulus();
            let want = powf(g, 6.0) / pb.box_mass(pv.point).unwrap();
            assert!((pv.value - want).abs() < 1e-9 * want.max(1e-300), "{} {}", pv.value, want);
        }
        assert_eq!(r.verdict, CriterionVerdict::Holds);
    }

    #[test]
    fn carleson_of_zero_symbol_vanishes_away_from_origin() {
        let pb = problem(SymbolFn::Constant(Complex64::new(0.0, 0.0)), 0, 0.0, 2.0, 2.0);
        let grid = circle_grid(&[0.6, 0.8, 0.95], 4).unwrap();
        let r = carleson_criterion(&pb, 0.5, &grid, &spec()).unwrap();
        assert!(r.per_point.iter().all(|p| p.value == 0.0));
        let gap = equivalence_gap(&pb, 0.5, &delta(3.0), &grid, &spec()).unwrap();
        assert_eq!(gap.skipped, grid.len());
        assert!(gap.bracket.is_none());
    }

    #[test]
    fn scaling_symbol_has_vanishing_carleson_tail() {
        let pb = problem(SymbolFn::Scaling(Complex64::new(0.5, 0.0)), 0, 0.0, 2.0, 2.0);
        let grid = circle_grid(&dyadic_radii(8), 4).unwrap();
        let r = carleson_criterion(&pb, 0.5, &grid, &spec()).unwrap();
        let v = carleson_vanishing(&r);
        assert_eq!(v.verdict, CriterionVerdict::Holds);
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn scaling_essential_norm_decays_with_exponent_four() {
        let pb = problem(SymbolFn::Scaling(Complex64::new(0.5, 0.0)), 0, 0.0, 2.0, 2.0);
        let r = essential_norm_estimate(&pb, &delta(3.0), &default_tail_radii(), &spec()).unwrap();
        assert_eq!(r.verdict, CriterionVerdict::Holds);
        let e = r.diagnostics.fitted_exponent.unwrap();
        assert!((e - 4.0).abs() < 0.4, "{e}");
    }
}
