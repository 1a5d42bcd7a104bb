//! Adaptive integration over the unit disk with respect to the normalized
//! area measure `dA = dx dy / pi`.
//!
//! The disk is cut into dyadic rings `1 - 2^-(j-1) <= |z| <= 1 - 2^-j`,
//! each ring into angular sectors, and every polar cell is integrated with a
//! tensor Gauss–Kronrod 7/15 rule. Cells with the largest error estimates are
//! bisected until the global error target is met. Per-ring sums give the
//! partial integrals `I(r_j)` behind the divergence heuristic.
//!
//! Integrands receive a [`Node`] carrying both `z` and the boundary gap
//! `1 - |z|`, computed from the cell parametrization rather than from `z`,
//! so densities that blow up at the circle keep their relative precision.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::gauss_kronrod::{scaled_error, WG, WGK, XGK};
use crate::geometry::{DiskPoint, Region};
use crate::math::{modulus, powf, sin_cos, sqrt, wrap_angle, CompensatedSum, PI};

/// Absolute error floor below which any integral counts as converged.
pub const ABSOLUTE_FLOOR: f64 = 1e-14;

/// Number of trailing partial integrals inspected by the divergence test.
pub const DIVERGENCE_WINDOW: usize = 5;

/// Minimum consecutive growth ratio of partial integrals flagged divergent.
pub const DIVERGENCE_GROWTH: f64 = 1.05;

const MAX_CELLS: usize = 40_000;

/// Disk-integration policy.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    /// Number of dyadic rings; the innermost `2^-radial_rings` collar is
    /// left out (and bounded by the last ring's contribution).
    pub radial_rings: u32,
    /// Angular sectors per ring before refinement.
    pub angular_sectors: u32,
    pub rel_error_target: f64,
    pub divergence_cap: f64,
    /// Maximum number of bisection rounds applied to any initial cell.
    pub max_refinement_levels: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_rings: 48,
            angular_sectors: 8,
            rel_error_target: 1e-6,
            divergence_cap: 1e12,
            max_refinement_levels: 6,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial_rings == 0 || self.angular_sectors == 0 {
            return Err(invalid("quadrature counts must be at least 1"));
        }
        if self.radial_rings > 52 {
            return Err(invalid("at most 52 dyadic rings are representable in f64"));
        }
        if !(self.rel_error_target > 0.0 && self.rel_error_target < 1.0) {
            return Err(invalid("rel_error_target must lie in (0, 1)"));
        }
        if !(self.divergence_cap > 1.0) {
            return Err(invalid("divergence_cap must exceed 1"));
        }
        Ok(())
    }

    /// Same spec with doubled angular sectors and rings (capped at 52).
    pub fn refined(&self) -> Self {
        Self {
            radial_rings: (self.radial_rings * 2).min(52),
            angular_sectors: self.angular_sectors * 2,
            ..*self
        }
    }
}

/// A quadrature node handed to integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub z: Complex64,
    pub modulus: f64,
    /// `1 - |z|`
    pub gap: f64,
}

impl Node {
    pub fn from_complex(z: Complex64) -> Self {
        let m = modulus(z);
        Node {
            z,
            modulus: m,
            gap: 1.0 - m,
        }
    }

    pub fn point(&self) -> DiskPoint {
        DiskPoint {
            re: self.z.re,
            im: self.z.im,
        }
    }

    /// `1 - |z|^2`
    #[inline]
    pub fn one_minus_mod_sq(&self) -> f64 {
        self.gap * (2.0 - self.gap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Converged,
    Divergent,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegralOutcome {
    pub value: f64,
    pub error_estimate: f64,
    pub verdict: Verdict,
    /// Cumulative integrals over the first `j` rings.
    pub partial_values: Vec<f64>,
    pub cells: usize,
    pub evaluations: usize,
}

impl IntegralOutcome {
    fn zero() -> Self {
        IntegralOutcome {
            value: 0.0,
            error_estimate: 0.0,
            verdict: Verdict::Converged,
            partial_values: Vec::new(),
            cells: 0,
            evaluations: 0,
        }
    }

    /// Value if converged; `Divergent` error if divergent; the value is
    /// also returned for undecided outcomes.
    pub fn finite_value(&self) -> Result<f64> {
        match self.verdict {
            Verdict::Divergent => Err(Error::Divergent {
                last_partial: self.partial_values.last().copied().unwrap_or(self.value),
            }),
            _ => Ok(self.value),
        }
    }
}

// ---------------------------------------------------------------------------
// Layouts

#[derive(Debug, Clone, Copy, PartialEq)]
enum Chart {
    /// `u` is the gap `1 - r`, `v` the angle.
    Polar,
    /// Polar coordinates around `origin` for the convex set
    /// `{|w - center| < radius} ∩ D`: `u in [0, 1]` scales the distance from
    /// `origin` to the nearer of the two boundary circles.
    Lens {
        origin: Complex64,
        center: Complex64,
        radius: f64,
    },
}

/// Roots `s_- < 0 < s_+` of `|o + s d - c| = radius` for a unit direction `d`.
#[inline]
fn ray_exits(o: Complex64, c: Complex64, radius: f64, cv: f64, sv: f64) -> (f64, f64) {
    let oc = o - c;
    let b = oc.re * cv + oc.im * sv;
    let disc = sqrt((b * b + (radius - modulus(oc)) * (radius + modulus(oc))).max(0.0));
    (-b - disc, -b + disc)
}

#[derive(Debug, Clone, Copy)]
struct CellRect {
    u0: f64,
    u1: f64,
    v0: f64,
    v1: f64,
    ring: u32,
    level: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    chart: Chart,
    cells: Vec<CellRect>,
    rings: u32,
    /// Whether the layout leaves out a collar next to the unit circle.
    open_collar: bool,
}

impl Layout {
    /// Dyadic polar rings `gap in [gap_max 2^-j, gap_max 2^-(j-1)]` over an
    /// angular window, with sectors graded towards the given focus points.
    pub(crate) fn polar(
        gap_max: f64,
        theta0: f64,
        theta1: f64,
        sectors: u32,
        foci: &[DiskPoint],
        rings: u32,
    ) -> Self {
        let mut cells = Vec::new();
        let full_turn = theta1 - theta0 >= 2.0 * PI - 1e-12;
        for j in 1..=rings {
            let g_hi = gap_max * powf(2.0, -((j - 1) as f64));
            let g_lo = gap_max * powf(2.0, -(j as f64));
            let ring_gap = 0.5 * (g_lo + g_hi);
            let breaks = angular_breaks(theta0, theta1, sectors, foci, ring_gap, full_turn);
            for w in breaks.windows(2) {
                cells.push(CellRect {
                    u0: g_lo,
                    u1: g_hi,
                    v0: w[0],
                    v1: w[1],
                    ring: j,
                    level: 0,
                });
            }
        }
        Layout {
            chart: Chart::Polar,
            cells,
            rings,
            open_collar: true,
        }
    }

    pub(crate) fn full_disk(spec: &QuadratureSpec, foci: &[DiskPoint]) -> Self {
        Self::polar(1.0, 0.0, 2.0 * PI, spec.angular_sectors, foci, spec.radial_rings)
    }

    /// Layout for `{|w - center| < radius} ∩ D`, empty if they are disjoint.
    pub(crate) fn clipped(center: Complex64, radius: f64, spec: &QuadratureSpec) -> Self {
        let cm = modulus(center);
        let dir = if cm > 0.0 { center / cm } else { Complex64::new(1.0, 0.0) };
        let lo = (cm - radius).max(-1.0);
        let hi = (cm + radius).min(1.0);
        if !(hi > lo) {
            return Layout {
                chart: Chart::Polar,
                cells: Vec::new(),
                rings: 1,
                open_collar: false,
            };
        }
        let origin = if cm + radius < 1.0 { center } else { dir * (0.5 * (lo + hi)) };
        let sectors = spec.angular_sectors.max(4);
        let mut breaks: Vec<f64> = (0..=sectors).map(|k| 2.0 * PI * k as f64 / sectors as f64).collect();
        // angles of the two circle intersections, where the ray length has kinks
        if cm > 0.0 && cm - radius < 1.0 && cm + radius > 1.0 {
            let x0 = (1.0 + cm * cm - radius * radius) / (2.0 * cm);
            let y0 = sqrt((1.0 - x0 * x0).max(0.0));
            for y in [y0, -y0] {
                let w = dir * Complex64::new(x0, y) - origin;
                let t = crate::math::atan2(w.im, w.re);
                let t = if t < 0.0 { t + 2.0 * PI } else { t };
                if t > 0.0 && t < 2.0 * PI {
                    breaks.push(t);
                }
            }
            breaks.sort_by(|a, b| a.total_cmp(b));
            breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        }
        let radial = 4u32;
        let mut cells = Vec::new();
        for i in 0..radial {
            for w in breaks.windows(2) {
                cells.push(CellRect {
                    u0: i as f64 / radial as f64,
                    u1: (i + 1) as f64 / radial as f64,
                    v0: w[0],
                    v1: w[1],
                    ring: 1,
                    level: 0,
                });
            }
        }
        Layout {
            chart: Chart::Lens { origin, center, radius },
            cells,
            rings: 1,
            open_collar: false,
        }
    }

    /// Layout fitted to a region of the integration variable.
    pub(crate) fn for_region(region: &Region, spec: &QuadratureSpec, foci: &[DiskPoint]) -> Self {
        match *region {
            Region::FullDisk => Self::full_disk(spec, foci),
            Region::CarlesonSquare { z } if z.is_origin() => Self::full_disk(spec, foci),
            Region::CarlesonSquare { z } => {
                let g = 1.0 - z.modulus();
                let arg = z.arg();
                Self::polar(g, arg - 0.5 * g, arg + 0.5 * g, 2, foci, spec.radial_rings)
            }
            Region::AnnulusComplement { radius } => {
                Self::polar(1.0 - radius, 0.0, 2.0 * PI, spec.angular_sectors, foci, spec.radial_rings)
            }
            Region::PseudoDisk { center, radius } => {
                let (c, r) = Region::euclidean_disk(center, radius);
                Self::clipped(c, r, spec)
            }
        }
    }
}

fn angular_breaks(
    theta0: f64,
    theta1: f64,
    sectors: u32,
    foci: &[DiskPoint],
    ring_gap: f64,
    full_turn: bool,
) -> Vec<f64> {
    let width = theta1 - theta0;
    let mut b: Vec<f64> = (0..=sectors)
        .map(|k| theta0 + width * k as f64 / sectors as f64)
        .collect();
    let sector = width / sectors as f64;
    for f in foci {
        let scale = ring_gap.max(1.0 - f.modulus());
        if scale >= 0.5 * sector {
            continue;
        }
        let centre = if full_turn {
            theta0 + (wrap_angle(f.arg() - theta0 - PI) + PI)
        } else {
            f.arg()
        };
        let mut offsets = Vec::new();
        offsets.push(0.0);
        let mut s = scale;
        while s < 0.5 * sector {
            offsets.push(s);
            offsets.push(-s);
            s *= 2.0;
        }
        for o in offsets {
            let mut t = centre + o;
            if full_turn {
                if t < theta0 {
                    t += 2.0 * PI;
                }
                if t > theta1 {
                    t -= 2.0 * PI;
                }
            }
            if t > theta0 && t < theta1 {
                b.push(t);
            }
        }
    }
    b.sort_by(|x, y| x.total_cmp(y));
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    b
}

// ---------------------------------------------------------------------------
// Cell evaluation

#[derive(Debug, Clone, Copy)]
struct CellEval {
    rect: CellRect,
    value: f64,
    error: f64,
    err_u: f64,
    err_v: f64,
    mixed: bool,
}

fn map_node(chart: &Chart, u: f64, sv: f64, cv: f64) -> (Node, f64) {
    match *chart {
        Chart::Polar => {
            let r = 1.0 - u;
            let z = Complex64::new(r * cv, r * sv);
            (
                Node {
                    z,
                    modulus: r,
                    gap: u,
                },
                r / PI,
            )
        }
        Chart::Lens { origin, center, radius } => {
            let (s_neg, s_unit) = ray_exits(origin, Complex64::new(0.0, 0.0), 1.0, cv, sv);
            let (_, s_disk) = ray_exits(origin, center, radius, cv, sv);
            let smax = s_disk.min(s_unit);
            let s = u * smax;
            let z = origin + Complex64::new(s * cv, s * sv);
            let m = modulus(z);
            // 1 - |z|^2 = (s_unit - s)(s - s_neg)
            let gap = (s_unit - s) * (s - s_neg) / (1.0 + m);
            (Node { z, modulus: m, gap }, u * smax * smax / PI)
        }
    }
}

fn eval_cell<F, M>(chart: &Chart, rect: CellRect, f: &F, mask: Option<&M>) -> Result<CellEval>
where
    F: Fn(&Node) -> f64,
    M: Fn(&Node) -> bool,
{
    let cu = 0.5 * (rect.u0 + rect.u1);
    let hu = 0.5 * (rect.u1 - rect.u0);
    let cvm = 0.5 * (rect.v0 + rect.v1);
    let hv = 0.5 * (rect.v1 - rect.v0);

    // 15 abscissae: index 7 is the centre; offsets +-XGK[i]
    let mut us = [0.0; 15];
    let mut vs = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for i in 0..7 {
        us[i] = cu - hu * XGK[i];
        us[14 - i] = cu + hu * XGK[i];
        vs[i] = cvm - hv * XGK[i];
        vs[14 - i] = cvm + hv * XGK[i];
        wk[i] = WGK[i];
        wk[14 - i] = WGK[i];
        if i % 2 == 1 {
            wg[i] = WG[i / 2];
            wg[14 - i] = WG[i / 2];
        }
    }
    us[7] = cu;
    vs[7] = cvm;
    wk[7] = WGK[7];
    wg[7] = WG[3];
    let mut trig = [(0.0, 0.0); 15];
    for j in 0..15 {
        trig[j] = sin_cos(vs[j]);
    }

    let mut vals = [[0.0f64; 15]; 15];
    let mut any_in = false;
    let mut any_out = false;
    for i in 0..15 {
        for j in 0..15 {
            let (sv, cv) = trig[j];
            let (node, jac) = map_node(chart, us[i], sv, cv);
            let inside = match mask {
                Some(m) => m(&node),
                None => true,
            };
            if inside {
                any_in = true;
                let fv = f(&node);
                if !fv.is_finite() {
                    return Err(Error::NonFiniteDensity {
                        re: node.z.re,
                        im: node.z.im,
                    });
                }
                vals[i][j] = fv * jac;
            } else {
                any_out = true;
            }
        }
    }

    let (mut kk, mut gk, mut kg, mut gg, mut resabs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..15 {
        for j in 0..15 {
            let x = vals[i][j];
            kk += wk[i] * wk[j] * x;
            gk += wg[i] * wk[j] * x;
            kg += wk[i] * wg[j] * x;
            gg += wg[i] * wg[j] * x;
            resabs += wk[i] * wk[j] * x.abs();
        }
    }
    let mean = 0.25 * kk;
    let mut resasc = 0.0;
    for i in 0..15 {
        for j in 0..15 {
            resasc += wk[i] * wk[j] * (vals[i][j] - mean).abs();
        }
    }
    let area = hu * hv;
    let value = kk * area;
    let error = scaled_error(((kk - gg) * area).abs(), resabs * area, resasc * area);
    Ok(CellEval {
        rect,
        value,
        error,
        err_u: ((kk - gk) * area).abs(),
        err_v: ((kk - kg) * area).abs(),
        mixed: any_in && any_out,
    })
}

fn split(rect: CellRect, err_u: f64, err_v: f64) -> Vec<CellRect> {
    let level = rect.level + 1;
    let mu = 0.5 * (rect.u0 + rect.u1);
    let mv = 0.5 * (rect.v0 + rect.v1);
    let split_u = err_u >= 0.5 * err_v;
    let split_v = err_v >= 0.5 * err_u;
    let us: Vec<(f64, f64)> = if split_u {
        alloc::vec![(rect.u0, mu), (mu, rect.u1)]
    } else {
        alloc::vec![(rect.u0, rect.u1)]
    };
    let vs: Vec<(f64, f64)> = if split_v {
        alloc::vec![(rect.v0, mv), (mv, rect.v1)]
    } else {
        alloc::vec![(rect.v0, rect.v1)]
    };
    let mut out = Vec::with_capacity(4);
    for &(u0, u1) in &us {
        for &(v0, v1) in &vs {
            out.push(CellRect {
                u0,
                u1,
                v0,
                v1,
                ring: rect.ring,
                level,
            });
        }
    }
    out
}

#[cfg(feature = "parallel")]
fn eval_all<F, M>(chart: &Chart, rects: &[CellRect], f: &F, mask: Option<&M>) -> Result<Vec<CellEval>>
where
    F: Fn(&Node) -> f64 + Sync,
    M: Fn(&Node) -> bool + Sync,
{
    use rayon::prelude::*;
    rects.par_iter().map(|r| eval_cell(chart, *r, f, mask)).collect()
}

#[cfg(not(feature = "parallel"))]
fn eval_all<F, M>(chart: &Chart, rects: &[CellRect], f: &F, mask: Option<&M>) -> Result<Vec<CellEval>>
where
    F: Fn(&Node) -> f64 + Sync,
    M: Fn(&Node) -> bool + Sync,
{
    rects.iter().map(|r| eval_cell(chart, *r, f, mask)).collect()
}

fn ring_partials(cells: &[CellEval], rings: u32) -> Vec<f64> {
    let mut per_ring: Vec<CompensatedSum> = (0..rings).map(|_| CompensatedSum::default()).collect();
    for c in cells {
        per_ring[(c.rect.ring - 1) as usize].add(c.value);
    }
    let mut acc = CompensatedSum::default();
    per_ring
        .iter()
        .map(|s| {
            acc.add(s.value());
            acc.value()
        })
        .collect()
}

/// Divergence heuristic on cumulative partial integrals.
pub fn partials_diverge(partials: &[f64], cap: f64) -> bool {
    if partials.iter().any(|p| !p.is_finite() || p.abs() > cap) {
        return true;
    }
    if partials.len() <= DIVERGENCE_WINDOW {
        return false;
    }
    let tail = &partials[partials.len() - DIVERGENCE_WINDOW - 1..];
    tail.windows(2)
        .all(|w| w[0] > 0.0 && w[1] > w[0] && w[1] >= DIVERGENCE_GROWTH * w[0])
}

/// Runs the adaptive scheme on a layout. `mask` restricts the integrand to
/// nodes where it returns `true`; cells straddling the mask boundary get an
/// extra bisection.
pub(crate) fn integrate_layout<F, M>(
    layout: Layout,
    f: &F,
    mask: Option<&M>,
    spec: &QuadratureSpec,
) -> Result<IntegralOutcome>
where
    F: Fn(&Node) -> f64 + Sync,
    M: Fn(&Node) -> bool + Sync,
{
    spec.validate()?;
    if layout.cells.is_empty() {
        return Ok(IntegralOutcome::zero());
    }
    let chart = layout.chart;
    let mut cells = eval_all(&chart, &layout.cells, f, mask)?;
    let mut evaluations = cells.len() * 225;
    loop {
        let partials = ring_partials(&cells, layout.rings);
        let mut total = CompensatedSum::default();
        let mut err_sum = 0.0;
        for c in &cells {
            total.add(c.value);
            err_sum += c.error;
        }
        let value = total.value();
        let tail_err = if layout.open_collar {
            cells
                .iter()
                .filter(|c| c.rect.ring == layout.rings)
                .map(|c| c.value)
                .sum::<f64>()
                .abs()
        } else {
            0.0
        };
        let error = err_sum + tail_err;
        let outcome = |verdict| IntegralOutcome {
            value,
            error_estimate: error,
            verdict,
            partial_values: partials.clone(),
            cells: cells.len(),
            evaluations,
        };
        if layout.open_collar && partials_diverge(&partials, spec.divergence_cap) {
            return Ok(outcome(Verdict::Divergent));
        }
        if !layout.open_collar && (!value.is_finite() || value.abs() > spec.divergence_cap) {
            return Ok(outcome(Verdict::Divergent));
        }
        let target = (spec.rel_error_target * value.abs()).max(ABSOLUTE_FLOOR);
        let forced: Vec<bool> = cells
            .iter()
            .map(|c| c.mixed && c.rect.level == 0)
            .collect();
        let any_forced = forced.iter().any(|&b| b);
        if error <= target && !any_forced {
            return Ok(outcome(Verdict::Converged));
        }

        let mut order: Vec<usize> = (0..cells.len())
            .filter(|&i| cells[i].rect.level < spec.max_refinement_levels && !forced[i])
            .collect();
        order.sort_by(|&a, &b| cells[b].error.total_cmp(&cells[a].error).then(a.cmp(&b)));
        let mut chosen = alloc::vec![false; cells.len()];
        for (i, &f) in forced.iter().enumerate() {
            chosen[i] = f;
        }
        if err_sum > 0.5 * target {
            let mut acc = 0.0;
            for &i in &order {
                if acc >= 0.5 * err_sum {
                    break;
                }
                chosen[i] = true;
                acc += cells[i].error;
            }
        }
        let n_chosen = chosen.iter().filter(|&&c| c).count();
        if n_chosen == 0 || cells.len() + 3 * n_chosen > MAX_CELLS {
            let verdict = if error <= target {
                Verdict::Converged
            } else {
                Verdict::Undecided
            };
            return Ok(outcome(verdict));
        }

        let mut new_rects = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            if chosen[i] {
                new_rects.extend(split(c.rect, c.err_u, c.err_v));
            }
        }
        let mut fresh = eval_all(&chart, &new_rects, f, mask)?.into_iter();
        evaluations += new_rects.len() * 225;
        let mut next = Vec::with_capacity(cells.len() + new_rects.len());
        for (i, c) in cells.iter().enumerate() {
            if chosen[i] {
                let n = split(c.rect, c.err_u, c.err_v).len();
                for _ in 0..n {
                    next.push(fresh.next().expect("child count matches"));
                }
            } else {
                next.push(*c);
            }
        }
        cells = next;
    }
}

type NoMask = fn(&Node) -> bool;

/// `int_D f dA`.
pub fn integrate_disk<F>(f: F, spec: &QuadratureSpec) -> Result<IntegralOutcome>
where
    F: Fn(&Node) -> f64 + Sync,
{
    integrate_layout(Layout::full_disk(spec, &[]), &f, None::<&NoMask>, spec)
}

/// `int_D f dA` with angular sectors graded towards `foci`, for integrands
/// sharply peaked near those points.
pub fn integrate_disk_focused<F>(f: F, spec: &QuadratureSpec, foci: &[DiskPoint]) -> Result<IntegralOutcome>
where
    F: Fn(&Node) -> f64 + Sync,
{
    integrate_layout(Layout::full_disk(spec, foci), &f, None::<&NoMask>, spec)
}

/// `int_region f dA` on a layout fitted to the region.
pub fn integrate_region<F>(f: F, region: &Region, spec: &QuadratureSpec) -> Result<IntegralOutcome>
where
    F: Fn(&Node) -> f64 + Sync,
{
    integrate_layout(Layout::for_region(region, spec, &[]), &f, None::<&NoMask>, spec)
}

/// `int_D f 1_mask dA` over the full disk with boundary refinement.
pub fn integrate_masked<F, M>(f: F, mask: M, spec: &QuadratureSpec) -> Result<IntegralOutcome>
where
    F: Fn(&Node) -> f64 + Sync,
    M: Fn(&Node) -> bool + Sync,
{
    integrate_layout(Layout::full_disk(spec, &[]), &f, Some(&mask), spec)
}

/// Partial integrals `I(r_j) = int_{|z| <= 1 - 2^-j} f dA`, `j = 1..=rings`.
pub fn divergence_probe<F>(f: F, spec: &QuadratureSpec) -> Result<Vec<f64>>
where
    F: Fn(&Node) -> f64 + Sync,
{
    Ok(integrate_disk(f, spec)?.partial_values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn constant_integrates_to_one() {
        let out = integrate_disk(|_| 1.0, &spec()).unwrap();
        assert_eq!(out.verdict, Verdict::Converged);
        assert!((out.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modulus_squared() {
        let out = integrate_disk(|n| n.modulus * n.modulus, &spec()).unwrap();
        assert!((out.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn inverse_square_gap_diverges() {
        let out = integrate_disk(|n| 1.0 / (n.gap * n.gap), &spec()).unwrap();
        assert_eq!(out.verdict, Verdict::Divergent);
    }

    #[test]
    fn probe_of_constant_is_area_of_subdisk() {
        let p = divergence_probe(|_| 1.0, &spec()).unwrap();
        for (j, v) in p.iter().enumerate() {
            let r = 1.0 - powf(2.0, -((j + 1) as f64));
            assert!((v - r * r).abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn pseudo_disk_area() {
        let reg = Region::pseudo_disk(DiskPoint::ORIGIN, 0.5).unwrap();
        let out = integrate_region(|_| 1.0, &reg, &spec()).unwrap();
        assert!((out.value - 0.25).abs() < 1e-10, "{}", out.value);
    }

    #[test]
    fn masked_pseudo_disk_area() {
        let out = integrate_masked(|_| 1.0, |n: &Node| n.modulus < 0.5, &spec()).unwrap();
        assert!((out.value - 0.25).abs() < 1e-4, "{}", out.value);
    }

    #[test]
    fn carleson_square_constant_weight() {
        let z = DiskPoint::new(0.5, 0.0).unwrap();
        let out = integrate_region(|_| 1.0, &Region::carleson_square(z), &spec()).unwrap();
        assert!((out.value - 3.0 / (16.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn focused_peak_is_resolved() {
        // int |1 - conj(a) z|^{-6} dA = sum (k+1)(k+2)^2 |a|^{2k} / 4
        let a = DiskPoint::new(1.0 - 1.0 / 256.0, 0.0).unwrap();
        let ac = a.to_complex();
        let f = move |n: &Node| {
            let w = Complex64::new(1.0, 0.0) - ac.conj() * n.z;
            1.0 / powf(w.norm_sqr(), 3.0)
        };
        let out = integrate_disk_focused(f, &spec(), &[a]).unwrap();
        let x = ac.norm_sqr();
        let mut want = 0.0;
        let mut xk = 1.0;
        for k in 0..2_000_000u64 {
            let kf = k as f64;
            want += (kf + 1.0) * (kf + 2.0) * (kf + 2.0) * xk / 4.0;
            xk *= x;
            if xk < 1e-30 {
                break;
            }
        }
        assert_eq!(out.verdict, Verdict::Converged);
        assert!(((out.value - want) / want).abs() < 1e-5, "{} vs {}", out.value, want);
    }
}
