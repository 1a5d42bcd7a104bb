//! Radial weights: densities, tails, moments, Carleson-square masses and
//! doubling diagnostics.
//!
//! Every weight is evaluated in *gap* coordinates `g = 1 - r` internally so
//! that quantities near the boundary keep full relative precision.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use spin::{Once, RwLock};

use crate::error::{invalid, Error, Result};
use crate::gauss_kronrod::{dyadic_breaks, integrate, Tolerance};
use crate::geometry::DiskPoint;
use crate::math::{beta, beta_inc_reg, binomial, exp, ln, ln_1p, powf, PI};

const PROFILE_POINTS: usize = 4096;
const PROFILE_OCTAVES: f64 = 48.0;
const DYADIC_LEVELS: u32 = 60;

/// Radial density supplied as a closure of `r`.
pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How a weight is represented.
#[derive(Clone)]
pub enum WeightKind {
    /// `(1 - r^2)^alpha`, `alpha > -1`.
    Standard { alpha: f64 },
    /// Linear interpolation between `(r, w)` samples, held constant outside
    /// the sampled range.
    Table { samples: Vec<(f64, f64)> },
    Custom { label: String, density: DensityFn },
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Standard { alpha } => write!(f, "Standard {{ alpha: {alpha} }}"),
            WeightKind::Table { samples } => write!(f, "Table {{ {} samples }}", samples.len()),
            WeightKind::Custom { label, .. } => write!(f, "Custom {{ {label} }}"),
        }
    }
}

struct Inner {
    kind: WeightKind,
    moments: RwLock<BTreeMap<u32, f64>>,
    profile: Once<CarlesonProfile>,
}

/// A radial weight on the unit disk. Cheap to clone; the moment cache and the
/// Carleson-mass profile are shared between clones.
#[derive(Clone)]
pub struct RadialWeight {
    inner: Arc<Inner>,
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("RadialWeight").field(&self.inner.kind).finish()
    }
}

impl RadialWeight {
    fn from_kind(kind: WeightKind) -> Self {
        RadialWeight {
            inner: Arc::new(Inner {
                kind,
                moments: RwLock::new(BTreeMap::new()),
                profile: Once::new(),
            }),
        }
    }

    /// The standard weight `(1 - r^2)^alpha`.
    pub fn standard(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(invalid(format!("standard weight needs alpha > -1, got {alpha}")));
        }
        Ok(Self::from_kind(WeightKind::Standard { alpha }))
    }

    /// Tabulated weight; `r` strictly increasing in `[0, 1)`, samples nonnegative.
    pub fn table(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::WeightTable {
                row: 0,
                reason: "no samples".into(),
            });
        }
        for (row, &(r, w)) in samples.iter().enumerate() {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::WeightTable {
                    row,
                    reason: format!("radius {r} outside [0, 1)"),
                });
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::WeightTable {
                    row,
                    reason: format!("weight value {w} is negative or not finite"),
                });
            }
            if row > 0 && r <= samples[row - 1].0 {
                return Err(Error::WeightTable {
                    row,
                    reason: "radii must be strictly increasing".into(),
                });
            }
        }
        if samples.iter().all(|&(_, w)| w == 0.0) {
            return Err(Error::WeightTable {
                row: 0,
                reason: "weight vanishes identically".into(),
            });
        }
        Ok(Self::from_kind(WeightKind::Table { samples }))
    }

    /// Weight given by an arbitrary density of `r`. The density is sampled
    /// for nonnegativity and its total mass must be finite.
    pub fn custom(label: impl Into<String>, density: DensityFn) -> Result<Self> {
        for k in 0..=256 {
            let g = powf(2.0, -(k as f64) * 40.0 / 256.0);
            let v = density(1.0 - g);
            if !(v >= 0.0) {
                return Err(invalid(format!("custom weight is negative or NaN at r = {}", 1.0 - g)));
            }
        }
        let w = Self::from_kind(WeightKind::Custom {
            label: label.into(),
            density,
        });
        let mass = w.tail_mass_gap(1.0)?;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("custom weight must have finite positive mass"));
        }
        Ok(w)
    }

    /// Parses `standard:alpha=<float>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let rest = name
            .trim()
            .strip_prefix("standard:")
            .ok_or_else(|| invalid(format!("unknown weight name `{name}`")))?;
        let value = rest
            .trim()
            .strip_prefix("alpha=")
            .ok_or_else(|| invalid(format!("expected `alpha=<float>` in `{name}`")))?;
        let alpha: f64 = value
            .trim()
            .parse()
            .map_err(|_| invalid(format!("cannot parse alpha in `{name}`")))?;
        Self::standard(alpha)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.inner.kind
    }

    /// Short human-readable description, e.g. `standard:alpha=1`.
    pub fn describe(&self) -> String {
        match &self.inner.kind {
            WeightKind::Standard { alpha } => format!("standard:alpha={alpha}"),
            WeightKind::Table { samples } => format!("table:{}", samples.len()),
            WeightKind::Custom { label, .. } => format!("custom:{label}"),
        }
    }

    pub fn standard_alpha(&self) -> Option<f64> {
        match self.inner.kind {
            WeightKind::Standard { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// `omega(r)`.
    pub fn density(&self, r: f64) -> f64 {
        self.density_gap(1.0 - r)
    }

    /// `omega(1 - g)`.
    pub fn density_gap(&self, g: f64) -> f64 {
        match &self.inner.kind {
            WeightKind::Standard { alpha } => {
                if *alpha == 0.0 {
                    1.0
                } else {
                    crate::math::pow_pos(g * (2.0 - g), *alpha)
                }
            }
            WeightKind::Table { samples } => table_eval(samples, 1.0 - g),
            WeightKind::Custom { density, .. } => density(1.0 - g),
        }
    }

    /// `int_{1-g}^1 omega(s) ds`.
    pub fn tail_mass_gap(&self, g: f64) -> Result<f64> {
        if !(g > 0.0) {
            return Ok(0.0);
        }
        let g = g.min(1.0);
        match &self.inner.kind {
            WeightKind::Standard { alpha } => Ok(standard_tail(*alpha, g)),
            WeightKind::Table { samples } => Ok(table_moment_integral(samples, 1.0 - g, 1.0, 0.0)),
            WeightKind::Custom { density, .. } => {
                let f = |t: f64| density(1.0 - t);
                Ok(integrate(f, &dyadic_breaks(g, DYADIC_LEVELS), Tolerance::default())?.value)
            }
        }
    }

    /// `omega_hat(r) = int_r^1 omega(s) ds`.
    pub fn omega_hat(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        self.tail_mass_gap(1.0 - r)
    }

    /// `omega_hat(r) / (1 - r)`.
    pub fn omega_tilde(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.tail_mass_gap(1.0 - r)? / (1.0 - r))
    }

    /// Moment `omega_n = int_0^1 r^n omega(r) dr`, cached.
    pub fn moment(&self, n: u32) -> Result<f64> {
        if let Some(v) = self.inner.moments.read().get(&n) {
            return Ok(*v);
        }
        let v = self.moment_uncached(n as f64)?;
        self.inner.moments.write().insert(n, v);
        Ok(v)
    }

    /// `int_0^1 r^s omega(r) dr` for real `s >= 0`, not cached.
    pub fn moment_real(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(invalid("moment exponent must be nonnegative"));
        }
        self.moment_uncached(s)
    }

    fn moment_uncached(&self, s: f64) -> Result<f64> {
        match &self.inner.kind {
            WeightKind::Standard { alpha } => Ok(standard_moment(*alpha, s)),
            WeightKind::Table { samples } => Ok(table_moment_integral(samples, 0.0, 1.0, s)),
            WeightKind::Custom { density, .. } => {
                let f = |t: f64| power_of_one_minus(t, s) * density(1.0 - t);
                Ok(integrate(f, &dyadic_breaks(1.0, DYADIC_LEVELS), Tolerance::default())?.value)
            }
        }
    }

    /// `omega(D) = int_D omega dA = 2 omega_1`.
    pub fn total_mass(&self) -> Result<f64> {
        Ok(2.0 * self.moment(1)?)
    }

    /// `int_{1-g}^1 s omega(s) ds`.
    pub fn box_radial_mass_gap(&self, g: f64) -> Result<f64> {
        if !(g > 0.0) {
            return Ok(0.0);
        }
        let g = g.min(1.0);
        match &self.inner.kind {
            WeightKind::Standard { alpha } => {
                let one_minus_r2 = g * (2.0 - g);
                Ok(powf(one_minus_r2, alpha + 1.0) / (2.0 * (alpha + 1.0)))
            }
            WeightKind::Table { samples } => Ok(table_moment_integral(samples, 1.0 - g, 1.0, 1.0)),
            WeightKind::Custom { density, .. } => {
                let f = |t: f64| (1.0 - t) * density(1.0 - t);
                Ok(integrate(f, &dyadic_breaks(g, DYADIC_LEVELS), Tolerance::default())?.value)
            }
        }
    }

    /// `omega(S(z))` from the exact radial integral. `S(0)` is the whole disk.
    pub fn carleson_box_weight(&self, z: DiskPoint) -> Result<f64> {
        let m = z.modulus();
        if m >= 1.0 {
            return Err(Error::OutsideDisk { re: z.re, im: z.im });
        }
        if z.is_origin() {
            return self.total_mass();
        }
        let g = 1.0 - m;
        Ok(g * self.box_radial_mass_gap(g)? / PI)
    }

    /// Memoized `omega(S(z))` as a function of `g = 1 - |z| > 0` (closed form
    /// for standard weights). The `z = 0` convention is the caller's business.
    pub fn carleson_mass_fast(&self, g: f64) -> f64 {
        match &self.inner.kind {
            WeightKind::Standard { alpha } => {
                let one_minus_r2 = g * (2.0 - g);
                g * powf(one_minus_r2, alpha + 1.0) / (2.0 * (alpha + 1.0) * PI)
            }
            _ => g * self.profile().eval(g) / PI,
        }
    }

    /// Same as [`carleson_mass_fast`](Self::carleson_mass_fast) but applying
    /// the `S(0) = D` convention when `z` is exactly the origin.
    pub fn carleson_mass_at(&self, z_is_origin: bool, g: f64) -> Result<f64> {
        if z_is_origin {
            self.total_mass()
        } else {
            Ok(self.carleson_mass_fast(g))
        }
    }

    /// The memoized radial profile of `int_{1-g}^1 s omega(s) ds`.
    pub fn profile(&self) -> &CarlesonProfile {
        self.inner.profile.call_once(|| CarlesonProfile::build(self))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(invalid(format!("radius {r} outside [0, 1)")));
    }
    Ok(())
}

/// `(1 - t)^s` accurate for small `t`.
fn power_of_one_minus(t: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        exp(s * ln_1p(-t))
    }
}

fn standard_tail(alpha: f64, g: f64) -> f64 {
    if alpha == alpha.trunc_core() && (0.0..=8.0).contains(&alpha) {
        // int_0^g t^a (2 - t)^a dt expanded binomially.
        let a = alpha as u32;
        let mut acc = 0.0;
        for i in 0..=a {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let e = (a + i + 1) as f64;
            acc += sign * binomial(a, i) * powf(2.0, (a - i) as f64) * powf(g, e) / e;
        }
        acc
    } else {
        let x = g * (2.0 - g);
        0.5 * beta(alpha + 1.0, 0.5) * beta_inc_reg(x, alpha + 1.0, 0.5)
    }
}

fn standard_moment(alpha: f64, s: f64) -> f64 {
    let a = 0.5 * (s + 1.0);
    if alpha == alpha.trunc_core() && (0.0..=64.0).contains(&alpha) {
        // alpha! / prod_{i=0}^{alpha} (a + i)
        let k = alpha as u32;
        let mut acc = 1.0;
        for i in 0..=k {
            acc /= a + i as f64;
            if i > 0 {
                acc *= i as f64;
            }
        }
        0.5 * acc
    } else {
        0.5 * beta(a, alpha + 1.0)
    }
}

trait TruncCore {
    fn trunc_core(self) -> f64;
}

impl TruncCore for f64 {
    fn trunc_core(self) -> f64 {
        libm::trunc(self)
    }
}

fn table_eval(samples: &[(f64, f64)], r: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if r <= first.0 {
        return first.1;
    }
    if r >= last.0 {
        return last.1;
    }
    let idx = samples.partition_point(|&(x, _)| x <= r);
    let (r0, w0) = samples[idx - 1];
    let (r1, w1) = samples[idx];
    w0 + (w1 - w0) * (r - r0) / (r1 - r0)
}

/// Pieces `(a, b, A, B)` with density `A + B r` on `[a, b]`, covering `[0, 1]`.
fn table_pieces(samples: &[(f64, f64)]) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::with_capacity(samples.len() + 1);
    let first = samples[0];
    if first.0 > 0.0 {
        out.push((0.0, first.0, first.1, 0.0));
    }
    for w in samples.windows(2) {
        let (r0, w0) = w[0];
        let (r1, w1) = w[1];
        let slope = (w1 - w0) / (r1 - r0);
        out.push((r0, r1, w0 - slope * r0, slope));
    }
    let last = samples[samples.len() - 1];
    out.push((last.0, 1.0, last.1, 0.0));
    out
}

/// `int_lo^hi r^s (A + B r) dr` summed over the interpolant.
fn table_moment_integral(samples: &[(f64, f64)], lo: f64, hi: f64, s: f64) -> f64 {
    let mut acc = 0.0;
    for (a, b, ca, cb) in table_pieces(samples) {
        let a = a.max(lo);
        let b = b.min(hi);
        if b <= a {
            continue;
        }
        let p1 = s + 1.0;
        let p2 = s + 2.0;
        acc += ca * (powf(b, p1) - powf(a, p1)) / p1 + cb * (powf(b, p2) - powf(a, p2)) / p2;
    }
    acc
}

/// Monotone cubic Hermite interpolant of `M(g) = int_{1-g}^1 s omega(s) ds`
/// on a geometric grid of `g`, in log-log coordinates.
#[derive(Debug, Clone)]
pub struct CarlesonProfile {
    gs: Vec<f64>,
    log_g: Vec<f64>,
    log_m: Vec<f64>,
    slopes: Vec<f64>,
    linear: Option<Vec<f64>>,
}

impl CarlesonProfile {
    fn build(w: &RadialWeight) -> Self {
        let n = PROFILE_POINTS;
        // ascending g: g_0 = 2^-60 ... g_{n-1} = 1
        let gs: Vec<f64> = (0..n)
            .map(|i| powf(2.0, -PROFILE_OCTAVES * (1.0 - i as f64 / (n - 1) as f64)))
            .collect();
        let integrand = |t: f64| (1.0 - t) * w.density_gap(t);
        let mut ms = Vec::with_capacity(n);
        let base = integrate(integrand, &dyadic_breaks(gs[0], DYADIC_LEVELS), Tolerance::default())
            .map(|e| e.value)
            .unwrap_or(0.0);
        ms.push(base);
        for i in 1..n {
            let tol = Tolerance {
                rel: 1e-12,
                abs: 1e-14 * ms[i - 1],
                max_pieces: 64,
            };
            let piece = match integrate(integrand, &[gs[i - 1], gs[i]], tol) {
                Ok(e) => e.value,
                Err(Error::QuadratureFailure { value, .. }) => value,
                Err(_) => 0.0,
            };
            ms.push(ms[i - 1] + piece);
        }
        if ms.iter().any(|&m| !(m > 0.0)) {
            return CarlesonProfile {
                gs,
                log_g: Vec::new(),
                log_m: Vec::new(),
                slopes: Vec::new(),
                linear: Some(ms),
            };
        }
        let log_g: Vec<f64> = gs.iter().map(|&g| ln(g)).collect();
        let log_m: Vec<f64> = ms.iter().map(|&m| ln(m)).collect();
        // exact derivative d ln M / d ln g = g (1-g) omega(1-g) / M
        let mut slopes: Vec<f64> = gs
            .iter()
            .zip(&ms)
            .map(|(&g, &m)| g * integrand(g) / m)
            .collect();
        // Fritsch–Carlson limiter
        for i in 0..n - 1 {
            let h = log_g[i + 1] - log_g[i];
            let delta = (log_m[i + 1] - log_m[i]) / h;
            if delta == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / delta;
            let b = slopes[i + 1] / delta;
            if a < 0.0 {
                slopes[i] = 0.0;
            }
            if b < 0.0 {
                slopes[i + 1] = 0.0;
            }
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / crate::math::sqrt(s);
                slopes[i] = tau * a * delta;
                slopes[i + 1] = tau * b * delta;
            }
        }
        CarlesonProfile {
            gs,
            log_g,
            log_m,
            slopes,
            linear: None,
        }
    }

    /// Interpolated `M(g)` for `g in (0, 1]`.
    pub fn eval(&self, g: f64) -> f64 {
        if let Some(ms) = &self.linear {
            let gs = &self.gs;
            if g <= gs[0] {
                return ms[0] * g / gs[0];
            }
            let idx = gs.partition_point(|&x| x <= g).min(gs.len() - 1);
            let (g0, g1) = (gs[idx - 1], gs[idx]);
            return ms[idx - 1] + (ms[idx] - ms[idx - 1]) * (g - g0) / (g1 - g0);
        }
        let x = ln(g);
        let n = self.log_g.len();
        if x <= self.log_g[0] {
            return exp(self.log_m[0] + self.slopes[0] * (x - self.log_g[0]));
        }
        if x >= self.log_g[n - 1] {
            return exp(self.log_m[n - 1]);
        }
        let idx = self.log_g.partition_point(|&v| v <= x).min(n - 1);
        let (x0, x1) = (self.log_g[idx - 1], self.log_g[idx]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1) = (self.log_m[idx - 1], self.log_m[idx]);
        let (d0, d1) = (self.slopes[idx - 1], self.slopes[idx]);
        let t2 = t * t;
        let t3 = t2 * t;
        let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1;
        exp(y)
    }
}

// ---------------------------------------------------------------------------
// Doubling diagnostics

/// Default grid `r_j = 1 - 2^-j`, `j = 1..=40`.
pub fn default_doubling_grid() -> Vec<f64> {
    (1..=40).map(|j| 1.0 - powf(2.0, -(j as f64))).collect()
}

/// Default lower-doubling candidates.
pub const DEFAULT_THETAS: [f64; 4] = [1.5, 2.0, 4.0, 8.0];

/// Minimum excess over 1 required of the lower-doubling constant.
pub const LOWER_DOUBLING_MARGIN: f64 = 0.05;

/// Minimum separation `t - r` for the exponent regression pairs.
pub const EXPONENT_PAIR_SEPARATION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThetaCheck {
    pub theta: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoublingVerdict {
    pub in_dhat: bool,
    pub in_dcheck: bool,
    pub in_d: bool,
}

/// Measured doubling constants of a radial weight.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoublingReport {
    /// `max_r omega_hat(r) / omega_hat((1+r)/2)`
    pub upper_constant: f64,
    /// Selected `(C_check, theta)`, if any candidate clears the margin.
    pub lower_pair: Option<(f64, f64)>,
    pub theta_checks: Vec<ThetaCheck>,
    /// `(alpha_low, beta_high)`: extreme pairwise log-ratio slopes.
    pub exponents: (f64, f64),
    /// Least-squares slope of the pairwise log-ratios.
    pub fitted_exponent: f64,
    pub grid: Vec<f64>,
    /// Local upper ratios `omega_hat(r) / omega_hat((1+r)/2)` on `grid`.
    pub upper_ratios: Vec<f64>,
    pub dropped_points: usize,
    pub verdict: DoublingVerdict,
}

/// Measures the upper and lower doubling constants and the power bounds of
/// `omega_hat` on a grid of radii.
pub fn doubling_report(w: &RadialWeight, grid: &[f64], thetas: &[f64]) -> Result<DoublingReport> {
    if grid.is_empty() {
        return Err(invalid("doubling grid is empty"));
    }
    if thetas.iter().any(|&t| !(t > 1.0)) {
        return Err(invalid("theta candidates must exceed 1"));
    }
    for pair in grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(invalid("doubling grid must be strictly increasing"));
        }
    }
    if grid.iter().any(|&r| !(0.0..1.0).contains(&r)) {
        return Err(invalid("doubling grid must lie in [0, 1)"));
    }

    let usable = |v: f64| v.is_finite() && v > 1e-300;
    let mut kept = Vec::with_capacity(grid.len());
    let mut tails = Vec::with_capacity(grid.len());
    let mut upper_ratios = Vec::with_capacity(grid.len());
    let mut dropped = 0usize;
    for &r in grid {
        let g = 1.0 - r;
        let here = w.tail_mass_gap(g)?;
        let half = w.tail_mass_gap(0.5 * g)?;
        if !usable(here) || !usable(half) {
            dropped += 1;
            continue;
        }
        kept.push(r);
        tails.push(here);
        upper_ratios.push(here / half);
    }
    if kept.is_empty() {
        return Err(invalid("every grid point underflowed"));
    }
    let upper_constant = upper_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut theta_checks = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let mut min_ratio = f64::INFINITY;
        for (&r, &here) in kept.iter().zip(&tails) {
            let inner = w.tail_mass_gap((1.0 - r) / theta)?;
            if usable(inner) {
                min_ratio = min_ratio.min(here / inner);
            }
        }
        theta_checks.push(ThetaCheck {
            theta,
            constant: min_ratio,
        });
    }
    let mut sorted_checks = theta_checks.clone();
    sorted_checks.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let lower_pair = sorted_checks
        .iter()
        .find(|c| c.constant.is_finite() && c.constant > 1.0 + LOWER_DOUBLING_MARGIN)
        .map(|c| (c.constant, c.theta));

    let mut slopes = Vec::new();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..kept.len() {
        for k in i + 1..kept.len() {
            if kept[k] - kept[i] < EXPONENT_PAIR_SEPARATION {
                continue;
            }
            let x = ln((1.0 - kept[i]) / (1.0 - kept[k]));
            let y = ln(tails[i] / tails[k]);
            slopes.push(y / x);
            sxy += x * y;
            sxx += x * x;
        }
    }
    let (alpha_low, beta_high, fitted) = if slopes.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi, sxy / sxx)
    };

    // Upper doubling fails if the local ratio keeps growing near the boundary.
    let tail_growth = upper_ratios.len() >= 6
        && upper_ratios[upper_ratios.len() - 6..]
            .windows(2)
            .all(|p| p[1] >= 1.05 * p[0]);
    let in_dhat = upper_constant.is_finite() && upper_constant >= 1.0 && !tail_growth;
    let in_dcheck = lower_pair.is_some();
    Ok(DoublingReport {
        upper_constant,
        lower_pair,
        theta_checks,
        exponents: (alpha_low, beta_high),
        fitted_exponent: fitted,
        grid: kept,
        upper_ratios,
        dropped_points: dropped,
        verdict: DoublingVerdict {
            in_dhat,
            in_dcheck,
            in_d: in_dhat && in_dcheck,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_w(a: f64) -> RadialWeight {
        RadialWeight::standard(a).unwrap()
    }

    #[test]
    fn omega_hat_examples() {
        assert!((std_w(0.0).omega_hat(0.3).unwrap() - 0.7).abs() < 1e-15);
        let want = (2.0 - 3.0 * 0.5 + 0.125) / 3.0;
        assert!((std_w(1.0).omega_hat(0.5).unwrap() - want).abs() < 1e-15);
        assert!(std_w(2.0).omega_hat(1.0 - 1e-15).unwrap() < 1e-40);
    }

    #[test]
    fn moments_examples() {
        assert!((std_w(0.0).moment(3).unwrap() - 0.25).abs() < 1e-15);
        assert!((std_w(1.0).moment(1).unwrap() - 0.25).abs() < 1e-15);
        assert!((std_w(0.0).moment(0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn omega_tilde_examples() {
        assert!((std_w(0.0).omega_tilde(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((std_w(1.0).omega_tilde(0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((std_w(0.0).omega_tilde(0.9).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_alpha_tail_matches_quadrature() {
        let alpha = 0.37;
        let w = std_w(alpha);
        let custom = RadialWeight::custom("frac", Arc::new(move |r: f64| powf(1.0 - r * r, alpha))).unwrap();
        for &r in &[0.0, 0.4, 0.9, 0.999] {
            let a = w.omega_hat(r).unwrap();
            let b = custom.omega_hat(r).unwrap();
            assert!(((a - b) / b).abs() < 1e-9, "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn carleson_box_examples() {
        let w = std_w(0.0);
        assert!((w.carleson_box_weight(DiskPoint::ORIGIN).unwrap() - 1.0).abs() < 1e-15);
        let z = DiskPoint::new(0.5, 0.0).unwrap();
        let want = 3.0 / (16.0 * PI);
        assert!((w.carleson_box_weight(z).unwrap() - want).abs() < 1e-15);
        assert!(w.carleson_box_weight(DiskPoint { re: 1.0, im: 0.0 }).is_err());
    }

    #[test]
    fn table_weight_rejects_bad_rows() {
        let err = RadialWeight::table(alloc::vec![(0.0, 1.0), (0.5, -1.0)]).unwrap_err();
        assert!(matches!(err, Error::WeightTable { row: 1, .. }));
        let err = RadialWeight::table(alloc::vec![(0.0, 1.0), (0.0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::WeightTable { row: 1, .. }));
    }

    #[test]
    fn table_weight_constant_is_standard_zero() {
        let w = RadialWeight::table(alloc::vec![(0.0, 1.0), (0.5, 1.0)]).unwrap();
        assert!((w.omega_hat(0.3).unwrap() - 0.7).abs() < 1e-15);
        assert!((w.moment(3).unwrap() - 0.25).abs() < 1e-15);
        assert!((w.box_radial_mass_gap(0.5).unwrap() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn profile_interpolation_is_accurate() {
        let w = RadialWeight::custom("a1", Arc::new(|r: f64| (1.0 - r) * (1.0 + r))).unwrap();
        let exact = std_w(1.0);
        for &g in &[0.9, 0.5, 0.123, 1e-3, 1e-7, 3e-12] {
            let a = w.carleson_mass_fast(g);
            let b = exact.carleson_mass_fast(g);
            // the closure itself loses digits once 1 - r is tiny
            let tol = if g < 1e-9 { 1e-5 } else { 1e-8 };
            assert!(((a - b) / b).abs() < tol, "g={g}: {a} vs {b}");
        }
    }

    #[test]
    fn doubling_standard_zero() {
        let rep = doubling_report(&std_w(0.0), &default_doubling_grid(), &DEFAULT_THETAS).unwrap();
        assert_eq!(rep.upper_constant, 2.0);
        let two = rep.theta_checks.iter().find(|c| c.theta == 2.0).unwrap();
        assert!((two.constant - 2.0).abs() < 1e-12);
        assert!(rep.verdict.in_d);
        assert_eq!(rep.lower_pair.unwrap().1, 1.5);
    }

    #[test]
    fn doubling_standard_one_exponents() {
        let rep = doubling_report(&std_w(1.0), &default_doubling_grid(), &DEFAULT_THETAS).unwrap();
        let (lo, hi) = rep.exponents;
        assert!(lo > 0.0 && lo <= hi);
        assert!((lo - 2.0).abs() <= 0.2 && (hi - 2.0).abs() <= 0.2, "{lo} {hi}");
    }

    #[test]
    fn doubling_rejects_empty_grid() {
        assert!(doubling_report(&std_w(0.0), &[], &DEFAULT_THETAS).is_err());
    }

    #[test]
    fn exponentially_thin_weight_is_not_doubling() {
        let w = RadialWeight::custom("exp", Arc::new(|r: f64| exp(-1.0 / (1.0 - r).max(1e-300)))).unwrap();
        let grid: Vec<f64> = (1..=12).map(|j| 1.0 - powf(2.0, -(j as f64) * 0.5)).collect();
        let rep = doubling_report(&w, &grid, &DEFAULT_THETAS).unwrap();
        assert!(!rep.verdict.in_dhat);
    }
}
