//! Gauss–Kronrod 7/15 rule and a globally adaptive 1-D integrator.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{powf, CompensatedSum};

/// Kronrod abscissae on `[0, 1]`; odd indices are the Gauss nodes, the last
/// entry is the centre.
pub(crate) const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

pub(crate) const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for `XGK[1], XGK[3], XGK[5], XGK[7]`.
pub(crate) const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// QUADPACK-style rescaling of a raw `|K - G|` difference.
pub(crate) fn scaled_error(raw: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = raw;
    if resasc != 0.0 && err != 0.0 {
        let scale = powf(200.0 * err / resasc, 1.5);
        err = resasc * if scale < 1.0 { scale } else { 1.0 };
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err < floor {
        err = floor;
    }
    err
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[i] = f1;
        fv2[i] = f2;
        resk += WGK[i] * (f1 + f2);
        resabs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            resg += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        resasc += WGK[i] * ((fv1[i] - mean).abs() + (fv2[i] - mean).abs());
    }
    let h = half.abs();
    Piece {
        a,
        b,
        value: resk * half,
        error: scaled_error(((resk - resg) * half).abs(), resabs * h, resasc * h),
    }
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_pieces: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-12,
            abs: 1e-300,
            max_pieces: 4000,
        }
    }
}

/// Result of a 1-D integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Integrates `f` over the union of consecutive intervals given by sorted
/// `breaks`, bisecting the worst piece until the tolerance is met.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> Result<Estimate> {
    if breaks.len() < 2 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut pieces: Vec<Piece> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    loop {
        let (value, error) = totals(&pieces);
        if !value.is_finite() {
            return Err(Error::QuadratureFailure { value, error });
        }
        let target = (tol.rel * value.abs()).max(tol.abs);
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if pieces.len() >= tol.max_pieces {
            return Err(Error::QuadratureFailure { value, error });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = pieces[worst];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Interval cannot be split further in floating point.
            return if error <= 1e3 * target {
                Ok(Estimate { value, error })
            } else {
                Err(Error::QuadratureFailure { value, error })
            };
        }
        pieces[worst] = gk15(&f, p.a, mid);
        pieces.insert(worst + 1, gk15(&f, mid, p.b));
    }
}

fn totals(pieces: &[Piece]) -> (f64, f64) {
    let mut v = CompensatedSum::default();
    let mut e = 0.0;
    for p in pieces {
        v.add(p.value);
        e += p.error;
    }
    (v.value(), e)
}

/// Breakpoints `0, g 2^-levels, ..., g/2, g` clustering towards zero.
pub fn dyadic_breaks(g: f64, levels: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels as usize + 2);
    out.push(0.0);
    for k in (0..=levels).rev() {
        out.push(g * powf(2.0, -(k as f64)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let est = integrate(|x| x * x * x + 2.0 * x, &[0.0, 2.0], Tolerance::default()).unwrap();
        assert!((est.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_with_dyadic_breaks() {
        // int_0^1 t^{-1/2} dt = 2
        let est = integrate(|t| 1.0 / crate::math::sqrt(t), &dyadic_breaks(1.0, 60), Tolerance::default()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn rule_weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-14);
        assert!((g - 2.0).abs() < 1e-14);
    }
}
