//! Scalar helpers built on `libm` so results do not depend on whether `std`
//! is linked.

use num_complex::Complex64;

pub use core::f64::consts::PI;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `x^y` for `x > 0`; integer and half-integer exponents skip `pow`.
#[inline]
pub fn pow_pos(x: f64, y: f64) -> f64 {
    let twice = 2.0 * y;
    if twice == libm::trunc(twice) && twice.abs() <= 128.0 {
        let k = twice as i32;
        let base = if k % 2 == 0 { x } else { libm::sqrt(x) };
        let m = if k % 2 == 0 { k / 2 } else { k };
        let mut e = m.unsigned_abs();
        let mut b = base;
        let mut acc = 1.0;
        while e > 0 {
            if e & 1 == 1 {
                acc *= b;
            }
            b *= b;
            e >>= 1;
        }
        if m < 0 { 1.0 / acc } else { acc }
    } else {
        libm::pow(x, y)
    }
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `|z|`
#[inline]
pub fn modulus(z: Complex64) -> f64 {
    hypot(z.re, z.im)
}

/// Principal-branch power `w^s` for `Re w > 0`.
#[inline]
pub fn cpow(w: Complex64, s: f64) -> Complex64 {
    let r = modulus(w);
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let arg = atan2(w.im, w.re);
    let m = powf(r, s);
    let (sn, cs) = sin_cos(s * arg);
    Complex64::new(m * cs, m * sn)
}

/// Integer power of a complex number by repeated squaring.
pub fn cpowi(mut base: Complex64, mut n: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta - two_pi * floor((theta + PI) / two_pi);
    if t <= -PI {
        t += two_pi;
    }
    if t > PI {
        t -= two_pi;
    }
    t
}

/// Euler Beta function.
pub fn beta(a: f64, b: f64) -> f64 {
    exp(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

/// Regularized incomplete Beta function `I_x(a, b)`.
pub fn beta_inc_reg(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * ln(x) + b * ln_1p(-x);
    if x < (a + 1.0) / (a + b + 2.0) {
        exp(ln_front) * beta_cf(x, a, b) / a
    } else {
        1.0 - exp(ln_front) * beta_cf(1.0 - x, b, a) / b
    }
}

// Modified Lentz evaluation of the incomplete Beta continued fraction.
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Rising factorial `x (x+1) ... (x+n-1)`, equal to 1 for `n = 0`.
pub fn rising_factorial(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// Neumaier-compensated summation in iteration order.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incomplete_beta_matches_polynomial_case() {
        // I_x(1, 1) = x, I_x(2, 1) = x^2, I_x(1, 2) = 1 - (1-x)^2
        for &x in &[0.1, 0.35, 0.8] {
            assert!((beta_inc_reg(x, 1.0, 1.0) - x).abs() < 1e-14);
            assert!((beta_inc_reg(x, 2.0, 1.0) - x * x).abs() < 1e-14);
            assert!((beta_inc_reg(x, 1.0, 2.0) - (1.0 - (1.0 - x) * (1.0 - x))).abs() < 1e-14);
        }
    }

    #[test]
    fn incomplete_beta_half_exponent() {
        // I_x(1, 1/2) = 1 - sqrt(1 - x)
        for &x in &[0.05, 0.5, 0.99] {
            let want = 1.0 - sqrt(1.0 - x);
            assert!((beta_inc_reg(x, 1.0, 0.5) - want).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn pow_pos_matches_pow() {
        for &x in &[1e-12, 0.3, 1.0, 7.5] {
            for &y in &[-6.0, -3.5, -0.5, 0.0, 0.5, 2.0, 3.0, 1.25, -2.7] {
                let want = powf(x, y);
                assert!(((pow_pos(x, y) - want) / want).abs() < 1e-13, "{x} {y}");
            }
        }
    }

    #[test]
    fn wrap_angle_range() {
        for &t in &[-7.0, -PI, 0.0, PI, 3.5, 12.0] {
            let w = wrap_angle(t);
            assert!(w > -PI && w <= PI);
            assert!(((w - t) / (2.0 * PI)).fract().abs() < 1e-12 || ((w - t) / (2.0 * PI)).fract().abs() > 1.0 - 1e-12);
        }
        assert_eq!(wrap_angle(-PI), PI);
    }

    #[test]
    fn cpow_matches_integer_power() {
        let w = Complex64::new(0.7, -0.2);
        let a = cpow(w, 3.0);
        let b = cpowi(w, 3);
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (m, c) = linear_fit(&xs, &ys).unwrap();
        assert!((m - 2.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-14);
    }
}
