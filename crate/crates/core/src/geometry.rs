//! Pseudo-hyperbolic geometry of the unit disk and the regions used by the
//! Carleson-type criteria.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{atan2, modulus, wrap_angle};

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiskPoint {
    pub re: f64,
    pub im: f64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { re: 0.0, im: 0.0 };

    /// Checked constructor; rejects points with `|z| >= 1`.
    pub fn new(re: f64, im: f64) -> Result<Self> {
        let p = DiskPoint { re, im };
        if !(re.is_finite() && im.is_finite()) || p.modulus() >= 1.0 {
            return Err(Error::OutsideDisk { re, im });
        }
        Ok(p)
    }

    pub fn from_polar(radius: f64, angle: f64) -> Result<Self> {
        let z = Complex64::from_polar(radius, angle);
        Self::new(z.re, z.im)
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    #[inline]
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    #[inline]
    pub fn modulus(self) -> f64 {
        modulus(self.to_complex())
    }

    #[inline]
    pub fn arg(self) -> f64 {
        atan2(self.im, self.re)
    }

    #[inline]
    pub fn is_origin(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.to_complex()
    }
}

/// Disk automorphism `(a - u) / (1 - conj(a) u)`; an involution.
pub fn mobius(a: Complex64, u: Complex64) -> Complex64 {
    (a - u) / (Complex64::new(1.0, 0.0) - a.conj() * u)
}

/// Pseudo-hyperbolic distance `|(w - z) / (1 - conj(w) z)|`.
pub fn pseudo_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    let (z, w) = (z.to_complex(), w.to_complex());
    let num = modulus(w - z);
    if num == 0.0 {
        return 0.0;
    }
    num / modulus(Complex64::new(1.0, 0.0) - w.conj() * z)
}

/// Regions of the disk used by measures and criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Region {
    /// `{xi : rho(xi, center) < radius}`
    PseudoDisk { center: DiskPoint, radius: f64 },
    /// `{xi : |z| <= |xi| < 1, |arg xi - arg z| < (1 - |z|)/2}`; the whole
    /// disk when `z = 0`.
    CarlesonSquare { z: DiskPoint },
    FullDisk,
    /// `{xi : radius < |xi| < 1}`
    AnnulusComplement { radius: f64 },
}

impl Region {
    pub fn pseudo_disk(center: DiskPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(crate::error::invalid("pseudo-disk radius must lie in (0, 1)"));
        }
        Ok(Region::PseudoDisk { center, radius })
    }

    pub fn carleson_square(z: DiskPoint) -> Self {
        if z.is_origin() {
            Region::FullDisk
        } else {
            Region::CarlesonSquare { z }
        }
    }

    pub fn annulus_complement(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(crate::error::invalid("annulus radius must lie in (0, 1)"));
        }
        Ok(Region::AnnulusComplement { radius })
    }

    /// Exact membership test.
    pub fn contains(&self, xi: DiskPoint) -> bool {
        match *self {
            Region::FullDisk => true,
            Region::PseudoDisk { center, radius } => pseudo_distance(center, xi) < radius,
            Region::CarlesonSquare { z } => {
                if z.is_origin() {
                    return true;
                }
                let rz = z.modulus();
                if xi.modulus() < rz {
                    return false;
                }
                if xi.is_origin() {
                    return false;
                }
                wrap_angle(xi.arg() - z.arg()).abs() < 0.5 * (1.0 - rz)
            }
            Region::AnnulusComplement { radius } => xi.modulus() > radius,
        }
    }

    /// Euclidean centre and radius of a pseudo-hyperbolic disk.
    pub fn euclidean_disk(center: DiskPoint, radius: f64) -> (Complex64, f64) {
        let c = center.to_complex();
        let m2 = c.norm_sqr();
        let den = 1.0 - radius * radius * m2;
        (c * ((1.0 - radius * radius) / den), radius * (1.0 - m2) / den)
    }
}

/// Membership test; see [`Region::contains`].
pub fn region_contains(region: &Region, xi: DiskPoint) -> bool {
    region.contains(xi)
}
