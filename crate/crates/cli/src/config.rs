use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use bergcomp_core::criteria::{angles_for, circle_grid, default_a_grid, dyadic_radii};
use bergcomp_core::geometry::DiskPoint;
use bergcomp_core::operators::{OperatorSymbol, SymbolFn};
use bergcomp_core::quadrature::QuadratureSpec;
use bergcomp_core::weights::{default_doubling_grid, RadialWeight};
use serde::{Deserialize, Serialize};

use crate::table::read_weight_table;

/// One experiment. Keys are flat dotted paths (`quad.rings`, `grid.angles`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub name: String,
    /// `standard:alpha=<a>` or `table:<csv path>` (relative to the config).
    pub weight: String,
    /// Target weight; the source weight when absent.
    pub target_weight: Option<String>,
    pub p: f64,
    pub q: f64,
    pub phi: String,
    pub u: String,
    pub n: u32,
    /// Test-function exponent; chosen from the doubling report when absent.
    pub delta: Option<f64>,
    /// Subset of `order_bounded`, `bounded`, `carleson`, `carleson_vanishing`,
    /// `equivalence_gap`.
    pub criteria: Vec<String>,
    pub quad: QuadConfig,
    pub grid: GridConfig,
    pub carleson: CarlesonConfig,
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    pub rings: u32,
    pub sectors: u32,
    pub relerr: f64,
    pub cap: f64,
    pub levels: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Radii for the boundedness sweep; the origin plus `1 - 2^-j` when absent.
    pub a_radii: Option<Vec<f64>>,
    /// Angles per circle; one for rotation-invariant operators when absent.
    pub angles: Option<usize>,
    pub z_radii: Vec<f64>,
    pub tail_levels: u32,
    /// Radii for the doubling report.
    pub doubling: Option<Vec<f64>>,
    pub m_sweep: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CarlesonConfig {
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub pairs: usize,
    pub seed: u64,
    pub remainder_r: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            weight: "standard:alpha=0".into(),
            target_weight: None,
            p: 2.0,
            q: 2.0,
            phi: "identity".into(),
            u: "constant:1".into(),
            n: 0,
            delta: None,
            criteria: vec!["order_bounded".into(), "bounded".into(), "carleson".into()],
            quad: QuadConfig::default(),
            grid: GridConfig::default(),
            carleson: CarlesonConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        let s = QuadratureSpec::default();
        QuadConfig {
            rings: s.radial_rings,
            sectors: s.angular_sectors,
            relerr: s.rel_error_target,
            cap: s.divergence_cap,
            levels: s.max_refinement_levels,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            a_radii: None,
            angles: None,
            z_radii: vec![0.0, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99],
            tail_levels: 14,
            doubling: None,
            m_sweep: vec![5, 10, 20, 40],
        }
    }
}

impl Default for CarlesonConfig {
    fn default() -> Self {
        CarlesonConfig { r: 0.5 }
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            pairs: 10,
            seed: 1,
            remainder_r: vec![0.3, 0.5],
        }
    }
}

pub const CRITERIA: [&str; 5] = ["order_bounded", "bounded", "carleson", "carleson_vanishing", "equivalence_gap"];

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub rings: Option<u32>,
    pub relerr: Option<f64>,
}

/// A parsed config together with the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut config: ExperimentConfig =
        toml::from_str(&text).map_err(|e| anyhow!("config {}: {e}", path.display()))?;
    if let Some(r) = overrides.rings {
        config.quad.rings = r;
    }
    if let Some(e) = overrides.relerr {
        config.quad.relerr = e;
    }
    config.validate()?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, base_dir })
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            bail!("name: `{}` is not usable as a directory name", self.name);
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            bail!("p: must be positive, got {}", self.p);
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            bail!("q: must be positive, got {}", self.q);
        }
        for c in &self.criteria {
            if !CRITERIA.contains(&c.as_str()) {
                bail!("criteria: unknown criterion `{c}` (expected one of {})", CRITERIA.join(", "));
            }
        }
        if !(self.carleson.r > 0.0 && self.carleson.r < 1.0) {
            bail!("carleson.r: must lie in (0, 1), got {}", self.carleson.r);
        }
        check_radii("grid.z_radii", &self.grid.z_radii)?;
        if let Some(a) = &self.grid.a_radii {
            check_radii("grid.a_radii", a)?;
        }
        if let Some(d) = &self.grid.doubling {
            check_radii("grid.doubling", d)?;
        }
        if self.grid.angles == Some(0) {
            bail!("grid.angles: must be at least 1");
        }
        if self.grid.tail_levels == 0 || self.grid.tail_levels > 40 {
            bail!("grid.tail_levels: must lie in 1..=40, got {}", self.grid.tail_levels);
        }
        if self.grid.m_sweep.is_empty() || self.grid.m_sweep.contains(&0) {
            bail!("grid.m_sweep: must be nonempty with entries >= 1");
        }
        for &r in &self.oracle.remainder_r {
            if !(r > 0.0 && r < 1.0) {
                bail!("oracle.remainder_r: {r} outside (0, 1)");
            }
        }
        self.spec().validate().map_err(|e| anyhow!("quad: {e}"))?;
        Ok(())
    }

    pub fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            radial_rings: self.quad.rings,
            angular_sectors: self.quad.sectors,
            rel_error_target: self.quad.relerr,
            divergence_cap: self.quad.cap,
            max_refinement_levels: self.quad.levels,
        }
    }

    pub fn operator(&self) -> Result<OperatorSymbol> {
        let phi = SymbolFn::parse(&self.phi).map_err(|e| anyhow!("phi: {e}"))?;
        let u = SymbolFn::parse(&self.u).map_err(|e| anyhow!("u: {e}"))?;
        OperatorSymbol::new(phi, u, self.n).map_err(|e| anyhow!("operator: {e}"))
    }

    pub fn doubling_grid(&self) -> Vec<f64> {
        self.grid.doubling.clone().unwrap_or_else(default_doubling_grid)
    }

    pub fn a_grid(&self, op: &OperatorSymbol) -> Result<Vec<DiskPoint>> {
        match &self.grid.a_radii {
            None if self.grid.angles.is_none() => Ok(default_a_grid(op)),
            radii => {
                let mut default = vec![0.0];
                default.extend(dyadic_radii(self.grid.tail_levels));
                let radii = radii.clone().unwrap_or(default);
                Ok(circle_grid(&radii, self.angles(op))?)
            }
        }
    }

    pub fn z_grid(&self, op: &OperatorSymbol) -> Result<Vec<DiskPoint>> {
        Ok(circle_grid(&self.grid.z_radii, self.angles(op))?)
    }

    pub fn tail_radii(&self) -> Vec<f64> {
        dyadic_radii(self.grid.tail_levels)
    }

    fn angles(&self, op: &OperatorSymbol) -> usize {
        self.grid.angles.unwrap_or_else(|| angles_for(op))
    }
}

fn check_radii(key: &str, radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        bail!("{key}: grid is empty");
    }
    for &r in radii {
        if !(0.0..1.0).contains(&r) {
            bail!("{key}: radius {r} outside [0, 1)");
        }
    }
    Ok(())
}

/// Resolves a weight name; `table:` paths are relative to `base_dir`.
pub fn resolve_weight(name: &str, base_dir: &Path) -> Result<RadialWeight> {
    if let Some(path) = name.trim().strip_prefix("table:") {
        let path = base_dir.join(path.trim());
        return read_weight_table(&path);
    }
    RadialWeight::from_name(name).map_err(|e| anyhow!("weight: {e}"))
}

impl Loaded {
    pub fn source_weight(&self) -> Result<RadialWeight> {
        resolve_weight(&self.config.weight, &self.base_dir)
    }

    pub fn target_weight(&self) -> Result<RadialWeight> {
        match &self.config.target_weight {
            Some(t) => resolve_weight(t, &self.base_dir),
            None => self.source_weight(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: ExperimentConfig = toml::from_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn dotted_keys_reach_nested_tables() {
        let c: ExperimentConfig = toml::from_str("quad.rings = 20\ngrid.angles = 4\nphi = \"scaling:0.5\"").unwrap();
        assert_eq!(c.quad.rings, 20);
        assert_eq!(c.grid.angles, Some(4));
        assert_eq!(c.phi, "scaling:0.5");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<ExperimentConfig>("quad.ringz = 3").unwrap_err();
        assert!(err.to_string().contains("ringz"), "{err}");
    }

    #[test]
    fn empty_grid_is_an_argument_error() {
        let c: ExperimentConfig = toml::from_str("grid.z_radii = []").unwrap();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("grid.z_radii"), "{err}");
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig {
            delta: Some(3.0),
            target_weight: Some("standard:alpha=1".into()),
            ..ExperimentConfig::default()
        };
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<ExperimentConfig>(&text).unwrap(), c);
    }
}
