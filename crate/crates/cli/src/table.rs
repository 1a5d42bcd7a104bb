use std::path::Path;

use anyhow::{anyhow, Context, Result};
use bergcomp_core::weights::RadialWeight;
use bergcomp_core::Error;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
struct Sample {
    r: f64,
    omega: f64,
}

/// Reads a `r,omega` CSV. Rows are numbered from 1, not counting the header.
pub fn read_weight_table(path: &Path) -> Result<RadialWeight> {
    let file = std::fs::File::open(path).with_context(|| format!("opening weight table {}", path.display()))?;
    parse_weight_table(file).map_err(|e| anyhow!("weight table {}: {e}", path.display()))
}

pub fn parse_weight_table<R: std::io::Read>(input: R) -> Result<RadialWeight> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut samples = Vec::new();
    for (i, rec) in reader.deserialize::<Sample>().enumerate() {
        let s = rec.map_err(|e| anyhow!("row {}: {e}", i + 1))?;
        samples.push((s.r, s.omega));
    }
    RadialWeight::table(samples).map_err(|e| match e {
        Error::WeightTable { row, reason } => anyhow!("row {}: {reason}", row + 1),
        other => anyhow!(other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_sample_names_its_row() {
        let text = "r,omega\n0.0,1.0\n0.5,0.7\n0.9,-0.1\n";
        let err = parse_weight_table(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");
    }

    #[test]
    fn malformed_number_names_its_row() {
        let text = "r,omega\n0.0,1.0\n0.5,abc\n";
        let err = parse_weight_table(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
    }

    #[test]
    fn constant_table_matches_unweighted_mass() {
        let text = "r,omega\n0.0,1\n0.5,1\n0.99,1\n";
        let w = parse_weight_table(text.as_bytes()).unwrap();
        assert!((w.omega_hat(0.0).unwrap() - 1.0).abs() < 1e-9);
    }
}
