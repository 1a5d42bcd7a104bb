use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    write_atomic(path, &text)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    write_atomic(path, &bytes)
}

/// Column documentation for every CSV the driver writes.
pub const CSV_SCHEMA: &[(&str, &[(&str, &str)])] = &[
    (
        "weight_report.csv",
        &[
            ("role", "source or target weight"),
            ("r", "radius"),
            ("omega_hat", "int_r^1 omega(s) ds"),
            ("omega_tilde", "omega_hat(r) / (1 - r)"),
            ("box_weight", "omega(S(z)) for |z| = r"),
            ("upper_ratio", "omega_hat(r) / omega_hat((1 + r) / 2)"),
        ],
    ),
    (
        "criteria.csv",
        &[
            ("criterion", "criterion name"),
            ("re", "real part of the grid point (empty for integrals)"),
            ("im", "imaginary part of the grid point"),
            ("value", "local value, or the integral for order_bounded"),
            ("error_estimate", "quadrature error estimate"),
            ("verdict", "quadrature verdict at this point"),
        ],
    ),
    (
        "essnorm.csv",
        &[
            ("r", "tail radius 1 - 2^-j"),
            ("sup_integral", "max of B(a) over the circle |a| = r"),
            ("probe_norm", "norm of the operator applied to the test function at a = r"),
            ("probe_power", "probe_norm^q"),
        ],
    ),
    (
        "oracle_identity.csv",
        &[
            ("pair", "index of the random (operator, function) pair"),
            ("operator", "phi, u and n of the pair"),
            ("function", "function description"),
            ("q", "target exponent"),
            ("image_norm_q", "image norm to the power q"),
            ("pullback", "pullback integral of |f^(n)|^q"),
            ("rel_diff", "relative difference"),
        ],
    ),
    (
        "oracle_truncation.csv",
        &[
            ("flavor", "sharp or fejer"),
            ("m", "truncation degree"),
            ("r", "radius of the sup check"),
            ("norm_ratio", "norm of the head over the norm of the function"),
            ("remainder_sup", "sup over |z| <= r of the tail of f"),
            ("kernel_tail", "reproducing-kernel tail bound"),
            ("ratio", "remainder_sup / kernel_tail"),
        ],
    ),
];

pub fn write_schema(dir: &Path) -> Result<()> {
    let files: serde_json::Map<String, serde_json::Value> = CSV_SCHEMA
        .iter()
        .map(|(file, cols)| {
            let cols: Vec<_> = cols.iter().map(|(n, d)| json!({"name": n, "description": d})).collect();
            (file.to_string(), json!(cols))
        })
        .collect();
    write_json(&dir.join("csv_schema.json"), &files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("x.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
