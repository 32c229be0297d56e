//! Result files.
//!
//! * `summary.json`: run metadata plus one record per sweep point and variant.
//! * `point_<i>.csv`: empirical per-UE SE CDFs of sweep point `i`, columns
//!   `ue_id, scheme, csi_mode, sweep_axis, sweep_value, se_bps_hz, percentile`.
//! * `sum_se.csv`: per-layout sum SE of every point and variant.
//!
//! Files contain no timestamps, so identical inputs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cli::config::{OutputFormat, RunConfig};
use crate::engine::{SweepResult, VariantStats};
use crate::error::{Error, Result};

pub const CDF_COLUMNS: [&str; 7] = [
    "ue_id",
    "scheme",
    "csi_mode",
    "sweep_axis",
    "sweep_value",
    "se_bps_hz",
    "percentile",
];

/// Fails early if `dir` cannot be created or written.
pub fn preflight(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))?;
    Ok(())
}

/// One row of an empirical CDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfPoint {
    pub ue_id: usize,
    pub se: f64,
    pub percentile: f64,
}

/// Sorts samples and attaches `i / n` percentiles. Ties keep `ue_id` order.
pub fn empirical_cdf(samples: &[(usize, f64)]) -> Vec<CdfPoint> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, (ue_id, se))| CdfPoint {
            ue_id,
            se,
            percentile: (i + 1) as f64 / n,
        })
        .collect()
}

#[derive(Serialize)]
struct Metadata<'a> {
    version: &'a str,
    seed: u64,
    config: toml::Value,
    sweep_axis: &'a str,
}

#[derive(Serialize)]
struct VariantRecord {
    scheme: String,
    csi_mode: String,
    mean_sum_se: f64,
    layout_sum_se: Vec<f64>,
    num_samples: usize,
    outage_count: usize,
    degenerate_draws: usize,
    cdf: Vec<CdfPoint>,
}

#[derive(Serialize)]
struct PointRecord {
    sweep_value: f64,
    variants: Vec<VariantRecord>,
}

#[derive(Serialize)]
struct Summary<'a> {
    metadata: Metadata<'a>,
    points: Vec<PointRecord>,
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn check_finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Internal(format!("non-finite {what}")))
    }
}

/// Writes the CDF rows of `stats` to a CSV file.
pub fn write_cdf_csv(path: &Path, axis: &str, value: f64, stats: &[&VariantStats]) -> Result<PathBuf> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CDF_COLUMNS).map_err(|e| csv_error(path, e))?;
    for s in stats {
        let (scheme, csi) = (s.variant.scheme.to_string(), s.variant.csi.to_string());
        for p in empirical_cdf(&s.pooled_se()) {
            check_finite(p.se, "SE")?;
            w.write_record([
                p.ue_id.to_string(),
                scheme.clone(),
                csi.clone(),
                axis.to_string(),
                value.to_string(),
                p.se.to_string(),
                p.percentile.to_string(),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    write(path.to_path_buf(), &bytes)
}

/// Writes all result files for `result` into `dir`; returns the paths written.
pub fn emit_results(result: &SweepResult, config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    preflight(dir)?;
    let axis = result.axis.name();
    let mut written = Vec::new();

    if config.formats.contains(&OutputFormat::Json) {
        let points = result
            .points
            .iter()
            .map(|p| {
                let variants = p
                    .variants
                    .iter()
                    .map(|s| {
                        Ok(VariantRecord {
                            scheme: s.variant.scheme.to_string(),
                            csi_mode: s.variant.csi.to_string(),
                            mean_sum_se: check_finite(s.mean_sum_se, "mean sum SE")?,
                            layout_sum_se: s.layouts.iter().map(|l| l.sum_se).collect(),
                            num_samples: s.num_samples(),
                            outage_count: s.outage_count(),
                            degenerate_draws: s.layouts.iter().map(|l| l.degenerate_draws).sum(),
                            cdf: empirical_cdf(&s.pooled_se()),
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(PointRecord {
                    sweep_value: p.value,
                    variants,
                })
            })
            .collect::<Result<_>>()?;
        let summary = Summary {
            metadata: Metadata {
                version: env!("CARGO_PKG_VERSION"),
                seed: config.params.master_seed,
                config: toml::from_str(&config.to_toml()).expect("config TOML parses"),
                sweep_axis: axis,
            },
            points,
        };
        let mut json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Internal(e.to_string()))?;
        json.push('\n');
        written.push(write(dir.join("summary.json"), json.as_bytes())?);
    }

    if config.formats.contains(&OutputFormat::Csv) {
        for (i, p) in result.points.iter().enumerate() {
            let stats: Vec<&VariantStats> = p.variants.iter().collect();
            written.push(write_cdf_csv(&dir.join(format!("point_{i}.csv")), axis, p.value, &stats)?);
        }
        let path = dir.join("sum_se.csv");
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sweep_axis", "sweep_value", "scheme", "csi_mode", "layout", "sum_se_bps_hz"])
            .map_err(|e| csv_error(&path, e))?;
        for p in &result.points {
            for s in &p.variants {
                for (li, l) in s.layouts.iter().enumerate() {
                    w.write_record([
                        axis.to_string(),
                        p.value.to_string(),
                        s.variant.scheme.to_string(),
                        s.variant.csi.to_string(),
                        li.to_string(),
                        check_finite(l.sum_se, "sum SE")?.to_string(),
                    ])
                    .map_err(|e| csv_error(&path, e))?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        written.push(write(path, &bytes)?);
    }
    Ok(written)
}
