//! Flat TOML run configuration.
//!
//! Every key is optional; missing keys take the reference scenario values.
//! `key=value` overrides are applied on top of the file with the value parsed
//! as a TOML literal (bare words are taken as strings).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::engine::{SweepAxis, Variant};
use crate::error::{Error, Result};
use crate::estimation::CsiMode;
use crate::geometry::{ClusterOrder, Pathloss, RateUnit, SystemParams};
use crate::receivers::ReceiverScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// On-disk shape of the configuration. Field names are the config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    area_side: f64,
    #[serde(alias = "L")]
    num_rrh: usize,
    #[serde(alias = "K")]
    num_ue: usize,
    #[serde(alias = "M")]
    antennas_per_rrh: usize,
    #[serde(alias = "tau_p")]
    pilot_dim: usize,
    #[serde(alias = "T")]
    coherence_block: usize,
    #[serde(alias = "delta")]
    angular_spread: f64,
    #[serde(alias = "eta")]
    qos_threshold: f64,
    #[serde(alias = "Q")]
    max_cluster_size: usize,
    cluster_order: ClusterOrder,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr: Option<f64>,
    num_layouts: usize,
    num_fading_draws: usize,
    seed: u64,
    pathloss_intercept_db: f64,
    pathloss_slope_db: f64,
    pathloss_min_distance: f64,
    shadowing_std_db: f64,
    rate_unit: RateUnit,
    schemes: Vec<ReceiverScheme>,
    csi_modes: Vec<CsiMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_axis: Option<SweepAxis>,
    sweep_values: Vec<f64>,
    output_dir: PathBuf,
    formats: Vec<OutputFormat>,
}

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig::from(&RunConfig::default())
    }
}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub schemes: Vec<ReceiverScheme>,
    pub csi_modes: Vec<CsiMode>,
    pub sweep: Option<(SweepAxis, Vec<f64>)>,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SystemParams::default(),
            schemes: ReceiverScheme::ALL.to_vec(),
            csi_modes: CsiMode::ALL.to_vec(),
            sweep: None,
            output_dir: PathBuf::from("results"),
            formats: vec![OutputFormat::Json, OutputFormat::Csv],
        }
    }
}

impl From<&RunConfig> for RawConfig {
    fn from(c: &RunConfig) -> Self {
        let p = &c.params;
        RawConfig {
            area_side: p.area_side,
            num_rrh: p.num_rrh,
            num_ue: p.num_ue,
            antennas_per_rrh: p.antennas_per_rrh,
            pilot_dim: p.pilot_dim,
            coherence_block: p.coherence_block,
            angular_spread: p.angular_spread,
            qos_threshold: p.qos_threshold,
            max_cluster_size: p.max_cluster_size,
            cluster_order: p.cluster_order,
            snr: p.snr,
            num_layouts: p.num_layouts,
            num_fading_draws: p.num_fading_draws,
            seed: p.master_seed,
            pathloss_intercept_db: p.pathloss.intercept_db,
            pathloss_slope_db: p.pathloss.slope_db,
            pathloss_min_distance: p.pathloss.min_distance,
            shadowing_std_db: p.shadowing_std_db,
            rate_unit: p.rate_unit,
            schemes: c.schemes.clone(),
            csi_modes: c.csi_modes.clone(),
            sweep_axis: c.sweep.as_ref().map(|s| s.0),
            sweep_values: c.sweep.as_ref().map(|s| s.1.clone()).unwrap_or_default(),
            output_dir: c.output_dir.clone(),
            formats: c.formats.clone(),
        }
    }
}

impl RawConfig {
    fn into_run_config(self) -> Result<RunConfig> {
        let params = SystemParams {
            area_side: self.area_side,
            num_rrh: self.num_rrh,
            num_ue: self.num_ue,
            antennas_per_rrh: self.antennas_per_rrh,
            pilot_dim: self.pilot_dim,
            coherence_block: self.coherence_block,
            angular_spread: self.angular_spread,
            qos_threshold: self.qos_threshold,
            max_cluster_size: self.max_cluster_size,
            cluster_order: self.cluster_order,
            snr: self.snr,
            num_layouts: self.num_layouts,
            num_fading_draws: self.num_fading_draws,
            master_seed: self.seed,
            pathloss: Pathloss {
                intercept_db: self.pathloss_intercept_db,
                slope_db: self.pathloss_slope_db,
                min_distance: self.pathloss_min_distance,
            },
            shadowing_std_db: self.shadowing_std_db,
            rate_unit: self.rate_unit,
        };
        let sweep = match (self.sweep_axis, self.sweep_values.is_empty()) {
            (None, true) => None,
            (Some(axis), false) => Some((axis, self.sweep_values)),
            (None, false) => return Err(Error::config("sweep_axis", "sweep_values given without an axis")),
            (Some(_), true) => return Err(Error::config("sweep_values", "axis given without values")),
        };
        let cfg = RunConfig {
            params,
            schemes: self.schemes,
            csi_modes: self.csi_modes,
            sweep,
            output_dir: self.output_dir,
            formats: self.formats,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.master_seed > i64::MAX as u64 {
            return Err(Error::config("seed", "must fit a signed 64-bit TOML integer"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "at least one scheme required"));
        }
        if self.csi_modes.is_empty() {
            return Err(Error::config("csi_modes", "at least one CSI mode required"));
        }
        if self.formats.is_empty() {
            return Err(Error::config("formats", "at least one output format required"));
        }
        if let Some((axis, values)) = &self.sweep {
            for &v in values {
                axis.apply(&self.params, v)
                    .map_err(|e| Error::config("sweep_values", e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn variants(&self) -> Vec<Variant> {
        Variant::grid(&self.schemes, &self.csi_modes)
    }

    /// Serializes to TOML that [`parse_config`] maps back to `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(&RawConfig::from(self)).expect("config is always serializable")
    }
}

const ALIASES: [(&str, &str); 8] = [
    ("L", "num_rrh"),
    ("K", "num_ue"),
    ("M", "antennas_per_rrh"),
    ("tau_p", "pilot_dim"),
    ("T", "coherence_block"),
    ("delta", "angular_spread"),
    ("eta", "qos_threshold"),
    ("Q", "max_cluster_size"),
];

fn canonical(key: &str) -> &str {
    ALIASES
        .iter()
        .find(|(a, _)| *a == key)
        .map_or(key, |(_, c)| c)
}

fn known_keys() -> Vec<String> {
    match Value::try_from(RawConfig::default()).expect("default config serializes") {
        Value::Table(t) => {
            let mut keys: Vec<String> = t.keys().cloned().collect();
            keys.extend(["snr", "sweep_axis"].map(String::from));
            keys
        }
        _ => unreachable!("struct serializes to a table"),
    }
}

/// Parses one `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| Error::config(s, "override must look like key=value"))?;
    let key = key.trim();
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}

/// Merges file contents and overrides into a validated [`RunConfig`].
pub fn parse_config(contents: &str, overrides: &[String]) -> Result<RunConfig> {
    let file: Table = contents
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
    let known = known_keys();
    let mut merged = Table::new();
    let entries = file
        .into_iter()
        .map(Ok)
        .chain(overrides.iter().map(|o| parse_override(o)));
    for entry in entries {
        let (key, value) = entry?;
        let canon = canonical(&key).to_string();
        if !known.contains(&canon) {
            return Err(Error::config(key, "unknown key"));
        }
        let single: Table = [(canon.clone(), value.clone())].into_iter().collect();
        if let Err(e) = single.try_into::<RawConfig>() {
            return Err(Error::config(key, e.message().to_string()));
        }
        merged.insert(canon, value);
    }
    let raw: RawConfig = merged
        .try_into()
        .map_err(|e: toml::de::Error| Error::config("<config>", e.message().to_string()))?;
    raw.into_run_config()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_file_gives_reference_defaults() {
        let c = parse_config("", &[]).unwrap();
        let p = &c.params;
        assert_eq!((p.num_rrh, p.num_ue, p.antennas_per_rrh, p.pilot_dim), (50, 100, 64, 20));
        assert_eq!((p.max_cluster_size, p.coherence_block), (30, 200));
        assert_eq!(p.qos_threshold, 1.0);
        assert_eq!(p.angular_spread, PI / 16.0);
        assert_eq!(p.area(), 500.0 * 500.0);
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn override_keeps_other_defaults() {
        let c = parse_config("", &["Q=15".into()]).unwrap();
        assert_eq!(c.params.max_cluster_size, 15);
        let mut expected = RunConfig::default();
        expected.params.max_cluster_size = 15;
        assert_eq!(c, expected);
    }

    #[test]
    fn overrides_win_over_file() {
        let c = parse_config("num_ue = 10\nmax_cluster_size = 4", &["num_ue=12".into()]).unwrap();
        assert_eq!(c.params.num_ue, 12);
        assert_eq!(c.params.max_cluster_size, 4);
    }

    #[test]
    fn pilot_dim_above_block_names_key() {
        let err = parse_config("tau_p = 300", &[]).unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "pilot_dim"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_key_and_type_mismatch_name_key() {
        match parse_config("bogus = 1", &[]).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "bogus"),
            e => panic!("unexpected {e}"),
        }
        match parse_config("num_rrh = \"many\"", &[]).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "num_rrh"),
            e => panic!("unexpected {e}"),
        }
        match parse_config("", &["schemes=[\"zf\"]".into()]).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "schemes"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn sweep_is_validated() {
        let c = parse_config("sweep_axis = \"max_cluster_size\"\nsweep_values = [2, 5]", &[]).unwrap();
        assert_eq!(c.sweep, Some((SweepAxis::MaxClusterSize, vec![2.0, 5.0])));
        match parse_config("sweep_axis = \"pilot_dim\"\nsweep_values = [500]", &[]).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "sweep_values"),
            e => panic!("unexpected {e}"),
        }
        assert!(parse_config("sweep_values = [1]", &[]).is_err());
    }

    #[test]
    fn bare_word_override_is_a_string() {
        let c = parse_config("", &["cluster_order=per-ue".into(), "rate_unit=nats".into()]).unwrap();
        assert_eq!(c.params.cluster_order, ClusterOrder::PerUe);
        assert_eq!(c.params.rate_unit, RateUnit::Nats);
    }

    #[test]
    fn round_trip_is_identity() {
        let c = parse_config(
            "snr = 1e9\nschemes = [\"gzf\", \"mrc-egc\"]\ncsi_modes = [\"sp\"]\nsweep_axis = \"angular_spread\"\nsweep_values = [0.1, 0.2]\nseed = 77",
            &[],
        )
        .unwrap();
        let again = parse_config(&c.to_toml(), &[]).unwrap();
        assert_eq!(c, again);
        let d = RunConfig::default();
        assert_eq!(parse_config(&d.to_toml(), &[]).unwrap(), d);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trip_random(
                l in 1usize..60, k in 1usize..200, m in 1usize..128, t in 1usize..200,
                q in 1usize..40, spread in 0.01f64..6.0, eta in 0.0f64..10.0, seed in 0..=i64::MAX as u64,
                snr in proptest::option::of(1.0f64..1e12),
            ) {
                let mut c = RunConfig::default();
                c.params.num_rrh = l;
                c.params.num_ue = k;
                c.params.antennas_per_rrh = m;
                c.params.pilot_dim = t;
                c.params.max_cluster_size = q;
                c.params.angular_spread = spread;
                c.params.qos_threshold = eta;
                c.params.master_seed = seed;
                c.params.snr = snr;
                prop_assert_eq!(parse_config(&c.to_toml(), &[]).unwrap(), c);
            }
        }
    }
}
