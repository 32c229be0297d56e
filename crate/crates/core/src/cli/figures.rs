//! Figure presets: fixed sweeps plus a manifest of qualitative checks.
//!
//! | figure | sweep | variants |
//! |--------|-------|----------|
//! | fig2 | base point; Q in {2, 5, 10, 15, 20} | all 15; GZF, LMMSE+Opt, MRC+Opt with SP |
//! | fig3 | angular spread in {pi/16, pi/8, pi/4, pi/2} | 5 schemes x {ideal, sp} |
//! | fig4 | K in {25, 50, 100, 150} (desk) | 5 schemes x sp |
//! | fig5 | tau_p in {5, 10, 20, 30, 40} | 5 schemes x sp |
//!
//! Desk scale: L = 20, K = 60, M = 64, tau_p = 20, 10 layouts x 50 draws.
//! Full scale: L = 50, K = 100, M = 64, tau_p = 20, 48 layouts x 100 draws.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::cli::config::{parse_config, RunConfig};
use crate::cli::output::{emit_results, preflight, write_cdf_csv};
use crate::engine::{run_sweep, SweepAxis, SweepResult, Variant};
use crate::error::{Error, Result};
use crate::estimation::CsiMode;
use crate::geometry::SystemParams;
use crate::receivers::ReceiverScheme;

/// Default wall-clock budget for a preset, in seconds.
pub const DEFAULT_BUDGET_SECS: f64 = 1800.0;

/// Seconds per (fading draw x variant) per unit of `K * L * M`, measured on
/// one core.
const SECS_PER_DRAW_UNIT: f64 = 1.05e-7;

/// Headline scheme/CSI pairs that get their own CDF file in fig2.
const FIG2_CDF_PAIRS: [(ReceiverScheme, CsiMode); 6] = [
    (ReceiverScheme::GZF, CsiMode::Ideal),
    (ReceiverScheme::GZF, CsiMode::Sp),
    (ReceiverScheme::LMMSE_OPT, CsiMode::Ideal),
    (ReceiverScheme::LMMSE_OPT, CsiMode::Sp),
    (ReceiverScheme::MRC_OPT, CsiMode::Ideal),
    (ReceiverScheme::MRC_OPT, CsiMode::Sp),
];

const HEADLINE: [ReceiverScheme; 3] = [ReceiverScheme::GZF, ReceiverScheme::LMMSE_OPT, ReceiverScheme::MRC_OPT];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown figure `{s}` (expected fig2..fig5)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Full,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        }
    }

    /// Base parameters of this scale.
    pub fn params(self) -> SystemParams {
        let full = SystemParams::default();
        match self {
            Scale::Full => full,
            Scale::Desk => SystemParams {
                num_rrh: 20,
                num_ue: 60,
                antennas_per_rrh: 64,
                pilot_dim: 20,
                num_layouts: 10,
                num_fading_draws: 50,
                ..full
            },
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(Error::InvalidArgument(format!("unknown scale `{s}` (expected desk or full)"))),
        }
    }
}

/// One sweep of a preset, written to its own subdirectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetSweep {
    pub label: &'static str,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub variants: Vec<Variant>,
}

/// Fully specified figure run.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub figure: Figure,
    pub scale: Scale,
    pub base: SystemParams,
    pub sweeps: Vec<PresetSweep>,
}

fn grid(schemes: &[ReceiverScheme], csi: &[CsiMode]) -> Vec<Variant> {
    Variant::grid(schemes, csi)
}

impl Preset {
    pub fn new(figure: Figure, scale: Scale) -> Self {
        Preset::with_base(figure, scale, scale.params())
    }

    /// Preset with caller-supplied base parameters.
    pub fn with_base(figure: Figure, scale: Scale, base: SystemParams) -> Self {
        let sp = [CsiMode::Sp];
        let sweeps = match figure {
            Figure::Fig2 => vec![
                PresetSweep {
                    label: "base",
                    axis: SweepAxis::PilotDim,
                    values: vec![base.pilot_dim as f64],
                    variants: grid(&ReceiverScheme::ALL, &CsiMode::ALL),
                },
                PresetSweep {
                    label: "cluster_size",
                    axis: SweepAxis::MaxClusterSize,
                    values: vec![2.0, 5.0, 10.0, 15.0, 20.0],
                    variants: grid(&HEADLINE, &sp),
                },
            ],
            Figure::Fig3 => vec![PresetSweep {
                label: "angular_spread",
                axis: SweepAxis::AngularSpread,
                values: vec![PI / 16.0, PI / 8.0, PI / 4.0, PI / 2.0],
                variants: grid(&ReceiverScheme::ALL, &[CsiMode::Ideal, CsiMode::Sp]),
            }],
            Figure::Fig4 => vec![PresetSweep {
                label: "num_ue",
                axis: SweepAxis::NumUe,
                values: match scale {
                    Scale::Desk => vec![25.0, 50.0, 100.0, 150.0],
                    Scale::Full => vec![100.0, 200.0, 300.0, 400.0, 500.0],
                },
                variants: grid(&ReceiverScheme::ALL, &sp),
            }],
            Figure::Fig5 => vec![PresetSweep {
                label: "pilot_dim",
                axis: SweepAxis::PilotDim,
                values: vec![5.0, 10.0, 20.0, 30.0, 40.0],
                variants: grid(&ReceiverScheme::ALL, &sp),
            }],
        };
        Preset {
            figure,
            scale,
            base,
            sweeps,
        }
    }

    /// Rough single-core runtime in seconds, divided across the worker pool.
    pub fn estimated_runtime_secs(&self) -> f64 {
        let p = &self.base;
        let draws = (p.num_layouts * p.num_fading_draws) as f64;
        let total: f64 = self
            .sweeps
            .iter()
            .flat_map(|s| s.values.iter().map(move |&v| (s, v)))
            .map(|(s, v)| {
                let k = if s.axis == SweepAxis::NumUe { v } else { p.num_ue as f64 };
                let unit = k * p.num_rrh as f64 * p.antennas_per_rrh as f64;
                draws * s.variants.len() as f64 * unit * SECS_PER_DRAW_UNIT
            })
            .sum();
        total / rayon::current_num_threads() as f64
    }
}

/// Options of [`reproduce_figure`].
#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    /// Replaces the preset master seed.
    pub seed: Option<u64>,
    /// `key=value` overrides applied to the preset base parameters.
    pub overrides: Vec<String>,
    pub budget_secs: f64,
    /// Runs even when the estimate exceeds the budget.
    pub force: bool,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            seed: None,
            overrides: Vec::new(),
            budget_secs: DEFAULT_BUDGET_SECS,
            force: false,
        }
    }
}

/// One qualitative check recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureReport {
    pub preset: Preset,
    pub results: Vec<(&'static str, SweepResult)>,
    pub claims: Vec<Claim>,
    pub files: Vec<PathBuf>,
}

impl FigureReport {
    pub fn sweep(&self, label: &str) -> Option<&SweepResult> {
        self.results.iter().find(|(l, _)| *l == label).map(|(_, r)| r)
    }
}

fn mean(result: &SweepResult, point: usize, scheme: ReceiverScheme, csi: CsiMode) -> f64 {
    result.curve(Variant::new(scheme, csi))[point]
}

fn fmt_curve(values: &[f64], curve: &[f64]) -> String {
    values
        .iter()
        .zip(curve)
        .map(|(v, c)| format!("{v:.4}:{c:.3}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn claim(id: impl Into<String>, description: impl Into<String>, passed: bool, detail: String) -> Claim {
    Claim {
        id: id.into(),
        description: description.into(),
        passed,
        detail,
    }
}

fn fig2_claims(base: &SweepResult, q: &SweepResult) -> Vec<Claim> {
    let mut out = Vec::new();
    let ideal = |s| mean(base, 0, s, CsiMode::Ideal);
    let (g, l, m) = (ideal(ReceiverScheme::GZF), ideal(ReceiverScheme::LMMSE_OPT), ideal(ReceiverScheme::MRC_OPT));
    out.push(claim(
        "scheme-ordering",
        "ideal CSI: GZF >= LMMSE+Opt >= MRC+Opt and GZF >= 1.1 x MRC+Opt",
        g >= l && l >= m && g >= 1.1 * m,
        format!("gzf {g:.3}, lmmse-opt {l:.3}, mrc-opt {m:.3}, gzf/mrc-opt {:.4}", g / m),
    ));
    for (opt, egc) in [
        (ReceiverScheme::LMMSE_OPT, ReceiverScheme::LMMSE_EGC),
        (ReceiverScheme::MRC_OPT, ReceiverScheme::MRC_EGC),
    ] {
        for csi in CsiMode::ALL {
            let (a, b) = (mean(base, 0, opt, csi), mean(base, 0, egc, csi));
            out.push(claim(
                format!("optimal-beats-egc/{opt}/{csi}"),
                format!("{opt} >= {egc} with {csi} CSI"),
                a >= b,
                format!("{a:.3} vs {b:.3}"),
            ));
        }
    }
    for s in ReceiverScheme::ALL {
        let (sp, id) = (mean(base, 0, s, CsiMode::Sp), mean(base, 0, s, CsiMode::Ideal));
        let gap = (id - sp) / id;
        out.push(claim(
            format!("sp-near-ideal/{s}"),
            format!("{s}: SP within 5% of ideal CSI"),
            gap.abs() <= 0.05,
            format!("ideal {id:.3}, sp {sp:.3}, relative gap {gap:.4}"),
        ));
    }
    for s in [ReceiverScheme::GZF, ReceiverScheme::LMMSE_OPT] {
        let (pm, sp) = (mean(base, 0, s, CsiMode::Pm), mean(base, 0, s, CsiMode::Sp));
        out.push(claim(
            format!("pm-below-sp/{s}"),
            format!("{s}: PM at least 10% below SP"),
            pm <= 0.9 * sp,
            format!("pm {pm:.3}, sp {sp:.3}, ratio {:.4}", pm / sp),
        ));
    }
    let idx = |v: f64| q.values.iter().position(|&x| x == v);
    if let (Some(i5), Some(i15), Some(i20)) = (idx(5.0), idx(15.0), idx(20.0)) {
        for s in HEADLINE {
            let c = q.curve(Variant::new(s, CsiMode::Sp));
            let late = c[i20] / c[i15] - 1.0;
            let early = c[i15] / c[i5] - 1.0;
            out.push(claim(
                format!("q-saturation/{s}"),
                format!("{s}/sp: Q 15 -> 20 gains < 3% while Q 5 -> 15 gains > 10%"),
                late < 0.03 && early > 0.10,
                format!("Q 5->15 {:+.2}%, Q 15->20 {:+.2}%; curve {}", early * 100.0, late * 100.0, fmt_curve(&q.values, &c)),
            ));
        }
    }
    out
}

fn fig3_claims(r: &SweepResult) -> Vec<Claim> {
    let (Some(lo), Some(hi)) = (
        r.values.iter().position(|&v| v == PI / 16.0),
        r.values.iter().position(|&v| v == PI / 2.0),
    ) else {
        return Vec::new();
    };
    HEADLINE
        .iter()
        .map(|&s| {
            let gap = |i| {
                let id = mean(r, i, s, CsiMode::Ideal);
                (id - mean(r, i, s, CsiMode::Sp)) / id
            };
            let (g_lo, g_hi) = (gap(lo), gap(hi));
            claim(
                format!("sp-gap-grows-with-spread/{s}"),
                format!("{s}: SP-vs-ideal gap at pi/2 exceeds gap at pi/16"),
                g_hi > g_lo,
                format!("gap pi/16 {g_lo:.4}, pi/2 {g_hi:.4}"),
            )
        })
        .collect()
}

fn fig4_claims(r: &SweepResult) -> Vec<Claim> {
    HEADLINE
        .iter()
        .map(|&s| {
            let c = r.curve(Variant::new(s, CsiMode::Sp));
            claim(
                format!("sum-se-grows-with-k/{s}"),
                format!("{s}/sp: sum SE non-decreasing in K"),
                c.windows(2).all(|w| w[1] >= w[0]),
                fmt_curve(&r.values, &c),
            )
        })
        .collect()
}

/// Index of the maximum and whether the curve is non-increasing after it.
pub fn peak_shape(curve: &[f64]) -> (usize, bool) {
    let peak = curve
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > curve[best] { i } else { best });
    let decreasing = curve[peak..].windows(2).all(|w| w[1] <= w[0]);
    (peak, decreasing)
}

fn fig5_claims(r: &SweepResult) -> Vec<Claim> {
    let mut out = Vec::new();
    for s in ReceiverScheme::ALL {
        let c = r.curve(Variant::new(s, CsiMode::Sp));
        let (peak, decreasing) = peak_shape(&c);
        let last = c.len() - 1;
        let interior = c[1..last].iter().any(|&v| v > c[0] && v > c[last]);
        out.push(claim(
            format!("interior-maximum/{s}"),
            format!("{s}/sp: some interior tau_p beats both endpoints"),
            interior,
            format!("peak at tau_p = {}; {}", r.values[peak], fmt_curve(&r.values, &c)),
        ));
        out.push(claim(
            format!("decreasing-after-peak/{s}"),
            format!("{s}/sp: sum SE non-increasing after the peak"),
            decreasing,
            format!("peak at tau_p = {}", r.values[peak]),
        ));
    }
    out
}

#[derive(Serialize)]
struct ManifestSweep<'a> {
    label: &'a str,
    axis: &'a str,
    values: &'a [f64],
    variants: Vec<String>,
    directory: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    figure: Figure,
    scale: Scale,
    version: &'a str,
    seed: u64,
    scale_factors: Vec<(String, String)>,
    estimated_runtime_secs: f64,
    sweeps: Vec<ManifestSweep<'a>>,
    claims: &'a [Claim],
    all_passed: bool,
}

fn scale_factors(base: &SystemParams) -> Vec<(String, String)> {
    let full = Scale::Full.params();
    let pair = |name: &str, f: usize, d: usize| (name.to_string(), format!("{f} -> {d}"));
    vec![
        pair("num_rrh", full.num_rrh, base.num_rrh),
        pair("num_ue", full.num_ue, base.num_ue),
        pair("antennas_per_rrh", full.antennas_per_rrh, base.antennas_per_rrh),
        pair("pilot_dim", full.pilot_dim, base.pilot_dim),
        pair("num_layouts", full.num_layouts, base.num_layouts),
        pair("num_fading_draws", full.num_fading_draws, base.num_fading_draws),
    ]
}

/// Builds the base configuration of a preset run.
fn base_config(figure: Figure, scale: Scale, opts: &FigureOptions) -> Result<Preset> {
    let mut cfg = RunConfig {
        params: scale.params(),
        ..RunConfig::default()
    };
    if let Some(seed) = opts.seed {
        cfg.params.master_seed = seed;
    }
    let cfg = parse_config(&cfg.to_toml(), &opts.overrides)?;
    Ok(Preset::with_base(figure, scale, cfg.params))
}

/// Runs a figure preset, writes its data and manifest into `out_dir`.
///
/// Each sweep goes to `out_dir/<label>/` in the regular result format; fig2
/// additionally writes `cdf_<scheme>_<csi>.csv` for the six headline pairs.
pub fn reproduce_figure(figure: Figure, scale: Scale, out_dir: &Path, opts: &FigureOptions) -> Result<FigureReport> {
    let preset = base_config(figure, scale, opts)?;
    let estimate = preset.estimated_runtime_secs();
    if estimate > opts.budget_secs && !opts.force {
        return Err(Error::InvalidArgument(format!(
            "{figure} at {} scale needs about {estimate:.0} s, above the {:.0} s budget; pass force to run anyway",
            scale.name(),
            opts.budget_secs
        )));
    }
    for s in &preset.sweeps {
        for &v in &s.values {
            s.axis.apply(&preset.base, v)?;
        }
    }
    preflight(out_dir)?;

    let mut results = Vec::new();
    let mut files = Vec::new();
    for s in &preset.sweeps {
        let result = run_sweep(&preset.base, s.axis, &s.values, &s.variants)?;
        let cfg = RunConfig {
            params: preset.base.clone(),
            schemes: dedup(s.variants.iter().map(|v| v.scheme)),
            csi_modes: dedup(s.variants.iter().map(|v| v.csi)),
            sweep: Some((s.axis, s.values.clone())),
            output_dir: PathBuf::from(s.label),
            ..RunConfig::default()
        };
        files.extend(emit_results(&result, &cfg, &out_dir.join(s.label))?);
        results.push((s.label, result));
    }

    let claims = match figure {
        Figure::Fig2 => {
            let base = &results[0].1;
            for (scheme, csi) in FIG2_CDF_PAIRS {
                let stats = base.points[0]
                    .stats(Variant::new(scheme, csi))
                    .expect("fig2 base point runs every variant");
                let path = out_dir.join(format!("cdf_{scheme}_{csi}.csv"));
                files.push(write_cdf_csv(&path, base.axis.name(), base.values[0], &[stats])?);
            }
            fig2_claims(base, &results[1].1)
        }
        Figure::Fig3 => fig3_claims(&results[0].1),
        Figure::Fig4 => fig4_claims(&results[0].1),
        Figure::Fig5 => fig5_claims(&results[0].1),
    };

    let manifest = Manifest {
        figure,
        scale,
        version: env!("CARGO_PKG_VERSION"),
        seed: preset.base.master_seed,
        scale_factors: scale_factors(&preset.base),
        estimated_runtime_secs: (estimate * 10.0).round() / 10.0,
        sweeps: preset
            .sweeps
            .iter()
            .map(|s| ManifestSweep {
                label: s.label,
                axis: s.axis.name(),
                values: &s.values,
                variants: s.variants.iter().map(|v| v.to_string()).collect(),
                directory: s.label.to_string(),
            })
            .collect(),
        claims: &claims,
        all_passed: claims.iter().all(|c| c.passed),
    };
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Internal(e.to_string()))?;
    json.push('\n');
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    files.push(path);

    Ok(FigureReport {
        preset,
        results,
        claims,
        files,
    })
}

fn dedup<T: PartialEq>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}
