//! Experiment configuration files.
//!
//! A config is a flat TOML table:
//!
//! ```toml
//! workload = "float64-walk"   # or: trace = "writes.jsonl"
//! records = 10000
//! workload_seed = 1
//! schemes = ["per-word", "interleaved", "robin"]
//! pw = 0.999                 # or bit_failure = 1e-3, or device_* keys
//! include_ecc = true
//! mc_enabled = true
//! mc_trials = 1000
//! seed = 42
//! warmup = 256
//! out = "report"
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mapping::SchemeKind;
use crate::reliability::{self, DeviceParams, Grouping, SuccessProbability};
use crate::trace::TraceFormat;
use crate::workload::{WorkloadKind, WorkloadSpec};

#[derive(Clone, Debug, PartialEq)]
pub enum InputSource {
    Trace { path: PathBuf, format: TraceFormat },
    Workload { spec: WorkloadSpec, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PwSource {
    Direct(SuccessProbability),
    Device(DeviceParams),
}

impl PwSource {
    pub fn resolve(&self) -> Result<SuccessProbability> {
        match self {
            PwSource::Direct(p) => Ok(*p),
            PwSource::Device(d) => reliability::p_write_from_device(d),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McSettings {
    pub enabled: bool,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub input: InputSource,
    pub schemes: Vec<SchemeKind>,
    pub pw: PwSource,
    pub include_ecc: bool,
    pub monte_carlo: McSettings,
    pub warmup: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    trace: Option<PathBuf>,
    trace_format: Option<String>,

    workload: Option<String>,
    records: Option<u64>,
    workload_seed: Option<u64>,
    blocks: Option<u64>,
    base_addr: Option<u64>,
    update_prob: Option<f64>,
    step_scale: Option<f64>,
    mantissa_bits: Option<u32>,
    narrow_width: Option<u32>,
    valid_words_min: Option<u32>,
    valid_words_max: Option<u32>,

    schemes: Option<Vec<String>>,

    pw: Option<f64>,
    bit_failure: Option<f64>,
    device_t_write: Option<f64>,
    device_i_write: Option<f64>,
    device_i_c0: Option<f64>,
    device_polarization: Option<f64>,
    device_moment: Option<f64>,
    device_delta: Option<f64>,
    device_bohr_magneton: Option<f64>,
    device_euler_gamma: Option<f64>,
    device_electron_charge: Option<f64>,
    device_grouping: Option<Grouping>,

    include_ecc: Option<bool>,
    mc_enabled: Option<bool>,
    mc_trials: Option<u64>,
    seed: Option<u64>,
    warmup: Option<u64>,
    out: Option<PathBuf>,
}

impl RawConfig {
    fn has_device_keys(&self) -> bool {
        self.device_t_write.is_some()
            || self.device_i_write.is_some()
            || self.device_i_c0.is_some()
            || self.device_polarization.is_some()
            || self.device_moment.is_some()
            || self.device_delta.is_some()
            || self.device_bohr_magneton.is_some()
            || self.device_euler_gamma.is_some()
            || self.device_electron_charge.is_some()
            || self.device_grouping.is_some()
    }

    fn has_workload_keys(&self) -> bool {
        self.records.is_some()
            || self.workload_seed.is_some()
            || self.blocks.is_some()
            || self.base_addr.is_some()
            || self.update_prob.is_some()
            || self.step_scale.is_some()
            || self.mantissa_bits.is_some()
            || self.narrow_width.is_some()
            || self.valid_words_min.is_some()
            || self.valid_words_max.is_some()
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are joined onto `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let resolve = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };

        let input = match (&raw.trace, &raw.workload) {
            (Some(_), Some(_)) => return Err(Error::Config("give either `trace` or `workload`, not both".into())),
            (None, None) => return Err(Error::Config("missing input: set `trace` or `workload`".into())),
            (Some(path), None) => {
                if raw.has_workload_keys() {
                    return Err(Error::Config("workload keys given together with `trace`".into()));
                }
                let path = resolve(path);
                let format = match &raw.trace_format {
                    Some(f) => f.parse()?,
                    None => TraceFormat::from_path(&path),
                };
                InputSource::Trace { path, format }
            }
            (None, Some(kind)) => {
                if raw.trace_format.is_some() {
                    return Err(Error::Config("`trace_format` given without `trace`".into()));
                }
                let d = WorkloadSpec::default();
                let spec = WorkloadSpec {
                    kind: kind.parse::<WorkloadKind>()?,
                    records: raw.records.unwrap_or(d.records),
                    blocks: raw.blocks.unwrap_or(d.blocks),
                    base_addr: raw.base_addr.unwrap_or(d.base_addr),
                    update_prob: raw.update_prob.unwrap_or(d.update_prob),
                    step_scale: raw.step_scale.unwrap_or(d.step_scale),
                    mantissa_bits: raw.mantissa_bits.unwrap_or(d.mantissa_bits),
                    narrow_width: raw.narrow_width.unwrap_or(d.narrow_width),
                    valid_words_min: raw.valid_words_min.unwrap_or(d.valid_words_min),
                    valid_words_max: raw.valid_words_max.unwrap_or(d.valid_words_max),
                };
                spec.validate()?;
                InputSource::Workload {
                    spec,
                    seed: raw.workload_seed.unwrap_or(0),
                }
            }
        };

        let schemes = match &raw.schemes {
            None => SchemeKind::ALL.to_vec(),
            Some(list) => {
                let mut out: Vec<SchemeKind> = Vec::new();
                for s in list {
                    let k: SchemeKind = s.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
                    if out.contains(&k) {
                        return Err(Error::Config(format!("scheme `{k}` listed twice")));
                    }
                    out.push(k);
                }
                if out.is_empty() {
                    return Err(Error::Config("at least one scheme is required".into()));
                }
                out
            }
        };

        let sources = raw.pw.is_some() as u8 + raw.bit_failure.is_some() as u8 + raw.has_device_keys() as u8;
        if sources > 1 {
            return Err(Error::Config(
                "give exactly one of `pw`, `bit_failure` or `device_*` keys".into(),
            ));
        }
        let domain = |e: Error| Error::Config(e.to_string());
        let pw = if let Some(p) = raw.pw {
            PwSource::Direct(SuccessProbability::new(p).map_err(domain)?)
        } else if let Some(q) = raw.bit_failure {
            PwSource::Direct(SuccessProbability::from_failure(q).map_err(domain)?)
        } else if raw.has_device_keys() {
            let d = DeviceParams::default();
            let device = DeviceParams {
                t_write: raw.device_t_write.unwrap_or(d.t_write),
                i_write: raw.device_i_write.unwrap_or(d.i_write),
                i_c0: raw.device_i_c0.unwrap_or(d.i_c0),
                polarization: raw.device_polarization.unwrap_or(d.polarization),
                moment: raw.device_moment.unwrap_or(d.moment),
                bohr_magneton: raw.device_bohr_magneton.unwrap_or(d.bohr_magneton),
                delta: raw.device_delta.unwrap_or(d.delta),
                euler_gamma: raw.device_euler_gamma.unwrap_or(d.euler_gamma),
                electron_charge: raw.device_electron_charge.unwrap_or(d.electron_charge),
                grouping: raw.device_grouping.unwrap_or(d.grouping),
            };
            reliability::p_write_from_device(&device).map_err(domain)?;
            PwSource::Device(device)
        } else {
            PwSource::Direct(SuccessProbability::default())
        };

        let monte_carlo = McSettings {
            enabled: raw.mc_enabled.unwrap_or(false),
            trials: raw.mc_trials.unwrap_or(1000),
            seed: raw.seed.unwrap_or(0),
        };
        if monte_carlo.enabled && monte_carlo.trials == 0 {
            return Err(Error::Config("`mc_trials` must be at least 1".into()));
        }

        Ok(ExperimentConfig {
            input,
            schemes,
            pw,
            include_ecc: raw.include_ecc.unwrap_or(true),
            monte_carlo,
            warmup: raw.warmup.unwrap_or(0),
            out_dir: resolve(raw.out.as_deref().unwrap_or(Path::new("report"))),
        })
    }
}
