//! Run configuration: one TOML file whose sections mirror the pipeline stages.

use std::path::{Path, PathBuf};

use dqw_core::dark_resonance::{DetuningGrid, FourLevelParams};
use dqw_core::detector::ProbeReadout;
use dqw_core::heterostructure::StructureFile;
use dqw_core::liouville::DecayTarget;
use dqw_core::pipeline::{DephasingConfig, FieldConfig, PipelineConfig, RoleConfig, SolverConfig};
use dqw_core::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Structure file, relative to the run config.
    #[serde(default)]
    pub structure: Option<PathBuf>,
    /// Output directory, relative to the run config; `--out` overrides it.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub roles: RoleConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub fields: FieldConfig,
    #[serde(default)]
    pub dephasing: DephasingConfig,
    #[serde(default)]
    pub windows: WindowConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    /// Explicit four-level parameters; replaces the structure pipeline.
    #[serde(default)]
    pub params: Option<FourLevelParams>,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Energy windows for `solve`, meV. Missing windows span the whole
/// bound or resonance range of the structure.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub bound: Option<[f64; 2]>,
    pub resonance: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// Also write envelopes.csv.
    pub envelopes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Probe detuning grid, meV.
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Optical density of the transmission curves.
    pub od: f64,
    /// Δ_IR of the detuned case, meV; a quarter of Ω when absent.
    pub detuned_ir: Option<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            start: -80.0,
            stop: 80.0,
            points: 4001,
            od: 1.0,
            detuned_ir: None,
        }
    }
}

impl SpectrumConfig {
    pub fn grid(&self) -> DetuningGrid {
        DetuningGrid {
            start: self.start,
            stop: self.stop,
            points: self.points,
        }
    }
}

/// Inputs of the efficiency, sensitivity and QWIP comparison. Unset rates
/// fall back to the resolved model: Γ = γ_ab, γ_decoh = γ_cb,
/// γ_probe_rad = γ_{a→b}, γ_IR_rad from the structure, α from the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    pub measurement_time_s: f64,
    /// Detector area, µm²; P_min is also reported per this area.
    pub area_um2: f64,
    /// Power of λ_IR/λ_probe in the efficiency.
    pub wavelength_exponent: f64,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_decoh: Option<f64>,
    pub gamma_probe_rad: Option<f64>,
    pub gamma_ir_rad: Option<f64>,
    /// Γ_coh and Γ_QWIP of the QWIP comparison; both default to Γ.
    pub gamma_coh: Option<f64>,
    pub gamma_qwip: Option<f64>,
    pub gamma_decoh_qwip: f64,
    pub readout: ProbeReadout,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            measurement_time_s: 1.0,
            area_um2: 100.0,
            wavelength_exponent: 3.0,
            alpha: None,
            gamma: None,
            gamma_decoh: None,
            gamma_probe_rad: None,
            gamma_ir_rad: None,
            gamma_coh: None,
            gamma_qwip: None,
            gamma_decoh_qwip: 0.5,
            readout: ProbeReadout::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Detunings compared, spread over the spectrum range.
    pub points: usize,
    /// α/Ω of the weak-probe comparison.
    pub alpha_ratio: f64,
    /// Largest accepted relative error of Im χ.
    pub tolerance: f64,
    pub decay_target: DecayTarget,
    /// α/Ω of the informational strong-probe column; omitted when absent.
    pub saturation_alpha_ratio: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            points: 200,
            alpha_ratio: 1e-3,
            tolerance: 1e-3,
            decay_target: DecayTarget::B,
            saturation_alpha_ratio: Some(1.0),
        }
    }
}

/// Grid over one four-level parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Parameters a sweep may vary.
pub const SWEEPABLE: [&str; 11] = [
    "omega",
    "alpha",
    "omega_ir",
    "delta0",
    "delta_ir",
    "gamma_ab",
    "gamma_cb",
    "gamma_db",
    "eta",
    "gamma_a_to_b",
    "ir_linewidth",
];

pub fn set_parameter(params: &mut FourLevelParams, name: &str, value: f64) -> Result<()> {
    let slot = match name {
        "omega" => &mut params.omega,
        "alpha" => &mut params.alpha,
        "omega_ir" => &mut params.omega_ir,
        "delta0" => &mut params.delta0,
        "delta_ir" => &mut params.delta_ir,
        "gamma_ab" => &mut params.gamma_ab,
        "gamma_cb" => &mut params.gamma_cb,
        "gamma_db" => &mut params.gamma_db,
        "eta" => &mut params.eta,
        "gamma_a_to_b" => &mut params.gamma_a_to_b,
        "ir_linewidth" => &mut params.ir_linewidth,
        _ => {
            return Err(Error::Config(format!(
                "unknown sweep parameter {name:?}; expected one of {}",
                SWEEPABLE.join(", ")
            )))
        }
    };
    *slot = value;
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            roles: self.roles,
            solver: self.solver,
            fields: self.fields,
            dephasing: self.dephasing,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.structure.is_none() && self.params.is_none() {
            return Err(Error::Config("set either `structure` or a [params] block".into()));
        }
        if let Some(p) = &self.params {
            p.validate()?;
        }
        if !(self.solver.dz > 0.0) {
            return Err(Error::Config(format!("solver.dz must be positive, got {}", self.solver.dz)));
        }
        for (name, w) in [("bound", self.windows.bound), ("resonance", self.windows.resonance)] {
            if let Some([lo, hi]) = w {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::Config(format!("windows.{name} must satisfy lo <= hi, got [{lo}, {hi}]")));
                }
            }
        }
        self.spectrum.grid().values()?;
        if !(self.spectrum.od >= 0.0) {
            return Err(Error::Config("spectrum.od must be non-negative".into()));
        }
        let d = &self.detector;
        if !(d.measurement_time_s > 0.0 && d.area_um2 > 0.0) || !(d.gamma_decoh_qwip > 0.0) || !d.wavelength_exponent.is_finite() {
            return Err(Error::Config(format!("invalid [detector] block {d:?}")));
        }
        let o = &self.oracle;
        if o.points < 2 || !(o.alpha_ratio > 0.0) || !(o.tolerance > 0.0) {
            return Err(Error::Config(format!("invalid [oracle] block {o:?}")));
        }
        if let Some(s) = &self.sweep {
            set_parameter(&mut FourLevelParams::default(), &s.parameter, 0.0)?;
            if s.points < 2 || !(s.stop > s.start) {
                return Err(Error::Config(format!("sweep needs stop > start and at least 2 points, got {s:?}")));
            }
        }
        Ok(())
    }
}

/// A run config with its structure read and its provenance hash computed.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub structure: Option<StructureFile>,
    pub output_dir: PathBuf,
    /// SHA-256 over the config bytes followed by the structure bytes.
    pub hash: String,
}

impl Loaded {
    pub fn from_path(path: &Path, out: Option<&Path>) -> Result<Self> {
        let text = std::fs::read(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let config = RunConfig::parse(
            std::str::from_utf8(&text).map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))?,
        )?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut hasher = Sha256::new();
        hasher.update(&text);
        let structure = match &config.structure {
            Some(rel) => {
                let p = base.join(rel);
                let bytes = std::fs::read(&p)
                    .map_err(|e| Error::Config(format!("cannot read structure {}: {e}", p.display())))?;
                hasher.update(&bytes);
                let text = std::str::from_utf8(&bytes)
                    .map_err(|e| Error::Config(format!("structure is not UTF-8: {e}")))?;
                Some(StructureFile::parse(text)?)
            }
            None => None,
        };
        let output_dir = match out {
            Some(o) => o.to_path_buf(),
            None => base.join(&config.output_dir),
        };
        Ok(Self {
            config,
            structure,
            output_dir,
            hash: hex::encode(hasher.finalize()),
        })
    }
}
