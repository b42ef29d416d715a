//! Run configuration: one JSON document, every block optional.
//!
//! | key | default |
//! |-----|---------|
//! | `model` | `omega_l = 20`, `omega0 = 1`, `kappa = 12.5`, `lambda = delta = phi = gamma_down = 0` |
//! | `variant` | `FULL` |
//! | `integrator` | `rk45`, `dt = 0.01`, tolerances `1e-10`, window `1000..2000`, `sample_dt = 0.01` |
//! | `seed` | `0` |
//! | `output` | `dir = "nrdicke-out"`, `format = "csv"` |
//! | `simulate` | `initial = "perturbed-np"`, no explicit `state` |
//! | `fixed_points` | `n_random = 32` |
//! | `np_spectrum.sweep` | `phi` over `0..π/2`, 512 points |
//! | `ep_scan` | `phi_min = 0`, `phi_max = π/2`, `count = 512` |
//! | `phase_diagram` | axes `lambda 0..6 × phi 0..π/2`, 64 × 64; sweep window `2000..3000` at `sample_dt = 0.05`, 16 random fixed-point seeds, 1 random IC |
//! | `spectrum` | observables `beta, sx_p, sz_p`, `initial = "perturbed-np"`, no `scan`, `scan_band = 5` |
//! | `quench` | relax window `4800..5000`, post window `9800..10000`, `sample_dt = 0.05` |
//! | `census` | `n_ic = 64`, `eps_cluster = 0.01`, window `19000..20000` at `sample_dt = 0.05` |
//! | `consistency` | `n_samples = 256` |

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use nrdicke::dynamics::{InitialCondition, IntegratorConfig};
use nrdicke::experiments::{AxisSpec, CensusConfig, SweepConfig, SweepParameter};
use nrdicke::fixed_points::SeedStrategy;
use nrdicke::spectral::Observable;
use nrdicke::model::{Axis, Species};
use nrdicke::{Error as CoreError, ModelParams, ModelVariant};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("nrdicke-out"), format: Format::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub initial: InitialCondition,
    /// Explicit initial state; overrides `initial` when present.
    pub state: Option<[f64; 8]>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { initial: InitialCondition::PerturbedNp, state: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NpSpectrumConfig {
    pub sweep: AxisSpec,
}

impl Default for NpSpectrumConfig {
    fn default() -> Self {
        Self { sweep: AxisSpec::new(SweepParameter::Phi, 0.0, FRAC_PI_2, 512) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpScanConfig {
    pub phi_min: f64,
    pub phi_max: f64,
    /// Points of the coalescence scan.
    pub count: usize,
}

impl Default for EpScanConfig {
    fn default() -> Self {
        Self { phi_min: 0.0, phi_max: FRAC_PI_2, count: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseDiagramConfig {
    pub axes: [AxisSpec; 2],
    pub sweep: SweepConfig,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        Self {
            axes: [
                AxisSpec::new(SweepParameter::Lambda, 0.0, 6.0, 64),
                AxisSpec::new(SweepParameter::Phi, 0.0, FRAC_PI_2, 64),
            ],
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub observables: Vec<Observable>,
    pub initial: InitialCondition,
    /// Optional parameter scan producing a spectrogram of `β`.
    pub scan: Option<AxisSpec>,
    /// Largest `|frequency|` written to the spectrogram.
    pub scan_band: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            observables: vec![Observable::Beta, Observable::Spin(Species::Plus, Axis::X), Observable::Spin(Species::Plus, Axis::Z)],
            initial: InitialCondition::PerturbedNp,
            scan: None,
            scan_band: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuenchConfig {
    pub relax: IntegratorConfig,
    pub post: IntegratorConfig,
}

impl Default for QuenchConfig {
    fn default() -> Self {
        let window = |t_transient, t_final| {
            IntegratorConfig { sample_dt: 0.05, ..IntegratorConfig::default() }.with_window(t_transient, t_final)
        };
        Self { relax: window(4800.0, 5000.0), post: window(9800.0, 10000.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CensusBlock {
    pub n_ic: usize,
    pub eps_cluster: f64,
    pub integrator: IntegratorConfig,
}

impl Default for CensusBlock {
    fn default() -> Self {
        let c = CensusConfig::default();
        Self { n_ic: 64, eps_cluster: c.eps_cluster, integrator: c.integrator }
    }
}

impl CensusBlock {
    pub fn census_config(&self) -> CensusConfig {
        CensusConfig { integrator: self.integrator, eps_cluster: self.eps_cluster }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConsistencyConfig {
    pub n_samples: usize,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        Self { n_samples: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    pub variant: ModelVariant,
    pub integrator: IntegratorConfig,
    pub seed: u64,
    pub output: OutputConfig,
    pub simulate: SimulateConfig,
    pub fixed_points: SeedStrategy,
    pub np_spectrum: NpSpectrumConfig,
    pub ep_scan: EpScanConfig,
    pub phase_diagram: PhaseDiagramConfig,
    pub spectrum: SpectrumConfig,
    pub quench: QuenchConfig,
    pub census: CensusBlock,
    pub consistency: ConsistencyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            variant: ModelVariant::Full,
            integrator: IntegratorConfig::default(),
            seed: 0,
            output: OutputConfig::default(),
            simulate: SimulateConfig::default(),
            fixed_points: SeedStrategy::default(),
            np_spectrum: NpSpectrumConfig::default(),
            ep_scan: EpScanConfig::default(),
            phase_diagram: PhaseDiagramConfig::default(),
            spectrum: SpectrumConfig::default(),
            quench: QuenchConfig::default(),
            census: CensusBlock::default(),
            consistency: ConsistencyConfig::default(),
        }
    }
}

fn scoped(block: &str) -> impl Fn(CoreError) -> CliError + '_ {
    move |e| match e {
        CoreError::InvalidField { field, reason } => CliError::Config(format!("invalid value for `{block}.{field}`: {reason}")),
        other => CliError::Config(format!("{block}: {other}")),
    }
}

fn field_error(field: &str, reason: &str) -> CliError {
    CliError::Config(format!("invalid value for `{field}`: {reason}"))
}

impl RunConfig {
    /// Parses a JSON document, applies `block.key=value` overrides and validates.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.with_overrides(overrides)?.validated()
    }

    /// Overrides are applied to the serialized document and re-parsed, so
    /// misspelled keys are rejected exactly as in the file itself.
    pub fn with_overrides(self, overrides: &[String]) -> Result<Self, CliError> {
        if overrides.is_empty() {
            return Ok(self);
        }
        let mut doc = serde_json::to_value(&self).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        serde_json::from_value(doc).map_err(|e| CliError::Config(format!("--set: {e}")))
    }

    pub fn validated(mut self) -> Result<Self, CliError> {
        self.model = self.model.validated().map_err(scoped("model"))?;
        self.integrator = self.integrator.validated().map_err(scoped("integrator"))?;
        if let Some(state) = self.simulate.state {
            if state.iter().any(|x| !x.is_finite()) {
                return Err(field_error("simulate.state", "must contain 8 finite numbers"));
            }
        }
        self.np_spectrum.sweep = self.np_spectrum.sweep.validated().map_err(scoped("np_spectrum.sweep"))?;
        let ep = &self.ep_scan;
        if !(ep.phi_min.is_finite() && ep.phi_max.is_finite() && ep.phi_min < ep.phi_max) {
            return Err(field_error("ep_scan.phi_min", "must be finite and below ep_scan.phi_max"));
        }
        if ep.count < 2 {
            return Err(field_error("ep_scan.count", "must be >= 2"));
        }
        for (k, axis) in self.phase_diagram.axes.iter_mut().enumerate() {
            *axis = axis.validated().map_err(scoped(["phase_diagram.axes[0]", "phase_diagram.axes[1]"][k]))?;
        }
        self.phase_diagram.sweep.integrator =
            self.phase_diagram.sweep.integrator.validated().map_err(scoped("phase_diagram.sweep.integrator"))?;
        if self.spectrum.observables.is_empty() {
            return Err(field_error("spectrum.observables", "must list at least one observable"));
        }
        if let Some(scan) = self.spectrum.scan {
            self.spectrum.scan = Some(scan.validated().map_err(scoped("spectrum.scan"))?);
        }
        if self.spectrum.scan_band.is_nan() || self.spectrum.scan_band <= 0.0 {
            return Err(field_error("spectrum.scan_band", "must be > 0"));
        }
        self.quench.relax = self.quench.relax.validated().map_err(scoped("quench.relax"))?;
        self.quench.post = self.quench.post.validated().map_err(scoped("quench.post"))?;
        if self.census.n_ic == 0 {
            return Err(field_error("census.n_ic", "must be >= 1"));
        }
        if !(self.census.eps_cluster > 0.0 && self.census.eps_cluster.is_finite()) {
            return Err(field_error("census.eps_cluster", "must be finite and > 0"));
        }
        self.census.integrator = self.census.integrator.validated().map_err(scoped("census.integrator"))?;
        if self.consistency.n_samples == 0 {
            return Err(field_error("consistency.n_samples", "must be >= 1"));
        }
        Ok(self)
    }
}

/// `a.b.c=value`; the value is read as JSON when it parses, otherwise as a string.
fn apply_override(doc: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects block.key=value, got `{spec}`")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Usage(format!("--set: malformed key path `{path}`")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    for (depth, key) in keys.iter().enumerate() {
        let here = keys[..depth].join(".");
        let map = match node {
            Value::Object(map) => map,
            _ => return Err(CliError::Config(format!("--set: `{here}` is not a block"))),
        };
        if depth + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
    }
    Ok(())
}
