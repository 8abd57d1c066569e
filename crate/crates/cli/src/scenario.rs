//! Scenario files: a name, one tagged `kind` with its `parameters`, and an
//! output location. Parameter blocks reject unknown fields so that typos fail
//! at load time instead of silently falling back to defaults.

use std::path::Path;

use actionlab_core::classical::MechSystem;
use actionlab_core::fock::OracleConfig;
use actionlab_core::keldysh::InitialState;
use actionlab_core::signal::{ComplexSignal, Quadrature, TimeGrid};
use actionlab_core::source::bound::KineticScheme;
use actionlab_core::source::scattering::{Incidence, PotentialSpec};
use actionlab_core::source::SpaceGrid;
use actionlab_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Scenario {
    pub name: String,
    #[serde(flatten)]
    pub kind: ScenarioKind,
    pub output: OutputSpec,
}

/// Top-level layout of a scenario file before the parameters are typed.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    kind: String,
    #[serde(default)]
    parameters: Option<serde_json::Value>,
    output: OutputSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// File stem relative to the output directory.
    pub path: String,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "kebab-case")]
pub enum ScenarioKind {
    Oscillator(OscillatorParams),
    Keldysh(KeldyshParams),
    OracleCompare(CompareParams),
    PathIntegral(PathIntegralParams),
    Scatter(ScatterParams),
    BoundStates(BoundParams),
    Algebra(AlgebraParams),
    Classical(ClassicalParams),
}

impl ScenarioKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Oscillator(_) => "oscillator",
            Self::Keldysh(_) => "keldysh",
            Self::OracleCompare(_) => "oracle-compare",
            Self::PathIntegral(_) => "path-integral",
            Self::Scatter(_) => "scatter",
            Self::BoundStates(_) => "bound-states",
            Self::Algebra(_) => "algebra",
            Self::Classical(_) => "classical",
        }
    }
}

/// Uniform time grid given by its end points.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub intervals: usize,
}

impl GridSpec {
    pub fn build(&self, refine: usize) -> actionlab_core::Result<TimeGrid> {
        TimeGrid::spanning(self.t_start, self.t_end, self.intervals * refine.max(1))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    Square {
        amplitude: Complex64,
        t_on: f64,
        t_off: f64,
        grid: GridSpec,
    },
    Gaussian {
        amplitude: Complex64,
        center: f64,
        width: f64,
        #[serde(default)]
        carrier: f64,
        grid: GridSpec,
    },
}

impl SignalSpec {
    pub fn grid(&self) -> &GridSpec {
        match self {
            Self::Square { grid, .. } | Self::Gaussian { grid, .. } => grid,
        }
    }

    /// The signal sampled on the grid refined `refine` times.
    pub fn build(&self, refine: usize) -> actionlab_core::Result<ComplexSignal> {
        let g = self.grid().build(refine)?;
        match *self {
            Self::Square {
                amplitude, t_on, t_off, ..
            } => ComplexSignal::square(g, amplitude, t_on, t_off),
            Self::Gaussian {
                amplitude,
                center,
                width,
                carrier,
                ..
            } => ComplexSignal::gaussian(g, amplitude, center, width, carrier),
        }
    }
}

fn default_rule() -> Quadrature {
    Quadrature::Simpson
}

fn default_n_max() -> usize {
    10
}

fn default_oracle_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorParams {
    pub omega: f64,
    pub signal: SignalSpec,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_rule")]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub expected_persistence: Option<Complex64>,
    #[serde(default)]
    pub tolerances: OscillatorTolerances,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorTolerances {
    pub closed_form: f64,
    pub oracle: f64,
    pub normalisation: f64,
}

impl Default for OscillatorTolerances {
    fn default() -> Self {
        Self {
            closed_form: 1e-10,
            oracle: 1e-6,
            normalisation: 1e-8,
        }
    }
}

/// Fourier inversion of the displaced generator over `m` shifts.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionSpec {
    pub m: usize,
    pub n_max: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeldyshParams {
    pub omega: f64,
    pub signal: SignalSpec,
    pub initial: InitialState,
    #[serde(default = "default_rule")]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Displacements of the forward source, in grid steps.
    #[serde(default)]
    pub shifts: Vec<usize>,
    #[serde(default)]
    pub inversion: Option<InversionSpec>,
    #[serde(default)]
    pub expected_mean: Option<f64>,
    #[serde(default)]
    pub expected_variance: Option<f64>,
    #[serde(default)]
    pub tolerances: KeldyshTolerances,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeldyshTolerances {
    pub moments: f64,
    pub generator: f64,
    pub inversion: f64,
}

impl Default for KeldyshTolerances {
    fn default() -> Self {
        Self {
            moments: 1e-5,
            generator: 1e-6,
            inversion: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    pub half_width: f64,
    pub n_nu: usize,
    pub epsilon: f64,
}

/// Bounds the `compare` table must respect.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareExpectations {
    pub max_oracle_error: f64,
    pub max_lattice_error: f64,
    #[serde(default)]
    pub max_spectral_error: Option<f64>,
    #[serde(default)]
    pub lattice_order: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareParams {
    pub omega: f64,
    pub signal: SignalSpec,
    #[serde(default = "default_rule")]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Grid refinement factors for the lattice path integral.
    pub refinements: Vec<usize>,
    #[serde(default)]
    pub spectral: Option<SpectralSpec>,
    pub expected: CompareExpectations,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathIntegralParams {
    pub omega: f64,
    /// Square pulse of this height on `[0, duration]`.
    pub amplitude: Complex64,
    pub duration: f64,
    /// Lattice sizes, coarse to fine.
    pub intervals: Vec<usize>,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub spectral: Option<SpectralSpec>,
    /// Number of `τ` samples for the pointwise kernel identity.
    #[serde(default)]
    pub identity_samples: usize,
    pub expected: CompareExpectations,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub intervals: usize,
}

impl SpaceSpec {
    pub fn build(&self) -> actionlab_core::Result<SpaceGrid> {
        SpaceGrid::spanning(self.x_min, self.x_max, self.intervals)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl EnergyRange {
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + i as f64 * step).collect()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedTransmission {
    pub energy: f64,
    pub probability: f64,
}

/// A Gaussian emitter whose field persistence and stimulated factors are reported.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSpec {
    pub space: SpaceSpec,
    pub time: GridSpec,
    pub amplitude: Complex64,
    pub x: [f64; 2],
    pub t: [f64; 2],
    pub p0: f64,
    pub momenta: [f64; 2],
    pub n_momenta: usize,
    #[serde(default)]
    pub occupations: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterParams {
    pub potential: PotentialSpec,
    pub mass: f64,
    pub grid: SpaceSpec,
    pub energies: EnergyRange,
    #[serde(default)]
    pub incidence: Option<Incidence>,
    /// Romberg levels used for the transfer-matrix comparison.
    #[serde(default)]
    pub romberg_levels: Option<usize>,
    #[serde(default)]
    pub expected_transmission: Option<ExpectedTransmission>,
    #[serde(default)]
    pub emitter: Option<EmitterSpec>,
    #[serde(default)]
    pub tolerances: ScatterTolerances,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterTolerances {
    pub unitarity: f64,
    pub transfer: f64,
    pub expected: f64,
    pub persistence: f64,
}

impl Default for ScatterTolerances {
    fn default() -> Self {
        Self {
            unitarity: 1e-8,
            transfer: 1e-6,
            expected: 1e-4,
            persistence: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    pub potential: PotentialSpec,
    pub mass: f64,
    pub grid: SpaceSpec,
    #[serde(default)]
    pub scheme: KineticScheme,
    #[serde(default)]
    pub n_states: Option<usize>,
    #[serde(default)]
    pub expected: Vec<f64>,
    #[serde(default = "default_oracle_tol")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraParams {
    /// Restrict the report to these identities; empty means all.
    #[serde(default)]
    pub only: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSpec {
    Kepler { eccentricity: f64 },
    Explicit(MechSystem),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalParams {
    pub system: SystemSpec,
    pub dt: f64,
    pub steps: usize,
    /// Window for the reported averages.
    #[serde(default)]
    pub average_window: Option<f64>,
    /// Windows for the residual-against-window slope.
    #[serde(default)]
    pub slope_windows: Vec<f64>,
    #[serde(default = "default_stride")]
    pub csv_stride: usize,
    #[serde(default)]
    pub tolerances: ClassicalTolerances,
}

fn default_stride() -> usize {
    100
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalTolerances {
    pub virial: f64,
    pub fine_structure: f64,
    pub step_drift: f64,
    pub slope: [f64; 2],
}

impl Default for ClassicalTolerances {
    fn default() -> Self {
        Self {
            virial: 1e-3,
            fine_structure: 1e-3,
            step_drift: 1e-12,
            slope: [-1.1, -0.9],
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
        let params = raw.parameters.unwrap_or_else(|| serde_json::json!({}));
        let kind: ScenarioKind = serde_json::from_value(serde_json::json!({ "kind": raw.kind, "parameters": params }))
            .map_err(|e| CliError::Usage(format!("kind '{}': {e}", raw.kind)))?;
        let s = Scenario {
            name: raw.name,
            kind,
            output: raw.output,
        };
        s.validate()?;
        Ok(s)
    }

    /// Parameter checks that the schema alone cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.output.path.is_empty() || Path::new(&self.output.path).is_absolute() || self.output.path.contains("..")
        {
            return Err(CliError::Usage(format!(
                "output path '{}' must be a relative file stem",
                self.output.path
            )));
        }
        match &self.kind {
            ScenarioKind::Oscillator(p) => positive("omega", p.omega),
            ScenarioKind::Keldysh(p) => positive("omega", p.omega),
            ScenarioKind::OracleCompare(p) => {
                positive("omega", p.omega)?;
                if p.refinements.is_empty() || p.refinements.contains(&0) {
                    return Err(CliError::Usage(
                        "refinements must be a nonempty list of positive factors".into(),
                    ));
                }
                Ok(())
            }
            ScenarioKind::PathIntegral(p) => {
                positive("omega", p.omega)?;
                positive("duration", p.duration)?;
                if p.intervals.len() < 2 || p.intervals.contains(&0) {
                    return Err(CliError::Usage(
                        "path-integral needs at least two positive lattice sizes".into(),
                    ));
                }
                Ok(())
            }
            ScenarioKind::Scatter(p) => {
                positive("mass", p.mass)?;
                positive("energies.min", p.energies.min)?;
                if p.energies.count == 0 || p.energies.max < p.energies.min {
                    return Err(CliError::Usage("energy range must be nonempty and ascending".into()));
                }
                Ok(())
            }
            ScenarioKind::BoundStates(p) => positive("mass", p.mass),
            ScenarioKind::Algebra(_) => Ok(()),
            ScenarioKind::Classical(p) => {
                positive("dt", p.dt)?;
                if p.steps == 0 {
                    return Err(CliError::Usage("steps must be positive".into()));
                }
                Ok(())
            }
        }
    }
}
