//! The run configuration: one TOML file per run, unknown keys rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{TraceOptions, DEFAULT_CLOSURE_THRESHOLD, DEFAULT_MIN_RETURNS, DEFAULT_NORM_GRID};
use crate::error::{BeltramiError, Result};
use crate::io::{GridSpec, PlaneWaveEntry};
use crate::pipeline::FitParams;
use crate::r3_fields::ReferenceSpec;
use crate::s3_construct::NORTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    S3,
    T3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Vtk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub manifold: Manifold,
    /// s3: harmonic degree Λ (eigenvalue Λ+2); t3: lattice radius λ, so k·k = λ²
    #[serde(default)]
    pub lambda: Option<u64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub fit: FitParams,
    #[serde(default)]
    pub chart: ChartConfig,
    #[serde(default)]
    pub torus: TorusConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub helicity: HelicityConfig,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub rates: RatesConfig,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChartConfig {
    /// base point of the normal chart, renormalized onto S³
    pub base: [f64; 4],
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig { base: NORTH }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusConfig {
    /// cells of the S² partition sampling the Herglotz density
    pub sphere_cells: usize,
    /// explicit plane-wave atoms; when present the reference is not used for the build
    pub atoms: Option<Vec<PlaneWaveEntry>>,
}

impl Default for TorusConfig {
    fn default() -> Self {
        TorusConfig { sphere_cells: 256, atoms: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// descriptor read by eval/trace/section/norms/helicity; defaults to `<dir>/field.json`
    pub field: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), field: None, formats: vec![Format::Csv, Format::Vtk] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub grid: GridSpec,
    /// sample x ↦ u(x/λ) (through the normal chart on S³) instead of u(x)
    pub rescaled: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { grid: GridSpec::default(), rescaled: true }
    }
}

/// Where field lines are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowSpace {
    /// ℝ³ through the rescaled normal chart (S³ fields), or ℝ³ itself (atom fields)
    Chart,
    /// the ℝ⁴ embedding of S³
    Sphere,
    /// [0, 2π)³ with winding counters
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    /// default: chart for S³ and atom fields, torus for T³ fields
    pub space: Option<FlowSpace>,
    /// starting points for trace, in the coordinates of `space`
    pub seeds: Vec<Vec<f64>>,
    pub time: f64,
    pub tol: f64,
    pub max_step: Option<f64>,
    pub max_steps: usize,
    pub section: SectionConfig,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            space: None,
            seeds: Vec::new(),
            time: 10.0,
            tol: 1e-10,
            max_step: None,
            max_steps: 10_000_000,
            section: SectionConfig::default(),
        }
    }
}

impl DynamicsConfig {
    pub fn trace_options(&self) -> TraceOptions {
        TraceOptions { tol: self.tol, initial_step: None, max_step: self.max_step.unwrap_or(f64::INFINITY), max_steps: self.max_steps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SectionConfig {
    /// defaults to the origin
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    /// first section axis; in ℝ³ its part orthogonal to the normal is used and the second axis is normal × axis
    pub axis: Vec<f64>,
    /// required for four-dimensional sections
    pub axis2: Option<Vec<f64>>,
    pub half_plane: bool,
    pub returns: usize,
    pub max_time: f64,
    pub min_transversality: f64,
    /// explicit seeds in section coordinates
    pub seeds: Vec<[f64; 2]>,
    pub annulus: Option<AnnulusConfig>,
    pub closure_threshold: f64,
    pub min_returns: usize,
}

impl Default for SectionConfig {
    fn default() -> Self {
        SectionConfig {
            point: Vec::new(),
            normal: Vec::new(),
            axis: Vec::new(),
            axis2: None,
            half_plane: false,
            returns: 100,
            max_time: 1e6,
            min_transversality: 1e-6,
            seeds: Vec::new(),
            annulus: None,
            closure_threshold: DEFAULT_CLOSURE_THRESHOLD,
            min_returns: DEFAULT_MIN_RETURNS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnulusShape {
    /// the invariant ellipse of the linearized return map
    Ellipse,
    Circle,
}

/// A ring of seeds around a closed orbit, plus the orbit's own crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnulusConfig {
    /// section coordinates of the orbit, or a guess when `newton` is set
    pub center: [f64; 2],
    /// semi-major axis
    pub radius: f64,
    pub count: usize,
    pub shape: AnnulusShape,
    pub newton: bool,
    pub newton_step: f64,
    pub newton_iterations: usize,
    pub jacobian_step: f64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        AnnulusConfig {
            center: [0.0, 0.0],
            radius: 0.05,
            count: 8,
            shape: AnnulusShape::Ellipse,
            newton: true,
            newton_step: 1e-5,
            newton_iterations: 20,
            jacobian_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub order: usize,
    pub grid_n: usize,
    pub radius: f64,
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig { order: 0, grid_n: DEFAULT_NORM_GRID, radius: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HelicityConfig {
    pub nodes: usize,
}

impl Default for HelicityConfig {
    fn default() -> Self {
        HelicityConfig { nodes: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    /// radii to enumerate; defaults to `lambda`
    pub radii: Vec<u64>,
    pub list_points: bool,
    /// inclusive range of n = λ² to filter for square-free values
    pub square_free: Option<[u64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    /// degrees Λ (s3) or lattice radii λ (t3)
    pub degrees: Vec<u64>,
    pub order: usize,
    pub grid_n: usize,
}

impl Default for RatesConfig {
    fn default() -> Self {
        RatesConfig { degrees: vec![100, 200, 400], order: 0, grid_n: DEFAULT_NORM_GRID }
    }
}

fn bad(msg: impl Into<String>) -> BeltramiError {
    BeltramiError::Config(msg.into())
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BeltramiError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fit.radius > 0.0) {
            return Err(bad("fit.radius must be positive"));
        }
        let b = self.chart.base;
        if !(b.iter().map(|v| v * v).sum::<f64>() > 0.0) || !b.iter().all(|v| v.is_finite()) {
            return Err(bad("chart.base must be a nonzero point of R^4"));
        }
        if self.output.formats.is_empty() {
            return Err(bad("output.formats is empty"));
        }
        self.eval.grid.validate().map_err(|e| bad(format!("eval.grid: {e}")))?;
        self.dynamics.trace_options().validate().map_err(|e| bad(format!("dynamics: {e}")))?;
        if !(self.dynamics.time >= 0.0) {
            return Err(bad("dynamics.time must be nonnegative"));
        }
        if self.norms.grid_n < 2 || !(self.norms.radius > 0.0) {
            return Err(bad("norms needs grid_n >= 2 and a positive radius"));
        }
        if self.rates.grid_n < 2 {
            return Err(bad("rates.grid_n must be at least 2"));
        }
        if let Some([a, b]) = self.lattice.square_free {
            if a > b {
                return Err(bad("lattice.square_free range is inverted"));
            }
        }
        if let Some(a) = &self.dynamics.section.annulus {
            if !(a.radius > 0.0) || a.count == 0 {
                return Err(bad("dynamics.section.annulus needs a positive radius and count"));
            }
        }
        Ok(())
    }

    pub fn field_path(&self) -> PathBuf {
        self.output.field.clone().unwrap_or_else(|| self.output.dir.join("field.json"))
    }

    pub fn require_lambda(&self) -> Result<u64> {
        self.lambda.ok_or_else(|| bad("lambda is required for this command"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = PipelineConfig::parse("manifold = \"s3\"\nlambda = 101\n").unwrap();
        assert_eq!(c.seed, 1);
        assert_eq!(c.reference, ReferenceSpec::default());
        assert_eq!(c.fit, FitParams::default());
        assert_eq!(c.norms.grid_n, 33);
        assert_eq!(c.field_path(), PathBuf::from("out/field.json"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(PipelineConfig::parse("manifold = \"s3\"\nlamda = 3\n").is_err());
        assert!(PipelineConfig::parse("manifold = \"s3\"\n[fit]\ncels = 3\n").is_err());
        assert!(PipelineConfig::parse("manifold = \"r4\"\n").is_err());
        assert!(PipelineConfig::parse("lambda = 3\n").is_err());
    }

    #[test]
    fn nested_sections_parse() {
        let text = r#"
manifold = "t3"
lambda = 5
[reference]
kind = "abc"
a = 0.5
[torus]
atoms = [{ xi = [0.0, 0.0, 1.0], c_re = [1.0, 0.0, 0.0], c_im = [0.0, 1.0, 0.0] }]
[dynamics]
tol = 1e-9
[dynamics.section]
normal = [0.0, 1.0, 0.0]
axis = [1.0, 0.0, 0.0]
[dynamics.section.annulus]
center = [2.7, 0.0]
"#;
        let c = PipelineConfig::parse(text).unwrap();
        assert_eq!(c.reference, ReferenceSpec::Abc { a: 0.5, b: 1.0, c: 1.0 });
        assert_eq!(c.torus.atoms.as_ref().unwrap().len(), 1);
        assert_eq!(c.dynamics.section.annulus.unwrap().count, 8);
        assert_eq!(c.dynamics.section.returns, 100);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(PipelineConfig::parse("manifold = \"s3\"\n[dynamics]\ntol = 1.0\n").is_err());
        assert!(PipelineConfig::parse("manifold = \"s3\"\n[chart]\nbase = [0.0, 0.0, 0.0, 0.0]\n").is_err());
        assert!(PipelineConfig::parse("manifold = \"s3\"\n[eval.grid]\nlower = [0.0, 0.0, 0.0]\nupper = [0.0, 1.0, 1.0]\nn = [2, 2, 2]\n").is_err());
    }
}
