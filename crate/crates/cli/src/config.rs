use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use spinbie::geometry::{
    make_circle, make_corner_curve, make_ellipse, make_icosphere_at, Curve2D, Surface3D, Vec3,
};
use spinbie::scattering::{Body, ElectromagneticField, MaterialParams, Part, Side, TransmissionConfig};
use spinbie::{Mesh, WaveNumber};

/// A config file: the experiment kind tags the parameter block.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Dirichlet2d(Dirichlet2dConfig),
    Dirichlet2dClassical(Dirichlet2dConfig),
    MaxwellPec(MaxwellPecConfig),
    DiracGeneric(DiracGenericConfig),
    Transmission(TransmissionRunConfig),
    MellinSweep(MellinSweepConfig),
    CornerSweep(CornerSweepConfig),
    ResonanceSweep(ResonanceSweepConfig),
    CalderonCheck(CalderonCheckConfig),
    OperatorDump(OperatorDumpConfig),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Dirichlet2d(_) => "dirichlet2d",
            ExperimentConfig::Dirichlet2dClassical(_) => "dirichlet2d-classical",
            ExperimentConfig::MaxwellPec(_) => "maxwell-pec",
            ExperimentConfig::DiracGeneric(_) => "dirac-generic",
            ExperimentConfig::Transmission(_) => "transmission",
            ExperimentConfig::MellinSweep(_) => "mellin-sweep",
            ExperimentConfig::CornerSweep(_) => "corner-sweep",
            ExperimentConfig::ResonanceSweep(_) => "resonance-sweep",
            ExperimentConfig::CalderonCheck(_) => "calderon-check",
            ExperimentConfig::OperatorDump(_) => "operator-dump",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Circle { radius: f64, nodes: usize },
    Ellipse { a: f64, b: f64, nodes: usize },
    /// Lens with interior corner angle θ, Kress-graded towards the corners.
    Lens { theta: f64, nodes: usize, #[serde(default = "default_grading")] grading: f64 },
    Icosphere { radius: f64, #[serde(default)] center: Vec3, subdivisions: usize },
    /// A curve or surface in the library's JSON mesh schema.
    File { path: PathBuf },
}

fn default_grading() -> f64 {
    3.0
}

impl Geometry {
    pub fn mesh(&self) -> spinbie::Result<Mesh> {
        Ok(match self {
            Geometry::Circle { radius, nodes } => Mesh::Curve(make_circle(*radius, *nodes)?),
            Geometry::Ellipse { a, b, nodes } => Mesh::Curve(make_ellipse(*a, *b, *nodes)?),
            Geometry::Lens { theta, nodes, grading } => Mesh::Curve(make_corner_curve(*theta, *nodes, *grading)?),
            Geometry::Icosphere { radius, center, subdivisions } => {
                Mesh::Surface(make_icosphere_at(*radius, *center, *subdivisions)?)
            }
            Geometry::File { path } => {
                let text = std::fs::read_to_string(path)?;
                match Surface3D::from_json(&text) {
                    Ok(s) => Mesh::Surface(s),
                    Err(_) => Mesh::Curve(Curve2D::from_json(&text)?),
                }
            }
        })
    }

    pub fn curve(&self) -> spinbie::Result<Curve2D> {
        match self.mesh()? {
            Mesh::Curve(c) => Ok(c),
            Mesh::Surface(_) => Err(spinbie::Error::Invalid("this experiment needs a planar curve".into())),
        }
    }

    pub fn surface(&self) -> spinbie::Result<Surface3D> {
        match self.mesh()? {
            Mesh::Surface(s) => Ok(s),
            Mesh::Curve(_) => Err(spinbie::Error::Invalid("this experiment needs a closed surface".into())),
        }
    }
}

/// Complex wave number, written as a number or as [re, im].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WaveNumberSpec {
    Real(f64),
    Complex([f64; 2]),
}

impl WaveNumberSpec {
    pub fn value(&self) -> C64 {
        match *self {
            WaveNumberSpec::Real(k) => C64::new(k, 0.0),
            WaveNumberSpec::Complex([re, im]) => C64::new(re, im),
        }
    }

    pub fn wave_number(&self) -> spinbie::Result<WaveNumber> {
        WaveNumber::new(self.value())
    }
}

/// Dirichlet data g = Re or Im of (z − center)^degree, harmonic so its interior extension is known.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicData {
    pub degree: u32,
    #[serde(default)]
    pub imaginary: bool,
    #[serde(default)]
    pub center: [f64; 2],
}

impl HarmonicData {
    pub fn eval(&self, z: C64) -> f64 {
        let w = (z - C64::new(self.center[0], self.center[1])).powu(self.degree);
        if self.imaginary {
            w.im
        } else {
            w.re
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dirichlet2dConfig {
    pub geometry: Geometry,
    pub data: HarmonicData,
    #[serde(default)]
    pub probes: Vec<[f64; 2]>,
}

/// Evaluation points: explicit, on a Fibonacci sphere, and seeded random directions.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probes {
    #[serde(default)]
    pub points: Vec<Vec3>,
    #[serde(default)]
    pub sphere: Option<ProbeSphere>,
    #[serde(default)]
    pub random: Option<ProbeSphere>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSphere {
    #[serde(default)]
    pub center: Vec3,
    pub radius: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxwellPecConfig {
    pub geometry: Geometry,
    pub wave_number: WaveNumberSpec,
    pub incident: ElectromagneticField,
    /// Exact scattered field, when known, for trace and probe errors.
    #[serde(default)]
    pub reference: Option<ElectromagneticField>,
    #[serde(default)]
    pub probes: Probes,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracGenericConfig {
    pub geometry: Geometry,
    pub wave_number: WaveNumberSpec,
    pub side: Side,
    pub part: Part,
    /// g is the panel average of this field.
    pub data: ElectromagneticField,
    #[serde(default)]
    pub reference: Option<ElectromagneticField>,
    #[serde(default)]
    pub probes: Probes,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub geometry: Geometry,
    pub material: MaterialParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionRunConfig {
    pub exterior: MaterialParams,
    pub bodies: Vec<BodySpec>,
    pub incident: ElectromagneticField,
    #[serde(default)]
    pub probes: Probes,
    #[serde(default)]
    pub seed: u64,
    /// Offset of the jump-residual probes in panel diameters.
    #[serde(default = "default_jump_offset")]
    pub jump_offset: f64,
}

fn default_jump_offset() -> f64 {
    0.5
}

impl TransmissionRunConfig {
    pub fn build(&self) -> spinbie::Result<TransmissionConfig> {
        let bodies = self
            .bodies
            .iter()
            .map(|b| Ok(Body { surface: b.geometry.surface()?, material: b.material }))
            .collect::<spinbie::Result<Vec<_>>>()?;
        let cfg = TransmissionConfig { exterior: self.exterior, bodies };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MellinSweepConfig {
    pub thetas: Vec<f64>,
    #[serde(default)]
    pub xi_grid: Option<XiGrid>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiGrid {
    pub per_sign: usize,
    pub xi_max: f64,
    pub uniform: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerSweepConfig {
    pub thetas: Vec<f64>,
    pub nodes: usize,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceSweepConfig {
    pub geometry: Geometry,
    pub k_min: f64,
    pub k_max: f64,
    pub steps: usize,
}

impl ResonanceSweepConfig {
    pub fn wave_numbers(&self) -> Vec<f64> {
        if self.steps < 2 {
            return vec![self.k_min];
        }
        let h = (self.k_max - self.k_min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.k_min + h * i as f64).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalderonCheckConfig {
    pub geometries: Vec<Geometry>,
    pub wave_numbers: Vec<f64>,
    /// Also report ‖(E⁺ : S⁻ → E⁺)⁻¹‖ and its exterior analogue.
    #[serde(default)]
    pub half_space_norms: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DumpOperator {
    E,
    N,
    S,
    T,
    K,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDumpConfig {
    pub geometry: Geometry,
    pub operator: DumpOperator,
    #[serde(default)]
    pub wave_number: Option<f64>,
}

/// Parse and validate, reporting JSON errors with their line and column.
pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
    let cfg: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| format!("line {}, column {}: {e}", e.line(), e.column()))?;
    validate(&cfg).map_err(|e| format!("invalid config: {e}"))?;
    Ok(cfg)
}

fn positive(name: &str, v: f64) -> spinbie::Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(spinbie::Error::Invalid(format!("{name} must be positive, got {v}")))
    }
}

fn check_k(k: &WaveNumberSpec) -> spinbie::Result<()> {
    k.wave_number().map(|_| ())
}

fn check_probes(p: &Probes) -> spinbie::Result<()> {
    for s in p.sphere.iter().chain(p.random.iter()) {
        positive("probe radius", s.radius)?;
    }
    Ok(())
}

/// Schema checks that need no mesh construction.
pub fn validate(cfg: &ExperimentConfig) -> spinbie::Result<()> {
    match cfg {
        ExperimentConfig::Dirichlet2d(_) | ExperimentConfig::Dirichlet2dClassical(_) => Ok(()),
        ExperimentConfig::MaxwellPec(c) => {
            check_k(&c.wave_number)?;
            c.incident.validate()?;
            if let Some(r) = &c.reference {
                r.validate()?;
            }
            check_probes(&c.probes)
        }
        ExperimentConfig::DiracGeneric(c) => {
            check_k(&c.wave_number)?;
            c.data.validate()?;
            check_probes(&c.probes)
        }
        ExperimentConfig::Transmission(c) => {
            c.exterior.validate()?;
            for b in &c.bodies {
                b.material.validate()?;
            }
            c.incident.validate()?;
            positive("jump_offset", c.jump_offset)?;
            check_probes(&c.probes)
        }
        ExperimentConfig::MellinSweep(c) => {
            if c.thetas.len() < 3 {
                return Err(spinbie::Error::Invalid("mellin-sweep needs at least 3 angles".into()));
            }
            c.thetas.iter().try_for_each(|t| positive("theta", *t))
        }
        ExperimentConfig::CornerSweep(c) => c.thetas.iter().try_for_each(|t| positive("theta", *t)),
        ExperimentConfig::ResonanceSweep(c) => {
            positive("k_min", c.k_min)?;
            positive("k_max", c.k_max)?;
            if c.k_max < c.k_min || c.steps == 0 {
                return Err(spinbie::Error::Invalid("need k_min ≤ k_max and steps ≥ 1".into()));
            }
            Ok(())
        }
        ExperimentConfig::CalderonCheck(c) => {
            if c.geometries.is_empty() || c.wave_numbers.is_empty() {
                return Err(spinbie::Error::Invalid("need at least one geometry and one wave number".into()));
            }
            c.wave_numbers.iter().try_for_each(|&k| WaveNumber::new(C64::new(k, 0.0)).map(|_| ()))
        }
        ExperimentConfig::OperatorDump(_) => Ok(()),
    }
}
