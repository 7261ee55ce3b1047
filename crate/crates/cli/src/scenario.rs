//! Scenario documents: `{command, params, seed?, output_dir?}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::InputError;

/// A finite metric space, either read from disk or built in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    /// Header row of ids, then the square distance matrix.
    MatrixCsv(PathBuf),
    /// `src,dst,weight` rows with 0-based indices; the metric is the path metric.
    EdgeCsv(PathBuf),
    UniformPath { n: usize, length: f64 },
    Tripod { leg_points: usize, leg_length: f64 },
    Cycle { n: usize, circumference: f64 },
    /// Points on the real line.
    Line(Vec<f64>),
}

impl SpaceSpec {
    pub fn file(&self) -> Option<&Path> {
        match self {
            SpaceSpec::MatrixCsv(p) | SpaceSpec::EdgeCsv(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase", deny_unknown_fields)]
pub enum WarpingSpec {
    Constant { value: f64 },
    Affine { intercept: f64, slope: f64 },
    Exponential { scale: f64, rate: f64 },
    Cosh { scale: f64, rate: f64, shift: f64 },
    Tabulated { knots: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub interval: [f64; 2],
    pub n_t: usize,
    pub fiber: SpaceSpec,
    pub warping: WarpingSpec,
}

/// A cone point: time `t` over fiber index `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub t: f64,
    pub x: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Affine { lambda: f64, c: f64 },
    /// Coefficients from the constant term up.
    Polynomial { coeffs: Vec<f64> },
}

/// A discrete pre-length space given inline or drawn at random.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PlsSpec {
    Inline {
        base: SpaceSpec,
        causal: Vec<Vec<bool>>,
        chrono: Vec<Vec<bool>>,
        rho: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<Vec<f64>>,
    },
    /// Seeded Minkowski lattice sample; uses the scenario seed.
    RandomMinkowski { n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pls: Option<PlsSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NulldistParams {
    pub cone: ConeSpec,
    /// Source nodes (grid indices); all nodes, or a seeded stratified sample
    /// on large grids, when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesepParams {
    pub cone: ConeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<usize>>,
    #[serde(default)]
    pub pairs: Vec<[PointSpec; 2]>,
}

fn default_samples() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullcurveParams {
    pub cone: ConeSpec,
    pub pairs: Vec<[PointSpec; 2]>,
    /// Samples per curve in the CSV.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Quadrature points per segment for the nullity and variation checks.
    #[serde(default = "default_samples")]
    pub per_segment: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub j: usize,
    pub warping: WarpingSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeParams {
    pub fiber: SpaceSpec,
    pub interval: [f64; 2],
    pub n_t: usize,
    pub limit: WarpingSpec,
    pub members: Vec<MemberSpec>,
    pub lower_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhParams {
    pub a: SpaceSpec,
    pub b: SpaceSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetParams {
    pub fiber: SpaceSpec,
    pub interval: [f64; 2],
    pub n_t: usize,
    pub family: Vec<WarpingSpec>,
    pub bound: f64,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

fn default_probe() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureParams {
    pub cone: ConeSpec,
    pub k: f64,
    pub direction: Direction,
    #[serde(default)]
    pub n_triangles: usize,
    #[serde(default = "default_probe")]
    pub n_probe: usize,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_cap: Option<f64>,
    #[serde(default)]
    pub min_steepness: f64,
    /// Explicit triangles `x << y << z`, checked in addition to the sample.
    #[serde(default)]
    pub triangles: Vec<[PointSpec; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpedMember {
    pub interval: [f64; 2],
    pub warping: WarpingSpec,
    pub k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpec {
    Product { interval: [f64; 2] },
    MinkowskiCone { interval: [f64; 2] },
    Warped { members: Vec<WarpedMember>, limit: WarpedMember },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistParams {
    pub mode: ModeSpec,
    pub fibers: Vec<SpaceSpec>,
    pub limit: SpaceSpec,
    pub n_t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_mesh: Option<f64>,
    pub n_triangles: usize,
    #[serde(default = "default_probe")]
    pub n_probe: usize,
    pub tol: f64,
    pub quadruple_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_cap: Option<f64>,
    #[serde(default)]
    pub min_steepness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "command", content = "params", rename_all = "lowercase")]
pub enum Command {
    Validate(ValidateParams),
    Nulldist(NulldistParams),
    Timesep(TimesepParams),
    Nullcurve(NullcurveParams),
    Converge(ConvergeParams),
    Gh(GhParams),
    Net(NetParams),
    Curvature(CurvatureParams),
    Persist(PersistParams),
}

pub const COMMANDS: [&str; 9] = ["validate", "nulldist", "timesep", "nullcurve", "converge", "gh", "net", "curvature", "persist"];

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Nulldist(_) => "nulldist",
            Command::Timesep(_) => "timesep",
            Command::Nullcurve(_) => "nullcurve",
            Command::Converge(_) => "converge",
            Command::Gh(_) => "gh",
            Command::Net(_) => "net",
            Command::Curvature(_) => "curvature",
            Command::Persist(_) => "persist",
        }
    }

    /// Every file the command reads, in document order.
    pub fn input_files(&self) -> Vec<&Path> {
        let spaces: Vec<&SpaceSpec> = match self {
            Command::Validate(p) => {
                let mut v: Vec<&SpaceSpec> = p.space.iter().collect();
                if let Some(PlsSpec::Inline { base, .. }) = &p.pls {
                    v.push(base);
                }
                v
            }
            Command::Nulldist(p) => vec![&p.cone.fiber],
            Command::Timesep(p) => vec![&p.cone.fiber],
            Command::Nullcurve(p) => vec![&p.cone.fiber],
            Command::Converge(p) => vec![&p.fiber],
            Command::Gh(p) => vec![&p.a, &p.b],
            Command::Net(p) => vec![&p.fiber],
            Command::Curvature(p) => vec![&p.cone.fiber],
            Command::Persist(p) => p.fibers.iter().chain(std::iter::once(&p.limit)).collect(),
        };
        spaces.into_iter().filter_map(SpaceSpec::file).collect()
    }

    fn n_t_mut(&mut self) -> Option<&mut usize> {
        match self {
            Command::Validate(_) | Command::Gh(_) => None,
            Command::Nulldist(p) => Some(&mut p.cone.n_t),
            Command::Timesep(p) => Some(&mut p.cone.n_t),
            Command::Nullcurve(p) => Some(&mut p.cone.n_t),
            Command::Converge(p) => Some(&mut p.n_t),
            Command::Net(p) => Some(&mut p.n_t),
            Command::Curvature(p) => Some(&mut p.cone.n_t),
            Command::Persist(p) => Some(&mut p.n_t),
        }
    }

    fn tol_mut(&mut self) -> Option<&mut f64> {
        match self {
            Command::Curvature(p) => Some(&mut p.tol),
            Command::Persist(p) => Some(&mut p.tol),
            _ => None,
        }
    }
}

/// A parsed scenario with file references resolved against `base_dir`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
    /// Not part of the manifest: outputs must not depend on where they go.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario<'a> {
    command: String,
    #[serde(borrow)]
    params: &'a RawValue,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

/// Command-line overrides applied on top of the document.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub n_t: Option<usize>,
    pub tol: Option<f64>,
}

/// 1-based line and column of byte `offset` in `text`.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn json_error(origin: &str, e: &serde_json::Error, line0: usize, col0: usize) -> InputError {
    let (line, col) = if e.line() <= 1 { (line0, col0 + e.column().saturating_sub(1)) } else { (line0 + e.line() - 1, e.column()) };
    InputError::new(format!("{origin}:{line}:{col}"), e.to_string())
}

fn parse_params<'de, P: Deserialize<'de>>(origin: &str, text: &str, raw: &'de RawValue) -> Result<P, InputError> {
    let offset = raw.get().as_ptr() as usize - text.as_ptr() as usize;
    let (line0, col0) = line_col(text, offset);
    serde_json::from_str(raw.get()).map_err(|e| json_error(origin, &e, line0, col0))
}

impl Scenario {
    /// Parses a scenario document. `origin` names it in error locations.
    pub fn parse(text: &str, origin: &str, base_dir: &Path) -> Result<Self, InputError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| json_error(origin, &e, 1, 1))?;
        let p = raw.params;
        let command = match raw.command.as_str() {
            "validate" => Command::Validate(parse_params(origin, text, p)?),
            "nulldist" => Command::Nulldist(parse_params(origin, text, p)?),
            "timesep" => Command::Timesep(parse_params(origin, text, p)?),
            "nullcurve" => Command::Nullcurve(parse_params(origin, text, p)?),
            "converge" => Command::Converge(parse_params(origin, text, p)?),
            "gh" => Command::Gh(parse_params(origin, text, p)?),
            "net" => Command::Net(parse_params(origin, text, p)?),
            "curvature" => Command::Curvature(parse_params(origin, text, p)?),
            "persist" => Command::Persist(parse_params(origin, text, p)?),
            other => {
                let at = text.find("\"command\"").unwrap_or(0);
                let (line, col) = line_col(text, at);
                return Err(InputError::new(
                    format!("{origin}:{line}:{col}"),
                    format!("unknown command `{other}`, expected one of {}", COMMANDS.join(", ")),
                ));
            }
        };
        Ok(Self { command, seed: raw.seed, output_dir: raw.output_dir, base_dir: base_dir.to_path_buf() })
    }

    /// Reads and parses a scenario file; relative paths inside it resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|e| InputError::new(path.display().to_string(), e.to_string()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &path.display().to_string(), &base)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), InputError> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output_dir = Some(out.clone());
        }
        let name = self.command.name();
        if let Some(n_t) = o.n_t {
            *self.command.n_t_mut().ok_or_else(|| InputError::new("--n-t", format!("command `{name}` has no time grid")))? = n_t;
        }
        if let Some(tol) = o.tol {
            *self.command.tol_mut().ok_or_else(|| InputError::new("--tol", format!("command `{name}` takes no tolerance")))? = tol;
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
