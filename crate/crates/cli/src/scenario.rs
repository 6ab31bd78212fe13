//! Scenario files: the JSON schema and its resolution into core types.

use std::collections::BTreeMap;

use causal_core::fv::{scattering_from_route, FvError, FvMeasurement};
use causal_core::geometry::{int, Diamond, GeometryError, Point, Rational, SpacelikeInterval, Worldline};
use causal_core::hybrid::{HybridNet, WorldlineSystem};
use causal_core::quantum::{serde_cmatrix, CMatrix, Channel, DensityOp, Effect, QuantumError, TensorSpace, UnitaryOp};
use causal_core::serde_rational;
use serde::{Deserialize, Serialize};

use crate::InputError;

pub const SCHEMA: &str = "causal-ops/1";

/// Rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

fn zero() -> Rational {
    int(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default)]
    pub systems: Vec<SystemSpec>,
    #[serde(default)]
    pub regions: Vec<RegionSpec>,
    #[serde(default)]
    pub states: Vec<StateSpec>,
    #[serde(default)]
    pub channels: Vec<ChannelSpec>,
    #[serde(default)]
    pub fv_measurements: Vec<FvSpec>,
    #[serde(default)]
    pub parties: Vec<PartySpec>,
    #[serde(default)]
    pub commands: CommandsSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldlineSpec {
    pub vertices: Vec<Point>,
    #[serde(with = "serde_rational", default = "zero")]
    pub initial_velocity: Rational,
    #[serde(with = "serde_rational", default = "zero")]
    pub final_velocity: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub label: String,
    pub dim: usize,
    pub worldline: WorldlineSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondSpec {
    pub bottom: Point,
    pub top: Point,
    #[serde(default)]
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    #[serde(with = "serde_rational")]
    pub t: Rational,
    #[serde(with = "serde_rational")]
    pub x_lo: Rational,
    #[serde(with = "serde_rational")]
    pub x_hi: Rational,
}

/// A named region; exactly one of `diamond` and `interval` is given.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diamond: Option<DiamondSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<IntervalSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Preparation {
    Basis(Vec<usize>),
    Vector(Vec<[f64; 2]>),
    Matrix(MatrixSpec),
    MaximallyMixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub name: String,
    pub factors: Vec<String>,
    pub prep: Preparation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub name: String,
    pub factors: Vec<String>,
    pub kraus: Vec<MatrixSpec>,
}

/// An operator on the listed factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub factors: Vec<String>,
    pub matrix: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FvSpec {
    pub name: String,
    pub probe: SystemSpec,
    /// Name of a diamond region.
    pub zone: String,
    /// One per crossing of the probe with the system worldlines.
    pub unitaries: Vec<OperatorSpec>,
    /// Name of a state on the probe.
    pub sigma: String,
    /// Probe effect; omitted for a non-selective measurement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<OperatorSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartySpec {
    pub label: String,
    pub region: String,
    #[serde(default)]
    pub factors: Vec<String>,
    /// Channel names.
    #[serde(default)]
    pub alternatives: Vec<String>,
    /// A channel or FV measurement name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_geometry: Option<GeometrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify_channel: Option<ClassifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sorkin: Option<SorkinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate_fv: Option<SimulateSpec>,
    #[serde(default)]
    pub verify: VerifySpec,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    /// Region lists expected to be causally ordered.
    #[serde(default)]
    pub causal_order: Vec<Vec<String>>,
    /// `[K, L]` pairs needing a separating Cauchy surface.
    #[serde(default)]
    pub cauchy: Vec<[String; 2]>,
    #[serde(default)]
    pub covers: Vec<CoverSpec>,
    #[serde(default)]
    pub routes: Vec<RouteSpec>,
    /// `[O_A, O_B, O_C]` to check as a Sorkin configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sorkin: Option<[String; 3]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    pub gamma: String,
    pub delta: String,
    pub zone: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSpec {
    pub o_a: String,
    pub o_c: String,
    pub gamma_a: String,
    pub gamma_c: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoSignalling,
    Signalling,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyTarget {
    pub channel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_a_to_c: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_c_to_a: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    pub a: Vec<String>,
    pub c: Vec<String>,
    pub targets: Vec<ClassifyTarget>,
    /// Also decompose channels that do not signal from `A` to `C`.
    #[serde(default)]
    pub decompose: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SorkinSpec {
    pub alice: String,
    pub bob: String,
    pub charlie: String,
    pub state: String,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub state: String,
    /// FV measurement names in causal order.
    pub measurements: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bfr: Option<BfrSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hybrid: Option<HybridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySuiteSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BfrSpec {
    pub a: usize,
    pub c: usize,
    pub probe: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridSpec {
    #[serde(default = "default_controls")]
    pub controls: usize,
    #[serde(default = "default_two")]
    pub a: usize,
    #[serde(default = "default_two")]
    pub b: usize,
    #[serde(default = "default_two")]
    pub c: usize,
    /// `[O_A, O_C]` region names and `[gamma_A, gamma_C]` system labels; the template layout if omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worldlines: Option<[String; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySuiteSpec {
    pub instances: usize,
    pub samples: usize,
}

fn default_samples() -> usize {
    64
}

fn default_controls() -> usize {
    20
}

fn default_two() -> usize {
    2
}

/// A named region after validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    Diamond(Diamond),
    Interval(SpacelikeInterval),
}

#[derive(Clone, Debug)]
pub struct Party {
    pub label: String,
    pub region_name: String,
    pub region: Diamond,
    pub factors: Vec<String>,
    pub alternatives: Vec<(String, Channel)>,
    pub operation: Option<(String, Channel)>,
}

/// A scenario with every name resolved and every object validated.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub net: HybridNet,
    pub regions: Vec<(String, Region)>,
    pub states: BTreeMap<String, DensityOp>,
    pub channels: BTreeMap<String, Channel>,
    pub fv: BTreeMap<String, FvMeasurement>,
    pub parties: BTreeMap<String, Party>,
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError::Invalid { path: path.into(), message: message.into() }
}

fn quantum(path: &str, e: QuantumError) -> InputError {
    invalid(path, e.to_string())
}

fn worldline(path: &str, w: &WorldlineSpec) -> Result<Worldline, InputError> {
    Worldline::new(w.vertices.clone(), w.initial_velocity.clone(), w.final_velocity.clone()).map_err(|e| match e {
        GeometryError::NonCausalSegment { first, second } => invalid(
            format!("{path}.vertices"),
            format!(
                "segment from vertex {first} {} to vertex {second} {} is not future-directed causal",
                w.vertices[first], w.vertices[second]
            ),
        ),
        e => invalid(path, e.to_string()),
    })
}

fn matrix(path: &str, m: &MatrixSpec) -> Result<CMatrix, InputError> {
    serde_cmatrix::from_rows(m).map_err(|e| invalid(path, e))
}

impl Resolved {
    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    /// The named region, which must be a diamond.
    pub fn diamond(&self, path: &str, name: &str) -> Result<&Diamond, InputError> {
        match self.region(name) {
            Some(Region::Diamond(d)) => Ok(d),
            Some(Region::Interval(_)) => Err(invalid(path, format!("region `{name}` is an interval, expected a diamond"))),
            None => Err(invalid(path, format!("unknown region `{name}`"))),
        }
    }

    pub fn system_worldline(&self, path: &str, label: &str) -> Result<&Worldline, InputError> {
        self.net.system(label).map(|s| &s.worldline).ok_or_else(|| invalid(path, format!("unknown system `{label}`")))
    }

    pub fn state(&self, path: &str, name: &str) -> Result<&DensityOp, InputError> {
        self.states.get(name).ok_or_else(|| invalid(path, format!("unknown state `{name}`")))
    }

    pub fn channel(&self, path: &str, name: &str) -> Result<&Channel, InputError> {
        self.channels.get(name).ok_or_else(|| invalid(path, format!("unknown channel `{name}`")))
    }

    pub fn party(&self, path: &str, label: &str) -> Result<&Party, InputError> {
        self.parties.get(label).ok_or_else(|| invalid(path, format!("unknown party `{label}`")))
    }

    pub fn measurement(&self, path: &str, name: &str) -> Result<&FvMeasurement, InputError> {
        self.fv.get(name).ok_or_else(|| invalid(path, format!("unknown FV measurement `{name}`")))
    }
}

/// Dimensions of every system and probe factor.
struct Dims(BTreeMap<String, usize>);

impl Dims {
    fn space(&self, path: &str, factors: &[String]) -> Result<TensorSpace, InputError> {
        let mut pairs = Vec::with_capacity(factors.len());
        for (i, f) in factors.iter().enumerate() {
            let d = self.0.get(f).ok_or_else(|| invalid(format!("{path}[{i}]"), format!("unknown factor `{f}`")))?;
            pairs.push((f.clone(), *d));
        }
        TensorSpace::new(pairs).map_err(|e| quantum(path, e))
    }
}

fn unique<'a>(path: &str, names: impl IntoIterator<Item = &'a str>) -> Result<(), InputError> {
    let mut seen = std::collections::BTreeSet::new();
    for (i, n) in names.into_iter().enumerate() {
        if !seen.insert(n) {
            return Err(invalid(format!("{path}[{i}]"), format!("duplicate name `{n}`")));
        }
    }
    Ok(())
}

fn state(path: &str, spec: &StateSpec, dims: &Dims) -> Result<DensityOp, InputError> {
    let space = dims.space(&format!("{path}.factors"), &spec.factors)?;
    let prep = format!("{path}.prep");
    let d = space.dim();
    match &spec.prep {
        Preparation::Basis(digits) => {
            if digits.len() != space.len() {
                return Err(invalid(prep, format!("{} digits for {} factors", digits.len(), space.len())));
            }
            if let Some((i, (&k, n))) = digits.iter().zip(space.dims()).enumerate().find(|(_, (&k, n))| k >= *n) {
                return Err(invalid(format!("{prep}.basis[{i}]"), format!("level {k} out of range for dimension {n}")));
            }
            DensityOp::basis(space, digits).map_err(|e| quantum(&prep, e))
        }
        Preparation::Vector(v) => {
            if v.len() != d {
                return Err(invalid(prep, format!("vector has {} entries, expected {d}", v.len())));
            }
            let psi: Vec<_> = v.iter().map(|e| causal_core::quantum::c(e[0], e[1])).collect();
            DensityOp::pure(space, &psi).map_err(|e| quantum(&prep, e))
        }
        Preparation::Matrix(m) => {
            let m = matrix(&format!("{prep}.matrix"), m)?;
            DensityOp::new(space, m).map_err(|e| quantum(&prep, e))
        }
        Preparation::MaximallyMixed => Ok(DensityOp::maximally_mixed(space)),
    }
}

fn operator(path: &str, spec: &OperatorSpec, dims: &Dims) -> Result<(TensorSpace, CMatrix), InputError> {
    let space = dims.space(&format!("{path}.factors"), &spec.factors)?;
    let m = matrix(&format!("{path}.matrix"), &spec.matrix)?;
    Ok((space, m))
}

fn fv(path: &str, spec: &FvSpec, res: &Resolved, dims: &Dims) -> Result<FvMeasurement, InputError> {
    let route = worldline(&format!("{path}.probe.worldline"), &spec.probe.worldline)?;
    let zone = res.diamond(&format!("{path}.zone"), &spec.zone)?.clone();
    let unitaries = spec
        .unitaries
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let p = format!("{path}.unitaries[{i}]");
            let (space, m) = operator(&p, u, dims)?;
            UnitaryOp::new(space, m).map_err(|e| quantum(&p, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let fv_err = |e: FvError| invalid(path, e.to_string());
    let theta = scattering_from_route(&route, &res.net, &spec.probe.label, spec.probe.dim, &zone, &unitaries).map_err(fv_err)?;
    let sigma = res.state(&format!("{path}.sigma"), &spec.sigma)?.clone();
    let b = match &spec.effect {
        Some(e) => {
            let p = format!("{path}.effect");
            let (space, m) = operator(&p, e, dims)?;
            Effect::new(space, m).map_err(|e| quantum(&p, e))?
        }
        None => Effect::identity(sigma.space().clone()),
    };
    let probe = WorldlineSystem { label: spec.probe.label.clone(), worldline: route, dim: spec.probe.dim };
    FvMeasurement::new(vec![probe], zone, theta, sigma, b).map_err(fv_err)
}

/// Validates a parsed scenario and resolves every reference.
pub fn resolve(scenario: Scenario) -> Result<Resolved, InputError> {
    if scenario.schema != SCHEMA {
        return Err(invalid("schema", format!("unsupported schema {:?}, expected {SCHEMA:?}", scenario.schema)));
    }
    let s = &scenario;
    let factor_names = s.systems.iter().map(|x| x.label.as_str()).chain(s.fv_measurements.iter().map(|m| m.probe.label.as_str()));
    unique("systems", factor_names)?;
    unique("regions", s.regions.iter().map(|r| r.name.as_str()))?;
    unique("states", s.states.iter().map(|x| x.name.as_str()))?;
    let op_names = s.channels.iter().map(|x| x.name.as_str()).chain(s.fv_measurements.iter().map(|m| m.name.as_str()));
    unique("channels", op_names)?;
    unique("parties", s.parties.iter().map(|x| x.label.as_str()))?;

    let mut systems = Vec::with_capacity(s.systems.len());
    let mut dims = BTreeMap::new();
    for (i, sys) in s.systems.iter().enumerate() {
        if sys.dim == 0 {
            return Err(invalid(format!("systems[{i}].dim"), "dimension must be positive"));
        }
        let w = worldline(&format!("systems[{i}].worldline"), &sys.worldline)?;
        systems.push(WorldlineSystem { label: sys.label.clone(), worldline: w, dim: sys.dim });
        dims.insert(sys.label.clone(), sys.dim);
    }
    for (i, m) in s.fv_measurements.iter().enumerate() {
        if m.probe.dim == 0 {
            return Err(invalid(format!("fv_measurements[{i}].probe.dim"), "dimension must be positive"));
        }
        dims.insert(m.probe.label.clone(), m.probe.dim);
    }
    let dims = Dims(dims);
    let net = HybridNet::new(systems).map_err(|e| quantum("systems", e))?;
    if net.space().dim() > 64 {
        return Err(invalid("systems", format!("total dimension {} exceeds 64", net.space().dim())));
    }

    let mut regions = Vec::with_capacity(s.regions.len());
    for (i, r) in s.regions.iter().enumerate() {
        let path = format!("regions[{i}]");
        let region = match (&r.diamond, &r.interval) {
            (Some(d), None) => Region::Diamond(
                Diamond::new(d.bottom.clone(), d.top.clone(), d.closed)
                    .map_err(|e| invalid(format!("{path}.diamond"), e.to_string()))?,
            ),
            (None, Some(iv)) => Region::Interval(
                SpacelikeInterval::new(iv.t.clone(), iv.x_lo.clone(), iv.x_hi.clone())
                    .map_err(|e| invalid(format!("{path}.interval"), e.to_string()))?,
            ),
            _ => return Err(invalid(&path, "give exactly one of `diamond` and `interval`")),
        };
        regions.push((r.name.clone(), region));
    }

    let mut states = BTreeMap::new();
    for (i, st) in s.states.iter().enumerate() {
        states.insert(st.name.clone(), state(&format!("states[{i}]"), st, &dims)?);
    }

    let mut channels = BTreeMap::new();
    for (i, ch) in s.channels.iter().enumerate() {
        let path = format!("channels[{i}]");
        let space = dims.space(&format!("{path}.factors"), &ch.factors)?;
        if ch.kraus.is_empty() {
            return Err(invalid(format!("{path}.kraus"), "at least one Kraus operator is required"));
        }
        let kraus =
            ch.kraus.iter().enumerate().map(|(k, m)| matrix(&format!("{path}.kraus[{k}]"), m)).collect::<Result<Vec<_>, _>>()?;
        channels.insert(ch.name.clone(), Channel::on(space, kraus).map_err(|e| quantum(&path, e))?);
    }

    let mut res =
        Resolved { scenario: scenario.clone(), net, regions, states, channels, fv: BTreeMap::new(), parties: BTreeMap::new() };

    for (i, m) in scenario.fv_measurements.iter().enumerate() {
        let measurement = fv(&format!("fv_measurements[{i}]"), m, &res, &dims)?;
        res.fv.insert(m.name.clone(), measurement);
    }

    for (i, p) in scenario.parties.iter().enumerate() {
        let path = format!("parties[{i}]");
        let region = res.diamond(&format!("{path}.region"), &p.region)?.clone();
        for (k, f) in p.factors.iter().enumerate() {
            if !res.net.space().contains(f) {
                return Err(invalid(format!("{path}.factors[{k}]"), format!("unknown system `{f}`")));
            }
        }
        let alternatives = p
            .alternatives
            .iter()
            .enumerate()
            .map(|(k, a)| Ok((a.clone(), res.channel(&format!("{path}.alternatives[{k}]"), a)?.clone())))
            .collect::<Result<Vec<_>, InputError>>()?;
        let operation = match &p.operation {
            Some(name) => {
                let op_path = format!("{path}.operation");
                let ch = match res.fv.get(name) {
                    Some(m) => m.channel().map_err(|e| invalid(&op_path, e.to_string()))?,
                    None => res.channel(&op_path, name)?.clone(),
                };
                Some((name.clone(), ch))
            }
            None => None,
        };
        res.parties.insert(
            p.label.clone(),
            Party {
                label: p.label.clone(),
                region_name: p.region.clone(),
                region,
                factors: p.factors.clone(),
                alternatives,
                operation,
            },
        );
    }
    Ok(res)
}
