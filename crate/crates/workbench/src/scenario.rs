//! Scenario files: schema, loading and validation.
//!
//! The format is documented in `SCENARIOS.md` next to this crate's manifest.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use argprin_core::cr::{Axis, Embedding, ManifoldPatch};
use argprin_core::family::{FamilyFn, ManifoldKind, OrbitMode, ParamManifold, ZetaGrid};
use argprin_core::Error as CoreError;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::builtins;
use crate::expr::{parse_complex, Expr};

pub const SCHEMA_VERSION: u32 = 1;

/// A scenario that failed to load, with the path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadError {
    pub field: String,
    pub message: String,
}

impl LoadError {
    fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { field: field.into(), message: message.to_string() }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for LoadError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    FamilyVerdict,
    StripProblem,
    CrField,
    ArgumentPrinciple,
    MomentCheck,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::FamilyVerdict => "family-verdict",
            Kind::StripProblem => "strip-problem",
            Kind::CrField => "cr-field",
            Kind::ArgumentPrinciple => "argument-principle",
            Kind::MomentCheck => "moment-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub id: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<PatchSpec>,
    /// Scalar functions of the ambient coordinates (`z`, or `z1 … zn`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planar_grid: Option<PlanarGridSpec>,
    /// Highest total degree of the monomial forms in moment checks.
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argument: Option<ArgumentSpec>,
    #[serde(default)]
    pub expect: Expectations,
}

fn default_k_max() -> u32 {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    /// Boundary samples per disc (power of two ≥ 16).
    pub boundary: usize,
    /// Samples per circle factor of the parameter manifold.
    pub parameter: usize,
    pub interior_radii: Vec<f64>,
    pub interior_angles: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { boundary: 256, parameter: 128, interior_radii: vec![0.0, 0.25, 0.5, 0.75], interior_angles: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative singular-value cutoff for complex and real ranks.
    pub rank: f64,
    pub moment: f64,
    pub extension: f64,
    /// Distance to the nearest integer accepted when rounding windings and counts.
    pub integer: f64,
    /// Planar `∂̄` residual below which data counts as holomorphic.
    pub dbar: f64,
    /// Tangential `Z̄f` residual below which data counts as CR.
    pub dbar_tangential: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rank: 1e-7, moment: 1e-8, extension: 1e-8, integer: 1e-8, dbar: 1e-6, dbar_tangential: 1e-3 }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 6] = ["rank", "moment", "extension", "integer", "dbar", "dbar_tangential"];

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), LoadError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(LoadError::new(format!("tolerances.{name}"), format!("must be a positive number, got {value}")));
        }
        let slot = match name {
            "rank" => &mut self.rank,
            "moment" => &mut self.moment,
            "extension" => &mut self.extension,
            "integer" => &mut self.integer,
            "dbar" => &mut self.dbar,
            "dbar_tangential" => &mut self.dbar_tangential,
            _ => {
                return Err(LoadError::new(
                    format!("tolerances.{name}"),
                    format!("unknown tolerance (expected one of {})", Self::NAMES.join(", ")),
                ))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("rank", self.rank),
            ("moment", self.moment),
            ("extension", self.extension),
            ("integer", self.integer),
            ("dbar", self.dbar),
            ("dbar_tangential", self.dbar_tangential),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// Coordinates of `Φ(ζ, t)`; variables `zeta` and `t` (circle) or `t1, t2`.
    pub phi: Vec<String>,
    pub manifold: ManifoldSpec,
    /// Declared real dimension of `Φ(S¹ × M)`.
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitSpec>,
    #[serde(default)]
    pub mode: FamilyMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ManifoldSpec {
    Point,
    Circle,
    Torus,
    Sphere { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum OrbitSpec {
    Planar { coordinate: usize },
    Declared { nontrivial: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyMode {
    /// Hypotheses and rank conclusion of the parametric argument principle.
    #[default]
    Theorem,
    /// Constancy in `ζ` and collapse of the image.
    Collapse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    pub start: f64,
    pub end: f64,
    pub count: usize,
    #[serde(default)]
    pub periodic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub axes: Vec<AxisSpec>,
    /// Coordinates of the embedding in terms of the axis names.
    pub embedding: Vec<String>,
    /// Optional graph function of the embedded coordinates; the patch becomes its graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarGridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArgumentSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomSuite>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counts: Vec<CountCase>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residues: Vec<ResidueCase>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub linking: Vec<LinkingCase>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub degrees: Vec<DegreeCase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSuite {
    pub polynomials: usize,
    pub max_degree: usize,
    pub targets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountCase {
    /// Function of `zeta`, holomorphic on the closed disc.
    pub phi: String,
    #[serde(default = "zero_string")]
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
}

fn zero_string() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidueCase {
    pub j: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coefficient: String,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkingCase {
    /// Coordinates of a holomorphic disc `Φ(ζ)`; the curve is `Φ(S¹)`.
    pub disc: Vec<String>,
    pub polynomial: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeCase {
    /// Map of `zeta` restricted to the unit circle.
    pub map: String,
    #[serde(default = "zero_string")]
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Expectations {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<CExpectation>,
    /// Per function: extends holomorphically into every disc.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extends: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CExpectation {
    pub value: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exception: Option<CException>,
}

/// Points near `{z_coordinate = 0}` may take the value `c` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CException {
    pub c: usize,
    pub coordinate: usize,
    /// Distance allowance in units of the local lattice cell diameter.
    pub within_cells: f64,
}

/// Loads `builtin:<id>` or a JSON file and validates it.
pub fn load_scenario(source: &str) -> Result<Scenario, LoadError> {
    if let Some(id) = source.strip_prefix("builtin:") {
        let text = builtins::source(id).ok_or_else(|| {
            LoadError::new("id", format!("no built-in scenario '{id}' (available: {})", builtins::ids().join(", ")))
        })?;
        return parse_scenario(text);
    }
    let text = std::fs::read_to_string(Path::new(source)).map_err(|e| LoadError::new("(file)", format!("{source}: {e}")))?;
    parse_scenario(&text)
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(text: &str) -> Result<Scenario, LoadError> {
    let s: Scenario = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let field = field_from_serde(&msg).unwrap_or_else(|| "(json)".into());
        LoadError::new(field, msg)
    })?;
    s.validate()?;
    Ok(s)
}

/// Pulls the backquoted field name out of a serde message such as
/// ``missing field `kind` at line 1 column 2``.
fn field_from_serde(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let end = start + msg[start..].find('`')?;
    Some(msg[start..end].to_string())
}

/// Variables of `Φ(ζ, t)` for a manifold kind; the circle also accepts `t1`.
pub fn family_vars(m: &ManifoldSpec) -> &'static [&'static str] {
    match m {
        ManifoldSpec::Point => &["zeta"],
        ManifoldSpec::Circle => &["zeta", "t", "t1"],
        ManifoldSpec::Torus | ManifoldSpec::Sphere { .. } => &["zeta", "t1", "t2"],
    }
}

/// Ambient coordinate names `z` (n = 1) or `z1 … zn`.
pub fn ambient_vars(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["z".into(), "z1".into()]
    } else {
        (1..=n).map(|k| format!("z{k}")).collect()
    }
}

fn parse_all(field: &str, sources: &[String], vars: &[&str]) -> Result<Vec<Expr>, LoadError> {
    sources
        .iter()
        .enumerate()
        .map(|(k, s)| Expr::parse(s, vars).map_err(|e| LoadError::new(format!("{field}[{k}]"), e)))
        .collect()
}

fn parse_one(field: &str, source: &str, vars: &[&str]) -> Result<Expr, LoadError> {
    Expr::parse(source, vars).map_err(|e| LoadError::new(field, e))
}

fn complex_field(field: &str, source: &str) -> Result<C, LoadError> {
    parse_complex(source).map_err(|e| LoadError::new(field, e))
}

fn is_sample_count(n: usize) -> bool {
    n >= 16 && n.is_power_of_two()
}

impl Scenario {
    pub fn validate(&self) -> Result<(), LoadError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LoadError::new(
                "schema_version",
                format!("unsupported version {} (this build reads {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.id.trim().is_empty() {
            return Err(LoadError::new("id", "must not be empty"));
        }
        if !is_sample_count(self.grid.boundary) {
            return Err(LoadError::new("grid.boundary", format!("{} is not a power of two ≥ 16", self.grid.boundary)));
        }
        if self.grid.parameter < 4 {
            return Err(LoadError::new("grid.parameter", "needs at least 4 samples per circle factor"));
        }
        if let Some(r) = self.grid.interior_radii.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(LoadError::new("grid.interior_radii", format!("radius {r} outside [0, 1)")));
        }
        if self.grid.interior_angles == 0 {
            return Err(LoadError::new("grid.interior_angles", "must be positive"));
        }
        for (name, v) in self.tolerances.entries() {
            if !(v.is_finite() && v > 0.0) {
                return Err(LoadError::new(format!("tolerances.{name}"), format!("must be a positive number, got {v}")));
            }
        }
        match self.kind {
            Kind::FamilyVerdict => {
                let f = self.require_family()?;
                if f.mode == FamilyMode::Theorem && f.orbit.is_none() {
                    return Err(LoadError::new("family.orbit", "required for theorem-mode family verdicts"));
                }
            }
            Kind::StripProblem => {
                let f = self.require_family()?;
                if f.phi.len() != 1 || f.manifold != ManifoldSpec::Circle {
                    return Err(LoadError::new("family", "a strip needs one planar coordinate over a circle"));
                }
                if self.functions.len() != 1 {
                    return Err(LoadError::new("functions", "a strip problem takes exactly one function of z"));
                }
            }
            Kind::CrField => {
                self.require_patch()?;
            }
            Kind::ArgumentPrinciple => {
                if self.argument.is_none() {
                    return Err(LoadError::new("argument", "required for argument-principle scenarios"));
                }
            }
            Kind::MomentCheck => {
                self.require_family()?;
                if self.functions.is_empty() {
                    return Err(LoadError::new("functions", "a moment check needs at least one function"));
                }
            }
        }
        if let Some(f) = &self.family {
            self.validate_family(f)?;
        }
        if let Some(p) = &self.patch {
            self.patch_from(p)?;
        }
        let n = self.family.as_ref().map(|f| f.phi.len()).or_else(|| self.patch.as_ref().map(|p| p.embedding.len()));
        if let Some(n) = n {
            let names = ambient_vars(n);
            let vars: Vec<&str> = names.iter().map(String::as_str).collect();
            parse_all("functions", &self.functions, &vars)?;
        } else if !self.functions.is_empty() {
            return Err(LoadError::new("functions", "functions need a family or patch to fix the ambient dimension"));
        }
        if let Some(g) = &self.planar_grid {
            if g.count < 5 || !(g.hi > g.lo) {
                return Err(LoadError::new("planar_grid", "needs hi > lo and at least 5 points per side"));
            }
        }
        if let Some(a) = &self.argument {
            self.validate_argument(a)?;
        }
        if let Some(e) = &self.expect.c {
            if let Some(x) = &e.exception {
                if !(x.within_cells > 0.0) {
                    return Err(LoadError::new("expect.c.exception.within_cells", "must be positive"));
                }
            }
        }
        if !self.expect.extends.is_empty() && self.expect.extends.len() != self.functions.len() {
            return Err(LoadError::new("expect.extends", "needs one entry per function"));
        }
        Ok(())
    }

    fn require_family(&self) -> Result<&FamilySpec, LoadError> {
        self.family.as_ref().ok_or_else(|| LoadError::new("family", format!("required for {} scenarios", self.kind.name())))
    }

    fn require_patch(&self) -> Result<&PatchSpec, LoadError> {
        self.patch.as_ref().ok_or_else(|| LoadError::new("patch", format!("required for {} scenarios", self.kind.name())))
    }

    fn validate_family(&self, f: &FamilySpec) -> Result<(), LoadError> {
        if f.phi.is_empty() {
            return Err(LoadError::new("family.phi", "needs at least one coordinate"));
        }
        if let ManifoldSpec::Sphere { radius } = f.manifold {
            if !(radius > 0.0) {
                return Err(LoadError::new("family.manifold.radius", format!("must be positive, got {radius}")));
            }
        }
        let exprs = parse_all("family.phi", &f.phi, family_vars(&f.manifold))?;
        let k = self.manifold(f).map_err(|e| LoadError::new("family.manifold", e))?.k();
        if f.d != k && f.d != k + 1 {
            return Err(LoadError::new("family.d", format!("declared d = {} is not in {{k, k+1}} = {{{k}, {}}}", f.d, k + 1)));
        }
        if self.kind == Kind::FamilyVerdict && 2 * f.phi.len() < k + 2 {
            return Err(LoadError::new("family.phi", format!("ℂ^{} is too small for a {k}-parameter family", f.phi.len())));
        }
        if let Some(OrbitSpec::Planar { coordinate }) = f.orbit {
            if coordinate >= f.phi.len() {
                return Err(LoadError::new("family.orbit.coordinate", format!("no coordinate {coordinate} in ℂ^{}", f.phi.len())));
            }
        }
        // Every coordinate must be finite on the sampled closed disc × lattice.
        let m = self.manifold(f).map_err(|e| LoadError::new("family.manifold", e))?;
        let zetas = self.zeta_grid().points();
        for ti in (0..m.len()).step_by((m.len() / 16).max(1)) {
            let t = m.coords(ti);
            for &z in zetas.iter().step_by(7) {
                let vars = family_values(z, &t, &f.manifold);
                if let Some((j, _)) = exprs.iter().enumerate().find(|(_, e)| !e.eval(&vars).is_finite()) {
                    return Err(LoadError::new(format!("family.phi[{j}]"), format!("not finite at ζ = {z}, t = {t:?}")));
                }
            }
        }
        Ok(())
    }

    fn validate_argument(&self, a: &ArgumentSpec) -> Result<(), LoadError> {
        if let Some(r) = &a.random {
            if r.max_degree == 0 || r.polynomials == 0 || r.targets == 0 {
                return Err(LoadError::new("argument.random", "counts and degree must be positive"));
            }
        }
        for (k, c) in a.counts.iter().enumerate() {
            parse_one(&format!("argument.counts[{k}].phi"), &c.phi, &["zeta"])?;
            complex_field(&format!("argument.counts[{k}].target"), &c.target)?;
        }
        for (k, c) in a.residues.iter().enumerate() {
            parse_one(&format!("argument.residues[{k}].j"), &c.j, &["zeta"])?;
        }
        for (k, c) in a.linking.iter().enumerate() {
            parse_all(&format!("argument.linking[{k}].disc"), &c.disc, &["zeta"])?;
            for (j, t) in c.polynomial.iter().enumerate() {
                let field = format!("argument.linking[{k}].polynomial[{j}]");
                complex_field(&format!("{field}.coefficient"), &t.coefficient)?;
                if t.exponents.len() != c.disc.len() {
                    return Err(LoadError::new(format!("{field}.exponents"), format!("needs {} exponents", c.disc.len())));
                }
            }
        }
        for (k, c) in a.degrees.iter().enumerate() {
            parse_one(&format!("argument.degrees[{k}].map"), &c.map, &["zeta"])?;
            complex_field(&format!("argument.degrees[{k}].reference"), &c.reference)?;
        }
        Ok(())
    }

    pub fn zeta_grid(&self) -> ZetaGrid<f64> {
        ZetaGrid { radii: self.grid.interior_radii.clone(), angles: self.grid.interior_angles, boundary: self.grid.boundary }
    }

    /// Lattice for the parameter manifold. Circle factors get `grid.parameter`
    /// samples; the sphere gets `(M/32) × (M/16) × (M/16)` Hopf-type samples.
    pub fn manifold(&self, f: &FamilySpec) -> Result<ParamManifold<f64>, CoreError> {
        let m = self.grid.parameter;
        match f.manifold {
            ManifoldSpec::Point => Ok(ParamManifold::point()),
            ManifoldSpec::Circle => ParamManifold::circle(m),
            ManifoldSpec::Torus => ParamManifold::torus(m, m),
            ManifoldSpec::Sphere { radius } => ParamManifold::sphere(radius, (m / 32).max(1), (m / 16).max(4), (m / 16).max(4)),
        }
    }

    /// The compiled `Φ(ζ, t)`.
    pub fn family_fn(&self, f: &FamilySpec) -> Result<FamilyFn<f64>, LoadError> {
        let exprs = parse_all("family.phi", &f.phi, family_vars(&f.manifold))?;
        let kind = f.manifold;
        Ok(Arc::new(move |z: C, t: &[C]| {
            let vars = family_values(z, t, &kind);
            exprs
                .iter()
                .map(|e| {
                    let v = e.eval(&vars);
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(CoreError::Evaluation(format!("{} is not finite at ζ = {z}", e.source())))
                    }
                })
                .collect()
        }))
    }

    pub fn patch_from(&self, p: &PatchSpec) -> Result<ManifoldPatch<f64>, LoadError> {
        if p.axes.is_empty() {
            return Err(LoadError::new("patch.axes", "needs at least one axis"));
        }
        for (k, a) in p.axes.iter().enumerate() {
            if a.count < 5 || !(a.end > a.start) {
                return Err(LoadError::new(format!("patch.axes[{k}]"), "needs end > start and at least 5 points"));
            }
            if p.axes[..k].iter().any(|b| b.name == a.name) || a.name.is_empty() {
                return Err(LoadError::new(format!("patch.axes[{k}].name"), format!("duplicate or empty name '{}'", a.name)));
            }
        }
        let names: Vec<&str> = p.axes.iter().map(|a| a.name.as_str()).collect();
        let exprs = parse_all("patch.embedding", &p.embedding, &names)?;
        if exprs.is_empty() {
            return Err(LoadError::new("patch.embedding", "needs at least one coordinate"));
        }
        let graph = match &p.graph {
            Some(g) => {
                let amb = ambient_vars(exprs.len());
                let vars: Vec<&str> = amb.iter().map(String::as_str).collect();
                Some(parse_one("patch.graph", g, &vars)?)
            }
            None => None,
        };
        let n = exprs.len() + usize::from(graph.is_some());
        let embedding: Embedding<f64> = Arc::new(move |u: &[f64]| {
            let vars: Vec<C> = u.iter().map(|&x| C::new(x, 0.0)).collect();
            let mut z: Vec<C> = exprs.iter().map(|e| e.eval(&vars)).collect();
            if let Some(g) = &graph {
                let mut w = z.clone();
                if w.len() == 1 {
                    w.push(w[0]);
                }
                z.push(g.eval(&w));
            }
            if z.iter().all(|v| v.is_finite()) {
                Ok(z)
            } else {
                Err(CoreError::Evaluation(format!("embedding not finite at {u:?}")))
            }
        });
        let axes: Vec<Axis<f64>> = p
            .axes
            .iter()
            .map(|a| if a.periodic { Axis::periodic(a.start, a.end, a.count) } else { Axis::closed(a.start, a.end, a.count) })
            .collect();
        let patch = ManifoldPatch::new(n, axes, embedding).map_err(|e| LoadError::new("patch", e))?;
        for idx in 0..patch.len() {
            if let Err(e) = patch.point(idx) {
                return Err(LoadError::new("patch.embedding", format!("{e} (lattice point {idx})")));
            }
        }
        Ok(patch)
    }

    /// Compiled scalar functions of the ambient coordinates.
    pub fn functions_for(&self, n: usize) -> Result<Vec<Expr>, LoadError> {
        let names = ambient_vars(n);
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        parse_all("functions", &self.functions, &vars)
    }

    /// The orbit mode of the family, if declared.
    pub fn orbit_mode(&self) -> Option<OrbitMode> {
        self.family.as_ref()?.orbit.map(|o| match o {
            OrbitSpec::Planar { coordinate } => OrbitMode::Planar { coordinate },
            OrbitSpec::Declared { nontrivial } => OrbitMode::Declared(nontrivial),
        })
    }

    /// The same scenario with every grid size doubled; closed axes keep their end points.
    pub fn refined(&self) -> Self {
        let mut s = self.clone();
        s.grid.boundary *= 2;
        s.grid.parameter *= 2;
        s.grid.interior_angles *= 2;
        if let Some(p) = &mut s.patch {
            for a in &mut p.axes {
                a.count = if a.periodic { 2 * a.count } else { 2 * a.count - 1 };
            }
        }
        if let Some(g) = &mut s.planar_grid {
            g.count = 2 * g.count - 1;
        }
        s
    }
}

/// Variable values `[ζ, t…]` in the order of [`family_vars`].
pub fn family_values(z: C, t: &[C], kind: &ManifoldSpec) -> Vec<C> {
    let mut v = Vec::with_capacity(3);
    v.push(z);
    match kind {
        ManifoldSpec::Point => {}
        ManifoldSpec::Circle => {
            v.push(t[0]);
            v.push(t[0]);
        }
        ManifoldSpec::Torus | ManifoldSpec::Sphere { .. } => v.extend_from_slice(&t[..2]),
    }
    v
}

/// `true` when the manifold kind carries a sphere lattice.
pub fn is_sphere(m: &ParamManifold<f64>) -> bool {
    matches!(m.kind(), ManifoldKind::Sphere { .. })
}
