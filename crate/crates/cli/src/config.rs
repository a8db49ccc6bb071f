//! Scenario configuration: schema, loading and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use oplab_core::builders;
use oplab_core::lower_bounds::PipelineMode;
use oplab_core::{Cone, ConeSpec, NormSpec, Semigroup, SemigroupKind};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const DEFAULT_WINDOW: [f64; 2] = [10.0, 200.0];
pub const DEFAULT_TOL: f64 = 1e-6;

/// A runnable scenario: one cone, one norm, named semigroups and the checks to run on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub cone: ConeSpec<f64>,
    /// Defaults to the natural norm of the cone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec<f64>>,
    pub semigroups: BTreeMap<String, SemigroupSource>,
    pub checks: Vec<CheckSpec>,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    /// Tolerance for checks that do not set their own.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Required whenever a check samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_window() -> [f64; 2] {
    DEFAULT_WINDOW
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

/// A semigroup given either as a matrix literal or as a named builder with parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SemigroupKind>,
    /// Row-major; the generator for continuous semigroups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl SemigroupSource {
    pub fn literal(kind: SemigroupKind, m: &DMatrix<f64>) -> Self {
        Self {
            kind: Some(kind),
            matrix: Some(m.row_iter().map(|r| r.iter().copied().collect()).collect()),
            ..Self::default()
        }
    }

    pub fn builder(name: &str, params: &[(&str, f64)]) -> Self {
        Self {
            builder: Some(name.into()),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Positivity,
    MeanErgodic,
    StrongLimit,
    Domination,
    Equivalence,
    MixedSignDifference,
    UniversalLowerBound,
    MeanLowerBoundOnly,
    Pipeline,
    DominatingConvergence,
    MarkovRenorm,
    AdditiveNorm,
    NonLattice,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::Positivity => "positivity",
            CheckKind::MeanErgodic => "mean-ergodic",
            CheckKind::StrongLimit => "strong-limit",
            CheckKind::Domination => "domination",
            CheckKind::Equivalence => "equivalence",
            CheckKind::MixedSignDifference => "mixed-sign-difference",
            CheckKind::UniversalLowerBound => "universal-lower-bound",
            CheckKind::MeanLowerBoundOnly => "mean-lower-bound-only",
            CheckKind::Pipeline => "pipeline",
            CheckKind::DominatingConvergence => "dominating-convergence",
            CheckKind::MarkovRenorm => "markov-renorm",
            CheckKind::AdditiveNorm => "additive-norm",
            CheckKind::NonLattice => "non-lattice",
        }
    }

    fn needs_target(self) -> bool {
        !matches!(self, CheckKind::AdditiveNorm | CheckKind::NonLattice)
    }

    fn needs_against(self) -> bool {
        matches!(
            self,
            CheckKind::Domination
                | CheckKind::Equivalence
                | CheckKind::MixedSignDifference
                | CheckKind::DominatingConvergence
        )
    }

    pub fn samples(self) -> bool {
        matches!(self, CheckKind::AdditiveNorm | CheckKind::MarkovRenorm)
    }

    fn params(self) -> &'static [&'static str] {
        match self {
            CheckKind::MeanErgodic => &["horizon"],
            CheckKind::StrongLimit => &["horizon", "expect_rank"],
            CheckKind::MixedSignDifference => &["t"],
            CheckKind::UniversalLowerBound => &["min_beta"],
            CheckKind::Pipeline => &["expect_rank", "min_beta"],
            CheckKind::AdditiveNorm => &["samples"],
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    #[default]
    Holds,
    Fails,
}

impl Expectation {
    fn is_holds(&self) -> bool {
        *self == Expectation::Holds
    }
}

/// One named check. `target` and `against` name entries of `semigroups`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub check: CheckKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub against: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Expectation::is_holds")]
    pub expect: Expectation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<PipelineMode>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// Points `[a, b, u₁, u₂]` for the non-lattice check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

impl CheckSpec {
    pub fn new(check: CheckKind) -> Self {
        Self {
            check,
            name: None,
            target: None,
            against: None,
            tol: None,
            expect: Expectation::Holds,
            mode: None,
            params: BTreeMap::new(),
            points: None,
        }
    }

    pub fn on(mut self, target: &str) -> Self {
        self.target = Some(target.into());
        self
    }

    pub fn against(mut self, other: &str) -> Self {
        self.against = Some(other.into());
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn mode(mut self, mode: PipelineMode) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn expect_failure(mut self) -> Self {
        self.expect = Expectation::Fails;
        self
    }

    /// Display name: explicit, or the kind followed by its operands.
    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        let mut s = self.check.as_str().to_string();
        for part in [&self.target, &self.against].into_iter().flatten() {
            s.push(':');
            s.push_str(part);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Schema,
    DimensionMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            ViolationKind::Schema => "schema",
            ViolationKind::DimensionMismatch => "dimension mismatch",
        };
        write!(f, "{}: {tag}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config ({} violation(s)):\n  {}", .0.len(), .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n  "))]
    Invalid(Vec<Violation>),
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }
}

#[derive(Default)]
struct Collector(Vec<Violation>);

impl Collector {
    fn schema(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            kind: ViolationKind::Schema,
            field: field.into(),
            message: message.into(),
        });
    }

    fn dims(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            kind: ViolationKind::DimensionMismatch,
            field: field.into(),
            message: message.into(),
        });
    }

    fn take<T: serde::de::DeserializeOwned>(&mut self, obj: &Map<String, Value>, key: &str, field: &str) -> Option<T> {
        let v = obj.get(key)?;
        match serde_json::from_value(v.clone()) {
            Ok(x) => Some(x),
            Err(e) => {
                self.schema(field, e.to_string());
                None
            }
        }
    }
}

/// Reads a config file; a saved run report is accepted and yields its embedded config.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    if text.trim().is_empty() {
        return Err(ConfigError::Parse("empty input".into()));
    }
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let value = match value {
        Value::Object(mut o) if o.contains_key("input_digest") && o.contains_key("config") => {
            o.remove("config").expect("checked")
        }
        v => v,
    };
    config_from_value(&value)
}

const TOP_KEYS: [&str; 9] = ["name", "description", "cone", "norm", "semigroups", "checks", "window", "tol", "seed"];

/// Field-wise decoding so that every violation is reported, not just the first.
pub fn config_from_value(value: &Value) -> Result<ScenarioConfig, ConfigError> {
    let obj = value
        .as_object()
        .ok_or_else(|| ConfigError::Parse("top level must be a JSON object".into()))?;
    let mut c = Collector::default();
    for key in obj.keys() {
        if !TOP_KEYS.contains(&key.as_str()) {
            c.schema(key.clone(), "unknown field");
        }
    }
    for key in ["name", "cone", "semigroups", "checks"] {
        if !obj.contains_key(key) {
            c.schema(key, "missing required field");
        }
    }
    let name: Option<String> = c.take(obj, "name", "name");
    let description: Option<String> = c.take(obj, "description", "description");
    let cone: Option<ConeSpec<f64>> = c.take(obj, "cone", "cone");
    let norm: Option<NormSpec<f64>> = c.take(obj, "norm", "norm");
    let window: Option<[f64; 2]> = c.take(obj, "window", "window");
    let tol: Option<f64> = c.take(obj, "tol", "tol");
    let seed: Option<u64> = c.take(obj, "seed", "seed");

    let mut semigroups = BTreeMap::new();
    match obj.get("semigroups") {
        Some(Value::Object(m)) => {
            for (k, v) in m {
                match serde_json::from_value::<SemigroupSource>(v.clone()) {
                    Ok(s) => {
                        semigroups.insert(k.clone(), s);
                    }
                    Err(e) => c.schema(format!("semigroups.{k}"), e.to_string()),
                }
            }
        }
        Some(_) => c.schema("semigroups", "must be an object mapping names to semigroups"),
        None => {}
    }
    let mut checks = Vec::new();
    match obj.get("checks") {
        Some(Value::Array(a)) => {
            for (i, v) in a.iter().enumerate() {
                match serde_json::from_value::<CheckSpec>(v.clone()) {
                    Ok(s) => checks.push(s),
                    Err(e) => c.schema(format!("checks[{i}]"), e.to_string()),
                }
            }
        }
        Some(_) => c.schema("checks", "must be an array"),
        None => {}
    }

    let cfg = ScenarioConfig {
        name: name.unwrap_or_default(),
        description: description.unwrap_or_default(),
        cone: cone.unwrap_or(ConeSpec::Orthant { dim: 0 }),
        norm,
        semigroups,
        checks,
        window: window.unwrap_or(DEFAULT_WINDOW),
        tol: tol.unwrap_or(DEFAULT_TOL),
        seed,
    };
    let structural_ok = c.0.is_empty();
    if structural_ok {
        validate_into(&cfg, &mut c);
    } else {
        // Semantic checks that do not depend on the broken fields still run.
        let cone_known = obj.contains_key("cone") && !c.0.iter().any(|v| v.field == "cone");
        validate_semantics(&cfg, &mut c, cone_known);
    }
    if c.0.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(c.0))
    }
}

/// All violations of an already-decoded config.
pub fn validate(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    let mut c = Collector::default();
    validate_into(cfg, &mut c);
    if c.0.is_empty() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(c.0))
    }
}

fn validate_into(cfg: &ScenarioConfig, c: &mut Collector) {
    validate_semantics(cfg, c, true);
}

fn validate_semantics(cfg: &ScenarioConfig, c: &mut Collector, cone_known: bool) {
    if cfg.name.trim().is_empty() {
        c.schema("name", "must be non-empty");
    }
    let [t0, t1] = cfg.window;
    if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0 && t1 > t0) {
        c.schema("window", format!("need 0 ≤ t0 < t1, got [{t0}, {t1}]"));
    }
    if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
        c.schema("tol", format!("must be positive, got {}", cfg.tol));
    }
    if cfg.semigroups.is_empty() && cfg.checks.iter().any(|k| k.check.needs_target()) {
        c.schema("semigroups", "checks reference semigroups but none are defined");
    }
    if cfg.checks.is_empty() {
        c.schema("checks", "at least one check is required");
    }

    let cone = if cone_known {
        match Cone::try_from(cfg.cone.clone()) {
            Ok(k) => Some(k),
            Err(e) => {
                c.schema("cone", e.to_string());
                None
            }
        }
    } else {
        None
    };
    if let (Some(cone), Some(norm)) = (&cone, &cfg.norm) {
        if let Err(e) = norm.check_dim(cone.dim()) {
            match e {
                oplab_core::LabError::DimensionMismatch { expected, found, .. } => {
                    c.dims("norm", format!("norm data has dimension {found}, cone has dimension {expected}"))
                }
                e => c.schema("norm", e.to_string()),
            }
        }
    }

    for (name, src) in &cfg.semigroups {
        validate_source(name, src, cone.as_ref(), c);
    }

    let mut labels = BTreeMap::new();
    for (i, chk) in cfg.checks.iter().enumerate() {
        let field = format!("checks[{i}]");
        if let Some(prev) = labels.insert(chk.label(), i) {
            c.schema(&field, format!("duplicate check name {:?} (also checks[{prev}])", chk.label()));
        }
        for (key, needed, value) in [
            ("target", chk.check.needs_target(), &chk.target),
            ("against", chk.check.needs_against(), &chk.against),
        ] {
            match value {
                None if needed => c.schema(format!("{field}.{key}"), format!("{} needs `{key}`", chk.check.as_str())),
                Some(_) if !needed => c.schema(format!("{field}.{key}"), format!("{} takes no `{key}`", chk.check.as_str())),
                Some(n) if !cfg.semigroups.contains_key(n) => {
                    c.schema(format!("{field}.{key}"), format!("no semigroup named {n:?}"))
                }
                _ => {}
            }
        }
        if let Some(t) = chk.tol {
            if !(t.is_finite() && t > 0.0) {
                c.schema(format!("{field}.tol"), format!("must be positive, got {t}"));
            }
        }
        for key in chk.params.keys() {
            if !chk.check.params().contains(&key.as_str()) {
                let allowed = chk.check.params();
                let hint = if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") };
                c.schema(format!("{field}.params.{key}"), format!("unknown parameter; allowed: {hint}"));
            }
        }
        for (key, v) in &chk.params {
            if !v.is_finite() {
                c.schema(format!("{field}.params.{key}"), "must be finite");
            }
        }
        if chk.mode.is_some() && chk.check != CheckKind::Pipeline {
            c.schema(format!("{field}.mode"), "only pipeline checks take a mode");
        }
        if let Some(points) = &chk.points {
            if chk.check != CheckKind::NonLattice {
                c.schema(format!("{field}.points"), "only non-lattice checks take points");
            } else if points.len() != 4 {
                c.schema(format!("{field}.points"), format!("need 4 points [a, b, u1, u2], got {}", points.len()));
            } else if let Some(cone) = &cone {
                for (j, p) in points.iter().enumerate() {
                    if p.len() != cone.dim() {
                        c.dims(
                            format!("{field}.points[{j}]"),
                            format!("point has dimension {}, cone has dimension {}", p.len(), cone.dim()),
                        );
                    }
                }
            }
        } else if chk.check == CheckKind::NonLattice {
            if let Some(cone) = &cone {
                if cone.dim() != 3 {
                    c.schema(format!("{field}.points"), "default points live in ℝ³; give explicit points");
                }
            }
        }
        if chk.check.samples() && cfg.seed.is_none() {
            c.schema("seed", format!("{field} ({}) samples and needs a seed", chk.check.as_str()));
        }
    }
}

fn validate_source(name: &str, src: &SemigroupSource, cone: Option<&Cone<f64>>, c: &mut Collector) {
    let field = format!("semigroups.{name}");
    match (&src.matrix, &src.builder) {
        (Some(_), Some(_)) => c.schema(&field, "give either `matrix` or `builder`, not both"),
        (None, None) => c.schema(&field, "needs `matrix` or `builder`"),
        (Some(rows), None) => {
            if src.kind.is_none() {
                c.schema(format!("{field}.kind"), "matrix literals need `kind` (discrete or continuous)");
            }
            if !src.params.is_empty() {
                c.schema(format!("{field}.params"), "parameters apply only to builders");
            }
            let n = rows.len();
            if n == 0 {
                c.schema(format!("{field}.matrix"), "matrix is empty");
            }
            for (i, r) in rows.iter().enumerate() {
                if r.len() != n {
                    c.dims(format!("{field}.matrix[{i}]"), format!("row has {} entries, matrix has {n} rows", r.len()));
                }
                if r.iter().any(|x| !x.is_finite()) {
                    c.schema(format!("{field}.matrix[{i}]"), "non-finite entry");
                }
            }
            if let Some(cone) = cone {
                if n != cone.dim() {
                    c.dims(
                        format!("{field}.matrix"),
                        format!("{n}×{n} matrix on a cone of dimension {}", cone.dim()),
                    );
                }
            }
        }
        (None, Some(b)) => {
            if src.kind.is_some() {
                c.schema(format!("{field}.kind"), "builders fix their own kind");
            }
            match Builder::parse(b) {
                None => c.schema(
                    format!("{field}.builder"),
                    format!("unknown builder {b:?}; known: {}", Builder::ALL.map(|b| b.name()).join(", ")),
                ),
                Some(builder) => {
                    for key in src.params.keys() {
                        if !builder.params().iter().any(|(k, _)| k == key) {
                            c.schema(format!("{field}.params.{key}"), format!("{} takes no parameter {key:?}", builder.name()));
                        }
                    }
                    if let Some(cone) = cone {
                        match builder.build(&src.params, cone) {
                            Ok(sg) => {
                                if sg.cone().spec() != cone.spec() {
                                    if sg.dim() != cone.dim() {
                                        c.dims(
                                            &field,
                                            format!("{} acts on dimension {}, cone has dimension {}", b, sg.dim(), cone.dim()),
                                        );
                                    } else {
                                        c.schema(&field, format!("{} needs a {} cone, config has {}", b, sg.cone().kind(), cone.kind()));
                                    }
                                }
                            }
                            Err(e) => c.schema(&field, e.to_string()),
                        }
                    }
                }
            }
        }
    }
}

/// Named semigroup builders available in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builder {
    DoublyStochastic,
    Swap,
    JordanBlock,
    DoeblinChain,
    DoeblinDominating,
    DepolarizingChannel,
    ScaledBounds,
    MixedCyclic,
    CentredContraction,
    SlicedRelaxation,
}

impl Builder {
    pub const ALL: [Builder; 10] = [
        Builder::DoublyStochastic,
        Builder::Swap,
        Builder::JordanBlock,
        Builder::DoeblinChain,
        Builder::DoeblinDominating,
        Builder::DepolarizingChannel,
        Builder::ScaledBounds,
        Builder::MixedCyclic,
        Builder::CentredContraction,
        Builder::SlicedRelaxation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builder::DoublyStochastic => "doubly-stochastic",
            Builder::Swap => "swap",
            Builder::JordanBlock => "jordan-block",
            Builder::DoeblinChain => "doeblin-chain",
            Builder::DoeblinDominating => "doeblin-dominating",
            Builder::DepolarizingChannel => "depolarizing-channel",
            Builder::ScaledBounds => "scaled-bounds",
            Builder::MixedCyclic => "mixed-cyclic",
            Builder::CentredContraction => "centred-contraction",
            Builder::SlicedRelaxation => "sliced-relaxation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }

    /// Parameter names with defaults.
    pub fn params(self) -> &'static [(&'static str, f64)] {
        match self {
            Builder::DoublyStochastic => &[("alpha", 1.0)],
            Builder::DoeblinChain => &[("delta", 0.1)],
            Builder::DoeblinDominating => &[("delta", 0.1), ("eps", 0.3)],
            Builder::DepolarizingChannel => &[("p", 0.3), ("n", 2.0)],
            Builder::MixedCyclic => &[("p", 0.2)],
            Builder::CentredContraction => &[("c", 0.5)],
            Builder::SlicedRelaxation => &[("rate", 1.0)],
            Builder::Swap | Builder::JordanBlock | Builder::ScaledBounds => &[],
        }
    }

    /// Builds the semigroup; `cone` supplies `u, u′` for the centred contraction.
    pub fn build(self, params: &BTreeMap<String, f64>, cone: &Cone<f64>) -> oplab_core::Result<Semigroup<f64>> {
        let p = |k: &str| {
            params
                .get(k)
                .copied()
                .or_else(|| self.params().iter().find(|(n, _)| *n == k).map(|(_, v)| *v))
                .expect("declared parameter")
        };
        match self {
            Builder::DoublyStochastic => builders::doubly_stochastic(p("alpha")),
            Builder::Swap => builders::swap(),
            Builder::JordanBlock => builders::jordan_block(),
            Builder::DoeblinChain => builders::doeblin_chain(p("delta")),
            Builder::DoeblinDominating => builders::dominating_pair(p("delta"), p("eps")).map(|(_, s)| s),
            Builder::DepolarizingChannel => {
                let n = p("n");
                if !(n >= 1.0 && n.fract() == 0.0) {
                    return Err(oplab_core::LabError::Precondition(format!("n must be a positive integer, got {n}")));
                }
                builders::depolarizing_channel(p("p"), n as usize)
            }
            Builder::ScaledBounds => builders::scaled_bounds(),
            Builder::MixedCyclic => builders::mixed_cyclic(p("p")),
            Builder::CentredContraction => match cone {
                Cone::Centred(cc) => {
                    let u: Vec<f64> = cc.u().iter().copied().collect();
                    let up: Vec<f64> = cc.u_prime().iter().copied().collect();
                    builders::centred_contraction(&u, &up, p("c"))
                }
                _ => Err(oplab_core::LabError::Precondition("centred-contraction needs a centred cone".into())),
            },
            Builder::SlicedRelaxation => builders::sliced_relaxation(p("rate")),
        }
    }
}

/// Cone, norm and semigroups of a validated config.
pub struct Resolved {
    pub cone: Cone<f64>,
    pub norm: NormSpec<f64>,
    pub semigroups: BTreeMap<String, Semigroup<f64>>,
}

pub fn resolve(cfg: &ScenarioConfig) -> Result<Resolved, ConfigError> {
    validate(cfg)?;
    let invalid = |field: String, e: oplab_core::LabError| {
        ConfigError::Invalid(vec![Violation {
            kind: ViolationKind::Schema,
            field,
            message: e.to_string(),
        }])
    };
    let cone = Cone::try_from(cfg.cone.clone()).map_err(|e| invalid("cone".into(), e))?;
    let norm = cfg.norm.clone().unwrap_or_else(|| NormSpec::default_for(&cone));
    let mut semigroups = BTreeMap::new();
    for (name, src) in &cfg.semigroups {
        let field = format!("semigroups.{name}");
        let sg = match (&src.matrix, &src.builder) {
            (Some(rows), _) => {
                let m = oplab_core::linalg::matrix_from_rows(rows, "semigroup matrix").map_err(|e| invalid(field.clone(), e))?;
                Semigroup::new(src.kind.expect("validated"), m, cone.clone()).map_err(|e| invalid(field.clone(), e))?
            }
            (None, Some(b)) => Builder::parse(b)
                .expect("validated")
                .build(&src.params, &cone)
                .map_err(|e| invalid(field.clone(), e))?,
            (None, None) => unreachable!("validated"),
        };
        let sg = sg
            .with_norm(norm.clone())
            .map_err(|e| invalid(field.clone(), e))?
            .with_label(name.clone());
        semigroups.insert(name.clone(), sg);
    }
    Ok(Resolved { cone, norm, semigroups })
}
