//! Model configuration files.
//!
//! A config is a TOML document with `format_version = 1` and the blocks
//! `[space]`, `[assets]`, `[risk]`, `[duals]` and `[checks]`. The grammar is
//! documented in `fixtures/README.md`.

use num_rational::BigRational;
use risktree::consistency::{augmented_measure, AugmentedFamily};
use risktree::families::restricted_family;
use risktree::polyhedra::Halfspace;
use risktree::scalar::{parse_rational, Scalar};
use risktree::{
    AugmentedProcessRiskMeasure, Eligible, ProcessAcceptanceSet, ProcessFamily, RestrictedFamily, RestrictedSchedule,
    ScenarioSpace,
};
use serde::Deserialize;
use std::fmt;
use std::ops::Range;
use std::path::Path;
use toml::Spanned;

pub const FORMAT_VERSION: u32 = 1;

/// One problem found while loading a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{}", join_errors(.0))]
    Schema(Vec<SchemaError>),
}

fn join_errors(errors: &[SchemaError]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

impl ConfigError {
    pub fn errors(&self) -> &[SchemaError] {
        match self {
            ConfigError::Schema(e) => e,
            ConfigError::Io { .. } => &[],
        }
    }
}

/// Arithmetic used by the exact measure algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Float,
    Rational,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Float => "float",
            Mode::Rational => "rational",
        }
    }
}

/// A number written either as a float or as a string such as `"1/3"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    fn exact(&self) -> Option<BigRational> {
        match self {
            Number::Float(x) if x.is_finite() => Some(<BigRational as Scalar>::from_float(*x)),
            Number::Float(_) => None,
            Number::Text(s) => parse_rational(s),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    format_version: Spanned<u32>,
    name: String,
    space: Spanned<RawSpace>,
    assets: Spanned<RawAssets>,
    risk: Spanned<RawRisk>,
    #[serde(default)]
    duals: Duals,
    #[serde(default)]
    checks: Checks,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    states: Spanned<Vec<String>>,
    partitions: Spanned<Vec<Vec<Vec<String>>>>,
    prob: Spanned<Vec<Number>>,
    mu: Option<Spanned<Vec<Vec<Number>>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAssets {
    d: usize,
    m: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRisk {
    family: Option<ProcessFamily>,
    restricted: Option<RestrictedSchedule>,
    sets: Option<Spanned<Vec<RawSet>>>,
}

/// Rows `normal · x ≥ offset` over the coordinates of `A_t`, ordered by time,
/// then atom, then asset.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSet {
    time: usize,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Duals {
    pub count: usize,
    pub seed: u64,
}

impl Default for Duals {
    fn default() -> Self {
        Self { count: 20, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    pub suite: String,
    pub tolerance: f64,
    pub mode: Mode,
    pub samples: usize,
    pub fixtures_per_pair: usize,
}

impl Default for Checks {
    fn default() -> Self {
        Self { suite: "all".into(), tolerance: 1e-7, mode: Mode::Float, samples: 20, fixtures_per_pair: 6 }
    }
}

/// How the process acceptance sets were specified.
#[derive(Debug, Clone, PartialEq)]
pub enum RiskSource {
    Family(ProcessFamily),
    Custom,
}

/// A validated model.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub name: String,
    pub space: ScenarioSpace,
    /// `P` and `μ` as exact rationals, in the engine's atom order.
    pub exact_prob: Vec<BigRational>,
    pub exact_mu: Vec<Vec<BigRational>>,
    pub eligible: Eligible,
    pub source: RiskSource,
    pub schedule: RestrictedSchedule,
    pub family: AugmentedFamily,
    pub duals: Duals,
    pub checks: Checks,
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_model(&text)
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

pub fn parse_model(text: &str) -> Result<ModelConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s));
        ConfigError::Schema(vec![SchemaError { line, message: e.message().to_string() }])
    })?;
    let at = |span: Range<usize>| Some(line_of(text, span));
    let mut errors = Vec::new();

    if *raw.format_version.get_ref() != FORMAT_VERSION {
        errors.push(SchemaError {
            line: at(raw.format_version.span()),
            message: format!("unsupported format_version {}, expected {FORMAT_VERSION}", raw.format_version.get_ref()),
        });
    }

    let sp = raw.space.get_ref();
    let names = sp.states.get_ref();
    let mut partitions = Vec::new();
    for (t, part) in sp.partitions.get_ref().iter().enumerate() {
        let mut atoms = Vec::new();
        for (a, atom) in part.iter().enumerate() {
            let mut states = Vec::new();
            for name in atom {
                match names.iter().position(|n| n == name) {
                    Some(w) => states.push(w),
                    None => errors.push(SchemaError {
                        line: at(sp.partitions.span()),
                        message: format!("partition {t}, atom {a}: unknown state \"{name}\""),
                    }),
                }
            }
            atoms.push(states);
        }
        partitions.push(atoms);
    }

    let prob_exact: Vec<Option<BigRational>> = sp.prob.get_ref().iter().map(Number::exact).collect();
    if let Some(k) = prob_exact.iter().position(Option::is_none) {
        errors.push(SchemaError { line: at(sp.prob.span()), message: format!("prob[{k}] is not a number") });
    }
    let mu_exact: Option<Vec<Vec<Option<BigRational>>>> =
        sp.mu.as_ref().map(|mu| mu.get_ref().iter().map(|row| row.iter().map(Number::exact).collect()).collect());
    if let (Some(mu), Some(rows)) = (&sp.mu, &mu_exact) {
        if rows.iter().flatten().any(Option::is_none) {
            errors.push(SchemaError { line: at(mu.span()), message: "mu has an entry that is not a number".into() });
        }
    }

    let a = raw.assets.get_ref();
    let eligible = match Eligible::new(a.d, a.m.unwrap_or(a.d)) {
        Ok(e) => Some(e),
        Err(e) => {
            errors.push(SchemaError { line: at(raw.assets.span()), message: e.to_string() });
            None
        }
    };
    if !errors.is_empty() {
        return Err(ConfigError::Schema(errors));
    }

    let float = |x: &Option<BigRational>| x.as_ref().map(Scalar::to_float).unwrap_or(f64::NAN);
    let prob: Vec<f64> = prob_exact.iter().map(float).collect();
    let mu: Option<Vec<Vec<f64>>> = mu_exact.as_ref().map(|rows| rows.iter().map(|r| r.iter().map(float).collect()).collect());
    let space = ScenarioSpace::new(names.clone(), partitions, prob, mu).map_err(|e| {
        let msg = e.to_string();
        let line = if msg.contains("probabilit") {
            at(sp.prob.span())
        } else if msg.contains("mu ") {
            sp.mu.as_ref().map(|m| line_of(text, m.span())).or_else(|| at(raw.space.span()))
        } else if msg.contains("partition") || msg.contains("atom") || msg.contains("F_0") {
            at(sp.partitions.span())
        } else {
            at(raw.space.span())
        };
        ConfigError::Schema(vec![SchemaError { line, message: msg }])
    })?;
    let eligible = eligible.expect("checked above");

    let exact_prob: Vec<BigRational> = prob_exact.into_iter().map(|x| x.expect("checked above")).collect();
    let exact_mu = exact_mu_in_engine_order(&space, names, sp, mu_exact);

    let risk = raw.risk.get_ref();
    let schedule = risk.restricted.clone().unwrap_or(RestrictedSchedule::Fixed { family: RestrictedFamily::Orthant });
    let schema = |line: Option<usize>, e: risktree::Error| ConfigError::Schema(vec![SchemaError { line, message: e.to_string() }]);
    let (source, family) = match (&risk.family, &risk.sets) {
        (Some(f), None) => {
            let fam = augmented_measure(&space, f, &schedule, eligible).map_err(|e| schema(at(raw.risk.span()), e))?;
            (RiskSource::Family(f.clone()), fam)
        }
        (None, Some(sets)) => {
            let fam = custom_family(&space, &raw.name, sets.get_ref(), &schedule, eligible)
                .map_err(|e| schema(at(sets.span()), e))?;
            (RiskSource::Custom, fam)
        }
        _ => {
            return Err(ConfigError::Schema(vec![SchemaError {
                line: at(raw.risk.span()),
                message: "[risk] needs exactly one of `family` and `sets`".into(),
            }]))
        }
    };

    if raw.checks.tolerance.is_nan() || raw.checks.tolerance <= 0.0 {
        return Err(ConfigError::Schema(vec![SchemaError { line: None, message: "checks.tolerance must be positive".into() }]));
    }

    Ok(ModelConfig {
        name: raw.name,
        space,
        exact_prob,
        exact_mu,
        eligible,
        source,
        schedule,
        family,
        duals: raw.duals,
        checks: raw.checks,
    })
}

/// The engine sorts the final partition by state, so `μ_T` is permuted to
/// match; `None` means uniform over `T + 1` times.
fn exact_mu_in_engine_order(
    space: &ScenarioSpace,
    names: &[String],
    sp: &RawSpace,
    mu: Option<Vec<Vec<Option<BigRational>>>>,
) -> Vec<Vec<BigRational>> {
    let big_t = space.horizon();
    match mu {
        None => {
            let v = BigRational::new(1.into(), ((big_t + 1) as i64).into());
            space.times().map(|t| vec![v.clone(); space.num_atoms(t)]).collect()
        }
        Some(rows) => {
            let mut rows: Vec<Vec<BigRational>> =
                rows.into_iter().map(|r| r.into_iter().map(|x| x.expect("checked above")).collect()).collect();
            let listed = &sp.partitions.get_ref()[big_t];
            let mut last = vec![BigRational::new(0.into(), 1.into()); names.len()];
            for (k, atom) in listed.iter().enumerate() {
                let w = names.iter().position(|n| *n == atom[0]).expect("validated state");
                last[w] = rows[big_t][k].clone();
            }
            rows[big_t] = last;
            rows
        }
    }
}

fn custom_family(
    space: &ScenarioSpace,
    name: &str,
    sets: &[RawSet],
    schedule: &RestrictedSchedule,
    eligible: Eligible,
) -> risktree::Result<AugmentedFamily> {
    let mut out = Vec::new();
    for t in space.times() {
        let mut matching = sets.iter().filter(|s| s.time == t);
        let (Some(set), None) = (matching.next(), matching.next()) else {
            return Err(risktree::Error::InvalidArgument(format!("risk.sets needs exactly one entry for time {t}")));
        };
        if set.normals.len() != set.offsets.len() {
            return Err(risktree::Error::InvalidArgument(format!("time {t}: {} normals but {} offsets", set.normals.len(), set.offsets.len())));
        }
        let rows = set.normals.iter().zip(&set.offsets).map(|(n, b)| Halfspace::new(n.clone(), *b)).collect();
        let rho = ProcessAcceptanceSet::from_rows(space, t, eligible, rows)?;
        let restricted =
            (0..t).map(|s| restricted_family(space, &schedule.family_at(s, t), s, eligible)).collect::<risktree::Result<_>>()?;
        out.push(AugmentedProcessRiskMeasure::new(rho, restricted)?);
    }
    AugmentedFamily::new(name, out)
}
