//! Run configuration: TOML with every numeric field accepting an expression
//! in units of `g` (`"100*g"`, `"-3*g/400"`, `"sqrt(2)*g"`).

use std::fmt;
use std::path::Path;

use cavsqueeze_core::params::{
    random_sites, uniform_sites, AtomSite, AtomicLevels, DetuningSpec, LaserProfile, ModeGeometry, PhysicalParams,
    Position, DEFAULT_COHERENCE_THRESHOLD, DEFAULT_MARGIN,
};
use cavsqueeze_core::hamiltonians::{Level, DEFAULT_CONDITION_GATE};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A real number given either literally or as an expression in `g` and `pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Num(pub f64);

/// Evaluates `src` with `g = 1` and `pi` bound. Supports `+ - * / ^`,
/// parentheses and `sqrt`, `exp`, `ln`, `sin`, `cos`, `abs`.
pub fn eval_expression(src: &str) -> Result<f64, String> {
    let mut p = ExprParser { s: src.as_bytes(), i: 0 };
    let v = p.sum().map_err(|e| format!("cannot evaluate `{src}`: {e}"))?;
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(format!("cannot evaluate `{src}`: unexpected `{}`", &src[p.i..]));
    }
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{src}` evaluates to {v}"))
    }
}

struct ExprParser<'a> {
    s: &'a [u8],
    i: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut v = self.product()?;
        loop {
            if self.eat(b'+') {
                v += self.product()?;
            } else if self.eat(b'-') {
                v -= self.product()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat(b'*') {
                v *= self.unary()?;
            } else if self.eat(b'/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        // Right associative, binds tighter than unary minus on its left.
        if self.eat(b'^') {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, String> {
        self.skip_ws();
        let start = self.i;
        let Some(&c) = self.s.get(self.i) else { return Err("unexpected end of input".into()) };
        if c == b'(' {
            self.i += 1;
            let v = self.sum()?;
            return if self.eat(b')') { Ok(v) } else { Err("missing `)`".into()) };
        }
        if c.is_ascii_digit() || c == b'.' {
            while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.') {
                self.i += 1;
            }
            if self.i < self.s.len() && matches!(self.s[self.i], b'e' | b'E') {
                let mut j = self.i + 1;
                if j < self.s.len() && matches!(self.s[j], b'+' | b'-') {
                    j += 1;
                }
                if j < self.s.len() && self.s[j].is_ascii_digit() {
                    while j < self.s.len() && self.s[j].is_ascii_digit() {
                        j += 1;
                    }
                    self.i = j;
                }
            }
            let text = std::str::from_utf8(&self.s[start..self.i]).expect("ASCII");
            return text.parse().map_err(|_| format!("bad number `{text}`"));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
                self.i += 1;
            }
            let name = std::str::from_utf8(&self.s[start..self.i]).expect("ASCII");
            let f: fn(f64) -> f64 = match name {
                "g" => return Ok(1.0),
                "pi" => return Ok(std::f64::consts::PI),
                "sqrt" => f64::sqrt,
                "exp" => f64::exp,
                "ln" => f64::ln,
                "sin" => f64::sin,
                "cos" => f64::cos,
                "abs" => f64::abs,
                _ => return Err(format!("unknown name `{name}`")),
            };
            if !self.eat(b'(') {
                return Err(format!("`{name}` needs an argument in parentheses"));
            }
            let v = self.sum()?;
            return if self.eat(b')') { Ok(f(v)) } else { Err("missing `)`".into()) };
        }
        Err(format!("unexpected `{}`", c as char))
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or an expression string such as \"100*g\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                if v.is_finite() {
                    Ok(Num(v))
                } else {
                    Err(E::custom(format!("{v} is not finite")))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                eval_expression(v).map(Num).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// A complex number: a real [`Num`] or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ComplexNum {
    Real(Num),
    Pair([Num; 2]),
}

impl ComplexNum {
    pub fn value(self) -> cavsqueeze_core::C64 {
        match self {
            ComplexNum::Real(r) => cavsqueeze_core::C64::new(r.0, 0.0),
            ComplexNum::Pair([re, im]) => cavsqueeze_core::C64::new(re.0, im.0),
        }
    }
}

impl Default for ComplexNum {
    fn default() -> Self {
        ComplexNum::Real(Num(0.0))
    }
}

fn one() -> Num {
    Num(1.0)
}

fn zero() -> Num {
    Num(0.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametersBlock {
    #[serde(default = "one")]
    pub g_a: Num,
    #[serde(default = "one")]
    pub g_b: Num,
    pub rabi_1: Num,
    pub rabi_2: Num,
    pub detuning_1: Num,
    pub detuning_2: Num,
    pub two_photon_1: Num,
    pub two_photon_2: Num,
    pub kappa_a: Num,
    pub kappa_b: Num,
    #[serde(default = "zero")]
    pub gamma: Num,
    #[serde(default = "zero")]
    pub tau: Num,
    pub g_scale: Option<Num>,
    #[serde(default)]
    pub levels: LevelsBlock,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsBlock {
    pub omega_0: Option<Num>,
    pub omega_1: Option<Num>,
    pub omega_2: Option<Num>,
}

impl ParametersBlock {
    pub fn build(&self) -> Result<PhysicalParams, CliError> {
        let lv = |x: Option<Num>| x.map_or(0.0, |n| n.0);
        PhysicalParams::from_detunings(DetuningSpec {
            g_a: self.g_a.0,
            g_b: self.g_b.0,
            rabi_1: self.rabi_1.0,
            rabi_2: self.rabi_2.0,
            detuning_1: self.detuning_1.0,
            detuning_2: self.detuning_2.0,
            two_photon_1: self.two_photon_1.0,
            two_photon_2: self.two_photon_2.0,
            kappa_a: self.kappa_a.0,
            kappa_b: self.kappa_b.0,
            gamma: self.gamma.0,
            tau: self.tau.0,
            levels: AtomicLevels {
                omega_0: lv(self.levels.omega_0),
                omega_1: lv(self.levels.omega_1),
                omega_2: lv(self.levels.omega_2),
            },
            g_scale: self.g_scale.map(|n| n.0),
        })
        .map_err(|e| CliError::Config(format!("[parameters]: {e}")))
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ProfileName {
    Homogeneous,
    Gaussian,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub q_a: Num,
    pub q_b: Num,
    #[serde(default)]
    pub m: i32,
    pub waist: Num,
    pub k_1: Num,
    pub k_2: Num,
    #[serde(default = "default_profile")]
    pub laser_profile: ProfileName,
    pub beam_width: Num,
    #[serde(default = "zero")]
    pub z_center: Num,
    /// Speed of light in geometry length units per `1/g`; enables the
    /// laser coherence check.
    pub speed_of_light: Option<Num>,
}

fn default_profile() -> ProfileName {
    ProfileName::Homogeneous
}

impl GeometryBlock {
    pub fn build(&self) -> Result<ModeGeometry, CliError> {
        let g = ModeGeometry {
            q_a: self.q_a.0,
            q_b: self.q_b.0,
            m: self.m,
            waist: self.waist.0,
            k_1: self.k_1.0,
            k_2: self.k_2.0,
            laser_profile: match self.laser_profile {
                ProfileName::Homogeneous => LaserProfile::Homogeneous,
                ProfileName::Gaussian => LaserProfile::Gaussian,
            },
            beam_width: self.beam_width.0,
            z_center: self.z_center.0,
        };
        g.validate().map_err(|e| CliError::Config(format!("[geometry]: {e}")))?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Uniform,
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionEntry {
    pub z: Num,
    pub rho: Num,
    #[serde(default = "zero")]
    pub phi: Num,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SitesBlock {
    pub count: Option<usize>,
    pub distribution: Option<Distribution>,
    pub seed: Option<u64>,
    pub positions: Option<Vec<PositionEntry>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatesBlock {
    pub margin: Option<Num>,
    pub condition: Option<Num>,
    pub coherence_threshold: Option<Num>,
    #[serde(default)]
    pub warn_only: bool,
}

impl GatesBlock {
    pub fn margin(&self) -> f64 {
        self.margin.map_or(DEFAULT_MARGIN, |n| n.0)
    }

    pub fn condition(&self) -> f64 {
        self.condition.map_or(DEFAULT_CONDITION_GATE, |n| n.0)
    }

    pub fn coherence_threshold(&self) -> f64 {
        self.coherence_threshold.map_or(DEFAULT_COHERENCE_THRESHOLD, |n| n.0)
    }
}

/// A time grid: an explicit list or `points` uniform samples on `[0, max]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<Num>),
    Uniform(UniformGrid),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformGrid {
    #[serde(default = "zero")]
    pub min: Num,
    pub max: Num,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Grid::List(v) => Ok(v.iter().map(|n| n.0).collect()),
            Grid::Uniform(u) => {
                if u.points == 0 {
                    return Err(CliError::Config("grid needs at least one point".into()));
                }
                if u.points == 1 {
                    return Ok(vec![u.min.0]);
                }
                let n = u.points - 1;
                Ok((0..=n)
                    .map(|i| if i == n { u.max.0 } else { u.min.0 + (u.max.0 - u.min.0) * i as f64 / n as f64 })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
pub enum LevelName {
    I,
    II,
    III,
    #[serde(rename = "IV")]
    IvFull,
    #[serde(rename = "IV_reduced")]
    IvReduced,
}

impl LevelName {
    pub fn level(self) -> Level {
        match self {
            LevelName::I => Level::I,
            LevelName::II => Level::II,
            LevelName::III => Level::III,
            LevelName::IvFull => Level::IvFull,
            LevelName::IvReduced => Level::IvReduced,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderBlock {
    pub margins: Vec<Num>,
    pub n_atoms: usize,
    pub xi_target: Num,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    #[serde(default = "default_level")]
    pub level: LevelName,
    pub n_max: usize,
    pub n_max_b: Option<usize>,
    pub tau: Option<Grid>,
    pub ladder: Option<LadderBlock>,
}

fn default_level() -> LevelName {
    LevelName::I
}

/// Parametric coupling of the input-output model: a number, or `"effective"`
/// to take `2|Ω|` from the ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveOmega {
    Value(f64),
    Effective,
}

impl<'de> Deserialize<'de> for DriveOmega {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(DriveOmega::Value(x)),
            Raw::Text(s) if s == "effective" => Ok(DriveOmega::Effective),
            Raw::Text(s) => eval_expression(&s).map(DriveOmega::Value).map_err(de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveBlock {
    pub omega: DriveOmega,
    pub kappa_a: Option<Num>,
    pub kappa_b: Option<Num>,
    #[serde(default)]
    pub eps_a: ComplexNum,
    #[serde(default)]
    pub eps_b: ComplexNum,
    pub spectrum: Option<Grid>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveBlock {
    pub tau: Option<Grid>,
    /// Multiples of the atom number for the linear-scaling extrapolation.
    pub scale_n: Option<Vec<Num>>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Validate,
    Effective,
    Simulate,
    Inout,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Validate => "validate",
            CommandName::Effective => "effective",
            CommandName::Simulate => "simulate",
            CommandName::Inout => "inout",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path into the configuration, e.g. `"drive.omega"`.
    pub path: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub command: CommandName,
    #[serde(default = "default_cap")]
    pub max_points: usize,
    pub axis: Vec<SweepAxis>,
}

fn default_cap() -> usize {
    10_000
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub directory: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { directory: None, formats: default_formats() }
    }
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub parameters: ParametersBlock,
    pub geometry: Option<GeometryBlock>,
    pub sites: SitesBlock,
    #[serde(default)]
    pub gates: GatesBlock,
    pub simulation: Option<SimulationBlock>,
    pub drive: Option<DriveBlock>,
    #[serde(default)]
    pub effective: EffectiveBlock,
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

/// The parsed document alongside the raw TOML tree, which sweeps edit.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub raw: toml::Table,
    pub config: RunConfig,
    pub bytes: Vec<u8>,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(format!("{}: {e}", path.display())))?;
    let config = parse_table(&raw).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok(LoadedConfig { raw, config, bytes })
}

pub fn parse_str(text: &str) -> Result<RunConfig, CliError> {
    let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    parse_table(&raw)
}

pub fn parse_table(raw: &toml::Table) -> Result<RunConfig, CliError> {
    // Round-tripping through text keeps line numbers in the diagnostics.
    let text = toml::to_string(raw).map_err(|e| CliError::Config(e.to_string()))?;
    let config: RunConfig = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    config.check()?;
    Ok(config)
}

/// Replaces the value at a dotted path, creating intermediate tables.
pub fn set_path(raw: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), CliError> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad sweep path `{path}`")));
    }
    let mut table = raw;
    for part in &parts[..parts.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("sweep path `{path}`: `{part}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    fn check(&self) -> Result<(), CliError> {
        let s = &self.sites;
        match (&s.positions, s.distribution) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("[sites]: give either `positions` or `distribution`, not both".into()))
            }
            (Some(p), None) => {
                if self.geometry.is_none() {
                    return Err(CliError::Config("[sites]: explicit positions need a [geometry] block".into()));
                }
                if s.count.is_some_and(|c| c != p.len()) {
                    return Err(CliError::Config("[sites]: `count` disagrees with the number of positions".into()));
                }
            }
            (None, None) => return Err(CliError::Config("[sites]: missing field `distribution` or `positions`".into())),
            (None, Some(d)) => {
                if s.count.is_none() {
                    return Err(CliError::Config("[sites]: missing field `count`".into()));
                }
                if d == Distribution::Random {
                    if s.seed.is_none() {
                        return Err(CliError::Config("[sites]: random sites need a `seed`".into()));
                    }
                    if self.geometry.is_none() {
                        return Err(CliError::Config("[sites]: random sites need a [geometry] block".into()));
                    }
                }
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.axis.is_empty() {
                return Err(CliError::Config("[sweep]: at least one `axis` is required".into()));
            }
            if sw.axis.iter().any(|a| a.path.starts_with("sweep")) {
                return Err(CliError::Config("[sweep]: an axis cannot edit the sweep itself".into()));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicalParams, CliError> {
        self.parameters.build()
    }

    pub fn geometry(&self) -> Result<Option<ModeGeometry>, CliError> {
        self.geometry.as_ref().map(GeometryBlock::build).transpose()
    }

    pub fn sites(&self) -> Result<Vec<AtomSite>, CliError> {
        let s = &self.sites;
        if let Some(p) = &s.positions {
            let geom = self.geometry()?.expect("checked at parse time");
            return Ok(p
                .iter()
                .map(|e| AtomSite::at(&geom, Position { z: e.z.0, rho: e.rho.0, phi: e.phi.0 }))
                .collect());
        }
        let count = s.count.expect("checked at parse time");
        match s.distribution.expect("checked at parse time") {
            Distribution::Uniform => Ok(uniform_sites(count)),
            Distribution::Random => {
                let geom = self.geometry()?.expect("checked at parse time");
                random_sites(&geom, count, s.seed.expect("checked at parse time"))
                    .map_err(|e| CliError::Config(format!("[sites]: {e}")))
            }
        }
    }

    pub fn formats(&self) -> (bool, bool) {
        (self.output.formats.contains(&Format::Csv), self.output.formats.contains(&Format::Json))
    }
}
