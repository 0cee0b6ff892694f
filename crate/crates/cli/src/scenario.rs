//! Flat `key = value` scenario files.
//!
//! One assignment per line, `#` starts a comment. Dimensional values carry
//! a mandatory unit token after the number (`mass = 5.11e-4 GeV`). Every
//! kind has a fixed key schema; unknown keys are rejected so a typo fails
//! loudly instead of silently running a default.

use std::collections::BTreeMap;
use std::fmt;

use gravicol_core::units::{GEV_PER_GRAM, INV_GEV_PER_SECOND, METERS_PER_INV_GEV};

/// What a scenario computes. Selects the key schema and the output table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    TwoBranch,
    Rotation,
    BornRace,
    Estimate,
    SnGround,
    SnEvolve,
    PdCompare,
    WeakMeasure,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::TwoBranch,
        Kind::Rotation,
        Kind::BornRace,
        Kind::Estimate,
        Kind::SnGround,
        Kind::SnEvolve,
        Kind::PdCompare,
        Kind::WeakMeasure,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Kind::TwoBranch => "two_branch",
            Kind::Rotation => "rotation",
            Kind::BornRace => "born_race",
            Kind::Estimate => "estimate",
            Kind::SnGround => "sn_ground",
            Kind::SnEvolve => "sn_evolve",
            Kind::PdCompare => "pd_compare",
            Kind::WeakMeasure => "weak_measure",
        }
    }

    pub fn from_token(token: &str) -> Option<Kind> {
        Kind::ALL.iter().copied().find(|k| k.token() == token)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A parsed right-hand side. Dimensional quantities keep the unit spelled
/// in the file so a scenario serialises back byte for byte.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Pure(f64),
    Quantity { magnitude: f64, unit: String },
    Word(String),
    List(Vec<f64>),
}

/// Expected shape of one key's value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Pure,
    Mass,
    Length,
    Time,
    Word(&'static [&'static str]),
    List,
}

impl Ty {
    fn describe(self) -> String {
        match self {
            Ty::Int => "an unsigned integer".into(),
            Ty::Pure => "a dimensionless number".into(),
            Ty::Mass => format!("a mass with unit ({})", MASS_UNITS.join(", ")),
            Ty::Length => format!("a length with unit ({})", LENGTH_UNITS.join(", ")),
            Ty::Time => format!("a time with unit ({})", TIME_UNITS.join(", ")),
            Ty::Word(allowed) => format!("one of {}", allowed.join(", ")),
            Ty::List => "a space-separated list of numbers".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Field {
    key: &'static str,
    ty: Ty,
    required: bool,
}

const fn req(key: &'static str, ty: Ty) -> Field {
    Field {
        key,
        ty,
        required: true,
    }
}

const fn opt(key: &'static str, ty: Ty) -> Field {
    Field {
        key,
        ty,
        required: false,
    }
}

pub const SHAPES: &[&str] = &["linear", "smoothstep", "sine"];
pub const PROFILES: &[&str] = &["uniform", "gaussian"];
pub const TARGETS: &[&str] = &["collapse_time", "required_mass", "qubits"];
pub const SCALINGS: &[&str] = &["entangled", "product", "both"];
pub const REFRESH: &[&str] = &["lagged", "fixed_point"];

const MASS_UNITS: &[&str] = &["GeV", "kg", "g", "mg", "ug", "ng", "pg"];
const LENGTH_UNITS: &[&str] = &["GeV^-1", "m", "cm", "mm", "um", "nm", "pm", "fm"];
const TIME_UNITS: &[&str] = &["GeV^-1", "s", "ms", "us", "ns"];

fn schema(kind: Kind) -> &'static [Field] {
    const TWO_BRANCH: &[Field] = &[
        req("alpha2_sq", Ty::Pure),
        opt("alpha_phase", Ty::Pure),
        req("mass", Ty::Mass),
        req("phi1", Ty::Pure),
        req("phi2", Ty::Pure),
        req("duration", Ty::Time),
        req("nodes", Ty::Int),
    ];
    const ROTATION: &[Field] = &[
        req("theta_s", Ty::Pure),
        opt("phase", Ty::Pure),
        req("shape", Ty::Word(SHAPES)),
        req("start", Ty::Pure),
        req("end", Ty::Pure),
        req("nodes", Ty::Int),
    ];
    const BORN_RACE: &[Field] = &[req("rates", Ty::List), req("samples", Ty::Int)];
    const ESTIMATE: &[Field] = &[
        req("target", Ty::Word(TARGETS)),
        opt("mass", Ty::Mass),
        opt("constituents", Ty::Int),
        opt("fraction", Ty::Pure),
        opt("smearing", Ty::Length),
        opt("displacement", Ty::Length),
        opt("profile", Ty::Word(PROFILES)),
        opt("tau", Ty::Time),
        opt("electrons_per_qubit", Ty::Int),
        opt("scaling", Ty::Word(SCALINGS)),
    ];
    const SN_GROUND: &[Field] = &[
        req("mass", Ty::Mass),
        opt("coupling", Ty::Pure),
        req("r_max", Ty::Length),
        req("nodes", Ty::Int),
        req("width", Ty::Length),
        opt("dtau", Ty::Pure),
        opt("max_iterations", Ty::Int),
    ];
    const SN_EVOLVE: &[Field] = &[
        req("mass", Ty::Mass),
        opt("coupling", Ty::Pure),
        req("r_max", Ty::Length),
        req("nodes", Ty::Int),
        req("width", Ty::Length),
        req("dt", Ty::Time),
        req("steps", Ty::Int),
        opt("refresh", Ty::Word(REFRESH)),
        opt("refine_iterations", Ty::Int),
    ];
    const PD_COMPARE: &[Field] = &[
        req("mass", Ty::Mass),
        req("constituents", Ty::Int),
        req("fraction", Ty::Pure),
        req("smearing", Ty::Length),
        req("profile", Ty::Word(PROFILES)),
        req("separations", Ty::List),
    ];
    const WEAK_MEASURE: &[Field] = &[
        req("state", Ty::List),
        req("q_index", Ty::Int),
        req("p", Ty::Pure),
        req("samples", Ty::Int),
    ];
    match kind {
        Kind::TwoBranch => TWO_BRANCH,
        Kind::Rotation => ROTATION,
        Kind::BornRace => BORN_RACE,
        Kind::Estimate => ESTIMATE,
        Kind::SnGround => SN_GROUND,
        Kind::SnEvolve => SN_EVOLVE,
        Kind::PdCompare => PD_COMPARE,
        Kind::WeakMeasure => WEAK_MEASURE,
    }
}

/// Required and permitted keys for one estimate target. The estimate kind
/// shares a schema, but each target uses its own subset.
fn estimate_keys(target: &str) -> (&'static [&'static str], &'static [&'static str]) {
    const CT: &[&str] = &[
        "mass",
        "constituents",
        "fraction",
        "smearing",
        "displacement",
        "profile",
    ];
    const RM: &[&str] = &["tau", "mass", "fraction", "smearing", "profile"];
    const QB: &[&str] = &["tau", "electrons_per_qubit", "scaling"];
    match target {
        "collapse_time" => (CT, CT),
        "required_mass" => (RM, RM),
        "qubits" => (QB, QB),
        _ => unreachable!("target validated against the schema word list"),
    }
}

/// Scenario file rejection: the offending line (when known) and why.
#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    fn new(message: impl Into<String>) -> Self {
        ParseError {
            line: None,
            message: message.into(),
        }
    }

    fn at(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

/// A validated scenario: identity, kind, seed, optional output path and
/// the schema-checked parameters.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub seed: u64,
    pub output: Option<String>,
    params: BTreeMap<String, Value>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ParseError> {
        let mut name: Option<String> = None;
        let mut kind: Option<Kind> = None;
        let mut seed: Option<u64> = None;
        let mut output: Option<String> = None;
        let mut raw: Vec<(String, String, usize)> = Vec::new();

        for (idx, full_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let stripped = match full_line.find('#') {
                Some(pos) => &full_line[..pos],
                None => full_line,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            let Some((key, value)) = stripped.split_once('=') else {
                return Err(ParseError::at(
                    lineno,
                    format!("expected `key = value`, got `{stripped}`"),
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ParseError::at(lineno, "empty key before `=`"));
            }
            if value.is_empty() {
                return Err(ParseError::at(
                    lineno,
                    format!("empty value for key `{key}`"),
                ));
            }
            match key {
                "name" => set_once(&mut name, key, value.to_string(), lineno)?,
                "kind" => {
                    if kind.is_some() {
                        return Err(ParseError::at(lineno, "duplicate key `kind`"));
                    }
                    kind = Some(Kind::from_token(value).ok_or_else(|| {
                        let all: Vec<&str> = Kind::ALL.iter().map(|k| k.token()).collect();
                        ParseError::at(
                            lineno,
                            format!("unknown kind `{value}` (one of {})", all.join(", ")),
                        )
                    })?);
                }
                "seed" => {
                    if seed.is_some() {
                        return Err(ParseError::at(lineno, "duplicate key `seed`"));
                    }
                    seed = Some(value.parse().map_err(|_| {
                        ParseError::at(
                            lineno,
                            format!("key `seed` expects an unsigned integer, got `{value}`"),
                        )
                    })?);
                }
                "output" => set_once(&mut output, key, value.to_string(), lineno)?,
                _ => {
                    if raw.iter().any(|(k, _, _)| k == key) {
                        return Err(ParseError::at(lineno, format!("duplicate key `{key}`")));
                    }
                    raw.push((key.to_string(), value.to_string(), lineno));
                }
            }
        }

        let kind = kind.ok_or_else(|| ParseError::new("missing key `kind`"))?;
        let name = name.ok_or_else(|| ParseError::new("missing key `name`"))?;
        let fields = schema(kind);

        let mut params = BTreeMap::new();
        for (key, value, lineno) in &raw {
            let field = fields.iter().find(|f| f.key == key).ok_or_else(|| {
                ParseError::at(*lineno, format!("unknown key `{key}` for kind {kind}"))
            })?;
            let parsed = parse_value(field, value).map_err(|msg| ParseError::at(*lineno, msg))?;
            params.insert(key.clone(), parsed);
        }
        for field in fields {
            if field.required && !params.contains_key(field.key) {
                return Err(ParseError::new(format!(
                    "missing key `{}` for kind {kind}",
                    field.key
                )));
            }
        }

        if kind == Kind::Estimate {
            let target = match params.get("target") {
                Some(Value::Word(w)) => w.clone(),
                _ => unreachable!("target is a required word"),
            };
            let (required, allowed) = estimate_keys(&target);
            for key in required {
                if !params.contains_key(*key) {
                    return Err(ParseError::new(format!(
                        "missing key `{key}` for estimate target {target}"
                    )));
                }
            }
            for key in params.keys() {
                if key != "target" && !allowed.contains(&key.as_str()) {
                    return Err(ParseError::new(format!(
                        "key `{key}` does not apply to estimate target {target}"
                    )));
                }
            }
        }

        Ok(Scenario {
            name,
            kind,
            seed: seed.unwrap_or(0),
            output,
            params,
        })
    }

    /// Canonical text form: identity keys first, then the parameters in
    /// schema order. Parsing the result reproduces it byte for byte.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name = {}\n", self.name));
        out.push_str(&format!("kind = {}\n", self.kind));
        out.push_str(&format!("seed = {}\n", self.seed));
        if let Some(path) = &self.output {
            out.push_str(&format!("output = {path}\n"));
        }
        for field in schema(self.kind) {
            if let Some(value) = self.params.get(field.key) {
                out.push_str(&format!("{} = {}\n", field.key, fmt_value(value)));
            }
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }

    // The typed accessors below assume the schema held at parse time and
    // panic otherwise: a violation is a bug here, not bad user input.

    pub fn u64_of(&self, key: &str) -> u64 {
        match self.params.get(key) {
            Some(Value::Int(n)) => *n,
            other => panic!("key `{key}` should be a schema-checked integer, got {other:?}"),
        }
    }

    pub fn opt_u64(&self, key: &str) -> Option<u64> {
        self.params.get(key).map(|_| self.u64_of(key))
    }

    pub fn f64_of(&self, key: &str) -> f64 {
        match self.params.get(key) {
            Some(Value::Pure(x)) => *x,
            other => panic!("key `{key}` should be a schema-checked number, got {other:?}"),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        self.params.get(key).map(|_| self.f64_of(key))
    }

    pub fn word_of(&self, key: &str) -> &str {
        match self.params.get(key) {
            Some(Value::Word(w)) => w,
            other => panic!("key `{key}` should be a schema-checked word, got {other:?}"),
        }
    }

    pub fn list_of(&self, key: &str) -> &[f64] {
        match self.params.get(key) {
            Some(Value::List(xs)) => xs,
            other => panic!("key `{key}` should be a schema-checked list, got {other:?}"),
        }
    }

    fn quantity_of(&self, key: &str) -> (f64, &str) {
        match self.params.get(key) {
            Some(Value::Quantity { magnitude, unit }) => (*magnitude, unit.as_str()),
            other => panic!("key `{key}` should be a schema-checked quantity, got {other:?}"),
        }
    }

    /// Mass converted to GeV.
    pub fn mass_gev(&self, key: &str) -> f64 {
        let (mag, unit) = self.quantity_of(key);
        mag * mass_factor(unit).expect("unit validated at parse time")
    }

    /// Length converted to 1/GeV.
    pub fn length_natural(&self, key: &str) -> f64 {
        let (mag, unit) = self.quantity_of(key);
        mag * length_factor(unit).expect("unit validated at parse time")
    }

    /// Time converted to 1/GeV.
    pub fn time_natural(&self, key: &str) -> f64 {
        let (mag, unit) = self.quantity_of(key);
        mag * time_factor(unit).expect("unit validated at parse time")
    }

    /// Time converted to seconds.
    pub fn time_seconds(&self, key: &str) -> f64 {
        self.time_natural(key) / INV_GEV_PER_SECOND
    }
}

fn set_once(
    slot: &mut Option<String>,
    key: &str,
    value: String,
    lineno: usize,
) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(ParseError::at(lineno, format!("duplicate key `{key}`")));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_number(key: &str, token: &str) -> Result<f64, String> {
    let x: f64 = token
        .parse()
        .map_err(|_| format!("key `{key}` has a malformed number `{token}`"))?;
    if !x.is_finite() {
        return Err(format!("key `{key}` must be finite, got `{token}`"));
    }
    Ok(x)
}

fn parse_value(field: &Field, raw: &str) -> Result<Value, String> {
    let key = field.key;
    let tokens: Vec<&str> = raw.split_whitespace().collect();
    match field.ty {
        Ty::Int => {
            if tokens.len() != 1 {
                return Err(format!("key `{key}` expects {}", field.ty.describe()));
            }
            let n = tokens[0]
                .parse()
                .map_err(|_| format!("key `{key}` expects an unsigned integer, got `{raw}`"))?;
            Ok(Value::Int(n))
        }
        Ty::Pure => {
            if tokens.len() != 1 {
                return Err(format!(
                    "key `{key}` is dimensionless, drop the trailing `{}`",
                    tokens.get(1).copied().unwrap_or("")
                ));
            }
            Ok(Value::Pure(parse_number(key, tokens[0])?))
        }
        Ty::Mass | Ty::Length | Ty::Time => {
            if tokens.len() == 1 {
                return Err(format!(
                    "key `{key}` needs a unit: expected {}",
                    field.ty.describe()
                ));
            }
            if tokens.len() != 2 {
                return Err(format!(
                    "key `{key}` expects `<number> <unit>`, got `{raw}`"
                ));
            }
            let magnitude = parse_number(key, tokens[0])?;
            let unit = tokens[1];
            let known = match field.ty {
                Ty::Mass => mass_factor(unit).is_some(),
                Ty::Length => length_factor(unit).is_some(),
                Ty::Time => time_factor(unit).is_some(),
                _ => unreachable!(),
            };
            if !known {
                return Err(format!(
                    "key `{key}` has unknown unit `{unit}`: expected {}",
                    field.ty.describe()
                ));
            }
            Ok(Value::Quantity {
                magnitude,
                unit: unit.to_string(),
            })
        }
        Ty::Word(allowed) => {
            if tokens.len() != 1 || !allowed.contains(&tokens[0]) {
                return Err(format!(
                    "key `{key}` must be one of {}, got `{raw}`",
                    allowed.join(", ")
                ));
            }
            Ok(Value::Word(tokens[0].to_string()))
        }
        Ty::List => {
            if tokens.is_empty() {
                return Err(format!("key `{key}` expects at least one number"));
            }
            let mut xs = Vec::with_capacity(tokens.len());
            for t in tokens {
                xs.push(parse_number(key, t)?);
            }
            Ok(Value::List(xs))
        }
    }
}

fn fmt_value(value: &Value) -> String {
    match value {
        Value::Int(n) => n.to_string(),
        Value::Pure(x) => x.to_string(),
        Value::Quantity { magnitude, unit } => format!("{magnitude} {unit}"),
        Value::Word(w) => w.clone(),
        Value::List(xs) => xs.iter().map(f64::to_string).collect::<Vec<_>>().join(" "),
    }
}

fn mass_factor(unit: &str) -> Option<f64> {
    Some(match unit {
        "GeV" => 1.0,
        "kg" => 1e3 * GEV_PER_GRAM,
        "g" => GEV_PER_GRAM,
        "mg" => 1e-3 * GEV_PER_GRAM,
        "ug" => 1e-6 * GEV_PER_GRAM,
        "ng" => 1e-9 * GEV_PER_GRAM,
        "pg" => 1e-12 * GEV_PER_GRAM,
        _ => return None,
    })
}

fn length_factor(unit: &str) -> Option<f64> {
    let meters = match unit {
        "GeV^-1" => return Some(1.0),
        "m" => 1.0,
        "cm" => 1e-2,
        "mm" => 1e-3,
        "um" => 1e-6,
        "nm" => 1e-9,
        "pm" => 1e-12,
        "fm" => 1e-15,
        _ => return None,
    };
    Some(meters / METERS_PER_INV_GEV)
}

fn time_factor(unit: &str) -> Option<f64> {
    let seconds = match unit {
        "GeV^-1" => return Some(1.0),
        "s" => 1.0,
        "ms" => 1e-3,
        "us" => 1e-6,
        "ns" => 1e-9,
        _ => return None,
    };
    Some(seconds * INV_GEV_PER_SECOND)
}
