//! Run configuration: a small TOML subset (scalars, strings, booleans, one
//! level of `[tables]`) mapped onto typed blocks.
//!
//! Rate-valued physical keys accept three spellings, exactly one per key:
//! raw SI (`eta = 1.0e8`, rad/s), `eta_in_units_of_kappa = 3.9` and
//! `eta_times_2pi_hz = 1.6e7`.

use std::collections::BTreeMap;
use std::fmt;

use qst_core::gaussian::NoiseConvention;
use qst_core::params::FreeParameter;
use qst_core::phase_space::StateKind;
use qst_core::PhysicalParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
    Bool(bool),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Text(_) => "string",
            Value::Bool(_) => "boolean",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: Value,
    pub line: usize,
}

/// Parsed but untyped document: table name → key → entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub tables: BTreeMap<String, (usize, BTreeMap<String, Entry>)>,
}

pub fn parse_document(text: &str) -> Result<Document, ConfigError> {
    let mut doc = Document::default();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line, "unterminated table header"))?
                .trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ConfigError::at(line, format!("invalid table name `{name}` (one level only)")));
            }
            if let Some((first, _)) = doc.tables.get(name) {
                return Err(ConfigError::at(
                    line,
                    format!("duplicate table [{name}] on lines {first} and {line}"),
                ));
            }
            doc.tables.insert(name.to_string(), (line, BTreeMap::new()));
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{body}`")))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::at(line, format!("invalid key `{key}`")));
        }
        let table = current
            .as_ref()
            .ok_or_else(|| ConfigError::at(line, format!("key `{key}` appears before any [table]")))?;
        let value = parse_value(value.trim()).map_err(|m| ConfigError::at(line, format!("{key}: {m}")))?;
        let entries = &mut doc.tables.get_mut(table).expect("current table exists").1;
        if let Some(prev) = entries.get(key) {
            return Err(ConfigError::at(
                line,
                format!("duplicate key `{key}` in [{table}] on lines {} and {line}", prev.line),
            ));
        }
        entries.insert(key.to_string(), Entry { value, line });
    }
    Ok(doc)
}

fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            '\\' if in_string => escaped = !escaped,
            '"' if !escaped => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => escaped = false,
        }
        if c != '\\' {
            escaped = false;
        }
    }
    line
}

fn parse_value(s: &str) -> Result<Value, String> {
    if let Some(inner) = s.strip_prefix('"') {
        let inner = inner.strip_suffix('"').ok_or("unterminated string")?;
        let mut out = String::new();
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            if c == '\\' {
                match chars.next() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    other => return Err(format!("unsupported escape `\\{}`", other.unwrap_or(' '))),
                }
            } else if c == '"' {
                return Err("unescaped quote inside string".into());
            } else {
                out.push(c);
            }
        }
        return Ok(Value::Text(out));
    }
    match s {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        "" => return Err("missing value".into()),
        _ => {}
    }
    let cleaned: String = s.chars().filter(|&c| c != '_').collect();
    match cleaned.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Value::Number(v)),
        _ => Err(format!("`{s}` is not a number, string or boolean")),
    }
}

/// How a rate-valued key was written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Si,
    Kappa,
    TwoPiHz,
}

impl Unit {
    const SUFFIXES: [(&'static str, Unit); 2] =
        [("_in_units_of_kappa", Unit::Kappa), ("_times_2pi_hz", Unit::TwoPiHz)];

    fn split(key: &str) -> (&str, Unit) {
        for (suffix, unit) in Self::SUFFIXES {
            if let Some(base) = key.strip_suffix(suffix) {
                return (base, unit);
            }
        }
        (key, Unit::Si)
    }

    pub fn to_si(self, value: f64, kappa: f64) -> f64 {
        match self {
            Unit::Si => value,
            Unit::Kappa => value * kappa,
            Unit::TwoPiHz => value * 2.0 * std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeyKind {
    /// rad/s; all three spellings.
    Rate,
    /// rad/s; κ itself, so no κ-relative form.
    Kappa,
    /// SI only.
    Plain,
    Count,
    Flag,
}

const PHYSICAL_KEYS: [(&str, KeyKind, bool); 12] = [
    ("m_m", KeyKind::Plain, true),
    ("omega_m", KeyKind::Rate, true),
    ("cavity_length", KeyKind::Plain, true),
    ("kappa", KeyKind::Kappa, true),
    ("delta_c", KeyKind::Rate, true),
    ("eta", KeyKind::Rate, true),
    ("lambda_l", KeyKind::Plain, true),
    ("m_a", KeyKind::Plain, true),
    ("n_atoms", KeyKind::Count, true),
    ("delta_a", KeyKind::Rate, true),
    ("g", KeyKind::Rate, false),
    ("detuning_is_effective", KeyKind::Flag, false),
];

/// The physical block with each quantity kept in the spelling it was given,
/// so that sweeps can override a κ-relative value before resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalBlock {
    pub quantities: BTreeMap<String, Quantity>,
    pub n_atoms: u64,
    pub detuning_is_effective: bool,
}

impl PhysicalBlock {
    pub fn resolve(&self) -> PhysicalParams {
        let kappa_q = self.quantities["kappa"];
        let kappa = kappa_q.unit.to_si(kappa_q.value, f64::NAN);
        let get = |name: &str| {
            self.quantities.get(name).map(|q| q.unit.to_si(q.value, kappa)).unwrap_or(0.0)
        };
        PhysicalParams {
            m_m: get("m_m"),
            omega_m: get("omega_m"),
            cavity_length: get("cavity_length"),
            kappa,
            delta_c: get("delta_c"),
            eta: get("eta"),
            lambda_l: get("lambda_l"),
            m_a: get("m_a"),
            n_atoms: self.n_atoms,
            delta_a: get("delta_a"),
            g: get("g"),
            detuning_is_effective: self.detuning_is_effective,
        }
    }

    /// Replaces one quantity; `name` may carry a unit suffix.
    pub fn with_override(&self, name: &str, value: f64) -> Result<Self, ConfigError> {
        let mut out = self.clone();
        let (base, unit) = Unit::split(name);
        if base == "n_atoms" && unit == Unit::Si {
            if value < 1.0 || value.fract() != 0.0 || value > u64::MAX as f64 {
                return Err(ConfigError::general(format!("n_atoms must be a positive integer, got {value}")));
            }
            out.n_atoms = value as u64;
            return Ok(out);
        }
        let kind = physical_kind(base)
            .ok_or_else(|| ConfigError::general(format!("cannot sweep unknown parameter `{name}`")))?;
        check_unit(kind, base, unit).map_err(ConfigError::general)?;
        if matches!(kind, KeyKind::Count | KeyKind::Flag) {
            return Err(ConfigError::general(format!("cannot sweep `{name}`")));
        }
        out.quantities.insert(base.to_string(), Quantity { value, unit });
        Ok(out)
    }
}

fn physical_kind(base: &str) -> Option<KeyKind> {
    PHYSICAL_KEYS.iter().find(|(k, _, _)| *k == base).map(|(_, kind, _)| *kind)
}

fn check_unit(kind: KeyKind, base: &str, unit: Unit) -> Result<(), String> {
    let ok = match kind {
        KeyKind::Rate => true,
        KeyKind::Kappa => unit != Unit::Kappa,
        _ => unit == Unit::Si,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("unit suffix not allowed on `{base}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchBlock {
    pub free: FreeParameter,
    pub lo: Quantity,
    pub hi: Quantity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridChoice {
    pub n_x: usize,
    pub n_p: usize,
    pub span: f64,
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid must look like NxM, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("grid must look like NxM, got `{s}`"));
    let (n, m) = (parse(a)?, parse(b)?);
    if n < 2 || m < 2 {
        return Err(format!("grid needs at least 2 nodes per axis, got `{s}`"));
    }
    Ok((n, m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentBlock {
    pub state: StateKind,
    pub noise: NoiseConvention,
    pub grid: GridChoice,
    pub seed: u64,
    pub require_stable: bool,
    pub auto_widen: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    List(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize, log: bool },
}

impl SweepValues {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepValues::List(v) => v.clone(),
            SweepValues::Range { start, stop, steps, log } => {
                if *steps == 1 {
                    return vec![*start];
                }
                let n = (*steps - 1) as f64;
                (0..*steps)
                    .map(|i| {
                        let f = i as f64 / n;
                        if *log {
                            (start.ln() + f * (stop.ln() - start.ln())).exp()
                        } else {
                            start + f * (stop - start)
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepBlock {
    pub parameter: String,
    pub values: SweepValues,
    pub optimize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleBlock {
    pub dim: usize,
    pub grid: GridChoice,
    pub sde_paths: usize,
    pub cases: usize,
    /// Multiplies every tolerance; below one it makes checks fail on purpose.
    pub tolerance_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub physical: PhysicalBlock,
    pub matching: Option<MatchBlock>,
    pub experiment: ExperimentBlock,
    pub sweep: Option<SweepBlock>,
    pub oracle: OracleBlock,
    pub output_dir: Option<String>,
}

impl RunConfig {
    pub fn physical_params(&self) -> PhysicalParams {
        self.physical.resolve()
    }
}

/// Key reader for one table that remembers which keys were consumed.
struct Table<'a> {
    name: &'a str,
    header_line: usize,
    entries: BTreeMap<String, Entry>,
}

impl<'a> Table<'a> {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn number(&mut self, key: &str) -> Result<Option<(f64, usize)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Entry { value: Value::Number(v), line }) => Ok(Some((v, line))),
            Some(Entry { value, line }) => Err(ConfigError::at(
                line,
                format!("`{key}` must be a number, got a {}", value.kind()),
            )),
        }
    }

    fn text(&mut self, key: &str) -> Result<Option<(String, usize)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Entry { value: Value::Text(v), line }) => Ok(Some((v, line))),
            Some(Entry { value, line }) => Err(ConfigError::at(
                line,
                format!("`{key}` must be a string, got a {}", value.kind()),
            )),
        }
    }

    fn flag(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Entry { value: Value::Bool(v), .. }) => Ok(Some(v)),
            Some(Entry { value, line }) => Err(ConfigError::at(
                line,
                format!("`{key}` must be true or false, got a {}", value.kind()),
            )),
        }
    }

    fn count(&mut self, key: &str) -> Result<Option<(usize, usize)>, ConfigError> {
        match self.number(key)? {
            None => Ok(None),
            Some((v, line)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(Some((v as usize, line))),
            Some((v, line)) => Err(ConfigError::at(line, format!("`{key}` must be a non-negative integer, got {v}"))),
        }
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::at(self.header_line, format!("missing required key `{key}` in [{}]", self.name))
    }

    /// A rate in any spelling, exactly one.
    fn quantity(&mut self, base: &str, kind: KeyKind) -> Result<Option<Quantity>, ConfigError> {
        let mut found: Option<(Quantity, usize, String)> = None;
        for (suffix, unit) in std::iter::once(("", Unit::Si)).chain(Unit::SUFFIXES) {
            let key = format!("{base}{suffix}");
            let Some((v, line)) = self.number(&key)? else { continue };
            if let Err(m) = check_unit(kind, base, unit) {
                return Err(ConfigError::at(line, m));
            }
            if let Some((_, first, first_key)) = &found {
                return Err(ConfigError::at(
                    line,
                    format!("`{base}` given twice (`{first_key}` on line {first}, `{key}` on line {line}); use exactly one form"),
                ));
            }
            found = Some((Quantity { value: v, unit }, line, key));
        }
        Ok(found.map(|f| f.0))
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.entries.iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((key, e)) => {
                let (base, unit) = Unit::split(key);
                let msg = if unit != Unit::Si && self.name == "physical" && physical_kind(base).is_some() {
                    format!("unit suffix not allowed on `{base}`")
                } else {
                    format!("unknown key `{key}` in [{}]", self.name)
                };
                Err(ConfigError::at(e.line, msg))
            }
        }
    }
}

const TABLES: [&str; 6] = ["physical", "match", "experiment", "sweep", "oracle", "output"];

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut doc = parse_document(text)?;
    if let Some((name, (line, _))) = doc.tables.iter().find(|(n, _)| !TABLES.contains(&n.as_str())) {
        return Err(ConfigError::at(*line, format!("unknown table [{name}]")));
    }
    let mut table = |name: &'static str| {
        doc.tables.remove(name).map(|(header_line, entries)| Table { name, header_line, entries })
    };

    let Some(mut phys) = table("physical") else {
        return Err(ConfigError::general(format!(
            "missing required key `{}` in [physical] (no [physical] table)",
            PHYSICAL_KEYS[0].0
        )));
    };
    let mut quantities = BTreeMap::new();
    let mut n_atoms = None;
    let mut detuning_is_effective = true;
    for (key, kind, required) in PHYSICAL_KEYS {
        match kind {
            KeyKind::Count => match phys.number(key)? {
                Some((v, _)) if v >= 1.0 && v.fract() == 0.0 => n_atoms = Some(v as u64),
                Some((v, line)) => return Err(ConfigError::at(line, format!("`{key}` must be a positive integer, got {v}"))),
                None => {}
            },
            KeyKind::Flag => {
                if let Some(v) = phys.flag(key)? {
                    detuning_is_effective = v;
                }
                continue;
            }
            _ => {
                if let Some(q) = phys.quantity(key, kind)? {
                    quantities.insert(key.to_string(), q);
                }
            }
        }
        let present = quantities.contains_key(key) || (kind == KeyKind::Count && n_atoms.is_some());
        if required && !present {
            return Err(phys.missing(key));
        }
    }
    phys.finish()?;
    let physical = PhysicalBlock {
        quantities,
        n_atoms: n_atoms.expect("checked above"),
        detuning_is_effective,
    };

    let matching = match table("match") {
        None => None,
        Some(mut t) => {
            let enabled = t.flag("enabled")?.unwrap_or(true);
            let (free, line) = t.text("free")?.ok_or_else(|| t.missing("free"))?;
            let free: FreeParameter = free.parse().map_err(|e: qst_core::Error| ConfigError::at(line, e.to_string()))?;
            let lo = t.quantity("lo", KeyKind::Rate)?.ok_or_else(|| t.missing("lo"))?;
            let hi = t.quantity("hi", KeyKind::Rate)?.ok_or_else(|| t.missing("hi"))?;
            t.finish()?;
            enabled.then_some(MatchBlock { free, lo, hi })
        }
    };

    let experiment = {
        let mut t = table("experiment").unwrap_or(Table { name: "experiment", header_line: 0, entries: BTreeMap::new() });
        let alpha = t.number("alpha")?;
        let n_bar = t.number("n_bar")?;
        let state_name = t.text("state")?;
        let state = match state_name.as_ref().map(|(s, l)| (s.as_str(), *l)) {
            None | Some(("cat", _)) => StateKind::Cat { alpha: alpha.map_or(2.0, |a| a.0) },
            Some(("coherent", _)) => StateKind::Coherent { alpha: alpha.map_or(2.0, |a| a.0) },
            Some(("vacuum", _)) => StateKind::Vacuum,
            Some(("thermal", _)) => StateKind::Thermal { n_bar: n_bar.map_or(1.0, |n| n.0) },
            Some((other, line)) => {
                return Err(ConfigError::at(line, format!("unknown state `{other}` (vacuum, coherent, thermal, cat)")))
            }
        };
        let noise = match t.text("noise")? {
            None => NoiseConvention::Symmetrized,
            Some((s, line)) => s.parse().map_err(|e: qst_core::Error| ConfigError::at(line, e.to_string()))?,
        };
        let grid = grid_choice(&mut t, (256, 256), 8.0)?;
        let seed = t.count("seed")?.map_or(0, |s| s.0 as u64);
        let require_stable = t.flag("require_stable")?.unwrap_or(false);
        let auto_widen = t.flag("auto_widen")?.unwrap_or(true);
        t.finish()?;
        ExperimentBlock { state, noise, grid, seed, require_stable, auto_widen }
    };

    let sweep = match table("sweep") {
        None => None,
        Some(mut t) => {
            let (parameter, line) = t.text("parameter")?.ok_or_else(|| t.missing("parameter"))?;
            if parameter != "alpha" {
                physical.with_override(&parameter, 1.0).map_err(|e| ConfigError::at(line, e.message))?;
            }
            let list = t.text("values")?;
            let start = t.number("start")?;
            let stop = t.number("stop")?;
            let steps = t.count("steps")?;
            let scale = t.text("scale")?;
            let values = match (list, start) {
                (Some((s, line)), None) => {
                    if stop.is_some() || steps.is_some() || scale.is_some() {
                        return Err(ConfigError::at(line, "give either `values` or `start`/`stop`/`steps`, not both"));
                    }
                    let mut v = Vec::new();
                    for item in s.split(',') {
                        let x: f64 = item
                            .trim()
                            .parse()
                            .map_err(|_| ConfigError::at(line, format!("`values` entry `{}` is not a number", item.trim())))?;
                        v.push(x);
                    }
                    SweepValues::List(v)
                }
                (None, Some((start, _))) => {
                    let (stop, _) = stop.ok_or_else(|| t.missing("stop"))?;
                    let (steps, sl) = steps.ok_or_else(|| t.missing("steps"))?;
                    if steps == 0 {
                        return Err(ConfigError::at(sl, "`steps` must be at least 1"));
                    }
                    let log = match scale {
                        None => false,
                        Some((s, _)) if s == "linear" => false,
                        Some((s, _)) if s == "log" => true,
                        Some((s, l)) => return Err(ConfigError::at(l, format!("unknown scale `{s}` (linear, log)"))),
                    };
                    if log && (start <= 0.0 || stop <= 0.0) {
                        return Err(ConfigError::at(t.header_line, "log scale needs positive start and stop"));
                    }
                    SweepValues::Range { start, stop, steps, log }
                }
                (Some((_, line)), Some(_)) => {
                    return Err(ConfigError::at(line, "give either `values` or `start`/`stop`/`steps`, not both"))
                }
                (None, None) => return Err(t.missing("values")),
            };
            let optimize = t.flag("optimize")?.unwrap_or(false);
            t.finish()?;
            Some(SweepBlock { parameter, values, optimize })
        }
    };

    let oracle = {
        let mut t = table("oracle").unwrap_or(Table { name: "oracle", header_line: 0, entries: BTreeMap::new() });
        let dim = t.count("dim")?.map_or(30, |d| d.0);
        let grid = grid_choice(&mut t, (256, 256), 8.0)?;
        let sde_paths = t.count("sde_paths")?.map_or(10_000, |d| d.0);
        let cases = t.count("cases")?.map_or(100, |d| d.0);
        let tolerance_scale = match t.number("tolerance_scale")? {
            None => 1.0,
            Some((v, _)) if v > 0.0 => v,
            Some((v, line)) => return Err(ConfigError::at(line, format!("`tolerance_scale` must be positive, got {v}"))),
        };
        t.finish()?;
        OracleBlock { dim, grid, sde_paths, cases, tolerance_scale }
    };

    let output_dir = match table("output") {
        None => None,
        Some(mut t) => {
            let dir = t.text("dir")?.map(|d| d.0);
            t.finish()?;
            dir
        }
    };

    Ok(RunConfig { physical, matching, experiment, sweep, oracle, output_dir })
}

fn grid_choice(t: &mut Table<'_>, default: (usize, usize), default_span: f64) -> Result<GridChoice, ConfigError> {
    let (n_x, n_p) = match t.text("grid")? {
        None => default,
        Some((s, line)) => parse_grid(&s).map_err(|m| ConfigError::at(line, m))?,
    };
    let span = match t.number("span")? {
        None => default_span,
        Some((v, _)) if v > 0.0 => v,
        Some((v, line)) => return Err(ConfigError::at(line, format!("`span` must be positive, got {v}"))),
    };
    Ok(GridChoice { n_x, n_p, span })
}
