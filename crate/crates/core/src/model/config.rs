//! TOML scenario documents.
//!
//! ```toml
//! [hot]
//! n_sites = 2
//! omega = 1.5
//! g = [0.5, 0.55]
//! temperature = 2.0
//!
//! [cold]
//! omega = 1.0
//! g = [0.5, 0.55]
//! temperature = 1.0
//!
//! [interaction]
//! variant = "type2"
//! omega_vector = [0.1, 0.1]
//!
//! [run]
//! mode = "cascaded"
//! tau = [0.02, 0.04, 0.08]
//! grid = "0.1:3.5:0.02"
//! ```

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::Deserialize;
use toml::Spanned;

use super::{DissipationMode, EnsembleSpec, Interaction, Scenario};

/// Parse or validation failure with the 1-based line it refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Time charged to one cascaded sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CascadeTime {
    /// A full sweep over all sites counts as `tau`.
    #[default]
    Sweep,
    /// Each site's sub-collision counts as `tau`, so a sweep is `N tau`.
    Total,
}

impl CascadeTime {
    pub fn name(self) -> &'static str {
        match self {
            CascadeTime::Sweep => "sweep",
            CascadeTime::Total => "total",
        }
    }
}

/// Inclusive `lo:hi:step` grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self, String> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if !(step > 0.0) {
            return Err(format!("grid step must be positive, got {step}"));
        }
        if hi < lo {
            return Err(format!("grid upper bound {hi} is below lower bound {lo}"));
        }
        Ok(Self { lo, hi, step })
    }

    /// Grid values, rounded to 12 decimals so `lo + k step` prints cleanly.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let x = self.lo + k as f64 * self.step;
                (x * 1e12).round() / 1e12
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid must look like lo:hi:step, got {s:?}"));
        }
        let mut nums = [0.0; 3];
        for (slot, p) in nums.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| format!("grid component {p:?} is not a number"))?;
        }
        Grid::new(nums[0], nums[1], nums[2])
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{:?}", self.lo, self.hi, self.step)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub taus: Vec<f64>,
    pub grid: Option<Grid>,
    pub tol: f64,
    pub max_steps: usize,
    pub eps: f64,
    pub cascade_time: CascadeTime,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            taus: vec![0.02, 0.04, 0.08],
            grid: None,
            tol: 1e-10,
            max_steps: 200_000,
            eps: 1e-9,
            cascade_time: CascadeTime::Sweep,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    /// The other exchange form when the document lists both `omega_matrix`
    /// and `omega_vector`; the variant picks the primary one.
    pub alternate: Option<Interaction>,
    pub run: RunSettings,
}

impl Config {
    /// Exchange of the given kind (1 all-to-all, 2 pairwise, 0 none), taken
    /// from the primary or alternate form.
    pub fn interaction_of_kind(&self, kind: u8) -> Option<Interaction> {
        let matches = |i: &Interaction| {
            matches!(
                (kind, i),
                (0, Interaction::None) | (1, Interaction::AllToAll(_)) | (2, Interaction::Pairwise(_))
            )
        };
        if kind == 0 {
            return Some(Interaction::None);
        }
        std::iter::once(self.scenario.interaction())
            .chain(self.alternate.as_ref())
            .find(|i| matches(i))
            .cloned()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    hot: Option<Spanned<RawEnsemble>>,
    cold: Option<Spanned<RawEnsemble>>,
    interaction: Option<Spanned<RawInteraction>>,
    run: Option<Spanned<RawRun>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    n_sites: Option<Spanned<i64>>,
    omega: Spanned<f64>,
    g: Spanned<Vec<f64>>,
    temperature: Spanned<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    variant: Spanned<String>,
    omega_matrix: Option<Spanned<Vec<Vec<f64>>>>,
    omega_vector: Option<Spanned<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    mode: Option<Spanned<String>>,
    tau: Option<Spanned<Vec<f64>>>,
    grid: Option<Spanned<String>>,
    tol: Option<Spanned<f64>>,
    max_steps: Option<Spanned<i64>>,
    eps: Option<Spanned<f64>>,
    cascade_time: Option<Spanned<String>>,
}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn at(&self, offset: usize) -> usize {
        let end = offset.min(self.0.len());
        self.0[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.at(span.start),
            message: message.into(),
        }
    }
}

fn ensemble(
    lines: &Lines<'_>,
    name: &str,
    raw: Option<Spanned<RawEnsemble>>,
) -> Result<(EnsembleSpec, Range<usize>), ConfigError> {
    let raw = raw.ok_or_else(|| ConfigError {
        line: 1,
        message: format!("missing ensemble [{name}]"),
    })?;
    let span = raw.span();
    let raw = raw.into_inner();
    let g_span = raw.g.span();
    let g = raw.g.into_inner();
    let n_sites = match raw.n_sites {
        Some(n) => {
            let value = *n.get_ref();
            if value < 1 {
                return Err(lines.err(n.span(), format!("{name}.n_sites must be at least 1, got {value}")));
            }
            if value as usize != g.len() {
                return Err(lines.err(
                    g_span,
                    format!("{name}.g has {} entries, expected n_sites = {value}", g.len()),
                ));
            }
            value as usize
        }
        None => {
            if g.is_empty() {
                return Err(lines.err(g_span, format!("{name}.g must not be empty")));
            }
            g.len()
        }
    };
    if let Some(bad) = g.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(lines.err(g_span, format!("{name}.g entries must be non-negative, got {bad}")));
    }
    let omega = *raw.omega.get_ref();
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(lines.err(raw.omega.span(), format!("{name}.omega must be positive, got {omega}")));
    }
    let temperature = *raw.temperature.get_ref();
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(lines.err(
            raw.temperature.span(),
            format!("{name}.temperature must be positive, got {temperature}"),
        ));
    }
    Ok((
        EnsembleSpec {
            n_sites,
            omega,
            g,
            temperature,
        },
        span,
    ))
}

fn interaction(
    lines: &Lines<'_>,
    raw: Option<Spanned<RawInteraction>>,
    n: usize,
) -> Result<(Interaction, Option<Interaction>), ConfigError> {
    let Some(raw) = raw else {
        return Ok((Interaction::None, None));
    };
    let section = raw.span();
    let raw = raw.into_inner();
    let matrix = match raw.omega_matrix {
        Some(m) => {
            let span = m.span();
            let m = m.into_inner();
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                let cols = m.first().map_or(0, |r| r.len());
                return Err(lines.err(
                    span,
                    format!("omega_matrix must be {n}x{n}, got {}x{cols}", m.len()),
                ));
            }
            Some(Interaction::AllToAll(m))
        }
        None => None,
    };
    let vector = match raw.omega_vector {
        Some(v) => {
            let span = v.span();
            let v = v.into_inner();
            if v.len() != n {
                return Err(lines.err(
                    span,
                    format!("omega_vector must have length {n}, got {}", v.len()),
                ));
            }
            Some(Interaction::Pairwise(v))
        }
        None => None,
    };
    match raw.variant.get_ref().as_str() {
        "type1" => {
            let m = matrix.ok_or_else(|| lines.err(section.clone(), "variant \"type1\" requires omega_matrix"))?;
            Ok((m, vector))
        }
        "type2" => {
            let v = vector.ok_or_else(|| lines.err(section.clone(), "variant \"type2\" requires omega_vector"))?;
            Ok((v, matrix))
        }
        "none" => Ok((Interaction::None, matrix.or(vector))),
        other => Err(lines.err(
            raw.variant.span(),
            format!("unknown interaction variant {other:?} (expected type1, type2 or none)"),
        )),
    }
}

fn mode_from_str(s: &str) -> Option<DissipationMode> {
    match s {
        "common" => Some(DissipationMode::Common),
        "cascaded" => Some(DissipationMode::Cascaded),
        "independent" => Some(DissipationMode::Independent),
        _ => None,
    }
}

fn run_settings(
    lines: &Lines<'_>,
    raw: Option<Spanned<RawRun>>,
) -> Result<(DissipationMode, RunSettings), ConfigError> {
    let mut run = RunSettings::default();
    let Some(raw) = raw else {
        return Ok((DissipationMode::Common, run));
    };
    let raw = raw.into_inner();
    let mode = match raw.mode {
        Some(m) => mode_from_str(m.get_ref()).ok_or_else(|| {
            lines.err(
                m.span(),
                format!(
                    "unknown mode {:?} (expected common, cascaded or independent)",
                    m.get_ref()
                ),
            )
        })?,
        None => DissipationMode::Common,
    };
    if let Some(t) = raw.tau {
        let span = t.span();
        let taus = t.into_inner();
        if let Some(bad) = taus.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(lines.err(span, format!("tau values must be positive, got {bad}")));
        }
        run.taus = taus;
    }
    if let Some(g) = raw.grid {
        run.grid = Some(g.get_ref().parse().map_err(|e: String| lines.err(g.span(), e))?);
    }
    if let Some(t) = raw.tol {
        let v = *t.get_ref();
        if !(v > 0.0) {
            return Err(lines.err(t.span(), format!("tol must be positive, got {v}")));
        }
        run.tol = v;
    }
    if let Some(m) = raw.max_steps {
        let v = *m.get_ref();
        if v < 1 {
            return Err(lines.err(m.span(), format!("max_steps must be at least 1, got {v}")));
        }
        run.max_steps = v as usize;
    }
    if let Some(e) = raw.eps {
        let v = *e.get_ref();
        if !(v > 0.0) {
            return Err(lines.err(e.span(), format!("eps must be positive, got {v}")));
        }
        run.eps = v;
    }
    if let Some(c) = raw.cascade_time {
        run.cascade_time = match c.get_ref().as_str() {
            "sweep" => CascadeTime::Sweep,
            "total" => CascadeTime::Total,
            other => {
                return Err(lines.err(
                    c.span(),
                    format!("unknown cascade_time {other:?} (expected sweep or total)"),
                ))
            }
        };
    }
    Ok((mode, run))
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let lines = Lines(text);
    let doc: RawDoc = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map_or(1, |s| lines.at(s.start)),
        message: e.message().trim().to_string(),
    })?;
    let (hot, _) = ensemble(&lines, "hot", doc.hot)?;
    let (cold, cold_span) = ensemble(&lines, "cold", doc.cold)?;
    if hot.n_sites != cold.n_sites {
        return Err(lines.err(
            cold_span,
            format!(
                "cold ensemble has {} sites, hot ensemble has {}",
                cold.n_sites, hot.n_sites
            ),
        ));
    }
    let (interaction, alternate) = interaction(&lines, doc.interaction, hot.n_sites)?;
    let (mode, run) = run_settings(&lines, doc.run)?;
    let scenario = Scenario::new(hot, cold, interaction, mode).map_err(|e| ConfigError {
        line: 1,
        message: e.to_string(),
    })?;
    Ok(Config {
        scenario,
        alternate,
        run,
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    parse_config(text).map(|c| c.scenario)
}

fn list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    format!("[{}]", items.join(", "))
}

/// Canonical document; `parse_config(&render(c)) == c`.
pub fn render(config: &Config) -> String {
    let s = &config.scenario;
    let mut out = String::new();
    for (name, e) in [("hot", s.hot()), ("cold", s.cold())] {
        out.push_str(&format!(
            "[{name}]\nn_sites = {}\nomega = {:?}\ng = {}\ntemperature = {:?}\n\n",
            e.n_sites,
            e.omega,
            list(&e.g),
            e.temperature
        ));
    }
    out.push_str(&format!("[interaction]\nvariant = \"{}\"\n", s.interaction().tag()));
    for form in std::iter::once(s.interaction()).chain(config.alternate.as_ref()) {
        match form {
            Interaction::AllToAll(m) => {
                let rows: Vec<String> = m.iter().map(|r| list(r)).collect();
                out.push_str(&format!("omega_matrix = [{}]\n", rows.join(", ")));
            }
            Interaction::Pairwise(v) => out.push_str(&format!("omega_vector = {}\n", list(v))),
            Interaction::None => {}
        }
    }
    let r = &config.run;
    out.push_str(&format!(
        "\n[run]\nmode = \"{}\"\ntau = {}\n",
        s.mode().name(),
        list(&r.taus)
    ));
    if let Some(g) = r.grid {
        out.push_str(&format!("grid = \"{g}\"\n"));
    }
    out.push_str(&format!(
        "tol = {:?}\nmax_steps = {}\neps = {:?}\ncascade_time = \"{}\"\n",
        r.tol,
        r.max_steps,
        r.eps,
        r.cascade_time.name()
    ));
    out
}

pub fn render_scenario(s: &Scenario) -> String {
    render(&Config {
        scenario: s.clone(),
        alternate: None,
        run: RunSettings::default(),
    })
}
