//! Run configuration: TOML parsing, environment overrides and validation.
//!
//! All keys live in one flat table named after the model symbols
//! (`sigma`, `eta`, `mu`, `gamma`, `p`, `N`, `L`, `M`, `dt`, `T_max`, `A`,
//! `B`, `a`, `b`, `c`, `q`, ...). Unknown keys and every broken model rule are
//! reported together.

use std::fmt;

use serde::{Deserialize, Serialize};

use fracmem::testfn::{max_admissible_q, TestFunctionSpec};
use fracmem::volterra::InequalityParams;
use fracmem::wavesim::{DataSpec, ModelParams, DEFAULT_BLOWUP_THRESHOLD};

/// Prefix of environment variables that override configuration keys.
pub const ENV_PREFIX: &str = "FRACMEM_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    VerifyFracops,
    VerifyVolterra,
    VerifyTestfn,
    Simulate,
    Sweep,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::VerifyFracops,
        Mode::VerifyVolterra,
        Mode::VerifyTestfn,
        Mode::Simulate,
        Mode::Sweep,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::VerifyFracops => "verify-fracops",
            Mode::VerifyVolterra => "verify-volterra",
            Mode::VerifyTestfn => "verify-testfn",
            Mode::Simulate => "simulate",
            Mode::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn is_verify(&self) -> bool {
        matches!(self, Mode::VerifyFracops | Mode::VerifyVolterra | Mode::VerifyTestfn)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

/// Fully resolved configuration; every key has a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub run_id: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub record_wall_time: bool,
    pub force_failure: bool,
    pub sigma: f64,
    pub eta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub p: f64,
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub modes: usize,
    pub dt: f64,
    #[serde(rename = "T_max")]
    pub t_max: f64,
    pub blowup_threshold: f64,
    pub record_every: usize,
    #[serde(rename = "A")]
    pub a_const: f64,
    #[serde(rename = "B")]
    pub b_const: f64,
    #[serde(rename = "a")]
    pub source: f64,
    pub b: f64,
    pub c: f64,
    pub q: f64,
    pub amplitude: f64,
    pub u1_amplitude: f64,
    pub width: f64,
    pub p_values: Vec<f64>,
}

/// Keys accepted in a configuration document.
pub const KEYS: [&str; 29] = [
    "mode",
    "run_id",
    "seed",
    "output",
    "jobs",
    "record_wall_time",
    "force_failure",
    "sigma",
    "eta",
    "mu",
    "gamma",
    "p",
    "N",
    "L",
    "M",
    "dt",
    "T_max",
    "blowup_threshold",
    "record_every",
    "A",
    "B",
    "a",
    "b",
    "c",
    "q",
    "amplitude",
    "u1_amplitude",
    "width",
    "p_values",
];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<String>,
    run_id: Option<String>,
    seed: Option<u64>,
    output: Option<String>,
    jobs: Option<usize>,
    record_wall_time: Option<bool>,
    force_failure: Option<bool>,
    sigma: Option<f64>,
    eta: Option<f64>,
    mu: Option<f64>,
    gamma: Option<f64>,
    p: Option<f64>,
    #[serde(rename = "N")]
    dim: Option<usize>,
    #[serde(rename = "L")]
    half_width: Option<f64>,
    #[serde(rename = "M")]
    modes: Option<usize>,
    dt: Option<f64>,
    #[serde(rename = "T_max")]
    t_max: Option<f64>,
    blowup_threshold: Option<f64>,
    record_every: Option<usize>,
    #[serde(rename = "A")]
    a_const: Option<f64>,
    #[serde(rename = "B")]
    b_const: Option<f64>,
    #[serde(rename = "a")]
    source: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    q: Option<f64>,
    amplitude: Option<f64>,
    u1_amplitude: Option<f64>,
    width: Option<f64>,
    p_values: Option<Vec<f64>>,
}

/// Value for an override string: a TOML literal when it parses as one,
/// otherwise a plain string.
fn override_value(text: &str) -> toml::Value {
    match format!("v = {text}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(text.into())),
        Err(_) => toml::Value::String(text.into()),
    }
}

/// Resolves an override name to a configuration key: exact match first,
/// then a unique case-insensitive match (`T_MAX` -> `T_max`).
fn resolve_key(name: &str) -> Option<&'static str> {
    if let Some(k) = KEYS.iter().find(|k| **k == name) {
        return Some(k);
    }
    let hits: Vec<&&str> = KEYS.iter().filter(|k| k.eq_ignore_ascii_case(name)).collect();
    match hits.as_slice() {
        [k] => Some(k),
        _ => None,
    }
}

/// Applies `FRACMEM_<key>=<value>` pairs on top of a parsed table.
pub fn apply_env_overrides<I>(table: &mut toml::Table, vars: I) -> Result<(), ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut bad = Vec::new();
    let mut vars: Vec<(String, String)> = vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (name, value) in vars {
        let key = &name[ENV_PREFIX.len()..];
        match resolve_key(key) {
            Some(k) => {
                table.insert(k.to_string(), override_value(&value));
            }
            None => bad.push(format!("{name}: no configuration key `{key}` (or it is ambiguous)")),
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(bad))
    }
}

/// Parses TOML text into a table (syntax errors carry line numbers).
pub fn parse_table(text: &str) -> Result<toml::Table, ConfigError> {
    text.parse::<toml::Table>().map_err(|e| ConfigError::Syntax(e.to_string().trim_end().to_string()))
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    resolve(parse_table(text)?, None)
}

/// Validates a table, optionally forcing the mode (subcommands).
pub fn resolve(table: toml::Table, forced_mode: Option<Mode>) -> Result<RunConfig, ConfigError> {
    let mut bad: Vec<String> = table
        .keys()
        .filter(|k| !KEYS.contains(&k.as_str()))
        .map(|k| format!("unknown key `{k}`"))
        .collect();
    if !bad.is_empty() {
        return Err(ConfigError::Invalid(bad));
    }
    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Invalid(vec![e.to_string().trim_end().to_string()]))?;
    let mode = match (raw.mode.as_deref(), forced_mode) {
        (None, None) => {
            bad.push("missing key `mode`".into());
            Mode::Simulate
        }
        (None, Some(m)) => m,
        (Some(s), forced) => match (Mode::parse(s), forced) {
            (Some(m), None) => m,
            (Some(m), Some(f)) if m == f => m,
            (Some(m), Some(f)) => {
                bad.push(format!("config mode `{m}` conflicts with subcommand `{f}`"));
                f
            }
            (None, _) => {
                let names: Vec<&str> = Mode::ALL.iter().map(|m| m.as_str()).collect();
                bad.push(format!("unknown mode `{s}` (expected one of {})", names.join(", ")));
                forced.unwrap_or(Mode::Simulate)
            }
        },
    };
    let sigma = raw.sigma.unwrap_or(1.0);
    let eta = raw.eta.unwrap_or(0.5);
    let dim = raw.dim.unwrap_or(1);
    let default_q = max_admissible_q(dim, sigma, eta).unwrap_or(dim as f64 + 1.0);
    let default_p = if mode == Mode::VerifyVolterra { 3.0 } else { 1.5 };
    let amplitude = raw.amplitude.unwrap_or(1.0);
    let cfg = RunConfig {
        mode,
        run_id: raw.run_id.unwrap_or_else(|| mode.as_str().to_string()),
        seed: raw.seed.unwrap_or(20240601),
        output: raw.output,
        jobs: raw.jobs,
        record_wall_time: raw.record_wall_time.unwrap_or(false),
        force_failure: raw.force_failure.unwrap_or(false),
        sigma,
        eta,
        mu: raw.mu.unwrap_or(2.0),
        gamma: raw.gamma.unwrap_or(0.5),
        p: raw.p.unwrap_or(default_p),
        dim,
        half_width: raw.half_width.unwrap_or(20.0),
        modes: raw.modes.unwrap_or(256),
        dt: raw.dt.unwrap_or(1e-3),
        t_max: raw.t_max.unwrap_or(50.0),
        blowup_threshold: raw.blowup_threshold.unwrap_or(DEFAULT_BLOWUP_THRESHOLD),
        record_every: raw.record_every.unwrap_or(10),
        a_const: raw.a_const.unwrap_or(0.1),
        b_const: raw.b_const.unwrap_or(0.1),
        source: raw.source.unwrap_or(1.0),
        b: raw.b.unwrap_or(3.0),
        c: raw.c.unwrap_or(2.0),
        q: raw.q.unwrap_or(default_q),
        amplitude,
        u1_amplitude: raw.u1_amplitude.unwrap_or(amplitude),
        width: raw.width.unwrap_or(1.0),
        p_values: raw.p_values.unwrap_or_else(|| vec![1.2, 1.5, 1.9, 2.0, 2.1, 3.0]),
    };
    bad.extend(cfg.violations());
    if bad.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(bad))
    }
}

impl RunConfig {
    /// Every rule broken by the values relevant to the mode.
    pub fn violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.run_id.is_empty() || !self.run_id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            bad.push(format!("run_id `{}` must be non-empty and use only [A-Za-z0-9._-]", self.run_id));
        }
        if self.jobs == Some(0) {
            bad.push("jobs must be at least 1".into());
        }
        match self.mode {
            Mode::VerifyFracops => {}
            Mode::VerifyVolterra => bad.extend(InequalityParams::violations(
                self.a_const,
                self.b_const,
                self.source,
                self.b,
                self.c,
                self.gamma,
                self.p,
            )),
            Mode::VerifyTestfn => bad.extend(TestFunctionSpec::violations(self.dim, self.q, self.sigma, self.eta)),
            Mode::Simulate | Mode::Sweep => {
                bad.extend(self.model().violations());
                bad.extend(TestFunctionSpec::violations(self.dim, self.q, self.sigma, self.eta));
                if self.record_every == 0 {
                    bad.push("record_every must be at least 1".into());
                }
                if !(self.width > 0.0 && self.width.is_finite()) {
                    bad.push(format!("width = {} must be positive", self.width));
                }
                if !(self.amplitude.is_finite() && self.u1_amplitude.is_finite()) {
                    bad.push("amplitudes must be finite".into());
                }
                if self.mode == Mode::Sweep && self.p_values.windows(2).any(|w| w[1] < w[0]) {
                    bad.push("p_values must be sorted ascending".into());
                }
            }
        }
        // the model rules for the sweep's own p are replaced by per-row checks
        if self.mode == Mode::Sweep {
            bad.retain(|m| !m.starts_with("p = "));
        }
        bad
    }

    pub fn model(&self) -> ModelParams {
        ModelParams {
            sigma: self.sigma,
            eta: self.eta,
            mu: self.mu,
            gamma: self.gamma,
            p: self.p,
            dim: self.dim,
            half_width: self.half_width,
            modes: self.modes,
            dt: self.dt,
            t_max: self.t_max,
            blowup_threshold: self.blowup_threshold,
        }
    }

    pub fn inequality(&self) -> Option<InequalityParams> {
        InequalityParams::new(self.a_const, self.b_const, self.source, self.b, self.c, self.gamma, self.p).ok()
    }

    pub fn test_function(&self) -> Option<TestFunctionSpec> {
        TestFunctionSpec::new(self.dim, self.q, self.sigma, self.eta).ok()
    }

    pub fn data(&self) -> DataSpec {
        DataSpec {
            u0_amplitude: self.amplitude,
            u1_amplitude: self.u1_amplitude,
            width: self.width,
        }
    }

    /// The resolved configuration as TOML; parsing it back yields `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simulate_accepted() {
        let cfg = parse_config("mode = \"simulate\"\ngamma = 0.5\np = 1.5\nsigma = 1.0\neta = 0.5\nmu = 2.0\n").unwrap();
        assert_eq!(cfg.mode, Mode::Simulate);
        assert_eq!(cfg.q, 2.0);
        assert_eq!(cfg.run_id, "simulate");
    }

    #[test]
    fn gamma_one_rejected() {
        let err = parse_config("mode = \"simulate\"\ngamma = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("γ<1"), "{err}");
    }

    #[test]
    fn discriminant_rule_cited() {
        let err = parse_config("mode = \"verify-volterra\"\nb = 1\nc = 2\n").unwrap_err();
        assert!(err.to_string().contains("b²−4c>0"), "{err}");
    }

    #[test]
    fn all_violations_reported() {
        let text = "mode = \"simulate\"\ngamma = 1.5\np = 0.5\nq = 3.5\nsigma = 0.5\nbogus = 1\nother = 2\n";
        match parse_config(text).unwrap_err() {
            ConfigError::Invalid(v) => assert_eq!(v.len(), 2, "{v:?}"),
            e => panic!("{e}"),
        }
        match parse_config("mode = \"simulate\"\ngamma = 1.5\np = 0.5\nq = 3.5\nsigma = 0.5\n").unwrap_err() {
            ConfigError::Invalid(v) => {
                assert!(v.len() >= 3, "{v:?}");
                assert!(v.iter().any(|m| m.contains("(N, N+2")), "{v:?}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_config("mode = \"simulate\"\np = = 2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)));
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse_config("mode = \"sweep\"\np_values = [1.2, 2.0]\ndt = 0.002\nrun_id = \"x\"\n").unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(again.to_toml(), cfg.to_toml());
    }

    #[test]
    fn env_overrides() {
        let mut t = parse_table("mode = \"simulate\"\np = 1.5\n").unwrap();
        apply_env_overrides(
            &mut t,
            vec![
                ("FRACMEM_p".to_string(), "2.5".to_string()),
                ("FRACMEM_T_MAX".to_string(), "3".to_string()),
                ("FRACMEM_run_id".to_string(), "abc".to_string()),
                ("HOME".to_string(), "/root".to_string()),
            ],
        )
        .unwrap();
        let cfg = resolve(t, None).unwrap();
        assert_eq!((cfg.p, cfg.t_max, cfg.run_id.as_str()), (2.5, 3.0, "abc"));
        let mut t = toml::Table::new();
        assert!(apply_env_overrides(&mut t, vec![("FRACMEM_nope".into(), "1".into())]).is_err());
    }

    #[test]
    fn subcommand_mode() {
        let t = parse_table("p = 2.0\n").unwrap();
        assert_eq!(resolve(t, Some(Mode::Sweep)).unwrap().mode, Mode::Sweep);
        let t = parse_table("mode = \"simulate\"\n").unwrap();
        assert!(resolve(t, Some(Mode::Sweep)).is_err());
        assert!(parse_config("p = 2.0\n").is_err());
        assert!(parse_config("mode = \"fly\"\n").is_err());
    }
}
