//! Named parameter sets and the flat `key = value unit` configuration format.
//!
//! ```text
//! name = my-set
//!
//! [core]
//! g_A = 50 nM/min
//! ...
//! [linear-additive]     # optional, derived by slope matching when absent
//! lambda_A = 0.04 1/nM
//! [weighted]            # optional, derived by basal/slope matching
//! kappa_1 = 200 nM/min
//! [delays]              # optional, zero when absent
//! tau_1 = 1.2 min
//! ```
//!
//! Units are optional; when given they must match the expected unit exactly.
//! Sections that are present may list any subset of their keys; the rest are
//! derived as if the section were absent.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoreParams, DelayConfig, Formulation, LogisticModelParams, Model, WeightedModelParams};

pub const REFERENCE_PRESET: &str = "vinoth-table1";
pub const COMPARISON_PRESET: &str = "fig2-illustrative";
pub const PRESET_NAMES: [&str; 2] = [REFERENCE_PRESET, COMPARISON_PRESET];

const DELAY_UNITS: &[(&str, &str)] = &[
    ("tau_1", "min"),
    ("tau_2", "min"),
    ("tau_12", "min"),
    ("tau_21", "min"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub name: String,
    pub core: CoreParams,
    pub linear_additive: LogisticModelParams,
    pub weighted: WeightedModelParams,
    pub delays: DelayConfig,
}

impl ParameterSet {
    /// Both logistic formulations derived from `core` by matching.
    pub fn derived(name: impl Into<String>, core: CoreParams) -> Result<Self> {
        core.validate()?;
        Ok(Self {
            name: name.into(),
            core,
            linear_additive: LogisticModelParams::from_core(core),
            weighted: WeightedModelParams::from_core(core)?,
            delays: DelayConfig::none(),
        })
    }

    /// Built-in presets.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            REFERENCE_PRESET => Self::derived(REFERENCE_PRESET, CoreParams::reference()),
            COMPARISON_PRESET => Self::derived(COMPARISON_PRESET, CoreParams::comparison()),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (available: {})",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    /// Looks for `<dir>/<name>.conf` first, then the built-in presets.
    pub fn resolve_preset(name: &str, dir: Option<&Path>) -> Result<Self> {
        if let Some(dir) = dir {
            let path: PathBuf = dir.join(format!("{name}.conf"));
            if path.is_file() {
                return Self::load(&path);
            }
        }
        Self::preset(name)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let fallback = path.file_stem().and_then(|s| s.to_str()).unwrap_or("config");
        Self::parse_named(&text, fallback)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_named(text, "config")
    }

    fn parse_named(text: &str, fallback_name: &str) -> Result<Self> {
        let mut name = None;
        let mut section: Option<String> = None;
        let mut entries: Vec<(String, String, f64, usize)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let sec = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {lineno}: unterminated section header")))?
                    .trim();
                if !["core", "linear-additive", "weighted", "delays"].contains(&sec) {
                    return Err(Error::Config(format!("line {lineno}: unknown section [{sec}]")));
                }
                if entries.iter().any(|(s, ..)| s == sec) || section.as_deref() == Some(sec) {
                    return Err(Error::Config(format!("line {lineno}: section [{sec}] repeated")));
                }
                section = Some(sec.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {lineno}: expected `key = value`")))?;
            let key = key.trim();
            let value = value.trim();
            let Some(sec) = &section else {
                if key == "name" && !value.is_empty() {
                    name = Some(value.to_string());
                    continue;
                }
                return Err(Error::Config(format!(
                    "line {lineno}: `{key}` must appear inside a section"
                )));
            };
            let mut parts = value.split_whitespace();
            let number = parts
                .next()
                .ok_or_else(|| Error::Config(format!("line {lineno}: `{key}` has no value")))?;
            let number: f64 = number
                .parse()
                .map_err(|_| Error::Config(format!("line {lineno}: `{number}` is not a number")))?;
            let unit = parts.next();
            if parts.next().is_some() {
                return Err(Error::Config(format!("line {lineno}: trailing text after unit")));
            }
            let expected = expected_unit(sec, key)
                .ok_or_else(|| Error::Config(format!("line {lineno}: unknown key `{key}` in [{sec}]")))?;
            if let Some(u) = unit {
                if u != expected {
                    return Err(Error::Config(format!(
                        "line {lineno}: `{key}` is in {expected}, not {u}"
                    )));
                }
            }
            if entries.iter().any(|(s, k, ..)| s == sec && k == key) {
                return Err(Error::Config(format!("line {lineno}: `{key}` given twice")));
            }
            entries.push((sec.clone(), key.to_string(), number, lineno));
        }

        let get = |sec: &str, key: &str| {
            entries
                .iter()
                .find(|(s, k, ..)| s == sec && k == key)
                .map(|(.., v, _)| *v)
        };

        let mut core_vals = [0.0; 9];
        for (slot, (key, _)) in core_vals.iter_mut().zip(CoreParams::UNITS) {
            *slot = get("core", key)
                .ok_or_else(|| Error::Config(format!("[core] is missing `{key}`")))?;
        }
        let [g_a, g_b, g_ab, g_ba, gamma_a, gamma_b, a0, b0, n] = core_vals;
        let core = CoreParams::new(g_a, g_b, g_ab, g_ba, gamma_a, gamma_b, a0, b0, n)?;
        let mut set = Self::derived(name.unwrap_or_else(|| fallback_name.to_string()), core)?;

        let mut lin = Model::LinearAdditive(set.linear_additive);
        for (key, _) in LogisticModelParams::UNITS {
            if let Some(v) = get("linear-additive", key) {
                lin = lin.with_param(key, v)?;
            }
        }
        let mut wl = Model::Weighted(set.weighted);
        for (key, _) in WeightedModelParams::UNITS {
            if let Some(v) = get("weighted", key) {
                wl = wl.with_param(key, v)?;
            }
        }
        if let (Model::LinearAdditive(l), Model::Weighted(w)) = (lin, wl) {
            set.linear_additive = l;
            set.weighted = w;
        }
        set.delays = DelayConfig {
            tau_1: get("delays", "tau_1").unwrap_or(0.0),
            tau_2: get("delays", "tau_2").unwrap_or(0.0),
            tau_12: get("delays", "tau_12").unwrap_or(0.0),
            tau_21: get("delays", "tau_21").unwrap_or(0.0),
        };
        set.delays.validate()?;
        Ok(set)
    }

    /// Full, round-trippable text form with units.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        let mut section = |title: &str, rows: &[(&str, &str)], model: Option<Model>, values: &[f64]| {
            let _ = writeln!(out, "\n[{title}]");
            for (i, (key, unit)) in rows.iter().enumerate() {
                let v = match model {
                    Some(m) => m.param(key).expect("listed key"),
                    None => values[i],
                };
                let _ = writeln!(out, "{key} = {v} {unit}");
            }
        };
        section("core", CoreParams::UNITS, Some(Model::Hill(self.core)), &[]);
        section(
            "linear-additive",
            LogisticModelParams::UNITS,
            Some(Model::LinearAdditive(self.linear_additive)),
            &[],
        );
        section("weighted", WeightedModelParams::UNITS, Some(Model::Weighted(self.weighted)), &[]);
        section("delays", DELAY_UNITS, None, &self.delays.as_array());
        out
    }

    pub fn model(&self, formulation: Formulation) -> Model {
        match formulation {
            Formulation::Hill => Model::Hill(self.core),
            Formulation::LinearAdditive => Model::LinearAdditive(self.linear_additive),
            Formulation::Weighted => Model::Weighted(self.weighted),
        }
    }
}

fn expected_unit(section: &str, key: &str) -> Option<&'static str> {
    let table = match section {
        "core" => CoreParams::UNITS,
        "linear-additive" => LogisticModelParams::UNITS,
        "weighted" => WeightedModelParams::UNITS,
        "delays" => DELAY_UNITS,
        _ => return None,
    };
    table.iter().find(|(k, _)| *k == key).map(|(_, u)| *u)
}
