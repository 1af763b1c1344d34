//! Flat key-value experiment configs with `[section]` headers.
//!
//! A file holds one or more `[experiment]` blocks; each selects a built-in
//! scenario by name and may override sweep levels, seed, tolerance, and
//! output file. A `[params]` block following an experiment supplies numeric
//! overrides for that scenario (grid size, drive amplitude, …). No nested
//! expressions: scenarios are named presets with numeric knobs.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub seed: u64,
    /// Inclusive sweep bounds; scenarios with non-level sweeps ignore them.
    pub levels: Option<(u32, u32)>,
    pub tol: Option<f64>,
    /// CSV file name, relative to the output directory.
    pub out: Option<String>,
    pub params: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    fn new(scenario: String) -> Self {
        Self { scenario, seed: 0, levels: None, tol: None, out: None, params: BTreeMap::new() }
    }

    pub fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }
}

pub fn parse(text: &str) -> Result<Vec<ExperimentConfig>> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Experiment,
        Params,
    }
    let mut experiments: Vec<ExperimentConfig> = Vec::new();
    let mut section = Section::None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: &str| anyhow!("line {}: {msg}", lineno + 1);

        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "experiment" => {
                    experiments.push(ExperimentConfig::new(String::new()));
                    Section::Experiment
                }
                "params" => {
                    if experiments.is_empty() {
                        bail!(at("[params] before any [experiment]"));
                    }
                    Section::Params
                }
                other => bail!(at(&format!("unknown section [{other}]"))),
            };
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at("expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let current = experiments
            .last_mut()
            .ok_or_else(|| at("key outside any [experiment]"))?;
        match section {
            Section::Experiment => match key {
                "scenario" => current.scenario = value.to_string(),
                "seed" => {
                    current.seed = value.parse().with_context(|| format!("line {}: bad seed", lineno + 1))?
                }
                "levels" => {
                    let (lo, hi) = value
                        .split_once("..")
                        .ok_or_else(|| at("levels must look like `3..10`"))?;
                    let lo: u32 = lo.trim().parse().with_context(|| format!("line {}: bad level", lineno + 1))?;
                    let hi: u32 = hi.trim().parse().with_context(|| format!("line {}: bad level", lineno + 1))?;
                    if lo > hi {
                        bail!(at("levels range is reversed"));
                    }
                    current.levels = Some((lo, hi));
                }
                "tol" => {
                    let v: f64 = value.parse().with_context(|| format!("line {}: bad tol", lineno + 1))?;
                    if !v.is_finite() || v <= 0.0 {
                        bail!(at("tol must be positive"));
                    }
                    current.tol = Some(v);
                }
                "out" => current.out = Some(value.to_string()),
                other => bail!(at(&format!("unknown experiment key `{other}`"))),
            },
            Section::Params => {
                let v: f64 = value
                    .parse()
                    .with_context(|| format!("line {}: bad numeric value for `{key}`", lineno + 1))?;
                current.params.insert(key.to_string(), v);
            }
            Section::None => bail!(at("key outside any section")),
        }
    }

    if experiments.is_empty() {
        bail!("config contains no [experiment] section");
    }
    for e in &experiments {
        if e.scenario.is_empty() {
            bail!("an [experiment] section is missing `scenario = ...`");
        }
    }
    Ok(experiments)
}
