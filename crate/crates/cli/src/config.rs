//! Run configuration: a JSON file and command-line flags merged field by
//! field, flags winning. The resolved configuration is embedded in every
//! JSON report so the report can be re-executed.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use fracineq::fracint::QuadMethod;
use fracineq::verify::TheoremId;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Quasiconvex,
    Preinvex,
    Prequasiinvex,
    ConditionC,
    InvexSet,
    Interpolation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_panels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<QuadMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remark_base: Option<TheoremId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_hypotheses: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<Property>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top; command, f, eta, a, b, x, alpha, side, nodes, max_panels, method, tol, theorem,
            domain, p, q, remark_base, check_hypotheses, seed, grid_points, samples, property,
            derivative_power, alpha_grid, family, budget, format, out)
    }

    /// The part of the configuration that determines the computed values.
    pub fn reproducible(&self) -> RunConfig {
        RunConfig { out: None, format: None, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file_values() {
        let file = RunConfig { f: Some("x".into()), alpha: Some(0.5), seed: Some(3), ..Default::default() };
        let flags = RunConfig { alpha: Some(0.75), ..Default::default() };
        let merged = file.overlay(flags);
        assert_eq!(merged.alpha, Some(0.75));
        assert_eq!(merged.f.as_deref(), Some("x"));
        assert_eq!(merged.seed, Some(3));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"f": "x", "alpah": 1}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"theorem": "T1_3", "property": "condition-c"}"#).unwrap();
        assert_eq!(c.theorem, Some(TheoremId::T1_3));
        assert_eq!(c.property, Some(Property::ConditionC));
    }

    #[test]
    fn shipped_schema_lists_exactly_the_config_fields() {
        let schema: serde_json::Value =
            serde_json::from_str(include_str!("../../../docs/run_config.schema.json")).unwrap();
        assert_eq!(schema["additionalProperties"], serde_json::Value::Bool(false));
        let mut documented: Vec<String> = schema["properties"].as_object().unwrap().keys().cloned().collect();
        documented.sort();
        let full = RunConfig {
            command: Some(String::new()),
            f: Some(String::new()),
            eta: Some(String::new()),
            a: Some(0.0),
            b: Some(0.0),
            x: Some(0.0),
            alpha: Some(0.0),
            side: Some(Side::Left),
            nodes: Some(1),
            max_panels: Some(1),
            method: Some(QuadMethod::DesingularizedGauss),
            tol: Some(0.0),
            theorem: Some(TheoremId::T1_2),
            domain: Some([0.0, 1.0]),
            p: Some(2.0),
            q: Some(2.0),
            remark_base: Some(TheoremId::T2_2),
            check_hypotheses: Some(true),
            seed: Some(0),
            grid_points: Some(1),
            samples: Some(1),
            property: Some(Property::Preinvex),
            derivative_power: Some(1.0),
            alpha_grid: Some(String::new()),
            family: Some(String::new()),
            budget: Some(1),
            format: Some(Format::Json),
            out: Some(PathBuf::new()),
        };
        let mut fields: Vec<String> =
            serde_json::to_value(full).unwrap().as_object().unwrap().keys().cloned().collect();
        fields.sort();
        assert_eq!(documented, fields);
    }
}
