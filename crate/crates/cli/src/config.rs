//! Experiment configuration: JSON-schema-validated, strictly typed.

use serde::{Deserialize, Serialize};

use gaugelab::gauge::GroupTag;
use gaugelab::geometry::{CurveSpec, FieldSpec};
use gaugelab::hilbert::FrameState;

pub const CONFIG_SCHEMA: &str = include_str!("../../../schemas/experiment-config.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    OracleCheck,
    Convergence,
    Continuity,
    Energy,
    Support,
    Weyl,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::OracleCheck => "oracle-check",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Continuity => "continuity",
            ExperimentKind::Energy => "energy",
            ExperimentKind::Support => "support",
            ExperimentKind::Weyl => "weyl",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub d: usize,
    pub group: GroupTag,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_from: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plaquette_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<CurveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<FrameState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

/// Parse and validate a config document: first against the published JSON
/// schema, then into the typed struct with physical range checks.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, String> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("config is not valid JSON: {e}"))?;
    let schema: serde_json::Value =
        serde_json::from_str(CONFIG_SCHEMA).expect("embedded schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("embedded schema compiles");
    let mut problems: Vec<String> = validator
        .iter_errors(&raw)
        .map(|err| {
            let path = err.instance_path().to_string();
            if path.is_empty() {
                format!("{}", err)
            } else {
                format!("{path}: {err}")
            }
        })
        .collect();
    if !problems.is_empty() {
        problems.sort();
        return Err(format!("schema violations: {}", problems.join("; ")));
    }
    let config: ExperimentConfig =
        serde_json::from_value(raw).map_err(|e| format!("config field error: {e}"))?;
    validate_ranges(&config)?;
    Ok(config)
}

fn validate_ranges(c: &ExperimentConfig) -> Result<(), String> {
    if !(1..=3).contains(&c.d) {
        return Err(format!("field 'd': {} is outside 1..=3", c.d));
    }
    if !(c.p > 0.0) {
        return Err(format!("field 'p': {} must be positive", c.p));
    }
    if let Some(eps) = c.epsilon {
        if !(eps > 0.0 && eps <= std::f64::consts::FRAC_PI_4) {
            return Err(format!("field 'epsilon': {eps} outside (0, π/4]"));
        }
    }
    if let Some(t) = c.t {
        if !(t > 0.0) {
            return Err(format!("field 't': {t} must be positive"));
        }
    }
    if let Some(list) = &c.t_list {
        if list.iter().any(|&t| !(t > 0.0)) {
            return Err("field 't_list': entries must be positive".into());
        }
    }
    if let Some(n) = c.n_samples {
        if n == 0 {
            return Err("field 'n_samples': must be at least 1".into());
        }
    }
    if let Some(list) = &c.k_list {
        if list.is_empty() {
            return Err("field 'k_list': must be nonempty".into());
        }
    }
    if let Some(a) = c.envelope_a {
        if !(a > 0.0) {
            return Err(format!("field 'envelope_a': {a} must be positive"));
        }
    }
    if let Some(l) = c.envelope_l {
        if l < 2 {
            return Err(format!("field 'envelope_l': {l} must be ≥ 2"));
        }
    }
    match c.kind {
        ExperimentKind::OracleCheck | ExperimentKind::Convergence | ExperimentKind::Continuity => {
            if c.group != GroupTag::U1 {
                return Err(format!(
                    "field 'group': kind {} uses abelian closed forms; set \"u1\"",
                    c.kind.as_str()
                ));
            }
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(
            r#"{"kind": "weyl", "seed": 1, "d": 2, "group": "u1", "p": 1.0, "k": 4000}"#,
        )
        .unwrap();
        assert_eq!(c.kind, ExperimentKind::Weyl);
        assert_eq!(c.k, Some(4000));
    }

    #[test]
    fn missing_group_names_the_field() {
        let err = parse_config(r#"{"kind": "oracle-check", "seed": 1, "d": 1, "p": 1.0}"#)
            .unwrap_err();
        assert!(err.contains("group"), "message was: {err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse_config(
            r#"{"kind": "weyl", "seed": 1, "d": 2, "group": "u1", "p": 1.0, "bogus": 3}"#,
        )
        .unwrap_err();
        assert!(err.contains("bogus"), "message was: {err}");
    }

    #[test]
    fn out_of_range_epsilon_is_rejected() {
        let err = parse_config(
            r#"{"kind": "energy", "seed": 1, "d": 2, "group": "u1", "p": 1.0, "epsilon": 2.0}"#,
        )
        .unwrap_err();
        assert!(err.contains("epsilon"), "message was: {err}");
    }

    #[test]
    fn schema_and_struct_agree_on_field_names() {
        let schema: serde_json::Value = serde_json::from_str(CONFIG_SCHEMA).unwrap();
        let props = schema["properties"].as_object().unwrap();
        // round-trip a fully populated config; every key must be known to
        // the schema and vice versa
        let full = ExperimentConfig {
            kind: ExperimentKind::Energy,
            seed: 1,
            d: 2,
            group: GroupTag::U1,
            p: 1.0,
            k: Some(4),
            k_list: Some(vec![1]),
            n_samples: Some(10),
            t: Some(1.0),
            t_list: Some(vec![1.0]),
            epsilon: Some(0.2),
            s_list: Some(vec![1.0, 2.0]),
            envelope_a: Some(2.0),
            envelope_l: Some(2),
            arc_length: Some(1.0),
            tail_from: Some(1),
            tail_bound: Some(1e-3),
            plaquette_grid: Some(2),
            path: None,
            field: None,
            state: None,
            out_dir: Some(".".into()),
        };
        let as_json = serde_json::to_value(&full).unwrap();
        for key in as_json.as_object().unwrap().keys() {
            assert!(props.contains_key(key), "schema missing property {key}");
        }
        for key in props.keys() {
            // path/field/state are optional structured fields not exercised above
            let known = as_json.as_object().unwrap().contains_key(key)
                || ["path", "field", "state"].contains(&key.as_str());
            assert!(known, "struct missing schema property {key}");
        }
    }
}
