//! Config loading and scenario tags.

use std::path::Path;

use qtm_core::model::config::{parse_config, Config};
use qtm_core::model::scenario_tags;
use qtm_core::{DissipationMode, Scenario};

use crate::CliError;

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn parse_tag(tag: &str) -> Option<(DissipationMode, u8)> {
    let (mode, kind) = tag.split_at(tag.len().checked_sub(1)?);
    let mode = DissipationMode::ALL.into_iter().find(|m| m.tag() == mode)?;
    let kind = match kind {
        "0" => 0,
        "1" => 1,
        "2" => 2,
        _ => return None,
    };
    Some((mode, kind))
}

/// `(tag, scenario)` pairs in the order requested.
pub fn scenarios(config: &Config, list: Option<&str>) -> Result<Vec<(String, Scenario)>, CliError> {
    let Some(list) = list else {
        return Ok(vec![(config.scenario.tag(), config.scenario.clone())]);
    };
    let tags: Vec<String> = if list.trim() == "all" {
        scenario_tags().iter().map(|t| t.0.to_string()).collect()
    } else {
        list.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
    };
    if tags.is_empty() {
        return Err(CliError::Invalid("--scenarios is empty".into()));
    }
    let mut out = Vec::new();
    for tag in tags {
        let (mode, kind) = parse_tag(&tag).ok_or_else(|| {
            CliError::Invalid(format!("unknown scenario tag {tag:?} (expected e.g. com1, cas2, ind1 or all)"))
        })?;
        let interaction = config.interaction_of_kind(kind).ok_or_else(|| {
            let key = if kind == 1 { "omega_matrix" } else { "omega_vector" };
            CliError::Invalid(format!("scenario {tag} needs {key} in [interaction]"))
        })?;
        let s = config.scenario.with_mode(mode).with_interaction(interaction)?;
        if out.iter().any(|(t, _)| *t == tag) {
            continue;
        }
        out.push((tag, s));
    }
    Ok(out)
}

pub fn tau_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| CliError::Invalid(format!("--tau entry {t:?} is not a number")))?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Invalid(format!("--tau entries must be positive, got {v}")));
            }
            Ok(v)
        })
        .collect()
}
