use spinchain::acceptance::{self, CriterionResult, Settings};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub fn settings(cfg: Option<&ExperimentConfig>) -> Settings {
    let Some(cfg) = cfg else { return Settings::default() };
    let j = cfg.chain.j;
    let timing_j = cfg.acceptance.as_ref().and_then(|a| a.timing_j).unwrap_or(j);
    Settings { j, timing_j }
}

/// Runs the matching criteria. Errs when nothing matches `filter`.
pub fn run(cfg: Option<&ExperimentConfig>, filter: Option<&str>) -> CliResult<Vec<CriterionResult>> {
    let rows = acceptance::run(&settings(cfg), filter);
    if rows.is_empty() {
        return Err(CliError::config(format!("--filter {:?} matches no criterion", filter.unwrap_or(""))));
    }
    Ok(rows)
}

pub fn render(rows: &[CriterionResult]) -> String {
    let mut out: String = rows.iter().map(|r| format!("{r}\n")).collect();
    let passed = rows.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed} passed, {} failed\n", rows.len() - passed));
    out
}
