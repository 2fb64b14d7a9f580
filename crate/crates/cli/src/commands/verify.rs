//! `verify`: runs every acceptance criterion and writes the report.

use cubic_lab::verify::{run_all, Expectations, Status, VerifyOptions, CRITERIA};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{usage, Invocation, Outcome};
use crate::config::NoKeys;
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    /// Criterion or sub-check keys to skip.
    pub skip: Vec<String>,
    pub tangency_n: u32,
    pub lyapunov_steps: usize,
    /// Reference constants the criteria compare against.
    #[serde(flatten)]
    pub expectations: Expectations,
}

impl Default for Params {
    fn default() -> Self {
        let o = VerifyOptions::default();
        Params {
            skip: Vec::new(),
            tangency_n: o.tangency_n,
            lyapunov_steps: o.lyapunov_steps,
            expectations: o.expectations,
        }
    }
}

pub fn run(inv: Invocation, flags: toml::Table) -> Result<Outcome, CliError> {
    let defaults = VerifyOptions::default();
    let (p, t, g, pending) = inv.resolve("verify", flags, (Params::default(), NoKeys {}, NoKeys {}), Some(defaults.seed))?;
    if p.tangency_n == 0 {
        return Err(usage("tangency_n must be at least 1"));
    }
    let opts = VerifyOptions {
        skip: p.skip.iter().cloned().collect(),
        expectations: p.expectations.clone(),
        tangency_n: p.tangency_n,
        lyapunov_steps: p.lyapunov_steps,
        seed: pending.seed().unwrap_or(defaults.seed),
    };
    let mut run = pending.open(&p, &t, &g)?;
    let report = run_all(&opts);

    for key in &p.skip {
        let matched = CRITERIA.iter().any(|c| c.key == key)
            || report.criteria.iter().flat_map(|c| &c.checks).any(|s| &s.key == key);
        if !matched {
            eprintln!("warning: skip key `{key}` matched no criterion or check");
        }
    }
    let table = report.table();
    print!("{table}");
    run.write_json("verify.json", &report)?;
    run.write_text("verify.txt", &table)?;

    let failed: Vec<String> = report
        .criteria
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| {
            let checks: Vec<&str> = c.checks.iter().filter(|s| s.status == Status::Fail).map(|s| s.key.as_str()).collect();
            format!("criterion {} ({}) failed: {}", c.id, c.title, checks.join(", "))
        })
        .collect();
    let summary = json!({
        "all_passed": report.all_passed,
        "failed": report.failed().iter().map(|c| c.id).collect::<Vec<_>>(),
        "skipped": report.criteria.iter().filter(|c| c.status == Status::Skipped).map(|c| c.id).collect::<Vec<_>>(),
        "unexpected_failures": report.unexpected_failures,
    });
    run.finish(report.all_passed, summary)?;
    Ok(Outcome { passed: report.all_passed, message: failed.join("; ") })
}
