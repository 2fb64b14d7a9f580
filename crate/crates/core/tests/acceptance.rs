//! Acceptance suite: one PASS/FAIL line per criterion. Criteria listed as
//! known-unattainable are reported but do not fail the run.

use std::process::ExitCode;

use cubic_lab::verify::{run_criterion, Status, VerifyOptions, CRITERIA};

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let mut unexpected = Vec::new();
    for c in CRITERIA {
        let r = run_criterion(c, &opts);
        let verdict = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let note = if r.status == Status::Fail && r.known_unattainable { " [known unattainable]" } else { "" };
        println!("criterion {} {verdict} {} ({:.2}s){note}", r.id, r.title, r.runtime_s);
        for s in &r.checks {
            let mark = match s.status {
                Status::Pass => "ok",
                Status::Fail => "FAILED",
                Status::Skipped => "skipped",
            };
            println!("    {mark:<7} {}: {} (need {})", s.key, s.measured, s.requirement);
        }
        if r.status == Status::Fail && !r.known_unattainable {
            unexpected.push(r.id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
