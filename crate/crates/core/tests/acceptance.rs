//! Acceptance run: one line per criterion, nonzero exit on any failure.
//! `ACCEPTANCE_ONLY=3,5` restricts the run to the listed criteria.

use pursuit::suites::{run_criterion, SuiteConfig, SUITES};

fn main() {
    let only: Option<Vec<u8>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let cfg = SuiteConfig::default();
    let mut failed = 0;
    for &(_, id) in SUITES {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let report = run_criterion(id, &cfg);
        println!("{}", report.line());
        failed += usize::from(!report.passed);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
