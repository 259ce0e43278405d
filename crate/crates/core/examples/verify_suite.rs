//! The invariant suite behind `sirdyn verify`, at default and at 100x looser
//! integrator tolerances.

use sir_dynamics::cli::verify::{run_verify, VerifyOptions};

fn main() {
    for scale in [1.0, 100.0] {
        let report = run_verify(VerifyOptions {
            tolerance_scale: scale,
            ..VerifyOptions::default()
        });
        println!(
            "tolerance scale {scale}: {} passed, {} failed",
            report.passed, report.failed
        );
        for c in &report.checks {
            println!(
                "  {} {:<30} {:.3e} (limit {:.1e})",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.measured,
                c.limit
            );
        }
    }
}
