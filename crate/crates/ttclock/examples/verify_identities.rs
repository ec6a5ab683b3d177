//! Runs the full identity-verification suite on a trapezoid barrier and
//! prints the report.
//!
//! ```bash
//! cargo run --example verify_identities
//! ```

use std::f64::consts::PI;

use ttclock::analysis::Scenario;
use ttclock::spin_meter::postselection_overlaps;
use ttclock::verify::run_all_identities;
use ttclock::{linspace, BarrierSpec, UnitSystem};

fn main() {
    let k0 = 3.0 * PI;
    let barrier =
        BarrierSpec::trapezoid(k0 * k0, 0.5 * k0 * k0, 1.0, UnitSystem::default()).unwrap();
    let spin = postselection_overlaps(PI / 2.0 - PI / 8.0, PI / 4.0).unwrap();
    let sc = Scenario::new(barrier, spin);
    let ks = linspace(0.1 * k0, 0.9 * k0, 9);

    println!("identity report: trapezoid barrier, 9 k-points\n");
    let reports = run_all_identities(&sc, &ks, 0);
    let mut failures = 0;
    for r in &reports {
        match &r.skipped {
            Some(reason) => println!("{:<34} SKIP   ({reason})", r.name),
            None => {
                let verdict = if r.passed { "PASS" } else { "FAIL" };
                if !r.passed {
                    failures += 1;
                }
                println!(
                    "{:<34} {verdict}   residual {:.3e}  tolerance {:.3e}",
                    r.name, r.abs_residual, r.tolerance
                );
            }
        }
    }
    println!("\n{} checks, {failures} failures", reports.len());
}
