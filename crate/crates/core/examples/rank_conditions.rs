//! Checks the full-rank and interference-alignment conditions for the worked
//! examples, a searched k = 4 code and a deliberately broken one.

use hadamard_msr::repair::verify_rank_conditions;
use hadamard_msr::{CodeParams, Strategy};

fn main() -> hadamard_msr::Result<()> {
    let cases = [
        ("k=2 example", CodeParams::example_k2()),
        ("k=3 example", CodeParams::example_k3()),
        ("k=4 searched", CodeParams::search(4)?),
        ("k=2, b_1 = 1", CodeParams::new_unchecked(2, 7, &[1, 1], &[1, 4])?),
    ];
    for (name, params) in &cases {
        for strategy in Strategy::ALL {
            let report = verify_rank_conditions(params, strategy);
            let failed = report.failures().count();
            println!("{name} {strategy}: {} checks, {failed} failed", report.checks.len());
            for check in report.failures() {
                println!("  {check}");
            }
        }
    }
    Ok(())
}
