//! Measures every repair of the two worked examples under both strategies.

use hadamard_msr::metering::emit_table;
use hadamard_msr::CodeParams;

fn main() -> hadamard_msr::Result<()> {
    for params in [CodeParams::example_k2(), CodeParams::example_k3()] {
        let table = emit_table(&params)?;
        println!("{}", table.to_text());
    }
    Ok(())
}
