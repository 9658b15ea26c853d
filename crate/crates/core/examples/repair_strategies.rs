//! Rebuilds each node of the k = 3 example with both strategies and prints
//! where the work goes.

use hadamard_msr::{encode, CodeParams, OpCounter, Phase, RepairPlan, Strategy};

fn main() -> hadamard_msr::Result<()> {
    let params = CodeParams::example_k3();
    let f = params.field();
    let data: Vec<Vec<_>> =
        (0..params.k()).map(|i| (0..params.n()).map(|t| f.elem((i * i + 7 * t) as i64)).collect()).collect();
    let codeword = encode(&params, &data)?;

    for node in 1..=params.node_count() {
        for strategy in Strategy::ALL {
            let plan = RepairPlan::build(&params, node, strategy)?;
            let mut counter = OpCounter::new();
            let rebuilt = plan.execute(&codeword.without(node), &mut counter)?;
            assert_eq!(rebuilt, codeword.node(node));
            let phases: Vec<String> = [Phase::Download, Phase::Cancel, Phase::Recover]
                .iter()
                .map(|&p| format!("{}={}/{}", p.name(), counter.adds_in(p), counter.muls_in(p)))
                .collect();
            println!(
                "node {node} ({}, {strategy:>8}): helpers {:?}, {} symbols, add/mul {}",
                plan.class(),
                plan.helper_nodes(),
                plan.downloaded_symbols(),
                phases.join(" ")
            );
        }
    }

    // the cancellation diagonal for node 1 with the standard basis
    let plan = RepairPlan::build(&params, 1, Strategy::New)?;
    for (node, b) in plan.cancel_diagonals() {
        let v: Vec<u32> = b.entries().iter().map(|x| x.value()).collect();
        println!("B_{node} = diag{v:?}");
    }
    Ok(())
}
