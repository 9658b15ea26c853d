//! Encodes two data parts with the k = 2 example code and decodes after
//! losing every possible pair of nodes.

use hadamard_msr::{decode, encode, CodeParams};

fn main() -> hadamard_msr::Result<()> {
    let params = CodeParams::example_k2();
    let f = params.field();
    let data: Vec<Vec<_>> =
        (0..params.k()).map(|i| (0..params.n()).map(|t| f.elem((5 * i + t) as i64)).collect()).collect();
    let codeword = encode(&params, &data)?;

    for (id, node) in codeword.nodes().iter().enumerate() {
        let values: Vec<u32> = node.iter().map(|x| x.value()).collect();
        println!("node {}: {values:?}", id + 1);
    }

    for x in 1..=params.node_count() {
        for y in x + 1..=params.node_count() {
            let mut survivors = codeword.without(x);
            survivors.remove(&y);
            assert_eq!(decode(&params, &survivors)?, codeword);
            println!("lost {x} and {y}: decoded");
        }
    }
    Ok(())
}
