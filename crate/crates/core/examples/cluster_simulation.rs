//! Encodes a file into a temporary cluster, kills and repairs every node,
//! then survives a double failure.

use hadamard_msr::cluster::{cmd_decode, cmd_kill, cmd_repair, encode_bytes, Cluster};
use hadamard_msr::{CodeParams, Strategy};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let mut bytes = vec![0u8; 16 * 1024];
    ChaCha8Rng::seed_from_u64(42).fill_bytes(&mut bytes);

    let root = std::env::temp_dir().join(format!("hmsr-demo-{}", std::process::id()));
    let params = CodeParams::search_with_modulus(3, 257)?;
    encode_bytes(&bytes, &root, &params)?;
    let cluster = Cluster::open(&root)?;
    println!("{} chunks under {}", cluster.manifest().chunk_count, root.display());

    for node in 1..=params.node_count() {
        cmd_kill(&cluster, node, false)?;
        let outcome = cmd_repair(&cluster, node, Strategy::New)?;
        println!("{outcome}");
    }

    cmd_kill(&cluster, 2, false)?;
    cmd_kill(&cluster, 5, false)?;
    assert_eq!(cmd_decode(&cluster)?, bytes);
    println!("decoded with nodes 2 and 5 down");

    std::fs::remove_dir_all(&root)?;
    Ok(())
}
