use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use hadamard_msr::cluster::{self, Cluster};
use hadamard_msr::{Error, Strategy};

/// Simulated storage cluster protected by a (k+2, k) Hadamard MSR code.
#[derive(Parser)]
#[command(name = "hmsr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a file into a new cluster directory.
    Encode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        q: Option<u32>,
        /// Use the published coefficients (k = 2 or 3).
        #[arg(long)]
        demo: bool,
    },
    /// Take a node offline.
    Kill {
        cluster: PathBuf,
        node: usize,
        #[arg(long)]
        force: bool,
    },
    /// Rebuild a dead node from the k + 1 others.
    Repair {
        cluster: PathBuf,
        node: usize,
        #[arg(long, default_value = "new")]
        strategy: Strategy,
        /// Print downloaded symbols and field-operation counts.
        #[arg(long)]
        report: bool,
        /// If other nodes are dead too, rebuild all dead nodes by decoding.
        #[arg(long)]
        fallback: bool,
    },
    /// Reconstruct the original file.
    Decode {
        cluster: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Computation load of every repair.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3])]
        k: Vec<usize>,
        /// Restrict to one strategy; both by default.
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long)]
        csv: bool,
    },
    /// Check code parameters and cluster integrity.
    Verify {
        cluster: Option<PathBuf>,
        /// `k,q`; uses the published coefficients when they exist for that pair.
        #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with = "cluster")]
        params: Option<Vec<u32>>,
    },
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Encode { input, out, k, q, demo } => {
            let params = cluster::choose_params(k, q, demo)?;
            let c = cluster::cmd_encode(&input, &out, &params)?;
            let m = c.manifest();
            println!(
                "encoded {} bytes into {} chunks on {} nodes (k={} q={} a={:?} b={:?})",
                m.original_length,
                m.chunk_count,
                k + 2,
                m.k,
                m.q,
                m.a,
                m.b
            );
        }
        Command::Kill { cluster, node, force } => {
            let c = Cluster::open(cluster)?;
            cluster::cmd_kill(&c, node, force)?;
            println!("node {node} killed; dead nodes: {:?}", c.dead());
        }
        Command::Repair { cluster, node, strategy, report, fallback } => {
            let c = Cluster::open(cluster)?;
            let outcome = match cluster::cmd_repair(&c, node, strategy) {
                Err(Error::InsufficientHelpers { dead, .. }) if fallback => {
                    eprintln!("nodes {dead:?} are also dead; rebuilding by decoding from the live nodes");
                    let rebuilt = cluster::rebuild_dead_nodes(&c)?;
                    println!("rebuilt nodes {rebuilt:?} by decoding");
                    return Ok(ExitCode::SUCCESS);
                }
                other => other?,
            };
            if report {
                println!("{outcome}");
            } else {
                println!("repaired node {node} ({} chunks)", outcome.chunks);
            }
        }
        Command::Decode { cluster, out } => {
            let c = Cluster::open(cluster)?;
            let bytes = cluster::cmd_decode(&c)?;
            fs::write(&out, &bytes).with_context(|| format!("writing {}", out.display()))?;
            println!("decoded {} bytes to {}", bytes.len(), out.display());
        }
        Command::Bench { k, strategy, csv } => {
            let strategies: Vec<Strategy> = strategy.map_or(Strategy::ALL.to_vec(), |s| vec![s]);
            print!("{}", cluster::cmd_bench(&k, &strategies, csv)?);
        }
        Command::Verify { cluster, params } => {
            let report = match (cluster, params) {
                (Some(root), None) => cluster::verify_cluster(&root)?,
                (None, Some(kq)) => {
                    let [k, q] = kq[..] else {
                        return Err(Error::Refused("--params expects `k,q`".into()).into());
                    };
                    let p = cluster::params_for(k as usize, q)?;
                    let vals = |v: &[hadamard_msr::Fe]| v.iter().map(|x| x.value()).collect::<Vec<_>>();
                    cluster::verify_params(p.k(), p.q(), &vals(p.a()), &vals(p.b()))
                }
                _ => return Err(Error::Refused("give a cluster directory or --params k,q".into()).into()),
            };
            println!("{report}");
            if !report.ok() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
