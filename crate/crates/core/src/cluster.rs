//! A storage cluster simulated as a directory tree.
//!
//! ```text
//! root/manifest.txt
//! root/node-01/chunk-000000.shard
//! ...
//! root/node-{k+2}/chunk-{chunk_count-1}.shard
//! ```
//!
//! Killing a node renames its shards to `*.shard.dead` and drops a `DEAD`
//! marker in its directory. Repair talks to helpers only through
//! [`TransferMeter`], so the symbols each helper sends are counted.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{chunk_file, coefficient_violations, decode, encode, unchunk, CodeParams, Packing};
use crate::error::{Error, Result};
use crate::field::{Fe, OpCounter, PrimeField};
use crate::metering::{emit_table, CostReport, CostTable};
use crate::repair::{verify_rank_conditions, RepairPlan, Strategy};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const MANIFEST_VERSION: u32 = 1;
pub const SHARD_MAGIC: &[u8; 4] = b"HMSR";
pub const SHARD_VERSION: u8 = 1;
pub const SHARD_HEADER_LEN: usize = 18;
pub const DEFAULT_Q: u32 = 257;
const DEAD_MARKER: &str = "DEAD";

/// Dense rank checks are skipped above this `k`.
const MAX_RANK_CHECK_K: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub version: u32,
    pub k: usize,
    pub q: u32,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub chunk_count: usize,
    pub original_length: u64,
    /// Bits of file data per symbol.
    pub packing: u32,
}

impl Manifest {
    pub fn for_params(params: &CodeParams, packing: Packing, chunk_count: usize, original_length: u64) -> Self {
        Manifest {
            version: MANIFEST_VERSION,
            k: params.k(),
            q: params.q(),
            a: params.a().iter().map(|x| x.value()).collect(),
            b: params.b().iter().map(|x| x.value()).collect(),
            chunk_count,
            original_length,
            packing: packing.bits(),
        }
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        format!(
            "version: {}\nk: {}\nq: {}\na: {}\nb: {}\nchunk_count: {}\noriginal_length: {}\npacking: {}\n",
            self.version,
            self.k,
            self.q,
            join(&self.a),
            join(&self.b),
            self.chunk_count,
            self.original_length,
            self.packing
        )
    }

    /// Parses without validating the code parameters.
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Corrupt(format!("manifest line {}: expected `key: value`", no + 1)))?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }
        fn get<'a>(fields: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
            fields.get(key).map(String::as_str).ok_or_else(|| Error::Corrupt(format!("manifest is missing `{key}`")))
        }
        fn num<T: std::str::FromStr>(fields: &BTreeMap<String, String>, key: &str) -> Result<T> {
            get(fields, key)?.parse().map_err(|_| Error::Corrupt(format!("manifest `{key}` is not a number")))
        }
        let list = |key: &str| -> Result<Vec<u32>> {
            get(&fields, key)?
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| Error::Corrupt(format!("manifest `{key}` is not a list of integers")))
                })
                .collect()
        };
        let manifest = Manifest {
            version: num(&fields, "version")?,
            k: num(&fields, "k")?,
            q: num(&fields, "q")?,
            a: list("a")?,
            b: list("b")?,
            chunk_count: num(&fields, "chunk_count")?,
            original_length: num(&fields, "original_length")?,
            packing: num(&fields, "packing")?,
        };
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::Corrupt(format!("unsupported manifest version {}", manifest.version)));
        }
        Ok(manifest)
    }

    /// Validated code parameters.
    pub fn params(&self) -> Result<CodeParams> {
        CodeParams::new(self.k, self.q, &self.a, &self.b)
    }

    pub fn packing(&self) -> Result<Packing> {
        Packing::with_bits(self.packing, self.q)
    }

    /// Checks that the chunks can hold the packed file.
    pub fn check_capacity(&self, params: &CodeParams) -> Result<()> {
        let needed = self.packing()?.symbols_for(self.original_length as usize);
        let capacity = self.chunk_count * params.k() * params.n();
        if capacity < needed {
            return Err(Error::Corrupt(format!(
                "{} chunks hold {capacity} symbols but {needed} are needed",
                self.chunk_count
            )));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

/// One node's symbols for one chunk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shard {
    pub k: u8,
    pub q: u16,
    pub node: u16,
    pub chunk: u32,
    pub symbols: Vec<Fe>,
}

impl Shard {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SHARD_HEADER_LEN + 2 * self.symbols.len());
        out.extend_from_slice(SHARD_MAGIC);
        out.push(SHARD_VERSION);
        out.push(self.k);
        out.extend_from_slice(&self.q.to_le_bytes());
        out.extend_from_slice(&self.node.to_le_bytes());
        out.extend_from_slice(&self.chunk.to_le_bytes());
        out.extend_from_slice(&(self.symbols.len() as u32).to_le_bytes());
        for s in &self.symbols {
            out.extend_from_slice(&(s.value() as u16).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < SHARD_HEADER_LEN {
            return Err(Error::Corrupt(format!("shard is {} bytes, shorter than its header", bytes.len())));
        }
        if &bytes[..4] != SHARD_MAGIC {
            return Err(Error::Corrupt("bad shard magic".into()));
        }
        if bytes[4] != SHARD_VERSION {
            return Err(Error::Corrupt(format!("unsupported shard version {}", bytes[4])));
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let u32_at = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
        let (k, q, node, chunk, count) = (bytes[5], u16_at(6), u16_at(8), u32_at(10), u32_at(14) as usize);
        let body = &bytes[SHARD_HEADER_LEN..];
        if body.len() != 2 * count {
            return Err(Error::Corrupt(format!("shard declares {count} symbols but holds {} bytes", body.len())));
        }
        let symbols = body
            .chunks_exact(2)
            .map(|c| {
                let v = u16::from_le_bytes([c[0], c[1]]) as u32;
                if v >= q as u32 {
                    return Err(Error::SymbolOutOfRange { value: v, q: q as u32 });
                }
                Ok(Fe(v))
            })
            .collect::<Result<_>>()?;
        Ok(Shard { k, q, node, chunk, symbols })
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Symbols sent by each helper to the repairing node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransferMeter {
    sent: BTreeMap<usize, u64>,
}

impl TransferMeter {
    pub fn record(&mut self, node: usize, symbols: usize) {
        *self.sent.entry(node).or_default() += symbols as u64;
    }

    pub fn per_node(&self) -> &BTreeMap<usize, u64> {
        &self.sent
    }

    pub fn total(&self) -> u64 {
        self.sent.values().sum()
    }
}

#[derive(Clone, Debug)]
pub struct Cluster {
    root: PathBuf,
    manifest: Manifest,
    params: CodeParams,
}

impl Cluster {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let manifest = Manifest::load(&root.join(MANIFEST_FILE))?;
        let params = manifest.params()?;
        manifest.check_capacity(&params)?;
        Ok(Cluster { root, manifest, params })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn node_dir(&self, node: usize) -> PathBuf {
        self.root.join(format!("node-{node:02}"))
    }

    pub fn shard_path(&self, node: usize, chunk: usize) -> PathBuf {
        self.node_dir(node).join(format!("chunk-{chunk:06}.shard"))
    }

    fn dead_path(&self, node: usize, chunk: usize) -> PathBuf {
        self.node_dir(node).join(format!("chunk-{chunk:06}.shard.dead"))
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node == 0 || node > self.params.node_count() {
            return Err(Error::InvalidNode(node));
        }
        Ok(())
    }

    pub fn is_alive(&self, node: usize) -> bool {
        !self.node_dir(node).join(DEAD_MARKER).exists()
            && (0..self.manifest.chunk_count).all(|c| self.shard_path(node, c).is_file())
    }

    pub fn alive(&self) -> BTreeSet<usize> {
        (1..=self.params.node_count()).filter(|&n| self.is_alive(n)).collect()
    }

    pub fn dead(&self) -> Vec<usize> {
        (1..=self.params.node_count()).filter(|&n| !self.is_alive(n)).collect()
    }

    /// Reads and checks one shard.
    pub fn read_shard(&self, node: usize, chunk: usize) -> Result<Vec<Fe>> {
        let path = self.shard_path(node, chunk);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let shard = Shard::from_bytes(&bytes).map_err(|e| match e {
            Error::Corrupt(m) => Error::Corrupt(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let expected = (self.params.k() as u8, self.params.q() as u16, node as u16, chunk as u32);
        if (shard.k, shard.q, shard.node, shard.chunk) != expected {
            return Err(Error::Corrupt(format!("{}: header does not match its location", path.display())));
        }
        if shard.symbols.len() != self.params.n() {
            return Err(Error::LengthMismatch { expected: self.params.n(), actual: shard.symbols.len() });
        }
        Ok(shard.symbols)
    }

    pub fn write_shard(&self, node: usize, chunk: usize, symbols: &[Fe]) -> Result<()> {
        let shard = Shard {
            k: self.params.k() as u8,
            q: self.params.q() as u16,
            node: node as u16,
            chunk: chunk as u32,
            symbols: symbols.to_vec(),
        };
        write_atomic(&self.shard_path(node, chunk), &shard.to_bytes())
    }
}

/// Code parameters for `encode`: the published pair for `--demo`, otherwise
/// a search over `F_q`.
pub fn choose_params(k: usize, q: Option<u32>, demo: bool) -> Result<CodeParams> {
    if demo {
        let params = CodeParams::published(k)
            .ok_or_else(|| Error::Refused(format!("no demo profile for k = {k} (only 2 and 3)")))?;
        if let Some(q) = q.filter(|&q| q != params.q()) {
            return Err(Error::Refused(format!("demo profile for k = {k} uses q = {}, not {q}", params.q())));
        }
        return Ok(params);
    }
    CodeParams::search_with_modulus(k, q.unwrap_or(DEFAULT_Q))
}

pub fn cmd_encode(input: &Path, out_dir: &Path, params: &CodeParams) -> Result<Cluster> {
    let bytes = fs::read(input).map_err(|e| Error::io(input, e))?;
    encode_bytes(&bytes, out_dir, params)
}

pub fn encode_bytes(bytes: &[u8], out_dir: &Path, params: &CodeParams) -> Result<Cluster> {
    match fs::read_dir(out_dir) {
        Ok(mut entries) => {
            if entries.next().is_some() {
                return Err(Error::Refused(format!("{} exists and is not empty", out_dir.display())));
            }
        }
        Err(e) if e.kind() == ErrorKind::NotFound => {}
        Err(e) => return Err(Error::io(out_dir, e)),
    }
    let packing = Packing::for_modulus(params.q());
    let blocks = chunk_file(params, packing, bytes);
    let manifest = Manifest::for_params(params, packing, blocks.len(), bytes.len() as u64);
    let cluster = Cluster { root: out_dir.to_path_buf(), manifest, params: params.clone() };
    for node in 1..=params.node_count() {
        let dir = cluster.node_dir(node);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    for (chunk, block) in blocks.iter().enumerate() {
        let codeword = encode(params, block)?;
        for node in 1..=params.node_count() {
            cluster.write_shard(node, chunk, codeword.node(node))?;
        }
    }
    cluster.manifest.save(&out_dir.join(MANIFEST_FILE))?;
    Ok(cluster)
}

pub fn cmd_kill(cluster: &Cluster, node: usize, force: bool) -> Result<()> {
    cluster.check_node(node)?;
    if !cluster.is_alive(node) {
        return Err(Error::Refused(format!("node {node} is already dead")));
    }
    let dead = cluster.dead().len() + 1;
    if dead > 2 && !force {
        return Err(Error::Refused(format!(
            "killing node {node} would leave {dead} nodes dead and the data unrecoverable; pass --force to do it anyway"
        )));
    }
    for chunk in 0..cluster.manifest.chunk_count {
        let (from, to) = (cluster.shard_path(node, chunk), cluster.dead_path(node, chunk));
        fs::rename(&from, &to).map_err(|e| Error::io(&from, e))?;
    }
    let marker = cluster.node_dir(node).join(DEAD_MARKER);
    fs::write(&marker, b"").map_err(|e| Error::io(&marker, e))
}

#[derive(Clone, Debug)]
pub struct RepairOutcome {
    pub node: usize,
    pub strategy: Strategy,
    pub chunks: usize,
    /// Summed over chunks; `None` when there are no chunks.
    pub cost: Option<CostReport>,
    pub transfer: TransferMeter,
}

impl fmt::Display for RepairOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "repaired node {} ({} strategy, {} chunks)", self.node, self.strategy, self.chunks)?;
        let helpers: Vec<String> = self.transfer.per_node().iter().map(|(n, s)| format!("{n}:{s}")).collect();
        write!(f, "downloaded symbols: {} [{}]", self.transfer.total(), helpers.join(" "))?;
        if let Some(c) = &self.cost {
            let per = |x: u64| x / self.chunks as u64;
            write!(
                f,
                "\nadds: {} ({} per chunk)\nmuls: {} ({} per chunk)\nphases (download/cancel/recover): adds {:?} muls {:?}",
                c.adds,
                per(c.adds),
                c.muls,
                per(c.muls),
                c.adds_by_phase,
                c.muls_by_phase
            )?;
        }
        Ok(())
    }
}

/// Helper side of a repair: reads the local shard and returns only the
/// projection the plan asks for.
fn serve(cluster: &Cluster, plan: &RepairPlan, node: usize, chunk: usize, counter: &mut OpCounter) -> Result<Vec<Fe>> {
    let content = cluster.read_shard(node, chunk)?;
    plan.download(node, &content, counter)
}

pub fn cmd_repair(cluster: &Cluster, node: usize, strategy: Strategy) -> Result<RepairOutcome> {
    cluster.check_node(node)?;
    if cluster.is_alive(node) {
        return Err(Error::Refused(format!("node {node} is alive; kill it first")));
    }
    let others: Vec<usize> = cluster.dead().into_iter().filter(|&n| n != node).collect();
    if !others.is_empty() {
        return Err(Error::InsufficientHelpers { node, dead: others });
    }
    let plan = RepairPlan::build(cluster.params(), node, strategy)?;
    let mut transfer = TransferMeter::default();
    let mut cost: Option<CostReport> = None;
    for chunk in 0..cluster.manifest.chunk_count {
        let mut counter = OpCounter::new();
        let mut downloads = BTreeMap::new();
        for helper in plan.helper_nodes() {
            let sent = serve(cluster, &plan, helper, chunk, &mut counter)?;
            transfer.record(helper, sent.len());
            downloads.insert(helper, sent);
        }
        let rebuilt = plan.finish(&downloads, &mut counter)?;
        cluster.write_shard(node, chunk, &rebuilt)?;
        let report = CostReport::from_counter(&plan, cluster.params().k(), &counter);
        match cost.as_mut() {
            Some(total) => total.accumulate(&report),
            None => cost = Some(report),
        }
    }
    for chunk in 0..cluster.manifest.chunk_count {
        let dead = cluster.dead_path(node, chunk);
        if let Err(e) = fs::remove_file(&dead) {
            if e.kind() != ErrorKind::NotFound {
                return Err(Error::io(&dead, e));
            }
        }
    }
    let marker = cluster.node_dir(node).join(DEAD_MARKER);
    fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    Ok(RepairOutcome { node, strategy, chunks: cluster.manifest.chunk_count, cost, transfer })
}

/// Rebuilds every dead node by decoding each chunk from the live ones and
/// re-encoding. Reads whole shards from `k` or more nodes, so it is the
/// fallback when fewer than `k + 1` helpers are alive.
pub fn rebuild_dead_nodes(cluster: &Cluster) -> Result<Vec<usize>> {
    let params = cluster.params();
    let alive = cluster.alive();
    let dead = cluster.dead();
    if alive.len() < params.k() {
        return Err(Error::NotEnoughNodes { available: alive.len(), needed: params.k() });
    }
    for chunk in 0..cluster.manifest.chunk_count {
        let mut available = BTreeMap::new();
        for &node in alive.iter().take(params.k()) {
            available.insert(node, cluster.read_shard(node, chunk)?);
        }
        let codeword = decode(params, &available)?;
        for &node in &dead {
            cluster.write_shard(node, chunk, codeword.node(node))?;
        }
    }
    for &node in &dead {
        for chunk in 0..cluster.manifest.chunk_count {
            let path = cluster.dead_path(node, chunk);
            if let Err(e) = fs::remove_file(&path) {
                if e.kind() != ErrorKind::NotFound {
                    return Err(Error::io(&path, e));
                }
            }
        }
        let marker = cluster.node_dir(node).join(DEAD_MARKER);
        fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    }
    Ok(dead)
}

pub fn cmd_decode(cluster: &Cluster) -> Result<Vec<u8>> {
    let params = cluster.params();
    let alive = cluster.alive();
    if alive.len() < params.k() {
        return Err(Error::NotEnoughNodes { available: alive.len(), needed: params.k() });
    }
    let mut blocks = Vec::with_capacity(cluster.manifest.chunk_count);
    for chunk in 0..cluster.manifest.chunk_count {
        let mut available = BTreeMap::new();
        for &node in &alive {
            available.insert(node, cluster.read_shard(node, chunk)?);
        }
        blocks.push(decode(params, &available)?.systematic().to_vec());
    }
    unchunk(params, cluster.manifest.packing()?, &blocks, cluster.manifest.original_length as usize)
}

/// Published parameters for `k` in `{2, 3}`, searched ones otherwise.
pub fn bench_params(k: usize) -> Result<CodeParams> {
    match CodeParams::published(k) {
        Some(p) => Ok(p),
        None => CodeParams::search(k),
    }
}

pub fn cmd_bench(ks: &[usize], strategies: &[Strategy], csv: bool) -> Result<String> {
    let mut tables: Vec<(CodeParams, CostTable)> = Vec::new();
    for &k in ks {
        let params = bench_params(k)?;
        let mut table = emit_table(&params)?;
        table.rows.retain(|r| strategies.contains(&r.report.strategy));
        tables.push((params, table));
    }
    if csv {
        let mut out = String::from(crate::metering::CSV_HEADER);
        out.push('\n');
        for (_, t) in &tables {
            for line in t.to_csv().lines().skip(1) {
                out.push_str(line);
                out.push('\n');
            }
        }
        return Ok(out);
    }
    let mut out = String::new();
    for (params, t) in &tables {
        let vals = |v: &[Fe]| v.iter().map(|x| x.value().to_string()).collect::<Vec<_>>().join(",");
        out.push_str(&format!("# k={} q={} a={} b={}\n", params.k(), params.q(), vals(params.a()), vals(params.b())));
        out.push_str(&t.to_lines());
    }
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub lines: Vec<(bool, String)>,
}

impl VerifyReport {
    fn push(&mut self, ok: bool, line: impl Into<String>) {
        self.lines.push((ok, line.into()));
    }

    pub fn ok(&self) -> bool {
        self.lines.iter().all(|(ok, _)| *ok)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (ok, line) in &self.lines {
            writeln!(f, "{} {line}", if *ok { "ok  " } else { "FAIL" })?;
        }
        write!(f, "{}", if self.ok() { "all checks passed" } else { "verification FAILED" })
    }
}

/// Published parameters when `(k, q)` matches a worked example, otherwise a
/// search over `F_q`.
pub fn params_for(k: usize, q: u32) -> Result<CodeParams> {
    match CodeParams::published(k) {
        Some(p) if p.q() == q => Ok(p),
        _ => CodeParams::search_with_modulus(k, q),
    }
}

/// Coefficient constraints, rank conditions for both strategies and a
/// decode of every double erasure.
pub fn verify_params(k: usize, q: u32, a: &[u32], b: &[u32]) -> VerifyReport {
    let mut report = VerifyReport::default();
    let params = match CodeParams::new_unchecked(k, q, a, b) {
        Ok(p) => p,
        Err(e) => {
            report.push(false, format!("parameters: {e}"));
            return report;
        }
    };
    let violations = coefficient_violations(params.field(), k, params.a(), params.b());
    if violations.is_empty() {
        report.push(true, format!("coefficients: k={k} q={q} a={a:?} b={b:?} satisfy all constraints"));
    } else {
        report.push(false, format!("coefficients: {}", violations.join("; ")));
    }

    if k <= MAX_RANK_CHECK_K {
        for strategy in Strategy::ALL {
            let rank = verify_rank_conditions(&params, strategy);
            let failures: Vec<String> = rank.failures().map(ToString::to_string).collect();
            let agree = rank.checks.iter().all(|c| c.methods_agree());
            let ok = failures.is_empty() && agree;
            let mut line = format!("rank conditions ({strategy}): {} checks", rank.checks.len());
            if !agree {
                line.push_str(", pair and elimination methods disagree");
            }
            for f in failures {
                line.push_str(&format!("\n       {f}"));
            }
            report.push(ok, line);
        }
    } else {
        report.push(true, format!("rank conditions: skipped for k > {MAX_RANK_CHECK_K}"));
    }

    if violations.is_empty() {
        report.push_decode_check(&params);
    }
    report
}

impl VerifyReport {
    fn push_decode_check(&mut self, params: &CodeParams) {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7665_7269);
        let f: &PrimeField = params.field();
        let data: Vec<Vec<Fe>> = (0..params.k())
            .map(|_| (0..params.n()).map(|_| f.elem(rng.gen_range(0..params.q() as i64))).collect())
            .collect();
        let outcome = encode(params, &data).and_then(|cw| {
            let m = params.node_count();
            let mut patterns = 0;
            for x in 1..=m {
                for y in x + 1..=m {
                    let mut available = cw.without(x);
                    available.remove(&y);
                    if decode(params, &available)? != cw {
                        return Err(Error::Corrupt(format!("decode without nodes {x} and {y} is wrong")));
                    }
                    patterns += 1;
                }
            }
            Ok(patterns)
        });
        match outcome {
            Ok(p) => self.push(true, format!("decoding: all {p} double-erasure patterns")),
            Err(e) => self.push(false, format!("decoding: {e}")),
        }
    }
}

/// [`verify_params`] on a cluster's manifest, plus shard integrity and parity
/// consistency of every chunk whose nodes are all alive.
pub fn verify_cluster(root: &Path) -> Result<VerifyReport> {
    let manifest = Manifest::load(&root.join(MANIFEST_FILE))?;
    let mut report = verify_params(manifest.k, manifest.q, &manifest.a, &manifest.b);
    if !report.ok() {
        return Ok(report);
    }
    let cluster = match Cluster::open(root) {
        Ok(c) => c,
        Err(e) => {
            report.push(false, format!("manifest: {e}"));
            return Ok(report);
        }
    };
    let params = cluster.params();
    let alive = cluster.alive();
    let dead = cluster.dead();
    report.push(dead.len() <= 2, format!("nodes: {} alive, dead {:?}", alive.len(), dead));
    let mut bad = Vec::new();
    let mut checked = 0;
    for chunk in 0..manifest.chunk_count {
        let mut shards = BTreeMap::new();
        for &node in &alive {
            match cluster.read_shard(node, chunk) {
                Ok(s) => {
                    shards.insert(node, s);
                }
                Err(e) => bad.push(format!("node {node} chunk {chunk}: {e}")),
            }
        }
        if shards.len() == params.node_count() {
            let data: Vec<Vec<Fe>> = (1..=params.k()).map(|i| shards[&i].clone()).collect();
            let cw = encode(params, &data)?;
            for node in params.k() + 1..=params.node_count() {
                if cw.node(node) != shards[&node].as_slice() {
                    bad.push(format!("node {node} chunk {chunk}: parity does not match the systematic nodes"));
                }
            }
            checked += 1;
        }
    }
    if bad.is_empty() {
        report.push(true, format!("shards: {} chunks readable, parity consistent in {checked}", manifest.chunk_count));
    } else {
        report.push(false, format!("shards: {}", bad.join("; ")));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_cluster(bytes: &[u8], params: &CodeParams) -> (tempfile::TempDir, Cluster) {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("c");
        let cluster = encode_bytes(bytes, &root, params).unwrap();
        (dir, cluster)
    }

    #[test]
    fn shard_format_is_bit_exact() {
        let shard = Shard { k: 2, q: 257, node: 3, chunk: 0x0102_0304, symbols: vec![Fe(1), Fe(256)] };
        let bytes = shard.to_bytes();
        assert_eq!(bytes, [b'H', b'M', b'S', b'R', 1, 2, 1, 1, 3, 0, 4, 3, 2, 1, 2, 0, 0, 0, 1, 0, 0, 1]);
        assert_eq!(Shard::from_bytes(&bytes).unwrap(), shard);
        let mut bad = bytes.clone();
        bad[20] = 2;
        assert!(matches!(Shard::from_bytes(&bad), Err(Error::SymbolOutOfRange { .. })));
        assert!(Shard::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Shard::from_bytes(&bad).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let m = Manifest::for_params(&CodeParams::example_k3(), Packing::for_modulus(11), 4, 100);
        let text = m.to_text();
        assert!(text.contains("a: 2,2,6\n"));
        assert_eq!(Manifest::parse(&text).unwrap(), m);
        assert!(Manifest::parse("version: 1\n").is_err());
        assert!(Manifest::parse(&text.replace("version: 1", "version: 9")).is_err());
    }

    #[test]
    fn empty_file() {
        let (_d, c) = temp_cluster(&[], &CodeParams::example_k2());
        assert_eq!(c.manifest().chunk_count, 0);
        assert_eq!(cmd_decode(&c).unwrap(), Vec::<u8>::new());
        cmd_kill(&c, 2, false).unwrap();
        assert_eq!(c.dead(), vec![2]);
        let out = cmd_repair(&c, 2, Strategy::New).unwrap();
        assert!(out.cost.is_none());
        assert!(c.dead().is_empty());
    }

    #[test]
    fn kill_rules() {
        let (_d, c) = temp_cluster(b"hello world", &CodeParams::example_k2());
        cmd_kill(&c, 1, false).unwrap();
        assert!(matches!(cmd_kill(&c, 1, false), Err(Error::Refused(_))));
        cmd_kill(&c, 3, false).unwrap();
        assert_eq!(cmd_decode(&c).unwrap(), b"hello world");
        assert!(matches!(cmd_kill(&c, 2, false), Err(Error::Refused(_))));
        assert!(matches!(cmd_repair(&c, 1, Strategy::New), Err(Error::InsufficientHelpers { .. })));
        let before: Vec<u8> = fs::read(c.dead_path(1, 0)).unwrap();
        assert_eq!(rebuild_dead_nodes(&c).unwrap(), vec![1, 3]);
        assert_eq!(fs::read(c.shard_path(1, 0)).unwrap(), before);
        assert!(c.dead().is_empty());
        cmd_kill(&c, 1, false).unwrap();
        cmd_kill(&c, 3, false).unwrap();
        cmd_kill(&c, 2, true).unwrap();
        assert!(matches!(rebuild_dead_nodes(&c), Err(Error::NotEnoughNodes { .. })));
        assert_eq!(cmd_decode(&c).unwrap_err().exit_code(), 3);
        assert!(matches!(cmd_kill(&c, 9, false), Err(Error::InvalidNode(9))));
    }

    #[test]
    fn repair_restores_shards() {
        let bytes: Vec<u8> = (0..700u32).map(|x| (x * 31 % 251) as u8).collect();
        let (_d, c) = temp_cluster(&bytes, &CodeParams::example_k2());
        for strategy in Strategy::ALL {
            for node in 1..=4 {
                let before: Vec<Vec<u8>> =
                    (0..c.manifest().chunk_count).map(|ch| fs::read(c.shard_path(node, ch)).unwrap()).collect();
                cmd_kill(&c, node, false).unwrap();
                assert!(matches!(cmd_repair(&c, (node % 4) + 1, strategy), Err(Error::Refused(_))));
                let out = cmd_repair(&c, node, strategy).unwrap();
                let chunks = c.manifest().chunk_count as u64;
                assert_eq!(out.transfer.total(), chunks * 3 * 4);
                assert!(out.transfer.per_node().values().all(|&s| s == chunks * 4));
                if strategy == Strategy::New {
                    assert_eq!(out.cost.as_ref().unwrap().adds, chunks * 28);
                }
                for (ch, b) in before.iter().enumerate() {
                    assert_eq!(&fs::read(c.shard_path(node, ch)).unwrap(), b);
                }
            }
        }
        assert_eq!(cmd_decode(&c).unwrap(), bytes);
    }

    #[test]
    fn verify_examples_and_tampering() {
        assert!(verify_params(2, 7, &[1, 1], &[3, 4]).ok());
        assert!(verify_params(3, 11, &[2, 2, 6], &[7, 4, 2]).ok());
        assert!(!verify_params(2, 7, &[0, 1], &[3, 4]).ok());
        assert!(!verify_params(2, 8, &[1, 1], &[3, 4]).ok());

        let (d, c) = temp_cluster(b"some data to protect", &CodeParams::example_k2());
        assert!(verify_cluster(c.root()).unwrap().ok());
        let path = c.root().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).unwrap().replace("a: 1,1", "a: 0,1");
        fs::write(&path, text).unwrap();
        assert!(!verify_cluster(c.root()).unwrap().ok());
        drop(d);
    }

    #[test]
    fn verify_detects_parity_corruption() {
        let (_d, c) = temp_cluster(&[7u8; 64], &CodeParams::example_k2());
        let mut s = c.read_shard(4, 0).unwrap();
        s[0] = c.params().field().add(s[0], Fe::ONE);
        c.write_shard(4, 0, &s).unwrap();
        let report = verify_cluster(c.root()).unwrap();
        assert!(!report.ok());
        assert!(report.to_string().contains("parity does not match"));
    }

    #[test]
    fn bench_lines_and_csv() {
        let text = cmd_bench(&[2], &Strategy::ALL, false).unwrap();
        assert!(text.contains("node=1 strategy=new add=28"));
        let csv = cmd_bench(&[2, 3], &[Strategy::New], true).unwrap();
        assert_eq!(csv.lines().next(), Some(crate::metering::CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + 4 + 5);
    }

    #[test]
    fn choose_params_profiles() {
        assert_eq!(choose_params(2, None, true).unwrap(), CodeParams::example_k2());
        assert!(choose_params(4, None, true).is_err());
        assert!(choose_params(2, Some(11), true).is_err());
        assert_eq!(choose_params(3, None, false).unwrap().q(), DEFAULT_Q);
    }
}
