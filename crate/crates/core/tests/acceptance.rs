//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fail.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hadamard_msr::cluster::{cmd_decode, cmd_kill, cmd_repair, encode_bytes, rebuild_dead_nodes};
use hadamard_msr::codec::validate_coefficients;
use hadamard_msr::design::{fast_hadamard_apply, lemma1_relation, lemma2_partner, sign_vector, Relation};
use hadamard_msr::metering::{bound_formulas, measure_repair, published_reference};
use hadamard_msr::repair::{
    parity1_repair_matrices, parity2_repair_matrices, systematic_repair_matrix, verify_rank_conditions, BasisKind,
};
use hadamard_msr::{decode, encode, CodeParams, Codeword, Fe, NodeClass, OpCounter, RepairPlan, Strategy};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(k: usize) -> CodeParams {
    CodeParams::published(k).unwrap_or_else(|| CodeParams::search(k).expect("searched coefficients"))
}

fn random_codeword(p: &CodeParams, rng: &mut ChaCha8Rng) -> Codeword {
    let data: Vec<Vec<Fe>> =
        (0..p.k()).map(|_| (0..p.n()).map(|_| p.field().elem(rng.gen_range(0..p.q() as i64))).collect()).collect();
    encode(p, &data).expect("encode")
}

fn c1_coefficients() -> Outcome {
    validate_coefficients(2, 7, &[1, 1], &[3, 4]).map_err(|e| e.to_string())?;
    validate_coefficients(3, 11, &[2, 2, 6], &[7, 4, 2]).map_err(|e| e.to_string())?;
    Ok("both worked examples satisfy every constraint".into())
}

fn c2_repair_matrices() -> Outcome {
    fn grid(rows: [[i64; 8]; 4]) -> Vec<Vec<i64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }
    let s1 =
        grid([[1, 0, 1, 0, 0, 0, 0, 0], [0, 1, 0, 1, 0, 0, 0, 0], [0, 0, 0, 0, 1, 0, 1, 0], [0, 0, 0, 0, 0, 1, 0, 1]]);
    let s2 =
        grid([[1, 0, 0, 0, 1, 0, 0, 0], [0, 1, 0, 0, 0, 1, 0, 0], [0, 0, 1, 0, 0, 0, 1, 0], [0, 0, 0, 1, 0, 0, 0, 1]]);
    let p1 =
        grid([[1, 0, 0, 0, 0, 0, 0, 1], [0, 1, 0, 0, 0, 0, 1, 0], [0, 0, 1, 0, 0, 1, 0, 0], [0, 0, 0, 1, 1, 0, 0, 0]]);
    let p1t = grid([
        [1, 0, 0, 0, 0, 0, 0, -1],
        [0, 1, 0, 0, 0, 0, -1, 0],
        [0, 0, 1, 0, 0, -1, 0, 0],
        [0, 0, 0, 1, -1, 0, 0, 0],
    ]);
    let p2 =
        grid([[1, 0, 0, 0, 0, 0, 1, 0], [0, 1, 0, 0, 0, 0, 0, 1], [0, 0, 1, 0, 1, 0, 0, 0], [0, 0, 0, 1, 0, 1, 0, 0]]);
    let p2t = grid([
        [1, 0, 0, 0, 0, 0, -1, 0],
        [0, 1, 0, 0, 0, 0, 0, -1],
        [0, 0, 1, 0, -1, 0, 0, 0],
        [0, 0, 0, 1, 0, -1, 0, 0],
    ]);
    let p = CodeParams::example_k2();
    let f = p.field();
    let dense = |m: &hadamard_msr::repair::RepairMatrix| m.dense(f).to_signed_rows(f);
    let (a, at) = parity1_repair_matrices(&p, BasisKind::Standard);
    let (b, bt) = parity2_repair_matrices(&p, BasisKind::Standard);
    let got = [
        ("S_1", dense(&systematic_repair_matrix(&p, 1, BasisKind::Standard).map_err(|e| e.to_string())?), s1),
        ("S_2", dense(&systematic_repair_matrix(&p, 2, BasisKind::Standard).map_err(|e| e.to_string())?), s2),
        ("parity-1 S", dense(&a), p1),
        ("parity-1 S~", dense(&at), p1t),
        ("parity-2 S", dense(&b), p2),
        ("parity-2 S~", dense(&bt), p2t),
    ];
    for (name, g, want) in &got {
        ensure(g == want, || format!("{name} = {g:?}"))?;
    }
    Ok("6 matrices equal entry for entry".into())
}

fn c3_new_adds() -> Outcome {
    let mut lines = Vec::new();
    for k in 2..=6 {
        let p = params(k);
        let n = p.n() as u64;
        let expected = match k {
            2 => 28,
            3 => 80,
            _ => (3 * k as u64 + 1) * n / 2,
        };
        for node in 1..=p.node_count() {
            let r = measure_repair(&p, node, Strategy::New).map_err(|e| e.to_string())?;
            ensure(r.adds == expected, || format!("k={k} node={node}: {} adds, expected {expected}", r.adds))?;
        }
        lines.push(format!("k={k}:{expected}"));
    }
    Ok(format!("every node: {}", lines.join(" ")))
}

fn c4_new_muls() -> Outcome {
    for k in 2..=6 {
        let p = params(k);
        let n = p.n() as u64;
        for node in 1..=p.node_count() {
            let r = measure_repair(&p, node, Strategy::New).map_err(|e| e.to_string())?;
            let bound = if r.class == NodeClass::Parity2 { (3 * k as u64 + 3) * n / 2 } else { (k as u64 + 3) * n / 2 };
            ensure(r.muls <= bound, || format!("k={k} node={node}: {} muls > {bound}", r.muls))?;
        }
    }
    let mut matched = 0;
    let mut deltas = Vec::new();
    for p in [CodeParams::example_k2(), CodeParams::example_k3()] {
        for node in 1..=p.node_count() {
            let r = measure_repair(&p, node, Strategy::New).map_err(|e| e.to_string())?;
            let (_, want) = published_reference(&p, node, Strategy::New).expect("published");
            if r.muls == want {
                matched += 1;
            } else {
                deltas.push(format!("k={} node={node}: {} vs {want}", p.k(), r.muls));
            }
        }
    }
    let exact = if deltas.is_empty() { "exact".to_string() } else { format!("deltas: {}", deltas.join(", ")) };
    Ok(format!("bounds hold for k=2..6; published MUL values {matched}/9 {exact}"))
}

fn c5_original_bounds() -> Outcome {
    let mut notes = Vec::new();
    let mut matched = 0;
    for k in 2..=3 {
        let p = params(k);
        for node in 1..=p.node_count() {
            let r = measure_repair(&p, node, Strategy::Original).map_err(|e| e.to_string())?;
            let (ba, bm) = bound_formulas(k, p.n(), r.class, Strategy::Original);
            ensure(r.adds <= ba && r.muls <= bm, || format!("k={k} node={node}: {}/{} > {ba}/{bm}", r.adds, r.muls))?;
            if k == 2 && node == 4 {
                ensure(r.adds <= 152, || format!("parity-2 adds {} > 152", r.adds))?;
            }
            if k == 2 && node == 1 {
                notes.push(format!("k=2 systematic {} adds vs formula {ba}", r.adds));
            }
            if published_reference(&p, node, Strategy::Original) == Some((r.adds, r.muls)) {
                matched += 1;
            }
        }
    }
    Ok(format!("within the formulas for k=2,3; {}; published original values {matched}/9 equal", notes.join("")))
}

fn c6_repair_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut repairs = 0;
    for k in 2..=6 {
        let p = params(k);
        let plans: Vec<RepairPlan> = Strategy::ALL
            .iter()
            .flat_map(|&s| (1..=p.node_count()).map(move |node| (s, node)))
            .map(|(s, node)| RepairPlan::build(&p, node, s))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let cw = random_codeword(&p, &mut rng);
            for plan in &plans {
                let node = plan.failed();
                let mut c = OpCounter::new();
                let got = plan.execute(&cw.without(node), &mut c).map_err(|e| e.to_string())?;
                ensure(got == cw.node(node), || format!("k={k} node={node} {} wrong", plan.strategy()))?;
                repairs += 1;
            }
        }
    }
    Ok(format!("{repairs} repairs exact"))
}

fn c7_bandwidth() -> Outcome {
    // plan level: count every symbol a helper hands over
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 2..=6 {
        let p = params(k);
        let cw = random_codeword(&p, &mut rng);
        for strategy in Strategy::ALL {
            for node in 1..=p.node_count() {
                let plan = RepairPlan::build(&p, node, strategy).map_err(|e| e.to_string())?;
                let mut sent = BTreeMap::new();
                let mut c = OpCounter::new();
                for helper in plan.helper_nodes() {
                    let d = plan.download(helper, cw.node(helper), &mut c).map_err(|e| e.to_string())?;
                    *sent.entry(helper).or_insert(0usize) += d.len();
                }
                ensure(sent.len() == k + 1 && sent.values().all(|&s| s == p.n() / 2), || {
                    format!("k={k} node={node} {strategy}: {sent:?}")
                })?;
                ensure(sent.values().sum::<usize>() == (k + 1) << k, || format!("k={k} total"))?;
            }
        }
    }
    // cluster level: the transfer meter between helpers and the repairer
    for k in 2..=3 {
        let p = params(k);
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut bytes = vec![0u8; 256];
        rng.fill_bytes(&mut bytes);
        let c = encode_bytes(&bytes, &dir.path().join("c"), &p).map_err(|e| e.to_string())?;
        let chunks = c.manifest().chunk_count as u64;
        for strategy in Strategy::ALL {
            for node in 1..=p.node_count() {
                cmd_kill(&c, node, false).map_err(|e| e.to_string())?;
                let out = cmd_repair(&c, node, strategy).map_err(|e| e.to_string())?;
                ensure(out.transfer.per_node().values().all(|&s| s == chunks * p.n() as u64 / 2), || {
                    format!("cluster k={k} node={node}: {:?}", out.transfer.per_node())
                })?;
                ensure(out.transfer.total() == chunks * ((k as u64 + 1) << k), || "cluster total".into())?;
            }
        }
    }
    Ok("N/2 symbols from each of k+1 helpers, (k+1)2^k per repair, k=2..6".into())
}

fn c8_mds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut patterns = 0;
    for k in 2..=5 {
        let p = params(k);
        for _ in 0..20 {
            let cw = random_codeword(&p, &mut rng);
            for x in 1..=p.node_count() {
                for y in x + 1..=p.node_count() {
                    let mut avail = cw.without(x);
                    avail.remove(&y);
                    let got = decode(&p, &avail).map_err(|e| e.to_string())?;
                    ensure(got == cw, || format!("k={k} lost {x},{y}"))?;
                    patterns += 1;
                }
            }
        }
    }
    Ok(format!("{patterns} decodes over all double-erasure patterns, 20 codewords per k"))
}

fn c9_rank_conditions() -> Outcome {
    let mut checks = 0;
    for p in [CodeParams::example_k2(), CodeParams::example_k3(), params(4), params(5)] {
        for strategy in Strategy::ALL {
            let report = verify_rank_conditions(&p, strategy);
            ensure(report.checks.len() == p.k() * (p.k() + 2), || format!("k={} check count", p.k()))?;
            for c in &report.checks {
                ensure(c.passes() && c.methods_agree(), || c.to_string())?;
            }
            checks += report.checks.len();
        }
    }
    Ok(format!("{checks} conditions pass; pair and elimination ranks agree"))
}

fn c10_design() -> Outcome {
    for k in 1..=6 {
        let n = 1usize << (k + 1);
        // runs of 2^i ones and 2^i minus-ones
        let runs = |i: usize| -> Vec<i8> {
            let run = 1usize << i;
            (0..n / (2 * run)).flat_map(|_| std::iter::repeat_n(1, run).chain(std::iter::repeat_n(-1, run))).collect()
        };
        for i in 0..=k {
            let v = sign_vector(i, k).map_err(|e| e.to_string())?;
            let want = runs(i);
            ensure(v.entries() == want.as_slice(), || format!("x_{i} for k={k}"))?;
            for l in 0..=k {
                for j in 0..n {
                    let in_range = j % (1 << (l + 1)) < (1 << l);
                    match lemma1_relation(i, l, j, k) {
                        Ok(rel) => {
                            ensure(in_range, || format!("relation accepted j={j} l={l}"))?;
                            let same = want[j] == want[j + (1 << l)];
                            ensure(same == (rel == Relation::Equal), || format!("relation i={i} l={l} j={j}"))?;
                        }
                        Err(_) => ensure(!in_range, || format!("relation rejected j={j} l={l}"))?,
                    }
                }
            }
        }
        for j in 0..n / 2 {
            let pj = lemma2_partner(j, n).map_err(|e| e.to_string())?;
            ensure(pj >= n / 2 && pj < n, || format!("partner of {j}"))?;
            ensure(runs(0)[pj] == runs(0)[j], || format!("partner level 0 j={j}"))?;
            for i in 1..=k {
                ensure(runs(i)[pj] == -runs(i)[j], || format!("partner level {i} j={j}"))?;
            }
        }
    }
    let field = hadamard_msr::PrimeField::new(257).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for k in 1..=10 {
        let n = 1usize << k;
        let z: Vec<Fe> = (0..n).map(|_| field.elem(rng.gen_range(0..257))).collect();
        let mut c = OpCounter::new();
        let fast = fast_hadamard_apply(&field, &z, &mut c).map_err(|e| e.to_string())?;
        let dense: Vec<Fe> = (0..n)
            .map(|r| {
                let s: i64 =
                    (0..n)
                        .map(|col| {
                            if (r & col).count_ones() % 2 == 0 {
                                z[col].value() as i64
                            } else {
                                -(z[col].value() as i64)
                            }
                        })
                        .sum();
                field.elem(s)
            })
            .collect();
        ensure(fast == dense, || format!("transform mismatch at k={k}"))?;
        ensure(c.adds() == (k * n) as u64, || format!("k={k}: {} adds", c.adds()))?;
        ensure(c.muls() == 0, || "transform multiplied".into())?;
    }
    Ok("sign relations and partners exhaustive for k<=6; transform exact with k*2^k adds for k<=10".into())
}

fn c11_end_to_end() -> Outcome {
    let err = |e: hadamard_msr::Error| e.to_string();
    let p = CodeParams::search_with_modulus(3, 257).map_err(err)?;
    let mut bytes = vec![0u8; 64 * 1024];
    ChaCha8Rng::seed_from_u64(11).fill_bytes(&mut bytes);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let c = encode_bytes(&bytes, &dir.path().join("c"), &p).map_err(err)?;
    for strategy in Strategy::ALL {
        for node in 1..=p.node_count() {
            cmd_kill(&c, node, false).map_err(err)?;
            cmd_repair(&c, node, strategy).map_err(err)?;
            ensure(cmd_decode(&c).map_err(err)? == bytes, || format!("after repairing node {node} ({strategy})"))?;
        }
    }
    let mut pairs = 0;
    for x in 1..=p.node_count() {
        for y in x + 1..=p.node_count() {
            cmd_kill(&c, x, false).map_err(err)?;
            cmd_kill(&c, y, false).map_err(err)?;
            ensure(cmd_decode(&c).map_err(err)? == bytes, || format!("decode with {x},{y} dead"))?;
            rebuild_dead_nodes(&c).map_err(err)?;
            pairs += 1;
        }
    }
    Ok(format!("{} chunks; 10 kill/repair rounds and {pairs} double kills byte-identical", c.manifest().chunk_count))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "coefficient validation", 1, c1_coefficients),
        (2, "repair matrix reproduction", 1, c2_repair_matrices),
        (3, "new-strategy ADD counts", 5, c3_new_adds),
        (4, "new-strategy MUL counts", 5, c4_new_muls),
        (5, "original-strategy bounds", 5, c5_original_bounds),
        (6, "repair correctness", 30, c6_repair_correctness),
        (7, "bandwidth optimality", 30, c7_bandwidth),
        (8, "MDS property", 30, c8_mds),
        (9, "rank conditions", 10, c9_rank_conditions),
        (10, "design properties", 10, c10_design),
        (11, "end-to-end cluster", 60, c11_end_to_end),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let limit = Duration::from_secs(limit);
        let (pass, detail) = match result {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the time limit")),
            Err(e) => (false, e),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {id:>2} {name} ({:.2}s / {}s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
