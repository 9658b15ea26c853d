//! Computation-load accounting for repairs.
//!
//! Counting follows [`PrimeField::mul_counted`](crate::field::PrimeField::mul_counted):
//! a product with a plan constant equal to `0` or `±1` is free. Plan constants
//! are fixed when a [`RepairPlan`] is built, so the counts depend on the code
//! parameters only, never on the data.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{coefficient_sets, encode, CodeParams, NodeClass};
use crate::error::Result;
use crate::field::{OpCounter, Phase};
use crate::repair::{RepairPlan, Strategy};

pub const CSV_HEADER: &str = "node,strategy,add,mul,add_bound,mul_bound,downloaded_symbols";

const PHASES: [Phase; 3] = [Phase::Download, Phase::Cancel, Phase::Recover];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub node: usize,
    pub class: NodeClass,
    pub strategy: Strategy,
    /// Download, cancel, recover.
    pub adds_by_phase: [u64; 3],
    pub muls_by_phase: [u64; 3],
    pub adds: u64,
    pub muls: u64,
    pub bound_adds: u64,
    pub bound_muls: u64,
    pub downloaded_symbols: usize,
}

impl CostReport {
    pub fn from_counter(plan: &RepairPlan, k: usize, counter: &OpCounter) -> Self {
        let adds_by_phase = PHASES.map(|p| counter.adds_in(p));
        let muls_by_phase = PHASES.map(|p| counter.muls_in(p));
        let (bound_adds, bound_muls) = bound_formulas(k, plan.n(), plan.class(), plan.strategy());
        CostReport {
            node: plan.failed(),
            class: plan.class(),
            strategy: plan.strategy(),
            adds_by_phase,
            muls_by_phase,
            adds: adds_by_phase.iter().sum(),
            muls: muls_by_phase.iter().sum(),
            bound_adds,
            bound_muls,
            downloaded_symbols: plan.downloaded_symbols(),
        }
    }

    pub fn within_bounds(&self) -> bool {
        self.adds <= self.bound_adds && self.muls <= self.bound_muls
    }

    /// Adds `other`'s counts; used to total a repair over many chunks.
    pub fn accumulate(&mut self, other: &CostReport) {
        for p in 0..3 {
            self.adds_by_phase[p] += other.adds_by_phase[p];
            self.muls_by_phase[p] += other.muls_by_phase[p];
        }
        self.adds += other.adds;
        self.muls += other.muls;
        self.bound_adds += other.bound_adds;
        self.bound_muls += other.bound_muls;
        self.downloaded_symbols += other.downloaded_symbols;
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node={} strategy={} add={} mul={} add_bound={} mul_bound={} downloaded_symbols={} class={} \
             add_phases={}/{}/{} mul_phases={}/{}/{}",
            self.node,
            self.strategy,
            self.adds,
            self.muls,
            self.bound_adds,
            self.bound_muls,
            self.downloaded_symbols,
            self.class,
            self.adds_by_phase[0],
            self.adds_by_phase[1],
            self.adds_by_phase[2],
            self.muls_by_phase[0],
            self.muls_by_phase[1],
            self.muls_by_phase[2],
        )
    }
}

/// Worst-case `(adds, muls)` for one repair.
pub fn bound_formulas(k: usize, n: usize, class: NodeClass, strategy: Strategy) -> (u64, u64) {
    let (k, n) = (k as u64, n as u64);
    match (strategy, class) {
        (Strategy::New, NodeClass::Parity2) => ((3 * k + 1) * n / 2, (3 * k + 3) * n / 2),
        (Strategy::New, _) => ((3 * k + 1) * n / 2, (k + 3) * n / 2),
        (Strategy::Original, NodeClass::Parity2) => {
            ((3 * k + 3) * n * n / 4 + (2 * k - 2) * n / 2, (3 * k + 3) * n * n / 4)
        }
        (Strategy::Original, _) => ((k + 3) * n * n / 4 + (k * k + 2 * k - 1) * n, (k + 3) * n * n / 4),
    }
}

/// Repairs `node` of a random codeword and reports the counts.
pub fn measure_repair(params: &CodeParams, node: usize, strategy: Strategy) -> Result<CostReport> {
    let plan = RepairPlan::build(params, node, strategy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x006d_7372 ^ node as u64);
    let data: Vec<Vec<_>> = (0..params.k())
        .map(|_| (0..params.n()).map(|_| params.field().elem(rng.gen_range(0..params.q() as i64))).collect())
        .collect();
    let codeword = encode(params, &data)?;
    let mut counter = OpCounter::new();
    let rebuilt = plan.execute(&codeword.without(node), &mut counter)?;
    debug_assert_eq!(rebuilt, codeword.node(node));
    Ok(CostReport::from_counter(&plan, params.k(), &counter))
}

/// `(adds, muls)` per node for the new and original strategies.
type PublishedRow = ((u64, u64), (u64, u64));

/// Published `(adds, muls)` for the two worked examples.
pub fn published_reference(params: &CodeParams, node: usize, strategy: Strategy) -> Option<(u64, u64)> {
    let table: &[PublishedRow] = if *params == CodeParams::example_k2() {
        &[((28, 17), (132, 28)), ((28, 17), (132, 28)), ((28, 15), (132, 24)), ((28, 20), (152, 120))]
    } else if *params == CodeParams::example_k3() {
        &[
            ((80, 42), (528, 128)),
            ((80, 42), (528, 128)),
            ((80, 28), (528, 256)),
            ((80, 44), (528, 272)),
            ((80, 66), (736, 576)),
        ]
    } else {
        return None;
    };
    let (new, original) = *table.get(node.checked_sub(1)?)?;
    Some(match strategy {
        Strategy::New => new,
        Strategy::Original => original,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub report: CostReport,
    pub published: Option<(u64, u64)>,
}

impl TableRow {
    /// `(measured - published)` for adds and muls.
    pub fn delta(&self) -> Option<(i64, i64)> {
        self.published.map(|(a, m)| (self.report.adds as i64 - a as i64, self.report.muls as i64 - m as i64))
    }

    pub fn matches_published(&self) -> Option<bool> {
        self.delta().map(|d| d == (0, 0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostTable {
    pub k: usize,
    pub q: u32,
    pub rows: Vec<TableRow>,
}

impl CostTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let r = &row.report;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.node, r.strategy, r.adds, r.muls, r.bound_adds, r.bound_muls, r.downloaded_symbols
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("(k+2,k) = ({},{}) over F_{}\n", self.k + 2, self.k, self.q);
        let _ = writeln!(
            out,
            "{:<6} {:<11} {:<9} {:>6} {:>6} {:>9} {:>9}  published",
            "node", "class", "strategy", "ADD", "MUL", "ADD<=", "MUL<="
        );
        for row in &self.rows {
            let r = &row.report;
            let published = match (row.published, row.delta()) {
                (Some((a, m)), Some((0, 0))) => format!("{a}/{m} match"),
                (Some((a, m)), Some((da, dm))) => format!("{a}/{m} DELTA add{da:+} mul{dm:+}"),
                _ => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "{:<6} {:<11} {:<9} {:>6} {:>6} {:>9} {:>9}  {}",
                r.node, r.class, r.strategy, r.adds, r.muls, r.bound_adds, r.bound_muls, published
            );
        }
        out
    }

    /// One `node=.. strategy=.. add=..` line per row.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let _ = write!(out, "{}", row.report);
            match row.delta() {
                Some((0, 0)) => out.push_str(" published=match"),
                Some((da, dm)) => {
                    let _ = write!(out, " published=DELTA(add{da:+},mul{dm:+})");
                }
                None => {}
            }
            out.push('\n');
        }
        out
    }

    pub fn deltas(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(|r| r.matches_published() == Some(false))
    }
}

/// Measures every node under both strategies.
pub fn emit_table(params: &CodeParams) -> Result<CostTable> {
    let mut rows = Vec::with_capacity(2 * params.node_count());
    for node in 1..=params.node_count() {
        for strategy in Strategy::ALL {
            rows.push(TableRow {
                report: measure_repair(params, node, strategy)?,
                published: published_reference(params, node, strategy),
            });
        }
    }
    Ok(CostTable { k: params.k(), q: params.q(), rows })
}

/// Total new-strategy multiplications over all node repairs.
pub fn total_new_muls(params: &CodeParams) -> Result<u64> {
    (1..=params.node_count()).map(|n| measure_repair(params, n, Strategy::New).map(|r| r.muls)).sum()
}

/// Among the first `limit` valid coefficient sets over `F_q`, the one with
/// the fewest new-strategy multiplications summed over all nodes.
pub fn search_low_mul(k: usize, q: u32, limit: usize) -> Result<Option<(CodeParams, u64)>> {
    let mut best: Option<(CodeParams, u64)> = None;
    for (a, b) in coefficient_sets(k, q)?.take(limit) {
        let a: Vec<u32> = a.iter().map(|x| x.value()).collect();
        let b: Vec<u32> = b.iter().map(|x| x.value()).collect();
        let params = CodeParams::new(k, q, &a, &b)?;
        let muls = total_new_muls(&params)?;
        if best.as_ref().is_none_or(|(_, m)| muls < *m) {
            best = Some((params, muls));
        }
    }
    Ok(best)
}
