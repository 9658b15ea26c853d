//! Bandwidth-optimal repair of a single node.
//!
//! Every repair reduces to the same shape. Two helpers (`first`, `second`)
//! carry the lost content mixed with interference, and the remaining `k - 1`
//! helpers send exactly the interference. With repair matrices `S` (top) and
//! `S~` (bottom) over a basis of `F_q^(N/2)`:
//!
//! * download: each helper `l` sends an `N/2`-symbol projection of `f_l`;
//! * cancel: `u1 = d_first ± sum d_l`, `u2 = d_second ± sum B_l d_l`,
//!   which leaves `u1 = S f`, `u2 = S~ D f` for the lost vector `f`;
//! * recover: `f = [S; S~ D]^{-1} (u1; u2)`.
//!
//! | lost node      | first / second       | interferers       | `D`        |
//! |----------------|----------------------|-------------------|------------|
//! | systematic `i` | `k+1` / `k+2`        | systematic `≠ i`  | `A_i`      |
//! | parity `k+1`   | `1` / `k+2`          | `2..=k`           | `A_1`      |
//! | parity `k+2`   | `1` / `k+1`          | `2..=k`           | `A_1^{-1}` |
//!
//! For the second parity node, systematic helpers send `S A_l f_l` rather than
//! `S f_l`. With the standard basis every download, cancellation and
//! recovery row has at most two terms. With the Sylvester basis, downloads of
//! unscaled content go through the fast Hadamard transform, and everything
//! else is a dense product.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::codec::{CodeParams, DiagMatrix, NodeClass};
use crate::design::{half_hadamard_apply, sylvester_entry};
use crate::error::{Error, Result};
use crate::field::{Fe, OpCounter, Phase, PrimeField};
use crate::linalg::{LinearMap, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Standard basis.
    New,
    /// Sylvester Hadamard basis.
    Original,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::New, Strategy::Original];

    pub fn basis(self) -> BasisKind {
        match self {
            Strategy::New => BasisKind::Standard,
            Strategy::Original => BasisKind::Sylvester,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::New => "new",
            Strategy::Original => "original",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "new" => Ok(Strategy::New),
            "original" => Ok(Strategy::Original),
            other => Err(format!("unknown strategy `{other}` (expected `new` or `original`)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Standard,
    Sylvester,
}

/// A basis of `F_q^(2^k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    kind: BasisKind,
    dim: usize,
}

impl Basis {
    pub fn new(kind: BasisKind, k: usize) -> Self {
        Basis { kind, dim: 1 << k }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Basis vectors as the columns of a `dim x dim` matrix.
    pub fn matrix(&self, field: &PrimeField) -> Matrix {
        match self.kind {
            BasisKind::Standard => Matrix::identity(self.dim),
            BasisKind::Sylvester => {
                let mut m = Matrix::zeros(self.dim, self.dim);
                for r in 0..self.dim {
                    for c in 0..self.dim {
                        m.set(r, c, field.sign(sylvester_entry(r, c)));
                    }
                }
                m
            }
        }
    }

    /// Inverse of [`Basis::matrix`]; for Sylvester this is `2^{-k} H_k`.
    pub fn inverse_matrix(&self, field: &PrimeField) -> Matrix {
        match self.kind {
            BasisKind::Standard => Matrix::identity(self.dim),
            BasisKind::Sylvester => {
                let scale = field.inv(field.elem(self.dim as i64)).expect("q is odd");
                let mut m = self.matrix(field);
                for r in 0..self.dim {
                    for c in 0..self.dim {
                        m.set(r, c, field.mul(scale, m.get(r, c)));
                    }
                }
                m
            }
        }
    }
}

/// `N/2 x N` matrix whose column `j` is `sign_j * basis[index_j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairMatrix {
    columns: Vec<(usize, i8)>,
    basis: Basis,
}

impl RepairMatrix {
    fn new(k: usize, basis: BasisKind, columns: Vec<(usize, i8)>) -> Self {
        RepairMatrix { columns, basis: Basis::new(basis, k) }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn columns(&self) -> &[(usize, i8)] {
        &self.columns
    }

    pub fn basis_index(&self, j: usize) -> usize {
        self.columns[j].0
    }

    pub fn sign(&self, j: usize) -> i8 {
        self.columns[j].1
    }

    /// The pattern matrix: the same columns over the standard basis.
    pub fn pattern(&self, field: &PrimeField) -> Matrix {
        let mut m = Matrix::zeros(self.basis.dim, self.columns.len());
        for (j, &(idx, s)) in self.columns.iter().enumerate() {
            m.set(idx, j, field.sign(s));
        }
        m
    }

    pub fn dense(&self, field: &PrimeField) -> Matrix {
        match self.basis.kind {
            BasisKind::Standard => self.pattern(field),
            BasisKind::Sylvester => self.basis.matrix(field).mul(field, &self.pattern(field)),
        }
    }

    /// Column pairs `(j, j')`, `j < j'`, sharing each basis index, ordered by
    /// index. `None` unless every index is used by exactly two columns.
    pub fn column_pairs(&self) -> Option<Vec<(usize, usize)>> {
        let mut slots: Vec<Vec<usize>> = vec![Vec::new(); self.basis.dim];
        for (j, &(idx, _)) in self.columns.iter().enumerate() {
            slots.get_mut(idx)?.push(j);
        }
        slots.into_iter().map(|s| if s.len() == 2 { Some((s[0], s[1])) } else { None }).collect()
    }
}

/// `S_i`: column `j = mu 2^(i+1) + nu` and column `j + 2^i` both map to
/// basis vector `mu 2^i + nu`.
pub fn systematic_repair_matrix(params: &CodeParams, i: usize, basis: BasisKind) -> Result<RepairMatrix> {
    let k = params.k();
    if i == 0 || i > k {
        return Err(Error::IndexOutOfRange { what: "systematic node", index: i });
    }
    let n = params.n();
    let columns = (0..n)
        .map(|j| {
            let mu = j >> (i + 1);
            let nu = j & ((1 << i) - 1);
            ((mu << i) + nu, 1)
        })
        .collect();
    Ok(RepairMatrix::new(k, basis, columns))
}

/// `(S, S~)` for the first parity node: column `j` and `N-1-j` share a basis
/// vector, with the mirrored half negated in `S~`.
pub fn parity1_repair_matrices(params: &CodeParams, basis: BasisKind) -> (RepairMatrix, RepairMatrix) {
    let k = params.k();
    let n = params.n();
    let half = n / 2;
    let idx = |j: usize| if j < half { j } else { n - 1 - j };
    let s = (0..n).map(|j| (idx(j), 1)).collect();
    let st = (0..n).map(|j| (idx(j), if j < half { 1 } else { -1 })).collect();
    (RepairMatrix::new(k, basis, s), RepairMatrix::new(k, basis, st))
}

/// `(S, S~)` for the second parity node: column `j >= N/2` maps to basis
/// vector `N-1-j-(-1)^j`, negated in `S~`.
pub fn parity2_repair_matrices(params: &CodeParams, basis: BasisKind) -> (RepairMatrix, RepairMatrix) {
    let k = params.k();
    let n = params.n();
    let half = n / 2;
    // N-1-j-(-1)^j is an involution that swaps the halves
    let idx = |j: usize| if j < half { j } else { partner_any(j, n) };
    let s = (0..n).map(|j| (idx(j), 1)).collect();
    let st = (0..n).map(|j| (idx(j), if j < half { 1 } else { -1 })).collect();
    (RepairMatrix::new(k, basis, s), RepairMatrix::new(k, basis, st))
}

/// `N-1-j-(-1)^j` for any `j`.
fn partner_any(j: usize, n: usize) -> usize {
    if j.is_multiple_of(2) {
        n - 2 - j
    } else {
        n - j
    }
}

/// How a helper computes its download.
#[derive(Clone, Debug)]
enum DownloadOp {
    Sparse(LinearMap),
    /// `(H ±H) z` on a gathered copy of the content.
    Hadamard {
        gather: Vec<usize>,
        negate_second: bool,
    },
}

#[derive(Clone, Debug)]
struct Helper {
    node: usize,
    op: DownloadOp,
    dense: Matrix,
}

#[derive(Clone, Debug)]
struct Interferer {
    node: usize,
    diagonal: DiagMatrix,
    map: LinearMap,
}

/// Everything needed to rebuild one node under one strategy.
#[derive(Clone, Debug)]
pub struct RepairPlan {
    field: PrimeField,
    n: usize,
    failed: usize,
    class: NodeClass,
    strategy: Strategy,
    top: RepairMatrix,
    bottom: RepairMatrix,
    target: DiagMatrix,
    helpers: Vec<Helper>,
    first: usize,
    second: usize,
    interferers: Vec<Interferer>,
    subtract: bool,
    recover: LinearMap,
}

/// The repair matrices and diagonals describing one lost node.
pub(crate) struct RepairShape {
    pub class: NodeClass,
    pub top: RepairMatrix,
    pub bottom: RepairMatrix,
    pub target: DiagMatrix,
    pub first: usize,
    pub second: usize,
    /// `(node, diagonal whose projection is the interference)`.
    pub interference: Vec<(usize, DiagMatrix)>,
    /// Helpers whose content is multiplied by `A_l` before projection.
    pub prescaled: bool,
}

pub(crate) fn repair_shape(params: &CodeParams, failed: usize, basis: BasisKind) -> Result<RepairShape> {
    let k = params.k();
    let f = params.field();
    let class = params.node_class(failed)?;
    Ok(match class {
        NodeClass::Systematic => {
            let s = systematic_repair_matrix(params, failed, basis)?;
            RepairShape {
                class,
                top: s.clone(),
                bottom: s,
                target: params.a_matrix(failed).clone(),
                first: k + 1,
                second: k + 2,
                interference: (1..=k).filter(|&l| l != failed).map(|l| (l, params.a_matrix(l).clone())).collect(),
                prescaled: false,
            }
        }
        NodeClass::Parity1 => {
            let (s, st) = parity1_repair_matrices(params, basis);
            RepairShape {
                class,
                top: s,
                bottom: st,
                target: params.a_matrix(1).clone(),
                first: 1,
                second: k + 2,
                interference: (2..=k).map(|l| (l, params.a_matrix(1).sub(f, params.a_matrix(l)))).collect(),
                prescaled: false,
            }
        }
        NodeClass::Parity2 => {
            let (s, st) = parity2_repair_matrices(params, basis);
            RepairShape {
                class,
                top: s,
                bottom: st,
                target: params.a_inverse(1).clone(),
                first: 1,
                second: k + 1,
                interference: (2..=k).map(|l| (l, params.a_inverse(1).sub(f, params.a_inverse(l)))).collect(),
                prescaled: true,
            }
        }
    })
}

/// `B` with `bottom * diag(d) = B * pattern(top)` on the standard basis, or
/// `None` if the two columns of some pair disagree.
fn aligned_diagonal(
    field: &PrimeField,
    top: &RepairMatrix,
    bottom: &RepairMatrix,
    d: &DiagMatrix,
) -> Option<DiagMatrix> {
    let pairs = top.column_pairs()?;
    let coef = |j: usize| {
        let v = field.mul(d.get(j), field.sign(bottom.sign(j)));
        field.mul(v, field.sign(top.sign(j)))
    };
    pairs
        .iter()
        .map(|&(j, jp)| {
            let (x, y) = (coef(j), coef(jp));
            (x == y && bottom.basis_index(j) == top.basis_index(j) && bottom.basis_index(jp) == top.basis_index(jp))
                .then_some(x)
        })
        .collect::<Option<Vec<_>>>()
        .map(DiagMatrix::new)
}

/// Pairwise inverse of `[pattern(top); pattern(bottom) diag(d)]`.
fn pairwise_recover(field: &PrimeField, top: &RepairMatrix, bottom: &RepairMatrix, d: &DiagMatrix) -> Result<Matrix> {
    let n = top.columns().len();
    let half = n / 2;
    let pairs = top.column_pairs().ok_or(Error::Singular)?;
    let mut r = Matrix::zeros(n, n);
    for (m, &(j, jp)) in pairs.iter().enumerate() {
        let (s0, s1) = (field.sign(top.sign(j)), field.sign(top.sign(jp)));
        let t0 = field.mul(field.sign(bottom.sign(j)), d.get(j));
        let t1 = field.mul(field.sign(bottom.sign(jp)), d.get(jp));
        let det = field.sub(field.mul(s0, t1), field.mul(s1, t0));
        let inv = field.inv(det).map_err(|_| Error::Singular)?;
        r.set(j, m, field.mul(inv, t1));
        r.set(j, half + m, field.mul(inv, field.neg(s1)));
        r.set(jp, m, field.mul(inv, field.neg(t0)));
        r.set(jp, half + m, field.mul(inv, s0));
    }
    Ok(r)
}

/// Gather order and sign for running a download through `(H ±H)`, if the
/// pattern allows it.
fn hadamard_layout(top_like: &RepairMatrix) -> Option<(Vec<usize>, bool)> {
    let pairs = top_like.column_pairs()?;
    let half = pairs.len();
    let mut gather = vec![0; 2 * half];
    let mut second_sign = None;
    for (m, &(j, jp)) in pairs.iter().enumerate() {
        if top_like.sign(j) != 1 {
            return None;
        }
        let s = top_like.sign(jp);
        if *second_sign.get_or_insert(s) != s {
            return None;
        }
        gather[m] = j;
        gather[half + m] = jp;
    }
    Some((gather, second_sign? < 0))
}

impl RepairPlan {
    pub fn build(params: &CodeParams, failed: usize, strategy: Strategy) -> Result<Self> {
        let field = *params.field();
        let n = params.n();
        let basis_kind = strategy.basis();
        let shape = repair_shape(params, failed, basis_kind)?;
        let basis = Basis::new(basis_kind, params.k());
        let e = basis.matrix(&field);
        let e_inv = basis.inverse_matrix(&field);

        let mut helpers = Vec::with_capacity(params.k() + 1);
        for node in (1..=params.node_count()).filter(|&l| l != failed) {
            let matrix = if node == shape.second { &shape.bottom } else { &shape.top };
            let prescale = (shape.prescaled && node <= params.k()).then(|| params.a_matrix(node));
            let mut dense = matrix.dense(&field);
            if let Some(a) = prescale {
                dense = dense.scale_columns(&field, a.entries());
            }
            // a pre-scaled download is applied as one dense product
            let op = match (basis_kind, prescale, hadamard_layout(matrix)) {
                (BasisKind::Sylvester, None, Some((gather, negate_second))) => {
                    DownloadOp::Hadamard { gather, negate_second }
                }
                _ => DownloadOp::Sparse(LinearMap::from_matrix(&field, &dense)),
            };
            helpers.push(Helper { node, op, dense });
        }

        let mut interferers = Vec::with_capacity(shape.interference.len());
        for (node, d) in &shape.interference {
            let diagonal = aligned_diagonal(&field, &shape.top, &shape.bottom, d)
                .ok_or_else(|| Error::InvalidCoefficients(format!("interference from node {node} does not align")))?;
            let map = match basis_kind {
                BasisKind::Standard => LinearMap::diagonal(&field, diagonal.entries()),
                BasisKind::Sylvester => {
                    let conj = e.scale_columns(&field, diagonal.entries()).mul(&field, &e_inv);
                    LinearMap::from_matrix(&field, &conj)
                }
            };
            interferers.push(Interferer { node: *node, diagonal, map });
        }

        let recover_std = pairwise_recover(&field, &shape.top, &shape.bottom, &shape.target)?;
        let recover = match basis_kind {
            BasisKind::Standard => recover_std,
            BasisKind::Sylvester => {
                let half = n / 2;
                let mut block = Matrix::zeros(n, n);
                for r in 0..half {
                    for c in 0..half {
                        block.set(r, c, e_inv.get(r, c));
                        block.set(half + r, half + c, e_inv.get(r, c));
                    }
                }
                recover_std.mul(&field, &block)
            }
        };

        Ok(RepairPlan {
            field,
            n,
            failed,
            class: shape.class,
            strategy,
            top: shape.top,
            bottom: shape.bottom,
            target: shape.target,
            helpers,
            first: shape.first,
            second: shape.second,
            interferers,
            subtract: shape.class == NodeClass::Systematic,
            recover: LinearMap::from_matrix(&field, &recover),
        })
    }

    pub fn failed(&self) -> usize {
        self.failed
    }

    pub fn class(&self) -> NodeClass {
        self.class
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Surviving nodes contacted, in ascending order.
    pub fn helper_nodes(&self) -> Vec<usize> {
        self.helpers.iter().map(|h| h.node).collect()
    }

    /// The `N/2 x N` matrix applied to `node`'s content before download.
    pub fn helper_matrix(&self, node: usize) -> Option<&Matrix> {
        self.helpers.iter().find(|h| h.node == node).map(|h| &h.dense)
    }

    /// `(S, S~)`.
    pub fn repair_matrices(&self) -> (&RepairMatrix, &RepairMatrix) {
        (&self.top, &self.bottom)
    }

    /// The diagonal `D` with `(u1; u2) = [S; S~ D] f`.
    pub fn target_diagonal(&self) -> &DiagMatrix {
        &self.target
    }

    /// `B_l` for each interfering node, on the standard basis.
    pub fn cancel_diagonals(&self) -> BTreeMap<usize, &DiagMatrix> {
        self.interferers.iter().map(|i| (i.node, &i.diagonal)).collect()
    }

    /// The map applied to `node`'s download during cancellation.
    pub fn cancel_map(&self, node: usize) -> Option<&LinearMap> {
        self.interferers.iter().find(|i| i.node == node).map(|i| &i.map)
    }

    pub fn recover_map(&self) -> &LinearMap {
        &self.recover
    }

    /// Total symbols moved: `N/2` from each of the `k + 1` helpers.
    pub fn downloaded_symbols(&self) -> usize {
        self.helpers.len() * self.n / 2
    }

    /// Helper-side projection of `content` for `node`.
    pub fn download(&self, node: usize, content: &[Fe], counter: &mut OpCounter) -> Result<Vec<Fe>> {
        let helper = self.helpers.iter().find(|h| h.node == node).ok_or(Error::InvalidNode(node))?;
        if content.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: content.len() });
        }
        let saved = counter.phase();
        counter.set_phase(Phase::Download);
        let f = &self.field;
        let out = match &helper.op {
            DownloadOp::Sparse(map) => map.apply(f, content, counter)?,
            DownloadOp::Hadamard { gather, negate_second } => {
                let z: Vec<Fe> = gather.iter().map(|&j| content[j]).collect();
                half_hadamard_apply(f, &z, *negate_second, counter)?
            }
        };
        counter.set_phase(saved);
        Ok(out)
    }

    /// Repairer side: cancellation and recovery from the `k + 1` downloads.
    pub fn finish(&self, downloads: &BTreeMap<usize, Vec<Fe>>, counter: &mut OpCounter) -> Result<Vec<Fe>> {
        let half = self.n / 2;
        let fetch = |node: usize| -> Result<&Vec<Fe>> {
            let d = downloads.get(&node).ok_or(Error::MissingHelper(node))?;
            if d.len() != half {
                return Err(Error::LengthMismatch { expected: half, actual: d.len() });
            }
            Ok(d)
        };
        for h in &self.helpers {
            fetch(h.node)?;
        }
        let saved = counter.phase();
        let f = &self.field;

        counter.set_phase(Phase::Cancel);
        let mut u = Vec::with_capacity(self.n);
        u.extend_from_slice(fetch(self.first)?);
        let mut u2 = fetch(self.second)?.clone();
        for it in &self.interferers {
            let d = fetch(it.node)?;
            for (slot, &x) in u.iter_mut().zip(d) {
                *slot = if self.subtract { f.sub_counted(*slot, x, counter) } else { f.add_counted(*slot, x, counter) };
            }
            it.map.accumulate(f, &mut u2, d, self.subtract, counter)?;
        }
        u.extend_from_slice(&u2);

        counter.set_phase(Phase::Recover);
        let out = self.recover.apply(f, &u, counter)?;
        counter.set_phase(saved);
        Ok(out)
    }

    /// Rebuilds the failed node from the surviving nodes' full contents.
    pub fn execute(&self, survivors: &BTreeMap<usize, Vec<Fe>>, counter: &mut OpCounter) -> Result<Vec<Fe>> {
        let mut downloads = BTreeMap::new();
        for h in &self.helpers {
            let content = survivors.get(&h.node).ok_or(Error::MissingHelper(h.node))?;
            downloads.insert(h.node, self.download(h.node, content, counter)?);
        }
        self.finish(&downloads, counter)
    }
}

/// `plan.execute` with a freshly built plan.
pub fn execute_repair(
    params: &CodeParams,
    failed: usize,
    strategy: Strategy,
    survivors: &BTreeMap<usize, Vec<Fe>>,
    counter: &mut OpCounter,
) -> Result<Vec<Fe>> {
    RepairPlan::build(params, failed, strategy)?.execute(survivors, counter)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// `rank [S; S~ D] = N`.
    FullRank,
    /// `rank [S; S~ D_l] = N/2` for interfering node `l`.
    Interference(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCheck {
    pub failed: usize,
    pub strategy: Strategy,
    pub condition: Condition,
    pub expected: usize,
    /// Sum of the ranks of the 2x2 column-pair blocks, when the pattern pairs up.
    pub pair_rank: Option<usize>,
    /// Rank of the dense stacked matrix by Gaussian elimination.
    pub elimination_rank: usize,
}

impl RankCheck {
    pub fn pair_passes(&self) -> bool {
        self.pair_rank == Some(self.expected)
    }

    pub fn elimination_passes(&self) -> bool {
        self.elimination_rank == self.expected
    }

    pub fn passes(&self) -> bool {
        self.pair_passes() && self.elimination_passes()
    }

    pub fn methods_agree(&self) -> bool {
        self.pair_passes() == self.elimination_passes()
    }
}

impl fmt::Display for RankCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cond = match self.condition {
            Condition::FullRank => "full-rank".to_string(),
            Condition::Interference(l) => format!("interference(node {l})"),
        };
        let status = if self.passes() { "pass" } else { "FAIL" };
        let pair = self.pair_rank.map_or("n/a".to_string(), |r| r.to_string());
        write!(
            f,
            "node={} strategy={} condition={} expected={} pair_rank={} elimination_rank={} {}",
            self.failed, self.strategy, cond, self.expected, pair, self.elimination_rank, status
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct RankReport {
    pub checks: Vec<RankCheck>,
}

impl RankReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(RankCheck::passes)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RankCheck> {
        self.checks.iter().filter(|c| !c.passes())
    }
}

fn rank2(field: &PrimeField, m: [[Fe; 2]; 2]) -> usize {
    let det = field.sub(field.mul(m[0][0], m[1][1]), field.mul(m[0][1], m[1][0]));
    if !det.is_zero() {
        2
    } else if m.iter().flatten().any(|x| !x.is_zero()) {
        1
    } else {
        0
    }
}

/// Ranks of the 2x2 blocks `[[s_j, s_j'], [t_j d_j, t_j' d_j']]` for every
/// column pair sharing a basis vector.
pub fn pair_block_ranks(
    field: &PrimeField,
    top: &RepairMatrix,
    bottom: &RepairMatrix,
    d: &DiagMatrix,
) -> Option<Vec<usize>> {
    top.column_pairs()?
        .into_iter()
        .map(|(j, jp)| {
            if bottom.basis_index(j) != top.basis_index(j) || bottom.basis_index(jp) != top.basis_index(jp) {
                return None;
            }
            let lower = |c: usize| field.mul(field.sign(bottom.sign(c)), d.get(c));
            Some(rank2(field, [[field.sign(top.sign(j)), field.sign(top.sign(jp))], [lower(j), lower(jp)]]))
        })
        .collect()
}

/// Checks every full-rank and interference-alignment condition, for every
/// node, by the column-pair argument and by elimination on dense matrices.
pub fn verify_rank_conditions(params: &CodeParams, strategy: Strategy) -> RankReport {
    let field = *params.field();
    let n = params.n();
    let mut report = RankReport::default();
    for failed in 1..=params.node_count() {
        let shape = match repair_shape(params, failed, strategy.basis()) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let top_dense = shape.top.dense(&field);
        let bottom_dense = shape.bottom.dense(&field);
        let mut check = |condition: Condition, expected: usize, d: &DiagMatrix| {
            let pair_rank = pair_block_ranks(&field, &shape.top, &shape.bottom, d).map(|r| r.iter().sum());
            let stacked = top_dense.stack(&bottom_dense.scale_columns(&field, d.entries()));
            report.checks.push(RankCheck {
                failed,
                strategy,
                condition,
                expected,
                pair_rank,
                elimination_rank: stacked.rank(&field),
            });
        };
        check(Condition::FullRank, n, &shape.target);
        for (l, d) in &shape.interference {
            check(Condition::Interference(*l), n / 2, d);
        }
    }
    report
}
