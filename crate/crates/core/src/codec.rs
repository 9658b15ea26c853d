//! Code parameters, systematic encoding and two-erasure decoding.
//!
//! Node `i` in `1..=k` stores the data part `f_i`. Node `k+1` stores
//! `f_1 + ... + f_k` and node `k+2` stores `A_1 f_1 + ... + A_k f_k`, where
//! `A_i = a_i X_i + b_i X_0 + I` is diagonal.

use std::collections::BTreeMap;

use crate::design::sign_at;
use crate::error::{Error, Result};
use crate::field::{is_prime, Fe, PrimeField};

pub const MAX_K: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeClass {
    Systematic,
    /// Node `k+1`.
    Parity1,
    /// Node `k+2`.
    Parity2,
}

impl NodeClass {
    pub fn name(self) -> &'static str {
        match self {
            NodeClass::Systematic => "systematic",
            NodeClass::Parity1 => "parity-1",
            NodeClass::Parity2 => "parity-2",
        }
    }
}

impl std::fmt::Display for NodeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

/// Entrywise (diagonal) matrix of order `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagMatrix {
    diag: Vec<Fe>,
}

impl DiagMatrix {
    pub fn new(diag: Vec<Fe>) -> Self {
        DiagMatrix { diag }
    }

    pub fn entries(&self) -> &[Fe] {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn get(&self, t: usize) -> Fe {
        self.diag[t]
    }

    pub fn mul(&self, field: &PrimeField, other: &DiagMatrix) -> DiagMatrix {
        DiagMatrix::new(self.diag.iter().zip(&other.diag).map(|(&x, &y)| field.mul(x, y)).collect())
    }

    pub fn sub(&self, field: &PrimeField, other: &DiagMatrix) -> DiagMatrix {
        DiagMatrix::new(self.diag.iter().zip(&other.diag).map(|(&x, &y)| field.sub(x, y)).collect())
    }

    /// Entrywise inverse; fails if any entry is zero.
    pub fn inverse(&self, field: &PrimeField) -> Result<DiagMatrix> {
        Ok(DiagMatrix::new(self.diag.iter().map(|&x| field.inv(x)).collect::<Result<_>>()?))
    }

    pub fn apply(&self, field: &PrimeField, v: &[Fe]) -> Vec<Fe> {
        self.diag.iter().zip(v).map(|(&d, &x)| field.mul(d, x)).collect()
    }
}

/// Returns every violated constraint on `(a, b)`; empty means valid.
///
/// Constraints: `a_i, b_i != 0`, `a_i^2 - b_i^2 = -1`, and for `i != j`
/// no signed sum `±a_i ± a_j` equals `±(b_i - b_j)`.
pub fn coefficient_violations(field: &PrimeField, k: usize, a: &[Fe], b: &[Fe]) -> Vec<String> {
    let mut out = Vec::new();
    if a.len() != k || b.len() != k {
        out.push(format!("expected {k} values of a and b, got {} and {}", a.len(), b.len()));
        return out;
    }
    let q = field.modulus();
    if (q as usize) < 2 * k + 3 {
        out.push(format!("q = {q} is below 2k + 3 = {}", 2 * k + 3));
    }
    for i in 0..k {
        if a[i].is_zero() {
            out.push(format!("a_{} = 0", i + 1));
        }
        if b[i].is_zero() {
            out.push(format!("b_{} = 0", i + 1));
        }
        let lhs = field.sub(field.mul(a[i], a[i]), field.mul(b[i], b[i]));
        if lhs != field.minus_one() {
            out.push(format!("a_{0}^2 - b_{0}^2 = {lhs}, expected -1", i + 1));
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            if !cross_ok(field, a[i], b[i], a[j], b[j]) {
                out.push(format!("a_{0} ± a_{1} collides with ±(b_{0} - b_{1})", i + 1, j + 1));
            }
        }
    }
    out
}

fn cross_ok(field: &PrimeField, ai: Fe, bi: Fe, aj: Fe, bj: Fe) -> bool {
    let d = field.sub(bi, bj);
    let nd = field.neg(d);
    let sums = [field.add(ai, aj), field.sub(ai, aj), field.sub(aj, ai), field.neg(field.add(ai, aj))];
    sums.iter().all(|&s| s != d && s != nd)
}

pub fn validate_coefficients(k: usize, q: u32, a: &[u32], b: &[u32]) -> Result<()> {
    let field = PrimeField::new(q)?;
    let a: Vec<Fe> = a.iter().map(|&v| field.elem(v as i64)).collect();
    let b: Vec<Fe> = b.iter().map(|&v| field.elem(v as i64)).collect();
    let v = coefficient_violations(&field, k, &a, &b);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidCoefficients(v.join("; ")))
    }
}

/// All valid coefficient assignments, in lexicographic order of
/// `(a_1, b_1, a_2, b_2, ...)`.
pub struct CoefficientSets {
    field: PrimeField,
    k: usize,
    pairs: Vec<(Fe, Fe)>,
    // cursor into `pairs` per level; the last level is the one advanced next
    stack: Vec<usize>,
    started: bool,
}

impl CoefficientSets {
    fn consistent(&self, depth: usize, cand: (Fe, Fe)) -> bool {
        self.stack[..depth].iter().all(|&p| {
            let (aj, bj) = self.pairs[p];
            cross_ok(&self.field, cand.0, cand.1, aj, bj)
        })
    }

    fn advance(&mut self, mut depth: usize, mut from: usize) -> bool {
        loop {
            let next = (from..self.pairs.len()).find(|&p| self.consistent(depth, self.pairs[p]));
            match next {
                Some(p) => {
                    self.stack.truncate(depth);
                    self.stack.push(p);
                    if depth + 1 == self.k {
                        return true;
                    }
                    depth += 1;
                    from = 0;
                }
                None => {
                    if depth == 0 {
                        self.stack.clear();
                        return false;
                    }
                    depth -= 1;
                    from = self.stack[depth] + 1;
                }
            }
        }
    }
}

impl Iterator for CoefficientSets {
    type Item = (Vec<Fe>, Vec<Fe>);

    fn next(&mut self) -> Option<Self::Item> {
        let found = if !self.started {
            self.started = true;
            self.advance(0, 0)
        } else if self.stack.len() == self.k {
            let last = self.stack[self.k - 1];
            self.advance(self.k - 1, last + 1)
        } else {
            false
        };
        if !found {
            return None;
        }
        Some(self.stack.iter().map(|&p| self.pairs[p]).unzip())
    }
}

pub fn coefficient_sets(k: usize, q: u32) -> Result<CoefficientSets> {
    let field = PrimeField::new(q)?;
    if !(2..=MAX_K).contains(&k) {
        return Err(Error::InvalidK(k));
    }
    if (q as usize) < 2 * k + 3 {
        return Err(Error::ModulusTooSmall { k, q });
    }
    let minus_one = field.minus_one();
    let mut pairs = Vec::new();
    for a in 1..q {
        for b in 1..q {
            let (a, b) = (field.elem(a as i64), field.elem(b as i64));
            if field.sub(field.mul(a, a), field.mul(b, b)) == minus_one {
                pairs.push((a, b));
            }
        }
    }
    Ok(CoefficientSets { field, k, pairs, stack: Vec::with_capacity(k), started: false })
}

/// Lexicographically smallest valid `(a, b)` for this `k` and `q`.
pub fn find_coefficients(k: usize, q: u32) -> Result<Option<(Vec<Fe>, Vec<Fe>)>> {
    Ok(coefficient_sets(k, q)?.next())
}

/// Smallest prime `q >= 2k + 3` that admits valid coefficients.
pub fn smallest_valid_modulus(k: usize) -> Result<u32> {
    if !(2..=MAX_K).contains(&k) {
        return Err(Error::InvalidK(k));
    }
    let mut q = (2 * k + 3) as u32;
    while q < crate::field::MAX_MODULUS {
        if is_prime(q) && find_coefficients(k, q)?.is_some() {
            return Ok(q);
        }
        q += 2;
    }
    Err(Error::NoCoefficients { k, q })
}

/// Parameters of a `(k+2, k)` Hadamard MSR code plus its cached diagonals.
#[derive(Clone, Debug)]
pub struct CodeParams {
    k: usize,
    field: PrimeField,
    a: Vec<Fe>,
    b: Vec<Fe>,
    coding: Vec<DiagMatrix>,
    inverse: Vec<DiagMatrix>,
}

impl PartialEq for CodeParams {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.field == other.field && self.a == other.a && self.b == other.b
    }
}

impl Eq for CodeParams {}

impl CodeParams {
    pub fn new(k: usize, q: u32, a: &[u32], b: &[u32]) -> Result<Self> {
        if !(2..=MAX_K).contains(&k) {
            return Err(Error::InvalidK(k));
        }
        validate_coefficients(k, q, a, b)?;
        Self::new_unchecked(k, q, a, b)
    }

    /// Builds parameters without checking the coefficient constraints.
    ///
    /// Meant for exercising what breaks when the constraints do not hold.
    /// The cached inverse diagonals fall back to entrywise reciprocals, with
    /// zero wherever `A_i` has a zero entry.
    pub fn new_unchecked(k: usize, q: u32, a: &[u32], b: &[u32]) -> Result<Self> {
        let field = PrimeField::new(q)?;
        if !(2..=MAX_K).contains(&k) {
            return Err(Error::InvalidK(k));
        }
        if a.len() != k || b.len() != k {
            return Err(Error::InvalidCoefficients(format!("expected {k} values of a and b")));
        }
        let a: Vec<Fe> = a.iter().map(|&v| field.elem(v as i64)).collect();
        let b: Vec<Fe> = b.iter().map(|&v| field.elem(v as i64)).collect();
        let valid = coefficient_violations(&field, k, &a, &b).is_empty();
        let mut params = CodeParams { k, field, a, b, coding: Vec::new(), inverse: Vec::new() };
        params.coding = (1..=k).map(|i| params.coding_matrix(i)).collect::<Result<_>>()?;
        params.inverse = if valid {
            (1..=k).map(|i| params.inverse_coding_matrix(i)).collect::<Result<_>>()?
        } else {
            params
                .coding
                .iter()
                .map(|m| DiagMatrix::new(m.entries().iter().map(|&x| field.inv(x).unwrap_or(Fe::ZERO)).collect()))
                .collect()
        };
        Ok(params)
    }

    /// Smallest feasible modulus with the lexicographically first coefficients.
    pub fn search(k: usize) -> Result<Self> {
        let q = smallest_valid_modulus(k)?;
        Self::search_with_modulus(k, q)
    }

    pub fn search_with_modulus(k: usize, q: u32) -> Result<Self> {
        let (a, b) = find_coefficients(k, q)?.ok_or(Error::NoCoefficients { k, q })?;
        Self::new(
            k,
            q,
            &a.iter().map(|x| x.value()).collect::<Vec<_>>(),
            &b.iter().map(|x| x.value()).collect::<Vec<_>>(),
        )
    }

    /// The `(4, 2)` code over `F_7` with `a = (1, 1)`, `b = (3, 4)`.
    pub fn example_k2() -> Self {
        Self::new(2, 7, &[1, 1], &[3, 4]).expect("published parameters are valid")
    }

    /// The `(5, 3)` code over `F_11` with `a = (2, 2, 6)`, `b = (7, 4, 2)`.
    pub fn example_k3() -> Self {
        Self::new(3, 11, &[2, 2, 6], &[7, 4, 2]).expect("published parameters are valid")
    }

    /// Published parameters for `k` in `{2, 3}`.
    pub fn published(k: usize) -> Option<Self> {
        match k {
            2 => Some(Self::example_k2()),
            3 => Some(Self::example_k3()),
            _ => None,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.field.modulus()
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    /// Symbols per node and chunk, `2^(k+1)`.
    pub fn n(&self) -> usize {
        1 << (self.k + 1)
    }

    pub fn node_count(&self) -> usize {
        self.k + 2
    }

    pub fn a(&self) -> &[Fe] {
        &self.a
    }

    pub fn b(&self) -> &[Fe] {
        &self.b
    }

    pub fn is_valid(&self) -> bool {
        coefficient_violations(&self.field, self.k, &self.a, &self.b).is_empty()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.k {
            return Err(Error::IndexOutOfRange { what: "coding matrix index", index: i });
        }
        Ok(())
    }

    /// `A_i`, computed from the sign vectors.
    pub fn coding_matrix(&self, i: usize) -> Result<DiagMatrix> {
        self.check_index(i)?;
        let f = &self.field;
        let (a, b) = (self.a[i - 1], self.b[i - 1]);
        Ok(DiagMatrix::new(
            (0..self.n())
                .map(|t| {
                    let ax = f.mul(a, f.sign(sign_at(i, t)));
                    let bx = f.mul(b, f.sign(sign_at(0, t)));
                    f.add(f.add(ax, bx), Fe::ONE)
                })
                .collect(),
        ))
    }

    /// `A_i^{-1} = 2^{-1} (I + a_i^{-1} X_i (I - b_i X_0))`.
    pub fn inverse_coding_matrix(&self, i: usize) -> Result<DiagMatrix> {
        self.check_index(i)?;
        let f = &self.field;
        let half = f.inv(f.elem(2))?;
        let a_inv = f.inv(self.a[i - 1])?;
        let b = self.b[i - 1];
        let scale = f.mul(half, a_inv);
        Ok(DiagMatrix::new(
            (0..self.n())
                .map(|t| {
                    let inner = f.sub(Fe::ONE, f.mul(b, f.sign(sign_at(0, t))));
                    let term = f.mul(f.mul(scale, f.sign(sign_at(i, t))), inner);
                    f.add(half, term)
                })
                .collect(),
        ))
    }

    /// Class of a 1-based node id.
    pub fn node_class(&self, node: usize) -> Result<NodeClass> {
        match node {
            n if n >= 1 && n <= self.k => Ok(NodeClass::Systematic),
            n if n == self.k + 1 => Ok(NodeClass::Parity1),
            n if n == self.k + 2 => Ok(NodeClass::Parity2),
            n => Err(Error::InvalidNode(n)),
        }
    }

    /// Cached `A_i` for `1 <= i <= k`.
    pub fn a_matrix(&self, i: usize) -> &DiagMatrix {
        &self.coding[i - 1]
    }

    /// Cached `A_i^{-1}` for `1 <= i <= k`.
    pub fn a_inverse(&self, i: usize) -> &DiagMatrix {
        &self.inverse[i - 1]
    }
}

/// Contents of all `k + 2` nodes for one chunk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    nodes: Vec<Vec<Fe>>,
}

impl Codeword {
    pub fn k(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Content of node `id` (1-based).
    pub fn node(&self, id: usize) -> &[Fe] {
        &self.nodes[id - 1]
    }

    pub fn nodes(&self) -> &[Vec<Fe>] {
        &self.nodes
    }

    pub fn systematic(&self) -> &[Vec<Fe>] {
        &self.nodes[..self.k()]
    }

    pub fn into_nodes(self) -> Vec<Vec<Fe>> {
        self.nodes
    }

    /// All nodes except `id`, keyed by node id.
    pub fn without(&self, id: usize) -> BTreeMap<usize, Vec<Fe>> {
        (1..=self.nodes.len()).filter(|&n| n != id).map(|n| (n, self.nodes[n - 1].clone())).collect()
    }
}

pub fn encode(params: &CodeParams, data: &[Vec<Fe>]) -> Result<Codeword> {
    let (k, n, f) = (params.k(), params.n(), params.field());
    if data.len() != k {
        return Err(Error::LengthMismatch { expected: k, actual: data.len() });
    }
    if let Some(bad) = data.iter().find(|d| d.len() != n) {
        return Err(Error::LengthMismatch { expected: n, actual: bad.len() });
    }
    let mut p1 = vec![Fe::ZERO; n];
    let mut p2 = vec![Fe::ZERO; n];
    for (i, part) in data.iter().enumerate() {
        let a = params.a_matrix(i + 1);
        for t in 0..n {
            p1[t] = f.add(p1[t], part[t]);
            p2[t] = f.add(p2[t], f.mul(a.get(t), part[t]));
        }
    }
    let mut nodes = data.to_vec();
    nodes.push(p1);
    nodes.push(p2);
    Ok(Codeword { nodes })
}

/// Rebuilds every node from any `k` of them.
pub fn decode(params: &CodeParams, available: &BTreeMap<usize, Vec<Fe>>) -> Result<Codeword> {
    let (k, n, f) = (params.k(), params.n(), *params.field());
    for (&id, v) in available {
        if id == 0 || id > k + 2 {
            return Err(Error::InvalidNode(id));
        }
        if v.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: v.len() });
        }
    }
    if available.len() < k {
        return Err(Error::NotEnoughNodes { available: available.len(), needed: k });
    }
    let missing: Vec<usize> = (1..=k).filter(|i| !available.contains_key(i)).collect();
    let mut parts: Vec<Option<Vec<Fe>>> = (1..=k).map(|i| available.get(&i).cloned()).collect();
    let p1 = available.get(&(k + 1));
    let p2 = available.get(&(k + 2));

    match missing.as_slice() {
        [] => {}
        [i] => {
            let i = *i;
            if let Some(p1) = p1 {
                let mut v = p1.clone();
                for (l, part) in parts.iter().enumerate() {
                    if let Some(part) = part {
                        debug_assert_ne!(l + 1, i);
                        for t in 0..n {
                            v[t] = f.sub(v[t], part[t]);
                        }
                    }
                }
                parts[i - 1] = Some(v);
            } else {
                let p2 = p2.expect("k nodes available means a parity survives");
                let mut v = p2.clone();
                for (l, part) in parts.iter().enumerate() {
                    if let Some(part) = part {
                        let a = params.a_matrix(l + 1);
                        for t in 0..n {
                            v[t] = f.sub(v[t], f.mul(a.get(t), part[t]));
                        }
                    }
                }
                parts[i - 1] = Some(params.a_inverse(i).apply(&f, &v));
            }
        }
        [i, j] => {
            let (i, j) = (*i, *j);
            let (p1, p2) = (p1.expect("both parities survive"), p2.expect("both parities survive"));
            // rhs1 = f_i + f_j, rhs2 = A_i f_i + A_j f_j
            let mut r1 = p1.clone();
            let mut r2 = p2.clone();
            for (l, part) in parts.iter().enumerate() {
                if let Some(part) = part {
                    let a = params.a_matrix(l + 1);
                    for t in 0..n {
                        r1[t] = f.sub(r1[t], part[t]);
                        r2[t] = f.sub(r2[t], f.mul(a.get(t), part[t]));
                    }
                }
            }
            let (ai, aj) = (params.a_matrix(i), params.a_matrix(j));
            let mut fi = vec![Fe::ZERO; n];
            let mut fj = vec![Fe::ZERO; n];
            for t in 0..n {
                let det_inv = f.inv(f.sub(aj.get(t), ai.get(t)))?;
                fi[t] = f.mul(det_inv, f.sub(f.mul(aj.get(t), r1[t]), r2[t]));
                fj[t] = f.sub(r1[t], fi[t]);
            }
            parts[i - 1] = Some(fi);
            parts[j - 1] = Some(fj);
        }
        _ => unreachable!("at least k nodes available"),
    }

    let data: Vec<Vec<Fe>> = parts.into_iter().map(|p| p.expect("all parts recovered")).collect();
    encode(params, &data)
}

/// How bytes map onto field symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Packing {
    bits: u32,
}

impl Packing {
    /// One byte per symbol when `q > 255`, otherwise `floor(log2 q)` bits.
    pub fn for_modulus(q: u32) -> Self {
        Packing { bits: (31 - q.leading_zeros()).min(8) }
    }

    pub fn with_bits(bits: u32, q: u32) -> Result<Self> {
        if bits == 0 || bits > 8 || (1u32 << bits) > q {
            return Err(Error::Corrupt(format!("packing of {bits} bits per symbol does not fit q = {q}")));
        }
        Ok(Packing { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn symbols_for(&self, byte_len: usize) -> usize {
        (byte_len * 8).div_ceil(self.bits as usize)
    }
}

/// Splits bytes into chunks of `k` parts of `N` symbols each, zero-padded.
pub fn chunk_file(params: &CodeParams, packing: Packing, bytes: &[u8]) -> Vec<Vec<Vec<Fe>>> {
    let (k, n) = (params.k(), params.n());
    let bits = packing.bits;
    let mask = (1u32 << bits) - 1;
    let mut symbols = Vec::with_capacity(packing.symbols_for(bytes.len()));
    let (mut acc, mut have) = (0u32, 0u32);
    for &byte in bytes {
        acc |= (byte as u32) << have;
        have += 8;
        while have >= bits {
            symbols.push(Fe(acc & mask));
            acc >>= bits;
            have -= bits;
        }
    }
    if have > 0 {
        symbols.push(Fe(acc & mask));
    }
    let per_chunk = k * n;
    let chunks = symbols.len().div_ceil(per_chunk);
    symbols.resize(chunks * per_chunk, Fe::ZERO);
    symbols.chunks(per_chunk).map(|c| c.chunks(n).map(<[Fe]>::to_vec).collect()).collect()
}

/// Inverse of [`chunk_file`].
pub fn unchunk(
    params: &CodeParams,
    packing: Packing,
    blocks: &[Vec<Vec<Fe>>],
    original_length: usize,
) -> Result<Vec<u8>> {
    let bits = packing.bits;
    let needed = packing.symbols_for(original_length);
    let mut out = Vec::with_capacity(original_length);
    let (mut acc, mut have) = (0u32, 0u32);
    let mut seen = 0;
    'outer: for block in blocks {
        if block.len() != params.k() {
            return Err(Error::LengthMismatch { expected: params.k(), actual: block.len() });
        }
        for part in block {
            for &s in part {
                if s.value() >= params.q() || s.value() >> bits != 0 {
                    return Err(Error::SymbolOutOfRange { value: s.value(), q: params.q().min(1 << bits) });
                }
                if seen == needed {
                    break 'outer;
                }
                seen += 1;
                acc |= s.value() << have;
                have += bits;
                while have >= 8 && out.len() < original_length {
                    out.push((acc & 0xff) as u8);
                    acc >>= 8;
                    have -= 8;
                }
            }
        }
    }
    if out.len() < original_length {
        return Err(Error::Corrupt(format!("expected {original_length} bytes, found {}", out.len())));
    }
    Ok(out)
}
