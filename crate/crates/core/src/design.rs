//! Hadamard-design sign patterns and the Sylvester Hadamard matrix.
//!
//! For a code with `k` systematic nodes and `N = 2^(k+1)`, level `i` of the
//! design is the length-`N` sign vector made of alternating runs of `2^i`
//! ones and `2^i` minus-ones. Its entries are the main diagonal of `X_i`.

use crate::error::{Error, Result};
use crate::field::{Fe, OpCounter, PrimeField};

/// Diagonal of `X_i`: `entries[j] = (-1)^floor(j / 2^i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignVector {
    level: usize,
    k: usize,
    entries: Vec<i8>,
}

impl SignVector {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, j: usize) -> i8 {
        self.entries[j]
    }
}

/// Single entry of the level-`i` sign vector.
#[inline]
pub fn sign_at(i: usize, j: usize) -> i8 {
    if (j >> i) & 1 == 0 {
        1
    } else {
        -1
    }
}

pub fn sign_vector(i: usize, k: usize) -> Result<SignVector> {
    if i > k {
        return Err(Error::IndexOutOfRange { what: "sign vector level", index: i });
    }
    let n = 1usize << (k + 1);
    Ok(SignVector { level: i, k, entries: (0..n).map(|j| sign_at(i, j)).collect() })
}

/// How `x_i[j]` relates to `x_i[j + 2^l]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Equal,
    Negated,
}

/// Sign relation between positions `j` and `j + 2^l` of level `i`, valid
/// whenever `j = mu * 2^(l+1) + nu` with `nu < 2^l`.
pub fn lemma1_relation(i: usize, l: usize, j: usize, k: usize) -> Result<Relation> {
    if i > k {
        return Err(Error::IndexOutOfRange { what: "level i", index: i });
    }
    if l > k {
        return Err(Error::IndexOutOfRange { what: "level l", index: l });
    }
    let mu = j >> (l + 1);
    let nu = j & ((1 << (l + 1)) - 1);
    let valid = nu < (1 << l) && mu < (1 << (k - l)) && (mu << (l + 1)) + nu == j;
    if !valid {
        return Err(Error::BadDecomposition { j, l, k });
    }
    Ok(if i == l { Relation::Negated } else { Relation::Equal })
}

/// `N - 1 - j - (-1)^j`, the index paired with `j < N/2` in parity-2 repair.
pub fn lemma2_partner(j: usize, n: usize) -> Result<usize> {
    if j >= n / 2 {
        return Err(Error::IndexOutOfRange { what: "partner index (must be < N/2)", index: j });
    }
    Ok(if j.is_multiple_of(2) { n - 2 - j } else { n - j })
}

/// A `±1` square matrix of order `2^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<Vec<i8>>,
}

impl HadamardMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[Vec<i8>] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.entries[r][c]
    }
}

/// Entry `(r, c)` of the Sylvester matrix of any order: `(-1)^popcount(r & c)`.
#[inline]
pub fn sylvester_entry(r: usize, c: usize) -> i8 {
    if (r & c).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sylvester Hadamard matrix `H_k`, built by the block doubling recursion.
pub fn sylvester(k: usize) -> Result<HadamardMatrix> {
    if k < 1 {
        return Err(Error::IndexOutOfRange { what: "Sylvester order (k >= 1)", index: k });
    }
    let mut h: Vec<Vec<i8>> = vec![vec![1]];
    for _ in 0..k {
        let m = h.len();
        let mut next = vec![vec![0i8; 2 * m]; 2 * m];
        for r in 0..m {
            for c in 0..m {
                let v = h[r][c];
                next[r][c] = v;
                next[r][c + m] = v;
                next[r + m][c] = v;
                next[r + m][c + m] = -v;
            }
        }
        h = next;
    }
    Ok(HadamardMatrix { order: 1 << k, entries: h })
}

fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// In-place butterfly network; charges two adds per butterfly.
fn butterflies(field: &PrimeField, z: &mut [Fe], counter: &mut OpCounter) {
    let n = z.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for t in block..block + h {
                let (u, v) = (z[t], z[t + h]);
                z[t] = field.add_counted(u, v, counter);
                z[t + h] = field.sub_counted(u, v, counter);
            }
        }
        h *= 2;
    }
}

/// `H_k z` via the fast transform. Uses exactly `k * 2^k` additions.
pub fn fast_hadamard_apply(field: &PrimeField, z: &[Fe], counter: &mut OpCounter) -> Result<Vec<Fe>> {
    log2_exact(z.len())?;
    let mut out = z.to_vec();
    butterflies(field, &mut out, counter);
    Ok(out)
}

/// `(H_{k-1}  ±H_{k-1}) z` for `z` of length `2^k`: both halves are
/// transformed separately, then combined. Uses `k * 2^k - 2^(k-1)` additions.
pub fn half_hadamard_apply(
    field: &PrimeField,
    z: &[Fe],
    negate_second: bool,
    counter: &mut OpCounter,
) -> Result<Vec<Fe>> {
    let k = log2_exact(z.len())?;
    if k < 1 {
        return Err(Error::IndexOutOfRange { what: "half transform length (>= 2)", index: z.len() });
    }
    let half = z.len() / 2;
    let mut top = z[..half].to_vec();
    let mut bottom = z[half..].to_vec();
    butterflies(field, &mut top, counter);
    butterflies(field, &mut bottom, counter);
    Ok(top
        .iter()
        .zip(&bottom)
        .map(|(&u, &v)| if negate_second { field.sub_counted(u, v, counter) } else { field.add_counted(u, v, counter) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_apply(field: &PrimeField, rows: &[Vec<i8>], z: &[Fe]) -> Vec<Fe> {
        rows.iter()
            .map(|row| row.iter().zip(z).fold(Fe::ZERO, |acc, (&s, &x)| field.add(acc, field.mul(field.sign(s), x))))
            .collect()
    }

    #[test]
    fn sign_vector_examples() {
        assert_eq!(sign_vector(0, 2).unwrap().entries(), &[1, -1, 1, -1, 1, -1, 1, -1]);
        assert_eq!(sign_vector(1, 2).unwrap().entries(), &[1, 1, -1, -1, 1, 1, -1, -1]);
        assert_eq!(sign_vector(2, 2).unwrap().entries(), &[1, 1, 1, 1, -1, -1, -1, -1]);
        let x3 = sign_vector(3, 3).unwrap();
        assert!(x3.entries()[..8].iter().all(|&s| s == 1));
        assert!(x3.entries()[8..].iter().all(|&s| s == -1));
        assert!(sign_vector(3, 2).is_err());
    }

    #[test]
    fn design_properties_exhaustive() {
        for k in 1..=8 {
            let n = 1usize << (k + 1);
            for i in 0..=k {
                let x = sign_vector(i, k).unwrap();
                let x = x.entries();
                for j in 0..n {
                    let run = if (j / (1 << i)) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(x[j], run);
                    assert_eq!(x[j], -x[n - 1 - j]);
                    if j + (1 << i) < n {
                        assert_eq!(x[j], -x[j + (1 << i)]);
                    }
                    if j + (1 << (i + 1)) < n {
                        assert_eq!(x[j], x[j + (1 << (i + 1))]);
                    }
                }
            }
        }
    }

    #[test]
    fn relation_examples() {
        assert_eq!(lemma1_relation(1, 1, 0, 2).unwrap(), Relation::Negated);
        assert_eq!(lemma1_relation(0, 1, 0, 2).unwrap(), Relation::Equal);
        // nu = 2 is not below 2^1
        assert!(lemma1_relation(0, 1, 2, 2).is_err());
        assert!(lemma1_relation(0, 1, 8, 2).is_err());
    }

    #[test]
    fn relation_exhaustive() {
        for k in 1..=6 {
            let n = 1usize << (k + 1);
            for l in 0..=k {
                for i in 0..=k {
                    let x = sign_vector(i, k).unwrap();
                    for j in 0..n {
                        match lemma1_relation(i, l, j, k) {
                            Ok(rel) => {
                                let other = x.get(j + (1 << l));
                                let expected = if rel == Relation::Negated { -other } else { other };
                                assert_eq!(x.get(j), expected, "k={k} i={i} l={l} j={j}");
                            }
                            Err(_) => assert!(j % (1 << (l + 1)) >= (1 << l)),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn partner_examples_and_contract() {
        assert_eq!(lemma2_partner(2, 8).unwrap(), 4);
        assert_eq!(lemma2_partner(3, 8).unwrap(), 5);
        assert!(lemma2_partner(4, 16).is_ok());
        assert!(lemma2_partner(8, 16).is_err());
        for k in 1..=6 {
            let n = 1usize << (k + 1);
            for j in 0..n / 2 {
                let p = lemma2_partner(j, n).unwrap();
                assert_eq!(p as i64, n as i64 - 1 - j as i64 - if j % 2 == 0 { 1 } else { -1 });
                assert_eq!(sign_at(0, p), sign_at(0, j));
                for i in 1..=k {
                    assert_eq!(sign_at(i, p), -sign_at(i, j));
                }
            }
        }
    }

    #[test]
    fn sylvester_small_orders() {
        assert_eq!(sylvester(1).unwrap().entries(), &[vec![1, 1], vec![1, -1]]);
        assert_eq!(
            sylvester(2).unwrap().entries(),
            &[vec![1, 1, 1, 1], vec![1, -1, 1, -1], vec![1, 1, -1, -1], vec![1, -1, -1, 1]]
        );
        assert!(sylvester(0).is_err());
    }

    #[test]
    fn sylvester_is_orthogonal_and_matches_closed_form() {
        for k in 1..=6 {
            let h = sylvester(k).unwrap();
            let m = h.order();
            for r in 0..m {
                for c in 0..m {
                    assert_eq!(h.get(r, c), sylvester_entry(r, c));
                    let dot: i64 = (0..m).map(|t| (h.get(r, t) * h.get(c, t)) as i64).sum();
                    assert_eq!(dot, if r == c { m as i64 } else { 0 });
                }
            }
        }
    }

    #[test]
    fn fast_transform_matches_dense_and_counts() {
        let field = PrimeField::new(257).unwrap();
        for k in 1..=10 {
            let n = 1usize << k;
            let z: Vec<Fe> = (0..n).map(|t| field.elem((t * 37 + 11) as i64)).collect();
            let mut c = OpCounter::new();
            let fast = fast_hadamard_apply(&field, &z, &mut c).unwrap();
            assert_eq!(c.adds(), (k * n) as u64);
            assert_eq!(c.muls(), 0);
            if k <= 7 {
                assert_eq!(fast, dense_apply(&field, sylvester(k).unwrap().entries(), &z));
            }
        }
        let mut c = OpCounter::new();
        let (a, b) = (field.elem(5), field.elem(9));
        let out = fast_hadamard_apply(&field, &[a, b], &mut c).unwrap();
        assert_eq!(out, vec![field.elem(14), field.elem(-4)]);
        assert_eq!(c.adds(), 2);
        assert!(fast_hadamard_apply(&field, &[a, b, a], &mut c).is_err());
    }

    #[test]
    fn half_transform_matches_dense_and_counts() {
        let field = PrimeField::new(11).unwrap();
        for k in 1..=8 {
            let n = 1usize << k;
            let z: Vec<Fe> = (0..n).map(|t| field.elem((t * t + 3) as i64)).collect();
            for negate in [false, true] {
                let mut c = OpCounter::new();
                let out = half_hadamard_apply(&field, &z, negate, &mut c).unwrap();
                assert_eq!(c.adds(), (k * n - n / 2) as u64);
                let rows: Vec<Vec<i8>> = (0..n / 2)
                    .map(|r| {
                        (0..n)
                            .map(|col| {
                                let s = sylvester_entry(r, col % (n / 2));
                                if negate && col >= n / 2 {
                                    -s
                                } else {
                                    s
                                }
                            })
                            .collect()
                    })
                    .collect();
                assert_eq!(out, dense_apply(&field, &rows, &z));
            }
        }
        let mut c = OpCounter::new();
        let out = half_hadamard_apply(&field, &[field.elem(3), field.elem(4)], false, &mut c).unwrap();
        assert_eq!(out, vec![field.elem(7)]);
        assert_eq!(c.adds(), 1);
        let mut c = OpCounter::new();
        half_hadamard_apply(&field, &[Fe::ONE; 8], true, &mut c).unwrap();
        assert_eq!(c.adds(), 20);
    }
}
