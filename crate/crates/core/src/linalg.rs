//! Dense matrices and sparse counted linear maps over `F_q`.
//!
//! [`Matrix`] is the plain row-major form used for construction, composition
//! and rank checks. [`LinearMap`] is the execution form: each row keeps only
//! its nonzero coefficients, pre-classified so that applying the map charges
//! operations the same way on every input.

use crate::error::{Error, Result};
use crate::field::{Fe, OpCounter, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Fe>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Fe>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Rows as centered integers, handy for comparing against `±1` tables.
    pub fn to_signed_rows(&self, field: &PrimeField) -> Vec<Vec<i64>> {
        (0..self.rows).map(|r| self.row(r).iter().map(|&x| field.centered(x)).collect()).collect()
    }

    pub fn mul(&self, field: &PrimeField, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(r, t);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = field.add(out.get(r, c), field.mul(a, rhs.get(t, c)));
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, field: &PrimeField, v: &[Fe]) -> Vec<Fe> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).fold(Fe::ZERO, |acc, (&a, &x)| field.add(acc, field.mul(a, x))))
            .collect()
    }

    /// `self` on top of `below`.
    pub fn stack(&self, below: &Matrix) -> Matrix {
        assert_eq!(self.cols, below.cols, "dimension mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Matrix { rows: self.rows + below.rows, cols: self.cols, data }
    }

    /// Right-multiplication by a diagonal matrix (scales columns).
    pub fn scale_columns(&self, field: &PrimeField, diag: &[Fe]) -> Matrix {
        assert_eq!(self.cols, diag.len(), "dimension mismatch");
        let mut out = self.clone();
        for r in 0..self.rows {
            for (c, &d) in diag.iter().enumerate() {
                out.set(r, c, field.mul(self.get(r, c), d));
            }
        }
        out
    }

    pub fn rank(&self, field: &PrimeField) -> usize {
        let mut m = self.clone();
        m.row_reduce(field)
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self, field: &PrimeField) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::LengthMismatch { expected: self.rows, actual: self.cols });
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, Fe::ONE);
        }
        if aug.row_reduce_cols(field, n) < n {
            return Err(Error::Singular);
        }
        let mut inv = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, aug.get(r, n + c));
            }
        }
        Ok(inv)
    }

    fn row_reduce(&mut self, field: &PrimeField) -> usize {
        let cols = self.cols;
        self.row_reduce_cols(field, cols)
    }

    /// Reduced row echelon form on the first `pivot_cols` columns; returns the rank.
    fn row_reduce_cols(&mut self, field: &PrimeField, pivot_cols: usize) -> usize {
        let mut rank = 0;
        for c in 0..pivot_cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| !self.get(r, c).is_zero()) else {
                continue;
            };
            self.swap_rows(p, rank);
            let inv = field.inv(self.get(rank, c)).expect("pivot is nonzero");
            for t in 0..self.cols {
                let v = field.mul(self.get(rank, t), inv);
                self.set(rank, t, v);
            }
            for r in 0..self.rows {
                let factor = self.get(r, c);
                if r == rank || factor.is_zero() {
                    continue;
                }
                for t in 0..self.cols {
                    let v = field.sub(self.get(r, t), field.mul(factor, self.get(rank, t)));
                    self.set(r, t, v);
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

/// A plan-time constant, classified for the counting convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coef {
    One,
    MinusOne,
    General(Fe),
}

impl Coef {
    /// `None` for zero.
    pub fn classify(field: &PrimeField, c: Fe) -> Option<Coef> {
        if c.is_zero() {
            None
        } else if c == Fe::ONE {
            Some(Coef::One)
        } else if c == field.minus_one() {
            Some(Coef::MinusOne)
        } else {
            Some(Coef::General(c))
        }
    }

    pub fn value(self, field: &PrimeField) -> Fe {
        match self {
            Coef::One => Fe::ONE,
            Coef::MinusOne => field.minus_one(),
            Coef::General(c) => c,
        }
    }

    pub fn is_general(self) -> bool {
        matches!(self, Coef::General(_))
    }
}

/// Sparse matrix whose application is charged to an [`OpCounter`].
///
/// A row with `t` nonzero terms costs `t - 1` adds when evaluated and `t`
/// adds when accumulated into an existing value. Each [`Coef::General`]
/// term costs one mul; `±1` terms are free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    cols: usize,
    rows: Vec<Vec<(usize, Coef)>>,
}

impl LinearMap {
    pub fn from_matrix(field: &PrimeField, m: &Matrix) -> Self {
        let rows = (0..m.rows())
            .map(|r| {
                m.row(r)
                    .iter()
                    .enumerate()
                    .filter_map(|(c, &v)| Coef::classify(field, v).map(|coef| (c, coef)))
                    .collect()
            })
            .collect();
        LinearMap { cols: m.cols(), rows }
    }

    pub fn diagonal(field: &PrimeField, diag: &[Fe]) -> Self {
        let rows = diag
            .iter()
            .enumerate()
            .map(|(i, &v)| Coef::classify(field, v).map(|c| vec![(i, c)]).unwrap_or_default())
            .collect();
        LinearMap { cols: diag.len(), rows }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[(usize, Coef)] {
        &self.rows[r]
    }

    pub fn nonzeros_in_row(&self, r: usize) -> usize {
        self.rows[r].len()
    }

    pub fn to_matrix(&self, field: &PrimeField) -> Matrix {
        let mut m = Matrix::zeros(self.rows.len(), self.cols);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, coef) in row {
                m.set(r, c, coef.value(field));
            }
        }
        m
    }

    /// Adds and muls charged by one [`LinearMap::apply`].
    pub fn apply_cost(&self) -> (u64, u64) {
        let adds = self.rows.iter().map(|r| r.len().saturating_sub(1) as u64).sum();
        let muls = self.rows.iter().flatten().filter(|(_, c)| c.is_general()).count() as u64;
        (adds, muls)
    }

    fn term(field: &PrimeField, coef: Coef, x: Fe, counter: &mut OpCounter) -> Fe {
        match coef {
            Coef::One => x,
            Coef::MinusOne => field.neg(x),
            Coef::General(c) => {
                counter.count_mul(1);
                field.mul(c, x)
            }
        }
    }

    fn eval_row(&self, field: &PrimeField, r: usize, x: &[Fe], counter: &mut OpCounter) -> Option<Fe> {
        let mut terms = self.rows[r].iter();
        let &(c0, coef0) = terms.next()?;
        let mut acc = Self::term(field, coef0, x[c0], counter);
        for &(c, coef) in terms {
            acc = match coef {
                // subtraction of a variable symbol: one add, no mul
                Coef::MinusOne => field.sub_counted(acc, x[c], counter),
                _ => {
                    let t = Self::term(field, coef, x[c], counter);
                    field.add_counted(acc, t, counter)
                }
            };
        }
        Some(acc)
    }

    pub fn apply(&self, field: &PrimeField, x: &[Fe], counter: &mut OpCounter) -> Result<Vec<Fe>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch { expected: self.cols, actual: x.len() });
        }
        Ok((0..self.rows.len()).map(|r| self.eval_row(field, r, x, counter).unwrap_or(Fe::ZERO)).collect())
    }

    /// `acc += self * x`, or `acc -= self * x` when `subtract` is set.
    pub fn accumulate(
        &self,
        field: &PrimeField,
        acc: &mut [Fe],
        x: &[Fe],
        subtract: bool,
        counter: &mut OpCounter,
    ) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch { expected: self.cols, actual: x.len() });
        }
        if acc.len() != self.rows.len() {
            return Err(Error::LengthMismatch { expected: self.rows.len(), actual: acc.len() });
        }
        for (r, slot) in acc.iter_mut().enumerate() {
            if let Some(v) = self.eval_row(field, r, x, counter) {
                *slot =
                    if subtract { field.sub_counted(*slot, v, counter) } else { field.add_counted(*slot, v, counter) };
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(field: &PrimeField, rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_rows(
            (0..r).map(|_| (0..c).map(|_| field.elem(rng.gen_range(0..field.modulus()) as i64)).collect()).collect(),
        )
    }

    #[test]
    fn inverse_round_trip() {
        let field = PrimeField::new(13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut found = 0;
        while found < 20 {
            let m = random_matrix(&field, &mut rng, 6, 6);
            match m.inverse(&field) {
                Ok(inv) => {
                    assert_eq!(m.mul(&field, &inv), Matrix::identity(6));
                    assert_eq!(m.rank(&field), 6);
                    found += 1;
                }
                Err(Error::Singular) => assert!(m.rank(&field) < 6),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn rank_of_known_matrices() {
        let field = PrimeField::new(7).unwrap();
        let e = |v: i64| field.elem(v);
        let m = Matrix::from_rows(vec![vec![e(1), e(2), e(3)], vec![e(2), e(4), e(6)], vec![e(0), e(1), e(1)]]);
        assert_eq!(m.rank(&field), 2);
        assert_eq!(Matrix::zeros(3, 4).rank(&field), 0);
        assert_eq!(Matrix::identity(5).rank(&field), 5);
    }

    #[test]
    fn linear_map_agrees_with_dense_and_charges_per_term() {
        let field = PrimeField::new(11).unwrap();
        let e = |v: i64| field.elem(v);
        let m = Matrix::from_rows(vec![
            vec![e(1), e(0), e(-1), e(0)],
            vec![e(3), e(1), e(0), e(5)],
            vec![e(0), e(0), e(0), e(0)],
        ]);
        let map = LinearMap::from_matrix(&field, &m);
        let x = vec![e(4), e(9), e(2), e(7)];
        let mut c = OpCounter::new();
        assert_eq!(map.apply(&field, &x, &mut c).unwrap(), m.mul_vec(&field, &x));
        assert_eq!((c.adds(), c.muls()), (3, 2));
        assert_eq!(map.apply_cost(), (3, 2));

        let mut acc = vec![e(1), e(1), e(1)];
        let mut c = OpCounter::new();
        map.accumulate(&field, &mut acc, &x, true, &mut c).unwrap();
        let prod = m.mul_vec(&field, &x);
        assert_eq!(acc, (0..3).map(|r| field.sub(e(1), prod[r])).collect::<Vec<_>>());
        // the empty row is skipped entirely
        assert_eq!((c.adds(), c.muls()), (5, 2));
        assert_eq!(map.to_matrix(&field), m);
    }
}
