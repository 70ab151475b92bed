//! Exact dense linear algebra over GF(q).
//!
//! Everything a span condition needs: reduced row echelon form, row-span
//! membership with coefficient extraction, right kernel bases, and a
//! column-space solver. All routines are deterministic: the pivot is the
//! first nonzero entry in column order and free variables receive unit
//! assignments in ascending index order, so coefficient vectors are
//! reproducible across runs and platforms. Matrices are dense and
//! desk-scale (d up to a few thousand); no attempt at sparsity or fast
//! elimination is made.

use thiserror::Error;

use crate::gf::PrimeField;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Dense row-major matrix over GF(q). Entries are kept reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    /// Builds a rows×cols matrix from row-major data, reducing each entry.
    /// Zero-row and zero-column matrices are legal.
    pub fn new(field: PrimeField, rows: usize, cols: usize, data: Vec<u64>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        let q = field.modulus();
        let data = data.into_iter().map(|v| v % q).collect();
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    /// Builds a matrix from explicit rows; all rows must share a length.
    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Matrix {
        assert!(!rows.is_empty(), "from_rows needs at least one row");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix::new(field, rows.len(), cols, data)
    }

    pub fn zero(field: PrimeField, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.field.modulus();
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Collects the given rows (by index, in the given order) into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &r in indices {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            field: self.field,
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Drops the given column, returning the narrower matrix.
    pub fn drop_column(&self, col: usize) -> Matrix {
        assert!(col < self.cols);
        let mut data = Vec::with_capacity(self.rows * (self.cols - 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c != col {
                    data.push(self.get(r, c));
                }
            }
        }
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols - 1,
            data,
        }
    }

    /// Returns the column as a plain vector.
    pub fn column(&self, col: usize) -> Vec<u64> {
        assert!(col < self.cols);
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0; self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.get(r, c);
            }
        }
        Matrix {
            field: self.field,
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// m·v for a column vector v of length cols.
    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let f = self.field;
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let mut acc = 0;
                for c in 0..self.cols {
                    acc = f.add_raw(acc, f.mul_raw(row[c], v[c]));
                }
                acc
            })
            .collect()
    }

    /// z·m for a row vector z of length rows.
    pub fn row_mul(&self, z: &[u64]) -> Vec<u64> {
        assert_eq!(z.len(), self.rows);
        let f = self.field;
        let mut acc = vec![0u64; self.cols];
        for r in 0..self.rows {
            if z[r] == 0 {
                continue;
            }
            let row = self.row(r);
            for c in 0..self.cols {
                acc[c] = f.add_raw(acc[c], f.mul_raw(z[r], row[c]));
            }
        }
        acc
    }

    /// Appends one row, returning the taller matrix.
    pub fn stack_row(&self, row: &[u64]) -> Matrix {
        assert_eq!(row.len(), self.cols);
        let q = self.field.modulus();
        let mut data = self.data.clone();
        data.extend(row.iter().map(|v| v % q));
        Matrix {
            field: self.field,
            rows: self.rows + 1,
            cols: self.cols,
            data,
        }
    }

    /// Appends one column, returning the wider matrix.
    pub fn augment_column(&self, col: &[u64]) -> Matrix {
        assert_eq!(col.len(), self.rows);
        let q = self.field.modulus();
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.push(col[r] % q);
        }
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols + 1,
            data,
        }
    }
}

/// Result of Gauss-Jordan elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Reduced row echelon form. Pivot choice is the first row (top-down)
/// with a nonzero entry in the current column, so the output — and every
/// solver built on it — is deterministic.
pub fn rref(m: &Matrix) -> Echelon {
    let f = m.field();
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut pivot_row = 0;
    for col in 0..a.cols {
        if pivot_row == a.rows {
            break;
        }
        let Some(r) = (pivot_row..a.rows).find(|&r| a.get(r, col) != 0) else {
            continue;
        };
        if r != pivot_row {
            for c in 0..a.cols {
                let tmp = a.get(r, c);
                let val = a.get(pivot_row, c);
                a.set(r, c, val);
                a.set(pivot_row, c, tmp);
            }
        }
        let inv = f.inv_raw(a.get(pivot_row, col)).expect("nonzero pivot");
        if inv != 1 {
            for c in col..a.cols {
                let v = a.get(pivot_row, c);
                a.set(pivot_row, c, f.mul_raw(v, inv));
            }
        }
        for r2 in 0..a.rows {
            if r2 == pivot_row {
                continue;
            }
            let factor = a.get(r2, col);
            if factor == 0 {
                continue;
            }
            for c in col..a.cols {
                let v = a.get(r2, c);
                let sub = f.mul_raw(factor, a.get(pivot_row, c));
                a.set(r2, c, f.sub_raw(v, sub));
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    let rank = pivots.len();
    Echelon {
        matrix: a,
        pivots,
        rank,
    }
}

pub fn rank(m: &Matrix) -> usize {
    rref(m).rank
}

/// Tests target ∈ row span of m without extracting coefficients: reduces
/// the target against the pivot rows of rref(m) and checks the residual.
pub fn in_row_span(m: &Matrix, target: &[u64]) -> bool {
    assert_eq!(target.len(), m.cols());
    let f = m.field();
    let q = f.modulus();
    let ech = rref(m);
    let mut residual: Vec<u64> = target.iter().map(|v| v % q).collect();
    for (i, &p) in ech.pivots.iter().enumerate() {
        let factor = residual[p];
        if factor == 0 {
            continue;
        }
        let row = ech.matrix.row(i);
        for c in p..m.cols() {
            residual[c] = f.sub_raw(residual[c], f.mul_raw(factor, row[c]));
        }
    }
    residual.iter().all(|&v| v == 0)
}

/// Solves m·x = rhs for a column vector x. Returns the canonical solution
/// with every free variable set to zero, or None when the system is
/// inconsistent.
pub fn solve(m: &Matrix, rhs: &[u64]) -> Result<Option<Vec<u64>>, LinalgError> {
    if rhs.len() != m.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows(),
            got: rhs.len(),
        });
    }
    let ech = rref(&m.augment_column(rhs));
    // A pivot in the augmented column certifies rank(m) < rank([m|rhs]).
    if ech.pivots.last() == Some(&m.cols()) {
        return Ok(None);
    }
    let mut x = vec![0u64; m.cols()];
    for (i, &p) in ech.pivots.iter().enumerate() {
        x[p] = ech.matrix.get(i, m.cols());
    }
    debug_assert_eq!(m.mul_vec(&x), rhs.iter().map(|v| v % m.field().modulus()).collect::<Vec<_>>());
    Ok(Some(x))
}

/// Finds z with z·m = target, i.e. expresses the target as a combination
/// of m's rows. The canonical solution puts zero coefficients on rows
/// that are not pivots of the transposed system. The returned z is
/// re-verified by multiplication before return; when no solution exists,
/// target ∉ row span, certified by the rank comparison inside `solve`.
pub fn row_combination(m: &Matrix, target: &[u64]) -> Result<Option<Vec<u64>>, LinalgError> {
    if target.len() != m.cols() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.cols(),
            got: target.len(),
        });
    }
    let solution = solve(&m.transpose(), target)?;
    match solution {
        Some(z) => {
            let q = m.field().modulus();
            let reduced: Vec<u64> = target.iter().map(|v| v % q).collect();
            assert_eq!(m.row_mul(&z), reduced, "solver certificate failed");
            Ok(Some(z))
        }
        None => {
            debug_assert!(rank(&m.stack_row(target)) > rank(m));
            Ok(None)
        }
    }
}

/// Basis of the right kernel {v : m·v = 0}. One vector per free column,
/// with a unit in the free column and back-substituted pivot entries, in
/// ascending free-column order. Count is cols − rank by rank-nullity.
pub fn kernel_basis(m: &Matrix) -> Vec<Vec<u64>> {
    let f = m.field();
    let ech = rref(m);
    let mut basis = Vec::with_capacity(m.cols() - ech.rank);
    let mut is_pivot = vec![false; m.cols()];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    for free in 0..m.cols() {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![0u64; m.cols()];
        v[free] = 1;
        for (i, &p) in ech.pivots.iter().enumerate() {
            v[p] = f.neg_raw(ech.matrix.get(i, free));
        }
        debug_assert!(m.mul_vec(&v).iter().all(|&x| x == 0));
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn rref_examples() {
        let m = Matrix::from_rows(f(7), &[vec![1, 1], vec![1, 2]]);
        let ech = rref(&m);
        assert_eq!(ech.matrix, Matrix::identity(f(7), 2));
        assert_eq!(ech.pivots, vec![0, 1]);
        assert_eq!(ech.rank, 2);

        let z = Matrix::zero(f(5), 3, 3);
        let ech = rref(&z);
        assert_eq!(ech.matrix, z);
        assert!(ech.pivots.is_empty());
        assert_eq!(ech.rank, 0);

        let m = Matrix::from_rows(f(7), &[vec![1, 2], vec![2, 4]]);
        let ech = rref(&m);
        assert_eq!(ech.matrix, Matrix::from_rows(f(7), &[vec![1, 2], vec![0, 0]]));
        assert_eq!(ech.rank, 1);
    }

    #[test]
    fn rref_is_idempotent() {
        let mut seed = 12345u64;
        let mut next = move || {
            // xorshift; plenty for test data
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for q in [2u64, 3, 7, 101] {
            for _ in 0..20 {
                let rows = 1 + (next() % 6) as usize;
                let cols = 1 + (next() % 6) as usize;
                let data: Vec<u64> = (0..rows * cols).map(|_| next() % q).collect();
                let m = Matrix::new(f(q), rows, cols, data);
                let once = rref(&m);
                let twice = rref(&once.matrix);
                assert_eq!(once.matrix, twice.matrix);
                assert_eq!(once.pivots, twice.pivots);
            }
        }
    }

    #[test]
    fn row_combination_lagrange_example() {
        // Rows (1, x) at x = 1, 2, 3 over F7; target (1, 0) asks for
        // coefficients interpolating the value at 0.
        let m = Matrix::from_rows(f(7), &[vec![1, 1], vec![1, 2], vec![1, 3]]);
        let z = row_combination(&m, &[1, 0]).unwrap().unwrap();
        assert_eq!(m.row_mul(&z), vec![1, 0]);
        // The textbook Lagrange coefficients (3, 4, 1) also solve it.
        assert_eq!(m.row_mul(&[3, 4, 1]), vec![1, 0]);
    }

    #[test]
    fn row_combination_identity_rows() {
        let m = Matrix::identity(f(5), 4);
        for i in 0..4 {
            let mut target = vec![0u64; 4];
            target[i] = 1;
            let z = row_combination(&m, &target).unwrap().unwrap();
            assert_eq!(z, target);
        }
    }

    #[test]
    fn row_combination_absent_and_errors() {
        let m = Matrix::from_rows(f(2), &[vec![0, 1]]);
        assert_eq!(row_combination(&m, &[1, 0]).unwrap(), None);
        assert_eq!(
            row_combination(&m, &[1, 0, 0]),
            Err(LinalgError::DimensionMismatch {
                expected: 2,
                got: 3
            })
        );
    }

    #[test]
    fn row_combination_iff_rank_agrees() {
        let mut seed = 999u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for q in [2u64, 3, 5] {
            for _ in 0..40 {
                let rows = 1 + (next() % 4) as usize;
                let cols = 1 + (next() % 4) as usize;
                let m = Matrix::new(
                    f(q),
                    rows,
                    cols,
                    (0..rows * cols).map(|_| next() % q).collect(),
                );
                let target: Vec<u64> = (0..cols).map(|_| next() % q).collect();
                let found = row_combination(&m, &target).unwrap().is_some();
                let rank_same = rank(&m.stack_row(&target)) == rank(&m);
                assert_eq!(found, rank_same);
                assert_eq!(found, in_row_span(&m, &target));
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let m = Matrix::from_rows(f(2), &[vec![1, 1]]);
        assert_eq!(kernel_basis(&m), vec![vec![1, 1]]);

        let m = Matrix::from_rows(f(7), &[vec![1, 1], vec![1, 2]]);
        assert!(kernel_basis(&m).is_empty());

        let m = Matrix::from_rows(f(7), &[vec![1, 2, 3]]);
        assert_eq!(kernel_basis(&m), vec![vec![5, 1, 0], vec![4, 0, 1]]);
    }

    #[test]
    fn kernel_satisfies_rank_nullity() {
        let mut seed = 4242u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for q in [2u64, 3, 11] {
            for _ in 0..30 {
                let rows = 1 + (next() % 5) as usize;
                let cols = 1 + (next() % 5) as usize;
                let m = Matrix::new(
                    f(q),
                    rows,
                    cols,
                    (0..rows * cols).map(|_| next() % q).collect(),
                );
                let basis = kernel_basis(&m);
                assert_eq!(basis.len(), cols - rank(&m));
                for v in &basis {
                    assert!(m.mul_vec(v).iter().all(|&x| x == 0));
                }
                // Independence: the basis matrix has full row rank.
                if !basis.is_empty() {
                    let b = Matrix::from_rows(f(q), &basis);
                    assert_eq!(rank(&b), basis.len());
                }
            }
        }
    }

    #[test]
    fn solve_column_system() {
        // 2x + 3y = 1, x + y = 4 over F7 has the unique solution x=4, y=0.
        let m = Matrix::from_rows(f(7), &[vec![2, 3], vec![1, 1]]);
        let x = solve(&m, &[1, 4]).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x), vec![1, 4]);
        assert_eq!(x, vec![4, 0]);
        // Inconsistent system.
        let m = Matrix::from_rows(f(7), &[vec![1, 1], vec![2, 2]]);
        assert_eq!(solve(&m, &[1, 3]).unwrap(), None);
    }

    #[test]
    fn zero_row_matrices_are_legal() {
        let m = Matrix::new(f(3), 0, 4, vec![]);
        assert_eq!(rref(&m).rank, 0);
        assert!(!in_row_span(&m, &[1, 0, 0, 0]));
        assert_eq!(kernel_basis(&m).len(), 4);
        let sol = solve(&m, &[]).unwrap().unwrap();
        assert_eq!(sol, vec![0, 0, 0, 0]);
    }

    #[test]
    fn determinism_repeated_runs() {
        let m = Matrix::from_rows(f(11), &[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        let a = row_combination(&m, &[1, 0, 0]).unwrap();
        let b = row_combination(&m, &[1, 0, 0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(kernel_basis(&m), kernel_basis(&m));
    }
}
