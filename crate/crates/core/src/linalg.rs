//! Dense linear algebra over GF(q^m).
//!
//! Every elimination uses the same pivot rule: walk the columns left to right
//! and take the first row (top to bottom, among rows not yet used) holding a
//! nonzero entry. Results therefore depend only on the input matrix, and the
//! particular solution returned by [`ParticularSolver`] is a fixed linear
//! function of the right-hand side.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
    field: FieldCtx,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Matrix {}x{} over {:?}",
            self.rows, self.cols, self.field
        )?;
        for r in 0..self.rows {
            let row: Vec<u64> = self.row(r).iter().map(|e| e.index()).collect();
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(field: &FieldCtx, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
            field: field.clone(),
        }
    }

    pub fn identity(field: &FieldCtx, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    pub fn from_fn(
        field: &FieldCtx,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElement,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix {
            rows,
            cols,
            data,
            field: field.clone(),
        }
    }

    pub fn from_rows(field: &FieldCtx, rows: &[Vec<FieldElement>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for &e in row {
                field.check(e)?;
                data.push(e);
            }
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
            field: field.clone(),
        })
    }

    /// Convenience constructor from small integers reduced into the prime subfield.
    pub fn from_ints(field: &FieldCtx, rows: &[&[i64]]) -> Result<Self> {
        let rows: Vec<Vec<FieldElement>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_int(v)).collect())
            .collect();
        Self::from_rows(field, &rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    self.get(r, c)
                        == if r == c {
                            FieldElement::ONE
                        } else {
                            FieldElement::ZERO
                        }
                })
            })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = f.add(out.get(r, c), f.mul(a, other.get(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for matrix with {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(FieldElement::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        Matrix::from_fn(&self.field, rows.len(), self.cols, |r, c| {
            self.get(rows[r], c)
        })
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        Matrix::from_fn(&self.field, self.rows, cols.len(), |r, c| {
            self.get(r, cols[c])
        })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot concatenate {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        Ok(Matrix::from_fn(
            &self.field,
            self.rows,
            self.cols + other.cols,
            |r, c| {
                if c < self.cols {
                    self.get(r, c)
                } else {
                    other.get(r, c - self.cols)
                }
            },
        ))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(&self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: FieldElement) {
        for c in 0..self.cols {
            let v = self.field.mul(self.get(r, c), s);
            self.set(r, c, v);
        }
    }

    /// row[dst] -= s * row[src]
    fn sub_scaled_row(&mut self, dst: usize, src: usize, s: FieldElement) {
        for c in 0..self.cols {
            let t = self.field.mul(s, self.get(src, c));
            let v = self.field.sub(self.get(dst, c), t);
            self.set(dst, c, v);
        }
    }
}

/// Reduced row echelon form of the first `pivot_cols` columns of `m`, in place.
/// Returns the pivot column of each pivot row.
fn gauss_jordan(m: &mut Matrix, pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..pivot_cols {
        if row == m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
            continue;
        };
        m.swap_rows(row, p);
        let inv = m.field.inv(m.get(row, col)).expect("pivot is nonzero");
        m.scale_row(row, inv);
        for r in 0..m.rows {
            if r != row {
                let s = m.get(r, col);
                if !s.is_zero() {
                    m.sub_scaled_row(r, row, s);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Reduced row echelon form of `m` together with the row transform applied.
#[derive(Clone, Debug)]
pub struct Echelon {
    /// Reduced row echelon form of the input.
    pub reduced: Matrix,
    /// Pivot column of each of the first `rank` rows.
    pub pivots: Vec<usize>,
    /// Invertible `rows x rows` matrix with `transform * input = reduced`.
    pub transform: Matrix,
}

impl Echelon {
    pub fn new(m: &Matrix) -> Self {
        let mut aug = m
            .hstack(&Matrix::identity(&m.field, m.rows))
            .expect("identity has matching rows");
        let pivots = gauss_jordan(&mut aug, m.cols);
        let all_rows: Vec<usize> = (0..m.rows).collect();
        let reduced = aug.select_cols(&(0..m.cols).collect::<Vec<_>>());
        let transform = aug
            .select_rows(&all_rows)
            .select_cols(&(m.cols..m.cols + m.rows).collect::<Vec<_>>());
        Echelon {
            reduced,
            pivots,
            transform,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn rank(m: &Matrix) -> usize {
    let mut work = m.clone();
    gauss_jordan(&mut work, m.cols).len()
}

/// Precomputed particular-solution map for a fixed coefficient matrix.
///
/// Free variables are set to zero, so `solve(b)` equals `map() * b` for every
/// consistent `b`.
#[derive(Clone, Debug)]
pub struct ParticularSolver {
    echelon: Echelon,
    cols: usize,
}

impl ParticularSolver {
    pub fn new(m: &Matrix) -> Self {
        ParticularSolver {
            echelon: Echelon::new(m),
            cols: m.cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn echelon(&self) -> &Echelon {
        &self.echelon
    }

    /// One solution of `M u = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[FieldElement]) -> Result<Option<Vec<FieldElement>>> {
        let y = self.echelon.transform.mul_vec(b)?;
        let rank = self.rank();
        if y[rank..].iter().any(|v| !v.is_zero()) {
            return Ok(None);
        }
        let mut u = vec![FieldElement::ZERO; self.cols];
        for (i, &p) in self.echelon.pivots.iter().enumerate() {
            u[p] = y[i];
        }
        Ok(Some(u))
    }

    /// The `cols x rows` matrix of the particular-solution map.
    pub fn map(&self) -> Matrix {
        let t = &self.echelon.transform;
        let mut out = Matrix::zeros(t.field(), self.cols, t.rows());
        for (i, &p) in self.echelon.pivots.iter().enumerate() {
            for c in 0..t.cols() {
                out.set(p, c, t.get(i, c));
            }
        }
        out
    }
}

pub fn solve_particular(m: &Matrix, b: &[FieldElement]) -> Result<Option<Vec<FieldElement>>> {
    if b.len() != m.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} equations",
            b.len(),
            m.rows
        )));
    }
    ParticularSolver::new(m).solve(b)
}

/// Basis of the right nullspace of `m`, one basis vector per column.
pub fn nullspace_basis(m: &Matrix) -> Matrix {
    let mut work = m.clone();
    let pivots = gauss_jordan(&mut work, m.cols);
    let f = &m.field;
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Matrix::zeros(f, m.cols, free.len());
    for (j, &fc) in free.iter().enumerate() {
        basis.set(fc, j, FieldElement::ONE);
        for (i, &p) in pivots.iter().enumerate() {
            basis.set(p, j, f.neg(work.get(i, fc)));
        }
    }
    basis
}

/// Row `i` is `1, points[i], points[i]^2, ...` with `ncols` entries.
pub fn vandermonde(field: &FieldCtx, points: &[FieldElement], ncols: usize) -> Matrix {
    Matrix::from_fn(field, points.len(), ncols, |r, c| {
        field.pow(points[r], c as u64)
    })
}

pub fn invert(m: &Matrix) -> Result<Matrix> {
    if m.rows != m.cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let mut aug = m.hstack(&Matrix::identity(&m.field, n))?;
    let pivots = gauss_jordan(&mut aug, n);
    if pivots.len() < n {
        return Err(Error::SingularMatrix);
    }
    Ok(aug.select_cols(&(n..2 * n).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn gf7() -> FieldCtx {
        FieldCtx::new(7, 1).unwrap()
    }

    fn fe(f: &FieldCtx, v: i64) -> FieldElement {
        f.from_int(v)
    }

    fn random_matrix(f: &FieldCtx, rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> Matrix {
        Matrix::from_fn(f, rows, cols, |_, _| f.sample(rng, false))
    }

    #[test]
    fn rank_examples() {
        let f = gf7();
        assert_eq!(rank(&Matrix::zeros(&f, 3, 3)), 0);
        assert_eq!(rank(&Matrix::identity(&f, 4)), 4);
        let m = Matrix::from_ints(&f, &[&[1, 2], &[2, 4]]).unwrap();
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn solve_examples() {
        let f = gf7();
        let b: Vec<_> = [3, 6, 1].iter().map(|&v| fe(&f, v)).collect();
        assert_eq!(
            solve_particular(&Matrix::identity(&f, 3), &b).unwrap(),
            Some(b.clone())
        );
        let zero = vec![f.zero(); 2];
        assert_eq!(
            solve_particular(&Matrix::zeros(&f, 2, 2), &zero).unwrap(),
            Some(zero.clone())
        );
        let m = Matrix::from_ints(&f, &[&[1, 1], &[2, 2]]).unwrap();
        assert_eq!(solve_particular(&m, &[fe(&f, 1), fe(&f, 3)]).unwrap(), None);
        assert!(matches!(
            solve_particular(&m, &[fe(&f, 1)]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn nullspace_examples() {
        let f = gf7();
        assert_eq!(nullspace_basis(&Matrix::identity(&f, 4)).cols(), 0);
        let z = Matrix::zeros(&f, 2, 3);
        let basis = nullspace_basis(&z);
        assert_eq!(basis.cols(), 3);
        assert_eq!(rank(&basis), 3);
        let m = Matrix::from_ints(&f, &[&[1, 2, 3]]).unwrap();
        let basis = nullspace_basis(&m);
        assert_eq!(basis.cols(), 2);
        for j in 0..2 {
            assert_eq!(m.mul_vec(&basis.column(j)).unwrap(), vec![f.zero()]);
        }
    }

    #[test]
    fn vandermonde_examples() {
        let f = gf7();
        let pts: Vec<_> = [1, 2, 3].iter().map(|&v| fe(&f, v)).collect();
        let v = vandermonde(&f, &pts, 3);
        assert_eq!(
            v,
            Matrix::from_ints(&f, &[&[1, 1, 1], &[1, 2, 4], &[1, 3, 2]]).unwrap()
        );
        assert_eq!(
            vandermonde(&f, &[fe(&f, 5)], 1),
            Matrix::from_ints(&f, &[&[1]]).unwrap()
        );
        let v0 = vandermonde(&f, &[f.zero()], 4);
        assert_eq!(v0.row(0), &[f.one(), f.zero(), f.zero(), f.zero()]);
    }

    #[test]
    fn invert_examples() {
        let f = gf7();
        let id = Matrix::identity(&f, 3);
        assert_eq!(invert(&id).unwrap(), id);
        let pts: Vec<_> = [1, 2, 3].iter().map(|&v| fe(&f, v)).collect();
        let v = vandermonde(&f, &pts, 3);
        let vi = invert(&v).unwrap();
        assert!(v.mul(&vi).unwrap().is_identity());
        assert!(vi.mul(&v).unwrap().is_identity());
        let rep = vandermonde(&f, &[f.one(), f.one()], 2);
        assert!(matches!(invert(&rep), Err(Error::SingularMatrix)));
    }

    #[test]
    fn random_inversion_matches_rank() {
        let fields = [gf7(), FieldCtx::with_modulus(3, 2, vec![1, 0, 1]).unwrap()];
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        for f in &fields {
            for i in 0..500 {
                let n = 1 + i % 6;
                let m = random_matrix(f, n, n, &mut rng);
                match invert(&m) {
                    Ok(inv) => {
                        assert!(inv.mul(&m).unwrap().is_identity());
                        assert!(m.mul(&inv).unwrap().is_identity());
                        assert_eq!(rank(&m), n);
                    }
                    Err(Error::SingularMatrix) => assert!(rank(&m) < n),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn vandermonde_on_distinct_points_is_invertible() {
        let f = gf7();
        let all = f.enumerate().unwrap();
        for mask in 1u32..(1 << 7) {
            let pts: Vec<_> = (0..7)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| all[i])
                .collect();
            let v = vandermonde(&f, &pts, pts.len());
            let vi = invert(&v).expect("distinct points");
            assert!(vi.mul(&v).unwrap().is_identity());
        }
    }

    #[test]
    fn solver_map_matches_solve() {
        let f = gf7();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..50 {
            let m = random_matrix(&f, 3, 5, &mut rng);
            let solver = ParticularSolver::new(&m);
            let x: Vec<_> = (0..5).map(|_| f.sample(&mut rng, false)).collect();
            let b = m.mul_vec(&x).unwrap();
            let u = solver.solve(&b).unwrap().unwrap();
            assert_eq!(m.mul_vec(&u).unwrap(), b);
            assert_eq!(solver.map().mul_vec(&b).unwrap(), u);
        }
    }

    fn arb_system() -> impl Strategy<Value = (u64, usize, usize, Vec<u64>, Vec<u64>, Vec<u64>)> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            (
                Just(7u64),
                Just(r),
                Just(c),
                proptest::collection::vec(0u64..7, r * c),
                proptest::collection::vec(0u64..7, c),
                proptest::collection::vec(0u64..7, c),
            )
        })
    }

    proptest! {
        #[test]
        fn solve_is_linear_in_rhs((q, r, c, entries, x1, x2) in arb_system()) {
            let f = FieldCtx::new(q, 1).unwrap();
            let m = Matrix::from_fn(&f, r, c, |i, j| f.from_index(entries[i * c + j]).unwrap());
            let to = |v: &[u64]| v.iter().map(|&x| f.from_index(x).unwrap()).collect::<Vec<_>>();
            let b1 = m.mul_vec(&to(&x1)).unwrap();
            let b2 = m.mul_vec(&to(&x2)).unwrap();
            let b12: Vec<_> = b1.iter().zip(&b2).map(|(&a, &b)| f.add(a, b)).collect();
            let u1 = solve_particular(&m, &b1).unwrap().unwrap();
            let u2 = solve_particular(&m, &b2).unwrap().unwrap();
            let u12 = solve_particular(&m, &b12).unwrap().unwrap();
            let sum: Vec<_> = u1.iter().zip(&u2).map(|(&a, &b)| f.add(a, b)).collect();
            prop_assert_eq!(u12, sum);
            prop_assert_eq!(m.mul_vec(&u1).unwrap(), b1);
        }

        #[test]
        fn nullity_plus_rank_is_cols((q, r, c, entries, _x1, _x2) in arb_system()) {
            let f = FieldCtx::new(q, 1).unwrap();
            let m = Matrix::from_fn(&f, r, c, |i, j| f.from_index(entries[i * c + j]).unwrap());
            let basis = nullspace_basis(&m);
            prop_assert_eq!(basis.cols() + rank(&m), c);
            for j in 0..basis.cols() {
                prop_assert!(m.mul_vec(&basis.column(j)).unwrap().iter().all(|v| v.is_zero()));
            }
        }
    }
}
