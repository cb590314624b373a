//! Dense matrices of Laurent polynomials.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Result, RhError};
use crate::laurent::LaurentPoly;
use crate::scalar::{Cx, Real};

#[derive(Clone, PartialEq)]
pub struct SymbolMatrix<F: Real> {
    rows: usize,
    cols: usize,
    entries: Vec<LaurentPoly<F>>,
}

impl<F: Real> SymbolMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![LaurentPoly::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, LaurentPoly::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<LaurentPoly<F>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(RhError::Shape("empty matrix".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(RhError::Shape("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, entries: rows.into_iter().flatten().collect() })
    }

    pub fn diagonal(diag: Vec<LaurentPoly<F>>) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, p) in diag.into_iter().enumerate() {
            m.set(i, i, p);
        }
        m
    }

    /// `diag(ζ^{k_i})`.
    pub fn monomial_diagonal(exponents: &[i64]) -> Self {
        Self::diagonal(exponents.iter().map(|&k| LaurentPoly::zeta_pow(k)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly<F> {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: LaurentPoly<F>) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &LaurentPoly<F>)> {
        self.entries.iter().enumerate().map(move |(idx, p)| (idx / self.cols, idx % self.cols, p))
    }

    pub fn map<G: Real>(&self, f: impl Fn(&LaurentPoly<F>) -> LaurentPoly<G>) -> SymbolMatrix<G> {
        SymbolMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> SymbolMatrix<f64> {
        self.map(LaurentPoly::to_f64)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (i, j, p) in self.entries() {
            t.set(j, i, p.clone());
        }
        t
    }

    /// Entrywise circle conjugation, i.e. `conj(G(ζ))` on `|ζ| = 1`.
    pub fn circle_conjugate(&self) -> Self {
        self.map(LaurentPoly::circle_conjugate)
    }

    pub fn scale(&self, c: &Cx<F>) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn scale_poly(&self, q: &LaurentPoly<F>) -> Self {
        self.map(|p| p * q)
    }

    /// `G(ω ζ)`.
    pub fn rotate(&self, omega: &Cx<F>) -> Self {
        self.map(|p| p.rotate(omega))
    }

    pub fn column(&self, j: usize) -> Vec<LaurentPoly<F>> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[LaurentPoly<F>]) {
        for (i, p) in col.iter().enumerate() {
            self.set(i, j, p.clone());
        }
    }

    /// Square sub-block `[lo, hi) × [lo, hi)`.
    pub fn principal_block(&self, lo: usize, hi: usize) -> Self {
        self.sub_block(lo, hi, lo, hi)
    }

    pub fn sub_block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut b = Self::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                b.set(i - r0, j - c0, self.get(i, j).clone());
            }
        }
        b
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(RhError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = LaurentPoly::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = rhs.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(RhError::Shape("addition of differently shaped matrices".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.try_add(&rhs.map(|p| -p))
    }

    /// Matrix times vector of Laurent polynomials.
    pub fn apply(&self, v: &[LaurentPoly<F>]) -> Result<Vec<LaurentPoly<F>>> {
        if v.len() != self.cols {
            return Err(RhError::Shape(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols).fold(LaurentPoly::zero(), |acc, k| &acc + &(self.get(i, k) * &v[k]))
            })
            .collect())
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(RhError::Shape(format!("{}x{} matrix is not square", self.rows, self.cols)))
        }
    }

    /// Determinant by cofactor expansion along the sparsest row.
    pub fn determinant(&self) -> Result<LaurentPoly<F>> {
        self.require_square()?;
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(self.minor_det(&idx, &idx))
    }

    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> LaurentPoly<F> {
        match rows.len() {
            0 => LaurentPoly::one(),
            1 => self.get(rows[0], cols[0]).clone(),
            2 => {
                let a = self.get(rows[0], cols[0]) * self.get(rows[1], cols[1]);
                let b = self.get(rows[0], cols[1]) * self.get(rows[1], cols[0]);
                &a - &b
            }
            _ => {
                // expand along the row with most zeros
                let (pos, &r) = rows
                    .iter()
                    .enumerate()
                    .max_by_key(|(_, &r)| cols.iter().filter(|&&c| self.get(r, c).is_zero()).count())
                    .expect("nonempty");
                let rest: Vec<usize> = rows.iter().copied().filter(|&x| x != r).collect();
                let mut acc = LaurentPoly::zero();
                for (cj, &c) in cols.iter().enumerate() {
                    let e = self.get(r, c);
                    if e.is_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = e * &self.minor_det(&rest, &sub_cols);
                    acc = if (pos + cj) % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }

    /// Adjugate: `A · adj(A) = det(A) · I`.
    pub fn adjugate(&self) -> Result<Self> {
        self.require_square()?;
        let n = self.rows;
        let mut adj = Self::zeros(n, n);
        if n == 1 {
            adj.set(0, 0, LaurentPoly::one());
            return Ok(adj);
        }
        for i in 0..n {
            for j in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                let m = self.minor_det(&rows, &cols);
                adj.set(i, j, if (i + j) % 2 == 0 { m } else { -m });
            }
        }
        Ok(adj)
    }

    /// Largest coefficient modulus over all entries.
    pub fn max_abs_coeff(&self) -> f64 {
        self.entries.iter().map(LaurentPoly::max_abs_coeff).fold(0.0, f64::max)
    }

    /// Degree bounds over all nonzero entries.
    pub fn degree_range(&self) -> Option<(i64, i64)> {
        let lo = self.entries.iter().filter_map(LaurentPoly::min_degree).min()?;
        let hi = self.entries.iter().filter_map(LaurentPoly::max_degree).max()?;
        Some((lo, hi))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self.entries().all(|(i, j, p)| {
                if i == j {
                    *p == LaurentPoly::one()
                } else {
                    p.is_zero()
                }
            })
    }

    /// Constant matrix `c · I`.
    pub fn scalar_identity(n: usize, c: Cx<F>) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, LaurentPoly::constant(c.clone()));
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(LaurentPoly::is_zero)
    }

    pub fn identity_like(&self) -> Self {
        Self::scalar_identity(self.rows, Cx::one())
    }

    pub fn zero_like(&self) -> Self {
        Self::scalar_identity(self.rows, Cx::zero())
    }
}

impl<F: Real> fmt::Debug for SymbolMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymbolMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type P = LaurentPoly<Rational>;
    type M = SymbolMatrix<Rational>;

    #[test]
    fn identity_determinant() {
        assert_eq!(M::identity(4).determinant().unwrap(), P::one());
    }

    #[test]
    fn adjugate_identity() {
        let a = M::from_rows(vec![
            vec![P::from_ints(0, &[1, 1]), P::zeta_pow(2)],
            vec![P::from_ints(-1, &[3]), P::from_ints(0, &[2, 0, -1])],
        ])
        .unwrap();
        let det = a.determinant().unwrap();
        let prod = a.try_mul(&a.adjugate().unwrap()).unwrap();
        assert_eq!(prod, M::diagonal(vec![det.clone(), det]));
    }

    #[test]
    fn determinant_is_multiplicative() {
        let a = M::from_rows(vec![
            vec![P::from_ints(0, &[1, 2]), P::zeta_pow(-1), P::zero()],
            vec![P::one(), P::from_ints(-1, &[1, 1]), P::zeta_pow(3)],
            vec![P::zero(), P::from_ints(0, &[0, 5]), P::one()],
        ])
        .unwrap();
        let b = a.circle_conjugate().transpose();
        let ab = a.try_mul(&b).unwrap();
        assert_eq!(
            ab.determinant().unwrap(),
            &a.determinant().unwrap() * &b.determinant().unwrap()
        );
    }

    #[test]
    fn shape_errors() {
        let a = M::zeros(2, 3);
        assert!(matches!(a.determinant(), Err(RhError::Shape(_))));
        assert!(matches!(a.try_mul(&a), Err(RhError::Shape(_))));
    }
}
