//! Laurent polynomials on the unit circle.
//!
//! `LaurentPoly<F>` stores `Σ c_k ζ^k` sparsely, with `c_k ∈ Complex<F>`.
//! Zero coefficients are never stored, so the degree range of a value is
//! always tight.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Result, RhError};
use crate::scalar::{cx_abs, cx_negligible, cx_to_f64, Cx, Real};

/// Relative tolerance for divisibility tests on floating coefficients.
pub const FLOAT_DIVISIBILITY_TOL: f64 = 1e-10;

/// Roots closer than this to `|ζ| = 1` make a winding count unreliable.
pub const WINDING_GUARD_BAND: f64 = 1e-8;

#[derive(Clone, PartialEq)]
pub struct LaurentPoly<F: Real> {
    coeffs: BTreeMap<i64, Cx<F>>,
}

impl<F: Real> LaurentPoly<F> {
    pub fn zero() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Cx::one())
    }

    pub fn constant(c: Cx<F>) -> Self {
        Self::monomial(0, c)
    }

    /// `c ζ^k`.
    pub fn monomial(k: i64, c: Cx<F>) -> Self {
        let mut p = Self::zero();
        p.add_term(k, c);
        p
    }

    /// `ζ^k`.
    pub fn zeta_pow(k: i64) -> Self {
        Self::monomial(k, Cx::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Cx<F>)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    /// Real-coefficient polynomial `Σ_{i} c_i ζ^{lo+i}` from integers.
    pub fn from_ints(lo: i64, coeffs: &[i64]) -> Self {
        Self::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (lo + i as i64, Cx::new(F::from_int(c), F::zero()))),
        )
    }

    /// `(1 - ζ)^m`.
    pub fn one_minus_zeta_pow(m: usize) -> Self {
        let base = Self::from_ints(0, &[1, -1]);
        (0..m).fold(Self::one(), |acc, _| &acc * &base)
    }

    fn add_term(&mut self, k: i64, c: Cx<F>) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(k).or_insert_with(Cx::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i64) -> Cx<F> {
        self.coeffs.get(&k).cloned().unwrap_or_else(Cx::zero)
    }

    /// Nonzero terms in ascending degree.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Cx<F>)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// `max_degree - min_degree`, zero for the zero polynomial.
    pub fn span(&self) -> i64 {
        match (self.min_degree(), self.max_degree()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0,
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(cx_abs).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: &Cx<F>) -> Self {
        Self::from_terms(self.terms().map(|(k, a)| (k, a.clone() * c.clone())))
    }

    pub fn scale_real(&self, r: &F) -> Self {
        self.scale(&Cx::new(r.clone(), F::zero()))
    }

    /// `ζ^s · p`.
    pub fn shift(&self, s: i64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(k, c)| (k + s, c.clone())).collect() }
    }

    /// The function `ζ ↦ conj(p(ζ))` on the circle: `q_k = conj(c_{-k})`.
    pub fn circle_conjugate(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(k, c)| (-k, c.conj())).collect() }
    }

    /// `2 Re p` on the circle, as a Laurent polynomial.
    pub fn twice_real_part(&self) -> Self {
        self + &self.circle_conjugate()
    }

    /// Keeps the modes `k ≥ 0`.
    pub fn nonnegative_part(&self) -> Self {
        Self { coeffs: self.coeffs.range(0..).map(|(k, c)| (*k, c.clone())).collect() }
    }

    /// Keeps the modes `k < 0`.
    pub fn negative_part(&self) -> Self {
        Self { coeffs: self.coeffs.range(..0).map(|(k, c)| (*k, c.clone())).collect() }
    }

    /// Substitution `ζ ↦ ζ^2` (reindex `k ↦ 2k`).
    pub fn compose_square(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(k, c)| (2 * k, c.clone())).collect() }
    }

    /// Inverse of [`compose_square`](Self::compose_square); `None` if an odd mode is present.
    pub fn decompose_square(&self) -> Option<Self> {
        if self.coeffs.keys().any(|k| k % 2 != 0) {
            return None;
        }
        Some(Self { coeffs: self.coeffs.iter().map(|(k, c)| (k / 2, c.clone())).collect() })
    }

    /// `p(ω ζ)`, i.e. `c_k ↦ c_k ω^k`. `ω` should be unimodular.
    pub fn rotate(&self, omega: &Cx<F>) -> Self {
        let inv = Cx::<F>::one() / omega.clone();
        Self::from_terms(self.terms().map(|(k, c)| {
            let w = if k >= 0 { pow(omega, k as u64) } else { pow(&inv, (-k) as u64) };
            (k, c.clone() * w)
        }))
    }

    /// Formal derivative `d/dζ`.
    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|(k, _)| *k != 0)
                .map(|(k, c)| (k - 1, c.clone() * Cx::new(F::from_int(k), F::zero()))),
        )
    }

    /// `p(1) = Σ c_k`, exactly.
    pub fn value_at_one(&self) -> Cx<F> {
        self.coeffs.values().fold(Cx::zero(), |acc, c| acc + c.clone())
    }

    /// `(p(1), p'(1), ..., p^{(order)}(1))`.
    pub fn jet_at_one(&self, order: usize) -> Vec<Cx<F>> {
        let mut out = Vec::with_capacity(order + 1);
        let mut d = self.clone();
        for _ in 0..=order {
            out.push(d.value_at_one());
            d = d.derivative();
        }
        out
    }

    /// Evaluates at a point (normally on the circle) in double precision.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let (lo, hi) = match (self.min_degree(), self.max_degree()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Complex64::zero(),
        };
        // Horner on ζ^{-lo} p, then scale.
        let mut acc = Complex64::zero();
        for k in (lo..=hi).rev() {
            acc = acc * z + cx_to_f64(&self.coeff(k));
        }
        acc * z.powi(lo as i32)
    }

    /// Converts the coefficients to another field through `f64`.
    pub fn to_field<G: Real>(&self) -> LaurentPoly<G> {
        LaurentPoly::from_terms(self.terms().map(|(k, c)| {
            let z = cx_to_f64(c);
            (k, Cx::new(G::from_float(z.re), G::from_float(z.im)))
        }))
    }

    pub fn to_f64(&self) -> LaurentPoly<f64> {
        self.to_field()
    }

    /// Dense coefficients of `ζ^{-min_degree} p`, ascending.
    fn dense_from_min(&self) -> (i64, Vec<Cx<F>>) {
        match (self.min_degree(), self.max_degree()) {
            (Some(lo), Some(hi)) => (lo, (lo..=hi).map(|k| self.coeff(k)).collect()),
            _ => (0, Vec::new()),
        }
    }

    /// Largest `m` with `(1-ζ)^m` dividing `p`; `None` for the zero polynomial.
    pub fn vanishing_order_at_one(&self) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let scale = self.max_abs_coeff();
        let (_, mut dense) = self.dense_from_min();
        let mut order = 0;
        while let Some(q) = divide_dense_one_minus_zeta(&dense, scale) {
            order += 1;
            dense = q;
        }
        Some(order)
    }

    /// Exact quotient `p / (1-ζ)^m`.
    pub fn divide_by_one_minus_zeta(&self, m: usize) -> Result<Self> {
        if m == 0 || self.is_zero() {
            return Ok(self.clone());
        }
        let scale = self.max_abs_coeff();
        let (lo, mut dense) = self.dense_from_min();
        for step in 0..m {
            dense = divide_dense_one_minus_zeta(&dense, scale).ok_or_else(|| {
                RhError::NotDivisible { order: step.to_string(), required: m }
            })?;
        }
        Ok(Self::from_terms(
            dense.into_iter().enumerate().map(|(i, c)| (lo + i as i64, c)),
        ))
    }

    /// Roots of `ζ^{-min_degree} p` in double precision (companion matrix eigenvalues).
    pub fn polynomial_roots(&self) -> Vec<Complex64> {
        let (_, dense) = self.dense_from_min();
        let coeffs: Vec<Complex64> = dense.iter().map(cx_to_f64).collect();
        companion_roots(&coeffs)
    }

    /// Winding number of `p` around the origin along the unit circle.
    ///
    /// Equals `min_degree + #roots of ζ^{-min_degree} p in the open disc`.
    pub fn winding_number(&self) -> Result<i64> {
        let lo = self.min_degree().ok_or(RhError::SingularOnCircle { distance: 0.0 })?;
        let roots = self.polynomial_roots();
        let clearance = circle_distances(&roots).into_iter().fold(f64::INFINITY, f64::min);
        if clearance <= WINDING_GUARD_BAND {
            return Err(RhError::SingularOnCircle { distance: clearance });
        }
        Ok(lo + roots.iter().filter(|r| r.norm() < 1.0).count() as i64)
    }

    /// Smallest distance of a root (or root cluster) to the circle; `∞` when there are none.
    pub fn circle_clearance(&self) -> f64 {
        circle_distances(&self.polynomial_roots()).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Maximum coefficient distance to `other` (as floats).
    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        (self - other).max_abs_coeff()
    }
}

fn pow<F: Real>(base: &Cx<F>, mut e: u64) -> Cx<F> {
    let mut acc = Cx::<F>::one();
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        b = b.clone() * b;
        e >>= 1;
    }
    acc
}

/// Synthetic division of `Σ a_i ζ^i` by `(1-ζ)`; `None` if the remainder is nonzero.
fn divide_dense_one_minus_zeta<F: Real>(a: &[Cx<F>], scale: f64) -> Option<Vec<Cx<F>>> {
    if a.is_empty() {
        return Some(Vec::new());
    }
    // a = (1-ζ) q  ⇒  q_k = a_k + q_{k-1}, and Σ a_i = 0.
    let mut q = Vec::with_capacity(a.len() - 1);
    let mut run = Cx::<F>::zero();
    for c in &a[..a.len() - 1] {
        run = run + c.clone();
        q.push(run.clone());
    }
    let rem = run + a[a.len() - 1].clone();
    if !cx_negligible(&rem, scale, FLOAT_DIVISIBILITY_TOL) {
        return None;
    }
    while q.last().is_some_and(|c| c.is_zero()) {
        q.pop();
    }
    if q.is_empty() {
        // a was zero up to the tolerance
        return None;
    }
    Some(q)
}

/// Radius within which computed roots are treated as one perturbed multiple root.
const CLUSTER_RADIUS: f64 = 1e-3;

/// `|1 - |r||` per root, using the centroid of nearby roots as well: a
/// `k`-fold root splits by about `ε^{1/k}` while the centroid stays accurate.
fn circle_distances(roots: &[Complex64]) -> Vec<f64> {
    roots
        .iter()
        .map(|r| {
            let near: Vec<&Complex64> =
                roots.iter().filter(|q| (*q - r).norm() <= CLUSTER_RADIUS * r.norm().max(1.0)).collect();
            let centroid = near.iter().copied().sum::<Complex64>() / near.len() as f64;
            (1.0 - r.norm()).abs().min((1.0 - centroid.norm()).abs())
        })
        .collect()
}

/// Roots of `Σ c_i z^i` (ascending coefficients, `c_0 ≠ 0` not required).
pub fn companion_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    if c.len() <= 1 {
        return Vec::new();
    }
    let d = c.len() - 1;
    let lead = c[d];
    if d == 1 {
        return vec![-c[0] / lead];
    }
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex64::one();
    }
    for i in 0..d {
        m[(i, d - 1)] = -c[i] / lead;
    }
    match m.try_schur(f64::EPSILON, 200 * d) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            (0..d).map(|i| t[(i, i)]).collect()
        }
        None => aberth_roots(&c),
    }
}

/// Simultaneous Aberth–Ehrlich iteration, used when the QR iteration stalls
/// (companion matrices with many equimodular roots).
fn aberth_roots(c: &[Complex64]) -> Vec<Complex64> {
    let d = c.len() - 1;
    let eval = |z: Complex64| {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for a in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    // Cauchy-style radius bound for the initial circle.
    let lead = c[d].norm();
    let radius = 1.0 + c[..d].iter().map(|a| a.norm() / lead).fold(0.0, f64::max);
    let r0 = (c[0].norm() / lead).powf(1.0 / d as f64).clamp(1e-3, radius);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(r0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulse: Complex64 = (0..d).filter(|&j| j != i).map(|j| Complex64::one() / (z[i] - z[j])).sum();
            let step = ratio / (Complex64::one() - ratio * repulse);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

impl<F: Real> Default for LaurentPoly<F> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<F: Real> fmt::Debug for LaurentPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<F: Real> fmt::Display for LaurentPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let z = cx_to_f64(c);
            match k {
                0 => write!(f, "({} + {}i)", z.re, z.im)?,
                _ => write!(f, "({} + {}i)z^{}", z.re, z.im, k)?,
            }
        }
        Ok(())
    }
}

impl<F: Real> Add for &LaurentPoly<F> {
    type Output = LaurentPoly<F>;
    fn add(self, rhs: Self) -> LaurentPoly<F> {
        let mut out = self.clone();
        for (k, c) in rhs.terms() {
            out.add_term(k, c.clone());
        }
        out
    }
}

impl<F: Real> Sub for &LaurentPoly<F> {
    type Output = LaurentPoly<F>;
    fn sub(self, rhs: Self) -> LaurentPoly<F> {
        let mut out = self.clone();
        for (k, c) in rhs.terms() {
            out.add_term(k, -c.clone());
        }
        out
    }
}

impl<F: Real> Mul for &LaurentPoly<F> {
    type Output = LaurentPoly<F>;
    fn mul(self, rhs: Self) -> LaurentPoly<F> {
        let mut out = LaurentPoly::zero();
        for (i, a) in self.terms() {
            for (j, b) in rhs.terms() {
                out.add_term(i + j, a.clone() * b.clone());
            }
        }
        out
    }
}

impl<F: Real> Neg for &LaurentPoly<F> {
    type Output = LaurentPoly<F>;
    fn neg(self) -> LaurentPoly<F> {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<F: Real> $tr for LaurentPoly<F> {
            type Output = LaurentPoly<F>;
            fn $m(self, rhs: Self) -> LaurentPoly<F> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<F: Real> Neg for LaurentPoly<F> {
    type Output = LaurentPoly<F>;
    fn neg(self) -> LaurentPoly<F> {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type P = LaurentPoly<Rational>;

    fn c(re: i64, im: i64) -> Cx<Rational> {
        Cx::new(Rational::from_int(re), Rational::from_int(im))
    }

    #[test]
    fn arithmetic_examples() {
        let omz = P::from_ints(0, &[1, -1]);
        assert_eq!(&omz * &omz, P::from_ints(0, &[1, -2, 1]));
        assert_eq!(&omz + &P::zero(), omz);
        let omzi = P::from_ints(-1, &[-1, 1]);
        assert_eq!(&omz * &omzi, P::from_ints(-1, &[-1, 2, -1]));
        assert!((&omz - &omz).is_zero());
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(P::zeta_pow(1).circle_conjugate(), P::zeta_pow(-1));
        assert_eq!(P::constant(c(0, 1)).circle_conjugate(), P::constant(c(0, -1)));
        // conj(1 - ζ) = 1 - ζ^{-1} = -ζ^{-1}(1 - ζ)
        let omz = P::from_ints(0, &[1, -1]);
        let expected = P::from_ints(-1, &[-1, 1]);
        assert_eq!(omz.circle_conjugate(), expected);
        assert_eq!(expected, -&omz.shift(-1));
    }

    #[test]
    fn vanishing_order_examples() {
        let p = P::one_minus_zeta_pow(2).shift(-1);
        assert_eq!(p.vanishing_order_at_one(), Some(2));
        assert_eq!(P::zeta_pow(3).vanishing_order_at_one(), Some(0));
        let det = P::one_minus_zeta_pow(4).shift(-1);
        assert_eq!(det.vanishing_order_at_one(), Some(4));
        assert_eq!(P::zero().vanishing_order_at_one(), None);
    }

    #[test]
    fn division_examples() {
        let p = P::one_minus_zeta_pow(2).shift(1);
        assert_eq!(p.divide_by_one_minus_zeta(2).unwrap(), P::zeta_pow(1));
        let q = P::from_ints(-1, &[-1, 2, -1]);
        assert_eq!(q.divide_by_one_minus_zeta(1).unwrap(), P::from_ints(-1, &[-1, 1]));
        assert!(matches!(
            P::zeta_pow(3).divide_by_one_minus_zeta(1),
            Err(RhError::NotDivisible { .. })
        ));
    }

    #[test]
    fn winding_examples() {
        assert_eq!(P::zeta_pow(3).winding_number().unwrap(), 3);
        assert_eq!(P::from_ints(0, &[2, 1]).winding_number().unwrap(), 0);
        assert_eq!(P::from_ints(0, &[1, 2]).winding_number().unwrap(), 1);
        assert_eq!(P::from_ints(-2, &[1, 0, 0, 0, 3]).winding_number().unwrap(), 2);
        assert!(matches!(
            P::from_ints(0, &[1, -1]).winding_number(),
            Err(RhError::SingularOnCircle { .. })
        ));
    }

    #[test]
    fn jets_and_rotation() {
        // (1-ζ)^2: value 0, first derivative 0, second derivative 2
        let p = P::one_minus_zeta_pow(2);
        let jet = p.jet_at_one(2);
        assert_eq!(jet, vec![c(0, 0), c(0, 0), c(2, 0)]);
        // ζ^2 rotated by i is -ζ^2
        assert_eq!(P::zeta_pow(2).rotate(&c(0, 1)), P::monomial(2, c(-1, 0)));
        assert_eq!(P::zeta_pow(-1).rotate(&c(0, 1)), P::monomial(-1, c(0, -1)));
    }

    #[test]
    fn float_division_tolerates_rounding() {
        let p = LaurentPoly::<f64>::one_minus_zeta_pow(3).shift(-2).scale_real(&(1.0 / 3.0));
        assert_eq!(p.vanishing_order_at_one(), Some(3));
        let q = p.divide_by_one_minus_zeta(3).unwrap();
        assert!((q.coeff(-2).re - 1.0 / 3.0).abs() < 1e-14);
    }
}
