//! Boundary function spaces on the unit circle.
//!
//! Functions are either exact Laurent polynomials or samples on a
//! `2^p`-point equispaced grid. Hölder regularity `(k, α)` travels with each
//! function as metadata and is never enforced.
//!
//! `R_m` is the set of `v` with `v(ζ) = (-1)^m ζ^{-m} conj(v(ζ))`; in
//! coefficients, `c_k = (-1)^m conj(c_{-m-k})`. It is exactly the set of `v`
//! for which `(1-ζ)^m v` is real on the circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RhError};
use crate::laurent::LaurentPoly;
use crate::scalar::{cx_negligible, Cx, Real};

/// Default tolerance for symmetry checks on floating data.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Relative tail energy above which a reconstruction is flagged as aliased.
pub const ALIASING_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub k: u32,
    pub alpha: f64,
}

impl Default for Regularity {
    fn default() -> Self {
        Self { k: 0, alpha: 0.5 }
    }
}

/// A point `ζ = e^{iθ}` on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CirclePoint {
    Angle(f64),
    /// `e^{2πi j / 2^p}`.
    RootOfUnity { j: u64, p: u32 },
}

impl CirclePoint {
    pub fn angle(&self) -> f64 {
        match *self {
            CirclePoint::Angle(t) => t.rem_euclid(2.0 * PI),
            CirclePoint::RootOfUnity { j, p } => {
                let n = 1u64 << p;
                2.0 * PI * (j % n) as f64 / n as f64
            }
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle())
    }
}

/// Grid points `e^{2πij/n}`, `j = 0..n`.
pub fn circle_grid(n: usize) -> Vec<Complex64> {
    (0..n).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).collect()
}

/// Samples on the `2^p` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledGrid {
    pub p: u32,
    pub values: Vec<Complex64>,
}

impl SampledGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn from_fn(p: u32, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { p, values: circle_grid(1 << p).into_iter().map(f).collect() }
    }

    pub fn points(&self) -> Vec<Complex64> {
        circle_grid(self.values.len())
    }
}

/// Result of transforming samples back to Fourier coefficients.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub poly: LaurentPoly<f64>,
    /// Energy in the outer quarter of the band, relative to the total.
    pub tail_energy: f64,
    pub aliased: bool,
}

/// Samples a Laurent polynomial on the `2^p` grid.
///
/// The returned flag is true when some mode of `poly` cannot be represented
/// on the grid (`|k| ≥ 2^{p-1}`), i.e. the samples alias.
pub fn fft_sample<F: Real>(poly: &LaurentPoly<F>, p: u32) -> (SampledGrid, bool) {
    let n = 1i64 << p;
    let aliased = poly.terms().any(|(k, _)| 2 * k.abs() >= n);
    (SampledGrid::from_fn(p, |z| poly.eval(z)), aliased)
}

/// Fourier coefficients of sampled data, modes `-(n/2-1) ..= n/2-1`.
pub fn fft_reconstruct(grid: &SampledGrid) -> Reconstruction {
    let n = grid.values.len();
    if n == 0 {
        return Reconstruction { poly: LaurentPoly::zero(), tail_energy: 0.0, aliased: false };
    }
    let mut buf = grid.values.clone();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let half = (n / 2) as i64;
    let mut total = 0.0;
    let mut tail = 0.0;
    let mut terms = Vec::with_capacity(n);
    for (idx, x) in buf.iter().enumerate() {
        let k = if (idx as i64) < half { idx as i64 } else { idx as i64 - n as i64 };
        let c = x * scale;
        let e = c.norm_sqr();
        total += e;
        if k == -half || 4 * k.abs() > 3 * half {
            tail += e;
        }
        if k != -half {
            terms.push((k, Cx::new(c.re, c.im)));
        }
    }
    let tail_energy = if total > 0.0 { tail / total } else { 0.0 };
    Reconstruction {
        poly: LaurentPoly::from_terms(terms),
        tail_energy,
        aliased: tail_energy > ALIASING_TOL,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation<F: Real> {
    Laurent(LaurentPoly<F>),
    Sampled(SampledGrid),
}

/// A complex function on the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFunction<F: Real> {
    pub repr: Representation<F>,
    pub regularity: Regularity,
}

impl<F: Real> BoundaryFunction<F> {
    pub fn laurent(p: LaurentPoly<F>) -> Self {
        Self { repr: Representation::Laurent(p), regularity: Regularity::default() }
    }

    pub fn sampled(grid: SampledGrid) -> Self {
        Self { repr: Representation::Sampled(grid), regularity: Regularity::default() }
    }

    pub fn with_regularity(mut self, regularity: Regularity) -> Self {
        self.regularity = regularity;
        self
    }

    pub fn as_laurent(&self) -> Option<&LaurentPoly<F>> {
        match &self.repr {
            Representation::Laurent(p) => Some(p),
            Representation::Sampled(_) => None,
        }
    }

    /// Laurent data in `f64`; sampled data goes through the FFT.
    pub fn to_laurent_f64(&self) -> LaurentPoly<f64> {
        match &self.repr {
            Representation::Laurent(p) => p.to_f64(),
            Representation::Sampled(g) => fft_reconstruct(g).poly,
        }
    }

    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        match &self.repr {
            Representation::Laurent(p) => Some(p.eval(z)),
            Representation::Sampled(_) => None,
        }
    }

    /// Values on the `2^p` grid.
    pub fn samples(&self, p: u32) -> SampledGrid {
        match &self.repr {
            Representation::Laurent(poly) => fft_sample(poly, p).0,
            Representation::Sampled(g) if g.p == p => g.clone(),
            Representation::Sampled(g) => {
                let poly = fft_reconstruct(g).poly;
                fft_sample(&poly, p).0
            }
        }
    }

    fn map_same(&self, repr: Representation<F>) -> Self {
        Self { repr, regularity: self.regularity }
    }
}

/// `φ = (1-ζ)^m v`, stored through its cofactor `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedFunction<F: Real> {
    pub m: usize,
    pub core: BoundaryFunction<F>,
}

impl<F: Real> ConstrainedFunction<F> {
    /// The function `(1-ζ)^m v` itself.
    pub fn value(&self) -> BoundaryFunction<F> {
        match &self.core.repr {
            Representation::Laurent(v) => {
                self.core.map_same(Representation::Laurent(&LaurentPoly::one_minus_zeta_pow(self.m) * v))
            }
            Representation::Sampled(g) => {
                let vals = g
                    .points()
                    .into_iter()
                    .zip(&g.values)
                    .map(|(z, v)| (Complex64::one() - z).powu(self.m as u32) * v)
                    .collect();
                self.core.map_same(Representation::Sampled(SampledGrid { p: g.p, values: vals }))
            }
        }
    }
}

fn sign(m: i64) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coefficient test `c_k = (-1)^m conj(c_{-m-k})`.
pub fn rm_check_laurent<F: Real>(v: &LaurentPoly<F>, m: i64, tol: f64) -> bool {
    let s = F::from_int(sign(m) as i64);
    let scale = v.max_abs_coeff();
    let mut keys: Vec<i64> = v.terms().map(|(k, _)| k).collect();
    keys.extend(v.terms().map(|(k, _)| -m - k));
    keys.into_iter().all(|k| {
        let lhs = v.coeff(k);
        let rhs = v.coeff(-m - k).conj();
        let diff = lhs - Cx::new(s.clone(), F::zero()) * rhs;
        cx_negligible(&diff, scale, tol)
    })
}

/// Pointwise test `v(ζ) = (-1)^m ζ^{-m} conj(v(ζ))` on the grid.
pub fn rm_check_sampled(g: &SampledGrid, m: i64, tol: f64) -> bool {
    let scale = g.values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    g.points().into_iter().zip(&g.values).all(|(z, v)| {
        let rhs = z.powi(-m as i32) * v.conj() * sign(m);
        (v - rhs).norm() <= tol * scale
    })
}

pub fn rm_check<F: Real>(v: &BoundaryFunction<F>, m: i64, tol: f64) -> bool {
    match &v.repr {
        Representation::Laurent(p) => rm_check_laurent(p, m, tol),
        Representation::Sampled(g) => rm_check_sampled(g, m, tol),
    }
}

fn require_rm<F: Real>(v: &BoundaryFunction<F>, m: i64, tol: f64) -> Result<()> {
    if rm_check(v, m, tol) {
        Ok(())
    } else {
        Err(RhError::NotInRm { m, detail: "symmetry c_k = (-1)^m conj(c_{-m-k}) fails".into() })
    }
}

/// `τ_m((1-ζ)^m v) = v`.
pub fn tau_m<F: Real>(phi: &ConstrainedFunction<F>) -> BoundaryFunction<F> {
    phi.core.clone()
}

/// `τ_m` applied to a plain Laurent function: divides by `(1-ζ)^m` and
/// checks that the input was real on the circle.
pub fn tau_m_of_laurent<F: Real>(phi: &LaurentPoly<F>, m: usize, tol: f64) -> Result<LaurentPoly<F>> {
    if !rm_check_laurent(phi, 0, tol) {
        return Err(RhError::NotInRm { m: 0, detail: "input is not real on the circle".into() });
    }
    phi.divide_by_one_minus_zeta(m)
}

pub fn tau_m_inverse<F: Real>(v: &BoundaryFunction<F>, m: usize, tol: f64) -> Result<ConstrainedFunction<F>> {
    require_rm(v, m as i64, tol)?;
    Ok(ConstrainedFunction { m, core: v.clone() })
}

/// `v ↦ ζ^{m'} v` with `m = 2m'` or `2m'+1`; lands in `R_0` or `R_1`.
pub fn rm_shift<F: Real>(v: &BoundaryFunction<F>, m: usize, tol: f64) -> Result<BoundaryFunction<F>> {
    require_rm(v, m as i64, tol)?;
    let mp = (m / 2) as i64;
    Ok(match &v.repr {
        Representation::Laurent(p) => v.map_same(Representation::Laurent(p.shift(mp))),
        Representation::Sampled(g) => {
            let vals = g.points().into_iter().zip(&g.values).map(|(z, x)| z.powi(mp as i32) * x).collect();
            v.map_same(Representation::Sampled(SampledGrid { p: g.p, values: vals }))
        }
    })
}

/// `v(ζ) ↦ i ζ^m v(ζ^2)` for odd `m`; the image is real and odd.
///
/// Sampled input on the `2^p` grid produces samples on the `2^{p+1}` grid,
/// grid point `j` of the output being the square root of grid point `j` of
/// the input.
pub fn rm_odd_unfold<F: Real>(v: &BoundaryFunction<F>, m: usize, tol: f64) -> Result<BoundaryFunction<F>> {
    if m.is_multiple_of(2) {
        return Err(RhError::EvenOrder(m as i64));
    }
    require_rm(v, m as i64, tol)?;
    Ok(match &v.repr {
        Representation::Laurent(p) => {
            let i = Cx::new(F::zero(), F::one());
            v.map_same(Representation::Laurent(p.compose_square().shift(m as i64).scale(&i)))
        }
        Representation::Sampled(g) => {
            // grid point j of 2^{p+1} squares to point j (mod 2^p) of the input grid
            let n = g.values.len();
            let vals = circle_grid(2 * n)
                .into_iter()
                .enumerate()
                .map(|(j, xi)| Complex64::i() * xi.powu(m as u32) * g.values[j % n])
                .collect();
            v.map_same(Representation::Sampled(SampledGrid { p: g.p + 1, values: vals }))
        }
    })
}

/// Szegő projection: keeps the modes `k ≥ 0`.
pub fn szego_projection<F: Real>(v: &BoundaryFunction<F>) -> BoundaryFunction<F> {
    match &v.repr {
        Representation::Laurent(p) => v.map_same(Representation::Laurent(p.nonnegative_part())),
        Representation::Sampled(g) => {
            let rec = fft_reconstruct(g);
            let proj = rec.poly.nonnegative_part();
            v.map_same(Representation::Sampled(fft_sample(&proj, g.p).0))
        }
    }
}

/// Decomposition of `u ∈ R_1` as `P(u) + u''` with `u'' = -conj(ζ P(u))`.
pub fn r1_split<F: Real>(u: &LaurentPoly<F>) -> (LaurentPoly<F>, LaurentPoly<F>) {
    let head = u.nonnegative_part();
    let tail = -&head.shift(1).circle_conjugate();
    (head, tail)
}

/// Builds an element of `R_m` from arbitrary data: `w + (-1)^m ζ^{-m} conj(w)`.
pub fn symmetrize_rm<F: Real>(w: &LaurentPoly<F>, m: i64) -> LaurentPoly<F> {
    let s = F::from_int(sign(m) as i64);
    w + &w.circle_conjugate().shift(-m).scale_real(&s)
}

/// Maximum of `|Im f|` over `n` grid points.
pub fn max_imag_on_grid<F: Real>(f: &LaurentPoly<F>, n: usize) -> f64 {
    circle_grid(n).into_iter().map(|z| f.eval(z).im.abs()).fold(0.0, f64::max)
}

/// Complex unit `i` in the field.
pub fn imag_unit<F: Real>() -> Cx<F> {
    Cx::new(F::zero(), F::one())
}

pub fn is_zero_fn<F: Real>(v: &BoundaryFunction<F>) -> bool {
    match &v.repr {
        Representation::Laurent(p) => p.is_zero(),
        Representation::Sampled(g) => g.values.iter().all(|x| x.is_zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type P = LaurentPoly<Rational>;

    fn bf(p: P) -> BoundaryFunction<Rational> {
        BoundaryFunction::laurent(p)
    }

    fn one_minus_zinv() -> P {
        P::from_ints(-1, &[-1, 1])
    }

    #[test]
    fn rm_check_examples() {
        assert!(rm_check(&bf(one_minus_zinv()), 1, 0.0));
        assert!(rm_check(&bf(P::one()), 0, 0.0));
        assert!(!rm_check(&bf(P::zeta_pow(1)), 0, 0.0));
        assert!(rm_check(&bf(P::zeta_pow(-1)), 2, 0.0));
    }

    #[test]
    fn tau_examples() {
        let phi = P::from_ints(-1, &[-1, 2, -1]);
        assert_eq!(tau_m_of_laurent(&phi, 1, 0.0).unwrap(), one_minus_zinv());
        assert_eq!(tau_m_of_laurent(&phi, 0, 0.0).unwrap(), phi);
        assert!(tau_m_inverse(&bf(P::zeta_pow(1)), 0, 0.0).is_err());
        let c = tau_m_inverse(&bf(one_minus_zinv()), 1, 0.0).unwrap();
        assert_eq!(c.value().as_laurent().unwrap(), &phi);
        assert_eq!(tau_m(&c), bf(one_minus_zinv()));
    }

    #[test]
    fn shift_examples() {
        let out = rm_shift(&bf(P::zeta_pow(-1)), 2, 0.0).unwrap();
        assert_eq!(out.as_laurent().unwrap(), &P::one());
        let same = rm_shift(&bf(one_minus_zinv()), 1, 0.0).unwrap();
        assert_eq!(same.as_laurent().unwrap(), &one_minus_zinv());
        assert!(rm_check(&same, 1, 0.0));
        let id = rm_shift(&bf(P::one()), 0, 0.0).unwrap();
        assert_eq!(id.as_laurent().unwrap(), &P::one());
    }

    #[test]
    fn odd_unfold_examples() {
        let u = rm_odd_unfold(&bf(one_minus_zinv()), 1, 0.0).unwrap();
        let i = imag_unit::<Rational>();
        let expected = P::from_terms([(1, i.clone()), (-1, -i)]);
        assert_eq!(u.as_laurent().unwrap(), &expected);
        assert!(rm_check(&u, 0, 0.0));
        let z = rm_odd_unfold(&bf(P::zero()), 1, 0.0).unwrap();
        assert!(is_zero_fn(&z));
        let bad = bf(P::monomial(-1, imag_unit()));
        assert!(matches!(rm_odd_unfold(&bad, 1, 0.0), Err(RhError::NotInRm { .. })));
        assert!(matches!(rm_odd_unfold(&bf(P::one()), 2, 0.0), Err(RhError::EvenOrder(2))));
    }

    #[test]
    fn szego_examples() {
        let v = P::from_ints(-1, &[1, 2, 1]);
        assert_eq!(szego_projection(&bf(v)).as_laurent().unwrap(), &P::from_ints(0, &[2, 1]));
        let hol = P::from_ints(0, &[3, 0, 1]);
        assert_eq!(szego_projection(&bf(hol.clone())).as_laurent().unwrap(), &hol);
        assert_eq!(szego_projection(&bf(one_minus_zinv())).as_laurent().unwrap(), &P::one());
    }

    #[test]
    fn fft_examples() {
        let (g, aliased) = fft_sample(&P::zeta_pow(3), 4);
        assert!(!aliased);
        let rec = fft_reconstruct(&g);
        assert!(!rec.aliased);
        assert!((rec.poly.coeff(3).re - 1.0).abs() < 1e-12);
        assert!(rec.poly.max_coeff_distance(&LaurentPoly::zeta_pow(3)) < 1e-12);

        let g = SampledGrid::from_fn(6, |z| Complex64::one() / (Complex64::new(2.0, 0.0) + z));
        let rec = fft_reconstruct(&g);
        assert!(!rec.aliased);
        assert!(rec.tail_energy < 1e-12);
        for k in 0..10 {
            let exact = 0.5 * (-0.5f64).powi(k);
            assert!((rec.poly.coeff(k as i64).re - exact).abs() < 1e-12);
        }

        let (_, aliased) = fft_sample(&P::zeta_pow(9), 3);
        assert!(aliased);
    }

    #[test]
    fn r1_split_reassembles() {
        let u = symmetrize_rm(&P::from_ints(-2, &[3, -1, 4, 1, -5]), 1);
        assert!(rm_check_laurent(&u, 1, 0.0));
        let (head, tail) = r1_split(&u);
        assert_eq!(&head + &tail, u);
    }

    #[test]
    fn sampled_odd_unfold_is_real_and_odd() {
        let v = BoundaryFunction::<f64>::sampled(fft_sample(&one_minus_zinv().to_f64(), 5).0);
        let u = rm_odd_unfold(&v, 1, 1e-12).unwrap();
        let Representation::Sampled(g) = &u.repr else { panic!() };
        let n = g.values.len();
        for j in 0..n {
            assert!(g.values[j].im.abs() < 1e-12);
            assert!((g.values[j] + g.values[(j + n / 2) % n]).norm() < 1e-12);
        }
    }
}
