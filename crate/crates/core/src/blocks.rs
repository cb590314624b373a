//! One- and two-dimensional constrained problems.
//!
//! Scalar twist problem: `2 Re[ζ^{-r} f] = φ` with `f ∈ (1-ζ)^m A`.
//! Scalar reflection problem: `f ± ζ^l conj(f) = 0`.
//! Pair problem: `2 Re[P f] = φ` with `P = C(ζ) diag(ζ^{-r1}, ζ^{-r2})` and
//! `C = [[1+ζ, -i(1-ζ)], [i(1-ζ), 1+ζ]]`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RhError};
use crate::laurent::LaurentPoly;
use crate::matrix::SymbolMatrix;
use crate::scalar::{Cx, Real};
use crate::spaces::{
    fft_reconstruct, imag_unit, rm_check_laurent, BoundaryFunction, ConstrainedFunction, Representation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "+" | "plus" => Some(Sign::Plus),
            "-" | "minus" => Some(Sign::Minus),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarProblem {
    /// `2 Re[ζ^{-r} f] = φ`.
    Twist { r: i64, m: usize },
    /// `f ± ζ^l conj(f) = 0`.
    Reflect { sign: Sign, l: i64, m: usize },
}

impl ScalarProblem {
    /// The equivalent reflection parameters: `2Re[ζ^{-r} f] = 0` iff `f + ζ^{2r} conj f = 0`.
    pub fn as_reflect(&self) -> (Sign, i64, usize) {
        match *self {
            ScalarProblem::Twist { r, m } => (Sign::Plus, 2 * r, m),
            ScalarProblem::Reflect { sign, l, m } => (sign, l, m),
        }
    }

    pub fn kernel_dim(&self) -> usize {
        let (_, l, m) = self.as_reflect();
        scalar_kernel_dim(l, m)
    }

    pub fn kernel_basis<F: Real>(&self) -> Vec<LaurentPoly<F>> {
        let (s, l, m) = self.as_reflect();
        scalar_kernel_basis(s, l, m)
    }

    /// Applies the operator of the problem to `f`.
    pub fn apply<F: Real>(&self, f: &LaurentPoly<F>) -> LaurentPoly<F> {
        match *self {
            ScalarProblem::Twist { r, .. } => twist_apply(r, f),
            ScalarProblem::Reflect { sign, l, .. } => reflect_apply(sign, l, f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairProblem {
    pub r1: i64,
    pub r2: i64,
    pub m: usize,
}

/// `max{l + 1 - m, 0}`.
pub fn scalar_kernel_dim(l: i64, m: usize) -> usize {
    (l + 1 - m as i64).max(0) as usize
}

/// `2 Re[ζ^{-r} f]`.
pub fn twist_apply<F: Real>(r: i64, f: &LaurentPoly<F>) -> LaurentPoly<F> {
    f.shift(-r).twice_real_part()
}

/// `f ± ζ^l conj(f)`.
pub fn reflect_apply<F: Real>(sign: Sign, l: i64, f: &LaurentPoly<F>) -> LaurentPoly<F> {
    let t = f.circle_conjugate().shift(l);
    match sign {
        Sign::Plus => f + &t,
        Sign::Minus => f - &t,
    }
}

/// Real basis of `{f ∈ (1-ζ)^m A : f ± ζ^l conj f = 0}`.
///
/// With `f = (1-ζ)^m f'` and `d = l - m`, the cofactor has degree `≤ d` and
/// coefficients `a_k = -s conj(a_{d-k})`, `s = ±(-1)^m`. Generators come in
/// ascending `k`, the real one before the imaginary one.
pub fn scalar_kernel_basis<F: Real>(sign: Sign, l: i64, m: usize) -> Vec<LaurentPoly<F>> {
    let d = l - m as i64;
    if d < 0 {
        return Vec::new();
    }
    let parity = if m.is_multiple_of(2) { 1 } else { -1 };
    let neg_s = -sign.value() * parity;
    let neg_s_f = F::from_int(neg_s);
    let weight = LaurentPoly::<F>::one_minus_zeta_pow(m);
    let mut out = Vec::new();
    for k in 0..=d / 2 {
        let units: Vec<Cx<F>> = if 2 * k == d {
            // a = -s conj(a): real if -s = 1, imaginary otherwise
            vec![if neg_s == 1 { Cx::new(F::one(), F::zero()) } else { imag_unit() }]
        } else {
            vec![Cx::new(F::one(), F::zero()), imag_unit()]
        };
        for c in units {
            let partner = c.conj() * Cx::new(neg_s_f.clone(), F::zero());
            let cof = if 2 * k == d {
                LaurentPoly::monomial(k, c)
            } else {
                LaurentPoly::from_terms([(k, c), (d - k, partner)])
            };
            out.push(&weight * &cof);
        }
    }
    out
}

/// Surjectivity of the scalar twist problem: `2r - m ≥ -1`.
pub fn scalar_onto(r: i64, m: usize) -> bool {
    2 * r - m as i64 >= -1
}

/// Surjectivity of the pair problem: `2r_1 - m ≥ 0` and `2r_2 - m ≥ 0`.
pub fn pair_onto(r1: i64, r2: i64, m: usize) -> bool {
    2 * r1 >= m as i64 && 2 * r2 >= m as i64
}

fn half<F: Real>() -> Cx<F> {
    Cx::new(F::from_ratio(1, 2), F::zero())
}

/// `ζ^e (u_0/2 + Σ_{k>0} u_k ζ^k)`: the holomorphic `g` with `2 Re[ζ^{-e} g] = u` for real `u`.
fn real_lift<F: Real>(u: &LaurentPoly<F>, e: i64) -> LaurentPoly<F> {
    let mut g = u.nonnegative_part();
    let c0 = u.coeff(0);
    g = &g - &LaurentPoly::constant(c0 * half());
    g.shift(e)
}

/// Solves `2 Re[ζ^{-r} (1-ζ)^m f'] = (1-ζ)^m v` for the cofactor `f'`.
pub fn solve_scalar_cofactor<F: Real>(r: i64, m: usize, v: &LaurentPoly<F>, tol: f64) -> Result<LaurentPoly<F>> {
    if !rm_check_laurent(v, m as i64, tol) {
        return Err(RhError::NotInRm { m: m as i64, detail: "right-hand side cofactor".into() });
    }
    if !scalar_onto(r, m) {
        return Err(RhError::NotSurjective(format!(
            "2r - m = {} < -1; witness class (1-ζ)^m ζ^{{-m'}} u with u = {}",
            2 * r - m as i64,
            if m % 2 == 1 { "1 - ζ^{-1}" } else { "2 - ζ - ζ^{-1}" }
        )));
    }
    let mp = (m / 2) as i64;
    let u = v.shift(mp);
    let e = r - mp;
    Ok(if m.is_multiple_of(2) { real_lift(&u, e) } else { u.nonnegative_part().shift(e) })
}

/// Solves `2 Re[ζ^{-r} f] = φ` on `(1-ζ)^m A`. Sampled data go through the FFT.
pub fn solve_scalar<F: Real>(r: i64, phi: &ConstrainedFunction<F>, tol: f64) -> Result<BoundaryFunction<F>> {
    let m = phi.m;
    let v: LaurentPoly<F> = match &phi.core.repr {
        Representation::Laurent(p) => p.clone(),
        Representation::Sampled(g) => fft_reconstruct(g).poly.to_field(),
    };
    let cof = solve_scalar_cofactor(r, m, &v, tol)?;
    Ok(BoundaryFunction::laurent(&LaurentPoly::one_minus_zeta_pow(m) * &cof).with_regularity(phi.core.regularity))
}

/// Cofactor `v` of a right-hand side outside the image, when the problem is not onto.
pub fn scalar_witness<F: Real>(r: i64, m: usize) -> Option<LaurentPoly<F>> {
    if scalar_onto(r, m) {
        return None;
    }
    let u = if m % 2 == 1 { LaurentPoly::from_ints(-1, &[-1, 1]) } else { LaurentPoly::from_ints(-1, &[-1, 2, -1]) };
    Some(u.shift(-((m / 2) as i64)))
}

/// `C(ζ) diag(ζ^{-r1}, ζ^{-r2})`.
pub fn pair_matrix<F: Real>(r1: i64, r2: i64) -> SymbolMatrix<F> {
    let i = imag_unit::<F>();
    let one_plus = LaurentPoly::from_ints(0, &[1, 1]);
    let one_minus = LaurentPoly::from_ints(0, &[1, -1]);
    SymbolMatrix::from_rows(vec![
        vec![one_plus.shift(-r1), one_minus.scale(&-i.clone()).shift(-r2)],
        vec![one_minus.scale(&i).shift(-r1), one_plus.shift(-r2)],
    ])
    .expect("2x2")
}

/// The symbol `G = conj(P)`, so that `2 Re[conj(G) f] = 2 Re[P f]`.
pub fn pair_symbol<F: Real>(r1: i64, r2: i64) -> SymbolMatrix<F> {
    pair_matrix(r1, r2).circle_conjugate()
}

/// `2 Re[P f]` componentwise.
pub fn pair_apply<F: Real>(problem: &PairProblem, f: &[LaurentPoly<F>; 2]) -> [LaurentPoly<F>; 2] {
    let pf = pair_matrix::<F>(problem.r1, problem.r2).apply(f).expect("2 components");
    [pf[0].twice_real_part(), pf[1].twice_real_part()]
}

/// The substitution `ζ = ξ²` for the pair problem.
///
/// Writing `C(ξ²) = 2ξ Q(ξ)` with `Q = [[Re ξ, -Im ξ], [Im ξ, Re ξ]]` and
/// `c = 1` (even `m`) or `c = i` (odd `m`), the problem becomes
/// `2 Re[ξ^{-t_j} c f'_j(ξ²)] = w_j` with `t_j = 2r_j - m - 1` and
/// `w = ½ Qᵀ (c ξ^m v(ξ²))`. All polynomials on the `w` side are in `ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReduction {
    pub problem: PairProblem,
    /// `t_j = 2r_j - m - 1`.
    pub xi_exponents: [i64; 2],
}

impl PairReduction {
    pub fn new(problem: PairProblem) -> Self {
        let m = problem.m as i64;
        Self { problem, xi_exponents: [2 * problem.r1 - m - 1, 2 * problem.r2 - m - 1] }
    }

    fn odd(&self) -> bool {
        self.problem.m % 2 == 1
    }

    fn phase<F: Real>(&self) -> Cx<F> {
        if self.odd() {
            imag_unit()
        } else {
            Cx::new(F::one(), F::zero())
        }
    }

    /// For odd `m`: the two scalar problems in `ζ = ξ²`, with `r = t_j / 2` and `m = 0`,
    /// acting on `c f'_j`.
    pub fn scalar_problems(&self) -> Option<[ScalarProblem; 2]> {
        if !self.odd() {
            return None;
        }
        Some(self.xi_exponents.map(|t| ScalarProblem::Twist { r: t / 2, m: 0 }))
    }

    pub fn component_onto(&self, j: usize) -> bool {
        self.xi_exponents[j] >= -1
    }

    pub fn onto(&self) -> bool {
        self.component_onto(0) && self.component_onto(1)
    }

    fn q_entries<F: Real>() -> (LaurentPoly<F>, LaurentPoly<F>) {
        let h = F::from_ratio(1, 2);
        let re = LaurentPoly::from_terms([(-1, Cx::new(h.clone(), F::zero())), (1, Cx::new(h.clone(), F::zero()))]);
        let im = LaurentPoly::from_terms([(-1, Cx::new(F::zero(), h.clone())), (1, Cx::new(F::zero(), -h))]);
        (re, im)
    }

    /// `v ↦ w`.
    pub fn forward_rhs<F: Real>(&self, v: &[LaurentPoly<F>; 2]) -> [LaurentPoly<F>; 2] {
        let (re, im) = Self::q_entries::<F>();
        let c = self.phase::<F>();
        let m = self.problem.m as i64;
        let y = v.clone().map(|vj| vj.compose_square().shift(m).scale(&c));
        let h = half::<F>();
        [
            (&(&re * &y[0]) + &(&im * &y[1])).scale(&h),
            (&(&re * &y[1]) - &(&im * &y[0])).scale(&h),
        ]
    }

    /// `w ↦ v`; fails when the result is not a function of `ξ²`.
    pub fn backward_rhs<F: Real>(&self, w: &[LaurentPoly<F>; 2]) -> Result<[LaurentPoly<F>; 2]> {
        let (re, im) = Self::q_entries::<F>();
        let cinv = Cx::<F>::new(F::from_int(2), F::zero()) / self.phase::<F>();
        let m = self.problem.m as i64;
        let qw = [&(&re * &w[0]) - &(&im * &w[1]), &(&im * &w[0]) + &(&re * &w[1])];
        let mut out = Vec::with_capacity(2);
        for y in qw {
            let y = y.scale(&cinv).shift(-m);
            out.push(y.decompose_square().ok_or_else(|| {
                RhError::Consistency("right-hand side in ξ has the wrong parity".into())
            })?);
        }
        Ok([out[0].clone(), out[1].clone()])
    }

    /// Solves `2 Re[P f] = (1-ζ)^m v` and returns `f = (1-ζ)^m f'`.
    pub fn solve<F: Real>(&self, v: &[LaurentPoly<F>; 2]) -> Result<[LaurentPoly<F>; 2]> {
        for (j, vj) in v.iter().enumerate() {
            if !rm_check_laurent(vj, self.problem.m as i64, crate::spaces::SYMMETRY_TOL) {
                return Err(RhError::NotInRm { m: self.problem.m as i64, detail: format!("component {}", j + 1) });
            }
        }
        if !self.onto() {
            return Err(RhError::NotSurjective(format!(
                "2r_j - m < 0 for r = ({}, {}), m = {}",
                self.problem.r1, self.problem.r2, self.problem.m
            )));
        }
        let w = self.forward_rhs(v);
        let cinv = Cx::<F>::new(F::one(), F::zero()) / self.phase::<F>();
        let weight = LaurentPoly::<F>::one_minus_zeta_pow(self.problem.m);
        let mut out = Vec::with_capacity(2);
        for j in 0..2 {
            let big_f = real_lift(&w[j], self.xi_exponents[j]);
            let cof = big_f
                .decompose_square()
                .ok_or_else(|| RhError::Consistency("lifted solution is not even in ξ".into()))?
                .scale(&cinv);
            out.push(&weight * &cof);
        }
        Ok([out[0].clone(), out[1].clone()])
    }

    /// Cofactor `v` of a right-hand side outside the image; `None` when onto.
    pub fn witness<F: Real>(&self) -> Option<[LaurentPoly<F>; 2]> {
        let j = (0..2).find(|&j| !self.component_onto(j))?;
        let wj = if self.odd() {
            LaurentPoly::from_ints(-2, &[-1, 0, 2, 0, -1])
        } else {
            LaurentPoly::from_ints(-1, &[1, 0, 1])
        };
        let mut w = [LaurentPoly::zero(), LaurentPoly::zero()];
        w[j] = wj;
        self.backward_rhs(&w).ok()
    }
}

/// The odd-order reduction to two scalar problems.
pub fn pair_reduce_odd(problem: PairProblem) -> Result<PairReduction> {
    if problem.m.is_multiple_of(2) {
        return Err(RhError::EvenOrder(problem.m as i64));
    }
    Ok(PairReduction::new(problem))
}
