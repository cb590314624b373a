//! Truncated Fourier discretization of `f ↦ 2 Re[conj(G) f]` on
//! `Π (1-ζ)^{m_i} A`.
//!
//! Unknowns are the real and imaginary parts of the cofactor coefficients
//! `f'_c = Σ_{d ≤ Dg} a_{c,d} ζ^d`. When the operator maps into the
//! constrained target, each output row is divided by `(1-ζ)^{m_i}` and the
//! system is posed on the cofactor `v ∈ R_{m_i}` (only the independent half of
//! its modes is kept). Otherwise the raw real output is used.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blocks::{reflect_apply, Sign};
use crate::error::{Result, RhError};
use crate::index::{well_definedness_violations, ConstraintProfile};
use crate::laurent::LaurentPoly;
use crate::linalg::{least_squares, nullspace, RankReport, DEFAULT_REL_TOL};
use crate::matrix::SymbolMatrix;
use crate::scalar::{Cx, Real};
use crate::spaces::{circle_grid, fft_reconstruct, ConstrainedFunction, Representation};

pub const DEFAULT_DEGREE: usize = 32;
pub const RESIDUAL_SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSpace {
    /// Rows are modes of `v_i = φ_i / (1-ζ)^{m_i}`.
    Cofactor,
    /// Rows are modes of `φ_i`.
    Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowLabel {
    pub component: usize,
    pub mode: i64,
    pub imaginary: bool,
}

#[derive(Clone, Debug)]
pub struct SpectralSystem {
    pub degree: usize,
    pub modes: usize,
    pub space: RowSpace,
    pub orders: Vec<usize>,
    pub matrix: DMatrix<f64>,
    pub rows: Vec<RowLabel>,
    /// Output of each unknown in the row space, per component.
    images: Vec<Vec<LaurentPoly<f64>>>,
}

fn unknown_count(n: usize, degree: usize) -> usize {
    2 * n * (degree + 1)
}

/// `(component, degree, imaginary)` of unknown `u`.
fn unknown_label(u: usize, degree: usize) -> (usize, usize, bool) {
    let per = 2 * (degree + 1);
    (u / per, (u % per) / 2, u % 2 == 1)
}

fn first_row_mode(space: RowSpace, m: usize) -> i64 {
    match space {
        RowSpace::Cofactor => -((m / 2) as i64),
        RowSpace::Value => 0,
    }
}

/// Whether mode `k` of component with order `m` contributes an imaginary row.
fn has_imaginary_row(space: RowSpace, m: usize, k: i64) -> bool {
    match space {
        RowSpace::Cofactor => !(m.is_multiple_of(2) && k == -((m / 2) as i64)),
        RowSpace::Value => k != 0,
    }
}

/// Assembles the real system for cofactor degree `degree` and modes up to `modes`.
pub fn assemble<F: Real>(
    g: &SymbolMatrix<F>,
    profile: &ConstraintProfile,
    degree: usize,
    modes: usize,
) -> Result<SpectralSystem> {
    if !g.is_square() {
        return Err(RhError::Shape(format!("symbol is {}x{}", g.nrows(), g.ncols())));
    }
    let n = g.nrows();
    profile.check_dimension(n)?;
    let orders = profile.orders();
    let space =
        if well_definedness_violations(g, profile).is_empty() { RowSpace::Cofactor } else { RowSpace::Value };
    let gc = g.circle_conjugate();
    let units = [Cx::new(F::one(), F::zero()), Cx::new(F::zero(), F::one())];
    // h = conj(G_ic) (1-ζ)^{m_c} u; image of ζ^d u is h ζ^d + conj(h) ζ^{-d}, divided by (1-ζ)^{m_i}
    let mut parts: Vec<Vec<[(LaurentPoly<f64>, LaurentPoly<f64>); 2]>> = Vec::with_capacity(n);
    for c in 0..n {
        let w = LaurentPoly::<F>::one_minus_zeta_pow(orders[c]);
        let mut per_row = Vec::with_capacity(n);
        for i in 0..n {
            let base = gc.get(i, c) * &w;
            let mut pair: Vec<(LaurentPoly<f64>, LaurentPoly<f64>)> = Vec::with_capacity(2);
            for u in &units {
                let h = base.scale(u);
                let hb = h.circle_conjugate();
                let (h, hb) = match space {
                    RowSpace::Cofactor => {
                        (h.divide_by_one_minus_zeta(orders[i])?, hb.divide_by_one_minus_zeta(orders[i])?)
                    }
                    RowSpace::Value => (h, hb),
                };
                pair.push((h.to_f64(), hb.to_f64()));
            }
            per_row.push([pair[0].clone(), pair[1].clone()]);
        }
        parts.push(per_row);
    }
    let cols = unknown_count(n, degree);
    let mut images = Vec::with_capacity(cols);
    for u in 0..cols {
        let (c, d, im) = unknown_label(u, degree);
        let img: Vec<LaurentPoly<f64>> = (0..n)
            .map(|i| {
                let (h, hb) = &parts[c][i][im as usize];
                &h.shift(d as i64) + &hb.shift(-(d as i64))
            })
            .collect();
        for (i, p) in img.iter().enumerate() {
            if p.max_degree().is_some_and(|k| k > modes as i64) {
                return Err(RhError::Bandwidth(format!(
                    "component {i} reaches mode {} > {modes}; increase the mode count",
                    p.max_degree().unwrap_or(0)
                )));
            }
        }
        images.push(img);
    }
    let mut rows = Vec::new();
    for (i, &m) in orders.iter().enumerate() {
        for k in first_row_mode(space, m)..=modes as i64 {
            rows.push(RowLabel { component: i, mode: k, imaginary: false });
            if has_imaginary_row(space, m, k) {
                rows.push(RowLabel { component: i, mode: k, imaginary: true });
            }
        }
    }
    let matrix = DMatrix::from_fn(rows.len(), cols, |r, u| {
        let lab = rows[r];
        let z = images[u][lab.component].coeff(lab.mode);
        if lab.imaginary {
            z.im
        } else {
            z.re
        }
    });
    Ok(SpectralSystem { degree, modes, space, orders, matrix, rows, images })
}

/// Assembles with the default mode count `2·degree` (raised to cover the symbol's bandwidth).
pub fn assemble_default<F: Real>(g: &SymbolMatrix<F>, profile: &ConstraintProfile, degree: usize) -> Result<SpectralSystem> {
    let (lo, hi) = g.degree_range().unwrap_or((0, 0));
    let band = degree as i64 + hi.max(-lo).max(0);
    assemble(g, profile, degree, (2 * degree).max(band as usize))
}

/// Right-hand side data: cofactors `v_i` (or `φ_i` in the value space).
fn rhs_vector(sys: &SpectralSystem, targets: &[LaurentPoly<f64>]) -> DVector<f64> {
    DVector::from_iterator(
        sys.rows.len(),
        sys.rows.iter().map(|lab| {
            let z = targets[lab.component].coeff(lab.mode);
            if lab.imaginary {
                z.im
            } else {
                z.re
            }
        }),
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralSolution {
    pub degree: usize,
    pub modes: usize,
    pub space: RowSpace,
    /// Cofactor coefficients `f'_c`, degrees `0..=degree`.
    pub coefficients: Vec<Vec<Complex64>>,
    /// Max modulus of the residual over the sample grid, in the row space.
    pub residual: f64,
    pub samples: usize,
    pub rank: RankReport,
}

impl SpectralSolution {
    /// `f_c = (1-ζ)^{m_c} f'_c`.
    pub fn functions(&self, orders: &[usize]) -> Vec<LaurentPoly<f64>> {
        self.coefficients
            .iter()
            .zip(orders)
            .map(|(cs, &m)| {
                let fp = LaurentPoly::from_terms(cs.iter().enumerate().map(|(d, z)| (d as i64, *z)));
                &LaurentPoly::one_minus_zeta_pow(m) * &fp
            })
            .collect()
    }
}

impl SpectralSystem {
    pub fn dimension(&self) -> usize {
        self.orders.len()
    }

    /// Output of the unknown vector `x`, per component, in the row space.
    pub fn output(&self, x: &DVector<f64>) -> Vec<LaurentPoly<f64>> {
        let mut out = vec![LaurentPoly::zero(); self.dimension()];
        for (u, &xu) in x.iter().enumerate() {
            if xu != 0.0 {
                for (o, p) in out.iter_mut().zip(&self.images[u]) {
                    *o = &*o + &p.scale_real(&xu);
                }
            }
        }
        out
    }

    pub fn coefficients(&self, x: &DVector<f64>) -> Vec<Vec<Complex64>> {
        let mut cs = vec![vec![Complex64::new(0.0, 0.0); self.degree + 1]; self.dimension()];
        for (u, &xu) in x.iter().enumerate() {
            let (c, d, im) = unknown_label(u, self.degree);
            if im {
                cs[c][d].im = xu;
            } else {
                cs[c][d].re = xu;
            }
        }
        cs
    }

    /// Converts right-hand sides `φ_i = (1-ζ)^{m_i} v_i` to the row space.
    pub fn targets<F: Real>(&self, phi: &[ConstrainedFunction<F>]) -> Result<Vec<LaurentPoly<f64>>> {
        if phi.len() != self.dimension() {
            return Err(RhError::Shape(format!("{} right-hand sides for dimension {}", phi.len(), self.dimension())));
        }
        phi.iter()
            .zip(&self.orders)
            .map(|(p, &m)| {
                if p.m != m {
                    return Err(RhError::Shape(format!("right-hand side has order {}, block has {m}", p.m)));
                }
                let v = match &p.core.repr {
                    Representation::Laurent(l) => l.to_f64(),
                    Representation::Sampled(g) => fft_reconstruct(g).poly,
                };
                Ok(match self.space {
                    RowSpace::Cofactor => v,
                    RowSpace::Value => &LaurentPoly::one_minus_zeta_pow(m) * &v,
                })
            })
            .collect()
    }

    /// Minimum-norm least-squares solution for targets given in the row space.
    pub fn solve_targets(&self, targets: &[LaurentPoly<f64>], rel_tol: f64, samples: usize) -> SpectralSolution {
        let b = rhs_vector(self, targets);
        let x = least_squares(&self.matrix, &b, rel_tol);
        let out = self.output(&x);
        let diff: Vec<LaurentPoly<f64>> = out.iter().zip(targets).map(|(o, t)| o - t).collect();
        SpectralSolution {
            degree: self.degree,
            modes: self.modes,
            space: self.space,
            coefficients: self.coefficients(&x),
            residual: max_on_grid(&diff, samples),
            samples,
            rank: crate::linalg::rank_report(&self.matrix, rel_tol),
        }
    }
}

/// Largest modulus of any component over `samples` circle points.
pub fn max_on_grid(fs: &[LaurentPoly<f64>], samples: usize) -> f64 {
    let grid = circle_grid(samples);
    fs.iter().filter(|p| !p.is_zero()).flat_map(|p| grid.iter().map(move |&z| p.eval(z).norm())).fold(0.0, f64::max)
}

/// Least-squares solve of `2 Re[conj(G) f] = φ`.
pub fn solve_ls<F: Real>(sys: &SpectralSystem, phi: &[ConstrainedFunction<F>], rel_tol: f64) -> Result<SpectralSolution> {
    let targets = sys.targets(phi)?;
    Ok(sys.solve_targets(&targets, rel_tol, RESIDUAL_SAMPLES))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NumericalKernel {
    pub degree: usize,
    pub space: RowSpace,
    pub dimension: usize,
    pub rank: RankReport,
    /// `f = (1-ζ)^m f'` per basis vector.
    #[serde(skip)]
    pub basis: Vec<Vec<LaurentPoly<f64>>>,
    /// Row-space residual of each basis function.
    pub residuals: Vec<f64>,
}

pub fn numerical_kernel(sys: &SpectralSystem, rel_tol: f64) -> NumericalKernel {
    let (rank, vecs) = nullspace(&sys.matrix, rel_tol);
    let mut basis = Vec::with_capacity(vecs.len());
    let mut residuals = Vec::with_capacity(vecs.len());
    for x in &vecs {
        residuals.push(max_on_grid(&sys.output(x), RESIDUAL_SAMPLES));
        let sol = SpectralSolution {
            degree: sys.degree,
            modes: sys.modes,
            space: sys.space,
            coefficients: sys.coefficients(x),
            residual: 0.0,
            samples: 0,
            rank: rank.clone(),
        };
        basis.push(sol.functions(&sys.orders));
    }
    NumericalKernel { degree: sys.degree, space: sys.space, dimension: rank.nullity, rank, basis, residuals }
}

/// Kernel dimensions at several truncations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelStudy {
    pub kernels: Vec<NumericalKernel>,
    pub stable: bool,
}

impl KernelStudy {
    pub fn dimension(&self) -> Option<usize> {
        if self.stable {
            self.kernels.last().map(|k| k.dimension)
        } else {
            None
        }
    }

    pub fn min_gap_ratio(&self) -> f64 {
        self.kernels.iter().map(|k| k.rank.gap_ratio).fold(f64::INFINITY, f64::min)
    }
}

/// Numerical kernels at each degree in `degrees`; stable when all dimensions agree.
pub fn kernel_study<F: Real>(
    g: &SymbolMatrix<F>,
    profile: &ConstraintProfile,
    degrees: &[usize],
    rel_tol: f64,
) -> Result<KernelStudy> {
    let mut kernels = Vec::new();
    for &d in degrees {
        kernels.push(numerical_kernel(&assemble_default(g, profile, d)?, rel_tol));
    }
    let stable = kernels.windows(2).all(|w| w[0].dimension == w[1].dimension);
    Ok(KernelStudy { kernels, stable })
}

/// Real matrix of `f ↦ f ± ζ^l conj f` on `(1-ζ)^m A` with cofactor degree `≤ degree`.
pub fn reflect_matrix(sign: Sign, l: i64, m: usize, degree: usize) -> DMatrix<f64> {
    let w = LaurentPoly::<f64>::one_minus_zeta_pow(m);
    let mut images = Vec::new();
    for d in 0..=degree as i64 {
        for u in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            images.push(reflect_apply(sign, l, &(&w * &LaurentPoly::monomial(d, u))));
        }
    }
    let lo = images.iter().filter_map(LaurentPoly::min_degree).min().unwrap_or(0);
    let hi = images.iter().filter_map(LaurentPoly::max_degree).max().unwrap_or(0);
    let nrows = 2 * (hi - lo + 1) as usize;
    DMatrix::from_fn(nrows, images.len(), |r, c| {
        let z = images[c].coeff(lo + (r / 2) as i64);
        if r % 2 == 0 {
            z.re
        } else {
            z.im
        }
    })
}

/// Numerical kernel dimension of the reflection operator.
pub fn reflect_kernel_dim(sign: Sign, l: i64, m: usize, degree: usize) -> RankReport {
    nullspace(&reflect_matrix(sign, l, m, degree), DEFAULT_REL_TOL).0
}
