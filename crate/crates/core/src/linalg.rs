//! Dense linear algebra: SVD-based rank, nullspace and least squares for
//! floating matrices, and fraction-free exact elimination for any [`Real`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Singular values are "zero" below `rel_tol * σ_max`.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// A gap ratio below this makes a nullity count suspicious.
pub const MIN_GAP_RATIO: f64 = 10.0;

/// Outcome of a thresholded SVD.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub nullity: usize,
    pub sigma_max: f64,
    pub threshold: f64,
    /// Smallest singular value kept, over largest discarded (floored to stay finite).
    pub gap_ratio: f64,
    pub ill_separated: bool,
}

fn rank_from_sorted(sv: &[f64], ncols: usize, rel_tol: f64) -> RankReport {
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * sigma_max;
    let rank = if sigma_max == 0.0 { 0 } else { sv.iter().filter(|&&s| s > threshold).count() };
    let floor = sigma_max * f64::EPSILON * f64::EPSILON;
    let below = if rank < sv.len() { sv[rank] } else { 0.0 };
    let gap_ratio = if rank == 0 {
        f64::MAX
    } else {
        sv[rank - 1] / below.max(floor).max(f64::MIN_POSITIVE)
    };
    RankReport {
        rank,
        nullity: ncols - rank,
        sigma_max,
        threshold,
        gap_ratio,
        ill_separated: gap_ratio < MIN_GAP_RATIO,
    }
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    sorted_desc(a.clone().singular_values().iter().copied().collect())
}

pub fn rank_report(a: &DMatrix<f64>, rel_tol: f64) -> RankReport {
    rank_from_sorted(&singular_values(a), a.ncols(), rel_tol)
}

pub fn complex_rank_report(a: &DMatrix<Complex64>, rel_tol: f64) -> RankReport {
    let sv = if a.nrows() == 0 || a.ncols() == 0 {
        Vec::new()
    } else {
        sorted_desc(a.clone().singular_values().iter().copied().collect())
    };
    rank_from_sorted(&sv, a.ncols(), rel_tol)
}

/// Zero-pads `a` with rows so that the SVD yields a full right basis.
fn padded(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() >= a.ncols() {
        return a.clone();
    }
    let mut p = DMatrix::zeros(a.ncols(), a.ncols());
    p.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    p
}

/// Orthonormal basis of the numerical nullspace.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> (RankReport, Vec<DVector<f64>>) {
    let p = padded(a);
    let svd = p.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut pairs: Vec<(f64, usize)> =
        svd.singular_values.iter().copied().enumerate().map(|(i, s)| (s, i)).collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let sv: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let report = rank_from_sorted(&sv, a.ncols(), rel_tol);
    let basis = pairs[report.rank..]
        .iter()
        .map(|&(_, i)| v_t.row(i).transpose().into_owned())
        .collect();
    (report, basis)
}

/// Minimum-norm least-squares solution with singular values below
/// `rel_tol * σ_max` discarded.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (rel_tol * smax).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).expect("U and V were computed")
}

/// Row-reduces `rows` (exactly for rational fields) and returns the pivot
/// columns plus the reduced rows.
fn row_reduce<F: Real>(mut m: Vec<Vec<F>>, ncols: usize) -> (Vec<usize>, Vec<Vec<F>>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    let scale = m.iter().flatten().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        // largest magnitude pivot (partial pivoting is harmless for exact fields)
        let Some(p) = (r..m.len())
            .filter(|&i| !m[i][c].negligible(scale, 1e-12))
            .max_by(|&i, &j| {
                m[i][c]
                    .to_f64()
                    .abs()
                    .partial_cmp(&m[j][c].to_f64().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        else {
            continue;
        };
        m.swap(r, p);
        let inv = F::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..ncols {
                    let sub = f.clone() * m[r][k].clone();
                    m[i][k] = m[i][k].clone() - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (pivots, m)
}

pub fn exact_rank<F: Real>(rows: Vec<Vec<F>>, ncols: usize) -> usize {
    row_reduce(rows, ncols).0.len()
}

/// Basis of `{x : A x = 0}`, one vector per free column, in ascending free-column order.
pub fn exact_nullspace<F: Real>(rows: Vec<Vec<F>>, ncols: usize) -> Vec<Vec<F>> {
    let (pivots, m) = row_reduce(rows, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut x = vec![F::zero(); ncols];
            x[free] = F::one();
            for (r, &pc) in pivots.iter().enumerate() {
                x[pc] = -m[r][free].clone();
            }
            x
        })
        .collect()
}
