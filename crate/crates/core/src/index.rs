//! Maslov and partial indices, factorization checks, classification and
//! explicit kernels.
//!
//! For a symbol `G`, the relevant loop is `W = -conj(G)^{-1} G`. Writing
//! `A = adj(conj G) G`, one has `W = -A / conj(det G)`, so the partial indices
//! of `W` are those of `A` shifted by `wind(det G)`. `A` is an exact Laurent
//! polynomial matrix, and its indices are read off the nullities of the block
//! Toeplitz operators `T(ζ^{-j} Aᵀ)`. These are computed exactly by polynomial
//! division modulo the inner factor of `det A`, with growing finite sections
//! as a fallback.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blocks::{scalar_kernel_basis, Sign};
use crate::error::{Result, RhError};
use crate::laurent::LaurentPoly;
use crate::linalg::{complex_rank_report, exact_nullspace, exact_rank, rank_report, DEFAULT_REL_TOL};
use crate::matrix::SymbolMatrix;
use crate::scalar::{cx_to_f64, Cx, Real};

/// Block sizes `N_j` and vanishing orders `m_j` of the domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintProfile {
    pub blocks: Vec<(usize, usize)>,
}

impl ConstraintProfile {
    /// One block `(n, 0)`.
    pub fn unconstrained(n: usize) -> Self {
        Self { blocks: vec![(n, 0)] }
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.0).sum()
    }

    /// `Σ N_j m_j`.
    pub fn weight(&self) -> usize {
        self.blocks.iter().map(|&(n, m)| n * m).sum()
    }

    /// Half-open component ranges of the blocks.
    pub fn ranges(&self) -> Vec<(usize, usize)> {
        let mut lo = 0;
        self.blocks
            .iter()
            .map(|&(n, _)| {
                let r = (lo, lo + n);
                lo += n;
                r
            })
            .collect()
    }

    /// Vanishing order per component.
    pub fn orders(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|&(n, m)| std::iter::repeat_n(m, n)).collect()
    }

    pub fn block_of(&self, component: usize) -> usize {
        self.ranges().iter().position(|&(lo, hi)| (lo..hi).contains(&component)).unwrap_or(usize::MAX)
    }

    pub fn check_dimension(&self, n: usize) -> Result<()> {
        if self.dimension() != n || self.blocks.iter().any(|b| b.0 == 0) {
            return Err(RhError::Shape(format!("profile {} does not match dimension {}", self, n)));
        }
        Ok(())
    }
}

impl fmt::Display for ConstraintProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|(n, m)| format!("{n}:{m}")).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for ConstraintProfile {
    type Err = RhError;

    /// Parses `"N1:m1,N2:m2,..."`.
    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (n, m) = part
                .split_once(':')
                .ok_or_else(|| RhError::Parse(format!("profile entry '{part}' is not N:m")))?;
            let n: usize = n.trim().parse().map_err(|_| RhError::Parse(format!("bad block size in '{part}'")))?;
            let m: usize = m.trim().parse().map_err(|_| RhError::Parse(format!("bad order in '{part}'")))?;
            if n == 0 {
                return Err(RhError::Parse(format!("empty block in '{part}'")));
            }
            blocks.push((n, m));
        }
        if blocks.is_empty() {
            return Err(RhError::Parse("empty profile".into()));
        }
        Ok(Self { blocks })
    }
}

fn require_square<F: Real>(g: &SymbolMatrix<F>) -> Result<()> {
    if g.is_square() {
        Ok(())
    } else {
        Err(RhError::Shape(format!("symbol is {}x{}", g.nrows(), g.ncols())))
    }
}

/// `2 · wind(det G)`, the winding number of `det(-conj(G)^{-1} G)`.
pub fn maslov_index<F: Real>(g: &SymbolMatrix<F>) -> Result<i64> {
    require_square(g)?;
    Ok(2 * g.determinant()?.winding_number()?)
}

/// `adj(conj G) · G`.
pub fn loop_numerator<F: Real>(g: &SymbolMatrix<F>) -> Result<SymbolMatrix<F>> {
    g.circle_conjugate().adjugate()?.try_mul(g)
}

/// Settings of the Toeplitz nullity scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanOptions {
    pub rel_tol: f64,
    pub sizes: Vec<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { rel_tol: DEFAULT_REL_TOL, sizes: vec![16, 32, 64, 128] }
    }
}

/// How the nullities of a scan were obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMethod {
    /// SVD of an `n`-column finite section.
    #[default]
    FiniteSection,
    /// Exact operator nullities from division by the inner factor of the determinant;
    /// `size` is then that factor's degree.
    Division,
}

/// Nullities `d(j)` of one scan, and the indices they imply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanAtSize {
    pub size: usize,
    #[serde(default)]
    pub method: ScanMethod,
    /// `(j, d(j))` over the scanned range.
    pub nullities: Vec<(i64, usize)>,
    /// `(j, d(j+1) - 2 d(j) + d(j-1))`.
    pub second_differences: Vec<(i64, i64)>,
    pub min_gap_ratio: f64,
    pub consistent: bool,
    pub note: Option<String>,
}

/// Outcome of the size-doubling scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToeplitzScan {
    pub rel_tol: f64,
    pub sizes_tried: Vec<usize>,
    /// Position in `scans` of the accepted scan.
    pub accepted: Option<usize>,
    /// Winding number of `det` of the scanned matrix.
    pub expected_sum: i64,
    pub scans: Vec<ScanAtSize>,
}

impl ToeplitzScan {
    pub fn accepted(&self) -> Option<&ScanAtSize> {
        self.scans.get(self.accepted?)
    }
}

/// Partial indices with their provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartialIndices {
    /// Sorted ascending.
    pub indices: Vec<i64>,
    /// Shift added to the indices of the scanned matrix.
    pub shift: i64,
    pub scan: ToeplitzScan,
}

/// Finite section of `T(S)`: columns are `(component, degree 0..n)`, rows
/// `(component, mode 0..n+hi)`.
fn toeplitz_section(s: &SymbolMatrix<f64>, n: usize) -> DMatrix<Complex64> {
    let dim = s.nrows();
    let hi = s.degree_range().map_or(0, |r| r.1);
    let rows_per = (n as i64 + hi).max(0) as usize;
    let mut t = DMatrix::<Complex64>::zeros(dim * rows_per, dim * n);
    for (r, c, p) in s.entries() {
        for (k, coef) in p.terms() {
            let z = cx_to_f64(coef);
            for d in 0..n {
                let row = d as i64 + k;
                if row >= 0 && (row as usize) < rows_per {
                    t[(r * rows_per + row as usize, c * n + d)] = z;
                }
            }
        }
    }
    t
}

/// Scans `j` from `⌊sum/N⌋` down to `d = 0` and up to `d = Nj - sum`, then
/// reads the indices from the second differences.
fn scan_range(
    dim: i64,
    span: i64,
    sum: i64,
    size: usize,
    method: ScanMethod,
    mut nullity_at: impl FnMut(i64) -> (usize, Option<f64>),
) -> ScanAtSize {
    let mut cache: BTreeMap<i64, usize> = BTreeMap::new();
    let mut min_gap = f64::INFINITY;
    let mut nullity = |j: i64, cache: &mut BTreeMap<i64, usize>| -> usize {
        if let Some(&d) = cache.get(&j) {
            return d;
        }
        let (d, gap) = nullity_at(j);
        if let Some(g) = gap {
            min_gap = min_gap.min(g);
        }
        cache.insert(j, d);
        d
    };
    let linear = |j: i64| dim * j - sum;
    let j0 = sum.div_euclid(dim);
    let bound = span + dim + 2;
    let mut note = None;
    let mut lo = j0;
    while nullity(lo, &mut cache) > 0 {
        lo -= 1;
        if lo < j0 - bound {
            note = Some("lower end of the scan not reached".to_string());
            break;
        }
    }
    let mut hi = j0;
    while nullity(hi, &mut cache) as i64 != linear(hi) {
        hi += 1;
        if hi > j0 + bound {
            note = Some("upper end of the scan not reached".to_string());
            break;
        }
    }
    for j in lo..=hi {
        nullity(j, &mut cache);
    }
    let d = |j: i64| -> i64 {
        if j < lo {
            0
        } else if j > hi {
            linear(j)
        } else {
            cache[&j] as i64
        }
    };
    let second: Vec<(i64, i64)> = (lo..=hi).map(|j| (j, d(j + 1) - 2 * d(j) + d(j - 1))).collect();
    let total: i64 = second.iter().map(|x| x.1).sum();
    let weighted: i64 = second.iter().map(|x| x.0 * x.1).sum();
    let consistent = note.is_none() && second.iter().all(|x| x.1 >= 0) && total == dim && weighted == sum;
    ScanAtSize {
        size,
        method,
        nullities: (lo..=hi).map(|j| (j, cache[&j])).collect(),
        second_differences: second,
        min_gap_ratio: if min_gap.is_finite() { min_gap } else { f64::MAX },
        consistent,
        note,
    }
}

fn scan_at_size(s: &SymbolMatrix<f64>, n: usize, sum: i64, rel_tol: f64) -> ScanAtSize {
    let span = s.degree_range().map_or(0, |(lo, hi)| hi - lo);
    scan_range(s.nrows() as i64, span, sum, n, ScanMethod::FiniteSection, |j| {
        let sj = s.map(|p| p.shift(-j));
        let rep = complex_rank_report(&toeplitz_section(&sj, n), rel_tol);
        (rep.nullity, (rep.nullity > 0 && rep.rank > 0).then_some(rep.gap_ratio))
    })
}

/// Nullities of the full Toeplitz operators through polynomial division.
///
/// With `S = ζ^{-s} B`, `B` polynomial, `ker T(ζ^{-j} S)` is `B^{-1} p` for the
/// polynomials `p` of degree `< j + s` such that the inner factor `d_in` of
/// `det B` divides `adj(B) p`. No truncation is involved.
fn scan_by_division(s: &SymbolMatrix<f64>, sum: i64, rel_tol: f64) -> Result<ScanAtSize> {
    let n = s.nrows();
    let (lo, hi) = s.degree_range().unwrap_or((0, 0));
    let shift = -lo;
    let b = s.map(|p| p.shift(shift));
    let det = b.determinant()?;
    let zeros_at_origin = det.min_degree().unwrap_or(0).max(0) as usize;
    // d_in = ζ^{z0} Π (ζ - z_r), |z_r| < 1, stored ascending
    let mut d_in = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    d_in.push(Complex64::new(1.0, 0.0));
    for r in det.polynomial_roots().into_iter().filter(|r| r.norm() < 1.0) {
        let mut next = vec![Complex64::new(0.0, 0.0); d_in.len() + 1];
        for (i, c) in d_in.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= r * c;
        }
        d_in = next;
    }
    let q = d_in.len() - 1;
    let adj = b.adjugate()?;
    let adj_hi = adj.degree_range().map_or(0, |r| r.1).max(0) as usize;
    let span = hi - lo;
    let t_max = (span + n as i64 + 2) * 2 + (sum.abs() + 2 * shift.abs()) + 4;
    // residues of ζ^u modulo d_in
    let mut residues: Vec<Vec<Complex64>> = Vec::new();
    let mut cur = vec![Complex64::new(0.0, 0.0); q];
    if q > 0 {
        cur[0] = Complex64::new(1.0, 0.0);
    }
    for _ in 0..=(t_max.max(0) as usize + adj_hi) {
        residues.push(cur.clone());
        if q == 0 {
            continue;
        }
        let top = cur[q - 1];
        let mut next = vec![Complex64::new(0.0, 0.0); q];
        for i in (1..q).rev() {
            next[i] = cur[i - 1];
        }
        for (i, x) in next.iter_mut().enumerate() {
            *x -= top * d_in[i];
        }
        cur = next;
    }
    let column = |c: usize, u: usize| -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n * q];
        for i in 0..n {
            for (k, a) in adj.get(i, c).terms() {
                let res = &residues[u + k as usize];
                for (e, r) in res.iter().enumerate() {
                    out[i * q + e] += a * r;
                }
            }
        }
        out
    };
    Ok(scan_range(n as i64, span, sum, q, ScanMethod::Division, |j| {
        let t = j + shift;
        if t <= 0 {
            return (0, None);
        }
        let t = t as usize;
        if q == 0 {
            return (n * t, None);
        }
        let cols: Vec<Vec<Complex64>> = (0..n).flat_map(|c| (0..t).map(move |u| (c, u))).map(|(c, u)| column(c, u)).collect();
        let m = DMatrix::from_fn(n * q, cols.len(), |r, k| cols[k][r]);
        let rep = complex_rank_report(&m, rel_tol);
        (rep.nullity, (rep.nullity > 0 && rep.rank > 0).then_some(rep.gap_ratio))
    }))
}

/// Partial indices of a loop with a left factorization `S = S_+ D S_-`
/// (equivalently `Sᵀ = S_-ᵀ D S_+ᵀ`), read from `T(ζ^{-j} Sᵀ)`.
pub fn scan_partial_indices(s: &SymbolMatrix<f64>, opts: &ScanOptions) -> Result<(Vec<i64>, ToeplitzScan)> {
    require_square(s)?;
    let sum = s.determinant()?.winding_number()?;
    let st = s.transpose();
    let mut scan = ToeplitzScan {
        rel_tol: opts.rel_tol,
        sizes_tried: Vec::new(),
        accepted: None,
        expected_sum: sum,
        scans: Vec::new(),
    };
    let exact = scan_by_division(&st, sum, opts.rel_tol);
    if let Ok(exact) = exact {
        let ok = exact.consistent;
        scan.scans.push(exact);
        if ok {
            scan.accepted = Some(0);
        }
    }
    if scan.accepted.is_none() {
        let mut prev: Option<usize> = None;
        for &n in &opts.sizes {
            scan.sizes_tried.push(n);
            let cur = scan_at_size(&st, n, sum, opts.rel_tol);
            let agrees = prev.is_some_and(|p| {
                let p = &scan.scans[p];
                p.consistent && p.nullities == cur.nullities
            });
            let ok = cur.consistent && agrees;
            scan.scans.push(cur);
            prev = Some(scan.scans.len() - 1);
            if ok {
                scan.accepted = prev;
                break;
            }
        }
    }
    let Some(acc) = scan.accepted() else {
        return Err(RhError::Inconclusive(format!(
            "Toeplitz nullities inconsistent by division and did not stabilize over sizes {:?}: {}",
            opts.sizes,
            serde_json::to_string(&scan.scans).unwrap_or_default()
        )));
    };
    let mut indices = Vec::new();
    for &(j, c) in &acc.second_differences {
        indices.extend(std::iter::repeat_n(j, c as usize));
    }
    Ok((indices, scan))
}

/// Partial indices of `-conj(G)^{-1} G`.
pub fn partial_indices<F: Real>(g: &SymbolMatrix<F>, opts: &ScanOptions) -> Result<PartialIndices> {
    require_square(g)?;
    let wind = g.determinant()?.winding_number()?;
    let a = loop_numerator(g)?;
    let (base, scan) = scan_partial_indices(&a.to_f64(), opts)?;
    let mut indices: Vec<i64> = base.iter().map(|k| k + wind).collect();
    indices.sort_unstable();
    let total: i64 = indices.iter().sum();
    if total != 2 * wind {
        return Err(RhError::Consistency(format!(
            "sum of partial indices {total} differs from the Maslov index {}",
            2 * wind
        )));
    }
    Ok(PartialIndices { indices, shift: wind, scan })
}

/// Partial indices of a loop `W` given directly (left factorization convention).
pub fn partial_indices_of_loop<F: Real>(w: &SymbolMatrix<F>, opts: &ScanOptions) -> Result<PartialIndices> {
    let (mut indices, scan) = scan_partial_indices(&w.to_f64(), opts)?;
    indices.sort_unstable();
    Ok(PartialIndices { indices, shift: 0, scan })
}

/// `Θ` and `κ` with `-conj(G)^{-1} G = Θ diag(ζ^κ) conj(Θ)^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationData<F: Real> {
    pub theta: SymbolMatrix<F>,
    pub kappas: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorizationCheck {
    pub holds: bool,
    /// Largest coefficient of the cleared identity's defect.
    pub defect: f64,
    pub theta_holomorphic: bool,
    /// `det Θ` has no zero in the closed disc.
    pub theta_invertible_on_disc: bool,
}

impl FactorizationCheck {
    pub fn valid(&self) -> bool {
        self.holds && self.theta_holomorphic && self.theta_invertible_on_disc
    }
}

fn invertible_on_closed_disc<F: Real>(p: &LaurentPoly<F>) -> bool {
    match p.min_degree() {
        Some(lo) if lo >= 0 => p.polynomial_roots().iter().all(|r| r.norm() > 1.0 + 1e-12) && lo == 0,
        _ => false,
    }
}

fn defect_within<F: Real>(d: &SymbolMatrix<F>) -> bool {
    if F::EXACT {
        d.is_zero()
    } else {
        d.max_abs_coeff() <= 1e-10
    }
}

/// Checks `-adj(conj G) G conj(Θ) = det(conj G) Θ diag(ζ^κ)`.
pub fn verify_factorization<F: Real>(g: &SymbolMatrix<F>, data: &FactorizationData<F>) -> Result<FactorizationCheck> {
    require_square(g)?;
    if data.theta.nrows() != g.nrows() || !data.theta.is_square() || data.kappas.len() != g.nrows() {
        return Err(RhError::Shape("factorization data does not match the symbol".into()));
    }
    let lhs = loop_numerator(g)?.try_mul(&data.theta.circle_conjugate())?.scale(&-Cx::<F>::new(F::one(), F::zero()));
    let detc = g.determinant()?.circle_conjugate();
    let rhs = data.theta.try_mul(&SymbolMatrix::monomial_diagonal(&data.kappas))?.scale_poly(&detc);
    let diff = lhs.try_sub(&rhs)?;
    Ok(FactorizationCheck {
        holds: defect_within(&diff),
        defect: diff.max_abs_coeff(),
        theta_holomorphic: data.theta.entries().all(|(_, _, p)| p.min_degree().is_none_or(|d| d >= 0)),
        theta_invertible_on_disc: invertible_on_closed_disc(&data.theta.determinant()?),
    })
}

/// Checks `sign · conj(G)^{-1} G = left · diag(ζ^κ) · right`, cleared of `det conj(G)`.
pub fn verify_triple_product<F: Real>(
    g: &SymbolMatrix<F>,
    sign: i64,
    left: &SymbolMatrix<F>,
    kappas: &[i64],
    right: &SymbolMatrix<F>,
) -> Result<FactorizationCheck> {
    require_square(g)?;
    let lhs = loop_numerator(g)?.scale(&Cx::new(F::from_int(sign), F::zero()));
    let detc = g.determinant()?.circle_conjugate();
    let rhs = left.try_mul(&SymbolMatrix::monomial_diagonal(kappas))?.try_mul(right)?.scale_poly(&detc);
    let diff = lhs.try_sub(&rhs)?;
    Ok(FactorizationCheck {
        holds: defect_within(&diff),
        defect: diff.max_abs_coeff(),
        theta_holomorphic: left.entries().all(|(_, _, p)| p.min_degree().is_none_or(|d| d >= 0)),
        theta_invertible_on_disc: invertible_on_closed_disc(&left.determinant()?),
    })
}

/// An entry of `G` whose term cannot reach the target class of its row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellDefinednessViolation {
    pub row: usize,
    pub col: usize,
    /// Vanishing order of `G_{row,col}` at 1 plus the column order.
    pub order: usize,
    pub required: usize,
}

/// Entries with `ord_1(G_ik) + m_k < m_i`.
pub fn well_definedness_violations<F: Real>(
    g: &SymbolMatrix<F>,
    profile: &ConstraintProfile,
) -> Vec<WellDefinednessViolation> {
    let orders = profile.orders();
    g.entries()
        .filter(|(_, _, p)| !p.is_zero())
        .filter_map(|(i, k, p)| {
            let order = p.vanishing_order_at_one().unwrap_or(usize::MAX).saturating_add(orders[k]);
            (order < orders[i]).then_some(WellDefinednessViolation { row: i, col: k, order, required: orders[i] })
        })
        .collect()
}

/// `G` with every entry outside the diagonal blocks set to zero.
pub fn block_diagonal_part<F: Real>(g: &SymbolMatrix<F>, profile: &ConstraintProfile) -> SymbolMatrix<F> {
    let mut out = g.clone();
    for i in 0..g.nrows() {
        for k in 0..g.ncols() {
            if profile.block_of(i) != profile.block_of(k) {
                out.set(i, k, LaurentPoly::zero());
            }
        }
    }
    out
}

/// Nonzero entries below the diagonal blocks of the profile.
pub fn triangularity_violations<F: Real>(g: &SymbolMatrix<F>, profile: &ConstraintProfile) -> Vec<(usize, usize)> {
    g.entries()
        .filter(|(i, k, p)| !p.is_zero() && profile.block_of(*i) > profile.block_of(*k))
        .map(|(i, k, _)| (i, k))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockReport {
    pub size: usize,
    pub order: usize,
    pub partial_indices: Vec<i64>,
    pub maslov: i64,
    /// `min κ ≥ m - 1`.
    pub onto: bool,
    pub scan: ToeplitzScan,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    pub winding_det: i64,
    /// `2 · wind(det G)`.
    pub maslov_from_det: i64,
    pub sum_matches_maslov: bool,
    pub second_differences_nonnegative: bool,
    pub second_differences_sum_to_n: bool,
    /// Sufficient condition for the operator to map into the constrained target.
    pub well_defined: bool,
    pub violations: Vec<WellDefinednessViolation>,
    pub rel_tol: f64,
    pub sizes: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexReport {
    pub dimension: usize,
    pub profile: ConstraintProfile,
    /// Block order, sorted within each block.
    pub partial_indices: Vec<i64>,
    pub blocks: Vec<BlockReport>,
    pub maslov: i64,
    pub onto: bool,
    pub kernel_dim: Option<usize>,
    /// `ℓ0 = max κ`.
    pub jet_order: i64,
    pub diagnostics: Diagnostics,
    pub provenance: BTreeMap<String, String>,
}

/// Classifies `f ↦ 2 Re[conj(G) f]` on `Π ((1-ζ)^{m_j} A)^{N_j}`.
pub fn classify<F: Real>(g: &SymbolMatrix<F>, profile: &ConstraintProfile, opts: &ScanOptions) -> Result<IndexReport> {
    require_square(g)?;
    let n = g.nrows();
    profile.check_dimension(n)?;
    let below = triangularity_violations(g, profile);
    if !below.is_empty() {
        return Err(RhError::BlockStructure(format!(
            "symbol is not upper block-triangular for profile {profile}; nonzero entries at {below:?}"
        )));
    }
    let mut blocks = Vec::new();
    let mut merged = Vec::new();
    for (&(size, order), &(lo, hi)) in profile.blocks.iter().zip(&profile.ranges()) {
        let gj = g.principal_block(lo, hi);
        let wind = gj.determinant()?.winding_number()?;
        let pi = partial_indices(&gj, opts)?;
        let onto = pi.indices.iter().all(|&k| k >= order as i64 - 1);
        merged.extend(pi.indices.iter().copied());
        blocks.push(BlockReport { size, order, partial_indices: pi.indices, maslov: 2 * wind, onto, scan: pi.scan });
    }
    let winding_det = g.determinant()?.winding_number()?;
    let maslov: i64 = merged.iter().sum();
    let onto = blocks.iter().all(|b| b.onto);
    let kernel_dim = onto.then(|| (maslov + n as i64 - profile.weight() as i64).max(0) as usize);
    let violations = well_definedness_violations(g, profile);
    let accepted: Vec<&ScanAtSize> = blocks.iter().filter_map(|b| b.scan.accepted()).collect();
    let diagnostics = Diagnostics {
        winding_det,
        maslov_from_det: 2 * winding_det,
        sum_matches_maslov: maslov == 2 * winding_det,
        second_differences_nonnegative: accepted.iter().all(|s| s.second_differences.iter().all(|x| x.1 >= 0)),
        second_differences_sum_to_n: accepted
            .iter()
            .zip(&blocks)
            .all(|(s, b)| s.second_differences.iter().map(|x| x.1).sum::<i64>() == b.size as i64),
        well_defined: violations.is_empty(),
        violations,
        rel_tol: opts.rel_tol,
        sizes: opts.sizes.clone(),
    };
    if !diagnostics.sum_matches_maslov {
        return Err(RhError::Consistency(format!(
            "sum of block partial indices {maslov} differs from 2·wind(det G) = {}",
            2 * winding_det
        )));
    }
    let mut provenance = BTreeMap::new();
    provenance.insert(
        "partial_indices".into(),
        "Toeplitz nullity scan of adj(conj G_j)·G_j per diagonal block, shifted by wind(det G_j)".into(),
    );
    provenance.insert("maslov".into(), "sum of partial indices; cross-checked against 2·wind(det G)".into());
    provenance.insert("onto".into(), "min κ ≥ m_j - 1 in every block".into());
    provenance.insert("kernel_dim".into(), "κ + N - Σ N_j m_j".into());
    provenance.insert("jet_order".into(), "max κ".into());
    Ok(IndexReport {
        dimension: n,
        profile: profile.clone(),
        jet_order: merged.iter().copied().max().unwrap_or(0),
        partial_indices: merged,
        blocks,
        maslov,
        onto,
        kernel_dim,
        diagnostics,
        provenance,
    })
}

/// Vector function `(f_1, …, f_N)`.
pub type VectorFunction<F> = Vec<LaurentPoly<F>>;

/// `Θ g` over the scalar bases of `g_i = ζ^{κ_i} conj(g_i)` on `(1-ζ)^{m_i} A`.
pub fn kernel_basis_from_factorization<F: Real>(
    data: &FactorizationData<F>,
    profile: &ConstraintProfile,
) -> Result<Vec<VectorFunction<F>>> {
    let n = data.theta.nrows();
    profile.check_dimension(n)?;
    let orders = profile.orders();
    let mut out = Vec::new();
    for (i, (&kappa, &m)) in data.kappas.iter().zip(&orders).enumerate() {
        for g in scalar_kernel_basis::<F>(Sign::Minus, kappa, m) {
            let mut e = vec![LaurentPoly::zero(); n];
            e[i] = g;
            let f = data.theta.apply(&e)?;
            for (j, fj) in f.iter().enumerate() {
                if fj.vanishing_order_at_one().is_some_and(|o| o < orders[j]) {
                    return Err(RhError::UnverifiedFactorization { defect: 0.0 });
                }
            }
            out.push(f);
        }
    }
    Ok(out)
}

/// `2 Re[conj(G) f]`.
pub fn apply_operator<F: Real>(g: &SymbolMatrix<F>, f: &[LaurentPoly<F>]) -> Result<Vec<LaurentPoly<F>>> {
    Ok(g.circle_conjugate().apply(f)?.iter().map(LaurentPoly::twice_real_part).collect())
}

/// Max modulus of `2 Re[conj(G) f]` over `samples` circle points.
pub fn operator_residual<F: Real>(g: &SymbolMatrix<F>, f: &[LaurentPoly<F>], samples: usize) -> Result<f64> {
    let gc = g.circle_conjugate().to_f64();
    let f64s: Vec<LaurentPoly<f64>> = f.iter().map(LaurentPoly::to_f64).collect();
    let out = gc.apply(&f64s)?;
    Ok(crate::spaces::circle_grid(samples)
        .into_iter()
        .map(|z| out.iter().map(|p| 2.0 * p.eval(z).re.abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max))
}

/// Exact kernel of `f ↦ 2 Re[conj(G) f]` restricted to cofactors of degree `≤ degree`.
pub fn exact_kernel<F: Real>(
    g: &SymbolMatrix<F>,
    profile: &ConstraintProfile,
    degree: usize,
) -> Result<Vec<VectorFunction<F>>> {
    require_square(g)?;
    let n = g.nrows();
    profile.check_dimension(n)?;
    let orders = profile.orders();
    let gc = g.circle_conjugate();
    // one real unknown per (component, degree, re/im)
    let mut units = Vec::new();
    let mut images = Vec::new();
    for (c, &m) in orders.iter().enumerate() {
        let w = LaurentPoly::<F>::one_minus_zeta_pow(m);
        for d in 0..=degree as i64 {
            for unit in [Cx::new(F::one(), F::zero()), Cx::new(F::zero(), F::one())] {
                let fc = &w * &LaurentPoly::monomial(d, unit);
                let col: Vec<LaurentPoly<F>> = (0..n).map(|r| (gc.get(r, c) * &fc).twice_real_part()).collect();
                units.push((c, fc));
                images.push(col);
            }
        }
    }
    let mut keys: Vec<(usize, i64)> = Vec::new();
    for img in &images {
        for (r, p) in img.iter().enumerate() {
            keys.extend(p.terms().filter(|(k, _)| *k >= 0).map(|(k, _)| (r, k)));
        }
    }
    keys.sort_unstable();
    keys.dedup();
    let mut rows = Vec::with_capacity(2 * keys.len());
    for &(r, k) in &keys {
        rows.push(images.iter().map(|img| img[r].coeff(k).re).collect::<Vec<F>>());
        rows.push(images.iter().map(|img| img[r].coeff(k).im).collect::<Vec<F>>());
    }
    let ns = exact_nullspace(rows, units.len());
    Ok(ns
        .into_iter()
        .map(|x| {
            let mut f = vec![LaurentPoly::zero(); n];
            for (coef, (c, fc)) in x.into_iter().zip(&units) {
                if !coef.is_zero() {
                    f[*c] = &f[*c] + &fc.scale_real(&coef);
                }
            }
            f
        })
        .collect())
}

/// Real matrix of the jets `(∂^ℓ f_i(1))`, `ℓ ≤ order`, one column per basis element.
#[derive(Clone, Debug)]
pub struct JetMatrix<F: Real> {
    pub rows: Vec<Vec<F>>,
    pub cols: usize,
    pub rank: usize,
}

pub fn jet_matrix<F: Real>(basis: &[VectorFunction<F>], order: usize) -> JetMatrix<F> {
    let cols = basis.len();
    let mut rows: Vec<Vec<F>> = Vec::new();
    if let Some(first) = basis.first() {
        let n = first.len();
        let jets: Vec<Vec<Vec<Cx<F>>>> = basis.iter().map(|f| f.iter().map(|p| p.jet_at_one(order)).collect()).collect();
        for i in 0..n {
            for l in 0..=order {
                rows.push(jets.iter().map(|b| b[i][l].re.clone()).collect());
                rows.push(jets.iter().map(|b| b[i][l].im.clone()).collect());
            }
        }
    }
    let rank = if cols == 0 {
        0
    } else if F::EXACT {
        exact_rank(rows.clone(), cols)
    } else {
        let m = DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c].to_f64());
        rank_report(&m, DEFAULT_REL_TOL).rank
    };
    JetMatrix { rows, cols, rank }
}
