//! Reduction of a symbol whose determinant vanishes at `ζ = 1` to an
//! invertible one plus vanishing-order constraints on the domain.
//!
//! On the circle `conj((1-ζ)^m) = (-1)^m ζ^{-m} (1-ζ)^m`, so dividing column
//! `j` of `G'` by that factor gives `G' = G conj(D)` with `D = diag((1-ζ)^{m_j})`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RhError};
use crate::index::{triangularity_violations, ConstraintProfile};
use crate::laurent::LaurentPoly;
use crate::matrix::SymbolMatrix;
use crate::scalar::{Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct SingularReduction<F: Real> {
    pub g: SymbolMatrix<F>,
    pub orders: Vec<usize>,
    /// `diag((1-ζ)^{m_j})`.
    pub d: SymbolMatrix<F>,
    /// Vanishing order of `det G'` at 1.
    pub det_order: usize,
}

/// Plain summary of a reduction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionSummary {
    pub orders: Vec<usize>,
    pub det_order: usize,
    pub det_winding: i64,
}

impl<F: Real> SingularReduction<F> {
    /// `G conj(D)`.
    pub fn reassemble(&self) -> Result<SymbolMatrix<F>> {
        self.g.try_mul(&self.d.circle_conjugate())
    }

    pub fn summary(&self) -> Result<ReductionSummary> {
        Ok(ReductionSummary {
            orders: self.orders.clone(),
            det_order: self.det_order,
            det_winding: self.g.determinant()?.winding_number()?,
        })
    }
}

fn signed_shift<F: Real>(m: usize) -> LaurentPoly<F> {
    let s = if m.is_multiple_of(2) { F::one() } else { -F::one() };
    LaurentPoly::monomial(m as i64, Cx::new(s, F::zero()))
}

/// Column reduction `G' = G conj(D)` with `m_j` the least vanishing order in column `j`.
pub fn column_reduce<F: Real>(gp: &SymbolMatrix<F>) -> Result<SingularReduction<F>> {
    if !gp.is_square() {
        return Err(RhError::Shape(format!("symbol is {}x{}", gp.nrows(), gp.ncols())));
    }
    let n = gp.nrows();
    let det = gp.determinant()?;
    let det_order = det
        .vanishing_order_at_one()
        .ok_or_else(|| RhError::UnsupportedSingularity("determinant vanishes identically".into()))?;
    // zeros away from 1 cannot be removed by this reduction
    let rest = det.divide_by_one_minus_zeta(det_order)?;
    if let Err(RhError::SingularOnCircle { distance }) = rest.winding_number() {
        return Err(RhError::UnsupportedSingularity(format!(
            "determinant vanishes on the circle away from 1 (root distance {distance:.3e}); rotate first"
        )));
    }
    let mut g = gp.clone();
    let mut orders = Vec::with_capacity(n);
    for j in 0..n {
        let col = gp.column(j);
        let m = col.iter().filter_map(LaurentPoly::vanishing_order_at_one).min().unwrap_or(0);
        let factor = signed_shift::<F>(m);
        let reduced = col
            .iter()
            .map(|p| Ok(&p.divide_by_one_minus_zeta(m)? * &factor))
            .collect::<Result<Vec<_>>>()?;
        g.set_column(j, &reduced);
        orders.push(m);
    }
    let total: usize = orders.iter().sum();
    let gdet = g.determinant()?;
    if total != det_order || gdet.vanishing_order_at_one().is_none_or(|o| o > 0) {
        return Err(RhError::IrreducibleSingularity(format!(
            "column orders {orders:?} sum to {total}, determinant order is {det_order}"
        )));
    }
    gdet.winding_number().map_err(|_| {
        RhError::IrreducibleSingularity("reduced determinant still vanishes on the circle".into())
    })?;
    let d = SymbolMatrix::diagonal(orders.iter().map(|&m| LaurentPoly::one_minus_zeta_pow(m)).collect());
    Ok(SingularReduction { g, orders, d, det_order })
}

/// Groups consecutive equal orders into blocks and checks that `G` is upper
/// block-triangular with diagonal blocks invertible on the circle.
pub fn block_structure<F: Real>(g: &SymbolMatrix<F>, orders: &[usize]) -> Result<ConstraintProfile> {
    if orders.len() != g.nrows() || !g.is_square() {
        return Err(RhError::Shape("orders do not match the symbol".into()));
    }
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    for &m in orders {
        match blocks.last_mut() {
            Some(last) if last.1 == m => last.0 += 1,
            _ => blocks.push((1, m)),
        }
    }
    let profile = ConstraintProfile { blocks };
    let below = triangularity_violations(g, &profile);
    if !below.is_empty() {
        return Err(RhError::BlockStructure(format!(
            "grouping {profile} is not upper block-triangular; nonzero entries at {below:?}"
        )));
    }
    for (lo, hi) in profile.ranges() {
        let det = g.principal_block(lo, hi).determinant()?;
        if det.winding_number().is_err() {
            return Err(RhError::BlockStructure(format!(
                "diagonal block {lo}..{hi} is not invertible on the circle"
            )));
        }
    }
    Ok(profile)
}

/// `e^{iθ}` in the field; exact for multiples of `π/2`.
pub fn unit_from_angle<F: Real>(theta: f64) -> Cx<F> {
    let q = theta / std::f64::consts::FRAC_PI_2;
    if (q - q.round()).abs() < 1e-12 {
        let (re, im) = match (q.round() as i64).rem_euclid(4) {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        return Cx::new(F::from_int(re), F::from_int(im));
    }
    Cx::new(F::from_float(theta.cos()), F::from_float(theta.sin()))
}

/// `G(ζ_0 ζ)`: moves a singularity at `ζ_0` to `1`.
pub fn rotate_to_one<F: Real>(g: &SymbolMatrix<F>, zeta0: &Cx<F>) -> SymbolMatrix<F> {
    g.rotate(zeta0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{example_g, example_gprime};
    use crate::scalar::Rational;

    type P = LaurentPoly<Rational>;
    type M = SymbolMatrix<Rational>;

    #[test]
    fn example_reduction() {
        let red = column_reduce(&example_gprime::<Rational>()).unwrap();
        assert_eq!(red.orders, vec![0, 2, 2, 0]);
        assert_eq!(red.g, example_g::<Rational>());
        assert_eq!(red.reassemble().unwrap(), example_gprime::<Rational>());
        assert_eq!(red.det_order, 4);
        let profile = block_structure(&red.g, &red.orders).unwrap();
        assert_eq!(profile.blocks, vec![(1, 0), (2, 2), (1, 0)]);
    }

    #[test]
    fn trivial_and_hand_cases() {
        let red = column_reduce(&M::identity(3)).unwrap();
        assert_eq!(red.orders, vec![0, 0, 0]);
        assert_eq!(red.g, M::identity(3));
        let gp = M::diagonal(vec![P::from_ints(0, &[1, -1]), P::one()]);
        let red = column_reduce(&gp).unwrap();
        assert_eq!(red.orders, vec![1, 0]);
        assert_eq!(red.g, M::diagonal(vec![P::from_ints(1, &[-1]), P::one()]));
        assert_eq!(block_structure(&M::identity(2), &[0, 0]).unwrap().blocks, vec![(2, 0)]);
    }

    #[test]
    fn failures() {
        let anti = M::from_rows(vec![vec![P::zero(), P::one()], vec![P::one(), P::zero()]]).unwrap();
        assert!(matches!(block_structure(&anti, &[1, 0]), Err(RhError::BlockStructure(_))));
        // det = (1-ζ)^2 but each column only vanishes to order 0
        let gp = M::from_rows(vec![
            vec![P::one(), P::one()],
            vec![P::one(), P::from_ints(0, &[2, -2, 1])],
        ])
        .unwrap();
        assert!(matches!(column_reduce(&gp), Err(RhError::IrreducibleSingularity(_))));
        let gp = M::diagonal(vec![P::from_ints(0, &[1, 1])]);
        assert!(matches!(column_reduce(&gp), Err(RhError::UnsupportedSingularity(_))));
    }

    #[test]
    fn rotation_moves_singularity() {
        let i = unit_from_angle::<Rational>(std::f64::consts::FRAC_PI_2);
        assert_eq!(i, Cx::new(Rational::from_int(0), Rational::from_int(1)));
        // singular at ζ = i
        let h = example_gprime::<Rational>().rotate(&i.conj());
        assert!(column_reduce(&h).is_err());
        let red = column_reduce(&rotate_to_one(&h, &i)).unwrap();
        assert_eq!(red.orders, vec![0, 2, 2, 0]);
    }
}
