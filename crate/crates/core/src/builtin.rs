//! Built-in symbols: a singular 4×4 example, its reduction and factorization data.

use crate::index::{ConstraintProfile, FactorizationData};
use crate::laurent::LaurentPoly;
use crate::matrix::SymbolMatrix;
use crate::scalar::{Cx, Real};

fn c<F: Real>(re: (i64, i64), im: (i64, i64)) -> Cx<F> {
    Cx::new(F::from_ratio(re.0, re.1), F::from_ratio(im.0, im.1))
}

fn mono<F: Real>(k: i64, re: (i64, i64), im: (i64, i64)) -> LaurentPoly<F> {
    LaurentPoly::monomial(k, c(re, im))
}

fn z<F: Real>() -> LaurentPoly<F> {
    LaurentPoly::zero()
}

fn rows<F: Real>(r: Vec<Vec<LaurentPoly<F>>>) -> SymbolMatrix<F> {
    SymbolMatrix::from_rows(r).expect("static shape")
}

const ONE: (i64, i64) = (1, 1);
const ZERO: (i64, i64) = (0, 1);
const MINUS: (i64, i64) = (-1, 1);

/// The invertible symbol `G`.
pub fn example_g<F: Real>() -> SymbolMatrix<F> {
    rows(vec![
        vec![mono(0, MINUS, ZERO), mono(3, ONE, ZERO), z(), z()],
        vec![z(), mono(1, ONE, ZERO), z(), mono(1, ONE, ZERO)],
        vec![z(), mono(1, ZERO, (-1, 2)), mono(0, ZERO, MINUS), mono(2, ZERO, MINUS)],
        vec![z(), z(), z(), mono(2, ZERO, MINUS)],
    ])
}

/// `D = diag(1, (1-ζ)², (1-ζ)², 1)`.
pub fn example_d<F: Real>() -> SymbolMatrix<F> {
    let w = LaurentPoly::one_minus_zeta_pow(2);
    SymbolMatrix::diagonal(vec![LaurentPoly::one(), w.clone(), w, LaurentPoly::one()])
}

/// The singular symbol `G' = G conj(D)`, `det G' = (1-ζ)⁴/ζ`.
pub fn example_gprime<F: Real>() -> SymbolMatrix<F> {
    let w: LaurentPoly<F> = LaurentPoly::one_minus_zeta_pow(2);
    rows(vec![
        vec![mono(0, MINUS, ZERO), &w * &mono(1, ONE, ZERO), z(), z()],
        vec![z(), &w * &mono(-1, ONE, ZERO), z(), mono(1, ONE, ZERO)],
        vec![z(), &w * &mono(-1, ZERO, (-1, 2)), &w * &mono(-2, ZERO, MINUS), mono(2, ZERO, MINUS)],
        vec![z(), z(), z(), mono(2, ZERO, MINUS)],
    ])
}

/// Block-diagonal part `G̃` of `G` for the profile `1:0,2:2,1:0`.
pub fn example_gtilde<F: Real>() -> SymbolMatrix<F> {
    rows(vec![
        vec![mono(0, MINUS, ZERO), z(), z(), z()],
        vec![z(), mono(1, ONE, ZERO), z(), z()],
        vec![z(), mono(1, ZERO, (-1, 2)), mono(0, ZERO, MINUS), z()],
        vec![z(), z(), z(), mono(2, ZERO, MINUS)],
    ])
}

pub fn example_profile() -> ConstraintProfile {
    ConstraintProfile { blocks: vec![(1, 0), (2, 2), (1, 0)] }
}

pub fn example_kappas() -> Vec<i64> {
    vec![0, 1, 1, 4]
}

/// `Θ` with `-conj(G̃)^{-1} G̃ = Θ diag(1, ζ, ζ, ζ⁴) conj(Θ)^{-1}`; `det Θ = 2`.
pub fn example_theta<F: Real>() -> SymbolMatrix<F> {
    rows(vec![
        vec![mono(0, ZERO, ONE), z(), z(), z()],
        vec![z(), LaurentPoly::from_ints(0, &[1, -1]), LaurentPoly::from_terms([(0, c(ZERO, ONE)), (1, c(ZERO, ONE))]), z()],
        vec![z(), LaurentPoly::one(), mono(0, ZERO, MINUS), z()],
        vec![z(), z(), z(), LaurentPoly::one()],
    ])
}

pub fn example_factorization<F: Real>() -> FactorizationData<F> {
    FactorizationData { theta: example_theta(), kappas: example_kappas() }
}

/// Left factor of the displayed splitting `conj(G̃)^{-1} G̃ = X diag(1, ζ, ζ, ζ⁴) Y`.
pub fn example_left<F: Real>() -> SymbolMatrix<F> {
    rows(vec![
        vec![LaurentPoly::one(), z(), z(), z()],
        vec![z(), mono(0, MINUS, ZERO), mono(1, MINUS, ZERO), z()],
        vec![z(), z(), LaurentPoly::one(), z()],
        vec![z(), z(), z(), mono(0, ZERO, ONE)],
    ])
}

/// Right factor `Y` of the displayed splitting.
pub fn example_right<F: Real>() -> SymbolMatrix<F> {
    rows(vec![
        vec![LaurentPoly::one(), z(), z(), z()],
        vec![z(), z(), LaurentPoly::one(), z()],
        vec![z(), mono(0, MINUS, ZERO), mono(-1, MINUS, ZERO), z()],
        vec![z(), z(), z(), mono(0, ZERO, ONE)],
    ])
}

/// Named inputs. `@example` carries its profile, `@example-gprime` is the
/// unreduced singular symbol. Each also answers to a `paper-` prefixed name.
pub fn lookup<F: Real>(name: &str) -> Option<(SymbolMatrix<F>, Option<ConstraintProfile>)> {
    let name = name.trim_start_matches('@');
    match name.strip_prefix("paper-").unwrap_or(name) {
        "example" => Some((example_g(), Some(example_profile()))),
        "example-gprime" => Some((example_gprime(), None)),
        "example-gtilde" => Some((example_gtilde(), Some(example_profile()))),
        _ => None,
    }
}

pub const NAMES: [&str; 3] = ["@example", "@example-gprime", "@example-gtilde"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{verify_factorization, verify_triple_product};
    use crate::scalar::Rational;

    type M = SymbolMatrix<Rational>;

    #[test]
    fn gprime_is_g_times_conj_d() {
        let gp: M = example_gprime();
        assert_eq!(example_g::<Rational>().try_mul(&example_d::<Rational>().circle_conjugate()).unwrap(), gp);
        let det = gp.determinant().unwrap();
        assert_eq!(det, LaurentPoly::one_minus_zeta_pow(4).shift(-1));
        assert_eq!(det.vanishing_order_at_one(), Some(4));
    }

    #[test]
    fn determinants() {
        assert_eq!(example_g::<Rational>().determinant().unwrap(), LaurentPoly::zeta_pow(3));
        assert_eq!(example_gtilde::<Rational>().determinant().unwrap(), LaurentPoly::zeta_pow(3));
        assert_eq!(example_theta::<Rational>().determinant().unwrap(), LaurentPoly::from_ints(0, &[2]));
    }

    #[test]
    fn factorizations_verify() {
        let gt: M = example_gtilde();
        assert!(verify_factorization(&gt, &example_factorization()).unwrap().valid());
        let chk = verify_triple_product(&gt, 1, &example_left(), &example_kappas(), &example_right()).unwrap();
        assert!(chk.holds);
        let mut bad = example_kappas();
        bad[3] = 3;
        assert!(!verify_triple_product(&gt, 1, &example_left(), &bad, &example_right()).unwrap().holds);
        let data = FactorizationData { theta: example_theta(), kappas: bad };
        assert!(!verify_factorization(&gt, &data).unwrap().holds);
    }

    #[test]
    fn example_classification() {
        use crate::index::{classify, kernel_basis_from_factorization, operator_residual, jet_matrix, exact_kernel, ScanOptions};
        let g: M = example_g();
        let rep = classify(&g, &example_profile(), &ScanOptions::default()).unwrap();
        assert_eq!(rep.partial_indices, vec![0, 1, 1, 4]);
        assert_eq!(rep.maslov, 6);
        assert!(rep.onto);
        assert_eq!(rep.kernel_dim, Some(6));
        assert_eq!(rep.jet_order, 4);
        assert!(!rep.diagnostics.well_defined);
        let gt: M = example_gtilde();
        let basis = kernel_basis_from_factorization(&example_factorization::<Rational>(), &example_profile()).unwrap();
        assert_eq!(basis.len(), 6);
        for f in &basis {
            assert!(crate::index::apply_operator(&gt, f).unwrap().iter().all(LaurentPoly::is_zero));
            assert!(operator_residual(&gt, f, 4096).unwrap() < 1e-12);
        }
        assert_eq!(jet_matrix(&basis, 4).rank, 6);
        assert_eq!(exact_kernel(&gt, &example_profile(), 6).unwrap().len(), 6);
        assert_eq!(exact_kernel(&g, &example_profile(), 6).unwrap().len(), 4);
        assert_eq!(crate::index::block_diagonal_part(&g, &example_profile()), gt);
    }
}
