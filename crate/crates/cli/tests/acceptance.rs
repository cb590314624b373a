//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any criterion fails.

use std::process::Command;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rh_core::blocks::{
    pair_onto, pair_symbol, scalar_kernel_basis, scalar_kernel_dim, scalar_onto, scalar_witness, solve_scalar, twist_apply,
    PairProblem, PairReduction, Sign,
};
use rh_core::builtin::{example_factorization, example_gprime, example_gtilde, example_profile};
use rh_core::index::{
    classify, jet_matrix, kernel_basis_from_factorization, maslov_index, operator_residual,
    partial_indices, ConstraintProfile, ScanOptions, VectorFunction,
};
use rh_core::laurent::LaurentPoly;
use rh_core::matrix::SymbolMatrix;
use rh_core::reduce::{block_structure, column_reduce};
use rh_core::scalar::{Cx, Rational, Real};
use rh_core::spaces::{
    rm_check, rm_check_laurent, rm_odd_unfold, rm_shift, symmetrize_rm, tau_m, tau_m_inverse, tau_m_of_laurent,
    BoundaryFunction, ConstrainedFunction,
};
use rh_core::spectral::{
    assemble_default, kernel_study, max_on_grid, numerical_kernel, reflect_kernel_dim, RESIDUAL_SAMPLES,
};
use serde_json::{json, Value};

const TOL: f64 = 1e-8;

type P = LaurentPoly<Rational>;
type M = SymbolMatrix<Rational>;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Jet checks gathered from criteria 1–6: (label, jet rank, kernel dimension).
type Jets = Vec<(String, usize, usize)>;

fn random_poly(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> P {
    LaurentPoly::from_terms((lo..=hi).map(|k| {
        let re = Rational::from_ratio(rng.gen_range(-6..=6), den);
        let im = Rational::from_ratio(rng.gen_range(-6..=6), den);
        (k, Cx::new(re, im))
    }))
}

fn random_rm(rng: &mut ChaCha8Rng, m: usize, half_span: i64) -> P {
    symmetrize_rm(&random_poly(rng, -half_span, half_span, 4), m as i64)
}

fn one_by_one(r: i64) -> M {
    M::monomial_diagonal(&[r])
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_rh")).args(["pipeline", "@paper-example-gprime"]).output();
    let elapsed = start.elapsed().as_secs_f64();
    let out = match out {
        Ok(o) => o,
        Err(e) => return verdict(false, format!("could not run the binary: {e}")),
    };
    let v: Value = match serde_json::from_slice(&out.stdout) {
        Ok(v) => v,
        Err(e) => return verdict(false, format!("unreadable report: {e}")),
    };
    // the library path must agree with the command
    let lib = column_reduce(&example_gprime::<Rational>()).and_then(|red| {
        let profile = block_structure(&red.g, &red.orders)?;
        Ok((red.orders.clone(), profile.clone(), classify(&red.g, &profile, &ScanOptions::default())?))
    });
    let lib_ok = matches!(&lib, Ok((orders, profile, rep))
        if orders == &[0, 2, 2, 0] && profile == &example_profile()
            && rep.partial_indices == [0, 1, 1, 4] && rep.maslov == 6 && rep.onto && rep.kernel_dim == Some(6));
    let pass = out.status.code() == Some(0)
        && v["reduction"]["orders"] == json!([0, 2, 2, 0])
        && v["reduction"]["blocks"] == json!([[1, 0], [2, 2], [1, 0]])
        && v["report"]["partial_indices"] == json!([0, 1, 1, 4])
        && v["report"]["maslov"] == json!(6)
        && v["report"]["onto"] == json!(true)
        && v["report"]["kernel_dim"] == json!(6)
        && lib_ok
        && elapsed < 5.0;
    verdict(
        pass,
        format!(
            "orders {}, blocks {}, indices {}, maslov {}, onto {}, dim {}, library agrees {lib_ok}, {elapsed:.2}s",
            v["reduction"]["orders"],
            v["reduction"]["blocks"],
            v["report"]["partial_indices"],
            v["report"]["maslov"],
            v["report"]["onto"],
            v["report"]["kernel_dim"]
        ),
    )
}

fn criterion_2(jets: &mut Jets) -> Verdict {
    let start = Instant::now();
    let gt: M = example_gtilde();
    let profile = example_profile();
    let study = match kernel_study(&gt, &profile, &[32, 64], TOL) {
        Ok(s) => s,
        Err(e) => return verdict(false, e.to_string()),
    };
    let dims: Vec<usize> = study.kernels.iter().map(|k| k.dimension).collect();
    let gap = study.min_gap_ratio();
    let basis = kernel_basis_from_factorization(&example_factorization::<Rational>(), &profile).unwrap_or_default();
    let worst = basis
        .iter()
        .map(|f| operator_residual(&gt, f, RESIDUAL_SAMPLES).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    jets.push(("example exact basis".into(), jet_matrix(&basis, 4).rank, basis.len()));
    for k in &study.kernels {
        jets.push((format!("example numerical basis Dg={}", k.degree), jet_matrix(&k.basis, 4).rank, k.dimension));
    }
    let pass = dims == [6, 6] && gap > 1e3 && basis.len() == 6 && worst < 1e-8 && elapsed < 30.0;
    verdict(
        pass,
        format!(
            "numerical dims {dims:?} at Dg 32/64, min gap {gap:.2e}, {} exact basis vectors, max residual {worst:.2e}, {elapsed:.2}s",
            basis.len()
        ),
    )
}

fn criterion_3(jets: &mut Jets) -> Verdict {
    let mut agree = 0;
    let mut total = 0;
    let mut misses = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        for l in -2..=6 {
            for m in 0..=4usize {
                total += 1;
                let n = reflect_kernel_dim(sign, l, m, 32).nullity;
                let d = scalar_kernel_dim(l, m);
                if n == d {
                    agree += 1;
                } else {
                    misses.push(format!("{sign:?} l={l} m={m}: {n} vs {d}"));
                }
                if d > 0 {
                    let basis: Vec<VectorFunction<Rational>> =
                        scalar_kernel_basis::<Rational>(sign, l, m).into_iter().map(|f| vec![f]).collect();
                    jets.push((format!("scalar {sign:?} l={l} m={m}"), jet_matrix(&basis, l as usize).rank, d));
                }
            }
        }
    }
    verdict(
        agree == total,
        format!("{agree}/{total} (l in -2..6, m in 0..4, both signs; 45 per sign){}", if misses.is_empty() { String::new() } else { format!("; {}", misses.join("; ")) }),
    )
}

fn criterion_4(jets: &mut Jets) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut lines = Vec::new();
    let mut ok = true;
    let mut cases = 0;
    let mut min_witness = f64::INFINITY;
    for m in 0..=5usize {
        for r in -3..=3i64 {
            let t = 2 * r - m as i64;
            if !(-3..=1).contains(&t) {
                continue;
            }
            cases += 1;
            let v = random_rm(&mut rng, m, 3);
            let phi = ConstrainedFunction { m, core: BoundaryFunction::laurent(v.clone()) };
            let onto = t >= -1;
            match solve_scalar(r, &phi, 1e-12) {
                Ok(f) => {
                    let fl = f.to_laurent_f64();
                    let target = &LaurentPoly::one_minus_zeta_pow(m) * &v.to_f64();
                    let res = max_on_grid(&[&twist_apply(r, &fl) - &target], RESIDUAL_SAMPLES);
                    let vanishes = fl.vanishing_order_at_one().is_some_and(|o| o >= m);
                    if !(onto && res < 1e-10 && vanishes && scalar_onto(r, m)) {
                        ok = false;
                        lines.push(format!("r={r} m={m}: solved with residual {res:.2e}"));
                    }
                    let basis: Vec<VectorFunction<Rational>> =
                        scalar_kernel_basis::<Rational>(Sign::Plus, 2 * r, m).into_iter().map(|f| vec![f]).collect();
                    if !basis.is_empty() {
                        jets.push((format!("twist r={r} m={m}"), jet_matrix(&basis, (2 * r).max(0) as usize).rank, basis.len()));
                    }
                }
                Err(e) => {
                    if onto {
                        ok = false;
                        lines.push(format!("r={r} m={m}: {e}"));
                    }
                }
            }
            if !onto {
                let Some(w) = scalar_witness::<Rational>(r, m) else {
                    ok = false;
                    lines.push(format!("r={r} m={m}: no witness"));
                    continue;
                };
                let target = [w.to_f64()];
                for d in [32, 64, 128] {
                    match assemble_default(&one_by_one(r), &ConstraintProfile { blocks: vec![(1, m)] }, d) {
                        Ok(sys) => {
                            let res = sys.solve_targets(&target, TOL, RESIDUAL_SAMPLES).residual;
                            min_witness = min_witness.min(res);
                            if res < 0.05 {
                                ok = false;
                                lines.push(format!("r={r} m={m} Dg={d}: witness residual {res:.3e}"));
                            }
                        }
                        Err(e) => {
                            ok = false;
                            lines.push(e.to_string());
                        }
                    }
                }
            }
        }
    }
    verdict(ok, format!("{cases} (r, m) cases, min witness residual {min_witness:.3}{}", if lines.is_empty() { String::new() } else { format!("; {}", lines.join("; ")) }))
}

fn criterion_5(jets: &mut Jets) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    let mut total = 0;
    let mut notes = Vec::new();
    for r1 in -1..=2i64 {
        for r2 in -1..=2i64 {
            for m in 0..=3usize {
                total += 1;
                let g: M = pair_symbol(r1, r2);
                let profile = ConstraintProfile { blocks: vec![(2, m)] };
                let sys = match assemble_default(&g, &profile, 32) {
                    Ok(s) => s,
                    Err(e) => {
                        notes.push(e.to_string());
                        continue;
                    }
                };
                let worst_random = (0..10)
                    .map(|_| {
                        let t = [random_rm(&mut rng, m, 2).to_f64(), random_rm(&mut rng, m, 2).to_f64()];
                        sys.solve_targets(&t, TOL, RESIDUAL_SAMPLES).residual
                    })
                    .fold(0.0, f64::max);
                let witness = PairReduction::new(PairProblem { r1, r2, m })
                    .witness::<Rational>()
                    .map(|w| sys.solve_targets(&[w[0].to_f64(), w[1].to_f64()], TOL, RESIDUAL_SAMPLES).residual);
                let claimed = pair_onto(r1, r2, m);
                let evidence_onto = worst_random < 1e-8;
                let witness_ok = witness.is_some_and(|w| w >= 0.01);
                let consistent = if claimed { evidence_onto && witness.is_none() } else { !evidence_onto && witness_ok };
                if consistent {
                    agree += 1;
                } else {
                    notes.push(format!("({r1},{r2},{m}): onto {claimed}, random {worst_random:.2e}, witness {witness:?}"));
                }
                if claimed {
                    let k = numerical_kernel(&sys, TOL);
                    match classify(&g, &profile, &ScanOptions::default()) {
                        Ok(rep) => {
                            if rep.kernel_dim != Some(k.dimension) {
                                notes.push(format!("({r1},{r2},{m}): formula dim {:?}, numerical {}", rep.kernel_dim, k.dimension));
                            }
                            if k.dimension > 0 {
                                let order = rep.jet_order.max(0) as usize;
                                jets.push((format!("pair ({r1},{r2},{m})"), jet_matrix(&k.basis, order).rank, k.dimension));
                            }
                        }
                        Err(e) => notes.push(format!("({r1},{r2},{m}): {e}")),
                    }
                }
            }
        }
    }
    verdict(agree == total && notes.is_empty(), format!("{agree}/{total} cases agree{}", if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }))
}

fn random_symbol(rng: &mut ChaCha8Rng) -> M {
    let n = rng.gen_range(1..=4usize);
    let mut g = M::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let lo = rng.gen_range(-2..=0i64);
            let span = rng.gen_range(0..=4i64);
            let p = if i == k {
                loop {
                    let p = random_poly(rng, lo, lo + span, 2);
                    if !p.is_zero() && p.circle_clearance() > 0.2 {
                        break p;
                    }
                }
            } else if rng.gen_bool(0.6) {
                random_poly(rng, lo, lo + span, 2)
            } else {
                P::zero()
            };
            g.set(i, k, p);
        }
    }
    g
}

fn criterion_6() -> Verdict {
    let mut ok = 0;
    let mut notes = Vec::new();
    let opts = ScanOptions::default();
    for case in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + case);
        let g = random_symbol(&mut rng);
        let n = g.nrows() as i64;
        let res = (|| {
            let pi = partial_indices(&g, &opts)?;
            let maslov = maslov_index(&g)?;
            let wind = g.determinant()?.winding_number()?;
            Ok::<_, rh_core::error::RhError>((pi, maslov, wind))
        })();
        match res {
            Ok((pi, maslov, wind)) => {
                let sum: i64 = pi.indices.iter().sum();
                let second: Option<i64> =
                    pi.scan.accepted().map(|s| s.second_differences.iter().map(|x| x.1).sum());
                if sum == maslov && maslov == 2 * wind && second == Some(n) {
                    ok += 1;
                } else {
                    notes.push(format!("case {case}: Σκ {sum}, maslov {maslov}, 2·wind {}, second differences {second:?}, N {n}", 2 * wind));
                }
            }
            Err(e) => notes.push(format!("case {case}: {e}")),
        }
    }
    verdict(ok == 50, format!("{ok}/50 symbols consistent{}", if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }))
}

fn criterion_7(jets: &Jets) -> Verdict {
    let bad: Vec<String> =
        jets.iter().filter(|(_, rank, dim)| rank != dim).map(|(l, r, d)| format!("{l}: rank {r}, dim {d}")).collect();
    verdict(
        bad.is_empty() && !jets.is_empty(),
        format!(
            "{} kernel bases from criteria 1-5 (criterion 6 computes indices only){}",
            jets.len(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

fn rm_strategy() -> impl Strategy<Value = (usize, P)> {
    (0..=5usize, proptest::collection::vec((-8i64..=8, -8i64..=8), 1..=7), -3i64..=3).prop_map(|(m, cs, lo)| {
        let w = LaurentPoly::from_terms(
            cs.iter().enumerate().map(|(j, &(a, b))| (lo + j as i64, Cx::new(Rational::from_ratio(a, 3), Rational::from_ratio(b, 3)))),
        );
        (m, symmetrize_rm(&w, m as i64))
    })
}

fn odd_and_real(f: &P) -> bool {
    f.terms().all(|(k, _)| k.rem_euclid(2) == 1) && rm_check_laurent(f, 0, 0.0)
}

fn criterion_8() -> Verdict {
    let config = Config { cases: 200, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let result = runner.run(&rm_strategy(), |(m, v)| {
        let tol = 0.0;
        prop_assert!(rm_check_laurent(&v, m as i64, tol));
        let bv = BoundaryFunction::laurent(v.clone());
        // τ_m round trip, both directions
        let phi = tau_m_inverse(&bv, m, tol).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(tau_m(&phi), bv.clone());
        let value = &LaurentPoly::one_minus_zeta_pow(m) * &v;
        prop_assert!(rm_check_laurent(&value, 0, tol));
        prop_assert_eq!(tau_m_of_laurent(&value, m, tol).map_err(|e| TestCaseError::fail(e.to_string()))?, v.clone());
        // ζ^{m'} shift lands in R_0 or R_1
        let shifted = rm_shift(&bv, m, tol).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(rm_check(&shifted, (m % 2) as i64, tol));
        // odd unfold is real and odd; even orders are rejected
        match rm_odd_unfold(&bv, m, tol) {
            Ok(u) if m % 2 == 1 => prop_assert!(odd_and_real(u.as_laurent().expect("laurent"))),
            Err(_) if m % 2 == 0 => {}
            other => prop_assert!(false, "unexpected unfold result {:?} for m = {}", other.is_ok(), m),
        }
        // a perturbation that breaks the symmetry is rejected
        let broken = &v + &LaurentPoly::monomial(1, Cx::new(Rational::from_int(0), Rational::from_int(1)));
        prop_assert!(!rm_check_laurent(&broken, m as i64, tol) || v.is_zero());
        Ok(())
    });
    match result {
        Ok(()) => verdict(true, "200 seeded R_m elements, m in 0..5: τ_m round trip, shift landing spaces, odd unfold"),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn main() {
    let mut jets: Jets = Vec::new();
    let results = [("1", "example reproduction, exact layer", criterion_1()),
        ("2", "example reproduction, numerical oracle", criterion_2(&mut jets)),
        ("3", "scalar kernel dimension sweep", criterion_3(&mut jets)),
        ("4", "scalar surjectivity boundary", criterion_4(&mut jets)),
        ("5", "pair surjectivity sweep", criterion_5(&mut jets)),
        ("6", "index consistency on random symbols", criterion_6())];
    let seven = criterion_7(&jets);
    let eight = criterion_8();
    let mut all = true;
    for (n, name, v) in results.iter().map(|(n, name, v)| (*n, *name, v)).chain([("7", "jet determination", &seven), ("8", "function space isomorphisms", &eight)]) {
        all &= v.pass;
        println!("criterion {n} ({name}): {} | {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
