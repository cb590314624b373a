use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rh_core::blocks::{reflect_apply, scalar_kernel_basis, scalar_kernel_dim, scalar_onto, scalar_witness, solve_scalar, twist_apply, Sign};
use rh_core::builtin;
use rh_core::error::RhError;
use rh_core::index::{block_diagonal_part, classify, ConstraintProfile, IndexReport, ScanOptions};
use rh_core::io::{poly_to_terms, rhs_from_json, symbol_from_json, symbol_to_json, BoundaryJson, ConstrainedJson, SymbolJson};
use rh_core::laurent::LaurentPoly;
use rh_core::matrix::SymbolMatrix;
use rh_core::reduce::{block_structure, column_reduce, rotate_to_one, unit_from_angle};
use rh_core::scalar::{Cx, Rational, Real};
use rh_core::spaces::{symmetrize_rm, BoundaryFunction, ConstrainedFunction};
use rh_core::spectral::{assemble_default, kernel_study, max_on_grid, reflect_kernel_dim, solve_ls, KernelStudy, RESIDUAL_SAMPLES};
use serde_json::{json, Value};

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_CIRCLE_SINGULAR: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub stage: Option<&'static str>,
    pub message: String,
}

impl Failure {
    pub fn parse(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, stage: None, message: message.into() }
    }

    pub fn at(mut self, stage: &'static str) -> Self {
        self.stage.get_or_insert(stage);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.message, "stage": self.stage, "exit_code": self.code })
    }
}

impl From<RhError> for Failure {
    fn from(e: RhError) -> Self {
        let code = match &e {
            RhError::Json(_) | RhError::Parse(_) => EXIT_PARSE,
            RhError::Inconclusive(_) => EXIT_INCONCLUSIVE,
            RhError::SingularOnCircle { .. } | RhError::UnsupportedSingularity(_) => EXIT_CIRCLE_SINGULAR,
            _ => EXIT_FAILED,
        };
        Self { code, stage: None, message: e.to_string() }
    }
}

type Outcome<T> = Result<T, Failure>;

fn stage<T>(name: &'static str, r: rh_core::error::Result<T>) -> Outcome<T> {
    r.map_err(|e| Failure::from(e).at(name))
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub tolerance: f64,
    pub truncation: usize,
    pub seed: u64,
    pub profile: Option<ConstraintProfile>,
    pub reduce: bool,
    pub rotate: Option<f64>,
}

impl Settings {
    fn scan(&self) -> ScanOptions {
        ScanOptions { rel_tol: self.tolerance, ..ScanOptions::default() }
    }

    fn degrees(&self) -> [usize; 2] {
        [self.truncation, 2 * self.truncation]
    }

    fn to_json(&self) -> Value {
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "tolerance": self.tolerance,
            "truncation": self.truncation,
            "oracle_truncations": self.degrees(),
            "mode_count": "max(2*truncation, bandwidth)",
            "toeplitz_sizes": self.scan().sizes,
            "samples": RESIDUAL_SAMPLES,
            "seed": self.seed,
            "rotate": self.rotate,
            "reduce": self.reduce,
        })
    }
}

pub struct Input {
    pub name: String,
    pub g: SymbolMatrix<Rational>,
    pub profile: Option<ConstraintProfile>,
}

pub fn read_text(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

/// `@name` selects a built-in symbol; anything else is a symbol file.
pub fn load_symbol(source: &str) -> Outcome<Input> {
    if source.starts_with('@') {
        let (g, profile) = builtin::lookup::<Rational>(source).ok_or_else(|| {
            Failure::parse(format!("unknown built-in `{source}`; available: {}", builtin::NAMES.join(", ")))
        })?;
        return Ok(Input { name: source.to_string(), g, profile });
    }
    let text = read_text(Path::new(source))?;
    let g = symbol_from_json::<Rational>(&text).map_err(|e| Failure::parse(format!("{source}: {e}")))?;
    Ok(Input { name: source.to_string(), g, profile: None })
}

/// Symbol and profile after optional rotation and reduction.
struct Prepared {
    g: SymbolMatrix<Rational>,
    profile: ConstraintProfile,
    reduction: Option<Value>,
}

fn rotated(input: &Input, settings: &Settings) -> SymbolMatrix<Rational> {
    match settings.rotate {
        Some(theta) => rotate_to_one(&input.g, &unit_from_angle::<Rational>(theta)),
        None => input.g.clone(),
    }
}

fn reduce_stage(g: &SymbolMatrix<Rational>, settings: &Settings) -> Outcome<Prepared> {
    let red = stage("reduce", column_reduce(g))?;
    let profile = stage("blocks", block_structure(&red.g, &red.orders))?;
    if let Some(p) = &settings.profile {
        if p != &profile {
            return Err(Failure::from(RhError::BlockStructure(format!(
                "requested profile {p} differs from the reduction's {profile}"
            )))
            .at("blocks"));
        }
    }
    let summary = stage("reduce", red.summary())?;
    let reduction = json!({
        "orders": summary.orders,
        "det_order": summary.det_order,
        "det_winding": summary.det_winding,
        "profile": profile.to_string(),
        "blocks": profile.blocks,
        "rotation": settings.rotate,
        "reduced_symbol": SymbolJson::from_symbol(&red.g),
    });
    Ok(Prepared { g: red.g, profile, reduction: Some(reduction) })
}

fn prepare(input: &Input, settings: &Settings, reduce: bool) -> Outcome<Prepared> {
    let g = rotated(input, settings);
    if reduce {
        return reduce_stage(&g, settings);
    }
    let profile = settings
        .profile
        .clone()
        .or_else(|| input.profile.clone())
        .unwrap_or_else(|| ConstraintProfile::unconstrained(g.nrows()));
    stage("input", profile.check_dimension(g.nrows()))?;
    Ok(Prepared { g, profile, reduction: None })
}

pub fn reduce(input: &Input, settings: &Settings) -> Outcome<Value> {
    let prepared = reduce_stage(&rotated(input, settings), settings)?;
    Ok(json!({
        "input": input.name,
        "settings": settings.to_json(),
        "reduction": prepared.reduction,
    }))
}

fn report_json(report: &IndexReport) -> Value {
    serde_json::to_value(report).expect("report serializes")
}

pub fn analyze(input: &Input, settings: &Settings) -> Outcome<Value> {
    let prepared = prepare(input, settings, settings.reduce)?;
    let report = stage("classify", classify(&prepared.g, &prepared.profile, &settings.scan()))?;
    Ok(json!({
        "input": input.name,
        "settings": settings.to_json(),
        "reduction": prepared.reduction,
        "report": report_json(&report),
    }))
}

fn study_json(study: &KernelStudy) -> Value {
    json!({
        "dimensions": study.kernels.iter().map(|k| json!({
            "truncation": k.degree,
            "space": k.space,
            "dimension": k.dimension,
            "gap_ratio": k.rank.gap_ratio,
            "ill_separated": k.rank.ill_separated,
            "max_basis_residual": k.residuals.iter().copied().fold(0.0, f64::max),
        })).collect::<Vec<_>>(),
        "stable": study.stable,
        "dimension": study.dimension(),
        "min_gap_ratio": study.min_gap_ratio(),
    })
}

/// Full run: reduction, block structure, classification and the numerical cross-check.
/// Returns the report and its exit code.
pub fn pipeline(input: &Input, settings: &Settings) -> Outcome<(Value, i32)> {
    let prepared = reduce_stage(&rotated(input, settings), settings)?;
    let report = stage("classify", classify(&prepared.g, &prepared.profile, &settings.scan()))?;
    let well_defined = report.diagnostics.well_defined;
    let operator = if well_defined { prepared.g.clone() } else { block_diagonal_part(&prepared.g, &prepared.profile) };
    let study = stage("oracle", kernel_study(&operator, &prepared.profile, &settings.degrees(), settings.tolerance))?;
    let full = if well_defined {
        Value::Null
    } else {
        let s = stage("oracle", kernel_study(&prepared.g, &prepared.profile, &settings.degrees(), settings.tolerance))?;
        json!({
            "note": "the symbol does not map the constrained domain into the constrained target; \
                     the oracle checks the block-diagonal part, the full operator is reported here",
            "violations": report.diagnostics.violations,
            "study": study_json(&s),
        })
    };
    let consistent = report.diagnostics.sum_matches_maslov
        && report.diagnostics.second_differences_nonnegative
        && report.diagnostics.second_differences_sum_to_n;
    let (oracle_status, code) = match (report.kernel_dim, study.dimension()) {
        (_, None) => ("INCONCLUSIVE", EXIT_INCONCLUSIVE),
        (None, Some(_)) => ("NOT_APPLICABLE", 0),
        (Some(d), Some(o)) if d == o && study.min_gap_ratio() > 10.0 => ("PASS", 0),
        _ => ("FAIL", EXIT_FAILED),
    };
    let (verdict, code) = if consistent { (oracle_status, code) } else { ("FAIL", EXIT_FAILED) };
    let value = json!({
        "input": input.name,
        "settings": settings.to_json(),
        "reduction": prepared.reduction,
        "report": report_json(&report),
        "oracle": {
            "operator": if well_defined { "symbol" } else { "block_diagonal_part" },
            "formula_dimension": report.kernel_dim,
            "study": study_json(&study),
            "status": oracle_status,
        },
        "full_symbol": full,
        "verdict": verdict,
    });
    Ok((value, code))
}

fn float_terms(p: &LaurentPoly<f64>, tol: f64) -> Vec<Value> {
    let scale = p.max_abs_coeff().max(1.0);
    p.terms()
        .filter(|(_, c)| c.norm() > tol * scale)
        .map(|(k, c)| json!({ "k": k, "re": c.re, "im": c.im }))
        .collect()
}

pub fn solve(input: &Input, rhs: &Path, settings: &Settings) -> Outcome<Value> {
    let prepared = prepare(input, settings, settings.reduce)?;
    let text = read_text(rhs)?;
    let phi: Vec<ConstrainedFunction<Rational>> =
        rhs_from_json(&text).map_err(|e| Failure::from(e).at("rhs"))?;
    let sys = stage("assemble", assemble_default(&prepared.g, &prepared.profile, settings.truncation))?;
    let sol = stage("solve", solve_ls(&sys, &phi, settings.tolerance))?;
    let functions = sol.functions(&sys.orders);
    Ok(json!({
        "input": input.name,
        "settings": settings.to_json(),
        "reduction": prepared.reduction,
        "profile": prepared.profile.to_string(),
        "space": sol.space,
        "truncation": sol.degree,
        "modes": sol.modes,
        "residual": sol.residual,
        "samples": sol.samples,
        "rank": sol.rank,
        "cofactors": sol.coefficients.iter().map(|c| c.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "solution": functions.iter().map(|f| float_terms(f, 1e-14)).collect::<Vec<_>>(),
    }))
}

pub fn kernel(input: &Input, settings: &Settings) -> Outcome<Value> {
    let prepared = prepare(input, settings, settings.reduce)?;
    let study = stage("oracle", kernel_study(&prepared.g, &prepared.profile, &settings.degrees(), settings.tolerance))?;
    let formula = match classify(&prepared.g, &prepared.profile, &settings.scan()) {
        Ok(r) => json!({ "kernel_dim": r.kernel_dim, "onto": r.onto, "partial_indices": r.partial_indices }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let first = &study.kernels[0];
    Ok(json!({
        "input": input.name,
        "settings": settings.to_json(),
        "reduction": prepared.reduction,
        "profile": prepared.profile.to_string(),
        "dimension": study.dimension(),
        "study": study_json(&study),
        "formula": formula,
        "basis_truncation": first.degree,
        "basis": first.basis.iter().map(|f| f.iter().map(|p| float_terms(p, 1e-12)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "basis_residuals": first.residuals,
    }))
}

pub fn scalar(sign: Sign, l: i64, m: usize, settings: &Settings) -> Value {
    let basis = scalar_kernel_basis::<Rational>(sign, l, m);
    let checks = basis.iter().all(|f| reflect_apply(sign, l, f).is_zero() && f.vanishing_order_at_one().is_some_and(|o| o >= m));
    let numerical = reflect_kernel_dim(sign, l, m, settings.truncation);
    let dim = scalar_kernel_dim(l, m);
    json!({
        "settings": settings.to_json(),
        "sign": if sign == Sign::Plus { "+" } else { "-" },
        "l": l,
        "m": m,
        "kernel_dim": dim,
        "basis": basis.iter().map(poly_to_terms).collect::<Vec<_>>(),
        "basis_verified": checks,
        "numerical_kernel_dim": numerical.nullity,
        "numerical_gap_ratio": numerical.gap_ratio,
        "agree": numerical.nullity == dim,
    })
}

pub fn solve_scalar_cmd(r: i64, rhs: &Path, settings: &Settings) -> Outcome<(Value, i32)> {
    let text = read_text(rhs)?;
    let parsed: ConstrainedJson = serde_json::from_str(&text).map_err(|e| Failure::from(RhError::from(e)))?;
    let phi: ConstrainedFunction<Rational> = stage("rhs", parsed.to_function())?;
    let m = phi.m;
    if !scalar_onto(r, m) {
        let witness = scalar_witness::<Rational>(r, m).map(|w| poly_to_terms(&w));
        let value = json!({
            "settings": settings.to_json(),
            "r": r,
            "m": m,
            "onto": false,
            "witness_cofactor": witness,
            "error": format!("2r - m = {} < -1: the operator is not onto", 2 * r - m as i64),
        });
        return Ok((value, EXIT_FAILED));
    }
    let f = stage("solve", solve_scalar(r, &phi, settings.tolerance))?;
    let fl = f.to_laurent_f64();
    let target = &LaurentPoly::one_minus_zeta_pow(m) * &phi.core.to_laurent_f64();
    let residual = max_on_grid(&[&twist_apply(r, &fl) - &target], RESIDUAL_SAMPLES);
    let value = json!({
        "settings": settings.to_json(),
        "r": r,
        "m": m,
        "onto": true,
        "solution": BoundaryJson::from_function(&f),
        "residual": residual,
        "samples": RESIDUAL_SAMPLES,
    });
    Ok((value, 0))
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn random_rhs(rng: &mut ChaCha8Rng, orders: &[usize]) -> Vec<ConstrainedFunction<Rational>> {
    orders
        .iter()
        .map(|&m| {
            let terms: Vec<(i64, Cx<Rational>)> = (-3..=3)
                .map(|k| {
                    let re = Rational::from_ratio(rng.gen_range(-8..=8), 4);
                    let im = Rational::from_ratio(rng.gen_range(-8..=8), 4);
                    (k, Cx::new(re, im))
                })
                .collect();
            let v = symmetrize_rm(&LaurentPoly::from_terms(terms), m as i64);
            ConstrainedFunction { m, core: BoundaryFunction::laurent(v) }
        })
        .collect()
}

/// Built-in consistency checks; the seed drives the random right-hand sides.
pub fn selftest(settings: &Settings) -> (Value, i32) {
    let mut checks = Vec::new();
    let pipe = load_symbol("@example-gprime").and_then(|i| pipeline(&i, settings));
    checks.push(match pipe {
        Ok((v, code)) => {
            let orders = &v["reduction"]["orders"];
            let pi = &v["report"]["partial_indices"];
            let pass = code == 0
                && orders == &json!([0, 2, 2, 0])
                && pi == &json!([0, 1, 1, 4])
                && v["report"]["kernel_dim"] == json!(6)
                && v["verdict"] == json!("PASS");
            Check { name: "builtin pipeline", pass, detail: format!("orders {orders}, indices {pi}, verdict {}", v["verdict"]) }
        }
        Err(e) => Check { name: "builtin pipeline", pass: false, detail: e.message },
    });
    let round_trip = builtin::NAMES.iter().all(|n| {
        let (g, _) = builtin::lookup::<Rational>(n).expect("built-in");
        let text = symbol_to_json(&g);
        symbol_from_json::<Rational>(&text).is_ok_and(|h| h == g && symbol_to_json(&h) == text)
    });
    checks.push(Check { name: "symbol round trip", pass: round_trip, detail: format!("{} built-ins", builtin::NAMES.len()) });
    let mut mismatches = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        for l in -2..=6 {
            for m in 0..=4usize {
                let n = reflect_kernel_dim(sign, l, m, 16).nullity;
                if n != scalar_kernel_dim(l, m) {
                    mismatches.push(format!("{sign:?} l={l} m={m}: {n}"));
                }
            }
        }
    }
    checks.push(Check {
        name: "scalar kernel dimensions",
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() { "90 cases".into() } else { mismatches.join("; ") },
    });
    let gt = builtin::example_gtilde::<Rational>();
    let profile = builtin::example_profile();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let worst = assemble_default(&gt, &profile, settings.truncation).and_then(|sys| {
        (0..5).try_fold(0.0f64, |acc, _| {
            let phi = random_rhs(&mut rng, &profile.orders());
            Ok(acc.max(solve_ls(&sys, &phi, settings.tolerance)?.residual))
        })
    });
    checks.push(match worst {
        Ok(w) => Check { name: "random right-hand sides", pass: w < 1e-8, detail: format!("max residual {w:.3e}") },
        Err(e) => Check { name: "random right-hand sides", pass: false, detail: e.to_string() },
    });
    let all = checks.iter().all(|c| c.pass);
    let value = json!({
        "settings": settings.to_json(),
        "checks": checks.iter().map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail })).collect::<Vec<_>>(),
        "all_pass": all,
    });
    (value, if all { 0 } else { EXIT_FAILED })
}
