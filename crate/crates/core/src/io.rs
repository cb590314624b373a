//! JSON formats for symbols and boundary functions.
//!
//! Symbol:
//! `{"n": N, "entries": [[{"terms": [{"k": 1, "re": "1/2", "im": "0/1"}]}, ...], ...]}`.
//! Coefficients are exact rationals written `p/q`; floating coefficients are
//! written through their exact binary value, so every field round-trips bit-exactly.
//!
//! Boundary function: `{"kind": "laurent", "terms": [...]}` or
//! `{"kind": "sampled", "p": 6, "values": [re0, im0, re1, im1, ...]}`.
//! A constrained right-hand side adds `"m"` and stores its cofactor `v`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RhError};
use crate::laurent::LaurentPoly;
use crate::matrix::SymbolMatrix;
use crate::scalar::{rational_from_str, rational_to_string, Cx, Real};
use crate::spaces::{BoundaryFunction, ConstrainedFunction, Regularity, Representation, SampledGrid};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub k: i64,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolJson {
    pub n: usize,
    pub entries: Vec<Vec<EntryJson>>,
}

fn parse_rational<F: Real>(s: &str, at: &str) -> Result<F> {
    rational_from_str(s)
        .map(|r| F::from_rational(&r))
        .ok_or_else(|| RhError::Parse(format!("{at}: `{s}` is not a rational of the form p/q")))
}

pub fn poly_to_terms<F: Real>(p: &LaurentPoly<F>) -> Vec<TermJson> {
    p.terms()
        .map(|(k, c)| TermJson {
            k,
            re: rational_to_string(&c.re.to_rational()),
            im: rational_to_string(&c.im.to_rational()),
        })
        .collect()
}

pub fn poly_from_terms<F: Real>(terms: &[TermJson], at: &str) -> Result<LaurentPoly<F>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        if !seen.insert(t.k) {
            return Err(RhError::Parse(format!("{at}: exponent {} appears twice", t.k)));
        }
        let here = format!("{at}, term k={}", t.k);
        out.push((t.k, Cx::new(parse_rational(&t.re, &here)?, parse_rational(&t.im, &here)?)));
    }
    Ok(LaurentPoly::from_terms(out))
}

impl SymbolJson {
    pub fn from_symbol<F: Real>(g: &SymbolMatrix<F>) -> Self {
        let entries = (0..g.nrows())
            .map(|i| (0..g.ncols()).map(|j| EntryJson { terms: poly_to_terms(g.get(i, j)) }).collect())
            .collect();
        Self { n: g.nrows(), entries }
    }

    pub fn to_symbol<F: Real>(&self) -> Result<SymbolMatrix<F>> {
        if self.entries.len() != self.n || self.entries.iter().any(|r| r.len() != self.n) {
            return Err(RhError::Parse(format!("\"entries\" must be a {0}x{0} array", self.n)));
        }
        let rows = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, e)| poly_from_terms(&e.terms, &format!("entry ({i},{j})")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SymbolMatrix::from_rows(rows)
    }
}

pub fn symbol_to_json<F: Real>(g: &SymbolMatrix<F>) -> String {
    serde_json::to_string_pretty(&SymbolJson::from_symbol(g)).expect("symbol serializes")
}

/// Parses a symbol file; syntax errors carry line and column.
pub fn symbol_from_json<F: Real>(text: &str) -> Result<SymbolMatrix<F>> {
    let parsed: SymbolJson = serde_json::from_str(text)?;
    parsed.to_symbol()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionJson {
    Laurent {
        terms: Vec<TermJson>,
    },
    Sampled {
        p: u32,
        /// Interleaved real and imaginary parts.
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryJson {
    #[serde(flatten)]
    pub function: FunctionJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<Regularity>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedJson {
    pub m: usize,
    #[serde(flatten)]
    pub cofactor: BoundaryJson,
}

impl BoundaryJson {
    pub fn from_function<F: Real>(f: &BoundaryFunction<F>) -> Self {
        let function = match &f.repr {
            Representation::Laurent(p) => FunctionJson::Laurent { terms: poly_to_terms(p) },
            Representation::Sampled(g) => {
                FunctionJson::Sampled { p: g.p, values: g.values.iter().flat_map(|z| [z.re, z.im]).collect() }
            }
        };
        let regularity = (f.regularity != Regularity::default()).then_some(f.regularity);
        Self { function, regularity }
    }

    pub fn to_function<F: Real>(&self) -> Result<BoundaryFunction<F>> {
        let f = match &self.function {
            FunctionJson::Laurent { terms } => BoundaryFunction::laurent(poly_from_terms(terms, "function")?),
            FunctionJson::Sampled { p, values } => {
                let expected = 2usize.checked_shl(*p).unwrap_or(0);
                if *p > 24 || values.len() != expected {
                    return Err(RhError::Parse(format!(
                        "sampled function with p={p} needs {expected} interleaved values, found {}",
                        values.len()
                    )));
                }
                let values = values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
                BoundaryFunction::sampled(SampledGrid { p: *p, values })
            }
        };
        Ok(match self.regularity {
            Some(r) => f.with_regularity(r),
            None => f,
        })
    }
}

pub fn function_to_json<F: Real>(f: &BoundaryFunction<F>) -> String {
    serde_json::to_string_pretty(&BoundaryJson::from_function(f)).expect("function serializes")
}

pub fn function_from_json<F: Real>(text: &str) -> Result<BoundaryFunction<F>> {
    serde_json::from_str::<BoundaryJson>(text)?.to_function()
}

impl ConstrainedJson {
    pub fn from_function<F: Real>(f: &ConstrainedFunction<F>) -> Self {
        Self { m: f.m, cofactor: BoundaryJson::from_function(&f.core) }
    }

    pub fn to_function<F: Real>(&self) -> Result<ConstrainedFunction<F>> {
        Ok(ConstrainedFunction { m: self.m, core: self.cofactor.to_function()? })
    }
}

/// Right-hand sides: a single constrained function or an array of them.
pub fn rhs_from_json<F: Real>(text: &str) -> Result<Vec<ConstrainedFunction<F>>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<ConstrainedJson>),
        One(ConstrainedJson),
    }
    let value: serde_json::Value = serde_json::from_str(text)?;
    let parsed: OneOrMany = serde_json::from_value(value)
        .map_err(|e| RhError::Parse(format!("right-hand side: {e}")))?;
    match parsed {
        OneOrMany::Many(v) => v.iter().map(ConstrainedJson::to_function).collect(),
        OneOrMany::One(c) => Ok(vec![c.to_function()?]),
    }
}

pub fn rhs_to_json<F: Real>(phi: &[ConstrainedFunction<F>]) -> String {
    let v: Vec<ConstrainedJson> = phi.iter().map(ConstrainedJson::from_function).collect();
    serde_json::to_string_pretty(&v).expect("rhs serializes")
}
