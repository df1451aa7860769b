//! The series literal format shared by the CLI and test fixtures.
//!
//! One series:
//!   {"n": 2, "degree": 3, "terms": [{"exp": [1,0], "coeff": "1/2"}, ...]}
//! A system:
//!   {"components": [<series>, ...]}
//!
//! Coefficients are decimal-free rational strings. Emission is stable:
//! object keys sorted, terms in graded-lexicographic exponent order.

use serde_json::{json, Map, Value};

use crate::index::MultiIndex;
use crate::rat::{format_rat, parse_rat};
use crate::series::Series;
use crate::system::SeriesSystem;

/// A parse failure naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(field: &str, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        field: field.to_string(),
        message: message.into(),
    })
}

fn get<'v>(obj: &'v Map<String, Value>, field: &str) -> Result<&'v Value, ParseError> {
    obj.get(field)
        .ok_or_else(|| ParseError {
            field: field.to_string(),
            message: "missing".to_string(),
        })
}

fn as_usize(v: &Value, field: &str) -> Result<usize, ParseError> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| ParseError {
            field: field.to_string(),
            message: "expected a nonnegative integer".to_string(),
        })
}

pub fn series_from_value(v: &Value) -> Result<Series, ParseError> {
    let obj = match v.as_object() {
        Some(o) => o,
        None => return err("series", "expected an object"),
    };
    let n = as_usize(get(obj, "n")?, "n")?;
    if n == 0 {
        return err("n", "must be at least 1");
    }
    let degree = as_usize(get(obj, "degree")?, "degree")? as u32;
    let terms = match get(obj, "terms")?.as_array() {
        Some(a) => a,
        None => return err("terms", "expected an array"),
    };
    let mut s = Series::zero(n, degree);
    for (k, term) in terms.iter().enumerate() {
        let field = format!("terms[{k}]");
        let tobj = match term.as_object() {
            Some(o) => o,
            None => return err(&field, "expected an object"),
        };
        let exp = match get(tobj, "exp")?.as_array() {
            Some(a) => a,
            None => return err(&format!("{field}.exp"), "expected an array"),
        };
        if exp.len() != n {
            return err(
                &format!("{field}.exp"),
                format!("expected {n} exponents, found {}", exp.len()),
            );
        }
        let mut exps = Vec::with_capacity(n);
        for e in exp {
            exps.push(as_usize(e, &format!("{field}.exp"))? as u32);
        }
        let alpha = MultiIndex::new(exps);
        if alpha.degree() > degree {
            return err(
                &format!("{field}.exp"),
                format!("total degree {} exceeds degree {degree}", alpha.degree()),
            );
        }
        let coeff_str = match get(tobj, "coeff")?.as_str() {
            Some(s) => s,
            None => return err(&format!("{field}.coeff"), "expected a rational string"),
        };
        let c = match parse_rat(coeff_str) {
            Ok(c) => c,
            Err(m) => return err(&format!("{field}.coeff"), m),
        };
        let prev = s.coeff(&alpha);
        s.set_coeff(alpha, prev + c);
    }
    Ok(s)
}

pub fn system_from_value(v: &Value) -> Result<SeriesSystem, ParseError> {
    let obj = match v.as_object() {
        Some(o) => o,
        None => return err("system", "expected an object"),
    };
    let comps = match get(obj, "components")?.as_array() {
        Some(a) => a,
        None => return err("components", "expected an array"),
    };
    if comps.is_empty() {
        return err("components", "must be nonempty");
    }
    let mut parsed = Vec::with_capacity(comps.len());
    for (k, c) in comps.iter().enumerate() {
        let s = series_from_value(c).map_err(|e| ParseError {
            field: format!("components[{k}].{}", e.field),
            message: e.message,
        })?;
        parsed.push(s);
    }
    let (n, d) = (parsed[0].n_vars(), parsed[0].trunc_degree());
    for (k, s) in parsed.iter().enumerate() {
        if s.n_vars() != n || s.trunc_degree() != d {
            return err(
                &format!("components[{k}]"),
                "all components must share n and degree",
            );
        }
    }
    Ok(SeriesSystem::new(parsed))
}

pub fn series_to_value(s: &Series) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(a, c)| {
            json!({
                "exp": a.exponents(),
                "coeff": format_rat(c),
            })
        })
        .collect();
    json!({
        "n": s.n_vars(),
        "degree": s.trunc_degree(),
        "terms": terms,
    })
}

pub fn system_to_value(sys: &SeriesSystem) -> Value {
    json!({
        "components": sys.components().iter().map(series_to_value).collect::<Vec<_>>(),
    })
}
