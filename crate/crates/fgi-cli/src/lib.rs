//! Batch front end: parse a job, dispatch to the library, emit exact
//! results deterministically.
//!
//! Exit statuses: 0 ok, 2 parse error, 3 math-domain error, 4 resource
//! guard. Rationals are always serialized as canonical `p/q` strings;
//! JSON output has sorted keys and graded-sorted exponents, so identical
//! inputs produce byte-identical output.

use mps_core::json::{series_to_value, system_from_value, system_to_value, ParseError};
use mps_core::rat::{format_rat, parse_rat};
use mps_core::{MultiIndex, SeriesSystem};
use serde_json::{json, Map, Value};

pub const STATUS_PARSE: i32 = 2;
pub const STATUS_DOMAIN: i32 = 3;
pub const STATUS_RESOURCE: i32 = 4;

/// Hard ceilings keeping untrusted inputs from wedging the process.
pub const MAX_VARS: usize = 6;
pub const MAX_DEGREE: u32 = 8;
pub const MAX_WICK_LEGS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Compose,
    Revert,
    LgSolve,
    LgCheck,
    ZwCheck,
    Diagrams,
    Wick,
    LgMatrixCheck,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "compose" => Command::Compose,
            "revert" => Command::Revert,
            "lg-solve" => Command::LgSolve,
            "lg-check" => Command::LgCheck,
            "zw-check" => Command::ZwCheck,
            "diagrams" => Command::Diagrams,
            "wick" => Command::Wick,
            "lg-matrix-check" => Command::LgMatrixCheck,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Composition,
    Reversion,
    LagrangeGood,
}

impl Flavor {
    pub fn parse(s: &str) -> Option<Flavor> {
        Some(match s {
            "composition" => Flavor::Composition,
            "reversion" => Flavor::Reversion,
            "lagrange-good" => Flavor::LagrangeGood,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramKind {
    Trees,
    Circuits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutFormat {
    Json,
    Table,
}

#[derive(Debug, Clone)]
pub struct JobSpec {
    pub command: Command,
    pub payload: Value,
    pub degree: Option<u32>,
    pub flavor: Option<Flavor>,
    pub bound: Option<u32>,
    pub kind: DiagramKind,
    pub out_format: OutFormat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub status: i32,
    pub message: String,
}

impl CliError {
    fn parse(msg: impl Into<String>) -> CliError {
        CliError {
            status: STATUS_PARSE,
            message: msg.into(),
        }
    }

    fn resource(msg: impl Into<String>) -> CliError {
        CliError {
            status: STATUS_RESOURCE,
            message: msg.into(),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::parse(e.to_string())
    }
}

impl From<inversion::InversionError> for CliError {
    fn from(e: inversion::InversionError) -> Self {
        let status = match &e {
            inversion::InversionError::ResourceGuard(_) => STATUS_RESOURCE,
            inversion::InversionError::Diagram(diagrams::DiagramError::GroundSetTooLarge {
                ..
            }) => STATUS_RESOURCE,
            _ => STATUS_DOMAIN,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

impl From<mps_core::CoreError> for CliError {
    fn from(e: mps_core::CoreError) -> Self {
        CliError {
            status: STATUS_DOMAIN,
            message: e.to_string(),
        }
    }
}

impl From<wick::WickError> for CliError {
    fn from(e: wick::WickError) -> Self {
        CliError {
            status: STATUS_DOMAIN,
            message: e.to_string(),
        }
    }
}

/// Parse raw payload text; malformed JSON is a parse error (status 2).
pub fn parse_payload(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::parse(format!("invalid JSON payload: {e}")))
}

fn payload_object(payload: &Value) -> Result<&Map<String, Value>, CliError> {
    payload
        .as_object()
        .ok_or_else(|| CliError::parse("field `payload`: expected a JSON object"))
}

fn field<'v>(obj: &'v Map<String, Value>, name: &str) -> Result<&'v Value, CliError> {
    obj.get(name)
        .ok_or_else(|| CliError::parse(format!("field `{name}`: missing")))
}

fn parse_system_guarded(v: &Value, name: &str) -> Result<SeriesSystem, CliError> {
    let sys = system_from_value(v).map_err(|e| {
        CliError::parse(format!("field `{name}.{}`: {}", e.field, e.message))
    })?;
    if sys.n_vars() > MAX_VARS {
        return Err(CliError::resource(format!(
            "field `{name}`: {} variables exceeds the limit of {MAX_VARS}",
            sys.n_vars()
        )));
    }
    if sys.trunc_degree() > MAX_DEGREE {
        return Err(CliError::resource(format!(
            "field `{name}`: degree {} exceeds the limit of {MAX_DEGREE}",
            sys.trunc_degree()
        )));
    }
    Ok(sys)
}

fn parse_index_vec(v: &Value, name: &str, n: usize) -> Result<MultiIndex, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CliError::parse(format!("field `{name}`: expected an array")))?;
    if arr.len() != n {
        return Err(CliError::parse(format!(
            "field `{name}`: expected {n} entries, found {}",
            arr.len()
        )));
    }
    let mut exps = Vec::with_capacity(n);
    for e in arr {
        let u = e
            .as_u64()
            .ok_or_else(|| CliError::parse(format!("field `{name}`: expected nonnegative integers")))?;
        if u > MAX_WICK_LEGS as u64 {
            return Err(CliError::resource(format!(
                "field `{name}`: exponent {u} exceeds the limit of {MAX_WICK_LEGS}"
            )));
        }
        exps.push(u as u32);
    }
    Ok(MultiIndex::new(exps))
}

fn effective_degree(spec: &JobSpec, default: u32) -> Result<u32, CliError> {
    let d = spec.degree.unwrap_or(default);
    if d < 1 {
        return Err(CliError::parse("field `degree`: must be at least 1"));
    }
    if d > MAX_DEGREE {
        return Err(CliError::resource(format!(
            "field `degree`: {d} exceeds the limit of {MAX_DEGREE}"
        )));
    }
    Ok(d)
}

/// Run one job; on success the output document (JSON or table text).
pub fn run(spec: &JobSpec) -> Result<String, CliError> {
    let doc = match spec.command {
        Command::Compose => run_compose(spec)?,
        Command::Revert => run_revert(spec)?,
        Command::LgSolve => run_lg_solve(spec)?,
        Command::LgCheck => run_lg_check(spec)?,
        Command::ZwCheck => run_zw_check(spec)?,
        Command::Diagrams => run_diagrams(spec)?,
        Command::Wick => run_wick(spec)?,
        Command::LgMatrixCheck => run_lg_matrix_check(spec)?,
    };
    Ok(match spec.out_format {
        OutFormat::Json => {
            let mut s = serde_json::to_string_pretty(&doc).expect("value serializes");
            s.push('\n');
            s
        }
        OutFormat::Table => render_table(&doc),
    })
}

fn result_doc(result: Value, diagnostics: Value) -> Value {
    json!({ "result": result, "diagnostics": diagnostics })
}

fn run_compose(spec: &JobSpec) -> Result<Value, CliError> {
    let obj = payload_object(&spec.payload)?;
    let f = parse_system_guarded(field(obj, "F")?, "F")?;
    let g = parse_system_guarded(field(obj, "G")?, "G")?;
    let d = effective_degree(spec, f.trunc_degree().min(g.trunc_degree()))?;
    if f.trunc_degree() < d || g.trunc_degree() < d {
        return Err(CliError {
            status: STATUS_DOMAIN,
            message: format!("truncation degree insufficient for degree {d}"),
        });
    }
    let f = f.truncated_to(d);
    let g = g.truncated_to(d);
    let diagrammatic = inversion::compose_diagrammatic(&f, &g)?;
    let direct = mps_core::compose_direct(&f, &g)?;
    let agree = diagrammatic == direct;
    Ok(result_doc(
        system_to_value(&diagrammatic),
        json!({
            "degree": d,
            "routes_agree": agree,
            "classes_per_degree": (1..=d)
                .map(|k| diagrams::enumerate_composition_classes(k).len())
                .collect::<Vec<_>>(),
        }),
    ))
}

fn run_revert(spec: &JobSpec) -> Result<Value, CliError> {
    let obj = payload_object(&spec.payload)?;
    let f = parse_system_guarded(field(obj, "F")?, "F")?;
    if f.n_components() != f.n_vars() {
        return Err(CliError::parse("field `F`: system must be square"));
    }
    let d = effective_degree(spec, f.trunc_degree())?;
    let result = inversion::revert(&f, d)?;
    let diags: Vec<Value> = result
        .diagnostics
        .iter()
        .map(|dd| {
            json!({
                "degree": dd.degree,
                "classes": dd.class_count,
                "aut_sum": dd.aut_sum.to_string(),
            })
        })
        .collect();
    Ok(result_doc(
        system_to_value(&result.series),
        json!({ "degree": d, "per_degree": diags }),
    ))
}

fn run_lg_solve(spec: &JobSpec) -> Result<Value, CliError> {
    let obj = payload_object(&spec.payload)?;
    let g = parse_system_guarded(field(obj, "G")?, "G")?;
    if g.n_components() != g.n_vars() {
        return Err(CliError::parse("field `G`: system must be square"));
    }
    let d = effective_degree(spec, g.trunc_degree())?;
    let f = inversion::lg_solve(&g, d)?;
    let trees = diagrams::enumerate_lg_trees(d);
    let per_degree: Vec<Value> = (1..=d)
        .map(|deg| {
            let of_deg: Vec<_> = trees.iter().filter(|t| t.node_count() == deg).collect();
            json!({
                "degree": deg,
                "classes": of_deg.len(),
                "aut_sum": of_deg
                    .iter()
                    .map(|t| diagrams::aut_order_lg_tree(t))
                    .sum::<u128>()
                    .to_string(),
            })
        })
        .collect();
    Ok(result_doc(
        system_to_value(&f),
        json!({ "degree": d, "per_degree": per_degree }),
    ))
}

fn run_lg_check(spec: &JobSpec) -> Result<Value, CliError> {
    let obj = payload_object(&spec.payload)?;
    let g = parse_system_guarded(field(obj, "G")?, "G")?;
    let n = g.n_vars();
    let omega = parse_index_vec(field(obj, "omega")?, "omega", n)?;
    let m_index = parse_index_vec(field(obj, "m_index")?, "m_index", n)?;
    if m_index.degree() > MAX_DEGREE {
        return Err(CliError::resource("m_index degree exceeds the limit".to_string()));
    }
    let report = inversion::lg_identity_check(&g, &omega, &m_index)?;
    Ok(result_doc(
        json!({
            "holds": report.holds,
            "lhs": format_rat(&report.lhs),
            "rhs": format_rat(&report.rhs),
        }),
        json!({ "omega": omega.exponents(), "m_index": m_index.exponents() }),
    ))
}

fn run_zw_check(spec: &JobSpec) -> Result<Value, CliError> {
    let obj = payload_object(&spec.payload)?;
    let f = parse_system_guarded(field(obj, "F")?, "F")?;
    if f.n_components() != f.n_vars() {
        return Err(CliError::parse("field `F`: system must be square"));
    }
    let d = effective_degree(spec, f.trunc_degree().saturating_sub(1).max(1))?;
    let w = inversion::free_energy_w(&f, d)?;
    let z = inversion::partition_function_z(&f, d)?;
    let z_wick = inversion::partition_function_z_wick(&f, d)?;
    let log_matches = z.log().map(|l| l == w).unwrap_or(false);
    Ok(result_doc(
        json!({
            "W": series_to_value(&w),
            "Z": series_to_value(&z),
        }),
        json!({
            "degree": d,
            "diagram_equals_wick": z == z_wick,
            "log_z_equals_w": log_matches,
        }),
    ))
}

fn run_diagrams(spec: &JobSpec) -> Result<Value, CliError> {
    let flavor = spec
        .flavor
        .ok_or_else(|| CliError::parse("field `flavor`: missing"))?;
    let bound = spec
        .bound
        .or(spec.degree)
        .ok_or_else(|| CliError::parse("field `bound`: missing"))?;
    if bound < 1 {
        return Err(CliError::parse("field `bound`: must be at least 1"));
    }
    if bound > MAX_DEGREE {
        return Err(CliError::resource(format!(
            "field `bound`: {bound} exceeds the limit of {MAX_DEGREE}"
        )));
    }
    let rows: Vec<Value> = match (flavor, spec.kind) {
        (Flavor::Composition, _) => (1..=bound)
            .flat_map(diagrams::enumerate_composition_classes)
            .map(|c| {
                json!({
                    "class": c.encode(),
                    "aut": diagrams::aut_order_composition(&c).to_string(),
                    "degree": c.degree(),
                })
            })
            .collect(),
        (Flavor::Reversion, DiagramKind::Trees) => diagrams::enumerate_reversion_trees(bound)
            .into_iter()
            .map(|t| {
                json!({
                    "class": t.encode(),
                    "aut": diagrams::aut_order_tree(&t).to_string(),
                    "degree": t.y_leaves(),
                })
            })
            .collect(),
        (Flavor::Reversion, DiagramKind::Circuits) => {
            diagrams::enumerate_rev_circuits(bound, &[])
                .into_iter()
                .map(|c| {
                    json!({
                        "class": c.encode(),
                        "aut": diagrams::aut_order_rev_circuit(&c).to_string(),
                        "degree": c.y_degree(),
                    })
                })
                .collect()
        }
        (Flavor::LagrangeGood, DiagramKind::Trees) => diagrams::enumerate_lg_trees(bound)
            .into_iter()
            .map(|t| {
                json!({
                    "class": t.encode(),
                    "aut": diagrams::aut_order_lg_tree(&t).to_string(),
                    "degree": t.node_count(),
                })
            })
            .collect(),
        (Flavor::LagrangeGood, DiagramKind::Circuits) => diagrams::enumerate_lg_circuits(bound)
            .into_iter()
            .map(|c| {
                json!({
                    "class": c.encode(),
                    "aut": diagrams::aut_order_lg_circuit(&c).to_string(),
                    "degree": c.degree(),
                })
            })
            .collect(),
    };
    Ok(Value::Array(rows))
}

fn run_wick(spec: &JobSpec) -> Result<Value, CliError> {
    let obj = payload_object(&spec.payload)?;
    let a_val = field(obj, "A")?
        .as_array()
        .ok_or_else(|| CliError::parse("field `A`: expected a matrix"))?;
    let n = a_val.len();
    if n == 0 {
        return Err(CliError::parse("field `A`: must be nonempty"));
    }
    if n > MAX_VARS {
        return Err(CliError::resource(format!(
            "field `A`: size {n} exceeds the limit of {MAX_VARS}"
        )));
    }
    let mut a = Vec::with_capacity(n);
    for (i, row) in a_val.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| CliError::parse(format!("field `A[{i}]`: expected a row")))?;
        if row.len() != n {
            return Err(CliError::parse(format!("field `A[{i}]`: expected {n} entries")));
        }
        let mut out_row = Vec::with_capacity(n);
        for (j, e) in row.iter().enumerate() {
            let r = match e {
                Value::Number(num) => num
                    .as_i64()
                    .map(mps_core::rat::rat_int)
                    .ok_or_else(|| CliError::parse(format!("field `A[{i}][{j}]`: expected an integer or rational string"))),
                Value::String(s) => parse_rat(s)
                    .map_err(|m| CliError::parse(format!("field `A[{i}][{j}]`: {m}"))),
                _ => Err(CliError::parse(format!(
                    "field `A[{i}][{j}]`: expected an integer or rational string"
                ))),
            }?;
            out_row.push(r);
        }
        a.push(out_row);
    }
    let alpha1 = parse_index_vec(field(obj, "alpha1")?, "alpha1", n)?;
    let alpha2 = parse_index_vec(field(obj, "alpha2")?, "alpha2", n)?;
    let cov = wick::CovarianceSpec::new(a)?;
    let v = wick::gaussian_integral_monomial(&cov, &alpha1, &alpha2);
    Ok(json!({ "value": format_rat(&v) }))
}

fn run_lg_matrix_check(spec: &JobSpec) -> Result<Value, CliError> {
    let obj = payload_object(&spec.payload)?;
    let g = parse_system_guarded(field(obj, "G")?, "G")?;
    let n = g.n_vars();
    let omega = parse_index_vec(field(obj, "omega")?, "omega", n)?;
    let bound = effective_degree(spec, 2)?;
    let report = inversion::lg_matrix_identity_check(&g, &omega, bound)?;
    let failures: Vec<Value> = report
        .failures
        .iter()
        .map(|(m, lhs, rhs)| {
            json!({
                "monomial": m.exponents(),
                "lhs": format_rat(lhs),
                "rhs": format_rat(rhs),
            })
        })
        .collect();
    Ok(result_doc(
        json!({ "holds": report.holds(), "checked": report.checked }),
        json!({ "bound": bound, "failures": failures }),
    ))
}

// ---------------------------------------------------------------------
// Table rendering
// ---------------------------------------------------------------------

fn render_table(doc: &Value) -> String {
    let mut out = String::new();
    render_value(doc, "", &mut out);
    out
}

fn render_value(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            if let (Some(n), Some(terms)) = (map.get("n"), map.get("terms")) {
                // a series literal: print its coefficient table
                let degree = map.get("degree").and_then(|d| d.as_u64()).unwrap_or(0);
                out.push_str(&format!("{prefix}series n={n} degree={degree}\n"));
                if let Some(terms) = terms.as_array() {
                    if terms.is_empty() {
                        out.push_str(&format!("{prefix}  (zero)\n"));
                    }
                    for t in terms {
                        let exp = t.get("exp").cloned().unwrap_or(Value::Null);
                        let coeff = t
                            .get("coeff")
                            .and_then(|c| c.as_str())
                            .unwrap_or("?")
                            .to_string();
                        out.push_str(&format!("{prefix}  {exp}  {coeff}\n"));
                    }
                }
                return;
            }
            for (k, val) in map {
                match val {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{prefix}{k}:\n"));
                        render_value(val, &format!("{prefix}  "), out);
                    }
                    _ => out.push_str(&format!("{prefix}{k}: {val}\n")),
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match item {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{prefix}[{i}]\n"));
                        render_value(item, &format!("{prefix}  "), out);
                    }
                    _ => out.push_str(&format!("{prefix}[{i}] {item}\n")),
                }
            }
        }
        other => out.push_str(&format!("{prefix}{other}\n")),
    }
}
