//! Python bindings for the discipline-lab checkers.
//!
//! Source-level checks return plain dicts shaped like the CLI's JSON
//! envelope: `{"verdict": "accept"|"reject", "diagnostics": [...]}`.
//! Rely-guarantee types are passed as strings like `"ref{>5}[<=,=]"`.

use discipline_lab::cli::{check_kernel_source, CheckResult, Discipline};
use discipline_lab::diff::{run_diff as diff_run, GenConfig};
use discipline_lab::kernel;
use discipline_lab::proto;
use discipline_lab::rgref;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match value {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, item) in map {
                dict.set_item(key, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn result_to_py<'py>(py: Python<'py>, result: &CheckResult) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::json!({
        "verdict": if result.accepted { "accept" } else { "reject" },
        "diagnostics": result.diagnostics,
    });
    json_to_py(py, &value)
}

fn parse_discipline(name: &str) -> PyResult<Discipline> {
    Ok(match name {
        "refcap" => Discipline::Refcap,
        "heapwrite" => Discipline::Heapwrite,
        "ui" => Discipline::Ui,
        "ui-capbound" => Discipline::UiCapbound,
        _ => {
            return Err(PyValueError::new_err(format!(
                "unknown kernel discipline `{name}` (refcap, heapwrite, ui, ui-capbound)"
            )))
        }
    })
}

/// Check kernel-language source under one of the kernel disciplines.
#[pyfunction]
fn check_kernel<'py>(py: Python<'py>, source: &str, discipline: &str) -> PyResult<Bound<'py, PyAny>> {
    let discipline = parse_discipline(discipline)?;
    let result = check_kernel_source(discipline, source, "<python>");
    result_to_py(py, &result)
}

/// Canonical re-print of kernel source (parse, alpha-rename, print).
#[pyfunction]
fn kernel_print(source: &str) -> PyResult<String> {
    let program =
        kernel::parse(source).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(kernel::print(&program))
}

/// Free variables of the program's main command.
#[pyfunction]
fn free_vars(source: &str) -> PyResult<Vec<String>> {
    let program =
        kernel::parse(source).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(kernel::free_vars(&program.main).into_iter().collect())
}

/// Check prototype-calculus source; `effect_variant` selects the
/// per-method write-effect checker instead of NC concretization.
#[pyfunction]
#[pyo3(signature = (source, effect_variant = false))]
fn check_proto<'py>(py: Python<'py>, source: &str, effect_variant: bool) -> PyResult<Bound<'py, PyAny>> {
    let program = match proto::parse_proto(source) {
        Ok(p) => p,
        Err(e) => return Err(PyValueError::new_err(e.to_string())),
    };
    let diagnostics = if effect_variant {
        proto::check_proto_program_effect(&program)
    } else {
        proto::check_proto_program(&program)
    };
    let accepted = diagnostics.iter().all(|d| !d.is_reject());
    let value = serde_json::json!({
        "verdict": if accepted { "accept" } else { "reject" },
        "diagnostics": diagnostics,
    });
    json_to_py(py, &value)
}

/// Run a rely-guarantee declaration file; returns per-line verdicts and
/// diagnostics.
#[pyfunction]
fn rgref_run<'py>(py: Python<'py>, source: &str) -> PyResult<Bound<'py, PyAny>> {
    let (verdicts, diagnostics) = rgref::run_decls(source, "<python>");
    let value = serde_json::json!({
        "verdict": if diagnostics.iter().all(|d| !d.is_reject()) { "accept" } else { "reject" },
        "lines": verdicts
            .iter()
            .map(|v| serde_json::json!({"line": v.line, "text": v.text, "accepted": v.accepted}))
            .collect::<Vec<_>>(),
        "diagnostics": diagnostics,
    });
    json_to_py(py, &value)
}

fn parse_rgref(text: &str) -> PyResult<rgref::RGRefType> {
    rgref::RGRefType::parse(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Well-formedness of a reference type such as `"ref{>5}[<=,=]"`.
#[pyfunction]
fn rgref_well_formed(type_text: &str) -> PyResult<bool> {
    Ok(rgref::well_formed(&parse_rgref(type_text)?))
}

/// The splitting judgment on three reference types.
#[pyfunction]
fn rgref_split(original: &str, left: &str, right: &str) -> PyResult<bool> {
    Ok(rgref::split_check(&parse_rgref(original)?, &parse_rgref(left)?, &parse_rgref(right)?))
}

/// The failed premise of a split, or None when the split is permitted.
#[pyfunction]
fn rgref_split_reason(original: &str, left: &str, right: &str) -> PyResult<Option<String>> {
    Ok(rgref::split_check_explain(
        &parse_rgref(original)?,
        &parse_rgref(left)?,
        &parse_rgref(right)?,
    )
    .err())
}

/// Whether the write `old -> new` is inside the type's guarantee.
#[pyfunction]
fn rgref_write(type_text: &str, old: u64, new: u64) -> PyResult<bool> {
    Ok(rgref::write_check(&parse_rgref(type_text)?, old, new))
}

/// The qualifier order of the capability checker.
#[pyfunction]
fn sub_qualifier(a: &str, b: &str) -> PyResult<bool> {
    let parse = |s: &str| {
        kernel::Qualifier::ALL
            .into_iter()
            .find(|q| q.keyword() == s)
            .ok_or_else(|| PyValueError::new_err(format!("unknown qualifier `{s}`")))
    };
    Ok(discipline_lab::cap::sub_qualifier(parse(a)?, parse(b)?))
}

/// Run the differential harness; returns the gap report as a dict.
#[pyfunction]
#[pyo3(signature = (seed = 42, count = 1000))]
fn run_diff<'py>(py: Python<'py>, seed: u64, count: usize) -> PyResult<Bound<'py, PyAny>> {
    let report = diff_run(&GenConfig::new(seed, count));
    let value = serde_json::to_value(&report)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

#[pymodule]
fn discipline_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_print, m)?)?;
    m.add_function(wrap_pyfunction!(free_vars, m)?)?;
    m.add_function(wrap_pyfunction!(check_proto, m)?)?;
    m.add_function(wrap_pyfunction!(rgref_run, m)?)?;
    m.add_function(wrap_pyfunction!(rgref_well_formed, m)?)?;
    m.add_function(wrap_pyfunction!(rgref_split, m)?)?;
    m.add_function(wrap_pyfunction!(rgref_split_reason, m)?)?;
    m.add_function(wrap_pyfunction!(rgref_write, m)?)?;
    m.add_function(wrap_pyfunction!(sub_qualifier, m)?)?;
    m.add_function(wrap_pyfunction!(run_diff, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
