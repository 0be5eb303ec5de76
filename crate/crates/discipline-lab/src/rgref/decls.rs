//! Declaration files for the rgref discipline: one statement per line.
//!
//! ```text
//! type a = ref{>5}[<=,=]
//! split a -> a, a
//! write a 6 6
//! ```
//!
//! Blank lines and `#` comments are ignored. Each statement yields a
//! verdict; `type` lines check well-formedness and bind the name.

use super::{split_check_explain, well_formed, RGRefType};
use crate::diag::{Diagnostic, Span};
use indexmap::IndexMap;

#[derive(Debug, Clone)]
pub struct RgStmtVerdict {
    pub line: u32,
    pub text: String,
    pub accepted: bool,
}

/// Run a declaration file; returns per-line verdicts and diagnostics.
pub fn run_decls(source: &str, file: &str) -> (Vec<RgStmtVerdict>, Vec<Diagnostic>) {
    let mut types: IndexMap<String, RGRefType> = IndexMap::new();
    let mut verdicts = Vec::new();
    let mut diags = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let span = Span::new(file, line_no, 1, raw.len().max(1) as u32);
        let reject = |rule: &str, message: String, diags: &mut Vec<Diagnostic>| {
            diags.push(Diagnostic::reject(rule, span.clone(), message));
            false
        };

        let accepted = if let Some(rest) = line.strip_prefix("type ") {
            match rest.split_once('=') {
                Some((name, ty_text)) => match RGRefType::parse(ty_text) {
                    Ok(ty) => {
                        let name = name.trim().to_string();
                        if well_formed(&ty) {
                            types.insert(name, ty);
                            true
                        } else {
                            reject(
                                "RG-WF",
                                format!("{ty} is not well-formed: the refinement is not stable under its rely and guarantee"),
                                &mut diags,
                            )
                        }
                    }
                    Err(e) => reject("RG-PARSE", e.to_string(), &mut diags),
                },
                None => reject("RG-PARSE", format!("expected `type name = ref{{..}}[..,..]`, got `{line}`"), &mut diags),
            }
        } else if let Some(rest) = line.strip_prefix("split ") {
            match parse_split(rest) {
                Some((t, t1, t2)) => {
                    match (types.get(&t), types.get(&t1), types.get(&t2)) {
                        (Some(t), Some(t1), Some(t2)) => match split_check_explain(t, t1, t2) {
                            Ok(()) => true,
                            Err(reason) => reject("RG-SPLIT", reason, &mut diags),
                        },
                        _ => {
                            let missing = [&t, &t1, &t2]
                                .iter()
                                .filter(|n| !types.contains_key(n.as_str()))
                                .map(|n| n.to_string())
                                .collect::<Vec<_>>()
                                .join(", ");
                            reject("RG-UNKNOWN-TYPE", format!("unknown type name(s): {missing}"), &mut diags)
                        }
                    }
                }
                None => reject("RG-PARSE", format!("expected `split a -> b, c`, got `{line}`"), &mut diags),
            }
        } else if let Some(rest) = line.strip_prefix("write ") {
            match parse_write(rest) {
                Some((name, old, new)) => match types.get(&name) {
                    Some(t) => {
                        if !t.pred.holds(old) {
                            reject(
                                "RG-WRITE",
                                format!("old value {old} does not satisfy the refinement {}", t.pred),
                                &mut diags,
                            )
                        } else if super::write_check(t, old, new) {
                            true
                        } else {
                            reject(
                                "RG-WRITE",
                                format!("write {old} -> {new} is outside the guarantee {}", t.guarantee),
                                &mut diags,
                            )
                        }
                    }
                    None => reject("RG-UNKNOWN-TYPE", format!("unknown type name `{name}`"), &mut diags),
                },
                None => reject("RG-PARSE", format!("expected `write name old new`, got `{line}`"), &mut diags),
            }
        } else {
            reject("RG-PARSE", format!("unknown statement `{line}`"), &mut diags)
        };

        verdicts.push(RgStmtVerdict { line: line_no, text: line.to_string(), accepted });
    }
    (verdicts, diags)
}

fn parse_split(rest: &str) -> Option<(String, String, String)> {
    let (t, halves) = rest.split_once("->")?;
    let (t1, t2) = halves.split_once(',')?;
    Some((t.trim().to_string(), t1.trim().to_string(), t2.trim().to_string()))
}

fn parse_write(rest: &str) -> Option<(String, u64, u64)> {
    let mut parts = rest.split_whitespace();
    let name = parts.next()?.to_string();
    let old = parts.next()?.parse().ok()?;
    let new = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((name, old, new))
}
