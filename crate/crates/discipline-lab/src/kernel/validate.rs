//! Program well-formedness: unique class/field/method names, resolvable
//! class references. The grammar has no global or static members, so the
//! no-ambient-state property holds by construction.

use super::ast::{ClassDecl, Program};
use crate::diag::{Diagnostic, Span};
use std::collections::HashSet;

pub fn validate(program: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut class_names = HashSet::new();
    for class in &program.classes {
        if !class_names.insert(class.name.clone()) {
            diags.push(Diagnostic::reject(
                "WF-DUP-CLASS",
                class.span.clone(),
                format!("duplicate class `{}`", class.name),
            ));
        }
        validate_class(program, class, &mut diags);
    }
    diags
}

fn check_class_ref(program: &Program, name: &str, span: &Span, diags: &mut Vec<Diagnostic>) {
    if program.class(name).is_none() {
        diags.push(Diagnostic::reject(
            "WF-UNRESOLVED-CLASS",
            span.clone(),
            format!("unknown class `{name}`"),
        ));
    }
}

fn validate_class(program: &Program, class: &ClassDecl, diags: &mut Vec<Diagnostic>) {
    let mut field_names = HashSet::new();
    for field in &class.fields {
        if !field_names.insert(field.name.clone()) {
            diags.push(Diagnostic::reject(
                "WF-DUP-FIELD",
                class.span.clone(),
                format!("duplicate field `{}` in class `{}`", field.name, class.name),
            ));
        }
        check_class_ref(program, &field.ty.class, &class.span, diags);
    }
    let mut method_names = HashSet::new();
    for method in &class.methods {
        if !method_names.insert(method.name.clone()) {
            diags.push(Diagnostic::reject(
                "WF-DUP-METHOD",
                method.span.clone(),
                format!("duplicate method `{}` in class `{}`", method.name, class.name),
            ));
        }
        let mut params = HashSet::new();
        for p in &method.params {
            if !params.insert(p.name.clone()) {
                diags.push(Diagnostic::reject(
                    "WF-DUP-PARAM",
                    method.span.clone(),
                    format!("duplicate parameter `{}` in method `{}`", p.name, method.name),
                ));
            }
            check_class_ref(program, &p.ty.class, &method.span, diags);
        }
        check_class_ref(program, &method.ret.class, &method.span, diags);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parser::parse;

    #[test]
    fn accepts_well_formed_program() {
        let p = parse("class T { field f: writable T; } skip").unwrap();
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn rejects_duplicate_class() {
        let p = parse("class T { } class T { } skip").unwrap();
        assert_eq!(validate(&p)[0].rule, "WF-DUP-CLASS");
    }

    #[test]
    fn rejects_unresolved_class_reference() {
        let p = parse("class T { field f: writable Missing; } skip").unwrap();
        assert_eq!(validate(&p)[0].rule, "WF-UNRESOLVED-CLASS");
    }
}
