//! Canonical printer. `parse(print(p))` is structurally equal to `p` for
//! programs in parse normal form (right-folded `Seq`).

use super::ast::*;

/// Render a command on a single line, e.g. `par { skip } { skip }`.
pub fn print_command(c: &Command) -> String {
    match &c.kind {
        CommandKind::Skip => "skip".to_string(),
        CommandKind::VarAssign { target, source } => format!("{target} = {source}"),
        CommandKind::FieldRead { target, base, field } => format!("{target} = {base}.{field}"),
        CommandKind::FieldWrite { base, field, source } => format!("{base}.{field} := {source}"),
        CommandKind::Alloc { target, class } => format!("{target} = new {class}()"),
        CommandKind::Let { var, ty, body } => {
            format!("let {var}: {ty} {{ {} }}", print_command(body))
        }
        CommandKind::Seq(a, b) => format!("{}; {}", print_command(a), print_command(b)),
        CommandKind::Par(a, b) => {
            format!("par {{ {} }} {{ {} }}", print_command(a), print_command(b))
        }
        CommandKind::Recover { target, body } => {
            format!("recover {target} {{ {} }}", print_command(body))
        }
        CommandKind::Call { target, receiver, method, args } => {
            let mut s = String::new();
            if let Some(t) = target {
                s.push_str(t);
                s.push_str(" = ");
            }
            if let Some(r) = receiver {
                s.push_str(r);
                s.push('.');
            }
            s.push_str(method);
            s.push('(');
            s.push_str(&args.join(", "));
            s.push(')');
            s
        }
        CommandKind::SpawnBackground(body) => format!("spawn {{ {} }}", print_command(body)),
        CommandKind::AsyncUi(body) => format!("async_ui {{ {} }}", print_command(body)),
    }
}

/// Render a whole program: class declarations, then the main command.
pub fn print(p: &Program) -> String {
    let mut out = String::new();
    for class in &p.classes {
        if class.is_ui {
            out.push_str("ui ");
        }
        out.push_str(&format!("class {} {{\n", class.name));
        for field in &class.fields {
            out.push_str(&format!("  field {}: {};\n", field.name, field.ty));
        }
        for m in &class.methods {
            out.push_str("  ");
            if let Some(a) = m.annot {
                out.push_str(a.keyword());
                out.push(' ');
            }
            out.push_str(&format!("method {}(", m.name));
            let mut parts = Vec::new();
            if let Some(q) = m.receiver {
                parts.push(format!("self: {q}"));
            }
            for p in &m.params {
                parts.push(format!("{}: {}", p.name, p.ty));
            }
            out.push_str(&parts.join(", "));
            out.push_str(&format!("): {} {{ {} }}\n", m.ret, print_command(&m.body)));
        }
        out.push_str("}\n");
    }
    if !matches!(p.main.kind, CommandKind::Skip) || p.classes.is_empty() {
        out.push_str(&print_command(&p.main));
        out.push('\n');
    }
    out
}

/// Alpha-equivalence of commands: equal up to consistent renaming of `let`
/// binders. Used to compare re-parsed output against the original.
pub fn alpha_eq(a: &Command, b: &Command) -> bool {
    fn go(a: &Command, b: &Command, map: &mut Vec<(String, String)>) -> bool {
        let resolve = |map: &[(String, String)], n: &str, left: bool| -> String {
            for (l, r) in map.iter().rev() {
                if left && l == n {
                    return r.clone();
                }
                if !left && r == n {
                    return l.clone();
                }
            }
            n.to_string()
        };
        let same = |map: &[(String, String)], x: &str, y: &str| -> bool {
            resolve(map, x, true) == *y && resolve(map, y, false) == *x
        };
        match (&a.kind, &b.kind) {
            (CommandKind::Skip, CommandKind::Skip) => true,
            (
                CommandKind::VarAssign { target: t1, source: s1 },
                CommandKind::VarAssign { target: t2, source: s2 },
            ) => same(map, t1, t2) && same(map, s1, s2),
            (
                CommandKind::FieldRead { target: t1, base: b1, field: f1 },
                CommandKind::FieldRead { target: t2, base: b2, field: f2 },
            ) => same(map, t1, t2) && same(map, b1, b2) && f1 == f2,
            (
                CommandKind::FieldWrite { base: b1, field: f1, source: s1 },
                CommandKind::FieldWrite { base: b2, field: f2, source: s2 },
            ) => same(map, b1, b2) && f1 == f2 && same(map, s1, s2),
            (
                CommandKind::Alloc { target: t1, class: c1 },
                CommandKind::Alloc { target: t2, class: c2 },
            ) => same(map, t1, t2) && c1 == c2,
            (
                CommandKind::Let { var: v1, ty: ty1, body: b1 },
                CommandKind::Let { var: v2, ty: ty2, body: b2 },
            ) => {
                if ty1 != ty2 {
                    return false;
                }
                map.push((v1.clone(), v2.clone()));
                let ok = go(b1, b2, map);
                map.pop();
                ok
            }
            (CommandKind::Seq(a1, a2), CommandKind::Seq(b1, b2))
            | (CommandKind::Par(a1, a2), CommandKind::Par(b1, b2)) => {
                go(a1, b1, map) && go(a2, b2, map)
            }
            (
                CommandKind::Recover { target: t1, body: b1 },
                CommandKind::Recover { target: t2, body: b2 },
            ) => same(map, t1, t2) && go(b1, b2, map),
            (
                CommandKind::Call { target: t1, receiver: r1, method: m1, args: a1 },
                CommandKind::Call { target: t2, receiver: r2, method: m2, args: a2 },
            ) => {
                m1 == m2
                    && match (t1, t2) {
                        (None, None) => true,
                        (Some(x), Some(y)) => same(map, x, y),
                        _ => false,
                    }
                    && match (r1, r2) {
                        (None, None) => true,
                        (Some(x), Some(y)) => same(map, x, y),
                        _ => false,
                    }
                    && a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|(x, y)| same(map, x, y))
            }
            (CommandKind::SpawnBackground(b1), CommandKind::SpawnBackground(b2))
            | (CommandKind::AsyncUi(b1), CommandKind::AsyncUi(b2)) => go(b1, b2, map),
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}
