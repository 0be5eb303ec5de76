//! Free variables of a command: everything read or written, minus its own
//! `let` binders. Field and method names are not variables.

use super::ast::{Command, CommandKind};
use std::collections::BTreeSet;

/// Re-associate every `Seq` spine to the right, the parser's normal form.
pub fn normalize_seqs(mut c: Command) -> Command {
    fn flatten(c: Command, out: &mut Vec<Command>) {
        match c.kind {
            CommandKind::Seq(a, b) => {
                flatten(*a, out);
                flatten(*b, out);
            }
            _ => out.push(normalize_seqs(c)),
        }
    }
    if matches!(c.kind, CommandKind::Seq(..)) {
        let mut parts = Vec::new();
        flatten(c, &mut parts);
        let mut cmd = parts.pop().expect("seq has parts");
        while let Some(prev) = parts.pop() {
            let span = prev.span.clone();
            cmd = Command::new(CommandKind::Seq(Box::new(prev), Box::new(cmd)), span);
        }
        return cmd;
    }
    c.kind = match c.kind {
        CommandKind::Let { var, ty, body } => {
            CommandKind::Let { var, ty, body: Box::new(normalize_seqs(*body)) }
        }
        CommandKind::Par(a, b) => {
            CommandKind::Par(Box::new(normalize_seqs(*a)), Box::new(normalize_seqs(*b)))
        }
        CommandKind::Recover { target, body } => {
            CommandKind::Recover { target, body: Box::new(normalize_seqs(*body)) }
        }
        CommandKind::SpawnBackground(body) => {
            CommandKind::SpawnBackground(Box::new(normalize_seqs(*body)))
        }
        CommandKind::AsyncUi(body) => CommandKind::AsyncUi(Box::new(normalize_seqs(*body))),
        other => other,
    };
    c
}

pub fn free_vars(c: &Command) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect(c, &mut Vec::new(), &mut out);
    out
}

fn collect(c: &Command, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let mut add = |name: &str, bound: &[String]| {
        if !bound.iter().any(|b| b == name) {
            out.insert(name.to_string());
        }
    };
    match &c.kind {
        CommandKind::Skip => {}
        CommandKind::VarAssign { target, source } => {
            add(target, bound);
            add(source, bound);
        }
        CommandKind::FieldRead { target, base, .. } => {
            add(target, bound);
            add(base, bound);
        }
        CommandKind::FieldWrite { base, source, .. } => {
            add(base, bound);
            add(source, bound);
        }
        CommandKind::Alloc { target, .. } => add(target, bound),
        CommandKind::Let { var, body, .. } => {
            bound.push(var.clone());
            collect(body, bound, out);
            bound.pop();
        }
        CommandKind::Seq(a, b) | CommandKind::Par(a, b) => {
            collect(a, bound, out);
            collect(b, bound, out);
        }
        CommandKind::Recover { target, body } => {
            add(target, bound);
            collect(body, bound, out);
        }
        CommandKind::Call { target, receiver, args, .. } => {
            if let Some(t) = target {
                add(t, bound);
            }
            if let Some(r) = receiver {
                add(r, bound);
            }
            for a in args {
                add(a, bound);
            }
        }
        CommandKind::SpawnBackground(body) | CommandKind::AsyncUi(body) => {
            collect(body, bound, out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ast::{Command, CommandKind, QualType, Qualifier};
    use crate::kernel::parser::parse;

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn var_assign_frees_both_sides() {
        assert_eq!(free_vars(&Command::var_assign("y", "z")), set(&["y", "z"]));
    }

    #[test]
    fn recover_call_frees_target_and_args() {
        let c = Command::recover(
            "z",
            Command::of(CommandKind::Call {
                target: Some("z".into()),
                receiver: None,
                method: "RandomChoice".into(),
                args: vec!["x".into(), "y".into()],
            }),
        );
        assert_eq!(free_vars(&c), set(&["x", "y", "z"]));
    }

    #[test]
    fn let_binder_is_excluded() {
        let c = Command::let_in(
            "x",
            QualType::new(Qualifier::Writable, "T"),
            Command::var_assign("x", "w"),
        );
        assert_eq!(free_vars(&c), set(&["w"]));
    }

    #[test]
    fn seq_is_union() {
        let p = parse("a = b; par { c = d } { e = f }").unwrap();
        assert_eq!(free_vars(&p.main), set(&["a", "b", "c", "d", "e", "f"]));
        if let CommandKind::Seq(l, r) = &p.main.kind {
            let mut u = free_vars(l);
            u.extend(free_vars(r));
            assert_eq!(u, free_vars(&p.main));
        } else {
            panic!("expected seq");
        }
    }
}
