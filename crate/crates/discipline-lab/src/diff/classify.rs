//! Classification of a `par` program under both disciplines, and the
//! syntactic spot-check used to audit capability-accepted writes.

use crate::cap::{CapChecker, TypeEnv};
use crate::effects::par_race_verdict;
use crate::kernel::{Command, CommandKind, Program, Qualifier};
use indexmap::IndexMap;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    BothAccept,
    BothReject,
    /// capability checker accepts, effect discipline rejects
    CapOnly,
    /// effect discipline accepts, capability checker rejects
    EffectOnly,
    /// a branch fails sequential capability checking on its own; checker
    /// errors are bucketed here rather than counted as verdicts
    IllFormed,
}

/// Classify one generated program. The command must be a `par`.
pub fn classify(program: &Program, env: &TypeEnv, command: &Command) -> Cell {
    let CommandKind::Par(left, right) = &command.kind else {
        panic!("classify expects a par program");
    };
    let checker = CapChecker::new(program);
    if !checker.check_command(env, left).accepted || !checker.check_command(env, right).accepted {
        return Cell::IllFormed;
    }
    let cap = checker.check_par(env, left, right).accepted;
    let eff = par_race_verdict(env, left, right).accepted;
    match (cap, eff) {
        (true, true) => Cell::BothAccept,
        (false, false) => Cell::BothReject,
        (true, false) => Cell::CapOnly,
        (false, true) => Cell::EffectOnly,
    }
}

/// Where a variable's referent ultimately came from, for the write audit.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Root {
    /// a pool isolated variable, consumed into this branch
    Iso(String),
    /// a fresh allocation inside the branch
    Alloc(usize),
    /// anything else (shared or unknown)
    Other,
}

fn branch_write_roots(
    c: &Command,
    origin: &mut IndexMap<String, Root>,
    alloc_counter: &mut usize,
    writes: &mut Vec<Root>,
) {
    let resolve = |origin: &IndexMap<String, Root>, name: &str| -> Root {
        origin.get(name).cloned().unwrap_or(Root::Other)
    };
    match &c.kind {
        CommandKind::Skip => {}
        CommandKind::VarAssign { target, source } => {
            let root = resolve(origin, source);
            origin.insert(target.clone(), root);
        }
        // interior objects belong to the same ownership root as their base
        CommandKind::FieldRead { target, base, .. } => {
            let root = resolve(origin, base);
            origin.insert(target.clone(), root);
        }
        CommandKind::FieldWrite { base, .. } => {
            writes.push(resolve(origin, base));
        }
        CommandKind::Alloc { target, .. } => {
            *alloc_counter += 1;
            origin.insert(target.clone(), Root::Alloc(*alloc_counter));
        }
        CommandKind::Let { var, body, .. } => {
            let saved = origin.insert(var.clone(), Root::Other);
            branch_write_roots(body, origin, alloc_counter, writes);
            match saved {
                Some(old) => origin.insert(var.clone(), old),
                None => origin.shift_remove(var),
            };
        }
        CommandKind::Seq(a, b) | CommandKind::Par(a, b) => {
            branch_write_roots(a, origin, alloc_counter, writes);
            branch_write_roots(b, origin, alloc_counter, writes);
        }
        CommandKind::Recover { body, .. }
        | CommandKind::SpawnBackground(body)
        | CommandKind::AsyncUi(body) => branch_write_roots(body, origin, alloc_counter, writes),
        CommandKind::Call { target, .. } => {
            if let Some(t) = target {
                origin.insert(t.clone(), Root::Other);
            }
        }
    }
}

/// Syntactic audit of an accepted parallel program: every field write in a
/// branch must be rooted in an isolated pool variable consumed by that
/// branch or in a branch-local allocation, and the two branches' isolated
/// roots must be disjoint.
pub fn disjoint_write_spot_check(env: &TypeEnv, command: &Command) -> bool {
    let CommandKind::Par(left, right) = &command.kind else {
        return false;
    };
    let mut iso_roots: Vec<BTreeSet<String>> = Vec::new();
    for branch in [left, right] {
        let mut origin: IndexMap<String, Root> = env
            .iter()
            .map(|(name, ty)| {
                let root = if ty.qualifier == Qualifier::Isolated {
                    Root::Iso(name.clone())
                } else {
                    Root::Other
                };
                (name.clone(), root)
            })
            .collect();
        let mut writes = Vec::new();
        let mut allocs = 0usize;
        branch_write_roots(branch, &mut origin, &mut allocs, &mut writes);
        let mut branch_isos = BTreeSet::new();
        for root in writes {
            match root {
                Root::Iso(name) => {
                    branch_isos.insert(name);
                }
                Root::Alloc(_) => {}
                Root::Other => return false,
            }
        }
        iso_roots.push(branch_isos);
    }
    iso_roots[0].is_disjoint(&iso_roots[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::HARNESS_PROGRAM;
    use crate::kernel::{parse, QualType};

    fn env(pairs: &[(&str, Qualifier)]) -> TypeEnv {
        TypeEnv::from_pairs(
            pairs.iter().map(|(n, q)| (n.to_string(), QualType::new(*q, "T"))),
        )
    }

    #[test]
    fn writable_assignment_is_effect_only() {
        let e = env(&[("y", Qualifier::Writable), ("z", Qualifier::Writable)]);
        let c = Command::par(Command::var_assign("y", "z"), Command::skip());
        assert_eq!(classify(&HARNESS_PROGRAM, &e, &c), Cell::EffectOnly);
    }

    #[test]
    fn consume_then_write_is_cap_only() {
        let e = env(&[("i", Qualifier::Isolated)]);
        let body = parse("let w: writable T { w = i; w.f := w }").unwrap().main;
        let c = Command::par(body, Command::skip());
        assert_eq!(classify(&HARNESS_PROGRAM, &e, &c), Cell::CapOnly);
        assert!(disjoint_write_spot_check(&e, &c));
    }

    #[test]
    fn empty_par_is_both_accept() {
        let c = Command::par(Command::skip(), Command::skip());
        assert_eq!(classify(&HARNESS_PROGRAM, &TypeEnv::new(), &c), Cell::BothAccept);
        assert!(disjoint_write_spot_check(&TypeEnv::new(), &c));
    }

    #[test]
    fn pool_writable_heap_write_is_both_reject() {
        let e = env(&[("w0", Qualifier::Writable), ("w1", Qualifier::Writable)]);
        let c = Command::par(Command::field_write("w0", "f", "w1"), Command::skip());
        assert_eq!(classify(&HARNESS_PROGRAM, &e, &c), Cell::BothReject);
    }

    #[test]
    fn broken_branch_is_ill_formed() {
        let e = env(&[("i", Qualifier::Isolated)]);
        let body = parse("a = i; b = i").unwrap().main; // double consumption
        let c = Command::par(body, Command::skip());
        assert_eq!(classify(&HARNESS_PROGRAM, &e, &c), Cell::IllFormed);
    }

    #[test]
    fn shared_root_write_fails_the_spot_check() {
        let e = env(&[("w0", Qualifier::Writable), ("w1", Qualifier::Writable)]);
        let c = Command::par(Command::field_write("w0", "f", "w1"), Command::skip());
        assert!(!disjoint_write_spot_check(&e, &c));
    }

    #[test]
    fn interior_writes_resolve_to_the_isolated_root() {
        let e = env(&[("i", Qualifier::Isolated)]);
        // write through an object read out of the consumed isolated cluster
        let body = parse("let w: writable T { w = i; x = w.f; x.f := x }").unwrap().main;
        let c = Command::par(body, Command::skip());
        assert_eq!(classify(&HARNESS_PROGRAM, &e, &c), Cell::CapOnly);
        assert!(disjoint_write_spot_check(&e, &c));
    }
}
