//! Cross-module invariants that back the checkers: mention-freedom of the
//! effect disciplines, predicate preservation for rely-guarantee types, and
//! an independent re-scan audit of concretization.

use discipline_lab::cap::TypeEnv;
use discipline_lab::diff::{generate, GenConfig};
use discipline_lab::effects::{infer_heap_write, UiCapBoundChecker, UiChecker};
use discipline_lab::kernel::{parse, Command, CommandKind};
use discipline_lab::proto::{concretize, parse_proto, FieldType, ObjType};
use discipline_lab::rgref::{all_preds, all_rels, well_formed, write_check, RGRefType};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn replace_var_assigns_with_skip(c: &Command) -> Command {
    let kind = match &c.kind {
        CommandKind::VarAssign { .. } => CommandKind::Skip,
        CommandKind::Let { var, ty, body } => CommandKind::Let {
            var: var.clone(),
            ty: ty.clone(),
            body: Box::new(replace_var_assigns_with_skip(body)),
        },
        CommandKind::Seq(a, b) => CommandKind::Seq(
            Box::new(replace_var_assigns_with_skip(a)),
            Box::new(replace_var_assigns_with_skip(b)),
        ),
        CommandKind::Par(a, b) => CommandKind::Par(
            Box::new(replace_var_assigns_with_skip(a)),
            Box::new(replace_var_assigns_with_skip(b)),
        ),
        CommandKind::Recover { target, body } => CommandKind::Recover {
            target: target.clone(),
            body: Box::new(replace_var_assigns_with_skip(body)),
        },
        CommandKind::SpawnBackground(body) => {
            CommandKind::SpawnBackground(Box::new(replace_var_assigns_with_skip(body)))
        }
        CommandKind::AsyncUi(body) => {
            CommandKind::AsyncUi(Box::new(replace_var_assigns_with_skip(body)))
        }
        other => other.clone(),
    };
    Command::of(kind)
}

/// Variable assignments are pure mention: replacing them by `skip` never
/// changes the heap-write effect.
#[test]
fn heap_write_effect_is_mention_free() {
    let cfg = GenConfig::new(21, 200);
    for (env, program) in generate(&cfg) {
        let stripped = replace_var_assigns_with_skip(&program);
        let before = infer_heap_write(&env, &program).effect;
        let after = infer_heap_write(&env, &stripped).effect;
        assert!(after.leq(&before), "stripping assignments raised the effect");
        assert_eq!(before, after, "assignments must contribute bottom");
    }
}

fn ui_program(body_stmts: &[&str]) -> String {
    format!(
        "ui class Label {{ method poke(self: writable): writable Label {{ skip }} }} \
         class Data {{ field next: writable Data; }} \
         let label: writable Label {{ let d: writable Data {{ \
           spawn {{ {} }} \
         }} }}",
        body_stmts.join("; ")
    )
}

/// Adding mentions of UI references (or unused bindings) to a background
/// body never changes the effect-discipline verdict; the capability-bound
/// alternative flips on the first mention — the pair of facts behind the
/// use-mention distinction.
#[test]
fn ui_verdicts_are_mention_invariant_but_capbound_is_not() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
    let safe_stmts = ["skip", "e0 = d", "d.next := d", "f0 = new Data()"];
    for case in 0..200 {
        let n = rng.gen_range(1..4usize);
        let base_body: Vec<&str> =
            (0..n).map(|_| safe_stmts[rng.gen_range(0..safe_stmts.len())]).collect();

        let base_src = ui_program(&base_body);
        let base = parse(&base_src).unwrap();
        assert!(UiChecker::new(&base).check_program().accepted, "case {case}");
        assert!(UiCapBoundChecker::new(&base).check_program().accepted, "case {case}");

        // mention the UI reference without using it
        let mut mention_body = base_body.clone();
        mention_body.insert(rng.gen_range(0..=mention_body.len()), "u0 = label");
        let mentioned = parse(&ui_program(&mention_body)).unwrap();
        assert!(
            UiChecker::new(&mentioned).check_program().accepted,
            "effect verdict changed under mention at case {case}"
        );
        let capbound = UiCapBoundChecker::new(&mentioned).check_program();
        assert!(!capbound.accepted, "capability bound tolerated a mention at case {case}");
        assert!(capbound.diagnostics.iter().any(|d| d.rule == "EFF-UIBOUND-FLOW"));

        // an unused ui-typed binding changes nothing for either checker
        let padded_src =
            base_src.replace("spawn {", "spawn { let pad: writable Label {").replacen("} } }", "} } } }", 1);
        let padded = parse(&padded_src).expect("padded program parses");
        assert!(UiChecker::new(&padded).check_program().accepted, "case {case}");
        assert!(UiCapBoundChecker::new(&padded).check_program().accepted, "case {case}");
    }
}

/// Well-formedness means the refinement survives both the guarantee and the
/// rely; checked by enumeration across the catalog.
#[test]
fn rgref_predicate_preservation() {
    let preds = all_preds(8);
    let rels = all_rels(6);
    let mut audited = 0;
    for &pred in &preds {
        for &rely in &rels {
            for &guarantee in &rels {
                let t = RGRefType::new(pred, rely, guarantee);
                if !well_formed(&t) {
                    continue;
                }
                audited += 1;
                for a in 0..=24u64 {
                    if !pred.holds(a) {
                        continue;
                    }
                    for b in 0..=24u64 {
                        if t.guarantee.holds(a, b) || t.rely.holds(a, b) {
                            assert!(
                                pred.holds(b),
                                "{t}: step ({a}, {b}) breaks the refinement"
                            );
                        }
                    }
                }
            }
        }
    }
    assert!(audited > 100);
}

/// The tested write postcondition: a permitted write on a well-formed type
/// preserves the refinement, and `old = new` is always permitted when
/// equality is within the guarantee.
#[test]
fn rgref_write_postcondition() {
    let preds = all_preds(6);
    let rels = all_rels(4);
    for &pred in &preds {
        for &rely in &rels {
            for &guarantee in &rels {
                let t = RGRefType::new(pred, rely, guarantee);
                if !well_formed(&t) {
                    continue;
                }
                for old in 0..=16u64 {
                    if !pred.holds(old) {
                        continue;
                    }
                    if discipline_lab::rgref::rel_contains(discipline_lab::rgref::Rel::Eq, guarantee) {
                        assert!(write_check(&t, old, old), "reflexive write refused by {t}");
                    }
                    for new in 0..=16u64 {
                        if write_check(&t, old, new) {
                            assert!(pred.holds(new), "{t}: write {old} -> {new} broke the refinement");
                        }
                    }
                }
            }
        }
    }
}

/// Independent audit of concretization: re-derive every method's demands
/// straight from the surface syntax (separate from the checker's row
/// bookkeeping) and verify the concrete type satisfies them.
#[test]
fn concretization_satisfies_rescanned_method_demands() {
    let source = r#"
function F() {
  this.x = 0
  this.y = 2
}
F.prototype.inc = function() { this.x++; }
F.prototype.bump = function() { this.y = 3; this.inc(); }
F.prototype.get = function() { return this.x; }
F.prototype.all = function() { this.bump(); return this.get(); }
"#;
    let program = parse_proto(source).unwrap();
    let (ctors, diags) = discipline_lab::proto::infer_constructors(&program);
    assert!(diags.is_empty(), "{diags:?}");
    let nc: ObjType = concretize(&ctors["F"].instance_prototypal).unwrap();

    // fresh demand scan straight off the parsed bodies
    use discipline_lab::proto::parser::{MStmtKind, PExpr};
    let ctor = program.constructor("F").unwrap();
    let method_names: BTreeSet<&str> = ctor.methods.iter().map(|m| m.name.as_str()).collect();
    let mut direct: Vec<(&str, BTreeSet<String>, BTreeSet<String>, BTreeSet<String>)> = Vec::new();
    for m in &ctor.methods {
        let mut reads = BTreeSet::new();
        let mut writes = BTreeSet::new();
        let mut calls = BTreeSet::new();
        fn scan_expr(e: &PExpr, reads: &mut BTreeSet<String>, calls: &mut BTreeSet<String>) {
            match e {
                PExpr::ThisField(f) => {
                    reads.insert(f.clone());
                }
                PExpr::ThisCall(m, args) => {
                    calls.insert(m.clone());
                    for a in args {
                        scan_expr(a, reads, calls);
                    }
                }
                _ => {}
            }
        }
        for stmt in &m.body {
            match &stmt.kind {
                MStmtKind::SetThisField { field, value } => {
                    writes.insert(field.clone());
                    scan_expr(value, &mut reads, &mut calls);
                }
                MStmtKind::IncThisField { field } => {
                    writes.insert(field.clone());
                    reads.insert(field.clone());
                }
                MStmtKind::ExprStmt(e) | MStmtKind::Return(e) => {
                    scan_expr(e, &mut reads, &mut calls)
                }
            }
        }
        direct.push((m.name.as_str(), reads, writes, calls));
    }
    // transitive closure over local calls
    for (name, _, _, _) in direct.clone() {
        let mut reads = BTreeSet::new();
        let mut writes = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![name.to_string()];
        while let Some(m) = stack.pop() {
            if !seen.insert(m.clone()) {
                continue;
            }
            let (_, r, w, cs) = direct.iter().find(|(n, ..)| *n == m).unwrap();
            reads.extend(r.iter().cloned());
            writes.extend(w.iter().cloned());
            for callee in cs {
                reads.insert(callee.clone()); // dispatch reads the method field
                stack.push(callee.clone());
            }
        }
        for f in &writes {
            assert!(nc.w.contains_key(f), "`{name}` writes `{f}` but it is not local on the NC type");
        }
        for f in &reads {
            let ok = if method_names.contains(f.as_str()) {
                matches!(nc.physical(f), Some(FieldType::Method(_)))
            } else {
                nc.physical(f).is_some()
            };
            assert!(ok, "`{name}` reads `{f}` but it is not present on the NC type");
        }
    }
}

/// classify buckets broken branches instead of counting them as verdicts.
#[test]
fn ill_formed_programs_stay_out_of_the_cells() {
    use discipline_lab::diff::{classify, Cell, HARNESS_PROGRAM};
    let env = TypeEnv::from_pairs([(
        "i".to_string(),
        discipline_lab::kernel::QualType::new(discipline_lab::kernel::Qualifier::Isolated, "T"),
    )]);
    let broken = parse("a = i; b = i").unwrap().main;
    let c = Command::par(broken, Command::skip());
    assert_eq!(classify(&HARNESS_PROGRAM, &env, &c), Cell::IllFormed);
}
