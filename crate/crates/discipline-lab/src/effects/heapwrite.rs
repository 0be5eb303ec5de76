//! The heap-write effect discipline: field writes have effect `HeapWrite`,
//! everything else (including local variable assignment) is `NoHeapWrite`,
//! compounds join. Two thread bodies may run in parallel iff the join of
//! their effects is `NoHeapWrite`.

use super::lattice::{Effect, HEAP_WRITE, HEAP_WRITE_LATTICE};
use crate::cap::TypeEnv;
use crate::diag::Diagnostic;
use crate::kernel::{Command, CommandKind};
use std::collections::BTreeSet;

#[derive(Debug, Clone)]
pub struct EffVerdict {
    pub effect: Effect,
    pub diagnostics: Vec<Diagnostic>,
    pub accepted: bool,
}

impl EffVerdict {
    pub(crate) fn from_parts(effect: Effect, diagnostics: Vec<Diagnostic>) -> Self {
        let accepted = diagnostics.iter().all(|d| !d.is_reject());
        EffVerdict { effect, diagnostics, accepted }
    }
}

struct Walk {
    bound: BTreeSet<String>,
    diags: Vec<Diagnostic>,
    /// when set, every `par` node is additionally required to be race-free
    check_pars: bool,
}

impl Walk {
    fn read(&mut self, name: &str, c: &Command) {
        if !self.bound.contains(name) {
            self.diags.push(Diagnostic::reject(
                "EFF-UNBOUND",
                c.span.clone(),
                format!("`{name}` is not bound"),
            ));
        }
    }

    /// Returns the effect of `c`; assignment targets are added to the bound
    /// set flow-sensitively.
    fn go(&mut self, c: &Command) -> Effect {
        let bottom = Effect::bottom(&HEAP_WRITE_LATTICE);
        let heap_write = Effect::named(&HEAP_WRITE_LATTICE, HEAP_WRITE);
        match &c.kind {
            CommandKind::Skip => bottom,
            CommandKind::VarAssign { target, source } => {
                self.read(source, c);
                self.bound.insert(target.clone());
                bottom
            }
            CommandKind::FieldRead { target, base, .. } => {
                self.read(base, c);
                self.bound.insert(target.clone());
                bottom
            }
            CommandKind::FieldWrite { base, source, .. } => {
                self.read(base, c);
                self.read(source, c);
                heap_write
            }
            CommandKind::Alloc { target, .. } => {
                self.bound.insert(target.clone());
                bottom
            }
            CommandKind::Let { var, body, .. } => {
                let shadowed = self.bound.contains(var);
                self.bound.insert(var.clone());
                let eff = self.go(body);
                if !shadowed {
                    self.bound.remove(var);
                }
                eff
            }
            CommandKind::Seq(a, b) => {
                let ea = self.go(a);
                let eb = self.go(b);
                ea.join(&eb)
            }
            CommandKind::Par(a, b) => {
                let saved = self.bound.clone();
                let ea = self.go(a);
                let after_a = std::mem::replace(&mut self.bound, saved);
                let eb = self.go(b);
                self.bound.extend(after_a);
                let joined = ea.join(&eb);
                if self.check_pars && !joined.is_bottom() {
                    for branch in [a, b] {
                        if let Some(node) = first_heap_writer(branch) {
                            self.diags.push(Diagnostic::reject(
                                "EFF-PAR-WRITE",
                                node.span.clone(),
                                format!(
                                    "{} prevents data-race-free parallel execution",
                                    describe(node)
                                ),
                            ));
                        }
                    }
                }
                joined
            }
            CommandKind::Recover { body, .. } => self.go(body),
            CommandKind::Call { target, receiver, args, .. } => {
                if let Some(r) = receiver {
                    self.read(r, c);
                }
                for a in args {
                    self.read(a, c);
                }
                if let Some(t) = target {
                    self.bound.insert(t.clone());
                }
                // no latent-effect annotations exist, so a call is
                // conservatively assumed to write
                heap_write
            }
            CommandKind::SpawnBackground(body) | CommandKind::AsyncUi(body) => {
                let saved = self.bound.clone();
                let eff = self.go(body);
                self.bound = saved;
                eff
            }
        }
    }
}

/// Bottom-up effect of a command under the heap-write lattice.
pub fn infer_heap_write(env: &TypeEnv, c: &Command) -> EffVerdict {
    let mut walk =
        Walk { bound: env.names().cloned().collect(), diags: Vec::new(), check_pars: false };
    let effect = walk.go(c);
    EffVerdict::from_parts(effect, walk.diags)
}

/// First syntactic node with an intrinsic `HeapWrite` effect.
fn first_heap_writer(c: &Command) -> Option<&Command> {
    match &c.kind {
        CommandKind::FieldWrite { .. } | CommandKind::Call { .. } => Some(c),
        CommandKind::Skip
        | CommandKind::VarAssign { .. }
        | CommandKind::FieldRead { .. }
        | CommandKind::Alloc { .. } => None,
        CommandKind::Let { body, .. }
        | CommandKind::Recover { body, .. }
        | CommandKind::SpawnBackground(body)
        | CommandKind::AsyncUi(body) => first_heap_writer(body),
        CommandKind::Seq(a, b) | CommandKind::Par(a, b) => {
            first_heap_writer(a).or_else(|| first_heap_writer(b))
        }
    }
}

fn describe(c: &Command) -> String {
    match &c.kind {
        CommandKind::FieldWrite { base, field, .. } => format!("field write `{base}.{field}`"),
        CommandKind::Call { method, .. } => format!("call `{method}` (may write)"),
        _ => "heap write".to_string(),
    }
}

/// Parallel-safety verdict: accepted iff the join of both branch effects is
/// `NoHeapWrite`.
pub fn par_race_verdict(env: &TypeEnv, c1: &Command, c2: &Command) -> EffVerdict {
    let v1 = infer_heap_write(env, c1);
    let v2 = infer_heap_write(env, c2);
    let joined = v1.effect.join(&v2.effect);
    let mut diags = v1.diagnostics;
    diags.extend(v2.diagnostics);
    if !joined.is_bottom() {
        for branch in [c1, c2] {
            if let Some(node) = first_heap_writer(branch) {
                diags.push(Diagnostic::reject(
                    "EFF-PAR-WRITE",
                    node.span.clone(),
                    format!("{} prevents data-race-free parallel execution", describe(node)),
                ));
            }
        }
    }
    EffVerdict::from_parts(joined, diags)
}

/// Race-check every `par` in a program: each parallel composition must have
/// join `NoHeapWrite`. Sequential heap writes are unconstrained.
pub fn check_heap_write_program(program: &crate::kernel::Program) -> EffVerdict {
    let mut diags = Vec::new();
    for class in &program.classes {
        for method in &class.methods {
            let mut bound: BTreeSet<String> =
                method.params.iter().map(|p| p.name.clone()).collect();
            if method.receiver.is_some() {
                bound.insert("self".to_string());
            }
            let mut walk = Walk { bound, diags: Vec::new(), check_pars: true };
            walk.go(&method.body);
            diags.extend(walk.diags);
        }
    }
    let mut walk = Walk { bound: BTreeSet::new(), diags: Vec::new(), check_pars: true };
    let effect = walk.go(&program.main);
    diags.extend(walk.diags);
    EffVerdict::from_parts(effect, diags)
}
