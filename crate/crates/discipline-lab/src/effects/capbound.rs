//! The capability-bound alternative to the UI effect discipline, kept for
//! contrast: forbid any reference to a UI-classed object from flowing into
//! a background thread, in the style of the parallel-composition context
//! restriction. Rejects the standard capture-and-send-back idiom, which is
//! exactly the gap the differential tests document.

use super::lattice::{Effect, UI_LATTICE};
use super::EffVerdict;
use crate::diag::Diagnostic;
use crate::kernel::{free_vars, Command, CommandKind, Program};
use indexmap::IndexMap;

type ClassEnv = IndexMap<String, String>;

pub struct UiCapBoundChecker<'p> {
    program: &'p Program,
}

impl<'p> UiCapBoundChecker<'p> {
    pub fn new(program: &'p Program) -> Self {
        UiCapBoundChecker { program }
    }

    /// Accept iff no `spawn` body's free variables include a ui-classed
    /// reference.
    pub fn check_command(&self, c: &Command) -> EffVerdict {
        let mut env = ClassEnv::new();
        let mut diags = Vec::new();
        self.walk(c, &mut env, &mut diags);
        EffVerdict::from_parts(Effect::bottom(&UI_LATTICE), diags)
    }

    pub fn check_program(&self) -> EffVerdict {
        let mut diags = Vec::new();
        for class in &self.program.classes {
            for method in &class.methods {
                let mut env = ClassEnv::new();
                if method.receiver.is_some() {
                    env.insert("self".to_string(), class.name.clone());
                }
                for p in &method.params {
                    env.insert(p.name.clone(), p.ty.class.clone());
                }
                self.walk(&method.body, &mut env, &mut diags);
            }
        }
        let mut env = ClassEnv::new();
        self.walk(&self.program.main, &mut env, &mut diags);
        EffVerdict::from_parts(Effect::bottom(&UI_LATTICE), diags)
    }

    fn is_ui_class(&self, name: &str) -> bool {
        self.program.class(name).is_some_and(|c| c.is_ui)
    }

    fn walk(&self, c: &Command, env: &mut ClassEnv, diags: &mut Vec<Diagnostic>) {
        match &c.kind {
            CommandKind::Skip
            | CommandKind::FieldWrite { .. } => {}
            CommandKind::VarAssign { target, source } => {
                if let Some(class) = env.get(source).cloned() {
                    env.insert(target.clone(), class);
                }
            }
            CommandKind::FieldRead { target, base, field } => {
                if let Some(class) = env.get(base).and_then(|cn| self.program.class(cn)) {
                    if let Some(f) = class.field(field) {
                        env.insert(target.clone(), f.ty.class.clone());
                    }
                }
            }
            CommandKind::Alloc { target, class } => {
                env.insert(target.clone(), class.clone());
            }
            CommandKind::Let { var, ty, body } => {
                let saved = env.insert(var.clone(), ty.class.clone());
                self.walk(body, env, diags);
                match saved {
                    Some(old) => env.insert(var.clone(), old),
                    None => env.shift_remove(var),
                };
            }
            CommandKind::Seq(a, b) | CommandKind::Par(a, b) => {
                self.walk(a, env, diags);
                self.walk(b, env, diags);
            }
            CommandKind::Recover { body, .. } => self.walk(body, env, diags),
            CommandKind::Call { target, receiver, method, args: _ } => {
                let resolved = match receiver {
                    Some(recv) => env
                        .get(recv)
                        .and_then(|cn| self.program.class(cn))
                        .and_then(|class| class.method(method)),
                    None => self.program.bare_method(method).map(|(_, m)| m),
                };
                if let (Some(t), Some(decl)) = (target, resolved) {
                    env.insert(t.clone(), decl.ret.class.clone());
                }
            }
            CommandKind::SpawnBackground(body) => {
                for var in free_vars(body) {
                    if env.get(&var).is_some_and(|cn| self.is_ui_class(cn)) {
                        diags.push(Diagnostic::reject(
                            "EFF-UIBOUND-FLOW",
                            c.span.clone(),
                            format!("ui reference `{var}` flows into a background thread"),
                        ));
                    }
                }
                let mut inner = env.clone();
                self.walk(body, &mut inner, diags);
            }
            CommandKind::AsyncUi(body) => {
                let mut inner = env.clone();
                self.walk(body, &mut inner, diags);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::ui::UiChecker;
    use crate::kernel::parse;

    fn fig2_src() -> &'static str {
        "ui class Label { method setText(self: writable, s: readable Str): writable Unit { skip } } \
         class Str { } \
         class Unit { } \
         let label: writable Label { let s: readable Str { \
           spawn { skip; async_ui { label.setText(s) } } \
         } }"
    }

    #[test]
    fn rejects_captured_ui_reference() {
        let p = parse(fig2_src()).unwrap();
        let v = UiCapBoundChecker::new(&p).check_program();
        assert!(!v.accepted);
        let d = &v.diagnostics[0];
        assert_eq!(d.rule, "EFF-UIBOUND-FLOW");
        assert!(d.message.contains("label"));
    }

    #[test]
    fn accepts_background_code_without_ui_references() {
        let src = "ui class Label { } class Num { } \
                   let n: readable Num { spawn { m = n } }";
        let p = parse(src).unwrap();
        let v = UiCapBoundChecker::new(&p).check_program();
        assert!(v.accepted, "{:?}", v.diagnostics);
    }

    /// The same program is accepted by the effect discipline and rejected
    /// here: a use-mention gap witness.
    #[test]
    fn fig2_is_a_use_mention_gap_witness() {
        let p = parse(fig2_src()).unwrap();
        let effect_verdict = UiChecker::new(&p).check_program();
        let capbound_verdict = UiCapBoundChecker::new(&p).check_program();
        assert!(effect_verdict.accepted);
        assert!(!capbound_verdict.accepted);
    }
}
