//! The UI-threading effect discipline.
//!
//! Methods carry a `safe`/`ui` annotation (unannotated methods default to
//! `safe`, or to `ui` inside a `ui class`). A call's effect is the callee's
//! annotation; merely holding, passing, or storing a reference to a UI
//! object contributes `SafeEffect` — mention is free. `spawn { .. }` bodies
//! are checked in background context, where a `UIEffect` call is an error
//! unless it sits inside an `async_ui { .. }` block, which switches back to
//! UI-thread context. `async_ui` is also permitted on the UI thread itself
//! (the context switch is idempotent).

use super::lattice::{Effect, UI_EFFECT, UI_LATTICE};
use super::EffVerdict;
use crate::diag::Diagnostic;
use crate::kernel::{ClassDecl, Command, CommandKind, EffectAnnot, MethodDecl, Program};
use indexmap::IndexMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreadContext {
    UiThread,
    Background,
}

/// Variable-to-class tracking, enough to resolve receivers.
type ClassEnv = IndexMap<String, String>;

pub struct UiChecker<'p> {
    program: &'p Program,
}

impl<'p> UiChecker<'p> {
    pub fn new(program: &'p Program) -> Self {
        UiChecker { program }
    }

    /// Effective annotation of a method: explicit, else the class default.
    pub fn annotation(&self, class: &ClassDecl, method: &MethodDecl) -> EffectAnnot {
        method.annot.unwrap_or(if class.is_ui { EffectAnnot::Ui } else { EffectAnnot::Safe })
    }

    /// Infer the UI effect of a command in the given thread context.
    pub fn infer_ui(&self, c: &Command, context: ThreadContext) -> EffVerdict {
        let mut env = ClassEnv::new();
        let mut diags = Vec::new();
        let effect = self.walk(c, &mut env, context, &mut diags);
        EffVerdict::from_parts(effect, diags)
    }

    /// Check every method body against its annotation, then the main
    /// command as UI-thread event-handler code.
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
                // bodies are inferred in UI-thread context; a safe-annotated
                // method must come out SafeEffect
                let mut body_diags = Vec::new();
                let eff = self.walk(&method.body, &mut env, ThreadContext::UiThread, &mut body_diags);
                diags.extend(body_diags);
                if self.annotation(class, method) == EffectAnnot::Safe && !eff.is_bottom() {
                    diags.push(Diagnostic::reject(
                        "EFF-UI-ANNOT",
                        method.span.clone(),
                        format!("safe method `{}` has a UIEffect body", method.name),
                    ));
                }
            }
        }
        let mut env = ClassEnv::new();
        let effect = self.walk(&self.program.main, &mut env, ThreadContext::UiThread, &mut diags);
        EffVerdict::from_parts(effect, diags)
    }

    fn walk(
        &self,
        c: &Command,
        env: &mut ClassEnv,
        context: ThreadContext,
        diags: &mut Vec<Diagnostic>,
    ) -> Effect {
        let bottom = Effect::bottom(&UI_LATTICE);
        match &c.kind {
            CommandKind::Skip => bottom,
            // holding or copying references is mention, not use
            CommandKind::VarAssign { target, source } => {
                if let Some(class) = env.get(source).cloned() {
                    env.insert(target.clone(), class);
                }
                bottom
            }
            CommandKind::FieldRead { target, base, field } => {
                if let Some(class) = env.get(base).and_then(|cn| self.program.class(cn)) {
                    if let Some(f) = class.field(field) {
                        env.insert(target.clone(), f.ty.class.clone());
                    }
                }
                bottom
            }
            // a field store is still mention under this lattice
            CommandKind::FieldWrite { .. } => bottom,
            CommandKind::Alloc { target, class } => {
                env.insert(target.clone(), class.clone());
                bottom
            }
            CommandKind::Let { var, ty, body } => {
                let saved = env.insert(var.clone(), ty.class.clone());
                let eff = self.walk(body, env, context, diags);
                match saved {
                    Some(old) => env.insert(var.clone(), old),
                    None => env.shift_remove(var),
                };
                eff
            }
            CommandKind::Seq(a, b) | CommandKind::Par(a, b) => {
                let ea = self.walk(a, env, context, diags);
                let eb = self.walk(b, env, context, diags);
                ea.join(&eb)
            }
            CommandKind::Recover { body, .. } => self.walk(body, env, context, diags),
            CommandKind::Call { target, receiver, method, args: _ } => {
                let resolved = match receiver {
                    Some(recv) => match env.get(recv).and_then(|cn| self.program.class(cn)) {
                        Some(class) => class.method(method).map(|m| (class, m)),
                        None => None,
                    },
                    None => self.program.bare_method(method),
                };
                let Some((class, decl)) = resolved else {
                    diags.push(Diagnostic::reject(
                        "EFF-UNBOUND",
                        c.span.clone(),
                        format!("cannot resolve call to `{method}`"),
                    ));
                    return bottom;
                };
                let effect = match self.annotation(class, decl) {
                    EffectAnnot::Ui => Effect::named(&UI_LATTICE, UI_EFFECT),
                    EffectAnnot::Safe => bottom.clone(),
                };
                if context == ThreadContext::Background && !effect.is_bottom() {
                    diags.push(Diagnostic::reject(
                        "EFF-UI-CALL",
                        c.span.clone(),
                        format!("ui method `{method}` called on a background thread"),
                    ));
                }
                if let Some(t) = target {
                    env.insert(t.clone(), decl.ret.class.clone());
                }
                effect
            }
            CommandKind::SpawnBackground(body) => {
                let mut inner = env.clone();
                self.walk(body, &mut inner, ThreadContext::Background, diags);
                // spawning itself is safe; violations inside were reported
                bottom
            }
            CommandKind::AsyncUi(body) => {
                let mut inner = env.clone();
                self.walk(body, &mut inner, ThreadContext::UiThread, diags);
                // scheduling code back to the UI thread is safe from
                // either context
                bottom
            }
        }
    }
}
