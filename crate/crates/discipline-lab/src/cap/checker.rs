//! Flow-sensitive reference-capability checking.
//!
//! Judgments have the shape `env |- c -| env'`: checking a command threads
//! the environment through, adding bindings for flow-introduced targets and
//! consuming destructively-read isolated variables. Parallel composition
//! splits the context (no writable binding may enter either side); recovery
//! promotes its target to `immutable` when the surrounding context is
//! isolated-or-immutable. Both apply framing first: bindings not free in
//! the command are set aside and restored unchanged afterwards.

use super::env::{LookupError, TypeEnv};
use super::qualifier::{adapt_field, sub_qualifier};
use crate::diag::{Diagnostic, Span};
use crate::kernel::{free_vars, Command, CommandKind, MethodDecl, Program, QualType, Qualifier};

/// Checker configuration. `framing` exists so tests can demonstrate what
/// breaks without automatic framing; the CLI always leaves it on.
#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub framing: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { framing: true }
    }
}

#[derive(Debug, Clone)]
pub struct CapVerdict {
    pub accepted: bool,
    pub out_env: Option<TypeEnv>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CapVerdict {
    fn accept(env: TypeEnv) -> Self {
        CapVerdict { accepted: true, out_env: Some(env), diagnostics: Vec::new() }
    }

    fn reject(diagnostics: Vec<Diagnostic>) -> Self {
        debug_assert!(diagnostics.iter().any(Diagnostic::is_reject));
        CapVerdict { accepted: false, out_env: None, diagnostics }
    }
}

type Checked = Result<TypeEnv, Vec<Diagnostic>>;

pub struct CapChecker<'p> {
    program: &'p Program,
    options: CheckOptions,
}

impl<'p> CapChecker<'p> {
    pub fn new(program: &'p Program) -> Self {
        CapChecker { program, options: CheckOptions::default() }
    }

    pub fn with_options(program: &'p Program, options: CheckOptions) -> Self {
        CapChecker { program, options }
    }

    /// Check a single command in the given environment.
    pub fn check_command(&self, env: &TypeEnv, c: &Command) -> CapVerdict {
        match self.check(env.clone(), c) {
            Ok(out) => CapVerdict::accept(out),
            Err(diags) => CapVerdict::reject(diags),
        }
    }

    /// Check two thread bodies for parallel composition.
    pub fn check_par(&self, env: &TypeEnv, c1: &Command, c2: &Command) -> CapVerdict {
        match self.par(env.clone(), c1, c2, &c1.span) {
            Ok(out) => CapVerdict::accept(out),
            Err(diags) => CapVerdict::reject(diags),
        }
    }

    /// Check a recovery block promoting `target`.
    pub fn check_recover(&self, env: &TypeEnv, target: &str, c: &Command) -> CapVerdict {
        match self.recover(env.clone(), target, c, &c.span) {
            Ok(out) => CapVerdict::accept(out),
            Err(diags) => CapVerdict::reject(diags),
        }
    }

    /// Check every method body (in its parameter environment) and the main
    /// command (in the empty environment).
    pub fn check_program(&self) -> CapVerdict {
        let mut diagnostics = Vec::new();
        for class in &self.program.classes {
            for method in &class.methods {
                let env = method_env(&class.name, method);
                if let Err(ds) = self.check(env, &method.body) {
                    diagnostics.extend(ds);
                }
            }
        }
        let mut out_env = None;
        match self.check(TypeEnv::new(), &self.program.main) {
            Ok(out) => out_env = Some(out),
            Err(ds) => diagnostics.extend(ds),
        }
        let accepted = diagnostics.iter().all(|d| !d.is_reject());
        CapVerdict { accepted, out_env: if accepted { out_env } else { None }, diagnostics }
    }

    // -- command checking ---------------------------------------------------

    fn check(&self, mut env: TypeEnv, c: &Command) -> Checked {
        let span = &c.span;
        match &c.kind {
            CommandKind::Skip => Ok(env),
            CommandKind::VarAssign { target, source } => {
                let src = self.read_var(&mut env, source, span)?;
                self.bind_target(&mut env, target, src, span)?;
                Ok(env)
            }
            CommandKind::FieldRead { target, base, field } => {
                let base_ty = self.lookup(&env, base, span)?;
                let decl = self.field_decl(&base_ty.class, field, span)?;
                let qualifier = adapt_field(base_ty.qualifier, decl.qualifier).map_err(|_| {
                    vec![Diagnostic::reject(
                        "CAP-ISO-BASE-READ",
                        span.clone(),
                        format!("cannot read field `{field}` through isolated `{base}`; bind it first"),
                    )]
                })?;
                let ty = QualType { qualifier, class: decl.class };
                self.bind_target(&mut env, target, ty, span)?;
                Ok(env)
            }
            CommandKind::FieldWrite { base, field, source } => {
                let base_ty = self.lookup(&env, base, span)?;
                if base_ty.qualifier != Qualifier::Writable {
                    return Err(vec![Diagnostic::reject(
                        "CAP-FIELD-WRITE",
                        span.clone(),
                        format!(
                            "field write requires a writable base; `{base}` is {}",
                            base_ty.qualifier
                        ),
                    )]);
                }
                let decl = self.field_decl(&base_ty.class, field, span)?;
                let src = self.read_var(&mut env, source, span)?;
                if src.class != decl.class {
                    return Err(vec![Diagnostic::reject(
                        "CAP-CLASS",
                        span.clone(),
                        format!("field `{field}` holds {}, got {}", decl.class, src.class),
                    )]);
                }
                if !sub_qualifier(src.qualifier, decl.qualifier) {
                    return Err(vec![Diagnostic::reject(
                        "CAP-SUBQ",
                        span.clone(),
                        format!("{} is not a subqualifier of {}", src.qualifier, decl.qualifier),
                    )]);
                }
                Ok(env)
            }
            CommandKind::Alloc { target, class } => {
                if self.program.class(class).is_none() {
                    return Err(vec![Diagnostic::reject(
                        "CAP-NO-CLASS",
                        span.clone(),
                        format!("unknown class `{class}`"),
                    )]);
                }
                // fresh allocations are externally unique
                let ty = QualType { qualifier: Qualifier::Isolated, class: class.clone() };
                self.bind_target(&mut env, target, ty, span)?;
                Ok(env)
            }
            CommandKind::Let { var, ty, body } => {
                if self.program.class(&ty.class).is_none() {
                    return Err(vec![Diagnostic::reject(
                        "CAP-NO-CLASS",
                        span.clone(),
                        format!("unknown class `{}`", ty.class),
                    )]);
                }
                let saved = env.binding(var).cloned().map(|t| (t, env.is_consumed(var)));
                env.bind(var.clone(), ty.clone());
                let mut out = self.check(env, body)?;
                out.remove(var);
                if let Some((ty, consumed)) = saved {
                    out.bind(var.clone(), ty);
                    if consumed {
                        out.consume(var);
                    }
                }
                Ok(out)
            }
            CommandKind::Seq(a, b) => {
                let mid = self.check(env, a)?;
                self.check(mid, b)
            }
            CommandKind::Par(a, b) => self.par(env, a, b, span),
            CommandKind::Recover { target, body } => self.recover(env, target, body, span),
            CommandKind::Call { target, receiver, method, args } => {
                self.call(env, target.as_deref(), receiver.as_deref(), method, args, span)
            }
            // Outside the UI discipline a thread block is checked like a
            // local block; its flow effects stay inside the thread, so the
            // outer environment is returned unchanged.
            CommandKind::SpawnBackground(body) | CommandKind::AsyncUi(body) => {
                self.check(env.clone(), body)?;
                Ok(env)
            }
        }
    }

    fn par(&self, env: TypeEnv, c1: &Command, c2: &Command, span: &Span) -> Checked {
        let fv1 = free_vars(c1);
        let fv2 = free_vars(c2);
        let (kept, framed) = if self.options.framing {
            env.partition(|n| fv1.contains(n) || fv2.contains(n))
        } else {
            (env.clone(), TypeEnv::new())
        };

        let mut env1 = TypeEnv::new();
        let mut env2 = TypeEnv::new();
        let mut writable = Vec::new();
        let mut iso_conflict = Vec::new();
        for (name, ty) in kept.iter() {
            match ty.qualifier {
                Qualifier::Readable | Qualifier::Immutable => {
                    kept.copy_into(name, &mut env1);
                    kept.copy_into(name, &mut env2);
                }
                Qualifier::Writable => writable.push(name.clone()),
                Qualifier::Isolated => match (fv1.contains(name), fv2.contains(name)) {
                    (true, true) => iso_conflict.push(name.clone()),
                    (false, true) => kept.copy_into(name, &mut env2),
                    // first use wins; an unused isolated goes to the left
                    _ => kept.copy_into(name, &mut env1),
                },
            }
        }
        let mut diags = Vec::new();
        if !writable.is_empty() {
            diags.push(Diagnostic::reject(
                "CAP-PAR-WRITABLE",
                span.clone(),
                format!("par requires no writable bindings; writable here: {}", writable.join(", ")),
            ));
        }
        if !iso_conflict.is_empty() {
            diags.push(Diagnostic::reject(
                "CAP-PAR-ISO-CONFLICT",
                span.clone(),
                format!("isolated bindings used by both branches: {}", iso_conflict.join(", ")),
            ));
        }
        if !diags.is_empty() {
            return Err(diags);
        }

        let env1_names: Vec<String> = env1.names().cloned().collect();
        let env2_names: Vec<String> = env2.names().cloned().collect();
        let out1 = self.check(env1, c1)?;
        let out2 = self.check(env2, c2)?;

        // recombine: framed bindings unchanged, each side's survivors, then
        // branch-introduced names
        let mut out = TypeEnv::new();
        for (name, _) in env.iter() {
            if framed.is_bound(name) {
                framed.copy_into(name, &mut out);
            } else if out1.is_bound(name) {
                out1.copy_into(name, &mut out);
            } else if out2.is_bound(name) {
                out2.copy_into(name, &mut out);
            }
        }
        for (name, ty) in out1.iter() {
            if !env1_names.contains(name) {
                out.bind(name.clone(), ty.clone());
                if out1.is_consumed(name) {
                    out.consume(name);
                }
            }
        }
        for (name, ty) in out2.iter() {
            if env2_names.contains(name) {
                continue;
            }
            if let Some(existing) = out.binding(name) {
                if existing != ty || out.is_consumed(name) != out2.is_consumed(name) {
                    return Err(vec![Diagnostic::reject(
                        "CAP-PAR-MERGE",
                        span.clone(),
                        format!("both branches introduce `{name}` at different types"),
                    )]);
                }
            } else {
                out.bind(name.clone(), ty.clone());
                if out2.is_consumed(name) {
                    out.consume(name);
                }
            }
        }
        Ok(out)
    }

    fn recover(&self, env: TypeEnv, target: &str, body: &Command, span: &Span) -> Checked {
        let fv = free_vars(body);
        if !fv.contains(target) {
            return Err(vec![Diagnostic::reject(
                "CAP-RECOVER-TARGET",
                span.clone(),
                format!("recover target `{target}` does not occur in the block"),
            )]);
        }
        let (kept, framed) = if self.options.framing {
            env.partition(|n| fv.contains(n))
        } else {
            (env.clone(), TypeEnv::new())
        };

        let offenders = kept.non_isolated_or_immutable();
        if !offenders.is_empty() {
            return Err(vec![Diagnostic::reject(
                "CAP-RECOVER-ENV",
                span.clone(),
                format!(
                    "recover requires an isolated-or-immutable context; offending inputs: {}",
                    offenders.join(", ")
                ),
            )]);
        }

        let mut out_body = self.check(kept, body)?;

        let Some(target_ty) = out_body.binding(target).cloned() else {
            return Err(vec![Diagnostic::reject(
                "CAP-RECOVER-TARGET",
                span.clone(),
                format!("recover target `{target}` is not bound after the block"),
            )]);
        };
        if out_body.is_consumed(target) {
            return Err(vec![Diagnostic::reject(
                "CAP-RECOVER-TARGET",
                span.clone(),
                format!("recover target `{target}` was consumed in the block"),
            )]);
        }
        // every qualifier is below readable, so this cannot fail; kept for
        // symmetry with the typing rule
        debug_assert!(sub_qualifier(target_ty.qualifier, Qualifier::Readable));
        let offenders: Vec<String> = out_body
            .iter()
            .filter(|(n, ty)| {
                n.as_str() != target
                    && !matches!(ty.qualifier, Qualifier::Isolated | Qualifier::Immutable)
            })
            .map(|(n, _)| n.clone())
            .collect();
        if !offenders.is_empty() {
            return Err(vec![Diagnostic::reject(
                "CAP-RECOVER-ENV",
                span.clone(),
                format!(
                    "recover requires an isolated-or-immutable output context; offending outputs: {}",
                    offenders.join(", ")
                ),
            )]);
        }
        out_body.bind(target.to_string(), QualType { qualifier: Qualifier::Immutable, class: target_ty.class });

        let mut out = TypeEnv::new();
        for (name, _) in env.iter() {
            if framed.is_bound(name) {
                framed.copy_into(name, &mut out);
            } else if out_body.is_bound(name) {
                out_body.copy_into(name, &mut out);
            }
        }
        for (name, ty) in out_body.iter() {
            if !out.is_bound(name) {
                out.bind(name.clone(), ty.clone());
                if out_body.is_consumed(name) {
                    out.consume(name);
                }
            }
        }
        Ok(out)
    }

    fn call(
        &self,
        mut env: TypeEnv,
        target: Option<&str>,
        receiver: Option<&str>,
        method: &str,
        args: &[String],
        span: &Span,
    ) -> Checked {
        let decl: &MethodDecl = match receiver {
            Some(recv) => {
                let recv_ty = self.read_var(&mut env, recv, span)?;
                let class = self.program.class(&recv_ty.class).ok_or_else(|| {
                    vec![Diagnostic::reject(
                        "CAP-NO-CLASS",
                        span.clone(),
                        format!("unknown class `{}`", recv_ty.class),
                    )]
                })?;
                let decl = class.method(method).ok_or_else(|| {
                    vec![Diagnostic::reject(
                        "CAP-NO-METHOD",
                        span.clone(),
                        format!("class `{}` has no method `{method}`", class.name),
                    )]
                })?;
                let Some(required) = decl.receiver else {
                    return Err(vec![Diagnostic::reject(
                        "CAP-NO-METHOD",
                        span.clone(),
                        format!("method `{method}` takes no receiver"),
                    )]);
                };
                if !sub_qualifier(recv_ty.qualifier, required) {
                    return Err(vec![Diagnostic::reject(
                        "CAP-SUBQ",
                        span.clone(),
                        format!(
                            "receiver `{recv}` is {}, method requires {required}",
                            recv_ty.qualifier
                        ),
                    )]);
                }
                decl
            }
            None => {
                let Some((_, decl)) = self.program.bare_method(method) else {
                    return Err(vec![Diagnostic::reject(
                        "CAP-NO-METHOD",
                        span.clone(),
                        format!("no unique receiver-less method `{method}`"),
                    )]);
                };
                decl
            }
        };
        if args.len() != decl.params.len() {
            return Err(vec![Diagnostic::reject(
                "CAP-ARITY",
                span.clone(),
                format!("method `{method}` takes {} arguments, got {}", decl.params.len(), args.len()),
            )]);
        }
        for (arg, param) in args.iter().zip(&decl.params) {
            let arg_ty = self.read_var(&mut env, arg, span)?;
            if arg_ty.class != param.ty.class {
                return Err(vec![Diagnostic::reject(
                    "CAP-CLASS",
                    span.clone(),
                    format!("argument `{arg}` is {}, parameter wants {}", arg_ty.class, param.ty.class),
                )]);
            }
            if !sub_qualifier(arg_ty.qualifier, param.ty.qualifier) {
                return Err(vec![Diagnostic::reject(
                    "CAP-SUBQ",
                    span.clone(),
                    format!(
                        "argument `{arg}` is {}, parameter wants {}",
                        arg_ty.qualifier, param.ty.qualifier
                    ),
                )]);
            }
        }
        if let Some(t) = target {
            self.bind_target(&mut env, t, decl.ret.clone(), span)?;
        }
        Ok(env)
    }

    // -- helpers ------------------------------------------------------------

    fn lookup(&self, env: &TypeEnv, name: &str, span: &Span) -> Result<QualType, Vec<Diagnostic>> {
        match env.lookup(name) {
            Ok(ty) => Ok(ty.clone()),
            Err(LookupError::Unbound) => Err(vec![Diagnostic::reject(
                "CAP-UNBOUND",
                span.clone(),
                format!("`{name}` is not bound"),
            )]),
            Err(LookupError::Consumed) => Err(vec![Diagnostic::reject(
                "CAP-CONSUMED",
                span.clone(),
                format!("isolated `{name}` was already consumed"),
            )]),
        }
    }

    /// Use a variable as an r-value; isolated sources are destructively
    /// read.
    fn read_var(&self, env: &mut TypeEnv, name: &str, span: &Span) -> Result<QualType, Vec<Diagnostic>> {
        let ty = self.lookup(env, name, span)?;
        if ty.qualifier == Qualifier::Isolated {
            env.consume(name);
        }
        Ok(ty)
    }

    /// Assign into `target`: an existing binding keeps its declared type
    /// and requires `source <= target`; an unbound target is added
    /// flow-sensitively at the source type.
    fn bind_target(
        &self,
        env: &mut TypeEnv,
        target: &str,
        ty: QualType,
        span: &Span,
    ) -> Result<(), Vec<Diagnostic>> {
        if let Some(existing) = env.binding(target).cloned() {
            if existing.class != ty.class {
                return Err(vec![Diagnostic::reject(
                    "CAP-CLASS",
                    span.clone(),
                    format!("`{target}` holds {}, got {}", existing.class, ty.class),
                )]);
            }
            if !sub_qualifier(ty.qualifier, existing.qualifier) {
                return Err(vec![Diagnostic::reject(
                    "CAP-SUBQ",
                    span.clone(),
                    format!("{} is not a subqualifier of {}", ty.qualifier, existing.qualifier),
                )]);
            }
            env.bind(target.to_string(), existing);
        } else {
            env.bind(target.to_string(), ty);
        }
        Ok(())
    }

    fn field_decl(
        &self,
        class: &str,
        field: &str,
        span: &Span,
    ) -> Result<QualType, Vec<Diagnostic>> {
        let Some(class_decl) = self.program.class(class) else {
            return Err(vec![Diagnostic::reject(
                "CAP-NO-CLASS",
                span.clone(),
                format!("unknown class `{class}`"),
            )]);
        };
        let Some(field_decl) = class_decl.field(field) else {
            return Err(vec![Diagnostic::reject(
                "CAP-NO-FIELD",
                span.clone(),
                format!("class `{class}` has no field `{field}`"),
            )]);
        };
        Ok(field_decl.ty.clone())
    }
}

fn method_env(class: &str, method: &MethodDecl) -> TypeEnv {
    let mut env = TypeEnv::new();
    if let Some(q) = method.receiver {
        env.bind("self", QualType { qualifier: q, class: class.to_string() });
    }
    for p in &method.params {
        env.bind(p.name.clone(), p.ty.clone());
    }
    env
}

/// Frame an environment against a command: the restriction to the command's
/// free variables, and the rest.
pub fn frame_env(env: &TypeEnv, c: &Command) -> (TypeEnv, TypeEnv) {
    env.frame_for(c)
}
