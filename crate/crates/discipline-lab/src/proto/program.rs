//! Whole-program checking for the prototype calculus.
//!
//! Constructor inference is syntactic: `this.f = e` in a constructor body
//! adds `f` to the instance's writable row; `F.prototype.m = function..`
//! adds `m` to the instance's readable row and folds the method's receiver
//! demands into the prototype's method-accessed rows. A method's demands
//! are computed by walking `this.f` reads and writes, closed over local
//! `this.m()` calls in one fixpoint pass; passing `this` anywhere else
//! makes the receiver escape and is rejected.

use super::ops::{
    attach_method, check_field_read, check_field_write, check_method_call, concretize, ProtoError,
};
use super::parser::{Constructor, MStmtKind, PExpr, ProtoProgram, StmtKind};
use super::types::{FieldType, MethodType, ObjType, Row};
use crate::diag::{Diagnostic, Span};
use indexmap::IndexMap;
use std::collections::{BTreeMap, BTreeSet};

/// Types inferred for one constructor, in both checker modes.
#[derive(Debug, Clone)]
pub struct InferredCtor {
    /// `{r | w | mr | mw}` for fresh instances — concretized at `new`.
    pub instance_prototypal: ObjType,
    /// The prototype object's own type: all methods, no data.
    pub prototype_type: ObjType,
    /// Effect-variant instance type: methods carry write effects.
    pub instance_effect: ObjType,
    /// Effect-variant prototype type.
    pub prototype_effect: ObjType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtoMode {
    /// Concretization and NC tags.
    Layout,
    /// Per-method write effects and the `wr_eff ⊆ w` call check.
    Effect,
}

#[derive(Debug, Default)]
struct MethodFacts {
    reads_data: BTreeSet<String>,
    writes: BTreeSet<String>,
    local_calls: BTreeSet<String>,
    ret: Option<RetShape>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum RetShape {
    Number,
    /// `return this.m()` — resolves to the callee's return type.
    OfMethod(String),
}

/// Infer per-constructor types; diagnostics cover escapes, unsupported
/// values, unknown local methods, and attachment violations.
pub fn infer_constructors(
    program: &ProtoProgram,
) -> (IndexMap<String, InferredCtor>, Vec<Diagnostic>) {
    let mut out = IndexMap::new();
    let mut diags = Vec::new();
    for ctor in &program.constructors {
        let inferred = infer_one(ctor, &mut diags);
        out.insert(ctor.name.clone(), inferred);
    }
    (out, diags)
}

fn infer_one(ctor: &Constructor, diags: &mut Vec<Diagnostic>) -> InferredCtor {
    // constructor writes populate the instance's writable row
    let mut instance_w = Row::new();
    for (field, value, span) in &ctor.ctor_writes {
        match value {
            PExpr::Num(_) => {}
            PExpr::Var(name) if ctor.params.contains(name) => {}
            _ => diags.push(Diagnostic::reject(
                "PL-VALUE",
                span.clone(),
                format!("constructor field `{field}` must be initialized from a number"),
            )),
        }
        instance_w.insert(field.clone(), FieldType::Number);
    }

    // direct facts per method
    let mut facts: BTreeMap<String, MethodFacts> = BTreeMap::new();
    for method in &ctor.methods {
        let mut f = MethodFacts::default();
        for stmt in &method.body {
            match &stmt.kind {
                MStmtKind::SetThisField { field, value } => {
                    f.writes.insert(field.clone());
                    walk_expr(value, ctor, &method.params, &stmt.span, &mut f, diags);
                }
                MStmtKind::IncThisField { field } => {
                    f.writes.insert(field.clone());
                    f.reads_data.insert(field.clone());
                }
                MStmtKind::ExprStmt(e) => walk_expr(e, ctor, &method.params, &stmt.span, &mut f, diags),
                MStmtKind::Return(e) => {
                    if f.ret.is_none() {
                        f.ret = ret_shape(e, ctor, &method.params);
                    }
                    walk_expr(e, ctor, &method.params, &stmt.span, &mut f, diags);
                }
            }
        }
        facts.insert(method.name.clone(), f);
    }

    // close reads/writes over local calls (one reachability pass)
    let method_names: BTreeSet<String> = facts.keys().cloned().collect();
    let mut closed: BTreeMap<String, (BTreeSet<String>, BTreeSet<String>, BTreeSet<String>)> =
        BTreeMap::new();
    for method in &ctor.methods {
        let mut reachable = BTreeSet::new();
        let mut stack = vec![method.name.clone()];
        while let Some(m) = stack.pop() {
            if !reachable.insert(m.clone()) {
                continue;
            }
            if let Some(f) = facts.get(&m) {
                for callee in &f.local_calls {
                    if !method_names.contains(callee) {
                        diags.push(Diagnostic::reject(
                            "NO-SUCH-METHOD",
                            method.span.clone(),
                            format!("`{}` calls undeclared prototype method `{callee}`", method.name),
                        ));
                    } else if !reachable.contains(callee) {
                        stack.push(callee.clone());
                    }
                }
            }
        }
        let mut reads = BTreeSet::new();
        let mut writes = BTreeSet::new();
        let mut method_reads = BTreeSet::new();
        for m in &reachable {
            if let Some(f) = facts.get(m) {
                reads.extend(f.reads_data.iter().cloned());
                writes.extend(f.writes.iter().cloned());
                method_reads.extend(f.local_calls.iter().filter(|c| method_names.contains(*c)).cloned());
            }
        }
        closed.insert(method.name.clone(), (reads, writes, method_reads));
    }

    // resolve return types (iterate to cover return-of-call chains)
    let mut rets: BTreeMap<String, Option<FieldType>> = BTreeMap::new();
    for _ in 0..=ctor.methods.len() {
        for method in &ctor.methods {
            let shape = facts[&method.name].ret.clone();
            let resolved = match shape {
                None => None,
                Some(RetShape::Number) => Some(FieldType::Number),
                Some(RetShape::OfMethod(callee)) => rets.get(&callee).cloned().flatten(),
            };
            rets.insert(method.name.clone(), resolved);
        }
    }

    let sig = |name: &str, effect: bool| -> MethodType {
        let params = vec![FieldType::Number; ctor.methods.iter().find(|m| m.name == name).map_or(0, |m| m.params.len())];
        let ret = rets.get(name).cloned().flatten();
        if effect {
            MethodType::with_effect(params, ret, closed[name].1.clone())
        } else {
            MethodType::new(params, ret)
        }
    };

    // method-accessed rows shared by the instance and the prototype
    let mut mw = Row::new();
    let mut mr = Row::new();
    for (_, (reads, writes, method_reads)) in &closed {
        for f in writes {
            mw.insert(f.clone(), FieldType::Number);
        }
        for f in reads {
            if !mw.contains_key(f) {
                mr.insert(f.clone(), FieldType::Number);
            }
        }
        for m in method_reads {
            if !mw.contains_key(m) {
                mr.insert(m.clone(), FieldType::Method(sig(m, false)));
            }
        }
    }
    // a field both read and written lands in mw only
    for written in mw.keys() {
        mr.remove(written);
    }

    // attach each method against the prototypal bound
    let mut proto = ObjType::prototypal(Row::new(), Row::new(), mr.clone(), mw.clone());
    for method in &ctor.methods {
        let (reads, writes, method_reads) = &closed[&method.name];
        let mut demand_r = Row::new();
        for f in reads {
            if !writes.contains(f) {
                demand_r.insert(f.clone(), FieldType::Number);
            }
        }
        for m in method_reads {
            if !writes.contains(m) {
                demand_r.insert(m.clone(), FieldType::Method(sig(m, false)));
            }
        }
        let mut demand_w = Row::new();
        for f in writes {
            demand_w.insert(f.clone(), FieldType::Number);
        }
        let assumed = ObjType::concrete(demand_r, demand_w);
        let method_sig = FieldType::Method(sig(&method.name, false));
        match attach_method(&proto, &method.name, &assumed, &method_sig) {
            Ok(updated) => proto = updated,
            Err(e) => diags.push(Diagnostic::reject(e.rule(), method.span.clone(), e.to_string())),
        }
    }

    let methods_r = proto.r.clone();
    let mut effect_r = Row::new();
    for method in &ctor.methods {
        if methods_r.contains_key(&method.name) {
            effect_r.insert(method.name.clone(), FieldType::Method(sig(&method.name, true)));
        }
    }

    // drop data fields that collide with attached methods from the
    // prototypal instance row (the attachment already reported it)
    let mut w_clean = instance_w.clone();
    for m in methods_r.keys() {
        w_clean.remove(m);
    }

    InferredCtor {
        instance_prototypal: ObjType::prototypal(methods_r.clone(), w_clean.clone(), mr.clone(), mw.clone()),
        prototype_type: ObjType::prototypal(methods_r, Row::new(), mr, mw),
        instance_effect: ObjType::concrete(effect_r.clone(), w_clean),
        prototype_effect: ObjType::concrete(effect_r, Row::new()),
    }
}

fn ret_shape(e: &PExpr, ctor: &Constructor, params: &[String]) -> Option<RetShape> {
    match e {
        PExpr::Num(_) => Some(RetShape::Number),
        PExpr::Var(name) if params.contains(name) => Some(RetShape::Number),
        // data fields hold numbers
        PExpr::ThisField(f) if !ctor.methods.iter().any(|m| m.name == *f) => Some(RetShape::Number),
        PExpr::ThisCall(m, _) => Some(RetShape::OfMethod(m.clone())),
        _ => None,
    }
}

fn walk_expr(
    e: &PExpr,
    ctor: &Constructor,
    params: &[String],
    span: &Span,
    facts: &mut MethodFacts,
    diags: &mut Vec<Diagnostic>,
) {
    match e {
        PExpr::Num(_) => {}
        PExpr::Var(name) => {
            if !params.contains(name) {
                diags.push(Diagnostic::reject(
                    "PL-VALUE",
                    span.clone(),
                    format!("only parameters and `this` members may appear in method bodies, not `{name}`"),
                ));
            }
        }
        PExpr::This => {
            diags.push(Diagnostic::reject(
                "ESCAPE",
                span.clone(),
                "the receiver escapes the method; receiver-escape is not supported".to_string(),
            ));
        }
        PExpr::ThisField(f) => {
            if ctor.methods.iter().any(|m| m.name == *f) {
                facts.local_calls.insert(f.clone());
            } else {
                facts.reads_data.insert(f.clone());
            }
        }
        PExpr::ThisCall(m, args) => {
            facts.local_calls.insert(m.clone());
            for a in args {
                walk_expr(a, ctor, params, span, facts, diags);
            }
        }
        PExpr::VarField(..) | PExpr::VarCall(..) | PExpr::ProtoCall(..) | PExpr::New(..) => {
            diags.push(Diagnostic::reject(
                "PL-VALUE",
                span.clone(),
                "method bodies access state through `this` only".to_string(),
            ));
        }
    }
}

// -- top-level statement checking ---------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum VTy {
    Num,
    Obj(ObjType),
    /// a call with no return value
    Void,
    /// error already reported; suppress cascades
    Poison,
}

struct StmtChecker<'a> {
    ctors: &'a IndexMap<String, InferredCtor>,
    mode: ProtoMode,
    env: IndexMap<String, VTy>,
    diags: Vec<Diagnostic>,
}

impl<'a> StmtChecker<'a> {
    fn reject(&mut self, rule: &str, span: &Span, message: String) {
        self.diags.push(Diagnostic::reject(rule, span.clone(), message));
    }

    fn proto_err(&mut self, e: ProtoError, span: &Span) {
        self.diags.push(Diagnostic::reject(e.rule(), span.clone(), e.to_string()));
    }

    fn eval(&mut self, e: &PExpr, span: &Span) -> VTy {
        match e {
            PExpr::Num(_) => VTy::Num,
            PExpr::Var(name) => match self.env.get(name) {
                Some(v) => v.clone(),
                None => {
                    self.reject("ABSENT", span, format!("unknown variable `{name}`"));
                    VTy::Poison
                }
            },
            PExpr::New(ctor_name) => match self.ctors.get(ctor_name) {
                None => {
                    self.reject("ABSENT", span, format!("unknown constructor `{ctor_name}`"));
                    VTy::Poison
                }
                Some(inferred) => match self.mode {
                    ProtoMode::Layout => match concretize(&inferred.instance_prototypal) {
                        Ok(nc) => VTy::Obj(nc),
                        Err(err) => {
                            self.proto_err(err, span);
                            VTy::Poison
                        }
                    },
                    ProtoMode::Effect => VTy::Obj(inferred.instance_effect.clone()),
                },
            },
            PExpr::VarField(obj, field) => match self.eval(&PExpr::Var(obj.clone()), span) {
                VTy::Obj(t) => match check_field_read(&t, field) {
                    Ok(FieldType::Number) => VTy::Num,
                    Ok(FieldType::Method(_)) => {
                        self.reject(
                            "PL-VALUE",
                            span,
                            format!("method `{field}` is not a first-class value"),
                        );
                        VTy::Poison
                    }
                    Err(err) => {
                        self.proto_err(err, span);
                        VTy::Poison
                    }
                },
                VTy::Poison => VTy::Poison,
                _ => {
                    self.reject("ABSENT", span, format!("`{obj}` is not an object"));
                    VTy::Poison
                }
            },
            PExpr::VarCall(obj, method, args) => {
                let recv = self.eval(&PExpr::Var(obj.clone()), span);
                self.call(recv, method, args, span)
            }
            PExpr::ProtoCall(ctor_name, method, args) => match self.ctors.get(ctor_name) {
                None => {
                    self.reject("ABSENT", span, format!("unknown constructor `{ctor_name}`"));
                    VTy::Poison
                }
                Some(inferred) => {
                    let recv = match self.mode {
                        ProtoMode::Layout => inferred.prototype_type.clone(),
                        ProtoMode::Effect => inferred.prototype_effect.clone(),
                    };
                    self.call(VTy::Obj(recv), method, args, span)
                }
            },
            PExpr::This | PExpr::ThisField(_) | PExpr::ThisCall(..) => {
                // unreachable: the parser confines `this` to method bodies
                self.reject("ESCAPE", span, "`this` outside a method body".to_string());
                VTy::Poison
            }
        }
    }

    fn call(&mut self, recv: VTy, method: &str, args: &[PExpr], span: &Span) -> VTy {
        let mut arg_types = Vec::new();
        let mut poisoned = false;
        for a in args {
            match self.eval(a, span) {
                VTy::Num => arg_types.push(FieldType::Number),
                VTy::Poison => poisoned = true,
                VTy::Obj(_) | VTy::Void => {
                    self.reject(
                        "ARG-MISMATCH",
                        span,
                        format!("arguments of `{method}` must be numbers"),
                    );
                    poisoned = true;
                }
            }
        }
        match recv {
            VTy::Obj(t) if !poisoned => match check_method_call(&t, method, &arg_types) {
                Ok(Some(FieldType::Number)) => VTy::Num,
                Ok(Some(_)) => VTy::Poison,
                Ok(None) => VTy::Void,
                Err(err) => {
                    self.proto_err(err, span);
                    VTy::Poison
                }
            },
            VTy::Obj(_) | VTy::Poison => VTy::Poison,
            _ => {
                self.reject("ABSENT", span, "call receiver is not an object".to_string());
                VTy::Poison
            }
        }
    }

    fn run(&mut self, program: &ProtoProgram) {
        for stmt in &program.statements {
            match &stmt.kind {
                StmtKind::VarDecl { name, init } => {
                    let v = self.eval(init, &stmt.span);
                    if v == VTy::Void {
                        self.reject(
                            "PL-VALUE",
                            &stmt.span,
                            format!("`{name}` is initialized from a call that returns nothing"),
                        );
                        self.env.insert(name.clone(), VTy::Poison);
                    } else {
                        self.env.insert(name.clone(), v);
                    }
                }
                StmtKind::AssignField { obj, field, value } => {
                    let v = self.eval(value, &stmt.span);
                    match self.eval(&PExpr::Var(obj.clone()), &stmt.span) {
                        VTy::Obj(t) => {
                            if !check_field_write(&t, field) {
                                self.reject(
                                    "ABSENT",
                                    &stmt.span,
                                    format!("`{field}` is not a writable field of `{obj}`"),
                                );
                            } else if !matches!(v, VTy::Num | VTy::Poison) {
                                self.reject(
                                    "PL-VALUE",
                                    &stmt.span,
                                    format!("field `{field}` holds numbers"),
                                );
                            }
                        }
                        VTy::Poison => {}
                        _ => self.reject("ABSENT", &stmt.span, format!("`{obj}` is not an object")),
                    }
                }
                StmtKind::ExprStmt(e) => {
                    self.eval(e, &stmt.span);
                }
            }
        }
    }
}

/// Check a program under the fixed-layout (NC) discipline.
pub fn check_proto_program(program: &ProtoProgram) -> Vec<Diagnostic> {
    check_with_mode(program, ProtoMode::Layout)
}

/// Check a program under the effect-variant discipline.
pub fn check_proto_program_effect(program: &ProtoProgram) -> Vec<Diagnostic> {
    check_with_mode(program, ProtoMode::Effect)
}

fn check_with_mode(program: &ProtoProgram, mode: ProtoMode) -> Vec<Diagnostic> {
    let (ctors, mut diags) = infer_constructors(program);
    let mut checker = StmtChecker { ctors: &ctors, mode, env: IndexMap::new(), diags: Vec::new() };
    checker.run(program);
    diags.extend(checker.diags);
    diags
}
