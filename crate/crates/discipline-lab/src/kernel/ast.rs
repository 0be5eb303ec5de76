//! Abstract syntax for the kernel imperative object language.
//!
//! Commands are statements; expressions are restricted to variables, field
//! paths, allocations, and calls. Binders are made distinct by the parser
//! (shadowed `let` binders get a `#n` suffix), so checkers can assume
//! distinct names. Structural equality ignores source spans.

use crate::diag::Span;
use std::fmt;

/// Reference-capability annotation carried by every reference type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qualifier {
    Isolated,
    Readable,
    Writable,
    Immutable,
}

impl Qualifier {
    pub const ALL: [Qualifier; 4] =
        [Qualifier::Isolated, Qualifier::Readable, Qualifier::Writable, Qualifier::Immutable];

    pub fn keyword(self) -> &'static str {
        match self {
            Qualifier::Isolated => "isolated",
            Qualifier::Readable => "readable",
            Qualifier::Writable => "writable",
            Qualifier::Immutable => "immutable",
        }
    }
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Thread-effect annotation on a method under the UI discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectAnnot {
    Safe,
    Ui,
}

impl EffectAnnot {
    pub fn keyword(self) -> &'static str {
        match self {
            EffectAnnot::Safe => "safe",
            EffectAnnot::Ui => "ui",
        }
    }
}

pub type Ident = String;

/// A qualified class type, e.g. `writable T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualType {
    pub qualifier: Qualifier,
    pub class: Ident,
}

impl QualType {
    pub fn new(qualifier: Qualifier, class: impl Into<Ident>) -> Self {
        QualType { qualifier, class: class.into() }
    }
}

impl fmt::Display for QualType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.qualifier, self.class)
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    pub classes: Vec<ClassDecl>,
    pub main: Command,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.classes == other.classes && self.main == other.main
    }
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Resolve a bare (receiver-less) call: the method must be declared
    /// without a receiver and its name must be unique across all classes.
    pub fn bare_method(&self, name: &str) -> Option<(&ClassDecl, &MethodDecl)> {
        let mut found = None;
        for class in &self.classes {
            for method in &class.methods {
                if method.name == name && method.receiver.is_none() {
                    if found.is_some() {
                        return None; // ambiguous
                    }
                    found = Some((class, method));
                }
            }
        }
        found
    }
}

#[derive(Debug, Clone)]
pub struct ClassDecl {
    pub name: Ident,
    /// `ui class` marks every instance as a UI-thread object (methods
    /// default to the `ui` annotation).
    pub is_ui: bool,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub span: Span,
}

impl PartialEq for ClassDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.is_ui == other.is_ui
            && self.fields == other.fields
            && self.methods == other.methods
    }
}

impl ClassDecl {
    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: Ident,
    pub ty: QualType,
}

#[derive(Debug, Clone)]
pub struct MethodDecl {
    pub name: Ident,
    /// Qualifier required of the receiver; `None` for receiver-less methods
    /// (callable only in bare form `m(args)`).
    pub receiver: Option<Qualifier>,
    pub params: Vec<ParamDecl>,
    pub ret: QualType,
    pub annot: Option<EffectAnnot>,
    pub body: Command,
    pub span: Span,
}

impl PartialEq for MethodDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.receiver == other.receiver
            && self.params == other.params
            && self.ret == other.ret
            && self.annot == other.annot
            && self.body == other.body
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: Ident,
    pub ty: QualType,
}

/// A flow-sensitive statement. Equality ignores spans.
#[derive(Debug, Clone)]
pub struct Command {
    pub kind: CommandKind,
    pub span: Span,
}

impl PartialEq for Command {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Command {
    pub fn new(kind: CommandKind, span: Span) -> Self {
        Command { kind, span }
    }

    /// Command with a synthetic span, for programmatic construction.
    pub fn of(kind: CommandKind) -> Self {
        Command { kind, span: Span::synthetic() }
    }

    pub fn skip() -> Self {
        Command::of(CommandKind::Skip)
    }

    pub fn seq(first: Command, second: Command) -> Self {
        Command::of(CommandKind::Seq(Box::new(first), Box::new(second)))
    }

    pub fn par(left: Command, right: Command) -> Self {
        Command::of(CommandKind::Par(Box::new(left), Box::new(right)))
    }

    pub fn var_assign(target: impl Into<Ident>, source: impl Into<Ident>) -> Self {
        Command::of(CommandKind::VarAssign { target: target.into(), source: source.into() })
    }

    pub fn field_write(base: impl Into<Ident>, field: impl Into<Ident>, source: impl Into<Ident>) -> Self {
        Command::of(CommandKind::FieldWrite {
            base: base.into(),
            field: field.into(),
            source: source.into(),
        })
    }

    pub fn field_read(target: impl Into<Ident>, base: impl Into<Ident>, field: impl Into<Ident>) -> Self {
        Command::of(CommandKind::FieldRead {
            target: target.into(),
            base: base.into(),
            field: field.into(),
        })
    }

    pub fn alloc(target: impl Into<Ident>, class: impl Into<Ident>) -> Self {
        Command::of(CommandKind::Alloc { target: target.into(), class: class.into() })
    }

    pub fn let_in(var: impl Into<Ident>, ty: QualType, body: Command) -> Self {
        Command::of(CommandKind::Let { var: var.into(), ty, body: Box::new(body) })
    }

    pub fn recover(target: impl Into<Ident>, body: Command) -> Self {
        Command::of(CommandKind::Recover { target: target.into(), body: Box::new(body) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandKind {
    Skip,
    /// `x = y`
    VarAssign { target: Ident, source: Ident },
    /// `x = y.f`
    FieldRead { target: Ident, base: Ident, field: Ident },
    /// `x.f := y`
    FieldWrite { base: Ident, field: Ident, source: Ident },
    /// `x = new C()`
    Alloc { target: Ident, class: Ident },
    /// `let x: q C { body }` — scoped declaration, no initializer.
    Let { var: Ident, ty: QualType, body: Box<Command> },
    Seq(Box<Command>, Box<Command>),
    /// `par { C1 } { C2 }`
    Par(Box<Command>, Box<Command>),
    /// `recover x { body }` — promotes `x` in the body's output.
    Recover { target: Ident, body: Box<Command> },
    /// `[x =] [recv.]m(args)`
    Call {
        target: Option<Ident>,
        receiver: Option<Ident>,
        method: Ident,
        args: Vec<Ident>,
    },
    /// `spawn { body }` — run on a background thread (UI discipline).
    SpawnBackground(Box<Command>),
    /// `async_ui { body }` — send back to the UI thread (UI discipline).
    AsyncUi(Box<Command>),
}
