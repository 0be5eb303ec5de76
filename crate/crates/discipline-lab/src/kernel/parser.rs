//! Recursive-descent parser for `.kl` sources.
//!
//! Parsing also performs deterministic alpha-renaming: a `let` binder that
//! shadows an enclosing binder (or method parameter) is renamed to `x#n`,
//! where `n` is the smallest positive integer making the name unused in the
//! whole program. Checkers downstream assume distinct binder names.

use super::ast::*;
use super::lexer::{lex, LexError, TokKind, Token};
use crate::diag::Span;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("parse error at {line}:{col}: found {found}, expected {expected}")]
    Unexpected {
        line: u32,
        col: u32,
        found: String,
        expected: String,
    },
}

impl ParseError {
    pub fn position(&self) -> (u32, u32) {
        match self {
            ParseError::Lex(e) => (e.line, e.col),
            ParseError::Unexpected { line, col, .. } => (*line, *col),
        }
    }
}

pub fn parse(source: &str) -> Result<Program, ParseError> {
    parse_named(source, "<input>")
}

/// Parse with an explicit file name recorded in spans.
pub fn parse_named(source: &str, file: &str) -> Result<Program, ParseError> {
    let tokens = lex(source)?;
    let mut parser = Parser { tokens, pos: 0, file: file.to_string() };
    let mut program = parser.program()?;
    alpha_rename(&mut program);
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    file: String,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> TokKind {
        self.tokens[self.pos].kind
    }

    fn peek2_kind(&self) -> TokKind {
        self.tokens.get(self.pos + 1).map_or(TokKind::Eof, |t| t.kind)
    }

    fn peek3_kind(&self) -> TokKind {
        self.tokens.get(self.pos + 2).map_or(TokKind::Eof, |t| t.kind)
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn span_of(&self, tok: &Token) -> Span {
        Span::new(self.file.clone(), tok.line, tok.col, tok.len().max(1))
    }

    fn here(&self) -> Span {
        self.span_of(self.peek())
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let tok = self.peek();
        let found = if tok.kind == TokKind::Eof { "end of input".to_string() } else { format!("`{}`", tok.text) };
        Err(ParseError::Unexpected {
            line: tok.line,
            col: tok.col,
            found,
            expected: expected.to_string(),
        })
    }

    fn expect(&mut self, kind: TokKind, what: &str) -> Result<Token, ParseError> {
        if self.peek_kind() == kind {
            Ok(self.advance())
        } else {
            self.error(what)
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        if self.peek_kind() == TokKind::Ident {
            Ok(self.advance().text)
        } else {
            self.error(what)
        }
    }

    fn qualifier(&mut self) -> Result<Qualifier, ParseError> {
        let q = match self.peek_kind() {
            TokKind::KwIsolated => Qualifier::Isolated,
            TokKind::KwReadable => Qualifier::Readable,
            TokKind::KwWritable => Qualifier::Writable,
            TokKind::KwImmutable => Qualifier::Immutable,
            _ => return self.error("a qualifier (isolated/readable/writable/immutable)"),
        };
        self.advance();
        Ok(q)
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut classes = Vec::new();
        loop {
            match self.peek_kind() {
                TokKind::KwClass => classes.push(self.class_decl(false)?),
                TokKind::KwUi if self.peek2_kind() == TokKind::KwClass => {
                    self.advance();
                    classes.push(self.class_decl(true)?);
                }
                _ => break,
            }
        }
        let main = if self.peek_kind() == TokKind::Eof {
            Command::new(CommandKind::Skip, self.here())
        } else {
            self.command()?
        };
        self.expect(TokKind::Eof, "end of input")?;
        Ok(Program { classes, main })
    }

    fn class_decl(&mut self, is_ui: bool) -> Result<ClassDecl, ParseError> {
        let kw = self.expect(TokKind::KwClass, "`class`")?;
        let name = self.ident("class name")?;
        self.expect(TokKind::LBrace, "`{`")?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        loop {
            match self.peek_kind() {
                TokKind::KwField => {
                    self.advance();
                    let fname = self.ident("field name")?;
                    self.expect(TokKind::Colon, "`:`")?;
                    let qualifier = self.qualifier()?;
                    let class = self.ident("class name")?;
                    self.expect(TokKind::Semi, "`;`")?;
                    fields.push(FieldDecl { name: fname, ty: QualType { qualifier, class } });
                }
                TokKind::KwMethod => methods.push(self.method_decl(None)?),
                TokKind::KwSafe => {
                    self.advance();
                    methods.push(self.method_decl(Some(EffectAnnot::Safe))?);
                }
                TokKind::KwUi => {
                    self.advance();
                    methods.push(self.method_decl(Some(EffectAnnot::Ui))?);
                }
                TokKind::RBrace => {
                    self.advance();
                    break;
                }
                _ => return self.error("`field`, `method`, an annotation, or `}`"),
            }
        }
        Ok(ClassDecl { name, is_ui, fields, methods, span: self.span_of(&kw) })
    }

    fn method_decl(&mut self, annot: Option<EffectAnnot>) -> Result<MethodDecl, ParseError> {
        let kw = self.expect(TokKind::KwMethod, "`method`")?;
        let name = self.ident("method name")?;
        self.expect(TokKind::LParen, "`(`")?;
        let mut receiver = None;
        let mut params = Vec::new();
        if self.peek_kind() != TokKind::RParen {
            loop {
                if self.peek_kind() == TokKind::KwSelf {
                    if receiver.is_some() || !params.is_empty() {
                        return self.error("`self` only as the first parameter");
                    }
                    self.advance();
                    self.expect(TokKind::Colon, "`:`")?;
                    receiver = Some(self.qualifier()?);
                } else {
                    let pname = self.ident("parameter name")?;
                    self.expect(TokKind::Colon, "`:`")?;
                    let qualifier = self.qualifier()?;
                    let class = self.ident("class name")?;
                    params.push(ParamDecl { name: pname, ty: QualType { qualifier, class } });
                }
                if self.peek_kind() == TokKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(TokKind::RParen, "`)`")?;
        self.expect(TokKind::Colon, "`:`")?;
        let rq = self.qualifier()?;
        let rc = self.ident("class name")?;
        let body = self.block()?;
        Ok(MethodDecl {
            name,
            receiver,
            params,
            ret: QualType { qualifier: rq, class: rc },
            annot,
            body,
            span: self.span_of(&kw),
        })
    }

    /// `{ command? }` — an empty block is `skip`.
    fn block(&mut self) -> Result<Command, ParseError> {
        self.expect(TokKind::LBrace, "`{`")?;
        if self.peek_kind() == TokKind::RBrace {
            let span = self.here();
            self.advance();
            return Ok(Command::new(CommandKind::Skip, span));
        }
        let body = self.command()?;
        self.expect(TokKind::RBrace, "`}`")?;
        Ok(body)
    }

    /// Statements separated by `;` (optional after a `}`), right-folded
    /// into `Seq`.
    fn command(&mut self) -> Result<Command, ParseError> {
        let mut stmts = vec![self.statement()?];
        loop {
            if self.peek_kind() == TokKind::Semi {
                self.advance();
                if self.starts_statement() {
                    stmts.push(self.statement()?);
                } else {
                    break; // trailing semicolon
                }
            } else if self.starts_statement() {
                // separator elision is only allowed after a block-shaped
                // statement, which always ends in `}`
                if matches!(
                    stmts.last().map(|c| &c.kind),
                    Some(
                        CommandKind::Let { .. }
                            | CommandKind::Par(..)
                            | CommandKind::Recover { .. }
                            | CommandKind::SpawnBackground(..)
                            | CommandKind::AsyncUi(..)
                    )
                ) {
                    stmts.push(self.statement()?);
                } else {
                    return self.error("`;` between statements");
                }
            } else {
                break;
            }
        }
        let mut cmd = stmts.pop().expect("at least one statement");
        while let Some(prev) = stmts.pop() {
            let span = prev.span.clone();
            cmd = Command::new(CommandKind::Seq(Box::new(prev), Box::new(cmd)), span);
        }
        Ok(cmd)
    }

    fn starts_statement(&self) -> bool {
        matches!(
            self.peek_kind(),
            TokKind::KwSkip
                | TokKind::KwLet
                | TokKind::KwPar
                | TokKind::KwRecover
                | TokKind::KwSpawn
                | TokKind::KwAsyncUi
                | TokKind::Ident
        )
    }

    fn statement(&mut self) -> Result<Command, ParseError> {
        let span = self.here();
        match self.peek_kind() {
            TokKind::KwSkip => {
                self.advance();
                Ok(Command::new(CommandKind::Skip, span))
            }
            TokKind::KwLet => {
                self.advance();
                let var = self.ident("variable name")?;
                self.expect(TokKind::Colon, "`:`")?;
                let qualifier = self.qualifier()?;
                let class = self.ident("class name")?;
                let body = self.block()?;
                Ok(Command::new(
                    CommandKind::Let { var, ty: QualType { qualifier, class }, body: Box::new(body) },
                    span,
                ))
            }
            TokKind::KwPar => {
                self.advance();
                let left = self.block()?;
                let right = self.block()?;
                Ok(Command::new(CommandKind::Par(Box::new(left), Box::new(right)), span))
            }
            TokKind::KwRecover => {
                self.advance();
                let target = self.ident("variable name")?;
                let body = self.block()?;
                Ok(Command::new(CommandKind::Recover { target, body: Box::new(body) }, span))
            }
            TokKind::KwSpawn => {
                self.advance();
                let body = self.block()?;
                Ok(Command::new(CommandKind::SpawnBackground(Box::new(body)), span))
            }
            TokKind::KwAsyncUi => {
                self.advance();
                let body = self.block()?;
                Ok(Command::new(CommandKind::AsyncUi(Box::new(body)), span))
            }
            TokKind::Ident => self.ident_statement(span),
            _ => self.error("a statement"),
        }
    }

    /// Statements starting with an identifier:
    ///   `x = y` | `x = y.f` | `x = new C()` | `x = [r.]m(args)`
    ///   `x.f := y` | `x.m(args)` | `m(args)`
    fn ident_statement(&mut self, span: Span) -> Result<Command, ParseError> {
        match (self.peek2_kind(), self.peek3_kind()) {
            (TokKind::Eq, _) => {
                let target = self.ident("identifier")?;
                self.advance(); // `=`
                self.assignment_rhs(Some(target), span)
            }
            (TokKind::Dot, TokKind::Ident) => {
                let base = self.ident("identifier")?;
                self.advance(); // `.`
                let member = self.ident("member name")?;
                match self.peek_kind() {
                    TokKind::ColonEq => {
                        self.advance();
                        let source = self.ident("identifier")?;
                        Ok(Command::new(CommandKind::FieldWrite { base, field: member, source }, span))
                    }
                    TokKind::LParen => {
                        let args = self.call_args()?;
                        Ok(Command::new(
                            CommandKind::Call { target: None, receiver: Some(base), method: member, args },
                            span,
                        ))
                    }
                    _ => self.error("`:=` or `(`"),
                }
            }
            (TokKind::LParen, _) => {
                let method = self.ident("method name")?;
                let args = self.call_args()?;
                Ok(Command::new(CommandKind::Call { target: None, receiver: None, method, args }, span))
            }
            _ => self.error("`=`, `.`, or `(` after identifier"),
        }
    }

    fn assignment_rhs(&mut self, target: Option<String>, span: Span) -> Result<Command, ParseError> {
        if self.peek_kind() == TokKind::KwNew {
            self.advance();
            let class = self.ident("class name")?;
            self.expect(TokKind::LParen, "`(`")?;
            self.expect(TokKind::RParen, "`)`")?;
            let target = target.expect("alloc always has a target");
            return Ok(Command::new(CommandKind::Alloc { target, class }, span));
        }
        let first = self.ident("identifier")?;
        match self.peek_kind() {
            TokKind::Dot => {
                self.advance();
                let member = self.ident("member name")?;
                if self.peek_kind() == TokKind::LParen {
                    let args = self.call_args()?;
                    Ok(Command::new(
                        CommandKind::Call { target, receiver: Some(first), method: member, args },
                        span,
                    ))
                } else {
                    let target = target.expect("field read always has a target");
                    Ok(Command::new(CommandKind::FieldRead { target, base: first, field: member }, span))
                }
            }
            TokKind::LParen => {
                let args = self.call_args()?;
                Ok(Command::new(CommandKind::Call { target, receiver: None, method: first, args }, span))
            }
            _ => {
                let target = target.expect("assignment always has a target");
                Ok(Command::new(CommandKind::VarAssign { target, source: first }, span))
            }
        }
    }

    fn call_args(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect(TokKind::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek_kind() != TokKind::RParen {
            loop {
                args.push(self.ident("argument name")?);
                if self.peek_kind() == TokKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(TokKind::RParen, "`)`")?;
        Ok(args)
    }
}

// ---------------------------------------------------------------------------
// alpha-renaming
// ---------------------------------------------------------------------------

fn collect_idents_command(c: &Command, out: &mut HashSet<String>) {
    match &c.kind {
        CommandKind::Skip => {}
        CommandKind::VarAssign { target, source } => {
            out.insert(target.clone());
            out.insert(source.clone());
        }
        CommandKind::FieldRead { target, base, .. } => {
            out.insert(target.clone());
            out.insert(base.clone());
        }
        CommandKind::FieldWrite { base, source, .. } => {
            out.insert(base.clone());
            out.insert(source.clone());
        }
        CommandKind::Alloc { target, .. } => {
            out.insert(target.clone());
        }
        CommandKind::Let { var, body, .. } => {
            out.insert(var.clone());
            collect_idents_command(body, out);
        }
        CommandKind::Seq(a, b) | CommandKind::Par(a, b) => {
            collect_idents_command(a, out);
            collect_idents_command(b, out);
        }
        CommandKind::Recover { target, body } => {
            out.insert(target.clone());
            collect_idents_command(body, out);
        }
        CommandKind::Call { target, receiver, args, .. } => {
            if let Some(t) = target {
                out.insert(t.clone());
            }
            if let Some(r) = receiver {
                out.insert(r.clone());
            }
            for a in args {
                out.insert(a.clone());
            }
        }
        CommandKind::SpawnBackground(body) | CommandKind::AsyncUi(body) => {
            collect_idents_command(body, out)
        }
    }
}

struct Renamer {
    taken: HashSet<String>,
    /// scope stack of (original, current) binder names
    scopes: Vec<(String, String)>,
}

impl Renamer {
    fn resolve(&self, name: &str) -> String {
        for (orig, current) in self.scopes.iter().rev() {
            if orig == name {
                return current.clone();
            }
        }
        name.to_string()
    }

    fn in_scope(&self, name: &str) -> bool {
        self.scopes.iter().any(|(orig, _)| orig == name)
    }

    fn fresh(&mut self, base: &str) -> String {
        let mut n = 1;
        loop {
            let candidate = format!("{base}#{n}");
            if !self.taken.contains(&candidate) {
                self.taken.insert(candidate.clone());
                return candidate;
            }
            n += 1;
        }
    }

    fn rename(&mut self, c: &mut Command) {
        match &mut c.kind {
            CommandKind::Skip => {}
            CommandKind::VarAssign { target, source } => {
                *target = self.resolve(target);
                *source = self.resolve(source);
            }
            CommandKind::FieldRead { target, base, .. } => {
                *target = self.resolve(target);
                *base = self.resolve(base);
            }
            CommandKind::FieldWrite { base, source, .. } => {
                *base = self.resolve(base);
                *source = self.resolve(source);
            }
            CommandKind::Alloc { target, .. } => {
                *target = self.resolve(target);
            }
            CommandKind::Let { var, body, .. } => {
                let current = if self.in_scope(var) { self.fresh(var) } else { var.clone() };
                self.scopes.push((var.clone(), current.clone()));
                self.rename(body);
                self.scopes.pop();
                *var = current;
            }
            CommandKind::Seq(a, b) | CommandKind::Par(a, b) => {
                self.rename(a);
                self.rename(b);
            }
            CommandKind::Recover { target, body } => {
                *target = self.resolve(target);
                self.rename(body);
            }
            CommandKind::Call { target, receiver, args, .. } => {
                if let Some(t) = target {
                    *t = self.resolve(t);
                }
                if let Some(r) = receiver {
                    *r = self.resolve(r);
                }
                for a in args {
                    *a = self.resolve(a);
                }
            }
            CommandKind::SpawnBackground(body) | CommandKind::AsyncUi(body) => self.rename(body),
        }
    }
}

/// Rename shadowing `let` binders to `name#n`, smallest unused `n` first.
/// Method parameters and `self` open the outermost scope of each body.
pub fn alpha_rename(program: &mut Program) {
    let mut taken = HashSet::new();
    for class in &program.classes {
        for method in &class.methods {
            for p in &method.params {
                taken.insert(p.name.clone());
            }
            collect_idents_command(&method.body, &mut taken);
        }
    }
    collect_idents_command(&program.main, &mut taken);

    for class in &mut program.classes {
        for method in &mut class.methods {
            let mut renamer = Renamer { taken: taken.clone(), scopes: Vec::new() };
            for p in &method.params {
                renamer.scopes.push((p.name.clone(), p.name.clone()));
            }
            renamer.rename(&mut method.body);
        }
    }
    let mut renamer = Renamer { taken, scopes: Vec::new() };
    renamer.rename(&mut program.main);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_par_of_assign_and_skip() {
        let p = parse("par { y = z } { skip }").unwrap();
        assert_eq!(p.main, Command::par(Command::var_assign("y", "z"), Command::skip()));
    }

    #[test]
    fn empty_source_is_skip_main() {
        let p = parse("").unwrap();
        assert_eq!(p.main, Command::skip());
        assert!(p.classes.is_empty());
    }

    #[test]
    fn parses_recover_with_bare_call() {
        let p = parse("recover z { z = RandomChoice(x, y) }").unwrap();
        assert_eq!(
            p.main,
            Command::recover(
                "z",
                Command::of(CommandKind::Call {
                    target: Some("z".into()),
                    receiver: None,
                    method: "RandomChoice".into(),
                    args: vec!["x".into(), "y".into()],
                })
            )
        );
    }

    #[test]
    fn shadowed_let_binder_is_renamed() {
        let p = parse("let x: writable T { let x: readable T { x = w }; y = x }").unwrap();
        let CommandKind::Let { var, body, .. } = &p.main.kind else { panic!() };
        assert_eq!(var, "x");
        let CommandKind::Seq(inner_let, after) = &body.kind else { panic!() };
        let CommandKind::Let { var: inner, body: inner_body, .. } = &inner_let.kind else { panic!() };
        assert_eq!(inner, "x#1");
        let CommandKind::VarAssign { target, .. } = &inner_body.kind else { panic!() };
        assert_eq!(target, "x#1");
        // the use after the inner let still refers to the outer binder
        let CommandKind::VarAssign { source, .. } = &after.kind else { panic!() };
        assert_eq!(source, "x");
    }

    #[test]
    fn rename_avoids_existing_suffixed_names() {
        // `x#1` already occurs, so the shadowed binder becomes `x#2`
        let p = parse("let x: writable T { a = x#1; let x: readable T { skip } }").unwrap();
        let CommandKind::Let { body, .. } = &p.main.kind else { panic!() };
        let CommandKind::Seq(_, inner) = &body.kind else { panic!() };
        let CommandKind::Let { var, .. } = &inner.kind else { panic!() };
        assert_eq!(var, "x#2");
    }

    #[test]
    fn parses_class_with_field_and_method() {
        let src = "ui class Label { field f: writable T; ui method setText(self: writable, s: readable Str): writable Unit { skip } } skip";
        let p = parse(src).unwrap();
        assert_eq!(p.classes.len(), 1);
        let c = &p.classes[0];
        assert!(c.is_ui);
        assert_eq!(c.fields[0].name, "f");
        let m = &c.methods[0];
        assert_eq!(m.receiver, Some(Qualifier::Writable));
        assert_eq!(m.annot, Some(EffectAnnot::Ui));
        assert_eq!(m.params.len(), 1);
    }

    #[test]
    fn seq_is_right_folded() {
        let p = parse("skip; skip; skip").unwrap();
        let CommandKind::Seq(_, rest) = &p.main.kind else { panic!() };
        assert!(matches!(rest.kind, CommandKind::Seq(..)));
    }

    #[test]
    fn reports_position_on_error() {
        let err = parse("par { y = } { skip }").unwrap_err();
        let (line, col) = err.position();
        assert_eq!(line, 1);
        assert!(col > 1);
    }
}
