//! Parser for `.pl` sources, a minimal pre-ES6 constructor/prototype
//! fragment: `function F() { this.x = 0 }` constructors, prototype method
//! attachments, `new`, field access, and method calls.

use crate::diag::Span;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum PExpr {
    Num(f64),
    /// A top-level variable or a method parameter.
    Var(String),
    /// Bare `this` — legal only as a call base or field base; anywhere else
    /// the receiver escapes.
    This,
    ThisField(String),
    ThisCall(String, Vec<PExpr>),
    VarField(String, String),
    VarCall(String, String, Vec<PExpr>),
    /// `F.prototype.m(args)`
    ProtoCall(String, String, Vec<PExpr>),
    New(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    /// `var x = expr`
    VarDecl { name: String, init: PExpr },
    /// `x.f = expr`
    AssignField { obj: String, field: String, value: PExpr },
    /// a call evaluated for effect
    ExprStmt(PExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PStmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MStmtKind {
    /// `this.f = expr`
    SetThisField { field: String, value: PExpr },
    /// `this.f++`
    IncThisField { field: String },
    ExprStmt(PExpr),
    Return(PExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MStmt {
    pub kind: MStmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtoMethod {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<MStmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constructor {
    pub name: String,
    pub params: Vec<String>,
    /// `this.f = e` statements from the constructor body, in order.
    pub ctor_writes: Vec<(String, PExpr, Span)>,
    /// prototype attachments, in program order
    pub methods: Vec<ProtoMethod>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProtoProgram {
    pub constructors: Vec<Constructor>,
    pub statements: Vec<PStmt>,
}

impl ProtoProgram {
    pub fn constructor(&self, name: &str) -> Option<&Constructor> {
        self.constructors.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct PParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

// -- lexer -------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum T {
    Ident,
    Num,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Semi,
    Comma,
    Eq,
    PlusPlus,
    Eof,
}

#[derive(Debug, Clone)]
struct Tok {
    t: T,
    text: String,
    line: u32,
    col: u32,
}

fn lex(source: &str) -> Result<Vec<Tok>, PParseError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = source.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            '/' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'/') {
                    for c2 in chars.by_ref() {
                        if c2 == '\n' {
                            line += 1;
                            col = 1;
                            break;
                        }
                    }
                } else if chars.peek() == Some(&'*') {
                    chars.next();
                    let mut prev = ' ';
                    for c2 in chars.by_ref() {
                        if c2 == '\n' {
                            line += 1;
                            col = 1;
                        } else {
                            col += 1;
                        }
                        if prev == '*' && c2 == '/' {
                            break;
                        }
                        prev = c2;
                    }
                } else {
                    return Err(PParseError { line: tl, col: tc, message: "stray `/`".into() });
                }
            }
            '{' | '}' | '(' | ')' | '.' | ';' | ',' | '=' => {
                chars.next();
                col += 1;
                let t = match c {
                    '{' => T::LBrace,
                    '}' => T::RBrace,
                    '(' => T::LParen,
                    ')' => T::RParen,
                    '.' => T::Dot,
                    ';' => T::Semi,
                    ',' => T::Comma,
                    _ => T::Eq,
                };
                out.push(Tok { t, text: c.to_string(), line: tl, col: tc });
            }
            '+' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'+') {
                    chars.next();
                    col += 1;
                    out.push(Tok { t: T::PlusPlus, text: "++".into(), line: tl, col: tc });
                } else {
                    return Err(PParseError { line: tl, col: tc, message: "expected `++`".into() });
                }
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() || d == '.' {
                        text.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Tok { t: T::Num, text, line: tl, col: tc });
            }
            c if c.is_ascii_alphabetic() || c == '_' || c == '$' => {
                let mut text = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' || d == '$' {
                        text.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Tok { t: T::Ident, text, line: tl, col: tc });
            }
            other => {
                return Err(PParseError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    out.push(Tok { t: T::Eof, text: String::new(), line, col });
    Ok(out)
}

// -- parser ------------------------------------------------------------------

pub fn parse_proto(source: &str) -> Result<ProtoProgram, PParseError> {
    parse_proto_named(source, "<input>")
}

pub fn parse_proto_named(source: &str, file: &str) -> Result<ProtoProgram, PParseError> {
    let tokens = lex(source)?;
    let mut p = P { toks: tokens, pos: 0, file: file.to_string() };
    p.program()
}

struct P {
    toks: Vec<Tok>,
    pos: usize,
    file: String,
}

impl P {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos]
    }

    fn peek_n(&self, n: usize) -> &Tok {
        self.toks.get(self.pos + n).unwrap_or(self.toks.last().unwrap())
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().t == T::Ident && self.peek().text == kw
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<X>(&self, message: impl Into<String>) -> Result<X, PParseError> {
        let t = self.peek();
        Err(PParseError { line: t.line, col: t.col, message: message.into() })
    }

    fn expect(&mut self, t: T, what: &str) -> Result<Tok, PParseError> {
        if self.peek().t == t {
            Ok(self.advance())
        } else {
            self.err(format!("expected {what}, found `{}`", self.peek().text))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Tok, PParseError> {
        self.expect(T::Ident, what)
    }

    fn span(&self, tok: &Tok) -> Span {
        Span::new(self.file.clone(), tok.line, tok.col, tok.text.len().max(1) as u32)
    }

    fn eat_semis(&mut self) {
        while self.peek().t == T::Semi {
            self.advance();
        }
    }

    fn program(&mut self) -> Result<ProtoProgram, PParseError> {
        let mut program = ProtoProgram::default();
        loop {
            self.eat_semis();
            if self.peek().t == T::Eof {
                break;
            }
            if self.at_kw("function") {
                let ctor = self.constructor()?;
                program.constructors.push(ctor);
            } else if self.peek().t == T::Ident
                && self.peek_n(1).t == T::Dot
                && self.peek_n(2).text == "prototype"
                && self.peek_n(3).t == T::Dot
                && self.peek_n(5).t == T::Eq
            {
                self.attachment(&mut program)?;
            } else {
                let stmt = self.statement()?;
                program.statements.push(stmt);
            }
        }
        Ok(program)
    }

    fn params(&mut self) -> Result<Vec<String>, PParseError> {
        self.expect(T::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.peek().t != T::RParen {
            loop {
                params.push(self.ident("parameter name")?.text);
                if self.peek().t == T::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(T::RParen, "`)`")?;
        Ok(params)
    }

    fn constructor(&mut self) -> Result<Constructor, PParseError> {
        let kw = self.advance(); // function
        let name = self.ident("constructor name")?.text;
        let params = self.params()?;
        self.expect(T::LBrace, "`{`")?;
        let mut ctor_writes = Vec::new();
        loop {
            self.eat_semis();
            if self.peek().t == T::RBrace {
                self.advance();
                break;
            }
            let this_tok = self.ident("`this`")?;
            if this_tok.text != "this" {
                return self.err("constructor bodies contain only `this.f = value` statements");
            }
            self.expect(T::Dot, "`.`")?;
            let field = self.ident("field name")?.text;
            self.expect(T::Eq, "`=`")?;
            let value = self.expr(true)?;
            ctor_writes.push((field, value, self.span(&this_tok)));
        }
        Ok(Constructor { name, params, ctor_writes, methods: Vec::new(), span: self.span(&kw) })
    }

    fn attachment(&mut self, program: &mut ProtoProgram) -> Result<(), PParseError> {
        let ctor_tok = self.ident("constructor name")?;
        self.expect(T::Dot, "`.`")?;
        self.ident("`prototype`")?;
        self.expect(T::Dot, "`.`")?;
        let mname_tok = self.ident("method name")?;
        self.expect(T::Eq, "`=`")?;
        let fn_kw = self.ident("`function`")?;
        if fn_kw.text != "function" {
            return self.err("prototype members must be functions");
        }
        let params = self.params()?;
        self.expect(T::LBrace, "`{`")?;
        let mut body = Vec::new();
        loop {
            self.eat_semis();
            if self.peek().t == T::RBrace {
                self.advance();
                break;
            }
            body.push(self.method_statement()?);
        }
        let method = ProtoMethod {
            name: mname_tok.text.clone(),
            params,
            body,
            span: self.span(&mname_tok),
        };
        let ctor_name = ctor_tok.text.clone();
        match program.constructors.iter_mut().find(|c| c.name == ctor_name) {
            Some(ctor) => {
                ctor.methods.push(method);
                Ok(())
            }
            None => Err(PParseError {
                line: ctor_tok.line,
                col: ctor_tok.col,
                message: format!("prototype attachment to undeclared constructor `{ctor_name}`"),
            }),
        }
    }

    fn method_statement(&mut self) -> Result<MStmt, PParseError> {
        let first = self.peek().clone();
        if first.t == T::Ident && first.text == "return" {
            self.advance();
            let value = self.expr(false)?;
            return Ok(MStmt { kind: MStmtKind::Return(value), span: self.span(&first) });
        }
        if first.t == T::Ident && first.text == "this" {
            self.advance();
            self.expect(T::Dot, "`.`")?;
            let field = self.ident("member name")?.text;
            match self.peek().t {
                T::Eq => {
                    self.advance();
                    let value = self.expr(false)?;
                    return Ok(MStmt {
                        kind: MStmtKind::SetThisField { field, value },
                        span: self.span(&first),
                    });
                }
                T::PlusPlus => {
                    self.advance();
                    return Ok(MStmt { kind: MStmtKind::IncThisField { field }, span: self.span(&first) });
                }
                T::LParen => {
                    let args = self.call_args(false)?;
                    return Ok(MStmt {
                        kind: MStmtKind::ExprStmt(PExpr::ThisCall(field, args)),
                        span: self.span(&first),
                    });
                }
                _ => return self.err("`=`, `++`, or `(` after `this.member`"),
            }
        }
        self.err("a method-body statement (`this....`, `return ...`)")
    }

    fn statement(&mut self) -> Result<PStmt, PParseError> {
        let first = self.peek().clone();
        if first.t == T::Ident && first.text == "var" {
            self.advance();
            let name = self.ident("variable name")?.text;
            self.expect(T::Eq, "`=`")?;
            let init = self.expr(true)?;
            return Ok(PStmt { kind: StmtKind::VarDecl { name, init }, span: self.span(&first) });
        }
        if first.t == T::Ident {
            // x.f = e | x.m(args) | F.prototype.m(args)
            let base = self.ident("identifier")?.text;
            self.expect(T::Dot, "`.`")?;
            let member = self.ident("member name")?.text;
            if member == "prototype" {
                self.expect(T::Dot, "`.`")?;
                let method = self.ident("method name")?.text;
                let args = self.call_args(true)?;
                return Ok(PStmt {
                    kind: StmtKind::ExprStmt(PExpr::ProtoCall(base, method, args)),
                    span: self.span(&first),
                });
            }
            match self.peek().t {
                T::Eq => {
                    self.advance();
                    let value = self.expr(true)?;
                    return Ok(PStmt {
                        kind: StmtKind::AssignField { obj: base, field: member, value },
                        span: self.span(&first),
                    });
                }
                T::LParen => {
                    let args = self.call_args(true)?;
                    return Ok(PStmt {
                        kind: StmtKind::ExprStmt(PExpr::VarCall(base, member, args)),
                        span: self.span(&first),
                    });
                }
                _ => return self.err("`=` or `(` after member access"),
            }
        }
        self.err("a statement")
    }

    fn call_args(&mut self, top_level: bool) -> Result<Vec<PExpr>, PParseError> {
        self.expect(T::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek().t != T::RParen {
            loop {
                args.push(self.expr(top_level)?);
                if self.peek().t == T::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(T::RParen, "`)`")?;
        Ok(args)
    }

    /// `top_level` distinguishes the two expression scopes: `this` is only
    /// meaningful inside method bodies.
    fn expr(&mut self, top_level: bool) -> Result<PExpr, PParseError> {
        let first = self.peek().clone();
        if first.t == T::Num {
            self.advance();
            let n: f64 = first
                .text
                .parse()
                .map_err(|_| PParseError { line: first.line, col: first.col, message: "bad number".into() })?;
            return Ok(PExpr::Num(n));
        }
        if first.t != T::Ident {
            return self.err("an expression");
        }
        if first.text == "new" {
            self.advance();
            let class = self.ident("constructor name")?.text;
            self.expect(T::LParen, "`(`")?;
            self.expect(T::RParen, "`)`")?;
            return Ok(PExpr::New(class));
        }
        if first.text == "this" {
            if top_level {
                return self.err("`this` outside a method body");
            }
            self.advance();
            if self.peek().t != T::Dot {
                return Ok(PExpr::This);
            }
            self.advance();
            let member = self.ident("member name")?.text;
            if self.peek().t == T::LParen {
                let args = self.call_args(false)?;
                return Ok(PExpr::ThisCall(member, args));
            }
            return Ok(PExpr::ThisField(member));
        }
        let name = self.advance().text;
        if self.peek().t == T::Dot {
            self.advance();
            let member = self.ident("member name")?.text;
            if member == "prototype" {
                self.expect(T::Dot, "`.`")?;
                let method = self.ident("method name")?.text;
                let args = self.call_args(top_level)?;
                return Ok(PExpr::ProtoCall(name, method, args));
            }
            if self.peek().t == T::LParen {
                let args = self.call_args(top_level)?;
                return Ok(PExpr::VarCall(name, member, args));
            }
            return Ok(PExpr::VarField(name, member));
        }
        Ok(PExpr::Var(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const FIG3: &str = r#"
function F() {
  this.x = 0
}
F.prototype.inc = function() { this.x++; }
F.prototype.count = function() { return this.x; }
F.prototype.incAndCount = function() {
  this.inc();
  return this.count();
}
/* construct a new F instance, and increment its x field */
var f = new F(); // f.x == 0
f.inc();         // f.x == 1
/* add the field x to F.prototype */
F.prototype.inc();
"#;

    #[test]
    fn parses_the_counter_program() {
        let p = parse_proto(FIG3).unwrap();
        assert_eq!(p.constructors.len(), 1);
        let ctor = &p.constructors[0];
        assert_eq!(ctor.name, "F");
        assert_eq!(ctor.ctor_writes.len(), 1);
        assert_eq!(ctor.methods.iter().map(|m| m.name.as_str()).collect::<Vec<_>>(), [
            "inc",
            "count",
            "incAndCount"
        ]);
        assert_eq!(p.statements.len(), 3);
        assert!(matches!(
            &p.statements[2].kind,
            StmtKind::ExprStmt(PExpr::ProtoCall(ctor, m, _)) if ctor == "F" && m == "inc"
        ));
    }

    #[test]
    fn records_line_numbers() {
        let p = parse_proto(FIG3).unwrap();
        assert_eq!(p.statements[2].span.line, 15);
    }

    #[test]
    fn rejects_attachment_to_unknown_constructor() {
        let err = parse_proto("G.prototype.m = function() { }").unwrap_err();
        assert!(err.message.contains("undeclared"));
    }

    #[test]
    fn rejects_this_at_top_level() {
        let err = parse_proto("function F() { this.x = 0 }\nvar z = this.x;").unwrap_err();
        assert!(err.message.contains("this"));
    }

    #[test]
    fn parses_this_as_call_argument() {
        let src = "function F() { this.x = 0 }\nF.prototype.bad = function() { this.reg(this); }";
        let p = parse_proto(src).unwrap();
        let m = &p.constructors[0].methods[0];
        assert!(matches!(
            &m.body[0].kind,
            MStmtKind::ExprStmt(PExpr::ThisCall(name, args))
                if name == "reg" && args == &[PExpr::This]
        ));
    }
}
