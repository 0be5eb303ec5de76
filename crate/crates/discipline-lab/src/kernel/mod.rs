//! The kernel imperative object language: syntax, parser, printer, and
//! free-variable analysis. Shared by the capability checker and both effect
//! disciplines. Checking is static only; there is no interpreter.

pub mod ast;
pub mod freevars;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod validate;

pub use ast::{
    ClassDecl, Command, CommandKind, EffectAnnot, FieldDecl, Ident, MethodDecl, ParamDecl,
    Program, QualType, Qualifier,
};
pub use freevars::{free_vars, normalize_seqs};
pub use parser::{parse, parse_named, ParseError};
pub use printer::{alpha_eq, print, print_command};
pub use validate::validate;
