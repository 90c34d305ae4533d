//! Front end: lexing, parsing, validation, printing and structural queries
//! for the annotated mini-language.

pub mod ast;
mod lexer;
mod parser;
pub mod pretty;
pub mod query;
mod validate;

pub use ast::*;
pub use query::{
    find_subcontract, fingerprint, input_signature, input_width, non_imbricated_annotations,
    reachable_functions, subcontracts, InputVar, SubTarget, SubcontractRef,
};

use thiserror::Error;

/// Front-end errors. All of them carry a source location and map to the
/// usage/front-end exit code in the CLI.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LangError {
    #[error("{loc}: lexical error: {msg}")]
    Lex { loc: Loc, msg: String },
    #[error("{loc}: parse error: {msg}")]
    Parse { loc: Loc, msg: String },
    #[error("{loc}: {msg}")]
    Validate { loc: Loc, msg: String },
}

/// Parses and validates a program, designating the entry function.
///
/// `entry = None` designates the last function in the file. Annotation and
/// statement ids are assigned in source order, so parsing the same text twice
/// yields identical programs.
pub fn parse_program(source: &str, entry: Option<&str>) -> Result<Program, LangError> {
    let mut program = parser::parse_raw(source)?;
    validate::validate(&mut program, entry)?;
    Ok(program)
}
