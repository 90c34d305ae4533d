//! Readable rendering of an instrumented program.
//!
//! The output is pseudo-C: source statements print as they were written,
//! instrumentation prints as `fassert`/`fassume`/`nondet` pseudo-calls with a
//! trailing comment naming the annotation each check came from. It is meant
//! for humans inspecting what a variant actually executes, not for re-parsing.

use std::fmt::Write;

use crate::lang::pretty::{assigns_to_string, expr_to_string, lhs_to_string, type_decl};
use crate::lang::{AnnId, ScalarType, VarType};

use super::{CheckKind, IFunction, IStmt, IStmtKind, InstrumentedProgram, Variant};

pub fn emit(ip: &InstrumentedProgram) -> String {
    let mut out = String::new();
    let what = match &ip.variant {
        Variant::Nc => "nc — all annotations checked".to_string(),
        Variant::Gsw => "gsw — every non-imbricated subcontract substituted".to_string(),
        Variant::Ssw(site) => format!("ssw — substituted: {}", site.describe()),
    };
    let _ = writeln!(out, "// instrumented variant: {what}");
    let _ = writeln!(out, "// entry function: {}", ip.entry);
    out.push('\n');

    for g in &ip.globals {
        out.push_str(&type_decl(&g.name, g.ty));
        if let Some(v) = g.init {
            match g.ty {
                VarType::Scalar(ScalarType::Bool) => {
                    let _ = write!(out, " = {}", v != 0);
                }
                _ => {
                    let _ = write!(out, " = {v}");
                }
            }
        }
        out.push_str(";\n");
    }
    if !ip.globals.is_empty() {
        out.push('\n');
    }

    for (i, f) in ip.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_function(&mut out, ip, f);
    }
    out
}

fn write_function(out: &mut String, ip: &InstrumentedProgram, f: &IFunction) {
    if let Some(orig) = &f.stub_of {
        let _ = writeln!(out, "// contract stand-in for `{orig}`");
    }
    let ret = match f.ret {
        Some(ScalarType::Int) => "int",
        Some(ScalarType::Bool) => "bool",
        None => "void",
    };
    let _ = write!(out, "{ret} {}(", f.name);
    for (i, p) in f.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{} {}", p.ty, p.name);
    }
    out.push_str(") {\n");
    if !f.prologue.is_empty() {
        out.push_str("    // on entry:\n");
        write_stmts(out, ip, &f.prologue, 1);
    }
    if !f.body.is_empty() {
        out.push_str("    // body:\n");
        write_stmts(out, ip, &f.body, 1);
    }
    if !f.epilogue.is_empty() {
        out.push_str("    // at every return (\\result bound):\n");
        write_stmts(out, ip, &f.epilogue, 1);
    }
    out.push_str("}\n");
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn ann_comment(ip: &InstrumentedProgram, aid: AnnId) -> String {
    format!("  // {} {}", aid, ip.annotations.label(aid))
}

fn write_stmts(out: &mut String, ip: &InstrumentedProgram, stmts: &[IStmt], level: usize) {
    for s in stmts {
        write_stmt(out, ip, s, level);
    }
}

fn write_stmt(out: &mut String, ip: &InstrumentedProgram, s: &IStmt, level: usize) {
    indent(out, level);
    match &s.kind {
        IStmtKind::Decl { name, ty, init } => {
            out.push_str(&type_decl(name, *ty));
            if let Some(e) = init {
                out.push_str(" = ");
                out.push_str(&expr_to_string(e));
            }
            out.push_str(";\n");
        }
        IStmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{} = {};", lhs_to_string(target), expr_to_string(value));
        }
        IStmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = writeln!(out, "if ({}) {{", expr_to_string(cond));
            write_stmts(out, ip, then_branch, level + 1);
            indent(out, level);
            out.push('}');
            if !else_branch.is_empty() {
                out.push_str(" else {\n");
                write_stmts(out, ip, else_branch, level + 1);
                indent(out, level);
                out.push('}');
            }
            out.push('\n');
        }
        IStmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", expr_to_string(cond));
            write_stmts(out, ip, body, level + 1);
            indent(out, level);
            out.push_str("}\n");
        }
        IStmtKind::Call {
            target,
            callee,
            args,
        } => {
            if let Some(t) = target {
                let _ = write!(out, "{} = ", lhs_to_string(t));
            }
            let args = args
                .iter()
                .map(expr_to_string)
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "{callee}({args});");
        }
        IStmtKind::Return { value } => {
            out.push_str("return");
            if let Some(e) = value {
                out.push(' ');
                out.push_str(&expr_to_string(e));
            }
            out.push_str(";\n");
        }
        IStmtKind::Check { aid, kind } => {
            let body = match kind {
                CheckKind::Pred(e) => format!("fassert({})", expr_to_string(e)),
                CheckKind::VariantDecrease { expr, slot } => {
                    format!("fassert({} < __meas[{slot}])", expr_to_string(expr))
                }
                CheckKind::Frame { slot, allowed } => format!(
                    "fassert_unchanged_except(__frame[{slot}], {{{}}})",
                    assigns_to_string(allowed)
                ),
            };
            let _ = writeln!(out, "{body};{}", ann_comment(ip, *aid));
        }
        IStmtKind::Assume { aid, pred } => {
            let _ = writeln!(
                out,
                "fassume({});{}",
                expr_to_string(pred),
                ann_comment(ip, *aid)
            );
        }
        IStmtKind::SnapshotOlds { pairs } => {
            for (i, (slot, e)) in pairs.iter().enumerate() {
                if i > 0 {
                    indent(out, level);
                }
                let _ = writeln!(out, "__old[{slot}] = {};", expr_to_string(e));
            }
        }
        IStmtKind::SnapshotFrame { slot } => {
            let _ = writeln!(out, "__frame[{slot}] = __snapshot_globals();");
        }
        IStmtKind::SnapshotInt { slot, expr } => {
            let _ = writeln!(out, "__meas[{slot}] = {};", expr_to_string(expr));
        }
        IStmtKind::Nondet { target, ty } => {
            let f = match ty {
                ScalarType::Int => "nondet_int",
                ScalarType::Bool => "nondet_bool",
            };
            let _ = writeln!(out, "{} = {f}();", lhs_to_string(target));
        }
        IStmtKind::NondetArray { base, lo, hi } => {
            let _ = writeln!(out, "{base}[{lo}..{hi}] = nondet_int();");
        }
    }
}
