//! Pretty-printer for programs and expressions.
//!
//! Printing is precedence-aware and inserts parentheses only where needed, so
//! `parse(print(parse(s)))` yields the same AST as `parse(s)` (modulo source
//! locations), and printing is idempotent on the text level. Sugar forms
//! (`+=`, `++`) are printed in their desugared shape.

use super::ast::*;
use std::fmt::Write;

/// Operator precedence, higher binds tighter. Quantifiers share the lowest
/// level with `==>` so they are parenthesized whenever they appear as an
/// inner operand.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => match op {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        },
        Expr::Quant { .. } => 1,
        Expr::Unary { .. } => 7,
        _ => 8,
    }
}

fn write_prec(out: &mut String, e: &Expr, min: u8) {
    if prec(e) < min {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::IntLit { value, .. } => {
            let _ = write!(out, "{value}");
        }
        Expr::BoolLit { value, .. } => {
            let _ = write!(out, "{value}");
        }
        Expr::Var { name, .. } => out.push_str(name),
        Expr::Index { base, index, .. } => {
            out.push_str(base);
            out.push('[');
            write_expr(out, index);
            out.push(']');
        }
        Expr::Unary { op, arg, .. } => {
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            });
            // parenthesize nested unaries so `-(-x)` does not print as `--x`
            if matches!(**arg, Expr::Unary { .. }) {
                out.push('(');
                write_expr(out, arg);
                out.push(')');
            } else {
                write_prec(out, arg, 8);
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let p = prec(e);
            match op {
                // right-associative
                BinOp::Implies => {
                    write_prec(out, lhs, p + 1);
                    let _ = write!(out, " {} ", op.symbol());
                    write_prec(out, rhs, p);
                }
                // non-associative comparisons: both operands must bind tighter
                _ if op.is_comparison() => {
                    write_prec(out, lhs, p + 1);
                    let _ = write!(out, " {} ", op.symbol());
                    write_prec(out, rhs, p + 1);
                }
                // left-associative
                _ => {
                    write_prec(out, lhs, p);
                    let _ = write!(out, " {} ", op.symbol());
                    write_prec(out, rhs, p + 1);
                }
            }
        }
        Expr::Old { arg, .. } => {
            out.push_str("\\old(");
            write_expr(out, arg);
            out.push(')');
        }
        Expr::OldRef { slot, .. } => {
            let _ = write!(out, "\\old_{slot}");
        }
        Expr::Result { .. } => out.push_str("\\result"),
        Expr::Quant {
            universal,
            var,
            lo,
            lo_strict,
            hi,
            hi_strict,
            body,
            ..
        } => {
            out.push_str(if *universal { "\\forall" } else { "\\exists" });
            let _ = write!(out, " integer {var}; ");
            write_prec(out, lo, 5);
            out.push_str(if *lo_strict { " < " } else { " <= " });
            out.push_str(var);
            out.push_str(if *hi_strict { " < " } else { " <= " });
            write_prec(out, hi, 5);
            out.push_str(if *universal { " ==> " } else { " && " });
            write_prec(out, body, 1);
        }
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

pub fn assigns_to_string(targets: &[AssignTarget]) -> String {
    if targets.is_empty() {
        return "\\nothing".to_string();
    }
    targets
        .iter()
        .map(|t| match t {
            AssignTarget::Var { name, .. } => name.clone(),
            AssignTarget::ArrayRange { base, lo, hi, .. } => format!("{base}[{lo}..{hi}]"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn lhs_to_string(lhs: &Lhs) -> String {
    match lhs {
        Lhs::Var { name, .. } => name.clone(),
        Lhs::Index { base, index, .. } => {
            let mut s = String::new();
            s.push_str(base);
            s.push('[');
            write_expr(&mut s, index);
            s.push(']');
            s
        }
    }
}

pub fn type_decl(name: &str, ty: VarType) -> String {
    match ty {
        VarType::Scalar(ScalarType::Int) => format!("int {name}"),
        VarType::Scalar(ScalarType::Bool) => format!("bool {name}"),
        VarType::IntArray(len) => format!("int {name}[{len}]"),
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn write_contract(out: &mut String, c: &Contract, level: usize) {
    indent(out, level);
    out.push_str("/*@ ");
    let mut first = true;
    let mut clause = |out: &mut String, text: String| {
        if !first {
            indent(out, level);
            out.push_str("  @ ");
        }
        first = false;
        out.push_str(&text);
        out.push('\n');
    };
    clause(out, format!("requires {};", expr_to_string(&c.requires)));
    if let Some(assigns) = &c.assigns {
        clause(out, format!("assigns {};", assigns_to_string(assigns)));
    }
    clause(out, format!("ensures {};", expr_to_string(&c.ensures)));
    indent(out, level);
    out.push_str("  @*/\n");
}

fn write_loop_contract(out: &mut String, c: &LoopContract, level: usize) {
    indent(out, level);
    out.push_str("/*@ ");
    let mut first = true;
    let mut clause = |out: &mut String, text: String| {
        if !first {
            indent(out, level);
            out.push_str("  @ ");
        }
        first = false;
        out.push_str(&text);
        out.push('\n');
    };
    clause(
        out,
        format!("loop invariant {};", expr_to_string(&c.invariant)),
    );
    clause(
        out,
        format!("loop assigns {};", assigns_to_string(&c.assigns)),
    );
    if let Some(v) = &c.variant {
        clause(out, format!("loop variant {};", expr_to_string(v)));
    }
    indent(out, level);
    out.push_str("  @*/\n");
}

fn write_block(out: &mut String, block: &Block, level: usize) {
    for stmt in &block.stmts {
        write_stmt(out, stmt, level);
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    match &stmt.kind {
        StmtKind::Decl { name, ty, init } => {
            indent(out, level);
            out.push_str(&type_decl(name, *ty));
            if let Some(e) = init {
                out.push_str(" = ");
                write_expr(out, e);
            }
            out.push_str(";\n");
        }
        StmtKind::Assign { target, value } => {
            indent(out, level);
            out.push_str(&lhs_to_string(target));
            out.push_str(" = ");
            write_expr(out, value);
            out.push_str(";\n");
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            indent(out, level);
            out.push_str("if (");
            write_expr(out, cond);
            out.push_str(") {\n");
            write_block(out, then_branch, level + 1);
            indent(out, level);
            out.push('}');
            if let Some(else_branch) = else_branch {
                out.push_str(" else {\n");
                write_block(out, else_branch, level + 1);
                indent(out, level);
                out.push('}');
            }
            out.push('\n');
        }
        StmtKind::While {
            cond,
            contract,
            body,
        } => {
            write_loop_contract(out, contract, level);
            indent(out, level);
            out.push_str("while (");
            write_expr(out, cond);
            out.push_str(") {\n");
            write_block(out, body, level + 1);
            indent(out, level);
            out.push_str("}\n");
        }
        StmtKind::Call {
            target,
            callee,
            args,
        } => {
            indent(out, level);
            if let Some(t) = target {
                out.push_str(&lhs_to_string(t));
                out.push_str(" = ");
            }
            out.push_str(callee);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push_str(");\n");
        }
        StmtKind::Return { value } => {
            indent(out, level);
            out.push_str("return");
            if let Some(e) = value {
                out.push(' ');
                write_expr(out, e);
            }
            out.push_str(";\n");
        }
        StmtKind::Assert { pred, .. } => {
            indent(out, level);
            out.push_str("/*@ assert ");
            write_expr(out, pred);
            out.push_str("; */\n");
        }
    }
}

pub fn function_to_string(f: &FunctionDef) -> String {
    let mut out = String::new();
    write_contract(&mut out, &f.contract, 0);
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
    write_block(&mut out, &f.body, 1);
    out.push_str("}\n");
    out
}

pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    for g in &p.globals {
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
    if !p.globals.is_empty() {
        out.push('\n');
    }
    for (i, f) in p.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&function_to_string(f));
    }
    out
}
