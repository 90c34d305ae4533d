//! Structural queries used by the transformation and test-generation stages.
//!
//! "Non-imbricated" means *not nested inside any loop of the entry function*.
//! A call inside an `if` at the top level of the entry body is non-imbricated;
//! the same call inside a `while` body is not. Non-imbricated call sites and
//! loops are exactly the places where contract substitution happens, so each
//! of them yields one [`SubcontractRef`].

use super::ast::*;
use std::collections::{BTreeSet, HashSet};

/// One substitutable subcontract of the entry function: either the contract
/// of the callee at one non-imbricated call site, or the contract of one
/// non-imbricated loop.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SubcontractRef {
    /// Function whose body contains the site (always the entry function).
    pub owner: String,
    /// The call or `while` statement being substituted.
    pub site: StmtId,
    pub site_loc: Loc,
    pub target: SubTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SubTarget {
    /// Contract of `callee`, substituted at this call site.
    Call { callee: String },
    /// This loop's contract, substituted for the loop.
    Loop,
}

impl SubcontractRef {
    /// Human-readable name, stable across runs: the callee name for call
    /// sites, `loopN` (1-based, source order) for loops.
    pub fn display_name(&self, ordinal: usize) -> String {
        match &self.target {
            SubTarget::Call { callee } => callee.clone(),
            SubTarget::Loop => format!("loop{ordinal}"),
        }
    }

    pub fn describe(&self) -> String {
        match &self.target {
            SubTarget::Call { callee } => {
                format!("contract of `{callee}` at call (line {})", self.site_loc.line)
            }
            SubTarget::Loop => format!("loop contract (line {})", self.site_loc.line),
        }
    }
}

/// All subcontracts of `fname` in source order.
pub fn subcontracts(program: &Program, fname: &str) -> Vec<SubcontractRef> {
    let Some(f) = program.function(fname) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    walk_depth_zero(&f.body, &mut |stmt| match &stmt.kind {
        StmtKind::Call { callee, .. } => out.push(SubcontractRef {
            owner: fname.to_string(),
            site: stmt.id,
            site_loc: stmt.loc,
            target: SubTarget::Call {
                callee: callee.clone(),
            },
        }),
        StmtKind::While { .. } => out.push(SubcontractRef {
            owner: fname.to_string(),
            site: stmt.id,
            site_loc: stmt.loc,
            target: SubTarget::Loop,
        }),
        _ => {}
    });
    out
}

/// Resolves a subcontract by its display name (callee name or `loopN`).
pub fn find_subcontract(program: &Program, fname: &str, name: &str) -> Option<SubcontractRef> {
    let subs = subcontracts(program, fname);
    let mut loop_ordinal = 0;
    for s in subs {
        match &s.target {
            SubTarget::Call { callee } if callee == name => return Some(s),
            SubTarget::Loop => {
                loop_ordinal += 1;
                if name == format!("loop{loop_ordinal}") {
                    return Some(s);
                }
            }
            _ => {}
        }
    }
    None
}

/// Visits statements of a block without descending into loop bodies
/// (descends into `if` branches — those do not change imbrication).
fn walk_depth_zero<'a>(block: &'a Block, f: &mut impl FnMut(&'a Stmt)) {
    for stmt in &block.stmts {
        f(stmt);
        if let StmtKind::If {
            then_branch,
            else_branch,
            ..
        } = &stmt.kind
        {
            walk_depth_zero(then_branch, f);
            if let Some(b) = else_branch {
                walk_depth_zero(b, f);
            }
        }
    }
}

/// The annotation ids of the entry function's non-imbricated annotations: its
/// own contract clauses, the contract clauses of callees at non-imbricated
/// call sites, the contracts of non-imbricated loops, and assertions that are
/// not nested inside any loop.
pub fn non_imbricated_annotations(program: &Program) -> BTreeSet<AnnId> {
    let mut out = BTreeSet::new();
    let f = program.entry_fn();
    push_contract_ids(&f.contract, &mut out);
    walk_depth_zero(&f.body, &mut |stmt| match &stmt.kind {
        StmtKind::Call { callee, .. } => {
            if let Some(def) = program.function(callee) {
                push_contract_ids(&def.contract, &mut out);
            }
        }
        StmtKind::While { contract, .. } => push_loop_contract_ids(contract, &mut out),
        StmtKind::Assert { id, .. } => {
            out.insert(*id);
        }
        _ => {}
    });
    out
}

fn push_contract_ids(c: &Contract, out: &mut BTreeSet<AnnId>) {
    out.insert(c.requires_id);
    out.insert(c.ensures_id);
    if let Some(id) = c.assigns_id {
        out.insert(id);
    }
}

fn push_loop_contract_ids(c: &LoopContract, out: &mut BTreeSet<AnnId>) {
    out.insert(c.inv_init_id);
    out.insert(c.inv_preserve_id);
    out.insert(c.assigns_id);
    if let Some(id) = c.variant_nonneg_id {
        out.insert(id);
    }
    if let Some(id) = c.variant_decrease_id {
        out.insert(id);
    }
}

/// Names of the functions reachable from the entry through calls, the entry
/// itself included.
pub fn reachable_functions(program: &Program) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut work = vec![program.entry.clone()];
    while let Some(name) = work.pop() {
        if !seen.insert(name.clone()) {
            continue;
        }
        if let Some(def) = program.function(&name) {
            collect_calls(&def.body, &mut |callee| {
                if !seen.contains(callee) {
                    work.push(callee.to_string());
                }
            });
        }
    }
    seen
}

fn collect_calls<'a>(block: &'a Block, f: &mut impl FnMut(&'a str)) {
    for stmt in &block.stmts {
        match &stmt.kind {
            StmtKind::Call { callee, .. } => f(callee),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                collect_calls(then_branch, f);
                if let Some(b) = else_branch {
                    collect_calls(b, f);
                }
            }
            StmtKind::While { body, .. } => collect_calls(body, f),
            _ => {}
        }
    }
}

/// One input of the entry function: a parameter or an uninitialized global
/// that the reachable part of the program can observe.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct InputVar {
    pub name: String,
    pub ty: VarType,
    pub is_param: bool,
}

impl InputVar {
    /// Number of scalar values this input contributes to a test datum.
    pub fn width(&self) -> usize {
        match self.ty {
            VarType::Scalar(_) => 1,
            VarType::IntArray(n) => n as usize,
        }
    }
}

/// The inputs of the entry function, in canonical order: parameters first (in
/// declaration order), then input globals (in declaration order). A global
/// with an initializer is never an input; a global that is mentioned nowhere
/// in the reachable code or annotations is dropped since no run can observe
/// its value.
pub fn input_signature(program: &Program) -> Vec<InputVar> {
    let f = program.entry_fn();
    let mut sig: Vec<InputVar> = f
        .params
        .iter()
        .map(|p| InputVar {
            name: p.name.clone(),
            ty: VarType::Scalar(p.ty),
            is_param: true,
        })
        .collect();
    let mentioned = mentioned_names(program);
    for g in &program.globals {
        if g.init.is_none() && mentioned.contains(g.name.as_str()) {
            sig.push(InputVar {
                name: g.name.clone(),
                ty: g.ty,
                is_param: false,
            });
        }
    }
    sig
}

/// Total number of scalar values in a main-input vector.
pub fn input_width(sig: &[InputVar]) -> usize {
    sig.iter().map(|v| v.width()).sum()
}

/// Every identifier mentioned in the code or annotations of reachable
/// functions (including assigns clauses).
fn mentioned_names(program: &Program) -> HashSet<String> {
    let mut names = HashSet::new();
    let reach = reachable_functions(program);
    for f in program.functions.iter().filter(|f| reach.contains(&f.name)) {
        collect_expr_names(&f.contract.requires, &mut names);
        collect_expr_names(&f.contract.ensures, &mut names);
        if let Some(assigns) = &f.contract.assigns {
            for t in assigns {
                names.insert(t.base_name().to_string());
            }
        }
        collect_block_names(&f.body, &mut names);
    }
    names
}

fn collect_block_names(block: &Block, names: &mut HashSet<String>) {
    for stmt in &block.stmts {
        match &stmt.kind {
            StmtKind::Decl { init, .. } => {
                if let Some(e) = init {
                    collect_expr_names(e, names);
                }
            }
            StmtKind::Assign { target, value } => {
                names.insert(target.base_name().to_string());
                if let Lhs::Index { index, .. } = target {
                    collect_expr_names(index, names);
                }
                collect_expr_names(value, names);
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                collect_expr_names(cond, names);
                collect_block_names(then_branch, names);
                if let Some(b) = else_branch {
                    collect_block_names(b, names);
                }
            }
            StmtKind::While {
                cond,
                contract,
                body,
            } => {
                collect_expr_names(cond, names);
                collect_expr_names(&contract.invariant, names);
                if let Some(v) = &contract.variant {
                    collect_expr_names(v, names);
                }
                for t in &contract.assigns {
                    names.insert(t.base_name().to_string());
                }
                collect_block_names(body, names);
            }
            StmtKind::Call { target, args, .. } => {
                if let Some(t) = target {
                    names.insert(t.base_name().to_string());
                    if let Lhs::Index { index, .. } = t {
                        collect_expr_names(index, names);
                    }
                }
                for a in args {
                    collect_expr_names(a, names);
                }
            }
            StmtKind::Return { value } => {
                if let Some(e) = value {
                    collect_expr_names(e, names);
                }
            }
            StmtKind::Assert { pred, .. } => collect_expr_names(pred, names),
        }
    }
}

fn collect_expr_names(e: &Expr, names: &mut HashSet<String>) {
    e.walk(&mut |node| match node {
        Expr::Var { name, .. } => {
            names.insert(name.clone());
        }
        Expr::Index { base, .. } => {
            names.insert(base.clone());
        }
        _ => {}
    });
}

/// Stable 64-bit fingerprint of a program (FNV-1a over the printed source and
/// the entry name). Reports embed it so a stored witness can be detected as
/// stale when the program has changed.
pub fn fingerprint(program: &Program) -> u64 {
    let text = super::pretty::program_to_string(program);
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes().chain([0u8]).chain(program.entry.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
