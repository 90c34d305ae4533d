//! Static checks run after parsing, before any program is accepted.
//!
//! Beyond ordinary scope and type checking this enforces the language rules
//! the rest of the pipeline relies on:
//!
//! * every called function has an `assigns` clause (call-site frame checks
//!   need a declared frame), and every loop has `loop assigns` (the parser
//!   already rejects loops without one);
//! * `loop assigns` covers, by name, everything the loop body can assign —
//!   including what its callees declare they assign;
//! * `\old` appears only in `ensures`, `\result` only in `ensures` of a
//!   non-void function, and annotation-only syntax never appears in code;
//! * the call graph reachable from the entry function is acyclic.
//!
//! Validation also designates the entry function and re-labels the contract
//! clauses of every *other* function with the `Callee*` annotation kinds,
//! since those clauses are checked around calls at run time.

use super::ast::*;
use super::LangError;
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Ty {
    Int,
    Bool,
}

impl From<ScalarType> for Ty {
    fn from(t: ScalarType) -> Self {
        match t {
            ScalarType::Int => Ty::Int,
            ScalarType::Bool => Ty::Bool,
        }
    }
}

/// Where an expression appears; controls which annotation-only forms are
/// allowed.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Pos {
    Code,
    Requires,
    /// `ensures` of a function with the given return type.
    Ensures(Option<ScalarType>),
    /// loop invariant, loop variant or assertion
    LoopOrAssert,
}

struct FnSigs<'a> {
    map: HashMap<&'a str, &'a FunctionDef>,
}

struct Checker<'a> {
    program: &'a Program,
    sigs: FnSigs<'a>,
    globals: HashMap<&'a str, VarType>,
}

pub(super) fn validate(program: &mut Program, entry: Option<&str>) -> Result<(), LangError> {
    // 1. entry designation
    if let Some(name) = entry {
        if program.function(name).is_none() {
            return Err(LangError::Validate {
                loc: Loc { line: 1, col: 1 },
                msg: format!("entry function `{name}` is not defined"),
            });
        }
        program.entry = name.to_string();
    }

    // 2. relabel contract clauses of non-entry functions as callee clauses
    let entry_name = program.entry.clone();
    let relabel: Vec<(AnnId, AnnKind)> = program
        .functions
        .iter()
        .flat_map(|f| {
            let callee = f.name != entry_name;
            let c = &f.contract;
            let mut v = vec![
                (
                    c.requires_id,
                    if callee {
                        AnnKind::CalleeRequires
                    } else {
                        AnnKind::Requires
                    },
                ),
                (
                    c.ensures_id,
                    if callee {
                        AnnKind::CalleeEnsures
                    } else {
                        AnnKind::Ensures
                    },
                ),
            ];
            if let Some(id) = c.assigns_id {
                v.push((
                    id,
                    if callee {
                        AnnKind::CalleeAssigns
                    } else {
                        AnnKind::Assigns
                    },
                ));
            }
            v
        })
        .collect();
    for (id, kind) in relabel {
        program.annotations.set_kind(id, kind);
    }

    // 3. the real checks (read-only from here on)
    let checker = Checker::new(program)?;
    checker.check_all()?;
    Ok(())
}

impl<'a> Checker<'a> {
    fn new(program: &'a Program) -> Result<Self, LangError> {
        let mut globals = HashMap::new();
        for g in &program.globals {
            if globals.insert(g.name.as_str(), g.ty).is_some() {
                return Err(err(g.loc, format!("duplicate global `{}`", g.name)));
            }
        }
        let mut map = HashMap::new();
        for f in &program.functions {
            if map.insert(f.name.as_str(), f).is_some() {
                return Err(err(f.loc, format!("duplicate function `{}`", f.name)));
            }
            if globals.contains_key(f.name.as_str()) {
                return Err(err(
                    f.loc,
                    format!("`{}` is both a global and a function", f.name),
                ));
            }
        }
        Ok(Checker {
            program,
            sigs: FnSigs { map },
            globals,
        })
    }

    fn check_all(&self) -> Result<(), LangError> {
        for f in &self.program.functions {
            self.check_function(f)?;
        }
        self.check_called_have_assigns()?;
        self.check_acyclic()?;
        Ok(())
    }

    // ----- per function -----

    fn check_function(&self, f: &FunctionDef) -> Result<(), LangError> {
        let mut scope = Scope::new(self, f);
        for p in &f.params {
            scope.declare(&p.name, VarType::Scalar(p.ty), p.loc)?;
        }

        // contract
        self.check_expr(&f.contract.requires, &scope, Pos::Requires, Ty::Bool)?;
        self.check_expr(&f.contract.ensures, &scope, Pos::Ensures(f.ret), Ty::Bool)?;
        if let Some(assigns) = &f.contract.assigns {
            for t in assigns {
                self.check_contract_assign_target(t)?;
            }
        }

        self.check_block(&f.body, &mut scope, f)?;
        Ok(())
    }

    fn check_block(
        &self,
        block: &Block,
        scope: &mut Scope<'a, '_>,
        f: &'a FunctionDef,
    ) -> Result<(), LangError> {
        let mark = scope.mark();
        for stmt in &block.stmts {
            self.check_stmt(stmt, scope, f)?;
        }
        scope.pop_to(mark);
        Ok(())
    }

    fn check_stmt(
        &self,
        stmt: &Stmt,
        scope: &mut Scope<'a, '_>,
        f: &'a FunctionDef,
    ) -> Result<(), LangError> {
        match &stmt.kind {
            StmtKind::Decl { name, ty, init } => {
                if let Some(e) = init {
                    let want = match ty {
                        VarType::Scalar(s) => Ty::from(*s),
                        VarType::IntArray(_) => unreachable!("parser rejects array initializers"),
                    };
                    self.check_expr(e, scope, Pos::Code, want)?;
                }
                scope.declare(name, *ty, stmt.loc)?;
            }
            StmtKind::Assign { target, value } => {
                let ty = self.check_lhs(target, scope)?;
                self.check_expr(value, scope, Pos::Code, ty)?;
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.check_expr(cond, scope, Pos::Code, Ty::Bool)?;
                self.check_block(then_branch, scope, f)?;
                if let Some(b) = else_branch {
                    self.check_block(b, scope, f)?;
                }
            }
            StmtKind::While {
                cond,
                contract,
                body,
            } => {
                self.check_expr(cond, scope, Pos::Code, Ty::Bool)?;
                self.check_expr(&contract.invariant, scope, Pos::LoopOrAssert, Ty::Bool)?;
                if let Some(v) = &contract.variant {
                    self.check_expr(v, scope, Pos::LoopOrAssert, Ty::Int)?;
                }
                for t in &contract.assigns {
                    self.check_loop_assign_target(t, scope)?;
                }
                self.check_loop_assigns_coverage(stmt.loc, contract, body, scope)?;
                self.check_block(body, scope, f)?;
            }
            StmtKind::Call {
                target,
                callee,
                args,
            } => {
                let Some(callee_def) = self.sigs.map.get(callee.as_str()) else {
                    return Err(err(stmt.loc, format!("call to undefined function `{callee}`")));
                };
                if args.len() != callee_def.params.len() {
                    return Err(err(
                        stmt.loc,
                        format!(
                            "`{callee}` expects {} argument(s), got {}",
                            callee_def.params.len(),
                            args.len()
                        ),
                    ));
                }
                for (a, p) in args.iter().zip(&callee_def.params) {
                    self.check_expr(a, scope, Pos::Code, p.ty.into())?;
                }
                if let Some(t) = target {
                    let Some(ret) = callee_def.ret else {
                        return Err(err(
                            stmt.loc,
                            format!("`{callee}` returns void; cannot bind its result"),
                        ));
                    };
                    let ty = self.check_lhs(t, scope)?;
                    if ty != ret.into() {
                        return Err(err(
                            stmt.loc,
                            format!("result of `{callee}` has the wrong type for this target"),
                        ));
                    }
                }
            }
            StmtKind::Return { value } => match (value, f.ret) {
                (Some(e), Some(ret)) => {
                    self.check_expr(e, scope, Pos::Code, ret.into())?;
                }
                (None, None) => {}
                (Some(_), None) => {
                    return Err(err(stmt.loc, "void function cannot return a value".into()))
                }
                (None, Some(_)) => {
                    return Err(err(
                        stmt.loc,
                        "non-void function must return a value".into(),
                    ))
                }
            },
            StmtKind::Assert { pred, .. } => {
                self.check_expr(pred, scope, Pos::LoopOrAssert, Ty::Bool)?;
            }
        }
        Ok(())
    }

    fn check_lhs(&self, lhs: &Lhs, scope: &Scope<'a, '_>) -> Result<Ty, LangError> {
        match lhs {
            Lhs::Var { name, loc } => match scope.lookup(name) {
                Some(VarType::Scalar(s)) => Ok(s.into()),
                Some(VarType::IntArray(_)) => Err(err(
                    *loc,
                    format!("cannot assign whole array `{name}`; assign cells individually"),
                )),
                None => Err(err(*loc, format!("assignment to undeclared `{name}`"))),
            },
            Lhs::Index { base, index, loc } => {
                match scope.lookup(base) {
                    Some(VarType::IntArray(_)) => {}
                    Some(_) => return Err(err(*loc, format!("`{base}` is not an array"))),
                    None => return Err(err(*loc, format!("undeclared array `{base}`"))),
                }
                self.check_expr(index, scope, Pos::Code, Ty::Int)?;
                Ok(Ty::Int)
            }
        }
    }

    fn check_contract_assign_target(&self, t: &AssignTarget) -> Result<(), LangError> {
        match t {
            AssignTarget::Var { name, loc } => match self.globals.get(name.as_str()) {
                Some(VarType::Scalar(_)) => Ok(()),
                Some(VarType::IntArray(_)) => Err(err(
                    *loc,
                    format!("use a cell range `{name}[lo..hi]` in assigns, not the whole array"),
                )),
                None => Err(err(
                    *loc,
                    format!("assigns clause names `{name}`, which is not a global"),
                )),
            },
            AssignTarget::ArrayRange { base, lo, hi, loc } => {
                let Some(VarType::IntArray(len)) = self.globals.get(base.as_str()) else {
                    return Err(err(*loc, format!("`{base}` is not a global array")));
                };
                check_range(*lo, *hi, *len, *loc, base)
            }
        }
    }

    fn check_loop_assign_target(
        &self,
        t: &AssignTarget,
        scope: &Scope<'a, '_>,
    ) -> Result<(), LangError> {
        match t {
            AssignTarget::Var { name, loc } => match scope.lookup(name) {
                Some(VarType::Scalar(_)) => Ok(()),
                Some(VarType::IntArray(_)) => Err(err(
                    *loc,
                    format!("use a cell range `{name}[lo..hi]` in loop assigns"),
                )),
                None => Err(err(
                    *loc,
                    format!("loop assigns names `{name}`, which is not in scope"),
                )),
            },
            AssignTarget::ArrayRange { base, lo, hi, loc } => match scope.lookup(base) {
                Some(VarType::IntArray(len)) => check_range(*lo, *hi, len, *loc, base),
                _ => Err(err(*loc, format!("`{base}` is not an array in scope"))),
            },
        }
    }

    /// `loop assigns` must name (at least) every variable the body can assign:
    /// direct assignment targets, call result targets, and everything the
    /// callees' own `assigns` clauses declare. Variables declared inside the
    /// body are exempt — they die with the iteration.
    fn check_loop_assigns_coverage(
        &self,
        loop_loc: Loc,
        contract: &LoopContract,
        body: &Block,
        _scope: &Scope<'a, '_>,
    ) -> Result<(), LangError> {
        let mut assigned: BTreeMap<String, Loc> = BTreeMap::new();
        let mut local_decls: HashSet<String> = HashSet::new();
        collect_assigned(body, &mut assigned, &mut local_decls, &self.sigs);
        let covered: HashSet<&str> = contract.assigns.iter().map(|t| t.base_name()).collect();
        for (name, loc) in &assigned {
            if !local_decls.contains(name) && !covered.contains(name.as_str()) {
                return Err(err(
                    *loc,
                    format!(
                        "loop at {loop_loc} assigns `{name}` but its `loop assigns` clause does not list it"
                    ),
                ));
            }
        }
        Ok(())
    }

    // ----- expressions -----

    fn check_expr(
        &self,
        e: &Expr,
        scope: &Scope<'a, '_>,
        pos: Pos,
        want: Ty,
    ) -> Result<(), LangError> {
        let got = self.infer(e, scope, pos)?;
        if got != want {
            let w = if want == Ty::Int { "int" } else { "bool" };
            return Err(err(e.loc(), format!("expected {w} expression")));
        }
        Ok(())
    }

    fn infer(&self, e: &Expr, scope: &Scope<'a, '_>, pos: Pos) -> Result<Ty, LangError> {
        match e {
            Expr::IntLit { .. } => Ok(Ty::Int),
            Expr::BoolLit { .. } => Ok(Ty::Bool),
            Expr::Var { name, loc } => match scope.lookup(name) {
                Some(VarType::Scalar(s)) => Ok(s.into()),
                Some(VarType::IntArray(_)) => Err(err(
                    *loc,
                    format!("array `{name}` cannot be used as a value; index it"),
                )),
                None => Err(err(*loc, format!("undeclared variable `{name}`"))),
            },
            Expr::Index { base, index, loc } => {
                match scope.lookup(base) {
                    Some(VarType::IntArray(_)) => {}
                    Some(_) => return Err(err(*loc, format!("`{base}` is not an array"))),
                    None => return Err(err(*loc, format!("undeclared array `{base}`"))),
                }
                self.check_expr(index, scope, pos, Ty::Int)?;
                Ok(Ty::Int)
            }
            Expr::Unary { op, arg, loc } => match op {
                UnOp::Neg => {
                    self.check_expr(arg, scope, pos, Ty::Int)?;
                    Ok(Ty::Int)
                }
                UnOp::Not => {
                    self.check_expr(arg, scope, pos, Ty::Bool)?;
                    let _ = loc;
                    Ok(Ty::Bool)
                }
            },
            Expr::Binary { op, lhs, rhs, loc } => {
                if *op == BinOp::Implies && pos == Pos::Code {
                    return Err(err(*loc, "`==>` is only allowed in annotations".into()));
                }
                match op {
                    _ if op.is_arith() => {
                        self.check_expr(lhs, scope, pos, Ty::Int)?;
                        self.check_expr(rhs, scope, pos, Ty::Int)?;
                        Ok(Ty::Int)
                    }
                    BinOp::Eq | BinOp::Ne => {
                        let lt = self.infer(lhs, scope, pos)?;
                        self.check_expr(rhs, scope, pos, lt)?;
                        Ok(Ty::Bool)
                    }
                    _ if op.is_comparison() => {
                        self.check_expr(lhs, scope, pos, Ty::Int)?;
                        self.check_expr(rhs, scope, pos, Ty::Int)?;
                        Ok(Ty::Bool)
                    }
                    _ => {
                        self.check_expr(lhs, scope, pos, Ty::Bool)?;
                        self.check_expr(rhs, scope, pos, Ty::Bool)?;
                        Ok(Ty::Bool)
                    }
                }
            }
            Expr::Old { arg, loc } => {
                if !matches!(pos, Pos::Ensures(_)) {
                    return Err(err(
                        *loc,
                        "`\\old` is only allowed in `ensures` clauses".into(),
                    ));
                }
                self.infer(arg, scope, pos)
            }
            Expr::OldRef { loc, .. } => Err(err(
                *loc,
                "internal snapshot reference cannot appear in source".into(),
            )),
            Expr::Result { loc } => match pos {
                Pos::Ensures(Some(ret)) => Ok(ret.into()),
                Pos::Ensures(None) => Err(err(
                    *loc,
                    "`\\result` cannot be used in the contract of a void function".into(),
                )),
                _ => Err(err(
                    *loc,
                    "`\\result` is only allowed in `ensures` clauses".into(),
                )),
            },
            Expr::Quant {
                var,
                lo,
                hi,
                body,
                loc,
                ..
            } => {
                if pos == Pos::Code {
                    return Err(err(*loc, "quantifiers are only allowed in annotations".into()));
                }
                self.check_expr(lo, scope, pos, Ty::Int)?;
                self.check_expr(hi, scope, pos, Ty::Int)?;
                if scope.lookup(var).is_some() {
                    return Err(err(
                        *loc,
                        format!("quantifier variable `{var}` shadows an existing name"),
                    ));
                }
                let mut inner = scope.child();
                inner.declare(var, VarType::Scalar(ScalarType::Int), *loc)?;
                self.check_expr(body, &inner, pos, Ty::Bool)?;
                Ok(Ty::Bool)
            }
        }
    }

    // ----- whole-program checks -----

    fn check_called_have_assigns(&self) -> Result<(), LangError> {
        for f in &self.program.functions {
            let mut callees = BTreeMap::new();
            collect_callees(&f.body, &mut callees);
            for (callee, loc) in callees {
                if let Some(def) = self.sigs.map.get(callee.as_str()) {
                    if def.contract.assigns.is_none() {
                        return Err(err(
                            loc,
                            format!(
                                "`{callee}` is called but its contract has no `assigns` clause"
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), LangError> {
        // DFS from the entry; gray nodes on the stack signal a cycle.
        // Recursion depth is bounded by the number of functions.
        let mut state: HashMap<&str, u8> = HashMap::new(); // 1 = on stack, 2 = done
        fn dfs<'a>(
            name: &'a str,
            sigs: &FnSigs<'a>,
            state: &mut HashMap<&'a str, u8>,
        ) -> Result<(), LangError> {
            state.insert(name, 1);
            let Some(def) = sigs.map.get(name) else {
                return Ok(());
            };
            let mut callees = BTreeMap::new();
            collect_callees(&def.body, &mut callees);
            for (callee, loc) in callees {
                let callee_ref = sigs
                    .map
                    .keys()
                    .find(|k| **k == callee.as_str())
                    .copied()
                    .unwrap_or_default();
                match state.get(callee.as_str()) {
                    Some(1) => {
                        return Err(err(
                            loc,
                            format!("recursive call cycle through `{callee}` is not supported"),
                        ))
                    }
                    Some(2) => {}
                    _ => {
                        if !callee_ref.is_empty() {
                            dfs(callee_ref, sigs, state)?;
                        }
                    }
                }
            }
            state.insert(name, 2);
            Ok(())
        }
        dfs(self.program.entry.as_str(), &self.sigs, &mut state)
    }
}

fn check_range(lo: i64, hi: i64, len: u32, loc: Loc, base: &str) -> Result<(), LangError> {
    if lo < 0 || hi < lo || hi >= len as i64 {
        return Err(err(
            loc,
            format!("range `{base}[{lo}..{hi}]` is not within 0..{}", len - 1),
        ));
    }
    Ok(())
}

/// Collects every base name assigned anywhere in a block (including by calls,
/// via the callee's declared assigns), plus the names declared locally.
fn collect_assigned(
    block: &Block,
    assigned: &mut BTreeMap<String, Loc>,
    local_decls: &mut HashSet<String>,
    sigs: &FnSigs<'_>,
) {
    for stmt in &block.stmts {
        match &stmt.kind {
            StmtKind::Decl { name, .. } => {
                local_decls.insert(name.clone());
            }
            StmtKind::Assign { target, .. } => {
                assigned
                    .entry(target.base_name().to_string())
                    .or_insert(target.loc());
            }
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                collect_assigned(then_branch, assigned, local_decls, sigs);
                if let Some(b) = else_branch {
                    collect_assigned(b, assigned, local_decls, sigs);
                }
            }
            StmtKind::While { body, .. } => {
                collect_assigned(body, assigned, local_decls, sigs);
            }
            StmtKind::Call { target, callee, .. } => {
                if let Some(t) = target {
                    assigned.entry(t.base_name().to_string()).or_insert(t.loc());
                }
                if let Some(def) = sigs.map.get(callee.as_str()) {
                    if let Some(contract_assigns) = &def.contract.assigns {
                        for t in contract_assigns {
                            assigned
                                .entry(t.base_name().to_string())
                                .or_insert(stmt.loc);
                        }
                    }
                }
            }
            StmtKind::Return { .. } | StmtKind::Assert { .. } => {}
        }
    }
}

fn collect_callees(block: &Block, out: &mut BTreeMap<String, Loc>) {
    for stmt in &block.stmts {
        match &stmt.kind {
            StmtKind::Call { callee, .. } => {
                out.entry(callee.clone()).or_insert(stmt.loc);
            }
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                collect_callees(then_branch, out);
                if let Some(b) = else_branch {
                    collect_callees(b, out);
                }
            }
            StmtKind::While { body, .. } => collect_callees(body, out),
            _ => {}
        }
    }
}

fn err(loc: Loc, msg: String) -> LangError {
    LangError::Validate { loc, msg }
}

// ----- scope -----

struct Scope<'a, 'c> {
    checker: &'c Checker<'a>,
    /// Flat stack of (name, type); `mark`/`pop_to` delimit block scopes.
    names: Vec<(String, VarType)>,
}

impl<'a, 'c> Scope<'a, 'c> {
    fn new(checker: &'c Checker<'a>, _f: &FunctionDef) -> Self {
        Scope {
            checker,
            names: Vec::new(),
        }
    }

    fn child(&self) -> Scope<'a, 'c> {
        Scope {
            checker: self.checker,
            names: self.names.clone(),
        }
    }

    fn mark(&self) -> usize {
        self.names.len()
    }

    fn pop_to(&mut self, mark: usize) {
        self.names.truncate(mark);
    }

    fn declare(&mut self, name: &str, ty: VarType, loc: Loc) -> Result<(), LangError> {
        if self.names.iter().any(|(n, _)| n == name)
            || self.checker.globals.contains_key(name)
            || self.checker.sigs.map.contains_key(name)
        {
            return Err(err(
                loc,
                format!("`{name}` is already declared (shadowing is not allowed)"),
            ));
        }
        self.names.push((name.to_string(), ty));
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<VarType> {
        if let Some((_, ty)) = self.names.iter().rev().find(|(n, _)| n == name) {
            return Some(*ty);
        }
        self.checker.globals.get(name).copied()
    }
}
