//! Independent reference evaluator.
//!
//! Executes the *source* program (not the instrumented form) under fully
//! checked semantics, as a second implementation to cross-check the
//! instrumented interpreter: annotations are evaluated inline at the source
//! positions where the instrumented variant plants its checks, `\old` values
//! are keyed by source location instead of numbered slots, loop baselines
//! live in Rust locals instead of slot tables, and machine arithmetic is
//! computed in 128 bits followed by a range check instead of checked 64-bit
//! operations. Observable behaviour must nevertheless agree with
//! [`super::run`] on the fully checked variant whenever neither run exhausts
//! its step budget.

use std::collections::{BTreeMap, HashMap};

use crate::lang::{
    input_signature, AnnId, AssignTarget, BinOp, Block, Expr, FunctionDef, Loc, Program,
    ScalarType, Stmt, StmtKind, UnOp, VarType,
};

use super::{PredVal, RunLimits, RunOutcome, RuntimeErrorKind, Stored, Value};

/// How a reference run ended. Locations are deliberately omitted: agreement
/// is judged on the failure kind and the blamed annotation.
#[derive(Debug, Clone, PartialEq)]
pub enum RefOutcome {
    Ok,
    CheckFailed { aid: AnnId },
    AssumptionViolated { aid: AnnId },
    RuntimeError { error: RuntimeErrorKind },
    ResourceExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefResult {
    pub outcome: RefOutcome,
    pub ret: Option<Value>,
    pub globals: BTreeMap<String, Stored>,
}

/// True when an instrumented outcome and a reference outcome describe the
/// same behaviour.
pub fn agrees(run: &RunOutcome, reference: &RefOutcome) -> bool {
    match (run, reference) {
        (RunOutcome::Ok, RefOutcome::Ok) => true,
        (RunOutcome::CheckFailed { aid: a, .. }, RefOutcome::CheckFailed { aid: b }) => a == b,
        (RunOutcome::AssumptionViolated { aid: a, .. }, RefOutcome::AssumptionViolated { aid: b }) => {
            a == b
        }
        (RunOutcome::RuntimeError { error: a, .. }, RefOutcome::RuntimeError { error: b }) => {
            a == b
        }
        (RunOutcome::ResourceExhausted { .. }, RefOutcome::ResourceExhausted) => true,
        _ => false,
    }
}

/// Runs the source program on main inputs under fully checked semantics.
pub fn run_reference(program: &Program, main: &[i64], limits: &RunLimits) -> RefResult {
    let mut r = RefInterp {
        p: program,
        limits,
        globals: BTreeMap::new(),
        stack: Vec::new(),
        steps: 0,
    };
    let booted = r.boot(main);
    let (outcome, ret) = match booted {
        Ok(v) => (RefOutcome::Ok, v),
        Err(h) => (
            match h {
                RHalt::Check(aid) => RefOutcome::CheckFailed { aid },
                RHalt::Assume(aid) => RefOutcome::AssumptionViolated { aid },
                RHalt::Error(error) => RefOutcome::RuntimeError { error },
                RHalt::Resource => RefOutcome::ResourceExhausted,
            },
            None,
        ),
    };
    RefResult {
        outcome,
        ret,
        globals: r.globals,
    }
}

enum RHalt {
    Check(AnnId),
    Assume(AnnId),
    Error(RuntimeErrorKind),
    Resource,
}

enum RFlow {
    Next,
    Return(Option<Value>),
}

struct RFrame {
    locals: HashMap<String, Stored>,
    /// `\old` values, keyed by the source location of the `\old` node.
    olds: HashMap<(u32, u32), PredVal>,
    result: Option<Value>,
}

struct RefInterp<'a> {
    p: &'a Program,
    limits: &'a RunLimits,
    globals: BTreeMap<String, Stored>,
    stack: Vec<RFrame>,
    steps: u64,
}

impl<'a> RefInterp<'a> {
    fn boot(&mut self, main: &[i64]) -> Result<Option<Value>, RHalt> {
        for g in &self.p.globals {
            let stored = match g.ty {
                VarType::Scalar(ScalarType::Int) => Stored::Scalar(Value::Int(g.init.unwrap_or(0))),
                VarType::Scalar(ScalarType::Bool) => {
                    Stored::Scalar(Value::Bool(g.init.unwrap_or(0) != 0))
                }
                VarType::IntArray(len) => Stored::Array(vec![0; len as usize]),
            };
            self.globals.insert(g.name.clone(), stored);
        }
        let mut cursor = 0usize;
        let mut args = Vec::new();
        for input in input_signature(self.p) {
            let w = input.width();
            let slice = &main[cursor..cursor + w];
            cursor += w;
            match (input.is_param, input.ty) {
                (true, VarType::Scalar(ScalarType::Int)) => args.push(Value::Int(slice[0])),
                (true, VarType::Scalar(ScalarType::Bool)) => {
                    args.push(Value::Bool(slice[0] != 0));
                }
                (true, VarType::IntArray(_)) => {
                    unreachable!("parameters are scalar by construction")
                }
                (false, VarType::Scalar(ScalarType::Int)) => {
                    self.globals
                        .insert(input.name, Stored::Scalar(Value::Int(slice[0])));
                }
                (false, VarType::Scalar(ScalarType::Bool)) => {
                    self.globals
                        .insert(input.name, Stored::Scalar(Value::Bool(slice[0] != 0)));
                }
                (false, VarType::IntArray(_)) => {
                    self.globals.insert(input.name, Stored::Array(slice.to_vec()));
                }
            }
        }
        assert_eq!(
            cursor,
            main.len(),
            "main input vector does not match the entry input signature"
        );
        let entry = self.p.entry_fn();
        self.call_fn(entry, args, true)
    }

    fn call_fn(
        &mut self,
        f: &'a FunctionDef,
        args: Vec<Value>,
        is_entry: bool,
    ) -> Result<Option<Value>, RHalt> {
        let mut locals = HashMap::new();
        for (p, v) in f.params.iter().zip(args) {
            locals.insert(p.name.clone(), Stored::Scalar(v));
        }
        self.stack.push(RFrame {
            locals,
            olds: HashMap::new(),
            result: None,
        });
        let result = self.call_body(f, is_entry);
        self.stack.pop();
        result
    }

    fn call_body(&mut self, f: &'a FunctionDef, is_entry: bool) -> Result<Option<Value>, RHalt> {
        // Precondition: assumed for the entry function, checked for callees.
        let req = self.eval_pred_bool(&f.contract.requires)?;
        if !req {
            return Err(if is_entry {
                RHalt::Assume(f.contract.requires_id)
            } else {
                RHalt::Check(f.contract.requires_id)
            });
        }

        // Capture every `\old` operand of the postcondition, keyed by the
        // `\old` node's own source location, in source order.
        let mut old_nodes: Vec<(&Expr, Loc)> = Vec::new();
        f.contract.ensures.walk(&mut |n| {
            if let Expr::Old { arg, loc } = n {
                old_nodes.push((arg, *loc));
            }
        });
        for (arg, loc) in old_nodes {
            let v = self.eval_pred(arg, &mut Vec::new(), true)?;
            self.stack
                .last_mut()
                .expect("frame pushed by call_fn")
                .olds
                .insert((loc.line, loc.col), v);
        }

        let frame_snapshot = f.contract.assigns.as_ref().map(|_| self.globals.clone());

        let ret = match self.exec_block(&f.body)? {
            RFlow::Next => None,
            RFlow::Return(v) => v,
        };
        if f.ret.is_some() && ret.is_none() {
            return Err(RHalt::Error(RuntimeErrorKind::MissingReturn {
                func: f.name.clone(),
            }));
        }
        self.stack
            .last_mut()
            .expect("frame pushed by call_fn")
            .result = ret;

        if !self.eval_pred_bool(&f.contract.ensures)? {
            return Err(RHalt::Check(f.contract.ensures_id));
        }
        if let (Some(targets), Some(snap)) = (&f.contract.assigns, frame_snapshot) {
            if !self.frame_ok(&snap, targets) {
                return Err(RHalt::Check(
                    f.contract
                        .assigns_id
                        .expect("assigns clause owns an id when present"),
                ));
            }
        }
        Ok(ret)
    }

    fn exec_block(&mut self, block: &'a Block) -> Result<RFlow, RHalt> {
        for stmt in &block.stmts {
            match self.exec_stmt(stmt)? {
                RFlow::Next => {}
                ret @ RFlow::Return(_) => return Ok(ret),
            }
        }
        Ok(RFlow::Next)
    }

    fn exec_stmt(&mut self, stmt: &'a Stmt) -> Result<RFlow, RHalt> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(RHalt::Resource);
        }
        match &stmt.kind {
            StmtKind::Decl { name, ty, init } => {
                let stored = match (ty, init) {
                    (VarType::Scalar(_), Some(e)) => Stored::Scalar(self.eval_code(e)?),
                    (VarType::Scalar(ScalarType::Int), None) => Stored::Scalar(Value::Int(0)),
                    (VarType::Scalar(ScalarType::Bool), None) => Stored::Scalar(Value::Bool(false)),
                    (VarType::IntArray(len), _) => Stored::Array(vec![0; *len as usize]),
                };
                self.stack
                    .last_mut()
                    .expect("statement executes inside a frame")
                    .locals
                    .insert(name.clone(), stored);
                Ok(RFlow::Next)
            }
            StmtKind::Assign { target, value } => {
                let v = self.eval_code(value)?;
                match target {
                    crate::lang::Lhs::Var { name, .. } => self.store_var(name, v),
                    crate::lang::Lhs::Index { base, index, .. } => {
                        let idx = self.eval_code(index)?.as_int();
                        self.store_cell(base, idx as i128, v.as_int())?;
                    }
                }
                Ok(RFlow::Next)
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.eval_code(cond)?.as_bool() {
                    self.exec_block(then_branch)
                } else if let Some(b) = else_branch {
                    self.exec_block(b)
                } else {
                    Ok(RFlow::Next)
                }
            }
            StmtKind::While {
                cond,
                contract,
                body,
            } => {
                if !self.eval_pred_bool(&contract.invariant)? {
                    return Err(RHalt::Check(contract.inv_init_id));
                }
                let snap = self.globals.clone();
                let allowed: Vec<AssignTarget> = contract
                    .assigns
                    .iter()
                    .filter(|t| self.p.global(t.base_name()).is_some())
                    .cloned()
                    .collect();
                let mut iters: u64 = 0;
                loop {
                    if !self.eval_code(cond)?.as_bool() {
                        return Ok(RFlow::Next);
                    }
                    iters += 1;
                    if iters > self.limits.max_loop_iters {
                        return Err(RHalt::Resource);
                    }
                    let baseline = match &contract.variant {
                        Some(v) => {
                            let b = self.eval_pred(v, &mut Vec::new(), false)?.as_int();
                            if b < 0 {
                                return Err(RHalt::Check(
                                    contract
                                        .variant_nonneg_id
                                        .expect("variant clause owns a nonneg id"),
                                ));
                            }
                            Some(b)
                        }
                        None => None,
                    };
                    match self.exec_block(body)? {
                        RFlow::Next => {}
                        ret @ RFlow::Return(_) => return Ok(ret),
                    }
                    if !self.frame_ok(&snap, &allowed) {
                        return Err(RHalt::Check(contract.assigns_id));
                    }
                    if !self.eval_pred_bool(&contract.invariant)? {
                        return Err(RHalt::Check(contract.inv_preserve_id));
                    }
                    if let (Some(v), Some(b)) = (&contract.variant, baseline) {
                        let now = self.eval_pred(v, &mut Vec::new(), false)?.as_int();
                        if now >= b {
                            return Err(RHalt::Check(
                                contract
                                    .variant_decrease_id
                                    .expect("variant clause owns a decrease id"),
                            ));
                        }
                    }
                }
            }
            StmtKind::Call {
                target,
                callee,
                args,
            } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_code(a)?);
                }
                let def = self
                    .p
                    .function(callee)
                    .expect("calls are resolved during validation");
                let ret = self.call_fn(def, vals, false)?;
                if let Some(t) = target {
                    let v = ret.expect("validated: bound call returns a value");
                    match t {
                        crate::lang::Lhs::Var { name, .. } => self.store_var(name, v),
                        crate::lang::Lhs::Index { base, index, .. } => {
                            let idx = self.eval_code(index)?.as_int();
                            self.store_cell(base, idx as i128, v.as_int())?;
                        }
                    }
                }
                Ok(RFlow::Next)
            }
            StmtKind::Return { value } => {
                let v = match value {
                    Some(e) => Some(self.eval_code(e)?),
                    None => None,
                };
                Ok(RFlow::Return(v))
            }
            StmtKind::Assert { id, pred } => {
                if self.eval_pred_bool(pred)? {
                    Ok(RFlow::Next)
                } else {
                    Err(RHalt::Check(*id))
                }
            }
        }
    }

    fn frame_ok(&self, snap: &BTreeMap<String, Stored>, allowed: &[AssignTarget]) -> bool {
        for (name, now) in &self.globals {
            let fully_allowed = allowed.iter().any(
                |t| matches!(t, AssignTarget::Var { name: n, .. } if n == name),
            );
            if fully_allowed {
                continue;
            }
            let then = snap.get(name).expect("snapshot covers all globals");
            match (then, now) {
                (Stored::Scalar(a), Stored::Scalar(b)) => {
                    if a != b {
                        return false;
                    }
                }
                (Stored::Array(a), Stored::Array(b)) => {
                    for (idx, (va, vb)) in a.iter().zip(b).enumerate() {
                        let covered = allowed.iter().any(|t| {
                            matches!(t, AssignTarget::ArrayRange { base, lo, hi, .. }
                                if base == name && (idx as i64) >= *lo && (idx as i64) <= *hi)
                        });
                        if !covered && va != vb {
                            return false;
                        }
                    }
                }
                _ => unreachable!("global changed shape mid-run"),
            }
        }
        true
    }

    // ----- storage -----

    fn read_var(&self, name: &str) -> &Stored {
        if let Some(frame) = self.stack.last() {
            if let Some(v) = frame.locals.get(name) {
                return v;
            }
        }
        self.globals
            .get(name)
            .expect("validated: every name is in scope")
    }

    fn store_var(&mut self, name: &str, v: Value) {
        let frame = self
            .stack
            .last_mut()
            .expect("store happens inside a frame");
        if let Some(slot) = frame.locals.get_mut(name) {
            *slot = Stored::Scalar(v);
        } else {
            self.globals.insert(name.to_string(), Stored::Scalar(v));
        }
    }

    fn store_cell(&mut self, base: &str, idx: i128, v: i64) -> Result<(), RHalt> {
        let is_local = self
            .stack
            .last()
            .is_some_and(|f| f.locals.contains_key(base));
        let cells = if is_local {
            match self
                .stack
                .last_mut()
                .expect("store happens inside a frame")
                .locals
                .get_mut(base)
            {
                Some(Stored::Array(cells)) => cells,
                _ => unreachable!("validated: indexing a scalar"),
            }
        } else {
            match self.globals.get_mut(base) {
                Some(Stored::Array(cells)) => cells,
                _ => unreachable!("validated: indexing an unknown or scalar name"),
            }
        };
        if idx < 0 || idx >= cells.len() as i128 {
            let len = cells.len() as u32;
            return Err(RHalt::Error(RuntimeErrorKind::IndexOutOfBounds {
                base: base.to_string(),
                index: idx.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
                len,
            }));
        }
        cells[idx as usize] = v;
        Ok(())
    }

    // ----- code-level evaluation: 128-bit arithmetic, then a range check -----

    fn machine(&self, v: i128) -> Result<i64, RHalt> {
        if v < self.limits.int_min as i128 || v > self.limits.int_max as i128 {
            Err(RHalt::Error(RuntimeErrorKind::IntOverflow))
        } else {
            Ok(v as i64)
        }
    }

    fn eval_code(&mut self, e: &Expr) -> Result<Value, RHalt> {
        match e {
            Expr::IntLit { value, .. } => Ok(Value::Int(self.machine(*value as i128)?)),
            Expr::BoolLit { value, .. } => Ok(Value::Bool(*value)),
            Expr::Var { name, .. } => match self.read_var(name) {
                Stored::Scalar(v) => Ok(*v),
                Stored::Array(_) => unreachable!("validated: whole-array read"),
            },
            Expr::Index { base, index, .. } => {
                let idx = self.eval_code(index)?.as_int() as i128;
                let cells = match self.read_var(base) {
                    Stored::Array(cells) => cells,
                    Stored::Scalar(_) => unreachable!("validated: indexing a scalar"),
                };
                if idx < 0 || idx >= cells.len() as i128 {
                    let len = cells.len() as u32;
                    return Err(RHalt::Error(RuntimeErrorKind::IndexOutOfBounds {
                        base: base.clone(),
                        index: idx as i64,
                        len,
                    }));
                }
                Ok(Value::Int(cells[idx as usize]))
            }
            Expr::Unary { op, arg, .. } => {
                let v = self.eval_code(arg)?;
                match op {
                    UnOp::Neg => Ok(Value::Int(self.machine(-(v.as_int() as i128))?)),
                    UnOp::Not => Ok(Value::Bool(!v.as_bool())),
                }
            }
            Expr::Binary { op, lhs, rhs, .. } => match op {
                BinOp::And => {
                    if !self.eval_code(lhs)?.as_bool() {
                        return Ok(Value::Bool(false));
                    }
                    Ok(Value::Bool(self.eval_code(rhs)?.as_bool()))
                }
                BinOp::Or => {
                    if self.eval_code(lhs)?.as_bool() {
                        return Ok(Value::Bool(true));
                    }
                    Ok(Value::Bool(self.eval_code(rhs)?.as_bool()))
                }
                BinOp::Eq | BinOp::Ne => {
                    let l = self.eval_code(lhs)?;
                    let r = self.eval_code(rhs)?;
                    let same = match (l, r) {
                        (Value::Int(a), Value::Int(b)) => a == b,
                        (Value::Bool(a), Value::Bool(b)) => a == b,
                        _ => unreachable!("validated: comparison operand types"),
                    };
                    Ok(Value::Bool(if *op == BinOp::Eq { same } else { !same }))
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let l = self.eval_code(lhs)?.as_int();
                    let r = self.eval_code(rhs)?.as_int();
                    Ok(Value::Bool(match op {
                        BinOp::Lt => l < r,
                        BinOp::Le => l <= r,
                        BinOp::Gt => l > r,
                        BinOp::Ge => l >= r,
                        _ => unreachable!(),
                    }))
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    let l = self.eval_code(lhs)?.as_int() as i128;
                    let r = self.eval_code(rhs)?.as_int() as i128;
                    let v = match op {
                        BinOp::Add => l + r,
                        BinOp::Sub => l - r,
                        BinOp::Mul => l * r,
                        BinOp::Div => {
                            if r == 0 {
                                return Err(RHalt::Error(RuntimeErrorKind::DivByZero));
                            }
                            l / r
                        }
                        BinOp::Mod => {
                            if r == 0 {
                                return Err(RHalt::Error(RuntimeErrorKind::ModByZero));
                            }
                            l % r
                        }
                        _ => unreachable!(),
                    };
                    Ok(Value::Int(self.machine(v)?))
                }
                BinOp::Implies => unreachable!("validated: `==>` never appears in code"),
            },
            Expr::Old { .. } | Expr::OldRef { .. } | Expr::Result { .. } | Expr::Quant { .. } => {
                unreachable!("validated: annotation-only form in code")
            }
        }
    }

    // ----- annotation-level evaluation -----

    fn eval_pred_bool(&mut self, e: &Expr) -> Result<bool, RHalt> {
        Ok(self.eval_pred(e, &mut Vec::new(), false)?.as_bool())
    }

    /// `pre_state = true` while capturing `\old` operands: there, a nested
    /// `\old(e)` is simply `e`.
    fn eval_pred(
        &mut self,
        e: &Expr,
        env: &mut Vec<(String, i128)>,
        pre_state: bool,
    ) -> Result<PredVal, RHalt> {
        match e {
            Expr::IntLit { value, .. } => Ok(PredVal::Int(*value as i128)),
            Expr::BoolLit { value, .. } => Ok(PredVal::Bool(*value)),
            Expr::Var { name, .. } => {
                if let Some((_, v)) = env.iter().rev().find(|(n, _)| n == name) {
                    return Ok(PredVal::Int(*v));
                }
                match self.read_var(name) {
                    Stored::Scalar(Value::Int(v)) => Ok(PredVal::Int(*v as i128)),
                    Stored::Scalar(Value::Bool(b)) => Ok(PredVal::Bool(*b)),
                    Stored::Array(_) => unreachable!("validated: whole-array read"),
                }
            }
            Expr::Index { base, index, .. } => {
                let idx = self.eval_pred(index, env, pre_state)?.as_int();
                let cells = match self.read_var(base) {
                    Stored::Array(cells) => cells,
                    Stored::Scalar(_) => unreachable!("validated: indexing a scalar"),
                };
                if idx < 0 || idx >= cells.len() as i128 {
                    let len = cells.len() as u32;
                    return Err(RHalt::Error(RuntimeErrorKind::IndexOutOfBounds {
                        base: base.clone(),
                        index: idx.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
                        len,
                    }));
                }
                Ok(PredVal::Int(cells[idx as usize] as i128))
            }
            Expr::Unary { op, arg, .. } => {
                let v = self.eval_pred(arg, env, pre_state)?;
                match op {
                    UnOp::Neg => Ok(PredVal::Int(
                        v.as_int()
                            .checked_neg()
                            .ok_or(RHalt::Error(RuntimeErrorKind::PredOverflow))?,
                    )),
                    UnOp::Not => Ok(PredVal::Bool(!v.as_bool())),
                }
            }
            Expr::Binary { op, lhs, rhs, .. } => match op {
                BinOp::And => {
                    if !self.eval_pred(lhs, env, pre_state)?.as_bool() {
                        return Ok(PredVal::Bool(false));
                    }
                    Ok(PredVal::Bool(self.eval_pred(rhs, env, pre_state)?.as_bool()))
                }
                BinOp::Or => {
                    if self.eval_pred(lhs, env, pre_state)?.as_bool() {
                        return Ok(PredVal::Bool(true));
                    }
                    Ok(PredVal::Bool(self.eval_pred(rhs, env, pre_state)?.as_bool()))
                }
                BinOp::Implies => {
                    if !self.eval_pred(lhs, env, pre_state)?.as_bool() {
                        return Ok(PredVal::Bool(true));
                    }
                    Ok(PredVal::Bool(self.eval_pred(rhs, env, pre_state)?.as_bool()))
                }
                BinOp::Eq | BinOp::Ne => {
                    let l = self.eval_pred(lhs, env, pre_state)?;
                    let r = self.eval_pred(rhs, env, pre_state)?;
                    let same = match (l, r) {
                        (PredVal::Int(a), PredVal::Int(b)) => a == b,
                        (PredVal::Bool(a), PredVal::Bool(b)) => a == b,
                        _ => unreachable!("validated: comparison operand types"),
                    };
                    Ok(PredVal::Bool(if *op == BinOp::Eq { same } else { !same }))
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let l = self.eval_pred(lhs, env, pre_state)?.as_int();
                    let r = self.eval_pred(rhs, env, pre_state)?.as_int();
                    Ok(PredVal::Bool(match op {
                        BinOp::Lt => l < r,
                        BinOp::Le => l <= r,
                        BinOp::Gt => l > r,
                        BinOp::Ge => l >= r,
                        _ => unreachable!(),
                    }))
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    let l = self.eval_pred(lhs, env, pre_state)?.as_int();
                    let r = self.eval_pred(rhs, env, pre_state)?.as_int();
                    let v = match op {
                        BinOp::Add => l.checked_add(r),
                        BinOp::Sub => l.checked_sub(r),
                        BinOp::Mul => l.checked_mul(r),
                        BinOp::Div => {
                            if r == 0 {
                                return Err(RHalt::Error(RuntimeErrorKind::DivByZero));
                            }
                            l.checked_div(r)
                        }
                        BinOp::Mod => {
                            if r == 0 {
                                return Err(RHalt::Error(RuntimeErrorKind::ModByZero));
                            }
                            l.checked_rem(r)
                        }
                        _ => unreachable!(),
                    }
                    .ok_or(RHalt::Error(RuntimeErrorKind::PredOverflow))?;
                    Ok(PredVal::Int(v))
                }
            },
            Expr::Old { arg, loc } => {
                if pre_state {
                    self.eval_pred(arg, env, pre_state)
                } else {
                    Ok(*self
                        .stack
                        .last()
                        .expect("predicate evaluates inside a frame")
                        .olds
                        .get(&(loc.line, loc.col))
                        .expect("every \\old operand was captured at entry"))
                }
            }
            Expr::OldRef { .. } => unreachable!("the reference evaluator never sees OldRef"),
            Expr::Result { .. } => {
                let v = self
                    .stack
                    .last()
                    .expect("predicate evaluates inside a frame")
                    .result
                    .expect("\\result is bound before the postcondition check");
                Ok(match v {
                    Value::Int(n) => PredVal::Int(n as i128),
                    Value::Bool(b) => PredVal::Bool(b),
                })
            }
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
                let mut lo_v = self.eval_pred(lo, env, pre_state)?.as_int();
                if *lo_strict {
                    lo_v += 1;
                }
                let mut hi_v = self.eval_pred(hi, env, pre_state)?.as_int();
                if *hi_strict {
                    hi_v -= 1;
                }
                let width = if hi_v < lo_v {
                    0
                } else {
                    (hi_v - lo_v + 1) as u128
                };
                if width > self.limits.max_quant_width as u128 {
                    return Err(RHalt::Error(RuntimeErrorKind::QuantifierTooWide {
                        width: width.min(u64::MAX as u128) as u64,
                    }));
                }
                let mut k = lo_v;
                while k <= hi_v {
                    env.push((var.clone(), k));
                    let b = self.eval_pred(body, env, pre_state)?.as_bool();
                    env.pop();
                    if *universal && !b {
                        return Ok(PredVal::Bool(false));
                    }
                    if !*universal && b {
                        return Ok(PredVal::Bool(true));
                    }
                    k += 1;
                }
                Ok(PredVal::Bool(*universal))
            }
        }
    }
}
