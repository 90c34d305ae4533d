//! Concrete execution of instrumented programs.
//!
//! A run takes a *test datum* — concrete values for the entry function's
//! inputs plus a stream of values feeding the nondeterministic choices of
//! contract stand-ins — and executes the instrumented statements under
//! explicit resource limits. Every run is fully deterministic in the datum.
//!
//! Semantics worth calling out:
//!
//! * Executable code computes in machine integers: every arithmetic result
//!   and every stored value must fit the configured int range (two's
//!   complement 32-bit by default); violations are runtime errors, reported
//!   like failing annotations rather than silently wrapping.
//! * Annotation predicates compute in exact integer arithmetic (128-bit;
//!   overflowing even that is an error), so a contract can talk about
//!   `x * x` without itself overflowing.
//! * Division and modulo truncate toward zero; dividing by zero, indexing
//!   out of bounds, exceeding the quantifier width limit and falling off the
//!   end of a non-void function are runtime errors.
//! * `\old` operands are captured unconditionally in the pre-state, even
//!   under a guard; a nondeterministic bool treats any non-zero stream value
//!   as `true`.
//!
//! Outcomes distinguish *failures* (a failed check or a runtime error — both
//! are counter-example material), *infeasible runs* (a violated assumption),
//! *exhausted resources*, and *exhausted nondeterminism* (the run asked for
//! more stand-in values than the datum supplies — the exploration layer
//! reacts by extending the stream).

pub mod reference;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::lang::{AnnId, BinOp, Expr, Lhs, Loc, ScalarType, StmtId, UnOp, VarType};
use crate::transform::{CheckKind, IFunction, IStmt, IStmtKind, InstrumentedProgram, Variant};

/// A machine value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn as_int(self) -> i64 {
        match self {
            Value::Int(v) => v,
            Value::Bool(_) => unreachable!("type-checked program read bool as int"),
        }
    }

    pub fn as_bool(self) -> bool {
        match self {
            Value::Bool(v) => v,
            Value::Int(_) => unreachable!("type-checked program read int as bool"),
        }
    }
}

/// What a variable slot holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Stored {
    Scalar(Value),
    Array(Vec<i64>),
}

/// Exact value of an annotation-level (mathematical) expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredVal {
    Int(i128),
    Bool(bool),
}

impl PredVal {
    fn as_int(self) -> i128 {
        match self {
            PredVal::Int(v) => v,
            PredVal::Bool(_) => unreachable!("type-checked predicate read bool as integer"),
        }
    }

    fn as_bool(self) -> bool {
        match self {
            PredVal::Bool(v) => v,
            PredVal::Int(_) => unreachable!("type-checked predicate read integer as bool"),
        }
    }
}

/// One concrete test input: values for the entry inputs (parameters first,
/// then input globals, arrays flattened cell by cell) and the stream feeding
/// nondeterministic stand-in choices, consumed left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TestDatum {
    pub main: Vec<i64>,
    pub nondet: Vec<i64>,
}

impl TestDatum {
    pub fn main_only(main: Vec<i64>) -> Self {
        TestDatum {
            main,
            nondet: Vec::new(),
        }
    }
}

/// Runtime errors. All of them terminate the run and are reported like a
/// failing annotation (they are counter-example material for the prover's
/// implicit safety obligations).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RuntimeErrorKind {
    DivByZero,
    ModByZero,
    /// Machine-int range violated (or 64-bit evaluation overflowed) in code.
    IntOverflow,
    /// Exact annotation arithmetic exceeded 128 bits.
    PredOverflow,
    IndexOutOfBounds {
        base: String,
        index: i64,
        len: u32,
    },
    /// A bounded quantifier ranged over more values than allowed.
    QuantifierTooWide {
        width: u64,
    },
    /// A non-void function fell off the end of its body.
    MissingReturn {
        func: String,
    },
}

impl std::fmt::Display for RuntimeErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RuntimeErrorKind::DivByZero => f.write_str("division by zero"),
            RuntimeErrorKind::ModByZero => f.write_str("modulo by zero"),
            RuntimeErrorKind::IntOverflow => f.write_str("machine integer range exceeded"),
            RuntimeErrorKind::PredOverflow => f.write_str("annotation arithmetic overflow"),
            RuntimeErrorKind::IndexOutOfBounds { base, index, len } => {
                write!(f, "index {index} out of bounds for `{base}[{len}]`")
            }
            RuntimeErrorKind::QuantifierTooWide { width } => {
                write!(f, "quantifier range of {width} values exceeds the limit")
            }
            RuntimeErrorKind::MissingReturn { func } => {
                write!(f, "`{func}` reached the end of its body without returning")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResourceKind {
    Steps,
    LoopIterations,
}

/// How one run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum RunOutcome {
    /// Ran to completion with every check passing.
    Ok,
    /// An instrumented check failed: this datum is a counter-example for the
    /// annotation `aid`.
    CheckFailed { aid: AnnId, stmt: StmtId, loc: Loc },
    /// An assumption (entry precondition, stand-in postcondition) was not
    /// satisfied: the datum is infeasible and is silently discarded.
    AssumptionViolated { aid: AnnId, stmt: StmtId, loc: Loc },
    /// The program itself misbehaved; reported like a failing annotation.
    RuntimeError {
        error: RuntimeErrorKind,
        stmt: Option<StmtId>,
        loc: Loc,
    },
    /// A resource limit fired; the datum is neither a counter-example nor a
    /// pass, and exploration completeness is lost.
    ResourceExhausted {
        what: ResourceKind,
        stmt: StmtId,
        loc: Loc,
    },
    /// The run requested one more nondeterministic value than the datum
    /// carries; `ty` is the type the stand-in asked for.
    NondetExhausted { ty: ScalarType },
}

impl RunOutcome {
    /// Failures are counter-example material: failed checks and runtime
    /// errors.
    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            RunOutcome::CheckFailed { .. } | RunOutcome::RuntimeError { .. }
        )
    }

    /// The annotation a failed check blames, if any.
    pub fn failed_annotation(&self) -> Option<AnnId> {
        match self {
            RunOutcome::CheckFailed { aid, .. } => Some(*aid),
            _ => None,
        }
    }
}

/// Recorded events. `TraceMode::Checks` keeps only check/assume events;
/// `TraceMode::Full` also records branches, calls and nondet draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Branch {
        stmt: StmtId,
        loc: Loc,
        taken: bool,
    },
    Check {
        aid: AnnId,
        stmt: StmtId,
        loc: Loc,
        pass: bool,
    },
    Assume {
        aid: AnnId,
        stmt: StmtId,
        loc: Loc,
        satisfied: bool,
    },
    Call {
        stmt: StmtId,
        callee: String,
    },
    ReturnFrom {
        callee: String,
    },
    Nondet {
        loc: Loc,
        value: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    #[default]
    Off,
    Checks,
    Full,
}

/// Resource and semantic limits for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLimits {
    pub max_steps: u64,
    /// Per dynamic loop execution.
    pub max_loop_iters: u64,
    pub int_min: i64,
    pub int_max: i64,
    pub max_quant_width: u64,
    pub trace: TraceMode,
    /// Capture the entry return value and final globals (used by oracles).
    pub capture_final_state: bool,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            max_steps: 1_000_000,
            max_loop_iters: 10_000,
            int_min: i32::MIN as i64,
            int_max: i32::MAX as i64,
            max_quant_width: 10_000,
            trace: TraceMode::Off,
            capture_final_state: false,
        }
    }
}

impl RunLimits {
    pub fn with_trace(mut self, mode: TraceMode) -> Self {
        self.trace = mode;
        self
    }
}

/// Final observable state, captured when `capture_final_state` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub ret: Option<Value>,
    pub globals: BTreeMap<String, Stored>,
}

/// Result of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub steps: u64,
    /// FNV-1a hash over the branch decisions of the run — two runs with the
    /// same hash took the same control-flow path.
    pub path_hash: u64,
    /// Number of nondet stream values consumed.
    pub nondet_used: usize,
    pub trace: Vec<TraceEvent>,
    pub final_state: Option<FinalState>,
}

/// Executes the instrumented program on one datum.
pub fn run(ip: &InstrumentedProgram, datum: &TestDatum, limits: &RunLimits) -> RunResult {
    let mut interp = Interp {
        ip,
        limits,
        nondet: &datum.nondet,
        nondet_pos: 0,
        globals: BTreeMap::new(),
        frames: Vec::new(),
        steps: 0,
        path_hash: FNV_OFFSET,
        trace: Vec::new(),
        cur_stmt: None,
    };
    let boot = interp.boot(&datum.main);
    let (outcome, ret) = match boot {
        Ok(ret) => (RunOutcome::Ok, ret),
        Err(Stop(outcome)) => (outcome, None),
    };
    let final_state = limits.capture_final_state.then(|| FinalState {
        ret,
        globals: interp.globals.clone(),
    });
    RunResult {
        outcome,
        steps: interp.steps,
        path_hash: interp.path_hash,
        nondet_used: interp.nondet_pos,
        trace: interp.trace,
        final_state,
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv_step(h: &mut u64, byte: u8) {
    *h ^= byte as u64;
    *h = h.wrapping_mul(FNV_PRIME);
}

/// Terminating condition, propagated up through `Result`.
struct Stop(RunOutcome);

enum Flow {
    Next,
    Return(Option<Value>),
}

struct Frame {
    locals: HashMap<String, Stored>,
    olds: Vec<Option<PredVal>>,
    frame_snaps: Vec<Option<BTreeMap<String, Stored>>>,
    meas: Vec<Option<i128>>,
    result: Option<Value>,
}

struct Interp<'a> {
    ip: &'a InstrumentedProgram,
    limits: &'a RunLimits,
    nondet: &'a [i64],
    nondet_pos: usize,
    globals: BTreeMap<String, Stored>,
    frames: Vec<Frame>,
    steps: u64,
    path_hash: u64,
    trace: Vec<TraceEvent>,
    cur_stmt: Option<StmtId>,
}

impl<'a> Interp<'a> {
    fn boot(&mut self, main: &[i64]) -> Result<Option<Value>, Stop> {
        for g in &self.ip.globals {
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
        for input in &self.ip.inputs {
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
                        .insert(input.name.clone(), Stored::Scalar(Value::Int(slice[0])));
                }
                (false, VarType::Scalar(ScalarType::Bool)) => {
                    self.globals
                        .insert(input.name.clone(), Stored::Scalar(Value::Bool(slice[0] != 0)));
                }
                (false, VarType::IntArray(_)) => {
                    self.globals
                        .insert(input.name.clone(), Stored::Array(slice.to_vec()));
                }
            }
        }
        assert_eq!(
            cursor,
            main.len(),
            "main input vector does not match the entry input signature"
        );

        let entry = self.ip.entry.as_str();
        self.call(entry, args, None)
    }

    fn call(
        &mut self,
        fname: &str,
        args: Vec<Value>,
        call_stmt: Option<StmtId>,
    ) -> Result<Option<Value>, Stop> {
        let f: &IFunction = self
            .ip
            .function(fname)
            .expect("calls are resolved during validation");
        if self.limits.trace == TraceMode::Full {
            self.trace.push(TraceEvent::Call {
                stmt: call_stmt.unwrap_or(StmtId(u32::MAX)),
                callee: fname.to_string(),
            });
        }
        let mut locals = HashMap::new();
        for (p, v) in f.params.iter().zip(args) {
            locals.insert(p.name.clone(), Stored::Scalar(v));
        }
        self.frames.push(Frame {
            locals,
            olds: vec![None; f.old_slots as usize],
            frame_snaps: vec![None; f.frame_slots as usize],
            meas: vec![None; f.int_slots as usize],
            result: None,
        });

        let run = (|| -> Result<Option<Value>, Stop> {
            match self.exec_block(&f.prologue)? {
                Flow::Next => {}
                Flow::Return(_) => unreachable!("prologues contain no return"),
            }
            let ret = match self.exec_block(&f.body)? {
                Flow::Next => None,
                Flow::Return(v) => v,
            };
            if f.ret.is_some() && ret.is_none() {
                return Err(Stop(RunOutcome::RuntimeError {
                    error: RuntimeErrorKind::MissingReturn {
                        func: f.name.clone(),
                    },
                    stmt: None,
                    loc: f.loc,
                }));
            }
            self.frames.last_mut().expect("frame pushed above").result = ret;
            match self.exec_block(&f.epilogue)? {
                Flow::Next => {}
                Flow::Return(_) => unreachable!("epilogues contain no return"),
            }
            Ok(ret)
        })();

        self.frames.pop();
        if run.is_ok() && self.limits.trace == TraceMode::Full {
            self.trace.push(TraceEvent::ReturnFrom {
                callee: fname.to_string(),
            });
        }
        run
    }

    fn exec_block(&mut self, stmts: &[IStmt]) -> Result<Flow, Stop> {
        for s in stmts {
            match self.exec_stmt(s)? {
                Flow::Next => {}
                ret @ Flow::Return(_) => return Ok(ret),
            }
        }
        Ok(Flow::Next)
    }

    fn exec_stmt(&mut self, s: &IStmt) -> Result<Flow, Stop> {
        self.cur_stmt = Some(s.id);
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(Stop(RunOutcome::ResourceExhausted {
                what: ResourceKind::Steps,
                stmt: s.id,
                loc: s.loc,
            }));
        }
        match &s.kind {
            IStmtKind::Decl { name, ty, init } => {
                let stored = match (ty, init) {
                    (VarType::Scalar(_), Some(e)) => Stored::Scalar(self.eval_code(e)?),
                    (VarType::Scalar(ScalarType::Int), None) => Stored::Scalar(Value::Int(0)),
                    (VarType::Scalar(ScalarType::Bool), None) => Stored::Scalar(Value::Bool(false)),
                    (VarType::IntArray(len), _) => Stored::Array(vec![0; *len as usize]),
                };
                self.frames
                    .last_mut()
                    .expect("statement executes inside a frame")
                    .locals
                    .insert(name.clone(), stored);
                Ok(Flow::Next)
            }
            IStmtKind::Assign { target, value } => {
                let v = self.eval_code(value)?;
                self.store(target, v)?;
                Ok(Flow::Next)
            }
            IStmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let taken = self.eval_code(cond)?.as_bool();
                self.record_branch(s, taken);
                if taken {
                    self.exec_block(then_branch)
                } else {
                    self.exec_block(else_branch)
                }
            }
            IStmtKind::While { cond, body } => {
                let mut iters: u64 = 0;
                loop {
                    let taken = self.eval_code(cond)?.as_bool();
                    self.record_branch(s, taken);
                    if !taken {
                        return Ok(Flow::Next);
                    }
                    iters += 1;
                    if iters > self.limits.max_loop_iters {
                        return Err(Stop(RunOutcome::ResourceExhausted {
                            what: ResourceKind::LoopIterations,
                            stmt: s.id,
                            loc: s.loc,
                        }));
                    }
                    match self.exec_block(body)? {
                        Flow::Next => {}
                        ret @ Flow::Return(_) => return Ok(ret),
                    }
                    self.cur_stmt = Some(s.id);
                }
            }
            IStmtKind::Call {
                target,
                callee,
                args,
            } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_code(a)?);
                }
                let ret = self.call(callee, vals, Some(s.id))?;
                self.cur_stmt = Some(s.id);
                if let Some(t) = target {
                    let v = ret.expect("validated: bound call returns a value");
                    self.store(t, v)?;
                }
                Ok(Flow::Next)
            }
            IStmtKind::Return { value } => {
                let v = match value {
                    Some(e) => Some(self.eval_code(e)?),
                    None => None,
                };
                Ok(Flow::Return(v))
            }
            IStmtKind::Check { aid, kind } => {
                let pass = self.eval_check(kind)?;
                if self.limits.trace != TraceMode::Off {
                    self.trace.push(TraceEvent::Check {
                        aid: *aid,
                        stmt: s.id,
                        loc: s.loc,
                        pass,
                    });
                }
                if pass {
                    Ok(Flow::Next)
                } else {
                    Err(Stop(RunOutcome::CheckFailed {
                        aid: *aid,
                        stmt: s.id,
                        loc: s.loc,
                    }))
                }
            }
            IStmtKind::Assume { aid, pred } => {
                let satisfied = self.eval_pred_bool(pred)?;
                if self.limits.trace != TraceMode::Off {
                    self.trace.push(TraceEvent::Assume {
                        aid: *aid,
                        stmt: s.id,
                        loc: s.loc,
                        satisfied,
                    });
                }
                if satisfied {
                    Ok(Flow::Next)
                } else {
                    Err(Stop(RunOutcome::AssumptionViolated {
                        aid: *aid,
                        stmt: s.id,
                        loc: s.loc,
                    }))
                }
            }
            IStmtKind::SnapshotOlds { pairs } => {
                for (slot, e) in pairs {
                    let v = self.eval_pred(e, &mut Vec::new())?;
                    self.frames
                        .last_mut()
                        .expect("statement executes inside a frame")
                        .olds[*slot as usize] = Some(v);
                }
                Ok(Flow::Next)
            }
            IStmtKind::SnapshotFrame { slot } => {
                let snap = self.globals.clone();
                self.frames
                    .last_mut()
                    .expect("statement executes inside a frame")
                    .frame_snaps[*slot as usize] = Some(snap);
                Ok(Flow::Next)
            }
            IStmtKind::SnapshotInt { slot, expr } => {
                let v = self.eval_pred(expr, &mut Vec::new())?.as_int();
                self.frames
                    .last_mut()
                    .expect("statement executes inside a frame")
                    .meas[*slot as usize] = Some(v);
                Ok(Flow::Next)
            }
            IStmtKind::Nondet { target, ty } => {
                let raw = self.draw(*ty, s.loc)?;
                let v = match ty {
                    ScalarType::Int => {
                        self.range_check(raw, s.loc)?;
                        Value::Int(raw)
                    }
                    ScalarType::Bool => Value::Bool(raw != 0),
                };
                self.store(target, v)?;
                Ok(Flow::Next)
            }
            IStmtKind::NondetArray { base, lo, hi } => {
                for idx in *lo..=*hi {
                    let raw = self.draw(ScalarType::Int, s.loc)?;
                    self.range_check(raw, s.loc)?;
                    self.store_cell(base, idx, raw, s.loc)?;
                }
                Ok(Flow::Next)
            }
        }
    }

    fn record_branch(&mut self, s: &IStmt, taken: bool) {
        let id = s.id.0;
        fnv_step(&mut self.path_hash, (id & 0xff) as u8);
        fnv_step(&mut self.path_hash, ((id >> 8) & 0xff) as u8);
        fnv_step(&mut self.path_hash, ((id >> 16) & 0xff) as u8);
        fnv_step(&mut self.path_hash, ((id >> 24) & 0xff) as u8);
        fnv_step(&mut self.path_hash, taken as u8);
        if self.limits.trace == TraceMode::Full {
            self.trace.push(TraceEvent::Branch {
                stmt: s.id,
                loc: s.loc,
                taken,
            });
        }
    }

    fn draw(&mut self, ty: ScalarType, loc: Loc) -> Result<i64, Stop> {
        if self.nondet_pos >= self.nondet.len() {
            return Err(Stop(RunOutcome::NondetExhausted { ty }));
        }
        let v = self.nondet[self.nondet_pos];
        self.nondet_pos += 1;
        if self.limits.trace == TraceMode::Full {
            self.trace.push(TraceEvent::Nondet { loc, value: v });
        }
        Ok(v)
    }

    fn eval_check(&mut self, kind: &CheckKind) -> Result<bool, Stop> {
        match kind {
            CheckKind::Pred(e) => self.eval_pred_bool(e),
            CheckKind::VariantDecrease { expr, slot } => {
                let now = self.eval_pred(expr, &mut Vec::new())?.as_int();
                let baseline = self
                    .frames
                    .last()
                    .expect("check executes inside a frame")
                    .meas[*slot as usize]
                    .expect("variant baseline snapshot precedes the decrease check");
                Ok(now < baseline)
            }
            CheckKind::Frame { slot, allowed } => {
                let frame = self.frames.last().expect("check executes inside a frame");
                let snap = frame.frame_snaps[*slot as usize]
                    .as_ref()
                    .expect("frame snapshot precedes the frame check");
                let mut full: Vec<&str> = Vec::new();
                let mut ranges: HashMap<&str, Vec<(i64, i64)>> = HashMap::new();
                for t in allowed {
                    match t {
                        crate::lang::AssignTarget::Var { name, .. } => full.push(name),
                        crate::lang::AssignTarget::ArrayRange { base, lo, hi, .. } => {
                            ranges.entry(base).or_default().push((*lo, *hi));
                        }
                    }
                }
                for (name, now) in &self.globals {
                    if full.contains(&name.as_str()) {
                        continue;
                    }
                    let then = snap
                        .get(name)
                        .expect("snapshot covers all globals of the run");
                    match (then, now) {
                        (Stored::Scalar(a), Stored::Scalar(b)) => {
                            if a != b {
                                return Ok(false);
                            }
                        }
                        (Stored::Array(a), Stored::Array(b)) => {
                            let rs = ranges.get(name.as_str());
                            for (idx, (va, vb)) in a.iter().zip(b).enumerate() {
                                let covered = rs.is_some_and(|rs| {
                                    rs.iter().any(|(lo, hi)| {
                                        (idx as i64) >= *lo && (idx as i64) <= *hi
                                    })
                                });
                                if !covered && va != vb {
                                    return Ok(false);
                                }
                            }
                        }
                        _ => unreachable!("global changed shape mid-run"),
                    }
                }
                Ok(true)
            }
        }
    }

    // ----- storage -----

    fn read_var(&self, name: &str) -> &Stored {
        if let Some(frame) = self.frames.last() {
            if let Some(v) = frame.locals.get(name) {
                return v;
            }
        }
        self.globals
            .get(name)
            .expect("validated: every name is in scope")
    }

    fn store(&mut self, target: &Lhs, v: Value) -> Result<(), Stop> {
        match target {
            Lhs::Var { name, .. } => {
                let frame = self.frames.last_mut().expect("store happens in a frame");
                if let Some(slot) = frame.locals.get_mut(name) {
                    *slot = Stored::Scalar(v);
                } else {
                    self.globals.insert(name.clone(), Stored::Scalar(v));
                }
                Ok(())
            }
            Lhs::Index { base, index, loc } => {
                let idx = self.eval_code(index)?.as_int();
                self.store_cell(base, idx, v.as_int(), *loc)
            }
        }
    }

    fn store_cell(&mut self, base: &str, idx: i64, v: i64, loc: Loc) -> Result<(), Stop> {
        let frame = self.frames.last_mut().expect("store happens in a frame");
        let cells = match frame.locals.get_mut(base) {
            Some(Stored::Array(cells)) => cells,
            Some(Stored::Scalar(_)) => unreachable!("validated: indexing a scalar"),
            None => match self.globals.get_mut(base) {
                Some(Stored::Array(cells)) => cells,
                _ => unreachable!("validated: indexing an unknown or scalar name"),
            },
        };
        let len = cells.len();
        if idx < 0 || idx as usize >= len {
            return Err(Stop(RunOutcome::RuntimeError {
                error: RuntimeErrorKind::IndexOutOfBounds {
                    base: base.to_string(),
                    index: idx,
                    len: len as u32,
                },
                stmt: self.cur_stmt,
                loc,
            }));
        }
        cells[idx as usize] = v;
        Ok(())
    }

    // ----- code-level evaluation (machine semantics) -----

    fn range_check(&self, v: i64, loc: Loc) -> Result<i64, Stop> {
        if v < self.limits.int_min || v > self.limits.int_max {
            Err(self.rte(RuntimeErrorKind::IntOverflow, loc))
        } else {
            Ok(v)
        }
    }

    fn rte(&self, error: RuntimeErrorKind, loc: Loc) -> Stop {
        Stop(RunOutcome::RuntimeError {
            error,
            stmt: self.cur_stmt,
            loc,
        })
    }

    fn eval_code(&mut self, e: &Expr) -> Result<Value, Stop> {
        match e {
            Expr::IntLit { value, loc } => Ok(Value::Int(self.range_check(*value, *loc)?)),
            Expr::BoolLit { value, .. } => Ok(Value::Bool(*value)),
            Expr::Var { name, .. } => match self.read_var(name) {
                Stored::Scalar(v) => Ok(*v),
                Stored::Array(_) => unreachable!("validated: whole-array read"),
            },
            Expr::Index { base, index, loc } => {
                let idx = self.eval_code(index)?.as_int();
                let cells = match self.read_var(base) {
                    Stored::Array(cells) => cells,
                    Stored::Scalar(_) => unreachable!("validated: indexing a scalar"),
                };
                if idx < 0 || idx as usize >= cells.len() {
                    let len = cells.len() as u32;
                    return Err(self.rte(
                        RuntimeErrorKind::IndexOutOfBounds {
                            base: base.clone(),
                            index: idx,
                            len,
                        },
                        *loc,
                    ));
                }
                Ok(Value::Int(cells[idx as usize]))
            }
            Expr::Unary { op, arg, loc } => {
                let v = self.eval_code(arg)?;
                match op {
                    UnOp::Neg => {
                        let n = v
                            .as_int()
                            .checked_neg()
                            .ok_or_else(|| self.rte(RuntimeErrorKind::IntOverflow, *loc))?;
                        Ok(Value::Int(self.range_check(n, *loc)?))
                    }
                    UnOp::Not => Ok(Value::Bool(!v.as_bool())),
                }
            }
            Expr::Binary { op, lhs, rhs, loc } => match op {
                BinOp::And => {
                    let l = self.eval_code(lhs)?.as_bool();
                    if !l {
                        return Ok(Value::Bool(false));
                    }
                    Ok(Value::Bool(self.eval_code(rhs)?.as_bool()))
                }
                BinOp::Or => {
                    let l = self.eval_code(lhs)?.as_bool();
                    if l {
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
                    let b = match op {
                        BinOp::Lt => l < r,
                        BinOp::Le => l <= r,
                        BinOp::Gt => l > r,
                        BinOp::Ge => l >= r,
                        _ => unreachable!(),
                    };
                    Ok(Value::Bool(b))
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    let l = self.eval_code(lhs)?.as_int();
                    let r = self.eval_code(rhs)?.as_int();
                    let v = match op {
                        BinOp::Add => l.checked_add(r),
                        BinOp::Sub => l.checked_sub(r),
                        BinOp::Mul => l.checked_mul(r),
                        BinOp::Div => {
                            if r == 0 {
                                return Err(self.rte(RuntimeErrorKind::DivByZero, *loc));
                            }
                            l.checked_div(r)
                        }
                        BinOp::Mod => {
                            if r == 0 {
                                return Err(self.rte(RuntimeErrorKind::ModByZero, *loc));
                            }
                            l.checked_rem(r)
                        }
                        _ => unreachable!(),
                    }
                    .ok_or_else(|| self.rte(RuntimeErrorKind::IntOverflow, *loc))?;
                    Ok(Value::Int(self.range_check(v, *loc)?))
                }
                BinOp::Implies => unreachable!("validated: `==>` never appears in code"),
            },
            Expr::Old { .. } | Expr::OldRef { .. } | Expr::Result { .. } | Expr::Quant { .. } => {
                unreachable!("validated: annotation-only form in code")
            }
        }
    }

    // ----- annotation-level evaluation (exact semantics) -----

    fn eval_pred_bool(&mut self, e: &Expr) -> Result<bool, Stop> {
        Ok(self.eval_pred(e, &mut Vec::new())?.as_bool())
    }

    fn eval_pred(&mut self, e: &Expr, env: &mut Vec<(String, i128)>) -> Result<PredVal, Stop> {
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
            Expr::Index { base, index, loc } => {
                let idx = self.eval_pred(index, env)?.as_int();
                let cells = match self.read_var(base) {
                    Stored::Array(cells) => cells,
                    Stored::Scalar(_) => unreachable!("validated: indexing a scalar"),
                };
                if idx < 0 || idx >= cells.len() as i128 {
                    let len = cells.len() as u32;
                    return Err(self.rte(
                        RuntimeErrorKind::IndexOutOfBounds {
                            base: base.clone(),
                            index: idx.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
                            len,
                        },
                        *loc,
                    ));
                }
                Ok(PredVal::Int(cells[idx as usize] as i128))
            }
            Expr::Unary { op, arg, loc } => {
                let v = self.eval_pred(arg, env)?;
                match op {
                    UnOp::Neg => Ok(PredVal::Int(
                        v.as_int()
                            .checked_neg()
                            .ok_or_else(|| self.rte(RuntimeErrorKind::PredOverflow, *loc))?,
                    )),
                    UnOp::Not => Ok(PredVal::Bool(!v.as_bool())),
                }
            }
            Expr::Binary { op, lhs, rhs, loc } => match op {
                BinOp::And => {
                    if !self.eval_pred(lhs, env)?.as_bool() {
                        return Ok(PredVal::Bool(false));
                    }
                    Ok(PredVal::Bool(self.eval_pred(rhs, env)?.as_bool()))
                }
                BinOp::Or => {
                    if self.eval_pred(lhs, env)?.as_bool() {
                        return Ok(PredVal::Bool(true));
                    }
                    Ok(PredVal::Bool(self.eval_pred(rhs, env)?.as_bool()))
                }
                BinOp::Implies => {
                    if !self.eval_pred(lhs, env)?.as_bool() {
                        return Ok(PredVal::Bool(true));
                    }
                    Ok(PredVal::Bool(self.eval_pred(rhs, env)?.as_bool()))
                }
                BinOp::Eq | BinOp::Ne => {
                    let l = self.eval_pred(lhs, env)?;
                    let r = self.eval_pred(rhs, env)?;
                    let same = match (l, r) {
                        (PredVal::Int(a), PredVal::Int(b)) => a == b,
                        (PredVal::Bool(a), PredVal::Bool(b)) => a == b,
                        _ => unreachable!("validated: comparison operand types"),
                    };
                    Ok(PredVal::Bool(if *op == BinOp::Eq { same } else { !same }))
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let l = self.eval_pred(lhs, env)?.as_int();
                    let r = self.eval_pred(rhs, env)?.as_int();
                    let b = match op {
                        BinOp::Lt => l < r,
                        BinOp::Le => l <= r,
                        BinOp::Gt => l > r,
                        BinOp::Ge => l >= r,
                        _ => unreachable!(),
                    };
                    Ok(PredVal::Bool(b))
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    let l = self.eval_pred(lhs, env)?.as_int();
                    let r = self.eval_pred(rhs, env)?.as_int();
                    let v = match op {
                        BinOp::Add => l.checked_add(r),
                        BinOp::Sub => l.checked_sub(r),
                        BinOp::Mul => l.checked_mul(r),
                        BinOp::Div => {
                            if r == 0 {
                                return Err(self.rte(RuntimeErrorKind::DivByZero, *loc));
                            }
                            l.checked_div(r)
                        }
                        BinOp::Mod => {
                            if r == 0 {
                                return Err(self.rte(RuntimeErrorKind::ModByZero, *loc));
                            }
                            l.checked_rem(r)
                        }
                        _ => unreachable!(),
                    }
                    .ok_or_else(|| self.rte(RuntimeErrorKind::PredOverflow, *loc))?;
                    Ok(PredVal::Int(v))
                }
            },
            // `Old` survives only inside snapshot operands, which are
            // evaluated in the pre-state — where `\old(e)` is just `e`.
            Expr::Old { arg, .. } => self.eval_pred(arg, env),
            Expr::OldRef { slot, .. } => Ok(self
                .frames
                .last()
                .expect("predicate evaluates inside a frame")
                .olds[*slot as usize]
                .expect("old snapshot precedes any use of the slot")),
            Expr::Result { .. } => {
                let v = self
                    .frames
                    .last()
                    .expect("predicate evaluates inside a frame")
                    .result
                    .expect("\\result is bound before the epilogue runs");
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
                loc,
            } => {
                let mut lo_v = self.eval_pred(lo, env)?.as_int();
                if *lo_strict {
                    lo_v += 1;
                }
                let mut hi_v = self.eval_pred(hi, env)?.as_int();
                if *hi_strict {
                    hi_v -= 1;
                }
                let width = if hi_v < lo_v {
                    0
                } else {
                    (hi_v - lo_v + 1) as u128
                };
                if width > self.limits.max_quant_width as u128 {
                    return Err(self.rte(
                        RuntimeErrorKind::QuantifierTooWide {
                            width: width.min(u64::MAX as u128) as u64,
                        },
                        *loc,
                    ));
                }
                let mut k = lo_v;
                while k <= hi_v {
                    env.push((var.clone(), k));
                    let b = self.eval_pred(body, env)?.as_bool();
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

/// True when this instrumented program can ever consult the nondet stream —
/// i.e. when it contains at least one stand-in.
pub fn uses_nondet(ip: &InstrumentedProgram) -> bool {
    !matches!(ip.variant, Variant::Nc)
}
