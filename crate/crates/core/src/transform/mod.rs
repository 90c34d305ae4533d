//! Source-to-source instrumentation: the three buildable program variants.
//!
//! Every diagnosis run executes one of three instrumented forms of the parsed
//! program:
//!
//! * **`nc`** — the fully checked variant. Every annotation becomes an
//!   executable check: callee pre/postconditions and assigns frames are
//!   checked around every call (in the callee's prologue/epilogue, where the
//!   formals are bound), loop invariants are checked on entry and after each
//!   iteration, loop variants are checked non-negative and strictly
//!   decreasing, assertions are checked in place. The only assumption is the
//!   entry function's own precondition.
//! * **`gsw`** — the globally substituted variant. Every non-imbricated call
//!   and loop of the entry function is replaced by a stand-in built from its
//!   contract alone: the stand-in still *checks* the obligations the
//!   surrounding code owes (the callee's precondition, the initial loop
//!   invariant), havocs whatever the contract declares assignable, and
//!   *assumes* the guarantees the contract offers (the callee's
//!   postcondition; invariant plus negated loop condition). A failure in this
//!   variant is a failure of the entry contract against its subcontracts.
//! * **`ssw`** — a singly substituted variant: exactly one site is replaced
//!   by its stand-in, everything else stays fully checked.
//!
//! Instrumented statements carry fresh statement ids, while statements copied
//! from the source keep their original ids, so a recorded path trace can
//! always be mapped back to the source line that produced it. All checks and
//! assumptions reference the original annotation ids; instrumentation never
//! invents annotations.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::{
    input_signature, subcontracts, AnnId, AnnotationRegistry, AssignTarget, BinOp, Block, Expr,
    FunctionDef, GlobalDef, InputVar, Lhs, Loc, Param, Program, ScalarType, Stmt, StmtId,
    StmtKind, SubTarget, SubcontractRef, UnOp, VarType,
};

mod emit;
pub use emit::emit;

/// Name of the synthetic local a stand-in returns. `$` cannot appear in a
/// source identifier, so the name can never collide with user code.
pub const STUB_RESULT: &str = "$ret";

/// Which instrumented variant to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// All annotations checked.
    Nc,
    /// All non-imbricated subcontracts substituted.
    Gsw,
    /// Exactly this subcontract substituted.
    Ssw(SubcontractRef),
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Nc => f.write_str("nc"),
            Variant::Gsw => f.write_str("gsw"),
            Variant::Ssw(site) => match &site.target {
                SubTarget::Call { callee } => write!(f, "ssw:{callee}"),
                SubTarget::Loop => write!(f, "ssw:loop@{}", site.site_loc.line),
            },
        }
    }
}

/// What a [`IStmtKind::Check`] statement verifies.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckKind {
    /// The predicate must evaluate to true.
    Pred(Expr),
    /// The loop measure must have strictly decreased since the snapshot taken
    /// at the start of the iteration: `expr < __meas[slot]`.
    VariantDecrease { expr: Expr, slot: u32 },
    /// Every global location not covered by `allowed` must hold the same
    /// value as in the frame snapshot `slot`.
    Frame { slot: u32, allowed: Vec<AssignTarget> },
}

/// Instrumented statement. Mirrors the source statement forms and adds the
/// instrumentation forms (checks, assumptions, snapshots, havocs).
#[derive(Debug, Clone, PartialEq)]
pub struct IStmt {
    pub id: StmtId,
    pub loc: Loc,
    pub kind: IStmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IStmtKind {
    Decl {
        name: String,
        ty: VarType,
        init: Option<Expr>,
    },
    Assign {
        target: Lhs,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Vec<IStmt>,
        else_branch: Vec<IStmt>,
    },
    /// A plain loop; its contract has been lowered to explicit checks around
    /// and inside it.
    While {
        cond: Expr,
        body: Vec<IStmt>,
    },
    Call {
        target: Option<Lhs>,
        callee: String,
        args: Vec<Expr>,
    },
    Return {
        value: Option<Expr>,
    },
    /// `fassert` — a failure here is a counter-example for annotation `aid`.
    Check {
        aid: AnnId,
        kind: CheckKind,
    },
    /// `fassume` — a run in which the predicate is false is discarded as
    /// infeasible rather than reported.
    Assume {
        aid: AnnId,
        pred: Expr,
    },
    /// Evaluate each expression in the current state and store it in the
    /// function's `\old` slot table.
    SnapshotOlds {
        pairs: Vec<(u32, Expr)>,
    },
    /// Snapshot all globals into frame slot `slot` (basis for a later
    /// [`CheckKind::Frame`]).
    SnapshotFrame {
        slot: u32,
    },
    /// Evaluate an integer measure (loop variant) into measure slot `slot`.
    SnapshotInt {
        slot: u32,
        expr: Expr,
    },
    /// Havoc one scalar location with a fresh nondeterministic value.
    Nondet {
        target: Lhs,
        ty: ScalarType,
    },
    /// Havoc the cells `base[lo..hi]` (inclusive) with fresh values, in
    /// ascending index order.
    NondetArray {
        base: String,
        lo: i64,
        hi: i64,
    },
}

/// An instrumented function: the prologue runs on entry, the epilogue runs at
/// every return (with `\result` bound for non-void functions).
#[derive(Debug, Clone, PartialEq)]
pub struct IFunction {
    pub name: String,
    pub loc: Loc,
    pub params: Vec<Param>,
    pub ret: Option<ScalarType>,
    pub prologue: Vec<IStmt>,
    pub body: Vec<IStmt>,
    pub epilogue: Vec<IStmt>,
    /// Number of `\old` snapshot slots the frame must provide.
    pub old_slots: u32,
    /// Number of globals-snapshot slots (assigns frames).
    pub frame_slots: u32,
    /// Number of integer measure slots (loop variants).
    pub int_slots: u32,
    /// `Some(original)` if this function is a contract stand-in generated for
    /// `original`.
    pub stub_of: Option<String>,
}

/// A complete instrumented program, ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentedProgram {
    pub variant: Variant,
    pub entry: String,
    pub globals: Vec<GlobalDef>,
    pub functions: Vec<IFunction>,
    /// Shared with the source program: ids are preserved.
    pub annotations: AnnotationRegistry,
    /// Input signature of the entry function (parameters, then input globals).
    pub inputs: Vec<InputVar>,
    pub next_stmt_id: u32,
}

impl InstrumentedProgram {
    pub fn function(&self, name: &str) -> Option<&IFunction> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn entry_fn(&self) -> &IFunction {
        self.function(&self.entry)
            .expect("entry function exists in instrumented program")
    }
}

/// Builds the fully checked variant.
pub fn translate_nc(program: &Program) -> InstrumentedProgram {
    instrument(program, &Variant::Nc)
}

/// Builds the globally substituted variant.
pub fn translate_gsw(program: &Program) -> InstrumentedProgram {
    instrument(program, &Variant::Gsw)
}

/// Builds the variant in which exactly `site` is substituted.
pub fn translate_ssw(program: &Program, site: &SubcontractRef) -> InstrumentedProgram {
    instrument(program, &Variant::Ssw(site.clone()))
}

/// Builds the instrumented program for an arbitrary variant.
pub fn instrument(program: &Program, variant: &Variant) -> InstrumentedProgram {
    let sites: Vec<SubcontractRef> = match variant {
        Variant::Nc => Vec::new(),
        Variant::Gsw => subcontracts(program, &program.entry),
        Variant::Ssw(site) => vec![site.clone()],
    };

    // Substitution plan: call sites redirect to a stand-in function, loop
    // sites are replaced inline.
    let mut loop_sub: HashSet<StmtId> = HashSet::new();
    let mut stub_for_callee: HashMap<String, String> = HashMap::new();
    let mut stub_order: Vec<String> = Vec::new(); // callee names, first-use order
    let mut call_stub: HashMap<StmtId, String> = HashMap::new();
    let mut taken: HashSet<String> = program.functions.iter().map(|f| f.name.clone()).collect();
    for site in &sites {
        match &site.target {
            SubTarget::Loop => {
                loop_sub.insert(site.site);
            }
            SubTarget::Call { callee } => {
                let stub = stub_for_callee.entry(callee.clone()).or_insert_with(|| {
                    let mut name = format!("{callee}_swd");
                    while taken.contains(&name) {
                        name.push('_');
                    }
                    taken.insert(name.clone());
                    stub_order.push(callee.clone());
                    name
                });
                call_stub.insert(site.site, stub.clone());
            }
        }
    }

    let mut tr = Tr {
        program,
        next_stmt_id: program.next_stmt_id,
        call_stub,
        loop_sub,
        types: HashMap::new(),
        next_frame: 0,
        next_int: 0,
    };

    let mut functions = Vec::new();
    for f in &program.functions {
        functions.push(tr.translate_function(f, f.name == program.entry));
    }
    for callee in &stub_order {
        let def = program
            .function(callee)
            .expect("substituted callee exists after validation");
        functions.push(tr.build_stub(def, stub_for_callee[callee].clone()));
    }

    InstrumentedProgram {
        variant: variant.clone(),
        entry: program.entry.clone(),
        globals: program.globals.clone(),
        functions,
        annotations: program.annotations.clone(),
        inputs: input_signature(program),
        next_stmt_id: tr.next_stmt_id,
    }
}

/// Replaces every `\old(e)` in an ensures clause by a reference to a numbered
/// snapshot slot, collecting `(slot, e)` pairs in source (pre-)order. The
/// slot operands are captured unconditionally in the pre-state, like a
/// runtime checker would, even when the `\old` sits under a guard.
fn rewrite_olds(e: &Expr, next: &mut u32, pairs: &mut Vec<(u32, Expr)>) -> Expr {
    match e {
        Expr::Old { arg, loc } => {
            let slot = *next;
            *next += 1;
            pairs.push((slot, (**arg).clone()));
            Expr::OldRef { slot, loc: *loc }
        }
        Expr::IntLit { .. }
        | Expr::BoolLit { .. }
        | Expr::Var { .. }
        | Expr::OldRef { .. }
        | Expr::Result { .. } => e.clone(),
        Expr::Index { base, index, loc } => Expr::Index {
            base: base.clone(),
            index: Box::new(rewrite_olds(index, next, pairs)),
            loc: *loc,
        },
        Expr::Unary { op, arg, loc } => Expr::Unary {
            op: *op,
            arg: Box::new(rewrite_olds(arg, next, pairs)),
            loc: *loc,
        },
        Expr::Binary { op, lhs, rhs, loc } => Expr::Binary {
            op: *op,
            lhs: Box::new(rewrite_olds(lhs, next, pairs)),
            rhs: Box::new(rewrite_olds(rhs, next, pairs)),
            loc: *loc,
        },
        Expr::Quant {
            universal,
            var,
            lo,
            lo_strict,
            hi,
            hi_strict,
            body,
            loc,
        } => Expr::Quant {
            universal: *universal,
            var: var.clone(),
            lo: Box::new(rewrite_olds(lo, next, pairs)),
            lo_strict: *lo_strict,
            hi: Box::new(rewrite_olds(hi, next, pairs)),
            hi_strict: *hi_strict,
            body: Box::new(rewrite_olds(body, next, pairs)),
            loc: *loc,
        },
    }
}

struct Tr<'p> {
    program: &'p Program,
    next_stmt_id: u32,
    /// Call sites to redirect to a stand-in (statement ids are program-unique,
    /// so this is only ever hit while translating the entry function).
    call_stub: HashMap<StmtId, String>,
    /// Loop sites to replace inline.
    loop_sub: HashSet<StmtId>,
    /// Types in scope in the function being translated (no shadowing, so one
    /// flat map per function suffices).
    types: HashMap<String, VarType>,
    next_frame: u32,
    next_int: u32,
}

impl<'p> Tr<'p> {
    fn fresh(&mut self) -> StmtId {
        let id = StmtId(self.next_stmt_id);
        self.next_stmt_id += 1;
        id
    }

    fn istmt(&mut self, loc: Loc, kind: IStmtKind) -> IStmt {
        IStmt {
            id: self.fresh(),
            loc,
            kind,
        }
    }

    fn reset_fn_state(&mut self, f: &FunctionDef) {
        self.types.clear();
        for g in &self.program.globals {
            self.types.insert(g.name.clone(), g.ty);
        }
        for p in &f.params {
            self.types.insert(p.name.clone(), VarType::Scalar(p.ty));
        }
        self.next_frame = 0;
        self.next_int = 0;
    }

    /// Translates one source function. The entry function's precondition is
    /// assumed; every other function's precondition is checked (which checks
    /// it at every call site, with the formals bound). All postconditions and
    /// assigns frames are checked.
    fn translate_function(&mut self, f: &FunctionDef, is_entry: bool) -> IFunction {
        self.reset_fn_state(f);

        let mut old_slots = 0u32;
        let mut old_pairs = Vec::new();
        let ensures = rewrite_olds(&f.contract.ensures, &mut old_slots, &mut old_pairs);

        let mut prologue = Vec::new();
        let requires = f.contract.requires.clone();
        let rloc = requires.loc();
        if is_entry {
            prologue.push(self.istmt(
                rloc,
                IStmtKind::Assume {
                    aid: f.contract.requires_id,
                    pred: requires,
                },
            ));
        } else {
            prologue.push(self.istmt(
                rloc,
                IStmtKind::Check {
                    aid: f.contract.requires_id,
                    kind: CheckKind::Pred(requires),
                },
            ));
        }
        if !old_pairs.is_empty() {
            prologue.push(self.istmt(f.contract.loc, IStmtKind::SnapshotOlds { pairs: old_pairs }));
        }
        let frame_slot = f.contract.assigns_id.map(|_| {
            let slot = self.next_frame;
            self.next_frame += 1;
            slot
        });
        if let Some(slot) = frame_slot {
            prologue.push(self.istmt(f.contract.loc, IStmtKind::SnapshotFrame { slot }));
        }

        let body = self.translate_block(&f.body);

        let mut epilogue = Vec::new();
        epilogue.push(self.istmt(
            ensures.loc(),
            IStmtKind::Check {
                aid: f.contract.ensures_id,
                kind: CheckKind::Pred(ensures),
            },
        ));
        if let (Some(aid), Some(slot), Some(allowed)) =
            (f.contract.assigns_id, frame_slot, f.contract.assigns.clone())
        {
            epilogue.push(self.istmt(
                f.contract.loc,
                IStmtKind::Check {
                    aid,
                    kind: CheckKind::Frame { slot, allowed },
                },
            ));
        }

        IFunction {
            name: f.name.clone(),
            loc: f.loc,
            params: f.params.clone(),
            ret: f.ret,
            prologue,
            body,
            epilogue,
            old_slots,
            frame_slots: self.next_frame,
            int_slots: self.next_int,
            stub_of: None,
        }
    }

    /// Builds the contract stand-in for a substituted callee: check its
    /// precondition, havoc its assigns targets, return a fresh value, assume
    /// its postcondition.
    fn build_stub(&mut self, f: &FunctionDef, name: String) -> IFunction {
        self.reset_fn_state(f);

        let mut old_slots = 0u32;
        let mut old_pairs = Vec::new();
        let ensures = rewrite_olds(&f.contract.ensures, &mut old_slots, &mut old_pairs);

        let mut prologue = Vec::new();
        let requires = f.contract.requires.clone();
        let rloc = requires.loc();
        prologue.push(self.istmt(
            rloc,
            IStmtKind::Check {
                aid: f.contract.requires_id,
                kind: CheckKind::Pred(requires),
            },
        ));
        if !old_pairs.is_empty() {
            prologue.push(self.istmt(f.contract.loc, IStmtKind::SnapshotOlds { pairs: old_pairs }));
        }

        let mut body = Vec::new();
        let assigns = f
            .contract
            .assigns
            .clone()
            .expect("substituted callee has an assigns clause after validation");
        for target in &assigns {
            self.havoc(target, &mut body);
        }
        if let Some(ty) = f.ret {
            body.push(self.istmt(
                f.loc,
                IStmtKind::Decl {
                    name: STUB_RESULT.to_string(),
                    ty: VarType::Scalar(ty),
                    init: None,
                },
            ));
            body.push(self.istmt(
                f.loc,
                IStmtKind::Nondet {
                    target: Lhs::Var {
                        name: STUB_RESULT.to_string(),
                        loc: f.loc,
                    },
                    ty,
                },
            ));
            body.push(self.istmt(
                f.loc,
                IStmtKind::Return {
                    value: Some(Expr::Var {
                        name: STUB_RESULT.to_string(),
                        loc: f.loc,
                    }),
                },
            ));
        }

        let epilogue = vec![self.istmt(
            ensures.loc(),
            IStmtKind::Assume {
                aid: f.contract.ensures_id,
                pred: ensures,
            },
        )];

        IFunction {
            name,
            loc: f.loc,
            params: f.params.clone(),
            ret: f.ret,
            prologue,
            body,
            epilogue,
            old_slots,
            frame_slots: 0,
            int_slots: 0,
            stub_of: Some(f.name.clone()),
        }
    }

    fn translate_block(&mut self, block: &Block) -> Vec<IStmt> {
        let mut out = Vec::new();
        for stmt in &block.stmts {
            self.translate_stmt(stmt, &mut out);
        }
        out
    }

    fn translate_stmt(&mut self, stmt: &Stmt, out: &mut Vec<IStmt>) {
        match &stmt.kind {
            StmtKind::Decl { name, ty, init } => {
                self.types.insert(name.clone(), *ty);
                out.push(IStmt {
                    id: stmt.id,
                    loc: stmt.loc,
                    kind: IStmtKind::Decl {
                        name: name.clone(),
                        ty: *ty,
                        init: init.clone(),
                    },
                });
            }
            StmtKind::Assign { target, value } => out.push(IStmt {
                id: stmt.id,
                loc: stmt.loc,
                kind: IStmtKind::Assign {
                    target: target.clone(),
                    value: value.clone(),
                },
            }),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let then_branch = self.translate_block(then_branch);
                let else_branch = else_branch
                    .as_ref()
                    .map(|b| self.translate_block(b))
                    .unwrap_or_default();
                out.push(IStmt {
                    id: stmt.id,
                    loc: stmt.loc,
                    kind: IStmtKind::If {
                        cond: cond.clone(),
                        then_branch,
                        else_branch,
                    },
                });
            }
            StmtKind::While {
                cond,
                contract,
                body,
            } => {
                if self.loop_sub.contains(&stmt.id) {
                    self.lower_loop_standin(stmt, cond, contract, out);
                } else {
                    self.lower_loop_checked(stmt, cond, contract, body, out);
                }
            }
            StmtKind::Call {
                target,
                callee,
                args,
            } => {
                let callee = match self.call_stub.get(&stmt.id) {
                    Some(stub) => stub.clone(),
                    None => callee.clone(),
                };
                out.push(IStmt {
                    id: stmt.id,
                    loc: stmt.loc,
                    kind: IStmtKind::Call {
                        target: target.clone(),
                        callee,
                        args: args.clone(),
                    },
                });
            }
            StmtKind::Return { value } => out.push(IStmt {
                id: stmt.id,
                loc: stmt.loc,
                kind: IStmtKind::Return {
                    value: value.clone(),
                },
            }),
            StmtKind::Assert { id, pred } => out.push(IStmt {
                id: stmt.id,
                loc: stmt.loc,
                kind: IStmtKind::Check {
                    aid: *id,
                    kind: CheckKind::Pred(pred.clone()),
                },
            }),
        }
    }

    /// Fully checked loop lowering:
    ///
    /// ```text
    /// fassert(I);                    // invariant initially established
    /// __frame[k] = snapshot;         // loop assigns base
    /// while (b) {
    ///     __meas[m] = V;             // variant baseline (if variant given)
    ///     fassert(V >= 0);
    ///     ...body...
    ///     fassert_frame(__frame[k]); // only loop-assigns targets changed
    ///     fassert(I);                // invariant preserved
    ///     fassert(V < __meas[m]);    // variant strictly decreased
    /// }
    /// ```
    fn lower_loop_checked(
        &mut self,
        stmt: &Stmt,
        cond: &Expr,
        contract: &crate::lang::LoopContract,
        body: &Block,
        out: &mut Vec<IStmt>,
    ) {
        // Locals declared in the body are recorded by the recursive
        // translation below; declare loop assigns targets first so the frame
        // check can type them (all names are already in scope — validated).
        out.push(self.istmt(
            contract.invariant.loc(),
            IStmtKind::Check {
                aid: contract.inv_init_id,
                kind: CheckKind::Pred(contract.invariant.clone()),
            },
        ));
        let frame_slot = self.next_frame;
        self.next_frame += 1;
        out.push(self.istmt(contract.loc, IStmtKind::SnapshotFrame { slot: frame_slot }));

        let mut inner = Vec::new();
        let variant_slot = contract.variant.as_ref().map(|v| {
            let slot = self.next_int;
            self.next_int += 1;
            let vloc = v.loc();
            inner.push(self.istmt(
                vloc,
                IStmtKind::SnapshotInt {
                    slot,
                    expr: v.clone(),
                },
            ));
            inner.push(self.istmt(
                vloc,
                IStmtKind::Check {
                    aid: contract
                        .variant_nonneg_id
                        .expect("variant clause always owns a nonneg id"),
                    kind: CheckKind::Pred(Expr::Binary {
                        op: BinOp::Ge,
                        lhs: Box::new(v.clone()),
                        rhs: Box::new(Expr::IntLit {
                            value: 0,
                            loc: vloc,
                        }),
                        loc: vloc,
                    }),
                },
            ));
            slot
        });

        inner.extend(self.translate_block(body));

        // Frame check over globals only: locals are covered by the static
        // loop-assigns coverage check.
        let allowed: Vec<AssignTarget> = contract
            .assigns
            .iter()
            .filter(|t| self.program.global(t.base_name()).is_some())
            .cloned()
            .collect();
        inner.push(self.istmt(
            contract.loc,
            IStmtKind::Check {
                aid: contract.assigns_id,
                kind: CheckKind::Frame {
                    slot: frame_slot,
                    allowed,
                },
            },
        ));
        inner.push(self.istmt(
            contract.invariant.loc(),
            IStmtKind::Check {
                aid: contract.inv_preserve_id,
                kind: CheckKind::Pred(contract.invariant.clone()),
            },
        ));
        if let (Some(v), Some(slot)) = (&contract.variant, variant_slot) {
            inner.push(self.istmt(
                v.loc(),
                IStmtKind::Check {
                    aid: contract
                        .variant_decrease_id
                        .expect("variant clause always owns a decrease id"),
                    kind: CheckKind::VariantDecrease {
                        expr: v.clone(),
                        slot,
                    },
                },
            ));
        }

        out.push(IStmt {
            id: stmt.id,
            loc: stmt.loc,
            kind: IStmtKind::While {
                cond: cond.clone(),
                body: inner,
            },
        });
    }

    /// Contract stand-in for a substituted loop:
    ///
    /// ```text
    /// fassert(I);            // invariant initially established — still owed
    /// havoc(loop assigns);   // anything the loop may write
    /// fassume(I && !b);      // what the loop contract guarantees on exit
    /// ```
    fn lower_loop_standin(
        &mut self,
        stmt: &Stmt,
        cond: &Expr,
        contract: &crate::lang::LoopContract,
        out: &mut Vec<IStmt>,
    ) {
        out.push(IStmt {
            id: stmt.id,
            loc: stmt.loc,
            kind: IStmtKind::Check {
                aid: contract.inv_init_id,
                kind: CheckKind::Pred(contract.invariant.clone()),
            },
        });
        for target in &contract.assigns {
            self.havoc(target, out);
        }
        let not_cond = Expr::Unary {
            op: UnOp::Not,
            arg: Box::new(cond.clone()),
            loc: cond.loc(),
        };
        let exit_fact = Expr::Binary {
            op: BinOp::And,
            lhs: Box::new(contract.invariant.clone()),
            rhs: Box::new(not_cond),
            loc: contract.loc,
        };
        out.push(self.istmt(
            contract.loc,
            IStmtKind::Assume {
                aid: contract.inv_preserve_id,
                pred: exit_fact,
            },
        ));
    }

    /// Emits nondeterministic writes covering one assigns target.
    fn havoc(&mut self, target: &AssignTarget, out: &mut Vec<IStmt>) {
        match target {
            AssignTarget::Var { name, loc } => match self.types.get(name) {
                Some(VarType::Scalar(st)) => {
                    let st = *st;
                    out.push(self.istmt(
                        *loc,
                        IStmtKind::Nondet {
                            target: Lhs::Var {
                                name: name.clone(),
                                loc: *loc,
                            },
                            ty: st,
                        },
                    ));
                }
                Some(VarType::IntArray(len)) => {
                    let len = *len;
                    out.push(self.istmt(
                        *loc,
                        IStmtKind::NondetArray {
                            base: name.clone(),
                            lo: 0,
                            hi: len as i64 - 1,
                        },
                    ));
                }
                None => unreachable!("assigns target `{name}` is in scope after validation"),
            },
            AssignTarget::ArrayRange { base, lo, hi, loc } => {
                out.push(self.istmt(
                    *loc,
                    IStmtKind::NondetArray {
                        base: base.clone(),
                        lo: *lo,
                        hi: *hi,
                    },
                ));
            }
        }
    }
}
