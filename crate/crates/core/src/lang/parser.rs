//! Recursive-descent parser.
//!
//! Produces a [`Program`] with statement and annotation ids already assigned
//! (in source order, so ids are deterministic for a given input). Entry
//! designation, scope/type checking and the static `loop assigns` coverage
//! check happen afterwards in [`super::validate`].
//!
//! Grammar notes (the full grammar lives in `docs/grammar.md`):
//!
//! * Function contracts and loop contracts are ACSL-style annotation blocks.
//!   A `while` loop must be immediately preceded by its loop contract, and the
//!   `loop assigns` clause is mandatory.
//! * Calls are statements (`g(a);` or `x = g(a);`), never subexpressions, so
//!   expressions are side-effect free.
//! * `x += e`, `x -= e`, `x *= e`, `x++` and `x--` are sugar and desugar to
//!   plain assignments during parsing.

use super::ast::*;
use super::lexer::{lex, Spanned, Tok};
use super::pretty;
use super::LangError;

pub(super) fn parse_raw(src: &str) -> Result<Program, LangError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        next_stmt: 0,
        reg: AnnotationRegistry::new(),
        current_fn: String::new(),
    };
    p.parse_program()
}

/// Pending contract clauses gathered from an annotation block, before we know
/// which function they belong to.
#[derive(Default)]
struct PendingContract {
    requires: Option<(Expr, Loc)>,
    ensures: Option<(Expr, Loc)>,
    assigns: Option<(Vec<AssignTarget>, Loc)>,
    loc: Loc,
}

#[derive(Default)]
struct PendingLoopContract {
    invariant: Option<(Expr, Loc)>,
    assigns: Option<(Vec<AssignTarget>, Loc)>,
    variant: Option<(Expr, Loc)>,
    loc: Loc,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    next_stmt: u32,
    reg: AnnotationRegistry,
    current_fn: String,
}

impl Parser {
    // ----- token helpers -----

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].loc
    }

    fn bump(&mut self) -> Spanned {
        let s = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        s
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Loc, LangError> {
        if self.peek() == &tok {
            Ok(self.bump().loc)
        } else {
            Err(self.err(format!("expected {}, found {}", tok, self.peek())))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Loc), LangError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let loc = self.bump().loc;
                Ok((name, loc))
            }
            other => Err(self.err(format!("expected identifier, found {other}"))),
        }
    }

    /// Contextual keyword: an identifier with a fixed spelling.
    fn eat_word(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(w) if w == word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err(&self, msg: String) -> LangError {
        LangError::Parse {
            loc: self.loc(),
            msg,
        }
    }

    fn fresh_stmt_id(&mut self) -> StmtId {
        let id = StmtId(self.next_stmt);
        self.next_stmt += 1;
        id
    }

    // ----- program structure -----

    fn parse_program(&mut self) -> Result<Program, LangError> {
        let mut globals = Vec::new();
        let mut functions = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::AnnotStart => {
                    let contract = self.parse_contract_block()?;
                    let func = self.parse_function(contract)?;
                    functions.push(func);
                }
                Tok::KwInt | Tok::KwBool | Tok::KwVoid => {
                    // function without a contract block, or a global
                    if self.looks_like_function() {
                        let func = self.parse_function(PendingContract::default())?;
                        functions.push(func);
                    } else {
                        globals.push(self.parse_global()?);
                    }
                }
                other => {
                    return Err(self.err(format!(
                        "expected declaration or function definition, found {other}"
                    )))
                }
            }
        }
        if functions.is_empty() {
            return Err(LangError::Parse {
                loc: Loc { line: 1, col: 1 },
                msg: "program contains no function definition".into(),
            });
        }
        let entry = functions.last().unwrap().name.clone();
        Ok(Program {
            globals,
            functions,
            entry,
            annotations: std::mem::take(&mut self.reg),
            next_stmt_id: self.next_stmt,
        })
    }

    /// `<type> <ident> (` begins a function; anything else after the type and
    /// name is a global declaration.
    fn looks_like_function(&self) -> bool {
        matches!(self.peek_at(2), Tok::LParen)
    }

    fn parse_type(&mut self) -> Result<(Option<ScalarType>, Loc), LangError> {
        let loc = self.loc();
        let ty = match self.peek() {
            Tok::KwInt => {
                self.bump();
                Some(ScalarType::Int)
            }
            Tok::KwBool => {
                self.bump();
                Some(ScalarType::Bool)
            }
            Tok::KwVoid => {
                self.bump();
                None
            }
            other => return Err(self.err(format!("expected type, found {other}"))),
        };
        Ok((ty, loc))
    }

    fn parse_global(&mut self) -> Result<GlobalDef, LangError> {
        let (ty, loc) = self.parse_type()?;
        let Some(scalar) = ty else {
            return Err(self.err("global variables cannot be `void`".into()));
        };
        let (name, _) = self.expect_ident()?;
        let vty = if self.eat(&Tok::LBracket) {
            if scalar != ScalarType::Int {
                return Err(self.err("only `int` arrays are supported".into()));
            }
            let len = self.parse_array_len()?;
            self.expect(Tok::RBracket)?;
            VarType::IntArray(len)
        } else {
            VarType::Scalar(scalar)
        };
        let init = if self.eat(&Tok::Assign) {
            if vty.is_array() {
                return Err(self.err("array globals cannot have initializers".into()));
            }
            Some(self.parse_const_scalar(scalar)?)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(GlobalDef {
            name,
            ty: vty,
            init,
            loc,
        })
    }

    fn parse_array_len(&mut self) -> Result<u32, LangError> {
        match self.peek().clone() {
            Tok::Int(n) if n > 0 && n <= 1 << 16 => {
                self.bump();
                Ok(n as u32)
            }
            Tok::Int(n) => Err(self.err(format!("array length {n} out of range (1..=65536)"))),
            other => Err(self.err(format!("expected array length, found {other}"))),
        }
    }

    /// Constant scalar initializer: an integer literal (optionally negated) or
    /// a boolean literal.
    fn parse_const_scalar(&mut self, ty: ScalarType) -> Result<i64, LangError> {
        let neg = self.eat(&Tok::Minus);
        match (ty, self.peek().clone()) {
            (ScalarType::Int, Tok::Int(n)) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            (ScalarType::Bool, Tok::KwTrue) if !neg => {
                self.bump();
                Ok(1)
            }
            (ScalarType::Bool, Tok::KwFalse) if !neg => {
                self.bump();
                Ok(0)
            }
            (_, other) => Err(self.err(format!("expected constant initializer, found {other}"))),
        }
    }

    // ----- contracts -----

    fn parse_contract_block(&mut self) -> Result<PendingContract, LangError> {
        let loc = self.expect(Tok::AnnotStart)?;
        let mut pending = PendingContract {
            loc,
            ..Default::default()
        };
        loop {
            if self.eat(&Tok::AnnotEnd) {
                break;
            }
            let clause_loc = self.loc();
            if self.eat_word("requires") {
                if pending.requires.is_some() {
                    return Err(self.err("duplicate `requires` clause".into()));
                }
                let e = self.parse_pred()?;
                self.expect(Tok::Semi)?;
                pending.requires = Some((e, clause_loc));
            } else if self.eat_word("ensures") {
                if pending.ensures.is_some() {
                    return Err(self.err("duplicate `ensures` clause".into()));
                }
                let e = self.parse_pred()?;
                self.expect(Tok::Semi)?;
                pending.ensures = Some((e, clause_loc));
            } else if self.eat_word("assigns") {
                if pending.assigns.is_some() {
                    return Err(self.err("duplicate `assigns` clause".into()));
                }
                let targets = self.parse_assign_targets()?;
                self.expect(Tok::Semi)?;
                pending.assigns = Some((targets, clause_loc));
            } else {
                return Err(self.err(format!(
                    "expected contract clause (`requires`, `assigns`, `ensures`), found {}",
                    self.peek()
                )));
            }
        }
        Ok(pending)
    }

    fn parse_assign_targets(&mut self) -> Result<Vec<AssignTarget>, LangError> {
        if self.eat(&Tok::BsNothing) {
            return Ok(Vec::new());
        }
        let mut targets = Vec::new();
        loop {
            let (name, loc) = self.expect_ident()?;
            if self.eat(&Tok::LBracket) {
                let lo = self.parse_signed_int()?;
                self.expect(Tok::DotDot)?;
                let hi = self.parse_signed_int()?;
                self.expect(Tok::RBracket)?;
                targets.push(AssignTarget::ArrayRange {
                    base: name,
                    lo,
                    hi,
                    loc,
                });
            } else {
                targets.push(AssignTarget::Var { name, loc });
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(targets)
    }

    fn parse_signed_int(&mut self) -> Result<i64, LangError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            other => Err(self.err(format!("expected integer constant, found {other}"))),
        }
    }

    /// Materializes a pending contract once the owning function is known.
    /// Defaulted clauses get real annotation ids so instrumentation is uniform.
    fn finish_contract(&mut self, pending: PendingContract, owner: &str, fn_loc: Loc) -> Contract {
        let loc = if pending.loc == Loc::default() {
            fn_loc
        } else {
            pending.loc
        };
        let (requires, req_loc) = pending
            .requires
            .unwrap_or_else(|| (Expr::truth(), fn_loc));
        let requires_id = self.reg.add(
            AnnKind::Requires,
            owner,
            req_loc,
            pretty::expr_to_string(&requires),
        );
        let (assigns, assigns_id) = match pending.assigns {
            Some((targets, a_loc)) => {
                let text = pretty::assigns_to_string(&targets);
                let id = self.reg.add(AnnKind::Assigns, owner, a_loc, text);
                (Some(targets), Some(id))
            }
            None => (None, None),
        };
        let (ensures, ens_loc) = pending.ensures.unwrap_or_else(|| (Expr::truth(), fn_loc));
        let ensures_id = self.reg.add(
            AnnKind::Ensures,
            owner,
            ens_loc,
            pretty::expr_to_string(&ensures),
        );
        Contract {
            requires,
            requires_id,
            ensures,
            ensures_id,
            assigns,
            assigns_id,
            loc,
        }
    }

    fn parse_loop_contract_block(&mut self) -> Result<PendingLoopContract, LangError> {
        let loc = self.expect(Tok::AnnotStart)?;
        let mut pending = PendingLoopContract {
            loc,
            ..Default::default()
        };
        loop {
            if self.eat(&Tok::AnnotEnd) {
                break;
            }
            if !self.eat_word("loop") {
                return Err(self.err(format!(
                    "expected `loop` clause in loop contract, found {}",
                    self.peek()
                )));
            }
            let clause_loc = self.loc();
            if self.eat_word("invariant") {
                if pending.invariant.is_some() {
                    return Err(self.err("duplicate `loop invariant` clause".into()));
                }
                let e = self.parse_pred()?;
                self.expect(Tok::Semi)?;
                pending.invariant = Some((e, clause_loc));
            } else if self.eat_word("assigns") {
                if pending.assigns.is_some() {
                    return Err(self.err("duplicate `loop assigns` clause".into()));
                }
                let targets = self.parse_assign_targets()?;
                self.expect(Tok::Semi)?;
                pending.assigns = Some((targets, clause_loc));
            } else if self.eat_word("variant") {
                if pending.variant.is_some() {
                    return Err(self.err("duplicate `loop variant` clause".into()));
                }
                let e = self.parse_pred()?;
                self.expect(Tok::Semi)?;
                pending.variant = Some((e, clause_loc));
            } else {
                return Err(self.err(format!(
                    "expected `invariant`, `assigns` or `variant` after `loop`, found {}",
                    self.peek()
                )));
            }
        }
        Ok(pending)
    }

    fn finish_loop_contract(
        &mut self,
        pending: PendingLoopContract,
        while_loc: Loc,
    ) -> Result<LoopContract, LangError> {
        let owner = self.current_fn.clone();
        let (invariant, inv_loc) = pending
            .invariant
            .unwrap_or_else(|| (Expr::truth(), while_loc));
        let inv_text = pretty::expr_to_string(&invariant);
        let inv_init_id = self
            .reg
            .add(AnnKind::LoopInvariantInit, &owner, inv_loc, inv_text.clone());
        let inv_preserve_id =
            self.reg
                .add(AnnKind::LoopInvariantPreserve, &owner, inv_loc, inv_text);
        let Some((assigns, a_loc)) = pending.assigns else {
            return Err(LangError::Parse {
                loc: while_loc,
                msg: "every loop must declare a `loop assigns` clause".into(),
            });
        };
        let assigns_id = self.reg.add(
            AnnKind::LoopAssigns,
            &owner,
            a_loc,
            pretty::assigns_to_string(&assigns),
        );
        let (variant, variant_nonneg_id, variant_decrease_id) = match pending.variant {
            Some((v, v_loc)) => {
                let text = pretty::expr_to_string(&v);
                let nn = self
                    .reg
                    .add(AnnKind::LoopVariantNonneg, &owner, v_loc, text.clone());
                let de = self
                    .reg
                    .add(AnnKind::LoopVariantDecrease, &owner, v_loc, text);
                (Some(v), Some(nn), Some(de))
            }
            None => (None, None, None),
        };
        Ok(LoopContract {
            invariant,
            inv_init_id,
            inv_preserve_id,
            assigns,
            assigns_id,
            variant,
            variant_nonneg_id,
            variant_decrease_id,
            loc: pending.loc,
        })
    }

    // ----- functions and statements -----

    fn parse_function(&mut self, pending: PendingContract) -> Result<FunctionDef, LangError> {
        let (ret, fn_loc) = self.parse_type()?;
        let (name, _) = self.expect_ident()?;
        self.current_fn = name.clone();
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            if self.eat(&Tok::KwVoid) && self.peek() == &Tok::RParen {
                self.bump();
            } else {
                loop {
                    let (pty, ploc) = self.parse_type()?;
                    let Some(scalar) = pty else {
                        return Err(self.err("parameters cannot be `void`".into()));
                    };
                    let (pname, _) = self.expect_ident()?;
                    if self.peek() == &Tok::LBracket {
                        return Err(self.err(
                            "array parameters are not supported; use a global array".into(),
                        ));
                    }
                    params.push(Param {
                        name: pname,
                        ty: scalar,
                        loc: ploc,
                    });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
        }
        let contract = self.finish_contract(pending, &name, fn_loc);
        let body = self.parse_block()?;
        Ok(FunctionDef {
            name,
            params,
            ret,
            contract,
            body,
            loc: fn_loc,
        })
    }

    fn parse_block(&mut self) -> Result<Block, LangError> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            stmts.push(self.parse_stmt()?);
        }
        Ok(Block { stmts })
    }

    /// A loop body or branch: either a braced block or a single statement.
    fn parse_block_or_stmt(&mut self) -> Result<Block, LangError> {
        if self.peek() == &Tok::LBrace {
            self.parse_block()
        } else {
            let stmt = self.parse_stmt()?;
            Ok(Block { stmts: vec![stmt] })
        }
    }

    fn parse_stmt(&mut self) -> Result<Stmt, LangError> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::AnnotStart => {
                // assertion or loop contract
                if self.annot_starts_with("assert") {
                    self.bump(); // AnnotStart
                    self.eat_word("assert");
                    let pred_loc = self.loc();
                    let pred = self.parse_pred()?;
                    self.expect(Tok::Semi)?;
                    self.expect(Tok::AnnotEnd)?;
                    let owner = self.current_fn.clone();
                    let id = self.reg.add(
                        AnnKind::Assertion,
                        &owner,
                        pred_loc,
                        pretty::expr_to_string(&pred),
                    );
                    Ok(Stmt {
                        id: self.fresh_stmt_id(),
                        loc,
                        kind: StmtKind::Assert { id, pred },
                    })
                } else {
                    let pending = self.parse_loop_contract_block()?;
                    let while_loc = self.loc();
                    if self.peek() != &Tok::KwWhile {
                        return Err(self.err(
                            "a loop contract must be immediately followed by `while`".into(),
                        ));
                    }
                    self.parse_while(pending, while_loc)
                }
            }
            Tok::KwWhile => Err(self.err(
                "every loop must carry a loop contract (`/*@ loop assigns ...; */`)".into(),
            )),
            Tok::KwIf => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.parse_pred()?;
                self.expect(Tok::RParen)?;
                let then_branch = self.parse_block_or_stmt()?;
                let else_branch = if self.eat(&Tok::KwElse) {
                    Some(self.parse_block_or_stmt()?)
                } else {
                    None
                };
                Ok(Stmt {
                    id: self.fresh_stmt_id(),
                    loc,
                    kind: StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    },
                })
            }
            Tok::KwReturn => {
                self.bump();
                let value = if self.peek() == &Tok::Semi {
                    None
                } else {
                    Some(self.parse_pred()?)
                };
                self.expect(Tok::Semi)?;
                Ok(Stmt {
                    id: self.fresh_stmt_id(),
                    loc,
                    kind: StmtKind::Return { value },
                })
            }
            Tok::KwInt | Tok::KwBool => {
                let (ty, _) = self.parse_type()?;
                let scalar = ty.unwrap();
                let (name, _) = self.expect_ident()?;
                let vty = if self.eat(&Tok::LBracket) {
                    if scalar != ScalarType::Int {
                        return Err(self.err("only `int` arrays are supported".into()));
                    }
                    let len = self.parse_array_len()?;
                    self.expect(Tok::RBracket)?;
                    VarType::IntArray(len)
                } else {
                    VarType::Scalar(scalar)
                };
                let init = if self.eat(&Tok::Assign) {
                    if vty.is_array() {
                        return Err(self.err("array locals cannot have initializers".into()));
                    }
                    Some(self.parse_pred()?)
                } else {
                    None
                };
                self.expect(Tok::Semi)?;
                Ok(Stmt {
                    id: self.fresh_stmt_id(),
                    loc,
                    kind: StmtKind::Decl {
                        name,
                        ty: vty,
                        init,
                    },
                })
            }
            Tok::Ident(name) => self.parse_assign_or_call(name, loc),
            other => Err(self.err(format!("expected statement, found {other}"))),
        }
    }

    /// Peeks inside an `AnnotStart` to see whether its first word matches.
    fn annot_starts_with(&self, word: &str) -> bool {
        matches!(self.peek_at(1), Tok::Ident(w) if w == word)
    }

    fn parse_while(
        &mut self,
        pending: PendingLoopContract,
        while_loc: Loc,
    ) -> Result<Stmt, LangError> {
        self.expect(Tok::KwWhile)?;
        self.expect(Tok::LParen)?;
        let cond = self.parse_pred()?;
        self.expect(Tok::RParen)?;
        let contract = self.finish_loop_contract(pending, while_loc)?;
        let body = self.parse_block_or_stmt()?;
        Ok(Stmt {
            id: self.fresh_stmt_id(),
            loc: while_loc,
            kind: StmtKind::While {
                cond,
                contract,
                body,
            },
        })
    }

    fn parse_assign_or_call(&mut self, name: String, loc: Loc) -> Result<Stmt, LangError> {
        // `g(...)` — a call statement without a result binding
        if self.peek_at(1) == &Tok::LParen {
            self.bump(); // name
            let args = self.parse_call_args()?;
            self.expect(Tok::Semi)?;
            return Ok(Stmt {
                id: self.fresh_stmt_id(),
                loc,
                kind: StmtKind::Call {
                    target: None,
                    callee: name,
                    args,
                },
            });
        }
        self.bump(); // name
        let target = if self.eat(&Tok::LBracket) {
            let index = self.parse_pred()?;
            self.expect(Tok::RBracket)?;
            Lhs::Index {
                base: name.clone(),
                index,
                loc,
            }
        } else {
            Lhs::Var {
                name: name.clone(),
                loc,
            }
        };
        let target_expr = || match &target {
            Lhs::Var { name, loc } => Expr::Var {
                name: name.clone(),
                loc: *loc,
            },
            Lhs::Index { base, index, loc } => Expr::Index {
                base: base.clone(),
                index: Box::new(index.clone()),
                loc: *loc,
            },
        };
        let sugar = |op: BinOp, rhs: Expr, loc: Loc, lhs: Expr| StmtKind::Assign {
            target: target.clone(),
            value: Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            },
        };
        let kind = match self.peek().clone() {
            Tok::Assign => {
                self.bump();
                // `x = g(...);` — call with result binding
                if let Tok::Ident(callee) = self.peek().clone() {
                    if self.peek_at(1) == &Tok::LParen {
                        self.bump();
                        let args = self.parse_call_args()?;
                        self.expect(Tok::Semi)?;
                        return Ok(Stmt {
                            id: self.fresh_stmt_id(),
                            loc,
                            kind: StmtKind::Call {
                                target: Some(target),
                                callee,
                                args,
                            },
                        });
                    }
                }
                let value = self.parse_pred()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assign { target, value }
            }
            Tok::PlusEq => {
                let op_loc = self.bump().loc;
                let rhs = self.parse_pred()?;
                self.expect(Tok::Semi)?;
                sugar(BinOp::Add, rhs, op_loc, target_expr())
            }
            Tok::MinusEq => {
                let op_loc = self.bump().loc;
                let rhs = self.parse_pred()?;
                self.expect(Tok::Semi)?;
                sugar(BinOp::Sub, rhs, op_loc, target_expr())
            }
            Tok::StarEq => {
                let op_loc = self.bump().loc;
                let rhs = self.parse_pred()?;
                self.expect(Tok::Semi)?;
                sugar(BinOp::Mul, rhs, op_loc, target_expr())
            }
            Tok::PlusPlus => {
                let op_loc = self.bump().loc;
                self.expect(Tok::Semi)?;
                sugar(
                    BinOp::Add,
                    Expr::IntLit {
                        value: 1,
                        loc: op_loc,
                    },
                    op_loc,
                    target_expr(),
                )
            }
            Tok::MinusMinus => {
                let op_loc = self.bump().loc;
                self.expect(Tok::Semi)?;
                sugar(
                    BinOp::Sub,
                    Expr::IntLit {
                        value: 1,
                        loc: op_loc,
                    },
                    op_loc,
                    target_expr(),
                )
            }
            other => return Err(self.err(format!("expected assignment operator, found {other}"))),
        };
        Ok(Stmt {
            id: self.fresh_stmt_id(),
            loc,
            kind,
        })
    }

    fn parse_call_args(&mut self) -> Result<Vec<Expr>, LangError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                args.push(self.parse_pred()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(args)
    }

    // ----- expressions -----
    //
    // pred    := or (`==>` pred)?          right-associative
    // or      := and (`||` and)*
    // and     := cmp (`&&` cmp)*
    // cmp     := sum (relop sum)?          no chaining outside quantifier bounds
    // sum     := term ((`+`|`-`) term)*
    // term    := unary ((`*`|`/`|`%`) unary)*
    // unary   := (`-`|`!`) unary | atom

    fn parse_pred(&mut self) -> Result<Expr, LangError> {
        let lhs = self.parse_or()?;
        if self.peek() == &Tok::Implies {
            let loc = self.bump().loc;
            let rhs = self.parse_pred()?;
            return Ok(Expr::Binary {
                op: BinOp::Implies,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            });
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.parse_and()?;
        while self.peek() == &Tok::OrOr {
            let loc = self.bump().loc;
            let rhs = self.parse_and()?;
            lhs = Expr::Binary {
                op: BinOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            };
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.parse_cmp()?;
        while self.peek() == &Tok::AndAnd {
            let loc = self.bump().loc;
            let rhs = self.parse_cmp()?;
            lhs = Expr::Binary {
                op: BinOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            };
        }
        Ok(lhs)
    }

    fn relop(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Lt => Some(BinOp::Lt),
            Tok::Le => Some(BinOp::Le),
            Tok::Gt => Some(BinOp::Gt),
            Tok::Ge => Some(BinOp::Ge),
            Tok::EqEq => Some(BinOp::Eq),
            Tok::Ne => Some(BinOp::Ne),
            _ => None,
        }
    }

    fn parse_cmp(&mut self) -> Result<Expr, LangError> {
        let lhs = self.parse_sum()?;
        if let Some(op) = self.relop() {
            let loc = self.bump().loc;
            let rhs = self.parse_sum()?;
            if self.relop().is_some() {
                return Err(self.err(
                    "chained comparisons are only allowed as quantifier bounds".into(),
                ));
            }
            return Ok(Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            });
        }
        Ok(lhs)
    }

    fn parse_sum(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let loc = self.bump().loc;
            let rhs = self.parse_term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            };
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => break,
            };
            let loc = self.bump().loc;
            let rhs = self.parse_unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, LangError> {
        match self.peek() {
            Tok::Minus => {
                let loc = self.bump().loc;
                let arg = self.parse_unary()?;
                Ok(Expr::Unary {
                    op: UnOp::Neg,
                    arg: Box::new(arg),
                    loc,
                })
            }
            Tok::Not => {
                let loc = self.bump().loc;
                let arg = self.parse_unary()?;
                Ok(Expr::Unary {
                    op: UnOp::Not,
                    arg: Box::new(arg),
                    loc,
                })
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<Expr, LangError> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Int(value) => {
                self.bump();
                Ok(Expr::IntLit { value, loc })
            }
            Tok::KwTrue | Tok::BsTrue => {
                self.bump();
                Ok(Expr::BoolLit { value: true, loc })
            }
            Tok::KwFalse | Tok::BsFalse => {
                self.bump();
                Ok(Expr::BoolLit { value: false, loc })
            }
            Tok::LParen => {
                self.bump();
                let e = self.parse_pred()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::BsOld => {
                self.bump();
                self.expect(Tok::LParen)?;
                let arg = self.parse_pred()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Old {
                    arg: Box::new(arg),
                    loc,
                })
            }
            Tok::BsResult => {
                self.bump();
                Ok(Expr::Result { loc })
            }
            Tok::BsForall => self.parse_quant(true, loc),
            Tok::BsExists => self.parse_quant(false, loc),
            Tok::Ident(name) => {
                self.bump();
                if self.eat(&Tok::LBracket) {
                    let index = self.parse_pred()?;
                    self.expect(Tok::RBracket)?;
                    Ok(Expr::Index {
                        base: name,
                        index: Box::new(index),
                        loc,
                    })
                } else {
                    Ok(Expr::Var { name, loc })
                }
            }
            other => Err(self.err(format!("expected expression, found {other}"))),
        }
    }

    /// `\forall integer k; lo <= k < hi ==> body`
    /// `\exists integer k; lo <= k < hi && body`
    ///
    /// Both bound comparisons may independently be `<` or `<=`. The bound
    /// variable must appear in the middle of the range guard.
    fn parse_quant(&mut self, universal: bool, loc: Loc) -> Result<Expr, LangError> {
        self.bump(); // \forall or \exists
        if !self.eat_word("integer") {
            return Err(self.err("expected `integer` after quantifier".into()));
        }
        let (var, _) = self.expect_ident()?;
        self.expect(Tok::Semi)?;
        let lo = self.parse_sum()?;
        let lo_strict = match self.peek() {
            Tok::Le => false,
            Tok::Lt => true,
            other => {
                return Err(self.err(format!(
                    "expected `<=` or `<` in quantifier bounds, found {other}"
                )))
            }
        };
        self.bump();
        let (mid, mid_loc) = self.expect_ident()?;
        if mid != var {
            return Err(LangError::Parse {
                loc: mid_loc,
                msg: format!("quantifier bounds must constrain `{var}`, found `{mid}`"),
            });
        }
        let hi_strict = match self.peek() {
            Tok::Le => false,
            Tok::Lt => true,
            other => {
                return Err(self.err(format!(
                    "expected `<=` or `<` in quantifier bounds, found {other}"
                )))
            }
        };
        self.bump();
        let hi = self.parse_sum()?;
        if universal {
            self.expect(Tok::Implies)?;
        } else {
            self.expect(Tok::AndAnd)?;
        }
        let body = self.parse_pred()?;
        Ok(Expr::Quant {
            universal,
            var,
            lo: Box::new(lo),
            lo_strict,
            hi: Box::new(hi),
            hi_strict,
            body: Box::new(body),
            loc,
        })
    }
}
