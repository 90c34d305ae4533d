//! Abstract syntax for the annotated mini-language.
//!
//! Programs are small C-like translation units: global variable declarations
//! followed by function definitions, where each function carries a contract
//! written in an ACSL-style comment block (`/*@ ... */`) and each loop carries
//! a loop contract. The AST keeps enough source information (locations,
//! statement ids, annotation ids) that later pipeline stages — instrumentation,
//! execution traces, diagnosis reports — can always point back at the exact
//! clause or statement they are talking about.
//!
//! Two id spaces matter downstream:
//!
//! * [`StmtId`]: every statement gets a program-unique id at parse time.
//!   Instrumentation inserts new statements with fresh ids but never renumbers
//!   existing ones, so a path trace recorded on an instrumented program can be
//!   correlated with the original source.
//! * [`AnnId`]: every contract clause, loop-contract clause and assertion gets
//!   one or two annotation ids (a loop invariant is checked both on entry and
//!   after each iteration, so it owns two). Instrumented checks carry the id of
//!   the clause they came from.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A line/column pair, 1-based, pointing into the source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Program-unique statement identifier, assigned in parse order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StmtId(pub u32);

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Program-unique annotation identifier.
///
/// The numeric value indexes into the program's [`AnnotationRegistry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnnId(pub u32);

impl fmt::Display for AnnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// What role an annotation plays.
///
/// Contract clauses of the entry function use the plain kinds; contract
/// clauses of every other function use the `Callee*` kinds, because at run
/// time they are checked around calls rather than at the toplevel boundary.
/// A loop invariant owns two kinds (initial establishment and preservation),
/// and likewise a loop variant (non-negativity and strict decrease).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnKind {
    Requires,
    Ensures,
    Assigns,
    CalleeRequires,
    CalleeEnsures,
    CalleeAssigns,
    LoopInvariantInit,
    LoopInvariantPreserve,
    LoopVariantNonneg,
    LoopVariantDecrease,
    LoopAssigns,
    Assertion,
}

impl AnnKind {
    /// Short human-readable label used in reports and emitted code.
    pub fn label(self) -> &'static str {
        match self {
            AnnKind::Requires => "requires",
            AnnKind::Ensures => "ensures",
            AnnKind::Assigns => "assigns",
            AnnKind::CalleeRequires => "callee-requires",
            AnnKind::CalleeEnsures => "callee-ensures",
            AnnKind::CalleeAssigns => "callee-assigns",
            AnnKind::LoopInvariantInit => "loop-invariant-init",
            AnnKind::LoopInvariantPreserve => "loop-invariant-preserve",
            AnnKind::LoopVariantNonneg => "loop-variant-nonneg",
            AnnKind::LoopVariantDecrease => "loop-variant-decrease",
            AnnKind::LoopAssigns => "loop-assigns",
            AnnKind::Assertion => "assert",
        }
    }
}

impl fmt::Display for AnnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Registry entry describing one annotation id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationInfo {
    pub id: AnnId,
    pub kind: AnnKind,
    /// Function the annotation belongs to (for an assertion or loop clause,
    /// the function whose body contains it).
    pub owner: String,
    pub loc: Loc,
    /// Pretty-printed clause text, for reports.
    pub text: String,
}

/// All annotations of a program, indexed by [`AnnId`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRegistry {
    entries: Vec<AnnotationInfo>,
}

impl AnnotationRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, kind: AnnKind, owner: &str, loc: Loc, text: String) -> AnnId {
        let id = AnnId(self.entries.len() as u32);
        self.entries.push(AnnotationInfo {
            id,
            kind,
            owner: owner.to_string(),
            loc,
            text,
        });
        id
    }

    pub fn get(&self, id: AnnId) -> &AnnotationInfo {
        &self.entries[id.0 as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &AnnotationInfo> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rewrites the kind of an entry. Used once, after the entry function is
    /// designated: clauses of non-entry functions become `Callee*` kinds.
    pub(crate) fn set_kind(&mut self, id: AnnId, kind: AnnKind) {
        self.entries[id.0 as usize].kind = kind;
    }

    /// A compact label such as `ensures(f)@14` used in emitted code and
    /// reports.
    pub fn label(&self, id: AnnId) -> String {
        let e = self.get(id);
        format!("{}({})@{}", e.kind.label(), e.owner, e.loc.line)
    }
}

/// Scalar value types. Parameters and `\result` are always scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarType {
    Int,
    Bool,
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarType::Int => f.write_str("int"),
            ScalarType::Bool => f.write_str("bool"),
        }
    }
}

/// Variable types: scalars plus fixed-length integer arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarType {
    Scalar(ScalarType),
    /// `int name[len]` — length is part of the type and statically known.
    IntArray(u32),
}

impl VarType {
    pub fn is_array(self) -> bool {
        matches!(self, VarType::IntArray(_))
    }
}

/// Binary operators. The comparison and logic subset is shared between code
/// and annotations; `Implies` is annotation-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    /// `==>`; only meaningful inside annotations.
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }

    pub fn is_arith(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
}

/// Expressions. One tree serves both executable code and annotations; the
/// validator rejects annotation-only forms (`\old`, `\result`, quantifiers,
/// `==>`) when they appear in code position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    IntLit {
        value: i64,
        loc: Loc,
    },
    BoolLit {
        value: bool,
        loc: Loc,
    },
    Var {
        name: String,
        loc: Loc,
    },
    /// `a[e]` — `a` must name an array variable.
    Index {
        base: String,
        index: Box<Expr>,
        loc: Loc,
    },
    Unary {
        op: UnOp,
        arg: Box<Expr>,
        loc: Loc,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        loc: Loc,
    },
    /// `\old(e)` — value of `e` in the pre-state. Annotation-only; allowed in
    /// `ensures` clauses.
    Old {
        arg: Box<Expr>,
        loc: Loc,
    },
    /// Reference to a pre-evaluated `\old` snapshot slot. Never produced by
    /// the parser; instrumentation rewrites `Old` nodes into `OldRef` so a
    /// check can read the snapshot captured at the matching program point.
    OldRef {
        slot: u32,
        loc: Loc,
    },
    /// `\result` — annotation-only; allowed in `ensures` of non-void functions.
    Result {
        loc: Loc,
    },
    /// Bounded quantifier:
    /// `\forall integer k; lo <= k <  hi ==> body`
    /// `\exists integer k; lo <  k <= hi &&  body`
    /// Bound strictness is preserved for faithful printing.
    Quant {
        universal: bool,
        var: String,
        lo: Box<Expr>,
        lo_strict: bool,
        hi: Box<Expr>,
        hi_strict: bool,
        body: Box<Expr>,
        loc: Loc,
    },
}

impl Expr {
    pub fn loc(&self) -> Loc {
        match self {
            Expr::IntLit { loc, .. }
            | Expr::BoolLit { loc, .. }
            | Expr::Var { loc, .. }
            | Expr::Index { loc, .. }
            | Expr::Unary { loc, .. }
            | Expr::Binary { loc, .. }
            | Expr::Old { loc, .. }
            | Expr::OldRef { loc, .. }
            | Expr::Result { loc }
            | Expr::Quant { loc, .. } => *loc,
        }
    }

    /// Convenience constructor for a location-less `true`.
    pub fn truth() -> Expr {
        Expr::BoolLit {
            value: true,
            loc: Loc::default(),
        }
    }

    /// Walks the tree, calling `f` on every node (pre-order).
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::IntLit { .. }
            | Expr::BoolLit { .. }
            | Expr::Var { .. }
            | Expr::OldRef { .. }
            | Expr::Result { .. } => {}
            Expr::Index { index, .. } => index.walk(f),
            Expr::Unary { arg, .. } => arg.walk(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Old { arg, .. } => arg.walk(f),
            Expr::Quant { lo, hi, body, .. } => {
                lo.walk(f);
                hi.walk(f);
                body.walk(f);
            }
        }
    }
}

/// Assignment destination in executable code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Lhs {
    Var { name: String, loc: Loc },
    /// `a[e] = ...`
    Index { base: String, index: Expr, loc: Loc },
}

impl Lhs {
    pub fn loc(&self) -> Loc {
        match self {
            Lhs::Var { loc, .. } | Lhs::Index { loc, .. } => *loc,
        }
    }

    pub fn base_name(&self) -> &str {
        match self {
            Lhs::Var { name, .. } => name,
            Lhs::Index { base, .. } => base,
        }
    }
}

/// One location (or contiguous range of array cells) named by an `assigns` or
/// `loop assigns` clause. Range bounds are integer constants so frames can be
/// computed without running the program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssignTarget {
    /// A whole variable: a global for function contracts, a local or global
    /// for loop contracts.
    Var { name: String, loc: Loc },
    /// `a[lo..hi]`, inclusive on both ends.
    ArrayRange { base: String, lo: i64, hi: i64, loc: Loc },
}

impl AssignTarget {
    pub fn base_name(&self) -> &str {
        match self {
            AssignTarget::Var { name, .. } => name,
            AssignTarget::ArrayRange { base, .. } => base,
        }
    }

    pub fn loc(&self) -> Loc {
        match self {
            AssignTarget::Var { loc, .. } | AssignTarget::ArrayRange { loc, .. } => *loc,
        }
    }
}

/// Function contract. Missing `requires`/`ensures` clauses default to `\true`
/// but still receive annotation ids so instrumentation stays uniform; a
/// missing `assigns` clause stays `None` and is only legal on functions that
/// are never called.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub requires: Expr,
    pub requires_id: AnnId,
    pub ensures: Expr,
    pub ensures_id: AnnId,
    /// `Some(vec![])` is `assigns \nothing`; `None` means the clause is absent.
    pub assigns: Option<Vec<AssignTarget>>,
    pub assigns_id: Option<AnnId>,
    pub loc: Loc,
}

/// Loop contract. `loop assigns` is mandatory (the validator enforces it);
/// the invariant defaults to `\true`, the variant is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopContract {
    pub invariant: Expr,
    pub inv_init_id: AnnId,
    pub inv_preserve_id: AnnId,
    pub assigns: Vec<AssignTarget>,
    pub assigns_id: AnnId,
    pub variant: Option<Expr>,
    pub variant_nonneg_id: Option<AnnId>,
    pub variant_decrease_id: Option<AnnId>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stmt {
    pub id: StmtId,
    pub loc: Loc,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    /// Local declaration. Uninitialized scalars start at `0`/`false`,
    /// uninitialized array cells at `0` (documented language semantics, so
    /// every run is deterministic).
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
        then_branch: Block,
        else_branch: Option<Block>,
    },
    While {
        cond: Expr,
        contract: LoopContract,
        body: Block,
    },
    /// Call statement, optionally binding the return value.
    Call {
        target: Option<Lhs>,
        callee: String,
        args: Vec<Expr>,
    },
    Return {
        value: Option<Expr>,
    },
    /// `/*@ assert P; */` in statement position.
    Assert {
        id: AnnId,
        pred: Expr,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: ScalarType,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    /// `None` for `void`.
    pub ret: Option<ScalarType>,
    pub contract: Contract,
    pub body: Block,
    pub loc: Loc,
}

/// Global variable declaration. A global with an initializer has a fixed
/// starting value; a global without one is an input of the function under
/// analysis and is enumerated over the input domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalDef {
    pub name: String,
    pub ty: VarType,
    /// Scalar initializer (`int x = 3;` / `bool b = true;`). Arrays cannot be
    /// initialized and always start as inputs.
    pub init: Option<i64>,
    pub loc: Loc,
}

/// A parsed, validated program with a designated entry function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub globals: Vec<GlobalDef>,
    pub functions: Vec<FunctionDef>,
    /// Name of the function under analysis. Defaults to the last function in
    /// the file.
    pub entry: String,
    pub annotations: AnnotationRegistry,
    /// One past the largest [`StmtId`] in use; instrumentation allocates new
    /// statement ids from here.
    pub next_stmt_id: u32,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn entry_fn(&self) -> &FunctionDef {
        self.function(&self.entry)
            .expect("entry function exists after validation")
    }

    pub fn global(&self, name: &str) -> Option<&GlobalDef> {
        self.globals.iter().find(|g| g.name == name)
    }
}
