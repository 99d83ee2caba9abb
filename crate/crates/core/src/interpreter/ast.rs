//! Syntax tree for the drone-control DSL.

use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based source location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}", self.line, self.col)
    }
}

/// The six robot API entry points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Api {
    Takeoff,
    Land,
    FlyTo,
    SetYaw,
    GetYaw,
    GetDronePosition,
}

impl Api {
    pub const ALL: [Api; 6] = [
        Api::Takeoff,
        Api::Land,
        Api::FlyTo,
        Api::SetYaw,
        Api::GetYaw,
        Api::GetDronePosition,
    ];

    pub fn from_name(name: &str) -> Option<Api> {
        Api::ALL.into_iter().find(|api| api.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Api::Takeoff => "takeoff",
            Api::Land => "land",
            Api::FlyTo => "fly_to",
            Api::SetYaw => "set_yaw",
            Api::GetYaw => "get_yaw",
            Api::GetDronePosition => "get_drone_position",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Api::FlyTo | Api::SetYaw => 1,
            _ => 0,
        }
    }

    /// Query calls read state and never produce an action.
    pub fn is_query(self) -> bool {
        matches!(self, Api::GetYaw | Api::GetDronePosition)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div | BinOp::FloorDiv | BinOp::Mod => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Name(String),
    List(Vec<Expr>),
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// `aw.<api>(...)`, or the bare `<api>(...)` form when `qualified` is false.
    Call {
        api: Api,
        qualified: bool,
        args: Vec<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn number(value: f64, span: Span) -> Self {
        Self::new(ExprKind::Number(value), span)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        let span = lhs.span;
        Self::new(
            ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Name(String),
    Tuple(Vec<String>),
    Index { name: String, index: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeSpec {
    pub start: Option<Expr>,
    pub stop: Expr,
    pub step: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        target: Target,
        value: Expr,
    },
    AugAssign {
        target: Target,
        op: BinOp,
        value: Expr,
    },
    Expr(Expr),
    For {
        var: String,
        range: RangeSpec,
        body: Vec<Stmt>,
    },
    Pass,
    /// Preamble import; kept so the printer can reproduce it.
    Import(String),
}

/// A parsed program: the code text as an ordered statement tree.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub statements: Vec<Stmt>,
}

impl Program {
    /// Visit every expression in source order, depth first.
    pub fn walk_exprs<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        fn walk_expr<'a>(expr: &'a Expr, visit: &mut impl FnMut(&'a Expr)) {
            visit(expr);
            match &expr.kind {
                ExprKind::Number(_) | ExprKind::Name(_) => {}
                ExprKind::List(items) => items.iter().for_each(|e| walk_expr(e, visit)),
                ExprKind::Index { base, index } => {
                    walk_expr(base, visit);
                    walk_expr(index, visit);
                }
                ExprKind::Unary { operand, .. } => walk_expr(operand, visit),
                ExprKind::Binary { lhs, rhs, .. } => {
                    walk_expr(lhs, visit);
                    walk_expr(rhs, visit);
                }
                ExprKind::Call { args, .. } => args.iter().for_each(|e| walk_expr(e, visit)),
            }
        }
        fn walk_stmts<'a>(stmts: &'a [Stmt], visit: &mut impl FnMut(&'a Expr)) {
            for stmt in stmts {
                match &stmt.kind {
                    StmtKind::Assign { target, value } | StmtKind::AugAssign { target, value, .. } => {
                        if let Target::Index { index, .. } = target {
                            walk_expr(index, visit);
                        }
                        walk_expr(value, visit);
                    }
                    StmtKind::Expr(e) => walk_expr(e, visit),
                    StmtKind::For { range, body, .. } => {
                        if let Some(start) = &range.start {
                            walk_expr(start, visit);
                        }
                        walk_expr(&range.stop, visit);
                        if let Some(step) = &range.step {
                            walk_expr(step, visit);
                        }
                        walk_stmts(body, visit);
                    }
                    StmtKind::Pass | StmtKind::Import(_) => {}
                }
            }
        }
        walk_stmts(&self.statements, visit);
    }

    /// Number of API call sites per API, in the whole tree.
    pub fn count_calls(&self, api: Api) -> usize {
        let mut n = 0;
        self.walk_exprs(&mut |e| {
            if let ExprKind::Call { api: a, .. } = &e.kind {
                if *a == api {
                    n += 1;
                }
            }
        });
        n
    }
}
