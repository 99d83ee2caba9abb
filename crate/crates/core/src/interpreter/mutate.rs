//! Single-fault injection: derive an incorrect program from a correct one.
//!
//! Mutation sites are the `fly_to` and `set_yaw` call sites in source order.
//! Candidates are ordered operator-rank first, then site, so consecutive seeds
//! hit different sites before they reuse one.

use super::ast::*;
use super::error::MutateError;
use super::exec::{execute, ExecConfig};
use super::state::{transitions_match, DroneState, Tolerance};

/// Offset added to a `fly_to` coordinate, meters.
pub const POSITION_OFFSET: f64 = 2.0;
/// Offset added to a `set_yaw` target, degrees.
pub const YAW_OFFSET: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Add [`POSITION_OFFSET`] to one coordinate (0 = x, 1 = y, 2 = z).
    Perturb { axis: usize },
    /// Negate the relative offset of one coordinate (`p[0] + 5` becomes `p[0] - 5`).
    FlipSign { axis: usize },
    /// Shift a yaw target by +-[`YAW_OFFSET`].
    Rotate { clockwise: bool },
}

const FLY_TO_OPS: [Mutation; 6] = [
    Mutation::Perturb { axis: 2 },
    Mutation::Perturb { axis: 0 },
    Mutation::Perturb { axis: 1 },
    Mutation::FlipSign { axis: 0 },
    Mutation::FlipSign { axis: 1 },
    Mutation::FlipSign { axis: 2 },
];
const SET_YAW_OPS: [Mutation; 2] = [Mutation::Rotate { clockwise: true }, Mutation::Rotate { clockwise: false }];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MutationSite {
    /// Index among mutable call sites, in source order.
    pub site: usize,
    pub api: Api,
    pub span: Span,
}

/// Mutable call sites of a program in source order.
pub fn mutation_sites(program: &Program) -> Vec<MutationSite> {
    let mut sites = Vec::new();
    program.walk_exprs(&mut |e| {
        if let ExprKind::Call { api: api @ (Api::FlyTo | Api::SetYaw), .. } = &e.kind {
            sites.push(MutationSite { site: sites.len(), api: *api, span: e.span });
        }
    });
    sites
}

fn candidates(sites: &[MutationSite]) -> Vec<(usize, Mutation)> {
    let mut out = Vec::new();
    for rank in 0..FLY_TO_OPS.len() {
        for s in sites {
            let ops: &[Mutation] = if s.api == Api::FlyTo { &FLY_TO_OPS } else { &SET_YAW_OPS };
            if let Some(op) = ops.get(rank) {
                out.push((s.site, *op));
            }
        }
    }
    out
}

/// Inject one error action chosen by `seed`, checked against a grounded start
/// with the default execution config.
pub fn mutate(program: &Program, seed: u64) -> Result<Program, MutateError> {
    mutate_with(program, seed, DroneState::grounded(), &ExecConfig::default())
}

/// Like [`mutate`], verifying the trajectory change from `initial` under `config`.
///
/// Starting at candidate `seed % n`, candidates are tried cyclically until one
/// changes the executed transition list.
pub fn mutate_with(
    program: &Program,
    seed: u64,
    initial: DroneState,
    config: &ExecConfig,
) -> Result<Program, MutateError> {
    mutate_detailed(program, seed, initial, config).map(|(p, _, _)| p)
}

/// Mutated program plus the site and operator that were applied.
pub fn mutate_detailed(
    program: &Program,
    seed: u64,
    initial: DroneState,
    config: &ExecConfig,
) -> Result<(Program, MutationSite, Mutation), MutateError> {
    let sites = mutation_sites(program);
    if sites.is_empty() {
        return Err(MutateError::NoMutableSites);
    }
    let cands = candidates(&sites);
    let original = execute(program, initial, config).transitions;
    let start = (seed % cands.len() as u64) as usize;
    for offset in 0..cands.len() {
        let (site, op) = cands[(start + offset) % cands.len()];
        let mutated = apply(program, site, op);
        let changed = execute(&mutated, initial, config).transitions;
        if !transitions_match(&original, &changed, &Tolerance::EXACT) {
            return Ok((mutated, sites[site], op));
        }
    }
    Err(MutateError::NoEffectiveMutation)
}

/// Apply `op` at mutable site `site`; a no-op if the site does not exist.
pub fn apply(program: &Program, site: usize, op: Mutation) -> Program {
    let mut out = program.clone();
    let mut counter = 0usize;
    for stmt in &mut out.statements {
        if visit_stmt(stmt, site, op, &mut counter) {
            break;
        }
    }
    out
}

fn visit_stmt(stmt: &mut Stmt, site: usize, op: Mutation, counter: &mut usize) -> bool {
    match &mut stmt.kind {
        StmtKind::Assign { target, value } | StmtKind::AugAssign { target, value, .. } => {
            if let Target::Index { index, .. } = target {
                if visit_expr(index, site, op, counter) {
                    return true;
                }
            }
            visit_expr(value, site, op, counter)
        }
        StmtKind::Expr(e) => visit_expr(e, site, op, counter),
        StmtKind::For { range, body, .. } => {
            let header = range.start.iter_mut().chain(std::iter::once(&mut range.stop)).chain(range.step.iter_mut());
            for e in header {
                if visit_expr(e, site, op, counter) {
                    return true;
                }
            }
            body.iter_mut().any(|s| visit_stmt(s, site, op, counter))
        }
        StmtKind::Pass | StmtKind::Import(_) => false,
    }
}

/// Pre-order walk matching `Program::walk_exprs`, so site numbering agrees.
fn visit_expr(e: &mut Expr, site: usize, op: Mutation, counter: &mut usize) -> bool {
    if let ExprKind::Call { api: Api::FlyTo | Api::SetYaw, .. } = &e.kind {
        if *counter == site {
            rewrite_call(e, op);
            return true;
        }
        *counter += 1;
    }
    match &mut e.kind {
        ExprKind::Number(_) | ExprKind::Name(_) => false,
        ExprKind::List(items) => items.iter_mut().any(|i| visit_expr(i, site, op, counter)),
        ExprKind::Index { base, index } => visit_expr(base, site, op, counter) || visit_expr(index, site, op, counter),
        ExprKind::Unary { operand, .. } => visit_expr(operand, site, op, counter),
        ExprKind::Binary { lhs, rhs, .. } => visit_expr(lhs, site, op, counter) || visit_expr(rhs, site, op, counter),
        ExprKind::Call { args, .. } => args.iter_mut().any(|a| visit_expr(a, site, op, counter)),
    }
}

fn rewrite_call(call: &mut Expr, op: Mutation) {
    let ExprKind::Call { args, .. } = &mut call.kind else { return };
    let arg = &mut args[0];
    match op {
        Mutation::Rotate { clockwise } => {
            let delta = if clockwise { YAW_OFFSET } else { -YAW_OFFSET };
            *arg = add_constant(arg.clone(), delta);
        }
        Mutation::Perturb { axis } | Mutation::FlipSign { axis } => {
            if !matches!(arg.kind, ExprKind::List(_)) {
                // fly_to(p) -> fly_to([p[0], p[1], p[2]]) so one component can change
                let span = arg.span;
                let base = arg.clone();
                let items = (0..3)
                    .map(|i| {
                        Expr::new(
                            ExprKind::Index { base: Box::new(base.clone()), index: Box::new(Expr::number(i as f64, span)) },
                            span,
                        )
                    })
                    .collect();
                *arg = Expr::new(ExprKind::List(items), span);
            }
            let ExprKind::List(items) = &mut arg.kind else { return };
            let component = &mut items[axis];
            *component = match op {
                Mutation::Perturb { .. } => add_constant(component.clone(), POSITION_OFFSET),
                _ => flip_offset(component.clone()),
            };
        }
    }
}

/// `e + delta`, folded into an existing literal term when there is one.
fn add_constant(e: Expr, delta: f64) -> Expr {
    let span = e.span;
    match e.kind {
        ExprKind::Number(n) => Expr::number(n + delta, span),
        ExprKind::Binary { op: BinOp::Add, lhs, rhs } if matches!(rhs.kind, ExprKind::Number(_)) => {
            let ExprKind::Number(k) = rhs.kind else { unreachable!() };
            fold(*lhs, k + delta, span)
        }
        ExprKind::Binary { op: BinOp::Sub, lhs, rhs } if matches!(rhs.kind, ExprKind::Number(_)) => {
            let ExprKind::Number(k) = rhs.kind else { unreachable!() };
            fold(*lhs, delta - k, span)
        }
        ExprKind::Binary { op: BinOp::Add, lhs, rhs } if matches!(lhs.kind, ExprKind::Number(_)) => {
            let ExprKind::Number(k) = lhs.kind else { unreachable!() };
            Expr::new(
                ExprKind::Binary { op: BinOp::Add, lhs: Box::new(Expr::number(k + delta, span)), rhs },
                span,
            )
        }
        kind => fold(Expr::new(kind, span), delta, span),
    }
}

/// `base + k` written with a non-negative literal.
fn fold(base: Expr, k: f64, span: Span) -> Expr {
    if k == 0.0 {
        base
    } else if k > 0.0 {
        Expr::binary(BinOp::Add, base, Expr::number(k, span))
    } else {
        Expr::binary(BinOp::Sub, base, Expr::number(-k, span))
    }
}

/// `base + k` -> `base - k` (and vice versa); anything else is negated.
fn flip_offset(e: Expr) -> Expr {
    let span = e.span;
    match e.kind {
        ExprKind::Binary { op: op @ (BinOp::Add | BinOp::Sub), lhs, rhs } => {
            let flipped = if op == BinOp::Add { BinOp::Sub } else { BinOp::Add };
            Expr::new(ExprKind::Binary { op: flipped, lhs, rhs }, span)
        }
        ExprKind::Number(n) => Expr::number(-n, span),
        kind => Expr::new(ExprKind::Unary { op: UnaryOp::Neg, operand: Box::new(Expr::new(kind, span)) }, span),
    }
}
