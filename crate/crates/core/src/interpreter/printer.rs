//! Render a [`Program`] back to DSL source.

use super::ast::*;
use super::parser::API_RECEIVER;
use super::render::format_number;

pub fn to_source(program: &Program) -> String {
    let mut out = String::new();
    write_block(&program.statements, 0, &mut out);
    out
}

fn write_block(stmts: &[Stmt], indent: usize, out: &mut String) {
    for stmt in stmts {
        out.push_str(&"    ".repeat(indent));
        match &stmt.kind {
            StmtKind::Pass => out.push_str("pass"),
            StmtKind::Import(text) => out.push_str(text),
            StmtKind::Expr(e) => out.push_str(&expr_source(e)),
            StmtKind::Assign { target, value } => {
                out.push_str(&target_source(target));
                out.push_str(" = ");
                out.push_str(&expr_source(value));
            }
            StmtKind::AugAssign { target, op, value } => {
                out.push_str(&format!("{} {}= {}", target_source(target), op.symbol(), expr_source(value)));
            }
            StmtKind::For { var, range, body } => {
                let mut args = Vec::new();
                if let Some(start) = &range.start {
                    args.push(expr_source(start));
                }
                args.push(expr_source(&range.stop));
                if let Some(step) = &range.step {
                    args.push(expr_source(step));
                }
                out.push_str(&format!("for {var} in range({}):\n", args.join(", ")));
                if body.is_empty() {
                    out.push_str(&"    ".repeat(indent + 1));
                    out.push_str("pass\n");
                } else {
                    write_block(body, indent + 1, out);
                }
                continue;
            }
        }
        out.push('\n');
    }
}

fn target_source(t: &Target) -> String {
    match t {
        Target::Name(n) => n.clone(),
        Target::Tuple(names) => names.join(", "),
        Target::Index { name, index } => format!("{name}[{}]", expr_source(index)),
    }
}

pub fn expr_source(e: &Expr) -> String {
    prec_source(e, 0)
}

fn expr_precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { .. } => 3,
        ExprKind::Number(n) if *n < 0.0 => 3,
        _ => 5,
    }
}

fn prec_source(e: &Expr, min: u8) -> String {
    let text = match &e.kind {
        ExprKind::Number(n) => format_number(*n),
        ExprKind::Name(n) => n.clone(),
        ExprKind::List(items) => format!("[{}]", items.iter().map(expr_source).collect::<Vec<_>>().join(", ")),
        ExprKind::Index { base, index } => format!("{}[{}]", prec_source(base, 5), expr_source(index)),
        ExprKind::Unary { op, operand } => {
            let sym = match op {
                UnaryOp::Neg => "-",
                UnaryOp::Pos => "+",
            };
            format!("{sym}{}", prec_source(operand, 3))
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            // `**` is right associative, the rest left associative
            let (lp, rp) = if *op == BinOp::Pow { (p + 1, p) } else { (p, p + 1) };
            format!("{} {} {}", prec_source(lhs, lp), op.symbol(), prec_source(rhs, rp))
        }
        ExprKind::Call { api, qualified, args } => {
            let args = args.iter().map(expr_source).collect::<Vec<_>>().join(", ");
            if *qualified {
                format!("{API_RECEIVER}.{}({args})", api.name())
            } else {
                format!("{}({args})", api.name())
            }
        }
    };
    if expr_precedence(e) < min {
        format!("({text})")
    } else {
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpreter::parse;

    #[test]
    fn precedence_is_preserved() {
        for src in ["x = (1 + 2) * 3\n", "x = 1 - (2 - 3)\n", "x = -(1 + 2) ** 2\n", "x = 2 ** 3 ** 2\n"] {
            let printed = to_source(&parse(src).unwrap());
            assert_eq!(printed, src);
        }
    }

    #[test]
    fn loops_and_imports_print_back() {
        let src = "import math\naw.takeoff()\nfor i in range(0, 4):\n    p = aw.get_drone_position()\n    aw.fly_to([p[0] + 5, p[1], p[2]])\n";
        assert_eq!(to_source(&parse(src).unwrap()), src);
    }
}
