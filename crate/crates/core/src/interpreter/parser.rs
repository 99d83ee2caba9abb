//! Recursive-descent parser for the closed DSL subset.

use super::ast::*;
use super::error::ParseError;
use super::lexer::{tokenize, Token, TokenKind};

/// Modules that may be imported by a program preamble.
const PREAMBLE_MODULES: [&str; 2] = ["math", "time"];
/// The robot handle name every API call is qualified with.
pub const API_RECEIVER: &str = "aw";

const UNSUPPORTED_KEYWORDS: [&str; 21] = [
    "if", "elif", "else", "while", "def", "class", "return", "with", "try", "except", "finally",
    "lambda", "async", "await", "global", "nonlocal", "del", "assert", "raise", "yield", "break",
];

/// Parse DSL source text into a [`Program`].
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let statements = parser.block_until_eof()?;
    Ok(Program { statements })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)].kind
    }

    fn advance(&mut self) -> Token {
        let tok = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn check(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.check(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, ParseError> {
        if self.check(&kind) {
            Ok(self.advance())
        } else {
            Err(self.error_expected([kind.to_string()]))
        }
    }

    fn error_expected<I, S>(&self, expected: I) -> ParseError
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tok = self.peek();
        match &tok.kind {
            TokenKind::Str => ParseError::unsupported(tok.span, "string literal"),
            TokenKind::Other(op) => ParseError::unsupported(tok.span, format!("operator `{op}`")),
            TokenKind::LBrace => ParseError::unsupported(tok.span, "dict or set literal"),
            other => ParseError::syntax(tok.span, expected, other.to_string()),
        }
    }

    fn expect_name(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().kind.clone() {
            TokenKind::Name(n) => {
                let span = self.advance().span;
                Ok((n, span))
            }
            _ => Err(self.error_expected(["identifier"])),
        }
    }

    fn block_until_eof(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut stmts = Vec::new();
        while !self.check(&TokenKind::Eof) {
            if self.check(&TokenKind::Indent) {
                return Err(ParseError::syntax(self.peek().span, ["statement"], "unexpected indent"));
            }
            self.statement(&mut stmts)?;
        }
        Ok(stmts)
    }

    fn statement(&mut self, out: &mut Vec<Stmt>) -> Result<(), ParseError> {
        let tok = self.peek().clone();
        if let TokenKind::Name(word) = &tok.kind {
            match word.as_str() {
                "for" => {
                    out.push(self.for_loop()?);
                    return Ok(());
                }
                "if" | "elif" | "else" | "while" => {
                    return Err(ParseError::unsupported(tok.span, format!("`{word}` statement (conditionals and open loops are outside the subset)")));
                }
                "def" | "class" | "lambda" => {
                    return Err(ParseError::unsupported(tok.span, format!("`{word}` definition")));
                }
                w if UNSUPPORTED_KEYWORDS.contains(&w) || w == "continue" => {
                    return Err(ParseError::unsupported(tok.span, format!("`{word}` statement")));
                }
                _ => {}
            }
        }
        loop {
            out.push(self.simple_statement()?);
            if self.eat(&TokenKind::Semicolon) {
                if self.check(&TokenKind::Newline) {
                    break;
                }
                continue;
            }
            break;
        }
        if !self.eat(&TokenKind::Newline) && !self.check(&TokenKind::Eof) {
            return Err(self.error_expected(["end of line"]));
        }
        Ok(())
    }

    fn for_loop(&mut self) -> Result<Stmt, ParseError> {
        let span = self.advance().span;
        let (var, _) = self.expect_name()?;
        if self.check(&TokenKind::Comma) {
            return Err(ParseError::unsupported(self.peek().span, "tuple loop target"));
        }
        match self.advance() {
            Token { kind: TokenKind::Name(n), .. } if n == "in" => {}
            other => return Err(ParseError::syntax(other.span, ["`in`"], other.kind.to_string())),
        }
        let iter_tok = self.peek().clone();
        let is_range = matches!(&iter_tok.kind, TokenKind::Name(n) if n == "range")
            && *self.peek_at(1) == TokenKind::LParen;
        if !is_range {
            return Err(ParseError::unsupported(iter_tok.span, "iteration over anything other than range(...)"));
        }
        self.advance();
        self.advance();
        let mut args = Vec::new();
        if !self.check(&TokenKind::RParen) {
            loop {
                args.push(self.expr()?);
                if !self.eat(&TokenKind::Comma) || self.check(&TokenKind::RParen) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        let range = match args.len() {
            1 => RangeSpec { start: None, stop: args.remove(0), step: None },
            2 => {
                let stop = args.remove(1);
                RangeSpec { start: Some(args.remove(0)), stop, step: None }
            }
            3 => {
                let step = args.remove(2);
                let stop = args.remove(1);
                RangeSpec { start: Some(args.remove(0)), stop, step: Some(step) }
            }
            n => {
                return Err(ParseError::Arity {
                    span: iter_tok.span,
                    api: "range".into(),
                    expected: "1 to 3 arguments".into(),
                    found: format!("{n} arguments"),
                })
            }
        };
        self.expect(TokenKind::Colon)?;
        let mut body = Vec::new();
        if self.eat(&TokenKind::Newline) {
            self.expect(TokenKind::Indent)?;
            while !self.check(&TokenKind::Dedent) && !self.check(&TokenKind::Eof) {
                self.statement(&mut body)?;
            }
            self.eat(&TokenKind::Dedent);
        } else {
            self.statement(&mut body)?;
        }
        Ok(Stmt { kind: StmtKind::For { var, range, body }, span })
    }

    fn simple_statement(&mut self) -> Result<Stmt, ParseError> {
        let tok = self.peek().clone();
        let span = tok.span;
        if let TokenKind::Name(word) = &tok.kind {
            match word.as_str() {
                "pass" => {
                    self.advance();
                    return Ok(Stmt { kind: StmtKind::Pass, span });
                }
                "import" | "from" => return self.import(),
                _ => {}
            }
        }

        let mut exprs = vec![self.expr()?];
        while self.eat(&TokenKind::Comma) {
            if self.check(&TokenKind::Assign) {
                break;
            }
            exprs.push(self.expr()?);
        }

        let aug = match self.peek().kind {
            TokenKind::PlusAssign => Some(BinOp::Add),
            TokenKind::MinusAssign => Some(BinOp::Sub),
            TokenKind::StarAssign => Some(BinOp::Mul),
            TokenKind::SlashAssign => Some(BinOp::Div),
            _ => None,
        };
        if let Some(op) = aug {
            let op_span = self.advance().span;
            if exprs.len() != 1 {
                return Err(ParseError::unsupported(op_span, "augmented assignment to a tuple"));
            }
            let target = Self::to_target(exprs)?;
            let value = self.expr()?;
            return Ok(Stmt { kind: StmtKind::AugAssign { target, op, value }, span });
        }

        if self.check(&TokenKind::Assign) {
            self.advance();
            let target = Self::to_target(exprs)?;
            let value = self.expr()?;
            if self.check(&TokenKind::Assign) {
                return Err(ParseError::unsupported(self.peek().span, "chained assignment"));
            }
            if self.check(&TokenKind::Comma) {
                return Err(ParseError::unsupported(self.peek().span, "tuple expression"));
            }
            return Ok(Stmt { kind: StmtKind::Assign { target, value }, span });
        }

        if exprs.len() > 1 {
            return Err(ParseError::unsupported(span, "tuple expression"));
        }
        Ok(Stmt { kind: StmtKind::Expr(exprs.remove(0)), span })
    }

    fn to_target(mut exprs: Vec<Expr>) -> Result<Target, ParseError> {
        if exprs.len() > 1 {
            let mut names = Vec::with_capacity(exprs.len());
            for e in exprs {
                match e.kind {
                    ExprKind::Name(n) => names.push(n),
                    _ => return Err(ParseError::syntax(e.span, ["name in tuple target"], "expression")),
                }
            }
            return Ok(Target::Tuple(names));
        }
        let e = exprs.remove(0);
        match e.kind {
            ExprKind::Name(n) => Ok(Target::Name(n)),
            ExprKind::Index { base, index } => match base.kind {
                ExprKind::Name(name) => Ok(Target::Index { name, index: *index }),
                _ => Err(ParseError::unsupported(e.span, "nested index assignment")),
            },
            _ => Err(ParseError::syntax(e.span, ["assignable target"], "expression")),
        }
    }

    fn import(&mut self) -> Result<Stmt, ParseError> {
        let tok = self.advance();
        let span = tok.span;
        let is_from = matches!(&tok.kind, TokenKind::Name(n) if n == "from");
        let module = self.dotted_name()?;
        let (text, bound) = if is_from {
            match self.advance() {
                Token { kind: TokenKind::Name(n), .. } if n == "import" => {}
                other => return Err(ParseError::syntax(other.span, ["`import`"], other.kind.to_string())),
            }
            let (item, _) = self.expect_name()?;
            let alias = self.alias()?;
            let bound = alias.clone().unwrap_or_else(|| item.clone());
            let text = match alias {
                Some(a) => format!("from {module} import {item} as {a}"),
                None => format!("from {module} import {item}"),
            };
            (text, bound)
        } else {
            let alias = self.alias()?;
            let bound = alias.clone().unwrap_or_else(|| module.clone());
            let text = match alias {
                Some(a) => format!("import {module} as {a}"),
                None => format!("import {module}"),
            };
            (text, bound)
        };
        let root = module.split('.').next().unwrap_or_default();
        if PREAMBLE_MODULES.contains(&root) || bound == API_RECEIVER {
            Ok(Stmt { kind: StmtKind::Import(text), span })
        } else {
            Err(ParseError::unsupported(span, format!("import of `{module}` beyond the standard preamble")))
        }
    }

    fn dotted_name(&mut self) -> Result<String, ParseError> {
        let (mut name, _) = self.expect_name()?;
        while self.eat(&TokenKind::Dot) {
            let (part, _) = self.expect_name()?;
            name.push('.');
            name.push_str(&part);
        }
        Ok(name)
    }

    fn alias(&mut self) -> Result<Option<String>, ParseError> {
        if matches!(&self.peek().kind, TokenKind::Name(n) if n == "as") {
            self.advance();
            Ok(Some(self.expect_name()?.0))
        } else {
            Ok(None)
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let e = self.additive()?;
        if let TokenKind::Other(op) = &self.peek().kind {
            return Err(ParseError::unsupported(self.peek().span, format!("operator `{op}`")));
        }
        if let TokenKind::Name(w) = &self.peek().kind {
            if matches!(w.as_str(), "if" | "and" | "or" | "not" | "in" | "is" | "for") {
                return Err(ParseError::unsupported(self.peek().span, format!("`{w}` expression")));
            }
        }
        Ok(e)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.multiplicative()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                TokenKind::DoubleSlash => BinOp::FloorDiv,
                TokenKind::Percent => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let op = match self.peek().kind {
            TokenKind::Minus => UnaryOp::Neg,
            TokenKind::Plus => UnaryOp::Pos,
            _ => return self.power(),
        };
        let span = self.advance().span;
        let operand = self.unary()?;
        Ok(Expr::new(ExprKind::Unary { op, operand: Box::new(operand) }, span))
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.postfix()?;
        if self.eat(&TokenKind::DoubleStar) {
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        loop {
            match self.peek().kind {
                TokenKind::LBracket => {
                    self.advance();
                    let index = self.expr()?;
                    if self.check(&TokenKind::Colon) {
                        return Err(ParseError::unsupported(self.peek().span, "slice"));
                    }
                    self.expect(TokenKind::RBracket)?;
                    let span = e.span;
                    e = Expr::new(ExprKind::Index { base: Box::new(e), index: Box::new(index) }, span);
                }
                TokenKind::LParen => {
                    return Err(ParseError::unsupported(self.peek().span, "call of a computed value"));
                }
                TokenKind::Dot => {
                    return Err(ParseError::unsupported(self.peek().span, "attribute access"));
                }
                _ => return Ok(e),
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Number(v) => {
                self.advance();
                Ok(Expr::number(v, tok.span))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr()?;
                if self.check(&TokenKind::Comma) {
                    return Err(ParseError::unsupported(self.peek().span, "tuple literal"));
                }
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::LBracket => {
                self.advance();
                let mut items = Vec::new();
                while !self.check(&TokenKind::RBracket) {
                    items.push(self.expr()?);
                    if matches!(&self.peek().kind, TokenKind::Name(n) if n == "for") {
                        return Err(ParseError::unsupported(self.peek().span, "list comprehension"));
                    }
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
                self.expect(TokenKind::RBracket)?;
                Ok(Expr::new(ExprKind::List(items), tok.span))
            }
            TokenKind::Name(name) => {
                if UNSUPPORTED_KEYWORDS.contains(&name.as_str()) {
                    return Err(ParseError::unsupported(tok.span, format!("`{name}` expression")));
                }
                self.advance();
                if self.check(&TokenKind::Dot) {
                    self.advance();
                    let (attr, attr_span) = self.expect_name()?;
                    if name != API_RECEIVER {
                        return Err(ParseError::unsupported(tok.span, format!("attribute `{name}.{attr}`")));
                    }
                    let Some(api) = Api::from_name(&attr) else {
                        return Err(ParseError::unsupported(attr_span, format!("unknown robot API `{name}.{attr}`")));
                    };
                    if !self.check(&TokenKind::LParen) {
                        return Err(ParseError::unsupported(attr_span, format!("reference to `{name}.{attr}` without calling it")));
                    }
                    return self.call(api, true, tok.span);
                }
                if self.check(&TokenKind::LParen) {
                    return match Api::from_name(&name) {
                        Some(api) => self.call(api, false, tok.span),
                        None => Err(ParseError::unsupported(tok.span, format!("call to `{name}`"))),
                    };
                }
                Ok(Expr::new(ExprKind::Name(name), tok.span))
            }
            _ => Err(self.error_expected(["expression"])),
        }
    }

    fn call(&mut self, api: Api, qualified: bool, span: Span) -> Result<Expr, ParseError> {
        self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        while !self.check(&TokenKind::RParen) {
            if matches!(self.peek().kind, TokenKind::Name(_)) && *self.peek_at(1) == TokenKind::Assign {
                return Err(ParseError::unsupported(self.peek().span, "keyword argument"));
            }
            args.push(self.expr()?);
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::RParen)?;
        let display = if qualified {
            format!("{API_RECEIVER}.{}", api.name())
        } else {
            api.name().to_string()
        };
        if args.len() != api.arity() {
            let expected = match api {
                Api::FlyTo => "one argument (a 3-element list)".to_string(),
                Api::SetYaw => "one argument".to_string(),
                _ => "no arguments".to_string(),
            };
            return Err(ParseError::Arity {
                span,
                api: display,
                expected,
                found: format!("{} argument{}", args.len(), if args.len() == 1 { "" } else { "s" }),
            });
        }
        if api == Api::FlyTo {
            if let ExprKind::List(items) = &args[0].kind {
                if items.len() != 3 {
                    return Err(ParseError::Arity {
                        span,
                        api: display,
                        expected: "a 3-element list".into(),
                        found: format!("a {}-element list", items.len()),
                    });
                }
            }
        }
        Ok(Expr::new(ExprKind::Call { api, qualified, args }, span))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_takeoff() {
        let p = parse("aw.takeoff()").unwrap();
        assert_eq!(p.statements.len(), 1);
        assert_eq!(p.count_calls(Api::Takeoff), 1);
    }

    #[test]
    fn fly_to_with_two_arguments_is_arity_error() {
        let err = parse("aw.fly_to(1, 2)").unwrap_err();
        assert!(matches!(err, ParseError::Arity { .. }), "{err:?}");
        assert_eq!(err.span(), Span::new(1, 1));
    }

    #[test]
    fn fly_to_with_short_list_is_arity_error() {
        assert!(matches!(parse("aw.fly_to([1, 2])"), Err(ParseError::Arity { .. })));
    }

    #[test]
    fn conditionals_are_unsupported_with_span() {
        let err = parse("aw.takeoff()\nif x > 1:\n    aw.land()\n").unwrap_err();
        assert!(matches!(err, ParseError::UnsupportedConstruct { .. }));
        assert_eq!(err.span(), Span::new(2, 1));
    }

    #[test]
    fn function_definitions_are_unsupported() {
        assert!(matches!(
            parse("def fly():\n    aw.takeoff()\n"),
            Err(ParseError::UnsupportedConstruct { .. })
        ));
    }

    #[test]
    fn preamble_imports_are_accepted_others_rejected() {
        assert!(parse("import math\nimport airsim_wrapper as aw\naw.takeoff()\n").is_ok());
        let err = parse("import os\n").unwrap_err();
        assert!(matches!(err, ParseError::UnsupportedConstruct { .. }));
    }

    #[test]
    fn unknown_call_is_unsupported() {
        assert!(matches!(parse("print(1)"), Err(ParseError::UnsupportedConstruct { .. })));
        assert!(matches!(parse("aw.hover()"), Err(ParseError::UnsupportedConstruct { .. })));
    }

    #[test]
    fn syntax_error_reports_expected_tokens() {
        let err = parse("x = (1 + 2\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
        let err = parse("x = 1 +\n").unwrap_err();
        match err {
            ParseError::Syntax { span, expected, .. } => {
                assert_eq!(span.line, 1);
                assert!(expected.iter().any(|e| e == "expression"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn loops_tuple_targets_and_augmented_assignment() {
        let src = "x, y, z = aw.get_drone_position()\nfor i in range(1, 5, 2):\n    z -= 1\n    aw.fly_to([x, y, z])\n";
        let p = parse(src).unwrap();
        assert_eq!(p.statements.len(), 2);
        match &p.statements[1].kind {
            StmtKind::For { body, range, .. } => {
                assert_eq!(body.len(), 2);
                assert!(range.step.is_some());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bare_query_calls_are_accepted() {
        let p = parse("current_yaw = get_yaw()\naw.set_yaw(90 + current_yaw)").unwrap();
        assert_eq!(p.count_calls(Api::GetYaw), 1);
        assert_eq!(p.count_calls(Api::SetYaw), 1);
    }

    #[test]
    fn spans_point_at_expressions() {
        let p = parse("aw.takeoff()\n  \naw.fly_to([1, 2, 3])").unwrap();
        assert_eq!(p.statements[1].span, Span::new(3, 1));
        let mut spans = Vec::new();
        p.walk_exprs(&mut |e| spans.push(e.span));
        assert!(spans.contains(&Span::new(3, 12)));
    }
}
