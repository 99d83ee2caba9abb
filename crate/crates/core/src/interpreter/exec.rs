//! Static execution of a parsed program into a trajectory trace.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::state::{wrap_degrees, DroneState, Transition};

/// Hard bounds that keep static execution total on adversarial input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionLimits {
    pub max_actions: usize,
    pub max_loop_iterations: usize,
}

impl Default for ExecutionLimits {
    fn default() -> Self {
        Self { max_actions: 10_000, max_loop_iterations: 1_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultMode {
    /// Record the fault, skip the offending statement, keep going.
    #[default]
    Lenient,
    /// Stop at the first fault.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecConfig {
    pub limits: ExecutionLimits,
    /// Climb applied by `takeoff()`, meters.
    pub takeoff_altitude: f64,
    pub fault_mode: FaultMode,
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self {
            limits: ExecutionLimits::default(),
            takeoff_altitude: 2.5,
            fault_mode: FaultMode::Lenient,
        }
    }
}

impl ExecConfig {
    pub fn with_takeoff_altitude(mut self, h: f64) -> Self {
        self.takeoff_altitude = h;
        self
    }

    pub fn strict(mut self) -> Self {
        self.fault_mode = FaultMode::Strict;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ActionKind {
    Takeoff,
    Land,
    FlyTo { target: [f64; 3] },
    SetYaw { target: f64 },
}

/// One executed state-changing API call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    #[serde(flatten)]
    pub kind: ActionKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultKind {
    FlyBeforeTakeoff,
    DoubleTakeoff,
    LandWhileGrounded,
    UndefinedVariable,
    ArityError,
    NonNumericArgument,
    UnsupportedConstruct,
    LoopBudgetExceeded,
}

impl FaultKind {
    pub fn is_order_violation(self) -> bool {
        matches!(self, FaultKind::FlyBeforeTakeoff | FaultKind::DoubleTakeoff | FaultKind::LandWhileGrounded)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub kind: FaultKind,
    pub span: Span,
    pub message: String,
    /// Number of actions already executed when the fault occurred.
    pub action_index: usize,
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.span, self.kind, self.message)
    }
}

/// Everything a static run produced: actions, the pose after each, deltas, faults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub actions: Vec<Action>,
    pub states: Vec<DroneState>,
    pub transitions: Vec<Transition>,
    pub faults: Vec<Fault>,
}

impl ExecutionTrace {
    pub fn empty(initial: DroneState) -> Self {
        Self { actions: Vec::new(), states: vec![initial], transitions: Vec::new(), faults: Vec::new() }
    }

    pub fn initial(&self) -> &DroneState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &DroneState {
        self.states.last().expect("trace always holds the initial state")
    }

    pub fn is_order_violating(&self) -> bool {
        self.faults.iter().any(|f| f.kind.is_order_violation())
    }

    /// Actions executed before the first order violation (all of them if none).
    pub fn actions_before_order_violation(&self) -> usize {
        self.faults
            .iter()
            .find(|f| f.kind.is_order_violation())
            .map_or(self.actions.len(), |f| f.action_index)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialization is infallible")
    }
}

/// The delta list of a trace, one per state-changing action.
pub fn transitions_of(trace: &ExecutionTrace) -> Vec<Transition> {
    trace.transitions.clone()
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    List(Vec<Value>),
    None,
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Num(_) => "number",
            Value::List(_) => "list",
            Value::None => "None",
        }
    }
}

enum Halt {
    /// The current statement failed; lenient mode moves on.
    Fault(Fault),
    /// Execution must stop regardless of mode.
    Stop,
}

struct Machine<'c> {
    config: &'c ExecConfig,
    env: HashMap<String, Value>,
    state: DroneState,
    trace: ExecutionTrace,
}

/// Run a program statically from `initial`.
pub fn execute(program: &Program, initial: DroneState, config: &ExecConfig) -> ExecutionTrace {
    let initial = DroneState { yaw: wrap_degrees(initial.yaw), ..initial };
    let mut machine = Machine {
        config,
        env: HashMap::new(),
        state: initial,
        trace: ExecutionTrace::empty(initial),
    };
    let _ = machine.run_block(&program.statements);
    machine.trace
}

impl Machine<'_> {
    fn fault(&self, kind: FaultKind, span: Span, message: impl Into<String>) -> Halt {
        Halt::Fault(Fault { kind, span, message: message.into(), action_index: self.trace.actions.len() })
    }

    fn run_block(&mut self, stmts: &[Stmt]) -> Result<(), ()> {
        for stmt in stmts {
            match self.run_stmt(stmt) {
                Ok(()) => {}
                Err(Halt::Stop) => return Err(()),
                Err(Halt::Fault(fault)) => {
                    self.trace.faults.push(fault);
                    if self.config.fault_mode == FaultMode::Strict {
                        return Err(());
                    }
                }
            }
        }
        Ok(())
    }

    fn run_stmt(&mut self, stmt: &Stmt) -> Result<(), Halt> {
        match &stmt.kind {
            StmtKind::Pass | StmtKind::Import(_) => Ok(()),
            StmtKind::Expr(e) => self.eval(e).map(|_| ()),
            StmtKind::Assign { target, value } => {
                let v = self.eval(value)?;
                self.assign(target, v, stmt.span)
            }
            StmtKind::AugAssign { target, op, value } => {
                let current = match target {
                    Target::Name(n) => self.lookup(n, stmt.span)?,
                    Target::Index { name, index } => {
                        let base = self.lookup(name, stmt.span)?;
                        let idx = self.eval(index)?;
                        self.index(&base, &idx, index.span)?
                    }
                    Target::Tuple(_) => {
                        return Err(self.fault(FaultKind::UnsupportedConstruct, stmt.span, "augmented tuple assignment"))
                    }
                };
                let rhs = self.eval(value)?;
                let v = self.arith(*op, &current, &rhs, stmt.span)?;
                self.assign(target, v, stmt.span)
            }
            StmtKind::For { var, range, body } => self.run_loop(var, range, body, stmt.span),
        }
    }

    fn run_loop(&mut self, var: &str, range: &RangeSpec, body: &[Stmt], span: Span) -> Result<(), Halt> {
        let start = match &range.start {
            Some(e) => self.eval_int(e)?,
            None => 0,
        };
        let stop = self.eval_int(&range.stop)?;
        let step = match &range.step {
            Some(e) => self.eval_int(e)?,
            None => 1,
        };
        if step == 0 {
            return Err(self.fault(FaultKind::NonNumericArgument, span, "range() step must not be zero"));
        }
        let count = if step > 0 {
            if stop > start { (stop - start + step - 1) / step } else { 0 }
        } else if start > stop {
            (start - stop + (-step) - 1) / (-step)
        } else {
            0
        };
        if count as u128 > self.config.limits.max_loop_iterations as u128 {
            return Err(self.fault(
                FaultKind::LoopBudgetExceeded,
                span,
                format!("loop runs {count} iterations, limit is {}", self.config.limits.max_loop_iterations),
            ));
        }
        let mut i = start;
        for _ in 0..count {
            self.env.insert(var.to_string(), Value::Num(i as f64));
            self.run_block(body).map_err(|()| Halt::Stop)?;
            i += step;
        }
        Ok(())
    }

    fn eval_int(&mut self, e: &Expr) -> Result<i64, Halt> {
        let v = self.eval(e)?;
        match v {
            Value::Num(n) if n.fract() == 0.0 && n.abs() < 1e15 => Ok(n as i64),
            other => Err(self.fault(
                FaultKind::NonNumericArgument,
                e.span,
                format!("range() bound must be an integer, got {}", describe(&other)),
            )),
        }
    }

    fn lookup(&self, name: &str, span: Span) -> Result<Value, Halt> {
        self.env
            .get(name)
            .cloned()
            .ok_or_else(|| self.fault(FaultKind::UndefinedVariable, span, format!("name `{name}` is not defined")))
    }

    fn assign(&mut self, target: &Target, value: Value, span: Span) -> Result<(), Halt> {
        match target {
            Target::Name(n) => {
                self.env.insert(n.clone(), value);
                Ok(())
            }
            Target::Tuple(names) => match value {
                Value::List(items) if items.len() == names.len() => {
                    for (n, v) in names.iter().zip(items) {
                        self.env.insert(n.clone(), v);
                    }
                    Ok(())
                }
                other => Err(self.fault(
                    FaultKind::ArityError,
                    span,
                    format!("cannot unpack {} into {} names", describe(&other), names.len()),
                )),
            },
            Target::Index { name, index } => {
                let idx_value = self.eval(index)?;
                let mut base = self.lookup(name, span)?;
                let slot = {
                    let Value::List(items) = &base else {
                        return Err(self.fault(
                            FaultKind::NonNumericArgument,
                            span,
                            format!("`{name}` is a {}, not a list", base.type_name()),
                        ));
                    };
                    self.resolve_index(items.len(), &idx_value, index.span)?
                };
                if let Value::List(items) = &mut base {
                    items[slot] = value;
                }
                self.env.insert(name.clone(), base);
                Ok(())
            }
        }
    }

    fn resolve_index(&self, len: usize, idx: &Value, span: Span) -> Result<usize, Halt> {
        let Value::Num(n) = idx else {
            return Err(self.fault(FaultKind::NonNumericArgument, span, format!("list index must be a number, got {}", idx.type_name())));
        };
        if n.fract() != 0.0 {
            return Err(self.fault(FaultKind::NonNumericArgument, span, format!("list index must be an integer, got {n}")));
        }
        let i = *n as i64;
        let resolved = if i < 0 { i + len as i64 } else { i };
        if resolved < 0 || resolved >= len as i64 {
            return Err(self.fault(FaultKind::ArityError, span, format!("index {i} out of range for a list of length {len}")));
        }
        Ok(resolved as usize)
    }

    fn index(&self, base: &Value, idx: &Value, span: Span) -> Result<Value, Halt> {
        match base {
            Value::List(items) => {
                let i = self.resolve_index(items.len(), idx, span)?;
                Ok(items[i].clone())
            }
            other => Err(self.fault(FaultKind::NonNumericArgument, span, format!("cannot index a {}", other.type_name()))),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, Halt> {
        match &e.kind {
            ExprKind::Number(n) => Ok(Value::Num(*n)),
            ExprKind::Name(n) => self.lookup(n, e.span),
            ExprKind::List(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.eval(item)?);
                }
                Ok(Value::List(out))
            }
            ExprKind::Index { base, index } => {
                let b = self.eval(base)?;
                let i = self.eval(index)?;
                self.index(&b, &i, index.span)
            }
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand)?;
                match (op, v) {
                    (UnaryOp::Neg, Value::Num(n)) => Ok(Value::Num(-n)),
                    (UnaryOp::Pos, Value::Num(n)) => Ok(Value::Num(n)),
                    (_, other) => Err(self.fault(
                        FaultKind::NonNumericArgument,
                        e.span,
                        format!("unary operator applied to {}", other.type_name()),
                    )),
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let a = self.eval(lhs)?;
                let b = self.eval(rhs)?;
                self.arith(*op, &a, &b, e.span)
            }
            ExprKind::Call { api, args, .. } => self.call(*api, args, e.span),
        }
    }

    fn arith(&self, op: BinOp, a: &Value, b: &Value, span: Span) -> Result<Value, Halt> {
        let (Value::Num(x), Value::Num(y)) = (a, b) else {
            return Err(self.fault(
                FaultKind::NonNumericArgument,
                span,
                format!("operator `{}` applied to {} and {}", op.symbol(), a.type_name(), b.type_name()),
            ));
        };
        let (x, y) = (*x, *y);
        let r = match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            BinOp::Div => x / y,
            BinOp::FloorDiv => (x / y).floor(),
            BinOp::Mod => x - y * (x / y).floor(),
            BinOp::Pow => x.powf(y),
        };
        if !r.is_finite() {
            return Err(self.fault(
                FaultKind::NonNumericArgument,
                span,
                format!("`{x} {} {y}` does not produce a finite number", op.symbol()),
            ));
        }
        Ok(Value::Num(if r == 0.0 { 0.0 } else { r }))
    }

    fn call(&mut self, api: Api, args: &[Expr], span: Span) -> Result<Value, Halt> {
        if args.len() != api.arity() {
            return Err(self.fault(
                FaultKind::ArityError,
                span,
                format!("{} expects {} argument(s), got {}", api.name(), api.arity(), args.len()),
            ));
        }
        match api {
            Api::GetYaw => Ok(Value::Num(self.state.yaw)),
            Api::GetDronePosition => Ok(Value::List(self.state.position().map(Value::Num).to_vec())),
            Api::Takeoff => {
                if self.state.airborne {
                    return Err(self.fault(FaultKind::DoubleTakeoff, span, "takeoff() called while already airborne"));
                }
                let mut next = self.state;
                next.z -= self.config.takeoff_altitude;
                next.airborne = true;
                self.commit(ActionKind::Takeoff, next, span)
            }
            Api::Land => {
                if !self.state.airborne {
                    return Err(self.fault(FaultKind::LandWhileGrounded, span, "land() called while on the ground"));
                }
                let mut next = self.state;
                next.z = 0.0;
                next.airborne = false;
                self.commit(ActionKind::Land, next, span)
            }
            Api::FlyTo => {
                let arg = self.eval(&args[0])?;
                let target = self.coordinates(arg, args[0].span)?;
                if !self.state.airborne {
                    return Err(self.fault(FaultKind::FlyBeforeTakeoff, span, "fly_to() called before takeoff()"));
                }
                let next = DroneState { x: target[0], y: target[1], z: target[2], ..self.state };
                self.commit(ActionKind::FlyTo { target }, next, span)
            }
            Api::SetYaw => {
                let arg = self.eval(&args[0])?;
                let Value::Num(target) = arg else {
                    return Err(self.fault(
                        FaultKind::NonNumericArgument,
                        args[0].span,
                        format!("set_yaw() expects a number, got {}", describe(&arg)),
                    ));
                };
                let next = DroneState { yaw: wrap_degrees(target), ..self.state };
                self.commit(ActionKind::SetYaw { target }, next, span)
            }
        }
    }

    fn coordinates(&self, arg: Value, span: Span) -> Result<[f64; 3], Halt> {
        match arg {
            Value::List(items) if items.len() == 3 => {
                let mut out = [0.0; 3];
                for (slot, item) in out.iter_mut().zip(&items) {
                    match item {
                        Value::Num(n) => *slot = *n,
                        other => {
                            return Err(self.fault(
                                FaultKind::NonNumericArgument,
                                span,
                                format!("fly_to() coordinates must be numbers, got {}", other.type_name()),
                            ))
                        }
                    }
                }
                Ok(out)
            }
            Value::List(items) => Err(self.fault(
                FaultKind::ArityError,
                span,
                format!("fly_to() expects a 3-element list, got {} elements", items.len()),
            )),
            other => Err(self.fault(
                FaultKind::NonNumericArgument,
                span,
                format!("fly_to() expects a list of 3 numbers, got {}", describe(&other)),
            )),
        }
    }

    fn commit(&mut self, kind: ActionKind, next: DroneState, span: Span) -> Result<Value, Halt> {
        if self.trace.actions.len() >= self.config.limits.max_actions {
            let fault = Fault {
                kind: FaultKind::LoopBudgetExceeded,
                span,
                message: format!("action budget of {} exhausted", self.config.limits.max_actions),
                action_index: self.trace.actions.len(),
            };
            self.trace.faults.push(fault);
            return Err(Halt::Stop);
        }
        let transition = Transition::between(&self.state, &next);
        self.trace.actions.push(Action { kind, span });
        self.trace.transitions.push(transition);
        self.trace.states.push(next);
        self.state = next;
        Ok(Value::None)
    }
}

fn describe(v: &Value) -> String {
    match v {
        Value::Num(n) => format!("number {n}"),
        other => other.type_name().to_string(),
    }
}
