//! Deterministic text renderings of an execution trace.
//!
//! The semantic narration uses a fixed clause grammar so it can be parsed back
//! into deltas with [`parse_narration`].

use std::sync::LazyLock;

use regex::Regex;

use super::exec::{ActionKind, ExecutionTrace};
use super::state::{DroneState, Transition};

pub const NO_ACTIONS: &str = "The drone performs no actions.";

/// Shortest text that parses back to exactly `v`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn meters(v: f64) -> String {
    let unit = if v == 1.0 { "meter" } else { "meters" };
    format!("{} {unit}", format_number(v))
}

/// Compass name for an exact multiple of 45 degrees.
pub fn heading_name(yaw: f64) -> Option<&'static str> {
    const NAMES: [(f64, &str); 8] = [
        (0.0, "north"),
        (45.0, "northeast"),
        (90.0, "east"),
        (135.0, "southeast"),
        (180.0, "south"),
        (-135.0, "southwest"),
        (-90.0, "west"),
        (-45.0, "northwest"),
    ];
    NAMES.iter().find(|(deg, _)| *deg == yaw).map(|(_, name)| *name)
}

fn facing(yaw: f64) -> String {
    match heading_name(yaw) {
        Some(name) => format!("facing {name}"),
        None => format!("at a heading of {} degrees", format_number(yaw)),
    }
}

fn displacement_parts(t: &Transition) -> Vec<String> {
    let mut parts = Vec::new();
    let axes = [(t.dx, "north", "south"), (t.dy, "east", "west"), (-t.dz, "up", "down")];
    for (v, pos, neg) in axes {
        if v != 0.0 {
            parts.push(format!("{} {}", meters(v.abs()), if v > 0.0 { pos } else { neg }));
        }
    }
    parts
}

fn join_parts(parts: &[String]) -> String {
    match parts {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn clause(kind: &ActionKind, t: &Transition, after: &DroneState) -> String {
    match kind {
        ActionKind::Takeoff => format!("takes off and climbs {}", meters(-t.dz)),
        ActionKind::Land => {
            if t.dz == 0.0 {
                "lands in place".into()
            } else if t.dz > 0.0 {
                format!("lands, descending {}", meters(t.dz))
            } else {
                format!("lands, rising {} back to ground level", meters(-t.dz))
            }
        }
        ActionKind::FlyTo { .. } => {
            let parts = displacement_parts(t);
            if parts.is_empty() {
                "holds its position".into()
            } else {
                format!("flies {}", join_parts(&parts))
            }
        }
        ActionKind::SetYaw { .. } => {
            if t.dtheta == 0.0 {
                format!("keeps its heading ({})", facing(after.yaw))
            } else {
                let dir = if t.dtheta > 0.0 { "clockwise" } else { "counterclockwise" };
                format!("rotates {} degrees {dir} (now {})", format_number(t.dtheta.abs()), facing(after.yaw))
            }
        }
    }
}

/// English narration: one clause per action, ordinal connectors between them.
pub fn render_semantic(trace: &ExecutionTrace) -> String {
    let clauses: Vec<String> = trace
        .actions
        .iter()
        .zip(&trace.transitions)
        .zip(trace.states.iter().skip(1))
        .map(|((a, t), s)| clause(&a.kind, t, s))
        .collect();
    match clauses.len() {
        0 => NO_ACTIONS.to_string(),
        1 => format!("The drone {}.", clauses[0]),
        _ => clauses
            .iter()
            .enumerate()
            .map(|(i, c)| match i {
                0 => format!("First, the drone {c}."),
                1 => format!("Next, it {c}."),
                _ => format!("Then it {c}."),
            })
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn fixed2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Absolute `(x, y, z, yaw)` states, one per line, two decimals.
pub fn render_numerical(trace: &ExecutionTrace) -> String {
    trace
        .states
        .iter()
        .map(|s| format!("({}, {}, {}, {})", fixed2(s.x), fixed2(s.y), fixed2(s.z), fixed2(s.yaw)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Fault listing appended to oracle observations; empty when the run was clean.
pub fn render_faults(trace: &ExecutionTrace) -> String {
    if trace.faults.is_empty() {
        return String::new();
    }
    let mut out = String::from("Execution faults:");
    for f in &trace.faults {
        out.push_str(&format!("\n- {}: {:?}: {}", f.span, f.kind, f.message));
    }
    out
}

static SENTENCE_END: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\.(?:\s+|$)").unwrap());
static NUM: &str = r"(\d+(?:\.\d+)?(?:e[-+]?\d+)?)";
static TAKEOFF: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^takes off and climbs {NUM} meters?$")).unwrap());
static LAND: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^lands, descending {NUM} meters?$")).unwrap());
static LAND_UP: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^lands, rising {NUM} meters? back to ground level$")).unwrap());
static ROTATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"^rotates {NUM} degrees (clockwise|counterclockwise) \(now .+\)$")).unwrap()
});
static DISPLACEMENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^{NUM} meters? (north|south|east|west|up|down)$")).unwrap());

/// Inverse of [`render_semantic`]: recover the deltas from a narration.
///
/// Returns `None` when any sentence falls outside the renderer grammar.
pub fn parse_narration(text: &str) -> Option<Vec<Transition>> {
    let text = text.trim();
    if text == NO_ACTIONS {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    for sentence in SENTENCE_END.split(text).filter(|s| !s.trim().is_empty()) {
        let sentence = sentence.trim();
        let body = ["The drone ", "First, the drone ", "Next, it ", "Then it "]
            .iter()
            .find_map(|prefix| sentence.strip_prefix(prefix))?;
        out.push(parse_clause(body)?);
    }
    Some(out)
}

fn parse_clause(body: &str) -> Option<Transition> {
    let num = |s: &str| s.parse::<f64>().ok();
    if let Some(c) = TAKEOFF.captures(body) {
        return Some(Transition::new(0.0, 0.0, -num(&c[1])?, 0.0));
    }
    if body == "lands in place" || body == "holds its position" || body.starts_with("keeps its heading (") {
        return Some(Transition::default());
    }
    if let Some(c) = LAND.captures(body) {
        return Some(Transition::new(0.0, 0.0, num(&c[1])?, 0.0));
    }
    if let Some(c) = LAND_UP.captures(body) {
        return Some(Transition::new(0.0, 0.0, -num(&c[1])?, 0.0));
    }
    if let Some(c) = ROTATE.captures(body) {
        let d = num(&c[1])?;
        return Some(Transition::new(0.0, 0.0, 0.0, if &c[2] == "clockwise" { d } else { -d }));
    }
    let rest = body.strip_prefix("flies ")?;
    let mut t = Transition::default();
    let pieces: Vec<&str> = match rest.rsplit_once(" and ") {
        Some((head, last)) => head.split(", ").chain(std::iter::once(last)).collect(),
        None => vec![rest],
    };
    for piece in pieces {
        let c = DISPLACEMENT.captures(piece)?;
        let v = num(&c[1])?;
        match &c[2] {
            "north" => t.dx = v,
            "south" => t.dx = -v,
            "east" => t.dy = v,
            "west" => t.dy = -v,
            "up" => t.dz = -v,
            _ => t.dz = v,
        }
    }
    Some(t)
}
