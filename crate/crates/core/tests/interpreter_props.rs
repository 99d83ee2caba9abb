mod common;

use proptest::prelude::*;

use roboloop::interpreter::{
    execute, mutate, mutate_with, normalize_yaw, parse, parse_narration, render_numerical, render_semantic, run_source,
    to_source, transitions_match, DroneState, ExecConfig, Tolerance, Transition,
};

/// One statement of a generated program.
#[derive(Debug, Clone)]
enum Step {
    Takeoff,
    Land,
    Relative([i32; 3]),
    Absolute([i32; 3]),
    Yaw(i32),
    Turn(i32),
}

impl Step {
    fn source(&self) -> String {
        match self {
            Step::Takeoff => "aw.takeoff()".into(),
            Step::Land => "aw.land()".into(),
            Step::Relative([x, y, z]) => {
                format!("p = aw.get_drone_position()\naw.fly_to([p[0] + {x}, p[1] + {y}, p[2] + {z}])")
            }
            Step::Absolute([x, y, z]) => format!("aw.fly_to([{x}, {y}, {z}])"),
            Step::Yaw(d) => format!("aw.set_yaw({d})"),
            Step::Turn(d) => format!("aw.set_yaw(aw.get_yaw() + {d})"),
        }
    }
}

fn step() -> impl Strategy<Value = Step> {
    let coord = -20i32..=20;
    prop_oneof![
        1 => Just(Step::Takeoff),
        1 => Just(Step::Land),
        4 => [coord.clone(), coord.clone(), coord.clone()].prop_map(Step::Relative),
        2 => [coord.clone(), coord.clone(), -20i32..=0].prop_map(Step::Absolute),
        2 => (-360i32..=360).prop_map(Step::Yaw),
        2 => (-270i32..=270).prop_map(Step::Turn),
    ]
}

fn program() -> impl Strategy<Value = String> {
    prop::collection::vec(step(), 1..16)
        .prop_map(|steps| std::iter::once("aw.takeoff()".to_string()).chain(steps.iter().map(Step::source)).collect::<Vec<_>>().join("\n"))
}

fn close(a: &DroneState, b: &DroneState) -> bool {
    let yaw_gap = (a.yaw - b.yaw).rem_euclid(360.0);
    (a.x - b.x).abs() <= 1e-9 && (a.y - b.y).abs() <= 1e-9 && (a.z - b.z).abs() <= 1e-9 && yaw_gap.min(360.0 - yaw_gap) <= 1e-9
}

proptest! {
    #[test]
    fn yaw_closure(d in -1.0e7f64..1.0e7, k in -50i32..=50) {
        let n = normalize_yaw(d).unwrap();
        prop_assert!(n > -180.0 && n <= 180.0);
        let m = normalize_yaw(d + 360.0 * k as f64).unwrap();
        let gap = (m - n).rem_euclid(360.0);
        prop_assert!(gap.min(360.0 - gap) <= 1e-6);
    }

    #[test]
    fn integer_yaw_is_exact(d in -100_000i64..100_000, k in -20i64..=20) {
        prop_assert_eq!(normalize_yaw(d as f64).unwrap(), normalize_yaw((d + 360 * k) as f64).unwrap());
    }

    #[test]
    fn trace_replay(src in program()) {
        let trace = run_source(&src, DroneState::grounded(), &ExecConfig::default()).unwrap();
        prop_assert_eq!(trace.states.len(), trace.transitions.len() + 1);
        let mut state = trace.states[0];
        for (t, expected) in trace.transitions.iter().zip(&trace.states[1..]) {
            state = state.advanced(t);
            prop_assert!(close(&state, expected), "{state:?} vs {expected:?}");
        }
    }

    #[test]
    fn print_parse_round_trip(src in program()) {
        let program = parse(&src).unwrap();
        let printed = to_source(&program);
        let reparsed = parse(&printed).unwrap();
        prop_assert_eq!(&to_source(&reparsed), &printed);
        let a = execute(&program, DroneState::grounded(), &ExecConfig::default());
        let b = execute(&reparsed, DroneState::grounded(), &ExecConfig::default());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn execution_and_rendering_are_pure(src in program()) {
        let program = parse(&src).unwrap();
        let a = execute(&program, DroneState::grounded(), &ExecConfig::default());
        let b = execute(&program, DroneState::grounded(), &ExecConfig::default());
        prop_assert_eq!(render_semantic(&a), render_semantic(&b));
        prop_assert_eq!(render_numerical(&a), render_numerical(&b));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn narration_inverts_rendering(src in program()) {
        let trace = run_source(&src, DroneState::grounded(), &ExecConfig::default()).unwrap();
        let parsed = parse_narration(&render_semantic(&trace)).unwrap();
        prop_assert!(transitions_match(&parsed, &trace.transitions, &Tolerance::default()));
    }

    #[test]
    fn mutants_change_the_trajectory(src in program(), seed in any::<u64>()) {
        let program = parse(&src).unwrap();
        let original = execute(&program, DroneState::grounded(), &ExecConfig::default()).transitions;
        if let Ok(m) = mutate_with(&program, seed, DroneState::grounded(), &ExecConfig::default()) {
            let mutated = execute(&m, DroneState::grounded(), &ExecConfig::default()).transitions;
            prop_assert!(!transitions_match(&mutated, &original, &Tolerance::EXACT));
            prop_assert_eq!(to_source(&mutate_with(&program, seed, DroneState::grounded(), &ExecConfig::default()).unwrap()), to_source(&m));
        }
    }
}

#[test]
fn narration_direction_words() {
    let cases = [
        (Transition::new(2.0, 0.0, 0.0, 0.0), "north"),
        (Transition::new(-2.0, 0.0, 0.0, 0.0), "south"),
        (Transition::new(0.0, 2.0, 0.0, 0.0), "east"),
        (Transition::new(0.0, -2.0, 0.0, 0.0), "west"),
        (Transition::new(0.0, 0.0, -2.0, 0.0), "up"),
        (Transition::new(0.0, 0.0, 2.0, 0.0), "down"),
    ];
    for (t, word) in cases {
        let src = format!(
            "p = aw.get_drone_position()\naw.fly_to([p[0] + {}, p[1] + {}, p[2] + {}])",
            t.dx, t.dy, t.dz
        );
        let trace = run_source(&src, DroneState::hovering(), &ExecConfig::default()).unwrap();
        assert_eq!(trace.transitions, vec![t]);
        let text = render_semantic(&trace);
        assert!(text.contains(word), "{text:?} lacks {word}");
    }
}

#[test]
fn square_seed_zero_shortens_the_climb() {
    let square = common::golden().into_iter().find(|c| c.name == "square").unwrap();
    let program = parse(&square.code).unwrap();
    let mutant = mutate(&program, 0).unwrap();
    let before = execute(&program, DroneState::grounded(), &ExecConfig::default()).transitions;
    let after = execute(&mutant, DroneState::grounded(), &ExecConfig::default()).transitions;
    assert_eq!(after[1], Transition::new(0.0, 0.0, -3.0, 0.0));
    let diffs: Vec<usize> = (0..before.len()).filter(|&i| before[i] != after[i]).collect();
    assert_eq!(diffs, vec![1]);
}

#[test]
fn takeoff_only_cannot_be_mutated() {
    assert!(mutate(&parse("aw.takeoff()").unwrap(), 0).is_err());
}
