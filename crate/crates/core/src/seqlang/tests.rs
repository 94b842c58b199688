use std::f64::consts::PI;

use super::builtin::{builtin_programs, noon_program, parity_program, swap_test_program};
use super::*;
use crate::fockspace::{Mode, Spin};
use crate::generators::Preparation;
use crate::protocols::{generate_noon, parity_gate, swap_test, RunOptions, ShotPlan};
use crate::{Error, NoiseParams, C64};

fn message(text: &str) -> (usize, usize, String) {
    match parse(text) {
        Err(Error::Sequence {
            line,
            column,
            message,
        }) => (line, column, message),
        other => panic!("expected a sequence error, got {other:?}"),
    }
}

#[test]
fn parses_rotation() {
    let p = parse("R pi/2 0").unwrap();
    assert_eq!(
        p.instructions[0].node,
        Instruction::Rotate {
            theta: Angle::pi_over(1, 2),
            phi: Angle::zero()
        }
    );
    assert_eq!(p.instructions[0].span, Span { line: 1, column: 1 });
}

#[test]
fn parses_half_cbs() {
    let p = parse("set cutoffs 3 3\nCBS 0.5tau pi").unwrap();
    assert_eq!(
        p.instructions[0].node,
        Instruction::Cbs {
            duration: Duration::Tau(0.5),
            upsilon: Angle::pi_over(1, 1),
            modes: (Mode::A, Mode::B)
        }
    );
}

#[test]
fn unknown_opcode() {
    let (line, column, msg) = message("set cutoffs 2 2\n\n   FOO 1 2");
    assert_eq!((line, column), (3, 4));
    assert_eq!(msg, "unknown opcode FOO");
    let e = parse("FOO 1 2").unwrap_err();
    assert_eq!(e.to_string(), "line 1, column 1: unknown opcode FOO");
}

#[test]
fn empty_program_prints_header_only() {
    let p = parse("").unwrap();
    assert_eq!(p, Program::default());
    assert_eq!(pretty_print(&p), "");
    let p = parse("# nothing\nset cutoffs 4 4\n").unwrap();
    assert_eq!(pretty_print(&p), "set cutoffs 4 4\n");
}

#[test]
fn angle_forms() {
    for (text, want) in [
        ("pi", PI),
        ("-pi", -PI),
        ("-pi/2", -PI / 2.0),
        ("3pi/4", 3.0 * PI / 4.0),
        ("0.25", 0.25),
        ("0pi", 0.0),
        ("PI/3", PI / 3.0),
    ] {
        let a = parse::parse_angle(text).unwrap_or_else(|| panic!("{text}"));
        assert!((a.radians() - want).abs() < 1e-15, "{text}");
    }
    for bad in ["pi/0", "pix", "2.5pi", "nan", "inf", "", "pi/-2", "--1"] {
        assert!(parse::parse_angle(bad).is_none(), "{bad}");
    }
}

#[test]
fn duration_forms() {
    let tau = 400e-6;
    for (text, want) in [
        ("tau", tau),
        ("0.5tau", tau / 2.0),
        ("tau/2", tau / 2.0),
        ("250us", 250e-6),
        ("2ms", 2e-3),
        ("0.1s", 0.1),
        ("1e-3", 1e-3),
    ] {
        let d = parse::parse_duration(text).unwrap_or_else(|| panic!("{text}"));
        assert!((d.seconds(tau) - want).abs() < 1e-15, "{text}");
    }
    for bad in ["tau/0", "xtau", "1h", "ms", "infs"] {
        assert!(parse::parse_duration(bad).is_none(), "{bad}");
    }
}

#[test]
fn structural_errors() {
    let cases = [
        (
            "set cutoffs 3 3\nR pi 0\nPREP fock 1 a",
            3,
            "PREP must come",
        ),
        (
            "set cutoffs 3 3\nMEASURE\nR pi 0",
            3,
            "after the MEASURE block",
        ),
        ("set cutoffs 3\nBSB b", 2, "undeclared mode b"),
        ("set cutoffs 3 3\nCBS tau 0 aa", 2, "malformed mode pair"),
        (
            "set cutoffs 3 3\nPREP fock 1 a\nPREP fock 2 a",
            3,
            "prepared twice",
        ),
        ("set cutoffs 3 3\nWAIT -1ms", 2, "non-negative"),
        ("set cutoffs 3 3\nJSB 0 tau", 2, "must be positive"),
        (
            "set cutoffs 3 3\nset cutoffs 3 3",
            2,
            "duplicate header key",
        ),
        ("set color red", 1, "unknown header key"),
        ("R pi 0\nset seed 1", 2, "must precede"),
        ("set cutoffs 3 3\nR pi", 2, "R expects 2"),
        ("set cutoffs 3 3\nMEASURE wigner a", 2, "unknown observable"),
        ("set cutoffs 0", 1, "at least 1"),
        ("set cutoffs 2 2 2 2", 1, "1 to 3"),
        ("set shots 0", 1, "at least 1"),
    ];
    for (text, line, needle) in cases {
        let (l, _, msg) = message(text);
        assert_eq!(l, line, "{text}: {msg}");
        assert!(msg.contains(needle), "{text}: {msg}");
    }
}

#[test]
fn invalid_utf8_reports_position() {
    let e = parse_bytes(b"set cutoffs 2 2\nR \xff 0").unwrap_err();
    assert_eq!(e.to_string(), "line 2, column 3: invalid UTF-8");
}

#[test]
fn comments_and_case() {
    let a = parse("set cutoffs 3 3 # two modes\nr PI/2 0 # pulse\nmeasure SPIN").unwrap();
    let b = parse("set cutoffs 3 3\nR pi/2 0\nMEASURE spin").unwrap();
    assert_eq!(a, b);
}

#[test]
fn builtins_round_trip() {
    for (name, p) in builtin_programs() {
        validate(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = pretty_print(&p);
        assert_eq!(parse(&text).unwrap(), p, "{name}");
    }
}

#[test]
fn shot_plan_from_header() {
    assert_eq!(parse("").unwrap().shot_plan(), ShotPlan::exact());
    assert_eq!(
        parse("set shots 10\nset seed 3").unwrap().shot_plan(),
        ShotPlan::sampled(10, 3)
    );
    assert!(parse("set sampling exact\nset shots 10")
        .unwrap()
        .shot_plan()
        .is_exact());
}

#[test]
fn fock_preparation_measured() {
    let p = parse("set cutoffs 4 4\nPREP fock 1 a\nMEASURE").unwrap();
    let r = execute(&p, &NoiseParams::noiseless(), &ShotPlan::exact()).unwrap();
    assert_eq!(r.derived["p_e"], 0.0);
    assert!((r.derived["mean_n_a"] - 1.0).abs() < 1e-12);
    assert!(r.derived["mean_n_b"].abs() < 1e-12);
    let fock_a: Vec<f64> = r
        .rows
        .iter()
        .filter(|row| row[0] == ROW_FOCK && row[1] == 0.0)
        .map(|row| row[3])
        .collect();
    assert_eq!(fock_a.len(), 4);
    assert!((fock_a[1] - 1.0).abs() < 1e-12);
}

#[test]
fn excited_spin_moves_photon() {
    let (_, p) = builtin_programs()
        .into_iter()
        .find(|(n, _)| *n == "conditional_swap")
        .unwrap();
    let run = simulate(&p, &NoiseParams::noiseless()).unwrap();
    assert!((run.ensemble.spin_population(Spin::E) - 1.0).abs() < 1e-12);
    assert!((run.ensemble.mode_distribution(Mode::B).unwrap()[1] - 1.0).abs() < 1e-12);
}

#[test]
fn swap_program_matches_protocol() {
    let psi = Preparation::coherent(C64::new(0.8, -0.3));
    for (m, phi) in [(0, 0.0), (1, PI / 2.0), (2, PI)] {
        let angle = Angle::Radians(phi);
        let p = swap_test_program(&psi, m, angle, false).unwrap();
        let r = execute(&p, &NoiseParams::noiseless(), &ShotPlan::exact()).unwrap();
        let direct = swap_test(&psi, m, &[phi], &RunOptions::noiseless()).unwrap();
        assert!(
            (r.derived["p_e"] - direct.probabilities[0]).abs() < 1e-12,
            "m={m}"
        );
    }
}

#[test]
fn echoed_swap_program_reads_ground() {
    let psi = Preparation::fock(1);
    let p = swap_test_program(&psi, 1, Angle::zero(), true).unwrap();
    let run = simulate(&p, &NoiseParams::noiseless()).unwrap();
    let direct = swap_test(&psi, 1, &[0.0], &RunOptions::noiseless().with_echo(true)).unwrap();
    assert!((run.ensemble.spin_population(Spin::G) - direct.probabilities[0]).abs() < 1e-12);
}

#[test]
fn parity_program_matches_protocol() {
    for (n, echo) in [(1, false), (2, false), (1, true), (2, true)] {
        let psi = Preparation::fock(n);
        let p = parity_program(&psi, echo).unwrap();
        let r = execute(&p, &NoiseParams::noiseless(), &ShotPlan::exact()).unwrap();
        let g = parity_gate(&psi, &RunOptions::noiseless().with_echo(echo)).unwrap();
        assert!((r.derived["p_e"] - g.p_e).abs() < 1e-12);
        if !echo {
            assert!((r.derived["parity_a"] - g.parity).abs() < 1e-12);
        }
    }
}

#[test]
fn noon_program_matches_generation() {
    for (n, echo) in [(1, false), (2, false), (3, false), (2, true)] {
        let p = noon_program(n, echo);
        let run = simulate(&p, &NoiseParams::noiseless()).unwrap();
        let direct = generate_noon(n, &RunOptions::noiseless().with_echo(echo), None).unwrap();
        let a = run.ensemble.to_state().unwrap();
        let target = direct.state.amplitudes().unwrap();
        assert!(
            (a.fidelity_with(target).unwrap() - 1.0).abs() < 1e-12,
            "n={n} echo={echo}"
        );
        let r = execute(&p, &NoiseParams::noiseless(), &ShotPlan::exact()).unwrap();
        assert!((r.derived["noon_fidelity"] - 1.0).abs() < 1e-12);
        assert!((r.derived["noon_fisher"] - (n * n) as f64).abs() < 1e-9);
    }
}

#[test]
fn echo_dephasing_uses_echo_rate() {
    let noise = NoiseParams::paper();
    let plain = execute(&noon_program(2, true), &noise, &ShotPlan::exact()).unwrap();
    let mut p = noon_program(2, true);
    p.header.echo_dephasing = None;
    let unechoed_rate = execute(&p, &noise, &ShotPlan::exact()).unwrap();
    assert!(plain.derived["noon_fidelity"] >= unechoed_rate.derived["noon_fidelity"] - 1e-12);
}

#[test]
fn sampled_execution_is_deterministic() {
    let (_, p) = builtin_programs()
        .into_iter()
        .find(|(n, _)| *n == "displaced_parity")
        .unwrap();
    let plan = p.shot_plan();
    assert!(!plan.is_exact());
    let a = execute(&p, &NoiseParams::noiseless(), &plan).unwrap();
    let b = execute(&p, &NoiseParams::noiseless(), &plan).unwrap();
    assert_eq!(a, b);
    let se = a.derived_se["p_e"];
    assert!(se > 0.0 && se < 0.05);
}

#[test]
fn runtime_errors_carry_position() {
    let p = parse("set cutoffs 3 3\nPREP fock 5 a\nMEASURE").unwrap();
    match execute(&p, &NoiseParams::noiseless(), &ShotPlan::exact()) {
        Err(Error::Sequence { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    let p = parse("R pi 0").unwrap();
    assert!(matches!(
        execute(&p, &NoiseParams::noiseless(), &ShotPlan::exact()),
        Err(Error::Sequence { .. })
    ));
}
