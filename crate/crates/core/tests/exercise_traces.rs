mod common;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;

use common::{add_noise, exercise_events, rep_count, rep_trace, run_frames, RepKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use touchless::exercise::{read_templates, GestureTemplate, TemplateMode, UseMode};
use touchless::scenario::{self, FPS};
use touchless::synth::PoseSpec;
use touchless::{GestureEvent, GestureKind, Point2};

fn templates() -> Vec<GestureTemplate> {
    let f = File::open(common::fixtures().join("templates.ndjson")).unwrap();
    read_templates(BufReader::new(f)).unwrap()
}

fn labelled<'a>(events: &'a [GestureEvent], label: &str) -> Vec<&'a GestureEvent> {
    events
        .iter()
        .filter(|e| match &e.kind {
            GestureKind::Activate { label: l, .. } | GestureKind::Deactivate { label: l } => {
                l == label
            }
            _ => false,
        })
        .collect()
}

fn assert_alternates(events: &[GestureEvent]) {
    let mut active: BTreeMap<String, bool> = BTreeMap::new();
    for e in events {
        match &e.kind {
            GestureKind::Activate { label, .. } => {
                assert!(
                    !active.insert(label.clone(), true).unwrap_or(false),
                    "double activate {label} at {}",
                    e.t_ms
                )
            }
            GestureKind::Deactivate { label } => {
                assert!(
                    active.insert(label.clone(), false).unwrap_or(false),
                    "deactivate without activate {label}"
                )
            }
            _ => {}
        }
    }
}

fn assert_counts_step_by_one(events: &[GestureEvent]) {
    let mut last: BTreeMap<&str, u64> = BTreeMap::new();
    for e in events {
        let (name, count) = match e.kind {
            GestureKind::SquatRep { count } => ("squat", count),
            GestureKind::JumpRep { count } => ("jump", count),
            GestureKind::CycleRep { count } => ("cycle", count),
            _ => continue,
        };
        let prev = last.insert(name, count).unwrap_or(0);
        assert_eq!(count, prev + 1, "{name} count jumped");
    }
}

#[test]
fn shipped_squat_fixture_counts_five_through_the_engine() {
    let s = scenario::squat_reps();
    let (_, stats) = run_frames(common::config(s.config), Vec::new(), &s.frames);
    assert_eq!(stats.exercise.get("squat").reps, 5);
}

#[test]
fn clean_traces_count_exactly() {
    for kind in [RepKind::Squat, RepKind::Jump, RepKind::Cycling] {
        for n in [1, 2, 7, 20] {
            let (events, _) = exercise_events(UseMode::Standing, Vec::new(), &rep_trace(kind, n));
            assert_eq!(rep_count(kind, &events), n, "{kind:?} n={n}");
            assert_counts_step_by_one(&events);
            assert_alternates(&events);
        }
    }
}

#[test]
fn sitting_mode_disables_jump_and_counts_squat_and_cycling() {
    let (events, _) = exercise_events(UseMode::Sitting, Vec::new(), &rep_trace(RepKind::Jump, 3));
    assert_eq!(rep_count(RepKind::Jump, &events), 0);
    for kind in [RepKind::Squat, RepKind::Cycling] {
        let (events, _) = exercise_events(UseMode::Sitting, Vec::new(), &rep_trace(kind, 4));
        assert_eq!(rep_count(kind, &events), 4, "{kind:?}");
    }
}

#[test]
fn noisy_traces_count_exactly() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for kind in [RepKind::Squat, RepKind::Jump, RepKind::Cycling] {
            let mut trace = rep_trace(kind, 6);
            add_noise(&mut trace, &mut rng, 3.0, 0.02);
            let (events, _) = exercise_events(UseMode::Standing, Vec::new(), &trace);
            assert_eq!(rep_count(kind, &events), 6, "{kind:?} seed={seed}");
            assert_alternates(&events);
        }
    }
}

#[test]
fn noisy_still_body_does_nothing() {
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        for mode in [UseMode::Standing, UseMode::Sitting] {
            let knee = if mode == UseMode::Sitting {
                100.0
            } else {
                175.0
            };
            let mut trace: Vec<_> = (0..300)
                .map(|i| {
                    let p =
                        PoseSpec::standing(Point2::new(320.0, 250.0), 100.0).with_knees(knee, knee);
                    (i as f64 * 1000.0 / FPS, p)
                })
                .collect();
            add_noise(&mut trace, &mut rng, 3.0, 0.02);
            let (events, _) = exercise_events(mode, Vec::new(), &trace);
            assert!(events.is_empty(), "seed={seed} {mode:?}: {events:?}");
        }
    }
}

#[test]
fn single_hop_is_one_jump_and_slow_drift_is_none() {
    let (events, _) = exercise_events(UseMode::Standing, Vec::new(), &rep_trace(RepKind::Jump, 1));
    let jumps: Vec<_> = events
        .iter()
        .filter(|e| matches!(e.kind, GestureKind::JumpRep { .. }))
        .collect();
    assert_eq!(jumps.len(), 1);
    // the hop spans 1000..1400 ms; the rep lands on the descent
    assert!(
        jumps[0].t_ms > 1200.0 && jumps[0].t_ms <= 1400.0,
        "{}",
        jumps[0].t_ms
    );

    let drift: Vec<_> = (0..240)
        .map(|i| {
            let t = i as f64 * 1000.0 / FPS;
            let mut p =
                PoseSpec::standing(Point2::new(320.0, 250.0), 100.0).with_knees(175.0, 175.0);
            p.hip_mid_px.y -= 30.0 * ((t - 1000.0) / 5000.0).clamp(0.0, 1.0);
            (t, p)
        })
        .collect();
    let (events, _) = exercise_events(UseMode::Standing, Vec::new(), &drift);
    assert!(events.is_empty(), "{events:?}");
}

fn reach_trace(ramp_ms: f64) -> Vec<(f64, PoseSpec)> {
    (0..120)
        .map(|i| {
            let t = i as f64 * 1000.0 / FPS;
            let reach = 0.5 + 0.45 * ((t - 1000.0) / ramp_ms).clamp(0.0, 1.0);
            (
                t,
                PoseSpec::standing(Point2::new(320.0, 250.0), 100.0)
                    .with_knees(175.0, 175.0)
                    .with_reach(0.5, reach),
            )
        })
        .collect()
}

#[test]
fn fast_extension_punches_and_slow_one_does_not() {
    let (fast, _) = exercise_events(UseMode::Standing, Vec::new(), &reach_trace(200.0));
    let kinds: Vec<_> = fast.iter().map(|e| &e.kind).collect();
    assert_eq!(kinds, vec![&GestureKind::PunchRight]);
    let (slow, _) = exercise_events(UseMode::Standing, Vec::new(), &reach_trace(2000.0));
    assert!(slow.is_empty(), "{slow:?}");
}

#[test]
fn ten_seconds_of_pedalling() {
    let (events, m) = exercise_events(
        UseMode::Sitting,
        Vec::new(),
        &rep_trace(RepKind::Cycling, 10),
    );
    let switches = labelled(&events, "cycling");
    assert_eq!(switches.len(), 2, "{switches:?}");
    assert!(matches!(switches[0].kind, GestureKind::Activate { .. }));
    assert!(matches!(switches[1].kind, GestureKind::Deactivate { .. }));
    assert_eq!(rep_count(RepKind::Cycling, &events), 10);
    // pedalling stops at 10 s; inactivity follows once the timeout passes
    assert!(switches[1].t_ms > 10_000.0 && switches[1].t_ms <= 12_000.0 + 1000.0 / FPS);
    let stats = m.stats().get("cycling");
    assert_eq!(stats.reps, 10);
    let oracle = switches[1].t_ms - switches[0].t_ms;
    assert!(
        (stats.active_ms - oracle).abs() < 1e-9,
        "{} vs {oracle}",
        stats.active_ms
    );
}

#[test]
fn in_phase_knees_never_cycle() {
    let trace: Vec<_> = (0..300)
        .map(|i| {
            let t = i as f64 * 1000.0 / FPS;
            let a = 130.0 + 25.0 * (std::f64::consts::TAU * t / 1000.0).sin();
            (
                t,
                PoseSpec::standing(Point2::new(320.0, 250.0), 100.0).with_knees(a, a),
            )
        })
        .collect();
    let (events, _) = exercise_events(UseMode::Sitting, Vec::new(), &trace);
    assert!(labelled(&events, "cycling").is_empty());
    assert_eq!(rep_count(RepKind::Cycling, &events), 0);
}

#[test]
fn losing_the_body_closes_activations() {
    let mut m =
        touchless::exercise::ExerciseModule::new(Default::default(), UseMode::Sitting, Vec::new())
            .unwrap();
    let mut events = Vec::new();
    for (t, p) in rep_trace(RepKind::Cycling, 4).iter().take(90) {
        events.extend(
            m.step(Some(&p.build(scenario::VGA)), scenario::VGA, *t)
                .unwrap(),
        );
    }
    assert_eq!(m.active_labels(), vec!["cycling".to_string()]);
    let closed = m.step(None, scenario::VGA, 3000.0).unwrap();
    assert!(matches!(
        &closed[..],
        [GestureEvent {
            kind: GestureKind::Deactivate { .. },
            ..
        }]
    ));
    assert!(m.active_labels().is_empty());
}

#[test]
fn hold_template_tracks_each_squat_bottom() {
    let s = scenario::squat_reps();
    let trace: Vec<_> = scenario::squat_trace(5, 2000.0, 80.0)
        .into_iter()
        .map(|(t, a)| (t, scenario::skeleton().with_knees(a, a)))
        .collect();
    assert_eq!(trace.len(), s.frames.len());
    let (events, m) = exercise_events(UseMode::Standing, templates(), &trace);
    assert_alternates(&events);
    let switches = labelled(&events, "squat_hold");
    assert_eq!(switches.len(), 10, "{switches:?}");
    // each activation sits inside a squat, around its bottom at 1000 + 2000k ms
    for (k, pair) in switches.chunks(2).enumerate() {
        let bottom = 1000.0 + 2000.0 * k as f64;
        assert!(
            pair[0].t_ms < bottom && pair[1].t_ms > bottom,
            "rep {k}: {} {}",
            pair[0].t_ms,
            pair[1].t_ms
        );
    }
    let total: f64 = switches.chunks(2).map(|p| p[1].t_ms - p[0].t_ms).sum();
    assert!((m.stats().get("squat_hold").active_ms - total).abs() < 1e-9);
}

#[test]
fn rep_template_fires_once_per_squat() {
    let mut t = templates();
    t[0].mode = TemplateMode::Rep;
    let trace: Vec<_> = scenario::squat_trace(5, 2000.0, 80.0)
        .into_iter()
        .map(|(t, a)| (t, scenario::skeleton().with_knees(a, a)))
        .collect();
    let (events, m) = exercise_events(UseMode::Standing, t, &trace);
    let reps = events
        .iter()
        .filter(|e| matches!(e.kind, GestureKind::TemplateRep { .. }))
        .count();
    assert_eq!(reps, 5);
    assert_eq!(m.stats().get("squat_hold").reps, 5);
    assert!(labelled(&events, "squat_hold").is_empty());
}

fn kinds_and_times(events: &[GestureEvent]) -> Vec<(String, f64)> {
    events
        .iter()
        .map(|e| {
            let name = match &e.kind {
                GestureKind::Activate { label, confidence } => {
                    format!("activate {label} {confidence:.9}")
                }
                GestureKind::TemplateRep { label, confidence } => {
                    format!("rep {label} {confidence:.9}")
                }
                other => format!("{other:?}"),
            };
            (name, e.t_ms)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn detectors_ignore_body_placement_and_size(dx in -80.0..80.0f64, dy in -40.0..40.0f64, scale in 0.6..1.6f64) {
        let moved = |trace: Vec<(f64, PoseSpec)>| -> Vec<(f64, PoseSpec)> {
            trace.into_iter().map(|(t, mut p)| {
                p.hip_mid_px = Point2::new(320.0 + dx + (p.hip_mid_px.x - 320.0) * scale, 200.0 + dy + (p.hip_mid_px.y - 250.0) * scale);
                p.torso_px *= scale;
                (t, p)
            }).collect()
        };
        for kind in [RepKind::Squat, RepKind::Jump, RepKind::Cycling] {
            let trace = rep_trace(kind, 3);
            let (a, _) = exercise_events(UseMode::Standing, templates(), &trace);
            let (b, _) = exercise_events(UseMode::Standing, templates(), &moved(trace));
            prop_assert_eq!(kinds_and_times(&a), kinds_and_times(&b));
        }
    }
}
