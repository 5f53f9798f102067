use exoarm::sim::{
    detect_sound, run_simulation, Channel, ControlConfig, Latch, Relay, Signal, SimOutcome, SimSetup, SimTime,
    SimTrace, Valve,
};
use exoarm::sizing::{CylinderSpec, Side};
use proptest::prelude::*;

const DT: f64 = 0.01;

/// Sound pulses and manual presses at millisecond resolution.
fn trace_strategy() -> impl Strategy<Value = SimTrace> {
    prop::collection::vec((0u32..8_000, 1u32..400, 0.0f64..1.0, any::<bool>()), 0..12).prop_map(|raw| {
        let mut events = Vec::new();
        for (start_ms, width_ms, level, manual) in raw {
            let t = f64::from(start_ms) / 1e3;
            if manual {
                events.push((t, Channel::ManualSwitch));
            } else {
                events.push((t, Channel::SoundLevel(level)));
                events.push((t + f64::from(width_ms) / 1e3, Channel::SoundLevel(0.0)));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        SimTrace::from_secs(&events).unwrap()
    })
}

fn run(trace: &SimTrace) -> SimOutcome {
    run_simulation(&SimSetup::default(), trace, 10.0, DT).unwrap()
}

fn state_at<T: Copy>(changes: &[(SimTime, T)], initial: T, t: SimTime) -> T {
    changes.iter().take_while(|(c, _)| *c <= t).last().map_or(initial, |(_, v)| *v)
}

fn latch_changes(out: &SimOutcome) -> Vec<(SimTime, Latch)> {
    out.transitions
        .iter()
        .filter_map(|t| match t.signal {
            Signal::Latch(l) => Some((t.time, l)),
            _ => None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn latch_state_is_parity_of_accepted_toggles(trace in trace_strategy()) {
        let out = run(&trace);
        let changes = latch_changes(&out);
        prop_assert_eq!(changes.len(), out.summary.accepted_toggles);
        for row in &out.trajectory.rows {
            let n = changes.iter().filter(|(t, _)| *t <= row.time).count();
            prop_assert_eq!(row.latch == Latch::High, n % 2 == 1);
        }
    }

    #[test]
    fn relay_follows_latch_after_the_delay(trace in trace_strategy()) {
        let out = run(&trace);
        let delay = SimTime::from_secs(ControlConfig::default().relay_delay).unwrap();
        let changes = latch_changes(&out);
        for row in &out.trajectory.rows {
            if row.time < delay {
                prop_assert_eq!(row.relay, Relay::Open);
                continue;
            }
            let latch = state_at(&changes, Latch::Low, row.time.saturating_sub(delay));
            prop_assert_eq!(row.relay, Relay::from(latch));
            prop_assert_eq!(row.valve, Valve::from(row.relay));
        }
    }

    #[test]
    fn piston_stays_in_bounds_and_under_flow_speed(trace in trace_strategy()) {
        let out = run(&trace);
        let spec = CylinderSpec::default();
        let q = ControlConfig::default().retract_flow_rate;
        let vmax = q / spec.area(Side::Rod).min(spec.area(Side::Cap));
        for pair in out.trajectory.rows.windows(2) {
            let x = pair[1].piston_extension;
            prop_assert!((0.0..=spec.stroke).contains(&x));
            prop_assert!((x - pair[0].piston_extension).abs() <= vmax * DT * (1.0 + 1e-9));
        }
    }

    #[test]
    fn detections_respect_debounce(trace in trace_strategy(), window in 0.0f64..1.0) {
        let hits = detect_sound(&trace, 0.5, window);
        let w = SimTime::from_secs(window).unwrap();
        for pair in hits.windows(2) {
            prop_assert!(pair[1].saturating_sub(pair[0]) >= w);
        }
    }

    #[test]
    fn runs_are_byte_identical(trace in trace_strategy()) {
        let (a, b) = (run(&trace), run(&trace));
        prop_assert_eq!(a.trajectory.to_csv(), b.trajectory.to_csv());
        prop_assert_eq!(serde_json::to_vec(&a.summary).unwrap(), serde_json::to_vec(&b.summary).unwrap());
    }
}

#[test]
fn trajectory_rows_are_evenly_spaced() {
    let out = run(&SimTrace::pulses(&[1.0], 0.1, 0.9).unwrap());
    let step = SimTime::from_secs(DT).unwrap();
    for (i, row) in out.trajectory.rows.iter().enumerate() {
        assert_eq!(row.time, SimTime(step.0 * i as u64));
    }
}

#[test]
fn reversal_mid_stroke_aborts_the_lift() {
    let out = run(&SimTrace::pulses(&[1.0, 1.8], 0.1, 0.9).unwrap());
    assert_eq!(out.summary.lift_count, 0);
    assert_eq!(out.summary.aborted_lifts, 1);
    let last = out.trajectory.rows.last().unwrap();
    assert_eq!(last.piston_extension, CylinderSpec::default().stroke);
}
