use serde::{Deserialize, Serialize};

use super::{Channel, ControlConfig, Fault, SimTime, SimTrace, SystemState};

/// Detection times: each upward crossing of `threshold`, skipping crossings
/// less than `debounce_window` seconds after the last accepted detection.
pub fn detect_sound(trace: &SimTrace, threshold: f64, debounce_window: f64) -> Vec<SimTime> {
    detections(trace, threshold, debounce_window)
        .into_iter()
        .map(|(_, t)| t)
        .collect()
}

/// Detections paired with the index of the trace event that produced them.
pub(crate) fn detections(trace: &SimTrace, threshold: f64, debounce_window: f64) -> Vec<(usize, SimTime)> {
    let window = SimTime((debounce_window.max(0.0) * 1e9).round() as u64);
    let mut level = 0.0;
    let mut last: Option<SimTime> = None;
    let mut out = Vec::new();
    for (i, event) in trace.events().iter().enumerate() {
        let Channel::SoundLevel(next) = event.channel else {
            continue;
        };
        let crossed = level < threshold && next >= threshold;
        level = next;
        if !crossed {
            continue;
        }
        if last.is_some_and(|t| event.time.saturating_sub(t) < window) {
            continue;
        }
        last = Some(event.time);
        out.push((i, event.time));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatchInput {
    Detection,
    ManualToggle,
    Fault(Fault),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    /// Latch flipped.
    Toggled,
    /// Fault status updated; latch untouched.
    FaultSet,
    /// Detection while the sensor is flagged stuck.
    Ignored,
    /// Manual press with the override disabled.
    Rejected,
}

/// Apply one input to the latch. The latch holds between accepted inputs.
pub fn step_latch(state: &SystemState, input: LatchInput, config: &ControlConfig) -> (SystemState, Disposition) {
    let mut next = *state;
    let disposition = match input {
        LatchInput::Detection if state.fault == Fault::SensorStuck => Disposition::Ignored,
        LatchInput::Detection => {
            next.latch = state.latch.toggled();
            Disposition::Toggled
        }
        LatchInput::ManualToggle if !config.manual_override => Disposition::Rejected,
        LatchInput::ManualToggle => {
            next.latch = state.latch.toggled();
            Disposition::Toggled
        }
        LatchInput::Fault(fault) => {
            next.fault = fault;
            Disposition::FaultSet
        }
    };
    (next, disposition)
}
