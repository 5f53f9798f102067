use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::control::{detections, step_latch, Disposition, LatchInput};
use super::cylinder::{cylinder_step, speed};
use super::{Channel, ControlConfig, Latch, Relay, SimTime, SimTrace, SystemState, Valve};
use crate::arm::{self, ArmGeometry, LoadCase, Sweep, TRANSFER_ANGLE_LIMIT_DEG};
use crate::error::{Error, Result};
use crate::sizing::{self, available_force, CylinderSpec, Side};

pub const TRAJECTORY_HEADER: [&str; 9] = [
    "time_s",
    "latch",
    "relay",
    "valve",
    "piston_extension_m",
    "elbow_angle_deg",
    "transfer_angle_deg",
    "load_height_m",
    "force_margin",
];

/// Allowed difference between the cylinder stroke and the travel the sweep needs.
pub const STROKE_TOLERANCE: f64 = 5e-4;

const MAX_SAMPLES: u64 = 20_000_000;

/// Everything the plant needs besides the input trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSetup {
    pub geometry: ArmGeometry,
    pub load: LoadCase,
    pub cylinder: CylinderSpec,
    pub control: ControlConfig,
    pub sweep: Sweep,
}

impl Default for SimSetup {
    fn default() -> Self {
        Self {
            geometry: ArmGeometry::default(),
            load: LoadCase::default(),
            cylinder: CylinderSpec::default(),
            control: ControlConfig::default(),
            sweep: Sweep::reference(),
        }
    }
}

impl SimSetup {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.load.validate()?;
        self.cylinder.validate()?;
        self.control.validate()?;
        let start = self.geometry.initial_elbow_angle();
        if (self.sweep.max - start).abs() > 1e-9 {
            return Err(Error::Inconsistent(format!(
                "sweep starts at {:.4}° but the initial elbow angle is {:.4}°",
                self.sweep.max.to_degrees(),
                start.to_degrees()
            )));
        }
        let travel = sizing::stroke_required(&self.geometry, self.sweep)?;
        if (travel - self.cylinder.stroke).abs() > STROKE_TOLERANCE {
            return Err(Error::Inconsistent(format!(
                "cylinder stroke {:.1} mm does not match the {:.1} mm the sweep requires",
                self.cylinder.stroke * 1e3,
                travel * 1e3
            )));
        }
        let (min_len, _) = self.geometry.reachable_lengths();
        if self.full_length()? - self.cylinder.stroke < min_len {
            return Err(Error::Inconsistent("stroke exceeds the linkage's reachable range".into()));
        }
        // Inclination is affine in the elbow angle, so both ends bound the arc.
        arm::required_piston_force_at(&self.geometry, &self.load, self.sweep.min)?;
        arm::required_piston_force_at(&self.geometry, &self.load, self.sweep.max)?;
        Ok(())
    }

    fn full_length(&self) -> Result<f64> {
        arm::piston_length(&self.geometry, self.geometry.initial_elbow_angle())
    }

    /// Elbow angle with the piston `extension` meters out from full retraction.
    fn elbow_at(&self, full_length: f64, extension: f64) -> Result<f64> {
        arm::elbow_angle_from_piston(&self.geometry, full_length - (self.cylinder.stroke - extension))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub time: SimTime,
    pub latch: Latch,
    pub relay: Relay,
    pub valve: Valve,
    pub piston_extension: f64,
    pub elbow_angle: f64,
    pub transfer_angle: f64,
    pub load_height: f64,
    /// Rod-side available force over the lifting force at this pose; infinite with no load.
    pub force_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrajectory {
    pub sample_step: SimTime,
    pub rows: Vec<TrajectoryRow>,
}

impl SimTrajectory {
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(TRAJECTORY_HEADER).expect("in-memory write");
        for r in &self.rows {
            let margin = if r.force_margin.is_finite() {
                format!("{:.6}", r.force_margin)
            } else {
                "inf".to_string()
            };
            wtr.write_record([
                r.time.to_string(),
                r.latch.to_string(),
                r.relay.to_string(),
                r.valve.to_string(),
                format!("{:.9}", r.piston_extension),
                format!("{:.6}", r.elbow_angle.to_degrees()),
                format!("{:.6}", r.transfer_angle.to_degrees()),
                format!("{:.9}", r.load_height),
                margin,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Latch(Latch),
    Relay(Relay),
    Valve(Valve),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub time: SimTime,
    pub signal: Signal,
}

/// A retraction from full extension to full retraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftRecord {
    pub start_s: f64,
    pub end_s: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub duration_s: f64,
    pub sample_step_s: f64,
    pub samples: usize,
    pub detections: usize,
    pub accepted_toggles: usize,
    pub ignored_detections: usize,
    pub rejected_events: usize,
    pub lift_count: usize,
    pub lifts: Vec<LiftRecord>,
    pub aborted_lifts: usize,
    pub peak_required_force_n: f64,
    /// `None` when no sample carried load.
    pub min_force_margin: Option<f64>,
    pub max_transfer_angle_deg: f64,
    pub transfer_angle_violations: usize,
    pub stall_episodes: usize,
    pub first_stall_s: Option<f64>,
}

impl SimSummary {
    pub fn pass(&self) -> bool {
        self.stall_episodes == 0 && self.transfer_angle_violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub trajectory: SimTrajectory,
    pub summary: SimSummary,
    /// Every latch, relay and valve change in time order.
    pub transitions: Vec<Transition>,
}

impl SimOutcome {
    /// Samples spanning one lift, from the last sample at or before its
    /// start to the first sample at or after its end.
    pub fn lift_rows(&self, lift: &LiftRecord) -> &[TrajectoryRow] {
        let rows = &self.trajectory.rows;
        let start = SimTime::from_secs(lift.start_s).unwrap_or(SimTime::ZERO);
        let end = SimTime::from_secs(lift.end_s).unwrap_or(SimTime::ZERO);
        let first = rows.partition_point(|r| r.time <= start).saturating_sub(1);
        let last = rows.partition_point(|r| r.time < end).min(rows.len().saturating_sub(1));
        &rows[first..=last.max(first)]
    }
}

struct Engine<'a> {
    setup: &'a SimSetup,
    full_length: f64,
    state: SystemState,
    pending_relay: VecDeque<(SimTime, Relay)>,
    relay_delay: SimTime,
    transitions: Vec<Transition>,
    lift_start: Option<SimTime>,
    lifts: Vec<LiftRecord>,
    aborted_lifts: usize,
    stall_episodes: usize,
    first_stall: Option<SimTime>,
    accepted_toggles: usize,
    ignored: usize,
    rejected: usize,
}

impl Engine<'_> {
    fn advance(&mut self, to: SimTime) -> Result<()> {
        let from = self.state.time;
        if to <= from {
            return Ok(());
        }
        let dt = (to.0 - from.0) as f64 / 1e9;
        let required = match self.state.valve {
            Valve::Retract => arm::required_piston_force_at(&self.setup.geometry, &self.setup.load, self.state.elbow_angle)?.f_piston,
            // Gravity assists lowering.
            Valve::Extend => 0.0,
        };
        let was_stalled = self.state.stalled;
        let before = self.state.piston_extension;
        let mut next = cylinder_step(&self.state, &self.setup.cylinder, &self.setup.control, required, dt);
        if next.stalled && !was_stalled {
            self.stall_episodes += 1;
            self.first_stall.get_or_insert(from);
        }
        next.elbow_angle = self.setup.elbow_at(self.full_length, next.piston_extension)?;
        next.time = to;
        if let Some(start) = self.lift_start {
            if next.valve == Valve::Retract && next.piston_extension == 0.0 && before > 0.0 {
                let v = speed(&self.setup.cylinder, &self.setup.control, Valve::Retract);
                let end_s = from.as_secs() + before / v;
                self.lifts.push(LiftRecord {
                    start_s: start.as_secs(),
                    end_s,
                    duration_s: end_s - start.as_secs(),
                });
                self.lift_start = None;
            }
        }
        self.state = next;
        Ok(())
    }

    fn apply_due_relays(&mut self, now: SimTime) {
        while let Some(&(at, relay)) = self.pending_relay.front() {
            if at != now {
                break;
            }
            self.pending_relay.pop_front();
            if relay == self.state.relay {
                continue;
            }
            self.state.relay = relay;
            self.transitions.push(Transition { time: now, signal: Signal::Relay(relay) });
            let valve = Valve::from(relay);
            if valve != self.state.valve {
                self.state.valve = valve;
                self.transitions.push(Transition { time: now, signal: Signal::Valve(valve) });
                match valve {
                    Valve::Retract if self.state.piston_extension >= self.setup.cylinder.stroke => {
                        self.lift_start = Some(now);
                    }
                    Valve::Retract => {}
                    Valve::Extend => {
                        if self.lift_start.take().is_some() {
                            self.aborted_lifts += 1;
                        }
                    }
                }
            }
        }
    }

    fn apply_input(&mut self, now: SimTime, input: LatchInput) {
        let (next, disposition) = step_latch(&self.state, input, &self.setup.control);
        match disposition {
            Disposition::Toggled => {
                self.accepted_toggles += 1;
                self.transitions.push(Transition { time: now, signal: Signal::Latch(next.latch) });
                self.pending_relay.push_back((now + self.relay_delay, Relay::from(next.latch)));
            }
            Disposition::Ignored => self.ignored += 1,
            Disposition::Rejected => self.rejected += 1,
            Disposition::FaultSet => {}
        }
        self.state = next;
    }

    fn sample(&self) -> Result<TrajectoryRow> {
        let g = &self.setup.geometry;
        let elbow = self.state.elbow_angle;
        let required = arm::required_piston_force_at(g, &self.setup.load, elbow)?.f_piston;
        let available = available_force(&self.setup.cylinder, Side::Rod);
        Ok(TrajectoryRow {
            time: self.state.time,
            latch: self.state.latch,
            relay: self.state.relay,
            valve: self.state.valve,
            piston_extension: self.state.piston_extension,
            elbow_angle: elbow,
            transfer_angle: arm::transfer_angle(g, elbow),
            load_height: g.load_height_at(elbow),
            force_margin: if required > 0.0 { available / required } else { f64::INFINITY },
        })
    }
}

/// Run the command chain over `trace` for `duration` seconds, sampling every
/// `sample_step` seconds.
///
/// Inputs at the same instant apply in trace order; a relay change falls due
/// exactly `relay_delay` after the latch change that scheduled it.
pub fn run_simulation(setup: &SimSetup, trace: &SimTrace, duration: f64, sample_step: f64) -> Result<SimOutcome> {
    setup.validate()?;
    let step = SimTime::from_secs(sample_step)?;
    if step.0 == 0 {
        return Err(Error::domain("run_simulation", "sample step must be positive"));
    }
    let end = SimTime::from_secs(duration)?;
    if let Some(last) = trace.last_time() {
        if last > end {
            return Err(Error::Inconsistent(format!(
                "duration {duration} s ends before the last trace event at {last} s"
            )));
        }
    }
    let samples = end.0 / step.0 + 1;
    if samples > MAX_SAMPLES {
        return Err(Error::domain("run_simulation", format!("{samples} samples exceeds the limit of {MAX_SAMPLES}")));
    }

    let control = &setup.control;
    let found = detections(trace, control.sound_threshold, control.debounce_window);
    let mut inputs: Vec<(SimTime, usize, LatchInput)> =
        found.iter().map(|&(i, t)| (t, i, LatchInput::Detection)).collect();
    for (i, e) in trace.events().iter().enumerate() {
        match e.channel {
            Channel::ManualSwitch => inputs.push((e.time, i, LatchInput::ManualToggle)),
            Channel::Fault(f) => inputs.push((e.time, i, LatchInput::Fault(f))),
            Channel::SoundLevel(_) => {}
        }
    }
    inputs.sort_by_key(|&(t, i, _)| (t, i));

    let full_length = setup.full_length()?;
    let mut engine = Engine {
        setup,
        full_length,
        state: SystemState::initial(setup.cylinder.stroke, setup.geometry.initial_elbow_angle()),
        pending_relay: VecDeque::new(),
        relay_delay: SimTime::from_secs(control.relay_delay)?,
        transitions: Vec::new(),
        lift_start: None,
        lifts: Vec::new(),
        aborted_lifts: 0,
        stall_episodes: 0,
        first_stall: None,
        accepted_toggles: 0,
        ignored: 0,
        rejected: 0,
    };
    let mut rows = Vec::with_capacity(samples as usize);
    let mut next_input = 0;
    for k in 0..samples {
        let sample_at = SimTime(k * step.0);
        loop {
            let input_at = inputs.get(next_input).map(|e| e.0);
            let relay_at = engine.pending_relay.front().map(|e| e.0);
            let now = [Some(sample_at), input_at, relay_at].into_iter().flatten().min().expect("sample time present");
            engine.advance(now)?;
            engine.apply_due_relays(now);
            while let Some(&(at, _, input)) = inputs.get(next_input) {
                if at != now {
                    break;
                }
                engine.apply_input(now, input);
                next_input += 1;
            }
            // Zero relay delay schedules for the current instant.
            engine.apply_due_relays(now);
            if now == sample_at {
                break;
            }
        }
        rows.push(engine.sample()?);
    }

    let summary = summarize(&engine, &rows, found.len(), step, end);
    Ok(SimOutcome {
        trajectory: SimTrajectory { sample_step: step, rows },
        summary,
        transitions: engine.transitions,
    })
}

fn summarize(engine: &Engine<'_>, rows: &[TrajectoryRow], detections: usize, step: SimTime, end: SimTime) -> SimSummary {
    let available = available_force(&engine.setup.cylinder, Side::Rod);
    let limit = TRANSFER_ANGLE_LIMIT_DEG.to_radians();
    let min_margin = rows
        .iter()
        .map(|r| r.force_margin)
        .filter(|m| m.is_finite())
        .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.min(m))));
    SimSummary {
        duration_s: end.as_secs(),
        sample_step_s: step.as_secs(),
        samples: rows.len(),
        detections,
        accepted_toggles: engine.accepted_toggles,
        ignored_detections: engine.ignored,
        rejected_events: engine.rejected,
        lift_count: engine.lifts.len(),
        lifts: engine.lifts.clone(),
        aborted_lifts: engine.aborted_lifts,
        peak_required_force_n: rows
            .iter()
            .map(|r| if r.force_margin.is_finite() { available / r.force_margin } else { 0.0 })
            .fold(0.0, f64::max),
        min_force_margin: min_margin,
        max_transfer_angle_deg: rows.iter().map(|r| r.transfer_angle).fold(f64::MIN, f64::max).to_degrees(),
        transfer_angle_violations: rows.iter().filter(|r| r.transfer_angle > limit).count(),
        stall_episodes: engine.stall_episodes,
        first_stall_s: engine.first_stall.map(SimTime::as_secs),
    }
}
