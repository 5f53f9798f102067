//! Discrete-event simulation of the command chain: sound sensor, toggle
//! latch, relay, 5/2 valve and the double-acting cylinder driving the arm.
//!
//! Time is kept as integer nanoseconds so relay lags and sample instants
//! are exact and runs are bit-for-bit reproducible.

mod audit;
mod control;
mod cylinder;
mod engine;
mod trace;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use audit::{energy_audit, EnergyAudit};
pub use control::{detect_sound, step_latch, Disposition, LatchInput};
pub use cylinder::cylinder_step;
pub use engine::{
    run_simulation, LiftRecord, SimOutcome, SimSetup, SimSummary, SimTrajectory, Signal, TrajectoryRow,
    Transition, TRAJECTORY_HEADER,
};
pub use trace::{Channel, SimTrace, TraceEvent, TRACE_HEADER};

/// Simulation clock, nanoseconds since start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_secs(secs: f64) -> Result<Self> {
        if !(secs >= 0.0 && secs.is_finite() && secs < 1e9) {
            return Err(Error::domain("time", format!("{secs} s is not a valid simulation time")));
        }
        Ok(SimTime((secs * 1e9).round() as u64))
    }

    pub fn as_secs(self) -> f64 {
        self.0 as f64 / 1e9
    }

    pub fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl std::ops::Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_secs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    /// Normalized detection level in (0, 1].
    pub sound_threshold: f64,
    /// Refractory period after an accepted detection, seconds.
    pub debounce_window: f64,
    /// Latch change to relay change, seconds.
    pub relay_delay: f64,
    /// Flow-control limit while retracting (lifting), m³/s.
    pub retract_flow_rate: f64,
    /// Flow-control limit while extending (lowering), m³/s.
    pub extend_flow_rate: f64,
    pub manual_override: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            sound_threshold: 0.5,
            debounce_window: 0.3,
            relay_delay: 0.01,
            retract_flow_rate: 6.2832e-5,
            extend_flow_rate: 6.2832e-5,
            manual_override: true,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sound_threshold > 0.0 && self.sound_threshold <= 1.0) {
            return Err(Error::validation(
                "control.threshold",
                format!("must be in (0, 1], got {}", self.sound_threshold),
            ));
        }
        for (key, v) in [("control.debounce_s", self.debounce_window), ("control.relay_delay_s", self.relay_delay)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(key, format!("must be >= 0, got {v}")));
            }
        }
        for (key, v) in [
            ("control.flow_rate_m3s", self.retract_flow_rate),
            ("control.extend_flow_rate_m3s", self.extend_flow_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(key, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Latch {
    Low,
    High,
}

impl Latch {
    pub fn toggled(self) -> Latch {
        match self {
            Latch::Low => Latch::High,
            Latch::High => Latch::Low,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relay {
    Open,
    Closed,
}

impl From<Latch> for Relay {
    fn from(latch: Latch) -> Relay {
        match latch {
            Latch::Low => Relay::Open,
            Latch::High => Relay::Closed,
        }
    }
}

/// The two positions of the 5/2 valve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valve {
    Extend,
    Retract,
}

impl From<Relay> for Valve {
    /// The energized coil routes supply to the rod side, which lifts.
    fn from(relay: Relay) -> Valve {
        match relay {
            Relay::Open => Valve::Extend,
            Relay::Closed => Valve::Retract,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    None,
    SensorStuck,
}

macro_rules! display_as {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }
    };
}

display_as!(Latch { Low => "low", High => "high" });
display_as!(Relay { Open => "open", Closed => "closed" });
display_as!(Valve { Extend => "extend", Retract => "retract" });
display_as!(Fault { None => "none", SensorStuck => "sensor_stuck" });

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub latch: Latch,
    pub relay: Relay,
    pub valve: Valve,
    /// Distance from full retraction, meters in [0, stroke].
    pub piston_extension: f64,
    pub elbow_angle: f64,
    pub time: SimTime,
    pub fault: Fault,
    /// Set when the last cylinder step could not overcome the load.
    pub stalled: bool,
}

impl SystemState {
    /// Latch low, relay open, piston fully extended at the lift-start pose.
    pub fn initial(stroke: f64, elbow_angle: f64) -> Self {
        Self {
            latch: Latch::Low,
            relay: Relay::Open,
            valve: Valve::Extend,
            piston_extension: stroke,
            elbow_angle,
            time: SimTime::ZERO,
            fault: Fault::None,
            stalled: false,
        }
    }
}
