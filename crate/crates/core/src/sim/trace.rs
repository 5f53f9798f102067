use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{Fault, SimTime};
use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 3] = ["time_s", "channel", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Normalized sound envelope in [0, 1], held until the next sample.
    SoundLevel(f64),
    /// Press of the manual toggle switch.
    ManualSwitch,
    Fault(Fault),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: SimTime,
    pub channel: Channel,
}

/// Time-ordered scripted inputs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimTrace {
    events: Vec<TraceEvent>,
}

impl SimTrace {
    pub fn new(events: Vec<TraceEvent>) -> Result<Self> {
        for (i, pair) in events.windows(2).enumerate() {
            if pair[1].time < pair[0].time {
                return Err(Error::Trace {
                    line: i + 2,
                    reason: "event times must be nondecreasing".into(),
                });
            }
        }
        for (i, e) in events.iter().enumerate() {
            if let Channel::SoundLevel(v) = e.channel {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Trace {
                        line: i + 1,
                        reason: format!("sound level {v} outside [0, 1]"),
                    });
                }
            }
        }
        Ok(Self { events })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Convenience for tests and scripted runs: `(seconds, channel)` pairs.
    pub fn from_secs(events: &[(f64, Channel)]) -> Result<Self> {
        let events = events
            .iter()
            .map(|&(t, channel)| Ok(TraceEvent { time: SimTime::from_secs(t)?, channel }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(events)
    }

    /// Square voice pulses of `width` seconds at `level`, starting at each time in `starts`.
    pub fn pulses(starts: &[f64], width: f64, level: f64) -> Result<Self> {
        let mut events = Vec::with_capacity(starts.len() * 2);
        for &t in starts {
            events.push((t, Channel::SoundLevel(level)));
            events.push((t + width, Channel::SoundLevel(0.0)));
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::from_secs(&events)
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last_time(&self) -> Option<SimTime> {
        self.events.last().map(|e| e.time)
    }

    /// Parse the `time_s,channel,value` CSV format.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Trace { line: 1, reason: e.to_string() })?;
        if header.iter().collect::<Vec<_>>() != TRACE_HEADER {
            return Err(Error::Trace {
                line: 1,
                reason: format!("expected header `{}`", TRACE_HEADER.join(",")),
            });
        }
        let mut events = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Trace {
                line: e.position().map_or(0, |p| p.line() as usize),
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let bad = |reason: String| Error::Trace { line, reason };
            let time: f64 = record[0]
                .parse()
                .map_err(|_| bad(format!("`{}` is not a time", &record[0])))?;
            let time = SimTime::from_secs(time).map_err(|e| bad(e.to_string()))?;
            let value = &record[2];
            let channel = match &record[1] {
                "sound_level" => {
                    let level: f64 = value
                        .parse()
                        .map_err(|_| bad(format!("`{value}` is not a sound level")))?;
                    if !(0.0..=1.0).contains(&level) {
                        return Err(bad(format!("sound level {level} outside [0, 1]")));
                    }
                    Channel::SoundLevel(level)
                }
                "manual_switch" => match value {
                    "1" => Channel::ManualSwitch,
                    // Releases carry no action.
                    "0" => continue,
                    other => return Err(bad(format!("manual_switch value `{other}`, expected 1 or 0"))),
                },
                "fault" => match value {
                    "sensor_stuck" => Channel::Fault(Fault::SensorStuck),
                    "none" | "clear" => Channel::Fault(Fault::None),
                    other => return Err(bad(format!("unknown fault `{other}`"))),
                },
                other => return Err(bad(format!("unknown channel `{other}`"))),
            };
            if events.last().is_some_and(|e: &TraceEvent| e.time > time) {
                return Err(bad("event times must be nondecreasing".into()));
            }
            events.push(TraceEvent { time, channel });
        }
        Ok(Self { events })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", TRACE_HEADER.join(","));
        for e in &self.events {
            out.push_str(&format!("{},{}\n", e.time, e.channel));
        }
        out
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::SoundLevel(v) => write!(f, "sound_level,{v}"),
            Channel::ManualSwitch => f.write_str("manual_switch,1"),
            Channel::Fault(fault) => write!(f, "fault,{fault}"),
        }
    }
}
