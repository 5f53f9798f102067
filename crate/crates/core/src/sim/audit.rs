use serde::{Deserialize, Serialize};

use super::TrajectoryRow;
use crate::arm::{self, ArmGeometry, LoadCase};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyAudit {
    /// Work done by the lifting force over retracting moves, joules.
    pub piston_work: f64,
    /// m·g·(last height − first height), joules.
    pub potential_energy: f64,
}

/// Compare cylinder work with the potential energy given to the load.
///
/// Work is summed with the trapezoid rule over consecutive samples where
/// the piston retracts, using the required lifting force at each pose.
pub fn energy_audit(rows: &[TrajectoryRow], geometry: &ArmGeometry, load: &LoadCase) -> Result<EnergyAudit> {
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return Ok(EnergyAudit { piston_work: 0.0, potential_energy: 0.0 });
    };
    let force = |row: &TrajectoryRow| -> Result<f64> {
        Ok(arm::required_piston_force_at(geometry, load, row.elbow_angle)?.f_piston)
    };
    let mut piston_work = 0.0;
    for pair in rows.windows(2) {
        let travel = pair[0].piston_extension - pair[1].piston_extension;
        if travel > 0.0 {
            piston_work += 0.5 * (force(&pair[0])? + force(&pair[1])?) * travel;
        }
    }
    let potential_energy = load.weight() * (last.load_height - first.load_height);
    Ok(EnergyAudit { piston_work, potential_energy })
}
