//! Planar quasi-static model of one exoskeleton arm.
//!
//! Points: `A` is the elbow pivot, `B` the rod attachment on the forearm,
//! `C` the load point at the hand and `D` the cylinder base mount on the
//! upper arm. The elbow angle used throughout is the included angle ∠BAD,
//! so the piston (segment BD) length follows from the law of cosines.
//!
//! Forearm inclination is measured from the horizontal, positive below it.
//! With the upper arm hanging vertically the inclination is `∠BAD - 90°`
//! shifted by the fixed forearm offset, so lifting the load (retracting
//! the piston) closes ∠BAD and raises `C`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the transfer angle ∠DAC.
pub const TRANSFER_ANGLE_LIMIT_DEG: f64 = 135.0;

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmGeometry {
    /// Elbow pivot A to rod attachment B, meters.
    pub ab: f64,
    /// Elbow pivot A to load point C, meters.
    pub ac: f64,
    /// Elbow pivot A to cylinder base mount D, meters.
    pub ad: f64,
    /// Inclination of AC below horizontal at lift start, radians.
    pub initial_forearm_angle: f64,
    /// ∠DAC at lift start, radians.
    pub initial_transfer_angle: f64,
    /// Angle between the cylinder axis and the perpendicular-to-AC force at B.
    pub mount_angle: f64,
    /// Fixed angle ∠BAC between the rod attachment ray and the forearm ray.
    pub forearm_offset: f64,
}

impl Default for ArmGeometry {
    fn default() -> Self {
        Self {
            ab: 0.15,
            ac: 0.33,
            ad: 0.15,
            initial_forearm_angle: 30f64.to_radians(),
            initial_transfer_angle: 120f64.to_radians(),
            mount_angle: 45f64.to_radians(),
            forearm_offset: 0.0,
        }
    }
}

impl ArmGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.ab > 0.0 && self.ab.is_finite()) {
            return Err(Error::Geometry(format!("ab must be positive, got {}", self.ab)));
        }
        if !(self.ac.is_finite() && self.ab < self.ac) {
            return Err(Error::Geometry(format!(
                "rod attachment must lie between elbow and hand (ab = {} m, ac = {} m)",
                self.ab, self.ac
            )));
        }
        if !(self.ad > 0.0 && self.ad.is_finite()) {
            return Err(Error::Geometry(format!("ad must be positive, got {}", self.ad)));
        }
        let limit = TRANSFER_ANGLE_LIMIT_DEG.to_radians();
        if !(self.initial_transfer_angle > 0.0 && self.initial_transfer_angle <= limit) {
            return Err(Error::Geometry(format!(
                "initial transfer angle {:.3}° outside (0°, {TRANSFER_ANGLE_LIMIT_DEG}°]",
                self.initial_transfer_angle.to_degrees()
            )));
        }
        if !(0.0..FRAC_PI_2).contains(&self.mount_angle) {
            return Err(Error::Geometry(format!(
                "mount angle {:.3}° outside [0°, 90°)",
                self.mount_angle.to_degrees()
            )));
        }
        if !(self.forearm_offset >= 0.0 && self.forearm_offset < self.initial_transfer_angle) {
            return Err(Error::Geometry(format!(
                "forearm offset {:.3}° must be nonnegative and below the initial transfer angle",
                self.forearm_offset.to_degrees()
            )));
        }
        Ok(())
    }

    /// ∠BAD at lift start.
    pub fn initial_elbow_angle(&self) -> f64 {
        self.initial_transfer_angle - self.forearm_offset
    }

    /// Forearm inclination below horizontal when the elbow angle is `elbow_angle`.
    pub fn forearm_angle_at(&self, elbow_angle: f64) -> f64 {
        self.initial_forearm_angle - (self.initial_elbow_angle() - elbow_angle)
    }

    /// Height of the load point C above the elbow pivot.
    pub fn load_height_at(&self, elbow_angle: f64) -> f64 {
        -self.ac * self.forearm_angle_at(elbow_angle).sin()
    }

    /// Shortest and longest piston lengths the linkage can take.
    pub fn reachable_lengths(&self) -> (f64, f64) {
        ((self.ab - self.ad).abs(), self.ab + self.ad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    pub mass_per_arm: f64,
    pub gravity: f64,
}

impl Default for LoadCase {
    fn default() -> Self {
        Self {
            mass_per_arm: 10.0,
            gravity: STANDARD_GRAVITY,
        }
    }
}

impl LoadCase {
    pub fn new(mass_per_arm: f64, gravity: f64) -> Result<Self> {
        let load = Self {
            mass_per_arm,
            gravity,
        };
        load.validate()?;
        Ok(load)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass_per_arm >= 0.0 && self.mass_per_arm.is_finite()) {
            return Err(Error::domain("load", format!("mass per arm must be >= 0, got {}", self.mass_per_arm)));
        }
        if !(self.gravity > 0.0 && self.gravity.is_finite()) {
            return Err(Error::domain("load", format!("gravity must be > 0, got {}", self.gravity)));
        }
        Ok(())
    }

    /// Both arms together.
    pub fn total_added_capacity(&self) -> f64 {
        2.0 * self.mass_per_arm
    }

    /// Weight of the carried mass, F₀.
    pub fn weight(&self) -> f64 {
        self.mass_per_arm * self.gravity
    }
}

/// Forces from the hand load to the cylinder axis, all in newtons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceChain {
    /// Vertical load at C.
    pub f0: f64,
    /// Component of `f0` perpendicular to AC.
    pub f1: f64,
    /// Perpendicular force needed at B; its reaction F₂′ has the same magnitude.
    pub f2: f64,
    /// Axial cylinder force.
    pub f_piston: f64,
}

impl ForceChain {
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            f0: self.f0 * k,
            f1: self.f1 * k,
            f2: self.f2 * k,
            f_piston: self.f_piston * k,
        }
    }
}

/// Closed angular range of elbow angles ∠BAD, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
}

impl Sweep {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::domain("sweep", format!("need min <= max, got [{min}, {max}]")));
        }
        if !(min > 0.0 && max < std::f64::consts::PI) {
            return Err(Error::domain(
                "sweep",
                format!(
                    "sweep [{:.3}°, {:.3}°] must lie within (0°, 180°)",
                    min.to_degrees(),
                    max.to_degrees()
                ),
            ));
        }
        Ok(Self { min, max })
    }

    pub fn from_degrees(min: f64, max: f64) -> Result<Self> {
        Self::new(min.to_radians(), max.to_radians())
    }

    /// Lift arc of the default arm: 120° down to 42.93°, 150 mm of travel.
    pub fn reference() -> Self {
        Self {
            min: 42.93f64.to_radians(),
            max: 120f64.to_radians(),
        }
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }
}

/// Component of a vertical load perpendicular to a forearm inclined at `forearm_angle`.
pub fn perpendicular_load(f0: f64, forearm_angle: f64) -> Result<f64> {
    if !(f0 >= 0.0) {
        return Err(Error::domain("perpendicular_load", format!("load must be >= 0, got {f0}")));
    }
    if !(forearm_angle.abs() < FRAC_PI_2) {
        return Err(Error::domain(
            "perpendicular_load",
            format!(
                "forearm inclination {:.3}° outside (-90°, 90°)",
                forearm_angle.to_degrees()
            ),
        ));
    }
    Ok(f0 * forearm_angle.cos())
}

/// Force at B balancing `f1` at C about the elbow.
pub fn lever_force(f1: f64, ab: f64, ac: f64) -> Result<f64> {
    if !(ab > 0.0 && ab <= ac) {
        return Err(Error::Geometry(format!(
            "lever needs 0 < ab <= ac, got ab = {ab} m, ac = {ac} m"
        )));
    }
    if !(f1 >= 0.0) {
        return Err(Error::domain("lever_force", format!("load must be >= 0, got {f1}")));
    }
    Ok(f1 * (ac / ab))
}

/// Axial cylinder force whose component along F₂′ equals `f2_prime`.
pub fn piston_force(f2_prime: f64, mount_angle: f64) -> Result<f64> {
    if !(f2_prime >= 0.0) {
        return Err(Error::domain("piston_force", format!("force must be >= 0, got {f2_prime}")));
    }
    if !(0.0..FRAC_PI_2).contains(&mount_angle) {
        return Err(Error::domain(
            "piston_force",
            format!("mount angle {:.3}° outside [0°, 90°)", mount_angle.to_degrees()),
        ));
    }
    Ok(f2_prime / mount_angle.cos())
}

/// Force chain at the initial pose.
pub fn required_piston_force(geometry: &ArmGeometry, load: &LoadCase) -> Result<ForceChain> {
    required_piston_force_at(geometry, load, geometry.initial_elbow_angle())
}

/// Force chain with the forearm rotated to elbow angle `elbow_angle`.
pub fn required_piston_force_at(
    geometry: &ArmGeometry,
    load: &LoadCase,
    elbow_angle: f64,
) -> Result<ForceChain> {
    load.validate()?;
    let f0 = load.weight();
    let f1 = perpendicular_load(f0, geometry.forearm_angle_at(elbow_angle))?;
    let f2 = lever_force(f1, geometry.ab, geometry.ac)?;
    let f_piston = piston_force(f2, geometry.mount_angle)?;
    Ok(ForceChain { f0, f1, f2, f_piston })
}

/// Length of BD with included angle ∠BAD = `elbow_angle`.
pub fn piston_length(geometry: &ArmGeometry, elbow_angle: f64) -> Result<f64> {
    let (ab, ad) = (geometry.ab, geometry.ad);
    if !(ab > 0.0 && ad > 0.0) {
        return Err(Error::Geometry(format!(
            "link lengths must be positive (ab = {ab} m, ad = {ad} m)"
        )));
    }
    if !(elbow_angle > 0.0 && elbow_angle < std::f64::consts::PI) {
        return Err(Error::domain(
            "piston_length",
            format!("elbow angle {:.3}° outside (0°, 180°)", elbow_angle.to_degrees()),
        ));
    }
    let sq = ab * ab + ad * ad - 2.0 * ab * ad * elbow_angle.cos();
    Ok(sq.max(0.0).sqrt())
}

/// Inverse of [`piston_length`].
pub fn elbow_angle_from_piston(geometry: &ArmGeometry, length: f64) -> Result<f64> {
    let (ab, ad) = (geometry.ab, geometry.ad);
    if !(ab > 0.0 && ad > 0.0) {
        return Err(Error::Geometry(format!(
            "link lengths must be positive (ab = {ab} m, ad = {ad} m)"
        )));
    }
    let (min, max) = geometry.reachable_lengths();
    // Float noise at the fully folded/unfolded ends.
    let slack = 1e-12 * max;
    if !(length >= min - slack && length <= max + slack) {
        return Err(Error::Range { length, min, max });
    }
    let cos = (ab * ab + ad * ad - length * length) / (2.0 * ab * ad);
    Ok(cos.clamp(-1.0, 1.0).acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferCheck {
    pub transfer_angle: f64,
    pub pass: bool,
    /// Degrees left before the cap; negative when violated.
    pub margin_deg: f64,
}

/// Transfer angle ∠DAC at a pose against the 135° cap; the cap itself passes.
pub fn check_transfer_angle(geometry: &ArmGeometry, elbow_angle: f64) -> TransferCheck {
    let transfer_angle = transfer_angle(geometry, elbow_angle);
    let headroom = TRANSFER_ANGLE_LIMIT_DEG.to_radians() - transfer_angle;
    TransferCheck {
        transfer_angle,
        pass: headroom >= 0.0,
        margin_deg: headroom.to_degrees(),
    }
}

pub fn transfer_angle(geometry: &ArmGeometry, elbow_angle: f64) -> f64 {
    elbow_angle + geometry.forearm_offset
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub elbow_angle: f64,
    pub forces: ForceChain,
    pub transfer_angle: f64,
}

/// Required forces along the lift, from `sweep.max` (lift start) down to `sweep.min`.
///
/// `steps` counts the sampled poses including both ends; a single step
/// evaluates only the lift start.
pub fn torque_profile(
    geometry: &ArmGeometry,
    load: &LoadCase,
    sweep: Sweep,
    steps: usize,
) -> Result<Vec<ProfileRow>> {
    if steps == 0 {
        return Err(Error::domain("torque_profile", "steps must be >= 1"));
    }
    let sweep = Sweep::new(sweep.min, sweep.max)?;
    (0..steps)
        .map(|i| {
            let elbow_angle = if steps == 1 {
                sweep.max
            } else {
                sweep.max - sweep.span() * (i as f64) / ((steps - 1) as f64)
            };
            Ok(ProfileRow {
                elbow_angle,
                forces: required_piston_force_at(geometry, load, elbow_angle)?,
                transfer_angle: transfer_angle(geometry, elbow_angle),
            })
        })
        .collect()
}
