use super::{ControlConfig, SystemState, Valve};
use crate::sizing::{available_force, CylinderSpec, Side};

/// Advance the piston by `dt` seconds under flow-limited speed.
///
/// Retraction is driven through the rod-side annulus, extension through the
/// cap. When the driving side cannot supply `required_force` the piston
/// holds still and `stalled` is set.
pub fn cylinder_step(
    state: &SystemState,
    spec: &CylinderSpec,
    config: &ControlConfig,
    required_force: f64,
    dt: f64,
) -> SystemState {
    let mut next = *state;
    let (side, flow, sign) = match state.valve {
        Valve::Retract => (Side::Rod, config.retract_flow_rate, -1.0),
        Valve::Extend => (Side::Cap, config.extend_flow_rate, 1.0),
    };
    if available_force(spec, side) < required_force {
        next.stalled = true;
        return next;
    }
    next.stalled = false;
    let speed = flow / spec.area(side);
    next.piston_extension = (state.piston_extension + sign * speed * dt).clamp(0.0, spec.stroke);
    next
}

/// Piston speed on the driving side for `valve`.
pub(crate) fn speed(spec: &CylinderSpec, config: &ControlConfig, valve: Valve) -> f64 {
    match valve {
        Valve::Retract => config.retract_flow_rate / spec.area(Side::Rod),
        Valve::Extend => config.extend_flow_rate / spec.area(Side::Cap),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn retracting() -> SystemState {
        SystemState {
            valve: Valve::Retract,
            ..SystemState::initial(0.150, 2.0)
        }
    }

    #[test]
    fn flow_limited_speed() {
        let spec = CylinderSpec::default();
        let config = ControlConfig::default();
        assert_relative_eq!(spec.area(Side::Rod), 6.2832e-4, epsilon = 1e-8);
        assert_relative_eq!(speed(&spec, &config, Valve::Retract), 0.1, epsilon = 1e-5);
        let next = cylinder_step(&retracting(), &spec, &config, 264.3, 0.5);
        assert_relative_eq!(next.piston_extension, 0.1, epsilon = 1e-5);
        assert!(!next.stalled);
        // Full stroke in 1.5 s.
        let done = cylinder_step(&retracting(), &spec, &config, 264.3, 1.5 + 1e-4);
        assert_eq!(done.piston_extension, 0.0);
    }

    #[test]
    fn vanishing_flow_holds_position() {
        let spec = CylinderSpec::default();
        let config = ControlConfig {
            retract_flow_rate: 0.0,
            extend_flow_rate: 0.0,
            ..ControlConfig::default()
        };
        let mid = SystemState { piston_extension: 0.07, ..retracting() };
        assert_eq!(cylinder_step(&mid, &spec, &config, 0.0, 1.0).piston_extension, 0.07);
        let mid = SystemState { valve: Valve::Extend, ..mid };
        assert_eq!(cylinder_step(&mid, &spec, &config, 0.0, 1.0).piston_extension, 0.07);
    }

    #[test]
    fn overload_stalls() {
        let spec = CylinderSpec::default();
        let next = cylinder_step(&retracting(), &spec, &ControlConfig::default(), 377.0, 0.1);
        assert!(next.stalled);
        assert_eq!(next.piston_extension, 0.150);
    }

    #[test]
    fn extension_clamps_at_stroke() {
        let spec = CylinderSpec::default();
        let s = SystemState::initial(0.150, 2.0);
        let next = cylinder_step(&s, &spec, &ControlConfig::default(), 0.0, 1.0);
        assert_eq!(next.piston_extension, 0.150);
    }
}
