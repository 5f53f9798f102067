//! TOML design configuration.
//!
//! Every key is optional; an empty document yields the reference design
//! (10 kg per arm, 6 bar, 10 mm rod, AB = 0.15 m, AC = 0.33 m, AD = 0.15 m,
//! 30° forearm, 120° transfer angle, 45° mount). Units are part of the key
//! names. Unknown keys are rejected.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arm::{ArmGeometry, LoadCase, Sweep, TRANSFER_ANGLE_LIMIT_DEG};
use crate::error::{Error, Result};
use crate::sim::{ControlConfig, SimSetup};
use crate::sizing::{BoreCatalog, CylinderSpec, Side};
use crate::structural::{
    Component, ComponentModel, MaterialLibrary, MaterialSpec, PointLoad, StructuralLoadCase, Support,
    DEFAULT_MATERIAL,
};

/// Directory holding `bores.txt` and `materials.txt` overrides.
pub const DATA_DIR_ENV: &str = "EXOARM_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub ab: f64,
    pub ac: f64,
    pub ad: f64,
    pub initial_forearm_angle_deg: f64,
    pub initial_transfer_angle_deg: f64,
    pub mount_angle_deg: f64,
    pub forearm_offset_deg: f64,
    /// Lift arc of the elbow angle ∠BAD, `[end, start]`.
    pub sweep_deg: [f64; 2],
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            ab: 0.15,
            ac: 0.33,
            ad: 0.15,
            initial_forearm_angle_deg: 30.0,
            initial_transfer_angle_deg: 120.0,
            mount_angle_deg: 45.0,
            forearm_offset_deg: 0.0,
            sweep_deg: [42.93, 120.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadConfig {
    pub mass_per_arm_kg: f64,
    pub gravity: f64,
}

impl Default for LoadConfig {
    fn default() -> Self {
        Self {
            mass_per_arm_kg: 10.0,
            gravity: 9.81,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PneumaticsConfig {
    pub pressure_pa: f64,
    pub rod_diameter_m: f64,
    /// Installed cylinder used by the simulator.
    pub bore_m: f64,
    pub stroke_m: f64,
    /// Inline catalog in millimeters; wins over `catalog_file`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog_mm: Option<Vec<f64>>,
    /// Relative paths resolve against the config file's directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog_file: Option<PathBuf>,
}

impl Default for PneumaticsConfig {
    fn default() -> Self {
        Self {
            pressure_pa: 6e5,
            rod_diameter_m: 0.010,
            bore_m: 0.030,
            stroke_m: 0.150,
            catalog_mm: None,
            catalog_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub threshold: f64,
    pub debounce_s: f64,
    pub relay_delay_s: f64,
    pub flow_rate_m3s: f64,
    /// Lowering flow; defaults to `flow_rate_m3s`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extend_flow_rate_m3s: Option<f64>,
    pub manual_override: bool,
}

impl Default for ControlSection {
    fn default() -> Self {
        let c = ControlConfig::default();
        Self {
            threshold: c.sound_threshold,
            debounce_s: c.debounce_window,
            relay_delay_s: c.relay_delay,
            flow_rate_m3s: c.retract_flow_rate,
            extend_flow_rate_m3s: None,
            manual_override: c.manual_override,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub support: Support,
    pub model: ComponentModel,
    pub loads: Vec<PointLoad>,
}

impl ComponentConfig {
    fn from_case(case: StructuralLoadCase) -> Self {
        Self {
            support: case.support,
            model: case.model,
            loads: case.loads,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructuralConfig {
    pub material: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub materials_file: Option<PathBuf>,
    pub back_support: ComponentConfig,
    pub wrist_support: ComponentConfig,
    pub u_section: ComponentConfig,
}

impl Default for StructuralConfig {
    fn default() -> Self {
        let mut cases = StructuralLoadCase::defaults().into_iter();
        let mut next = || ComponentConfig::from_case(cases.next().expect("three default cases"));
        Self {
            material: DEFAULT_MATERIAL.to_string(),
            materials_file: None,
            back_support: next(),
            wrist_support: next(),
            u_section: next(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignConfig {
    pub geometry: GeometryConfig,
    pub load: LoadConfig,
    pub pneumatics: PneumaticsConfig,
    pub control: ControlSection,
    pub structural: StructuralConfig,
    /// Directory relative file references resolve against; not part of the document.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn check(ok: bool, key: &str, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::validation(key, reason()))
    }
}

impl DesignConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: DesignConfig = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            match unknown_field(&message) {
                Some(key) => Error::UnknownKey(key),
                None => Error::Parse {
                    source_name: "config".into(),
                    reason: e.to_string().trim().to_string(),
                },
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        check(g.ab > 0.0, "geometry.ab", || format!("must be positive, got {}", g.ab))?;
        check(g.ac > g.ab, "geometry.ac", || format!("must exceed geometry.ab ({}), got {}", g.ab, g.ac))?;
        check(g.ad > 0.0, "geometry.ad", || format!("must be positive, got {}", g.ad))?;
        check(
            g.initial_forearm_angle_deg.abs() < 90.0,
            "geometry.initial_forearm_angle_deg",
            || format!("must lie in (-90, 90), got {}", g.initial_forearm_angle_deg),
        )?;
        check(
            g.initial_transfer_angle_deg > 0.0 && g.initial_transfer_angle_deg <= TRANSFER_ANGLE_LIMIT_DEG,
            "geometry.initial_transfer_angle_deg",
            || format!("must lie in (0, {TRANSFER_ANGLE_LIMIT_DEG}], got {}", g.initial_transfer_angle_deg),
        )?;
        check(
            (0.0..90.0).contains(&g.mount_angle_deg),
            "geometry.mount_angle_deg",
            || format!("must lie in [0, 90), got {}", g.mount_angle_deg),
        )?;
        check(
            g.forearm_offset_deg >= 0.0 && g.forearm_offset_deg < g.initial_transfer_angle_deg,
            "geometry.forearm_offset_deg",
            || format!("must lie in [0, initial transfer angle), got {}", g.forearm_offset_deg),
        )?;
        let [lo, hi] = g.sweep_deg;
        check(lo > 0.0 && lo <= hi && hi < 180.0, "geometry.sweep_deg", || {
            format!("need 0 < end <= start < 180, got [{lo}, {hi}]")
        })?;

        let l = &self.load;
        check(l.mass_per_arm_kg >= 0.0, "load.mass_per_arm_kg", || {
            format!("must be >= 0, got {}", l.mass_per_arm_kg)
        })?;
        check(l.gravity > 0.0, "load.gravity", || format!("must be positive, got {}", l.gravity))?;

        let p = &self.pneumatics;
        check(p.pressure_pa > 0.0, "pneumatics.pressure_pa", || format!("must be positive, got {}", p.pressure_pa))?;
        check(p.rod_diameter_m > 0.0, "pneumatics.rod_diameter_m", || {
            format!("must be positive, got {}", p.rod_diameter_m)
        })?;
        check(p.bore_m > p.rod_diameter_m, "pneumatics.bore_m", || {
            format!("must exceed the rod diameter, got {}", p.bore_m)
        })?;
        check(p.stroke_m > 0.0, "pneumatics.stroke_m", || format!("must be positive, got {}", p.stroke_m))?;
        if let Some(mm) = &p.catalog_mm {
            BoreCatalog::from_millimeters(mm)?;
        }

        self.control_config().validate()?;

        // Surfaces the remaining cross-field constraints with the domain messages.
        self.geometry().validate()?;
        self.sweep()?;
        Ok(())
    }

    pub fn geometry(&self) -> ArmGeometry {
        let g = &self.geometry;
        ArmGeometry {
            ab: g.ab,
            ac: g.ac,
            ad: g.ad,
            initial_forearm_angle: g.initial_forearm_angle_deg.to_radians(),
            initial_transfer_angle: g.initial_transfer_angle_deg.to_radians(),
            mount_angle: g.mount_angle_deg.to_radians(),
            forearm_offset: g.forearm_offset_deg.to_radians(),
        }
    }

    pub fn sweep(&self) -> Result<Sweep> {
        let [lo, hi] = self.geometry.sweep_deg;
        Sweep::from_degrees(lo, hi)
    }

    pub fn load_case(&self) -> LoadCase {
        LoadCase {
            mass_per_arm: self.load.mass_per_arm_kg,
            gravity: self.load.gravity,
        }
    }

    pub fn cylinder(&self) -> CylinderSpec {
        let p = &self.pneumatics;
        CylinderSpec {
            bore: p.bore_m,
            rod_diameter: p.rod_diameter_m,
            stroke: p.stroke_m,
            supply_pressure: p.pressure_pa,
            acting_side: Side::Rod,
        }
    }

    pub fn control_config(&self) -> ControlConfig {
        let c = &self.control;
        ControlConfig {
            sound_threshold: c.threshold,
            debounce_window: c.debounce_s,
            relay_delay: c.relay_delay_s,
            retract_flow_rate: c.flow_rate_m3s,
            extend_flow_rate: c.extend_flow_rate_m3s.unwrap_or(c.flow_rate_m3s),
            manual_override: c.manual_override,
        }
    }

    pub fn sim_setup(&self) -> Result<SimSetup> {
        Ok(SimSetup {
            geometry: self.geometry(),
            load: self.load_case(),
            cylinder: self.cylinder(),
            control: self.control_config(),
            sweep: self.sweep()?,
        })
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if path.is_relative() => base.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Inline list, then `catalog_file`, then `$EXOARM_DATA_DIR/bores.txt`, then the embedded list.
    pub fn catalog(&self) -> Result<BoreCatalog> {
        if let Some(mm) = &self.pneumatics.catalog_mm {
            return BoreCatalog::from_millimeters(mm);
        }
        if let Some(file) = &self.pneumatics.catalog_file {
            return read_text(&self.resolve(file))?.parse();
        }
        if let Some(file) = data_dir_file("bores.txt") {
            return read_text(&file)?.parse();
        }
        Ok(BoreCatalog::default())
    }

    pub fn material(&self) -> Result<MaterialSpec> {
        let library: MaterialLibrary = if let Some(file) = &self.structural.materials_file {
            read_text(&self.resolve(file))?.parse()?
        } else if let Some(file) = data_dir_file("materials.txt") {
            read_text(&file)?.parse()?
        } else {
            MaterialLibrary::default()
        };
        library.get(&self.structural.material).cloned().ok_or_else(|| {
            Error::validation(
                "structural.material",
                format!(
                    "unknown material `{}` (available: {})",
                    self.structural.material,
                    library.names().collect::<Vec<_>>().join(", ")
                ),
            )
        })
    }

    pub fn structural_cases(&self) -> Vec<StructuralLoadCase> {
        let s = &self.structural;
        [
            (Component::BackSupport, &s.back_support),
            (Component::WristSupport, &s.wrist_support),
            (Component::USection, &s.u_section),
        ]
        .into_iter()
        .map(|(component, c)| StructuralLoadCase {
            component,
            support: c.support,
            model: c.model.clone(),
            loads: c.loads.clone(),
        })
        .collect()
    }
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

fn data_dir_file(name: &str) -> Option<PathBuf> {
    let dir = env::var_os(DATA_DIR_ENV)?;
    let path = Path::new(&dir).join(name);
    path.is_file().then_some(path)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> Result<DesignConfig> {
    let text = read_text(path)?;
    let mut config = DesignConfig::parse(&text)?;
    config.base_dir = path.parent().map(Path::to_path_buf);
    // File-backed data is checked up front so errors surface as input errors.
    config.catalog()?;
    config.material()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_reference_design() {
        let c = DesignConfig::parse("").unwrap();
        assert_eq!(c, DesignConfig::default());
        assert_eq!(c.load.mass_per_arm_kg, 10.0);
        assert_eq!(c.pneumatics.pressure_pa, 6e5);
        assert_eq!(c.pneumatics.rod_diameter_m, 0.010);
        assert_eq!((c.geometry.ab, c.geometry.ac, c.geometry.ad), (0.15, 0.33, 0.15));
        assert_eq!(c.geometry(), ArmGeometry::default());
        assert_eq!(c.sweep().unwrap(), Sweep::reference());
        assert_eq!(c.cylinder(), CylinderSpec::default());
        assert_eq!(c.control_config(), ControlConfig::default());
        assert_eq!(c.structural_cases(), StructuralLoadCase::defaults());
    }

    #[test]
    fn negative_ab_names_key() {
        let err = DesignConfig::parse("[geometry]\nab = -1\n").unwrap_err();
        match err {
            Error::Validation { key, .. } => assert_eq!(key, "geometry.ab"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn single_override_changes_one_field() {
        let c = DesignConfig::parse("[pneumatics]\npressure_pa = 3e5\n").unwrap();
        let mut expected = DesignConfig::default();
        expected.pneumatics.pressure_pa = 3e5;
        assert_eq!(c, expected);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            DesignConfig::parse("[geometry]\nabc = 1\n"),
            Err(Error::UnknownKey(k)) if k == "abc"
        ));
        assert!(matches!(DesignConfig::parse("[extras]\n"), Err(Error::UnknownKey(_))));
        let text = "[structural.u_section]\nsupport = \"fixed-back-face\"\nloads = []\nmodel = { kind = \"pinned_lug\", plate_thickness_m = 0.003, hole_diameter_m = 0.006, shear_planes = 2, color = 1 }\n";
        assert!(DesignConfig::parse(text).is_err());
    }

    #[test]
    fn malformed_document() {
        assert!(matches!(DesignConfig::parse("[geometry\nab = 1"), Err(Error::Parse { .. })));
        assert!(matches!(DesignConfig::parse("[geometry]\nab = \"long\"\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn toml_round_trip() {
        let c = DesignConfig::default();
        assert_eq!(DesignConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn structural_component_override() {
        let text = r#"
[structural.wrist_support]
support = "fixed-hinge-ends"
model = { kind = "cantilever", length_m = 0.2, section = { shape = "box", width_m = 0.02, height_m = 0.02, wall_m = 0.002 } }
loads = [{ magnitude_n = 147.2, angle_from_vertical_deg = 0.0, position_m = 0.2 }]
"#;
        let c = DesignConfig::parse(text).unwrap();
        let cases = c.structural_cases();
        assert_eq!(cases[1].loads.len(), 1);
        assert_eq!(cases[0], StructuralLoadCase::defaults()[0]);
    }

    #[test]
    fn inline_catalog_and_material() {
        let c = DesignConfig::parse("[pneumatics]\ncatalog_mm = [20, 25, 35]\n[structural]\nmaterial = \"al6061-o\"\n").unwrap();
        assert_eq!(c.catalog().unwrap().bores(), &[0.020, 0.025, 0.035]);
        assert_eq!(c.material().unwrap().yield_strength, 5.5e7);
        assert!(DesignConfig::parse("[pneumatics]\ncatalog_mm = [25, 20]\n").is_err());
        let c = DesignConfig::parse("[structural]\nmaterial = \"unobtainium\"\n").unwrap();
        assert!(matches!(c.material(), Err(Error::Validation { key, .. }) if key == "structural.material"));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_config(Path::new("/nonexistent/exo.toml")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/exo.toml"));
    }
}
