//! Closed-form stress checks for the frame components.
//!
//! Cantilever bending with superposed point loads covers the back and
//! wrist supports; pin shear and plate bearing covers the U-section. The
//! published FEA maxima are carried as reference data and compared by
//! ratio only; pass/fail comes from the factor of safety alone.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shipped material table: `name, yield Pa, modulus Pa` per line.
pub const DEFAULT_MATERIALS: &str = include_str!("../data/materials.txt");

pub const DEFAULT_MATERIAL: &str = "al6061-t6";

/// Minimum acceptable factor of safety.
pub const REQUIRED_FOS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    SolidRectangle { width_m: f64, height_m: f64 },
    /// Square or rectangular tube of uniform wall.
    Box { width_m: f64, height_m: f64, wall_m: f64 },
    /// Equal or unequal angle; `height_m` is the leg in the bending plane.
    LSection { width_m: f64, height_m: f64, thickness_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionProperties {
    pub shape: Shape,
    /// m²
    pub area: f64,
    /// Second moment about the horizontal centroidal axis, m⁴.
    pub second_moment: f64,
    /// Distance from the neutral axis to the farthest fiber, m.
    pub extreme_fiber: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{name} must be positive, got {v} m")))
    }
}

pub fn section_properties(shape: &Shape) -> Result<SectionProperties> {
    let (area, second_moment, extreme_fiber) = match *shape {
        Shape::SolidRectangle { width_m: b, height_m: h } => {
            positive("width", b)?;
            positive("height", h)?;
            (b * h, b * h.powi(3) / 12.0, h / 2.0)
        }
        Shape::Box { width_m: b, height_m: h, wall_m: t } => {
            positive("width", b)?;
            positive("height", h)?;
            positive("wall", t)?;
            if !(2.0 * t < b && 2.0 * t < h) {
                return Err(Error::Dimension(format!(
                    "wall {t} m leaves no cavity in a {b} x {h} m box"
                )));
            }
            let (bi, hi) = (b - 2.0 * t, h - 2.0 * t);
            (b * h - bi * hi, (b * h.powi(3) - bi * hi.powi(3)) / 12.0, h / 2.0)
        }
        Shape::LSection { width_m: b, height_m: h, thickness_m: t } => {
            positive("width", b)?;
            positive("height", h)?;
            positive("thickness", t)?;
            if !(2.0 * t < b && 2.0 * t < h) {
                return Err(Error::Dimension(format!(
                    "thickness {t} m too large for a {b} x {h} m angle"
                )));
            }
            // Vertical leg (t x h) plus the horizontal flange ((b - t) x t) at the bottom.
            let a1 = t * h;
            let y1 = h / 2.0;
            let a2 = (b - t) * t;
            let y2 = t / 2.0;
            let area = a1 + a2;
            let ybar = (a1 * y1 + a2 * y2) / area;
            let i = t * h.powi(3) / 12.0
                + a1 * (y1 - ybar).powi(2)
                + (b - t) * t.powi(3) / 12.0
                + a2 * (y2 - ybar).powi(2);
            (area, i, ybar.max(h - ybar))
        }
    };
    Ok(SectionProperties {
        shape: *shape,
        area,
        second_moment,
        extreme_fiber,
    })
}

/// Stress at the root and deflection at the load for a cantilever loaded at `arm_length`.
///
/// Only the component transverse to the beam bends it; a load at 90° from
/// vertical is purely axial here and returns zero for both.
pub fn cantilever_bending(
    load: f64,
    angle_from_vertical_deg: f64,
    arm_length: f64,
    section: &SectionProperties,
    modulus: f64,
) -> Result<(f64, f64)> {
    positive("arm length", arm_length)?;
    if !(modulus > 0.0) {
        return Err(Error::Dimension(format!("elastic modulus must be positive, got {modulus} Pa")));
    }
    let w = transverse(load, angle_from_vertical_deg);
    let stress = w * arm_length * section.extreme_fiber / section.second_moment;
    let deflection = w * arm_length.powi(3) / (3.0 * modulus * section.second_moment);
    Ok((stress, deflection))
}

fn transverse(load: f64, angle_from_vertical_deg: f64) -> f64 {
    if angle_from_vertical_deg.abs() == 90.0 {
        0.0
    } else {
        load * angle_from_vertical_deg.to_radians().cos()
    }
}

fn axial(load: f64, angle_from_vertical_deg: f64) -> f64 {
    load * angle_from_vertical_deg.to_radians().sin()
}

/// Pin shear and plate bearing stresses for a pinned lug.
pub fn pin_shear_bearing(
    load: f64,
    plate_thickness: f64,
    hole_diameter: f64,
    shear_planes: u32,
) -> Result<(f64, f64)> {
    positive("plate thickness", plate_thickness)?;
    positive("hole diameter", hole_diameter)?;
    if !(1..=2).contains(&shear_planes) {
        return Err(Error::Dimension(format!("shear planes must be 1 or 2, got {shear_planes}")));
    }
    let pin_area = std::f64::consts::PI / 4.0 * hole_diameter * hole_diameter;
    let shear = load / (f64::from(shear_planes) * pin_area);
    let bearing = load / (hole_diameter * plate_thickness);
    Ok((shear, bearing))
}

pub fn von_mises(normal_stress: f64, shear_stress: f64) -> f64 {
    (normal_stress * normal_stress + 3.0 * shear_stress * shear_stress).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    pub yield_strength: f64,
    pub elastic_modulus: f64,
}

impl MaterialSpec {
    pub fn new(name: impl Into<String>, yield_strength: f64, elastic_modulus: f64) -> Result<Self> {
        let name = name.into();
        if !(yield_strength > 0.0 && elastic_modulus > 0.0) {
            return Err(Error::validation(
                format!("material.{name}"),
                "yield strength and modulus must be positive",
            ));
        }
        Ok(Self {
            name,
            yield_strength,
            elastic_modulus,
        })
    }
}

impl Default for MaterialSpec {
    fn default() -> Self {
        MaterialLibrary::default()
            .get(DEFAULT_MATERIAL)
            .expect("embedded materials include the default")
            .clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialLibrary {
    materials: Vec<MaterialSpec>,
}

impl Default for MaterialLibrary {
    fn default() -> Self {
        DEFAULT_MATERIALS.parse().expect("embedded material table is valid")
    }
}

impl MaterialLibrary {
    pub fn get(&self, name: &str) -> Option<&MaterialSpec> {
        self.materials.iter().find(|m| m.name.eq_ignore_ascii_case(name))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.iter().map(|m| m.name.as_str())
    }
}

impl FromStr for MaterialLibrary {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut materials = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::Parse {
                source_name: "material table".into(),
                reason: format!("line {}: {reason}", i + 1),
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [name, yield_pa, modulus_pa] = fields[..] else {
                return Err(bad("expected `name, yield_pa, modulus_pa`"));
            };
            let yield_pa: f64 = yield_pa.parse().map_err(|_| bad("yield strength is not a number"))?;
            let modulus_pa: f64 = modulus_pa.parse().map_err(|_| bad("modulus is not a number"))?;
            materials.push(MaterialSpec::new(name, yield_pa, modulus_pa)?);
        }
        if materials.is_empty() {
            return Err(Error::Parse {
                source_name: "material table".into(),
                reason: "no materials defined".into(),
            });
        }
        Ok(Self { materials })
    }
}

/// yield / stress; `None` when the stress is zero.
pub fn factor_of_safety(von_mises_stress: f64, material: &MaterialSpec) -> Option<f64> {
    (von_mises_stress > 0.0).then(|| material.yield_strength / von_mises_stress)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    BackSupport,
    WristSupport,
    USection,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::BackSupport, Component::WristSupport, Component::USection];
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::BackSupport => "back-support",
            Component::WristSupport => "wrist-support",
            Component::USection => "u-section",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointLoad {
    pub magnitude_n: f64,
    pub angle_from_vertical_deg: f64,
    /// Distance from the fixed support; ignored by the lug model.
    #[serde(default)]
    pub position_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    FixedEdge,
    FixedHingeEnds,
    FixedBackFace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentModel {
    Cantilever { length_m: f64, section: Shape },
    PinnedLug { plate_thickness_m: f64, hole_diameter_m: f64, shear_planes: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralLoadCase {
    pub component: Component,
    pub support: Support,
    pub model: ComponentModel,
    pub loads: Vec<PointLoad>,
}

impl StructuralLoadCase {
    /// Default load cases. Section sizes come from the 3 mm sheet and
    /// 12x12x2 mm box stock used for the frame.
    pub fn defaults() -> Vec<StructuralLoadCase> {
        vec![
            StructuralLoadCase {
                component: Component::BackSupport,
                support: Support::FixedEdge,
                model: ComponentModel::Cantilever {
                    length_m: 0.04,
                    section: Shape::LSection { width_m: 0.03, height_m: 0.03, thickness_m: 0.003 },
                },
                loads: vec![PointLoad { magnitude_n: 98.1, angle_from_vertical_deg: 45.0, position_m: 0.04 }],
            },
            StructuralLoadCase {
                component: Component::WristSupport,
                support: Support::FixedHingeEnds,
                model: ComponentModel::Cantilever {
                    length_m: 0.25,
                    section: Shape::Box { width_m: 0.012, height_m: 0.012, wall_m: 0.002 },
                },
                loads: vec![
                    PointLoad { magnitude_n: 98.1, angle_from_vertical_deg: 45.0, position_m: 0.10 },
                    PointLoad { magnitude_n: 147.2, angle_from_vertical_deg: 0.0, position_m: 0.25 },
                ],
            },
            StructuralLoadCase {
                component: Component::USection,
                support: Support::FixedBackFace,
                model: ComponentModel::PinnedLug {
                    plate_thickness_m: 0.003,
                    hole_diameter_m: 0.006,
                    shear_planes: 2,
                },
                loads: vec![PointLoad { magnitude_n: 98.1, angle_from_vertical_deg: 45.0, position_m: 0.0 }],
            },
        ]
    }
}

/// One row of the published static-structural summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeaRow {
    pub component: Component,
    pub deformation_max_m: f64,
    pub deformation_min_m: f64,
    pub strain_max: f64,
    pub strain_min: f64,
    pub von_mises_max_pa: f64,
    pub von_mises_min_pa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaReference {
    pub rows: Vec<FeaRow>,
}

impl Default for FeaReference {
    fn default() -> Self {
        Self {
            rows: vec![
                FeaRow {
                    component: Component::BackSupport,
                    deformation_max_m: 1.52E-05,
                    deformation_min_m: 0.0,
                    strain_max: 5.76E-05,
                    strain_min: 1.05E-26,
                    von_mises_max_pa: 3.90E+06,
                    von_mises_min_pa: 3.36E-16,
                },
                FeaRow {
                    component: Component::WristSupport,
                    deformation_max_m: 1.04E-03,
                    deformation_min_m: 0.0,
                    strain_max: 6.95E-04,
                    strain_min: 5.73E-07,
                    von_mises_max_pa: 4.91E+07,
                    von_mises_min_pa: 2601.3,
                },
                FeaRow {
                    component: Component::USection,
                    deformation_max_m: 1.72E-06,
                    deformation_min_m: 0.0,
                    strain_max: 2.71E-04,
                    strain_min: 7.97E-08,
                    von_mises_max_pa: 1.93E+07,
                    von_mises_min_pa: 5025.7,
                },
            ],
        }
    }
}

impl FeaReference {
    pub fn row(&self, component: Component) -> Option<&FeaRow> {
        self.rows.iter().find(|r| r.component == component)
    }

    /// Tab-separated dump with the values as published.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "component\tdeformation_max_m\tdeformation_min_m\tstrain_max\tstrain_min\tvon_mises_max_pa\tvon_mises_min_pa\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{:.2E}\t{}\t{:.2E}\t{:.2E}\t{:.2E}\t{}\n",
                r.component,
                r.deformation_max_m,
                r.deformation_min_m,
                r.strain_max,
                r.strain_min,
                r.von_mises_max_pa,
                r.von_mises_min_pa
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentResult {
    pub component: Component,
    pub normal_stress_pa: f64,
    pub shear_stress_pa: f64,
    pub von_mises_pa: f64,
    /// Free-end deflection; `None` for the lug model.
    pub deflection_m: Option<f64>,
    pub factor_of_safety: Option<f64>,
    /// FoS >= 5, or nothing stressed at all.
    pub pass: bool,
    /// analytical / FEA peak von Mises, informational only.
    pub fea_ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub material: MaterialSpec,
    pub required_fos: f64,
    pub components: Vec<ComponentResult>,
}

impl StructuralReport {
    pub fn pass(&self) -> bool {
        self.components.iter().all(|c| c.pass)
    }
}

struct Stresses {
    normal: f64,
    shear: f64,
    von_mises: f64,
    deflection: Option<f64>,
}

fn evaluate(case: &StructuralLoadCase, material: &MaterialSpec) -> Result<Stresses> {
    if case.loads.is_empty() {
        return Err(Error::Dimension(format!("{} has no loads", case.component)));
    }
    if let Some(l) = case.loads.iter().find(|l| !(l.magnitude_n >= 0.0)) {
        return Err(Error::Dimension(format!("negative load magnitude {} N", l.magnitude_n)));
    }
    match &case.model {
        ComponentModel::Cantilever { length_m, section } => {
            positive("beam length", *length_m)?;
            let props = section_properties(section)?;
            let (mut bending, mut axial_force, mut shear_force, mut tip) = (0.0, 0.0, 0.0, 0.0);
            for load in &case.loads {
                let a = load.position_m;
                if !(a > 0.0 && a <= *length_m) {
                    return Err(Error::Dimension(format!(
                        "load position {a} m outside (0, {length_m}] m"
                    )));
                }
                let (stress, _) = cantilever_bending(
                    load.magnitude_n,
                    load.angle_from_vertical_deg,
                    a,
                    &props,
                    material.elastic_modulus,
                )?;
                bending += stress;
                let w = transverse(load.magnitude_n, load.angle_from_vertical_deg);
                shear_force += w;
                axial_force += axial(load.magnitude_n, load.angle_from_vertical_deg);
                tip += w * a * a * (3.0 * length_m - a)
                    / (6.0 * material.elastic_modulus * props.second_moment);
            }
            let normal = bending.abs() + axial_force.abs() / props.area;
            let shear = shear_force.abs() / props.area;
            Ok(Stresses {
                normal,
                shear,
                von_mises: von_mises(normal, shear),
                deflection: Some(tip.abs()),
            })
        }
        ComponentModel::PinnedLug { plate_thickness_m, hole_diameter_m, shear_planes } => {
            let total: f64 = case.loads.iter().map(|l| l.magnitude_n).sum();
            let (shear, bearing) = pin_shear_bearing(total, *plate_thickness_m, *hole_diameter_m, *shear_planes)?;
            // Bearing governs the plate, shear the pin; report the worse of the two.
            let von_mises = von_mises(bearing, 0.0).max(von_mises(0.0, shear));
            Ok(Stresses {
                normal: bearing,
                shear,
                von_mises,
                deflection: None,
            })
        }
    }
}

/// Evaluate every load case. Failures in one component are recorded in its
/// row and do not stop the others.
pub fn structural_report(
    cases: &[StructuralLoadCase],
    material: &MaterialSpec,
    fea: &FeaReference,
) -> StructuralReport {
    let components = cases
        .iter()
        .map(|case| match evaluate(case, material) {
            Ok(s) => {
                let fos = factor_of_safety(s.von_mises, material);
                let fea_ratio = fea
                    .row(case.component)
                    .filter(|_| s.von_mises > 0.0)
                    .map(|r| s.von_mises / r.von_mises_max_pa);
                ComponentResult {
                    component: case.component,
                    normal_stress_pa: s.normal,
                    shear_stress_pa: s.shear,
                    von_mises_pa: s.von_mises,
                    deflection_m: s.deflection,
                    factor_of_safety: fos,
                    pass: fos.is_none_or(|f| f >= REQUIRED_FOS),
                    fea_ratio,
                    error: None,
                }
            }
            Err(e) => ComponentResult {
                component: case.component,
                normal_stress_pa: 0.0,
                shear_stress_pa: 0.0,
                von_mises_pa: 0.0,
                deflection_m: None,
                factor_of_safety: None,
                pass: false,
                fea_ratio: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    StructuralReport {
        material: material.clone(),
        required_fos: REQUIRED_FOS,
        components,
    }
}
