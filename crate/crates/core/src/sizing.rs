//! Cylinder bore and stroke selection.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arm::{self, ArmGeometry, ForceChain, LoadCase, Sweep};
use crate::error::{Error, Result};

/// Shipped bore list, millimeters.
pub const DEFAULT_BORES: &str = include_str!("../data/bores.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Full piston face; pressurized to extend.
    Cap,
    /// Annulus around the rod; pressurized to retract.
    Rod,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Cap => "cap",
            Side::Rod => "rod",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub bore: f64,
    pub rod_diameter: f64,
    pub stroke: f64,
    /// Gauge supply pressure, pascals.
    pub supply_pressure: f64,
    /// Chamber pressurized for the lifting motion.
    pub acting_side: Side,
}

impl Default for CylinderSpec {
    /// The 30 mm bore, 150 mm stroke cylinder at 6 bar lifting on retraction.
    fn default() -> Self {
        Self {
            bore: 0.030,
            rod_diameter: 0.010,
            stroke: 0.150,
            supply_pressure: 6e5,
            acting_side: Side::Rod,
        }
    }
}

impl CylinderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rod_diameter > 0.0 && self.bore > self.rod_diameter && self.bore.is_finite()) {
            return Err(Error::Dimension(format!(
                "cylinder needs bore > rod diameter > 0 (bore = {} m, rod = {} m)",
                self.bore, self.rod_diameter
            )));
        }
        if !(self.stroke > 0.0 && self.stroke.is_finite()) {
            return Err(Error::Dimension(format!("stroke must be positive, got {} m", self.stroke)));
        }
        if !(self.supply_pressure > 0.0 && self.supply_pressure.is_finite()) {
            return Err(Error::domain(
                "cylinder",
                format!("supply pressure must be positive, got {} Pa", self.supply_pressure),
            ));
        }
        Ok(())
    }

    /// Pressurized area on `side`, m².
    pub fn area(&self, side: Side) -> f64 {
        let full = PI / 4.0 * self.bore * self.bore;
        match side {
            Side::Cap => full,
            Side::Rod => full - PI / 4.0 * self.rod_diameter * self.rod_diameter,
        }
    }
}

/// Force the cylinder delivers with supply pressure on `side`.
pub fn available_force(spec: &CylinderSpec, side: Side) -> f64 {
    spec.supply_pressure * spec.area(side)
}

/// Smallest bore whose rod-side annulus delivers `force` at `pressure`.
pub fn min_bore(force: f64, pressure: f64, rod_diameter: f64) -> Result<f64> {
    if !(force > 0.0 && force.is_finite()) {
        return Err(Error::domain("min_bore", format!("force must be positive, got {force} N")));
    }
    if !(pressure > 0.0 && pressure.is_finite()) {
        return Err(Error::domain("min_bore", format!("pressure must be positive, got {pressure} Pa")));
    }
    if !(rod_diameter >= 0.0) {
        return Err(Error::domain("min_bore", format!("rod diameter must be >= 0, got {rod_diameter} m")));
    }
    Ok((4.0 * force / (PI * pressure) + rod_diameter * rod_diameter).sqrt())
}

/// Ordered list of commercially available bores, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoreCatalog {
    bores: Vec<f64>,
}

impl Default for BoreCatalog {
    fn default() -> Self {
        DEFAULT_BORES.parse().expect("embedded bore catalog is valid")
    }
}

impl BoreCatalog {
    pub fn new(bores: Vec<f64>) -> Result<Self> {
        if bores.is_empty() {
            return Err(Error::validation("pneumatics.catalog", "catalog is empty"));
        }
        if let Some(b) = bores.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::validation("pneumatics.catalog", format!("bore {b} is not positive")));
        }
        if bores.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("pneumatics.catalog", "bores must be strictly increasing"));
        }
        Ok(Self { bores })
    }

    pub fn from_millimeters(mm: &[f64]) -> Result<Self> {
        Self::new(mm.iter().map(|b| b / 1000.0).collect())
    }

    pub fn bores(&self) -> &[f64] {
        &self.bores
    }

    pub fn largest(&self) -> f64 {
        *self.bores.last().expect("catalog is nonempty")
    }
}

impl FromStr for BoreCatalog {
    type Err = Error;

    /// One bore in millimeters per line; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self> {
        let mut mm = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let value: f64 = line.parse().map_err(|_| Error::Parse {
                source_name: "bore catalog".into(),
                reason: format!("line {}: `{line}` is not a number", i + 1),
            })?;
            mm.push(value);
        }
        Self::from_millimeters(&mm)
    }
}

/// Smallest catalog bore at least `min_bore`.
pub fn select_standard_bore(min_bore: f64, catalog: &BoreCatalog) -> Result<f64> {
    catalog
        .bores()
        .iter()
        .copied()
        .find(|&b| b >= min_bore)
        .ok_or(Error::NoStandardSize {
            min_bore_mm: min_bore * 1000.0,
            largest_mm: catalog.largest() * 1000.0,
        })
}

/// Piston travel needed to sweep the elbow over `sweep`.
pub fn stroke_required(geometry: &ArmGeometry, sweep: Sweep) -> Result<f64> {
    let long = arm::piston_length(geometry, sweep.max)?;
    let short = arm::piston_length(geometry, sweep.min)?;
    Ok(long - short)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingReport {
    pub forces: ForceChain,
    pub pressure: f64,
    pub rod_diameter: f64,
    /// `None` when the load is zero.
    pub min_bore: Option<f64>,
    /// `None` when nothing in the catalog is large enough, or sizing is degenerate.
    pub selected_bore: Option<f64>,
    pub stroke: f64,
    /// Rod-side force at the selected bore.
    pub available_force: Option<f64>,
    /// available / required; `None` when not computable.
    pub margin: Option<f64>,
    pub degenerate: bool,
    pub notes: Vec<String>,
}

impl SizingReport {
    /// A bore was found and it carries the load.
    pub fn pass(&self) -> bool {
        self.degenerate || (self.selected_bore.is_some() && self.margin.is_some_and(|m| m >= 1.0))
    }
}

/// Full sizing pass: force chain, bore, stroke and resulting force margin.
pub fn sizing_report(
    geometry: &ArmGeometry,
    load: &LoadCase,
    pressure: f64,
    rod_diameter: f64,
    catalog: &BoreCatalog,
    sweep: Sweep,
) -> Result<SizingReport> {
    geometry.validate()?;
    let forces = arm::required_piston_force(geometry, load)?;
    let stroke = stroke_required(geometry, sweep)?;
    let mut report = SizingReport {
        forces,
        pressure,
        rod_diameter,
        min_bore: None,
        selected_bore: None,
        stroke,
        available_force: None,
        margin: None,
        degenerate: false,
        notes: Vec::new(),
    };

    if forces.f_piston == 0.0 {
        if !(pressure > 0.0) {
            return Err(Error::domain("sizing", format!("pressure must be positive, got {pressure} Pa")));
        }
        report.degenerate = true;
        report
            .notes
            .push("zero load: no bore requirement, force margin not applicable".into());
        return Ok(report);
    }

    let needed = min_bore(forces.f_piston, pressure, rod_diameter)?;
    report.min_bore = Some(needed);
    match select_standard_bore(needed, catalog) {
        Ok(bore) => {
            let spec = CylinderSpec {
                bore,
                rod_diameter,
                stroke,
                supply_pressure: pressure,
                acting_side: Side::Rod,
            };
            let available = available_force(&spec, Side::Rod);
            report.selected_bore = Some(bore);
            report.available_force = Some(available);
            report.margin = Some(available / forces.f_piston);
        }
        Err(e @ Error::NoStandardSize { .. }) => report.notes.push(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference_cylinder() -> CylinderSpec {
        CylinderSpec::default()
    }

    #[test]
    fn min_bore_examples() {
        let d = min_bore(264.3, 6e5, 0.010).unwrap();
        assert!((0.0256..=0.0258).contains(&d), "{d}");
        assert_relative_eq!(d, 0.02571, epsilon = 1e-5);
        assert_relative_eq!(min_bore(PI / 4.0, 1.0, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(min_bore(376.99, 6e5, 0.010).unwrap(), 0.030, epsilon = 1e-6);
    }

    #[test]
    fn min_bore_domain_errors() {
        assert!(min_bore(0.0, 6e5, 0.01).is_err());
        assert!(min_bore(10.0, 0.0, 0.01).is_err());
        assert!(min_bore(10.0, -1.0, 0.01).is_err());
    }

    #[test]
    fn selection_examples() {
        let catalog = BoreCatalog::default();
        assert_eq!(select_standard_bore(0.02571, &catalog).unwrap(), 0.030);
        assert_eq!(select_standard_bore(0.030, &catalog).unwrap(), 0.030);
        assert!(matches!(
            select_standard_bore(0.070, &catalog),
            Err(Error::NoStandardSize { .. })
        ));
    }

    #[test]
    fn available_force_examples() {
        let spec = reference_cylinder();
        assert!((available_force(&spec, Side::Rod) - 376.99).abs() < 0.01);
        assert!((available_force(&spec, Side::Cap) - 424.12).abs() < 0.01);
        let idle = CylinderSpec { supply_pressure: 0.0, ..spec };
        assert_eq!(available_force(&idle, Side::Rod), 0.0);
        assert_eq!(available_force(&idle, Side::Cap), 0.0);
    }

    #[test]
    fn stroke_examples() {
        let g = ArmGeometry::default();
        let s = stroke_required(&g, Sweep::reference()).unwrap();
        assert!((s - 0.150).abs() <= 0.0005, "{s}");
        let empty = Sweep::from_degrees(80.0, 80.0).unwrap();
        assert_eq!(stroke_required(&g, empty).unwrap(), 0.0);
        let s = stroke_required(&g, Sweep::from_degrees(60.0, 120.0).unwrap()).unwrap();
        assert_relative_eq!(s, 0.259808 - 0.15, epsilon = 1e-6);
    }

    #[test]
    fn catalog_parsing() {
        let c: BoreCatalog = "# header\n 12 \n\n20 # inline\n".parse().unwrap();
        assert_eq!(c.bores(), &[0.012, 0.020]);
        assert!("20\n16\n".parse::<BoreCatalog>().is_err());
        assert!("abc\n".parse::<BoreCatalog>().is_err());
        assert!("# nothing\n".parse::<BoreCatalog>().is_err());
        assert_eq!(BoreCatalog::default().bores().len(), 9);
    }

    #[test]
    fn reference_design_report() {
        let r = sizing_report(
            &ArmGeometry::default(),
            &LoadCase::default(),
            6e5,
            0.010,
            &BoreCatalog::default(),
            Sweep::reference(),
        )
        .unwrap();
        assert!((r.forces.f_piston - 264.3).abs() < 0.1);
        let d = r.min_bore.unwrap();
        assert!((0.0256..=0.0258).contains(&d));
        assert_eq!(r.selected_bore, Some(0.030));
        assert!((r.stroke - 0.150).abs() <= 0.0005);
        assert!((r.available_force.unwrap() - 376.99).abs() < 0.01);
        assert!((r.margin.unwrap() - 1.43).abs() < 0.01);
        assert!(r.pass());
        assert!(r.notes.is_empty());
    }

    #[test]
    fn zero_load_report_is_degenerate() {
        let r = sizing_report(
            &ArmGeometry::default(),
            &LoadCase::new(0.0, 9.81).unwrap(),
            6e5,
            0.010,
            &BoreCatalog::default(),
            Sweep::reference(),
        )
        .unwrap();
        assert!(r.degenerate);
        assert_eq!(r.margin, None);
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn half_pressure_selects_40mm() {
        let r = sizing_report(
            &ArmGeometry::default(),
            &LoadCase::default(),
            3e5,
            0.010,
            &BoreCatalog::default(),
            Sweep::reference(),
        )
        .unwrap();
        // sqrt(4 * 264.3 / (pi * 3e5) + 1e-4) = 0.034953 m
        assert_relative_eq!(min_bore(264.3, 3e5, 0.010).unwrap(), 0.034953, epsilon = 1e-6);
        assert!((r.min_bore.unwrap() - 0.034953).abs() < 5e-6);
        assert_eq!(r.selected_bore, Some(0.040));
    }

    #[test]
    fn oversize_load_fails_without_error() {
        let r = sizing_report(
            &ArmGeometry::default(),
            &LoadCase::new(100.0, 9.81).unwrap(),
            6e5,
            0.010,
            &BoreCatalog::default(),
            Sweep::reference(),
        )
        .unwrap();
        assert_eq!(r.selected_bore, None);
        assert!(!r.pass());
    }

    proptest! {
        #[test]
        fn bore_inversion(force in 1.0f64..1e4, pressure in 1e4f64..1e6, rod in 0.0f64..0.02) {
            let bore = min_bore(force, pressure, rod).unwrap();
            let spec = CylinderSpec { bore, rod_diameter: rod, stroke: 0.1, supply_pressure: pressure, acting_side: Side::Rod };
            let back = available_force(&spec, Side::Rod);
            prop_assert!((back - force).abs() <= 1e-9 * force);
        }

        #[test]
        fn bore_monotonicity(force in 1.0f64..1e4, pressure in 1e4f64..1e6, rod in 0.0f64..0.02, k in 1.01f64..3.0) {
            let base = min_bore(force, pressure, rod).unwrap();
            prop_assert!(min_bore(force, pressure * k, rod).unwrap() < base);
            prop_assert!(min_bore(force * k, pressure, rod).unwrap() > base);
            prop_assert!(min_bore(force, pressure, rod * k + 1e-4).unwrap() > base);
        }

        #[test]
        fn catalog_soundness(force in 1.0f64..2000.0, pressure in 2e5f64..1e6) {
            let catalog = BoreCatalog::default();
            let needed = min_bore(force, pressure, 0.010).unwrap();
            if let Ok(bore) = select_standard_bore(needed, &catalog) {
                prop_assert!(bore >= needed);
                for &smaller in catalog.bores().iter().filter(|&&b| b < bore && b > 0.010) {
                    let spec = CylinderSpec { bore: smaller, rod_diameter: 0.010, stroke: 0.1, supply_pressure: pressure, acting_side: Side::Rod };
                    prop_assert!(available_force(&spec, Side::Rod) < force);
                }
            } else {
                prop_assert!(needed > catalog.largest());
            }
        }

        #[test]
        fn selection_is_monotone(a in 0.001f64..0.063, b in 0.001f64..0.063) {
            let catalog = BoreCatalog::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(select_standard_bore(lo, &catalog).unwrap() <= select_standard_bore(hi, &catalog).unwrap());
        }

        #[test]
        fn stroke_is_additive(a in 10f64..60.0, b in 60f64..110.0, c in 110f64..170.0) {
            let g = ArmGeometry::default();
            let s = |lo: f64, hi: f64| stroke_required(&g, Sweep::from_degrees(lo, hi).unwrap()).unwrap();
            prop_assert!((s(a, c) - (s(a, b) + s(b, c))).abs() < 1e-12);
        }
    }
}
