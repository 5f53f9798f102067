//! Report assembly and rendering.
//!
//! Every pass/fail verdict is a named [`Check`]; the text rendering prints
//! `PASS` or `FAIL` only on check lines, so counting the word in the output
//! counts the verdicts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arm::{ProfileRow, TRANSFER_ANGLE_LIMIT_DEG};
use crate::sim::SimSummary;
use crate::sizing::SizingReport;
use crate::structural::{StructuralReport, FeaReference};

pub const TOOL_NAME: &str = "exoarm";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub limit: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, value: Option<f64>, limit: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            value: value.filter(|v| v.is_finite()),
            limit,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub elbow_angle_deg: f64,
    pub transfer_angle_deg: f64,
    pub f1_n: f64,
    pub f2_n: f64,
    pub piston_force_n: f64,
    /// Installed rod-side force over the required force; `None` without load.
    pub force_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sizing: Option<SizingReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub simulation: Option<SimSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub structural: Option<StructuralReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub profile: Option<Vec<ProfileEntry>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<FeaReference>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

/// SHA-256 over the given input documents, in order.
pub fn input_digest<'a>(inputs: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut hasher = Sha256::new();
    for input in inputs {
        hasher.update((input.len() as u64).to_le_bytes());
        hasher.update(input);
    }
    hex::encode(hasher.finalize())
}

impl Report {
    pub fn new(input_digest: String) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest,
            sizing: None,
            simulation: None,
            structural: None,
            profile: None,
            reference: None,
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// 0 when every check passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    pub fn add_sizing(&mut self, sizing: SizingReport) {
        if sizing.degenerate {
            self.warnings.push("sizing degenerate: zero load".into());
        } else {
            let detail = match (sizing.available_force, sizing.selected_bore) {
                (Some(available), Some(bore)) => format!(
                    "{:.2} N available at {:.0} mm bore vs {:.2} N required",
                    available,
                    bore * 1e3,
                    sizing.forces.f_piston
                ),
                _ => "no standard bore large enough".to_string(),
            };
            self.checks.push(Check::new("sizing.force_margin", sizing.pass(), sizing.margin, Some(1.0), detail));
        }
        self.warnings.extend(sizing.notes.iter().filter(|_| !sizing.degenerate).cloned());
        self.sizing = Some(sizing);
    }

    pub fn add_simulation(&mut self, summary: SimSummary) {
        self.checks.push(Check::new(
            "simulation.stall",
            summary.stall_episodes == 0,
            Some(summary.stall_episodes as f64),
            Some(0.0),
            match summary.first_stall_s {
                Some(t) => format!("{} stall episode(s), first at {t} s", summary.stall_episodes),
                None => "piston never stalled".to_string(),
            },
        ));
        self.checks.push(Check::new(
            "simulation.transfer_angle",
            summary.transfer_angle_violations == 0,
            Some(summary.max_transfer_angle_deg),
            Some(TRANSFER_ANGLE_LIMIT_DEG),
            format!("{} sample(s) above the cap", summary.transfer_angle_violations),
        ));
        self.simulation = Some(summary);
    }

    pub fn add_structural(&mut self, structural: StructuralReport) {
        for c in &structural.components {
            let detail = match (&c.error, c.factor_of_safety) {
                (Some(e), _) => e.clone(),
                (None, Some(fos)) => format!("FoS {fos:.2} at {:.3e} Pa von Mises", c.von_mises_pa),
                (None, None) => "unstressed".to_string(),
            };
            self.checks.push(Check::new(
                format!("structural.{}.fos", c.component),
                c.pass,
                c.factor_of_safety,
                Some(structural.required_fos),
                detail,
            ));
        }
        self.structural = Some(structural);
    }

    pub fn add_profile(&mut self, rows: &[ProfileRow], available_force: f64) {
        let entries: Vec<ProfileEntry> = rows
            .iter()
            .map(|r| ProfileEntry {
                elbow_angle_deg: r.elbow_angle.to_degrees(),
                transfer_angle_deg: r.transfer_angle.to_degrees(),
                f1_n: r.forces.f1,
                f2_n: r.forces.f2,
                piston_force_n: r.forces.f_piston,
                force_margin: (r.forces.f_piston > 0.0).then(|| available_force / r.forces.f_piston),
            })
            .collect();
        let worst_margin = entries.iter().filter_map(|e| e.force_margin).reduce(f64::min);
        self.checks.push(Check::new(
            "profile.force_margin",
            worst_margin.is_none_or(|m| m >= 1.0),
            worst_margin,
            Some(1.0),
            "installed cylinder over the required force along the lift",
        ));
        let max_transfer = entries.iter().map(|e| e.transfer_angle_deg).fold(f64::MIN, f64::max);
        self.checks.push(Check::new(
            "profile.transfer_angle",
            max_transfer <= TRANSFER_ANGLE_LIMIT_DEG,
            Some(max_transfer),
            Some(TRANSFER_ANGLE_LIMIT_DEG),
            "largest transfer angle along the lift",
        ));
        self.profile = Some(entries);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Json => self.render_json(),
        }
    }

    pub fn render_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.tool, self.version);
        let _ = writeln!(out, "input digest: {}", self.input_digest);
        if let Some(s) = &self.sizing {
            render_sizing(&mut out, s);
        }
        if let Some(s) = &self.simulation {
            render_simulation(&mut out, s);
        }
        if let Some(s) = &self.structural {
            render_structural(&mut out, s);
        }
        if let Some(p) = &self.profile {
            render_profile(&mut out, p);
        }
        if let Some(t) = &self.reference {
            let _ = writeln!(out, "\n== FEA reference (static structural summary) ==");
            out.push_str(&t.to_tsv());
        }
        let _ = writeln!(out, "\n== Checks ==");
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let value = match (c.value, c.limit) {
                (Some(v), Some(l)) => format!(" value={} limit={}", fmt_num(v), fmt_num(l)),
                (None, Some(l)) => format!(" value=na limit={}", fmt_num(l)),
                _ => String::new(),
            };
            let _ = writeln!(out, "{verdict} {}{value} ({})", c.name, c.detail);
        }
        let _ = writeln!(out, "\n== Warnings ==");
        if self.warnings.is_empty() {
            let _ = writeln!(out, "none");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "- {w}");
        }
        let _ = writeln!(
            out,
            "\nresult: {} of {} checks passed",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        );
        out
    }
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 || (1e-3..1e6).contains(&v.abs()) {
        format!("{:.4}", v)
    } else {
        format!("{:.4e}", v)
    }
}

fn opt(v: Option<f64>, scale: f64, precision: usize) -> String {
    v.map_or_else(|| "na".to_string(), |v| format!("{:.*}", precision, v * scale))
}

fn render_sizing(out: &mut String, s: &SizingReport) {
    let _ = writeln!(out, "\n== Sizing ==");
    let f = &s.forces;
    let _ = writeln!(out, "load weight F0            {:>10.2} N", f.f0);
    let _ = writeln!(out, "perpendicular load F1     {:>10.2} N", f.f1);
    let _ = writeln!(out, "force at rod mount F2     {:>10.2} N", f.f2);
    let _ = writeln!(out, "piston force F            {:>10.2} N", f.f_piston);
    let _ = writeln!(out, "supply pressure           {:>10.0} Pa", s.pressure);
    let _ = writeln!(out, "rod diameter              {:>10.1} mm", s.rod_diameter * 1e3);
    let _ = writeln!(out, "minimum bore              {:>10} mm", opt(s.min_bore, 1e3, 2));
    let _ = writeln!(out, "selected bore             {:>10} mm", opt(s.selected_bore, 1e3, 0));
    let _ = writeln!(out, "stroke                    {:>10.1} mm", s.stroke * 1e3);
    let _ = writeln!(out, "available rod-side force  {:>10} N", opt(s.available_force, 1.0, 2));
    let _ = writeln!(out, "force margin              {:>10}", opt(s.margin, 1.0, 3));
}

fn render_simulation(out: &mut String, s: &SimSummary) {
    let _ = writeln!(out, "\n== Simulation ==");
    let _ = writeln!(out, "duration                  {:>10} s ({} samples every {} s)", s.duration_s, s.samples, s.sample_step_s);
    let _ = writeln!(out, "sound detections          {:>10}", s.detections);
    let _ = writeln!(out, "accepted toggles          {:>10}", s.accepted_toggles);
    let _ = writeln!(out, "ignored detections        {:>10}", s.ignored_detections);
    let _ = writeln!(out, "rejected manual presses   {:>10}", s.rejected_events);
    let _ = writeln!(out, "completed lifts           {:>10}", s.lift_count);
    for (i, l) in s.lifts.iter().enumerate() {
        let _ = writeln!(out, "  lift {}: {:.3} s -> {:.3} s ({:.3} s)", i + 1, l.start_s, l.end_s, l.duration_s);
    }
    let _ = writeln!(out, "aborted lifts             {:>10}", s.aborted_lifts);
    let _ = writeln!(out, "peak required force       {:>10.2} N", s.peak_required_force_n);
    let _ = writeln!(out, "minimum force margin      {:>10}", opt(s.min_force_margin, 1.0, 3));
    let _ = writeln!(out, "max transfer angle        {:>10.3} deg", s.max_transfer_angle_deg);
    let _ = writeln!(out, "transfer-angle violations {:>10}", s.transfer_angle_violations);
    let _ = writeln!(out, "stall episodes            {:>10}", s.stall_episodes);
}

fn render_structural(out: &mut String, s: &StructuralReport) {
    let _ = writeln!(out, "\n== Structural ==");
    let _ = writeln!(
        out,
        "material {} (yield {:.3e} Pa, modulus {:.3e} Pa), required FoS {}",
        s.material.name, s.material.yield_strength, s.material.elastic_modulus, s.required_fos
    );
    let _ = writeln!(
        out,
        "{:<14} {:>12} {:>12} {:>12} {:>12} {:>8} {:>10}",
        "component", "normal Pa", "shear Pa", "vonMises Pa", "deflect m", "FoS", "vs FEA"
    );
    for c in &s.components {
        let _ = writeln!(
            out,
            "{:<14} {:>12.4e} {:>12.4e} {:>12.4e} {:>12} {:>8} {:>10}",
            c.component.to_string(),
            c.normal_stress_pa,
            c.shear_stress_pa,
            c.von_mises_pa,
            c.deflection_m.map_or_else(|| "na".to_string(), |d| format!("{d:.4e}")),
            opt(c.factor_of_safety, 1.0, 2),
            opt(c.fea_ratio, 1.0, 3),
        );
    }
}

fn render_profile(out: &mut String, rows: &[ProfileEntry]) {
    let _ = writeln!(out, "\n== Torque profile ==");
    let _ = writeln!(out, "{:>10} {:>10} {:>10} {:>10} {:>10} {:>8}", "elbow deg", "xfer deg", "F1 N", "F2 N", "F N", "margin");
    for r in rows {
        let _ = writeln!(
            out,
            "{:>10.3} {:>10.3} {:>10.2} {:>10.2} {:>10.2} {:>8}",
            r.elbow_angle_deg,
            r.transfer_angle_deg,
            r.f1_n,
            r.f2_n,
            r.piston_force_n,
            opt(r.force_margin, 1.0, 3)
        );
    }
}

/// Plot-ready torque profile table.
pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("elbow_angle_deg,transfer_angle_deg,f0_n,f1_n,f2_n,piston_force_n\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.elbow_angle.to_degrees(),
            r.transfer_angle.to_degrees(),
            r.forces.f0,
            r.forces.f1,
            r.forces.f2,
            r.forces.f_piston
        );
    }
    out
}

/// Required against available cylinder force along the lift.
pub fn force_curve_csv(rows: &[ProfileRow], available_force: f64) -> String {
    let mut out = String::from("elbow_angle_deg,required_force_n,available_force_n\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6}",
            r.elbow_angle.to_degrees(),
            r.forces.f_piston,
            available_force
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arm::{torque_profile, ArmGeometry, LoadCase, Sweep};
    use crate::sizing::{sizing_report, BoreCatalog};
    use crate::structural::{structural_report, MaterialSpec, StructuralLoadCase};

    fn full_report() -> Report {
        let mut r = Report::new(input_digest([b"".as_slice()]));
        let g = ArmGeometry::default();
        let l = LoadCase::default();
        r.add_sizing(sizing_report(&g, &l, 6e5, 0.01, &BoreCatalog::default(), Sweep::reference()).unwrap());
        r.add_structural(structural_report(
            &StructuralLoadCase::defaults(),
            &MaterialSpec::default(),
            &FeaReference::default(),
        ));
        r.add_profile(&torque_profile(&g, &l, Sweep::reference(), 10).unwrap(), 376.99);
        r
    }

    #[test]
    fn json_round_trip() {
        let r = full_report();
        assert_eq!(Report::from_json(&r.render_json()).unwrap(), r);
    }

    #[test]
    fn fail_word_once_per_failed_check() {
        let r = full_report();
        let failed = r.failures().count();
        assert_eq!(failed, 1, "{:?}", r.checks);
        assert_eq!(r.render_text().matches("FAIL").count(), failed);
        assert_eq!(r.render_text().matches("PASS").count(), r.checks.len() - failed);
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn text_and_json_carry_the_same_numbers() {
        let r = full_report();
        let text = r.render_text();
        let s = r.sizing.as_ref().unwrap();
        assert!(text.contains(&format!("{:.2}", s.forces.f_piston)));
        assert!(text.contains(&format!("{:.2}", s.available_force.unwrap())));
        let json: serde_json::Value = serde_json::from_str(&r.render_json()).unwrap();
        assert_eq!(json["sizing"]["forces"]["f_piston"].as_f64().unwrap(), s.forces.f_piston);
        for c in &r.checks {
            assert!(text.contains(&c.name));
        }
    }

    #[test]
    fn degenerate_sizing_warns() {
        let mut r = Report::new(String::new());
        let s = sizing_report(
            &ArmGeometry::default(),
            &LoadCase::new(0.0, 9.81).unwrap(),
            6e5,
            0.01,
            &BoreCatalog::default(),
            Sweep::reference(),
        )
        .unwrap();
        r.add_sizing(s);
        assert_eq!(r.warnings.len(), 1);
        assert!(r.checks.is_empty());
        assert!(r.render_text().contains("na"));
    }

    #[test]
    fn digest_is_order_sensitive() {
        let a = input_digest([b"x".as_slice(), b"y".as_slice()]);
        let b = input_digest([b"y".as_slice(), b"x".as_slice()]);
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
    }
}
