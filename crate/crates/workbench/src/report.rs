//! Run reports: canonical layout and 15-significant-digit numbers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::{Scenario, SCHEMA_VERSION};

pub const REPORT_VERSION: u32 = 1;

/// Rounds to 15 significant digits; non-finite values pass through.
pub fn sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    /// A failing check of this kind is a theorem or cross-check failure.
    pub critical: bool,
}

/// Scalar field on a two-index lattice; `values[j * x.len() + i]` sits at `(x[i], y[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<Option<f64>>,
    /// Integer-valued fields are drawn with one colour per value.
    pub discrete: bool,
}

impl Field {
    pub fn new(name: &str, axes: (&str, &str), x: Vec<f64>, y: Vec<f64>, values: Vec<Option<f64>>, discrete: bool) -> Self {
        Self {
            name: name.into(),
            x_label: axes.0.into(),
            y_label: axes.1.into(),
            x: x.into_iter().map(sig15).collect(),
            y: y.into_iter().map(sig15).collect(),
            values: values.into_iter().map(|v| v.filter(|x| x.is_finite()).map(sig15)).collect(),
            discrete,
        }
    }

    pub fn present(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario: String,
    pub kind: String,
    pub seed: u64,
    pub grid: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub versions: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_version: u32,
    pub id: String,
    pub kind: String,
    pub verdicts: BTreeMap<String, String>,
    pub flags: BTreeMap<String, bool>,
    /// Grid-independent quantities: integers, verdict-level values and converged numbers.
    pub metrics: BTreeMap<String, f64>,
    /// Residuals, sampled extrema and counts that depend on the grid.
    pub diagnostics: BTreeMap<String, f64>,
    /// Quantities that came out infinite or undefined.
    pub undefined: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub fields: Vec<Field>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(s: &Scenario) -> Self {
        let mut grid = BTreeMap::new();
        grid.insert("boundary".to_string(), s.grid.boundary as f64);
        grid.insert("parameter".to_string(), s.grid.parameter as f64);
        grid.insert("interior_angles".to_string(), s.grid.interior_angles as f64);
        for (k, r) in s.grid.interior_radii.iter().enumerate() {
            grid.insert(format!("interior_radius.{k}"), sig15(*r));
        }
        if let Some(p) = &s.patch {
            for a in &p.axes {
                grid.insert(format!("patch.{}", a.name), a.count as f64);
            }
        }
        if let Some(g) = &s.planar_grid {
            grid.insert("planar.count".into(), g.count as f64);
        }
        let tolerances = s.tolerances.entries().iter().map(|(k, v)| (k.to_string(), sig15(*v))).collect();
        let mut versions = BTreeMap::new();
        versions.insert("argprin".into(), env!("CARGO_PKG_VERSION").into());
        versions.insert("scenario_schema".into(), SCHEMA_VERSION.to_string());
        versions.insert("report_schema".into(), REPORT_VERSION.to_string());
        Self {
            report_version: REPORT_VERSION,
            id: s.id.clone(),
            kind: s.kind.name().into(),
            verdicts: BTreeMap::new(),
            flags: BTreeMap::new(),
            metrics: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            undefined: BTreeMap::new(),
            checks: Vec::new(),
            fields: Vec::new(),
            provenance: Provenance {
                scenario: s.id.clone(),
                kind: s.kind.name().into(),
                seed: s.seed,
                grid,
                tolerances,
                versions,
            },
        }
    }

    pub fn verdict(&mut self, key: &str, value: impl Into<String>) {
        self.verdicts.insert(key.into(), value.into());
    }

    pub fn flag(&mut self, key: &str, value: bool) {
        self.flags.insert(key.into(), value);
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.metrics.insert(key.into(), sig15(value));
        } else {
            self.undefined.insert(key.into(), value.to_string());
        }
    }

    /// A metric computed to roughly machine precision relative to `scale`;
    /// anything below that is roundoff and is reported as zero.
    pub fn metric_scaled(&mut self, key: &str, value: f64, scale: f64) {
        let v = if value.abs() <= 1e-12 * scale.abs().max(1.0) { 0.0 } else { value };
        self.metric(key, v);
    }

    pub fn diagnostic(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.diagnostics.insert(key.into(), sig15(value));
        } else {
            self.undefined.insert(key.into(), value.to_string());
        }
    }

    /// A check whose failure counts against the run's exit status.
    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into(), critical: true });
    }

    /// A declared expectation; also counts against the exit status.
    pub fn expect(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: format!("expect.{name}"), pass, detail: detail.into(), critical: true });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass || !c.critical)
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass && c.critical).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundoff_metrics_flush_to_zero() {
        let s = crate::scenario::parse_scenario(
            r#"{"schema_version": 1, "id": "r", "kind": "argument-principle", "argument": {}}"#,
        )
        .unwrap();
        let mut r = Report::new(&s);
        r.metric_scaled("a", 3e-17, 4.0);
        r.metric_scaled("b", -2e-9, 1.0);
        assert_eq!(r.metrics["a"].to_bits(), 0.0f64.to_bits());
        assert_eq!(r.metrics["b"], -2e-9);
    }

    #[test]
    fn rounding_keeps_fifteen_digits() {
        assert_eq!(sig15(0.1 + 0.2), 0.3);
        assert_eq!(sig15(1.0 / 3.0), 0.333333333333333);
        assert_eq!(sig15(-2.0e-300 / 3.0), -6.66666666666667e-301);
        assert!(sig15(f64::NAN).is_nan());
        assert_eq!(sig15(0.0), 0.0);
    }

    #[test]
    fn rounded_values_survive_json() {
        for x in [std::f64::consts::PI, 1e-17 / 7.0, 123456.789012345678, -9.87654321e22] {
            let r = sig15(x);
            let back: f64 = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
            assert_eq!(back.to_bits(), r.to_bits());
        }
    }
}
