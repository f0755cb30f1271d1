use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Concave,
    Convex,
    StrictlyConvex,
    LogConvex,
    NonIncreasing,
    NonDecreasing,
    CmProbe,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Property::Concave => "concave",
            Property::Convex => "convex",
            Property::StrictlyConvex => "strictly_convex",
            Property::LogConvex => "log_convex",
            Property::NonIncreasing => "non_increasing",
            Property::NonDecreasing => "non_decreasing",
            Property::CmProbe => "cm_probe",
        };
        f.write_str(s)
    }
}

/// Outcome of a sampled shape test. Violations are positive; the test
/// passes iff `worst_violation <= 0` after subtracting the tolerance.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ShapeReport {
    pub property: Property,
    pub interval: (f64, f64),
    pub pass: bool,
    pub worst_violation: f64,
    pub location: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub note: Option<String>,
}

impl ShapeReport {
    pub(crate) fn new(property: Property, interval: (f64, f64), tolerance: f64) -> Self {
        ShapeReport {
            property,
            interval,
            pass: true,
            worst_violation: f64::NEG_INFINITY,
            location: f64::NAN,
            tolerance,
            samples: 0,
            note: None,
        }
    }

    /// Record one sample: `excess` is the amount by which the property is
    /// broken before the tolerance is applied.
    pub(crate) fn record(&mut self, excess: f64, x: f64) {
        self.samples += 1;
        let v = excess - self.tolerance;
        if v > self.worst_violation || self.location.is_nan() {
            self.worst_violation = v;
            self.location = x;
        }
    }

    pub(crate) fn finish(mut self) -> Self {
        if self.samples == 0 {
            self.worst_violation = 0.0;
        }
        self.pass = self.worst_violation <= 0.0;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// One `key = value` line per field.
    pub fn to_structured(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("[[report]]\nproperty = \"{}\"\n", self.property));
        s.push_str(&format!(
            "interval = [{:.17e}, {:.17e}]\n",
            self.interval.0, self.interval.1
        ));
        s.push_str(&format!("pass = {}\n", self.pass));
        s.push_str(&format!("worst_violation = {:.17e}\n", self.worst_violation));
        s.push_str(&format!("location = {:.17e}\n", self.location));
        s.push_str(&format!("tolerance = {:.17e}\n", self.tolerance));
        s.push_str(&format!("samples = {}\n", self.samples));
        if let Some(n) = &self.note {
            s.push_str(&format!("note = {:?}\n", n));
        }
        s
    }

    pub fn table_row(&self, label: &str) -> String {
        format!(
            "{:<28} {:<16} [{:>9.4}, {:>9.4}]  {:<4}  {:>11.3e} @ {:<10.5}",
            label,
            self.property.to_string(),
            self.interval.0,
            self.interval.1,
            if self.pass { "PASS" } else { "FAIL" },
            self.worst_violation,
            self.location
        )
    }
}
