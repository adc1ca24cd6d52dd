use std::fmt::Write as _;

use serde::Serialize;

pub const FAILURE_CAP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    BelowCriticalDimension,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::BelowCriticalDimension => "below-critical-dimension",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::BelowCriticalDimension => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Worst {
    pub point: Vec<f64>,
    /// `σ_min` for rank checks, a residual for identity and bracket checks.
    pub criterion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub point: Vec<f64>,
    pub reason: String,
}

/// Field order here is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub verdict: Verdict,
    pub mode: String,
    pub points_checked: usize,
    pub worst: Option<Worst>,
    pub failures: Vec<Failure>,
    pub fixture_notes: Vec<String>,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The JSON report without `wall_time_ms`, for comparing runs.
    pub fn to_json_without_time(&self) -> String {
        #[derive(Serialize)]
        struct Untimed<'a> {
            verdict: Verdict,
            mode: &'a str,
            points_checked: usize,
            worst: &'a Option<Worst>,
            failures: &'a [Failure],
            fixture_notes: &'a [String],
        }
        let view = Untimed {
            verdict: self.verdict,
            mode: &self.mode,
            points_checked: self.points_checked,
            worst: &self.worst,
            failures: &self.failures,
            fixture_notes: &self.fixture_notes,
        };
        serde_json::to_string_pretty(&view).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verdict: {}", self.verdict.as_str());
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(out, "points checked: {}", self.points_checked);
        if let Some(w) = &self.worst {
            let criterion = w.criterion.map_or_else(|| "n/a".to_string(), |c| format!("{c:.6e}"));
            let _ = writeln!(out, "worst: {criterion} at {}", format_point(&w.point));
        }
        let _ = writeln!(out, "failures: {}", self.failures.len());
        for f in &self.failures {
            let _ = writeln!(out, "  {}: {}", format_point(&f.point), f.reason);
        }
        for note in &self.fixture_notes {
            let _ = writeln!(out, "note: {note}");
        }
        let _ = writeln!(out, "wall time: {:.1} ms", self.wall_time_ms);
        out
    }
}

pub fn format_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            verdict: Verdict::Fail,
            mode: "immersion".into(),
            points_checked: 2,
            worst: Some(Worst { point: vec![0.5, -1.0], criterion: Some(0.0) }),
            failures: vec![Failure { point: vec![0.5, -1.0], reason: "rank 0 < 1".into() }],
            fixture_notes: vec!["box: x in [-2, 2]".into()],
            wall_time_ms: 1.25,
        }
    }

    #[test]
    fn json_keys_in_fixed_order() {
        let json = sample().to_json();
        let keys = ["\"verdict\"", "\"mode\"", "\"points_checked\"", "\"worst\"", "\"failures\"", "\"fixture_notes\"", "\"wall_time_ms\""];
        let positions: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{json}");
        assert!(json.contains("\"fail\""));
    }

    #[test]
    fn verdict_strings_and_codes() {
        assert_eq!(serde_json::to_string(&Verdict::BelowCriticalDimension).unwrap(), "\"below-critical-dimension\"");
        assert_eq!(Verdict::Pass.exit_code(), 0);
        assert_eq!(Verdict::Fail.exit_code(), 1);
        assert_eq!(Verdict::BelowCriticalDimension.exit_code(), 3);
    }

    #[test]
    fn time_can_be_stripped() {
        let mut a = sample();
        let mut b = sample();
        a.wall_time_ms = 3.0;
        b.wall_time_ms = 9.0;
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.to_json_without_time(), b.to_json_without_time());
        assert!(!a.to_json_without_time().contains("wall_time_ms"));
    }

    #[test]
    fn text_report_lists_failures() {
        let text = sample().to_text();
        assert!(text.starts_with("verdict: fail\n"));
        assert!(text.contains("(0.500000, -1.000000): rank 0 < 1"));
    }
}
