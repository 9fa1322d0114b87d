use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Outcome of one sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    NotConverged,
}

impl RowStatus {
    fn tag(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NotConverged => "not_converged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub params: Vec<f64>,
    pub results: Vec<f64>,
    pub status: RowStatus,
}

/// A one-sided assertion `value <= bound + slack` (or the reverse for
/// lower bounds), evaluated when the report is built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
}

impl Check {
    /// `value <= bound + slack`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, slack: f64) -> Check {
        Check { name: name.into(), passed: value <= bound + slack, value, bound, slack }
    }

    /// `value >= bound - slack`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, slack: f64) -> Check {
        Check { name: name.into(), passed: value >= bound - slack, value, bound, slack }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Check {
        let v = if passed { 1.0 } else { 0.0 };
        Check { name: name.into(), passed, value: v, bound: 1.0, slack: 0.0 }
    }
}

/// One polyline of the report plot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub param_columns: Vec<String>,
    pub result_columns: Vec<String>,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    pub summary: Vec<(String, f64)>,
    pub seed: u64,
    pub resolution: usize,
    pub x_label: String,
    pub y_label: String,
    pub log_log: bool,
    pub series: Vec<Series>,
}

impl ExperimentReport {
    pub fn new(name: &str, params: &[&str], results: &[&str], seed: u64, resolution: usize) -> ExperimentReport {
        ExperimentReport {
            name: name.to_string(),
            param_columns: params.iter().map(|s| s.to_string()).collect(),
            result_columns: results.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
            summary: Vec::new(),
            seed,
            resolution,
            x_label: params.first().map_or_else(String::new, |s| s.to_string()),
            y_label: results.first().map_or_else(String::new, |s| s.to_string()),
            log_log: false,
            series: Vec::new(),
        }
    }

    pub fn push_row(&mut self, label: impl Into<String>, params: Vec<f64>, results: Vec<f64>, converged: bool) {
        debug_assert_eq!(params.len(), self.param_columns.len());
        debug_assert_eq!(results.len(), self.result_columns.len());
        let status = if converged { RowStatus::Ok } else { RowStatus::NotConverged };
        self.rows.push(Row { label: label.into(), params, results, status });
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn summarize(&mut self, name: impl Into<String>, value: f64) {
        self.summary.push((name.into(), value));
    }

    /// Adds the standing check that every row converged.
    pub fn check_rows_converged(&mut self) {
        let bad = self.rows.iter().filter(|r| r.status != RowStatus::Ok).count();
        self.check(Check::at_most("all_rows_converged", bad as f64, 0.0, 0.0));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Column of a result by name.
    pub fn result_column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.result_columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.results[k]).collect())
    }

    /// `kind,label,status,seed,resolution,<params>,<results>,check_value,
    /// check_bound,slack` with one `row`, `check` or `summary` record per
    /// line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# schema={} kind=report name={}", crate::discretize::io::SCHEMA_VERSION, self.name)?;
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["kind", "label", "status", "seed", "resolution"].map(String::from).to_vec();
        header.extend(self.param_columns.iter().cloned());
        header.extend(self.result_columns.iter().cloned());
        header.extend(["check_value", "check_bound", "slack"].map(String::from));
        w.write_record(&header)?;
        let width = self.param_columns.len() + self.result_columns.len();
        let common = |kind: &str, label: &str, status: &str| -> Vec<String> {
            vec![kind.into(), label.into(), status.into(), self.seed.to_string(), self.resolution.to_string()]
        };
        for r in &self.rows {
            let mut rec = common("row", &r.label, r.status.tag());
            rec.extend(r.params.iter().chain(&r.results).map(|v| v.to_string()));
            rec.extend([String::new(), String::new(), String::new()]);
            w.write_record(&rec)?;
        }
        for c in &self.checks {
            let mut rec = common("check", &c.name, if c.passed { "pass" } else { "fail" });
            rec.extend(std::iter::repeat(String::new()).take(width));
            rec.extend([c.value.to_string(), c.bound.to_string(), c.slack.to_string()]);
            w.write_record(&rec)?;
        }
        for (name, v) in &self.summary {
            let mut rec = common("summary", name, "");
            rec.extend(std::iter::repeat(String::new()).take(width));
            rec.extend([v.to_string(), String::new(), String::new()]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text block listing summary values and check outcomes.
    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {} (seed {}, resolution {})", self.name, self.seed, self.resolution);
        for (name, v) in &self.summary {
            let _ = writeln!(s, "  {name} = {v}");
        }
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "  [{tag}] {}: value {} bound {} slack {}", c.name, c.value, c.bound, c.slack);
        }
        let _ = writeln!(s, "  overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    /// Line plot of `series`, log-log when `log_log` is set.
    pub fn svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const M: f64 = 56.0;
        let tf = |v: f64| if self.log_log { v.ln() } else { v };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|&(x, y)| (tf(x), tf(y))))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, self.name);
        if !pts.is_empty() {
            let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
                |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
            );
            if x1 - x0 < 1e-300 {
                x0 -= 0.5;
                x1 += 0.5;
            }
            if y1 - y0 < 1e-12 * y1.abs().max(1.0) {
                let pad = 0.05 * y1.abs().max(1e-3);
                y0 -= pad;
                y1 += pad;
            }
            let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
            let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
            let _ = writeln!(
                s,
                r#"<path d="M{M} {} H{} M{M} {} V{M}" stroke="black" fill="none"/>"#,
                H - M,
                W - M,
                H - M
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, axis_label(&self.x_label, self.log_log));
            let _ = writeln!(s, r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#, H / 2.0, H / 2.0, axis_label(&self.y_label, self.log_log));
            let _ = writeln!(s, r#"<text x="{M}" y="{}" font-size="10">{x0:.4}</text>"#, H - M + 14.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{x1:.4}</text>"#, W - M, H - M + 14.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{y0:.4}</text>"#, M - 4.0, H - M);
            let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{y1:.4}</text>"#, M - 4.0, M + 4.0);
            let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
            for (k, series) in self.series.iter().enumerate() {
                let color = colors[k % colors.len()];
                let path: Vec<String> = series
                    .points
                    .iter()
                    .map(|&(x, y)| (tf(x), tf(y)))
                    .filter(|(x, y)| x.is_finite() && y.is_finite())
                    .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                    .collect();
                let _ = writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#, path.join(" "));
                for p in &path {
                    let (cx, cy) = p.split_once(',').expect("formatted pair");
                    let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#);
                }
                let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#, W - M - 150.0, M + 14.0 * k as f64, series.name);
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn axis_label(name: &str, log: bool) -> String {
    if log {
        format!("log {name}")
    } else {
        name.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = ExperimentReport::new("demo", &["h"], &["lambda"], 7, 64);
        r.push_row("h=1", vec![1.0], vec![3.5], true);
        r.push_row("h=2", vec![2.0], vec![3.25], false);
        r.check(Check::at_most("gap", 0.1, 0.2, 0.0));
        r.summarize("slope", -0.5);
        r.check_rows_converged();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema=1 kind=report name=demo");
        assert_eq!(lines[1], "kind,label,status,seed,resolution,h,lambda,check_value,check_bound,slack");
        assert_eq!(lines[2], "row,h=1,ok,7,64,1,3.5,,,");
        assert_eq!(lines[3], "row,h=2,not_converged,7,64,2,3.25,,,");
        assert_eq!(lines[4], "check,gap,pass,7,64,,,0.1,0.2,0");
        assert_eq!(lines[5], "check,all_rows_converged,fail,7,64,,,1,0,0");
        assert_eq!(lines[6], "summary,slope,,7,64,,,-0.5,,");
        assert!(!r.passed());
        assert_eq!(r.result_column("lambda").unwrap(), vec![3.5, 3.25]);
    }

    #[test]
    fn svg_is_well_formed() {
        let mut r = ExperimentReport::new("demo", &["m"], &["bound"], 0, 8);
        r.log_log = true;
        r.series.push(Series { name: "bound".into(), points: vec![(1.0, 3.0), (2.0, 6.0), (4.0, 12.0)] });
        let svg = r.svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 3);
    }
}
