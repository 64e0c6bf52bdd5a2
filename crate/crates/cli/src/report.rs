//! Machine-readable run reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Informational value, not a pass/fail criterion.
    Info,
    /// The operation declined to run on this input.
    Refused,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub sup: Option<f64>,
    pub mean: Option<f64>,
    pub samples: usize,
    pub tol: Option<f64>,
    pub verdict: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn threshold(name: &str, sup: f64, mean: f64, samples: usize, tol: f64) -> Check {
        Check {
            name: name.into(),
            sup: Some(sup),
            mean: Some(mean),
            samples,
            tol: Some(tol),
            verdict: if sup < tol { Status::Pass } else { Status::Fail },
            detail: None,
        }
    }

    pub fn flag(name: &str, ok: bool, samples: usize, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            sup: None,
            mean: None,
            samples,
            tol: None,
            verdict: if ok { Status::Pass } else { Status::Fail },
            detail: Some(detail.into()),
        }
    }

    pub fn info(name: &str, value: Option<f64>, samples: usize, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            sup: value,
            mean: value,
            samples,
            tol: None,
            verdict: Status::Info,
            detail: Some(detail.into()),
        }
    }

    pub fn refused(name: &str, why: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            sup: None,
            mean: None,
            samples: 0,
            tol: None,
            verdict: Status::Refused,
            detail: Some(why.into()),
        }
    }

    pub fn from_residual(r: &cayley_core::curves::ResidualReport) -> Check {
        use cayley_core::curves::Verdict;
        Check {
            name: r.name.clone(),
            sup: Some(r.sup),
            mean: Some(r.mean),
            samples: r.samples,
            tol: Some(r.tol),
            verdict: match r.verdict {
                Verdict::Pass => Status::Pass,
                Verdict::Fail => Status::Fail,
                Verdict::Inconclusive => Status::Info,
            },
            detail: (r.excluded > 0).then(|| format!("{} rank-deficient samples excluded", r.excluded)),
        }
    }

    pub fn line(&self) -> String {
        let tag = match self.verdict {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
            Status::Refused => "REFUSED",
        };
        let mut line = format!("{tag:<8}{:<34}", self.name);
        if let Some(s) = self.sup {
            line += &format!(" sup={s:.3e}");
        }
        if let (Some(m), true) = (self.mean, self.sup != self.mean) {
            line += &format!(" mean={m:.3e}");
        }
        if self.samples > 0 {
            line += &format!(" n={}", self.samples);
        }
        if let Some(t) = self.tol {
            line += &format!(" tol={t:.0e}");
        }
        if let Some(d) = &self.detail {
            line += &format!("  ({d})");
        }
        line.trim_end().to_string()
    }

    pub fn failed(&self) -> bool {
        matches!(self.verdict, Status::Fail | Status::Refused)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub spec: serde_json::Value,
    /// Headline results, printed before the check table.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    pub timings_ms: serde_json::Map<String, serde_json::Value>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema: 1,
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed: None,
            spec: serde_json::Value::Null,
            notes: Vec::new(),
            checks: Vec::new(),
            timings_ms: serde_json::Map::new(),
            data: serde_json::Value::Null,
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let t = std::time::Instant::now();
        let out = f();
        let ms = t.elapsed().as_secs_f64() * 1e3;
        self.timings_ms.insert(label.into(), serde_json::json!((ms * 1e3).round() / 1e3));
        out
    }

    pub fn passed(&self) -> bool {
        !self.checks.iter().any(Check::failed)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut out = self.notes.clone();
        for c in &self.checks {
            out.push(c.line());
        }
        let n_fail = self.checks.iter().filter(|c| c.failed()).count();
        out.push(format!("{}: {} checks, {} failed", self.command, self.checks.len(), n_fail));
        out
    }

    /// Summary to stdout, or to stderr when stdout carries the JSON report.
    pub fn print_summary(&self, to_stderr: bool) {
        for l in self.summary_lines() {
            if to_stderr {
                eprintln!("{l}");
            } else {
                println!("{l}");
            }
        }
    }

    /// Newline-terminated JSON to a file, or to stdout for "-".
    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        if path == Path::new("-") {
            std::io::stdout().write_all(text.as_bytes())
        } else {
            std::fs::write(path, text)
        }
    }
}
