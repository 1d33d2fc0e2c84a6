//! Machine and human renderings of a suite run.
//!
//! The machine report is TOML with the same `format_version` as configs and
//! carries no timing, so two runs with the same config and seed are
//! byte-identical. Timing goes to the text report only.

use crate::config::{ModelConfig, FORMAT_VERSION};
use crate::suite::RunOptions;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Passed, but some union inclusion was decided by sampling.
    Sampled,
    /// Not applicable to this model.
    Skipped,
    Fail,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Sampled => "sampled",
            Status::Skipped => "skipped",
            Status::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub suite: String,
    pub statement: String,
    pub status: Status,
    pub summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<toml::Value>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct Summary {
    pub pass: usize,
    pub sampled: usize,
    pub skipped: usize,
    pub fail: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub format_version: u32,
    pub model: String,
    pub suite: String,
    pub seed: u64,
    pub tolerance: f64,
    pub mode: String,
    /// Consistency checks quantify over finitely many generated families.
    pub scope: String,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(model: &ModelConfig, opts: &RunOptions, checks: Vec<CheckRecord>) -> Self {
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Sampled => summary.sampled += 1,
                Status::Skipped => summary.skipped += 1,
                Status::Fail => summary.fail += 1,
            }
        }
        Self {
            format_version: FORMAT_VERSION,
            model: model.name.clone(),
            suite: opts.suite.clone(),
            seed: opts.seed,
            tolerance: opts.tolerance,
            mode: opts.mode.name().to_string(),
            scope: "comparison families are finite and seeded; a pass is evidence on those families, not a proof over all families".into(),
            summary,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn render_machine(&self) -> String {
        toml::to_string(self).expect("reports serialize to TOML")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let s = &self.summary;
        writeln!(out, "risktree report: model {}, suite {}, seed {}, mode {}", self.model, self.suite, self.seed, self.mode).unwrap();
        writeln!(out, "tolerance {:e}", self.tolerance).unwrap();
        writeln!(out).unwrap();
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
        for c in &self.checks {
            writeln!(
                out,
                "{:<7} {:<width$}  {:>9.3} ms  {}",
                c.status.name(),
                c.id,
                c.elapsed.as_secs_f64() * 1e3,
                c.summary
            )
            .unwrap();
        }
        let total: Duration = self.checks.iter().map(|c| c.elapsed).sum();
        writeln!(out).unwrap();
        writeln!(
            out,
            "{} pass, {} sampled, {} skipped, {} fail ({:.3} s of check time)",
            s.pass,
            s.sampled,
            s.skipped,
            s.fail,
            total.as_secs_f64()
        )
        .unwrap();
        writeln!(out, "note: {}", self.scope).unwrap();
        out
    }

    /// Writes `report.toml` and `report.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.toml"), self.render_machine())?;
        std::fs::write(dir.join("report.txt"), self.render_text())
    }
}
