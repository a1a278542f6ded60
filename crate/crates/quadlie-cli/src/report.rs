//! Subcommand reports: a command echo, informational notes, and the named
//! checks that decide the exit code.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

/// One verdict line. `detail` carries the witness on failure (or a value
/// worth echoing on success) and lands in both renderings. `timing` is
/// human-only: the JSON rendering must stay byte-identical across reruns
/// with the same input and seed, and wall-clock times are not.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip)]
    pub timing: Option<Duration>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Report {
        Report {
            command: command.into(),
            notes: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool, detail: Option<String>) {
        self.checks.push(Check {
            name: name.into(),
            ok,
            detail,
            timing: None,
        });
    }

    pub fn timed_check(
        &mut self,
        name: impl Into<String>,
        ok: bool,
        detail: Option<String>,
        timing: Duration,
    ) {
        self.checks.push(Check {
            name: name.into(),
            ok,
            detail,
            timing: Some(timing),
        });
    }

    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn render_human(&self, elapsed: Duration) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        for note in &self.notes {
            let _ = writeln!(out, "  {note}");
        }
        for c in &self.checks {
            let mark = if c.ok { "pass" } else { "FAIL" };
            let _ = write!(out, "  {mark}  {}", c.name);
            if let Some(detail) = &c.detail {
                let _ = write!(out, "  ({detail})");
            }
            if let Some(t) = c.timing {
                let _ = write!(out, "  [{} ms]", t.as_millis());
            }
            let _ = writeln!(out);
        }
        if self.checks.is_empty() {
            let _ = writeln!(out, "done in {} ms", elapsed.as_millis());
        } else {
            let passed = self.checks.iter().filter(|c| c.ok).count();
            let _ = writeln!(
                out,
                "{passed} of {} checks passed in {} ms",
                self.checks.len(),
                elapsed.as_millis()
            );
        }
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
