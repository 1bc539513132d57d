//! Verdicts collected by the scenario runner, rendered as text.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The scenario data contradicts itself; not a numerical failure.
    Inconsistent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconsistent => "inconsistent",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    /// `suite.check`
    pub name: String,
    pub verdict: Verdict,
    /// Largest `k` with agreement mod `p^k`, capped at the working precision.
    pub margin: i64,
    pub time_ms: u128,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub scenario: String,
    pub floor: i64,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn new(scenario: &str, floor: i64) -> Self {
        Report { scenario: scenario.to_string(), floor, checks: Vec::new() }
    }

    /// Records a check, downgrading a pass whose margin is below the floor.
    pub fn push(&mut self, mut check: CheckResult) {
        if check.verdict == Verdict::Pass && check.margin < self.floor {
            check.verdict = Verdict::Fail;
            if check.detail.is_empty() {
                check.detail = format!("margin {} below floor {}", check.margin, self.floor);
            }
        }
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    /// Suites in first-seen order with their aggregate pass flag.
    pub fn suites(&self) -> Vec<(String, bool)> {
        let mut out: Vec<(String, bool)> = Vec::new();
        for c in &self.checks {
            let suite = c.name.split('.').next().unwrap_or_default().to_string();
            let ok = c.verdict == Verdict::Pass;
            match out.iter_mut().find(|(s, _)| *s == suite) {
                Some(entry) => entry.1 &= ok,
                None => out.push((suite, ok)),
            }
        }
        out
    }

    /// One `name=verdict margin=<int> time_ms=<int>` line per check. Times
    /// are written as 0 unless `timing` is set, so reports stay reproducible.
    pub fn to_kv(&self, timing: bool) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let t = if timing { c.time_ms } else { 0 };
            let _ = writeln!(out, "{}={} margin={} time_ms={}", c.name, c.verdict.as_str(), c.margin, t);
        }
        out
    }

    pub fn to_human(&self, timing: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {} (floor {} digits)", self.scenario, self.floor);
        for c in &self.checks {
            let _ = write!(out, "  [{:<12}] {:<36} margin {:>3}", c.verdict.as_str(), c.name, c.margin);
            if timing {
                let _ = write!(out, "  {} ms", c.time_ms);
            }
            if !c.detail.is_empty() {
                let _ = write!(out, "  {}", c.detail);
            }
            out.push('\n');
        }
        for (suite, ok) in self.suites() {
            let _ = writeln!(out, "suite {suite}: {}", if ok { "pass" } else { "fail" });
        }
        let _ = writeln!(out, "{}", if self.passed() { "all selected suites pass" } else { "some checks failed" });
        out
    }
}
