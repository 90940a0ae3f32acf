//! Verification reports, as text and as `dcv-report/1` JSON.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::inference::{PropertyResult, Verdict};

pub const REPORT_SCHEMA: &str = "dcv-report/1";
pub const BENCH_SCHEMA: &str = "dcv-bench/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    /// `verified` or `unknown`.
    pub verdict: String,
    /// `induction` or `houdini` when verified.
    pub stage: Option<String>,
    /// Why the verdict is unknown.
    pub reason: Option<String>,
    pub invariant: Option<String>,
    pub lemmas: Vec<String>,
    pub wall_time: f64,
    pub solver_queries: usize,
    pub predicates: usize,
    pub candidates: usize,
    pub survivors: usize,
    pub failed_obligation: Option<String>,
    /// Houdini rounds, only with `--trace`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub contract: String,
    pub file: String,
    pub rules: usize,
    pub verdict: String,
    pub wall_time: f64,
    pub properties: Vec<PropertyReport>,
}

impl PropertyReport {
    pub fn from_result(r: &PropertyResult, trace: bool) -> PropertyReport {
        let (stage, reason, invariant, lemmas, failed) = match &r.verdict {
            Verdict::Verified {
                stage,
                invariant,
                lemmas,
            } => (Some(stage.name().to_string()), None, Some(invariant.to_string()), lemmas.clone(), None),
            Verdict::Unknown { reason, failure } => {
                let why = match reason {
                    crate::inference::UnknownReason::SolverUnknown(w) => format!("{}: {w}", reason.code()),
                    _ => reason.code().to_string(),
                };
                (None, Some(why), None, vec![], failure.as_ref().map(|f| f.obligation.clone()))
            }
        };
        PropertyReport {
            property: r.property.clone(),
            verdict: r.verdict.label().to_string(),
            stage,
            reason,
            invariant,
            lemmas,
            wall_time: r.stats.wall.as_secs_f64(),
            solver_queries: r.stats.queries,
            predicates: r.stats.predicates,
            candidates: r.stats.candidates,
            survivors: r.stats.survivors,
            failed_obligation: failed,
            trace: if trace { r.trace_lines() } else { vec![] },
        }
    }

    pub fn is_verified(&self) -> bool {
        self.verdict == "verified"
    }
}

impl Report {
    pub fn new(contract: &str, file: &str, rules: usize, properties: Vec<PropertyReport>, wall: f64) -> Report {
        let all = properties.iter().all(|p| p.is_verified());
        Report {
            schema: REPORT_SCHEMA.into(),
            contract: contract.into(),
            file: file.into(),
            rules,
            verdict: if all { "verified" } else { "unknown" }.into(),
            wall_time: wall,
            properties,
        }
    }

    pub fn is_verified(&self) -> bool {
        self.verdict == "verified"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "contract {} ({} rules): {}", self.contract, self.rules, self.verdict).unwrap();
        for p in &self.properties {
            let how = p.stage.as_deref().or(p.reason.as_deref()).unwrap_or("");
            writeln!(s, "  {}: {} ({how})", p.property, p.verdict).unwrap();
            for l in &p.trace {
                writeln!(s, "    {l}").unwrap();
            }
            if !p.lemmas.is_empty() {
                writeln!(s, "    invariant:").unwrap();
                for l in &p.lemmas {
                    writeln!(s, "      {l}").unwrap();
                }
            }
            if let Some(o) = &p.failed_obligation {
                writeln!(s, "    failed obligation: {o}").unwrap();
            }
            writeln!(
                s,
                "    time {:.3}s, {} queries, {} candidates, {} survivors",
                p.wall_time, p.solver_queries, p.candidates, p.survivors
            )
            .unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub benchmark: String,
    pub file: String,
    pub rules: Option<usize>,
    /// `verified`, `unknown`, `input-error` or `solver-error`.
    pub verdict: String,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    pub budget: f64,
    pub rows: Vec<BenchRow>,
    pub reports: Vec<Report>,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let w = self.rows.iter().map(|r| r.benchmark.len()).max().unwrap_or(0).max(9);
        let mut s = format!("{:<w$}  {:>5}  {:<12}  {:>9}\n", "benchmark", "rules", "verdict", "seconds");
        for r in &self.rows {
            let rules = r.rules.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
            writeln!(s, "{:<w$}  {:>5}  {:<12}  {:>9.3}", r.benchmark, rules, r.verdict, r.seconds).unwrap();
        }
        s
    }

    pub fn all_verified(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == "verified")
    }
}
