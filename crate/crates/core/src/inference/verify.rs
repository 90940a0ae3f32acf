//! Proof by induction, strengthened by Houdini when plain induction fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use crate::compiler::Compiled;
use crate::frontend::ValidatedContract;
use crate::logic::{prime, Expr, Property, TransitionSystem};
use crate::solver::{Model, Obligation, Outcome, SolverConfig};

use super::bmc::reachable_filter;
use super::candidates::{generate, CandidateOptions};
use super::houdini::{find_inductive_invariant, HoudiniCandidate, HoudiniConfig, HoudiniError, Problem, Round};
use super::predicates::{extract_all, ExtractOptions};

#[derive(Debug, Clone)]
pub struct VerifierConfig {
    pub solver: SolverConfig,
    pub qtimeout: Duration,
    pub budget: Duration,
    pub candidates: CandidateOptions,
    pub extract: ExtractOptions,
    /// Transactions unrolled from init to pre-filter candidates; 0 disables.
    pub reach_depth: usize,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            solver: SolverConfig::default(),
            qtimeout: Duration::from_secs(10),
            budget: Duration::from_secs(3600),
            candidates: CandidateOptions::default(),
            extract: ExtractOptions::default(),
            reach_depth: 3,
        }
    }
}

impl VerifierConfig {
    pub fn with_solver(path: impl Into<PathBuf>) -> Self {
        VerifierConfig {
            solver: SolverConfig::new(path),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Base,
    PlainInduction,
    Houdini,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Base => "base",
            Stage::PlainInduction => "induction",
            Stage::Houdini => "houdini",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownReason {
    FailedBase,
    NoInductiveStrengthening,
    SolverUnknown(String),
}

impl UnknownReason {
    pub fn code(&self) -> &'static str {
        match self {
            UnknownReason::FailedBase => "failed-base",
            UnknownReason::NoInductiveStrengthening => "no-inductive-strengthening",
            UnknownReason::SolverUnknown(_) => "solver-unknown",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub wall: Duration,
    pub queries: usize,
    pub predicates: usize,
    pub candidates: usize,
    pub survivors: usize,
}

/// Why the last obligation failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureInfo {
    pub obligation: String,
    /// State pair from the solver; not necessarily reachable.
    pub model: Option<Model>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Verified {
        stage: Stage,
        /// `inv ∧ prop`.
        invariant: Expr,
        /// Surviving candidates, printed.
        lemmas: Vec<String>,
    },
    Unknown {
        reason: UnknownReason,
        failure: Option<FailureInfo>,
    },
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Verified { .. } => "verified",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub property: String,
    pub verdict: Verdict,
    pub stats: Stats,
    pub rounds: Vec<Round>,
    /// Candidate texts, indexed as in `rounds`.
    pub candidate_text: Vec<String>,
}

impl PropertyResult {
    /// One line per Houdini round.
    pub fn trace_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rounds {
            out.push(format!(
                "{}: round {}: {} active, {} refuted, {} unknown, {} kept",
                self.property,
                r.index,
                r.active,
                r.refuted.len(),
                r.unknown.len(),
                r.active - r.refuted.len() - r.unknown.len()
            ));
            for &i in r.refuted.iter().chain(&r.unknown) {
                out.push(format!("  drop {}", self.candidate_text[i]));
            }
        }
        out
    }
}

/// Base and consecution obligations for `inv` (which should include the
/// property), one consecution per transition.
pub fn induction_obligations(ts: &TransitionSystem, name: &str, inv: &Expr) -> Result<Vec<Obligation>, HoudiniError> {
    let mut out = vec![Obligation::new(
        format!("{}.{name}.base", ts.contract),
        vec![ts.init.clone(), ts.axioms.clone()],
        inv.clone(),
    )];
    let inv2 = prime(inv)?;
    for t in &ts.transitions {
        out.push(Obligation::new(
            format!("{}.{name}.step.{}", ts.contract, t.name),
            vec![ts.axioms.clone(), inv.clone(), t.formula.clone()],
            inv2.clone(),
        ));
    }
    Ok(out)
}

struct Run<'a> {
    cfg: &'a VerifierConfig,
    deadline: Instant,
    stats: Stats,
}

enum Check {
    Valid,
    Invalid(FailureInfo),
    Unknown(String, FailureInfo),
}

impl Run<'_> {
    fn timeout(&self) -> Duration {
        self.cfg.qtimeout.min(self.deadline.saturating_duration_since(Instant::now()))
    }

    /// All obligations valid? Stops at the first one that is not.
    fn check_all(&mut self, obs: &[Obligation]) -> Result<Check, HoudiniError> {
        for o in obs {
            self.stats.queries += 1;
            let info = |m| FailureInfo {
                obligation: o.name.clone(),
                model: m,
            };
            match self.cfg.solver.check(o, self.timeout(), true)? {
                Outcome::Valid => {}
                Outcome::Invalid(m) => return Ok(Check::Invalid(info(m))),
                Outcome::Unknown(why) => return Ok(Check::Unknown(why, info(None))),
            }
        }
        Ok(Check::Valid)
    }
}

fn unknown(why: String, f: FailureInfo) -> Verdict {
    Verdict::Unknown {
        reason: UnknownReason::SolverUnknown(why),
        failure: Some(f),
    }
}

/// Decide one property: base, plain induction, then Houdini.
pub fn verify_property(
    vc: &ValidatedContract,
    compiled: &Compiled,
    prop: &Property,
    cfg: &VerifierConfig,
    deadline: Instant,
) -> Result<PropertyResult, HoudiniError> {
    let start = Instant::now();
    let ts = &compiled.system;
    let mut run = Run {
        cfg,
        deadline,
        stats: Stats::default(),
    };
    let mut result = PropertyResult {
        property: prop.name.clone(),
        verdict: Verdict::Unknown {
            reason: UnknownReason::NoInductiveStrengthening,
            failure: None,
        },
        stats: Stats::default(),
        rounds: Vec::new(),
        candidate_text: Vec::new(),
    };
    let finish = |mut r: PropertyResult, run: Run, v: Verdict| {
        r.verdict = v;
        r.stats = run.stats;
        r.stats.wall = start.elapsed();
        Ok(r)
    };

    // (1) base
    let obs = induction_obligations(ts, &prop.name, &prop.formula)?;
    match run.check_all(&obs[..1])? {
        Check::Valid => {}
        Check::Invalid(f) => {
            let v = Verdict::Unknown {
                reason: UnknownReason::FailedBase,
                failure: Some(f),
            };
            return finish(result, run, v);
        }
        Check::Unknown(why, f) => return finish(result, run, unknown(why, f)),
    }

    // (2) plain induction
    match run.check_all(&obs[1..])? {
        Check::Valid => {
            let v = Verdict::Verified {
                stage: Stage::PlainInduction,
                invariant: prop.formula.clone(),
                lemmas: vec![],
            };
            return finish(result, run, v);
        }
        Check::Unknown(why, f) if why == "timeout" && Instant::now() >= deadline => {
            return finish(result, run, unknown(why, f));
        }
        _ => {}
    }

    // (3) candidates and Houdini
    let preds = extract_all(vc, &compiled.gamma, cfg.extract)?;
    let mut taken: BTreeSet<String> = ts.state_vars.iter().map(|v| v.name.clone()).collect();
    taken.insert("init".into());
    let cands = generate(&preds, &taken, cfg.candidates);
    run.stats.predicates = preds.len();
    run.stats.candidates = cands.len();
    result.candidate_text = cands.iter().map(|c| c.display()).collect();
    let hc: Vec<HoudiniCandidate> = cands
        .iter()
        .map(|c| HoudiniCandidate {
            formula: c.closed_form(&ts.init),
            init_guarded: true,
            label: c.display(),
        })
        .collect();
    let problem = Problem {
        name: format!("{}.{}", ts.contract, prop.name),
        init: ts.init.clone(),
        axioms: ts.axioms.clone(),
        prop: prop.formula.clone(),
        transitions: ts.transitions.iter().map(|t| (t.name.clone(), t.formula.clone())).collect(),
    };

    // round 0: bounded reachability
    let mut kept: Vec<usize> = (0..hc.len()).collect();
    if cfg.reach_depth > 0 && !hc.is_empty() {
        let forms: Vec<Expr> = hc.iter().map(|c| c.formula.clone()).collect();
        let f = reachable_filter(ts, &problem.name, &forms, cfg.reach_depth, &cfg.solver, cfg.qtimeout, Some(deadline))?;
        run.stats.queries += f.queries;
        let refuted: Vec<usize> = f.refuted.iter().map(|&(i, _)| i).collect();
        kept.retain(|i| !refuted.contains(i));
        result.rounds.push(Round {
            index: 0,
            active: hc.len(),
            refuted,
            unknown: vec![],
        });
    }
    let sub: Vec<HoudiniCandidate> = kept.iter().map(|&i| hc[i].clone()).collect();
    let hcfg = HoudiniConfig {
        solver: cfg.solver.clone(),
        qtimeout: cfg.qtimeout,
        deadline: Some(deadline),
    };
    let h = find_inductive_invariant(&problem, &sub, &hcfg)?;
    let back = |xs: &[usize]| -> Vec<usize> { xs.iter().map(|&i| kept[i]).collect() };
    let survivors = back(&h.survivors);
    run.stats.queries += h.queries;
    run.stats.survivors = survivors.len();
    result.rounds.extend(h.rounds.iter().map(|r| Round {
        index: r.index,
        active: r.active,
        refuted: back(&r.refuted),
        unknown: back(&r.unknown),
    }));

    let mut conj: Vec<Expr> = survivors.iter().map(|&i| hc[i].formula.clone()).collect();
    conj.push(prop.formula.clone());
    let inv = Expr::And(conj);
    let obs = induction_obligations(ts, &prop.name, &inv)?;
    let v = match run.check_all(&obs)? {
        Check::Valid => Verdict::Verified {
            stage: Stage::Houdini,
            invariant: inv,
            lemmas: survivors.iter().map(|&i| hc[i].label.clone()).collect(),
        },
        Check::Invalid(f) => Verdict::Unknown {
            reason: if h.incomplete && Instant::now() >= deadline {
                UnknownReason::SolverUnknown("timeout".into())
            } else {
                UnknownReason::NoInductiveStrengthening
            },
            failure: Some(f),
        },
        Check::Unknown(why, f) => unknown(why, f),
    };
    finish(result, run, v)
}

/// Every property of a compiled contract, sharing one budget.
pub fn verify_contract(
    vc: &ValidatedContract,
    compiled: &Compiled,
    cfg: &VerifierConfig,
) -> Result<Vec<PropertyResult>, HoudiniError> {
    let now = Instant::now();
    let deadline = now.checked_add(cfg.budget).unwrap_or(now + Duration::from_secs(365 * 86400));
    compiled
        .system
        .properties
        .iter()
        .map(|p| verify_property(vc, compiled, p, cfg, deadline))
        .collect()
}
