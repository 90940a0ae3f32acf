//! External solver process management.
//!
//! Scripts go to the solver's stdin; a reader thread forwards stdout lines
//! so every wait has a deadline. A solver that misses its deadline is
//! killed and the query is reported unknown.

use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::logic::{Expr, Var};

use super::emit::{declarations, script, term, Obligation, SymbolTable, PRELUDE};
use super::model::{parse_model, Model};
use super::sexp::depth_delta;
use super::witness;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// The negated goal is unsatisfiable.
    Valid,
    /// Counterexample, when one was requested and could be read.
    Invalid(Option<Model>),
    Unknown(String),
}

impl Outcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, Outcome::Valid)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("cannot start solver `{path}`: {reason}")]
    Spawn { path: String, reason: String },
    #[error("malformed solver output: {0}")]
    Malformed(String),
    #[error("solver i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Z3,
    Cvc5,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub path: PathBuf,
    /// Replaces the flavor's default command-line flags when non-empty.
    pub args: Vec<String>,
    /// Write every query as `<dir>/<name>.smt2`.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::new("z3")
    }
}

fn io_err(e: std::io::Error) -> SolverError {
    SolverError::Io(e.to_string())
}

/// Sanitized file stem for a query name.
pub fn dump_file_name(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect();
    format!("{s}.smt2")
}

impl SolverConfig {
    pub fn new(path: impl Into<PathBuf>) -> SolverConfig {
        SolverConfig {
            path: path.into(),
            args: Vec::new(),
            dump_dir: None,
        }
    }

    pub fn flavor(&self) -> Flavor {
        let stem = self.path.file_name().map(|s| s.to_string_lossy().to_lowercase()).unwrap_or_default();
        if stem.contains("cvc5") {
            Flavor::Cvc5
        } else {
            Flavor::Z3
        }
    }

    fn command_args(&self) -> Vec<String> {
        if !self.args.is_empty() {
            return self.args.clone();
        }
        match self.flavor() {
            Flavor::Z3 => vec!["-in".into(), "-smt2".into()],
            Flavor::Cvc5 => vec!["--lang=smt2".into(), "--incremental".into()],
        }
    }

    fn timeout_option(&self, t: Duration) -> String {
        let ms = t.as_millis().max(1);
        match self.flavor() {
            Flavor::Z3 => format!("(set-option :timeout {ms})\n"),
            Flavor::Cvc5 => format!("(set-option :tlimit-per {ms})\n"),
        }
    }

    fn dump(&self, name: &str, text: &str) -> Result<(), SolverError> {
        if let Some(dir) = &self.dump_dir {
            write_dump(dir, name, text)?;
        }
        Ok(())
    }

    /// Decide one obligation.
    pub fn check(&self, o: &Obligation, timeout: Duration, want_model: bool) -> Result<Outcome, SolverError> {
        let (text, table) = script(o);
        self.dump(&o.name, &text)?;
        if timeout.is_zero() {
            return Ok(Outcome::Unknown("timeout".into()));
        }
        let mut s = Session::start(self)?;
        s.send_raw(&self.timeout_option(timeout))?;
        s.send(&text)?;
        let out = s.answer(timeout, want_model.then_some(&table));
        s.close();
        out
    }

    /// Decide `common ⟹ goal` for each goal in one solver process, using
    /// push/pop between goals. A goal that hangs costs a restart.
    pub fn check_all(
        &self,
        name: &str,
        common: &[Expr],
        goals: &[(String, Expr)],
        timeout: Duration,
        deadline: Option<Instant>,
    ) -> Result<Vec<Outcome>, SolverError> {
        for (gname, g) in goals {
            let o = Obligation::new(format!("{name}.{gname}"), common.to_vec(), g.clone());
            if self.dump_dir.is_some() {
                self.dump(&o.name, &script(&o).0)?;
            }
        }
        let mut vars: Vec<Var> = Vec::new();
        {
            let mut all = Obligation::new(name, common.to_vec(), Expr::tt());
            all.assumptions.extend(goals.iter().map(|(_, g)| g.clone()));
            vars.extend(all.decls());
        }
        let table = SymbolTable::new(&vars);
        let mut context = String::new();
        context.push_str(PRELUDE);
        context.push_str(&declarations(&table));
        for a in common {
            context.push_str(&format!("(assert {})\n", term(a, &table)));
        }

        let mut out = Vec::with_capacity(goals.len());
        let mut session: Option<Session> = None;
        for (_, g) in goals {
            let t = match deadline {
                Some(d) => timeout.min(d.saturating_duration_since(Instant::now())),
                None => timeout,
            };
            if t.is_zero() {
                out.push(Outcome::Unknown("timeout".into()));
                continue;
            }
            let s = match &mut session {
                Some(s) => s,
                None => {
                    let mut s = Session::start(self)?;
                    s.send(&context)?;
                    session.insert(s)
                }
            };
            s.send_raw(&self.timeout_option(t))?;
            s.send(&format!("(push 1)\n(assert (not {}))\n(check-sat)\n", term(g, &table)))?;
            let r = s.answer(t, None)?;
            if r == Outcome::Unknown("timeout".into()) && s.killed {
                session.take().unwrap().close();
            } else {
                s.send("(pop 1)\n")?;
            }
            out.push(r);
        }
        if let Some(s) = session {
            s.close();
        }
        Ok(out)
    }
}

/// Result of one goal in [`SolverConfig::refute_many`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refutation {
    /// `premises ⟹ goal` is valid.
    Holds,
    Refuted,
    Unknown(String),
}

impl SolverConfig {
    /// Find every goal that fails under the common premises.
    ///
    /// Each goal gets an indicator `b_i ⟹ ¬goal_i`; the solver is asked for
    /// a model of `⋁ b_i` over the goals not yet refuted, and every
    /// indicator true in that model is refuted, as is every goal the model
    /// itself falsifies. Repeats until unsat. If the batched query comes back
    /// unknown, the rest are split in halves and retried, down to single
    /// goals.
    pub fn refute_many(
        &self,
        name: &str,
        premises: &[Expr],
        goals: &[Expr],
        timeout: Duration,
        deadline: Option<Instant>,
    ) -> Result<(Vec<Refutation>, usize), SolverError> {
        let mut out = vec![Refutation::Holds; goals.len()];
        if goals.is_empty() {
            return Ok((out, 0));
        }
        let remaining_time = |now: Instant| match deadline {
            Some(d) => timeout.min(d.saturating_duration_since(now)),
            None => timeout,
        };
        if remaining_time(Instant::now()).is_zero() {
            return Ok((vec![Refutation::Unknown("timeout".into()); goals.len()], 0));
        }
        let flags: Vec<Var> = (0..goals.len())
            .map(|i| Var::new(format!("refute#{i}"), crate::logic::Sort::Bool, crate::logic::VarKind::Aux))
            .collect();
        let mut defs = Vec::with_capacity(goals.len());
        for (b, g) in flags.iter().zip(goals) {
            defs.push(Expr::Implies(Box::new(b.expr()), Box::new(Expr::Not(Box::new(g.clone())))));
        }
        let vars = {
            let mut o = Obligation::new(name, premises.to_vec(), Expr::tt());
            o.assumptions.extend(defs.iter().cloned());
            o.decls()
        };
        let table = SymbolTable::new(&vars);
        let mut s = Session::start(self)?;
        let mut queries = 0;
        s.send(&format!("; {name}\n{PRELUDE}"))?;
        s.send(&declarations(&table))?;
        for a in premises.iter().chain(&defs) {
            s.send(&format!("(assert {})\n", term(a, &table)))?;
        }
        let mut open: Vec<usize> = (0..goals.len()).collect();
        let mut fallback = false;
        while !open.is_empty() {
            let t = remaining_time(Instant::now());
            if t.is_zero() {
                fallback = true;
                break;
            }
            let ors: Vec<String> = open.iter().map(|&i| term(&flags[i].expr(), &table)).collect();
            s.send_raw(&self.timeout_option(t))?;
            s.send(&format!("(push 1)\n(assert (or {}))\n(check-sat)\n", ors.join(" ")))?;
            queries += 1;
            let Some(r) = s.response(Instant::now() + t + grace(t))? else {
                s.kill();
                fallback = true;
                break;
            };
            match r.trim() {
                "unsat" => {
                    s.send("(pop 1)\n")?;
                    open.clear();
                }
                "sat" => {
                    s.send(&format!("(get-value ({}))\n", ors.join(" ")))?;
                    let Some(v) = s.response(Instant::now() + grace(t))? else {
                        s.kill();
                        fallback = true;
                        break;
                    };
                    let trues = true_symbols(&v)?;
                    let model = if open.len() > 1 {
                        s.send("(get-model)\n")?;
                        match s.response(Instant::now() + grace(t))? {
                            Some(text) => parse_model(&text, &table).ok(),
                            None => {
                                s.kill();
                                fallback = true;
                                break;
                            }
                        }
                    } else {
                        None
                    };
                    let dom = model.as_ref().and_then(|m| {
                        let gs: Vec<&Expr> = open.iter().map(|&i| &goals[i]).collect();
                        witness::domain(m, &gs)
                    });
                    let before = open.len();
                    open.retain(|&i| {
                        let sym = &table.by_var[&flags[i]];
                        let by_model = match (&model, &dom) {
                            (Some(m), Some(d)) => witness::falsified(m, &goals[i], d),
                            _ => false,
                        };
                        if trues.contains(sym) || by_model {
                            out[i] = Refutation::Refuted;
                            false
                        } else {
                            true
                        }
                    });
                    s.send("(pop 1)\n")?;
                    if open.len() == before {
                        fallback = true;
                        break;
                    }
                }
                "unknown" => {
                    s.send("(pop 1)\n")?;
                    fallback = true;
                    break;
                }
                other => {
                    s.kill();
                    return Err(SolverError::Malformed(other.lines().next().unwrap_or("").chars().take(200).collect()));
                }
            }
        }
        if let (Some(dir), Some(text)) = (&self.dump_dir, s.transcript.take()) {
            write_dump(dir, name, &text)?;
        }
        s.close();
        if fallback && open.len() > BISECT_BELOW {
            let timed_out = remaining_time(Instant::now()).is_zero();
            if !timed_out {
                let (a, b) = open.split_at(open.len() / 2);
                for (part, idx) in [("a", a), ("b", b)] {
                    let gs: Vec<Expr> = idx.iter().map(|&i| goals[i].clone()).collect();
                    let (rs, q) = self.refute_many(&format!("{name}.{part}"), premises, &gs, timeout, deadline)?;
                    queries += q;
                    for (&i, r) in idx.iter().zip(rs) {
                        out[i] = r;
                    }
                }
                return Ok((out, queries));
            }
        }
        if fallback && !open.is_empty() {
            let cfg = SolverConfig {
                dump_dir: None,
                ..self.clone()
            };
            let single: Vec<(String, Expr)> = open.iter().map(|&i| (format!("goal{i}"), goals[i].clone())).collect();
            let rs = cfg.check_all(name, premises, &single, timeout, deadline)?;
            queries += rs.len();
            for (&i, r) in open.iter().zip(rs) {
                out[i] = match r {
                    Outcome::Valid => Refutation::Holds,
                    Outcome::Invalid(_) => Refutation::Refuted,
                    Outcome::Unknown(why) => Refutation::Unknown(why),
                };
            }
        }
        Ok((out, queries))
    }
}

/// Symbols bound to `true` in a `get-value` response.
fn true_symbols(text: &str) -> Result<std::collections::BTreeSet<String>, SolverError> {
    let xs = super::sexp::parse_all(text).map_err(SolverError::Malformed)?;
    let mut out = std::collections::BTreeSet::new();
    let Some(pairs) = xs.first().and_then(|x| x.list()) else {
        return Err(SolverError::Malformed(text.trim().to_string()));
    };
    for p in pairs {
        if let Some([k, v]) = p.list() {
            if let (Some(k), Some("true")) = (k.atom(), v.atom()) {
                out.insert(k.to_string());
            }
        }
    }
    Ok(out)
}

pub fn write_dump(dir: &Path, name: &str, text: &str) -> Result<(), SolverError> {
    std::fs::create_dir_all(dir).map_err(io_err)?;
    std::fs::write(dir.join(dump_file_name(name)), text).map_err(io_err)
}

/// Batches at most this large are decided one goal at a time.
const BISECT_BELOW: usize = 4;

fn grace(t: Duration) -> Duration {
    Duration::from_millis(500) + t / 4
}

struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    stderr: Arc<Mutex<String>>,
    killed: bool,
    /// Everything sent, when dumping.
    transcript: Option<String>,
}

impl Session {
    fn start(cfg: &SolverConfig) -> Result<Session, SolverError> {
        let mut child = Command::new(&cfg.path)
            .args(cfg.command_args())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| SolverError::Spawn {
                path: cfg.path.display().to_string(),
                reason: e.to_string(),
            })?;
        let stdout = child.stdout.take().unwrap();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        {
            let buf = Arc::clone(&stderr);
            let err = child.stderr.take().unwrap();
            thread::spawn(move || {
                for line in BufReader::new(err).lines() {
                    let Ok(line) = line else { break };
                    let mut b = buf.lock().unwrap();
                    if b.len() < 4096 {
                        b.push_str(&line);
                        b.push('\n');
                    }
                }
            });
        }
        Ok(Session {
            stdin: child.stdin.take(),
            child,
            lines: rx,
            stderr,
            killed: false,
            transcript: cfg.dump_dir.as_ref().map(|_| String::new()),
        })
    }

    fn send(&mut self, text: &str) -> Result<(), SolverError> {
        if let Some(t) = self.transcript.as_mut() {
            t.push_str(text);
        }
        self.send_raw(text)
    }

    /// Send without recording; for options that vary between runs.
    fn send_raw(&mut self, text: &str) -> Result<(), SolverError> {
        let Some(w) = self.stdin.as_mut() else {
            return Err(SolverError::Io("solver stdin closed".into()));
        };
        // a solver that already exited shows up when reading the answer
        let _ = w.write_all(text.as_bytes()).and_then(|_| w.flush());
        Ok(())
    }

    fn exited(&mut self) -> SolverError {
        let _ = self.child.wait();
        let err = self.stderr.lock().unwrap().trim().to_string();
        if err.is_empty() {
            SolverError::Malformed("solver exited without an answer".into())
        } else {
            SolverError::Malformed(format!("solver exited without an answer: {err}"))
        }
    }

    /// One response: a line, or a balanced parenthesized block. `None` on
    /// deadline.
    fn response(&mut self, deadline: Instant) -> Result<Option<String>, SolverError> {
        let mut buf = String::new();
        let mut depth = 0;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(line) => {
                    if buf.is_empty() && line.trim().is_empty() {
                        continue;
                    }
                    depth += depth_delta(&line);
                    buf.push_str(&line);
                    buf.push('\n');
                    if depth <= 0 {
                        return Ok(Some(buf));
                    }
                }
                Err(RecvTimeoutError::Timeout) => return Ok(None),
                Err(RecvTimeoutError::Disconnected) => return Err(self.exited()),
            }
        }
    }

    fn answer(&mut self, timeout: Duration, model: Option<&SymbolTable>) -> Result<Outcome, SolverError> {
        let deadline = Instant::now() + timeout + grace(timeout);
        let Some(r) = self.response(deadline)? else {
            self.kill();
            return Ok(Outcome::Unknown("timeout".into()));
        };
        match r.trim() {
            "unsat" => Ok(Outcome::Valid),
            "sat" => {
                let Some(table) = model else { return Ok(Outcome::Invalid(None)) };
                self.send("(get-model)\n")?;
                let m = match self.response(Instant::now() + grace(timeout))? {
                    Some(text) => parse_model(&text, table).ok(),
                    None => {
                        self.kill();
                        None
                    }
                };
                Ok(Outcome::Invalid(m))
            }
            "unknown" => {
                self.send("(get-info :reason-unknown)\n")?;
                let reason = match self.response(Instant::now() + grace(timeout))? {
                    Some(t) => reason_of(&t),
                    None => {
                        self.kill();
                        "unknown".into()
                    }
                };
                Ok(Outcome::Unknown(reason))
            }
            other => {
                self.kill();
                Err(SolverError::Malformed(other.lines().next().unwrap_or("").chars().take(200).collect()))
            }
        }
    }

    fn kill(&mut self) {
        if !self.killed {
            let _ = self.child.kill();
            let _ = self.child.wait();
            self.killed = true;
        }
    }

    fn close(mut self) {
        if !self.killed {
            let _ = self.send("(exit)\n");
            self.stdin.take();
            let deadline = Instant::now() + Duration::from_millis(200);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = self.child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(2));
            }
        }
        self.kill();
    }
}

/// `(:reason-unknown "timeout")` → `timeout`; cancellation counts as timeout.
fn reason_of(text: &str) -> String {
    let inner = text
        .split('"')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| text.trim().trim_matches(|c| c == '(' || c == ')').to_string());
    let inner = inner.trim().trim_start_matches(":reason-unknown").trim().to_string();
    if inner == "canceled" || inner.contains("timeout") || inner.contains("resourceout") {
        "timeout".into()
    } else if inner.is_empty() {
        "unknown".into()
    } else {
        inner
    }
}
