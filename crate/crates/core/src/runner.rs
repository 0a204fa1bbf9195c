//! Executes a schedule against real solver processes.
//!
//! Solvers run one at a time. Each child gets its allotment, enforced by a
//! watchdog while its standard output is scanned for the success marker. A
//! solver that exits early without success hands its unused time to the
//! next entry. Once the schedule is exhausted, solvers not yet run are
//! tried in fallback order, each with whatever budget is left.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, SolverId};
use crate::sunny::Schedule;
use crate::time::ExactMs;

pub const INSTANCE_PLACEHOLDER: &str = "{instance}";
/// MiniZinc solution separator.
pub const DEFAULT_SUCCESS_MARKER: &str = "----------";
/// Time a child gets between the termination request and the kill.
pub const TERMINATION_GRACE: Duration = Duration::from_secs(1);

const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverCommand {
    pub solver: SolverId,
    /// Program and arguments; exactly one occurrence of `{instance}` overall.
    pub command: Vec<String>,
    /// A stdout line equal to this (ignoring trailing whitespace) means solved.
    pub success_marker: String,
}

impl SolverCommand {
    pub fn new(solver: SolverId, command: Vec<String>, success_marker: Option<String>) -> Result<Self> {
        if command.is_empty() {
            return Err(Error::InvalidConfig(format!("solver `{solver}`: empty command")));
        }
        let placeholders: usize = command.iter().map(|a| a.matches(INSTANCE_PLACEHOLDER).count()).sum();
        if placeholders != 1 {
            return Err(Error::InvalidConfig(format!(
                "solver `{solver}`: command must contain {INSTANCE_PLACEHOLDER} exactly once, found {placeholders}"
            )));
        }
        let success_marker = success_marker.unwrap_or_else(|| DEFAULT_SUCCESS_MARKER.to_owned());
        if success_marker.trim().is_empty() {
            return Err(Error::InvalidConfig(format!("solver `{solver}`: empty success marker")));
        }
        Ok(Self { solver, command, success_marker })
    }

    fn argv(&self, instance: &Path) -> Vec<String> {
        let path = instance.to_string_lossy();
        self.command.iter().map(|a| a.replace(INSTANCE_PLACEHOLDER, &path)).collect()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    solvers: BTreeMap<String, CommandEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommandEntry {
    command: Vec<String>,
    success_marker: Option<String>,
}

/// Solver name to command mapping, read from TOML:
///
/// ```toml
/// [solvers.gecode]
/// command = ["fzn-gecode", "{instance}"]
/// success_marker = "----------"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolversConfig {
    commands: BTreeMap<SolverId, SolverCommand>,
}

impl SolversConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(format!("solvers config: {e}")))?;
        let mut config = Self::default();
        for (name, entry) in file.solvers {
            config.insert(SolverCommand::new(name.into(), entry.command, entry.success_marker)?);
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_toml(&text)
    }

    pub fn insert(&mut self, command: SolverCommand) {
        self.commands.insert(command.solver.clone(), command);
    }

    pub fn get(&self, solver: &SolverId) -> Option<&SolverCommand> {
        self.commands.get(solver)
    }

    /// Configured solvers in name order.
    pub fn solvers(&self) -> Vec<SolverId> {
        self.commands.keys().cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepOutcome {
    Solved,
    Timeout,
    PrematureExit,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionStep {
    pub solver: SolverId,
    pub allotted_ms: u64,
    pub elapsed_ms: u64,
    pub outcome: StepOutcome,
    /// Run from the fallback chain rather than the schedule.
    pub fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub instance: String,
    pub timeout_ms: u64,
    pub steps: Vec<ExecutionStep>,
    pub solved: bool,
    /// Time to the success marker when solved, else total wall time.
    pub total_ms: u64,
}

impl ExecutionTrace {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace serializes");
        s.push('\n');
        s
    }
}

/// Portfolio ordered by solved count on `kb` (descending), then by name.
pub fn fallback_order(kb: &KnowledgeBase, portfolio: &[SolverId]) -> Result<Vec<SolverId>> {
    let mut scored = portfolio
        .iter()
        .map(|s| Ok((kb.solver_totals(kb.solver_index(s.as_str())?, kb.timeout_ms()).0, s.clone())))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    Ok(scored.into_iter().map(|(_, s)| s).collect())
}

fn exact_to_duration(ms: ExactMs) -> Duration {
    let nanos = *ms.numer() as u128 * 1_000_000 / *ms.denom() as u128;
    Duration::from_nanos(nanos.min(u64::MAX as u128) as u64)
}

/// Runs `schedule` on the instance file, then the fallback chain, until a
/// solver reports success or `timeout_ms` is spent.
pub fn execute_schedule(
    schedule: &Schedule,
    instance: &Path,
    commands: &SolversConfig,
    fallback: &[SolverId],
    timeout_ms: u64,
) -> Result<ExecutionTrace> {
    for solver in schedule.entries.iter().map(|e| &e.solver).chain(fallback) {
        if commands.get(solver).is_none() {
            return Err(Error::Runner(format!("no command configured for solver `{solver}`")));
        }
    }
    std::fs::File::open(instance).map_err(|source| Error::Io { path: instance.to_owned(), source })?;

    let budget = Duration::from_millis(timeout_ms);
    let start = Instant::now();
    let mut steps = Vec::new();
    let mut executed = HashSet::new();
    let mut carry = Duration::ZERO;

    let finish = |steps: Vec<ExecutionStep>, solved_at: Option<Duration>| ExecutionTrace {
        instance: instance.to_string_lossy().into_owned(),
        timeout_ms,
        solved: solved_at.is_some(),
        total_ms: solved_at.unwrap_or_else(|| start.elapsed()).as_millis() as u64,
        steps,
    };

    let scheduled = schedule.entries.iter().map(|e| (&e.solver, Some(exact_to_duration(e.allotted_ms)), false));
    let fallen_back = fallback.iter().map(|s| (s, None, true));
    for (solver, allotment, is_fallback) in scheduled.chain(fallen_back) {
        if executed.contains(solver) {
            continue;
        }
        let remaining = budget.saturating_sub(start.elapsed());
        if remaining < Duration::from_millis(1) {
            break;
        }
        let allot = match allotment {
            Some(a) => (a + carry).min(remaining),
            None => remaining,
        };
        executed.insert(solver.clone());
        let step_start = start.elapsed();
        let run = run_solver(commands.get(solver).expect("checked above"), instance, allot);
        carry = allot.saturating_sub(run.elapsed);
        steps.push(ExecutionStep {
            solver: solver.clone(),
            allotted_ms: allot.as_millis() as u64,
            elapsed_ms: run.elapsed.as_millis() as u64,
            outcome: run.outcome,
            fallback: is_fallback,
            message: run.message,
        });
        if run.outcome == StepOutcome::Solved {
            return Ok(finish(steps, Some(step_start + run.elapsed)));
        }
    }
    Ok(finish(steps, None))
}

struct SolverRun {
    outcome: StepOutcome,
    elapsed: Duration,
    message: Option<String>,
}

enum Event {
    Marker(Instant),
    Eof,
}

fn spawn(argv: &[String]) -> std::io::Result<Child> {
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..]).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::null());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        // own process group, so shell wrappers and their children die together
        cmd.process_group(0);
    }
    cmd.spawn()
}

fn run_solver(command: &SolverCommand, instance: &Path, allot: Duration) -> SolverRun {
    let t0 = Instant::now();
    let mut child = match spawn(&command.argv(instance)) {
        Ok(c) => c,
        Err(e) => {
            return SolverRun { outcome: StepOutcome::Error, elapsed: t0.elapsed(), message: Some(e.to_string()) }
        }
    };
    let deadline = t0 + allot;

    let (tx, rx) = mpsc::channel();
    let stdout = child.stdout.take().expect("stdout is piped");
    let marker = command.success_marker.trim_end().to_owned();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            match line {
                Ok(l) if l.trim_end() == marker => {
                    let _ = tx.send(Event::Marker(Instant::now()));
                    return;
                }
                Ok(_) => {}
                Err(_) => break,
            }
        }
        let _ = tx.send(Event::Eof);
    });

    let mut stream_open = true;
    loop {
        let now = Instant::now();
        if now >= deadline {
            break;
        }
        if stream_open {
            match rx.recv_timeout(deadline - now) {
                Ok(Event::Marker(at)) => {
                    terminate(&mut child);
                    return SolverRun { outcome: StepOutcome::Solved, elapsed: at - t0, message: None };
                }
                Ok(Event::Eof) | Err(mpsc::RecvTimeoutError::Disconnected) => stream_open = false,
                Err(mpsc::RecvTimeoutError::Timeout) => break,
            }
        } else {
            match child.try_wait() {
                Ok(Some(status)) => {
                    let elapsed = t0.elapsed();
                    kill_group(&child);
                    return SolverRun {
                        outcome: StepOutcome::PrematureExit,
                        elapsed,
                        message: Some(format!("exited with {status}")),
                    };
                }
                Ok(None) => thread::sleep(POLL.min(deadline.saturating_duration_since(Instant::now()))),
                Err(e) => {
                    terminate(&mut child);
                    return SolverRun {
                        outcome: StepOutcome::Error,
                        elapsed: t0.elapsed(),
                        message: Some(e.to_string()),
                    };
                }
            }
        }
    }
    terminate(&mut child);
    SolverRun { outcome: StepOutcome::Timeout, elapsed: t0.elapsed(), message: None }
}

/// Polite termination request, then a kill once the grace period is over.
fn terminate(child: &mut Child) {
    if let Ok(Some(_)) = child.try_wait() {
        kill_group(child);
        return;
    }
    signal_group(child, Signal::Term);
    let until = Instant::now() + TERMINATION_GRACE;
    while Instant::now() < until {
        if let Ok(Some(_)) = child.try_wait() {
            kill_group(child);
            return;
        }
        thread::sleep(POLL);
    }
    kill_group(child);
    let _ = child.kill();
    let _ = child.wait();
}

fn kill_group(child: &Child) {
    signal_group(child, Signal::Kill);
}

enum Signal {
    Term,
    Kill,
}

#[cfg(unix)]
fn signal_group(child: &Child, signal: Signal) {
    let sig = match signal {
        Signal::Term => libc::SIGTERM,
        Signal::Kill => libc::SIGKILL,
    };
    // SAFETY: plain syscall on the group created at spawn; failure (group
    // already gone) is harmless.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), sig);
    }
}

#[cfg(not(unix))]
fn signal_group(_child: &Child, _signal: Signal) {}
