use num_rational::Ratio;

use crate::error::Result;
use crate::kb::{InstanceId, KnowledgeBase};
use crate::sunny::Schedule;
use crate::time::{self, ExactMs};

/// Replay of a schedule on one instance with known runtimes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationOutcome {
    pub instance: InstanceId,
    pub solved: bool,
    /// Equal to the timeout when unsolved.
    pub time_ms: ExactMs,
}

impl SimulationOutcome {
    pub fn seconds(&self) -> f64 {
        time::exact_to_seconds(self.time_ms)
    }
}

/// Replays `schedule` on `instance`, charging the instance's feature
/// extraction cost up front.
pub fn simulate_schedule(schedule: &Schedule, instance: &str, kb: &KnowledgeBase) -> Result<SimulationOutcome> {
    let i = kb.instance_index(instance)?;
    simulate_at(schedule, i, kb, kb.feature_cost_ms(i))
}

/// Replay starting the clock at `start_ms`.
///
/// Entries run in order; the first solver that solves the instance within
/// its own allotment and before the timeout wins.
pub fn simulate_at(
    schedule: &Schedule,
    instance: usize,
    kb: &KnowledgeBase,
    start_ms: u64,
) -> Result<SimulationOutcome> {
    let budget = Ratio::from_integer(schedule.timeout_ms);
    let mut elapsed: ExactMs = Ratio::from_integer(start_ms);
    let unsolved = || SimulationOutcome { instance: kb.instances()[instance].clone(), solved: false, time_ms: budget };
    for entry in &schedule.entries {
        if elapsed >= budget {
            break;
        }
        let s = kb.solver_index(entry.solver.as_str())?;
        let r = kb.runtime(instance, s);
        let run = Ratio::from_integer(r.time_ms);
        if r.solved && run <= entry.allotted_ms {
            let finish = elapsed + run;
            if finish < budget {
                return Ok(SimulationOutcome {
                    instance: kb.instances()[instance].clone(),
                    solved: true,
                    time_ms: finish,
                });
            }
            return Ok(unsolved());
        }
        elapsed += entry.allotted_ms;
    }
    Ok(unsolved())
}
