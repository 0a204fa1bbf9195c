use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::subportfolio::select_indices;
use super::{nearest_neighbors, Neighborhood, SunnyConfig};
use crate::error::{Error, Result};
use crate::kb::{InstanceId, KnowledgeBase, ScaledVector, ScalingParams, SolverId};
use crate::time::{self, ExactMs};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub solver: SolverId,
    pub allotted_ms: ExactMs,
}

impl ScheduleEntry {
    pub fn seconds(&self) -> f64 {
        time::exact_to_seconds(self.allotted_ms)
    }
}

/// Sequential solver schedule. Allocations sum to `timeout_ms` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
    pub k: usize,
    pub timeout_ms: u64,
    pub slots: u64,
    pub time_slot_ms: ExactMs,
    pub subportfolio: Vec<SolverId>,
    pub neighborhood: Vec<InstanceId>,
}

impl Schedule {
    /// One solver for the whole budget.
    pub fn single(solver: SolverId, timeout_ms: u64) -> Self {
        Self {
            entries: vec![ScheduleEntry { solver: solver.clone(), allotted_ms: Ratio::from_integer(timeout_ms) }],
            k: 0,
            timeout_ms,
            slots: 1,
            time_slot_ms: Ratio::from_integer(timeout_ms),
            subportfolio: vec![solver],
            neighborhood: Vec::new(),
        }
    }

    /// Equal shares of the budget in the given order.
    pub fn equal_split(solvers: Vec<SolverId>, timeout_ms: u64) -> Self {
        let slot = Ratio::new(timeout_ms, solvers.len() as u64);
        Self {
            entries: solvers.iter().map(|s| ScheduleEntry { solver: s.clone(), allotted_ms: slot }).collect(),
            k: 0,
            timeout_ms,
            slots: solvers.len() as u64,
            time_slot_ms: slot,
            subportfolio: solvers,
            neighborhood: Vec::new(),
        }
    }

    pub fn total_ms(&self) -> ExactMs {
        self.entries.iter().map(|e| e.allotted_ms).sum()
    }

    pub fn allotted(&self, solver: &str) -> Option<ExactMs> {
        self.entries.iter().find(|e| e.solver.as_str() == solver).map(|e| e.allotted_ms)
    }

    pub fn to_document(&self) -> ScheduleDocument {
        ScheduleDocument {
            k: self.k,
            timeout: time::ms_to_seconds(self.timeout_ms),
            timeout_ms: self.timeout_ms,
            slots: self.slots,
            time_slot: time::exact_to_seconds(self.time_slot_ms),
            time_slot_ms: time::format_exact(self.time_slot_ms),
            subportfolio: self.subportfolio.clone(),
            neighborhood: self.neighborhood.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| EntryDocument {
                    solver: e.solver.clone(),
                    seconds: e.seconds(),
                    ms: time::format_exact(e.allotted_ms),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document()).expect("schedule serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScheduleDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("schedule document: {e}")))?;
        doc.try_into()
    }
}

/// Serialized form of a [`Schedule`]. The `ms` strings are authoritative;
/// `seconds` values are rounded renderings for humans and other tools.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub k: usize,
    pub timeout: f64,
    pub timeout_ms: u64,
    pub slots: u64,
    pub time_slot: f64,
    pub time_slot_ms: String,
    pub subportfolio: Vec<SolverId>,
    pub neighborhood: Vec<InstanceId>,
    pub entries: Vec<EntryDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryDocument {
    pub solver: SolverId,
    pub seconds: f64,
    pub ms: String,
}

impl TryFrom<ScheduleDocument> for Schedule {
    type Error = Error;

    fn try_from(doc: ScheduleDocument) -> Result<Self> {
        let entries = doc
            .entries
            .into_iter()
            .map(|e| Ok(ScheduleEntry { solver: e.solver, allotted_ms: time::parse_exact(&e.ms)? }))
            .collect::<Result<Vec<_>>>()?;
        let schedule = Schedule {
            entries,
            k: doc.k,
            timeout_ms: doc.timeout_ms,
            slots: doc.slots,
            time_slot_ms: time::parse_exact(&doc.time_slot_ms)?,
            subportfolio: doc.subportfolio,
            neighborhood: doc.neighborhood,
        };
        if schedule.total_ms() != Ratio::from_integer(schedule.timeout_ms) {
            return Err(Error::Parse("schedule allocations do not sum to the timeout".into()));
        }
        Ok(schedule)
    }
}

/// Full pipeline for one scaled query: neighbors, sub-portfolio, schedule.
pub fn build_schedule(
    query: &ScaledVector,
    config: &SunnyConfig,
    kb: &KnowledgeBase,
    params: &ScalingParams,
) -> Result<Schedule> {
    config.validate()?;
    let neighbors = nearest_neighbors(query, config.k, kb, params)?;
    schedule_for_neighborhood(&neighbors, config, kb)
}

/// Slot allocation and ordering for an already retrieved neighborhood.
pub fn schedule_for_neighborhood(
    neighbors: &Neighborhood,
    config: &SunnyConfig,
    kb: &KnowledgeBase,
) -> Result<Schedule> {
    config.validate()?;
    if neighbors.is_empty() {
        return Err(Error::InvalidConfig("empty neighborhood".into()));
    }
    let members = neighbors.indices(kb)?;
    let portfolio = config.portfolio_indices(kb)?;
    let backup = kb.solver_index(config.backup.as_str())?;
    let budget = config.timeout_ms;
    let (sub, covered, _) = select_indices(kb, &members, &portfolio, budget);

    let solved_by = |s: usize| members.iter().filter(|&&i| kb.runtime(i, s).solved_within(budget)).count() as u64;
    let k = members.len() as u64;
    let uncovered = k - covered as u64;
    let mut slot_counts: Vec<(usize, u64)> = sub.iter().map(|&s| (s, solved_by(s))).collect();
    let slots = slot_counts.iter().map(|&(_, n)| n).sum::<u64>() + uncovered;
    if uncovered > 0 {
        match slot_counts.iter_mut().find(|(s, _)| *s == backup) {
            Some((_, n)) => *n += uncovered,
            None => slot_counts.push((backup, uncovered)),
        }
    }

    let time_slot = Ratio::new(budget, slots);
    let neighborhood_total = |s: usize| -> u64 { members.iter().map(|&i| kb.runtime(i, s).effective_ms(budget)).sum() };
    // equal k for every solver, so totals order like averages
    slot_counts.sort_by(|&(a, _), &(b, _)| {
        neighborhood_total(a).cmp(&neighborhood_total(b)).then_with(|| kb.solvers()[a].cmp(&kb.solvers()[b]))
    });

    let entries = slot_counts
        .into_iter()
        .filter(|&(_, n)| n > 0)
        .map(|(s, n)| ScheduleEntry { solver: kb.solvers()[s].clone(), allotted_ms: Ratio::new(budget * n, slots) })
        .collect();

    Ok(Schedule {
        entries,
        k: members.len(),
        timeout_ms: budget,
        slots,
        time_slot_ms: time_slot,
        subportfolio: sub.iter().map(|&s| kb.solvers()[s].clone()).collect(),
        neighborhood: neighbors.members.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::reference_kb;

    fn reference_schedule() -> Schedule {
        let kb = reference_kb();
        let params = ScalingParams::fit_all(&kb).unwrap();
        let q = params.apply(&[2.0, 11.0]).unwrap();
        let cfg = SunnyConfig::for_kb(&kb, 5, "s3".into());
        build_schedule(&q, &cfg, &kb, &params).unwrap()
    }

    #[test]
    fn reference_allocations_and_order() {
        let s = reference_schedule();
        assert_eq!(s.slots, 6);
        assert_eq!(s.time_slot_ms, Ratio::from_integer(300_000));
        let got: Vec<(&str, u64)> = s.entries.iter().map(|e| (e.solver.as_str(), e.allotted_ms.to_integer())).collect();
        assert_eq!(got, [("s4", 600_000), ("s1", 600_000), ("s3", 300_000), ("s2", 300_000)]);
        assert_eq!(s.total_ms(), Ratio::from_integer(1_800_000));
    }

    #[test]
    fn lone_backup_gets_everything() {
        let kb = reference_kb();
        let mut cfg = SunnyConfig::for_kb(&kb, 3, "s2".into());
        cfg.portfolio = vec!["s2".into()];
        let params = ScalingParams::fit_all(&kb).unwrap();
        for i in 0..kb.num_instances() {
            let q = params.apply(kb.features(i)).unwrap();
            let s = build_schedule(&q, &cfg, &kb, &params).unwrap();
            assert_eq!(s.entries.len(), 1);
            assert_eq!(s.entries[0].solver.as_str(), "s2");
            assert_eq!(s.entries[0].allotted_ms, Ratio::from_integer(1_800_000));
        }
    }

    #[test]
    fn unsolvable_neighborhood_goes_to_backup() {
        let kb = reference_kb();
        let cfg = SunnyConfig::for_kb(&kb, 1, "s3".into());
        let n = Neighborhood { members: vec!["p1".into()], distances: vec![0.0] };
        let s = schedule_for_neighborhood(&n, &cfg, &kb).unwrap();
        assert!(s.subportfolio.is_empty());
        assert_eq!(s.slots, 1);
        assert_eq!(s.entries, vec![ScheduleEntry { solver: "s3".into(), allotted_ms: Ratio::from_integer(1_800_000) }]);
    }

    #[test]
    fn backup_in_subportfolio_accumulates() {
        let kb = reference_kb();
        let cfg = SunnyConfig::for_kb(&kb, 5, "s4".into());
        let n = Neighborhood { members: kb.instances().to_vec(), distances: vec![0.0; 5] };
        let s = schedule_for_neighborhood(&n, &cfg, &kb).unwrap();
        // s4 gets its two slots plus the one for p1
        assert_eq!(s.allotted("s4"), Some(Ratio::from_integer(900_000)));
        assert_eq!(s.entries.len(), 3);
    }

    #[test]
    fn k_larger_than_kb() {
        let kb = reference_kb();
        let params = ScalingParams::fit_all(&kb).unwrap();
        let q = params.apply(&[0.0, 10.0]).unwrap();
        let cfg = SunnyConfig::for_kb(&kb, 6, "s3".into());
        assert!(matches!(build_schedule(&q, &cfg, &kb, &params), Err(Error::KTooLarge { .. })));
    }

    #[test]
    fn document_round_trip() {
        let s = reference_schedule();
        let json = s.to_json();
        assert!(json.contains("\"ms\": \"600000\""));
        assert_eq!(Schedule::from_json(&json).unwrap(), s);

        let odd = Schedule::equal_split(vec!["a".into(), "b".into(), "c".into()], 1_000);
        let back = Schedule::from_json(&odd.to_json()).unwrap();
        assert_eq!(back.entries[0].allotted_ms, Ratio::new(1_000, 3));
        assert_eq!(back.total_ms(), Ratio::from_integer(1_000));
    }

    #[test]
    fn tampered_document_is_rejected() {
        let json = reference_schedule().to_json().replacen("\"600000\"", "\"600001\"", 1);
        assert!(Schedule::from_json(&json).is_err());
    }
}
