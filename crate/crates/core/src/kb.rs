//! Knowledge base of solved instances: feature vectors, per-solver runtimes,
//! and the min/max feature scaling fitted on a training subset.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time;

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Self {
                Self(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(SolverId);
id_type!(InstanceId);

/// Outcome of one solver on one instance.
///
/// Unsolved runs always carry `time_ms == timeout`, whatever the input said.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Runtime {
    pub time_ms: u64,
    pub solved: bool,
}

impl Runtime {
    pub fn solved_within(&self, budget_ms: u64) -> bool {
        self.solved && self.time_ms < budget_ms
    }

    /// Runtime with the timeout convention: anything not solved within the
    /// budget counts as the full budget.
    pub fn effective_ms(&self, budget_ms: u64) -> u64 {
        if self.solved_within(budget_ms) {
            self.time_ms
        } else {
            budget_ms
        }
    }
}

/// A runtime row as it appears in the runtimes file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeRecord {
    pub instance: InstanceId,
    pub solver: SolverId,
    pub time_ms: u64,
    pub solved: bool,
}

/// A feature row as it appears in the features file.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub instance: InstanceId,
    pub values: Vec<f64>,
    pub cost_ms: u64,
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    timeout_ms: u64,
    feature_names: Vec<String>,
    solvers: Vec<SolverId>,
    instances: Vec<InstanceId>,
    solver_index: HashMap<SolverId, usize>,
    instance_index: HashMap<InstanceId, usize>,
    features: Vec<Vec<f64>>,
    feature_cost_ms: Vec<u64>,
    // row-major: instance * solvers.len() + solver
    runtimes: Vec<Runtime>,
}

impl KnowledgeBase {
    /// Builds and validates a knowledge base.
    ///
    /// `solvers` fixes the solver order. Every (instance, solver) pair must
    /// have exactly one record.
    pub fn from_parts(
        timeout_ms: u64,
        feature_names: Vec<String>,
        solvers: Vec<SolverId>,
        rows: Vec<FeatureRow>,
        records: Vec<RuntimeRecord>,
    ) -> Result<Self> {
        if timeout_ms == 0 {
            return Err(Error::InvalidConfig("timeout must be positive".into()));
        }
        let dim = feature_names.len();

        let mut solver_index = HashMap::with_capacity(solvers.len());
        for (i, s) in solvers.iter().enumerate() {
            if s.as_str().is_empty() {
                return Err(Error::Parse("empty solver name".into()));
            }
            if solver_index.insert(s.clone(), i).is_some() {
                return Err(Error::DuplicateId { kind: "solver", id: s.to_string() });
            }
        }

        let mut instances = Vec::with_capacity(rows.len());
        let mut instance_index = HashMap::with_capacity(rows.len());
        let mut features = Vec::with_capacity(rows.len());
        let mut feature_cost_ms = Vec::with_capacity(rows.len());
        for row in rows {
            if row.instance.as_str().is_empty() {
                return Err(Error::Parse("empty instance name".into()));
            }
            if row.values.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.values.len() });
            }
            if let Some(j) = row.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { instance: row.instance.to_string(), feature: j });
            }
            if instance_index.insert(row.instance.clone(), instances.len()).is_some() {
                return Err(Error::DuplicateId { kind: "instance", id: row.instance.to_string() });
            }
            instances.push(row.instance);
            features.push(row.values);
            feature_cost_ms.push(row.cost_ms);
        }

        let n_solvers = solvers.len();
        let mut cells: Vec<Option<Runtime>> = vec![None; instances.len() * n_solvers];
        for rec in records {
            let i = *instance_index
                .get(&rec.instance)
                .ok_or_else(|| Error::UnknownId { kind: "instance", id: rec.instance.to_string() })?;
            let s = *solver_index
                .get(&rec.solver)
                .ok_or_else(|| Error::UnknownId { kind: "solver", id: rec.solver.to_string() })?;
            if rec.solved && rec.time_ms >= timeout_ms {
                return Err(Error::RuntimeExceedsTimeout {
                    instance: rec.instance.to_string(),
                    solver: rec.solver.to_string(),
                    time_ms: rec.time_ms,
                    timeout_ms,
                });
            }
            let cell = &mut cells[i * n_solvers + s];
            if cell.is_some() {
                return Err(Error::DuplicateId {
                    kind: "runtime record",
                    id: format!("{}/{}", rec.instance, rec.solver),
                });
            }
            let time_ms = if rec.solved { rec.time_ms } else { timeout_ms };
            *cell = Some(Runtime { time_ms, solved: rec.solved });
        }

        let mut runtimes = Vec::with_capacity(cells.len());
        for (idx, cell) in cells.into_iter().enumerate() {
            match cell {
                Some(r) => runtimes.push(r),
                None => {
                    return Err(Error::MissingRecord {
                        instance: instances[idx / n_solvers].to_string(),
                        solver: solvers[idx % n_solvers].to_string(),
                    })
                }
            }
        }

        Ok(Self {
            timeout_ms,
            feature_names,
            solvers,
            instances,
            solver_index,
            instance_index,
            features,
            feature_cost_ms,
            runtimes,
        })
    }

    /// Loads the features and runtimes files.
    pub fn load(features: &Path, runtimes: &Path, timeout_ms: u64) -> Result<Self> {
        let open = |p: &Path| std::fs::File::open(p).map_err(|source| Error::Io { path: p.to_owned(), source });
        Self::from_readers(open(features)?, open(runtimes)?, timeout_ms)
    }

    pub fn from_readers(features: impl Read, runtimes: impl Read, timeout_ms: u64) -> Result<Self> {
        let (feature_names, rows) = read_features(features)?;
        let (solvers, records) = read_runtimes(runtimes)?;
        Self::from_parts(timeout_ms, feature_names, solvers, rows, records)
    }

    /// A knowledge base holding only the given instances, in the given order.
    pub fn restrict(&self, instances: &[usize]) -> Self {
        let n = self.solvers.len();
        let mut runtimes = Vec::with_capacity(instances.len() * n);
        for &i in instances {
            runtimes.extend_from_slice(&self.runtimes[i * n..(i + 1) * n]);
        }
        let ids: Vec<InstanceId> = instances.iter().map(|&i| self.instances[i].clone()).collect();
        let instance_index = ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
        Self {
            timeout_ms: self.timeout_ms,
            feature_names: self.feature_names.clone(),
            solvers: self.solvers.clone(),
            instances: ids,
            solver_index: self.solver_index.clone(),
            instance_index,
            features: instances.iter().map(|&i| self.features[i].clone()).collect(),
            feature_cost_ms: instances.iter().map(|&i| self.feature_cost_ms[i]).collect(),
            runtimes,
        }
    }

    pub fn timeout_ms(&self) -> u64 {
        self.timeout_ms
    }

    pub fn dimension(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn solvers(&self) -> &[SolverId] {
        &self.solvers
    }

    pub fn instances(&self) -> &[InstanceId] {
        &self.instances
    }

    pub fn num_solvers(&self) -> usize {
        self.solvers.len()
    }

    pub fn num_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn num_records(&self) -> usize {
        self.runtimes.len()
    }

    pub fn solver_index(&self, id: &str) -> Result<usize> {
        self.solver_index
            .get(&SolverId::from(id))
            .copied()
            .ok_or_else(|| Error::UnknownId { kind: "solver", id: id.to_owned() })
    }

    pub fn instance_index(&self, id: &str) -> Result<usize> {
        self.instance_index
            .get(&InstanceId::from(id))
            .copied()
            .ok_or_else(|| Error::UnknownId { kind: "instance", id: id.to_owned() })
    }

    pub fn features(&self, instance: usize) -> &[f64] {
        &self.features[instance]
    }

    pub fn feature_cost_ms(&self, instance: usize) -> u64 {
        self.feature_cost_ms[instance]
    }

    pub fn runtime(&self, instance: usize, solver: usize) -> Runtime {
        self.runtimes[instance * self.solvers.len() + solver]
    }

    /// Number of instances the solver solves within `budget_ms`, and its
    /// total effective runtime over all instances.
    pub fn solver_totals(&self, solver: usize, budget_ms: u64) -> (usize, u64) {
        (0..self.instances.len()).fold((0, 0), |(solved, total), i| {
            let r = self.runtime(i, solver);
            (solved + usize::from(r.solved_within(budget_ms)), total + r.effective_ms(budget_ms))
        })
    }

    pub fn to_features_csv(&self) -> String {
        let with_cost = self.feature_cost_ms.iter().any(|&c| c > 0);
        let mut out = String::from("instance");
        for name in &self.feature_names {
            out.push(',');
            out.push_str(name);
        }
        if with_cost {
            out.push_str(",feat_time");
        }
        out.push('\n');
        for (i, id) in self.instances.iter().enumerate() {
            out.push_str(id.as_str());
            for v in &self.features[i] {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            if with_cost {
                out.push(',');
                out.push_str(&time::format_ms(self.feature_cost_ms[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_runtimes_csv(&self) -> String {
        let mut out = String::from("instance,solver,time,solved\n");
        for (i, inst) in self.instances.iter().enumerate() {
            for (s, solver) in self.solvers.iter().enumerate() {
                let r = self.runtime(i, s);
                out.push_str(&format!("{inst},{solver},{},{}\n", time::format_ms(r.time_ms), u8::from(r.solved)));
            }
        }
        out
    }
}

fn csv_err(context: &str) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv { context: context.to_owned(), source }
}

/// Parses a features table: `instance,f1,...,fD[,feat_time]`.
pub fn read_features(reader: impl Read) -> Result<(Vec<String>, Vec<FeatureRow>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_err("features header"))?.clone();
    if header.get(0) != Some("instance") {
        return Err(Error::Parse("features header must start with `instance`".into()));
    }
    let has_cost = header.len() > 1 && header.get(header.len() - 1) == Some("feat_time");
    let dim = header.len() - 1 - usize::from(has_cost);
    let names: Vec<String> = header.iter().skip(1).take(dim).map(str::to_owned).collect();

    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err("features file"))?;
        let instance = InstanceId::new(&rec[0]);
        let found = rec.len() - 1 - usize::from(has_cost);
        if found != dim {
            return Err(Error::DimensionMismatch { expected: dim, found });
        }
        let values = (1..=dim)
            .map(|j| {
                rec[j]
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("features row {}: bad number `{}`", line + 2, &rec[j])))
            })
            .collect::<Result<Vec<_>>>()?;
        let cost_ms = if has_cost { time::parse_seconds(&rec[dim + 1])? } else { 0 };
        rows.push(FeatureRow { instance, values, cost_ms });
    }
    Ok((names, rows))
}

/// Parses a runtimes table: `instance,solver,time,solved`. Solvers are
/// returned in order of first appearance.
pub fn read_runtimes(reader: impl Read) -> Result<(Vec<SolverId>, Vec<RuntimeRecord>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_err("runtimes header"))?.clone();
    if header.iter().collect::<Vec<_>>() != ["instance", "solver", "time", "solved"] {
        return Err(Error::Parse("runtimes header must be `instance,solver,time,solved`".into()));
    }
    let mut solvers: Vec<SolverId> = Vec::new();
    let mut seen = HashMap::new();
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err("runtimes file"))?;
        let solver = SolverId::new(&rec[1]);
        if !seen.contains_key(&solver) {
            seen.insert(solver.clone(), ());
            solvers.push(solver.clone());
        }
        let solved = match &rec[3] {
            "1" => true,
            "0" => false,
            other => return Err(Error::Parse(format!("solved flag must be 0 or 1, got `{other}`"))),
        };
        records.push(RuntimeRecord {
            instance: InstanceId::new(&rec[0]),
            solver,
            time_ms: time::parse_seconds(&rec[2])?,
            solved,
        });
    }
    Ok((solvers, records))
}

/// Feature scaled into [-1, 1], constant features removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledVector(Vec<f64>);

impl ScaledVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-feature min/max learned from training instances.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    min: Vec<f64>,
    max: Vec<f64>,
    retained: Vec<usize>,
}

impl ScalingParams {
    /// Fits on the given instance indices of `kb`.
    pub fn fit(kb: &KnowledgeBase, training: &[usize]) -> Result<Self> {
        let (&first, rest) = training.split_first().ok_or(Error::EmptyTraining)?;
        let mut min = kb.features(first).to_vec();
        let mut max = min.clone();
        for &i in rest {
            for (j, &v) in kb.features(i).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        // exact comparison: only truly constant columns are dropped
        let retained = (0..min.len()).filter(|&j| min[j] < max[j]).collect();
        Ok(Self { min, max, retained })
    }

    /// Fits on every instance of `kb`.
    pub fn fit_all(kb: &KnowledgeBase) -> Result<Self> {
        Self::fit(kb, &(0..kb.num_instances()).collect::<Vec<_>>())
    }

    pub fn dimension(&self) -> usize {
        self.min.len()
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    /// Maps retained features into [-1, 1]. Values outside the training
    /// range are clamped.
    pub fn apply(&self, raw: &[f64]) -> Result<ScaledVector> {
        if raw.len() != self.min.len() {
            return Err(Error::DimensionMismatch { expected: self.min.len(), found: raw.len() });
        }
        let values = self
            .retained
            .iter()
            .map(|&j| {
                let scaled = 2.0 * (raw[j] - self.min[j]) / (self.max[j] - self.min[j]) - 1.0;
                scaled.clamp(-1.0, 1.0)
            })
            .collect();
        Ok(ScaledVector(values))
    }
}

/// Fits scaling parameters on the named training instances.
pub fn fit_scaling(kb: &KnowledgeBase, training: &[InstanceId]) -> Result<ScalingParams> {
    let idx = training.iter().map(|id| kb.instance_index(id.as_str())).collect::<Result<Vec<_>>>()?;
    ScalingParams::fit(kb, &idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FEATURES: &str = "instance,f1,f2\np1,2,5\np2,4,5\np3,6,5\n";

    fn runtimes(rows: &[&str]) -> String {
        let mut s = String::from("instance,solver,time,solved\n");
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    fn full_runtimes() -> String {
        runtimes(&["p1,s1,1.5,1", "p1,s2,1800,0", "p2,s1,10,1", "p2,s2,0,0", "p3,s1,1800,0", "p3,s2,3,1"])
    }

    fn load(features: &str, runtimes: &str) -> Result<KnowledgeBase> {
        KnowledgeBase::from_readers(features.as_bytes(), runtimes.as_bytes(), 1_800_000)
    }

    #[test]
    fn loads_total_runtime_matrix() {
        let kb = load("instance,f1\np1,0\np2,1\n", &runtimes(&["p1,s1,1,1", "p1,s2,2,1", "p2,s1,1800,0", "p2,s2,5,1"]))
            .unwrap();
        assert_eq!(kb.num_records(), 4);
        assert_eq!(kb.num_records(), kb.num_instances() * kb.num_solvers());
    }

    #[test]
    fn unsolved_records_report_timeout() {
        let kb = load(FEATURES, &full_runtimes()).unwrap();
        let p2 = kb.instance_index("p2").unwrap();
        let s2 = kb.solver_index("s2").unwrap();
        assert_eq!(kb.runtime(p2, s2), Runtime { time_ms: 1_800_000, solved: false });
        assert_eq!(kb.runtime(0, 0).time_ms, 1_500);
    }

    #[test]
    fn duplicate_instance_is_rejected() {
        let err = load("instance,f1\np1,0\np1,1\n", &runtimes(&["p1,s1,1,1"])).unwrap_err();
        assert!(matches!(err, Error::DuplicateId { kind: "instance", .. }), "{err}");
    }

    #[test]
    fn duplicate_runtime_row_is_rejected() {
        let err = load("instance,f1\np1,0\n", &runtimes(&["p1,s1,1,1", "p1,s1,2,1"])).unwrap_err();
        assert!(matches!(err, Error::DuplicateId { kind: "runtime record", .. }), "{err}");
    }

    #[test]
    fn missing_cell_is_rejected() {
        let all = full_runtimes();
        let kept: Vec<&str> = all.lines().skip(1).filter(|l| !l.starts_with("p2,s1")).collect();
        let err = load(FEATURES, &runtimes(&kept)).unwrap_err();
        match err {
            Error::MissingRecord { instance, solver } => {
                assert_eq!((instance.as_str(), solver.as_str()), ("p2", "s1"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn ragged_feature_rows_are_rejected() {
        let err = load("instance,f1,f2\np1,0,1\np2,1\n", &full_runtimes()).unwrap_err();
        assert!(matches!(err, Error::Csv { .. } | Error::DimensionMismatch { .. }), "{err}");
    }

    #[test]
    fn non_finite_features_are_rejected() {
        let err = load("instance,f1\np1,NaN\np2,1\np3,2\n", &full_runtimes()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { feature: 0, .. }), "{err}");
        let err = load("instance,f1\np1,inf\np2,1\np3,2\n", &full_runtimes()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err}");
    }

    #[test]
    fn solved_beyond_timeout_is_rejected() {
        let err = load("instance,f1\np1,0\n", &runtimes(&["p1,s1,1900,1"])).unwrap_err();
        assert!(matches!(err, Error::RuntimeExceedsTimeout { .. }), "{err}");
    }

    #[test]
    fn feature_cost_column_is_optional() {
        let kb = load("instance,f1,feat_time\np1,0,2.5\np2,1,0\n", &runtimes(&["p1,s1,1,1", "p2,s1,1,1"])).unwrap();
        assert_eq!(kb.dimension(), 1);
        assert_eq!(kb.feature_cost_ms(0), 2_500);
        let kb = load(FEATURES, &full_runtimes()).unwrap();
        assert_eq!(kb.feature_cost_ms(0), 0);
    }

    #[test]
    fn fit_keeps_endpoints_and_drops_constants() {
        let kb = load(FEATURES, &full_runtimes()).unwrap();
        let params = fit_scaling(&kb, kb.instances()).unwrap();
        assert_eq!(params.min()[0], 2.0);
        assert_eq!(params.max()[0], 6.0);
        assert_eq!(params.retained(), &[0]);
        assert!(matches!(fit_scaling(&kb, &[]), Err(Error::EmptyTraining)));
    }

    #[test]
    fn apply_maps_into_unit_interval() {
        let kb = load(FEATURES, &full_runtimes()).unwrap();
        let params = ScalingParams::fit_all(&kb).unwrap();
        assert_eq!(params.apply(&[4.0, 0.0]).unwrap().as_slice(), &[0.0]);
        assert_eq!(params.apply(&[2.0, 0.0]).unwrap().as_slice(), &[-1.0]);
        // unclamped value would be 3.0
        assert_eq!(params.apply(&[10.0, 0.0]).unwrap().as_slice(), &[1.0]);
        assert!(matches!(params.apply(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn restrict_keeps_records_aligned() {
        let kb = load(FEATURES, &full_runtimes()).unwrap();
        let sub = kb.restrict(&[2, 0]);
        assert_eq!(sub.instances()[0].as_str(), "p3");
        assert_eq!(sub.runtime(0, 1), kb.runtime(2, 1));
        assert_eq!(sub.instance_index("p1").unwrap(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let kb =
            load("instance,f1,feat_time\np1,0.25,2.5\np2,-1,0\n", &runtimes(&["p1,s1,1.001,1", "p2,s1,7,0"])).unwrap();
        let again = KnowledgeBase::from_readers(
            kb.to_features_csv().as_bytes(),
            kb.to_runtimes_csv().as_bytes(),
            kb.timeout_ms(),
        )
        .unwrap();
        assert_eq!(again.to_features_csv(), kb.to_features_csv());
        assert_eq!(again.to_runtimes_csv(), kb.to_runtimes_csv());
    }
}
