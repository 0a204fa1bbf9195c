use crate::error::{Error, Result};
use crate::kb::{InstanceId, KnowledgeBase, ScaledVector, ScalingParams};

/// The k training instances closest to a query, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub members: Vec<InstanceId>,
    pub distances: Vec<f64>,
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub(crate) fn indices(&self, kb: &KnowledgeBase) -> Result<Vec<usize>> {
        self.members.iter().map(|m| kb.instance_index(m.as_str())).collect()
    }
}

/// Training instances pre-scaled once, for repeated queries.
#[derive(Debug, Clone)]
pub(crate) struct ScaledIndex<'a> {
    kb: &'a KnowledgeBase,
    points: Vec<ScaledVector>,
}

impl<'a> ScaledIndex<'a> {
    pub(crate) fn new(kb: &'a KnowledgeBase, params: &ScalingParams) -> Result<Self> {
        let points = (0..kb.num_instances()).map(|i| params.apply(kb.features(i))).collect::<Result<Vec<_>>>()?;
        Ok(Self { kb, points })
    }

    pub(crate) fn query(&self, query: &ScaledVector, k: usize) -> Result<Neighborhood> {
        let kb = self.kb;
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if k > kb.num_instances() {
            return Err(Error::KTooLarge { k, available: kb.num_instances() });
        }
        if let Some(p) = self.points.first() {
            if p.len() != query.len() {
                return Err(Error::DimensionMismatch { expected: p.len(), found: query.len() });
            }
        }
        let mut scored: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let sq = p.as_slice().iter().zip(query.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
                (sq, i)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| kb.instances()[a.1].cmp(&kb.instances()[b.1])));
        scored.truncate(k);
        Ok(Neighborhood {
            members: scored.iter().map(|&(_, i)| kb.instances()[i].clone()).collect(),
            distances: scored.iter().map(|&(sq, _)| sq.sqrt()).collect(),
        })
    }
}

/// Euclidean k-NN over the retained, scaled features of every instance in
/// `kb`. Equal distances are ordered by instance id.
pub fn nearest_neighbors(
    query: &ScaledVector,
    k: usize,
    kb: &KnowledgeBase,
    params: &ScalingParams,
) -> Result<Neighborhood> {
    if query.len() != params.retained().len() {
        return Err(Error::DimensionMismatch { expected: params.retained().len(), found: query.len() });
    }
    ScaledIndex::new(kb, params)?.query(query, k)
}
