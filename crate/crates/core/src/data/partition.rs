use std::collections::BTreeMap;

use rand::seq::index;

use super::dataset::Dataset;
use super::{DataError, Result};
use crate::seed::{rng_for, stream};

/// One school's private slice of the training data.
#[derive(Debug, Clone)]
pub struct ClientPartition {
    client_id: i64,
    data: Dataset,
}

impl ClientPartition {
    pub fn new(client_id: i64, data: Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(DataError::InvalidArgument(format!("client {client_id} has no rows")));
        }
        Ok(Self { client_id, data })
    }

    pub fn client_id(&self) -> i64 {
        self.client_id
    }

    /// `n_k`, the client's sample count.
    pub fn n_k(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }
}

/// Groups rows by school, keeps schools with at least `min_rows` rows, and
/// samples `sample_size` of them uniformly under `seed`. Output is sorted by
/// school id.
pub fn partition_by_school(
    data: &Dataset,
    min_rows: usize,
    sample_size: usize,
    seed: u64,
) -> Result<Vec<ClientPartition>> {
    if min_rows == 0 {
        return Err(DataError::InvalidArgument("min_rows must be at least 1".into()));
    }
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &id) in data.school_ids.iter().enumerate() {
        groups.entry(id).or_default().push(i);
    }
    let eligible: Vec<(i64, Vec<usize>)> = groups.into_iter().filter(|(_, rows)| rows.len() >= min_rows).collect();
    if eligible.len() < sample_size {
        return Err(DataError::NotEnoughSchools {
            eligible: eligible.len(),
            requested: sample_size,
        });
    }
    let mut rng = rng_for(seed, &[stream::PARTITION]);
    let mut picked = index::sample(&mut rng, eligible.len(), sample_size).into_vec();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|k| {
            let (id, rows) = &eligible[k];
            ClientPartition::new(*id, data.subset(rows))
        })
        .collect()
}
