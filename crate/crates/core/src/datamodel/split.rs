use std::collections::HashSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Private/auxiliary id lists; no recording contributes to both sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub disjointness_level: String,
    pub priv_ids: Vec<String>,
    pub aux_ids: Vec<String>,
}

impl SplitManifest {
    /// True when no recording id appears on both sides.
    pub fn is_recording_disjoint(&self, data: &Dataset) -> bool {
        let recording_of = |ids: &[String]| -> HashSet<String> {
            let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
            data.examples()
                .iter()
                .filter(|e| wanted.contains(e.id.as_str()))
                .map(|e| e.recording_id.clone())
                .collect()
        };
        recording_of(&self.priv_ids).is_disjoint(&recording_of(&self.aux_ids))
    }
}

/// Shuffles recording groups with a seeded RNG, then fills the private side
/// until it holds at least `n_priv` examples and the auxiliary side until it
/// holds at least `n_aux`. Groups are atomic; leftover groups are dropped.
pub fn split(data: &Dataset, n_priv: usize, n_aux: usize, seed: u64) -> Result<SplitManifest> {
    let mut groups = data.recording_groups();
    let mut rng = stream(seed, Stream::Split);
    groups.shuffle(&mut rng);

    let mut priv_ids = Vec::new();
    let mut aux_ids = Vec::new();
    let mut iter = groups.into_iter();
    for (target, side) in [(n_priv, &mut priv_ids), (n_aux, &mut aux_ids)] {
        while side.len() < target {
            let (_, members) = iter.next().ok_or_else(|| {
                Error::InsufficientData(format!(
                    "cannot fill {n_priv} private + {n_aux} auxiliary examples from {} examples",
                    data.len()
                ))
            })?;
            side.extend(members.into_iter().map(|i| data.examples()[i].id.clone()));
        }
    }
    Ok(SplitManifest {
        disjointness_level: "recording".into(),
        priv_ids,
        aux_ids,
    })
}

/// Ids assigned to neither side, in dataset order.
pub fn remainder_ids(data: &Dataset, manifest: &SplitManifest) -> Vec<String> {
    let used: HashSet<&str> = manifest
        .priv_ids
        .iter()
        .chain(&manifest.aux_ids)
        .map(String::as_str)
        .collect();
    data.examples()
        .iter()
        .filter(|e| !used.contains(e.id.as_str()))
        .map(|e| e.id.clone())
        .collect()
}
