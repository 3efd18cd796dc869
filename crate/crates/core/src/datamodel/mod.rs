//! Datasets, recording-disjoint splits, Poisson minibatch sampling and a
//! synthetic imbalanced generator.

mod manifest;
mod sampler;
mod split;
mod synth;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FrontEnd, Spectrogram};

pub use manifest::{read_dataset, read_split, write_dataset, write_split, ManifestRecord, MANIFEST_FILE};
pub use sampler::poisson_sample;
pub use split::{remainder_ids, split, SplitManifest};
pub use synth::{largest_remainder_counts, synth_generate, SynthSpec};

/// One utterance. `features` is the stored per-utterance matrix; a
/// [`FrontEnd`] maps it to the fixed-length model input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub recording_id: String,
    pub features: Spectrogram,
    pub privileged: Option<Vec<f64>>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    num_classes: usize,
    class_counts: Vec<usize>,
}

impl Dataset {
    pub fn new(examples: Vec<Example>, num_classes: usize) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::InvalidConfig("class count must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(examples.len());
        let mut class_counts = vec![0; num_classes];
        let priv_dim = examples.first().and_then(|e| e.privileged.as_ref().map(Vec::len));
        for ex in &examples {
            if ex.label >= num_classes {
                return Err(Error::MalformedManifest(format!(
                    "example `{}` has label {} but K = {num_classes}",
                    ex.id, ex.label
                )));
            }
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::MalformedManifest(format!("duplicate id `{}`", ex.id)));
            }
            if ex.privileged.as_ref().map(Vec::len) != priv_dim {
                return Err(Error::MalformedManifest(format!(
                    "example `{}` has inconsistent privileged dimension",
                    ex.id
                )));
            }
            class_counts[ex.label] += 1;
        }
        Ok(Self {
            examples,
            num_classes,
            class_counts,
        })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Dimension of the privileged vectors, `None` for audio-only data.
    pub fn privileged_dim(&self) -> Option<usize> {
        self.examples.first().and_then(|e| e.privileged.as_ref().map(Vec::len))
    }

    pub fn labels(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.label).collect()
    }

    /// Examples whose id is in `ids`, in dataset order.
    pub fn subset<S: AsRef<str>>(&self, ids: &[S]) -> Result<Dataset> {
        let wanted: HashSet<&str> = ids.iter().map(AsRef::as_ref).collect();
        let examples: Vec<Example> = self
            .examples
            .iter()
            .filter(|e| wanted.contains(e.id.as_str()))
            .cloned()
            .collect();
        if examples.len() != wanted.len() {
            return Err(Error::MalformedManifest(format!(
                "{} requested ids are not in the dataset",
                wanted.len() - examples.len()
            )));
        }
        Dataset::new(examples, self.num_classes)
    }

    /// The first `n` examples.
    pub fn take(&self, n: usize) -> Result<Dataset> {
        Dataset::new(self.examples.iter().take(n).cloned().collect(), self.num_classes)
    }

    /// Runs the front-end over every example.
    pub fn features(&self, frontend: &dyn FrontEnd) -> Vec<FeatureMatrix> {
        self.examples.iter().map(|e| frontend.apply(&e.features)).collect()
    }

    /// Examples grouped by recording, groups in first-appearance order.
    pub fn recording_groups(&self) -> Vec<(String, Vec<usize>)> {
        let mut order: Vec<String> = Vec::new();
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, ex) in self.examples.iter().enumerate() {
            groups
                .entry(ex.recording_id.as_str())
                .or_insert_with(|| {
                    order.push(ex.recording_id.clone());
                    Vec::new()
                })
                .push(i);
        }
        order
            .into_iter()
            .map(|r| {
                let idx = groups.remove(r.as_str()).unwrap_or_default();
                (r, idx)
            })
            .collect()
    }
}

#[cfg(test)]
pub(crate) fn toy_example(id: &str, recording: &str, label: usize, privileged: Option<Vec<f64>>) -> Example {
    Example {
        id: id.into(),
        recording_id: recording.into(),
        features: Spectrogram::new(1, 1, vec![label as f64]).unwrap(),
        privileged,
        label,
    }
}
