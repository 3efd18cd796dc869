//! On-disk dataset layout: `manifest.csv` with one record per example
//! (`id,recording_id,label,feature_path,privileged_csv`) next to a
//! `features/` directory of DSF1 files. Feature paths are relative to the
//! manifest's directory; `privileged_csv` is `;`-joined reals or empty.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, Example, SplitManifest};
use crate::error::{Error, Result};
use crate::features::{read_features, write_features};

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub recording_id: String,
    pub label: usize,
    pub feature_path: String,
    pub privileged_csv: String,
}

fn format_privileged(p: &Option<Vec<f64>>) -> String {
    p.as_ref()
        .map(|v| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";"))
        .unwrap_or_default()
}

fn parse_privileged(field: &str, id: &str) -> Result<Option<Vec<f64>>> {
    if field.trim().is_empty() {
        return Ok(None);
    }
    field
        .split(';')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::MalformedManifest(format!("bad privileged value `{s}` for `{id}`")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Writes `dir/manifest.csv` and `dir/features/<id>.dsf`.
pub fn write_dataset(dir: &Path, data: &Dataset) -> Result<()> {
    let feature_dir = dir.join("features");
    std::fs::create_dir_all(&feature_dir).map_err(|e| Error::io(&feature_dir, e))?;
    let manifest = dir.join(MANIFEST_FILE);
    let mut writer = csv::Writer::from_path(&manifest)?;
    for ex in data.examples() {
        let rel = format!("features/{}.dsf", ex.id);
        write_features(&dir.join(&rel), &ex.features)?;
        writer.serialize(ManifestRecord {
            id: ex.id.clone(),
            recording_id: ex.recording_id.clone(),
            label: ex.label,
            feature_path: rel,
            privileged_csv: format_privileged(&ex.privileged),
        })?;
    }
    writer.flush().map_err(|e| Error::io(&manifest, e))?;
    Ok(())
}

pub fn read_dataset(manifest: &Path, num_classes: usize) -> Result<Dataset> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut reader = csv::Reader::from_path(manifest).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::io(
            manifest,
            std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
        ),
        _ => Error::Csv(e),
    })?;
    let mut examples = Vec::new();
    for record in reader.deserialize() {
        let record: ManifestRecord = record?;
        let privileged = parse_privileged(&record.privileged_csv, &record.id)?;
        examples.push(Example {
            features: read_features(&base.join(&record.feature_path))?,
            id: record.id,
            recording_id: record.recording_id,
            privileged,
            label: record.label,
        });
    }
    Dataset::new(examples, num_classes)
}

pub fn write_split(path: &Path, manifest: &SplitManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_split(path: &Path) -> Result<SplitManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
