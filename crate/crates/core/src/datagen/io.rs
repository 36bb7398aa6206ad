use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DatagenError, Example, GenConfig, SkipCounts};
use crate::corpus::char_len;
use crate::transforms::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub example_count: usize,
    pub negative_fraction: f64,
    pub per_transform: BTreeMap<String, usize>,
    pub per_label: BTreeMap<String, usize>,
    pub skipped: BTreeMap<String, BTreeMap<String, usize>>,
    pub documents: usize,
    pub claims: usize,
    pub duplicates_removed: usize,
    pub balance_removed: usize,
    pub seed: u64,
    pub config_hash: String,
    pub config: GenConfig,
    pub tool_version: String,
}

impl DatasetManifest {
    pub fn build(
        examples: &[Example],
        config: &GenConfig,
        documents: usize,
        claims: usize,
        skipped: SkipCounts,
        duplicates_removed: usize,
        balance_removed: usize,
    ) -> Self {
        let mut per_transform = BTreeMap::new();
        let mut per_label = BTreeMap::new();
        for e in examples {
            *per_transform.entry(e.transform.as_str().to_string()).or_insert(0) += 1;
            *per_label.entry(e.label.as_str().to_string()).or_insert(0) += 1;
        }
        let neg = per_label.get(Label::Inconsistent.as_str()).copied().unwrap_or(0);
        let skipped = skipped
            .into_iter()
            .map(|(k, reasons)| {
                let reasons = reasons
                    .into_iter()
                    .map(|(r, n)| (serde_json::to_value(r).expect("reason serializes").as_str().unwrap_or_default().to_string(), n))
                    .collect();
                (k.as_str().to_string(), reasons)
            })
            .collect();
        DatasetManifest {
            example_count: examples.len(),
            negative_fraction: if examples.is_empty() { 0.0 } else { neg as f64 / examples.len() as f64 },
            per_transform,
            per_label,
            skipped,
            documents,
            claims,
            duplicates_removed,
            balance_removed,
            seed: config.seed,
            config_hash: config.hash(),
            config: config.clone(),
            tool_version: crate::TOOL_VERSION.to_string(),
        }
    }
}

/// `data/train.jsonl` -> `data/train.manifest.json`.
pub fn manifest_path(dataset: &Path) -> PathBuf {
    let stem = dataset.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    dataset.with_file_name(format!("{stem}.manifest.json"))
}

fn atomic_write(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        write(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_dataset_to(examples: &[Example], w: &mut dyn Write) -> std::io::Result<()> {
    for e in examples {
        serde_json::to_writer(&mut *w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_dataset(examples: &[Example], path: impl AsRef<Path>) -> std::io::Result<()> {
    atomic_write(path.as_ref(), |w| write_dataset_to(examples, w))
}

pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> std::io::Result<()> {
    atomic_write(path.as_ref(), |w| {
        serde_json::to_writer_pretty(&mut *w, manifest)?;
        w.write_all(b"\n")
    })
}

fn validate(e: &Example) -> Result<(), String> {
    let text_len = char_len(&e.text);
    if e.extraction_span.is_empty() || !e.extraction_span.within(text_len) {
        return Err(format!("extraction_span {} outside text of length {text_len}", e.extraction_span));
    }
    if let Some(a) = e.augmentation_span {
        let claim_len = char_len(&e.claim);
        if a.is_empty() || !a.within(claim_len) {
            return Err(format!("augmentation_span {a} outside claim of length {claim_len}"));
        }
    }
    if e.label != e.transform.label() {
        return Err(format!("label {} contradicts transform {}", e.label, e.transform));
    }
    Ok(())
}

/// Read a dataset file, checking every record's spans and label.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<Example>, DatagenError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: Example = serde_json::from_str(&line).map_err(|err| DatagenError::Parse {
            line: i + 1,
            message: err.to_string(),
        })?;
        validate(&e).map_err(|message| DatagenError::Validation { line: i + 1, message })?;
        out.push(e);
    }
    Ok(out)
}
