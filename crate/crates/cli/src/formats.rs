//! On-disk formats: the instance document and rule files.
//!
//! An instance is one JSON document, schema version 1:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "25-7",
//!   "seed": 7,
//!   "skills": [0, 1, 2],
//!   "team_skills": [0, 2],
//!   "demand": [[0, 2], [2, 1]],
//!   "candidates": [{ "id": 0, "skills": [0, 1] }],
//!   "positions": [{ "id": 0, "required_skills": [0], "weights": [1.0] }],
//!   "relations": [[1]],
//!   "evaluations": [[[[0.4, 0.6], [0.6, 0.4], [0.8, 0.2]]]]
//! }
//! ```
//!
//! Indices are 0-based throughout. `relations` is the row-major
//! willingness matrix; `evaluations[i][j]` lists `[mu, nu]` pairs per
//! competency dimension. Loading validates every structural invariant and
//! refuses malformed documents.
//!
//! A rule file is plain text holding one prefix-notation expression,
//! e.g. `(* SC (+ SCN 0.37))`.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use teamform_core::gp::RuleTree;
use teamform_core::problem::{validate_instance, Instance};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    schema_version: u32,
    #[serde(flatten)]
    instance: Instance,
}

/// Writes a validated instance as pretty JSON.
pub fn save_instance(inst: &Instance, path: &Path) -> Result<()> {
    let report = validate_instance(inst);
    if !report.is_clean() {
        bail!("refusing to save a malformed instance:\n{report}");
    }
    let doc = InstanceFile {
        schema_version: SCHEMA_VERSION,
        instance: inst.clone(),
    };
    let text = serde_json::to_string_pretty(&doc).context("serializing instance")?;
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating directory {}", dir.display()))?;
        }
    }
    fs::write(path, text + "\n")
        .with_context(|| format!("writing instance to {}", path.display()))?;
    Ok(())
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let doc = InstanceFile {
        schema_version: SCHEMA_VERSION,
        instance: inst.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Reads and fully validates an instance document.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading instance from {}", path.display()))?;
    let doc: InstanceFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing instance document {}", path.display()))?;
    if doc.schema_version != SCHEMA_VERSION {
        bail!(
            "unsupported schema_version {} in {} (expected {SCHEMA_VERSION})",
            doc.schema_version,
            path.display()
        );
    }
    let report = validate_instance(&doc.instance);
    if !report.is_clean() {
        bail!("instance {} is not well-formed:\n{report}", path.display());
    }
    Ok(doc.instance)
}

/// Reads a prefix-notation rule file.
pub fn load_rule(path: &Path) -> Result<RuleTree> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading rule from {}", path.display()))?;
    text.trim()
        .parse()
        .with_context(|| format!("parsing rule file {}", path.display()))
}

pub fn save_rule(rule: &RuleTree, path: &Path) -> Result<()> {
    fs::write(path, format!("{rule}\n"))
        .with_context(|| format!("writing rule to {}", path.display()))?;
    Ok(())
}
