use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::fail::CliError;

pub struct Artifact {
    /// Relative path; may contain subdirectories.
    pub name: String,
    pub body: Vec<u8>,
    /// Whether the `# config=... seed=...` line is prepended.
    pub header: bool,
}

impl Artifact {
    pub fn new(name: impl Into<String>, body: Vec<u8>) -> Self {
        Artifact {
            name: name.into(),
            body,
            header: true,
        }
    }

    /// For data files whose format has no comment syntax (article text).
    pub fn raw(name: impl Into<String>, body: Vec<u8>) -> Self {
        Artifact {
            name: name.into(),
            body,
            header: false,
        }
    }
}

/// Writes every artifact into a staging directory inside `out`, then moves
/// the top-level entries into place. On failure nothing new is left behind.
pub fn publish(out: &Path, header: &str, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let io = |what: &str, p: &Path, e: std::io::Error| CliError::internal(format!("{what} {}: {e}", p.display()));
    fs::create_dir_all(out).map_err(|e| io("creating", out, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".readscroll-staging-")
        .tempdir_in(out)
        .map_err(|e| io("staging in", out, e))?;
    let mut top = BTreeSet::new();
    for a in artifacts {
        let p = staging.path().join(&a.name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| io("creating", parent, e))?;
        }
        let mut bytes = Vec::with_capacity(header.len() + a.body.len());
        if a.header {
            bytes.extend_from_slice(header.as_bytes());
        }
        bytes.extend_from_slice(&a.body);
        fs::write(&p, bytes).map_err(|e| io("writing", &p, e))?;
        if let Some(first) = Path::new(&a.name).components().next() {
            top.insert(PathBuf::from(first.as_os_str()));
        }
    }
    let mut moved: Vec<PathBuf> = Vec::with_capacity(top.len());
    for name in top {
        let dest = out.join(&name);
        let result = (|| {
            if dest.is_dir() {
                fs::remove_dir_all(&dest)?;
            }
            fs::rename(staging.path().join(&name), &dest)
        })();
        if let Err(e) = result {
            for p in &moved {
                let _ = if p.is_dir() {
                    fs::remove_dir_all(p)
                } else {
                    fs::remove_file(p)
                };
            }
            return Err(io("moving", &dest, e));
        }
        moved.push(dest);
    }
    Ok(moved)
}
