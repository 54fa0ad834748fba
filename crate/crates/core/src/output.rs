//! Writing result files: atomic replacement so an aborted run never leaves
//! a half-written file behind, and a JSON manifest beside every output.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// A file that only appears under its final name once [`AtomicFile::commit`]
/// succeeds. Dropping it uncommitted deletes the temporary.
pub struct AtomicFile {
    target: PathBuf,
    tmp: PathBuf,
    writer: Option<BufWriter<File>>,
}

impl AtomicFile {
    pub fn create(target: impl AsRef<Path>) -> io::Result<Self> {
        let target = target.as_ref().to_path_buf();
        let mut name = target.file_name().unwrap_or_default().to_os_string();
        name.push(".partial");
        let tmp = target.with_file_name(name);
        let writer = BufWriter::new(File::create(&tmp)?);
        Ok(AtomicFile {
            target,
            tmp,
            writer: Some(writer),
        })
    }

    pub fn commit(mut self) -> io::Result<PathBuf> {
        let w = self.writer.take().expect("writer present until commit");
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&self.tmp, &self.target)?;
        Ok(self.target.clone())
    }
}

impl Write for AtomicFile {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.writer.as_mut().expect("not committed").write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.writer.as_mut().expect("not committed").flush()
    }
}

impl Drop for AtomicFile {
    fn drop(&mut self) {
        if self.writer.take().is_some() {
            let _ = fs::remove_file(&self.tmp);
        }
    }
}

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: impl AsRef<Path>, contents: &str) -> io::Result<PathBuf> {
    let mut f = AtomicFile::create(path)?;
    f.write_all(contents.as_bytes())?;
    f.commit()
}

#[derive(Debug, Clone, Serialize)]
pub struct RngInfo {
    pub generator: &'static str,
    pub seed: u64,
}

/// Everything needed to reproduce a set of output files.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<RngInfo>,
    pub created: String,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, params: &impl Serialize) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            params: serde_json::to_value(params).expect("parameters serialize"),
            rng: None,
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_rng(mut self, generator: &'static str, seed: u64) -> Self {
        self.rng = Some(RngInfo { generator, seed });
        self
    }

    pub fn output(&mut self, path: &Path) {
        let name = path.file_name().unwrap_or(path.as_os_str());
        self.outputs.push(name.to_string_lossy().into_owned());
    }

    /// `<stem>.manifest.json` next to `beside`.
    pub fn path_for(beside: &Path) -> PathBuf {
        let mut name = beside.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        beside.with_file_name(name)
    }

    pub fn write(&self, path: &Path) -> io::Result<PathBuf> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(path, &(text + "\n"))
    }
}
