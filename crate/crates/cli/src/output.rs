use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::Invalid;

pub const PROVENANCE_FILE: &str = "provenance.json";

/// Output directory that refuses to write over any input of the run. Files
/// are buffered and only written once every target has been checked.
pub struct OutDir {
    dir: PathBuf,
    inputs: Vec<PathBuf>,
    pending: Vec<(String, String)>,
}

fn canonical(p: &Path) -> Option<PathBuf> {
    fs::canonicalize(p).ok()
}

impl OutDir {
    pub fn create(dir: &Path, inputs: &[PathBuf]) -> anyhow::Result<Self> {
        Ok(OutDir {
            dir: dir.to_owned(),
            inputs: inputs.iter().filter_map(|p| canonical(p)).collect(),
            pending: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<()> {
        self.pending.push((name.to_owned(), contents.to_owned()));
        Ok(())
    }

    /// Adds the provenance record, then writes everything.
    pub fn finish<P: Serialize>(
        mut self,
        command: &str,
        seed: u64,
        parameters: &P,
        inputs: &[PathBuf],
    ) -> anyhow::Result<()> {
        let record = Provenance {
            tool: "playsleuth",
            version: env!("CARGO_PKG_VERSION"),
            format_version: playsleuth::format::FORMAT_VERSION,
            command,
            seed,
            parameters,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: self.pending.iter().map(|(n, _)| n.clone()).collect(),
        };
        let mut text = playsleuth::format::header_line("provenance");
        text.push('\n');
        text.push_str(&serde_json::to_string_pretty(&record)?);
        text.push('\n');
        self.write(PROVENANCE_FILE, &text)?;

        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        for (name, _) in &self.pending {
            let path = self.dir.join(name);
            if canonical(&path).is_some_and(|c| self.inputs.contains(&c)) {
                return Err(Invalid(format!("refusing to overwrite input file {}", path.display())).into());
            }
        }
        for (name, contents) in &self.pending {
            let path = self.dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Provenance<'a, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    format_version: u32,
    command: &'a str,
    seed: u64,
    parameters: &'a P,
    inputs: Vec<String>,
    outputs: Vec<String>,
}
