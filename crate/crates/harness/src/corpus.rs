//! The `.lsq` example programs shipped in `corpus/`.
//!
//! Each file starts with a `-- expect: V` line naming the value the program
//! evaluates to.

use std::path::{Path, PathBuf};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

#[derive(Debug, Clone)]
pub struct CorpusProgram {
    pub name: String,
    pub path: PathBuf,
    pub text: String,
    /// The printed value from the `-- expect:` line.
    pub expect: String,
}

/// All corpus programs, sorted by file name.
pub fn load_corpus() -> std::io::Result<Vec<CorpusProgram>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(corpus_dir())? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "lsq") {
            let text = std::fs::read_to_string(&path)?;
            let expect = text
                .lines()
                .find_map(|l| l.strip_prefix("-- expect:"))
                .map(|v| v.trim().to_string())
                .unwrap_or_default();
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            out.push(CorpusProgram {
                name,
                path,
                text,
                expect,
            });
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}
