use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{io_err, row_key, ReportError, RowKey};
use crate::retrieval::AceRow;

/// Append-only JSON-lines file of result rows. Each row is written and
/// flushed on its own line, so an interrupted run leaves at most one torn
/// final line, which is dropped on reopen.
pub struct ResultStore {
    path: PathBuf,
    file: File,
    rows: Vec<AceRow>,
    keys: HashSet<RowKey>,
}

impl ResultStore {
    pub fn open(path: impl AsRef<Path>) -> Result<ResultStore, ReportError> {
        let path = path.as_ref().to_path_buf();
        let (rows, keep) = if path.exists() {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            Self::parse(&path, &text)?
        } else {
            (Vec::new(), 0)
        };
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io_err(&path))?;
        let len = file.metadata().map_err(io_err(&path))?.len();
        if len != keep as u64 {
            log::warn!("{}: dropping {} bytes of an incomplete final row", path.display(), len - keep as u64);
            file.set_len(keep as u64).map_err(io_err(&path))?;
        }
        let keys = rows.iter().map(row_key).collect();
        Ok(ResultStore { path, file, rows, keys })
    }

    /// Rows plus the byte length of the well-formed prefix.
    fn parse(path: &Path, text: &str) -> Result<(Vec<AceRow>, usize), ReportError> {
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        let mut offset = 0;
        for (i, raw) in text.split_inclusive('\n').enumerate() {
            if !raw.ends_with('\n') {
                // Torn final write; the row is recomputed on resume.
                break;
            }
            let line = raw.trim();
            if !line.is_empty() {
                let row: AceRow = serde_json::from_str(line).map_err(|e| ReportError::Store {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
                if !seen.insert(row_key(&row)) {
                    return Err(ReportError::Store {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message: "duplicate row".into(),
                    });
                }
                rows.push(row);
            }
            offset += raw.len();
        }
        Ok((rows, offset))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn rows(&self) -> &[AceRow] {
        &self.rows
    }

    pub fn contains(&self, key: &RowKey) -> bool {
        self.keys.contains(key)
    }

    pub fn append(&mut self, row: AceRow) -> Result<(), ReportError> {
        let key = row_key(&row);
        if !self.keys.insert(key) {
            return Ok(());
        }
        let mut line = serde_json::to_string(&row).expect("rows serialize");
        line.push('\n');
        self.file.write_all(line.as_bytes()).map_err(io_err(&self.path))?;
        self.file.flush().map_err(io_err(&self.path))?;
        self.rows.push(row);
        Ok(())
    }
}

/// Reads a results file without opening it for writing.
pub fn read_rows(path: &Path) -> Result<Vec<AceRow>, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(ResultStore::parse(path, &text)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::{AceMode, Task};

    fn row(code: &str) -> AceRow {
        AceRow {
            model: "m".into(),
            task: Task::Lr,
            code: code.into(),
            k: 1,
            o: 0.5,
            o_star: 0.4,
            n: 10,
            scale: 100_000,
            ace: Some(2000.0),
            error: None,
            seed: 0,
            mode: AceMode::Corpus,
            timestamp: None,
        }
    }

    #[test]
    fn reopen_resumes_and_drops_torn_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let mut s = ResultStore::open(&path).unwrap();
        s.append(row("NOUN-B")).unwrap();
        s.append(row("ADJ-A")).unwrap();
        s.append(row("ADJ-A")).unwrap();
        drop(s);
        let clean = fs::read_to_string(&path).unwrap();
        assert_eq!(clean.lines().count(), 2);

        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"model\": \"m\", \"ta").unwrap();
        drop(f);
        let s = ResultStore::open(&path).unwrap();
        assert_eq!(s.rows().len(), 2);
        assert!(s.contains(&("m".into(), Task::Lr, "ADJ-A".into(), 1)));
        drop(s);
        assert_eq!(fs::read_to_string(&path).unwrap(), clean);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        fs::write(&path, "garbage\n{}\n").unwrap();
        assert!(matches!(ResultStore::open(&path), Err(ReportError::Store { line: 1, .. })));
    }
}
