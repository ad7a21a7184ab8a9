use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::error::{PsqError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

/// Streams `{"id": ..., "text": ...}` objects from a JSON-lines file.
/// Blank lines are skipped.
pub fn read_documents_jsonl(
    path: impl AsRef<Path>,
) -> Result<impl Iterator<Item = Result<RawDocument>>> {
    let path = path.as_ref().to_owned();
    let file = File::open(&path).map_err(|e| PsqError::io(&path, e))?;
    let origin = path.display().to_string();
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .filter_map(move |(i, line)| match line {
            Err(e) => Some(Err(PsqError::io(&path, e))),
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(
                serde_json::from_str::<RawDocument>(&l)
                    .map_err(|e| PsqError::parse(origin.clone(), i + 1, e.to_string())),
            ),
        }))
}

pub fn load_documents_jsonl(path: impl AsRef<Path>) -> Result<Vec<RawDocument>> {
    read_documents_jsonl(path)?.collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        std::fs::write(
            &p,
            "{\"id\":\"a\",\"text\":\"x y\"}\n\n{\"id\":\"b\",\"text\":\"z\"}\n",
        )
        .unwrap();
        let docs = load_documents_jsonl(&p).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].id, "b");
        std::fs::write(&p, "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":3}\n").unwrap();
        assert!(matches!(
            load_documents_jsonl(&p),
            Err(PsqError::Parse { line: 2, .. })
        ));
    }
}
