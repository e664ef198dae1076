//! Corpus ingestion: JSON-lines, one paper per line, plain or gzipped.
//!
//! The schema is the Semantic Scholar subset used by the track: `id`,
//! `title`, `paperAbstract`, and `authors` as a list of `{name, ids}`
//! entries. Citation lists and any other fields are accepted and ignored.
//! An author entry may carry several ids; the first is used and a warning
//! records the collapse. Entries with no ids cannot take part in author
//! accounting and are skipped with a warning.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::LoadWarning;
use crate::model::{AuthorId, Corpus, Document, DocumentId};

#[derive(Debug, Deserialize)]
struct RawAuthor {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    ids: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    title: Option<String>,
    #[serde(default, rename = "paperAbstract")]
    paper_abstract: Option<String>,
    #[serde(default)]
    authors: Vec<RawAuthor>,
}

/// Loads a corpus file. Duplicate document ids are an error naming both
/// lines; author-id irregularities come back as warnings.
pub fn load_corpus(path: &Path) -> Result<(Corpus, Vec<LoadWarning>)> {
    let mut corpus = Corpus::new();
    let mut warnings = Vec::new();
    let mut first_seen: HashMap<DocumentId, u64> = HashMap::new();

    crate::io::for_each_line(path, |line_no, line| {
        let raw: RawRecord = serde_json::from_str(line)
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        let id = DocumentId::new(raw.id)
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        if let Some(first) = first_seen.get(&id) {
            return Err(Error::DuplicateDocumentId {
                path: path.to_path_buf(),
                id,
                first_line: *first,
                line: line_no,
            });
        }

        let mut authors = Vec::with_capacity(raw.authors.len());
        for raw_author in raw.authors {
            let label = || raw_author.name.clone().unwrap_or_else(|| "?".to_string());
            match raw_author.ids.first() {
                None => warnings.push(LoadWarning {
                    path: path.to_path_buf(),
                    line: Some(line_no),
                    message: format!(
                        "author \"{}\" of document {id} has no id and is skipped",
                        label()
                    ),
                }),
                Some(first_id) => {
                    if raw_author.ids.len() > 1 {
                        warnings.push(LoadWarning {
                            path: path.to_path_buf(),
                            line: Some(line_no),
                            message: format!(
                                "author \"{}\" of document {id} has {} ids; using {first_id}",
                                label(),
                                raw_author.ids.len()
                            ),
                        });
                    }
                    let author = AuthorId::new(first_id.clone())
                        .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
                    authors.push(author);
                }
            }
        }

        let document = Document::new(id.clone(), authors, raw.title, raw.paper_abstract)
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        corpus
            .insert(document)
            .expect("duplicate ids rejected above");
        first_seen.insert(id, line_no);
        Ok(())
    })?;

    Ok((corpus, warnings))
}
