//! Query-file ingestion: JSON-lines, one query per line.
//!
//! Schema: `{"qid": ..., "query": "...", "frequency": ..., "documents":
//! [{"doc_id": "...", "relevance": 0|1}, ...]}`. Query ids may be numbers or
//! strings; they are treated as opaque strings either way. A line where no
//! document carries `relevance` is an evaluation-style query (no labels); if
//! any document carries one, the line is training-style and unlabeled
//! documents default to not-relevant.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::IdValue;
use crate::model::{DocumentId, QueryId, QueryRequest, QuerySet, Relevance};

#[derive(Debug, Deserialize)]
struct RawPoolDoc {
    doc_id: IdValue,
    #[serde(default)]
    relevance: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RawQuery {
    qid: IdValue,
    query: String,
    frequency: f64,
    documents: Vec<RawPoolDoc>,
}

fn binary_relevance(value: f64) -> Result<Relevance> {
    if value == 0.0 {
        Ok(Relevance::NOT_RELEVANT)
    } else if value == 1.0 {
        Ok(Relevance::RELEVANT)
    } else {
        Err(Error::RelevanceNotBinary { value })
    }
}

/// Loads all queries in file order.
pub fn load_queries(path: &Path) -> Result<QuerySet> {
    let mut requests = Vec::new();
    crate::io::for_each_line(path, |line_no, line| {
        let raw: RawQuery = serde_json::from_str(line)
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        let fail = |e: Error| Error::malformed(path, line_no, e.to_string());

        let qid = QueryId::new(raw.qid.into_string()).map_err(fail)?;
        let mut pool = BTreeSet::new();
        let mut labels = HashMap::new();
        let mut labeled = false;
        for raw_doc in raw.documents {
            let doc = DocumentId::new(raw_doc.doc_id.into_string()).map_err(fail)?;
            if !pool.insert(doc.clone()) {
                return Err(Error::malformed(
                    path,
                    line_no,
                    format!("document {doc} listed twice in the pool of query {qid}"),
                ));
            }
            if let Some(value) = raw_doc.relevance {
                labeled = true;
                labels.insert(doc, binary_relevance(value).map_err(fail)?);
            }
        }
        let relevance = labeled.then_some(labels);
        let request =
            QueryRequest::new(qid, raw.query, raw.frequency, pool, relevance).map_err(fail)?;
        requests.push(request);
        Ok(())
    })?;
    QuerySet::from_requests(requests)
}
