//! Ontology side file: tab-separated `subclass`, `count` and `label` records.

use std::io::BufRead;

use crate::error::LoadError;
use crate::kb::profile::PrefixTable;
use crate::kb::term::Iri;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OntologyRecord {
    Subclass { child: Iri, parent: Iri },
    Count { class: Iri, instances: u64 },
    Label { iri: Iri, text: String },
}

pub fn read_ontology<R: BufRead>(reader: R, prefixes: &PrefixTable) -> Result<Vec<OntologyRecord>, LoadError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let err = |message: String| LoadError::Ontology { line: idx + 1, message };
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let iri = |text: &str| {
            let bare = text.trim();
            let bare = bare.strip_prefix('<').and_then(|t| t.strip_suffix('>')).unwrap_or(bare);
            prefixes.expand_iri(bare).map_err(|e| err(e.to_string()))
        };
        let record = match fields[0].trim() {
            "subclass" => OntologyRecord::Subclass { child: iri(fields[1])?, parent: iri(fields[2])? },
            "count" => OntologyRecord::Count {
                class: iri(fields[1])?,
                instances: fields[2]
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("invalid instance count {:?}", fields[2])))?,
            },
            "label" => {
                let text = fields[2].trim();
                if text.is_empty() {
                    return Err(err("empty label".into()));
                }
                OntologyRecord::Label { iri: iri(fields[1])?, text: text.to_string() }
            }
            other => return Err(err(format!("unknown record type {other:?}"))),
        };
        records.push(record);
    }
    Ok(records)
}
