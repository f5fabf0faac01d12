use std::path::Path;

use crate::error::{Error, Result};
use crate::knn::Embeddings;

use super::NeuralSystem;

/// The language embedding table of a trained system.
pub fn language_embeddings(sys: &NeuralSystem) -> Embeddings {
    let mut emb = Embeddings::default();
    for id in 0..sys.vocab.language_count() {
        let code = sys.vocab.language_code(id).to_string();
        emb.families
            .insert(code.clone(), sys.vocab.language_family(id).to_string());
        emb.vectors
            .insert(code, sys.model.language_vector(id).to_vec());
    }
    emb
}

/// Writes one CSV row per language: `wals_code, family, e_0 … e_{d-1}`,
/// with every component in shortest round-trip decimal form.
pub fn export_embeddings(sys: &NeuralSystem, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Serde(format!("{other:?}")),
    })?;
    let mut header = vec!["wals_code".to_string(), "family".to_string()];
    header.extend((0..sys.model.dim).map(|i| format!("e{i}")));
    w.write_record(&header)?;
    for id in 0..sys.vocab.language_count() {
        let mut row = vec![
            sys.vocab.language_code(id).to_string(),
            sys.vocab.language_family(id).to_string(),
        ];
        row.extend(sys.model.language_vector(id).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<Embeddings> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let mut emb = Embeddings::default();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        if row.len() < 3 {
            return Err(Error::Parse {
                line: i + 2,
                message: "embedding row needs a code, a family and components".into(),
            });
        }
        let vector = row
            .iter()
            .skip(2)
            .map(|x| {
                x.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 2,
                    message: format!("bad component {x:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        emb.families.insert(row[0].to_string(), row[1].to_string());
        emb.vectors.insert(row[0].to_string(), vector);
    }
    Ok(emb)
}
