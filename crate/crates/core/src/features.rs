//! Meta-feature matrix files: `graph_id,f0,...,f{d-1}` plus a JSON sidecar
//! naming the schema and the features.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metafeat::{MetaFeatureVector, Schema};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub schema: Schema,
    pub graph_ids: Vec<String>,
    pub values: Matrix,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    schema: Schema,
    dim: usize,
    feature_names: Vec<String>,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    csv.with_file_name(name)
}

impl FeatureMatrix {
    pub fn from_vectors(schema: Schema, vectors: Vec<MetaFeatureVector>) -> Result<Self> {
        let dim = schema.dim();
        let mut rows = Vec::with_capacity(vectors.len());
        let mut graph_ids = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.schema != schema || v.values.len() != dim {
                return Err(Error::invalid(format!("feature vector of {} does not match schema {schema}", v.graph_id)));
            }
            graph_ids.push(v.graph_id);
            rows.push(v.values);
        }
        Ok(FeatureMatrix {
            schema,
            graph_ids,
            values: if rows.is_empty() { Matrix::zeros(0, dim) } else { Matrix::from_rows(&rows) },
        })
    }

    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    pub fn index_of(&self) -> HashMap<&str, usize> {
        self.graph_ids.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect()
    }

    pub fn row_of(&self, graph_id: &str) -> Option<&[f64]> {
        self.graph_ids.iter().position(|g| g == graph_id).map(|i| self.values.row(i))
    }

    /// Writes the CSV and its `.meta.json` sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["graph_id".to_string()];
        header.extend((0..self.dim()).map(|i| format!("f{i}")));
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for (id, row) in self.graph_ids.iter().zip(self.values.iter_rows()) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;

        let sidecar = Sidecar {
            schema: self.schema,
            dim: self.dim(),
            feature_names: self.schema.feature_names(),
        };
        let meta = sidecar_path(path);
        fs::write(&meta, serde_json::to_string_pretty(&sidecar)? + "\n").map_err(|e| Error::io(&meta, e))
    }

    /// Reads a feature CSV. The schema comes from the sidecar when present,
    /// otherwise it is inferred from the column count.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
        if header.get(0) != Some("graph_id") {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "first column must be graph_id".into(),
            });
        }
        let dim = header.len() - 1;
        let meta = sidecar_path(path);
        let schema = if meta.exists() {
            let text = fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
            let sidecar: Sidecar = serde_json::from_str(&text)?;
            sidecar.schema
        } else {
            Schema::ALL
                .into_iter()
                .find(|s| s.dim() == dim)
                .ok_or_else(|| Error::invalid(format!("{}: no schema has {dim} features", path.display())))?
        };
        if schema.dim() != dim {
            return Err(Error::invalid(format!(
                "{}: schema {schema} expects {} features, file has {dim}",
                path.display(),
                schema.dim()
            )));
        }
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            ids.push(rec[0].to_string());
            for (j, cell) in rec.iter().skip(1).enumerate() {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 2,
                    message: format!("column f{j}: invalid number {cell:?}"),
                })?;
                data.push(v);
            }
        }
        Ok(FeatureMatrix {
            schema,
            values: Matrix::from_vec(ids.len(), dim, data),
            graph_ids: ids,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::metafeat::meta_features;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let graphs = [
            Graph::new(4, [(0, 1), (1, 2), (2, 3)], false).unwrap().with_id("a"),
            Graph::new(4, [(0, 1), (1, 2), (2, 0), (2, 3)], false).unwrap().with_id("b"),
        ];
        let fm = FeatureMatrix::from_vectors(
            Schema::Compact,
            graphs.iter().map(|g| meta_features(g, Schema::Compact)).collect(),
        )
        .unwrap();
        let path = dir.path().join("f.csv");
        fm.save(&path).unwrap();
        assert!(sidecar_path(&path).exists());
        assert_eq!(FeatureMatrix::load(&path).unwrap(), fm);
    }
}
