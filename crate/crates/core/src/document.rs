/*
Copyright 2026 The liftsim Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Shared helpers for the JSON input documents (scene, crane, path files).

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scene::mesh::TriMesh;
use crate::scene::obj::parse_obj;

/// Rewrites every object key ending in `_deg` to the bare key, converting
/// its numeric value (or array of numbers) from degrees to radians.
pub fn degrees_to_radians(value: &mut Value) -> Result<(), String> {
    match value {
        Value::Object(map) => {
            let deg_keys: Vec<String> = map.keys().filter(|k| k.ends_with("_deg")).cloned().collect();
            for key in deg_keys {
                let bare = key.trim_end_matches("_deg").to_string();
                if map.contains_key(&bare) {
                    return Err(format!("both `{key}` and `{bare}` given"));
                }
                let v = map.remove(&key).expect("key listed above");
                map.insert(bare, convert_deg(&key, v)?);
            }
            for v in map.values_mut() {
                degrees_to_radians(v)?;
            }
        }
        Value::Array(items) => {
            for v in items {
                degrees_to_radians(v)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn convert_deg(key: &str, v: Value) -> Result<Value, String> {
    let num = |v: &Value| {
        v.as_f64()
            .map(|d| Value::from(d.to_radians()))
            .ok_or_else(|| format!("`{key}` must be numeric"))
    };
    match &v {
        Value::Array(items) => Ok(Value::Array(items.iter().map(num).collect::<Result<_, _>>()?)),
        _ => num(&v),
    }
}

/// A mesh given inline or as a relative path to an OBJ file (`{"obj": "x.obj"}`).
#[derive(Debug, Clone)]
pub enum MeshDoc {
    Obj { obj: String },
    Inline(TriMesh),
}

impl<'de> Deserialize<'de> for MeshDoc {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = Value::deserialize(d)?;
        match v.get("obj") {
            Some(Value::String(path)) => Ok(MeshDoc::Obj { obj: path.clone() }),
            Some(_) => Err(D::Error::custom("`obj` must be a path string")),
            None => serde_json::from_value(v).map(MeshDoc::Inline).map_err(D::Error::custom),
        }
    }
}

/// Failure to turn a [`MeshDoc`] into a mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshLoadError {
    Missing(String),
    Invalid { path: String, reason: String },
}

impl MeshDoc {
    pub fn resolve(self, files: &dyn MeshSource) -> Result<TriMesh, MeshLoadError> {
        match self {
            MeshDoc::Inline(mesh) => Ok(mesh),
            MeshDoc::Obj { obj } => {
                let text = files
                    .read(&obj)
                    .ok_or_else(|| MeshLoadError::Missing(obj.clone()))?;
                parse_obj(&text).map_err(|reason| MeshLoadError::Invalid { path: obj, reason })
            }
        }
    }
}

/// Resolves mesh references found in documents.
pub trait MeshSource {
    fn read(&self, path: &str) -> Option<String>;
}

/// Resolves references relative to a directory on disk.
#[derive(Debug, Clone)]
pub struct DirSource(pub PathBuf);

impl DirSource {
    pub fn beside(document: &Path) -> Self {
        DirSource(document.parent().map(Path::to_path_buf).unwrap_or_default())
    }
}

impl MeshSource for DirSource {
    fn read(&self, path: &str) -> Option<String> {
        std::fs::read_to_string(self.0.join(path)).ok()
    }
}

/// In-memory mesh files, keyed by reference string.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MemorySource(pub HashMap<String, String>);

impl MeshSource for MemorySource {
    fn read(&self, path: &str) -> Option<String> {
        self.0.get(path).cloned()
    }
}

/// Source that resolves nothing; for documents with inline meshes only.
pub struct NoFiles;

impl MeshSource for NoFiles {
    fn read(&self, _path: &str) -> Option<String> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn converts_nested_degree_fields() {
        let mut v = json!({"luff_deg": 90, "limits": {"luff_deg": [0, 180]}, "hoist": 3});
        degrees_to_radians(&mut v).unwrap();
        assert_eq!(v["luff"], json!(std::f64::consts::FRAC_PI_2));
        assert_eq!(v["limits"]["luff"][1], json!(std::f64::consts::PI));
        assert_eq!(v["hoist"], json!(3));
    }

    #[test]
    fn rejects_duplicate_unit_spellings() {
        let mut v = json!({"swing": 0.1, "swing_deg": 10});
        assert!(degrees_to_radians(&mut v).is_err());
    }
}
