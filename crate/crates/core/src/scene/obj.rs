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

//! Minimal Wavefront OBJ reader: only `v` and `f` records are honored.

use crate::geometry::Vec3;

use super::mesh::TriMesh;

/// Parses OBJ text into a validated triangle mesh.
///
/// Face vertices may carry `/vt/vn` suffixes, which are dropped. Faces with
/// anything other than three vertices are rejected.
pub fn parse_obj(text: &str) -> Result<TriMesh, String> {
    let mut vertices = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| format!("line {lineno}: bad vertex coordinate: {e}"))?;
                if coords.len() != 3 {
                    return Err(format!("line {lineno}: vertex needs 3 coordinates"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(format!(
                        "line {lineno}: face has {} vertices, only triangles are supported",
                        refs.len()
                    ));
                }
                let mut tri = [0u32; 3];
                for (slot, r) in tri.iter_mut().zip(&refs) {
                    let idx = r.split('/').next().unwrap_or("");
                    let i: u32 = idx
                        .parse()
                        .map_err(|_| format!("line {lineno}: bad face index {r:?}"))?;
                    if i == 0 {
                        return Err(format!("line {lineno}: face indices are 1-based"));
                    }
                    *slot = i - 1;
                }
                faces.push(tri);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces).map_err(|e| e.to_string())
}

/// Writes a mesh as OBJ text (`v` and `f` records only).
pub fn write_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        out.push_str(&format!("v {:?} {:?} {:?}\n", v.x, v.y, v.z));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    out
}
