//! Triangle-mesh scan ingestion.
//!
//! Scans arrive as Wavefront-style ASCII files (`v x y z` / `f i j k`). The
//! world convention is right-handed, y-up, meters. Faces with more than three
//! vertices are fan-triangulated; degenerate triangles (area below
//! [`DEGENERATE_AREA`]) are dropped and counted.

use std::fmt;
use std::path::Path;

use glam::DVec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Triangles with area below this (m²) are treated as slivers and dropped.
pub const DEGENERATE_AREA: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("mesh has no valid triangles")]
    EmptyMesh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<DVec3>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: DVec3,
    pub max: DVec3,
}

impl Aabb {
    pub fn extent(&self) -> DVec3 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub triangle_count: usize,
    pub degenerate_triangles: usize,
    pub non_finite_vertices: usize,
    pub unreferenced_vertices: usize,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.degenerate_triangles == 0
            && self.non_finite_vertices == 0
            && self.unreferenced_vertices == 0
    }

    /// `key=value` lines, one per counter.
    pub fn to_kv(&self) -> String {
        format!(
            "triangles={}\ndegenerate_triangles={}\nnon_finite_vertices={}\nunreferenced_vertices={}\n",
            self.triangle_count,
            self.degenerate_triangles,
            self.non_finite_vertices,
            self.unreferenced_vertices
        )
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mesh validation")?;
        writeln!(f, "  triangles:             {}", self.triangle_count)?;
        writeln!(f, "  degenerate triangles:  {}", self.degenerate_triangles)?;
        writeln!(f, "  non-finite vertices:   {}", self.non_finite_vertices)?;
        write!(f, "  unreferenced vertices: {}", self.unreferenced_vertices)
    }
}

impl TriangleMesh {
    pub fn new(vertices: Vec<DVec3>, triangles: Vec<[u32; 3]>) -> Self {
        Self { vertices, triangles }
    }

    pub fn triangle(&self, index: usize) -> [DVec3; 3] {
        let [a, b, c] = self.triangles[index];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, index: usize) -> f64 {
        let [a, b, c] = self.triangle(index);
        triangle_area(a, b, c)
    }

    /// Appends another mesh, offsetting its indices.
    pub fn append(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }

    /// Writes the mesh in the same ASCII format [`parse_mesh`] reads.
    pub fn to_obj_string(&self) -> String {
        let mut out = String::with_capacity(self.vertices.len() * 32 + self.triangles.len() * 16);
        for v in &self.vertices {
            out.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
        }
        for t in &self.triangles {
            out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
        }
        out
    }
}

pub(crate) fn triangle_area(a: DVec3, b: DVec3, c: DVec3) -> f64 {
    0.5 * (b - a).cross(c - a).length()
}

fn triangle_is_valid(mesh: &TriangleMesh, tri: [u32; 3]) -> bool {
    if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
        return false;
    }
    let [a, b, c] = tri.map(|i| mesh.vertices[i as usize]);
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return false;
    }
    triangle_area(a, b, c) >= DEGENERATE_AREA
}

/// Reads and validates a mesh file.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            IngestError::FileNotFound(path.display().to_string())
        } else {
            IngestError::Io { path: path.display().to_string(), source: e }
        }
    })?;
    let (mesh, _dropped) = parse_mesh(&text)?;
    Ok(mesh)
}

/// Parses mesh text, returning the cleaned mesh and the number of dropped
/// triangles.
pub fn parse_mesh(text: &str) -> Result<(TriangleMesh, usize), IngestError> {
    let mut vertices = Vec::new();
    let mut raw_faces: Vec<(usize, Vec<i64>)> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .take(3)
                    .map(|s| {
                        s.parse::<f64>().map_err(|_| IngestError::ParseError {
                            line: line_no,
                            message: format!("bad coordinate '{s}'"),
                        })
                    })
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 {
                    return Err(IngestError::ParseError {
                        line: line_no,
                        message: "vertex needs 3 coordinates".into(),
                    });
                }
                vertices.push(DVec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<i64> = parts
                    .map(|s| {
                        // `f 1/2/3` style: the position index comes first
                        let head = s.split('/').next().unwrap_or("");
                        head.parse::<i64>().map_err(|_| IngestError::ParseError {
                            line: line_no,
                            message: format!("bad face index '{s}'"),
                        })
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(IngestError::ParseError {
                        line: line_no,
                        message: "face needs at least 3 vertices".into(),
                    });
                }
                raw_faces.push((line_no, idx));
            }
            // vn, vt, o, g, s, usemtl, mtllib...
            _ => {}
        }
    }

    let n = vertices.len() as i64;
    let mut mesh = TriangleMesh { vertices, triangles: Vec::new() };
    let mut dropped = 0;
    for (line_no, face) in raw_faces {
        let resolved: Vec<u32> = face
            .iter()
            .map(|&i| {
                let r = if i > 0 { i - 1 } else { n + i };
                if i == 0 || r < 0 || r >= n {
                    Err(IngestError::ParseError {
                        line: line_no,
                        message: format!("face index {i} out of range"),
                    })
                } else {
                    Ok(r as u32)
                }
            })
            .collect::<Result<_, _>>()?;
        for k in 1..resolved.len() - 1 {
            let tri = [resolved[0], resolved[k], resolved[k + 1]];
            if triangle_is_valid(&mesh, tri) {
                mesh.triangles.push(tri);
            } else {
                dropped += 1;
            }
        }
    }
    if mesh.triangles.is_empty() {
        return Err(IngestError::EmptyMesh);
    }
    Ok((mesh, dropped))
}

/// Tight bounds over every vertex referenced by a triangle.
pub fn mesh_bounds(mesh: &TriangleMesh) -> Result<Aabb, IngestError> {
    let mut iter = mesh
        .triangles
        .iter()
        .flat_map(|t| t.iter())
        .map(|&i| mesh.vertices[i as usize]);
    let first = iter.next().ok_or(IngestError::EmptyMesh)?;
    let (min, max) = iter.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(Aabb { min, max })
}

pub fn validate_mesh(mesh: &TriangleMesh) -> ValidationReport {
    let mut report = ValidationReport {
        triangle_count: mesh.triangles.len(),
        ..Default::default()
    };
    report.non_finite_vertices = mesh.vertices.iter().filter(|v| !v.is_finite()).count();
    let mut referenced = vec![false; mesh.vertices.len()];
    for &tri in &mesh.triangles {
        let in_range = tri.iter().all(|&i| (i as usize) < mesh.vertices.len());
        if !in_range {
            report.degenerate_triangles += 1;
            continue;
        }
        for &i in &tri {
            referenced[i as usize] = true;
        }
        if !triangle_is_valid(mesh, tri) {
            report.degenerate_triangles += 1;
        }
    }
    report.unreferenced_vertices = referenced.iter().filter(|r| !**r).count();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUAD: &str = "v 0 0 0\nv 10 0 0\nv 10 0 10\nv 0 0 10\nf 1 2 3\nf 1 3 4\n";

    #[test]
    fn parses_unit_quad() {
        let (mesh, dropped) = parse_mesh(QUAD).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.triangles.len(), 2);
        assert_eq!(dropped, 0);
    }

    #[test]
    fn repeated_index_triangle_is_empty_mesh() {
        let err = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 0 1\nf 1 1 2\n").unwrap_err();
        assert!(matches!(err, IngestError::EmptyMesh));
    }

    #[test]
    fn quads_are_fan_triangulated() {
        let (mesh, _) = parse_mesh("v 0 0 0\nv 1 0 0\nv 1 0 1\nv 0 0 1\nf 1 2 3 4\n").unwrap();
        assert_eq!(mesh.triangles, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn slash_and_negative_indices() {
        let (mesh, _) = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 0 1\nf 1/1/1 -2/2 -1\n").unwrap();
        assert_eq!(mesh.triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn malformed_lines_are_parse_errors() {
        assert!(matches!(
            parse_mesh("v 0 zero 0\n"),
            Err(IngestError::ParseError { line: 1, .. })
        ));
        assert!(matches!(
            parse_mesh("v 0 0 0\nf 1 2 3\n"),
            Err(IngestError::ParseError { line: 2, .. })
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_mesh("/definitely/not/here.obj"),
            Err(IngestError::FileNotFound(_))
        ));
    }

    #[test]
    fn bounds_of_quad() {
        let (mesh, _) = parse_mesh(QUAD).unwrap();
        let b = mesh_bounds(&mesh).unwrap();
        assert_eq!(b.min, DVec3::ZERO);
        assert_eq!(b.max, DVec3::new(10.0, 0.0, 10.0));
    }

    #[test]
    fn bounds_of_repeated_vertex() {
        let p = DVec3::new(1.0, 2.0, 3.0);
        let mesh = TriangleMesh::new(vec![p, p, p], vec![[0, 1, 2]]);
        let b = mesh_bounds(&mesh).unwrap();
        assert_eq!(b.min, p);
        assert_eq!(b.max, p);
        assert!(matches!(
            mesh_bounds(&TriangleMesh::new(vec![], vec![])),
            Err(IngestError::EmptyMesh)
        ));
    }

    #[test]
    fn clean_quad_report() {
        let (mesh, _) = parse_mesh(QUAD).unwrap();
        let report = validate_mesh(&mesh);
        assert!(report.is_clean());
        assert!(report.to_kv().contains("degenerate_triangles=0"));
    }

    #[test]
    fn nan_vertex_is_counted() {
        let mesh = TriangleMesh::new(
            vec![
                DVec3::ZERO,
                DVec3::X,
                DVec3::Z,
                DVec3::new(f64::NAN, 0.0, 0.0),
            ],
            vec![[0, 1, 2]],
        );
        let report = validate_mesh(&mesh);
        assert_eq!(report.non_finite_vertices, 1);
        assert_eq!(report.unreferenced_vertices, 1);
        assert_eq!(report.degenerate_triangles, 0);
    }

    #[test]
    fn slivers_are_counted_by_area() {
        // three slivers whose area (by the cross-product formula) is ~5e-12 m²
        let mut vertices = vec![DVec3::ZERO, DVec3::X, DVec3::Z];
        let mut triangles = vec![[0, 1, 2]];
        for k in 0..3 {
            let base = vertices.len() as u32;
            let x = 5.0 + k as f64;
            vertices.push(DVec3::new(x, 0.0, 0.0));
            vertices.push(DVec3::new(x + 1.0, 0.0, 0.0));
            vertices.push(DVec3::new(x + 0.5, 0.0, 1e-11));
            triangles.push([base, base + 1, base + 2]);
        }
        let mesh = TriangleMesh::new(vertices, triangles);
        for i in 1..4 {
            assert!(mesh.triangle_area(i) < DEGENERATE_AREA);
        }
        assert_eq!(validate_mesh(&mesh).degenerate_triangles, 3);
    }
}
