//! Triangulated surface meshes: the domain every operator is built on.

mod off;
mod ply;
mod synthetic;

use std::collections::{BTreeSet, VecDeque};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

pub use off::{read_off, write_off};
pub use ply::{read_ply, write_ply};
pub use synthetic::{make_synthetic, SyntheticKind, MAX_ICOSPHERE_LEVEL, UV_RES_RANGE};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest triangle area (in mesh units squared) accepted as non-degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// An immutable, validated triangle mesh.
///
/// Invariants: every index is in range, no triangle repeats a vertex, no
/// triangle has area below [`MIN_TRIANGLE_AREA`], every vertex is used.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh<T> {
    vertices: Vec<[T; 3]>,
    triangles: Vec<[usize; 3]>,
}

impl<T: Scalar> TriMesh<T> {
    pub fn new(vertices: Vec<[T; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        let mut used = vec![false; nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= nv {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {t} references vertex {i} but the mesh has {nv} vertices"
                    )));
                }
                used[i] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} repeats a vertex: {tri:?}"
                )));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!(
                "vertex {v} is not referenced by any triangle"
            )));
        }
        let mesh = TriMesh {
            vertices,
            triangles,
        };
        for t in 0..mesh.triangles.len() {
            let area = mesh.triangle_area(t).as_f64();
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(Error::DegenerateTriangle { triangle: t, area });
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[T; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let n = cross(sub(b, a), sub(c, a));
        dot(n, n).sqrt() * T::of(0.5)
    }

    /// Unique undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = BTreeSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (i, j) = (tri[k], tri[(k + 1) % 3]);
                set.insert((i.min(j), i.max(j)));
            }
        }
        set.into_iter().collect()
    }

    /// V - E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.edges().len() as i64 + self.n_triangles() as i64
    }

    /// Sorted neighbour lists over mesh edges.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices()];
        for (i, j) in self.edges() {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Breadth-first `hops`-ring around `center`, returned sorted.
    pub fn k_ring(&self, center: usize, hops: usize) -> Result<Vec<usize>> {
        if center >= self.n_vertices() {
            return Err(Error::InvalidArgument(format!(
                "center vertex {center} out of range for {} vertices",
                self.n_vertices()
            )));
        }
        let adj = self.vertex_neighbors();
        let mut depth = vec![usize::MAX; self.n_vertices()];
        depth[center] = 0;
        let mut queue = VecDeque::from([center]);
        while let Some(v) = queue.pop_front() {
            if depth[v] == hops {
                continue;
            }
            for &w in &adj[v] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok((0..self.n_vertices())
            .filter(|&v| depth[v] != usize::MAX)
            .collect())
    }

    /// Copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        TriMesh {
            vertices: self
                .vertices
                .iter()
                .map(|p| p.map(|x| x * factor))
                .collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> TriMesh<U> {
        TriMesh {
            vertices: self
                .vertices
                .iter()
                .map(|p| p.map(|x| U::of(x.as_f64())))
                .collect(),
            triangles: self.triangles.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    PlyAscii,
}

impl MeshFormat {
    /// Guess from the file extension (`.off`, `.ply`).
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("off") => Ok(MeshFormat::Off),
            Some("ply") => Ok(MeshFormat::PlyAscii),
            _ => Err(Error::InvalidArgument(format!(
                "cannot infer mesh format from {}; expected .off or .ply",
                path.display()
            ))),
        }
    }
}

pub fn load_mesh<T: Scalar>(path: &Path, format: MeshFormat) -> Result<TriMesh<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        MeshFormat::Off => read_off(reader),
        MeshFormat::PlyAscii => read_ply(reader),
    }
}

pub fn save_mesh<T: Scalar>(mesh: &TriMesh<T>, path: &Path, format: MeshFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        MeshFormat::Off => write_off(mesh, &mut w),
        MeshFormat::PlyAscii => write_ply(mesh, &mut w),
    }
    .map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[inline]
pub(crate) fn sub<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Split one line into whitespace tokens, dropping `#` comments.
pub(crate) fn tokens(line: &str) -> Vec<&str> {
    let content = line.split('#').next().unwrap_or("");
    content.split_whitespace().collect()
}
