//! Deterministic closed test surfaces.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_ICOSPHERE_LEVEL: u32 = 7;
pub const UV_RES_RANGE: RangeInclusive<usize> = 3..=512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Regular tetrahedron with unit edge length.
    Tetrahedron,
    /// Unit-radius icosahedron subdivided `level` times (`V = 10·4^level + 2`).
    Icosphere(u32),
    /// Unit latitude/longitude sphere with `res` stacks and `2·res` slices.
    UvSphere(usize),
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    /// `tetrahedron`, `icosphere:<level>` or `uv-sphere:<res>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = |what: &str| {
            arg.parse::<usize>().map_err(|_| {
                Error::InvalidArgument(format!("{what} needs a numeric argument, e.g. {what}:3"))
            })
        };
        match name {
            "tetrahedron" => Ok(SyntheticKind::Tetrahedron),
            "icosphere" => Ok(SyntheticKind::Icosphere(num("icosphere")? as u32)),
            "uv-sphere" => Ok(SyntheticKind::UvSphere(num("uv-sphere")?)),
            _ => Err(Error::InvalidArgument(format!("unsupported synthetic mesh '{s}'"))),
        }
    }
}

pub fn make_synthetic<T: Scalar>(kind: SyntheticKind) -> Result<TriMesh<T>> {
    let (vertices, triangles) = match kind {
        SyntheticKind::Tetrahedron => tetrahedron(),
        SyntheticKind::Icosphere(level) => {
            if level > MAX_ICOSPHERE_LEVEL {
                return Err(Error::InvalidArgument(format!(
                    "icosphere level {level} exceeds {MAX_ICOSPHERE_LEVEL}"
                )));
            }
            icosphere(level)
        }
        SyntheticKind::UvSphere(res) => {
            if !UV_RES_RANGE.contains(&res) {
                return Err(Error::InvalidArgument(format!(
                    "uv-sphere resolution {res} outside {UV_RES_RANGE:?}"
                )));
            }
            uv_sphere(res)
        }
    };
    TriMesh::new(
        vertices.into_iter().map(|p| p.map(T::of)).collect(),
        triangles,
    )
}

fn tetrahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let s = 1.0 / (2.0 * 2f64.sqrt());
    let v = vec![[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    let t = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    (v, t)
}

fn normalize(p: [f64; 3]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / r, p[1] / r, p[2] / r]
}

fn icosphere(level: u32) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<[f64; 3]> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let mut t: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, v: &mut Vec<[f64; 3]>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (v[a], v[b]);
                v.push(normalize([
                    (p[0] + q[0]) / 2.0,
                    (p[1] + q[1]) / 2.0,
                    (p[2] + q[2]) / 2.0,
                ]));
                v.len() - 1
            })
        };
        let mut next = Vec::with_capacity(t.len() * 4);
        for &[a, b, c] in &t {
            let ab = mid(a, b, &mut v);
            let bc = mid(b, c, &mut v);
            let ca = mid(c, a, &mut v);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        t = next;
    }
    (v, t)
}

fn uv_sphere(res: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    use std::f64::consts::PI;
    let slices = 2 * res;
    let mut v = vec![[0.0, 0.0, 1.0]];
    for i in 1..res {
        let theta = PI * i as f64 / res as f64;
        for j in 0..slices {
            let phi = 2.0 * PI * j as f64 / slices as f64;
            v.push([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]);
        }
    }
    v.push([0.0, 0.0, -1.0]);
    let south = v.len() - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) * slices + (j % slices);

    let mut t = Vec::with_capacity(4 * res * (res - 1));
    for j in 0..slices {
        t.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..res - 1 {
        for j in 0..slices {
            let (a, b) = (ring(i, j), ring(i, j + 1));
            let (c, d) = (ring(i + 1, j), ring(i + 1, j + 1));
            t.push([a, c, d]);
            t.push([a, d, b]);
        }
    }
    for j in 0..slices {
        t.push([south, ring(res - 1, j + 1), ring(res - 1, j)]);
    }
    (v, t)
}
