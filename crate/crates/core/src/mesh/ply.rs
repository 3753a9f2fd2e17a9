//! ASCII PLY, triangles only.
//!
//! The header must declare `format ascii 1.0`, an `element vertex N` with
//! scalar properties including `x`, `y`, `z`, and an `element face F` whose
//! list property is named `vertex_indices` or `vertex_index`. Other scalar
//! vertex properties and other elements are read and discarded.

use std::io::{BufRead, Write};

use super::off::{parse_real, parse_usize};
use super::TriMesh;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug)]
enum Property {
    Scalar(String),
    List(String),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

pub fn read_ply<T: Scalar, R: BufRead>(reader: R) -> Result<TriMesh<T>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| {
        l.map(|l| (i + 1, l))
            .map_err(|e| Error::parse(i + 1, e.to_string()))
    });
    let mut next_line = || -> Result<Option<(usize, String)>> { lines.next().transpose() };

    match next_line()? {
        Some((_, l)) if l.trim() == "ply" => {}
        Some((n, _)) => return Err(Error::parse(n, "expected 'ply' magic")),
        None => return Err(Error::parse(1, "empty file")),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;
    loop {
        let (n, line) = next_line()?.ok_or_else(|| Error::parse(0, "missing end_header"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => saw_format = true,
            ["format", other, ..] => {
                return Err(Error::parse(n, format!("unsupported PLY format '{other}', only ascii")))
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: parse_usize(count, n)?,
                properties: Vec::new(),
            }),
            ["property", "list", _, _, name] => elements
                .last_mut()
                .ok_or_else(|| Error::parse(n, "property before any element"))?
                .properties
                .push(Property::List(name.to_string())),
            ["property", _, name] => elements
                .last_mut()
                .ok_or_else(|| Error::parse(n, "property before any element"))?
                .properties
                .push(Property::Scalar(name.to_string())),
            ["end_header"] => break,
            _ => return Err(Error::parse(n, format!("unrecognised header line '{line}'"))),
        }
    }
    if !saw_format {
        return Err(Error::parse(0, "missing 'format ascii 1.0' line"));
    }

    let mut vertices: Option<Vec<[T; 3]>> = None;
    let mut triangles: Option<Vec<[usize; 3]>> = None;

    for element in &elements {
        match element.name.as_str() {
            "vertex" => {
                let slot = |axis: &str| {
                    element.properties.iter().position(
                        |p| matches!(p, Property::Scalar(name) if name == axis),
                    )
                };
                let (Some(ix), Some(iy), Some(iz)) = (slot("x"), slot("y"), slot("z")) else {
                    return Err(Error::parse(0, "vertex element lacks x/y/z properties"));
                };
                if element.properties.iter().any(|p| matches!(p, Property::List(_))) {
                    return Err(Error::parse(0, "list properties on vertices are not supported"));
                }
                let mut out = Vec::with_capacity(element.count);
                for _ in 0..element.count {
                    let (n, line) = next_line()?
                        .ok_or_else(|| Error::parse(0, "file ended inside vertex data"))?;
                    let toks: Vec<&str> = line.split_whitespace().collect();
                    if toks.len() != element.properties.len() {
                        return Err(Error::parse(
                            n,
                            format!(
                                "vertex row has {} values, header declares {}",
                                toks.len(),
                                element.properties.len()
                            ),
                        ));
                    }
                    out.push([
                        parse_real(toks[ix], n)?,
                        parse_real(toks[iy], n)?,
                        parse_real(toks[iz], n)?,
                    ]);
                }
                vertices = Some(out);
            }
            "face" => {
                let nv = vertices
                    .as_ref()
                    .map(Vec::len)
                    .ok_or_else(|| Error::parse(0, "face element must follow vertex element"))?;
                let is_index_list = |p: &Property| {
                    matches!(p, Property::List(name) if name == "vertex_indices" || name == "vertex_index")
                };
                if element.properties.len() != 1 || !is_index_list(&element.properties[0]) {
                    return Err(Error::parse(
                        0,
                        "face element must have exactly one list property 'vertex_indices'",
                    ));
                }
                let mut out = Vec::with_capacity(element.count);
                for _ in 0..element.count {
                    let (n, line) = next_line()?
                        .ok_or_else(|| Error::parse(0, "file ended inside face data"))?;
                    let toks: Vec<&str> = line.split_whitespace().collect();
                    let arity = parse_usize(toks.first().copied().unwrap_or(""), n)?;
                    if arity != 3 || toks.len() != 4 {
                        return Err(Error::parse(n, "only triangular faces are supported"));
                    }
                    let mut tri = [0usize; 3];
                    for k in 0..3 {
                        tri[k] = parse_usize(toks[k + 1], n)?;
                        if tri[k] >= nv {
                            return Err(Error::parse(
                                n,
                                format!("face index {} out of range for {nv} vertices", tri[k]),
                            ));
                        }
                    }
                    out.push(tri);
                }
                triangles = Some(out);
            }
            _ => {
                for _ in 0..element.count {
                    next_line()?.ok_or_else(|| Error::parse(0, "file ended inside element data"))?;
                }
            }
        }
    }
    match (vertices, triangles) {
        (Some(v), Some(t)) => TriMesh::new(v, t),
        _ => Err(Error::parse(0, "PLY file needs both vertex and face elements")),
    }
}

pub fn write_ply<T: Scalar, W: Write>(mesh: &TriMesh<T>, w: &mut W) -> std::io::Result<()> {
    let ty = if std::mem::size_of::<T>() == 4 { "float" } else { "double" };
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", mesh.n_vertices())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property {ty} {axis}")?;
    }
    writeln!(w, "element face {}", mesh.n_triangles())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
    }
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}
