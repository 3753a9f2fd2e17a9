//! Object File Format (OFF), triangles only.
//!
//! Grammar accepted:
//!
//! ```text
//! OFF                      # header keyword; counts may follow on this line
//! V F E                    # vertex, face and (ignored) edge counts
//! x y z                    # V vertex rows
//! 3 i j k                  # F face rows, 0-based indices
//! ```
//!
//! `#` starts a comment, blank lines are skipped, and trailing columns on
//! vertex/face rows (e.g. colours) are ignored.

use std::io::{BufRead, Write};

use super::{tokens, TriMesh};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn read_off<T: Scalar, R: BufRead>(reader: R) -> Result<TriMesh<T>> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        let toks: Vec<String> = tokens(&line).into_iter().map(str::to_owned).collect();
        if !toks.is_empty() {
            rows.push((idx + 1, toks));
        }
    }
    let mut rows = rows.into_iter();

    let (line, header) = rows
        .next()
        .ok_or_else(|| Error::parse(1, "empty file, expected OFF header"))?;
    if header[0] != "OFF" {
        return Err(Error::parse(line, format!("expected 'OFF', found '{}'", header[0])));
    }
    let (line, counts) = if header.len() > 1 {
        (line, header[1..].to_vec())
    } else {
        rows.next()
            .ok_or_else(|| Error::parse(line + 1, "missing counts line"))?
    };
    if counts.len() < 2 {
        return Err(Error::parse(line, "counts line needs 'V F [E]'"));
    }
    let nv = parse_usize(&counts[0], line)?;
    let nf = parse_usize(&counts[1], line)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, row) = rows
            .next()
            .ok_or_else(|| Error::parse(0, format!("expected {nv} vertex rows, file ended early")))?;
        if row.len() < 3 {
            return Err(Error::parse(line, "vertex row needs 3 coordinates"));
        }
        let mut p = [T::zero(); 3];
        for (k, tok) in row.iter().take(3).enumerate() {
            p[k] = parse_real(tok, line)?;
        }
        vertices.push(p);
    }

    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, row) = rows
            .next()
            .ok_or_else(|| Error::parse(0, format!("expected {nf} face rows, file ended early")))?;
        let arity = parse_usize(&row[0], line)?;
        if arity != 3 {
            return Err(Error::parse(
                line,
                format!("only triangular faces are supported, found a {arity}-gon"),
            ));
        }
        if row.len() < 4 {
            return Err(Error::parse(line, "face row needs 3 indices"));
        }
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = parse_usize(&row[k + 1], line)?;
            if tri[k] >= nv {
                return Err(Error::parse(
                    line,
                    format!("face index {} out of range for {nv} vertices", tri[k]),
                ));
            }
        }
        triangles.push(tri);
    }
    if let Some((line, _)) = rows.next() {
        return Err(Error::parse(line, "unexpected data after the last face"));
    }
    TriMesh::new(vertices, triangles)
}

pub fn write_off<T: Scalar, W: Write>(mesh: &TriMesh<T>, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} {}", mesh.n_vertices(), mesh.n_triangles(), mesh.edges().len())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
    }
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

pub(crate) fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("expected a non-negative integer, found '{tok}'")))
}

pub(crate) fn parse_real<T: Scalar>(tok: &str, line: usize) -> Result<T> {
    let x: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, found '{tok}'")))?;
    if !x.is_finite() {
        return Err(Error::parse(line, format!("non-finite coordinate '{tok}'")));
    }
    Ok(T::of(x))
}
