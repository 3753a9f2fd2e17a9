//! Observation matrices with class labels, plus their file formats.
//!
//! CSV: one observation per row, no header, first field the class label,
//! then one value per vertex.
//!
//! Binary: a little-endian matrix file
//!
//! ```text
//! offset  size  field
//! 0       8     magic "SURFMAT1"
//! 8       4     element size in bytes (u32: 8 = f64, 4 = f32)
//! 12      4     reserved, 0
//! 16      8     rows (u64)
//! 24      8     cols (u64)
//! 32      ...   rows*cols elements, row-major
//! ```
//!
//! with a JSON sidecar at `<path>.json` holding `rows`, `cols`, `labels`
//! and `provenance`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MATRIX_MAGIC: &[u8; 8] = b"SURFMAT1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AugmentMethod {
    #[serde(rename = "lb-eigda")]
    LbEigDa,
    #[serde(rename = "c-pda")]
    CPda,
}

impl std::fmt::Display for AugmentMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AugmentMethod::LbEigDa => "lb-eigda",
            AugmentMethod::CPda => "c-pda",
        })
    }
}

impl std::str::FromStr for AugmentMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lb-eigda" => Ok(AugmentMethod::LbEigDa),
            "c-pda" => Ok(AugmentMethod::CPda),
            _ => Err(Error::InvalidArgument(format!(
                "unknown method '{s}', expected lb-eigda or c-pda"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Real,
    Augmented { method: AugmentMethod, seed: u64 },
}

/// `n × V` signals (row `i` is observation `f_i`) with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet<T> {
    data: Array2<T>,
    labels: Vec<String>,
    provenance: Provenance,
}

impl<T: Scalar> SignalSet<T> {
    pub fn new(data: Array2<T>, labels: Vec<String>) -> Result<Self> {
        Self::with_provenance(data, labels, Provenance::Real)
    }

    pub fn with_provenance(data: Array2<T>, labels: Vec<String>, provenance: Provenance) -> Result<Self> {
        let (n, v) = data.dim();
        if n == 0 || v == 0 {
            return Err(Error::InvalidArgument(format!("signal set must be non-empty, got {n}×{v}")));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                what: "labels vs observations",
                expected: n,
                actual: labels.len(),
            });
        }
        if let Some(((i, j), _)) = data.indexed_iter().find(|(_, x)| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at observation {i}, vertex {j}"
            )));
        }
        Ok(SignalSet {
            data,
            labels,
            provenance,
        })
    }

    /// All observations share one label.
    pub fn single_class(data: Array2<T>, label: &str) -> Result<Self> {
        let n = data.nrows();
        Self::new(data, vec![label.to_string(); n])
    }

    pub fn n_observations(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_vertices(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<T> {
        &self.data
    }

    pub fn into_data(self) -> Array2<T> {
        self.data
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Distinct labels in order of first appearance.
    pub fn classes(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for l in &self.labels {
            if !seen.contains(l) {
                seen.push(l.clone());
            }
        }
        seen
    }

    /// The single class label, or [`Error::MixedLabels`].
    pub fn sole_class(&self) -> Result<&str> {
        let classes = self.classes();
        if classes.len() == 1 {
            Ok(&self.labels[0])
        } else {
            Err(Error::MixedLabels(classes))
        }
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        SignalSet {
            data: self.data.select(Axis(0), rows),
            labels: rows.iter().map(|&i| self.labels[i].clone()).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// One sub-set per class, in order of first appearance.
    pub fn split_by_class(&self) -> Vec<(String, Self)> {
        self.classes()
            .into_iter()
            .map(|c| {
                let rows: Vec<usize> = (0..self.n_observations())
                    .filter(|&i| self.labels[i] == c)
                    .collect();
                let subset = self.select(&rows);
                (c, subset)
            })
            .collect()
    }

    /// Stack sets with equal vertex counts; provenance is taken from the first.
    pub fn concat(sets: &[Self]) -> Result<Self> {
        let first = sets
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
        for s in sets {
            if s.n_vertices() != first.n_vertices() {
                return Err(Error::DimensionMismatch {
                    what: "vertex count in concatenation",
                    expected: first.n_vertices(),
                    actual: s.n_vertices(),
                });
            }
        }
        let views: Vec<_> = sets.iter().map(|s| s.data.view()).collect();
        let data = ndarray::concatenate(Axis(0), &views).expect("shapes checked");
        let labels = sets.iter().flat_map(|s| s.labels.iter().cloned()).collect();
        Ok(SignalSet {
            data,
            labels,
            provenance: first.provenance.clone(),
        })
    }

    /// Per-vertex mean over observations.
    pub fn vertex_means(&self) -> Array1<T> {
        self.data.mean_axis(Axis(0)).expect("n >= 1")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(BufWriter::new(file));
        let csv_err = |e: csv::Error| Error::Format {
            format: "CSV",
            message: e.to_string(),
        };
        for (label, row) in self.labels.iter().zip(self.data.rows()) {
            let mut rec = Vec::with_capacity(row.len() + 1);
            rec.push(label.clone());
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(BufReader::new(file));
        let mut labels = Vec::new();
        let mut values: Vec<T> = Vec::new();
        let mut width = None;
        for (idx, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(idx + 1, e.to_string()))?;
            if rec.len() < 2 {
                return Err(Error::parse(idx + 1, "row needs a label and at least one value"));
            }
            let w = rec.len() - 1;
            if *width.get_or_insert(w) != w {
                return Err(Error::parse(
                    idx + 1,
                    format!("row has {w} values, previous rows have {}", width.unwrap_or(0)),
                ));
            }
            labels.push(rec[0].to_string());
            for tok in rec.iter().skip(1) {
                let x: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(idx + 1, format!("'{tok}' is not a number")))?;
                values.push(T::of(x));
            }
        }
        let cols = width.ok_or_else(|| Error::parse(1, "empty signal file"))?;
        let data = Array2::from_shape_vec((labels.len(), cols), values).expect("rows have equal width");
        Self::new(data, labels)
    }

    /// Write the matrix to `path` and labels/provenance to `<path>.json`.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        write_matrix(&mut w, &self.data).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
        let sidecar = Sidecar {
            rows: self.n_observations(),
            cols: self.n_vertices(),
            labels: self.labels.clone(),
            provenance: self.provenance.clone(),
        };
        let side = sidecar_path(path);
        let f = File::create(&side).map_err(|e| Error::io(&side, e))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &sidecar)?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let data: Array2<T> = read_matrix(&mut BufReader::new(file))?;
        let side = sidecar_path(path);
        let f = File::open(&side).map_err(|e| Error::io(&side, e))?;
        let sidecar: Sidecar = serde_json::from_reader(BufReader::new(f))?;
        if (sidecar.rows, sidecar.cols) != data.dim() {
            return Err(Error::Format {
                format: "signal sidecar",
                message: format!(
                    "sidecar says {}×{}, matrix is {}×{}",
                    sidecar.rows,
                    sidecar.cols,
                    data.nrows(),
                    data.ncols()
                ),
            });
        }
        Self::with_provenance(data, sidecar.labels, sidecar.provenance)
    }

    /// Dispatch on extension: `.csv` or anything else as binary.
    pub fn read(path: &Path) -> Result<Self> {
        if is_csv(path) {
            Self::read_csv(path)
        } else {
            Self::read_binary(path)
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if is_csv(path) {
            self.write_csv(path)
        } else {
            self.write_binary(path)
        }
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    rows: usize,
    cols: usize,
    labels: Vec<String>,
    provenance: Provenance,
}

/// Write `matrix` in the `SURFMAT1` layout at the element width of `T`.
pub fn write_matrix<T: Scalar, W: Write>(w: &mut W, matrix: &Array2<T>) -> std::io::Result<()> {
    let size = std::mem::size_of::<T>() as u32;
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&size.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    w.write_all(&(matrix.nrows() as u64).to_le_bytes())?;
    w.write_all(&(matrix.ncols() as u64).to_le_bytes())?;
    for x in matrix.iter() {
        write_scalar(w, *x)?;
    }
    Ok(())
}

pub fn read_matrix<T: Scalar, R: Read>(r: &mut R) -> Result<Array2<T>> {
    let mut magic = [0u8; 8];
    read_exact(r, &mut magic)?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::Format {
            format: "SURFMAT1",
            message: "bad magic".into(),
        });
    }
    let size = read_u32(r)?;
    let _reserved = read_u32(r)?;
    let rows = read_u64(r)? as usize;
    let cols = read_u64(r)? as usize;
    let mut values = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 28));
    for _ in 0..rows * cols {
        values.push(read_scalar(r, size)?);
    }
    Ok(Array2::from_shape_vec((rows, cols), values).expect("length matches shape"))
}

pub(crate) fn write_scalar<T: Scalar, W: Write>(w: &mut W, x: T) -> std::io::Result<()> {
    if std::mem::size_of::<T>() == 4 {
        w.write_all(&(x.as_f64() as f32).to_le_bytes())
    } else {
        w.write_all(&x.as_f64().to_le_bytes())
    }
}

pub(crate) fn read_scalar<T: Scalar, R: Read>(r: &mut R, size: u32) -> Result<T> {
    match size {
        8 => {
            let mut b = [0u8; 8];
            read_exact(r, &mut b)?;
            Ok(T::of(f64::from_le_bytes(b)))
        }
        4 => {
            let mut b = [0u8; 4];
            read_exact(r, &mut b)?;
            Ok(T::of(f32::from_le_bytes(b) as f64))
        }
        other => Err(Error::Format {
            format: "SURFMAT1",
            message: format!("unsupported element size {other}"),
        }),
    }
}

pub(crate) fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| Error::Format {
        format: "binary matrix",
        message: format!("truncated: {e}"),
    })
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
