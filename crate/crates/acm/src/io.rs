//! File formats: correspondence and point CSVs, ASCII PLY, bound traces.
//!
//! All CSV files are UTF-8 with a mandatory header row:
//!
//! | data                     | columns                 |
//! |--------------------------|-------------------------|
//! | 3D-2D correspondences    | `px,py,pz,ux,uy`        |
//! | 2D-2D correspondences    | `u1,v1,u2,v2`           |
//! | planar ground truth      | `theta,phi`             |
//! | 3D-3D correspondences    | `px,py,pz,qx,qy,qz`     |
//! | point sets               | `x,y,z`                 |
//! | bound trace              | `iteration,best_lower,popped_upper,queue_len` |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use acm_core::engine::TracePoint;
use acm_core::geom::Vec3;
use acm_core::planar::Corr2D2D;
use acm_core::registration::Corr3D3D;
use acm_core::resection::Corr3D2D;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Ply { path: PathBuf, line: usize, msg: String },
    #[error("{}: unsupported point file extension (expected .ply or .csv)", path.display())]
    Extension { path: PathBuf },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct ResectionRow {
    px: f64,
    py: f64,
    pz: f64,
    ux: f64,
    uy: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct PlanarRow {
    u1: f64,
    v1: f64,
    u2: f64,
    v2: f64,
}

/// Ground-truth planar motion for error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarTruth {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct CorrRow {
    px: f64,
    py: f64,
    pz: f64,
    qx: f64,
    qy: f64,
    qz: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
    z: f64,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv { path: path.to_path_buf(), source }
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err(path))?;
    rdr.deserialize().collect::<Result<Vec<T>, _>>().map_err(csv_err(path))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err(path))?;
    // written by hand so empty files still carry the header
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

pub fn read_resection_csv(path: &Path) -> Result<Vec<Corr3D2D>, IoError> {
    Ok(read_rows::<ResectionRow>(path)?.into_iter().map(|r| Corr3D2D { p: [r.px, r.py, r.pz], u: [r.ux, r.uy] }).collect())
}

pub fn write_resection_csv(path: &Path, corrs: &[Corr3D2D]) -> Result<(), IoError> {
    let rows = corrs.iter().map(|c| ResectionRow { px: c.p[0], py: c.p[1], pz: c.p[2], ux: c.u[0], uy: c.u[1] });
    write_rows(path, rows, &["px", "py", "pz", "ux", "uy"])
}

pub fn read_planar_csv(path: &Path) -> Result<Vec<Corr2D2D>, IoError> {
    Ok(read_rows::<PlanarRow>(path)?.into_iter().map(|r| Corr2D2D { x1: [r.u1, r.v1], x2: [r.u2, r.v2] }).collect())
}

pub fn write_planar_csv(path: &Path, corrs: &[Corr2D2D]) -> Result<(), IoError> {
    let rows = corrs.iter().map(|c| PlanarRow { u1: c.x1[0], v1: c.x1[1], u2: c.x2[0], v2: c.x2[1] });
    write_rows(path, rows, &["u1", "v1", "u2", "v2"])
}

/// Reads the first row of a `theta,phi` sidecar.
pub fn read_planar_truth(path: &Path) -> Result<Option<PlanarTruth>, IoError> {
    Ok(read_rows::<PlanarTruth>(path)?.into_iter().next())
}

pub fn write_planar_truth(path: &Path, truth: &PlanarTruth) -> Result<(), IoError> {
    write_rows(path, [truth], &["theta", "phi"])
}

pub fn read_corr_csv(path: &Path) -> Result<Vec<Corr3D3D>, IoError> {
    Ok(read_rows::<CorrRow>(path)?
        .into_iter()
        .map(|r| Corr3D3D { p: [r.px, r.py, r.pz], q: [r.qx, r.qy, r.qz] })
        .collect())
}

pub fn write_corr_csv(path: &Path, corrs: &[Corr3D3D]) -> Result<(), IoError> {
    let rows =
        corrs.iter().map(|c| CorrRow { px: c.p[0], py: c.p[1], pz: c.p[2], qx: c.q[0], qy: c.q[1], qz: c.q[2] });
    write_rows(path, rows, &["px", "py", "pz", "qx", "qy", "qz"])
}

pub fn read_points_csv(path: &Path) -> Result<Vec<Vec3>, IoError> {
    Ok(read_rows::<PointRow>(path)?.into_iter().map(|r| [r.x, r.y, r.z]).collect())
}

pub fn write_points_csv(path: &Path, points: &[Vec3]) -> Result<(), IoError> {
    write_rows(path, points.iter().map(|p| PointRow { x: p[0], y: p[1], z: p[2] }), &["x", "y", "z"])
}

pub fn write_trace_csv(path: &Path, trace: &[TracePoint]) -> Result<(), IoError> {
    #[derive(Serialize)]
    struct Row {
        iteration: u64,
        best_lower: usize,
        popped_upper: usize,
        queue_len: usize,
    }
    let rows = trace.iter().map(|t| Row {
        iteration: t.iteration,
        best_lower: t.best_lower,
        popped_upper: t.popped_upper,
        queue_len: t.queue_len,
    });
    write_rows(path, rows, &["iteration", "best_lower", "popped_upper", "queue_len"])
}

/// Dispatch on extension: `.ply` or `.csv`.
pub fn load_points(path: &Path) -> Result<Vec<Vec3>, IoError> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("ply") => load_ply(path),
        Some("csv") => read_points_csv(path),
        _ => Err(IoError::Extension { path: path.to_path_buf() }),
    }
}

pub fn load_ply(path: &Path) -> Result<Vec<Vec3>, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })?;
    parse_ply(&text).map_err(|e| IoError::Ply { path: path.to_path_buf(), line: e.line, msg: e.msg })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct PlyError {
    pub line: usize,
    pub msg: String,
}

struct Element {
    name: String,
    count: usize,
    // scalar property names; list properties are recorded as None
    props: Vec<Option<String>>,
}

/// Parse an ASCII PLY document, returning the `x`, `y`, `z` vertex columns.
///
/// Other elements (faces, edges, ...) are skipped. Line numbers in errors
/// are 1-based.
pub fn parse_ply(text: &str) -> Result<Vec<Vec3>, PlyError> {
    let err = |line: usize, msg: String| PlyError { line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        Some((n, _)) => return Err(err(n, "missing 'ply' magic".into())),
        None => return Err(err(1, "empty file".into())),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut last_line = 1;
    loop {
        let Some((n, line)) = lines.next() else {
            return Err(err(last_line + 1, "header not terminated by 'end_header'".into()));
        };
        last_line = n;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => match (tok.next(), tok.next()) {
                (Some("ascii"), Some("1.0")) => {}
                (Some(f), _) => return Err(err(n, format!("unsupported format '{f}', only ascii 1.0 is read"))),
                _ => return Err(err(n, "malformed format line".into())),
            },
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = tok.next().ok_or_else(|| err(n, "element without name".into()))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| err(n, format!("element '{name}' has no valid count")))?;
                elements.push(Element { name: name.to_string(), count, props: Vec::new() });
            }
            Some("property") => {
                let el = elements.last_mut().ok_or_else(|| err(n, "property before any element".into()))?;
                let prop = match tok.next() {
                    Some("list") => None,
                    Some(_) => Some(tok.next().ok_or_else(|| err(n, "property without name".into()))?.to_string()),
                    None => return Err(err(n, "empty property line".into())),
                };
                el.props.push(prop);
            }
            Some("end_header") => break,
            Some(other) => return Err(err(n, format!("unexpected header keyword '{other}'"))),
        }
    }

    let mut points = Vec::new();
    for el in &elements {
        let is_vertex = el.name == "vertex";
        let col = |axis: &str| el.props.iter().position(|p| p.as_deref() == Some(axis));
        let cols = if is_vertex {
            match (col("x"), col("y"), col("z")) {
                (Some(x), Some(y), Some(z)) => Some([x, y, z]),
                _ => return Err(err(last_line, "vertex element lacks x, y or z".into())),
            }
        } else {
            None
        };
        for _ in 0..el.count {
            let Some((n, line)) = lines.next() else {
                return Err(err(last_line + 1, format!("unexpected end of file in element '{}'", el.name)));
            };
            last_line = n;
            if let Some(cols) = cols {
                let vals: Vec<&str> = line.split_whitespace().collect();
                let mut p = [0.0; 3];
                for (slot, &c) in p.iter_mut().zip(&cols) {
                    let v = vals.get(c).ok_or_else(|| err(n, format!("expected at least {} values", c + 1)))?;
                    *slot = v.parse().map_err(|_| err(n, format!("invalid number '{v}'")))?;
                }
                points.push(p);
            }
        }
    }
    Ok(points)
}

/// One centroid per occupied cubic voxel of side `voxel`, in voxel order.
/// A non-positive `voxel` returns the input unchanged.
pub fn downsample(points: &[Vec3], voxel: f64) -> Vec<Vec3> {
    if voxel.is_nan() || voxel <= 0.0 {
        return points.to_vec();
    }
    let mut cells: BTreeMap<[i64; 3], ([f64; 3], usize)> = BTreeMap::new();
    for p in points {
        let key = p.map(|c| (c / voxel).floor() as i64);
        let e = cells.entry(key).or_insert(([0.0; 3], 0));
        for (acc, v) in e.0.iter_mut().zip(p) {
            *acc += v;
        }
        e.1 += 1;
    }
    cells.into_values().map(|(s, n)| s.map(|v| v / n as f64)).collect()
}
