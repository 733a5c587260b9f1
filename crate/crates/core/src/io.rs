//! Reading and writing clouds as whitespace-separated `xyz` text or ASCII PLY.
//!
//! `xyz`: one point per line, `x y z` followed by optional feature columns.
//! Blank lines and lines starting with `#` are skipped. Every data line must
//! have the same number of columns.
//!
//! PLY: only `format ascii 1.0` is accepted. The `vertex` element must carry
//! scalar `x`, `y`, `z` properties; any further scalar vertex properties
//! become feature columns in declaration order. Other elements are skipped.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CloudFormat {
    Xyz,
    PlyAscii,
}

impl CloudFormat {
    /// Guesses the format from a file extension (`.ply` or anything else).
    pub fn from_path(path: &Path) -> CloudFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ply") => CloudFormat::PlyAscii,
            _ => CloudFormat::Xyz,
        }
    }
}

impl std::str::FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xyz" => Ok(CloudFormat::Xyz),
            "ply" | "ply-ascii" => Ok(CloudFormat::PlyAscii),
            other => Err(Error::invalid(format!("unknown cloud format `{other}`"))),
        }
    }
}

pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let label = path.display().to_string();
    match format {
        CloudFormat::Xyz => parse_xyz(&text, &label),
        CloudFormat::PlyAscii => parse_ply(&text, &label),
    }
}

pub fn save_cloud(cloud: &PointCloud, path: impl AsRef<Path>, format: CloudFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        CloudFormat::Xyz => to_xyz(cloud),
        CloudFormat::PlyAscii => to_ply(cloud),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(label: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: label.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_numbers(line: &str, label: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(label, lineno, format!("not a number: `{tok}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(
                    label,
                    lineno,
                    format!("non-finite value `{tok}`"),
                ))
            }
        })
        .collect()
}

fn assemble(
    positions: Vec<[f64; 3]>,
    features: Vec<f64>,
    width: usize,
    label: &str,
) -> Result<PointCloud> {
    if positions.is_empty() {
        return Err(Error::EmptyInput(format!("{label} contains no points")));
    }
    let features = if width > 0 {
        Some(Matrix::from_vec(positions.len(), width, features)?)
    } else {
        None
    };
    PointCloud::with_features(positions, features)
}

pub fn parse_xyz(text: &str, label: &str) -> Result<PointCloud> {
    let mut positions = Vec::new();
    let mut features = Vec::new();
    let mut columns: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values = parse_numbers(line, label, lineno)?;
        if values.len() < 3 {
            return Err(parse_err(
                label,
                lineno,
                format!("expected at least 3 columns, found {}", values.len()),
            ));
        }
        match columns {
            None => columns = Some(values.len()),
            Some(c) if c != values.len() => {
                return Err(parse_err(
                    label,
                    lineno,
                    format!("expected {c} columns, found {}", values.len()),
                ))
            }
            Some(_) => {}
        }
        positions.push([values[0], values[1], values[2]]);
        features.extend_from_slice(&values[3..]);
    }

    let width = columns.map_or(0, |c| c - 3);
    assemble(positions, features, width, label)
}

struct PlyElement {
    name: String,
    count: usize,
    /// Scalar property names in declaration order.
    properties: Vec<String>,
    has_list: bool,
}

pub fn parse_ply(text: &str, label: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        Some((n, _)) => return Err(parse_err(label, n, "missing `ply` magic")),
        None => return Err(Error::EmptyInput(format!("{label} is empty"))),
    }

    let mut elements: Vec<PlyElement> = Vec::new();
    let mut saw_format = false;
    let mut header_done = false;
    for (lineno, line) in lines.by_ref() {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("format") => {
                if toks.next() != Some("ascii") {
                    return Err(parse_err(label, lineno, "only ascii PLY is supported"));
                }
                saw_format = true;
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = toks
                    .next()
                    .ok_or_else(|| parse_err(label, lineno, "element without name"))?;
                let count = toks
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| parse_err(label, lineno, "element without valid count"))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            Some("property") => {
                let elem = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(label, lineno, "property before any element"))?;
                let kind = toks.next();
                if kind == Some("list") {
                    elem.has_list = true;
                } else {
                    let name = toks
                        .next()
                        .ok_or_else(|| parse_err(label, lineno, "property without name"))?;
                    elem.properties.push(name.to_string());
                }
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            Some(other) => {
                return Err(parse_err(
                    label,
                    lineno,
                    format!("unknown header keyword `{other}`"),
                ))
            }
        }
    }
    if !header_done {
        return Err(parse_err(label, 0, "header not terminated by end_header"));
    }
    if !saw_format {
        return Err(parse_err(label, 0, "header has no format line"));
    }

    let vertex = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| parse_err(label, 0, "no vertex element"))?;
    let vert = &elements[vertex];
    if vert.has_list {
        return Err(parse_err(
            label,
            0,
            "list properties on vertex are not supported",
        ));
    }
    let find = |axis: &str| {
        vert.properties
            .iter()
            .position(|p| p == axis)
            .ok_or_else(|| parse_err(label, 0, format!("vertex element lacks `{axis}`")))
    };
    let (ix, iy, iz) = (find("x")?, find("y")?, find("z")?);
    let feature_cols: Vec<usize> = (0..vert.properties.len())
        .filter(|&c| c != ix && c != iy && c != iz)
        .collect();

    let mut data_lines = lines.filter(|(_, l)| !l.is_empty());
    let mut positions = Vec::with_capacity(vert.count);
    let mut features = Vec::with_capacity(vert.count * feature_cols.len());
    for (e, elem) in elements.iter().enumerate() {
        for _ in 0..elem.count {
            let (lineno, line) = data_lines.next().ok_or_else(|| {
                parse_err(
                    label,
                    0,
                    format!("file ended inside element `{}`", elem.name),
                )
            })?;
            if e != vertex {
                continue;
            }
            let values = parse_numbers(line, label, lineno)?;
            if values.len() != elem.properties.len() {
                return Err(parse_err(
                    label,
                    lineno,
                    format!(
                        "expected {} vertex values, found {}",
                        elem.properties.len(),
                        values.len()
                    ),
                ));
            }
            positions.push([values[ix], values[iy], values[iz]]);
            features.extend(feature_cols.iter().map(|&c| values[c]));
        }
    }
    if let Some((lineno, _)) = data_lines.next() {
        return Err(parse_err(label, lineno, "trailing data after last element"));
    }

    assemble(positions, features, feature_cols.len(), label)
}

pub fn to_xyz(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for i in 0..cloud.len() {
        let p = cloud.position(i);
        write!(out, "{} {} {}", p[0], p[1], p[2]).unwrap();
        if let Some(f) = cloud.features() {
            for v in f.row(i) {
                write!(out, " {v}").unwrap();
            }
        }
        out.push('\n');
    }
    out
}

pub fn to_ply(cloud: &PointCloud) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    writeln!(out, "element vertex {}", cloud.len()).unwrap();
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    for c in 0..cloud.feature_width() {
        writeln!(out, "property double f{c}").unwrap();
    }
    out.push_str("end_header\n");
    out.push_str(&to_xyz(cloud));
    out
}
