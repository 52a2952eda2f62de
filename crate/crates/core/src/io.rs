//! Text documents for realizations, matrices, certificates and reports.
//!
//! Complex entries are written as two-element `[re, im]` arrays; bare real
//! numbers are accepted on input. Floats use the shortest representation
//! that parses back to the identical bit pattern.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::families::{Domain, DomainGrid, MembershipReport};
use crate::linalg::{c, CMat, Complex64};
use crate::qmi::{Certificate, CertificateStatus, FamilyTag};
use crate::realization::Realization;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Pair([re, im]) => c(re, im),
            Entry::Real(re) => c(re, 0.0),
        }
    }
}

/// Row-major nested arrays; the column count of an empty row list is 0.
pub type Rows = Vec<Vec<Complex64>>;

pub fn matrix_to_rows(m: &CMat) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Builds a matrix from rows, requiring `cols` columns when given.
pub fn rows_to_matrix(rows: &Rows, cols: Option<usize>, field: &str) -> Result<CMat> {
    let k = cols.unwrap_or_else(|| rows.first().map_or(0, |r| r.len()));
    if let Some(i) = rows.iter().position(|r| r.len() != k) {
        return Err(Error::Shape(format!("{field}: row {i} has {} entries, expected {k}", rows[i].len())));
    }
    let m = CMat::from_fn(rows.len(), k, |i, j| rows[i][j]);
    if !crate::linalg::is_finite(&m) {
        return Err(Error::Shape(format!("{field}: non-finite entry")));
    }
    Ok(m)
}

/// Serde adapter for [`CMat`] fields.
pub mod cmat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows: Vec<Vec<Entry>> = Vec::deserialize(d)?;
        let rows: Rows = rows.into_iter().map(|r| r.into_iter().map(Into::into).collect()).collect();
        rows_to_matrix(&rows, None, "matrix").map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing non-finite floats as the strings `inf`, `-inf`, `nan`.
pub mod ext_f64 {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float '{other}'"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationDocument {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A", with = "cmat")]
    pub a: CMat,
    #[serde(rename = "B", with = "cmat")]
    pub b: CMat,
    #[serde(rename = "C", with = "cmat")]
    pub c: CMat,
    #[serde(rename = "D", with = "cmat")]
    pub d: CMat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

/// Re-reads a block with the declared column count so empty rows keep their width.
fn fix_cols(m: &CMat, rows: usize, cols: usize, field: &str) -> Result<CMat> {
    // Zero-width blocks may be written as `[]` or as rows of `[]`.
    if cols == 0 && m.ncols() == 0 && (m.nrows() == 0 || m.nrows() == rows) {
        return Ok(CMat::zeros(rows, 0));
    }
    if m.nrows() != rows {
        return Err(Error::Shape(format!("{field} has {} rows, expected {rows}", m.nrows())));
    }
    if rows == 0 {
        return Ok(CMat::zeros(0, cols));
    }
    if m.ncols() != cols {
        return Err(Error::Shape(format!("{field} has {} columns, expected {cols}", m.ncols())));
    }
    Ok(m.clone())
}

impl RealizationDocument {
    pub fn from_realization(r: &Realization, metadata: Option<Metadata>) -> Self {
        Self {
            n: r.n(),
            m: r.m(),
            a: r.a().clone(),
            b: r.b().clone(),
            c: r.c().clone(),
            d: r.d().clone(),
            metadata,
        }
    }

    pub fn to_realization(&self) -> Result<Realization> {
        let (n, m) = (self.n, self.m);
        if m == 0 {
            return Err(Error::Shape("m must be positive".into()));
        }
        Realization::new(
            fix_cols(&self.a, n, n, "A")?,
            fix_cols(&self.b, n, m, "B")?,
            fix_cols(&self.c, m, n, "C")?,
            fix_cols(&self.d, m, m, "D")?,
        )
        .map_err(|e| match e {
            Error::DimensionMismatch(s) => Error::Shape(s),
            other => other,
        })
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
}

pub fn parse_realization_document(text: &str) -> Result<RealizationDocument> {
    serde_json::from_str(text).map_err(|e| {
        // Shape problems surface from the cmat adapter as data errors.
        if e.is_data() && e.to_string().starts_with("shape error") {
            Error::Shape(e.to_string())
        } else {
            parse_error(e)
        }
    })
}

pub fn realization_from_str(text: &str) -> Result<Realization> {
    parse_realization_document(text)?.to_realization()
}

pub fn realization_to_string(r: &Realization, metadata: Option<Metadata>) -> String {
    let doc = RealizationDocument::from_realization(r, metadata);
    let mut s = serde_json::to_string_pretty(&doc).expect("realization documents serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: impl AsRef<Path>) -> Result<Realization> {
    realization_from_str(&read(path.as_ref())?)
}

pub fn load_document(path: impl AsRef<Path>) -> Result<RealizationDocument> {
    parse_realization_document(&read(path.as_ref())?)
}

pub fn save(path: impl AsRef<Path>, r: &Realization, metadata: Option<Metadata>) -> Result<()> {
    write(path.as_ref(), &realization_to_string(r, metadata))
}

/// A bare matrix document: either nested rows or `{"matrix": rows}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDocument {
    Bare(#[serde(with = "cmat")] CMat),
    Wrapped {
        #[serde(with = "cmat")]
        matrix: CMat,
    },
}

pub fn matrix_from_str(text: &str) -> Result<CMat> {
    match serde_json::from_str::<MatrixDocument>(text).map_err(parse_error)? {
        MatrixDocument::Bare(m) | MatrixDocument::Wrapped { matrix: m } => Ok(m),
    }
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<CMat> {
    matrix_from_str(&read(path.as_ref())?)
}

pub fn matrix_to_json(m: &CMat) -> serde_json::Value {
    serde_json::to_value(
        matrix_to_rows(m)
            .into_iter()
            .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )
    .expect("matrices serialize")
}

/// Serializable view of a [`Certificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub tag: FamilyTag,
    #[serde(rename = "P", with = "cmat")]
    pub p: CMat,
    #[serde(rename = "Q", with = "cmat")]
    pub q: CMat,
    #[serde(with = "ext_f64")]
    pub min_eig_q: f64,
    #[serde(with = "ext_f64")]
    pub min_eig_p: f64,
    pub tol_psd: f64,
    pub status: CertificateStatus,
}

impl From<&Certificate> for CertificateDocument {
    fn from(c: &Certificate) -> Self {
        Self {
            tag: c.tag,
            p: c.p.clone(),
            q: c.q.clone(),
            min_eig_q: c.min_eig_q,
            min_eig_p: c.min_eig_p,
            tol_psd: c.tol_psd,
            status: c.status,
        }
    }
}

impl From<CertificateDocument> for Certificate {
    fn from(d: CertificateDocument) -> Self {
        Self {
            tag: d.tag,
            p: d.p,
            q: d.q,
            min_eig_q: d.min_eig_q,
            min_eig_p: d.min_eig_p,
            tol_psd: d.tol_psd,
            status: d.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub domain: Domain,
    pub boundary_points: usize,
    pub interior_points: usize,
    pub seed: u64,
}

impl From<&DomainGrid> for GridSummary {
    fn from(g: &DomainGrid) -> Self {
        Self {
            domain: g.domain,
            boundary_points: g.boundary.len(),
            interior_points: g.interior.len(),
            seed: g.seed,
        }
    }
}

/// The report printed by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyTag>,
    pub verdict: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<MembershipReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSummary>,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub details: serde_json::Map<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl ReportDocument {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            inputs_digest: None,
            family: None,
            verdict: String::new(),
            exit_code: 0,
            margins: Vec::new(),
            certificate: None,
            grid: None,
            details: serde_json::Map::new(),
            notes: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            timestamp: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(parse_error)
    }
}
