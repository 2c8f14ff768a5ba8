//! Report, CSV and manifest emission.
//!
//! Every float is written as `{:.16e}`, which round-trips `f64` exactly and
//! does not depend on the platform's shortest-representation algorithm.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

pub struct FixedFloatFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for FixedFloatFormatter<'_> {
    fn default() -> Self {
        FixedFloatFormatter { inner: PrettyFormatter::with_indent(b"  ") }
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.inner.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for FixedFloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Pretty JSON with fixed float formatting and a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloatFormatter::default());
    value.serialize(&mut ser).expect("report values serialize");
    out.push(b'\n');
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::I(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) if v.is_finite() => format_float(*v),
            Cell::F(v) if v.is_nan() => "nan".into(),
            Cell::F(v) => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::I(v) => v.to_string(),
            Cell::S(v) => v.clone(),
            Cell::B(v) => v.to_string(),
        }
    }
}

/// Rows for `sweep.csv`, with a description of every column.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[(&'static str, &'static str)]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.0)).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn columns_markdown(&self, command: &str) -> Vec<u8> {
        let mut s = format!("# sweep.csv columns\n\nWritten by `nulab {command}`.\n\n| column | meaning |\n|---|---|\n");
        for (name, desc) in &self.columns {
            s.push_str(&format!("| `{name}` | {desc} |\n"));
        }
        s.into_bytes()
    }
}

/// A file staged for writing.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes every artifact through one writer. Each file goes to a temporary
/// name first and is renamed into place, so readers never see partial files.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> io::Result<Vec<FileEntry>> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for a in artifacts {
        let target = dir.join(&a.name);
        if let Some(parent) = target.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let tmp: PathBuf = dir.join(format!(".{}.tmp", a.name.replace('/', "_")));
        std::fs::write(&tmp, &a.bytes)?;
        std::fs::rename(&tmp, &target)?;
        entries.push(FileEntry { name: a.name.clone(), sha256: sha256_hex(&a.bytes), bytes: a.bytes.len() });
    }
    Ok(entries)
}
