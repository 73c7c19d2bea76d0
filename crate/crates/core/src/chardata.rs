//! Character resource tables: pinyin readings, four-corner codes, structure
//! codes and stroke sequences, keyed by code point.
//!
//! Every table is a UTF-8 TSV file with one character per row:
//!
//! | file             | row                                   |
//! |------------------|---------------------------------------|
//! | `pinyin.tsv`     | `<char>\t<reading>[,<reading>...]`    |
//! | `fourcorner.tsv` | `<char>\t<5 digits>`                  |
//! | `structure.tsv`  | `<char>\t<code string>`               |
//! | `strokes.tsv`    | `<char>\t<digits 1-5 concatenated>`   |
//!
//! Readings are lowercase with an optional trailing tone digit 1-4; the
//! neutral tone carries no digit (`de`). Stroke digits use the five-class
//! scheme: 1 horizontal, 2 vertical, 3 left-falling, 4 dot/right-falling,
//! 5 turning.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

pub const PINYIN_FILE: &str = "pinyin.tsv";
pub const FOUR_CORNER_FILE: &str = "fourcorner.tsv";
pub const STRUCTURE_FILE: &str = "structure.tsv";
pub const STROKES_FILE: &str = "strokes.tsv";

#[derive(Debug, thiserror::Error)]
pub enum ResourceError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{source_name}:{line}: {message}")]
    Malformed {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{source_name}:{line}: duplicate entry for {codepoint:?} (first seen on line {first_line})")]
    Duplicate {
        source_name: String,
        line: usize,
        first_line: usize,
        codepoint: char,
    },
}

/// Which of the four resource tables a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    Pinyin,
    FourCorner,
    Structure,
    Strokes,
}

impl TableKind {
    pub const ALL: [TableKind; 4] = [
        TableKind::Pinyin,
        TableKind::FourCorner,
        TableKind::Structure,
        TableKind::Strokes,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            TableKind::Pinyin => PINYIN_FILE,
            TableKind::FourCorner => FOUR_CORNER_FILE,
            TableKind::Structure => STRUCTURE_FILE,
            TableKind::Strokes => STROKES_FILE,
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TableKind::Pinyin => "pinyin",
            TableKind::FourCorner => "four-corner",
            TableKind::Structure => "structure",
            TableKind::Strokes => "strokes",
        };
        f.write_str(name)
    }
}

/// A 5-digit four-corner code, stored as digit values 0-9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FourCornerCode([u8; 5]);

impl FourCornerCode {
    pub fn parse(s: &str) -> Option<Self> {
        let bytes = s.as_bytes();
        if bytes.len() != 5 || !bytes.iter().all(u8::is_ascii_digit) {
            return None;
        }
        let mut digits = [0u8; 5];
        for (d, b) in digits.iter_mut().zip(bytes) {
            *d = b - b'0';
        }
        Some(Self(digits))
    }

    pub fn digits(&self) -> &[u8; 5] {
        &self.0
    }
}

impl fmt::Display for FourCornerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Everything the tables know about one character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharRecord {
    pub codepoint: char,
    /// Empty when the character is absent from the pinyin table.
    pub pinyin_readings: Vec<String>,
    pub four_corner: Option<FourCornerCode>,
    pub structure_code: Option<String>,
    /// Stroke classes 1-5, in writing order. Never empty when present.
    pub strokes: Option<Vec<u8>>,
}

impl CharRecord {
    fn empty(codepoint: char) -> Self {
        Self {
            codepoint,
            pinyin_readings: Vec::new(),
            four_corner: None,
            structure_code: None,
            strokes: None,
        }
    }
}

/// Where one table came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSource {
    pub kind: TableKind,
    pub source: String,
    pub rows: usize,
}

/// Immutable, validated set of character records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResourceTable {
    records: HashMap<char, CharRecord>,
    provenance: Vec<TableSource>,
}

impl ResourceTable {
    pub fn builder() -> ResourceTableBuilder {
        ResourceTableBuilder::default()
    }

    /// Absent code points are a miss, not an error.
    pub fn lookup(&self, c: char) -> Option<&CharRecord> {
        self.records.get(&c)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn provenance(&self) -> &[TableSource] {
        &self.provenance
    }

    pub fn records(&self) -> impl Iterator<Item = &CharRecord> {
        self.records.values()
    }

    /// All code points, sorted. Handy for reproducible sampling.
    pub fn codepoints(&self) -> Vec<char> {
        let mut cps: Vec<char> = self.records.keys().copied().collect();
        cps.sort_unstable();
        cps
    }

    /// Number of records carrying data from the given table.
    pub fn coverage(&self, kind: TableKind) -> usize {
        self.records
            .values()
            .filter(|r| match kind {
                TableKind::Pinyin => !r.pinyin_readings.is_empty(),
                TableKind::FourCorner => r.four_corner.is_some(),
                TableKind::Structure => r.structure_code.is_some(),
                TableKind::Strokes => r.strokes.is_some(),
            })
            .count()
    }
}

/// Paths of the four table files. Only the pinyin table is mandatory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourcePaths {
    pub pinyin: PathBuf,
    pub four_corner: Option<PathBuf>,
    pub structure: Option<PathBuf>,
    pub strokes: Option<PathBuf>,
}

impl ResourcePaths {
    /// Standard file names inside `dir`; optional tables are included only
    /// when present on disk.
    pub fn from_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        let optional = |name: &str| {
            let p = dir.join(name);
            p.is_file().then_some(p)
        };
        Self {
            pinyin: dir.join(PINYIN_FILE),
            four_corner: optional(FOUR_CORNER_FILE),
            structure: optional(STRUCTURE_FILE),
            strokes: optional(STROKES_FILE),
        }
    }
}

pub fn load_resources(paths: &ResourcePaths) -> Result<ResourceTable, ResourceError> {
    let mut builder = ResourceTable::builder();
    builder.load_file(TableKind::Pinyin, &paths.pinyin)?;
    let optional = [
        (TableKind::FourCorner, &paths.four_corner),
        (TableKind::Structure, &paths.structure),
        (TableKind::Strokes, &paths.strokes),
    ];
    for (kind, path) in optional {
        if let Some(path) = path {
            builder.load_file(kind, path)?;
        }
    }
    Ok(builder.build())
}

pub fn lookup(table: &ResourceTable, c: char) -> Option<&CharRecord> {
    table.lookup(c)
}

/// Accumulates validated rows; [`ResourceTableBuilder::build`] freezes them.
#[derive(Debug, Default)]
pub struct ResourceTableBuilder {
    records: HashMap<char, CharRecord>,
    seen: HashMap<(TableKind, char), usize>,
    provenance: Vec<TableSource>,
}

impl ResourceTableBuilder {
    pub fn load_file(&mut self, kind: TableKind, path: &Path) -> Result<&mut Self, ResourceError> {
        let io_err = |source| ResourceError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::open(path).map_err(io_err)?;
        self.read_table(kind, &path.display().to_string(), BufReader::new(file))
            .map_err(|e| match e {
                ReadError::Io(source) => io_err(source),
                ReadError::Resource(e) => e,
            })?;
        Ok(self)
    }

    /// Parses TSV text already in memory. `source_name` appears in
    /// diagnostics and provenance.
    pub fn load_str(&mut self, kind: TableKind, source_name: &str, text: &str) -> Result<&mut Self, ResourceError> {
        self.read_table(kind, source_name, text.as_bytes())
            .map_err(|e| match e {
                ReadError::Io(source) => ResourceError::Io {
                    path: PathBuf::from(source_name),
                    source,
                },
                ReadError::Resource(e) => e,
            })?;
        Ok(self)
    }

    fn read_table<R: BufRead>(&mut self, kind: TableKind, source_name: &str, reader: R) -> Result<(), ReadError> {
        let mut rows = 0;
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(ReadError::Io)?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() {
                continue;
            }
            self.add_row(kind, source_name, idx + 1, line)?;
            rows += 1;
        }
        self.provenance.push(TableSource {
            kind,
            source: source_name.to_owned(),
            rows,
        });
        Ok(())
    }

    fn add_row(&mut self, kind: TableKind, source_name: &str, line_no: usize, line: &str) -> Result<(), ResourceError> {
        let malformed = |message: String| ResourceError::Malformed {
            source_name: source_name.to_owned(),
            line: line_no,
            message,
        };
        let (key, value) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected `<char>\\t<value>`".into()))?;
        let mut key_chars = key.chars();
        let codepoint = match (key_chars.next(), key_chars.next()) {
            (Some(c), None) => c,
            _ => return Err(malformed(format!("key {key:?} is not a single character"))),
        };
        if value.contains('\t') {
            return Err(malformed("too many columns".into()));
        }

        if let Some(&first_line) = self.seen.get(&(kind, codepoint)) {
            return Err(ResourceError::Duplicate {
                source_name: source_name.to_owned(),
                line: line_no,
                first_line,
                codepoint,
            });
        }

        let record = self
            .records
            .entry(codepoint)
            .or_insert_with(|| CharRecord::empty(codepoint));
        match kind {
            TableKind::Pinyin => {
                let mut readings = Vec::new();
                for reading in value.split(',') {
                    if !is_valid_reading(reading) {
                        return Err(malformed(format!("invalid pinyin reading {reading:?}")));
                    }
                    readings.push(reading.to_owned());
                }
                record.pinyin_readings = readings;
            }
            TableKind::FourCorner => {
                let code = FourCornerCode::parse(value)
                    .ok_or_else(|| malformed(format!("four-corner code {value:?} is not 5 digits")))?;
                record.four_corner = Some(code);
            }
            TableKind::Structure => {
                if value.is_empty() {
                    return Err(malformed("empty structure code".into()));
                }
                record.structure_code = Some(value.to_owned());
            }
            TableKind::Strokes => {
                if value.is_empty() {
                    return Err(malformed("empty stroke sequence".into()));
                }
                let strokes = value
                    .bytes()
                    .map(|b| matches!(b, b'1'..=b'5').then_some(b - b'0'))
                    .collect::<Option<Vec<u8>>>()
                    .ok_or_else(|| malformed(format!("stroke sequence {value:?} must use digits 1-5")))?;
                record.strokes = Some(strokes);
            }
        }
        self.seen.insert((kind, codepoint), line_no);
        Ok(())
    }

    pub fn build(self) -> ResourceTable {
        ResourceTable {
            records: self.records,
            provenance: self.provenance,
        }
    }
}

enum ReadError {
    Io(io::Error),
    Resource(ResourceError),
}

impl From<ResourceError> for ReadError {
    fn from(e: ResourceError) -> Self {
        ReadError::Resource(e)
    }
}

/// `[a-zü]+[1-4]?`
pub fn is_valid_reading(reading: &str) -> bool {
    let body = match reading.as_bytes().last() {
        Some(b'1'..=b'4') => &reading[..reading.len() - 1],
        _ => reading,
    };
    !body.is_empty() && body.chars().all(|c| c.is_ascii_lowercase() || c == 'ü')
}
