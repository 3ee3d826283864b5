//! PCD v0.7 codec for the 18-field automotive radar schema.
//!
//! Binary payloads are little-endian, 43 bytes per point. ASCII payloads
//! are accepted on read. Header lines are kept verbatim so that a file
//! which is read and written back unchanged is byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::{Error, RadarFrame, RadarPoint, Result};

pub const FIELDS: [&str; 18] = [
    "x",
    "y",
    "z",
    "dyn_prop",
    "id",
    "rcs",
    "vx",
    "vy",
    "vx_comp",
    "vy_comp",
    "is_quality_valid",
    "ambig_state",
    "x_rms",
    "y_rms",
    "invalid_state",
    "pdh0",
    "vx_rms",
    "vy_rms",
];
pub const SIZES: [usize; 18] = [4, 4, 4, 1, 2, 4, 4, 4, 4, 4, 1, 1, 1, 1, 1, 1, 1, 1];
pub const TYPES: [&str; 18] = [
    "F", "F", "F", "I", "I", "F", "F", "F", "F", "F", "I", "I", "I", "I", "I", "I", "I", "I",
];
/// Bytes per binary record.
pub const RECORD_SIZE: usize = 43;

const DEFAULT_COMMENT: &str = "# .PCD v0.7 - Point Cloud Data file format";
const DEFAULT_VIEWPOINT: &str = "0 0 0 1 0 0 0";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    Ascii,
    Binary,
}

impl DataMode {
    fn as_str(self) -> &'static str {
        match self {
            DataMode::Ascii => "ascii",
            DataMode::Binary => "binary",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcdHeader {
    pub version: String,
    pub width: usize,
    pub height: usize,
    pub viewpoint: String,
    pub points: usize,
    pub data: DataMode,
    /// Header lines as read, used as the layout template when writing.
    lines: Vec<String>,
}

impl Default for PcdHeader {
    fn default() -> Self {
        PcdHeader {
            version: "0.7".into(),
            width: 0,
            height: 1,
            viewpoint: DEFAULT_VIEWPOINT.into(),
            points: 0,
            data: DataMode::Binary,
            lines: Vec::new(),
        }
    }
}

impl PcdHeader {
    fn render(&self) -> String {
        let mut out = String::new();
        if self.lines.is_empty() {
            writeln!(out, "{DEFAULT_COMMENT}").unwrap();
            for key in [
                "VERSION",
                "FIELDS",
                "SIZE",
                "TYPE",
                "COUNT",
                "WIDTH",
                "HEIGHT",
                "VIEWPOINT",
                "POINTS",
                "DATA",
            ] {
                writeln!(out, "{}", self.line_for(key).unwrap()).unwrap();
            }
            return out;
        }
        for raw in &self.lines {
            let key = raw.split_whitespace().next().unwrap_or("");
            match self.line_for(key) {
                Some(line) if !matches!(key, "FIELDS" | "SIZE" | "TYPE" | "COUNT") => {
                    writeln!(out, "{line}").unwrap()
                }
                _ => writeln!(out, "{raw}").unwrap(),
            }
        }
        out
    }

    fn line_for(&self, key: &str) -> Option<String> {
        let join = |v: &[&str]| v.join(" ");
        Some(match key {
            "VERSION" => format!("VERSION {}", self.version),
            "FIELDS" => format!("FIELDS {}", join(&FIELDS)),
            "SIZE" => format!(
                "SIZE {}",
                SIZES
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
            "TYPE" => format!("TYPE {}", join(&TYPES)),
            "COUNT" => format!("COUNT {}", join(&["1"; 18])),
            "WIDTH" => format!("WIDTH {}", self.width),
            "HEIGHT" => format!("HEIGHT {}", self.height),
            "VIEWPOINT" => format!("VIEWPOINT {}", self.viewpoint),
            "POINTS" => format!("POINTS {}", self.points),
            "DATA" => format!("DATA {}", self.data.as_str()),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PcdFile {
    pub header: PcdHeader,
    pub points: Vec<RadarPoint>,
}

impl PcdFile {
    /// New binary file holding `points` as a single row.
    pub fn from_points(points: Vec<RadarPoint>) -> Self {
        PcdFile::default().with_points(points)
    }

    /// Replaces the payload, keeping the header layout and updating counts.
    pub fn with_points(mut self, points: Vec<RadarPoint>) -> Self {
        self.header.width = points.len();
        self.header.height = 1;
        self.header.points = points.len();
        self.points = points;
        self
    }

    pub fn to_frame(&self) -> RadarFrame {
        RadarFrame::new(self.points.clone())
    }

    pub fn parse(bytes: &[u8], path: &Path) -> Result<Self> {
        Parser {
            path: path.to_path_buf(),
            bytes,
            pos: 0,
        }
        .parse()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header.render().into_bytes();
        match self.header.data {
            DataMode::Binary => {
                out.reserve(self.points.len() * RECORD_SIZE);
                for p in &self.points {
                    encode_point(p, &mut out);
                }
            }
            DataMode::Ascii => {
                let mut text = String::new();
                for p in &self.points {
                    ascii_point(p, &mut text);
                }
                out.extend_from_slice(text.as_bytes());
            }
        }
        out
    }
}

pub fn read_pcd(path: impl AsRef<Path>) -> Result<PcdFile> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    PcdFile::parse(&bytes, path)
}

pub fn write_pcd(file: &PcdFile, path: impl AsRef<Path>) -> Result<()> {
    super::write_atomic(path.as_ref(), &file.to_bytes())
}

fn encode_point(p: &RadarPoint, out: &mut Vec<u8>) {
    for v in [p.x, p.y, p.z] {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.push(p.dyn_prop as u8);
    out.extend_from_slice(&p.id.to_le_bytes());
    for v in [p.rcs, p.vx, p.vy, p.vx_comp, p.vy_comp] {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    for v in [
        p.is_quality_valid,
        p.ambig_state,
        p.x_rms,
        p.y_rms,
        p.invalid_state,
        p.pdh0,
        p.vx_rms,
        p.vy_rms,
    ] {
        out.push(v as u8);
    }
}

fn decode_point(b: &[u8]) -> RadarPoint {
    let f = |at: usize| f64::from(f32::from_le_bytes(b[at..at + 4].try_into().unwrap()));
    let i = |at: usize| b[at] as i8;
    RadarPoint {
        x: f(0),
        y: f(4),
        z: f(8),
        dyn_prop: i(12),
        id: i16::from_le_bytes([b[13], b[14]]),
        rcs: f(15),
        vx: f(19),
        vy: f(23),
        vx_comp: f(27),
        vy_comp: f(31),
        is_quality_valid: i(35),
        ambig_state: i(36),
        x_rms: i(37),
        y_rms: i(38),
        invalid_state: i(39),
        pdh0: i(40),
        vx_rms: i(41),
        vy_rms: i(42),
    }
}

fn ascii_point(p: &RadarPoint, out: &mut String) {
    let f = |v: f64| v as f32;
    writeln!(
        out,
        "{} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {}",
        f(p.x),
        f(p.y),
        f(p.z),
        p.dyn_prop,
        p.id,
        f(p.rcs),
        f(p.vx),
        f(p.vy),
        f(p.vx_comp),
        f(p.vy_comp),
        p.is_quality_valid,
        p.ambig_state,
        p.x_rms,
        p.y_rms,
        p.invalid_state,
        p.pdh0,
        p.vx_rms,
        p.vy_rms
    )
    .unwrap();
}

struct Parser<'a> {
    path: PathBuf,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn next_line(&mut self) -> Option<String> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let rest = &self.bytes[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        self.pos += (end + 1).min(rest.len());
        Some(String::from_utf8_lossy(&rest[..end]).into_owned())
    }

    fn schema_err(&self, line: &str, reason: impl Into<String>) -> Error {
        Error::PcdSchema {
            path: self.path.clone(),
            line: line.trim_end().to_string(),
            reason: reason.into(),
        }
    }

    fn header_err(&self, line: &str) -> Error {
        Error::PcdHeader {
            path: self.path.clone(),
            line: line.trim_end().to_string(),
        }
    }

    fn check_list(&self, line: &str, values: &[&str], expected: &[String]) -> Result<()> {
        if values.len() != expected.len() {
            return Err(self.schema_err(
                line,
                format!(
                    "expected {} entries, found {}",
                    expected.len(),
                    values.len()
                ),
            ));
        }
        for (i, (v, e)) in values.iter().zip(expected).enumerate() {
            if v != e {
                return Err(self.schema_err(
                    line,
                    format!("entry {} (`{}`) is `{v}`, expected `{e}`", i + 1, FIELDS[i]),
                ));
            }
        }
        Ok(())
    }

    fn check_fields(&self, line: &str, values: &[&str]) -> Result<()> {
        if let Some(missing) = FIELDS.iter().find(|f| !values.contains(f)) {
            return Err(self.schema_err(line, format!("missing field `{missing}`")));
        }
        if let Some(extra) = values.iter().find(|v| !FIELDS.contains(v)) {
            return Err(self.schema_err(line, format!("unexpected field `{extra}`")));
        }
        if values != FIELDS {
            return Err(self.schema_err(line, "fields are out of order"));
        }
        Ok(())
    }

    fn parse(mut self) -> Result<PcdFile> {
        let mut header = PcdHeader::default();
        let mut seen = Vec::new();
        loop {
            let Some(raw) = self.next_line() else {
                return Err(self.header_err("<end of file before DATA>"));
            };
            let trimmed = raw.trim().to_string();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                header.lines.push(raw);
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let key = tokens.next().unwrap();
            let values: Vec<&str> = tokens.collect();
            let one = |s: &Self| -> Result<usize> {
                match values.as_slice() {
                    [v] => v.parse().map_err(|_| s.header_err(&raw)),
                    _ => Err(s.header_err(&raw)),
                }
            };
            match key {
                "VERSION" => header.version = values.join(" "),
                "FIELDS" => self.check_fields(&raw, &values)?,
                "SIZE" => {
                    let e: Vec<String> = SIZES.iter().map(|s| s.to_string()).collect();
                    self.check_list(&raw, &values, &e)?
                }
                "TYPE" => {
                    let e: Vec<String> = TYPES.iter().map(|s| s.to_string()).collect();
                    self.check_list(&raw, &values, &e)?
                }
                "COUNT" => self.check_list(&raw, &values, &vec!["1".to_string(); 18])?,
                "WIDTH" => header.width = one(&self)?,
                "HEIGHT" => header.height = one(&self)?,
                "POINTS" => header.points = one(&self)?,
                "VIEWPOINT" => header.viewpoint = values.join(" "),
                "DATA" => {
                    header.data = match values.as_slice() {
                        ["binary"] => DataMode::Binary,
                        ["ascii"] => DataMode::Ascii,
                        _ => {
                            return Err(Error::PcdDataMode {
                                path: self.path.clone(),
                                line: trimmed.to_string(),
                            })
                        }
                    };
                }
                _ => return Err(self.header_err(&raw)),
            }
            seen.push(key.to_string());
            header.lines.push(raw);
            if key == "DATA" {
                break;
            }
        }
        for required in ["FIELDS", "SIZE", "TYPE", "WIDTH", "HEIGHT", "POINTS"] {
            if !seen.iter().any(|k| k == required) {
                return Err(
                    self.schema_err("DATA", format!("header ends without a {required} line"))
                );
            }
        }
        if header.width * header.height != header.points {
            return Err(self.schema_err(
                &format!("POINTS {}", header.points),
                format!(
                    "WIDTH x HEIGHT = {} x {} does not match POINTS",
                    header.width, header.height
                ),
            ));
        }

        let payload = &self.bytes[self.pos..];
        let points = match header.data {
            DataMode::Binary => {
                let expected = header.points * RECORD_SIZE;
                if payload.len() < expected {
                    return Err(Error::PcdTruncated {
                        path: self.path.clone(),
                        expected,
                        found: payload.len(),
                    });
                }
                payload[..expected]
                    .chunks_exact(RECORD_SIZE)
                    .map(decode_point)
                    .collect()
            }
            DataMode::Ascii => self.parse_ascii(payload, header.points)?,
        };
        Ok(PcdFile { header, points })
    }

    fn parse_ascii(&self, payload: &[u8], count: usize) -> Result<Vec<RadarPoint>> {
        let text = String::from_utf8_lossy(payload);
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() < count {
            return Err(Error::PcdTruncated {
                path: self.path.clone(),
                expected: count,
                found: lines.len(),
            });
        }
        lines[..count]
            .iter()
            .map(|line| {
                let t: Vec<&str> = line.split_whitespace().collect();
                if t.len() != FIELDS.len() {
                    return Err(self.header_err(line));
                }
                let f = |i: usize| -> Result<f64> {
                    t[i].parse::<f32>()
                        .map(f64::from)
                        .map_err(|_| self.header_err(line))
                };
                let i8_ =
                    |i: usize| -> Result<i8> { t[i].parse().map_err(|_| self.header_err(line)) };
                Ok(RadarPoint {
                    x: f(0)?,
                    y: f(1)?,
                    z: f(2)?,
                    dyn_prop: i8_(3)?,
                    id: t[4].parse().map_err(|_| self.header_err(line))?,
                    rcs: f(5)?,
                    vx: f(6)?,
                    vy: f(7)?,
                    vx_comp: f(8)?,
                    vy_comp: f(9)?,
                    is_quality_valid: i8_(10)?,
                    ambig_state: i8_(11)?,
                    x_rms: i8_(12)?,
                    y_rms: i8_(13)?,
                    invalid_state: i8_(14)?,
                    pdh0: i8_(15)?,
                    vx_rms: i8_(16)?,
                    vy_rms: i8_(17)?,
                })
            })
            .collect()
    }
}
