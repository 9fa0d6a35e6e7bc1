//! Reading and writing latents in the numpy `.npy` format.
//!
//! Only little-endian `f4`/`f8`, C-order, four-dimensional arrays are
//! accepted. Files are written as version 1.0 with the header padded so the
//! payload starts on a 64-byte boundary, matching what numpy produces.
//!
//! Format reference: <https://numpy.org/doc/stable/reference/generated/numpy.lib.format.html>

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::tensor::{LatentTensor, Precision, Shape};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

#[derive(Debug, Clone, PartialEq)]
enum Literal {
    Str(String),
    Bool(bool),
    Tuple(Vec<u64>),
}

/// Parser for the small Python dict literal in an npy header.
struct HeaderParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderParser<'a> {
    fn new(text: &'a str) -> Self {
        HeaderParser {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, what: &str) -> Error {
        Error::FormatError(format!("malformed npy header at byte {}: {what}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {:?}", c as char)))
        }
    }

    fn string(&mut self) -> Result<String> {
        let quote = match self.peek() {
            Some(q @ (b'\'' | b'"')) => q,
            _ => return Err(self.err("expected a string")),
        };
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos] != quote {
            self.pos += 1;
        }
        if self.pos == self.bytes.len() {
            return Err(self.err("unterminated string"));
        }
        let s = String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned();
        self.pos += 1;
        Ok(s)
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("expected an integer"))
    }

    fn value(&mut self) -> Result<Literal> {
        match self.peek() {
            Some(b'\'' | b'"') => Ok(Literal::Str(self.string()?)),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    match self.peek() {
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => {
                            items.push(self.integer()?);
                            match self.peek() {
                                Some(b',') => self.pos += 1,
                                Some(b')') => {}
                                _ => return Err(self.err("expected ',' or ')'")),
                            }
                        }
                        None => return Err(self.err("unterminated tuple")),
                    }
                }
                Ok(Literal::Tuple(items))
            }
            _ => {
                let rest = &self.bytes[self.pos..];
                if rest.starts_with(b"True") {
                    self.pos += 4;
                    Ok(Literal::Bool(true))
                } else if rest.starts_with(b"False") {
                    self.pos += 5;
                    Ok(Literal::Bool(false))
                } else {
                    Err(self.err("unsupported value"))
                }
            }
        }
    }

    fn dict(&mut self) -> Result<Vec<(String, Literal)>> {
        self.expect(b'{')?;
        let mut entries = Vec::new();
        loop {
            if self.peek() == Some(b'}') {
                self.pos += 1;
                break;
            }
            let key = self.string()?;
            self.expect(b':')?;
            entries.push((key, self.value()?));
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {}
                _ => return Err(self.err("expected ',' or '}'")),
            }
        }
        Ok(entries)
    }
}

struct Header {
    precision: Precision,
    shape: Shape,
}

fn parse_header(text: &str) -> Result<Header> {
    let entries = HeaderParser::new(text).dict()?;
    let get = |key: &str| {
        entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::FormatError(format!("npy header lacks '{key}'")))
    };
    let precision = match get("descr")? {
        Literal::Str(d) if d == "<f8" => Precision::F64,
        Literal::Str(d) if d == "<f4" => Precision::F32,
        other => return Err(Error::FormatError(format!("unsupported dtype {other:?}"))),
    };
    match get("fortran_order")? {
        Literal::Bool(false) => {}
        Literal::Bool(true) => {
            return Err(Error::UnsupportedLayout("Fortran-order arrays are not supported".into()))
        }
        other => return Err(Error::FormatError(format!("bad fortran_order {other:?}"))),
    }
    let dims = match get("shape")? {
        Literal::Tuple(dims) => dims.clone(),
        other => return Err(Error::FormatError(format!("bad shape {other:?}"))),
    };
    let shape = match dims.as_slice() {
        &[t, w, h, d] => Shape::new(t as usize, w as usize, h as usize, d as usize)
            .map_err(|e| Error::ShapeError(e.to_string()))?,
        _ => {
            return Err(Error::ShapeError(format!(
                "expected a 4-D array, got {} dims",
                dims.len()
            )))
        }
    };
    Ok(Header { precision, shape })
}

/// Reads a latent from an npy stream.
pub fn read_npy_from<R: Read>(reader: &mut R) -> Result<LatentTensor> {
    let mut preamble = [0u8; 8];
    reader.read_exact(&mut preamble).map_err(truncated)?;
    if &preamble[..6] != MAGIC {
        return Err(Error::FormatError("missing npy magic string".into()));
    }
    let header_len = match preamble[6] {
        1 => {
            let mut len = [0u8; 2];
            reader.read_exact(&mut len).map_err(truncated)?;
            u16::from_le_bytes(len) as usize
        }
        2 | 3 => {
            let mut len = [0u8; 4];
            reader.read_exact(&mut len).map_err(truncated)?;
            u32::from_le_bytes(len) as usize
        }
        major => {
            return Err(Error::FormatError(format!(
                "unsupported npy version {major}.{}",
                preamble[7]
            )))
        }
    };
    let mut header = vec![0u8; header_len];
    reader.read_exact(&mut header).map_err(truncated)?;
    let header = String::from_utf8(header)
        .map_err(|_| Error::FormatError("npy header is not valid text".into()))?;
    let Header { precision, shape } = parse_header(&header)?;

    let width = match precision {
        Precision::F32 => 4,
        Precision::F64 => 8,
    };
    let mut payload = vec![0u8; shape.len() * width];
    reader.read_exact(&mut payload).map_err(truncated)?;
    let data: Vec<f64> = match precision {
        Precision::F32 => payload
            .chunks_exact(4)
            .map(|b| f64::from(f32::from_le_bytes(b.try_into().unwrap())))
            .collect(),
        Precision::F64 => payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
    };
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::FormatError("npy payload holds non-finite values".into()));
    }
    LatentTensor::with_precision(shape, data, precision)
}

fn truncated(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::FormatError("npy file is truncated".into())
    } else {
        Error::Io(e)
    }
}

pub fn read_npy(path: impl AsRef<Path>) -> Result<LatentTensor> {
    let bytes = fs::read(path.as_ref())?;
    read_npy_from(&mut bytes.as_slice())
}

/// Version 1.0 header bytes, including magic and padding.
pub fn header_bytes(shape: Shape, precision: Precision) -> Vec<u8> {
    let descr = match precision {
        Precision::F32 => "<f4",
        Precision::F64 => "<f8",
    };
    let mut dict = format!(
        "{{'descr': '{descr}', 'fortran_order': False, 'shape': ({}, {}, {}, {}), }}",
        shape.t, shape.w, shape.h, shape.d
    );
    let unpadded = MAGIC.len() + 2 + 2 + dict.len() + 1;
    let padding = (ALIGN - unpadded % ALIGN) % ALIGN;
    dict.extend(std::iter::repeat_n(' ', padding));
    dict.push('\n');

    let mut out = Vec::with_capacity(unpadded + padding);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out
}

pub fn write_npy_to<W: Write>(x: &LatentTensor, writer: &mut W) -> Result<()> {
    writer.write_all(&header_bytes(x.shape(), x.precision()))?;
    let mut payload = Vec::with_capacity(x.data().len() * 8);
    match x.precision() {
        Precision::F32 => {
            for &v in x.data() {
                payload.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        Precision::F64 => {
            for &v in x.data() {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    writer.write_all(&payload)?;
    Ok(())
}

/// Writes atomically: the file appears complete or not at all.
pub fn write_npy(x: &LatentTensor, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = Vec::new();
    write_npy_to(x, &mut bytes)?;
    write_atomic(path.as_ref(), &bytes)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
