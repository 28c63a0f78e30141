//! `CGEM` embedding files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "CGEM"            4 bytes magic
//! version   u32     currently 1
//! n         u32     row count
//! dim       u32     columns per row
//! tag_len   u32     then tag_len bytes of UTF-8 encoder tag
//! n × (u32 len, len bytes of UTF-8 id)
//! n × dim   f32     row-major payload
//! crc32     u32     CRC-32 (IEEE) of every byte after the magic
//! ```

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CGEM";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    dim: usize,
    values: Vec<f32>,
    encoder_tag: String,
}

impl EmbeddingMatrix {
    /// Build from a flat row-major buffer of `ids.len() * dim` values.
    pub fn new(
        ids: Vec<String>,
        dim: usize,
        values: Vec<f32>,
        encoder_tag: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be positive".into(),
            ));
        }
        if values.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: ids.len() * dim,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::DuplicateId(dup.clone()));
        }
        Ok(Self {
            ids,
            dim,
            values,
            encoder_tag: encoder_tag.into(),
        })
    }

    pub fn from_rows(
        ids: Vec<String>,
        rows: Vec<Vec<f32>>,
        encoder_tag: impl Into<String>,
    ) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: rows.len(),
            });
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(ids, dim, values, encoder_tag)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn encoder_tag(&self) -> &str {
        &self.encoder_tag
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.values.chunks_exact(self.dim)
    }

    /// Select and reorder rows to follow `ids`.
    pub fn align<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self> {
        let index: HashMap<&str, usize> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut values = Vec::with_capacity(ids.len() * self.dim);
        let mut out_ids = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            let &row = index
                .get(id)
                .ok_or_else(|| Error::MissingId(id.to_string()))?;
            values.extend_from_slice(self.row(row));
            out_ids.push(id.to_string());
        }
        Ok(Self {
            ids: out_ids,
            dim: self.dim,
            values,
            encoder_tag: self.encoder_tag.clone(),
        })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let id_bytes: usize = self.ids.iter().map(|s| 4 + s.len()).sum();
        let mut out =
            Vec::with_capacity(24 + self.encoder_tag.len() + id_bytes + self.values.len() * 4);
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        put_u32(&mut out, to_u32(self.ids.len(), "row count")?);
        put_u32(&mut out, to_u32(self.dim, "dimension")?);
        put_str(&mut out, &self.encoder_tag)?;
        for id in &self.ids {
            put_str(&mut out, id)?;
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = crc32fast::hash(&out[MAGIC.len()..]);
        put_u32(&mut out, crc);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        if bytes.len() < MAGIC.len() + 4 {
            return Err(Error::Format("truncated file".into()));
        }
        let (body, crc_bytes) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(crc_bytes.try_into().expect("4 bytes"));
        let computed = crc32fast::hash(&body[MAGIC.len()..]);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }

        let mut r = Reader::new(&body[MAGIC.len()..]);
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = r.u32()? as usize;
        let dim = r.u32()? as usize;
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if dim == 0 {
            return Err(Error::Format("zero dimension".into()));
        }
        let encoder_tag = r.string()?;
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            ids.push(r.string()?);
        }
        let payload = r.take(
            n.checked_mul(dim)
                .and_then(|x| x.checked_mul(4))
                .ok_or_else(|| Error::Format("payload size overflow".into()))?,
        )?;
        if !r.is_done() {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        let values: Vec<f32> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Self::new(ids, dim, values, encoder_tag)
    }
}

pub fn write_embeddings(matrix: &EmbeddingMatrix, path: &Path) -> Result<()> {
    let bytes = matrix.to_bytes()?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    EmbeddingMatrix::from_bytes(&bytes)
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidArgument(format!("{what} {v} exceeds u32")))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    put_u32(out, to_u32(s.len(), "string length")?);
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|e| Error::Format(format!("invalid UTF-8: {e}")))
    }

    pub(crate) fn is_done(&self) -> bool {
        self.pos == self.buf.len()
    }
}
