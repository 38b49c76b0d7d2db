use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::{Room, RoomMeta};
use crate::error::{Error, Result};
use crate::export::write_atomically;

const MAGIC: &[u8; 5] = b"ROOM1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoomFormat {
    /// `<V> <e>` header, then one `token f1 .. fe` line per entry.
    Text,
    /// `ROOM1` magic, little-endian u64 counts, length-prefixed tokens, f32 rows.
    Binary,
}

impl RoomFormat {
    /// Sniffs the binary magic; anything else is assumed to be text.
    pub fn detect(path: &Path) -> Result<Self> {
        let mut head = [0u8; 5];
        let mut file = File::open(path).map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut filled = 0;
        while filled < head.len() {
            match file.read(&mut head[filled..]) {
                Ok(0) => break,
                Ok(n) => filled += n,
                Err(source) => {
                    return Err(Error::Read {
                        path: path.to_owned(),
                        source,
                    })
                }
            }
        }
        Ok(if &head[..filled] == MAGIC {
            RoomFormat::Binary
        } else {
            RoomFormat::Text
        })
    }
}

impl FromStr for RoomFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(RoomFormat::Text),
            "binary" => Ok(RoomFormat::Binary),
            other => Err(Error::input(format!("unknown room format {other:?}"))),
        }
    }
}

pub fn load_room(path: &Path, format: RoomFormat) -> Result<Room> {
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    let reader = BufReader::new(file);
    let origin = path.display().to_string();
    match format {
        RoomFormat::Text => Room::read_text(reader, &origin),
        RoomFormat::Binary => Room::read_binary(reader, &origin),
    }
}

/// Writes `room` to `path`; the file only appears once fully written.
pub fn save_room(room: &Room, path: &Path, format: RoomFormat) -> Result<()> {
    write_atomically(path, |w| match format {
        RoomFormat::Text => room.write_text(w),
        RoomFormat::Binary => room.write_binary(w),
    })
}

impl Room {
    pub fn write_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, token) in self.tokens.iter().enumerate() {
            w.write_all(token.as_bytes())?;
            for v in self.row(i) {
                write!(w, " {v}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R, origin: &str) -> Result<Room> {
        let read_err = |source| Error::Read {
            path: origin.into(),
            source,
        };
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()
            .map_err(read_err)?
            .ok_or_else(|| Error::parse(origin, 1, "missing header"))?;
        let mut fields = header.split_whitespace();
        let (Some(v), Some(e), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(origin, 1, "header must be \"<V> <e>\""));
        };
        let vocab: usize = v
            .parse()
            .map_err(|_| Error::parse(origin, 1, format!("bad vocabulary size {v:?}")))?;
        let dim: usize = e
            .parse()
            .map_err(|_| Error::parse(origin, 1, format!("bad dimension {e:?}")))?;
        if dim == 0 {
            return Err(Error::parse(origin, 1, "dimension must be at least 1"));
        }

        let mut tokens = Vec::with_capacity(vocab.min(1 << 24));
        let mut data = Vec::with_capacity(vocab.saturating_mul(dim).min(1 << 28));
        let mut seen = std::collections::HashSet::with_capacity(vocab.min(1 << 24));
        for (n, line) in lines.enumerate() {
            let lineno = n + 2;
            let line = line.map_err(read_err)?;
            if tokens.len() == vocab {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("header declares {vocab} rows but more follow"),
                ));
            }
            let mut fields = line.split_whitespace();
            let token = fields
                .next()
                .ok_or_else(|| Error::parse(origin, lineno, "empty row"))?;
            if !seen.insert(token.to_owned()) {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("duplicate token {token:?}"),
                ));
            }
            let before = data.len();
            for field in fields {
                let value: f32 = field
                    .parse()
                    .map_err(|_| Error::parse(origin, lineno, format!("bad number {field:?}")))?;
                if !value.is_finite() {
                    return Err(Error::parse(origin, lineno, "non-finite component"));
                }
                data.push(value);
            }
            if data.len() - before != dim {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("expected {dim} components, found {}", data.len() - before),
                ));
            }
            tokens.push(token.to_owned());
        }
        if tokens.len() != vocab {
            return Err(Error::parse(
                origin,
                tokens.len() + 2,
                format!("header declares {vocab} rows, found {}", tokens.len()),
            ));
        }
        Room::new(tokens, dim, data, RoomMeta::Loaded)
            .map_err(|e| Error::parse(origin, 0, e.to_string()))
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        for (i, token) in self.tokens.iter().enumerate() {
            w.write_all(&(token.len() as u32).to_le_bytes())?;
            w.write_all(token.as_bytes())?;
            for v in self.row(i) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads the binary format. Parse errors report the 1-based entry
    /// number as the line.
    pub fn read_binary<R: Read>(mut reader: R, origin: &str) -> Result<Room> {
        let mut magic = [0u8; 5];
        read_exact(&mut reader, &mut magic, origin, 0)?;
        if &magic != MAGIC {
            return Err(Error::parse(origin, 0, "missing ROOM1 magic"));
        }
        let mut word = [0u8; 8];
        read_exact(&mut reader, &mut word, origin, 0)?;
        let vocab = u64::from_le_bytes(word) as usize;
        read_exact(&mut reader, &mut word, origin, 0)?;
        let dim = u64::from_le_bytes(word) as usize;
        if dim == 0 {
            return Err(Error::parse(origin, 0, "dimension must be at least 1"));
        }

        let mut tokens = Vec::with_capacity(vocab.min(1 << 24));
        let mut data = Vec::with_capacity(vocab.saturating_mul(dim).min(1 << 28));
        let mut seen = std::collections::HashSet::new();
        let mut row = vec![0u8; dim * 4];
        for entry in 1..=vocab {
            let mut len = [0u8; 4];
            read_exact(&mut reader, &mut len, origin, entry)?;
            let mut bytes = vec![0u8; u32::from_le_bytes(len) as usize];
            read_exact(&mut reader, &mut bytes, origin, entry)?;
            let token = String::from_utf8(bytes)
                .map_err(|_| Error::parse(origin, entry, "token is not UTF-8"))?;
            if !seen.insert(token.clone()) {
                return Err(Error::parse(
                    origin,
                    entry,
                    format!("duplicate token {token:?}"),
                ));
            }
            read_exact(&mut reader, &mut row, origin, entry)?;
            data.extend(
                row.chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            );
            tokens.push(token);
        }
        let mut probe = [0u8; 1];
        match reader.read(&mut probe) {
            Ok(0) => {}
            Ok(_) => {
                return Err(Error::parse(
                    origin,
                    vocab + 1,
                    "trailing bytes after last entry",
                ))
            }
            Err(source) => {
                return Err(Error::Read {
                    path: origin.into(),
                    source,
                })
            }
        }
        Room::new(tokens, dim, data, RoomMeta::Loaded)
            .map_err(|e| Error::parse(origin, 0, e.to_string()))
    }
}

fn read_exact<R: Read>(reader: &mut R, buf: &mut [u8], origin: &str, entry: usize) -> Result<()> {
    reader.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::parse(origin, entry, "unexpected end of file"),
        _ => Error::Read {
            path: origin.into(),
            source: e,
        },
    })
}
