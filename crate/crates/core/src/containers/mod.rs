//! Readers and writers for recordings, directivity documents, DAFF balloons,
//! FIR banks and plot tables. Byte layouts are described in
//! `docs/container.md`.

pub mod daff;
pub mod firbank;
pub mod naming;
pub mod sofalite;
pub mod table;
pub mod wav;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{SphericalGrid, SphericalPoint};

pub use daff::{read_opendaff, write_opendaff, DaffBalloon};
pub use firbank::{read_fir_bank, write_fir_bank};
pub use naming::DocumentName;
pub use sofalite::{read_document, write_document, DirectivityDocument, MetadataKey, SourceInfo};
pub use table::{balloon_rows, write_balloon_table, BalloonRow};
pub use wav::{read_recording_wav, read_wav_channels, write_recording_wav, WavEncoding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DocumentKind {
    Recordings,
    SingleNote,
    ThirdOctave,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 3] = [
        DocumentKind::Recordings,
        DocumentKind::SingleNote,
        DocumentKind::ThirdOctave,
    ];

    fn code(self) -> u8 {
        match self {
            DocumentKind::Recordings => 0,
            DocumentKind::SingleNote => 1,
            DocumentKind::ThirdOctave => 2,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.code() == code)
            .ok_or_else(|| Error::Malformed(format!("unknown document kind code {code}")))
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocumentKind::Recordings => "recordings",
            DocumentKind::SingleNote => "single_note",
            DocumentKind::ThirdOctave => "third_octave",
        })
    }
}

impl FromStr for DocumentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::InvalidDocument(format!("unknown document kind {s:?}")))
    }
}

/// Writes the whole buffer to `path`.
pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Little-endian chunk stream: `tag[4] | u64 length | payload`.
#[derive(Default)]
pub(crate) struct ChunkWriter {
    buf: Vec<u8>,
}

impl ChunkWriter {
    pub fn new(magic: &[u8; 8], major: u16, minor: u16) -> Self {
        let mut buf = magic.to_vec();
        buf.extend_from_slice(&major.to_le_bytes());
        buf.extend_from_slice(&minor.to_le_bytes());
        Self { buf }
    }

    pub fn chunk(&mut self, tag: &[u8; 4], payload: &[u8]) {
        self.buf.extend_from_slice(tag);
        self.buf
            .extend_from_slice(&(payload.len() as u64).to_le_bytes());
        self.buf.extend_from_slice(payload);
    }

    pub fn f64_chunk(&mut self, tag: &[u8; 4], values: impl IntoIterator<Item = f64>) {
        let payload: Vec<u8> = values.into_iter().flat_map(f64::to_le_bytes).collect();
        self.chunk(tag, &payload);
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.chunk(b"END\0", &[]);
        self.buf
    }
}

pub(crate) struct ChunkReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ChunkReader<'a> {
    /// Checks the magic and returns the reader with the format version.
    pub fn new(bytes: &'a [u8], magic: &[u8; 8]) -> Result<(Self, u16, u16)> {
        if bytes.len() < 12 || &bytes[..8] != magic {
            return Err(Error::Malformed(format!(
                "missing {:?} signature",
                String::from_utf8_lossy(magic).trim_end_matches('\0')
            )));
        }
        let major = u16::from_le_bytes([bytes[8], bytes[9]]);
        let minor = u16::from_le_bytes([bytes[10], bytes[11]]);
        Ok((Self { bytes, pos: 12 }, major, minor))
    }

    /// Next chunk, which must carry `tag`.
    pub fn expect(&mut self, tag: &[u8; 4]) -> Result<&'a [u8]> {
        let name = String::from_utf8_lossy(tag)
            .trim_end_matches('\0')
            .to_owned();
        let head = self
            .bytes
            .get(self.pos..self.pos + 12)
            .ok_or_else(|| Error::Malformed(format!("truncated before chunk {name}")))?;
        if &head[..4] != tag {
            return Err(Error::Malformed(format!(
                "expected chunk {name}, found {:?}",
                String::from_utf8_lossy(&head[..4])
            )));
        }
        let len = u64::from_le_bytes(head[4..12].try_into().expect("8 bytes"));
        let start = self.pos + 12;
        let end = usize::try_from(len)
            .ok()
            .and_then(|l| start.checked_add(l))
            .filter(|e| *e <= self.bytes.len())
            .ok_or_else(|| Error::Malformed(format!("chunk {name} overruns the file")))?;
        self.pos = end;
        Ok(&self.bytes[start..end])
    }

    pub fn f64s(&mut self, tag: &[u8; 4], count: usize) -> Result<Vec<f64>> {
        let payload = self.expect(tag)?;
        if Some(payload.len()) != count.checked_mul(8) {
            return Err(Error::Malformed(format!(
                "chunk {} holds {} bytes, expected {count} doubles",
                String::from_utf8_lossy(tag),
                payload.len()
            )));
        }
        Ok(payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect())
    }

    pub fn u64s<const N: usize>(&mut self, tag: &[u8; 4]) -> Result<[u64; N]> {
        let payload = self.expect(tag)?;
        if payload.len() != 8 * N {
            return Err(Error::Malformed(format!(
                "chunk {} holds {} bytes, expected {}",
                String::from_utf8_lossy(tag),
                payload.len(),
                8 * N
            )));
        }
        let mut out = [0u64; N];
        for (o, b) in out.iter_mut().zip(payload.chunks_exact(8)) {
            *o = u64::from_le_bytes(b.try_into().expect("8 bytes"));
        }
        Ok(out)
    }

    pub fn finish(mut self) -> Result<()> {
        self.expect(b"END\0")?;
        if self.pos != self.bytes.len() {
            return Err(Error::Malformed(format!(
                "{} trailing bytes after END",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub(crate) fn dimension(value: u64, what: &str) -> Result<usize> {
    usize::try_from(value).map_err(|_| Error::Malformed(format!("{what} {value} too large")))
}

/// `RPOS` and `RWGT` payloads.
pub(crate) fn write_grid(w: &mut ChunkWriter, grid: &SphericalGrid) {
    w.f64_chunk(
        b"RPOS",
        grid.points()
            .iter()
            .flat_map(|p| [p.azimuth(), p.colatitude(), p.radius()]),
    );
    w.f64_chunk(b"RWGT", grid.weights().iter().copied());
}

pub(crate) fn read_grid(r: &mut ChunkReader<'_>, count: usize) -> Result<SphericalGrid> {
    let coords = r.f64s(b"RPOS", count.saturating_mul(3))?;
    let weights = r.f64s(b"RWGT", count)?;
    let points = coords
        .chunks_exact(3)
        .map(|c| SphericalPoint::new(c[0], c[1], c[2]))
        .collect::<Result<Vec<_>>>()?;
    SphericalGrid::new(points, weights)
}

/// `u32 count`, then per entry `u32 len | key | u32 len | value`.
pub(crate) fn encode_strings<'a>(
    entries: impl ExactSizeIterator<Item = (&'a str, &'a str)>,
) -> Vec<u8> {
    let mut out = (entries.len() as u32).to_le_bytes().to_vec();
    for (k, v) in entries {
        for s in [k, v] {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
    }
    out
}

pub(crate) fn decode_strings(payload: &[u8]) -> Result<Vec<(String, String)>> {
    let bad = |what: &str| Error::Malformed(format!("metadata table: {what}"));
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = payload
            .get(pos..pos.checked_add(n).ok_or_else(|| bad("length overflow"))?)
            .ok_or_else(|| bad("truncated"))?;
        pos += n;
        Ok(s)
    };
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize;
    let count = u32_at(take(4)?);
    let mut out = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let mut pair = [String::new(), String::new()];
        for s in &mut pair {
            let len = u32_at(take(4)?);
            *s = String::from_utf8(take(len)?.to_vec()).map_err(|_| bad("invalid UTF-8"))?;
        }
        let [k, v] = pair;
        out.push((k, v));
    }
    if pos != payload.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(out)
}
