//! FIR banks in the `.firbank` chunk layout: one filter per grid direction.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::firgen::FirBank;

use super::{dimension, read_bytes, read_grid, write_bytes, write_grid, ChunkReader, ChunkWriter};

pub const MAGIC: &[u8; 8] = b"SOFIRBNK";
pub const VERSION: (u16, u16) = (1, 0);

pub fn encode_fir_bank(bank: &FirBank) -> Vec<u8> {
    let (r, l) = bank.taps().shape();
    let mut w = ChunkWriter::new(MAGIC, VERSION.0, VERSION.1);
    let dims: Vec<u8> = [r as u64, l as u64]
        .iter()
        .flat_map(|d| d.to_le_bytes())
        .collect();
    w.chunk(b"DIMS", &dims);
    w.f64_chunk(b"RATE", [bank.sample_rate()]);
    write_grid(&mut w, bank.grid());
    let taps = bank.taps();
    w.f64_chunk(
        b"TAPS",
        (0..r).flat_map(|i| (0..l).map(move |n| taps[(i, n)])),
    );
    w.finish()
}

pub fn decode_fir_bank(bytes: &[u8]) -> Result<FirBank> {
    let (mut rd, major, minor) = ChunkReader::new(bytes, MAGIC)?;
    if major != VERSION.0 {
        return Err(Error::Malformed(format!(
            "unsupported version {major}.{minor}"
        )));
    }
    let [r, l] = rd.u64s::<2>(b"DIMS")?;
    let (r, l) = (dimension(r, "R")?, dimension(l, "length")?);
    let size = r
        .checked_mul(l)
        .filter(|s| s.saturating_mul(8) <= bytes.len())
        .ok_or_else(|| Error::Malformed(format!("dimensions {r}x{l} exceed the file")))?;
    let rate = rd.f64s(b"RATE", 1)?[0];
    let grid = read_grid(&mut rd, r)?;
    let taps = rd.f64s(b"TAPS", size)?;
    rd.finish()?;
    FirBank::new(DMatrix::from_row_slice(r, l, &taps), rate, grid)
}

pub fn write_fir_bank(bank: &FirBank, path: &Path) -> Result<()> {
    write_bytes(path, &encode_fir_bank(bank))
}

pub fn read_fir_bank(path: &Path) -> Result<FirBank> {
    decode_fir_bank(&read_bytes(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::measurement_layout;

    #[test]
    fn round_trip_is_bit_exact() {
        let taps = DMatrix::from_fn(32, 64, |r, n| ((r * 64 + n) as f64).sin() / 3.0);
        let bank = FirBank::new(taps, 44_100.0, measurement_layout()).unwrap();
        let bytes = encode_fir_bank(&bank);
        let back = decode_fir_bank(&bytes).unwrap();
        assert_eq!(back, bank);
        assert_eq!(encode_fir_bank(&back), bytes);
        assert!(decode_fir_bank(&bytes[..bytes.len() - 3]).is_err());
    }
}
