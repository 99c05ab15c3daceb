//! OpenDAFF magnitude-spectrum balloons (file format version 1.7).
//!
//! Angles: DAFF `alpha` is our azimuth; DAFF `beta` runs from the south
//! pole (0°) to the north pole (180°), so `beta = 180° − colatitude`. Each
//! pole is one record. Records are ordered by increasing beta, then alpha.
//! The mapping is repeated in the file's metadata block.

use std::path::Path;

use nalgebra::DMatrix;

use crate::bands::{BAND_COUNT, NOMINAL_CENTERS};
use crate::error::{Error, Result};
use crate::firgen::{frequency_response, FirBank};
use crate::geometry::{make_equiangular_grid, SphericalGrid};
use crate::interpolate::InterpolatedDirectivity;

use super::{read_bytes, write_bytes};

pub const SIGNATURE: &[u8; 2] = b"FW";
/// Version 1.7 as stored in the file header.
pub const FILE_FORMAT_VERSION: i32 = 170;
pub const CONTENT_MAGNITUDE_SPECTRUM: i32 = 1;
pub const QUANTIZATION_FLOAT32: i32 = 2;

const BLOCK_MAIN_HEADER: i32 = 1;
const BLOCK_CONTENT_HEADER: i32 = 2;
const BLOCK_RECORD_DESCRIPTOR: i32 = 3;
const BLOCK_DATA: i32 = 4;
const BLOCK_METADATA: i32 = 5;
const METADATA_STRING: i32 = 3;

/// Magnitudes on an equiangular grid, one row per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DaffBalloon {
    grid: SphericalGrid,
    step: f64,
    frequencies: Vec<f64>,
    magnitudes: DMatrix<f64>,
}

impl DaffBalloon {
    pub fn new(
        grid: SphericalGrid,
        frequencies: Vec<f64>,
        magnitudes: DMatrix<f64>,
    ) -> Result<Self> {
        let step = grid
            .equiangular_step()
            .ok_or_else(|| Error::InvalidGrid("DAFF output needs an equiangular grid".into()))?;
        if magnitudes.nrows() != grid.len() || magnitudes.ncols() != frequencies.len() {
            return Err(Error::Dimension(format!(
                "magnitudes are {}x{}, expected {}x{}",
                magnitudes.nrows(),
                magnitudes.ncols(),
                grid.len(),
                frequencies.len()
            )));
        }
        if frequencies.is_empty() {
            return Err(Error::EmptyInput("no frequencies".into()));
        }
        if magnitudes.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidSignal(
                "magnitudes must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            grid,
            step,
            frequencies,
            magnitudes,
        })
    }

    pub fn from_interpolated(hi: &InterpolatedDirectivity) -> Result<Self> {
        if hi.bands() != BAND_COUNT {
            return Err(Error::Dimension(format!(
                "{} bands, expected {BAND_COUNT}",
                hi.bands()
            )));
        }
        Self::new(
            hi.grid().clone(),
            NOMINAL_CENTERS.to_vec(),
            hi.pressures().clone(),
        )
    }

    /// Filter magnitudes at the nominal band centres.
    pub fn from_fir_bank(bank: &FirBank) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..bank.grid().len())
            .map(|r| frequency_response(&bank.filter(r), bank.sample_rate(), &NOMINAL_CENTERS))
            .collect();
        let m = DMatrix::from_fn(rows.len(), BAND_COUNT, |r, k| rows[r][k]);
        Self::new(bank.grid().clone(), NOMINAL_CENTERS.to_vec(), m)
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn magnitudes(&self) -> &DMatrix<f64> {
        &self.magnitudes
    }

    fn alpha_points(&self) -> usize {
        (360.0 / self.step).round() as usize
    }

    fn beta_points(&self) -> usize {
        (180.0 / self.step).round() as usize + 1
    }

    /// Grid row of each DAFF record.
    fn record_rows(&self) -> Vec<usize> {
        let alphas = self.alpha_points();
        let rings = self.beta_points() - 2;
        let south = self.grid.len() - 1;
        let mut rows = vec![south];
        for b in 1..=rings {
            let ring = rings + 1 - b;
            rows.extend((0..alphas).map(|a| 1 + (ring - 1) * alphas + a));
        }
        rows.push(0);
        rows
    }

    pub fn encode(&self) -> Vec<u8> {
        let records = self.record_rows();
        let n = self.frequencies.len();
        let mut main = Vec::new();
        let step = self.step as f32;
        for v in [
            CONTENT_MAGNITUDE_SPECTRUM,
            QUANTIZATION_FLOAT32,
            1,
            records.len() as i32,
            n as i32,
            0,
            self.alpha_points() as i32,
        ] {
            main.extend_from_slice(&v.to_le_bytes());
        }
        main.extend_from_slice(&0f32.to_le_bytes());
        main.extend_from_slice(&(360.0 - step).to_le_bytes());
        main.extend_from_slice(&(self.beta_points() as i32).to_le_bytes());
        for v in [0f32, 180.0, 0.0, 0.0, 0.0] {
            main.extend_from_slice(&v.to_le_bytes());
        }

        let max = self.magnitudes.iter().fold(0.0f64, |a, v| a.max(*v)) as f32;
        let mut content = max.to_le_bytes().to_vec();
        content.extend_from_slice(&(n as i32).to_le_bytes());
        for f in &self.frequencies {
            content.extend_from_slice(&(*f as f32).to_le_bytes());
        }

        let mut descriptor = Vec::new();
        let mut data = Vec::new();
        for row in &records {
            descriptor.extend_from_slice(&(data.len() as u64).to_le_bytes());
            for k in 0..n {
                data.extend_from_slice(&(self.magnitudes[(*row, k)] as f32).to_le_bytes());
            }
        }

        let entries = [
            ("alpha", "azimuth, degrees from +x towards +y"),
            ("beta", "180 - colatitude, degrees; 0 = south pole (-z)"),
            ("records", "poles stored once; increasing beta, then alpha"),
        ];
        let mut metadata = (entries.len() as i32).to_le_bytes().to_vec();
        for (k, v) in entries {
            metadata.extend_from_slice(&METADATA_STRING.to_le_bytes());
            for s in [k, v] {
                metadata.extend_from_slice(s.as_bytes());
                metadata.push(0);
            }
        }

        let blocks = [
            (BLOCK_MAIN_HEADER, main),
            (BLOCK_CONTENT_HEADER, content),
            (BLOCK_RECORD_DESCRIPTOR, descriptor),
            (BLOCK_DATA, data),
            (BLOCK_METADATA, metadata),
        ];
        let mut out = SIGNATURE.to_vec();
        out.extend_from_slice(&FILE_FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(blocks.len() as i32).to_le_bytes());
        let mut offset = (out.len() + 20 * blocks.len()) as u64;
        for (id, payload) in &blocks {
            out.extend_from_slice(&id.to_le_bytes());
            out.extend_from_slice(&offset.to_le_bytes());
            out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
            offset += payload.len() as u64;
        }
        for (_, payload) in blocks {
            out.extend_from_slice(&payload);
        }
        out
    }

    /// Parses a file written by [`DaffBalloon::encode`]; values come back
    /// at single precision.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |what: String| Error::Malformed(format!("DAFF: {what}"));
        let i32_at = |pos: usize| -> Result<i32> {
            bytes
                .get(pos..pos + 4)
                .map(|b| i32::from_le_bytes(b.try_into().expect("4 bytes")))
                .ok_or_else(|| bad(format!("truncated at byte {pos}")))
        };
        let f32_at = |pos: usize| -> Result<f32> { i32_at(pos).map(|v| f32::from_bits(v as u32)) };
        let u64_at = |pos: usize| -> Result<u64> {
            bytes
                .get(pos..pos + 8)
                .map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
                .ok_or_else(|| bad(format!("truncated at byte {pos}")))
        };
        if bytes.get(..2) != Some(SIGNATURE.as_slice()) {
            return Err(bad("missing FW signature".into()));
        }
        let version = i32_at(2)?;
        if version != FILE_FORMAT_VERSION {
            return Err(bad(format!("unsupported file format version {version}")));
        }
        let count = i32_at(6)?;
        let mut blocks = std::collections::HashMap::new();
        for b in 0..count.max(0) as usize {
            let base = 10 + 20 * b;
            let (id, offset, size) = (i32_at(base)?, u64_at(base + 4)?, u64_at(base + 12)?);
            let start = offset as usize;
            let end = start
                .checked_add(size as usize)
                .filter(|e| *e <= bytes.len())
                .ok_or_else(|| bad(format!("block {id} overruns the file")))?;
            blocks.insert(id, start..end);
        }
        let block = |id: i32| {
            blocks
                .get(&id)
                .cloned()
                .ok_or_else(|| bad(format!("missing block {id}")))
        };
        let main = block(BLOCK_MAIN_HEADER)?.start;
        if i32_at(main)? != CONTENT_MAGNITUDE_SPECTRUM || i32_at(main + 4)? != QUANTIZATION_FLOAT32
        {
            return Err(bad("only float32 magnitude spectra are supported".into()));
        }
        let channels = i32_at(main + 8)?;
        let records = i32_at(main + 12)? as usize;
        let n = i32_at(main + 16)? as usize;
        let alphas = i32_at(main + 24)? as usize;
        let betas = i32_at(main + 36)? as usize;
        if channels != 1 || alphas == 0 || betas < 3 || 360 % alphas != 0 {
            return Err(bad(format!(
                "unsupported layout {alphas}x{betas}, {channels} channels"
            )));
        }
        let step = 360.0 / alphas as f64;
        let grid = make_equiangular_grid(step)?;
        if records != grid.len() || (betas - 1) as f64 * step != 180.0 {
            return Err(bad(format!(
                "{records} records do not match a {step}° grid"
            )));
        }
        let content = block(BLOCK_CONTENT_HEADER)?.start;
        if i32_at(content + 4)? as usize != n {
            return Err(bad("frequency count differs between headers".into()));
        }
        let frequencies = (0..n)
            .map(|k| f32_at(content + 8 + 4 * k).map(f64::from))
            .collect::<Result<Vec<_>>>()?;
        let descriptor = block(BLOCK_RECORD_DESCRIPTOR)?.start;
        let data = block(BLOCK_DATA)?;
        let mut magnitudes = DMatrix::zeros(records, n);
        let shell = Self {
            grid: grid.clone(),
            step,
            frequencies: frequencies.clone(),
            magnitudes: DMatrix::zeros(0, 0),
        };
        for (i, row) in shell.record_rows().into_iter().enumerate() {
            let offset = data.start + u64_at(descriptor + 8 * i)? as usize;
            if offset + 4 * n > data.end {
                return Err(bad(format!("record {i} overruns the data block")));
            }
            for k in 0..n {
                magnitudes[(row, k)] = f64::from(f32_at(offset + 4 * k)?);
            }
        }
        Self::new(grid, frequencies, magnitudes)
    }
}

pub fn write_opendaff(balloon: &DaffBalloon, path: &Path) -> Result<()> {
    write_bytes(path, &balloon.encode())
}

pub fn read_opendaff(path: &Path) -> Result<DaffBalloon> {
    DaffBalloon::decode(&read_bytes(path)?)
}
