//! Directivity documents in the portable `.sofalite` encoding.
//!
//! The logical model mirrors the FreeFieldDirectivityTF convention:
//! `Data.Real` and `Data.Imag` of shape M×R×N with M = 1, the frequency
//! vector `N`, receiver positions and global metadata strings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bands::{BAND_COUNT, NOMINAL_CENTERS};
use crate::directivity::{BandDirectivity, EqualizationState, SingleToneDirectivity};
use crate::error::{Error, Result};
use crate::geometry::SphericalGrid;
use crate::partials::{note_name, Dynamic, NoteContext};
use crate::recording::RecordingSet;
use crate::spectral::{forward_spectrum, inverse_spectrum, to_double_sided, to_single_sided};
use crate::spectral::{Spectrum, TimeSignal};

use super::naming::{check_source_name, DocumentName};
use super::{decode_strings, dimension, encode_strings, DocumentKind};
use super::{read_bytes, read_grid, write_bytes, write_grid, ChunkReader, ChunkWriter};

pub const MAGIC: &[u8; 8] = b"SOFALITE";
pub const VERSION: (u16, u16) = (1, 0);

/// Value stored under `ReceiverPosition`: type and units of the position
/// table.
pub const RECEIVER_POSITION_TYPE: &str =
    "spherical; azimuth degree, colatitude degree, radius metre";

/// Default `SourceView_Reference`.
pub const DEFAULT_SOURCE_VIEW: &str = "musician facing the positive x-axis";

/// Relative tolerance for zero imaginary parts at DC and Nyquist of recordings.
const ORIGIN_SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetadataKey {
    SourceName,
    Musician,
    SourceManufacturer,
    SourceViewReference,
    ReceiverPosition,
    Description,
    MidiNote,
    SourceTuningFrequency,
    SteadyPart,
}

impl MetadataKey {
    pub const ALL: [MetadataKey; 9] = [
        MetadataKey::SourceName,
        MetadataKey::Musician,
        MetadataKey::SourceManufacturer,
        MetadataKey::SourceViewReference,
        MetadataKey::ReceiverPosition,
        MetadataKey::Description,
        MetadataKey::MidiNote,
        MetadataKey::SourceTuningFrequency,
        MetadataKey::SteadyPart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetadataKey::SourceName => "GLOBAL_SourceName",
            MetadataKey::Musician => "GLOBAL_Musician",
            MetadataKey::SourceManufacturer => "GLOBAL_SourceManufacturer",
            MetadataKey::SourceViewReference => "SourceView_Reference",
            MetadataKey::ReceiverPosition => "ReceiverPosition",
            MetadataKey::Description => "GLOBAL_Description",
            MetadataKey::MidiNote => "MidiNote",
            MetadataKey::SourceTuningFrequency => "SourceTuningFrequency",
            MetadataKey::SteadyPart => "SteadyPart",
        }
    }

    /// Note-specific keys are absent from third-octave documents and
    /// mandatory elsewhere; all other keys are always mandatory.
    pub fn is_note_specific(self) -> bool {
        matches!(
            self,
            MetadataKey::MidiNote | MetadataKey::SourceTuningFrequency | MetadataKey::SteadyPart
        )
    }

    pub fn required_for(self, kind: DocumentKind) -> bool {
        !(self.is_note_specific() && kind == DocumentKind::ThirdOctave)
    }
}

impl fmt::Display for MetadataKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Instrument and session strings shared by every document of a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceInfo {
    pub source_name: String,
    pub musician: String,
    pub manufacturer: String,
    pub source_view_reference: String,
}

impl SourceInfo {
    pub fn new(source_name: &str) -> Result<Self> {
        check_source_name(source_name)?;
        Ok(Self {
            source_name: source_name.to_owned(),
            musician: String::new(),
            manufacturer: String::new(),
            source_view_reference: DEFAULT_SOURCE_VIEW.to_owned(),
        })
    }

    fn metadata(&self) -> BTreeMap<String, String> {
        [
            (MetadataKey::SourceName, self.source_name.as_str()),
            (MetadataKey::Musician, &self.musician),
            (MetadataKey::SourceManufacturer, &self.manufacturer),
            (
                MetadataKey::SourceViewReference,
                &self.source_view_reference,
            ),
            (MetadataKey::ReceiverPosition, RECEIVER_POSITION_TYPE),
        ]
        .into_iter()
        .map(|(k, v)| (k.name().to_owned(), v.to_owned()))
        .collect()
    }
}

/// `key = value; key = value`, e.g. `note = A4; dynamic = ff`.
pub fn format_description(pairs: &[(&str, &str)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn parse_description(text: &str) -> Result<Vec<(String, String)>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::InvalidDocument(format!("description item {item:?} is not key = value"))
            })?;
            Ok((k.trim().to_owned(), v.trim().to_owned()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectivityDocument {
    kind: DocumentKind,
    data_real: DMatrix<f64>,
    data_imag: DMatrix<f64>,
    frequencies: Vec<f64>,
    receivers: SphericalGrid,
    metadata: BTreeMap<String, String>,
}

impl DirectivityDocument {
    /// `data_real` and `data_imag` are R×N (the single measurement M = 1 is
    /// implicit). Every invariant of `kind` is checked.
    pub fn new(
        kind: DocumentKind,
        data_real: DMatrix<f64>,
        data_imag: DMatrix<f64>,
        frequencies: Vec<f64>,
        receivers: SphericalGrid,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let doc = Self {
            kind,
            data_real,
            data_imag,
            frequencies,
            receivers,
            metadata,
        };
        doc.validate()?;
        Ok(doc)
    }

    /// Calibrated recordings as single-sided spectra with interior bins
    /// doubled. Odd-length recordings are zero-padded by one sample.
    pub fn from_recording(
        rec: &RecordingSet,
        info: &SourceInfo,
        receivers: &SphericalGrid,
    ) -> Result<Self> {
        let spectra = rec
            .channels()
            .iter()
            .map(|c| to_single_sided(&forward_spectrum(c)?))
            .collect::<Result<Vec<Spectrum>>>()?;
        let n = spectra[0].bins().len();
        let real = DMatrix::from_fn(spectra.len(), n, |r, k| spectra[r].bins()[k].re);
        let imag = DMatrix::from_fn(spectra.len(), n, |r, k| spectra[r].bins()[k].im);
        let ctx = rec.context();
        let mut metadata = info.metadata();
        note_metadata(&mut metadata, ctx, true);
        Self::new(
            DocumentKind::Recordings,
            real,
            imag,
            spectra[0].frequencies().to_vec(),
            receivers.clone(),
            metadata,
        )
    }

    /// Per-partial pressures; N is the number of partials including f0.
    pub fn from_single_tone(
        tone: &SingleToneDirectivity,
        ctx: &NoteContext,
        info: &SourceInfo,
    ) -> Result<Self> {
        let real = tone.pressures().clone();
        let imag = DMatrix::zeros(real.nrows(), real.ncols());
        let mut metadata = info.metadata();
        note_metadata(&mut metadata, ctx, false);
        Self::new(
            DocumentKind::SingleNote,
            real,
            imag,
            tone.partial_frequencies().to_vec(),
            tone.grid().clone(),
            metadata,
        )
    }

    /// Band pressures at the 30 nominal centre frequencies.
    pub fn from_band_directivity(
        d: &BandDirectivity,
        dynamic: Dynamic,
        info: &SourceInfo,
    ) -> Result<Self> {
        let real = d.pressures().clone();
        let imag = DMatrix::zeros(real.nrows(), real.ncols());
        let mut metadata = info.metadata();
        metadata.insert(
            MetadataKey::Description.name().to_owned(),
            format_description(&[("dynamic", &dynamic.to_string())]),
        );
        Self::new(
            DocumentKind::ThirdOctave,
            real,
            imag,
            NOMINAL_CENTERS.to_vec(),
            d.grid().clone(),
            metadata,
        )
    }

    pub fn kind(&self) -> DocumentKind {
        self.kind
    }

    /// R×N real part of the single measurement.
    pub fn data_real(&self) -> &DMatrix<f64> {
        &self.data_real
    }

    pub fn data_imag(&self) -> &DMatrix<f64> {
        &self.data_imag
    }

    /// (M, R, N).
    pub fn shape(&self) -> (usize, usize, usize) {
        (1, self.data_real.nrows(), self.data_real.ncols())
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn receivers(&self) -> &SphericalGrid {
        &self.receivers
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn get(&self, key: MetadataKey) -> Option<&str> {
        self.metadata.get(key.name()).map(String::as_str)
    }

    pub fn source_name(&self) -> &str {
        self.get(MetadataKey::SourceName).unwrap_or_default()
    }

    pub fn midi_note(&self) -> Option<u8> {
        self.get(MetadataKey::MidiNote).and_then(|s| s.parse().ok())
    }

    pub fn tuning_frequency(&self) -> Option<f64> {
        self.get(MetadataKey::SourceTuningFrequency)
            .and_then(|s| s.parse().ok())
    }

    pub fn steady_part(&self) -> Option<(usize, usize)> {
        self.get(MetadataKey::SteadyPart)
            .and_then(|s| parse_steady_part(s).ok())
    }

    /// The `dynamic` entry of `GLOBAL_Description`.
    pub fn dynamic(&self) -> Option<Dynamic> {
        description_value(self.get(MetadataKey::Description)?, "dynamic")?
            .parse()
            .ok()
    }

    pub fn name(&self) -> Result<DocumentName> {
        let source = self.source_name();
        match self.kind {
            DocumentKind::Recordings => DocumentName::recordings(
                source,
                self.dynamic()
                    .ok_or_else(|| missing("dynamic", self.kind))?,
                self.midi_note()
                    .ok_or_else(|| missing("MidiNote", self.kind))?,
            ),
            DocumentKind::SingleNote => DocumentName::single_note(
                source,
                self.midi_note()
                    .ok_or_else(|| missing("MidiNote", self.kind))?,
            ),
            DocumentKind::ThirdOctave => DocumentName::third_octave(source),
        }
    }

    /// Checks dimensions, kind-specific data invariants and metadata.
    pub fn validate(&self) -> Result<()> {
        self.validate_dimensions()?;
        self.validate_data()?;
        self.validate_metadata()
    }

    fn validate_dimensions(&self) -> Result<()> {
        let (r, n) = self.data_real.shape();
        if self.data_imag.shape() != (r, n) {
            return Err(Error::InvalidDocument(format!(
                "Data.Real is 1x{r}x{n} but Data.Imag is 1x{}x{}",
                self.data_imag.nrows(),
                self.data_imag.ncols()
            )));
        }
        if r != self.receivers.len() {
            return Err(Error::InvalidDocument(format!(
                "{r} receivers in the data, {} receiver positions",
                self.receivers.len()
            )));
        }
        if n == 0 || n != self.frequencies.len() {
            return Err(Error::InvalidDocument(format!(
                "data has N = {n}, frequency vector has {} entries",
                self.frequencies.len()
            )));
        }
        if self
            .data_real
            .iter()
            .chain(self.data_imag.iter())
            .chain(&self.frequencies)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidDocument(
                "non-finite value in data or N".into(),
            ));
        }
        Ok(())
    }

    fn validate_data(&self) -> Result<()> {
        let f = &self.frequencies;
        match self.kind {
            DocumentKind::Recordings => {
                let n = f.len();
                if n < 2 || f[0] != 0.0 || !(f[1] > 0.0) {
                    return Err(Error::InvalidDocument(
                        "recordings need N >= 2 bins starting at 0 Hz".into(),
                    ));
                }
                let df = f[n - 1] / (n - 1) as f64;
                if let Some(k) = (0..n).find(|k| (f[*k] - *k as f64 * df).abs() > 1e-9 * f[n - 1]) {
                    return Err(Error::InvalidDocument(format!(
                        "bin {k} at {} Hz is off the uniform grid of {df} Hz",
                        f[k]
                    )));
                }
                let scale = self
                    .data_real
                    .iter()
                    .zip(self.data_imag.iter())
                    .map(|(re, im)| re.hypot(*im))
                    .fold(0.0, f64::max);
                let edge = self
                    .data_imag
                    .column(0)
                    .iter()
                    .chain(self.data_imag.column(n - 1).iter())
                    .fold(0.0f64, |a, v| a.max(v.abs()));
                if edge > ORIGIN_SYMMETRY_TOLERANCE * scale {
                    return Err(Error::InvalidDocument(format!(
                        "DC or Nyquist bin has imaginary part {edge:e}; not the spectrum of a real signal"
                    )));
                }
            }
            DocumentKind::SingleNote => {
                if f[0] <= 0.0 || f.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidDocument(
                        "partial frequencies must be positive and increasing".into(),
                    ));
                }
                self.require_zero_imag()?;
            }
            DocumentKind::ThirdOctave => {
                if f.len() != BAND_COUNT || f.iter().zip(&NOMINAL_CENTERS).any(|(a, b)| a != b) {
                    return Err(Error::InvalidDocument(format!(
                        "third-octave N must be the {BAND_COUNT} nominal centres 25 Hz to 20 kHz"
                    )));
                }
                self.require_zero_imag()?;
            }
        }
        Ok(())
    }

    fn require_zero_imag(&self) -> Result<()> {
        if self.data_imag.iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidDocument(format!(
                "Data.Imag of a {} document must contain only zeros",
                self.kind
            )));
        }
        Ok(())
    }

    fn validate_metadata(&self) -> Result<()> {
        for key in MetadataKey::ALL {
            let present = self.metadata.contains_key(key.name());
            if key.required_for(self.kind) && !present {
                return Err(missing(key.name(), self.kind));
            }
            if !key.required_for(self.kind) && present {
                return Err(Error::InvalidDocument(format!(
                    "{key} is not part of {} documents",
                    self.kind
                )));
            }
        }
        check_source_name(self.source_name())?;
        let description =
            parse_description(self.get(MetadataKey::Description).unwrap_or_default())?;
        let lookup = |k: &str| {
            description
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
        };
        if let Some(d) = lookup("dynamic") {
            d.parse::<Dynamic>()?;
        }
        if self.kind == DocumentKind::ThirdOctave {
            return Ok(());
        }
        let midi_text = self.get(MetadataKey::MidiNote).unwrap_or_default();
        let midi = midi_text
            .parse::<u8>()
            .ok()
            .filter(|m| *m <= 127 && m.to_string() == midi_text)
            .ok_or_else(|| {
                Error::InvalidDocument(format!("MidiNote {midi_text:?} is not 0..=127"))
            })?;
        let note = lookup("note").ok_or_else(|| missing("GLOBAL_Description note", self.kind))?;
        if note != note_name(midi) {
            return Err(Error::InvalidDocument(format!(
                "description note {note} does not match MidiNote {midi} ({})",
                note_name(midi)
            )));
        }
        if self.kind == DocumentKind::Recordings && lookup("dynamic").is_none() {
            return Err(missing("GLOBAL_Description dynamic", self.kind));
        }
        let tuning = self
            .get(MetadataKey::SourceTuningFrequency)
            .unwrap_or_default();
        if !tuning
            .parse::<f64>()
            .is_ok_and(|t| t.is_finite() && t > 0.0)
        {
            return Err(Error::InvalidDocument(format!(
                "SourceTuningFrequency {tuning:?} is not a positive number"
            )));
        }
        let (_, end) = parse_steady_part(self.get(MetadataKey::SteadyPart).unwrap_or_default())?;
        if self.kind == DocumentKind::Recordings && end > 2 * (self.frequencies.len() - 1) {
            return Err(Error::InvalidDocument(format!(
                "SteadyPart ends at {end}, beyond the {} recorded samples",
                2 * (self.frequencies.len() - 1)
            )));
        }
        Ok(())
    }

    /// Note metadata of a recordings or single-note document.
    pub fn note_context(&self) -> Result<NoteContext> {
        let err = || missing("note metadata", self.kind);
        NoteContext::new(
            self.midi_note().ok_or_else(err)?,
            self.tuning_frequency().ok_or_else(err)?,
            self.dynamic().unwrap_or(Dynamic::Ff),
            self.steady_part().ok_or_else(err)?,
        )
    }

    /// Sample rate implied by the recordings bin grid (N − 1 bins span
    /// half the rate).
    pub fn sample_rate(&self) -> Option<f64> {
        (self.kind == DocumentKind::Recordings).then(|| {
            let fs = 2.0 * self.frequencies[self.frequencies.len() - 1];
            let rounded = (fs * 1e6).round() / 1e6;
            if (rounded - fs).abs() <= 1e-9 * fs {
                rounded
            } else {
                fs
            }
        })
    }

    /// Time signals of a recordings document, 2(N − 1) samples per channel.
    pub fn to_signals(&self) -> Result<Vec<TimeSignal>> {
        let fs = self.sample_rate().ok_or_else(|| {
            Error::InvalidDocument(format!("{} documents carry no time signals", self.kind))
        })?;
        (0..self.data_real.nrows())
            .map(|r| {
                let bins = self
                    .data_real
                    .row(r)
                    .iter()
                    .zip(self.data_imag.row(r).iter())
                    .map(|(re, im)| Complex64::new(*re, *im))
                    .collect();
                let single = Spectrum::single_sided(bins, fs, false)?;
                inverse_spectrum(&to_double_sided(&single)?)
            })
            .collect()
    }

    pub fn to_recording_set(&self) -> Result<RecordingSet> {
        RecordingSet::new(self.to_signals()?, self.note_context()?)
    }

    pub fn to_single_tone(&self) -> Result<SingleToneDirectivity> {
        self.expect_kind(DocumentKind::SingleNote)?;
        SingleToneDirectivity::new(
            self.frequencies.clone(),
            self.data_real.clone(),
            self.receivers.clone(),
        )
    }

    /// Third-octave data as a calibrated band directivity. Partial counts
    /// are not stored; nonzero bands count one partial.
    pub fn to_band_directivity(&self) -> Result<BandDirectivity> {
        self.expect_kind(DocumentKind::ThirdOctave)?;
        let counts = self
            .data_real
            .column_iter()
            .map(|c| usize::from(c.iter().any(|v| *v > 0.0)))
            .collect();
        BandDirectivity::new(
            self.data_real.clone(),
            counts,
            EqualizationState::Calibrated,
            self.receivers.clone(),
        )
    }

    fn expect_kind(&self, kind: DocumentKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidDocument(format!(
                "expected a {kind} document, found {}",
                self.kind
            )));
        }
        Ok(())
    }

    pub fn encode(&self) -> Vec<u8> {
        let (m, r, n) = self.shape();
        let mut w = ChunkWriter::new(MAGIC, VERSION.0, VERSION.1);
        w.chunk(b"KIND", &[self.kind.code()]);
        let dims: Vec<u8> = [m, r, n]
            .iter()
            .flat_map(|d| (*d as u64).to_le_bytes())
            .collect();
        w.chunk(b"DIMS", &dims);
        w.f64_chunk(b"FREQ", self.frequencies.iter().copied());
        write_grid(&mut w, &self.receivers);
        for (tag, data) in [(b"REAL", &self.data_real), (b"IMAG", &self.data_imag)] {
            w.f64_chunk(tag, (0..r).flat_map(|i| (0..n).map(move |k| data[(i, k)])));
        }
        w.chunk(
            b"META",
            &encode_strings(self.metadata.iter().map(|(k, v)| (k.as_str(), v.as_str()))),
        );
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let (mut rd, major, minor) = ChunkReader::new(bytes, MAGIC)?;
        if major != VERSION.0 {
            return Err(Error::Malformed(format!(
                "unsupported version {major}.{minor}"
            )));
        }
        let kind = match rd.expect(b"KIND")? {
            [code] => DocumentKind::from_code(*code)?,
            other => {
                return Err(Error::Malformed(format!(
                    "KIND chunk of {} bytes",
                    other.len()
                )))
            }
        };
        let [m, r, n] = rd.u64s::<3>(b"DIMS")?;
        if m != 1 {
            return Err(Error::InvalidDocument(format!("M = {m}; must be 1")));
        }
        let (r, n) = (dimension(r, "R")?, dimension(n, "N")?);
        let size = r
            .checked_mul(n)
            .filter(|s| s.saturating_mul(8) <= bytes.len())
            .ok_or_else(|| Error::Malformed(format!("dimensions {r}x{n} exceed the file")))?;
        let frequencies = rd.f64s(b"FREQ", n)?;
        let receivers = read_grid(&mut rd, r)?;
        let real = rd.f64s(b"REAL", size)?;
        let imag = rd.f64s(b"IMAG", size)?;
        let mut metadata = BTreeMap::new();
        for (k, v) in decode_strings(rd.expect(b"META")?)? {
            if metadata.insert(k.clone(), v).is_some() {
                return Err(Error::Malformed(format!("duplicate metadata key {k}")));
            }
        }
        rd.finish()?;
        Self::new(
            kind,
            DMatrix::from_row_slice(r, n, &real),
            DMatrix::from_row_slice(r, n, &imag),
            frequencies,
            receivers,
            metadata,
        )
    }
}

fn note_metadata(metadata: &mut BTreeMap<String, String>, ctx: &NoteContext, with_dynamic: bool) {
    let note = ctx.note_name();
    let dynamic = ctx.dynamic().to_string();
    let description = if with_dynamic {
        format_description(&[("note", &note), ("dynamic", &dynamic)])
    } else {
        format_description(&[("note", &note)])
    };
    let (start, end) = ctx.steady_bounds();
    for (k, v) in [
        (MetadataKey::Description, description),
        (MetadataKey::MidiNote, ctx.midi_note().to_string()),
        (
            MetadataKey::SourceTuningFrequency,
            ctx.tuning_frequency().to_string(),
        ),
        (MetadataKey::SteadyPart, format!("{start} {end}")),
    ] {
        metadata.insert(k.name().to_owned(), v);
    }
}

fn description_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.split(';').find_map(|item| {
        let (k, v) = item.split_once('=')?;
        (k.trim() == key).then(|| v.trim())
    })
}

/// `"start end"`, half-open sample interval.
fn parse_steady_part(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidDocument(format!("SteadyPart {text:?} is not \"start end\""));
    let mut it = text.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) if a < b => Ok((a, b)),
        _ => Err(bad()),
    }
}

fn missing(key: &str, kind: DocumentKind) -> Error {
    Error::MissingMetadata {
        key: key.to_owned(),
        kind: kind.to_string(),
    }
}

/// Writes `doc` into `dir` under its scheme name and returns the path.
pub fn write_document(doc: &DirectivityDocument, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(doc.name()?.file_name());
    write_document_to(doc, &path)?;
    Ok(path)
}

/// Writes `doc` to an explicit path.
pub fn write_document_to(doc: &DirectivityDocument, path: &Path) -> Result<()> {
    doc.validate()?;
    write_bytes(path, &doc.encode())
}

pub fn read_document(path: &Path) -> Result<DirectivityDocument> {
    DirectivityDocument::decode(&read_bytes(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::measurement_layout;

    fn info() -> SourceInfo {
        SourceInfo {
            musician: "A. Player".into(),
            manufacturer: "Workshop".into(),
            ..SourceInfo::new("Oboe_modern").unwrap()
        }
    }

    fn band_doc() -> DirectivityDocument {
        let grid = measurement_layout();
        let p = DMatrix::from_fn(32, BAND_COUNT, |r, m| (r + m) as f64 * 0.01);
        let d = BandDirectivity::new(p, vec![1; BAND_COUNT], EqualizationState::Calibrated, grid)
            .unwrap();
        DirectivityDocument::from_band_directivity(&d, Dynamic::Ff, &info()).unwrap()
    }

    #[test]
    fn third_octave_document_layout() {
        let doc = band_doc();
        assert_eq!(doc.shape(), (1, 32, 30));
        assert_eq!(doc.frequencies()[0], 25.0);
        assert_eq!(doc.frequencies()[29], 20_000.0);
        assert_eq!(
            doc.name().unwrap().file_name(),
            "Oboe_modern_3rdOctave.sofalite"
        );
        assert!(doc.get(MetadataKey::MidiNote).is_none());
        assert_eq!(doc.get(MetadataKey::Description), Some("dynamic = ff"));
        let back = DirectivityDocument::decode(&doc.encode()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.encode(), doc.encode());
    }

    #[test]
    fn single_note_document_counts_partials() {
        let grid = measurement_layout();
        let freqs: Vec<f64> = (1..=13).map(|i| 220.0 * i as f64).collect();
        let p = DMatrix::from_fn(32, 13, |r, i| 1.0 / (1 + r + i) as f64);
        let tone = SingleToneDirectivity::new(freqs, p, grid).unwrap();
        let ctx = NoteContext::new(57, 440.0, Dynamic::Ff, (100, 2000)).unwrap();
        let doc = DirectivityDocument::from_single_tone(&tone, &ctx, &info()).unwrap();
        assert_eq!(doc.shape(), (1, 32, 13));
        assert_eq!(doc.get(MetadataKey::Description), Some("note = A3"));
        assert_eq!(doc.get(MetadataKey::SteadyPart), Some("100 2000"));
        assert_eq!(
            doc.name().unwrap().file_name(),
            "Oboe_modern_57_singleTones.sofalite"
        );
        assert_eq!(doc.to_single_tone().unwrap(), tone);
        assert_eq!(DirectivityDocument::decode(&doc.encode()).unwrap(), doc);
    }

    #[test]
    fn recordings_reconstruct_their_signals() {
        let grid = measurement_layout();
        let channels: Vec<TimeSignal> = (0..32)
            .map(|q| {
                let x = (0..301)
                    .map(|n| ((n * (q + 3)) % 17) as f64 / 17.0 - 0.5)
                    .collect();
                TimeSignal::new(x, 44_100.0).unwrap()
            })
            .collect();
        let ctx = NoteContext::new(69, 442.0, Dynamic::Pp, (10, 290)).unwrap();
        let rec = RecordingSet::new(channels.clone(), ctx).unwrap();
        let doc = DirectivityDocument::from_recording(&rec, &info(), &grid).unwrap();
        assert_eq!(doc.shape(), (1, 32, 152));
        assert_eq!(doc.sample_rate(), Some(44_100.0));
        assert_eq!(
            doc.get(MetadataKey::Description),
            Some("note = A4; dynamic = pp")
        );
        assert_eq!(
            doc.name().unwrap().file_name(),
            "Oboe_modern_pp_69_recordings.sofalite"
        );
        let back = doc.to_recording_set().unwrap();
        assert_eq!(*back.context(), ctx);
        for (a, b) in back.channels().iter().zip(&channels) {
            // odd length: one trailing zero of padding
            assert_eq!(a.len(), 302);
            assert!(a.samples()[301].abs() < 1e-12);
            for (x, y) in a.samples().iter().zip(b.samples()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn refuses_kind_metadata_mismatch() {
        let doc = band_doc();
        let mut meta = doc.metadata().clone();
        meta.insert("MidiNote".into(), "60".into());
        let err = DirectivityDocument::new(
            DocumentKind::ThirdOctave,
            doc.data_real().clone(),
            doc.data_imag().clone(),
            doc.frequencies().to_vec(),
            doc.receivers().clone(),
            meta,
        );
        assert!(matches!(err, Err(Error::InvalidDocument(_))));
        let mut meta = doc.metadata().clone();
        meta.remove("GLOBAL_Musician");
        let err = DirectivityDocument::new(
            DocumentKind::ThirdOctave,
            doc.data_real().clone(),
            doc.data_imag().clone(),
            doc.frequencies().to_vec(),
            doc.receivers().clone(),
            meta,
        );
        assert!(matches!(err, Err(Error::MissingMetadata { .. })));
    }

    #[test]
    fn refuses_nonzero_imaginary_part() {
        let doc = band_doc();
        let mut imag = doc.data_imag().clone();
        imag[(3, 4)] = 1e-300;
        assert!(DirectivityDocument::new(
            DocumentKind::ThirdOctave,
            doc.data_real().clone(),
            imag,
            doc.frequencies().to_vec(),
            doc.receivers().clone(),
            doc.metadata().clone(),
        )
        .is_err());
    }

    #[test]
    fn decode_rejects_corruption() {
        let bytes = band_doc().encode();
        assert!(DirectivityDocument::decode(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(DirectivityDocument::decode(&extra).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(
            DirectivityDocument::decode(&magic),
            Err(Error::Malformed(_))
        ));
        let mut m2 = bytes;
        // DIMS payload starts after magic, version, KIND chunk and DIMS header
        m2[12 + 13 + 12] = 2;
        assert!(DirectivityDocument::decode(&m2).is_err());
    }

    #[test]
    fn description_grammar() {
        let d = parse_description("note = A4; dynamic = ff").unwrap();
        assert_eq!(
            d,
            vec![
                ("note".into(), "A4".into()),
                ("dynamic".into(), "ff".into())
            ]
        );
        assert!(parse_description("note A4").is_err());
        assert_eq!(
            format_description(&[("note", "A4"), ("dynamic", "ff")]),
            "note = A4; dynamic = ff"
        );
    }
}
