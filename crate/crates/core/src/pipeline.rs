//! Corpus manifest and the end-to-end processing chain:
//! recordings → partials → single-note directivities → band average →
//! diffuse equalization → calibration → upsampling → DAFF balloon and FIR
//! bank.

use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::containers::naming::{check_source_name, daff_file_name, fir_bank_file_name};
use crate::containers::{
    read_recording_wav, write_document, write_fir_bank, write_opendaff, DaffBalloon,
    DirectivityDocument, SourceInfo,
};
use crate::directivity::{
    band_average, calibrate, diffuse_equalize, extract_single_tone, BandDirectivity, Calibration,
    SingleToneDirectivity,
};
use crate::error::{Error, Result};
use crate::firgen::{synthesize_bank, FirBank, DEFAULT_FIR_LENGTH};
use crate::geometry::{make_equiangular_grid, measurement_layout, SphericalGrid};
use crate::interpolate::{upsample, InterpolatedDirectivity};
use crate::partials::{
    estimate_f0, find_partials, ChannelSpectra, Dynamic, NoteContext, PartialSet,
};
use crate::recording::RecordingSet;
use crate::spectral::{welch_psd, WELCH_OVERLAP, WELCH_SEGMENTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Era {
    Modern,
    Historical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instrument {
    /// `GLOBAL_SourceName` and file name prefix.
    pub name: String,
    pub era: Era,
    #[serde(default)]
    pub musician: String,
    #[serde(default)]
    pub manufacturer: String,
    /// Frequency of A4 in Hz.
    pub tuning: f64,
    pub dynamic: Dynamic,
    #[serde(default = "default_source_view")]
    pub source_view_reference: String,
}

fn default_source_view() -> String {
    crate::containers::sofalite::DEFAULT_SOURCE_VIEW.to_owned()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoteEntry {
    pub midi: u8,
    /// Relative paths are resolved against the manifest's directory.
    pub wav: PathBuf,
    /// Half-open steady interval in samples.
    pub steady: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputOptions {
    /// Angular step of the upsampled grid in degrees.
    pub grid_step: f64,
    /// Spline smoothing λ.
    pub smoothing: f64,
    pub fir_length: usize,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            grid_step: 5.0,
            smoothing: 0.0,
            fir_length: DEFAULT_FIR_LENGTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub instrument: Instrument,
    #[serde(default)]
    pub output: OutputOptions,
    #[serde(default)]
    pub notes: Vec<NoteEntry>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Manifest {
    pub fn new(
        instrument: Instrument,
        output: OutputOptions,
        notes: Vec<NoteEntry>,
        base_dir: &Path,
    ) -> Result<Self> {
        let m = Self {
            instrument,
            output,
            notes,
            base_dir: base_dir.to_path_buf(),
        };
        m.validate()?;
        Ok(m)
    }

    /// Parses and validates; relative WAV paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut m: Manifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.base_dir = base_dir.to_path_buf();
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Manifest(msg) => Error::Manifest(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Manifest(msg));
        check_source_name(&self.instrument.name)
            .map_err(|e| Error::Manifest(format!("instrument name: {e}")))?;
        if self.notes.is_empty() {
            return bad("the note list is empty".into());
        }
        for (i, n) in self.notes.iter().enumerate() {
            if self.notes[..i].iter().any(|o| o.midi == n.midi) {
                return bad(format!("MIDI note {} is listed twice", n.midi));
            }
            self.context(n)
                .map_err(|e| Error::Manifest(format!("note {}: {e}", n.midi)))?;
        }
        make_equiangular_grid(self.output.grid_step)
            .map_err(|e| Error::Manifest(format!("output.grid_step: {e}")))?;
        if !(self.output.smoothing.is_finite() && self.output.smoothing >= 0.0) {
            return bad(format!(
                "output.smoothing {} must be >= 0",
                self.output.smoothing
            ));
        }
        if self.output.fir_length == 0 {
            return bad("output.fir_length must be > 0".into());
        }
        Ok(())
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn wav_path(&self, note: &NoteEntry) -> PathBuf {
        self.base_dir.join(&note.wav)
    }

    pub fn context(&self, note: &NoteEntry) -> Result<NoteContext> {
        NoteContext::new(
            note.midi,
            self.instrument.tuning,
            self.instrument.dynamic,
            (note.steady[0], note.steady[1]),
        )
    }

    pub fn source_info(&self) -> SourceInfo {
        SourceInfo {
            source_name: self.instrument.name.clone(),
            musician: self.instrument.musician.clone(),
            manufacturer: self.instrument.manufacturer.clone(),
            source_view_reference: self.instrument.source_view_reference.clone(),
        }
    }
}

/// Everything derived from one note.
#[derive(Debug, Clone)]
pub struct NoteResult {
    pub recording: RecordingSet,
    pub partials: PartialSet,
    pub tone: SingleToneDirectivity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteFailure {
    pub midi: u8,
    pub message: String,
}

/// Instrument-level results.
#[derive(Debug, Clone)]
pub struct Aggregate {
    pub averaged: BandDirectivity,
    pub diffuse: BandDirectivity,
    pub calibration: Calibration,
    pub interpolated: InterpolatedDirectivity,
    pub bank: FirBank,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub info: SourceInfo,
    pub dynamic: Dynamic,
    /// Successful notes in manifest order.
    pub notes: Vec<NoteResult>,
    pub failures: Vec<NoteFailure>,
    /// Absent when no note succeeded.
    pub aggregate: Option<Aggregate>,
}

/// Processes one recording into partials and single-note pressures.
pub fn analyze_note(recording: RecordingSet, grid: &SphericalGrid) -> Result<NoteResult> {
    let steady = recording.steady_part();
    let spectra = ChannelSpectra::from_signals(&steady)?;
    let f0 = estimate_f0(&spectra, recording.context())?;
    let partials = find_partials(&spectra, f0, recording.sample_rate() / 2.0)?;
    let psds = steady
        .iter()
        .map(|s| welch_psd(s, WELCH_SEGMENTS, WELCH_OVERLAP))
        .collect::<Result<Vec<_>>>()?;
    let tone = extract_single_tone(&psds, &partials, grid)?;
    Ok(NoteResult {
        recording,
        partials,
        tone,
    })
}

/// Band averaging, equalization, calibration, upsampling and FIR synthesis.
pub fn aggregate(notes: &[NoteResult], options: &OutputOptions) -> Result<Aggregate> {
    let tones: Vec<SingleToneDirectivity> = notes.iter().map(|n| n.tone.clone()).collect();
    let recordings: Vec<RecordingSet> = notes.iter().map(|n| n.recording.clone()).collect();
    let averaged = band_average(&tones)?;
    let diffuse = diffuse_equalize(&averaged)?;
    let calibration = calibrate(&diffuse, &recordings)?;
    let target = make_equiangular_grid(options.grid_step)?;
    let interpolated = upsample(&calibration.directivity, &target, options.smoothing)?;
    let fs = recordings[0].sample_rate();
    let bank = synthesize_bank(&interpolated, options.fir_length, fs)?;
    Ok(Aggregate {
        averaged,
        diffuse,
        calibration,
        interpolated,
        bank,
    })
}

/// Runs the chain with at most `jobs` worker threads (all cores if `None`).
/// Failing notes are recorded and skipped.
pub fn process(manifest: &Manifest, jobs: Option<usize>) -> Result<PipelineOutput> {
    manifest.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Manifest(format!("thread pool: {e}")))?;
    pool.install(|| run(manifest))
}

fn run(manifest: &Manifest) -> Result<PipelineOutput> {
    let grid = measurement_layout();
    let outcomes: Vec<Result<NoteResult>> = manifest
        .notes
        .par_iter()
        .map(|n| {
            let rec = read_recording_wav(&manifest.wav_path(n), grid.len(), manifest.context(n)?)?;
            analyze_note(rec, &grid)
        })
        .collect();
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for (entry, outcome) in manifest.notes.iter().zip(outcomes) {
        match outcome {
            Ok(r) => {
                info!(
                    "note {}: f0 {:.3} Hz, {} partials ({})",
                    entry.midi,
                    r.partials.f0(),
                    r.partials.frequencies().len(),
                    r.partials.termination()
                );
                notes.push(r);
            }
            Err(e) => {
                warn!("note {} skipped: {e}", entry.midi);
                failures.push(NoteFailure {
                    midi: entry.midi,
                    message: e.to_string(),
                });
            }
        }
    }
    let aggregate = if notes.is_empty() {
        None
    } else {
        Some(aggregate(&notes, &manifest.output)?)
    };
    Ok(PipelineOutput {
        info: manifest.source_info(),
        dynamic: manifest.instrument.dynamic,
        notes,
        failures,
        aggregate,
    })
}

impl PipelineOutput {
    /// Writes per-note recordings and single-note documents, the
    /// third-octave document, the DAFF balloon and the FIR bank into `dir`.
    /// Returns the written paths in a fixed order.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let grid = measurement_layout();
        let mut paths = Vec::new();
        for n in &self.notes {
            let rec = DirectivityDocument::from_recording(&n.recording, &self.info, &grid)?;
            paths.push(write_document(&rec, dir)?);
            let single =
                DirectivityDocument::from_single_tone(&n.tone, n.recording.context(), &self.info)?;
            paths.push(write_document(&single, dir)?);
        }
        if let Some(a) = &self.aggregate {
            let third = DirectivityDocument::from_band_directivity(
                &a.calibration.directivity,
                self.dynamic,
                &self.info,
            )?;
            paths.push(write_document(&third, dir)?);
            let daff = dir.join(daff_file_name(&self.info.source_name)?);
            write_opendaff(&DaffBalloon::from_interpolated(&a.interpolated)?, &daff)?;
            paths.push(daff);
            let fir = dir.join(fir_bank_file_name(&self.info.source_name)?);
            write_fir_bank(&a.bank, &fir)?;
            paths.push(fir);
        }
        Ok(paths)
    }
}
