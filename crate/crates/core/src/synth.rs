//! Synthetic test corpora: harmonic tones radiated with fixed per-channel
//! gains, written as calibrated 32-channel WAV files plus a manifest.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::containers::{write_recording_wav, WavEncoding};
use crate::error::{Error, Result};
use crate::partials::{Dynamic, NoteContext};
use crate::pipeline::{Era, Instrument, Manifest, NoteEntry, OutputOptions};
use crate::recording::RecordingSet;
use crate::spectral::TimeSignal;

pub const SAMPLE_RATE: f64 = 44_100.0;

/// Harmonic complex with partial `i` (1-based) at `i·f0`, amplitude
/// `amplitude / i`, up to the Nyquist frequency.
pub fn harmonic_tone(f0: f64, amplitude: f64, len: usize, sample_rate: f64) -> Vec<f64> {
    let count = ((sample_rate / 2.0 - 1.0) / f0).floor() as usize;
    let mut x = vec![0.0; len];
    for i in 1..=count {
        let w = 2.0 * PI * i as f64 * f0 / sample_rate;
        let a = amplitude / i as f64;
        // fixed phase per partial keeps the crest factor moderate
        let phase = 0.7 * (i * i) as f64;
        for (n, v) in x.iter_mut().enumerate() {
            *v += a * (w * n as f64 + phase).sin();
        }
    }
    x
}

/// One note: the same tone scaled by `gains[q]` on every channel.
pub fn synthetic_recording(
    context: NoteContext,
    f0: f64,
    amplitude: f64,
    len: usize,
    gains: &[f64],
) -> Result<RecordingSet> {
    let tone = harmonic_tone(f0, amplitude, len, SAMPLE_RATE);
    let channels = gains
        .iter()
        .map(|g| TimeSignal::new(tone.iter().map(|v| v * g).collect(), SAMPLE_RATE))
        .collect::<Result<Vec<_>>>()?;
    RecordingSet::new(channels, context)
}

/// Three notes of a toy instrument at A3, A4 and A5 (tuning 440 Hz,
/// integer-Hz partials), 1.2 s each with a 1 s steady part.
#[derive(Debug, Clone)]
pub struct ToyCorpus {
    pub name: String,
    pub midi_notes: Vec<u8>,
    pub amplitude: f64,
    pub gains: Vec<f64>,
    pub output: OutputOptions,
}

impl ToyCorpus {
    pub const LENGTH: usize = 52_920;
    pub const STEADY: (usize, usize) = (4_410, 48_510);

    /// Omnidirectional source: unit gain on all 32 channels.
    pub fn monopole() -> Self {
        Self {
            name: "Toy_monopole".into(),
            midi_notes: vec![57, 69, 81],
            amplitude: 0.2,
            gains: vec![1.0; 32],
            output: OutputOptions::default(),
        }
    }

    pub fn context(&self, midi: u8) -> Result<NoteContext> {
        NoteContext::new(midi, 440.0, Dynamic::Ff, Self::STEADY)
    }

    pub fn f0(midi: u8) -> f64 {
        440.0 * 2f64.powf((f64::from(midi) - 69.0) / 12.0)
    }

    pub fn recordings(&self) -> Result<Vec<RecordingSet>> {
        self.midi_notes
            .iter()
            .map(|m| {
                synthetic_recording(
                    self.context(*m)?,
                    Self::f0(*m),
                    self.amplitude,
                    Self::LENGTH,
                    &self.gains,
                )
            })
            .collect()
    }

    /// Writes `{name}_{midi}.wav` files and `manifest.toml` into `dir`;
    /// returns the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut notes = Vec::new();
        for rec in self.recordings()? {
            let midi = rec.context().midi_note();
            let wav = PathBuf::from(format!("{}_{midi}.wav", self.name));
            write_recording_wav(&dir.join(&wav), rec.channels(), WavEncoding::Float32)?;
            notes.push(NoteEntry {
                midi,
                wav,
                steady: [Self::STEADY.0, Self::STEADY.1],
            });
        }
        let manifest = Manifest::new(
            Instrument {
                name: self.name.clone(),
                era: Era::Modern,
                musician: "synthetic".into(),
                manufacturer: "synthetic".into(),
                tuning: 440.0,
                dynamic: Dynamic::Ff,
                source_view_reference: crate::containers::sofalite::DEFAULT_SOURCE_VIEW.into(),
            },
            self.output.clone(),
            notes,
            dir,
        )?;
        let path = dir.join("manifest.toml");
        std::fs::write(&path, manifest.to_toml()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
