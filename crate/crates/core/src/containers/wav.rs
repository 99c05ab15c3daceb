//! Calibrated WAV input: a digital amplitude of 1 is a pressure of 1 Pa.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::partials::NoteContext;
use crate::recording::RecordingSet;
use crate::spectral::TimeSignal;

/// Integer full scale for 24-bit PCM.
const PCM24_SCALE: f64 = 8_388_608.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm24,
    Float32,
}

/// Reads every channel of a 24-bit PCM or 32-bit float file, in Pa.
pub fn read_wav_channels(path: &Path) -> Result<Vec<TimeSignal>> {
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav(other),
    })?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 24) => reader
            .into_samples::<i32>()
            .map(|s| s.map(|v| f64::from(v) / PCM24_SCALE))
            .collect::<std::result::Result<_, _>>()?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        (format, bits) => {
            return Err(Error::UnsupportedWav(format!(
                "{bits}-bit {}; expected 24-bit PCM or 32-bit float",
                match format {
                    SampleFormat::Int => "PCM",
                    SampleFormat::Float => "float",
                }
            )))
        }
    };
    let frames = interleaved.len() / channels;
    let rate = f64::from(spec.sample_rate);
    (0..channels)
        .map(|c| {
            let samples = (0..frames).map(|i| interleaved[i * channels + c]).collect();
            TimeSignal::new(samples, rate)
        })
        .collect()
}

/// Reads one note recording and checks its channel count.
pub fn read_recording_wav(
    path: &Path,
    channels: usize,
    context: NoteContext,
) -> Result<RecordingSet> {
    let signals = read_wav_channels(path)?;
    if signals.len() != channels {
        return Err(Error::ChannelMismatch {
            expected: channels,
            found: signals.len(),
        });
    }
    RecordingSet::new(signals, context)
}

/// Writes equal-length channels; 24-bit samples are rounded and clipped.
pub fn write_recording_wav(
    path: &Path,
    channels: &[TimeSignal],
    encoding: WavEncoding,
) -> Result<()> {
    let first = channels
        .first()
        .ok_or_else(|| Error::EmptyInput("no channels to write".into()))?;
    if channels
        .iter()
        .any(|c| c.len() != first.len() || c.sample_rate() != first.sample_rate())
    {
        return Err(Error::Dimension(
            "channels differ in length or sample rate".into(),
        ));
    }
    let rate = first.sample_rate();
    if rate.fract() != 0.0 || !(1.0..=f64::from(u32::MAX)).contains(&rate) {
        return Err(Error::UnsupportedWav(format!(
            "sample rate {rate} Hz is not a positive integer"
        )));
    }
    let count = u16::try_from(channels.len())
        .map_err(|_| Error::UnsupportedWav(format!("{} channels", channels.len())))?;
    let (bits, format) = match encoding {
        WavEncoding::Pcm24 => (24, SampleFormat::Int),
        WavEncoding::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec {
        channels: count,
        sample_rate: rate as u32,
        bits_per_sample: bits,
        sample_format: format,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav(other),
    })?;
    for i in 0..first.len() {
        for c in channels {
            let x = c.samples()[i];
            match encoding {
                WavEncoding::Pcm24 => {
                    let v = (x * PCM24_SCALE)
                        .round()
                        .clamp(-PCM24_SCALE, PCM24_SCALE - 1.0);
                    writer.write_sample(v as i32)?;
                }
                WavEncoding::Float32 => writer.write_sample(x as f32)?,
            }
        }
    }
    writer.finalize()?;
    Ok(())
}
