//! Fundamental and overtone detection by per-channel peak search and voting.
//!
//! Every channel proposes the strongest bin inside a cent window; the bin
//! proposed by the most channels wins. Ties go to the bin with the larger
//! magnitude summed over all channels, then to the lower frequency.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{forward_spectrum, to_single_sided, TimeSignal};

/// Half-width of the fundamental search window.
pub const F0_WINDOW_CENTS: f64 = 100.0;
/// Half-width of each overtone search window.
pub const PARTIAL_WINDOW_CENTS: f64 = 10.0;
/// Largest accepted deviation of a detected overtone from its harmonic.
pub const PARTIAL_ACCEPT_CENTS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamic {
    Pp,
    Ff,
}

impl fmt::Display for Dynamic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dynamic::Pp => "pp",
            Dynamic::Ff => "ff",
        })
    }
}

impl FromStr for Dynamic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pp" => Ok(Dynamic::Pp),
            "ff" => Ok(Dynamic::Ff),
            other => Err(Error::InvalidNoteContext(format!(
                "dynamic {other:?} is not pp or ff"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoteContext {
    midi_note: u8,
    tuning_frequency: f64,
    dynamic: Dynamic,
    steady_bounds: (usize, usize),
}

impl NoteContext {
    /// `steady_bounds` is the half-open sample interval `[start, end)`.
    pub fn new(
        midi_note: u8,
        tuning_frequency: f64,
        dynamic: Dynamic,
        steady_bounds: (usize, usize),
    ) -> Result<Self> {
        if midi_note > 127 {
            return Err(Error::InvalidNoteContext(format!(
                "MIDI note {midi_note} outside 0..=127"
            )));
        }
        if !(400.0..=466.0).contains(&tuning_frequency) {
            return Err(Error::InvalidNoteContext(format!(
                "tuning frequency {tuning_frequency} Hz outside [400, 466]"
            )));
        }
        if steady_bounds.0 >= steady_bounds.1 {
            return Err(Error::InvalidNoteContext(format!(
                "steady part [{}, {}) is empty",
                steady_bounds.0, steady_bounds.1
            )));
        }
        Ok(Self {
            midi_note,
            tuning_frequency,
            dynamic,
            steady_bounds,
        })
    }

    pub fn midi_note(&self) -> u8 {
        self.midi_note
    }

    pub fn tuning_frequency(&self) -> f64 {
        self.tuning_frequency
    }

    pub fn dynamic(&self) -> Dynamic {
        self.dynamic
    }

    pub fn steady_bounds(&self) -> (usize, usize) {
        self.steady_bounds
    }

    pub fn check_length(&self, len: usize) -> Result<()> {
        if self.steady_bounds.1 > len {
            return Err(Error::InvalidNoteContext(format!(
                "steady part ends at {} but recording has {len} samples",
                self.steady_bounds.1
            )));
        }
        Ok(())
    }

    pub fn note_name(&self) -> String {
        note_name(self.midi_note)
    }
}

/// Scientific pitch name with sharps, MIDI 69 = "A4".
pub fn note_name(midi: u8) -> String {
    const NAMES: [&str; 12] = [
        "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
    ];
    let octave = i32::from(midi) / 12 - 1;
    format!("{}{}", NAMES[usize::from(midi % 12)], octave)
}

/// Equal-tempered frequency of the context's MIDI note.
pub fn nominal_note_frequency(ctx: &NoteContext) -> f64 {
    ctx.tuning_frequency * 2f64.powf((f64::from(ctx.midi_note) - 69.0) / 12.0)
}

/// Interval from `reference` to `f` in cents.
pub fn cents(f: f64, reference: f64) -> f64 {
    1200.0 * (f / reference).log2()
}

/// Magnitude spectra of all channels on one shared frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpectra {
    frequencies: Vec<f64>,
    magnitudes: Vec<Vec<f64>>,
}

impl ChannelSpectra {
    pub fn new(frequencies: Vec<f64>, magnitudes: Vec<Vec<f64>>) -> Result<Self> {
        if frequencies.is_empty() || magnitudes.is_empty() {
            return Err(Error::EmptyInput("channel spectra".into()));
        }
        if frequencies.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::SpectrumShape(
                "frequencies must be strictly increasing".into(),
            ));
        }
        if let Some(q) = magnitudes.iter().position(|m| m.len() != frequencies.len()) {
            return Err(Error::SpectrumShape(format!(
                "channel {q} has {} bins, grid has {}",
                magnitudes[q].len(),
                frequencies.len()
            )));
        }
        Ok(Self {
            frequencies,
            magnitudes,
        })
    }

    /// Single-sided |X_q(k)| of every channel.
    pub fn from_signals(signals: &[TimeSignal]) -> Result<Self> {
        let first = signals
            .first()
            .ok_or_else(|| Error::EmptyInput("no channels".into()))?;
        let mut frequencies = Vec::new();
        let mut magnitudes = Vec::with_capacity(signals.len());
        for s in signals {
            if s.len() != first.len() || s.sample_rate() != first.sample_rate() {
                return Err(Error::SpectrumShape(
                    "channels differ in length or sample rate".into(),
                ));
            }
            let single = to_single_sided(&forward_spectrum(s)?)?;
            if frequencies.is_empty() {
                frequencies = single.frequencies().to_vec();
            }
            magnitudes.push(single.magnitudes());
        }
        Self::new(frequencies, magnitudes)
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn magnitudes(&self) -> &[Vec<f64>] {
        &self.magnitudes
    }

    pub fn channels(&self) -> usize {
        self.magnitudes.len()
    }

    fn bin_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.frequencies.partition_point(|f| *f < lo);
        let end = self.frequencies.partition_point(|f| *f <= hi);
        start..end.max(start)
    }

    fn nearest_bin(&self, f: f64) -> usize {
        let i = self.frequencies.partition_point(|x| *x < f);
        if i == 0 {
            0
        } else if i == self.frequencies.len()
            || f - self.frequencies[i - 1] <= self.frequencies[i] - f
        {
            i - 1
        } else {
            i
        }
    }

    /// Winning bin of the per-channel maxima over `range`, or `None` when no
    /// channel carries energy there.
    fn vote(&self, range: std::ops::Range<usize>) -> Option<usize> {
        let mut ballots: BTreeMap<usize, usize> = BTreeMap::new();
        for channel in &self.magnitudes {
            let mut best: Option<(usize, f64)> = None;
            for k in range.clone() {
                if best.is_none_or(|(_, m)| channel[k] > m) {
                    best = Some((k, channel[k]));
                }
            }
            if let Some((k, m)) = best {
                if m > 0.0 {
                    *ballots.entry(k).or_default() += 1;
                }
            }
        }
        let summed = |k: usize| self.magnitudes.iter().map(|c| c[k]).sum::<f64>();
        ballots
            .into_iter()
            .map(|(k, votes)| (k, votes, summed(k)))
            .reduce(|best, cand| {
                let better = cand.1 > best.1 || (cand.1 == best.1 && cand.2 > best.2);
                if better {
                    cand
                } else {
                    best
                }
            })
            .map(|(k, _, _)| k)
    }
}

/// Most frequently detected peak within ±100 cents of the nominal note frequency.
pub fn estimate_f0(spectra: &ChannelSpectra, ctx: &NoteContext) -> Result<f64> {
    let nominal = nominal_note_frequency(ctx);
    let ratio = 2f64.powf(F0_WINDOW_CENTS / 1200.0);
    let (lo, hi) = (nominal / ratio, nominal * ratio);
    let range = spectra.bin_range(lo, hi);
    if range.is_empty() {
        return Err(Error::EmptySearchWindow { lo, hi });
    }
    spectra
        .vote(range)
        .map(|k| spectra.frequencies[k])
        .ok_or(Error::NoSignal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The next harmonic lies at or above the Nyquist frequency.
    Nyquist,
    /// The voted peak deviated by more than 5 cents from its harmonic.
    CentDeviation,
    /// No channel carried energy in the search window.
    NoiseFloor,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Nyquist => "nyquist",
            Termination::CentDeviation => "cent_deviation",
            Termination::NoiseFloor => "noise_floor",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialSet {
    f0: f64,
    partial_frequencies: Vec<f64>,
    termination: Termination,
}

impl PartialSet {
    pub fn f0(&self) -> f64 {
        self.f0
    }

    /// f0 followed by the accepted overtones.
    pub fn frequencies(&self) -> &[f64] {
        &self.partial_frequencies
    }

    pub fn overtone_count(&self) -> usize {
        self.partial_frequencies.len() - 1
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }
}

/// Scans overtones `i = 1, 2, …` around `(i+1)·f0` until the Nyquist
/// frequency is reached or a voted peak misses its harmonic by more than
/// five cents.
pub fn find_partials(spectra: &ChannelSpectra, f0: f64, nyquist: f64) -> Result<PartialSet> {
    if !(f0.is_finite() && f0 > 0.0) {
        return Err(Error::InvalidSignal(format!("f0 {f0} Hz must be > 0")));
    }
    let ratio = 2f64.powf(PARTIAL_WINDOW_CENTS / 1200.0);
    let mut found = vec![f0];
    let termination = loop {
        let harmonic = (found.len() + 1) as f64 * f0;
        if harmonic >= nyquist {
            break Termination::Nyquist;
        }
        let mut range = spectra.bin_range(harmonic / ratio, (harmonic * ratio).min(nyquist));
        if range.is_empty() {
            let k = spectra.nearest_bin(harmonic);
            range = k..k + 1;
        }
        let Some(k) = spectra.vote(range) else {
            break Termination::NoiseFloor;
        };
        let f = spectra.frequencies[k];
        let last = *found.last().expect("f0 is always present");
        if cents(f, harmonic).abs() > PARTIAL_ACCEPT_CENTS || f <= last {
            break Termination::CentDeviation;
        }
        found.push(f);
    };
    Ok(PartialSet {
        f0,
        partial_frequencies: found,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(midi: u8, tuning: f64) -> NoteContext {
        NoteContext::new(midi, tuning, Dynamic::Ff, (0, 10)).unwrap()
    }

    /// Fine grid around each requested frequency plus coarse filler bins.
    fn sparse_spectra(peaks: &[(f64, f64)], channels: usize) -> ChannelSpectra {
        let mut grid: Vec<f64> = (1..2000).map(|k| k as f64 * 10.0 + 3.3).collect();
        for (f, _) in peaks {
            grid.push(*f);
            for d in 1..4 {
                grid.push(f * 2f64.powf(d as f64 * 3.0 / 1200.0));
                grid.push(f / 2f64.powf(d as f64 * 3.0 / 1200.0));
            }
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let mags: Vec<f64> = grid
            .iter()
            .map(|g| peaks.iter().find(|(f, _)| f == g).map_or(1e-3, |(_, a)| *a))
            .collect();
        ChannelSpectra::new(grid, vec![mags; channels]).unwrap()
    }

    #[test]
    fn nominal_frequencies() {
        assert_eq!(nominal_note_frequency(&ctx(69, 442.0)), 442.0);
        assert!((nominal_note_frequency(&ctx(57, 442.0)) - 221.0).abs() < 1e-12);
        assert!((nominal_note_frequency(&ctx(60, 442.0)) - 262.814_772_415_601_3).abs() < 1e-9);
    }

    #[test]
    fn note_names() {
        assert_eq!(note_name(69), "A4");
        assert_eq!(note_name(60), "C4");
        assert_eq!(note_name(58), "A#3");
        assert_eq!(note_name(0), "C-1");
    }

    #[test]
    fn context_validation() {
        assert!(NoteContext::new(128, 442.0, Dynamic::Ff, (0, 1)).is_err());
        assert!(NoteContext::new(69, 399.0, Dynamic::Ff, (0, 1)).is_err());
        assert!(NoteContext::new(69, 442.0, Dynamic::Ff, (5, 5)).is_err());
        let c = ctx(69, 442.0);
        assert!(c.check_length(10).is_ok());
        assert!(c.check_length(9).is_err());
        assert_eq!("pp".parse::<Dynamic>().unwrap(), Dynamic::Pp);
        assert!("mf".parse::<Dynamic>().is_err());
    }

    #[test]
    fn f0_mode_over_channels() {
        let grid = vec![430.0, 438.0, 440.0, 441.0, 450.0];
        let at = |peak: usize| {
            let mut m = vec![0.1; 5];
            m[peak] = 1.0;
            m
        };
        let mut mags = vec![at(2); 30];
        mags.extend([at(3), at(3)]);
        let spectra = ChannelSpectra::new(grid, mags).unwrap();
        assert_eq!(estimate_f0(&spectra, &ctx(69, 440.0)).unwrap(), 440.0);
    }

    #[test]
    fn f0_tie_breaks_on_summed_magnitude() {
        let grid = vec![439.0, 440.0, 441.0];
        let mags = vec![
            vec![0.0, 2.0, 1.0],
            vec![0.0, 2.0, 1.0],
            vec![0.0, 1.0, 3.0],
            vec![0.0, 1.0, 3.0],
        ];
        let spectra = ChannelSpectra::new(grid, mags).unwrap();
        // two votes each; summed magnitude 6 at 440 vs 8 at 441
        assert_eq!(estimate_f0(&spectra, &ctx(69, 440.0)).unwrap(), 441.0);
    }

    #[test]
    fn f0_detected_at_minus_fifty_cents() {
        let f = 442.0 * 2f64.powf(-50.0 / 1200.0);
        let spectra = sparse_spectra(&[(f, 1.0)], 32);
        assert_eq!(estimate_f0(&spectra, &ctx(69, 442.0)).unwrap(), f);
    }

    #[test]
    fn f0_errors() {
        let spectra = ChannelSpectra::new(vec![10.0, 20.0], vec![vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            estimate_f0(&spectra, &ctx(69, 442.0)),
            Err(Error::EmptySearchWindow { .. })
        ));
        let silent = ChannelSpectra::new(vec![440.0, 442.0], vec![vec![0.0, 0.0]; 4]).unwrap();
        assert!(matches!(
            estimate_f0(&silent, &ctx(69, 442.0)),
            Err(Error::NoSignal)
        ));
    }

    #[test]
    fn exact_harmonic_series_runs_to_nyquist() {
        let f0 = 200.0;
        let peaks: Vec<_> = (1..=10).map(|h| (h as f64 * f0, 1.0 / h as f64)).collect();
        let spectra = sparse_spectra(&peaks, 32);
        let set = find_partials(&spectra, f0, 2100.0).unwrap();
        assert_eq!(set.frequencies().len(), 10);
        assert_eq!(set.termination(), Termination::Nyquist);
    }

    #[test]
    fn seven_cent_partial_stops_the_scan() {
        let f0 = 200.0;
        let peaks: Vec<_> = (1..=10)
            .map(|h| {
                // overtone 5 is harmonic 6
                let offset = if h == 6 { 7.0 } else { 0.0 };
                (h as f64 * f0 * 2f64.powf(offset / 1200.0), 1.0)
            })
            .collect();
        let set = find_partials(&sparse_spectra(&peaks, 32), f0, 2100.0).unwrap();
        assert_eq!(set.overtone_count(), 4);
        assert_eq!(set.termination(), Termination::CentDeviation);
    }

    #[test]
    fn four_cent_partials_are_accepted() {
        let f0 = 200.0;
        let peaks: Vec<_> = (1..=10)
            .map(|h| {
                let offset = if h == 1 { 0.0 } else { 4.0 };
                (h as f64 * f0 * 2f64.powf(offset / 1200.0), 1.0)
            })
            .collect();
        let set = find_partials(&sparse_spectra(&peaks, 32), f0, 2100.0).unwrap();
        assert_eq!(set.overtone_count(), 9);
        assert_eq!(set.termination(), Termination::Nyquist);
        for (i, f) in set.frequencies().iter().enumerate() {
            assert!(cents(*f, (i + 1) as f64 * f0).abs() <= PARTIAL_ACCEPT_CENTS);
        }
    }

    #[test]
    fn silence_terminates_on_noise_floor() {
        let grid: Vec<f64> = (0..5000).map(|k| k as f64 * 0.5).collect();
        let spectra = ChannelSpectra::new(grid.clone(), vec![vec![0.0; grid.len()]; 8]).unwrap();
        let set = find_partials(&spectra, 200.0, 2400.0).unwrap();
        assert_eq!(set.overtone_count(), 0);
        assert_eq!(set.termination(), Termination::NoiseFloor);
        assert!(find_partials(&spectra, 0.0, 2400.0).is_err());
    }

    #[test]
    fn from_signals_detects_a_synthetic_tone() {
        let fs = 8000.0;
        let n = 8000;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (1..=5)
                    .map(|h| (2.0 * std::f64::consts::PI * 441.0 * h as f64 * t).sin() / h as f64)
                    .sum()
            })
            .collect();
        let signals = vec![TimeSignal::new(x, fs).unwrap(); 4];
        let spectra = ChannelSpectra::from_signals(&signals).unwrap();
        let f0 = estimate_f0(&spectra, &ctx(69, 442.0)).unwrap();
        assert_eq!(f0, 441.0);
        let set = find_partials(&spectra, f0, fs / 2.0).unwrap();
        assert_eq!(
            &set.frequencies()[..5],
            &[441.0, 882.0, 1323.0, 1764.0, 2205.0]
        );
    }
}
