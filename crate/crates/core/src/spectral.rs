//! Time/frequency conversions and Welch power spectral density estimation.
//!
//! The forward transform is the unnormalized DFT sum
//! `X(k) = Σ x[n] e^{-i2πkn/N}`. Single-sided spectra keep bins `0..=N/2`
//! with interior bins doubled; the inverse mapping halves them again and
//! mirrors the conjugates into the upper half.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Relative tolerance for the conjugate-symmetry check in [`to_single_sided`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Minimum Welch segment length in samples.
pub const MIN_SEGMENT_LEN: usize = 16;
/// Default number of Welch segments.
pub const WELCH_SEGMENTS: usize = 8;
/// Default fractional overlap of Welch segments.
pub const WELCH_OVERLAP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl TimeSignal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate {sample_rate} Hz must be > 0"
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sub-signal over `start..end` (samples).
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.samples.len() {
            return Err(Error::InvalidSignal(format!(
                "range {start}..{end} outside signal of {} samples",
                self.samples.len()
            )));
        }
        Ok(Self {
            samples: self.samples[start..end].to_vec(),
            sample_rate: self.sample_rate,
        })
    }

    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sidedness {
    Single,
    Double,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    frequencies: Vec<f64>,
    sidedness: Sidedness,
    origin_length: usize,
    sample_rate: f64,
    padded: bool,
}

impl Spectrum {
    /// Wraps single-sided bins of an even-length origin signal, e.g. data
    /// read back from a container.
    pub fn single_sided(bins: Vec<Complex64>, sample_rate: f64, padded: bool) -> Result<Self> {
        if bins.len() < 2 {
            return Err(Error::SpectrumShape(
                "single-sided spectrum needs at least 2 bins".into(),
            ));
        }
        let origin_length = 2 * (bins.len() - 1);
        Ok(Self {
            frequencies: bin_frequencies(bins.len(), origin_length, sample_rate),
            bins,
            sidedness: Sidedness::Single,
            origin_length,
            sample_rate,
            padded,
        })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn sidedness(&self) -> Sidedness {
        self.sidedness
    }

    /// Length N of the (possibly padded) time signal the spectrum came from.
    pub fn origin_length(&self) -> usize {
        self.origin_length
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// True when an odd-length input was zero-padded by one sample.
    pub fn padded(&self) -> bool {
        self.padded
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.norm()).collect()
    }
}

fn bin_frequencies(count: usize, origin_length: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / origin_length as f64;
    (0..count).map(|k| k as f64 * df).collect()
}

/// Double-sided DFT of `x`. Odd-length signals are zero-padded by one sample
/// and flagged.
pub fn forward_spectrum(x: &TimeSignal) -> Result<Spectrum> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    let padded = x.len() % 2 == 1;
    let n = x.len() + usize::from(padded);
    let mut buf: Vec<Complex64> = x
        .samples
        .iter()
        .map(|&s| Complex64::new(s, 0.0))
        .chain(std::iter::repeat_n(
            Complex64::new(0.0, 0.0),
            usize::from(padded),
        ))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(Spectrum {
        frequencies: bin_frequencies(n, n, x.sample_rate),
        bins: buf,
        sidedness: Sidedness::Double,
        origin_length: n,
        sample_rate: x.sample_rate,
        padded,
    })
}

/// Inverse of [`forward_spectrum`]; drops the padding sample if one was added.
pub fn inverse_spectrum(spectrum: &Spectrum) -> Result<TimeSignal> {
    if spectrum.sidedness != Sidedness::Double {
        return Err(Error::SpectrumShape(
            "inverse transform needs a double-sided spectrum".into(),
        ));
    }
    let n = spectrum.bins.len();
    let mut buf = spectrum.bins.clone();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let keep = n - usize::from(spectrum.padded);
    let samples = buf[..keep].iter().map(|c| c.re / n as f64).collect();
    TimeSignal::new(samples, spectrum.sample_rate)
}

/// Single-sided spectrum of length N/2+1 with interior bins doubled.
pub fn to_single_sided(spectrum: &Spectrum) -> Result<Spectrum> {
    if spectrum.sidedness != Sidedness::Double {
        return Err(Error::SpectrumShape("input is already single-sided".into()));
    }
    let n = spectrum.bins.len();
    if n < 2 || n % 2 != 0 {
        return Err(Error::SpectrumShape(format!(
            "double-sided length {n} must be even and >= 2"
        )));
    }
    let x = &spectrum.bins;
    let scale = x.iter().map(|b| b.norm()).fold(0.0, f64::max);
    let deviation = (1..n)
        .map(|k| (x[k] - x[n - k].conj()).norm())
        .chain([x[0].im.abs(), x[n / 2].im.abs()])
        .fold(0.0, f64::max);
    if scale > 0.0 && deviation > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NotConjugateSymmetric(deviation / scale));
    }
    let half = n / 2;
    let bins = (0..=half)
        .map(|k| {
            if k == 0 || k == half {
                x[k]
            } else {
                x[k] * 2.0
            }
        })
        .collect();
    Ok(Spectrum {
        bins,
        frequencies: spectrum.frequencies[..=half].to_vec(),
        sidedness: Sidedness::Single,
        origin_length: n,
        sample_rate: spectrum.sample_rate,
        padded: spectrum.padded,
    })
}

/// Reconstructs the double-sided spectrum of length N from N/2+1 single-sided bins.
pub fn to_double_sided(spectrum: &Spectrum) -> Result<Spectrum> {
    if spectrum.sidedness != Sidedness::Single {
        return Err(Error::SpectrumShape("input is already double-sided".into()));
    }
    let half = spectrum.bins.len() - 1;
    let n = 2 * half;
    if half == 0 || spectrum.origin_length != n {
        return Err(Error::SpectrumShape(format!(
            "{} single-sided bins do not match origin length {}",
            spectrum.bins.len(),
            spectrum.origin_length
        )));
    }
    let xs = &spectrum.bins;
    let bins = (0..n)
        .map(|k| match k {
            0 => xs[0],
            k if k < half => xs[k] * 0.5,
            k if k == half => xs[half],
            k => xs[n - k].conj() * 0.5,
        })
        .collect();
    Ok(Spectrum {
        bins,
        frequencies: bin_frequencies(n, n, spectrum.sample_rate),
        sidedness: Sidedness::Double,
        origin_length: n,
        sample_rate: spectrum.sample_rate,
        padded: spectrum.padded,
    })
}

/// Periodic (DFT-even) Hann window.
pub fn hann_periodic(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Single-sided Welch PSD in Pa²/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    values: Vec<f64>,
    frequencies: Vec<f64>,
    enbw: f64,
    segment_length: usize,
    segments: usize,
}

impl PsdEstimate {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Equivalent noise bandwidth of the analysis window in Hz.
    pub fn enbw(&self) -> f64 {
        self.enbw
    }

    pub fn segment_length(&self) -> usize {
        self.segment_length
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn to_power_spectrum(&self) -> PowerSpectrum {
        PowerSpectrum {
            frequencies: self.frequencies.clone(),
            power: scale_to_power(self),
        }
    }
}

/// Per-bin component power in Pa² on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

/// Segment length and hop for `segments` windows with fractional `overlap`.
/// Trailing samples that do not fill a segment are discarded.
pub fn welch_layout(len: usize, segments: usize, overlap: f64) -> Result<(usize, usize)> {
    if segments == 0 {
        return Err(Error::InvalidSignal("segment count must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::InvalidSignal(format!(
            "overlap {overlap} must be in [0, 1)"
        )));
    }
    let span = 1.0 + (segments - 1) as f64 * (1.0 - overlap);
    let seg_len = (len as f64 / span).floor() as usize;
    if seg_len < MIN_SEGMENT_LEN {
        return Err(Error::SignalTooShort {
            len,
            min: (MIN_SEGMENT_LEN as f64 * span).ceil() as usize,
            segments,
            min_segment: MIN_SEGMENT_LEN,
        });
    }
    let hop = ((seg_len as f64 * (1.0 - overlap)).floor() as usize).max(1);
    Ok((seg_len, hop))
}

/// Welch PSD with a periodic Hann window.
///
/// Each periodogram is `|DFT(w·x)|² / (f_s Σw²)`, i.e. the `1/(f_s N)`
/// density normalization with the window's mean-square power compensated,
/// then folded to a single-sided density. No detrending is applied.
pub fn welch_psd(x: &TimeSignal, segments: usize, overlap: f64) -> Result<PsdEstimate> {
    let (seg_len, hop) = welch_layout(x.len(), segments, overlap)?;
    let fs = x.sample_rate;
    let window = hann_periodic(seg_len);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let window_sum: f64 = window.iter().sum();
    let bins = seg_len / 2 + 1;
    let fft = FftPlanner::new().plan_fft_forward(seg_len);

    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg_len];
    for s in 0..segments {
        let start = s * hop;
        for ((b, &v), &w) in buf
            .iter_mut()
            .zip(&x.samples[start..start + seg_len])
            .zip(&window)
        {
            *b = Complex64::new(v * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }

    let norm = 1.0 / (fs * window_power * segments as f64);
    let nyquist_bin = (seg_len % 2 == 0).then_some(seg_len / 2);
    let values = acc
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let fold = if k == 0 || Some(k) == nyquist_bin {
                1.0
            } else {
                2.0
            };
            p * norm * fold
        })
        .collect();

    Ok(PsdEstimate {
        values,
        frequencies: bin_frequencies(bins, seg_len, fs),
        enbw: fs * window_power / (window_sum * window_sum),
        segment_length: seg_len,
        segments,
    })
}

/// Density times ENBW: a stationary tone's peak reads its total power.
pub fn scale_to_power(psd: &PsdEstimate) -> Vec<f64> {
    psd.values.iter().map(|v| v * psd.enbw).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signal(samples: Vec<f64>) -> TimeSignal {
        TimeSignal::new(samples, 8.0).unwrap()
    }

    #[test]
    fn dc_spectrum() {
        let x = forward_spectrum(&signal(vec![1.0; 8])).unwrap();
        assert!((x.bins()[0] - Complex64::new(8.0, 0.0)).norm() < 1e-12);
        assert!(x.bins()[1..].iter().all(|b| b.norm() < 1e-12));
    }

    #[test]
    fn single_tone_bins() {
        let n = 16;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * 2.0 * i as f64 / n as f64).cos())
            .collect();
        let spec = forward_spectrum(&TimeSignal::new(x, 16.0).unwrap()).unwrap();
        for (k, b) in spec.bins().iter().enumerate() {
            let expected = if k == 2 || k == 14 { 8.0 } else { 0.0 };
            assert!(
                (b.re - expected).abs() < 1e-12 && b.im.abs() < 1e-12,
                "bin {k}: {b}"
            );
        }
    }

    #[test]
    fn dc_only_single_sided_is_unscaled() {
        let mut bins = vec![Complex64::new(0.0, 0.0); 8];
        bins[0] = Complex64::new(8.0, 0.0);
        let x = Spectrum {
            frequencies: bin_frequencies(8, 8, 8.0),
            bins,
            sidedness: Sidedness::Double,
            origin_length: 8,
            sample_rate: 8.0,
            padded: false,
        };
        let xs = to_single_sided(&x).unwrap();
        assert_eq!(xs.bins().len(), 5);
        assert_eq!(xs.bins()[0], Complex64::new(8.0, 0.0));
        assert_eq!(to_double_sided(&xs).unwrap(), x);
    }

    #[test]
    fn single_sided_doubles_interior() {
        let x = forward_spectrum(&signal(vec![0.3, -1.0, 2.0, 0.5, 0.1, -0.7])).unwrap();
        let xs = to_single_sided(&x).unwrap();
        assert_eq!(xs.bins().len(), 4);
        assert_eq!(xs.bins()[0], x.bins()[0]);
        assert_eq!(xs.bins()[1], x.bins()[1] * 2.0);
        assert_eq!(xs.bins()[3], x.bins()[3]);
    }

    #[test]
    fn non_symmetric_rejected() {
        let mut x = forward_spectrum(&signal(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        x.bins[1] += Complex64::new(0.0, 1.0);
        assert!(matches!(
            to_single_sided(&x),
            Err(Error::NotConjugateSymmetric(_))
        ));
    }

    #[test]
    fn odd_length_is_padded_and_restored() {
        let samples = vec![1.0, -2.0, 0.5, 0.25, 3.0];
        let x = forward_spectrum(&signal(samples.clone())).unwrap();
        assert!(x.padded());
        assert_eq!(x.origin_length(), 6);
        let back =
            inverse_spectrum(&to_double_sided(&to_single_sided(&x).unwrap()).unwrap()).unwrap();
        assert_eq!(back.len(), 5);
        for (a, b) in back.samples().iter().zip(&samples) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_signal_rejected() {
        assert!(matches!(
            TimeSignal::new(vec![], 1.0),
            Err(Error::EmptySignal)
        ));
        assert!(TimeSignal::new(vec![f64::NAN], 1.0).is_err());
        assert!(TimeSignal::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn hann_enbw_is_one_and_a_half_bins() {
        let x = signal(vec![0.0; 900]);
        let psd = welch_psd(&x, 8, 0.5).unwrap();
        let bin = 8.0 / psd.segment_length() as f64;
        assert!((psd.enbw() / bin - 1.5).abs() < 1e-12);
        assert!(psd.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn welch_layout_default() {
        // 8 segments, 50% overlap: N = 4.5 L
        assert_eq!(welch_layout(900, 8, 0.5).unwrap(), (200, 100));
        assert_eq!(welch_layout(905, 8, 0.5).unwrap(), (201, 100));
        let err = welch_layout(71, 8, 0.5).unwrap_err();
        assert!(err.to_string().contains("at least 72"), "{err}");
        assert!(welch_layout(72, 8, 0.5).is_ok());
        assert!(welch_layout(100, 0, 0.5).is_err());
        assert!(welch_layout(100, 2, 1.0).is_err());
    }

    #[test]
    fn sinusoid_power_reads_a_squared_over_two() {
        let fs = 44100.0;
        let n = 44100;
        let (seg, _) = welch_layout(n, 8, 0.5).unwrap();
        let k0 = 100;
        let f = k0 as f64 * fs / seg as f64;
        for amp in [1.0, 2.0] {
            let x: Vec<f64> = (0..n)
                .map(|i| amp * (2.0 * PI * f * i as f64 / fs).sin())
                .collect();
            let psd = welch_psd(&TimeSignal::new(x, fs).unwrap(), 8, 0.5).unwrap();
            let power = scale_to_power(&psd);
            let peak = power.iter().cloned().fold(0.0, f64::max);
            assert!(
                (peak - amp * amp / 2.0).abs() / (amp * amp / 2.0) < 1e-9,
                "{peak}"
            );
        }
    }

    #[test]
    fn flat_density_scales_by_enbw() {
        let psd = PsdEstimate {
            values: vec![2.0; 5],
            frequencies: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            enbw: 1.5,
            segment_length: 8,
            segments: 1,
        };
        assert_eq!(scale_to_power(&psd), vec![3.0; 5]);
    }
}
