//! Minimum-phase FIR filters from third-octave band magnitudes.
//!
//! Band values are spread onto a 1 Hz magnitude grid, smoothed over a
//! sliding third octave in the power domain, floored at −100 dB below the
//! maximum and turned into a minimum-phase response with the folded real
//! cepstrum. The impulse response is truncated with a raised-cosine fade.
//!
//! Truncation smears narrow low-frequency detail. Band filters therefore
//! measure their response at the band centres after truncation and redesign
//! with a log-frequency correction curve until the centres match the target.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::bands::{band_edges, BAND_COUNT, NOMINAL_CENTERS};
use crate::error::{Error, Result};
use crate::geometry::SphericalGrid;
use crate::interpolate::InterpolatedDirectivity;

pub const DEFAULT_SAMPLE_RATE: f64 = 44_100.0;
pub const DEFAULT_FIR_LENGTH: usize = 8192;
pub const DEFAULT_RESOLUTION: f64 = 1.0;
/// Length of the raised-cosine fade applied at the end of truncated filters.
pub const TAPER_LENGTH: usize = 256;
/// Floor applied before the logarithm, relative to the spectrum maximum.
pub const FLOOR_DB: f64 = -100.0;
/// Largest number of truncation pre-compensation passes.
pub const COMPENSATION_PASSES: usize = 8;
/// Band-centre error below which pre-compensation stops.
pub const COMPENSATION_TOLERANCE_DB: f64 = 0.02;

/// Single-sided magnitude spectrum on a uniform grid starting at 0 Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSpectrum {
    magnitudes: Vec<f64>,
    resolution: f64,
    sample_rate: f64,
}

impl DenseSpectrum {
    /// Bin count must be `fs / (2·resolution) + 1` with an integer ratio.
    pub fn new(magnitudes: Vec<f64>, resolution: f64, sample_rate: f64) -> Result<Self> {
        let half = dense_half_length(resolution, sample_rate)?;
        if magnitudes.len() != half + 1 {
            return Err(Error::SpectrumShape(format!(
                "{} bins, expected {}",
                magnitudes.len(),
                half + 1
            )));
        }
        if magnitudes.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::SpectrumShape(
                "magnitudes must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            magnitudes,
            resolution,
            sample_rate,
        })
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.resolution
    }

    /// Length of the equivalent two-sided spectrum.
    pub fn fft_length(&self) -> usize {
        2 * (self.magnitudes.len() - 1)
    }

    /// Bin nearest to `f`, clamped to the grid.
    pub fn bin(&self, f: f64) -> usize {
        ((f / self.resolution).round().max(0.0) as usize).min(self.magnitudes.len() - 1)
    }
}

fn dense_half_length(resolution: f64, sample_rate: f64) -> Result<usize> {
    let ratio = sample_rate / (2.0 * resolution);
    if !(resolution > 0.0 && sample_rate > 0.0)
        || (ratio - ratio.round()).abs() > 1e-9
        || ratio < 1.0
    {
        return Err(Error::SpectrumShape(format!(
            "sample rate {sample_rate} Hz is not an even multiple of resolution {resolution} Hz"
        )));
    }
    Ok(ratio.round() as usize)
}

/// Piecewise-constant magnitude over each band's `[lower, upper)` edges,
/// zero outside the 30 bands.
pub fn band_to_dense_spectrum(
    bands: &[f64],
    resolution: f64,
    sample_rate: f64,
) -> Result<DenseSpectrum> {
    if bands.len() != BAND_COUNT {
        return Err(Error::Dimension(format!(
            "{} band values, expected {BAND_COUNT}",
            bands.len()
        )));
    }
    let half = dense_half_length(resolution, sample_rate)?;
    let mut mags = vec![0.0; half + 1];
    for (m, value) in bands.iter().enumerate() {
        let (lo, hi) = band_edges(m);
        let first = (lo / resolution).ceil() as usize;
        let last = ((hi / resolution).ceil() as usize).min(half + 1);
        for (k, slot) in mags.iter_mut().enumerate().take(last).skip(first) {
            // ceil puts exact edges into the upper band
            if (k as f64) * resolution < hi {
                *slot = *value;
            }
        }
    }
    DenseSpectrum::new(mags, resolution, sample_rate)
}

/// Power average over `[f·2^(−1/6), f·2^(1/6)]` around every bin.
pub fn smooth_third_octave(spec: &DenseSpectrum) -> DenseSpectrum {
    let n = spec.magnitudes.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for m in &spec.magnitudes {
        acc += m * m;
        prefix.push(acc);
    }
    let r = 2f64.powf(1.0 / 6.0);
    let out = (0..n)
        .map(|k| {
            let kf = k as f64;
            let lo = ((kf / r).ceil() as usize).min(k);
            let hi = ((kf * r).floor() as usize).clamp(k, n - 1);
            let power = (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64;
            power.max(0.0).sqrt()
        })
        .collect();
    DenseSpectrum {
        magnitudes: out,
        resolution: spec.resolution,
        sample_rate: spec.sample_rate,
    }
}

/// FFT plans for one transform length, shareable between threads.
#[derive(Clone)]
pub struct FirDesigner {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FirDesigner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FirDesigner").field("n", &self.n).finish()
    }
}

impl FirDesigner {
    pub fn new(fft_length: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n: fft_length,
            forward: planner.plan_fft_forward(fft_length),
            inverse: planner.plan_fft_inverse(fft_length),
        }
    }

    fn check(&self, spec: &DenseSpectrum, length: usize) -> Result<()> {
        if spec.fft_length() != self.n {
            return Err(Error::SpectrumShape(format!(
                "spectrum implies {} points, designer uses {}",
                spec.fft_length(),
                self.n
            )));
        }
        if length == 0 || length > self.n {
            return Err(Error::Dimension(format!(
                "filter length {length} must be in 1..={}",
                self.n
            )));
        }
        Ok(())
    }

    fn floored(spec: &DenseSpectrum) -> Option<Vec<f64>> {
        let max = spec.magnitudes.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return None;
        }
        let floor = max * 10f64.powf(FLOOR_DB / 20.0);
        Some(spec.magnitudes.iter().map(|m| m.max(floor)).collect())
    }

    /// Even two-sided extension of a single-sided real sequence.
    fn mirror(&self, half: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|k| Complex64::new(if k <= n / 2 { half[k] } else { half[n - k] }, 0.0))
            .collect()
    }

    /// Minimum-phase filter with the given magnitude, truncated to `length`.
    pub fn minimum_phase(&self, spec: &DenseSpectrum, length: usize) -> Result<Vec<f64>> {
        self.check(spec, length)?;
        let Some(mags) = Self::floored(spec) else {
            return Ok(vec![0.0; length]);
        };
        let logs: Vec<f64> = mags.iter().map(|m| m.ln()).collect();
        Ok(self.minimum_phase_from_log(&logs, length))
    }

    /// Minimum-phase filter from a single-sided natural-log magnitude.
    fn minimum_phase_from_log(&self, logs: &[f64], length: usize) -> Vec<f64> {
        let n = self.n;
        let mut buf = self.mirror(logs);
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        // fold the real cepstrum onto its causal part
        for (i, c) in buf.iter_mut().enumerate() {
            let re = c.re * scale;
            let folded = if i == 0 || i == n / 2 {
                re
            } else if i < n / 2 {
                2.0 * re
            } else {
                0.0
            };
            *c = Complex64::new(folded, 0.0);
        }
        self.forward.process(&mut buf);
        // the spectrum of a real sequence is Hermitian
        for c in &mut buf[..=n / 2] {
            *c = c.exp();
        }
        for k in n / 2 + 1..n {
            buf[k] = buf[n - k].conj();
        }
        self.inverse.process(&mut buf);
        let mut taps: Vec<f64> = buf[..length].iter().map(|c| c.re * scale).collect();
        if length < n {
            taper(&mut taps);
        }
        taps
    }

    /// Linear-phase filter with the given magnitude, centred in `length`
    /// samples.
    pub fn linear_phase(&self, spec: &DenseSpectrum, length: usize) -> Result<Vec<f64>> {
        self.check(spec, length)?;
        let Some(mags) = Self::floored(spec) else {
            return Ok(vec![0.0; length]);
        };
        let n = self.n;
        let mut buf = self.mirror(&mags);
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        let delay = length / 2;
        let mut taps: Vec<f64> = (0..length)
            .map(|i| buf[(i + n - delay) % n].re * scale)
            .collect();
        if length < n {
            taper(&mut taps);
        }
        Ok(taps)
    }

    /// Truncated minimum-phase filter for 30 band values, pre-compensated so
    /// that its response at the centre bins of the nonzero bands matches the
    /// smoothed target.
    pub fn band_filter(&self, bands: &[f64], length: usize) -> Result<BandFilter> {
        self.band_filter_from(bands, length, &[0.0; BAND_COUNT])
    }

    /// As [`FirDesigner::band_filter`], starting from a per-band correction
    /// in dB, typically taken from a similar spectrum.
    pub fn band_filter_from(
        &self,
        bands: &[f64],
        length: usize,
        start: &[f64; BAND_COUNT],
    ) -> Result<BandFilter> {
        let sample_rate = self.n as f64 * DEFAULT_RESOLUTION;
        let target = target_spectrum(bands, sample_rate)?;
        self.check(&target, length)?;
        let Some(mags) = Self::floored(&target) else {
            return Ok(BandFilter {
                taps: vec![0.0; length],
                target,
                correction_db: [0.0; BAND_COUNT],
                residual_db: 0.0,
            });
        };
        let base: Vec<f64> = mags.iter().map(|m| m.ln()).collect();
        let active: Vec<usize> = (0..BAND_COUNT)
            .filter(|m| bands[*m] > 0.0 && target.bin(NOMINAL_CENTERS[*m]) < target.len() - 1)
            .collect();
        if active.is_empty() {
            return Ok(BandFilter {
                taps: self.minimum_phase_from_log(&base, length),
                target,
                correction_db: [0.0; BAND_COUNT],
                residual_db: 0.0,
            });
        }
        let bins: Vec<usize> = active
            .iter()
            .map(|m| target.bin(NOMINAL_CENTERS[*m]))
            .collect();
        let freqs: Vec<f64> = bins.iter().map(|k| target.frequency(*k)).collect();
        let weights: Vec<(usize, f64)> = (0..target.len())
            .map(|k| log_interpolation_weight(&freqs, target.frequency(k)))
            .collect();
        let last = active.len() - 1;
        let db_to_neper = std::f64::consts::LN_10 / 20.0;
        let design = |correction: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let logs: Vec<f64> = base
                .iter()
                .zip(&weights)
                .map(|(b, (i, t))| {
                    let c = correction[*i] * (1.0 - t) + correction[(*i + 1).min(last)] * t;
                    b + c * db_to_neper
                })
                .collect();
            let taps = self.minimum_phase_from_log(&logs, length);
            let err = frequency_response(&taps, sample_rate, &freqs)
                .iter()
                .zip(&bins)
                .map(|(r, k)| 20.0 * (r / target.magnitudes[*k]).log10())
                .collect();
            (taps, err)
        };
        let worst = |e: &[f64]| e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut correction: Vec<f64> = active.iter().map(|m| start[*m]).collect();
        let (taps, mut err) = design(&correction);
        let mut best = (worst(&err), taps, correction.clone());
        for _ in 0..COMPENSATION_PASSES {
            if !(best.0 > COMPENSATION_TOLERANCE_DB) {
                break;
            }
            for (c, e) in correction.iter_mut().zip(&err) {
                *c -= e;
            }
            let (taps, e) = design(&correction);
            err = e;
            let w = worst(&err);
            if w < best.0 {
                best = (w, taps, correction.clone());
            }
        }
        let mut correction_db = [0.0; BAND_COUNT];
        for (m, c) in active.iter().zip(&best.2) {
            correction_db[*m] = *c;
        }
        Ok(BandFilter {
            taps: best.1,
            target,
            correction_db,
            residual_db: best.0,
        })
    }
}

/// Result of [`FirDesigner::band_filter`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandFilter {
    pub taps: Vec<f64>,
    /// Smoothed dense target spectrum.
    pub target: DenseSpectrum,
    /// Pre-compensation applied at each band centre.
    pub correction_db: [f64; BAND_COUNT],
    /// Largest remaining band-centre error.
    pub residual_db: f64,
}

/// Segment index and fraction for piecewise-linear interpolation over log
/// frequency through `freqs`, constant beyond the ends.
fn log_interpolation_weight(freqs: &[f64], f: f64) -> (usize, f64) {
    let last = freqs.len() - 1;
    if f <= freqs[0] {
        return (0, 0.0);
    }
    if f >= freqs[last] {
        return (last, 0.0);
    }
    let i = freqs.partition_point(|x| *x <= f) - 1;
    (i, (f / freqs[i]).ln() / (freqs[i + 1] / freqs[i]).ln())
}

/// Raised-cosine fade over the last [`TAPER_LENGTH`] samples.
fn taper(taps: &mut [f64]) {
    let len = taps.len();
    let t = TAPER_LENGTH.min(len);
    for j in 0..t {
        let w = 0.5 * (1.0 + (PI * (j as f64 + 0.5) / t as f64).cos());
        taps[len - t + j] *= w;
    }
}

/// Minimum-phase filter of `length` taps for a dense magnitude spectrum.
/// An all-zero spectrum gives an all-zero filter.
pub fn minimum_phase_fir(spec: &DenseSpectrum, length: usize) -> Result<Vec<f64>> {
    FirDesigner::new(spec.fft_length()).minimum_phase(spec, length)
}

/// Linear-phase counterpart of [`minimum_phase_fir`] with the same magnitude.
pub fn linear_phase_fir(spec: &DenseSpectrum, length: usize) -> Result<Vec<f64>> {
    FirDesigner::new(spec.fft_length()).linear_phase(spec, length)
}

/// Magnitude of the DTFT of `taps` at each frequency.
pub fn frequency_response(taps: &[f64], sample_rate: f64, frequencies: &[f64]) -> Vec<f64> {
    frequencies
        .iter()
        .map(|f| {
            let w = 2.0 * PI * f / sample_rate;
            // rotate a unit phasor instead of calling sin/cos per tap
            let step = Complex64::from_polar(1.0, -w);
            let mut phasor = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, h) in taps.iter().enumerate() {
                if i % 1024 == 0 {
                    phasor = Complex64::from_polar(1.0, -w * i as f64);
                }
                acc += phasor * h;
                phasor *= step;
            }
            acc.norm()
        })
        .collect()
}

/// One filter per grid direction.
#[derive(Debug, Clone, PartialEq)]
pub struct FirBank {
    taps: DMatrix<f64>,
    sample_rate: f64,
    grid: SphericalGrid,
}

impl FirBank {
    /// `taps` is R×length with one filter per row.
    pub fn new(taps: DMatrix<f64>, sample_rate: f64, grid: SphericalGrid) -> Result<Self> {
        if taps.nrows() != grid.len() || taps.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "{}x{} taps for a grid of {} points",
                taps.nrows(),
                taps.ncols(),
                grid.len()
            )));
        }
        if !(sample_rate > 0.0) || taps.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(
                "filter bank needs finite taps and a positive sample rate".into(),
            ));
        }
        Ok(Self {
            taps,
            sample_rate,
            grid,
        })
    }

    pub fn taps(&self) -> &DMatrix<f64> {
        &self.taps
    }

    pub fn filter(&self, r: usize) -> Vec<f64> {
        self.taps.row(r).iter().copied().collect()
    }

    pub fn length(&self) -> usize {
        self.taps.ncols()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }
}

/// Dense, smoothed target spectrum for one direction's band values.
pub fn target_spectrum(bands: &[f64], sample_rate: f64) -> Result<DenseSpectrum> {
    Ok(smooth_third_octave(&band_to_dense_spectrum(
        bands,
        DEFAULT_RESOLUTION,
        sample_rate,
    )?))
}

/// Minimum-phase filters for every direction of a 30-band directivity.
pub fn synthesize_bank(
    hi: &InterpolatedDirectivity,
    length: usize,
    sample_rate: f64,
) -> Result<FirBank> {
    if hi.bands() != BAND_COUNT {
        return Err(Error::Dimension(format!(
            "{} bands, expected {BAND_COUNT}",
            hi.bands()
        )));
    }
    let half = dense_half_length(DEFAULT_RESOLUTION, sample_rate)?;
    let designer = FirDesigner::new(2 * half);
    let p = hi.pressures();
    // the correction for the spatial RMS spectrum seeds every direction
    let mean: Vec<f64> = p
        .column_iter()
        .map(|c| (c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64).sqrt())
        .collect();
    let start = designer.band_filter(&mean, length)?.correction_db;
    let rows: Vec<Vec<f64>> = (0..p.nrows())
        .into_par_iter()
        .map(|r| {
            let bands: Vec<f64> = p.row(r).iter().copied().collect();
            designer
                .band_filter_from(&bands, length, &start)
                .map(|f| f.taps)
        })
        .collect::<Result<_>>()?;
    let taps = DMatrix::from_fn(rows.len(), length, |r, n| rows[r][n]);
    FirBank::new(taps, sample_rate, hi.grid().clone())
}
