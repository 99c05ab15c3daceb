//! Fixtures shared by the benchmarks in `benches/`.

use nalgebra::DMatrix;
use sonodir_core::bands::BAND_COUNT;
use sonodir_core::directivity::{BandDirectivity, EqualizationState};
use sonodir_core::geometry::measurement_layout;
use sonodir_core::spectral::TimeSignal;
use sonodir_core::synth::{harmonic_tone, SAMPLE_RATE};

/// One second of a 440 Hz harmonic tone.
pub fn tone_second() -> TimeSignal {
    let len = SAMPLE_RATE as usize;
    TimeSignal::new(harmonic_tone(440.0, 0.2, len, SAMPLE_RATE), SAMPLE_RATE).unwrap()
}

/// A smooth, direction-dependent 30-band balloon on the capsule layout.
pub fn capsule_balloon() -> BandDirectivity {
    let grid = measurement_layout();
    let u = grid.unit_vectors();
    let p = DMatrix::from_fn(grid.len(), BAND_COUNT, |q, m| {
        1.0 + 0.4 * u[q][0] * (m as f64 / 10.0).cos() + 0.2 * u[q][2]
    });
    BandDirectivity::new(p, vec![1; BAND_COUNT], EqualizationState::Calibrated, grid).unwrap()
}

/// Band values of one direction with a falling slope.
pub fn band_shape() -> Vec<f64> {
    (0..BAND_COUNT)
        .map(|m| 1.0 / (1.0 + m as f64 / 8.0))
        .collect()
}
