//! Single-note directivities, third-octave band averages, equalization and
//! calibration to the level of the source recordings.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::bands::{band_index, BAND_COUNT, NOMINAL_CENTERS};
use crate::error::{Error, Result};
use crate::geometry::SphericalGrid;
use crate::interpolate::InterpolatedDirectivity;
use crate::partials::PartialSet;
use crate::recording::RecordingSet;
use crate::spectral::{scale_to_power, PsdEstimate};

/// Reference sound pressure in Pa.
pub const P0: f64 = 2e-5;

/// Half-width, in PSD bins, of the peak-picking neighborhood.
pub const PEAK_NEIGHBORHOOD: usize = 3;

/// Angular tolerance in radians for locating a reference direction on a grid.
pub const DIRECTION_TOLERANCE: f64 = 1e-6;

/// Tolerance on `Σ w'·g' = 1` for area equalization.
pub const ORIENTATION_WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EqualizationState {
    Raw,
    Diffuse,
    Point,
    Area,
    Calibrated,
}

impl fmt::Display for EqualizationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EqualizationState::Raw => "raw",
            EqualizationState::Diffuse => "diffuse",
            EqualizationState::Point => "point",
            EqualizationState::Area => "area",
            EqualizationState::Calibrated => "calibrated",
        })
    }
}

impl FromStr for EqualizationState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "raw" => EqualizationState::Raw,
            "diffuse" => EqualizationState::Diffuse,
            "point" => EqualizationState::Point,
            "area" => EqualizationState::Area,
            "calibrated" => EqualizationState::Calibrated,
            other => {
                return Err(Error::InvalidDocument(format!(
                    "unknown equalization state {other:?}"
                )))
            }
        })
    }
}

fn require_state(found: EqualizationState, allowed: &[EqualizationState]) -> Result<()> {
    if allowed.contains(&found) {
        return Ok(());
    }
    let expected = allowed
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" or ");
    Err(Error::WrongState {
        expected,
        found: found.to_string(),
    })
}

fn check_pressures(p: &DMatrix<f64>) -> Result<()> {
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidSignal(
            "pressures must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// Pressures of every partial of one note at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleToneDirectivity {
    partial_frequencies: Vec<f64>,
    pressures: DMatrix<f64>,
    grid: SphericalGrid,
}

impl SingleToneDirectivity {
    /// `pressures` is Q×(I+1): one row per grid point, one column per partial.
    pub fn new(
        partial_frequencies: Vec<f64>,
        pressures: DMatrix<f64>,
        grid: SphericalGrid,
    ) -> Result<Self> {
        if pressures.nrows() != grid.len() || pressures.ncols() != partial_frequencies.len() {
            return Err(Error::Dimension(format!(
                "pressures are {}x{}, expected {}x{}",
                pressures.nrows(),
                pressures.ncols(),
                grid.len(),
                partial_frequencies.len()
            )));
        }
        check_pressures(&pressures)?;
        Ok(Self {
            partial_frequencies,
            pressures,
            grid,
        })
    }

    pub fn partial_frequencies(&self) -> &[f64] {
        &self.partial_frequencies
    }

    pub fn pressures(&self) -> &DMatrix<f64> {
        &self.pressures
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }
}

/// Pressure at each partial: the square root of the largest scaled PSD value
/// within ±3 bins of the bin nearest to the partial frequency.
pub fn extract_single_tone(
    psds: &[PsdEstimate],
    partials: &PartialSet,
    grid: &SphericalGrid,
) -> Result<SingleToneDirectivity> {
    if psds.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "{} PSDs for a grid of {} points",
            psds.len(),
            grid.len()
        )));
    }
    let freqs = partials.frequencies();
    let mut pressures = DMatrix::zeros(grid.len(), freqs.len());
    for (q, psd) in psds.iter().enumerate() {
        let power = scale_to_power(psd);
        let grid_f = psd.frequencies();
        for (i, f) in freqs.iter().enumerate() {
            let k = nearest(grid_f, *f);
            let lo = k.saturating_sub(PEAK_NEIGHBORHOOD);
            let hi = (k + PEAK_NEIGHBORHOOD).min(power.len() - 1);
            let peak = power[lo..=hi].iter().copied().fold(0.0, f64::max);
            pressures[(q, i)] = peak.sqrt();
        }
    }
    SingleToneDirectivity::new(freqs.to_vec(), pressures, grid.clone())
}

fn nearest(grid: &[f64], f: f64) -> usize {
    let i = grid.partition_point(|x| *x < f);
    if i == 0 {
        0
    } else if i == grid.len() || f - grid[i - 1] <= grid[i] - f {
        i - 1
    } else {
        i
    }
}

/// Third-octave band pressures on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDirectivity {
    pressures: DMatrix<f64>,
    partial_counts: Vec<usize>,
    state: EqualizationState,
    grid: SphericalGrid,
}

impl BandDirectivity {
    /// `pressures` is Q×30; `partial_counts[m]` is the number of partials
    /// averaged into band `m`.
    pub fn new(
        pressures: DMatrix<f64>,
        partial_counts: Vec<usize>,
        state: EqualizationState,
        grid: SphericalGrid,
    ) -> Result<Self> {
        if pressures.nrows() != grid.len() || pressures.ncols() != BAND_COUNT {
            return Err(Error::Dimension(format!(
                "band pressures are {}x{}, expected {}x{BAND_COUNT}",
                pressures.nrows(),
                pressures.ncols(),
                grid.len()
            )));
        }
        if partial_counts.len() != BAND_COUNT {
            return Err(Error::Dimension(format!(
                "{} partial counts, expected {BAND_COUNT}",
                partial_counts.len()
            )));
        }
        check_pressures(&pressures)?;
        Ok(Self {
            pressures,
            partial_counts,
            state,
            grid,
        })
    }

    pub fn band_centers(&self) -> &'static [f64; BAND_COUNT] {
        &NOMINAL_CENTERS
    }

    pub fn pressures(&self) -> &DMatrix<f64> {
        &self.pressures
    }

    pub fn partial_counts(&self) -> &[usize] {
        &self.partial_counts
    }

    pub fn state(&self) -> EqualizationState {
        self.state
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    /// Bands with energy at any grid point.
    pub fn effective_bands(&self) -> Vec<bool> {
        effective_columns(&self.pressures)
    }

    /// Multiplies every entry by `gain`, keeping the state.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            pressures: &self.pressures * gain,
            ..self.clone()
        }
    }
}

fn effective_columns(p: &DMatrix<f64>) -> Vec<bool> {
    p.column_iter()
        .map(|c| c.iter().any(|v| *v > 0.0))
        .collect()
}

/// RMS over all partials of all notes falling into each band, per grid point.
/// Bands without partials are zero.
pub fn band_average(tones: &[SingleToneDirectivity]) -> Result<BandDirectivity> {
    let first = tones
        .first()
        .ok_or_else(|| Error::EmptyInput("no single-tone directivities".into()))?;
    let grid = first.grid.clone();
    let mut sums = DMatrix::<f64>::zeros(grid.len(), BAND_COUNT);
    let mut counts = vec![0usize; BAND_COUNT];
    for tone in tones {
        if tone.grid != grid {
            return Err(Error::Dimension(
                "single-tone directivities use different grids".into(),
            ));
        }
        for (i, f) in tone.partial_frequencies.iter().enumerate() {
            let Some(m) = band_index(*f) else { continue };
            counts[m] += 1;
            for q in 0..grid.len() {
                sums[(q, m)] += tone.pressures[(q, i)].powi(2);
            }
        }
    }
    for (m, l) in counts.iter().enumerate() {
        if *l > 0 {
            for q in 0..grid.len() {
                sums[(q, m)] = (sums[(q, m)] / *l as f64).sqrt();
            }
        }
    }
    BandDirectivity::new(sums, counts, EqualizationState::Raw, grid)
}

/// Divides each band by `sqrt(Σ_q p² w'_q)` so that every band radiates unit
/// area-weighted energy. Zero bands stay zero.
pub fn diffuse_equalize(d: &BandDirectivity) -> Result<BandDirectivity> {
    require_state(d.state, &[EqualizationState::Raw])?;
    let mut p = d.pressures.clone();
    let w = d.grid.weights();
    for mut col in p.column_iter_mut() {
        let energy: f64 = col.iter().zip(w).map(|(v, w)| v * v * w).sum();
        if energy > 0.0 {
            col /= energy.sqrt();
        }
    }
    BandDirectivity::new(
        p,
        d.partial_counts.clone(),
        EqualizationState::Diffuse,
        d.grid.clone(),
    )
}

const REFERENCEABLE: [EqualizationState; 3] = [
    EqualizationState::Raw,
    EqualizationState::Diffuse,
    EqualizationState::Calibrated,
];

/// Normalizes every band to its value in `mic_direction`, which must be a
/// point of the grid.
pub fn point_equalize(
    hi: &InterpolatedDirectivity,
    mic_direction: &crate::geometry::SphericalPoint,
) -> Result<InterpolatedDirectivity> {
    require_state(hi.state(), &REFERENCEABLE)?;
    let r = hi
        .grid()
        .find(mic_direction, DIRECTION_TOLERANCE)
        .ok_or_else(|| Error::NotOnGrid(mic_direction.to_string()))?;
    let reference: Vec<f64> = hi.pressures().row(r).iter().copied().collect();
    divide_bands(hi, &reference, EqualizationState::Point)
}

/// Scales `g` so that `Σ w'·g' = 1` over the region.
pub fn normalize_orientation_weights(
    grid: &SphericalGrid,
    region: &[usize],
    g: &[f64],
) -> Result<Vec<f64>> {
    check_region(grid, region, g)?;
    let total: f64 = region
        .iter()
        .zip(g)
        .map(|(r, g)| grid.weights()[*r] * g)
        .sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::WeightsNotNormalized(total));
    }
    Ok(g.iter().map(|g| g / total).collect())
}

fn check_region(grid: &SphericalGrid, region: &[usize], g: &[f64]) -> Result<()> {
    if region.is_empty() || region.len() != g.len() {
        return Err(Error::Dimension(format!(
            "region of {} points with {} orientation weights",
            region.len(),
            g.len()
        )));
    }
    if let Some(r) = region.iter().find(|r| **r >= grid.len()) {
        return Err(Error::Dimension(format!(
            "region index {r} outside a grid of {} points",
            grid.len()
        )));
    }
    if g.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::InvalidGrid(
            "orientation weights must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// Normalizes every band to the weighted RMS over a region of grid points
/// given by index, with orientation weights `g` satisfying `Σ w'·g' = 1`.
pub fn area_equalize(
    hi: &InterpolatedDirectivity,
    region: &[usize],
    orientation_weights: &[f64],
) -> Result<InterpolatedDirectivity> {
    require_state(hi.state(), &REFERENCEABLE)?;
    let grid = hi.grid();
    check_region(grid, region, orientation_weights)?;
    let wg: Vec<f64> = region
        .iter()
        .zip(orientation_weights)
        .map(|(r, g)| grid.weights()[*r] * g)
        .collect();
    let total: f64 = wg.iter().sum();
    if (total - 1.0).abs() > ORIENTATION_WEIGHT_TOLERANCE {
        return Err(Error::WeightsNotNormalized(total));
    }
    let p = hi.pressures();
    let reference: Vec<f64> = (0..p.ncols())
        .map(|m| {
            region
                .iter()
                .zip(&wg)
                .map(|(r, wg)| p[(*r, m)].powi(2) * wg)
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    divide_bands(hi, &reference, EqualizationState::Area)
}

fn divide_bands(
    hi: &InterpolatedDirectivity,
    reference: &[f64],
    state: EqualizationState,
) -> Result<InterpolatedDirectivity> {
    let mut p = hi.pressures().clone();
    for (m, mut col) in p.column_iter_mut().enumerate() {
        if col.iter().all(|v| *v == 0.0) {
            continue;
        }
        if reference[m] <= 0.0 {
            return Err(Error::ZeroReference {
                band: m,
                center: NOMINAL_CENTERS.get(m).copied().unwrap_or(f64::NAN),
            });
        }
        col /= reference[m];
    }
    InterpolatedDirectivity::new(hi.grid().clone(), p, state)
}

/// Per-channel levels and their energetic mean, re 20 µPa.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundLevelSummary {
    per_channel_db: Vec<f64>,
    spatial_average_db: f64,
}

impl SoundLevelSummary {
    /// Builds the summary from per-channel mean-square pressures in Pa².
    fn from_mean_squares(ms: &[f64]) -> Self {
        let per_channel_db = ms.iter().map(|m| level_db(*m)).collect();
        let mean = ms.iter().sum::<f64>() / ms.len() as f64;
        Self {
            per_channel_db,
            spatial_average_db: level_db(mean),
        }
    }

    pub fn per_channel_db(&self) -> &[f64] {
        &self.per_channel_db
    }

    pub fn spatial_average_db(&self) -> f64 {
        self.spatial_average_db
    }

    pub fn reference_pressure(&self) -> f64 {
        P0
    }
}

/// `10·lg(ms / p0²)`.
pub fn level_db(mean_square: f64) -> f64 {
    10.0 * (mean_square / (P0 * P0)).log10()
}

/// Level of each channel averaged over the effective bands, and its
/// energetic mean over channels.
pub fn band_levels(d: &BandDirectivity) -> Result<SoundLevelSummary> {
    let effective = d.effective_bands();
    let count = effective.iter().filter(|e| **e).count();
    if count == 0 {
        return Err(Error::NoEffectiveBands);
    }
    let ms: Vec<f64> = d
        .pressures
        .row_iter()
        .map(|row| {
            row.iter()
                .zip(&effective)
                .filter(|(_, e)| **e)
                .map(|(v, _)| v * v)
                .sum::<f64>()
                / count as f64
        })
        .collect();
    Ok(SoundLevelSummary::from_mean_squares(&ms))
}

/// Level of each channel from the mean square over the steady part of every
/// note, averaged over notes.
pub fn reference_levels(recordings: &[RecordingSet]) -> Result<SoundLevelSummary> {
    let first = recordings
        .first()
        .ok_or_else(|| Error::EmptyInput("no recordings for calibration".into()))?;
    let q = first.channel_count();
    let mut ms = vec![0.0; q];
    for rec in recordings {
        if rec.channel_count() != q {
            return Err(Error::ChannelMismatch {
                expected: q,
                found: rec.channel_count(),
            });
        }
        for (acc, ch) in ms.iter_mut().zip(rec.steady_part()) {
            *acc += ch.mean_square();
        }
    }
    for v in &mut ms {
        *v /= recordings.len() as f64;
    }
    Ok(SoundLevelSummary::from_mean_squares(&ms))
}

/// Outcome of [`calibrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub directivity: BandDirectivity,
    pub band_levels: SoundLevelSummary,
    pub reference_levels: SoundLevelSummary,
    pub gain: f64,
}

/// Scales a diffuse-equalized directivity so that its spatially averaged band
/// level matches the spatially averaged level of the recordings.
pub fn calibrate(d: &BandDirectivity, recordings: &[RecordingSet]) -> Result<Calibration> {
    require_state(d.state, &[EqualizationState::Diffuse])?;
    let band = band_levels(d)?;
    let reference = reference_levels(recordings)?;
    if reference.per_channel_db.len() != d.grid.len() {
        return Err(Error::ChannelMismatch {
            expected: d.grid.len(),
            found: reference.per_channel_db.len(),
        });
    }
    if !reference.spatial_average_db.is_finite() {
        return Err(Error::InvalidSignal("recordings are silent".into()));
    }
    let gain = 10f64.powf((reference.spatial_average_db - band.spatial_average_db) / 20.0);
    let mut directivity = d.scaled(gain);
    directivity.state = EqualizationState::Calibrated;
    Ok(Calibration {
        directivity,
        band_levels: band,
        reference_levels: reference,
        gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_equiangular_grid, measurement_layout, SphericalPoint};
    use crate::partials::{find_partials, ChannelSpectra, Dynamic, NoteContext};
    use crate::spectral::{welch_psd, TimeSignal, WELCH_OVERLAP, WELCH_SEGMENTS};

    fn two_point_grid() -> SphericalGrid {
        SphericalGrid::new(
            vec![
                SphericalPoint::new(0.0, 0.0, 1.0).unwrap(),
                SphericalPoint::new(0.0, 180.0, 1.0).unwrap(),
            ],
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    fn tone(freqs: &[f64], rows: &[&[f64]], grid: &SphericalGrid) -> SingleToneDirectivity {
        let p = DMatrix::from_fn(rows.len(), freqs.len(), |q, i| rows[q][i]);
        SingleToneDirectivity::new(freqs.to_vec(), p, grid.clone()).unwrap()
    }

    fn bands_with(grid: &SphericalGrid, m: usize, col: &[f64]) -> BandDirectivity {
        let mut p = DMatrix::zeros(grid.len(), BAND_COUNT);
        for (q, v) in col.iter().enumerate() {
            p[(q, m)] = *v;
        }
        let mut counts = vec![0; BAND_COUNT];
        counts[m] = 1;
        BandDirectivity::new(p, counts, EqualizationState::Raw, grid.clone()).unwrap()
    }

    #[test]
    fn band_average_of_equal_partials() {
        let g = two_point_grid();
        let t = tone(&[1000.0, 1050.0], &[&[1.0, 1.0], &[2.0, 2.0]], &g);
        let b = band_average(&[t]).unwrap();
        assert_eq!(b.pressures()[(0, 16)], 1.0);
        assert_eq!(b.pressures()[(1, 16)], 2.0);
        assert_eq!(b.partial_counts()[16], 2);
        assert_eq!(b.state(), EqualizationState::Raw);
    }

    #[test]
    fn band_average_rms_of_three_and_four() {
        let g = two_point_grid();
        let a = tone(&[1000.0], &[&[3.0], &[0.0]], &g);
        let b = tone(&[1100.0], &[&[4.0], &[0.0]], &g);
        let avg = band_average(&[a, b]).unwrap();
        assert!((avg.pressures()[(0, 16)] - 12.5f64.sqrt()).abs() < 1e-15);
        for m in (0..BAND_COUNT).filter(|m| *m != 16) {
            assert_eq!(avg.pressures()[(0, m)], 0.0);
        }
    }

    #[test]
    fn band_assignment_follows_computed_edges() {
        let g = two_point_grid();
        let t = tone(
            &[890.0, 891.0, 892.0],
            &[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]],
            &g,
        );
        let b = band_average(&[t]).unwrap();
        assert_eq!(b.partial_counts()[15], 2);
        assert_eq!(b.partial_counts()[16], 1);
    }

    #[test]
    fn band_average_ignores_out_of_span_partials() {
        let g = two_point_grid();
        let t = tone(
            &[10.0, 21000.0, 30000.0],
            &[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]],
            &g,
        );
        let b = band_average(&[t]).unwrap();
        assert_eq!(b.partial_counts().iter().sum::<usize>(), 1);
        assert!(band_average(&[]).is_err());
    }

    #[test]
    fn diffuse_two_point_example() {
        let g = two_point_grid();
        let d = diffuse_equalize(&bands_with(&g, 3, &[1.0, 3.0])).unwrap();
        assert!((d.pressures()[(0, 3)] - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((d.pressures()[(1, 3)] - 3.0 / 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.pressures()[(0, 4)], 0.0);
        assert_eq!(d.state(), EqualizationState::Diffuse);
        assert!(matches!(
            diffuse_equalize(&d),
            Err(Error::WrongState { .. })
        ));
    }

    #[test]
    fn diffuse_uniform_is_one() {
        let g = measurement_layout();
        let d = diffuse_equalize(&bands_with(&g, 10, &[0.3; 32])).unwrap();
        for q in 0..32 {
            assert!((d.pressures()[(q, 10)] - 1.0).abs() < 1e-12);
        }
    }

    fn dipole(grid: &SphericalGrid) -> InterpolatedDirectivity {
        let p = DMatrix::from_fn(grid.len(), 2, |r, m| {
            let u = grid.points()[r].unit_vector();
            (m + 1) as f64 * u[0].abs()
        });
        InterpolatedDirectivity::new(grid.clone(), p, EqualizationState::Diffuse).unwrap()
    }

    #[test]
    fn point_equalize_at_lobe_maximum() {
        let grid = make_equiangular_grid(15.0).unwrap();
        let hi = dipole(&grid);
        let front = SphericalPoint::new(0.0, 90.0, 1.0).unwrap();
        let eq = point_equalize(&hi, &front).unwrap();
        let r = grid.find(&front, 1e-9).unwrap();
        for m in 0..2 {
            assert!((eq.pressures()[(r, m)] - 1.0).abs() < 1e-15);
        }
        assert!(eq.pressures().iter().all(|v| *v <= 1.0 + 1e-15));
        assert_eq!(eq.state(), EqualizationState::Point);
    }

    #[test]
    fn point_equalize_errors() {
        let grid = make_equiangular_grid(15.0).unwrap();
        let hi = dipole(&grid);
        let off = SphericalPoint::new(7.0, 90.0, 1.0).unwrap();
        assert!(matches!(
            point_equalize(&hi, &off),
            Err(Error::NotOnGrid(_))
        ));
        let side = SphericalPoint::new(0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            point_equalize(&hi, &side),
            Err(Error::ZeroReference { band: 0, .. })
        ));
    }

    #[test]
    fn area_over_full_sphere_matches_diffuse() {
        let grid = make_equiangular_grid(15.0).unwrap();
        let hi = dipole(&grid);
        let region: Vec<usize> = (0..grid.len()).collect();
        let eq = area_equalize(&hi, &region, &vec![1.0; grid.len()]).unwrap();
        for m in 0..2 {
            let energy: f64 = (0..grid.len())
                .map(|r| eq.pressures()[(r, m)].powi(2) * grid.weights()[r])
                .sum();
            assert!((energy - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn area_over_single_point_matches_point() {
        let grid = make_equiangular_grid(15.0).unwrap();
        let hi = dipole(&grid);
        let front = SphericalPoint::new(0.0, 90.0, 1.0).unwrap();
        let r = grid.find(&front, 1e-9).unwrap();
        let g = normalize_orientation_weights(&grid, &[r], &[1.0]).unwrap();
        let a = area_equalize(&hi, &[r], &g).unwrap();
        let p = point_equalize(&hi, &front).unwrap();
        for (x, y) in a.pressures().iter().zip(p.pressures().iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn area_cap_matches_direct_sum() {
        let grid = make_equiangular_grid(5.0).unwrap();
        let hi = dipole(&grid);
        let front = SphericalPoint::new(0.0, 90.0, 1.0).unwrap();
        let region: Vec<usize> = (0..grid.len())
            .filter(|r| {
                crate::geometry::central_angle(&grid.points()[*r], &front) <= 47f64.to_radians()
            })
            .collect();
        let g = normalize_orientation_weights(&grid, &region, &vec![1.0; region.len()]).unwrap();
        let eq = area_equalize(&hi, &region, &g).unwrap();
        let wsum: f64 = region.iter().map(|r| grid.weights()[*r]).sum();
        for m in 0..2 {
            let ms: f64 = region
                .iter()
                .map(|r| hi.pressures()[(*r, m)].powi(2) * grid.weights()[*r])
                .sum::<f64>()
                / wsum;
            let r0 = grid.find(&front, 1e-9).unwrap();
            let expected = hi.pressures()[(r0, m)] / ms.sqrt();
            assert!((eq.pressures()[(r0, m)] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn area_rejects_unnormalized_weights() {
        let grid = make_equiangular_grid(15.0).unwrap();
        let hi = dipole(&grid);
        assert!(matches!(
            area_equalize(&hi, &[0, 1], &[1.0, 1.0]),
            Err(Error::WeightsNotNormalized(_))
        ));
        assert!(area_equalize(&hi, &[0], &[1.0, 1.0]).is_err());
        assert!(area_equalize(&hi, &[grid.len()], &[1.0]).is_err());
    }

    fn sine(amplitude: f64, f: f64, fs: f64, n: usize) -> TimeSignal {
        TimeSignal::new(
            (0..n)
                .map(|i| amplitude * (2.0 * std::f64::consts::PI * f * i as f64 / fs).sin())
                .collect(),
            fs,
        )
        .unwrap()
    }

    #[test]
    fn extract_monopole_pressure() {
        let grid = measurement_layout();
        let fs = 44100.0;
        let f = 44100.0 / 4410.0 * 100.0; // on a PSD bin for 8×4410-sample segments
        let x = sine(2.0, f, fs, 4410 * 9 / 2);
        let psds: Vec<_> = (0..32)
            .map(|_| welch_psd(&x, WELCH_SEGMENTS, WELCH_OVERLAP).unwrap())
            .collect();
        let spectra = ChannelSpectra::new(vec![f], vec![vec![1.0]; 32]).unwrap();
        let partials = find_partials(&spectra, f, fs / 2.0).unwrap();
        let tone = extract_single_tone(&psds, &partials, &grid).unwrap();
        for q in 0..32 {
            let p = tone.pressures()[(q, 0)];
            assert!((p / 2f64.sqrt() - 1.0).abs() < 0.01, "{p}");
        }
    }

    #[test]
    fn extract_silent_channel_is_zero() {
        let grid = two_point_grid();
        let fs = 8000.0;
        let loud = welch_psd(&sine(1.0, 500.0, fs, 4000), 8, 0.5).unwrap();
        let quiet = welch_psd(&TimeSignal::new(vec![0.0; 4000], fs).unwrap(), 8, 0.5).unwrap();
        let spectra = ChannelSpectra::new(vec![500.0], vec![vec![1.0]]).unwrap();
        let partials = find_partials(&spectra, 500.0, fs / 2.0).unwrap();
        let tone = extract_single_tone(&[loud, quiet], &partials, &grid).unwrap();
        assert!(tone.pressures()[(0, 0)] > 0.5);
        assert_eq!(tone.pressures()[(1, 0)], 0.0);
    }

    fn corpus(amplitude: f64, grid_len: usize) -> Vec<RecordingSet> {
        let ctx = NoteContext::new(69, 442.0, Dynamic::Ff, (100, 4100)).unwrap();
        let x = sine(amplitude, 1000.0, 8000.0, 4200);
        vec![RecordingSet::new(vec![x; grid_len], ctx).unwrap()]
    }

    #[test]
    fn calibration_reaches_the_recording_level() {
        let grid = measurement_layout();
        let raw = bands_with(&grid, 16, &[0.7; 32]);
        let diffuse = diffuse_equalize(&raw).unwrap();
        let cal = calibrate(&diffuse, &corpus(1.0, 32)).unwrap();
        // 1 Pa peak sinusoid: mean square 0.5 Pa²
        assert!((cal.reference_levels.spatial_average_db() - level_db(0.5)).abs() < 1e-9);
        assert!((level_db(0.5) - 90.969_100_130_080_56).abs() < 1e-9);
        let after = band_levels(&cal.directivity).unwrap();
        assert!(
            (after.spatial_average_db() - cal.reference_levels.spatial_average_db()).abs() < 1e-6
        );
        assert_eq!(cal.directivity.state(), EqualizationState::Calibrated);
    }

    #[test]
    fn calibration_is_linear_in_recording_amplitude() {
        let grid = measurement_layout();
        let diffuse = diffuse_equalize(&bands_with(&grid, 5, &[0.2; 32])).unwrap();
        let a = calibrate(&diffuse, &corpus(1.0, 32)).unwrap();
        let b = calibrate(&diffuse, &corpus(2.0, 32)).unwrap();
        let ratio = b.directivity.pressures()[(0, 5)] / a.directivity.pressures()[(0, 5)];
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_errors() {
        let grid = measurement_layout();
        let raw = bands_with(&grid, 5, &[0.2; 32]);
        assert!(matches!(
            calibrate(&raw, &corpus(1.0, 32)),
            Err(Error::WrongState { .. })
        ));
        let diffuse = diffuse_equalize(&raw).unwrap();
        assert!(calibrate(&diffuse, &[]).is_err());
        assert!(calibrate(&diffuse, &corpus(1.0, 4)).is_err());
        let empty = BandDirectivity::new(
            DMatrix::zeros(32, BAND_COUNT),
            vec![0; BAND_COUNT],
            EqualizationState::Raw,
            grid,
        )
        .unwrap();
        assert!(matches!(band_levels(&empty), Err(Error::NoEffectiveBands)));
    }

    #[test]
    fn band_levels_skip_empty_bands() {
        let grid = two_point_grid();
        let mut p = DMatrix::zeros(2, BAND_COUNT);
        p[(0, 0)] = 1.0;
        p[(1, 1)] = 1.0;
        let d = BandDirectivity::new(p, vec![1; BAND_COUNT], EqualizationState::Raw, grid).unwrap();
        let levels = band_levels(&d).unwrap();
        assert!((levels.per_channel_db()[0] - level_db(0.5)).abs() < 1e-12);
        assert!((levels.spatial_average_db() - level_db(0.5)).abs() < 1e-12);
    }
}
