//! Third-octave bands with base-10 edges, 25 Hz to 20 kHz.

/// Number of third-octave bands.
pub const BAND_COUNT: usize = 30;

/// Nominal centre frequencies in Hz.
pub const NOMINAL_CENTERS: [f64; BAND_COUNT] = [
    25.0, 31.5, 40.0, 50.0, 63.0, 80.0, 100.0, 125.0, 160.0, 200.0, 250.0, 315.0, 400.0, 500.0,
    630.0, 800.0, 1000.0, 1250.0, 1600.0, 2000.0, 2500.0, 3150.0, 4000.0, 5000.0, 6300.0, 8000.0,
    10000.0, 12500.0, 16000.0, 20000.0,
];

/// Band exponent of the 25 Hz band relative to 1 kHz.
const FIRST_EXPONENT: i32 = -16;

/// Exact mid-band frequency `1000·10^(x/10)` of band `m`.
pub fn exact_center(m: usize) -> f64 {
    assert!(m < BAND_COUNT, "band index {m} out of range");
    1000.0 * 10f64.powf(f64::from(FIRST_EXPONENT + m as i32) / 10.0)
}

/// Lower and upper edge of band `m`. Bands are half-open `[lower, upper)`.
pub fn band_edges(m: usize) -> (f64, f64) {
    let c = exact_center(m);
    let g = 10f64.powf(1.0 / 20.0);
    (c / g, c * g)
}

/// Band containing `f`, or `None` outside 22.4 Hz to 22.4 kHz.
pub fn band_index(f: f64) -> Option<usize> {
    if !(f.is_finite() && f > 0.0) {
        return None;
    }
    // first guess from the exponent, then settle against the computed edges
    let x = 10.0 * (f / 1000.0).log10() - f64::from(FIRST_EXPONENT);
    let guess = x.round();
    if !(-1.0..=BAND_COUNT as f64).contains(&guess) {
        return None;
    }
    let guess = guess.max(0.0).min((BAND_COUNT - 1) as f64) as usize;
    let lo = guess.saturating_sub(1);
    let hi = (guess + 1).min(BAND_COUNT - 1);
    (lo..=hi).find(|&m| {
        let (a, b) = band_edges(m);
        f >= a && f < b
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_centres_track_nominal_values() {
        for (m, nominal) in NOMINAL_CENTERS.iter().enumerate() {
            let rel = (exact_center(m) - nominal).abs() / nominal;
            assert!(rel < 0.03, "band {m}: {} vs {nominal}", exact_center(m));
        }
        assert_eq!(exact_center(16), 1000.0);
    }

    #[test]
    fn edges_are_contiguous() {
        for m in 1..BAND_COUNT {
            let rel = (band_edges(m - 1).1 - band_edges(m).0).abs() / band_edges(m).0;
            assert!(rel < 1e-14);
        }
        assert!((band_edges(0).0 - 22.387_211_385_683_4).abs() < 1e-9);
        assert!((band_edges(29).1 - 22_387.211_385_683_4).abs() < 1e-6);
    }

    #[test]
    fn boundary_between_800_and_1000() {
        let edge = band_edges(16).0;
        assert!((edge - 891.250_938_133_745_6).abs() < 1e-9);
        assert_eq!(band_index(890.0), Some(15));
        assert_eq!(band_index(891.0), Some(15));
        assert_eq!(band_index(892.0), Some(16));
        assert_eq!(band_index(edge), Some(16));
    }

    #[test]
    fn outside_the_span() {
        assert_eq!(band_index(20.0), None);
        assert_eq!(band_index(22_500.0), None);
        assert_eq!(band_index(0.0), None);
        assert_eq!(band_index(f64::NAN), None);
        assert_eq!(band_index(25.0), Some(0));
        assert_eq!(band_index(20_000.0), Some(29));
    }

    #[test]
    fn every_centre_maps_to_its_band() {
        for (m, nominal) in NOMINAL_CENTERS.iter().enumerate() {
            assert_eq!(band_index(exact_center(m)), Some(m));
            assert_eq!(band_index(*nominal), Some(m));
        }
    }
}
