//! Values frozen from independent reference computations.

use sonodir_core::geometry::{make_equiangular_grid, measurement_layout};
use sonodir_core::interpolate::{evaluate_spline, fit_spline};

/// Monte-Carlo spherical Voronoi cell areas of the pentakis dodecahedron
/// (4e6 samples), as fractions of the sphere.
const ICOSAHEDRAL_CELL: f64 = 0.03011;
const DODECAHEDRAL_CELL: f64 = 0.03193;
const MC_TOLERANCE: f64 = 3e-4;

/// Relative RMS error of 1 + 0.3x − 0.2y + 0.5z interpolated from the
/// capsules to the 5° grid.
const DEGREE_ONE_ERROR: f64 = 0.006_067_866_116_074_867_5;

#[test]
fn measurement_weights_match_monte_carlo() {
    let mut w = measurement_layout().weights().to_vec();
    w.sort_by(f64::total_cmp);
    for v in &w[..12] {
        assert!((v - ICOSAHEDRAL_CELL).abs() <= MC_TOLERANCE, "{v}");
    }
    for v in &w[12..] {
        assert!((v - DODECAHEDRAL_CELL).abs() <= MC_TOLERANCE, "{v}");
    }
}

#[test]
fn degree_one_interpolation_error() {
    let nodes = measurement_layout();
    let dense = make_equiangular_grid(5.0).unwrap();
    let field = |u: [f64; 3]| 1.0 + 0.3 * u[0] - 0.2 * u[1] + 0.5 * u[2];
    let values: Vec<f64> = nodes.unit_vectors().into_iter().map(field).collect();
    let est = evaluate_spline(&fit_spline(&values, &nodes, 1, 0.0).unwrap(), &dense);
    let truth: Vec<f64> = dense.unit_vectors().into_iter().map(field).collect();
    let err: f64 = est.iter().zip(&truth).map(|(a, b)| (a - b).powi(2)).sum();
    let norm: f64 = truth.iter().map(|b| b * b).sum();
    assert!(((err / norm).sqrt() - DEGREE_ONE_ERROR).abs() <= 1e-9);
}
