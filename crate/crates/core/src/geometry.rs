//! Spherical coordinates, sampling grids and quadrature weights.
//!
//! Conventions: azimuth is measured in degrees from the +x axis towards +y,
//! colatitude in degrees from the +z axis (0° = north pole, 180° = south
//! pole), radius in metres. Poles carry a canonical azimuth of 0°.
//!
//! Every grid carries normalized area weights that sum to one. Scattered
//! layouts use spherical Voronoi cell areas; equiangular grids use the
//! closed-form ring areas between colatitude midpoints.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Radius of the 32-capsule measurement array (2.1 m diameter).
pub const ARRAY_RADIUS: f64 = 1.05;

/// Tolerance on Σ weights for every grid.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

const POLE_TOLERANCE_DEG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    azimuth: f64,
    colatitude: f64,
    radius: f64,
}

impl SphericalPoint {
    /// Builds a point from degrees and metres. Azimuth is wrapped into
    /// [0, 360); poles get azimuth 0.
    pub fn new(azimuth: f64, colatitude: f64, radius: f64) -> Result<Self> {
        if !(azimuth.is_finite() && colatitude.is_finite() && radius.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        if !(0.0..=180.0).contains(&colatitude) {
            return Err(Error::InvalidPoint(format!(
                "colatitude {colatitude}° outside [0, 180]"
            )));
        }
        if radius <= 0.0 {
            return Err(Error::InvalidPoint(format!(
                "radius {radius} m must be > 0"
            )));
        }
        let mut azimuth = azimuth.rem_euclid(360.0);
        if azimuth >= 360.0 {
            azimuth = 0.0;
        }
        if !(POLE_TOLERANCE_DEG..=180.0 - POLE_TOLERANCE_DEG).contains(&colatitude) {
            azimuth = 0.0;
        }
        Ok(Self {
            azimuth,
            colatitude,
            radius,
        })
    }

    /// Direction of a (not necessarily normalized) cartesian vector.
    pub fn from_cartesian(v: [f64; 3], radius: f64) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidPoint("zero-length direction".into()));
        }
        let colatitude = (v[2] / norm).clamp(-1.0, 1.0).acos().to_degrees();
        let azimuth = v[1].atan2(v[0]).to_degrees();
        Self::new(azimuth, colatitude, radius)
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn colatitude(&self) -> f64 {
        self.colatitude
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn with_radius(self, radius: f64) -> Result<Self> {
        Self::new(self.azimuth, self.colatitude, radius)
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.colatitude.to_radians().sin_cos();
        let (sp, cp) = self.azimuth.to_radians().sin_cos();
        [st * cp, st * sp, ct]
    }
}

impl std::fmt::Display for SphericalPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(az {}°, col {}°, r {} m)",
            self.azimuth, self.colatitude, self.radius
        )
    }
}

/// Great-circle angle between two directions in radians, in [0, π].
pub fn central_angle(a: &SphericalPoint, b: &SphericalPoint) -> f64 {
    let u = a.unit_vector();
    let v = b.unit_vector();
    norm(cross(u, v)).atan2(dot(u, v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    points: Vec<SphericalPoint>,
    weights: Vec<f64>,
}

impl SphericalGrid {
    /// Validates and wraps a point list with its normalized area weights.
    pub fn new(points: Vec<SphericalPoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid has no points".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidGrid(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidGrid(format!("weight {w} is not > 0")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidGrid(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        if let Some((i, j)) = find_duplicate(&points) {
            return Err(Error::InvalidGrid(format!(
                "points {i} and {j} coincide at {}",
                points[i]
            )));
        }
        Ok(Self { points, weights })
    }

    /// Grid over scattered points with spherical Voronoi weights.
    pub fn from_points(points: Vec<SphericalPoint>) -> Result<Self> {
        let weights = area_weights(&points)?;
        Self::new(points, weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SphericalPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn unit_vectors(&self) -> Vec<[f64; 3]> {
        self.points
            .iter()
            .map(SphericalPoint::unit_vector)
            .collect()
    }

    /// Same directions and weights, every point moved to `radius`.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| p.with_radius(radius))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            weights: self.weights.clone(),
        })
    }

    /// Index of the grid point in direction `p`, if any lies within `tolerance` radians.
    pub fn find(&self, p: &SphericalPoint, tolerance: f64) -> Option<usize> {
        let target = p.unit_vector();
        self.points
            .iter()
            .map(|q| norm(cross(q.unit_vector(), target)).atan2(dot(q.unit_vector(), target)))
            .enumerate()
            .filter(|(_, angle)| *angle <= tolerance)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// Angular step if this grid has exactly the layout produced by
    /// [`make_equiangular_grid`] (point order included).
    pub fn equiangular_step(&self) -> Option<f64> {
        valid_steps().into_iter().find_map(|step| {
            let step = step as f64;
            if equiangular_count(step) != self.len() {
                return None;
            }
            let reference = equiangular_points(step, 1.0);
            let same = reference.iter().zip(&self.points).all(|(a, b)| {
                (a.azimuth - b.azimuth).abs() < 1e-9 && (a.colatitude - b.colatitude).abs() < 1e-9
            });
            same.then_some(step)
        })
    }

    /// Plain-text table: one `azimuth colatitude radius weight` row per point.
    /// Values are printed in shortest round-trip form.
    pub fn to_table(&self) -> String {
        let mut out = String::from("# azimuth_deg colatitude_deg radius_m weight\n");
        for (p, w) in self.points.iter().zip(&self.weights) {
            let _ = writeln!(out, "{} {} {} {}", p.azimuth, p.colatitude, p.radius, w);
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidGrid(format!("line {}: {e}", lineno + 1)))?;
            if fields.len() != 4 {
                return Err(Error::InvalidGrid(format!(
                    "line {}: expected 4 columns, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            points.push(SphericalPoint::new(fields[0], fields[1], fields[2])?);
            weights.push(fields[3]);
        }
        Self::new(points, weights)
    }
}

fn valid_steps() -> Vec<u32> {
    (1..=180).filter(|d| 180 % d == 0).collect()
}

fn equiangular_count(step: f64) -> usize {
    let rings = (180.0 / step).round() as usize - 1;
    let azimuths = (360.0 / step).round() as usize;
    rings * azimuths + 2
}

fn equiangular_points(step: f64, radius: f64) -> Vec<SphericalPoint> {
    let rings = (180.0 / step).round() as usize - 1;
    let azimuths = (360.0 / step).round() as usize;
    let mut points = Vec::with_capacity(rings * azimuths + 2);
    points.push(SphericalPoint {
        azimuth: 0.0,
        colatitude: 0.0,
        radius,
    });
    for ring in 1..=rings {
        for a in 0..azimuths {
            points.push(SphericalPoint {
                azimuth: a as f64 * step,
                colatitude: ring as f64 * step,
                radius,
            });
        }
    }
    points.push(SphericalPoint {
        azimuth: 0.0,
        colatitude: 180.0,
        radius,
    });
    points
}

/// Equiangular grid with poles stored once, unit radius.
///
/// Point order: north pole, then rings of increasing colatitude (azimuth
/// increasing within a ring), then south pole. Weights are the exact areas of
/// the colatitude bands between ring midpoints, split evenly over each ring;
/// the poles own the caps down to half a step.
pub fn make_equiangular_grid(step: f64) -> Result<SphericalGrid> {
    let ratio = 180.0 / step;
    if !(step.is_finite() && step > 0.0) || (ratio - ratio.round()).abs() > 1e-9 || ratio < 0.5 {
        let valid = valid_steps()
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::InvalidGridStep { step, valid });
    }
    let rings = ratio.round() as usize - 1;
    let azimuths = (360.0 / step).round() as usize;
    let half = (step / 2.0).to_radians();
    let cap = (1.0 - half.cos()) / 2.0;

    let mut weights = Vec::with_capacity(rings * azimuths + 2);
    weights.push(cap);
    for ring in 1..=rings {
        let centre = (ring as f64 * step).to_radians();
        let band = ((centre - half).cos() - (centre + half).cos()) / 2.0;
        weights.extend(std::iter::repeat_n(band / azimuths as f64, azimuths));
    }
    weights.push(cap);
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);

    Ok(SphericalGrid {
        points: equiangular_points(step, 1.0),
        weights,
    })
}

/// Normalized spherical Voronoi cell areas of `points` (directions only).
///
/// The Delaunay triangulation is the convex hull of the unit vectors; every
/// hull facet contributes its outward normal as a Voronoi vertex to the cells
/// of its three corners. Coplanar facets produce coincident vertices, which
/// are merged, so cospherical subsets are handled without special casing.
pub fn area_weights(points: &[SphericalPoint]) -> Result<Vec<f64>> {
    let n = points.len();
    if n < 4 {
        return Err(Error::DegeneratePoints(format!(
            "need at least 4 points, got {n}"
        )));
    }
    let units: Vec<[f64; 3]> = points.iter().map(SphericalPoint::unit_vector).collect();
    if let Some((i, j)) = find_duplicate(points) {
        return Err(Error::DegeneratePoints(format!(
            "points {i} and {j} coincide"
        )));
    }
    if !spans_volume(&units) {
        return Err(Error::DegeneratePoints(
            "all points lie in one plane (e.g. a single great circle)".into(),
        ));
    }

    const PLANE_EPS: f64 = 1e-10;
    let mut vertices: Vec<Vec<[f64; 3]>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let eij = sub(units[j], units[i]);
            for k in j + 1..n {
                let normal = cross(eij, sub(units[k], units[i]));
                let len = norm(normal);
                if len < 1e-14 {
                    continue;
                }
                let normal = scale(normal, 1.0 / len);
                let (mut above, mut below) = (false, false);
                for (l, u) in units.iter().enumerate() {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    let s = dot(normal, sub(*u, units[i]));
                    above |= s > PLANE_EPS;
                    below |= s < -PLANE_EPS;
                    if above && below {
                        break;
                    }
                }
                if above && below {
                    continue;
                }
                let vertex = if above { scale(normal, -1.0) } else { normal };
                vertices[i].push(vertex);
                vertices[j].push(vertex);
                vertices[k].push(vertex);
            }
        }
    }

    let mut areas = Vec::with_capacity(n);
    for (centre, cell) in units.iter().zip(vertices) {
        areas.push(cell_area(*centre, cell)?);
    }
    let total: f64 = areas.iter().sum();
    if (total - 4.0 * PI).abs() > 1e-6 * 4.0 * PI {
        return Err(Error::DegeneratePoints(format!(
            "Voronoi cells cover {total} sr instead of 4π"
        )));
    }
    Ok(areas.into_iter().map(|a| a / total).collect())
}

fn cell_area(centre: [f64; 3], mut vertices: Vec<[f64; 3]>) -> Result<f64> {
    // tangent basis at the generator
    let helper = if centre[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = normalize(cross(centre, helper));
    let e2 = cross(centre, e1);
    let angle = |v: &[f64; 3]| dot(*v, e2).atan2(dot(*v, e1));
    vertices.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    vertices.dedup_by(|a, b| norm(sub(*a, *b)) < 1e-9);
    if vertices.len() > 1 && norm(sub(vertices[0], vertices[vertices.len() - 1])) < 1e-9 {
        vertices.pop();
    }
    if vertices.len() < 3 {
        return Err(Error::DegeneratePoints(
            "Voronoi cell with fewer than 3 vertices".into(),
        ));
    }
    let mut area = 0.0;
    for (a, b) in vertices.iter().zip(vertices.iter().cycle().skip(1)) {
        area += triangle_area(centre, *a, *b);
    }
    Ok(area)
}

/// Solid angle of the spherical triangle with unit-vector corners.
fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let numerator = dot(a, cross(b, c)).abs();
    let denominator = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * numerator.atan2(denominator)
}

fn spans_volume(units: &[[f64; 3]]) -> bool {
    let p0 = units[0];
    let Some(p1) = units.iter().find(|p| norm(sub(**p, p0)) > 1e-9) else {
        return false;
    };
    let e1 = sub(*p1, p0);
    let Some(n) = units
        .iter()
        .map(|p| cross(e1, sub(*p, p0)))
        .find(|n| norm(*n) > 1e-9)
    else {
        return false;
    };
    let n = normalize(n);
    units.iter().any(|p| dot(n, sub(*p, p0)).abs() > 1e-9)
}

fn find_duplicate(points: &[SphericalPoint]) -> Option<(usize, usize)> {
    // quantized direction keys; exact duplicates collide
    let mut seen = HashMap::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let key = p.unit_vector().map(|c| (c * 1e9).round() as i64);
        if let Some(&j) = seen.get(&key) {
            return Some((j, i));
        }
        seen.insert(key, i);
    }
    None
}

/// The 32-capsule measurement array: vertices of a pentakis dodecahedron
/// (12 icosahedron vertices followed by the 20 vertices of the dual
/// dodecahedron) at radius [`ARRAY_RADIUS`], with Voronoi weights.
pub fn measurement_layout() -> SphericalGrid {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut dirs: Vec<[f64; 3]> = Vec::with_capacity(32);
    for a in [-1.0, 1.0] {
        for b in [-phi, phi] {
            dirs.extend([[0.0, a, b], [a, b, 0.0], [b, 0.0, a]]);
        }
    }
    for x in [-1.0, 1.0] {
        for y in [-1.0, 1.0] {
            for z in [-1.0, 1.0] {
                dirs.push([x, y, z]);
            }
        }
    }
    for a in [-phi, phi] {
        for b in [-1.0 / phi, 1.0 / phi] {
            dirs.extend([[0.0, a, b], [a, b, 0.0], [b, 0.0, a]]);
        }
    }
    let points = dirs
        .into_iter()
        .map(|d| SphericalPoint::from_cartesian(d, ARRAY_RADIUS))
        .collect::<Result<Vec<_>>>()
        .expect("layout directions are non-zero");
    SphericalGrid::from_points(points).expect("pentakis dodecahedron is non-degenerate")
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    scale(a, 1.0 / norm(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn five_degree_grid_has_2522_points() {
        let grid = make_equiangular_grid(5.0).unwrap();
        assert_eq!(grid.len(), 2522);
        assert!(close(grid.weights().iter().sum(), 1.0, 1e-12));
    }

    #[test]
    fn ninety_degree_grid() {
        let grid = make_equiangular_grid(90.0).unwrap();
        assert_eq!(grid.len(), 6);
        let cols: Vec<f64> = grid.points().iter().map(|p| p.colatitude()).collect();
        assert_eq!(cols, vec![0.0, 90.0, 90.0, 90.0, 90.0, 180.0]);
        assert!(close(grid.weights().iter().sum(), 1.0, 1e-12));
        // caps are (1 - cos 45°)/2, ring points share the rest
        let cap = (1.0 - std::f64::consts::FRAC_1_SQRT_2) / 2.0;
        assert!(close(grid.weights()[0], cap, 1e-15));
        assert!(close(
            grid.weights()[1],
            std::f64::consts::FRAC_1_SQRT_2 / 4.0,
            1e-15
        ));
    }

    #[test]
    fn ten_degree_grid_count() {
        assert_eq!(make_equiangular_grid(10.0).unwrap().len(), 17 * 36 + 2);
    }

    #[test]
    fn count_formula_holds_for_all_steps() {
        for step in valid_steps() {
            let d = step as f64;
            let grid = make_equiangular_grid(d).unwrap();
            let expected = (180 / step - 1) as usize * (360 / step) as usize + 2;
            assert_eq!(grid.len(), expected, "step {step}");
            assert!(close(grid.weights().iter().sum(), 1.0, 1e-12));
            assert_eq!(grid.equiangular_step(), Some(d));
        }
    }

    #[test]
    fn invalid_step_lists_valid_ones() {
        let err = make_equiangular_grid(7.0).unwrap_err().to_string();
        assert!(err.contains("1, 2, 3, 4, 5, 6, 9, 10"), "{err}");
        assert!(make_equiangular_grid(0.0).is_err());
        assert!(make_equiangular_grid(-5.0).is_err());
        assert!(make_equiangular_grid(f64::NAN).is_err());
    }

    #[test]
    fn octahedron_weights_are_equal() {
        let dirs = [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let pts: Vec<_> = dirs
            .iter()
            .map(|d| SphericalPoint::from_cartesian(*d, 1.0).unwrap())
            .collect();
        for w in area_weights(&pts).unwrap() {
            assert!(close(w, 1.0 / 6.0, 1e-12), "{w}");
        }
    }

    #[test]
    fn icosahedron_weights_are_equal() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut pts = Vec::new();
        for a in [-1.0, 1.0] {
            for b in [-phi, phi] {
                for d in [[0.0, a, b], [a, b, 0.0], [b, 0.0, a]] {
                    pts.push(SphericalPoint::from_cartesian(d, 1.0).unwrap());
                }
            }
        }
        for w in area_weights(&pts).unwrap() {
            assert!(close(w, 1.0 / 12.0, 1e-12), "{w}");
        }
    }

    #[test]
    fn great_circle_is_degenerate() {
        let pts: Vec<_> = (0..8)
            .map(|k| SphericalPoint::new(k as f64 * 45.0, 90.0, 1.0).unwrap())
            .collect();
        assert!(matches!(
            area_weights(&pts),
            Err(Error::DegeneratePoints(_))
        ));
    }

    #[test]
    fn too_few_or_duplicate_points() {
        let p = SphericalPoint::new(0.0, 90.0, 1.0).unwrap();
        assert!(area_weights(&[p, p, p]).is_err());
        let q = SphericalPoint::new(90.0, 90.0, 1.0).unwrap();
        let r = SphericalPoint::new(0.0, 0.0, 1.0).unwrap();
        let s = SphericalPoint::new(0.0, 180.0, 1.0).unwrap();
        assert!(area_weights(&[p, q, r, s, q]).is_err());
    }

    #[test]
    fn measurement_layout_weights_in_range() {
        let grid = measurement_layout();
        assert_eq!(grid.len(), 32);
        assert!(close(grid.weights().iter().sum(), 1.0, 1e-12));
        for w in grid.weights() {
            assert!((0.02..=0.05).contains(w), "{w}");
        }
        assert!(grid
            .points()
            .iter()
            .all(|p| close(p.radius(), ARRAY_RADIUS, 1e-15)));
    }

    #[test]
    fn central_angle_examples() {
        let a = SphericalPoint::new(0.0, 90.0, 1.0).unwrap();
        let b = SphericalPoint::new(90.0, 90.0, 1.0).unwrap();
        let c = SphericalPoint::new(180.0, 90.0, 2.0).unwrap();
        assert_eq!(central_angle(&a, &a), 0.0);
        assert!(close(central_angle(&a, &b), PI / 2.0, 1e-15));
        assert!(close(central_angle(&a, &c), PI, 1e-15));
        assert!(close(central_angle(&b, &a), central_angle(&a, &b), 0.0));
    }

    #[test]
    fn point_normalization() {
        let p = SphericalPoint::new(-90.0, 45.0, 1.0).unwrap();
        assert_eq!(p.azimuth(), 270.0);
        let pole = SphericalPoint::new(123.0, 0.0, 1.0).unwrap();
        assert_eq!(pole.azimuth(), 0.0);
        assert!(SphericalPoint::new(0.0, 181.0, 1.0).is_err());
        assert!(SphericalPoint::new(0.0, 90.0, 0.0).is_err());
    }

    #[test]
    fn table_round_trip() {
        let grid = measurement_layout();
        let text = grid.to_table();
        assert_eq!(SphericalGrid::from_table(&text).unwrap(), grid);
    }

    #[test]
    fn grid_rejects_bad_weights() {
        let p = SphericalPoint::new(0.0, 0.0, 1.0).unwrap();
        let q = SphericalPoint::new(0.0, 180.0, 1.0).unwrap();
        assert!(SphericalGrid::new(vec![p, q], vec![0.5, 0.5]).is_ok());
        assert!(SphericalGrid::new(vec![p, q], vec![0.5, 0.6]).is_err());
        assert!(SphericalGrid::new(vec![p, q], vec![1.0, 0.0]).is_err());
        assert!(SphericalGrid::new(vec![p, p], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn find_locates_grid_points() {
        let grid = make_equiangular_grid(5.0).unwrap();
        let front = SphericalPoint::new(0.0, 90.0, 1.0).unwrap();
        let idx = grid.find(&front, 1e-9).unwrap();
        assert_eq!(grid.points()[idx].colatitude(), 90.0);
        assert_eq!(grid.points()[idx].azimuth(), 0.0);
        let off = SphericalPoint::new(2.5, 90.0, 1.0).unwrap();
        assert!(grid.find(&off, 1e-9).is_none());
    }
}
