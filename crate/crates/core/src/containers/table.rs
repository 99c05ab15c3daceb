//! Plot-ready balloon tables: tab-separated `azimuth colatitude level_db`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::directivity::P0;
use crate::error::{Error, Result};
use crate::geometry::SphericalGrid;

use super::write_bytes;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalloonRow {
    pub azimuth: f64,
    pub colatitude: f64,
    pub level_db: f64,
}

/// One row per grid point for column `column` of an R×N pressure matrix.
/// Levels are `20·log10(p / P0)`; zero pressure gives −inf.
pub fn balloon_rows(
    grid: &SphericalGrid,
    pressures: &DMatrix<f64>,
    column: usize,
) -> Result<Vec<BalloonRow>> {
    if pressures.nrows() != grid.len() {
        return Err(Error::Dimension(format!(
            "{} rows for a grid of {} points",
            pressures.nrows(),
            grid.len()
        )));
    }
    if column >= pressures.ncols() {
        return Err(Error::Dimension(format!(
            "index {column} out of range; the data has {} columns",
            pressures.ncols()
        )));
    }
    Ok(grid
        .points()
        .iter()
        .zip(pressures.column(column).iter())
        .map(|(p, v)| BalloonRow {
            azimuth: p.azimuth(),
            colatitude: p.colatitude(),
            level_db: 20.0 * (v.abs() / P0).log10(),
        })
        .collect())
}

pub fn format_balloon_table(rows: &[BalloonRow]) -> String {
    let mut out = String::from("azimuth_deg\tcolatitude_deg\tlevel_db\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{:.6}", r.azimuth, r.colatitude, r.level_db);
    }
    out
}

pub fn write_balloon_table(rows: &[BalloonRow], path: &Path) -> Result<()> {
    write_bytes(path, format_balloon_table(rows).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::measurement_layout;

    #[test]
    fn uniform_balloon_gives_a_constant_column() {
        let grid = measurement_layout();
        let p = DMatrix::from_element(32, 30, 1.0);
        let rows = balloon_rows(&grid, &p, 12).unwrap();
        assert_eq!(rows.len(), 32);
        assert!(rows.iter().all(|r| r.level_db == rows[0].level_db));
        assert!((rows[0].level_db - 93.979_400_086_720_38).abs() < 1e-12);
        let text = format_balloon_table(&rows);
        assert_eq!(text.lines().count(), 33);
        assert!(balloon_rows(&grid, &p, 30).is_err());
    }
}
