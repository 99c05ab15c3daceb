//! Spherical spline interpolation of band magnitudes.
//!
//! The interpolant is `f̂(u) = Σ_q c_q K(u·u_q) + d` with the side condition
//! `Σ c_q = 0`, where `K` is the thin-plate pseudo-spline kernel on the sphere
//!
//! ```text
//! K(z) = (q₂(z)/2! − 1/3!) / 2π
//! q₂(z) = ½ [ A (12W² − 4W) − 12 W^{3/2} + 6W + 1 ],  W = (1 − z)/2,  A = ln(1 + 1/√W)
//! ```
//!
//! Coefficients solve `[K + λI, 1; 1ᵀ, 0] [c; d] = [f; 0]`.

use log::debug;
use nalgebra::{DMatrix, DVector, LU};

use crate::directivity::{BandDirectivity, EqualizationState};
use crate::error::{Error, Result};
use crate::geometry::{dot, SphericalGrid, SphericalPoint};

/// Minimum number of interpolation nodes.
pub const MIN_NODES: usize = 4;

/// Pivot ratio below which the spline system is treated as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-13;

/// `q₂(z)` from the closed form; `q₂(1) = ½`.
fn q2(z: f64) -> f64 {
    let w = ((1.0 - z) / 2.0).clamp(0.0, 1.0);
    if w == 0.0 {
        return 0.5;
    }
    let sw = w.sqrt();
    let a = (1.0 + 1.0 / sw).ln();
    0.5 * (a * (12.0 * w * w - 4.0 * w) - 12.0 * w * sw + 6.0 * w + 1.0)
}

/// Reproducing kernel of the order-1 pseudo-spline as a function of the
/// cosine of the angle between two directions.
pub fn spline_kernel(z: f64) -> f64 {
    (q2(z) / 2.0 - 1.0 / 6.0) / (2.0 * std::f64::consts::PI)
}

/// Fitted spline for one scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineModel {
    nodes: Vec<SphericalPoint>,
    coefficients: Vec<f64>,
    constant: f64,
    smoothing: f64,
    order: u32,
}

impl SplineModel {
    pub fn nodes(&self) -> &[SphericalPoint] {
        &self.nodes
    }

    /// Kernel coefficients `c_q`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Constant term `d`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn order(&self) -> u32 {
        self.order
    }
}

fn check_order(order: u32) -> Result<()> {
    if order == 1 {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(order))
    }
}

fn kernel_matrix(rows: &[[f64; 3]], cols: &[[f64; 3]]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        spline_kernel(dot(rows[i], cols[j]).clamp(-1.0, 1.0))
    })
}

/// Factorized spline system for a fixed node set, reusable across fields.
#[derive(Debug, Clone)]
pub struct SplineInterpolator {
    nodes: Vec<SphericalPoint>,
    units: Vec<[f64; 3]>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    smoothing: f64,
    order: u32,
}

impl SplineInterpolator {
    pub fn new(grid: &SphericalGrid, order: u32, smoothing: f64) -> Result<Self> {
        check_order(order)?;
        if !(smoothing.is_finite() && smoothing >= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "smoothing {smoothing} must be finite and >= 0"
            )));
        }
        let q = grid.len();
        if q < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "{q} nodes, spline fit needs at least {MIN_NODES}"
            )));
        }
        let units = grid.unit_vectors();
        let k = kernel_matrix(&units, &units);
        let mut a = DMatrix::zeros(q + 1, q + 1);
        a.view_mut((0, 0), (q, q)).copy_from(&k);
        for i in 0..q {
            a[(i, i)] += smoothing;
            a[(i, q)] = 1.0;
            a[(q, i)] = 1.0;
        }
        let lu = a.lu();
        let diag = lu.u().diagonal().map(f64::abs);
        let (lo, hi) = (diag.min(), diag.max());
        if !(hi > 0.0) || lo / hi < SINGULAR_PIVOT_RATIO {
            return Err(Error::SingularSystem);
        }
        Ok(Self {
            nodes: grid.points().to_vec(),
            units,
            lu,
            smoothing,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn fit(&self, values: &[f64]) -> Result<SplineModel> {
        let q = self.nodes.len();
        if values.len() != q {
            return Err(Error::Dimension(format!(
                "{} values for {q} nodes",
                values.len()
            )));
        }
        let mut rhs = DVector::zeros(q + 1);
        rhs.rows_mut(0, q).copy_from_slice(values);
        let sol = self.lu.solve(&rhs).ok_or(Error::SingularSystem)?;
        Ok(SplineModel {
            nodes: self.nodes.clone(),
            coefficients: sol.rows(0, q).iter().copied().collect(),
            constant: sol[q],
            smoothing: self.smoothing,
            order: self.order,
        })
    }

    /// Fits every column of `values` (Q×M) and evaluates all of them on
    /// `targets`, giving an R×M matrix.
    pub fn interpolate_columns(
        &self,
        values: &DMatrix<f64>,
        targets: &SphericalGrid,
    ) -> Result<DMatrix<f64>> {
        let q = self.nodes.len();
        if values.nrows() != q {
            return Err(Error::Dimension(format!(
                "{} value rows for {q} nodes",
                values.nrows()
            )));
        }
        let mut rhs = DMatrix::zeros(q + 1, values.ncols());
        rhs.view_mut((0, 0), (q, values.ncols())).copy_from(values);
        let sol = self.lu.solve(&rhs).ok_or(Error::SingularSystem)?;
        let e = kernel_matrix(&targets.unit_vectors(), &self.units);
        let mut out = e * sol.rows(0, q);
        for (mut col, d) in out.column_iter_mut().zip(sol.row(q).iter()) {
            col.add_scalar_mut(*d);
        }
        Ok(out)
    }
}

/// Fits an order-1 spline through `values` at the grid points.
pub fn fit_spline(
    values: &[f64],
    grid: &SphericalGrid,
    order: u32,
    smoothing: f64,
) -> Result<SplineModel> {
    SplineInterpolator::new(grid, order, smoothing)?.fit(values)
}

/// Evaluates the kernel expansion at every target point.
pub fn evaluate_spline(model: &SplineModel, targets: &SphericalGrid) -> Vec<f64> {
    let nodes: Vec<[f64; 3]> = model
        .nodes
        .iter()
        .map(SphericalPoint::unit_vector)
        .collect();
    targets
        .points()
        .iter()
        .map(|t| {
            let u = t.unit_vector();
            nodes
                .iter()
                .zip(&model.coefficients)
                .map(|(n, c)| c * spline_kernel(dot(u, *n).clamp(-1.0, 1.0)))
                .sum::<f64>()
                + model.constant
        })
        .collect()
}

/// Band pressures on a dense grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatedDirectivity {
    grid: SphericalGrid,
    pressures: DMatrix<f64>,
    state: EqualizationState,
}

impl InterpolatedDirectivity {
    /// `pressures` is R×M with one row per grid point.
    pub fn new(
        grid: SphericalGrid,
        pressures: DMatrix<f64>,
        state: EqualizationState,
    ) -> Result<Self> {
        if pressures.nrows() != grid.len() || pressures.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "pressures are {}x{} for a grid of {} points",
                pressures.nrows(),
                pressures.ncols(),
                grid.len()
            )));
        }
        if pressures.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidSignal(
                "pressures must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            grid,
            pressures,
            state,
        })
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    pub fn pressures(&self) -> &DMatrix<f64> {
        &self.pressures
    }

    pub fn state(&self) -> EqualizationState {
        self.state
    }

    pub fn bands(&self) -> usize {
        self.pressures.ncols()
    }
}

/// Interpolates every band of `d` onto `target`, clamping negative
/// overshoot to zero.
pub fn upsample(
    d: &BandDirectivity,
    target: &SphericalGrid,
    smoothing: f64,
) -> Result<InterpolatedDirectivity> {
    if !matches!(
        d.state(),
        EqualizationState::Diffuse | EqualizationState::Calibrated
    ) {
        return Err(Error::WrongState {
            expected: "diffuse or calibrated".into(),
            found: d.state().to_string(),
        });
    }
    let interp = SplineInterpolator::new(d.grid(), 1, smoothing)?;
    let mut p = interp.interpolate_columns(d.pressures(), target)?;
    let mut clamped = 0usize;
    for v in p.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clamped += 1;
        }
    }
    if clamped > 0 {
        debug!("clamped {clamped} negative spline values to zero");
    }
    InterpolatedDirectivity::new(target.clone(), p, d.state())
}
