//! Discrete fields on the periodic channel `T x [-1, 1]` and their
//! differential calculus.
//!
//! `x` is periodic over `[0, 2*pi)` with `nx` samples and no duplicated
//! seam column; `y` spans `[-1, 1]` inclusive with `ny` samples. Arrays are
//! row-major x-then-y: entry `[ix, iy]`. Derivatives in `x` are Fourier
//! spectral, derivatives in `y` are 4th-order finite differences with
//! one-sided 4th-order stencils at the walls (no ghost points).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::Fft;

use crate::error::FlowError;
use crate::Result;

/// Uniform grid on the periodic channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    nx: usize,
    ny: usize,
}

/// Build a grid, rejecting parity/size violations.
///
/// `nx` must be even and at least 8 (x-spectral transform), `ny` must be
/// odd and at least 9 (so the midline y = 0 lies on the grid).
pub fn make_grid(nx: usize, ny: usize) -> Result<Grid> {
    if nx < 8 || nx % 2 != 0 {
        return Err(FlowError::InvalidGrid(format!(
            "nx must be even and >= 8, got {nx}"
        )));
    }
    if ny < 9 || ny % 2 != 1 {
        return Err(FlowError::InvalidGrid(format!(
            "ny must be odd and >= 9, got {ny}"
        )));
    }
    Ok(Grid { nx, ny })
}

impl Grid {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// x spacing, `2*pi / nx`.
    pub fn hx(&self) -> f64 {
        2.0 * PI / self.nx as f64
    }

    /// y spacing, `2 / (ny - 1)`.
    pub fn hy(&self) -> f64 {
        2.0 / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        2.0 * PI * ix as f64 / self.nx as f64
    }

    pub fn y(&self, iy: usize) -> f64 {
        -1.0 + self.hy() * iy as f64
    }

    /// Index of the midline row y = 0.
    pub fn mid_row(&self) -> usize {
        (self.ny - 1) / 2
    }
}

/// Scalar field sampled on a [`Grid`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Array2<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: Array2::zeros((grid.nx, grid.ny)),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.nx, grid.ny), |(ix, iy)| {
            let v = f(grid.x(ix), grid.y(iy));
            debug_assert!(v.is_finite());
            v
        });
        ScalarField { grid, values }
    }

    pub fn from_values(grid: Grid, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.nx, grid.ny) {
            return Err(FlowError::GridMismatch(format!(
                "expected {}x{}, got {:?}",
                grid.nx,
                grid.ny,
                values.dim()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(FlowError::InvalidParameter(
                "field contains non-finite values".into(),
            ));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// L2 norm under the grid quadrature (trapezoid in y, uniform in x).
    pub fn l2_norm(&self) -> f64 {
        let g = self.grid;
        let mut acc = 0.0;
        for ix in 0..g.nx {
            for iy in 0..g.ny {
                let w = if iy == 0 || iy == g.ny - 1 { 0.5 } else { 1.0 };
                let v = self.values[[ix, iy]];
                acc += w * v * v;
            }
        }
        (acc * g.hx() * g.hy()).sqrt()
    }

    /// Bilinear interpolation at a physical point (x wraps periodically,
    /// y is clamped to the walls).
    pub fn interp(&self, x: f64, y: f64) -> f64 {
        let g = self.grid;
        let two_pi = 2.0 * PI;
        let xm = x.rem_euclid(two_pi);
        let fx = xm / g.hx();
        let ix0 = (fx.floor() as usize).min(g.nx - 1);
        let tx = fx - ix0 as f64;
        let ix1 = (ix0 + 1) % g.nx;
        let fy = ((y + 1.0) / g.hy()).clamp(0.0, (g.ny - 1) as f64);
        let iy0 = (fy.floor() as usize).min(g.ny - 2);
        let ty = fy - iy0 as f64;
        let v00 = self.values[[ix0, iy0]];
        let v10 = self.values[[ix1, iy0]];
        let v01 = self.values[[ix0, iy0 + 1]];
        let v11 = self.values[[ix1, iy0 + 1]];
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty + v11 * tx * ty
    }
}

/// Velocity field sampled on a [`Grid`].
#[derive(Debug, Clone)]
pub struct VectorField {
    pub grid: Grid,
    pub u1: Array2<f64>,
    pub u2: Array2<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            grid,
            u1: Array2::zeros((grid.nx, grid.ny)),
            u2: Array2::zeros((grid.nx, grid.ny)),
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.u1
            .iter()
            .zip(self.u2.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a * a + b * b).sqrt()))
    }

    /// Pointwise magnitude `|u|`.
    pub fn magnitude(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid);
        ndarray::azip!((o in &mut out.values, a in &self.u1, b in &self.u2) {
            *o = (a * a + b * b).sqrt();
        });
        out
    }
}

// ---------------------------------------------------------------------------
// FFT plumbing (plans cached per size)

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn fft_plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = rustfft::FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Signed wavenumber for mode index `i` of an `n`-point transform.
pub(crate) fn wavenumber(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Forward FFT along x of every y-row; output normalized by `1/nx`.
pub(crate) fn fft_x(field: &ScalarField) -> Array2<Complex64> {
    let g = field.grid;
    let (fwd, _) = fft_plans(g.nx);
    let mut out = Array2::from_elem((g.nx, g.ny), Complex64::new(0.0, 0.0));
    let mut buf = vec![Complex64::new(0.0, 0.0); g.nx];
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            buf[ix] = Complex64::new(field.values[[ix, iy]], 0.0);
        }
        fwd.process(&mut buf);
        let scale = 1.0 / g.nx as f64;
        for ix in 0..g.nx {
            out[[ix, iy]] = buf[ix] * scale;
        }
    }
    out
}

/// Inverse of [`fft_x`], discarding the imaginary part.
pub(crate) fn ifft_x(grid: Grid, coeffs: &Array2<Complex64>) -> ScalarField {
    let (_, inv) = fft_plans(grid.nx);
    let mut out = ScalarField::zeros(grid);
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.nx];
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            buf[ix] = coeffs[[ix, iy]];
        }
        inv.process(&mut buf);
        for ix in 0..grid.nx {
            out.values[[ix, iy]] = buf[ix].re;
        }
    }
    out
}

/// Spectral x-derivative. The Nyquist mode is zeroed, as usual for odd
/// derivatives of real data.
pub(crate) fn dx_spectral(field: &ScalarField) -> ScalarField {
    let g = field.grid;
    let mut coeffs = fft_x(field);
    for ix in 0..g.nx {
        let k = if ix == g.nx / 2 { 0.0 } else { wavenumber(ix, g.nx) };
        let ik = Complex64::new(0.0, k);
        for iy in 0..g.ny {
            coeffs[[ix, iy]] *= ik;
        }
    }
    ifft_x(g, &coeffs)
}

/// Zero all x-modes with |k| > nx/3 (the 2/3 dealiasing rule).
pub(crate) fn dealias_x(field: &mut ScalarField) {
    let g = field.grid;
    let kmax = g.nx as f64 / 3.0;
    let mut coeffs = fft_x(field);
    let mut any = false;
    for ix in 0..g.nx {
        if wavenumber(ix, g.nx).abs() > kmax {
            for iy in 0..g.ny {
                coeffs[[ix, iy]] = Complex64::new(0.0, 0.0);
            }
            any = true;
        }
    }
    if any {
        *field = ifft_x(g, &coeffs);
    }
}

// ---------------------------------------------------------------------------
// 4th-order y derivative

/// First y-derivative, 4th order: centered in the interior, skewed and
/// one-sided 5-point stencils near and at the walls (exact through quartics).
pub(crate) fn dy_fd4(field: &ScalarField) -> ScalarField {
    let g = field.grid;
    let n = g.ny;
    let h12 = 1.0 / (12.0 * g.hy());
    let mut out = ScalarField::zeros(g);
    for ix in 0..g.nx {
        let f = |j: usize| field.values[[ix, j]];
        out.values[[ix, 0]] =
            (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) * h12;
        out.values[[ix, 1]] =
            (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) * h12;
        for j in 2..n - 2 {
            out.values[[ix, j]] =
                (f(j - 2) - 8.0 * f(j - 1) + 8.0 * f(j + 1) - f(j + 2)) * h12;
        }
        out.values[[ix, n - 2]] =
            (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) * h12;
        out.values[[ix, n - 1]] = (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3)
            - 16.0 * f(n - 4)
            + 3.0 * f(n - 5))
            * h12;
    }
    out
}

// ---------------------------------------------------------------------------
// Calculus operations

/// Gradient `(df/dx, df/dy)`: spectral in x, 4th-order finite differences in y.
pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField {
        grid: f.grid,
        u1: dx_spectral(f).values,
        u2: dy_fd4(f).values,
    }
}

/// Perpendicular gradient `(-d(psi)/dy, d(psi)/dx)`, the velocity of the
/// stream function `psi`.
pub fn perp_gradient(psi: &ScalarField) -> VectorField {
    let g = gradient(psi);
    let mut u1 = g.u2;
    u1.mapv_inplace(|v| -v);
    VectorField {
        grid: psi.grid,
        u1,
        u2: g.u1,
    }
}

/// Divergence `du1/dx + du2/dy` with the same operators as [`gradient`].
pub fn divergence(u: &VectorField) -> ScalarField {
    let f1 = ScalarField {
        grid: u.grid,
        values: u.u1.clone(),
    };
    let f2 = ScalarField {
        grid: u.grid,
        values: u.u2.clone(),
    };
    let d1 = dx_spectral(&f1);
    let d2 = dy_fd4(&f2);
    ScalarField {
        grid: u.grid,
        values: d1.values + d2.values,
    }
}

/// Laplacian, computed as `divergence(gradient(f))` so that the operator
/// consistency identity holds by construction (identical stencils compose).
pub fn laplacian(f: &ScalarField) -> ScalarField {
    divergence(&gradient(f))
}

/// Pointwise advection `u1 * dw/dx + u2 * dw/dy`. Vanishes analytically for
/// a steady Euler pair `(u, omega)`; the discrete value is pure
/// discretization error.
pub fn advect_residual(u: &VectorField, w: &ScalarField) -> Result<ScalarField> {
    if u.grid != w.grid {
        return Err(FlowError::GridMismatch(
            "velocity and scalar live on different grids".into(),
        ));
    }
    let wx = dx_spectral(w);
    let wy = dy_fd4(w);
    let mut out = ScalarField::zeros(w.grid);
    ndarray::azip!((o in &mut out.values, a in &u.u1, b in &u.u2, gx in &wx.values, gy in &wy.values) {
        *o = a * gx + b * gy;
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Frozen regression tolerances
//
// The discrete x- and y-derivative operators act on different array axes and
// therefore commute exactly; div(perp_grad(psi)) is zero up to FFT rounding.
// These constants were measured once on reference fields (random smooth
// stream functions with constant wall rows, grids up to 512x513) and frozen
// with an order of magnitude of headroom.

/// Bound on `max |div(perp_grad(psi))| / max |grad(psi)|`.
pub const TOL_DIV_REL: f64 = 1e-11;

/// Bound on `|u2|` at the walls relative to `max |u|` for stream functions
/// constant on each wall (impermeability).
pub const TOL_BC_REL: f64 = 1e-12;
