//! Channel Euler time stepper in vorticity/stream-function form, used as a
//! verifier: steadiness persistence, traveling-wave phase speed and nested
//! vortex orbit frequency.
//!
//! `d(omega)/dt = -u . grad(omega)` with `u = perp_grad(psi)` and
//! `psi = laplacian^{-1}(omega)` solved per x-wavenumber by a 4th-order
//! (Numerov) tridiagonal solve with Dirichlet wall values. Classical
//! 4-stage explicit integration with the 2/3 dealiasing rule in x.

use num_complex::Complex64;

use crate::error::FlowError;
use crate::grid::{
    dealias_x, dx_spectral, dy_fd4, fft_x, ifft_x, wavenumber, Grid, ScalarField, VectorField,
};
use crate::Result;

/// Advective CFL constant for [`step`].
pub const CFL: f64 = 0.5;

/// Evolution state: vorticity plus conserved wall stream values.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub omega: ScalarField,
    /// stream value on the wall y = -1 (constant in time)
    pub psi_bottom: f64,
    /// stream value on the wall y = +1 (constant in time)
    pub psi_top: f64,
    pub t: f64,
    pub dt: f64,
}

impl EvolutionState {
    pub fn new(omega: ScalarField, psi_bottom: f64, psi_top: f64, dt: f64) -> Self {
        EvolutionState {
            omega,
            psi_bottom,
            psi_top,
            t: 0.0,
            dt,
        }
    }

    pub fn grid(&self) -> Grid {
        self.omega.grid
    }

    /// Velocity of the current vorticity.
    pub fn velocity(&self) -> VectorField {
        let psi = poisson_solve_channel(&self.omega, self.psi_bottom, self.psi_top);
        velocity_of(&psi)
    }

    /// Circulation `int omega dA` (conserved by advection).
    pub fn circulation(&self) -> f64 {
        let g = self.grid();
        let mut acc = 0.0;
        for ix in 0..g.nx() {
            for iy in 0..g.ny() {
                let w = if iy == 0 || iy == g.ny() - 1 { 0.5 } else { 1.0 };
                acc += w * self.omega.values[[ix, iy]];
            }
        }
        acc * g.hx() * g.hy()
    }
}

/// Largest stable time step for a velocity field under the advective CFL.
pub fn max_stable_dt(grid: Grid, u: &VectorField) -> f64 {
    CFL * grid.hx().min(grid.hy()) / u.max_speed().max(1e-12)
}

/// Solve `laplacian(psi) = omega` on the channel: Fourier transform in x,
/// then per-wavenumber Numerov (4th-order tridiagonal) solves of
/// `(d_yy - k^2) psi_k = omega_k` with Dirichlet data — the prescribed
/// wall values at `k = 0`, zero at `k != 0`.
pub fn poisson_solve_channel(omega: &ScalarField, psi_bottom: f64, psi_top: f64) -> ScalarField {
    let g = omega.grid;
    let n = g.ny();
    let h = g.hy();
    let coeffs = fft_x(omega);
    let mut out = ndarray::Array2::from_elem((g.nx(), n), Complex64::new(0.0, 0.0));
    let mut diag = vec![0.0f64; n];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for ixk in 0..g.nx() {
        let k = wavenumber(ixk, g.nx());
        let k2 = k * k;
        let (bc_lo, bc_hi) = if ixk == 0 {
            (
                Complex64::new(psi_bottom, 0.0),
                Complex64::new(psi_top, 0.0),
            )
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        };
        // Numerov: (psi_{j-1} - 2 psi_j + psi_{j+1})/h^2
        //          - k^2 (psi_{j-1} + 10 psi_j + psi_{j+1})/12
        //        = (w_{j-1} + 10 w_j + w_{j+1})/12
        let off = 1.0 / (h * h) - k2 / 12.0;
        let mid = -2.0 / (h * h) - 10.0 * k2 / 12.0;
        for j in 1..n - 1 {
            diag[j] = mid;
            let w = |jj: usize| coeffs[[ixk, jj]];
            rhs[j] = (w(j - 1) + w(j) * 10.0 + w(j + 1)) / 12.0;
        }
        rhs[1] -= bc_lo * off;
        rhs[n - 2] -= bc_hi * off;
        // Thomas algorithm on rows 1..n-1 (constant off-diagonals)
        scratch[1] = rhs[1] / diag[1];
        let mut cprime = vec![0.0f64; n];
        cprime[1] = off / diag[1];
        for j in 2..n - 1 {
            let m = diag[j] - off * cprime[j - 1];
            cprime[j] = off / m;
            scratch[j] = (rhs[j] - scratch[j - 1] * off) / m;
        }
        out[[ixk, n - 2]] = scratch[n - 2];
        for j in (1..n - 2).rev() {
            out[[ixk, j]] = scratch[j] - out[[ixk, j + 1]] * cprime[j];
        }
        out[[ixk, 0]] = bc_lo;
        out[[ixk, n - 1]] = bc_hi;
    }
    ifft_x(g, &out)
}

/// `u = (-d(psi)/dy, d(psi)/dx)` with the grid operators.
pub fn velocity_of(psi: &ScalarField) -> VectorField {
    let dy = dy_fd4(psi);
    let dx = dx_spectral(psi);
    let mut u1 = dy.values;
    u1.mapv_inplace(|v| -v);
    VectorField {
        grid: psi.grid,
        u1,
        u2: dx.values,
    }
}

fn rhs_advection(state_omega: &ScalarField, psi_bottom: f64, psi_top: f64) -> ScalarField {
    let psi = poisson_solve_channel(state_omega, psi_bottom, psi_top);
    let u = velocity_of(&psi);
    let wx = dx_spectral(state_omega);
    let wy = dy_fd4(state_omega);
    let mut out = ScalarField::zeros(state_omega.grid);
    ndarray::azip!((o in &mut out.values, a in &u.u1, b in &u.u2, gx in &wx.values, gy in &wy.values) {
        *o = -(a * gx + b * gy);
    });
    dealias_x(&mut out);
    out
}

/// One classical 4-stage explicit step of `d(omega)/dt = -u . grad(omega)`.
/// Rejects time steps above the advective CFL bound.
pub fn step(state: &EvolutionState) -> Result<EvolutionState> {
    let u = state.velocity();
    let dt_max = max_stable_dt(state.grid(), &u);
    if state.dt > dt_max {
        return Err(FlowError::CflViolation(format!(
            "dt = {} exceeds CFL bound {dt_max:.3e}",
            state.dt
        )));
    }
    let dt = state.dt;
    let w0 = &state.omega;
    let k1 = rhs_advection(w0, state.psi_bottom, state.psi_top);
    let w1 = add_scaled(w0, &k1, 0.5 * dt);
    let k2 = rhs_advection(&w1, state.psi_bottom, state.psi_top);
    let w2 = add_scaled(w0, &k2, 0.5 * dt);
    let k3 = rhs_advection(&w2, state.psi_bottom, state.psi_top);
    let w3 = add_scaled(w0, &k3, dt);
    let k4 = rhs_advection(&w3, state.psi_bottom, state.psi_top);
    let mut omega = w0.clone();
    ndarray::azip!((o in &mut omega.values, a in &k1.values, b in &k2.values, c in &k3.values, d in &k4.values) {
        *o += dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    });
    Ok(EvolutionState {
        omega,
        psi_bottom: state.psi_bottom,
        psi_top: state.psi_top,
        t: state.t + dt,
        dt,
    })
}

fn add_scaled(a: &ScalarField, b: &ScalarField, s: f64) -> ScalarField {
    let mut out = a.clone();
    ndarray::azip!((o in &mut out.values, v in &b.values) {
        *o += s * v;
    });
    out
}

/// Evolve to `t_end`, returning the final state and snapshots at roughly
/// `n_snapshots` evenly spaced times (including start and end).
pub fn evolve_to(
    state: EvolutionState,
    t_end: f64,
    n_snapshots: usize,
) -> Result<(EvolutionState, Vec<(f64, ScalarField)>)> {
    let mut snaps = vec![(state.t, state.omega.clone())];
    let mut cur = state;
    let t0 = cur.t;
    let total = t_end - t0;
    let mut next_snap = 1usize;
    while cur.t < t_end - 1e-12 {
        // shorten the last step to land on t_end
        let mut s = cur;
        if s.t + s.dt > t_end {
            s.dt = t_end - s.t;
        }
        cur = step(&s)?;
        if n_snapshots > 0 {
            let frac = (cur.t - t0) / total;
            if frac + 1e-12 >= next_snap as f64 / n_snapshots as f64 {
                snaps.push((cur.t, cur.omega.clone()));
                next_snap += 1;
            }
        }
    }
    Ok((cur, snaps))
}

// ---------------------------------------------------------------------------
// Core tracking

/// One tracked position of a vorticity core.
#[derive(Debug, Clone, Copy)]
pub struct CoreFrame {
    pub t: f64,
    /// x unwrapped across the periodic seam
    pub x: f64,
    pub y: f64,
    pub peak_deviation: f64,
}

/// Track a localized vorticity extremum through snapshots: per frame the
/// vorticity-weighted centroid of the deviation from the local background
/// (median over the search ring), restricted to the deviation's support
/// (at least half the initial peak). Fails with a diagnostic when the
/// extremum merges with the background.
pub fn track_core(
    snapshots: &[(f64, ScalarField)],
    seed: (f64, f64),
    window_radius: f64,
) -> Result<Vec<CoreFrame>> {
    if snapshots.is_empty() {
        return Err(FlowError::EmptySelection("no snapshots".into()));
    }
    // centroid of the background deviation within a window; mean-shift
    // iterations keep the window locked onto the moving core
    let locate = |om: &ScalarField, guess: (f64, f64), threshold: Option<f64>| -> Result<((f64, f64), f64)> {
        let g = om.grid;
        let mut center = guess;
        let mut peak = 0.0;
        for _ in 0..4 {
            let mut ring = Vec::new();
            let mut pts = Vec::new();
            for ix in 0..g.nx() {
                for iy in 0..g.ny() {
                    let dx = crate::vortex::wrap_x(g.x(ix) - center.0);
                    let dy = g.y(iy) - center.1;
                    let d = (dx * dx + dy * dy).sqrt();
                    if d <= window_radius {
                        pts.push((dx, dy, om.values[[ix, iy]]));
                        if d >= 0.75 * window_radius {
                            ring.push(om.values[[ix, iy]]);
                        }
                    }
                }
            }
            if ring.is_empty() || pts.is_empty() {
                return Err(FlowError::CoreLost("empty search window".into()));
            }
            ring.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let background = ring[ring.len() / 2];
            peak = pts
                .iter()
                .map(|p| (p.2 - background).abs())
                .fold(0.0f64, f64::max);
            let thr = threshold.unwrap_or(0.5 * peak);
            if peak < thr {
                return Err(FlowError::CoreLost(format!(
                    "peak deviation {peak:.3e} fell below the tracking threshold {thr:.3e}"
                )));
            }
            let mut m = 0.0;
            let mut mx = 0.0;
            let mut my = 0.0;
            for &(dx, dy, v) in &pts {
                let dev = (v - background).abs();
                if dev >= thr {
                    m += dev;
                    mx += dev * dx;
                    my += dev * dy;
                }
            }
            let shift = (mx / m, my / m);
            center = (
                (center.0 + shift.0).rem_euclid(2.0 * std::f64::consts::PI),
                center.1 + shift.1,
            );
            if shift.0.hypot(shift.1) < 1e-12 {
                break;
            }
        }
        Ok((center, peak))
    };

    let mut frames: Vec<CoreFrame> = Vec::with_capacity(snapshots.len());
    let (mut center, peak0) = locate(&snapshots[0].1, seed, None)?;
    let threshold = 0.5 * peak0;
    let mut x_acc = center.0;
    let mut velocity = (0.0, 0.0);
    let mut prev_t = snapshots[0].0;
    frames.push(CoreFrame {
        t: prev_t,
        x: x_acc,
        y: center.1,
        peak_deviation: peak0,
    });
    for (t, om) in &snapshots[1..] {
        let dt = t - prev_t;
        let guess = (
            (center.0 + velocity.0 * dt).rem_euclid(2.0 * std::f64::consts::PI),
            center.1 + velocity.1 * dt,
        );
        let (found, peak) = locate(om, guess, Some(threshold)).map_err(|e| {
            FlowError::CoreLost(format!("at t = {t}: {e}"))
        })?;
        let step_x = crate::vortex::wrap_x(found.0 - center.0);
        let step_y = found.1 - center.1;
        if dt > 0.0 {
            velocity = (step_x / dt, step_y / dt);
        }
        x_acc += step_x;
        center = found;
        prev_t = *t;
        frames.push(CoreFrame {
            t: *t,
            x: x_acc,
            y: center.1,
            peak_deviation: peak,
        });
    }
    Ok(frames)
}

/// Least-squares phase speed of a tracked core (slope of unwrapped x
/// against t).
pub fn fit_speed(frames: &[CoreFrame]) -> f64 {
    let ts: Vec<f64> = frames.iter().map(|f| f.t).collect();
    let xs: Vec<f64> = frames.iter().map(|f| f.x).collect();
    crate::shear::regression_slope(&ts, &xs)
}

/// Orbit fit of a tracked core: circle center (mean), mean radius and the
/// angular frequency from a linear fit of the unwrapped phase.
pub fn fit_orbit(frames: &[CoreFrame]) -> ((f64, f64), f64, f64) {
    let n = frames.len() as f64;
    let cx = frames.iter().map(|f| f.x).sum::<f64>() / n;
    let cy = frames.iter().map(|f| f.y).sum::<f64>() / n;
    let mut radius = 0.0;
    let mut angles = Vec::with_capacity(frames.len());
    let mut ts = Vec::with_capacity(frames.len());
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (i, f) in frames.iter().enumerate() {
        let dx = f.x - cx;
        let dy = f.y - cy;
        radius += (dx * dx + dy * dy).sqrt();
        let a = dy.atan2(dx);
        if i == 0 {
            acc = a;
        } else {
            let mut da = a - prev;
            while da > std::f64::consts::PI {
                da -= 2.0 * std::f64::consts::PI;
            }
            while da < -std::f64::consts::PI {
                da += 2.0 * std::f64::consts::PI;
            }
            acc += da;
        }
        prev = a;
        angles.push(acc);
        ts.push(f.t);
    }
    let omega = crate::shear::regression_slope(&ts, &angles);
    ((cx, cy), radius / n, omega)
}
