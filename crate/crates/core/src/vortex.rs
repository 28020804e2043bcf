//! Radial vortex profiles, compactly supported vortex velocity fields,
//! composite shear + vortex flows, traveling-wave evaluation and nested
//! quasiperiodic (solid-body) vortex hierarchies.
//!
//! A vortex with center `c`, scale `eps`, amplitude `A` and order `n` has
//! stream function `Psi(p) = A eps^{n+2} G(|p - c| / eps)` with
//! `G(r) = int_0^r s U(s) ds`, velocity
//! `w(p) = A eps^n U(|p - c| / eps) (-(p - c)_y, (p - c)_x)` and vorticity
//! `A eps^n (2 U + rho U')(|p - c| / eps)`. The radial profile `U` vanishes
//! for `r > 3/4` and on an inner dead disk, so every derivative of `r U(r)`
//! vanishes at `r = 0` and the field is smooth across the center.
//!
//! Composite flows place vortices inside quiescent cutoff windows of a
//! background shear. Each window may carry a wave speed `v(y0)`; its
//! content then translates rigidly while the far field stays the
//! unmodified shear.

use std::f64::consts::PI;

use crate::error::FlowError;
use crate::grid::{Grid, ScalarField, VectorField};
use crate::jet::{smooth_step_jet, smooth_step_jet2, Jet1, Jet2};
use crate::shear::{Cutoff, ShearProfile};
use crate::Result;

/// Outer support radius of every radial profile.
pub const SUPPORT_RADIUS: f64 = 0.75;

/// Quiescence tolerance: the ambient flow must vanish below this bound on
/// every vortex support.
pub const TOL_QUIET: f64 = 1e-14;

/// Smooth radial profile `U : [0, inf) -> R` with support
/// `[r_inner, 3/4]`, built from the same smooth step as the shear cutoff.
///
/// `plateau` profiles are identically 1 on `[1/3, 2/3]` so the velocity
/// there is an exact solid-body rotation; `bump` profiles spread their
/// fall over a wide band, which keeps high radial derivatives moderate.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub plateau: bool,
    r_inner: f64,
    r_up: f64,
    r_down: f64,
    /// Cached `sup |(r^{-1} d/dr)^k U|` for `k = 0..=4`.
    radial_sup: [f64; 5],
    /// Cumulative `G(r)` table on `[0, 3/4]` (Hermite-interpolated; the
    /// exact derivative `G' = r U` is known at the nodes).
    g_table: Vec<f64>,
    g_step: f64,
}

impl RadialProfile {
    /// Profile with an exact plateau `U = 1` on `[1/3, 2/3]`.
    pub fn plateau() -> Self {
        Self::steps(0.05, 1.0 / 3.0, 2.0 / 3.0, true)
    }

    /// Gentle single bump: rise on `[0.05, 0.32]`, fall on `[0.40, 0.75]`.
    pub fn bump() -> Self {
        Self::steps(0.05, 0.32, 0.40, false)
    }

    /// Widest transitions the support allows: overlapping rise on
    /// `[0.04, 0.44]` and fall on `[0.35, 0.75]` (the profile tops out
    /// below 1). Keeps high radial derivatives as small as possible for
    /// refinement studies.
    pub fn wide() -> Self {
        Self::steps(0.04, 0.44, 0.35, false)
    }

    fn steps(r_inner: f64, r_up: f64, r_down: f64, plateau: bool) -> Self {
        let mut p = RadialProfile {
            plateau,
            r_inner,
            r_up,
            r_down,
            radial_sup: [0.0; 5],
            g_table: Vec::new(),
            g_step: 0.0,
        };
        p.build_caches();
        p
    }

    fn build_caches(&mut self) {
        // sup |(r^{-1} d/dr)^k U| on a dense radial grid. With the inner
        // dead disk the 1/r factors act only where r >= r_inner.
        let n = 3000;
        for i in 0..=n {
            let r = SUPPORT_RADIUS * i as f64 / n as f64;
            if r < 0.5 * self.r_inner {
                continue;
            }
            let j = self.u_jet1(Jet1::var(r));
            // T_0 = U, T_{k+1} = T_k' / r expanded over ordinary derivatives:
            // T_k = sum_j a[k][j] U^(j) r^(j - 2k)
            let mut coeffs = vec![vec![0.0f64; 9]; 5];
            coeffs[0][0] = 1.0;
            for k in 0..4 {
                for jj in 0..8 {
                    let a = coeffs[k][jj];
                    if a == 0.0 {
                        continue;
                    }
                    let pw = jj as f64 - 2.0 * k as f64;
                    coeffs[k + 1][jj + 1] += a;
                    coeffs[k + 1][jj] += a * pw;
                }
            }
            for k in 0..=4 {
                let mut t = 0.0;
                for (jj, &a) in coeffs[k].iter().enumerate() {
                    if a != 0.0 {
                        t += a * j.deriv(jj) * r.powi(jj as i32 - 2 * k as i32);
                    }
                }
                self.radial_sup[k] = self.radial_sup[k].max(t.abs());
            }
        }
        // cumulative G(r) by composite adaptive Simpson between table nodes
        let nodes = 3000;
        self.g_step = SUPPORT_RADIUS / nodes as f64;
        self.g_table = Vec::with_capacity(nodes + 1);
        self.g_table.push(0.0);
        let mut acc = 0.0;
        for i in 0..nodes {
            let a = i as f64 * self.g_step;
            let b = a + self.g_step;
            acc += adaptive_simpson(&|s| s * self.u(s), a, b, 1e-14, 24);
            self.g_table.push(acc);
        }
    }

    /// Profile value `U(r)`.
    pub fn u(&self, r: f64) -> f64 {
        self.u_jet1(Jet1::constant(r)).value()
    }

    /// Jet of `U` through a 1D radius jet.
    pub fn u_jet1(&self, r: Jet1) -> Jet1 {
        let rise = smooth_step_jet(
            (r - Jet1::constant(self.r_inner)).scale(1.0 / (self.r_up - self.r_inner)),
        );
        let fall = smooth_step_jet(
            (Jet1::constant(SUPPORT_RADIUS) - r).scale(1.0 / (SUPPORT_RADIUS - self.r_down)),
        );
        rise * fall
    }

    /// Jet of `U` through a 2D radius jet.
    pub fn u_jet2(&self, r: Jet2) -> Jet2 {
        let rise = smooth_step_jet2(
            (r - Jet2::constant(self.r_inner)).scale(1.0 / (self.r_up - self.r_inner)),
        );
        let fall = smooth_step_jet2(
            (Jet2::constant(SUPPORT_RADIUS) - r).scale(1.0 / (SUPPORT_RADIUS - self.r_down)),
        );
        rise * fall
    }

    /// Cached `sup |(r^{-1} d/dr)^k U|` for `k <= 4`.
    pub fn radial_sup(&self, k: usize) -> f64 {
        self.radial_sup[k]
    }

    /// `G(r)` from the cached cumulative table (matches the adaptive
    /// quadrature to well below 1e-12; `G` is constant beyond the support).
    pub fn g(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= SUPPORT_RADIUS {
            return *self.g_table.last().unwrap();
        }
        let f = r / self.g_step;
        let i = (f.floor() as usize).min(self.g_table.len() - 2);
        let t = f - i as f64;
        let h = self.g_step;
        let r0 = i as f64 * h;
        let r1 = r0 + h;
        let (g0, g1) = (self.g_table[i], self.g_table[i + 1]);
        let (d0, d1) = (r0 * self.u(r0), r1 * self.u(r1));
        // cubic Hermite
        let t2 = t * t;
        let t3 = t2 * t;
        g0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * h * (t3 - 2.0 * t2 + t)
            + g1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * h * (t3 - t2)
    }

}

/// `G(r) = int_0^r s U(s) ds` by adaptive Simpson quadrature (absolute
/// tolerance 1e-12); constant for `r >= 3/4`.
pub fn stream_g(profile: &RadialProfile, r: f64) -> f64 {
    stream_g_of(|s| profile.u(s), r)
}

/// Same quadrature for an arbitrary radial function (used by oracles).
pub fn stream_g_of(u: impl Fn(f64) -> f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let top = r.min(SUPPORT_RADIUS.max(r.min(1.0)));
    adaptive_simpson(&|s| s * u(s), 0.0, top, 1e-12, 40)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

// ---------------------------------------------------------------------------
// Vortex specifications

/// A radial vortex: center, scale, amplitude, order and optional embedded
/// children expressed relative to the parent plateau.
#[derive(Debug, Clone)]
pub struct VortexSpec {
    /// Absolute center `(x_c, y_c)` at `t = 0`.
    pub center: (f64, f64),
    /// Length scale; the support disk has radius `(3/4) eps`.
    pub eps: f64,
    /// Amplitude `A > 0`.
    pub amplitude: f64,
    /// Order matching the ambient shear's vanishing order.
    pub n: u32,
    pub profile: RadialProfile,
    pub children: Vec<VortexSpec>,
}

impl VortexSpec {
    pub fn new(center: (f64, f64), eps: f64, amplitude: f64, n: u32, profile: RadialProfile) -> Self {
        VortexSpec {
            center,
            eps,
            amplitude,
            n,
            profile,
            children: Vec::new(),
        }
    }

    /// Attach a child in the parent's plateau frame: polar placement
    /// `radius_frac * eps` from the center at `angle`, scale
    /// `eps_frac * eps`.
    pub fn with_child(
        mut self,
        radius_frac: f64,
        angle: f64,
        eps_frac: f64,
        amplitude: f64,
        n: u32,
        profile: RadialProfile,
    ) -> Self {
        let c = (
            self.center.0 + self.eps * radius_frac * angle.cos(),
            self.center.1 + self.eps * radius_frac * angle.sin(),
        );
        self.children
            .push(VortexSpec::new(c, self.eps * eps_frac, amplitude, n, profile));
        self
    }

    /// Solid-body angular frequency `A eps^n` of the plateau region.
    pub fn omega(&self) -> f64 {
        self.amplitude * self.eps.powi(self.n as i32)
    }

    /// Support radius `(3/4) eps`.
    pub fn support_radius(&self) -> f64 {
        SUPPORT_RADIUS * self.eps
    }

    /// Check that every child support disk sits strictly inside the parent
    /// plateau annulus `eps/3 < r < 2 eps/3`, recursively.
    pub fn validate_children(&self) -> Result<()> {
        if self.children.is_empty() {
            return Ok(());
        }
        if !self.profile.plateau {
            return Err(FlowError::PlateauViolation(
                "children require a plateau profile on the parent".into(),
            ));
        }
        for ch in &self.children {
            let d = dist(ch.center, self.center);
            let lo = self.eps / 3.0;
            let hi = 2.0 * self.eps / 3.0;
            if !(d - ch.support_radius() > lo && d + ch.support_radius() < hi) {
                return Err(FlowError::PlateauViolation(format!(
                    "child at distance {d:.4} with support radius {:.4} leaves the annulus ({lo:.4}, {hi:.4})",
                    ch.support_radius()
                )));
            }
            ch.validate_children()?;
        }
        for (i, a) in self.children.iter().enumerate() {
            for b in self.children.iter().skip(i + 1) {
                if dist(a.center, b.center) < a.support_radius() + b.support_radius() {
                    return Err(FlowError::QuiescenceViolation(
                        "sibling vortex supports intersect".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = wrap_x(a.0 - b.0);
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

/// Periodic x-offset mapped to `(-pi, pi]`.
pub(crate) fn wrap_x(dx: f64) -> f64 {
    let mut d = dx.rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

/// Velocity of a single vortex at `p` (children ignored):
/// `A eps^n U(|p-c|/eps) * (-(p-c)_y, (p-c)_x)`, identically zero outside
/// the support disk.
pub fn vortex_velocity(spec: &VortexSpec, p: (f64, f64)) -> (f64, f64) {
    let dx = wrap_x(p.0 - spec.center.0);
    let dy = p.1 - spec.center.1;
    let rho = (dx * dx + dy * dy).sqrt();
    if rho >= spec.support_radius() {
        return (0.0, 0.0);
    }
    let scale = spec.amplitude * spec.eps.powi(spec.n as i32);
    let u = spec.profile.u(rho / spec.eps);
    (-scale * u * dy, scale * u * dx)
}

/// Vorticity of a single vortex at `p`:
/// `A eps^n (2 U(rho/eps) + (rho/eps) U'(rho/eps))`.
pub fn vortex_vorticity(spec: &VortexSpec, p: (f64, f64)) -> f64 {
    let dx = wrap_x(p.0 - spec.center.0);
    let dy = p.1 - spec.center.1;
    let rho = (dx * dx + dy * dy).sqrt();
    if rho >= spec.support_radius() {
        return 0.0;
    }
    let scale = spec.amplitude * spec.eps.powi(spec.n as i32);
    let j = spec.profile.u_jet1(Jet1::var(rho / spec.eps));
    scale * (2.0 * j.deriv(0) + rho / spec.eps * j.deriv(1))
}

/// Stream function of a single vortex at `p`: `A eps^{n+2} G(|p-c|/eps)`.
pub fn vortex_stream(spec: &VortexSpec, p: (f64, f64)) -> f64 {
    let dx = wrap_x(p.0 - spec.center.0);
    let dy = p.1 - spec.center.1;
    let rho = (dx * dx + dy * dy).sqrt();
    spec.amplitude * spec.eps.powi(spec.n as i32 + 2) * spec.profile.g(rho / spec.eps)
}

/// Velocity jet of a single vortex at `p` (children ignored).
pub fn vortex_velocity_jet(spec: &VortexSpec, p: (f64, f64)) -> [Jet2; 2] {
    let dx0 = wrap_x(p.0 - spec.center.0);
    let dy0 = p.1 - spec.center.1;
    let rho0 = (dx0 * dx0 + dy0 * dy0).sqrt();
    // outside the support or in the inner dead disk all derivatives vanish
    if rho0 >= spec.support_radius() || rho0 <= 0.9 * spec.profile.r_inner * spec.eps {
        return [Jet2::zero(), Jet2::zero()];
    }
    let dx = Jet2::var_x(dx0);
    let dy = Jet2::var_y(dy0);
    let rho = (dx * dx + dy * dy).sqrt();
    let u = spec.profile.u_jet2(rho.scale(1.0 / spec.eps));
    let scale = spec.amplitude * spec.eps.powi(spec.n as i32);
    [(-(u * dy)).scale(scale), (u * dx).scale(scale)]
}

// ---------------------------------------------------------------------------
// Composite flows

/// A quiescent cutoff window of the background shear, optionally traveling,
/// carrying embedded vortices.
#[derive(Debug, Clone)]
pub struct Window {
    pub y0: f64,
    pub eps: f64,
    /// When true the window content translates at wave speed `v(y0)` and
    /// the shifted shear `v - v(y0)` is used inside the cutoff.
    pub traveling: bool,
    pub vortices: Vec<VortexSpec>,
}

impl Window {
    pub fn new(y0: f64, eps: f64) -> Self {
        Window {
            y0,
            eps,
            traveling: false,
            vortices: Vec::new(),
        }
    }

    pub fn traveling(mut self) -> Self {
        self.traveling = true;
        self
    }

    pub fn with_vortex(mut self, v: VortexSpec) -> Self {
        self.vortices.push(v);
        self
    }
}

/// Full composite flow description: background shear plus disjoint cutoff
/// windows with embedded vortices and per-window wave speeds.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub shear: ShearProfile,
    pub windows: Vec<Window>,
    cutoff: Cutoff,
}

impl FlowSpec {
    pub fn new(shear: ShearProfile, windows: Vec<Window>) -> Result<Self> {
        let spec = FlowSpec {
            shear,
            windows,
            cutoff: Cutoff::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Background shear alone.
    pub fn pure_shear(shear: ShearProfile) -> Self {
        FlowSpec {
            shear,
            windows: Vec::new(),
            cutoff: Cutoff::new(),
        }
    }

    /// Wave speed of window `i`: `v(y0)` when traveling, else 0.
    pub fn wave_speed(&self, i: usize) -> f64 {
        let w = &self.windows[i];
        if w.traveling {
            self.shear.v(w.y0)
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        for w in &self.windows {
            if !(w.eps > 0.0 && w.eps < 0.25) {
                return Err(FlowError::InvalidParameter(format!(
                    "window eps must satisfy 0 < eps < 1/4, got {}",
                    w.eps
                )));
            }
            if w.y0 - 2.0 * w.eps <= -1.0 || w.y0 + 2.0 * w.eps >= 1.0 {
                return Err(FlowError::InvalidParameter(format!(
                    "window [{}, {}] leaves (-1, 1)",
                    w.y0 - 2.0 * w.eps,
                    w.y0 + 2.0 * w.eps
                )));
            }
        }
        // windows pairwise disjoint as intervals (y0 - 2eps, y0 + 2eps)
        for (i, a) in self.windows.iter().enumerate() {
            for b in self.windows.iter().skip(i + 1) {
                let lo = a.y0.max(b.y0) - 2.0 * a.eps.min(b.eps); // quick reject first
                let _ = lo;
                let (a0, a1) = (a.y0 - 2.0 * a.eps, a.y0 + 2.0 * a.eps);
                let (b0, b1) = (b.y0 - 2.0 * b.eps, b.y0 + 2.0 * b.eps);
                if a0 < b1 && b0 < a1 {
                    return Err(FlowError::WindowOverlap(format!(
                        "windows [{a0:.4}, {a1:.4}] and [{b0:.4}, {b1:.4}] intersect"
                    )));
                }
            }
        }
        for (i, w) in self.windows.iter().enumerate() {
            let v0 = self.wave_speed(i);
            for (vi, v) in w.vortices.iter().enumerate() {
                if v.amplitude <= 0.0 || v.eps <= 0.0 {
                    return Err(FlowError::InvalidParameter(
                        "vortex amplitude and scale must be positive".into(),
                    ));
                }
                // support disk inside the quiescent core slab |y - y0| <= eps
                let r = v.support_radius();
                if (v.center.1 - w.y0).abs() + r > w.eps {
                    return Err(FlowError::QuiescenceViolation(format!(
                        "vortex {vi} support [{:.4}, {:.4}] leaves the quiescent slab [{:.4}, {:.4}]",
                        v.center.1 - r,
                        v.center.1 + r,
                        w.y0 - w.eps,
                        w.y0 + w.eps
                    )));
                }
                // ambient co-moving shear must vanish on the support
                for s in 0..=32 {
                    let y = v.center.1 - r + 2.0 * r * s as f64 / 32.0;
                    let ambient = (self.ambient_u1(y) - v0).abs();
                    if ambient > TOL_QUIET {
                        return Err(FlowError::QuiescenceViolation(format!(
                            "ambient speed {ambient:.3e} exceeds {TOL_QUIET:.0e} on the support of vortex {vi}"
                        )));
                    }
                }
                v.validate_children()?;
            }
            // sibling vortex supports must not intersect
            for (a_i, a) in w.vortices.iter().enumerate() {
                for b in w.vortices.iter().skip(a_i + 1) {
                    if dist(a.center, b.center) < a.support_radius() + b.support_radius() {
                        return Err(FlowError::QuiescenceViolation(
                            "vortex supports intersect within a window".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Horizontal shear component of the composite,
    /// `v(y) + sum_i (v - v0_i)(y) (chi_i(y) - 1)`.
    pub fn ambient_u1(&self, y: f64) -> f64 {
        self.shear_u1_jet(y).value()
    }

    /// Jet in y of the composite's x-independent horizontal component.
    pub fn shear_u1_jet(&self, y: f64) -> Jet1 {
        let mut total = self.shear.jet(y);
        for (i, w) in self.windows.iter().enumerate() {
            let v0 = self.wave_speed(i);
            let chi = self.chi_jet(w, y);
            let vbar = self.shear.jet(y) - Jet1::constant(v0);
            total = total + vbar * (chi - Jet1::constant(1.0));
        }
        total
    }

    fn chi_jet(&self, w: &Window, y: f64) -> Jet1 {
        let eta = (Jet1::var(y) - Jet1::constant(w.y0)).scale(1.0 / w.eps);
        if eta.value() >= 0.0 {
            smooth_step_jet(eta - Jet1::constant(1.0))
        } else {
            smooth_step_jet(-eta - Jet1::constant(1.0))
        }
    }

    /// Composite velocity at time `t` and point `p`; window contents are
    /// evaluated at the co-moving coordinate `x - v0 t`.
    pub fn velocity(&self, t: f64, p: (f64, f64)) -> (f64, f64) {
        let mut u1 = self.ambient_u1(p.1);
        let mut u2 = 0.0;
        for (i, w) in self.windows.iter().enumerate() {
            let v0 = self.wave_speed(i);
            for v in &w.vortices {
                let q = (p.0 - v0 * t, p.1);
                let (a, b) = vortex_total_velocity_static(v, q);
                u1 += a;
                u2 += b;
            }
        }
        (u1, u2)
    }

    /// Composite vorticity at time `t` and point `p`.
    pub fn vorticity(&self, t: f64, p: (f64, f64)) -> f64 {
        let mut om = -self.shear_u1_jet(p.1).deriv(1);
        for (i, w) in self.windows.iter().enumerate() {
            let v0 = self.wave_speed(i);
            for v in &w.vortices {
                let q = (p.0 - v0 * t, p.1);
                om += vortex_total_vorticity_static(v, q);
            }
        }
        om
    }

    /// Composite stream function at time `t` and point `p`, normalized to
    /// `psi = 0` at the bottom wall for the shear part.
    pub fn psi(&self, t: f64, p: (f64, f64)) -> f64 {
        let mut s = self.shear_psi(p.1);
        for (i, w) in self.windows.iter().enumerate() {
            let v0 = self.wave_speed(i);
            for v in &w.vortices {
                let q = (p.0 - v0 * t, p.1);
                s += vortex_total_stream_static(v, q);
            }
        }
        s
    }

    /// x-independent part of the stream function,
    /// `-int_{-1}^{y} (composite shear)`.
    pub fn shear_psi(&self, y: f64) -> f64 {
        let base = match &self.shear {
            ShearProfile::PowerLaw { n } => {
                let m = *n as i32 + 1;
                -(y.powi(m) - (-1.0f64).powi(m)) / m as f64
            }
            _ => -adaptive_simpson(&|s| self.shear.v(s), -1.0, y, 1e-12, 40),
        };
        let mut s = base;
        for (i, w) in self.windows.iter().enumerate() {
            let v0 = self.wave_speed(i);
            let lo = (w.y0 - 2.0 * w.eps).max(-1.0);
            let hi = (w.y0 + 2.0 * w.eps).min(y);
            if hi > lo {
                s -= adaptive_simpson(
                    &|s| {
                        (self.shear.v(s) - v0) * (self.cutoff.eval((s - w.y0) / w.eps) - 1.0)
                    },
                    lo,
                    hi,
                    1e-12,
                    40,
                );
            }
        }
        s
    }

    /// Jet of the composite velocity at time `t` and point `p`.
    pub fn velocity_jet(&self, t: f64, p: (f64, f64)) -> [Jet2; 2] {
        let mut out = self.deficit_jet(t, p);
        let base = self.shear.jet(p.1);
        out[0] = out[0] + jet1_y_to_jet2(base);
        out
    }

    /// Jet of the deviation from the base shear, `u - (v(y), 0)`.
    pub fn deficit_jet(&self, t: f64, p: (f64, f64)) -> [Jet2; 2] {
        let mut u1 = Jet2::zero();
        let mut u2 = Jet2::zero();
        for (i, w) in self.windows.iter().enumerate() {
            let v0 = self.wave_speed(i);
            let chi = self.chi_jet(w, p.1);
            let vbar = self.shear.jet(p.1) - Jet1::constant(v0);
            u1 = u1 + jet1_y_to_jet2(vbar * (chi - Jet1::constant(1.0)));
            for v in &w.vortices {
                let q = (p.0 - v0 * t, p.1);
                let jets = vortex_total_velocity_jet_static(v, q);
                u1 = u1 + jets[0];
                u2 = u2 + jets[1];
            }
        }
        [u1, u2]
    }
}

/// Embed a 1D jet in `y` into a 2D jet (x-derivatives vanish).
pub(crate) fn jet1_y_to_jet2(j: Jet1) -> Jet2 {
    let mut out = Jet2::zero();
    for k in 0..=4usize {
        // coefficient of y^k
        let idx = (k * (k + 1)) / 2 + k;
        out.c[idx] = j.c[k];
    }
    out
}

fn vortex_total_velocity_static(spec: &VortexSpec, p: (f64, f64)) -> (f64, f64) {
    let (mut a, mut b) = vortex_velocity(spec, p);
    for ch in &spec.children {
        let (ca, cb) = vortex_total_velocity_static(ch, p);
        a += ca;
        b += cb;
    }
    (a, b)
}

fn vortex_total_vorticity_static(spec: &VortexSpec, p: (f64, f64)) -> f64 {
    let mut om = vortex_vorticity(spec, p);
    for ch in &spec.children {
        om += vortex_total_vorticity_static(ch, p);
    }
    om
}

fn vortex_total_stream_static(spec: &VortexSpec, p: (f64, f64)) -> f64 {
    let mut s = vortex_stream(spec, p);
    for ch in &spec.children {
        s += vortex_total_stream_static(ch, p);
    }
    s
}

fn vortex_total_velocity_jet_static(spec: &VortexSpec, p: (f64, f64)) -> [Jet2; 2] {
    let mut jets = vortex_velocity_jet(spec, p);
    for ch in &spec.children {
        let cj = vortex_total_velocity_jet_static(ch, p);
        jets[0] = jets[0] + cj[0];
        jets[1] = jets[1] + cj[1];
    }
    jets
}

/// Sample the composite flow at `t = 0` on a grid: velocity, vorticity and
/// stream function. Validation failures (window overlap, quiescence) abort
/// before any sampling.
pub fn compose_flexible(
    flow: &FlowSpec,
    grid: Grid,
) -> Result<(VectorField, ScalarField, ScalarField)> {
    flow.validate()?;
    let mut u = VectorField::zeros(grid);
    let mut om = ScalarField::zeros(grid);
    let mut psi = ScalarField::zeros(grid);
    // x-independent pieces per row
    let ny = grid.ny();
    let nx = grid.nx();
    let mut row_u1 = vec![0.0; ny];
    let mut row_om = vec![0.0; ny];
    let mut row_psi = vec![0.0; ny];
    for iy in 0..ny {
        let y = grid.y(iy);
        let j = flow.shear_u1_jet(y);
        row_u1[iy] = j.value();
        row_om[iy] = -j.deriv(1);
        row_psi[iy] = flow.shear_psi(y);
    }
    for ix in 0..nx {
        let x = grid.x(ix);
        for iy in 0..ny {
            let y = grid.y(iy);
            let mut u1 = row_u1[iy];
            let mut u2 = 0.0;
            let mut w = row_om[iy];
            let mut s = row_psi[iy];
            for win in &flow.windows {
                for v in &win.vortices {
                    let (a, b) = vortex_total_velocity_static(v, (x, y));
                    u1 += a;
                    u2 += b;
                    w += vortex_total_vorticity_static(v, (x, y));
                    s += vortex_total_stream_static(v, (x, y));
                }
            }
            u.u1[[ix, iy]] = u1;
            u.u2[[ix, iy]] = u2;
            om.values[[ix, iy]] = w;
            psi.values[[ix, iy]] = s;
        }
    }
    Ok((u, om, psi))
}

/// Evaluate the traveling composite at time `t`: each window's content is
/// advected rigidly at its wave speed while the far field stays `(v(y), 0)`.
pub fn traveling_wave_eval(flow: &FlowSpec, t: f64, p: (f64, f64)) -> (f64, f64) {
    flow.velocity(t, p)
}

// ---------------------------------------------------------------------------
// Nested quasiperiodic evaluation

/// Evaluate a vortex tree at time `t`: each child's subtree is pulled back
/// by the parent's plateau rotation (angle `omega_parent * t` about the
/// parent center) and its velocity pushed forward. At `t = 0` this equals
/// the static superposition.
pub fn nested_quasiperiodic_eval(spec: &VortexSpec, t: f64, p: (f64, f64)) -> Result<(f64, f64)> {
    spec.validate_children()?;
    Ok(nested_eval_inner(spec, t, p))
}

fn nested_eval_inner(spec: &VortexSpec, t: f64, p: (f64, f64)) -> (f64, f64) {
    let (mut a, mut b) = vortex_velocity(spec, p);
    if spec.children.is_empty() {
        return (a, b);
    }
    let theta = spec.omega() * t;
    let (s, c) = theta.sin_cos();
    // pull the evaluation point back by the plateau rotation
    let dx = wrap_x(p.0 - spec.center.0);
    let dy = p.1 - spec.center.1;
    let qx = spec.center.0 + c * dx + s * dy;
    let qy = spec.center.1 - s * dx + c * dy;
    for ch in &spec.children {
        let (ca, cb) = nested_eval_inner(ch, t, (qx, qy));
        // push the velocity vector forward
        a += c * ca - s * cb;
        b += s * ca + c * cb;
    }
    (a, b)
}

/// Angular frequencies `A eps^n` of every node of a vortex tree, with
/// pairwise rational-dependence flags (continued-fraction convergents with
/// denominator up to 1e6, matched to 1e-12).
#[derive(Debug, Clone)]
pub struct FrequencyReport {
    pub omegas: Vec<f64>,
    /// `(i, j, Some((p, q)))` when `omega_i / omega_j ~ p/q`.
    pub pairs: Vec<(usize, usize, Option<(i64, i64)>)>,
}

pub fn frequency_list(spec: &VortexSpec) -> FrequencyReport {
    let mut omegas = Vec::new();
    collect_omegas(spec, &mut omegas);
    let mut pairs = Vec::new();
    for i in 0..omegas.len() {
        for j in i + 1..omegas.len() {
            // orient the ratio above 1 so the convergent search is
            // independent of the pair order
            let (a, b) = (omegas[i].abs(), omegas[j].abs());
            let ratio = if a >= b { a / b } else { b / a };
            pairs.push((i, j, rational_approx(ratio, 1_000_000, 1e-12)));
        }
    }
    FrequencyReport { omegas, pairs }
}

fn collect_omegas(spec: &VortexSpec, out: &mut Vec<f64>) {
    out.push(spec.omega());
    for ch in &spec.children {
        collect_omegas(ch, out);
    }
}

/// Continued-fraction search for `p/q ~ x` with `q <= qmax` and
/// `|x - p/q| <= tol`.
pub fn rational_approx(x: f64, qmax: i64, tol: f64) -> Option<(i64, i64)> {
    let mut a = x.floor() as i64;
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, a, 1i64);
    let mut frac = x - a as f64;
    for _ in 0..64 {
        if q1 > qmax {
            return None;
        }
        if (x - p1 as f64 / q1 as f64).abs() <= tol {
            return Some((p1, q1));
        }
        if frac.abs() < 1e-18 {
            return None;
        }
        let inv = 1.0 / frac;
        a = inv.floor() as i64;
        frac = inv - a as f64;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    None
}
