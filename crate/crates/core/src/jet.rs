//! Truncated Taylor-series arithmetic ("jets").
//!
//! Profiles, cutoffs and vortex fields all need exact derivatives of
//! composed smooth functions (up to order 8 for the cutoff, up to total
//! degree 4 for 2D velocity fields). Carrying truncated Taylor expansions
//! through the arithmetic gives machine-precision derivatives without
//! hand-written chain rules.
//!
//! Coefficients are Taylor coefficients: `c[k] = f^(k)(x0) / k!`.

use std::ops::{Add, Mul, Neg, Sub};

/// Maximum 1D order carried by [`Jet1`].
pub const JET1_ORDER: usize = 8;
const N1: usize = JET1_ORDER + 1;

/// One-dimensional jet: value and derivatives up to order 8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet1 {
    pub c: [f64; N1],
}

impl Jet1 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N1];
        c[0] = v;
        Jet1 { c }
    }

    /// The identity function expanded at `x0`.
    pub fn var(x0: f64) -> Self {
        let mut c = [0.0; N1];
        c[0] = x0;
        c[1] = 1.0;
        Jet1 { c }
    }

    pub fn zero() -> Self {
        Jet1 { c: [0.0; N1] }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative (not the Taylor coefficient).
    pub fn deriv(&self, k: usize) -> f64 {
        self.c[k] * FACT[k]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        for v in &mut c {
            *v *= s;
        }
        Jet1 { c }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut r = Jet1::constant(1.0);
        for _ in 0..n {
            r = r * *self;
        }
        r
    }

    pub fn recip(&self) -> Self {
        let b = self.c;
        let mut r = [0.0; N1];
        r[0] = 1.0 / b[0];
        for n in 1..N1 {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += b[k] * r[n - k];
            }
            r[n] = -acc / b[0];
        }
        Jet1 { c: r }
    }

    pub fn exp(&self) -> Self {
        let a = self.c;
        let mut e = [0.0; N1];
        e[0] = a[0].exp();
        // e' = a' e  =>  (n+1) e[n+1] = sum_{k} (k+1) a[k+1] e[n-k]
        for n in 0..N1 - 1 {
            let mut acc = 0.0;
            for k in 0..=n {
                acc += (k as f64 + 1.0) * a[k + 1] * e[n - k];
            }
            e[n + 1] = acc / (n as f64 + 1.0);
        }
        Jet1 { c: e }
    }

    pub fn sqrt(&self) -> Self {
        let a = self.c;
        let mut s = [0.0; N1];
        s[0] = a[0].sqrt();
        for n in 1..N1 {
            let mut acc = 0.0;
            for k in 1..n {
                acc += s[k] * s[n - k];
            }
            s[n] = (a[n] - acc) / (2.0 * s[0]);
        }
        Jet1 { c: s }
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let a = self.c;
        let mut s = [0.0; N1];
        let mut c = [0.0; N1];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for n in 0..N1 - 1 {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for k in 0..=n {
                ds += (k as f64 + 1.0) * a[k + 1] * c[n - k];
                dc -= (k as f64 + 1.0) * a[k + 1] * s[n - k];
            }
            s[n + 1] = ds / (n as f64 + 1.0);
            c[n + 1] = dc / (n as f64 + 1.0);
        }
        (Jet1 { c: s }, Jet1 { c })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Compose outer Taylor coefficients (expanded at `inner.value()`) with
    /// this jet as the inner function.
    pub fn compose(outer: &[f64; N1], inner: Jet1) -> Self {
        let mut u = inner;
        u.c[0] = 0.0;
        let mut r = Jet1::constant(outer[N1 - 1]);
        for k in (0..N1 - 1).rev() {
            r = r * u + Jet1::constant(outer[k]);
        }
        r
    }
}

const FACT: [f64; N1] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0];

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, rhs: Jet1) -> Jet1 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        Jet1 { c }
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, rhs: Jet1) -> Jet1 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        Jet1 { c }
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: Jet1) -> Jet1 {
        let mut c = [0.0; N1];
        for i in 0..N1 {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..N1 - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Jet1 { c }
    }
}

/// Maximum total degree carried by [`Jet2`].
pub const JET2_DEGREE: usize = 4;
const N2: usize = 15; // number of (i, j) with i + j <= 4

// Monomial exponents in storage order.
const EXP2: [(usize, usize); N2] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

const fn idx2(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Two-dimensional jet: mixed partial derivatives up to total degree 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub c: [f64; N2],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N2];
        c[0] = v;
        Jet2 { c }
    }

    pub fn zero() -> Self {
        Jet2 { c: [0.0; N2] }
    }

    /// Coordinate function `x` expanded at `x0`.
    pub fn var_x(x0: f64) -> Self {
        let mut c = [0.0; N2];
        c[0] = x0;
        c[idx2(1, 0)] = 1.0;
        Jet2 { c }
    }

    /// Coordinate function `y` expanded at `y0`.
    pub fn var_y(y0: f64) -> Self {
        let mut c = [0.0; N2];
        c[0] = y0;
        c[idx2(0, 1)] = 1.0;
        Jet2 { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Mixed partial `∂_x^i ∂_y^j` (not the Taylor coefficient).
    pub fn deriv(&self, i: usize, j: usize) -> f64 {
        self.c[idx2(i, j)] * FACT[i] * FACT[j]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        for v in &mut c {
            *v *= s;
        }
        Jet2 { c }
    }

    /// Compose 1D outer Taylor coefficients (expanded at `inner.value()`,
    /// orders 0..=4) with a 2D inner jet.
    pub fn compose1(outer: &[f64; JET2_DEGREE + 1], inner: Jet2) -> Self {
        let mut u = inner;
        u.c[0] = 0.0;
        let mut r = Jet2::constant(outer[JET2_DEGREE]);
        for k in (0..JET2_DEGREE).rev() {
            r = r * u + Jet2::constant(outer[k]);
        }
        r
    }

    pub fn sqrt(&self) -> Self {
        let a0 = self.c[0];
        let s0 = a0.sqrt();
        // Taylor of sqrt at a0.
        let outer = [
            s0,
            0.5 / s0,
            -1.0 / (8.0 * s0 * a0),
            1.0 / (16.0 * s0 * a0 * a0),
            -5.0 / (128.0 * s0 * a0 * a0 * a0),
        ];
        Jet2::compose1(&outer, *self)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        Jet2 { c }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        Jet2 { c }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let mut c = [0.0; N2];
        for (a, &(i, j)) in EXP2.iter().enumerate() {
            if self.c[a] == 0.0 {
                continue;
            }
            for (b, &(p, q)) in EXP2.iter().enumerate() {
                if i + p + j + q <= JET2_DEGREE {
                    c[idx2(i + p, j + q)] += self.c[a] * rhs.c[b];
                }
            }
        }
        Jet2 { c }
    }
}

// Below this threshold exp(-1/t) underflows to exactly 0.0 in f64, so
// the step and all its derivatives are exact zeros there.
const STEP_FLAT: f64 = 1.0 / 600.0;

/// Smooth step built from `s(t) = exp(-1/t)`: identically 0 for `t <= 0`,
/// identically 1 for `t >= 1`, C-infinity in between.
pub fn smooth_step(t: f64) -> f64 {
    smooth_step_jet(Jet1::constant(t)).value()
}

/// Jet of the smooth step through an inner 1D jet.
pub fn smooth_step_jet(t: Jet1) -> Jet1 {
    let t0 = t.value();
    if t0 <= STEP_FLAT {
        return Jet1::zero();
    }
    if t0 >= 1.0 - STEP_FLAT {
        return Jet1::constant(1.0);
    }
    let s = (-t.recip()).exp();
    let s1 = (-(Jet1::constant(1.0) - t).recip()).exp();
    s * (s + s1).recip()
}

/// 1D Taylor coefficients of the smooth step at `t0`, orders 0..=k in a
/// caller-sized buffer (k <= 8). Used to push the step through 2D jets.
pub fn smooth_step_taylor(t0: f64) -> [f64; N1] {
    smooth_step_jet(Jet1::var(t0)).c
}

/// Smooth step through a 2D inner jet.
pub fn smooth_step_jet2(t: Jet2) -> Jet2 {
    let t0 = t.value();
    if t0 <= STEP_FLAT {
        return Jet2::zero();
    }
    if t0 >= 1.0 - STEP_FLAT {
        return Jet2::constant(1.0);
    }
    let full = smooth_step_taylor(t0);
    let mut outer = [0.0; JET2_DEGREE + 1];
    outer.copy_from_slice(&full[..JET2_DEGREE + 1]);
    Jet2::compose1(&outer, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn num_deriv(f: impl Fn(f64) -> f64, x: f64, k: usize) -> f64 {
        // central differences, step tuned per order
        let h = 1e-2_f64;
        match k {
            0 => f(x),
            1 => (f(x + h) - f(x - h)) / (2.0 * h),
            2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
            3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
            _ => unreachable!(),
        }
    }

    #[test]
    fn jet1_matches_finite_differences() {
        let g = |x: f64| ((x * x + 0.5).sqrt()).exp() / (1.0 + x * x);
        let x0 = 0.7;
        let x = Jet1::var(x0);
        let j = ((x * x + Jet1::constant(0.5)).sqrt().exp()) * (Jet1::constant(1.0) + x * x).recip();
        for k in 0..=3 {
            let fd = num_deriv(g, x0, k);
            assert_relative_eq!(j.deriv(k), fd, max_relative = 1e-3);
        }
    }

    #[test]
    fn jet1_powi_derivatives_exact() {
        let x = Jet1::var(2.0);
        let p = x.powi(5);
        assert_relative_eq!(p.value(), 32.0);
        assert_relative_eq!(p.deriv(1), 5.0 * 16.0);
        assert_relative_eq!(p.deriv(2), 20.0 * 8.0);
        assert_relative_eq!(p.deriv(5), 120.0);
        assert_eq!(p.deriv(6), 0.0);
    }

    #[test]
    fn jet1_compose_reconstructs_chain_rule() {
        // outer = smooth step at inner value; inner = 0.3 + 0.5 sin-ish poly
        let inner = Jet1::var(0.4) * Jet1::var(0.4) + Jet1::constant(0.1);
        let outer = smooth_step_taylor(inner.value());
        let composed = Jet1::compose(&outer, inner);
        let g = |x: f64| smooth_step(x * x + 0.1);
        for k in 0..=2 {
            assert_relative_eq!(composed.deriv(k), num_deriv(g, 0.4, k), max_relative = 5e-3, epsilon = 1e-6);
        }
    }

    #[test]
    fn smooth_step_endpoints_are_exact() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(2.0), 1.0);
        let j = smooth_step_jet(Jet1::var(-0.25));
        assert!(j.c.iter().all(|&c| c == 0.0));
        let j = smooth_step_jet(Jet1::var(1.25));
        assert_eq!(j.value(), 1.0);
        assert!(j.c[1..].iter().all(|&c| c == 0.0));
        // midpoint symmetry of this blend
        assert_relative_eq!(smooth_step(0.5), 0.5, epsilon = 1e-14);
        assert_relative_eq!(smooth_step(0.3) + smooth_step(0.7), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn jet2_mixed_partials_match_analytic() {
        // f(x, y) = (x^2 + y^2) * sqrt(x + 2) -> check several partials
        let (x0, y0) = (0.5, -0.3);
        let x = Jet2::var_x(x0);
        let y = Jet2::var_y(y0);
        let f = (x * x + y * y) * (x + Jet2::constant(2.0)).sqrt();
        let g = |x: f64, y: f64| (x * x + y * y) * (x + 2.0).sqrt();
        let h = 1e-3;
        let fxy = (g(x0 + h, y0 + h) - g(x0 + h, y0 - h) - g(x0 - h, y0 + h) + g(x0 - h, y0 - h)) / (4.0 * h * h);
        assert_relative_eq!(f.deriv(1, 1), fxy, max_relative = 1e-5);
        let fyy = (g(x0, y0 + h) - 2.0 * g(x0, y0) + g(x0, y0 - h)) / (h * h);
        assert_relative_eq!(f.deriv(0, 2), fyy, max_relative = 1e-5);
        assert_relative_eq!(f.value(), g(x0, y0));
    }

    #[test]
    fn jet2_step_composition_matches_1d() {
        // step applied to a radial argument, checked against Jet1 along y
        let (x0, y0) = (0.1, 0.45);
        let x = Jet2::var_x(x0);
        let y = Jet2::var_y(y0);
        let r2 = x * x + y * y;
        let f2 = smooth_step_jet2(r2.sqrt());
        let y1 = Jet1::var(y0);
        let f1 = smooth_step_jet(((y1 * y1) + Jet1::constant(x0 * x0)).sqrt());
        for j in 0..=3 {
            assert_relative_eq!(f2.deriv(0, j), f1.deriv(j), max_relative = 1e-10, epsilon = 1e-12);
        }
    }
}
