//! Analytic shear profiles, the smooth cutoff, truncated shears and
//! numerical Hölder-norm estimation.
//!
//! The cutoff `chi` follows the convention `chi = 0` for `|eta| <= 1` and
//! `chi = 1` for `|eta| >= 2`; the truncated shear is
//! `v_eps(y) = v(y) * chi((y - y0) / eps)`, so the flow is quiescent on the
//! inner slab `|y - y0| <= eps` and untouched outside `|y - y0| >= 2 eps`.
//!
//! Norms follow the convention
//! `||v||_{C^{k,a}} = sum_{j<=k} ||d^j v||_inf + |d^k v|_{C^a}` with the
//! Hölder seminorm `|f|_{C^a} = sup_{y1 != y2} |f(y1)-f(y2)| / |y1-y2|^a`.

use std::sync::Arc;

use crate::error::FlowError;
use crate::jet::{smooth_step_jet, Jet1, JET1_ORDER};
use crate::Result;

/// Smooth transition function `chi`: even, 0 on `|eta| <= 1`, 1 on
/// `|eta| >= 2`, built from the standard `exp(-1/t)` blend. Sup norms of the
/// first eight derivatives are cached at construction.
#[derive(Debug, Clone)]
pub struct Cutoff {
    sup_norms: [f64; JET1_ORDER + 1],
}

impl Default for Cutoff {
    fn default() -> Self {
        Self::new()
    }
}

impl Cutoff {
    pub fn new() -> Self {
        let mut sup = [0.0f64; JET1_ORDER + 1];
        let n = 4096;
        for i in 0..=n {
            let eta = 1.0 + i as f64 / n as f64;
            let j = Self::jet_static(eta);
            for (k, s) in sup.iter_mut().enumerate() {
                *s = (*s).max(j.deriv(k).abs());
            }
        }
        Cutoff { sup_norms: sup }
    }

    fn jet_static(eta: f64) -> Jet1 {
        let e = Jet1::var(eta);
        if eta >= 0.0 {
            smooth_step_jet(e - Jet1::constant(1.0))
        } else {
            smooth_step_jet(-e - Jet1::constant(1.0))
        }
    }

    /// Jet of `chi` at `eta` (value plus derivatives up to order 8).
    pub fn jet(&self, eta: f64) -> Jet1 {
        Self::jet_static(eta)
    }

    pub fn eval(&self, eta: f64) -> f64 {
        self.jet(eta).value()
    }

    /// `chi^(i)(eta)` for `i <= 8`; exact zeros outside `1 < |eta| < 2`
    /// for `i >= 1`.
    pub fn eval_derivative(&self, eta: f64, i: usize) -> Result<f64> {
        if i > JET1_ORDER {
            return Err(FlowError::InvalidParameter(format!(
                "cutoff derivatives available up to order {JET1_ORDER}, got {i}"
            )));
        }
        Ok(self.jet(eta).deriv(i))
    }

    /// Cached `sup |chi^(i)|`.
    pub fn sup_norm(&self, i: usize) -> f64 {
        self.sup_norms[i]
    }
}

/// Analytic shear profile `v(y)` with derivative access and a recorded
/// vanishing point: at `y0` the derivatives of order `< n` vanish while
/// `v^(n)(y0) != 0`.
#[derive(Clone)]
pub enum ShearProfile {
    /// `v(y) = y^n`, vanishing to order `n` at `y0 = 0`.
    PowerLaw { n: u32 },
    /// Caller-supplied analytic profile with jet (derivative) access.
    Custom {
        name: String,
        n: u32,
        y0: f64,
        eval: Arc<dyn Fn(f64) -> Jet1 + Send + Sync>,
    },
}

impl std::fmt::Debug for ShearProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShearProfile::PowerLaw { n } => write!(f, "PowerLaw(n={n})"),
            ShearProfile::Custom { name, n, y0, .. } => {
                write!(f, "Custom({name}, n={n}, y0={y0})")
            }
        }
    }
}

impl ShearProfile {
    pub fn power_law(n: u32) -> Self {
        ShearProfile::PowerLaw { n }
    }

    pub fn custom(
        name: impl Into<String>,
        n: u32,
        y0: f64,
        eval: impl Fn(f64) -> Jet1 + Send + Sync + 'static,
    ) -> Self {
        ShearProfile::Custom {
            name: name.into(),
            n,
            y0,
            eval: Arc::new(eval),
        }
    }

    /// Vanishing order `n` of the profile at `y0`.
    pub fn n(&self) -> u32 {
        match self {
            ShearProfile::PowerLaw { n } => *n,
            ShearProfile::Custom { n, .. } => *n,
        }
    }

    /// Recorded vanishing point `y0`.
    pub fn y0(&self) -> f64 {
        match self {
            ShearProfile::PowerLaw { .. } => 0.0,
            ShearProfile::Custom { y0, .. } => *y0,
        }
    }

    pub fn jet(&self, y: f64) -> Jet1 {
        match self {
            ShearProfile::PowerLaw { n } => Jet1::var(y).powi(*n),
            ShearProfile::Custom { eval, .. } => eval(y),
        }
    }

    pub fn v(&self, y: f64) -> f64 {
        self.jet(y).value()
    }

    pub fn deriv(&self, y: f64, k: usize) -> f64 {
        self.jet(y).deriv(k)
    }

    /// Verify the vanishing-order record: `v^(k)(y0) = 0` for `k < n` and
    /// `v^(n)(y0) != 0`. Exact for power laws, numeric for custom profiles.
    pub fn certify_condition_v(&self) -> Result<()> {
        let n = self.n() as usize;
        if n == 0 || n + 1 > JET1_ORDER {
            return Err(FlowError::ConditionNotCertified(format!(
                "order n must be in 1..={}, got {n}",
                JET1_ORDER - 1
            )));
        }
        let j = self.jet(self.y0());
        let lead = j.deriv(n).abs();
        if lead <= 1e-10 {
            return Err(FlowError::ConditionNotCertified(format!(
                "v^({n})(y0) = {lead:.3e} is numerically zero"
            )));
        }
        for k in 0..n {
            let d = j.deriv(k).abs();
            if d > 1e-10 * lead.max(1.0) {
                return Err(FlowError::ConditionNotCertified(format!(
                    "v^({k})(y0) = {d:.3e} does not vanish"
                )));
            }
        }
        Ok(())
    }
}

/// Truncated shear `v_eps(y) = v(y) chi((y - y0)/eps)`.
#[derive(Debug, Clone)]
pub struct CutoffShear {
    pub profile: ShearProfile,
    pub cutoff: Cutoff,
    pub eps: f64,
    pub y0: f64,
}

/// Build the truncated shear. Requires `0 < eps < 1/4` and the transition
/// band `y0 +/- 2 eps` strictly inside `(-1, 1)`.
pub fn cutoff_shear(v: &ShearProfile, eps: f64, y0: f64) -> Result<CutoffShear> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(FlowError::InvalidParameter(format!(
            "cutoff scale must satisfy 0 < eps < 1/4, got {eps}"
        )));
    }
    if y0 - 2.0 * eps <= -1.0 || y0 + 2.0 * eps >= 1.0 {
        return Err(FlowError::InvalidParameter(format!(
            "window y0 +/- 2 eps = [{}, {}] leaves (-1, 1)",
            y0 - 2.0 * eps,
            y0 + 2.0 * eps
        )));
    }
    Ok(CutoffShear {
        profile: v.clone(),
        cutoff: Cutoff::new(),
        eps,
        y0,
    })
}

impl CutoffShear {
    /// Jet of `v_eps` at `y`.
    pub fn jet(&self, y: f64) -> Jet1 {
        let chi = self.chi_jet(y);
        self.profile.jet(y) * chi
    }

    /// Jet of the deficit `v - v_eps = v * (1 - chi)` at `y`.
    pub fn deficit_jet(&self, y: f64) -> Jet1 {
        let chi = self.chi_jet(y);
        self.profile.jet(y) * (Jet1::constant(1.0) - chi)
    }

    fn chi_jet(&self, y: f64) -> Jet1 {
        let eta = (Jet1::var(y) - Jet1::constant(self.y0)).scale(1.0 / self.eps);
        if eta.value() >= 0.0 {
            smooth_step_jet(eta - Jet1::constant(1.0))
        } else {
            smooth_step_jet(-eta - Jet1::constant(1.0))
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        self.jet(y).value()
    }

    pub fn deriv(&self, y: f64, k: usize) -> f64 {
        self.jet(y).deriv(k)
    }
}

// ---------------------------------------------------------------------------
// Hölder norm estimation

/// A profile sampled on `[-1, 1]` together with derivative values.
///
/// `derivs[k][i]` holds `f^(k)(ys[i])`.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    pub ys: Vec<f64>,
    pub derivs: Vec<Vec<f64>>,
}

impl SampledProfile {
    /// Sample an analytic profile through its jet on given nodes.
    pub fn from_jets(ys: Vec<f64>, max_k: usize, f: impl Fn(f64) -> Jet1) -> Self {
        let mut derivs = vec![Vec::with_capacity(ys.len()); max_k + 1];
        for &y in &ys {
            let j = f(y);
            for (k, d) in derivs.iter_mut().enumerate() {
                d.push(j.deriv(k));
            }
        }
        SampledProfile { ys, derivs }
    }

    /// Uniform nodes on `[-1, 1]`.
    pub fn uniform_nodes(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Nodes refined around a window `y0 +/- 4 eps` in addition to a coarse
    /// global grid; resolves cutoff-scale features at any `eps`.
    pub fn window_nodes(y0: f64, eps: f64, n_window: usize, n_global: usize) -> Vec<f64> {
        let mut ys: Vec<f64> = (0..n_global)
            .map(|i| -1.0 + 2.0 * i as f64 / (n_global - 1) as f64)
            .collect();
        for i in 0..=n_window {
            let eta = -4.0 + 8.0 * i as f64 / n_window as f64;
            let y = y0 + eps * eta;
            if y > -1.0 && y < 1.0 {
                ys.push(y);
            }
        }
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ys.dedup();
        ys
    }

    /// Numeric-differentiation construction from dense uniform samples
    /// (N >= 4096): derivatives by 8th-order centered finite differences
    /// with shifted stencils near the endpoints.
    pub fn from_dense_samples(values: &[f64], max_k: usize) -> Result<Self> {
        let n = values.len();
        if n < 4096 {
            return Err(FlowError::InvalidParameter(format!(
                "dense sampling requires N >= 4096 nodes, got {n}"
            )));
        }
        let ys = Self::uniform_nodes(n);
        let h = 2.0 / (n - 1) as f64;
        let mut derivs = vec![values.to_vec()];
        let mut cur = values.to_vec();
        for _ in 1..=max_k {
            cur = d1_order8(&cur, h);
            derivs.push(cur.clone());
        }
        Ok(SampledProfile { ys, derivs })
    }
}

/// 8th-order first derivative on a uniform grid; near the ends the stencil
/// is shifted (same order, weights from the degree-8 interpolating
/// polynomial on the 9 boundary nodes).
fn d1_order8(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    let c = [
        3.0 / 840.0,
        -32.0 / 840.0,
        168.0 / 840.0,
        -672.0 / 840.0,
        0.0,
        672.0 / 840.0,
        -168.0 / 840.0,
        32.0 / 840.0,
        -3.0 / 840.0,
    ];
    for i in 4..n - 4 {
        let mut acc = 0.0;
        for (m, &w) in c.iter().enumerate() {
            acc += w * f[i + m - 4];
        }
        out[i] = acc / h;
    }
    for i in 0..4 {
        out[i] = poly_deriv_at(&f[0..9], h, i);
        out[n - 1 - i] = -poly_deriv_at_rev(&f[n - 9..n], h, i);
    }
    out
}

fn poly_deriv_at(f: &[f64], h: f64, at: usize) -> f64 {
    // derivative of the degree-8 interpolating polynomial at node `at`
    let n = f.len();
    let mut acc = 0.0;
    for j in 0..n {
        let mut w = 0.0;
        for m in 0..n {
            if m == j {
                continue;
            }
            let mut p = 1.0 / ((j as f64 - m as f64) * h);
            for q in 0..n {
                if q == j || q == m {
                    continue;
                }
                p *= (at as f64 - q as f64) / (j as f64 - q as f64);
            }
            w += p;
        }
        acc += w * f[j];
    }
    acc
}

fn poly_deriv_at_rev(f: &[f64], h: f64, at: usize) -> f64 {
    let rev: Vec<f64> = f.iter().rev().copied().collect();
    poly_deriv_at(&rev, h, at)
}

/// C^{k,alpha} norm breakdown:
/// `total = sum of sup norms (orders 0..=k) + Hölder seminorm of order k`.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub k: usize,
    pub alpha: f64,
    /// `||d^j f||_inf` for `j = 0..=k`.
    pub sup_norms: Vec<f64>,
    /// `|d^k f|_{C^alpha}`.
    pub seminorm: f64,
    pub total: f64,
}

/// Estimate the `C^{k,alpha}` norm of a sampled profile: sup norms by grid
/// maximization, the Hölder seminorm by exhaustive pairwise maximization of
/// `|f(y1) - f(y2)| / |y1 - y2|^alpha` over the sample nodes.
pub fn holder_norm_1d(p: &SampledProfile, k: usize, alpha: f64) -> Result<NormReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FlowError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if k >= p.derivs.len() {
        return Err(FlowError::InvalidParameter(format!(
            "profile carries derivatives up to order {}, requested {k}",
            p.derivs.len() - 1
        )));
    }
    let sup_norms: Vec<f64> = (0..=k)
        .map(|j| p.derivs[j].iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    let seminorm = pairwise_seminorm(&p.ys, &p.derivs[k], alpha);
    let total = sup_norms.iter().sum::<f64>() + seminorm;
    Ok(NormReport {
        k,
        alpha,
        sup_norms,
        seminorm,
        total,
    })
}

pub(crate) fn pairwise_seminorm(ys: &[f64], f: &[f64], alpha: f64) -> f64 {
    let mut best = 0.0f64;
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            let dy = (ys[j] - ys[i]).abs();
            if dy == 0.0 {
                continue;
            }
            let r = (f[j] - f[i]).abs() / dy.powf(alpha);
            best = best.max(r);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Decay-rate sweep

/// One row of the sweep: measured norms of `v - v_eps` at a given `eps`.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub eps: f64,
    /// `||d^k (v - v_eps)||_inf` for `k = 0..n-1`.
    pub sup_norms: Vec<f64>,
    /// `|d^{n-1}(v - v_eps)|_{C^alpha}`.
    pub seminorm: f64,
    /// Full `C^{n-1,alpha}` distance.
    pub total: f64,
}

/// Log-log regression slopes of the cutoff deficit norms against `eps`.
#[derive(Debug, Clone)]
pub struct SlopeTable {
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
    /// Slope of `||d^k (v - v_eps)||_inf` per `k = 0..n-1`.
    pub sup_slopes: Vec<f64>,
    /// Slope of the order-(n-1) Hölder seminorm.
    pub seminorm_slope: f64,
}

/// Measure `||d^k(v - v_eps)||_inf` for `k <= n-1` and the `C^alpha`
/// seminorm of `d^{n-1}(v - v_eps)` over an `eps` sweep, and fit log-log
/// slopes. Needs at least 4 sweep points, all below 1/4.
pub fn norm_decay_sweep(v: &ShearProfile, alpha: f64, eps_list: &[f64]) -> Result<SlopeTable> {
    if eps_list.len() < 4 {
        return Err(FlowError::InvalidParameter(format!(
            "slope regression needs at least 4 eps values, got {}",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e < 0.25)) {
        return Err(FlowError::InvalidParameter(
            "every eps must satisfy 0 < eps < 1/4".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FlowError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    v.certify_condition_v()?;
    let n = v.n() as usize;
    let y0 = v.y0();
    let mut rows = Vec::new();
    for &eps in eps_list {
        let cs = cutoff_shear(v, eps, y0)?;
        let nodes = SampledProfile::window_nodes(y0, eps, 4096, 512);
        let prof = SampledProfile::from_jets(nodes, n, |y| cs.deficit_jet(y));
        let report = holder_norm_1d(&prof, n - 1, alpha)?;
        rows.push(SweepRow {
            eps,
            sup_norms: report.sup_norms.clone(),
            seminorm: report.seminorm,
            total: report.total,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let sup_slopes = (0..n)
        .map(|k| {
            let ly: Vec<f64> = rows.iter().map(|r| r.sup_norms[k].ln()).collect();
            regression_slope(&lx, &ly)
        })
        .collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.seminorm.ln()).collect();
    let seminorm_slope = regression_slope(&lx, &ly);
    Ok(SlopeTable {
        alpha,
        rows,
        sup_slopes,
        seminorm_slope,
    })
}

pub(crate) fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

// ---------------------------------------------------------------------------
// Taylor remainder

/// The remainder profile
/// `h_k(y) = v^(k)(y) / (y - y0)^{n-k} - v^(n)(y0) / (n-k)!`,
/// continuous across `y0` where the limit value is 0.
#[derive(Debug, Clone)]
pub struct TaylorRemainder {
    profile: ShearProfile,
    pub y0: f64,
    pub k: usize,
    lead: f64,
    next: f64,
}

/// Build the Taylor remainder `h_k` for a profile certified to satisfy the
/// vanishing-order condition at `y0`. Requires `k <= n - 1`.
pub fn taylor_remainder(v: &ShearProfile, y0: f64, k: usize) -> Result<TaylorRemainder> {
    if (y0 - v.y0()).abs() > 1e-12 {
        return Err(FlowError::ConditionNotCertified(format!(
            "profile records vanishing point {} but {y0} was requested",
            v.y0()
        )));
    }
    v.certify_condition_v()?;
    let n = v.n() as usize;
    if k > n - 1 {
        return Err(FlowError::InvalidParameter(format!(
            "k must satisfy k <= n-1 = {}, got {k}",
            n - 1
        )));
    }
    let j = v.jet(y0);
    Ok(TaylorRemainder {
        profile: v.clone(),
        y0,
        k,
        lead: j.deriv(n),
        next: if n + 1 <= JET1_ORDER { j.deriv(n + 1) } else { 0.0 },
    })
}

impl TaylorRemainder {
    pub fn eval(&self, y: f64) -> f64 {
        let n = self.profile.n() as usize;
        let d = y - self.y0;
        if d.abs() < 1e-3 {
            // first-order series branch around the removable singularity
            return self.next * d / factorial(n - self.k + 1);
        }
        let vk = self.profile.deriv(y, self.k);
        vk / d.powi((n - self.k) as i32) - self.lead / factorial(n - self.k)
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product::<f64>().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cutoff_matches_stated_convention() {
        let chi = Cutoff::new();
        assert_eq!(chi.eval(0.5), 0.0);
        assert_eq!(chi.eval(-0.5), 0.0);
        assert_eq!(chi.eval(3.0), 1.0);
        assert_eq!(chi.eval(-3.0), 1.0);
        assert_eq!(chi.eval_derivative(3.0, 1).unwrap(), 0.0);
        assert_eq!(chi.eval_derivative(0.99, 4).unwrap(), 0.0);
        // evenness and monotonicity on the transition band
        let mut prev = 0.0;
        for i in 0..=100 {
            let eta = 1.0 + i as f64 / 100.0;
            let v = chi.eval(eta);
            assert_relative_eq!(chi.eval(-eta), v, epsilon = 1e-15);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        for i in 0..=8 {
            assert!(chi.sup_norm(i).is_finite());
        }
        assert_relative_eq!(chi.sup_norm(0), 1.0, epsilon = 1e-12);
        assert!(chi.eval_derivative(0.0, 9).is_err());
    }

    #[test]
    fn cutoff_shear_examples() {
        let v = ShearProfile::power_law(2);
        let cs = cutoff_shear(&v, 0.1, 0.0).unwrap();
        assert_eq!(cs.value(0.05), 0.0);
        assert_relative_eq!(cs.value(0.5), 0.25, epsilon = 1e-14);
        // sup |v - v_eps| <= 4 eps^2 = 0.16, attained inside the band
        let mut sup: f64 = 0.0;
        let mut arg = 0.0;
        for i in 0..=20000 {
            let y = -1.0 + 2.0 * i as f64 / 20000.0;
            let d = cs.deficit_jet(y).value().abs();
            if d > sup {
                sup = d;
                arg = y;
            }
        }
        assert!(sup <= 0.16 + 1e-12, "sup {sup}");
        assert!(arg.abs() >= 0.1 - 1e-3 && arg.abs() <= 0.2 + 1e-3, "arg {arg}");
        // eps out of range and windows leaving the channel are rejected
        assert!(cutoff_shear(&v, 0.3, 0.0).is_err());
        assert!(cutoff_shear(&v, 0.0, 0.0).is_err());
        assert!(cutoff_shear(&v, 0.2, 0.7).is_err());
    }

    #[test]
    fn support_identity_is_exact_on_the_grid() {
        let v = ShearProfile::power_law(3);
        for &(eps, y0) in &[(0.1, 0.0), (0.05, 0.3), (0.2, -0.25)] {
            let cs = cutoff_shear(&v, eps, y0).unwrap();
            for i in 0..=4000 {
                let y = -1.0 + 2.0 * i as f64 / 4000.0;
                if (y - y0).abs() <= eps {
                    assert_eq!(cs.value(y), 0.0, "inner slab at y = {y}");
                } else if (y - y0).abs() >= 2.0 * eps {
                    assert_eq!(cs.value(y), v.v(y), "outer region at y = {y}");
                }
            }
        }
    }

    #[test]
    fn holder_norm_examples() {
        // f = y^2, k = 0: sup = 1 at the endpoints
        let ys = SampledProfile::uniform_nodes(4096);
        let p = SampledProfile::from_jets(ys.clone(), 0, |y| Jet1::var(y).powi(2));
        let r = holder_norm_1d(&p, 0, 0.5).unwrap();
        assert_relative_eq!(r.sup_norms[0], 1.0, epsilon = 1e-12);
        // f = y, alpha = 1/2: seminorm = sup |y1-y2|^{1/2} = sqrt(2)
        let p = SampledProfile::from_jets(ys.clone(), 0, Jet1::var);
        let r = holder_norm_1d(&p, 0, 0.5).unwrap();
        assert_relative_eq!(r.seminorm, 2.0f64.sqrt(), epsilon = 1e-10);
        assert_relative_eq!(r.total, r.sup_norms[0] + r.seminorm, epsilon = 1e-14);
        // constants have zero seminorm
        let p = SampledProfile::from_jets(ys, 1, |_| Jet1::constant(0.7));
        let r = holder_norm_1d(&p, 1, 0.3).unwrap();
        assert_eq!(r.seminorm, 0.0);
        assert_eq!(r.sup_norms[1], 0.0);
        // alpha validation
        assert!(holder_norm_1d(&p, 0, 1.0).is_err());
    }

    #[test]
    fn norm_report_total_reassembled_independently() {
        let v = ShearProfile::power_law(2);
        let cs = cutoff_shear(&v, 0.1, 0.0).unwrap();
        let nodes = SampledProfile::window_nodes(0.0, 0.1, 2048, 256);
        let p = SampledProfile::from_jets(nodes, 1, |y| cs.deficit_jet(y));
        let r = holder_norm_1d(&p, 1, 0.5).unwrap();
        let total = r.sup_norms.iter().sum::<f64>() + r.seminorm;
        assert_relative_eq!(r.total, total, epsilon = 1e-15);
    }

    #[test]
    fn dense_sample_differentiation_matches_analytic() {
        let n = 4096;
        let ys = SampledProfile::uniform_nodes(n);
        let vals: Vec<f64> = ys.iter().map(|y| (2.0 * y).sin()).collect();
        let p = SampledProfile::from_dense_samples(&vals, 2).unwrap();
        for (i, &y) in p.ys.iter().enumerate() {
            assert_relative_eq!(p.derivs[1][i], 2.0 * (2.0 * y).cos(), epsilon = 1e-9);
            assert_relative_eq!(p.derivs[2][i], -4.0 * (2.0 * y).sin(), epsilon = 1e-6);
        }
        assert!(SampledProfile::from_dense_samples(&vals[..100], 1).is_err());
    }

    #[test]
    fn decay_slopes_match_vanishing_order() {
        let eps_list = [0.2, 0.1, 0.05, 0.025];
        // n = 2: slopes 2 (k=0), 1 (k=1); seminorm slope 1 - alpha = 0.5
        let v = ShearProfile::power_law(2);
        let t = norm_decay_sweep(&v, 0.5, &eps_list).unwrap();
        assert!((t.sup_slopes[0] - 2.0).abs() <= 0.15, "k=0 slope {}", t.sup_slopes[0]);
        assert!((t.sup_slopes[1] - 1.0).abs() <= 0.15, "k=1 slope {}", t.sup_slopes[1]);
        assert!((t.seminorm_slope - 0.5).abs() <= 0.15, "seminorm slope {}", t.seminorm_slope);
        // n = 3, alpha = 0.5 seminorm slope still 1 - alpha
        let v = ShearProfile::power_law(3);
        let t = norm_decay_sweep(&v, 0.5, &eps_list).unwrap();
        assert!((t.seminorm_slope - 0.5).abs() <= 0.15, "seminorm slope {}", t.seminorm_slope);
        assert!((t.sup_slopes[0] - 3.0).abs() <= 0.15);
        // regression needs at least 4 points
        assert!(norm_decay_sweep(&v, 0.5, &[0.1]).is_err());
    }

    #[test]
    fn half_eps0_targets_are_reachable_in_a_sweep() {
        let v = ShearProfile::power_law(2);
        for (eps0, sweep) in [
            (0.1, vec![1e-3, 1e-4, 1e-5, 3e-6, 1e-6]),
            (0.01, vec![1e-6, 3e-7, 1e-7, 3e-8, 1e-8]),
        ] {
            let t = norm_decay_sweep(&v, 0.5, &sweep).unwrap();
            let best = t.rows.iter().map(|r| r.total).fold(f64::INFINITY, f64::min);
            assert!(
                best < eps0 / 2.0,
                "no eps reaches {eps0} / 2; best distance {best}"
            );
        }
    }

    #[test]
    fn scaling_law_for_the_holder_seminorm() {
        // |f(lambda .)|_{C^a} = lambda^a |f|_{C^a} when the sup is attained
        // inside the rescaled window; use a bump supported in [-0.4, 0.4].
        let bump = |y: f64| {
            let t = Jet1::var(y);
            let arg = (t + Jet1::constant(0.4)).scale(1.0 / 0.8);
            let up = smooth_step_jet(arg.scale(2.0));
            let down = smooth_step_jet((Jet1::constant(1.0) - arg).scale(2.0));
            up * down
        };
        let alpha = 0.5;
        let nodes = SampledProfile::uniform_nodes(4001);
        let base = SampledProfile::from_jets(nodes.clone(), 0, bump);
        let s1 = holder_norm_1d(&base, 0, alpha).unwrap().seminorm;
        for lambda in [0.5, 0.75, 1.0] {
            let scaled = SampledProfile::from_jets(nodes.clone(), 0, |y| bump(lambda * y));
            let s = holder_norm_1d(&scaled, 0, alpha).unwrap().seminorm;
            let expect = lambda.powf(alpha) * s1;
            assert!(
                (s - expect).abs() <= 0.01 * expect,
                "lambda {lambda}: {s} vs {expect}"
            );
        }
    }

    #[test]
    fn taylor_remainder_examples() {
        // pure power law: h_k vanishes identically
        let v = ShearProfile::power_law(3);
        for k in 0..=2 {
            let h = taylor_remainder(&v, 0.0, k).unwrap();
            for y in [-0.9, -0.3, 0.2, 0.8] {
                assert_relative_eq!(h.eval(y), 0.0, epsilon = 1e-12);
            }
        }
        // v = y^2 + y^4 at y0 = 0 (n = 2), k = 0: h_0(y) = y^2
        let v = ShearProfile::custom("y2y4", 2, 0.0, |y| {
            let t = Jet1::var(y);
            t.powi(2) + t.powi(4)
        });
        let h = taylor_remainder(&v, 0.0, 0).unwrap();
        for y in [-0.8, -0.1, 0.3, 0.9] {
            assert_relative_eq!(h.eval(y), y * y, epsilon = 1e-10);
        }
        // v = sin(y) - y (n = 3 at 0): h_0 bounded, h_0(0) = 0
        let v = ShearProfile::custom("siny-y", 3, 0.0, |y| {
            let t = Jet1::var(y);
            t.sin() - t
        });
        let h = taylor_remainder(&v, 0.0, 0).unwrap();
        assert_relative_eq!(h.eval(0.0), 0.0, epsilon = 1e-12);
        for i in 0..=200 {
            let y = -1.0 + i as f64 / 100.0;
            assert!(h.eval(y).abs() < 1.0, "unbounded at {y}");
        }
        // series oracle: (sin y - y)/y^3 + 1/6 at a moderate point
        let y = 0.5_f64;
        let expect = (y.sin() - y) / (y * y * y) + 1.0 / 6.0;
        assert_relative_eq!(h.eval(y), expect, epsilon = 1e-12);
        // mismatched vanishing point is rejected
        assert!(taylor_remainder(&v, 0.2, 0).is_err());
        // condition (V) must be certified
        let bad = ShearProfile::custom("not-vanishing", 2, 0.0, |y| {
            Jet1::var(y) + Jet1::constant(1.0)
        });
        assert!(taylor_remainder(&bad, 0.0, 0).is_err());
    }
}
