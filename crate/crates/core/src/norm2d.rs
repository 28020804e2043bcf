//! C^{k,alpha} norm estimation for 2D vector fields with analytic
//! derivative (jet) access.
//!
//! Sup norms maximize every partial derivative over the sample set; the
//! Hölder seminorm of the top-order derivatives is estimated by pairwise
//! maximization over a (possibly smaller) pair-sample set. Distances use
//! the channel metric (periodic in x).

use crate::jet::Jet2;
use crate::vortex::{wrap_x, FlowSpec};

/// Norm breakdown for a 2D field: `sup_by_order[j]` is the largest sup norm
/// among all partials of total order `j` and both components; `total` is
/// their sum plus the top-order Hölder seminorm (when `alpha` is set).
#[derive(Debug, Clone)]
pub struct Norm2dReport {
    pub k: usize,
    pub alpha: Option<f64>,
    pub sup_by_order: Vec<f64>,
    pub seminorm: f64,
    pub total: f64,
}

/// Estimate the `C^{k,alpha}` norm of a vector field given by its jets.
/// `samples` feed the sup norms; `pair_samples` feed the pairwise
/// seminorm of the order-`k` derivatives (skipped when `alpha` is `None`,
/// which yields the plain `C^k` norm).
pub fn holder_norm_2d(
    field: impl Fn((f64, f64)) -> [Jet2; 2],
    samples: &[(f64, f64)],
    pair_samples: &[(f64, f64)],
    k: usize,
    alpha: Option<f64>,
) -> Norm2dReport {
    assert!(k <= 4, "jets carry derivatives up to total degree 4");
    let mut sup_by_order = vec![0.0f64; k + 1];
    for &p in samples {
        let jets = field(p);
        for jet in &jets {
            for order in 0..=k {
                for i in 0..=order {
                    let d = jet.deriv(i, order - i).abs();
                    if d > sup_by_order[order] {
                        sup_by_order[order] = d;
                    }
                }
            }
        }
    }
    let mut seminorm = 0.0f64;
    if let Some(a) = alpha {
        // top-order derivative values at the pair samples
        let mut vals: Vec<[f64; 16]> = Vec::with_capacity(pair_samples.len());
        let ncomp = 2 * (k + 1);
        for &p in pair_samples {
            let jets = field(p);
            let mut row = [0.0f64; 16];
            let mut m = 0;
            for jet in &jets {
                for i in 0..=k {
                    row[m] = jet.deriv(i, k - i);
                    m += 1;
                }
            }
            vals.push(row);
        }
        for i in 0..pair_samples.len() {
            for j in i + 1..pair_samples.len() {
                let dx = wrap_x(pair_samples[i].0 - pair_samples[j].0);
                let dy = pair_samples[i].1 - pair_samples[j].1;
                let d = (dx * dx + dy * dy).sqrt();
                if d == 0.0 {
                    continue;
                }
                let da = d.powf(a);
                for m in 0..ncomp {
                    let r = (vals[i][m] - vals[j][m]).abs() / da;
                    if r > seminorm {
                        seminorm = r;
                    }
                }
            }
        }
    }
    let total = sup_by_order.iter().sum::<f64>() + seminorm;
    Norm2dReport {
        k,
        alpha,
        sup_by_order,
        seminorm,
        total,
    }
}

/// Uniform sample lattice over the channel.
pub fn channel_samples(nx: usize, ny: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = 2.0 * std::f64::consts::PI * i as f64 / nx as f64;
        for j in 0..ny {
            let y = -1.0 + 2.0 * j as f64 / (ny - 1) as f64;
            out.push((x, y));
        }
    }
    out
}

/// Samples concentrated where a composite flow deviates from its base
/// shear: a dense slab across each cutoff window (which contains the
/// vortices) plus a coarse global lattice.
pub fn flow_deviation_samples(flow: &FlowSpec, nx_slab: usize, ny_slab: usize) -> Vec<(f64, f64)> {
    let mut out = channel_samples(48, 33);
    for w in &flow.windows {
        for i in 0..nx_slab {
            let x = 2.0 * std::f64::consts::PI * i as f64 / nx_slab as f64;
            for j in 0..=ny_slab {
                let eta = -3.0 + 6.0 * j as f64 / ny_slab as f64;
                let y = w.y0 + w.eps * eta;
                if y > -1.0 && y < 1.0 {
                    out.push((x, y));
                }
            }
        }
    }
    out
}

/// `C^{n-1,alpha}` distance of the composite to its base shear `(v(y), 0)`
/// at `t = 0`.
pub fn closeness_to_shear(flow: &FlowSpec, alpha: f64) -> Norm2dReport {
    let n = flow.shear.n() as usize;
    let samples = flow_deviation_samples(flow, 96, 192);
    let pairs = flow_deviation_samples(flow, 24, 96);
    holder_norm_2d(
        |p| flow.deficit_jet(0.0, p),
        &samples,
        &pairs,
        n - 1,
        Some(alpha),
    )
}

/// Plain `C^2` distance of the composite to its base shear (sup norms of
/// all derivatives through order 2, no seminorm).
pub fn c2_distance_to_shear(flow: &FlowSpec) -> f64 {
    let samples = flow_deviation_samples(flow, 96, 192);
    holder_norm_2d(|p| flow.deficit_jet(0.0, p), &samples, &[], 2, None).total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet2;
    use approx::assert_relative_eq;

    fn sin_jet(j: Jet2) -> Jet2 {
        let v = j.value();
        let outer = [v.sin(), v.cos(), -v.sin() / 2.0, -v.cos() / 6.0, v.sin() / 24.0];
        Jet2::compose1(&outer, j)
    }

    fn cos_jet(j: Jet2) -> Jet2 {
        let v = j.value();
        let outer = [v.cos(), -v.sin(), -v.cos() / 2.0, v.sin() / 6.0, v.cos() / 24.0];
        Jet2::compose1(&outer, j)
    }

    #[test]
    fn sup_norms_of_a_known_field() {
        // u = (sin x * cos y, y^2): known derivative sups on the channel
        let field = |p: (f64, f64)| {
            let x = Jet2::var_x(p.0);
            let y = Jet2::var_y(p.1);
            let (sx, cy) = (sin_jet(x), cos_jet(y));
            [sx * cy, y * y]
        };
        let samples = channel_samples(64, 65);
        let r = holder_norm_2d(field, &samples, &[], 2, None);
        assert_relative_eq!(r.sup_by_order[0], 1.0, epsilon = 1e-2);
        // first order: max(|cos x cos y|, |sin x sin y|, |2y|) = 2 at walls
        assert_relative_eq!(r.sup_by_order[1], 2.0, epsilon = 1e-2);
        assert_relative_eq!(r.sup_by_order[2], 2.0, epsilon = 1e-2);
    }

    #[test]
    fn seminorm_of_linear_gradient_field() {
        // u = (y^2, 0): d_y u1 = 2y, C^{1/2} seminorm of order-1 derivs
        // = sup |2y1 - 2y2| / |y1 - y2|^{1/2} = 2 sqrt(2)
        let field = |p: (f64, f64)| {
            let y = Jet2::var_y(p.1);
            [y * y, Jet2::zero()]
        };
        let samples = channel_samples(8, 257);
        let r = holder_norm_2d(field, &samples, &samples, 1, Some(0.5));
        assert_relative_eq!(r.seminorm, 2.0 * 2.0f64.sqrt(), epsilon = 1e-2);
        assert_relative_eq!(
            r.total,
            r.sup_by_order.iter().sum::<f64>() + r.seminorm,
            epsilon = 1e-14
        );
    }
}
