//! Direct quadrature of the collision integral.
//!
//! Reference path for verification only: the bilinear integral
//!
//! ```text
//! Q(v) = int int B(|u|, cos t) ( f(v*') f(v') - f(v*) f(v) ) dsigma dv*
//! ```
//!
//! is evaluated with trapezoid quadrature over `v*` on the grid and a
//! product rule over the sphere (Gauss-Legendre in the deflection angle,
//! uniform in azimuth), with `f` read off-grid by trilinear interpolation
//! and zero extension. Cost is `O(N^6 M_sphere)`; keep `N` small. Grazing
//! kernels below `eps = 1e-2` are refused: the angular concentration breaks
//! the naive rule.

use rayon::prelude::*;

use crate::grid::VelocityGrid;
use crate::kernels::{angular_density_unchecked, AngularFamily, KernelSpec};
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Product quadrature orders over the scattering sphere.
#[derive(Debug, Clone, Copy)]
pub struct SphereRule {
    /// Gauss-Legendre order in the deflection angle.
    pub polar: usize,
    /// Uniform points in azimuth.
    pub azimuth: usize,
}

impl Default for SphereRule {
    fn default() -> Self {
        SphereRule {
            polar: 16,
            azimuth: 32,
        }
    }
}

/// Reference collision operator on the grid nodes.
pub fn direct_collision_oracle(
    f: &[f64],
    kernel: &KernelSpec,
    grid: &VelocityGrid,
    rule: SphereRule,
) -> Result<Vec<f64>> {
    if f.len() != grid.len() {
        return Err(Error::Invalid(format!(
            "state has {} values, grid has {} nodes",
            f.len(),
            grid.len()
        )));
    }
    if let AngularFamily::GrazingRutherford { eps } = kernel.angular {
        if eps < 1e-2 {
            return Err(Error::Kernel(format!(
                "direct oracle refuses grazing kernels with eps = {eps} < 1e-2; \
                 the angular concentration breaks the product rule"
            )));
        }
    }
    if rule.polar < 2 || rule.azimuth < 2 {
        return Err(Error::Invalid("sphere rule orders must be at least 2".into()));
    }

    // deflection nodes on [0, pi] carrying the b sin(theta) factor
    let (gl_nodes, gl_weights) = gauss_legendre(rule.polar);
    let theta: Vec<f64> = gl_nodes
        .iter()
        .map(|x| 0.5 * std::f64::consts::PI * (x + 1.0))
        .collect();
    let wb: Vec<f64> = theta
        .iter()
        .zip(&gl_weights)
        .map(|(t, w)| {
            0.5 * std::f64::consts::PI * w * angular_density_unchecked(&kernel.angular, *t)
        })
        .collect();
    let cos_t: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let sin_t: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
    // discrete angular mass, shared by the loss term so the gain/loss
    // cancellation on equilibria is quadrature-consistent
    let waz = 2.0 * std::f64::consts::PI / rule.azimuth as f64;
    let angular_mass: f64 = wb.iter().sum::<f64>() * 2.0 * std::f64::consts::PI;
    let az: Vec<(f64, f64)> = (0..rule.azimuth)
        .map(|i| {
            let phi = waz * (i as f64 + 0.5);
            (phi.cos(), phi.sin())
        })
        .collect();

    let m = grid.len();
    let wq = grid.quad_weights();
    let mut q = vec![0.0f64; m];
    q.par_iter_mut().enumerate().try_for_each(|(vi, out)| {
        let v = grid.velocity(vi);
        let fv = f[vi];
        let mut acc = 0.0;
        for vsi in 0..m {
            let vs = grid.velocity(vsi);
            let u = [v[0] - vs[0], v[1] - vs[1], v[2] - vs[2]];
            let speed2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
            if speed2 == 0.0 {
                // u = 0: post-collision velocities equal the originals and
                // the gain/loss terms cancel identically
                continue;
            }
            let speed = speed2.sqrt();
            let rate = wq[vsi] * speed.powf(kernel.lambda);
            let fs = f[vsi];

            // orthonormal frame with e1 along u
            let e1 = [u[0] / speed, u[1] / speed, u[2] / speed];
            let helper = if e1[0].abs() < 0.9 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            };
            let mut e2 = cross(e1, helper);
            let n2 = (e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]).sqrt();
            e2 = [e2[0] / n2, e2[1] / n2, e2[2] / n2];
            let e3 = cross(e1, e2);

            let mut gain = 0.0;
            for (ti, &w) in wb.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let ct = cos_t[ti];
                let st = sin_t[ti];
                let mut az_sum = 0.0;
                for &(ca, sa) in &az {
                    // sigma in the u frame; half = (|u| sigma - u) / 2
                    let mut vp = [0.0f64; 3];
                    let mut vsp = [0.0f64; 3];
                    for a in 0..3 {
                        let sigma = ct * e1[a] + st * (ca * e2[a] + sa * e3[a]);
                        let half = 0.5 * (speed * sigma - u[a]);
                        vp[a] = v[a] + half;
                        vsp[a] = vs[a] - half;
                    }
                    az_sum += trilinear(f, grid, vp) * trilinear(f, grid, vsp);
                }
                gain += w * waz * az_sum;
            }
            acc += rate * (gain - angular_mass * fv * fs);
        }
        if !acc.is_finite() {
            return Err(Error::NonFinite {
                what: "oracle collision value",
                step: None,
            });
        }
        *out = acc;
        Ok(())
    })?;
    Ok(q)
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Trilinear interpolation with zero extension outside the cube.
pub(crate) fn trilinear(f: &[f64], grid: &VelocityGrid, point: [f64; 3]) -> f64 {
    let n = grid.n();
    let dv = grid.dv();
    let l = grid.l();
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for a in 0..3 {
        let x = (point[a] + l) / dv;
        if x < 0.0 || x > (n - 1) as f64 {
            return 0.0;
        }
        let i = (x as usize).min(n - 2);
        base[a] = i;
        frac[a] = x - i as f64;
    }
    let mut acc = 0.0;
    for d0 in 0..2 {
        let w0 = if d0 == 0 { 1.0 - frac[0] } else { frac[0] };
        for d1 in 0..2 {
            let w1 = if d1 == 0 { 1.0 - frac[1] } else { frac[1] };
            for d2 in 0..2 {
                let w2 = if d2 == 0 { 1.0 - frac[2] } else { frac[2] };
                acc += w0
                    * w1
                    * w2
                    * f[grid.index_of([base[0] + d0, base[1] + d1, base[2] + d2])];
            }
        }
    }
    acc
}
