//! Pointwise weight functions `G(u, zeta)` for the Boltzmann and
//! Fokker-Planck-Landau operators.

use num_complex::Complex64;

use crate::kernels::KernelSpec;
use crate::weights::theta::theta_components;
use crate::Result;

/// Boltzmann weight function
///
/// ```text
/// G(u, zeta) = 2 pi |u|^lambda int_0^pi b sin t
///              ( e^{i beta/2 (1-cos t) zeta.u} J0(beta |u| sin t |zeta_perp| / 2) - 1 ) dt
/// ```
///
/// evaluated by adaptive quadrature at relative tolerance 1e-8 (split at
/// `sqrt(eps)` for the grazing family). `u = 0` returns zero: the bracket
/// vanishes there for `lambda >= 0`, and for `lambda < 0` the point is
/// adopted as the zero-by-convention value of a measure-zero singularity.
pub fn g_boltzmann(u: [f64; 3], zeta: [f64; 3], kernel: &KernelSpec) -> Result<Complex64> {
    let un = norm(u);
    if un == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let zu = dot(zeta, u);
    let zperp_sq = (dot(zeta, zeta) - (zu / un) * (zu / un)).max(0.0);
    let c1 = 0.5 * kernel.beta * zu;
    let c2 = 0.5 * kernel.beta * un * zperp_sq.sqrt();
    let (p, s) = theta_components(&kernel.angular, c1, c2, 1e-8)?;
    let scale = 2.0 * std::f64::consts::PI * un.powf(kernel.lambda);
    Ok(Complex64::new(scale * p, scale * s))
}

/// Fokker-Planck-Landau weight function
///
/// ```text
/// G(u, zeta) = 4 |u|^lambda ( i (u . zeta) - |u|^2 |zeta_perp|^2 / 4 )
/// ```
///
/// with `|zeta_perp|^2 = |zeta|^2 - (zeta . u / |u|)^2`, clamped at zero
/// against roundoff. `u = 0` returns zero by the same convention as
/// [`g_boltzmann`].
pub fn g_landau(u: [f64; 3], zeta: [f64; 3], lambda: f64) -> Complex64 {
    let un = norm(u);
    if un == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let zu = dot(zeta, u);
    let zperp_sq = (dot(zeta, zeta) - (zu / un) * (zu / un)).max(0.0);
    let scale = 4.0 * un.powf(lambda);
    Complex64::new(-scale * 0.25 * un * un * zperp_sq, scale * zu)
}

#[inline]
pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn iso_kernel() -> KernelSpec {
        KernelSpec::maxwell_isotropic(1.0 / (4.0 * PI)).unwrap()
    }

    #[test]
    fn g_boltzmann_zero_frequency() {
        // bracket is e^0 J0(0) - 1 = 0
        let g = g_boltzmann([1.3, -0.2, 0.8], [0.0; 3], &iso_kernel()).unwrap();
        assert!(g.norm() < 1e-12);
    }

    #[test]
    fn g_boltzmann_parallel_closed_form() {
        // zeta parallel to u, isotropic b = 1/(4 pi), lambda = 0: substituting
        // w = 1 - cos t turns the integral into
        //   (1/2) int_0^2 (e^{i w / 2} - 1) dw = (sin 1 - 1) + i (1 - cos 1).
        let g = g_boltzmann([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], &iso_kernel()).unwrap();
        assert_relative_eq!(g.re, 1.0f64.sin() - 1.0, max_relative = 1e-8);
        assert_relative_eq!(g.im, 1.0 - 1.0f64.cos(), max_relative = 1e-8);
    }

    #[test]
    fn g_boltzmann_matches_sphere_quadrature() {
        // Frozen from an mpmath quadrature of the raw sphere integral (and
        // cross-checked against the Bessel-reduced 1-D form).
        let g = g_boltzmann([1.0, 0.0, 0.0], [1.0, 2.0, 0.0], &iso_kernel()).unwrap();
        assert_relative_eq!(g.re, -0.2941545295427656, max_relative = 1e-8);
        assert_relative_eq!(g.im, 0.3856051379557488, max_relative = 1e-8);
    }

    #[test]
    fn g_landau_special_directions() {
        // zeta parallel to u: perpendicular part vanishes
        let g = g_landau([2.0, 0.0, 0.0], [3.0, 0.0, 0.0], -1.0);
        assert_relative_eq!(g.im, 4.0 * 0.5 * 6.0);
        assert!(g.re.abs() < 1e-14);
        // zeta perpendicular to u: pure real -|u|^{lambda+2} |zeta|^2
        let g = g_landau([2.0, 0.0, 0.0], [0.0, 3.0, 0.0], -1.0);
        assert_relative_eq!(g.re, -2.0f64.powi(1) * 9.0);
        assert!(g.im.abs() < 1e-14);
        // direct substitution: u=(1,0,0), zeta=(1,1,0), lambda=-3
        let g = g_landau([1.0, 0.0, 0.0], [1.0, 1.0, 0.0], -3.0);
        assert_relative_eq!(g.re, -1.0);
        assert_relative_eq!(g.im, 4.0);
        // u = 0 convention
        assert_eq!(g_landau([0.0; 3], [1.0, 0.0, 0.0], -3.0).norm(), 0.0);
    }

    #[test]
    fn grazing_g_converges_to_landau() {
        // Relative gap frozen from mpmath: 0.189, 0.0201, 0.00202, 0.000202.
        let u = [1.5, -0.7, 2.1];
        let zeta = [0.8, 1.9, -2.5];
        let gl = g_landau(u, zeta, -3.0);
        let mut prev = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let k = KernelSpec::coulomb_grazing(eps).unwrap();
            let gb = g_boltzmann(u, zeta, &k).unwrap();
            let gap = (gb - gl).norm() / gl.norm();
            assert!(gap < prev, "gap not decreasing at eps={eps}");
            prev = gap;
        }
        assert!(prev < 3e-4, "gap at eps=1e-4 is {prev}");
    }
}
