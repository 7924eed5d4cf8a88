//! Single entries of the convolution weight tensor.
//!
//! With `zeta` as the polar direction, an entry depends on `(zeta, xi)` only
//! through the scalar triple `(|zeta|, xi_par, |xi_perp|)` where `xi_par =
//! xi . zeta / |zeta|`. The Boltzmann entry is the triple integral
//!
//! ```text
//! Ghat(zeta, xi) = sqrt(2 pi) int_0^L r^{lambda+2} int_0^pi sin(phi)
//!     J0(r |xi_perp| sin phi) Theta(c1, c2, c3) dphi dr,
//! c1 = beta r |zeta| cos(phi) / 2,  c2 = beta r |zeta| sin(phi) / 2,
//! c3 = r xi_par cos(phi),
//! ```
//!
//! where `Theta` is the kernel's theta integral (see the `theta` module; the
//! `sqrt(2 pi)` carries the transform normalization `(2 pi)^{-3/2}` through
//! the two explicit angular factors of `4 pi^2`). The radial cutoff at
//! `r = L` is the ball truncation that keeps the weights real-valued.

use std::cell::RefCell;
use std::f64::consts::PI;

use crate::kernels::KernelSpec;
use crate::quadrature::{adaptive_lenient, Rule};
use crate::special::bessel_j0;
use crate::weights::theta::{theta_components, ThetaTable};
use crate::{Error, Result};

use super::gfun::{dot, norm};

/// Sources of the `(P, S)` theta components during entry evaluation.
pub(crate) trait ThetaEval: Sync {
    fn components(&self, c1: f64, c2: f64) -> Result<(f64, f64)>;
}

/// Direct quadrature of the theta integral; the reference path.
pub(crate) struct DirectTheta<'a> {
    pub kernel: &'a KernelSpec,
    pub rel_tol: f64,
}

impl ThetaEval for DirectTheta<'_> {
    fn components(&self, c1: f64, c2: f64) -> Result<(f64, f64)> {
        theta_components(&self.kernel.angular, c1, c2, self.rel_tol)
    }
}

impl ThetaEval for ThetaTable {
    fn components(&self, c1: f64, c2: f64) -> Result<(f64, f64)> {
        Ok(self.eval(c1, c2))
    }
}

/// Scalar invariants `(|zeta|, xi_par, |xi_perp|)` of a `(zeta, xi)` pair.
pub(crate) fn scalar_invariants(zeta: [f64; 3], xi: [f64; 3]) -> (f64, f64, f64) {
    let zn = norm(zeta);
    if zn == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let xi_par = dot(xi, zeta) / zn;
    let q = (dot(xi, xi) - xi_par * xi_par).max(0.0).sqrt();
    (zn, xi_par, q)
}

/// Outcome of one tensor-entry quadrature.
pub(crate) struct EntryValue {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Boltzmann entry from the scalar invariants. `rel_tol` applies to the
/// `r` and `phi` quadratures; the theta path carries its own tolerance.
pub(crate) fn ghat_boltzmann_scalar(
    zn: f64,
    xi_par: f64,
    q: f64,
    kernel: &KernelSpec,
    l: f64,
    theta: &dyn ThetaEval,
    rel_tol: f64,
) -> Result<EntryValue> {
    if zn == 0.0 {
        // G(u, 0) = 0, so the transform vanishes without quadrature.
        return Ok(EntryValue {
            value: 0.0,
            error: 0.0,
            converged: true,
        });
    }
    let half_beta_zn = 0.5 * kernel.beta * zn;
    // magnitude scale of the theta components, used for absolute floors of
    // the oscillatory angular integrals
    let c_scale = 1.0 + (half_beta_zn * l).powi(2);
    let inner_floor = 1e-12 * c_scale;
    let outer_floor = 1e-11 * c_scale * l;
    let theta_failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_missed = std::cell::Cell::new(false);

    let radial = |r: f64| -> f64 {
        let phi_integrand = |phi: f64| -> f64 {
            let (sphi, cphi) = phi.sin_cos();
            let c1 = half_beta_zn * r * cphi;
            let c2 = half_beta_zn * r * sphi;
            let c3 = r * xi_par * cphi;
            match theta.components(c1, c2) {
                Ok((p, s)) => {
                    let (sin_c3, cos_c3) = c3.sin_cos();
                    sphi * bessel_j0(r * q * sphi) * (cos_c3 * p + sin_c3 * s)
                }
                Err(e) => {
                    theta_failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        match adaptive_lenient(
            phi_integrand,
            &[0.0, 0.5 * PI, PI],
            rel_tol,
            inner_floor,
            Rule::GaussKronrod15,
            512,
        ) {
            Ok((quad, converged)) => {
                if !converged {
                    inner_missed.set(true);
                }
                quad.value
            }
            Err(_) => f64::NAN,
        }
    };

    let result = adaptive_lenient(
        |r| r.powf(kernel.lambda + 2.0) * radial(r),
        &radial_seeds(l, kernel.lambda),
        rel_tol,
        outer_floor,
        Rule::GaussKronrod15,
        1024,
    );
    let (quad, converged) = match result {
        Ok(ok) => ok,
        Err(e) => return Err(theta_failure.borrow_mut().take().unwrap_or(e)),
    };
    Ok(EntryValue {
        value: (2.0 * PI).sqrt() * quad.value,
        error: (2.0 * PI).sqrt() * quad.abs_error,
        converged: converged && !inner_missed.get(),
    })
}

/// Landau entry from the scalar invariants: the same ball-truncated
/// transform applied to the Landau `G`, reduced to a 2-D `(r, phi)` integral
///
/// ```text
/// Ghat_L = (4 / sqrt(2 pi)) int_0^L r^{lambda+2} int_0^pi sin(phi)
///     J0(r |xi_perp| sin phi) [ r |zeta| cos(phi) sin(r xi_par cos phi)
///     - (r^2 |zeta|^2 sin^2 phi / 4) cos(r xi_par cos phi) ] dphi dr.
/// ```
pub(crate) fn ghat_landau_scalar(
    zn: f64,
    xi_par: f64,
    q: f64,
    lambda: f64,
    l: f64,
    rel_tol: f64,
) -> Result<EntryValue> {
    if zn == 0.0 {
        return Ok(EntryValue {
            value: 0.0,
            error: 0.0,
            converged: true,
        });
    }
    let c_scale = 1.0 + (zn * l) * (zn * l);
    let inner_floor = 1e-12 * c_scale;
    let outer_floor = 1e-11 * c_scale * l;
    let inner_missed = std::cell::Cell::new(false);

    let radial = |r: f64| -> f64 {
        let phi_integrand = |phi: f64| -> f64 {
            let (sphi, cphi) = phi.sin_cos();
            let (sin_a, cos_a) = (r * xi_par * cphi).sin_cos();
            let drift = r * zn * cphi * sin_a;
            let diffusion = 0.25 * (r * zn * sphi) * (r * zn * sphi) * cos_a;
            sphi * bessel_j0(r * q * sphi) * (drift - diffusion)
        };
        match adaptive_lenient(
            phi_integrand,
            &[0.0, 0.5 * PI, PI],
            rel_tol,
            inner_floor,
            Rule::GaussKronrod15,
            512,
        ) {
            Ok((quad, converged)) => {
                if !converged {
                    inner_missed.set(true);
                }
                quad.value
            }
            Err(_) => f64::NAN,
        }
    };

    let (quad, converged) = adaptive_lenient(
        |r| r.powf(lambda + 2.0) * radial(r),
        &radial_seeds(l, lambda),
        rel_tol,
        outer_floor,
        Rule::GaussKronrod15,
        1024,
    )?;
    let scale = 4.0 / (2.0 * PI).sqrt();
    Ok(EntryValue {
        value: scale * quad.value,
        error: scale * quad.abs_error,
        converged: converged && !inner_missed.get(),
    })
}

/// Initial radial partition; refined toward `r = 0` for soft potentials,
/// where `r^{lambda+2}` concentrates the integrand (the bracket supplies an
/// `O(r^2)` zero, so the product stays integrable down to `lambda = -3`).
fn radial_seeds(l: f64, lambda: f64) -> Vec<f64> {
    if lambda >= 0.0 {
        vec![0.0, 0.5 * l, l]
    } else {
        vec![0.0, l / 1024.0, l / 128.0, l / 16.0, l / 4.0, l]
    }
}

/// One Boltzmann weight entry for arbitrary (not necessarily grid-aligned)
/// frequency vectors, by direct theta quadrature. `zeta = 0` returns zero.
pub fn ghat_boltzmann_entry(
    zeta: [f64; 3],
    xi: [f64; 3],
    kernel: &KernelSpec,
    l: f64,
) -> Result<f64> {
    check_l(l)?;
    let (zn, xi_par, q) = scalar_invariants(zeta, xi);
    let theta = DirectTheta {
        kernel,
        rel_tol: 1e-8,
    };
    let entry = ghat_boltzmann_scalar(zn, xi_par, q, kernel, l, &theta, 1e-6)?;
    finish_entry(entry)
}

/// One Landau weight entry for arbitrary frequency vectors.
pub fn ghat_landau_entry(zeta: [f64; 3], xi: [f64; 3], lambda: f64, l: f64) -> Result<f64> {
    check_l(l)?;
    let (zn, xi_par, q) = scalar_invariants(zeta, xi);
    let entry = ghat_landau_scalar(zn, xi_par, q, lambda, l, 1e-6)?;
    finish_entry(entry)
}

fn check_l(l: f64) -> Result<()> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Invalid(format!("radial cutoff L must be positive, got {l}")));
    }
    Ok(())
}

fn finish_entry(entry: EntryValue) -> Result<f64> {
    if !entry.value.is_finite() {
        return Err(Error::NonFinite {
            what: "weight entry",
            step: None,
        });
    }
    if !entry.converged {
        return Err(Error::Quadrature {
            value: entry.value,
            estimate: entry.error,
            requested: 1e-6 * entry.value.abs(),
        });
    }
    Ok(entry.value)
}
