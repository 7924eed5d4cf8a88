//! Collision kernels `B(|u|, cos theta) = |u|^lambda b(cos theta)` and the
//! elastic collision rule.
//!
//! Angular cross sections are handled through the product `b(cos theta) *
//! sin(theta)`: every integral over the sphere carries the `sin theta`
//! Jacobian, and the grazing Rutherford family is defined through the
//! product, so exposing it avoids a 0/0 at the poles.

use std::io::Read;
use std::path::Path;

use crate::quadrature::{adaptive, adaptive_seeded};
use crate::{Error, Result};

/// Angular cross-section family, expressed through `b(cos theta) sin theta`.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularFamily {
    /// Constant `b`; e.g. `1/(4 pi)` normalizes the sphere integral to one.
    IsotropicConstant(f64),
    /// Singular grazing family `b sin theta = 8 eps / (pi theta^4)` for
    /// `theta >= eps`, zero below the cutoff.
    GrazingRutherford { eps: f64 },
    /// Experimentally determined section, monotone-cubic interpolated.
    Tabulated(TabulatedAngular),
}

impl AngularFamily {
    /// Tag used in the weight-cache header.
    pub(crate) fn tag(&self) -> u32 {
        match self {
            AngularFamily::IsotropicConstant(_) => 0,
            AngularFamily::GrazingRutherford { .. } => 1,
            AngularFamily::Tabulated(_) => 2,
        }
    }

    /// Scalar parameter stored in the weight-cache header (constant value or
    /// `eps`; zero for tabulated sections).
    pub(crate) fn param(&self) -> f64 {
        match self {
            AngularFamily::IsotropicConstant(b) => *b,
            AngularFamily::GrazingRutherford { eps } => *eps,
            AngularFamily::Tabulated(_) => 0.0,
        }
    }
}

/// Collision kernel specification.
///
/// `lambda` is the relative-speed exponent: variable soft potentials for
/// `-3 < lambda < 0` (Coulomb at `-3`), Maxwell molecules at `0`, variable
/// hard potentials up to hard spheres at `1`. `beta` enters the spectral
/// phase factors; the elastic interaction law corresponds to `beta = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub lambda: f64,
    pub beta: f64,
    pub angular: AngularFamily,
}

impl KernelSpec {
    pub fn new(lambda: f64, beta: f64, angular: AngularFamily) -> Result<Self> {
        if !(-3.0..=1.0).contains(&lambda) {
            return Err(Error::Kernel(format!(
                "lambda must lie in [-3, 1], got {lambda}"
            )));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Kernel(format!("beta must lie in (0, 1], got {beta}")));
        }
        match &angular {
            AngularFamily::IsotropicConstant(b) => {
                if !(*b >= 0.0) || !b.is_finite() {
                    return Err(Error::Kernel(format!(
                        "isotropic constant must be non-negative, got {b}"
                    )));
                }
            }
            AngularFamily::GrazingRutherford { eps } => {
                if !(*eps > 0.0 && *eps < std::f64::consts::PI) {
                    return Err(Error::Kernel(format!(
                        "grazing cutoff eps must lie in (0, pi), got {eps}"
                    )));
                }
            }
            AngularFamily::Tabulated(_) => {}
        }
        Ok(Self {
            lambda,
            beta,
            angular,
        })
    }

    /// Maxwell molecules (`lambda = 0`) with a constant angular section.
    pub fn maxwell_isotropic(b: f64) -> Result<Self> {
        Self::new(0.0, 1.0, AngularFamily::IsotropicConstant(b))
    }

    /// Coulomb interaction (`lambda = -3`) with the grazing Rutherford
    /// family at cutoff `eps`.
    pub fn coulomb_grazing(eps: f64) -> Result<Self> {
        Self::new(-3.0, 1.0, AngularFamily::GrazingRutherford { eps })
    }
}

/// Evaluates `b(cos theta) sin theta` at `theta` in `[0, pi]`.
pub fn angular_density(spec: &KernelSpec, theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Kernel(format!(
            "theta must lie in [0, pi], got {theta}"
        )));
    }
    Ok(angular_density_unchecked(&spec.angular, theta))
}

#[inline]
pub(crate) fn angular_density_unchecked(angular: &AngularFamily, theta: f64) -> f64 {
    match angular {
        AngularFamily::IsotropicConstant(b) => b * theta.sin(),
        AngularFamily::GrazingRutherford { eps } => {
            if theta < *eps {
                0.0
            } else {
                8.0 * eps / (std::f64::consts::PI * theta.powi(4))
            }
        }
        AngularFamily::Tabulated(t) => t.eval(theta),
    }
}

/// Angular moment `2 pi int_0^pi b(cos theta) (1 - cos theta)^p sin theta
/// dtheta`, computed by adaptive quadrature at relative tolerance 1e-8.
///
/// `p = 1` is the grazing-limit rate `Lambda_eps`; the moments with `p >= 2`
/// must vanish as `eps -> 0` for a family to qualify as grazing.
pub fn grazing_moment(spec: &KernelSpec, p: u32) -> Result<f64> {
    if p < 1 {
        return Err(Error::Kernel("moment order p must be >= 1".into()));
    }
    let pi = std::f64::consts::PI;
    // 1 - cos(theta) = 2 sin^2(theta/2), stable where the mass concentrates.
    let one_minus_cos = |theta: f64| 2.0 * (0.5 * theta).sin().powi(2);
    let integrand = |theta: f64| {
        angular_density_unchecked(&spec.angular, theta) * one_minus_cos(theta).powi(p as i32)
    };
    let q = match &spec.angular {
        AngularFamily::GrazingRutherford { eps } => {
            adaptive_seeded(integrand, &geometric_seeds(*eps, pi), 1e-8, 1e-14)?
        }
        _ => adaptive(integrand, 0.0, pi, 1e-8, 1e-14)?,
    };
    Ok(2.0 * pi * q.value)
}

/// Geometric partition from `a` to `b`, refined toward `a`.
pub(crate) fn geometric_seeds(a: f64, b: f64) -> Vec<f64> {
    let mut points = vec![a];
    let mut x = a;
    while x < b {
        x *= 4.0;
        points.push(x.min(b));
    }
    points
}

/// Elastic post-collision velocities `v' = v + (|u| sigma - u)/2` and
/// `v*' = v* - (|u| sigma - u)/2`, with `u = v - v*`.
///
/// Conserves momentum exactly and kinetic energy to roundoff. `sigma` must
/// be a unit vector to within 1e-12.
pub fn post_collision_velocities(
    v: [f64; 3],
    v_star: [f64; 3],
    sigma: [f64; 3],
) -> Result<([f64; 3], [f64; 3])> {
    let norm = (sigma[0] * sigma[0] + sigma[1] * sigma[1] + sigma[2] * sigma[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Kernel(format!(
            "sigma must be a unit vector, |sigma| = {norm}"
        )));
    }
    let u = [v[0] - v_star[0], v[1] - v_star[1], v[2] - v_star[2]];
    let speed = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let mut vp = v;
    let mut vsp = v_star;
    for i in 0..3 {
        let half = 0.5 * (speed * sigma[i] - u[i]);
        vp[i] += half;
        vsp[i] -= half;
    }
    Ok((vp, vsp))
}

/// Tabulated angular section: `(theta, b sin theta)` pairs interpolated with
/// a monotone cubic (Fritsch-Carlson). Outside the tabulated range the
/// section is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedAngular {
    thetas: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedAngular {
    pub fn from_points(thetas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if thetas.len() != values.len() || thetas.len() < 2 {
            return Err(Error::Kernel(
                "tabulated section needs at least two (theta, value) pairs".into(),
            ));
        }
        if thetas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Kernel("tabulated thetas must be strictly increasing".into()));
        }
        if thetas[0] < 0.0 || *thetas.last().unwrap() > std::f64::consts::PI + 1e-12 {
            return Err(Error::Kernel("tabulated thetas must lie in [0, pi]".into()));
        }
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Kernel("tabulated values must be non-negative".into()));
        }
        let slopes = pchip_slopes(&thetas, &values);
        Ok(Self {
            thetas,
            values,
            slopes,
        })
    }

    /// Loads a two-column whitespace-separated text file (theta, b sin theta);
    /// `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut text = String::new();
        std::fs::File::open(path)?.read_to_string(&mut text)?;
        let mut thetas = Vec::new();
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.ok_or_else(|| {
                    Error::Kernel(format!("line {}: expected two columns", lineno + 1))
                })?
                .parse::<f64>()
                .map_err(|e| Error::Kernel(format!("line {}: {e}", lineno + 1)))
            };
            thetas.push(parse(cols.next())?);
            values.push(parse(cols.next())?);
        }
        Self::from_points(thetas, values)
    }

    /// Interpolated `b sin theta`; zero outside the tabulated range and
    /// clamped at zero so the non-negativity invariant survives interpolation.
    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.thetas.len();
        if theta < self.thetas[0] || theta > self.thetas[n - 1] {
            return 0.0;
        }
        let i = match self
            .thetas
            .binary_search_by(|t| t.total_cmp(&theta))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let h = self.thetas[i + 1] - self.thetas[i];
        let t = (theta - self.thetas[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        v.max(0.0)
    }

    pub fn knots(&self) -> &[f64] {
        &self.thetas
    }
}

/// Fritsch-Carlson shape-preserving slopes for cubic Hermite interpolation.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    m[0] = edge_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
    m[n - 1] = edge_slope(
        h[n - 2],
        if n >= 3 { h[n - 3] } else { h[n - 2] },
        delta[n - 2],
        if n >= 3 { delta[n - 3] } else { delta[n - 2] },
    );
    m
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}
