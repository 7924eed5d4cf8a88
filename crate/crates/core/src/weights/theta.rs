//! Angular integrals shared by the pointwise weight function and the
//! precomputed tensor.
//!
//! Every theta integral appearing in the weights has the shape
//!
//! ```text
//! int b(cos t) sin t [ cos(c1 (1 - cos t) - c3) J0(c2 sin t) - cos(c3) ] dt
//! ```
//!
//! which splits exactly into `cos(c3) P(c1, c2) + sin(c3) S(c1, c2)` with
//!
//! ```text
//! P = int b sin t (cos(c1 w) J0(c2 sin t) - 1) dt,   w = 1 - cos t,
//! S = int b sin t  sin(c1 w) J0(c2 sin t)      dt.
//! ```
//!
//! `P`/`S` are also the real and imaginary parts of the pointwise weight
//! function, so one code path backs both. The integrands are evaluated in a
//! cancellation-free form: `w = 2 sin^2(t/2)`, `cos(x) - 1 = -2 sin^2(x/2)`,
//! and `J0(x) - 1` by series for small arguments. For the singular grazing
//! family the interval is split at `sqrt(eps)`, where the bulk of the mass
//! sits, and both pieces are integrated adaptively on geometric partitions.

use std::f64::consts::PI;

use crate::kernels::{angular_density_unchecked, geometric_seeds, AngularFamily};
use crate::quadrature::{adaptive_lenient, adaptive_seeded, Rule};
use crate::special::{bessel_j0, bessel_j0m1};
use crate::{Error, Result};

/// `cos(x) - 1` without cancellation.
#[inline]
fn cosm1(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    -2.0 * s * s
}

/// `1 - cos(t)` without cancellation.
#[inline]
pub(crate) fn one_minus_cos(t: f64) -> f64 {
    let s = (0.5 * t).sin();
    2.0 * s * s
}

/// Cancellation-free `cos(c1 w) J0(c2 s) - 1` with `w = 1 - cos t`,
/// `s = sin t`.
#[inline]
fn p_bracket(c1: f64, c2: f64, t: f64) -> f64 {
    let w = one_minus_cos(t);
    let s = t.sin();
    cosm1(c1 * w) * bessel_j0(c2 * s) + bessel_j0m1(c2 * s)
}

#[inline]
fn s_bracket(c1: f64, c2: f64, t: f64) -> f64 {
    let w = one_minus_cos(t);
    (c1 * w).sin() * bessel_j0(c2 * t.sin())
}

/// Evaluates the split theta integral for the grazing Rutherford family:
///
/// ```text
/// int_eps^sqrt(eps) + int_sqrt(eps)^pi  of
///   (8 eps / (pi t^4)) (cos(c1 (1-cos t) - c3) J0(c2 sin t) - cos c3) dt
/// ```
///
/// Both pieces are integrated adaptively at relative tolerance 1e-8; the
/// cancellation-free bracket keeps the near-singular first piece stable, so
/// quadrature reproduces the unsplit integral well past the accuracy of the
/// leading Taylor term (see [`taylor_leading_piece`]).
pub fn inner_theta_integral(c1: f64, c2: f64, c3: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Kernel(format!(
            "grazing cutoff must satisfy 0 < eps < 1 so eps < sqrt(eps), got {eps}"
        )));
    }
    let split = eps.sqrt();
    let (cos_c3, sin_c3) = (c3.cos(), c3.sin());
    let density = move |t: f64| 8.0 * eps / (PI * t.powi(4));
    let integrand = move |t: f64| {
        density(t) * (cos_c3 * p_bracket(c1, c2, t) + sin_c3 * s_bracket(c1, c2, t))
    };

    let scale = 1.0 + c1.abs() + c2 * c2;
    let piece1 = adaptive_seeded(integrand, &geometric_seeds(eps, split), 1e-8, 1e-14 * scale);
    let piece2 = adaptive_seeded(integrand, &geometric_seeds(split, PI), 1e-8, 1e-14 * scale);
    match (piece1, piece2) {
        (Ok(a), Ok(b)) => Ok(a.value + b.value),
        (a, b) => {
            let describe = |r: &crate::Result<crate::quadrature::Quadrature>| match r {
                Ok(q) => format!("ok ({:.3e})", q.abs_error),
                Err(e) => format!("failed ({e})"),
            };
            Err(Error::Invalid(format!(
                "inner theta integral did not converge: piece [eps, sqrt(eps)] {}, \
                 piece [sqrt(eps), pi] {}",
                describe(&a),
                describe(&b)
            )))
        }
    }
}

/// Leading small-angle approximation of the first split piece,
/// `(8/pi)(1 - sqrt(eps)) (-c2^2/4 cos c3 + c1/2 sin c3)`.
///
/// This is the closed form obtained by keeping the first Taylor term of the
/// integrand on `[eps, sqrt(eps)]`. Kept for reference and testing; the
/// production path integrates the stable bracket instead, which is accurate
/// to quadrature tolerance rather than to the Taylor remainder.
pub fn taylor_leading_piece(c1: f64, c2: f64, c3: f64, eps: f64) -> f64 {
    (8.0 / PI) * (1.0 - eps.sqrt()) * (-0.25 * c2 * c2 * c3.cos() + 0.5 * c1 * c3.sin())
}

/// Component integrals `(P, S)` for one angular family at parameters
/// `(c1, c2)`, each at relative tolerance `rel_tol`.
pub(crate) fn theta_components(
    angular: &AngularFamily,
    c1: f64,
    c2: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    let floor = 1e-14 * (1.0 + c1.abs() + c2 * c2);
    let run = |bracket: &dyn Fn(f64) -> f64| -> Result<f64> {
        let integrand = |t: f64| angular_density_unchecked(angular, t) * bracket(t);
        let q = match angular {
            AngularFamily::GrazingRutherford { eps } => {
                let split = eps.sqrt();
                let a = adaptive_seeded(integrand, &geometric_seeds(*eps, split), rel_tol, floor)?;
                let b = adaptive_seeded(integrand, &geometric_seeds(split, PI), rel_tol, floor)?;
                return Ok(a.value + b.value);
            }
            AngularFamily::Tabulated(tab) => {
                let mut seeds = vec![0.0];
                seeds.extend(tab.knots().iter().copied().filter(|&t| t > 0.0 && t < PI));
                seeds.push(PI);
                adaptive_seeded(integrand, &seeds, rel_tol, floor)?
            }
            AngularFamily::IsotropicConstant(_) => {
                adaptive_seeded(integrand, &[0.0, 0.5 * PI, PI], rel_tol, floor)?
            }
        };
        Ok(q.value)
    };
    let p = run(&|t| p_bracket(c1, c2, t))?;
    let s = run(&|t| s_bracket(c1, c2, t))?;
    Ok((p, s))
}

/// Precomputed `(P, S)` surface over `(c1, c2) in [0, c_max]^2`, interpolated
/// bicubically. Collapses the innermost theta quadrature of the tensor
/// precompute to a table lookup; `P` is even and `S` odd in `c1`, which the
/// lookup uses to cover negative `c1`.
#[derive(Debug, Clone)]
pub(crate) struct ThetaTable {
    h: f64,
    /// points per axis covering [0, c_max + 2h]
    npts: usize,
    p: Vec<f64>,
    s: Vec<f64>,
}

impl ThetaTable {
    /// Builds the table for `|c1|, c2 <= c_max`. `rel_tol` is the tolerance
    /// of the per-node quadratures; the grid step is chosen so interpolation
    /// error stays below the tensor quadrature tolerance.
    pub fn build(angular: &AngularFamily, c_max: f64, rel_tol: f64) -> Result<Self> {
        use rayon::prelude::*;
        let c_max = c_max.max(1e-6);
        let h = (c_max / 512.0).min(0.02);
        let npts = (c_max / h).ceil() as usize + 3;
        let rows: Vec<Result<Vec<(f64, f64)>>> = (0..npts)
            .into_par_iter()
            .map(|i| {
                let c1 = i as f64 * h;
                (0..npts)
                    .map(|j| theta_components(angular, c1, j as f64 * h, rel_tol))
                    .collect()
            })
            .collect();
        let mut p = Vec::with_capacity(npts * npts);
        let mut s = Vec::with_capacity(npts * npts);
        for row in rows {
            for (pv, sv) in row? {
                p.push(pv);
                s.push(sv);
            }
        }
        Ok(Self { h, npts, p, s })
    }

    /// Bicubic (Catmull-Rom) interpolation of `(P, S)`; `c1` may be negative,
    /// `c2` must be non-negative and within the built range.
    #[inline]
    pub fn eval(&self, c1: f64, c2: f64) -> (f64, f64) {
        let sign = if c1 < 0.0 { -1.0 } else { 1.0 };
        let x = c1.abs() / self.h;
        let y = c2 / self.h;
        let ix = (x as usize).min(self.npts - 3);
        let iy = (y as usize).min(self.npts - 3);
        let tx = x - ix as f64;
        let ty = y - iy as f64;
        let wx = catmull_rom(tx);
        let wy = catmull_rom(ty);

        let mut pv = 0.0;
        let mut sv = 0.0;
        for (a, &wa) in wx.iter().enumerate() {
            // reflect across c1 = 0: P even, S odd
            let raw = ix as isize + a as isize - 1;
            let (row, s_parity) = if raw < 0 {
                ((-raw) as usize, -1.0)
            } else {
                (raw as usize, 1.0)
            };
            let base = row * self.npts;
            let mut prow = 0.0;
            let mut srow = 0.0;
            for (b, &wb) in wy.iter().enumerate() {
                let raw_col = iy as isize + b as isize - 1;
                // reflect across c2 = 0: both even in c2
                let col = if raw_col < 0 {
                    (-raw_col) as usize
                } else {
                    raw_col as usize
                };
                prow += wb * self.p[base + col];
                srow += wb * self.s[base + col];
            }
            pv += wa * prow;
            sv += wa * s_parity * srow;
        }
        (pv, sign * sv)
    }
}

#[inline]
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        -0.5 * t3 + t2 - 0.5 * t,
        1.5 * t3 - 2.5 * t2 + 1.0,
        -1.5 * t3 + 2.0 * t2 + 0.5 * t,
        0.5 * t3 - 0.5 * t2,
    ]
}

/// High-accuracy unsplit quadrature of the grazing theta integral over
/// `[eps, pi]`, used as the independent oracle for the split rule. GK31 on a
/// geometric partition with a 1e-12 relative target.
pub fn unsplit_theta_oracle(c1: f64, c2: f64, c3: f64, eps: f64) -> Result<f64> {
    let (cos_c3, sin_c3) = (c3.cos(), c3.sin());
    let integrand = move |t: f64| {
        (8.0 * eps / (PI * t.powi(4)))
            * (cos_c3 * p_bracket(c1, c2, t) + sin_c3 * s_bracket(c1, c2, t))
    };
    let mut seeds = geometric_seeds(eps, PI);
    // extra resolution around sqrt(eps), where the two regimes meet
    seeds.push(eps.sqrt());
    seeds.sort_by(f64::total_cmp);
    seeds.dedup();
    let scale = 1.0 + c1.abs() + c2 * c2;
    let (q, _) = adaptive_lenient(
        integrand,
        &seeds,
        1e-12,
        1e-15 * scale,
        Rule::GaussKronrod31,
        16 * 1024,
    )?;
    Ok(q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vanishes_when_c1_c2_zero() {
        // both integrands vanish identically: cos(-c3) - cos(c3) = 0
        for &c3 in &[0.0, 0.7, -2.0, 3.1] {
            let v = inner_theta_integral(0.0, 0.0, c3, 1e-2).unwrap();
            assert!(v.abs() < 1e-14, "got {v}");
        }
    }

    #[test]
    fn matches_unsplit_oracle_values() {
        // Frozen from an mpmath quadrature of the unsplit integrand.
        let cases = [
            (1.0, 1.0, 0.0, 1e-2, -0.63469804412650967),
            (2.0, 0.0, PI / 2.0, 1e-2, 2.5241143816892928),
            (4.0, 3.0, 1.5, 1e-2, 4.5361540818529388),
            (0.5, 2.5, -2.0, 1e-2, 1.0666293221841855),
            (3.0, 4.0, 5.0, 1e-2, -6.3558181470716935),
            (1.0, 1.0, 0.0, 1e-4, -0.63660062073402792),
        ];
        for (c1, c2, c3, eps, expected) in cases {
            let v = inner_theta_integral(c1, c2, c3, eps).unwrap();
            assert!(
                (v - expected).abs() <= 1e-6 * expected.abs().max(1.0),
                "({c1},{c2},{c3},{eps}): {v} vs {expected}"
            );
            let o = unsplit_theta_oracle(c1, c2, c3, eps).unwrap();
            assert!((o - expected).abs() <= 1e-8 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn taylor_piece_example() {
        // (8/pi)(1 - sqrt(1e-4)) * (c1/2) sin(pi/2) with c1 = 2
        assert_relative_eq!(
            taylor_leading_piece(2.0, 0.0, PI / 2.0, 1e-4),
            2.5210142985756221,
            max_relative = 1e-14
        );
    }

    #[test]
    fn rejects_eps_out_of_range() {
        assert!(inner_theta_integral(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(inner_theta_integral(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn components_recompose_the_integral() {
        let angular = AngularFamily::GrazingRutherford { eps: 1e-3 };
        let (p, s) = theta_components(&angular, 2.5, 1.5, 1e-9).unwrap();
        for &c3 in &[0.0, 1.0, -1.3] {
            let direct = inner_theta_integral(2.5, 1.5, c3, 1e-3).unwrap();
            assert_relative_eq!(
                c3.cos() * p + c3.sin() * s,
                direct,
                max_relative = 1e-6,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn theta_table_matches_direct_components() {
        let angular = AngularFamily::GrazingRutherford { eps: 1e-2 };
        let table = ThetaTable::build(&angular, 8.0, 1e-8).unwrap();
        let probes = [
            (0.0, 0.0),
            (0.013, 3.71),
            (4.99, 0.02),
            (-3.3, 2.2),
            (7.9, 7.9),
            (-0.01, 0.005),
        ];
        for (c1, c2) in probes {
            let (pt, st) = table.eval(c1, c2);
            let (pd, sd) = theta_components(&angular, c1, c2, 1e-10).unwrap();
            let scale = pd.abs().max(sd.abs()).max(1e-3);
            assert!(
                (pt - pd).abs() <= 2e-6 * scale && (st - sd).abs() <= 2e-6 * scale,
                "({c1},{c2}): table ({pt},{st}) vs direct ({pd},{sd})"
            );
        }
    }

    #[test]
    fn theta_table_isotropic_accuracy() {
        let angular = AngularFamily::IsotropicConstant(1.0 / (4.0 * PI));
        let table = ThetaTable::build(&angular, 6.0, 1e-8).unwrap();
        for (c1, c2) in [(1.234, 4.56), (-5.5, 0.1), (0.35, 0.35)] {
            let (pt, st) = table.eval(c1, c2);
            let (pd, sd) = theta_components(&angular, c1, c2, 1e-10).unwrap();
            let scale: f64 = pd.abs().max(sd.abs()).max(1e-3);
            assert!(
                (pt - pd).abs() <= 2e-6 * scale && (st - sd).abs() <= 2e-6 * scale,
                "({c1},{c2}): table ({pt},{st}) vs direct ({pd},{sd})"
            );
        }
    }
}
