//! Moments, entropy, equilibrium construction, initial conditions, and
//! slice extraction.

use crate::grid::VelocityGrid;
use crate::{Error, Result};

/// Discrete trapezoid moments of a state, plus the entropy diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct MomentSet {
    /// Mass `sum w f`.
    pub rho: f64,
    /// Momentum `sum w v f`.
    pub momentum: [f64; 3],
    /// Bulk velocity (zero for degenerate states).
    pub velocity: [f64; 3],
    /// Energy moment `sum w |v|^2 f`.
    pub energy: f64,
    /// Temperature `sum w |v - V|^2 f / (3 rho)`; NaN when degenerate.
    pub temperature: f64,
    /// Smallest node value; spectral methods admit small negatives.
    pub min_f: f64,
    /// Entropy `sum w f log f` over nodes with `f > 0`.
    pub entropy: f64,
    /// Fraction of `sum w |f|` carried by skipped (`f <= 0`) nodes.
    pub entropy_skipped_fraction: f64,
    /// Set when `rho <= 0`, making velocity/temperature meaningless.
    pub degenerate: bool,
}

/// Computes the discrete moments of a state. Linear in `f` by construction,
/// except the entropy diagnostic.
pub fn moments(f: &[f64], grid: &VelocityGrid) -> MomentSet {
    assert_eq!(f.len(), grid.len(), "state/grid size mismatch");
    let mut rho = 0.0;
    let mut momentum = [0.0f64; 3];
    let mut energy = 0.0;
    let mut min_f = f64::INFINITY;
    let mut entropy = 0.0;
    let mut skipped = 0.0;
    let mut total_abs = 0.0;
    for idx in 0..f.len() {
        let w = grid.quad_weight(idx);
        let v = grid.velocity(idx);
        let fi = f[idx];
        rho += w * fi;
        for a in 0..3 {
            momentum[a] += w * v[a] * fi;
        }
        energy += w * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * fi;
        min_f = min_f.min(fi);
        total_abs += w * fi.abs();
        if fi > 0.0 {
            entropy += w * fi * fi.ln();
        } else {
            skipped += w * fi.abs();
        }
    }
    let degenerate = !(rho > 0.0);
    let velocity = if degenerate {
        [0.0; 3]
    } else {
        [momentum[0] / rho, momentum[1] / rho, momentum[2] / rho]
    };
    let temperature = if degenerate {
        f64::NAN
    } else {
        let vsq = velocity[0] * velocity[0] + velocity[1] * velocity[1] + velocity[2] * velocity[2];
        (energy - rho * vsq) / (3.0 * rho)
    };
    MomentSet {
        rho,
        momentum,
        velocity,
        energy,
        temperature,
        min_f,
        entropy,
        entropy_skipped_fraction: if total_abs > 0.0 {
            skipped / total_abs
        } else {
            0.0
        },
        degenerate,
    }
}

/// Maxwellian `rho (2 pi T)^{-3/2} exp(-|v - V|^2 / (2 T))` sampled at the
/// grid nodes.
pub fn maxwellian(rho: f64, velocity: [f64; 3], temperature: f64, grid: &VelocityGrid) -> Result<Vec<f64>> {
    if !(rho > 0.0) || !(temperature > 0.0) {
        return Err(Error::Invalid(format!(
            "maxwellian needs positive rho and T, got rho = {rho}, T = {temperature}"
        )));
    }
    let norm = rho * (2.0 * std::f64::consts::PI * temperature).powf(-1.5);
    Ok((0..grid.len())
        .map(|idx| {
            let v = grid.velocity(idx);
            let d2 = (v[0] - velocity[0]).powi(2)
                + (v[1] - velocity[1]).powi(2)
                + (v[2] - velocity[2]).powi(2);
            norm * (-0.5 * d2 / temperature).exp()
        })
        .collect())
}

/// The Maxwellian sharing a state's discrete mass, bulk velocity, and
/// temperature; the relaxation target of the collision dynamics.
pub fn moment_matched_maxwellian(f: &[f64], grid: &VelocityGrid) -> Result<Vec<f64>> {
    let m = moments(f, grid);
    if m.degenerate || !(m.temperature > 0.0) {
        return Err(Error::Invalid(
            "state has no positive mass/temperature to match".into(),
        ));
    }
    maxwellian(m.rho, m.velocity, m.temperature, grid)
}

/// Axially symmetric shell `0.01 exp(-10 ((|v| - 1.5) / 1.5)^2)`.
pub fn shell_ic(grid: &VelocityGrid) -> Vec<f64> {
    (0..grid.len())
        .map(|idx| {
            let v = grid.velocity(idx);
            let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let s = (speed - 1.5) / 1.5;
            0.01 * (-10.0 * s * s).exp()
        })
        .collect()
}

/// 1-D profile along `axis` through the transverse node indices `fixed`
/// (in axis order, skipping `axis`). Returns `(v, f)` rows.
pub fn slice(
    f: &[f64],
    grid: &VelocityGrid,
    axis: usize,
    fixed: [usize; 2],
) -> Result<Vec<(f64, f64)>> {
    if axis >= 3 {
        return Err(Error::Invalid(format!("axis must be 0..3, got {axis}")));
    }
    if fixed.iter().any(|&i| i >= grid.n()) {
        return Err(Error::Invalid(format!(
            "fixed indices {fixed:?} out of range for N = {}",
            grid.n()
        )));
    }
    assert_eq!(f.len(), grid.len(), "state/grid size mismatch");
    let vs = grid.axis_velocities();
    Ok((0..grid.n())
        .map(|j| {
            let mut m = [0usize; 3];
            m[axis] = j;
            let mut it = fixed.iter();
            for a in 0..3 {
                if a != axis {
                    m[a] = *it.next().unwrap();
                }
            }
            (vs[j], f[grid.index_of(m)])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn maxwellian_peak_and_scaling() {
        let grid = VelocityGrid::new(16, 5.0).unwrap();
        let f = maxwellian(1.0, [0.0; 3], 1.0, &grid).unwrap();
        let center = grid.index_of([8, 8, 8]);
        // node (8,8,8) sits exactly at v = 0
        assert_relative_eq!(
            f[center],
            (2.0 * std::f64::consts::PI).powf(-1.5),
            max_relative = 1e-14
        );
        let f2 = maxwellian(2.0, [0.0; 3], 1.0, &grid).unwrap();
        for (a, b) in f.iter().zip(&f2) {
            assert_relative_eq!(2.0 * a, *b, max_relative = 1e-14);
        }
        assert!(maxwellian(0.0, [0.0; 3], 1.0, &grid).is_err());
        assert!(maxwellian(1.0, [0.0; 3], -1.0, &grid).is_err());
    }

    #[test]
    fn maxwellian_moments_roundtrip() {
        // The half-open node set [-L, L - dv] biases the discrete moments:
        // at N = 16, L = 5, T = 1 the measured values are rho - 1 = -3.0e-5,
        // V_x = -4.0e-5, T - 1 = -1.9e-4 (verified against a 1-D numpy sum
        // of the same trapezoid rule). Bounds are frozen just above that.
        let grid = VelocityGrid::new(16, 5.0).unwrap();
        let f = maxwellian(1.0, [0.0; 3], 1.0, &grid).unwrap();
        let m = moments(&f, &grid);
        assert_relative_eq!(m.rho, 1.0, max_relative = 5e-5);
        for a in 0..3 {
            assert!(m.momentum[a].abs() <= 1e-4);
        }
        assert_relative_eq!(m.temperature, 1.0, max_relative = 5e-4);
        assert!(!m.degenerate);
        assert!(m.min_f > 0.0);
        assert_eq!(m.entropy_skipped_fraction, 0.0);
    }

    #[test]
    fn zero_state_is_degenerate() {
        let grid = VelocityGrid::new(8, 5.0).unwrap();
        let m = moments(&vec![0.0; grid.len()], &grid);
        assert_eq!(m.rho, 0.0);
        assert!(m.degenerate);
        assert!(m.temperature.is_nan());
    }

    #[test]
    fn moments_are_linear() {
        let grid = VelocityGrid::new(8, 5.0).unwrap();
        let f = shell_ic(&grid);
        let scaled: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        let a = moments(&f, &grid);
        let b = moments(&scaled, &grid);
        // alpha = 2 is exact in floating point
        assert_eq!(2.0 * a.rho, b.rho);
        assert_eq!(2.0 * a.energy, b.energy);
    }

    #[test]
    fn shell_ic_values_and_symmetry() {
        let grid = VelocityGrid::new(16, 5.0).unwrap();
        let f = shell_ic(&grid);
        // v = 0 node: 0.01 exp(-10)
        let center = grid.index_of([8, 8, 8]);
        assert_relative_eq!(f[center], 0.01 * (-10.0f64).exp(), max_relative = 1e-13);
        // equal-|v| nodes share values
        let a = grid.index_of([8 + 3, 8, 8]);
        let b = grid.index_of([8, 8, 8 + 3]);
        assert_eq!(f[a], f[b]);
        // |v| = 1.5 is off-grid at this N; pin the peak through a grid where
        // it is a node: N = 4, L = 3 has v = 1.5 on-axis
        let g = VelocityGrid::new(4, 3.0).unwrap();
        let fs = shell_ic(&g);
        let peak = g.index_of([3, 2, 2]); // v = (1.5, 0, 0)
        assert_relative_eq!(fs[peak], 0.01, max_relative = 1e-14);
    }

    #[test]
    fn shell_mass_matches_radial_quadrature() {
        // 0.01 * 4 pi int r^2 exp(-10((r-1.5)/1.5)^2) dr = 0.249601890323282
        // (frozen from an mpmath radial quadrature); the discrete trapezoid
        // mass at N = 16 resolves the shell to a few parts in 1e3.
        let grid = VelocityGrid::new(16, 5.0).unwrap();
        let m = moments(&shell_ic(&grid), &grid);
        assert_relative_eq!(m.rho, 0.249601890323282, max_relative = 1e-2);
    }

    #[test]
    fn entropy_skips_nonpositive_nodes() {
        let grid = VelocityGrid::new(4, 2.0).unwrap();
        let mut f = vec![1.0; grid.len()];
        f[0] = -0.5;
        f[1] = 0.0;
        let m = moments(&f, &grid);
        assert!(m.entropy_skipped_fraction > 0.0);
        assert!(m.entropy.is_finite());
        assert_eq!(m.min_f, -0.5);
    }

    #[test]
    fn slice_matches_direct_lookup() {
        let grid = VelocityGrid::new(8, 4.0).unwrap();
        let f = maxwellian(1.0, [0.4, 0.0, 0.0], 1.0, &grid).unwrap();
        let rows = slice(&f, &grid, 0, [4, 4]).unwrap();
        assert_eq!(rows.len(), 8);
        for (j, (v, val)) in rows.iter().enumerate() {
            assert_eq!(*v, grid.axis_velocities()[j]);
            assert_eq!(*val, f[grid.index_of([j, 4, 4])]);
        }
        // maxwellian slice through the center peaks at the node nearest V
        let peak = rows
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .unwrap()
            .0;
        assert_eq!(rows[peak].0, 0.0);
        assert!(slice(&f, &grid, 3, [0, 0]).is_err());
        assert!(slice(&f, &grid, 0, [8, 0]).is_err());
    }

    #[test]
    fn shell_slice_has_two_peaks() {
        let grid = VelocityGrid::new(16, 5.0).unwrap();
        let f = shell_ic(&grid);
        let rows = slice(&f, &grid, 2, [8, 8]).unwrap();
        // local maxima near v = -1.5 and v = +1.5
        let vals: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let peaks: Vec<usize> = (1..vals.len() - 1)
            .filter(|&i| vals[i] > vals[i - 1] && vals[i] > vals[i + 1])
            .collect();
        assert_eq!(peaks.len(), 2, "peaks at {peaks:?}");
        assert!(rows[peaks[0]].0 < 0.0 && rows[peaks[1]].0 > 0.0);
        assert!((rows[peaks[0]].0.abs() - 1.5).abs() < grid.dv());
        assert!((rows[peaks[1]].0 - 1.5).abs() < grid.dv());
    }
}
