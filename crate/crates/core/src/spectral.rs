//! Forward/inverse transforms with fixed conventions, and the weighted
//! convolution that evaluates the collision operator in Fourier space.
//!
//! The forward map is the trapezoid quadrature of the continuous transform
//! `(2 pi)^{-3/2} int f e^{-i zeta . v} dv` over the cube:
//!
//! ```text
//! fhat(zeta_k) = (2 pi)^{-3/2} sum_j w_j f(v_j) e^{-i zeta_k . v_j}
//! ```
//!
//! accelerated by the FFT with explicit `(-1)^j` / `(-1)^k` phases that
//! absorb the grid offset `v_0 = -L` and the frequency offset `k_0 = -N/2`
//! (`dzeta dv = 2 pi / N` and `dzeta L = pi` make both phases real). This is
//! a plain quadrature of the transform; nothing is periodized. The inverse
//! is the exact algebraic inverse of the forward map, so `fhat(0)` carries
//! the discrete mass identically and a zero weight row at `zeta = 0` makes
//! the convolution output conserve mass to roundoff.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::VelocityGrid;
use crate::weights::WeightTable;
use crate::{Error, Result};

/// FFT plans and phase/weight tables for one grid.
pub struct Transform {
    n: usize,
    norm: f64,
    /// `(-1)^{N/2}`, the constant phase from `dzeta L = pi` per axis (cubed
    /// it stays `(-1)^{N/2}`).
    sign: f64,
    weights: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transform {
    pub fn new(grid: &VelocityGrid) -> Self {
        let mut planner = FftPlanner::new();
        Transform {
            n: grid.n(),
            norm: (2.0 * std::f64::consts::PI).powf(-1.5),
            sign: if (grid.n() / 2) % 2 == 0 { 1.0 } else { -1.0 },
            weights: grid.quad_weights(),
            forward: planner.plan_fft_forward(grid.n()),
            inverse: planner.plan_fft_inverse(grid.n()),
        }
    }

    /// Transform of real node values into the lexicographically ordered
    /// frequency array.
    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.weights.len(), "state/grid size mismatch");
        let n = self.n;
        let mut data: Vec<Complex64> = (0..f.len())
            .map(|idx| {
                let s = if parity(idx, n) { -1.0 } else { 1.0 };
                Complex64::new(s * self.weights[idx] * f[idx], 0.0)
            })
            .collect();
        fft3(&mut data, n, &self.forward);
        for (idx, v) in data.iter_mut().enumerate() {
            let s = if parity(idx, n) { -self.sign } else { self.sign };
            *v *= s * self.norm;
        }
        data
    }

    /// Exact inverse of [`Transform::forward`] on frequency data. The
    /// imaginary residue must stay below `1e-8 * max |re|`; exceeding it
    /// signals an inconsistent weight table or transform convention.
    pub fn inverse(&self, fhat: &[Complex64]) -> Result<Vec<f64>> {
        let (values, residual, scale) = self.inverse_with_residual(fhat);
        let bound = 1e-8 * scale;
        if residual > bound {
            return Err(Error::ImaginaryResidue { residual, bound });
        }
        Ok(values)
    }

    /// Inverse transform returning `(real part, max |imag|, max |real|)`.
    pub fn inverse_with_residual(&self, fhat: &[Complex64]) -> (Vec<f64>, f64, f64) {
        assert_eq!(fhat.len(), self.weights.len(), "state/grid size mismatch");
        let n = self.n;
        let mut data: Vec<Complex64> = (0..fhat.len())
            .map(|idx| {
                let s = if parity(idx, n) { -self.sign } else { self.sign };
                fhat[idx] * (s / self.norm)
            })
            .collect();
        fft3(&mut data, n, &self.inverse);
        let inv_n3 = 1.0 / (fhat.len() as f64);
        let mut max_im = 0.0f64;
        let mut max_re = 0.0f64;
        let values = data
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let s = if parity(idx, n) { -1.0 } else { 1.0 };
                let z = v * (s * inv_n3 / self.weights[idx]);
                max_im = max_im.max(z.im.abs());
                max_re = max_re.max(z.re.abs());
                z.re
            })
            .collect();
        (values, max_im, max_re)
    }
}

/// Parity of the index-triple sum, i.e. `(-1)^{j1+j2+j3}` as a boolean.
#[inline]
fn parity(idx: usize, n: usize) -> bool {
    let i2 = idx % n;
    let r = idx / n;
    (i2 + r % n + r / n) % 2 == 1
}

/// In-place 3-D FFT of a cube: transform the contiguous axis, rotate the
/// cube so the next axis becomes contiguous, three times over.
fn fft3(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![Complex64::default(); data.len()];
    for _ in 0..3 {
        plan.process(data);
        // (i0, i1, i2) -> (i1, i2, i0)
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    scratch[(i1 * n + i2) * n + i0] = data[(i0 * n + i1) * n + i2];
                }
            }
        }
        data.copy_from_slice(&scratch);
    }
}

/// Distribution values paired with their transform under the fixed
/// convention; `dirty` tracks whether `fhat` matches `f`.
pub struct SpectralState {
    f: Vec<f64>,
    fhat: Vec<Complex64>,
    dirty: bool,
}

impl SpectralState {
    pub fn new(f: Vec<f64>, grid: &VelocityGrid) -> Result<Self> {
        if f.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "state has {} values, grid has {} nodes",
                f.len(),
                grid.len()
            )));
        }
        Ok(SpectralState {
            f,
            fhat: Vec::new(),
            dirty: true,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn set_values(&mut self, f: Vec<f64>) {
        self.f = f;
        self.dirty = true;
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    /// Recomputes `fhat` from the current values.
    pub fn refresh(&mut self, transform: &Transform) {
        self.fhat = transform.forward(&self.f);
        self.dirty = false;
    }

    /// Transform data; panics if stale.
    pub fn fhat(&self) -> &[Complex64] {
        assert!(!self.dirty, "fhat is stale; call refresh() first");
        &self.fhat
    }
}

/// Weighted convolution in Fourier space:
///
/// ```text
/// Qhat(zeta_k) = sum_m  Ghat(zeta_k, xi_m) fhat(xi_m) fhat(zeta_k - xi_m) w_m
/// ```
///
/// with frequency-space trapezoid weights `w_m` and `fhat(zeta_k - xi_m) = 0`
/// whenever the shifted frequency leaves the domain (the distribution is not
/// periodized, so there is no wraparound). Full `O(N^6)` cost; rows are
/// independent and evaluated in parallel.
pub fn collide(
    fhat: &[Complex64],
    table: &WeightTable,
    grid: &VelocityGrid,
) -> Result<Vec<Complex64>> {
    table.matches_grid(grid)?;
    if fhat.len() != grid.len() {
        return Err(Error::Invalid(format!(
            "fhat has {} entries, grid has {} nodes",
            fhat.len(),
            grid.len()
        )));
    }
    let n = grid.n() as i64;
    let wf = grid.freq_quad_weights();
    // weighted transform values, so the inner loop is one complex product
    let fw: Vec<Complex64> = fhat.iter().zip(&wf).map(|(v, w)| v * *w).collect();

    let mut qhat = vec![Complex64::default(); fhat.len()];
    qhat.par_iter_mut().enumerate().for_each(|(k_idx, out)| {
        let row = table.row(k_idx);
        let k = grid.freq_k(k_idx);
        let mut acc = Complex64::default();
        // m ranges over storage indices (frequency m - N/2); the shifted
        // frequency k - (m - N/2) lands at storage index k - m + N, on the
        // grid exactly for m in [k + 1, k + N] intersected with [0, N - 1]
        let lo = |kc: i64| (kc + 1).max(0);
        let hi = |kc: i64| (kc + n).min(n - 1);
        for m0 in lo(k[0])..=hi(k[0]) {
            let s0 = k[0] - m0 + n;
            for m1 in lo(k[1])..=hi(k[1]) {
                let s1 = k[1] - m1 + n;
                let m_base = ((m0 * n + m1) * n) as usize;
                let s_base = ((s0 * n + s1) * n) as usize;
                for m2 in lo(k[2])..=hi(k[2]) {
                    let s2 = (k[2] - m2 + n) as usize;
                    let m_idx = m_base + m2 as usize;
                    acc += row[m_idx] * fw[m_idx] * fhat[s_base + s2];
                }
            }
        }
        *out = acc;
    });
    Ok(qhat)
}
