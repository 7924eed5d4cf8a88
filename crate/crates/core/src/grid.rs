//! Truncated velocity cube and the uniform velocity/Fourier meshes.
//!
//! The computational domain is the cube `[-L, L]^3`. Velocity nodes per axis
//! are `v_j = -L + j dv`, `j = 0..N-1`, with `dv = 2L/N`; frequency nodes are
//! `zeta_k = k dzeta`, `k = -N/2..N/2-1`, with `dzeta = pi/L`. Both node sets
//! are stored in lexicographic order over the axis triples, frequency axes in
//! increasing `k`. This ordering is the contract for the weight-cache and
//! state-dump file formats.

use crate::{Error, Result};

/// Number of spatial dimensions. The Bessel reduction used by the weight
/// precompute is specific to three dimensions.
pub const DIM: usize = 3;

/// Uniform velocity/Fourier mesh over the cube `[-L, L]^3`.
///
/// Immutable after construction; share by reference across threads.
#[derive(Debug, Clone)]
pub struct VelocityGrid {
    n: usize,
    l: f64,
    dv: f64,
    dzeta: f64,
    axis_v: Vec<f64>,
    axis_zeta: Vec<f64>,
    axis_weight: Vec<f64>,
}

impl VelocityGrid {
    /// Builds the grid with `n` points per axis over `[-l, l]^3`.
    ///
    /// `n` must be even (the frequency set is the symmetric half-open range
    /// `-N/2..N/2`) and at least 4; `l` must be positive.
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::Grid(format!(
                "N must be even and >= 4, got {n}"
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Grid(format!("L must be positive, got {l}")));
        }
        let dv = 2.0 * l / n as f64;
        let dzeta = std::f64::consts::PI / l;
        let axis_v = (0..n).map(|j| -l + j as f64 * dv).collect();
        let axis_zeta = (0..n)
            .map(|j| (j as i64 - (n / 2) as i64) as f64 * dzeta)
            .collect();
        let mut axis_weight = vec![dv; n];
        axis_weight[0] = 0.5 * dv;
        axis_weight[n - 1] = 0.5 * dv;
        Ok(Self {
            n,
            l,
            dv,
            dzeta,
            axis_v,
            axis_zeta,
            axis_weight,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Velocity mesh step `2L/N`.
    pub fn dv(&self) -> f64 {
        self.dv
    }

    /// Fourier mesh step `pi/L`.
    pub fn dzeta(&self) -> f64 {
        self.dzeta
    }

    /// Total number of nodes `N^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Velocity nodes along one axis (identical for all axes).
    pub fn axis_velocities(&self) -> &[f64] {
        &self.axis_v
    }

    /// Frequency nodes along one axis, increasing in `k`.
    pub fn axis_frequencies(&self) -> &[f64] {
        &self.axis_zeta
    }

    /// One-dimensional trapezoid weights (`dv`, halved at the two ends).
    pub fn axis_weights(&self) -> &[f64] {
        &self.axis_weight
    }

    /// Lexicographic linear index of an axis triple.
    #[inline]
    pub fn index_of(&self, m: [usize; 3]) -> usize {
        debug_assert!(m.iter().all(|&i| i < self.n));
        (m[0] * self.n + m[1]) * self.n + m[2]
    }

    /// Axis triple of a linear index.
    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        debug_assert!(idx < self.len());
        let i2 = idx % self.n;
        let r = idx / self.n;
        [r / self.n, r % self.n, i2]
    }

    /// Velocity vector at a linear index.
    #[inline]
    pub fn velocity(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        [self.axis_v[m[0]], self.axis_v[m[1]], self.axis_v[m[2]]]
    }

    /// Frequency vector `zeta_k` at a linear index.
    ///
    /// Index 0 carries `k = (-N/2, -N/2, -N/2)`, index `N^3 - 1` carries
    /// `k = (N/2-1, N/2-1, N/2-1)`.
    pub fn frequency_of_index(&self, idx: usize) -> Result<[f64; 3]> {
        if idx >= self.len() {
            return Err(Error::Grid(format!(
                "index {idx} out of range for N^3 = {}",
                self.len()
            )));
        }
        let m = self.multi_index(idx);
        Ok([
            self.axis_zeta[m[0]],
            self.axis_zeta[m[1]],
            self.axis_zeta[m[2]],
        ])
    }

    /// Integer frequency triple `k` at a linear index.
    #[inline]
    pub fn freq_k(&self, idx: usize) -> [i64; 3] {
        let m = self.multi_index(idx);
        let half = (self.n / 2) as i64;
        [
            m[0] as i64 - half,
            m[1] as i64 - half,
            m[2] as i64 - half,
        ]
    }

    /// Linear index of an integer frequency triple, if it lies on the grid.
    pub fn index_of_freq_k(&self, k: [i64; 3]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut m = [0usize; 3];
        for a in 0..3 {
            let s = k[a] + half;
            if s < 0 || s >= self.n as i64 {
                return None;
            }
            m[a] = s as usize;
        }
        Some(self.index_of(m))
    }

    /// Trapezoid quadrature weight of a velocity node (volume units).
    #[inline]
    pub fn quad_weight(&self, idx: usize) -> f64 {
        let m = self.multi_index(idx);
        self.axis_weight[m[0]] * self.axis_weight[m[1]] * self.axis_weight[m[2]]
    }

    /// All velocity-node trapezoid weights in lexicographic order.
    pub fn quad_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.len());
        for &w0 in &self.axis_weight {
            for &w1 in &self.axis_weight {
                for &w2 in &self.axis_weight {
                    w.push(w0 * w1 * w2);
                }
            }
        }
        w
    }

    /// Trapezoid weight of a frequency node, mirroring the velocity-space
    /// rule: `dzeta` per axis, halved at `k = -N/2` and `k = N/2 - 1`.
    #[inline]
    pub fn freq_quad_weight(&self, idx: usize) -> f64 {
        let m = self.multi_index(idx);
        let mut w = 1.0;
        for &mi in &m {
            w *= if mi == 0 || mi == self.n - 1 {
                0.5 * self.dzeta
            } else {
                self.dzeta
            };
        }
        w
    }

    /// All frequency-node trapezoid weights in lexicographic order.
    pub fn freq_quad_weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.freq_quad_weight(i)).collect()
    }
}
