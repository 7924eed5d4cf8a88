//! Precompute of the full `N^3 x N^3` weight tensor.
//!
//! Entries depend on `(zeta, xi)` only through the integer scalar triple
//! `(|k_zeta|^2, k_zeta . k_xi, |k_xi|^2)`, so the default build quadratures
//! one representative per triple and scatters the value to every pair in the
//! class; members of a class end up bitwise identical. At `N = 16` this cuts
//! the quadrature bill from 16.7M pairs to about 360k classes. The tensor is
//! still materialized in full for the convolution step: 64-bit entries make
//! `N = 16` a 134 MB table, which is the supported desk-scale ceiling.

use rayon::prelude::*;

use crate::grid::VelocityGrid;
use crate::kernels::KernelSpec;
use crate::weights::entry::{ghat_boltzmann_scalar, ghat_landau_scalar, DirectTheta, ThetaEval};
use crate::weights::theta::ThetaTable;
use crate::{Error, Result};

/// Which collision operator the tensor discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Boltzmann,
    Landau,
}

impl OperatorKind {
    pub(crate) fn tag(self) -> u32 {
        match self {
            OperatorKind::Boltzmann => 0,
            OperatorKind::Landau => 1,
        }
    }

    pub(crate) fn from_tag(tag: u32) -> Result<Self> {
        match tag {
            0 => Ok(OperatorKind::Boltzmann),
            1 => Ok(OperatorKind::Landau),
            other => Err(Error::Cache(format!("unknown operator tag {other}"))),
        }
    }
}

/// Kernel metadata carried by a weight table (and its disk cache). A
/// tabulated angular section is identified by its family tag only; the
/// interpolation data itself is not reproduced in the cache header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMeta {
    pub lambda: f64,
    pub beta: f64,
    pub family_tag: u32,
    pub family_param: f64,
}

impl From<&KernelSpec> for KernelMeta {
    fn from(k: &KernelSpec) -> Self {
        KernelMeta {
            lambda: k.lambda,
            beta: k.beta,
            family_tag: k.angular.tag(),
            family_param: k.angular.param(),
        }
    }
}

/// Precomputed convolution weights `Ghat(zeta_k, xi_m)` on a grid, stored
/// zeta-index major in the grid's lexicographic ordering.
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub(crate) n: usize,
    pub(crate) l: f64,
    pub(crate) operator: OperatorKind,
    pub(crate) kernel: KernelMeta,
    pub(crate) quad_tol: f64,
    pub(crate) values: Vec<f64>,
}

impl WeightTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn operator(&self) -> OperatorKind {
        self.operator
    }

    pub fn kernel(&self) -> KernelMeta {
        self.kernel
    }

    /// Requested quadrature tolerance recorded at build time.
    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    /// Full tensor, zeta-index major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The weight row for one output frequency.
    pub fn row(&self, zeta_idx: usize) -> &[f64] {
        let m = self.n * self.n * self.n;
        &self.values[zeta_idx * m..(zeta_idx + 1) * m]
    }

    pub fn value(&self, zeta_idx: usize, xi_idx: usize) -> f64 {
        self.values[zeta_idx * self.n.pow(3) + xi_idx]
    }

    /// Checks grid compatibility (exact on N, bit-level on L).
    pub fn matches_grid(&self, grid: &VelocityGrid) -> Result<()> {
        if self.n != grid.n() {
            return Err(Error::TableMismatch {
                field: "N",
                expected: grid.n().to_string(),
                found: self.n.to_string(),
            });
        }
        if self.l.to_bits() != grid.l().to_bits() {
            return Err(Error::TableMismatch {
                field: "L",
                expected: grid.l().to_string(),
                found: self.l.to_string(),
            });
        }
        Ok(())
    }

    /// Checks kernel/operator compatibility against run parameters.
    pub fn matches_kernel(&self, kernel: &KernelSpec, operator: OperatorKind) -> Result<()> {
        if self.operator != operator {
            return Err(Error::TableMismatch {
                field: "operator",
                expected: format!("{operator:?}"),
                found: format!("{:?}", self.operator),
            });
        }
        let meta = KernelMeta::from(kernel);
        for (field, expected, found) in [
            ("lambda", meta.lambda, self.kernel.lambda),
            ("beta", meta.beta, self.kernel.beta),
            ("angular parameter", meta.family_param, self.kernel.family_param),
        ] {
            if expected.to_bits() != found.to_bits() {
                return Err(Error::TableMismatch {
                    field,
                    expected: expected.to_string(),
                    found: found.to_string(),
                });
            }
        }
        if meta.family_tag != self.kernel.family_tag {
            return Err(Error::TableMismatch {
                field: "angular family",
                expected: meta.family_tag.to_string(),
                found: self.kernel.family_tag.to_string(),
            });
        }
        Ok(())
    }
}

/// Build controls. The symmetry reduction is on by default; switching it
/// off quadratures every pair independently, which is only sensible for the
/// self-consistency comparison at small `N`.
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub symmetry_reduction: bool,
    /// Relative tolerance of the `(r, phi)` quadratures. The inner theta
    /// integrals run at 1e-8.
    pub rel_tol: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            symmetry_reduction: true,
            rel_tol: 1e-6,
        }
    }
}

/// Aggregate record of one tensor build.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildReport {
    pub entries: usize,
    /// Unique scalar-triple classes actually quadratured.
    pub classes: usize,
    /// Entries whose quadrature missed the requested tolerance (flagged, not
    /// fatal; NaN is fatal).
    pub tolerance_misses: usize,
    pub max_error_estimate: f64,
    /// Worst deviation of the accelerated theta table against direct
    /// quadrature over the probe set (Boltzmann builds only).
    pub theta_probe_error: Option<f64>,
}

/// Builds the weight tensor with default options, discarding the report.
pub fn build_weight_table(
    grid: &VelocityGrid,
    kernel: &KernelSpec,
    operator: OperatorKind,
) -> Result<WeightTable> {
    build_weight_table_with(grid, kernel, operator, BuildOptions::default()).map(|(t, _)| t)
}

/// Builds the weight tensor; returns the table and the build report.
pub fn build_weight_table_with(
    grid: &VelocityGrid,
    kernel: &KernelSpec,
    operator: OperatorKind,
    opts: BuildOptions,
) -> Result<(WeightTable, BuildReport)> {
    let n = grid.n();
    let m = grid.len();
    let dz = grid.dzeta();

    // Integer frequency vectors and squared norms, in lexicographic order.
    let kvec: Vec<[i64; 3]> = (0..m).map(|i| grid.freq_k(i)).collect();
    let ksq: Vec<i64> = kvec.iter().map(|k| k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).collect();

    // Theta acceleration table spanning |c1|, c2 <= beta L |zeta|_max / 2
    // = beta pi (N/2) sqrt(3) / 2 (L cancels against dzeta).
    let mut report = BuildReport::default();
    let theta_table = match operator {
        OperatorKind::Boltzmann => {
            let a_max = 3.0 * ((n / 2) as f64).powi(2);
            let c_max = 0.5 * kernel.beta * grid.l() * dz * a_max.sqrt();
            let table = ThetaTable::build(&kernel.angular, c_max, 1e-8)?;
            report.theta_probe_error = Some(probe_theta_table(&table, kernel, c_max)?);
            Some(table)
        }
        OperatorKind::Landau => None,
    };

    let class_value = |a: i64, b: i64, c: i64| -> Result<(f64, f64, bool)> {
        if a == 0 {
            return Ok((0.0, 0.0, true));
        }
        let zn = dz * (a as f64).sqrt();
        let xi_par = dz * b as f64 / (a as f64).sqrt();
        let q = dz * ((c as f64 - (b as f64).powi(2) / a as f64).max(0.0)).sqrt();
        let entry = match operator {
            OperatorKind::Boltzmann => {
                let theta: &dyn ThetaEval = theta_table.as_ref().expect("built above");
                ghat_boltzmann_scalar(zn, xi_par, q, kernel, grid.l(), theta, opts.rel_tol)?
            }
            OperatorKind::Landau => {
                ghat_landau_scalar(zn, xi_par, q, kernel.lambda, grid.l(), opts.rel_tol)?
            }
        };
        if !entry.value.is_finite() {
            return Err(Error::NonFinite {
                what: "weight entry",
                step: None,
            });
        }
        Ok((entry.value, entry.error, entry.converged))
    };

    let mut values = vec![0.0f64; m * m];
    let (misses, max_err);
    if opts.symmetry_reduction {
        // Collect the packed key of every pair, dedup, quadrature one
        // representative per class, then scatter by binary search.
        let offset = ksq.iter().copied().max().unwrap_or(0);
        let pack = |a: i64, b: i64, c: i64| -> u64 {
            debug_assert!(a <= offset && c <= offset && b.abs() <= offset);
            (((a * (2 * offset + 1)) + (b + offset)) as u64) * (offset as u64 + 1) + c as u64
        };
        let mut keys: Vec<u64> = Vec::with_capacity(m * m);
        for zi in 0..m {
            let kz = kvec[zi];
            let a = ksq[zi];
            for xi in 0..m {
                let kx = kvec[xi];
                let b = kz[0] * kx[0] + kz[1] * kx[1] + kz[2] * kx[2];
                keys.push(pack(a, b, ksq[xi]));
            }
        }
        let mut classes = keys;
        classes.par_sort_unstable();
        classes.dedup();
        report.classes = classes.len();

        let unpack = |key: u64| -> (i64, i64, i64) {
            let c = (key % (offset as u64 + 1)) as i64;
            let rest = (key / (offset as u64 + 1)) as i64;
            let b = rest % (2 * offset + 1) - offset;
            let a = rest / (2 * offset + 1);
            (a, b, c)
        };
        let computed: Vec<Result<(f64, f64, bool)>> = classes
            .par_iter()
            .map(|&key| {
                let (a, b, c) = unpack(key);
                class_value(a, b, c)
            })
            .collect();
        let mut class_values = Vec::with_capacity(classes.len());
        let mut worst = 0.0f64;
        let mut missed = 0usize;
        for r in computed {
            let (v, e, ok) = r?;
            class_values.push(v);
            worst = worst.max(e);
            if !ok {
                missed += 1;
            }
        }
        values
            .par_chunks_mut(m)
            .enumerate()
            .for_each(|(zi, row)| {
                let kz = kvec[zi];
                let a = ksq[zi];
                for (xi, slot) in row.iter_mut().enumerate() {
                    let kx = kvec[xi];
                    let b = kz[0] * kx[0] + kz[1] * kx[1] + kz[2] * kx[2];
                    let key = pack(a, b, ksq[xi]);
                    let pos = classes.binary_search(&key).expect("class enumerated above");
                    *slot = class_values[pos];
                }
            });
        misses = missed;
        max_err = worst;
    } else {
        let rows: Vec<Result<(Vec<f64>, f64, usize)>> = (0..m)
            .into_par_iter()
            .map(|zi| {
                let kz = kvec[zi];
                let a = ksq[zi];
                let mut row = vec![0.0f64; m];
                let mut worst = 0.0f64;
                let mut missed = 0usize;
                for (xi, slot) in row.iter_mut().enumerate() {
                    let kx = kvec[xi];
                    let b = kz[0] * kx[0] + kz[1] * kx[1] + kz[2] * kx[2];
                    let (v, e, ok) = class_value(a, b, ksq[xi])?;
                    *slot = v;
                    worst = worst.max(e);
                    if !ok {
                        missed += 1;
                    }
                }
                Ok((row, worst, missed))
            })
            .collect();
        let mut worst = 0.0f64;
        let mut missed = 0usize;
        for (zi, r) in rows.into_iter().enumerate() {
            let (row, w, mi) = r?;
            values[zi * m..(zi + 1) * m].copy_from_slice(&row);
            worst = worst.max(w);
            missed += mi;
        }
        report.classes = m * m;
        misses = missed;
        max_err = worst;
    }

    report.entries = m * m;
    report.tolerance_misses = misses;
    report.max_error_estimate = max_err;

    Ok((
        WeightTable {
            n,
            l: grid.l(),
            operator,
            kernel: KernelMeta::from(kernel),
            quad_tol: opts.rel_tol,
            values,
        },
        report,
    ))
}

/// Compares the theta acceleration table against direct quadrature on a
/// deterministic probe set; a blowup here would silently poison the whole
/// tensor, so it fails the build.
fn probe_theta_table(table: &ThetaTable, kernel: &KernelSpec, c_max: f64) -> Result<f64> {
    let direct = DirectTheta {
        kernel,
        rel_tol: 1e-10,
    };
    let mut worst: f64 = 0.0;
    // low-discrepancy-ish coverage of [0, c_max]^2 plus the axes
    let mut probes = vec![(0.0, 0.0), (c_max, 0.0), (0.0, c_max), (c_max, c_max)];
    let mut x = 0.5f64;
    let mut y = 0.25f64;
    for _ in 0..28 {
        x = (x + 0.6180339887498949) % 1.0;
        y = (y + 0.7548776662466927) % 1.0;
        probes.push((x * c_max, y * c_max));
    }
    for (c1, c2) in probes {
        let (pt, st) = table.eval(c1, c2);
        let (pd, sd) = direct.components(c1, c2)?;
        let scale = pd.abs().max(sd.abs()).max(1.0);
        worst = worst.max(((pt - pd).abs().max((st - sd).abs())) / scale);
    }
    if worst > 1e-5 {
        return Err(Error::Invalid(format!(
            "theta acceleration table deviates from direct quadrature by {worst:.3e}"
        )));
    }
    Ok(worst)
}
