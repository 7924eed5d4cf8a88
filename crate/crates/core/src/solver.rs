//! Time integration of the semi-discrete conservative system
//! `df/dt = (1/Kn) P_N Qtilde(f)`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::conservation::ConservationProjector;
use crate::diagnostics::{moments, MomentSet};
use crate::grid::VelocityGrid;
use crate::spectral::{collide, Transform};
use crate::weights::WeightTable;
use crate::{Error, Result};

/// Explicit schemes for the collision step. Forward Euler is the default;
/// the midpoint rule reuses the same projected right-hand side, which
/// commutes with the scheme stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ForwardEuler,
    Rk2,
}

/// Run controls for [`Solver::run`].
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Knudsen number scaling the collision term. The collision-time
    /// normalization is `Kn = 1`.
    pub kn: f64,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Steps between diagnostic records (the initial state and the final
    /// step always emit one).
    pub output_every: usize,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kn > 0.0) {
            return Err(Error::Invalid(format!("Kn must be positive, got {}", self.kn)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) {
            return Err(Error::Invalid(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if self.output_every == 0 {
            return Err(Error::Invalid("output_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-step diagnostics of the spectral mass identity.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// `|Qhat(0)|` straight out of the convolution (zero by the weight-row
    /// invariant).
    pub qhat_zero: f64,
    /// Trapezoid mass of the raw collision output before projection,
    /// relative to its weighted l1 norm.
    pub raw_mass_rel: f64,
}

/// One diagnostic record of a run.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticRecord {
    pub step: usize,
    pub t: f64,
    pub moments: MomentSet,
    pub step_info: StepInfo,
}

/// Collision-step driver binding a grid, weight table, and projector.
pub struct Solver<'a> {
    grid: &'a VelocityGrid,
    table: &'a WeightTable,
    projector: &'a ConservationProjector,
    transform: Transform,
    kn: f64,
}

impl<'a> Solver<'a> {
    pub fn new(
        grid: &'a VelocityGrid,
        table: &'a WeightTable,
        projector: &'a ConservationProjector,
        kn: f64,
    ) -> Result<Self> {
        table.matches_grid(grid)?;
        if projector.len() != grid.len() {
            return Err(Error::Invalid(
                "projector was built for a different grid".into(),
            ));
        }
        if !(kn > 0.0) {
            return Err(Error::Invalid(format!("Kn must be positive, got {kn}")));
        }
        Ok(Solver {
            grid,
            table,
            projector,
            transform: Transform::new(grid),
            kn,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        self.grid
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// Projected collision right-hand side `(1/Kn) P_N Qtilde(f)`.
    pub fn rhs(&self, f: &[f64]) -> Result<(Vec<f64>, StepInfo)> {
        let fhat = self.transform.forward(f);
        let qhat = collide(&fhat, self.table, self.grid)?;
        let zero_idx = self
            .grid
            .index_of_freq_k([0, 0, 0])
            .expect("zero frequency exists for even N");
        let qhat_zero = qhat[zero_idx].norm();
        let mut q = self.transform.inverse(&qhat)?;

        let mut raw_mass = 0.0;
        let mut l1 = 0.0;
        for (idx, v) in q.iter().enumerate() {
            let w = self.grid.quad_weight(idx);
            raw_mass += w * v;
            l1 += w * v.abs();
        }

        self.projector.project_in_place(&mut q);
        if self.kn != 1.0 {
            let inv = 1.0 / self.kn;
            for v in &mut q {
                *v *= inv;
            }
        }
        Ok((
            q,
            StepInfo {
                qhat_zero,
                raw_mass_rel: if l1 > 0.0 { raw_mass.abs() / l1 } else { 0.0 },
            },
        ))
    }

    /// Advances `f` by one step of the chosen scheme; `dt = 0` leaves the
    /// state unchanged.
    pub fn step(&self, f: &mut Vec<f64>, dt: f64, scheme: Scheme) -> Result<StepInfo> {
        match scheme {
            Scheme::ForwardEuler => {
                let (rhs, info) = self.rhs(f)?;
                for (x, r) in f.iter_mut().zip(&rhs) {
                    *x += dt * r;
                }
                Ok(info)
            }
            Scheme::Rk2 => {
                let (k1, info) = self.rhs(f)?;
                let mid: Vec<f64> = f
                    .iter()
                    .zip(&k1)
                    .map(|(x, r)| x + 0.5 * dt * r)
                    .collect();
                let (k2, _) = self.rhs(&mid)?;
                for (x, r) in f.iter_mut().zip(&k2) {
                    *x += dt * r;
                }
                Ok(info)
            }
        }
    }

    /// Runs to `t_final`, emitting a diagnostic record (and the state
    /// snapshot) at the configured cadence. Deterministic given identical
    /// inputs and weight table.
    pub fn run(
        &self,
        initial: Vec<f64>,
        config: &SolverConfig,
        sink: &mut dyn FnMut(&DiagnosticRecord, &[f64]) -> Result<()>,
    ) -> Result<(Vec<f64>, Vec<DiagnosticRecord>)> {
        config.validate()?;
        let mut f = initial;
        if f.len() != self.grid.len() {
            return Err(Error::Invalid(format!(
                "initial state has {} values, grid has {} nodes",
                f.len(),
                self.grid.len()
            )));
        }
        let steps = (config.t_final / config.dt).round() as usize;
        let mut records = Vec::new();
        let mut emit = |record: DiagnosticRecord,
                        f: &[f64],
                        records: &mut Vec<DiagnosticRecord>|
         -> Result<()> {
            sink(&record, f)?;
            records.push(record);
            Ok(())
        };
        emit(
            DiagnosticRecord {
                step: 0,
                t: 0.0,
                moments: moments(&f, self.grid),
                step_info: StepInfo {
                    qhat_zero: 0.0,
                    raw_mass_rel: 0.0,
                },
            },
            &f,
            &mut records,
        )?;
        for step in 1..=steps {
            let info = self.step(&mut f, config.dt, config.scheme)?;
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "distribution state",
                    step: Some(step),
                });
            }
            if step % config.output_every == 0 || step == steps {
                emit(
                    DiagnosticRecord {
                        step,
                        t: step as f64 * config.dt,
                        moments: moments(&f, self.grid),
                        step_info: info,
                    },
                    &f,
                    &mut records,
                )?;
            }
        }
        Ok((f, records))
    }
}

const STATE_MAGIC: [u8; 4] = *b"BFS1";
const STATE_VERSION: u32 = 1;

/// Writes a state dump: magic `BFS1`, version, N, L, t, then `N^3` node
/// values in lexicographic order (little-endian).
pub fn save_state(path: &Path, grid: &VelocityGrid, t: f64, f: &[f64]) -> Result<()> {
    if f.len() != grid.len() {
        return Err(Error::Invalid(format!(
            "state has {} values, grid has {} nodes",
            f.len(),
            grid.len()
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&STATE_MAGIC)?;
    w.write_all(&STATE_VERSION.to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&grid.l().to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    for v in f {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a state dump back as `(N, L, t, values)`.
pub fn load_state(path: &Path) -> Result<(usize, f64, f64, Vec<f64>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|e| Error::Cache(format!("truncated state dump: {e}")))?;
    if magic != STATE_MAGIC {
        return Err(Error::Cache(format!("bad state magic {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)
        .map_err(|e| Error::Cache(format!("truncated state dump: {e}")))?;
    let version = u32::from_le_bytes(b4);
    if version != STATE_VERSION {
        return Err(Error::Cache(format!("unsupported state version {version}")));
    }
    r.read_exact(&mut b4)
        .map_err(|e| Error::Cache(format!("truncated state dump: {e}")))?;
    let n = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)
        .map_err(|e| Error::Cache(format!("truncated state dump: {e}")))?;
    let l = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)
        .map_err(|e| Error::Cache(format!("truncated state dump: {e}")))?;
    let t = f64::from_le_bytes(b8);
    let count = n * n * n;
    let mut values = vec![0.0f64; count];
    for v in values.iter_mut() {
        r.read_exact(&mut b8)
            .map_err(|e| Error::Cache(format!("truncated state dump: {e}")))?;
        *v = f64::from_le_bytes(b8);
    }
    Ok((n, l, t, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conservation::build_projector;
    use crate::diagnostics::maxwellian;
    use crate::kernels::KernelSpec;
    use crate::weights::{build_weight_table, OperatorKind};

    // The fixture must be spectrally resolved: the imaginary-residue gate in
    // the inverse transform sees the spectral tail at the unpaired -N/2
    // frequency planes, so a sloppy (N, L, T) combination trips it. One
    // shared table keeps the suite fast.
    fn setup() -> &'static (VelocityGrid, WeightTable, ConservationProjector) {
        use std::sync::OnceLock;
        static FIXTURE: OnceLock<(VelocityGrid, WeightTable, ConservationProjector)> =
            OnceLock::new();
        FIXTURE.get_or_init(|| {
            let grid = VelocityGrid::new(8, 3.0).unwrap();
            let kernel =
                KernelSpec::maxwell_isotropic(1.0 / (4.0 * std::f64::consts::PI)).unwrap();
            let table = build_weight_table(&grid, &kernel, OperatorKind::Boltzmann).unwrap();
            let projector = build_projector(&grid).unwrap();
            (grid, table, projector)
        })
    }

    fn two_maxwellian(grid: &VelocityGrid) -> Vec<f64> {
        let a = maxwellian(0.6, [0.35, 0.2, -0.15], 0.55, grid).unwrap();
        let b = maxwellian(0.4, [-0.3, -0.1, 0.25], 0.7, grid).unwrap();
        a.iter().zip(&b).map(|(x, y)| x + y).collect()
    }

    #[test]
    fn zero_dt_is_identity() {
        let (grid, table, projector) = setup();
        let solver = Solver::new(grid, table, projector, 1.0).unwrap();
        let f0 = two_maxwellian(grid);
        let mut f = f0.clone();
        solver.step(&mut f, 0.0, Scheme::ForwardEuler).unwrap();
        assert_eq!(f, f0);
    }

    #[test]
    fn moments_preserved_per_step() {
        let (grid, table, projector) = setup();
        let solver = Solver::new(grid, table, projector, 1.0).unwrap();
        let mut f = two_maxwellian(grid);
        let before = moments(&f, grid);
        for _ in 0..5 {
            let info = solver.step(&mut f, 1e-2, Scheme::ForwardEuler).unwrap();
            assert_eq!(info.qhat_zero, 0.0);
            assert!(info.raw_mass_rel <= 1e-10);
        }
        let after = moments(&f, grid);
        assert!((after.rho - before.rho).abs() <= 1e-12 * before.rho);
        for a in 0..3 {
            assert!((after.momentum[a] - before.momentum[a]).abs() <= 1e-12);
        }
        assert!((after.energy - before.energy).abs() <= 1e-11 * before.energy);
    }

    #[test]
    fn halving_study_is_second_order() {
        // two Euler half-steps vs one full step differ at O(dt^2)
        let (grid, table, projector) = setup();
        let solver = Solver::new(grid, table, projector, 1.0).unwrap();
        let f0 = two_maxwellian(grid);
        let diff_at = |dt: f64| {
            let mut full = f0.clone();
            solver.step(&mut full, dt, Scheme::ForwardEuler).unwrap();
            let mut half = f0.clone();
            solver.step(&mut half, dt / 2.0, Scheme::ForwardEuler).unwrap();
            solver.step(&mut half, dt / 2.0, Scheme::ForwardEuler).unwrap();
            full.iter()
                .zip(&half)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        };
        let d1 = diff_at(0.1);
        let d2 = diff_at(0.05);
        let order = (d1 / d2).log2();
        assert!(
            (1.6..=2.4).contains(&order),
            "halving ratio {order} (d1 = {d1}, d2 = {d2})"
        );
    }

    #[test]
    fn run_zero_horizon_returns_initial() {
        let (grid, table, projector) = setup();
        let solver = Solver::new(grid, table, projector, 1.0).unwrap();
        let f0 = two_maxwellian(grid);
        let config = SolverConfig {
            kn: 1.0,
            dt: 1e-2,
            t_final: 0.0,
            scheme: Scheme::ForwardEuler,
            output_every: 1,
        };
        let (f, records) = solver.run(f0.clone(), &config, &mut |_, _| Ok(())).unwrap();
        assert_eq!(f, f0);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].step, 0);
    }

    #[test]
    fn restart_reproduces_continuation_bitwise() {
        let (grid, table, projector) = setup();
        let solver = Solver::new(grid, table, projector, 1.0).unwrap();
        let f0 = two_maxwellian(grid);
        let config = SolverConfig {
            kn: 1.0,
            dt: 1e-2,
            t_final: 0.06,
            scheme: Scheme::ForwardEuler,
            output_every: 3,
        };
        let (straight, _) = solver.run(f0.clone(), &config, &mut |_, _| Ok(())).unwrap();

        // stop at t = 0.03, dump, reload, continue
        let half = SolverConfig {
            t_final: 0.03,
            ..config
        };
        let (mid, _) = solver.run(f0, &half, &mut |_, _| Ok(())).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bfs");
        save_state(&path, grid, 0.03, &mid).unwrap();
        let (n, l, t, reloaded) = load_state(&path).unwrap();
        assert_eq!(n, grid.n());
        assert_eq!(l, grid.l());
        assert_eq!(t, 0.03);
        for (a, b) in mid.iter().zip(&reloaded) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let (resumed, _) = solver.run(reloaded, &half, &mut |_, _| Ok(())).unwrap();
        for (a, b) in straight.iter().zip(&resumed) {
            assert_eq!(a.to_bits(), b.to_bits(), "restart diverged");
        }
    }

    #[test]
    fn rk2_runs_and_conserves() {
        let (grid, table, projector) = setup();
        let solver = Solver::new(grid, table, projector, 2.0).unwrap();
        let mut f = two_maxwellian(grid);
        let before = moments(&f, grid);
        solver.step(&mut f, 0.05, Scheme::Rk2).unwrap();
        let after = moments(&f, grid);
        assert!((after.rho - before.rho).abs() <= 1e-12);
        assert!((after.energy - before.energy).abs() <= 1e-11 * before.energy);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            kn: 0.0,
            dt: 1e-3,
            t_final: 1.0,
            scheme: Scheme::ForwardEuler,
            output_every: 1,
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            kn: 1.0,
            dt: 0.0,
            t_final: 1.0,
            scheme: Scheme::ForwardEuler,
            output_every: 1,
        };
        assert!(bad.validate().is_err());
    }
}
