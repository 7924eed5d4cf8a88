//! Binary cache for precomputed weight tables.
//!
//! Little-endian layout:
//!
//! | field         | type       |
//! |---------------|------------|
//! | magic         | `b"BWT1"`  |
//! | version       | u32 (= 1)  |
//! | operator tag  | u32 (0 Boltzmann, 1 Landau) |
//! | N             | u32        |
//! | L             | f64        |
//! | lambda        | f64        |
//! | beta          | f64        |
//! | angular tag   | u32 (0 isotropic-const, 1 grazing-Rutherford, 2 tabulated) |
//! | family param  | f64 (constant value or eps; 0 for tabulated) |
//! | quad_tol      | f64        |
//! | values        | `N^6` f64, zeta-index major, lexicographic ordering |
//! | entry count   | u64 footer |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::grid::VelocityGrid;
use crate::kernels::KernelSpec;
use crate::weights::build::{KernelMeta, OperatorKind, WeightTable};
use crate::{Error, Result};

const MAGIC: [u8; 4] = *b"BWT1";
const VERSION: u32 = 1;

/// Writes a weight table to `path`; the roundtrip through
/// [`load_table`] is bit-exact.
pub fn save_table(table: &WeightTable, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&table.operator.tag().to_le_bytes())?;
    w.write_all(&(table.n as u32).to_le_bytes())?;
    w.write_all(&table.l.to_le_bytes())?;
    w.write_all(&table.kernel.lambda.to_le_bytes())?;
    w.write_all(&table.kernel.beta.to_le_bytes())?;
    w.write_all(&table.kernel.family_tag.to_le_bytes())?;
    w.write_all(&table.kernel.family_param.to_le_bytes())?;
    w.write_all(&table.quad_tol.to_le_bytes())?;
    for v in &table.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&(table.values.len() as u64).to_le_bytes())?;
    w.flush()?;
    Ok(())
}

/// Reads a weight table, validating magic, version, tensor length, and the
/// entry-count footer. Parameter validation against a run is a separate
/// step; see [`load_table_matching`].
pub fn load_table(path: &Path) -> Result<WeightTable> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    if magic != MAGIC {
        return Err(Error::Cache(format!(
            "bad magic {:?}; not a weight cache",
            magic
        )));
    }
    let version = read_u32(&mut r, "version")?;
    if version != VERSION {
        return Err(Error::Cache(format!(
            "unsupported cache version {version} (expected {VERSION})"
        )));
    }
    let operator = OperatorKind::from_tag(read_u32(&mut r, "operator tag")?)?;
    let n = read_u32(&mut r, "N")? as usize;
    if n < 4 || n % 2 != 0 {
        return Err(Error::Cache(format!("invalid N = {n} in header")));
    }
    let l = read_f64(&mut r, "L")?;
    let lambda = read_f64(&mut r, "lambda")?;
    let beta = read_f64(&mut r, "beta")?;
    let family_tag = read_u32(&mut r, "angular family tag")?;
    if family_tag > 2 {
        return Err(Error::Cache(format!("unknown angular family tag {family_tag}")));
    }
    let family_param = read_f64(&mut r, "family parameter")?;
    let quad_tol = read_f64(&mut r, "quad_tol")?;

    let count = n.pow(3) * n.pow(3);
    let mut values = vec![0.0f64; count];
    let mut buf = vec![0u8; 8 * 4096];
    let mut filled = 0usize;
    while filled < count {
        let take = (count - filled).min(4096);
        let bytes = &mut buf[..8 * take];
        read_exact(&mut r, bytes, "tensor values")?;
        for (i, chunk) in bytes.chunks_exact(8).enumerate() {
            values[filled + i] = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        filled += take;
    }

    let footer = {
        let mut b = [0u8; 8];
        read_exact(&mut r, &mut b, "entry-count footer")?;
        u64::from_le_bytes(b)
    };
    if footer != count as u64 {
        return Err(Error::Cache(format!(
            "entry-count footer {footer} does not match N^6 = {count}"
        )));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Cache("trailing bytes after footer".into()));
    }

    Ok(WeightTable {
        n,
        l,
        operator,
        kernel: KernelMeta {
            lambda,
            beta,
            family_tag,
            family_param,
        },
        quad_tol,
        values,
    })
}

/// Loads a table and refuses it unless the header matches the requested
/// grid, kernel, and operator.
pub fn load_table_matching(
    path: &Path,
    grid: &VelocityGrid,
    kernel: &KernelSpec,
    operator: OperatorKind,
) -> Result<WeightTable> {
    let table = load_table(path)?;
    table.matches_grid(grid)?;
    table.matches_kernel(kernel, operator)?;
    Ok(table)
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Cache(format!("truncated file while reading {what}: {e}")))
}

fn read_u32(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read, what: &str) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::build::build_weight_table;

    fn small_table() -> (VelocityGrid, KernelSpec, WeightTable) {
        let grid = VelocityGrid::new(4, 2.0).unwrap();
        let kernel =
            KernelSpec::maxwell_isotropic(1.0 / (4.0 * std::f64::consts::PI)).unwrap();
        let table = build_weight_table(&grid, &kernel, OperatorKind::Boltzmann).unwrap();
        (grid, kernel, table)
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let (grid, kernel, table) = small_table();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.bwt");
        save_table(&table, &path).unwrap();
        let back = load_table_matching(&path, &grid, &kernel, OperatorKind::Boltzmann).unwrap();
        assert_eq!(table.values().len(), back.values().len());
        for (a, b) in table.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.quad_tol(), table.quad_tol());
    }

    #[test]
    fn wrong_parameters_are_refused() {
        let (_, kernel, table) = small_table();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.bwt");
        save_table(&table, &path).unwrap();

        let bigger = VelocityGrid::new(6, 2.0).unwrap();
        assert!(matches!(
            load_table_matching(&path, &bigger, &kernel, OperatorKind::Boltzmann),
            Err(Error::TableMismatch { field: "N", .. })
        ));
        let grid = VelocityGrid::new(4, 2.0).unwrap();
        assert!(load_table_matching(&path, &grid, &kernel, OperatorKind::Landau).is_err());
        let coulomb = KernelSpec::coulomb_grazing(1e-3).unwrap();
        assert!(load_table_matching(&path, &grid, &coulomb, OperatorKind::Boltzmann).is_err());
    }

    #[test]
    fn corruption_is_detected() {
        let (_, _, table) = small_table();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.bwt");
        save_table(&table, &path).unwrap();

        // truncate mid-tensor
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_table(&path), Err(Error::Cache(_))));

        // bad magic
        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(load_table(&path), Err(Error::Cache(_))));

        // corrupt footer
        let mut bad = bytes.clone();
        let len = bad.len();
        bad[len - 1] ^= 0xFF;
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(load_table(&path), Err(Error::Cache(_))));
    }
}
