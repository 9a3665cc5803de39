//! Published gain-law parameters per array size.

use serde::{Deserialize, Serialize};

use super::dist::GainDistribution;
use crate::error::{Error, Result};

/// Which published table to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainTable {
    /// Aligned 3GPP gain, exponential-logarithmic `(b_o, p_o)`.
    AlignedExpLog,
    /// Misaligned ISO gain, log-logistic `(a, b)`.
    MisalignedLogLogistic,
    /// Misaligned 3GPP gain, exponential-logarithmic `(b_x, p_x)`.
    MisalignedExpLog,
}

const SIZES: [usize; 4] = [4, 16, 64, 256];

// rows: smaller element count, columns: larger element count
type Grid = [[Option<(f64, f64)>; 4]; 4];

const ALIGNED_EXPLOG: Grid = [
    [Some((0.002, 0.112)), Some((4e-4, 0.075)), Some((1e-4, 0.0713)), Some((7.84e-5, 0.15))],
    [None, Some((2e-4, 0.15)), Some((8.24e-5, 0.511)), Some((1.93e-5, 0.1223))],
    [None, None, Some((1.84e-5, 0.15)), Some((4.83e-6, 0.089))],
    [None, None, None, Some((1.96e-6, 0.1126))],
];

const MISALIGNED_LOGLOGISTIC: Grid = [
    [Some((3.28, 0.877)), Some((2.51, 0.743)), Some((2.11, 0.722)), Some((1.92, 0.709))],
    [None, Some((3.49, 0.656)), Some((3.28, 0.612)), Some((2.89, 0.589))],
    [None, None, Some((2.55, 0.57)), Some((1.98, 0.551))],
    [None, None, None, Some((1.45, 0.547))],
];

const MISALIGNED_EXPLOG: Grid = [
    [Some((4.428, 4.3e-5)), Some((0.7967, 3.7e-5)), Some((0.288, 6.8e-5)), Some((1.2e-4, 1.5e-9))],
    [None, Some((0.2873, 6.5e-5)), Some((0.024, 3.6e-5)), Some((0.075, 7.4e-7))],
    [None, None, Some((0.2316, 1.5e-4)), Some((0.0133, 2.34e-5))],
    [None, None, None, Some((0.2406, 2.7e-4))],
];

fn size_index(n: usize) -> Option<usize> {
    SIZES.iter().position(|&s| s == n)
}

/// Parameter pair for `(n_tx, n_rx)`. The tables are symmetric in the two
/// sizes; sizes off the 4/16/64/256 grid are an error.
pub fn table_params(table: GainTable, n_tx: usize, n_rx: usize) -> Result<(f64, f64)> {
    let unsupported = || Error::UnsupportedSize { n_tx, n_rx };
    let i = size_index(n_tx.min(n_rx)).ok_or_else(unsupported)?;
    let j = size_index(n_tx.max(n_rx)).ok_or_else(unsupported)?;
    let grid = match table {
        GainTable::AlignedExpLog => &ALIGNED_EXPLOG,
        GainTable::MisalignedLogLogistic => &MISALIGNED_LOGLOGISTIC,
        GainTable::MisalignedExpLog => &MISALIGNED_EXPLOG,
    };
    grid[i][j].ok_or_else(unsupported)
}

pub fn table_distribution(table: GainTable, n_tx: usize, n_rx: usize) -> Result<GainDistribution> {
    let (x, y) = table_params(table, n_tx, n_rx)?;
    match table {
        GainTable::AlignedExpLog | GainTable::MisalignedExpLog => GainDistribution::exp_logarithmic(x, y),
        GainTable::MisalignedLogLogistic => GainDistribution::log_logistic(x, y),
    }
}

/// Rate of the exponential aligned ISO gain as a power law of the element
/// product, `0.814 / (n_tx n_rx)^0.927`.
pub fn mu_o_of(n_tx: usize, n_rx: usize) -> f64 {
    0.814 / ((n_tx as f64) * (n_rx as f64)).powf(0.927)
}

/// Nakagami fit of the misaligned ISO gain at 256 x 64.
pub fn nakagami_reference() -> GainDistribution {
    GainDistribution::Nakagami { m: 0.099, g: 50.53 }
}

/// Log-normal fit of the misaligned ISO gain at 256 x 64.
pub fn log_normal_reference() -> GainDistribution {
    GainDistribution::LogNormal { sigma: 2.962, mu: 0.908 }
}

/// Burr fit of the misaligned ISO gain at 256 x 64.
pub fn burr_reference() -> GainDistribution {
    GainDistribution::Burr { c: 0.692, k: 0.518 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn published_cells() {
        assert_eq!(table_params(GainTable::AlignedExpLog, 256, 256).unwrap(), (1.96e-6, 0.1126));
        assert_eq!(table_params(GainTable::MisalignedLogLogistic, 256, 64).unwrap(), (1.98, 0.551));
        assert_eq!(table_params(GainTable::MisalignedLogLogistic, 256, 256).unwrap(), (1.45, 0.547));
        assert_eq!(table_params(GainTable::MisalignedExpLog, 4, 4).unwrap(), (4.428, 4.3e-5));
    }

    #[test]
    fn symmetric_and_complete_on_grid() {
        for table in [GainTable::AlignedExpLog, GainTable::MisalignedLogLogistic, GainTable::MisalignedExpLog] {
            for a in SIZES {
                for b in SIZES {
                    let x = table_params(table, a, b).unwrap();
                    assert_eq!(x, table_params(table, b, a).unwrap());
                    assert!(table_distribution(table, a, b).is_ok());
                }
            }
        }
    }

    #[test]
    fn off_grid_is_an_error() {
        assert!(matches!(table_params(GainTable::AlignedExpLog, 8, 64), Err(Error::UnsupportedSize { n_tx: 8, n_rx: 64 })));
        assert!(table_params(GainTable::MisalignedExpLog, 1, 4).is_err());
    }

    #[test]
    fn mu_o_values() {
        // (256 * 64)^0.927 = exp(0.927 ln 16384)
        let direct = 0.814 / (0.927 * 16384f64.ln()).exp();
        assert_relative_eq!(mu_o_of(256, 64), direct, max_relative = 1e-14);
        assert_relative_eq!(mu_o_of(256, 64), 1.0089e-4, max_relative = 1e-3);
        assert_relative_eq!(mu_o_of(4, 4), 0.0623, max_relative = 1e-3);
        assert_eq!(mu_o_of(16, 256), mu_o_of(256, 16));
    }
}
