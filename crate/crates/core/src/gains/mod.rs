//! Aligned and misaligned gain laws: the candidate families, the published
//! parameter tables, histogram fitting and the piece-wise constant model.

pub mod dist;
pub mod fit;
pub mod simplified;
pub mod tables;

pub use dist::{Family, GainDistribution};
pub use fit::{fit, fit_all, BinScale, BinSpec, FitReport, Histogram};
pub use simplified::{mixed_interference_gain, simplified_model, SimplifiedGainModel};
pub use tables::{mu_o_of, table_distribution, table_params, GainTable};
