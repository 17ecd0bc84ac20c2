//! Sparse matrix containers, I/O, generators, reordering and partitioning.

mod crs;
mod gen;
mod mtx;
mod partition;
mod rcm;
mod sell;

pub use crs::{permute_vector, unpermute_vector, CrsMatrix};
pub use gen::{gen_drect, gen_hpcg, hpcg_nnz, DEFAULT_SEED};
pub use mtx::{
    read_matrix_market, read_matrix_market_from, read_matrix_market_str, write_matrix_market,
    write_matrix_market_to,
};
pub use partition::{partition_crs, partition_sell, partition_weights, PartitionMode};
pub use rcm::{rcm_permutation, rcm_reorder};
pub use sell::{effective_sigma, to_sell, SellMatrix, SELL_MAGIC, SELL_VERSION};
