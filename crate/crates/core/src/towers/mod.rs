//! Cutting and stacking: balanced partitions, towers and the decompositions
//! built from them.

mod decompose;
mod greedy;
mod pub_partition;
mod refine;
mod tower;
mod tub;
mod two_step;

pub use decompose::{decompose_bounded, decompose_two_value, Decomposition};
pub use greedy::greedy_stack;
pub use pub_partition::{build_pub_partition, build_pub_partition_exact, level_sets, PubPartition, DEFAULT_MAX_CELLS};
pub use refine::{max_partial_sum_spread, quantization_steps, refine_levels};
pub use tower::{range_on, Tower, TowerAudit};
pub use tub::build_tub_tower;
pub use two_step::{build_two_step_towers, build_two_step_towers_with_convergents, TowerPair};

pub(crate) use pub_partition::{equal_cells, CellRule};
