//! Randomized MIS primitives shared by both pipelines.

pub mod desire;
pub mod linial;
pub mod luby;
pub mod phase3;
pub mod shatter;

pub use desire::{desire_level_mis, packed_parallel_mis, PackedOutcome};
pub use luby::{run_luby, MisOutcome};
pub use phase3::{phase3_component_mis, Coloring, IterationStats, Phase3Error, Phase3Stats};
pub use shatter::{cluster_remaining, grow_balls, shatter_and_cluster, Shattered};
