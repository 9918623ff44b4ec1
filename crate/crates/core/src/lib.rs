pub mod engine;
pub mod graph;
pub mod rng;
pub mod schedule;
pub mod trees;
pub mod mis_core;
pub mod config;
pub mod record;
pub mod pipeline;
pub mod alg1;
pub mod alg2;
pub mod avg_energy;
pub mod isolate;
pub mod oracle;
