//! Experiment harness for the sleeping-mis simulator: configuration files,
//! sweeps, verification suites, reports and growth fits.

pub mod fit;
pub mod report;
pub mod settings;
pub mod sweep;
pub mod verify;
