//! Tunable constants for both pipelines. `desk` is what the acceptance suite
//! runs; `paper` keeps the asymptotic constants and is only usable on tiny
//! inputs or for inspection.

use serde::{Deserialize, Serialize};

use crate::engine::log2_ceil;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Paper,
    Desk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub profile: Profile,
    pub budget_factor: u32,
    /// Phase I runs `c · ⌈log₂ n⌉` rounds per iteration.
    pub c: u32,
    /// Spoiled-neighbour allowance per iteration, `C · log n`.
    pub big_c: u32,
    /// Expected Phase I residual degree is at most `c_deg · (log₂ n)²`.
    pub c_deg: f64,
    /// Degree reduction in alg2 stops below `(log₂ n)^threshold_exp`.
    pub threshold_exp: f64,
    /// `degree_reduce_once` runs `reduce_factor · ⌈log₂ n⌉` rounds.
    pub reduce_factor: u32,
    /// Desire-level rounds in Phase II, times `⌈log₂ Δ⌉`.
    pub phase2_factor: u32,
    /// Ball radius; defaults to `⌈log₂ log₂ n⌉`.
    pub radius: Option<u32>,
    /// Tree depth cap `c_d · ⌈log₂ n⌉`.
    pub c_d: u32,
    pub alg1_coloring_steps: u32,
    pub alg2_coloring_steps: u32,
    /// Rounds of the packed executions at the end of Phase III, times
    /// `⌈log₂ Δ⌉ + ⌈log₂ log₂ n⌉`.
    pub mis_factor: u32,
    /// Phase I½ rounds per iteration, times `⌈log₂ log₂ n⌉`.
    pub half_factor: u32,
    /// Phase I½ stops once the degree bound is near `(log₂ log₂ n)^half_cap_exp`.
    pub half_cap_exp: f64,
    /// Luby rounds per sparsification stage, times `⌈log₂ d⌉`.
    pub sparsify_factor: u32,
    /// Sparsification is flagged if more than `k_s · n / 2^k` nodes remain.
    pub k_s: f64,
    /// Upper end of the allowed mean awake rounds with `--avg-energy`.
    pub a_max: f64,
}

impl Config {
    pub fn desk() -> Self {
        Config {
            profile: Profile::Desk,
            budget_factor: 4,
            c: 2,
            big_c: 8,
            c_deg: 4.0,
            threshold_exp: 3.0,
            reduce_factor: 2,
            phase2_factor: 4,
            radius: None,
            c_d: 8,
            alg1_coloring_steps: 2,
            alg2_coloring_steps: 8,
            mis_factor: 2,
            half_factor: 2,
            half_cap_exp: 3.0,
            sparsify_factor: 2,
            k_s: 4.0,
            a_max: 40.0,
        }
    }

    pub fn paper() -> Self {
        Config {
            profile: Profile::Paper,
            c: 4,
            big_c: 400,
            threshold_exp: 20.0,
            half_cap_exp: 100.0,
            ..Config::desk()
        }
    }

    pub fn for_profile(p: Profile) -> Self {
        match p {
            Profile::Paper => Config::paper(),
            Profile::Desk => Config::desk(),
        }
    }

    pub fn radius_for(&self, n: usize) -> u32 {
        self.radius.unwrap_or_else(|| loglog_ceil(n))
    }

    pub fn depth_bound(&self, n: usize) -> u32 {
        self.c_d * log2_ceil(n)
    }
}

impl Default for Config {
    fn default() -> Self {
        Config::desk()
    }
}

/// `max(1, ⌈log₂ log₂ n⌉)`.
pub fn loglog_ceil(n: usize) -> u32 {
    log2_ceil(log2_ceil(n) as usize).max(1)
}

/// `log₂ x` with `x` clamped to at least 2.
pub fn lg(x: f64) -> f64 {
    x.max(2.0).log2()
}

/// Iterated logarithm base 2, `log*(x) = 0` for `x <= 1`.
pub fn log_star(mut x: f64) -> u32 {
    let mut k = 0;
    while x > 1.0 {
        x = x.log2();
        k += 1;
    }
    k
}

/// Clamps a probability to `[0, 1]`; NaN maps to 0.
pub fn clamp_p(p: f64) -> f64 {
    if p.is_nan() {
        0.0
    } else {
        p.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_star_values() {
        assert_eq!(log_star(1.0), 0);
        assert_eq!(log_star(2.0), 1);
        assert_eq!(log_star(4.0), 2);
        assert_eq!(log_star(16.0), 3);
        assert_eq!(log_star(65536.0), 4);
        assert_eq!(log_star(65537.0), 5);
    }

    #[test]
    fn loglog_values() {
        assert_eq!(loglog_ceil(1), 1);
        assert_eq!(loglog_ceil(1 << 16), 4);
        assert_eq!(loglog_ceil(1 << 20), 5);
    }
}
