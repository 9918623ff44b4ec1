//! Least-squares fits of `metric ≈ K · shape(n)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sleeping_mis::config::log_star;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// log₂ log₂ n
    Loglog,
    Log,
    /// (log₂ n)²
    Logsq,
    /// (log₂ log₂ n)²
    LoglogSq,
    /// log₂ n · log₂ log₂ n · log* n
    LogLoglogLogstar,
}

impl GrowthModel {
    pub const ALL: [GrowthModel; 5] = [
        GrowthModel::Loglog,
        GrowthModel::Log,
        GrowthModel::Logsq,
        GrowthModel::LoglogSq,
        GrowthModel::LogLoglogLogstar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GrowthModel::Loglog => "loglog",
            GrowthModel::Log => "log",
            GrowthModel::Logsq => "logsq",
            GrowthModel::LoglogSq => "loglog_sq",
            GrowthModel::LogLoglogLogstar => "log_loglog_logstar",
        }
    }

    pub fn shape(self, n: f64) -> f64 {
        let l = n.log2();
        let ll = l.log2();
        match self {
            GrowthModel::Loglog => ll,
            GrowthModel::Log => l,
            GrowthModel::Logsq => l * l,
            GrowthModel::LoglogSq => ll * ll,
            GrowthModel::LogLoglogLogstar => l * ll * log_star(n) as f64,
        }
    }
}

impl fmt::Display for GrowthModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GrowthModel {
    type Err = FitError;

    fn from_str(s: &str) -> Result<Self, FitError> {
        GrowthModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| FitError::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least 3 distinct n, got {0}")]
    InsufficientData(usize),
    #[error("shape of {model} is not positive at n = {n}")]
    DegenerateShape { model: GrowthModel, n: usize },
    #[error("unknown growth model {0:?}")]
    UnknownModel(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub model: GrowthModel,
    pub k: f64,
    /// Root mean square of `metric − K · shape(n)`.
    pub residual: f64,
    /// `metric / shape(n)` per point, sorted by `n`.
    pub ratios: Vec<(usize, f64)>,
    /// The ratio falls by more than 10% from the smallest to the largest
    /// `n`: the model grows faster than the data.
    pub over_model: bool,
    /// The ratio rises by more than 10%.
    pub under_model: bool,
}

pub fn fit_growth(series: &[(usize, f64)], model: GrowthModel) -> Result<Fit, FitError> {
    let mut pts = series.to_vec();
    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut distinct: Vec<usize> = pts.iter().map(|p| p.0).collect();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(FitError::InsufficientData(distinct.len()));
    }
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for &(n, y) in &pts {
        let s = model.shape(n as f64);
        if !(s > 0.0) {
            return Err(FitError::DegenerateShape { model, n });
        }
        sxy += s * y;
        sxx += s * s;
    }
    let k = sxy / sxx;
    let sq: f64 = pts.iter().map(|&(n, y)| (y - k * model.shape(n as f64)).powi(2)).sum();
    let residual = (sq / pts.len() as f64).sqrt();
    let ratios: Vec<(usize, f64)> = pts.iter().map(|&(n, y)| (n, y / model.shape(n as f64))).collect();
    let first = ratios.first().unwrap().1;
    let last = ratios.last().unwrap().1;
    let change = if first == 0.0 { 0.0 } else { (last - first) / first };
    Ok(Fit { model, k, residual, ratios, over_model: change < -0.1, under_model: change > 0.1 })
}
