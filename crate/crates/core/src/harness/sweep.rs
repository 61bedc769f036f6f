use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TradeError};

use super::episode::run_summary;
use super::RunConfig;

/// Environment variable read for the default worker count.
pub const WORKERS_ENV: &str = "SMOOTH_TRADE_WORKERS";

/// Worker count from the environment, falling back to the CPU count.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub mean_regret: f64,
    pub stderr: f64,
    pub n_seeds: usize,
}

/// Least-squares line through `(ln T, ln mean_regret)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Absent when the regret is indistinguishable from noise.
    pub fit: Option<LogLogFit>,
    /// Every mean regret is at most its standard error.
    pub regret_within_noise: bool,
}

/// Least-squares fit on log-log axes; needs two points with positive values.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(TradeError::InvalidParameter(
            "log-log fit needs at least two points with positive coordinates".into(),
        ));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(TradeError::InvalidParameter("horizons must differ".into()));
    }
    let slope = sxy / sxx;
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Runs `template` at every horizon for every seed on a pool of `workers`
/// threads. Results are gathered in (horizon, seed) order, so the output does
/// not depend on scheduling.
pub fn sweep(
    template: &RunConfig,
    horizons: &[usize],
    seeds: &[u64],
    workers: Option<usize>,
) -> Result<SweepResult> {
    if horizons.len() < 2 {
        return Err(TradeError::InvalidParameter(format!(
            "a sweep needs at least 2 horizons, got {}",
            horizons.len()
        )));
    }
    if seeds.is_empty() {
        return Err(TradeError::InvalidParameter("a sweep needs seeds".into()));
    }
    let tasks: Vec<(usize, u64)> = horizons
        .iter()
        .flat_map(|&h| seeds.iter().map(move |&s| (h, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or_else(default_workers))
        .build()
        .map_err(|e| TradeError::InvalidParameter(format!("worker pool: {e}")))?;
    let regrets: Vec<f64> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(h, s)| run_summary(&template.with_horizon(h), s).map(|r| r.regret))
            .collect::<Result<_>>()
    })?;
    let points: Vec<SweepPoint> = horizons
        .iter()
        .zip(regrets.chunks(seeds.len()))
        .map(|(&horizon, chunk)| {
            let (mean_regret, stderr) = mean_stderr(chunk);
            SweepPoint {
                horizon,
                mean_regret,
                stderr,
                n_seeds: chunk.len(),
            }
        })
        .collect();
    let regret_within_noise = points.iter().all(|p| p.mean_regret <= p.stderr);
    let fit = if regret_within_noise {
        None
    } else {
        let xy: Vec<(f64, f64)> = points
            .iter()
            .map(|p| (p.horizon as f64, p.mean_regret))
            .collect();
        fit_loglog(&xy).ok()
    };
    Ok(SweepResult {
        points,
        fit,
        regret_within_noise,
    })
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
