//! Ground-energy search over the approximate CDF: a thresholded bisection
//! with overshoot and a left-recursing binary segmentation.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub eta: f64,
    /// Band margin δ; the search stops once the bracket is at most `2δ` wide.
    pub delta_band: f64,
    pub tau: f64,
    /// Overall success probability `1 − ζ`.
    pub success_probability: f64,
    pub max_iters: usize,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid("eta", "must lie in (0, 1]"));
        }
        if !(self.delta_band > 0.0 && self.delta_band <= FRAC_PI_2) {
            return Err(invalid("delta_band", "must lie in (0, π/2]"));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(invalid("tau", "must be positive"));
        }
        if !(self.success_probability > 0.0 && self.success_probability < 1.0) {
            return Err(invalid("success_probability", "must lie in (0, 1)"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be positive"));
        }
        Ok(())
    }

    /// Per-query failure probability `ζ / N_iter` for a union bound over the
    /// predicted number of iterations.
    pub fn per_query_nu(&self) -> f64 {
        (1.0 - self.success_probability) / predicted_iterations(self.delta_band) as f64
    }
}

/// Iterations the bisection needs for margin `δ`.
///
/// The width obeys `w' = w/2 + 2δ/3` from `w₀ = π` whichever way the test
/// goes, so the count is `⌈log₂((π − 4δ/3)/(2δ/3))⌉`.
pub fn predicted_iterations(delta_band: f64) -> usize {
    let mut w = std::f64::consts::PI;
    let mut l = 0;
    while w > 2.0 * delta_band {
        w = w / 2.0 + 2.0 * delta_band / 3.0;
        l += 1;
    }
    l
}

/// One bisection step; `x0`, `x1` is the bracket the midpoint was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchStep {
    pub x: f64,
    pub estimate: f64,
    pub flag: bool,
    pub x0: f64,
    pub x1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchTrace {
    pub iterations: Vec<SearchStep>,
    /// Final bracket.
    pub x0: f64,
    pub x1: f64,
    /// Final midpoint `x*`.
    pub x_star: f64,
    /// Energy estimate `x*/τ`.
    pub result: f64,
}

impl SearchTrace {
    pub fn n_iters(&self) -> usize {
        self.iterations.len()
    }

    /// Columns `iteration,x_l,estimate,flag,x0,x1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,x_l,estimate,flag,x0,x1\n");
        for (i, s) in self.iterations.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                i,
                s.x,
                s.estimate,
                u8::from(s.flag),
                s.x0,
                s.x1
            );
        }
        out
    }
}

/// Bisection on `[-π/2, π/2]`: query the ACDF at the midpoint and move the
/// upper end to `x + 2δ/3` when it reaches `η/2`, else the lower end to
/// `x − 2δ/3`.
pub fn binary_search_gse<F>(mut acdf_query: F, cfg: &SearchConfig) -> Result<SearchTrace>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    let delta = cfg.delta_band;
    let (mut x0, mut x1) = (-FRAC_PI_2, FRAC_PI_2);
    let mut iterations = Vec::new();
    while x1 - x0 > 2.0 * delta {
        if iterations.len() >= cfg.max_iters {
            return Err(Error::NonConvergence {
                max_iters: cfg.max_iters,
            });
        }
        let x = 0.5 * (x0 + x1);
        let c = acdf_query(x)?;
        let flag = c >= cfg.eta / 2.0;
        log::debug!(
            "bisection step {}: C({x:.6}) = {c:.6}, flag = {flag}",
            iterations.len()
        );
        iterations.push(SearchStep {
            x,
            estimate: c,
            flag,
            x0,
            x1,
        });
        if flag {
            x1 = x + 2.0 * delta / 3.0;
        } else {
            x0 = x - 2.0 * delta / 3.0;
        }
    }
    let x_star = 0.5 * (x0 + x1);
    Ok(SearchTrace {
        iterations,
        x0,
        x1,
        x_star,
        result: x_star / cfg.tau,
    })
}

fn deviation(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - mean).powi(2)).sum()
}

/// `V(Y_{m:n}) = Σ_{k=m}^{n} (y_k − ȳ)²` with 1-based inclusive bounds.
pub fn total_deviation(y: &[f64], m: usize, n: usize) -> Result<f64> {
    if m < 1 || m > n || n > y.len() {
        return Err(invalid(
            "range",
            format!("need 1 <= m <= n <= {}, got m = {m}, n = {n}", y.len()),
        ));
    }
    Ok(deviation(&y[m - 1..n]))
}

/// Least-squares single mean change: the `m ∈ [1, M−1]` minimizing
/// `V(Y_{1:m}) + V(Y_{m+1:M})`, leftmost among ties.
pub fn single_changepoint(y: &[f64]) -> Result<usize> {
    Ok(best_split(y)?.0)
}

// (split, cost of the two segments)
fn best_split(y: &[f64]) -> Result<(usize, f64)> {
    if y.len() < 2 {
        return Err(invalid("y", "need at least two points"));
    }
    // relative tie tolerance plus the rounding floor of the sums themselves
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * deviation(y) + 4.0 * f64::EPSILON * y.len() as f64 * scale * scale;
    let mut best = (1, f64::INFINITY);
    for m in 1..y.len() {
        let cost = deviation(&y[..m]) + deviation(&y[m..]);
        if cost < best.1 - tol {
            best = (m, cost);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangepointConfig {
    grid: Vec<f64>,
    pub delta_c: f64,
    resolution: f64,
}

impl ChangepointConfig {
    /// `x_k = -π/2 + k·resolution` for `k = 0..⌊π/resolution⌋`.
    pub fn uniform(resolution: f64, delta_c: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution < std::f64::consts::PI) {
            return Err(invalid("grid_resolution", "must lie in (0, π)"));
        }
        let m = (std::f64::consts::PI / resolution).floor() as usize + 1;
        let grid = (0..m).map(|k| -FRAC_PI_2 + k as f64 * resolution).collect();
        Self::new(grid, delta_c)
    }

    pub fn new(grid: Vec<f64>, delta_c: f64) -> Result<Self> {
        if grid.len() < 3 {
            return Err(invalid("grid", "need at least three points"));
        }
        if !(delta_c > 0.0) {
            return Err(invalid("delta_c", "must be positive"));
        }
        let resolution = grid[1] - grid[0];
        if !(resolution > 0.0) {
            return Err(invalid("grid", "must be ascending"));
        }
        for w in grid.windows(2) {
            if ((w[1] - w[0]) - resolution).abs() > 1e-12 {
                return Err(invalid("grid", "spacing must be uniform"));
            }
        }
        if grid[0] < -FRAC_PI_2 - 1e-12 || grid[grid.len() - 1] > FRAC_PI_2 + 1e-12 {
            return Err(invalid("grid", "must lie inside [-π/2, π/2]"));
        }
        Ok(Self {
            grid,
            delta_c,
            resolution,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }
}

/// One call of the single-changepoint routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChangepointPass {
    /// Length of the prefix that was split.
    pub segment_len: usize,
    /// Left segment is `y[..split]`.
    pub split: usize,
    /// `V(segment) − V(left) − V(right)`.
    pub drop: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangepointResult {
    pub gse: f64,
    /// Last accepted split.
    pub split: usize,
    pub passes: Vec<ChangepointPass>,
}

impl ChangepointResult {
    pub fn n_passes(&self) -> usize {
        self.passes.len()
    }

    /// Columns `pass,split,drop,accepted`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pass,split,drop,accepted\n");
        for (i, p) in self.passes.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", i, p.split, p.drop, u8::from(p.accepted));
        }
        out
    }
}

/// Binary segmentation that keeps splitting the left segment while the
/// deviation drop exceeds `Δ_c`; returns the midpoint of the two grid values
/// around the last significant split, divided by `τ`.
pub fn changepoint_gse(y: &[f64], cfg: &ChangepointConfig, tau: f64) -> Result<ChangepointResult> {
    if y.len() != cfg.grid.len() {
        return Err(Error::DimensionMismatch {
            expected: cfg.grid.len(),
            actual: y.len(),
        });
    }
    if !(tau > 0.0) {
        return Err(invalid("tau", "must be positive"));
    }
    let mut passes = Vec::new();
    let mut accepted: Option<usize> = None;
    let mut len = y.len();
    while len >= 2 {
        let seg = &y[..len];
        let (split, cost) = best_split(seg)?;
        let drop = deviation(seg) - cost;
        let ok = drop > cfg.delta_c;
        passes.push(ChangepointPass {
            segment_len: len,
            split,
            drop,
            accepted: ok,
        });
        log::debug!(
            "changepoint pass {}: split {split} of {len}, drop {drop:.4e}",
            passes.len()
        );
        if !ok {
            break;
        }
        accepted = Some(split);
        len = split;
    }
    let split = match accepted {
        Some(s) => s,
        None => {
            return Err(Error::NoChangepoint {
                drop: passes[0].drop,
                threshold: cfg.delta_c,
            })
        }
    };
    let gse = (cfg.grid[split - 1] + cfg.grid[split]) / (2.0 * tau);
    Ok(ChangepointResult { gse, split, passes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_cfg(eta: f64, delta: f64) -> SearchConfig {
        SearchConfig {
            eta,
            delta_band: delta,
            tau: 1.0,
            success_probability: 0.9,
            max_iters: 200,
        }
    }

    #[test]
    fn bisection_finds_step() {
        let cfg = step_cfg(1.0, 0.01);
        let t = binary_search_gse(|x| Ok(if x >= 0.0 { 1.0 } else { 0.0 }), &cfg).unwrap();
        assert!(t.result.abs() <= 0.01);
        assert!(t.x1 - t.x0 <= 0.02);
        assert_eq!(t.n_iters(), predicted_iterations(0.01));
    }

    #[test]
    fn predicted_iterations_closed_form() {
        for d in [0.1, 0.01, 0.001, 0.108_331] {
            let closed = ((std::f64::consts::PI - 4.0 * d / 3.0) / (2.0 * d / 3.0))
                .log2()
                .ceil();
            assert_eq!(predicted_iterations(d), closed as usize);
        }
    }

    #[test]
    fn bisection_reports_nonconvergence() {
        let mut cfg = step_cfg(1.0, 0.001);
        cfg.max_iters = 3;
        assert!(matches!(
            binary_search_gse(|_| Ok(0.0), &cfg),
            Err(Error::NonConvergence { max_iters: 3 })
        ));
    }

    #[test]
    fn deviation_values() {
        assert_eq!(total_deviation(&[0.0, 0.0, 1.0, 1.0], 1, 4).unwrap(), 1.0);
        assert_eq!(total_deviation(&[2.0; 5], 1, 5).unwrap(), 0.0);
        assert_eq!(total_deviation(&[3.0, 4.0], 2, 2).unwrap(), 0.0);
        assert!(total_deviation(&[1.0], 0, 1).is_err());
        assert!(total_deviation(&[1.0], 1, 2).is_err());
    }

    #[test]
    fn single_split() {
        assert_eq!(single_changepoint(&[0., 0., 0., 1., 1., 1.]).unwrap(), 3);
        assert_eq!(single_changepoint(&[0.4; 7]).unwrap(), 1);
        assert!(single_changepoint(&[1.0]).is_err());
    }

    #[test]
    fn segmentation_finds_first_jump() {
        let cfg = ChangepointConfig::uniform(0.1, 0.01).unwrap();
        let y: Vec<f64> = cfg
            .grid()
            .iter()
            .map(|&x| {
                if x < -0.5 {
                    0.0
                } else if x < 0.4 {
                    0.1
                } else {
                    1.0
                }
            })
            .collect();
        let r = changepoint_gse(&y, &cfg, 1.0).unwrap();
        assert!((r.gse - -0.5).abs() <= 0.1, "{}", r.gse);
        assert!(r.passes.len() >= 2);
        let splits: Vec<usize> = r
            .passes
            .iter()
            .filter(|p| p.accepted)
            .map(|p| p.split)
            .collect();
        assert!(splits.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn flat_sequence_has_no_changepoint() {
        let cfg = ChangepointConfig::uniform(0.2, 0.01).unwrap();
        let y = vec![0.3; cfg.grid().len()];
        assert!(matches!(
            changepoint_gse(&y, &cfg, 1.0),
            Err(Error::NoChangepoint { .. })
        ));
    }

    #[test]
    fn uniform_grid_shape() {
        let cfg = ChangepointConfig::uniform(0.057, 0.01).unwrap();
        assert_eq!(cfg.grid().len(), 56);
        assert!(cfg.grid()[55] <= FRAC_PI_2);
        assert!(ChangepointConfig::new(vec![0.0, 0.1, 0.3], 0.1).is_err());
    }
}
