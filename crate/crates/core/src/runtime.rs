//! Gate-cost model for a runtime vector, the two optimization problems over
//! runtime vectors, and the sample/gate trade-off curve.
//!
//! With `a_j(r) = |F_j| C_j(r)^r` we have `A = Σ a_j(r_j)` and
//! `N_g = Σ a_j(r_j) r_j / A`, so both objectives are separable sums:
//!
//! * minimum total cost: minimize `Ñ_s·N_g ∝ A·Σ a_j r_j`;
//! * bounded gates: minimize `A` subject to `Σ a_j (r_j − b) ≤ 0`.
//!
//! Small instances are solved exactly with a Pareto-front dynamic program
//! over the coordinates. When the fronts grow too large the search falls
//! back to two one-parameter families of vectors: `r_j = ⌈c t_j²⌉` and the
//! per-coordinate Lagrangian minimizers `argmin_r a_j(r)(r + s)`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::compiler::normalization_sum;
use crate::error::{invalid, Error, Result};
use crate::estimator::{mu_values, EstimatorConfig, RuntimeVector};
use crate::fourier::FourierSeries;

const FEASIBILITY_TOL: f64 = 1e-12;
const FAMILY_POINTS: usize = 64;
const FAMILY_MIN: f64 = 0.2;
const FAMILY_MAX: f64 = 20.0;
const LAGRANGE_POINTS: usize = 256;

/// `r_j = max(1, ⌈2 t_j²⌉)` with `t_j = -jτλ`.
pub fn default_runtime(series: &FourierSeries, tau_lambda: f64) -> Result<RuntimeVector> {
    let r = series
        .frequencies()
        .map(|k| scaled_segments(2.0, k as f64 * tau_lambda))
        .collect();
    RuntimeVector::new(series, tau_lambda, r)
}

fn scaled_segments(c: f64, t: f64) -> u32 {
    let v = (c * t * t).ceil();
    if v < 1.0 {
        1
    } else if v > u32::MAX as f64 {
        u32::MAX
    } else {
        v as u32
    }
}

/// Expected rotations per circuit, `N_g = Σ |F_j| μ_j r_j / A`.
pub fn gate_cost(series: &FourierSeries, rv: &RuntimeVector, epsilon_c: f64) -> Result<f64> {
    let a = crate::estimator::compute_a(series, rv, epsilon_c)?;
    let mu = mu_values(rv, epsilon_c)?;
    let g: f64 = series
        .terms()
        .iter()
        .zip(&mu)
        .zip(rv.segments())
        .map(|((&(_, f), m), &r)| f * m * r as f64)
        .sum();
    Ok(g / a)
}

/// `Ñ_s = N_s / ln(1/ν) = 8 (A/(η/2−ε))²`, without rounding.
pub fn scaled_sample_count(a_value: f64, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(8.0 * (a_value / cfg.margin()).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    /// Exact optimum over the capped integer lattice.
    Exact,
    /// Best member of the one-parameter families.
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostPoint {
    pub r: RuntimeVector,
    pub n_g: f64,
    pub n_s_scaled: f64,
    pub a_value: f64,
    /// Gate budget the point was optimized for, if any.
    pub budget: Option<f64>,
    /// Scale `c` when the vector is `⌈c t_j²⌉`.
    pub c: Option<f64>,
    pub method: SearchMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizeMode {
    /// Minimize `Ñ_s · N_g`.
    MinTotal,
    /// Minimize `Ñ_s` subject to `N_g ≤ b`.
    MinSamplesBounded(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub epsilon_c: f64,
    /// Upper bound on every `r_j`; `None` uses `max(1, ⌈20 t_j²⌉)`.
    pub max_segments: Option<u32>,
    /// Largest `front size × candidates` the exact search may touch.
    pub dp_limit: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            epsilon_c: crate::compiler::DEFAULT_EPSILON_C,
            max_segments: None,
            dp_limit: 2_000_000,
        }
    }
}

/// `a_j(r)` for `r = 1..=cap_j`.
struct CostTable {
    tau_lambda: f64,
    times: Vec<f64>,
    /// `a[j][r-1]`.
    a: Vec<Vec<f64>>,
}

impl CostTable {
    fn new(series: &FourierSeries, tau_lambda: f64, opts: &OptimizerOptions) -> Result<Self> {
        let mut times = Vec::new();
        let mut a = Vec::new();
        for &(k, f) in series.terms() {
            let t = k as f64 * tau_lambda;
            let cap = match opts.max_segments {
                Some(c) => c.max(1),
                None => scaled_segments(FAMILY_MAX, t),
            };
            let row = (1..=cap)
                .map(|r| Ok(f * normalization_sum(t, r, opts.epsilon_c)?.ln_power(r).exp()))
                .collect::<Result<Vec<f64>>>()?;
            times.push(t);
            a.push(row);
        }
        Ok(Self {
            tau_lambda,
            times,
            a,
        })
    }

    fn cap(&self, j: usize) -> u32 {
        self.a[j].len() as u32
    }

    fn value(&self, j: usize, r: u32) -> f64 {
        self.a[j][r as usize - 1]
    }

    /// `(A, Σ a_j r_j)` for a vector inside the caps.
    fn totals(&self, r: &[u32]) -> (f64, f64) {
        r.iter().enumerate().fold((0.0, 0.0), |(a, g), (j, &rj)| {
            let v = self.value(j, rj);
            (a + v, g + v * rj as f64)
        })
    }
}

#[derive(Clone, Copy)]
struct State {
    a: f64,
    /// Second objective: `Σ a_j r_j` or `Σ a_j (r_j − b)`.
    h: f64,
    prev: usize,
    r: u32,
}

/// Pareto-front search. `second(a, r)` is the per-coordinate contribution to
/// the second objective; `prune_above` discards partial states whose best
/// completion of the second objective exceeds it. Returns the final front
/// with reconstructed vectors, or `None` when it would exceed `limit`.
fn pareto_search<S>(
    table: &CostTable,
    second: S,
    prune_above: Option<f64>,
    limit: usize,
) -> Option<Vec<(f64, f64, Vec<u32>)>>
where
    S: Fn(f64, u32) -> f64,
{
    let n = table.a.len();
    // smallest achievable remaining contribution to `h` from coordinate j on
    let mut suffix = vec![0.0; n + 1];
    for j in (0..n).rev() {
        let best = (1..=table.cap(j))
            .map(|r| second(table.value(j, r), r))
            .fold(f64::INFINITY, f64::min);
        suffix[j] = suffix[j + 1] + best;
    }
    let mut layers: Vec<Vec<State>> = vec![vec![State {
        a: 0.0,
        h: 0.0,
        prev: 0,
        r: 0,
    }]];
    for j in 0..n {
        let prev = layers.last().expect("nonempty");
        if prev.len().saturating_mul(table.cap(j) as usize) > limit {
            return None;
        }
        let mut next = Vec::with_capacity(prev.len() * table.cap(j) as usize);
        for (i, s) in prev.iter().enumerate() {
            for r in 1..=table.cap(j) {
                let v = table.value(j, r);
                let h = s.h + second(v, r);
                if let Some(limit_h) = prune_above {
                    if h + suffix[j + 1] > limit_h + 1e-9 * (s.a + v) {
                        continue;
                    }
                }
                next.push(State {
                    a: s.a + v,
                    h,
                    prev: i,
                    r,
                });
            }
        }
        next.sort_by(|x, y| x.a.total_cmp(&y.a).then(x.h.total_cmp(&y.h)));
        let mut front: Vec<State> = Vec::new();
        let mut best_h = f64::INFINITY;
        for s in next {
            if s.h < best_h && s.a.is_finite() {
                best_h = s.h;
                front.push(s);
            }
        }
        layers.push(front);
    }
    let last = layers.last().expect("nonempty");
    let out = last
        .iter()
        .map(|s| {
            let mut r = vec![0u32; n];
            let mut idx_state = *s;
            for j in (0..n).rev() {
                r[j] = idx_state.r;
                idx_state = layers[j][idx_state.prev];
            }
            (s.a, s.h, r)
        })
        .collect();
    Some(out)
}

fn exact_min_total(table: &CostTable, limit: usize) -> Option<Option<Vec<u32>>> {
    let front = pareto_search(table, |v, r| v * r as f64, None, limit)?;
    Some(
        front
            .into_iter()
            .min_by(|x, y| (x.0 * x.1).total_cmp(&(y.0 * y.1)))
            .map(|x| x.2),
    )
}

fn exact_bounded(table: &CostTable, budget: f64, limit: usize) -> Option<Option<Vec<u32>>> {
    let front = pareto_search(table, |v, r| v * (r as f64 - budget), Some(0.0), limit)?;
    Some(
        front
            .into_iter()
            .filter(|x| feasible(table.totals(&x.2), budget))
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .map(|x| x.2),
    )
}

fn feasible((a, g): (f64, f64), budget: f64) -> bool {
    g <= budget * a * (1.0 + FEASIBILITY_TOL)
}

/// Candidate vectors from both families, deduplicated, with their `c`.
fn family_pool(table: &CostTable) -> Vec<(Vec<u32>, Option<f64>)> {
    let mut pool: Vec<(Vec<u32>, Option<f64>)> = Vec::new();
    let clip = |j: usize, r: u32| r.clamp(1, table.cap(j));
    let push = |r: Vec<u32>, c: Option<f64>, pool: &mut Vec<(Vec<u32>, Option<f64>)>| {
        if !pool.iter().any(|(q, _)| *q == r) {
            pool.push((r, c));
        }
    };
    let mut scales: Vec<f64> = (0..FAMILY_POINTS)
        .map(|i| {
            let u = i as f64 / (FAMILY_POINTS - 1) as f64;
            FAMILY_MIN * (FAMILY_MAX / FAMILY_MIN).powf(u)
        })
        .collect();
    scales.push(2.0);
    for c in scales {
        let r = table
            .times
            .iter()
            .enumerate()
            .map(|(j, &t)| clip(j, scaled_segments(c, t)))
            .collect();
        push(r, Some(c), &mut pool);
    }
    for i in 0..LAGRANGE_POINTS {
        let u = -3.0 + 10.0 * i as f64 / (LAGRANGE_POINTS - 1) as f64;
        let s = -1.0 + 10f64.powf(u);
        let r = (0..table.a.len())
            .map(|j| {
                (1..=table.cap(j))
                    .min_by(|&x, &y| {
                        let fx = table.value(j, x) * (x as f64 + s);
                        let fy = table.value(j, y) * (y as f64 + s);
                        fx.total_cmp(&fy)
                    })
                    .expect("cap >= 1")
            })
            .collect();
        push(r, None, &mut pool);
    }
    pool
}

fn make_point(
    table: &CostTable,
    series: &FourierSeries,
    cfg: &EstimatorConfig,
    r: Vec<u32>,
    c: Option<f64>,
    budget: Option<f64>,
    method: SearchMethod,
) -> Result<CostPoint> {
    let (a, g) = table.totals(&r);
    Ok(CostPoint {
        r: RuntimeVector::new(series, table.tau_lambda, r)?,
        n_g: g / a,
        n_s_scaled: scaled_sample_count(a, cfg)?,
        a_value: a,
        budget,
        c,
        method,
    })
}

/// Reusable optimizer over one series and configuration.
pub struct RuntimeOptimizer<'a> {
    series: &'a FourierSeries,
    cfg: EstimatorConfig,
    opts: OptimizerOptions,
    table: CostTable,
    pool: Vec<(Vec<u32>, Option<f64>)>,
}

impl<'a> RuntimeOptimizer<'a> {
    pub fn new(
        series: &'a FourierSeries,
        tau_lambda: f64,
        cfg: &EstimatorConfig,
        opts: &OptimizerOptions,
    ) -> Result<Self> {
        cfg.validate()?;
        let table = CostTable::new(series, tau_lambda, opts)?;
        let pool = family_pool(&table);
        Ok(Self {
            series,
            cfg: *cfg,
            opts: *opts,
            table,
            pool,
        })
    }

    fn point(
        &self,
        r: Vec<u32>,
        c: Option<f64>,
        budget: Option<f64>,
        method: SearchMethod,
    ) -> Result<CostPoint> {
        make_point(&self.table, self.series, &self.cfg, r, c, budget, method)
    }

    fn c_of(&self, r: &[u32]) -> Option<f64> {
        self.pool.iter().find(|(q, _)| q == r).and_then(|p| p.1)
    }

    fn family_best(&self, mode: OptimizeMode) -> Result<CostPoint> {
        let score = |r: &[u32]| -> Option<f64> {
            let (a, g) = self.table.totals(r);
            if !a.is_finite() {
                return None;
            }
            match mode {
                OptimizeMode::MinTotal => Some(a * g),
                OptimizeMode::MinSamplesBounded(b) => feasible((a, g), b).then_some(a),
            }
        };
        let best = self
            .pool
            .iter()
            .filter_map(|(r, c)| score(r).map(|s| (s, r, c)))
            .min_by(|x, y| x.0.total_cmp(&y.0));
        match best {
            Some((_, r, c)) => self.point(r.clone(), *c, budget_of(mode), SearchMethod::Family),
            None => Err(self.infeasible(mode)),
        }
    }

    fn infeasible(&self, mode: OptimizeMode) -> Error {
        let min_gates = self
            .pool
            .iter()
            .map(|(r, _)| {
                let (a, g) = self.table.totals(r);
                g / a
            })
            .fold(f64::INFINITY, f64::min);
        Error::InfeasibleBudget {
            budget: budget_of(mode).unwrap_or(f64::NAN),
            min_gates,
        }
    }

    fn exact(&self, mode: OptimizeMode) -> Option<Result<CostPoint>> {
        let found = match mode {
            OptimizeMode::MinTotal => exact_min_total(&self.table, self.opts.dp_limit)?,
            OptimizeMode::MinSamplesBounded(b) => {
                exact_bounded(&self.table, b, self.opts.dp_limit)?
            }
        };
        Some(match found {
            Some(r) => {
                let c = self.c_of(&r);
                self.point(r, c, budget_of(mode), SearchMethod::Exact)
            }
            None => Err(self.infeasible(mode)),
        })
    }

    /// Exact search when it fits the limit, otherwise the families.
    pub fn optimize(&self, mode: OptimizeMode) -> Result<CostPoint> {
        check_mode(mode)?;
        match self.exact(mode) {
            Some(res) => res,
            None => {
                log::info!("exact runtime search exceeds its size limit; using vector families");
                self.family_best(mode)
            }
        }
    }

    /// One point per feasible budget. The search method is fixed for the
    /// whole curve so that points are comparable.
    pub fn tradeoff_curve(&self, budgets: &[f64]) -> Result<Vec<CostPoint>> {
        if budgets.is_empty() {
            return Err(invalid("b_g_grid", "must not be empty"));
        }
        if budgets.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("b_g_grid", "must be strictly ascending"));
        }
        let mut exact = Vec::new();
        let mut use_exact = true;
        for &b in budgets {
            let mode = OptimizeMode::MinSamplesBounded(b);
            if b < 1.0 {
                exact.push(Err(self.infeasible(mode)));
                continue;
            }
            match self.exact(mode) {
                Some(res) => exact.push(res),
                None => {
                    use_exact = false;
                    break;
                }
            }
        }
        let results: Vec<Result<CostPoint>> = if use_exact {
            exact
        } else {
            log::info!("exact runtime search exceeds its size limit; curve uses vector families");
            budgets
                .iter()
                .map(|&b| self.family_best(OptimizeMode::MinSamplesBounded(b)))
                .collect()
        };
        let mut points = Vec::new();
        for res in results {
            match res {
                Ok(p) => points.push(p),
                Err(Error::InfeasibleBudget { budget, .. }) => {
                    log::debug!("budget {budget} is infeasible, skipped");
                }
                Err(e) => return Err(e),
            }
        }
        if points.is_empty() {
            return Err(invalid("b_g_grid", "every budget is infeasible"));
        }
        Ok(points)
    }
}

fn budget_of(mode: OptimizeMode) -> Option<f64> {
    match mode {
        OptimizeMode::MinTotal => None,
        OptimizeMode::MinSamplesBounded(b) => Some(b),
    }
}

fn check_mode(mode: OptimizeMode) -> Result<()> {
    if let OptimizeMode::MinSamplesBounded(b) = mode {
        if b.is_nan() {
            return Err(invalid("b_g", "must be a number"));
        }
        if b < 1.0 {
            return Err(Error::InfeasibleBudget {
                budget: b,
                min_gates: 1.0,
            });
        }
    }
    Ok(())
}

pub fn optimize_runtime(
    series: &FourierSeries,
    tau_lambda: f64,
    cfg: &EstimatorConfig,
    mode: OptimizeMode,
    opts: &OptimizerOptions,
) -> Result<CostPoint> {
    RuntimeOptimizer::new(series, tau_lambda, cfg, opts)?.optimize(mode)
}

pub fn tradeoff_curve(
    series: &FourierSeries,
    tau_lambda: f64,
    cfg: &EstimatorConfig,
    budgets: &[f64],
    opts: &OptimizerOptions,
) -> Result<Vec<CostPoint>> {
    RuntimeOptimizer::new(series, tau_lambda, cfg, opts)?.tradeoff_curve(budgets)
}

/// Evaluate an explicit runtime vector as a cost point.
pub fn cost_point(
    series: &FourierSeries,
    rv: &RuntimeVector,
    cfg: &EstimatorConfig,
    epsilon_c: f64,
) -> Result<CostPoint> {
    let a = crate::estimator::compute_a(series, rv, epsilon_c)?;
    Ok(CostPoint {
        r: rv.clone(),
        n_g: gate_cost(series, rv, epsilon_c)?,
        n_s_scaled: scaled_sample_count(a, cfg)?,
        a_value: a,
        budget: None,
        c: None,
        method: SearchMethod::Family,
    })
}

/// Columns `b_g,n_g,n_s_scaled,c`; `c` is empty for vectors outside the
/// `⌈c t²⌉` family.
pub fn tradeoff_csv(points: &[CostPoint]) -> String {
    let mut out = String::from("b_g,n_g,n_s_scaled,c\n");
    for p in points {
        let b = p.budget.map(|b| b.to_string()).unwrap_or_default();
        let c = p.c.map(|c| c.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{b},{},{},{c}", p.n_g, p.n_s_scaled);
    }
    out
}
