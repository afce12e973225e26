//! End-to-end runs: ground-energy estimation, ACDF sweeps, trade-off curves
//! and spectrum dumps.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::estimator::{
    acdf_closed_form, collect_samples, compute_a, legacy_a, legacy_sample_count, sample_count,
    AcdfSampleSet, EstimatorConfig, RuntimeVector,
};
use crate::fourier::{build_series, choose_params, FourierSeries};
use crate::io::{fnv1a64, parse_hamiltonian, RunConfig, RuntimeMode, SampleMode, SolverKind};
use crate::pauli::PauliSum;
use crate::runtime::{
    default_runtime, gate_cost, CostPoint, OptimizeMode, OptimizerOptions, RuntimeOptimizer,
};
use crate::solvers::{
    binary_search_gse, changepoint_gse, predicted_iterations, ChangepointConfig, ChangepointResult,
    SearchConfig, SearchTrace,
};
use crate::statevector::{
    diagonalize, exact_cdf, trial_state, SpectralReference, Spectrum, StateVector,
};

/// Everything derived from a configuration before any sampling.
pub struct Prepared {
    pub config: RunConfig,
    pub hamiltonian: PauliSum,
    pub spectrum: Spectrum,
    pub state: StateVector,
    pub reference: SpectralReference,
    pub delta_band: f64,
    pub series: FourierSeries,
    pub runtime: RuntimeVector,
    pub estimator: EstimatorConfig,
    pub a_value: f64,
    pub legacy_a_value: f64,
    pub n_samples_formula: u64,
    pub n_samples_legacy: u64,
    pub n_g: f64,
    pub config_hash: u64,
}

impl Prepared {
    pub fn n_samples(&self) -> u64 {
        self.config.n_samples.unwrap_or(self.n_samples_formula)
    }

    pub fn tau(&self) -> f64 {
        self.hamiltonian.tau()
    }

    pub fn tau_lambda(&self) -> f64 {
        self.hamiltonian.tau() * self.hamiltonian.lambda()
    }

    pub fn collect(&self, seed: u64) -> Result<AcdfSampleSet> {
        collect_samples(
            &self.hamiltonian,
            &self.state,
            &self.series,
            &self.runtime,
            &self.estimator,
            self.n_samples(),
            seed,
            self.config_hash,
        )
    }
}

/// Canonical JSON of the configuration, used for echo and hashing.
pub fn config_echo(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn config_hash(cfg: &RunConfig) -> u64 {
    fnv1a64(config_echo(cfg).to_string().as_bytes())
}

pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let hamiltonian = parse_hamiltonian(&config.hamiltonian, config.delta_precision)?;
    prepare_with(config, hamiltonian)
}

/// As [`prepare`] with an already parsed Hamiltonian.
pub fn prepare_with(config: &RunConfig, hamiltonian: PauliSum) -> Result<Prepared> {
    config.validate()?;
    let spectrum = diagonalize(&hamiltonian)?;
    let state = trial_state(&spectrum, config.eta, config.seed)?;
    let reference = spectrum.reference(&state)?;
    let tau_lambda = hamiltonian.tau() * hamiltonian.lambda();
    let delta_band = config.resolve_delta_band(hamiltonian.tau())?;
    let params = choose_params(config.epsilon, delta_band)?;
    let series = build_series(&params)?;
    let estimator = EstimatorConfig {
        eta: config.eta,
        epsilon: config.epsilon,
        nu: config.nu,
        shot_mode: config.shot_mode,
        epsilon_q: config.epsilon_q,
        epsilon_c: config.epsilon_c,
    };
    let runtime = match config.runtime_mode {
        RuntimeMode::Quadratic => default_runtime(&series, tau_lambda)?,
        RuntimeMode::Optimized => {
            let opts = OptimizerOptions {
                epsilon_c: config.epsilon_c,
                ..Default::default()
            };
            let mode = match config.gate_budget {
                Some(b) => OptimizeMode::MinSamplesBounded(b),
                None => OptimizeMode::MinTotal,
            };
            RuntimeOptimizer::new(&series, tau_lambda, &estimator, &opts)?
                .optimize(mode)?
                .r
        }
    };
    let a_value = compute_a(&series, &runtime, config.epsilon_c)?;
    let legacy_a_value = legacy_a(&series, &runtime, config.epsilon_c)?;
    let n_samples_formula = sample_count(a_value, &estimator)?;
    let n_samples_legacy = legacy_sample_count(legacy_a_value, &estimator)?;
    let n_g = gate_cost(&series, &runtime, config.epsilon_c)?;
    log::info!(
        "d = {}, beta = {:.4}, A = {:.6}, N_s = {}, N_g = {:.3}",
        params.d,
        params.beta,
        a_value,
        n_samples_formula,
        n_g
    );
    Ok(Prepared {
        config: config.clone(),
        hamiltonian,
        spectrum,
        state,
        reference,
        delta_band,
        series,
        runtime,
        estimator,
        a_value,
        legacy_a_value,
        n_samples_formula,
        n_samples_legacy,
        n_g,
        config_hash: config_hash(config),
    })
}

/// Seed for the `stream`-th independent sample set under a master seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Serialize)]
pub struct GseReport {
    pub gse_estimate: f64,
    pub beta0_reference: f64,
    pub delta0: f64,
    pub n_iters: usize,
    pub predicted_iters: usize,
    pub n_samples: u64,
    pub total_samples: u64,
    pub n_samples_formula: u64,
    pub n_samples_legacy: u64,
    pub a_value: f64,
    pub legacy_a_value: f64,
    pub n_g: f64,
    /// `2 · total samples · N_g`.
    pub expected_rotations: f64,
    pub seed: u64,
    pub d: usize,
    pub beta: f64,
    pub tau: f64,
    pub lambda: f64,
    pub delta_band: f64,
    pub solver: SolverKind,
    pub runtime: Vec<u32>,
    pub config_hash: String,
    pub config_echo: serde_json::Value,
}

#[derive(Debug, Clone)]
pub enum SolverTrace {
    Binary(SearchTrace),
    Changepoint(ChangepointResult),
}

impl SolverTrace {
    pub fn to_csv(&self) -> String {
        match self {
            SolverTrace::Binary(t) => t.to_csv(),
            SolverTrace::Changepoint(t) => t.to_csv(),
        }
    }

    pub fn file_name(&self) -> &'static str {
        match self {
            SolverTrace::Binary(_) => "search_trace.csv",
            SolverTrace::Changepoint(_) => "changepoint_trace.csv",
        }
    }
}

pub struct GseRun {
    pub report: GseReport,
    pub trace: SolverTrace,
}

impl GseRun {
    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes") + "\n"
    }
}

pub fn run_gse(config: &RunConfig) -> Result<GseRun> {
    run_prepared(&prepare(config)?)
}

pub fn run_prepared(p: &Prepared) -> Result<GseRun> {
    let cfg = &p.config;
    let tau = p.tau();
    let n = p.n_samples();
    let (gse, n_iters, sets, trace) = match cfg.solver {
        SolverKind::Binary => {
            let search = SearchConfig {
                eta: cfg.eta,
                delta_band: p.delta_band,
                tau,
                success_probability: 1.0 - cfg.nu,
                max_iters: 4 * predicted_iterations(p.delta_band) + 16,
            };
            let mut sets = 0u64;
            let trace = match cfg.sample_mode {
                SampleMode::Reuse => {
                    let set = p.collect(cfg.seed)?;
                    sets = 1;
                    binary_search_gse(|x| Ok(set.estimate_at(x)?.value), &search)?
                }
                SampleMode::Redraw => {
                    let mut step = 0u64;
                    binary_search_gse(
                        |x| {
                            let set = p.collect(derive_seed(cfg.seed, step))?;
                            step += 1;
                            sets += 1;
                            Ok(set.estimate_at(x)?.value)
                        },
                        &search,
                    )?
                }
            };
            (
                trace.result,
                trace.n_iters(),
                sets,
                SolverTrace::Binary(trace),
            )
        }
        SolverKind::Changepoint => {
            let cd = ChangepointConfig::uniform(cfg.grid_resolution, cfg.delta_c)?;
            let set = p.collect(cfg.seed)?;
            let y = cd
                .grid()
                .iter()
                .map(|&x| Ok(set.estimate_at(x)?.value))
                .collect::<Result<Vec<f64>>>()?;
            let res = changepoint_gse(&y, &cd, tau)?;
            (res.gse, res.n_passes(), 1, SolverTrace::Changepoint(res))
        }
    };
    let beta0 = p.spectrum.ground_energy();
    let params = p.series.params();
    let report = GseReport {
        gse_estimate: gse,
        beta0_reference: beta0,
        delta0: (gse - beta0).abs(),
        n_iters,
        predicted_iters: predicted_iterations(p.delta_band),
        n_samples: n,
        total_samples: n * sets,
        n_samples_formula: p.n_samples_formula,
        n_samples_legacy: p.n_samples_legacy,
        a_value: p.a_value,
        legacy_a_value: p.legacy_a_value,
        n_g: p.n_g,
        expected_rotations: 2.0 * (n * sets) as f64 * p.n_g,
        seed: cfg.seed,
        d: params.d,
        beta: params.beta,
        tau,
        lambda: p.hamiltonian.lambda(),
        delta_band: p.delta_band,
        solver: cfg.solver,
        runtime: p.runtime.segments().to_vec(),
        config_hash: format!("{:016x}", p.config_hash),
        config_echo: config_echo(cfg),
    };
    Ok(GseRun { report, trace })
}

/// Uniform grid of `points` values over `[-π/2, π/2]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    use std::f64::consts::{FRAC_PI_2, PI};
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| -FRAC_PI_2 + PI * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// One row per grid point: `x,estimate,std_error,exact_cdf,closed_form_acdf`.
/// Every row is computed from the same sample set.
pub fn run_acdf_sweep(config: &RunConfig, x_grid: &[f64]) -> Result<String> {
    let p = prepare(config)?;
    let set = p.collect(config.seed)?;
    acdf_sweep_csv(&p, &set, x_grid)
}

pub fn acdf_sweep_csv(p: &Prepared, set: &AcdfSampleSet, x_grid: &[f64]) -> Result<String> {
    let mut out = String::from("x,estimate,std_error,exact_cdf,closed_form_acdf\n");
    for &x in x_grid {
        let e = set.estimate_at(x)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            x,
            e.value,
            e.std_error,
            exact_cdf(&p.reference, p.tau(), x),
            acdf_closed_form(&p.reference, &p.series, p.tau(), x)
        );
    }
    Ok(out)
}

pub struct TradeoffRun {
    pub curve: Vec<CostPoint>,
    /// The default runtime vector evaluated on the same cost model.
    pub default_point: CostPoint,
}

pub fn run_tradeoff(config: &RunConfig, budgets: &[f64]) -> Result<TradeoffRun> {
    config.validate()?;
    let h = parse_hamiltonian(&config.hamiltonian, config.delta_precision)?;
    let tau_lambda = h.tau() * h.lambda();
    let delta_band = config.resolve_delta_band(h.tau())?;
    let series = build_series(&choose_params(config.epsilon, delta_band)?)?;
    let est = EstimatorConfig {
        eta: config.eta,
        epsilon: config.epsilon,
        nu: config.nu,
        shot_mode: config.shot_mode,
        epsilon_q: config.epsilon_q,
        epsilon_c: config.epsilon_c,
    };
    let opts = OptimizerOptions {
        epsilon_c: config.epsilon_c,
        ..Default::default()
    };
    let curve = RuntimeOptimizer::new(&series, tau_lambda, &est, &opts)?.tradeoff_curve(budgets)?;
    let rv = default_runtime(&series, tau_lambda)?;
    let default_point = crate::runtime::cost_point(&series, &rv, &est, config.epsilon_c)?;
    Ok(TradeoffRun {
        curve,
        default_point,
    })
}

/// `k,eigenvalue,overlap,cdf` for the trial state of `config`.
pub fn spectrum_csv(config: &RunConfig) -> Result<String> {
    config.validate()?;
    let h = parse_hamiltonian(&config.hamiltonian, config.delta_precision)?;
    let spectrum = diagonalize(&h)?;
    let state = trial_state(&spectrum, config.eta, config.seed)?;
    let reference = spectrum.reference(&state)?;
    let mut out = String::from("k,eigenvalue,overlap,cdf\n");
    let mut cum = 0.0;
    for (k, (e, p)) in reference
        .eigenvalues()
        .iter()
        .zip(reference.overlaps())
        .enumerate()
    {
        cum += p;
        let _ = writeln!(out, "{k},{e},{p},{}", cum.min(1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|s| derive_seed(7, s)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn grid_shape() {
        assert_eq!(uniform_grid(1), vec![0.0]);
        let g = uniform_grid(5);
        assert_eq!(g.len(), 5);
        assert!((g[4] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
