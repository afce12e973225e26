//! Monte-Carlo estimator of the approximate CDF that uses only the positive
//! odd frequencies.
//!
//! With `z_j = ⟨φ|e^{it_j Ĥ}|φ⟩` the smoothed CDF is
//! `C̃(x) = ½ + 2 Σ_{j∈S₁⁺} |F_j| (sin(jx) Re z_j + cos(jx) Im z_j)`.
//! Each sample draws `j` with probability `|F_j| μ_j / A`, a compiled unitary
//! for `e^{it_j Ĥ}` and a pair of Hadamard-test outcomes; the records do not
//! depend on `x` and are reused for every query point.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{normalization_sum, CompilationConfig, SampledUnitary, UnitarySampler};
use crate::error::{invalid, Error, Result};
use crate::fourier::FourierSeries;
use crate::pauli::PauliSum;
use crate::statevector::{SpectralReference, StateVector};

/// Segment counts `r_j` and times `t_j = -jτλ` for each retained frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeVector {
    freqs: Vec<u32>,
    t: Vec<f64>,
    r: Vec<u32>,
}

impl RuntimeVector {
    /// Pair `r` with the frequencies of `series` at scale `τλ`.
    pub fn new(series: &FourierSeries, tau_lambda: f64, r: Vec<u32>) -> Result<Self> {
        let freqs: Vec<u32> = series.frequencies().collect();
        if r.len() != freqs.len() {
            return Err(Error::DimensionMismatch {
                expected: freqs.len(),
                actual: r.len(),
            });
        }
        if r.contains(&0) {
            return Err(invalid("r", "every segment count must be at least 1"));
        }
        if !(tau_lambda >= 0.0) || !tau_lambda.is_finite() {
            return Err(invalid("tau_lambda", "must be finite and nonnegative"));
        }
        let t = freqs.iter().map(|&k| -(k as f64) * tau_lambda).collect();
        Ok(Self { freqs, t, r })
    }

    pub fn freqs(&self) -> &[u32] {
        &self.freqs
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn segments(&self) -> &[u32] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn max_segments(&self) -> u32 {
        self.r.iter().copied().max().unwrap_or(1)
    }

    fn check(&self, series: &FourierSeries) -> Result<()> {
        if !self.freqs.iter().copied().eq(series.frequencies()) {
            return Err(invalid(
                "runtime_vector",
                "frequencies do not match the Fourier series",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotMode {
    /// One ±1 outcome per Hadamard test.
    #[default]
    SingleShot,
    /// Store the exact expectation instead of a shot.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub eta: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub shot_mode: ShotMode,
    pub epsilon_q: f64,
    pub epsilon_c: f64,
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid(
                "eta",
                format!("must lie in (0, 1], got {}", self.eta),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < self.eta / 2.0) {
            return Err(invalid(
                "epsilon",
                format!(
                    "must lie in (0, eta/2) = (0, {}), got {}",
                    self.eta / 2.0,
                    self.epsilon
                ),
            ));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(invalid(
                "nu",
                format!("must lie in (0, 1), got {}", self.nu),
            ));
        }
        if !(self.epsilon_q > 0.0 && self.epsilon_q < 1.0) {
            return Err(invalid("epsilon_q", "must lie in (0, 1)"));
        }
        if !(self.epsilon_c > 0.0) {
            return Err(invalid("epsilon_c", "must be positive"));
        }
        Ok(())
    }

    /// Threshold margin `η/2 − ε`.
    pub fn margin(&self) -> f64 {
        self.eta / 2.0 - self.epsilon
    }
}

/// `μ_j = C_j^{r_j}` for every frequency (may be `+∞` on overflow).
pub fn mu_values(rv: &RuntimeVector, epsilon_c: f64) -> Result<Vec<f64>> {
    rv.t.iter()
        .zip(&rv.r)
        .map(|(&t, &r)| Ok(normalization_sum(t, r, epsilon_c)?.ln_power(r).exp()))
        .collect()
}

/// `A = Σ_{j∈S₁⁺} |F_j| μ_j`.
pub fn compute_a(series: &FourierSeries, rv: &RuntimeVector, epsilon_c: f64) -> Result<f64> {
    rv.check(series)?;
    let mu = mu_values(rv, epsilon_c)?;
    Ok(series
        .terms()
        .iter()
        .zip(mu)
        .map(|(&(_, f), m)| f * m)
        .sum())
}

/// `A° = Σ_{j∈S₁} |F_j| μ_j` over both signs of `j` plus `|F₀| = ½`.
///
/// The negative frequencies use times `+jτλ` with the same segment counts.
pub fn legacy_a(series: &FourierSeries, rv: &RuntimeVector, epsilon_c: f64) -> Result<f64> {
    rv.check(series)?;
    let mut total = series.f0();
    for ((&(_, f), &t), &r) in series.terms().iter().zip(&rv.t).zip(&rv.r) {
        let pos = normalization_sum(t, r, epsilon_c)?.ln_power(r).exp();
        let neg = normalization_sum(-t, r, epsilon_c)?.ln_power(r).exp();
        total += f * pos + f * neg;
    }
    Ok(total)
}

/// `⌈8 (A/(η/2−ε))² ln(1/ν)⌉`, clamped to at least 1.
pub fn sample_count(a_value: f64, cfg: &EstimatorConfig) -> Result<u64> {
    cfg.validate()?;
    let raw = 8.0 * (a_value / cfg.margin()).powi(2) * (1.0 / cfg.nu).ln();
    Ok(clamp_count(raw))
}

/// `⌈(2A°/(η/2−ε))² ln(1/ν)⌉` for the estimator over all of `S₁`.
pub fn legacy_sample_count(legacy_a_value: f64, cfg: &EstimatorConfig) -> Result<u64> {
    cfg.validate()?;
    let raw = (2.0 * legacy_a_value / cfg.margin()).powi(2) * (1.0 / cfg.nu).ln();
    Ok(clamp_count(raw))
}

fn clamp_count(raw: f64) -> u64 {
    let n = raw.ceil();
    if n < 1.0 {
        log::warn!("sample count formula gives {raw}; using 1 sample");
        return 1;
    }
    if n >= u64::MAX as f64 {
        return u64::MAX;
    }
    n as u64
}

/// One reusable sample: the drawn frequency and the two test outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub j: u32,
    pub z_re: f64,
    pub z_im: f64,
}

/// Draws `(j, U)` pairs with `j ∝ |F_j| μ_j`.
#[derive(Debug, Clone)]
pub struct FrequencySampler {
    freqs: Vec<u32>,
    segments: Vec<u32>,
    weights: WeightedIndex<f64>,
    samplers: Vec<UnitarySampler>,
    a_value: f64,
}

impl FrequencySampler {
    pub fn new(
        h: &PauliSum,
        series: &FourierSeries,
        rv: &RuntimeVector,
        epsilon_q: f64,
        epsilon_c: f64,
    ) -> Result<Self> {
        rv.check(series)?;
        let mu = mu_values(rv, epsilon_c)?;
        let w: Vec<f64> = series
            .terms()
            .iter()
            .zip(&mu)
            .map(|(&(_, f), m)| f * m)
            .collect();
        let a_value: f64 = w.iter().sum();
        if !a_value.is_finite() {
            return Err(invalid(
                "runtime_vector",
                "normalization overflows; increase the segment counts",
            ));
        }
        let weights = WeightedIndex::new(&w).map_err(|e| invalid("series", e.to_string()))?;
        let samplers =
            rv.t.iter()
                .zip(&rv.r)
                .map(|(&t, &r)| UnitarySampler::new(h, &CompilationConfig::new(t, r, epsilon_q)?))
                .collect::<Result<_>>()?;
        Ok(Self {
            freqs: rv.freqs.clone(),
            segments: rv.r.clone(),
            weights,
            samplers,
            a_value,
        })
    }

    pub fn a_value(&self) -> f64 {
        self.a_value
    }

    /// Returns the frequency, its segment count and the compiled unitary.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32, SampledUnitary) {
        let i = self.weights.sample(rng);
        (
            self.freqs[i],
            self.segments[i],
            self.samplers[i].sample(rng),
        )
    }
}

/// The random stream for sample `index` under a master seed.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Immutable set of collected samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AcdfSampleSet {
    records: Vec<SampleRecord>,
    a_value: f64,
    seed: u64,
    config_hash: u64,
    shot_mode: ShotMode,
}

/// Emulated Hadamard tests for `e = s·⟨φ|U|φ⟩`.
fn outcomes<R: Rng + ?Sized>(e: Complex64, mode: ShotMode, rng: &mut R) -> (f64, f64) {
    match mode {
        ShotMode::Exact => (e.re, e.im),
        ShotMode::SingleShot => {
            let shot = |v: f64, rng: &mut R| {
                let p = ((1.0 + v) / 2.0).clamp(0.0, 1.0);
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    -1.0
                }
            };
            let re = shot(e.re, rng);
            let im = shot(e.im, rng);
            (re, im)
        }
    }
}

/// Draw `n_samples` records in parallel; sample `n` uses stream `(seed, n)`,
/// so the result does not depend on the thread count.
#[allow(clippy::too_many_arguments)]
pub fn collect_samples(
    h: &PauliSum,
    state: &StateVector,
    series: &FourierSeries,
    rv: &RuntimeVector,
    cfg: &EstimatorConfig,
    n_samples: u64,
    seed: u64,
    config_hash: u64,
) -> Result<AcdfSampleSet> {
    cfg.validate()?;
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            left: h.n_qubits(),
            right: state.n_qubits(),
        });
    }
    let sampler = FrequencySampler::new(h, series, rv, cfg.epsilon_q, cfg.epsilon_c)?;
    let records = (0..n_samples)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, n);
            let (j, _, u) = sampler.draw(&mut rng);
            let e = u.phase().apply(state.expectation(&u)?);
            let (z_re, z_im) = outcomes(e, cfg.shot_mode, &mut rng);
            Ok(SampleRecord { j, z_re, z_im })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AcdfSampleSet {
        records,
        a_value: sampler.a_value(),
        seed,
        config_hash,
        shot_mode: cfg.shot_mode,
    })
}

/// One ACDF query result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcdfEstimate {
    pub x: f64,
    pub value: f64,
    pub std_error: f64,
}

impl AcdfSampleSet {
    pub fn from_records(
        records: Vec<SampleRecord>,
        a_value: f64,
        seed: u64,
        config_hash: u64,
        shot_mode: ShotMode,
    ) -> Self {
        Self {
            records,
            a_value,
            seed,
            config_hash,
            shot_mode,
        }
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn count(&self) -> usize {
        self.records.len()
    }

    pub fn a_value(&self) -> f64 {
        self.a_value
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config_hash(&self) -> u64 {
        self.config_hash
    }

    pub fn shot_mode(&self) -> ShotMode {
        self.shot_mode
    }

    /// `½ + 2A·mean(sin(jx) z_re + cos(jx) z_im)`.
    pub fn estimate_at(&self, x: f64) -> Result<AcdfEstimate> {
        let n = self.records.len();
        if n == 0 {
            return Err(Error::EmptySampleSet);
        }
        let gamma = |r: &SampleRecord| {
            let (s, c) = (r.j as f64 * x).sin_cos();
            s * r.z_re + c * r.z_im
        };
        let mean = self.records.iter().map(gamma).sum::<f64>() / n as f64;
        let var = if n > 1 {
            self.records
                .iter()
                .map(|r| (gamma(r) - mean).powi(2))
                .sum::<f64>()
                / (n - 1) as f64
        } else {
            0.0
        };
        Ok(AcdfEstimate {
            x,
            value: 0.5 + 2.0 * self.a_value * mean,
            std_error: 2.0 * self.a_value * var.sqrt() / (n as f64).sqrt(),
        })
    }

    /// CSV with a `#` header carrying `a_value`, `seed` and `config_hash`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mode = match self.shot_mode {
            ShotMode::SingleShot => "single_shot",
            ShotMode::Exact => "exact",
        };
        let _ = writeln!(out, "# a_value={}", self.a_value);
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# config_hash={:016x}", self.config_hash);
        let _ = writeln!(out, "# shot_mode={mode}");
        out.push_str("n,j,z_re,z_im\n");
        for (n, r) in self.records.iter().enumerate() {
            let _ = writeln!(out, "{n},{},{},{}", r.j, r.z_re, r.z_im);
        }
        out
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut a_value = None;
        let mut seed = 0;
        let mut config_hash = 0;
        let mut shot_mode = ShotMode::SingleShot;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| err(no, "header line without `=`".into()))?;
                match k.trim() {
                    "a_value" => {
                        a_value = Some(v.trim().parse().map_err(|e| err(no, format!("{e}")))?)
                    }
                    "seed" => seed = v.trim().parse().map_err(|e| err(no, format!("{e}")))?,
                    "config_hash" => {
                        config_hash = u64::from_str_radix(v.trim(), 16)
                            .map_err(|e| err(no, format!("{e}")))?
                    }
                    "shot_mode" => {
                        shot_mode = match v.trim() {
                            "exact" => ShotMode::Exact,
                            "single_shot" => ShotMode::SingleShot,
                            other => return Err(err(no, format!("unknown shot mode {other:?}"))),
                        }
                    }
                    _ => {}
                }
                continue;
            }
            if line.starts_with("n,") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(err(no, format!("expected 4 columns, got {}", cols.len())));
            }
            let f = |s: &str| s.trim().parse::<f64>().map_err(|e| err(no, format!("{e}")));
            records.push(SampleRecord {
                j: cols[1]
                    .trim()
                    .parse()
                    .map_err(|e| err(no, format!("{e}")))?,
                z_re: f(cols[2])?,
                z_im: f(cols[3])?,
            });
        }
        let a_value = a_value.ok_or_else(|| err(0, "missing a_value header".into()))?;
        Ok(Self::from_records(
            records,
            a_value,
            seed,
            config_hash,
            shot_mode,
        ))
    }
}

/// `C̃(x) = Σ_k p_k F(x − τβ_k)` for a point spectrum.
pub fn acdf_closed_form(
    reference: &SpectralReference,
    series: &FourierSeries,
    tau: f64,
    x: f64,
) -> f64 {
    reference
        .eigenvalues()
        .iter()
        .zip(reference.overlaps())
        .map(|(e, p)| p * series.evaluate(x - tau * e))
        .sum()
}
